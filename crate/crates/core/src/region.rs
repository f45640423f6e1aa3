//! Contact-aware occluded-region identification.
//!
//! Given visible human and object masks plus an optional contact map, the
//! occluder mask is split into a primary region (inside the convex hull of
//! the human-object boundary band and the contact pixels) and a secondary
//! region (everything else on the occluder).

use serde::Serialize;

use crate::error::{Error, Result};
use crate::hull::{convex_hull, rasterize_hull, ConvexPolygon};
use crate::mask::{BinaryMask, PixelPoint};
use crate::par::{self, Execution};

/// The visible masks of one scene.
#[derive(Debug, Clone, PartialEq)]
pub struct SceneMasks {
    pub human: BinaryMask,
    pub object: BinaryMask,
    pub contact: BinaryMask,
    pub smpl: Option<BinaryMask>,
    pub occluder_is_human: bool,
}

impl SceneMasks {
    /// Validates dimensions and makes human and object mutually exclusive by
    /// handing overlapping pixels to the occluder.
    pub fn new(
        human: BinaryMask,
        object: BinaryMask,
        contact: Option<BinaryMask>,
        smpl: Option<BinaryMask>,
        occluder_is_human: bool,
    ) -> Result<Self> {
        let dims = human.dims();
        let check = |name: &str, m: &BinaryMask| {
            if m.dims() == dims {
                Ok(())
            } else {
                Err(Error::shape(name, dims, m.dims()))
            }
        };
        check("object mask", &object)?;
        if let Some(c) = &contact {
            check("contact mask", c)?;
        }
        if let Some(s) = &smpl {
            check("smpl mask", s)?;
        }
        let contact = match contact {
            Some(c) => c,
            None => BinaryMask::new(dims.0, dims.1)?,
        };
        let (human, object) = if occluder_is_human {
            let object = object.difference(&human)?;
            (human, object)
        } else {
            (human.difference(&object)?, object)
        };
        Ok(Self { human, object, contact, smpl, occluder_is_human })
    }

    pub fn dims(&self) -> (usize, usize) {
        self.human.dims()
    }

    /// `M_in`: the mask of the subject in front.
    pub fn occluder(&self) -> &BinaryMask {
        if self.occluder_is_human {
            &self.human
        } else {
            &self.object
        }
    }

    /// The visible part of the subject being completed.
    pub fn occludee(&self) -> &BinaryMask {
        if self.occluder_is_human {
            &self.object
        } else {
            &self.human
        }
    }
}

/// Primary and secondary inpainting regions.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegionPair {
    #[serde(skip)]
    pub primary: BinaryMask,
    #[serde(skip)]
    pub secondary: BinaryMask,
    /// `None` when the hull point set was empty.
    pub hull: Option<ConvexPolygon>,
    pub degenerate_fallback: bool,
}

impl RegionPair {
    /// Checks the partition contract: matching dimensions and disjoint
    /// regions.
    pub fn validate(&self) -> Result<()> {
        if self.primary.dims() != self.secondary.dims() {
            return Err(Error::shape("region pair", self.primary.dims(), self.secondary.dims()));
        }
        let overlap = self.primary.intersect(&self.secondary)?.area();
        if overlap != 0 {
            return Err(Error::Input(format!("primary and secondary regions overlap on {overlap} pixels")));
        }
        Ok(())
    }

    pub fn union(&self) -> Result<BinaryMask> {
        self.primary.union(&self.secondary)
    }

    /// Resamples both regions. Nearest-neighbour sampling keeps the pair
    /// disjoint. The hull is kept in source coordinates.
    pub fn resample_nearest(&self, width: usize, height: usize) -> Result<Self> {
        Ok(Self {
            primary: self.primary.resample_nearest(width, height)?,
            secondary: self.secondary.resample_nearest(width, height)?,
            hull: self.hull.clone(),
            degenerate_fallback: self.degenerate_fallback,
        })
    }
}

/// Band where human and object come within `2 * radius` pixels of each
/// other: the intersection of both dilations.
pub fn occlusion_boundary(human: &BinaryMask, object: &BinaryMask, radius: usize) -> Result<BinaryMask> {
    if radius == 0 {
        return Err(Error::Parameter("boundary dilation radius must be at least 1".into()));
    }
    if human.dims() != object.dims() {
        return Err(Error::shape("occlusion boundary", human.dims(), object.dims()));
    }
    human.dilate(radius).intersect(&object.dilate(radius))
}

/// Splits the occluder into primary and secondary regions.
pub fn identify_regions(scene: &SceneMasks, radius: usize) -> Result<RegionPair> {
    let occluder = scene.occluder();
    if occluder.is_empty() {
        return Err(Error::Input("occluder mask is empty".into()));
    }
    let (w, h) = scene.dims();
    let boundary = occlusion_boundary(&scene.human, &scene.object, radius)?;
    let seeds = boundary.union(&scene.contact)?;
    let points = seeds.foreground_points();

    let fallback = |hull: Option<ConvexPolygon>| -> Result<RegionPair> {
        Ok(RegionPair { primary: occluder.clone(), secondary: BinaryMask::new(w, h)?, hull, degenerate_fallback: true })
    };

    if points.is_empty() {
        return fallback(None);
    }
    let hull = convex_hull(&points)?;
    let hull_mask = rasterize_hull(&hull, w, h)?;
    let primary = occluder.intersect(&hull_mask)?;
    if primary.is_empty() {
        return fallback(Some(hull));
    }
    let secondary = occluder.difference(&primary)?;
    Ok(RegionPair { primary, secondary, hull: Some(hull), degenerate_fallback: false })
}

/// Runs [`identify_regions`] over a batch. Errors carry the scene index.
pub fn identify_batch(scenes: &[SceneMasks], radius: usize, exec: Execution) -> Result<Vec<RegionPair>> {
    par::map(exec, scenes, |s| identify_regions(s, radius))
        .into_iter()
        .enumerate()
        .map(|(i, r)| r.map_err(|e| e.in_scene(i)))
        .collect()
}

/// Occluded-human region for human completion: the SMPL projection clipped to
/// the occluding object.
pub fn human_primary_region(smpl: &BinaryMask, object: &BinaryMask) -> Result<BinaryMask> {
    smpl.intersect(object)
}

/// Repaint region for human completion: the SMPL projection clipped to the
/// completed (amodal) object mask.
pub fn human_repaint_region(smpl: &BinaryMask, completed_object_mask: &BinaryMask) -> Result<BinaryMask> {
    smpl.intersect(completed_object_mask)
}

/// Region pair for human completion: primary is the SMPL/object overlap, the
/// rest of the object mask is secondary.
pub fn identify_human_regions(scene: &SceneMasks) -> Result<RegionPair> {
    let smpl = scene.smpl.as_ref().ok_or_else(|| Error::Input("human completion requires an SMPL mask".into()))?;
    let object = &scene.object;
    if object.is_empty() {
        return Err(Error::Input("object mask is empty".into()));
    }
    let primary = human_primary_region(smpl, object)?;
    if primary.is_empty() {
        return Ok(RegionPair {
            primary: object.clone(),
            secondary: BinaryMask::new(object.width(), object.height())?,
            hull: None,
            degenerate_fallback: true,
        });
    }
    let secondary = object.difference(&primary)?;
    Ok(RegionPair { primary, secondary, hull: None, degenerate_fallback: false })
}

/// Default disc radius for rendering contact keypoints: 5 px at 512 px
/// width, never below 1.
pub fn default_contact_radius(width: usize) -> usize {
    ((5.0 * width as f64 / 512.0).round() as usize).max(1)
}

/// Renders contact keypoints as filled Euclidean discs.
pub fn contact_mask_from_points(
    width: usize,
    height: usize,
    points: &[PixelPoint],
    radius: usize,
) -> Result<BinaryMask> {
    let mut mask = BinaryMask::new(width, height)?;
    let r = radius as i64;
    for p in points {
        for dy in -r..=r {
            for dx in -r..=r {
                if dx * dx + dy * dy <= r * r {
                    mask.set_checked(p.x as i64 + dx, p.y as i64 + dy, true);
                }
            }
        }
    }
    Ok(mask)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rect(w: usize, h: usize, x0: usize, y0: usize, x1: usize, y1: usize) -> BinaryMask {
        BinaryMask::from_fn(w, h, |x, y| x >= x0 && x < x1 && y >= y0 && y < y1).unwrap()
    }

    #[test]
    fn separated_masks_have_no_boundary() {
        let human = rect(40, 20, 0, 0, 10, 20);
        let object = rect(40, 20, 20, 0, 30, 20);
        assert!(occlusion_boundary(&human, &object, 3).unwrap().is_empty());
        assert!(occlusion_boundary(&human, &object, 0).is_err());
    }

    #[test]
    fn abutting_half_planes_give_two_pixel_band() {
        let human = rect(20, 10, 0, 0, 10, 10);
        let object = rect(20, 10, 10, 0, 20, 10);
        let band = occlusion_boundary(&human, &object, 1).unwrap();
        assert_eq!(band, rect(20, 10, 9, 0, 11, 10));
    }

    #[test]
    fn overlap_goes_to_occluder() {
        let human = rect(20, 20, 0, 0, 12, 20);
        let object = rect(20, 20, 8, 5, 18, 15);
        let scene = SceneMasks::new(human.clone(), object.clone(), None, None, true).unwrap();
        assert_eq!(scene.human, human);
        assert_eq!(scene.object, rect(20, 20, 12, 5, 18, 15));

        let scene = SceneMasks::new(human, object.clone(), None, None, false).unwrap();
        assert_eq!(scene.object, object);
        assert!(scene.human.intersect(&object).unwrap().is_empty());
    }

    #[test]
    fn scene_rejects_mismatched_masks() {
        let human = rect(20, 20, 0, 0, 5, 5);
        let object = rect(21, 20, 0, 0, 5, 5);
        assert!(matches!(SceneMasks::new(human, object, None, None, true), Err(Error::Shape(_))));
    }

    #[test]
    fn empty_occluder_rejected() {
        let scene = SceneMasks::new(BinaryMask::new(8, 8).unwrap(), rect(8, 8, 0, 0, 4, 4), None, None, true).unwrap();
        assert!(matches!(identify_regions(&scene, 1), Err(Error::Input(_))));
    }

    #[test]
    fn far_apart_without_contact_falls_back() {
        let scene = SceneMasks::new(rect(40, 20, 0, 0, 8, 20), rect(40, 20, 30, 0, 38, 20), None, None, true).unwrap();
        let pair = identify_regions(&scene, 1).unwrap();
        assert!(pair.degenerate_fallback);
        assert!(pair.hull.is_none());
        assert_eq!(pair.primary, scene.human);
        assert!(pair.secondary.is_empty());
    }

    #[test]
    fn full_contact_makes_everything_primary() {
        let human = rect(30, 30, 5, 5, 15, 25);
        let object = rect(30, 30, 15, 10, 25, 20);
        let scene = SceneMasks::new(human.clone(), object, Some(human.clone()), None, true).unwrap();
        let pair = identify_regions(&scene, 1).unwrap();
        assert!(!pair.degenerate_fallback);
        assert_eq!(pair.primary, human);
        assert!(pair.secondary.is_empty());
    }

    #[test]
    fn human_regions() {
        let smpl = rect(20, 20, 0, 0, 10, 20);
        let object = rect(20, 20, 5, 5, 15, 15);
        let disjoint = rect(20, 20, 12, 0, 20, 20);
        assert!(human_primary_region(&smpl, &disjoint).unwrap().is_empty());
        let inside = rect(20, 20, 2, 2, 6, 6);
        assert_eq!(human_primary_region(&smpl, &inside).unwrap(), inside);
        assert_eq!(human_repaint_region(&smpl, &object).unwrap(), human_primary_region(&smpl, &object).unwrap());
        assert!(human_repaint_region(&smpl, &BinaryMask::new(20, 20).unwrap()).unwrap().is_empty());
        let grown = object.dilate(2);
        let base = human_primary_region(&smpl, &object).unwrap();
        let repaint = human_repaint_region(&smpl, &grown).unwrap();
        assert!(base.is_subset_of(&repaint).unwrap());
        assert!(repaint.area() > base.area());
    }

    #[test]
    fn human_mode_pair_partitions_object() {
        let smpl = rect(20, 20, 0, 0, 10, 20);
        let human = rect(20, 20, 0, 0, 6, 20);
        let object = rect(20, 20, 5, 5, 15, 15);
        let scene = SceneMasks::new(human, object, None, Some(smpl), false).unwrap();
        let pair = identify_human_regions(&scene).unwrap();
        pair.validate().unwrap();
        assert_eq!(pair.union().unwrap(), scene.object);
        assert_eq!(pair.primary, rect(20, 20, 5, 5, 10, 15));
    }

    #[test]
    fn contact_disc() {
        let m = contact_mask_from_points(10, 10, &[PixelPoint::new(5, 5)], 1).unwrap();
        assert_eq!(m.area(), 5);
        let edge = contact_mask_from_points(10, 10, &[PixelPoint::new(0, 0)], 2).unwrap();
        assert_eq!(edge.area(), 6);
        assert_eq!(default_contact_radius(512), 5);
        assert_eq!(default_contact_radius(64), 1);
    }

    #[test]
    fn validate_rejects_overlap() {
        let a = rect(10, 10, 0, 0, 5, 5);
        let pair = RegionPair { primary: a.clone(), secondary: a, hull: None, degenerate_fallback: false };
        assert!(pair.validate().is_err());
    }
}
