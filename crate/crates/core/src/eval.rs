//! Evaluation metrics and dataset selection rules.

use serde::{Deserialize, Serialize};

use crate::diffusion::ImageBuffer;
use crate::error::{Error, Result};
use crate::mask::BinaryMask;
use crate::par::{self, Execution};
use crate::region::{identify_regions, SceneMasks};

/// Occlusion bounds for accepted scenes, in percent, both inclusive.
pub const MIN_OCCLUSION_PCT: usize = 10;
pub const MAX_OCCLUSION_PCT: usize = 70;
/// Minimum visible object area as a percentage of the human area.
pub const MIN_VISIBLE_TO_HUMAN_PCT: usize = 5;

/// Intersection over union. Two empty masks score 1.
pub fn iou(a: &BinaryMask, b: &BinaryMask) -> Result<f64> {
    let inter = a.intersect(b)?.area();
    let union = a.union(b)?.area();
    if union == 0 {
        return Ok(1.0);
    }
    Ok(inter as f64 / union as f64)
}

/// Mean of per-pair IoUs.
pub fn miou(predicted: &[BinaryMask], truth: &[BinaryMask]) -> Result<f64> {
    if predicted.len() != truth.len() {
        return Err(Error::Input(format!(
            "{} predicted masks for {} ground-truth masks",
            predicted.len(),
            truth.len()
        )));
    }
    if predicted.is_empty() {
        return Err(Error::Input("mIoU over an empty list".into()));
    }
    let mut total = 0.0;
    for (i, (p, t)) in predicted.iter().zip(truth).enumerate() {
        total += iou(p, t).map_err(|e| Error::Input(format!("pair {i}: {e}")))?;
    }
    Ok(total / predicted.len() as f64)
}

/// Share of `region` covered by the full (amodal) object.
pub fn occluded_pixel_ratio(full_object: &BinaryMask, region: &BinaryMask) -> Result<f64> {
    let covered = full_object.intersect(region)?.area();
    let area = region.area();
    if area == 0 {
        return Err(Error::UndefinedRatio("occluded-pixel ratio of an empty region".into()));
    }
    Ok(covered as f64 / area as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OcclusionRecord {
    pub occlusion_ratio: f64,
    pub full_object_area: usize,
    pub visible_object_area: usize,
    pub human_area: usize,
    pub accepted: bool,
}

/// Applies the occlusion-range and visible-area rules.
///
/// The acceptance test runs on integer pixel counts so the 10 % and 70 %
/// bounds are reached exactly.
pub fn selection_filter(
    full_object: &BinaryMask,
    visible_object: &BinaryMask,
    human: &BinaryMask,
) -> Result<OcclusionRecord> {
    if full_object.dims() != visible_object.dims() || full_object.dims() != human.dims() {
        return Err(Error::Shape("selection filter masks differ in size".into()));
    }
    let full = full_object.area();
    if full == 0 {
        return Err(Error::Input("full object mask is empty".into()));
    }
    let visible = visible_object.area();
    let human_area = human.area();
    let occluded = full.saturating_sub(visible);
    let in_range = occluded * 100 >= MIN_OCCLUSION_PCT * full && occluded * 100 <= MAX_OCCLUSION_PCT * full;
    let big_enough = visible * 100 >= MIN_VISIBLE_TO_HUMAN_PCT * human_area;
    Ok(OcclusionRecord {
        occlusion_ratio: occluded as f64 / full as f64,
        full_object_area: full,
        visible_object_area: visible,
        human_area,
        accepted: in_range && big_enough,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OcclusionGroup {
    /// 10 % to under 40 %.
    Light,
    /// 40 % to 70 %.
    Heavy,
}

impl OcclusionGroup {
    pub fn of(ratio: f64) -> Option<Self> {
        if (0.10..0.40).contains(&ratio) {
            Some(OcclusionGroup::Light)
        } else if (0.40..=0.70).contains(&ratio) {
            Some(OcclusionGroup::Heavy)
        } else {
            None
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            OcclusionGroup::Light => "light",
            OcclusionGroup::Heavy => "heavy",
        }
    }
}

/// Amodal mask read back from a completed image: every pixel whose value
/// departs from the segmentation background by more than `tolerance` in any
/// channel.
pub fn extract_amodal_mask(image: &ImageBuffer, background: f64, tolerance: f64) -> Result<BinaryMask> {
    BinaryMask::from_fn(image.width(), image.height(), |x, y| {
        image.pixel(x, y).iter().any(|v| (v - background).abs() > tolerance)
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneRegionRecord {
    pub index: usize,
    pub degenerate_fallback: bool,
    pub primary_area: usize,
    pub secondary_area: usize,
    pub primary_occluded_ratio: f64,
    /// `None` when the secondary region is empty.
    pub secondary_occluded_ratio: Option<f64>,
    pub occlusion: OcclusionRecord,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionReport {
    pub n: usize,
    pub miou: Option<f64>,
    /// Reserved for an externally computed CLIP score.
    pub clip_score: Option<f64>,
    pub primary_occluded_ratio_mean: f64,
    /// Mean over scenes with a non-empty secondary region.
    pub secondary_occluded_ratio_mean: Option<f64>,
    pub accepted_count: usize,
    pub records: Vec<SceneRegionRecord>,
}

fn scene_record(
    index: usize,
    scene: &SceneMasks,
    full_object: &BinaryMask,
    radius: usize,
) -> Result<SceneRegionRecord> {
    let regions = identify_regions(scene, radius)?;
    let primary_occluded_ratio = occluded_pixel_ratio(full_object, &regions.primary)?;
    let secondary_occluded_ratio =
        if regions.secondary.is_empty() { None } else { Some(occluded_pixel_ratio(full_object, &regions.secondary)?) };
    let occlusion = selection_filter(full_object, scene.occludee(), &scene.human)?;
    Ok(SceneRegionRecord {
        index,
        degenerate_fallback: regions.degenerate_fallback,
        primary_area: regions.primary.area(),
        secondary_area: regions.secondary.area(),
        primary_occluded_ratio,
        secondary_occluded_ratio,
        occlusion,
    })
}

/// Per-scene region statistics averaged over a batch. Scenes are evaluated
/// independently and reduced in input order.
pub fn region_report(scenes: &[(SceneMasks, BinaryMask)], radius: usize, exec: Execution) -> Result<RegionReport> {
    if scenes.is_empty() {
        return Err(Error::Input("region report over an empty scene list".into()));
    }
    let indexed: Vec<(usize, &(SceneMasks, BinaryMask))> = scenes.iter().enumerate().collect();
    let records =
        par::map(exec, &indexed, |&(i, (scene, full))| scene_record(i, scene, full, radius).map_err(|e| e.in_scene(i)))
            .into_iter()
            .collect::<Result<Vec<_>>>()?;

    let n = records.len();
    let primary_mean = records.iter().map(|r| r.primary_occluded_ratio).sum::<f64>() / n as f64;
    let secondary: Vec<f64> = records.iter().filter_map(|r| r.secondary_occluded_ratio).collect();
    let secondary_mean = (!secondary.is_empty()).then(|| secondary.iter().sum::<f64>() / secondary.len() as f64);
    Ok(RegionReport {
        n,
        miou: None,
        clip_score: None,
        primary_occluded_ratio_mean: primary_mean,
        secondary_occluded_ratio_mean: secondary_mean,
        accepted_count: records.iter().filter(|r| r.occlusion.accepted).count(),
        records,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rect(w: usize, h: usize, x0: usize, y0: usize, x1: usize, y1: usize) -> BinaryMask {
        BinaryMask::from_fn(w, h, |x, y| x >= x0 && x < x1 && y >= y0 && y < y1).unwrap()
    }

    #[test]
    fn miou_basics() {
        let a = rect(20, 20, 0, 0, 10, 10);
        let b = rect(20, 20, 10, 10, 20, 20);
        assert_eq!(miou(&[a.clone(), b.clone()], &[a.clone(), b.clone()]).unwrap(), 1.0);
        assert_eq!(miou(std::slice::from_ref(&a), std::slice::from_ref(&b)).unwrap(), 0.0);
        let shifted = rect(20, 20, 5, 0, 15, 10);
        assert!((miou(std::slice::from_ref(&a), &[shifted]).unwrap() - 1.0 / 3.0).abs() < 1e-12);
        let empty = BinaryMask::new(20, 20).unwrap();
        assert_eq!(iou(&empty, &empty).unwrap(), 1.0);
        assert!(miou(std::slice::from_ref(&a), &[]).is_err());
        assert!(miou(&[], &[]).is_err());
        assert!(miou(&[a], &[BinaryMask::new(5, 5).unwrap()]).is_err());
    }

    #[test]
    fn occluded_ratio_bounds() {
        let full = rect(10, 10, 0, 0, 6, 10);
        assert_eq!(occluded_pixel_ratio(&full, &rect(10, 10, 0, 0, 3, 3)).unwrap(), 1.0);
        assert_eq!(occluded_pixel_ratio(&full, &rect(10, 10, 7, 0, 10, 3)).unwrap(), 0.0);
        assert_eq!(occluded_pixel_ratio(&full, &rect(10, 10, 4, 0, 8, 1)).unwrap(), 0.5);
        assert!(matches!(
            occluded_pixel_ratio(&full, &BinaryMask::new(10, 10).unwrap()),
            Err(Error::UndefinedRatio(_))
        ));
    }

    /// Full object of 100 px in a row band; `visible` columns stay visible.
    fn filter_case(visible: usize, human_area: usize) -> OcclusionRecord {
        let full = rect(100, 30, 0, 0, 100, 1);
        let vis = rect(100, 30, 0, 0, visible, 1);
        let human = BinaryMask::from_fn(100, 30, |x, y| y >= 1 && y * 100 + x < 100 + human_area).unwrap();
        assert_eq!(human.area(), human_area);
        selection_filter(&full, &vis, &human).unwrap()
    }

    #[test]
    fn selection_rules() {
        assert!(!filter_case(95, 100).accepted);
        assert!(filter_case(50, 500).accepted);
        // visible 60 of a 2000 px human is 3 %
        assert!(!filter_case(60, 2000).accepted);
        assert!(filter_case(90, 100).accepted);
        assert!(filter_case(30, 100).accepted);
        assert!(!filter_case(29, 100).accepted);
        assert!(!filter_case(91, 100).accepted);
        assert!(filter_case(50, 1000).accepted);
        assert!(!filter_case(49, 1000).accepted);
        assert!((filter_case(60, 10).occlusion_ratio - 0.4).abs() < 1e-12);
    }

    #[test]
    fn filter_rejects_empty_full_object() {
        let e = BinaryMask::new(4, 4).unwrap();
        assert!(matches!(selection_filter(&e, &e, &e), Err(Error::Input(_))));
    }

    #[test]
    fn groups() {
        assert_eq!(OcclusionGroup::of(0.05), None);
        assert_eq!(OcclusionGroup::of(0.10), Some(OcclusionGroup::Light));
        assert_eq!(OcclusionGroup::of(0.40), Some(OcclusionGroup::Heavy));
        assert_eq!(OcclusionGroup::of(0.70), Some(OcclusionGroup::Heavy));
        assert_eq!(OcclusionGroup::of(0.71), None);
    }
}
