//! Procedural occlusion scenes with exact ground truth.
//!
//! Each scene is a flat-shaded object (rectangle, ellipse, or an ellipse
//! sitting on a rectangle) partly hidden behind a stick-figure "human" made of
//! a torso, head, legs and two horizontal arms. The torso slides in from the
//! left over the object and the right arm extends across it; the pair
//! `(torso offset, arm length)` is searched so the covered fraction of the
//! object hits the requested occlusion target.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::diffusion::image::BACKGROUND;
use crate::diffusion::ImageBuffer;
use crate::error::{Error, Result};
use crate::mask::{default_dilation_radius, BinaryMask, PixelPoint};
use crate::par::{self, Execution};
use crate::region::{contact_mask_from_points, default_contact_radius, occlusion_boundary, SceneMasks};

/// Allowed gap between requested and realized occlusion.
pub const OCCLUSION_TOLERANCE: f64 = 0.02;
pub const MAX_OCCLUSION_TARGET: f64 = 0.9;
pub const MIN_CANVAS: usize = 32;
const MAX_ATTEMPTS: usize = 64;
const SCENE_BACKGROUND: f64 = -0.2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObjectKind {
    Rectangle,
    Ellipse,
    EllipseOnRectangle,
}

/// Axis-aligned rectangle, half-open on the right and bottom.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rect {
    pub x0: i64,
    pub y0: i64,
    pub x1: i64,
    pub y1: i64,
}

impl Rect {
    fn contains(&self, x: i64, y: i64) -> bool {
        x >= self.x0 && x < self.x1 && y >= self.y0 && y < self.y1
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneParams {
    pub seed: u64,
    pub occlusion_target: f64,
    pub realized_occlusion: f64,
    pub canvas: usize,
    pub object_kind: ObjectKind,
    pub object_bbox: Rect,
    pub object_color: [f64; 3],
    pub human_color: [f64; 3],
    pub torso: Rect,
    pub right_arm: Option<Rect>,
    pub contact_points: Vec<PixelPoint>,
    pub attempts: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticScene {
    /// Composite render: background, object, human on top.
    pub image: ImageBuffer,
    pub scene_masks: SceneMasks,
    pub full_object_mask: BinaryMask,
    /// The unoccluded object on the segmentation background.
    pub ground_truth_image: ImageBuffer,
    pub params: SceneParams,
}

impl SyntheticScene {
    /// Visible object only, everything else on the segmentation background.
    pub fn segmented_input(&self) -> ImageBuffer {
        self.image
            .fill_where(&self.scene_masks.occludee().complement(), BACKGROUND)
            .expect("scene masks match the image")
    }

    pub fn occlusion_ratio(&self) -> f64 {
        let full = self.full_object_mask.area();
        let visible = self.scene_masks.object.area();
        (full - visible) as f64 / full as f64
    }
}

struct Candidate {
    x0: i64,
    arm_len: i64,
    err: f64,
}

fn render_object(kind: ObjectKind, bbox: Rect, canvas: usize) -> BinaryMask {
    let cx = (bbox.x0 + bbox.x1 - 1) as f64 / 2.0;
    let w = (bbox.x1 - bbox.x0) as f64;
    let h = (bbox.y1 - bbox.y0) as f64;
    let ellipse = |x: i64, y: i64, cy: f64, rx: f64, ry: f64| {
        let dx = (x as f64 - cx) / rx;
        let dy = (y as f64 - cy) / ry;
        dx * dx + dy * dy <= 1.0
    };
    BinaryMask::from_fn(canvas, canvas, |x, y| {
        let (x, y) = (x as i64, y as i64);
        if !bbox.contains(x, y) {
            return false;
        }
        match kind {
            ObjectKind::Rectangle => true,
            ObjectKind::Ellipse => {
                let cy = (bbox.y0 + bbox.y1 - 1) as f64 / 2.0;
                ellipse(x, y, cy, w / 2.0, h / 2.0)
            }
            ObjectKind::EllipseOnRectangle => {
                let seat = bbox.y0 + (bbox.y1 - bbox.y0) / 3;
                let inset = ((w / 6.0).round() as i64).max(1);
                let base = y >= seat && x >= bbox.x0 + inset && x < bbox.x1 - inset;
                base || ellipse(x, y, seat as f64, w / 2.0, (seat - bbox.y0).max(1) as f64)
            }
        }
    })
    .expect("canvas is non-empty")
}

fn fill_rect(mask: &mut BinaryMask, r: Rect) {
    for y in r.y0..r.y1 {
        for x in r.x0..r.x1 {
            mask.set_checked(x, y, true);
        }
    }
}

fn fill_disc(mask: &mut BinaryMask, cx: i64, cy: i64, r: i64) {
    for y in cy - r..=cy + r {
        for x in cx - r..=cx + r {
            if (x - cx).pow(2) + (y - cy).pow(2) <= r * r {
                mask.set_checked(x, y, true);
            }
        }
    }
}

fn extents(mask: &BinaryMask) -> Option<Rect> {
    let pts = mask.foreground_points();
    let first = pts.first()?;
    let mut r = Rect { x0: first.x as i64, y0: first.y as i64, x1: first.x as i64 + 1, y1: first.y as i64 + 1 };
    for p in &pts {
        r.x0 = r.x0.min(p.x as i64);
        r.x1 = r.x1.max(p.x as i64 + 1);
        r.y0 = r.y0.min(p.y as i64);
        r.y1 = r.y1.max(p.y as i64 + 1);
    }
    Some(r)
}

fn random_color(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> [f64; 3] {
    // quantized to 8-bit levels so PNG round trips are exact
    let mut q = || {
        let v: f64 = rng.random_range(lo..hi);
        ((v + 1.0) * 127.5).round() / 127.5 - 1.0
    };
    [q(), q(), q()]
}

/// Human pixels with a 4-neighbour outside the human that touch the visible
/// object (Chebyshev distance 1).
fn contact_candidates(human: &BinaryMask, visible: &BinaryMask) -> Vec<PixelPoint> {
    let near = visible.dilate(1);
    human
        .foreground_points()
        .into_iter()
        .filter(|p| {
            let (x, y) = (p.x as i64, p.y as i64);
            let on_edge = [(1, 0), (-1, 0), (0, 1), (0, -1)].iter().any(|(dx, dy)| !human.get_checked(x + dx, y + dy));
            on_edge && near.get(p.x as usize, p.y as usize)
        })
        .collect()
}

/// Renders one scene. Deterministic per `(seed, occlusion_target, canvas)`.
pub fn generate_scene(seed: u64, occlusion_target: f64, canvas: usize) -> Result<SyntheticScene> {
    if !(0.0..MAX_OCCLUSION_TARGET).contains(&occlusion_target) {
        return Err(Error::Parameter(format!(
            "occlusion target must lie in [0, {MAX_OCCLUSION_TARGET}), got {occlusion_target}"
        )));
    }
    if canvas < MIN_CANVAS {
        return Err(Error::Parameter(format!("canvas must be at least {MIN_CANVAS} px, got {canvas}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best_err = f64::INFINITY;
    for attempt in 1..=MAX_ATTEMPTS {
        match try_generate(&mut rng, seed, occlusion_target, canvas, attempt) {
            Ok(scene) => return Ok(scene),
            Err(err) => best_err = best_err.min(err),
        }
    }
    Err(Error::Generation(format!(
        "seed {seed}: no layout within {OCCLUSION_TOLERANCE} of occlusion target {occlusion_target} \
         after {MAX_ATTEMPTS} attempts (closest miss {best_err:.4})"
    )))
}

/// One layout attempt. On failure returns the occlusion error reached.
fn try_generate(
    rng: &mut ChaCha8Rng,
    seed: u64,
    target: f64,
    canvas: usize,
    attempt: usize,
) -> std::result::Result<SyntheticScene, f64> {
    let c = canvas as i64;
    let ow = rng.random_range(c / 4..=c / 3);
    let oh = rng.random_range((c / 5).max(6)..=c / 3);
    let left = rng.random_range(c * 5 / 12..=c / 2);
    let top = rng.random_range(c * 3 / 10..=(c * 3 / 4 - oh).max(c * 3 / 10));
    let object_kind = match rng.random_range(0..3) {
        0 => ObjectKind::Rectangle,
        1 => ObjectKind::Ellipse,
        _ => ObjectKind::EllipseOnRectangle,
    };
    let object_bbox = Rect { x0: left, y0: top, x1: left + ow, y1: top + oh };
    let full = render_object(object_kind, object_bbox, canvas);
    let ext = extents(&full).ok_or(f64::INFINITY)?;
    let area = full.area();

    let tw = ((ext.x1 - ext.x0) as f64 * rng.random_range(1.0..1.25)).round() as i64;
    let margin_hi = (c / 12).max(3);
    let torso_top = ext.y0 - rng.random_range(2..=margin_hi);
    let torso_bot = ext.y1 + rng.random_range(2..=margin_hi);
    let arm_h = 1 + c / 96;

    // per-column object counts, whole object and within the arm band
    let col_count = |y0: i64, y1: i64| -> Vec<usize> {
        (0..c).map(|x| (y0.max(0)..y1.min(c)).filter(|&y| full.get(x as usize, y as usize)).count()).collect()
    };
    let col_full = col_count(0, c);
    let rows_with_width: Vec<(i64, usize)> = (ext.y0..ext.y1 - arm_h + 1)
        .map(|y| (y, (0..c).filter(|&x| full.get(x as usize, y as usize)).count()))
        .collect();
    let widest = rows_with_width.iter().map(|r| r.1).max().unwrap_or(0);
    let arm_rows: Vec<i64> = rows_with_width.iter().filter(|r| r.1 * 10 >= widest * 6).map(|r| r.0).collect();
    if arm_rows.is_empty() {
        return Err(f64::INFINITY);
    }
    let arm_y = arm_rows[rng.random_range(0..arm_rows.len())];
    let col_arm = col_count(arm_y, arm_y + arm_h);

    let sum =
        |counts: &[usize], x0: i64, x1: i64| -> usize { (x0.max(0)..x1.min(c)).map(|x| counts[x as usize]).sum() };

    let mut best = Candidate { x0: ext.x0 - tw, arm_len: 0, err: f64::INFINITY };
    for x0 in (ext.x0 - tw)..=ext.x0 {
        let torso_cover = sum(&col_full, x0, x0 + tw);
        let arm_start = x0 + tw;
        let max_len = (ext.x1 - arm_start).max(0);
        for arm_len in 0..=max_len {
            let cover = torso_cover + sum(&col_arm, arm_start, arm_start + arm_len);
            let err = (cover as f64 / area as f64 - target).abs();
            // ties go to the torso closest to the object, then the shortest arm
            if err < best.err - 1e-12 || ((err - best.err).abs() <= 1e-12 && x0 > best.x0) {
                best = Candidate { x0, arm_len, err };
            }
        }
    }
    if best.err > OCCLUSION_TOLERANCE {
        return Err(best.err);
    }

    let torso = Rect { x0: best.x0, y0: torso_top, x1: best.x0 + tw, y1: torso_bot };
    let right_arm =
        (best.arm_len > 0).then(|| Rect { x0: torso.x1, y0: arm_y, x1: torso.x1 + best.arm_len, y1: arm_y + arm_h });
    let mut human = BinaryMask::new(canvas, canvas).expect("canvas is non-empty");
    fill_rect(&mut human, torso);
    if let Some(arm) = right_arm {
        fill_rect(&mut human, arm);
    }
    let head_r = (tw / 3).max(2);
    fill_disc(&mut human, torso.x0 + tw / 2, torso.y0 - head_r, head_r);
    let leg_w = (tw / 3).max(2);
    let leg_end = (torso.y1 + rng.random_range(c / 8..=c / 4)).min(c);
    fill_rect(&mut human, Rect { x0: torso.x0, y0: torso.y1, x1: torso.x0 + leg_w, y1: leg_end });
    fill_rect(&mut human, Rect { x0: torso.x1 - leg_w, y0: torso.y1, x1: torso.x1, y1: leg_end });
    let left_arm_len = rng.random_range(3..=(c / 6).max(3));
    let left_arm_y = torso.y0 + rng.random_range(1..=3);
    fill_rect(&mut human, Rect { x0: torso.x0 - left_arm_len, y0: left_arm_y, x1: torso.x0, y1: left_arm_y + arm_h });

    let visible = full.difference(&human).expect("same canvas");
    let realized = (area - visible.area()) as f64 / area as f64;
    if (realized - target).abs() > OCCLUSION_TOLERANCE || visible.is_empty() {
        return Err((realized - target).abs());
    }
    let radius = default_dilation_radius(canvas);
    if occlusion_boundary(&human, &visible, radius).map(|b| b.is_empty()).unwrap_or(true) {
        return Err(f64::INFINITY);
    }
    let candidates = contact_candidates(&human, &visible);
    if candidates.is_empty() {
        return Err(f64::INFINITY);
    }
    let n_contacts = rng.random_range(1..=3usize).min(candidates.len());
    let mut picked: Vec<usize> = Vec::with_capacity(n_contacts);
    while picked.len() < n_contacts {
        let i = rng.random_range(0..candidates.len());
        if !picked.contains(&i) {
            picked.push(i);
        }
    }
    picked.sort_unstable();
    let contact_points: Vec<PixelPoint> = picked.iter().map(|&i| candidates[i]).collect();
    let contact = contact_mask_from_points(canvas, canvas, &contact_points, default_contact_radius(canvas))
        .expect("canvas is non-empty");

    let object_color = random_color(rng, 0.2, 0.9);
    let human_color = random_color(rng, -0.7, -0.3);
    let mut image = ImageBuffer::filled(canvas, canvas, 3, SCENE_BACKGROUND).expect("canvas is non-empty");
    let mut ground_truth = ImageBuffer::filled(canvas, canvas, 3, BACKGROUND).expect("canvas is non-empty");
    for p in full.foreground_points() {
        image.pixel_mut(p.x as usize, p.y as usize).copy_from_slice(&object_color);
        ground_truth.pixel_mut(p.x as usize, p.y as usize).copy_from_slice(&object_color);
    }
    for p in human.foreground_points() {
        image.pixel_mut(p.x as usize, p.y as usize).copy_from_slice(&human_color);
    }

    let scene_masks = SceneMasks::new(human, visible, Some(contact), None, true).expect("masks share the canvas");
    Ok(SyntheticScene {
        image,
        scene_masks,
        full_object_mask: full,
        ground_truth_image: ground_truth,
        params: SceneParams {
            seed,
            occlusion_target: target,
            realized_occlusion: realized,
            canvas,
            object_kind,
            object_bbox,
            object_color,
            human_color,
            torso,
            right_arm,
            contact_points,
            attempts: attempt,
        },
    })
}

/// Occlusion targets at the centres of `count` equal bins over the range.
pub fn suite_targets(count: usize, range: (f64, f64)) -> Vec<f64> {
    let (lo, hi) = range;
    (0..count).map(|i| lo + (i as f64 + 0.5) * (hi - lo) / count as f64).collect()
}

/// `count` scenes with targets evenly covering `occlusion_range`; scene `i`
/// uses seed `seed + i`.
pub fn generate_suite(
    count: usize,
    seed: u64,
    occlusion_range: (f64, f64),
    canvas: usize,
    exec: Execution,
) -> Result<Vec<SyntheticScene>> {
    if count == 0 {
        return Err(Error::Parameter("suite needs at least one scene".into()));
    }
    let (lo, hi) = occlusion_range;
    if !(lo >= 0.0 && lo <= hi && hi <= MAX_OCCLUSION_TARGET) {
        return Err(Error::Parameter(format!(
            "occlusion range must satisfy 0 <= lo <= hi <= {MAX_OCCLUSION_TARGET}, got ({lo}, {hi})"
        )));
    }
    let targets = suite_targets(count, occlusion_range);
    par::map_range(exec, count, |i| {
        generate_scene(seed.wrapping_add(i as u64), targets[i], canvas).map_err(|e| e.in_scene(i))
    })
    .into_iter()
    .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_scene() {
        let a = generate_scene(42, 0.4, 64).unwrap();
        let b = generate_scene(42, 0.4, 64).unwrap();
        assert!(a == b);
    }

    #[test]
    fn realized_occlusion_close_to_target() {
        for seed in 0..20 {
            let s = generate_scene(seed, 0.40, 64).unwrap();
            assert!((s.occlusion_ratio() - 0.40).abs() <= OCCLUSION_TOLERANCE, "seed {seed}");
            assert_eq!(s.occlusion_ratio(), s.params.realized_occlusion);
        }
    }

    #[test]
    fn zero_target_leaves_object_visible() {
        let s = generate_scene(7, 0.0, 64).unwrap();
        assert_eq!(s.scene_masks.object, s.full_object_mask);
    }

    #[test]
    fn masks_are_consistent() {
        let s = generate_scene(3, 0.55, 96).unwrap();
        let m = &s.scene_masks;
        assert_eq!(m.object, s.full_object_mask.difference(&m.human).unwrap());
        assert!(m.human.intersect(&m.object).unwrap().is_empty());
        assert!(!m.contact.is_empty());
        assert!((1..=3).contains(&s.params.contact_points.len()));
        for p in s.full_object_mask.foreground_points() {
            assert_eq!(s.ground_truth_image.pixel(p.x as usize, p.y as usize), &s.params.object_color);
        }
    }

    #[test]
    fn parameter_checks() {
        assert!(generate_scene(0, 0.9, 64).is_err());
        assert!(generate_scene(0, -0.1, 64).is_err());
        assert!(generate_scene(0, 0.3, 31).is_err());
        assert!(generate_suite(0, 0, (0.1, 0.4), 64, Execution::Sequential).is_err());
        assert!(generate_suite(3, 0, (0.4, 0.1), 64, Execution::Sequential).is_err());
    }

    #[test]
    fn singleton_suite() {
        let suite = generate_suite(1, 9, (0.2, 0.4), 64, Execution::Sequential).unwrap();
        assert_eq!(suite.len(), 1);
        let target = suite_targets(1, (0.2, 0.4))[0];
        assert!((target - 0.3).abs() < 1e-12);
        assert!(suite[0] == generate_scene(9, target, 64).unwrap());
    }

    #[test]
    fn small_canvas_works() {
        for seed in 0..10 {
            generate_scene(seed, 0.5, 32).unwrap();
        }
    }
}
