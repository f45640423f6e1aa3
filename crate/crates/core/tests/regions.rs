mod common;

use amodal_core::hull::{contains, convex_hull, rasterize_hull};
use amodal_core::mask::{default_dilation_radius, BinaryMask, PixelPoint};
use amodal_core::par::Execution;
use amodal_core::region::{identify_batch, identify_regions, occlusion_boundary, RegionPair, SceneMasks};
use amodal_core::synth::generate_suite;
use common::*;
use proptest::prelude::*;
use rand::Rng;

/// Straight-line composition of the primitive operations.
fn compose_primitives(scene: &SceneMasks, radius: usize) -> (BinaryMask, BinaryMask) {
    let (w, h) = scene.dims();
    let boundary = scene.human.dilate(radius).intersect(&scene.object.dilate(radius)).unwrap();
    let c = boundary.union(&scene.contact).unwrap();
    let hull = convex_hull(&c.foreground_points()).unwrap();
    let hull_mask = rasterize_hull(&hull, w, h).unwrap();
    let m_in = scene.occluder();
    let primary = m_in.intersect(&hull_mask).unwrap();
    let secondary = m_in.difference(&primary).unwrap();
    (primary, secondary)
}

fn rect(w: usize, h: usize, x0: usize, y0: usize, x1: usize, y1: usize) -> BinaryMask {
    BinaryMask::from_fn(w, h, |x, y| x >= x0 && x < x1 && y >= y0 && y < y1).unwrap()
}

/// L-shaped human in front of a rectangle, one contact point.
fn l_scene(with_contact: bool) -> SceneMasks {
    let (w, h) = (64, 64);
    let vertical = rect(w, h, 10, 5, 22, 60);
    let foot = rect(w, h, 10, 48, 45, 60);
    let human = vertical.union(&foot).unwrap();
    let object = rect(w, h, 18, 20, 50, 52);
    let contact = with_contact.then(|| BinaryMask::from_points(w, h, &[PixelPoint::new(21, 24)]).unwrap());
    SceneMasks::new(human, object, contact, None, true).unwrap()
}

#[test]
fn boundary_matches_distance_oracle() {
    let mut r = rng(17);
    for _ in 0..30 {
        let human = random_blobs(&mut r, 40, 40, 3);
        let object = random_blobs(&mut r, 40, 40, 3).difference(&human).unwrap();
        let radius = r.random_range(1..4);
        assert_eq!(occlusion_boundary(&human, &object, radius).unwrap(), brute_boundary(&human, &object, radius));
    }
}

#[test]
fn l_scene_matches_primitive_composition() {
    let scene = l_scene(true);
    let pair = identify_regions(&scene, 2).unwrap();
    let (p, s) = compose_primitives(&scene, 2);
    assert!(!pair.degenerate_fallback);
    assert_eq!(pair.primary, p);
    assert_eq!(pair.secondary, s);
}

#[test]
fn empty_contact_equals_boundary_only() {
    let without = l_scene(false);
    let pair = identify_regions(&without, 2).unwrap();
    let (w, h) = without.dims();
    let boundary = occlusion_boundary(&without.human, &without.object, 2).unwrap();
    let hull = convex_hull(&boundary.foreground_points()).unwrap();
    let m_hull = rasterize_hull(&hull, w, h).unwrap();
    assert_eq!(pair.primary, without.human.intersect(&m_hull).unwrap());
    assert_eq!(pair.hull.as_ref(), Some(&hull));
}

#[test]
fn occluder_object_scene() {
    let (w, h) = (48, 48);
    let human = rect(w, h, 5, 5, 30, 40);
    let object = rect(w, h, 25, 10, 45, 30);
    let scene = SceneMasks::new(human, object.clone(), None, None, false).unwrap();
    let pair = identify_regions(&scene, 1).unwrap();
    assert_eq!(pair.union().unwrap(), object);
    assert!(pair.primary.intersect(&pair.secondary).unwrap().is_empty());
}

#[test]
fn synthetic_batch_matches_primitives() {
    let suite = generate_suite(40, 123, (0.1, 0.7), 64, Execution::Sequential).unwrap();
    let scenes: Vec<SceneMasks> = suite.iter().map(|s| s.scene_masks.clone()).collect();
    let radius = default_dilation_radius(64);
    let seq = identify_batch(&scenes, radius, Execution::Sequential).unwrap();
    let par = identify_batch(&scenes, radius, Execution::Parallel).unwrap();
    assert_eq!(seq, par);
    for (scene, pair) in scenes.iter().zip(&seq) {
        let (p, s) = compose_primitives(scene, radius);
        assert_eq!(pair.primary, p);
        assert_eq!(pair.secondary, s);
    }
}

#[test]
fn batch_errors_carry_index() {
    let good = l_scene(true);
    let bad = SceneMasks::new(BinaryMask::new(64, 64).unwrap(), good.object.clone(), None, None, true).unwrap();
    let err = identify_batch(&[good, bad], 1, Execution::Sequential).unwrap_err();
    assert!(err.to_string().starts_with("scene 1:"), "{err}");
}

fn check_pair(scene: &SceneMasks, pair: &RegionPair) -> Result<(), TestCaseError> {
    prop_assert_eq!(&pair.union().unwrap(), scene.occluder());
    prop_assert!(pair.primary.intersect(&pair.secondary).unwrap().is_empty());
    if !pair.degenerate_fallback {
        let hull = pair.hull.as_ref().unwrap();
        let (w, h) = scene.dims();
        prop_assert!(pair.primary.is_subset_of(&rasterize_hull(hull, w, h).unwrap()).unwrap());
        for p in scene.contact.foreground_points() {
            prop_assert!(contains(hull, p));
        }
    }
    Ok(())
}

fn scene_strategy() -> impl Strategy<Value = (SceneMasks, u64)> {
    (any::<u64>(), any::<bool>(), 0usize..4).prop_map(|(seed, human_front, n_contacts)| {
        let mut r = rng(seed);
        let human = random_blobs(&mut r, 40, 40, 3);
        let object = random_blobs(&mut r, 40, 40, 3);
        let pts: Vec<PixelPoint> =
            (0..n_contacts).map(|_| PixelPoint::new(r.random_range(0..40), r.random_range(0..40))).collect();
        let contact = BinaryMask::from_points(40, 40, &pts).unwrap();
        (SceneMasks::new(human, object, Some(contact), None, human_front).unwrap(), seed)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn partition_and_containment((scene, _) in scene_strategy(), radius in 1usize..4) {
        prop_assume!(!scene.occluder().is_empty());
        let pair = identify_regions(&scene, radius).unwrap();
        check_pair(&scene, &pair)?;
        prop_assert_eq!(identify_regions(&scene, radius).unwrap(), pair);
    }

    #[test]
    fn more_contact_never_shrinks_primary((scene, seed) in scene_strategy(), radius in 1usize..3) {
        prop_assume!(!scene.occluder().is_empty());
        let base = identify_regions(&scene, radius).unwrap();
        // point and segment hulls are drawn dilated, which polygon hulls are not
        prop_assume!(!base.degenerate_fallback && !base.hull.as_ref().unwrap().is_degenerate());
        let mut r = rng(seed ^ 0x5a5a);
        let extra = random_mask(&mut r, 40, 40, 0.01);
        let mut grown = scene.clone();
        grown.contact = scene.contact.union(&extra).unwrap();
        let bigger = identify_regions(&grown, radius).unwrap();
        prop_assert!(base.primary.is_subset_of(&bigger.primary).unwrap());
    }

    #[test]
    fn larger_radius_never_shrinks((scene, _) in scene_strategy(), radius in 1usize..3) {
        prop_assume!(!scene.occluder().is_empty());
        let b1 = occlusion_boundary(&scene.human, &scene.object, radius).unwrap();
        let b2 = occlusion_boundary(&scene.human, &scene.object, radius + 1).unwrap();
        prop_assert!(b1.is_subset_of(&b2).unwrap());
        let p1 = identify_regions(&scene, radius).unwrap();
        let p2 = identify_regions(&scene, radius + 1).unwrap();
        if !p1.degenerate_fallback && p1.hull.as_ref().is_some_and(|h| !h.is_degenerate()) {
            prop_assert!(p1.primary.is_subset_of(&p2.primary).unwrap());
        }
    }
}

#[test]
fn degenerate_hull_dilation_is_not_monotone() {
    // a segment hull is drawn one pixel thick on each side; once a third
    // point makes it a thin triangle, that padding disappears
    let seg = convex_hull(&[PixelPoint::new(2, 5), PixelPoint::new(12, 5)]).unwrap();
    let tri = convex_hull(&[PixelPoint::new(2, 5), PixelPoint::new(12, 5), PixelPoint::new(7, 6)]).unwrap();
    let a = rasterize_hull(&seg, 16, 16).unwrap();
    let b = rasterize_hull(&tri, 16, 16).unwrap();
    assert!(!a.is_subset_of(&b).unwrap());
}
