//! Brute-force reference implementations shared by the integration tests.
//! Each one is written independently of the library code path it checks.
#![allow(dead_code)]

use std::collections::BTreeSet;

use amodal_core::mask::{BinaryMask, PixelPoint};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_mask(rng: &mut impl Rng, w: usize, h: usize, density: f64) -> BinaryMask {
    BinaryMask::from_fn(w, h, |_, _| rng.random_bool(density)).unwrap()
}

/// Random blobby mask: a few filled discs.
pub fn random_blobs(rng: &mut impl Rng, w: usize, h: usize, count: usize) -> BinaryMask {
    let discs: Vec<(i64, i64, i64)> = (0..count)
        .map(|_| {
            (
                rng.random_range(0..w as i64),
                rng.random_range(0..h as i64),
                rng.random_range(2..(w.min(h) as i64 / 4).max(3)),
            )
        })
        .collect();
    BinaryMask::from_fn(w, h, |x, y| {
        discs.iter().any(|&(cx, cy, r)| (x as i64 - cx).pow(2) + (y as i64 - cy).pow(2) <= r * r)
    })
    .unwrap()
}

/// Per-pixel neighbourhood max over a `(2r + 1)` square.
pub fn brute_dilate(m: &BinaryMask, r: usize) -> BinaryMask {
    let (w, h) = m.dims();
    let r = r as i64;
    BinaryMask::from_fn(w, h, |x, y| {
        let mut hit = false;
        for dy in -r..=r {
            for dx in -r..=r {
                let (sx, sy) = (x as i64 + dx, y as i64 + dy);
                if sx >= 0 && sy >= 0 && sx < w as i64 && sy < h as i64 && m.get(sx as usize, sy as usize) {
                    hit = true;
                }
            }
        }
        hit
    })
    .unwrap()
}

fn orient(a: PixelPoint, b: PixelPoint, c: PixelPoint) -> i64 {
    (b.x as i64 - a.x as i64) * (c.y as i64 - a.y as i64) - (b.y as i64 - a.y as i64) * (c.x as i64 - a.x as i64)
}

fn between(a: PixelPoint, b: PixelPoint, p: PixelPoint) -> bool {
    p.x >= a.x.min(b.x) && p.x <= a.x.max(b.x) && p.y >= a.y.min(b.y) && p.y <= a.y.max(b.y)
}

/// O(n³) hull vertex set: `(p, q)` is a hull edge iff every point is on or
/// left of the directed line and every collinear point lies on the segment.
pub fn brute_hull_vertices(points: &[PixelPoint]) -> BTreeSet<PixelPoint> {
    let uniq: Vec<PixelPoint> = points.iter().copied().collect::<BTreeSet<_>>().into_iter().collect();
    if uniq.len() == 1 {
        return uniq.into_iter().collect();
    }
    let mut out = BTreeSet::new();
    for &p in &uniq {
        for &q in &uniq {
            if p == q {
                continue;
            }
            let edge = uniq.iter().all(|&r| {
                let o = orient(p, q, r);
                o > 0 || (o == 0 && between(p, q, r))
            });
            if edge {
                out.insert(p);
                out.insert(q);
            }
        }
    }
    out
}

/// Winding number of a closed polygon around `p`, with an explicit on-edge
/// test so boundary points count as inside.
pub fn winding_contains(poly: &[PixelPoint], p: PixelPoint) -> bool {
    let n = poly.len();
    if n == 1 {
        return poly[0] == p;
    }
    for i in 0..n {
        let (a, b) = (poly[i], poly[(i + 1) % n]);
        if orient(a, b, p) == 0 && between(a, b, p) {
            return true;
        }
    }
    if n == 2 {
        return false;
    }
    let mut wn = 0i32;
    for i in 0..n {
        let (a, b) = (poly[i], poly[(i + 1) % n]);
        if a.y <= p.y {
            if b.y > p.y && orient(a, b, p) > 0 {
                wn += 1;
            }
        } else if b.y <= p.y && orient(a, b, p) < 0 {
            wn -= 1;
        }
    }
    wn != 0
}

/// Chebyshev-distance form of the occlusion band.
pub fn brute_boundary(human: &BinaryMask, object: &BinaryMask, r: usize) -> BinaryMask {
    let (w, h) = human.dims();
    let r = r as i64;
    let near = |m: &BinaryMask, x: i64, y: i64| (-r..=r).any(|dy| (-r..=r).any(|dx| m.get_checked(x + dx, y + dy)));
    BinaryMask::from_fn(w, h, |x, y| near(human, x as i64, y as i64) && near(object, x as i64, y as i64)).unwrap()
}

pub fn count(m: &BinaryMask) -> usize {
    let mut n = 0;
    for y in 0..m.height() {
        for x in 0..m.width() {
            if m.get(x, y) {
                n += 1;
            }
        }
    }
    n
}
