//! Convex hulls of pixel point sets and their rasterization.
//!
//! Coordinates stay integral end to end; orientation tests use exact `i64`
//! cross products. A positive cross product on `(x, y)` is a left turn.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mask::{BinaryMask, PixelPoint};

/// Convex polygon with vertices in counter-clockwise order (in `(x, y)`
/// axes). One vertex is a point hull, two is a segment hull.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ConvexPolygon {
    vertices: Vec<PixelPoint>,
}

impl ConvexPolygon {
    pub fn vertices(&self) -> &[PixelPoint] {
        &self.vertices
    }

    pub fn is_degenerate(&self) -> bool {
        self.vertices.len() < 3
    }

    pub fn contains(&self, p: PixelPoint) -> bool {
        contains(self, p)
    }
}

#[inline]
pub(crate) fn cross(o: PixelPoint, a: PixelPoint, b: PixelPoint) -> i64 {
    let (ox, oy) = (o.x as i64, o.y as i64);
    (a.x as i64 - ox) * (b.y as i64 - oy) - (a.y as i64 - oy) * (b.x as i64 - ox)
}

/// Andrew's monotone chain. Collinear boundary points are dropped.
pub fn convex_hull(points: &[PixelPoint]) -> Result<ConvexPolygon> {
    if points.is_empty() {
        return Err(Error::EmptyInput("convex hull of an empty point set"));
    }
    let mut pts = points.to_vec();
    pts.sort_unstable();
    pts.dedup();
    if pts.len() < 3 {
        return Ok(ConvexPolygon { vertices: pts });
    }

    let mut hull: Vec<PixelPoint> = Vec::with_capacity(2 * pts.len());
    for &p in &pts {
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0 {
            hull.pop();
        }
        hull.push(p);
    }
    let lower_len = hull.len() + 1;
    for &p in pts.iter().rev().skip(1) {
        while hull.len() >= lower_len && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0 {
            hull.pop();
        }
        hull.push(p);
    }
    // last point repeats the first
    hull.pop();

    Ok(ConvexPolygon { vertices: hull })
}

/// Closed-set membership: boundary points are inside.
pub fn contains(h: &ConvexPolygon, p: PixelPoint) -> bool {
    let v = &h.vertices;
    match v.len() {
        0 => false,
        1 => v[0] == p,
        2 => {
            cross(v[0], v[1], p) == 0
                && p.x >= v[0].x.min(v[1].x)
                && p.x <= v[0].x.max(v[1].x)
                && p.y >= v[0].y.min(v[1].y)
                && p.y <= v[0].y.max(v[1].y)
        }
        n => (0..n).all(|i| cross(v[i], v[(i + 1) % n], p) >= 0),
    }
}

/// Rasterizes the closed hull. A pixel is set iff its integer coordinate lies
/// inside or on the polygon. Point and segment hulls are drawn as a pixel or a
/// Bresenham line dilated by one pixel, so the result is never empty.
pub fn rasterize_hull(h: &ConvexPolygon, width: usize, height: usize) -> Result<BinaryMask> {
    let mut mask = BinaryMask::new(width, height)?;
    for v in &h.vertices {
        if v.x < 0 || v.y < 0 || v.x as usize >= width || v.y as usize >= height {
            return Err(Error::Bounds(format!("hull vertex ({}, {}) outside {width}x{height} canvas", v.x, v.y)));
        }
    }
    let v = &h.vertices;
    match v.len() {
        0 => return Err(Error::EmptyInput("hull without vertices")),
        1 => mask.set(v[0].x as usize, v[0].y as usize, true),
        2 => {
            for p in bresenham(v[0], v[1]) {
                mask.set(p.x as usize, p.y as usize, true);
            }
        }
        _ => {
            fill_polygon(v, &mut mask);
            return Ok(mask);
        }
    }
    Ok(mask.dilate(1))
}

/// Scanline fill: on each row, every edge constrains `x` to a half-line, and
/// the pixel run is the intersection of those half-lines.
fn fill_polygon(v: &[PixelPoint], mask: &mut BinaryMask) {
    let n = v.len();
    let y_min = v.iter().map(|p| p.y).min().unwrap_or(0) as i64;
    let y_max = v.iter().map(|p| p.y).max().unwrap_or(0) as i64;
    let x_cap = mask.width() as i64 - 1;

    for y in y_min..=y_max {
        let mut lo = 0i64;
        let mut hi = x_cap;
        for i in 0..n {
            let (a, b) = (v[i], v[(i + 1) % n]);
            let (ax, ay) = (a.x as i64, a.y as i64);
            let dx = b.x as i64 - ax;
            let dy = b.y as i64 - ay;
            // cross(a, b, (x, y)) = dx * (y - ay) - dy * (x - ax) >= 0
            let num = dx * (y - ay);
            if dy == 0 {
                if num < 0 {
                    hi = -1;
                }
            } else if dy > 0 {
                hi = hi.min(ax + num.div_euclid(dy));
            } else {
                // x >= ax + num / dy, with dy < 0
                lo = lo.max(ax + ceil_div(num, dy));
            }
        }
        for x in lo..=hi {
            mask.set(x as usize, y as usize, true);
        }
    }
}

/// `ceil(a / b)` for negative `b`.
fn ceil_div(a: i64, b: i64) -> i64 {
    debug_assert!(b < 0);
    -a.div_euclid(-b)
}

pub(crate) fn bresenham(a: PixelPoint, b: PixelPoint) -> Vec<PixelPoint> {
    let (mut x, mut y) = (a.x as i64, a.y as i64);
    let (x1, y1) = (b.x as i64, b.y as i64);
    let dx = (x1 - x).abs();
    let dy = -(y1 - y).abs();
    let sx = if x < x1 { 1 } else { -1 };
    let sy = if y < y1 { 1 } else { -1 };
    let mut err = dx + dy;
    let mut out = Vec::with_capacity((dx - dy + 1) as usize);
    loop {
        out.push(PixelPoint::new(x as i32, y as i32));
        if x == x1 && y == y1 {
            break;
        }
        let e2 = 2 * err;
        if e2 >= dy {
            err += dy;
            x += sx;
        }
        if e2 <= dx {
            err += dx;
            y += sy;
        }
    }
    out
}
