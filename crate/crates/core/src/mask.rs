//! Binary masks over the image plane.
//!
//! A [`BinaryMask`] is a row-major grid of booleans. All operations are pure
//! and return new masks; binary operations require identical dimensions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Integer pixel coordinate, `x` is the column and `y` the row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(from = "[i32; 2]", into = "[i32; 2]")]
pub struct PixelPoint {
    pub x: i32,
    pub y: i32,
}

impl PixelPoint {
    pub const fn new(x: i32, y: i32) -> Self {
        Self { x, y }
    }
}

impl From<[i32; 2]> for PixelPoint {
    fn from([x, y]: [i32; 2]) -> Self {
        Self { x, y }
    }
}

impl From<PixelPoint> for [i32; 2] {
    fn from(p: PixelPoint) -> Self {
        [p.x, p.y]
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BinaryMask {
    width: usize,
    height: usize,
    bits: Vec<bool>,
}

impl BinaryMask {
    pub fn new(width: usize, height: usize) -> Result<Self> {
        Self::filled(width, height, false)
    }

    pub fn full(width: usize, height: usize) -> Result<Self> {
        Self::filled(width, height, true)
    }

    fn filled(width: usize, height: usize, value: bool) -> Result<Self> {
        check_dims(width, height)?;
        Ok(Self { width, height, bits: vec![value; width * height] })
    }

    pub fn from_bits(width: usize, height: usize, bits: Vec<bool>) -> Result<Self> {
        check_dims(width, height)?;
        if bits.len() != width * height {
            return Err(Error::Shape(format!("bit buffer of length {} for a {width}x{height} mask", bits.len())));
        }
        Ok(Self { width, height, bits })
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> bool) -> Result<Self> {
        check_dims(width, height)?;
        let mut bits = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                bits.push(f(x, y));
            }
        }
        Ok(Self { width, height, bits })
    }

    /// Builds a mask with the given points set. Points outside the canvas are
    /// ignored.
    pub fn from_points(width: usize, height: usize, points: &[PixelPoint]) -> Result<Self> {
        let mut mask = Self::new(width, height)?;
        for p in points {
            mask.set_checked(p.x as i64, p.y as i64, true);
        }
        Ok(mask)
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    #[inline]
    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> bool {
        self.bits[y * self.width + x]
    }

    /// Out-of-canvas coordinates read as background.
    #[inline]
    pub fn get_checked(&self, x: i64, y: i64) -> bool {
        if x < 0 || y < 0 || x >= self.width as i64 || y >= self.height as i64 {
            return false;
        }
        self.get(x as usize, y as usize)
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, value: bool) {
        self.bits[y * self.width + x] = value;
    }

    /// Writes are dropped outside the canvas.
    #[inline]
    pub fn set_checked(&mut self, x: i64, y: i64, value: bool) {
        if x >= 0 && y >= 0 && x < self.width as i64 && y < self.height as i64 {
            self.set(x as usize, y as usize, value);
        }
    }

    fn zip_with(&self, other: &Self, what: &str, op: impl Fn(bool, bool) -> bool) -> Result<Self> {
        if self.dims() != other.dims() {
            return Err(Error::shape(what, self.dims(), other.dims()));
        }
        let bits = self.bits.iter().zip(&other.bits).map(|(&a, &b)| op(a, b)).collect();
        Ok(Self { width: self.width, height: self.height, bits })
    }

    pub fn union(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, "union", |a, b| a || b)
    }

    pub fn intersect(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, "intersect", |a, b| a && b)
    }

    pub fn difference(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, "difference", |a, b| a && !b)
    }

    pub fn complement(&self) -> Self {
        Self { width: self.width, height: self.height, bits: self.bits.iter().map(|b| !b).collect() }
    }

    pub fn area(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.bits.iter().any(|&b| b)
    }

    pub fn is_subset_of(&self, other: &Self) -> Result<bool> {
        if self.dims() != other.dims() {
            return Err(Error::shape("subset", self.dims(), other.dims()));
        }
        Ok(self.bits.iter().zip(&other.bits).all(|(&a, &b)| !a || b))
    }

    /// Row-major list of foreground coordinates.
    pub fn foreground_points(&self) -> Vec<PixelPoint> {
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(i, _)| PixelPoint::new((i % self.width) as i32, (i / self.width) as i32))
            .collect()
    }

    /// Minkowski dilation by a `(2 * radius + 1)` square.
    ///
    /// The square element is separable, so this runs as a horizontal then a
    /// vertical running-count pass, O(W * H) regardless of radius.
    pub fn dilate(&self, radius: usize) -> Self {
        if radius == 0 || self.is_empty() {
            return self.clone();
        }
        let (w, h) = self.dims();
        let mut horiz = vec![false; w * h];
        for y in 0..h {
            let row = &self.bits[y * w..(y + 1) * w];
            let out = &mut horiz[y * w..(y + 1) * w];
            sliding_any(row.iter().copied(), w, radius, |i, v| out[i] = v);
        }
        let mut bits = vec![false; w * h];
        for x in 0..w {
            let column = (0..h).map(|y| horiz[y * w + x]);
            sliding_any(column, h, radius, |i, v| bits[i * w + x] = v);
        }
        Self { width: w, height: h, bits }
    }

    /// Nearest-neighbour resampling, sampling the source at destination pixel
    /// centres.
    pub fn resample_nearest(&self, new_width: usize, new_height: usize) -> Result<Self> {
        check_dims(new_width, new_height)?;
        if self.dims() == (new_width, new_height) {
            return Ok(self.clone());
        }
        let xs = nearest_index_map(self.width, new_width);
        let ys = nearest_index_map(self.height, new_height);
        Self::from_fn(new_width, new_height, |x, y| self.get(xs[x], ys[y]))
    }
}

/// Source index for each destination index, `floor((d + 0.5) * src / dst)`.
pub(crate) fn nearest_index_map(src: usize, dst: usize) -> Vec<usize> {
    (0..dst).map(|d| ((2 * d + 1) * src) / (2 * dst)).collect()
}

fn check_dims(width: usize, height: usize) -> Result<()> {
    if width == 0 || height == 0 {
        return Err(Error::Parameter(format!("mask dimensions must be at least 1x1, got {width}x{height}")));
    }
    Ok(())
}

/// Emits, for each index `i` in `0..len`, whether any input in
/// `[i - radius, i + radius]` is set.
fn sliding_any(input: impl Iterator<Item = bool>, len: usize, radius: usize, mut emit: impl FnMut(usize, bool)) {
    let values: Vec<bool> = input.collect();
    let mut prefix = vec![0usize; len + 1];
    for (i, &v) in values.iter().enumerate() {
        prefix[i + 1] = prefix[i] + v as usize;
    }
    for i in 0..len {
        let lo = i.saturating_sub(radius);
        let hi = (i + radius + 1).min(len);
        emit(i, prefix[hi] > prefix[lo]);
    }
}

/// Default boundary dilation radius: 3 px at 512 px width, scaled linearly,
/// never below 1.
pub fn default_dilation_radius(width: usize) -> usize {
    ((3.0 * width as f64 / 512.0).round() as usize).max(1)
}
