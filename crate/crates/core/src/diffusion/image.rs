use crate::error::{Error, Result};
use crate::mask::{nearest_index_map, BinaryMask};

/// Value of pixels outside the segmented subject.
pub const BACKGROUND: f64 = -1.0;

/// Row-major interleaved float image. Clean images live in `[-1, 1]`; noisy
/// intermediates are unbounded.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageBuffer {
    width: usize,
    height: usize,
    channels: usize,
    data: Vec<f64>,
}

impl ImageBuffer {
    pub fn new(width: usize, height: usize, channels: usize, data: Vec<f64>) -> Result<Self> {
        check_shape(width, height, channels)?;
        if data.len() != width * height * channels {
            return Err(Error::Shape(format!(
                "buffer of length {} for a {width}x{height}x{channels} image",
                data.len()
            )));
        }
        Ok(Self { width, height, channels, data })
    }

    pub fn filled(width: usize, height: usize, channels: usize, value: f64) -> Result<Self> {
        check_shape(width, height, channels)?;
        Ok(Self { width, height, channels, data: vec![value; width * height * channels] })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn pixel(&self, x: usize, y: usize) -> &[f64] {
        let i = (y * self.width + x) * self.channels;
        &self.data[i..i + self.channels]
    }

    pub fn pixel_mut(&mut self, x: usize, y: usize) -> &mut [f64] {
        let i = (y * self.width + x) * self.channels;
        &mut self.data[i..i + self.channels]
    }

    pub fn same_shape(&self, other: &Self) -> bool {
        self.width == other.width && self.height == other.height && self.channels == other.channels
    }

    pub(crate) fn check_same_shape(&self, other: &Self, what: &str) -> Result<()> {
        if self.same_shape(other) {
            Ok(())
        } else {
            Err(Error::Shape(format!(
                "{what}: {}x{}x{} vs {}x{}x{}",
                self.width, self.height, self.channels, other.width, other.height, other.channels
            )))
        }
    }

    pub(crate) fn check_mask(&self, mask: &BinaryMask, what: &str) -> Result<()> {
        if mask.dims() == self.dims() {
            Ok(())
        } else {
            Err(Error::shape(what, self.dims(), mask.dims()))
        }
    }

    /// Copies `source` into `self` wherever `mask` is set.
    pub fn copy_where(&mut self, source: &Self, mask: &BinaryMask) -> Result<()> {
        self.check_same_shape(source, "copy_where")?;
        self.check_mask(mask, "copy_where")?;
        let c = self.channels;
        for (i, _) in mask.bits().iter().enumerate().filter(|(_, &b)| b) {
            self.data[i * c..(i + 1) * c].copy_from_slice(&source.data[i * c..(i + 1) * c]);
        }
        Ok(())
    }

    /// Returns a copy with every pixel under `mask` set to `value`.
    pub fn fill_where(&self, mask: &BinaryMask, value: f64) -> Result<Self> {
        self.check_mask(mask, "fill_where")?;
        let mut out = self.clone();
        let c = self.channels;
        for (i, _) in mask.bits().iter().enumerate().filter(|(_, &b)| b) {
            out.data[i * c..(i + 1) * c].fill(value);
        }
        Ok(out)
    }

    pub fn clamp_unit(&mut self) {
        for v in &mut self.data {
            *v = v.clamp(-1.0, 1.0);
        }
    }

    pub fn resample_nearest(&self, new_width: usize, new_height: usize) -> Result<Self> {
        check_shape(new_width, new_height, self.channels)?;
        if self.dims() == (new_width, new_height) {
            return Ok(self.clone());
        }
        let xs = nearest_index_map(self.width, new_width);
        let ys = nearest_index_map(self.height, new_height);
        let mut data = Vec::with_capacity(new_width * new_height * self.channels);
        for &sy in &ys {
            for &sx in &xs {
                data.extend_from_slice(self.pixel(sx, sy));
            }
        }
        Self::new(new_width, new_height, self.channels, data)
    }

    /// Mean absolute per-sample difference over the pixels under `mask`.
    /// `None` when the mask is empty.
    pub fn mean_abs_diff_within(&self, other: &Self, mask: &BinaryMask) -> Result<Option<f64>> {
        self.check_same_shape(other, "mean_abs_diff")?;
        self.check_mask(mask, "mean_abs_diff")?;
        let c = self.channels;
        let mut total = 0.0;
        let mut n = 0usize;
        for (i, _) in mask.bits().iter().enumerate().filter(|(_, &b)| b) {
            for k in i * c..(i + 1) * c {
                total += (self.data[k] - other.data[k]).abs();
                n += 1;
            }
        }
        Ok((n > 0).then(|| total / n as f64))
    }
}

fn check_shape(width: usize, height: usize, channels: usize) -> Result<()> {
    if width == 0 || height == 0 {
        return Err(Error::Parameter(format!("image dimensions must be at least 1x1, got {width}x{height}")));
    }
    if channels != 1 && channels != 3 {
        return Err(Error::Parameter(format!("images have 1 or 3 channels, got {channels}")));
    }
    Ok(())
}
