//! PNG mask and image files.
//!
//! Masks are single-channel 8-bit: any nonzero sample reads as foreground,
//! writes use exactly 0 and 255. Images are 8-bit grayscale or RGB mapped
//! linearly onto `[-1, 1]`.

use std::path::Path;

use image::{DynamicImage, GrayImage, ImageReader, RgbImage};

use crate::diffusion::ImageBuffer;
use crate::error::{Error, Result};
use crate::mask::BinaryMask;

fn io_err(path: &Path, e: impl std::fmt::Display) -> Error {
    Error::Io { path: path.to_path_buf(), message: e.to_string() }
}

fn open(path: &Path) -> Result<DynamicImage> {
    ImageReader::open(path)
        .map_err(|e| io_err(path, e))?
        .with_guessed_format()
        .map_err(|e| io_err(path, e))?
        .decode()
        .map_err(|e| io_err(path, e))
}

pub fn read_mask(path: &Path) -> Result<BinaryMask> {
    let img = open(path)?.to_luma8();
    let (w, h) = img.dimensions();
    let bits = img.into_raw().into_iter().map(|v| v != 0).collect();
    BinaryMask::from_bits(w as usize, h as usize, bits)
}

pub fn write_mask(path: &Path, mask: &BinaryMask) -> Result<()> {
    let raw = mask.bits().iter().map(|&b| if b { 255 } else { 0 }).collect();
    let img = GrayImage::from_raw(mask.width() as u32, mask.height() as u32, raw)
        .ok_or_else(|| io_err(path, "mask buffer size mismatch"))?;
    img.save(path).map_err(|e| io_err(path, e))
}

#[inline]
pub fn to_unit(v: u8) -> f64 {
    v as f64 / 127.5 - 1.0
}

#[inline]
pub fn from_unit(v: f64) -> u8 {
    ((v.clamp(-1.0, 1.0) + 1.0) * 127.5).round() as u8
}

/// Grayscale files load with one channel, everything else as RGB.
pub fn read_image(path: &Path) -> Result<ImageBuffer> {
    let img = open(path)?;
    let gray = matches!(
        img.color(),
        image::ColorType::L8 | image::ColorType::L16 | image::ColorType::La8 | image::ColorType::La16
    );
    if gray {
        let g = img.to_luma8();
        let (w, h) = g.dimensions();
        ImageBuffer::new(w as usize, h as usize, 1, g.into_raw().into_iter().map(to_unit).collect())
    } else {
        let rgb = img.to_rgb8();
        let (w, h) = rgb.dimensions();
        ImageBuffer::new(w as usize, h as usize, 3, rgb.into_raw().into_iter().map(to_unit).collect())
    }
}

pub fn write_image(path: &Path, image: &ImageBuffer) -> Result<()> {
    let raw: Vec<u8> = image.data().iter().map(|&v| from_unit(v)).collect();
    let (w, h) = (image.width() as u32, image.height() as u32);
    let result = if image.channels() == 1 {
        GrayImage::from_raw(w, h, raw).map(|i| i.save(path))
    } else {
        RgbImage::from_raw(w, h, raw).map(|i| i.save(path))
    };
    result.ok_or_else(|| io_err(path, "image buffer size mismatch"))?.map_err(|e| io_err(path, e))
}
