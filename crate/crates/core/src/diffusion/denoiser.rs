use serde::{Deserialize, Serialize};

use super::image::ImageBuffer;
use super::inpaint::ActiveMask;
use crate::error::Result;
use crate::mask::BinaryMask;

/// Conditioning forwarded verbatim to the denoiser. None of the bundled
/// denoisers read it.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Conditioning {
    pub prompt: Option<String>,
}

/// Everything the sampling loop hands the noise predictor at one step.
#[derive(Debug, Clone, Copy)]
pub struct DenoiseRequest<'a> {
    pub noisy: &'a ImageBuffer,
    pub timestep: usize,
    pub alpha_cumprod: f64,
    pub active: ActiveMask,
    /// Pixels to regenerate.
    pub mask: &'a BinaryMask,
    /// Clean input with the masked pixels zeroed.
    pub masked_image: &'a ImageBuffer,
    pub conditioning: &'a Conditioning,
}

/// Noise predictor slot of the sampler. Implementations must be
/// deterministic for fixed inputs; the loop never calls one concurrently.
pub trait Denoiser {
    fn predict_noise(&mut self, req: &DenoiseRequest<'_>) -> Result<ImageBuffer>;
}

impl<D: Denoiser + ?Sized> Denoiser for &mut D {
    fn predict_noise(&mut self, req: &DenoiseRequest<'_>) -> Result<ImageBuffer> {
        (**self).predict_noise(req)
    }
}

impl<D: Denoiser + ?Sized> Denoiser for Box<D> {
    fn predict_noise(&mut self, req: &DenoiseRequest<'_>) -> Result<ImageBuffer> {
        (**self).predict_noise(req)
    }
}

/// Predicts exactly the noise that separates `x_t` from a fixed target, so
/// DDIM lands on the target. Ignores masks and conditioning.
#[derive(Debug, Clone)]
pub struct OracleDenoiser {
    target: ImageBuffer,
}

impl OracleDenoiser {
    pub fn new(target: ImageBuffer) -> Self {
        Self { target }
    }

    pub fn target(&self) -> &ImageBuffer {
        &self.target
    }
}

impl Denoiser for OracleDenoiser {
    fn predict_noise(&mut self, req: &DenoiseRequest<'_>) -> Result<ImageBuffer> {
        req.noisy.check_same_shape(&self.target, "oracle denoiser")?;
        let sa = req.alpha_cumprod.sqrt();
        let sb = (1.0 - req.alpha_cumprod).sqrt();
        let mut eps = req.noisy.clone();
        for (e, &t) in eps.data_mut().iter_mut().zip(self.target.data()) {
            *e = (*e - sa * t) / sb;
        }
        Ok(eps)
    }
}

/// Always predicts zero noise.
#[derive(Debug, Clone, Copy, Default)]
pub struct ZeroNoiseDenoiser;

impl Denoiser for ZeroNoiseDenoiser {
    fn predict_noise(&mut self, req: &DenoiseRequest<'_>) -> Result<ImageBuffer> {
        let n = req.noisy;
        ImageBuffer::filled(n.width(), n.height(), n.channels(), 0.0)
    }
}

/// Wraps a denoiser and logs the timestep, phase and mask area of every call.
#[derive(Debug)]
pub struct RecordingDenoiser<D> {
    inner: D,
    pub calls: Vec<(usize, ActiveMask, usize)>,
}

impl<D> RecordingDenoiser<D> {
    pub fn new(inner: D) -> Self {
        Self { inner, calls: Vec::new() }
    }

    pub fn into_inner(self) -> D {
        self.inner
    }
}

impl<D: Denoiser> Denoiser for RecordingDenoiser<D> {
    fn predict_noise(&mut self, req: &DenoiseRequest<'_>) -> Result<ImageBuffer> {
        self.calls.push((req.timestep, req.active, req.mask.area()));
        self.inner.predict_noise(req)
    }
}
