use serde::Serialize;

use super::image::ImageBuffer;
use crate::error::{Error, Result};

pub const DEFAULT_TRAINING_STEPS: usize = 1000;
pub const BETA_START: f64 = 0.00085;
pub const BETA_END: f64 = 0.012;

/// Forward-process coefficients over the training timesteps.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseSchedule {
    betas: Vec<f64>,
    alphas_cumprod: Vec<f64>,
}

impl NoiseSchedule {
    pub fn training_steps(&self) -> usize {
        self.betas.len()
    }

    pub fn betas(&self) -> &[f64] {
        &self.betas
    }

    pub fn alphas_cumprod(&self) -> &[f64] {
        &self.alphas_cumprod
    }

    /// `ᾱ_t`, with `None` standing for the clean level where `ᾱ = 1`.
    pub fn alpha_cumprod(&self, t: Option<usize>) -> Result<f64> {
        match t {
            None => Ok(1.0),
            Some(t) => self
                .alphas_cumprod
                .get(t)
                .copied()
                .ok_or_else(|| Error::Index(format!("timestep {t} outside 0..{}", self.alphas_cumprod.len()))),
        }
    }
}

impl Default for NoiseSchedule {
    fn default() -> Self {
        make_schedule(DEFAULT_TRAINING_STEPS).expect("default schedule is valid")
    }
}

/// Scaled-linear betas: `linspace(sqrt(start), sqrt(end), n)²`.
pub fn make_schedule(training_steps: usize) -> Result<NoiseSchedule> {
    if training_steps < 2 {
        return Err(Error::Parameter(format!("noise schedule needs at least 2 training steps, got {training_steps}")));
    }
    let (lo, hi) = (BETA_START.sqrt(), BETA_END.sqrt());
    let last = (training_steps - 1) as f64;
    let betas: Vec<f64> = (0..training_steps)
        .map(|i| {
            let s = lo + (hi - lo) * i as f64 / last;
            s * s
        })
        .collect();
    let alphas_cumprod = betas
        .iter()
        .scan(1.0f64, |acc, &b| {
            *acc *= 1.0 - b;
            Some(*acc)
        })
        .collect();
    Ok(NoiseSchedule { betas, alphas_cumprod })
}

/// `floor(T * r)`. A 1e-9 nudge keeps decimal strengths such as 0.7 from
/// landing one step low through binary rounding.
pub fn strength_to_switch_step(inference_steps: usize, strength: f64) -> Result<usize> {
    if inference_steps == 0 {
        return Err(Error::Parameter("inference steps must be at least 1".into()));
    }
    if !(0.0..=1.0).contains(&strength) {
        return Err(Error::Parameter(format!("strength must lie in [0, 1], got {strength}")));
    }
    let raw = (inference_steps as f64 * strength + 1e-9).floor() as usize;
    Ok(raw.min(inference_steps))
}

/// Descending inference timesteps plus the region switch step.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimestepPlan {
    pub inference_steps: usize,
    pub switch_step: usize,
    pub timesteps: Vec<usize>,
    pub strength: f64,
}

impl TimestepPlan {
    /// Evenly spaced timesteps `(T - 1 - i) * (N / T)` for `i in 0..T`.
    pub fn new(inference_steps: usize, strength: f64, schedule: &NoiseSchedule) -> Result<Self> {
        let switch_step = strength_to_switch_step(inference_steps, strength)?;
        let n = schedule.training_steps();
        if inference_steps > n {
            return Err(Error::Parameter(format!("{inference_steps} inference steps exceed {n} training steps")));
        }
        let ratio = n / inference_steps;
        let timesteps = (0..inference_steps).rev().map(|i| i * ratio).collect();
        Ok(Self { inference_steps, switch_step, timesteps, strength })
    }

    /// Level the sample reaches after step `i`; `None` after the last step.
    pub fn prev_timestep(&self, i: usize) -> Option<usize> {
        self.timesteps.get(i + 1).copied()
    }

    /// Whether step `i` still runs on the primary region: the remaining step
    /// count `T - i` exceeds the switch step.
    pub fn is_primary_step(&self, i: usize) -> bool {
        self.inference_steps - i > self.switch_step
    }
}

/// Forward diffusion: `sqrt(ᾱ_t) x0 + sqrt(1 - ᾱ_t) noise`.
pub fn q_sample(x0: &ImageBuffer, t: usize, noise: &ImageBuffer, sched: &NoiseSchedule) -> Result<ImageBuffer> {
    x0.check_same_shape(noise, "q_sample")?;
    let a = sched.alpha_cumprod(Some(t))?;
    Ok(forward(x0, noise, a))
}

pub(crate) fn forward(x0: &ImageBuffer, noise: &ImageBuffer, alpha_cumprod: f64) -> ImageBuffer {
    let (sa, sb) = (alpha_cumprod.sqrt(), (1.0 - alpha_cumprod).sqrt());
    let mut out = x0.clone();
    for (o, &n) in out.data_mut().iter_mut().zip(noise.data()) {
        *o = sa * *o + sb * n;
    }
    out
}

/// Deterministic DDIM update from level `t` to `t_prev` (`None` = clean).
pub fn ddim_step(
    x_t: &ImageBuffer,
    eps_hat: &ImageBuffer,
    t: usize,
    t_prev: Option<usize>,
    sched: &NoiseSchedule,
) -> Result<ImageBuffer> {
    x_t.check_same_shape(eps_hat, "ddim_step")?;
    if let Some(p) = t_prev {
        if p >= t {
            return Err(Error::Index(format!("ddim step must descend, got {t} -> {p}")));
        }
    }
    let a_t = sched.alpha_cumprod(Some(t))?;
    let a_prev = sched.alpha_cumprod(t_prev)?;
    let (sa_t, sb_t) = (a_t.sqrt(), (1.0 - a_t).sqrt());
    let (sa_p, sb_p) = (a_prev.sqrt(), (1.0 - a_prev).sqrt());
    let mut out = x_t.clone();
    for (o, &e) in out.data_mut().iter_mut().zip(eps_hat.data()) {
        let x0_pred = (*o - sb_t * e) / sa_t;
        *o = if t_prev.is_none() { x0_pred } else { sa_p * x0_pred + sb_p * e };
    }
    Ok(out)
}
