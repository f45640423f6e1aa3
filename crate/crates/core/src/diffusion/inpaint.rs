//! Region-constrained DDIM sampling.
//!
//! The loop starts from seeded Gaussian noise and walks the descending
//! [`TimestepPlan`]. While more than `T'` steps remain, only the primary
//! region is regenerated; for the last `T'` steps the union of primary and
//! secondary regions is. After every update the pixels outside the active
//! mask are overwritten with the input noised to the new level (replacement
//! conditioning), and once the loop ends everything outside the union is
//! copied back from the input unchanged.
//!
//! All randomness comes from one ChaCha stream consumed in a fixed order, one
//! full-image noise draw per step, so a run can be checkpointed by cloning
//! its [`InpaintState`].

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::denoiser::{Conditioning, DenoiseRequest, Denoiser};
use super::image::ImageBuffer;
use super::schedule::{ddim_step, forward, NoiseSchedule, TimestepPlan};
use crate::error::{Error, Result};
use crate::mask::BinaryMask;
use crate::region::RegionPair;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ActiveMask {
    Primary,
    Union,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InpaintConfig {
    pub inference_steps: usize,
    pub strength: f64,
    pub seed: u64,
    pub conditioning: Conditioning,
    /// Longest side of the image the sampler runs on.
    pub working_resolution: usize,
}

impl Default for InpaintConfig {
    fn default() -> Self {
        Self {
            inference_steps: 50,
            strength: 0.5,
            seed: 0,
            conditioning: Conditioning::default(),
            working_resolution: 64,
        }
    }
}

impl InpaintConfig {
    pub fn validate(&self) -> Result<()> {
        if self.inference_steps == 0 {
            return Err(Error::Parameter("inference steps must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.strength) {
            return Err(Error::Parameter(format!("strength must lie in [0, 1], got {}", self.strength)));
        }
        if self.working_resolution == 0 {
            return Err(Error::Parameter("working resolution must be at least 1".into()));
        }
        Ok(())
    }

    /// Working-resolution dimensions for a `width x height` source, keeping
    /// the aspect ratio.
    pub fn working_dims(&self, width: usize, height: usize) -> (usize, usize) {
        let res = self.working_resolution as f64;
        let scale = res / width.max(height) as f64;
        let w = ((width as f64 * scale).round() as usize).max(1);
        let h = ((height as f64 * scale).round() as usize).max(1);
        (w, h)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub t: usize,
    pub active_mask: ActiveMask,
}

/// Audit trail of the mask schedule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub seed: u64,
    pub strength: f64,
    pub inference_steps: usize,
    pub switch_step: usize,
    pub steps: Vec<StepRecord>,
}

impl RunRecord {
    pub fn count(&self, phase: ActiveMask) -> usize {
        self.steps.iter().filter(|s| s.active_mask == phase).count()
    }
}

#[derive(Debug, Clone)]
pub struct InpaintOutput {
    pub image: ImageBuffer,
    pub record: RunRecord,
}

/// Resumable sampler state.
#[derive(Debug, Clone)]
pub struct InpaintState {
    next_step: usize,
    latent: ImageBuffer,
    rng: ChaCha8Rng,
    steps: Vec<StepRecord>,
}

impl InpaintState {
    pub fn next_step(&self) -> usize {
        self.next_step
    }

    pub fn latent(&self) -> &ImageBuffer {
        &self.latent
    }
}

struct Phase {
    mask: BinaryMask,
    keep: BinaryMask,
    masked_image: ImageBuffer,
}

impl Phase {
    fn new(input: &ImageBuffer, mask: BinaryMask) -> Result<Self> {
        let masked_image = input.fill_where(&mask, 0.0)?;
        Ok(Self { keep: mask.complement(), mask, masked_image })
    }
}

/// One sampling run over a fixed input, mask schedule and seed.
pub struct InpaintSession<'a> {
    input: &'a ImageBuffer,
    sched: &'a NoiseSchedule,
    plan: TimestepPlan,
    primary: Phase,
    union: Phase,
    seed: u64,
    conditioning: Conditioning,
}

impl<'a> InpaintSession<'a> {
    /// Two-phase session: primary region first, union after the switch step.
    pub fn multiregional(
        input: &'a ImageBuffer,
        regions: &RegionPair,
        cfg: &InpaintConfig,
        sched: &'a NoiseSchedule,
    ) -> Result<Self> {
        cfg.validate()?;
        regions.validate().map_err(|e| Error::Input(format!("invalid region pair: {e}")))?;
        input.check_mask(&regions.primary, "inpaint regions")?;
        let plan = TimestepPlan::new(cfg.inference_steps, cfg.strength, sched)?;
        Self::build(input, regions.primary.clone(), regions.union()?, plan, cfg, sched)
    }

    /// One-phase session over a single mask.
    pub fn single(
        input: &'a ImageBuffer,
        mask: &BinaryMask,
        cfg: &InpaintConfig,
        sched: &'a NoiseSchedule,
    ) -> Result<Self> {
        cfg.validate()?;
        input.check_mask(mask, "inpaint mask")?;
        let mut plan = TimestepPlan::new(cfg.inference_steps, cfg.strength, sched)?;
        plan.switch_step = 0;
        Self::build(input, mask.clone(), mask.clone(), plan, cfg, sched)
    }

    fn build(
        input: &'a ImageBuffer,
        primary: BinaryMask,
        union: BinaryMask,
        plan: TimestepPlan,
        cfg: &InpaintConfig,
        sched: &'a NoiseSchedule,
    ) -> Result<Self> {
        Ok(Self {
            input,
            sched,
            plan,
            primary: Phase::new(input, primary)?,
            union: Phase::new(input, union)?,
            seed: cfg.seed,
            conditioning: cfg.conditioning.clone(),
        })
    }

    pub fn plan(&self) -> &TimestepPlan {
        &self.plan
    }

    pub fn start(&self) -> InpaintState {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let latent = draw_noise(self.input, &mut rng);
        InpaintState { next_step: 0, latent, rng, steps: Vec::with_capacity(self.plan.inference_steps) }
    }

    pub fn is_done(&self, state: &InpaintState) -> bool {
        state.next_step >= self.plan.inference_steps
    }

    pub fn step(&self, state: &mut InpaintState, denoiser: &mut dyn Denoiser) -> Result<()> {
        let i = state.next_step;
        let t = *self.plan.timesteps.get(i).ok_or_else(|| {
            Error::Index(format!("step {i} past the end of a {}-step plan", self.plan.inference_steps))
        })?;
        let t_prev = self.plan.prev_timestep(i);
        let active = if self.plan.is_primary_step(i) { ActiveMask::Primary } else { ActiveMask::Union };
        let phase = match active {
            ActiveMask::Primary => &self.primary,
            ActiveMask::Union => &self.union,
        };

        let eps = denoiser.predict_noise(&DenoiseRequest {
            noisy: &state.latent,
            timestep: t,
            alpha_cumprod: self.sched.alpha_cumprod(Some(t))?,
            active,
            mask: &phase.mask,
            masked_image: &phase.masked_image,
            conditioning: &self.conditioning,
        })?;
        let mut next = ddim_step(&state.latent, &eps, t, t_prev, self.sched)?;

        let noise = draw_noise(self.input, &mut state.rng);
        match t_prev {
            Some(p) => {
                let known = forward(self.input, &noise, self.sched.alpha_cumprod(Some(p))?);
                next.copy_where(&known, &phase.keep)?;
            }
            None => next.copy_where(self.input, &phase.keep)?,
        }

        state.latent = next;
        state.steps.push(StepRecord { t, active_mask: active });
        state.next_step += 1;
        Ok(())
    }

    /// Advances until `state.next_step() == until` (clamped to the plan).
    pub fn run_until(&self, state: &mut InpaintState, until: usize, denoiser: &mut dyn Denoiser) -> Result<()> {
        let until = until.min(self.plan.inference_steps);
        while state.next_step < until {
            self.step(state, denoiser)?;
        }
        Ok(())
    }

    pub fn finish(&self, state: InpaintState) -> Result<InpaintOutput> {
        if !self.is_done(&state) {
            return Err(Error::Input(format!(
                "sampling stopped at step {} of {}",
                state.next_step, self.plan.inference_steps
            )));
        }
        let mut image = state.latent;
        image.clamp_unit();
        image.copy_where(self.input, &self.union.keep)?;
        Ok(InpaintOutput {
            image,
            record: RunRecord {
                seed: self.seed,
                strength: self.plan.strength,
                inference_steps: self.plan.inference_steps,
                switch_step: self.plan.switch_step,
                steps: state.steps,
            },
        })
    }

    pub fn run(&self, denoiser: &mut dyn Denoiser) -> Result<InpaintOutput> {
        let mut state = self.start();
        self.run_until(&mut state, self.plan.inference_steps, denoiser)?;
        self.finish(state)
    }
}

fn draw_noise(like: &ImageBuffer, rng: &mut ChaCha8Rng) -> ImageBuffer {
    let mut out = like.clone();
    for v in out.data_mut() {
        *v = StandardNormal.sample(rng);
    }
    out
}

/// Primary region first, widening to primary ∪ secondary for the final
/// `floor(T * r)` steps.
pub fn multiregional_inpaint(
    input: &ImageBuffer,
    regions: &RegionPair,
    cfg: &InpaintConfig,
    denoiser: &mut dyn Denoiser,
    sched: &NoiseSchedule,
) -> Result<InpaintOutput> {
    InpaintSession::multiregional(input, regions, cfg, sched)?.run(denoiser)
}

pub fn single_mask_inpaint(
    input: &ImageBuffer,
    mask: &BinaryMask,
    cfg: &InpaintConfig,
    denoiser: &mut dyn Denoiser,
    sched: &NoiseSchedule,
) -> Result<InpaintOutput> {
    InpaintSession::single(input, mask, cfg, sched)?.run(denoiser)
}
