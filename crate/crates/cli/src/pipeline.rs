//! Region identification plus inpainting for one loaded scene.

use amodal_core::diffusion::{
    Conditioning, Denoiser, InpaintConfig, NoiseSchedule, OracleDenoiser, TimestepPlan, ZeroNoiseDenoiser,
};
use amodal_core::mask::default_dilation_radius;
use amodal_core::region::{identify_human_regions, identify_regions};
use amodal_core::{multiregional_inpaint, ImageBuffer, RegionPair, RunRecord};
use clap::ValueEnum;

use crate::error::{CliError, CliResult};
use crate::manifest::LoadedScene;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DenoiserChoice {
    /// Predicts the noise that leads exactly to the target image.
    Oracle,
    /// Always predicts zero noise.
    NoiseFree,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RegionMode {
    /// Contact-aware convex hull over the occluder.
    Region,
    /// Human completion: SMPL silhouette inside the occluding object.
    Human,
}

pub fn regions_for(loaded: &LoadedScene, mode: RegionMode, radius: Option<usize>) -> CliResult<(RegionPair, usize)> {
    let radius = radius.unwrap_or_else(|| default_dilation_radius(loaded.image.width()));
    let pair = match mode {
        RegionMode::Region => identify_regions(&loaded.scene, radius)?,
        RegionMode::Human => {
            if loaded.scene.smpl.is_none() {
                return Err(CliError::invalid("smpl_mask: required for --mode human"));
            }
            identify_human_regions(&loaded.scene)?
        }
    };
    Ok((pair, radius))
}

pub struct Completion {
    pub image: ImageBuffer,
    pub record: RunRecord,
    pub regions: RegionPair,
}

/// Runs the sampler at the working resolution and brings the result back to
/// the input size, keeping every pixel outside the union from the input.
pub fn complete(
    loaded: &LoadedScene,
    regions: RegionPair,
    cfg: &InpaintConfig,
    denoiser: DenoiserChoice,
    target: Option<&ImageBuffer>,
    sched: &NoiseSchedule,
) -> CliResult<Completion> {
    let input = loaded.segmented_input()?;
    let (w, h) = input.dims();
    let (ww, wh) = cfg.working_dims(w, h);
    let union = regions.union()?;

    let work_input = input.resample_nearest(ww, wh)?;
    let work_regions = regions.resample_nearest(ww, wh)?;
    let mut model: Box<dyn Denoiser> = match denoiser {
        DenoiserChoice::NoiseFree => Box::new(ZeroNoiseDenoiser),
        DenoiserChoice::Oracle => {
            let target = target.ok_or_else(|| {
                CliError::invalid("oracle denoiser needs a target image (ground_truth_image or --target)")
            })?;
            if target.channels() != input.channels() {
                return Err(CliError::invalid(format!(
                    "target has {} channels, input has {}",
                    target.channels(),
                    input.channels()
                )));
            }
            Box::new(OracleDenoiser::new(target.resample_nearest(ww, wh)?))
        }
    };

    let out = multiregional_inpaint(&work_input, &work_regions, cfg, model.as_mut(), sched)?;
    let mut image = out.image.resample_nearest(w, h)?;
    image.copy_where(&input, &union.complement())?;
    Ok(Completion { image, record: out.record, regions })
}

pub fn inpaint_config(
    strength: f64,
    steps: usize,
    seed: u64,
    resolution: usize,
    prompt: Option<String>,
) -> CliResult<InpaintConfig> {
    let cfg = InpaintConfig {
        inference_steps: steps,
        strength,
        seed,
        conditioning: Conditioning { prompt },
        working_resolution: resolution,
    };
    cfg.validate()?;
    TimestepPlan::new(steps, strength, &NoiseSchedule::default())?;
    Ok(cfg)
}
