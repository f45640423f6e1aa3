//! Pixel-space DDIM sampling with a two-phase region schedule.
//!
//! [`schedule`] holds the noise coefficients and the inference timestep plan,
//! [`denoiser`] the noise-prediction interface and analytic stand-ins for a
//! trained network, and [`inpaint`] the region-constrained sampling loop.

pub mod denoiser;
pub mod image;
pub mod inpaint;
pub mod schedule;

pub use denoiser::{Conditioning, DenoiseRequest, Denoiser, OracleDenoiser, RecordingDenoiser, ZeroNoiseDenoiser};
pub use image::ImageBuffer;
pub use inpaint::{
    multiregional_inpaint, single_mask_inpaint, ActiveMask, InpaintConfig, InpaintOutput, InpaintSession, InpaintState,
    RunRecord, StepRecord,
};
pub use schedule::{ddim_step, make_schedule, q_sample, strength_to_switch_step, NoiseSchedule, TimestepPlan};
