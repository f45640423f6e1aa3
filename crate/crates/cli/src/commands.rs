use std::path::{Path, PathBuf};

use amodal_core::diffusion::image::BACKGROUND;
use amodal_core::eval::{extract_amodal_mask, iou, selection_filter, OcclusionGroup, OcclusionRecord};
use amodal_core::io::{read_image, read_mask, write_image, write_mask};
use amodal_core::par::{self, Execution};
use amodal_core::region::SceneMasks;
use amodal_core::synth::generate_suite;
use amodal_core::{ConvexPolygon, NoiseSchedule};
use serde::Serialize;

use crate::error::{create_dir, write_json, CliError, CliResult};
use crate::manifest::{discover, relative, Manifest, ManifestFile, Occluder, MANIFEST_NAME};
use crate::pipeline::{complete, inpaint_config, regions_for, DenoiserChoice, RegionMode};

/// Pixel tolerance for reading an amodal mask back from a completed image.
pub const EXTRACTION_TOLERANCE: f64 = 0.25;

#[derive(Serialize)]
struct RegionsFile<'a> {
    degenerate_fallback: bool,
    primary_area: usize,
    secondary_area: usize,
    contact_present: bool,
    mode: &'static str,
    radius: Option<usize>,
    hull: Option<&'a ConvexPolygon>,
}

pub fn identify(manifest: &Path, out: &Path, radius: Option<usize>, mode: RegionMode) -> CliResult<()> {
    if radius == Some(0) {
        return Err(CliError::invalid("--radius must be at least 1"));
    }
    let file = ManifestFile::read(manifest)?;
    let loaded = file.load()?;
    let (pair, radius) = regions_for(&loaded, mode, radius).map_err(|e| e.context(manifest.display()))?;

    create_dir(out)?;
    write_mask(&out.join("M_p.png"), &pair.primary)?;
    write_mask(&out.join("M_s.png"), &pair.secondary)?;
    let record = RegionsFile {
        degenerate_fallback: pair.degenerate_fallback,
        primary_area: pair.primary.area(),
        secondary_area: pair.secondary.area(),
        contact_present: loaded.contact_present,
        mode: match mode {
            RegionMode::Region => "region",
            RegionMode::Human => "human",
        },
        radius: (mode == RegionMode::Region).then_some(radius),
        hull: pair.hull.as_ref(),
    };
    write_json(&out.join("regions.json"), &record)?;
    if pair.degenerate_fallback {
        eprintln!("warning: {}: no usable hull, primary region is the whole mask", manifest.display());
    }
    println!("primary {} px, secondary {} px -> {}", record.primary_area, record.secondary_area, out.display());
    Ok(())
}

pub struct InpaintArgs {
    pub strength: f64,
    pub steps: usize,
    pub seed: u64,
    pub resolution: usize,
    pub denoiser: DenoiserChoice,
    pub radius: Option<usize>,
    pub mode: RegionMode,
}

pub fn inpaint(manifest: &Path, out: &Path, args: &InpaintArgs, target: Option<&Path>) -> CliResult<()> {
    if args.radius == Some(0) {
        return Err(CliError::invalid("--radius must be at least 1"));
    }
    let file = ManifestFile::read(manifest)?;
    let cfg = inpaint_config(args.strength, args.steps, args.seed, args.resolution, file.manifest.prompt.clone())?;
    let loaded = file.load()?;
    let target = match target {
        Some(p) => Some(read_image(p)?),
        None => loaded.ground_truth.clone(),
    };
    if let Some(t) = &target {
        if t.dims() != loaded.image.dims() {
            return Err(CliError::invalid("target image size differs from the scene image"));
        }
    }
    let (pair, _) = regions_for(&loaded, args.mode, args.radius).map_err(|e| e.context(manifest.display()))?;
    let sched = NoiseSchedule::default();
    let done = complete(&loaded, pair, &cfg, args.denoiser, target.as_ref(), &sched)
        .map_err(|e| e.context(manifest.display()))?;

    create_dir(out)?;
    write_image(&out.join("completed.png"), &done.image)?;
    write_json(&out.join("run.json"), &done.record)?;
    println!(
        "{} steps, switch at {}, {} px repainted -> {}",
        done.record.inference_steps,
        done.record.switch_step,
        done.regions.primary.area() + done.regions.secondary.area(),
        out.display()
    );
    Ok(())
}

#[derive(Serialize)]
struct SweepRow {
    strength: f64,
    group: &'static str,
    scenes: usize,
    miou: Option<f64>,
}

#[derive(Serialize)]
struct SweepScene {
    manifest: String,
    occlusion_ratio: f64,
    group: Option<&'static str>,
    iou: Vec<f64>,
}

#[derive(Serialize)]
struct SweepFile {
    strengths: Vec<f64>,
    steps: usize,
    seed: u64,
    denoiser: &'static str,
    rows: Vec<SweepRow>,
    scenes: Vec<SweepScene>,
}

pub struct SweepArgs {
    pub strengths: Vec<f64>,
    pub steps: usize,
    pub seed: u64,
    pub resolution: usize,
    pub denoiser: DenoiserChoice,
    pub radius: Option<usize>,
}

struct SweepInput {
    loaded: crate::manifest::LoadedScene,
    full: amodal_core::BinaryMask,
    name: String,
}

pub fn sweep(dir: &Path, out: &Path, args: &SweepArgs, exec: Execution) -> CliResult<()> {
    if args.strengths.is_empty() {
        return Err(CliError::invalid("--strengths: at least one strength is required"));
    }
    if args.radius == Some(0) {
        return Err(CliError::invalid("--radius must be at least 1"));
    }
    for &s in &args.strengths {
        inpaint_config(s, args.steps, args.seed, args.resolution, None)?;
    }
    let manifests = discover(dir)?;
    if manifests.is_empty() {
        return Err(CliError::invalid(format!("{}: no {MANIFEST_NAME} files found", dir.display())));
    }

    let mut inputs = Vec::with_capacity(manifests.len());
    for path in &manifests {
        let file = ManifestFile::read(path)?;
        let loaded = file.load()?;
        let full = loaded
            .full_object
            .clone()
            .ok_or_else(|| CliError::invalid(format!("{}: full_object_mask is required for sweeps", path.display())))?;
        if full.is_empty() {
            return Err(CliError::invalid(format!("{}: full_object_mask is empty", path.display())));
        }
        if args.denoiser == DenoiserChoice::Oracle && loaded.ground_truth.is_none() {
            return Err(CliError::invalid(format!(
                "{}: ground_truth_image is required by the oracle denoiser",
                path.display()
            )));
        }
        inputs.push(SweepInput { loaded, full, name: relative(dir, path) });
    }

    let sched = NoiseSchedule::default();
    let ratios: Vec<f64> = inputs
        .iter()
        .map(|s| {
            let visible = s.loaded.scene.object.intersect(&s.full).map(|m| m.area()).unwrap_or(0);
            (s.full.area() - visible) as f64 / s.full.area() as f64
        })
        .collect();
    let groups: Vec<Option<OcclusionGroup>> = ratios.iter().map(|&r| OcclusionGroup::of(r)).collect();

    // ious[k][i]: strength k, scene i
    let mut ious: Vec<Vec<f64>> = Vec::with_capacity(args.strengths.len());
    for &strength in &args.strengths {
        let per_scene = par::map_range(exec, inputs.len(), |i| -> CliResult<f64> {
            let s = &inputs[i];
            let cfg = inpaint_config(strength, args.steps, args.seed.wrapping_add(i as u64), args.resolution, None)?;
            let (pair, _) = regions_for(&s.loaded, RegionMode::Region, args.radius)?;
            let done = complete(&s.loaded, pair, &cfg, args.denoiser, s.loaded.ground_truth.as_ref(), &sched)?;
            let predicted = extract_amodal_mask(&done.image, BACKGROUND, EXTRACTION_TOLERANCE)?;
            Ok(iou(&predicted, &s.full)?)
        });
        let per_scene = per_scene
            .into_iter()
            .zip(&inputs)
            .map(|(r, s)| r.map_err(|e| e.context(&s.name)))
            .collect::<CliResult<Vec<f64>>>()?;
        ious.push(per_scene);
    }

    let mut rows = Vec::new();
    for (k, &strength) in args.strengths.iter().enumerate() {
        let bins: [(&'static str, Option<OcclusionGroup>); 3] =
            [("light", Some(OcclusionGroup::Light)), ("heavy", Some(OcclusionGroup::Heavy)), ("all", None)];
        for (name, group) in bins {
            let picked: Vec<f64> =
                ious[k].iter().zip(&groups).filter(|(_, g)| group.is_none() || **g == group).map(|(v, _)| *v).collect();
            rows.push(SweepRow {
                strength,
                group: name,
                scenes: picked.len(),
                miou: (!picked.is_empty()).then(|| picked.iter().sum::<f64>() / picked.len() as f64),
            });
        }
    }

    let scenes = inputs
        .iter()
        .enumerate()
        .map(|(i, s)| SweepScene {
            manifest: s.name.clone(),
            occlusion_ratio: ratios[i],
            group: groups[i].map(OcclusionGroup::name),
            iou: ious.iter().map(|col| col[i]).collect(),
        })
        .collect();

    create_dir(out)?;
    let mut csv = String::from("strength,group,scenes,miou\n");
    for r in &rows {
        let miou = r.miou.map(|v| format!("{v:.6}")).unwrap_or_default();
        csv.push_str(&format!("{},{},{},{miou}\n", r.strength, r.group, r.scenes));
    }
    let csv_path = out.join("sweep.csv");
    std::fs::write(&csv_path, csv).map_err(|e| CliError::io(format!("{}: {e}", csv_path.display())))?;
    write_json(
        &out.join("sweep.json"),
        &SweepFile {
            strengths: args.strengths.clone(),
            steps: args.steps,
            seed: args.seed,
            denoiser: match args.denoiser {
                DenoiserChoice::Oracle => "oracle",
                DenoiserChoice::NoiseFree => "noise-free",
            },
            rows,
            scenes,
        },
    )?;
    println!("{} scenes x {} strengths -> {}", inputs.len(), args.strengths.len(), out.display());
    Ok(())
}

#[derive(Serialize)]
struct FilterRecord {
    manifest: String,
    #[serde(flatten)]
    record: OcclusionRecord,
}

fn filter_one(path: &Path) -> CliResult<OcclusionRecord> {
    let file = ManifestFile::read(path)?;
    let m = &file.manifest;
    let full_rel = m
        .full_object_mask
        .as_ref()
        .ok_or_else(|| CliError::invalid(format!("{}: full_object_mask is required for filtering", path.display())))?;
    let human = read_mask(&file.resolve(&m.human_mask))?;
    let object = read_mask(&file.resolve(&m.object_mask))?;
    let full = read_mask(&file.resolve(full_rel))?;
    let scene = SceneMasks::new(human, object, None, None, m.occluder == Occluder::Human)
        .map_err(|e| CliError::from(e).context(path.display()))?;
    selection_filter(&full, &scene.object, &scene.human).map_err(|e| CliError::from(e).context(path.display()))
}

pub fn filter(dir: &Path, out: &Path, exec: Execution) -> CliResult<()> {
    let manifests = discover(dir)?;
    if manifests.is_empty() {
        eprintln!("warning: {}: no {MANIFEST_NAME} files found", dir.display());
    }
    let records = par::map(exec, &manifests, |p| filter_one(p)).into_iter().collect::<CliResult<Vec<_>>>()?;
    let records: Vec<FilterRecord> =
        manifests.iter().zip(records).map(|(p, record)| FilterRecord { manifest: relative(dir, p), record }).collect();
    let accepted: Vec<&str> = records.iter().filter(|r| r.record.accepted).map(|r| r.manifest.as_str()).collect();

    create_dir(out)?;
    write_json(&out.join("accepted.json"), &accepted)?;
    write_json(&out.join("records.json"), &records)?;
    println!("{} of {} scenes accepted -> {}", accepted.len(), records.len(), out.display());
    Ok(())
}

pub struct SynthArgs {
    pub count: usize,
    pub seed: u64,
    pub min_occlusion: f64,
    pub max_occlusion: f64,
    pub canvas: usize,
}

pub fn synth(out: &Path, args: &SynthArgs, exec: Execution) -> CliResult<()> {
    let suite = generate_suite(args.count, args.seed, (args.min_occlusion, args.max_occlusion), args.canvas, exec)?;
    create_dir(out)?;
    for (i, scene) in suite.iter().enumerate() {
        let dir = out.join(format!("scene_{i:04}"));
        create_dir(&dir)?;
        let file = |name: &str| -> PathBuf { dir.join(name) };
        write_image(&file("image.png"), &scene.image)?;
        write_mask(&file("human_mask.png"), &scene.scene_masks.human)?;
        write_mask(&file("object_mask.png"), &scene.scene_masks.object)?;
        write_mask(&file("contact_mask.png"), &scene.scene_masks.contact)?;
        write_mask(&file("full_object_mask.png"), &scene.full_object_mask)?;
        write_image(&file("ground_truth.png"), &scene.ground_truth_image)?;
        write_json(&file("params.json"), &scene.params)?;
        let manifest = Manifest {
            image: "image.png".into(),
            human_mask: "human_mask.png".into(),
            object_mask: "object_mask.png".into(),
            contact_mask: Some("contact_mask.png".into()),
            contact_points: None,
            smpl_mask: None,
            occluder: Occluder::Human,
            prompt: None,
            ground_truth_image: Some("ground_truth.png".into()),
            full_object_mask: Some("full_object_mask.png".into()),
        };
        write_json(&file(MANIFEST_NAME), &manifest)?;
    }
    println!("{} scenes -> {}", suite.len(), out.display());
    Ok(())
}
