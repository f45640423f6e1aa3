//! Scene manifest parsing and loading.

use std::path::{Path, PathBuf};

use amodal_core::diffusion::image::BACKGROUND;
use amodal_core::io::{read_image, read_mask};
use amodal_core::mask::{BinaryMask, PixelPoint};
use amodal_core::region::{contact_mask_from_points, default_contact_radius, SceneMasks};
use amodal_core::ImageBuffer;
use serde::{Deserialize, Serialize};
use walkdir::WalkDir;

use crate::error::{CliError, CliResult};

pub const MANIFEST_NAME: &str = "manifest.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Occluder {
    Human,
    Object,
}

/// On-disk scene description. Paths are relative to the manifest's directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub image: PathBuf,
    pub human_mask: PathBuf,
    pub object_mask: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub contact_mask: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub contact_points: Option<Vec<PixelPoint>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub smpl_mask: Option<PathBuf>,
    pub occluder: Occluder,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prompt: Option<String>,
    /// Unoccluded occludee on the segmentation background.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ground_truth_image: Option<PathBuf>,
    /// Amodal object mask.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub full_object_mask: Option<PathBuf>,
}

/// A manifest with its directory, so relative paths can be resolved.
#[derive(Debug, Clone)]
pub struct ManifestFile {
    pub path: PathBuf,
    pub manifest: Manifest,
}

impl ManifestFile {
    pub fn read(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(format!("{}: {e}", path.display())))?;
        let manifest: Manifest =
            serde_json::from_str(&text).map_err(|e| CliError::io(format!("{}: {e}", path.display())))?;
        Ok(Self { path: path.to_path_buf(), manifest })
    }

    pub fn resolve(&self, rel: &Path) -> PathBuf {
        self.path.parent().unwrap_or_else(|| Path::new(".")).join(rel)
    }

    fn mask(&self, rel: &Path, field: &str, dims: (usize, usize)) -> CliResult<BinaryMask> {
        let path = self.resolve(rel);
        let mask = read_mask(&path)?;
        check_dims(&path, field, mask.dims(), dims)?;
        Ok(mask)
    }

    /// Loads the image and every mask, checking that they share dimensions.
    pub fn load(&self) -> CliResult<LoadedScene> {
        let m = &self.manifest;
        let image_path = self.resolve(&m.image);
        let image = read_image(&image_path)?;
        let dims = image.dims();
        let human = self.mask(&m.human_mask, "human_mask", dims)?;
        let object = self.mask(&m.object_mask, "object_mask", dims)?;

        let mut contact = match &m.contact_mask {
            Some(rel) => Some(self.mask(rel, "contact_mask", dims)?),
            None => None,
        };
        if let Some(points) = &m.contact_points {
            let (w, h) = dims;
            if let Some(p) = points.iter().find(|p| p.x < 0 || p.y < 0 || p.x as usize >= w || p.y as usize >= h) {
                return Err(CliError::invalid(format!(
                    "{}: contact_points: ({}, {}) lies outside the {w}x{h} image",
                    self.path.display(),
                    p.x,
                    p.y
                )));
            }
            let rendered = contact_mask_from_points(w, h, points, default_contact_radius(w))?;
            contact = Some(match contact {
                Some(c) => c.union(&rendered)?,
                None => rendered,
            });
        }
        let contact_present = contact.as_ref().is_some_and(|c| !c.is_empty());

        let smpl = match &m.smpl_mask {
            Some(rel) => Some(self.mask(rel, "smpl_mask", dims)?),
            None => None,
        };
        let full_object = match &m.full_object_mask {
            Some(rel) => Some(self.mask(rel, "full_object_mask", dims)?),
            None => None,
        };
        let ground_truth = match &m.ground_truth_image {
            Some(rel) => {
                let path = self.resolve(rel);
                let gt = read_image(&path)?;
                check_dims(&path, "ground_truth_image", gt.dims(), dims)?;
                Some(gt)
            }
            None => None,
        };

        let scene = SceneMasks::new(human, object, contact, smpl, m.occluder == Occluder::Human)
            .map_err(|e| CliError::from(e).context(self.path.display()))?;
        Ok(LoadedScene { image, scene, contact_present, full_object, ground_truth })
    }
}

fn check_dims(path: &Path, field: &str, got: (usize, usize), want: (usize, usize)) -> CliResult<()> {
    if got != want {
        return Err(CliError::invalid(format!(
            "{}: {field} is {}x{}, image is {}x{}",
            path.display(),
            got.0,
            got.1,
            want.0,
            want.1
        )));
    }
    Ok(())
}

pub struct LoadedScene {
    pub image: ImageBuffer,
    pub scene: SceneMasks,
    pub contact_present: bool,
    pub full_object: Option<BinaryMask>,
    pub ground_truth: Option<ImageBuffer>,
}

impl LoadedScene {
    /// The image reduced to the visible occludee on the segmentation background.
    pub fn segmented_input(&self) -> CliResult<ImageBuffer> {
        Ok(self.image.fill_where(&self.scene.occludee().complement(), BACKGROUND)?)
    }
}

/// All `manifest.json` files under `dir`, sorted by path.
pub fn discover(dir: &Path) -> CliResult<Vec<PathBuf>> {
    if !dir.is_dir() {
        return Err(CliError::io(format!("{}: not a directory", dir.display())));
    }
    let mut found = Vec::new();
    for entry in WalkDir::new(dir).sort_by_file_name() {
        let entry = entry.map_err(|e| CliError::io(e.to_string()))?;
        if entry.file_type().is_file() && entry.file_name() == MANIFEST_NAME {
            found.push(entry.into_path());
        }
    }
    found.sort();
    Ok(found)
}

/// Path of `path` relative to `root`, for stable report keys.
pub fn relative(root: &Path, path: &Path) -> String {
    path.strip_prefix(root).unwrap_or(path).display().to_string()
}
