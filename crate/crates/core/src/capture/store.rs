//! Capture directory loading and the on-disk crop store.
//!
//! Capture layout, one directory per app:
//!
//! ```text
//! <root>/<app_id>/meta.json
//! <root>/<app_id>/<screen_id>.png
//! <root>/<app_id>/<screen_id>.hierarchy
//! ```
//!
//! Crop store layout: `crops/<app_id>/<crop_id>.png` plus a JSON-lines index.

use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use log::warn;
use serde::{Deserialize, Serialize};

use super::{parse_capture, AppMeta, ElementCrop, ScreenCapture};
use crate::error::{Error, Result};
use crate::raster::{Bounds, Raster};
use crate::FORMAT_VERSION;

#[derive(Debug, Clone)]
pub struct AppCaptures {
    pub meta: AppMeta,
    pub captures: Vec<ScreenCapture>,
}

fn sorted_entries(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut entries = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .map(|entry| entry.map(|e| e.path()).map_err(|e| Error::io(dir, e)))
        .collect::<Result<Vec<_>>>()?;
    entries.sort();
    Ok(entries)
}

pub fn load_app_meta(path: &Path) -> Result<AppMeta> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Format {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

/// Loads every app directory under `root`, apps and screens in sorted order.
pub fn load_capture_dir(root: &Path) -> Result<Vec<AppCaptures>> {
    let mut apps = Vec::new();
    for app_dir in sorted_entries(root)? {
        if !app_dir.is_dir() {
            continue;
        }
        let meta_path = app_dir.join("meta.json");
        if !meta_path.exists() {
            warn!("{}: no meta.json, skipped", app_dir.display());
            continue;
        }
        let meta = load_app_meta(&meta_path)?;
        let mut captures = Vec::new();
        for path in sorted_entries(&app_dir)? {
            if path.extension().and_then(|e| e.to_str()) != Some("hierarchy") {
                continue;
            }
            let screen_id = path
                .file_stem()
                .and_then(|s| s.to_str())
                .unwrap_or_default()
                .to_string();
            let png = path.with_extension("png");
            if !png.exists() {
                warn!("{}: screenshot missing, skipped", png.display());
                continue;
            }
            let doc = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
            let shot = Raster::load_png(&png)?;
            captures.push(parse_capture(&doc, shot, &meta, &screen_id)?);
        }
        apps.push(AppCaptures { meta, captures });
    }
    Ok(apps)
}

/// One line of the crop index.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CropRecord {
    pub format_version: u32,
    pub crop_id: String,
    pub app_id: String,
    pub screen_id: String,
    pub app_category: String,
    pub install_bucket: String,
    pub element_class: String,
    pub bounds: Bounds,
    pub raw_label: Option<String>,
    pub pixel_digest: String,
    /// Relative to the directory holding the index.
    pub image_path: String,
}

impl CropRecord {
    pub fn from_crop(crop: &ElementCrop, image_path: String) -> Self {
        Self {
            format_version: FORMAT_VERSION,
            crop_id: crop.crop_id.clone(),
            app_id: crop.app_id.clone(),
            screen_id: crop.screen_id.clone(),
            app_category: crop.app_category.clone(),
            install_bucket: crop.install_bucket.clone(),
            element_class: crop.element_class.clone(),
            bounds: crop.bounds,
            raw_label: crop.raw_label.clone(),
            pixel_digest: crop.pixel_digest.clone(),
            image_path,
        }
    }
}

/// Writes crop PNGs under `out/crops/` and the index at `out/crops.jsonl`.
pub fn write_crop_store(out: &Path, crops: &[ElementCrop]) -> Result<Vec<CropRecord>> {
    let mut records = Vec::with_capacity(crops.len());
    for crop in crops {
        let rel = format!("crops/{}/{}.png", crop.app_id, crop.crop_id);
        let path = out.join(&rel);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
        crop.image.save_png(&path)?;
        records.push(CropRecord::from_crop(crop, rel));
    }
    write_jsonl(&out.join("crops.jsonl"), &records)?;
    Ok(records)
}

pub fn read_crop_index(path: &Path) -> Result<Vec<CropRecord>> {
    read_jsonl(path)
}

pub fn write_jsonl<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for row in rows {
        serde_json::to_writer(&mut w, row)?;
        w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_jsonl<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut rows = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        rows.push(serde_json::from_str(&line).map_err(|e| Error::Format {
            path: path.to_path_buf(),
            message: format!("line {}: {e}", i + 1),
        })?);
    }
    Ok(rows)
}
