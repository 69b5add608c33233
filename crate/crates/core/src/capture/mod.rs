//! Screen captures, image-based button extraction and deduplication.

pub mod hierarchy;
pub mod store;

use std::collections::HashSet;

use log::warn;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::raster::{Bounds, Raster};

pub use store::{
    load_capture_dir, read_crop_index, write_crop_store, AppCaptures, CropRecord,
};

/// Per-app descriptor read from `meta.json`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AppMeta {
    pub app_id: String,
    #[serde(default)]
    pub category: String,
    #[serde(default)]
    pub install_bucket: String,
    /// Display name used by the app-name label filter; defaults to `app_id`.
    #[serde(default)]
    pub name: Option<String>,
}

impl AppMeta {
    pub fn new(app_id: &str, category: &str, install_bucket: &str) -> Self {
        Self {
            app_id: app_id.to_string(),
            category: category.to_string(),
            install_bucket: install_bucket.to_string(),
            name: None,
        }
    }

    pub fn display_name(&self) -> &str {
        self.name.as_deref().unwrap_or(&self.app_id)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UIElement {
    pub element_class: String,
    pub bounds: Bounds,
    pub clickable: bool,
    pub content_description: Option<String>,
    pub text: Option<String>,
    /// Bounds were partially outside the screenshot and have been clamped.
    pub clamped: bool,
}

impl UIElement {
    /// Class name without its package prefix.
    pub fn simple_class(&self) -> &str {
        self.element_class
            .rsplit(['.', '$'])
            .next()
            .unwrap_or(&self.element_class)
    }

    /// `ImageButton`, or `ImageView` with `clickable` set.
    pub fn is_image_based_button(&self) -> bool {
        match self.simple_class() {
            "ImageButton" => true,
            "ImageView" => self.clickable,
            _ => false,
        }
    }

    /// Absent or blank content description.
    pub fn is_missing_label(&self) -> bool {
        self.content_description
            .as_deref()
            .map_or(true, |d| d.trim().is_empty())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScreenCapture {
    pub app: AppMeta,
    pub screen_id: String,
    pub screenshot: Raster,
    pub elements: Vec<UIElement>,
    pub hierarchy_digest: String,
}

impl ScreenCapture {
    pub fn app_id(&self) -> &str {
        &self.app.app_id
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ElementCrop {
    pub crop_id: String,
    pub app_id: String,
    pub screen_id: String,
    pub app_category: String,
    pub install_bucket: String,
    pub element_class: String,
    pub image: Raster,
    pub bounds: Bounds,
    pub raw_label: Option<String>,
    pub pixel_digest: String,
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Parses a hierarchy dump against its screenshot.
///
/// Elements partially off-screen are clamped and flagged; elements entirely
/// off-screen are dropped with a warning.
pub fn parse_capture(
    hierarchy_doc: &str,
    screenshot: Raster,
    app: &AppMeta,
    screen_id: &str,
) -> Result<ScreenCapture> {
    if screenshot.is_empty() || screenshot.width() == 0 || screenshot.height() == 0 {
        return Err(Error::Empty(format!("screenshot for {}/{screen_id}", app.app_id)));
    }
    let doc = hierarchy::parse_document(hierarchy_doc)?;
    let (w, h) = (screenshot.width(), screenshot.height());
    let mut elements = Vec::with_capacity(doc.records.len());
    for (idx, record) in doc.records.iter().enumerate() {
        let node = format!("line {} (node {idx})", record.line);
        let bounds_str = record.get("bounds").unwrap_or_default();
        let bounds = hierarchy::parse_bounds(bounds_str).ok_or_else(|| Error::Parse {
            node: node.clone(),
            message: format!("unparseable bounds `{bounds_str}`"),
        })?;
        let clickable = match record.get("clickable") {
            None => false,
            Some(v) => hierarchy::parse_bool(v).ok_or_else(|| Error::Parse {
                node: node.clone(),
                message: format!("invalid clickable flag `{v}`"),
            })?,
        };
        let clamped_bounds = bounds.clamp_to(w, h);
        if !bounds.is_empty() && clamped_bounds.is_empty() {
            warn!(
                "{}/{screen_id}: {node} bounds {bounds} entirely outside {w}x{h} screenshot, skipped",
                app.app_id
            );
            continue;
        }
        let clamped = !bounds.is_empty() && clamped_bounds != bounds;
        elements.push(UIElement {
            element_class: record.get("class").unwrap_or_default().to_string(),
            bounds: if bounds.is_empty() { bounds } else { clamped_bounds },
            clickable,
            content_description: record.get("content-desc").map(str::to_string),
            text: record.get("text").map(str::to_string),
            clamped,
        });
    }
    Ok(ScreenCapture {
        app: app.clone(),
        screen_id: screen_id.to_string(),
        screenshot,
        elements,
        hierarchy_digest: sha256_hex(doc.canonical().as_bytes()),
    })
}

/// Crops every image-based button out of the capture.
pub fn extract_buttons(capture: &ScreenCapture) -> Vec<ElementCrop> {
    let mut crops = Vec::new();
    for (idx, el) in capture.elements.iter().enumerate() {
        if !el.is_image_based_button() {
            continue;
        }
        if el.bounds.is_empty() {
            warn!(
                "{}/{}: element {idx} has zero-area bounds {}, skipped",
                capture.app_id(),
                capture.screen_id,
                el.bounds
            );
            continue;
        }
        let image = match capture.screenshot.crop(&el.bounds) {
            Ok(img) => img,
            Err(e) => {
                warn!("{}/{}: element {idx}: {e}", capture.app_id(), capture.screen_id);
                continue;
            }
        };
        crops.push(ElementCrop {
            crop_id: format!("{}-{idx}", capture.screen_id),
            app_id: capture.app.app_id.clone(),
            screen_id: capture.screen_id.clone(),
            app_category: capture.app.category.clone(),
            install_bucket: capture.app.install_bucket.clone(),
            element_class: el.element_class.clone(),
            pixel_digest: image.digest(),
            image,
            bounds: el.bounds,
            raw_label: el.content_description.clone(),
        });
    }
    crops
}

/// Keeps the first capture per `(app_id, hierarchy_digest)`.
pub fn dedup_screens(captures: Vec<ScreenCapture>) -> Vec<ScreenCapture> {
    let mut seen = HashSet::new();
    captures
        .into_iter()
        .filter(|c| seen.insert((c.app.app_id.clone(), c.hierarchy_digest.clone())))
        .collect()
}

/// Within each app, keeps the first crop per pixel digest and the first crop
/// per `(bounds, label)` for labeled crops.
pub fn dedup_elements(crops: Vec<ElementCrop>) -> Vec<ElementCrop> {
    let mut pixels = HashSet::new();
    let mut placed = HashSet::new();
    let mut out = Vec::with_capacity(crops.len());
    for crop in crops {
        let pixel_key = (crop.app_id.clone(), crop.pixel_digest.clone());
        if pixels.contains(&pixel_key) {
            continue;
        }
        let label_key = crop
            .raw_label
            .as_deref()
            .filter(|l| !l.trim().is_empty())
            .map(|l| (crop.app_id.clone(), crop.bounds, l.to_string()));
        if let Some(key) = &label_key {
            if placed.contains(key) {
                continue;
            }
        }
        pixels.insert(pixel_key);
        if let Some(key) = label_key {
            placed.insert(key);
        }
        out.push(crop);
    }
    out
}
