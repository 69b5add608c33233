//! Procedural icon fixtures: sixteen visually distinct 32x32 button images
//! with short labels, usable in memory or written out as a capture directory.

use std::fs;
use std::path::Path;

use crate::capture::hierarchy::{serialize_record, Record};
use crate::capture::AppMeta;
use crate::corpus::{normalize, LabeledSample, Vocabulary};
use crate::error::{Error, Result};
use crate::raster::Raster;

pub const ICON_SIZE: u32 = 32;

pub const ICON_LABELS: [&str; 16] = [
    "back",
    "menu",
    "search",
    "add playlist",
    "play",
    "pause",
    "next track",
    "previous track",
    "open navigation drawer",
    "share",
    "delete item",
    "settings",
    "close",
    "refresh page",
    "favorite",
    "more options",
];

const SCHEMES: [([u8; 3], [u8; 3]); 2] = [([240, 240, 235], [30, 40, 60]), ([200, 60, 50], [250, 250, 210])];

fn shape_hit(shape: usize, u: f64, v: f64) -> bool {
    let r = (u * u + v * v).sqrt();
    match shape {
        0 => r < 0.6,
        1 => (0.4..0.7).contains(&r),
        2 => u.abs() < 0.55 && v.abs() < 0.55,
        3 => v > -0.6 && v < 0.6 && u.abs() < (0.6 - v) / 2.0,
        4 => u.abs() < 0.7 && ((v + 0.7) * 2.5).rem_euclid(1.4) < 0.7 && v.abs() < 0.7,
        5 => v.abs() < 0.7 && ((u + 0.7) * 2.5).rem_euclid(1.4) < 0.7 && u.abs() < 0.7,
        6 => ((u - v).abs() < 0.18 || (u + v).abs() < 0.18) && r < 0.8,
        _ => (u.abs() < 0.15 || v.abs() < 0.15) && u.abs() < 0.7 && v.abs() < 0.7,
    }
}

/// Icon `index` (taken mod 16): one of eight shapes in one of two color schemes.
pub fn icon(index: usize) -> Raster {
    let index = index % ICON_LABELS.len();
    let (bg, fg) = SCHEMES[index / 8];
    let shape = index % 8;
    let mut img = Raster::filled(ICON_SIZE, ICON_SIZE, bg);
    let half = ICON_SIZE as f64 / 2.0;
    for y in 0..ICON_SIZE {
        for x in 0..ICON_SIZE {
            let u = (x as f64 + 0.5 - half) / half;
            let v = (y as f64 + 0.5 - half) / half;
            if shape_hit(shape, u, v) {
                img.set_pixel(x, y, &fg);
            }
        }
    }
    img
}

/// The sixteen icons as model-ready samples with a minimum-count-1 vocabulary.
pub fn icon_samples(resolution: u32) -> (Vec<LabeledSample>, Vocabulary) {
    let words: Vec<Vec<String>> = ICON_LABELS.iter().map(|l| normalize(l)).collect();
    let vocab = Vocabulary::build(words.iter(), 1).expect("fixture labels are non-empty");
    let samples = words
        .iter()
        .enumerate()
        .map(|(i, w)| {
            let (token_ids, length) = vocab.encode(w);
            LabeledSample {
                crop_id: format!("icon-{i}"),
                app_id: "synthetic".into(),
                image: icon(i).model_input(resolution),
                token_ids,
                length,
            }
        })
        .collect();
    (samples, vocab)
}

fn node(class: &str, bounds: [u32; 4], clickable: bool, desc: Option<&str>) -> String {
    let mut attrs = vec![
        ("class".to_string(), class.to_string()),
        (
            "bounds".to_string(),
            format!("[{},{}][{},{}]", bounds[0], bounds[1], bounds[2], bounds[3]),
        ),
        ("clickable".to_string(), clickable.to_string()),
    ];
    if let Some(d) = desc {
        attrs.push(("content-desc".to_string(), d.to_string()));
    }
    serialize_record(&Record { line: 0, attrs })
}

/// Writes a capture directory with two apps of eight labeled icons each.
///
/// Every screen also carries one unlabeled image button, a text view and a
/// container node so the audit and cleaning paths have something to skip.
pub fn write_icon_captures(root: &Path) -> Result<()> {
    let apps = [("toy.alpha", "1,000+"), ("toy.beta", "50,000+")];
    for (a, (app_id, installs)) in apps.iter().enumerate() {
        let dir = root.join(app_id);
        fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        let mut meta = AppMeta::new(app_id, "TOOLS", installs);
        meta.name = Some(format!("Toy {}", if a == 0 { "Alpha" } else { "Beta" }));
        let meta_path = dir.join("meta.json");
        fs::write(&meta_path, serde_json::to_string_pretty(&meta)?).map_err(|e| Error::io(&meta_path, e))?;

        let (w, h) = (ICON_SIZE * 4, ICON_SIZE * 2 + 16);
        let mut shot = Raster::filled(w, h, [128, 128, 128]);
        let mut doc = node("android.widget.FrameLayout", [0, 0, w, h], false, None);
        doc.push('\n');
        for slot in 0..8u32 {
            let index = a * 8 + slot as usize;
            let (x0, y0) = ((slot % 4) * ICON_SIZE, (slot / 4) * ICON_SIZE);
            let img = icon(index);
            for y in 0..ICON_SIZE {
                for x in 0..ICON_SIZE {
                    shot.set_pixel(x0 + x, y0 + y, img.pixel(x, y));
                }
            }
            doc.push_str(&node(
                "android.widget.ImageButton",
                [x0, y0, x0 + ICON_SIZE, y0 + ICON_SIZE],
                true,
                Some(ICON_LABELS[index]),
            ));
            doc.push('\n');
        }
        let y0 = ICON_SIZE * 2;
        for x in 0..16 {
            for y in 0..16 {
                shot.set_pixel(x, y0 + y, &[(x * 16) as u8, (y * 16) as u8, 90 + a as u8]);
            }
        }
        doc.push_str(&node("android.widget.ImageButton", [0, y0, 16, y0 + 16], true, None));
        doc.push('\n');
        doc.push_str(&node("android.widget.TextView", [16, y0, w, y0 + 16], false, Some("Toy")));
        doc.push('\n');
        shot.save_png(&dir.join("main.png"))?;
        let path = dir.join("main.hierarchy");
        fs::write(&path, doc).map_err(|e| Error::io(&path, e))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::capture::store::load_capture_dir;
    use std::collections::HashSet;

    #[test]
    fn icons_are_distinct() {
        let digests: HashSet<String> = (0..16).map(|i| icon(i).digest()).collect();
        assert_eq!(digests.len(), 16);
    }

    #[test]
    fn samples_round_trip_labels() {
        let (samples, vocab) = icon_samples(32);
        assert_eq!(samples.len(), 16);
        for (s, label) in samples.iter().zip(ICON_LABELS) {
            assert_eq!(vocab.decode(&s.token_ids).unwrap().join(" "), label);
            assert_eq!(s.image.dim(), (32 * 32, 3));
        }
    }

    #[test]
    fn capture_directory_loads() {
        let tmp = tempfile::tempdir().unwrap();
        write_icon_captures(tmp.path()).unwrap();
        let apps = load_capture_dir(tmp.path()).unwrap();
        assert_eq!(apps.len(), 2);
        let buttons: usize = apps
            .iter()
            .flat_map(|a| &a.captures)
            .flat_map(|c| &c.elements)
            .filter(|e| e.is_image_based_button())
            .count();
        assert_eq!(buttons, 18);
    }
}
