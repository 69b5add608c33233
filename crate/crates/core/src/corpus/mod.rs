//! Caption corpus: cleaned labels, vocabulary, encoded samples and splits.

pub mod clean;
pub mod split;
pub mod vocab;

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::capture::store::{read_jsonl, write_jsonl};
use crate::capture::{
    dedup_elements, dedup_screens, extract_buttons, write_crop_store, AppCaptures, CropRecord,
    ElementCrop,
};
use crate::error::{Error, Result};
use crate::raster::Raster;
use crate::FORMAT_VERSION;

pub use clean::{
    clean_label, clean_with_translator, normalize, CleanOutcome, CleaningRules,
    IdentityTranslator, RejectReason, Translator,
};
pub use split::{split_dataset, AppGroup, Split, SplitCounts, SplitManifest};
pub use vocab::{Vocabulary, END, MAX_WORDS, PAD, SEQ_CAPACITY, START, UNK};

/// One training/evaluation pair ready for the model.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSample {
    pub crop_id: String,
    pub app_id: String,
    /// `(resolution^2) x 3` normalized pixels in raster order.
    pub image: Array2<f64>,
    pub token_ids: Vec<u32>,
    pub length: usize,
}

impl LabeledSample {
    /// Content words (START/END excluded) as ids.
    pub fn content_ids(&self) -> &[u32] {
        &self.token_ids[1..self.length - 1]
    }
}

/// One line of the dataset manifest.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub format_version: u32,
    pub crop_id: String,
    pub app_id: String,
    pub app_category: String,
    pub split: Split,
    /// Relative to the manifest directory.
    pub image_path: String,
    /// Normalized words joined by single spaces.
    pub label: String,
    pub token_ids: Vec<u32>,
    pub length: usize,
}

impl SampleRecord {
    pub fn words(&self) -> Vec<String> {
        self.label.split_whitespace().map(String::from).collect()
    }

    pub fn load(&self, root: &Path, resolution: u32) -> Result<LabeledSample> {
        let img = Raster::load_png(&root.join(&self.image_path))?;
        Ok(LabeledSample {
            crop_id: self.crop_id.clone(),
            app_id: self.app_id.clone(),
            image: img.model_input(resolution),
            token_ids: self.token_ids.clone(),
            length: self.length,
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PreprocessConfig {
    pub seed: u64,
    pub min_count: usize,
    #[serde(default)]
    pub rules: CleaningRules,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            min_count: vocab::DEFAULT_MIN_COUNT,
            rules: CleaningRules::default(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub format_version: u32,
    pub apps_seen: usize,
    pub screens_raw: usize,
    pub screens_after_dedup: usize,
    pub buttons_raw: usize,
    pub buttons_after_dedup: usize,
    pub unlabeled: usize,
    pub rejected: BTreeMap<String, usize>,
    pub accepted: usize,
    /// split -> apps/screens/elements, summed over categories
    pub splits: BTreeMap<Split, SplitCounts>,
}

pub struct Prepared {
    pub crops: Vec<ElementCrop>,
    pub samples: Vec<SampleRecord>,
    pub vocab: Vocabulary,
    pub splits: SplitManifest,
    pub stats: CorpusStats,
}

/// Dedup, extract, clean, split, build vocabulary and encode.
pub fn preprocess(
    apps: Vec<AppCaptures>,
    config: &PreprocessConfig,
    translator: &dyn Translator,
) -> Result<Prepared> {
    let mut stats = CorpusStats {
        format_version: FORMAT_VERSION,
        apps_seen: apps.len(),
        ..Default::default()
    };
    let mut crops = Vec::new();
    // (crop index, words, category)
    let mut accepted: Vec<(usize, Vec<String>)> = Vec::new();
    let mut groups: BTreeMap<String, (String, BTreeSet<String>, usize)> = BTreeMap::new();

    for app in apps {
        stats.screens_raw += app.captures.len();
        let screens = dedup_screens(app.captures);
        stats.screens_after_dedup += screens.len();
        let raw: Vec<ElementCrop> = screens.iter().flat_map(extract_buttons).collect();
        stats.buttons_raw += raw.len();
        let kept = dedup_elements(raw);
        stats.buttons_after_dedup += kept.len();
        for crop in kept {
            let idx = crops.len();
            match crop.raw_label.as_deref() {
                None => stats.unlabeled += 1,
                Some(label) => match clean_with_translator(
                    label,
                    app.meta.display_name(),
                    &config.rules,
                    translator,
                ) {
                    CleanOutcome::Accept(words) => {
                        let g = groups
                            .entry(crop.app_id.clone())
                            .or_insert_with(|| (app.meta.category.clone(), BTreeSet::new(), 0));
                        g.1.insert(crop.screen_id.clone());
                        g.2 += 1;
                        accepted.push((idx, words));
                    }
                    CleanOutcome::Reject(RejectReason::Empty) => stats.unlabeled += 1,
                    CleanOutcome::Reject(reason) => {
                        *stats.rejected.entry(reason.to_string()).or_default() += 1
                    }
                },
            }
            crops.push(crop);
        }
    }
    stats.accepted = accepted.len();
    if accepted.is_empty() {
        return Err(Error::Empty("no labeled image-based buttons survived cleaning".into()));
    }

    let app_groups: Vec<AppGroup> = groups
        .iter()
        .map(|(app_id, (category, screens, samples))| AppGroup {
            app_id: app_id.clone(),
            category: category.clone(),
            samples: *samples,
            screens: screens.len(),
        })
        .collect();
    let splits = split_dataset(&app_groups, config.seed)?;
    stats.splits = splits.totals();

    let train_words: Vec<&Vec<String>> = accepted
        .iter()
        .filter(|(idx, _)| splits.split_of(&crops[*idx].app_id) == Some(Split::Train))
        .map(|(_, w)| w)
        .collect();
    let vocab = Vocabulary::build(train_words, config.min_count)?;

    let samples = accepted
        .iter()
        .map(|(idx, words)| {
            let crop = &crops[*idx];
            let words = &words[..words.len().min(MAX_WORDS)];
            let (token_ids, length) = vocab.encode(words);
            SampleRecord {
                format_version: FORMAT_VERSION,
                crop_id: crop.crop_id.clone(),
                app_id: crop.app_id.clone(),
                app_category: crop.app_category.clone(),
                split: splits.split_of(&crop.app_id).expect("every accepted app is split"),
                image_path: format!("crops/{}/{}.png", crop.app_id, crop.crop_id),
                label: words.join(" "),
                token_ids,
                length,
            }
        })
        .collect();

    Ok(Prepared {
        crops,
        samples,
        vocab,
        splits,
        stats,
    })
}

pub const MANIFEST_FILE: &str = "manifest.jsonl";
pub const VOCAB_FILE: &str = "vocab.txt";
pub const SPLITS_FILE: &str = "splits.json";
pub const STATS_FILE: &str = "corpus_stats.json";

impl Prepared {
    /// Writes crops, crop index, manifest, vocabulary, splits and stats under `out`.
    pub fn write(&self, out: &Path) -> Result<Vec<CropRecord>> {
        std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
        let records = write_crop_store(out, &self.crops)?;
        write_manifest(&out.join(MANIFEST_FILE), &self.samples)?;
        self.vocab.save(&out.join(VOCAB_FILE))?;
        self.splits.save(&out.join(SPLITS_FILE))?;
        let stats_path = out.join(STATS_FILE);
        std::fs::write(&stats_path, serde_json::to_string_pretty(&self.stats)?)
            .map_err(|e| Error::io(&stats_path, e))?;
        Ok(records)
    }
}

pub fn write_manifest(path: &Path, samples: &[SampleRecord]) -> Result<()> {
    write_jsonl(path, samples)
}

pub fn read_manifest(path: &Path) -> Result<Vec<SampleRecord>> {
    let rows: Vec<SampleRecord> = read_jsonl(path)?;
    for r in &rows {
        if r.format_version != FORMAT_VERSION {
            return Err(Error::Format {
                path: path.to_path_buf(),
                message: format!("{}: unsupported format_version {}", r.crop_id, r.format_version),
            });
        }
        if r.token_ids.len() != SEQ_CAPACITY || r.length < 2 || r.length > SEQ_CAPACITY {
            return Err(Error::Format {
                path: path.to_path_buf(),
                message: format!("{}: malformed token sequence", r.crop_id),
            });
        }
    }
    Ok(rows)
}
