//! Per-category app-level train/validation/test assignment.

use std::collections::BTreeMap;
use std::path::Path;

use log::warn;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::FORMAT_VERSION;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Val,
    Test,
}

impl Split {
    pub const ALL: [Split; 3] = [Split::Train, Split::Val, Split::Test];

    pub fn as_str(&self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Val => "val",
            Split::Test => "test",
        }
    }
}

impl std::fmt::Display for Split {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// App, sample and screen counts for one split of one category.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitCounts {
    pub apps: usize,
    pub screens: usize,
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitManifest {
    pub format_version: u32,
    pub seed: u64,
    pub assignments: BTreeMap<String, Split>,
    /// category -> split -> counts
    pub per_category: BTreeMap<String, BTreeMap<Split, SplitCounts>>,
}

/// One app as seen by the splitter.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AppGroup {
    pub app_id: String,
    pub category: String,
    pub samples: usize,
    pub screens: usize,
}

/// Largest-remainder apportionment of `n` items at 80/10/10.
pub fn apportion(n: usize) -> [usize; 3] {
    let weights = [8usize, 1, 1];
    let mut counts = [0usize; 3];
    let mut remainders = [(0usize, 0usize); 3];
    for (i, w) in weights.iter().enumerate() {
        counts[i] = n * w / 10;
        remainders[i] = (n * w % 10, i);
    }
    let mut left = n - counts.iter().sum::<usize>();
    // larger remainder first, earlier split on ties
    remainders.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    for &(_, i) in remainders.iter() {
        if left == 0 {
            break;
        }
        counts[i] += 1;
        left -= 1;
    }
    counts
}

pub fn split_dataset(apps: &[AppGroup], seed: u64) -> Result<SplitManifest> {
    let mut by_category: BTreeMap<&str, Vec<&AppGroup>> = BTreeMap::new();
    let mut assignments = BTreeMap::new();
    for app in apps {
        if assignments.insert(app.app_id.clone(), Split::Train).is_some() {
            return Err(Error::InvalidArgument(format!(
                "app {} listed more than once",
                app.app_id
            )));
        }
        by_category.entry(app.category.as_str()).or_default().push(app);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut per_category = BTreeMap::new();
    for (category, mut group) in by_category {
        group.sort_by(|a, b| a.app_id.cmp(&b.app_id));
        group.shuffle(&mut rng);
        let counts = if group.len() < 3 {
            warn!(
                "category `{category}` has {} apps; all assigned to train",
                group.len()
            );
            [group.len(), 0, 0]
        } else {
            apportion(group.len())
        };
        let mut tally: BTreeMap<Split, SplitCounts> =
            Split::ALL.iter().map(|&s| (s, SplitCounts::default())).collect();
        let mut cursor = 0;
        for (split, count) in Split::ALL.iter().zip(counts) {
            for app in &group[cursor..cursor + count] {
                assignments.insert(app.app_id.clone(), *split);
                let t = tally.get_mut(split).expect("all splits present");
                t.apps += 1;
                t.samples += app.samples;
                t.screens += app.screens;
            }
            cursor += count;
        }
        per_category.insert(category.to_string(), tally);
    }

    Ok(SplitManifest {
        format_version: FORMAT_VERSION,
        seed,
        assignments,
        per_category,
    })
}

impl SplitManifest {
    pub fn split_of(&self, app_id: &str) -> Option<Split> {
        self.assignments.get(app_id).copied()
    }

    /// Counts summed over categories.
    pub fn totals(&self) -> BTreeMap<Split, SplitCounts> {
        let mut out: BTreeMap<Split, SplitCounts> = BTreeMap::new();
        for per_split in self.per_category.values() {
            for (split, c) in per_split {
                let t = out.entry(*split).or_default();
                t.apps += c.apps;
                t.screens += c.screens;
                t.samples += c.samples;
            }
        }
        out
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let m: Self = serde_json::from_str(&text).map_err(|e| Error::Format {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        if m.format_version != FORMAT_VERSION {
            return Err(Error::Format {
                path: path.to_path_buf(),
                message: format!("unsupported format_version {}", m.format_version),
            });
        }
        Ok(m)
    }
}
