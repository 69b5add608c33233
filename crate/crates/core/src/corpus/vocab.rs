//! Token vocabulary and fixed-capacity label encoding.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use log::warn;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::FORMAT_VERSION;

pub const START: u32 = 0;
pub const END: u32 = 1;
pub const UNK: u32 = 2;
pub const PAD: u32 = 3;

pub const SPECIAL_TOKENS: [&str; 4] = ["<start>", "<end>", "<unk>", "<pad>"];

/// Content words allowed per label.
pub const MAX_WORDS: usize = 15;
/// Encoded sequence length: content words plus START and END.
pub const SEQ_CAPACITY: usize = MAX_WORDS + 2;

pub const DEFAULT_MIN_COUNT: usize = 5;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    token_to_id: HashMap<String, u32>,
    id_to_token: Vec<String>,
    counts: Vec<usize>,
    min_count: usize,
}

impl Vocabulary {
    /// Builds from training-split word sequences. Tokens are ranked by
    /// descending frequency, then lexicographically, and take ids from 4.
    pub fn build<'a, I, S>(sequences: I, min_count: usize) -> Result<Self>
    where
        I: IntoIterator<Item = &'a S>,
        S: AsRef<[String]> + 'a + ?Sized,
    {
        let mut freq: HashMap<&str, usize> = HashMap::new();
        let mut any = false;
        for seq in sequences {
            any = true;
            for w in seq.as_ref() {
                *freq.entry(w.as_str()).or_default() += 1;
            }
        }
        if !any || freq.is_empty() {
            return Err(Error::Empty("vocabulary corpus".into()));
        }
        let mut ranked: Vec<(&str, usize)> = freq
            .into_iter()
            .filter(|&(w, c)| c >= min_count.max(1) && !SPECIAL_TOKENS.contains(&w))
            .collect();
        ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));

        let mut vocab = Self::specials_only(min_count);
        for (w, c) in ranked {
            vocab.push(w.to_string(), c);
        }
        Ok(vocab)
    }

    fn specials_only(min_count: usize) -> Self {
        let mut v = Self {
            token_to_id: HashMap::new(),
            id_to_token: Vec::new(),
            counts: Vec::new(),
            min_count,
        };
        for s in SPECIAL_TOKENS {
            v.push(s.to_string(), 0);
        }
        v
    }

    fn push(&mut self, token: String, count: usize) {
        self.token_to_id
            .insert(token.clone(), self.id_to_token.len() as u32);
        self.id_to_token.push(token);
        self.counts.push(count);
    }

    pub fn len(&self) -> usize {
        self.id_to_token.len()
    }

    pub fn is_empty(&self) -> bool {
        self.id_to_token.is_empty()
    }

    pub fn min_count(&self) -> usize {
        self.min_count
    }

    pub fn id(&self, token: &str) -> Option<u32> {
        self.token_to_id.get(token).copied()
    }

    pub fn token(&self, id: u32) -> Option<&str> {
        self.id_to_token.get(id as usize).map(String::as_str)
    }

    pub fn count(&self, id: u32) -> Option<usize> {
        self.counts.get(id as usize).copied()
    }

    pub fn tokens(&self) -> impl Iterator<Item = &str> {
        self.id_to_token.iter().map(String::as_str)
    }

    pub fn is_special(id: u32) -> bool {
        id <= PAD
    }

    /// `[START] + ids + [END]` padded with PAD to [`SEQ_CAPACITY`].
    /// Returns the ids and the real length (START and END included).
    pub fn encode(&self, words: &[String]) -> (Vec<u32>, usize) {
        let words = if words.len() > MAX_WORDS {
            warn!(
                "label with {} words truncated to {MAX_WORDS}",
                words.len()
            );
            &words[..MAX_WORDS]
        } else {
            words
        };
        let mut ids = Vec::with_capacity(SEQ_CAPACITY);
        ids.push(START);
        ids.extend(words.iter().map(|w| self.id(w).unwrap_or(UNK)));
        ids.push(END);
        let length = ids.len();
        ids.resize(SEQ_CAPACITY, PAD);
        (ids, length)
    }

    /// Words between START and the first END, specials dropped.
    pub fn decode(&self, ids: &[u32]) -> Result<Vec<String>> {
        let mut words = Vec::new();
        for &id in ids {
            let token = self.token(id).ok_or(Error::UnknownId(id))?;
            match id {
                END => break,
                START | UNK | PAD => {}
                _ => words.push(token.to_string()),
            }
        }
        Ok(words)
    }

    /// Hex SHA-256 of the serialized vocabulary file.
    pub fn digest(&self) -> String {
        hex::encode(Sha256::digest(self.to_file_string().as_bytes()))
    }

    pub fn to_file_string(&self) -> String {
        let mut out = format!(
            "#labelforge-vocab format_version={FORMAT_VERSION} min_count={}\n",
            self.min_count
        );
        for (tok, count) in self.id_to_token.iter().zip(&self.counts) {
            let _ = writeln!(out, "{tok}\t{count}");
        }
        out
    }

    pub fn parse_file(text: &str, path: &Path) -> Result<Self> {
        let fail = |message: String| Error::Format {
            path: path.to_path_buf(),
            message,
        };
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| fail("empty vocabulary file".into()))?;
        let mut min_count = None;
        let mut version = None;
        for field in header.trim_start_matches('#').split_whitespace().skip(1) {
            if let Some(v) = field.strip_prefix("min_count=") {
                min_count = v.parse::<usize>().ok();
            } else if let Some(v) = field.strip_prefix("format_version=") {
                version = v.parse::<u32>().ok();
            }
        }
        if version != Some(FORMAT_VERSION) {
            return Err(fail(format!("unsupported vocabulary header `{header}`")));
        }
        let mut vocab = Self {
            token_to_id: HashMap::new(),
            id_to_token: Vec::new(),
            counts: Vec::new(),
            min_count: min_count.ok_or_else(|| fail("missing min_count".into()))?,
        };
        for (i, line) in lines.enumerate() {
            let (tok, count) = line
                .rsplit_once('\t')
                .ok_or_else(|| fail(format!("line {}: expected token<TAB>count", i + 2)))?;
            let count = count
                .parse()
                .map_err(|_| fail(format!("line {}: bad count", i + 2)))?;
            if vocab.token_to_id.contains_key(tok) {
                return Err(fail(format!("line {}: duplicate token `{tok}`", i + 2)));
            }
            vocab.push(tok.to_string(), count);
        }
        for (id, s) in SPECIAL_TOKENS.iter().enumerate() {
            if vocab.token(id as u32) != Some(s) {
                return Err(fail(format!("special token `{s}` not at id {id}")));
            }
        }
        Ok(vocab)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_file_string()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse_file(&text, path)
    }
}
