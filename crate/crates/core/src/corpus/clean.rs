//! Label normalization and the meaningless-label filter.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RejectReason {
    ElementClass,
    AppName,
    Placeholder,
    Empty,
}

impl std::fmt::Display for RejectReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            RejectReason::ElementClass => "element-class",
            RejectReason::AppName => "app-name",
            RejectReason::Placeholder => "placeholder",
            RejectReason::Empty => "empty",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CleanOutcome {
    Accept(Vec<String>),
    Reject(RejectReason),
}

/// Phrase lists driving [`clean_label`]. Loadable from JSON so a longer list
/// can be swapped in without code changes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CleaningRules {
    /// Phrases naming a widget class; matched as contiguous words.
    #[serde(default = "default_class_phrases")]
    pub element_class_phrases: Vec<String>,
    /// Labels that are rejected when they equal one of these exactly.
    #[serde(default = "default_placeholders")]
    pub placeholders: Vec<String>,
}

fn default_class_phrases() -> Vec<String> {
    [
        "image button",
        "imagebutton",
        "button with image",
        "image view",
        "imageview",
        "clickable image",
    ]
    .map(String::from)
    .to_vec()
}

fn default_placeholders() -> Vec<String> {
    ["test", "content description", "untitled", "none"]
        .map(String::from)
        .to_vec()
}

impl Default for CleaningRules {
    fn default() -> Self {
        Self {
            element_class_phrases: default_class_phrases(),
            placeholders: default_placeholders(),
        }
    }
}

impl CleaningRules {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Format {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
    }
}

/// Lowercase, punctuation to spaces, whitespace split.
pub fn normalize(text: &str) -> Vec<String> {
    let mapped: String = text
        .chars()
        .flat_map(char::to_lowercase)
        .map(|c| if c.is_alphanumeric() { c } else { ' ' })
        .collect();
    mapped.split_whitespace().map(str::to_string).collect()
}

fn contains_phrase(words: &[String], phrase: &[String]) -> bool {
    !phrase.is_empty()
        && phrase.len() <= words.len()
        && words.windows(phrase.len()).any(|w| w == phrase)
}

/// Translates labels before cleaning. The default leaves text untouched.
pub trait Translator {
    fn translate(&self, text: &str) -> String;
}

#[derive(Debug, Default, Clone, Copy)]
pub struct IdentityTranslator;

impl Translator for IdentityTranslator {
    fn translate(&self, text: &str) -> String {
        text.to_string()
    }
}

pub fn clean_label(raw_label: &str, app_name: &str, rules: &CleaningRules) -> CleanOutcome {
    let words = normalize(raw_label);
    if words.is_empty() {
        return CleanOutcome::Reject(RejectReason::Empty);
    }
    if rules
        .element_class_phrases
        .iter()
        .any(|p| contains_phrase(&words, &normalize(p)))
    {
        return CleanOutcome::Reject(RejectReason::ElementClass);
    }
    if contains_phrase(&words, &normalize(app_name)) {
        return CleanOutcome::Reject(RejectReason::AppName);
    }
    if rules.placeholders.iter().any(|p| normalize(p) == words) {
        return CleanOutcome::Reject(RejectReason::Placeholder);
    }
    CleanOutcome::Accept(words)
}

/// Runs the translator on non-ASCII labels, then [`clean_label`].
pub fn clean_with_translator(
    raw_label: &str,
    app_name: &str,
    rules: &CleaningRules,
    translator: &dyn Translator,
) -> CleanOutcome {
    if raw_label.is_ascii() {
        clean_label(raw_label, app_name, rules)
    } else {
        clean_label(&translator.translate(raw_label), app_name, rules)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn clean(label: &str, app: &str) -> CleanOutcome {
        clean_label(label, app, &CleaningRules::default())
    }

    #[test]
    fn quoted_examples() {
        assert_eq!(clean("image button", "Any"), CleanOutcome::Reject(RejectReason::ElementClass));
        assert_eq!(clean("Button with image", "Any"), CleanOutcome::Reject(RejectReason::ElementClass));
        assert_eq!(
            clean("ringtone maker", "Ringtone Maker"),
            CleanOutcome::Reject(RejectReason::AppName)
        );
        assert_eq!(clean("untitled", "Any"), CleanOutcome::Reject(RejectReason::Placeholder));
        assert_eq!(
            clean("add playlist", "Any"),
            CleanOutcome::Accept(vec!["add".into(), "playlist".into()])
        );
    }

    #[test]
    fn empty_and_punctuation_only() {
        assert_eq!(clean("", "a"), CleanOutcome::Reject(RejectReason::Empty));
        assert_eq!(clean("   ", "a"), CleanOutcome::Reject(RejectReason::Empty));
        assert_eq!(clean("...", "a"), CleanOutcome::Reject(RejectReason::Empty));
    }

    #[test]
    fn app_name_contained_in_label() {
        assert_eq!(
            clean("Open Ringtone Maker settings", "Ringtone Maker"),
            CleanOutcome::Reject(RejectReason::AppName)
        );
        // word boundaries matter
        assert!(matches!(clean("notes", "Note"), CleanOutcome::Accept(_)));
    }

    #[test]
    fn placeholder_requires_whole_label() {
        assert!(matches!(clean("test connection", "x"), CleanOutcome::Accept(_)));
        assert_eq!(clean("Content Description", "x"), CleanOutcome::Reject(RejectReason::Placeholder));
    }

    #[test]
    fn normalization() {
        assert_eq!(normalize("  Go-Back!!  now "), vec!["go", "back", "now"]);
    }

    #[test]
    fn placeholder_list_is_configurable() {
        let mut rules = CleaningRules::default();
        rules.placeholders.push("lorem ipsum".into());
        assert_eq!(
            clean_label("Lorem ipsum", "x", &rules),
            CleanOutcome::Reject(RejectReason::Placeholder)
        );
        let parsed: CleaningRules = serde_json::from_str(r#"{"placeholders":["foo"]}"#).unwrap();
        assert_eq!(parsed.element_class_phrases, default_class_phrases());
        assert_eq!(parsed.placeholders, vec!["foo"]);
    }

    struct Upper;
    impl Translator for Upper {
        fn translate(&self, _: &str) -> String {
            "go back".into()
        }
    }

    #[test]
    fn translator_only_sees_non_ascii() {
        let rules = CleaningRules::default();
        assert_eq!(
            clean_with_translator("retour arrière", "x", &rules, &Upper),
            CleanOutcome::Accept(vec!["go".into(), "back".into()])
        );
        assert_eq!(
            clean_with_translator("next", "x", &rules, &Upper),
            CleanOutcome::Accept(vec!["next".into()])
        );
        assert_eq!(
            clean_with_translator("retour arrière", "x", &rules, &IdentityTranslator),
            CleanOutcome::Accept(vec!["retour".into(), "arrière".into()])
        );
    }

    proptest! {
        #[test]
        fn accepted_labels_are_stable(label in "[a-zA-Z ,.!-]{0,30}", app in "[a-z]{0,6}") {
            let rules = CleaningRules::default();
            if let CleanOutcome::Accept(words) = clean_label(&label, &app, &rules) {
                let again = clean_label(&words.join(" "), &app, &rules);
                prop_assert_eq!(again, CleanOutcome::Accept(words));
            }
        }
    }
}
