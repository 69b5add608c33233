//! Line-oriented UI hierarchy dump.
//!
//! One element per record, attributes as quoted `key="value"` pairs in the
//! style of accessibility dump tools:
//!
//! ```text
//! # comment lines and blank lines are ignored
//! node class="android.widget.ImageButton" bounds="[0,0][48,48]" clickable="true" content-desc="back"
//! ```
//!
//! `class` and `bounds` are required. A missing `content-desc` attribute is
//! an absent label; `content-desc=""` is an empty one.

use crate::error::{Error, Result};
use crate::raster::Bounds;

/// One parsed record, attributes in document order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Record {
    pub line: usize,
    pub attrs: Vec<(String, String)>,
}

impl Record {
    pub fn get(&self, key: &str) -> Option<&str> {
        self.attrs
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Document {
    pub records: Vec<Record>,
    canonical: String,
}

impl Document {
    /// Whitespace-normalized form used for the hierarchy digest.
    pub fn canonical(&self) -> &str {
        &self.canonical
    }
}

pub fn parse_document(text: &str) -> Result<Document> {
    let mut records = Vec::new();
    let mut canonical = String::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if line.starts_with('#') {
            canonical.push_str(&line.split_whitespace().collect::<Vec<_>>().join(" "));
            canonical.push('\n');
            continue;
        }
        let record = parse_record(line, line_no, records.len())?;
        canonical.push_str(&serialize_record(&record));
        canonical.push('\n');
        records.push(record);
    }
    Ok(Document { records, canonical })
}

fn node_name(line: usize, index: usize) -> String {
    format!("line {line} (node {index})")
}

fn parse_record(line: &str, line_no: usize, index: usize) -> Result<Record> {
    let err = |message: String| Error::Parse {
        node: node_name(line_no, index),
        message,
    };
    let mut chars = line.char_indices().peekable();
    let head_end = line.find(char::is_whitespace).unwrap_or(line.len());
    if &line[..head_end] != "node" {
        return Err(err(format!("expected `node`, found `{}`", &line[..head_end])));
    }
    while chars.peek().is_some_and(|&(i, _)| i < head_end) {
        chars.next();
    }

    let mut attrs: Vec<(String, String)> = Vec::new();
    loop {
        while chars.peek().is_some_and(|(_, c)| c.is_whitespace()) {
            chars.next();
        }
        let Some(&(start, _)) = chars.peek() else {
            break;
        };
        let mut key_end = start;
        while let Some(&(i, c)) = chars.peek() {
            if c == '=' || c.is_whitespace() {
                break;
            }
            key_end = i + c.len_utf8();
            chars.next();
        }
        let key = &line[start..key_end];
        if key.is_empty() {
            return Err(err("empty attribute name".into()));
        }
        match chars.next() {
            Some((_, '=')) => {}
            _ => return Err(err(format!("attribute `{key}` missing `=`"))),
        }
        match chars.next() {
            Some((_, '"')) => {}
            _ => return Err(err(format!("attribute `{key}` value must be quoted"))),
        }
        let mut value = String::new();
        let mut closed = false;
        while let Some((_, c)) = chars.next() {
            match c {
                '"' => {
                    closed = true;
                    break;
                }
                '\\' => match chars.next() {
                    Some((_, 'n')) => value.push('\n'),
                    Some((_, 't')) => value.push('\t'),
                    Some((_, other)) => value.push(other),
                    None => break,
                },
                other => value.push(other),
            }
        }
        if !closed {
            return Err(err(format!("unterminated value for `{key}`")));
        }
        if attrs.iter().any(|(k, _)| k == key) {
            return Err(err(format!("duplicate attribute `{key}`")));
        }
        attrs.push((key.to_string(), value));
    }
    let record = Record {
        line: line_no,
        attrs,
    };
    for required in ["class", "bounds"] {
        if record.get(required).is_none() {
            return Err(err(format!("missing required attribute `{required}`")));
        }
    }
    Ok(record)
}

fn escape(value: &str) -> String {
    let mut out = String::with_capacity(value.len());
    for c in value.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            c => out.push(c),
        }
    }
    out
}

pub fn serialize_record(record: &Record) -> String {
    let mut out = String::from("node");
    for (k, v) in &record.attrs {
        out.push(' ');
        out.push_str(k);
        out.push_str("=\"");
        out.push_str(&escape(v));
        out.push('"');
    }
    out
}

/// Parses the `"[l,t][r,b]"` bounds notation.
pub fn parse_bounds(s: &str) -> Option<Bounds> {
    let s = s.trim();
    let inner = s.strip_prefix('[')?.strip_suffix(']')?;
    let (first, second) = inner.split_once("][")?;
    let pair = |p: &str| -> Option<(i64, i64)> {
        let (a, b) = p.split_once(',')?;
        Some((a.trim().parse().ok()?, b.trim().parse().ok()?))
    };
    let (left, top) = pair(first)?;
    let (right, bottom) = pair(second)?;
    Some(Bounds::new(left, top, right, bottom))
}

pub fn parse_bool(s: &str) -> Option<bool> {
    match s.trim().to_ascii_lowercase().as_str() {
        "true" | "1" => Some(true),
        "false" | "0" | "" => Some(false),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_attributes_in_order() {
        let doc = parse_document(
            r#"node class="a.ImageButton" bounds="[0,0][10,10]" clickable="true" content-desc="say \"hi\"""#,
        )
        .unwrap();
        assert_eq!(doc.records.len(), 1);
        let r = &doc.records[0];
        assert_eq!(r.get("class"), Some("a.ImageButton"));
        assert_eq!(r.get("content-desc"), Some("say \"hi\""));
        assert_eq!(r.get("text"), None);
    }

    #[test]
    fn whitespace_does_not_change_canonical_form() {
        let a = "node class=\"X\" bounds=\"[0,0][1,1]\"\n\nnode class=\"Y\" bounds=\"[0,0][2,2]\"\n";
        let b = "  node   class=\"X\"\tbounds=\"[0,0][1,1]\"  \r\nnode class=\"Y\" bounds=\"[0,0][2,2]\"";
        assert_eq!(
            parse_document(a).unwrap().canonical(),
            parse_document(b).unwrap().canonical()
        );
    }

    #[test]
    fn error_names_offending_node() {
        let doc = "node class=\"X\" bounds=\"[0,0][1,1]\"\nnode class=\"Y\" bounds=[0,0][1,1]\n";
        match parse_document(doc) {
            Err(Error::Parse { node, .. }) => assert_eq!(node, "line 2 (node 1)"),
            other => panic!("unexpected {other:?}"),
        }
        assert!(parse_document("widget class=\"X\"").is_err());
        assert!(parse_document("node class=\"X\"").is_err());
        assert!(parse_document("node class=\"X").is_err());
    }

    #[test]
    fn bounds_notation() {
        assert_eq!(
            parse_bounds("[1,2][30,40]"),
            Some(Bounds::new(1, 2, 30, 40))
        );
        assert_eq!(parse_bounds("[1,2,30,40]"), None);
        assert_eq!(parse_bounds("[a,2][3,4]"), None);
    }

    #[test]
    fn serialize_round_trips_escapes() {
        let doc = parse_document(r#"node class="X" bounds="[0,0][1,1]" text="a\\b\nc""#).unwrap();
        let line = serialize_record(&doc.records[0]);
        let again = parse_document(&line).unwrap();
        assert_eq!(again.records[0].attrs, doc.records[0].attrs);
    }
}
