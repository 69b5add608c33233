//! Missing-label statistics over raw captures.
//!
//! An element is missing a label when it is an image-based button whose
//! content description is absent or blank. A screen is missing when it holds
//! at least one such element, and an app when it holds at least one such screen.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::capture::store::AppCaptures;
use crate::capture::{dedup_screens, ScreenCapture};
use crate::error::{Error, Result};

pub const DEFAULT_EDGES: [f64; 6] = [0.0, 0.2, 0.4, 0.6, 0.8, 1.0];

/// Google Play category identifiers; anything else is grouped as `other`.
pub const KNOWN_CATEGORIES: &[&str] = &[
    "ART_AND_DESIGN",
    "AUTO_AND_VEHICLES",
    "BEAUTY",
    "BOOKS_AND_REFERENCE",
    "BUSINESS",
    "COMICS",
    "COMMUNICATION",
    "DATING",
    "EDUCATION",
    "ENTERTAINMENT",
    "EVENTS",
    "FINANCE",
    "FOOD_AND_DRINK",
    "GAME",
    "HEALTH_AND_FITNESS",
    "HOUSE_AND_HOME",
    "LIBRARIES_AND_DEMO",
    "LIFESTYLE",
    "MAPS_AND_NAVIGATION",
    "MEDICAL",
    "MUSIC_AND_AUDIO",
    "NEWS_AND_MAGAZINES",
    "PARENTING",
    "PERSONALIZATION",
    "PHOTOGRAPHY",
    "PRODUCTIVITY",
    "SHOPPING",
    "SOCIAL",
    "SPORTS",
    "TOOLS",
    "TRAVEL_AND_LOCAL",
    "VIDEO_PLAYERS",
    "WEATHER",
];

pub const OTHER_CATEGORY: &str = "other";

pub fn canonical_category(raw: &str) -> String {
    let key = raw
        .replace('&', " and ")
        .split(|c: char| !c.is_ascii_alphanumeric())
        .filter(|w| !w.is_empty())
        .map(|w| w.to_ascii_uppercase())
        .collect::<Vec<_>>()
        .join("_");
    if KNOWN_CATEGORIES.contains(&key.as_str()) {
        key
    } else {
        OTHER_CATEGORY.to_string()
    }
}

/// Lower bound of an install bucket such as `"1,000+"`, `"10K-50K"` or `"5M"`.
pub fn install_lower_bound(bucket: &str) -> Result<u64> {
    let first = bucket.trim().split(['-', '+', ' ']).next().unwrap_or("").replace(',', "");
    let (digits, scale) = match first.chars().last() {
        Some('K' | 'k') => (&first[..first.len() - 1], 1_000),
        Some('M' | 'm') => (&first[..first.len() - 1], 1_000_000),
        Some('B' | 'b') => (&first[..first.len() - 1], 1_000_000_000),
        _ => (first.as_str(), 1),
    };
    digits
        .parse::<u64>()
        .map(|v| v * scale)
        .map_err(|_| Error::InvalidArgument(format!("unrecognized install bucket {bucket:?}")))
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ratio {
    pub missing: u64,
    pub total: u64,
}

impl Ratio {
    /// `missing / total`, or `None` when there is nothing to count.
    pub fn rate(&self) -> Option<f64> {
        (self.total > 0).then(|| self.missing as f64 / self.total as f64)
    }

    fn add(&mut self, other: Ratio) {
        self.missing += other.missing;
        self.total += other.total;
    }

    /// `"missing/total (rate%)"` with two decimals.
    pub fn display(&self) -> String {
        match self.rate() {
            Some(r) => format!("{}/{} ({:.2}%)", self.missing, self.total, r * 100.0),
            None => format!("{}/{}", self.missing, self.total),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AppAudit {
    pub app_id: String,
    pub category: String,
    pub install_bucket: String,
    pub image_buttons: Ratio,
    pub clickable_images: Ratio,
    pub screens: Ratio,
}

impl AppAudit {
    /// Both kinds of image-based button together.
    pub fn elements(&self) -> Ratio {
        let mut r = self.image_buttons;
        r.add(self.clickable_images);
        r
    }

    pub fn is_missing(&self) -> bool {
        self.screens.missing > 0
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AuditTotals {
    pub apps: Ratio,
    pub screens: Ratio,
    pub image_buttons: Ratio,
    pub clickable_images: Ratio,
    pub elements: Ratio,
}

pub fn aggregate(apps: &[AppAudit]) -> AuditTotals {
    let mut t = AuditTotals::default();
    for a in apps {
        t.apps.add(Ratio {
            missing: a.is_missing() as u64,
            total: 1,
        });
        t.screens.add(a.screens);
        t.image_buttons.add(a.image_buttons);
        t.clickable_images.add(a.clickable_images);
        t.elements.add(a.elements());
    }
    t
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoryHistogram {
    pub edges: Vec<f64>,
    /// Per category, the fraction of its apps in each bucket.
    pub fractions: BTreeMap<String, Vec<f64>>,
    pub app_counts: BTreeMap<String, usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub apps: Vec<AppAudit>,
    pub totals: AuditTotals,
    pub histogram: CategoryHistogram,
    /// Installs lower bound vs element missing rate; absent when undefined.
    pub spearman_rho: Option<f64>,
    pub spearman_apps: usize,
}

fn audit_screen(screen: &ScreenCapture, out: &mut AppAudit) {
    let mut any = false;
    for e in screen.elements.iter().filter(|e| e.is_image_based_button()) {
        let missing = e.is_missing_label();
        let slot = if e.simple_class() == "ImageButton" {
            &mut out.image_buttons
        } else {
            &mut out.clickable_images
        };
        slot.total += 1;
        slot.missing += missing as u64;
        any |= missing;
    }
    out.screens.total += 1;
    out.screens.missing += any as u64;
}

/// Per-app counts after screen deduplication.
pub fn audit_app(app: &AppCaptures) -> AppAudit {
    let mut out = AppAudit {
        app_id: app.meta.app_id.clone(),
        category: app.meta.category.clone(),
        install_bucket: app.meta.install_bucket.clone(),
        image_buttons: Ratio::default(),
        clickable_images: Ratio::default(),
        screens: Ratio::default(),
    };
    for screen in &dedup_screens(app.captures.clone()) {
        audit_screen(screen, &mut out);
    }
    out
}

fn bucket_of(rate: f64, edges: &[f64]) -> usize {
    // right-closed buckets, the first one also holds its lower edge
    (1..edges.len()).find(|&i| rate <= edges[i]).unwrap_or(edges.len() - 1) - 1
}

/// Fraction of each category's apps falling in every rate bucket.
pub fn category_histogram(rates: &[(String, f64)], edges: &[f64]) -> Result<CategoryHistogram> {
    if edges.len() < 2 || edges.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument("bucket edges must be strictly increasing".into()));
    }
    let (lo, hi) = (edges[0], edges[edges.len() - 1]);
    let mut counts: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    for (category, rate) in rates {
        if !(lo..=hi).contains(rate) {
            return Err(Error::InvalidArgument(format!("rate {rate} outside [{lo}, {hi}]")));
        }
        let row = counts
            .entry(canonical_category(category))
            .or_insert_with(|| vec![0; edges.len() - 1]);
        row[bucket_of(*rate, edges)] += 1;
    }
    let app_counts = counts.iter().map(|(k, v)| (k.clone(), v.iter().sum())).collect();
    let fractions = counts
        .into_iter()
        .map(|(k, v)| {
            let n: usize = v.iter().sum();
            (k, v.into_iter().map(|c| c as f64 / n as f64).collect())
        })
        .collect();
    Ok(CategoryHistogram {
        edges: edges.to_vec(),
        fractions,
        app_counts,
    })
}

/// 1-based ranks with ties given their average rank.
pub fn average_ranks(xs: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..xs.len()).collect();
    order.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut ranks = vec![0.0; xs.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && xs[order[j + 1]] == xs[order[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = avg;
        }
        i = j + 1;
    }
    ranks
}

/// Spearman's rho: Pearson correlation of tie-averaged ranks.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "spearman needs two equal-length series of at least 2, got {} and {}",
            x.len(),
            y.len()
        )));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("spearman input".into()));
    }
    let (rx, ry) = (average_ranks(x), average_ranks(y));
    let n = x.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in rx.iter().zip(&ry) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::InvalidArgument("spearman is undefined for a constant series".into()));
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Builds the full report from per-app counts.
pub fn build_report(apps: Vec<AppAudit>, edges: &[f64]) -> Result<AuditReport> {
    let mut apps = apps;
    apps.sort_by(|a, b| a.app_id.cmp(&b.app_id));
    let rated: Vec<(&AppAudit, f64)> = apps.iter().filter_map(|a| a.elements().rate().map(|r| (a, r))).collect();
    let histogram = category_histogram(
        &rated.iter().map(|(a, r)| (a.category.clone(), *r)).collect::<Vec<_>>(),
        edges,
    )?;
    let mut installs = Vec::new();
    let mut rates = Vec::new();
    for (a, r) in &rated {
        match install_lower_bound(&a.install_bucket) {
            Ok(v) => {
                installs.push(v as f64);
                rates.push(*r);
            }
            Err(e) => warn!("app {}: {e}; left out of the correlation", a.app_id),
        }
    }
    let spearman_rho = match spearman(&installs, &rates) {
        Ok(rho) => Some(rho),
        Err(e) => {
            warn!("installs correlation unavailable: {e}");
            None
        }
    };
    Ok(AuditReport {
        totals: aggregate(&apps),
        histogram,
        spearman_rho,
        spearman_apps: installs.len(),
        apps,
    })
}

/// Audits every app. Input order does not matter.
pub fn missing_stats(apps: &[AppCaptures]) -> Result<AuditReport> {
    use rayon::prelude::*;
    let audits: Vec<AppAudit> = apps.par_iter().map(audit_app).collect();
    build_report(audits, &DEFAULT_EDGES)
}

impl AuditReport {
    /// Per-app rates as CSV; empty cells where a rate is undefined.
    pub fn per_app_csv(&self) -> String {
        let mut out = String::from(
            "app_id,category,install_bucket,image_buttons_missing,image_buttons_total,\
             clickable_images_missing,clickable_images_total,screens_missing,screens_total,element_missing_rate\n",
        );
        for a in &self.apps {
            let rate = a.elements().rate().map(|r| format!("{r:.6}")).unwrap_or_default();
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{}",
                csv_field(&a.app_id),
                csv_field(&a.category),
                csv_field(&a.install_bucket),
                a.image_buttons.missing,
                a.image_buttons.total,
                a.clickable_images.missing,
                a.clickable_images.total,
                a.screens.missing,
                a.screens.total,
                rate
            );
        }
        out
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}
