use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use labelforge_core::audit::missing_stats;
use labelforge_core::capture::store::{read_jsonl, write_jsonl};
use labelforge_core::capture::{load_capture_dir, read_crop_index};
use labelforge_core::corpus::{preprocess as build_corpus, read_manifest, IdentityTranslator, LabeledSample, VOCAB_FILE};
use labelforge_core::decoding::{batch_predict, DecodeOptions, PredictInput, PredictionRecord};
use labelforge_core::metrics::{evaluate_corpus_multi, MetricConfig};
use labelforge_core::model::Checkpoint;
use labelforge_core::training::{load_best, train_loop, BEST_FILE};
use labelforge_core::{Captioner, Raster, Vocabulary};
use log::{info, warn};
use serde_json::{json, Value};

use crate::args::{AuditArgs, EvaluateArgs, InspectArgs, PredictArgs, PreprocessArgs, TrainArgs};
use crate::failure::{io_failure, require, Failure};
use crate::settings::{preprocess_config, train_settings, TrainFlags, RESOLVED_PREPROCESS, RESOLVED_TRAIN};

pub const AUDIT_REPORT: &str = "audit_report.json";
pub const AUDIT_CSV: &str = "audit_per_app.csv";

fn write_file(path: &Path, contents: &str) -> Result<(), Failure> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| io_failure(parent, e))?;
    }
    fs::write(path, contents).map_err(|e| io_failure(path, e))
}

fn pretty<T: serde::Serialize>(value: &T) -> Result<String, Failure> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

pub fn audit(args: AuditArgs) -> Result<(), Failure> {
    let apps = load_capture_dir(require(&args.captures)?)?;
    let report = missing_stats(&apps)?;
    write_file(&args.out.join(AUDIT_REPORT), &pretty(&report)?)?;
    write_file(&args.out.join(AUDIT_CSV), &report.per_app_csv())?;
    let t = &report.totals;
    println!("apps with missing labels     {}", t.apps.display());
    println!("screens with missing labels  {}", t.screens.display());
    println!("image buttons missing        {}", t.image_buttons.display());
    println!("clickable images missing     {}", t.clickable_images.display());
    println!("all image-based missing      {}", t.elements.display());
    match report.spearman_rho {
        Some(rho) => println!("spearman(installs, rate)     {rho:.4} over {} apps", report.spearman_apps),
        None => println!("spearman(installs, rate)     undefined"),
    }
    Ok(())
}

pub fn preprocess(args: PreprocessArgs) -> Result<(), Failure> {
    require(&args.captures)?;
    let cfg = preprocess_config(args.config.as_deref(), args.seed, args.min_count)?;
    let apps = load_capture_dir(&args.captures)?;
    let prepared = build_corpus(apps, &cfg, &IdentityTranslator)?;
    prepared.write(&args.out)?;
    write_file(&args.out.join(RESOLVED_PREPROCESS), &pretty(&cfg)?)?;
    let s = &prepared.stats;
    println!(
        "{} samples from {} apps; vocabulary {} tokens; {} rejected, {} unlabeled",
        s.accepted,
        s.apps_seen,
        prepared.vocab.len(),
        s.rejected.values().sum::<usize>(),
        s.unlabeled
    );
    Ok(())
}

fn load_split(
    records: &[labelforge_core::corpus::SampleRecord],
    root: &Path,
    split: labelforge_core::corpus::Split,
    resolution: u32,
) -> Result<Vec<LabeledSample>, Failure> {
    records
        .iter()
        .filter(|r| r.split == split)
        .map(|r| r.load(root, resolution).map_err(Failure::from))
        .collect()
}

fn manifest_root(manifest: &Path) -> PathBuf {
    manifest.parent().map(Path::to_path_buf).unwrap_or_default()
}

pub fn train(args: TrainArgs) -> Result<(), Failure> {
    let mut settings = train_settings(TrainFlags {
        config: args.config.as_deref(),
        manifest: args.manifest.as_deref(),
        out: args.out.as_deref(),
        seed: args.seed,
        warmup: args.warmup,
    })?;
    let records = read_manifest(require(&settings.manifest)?)?;
    let root = manifest_root(&settings.manifest);
    let vocab = Vocabulary::load(require(&root.join(VOCAB_FILE))?)?;
    settings.model.vocab_size = vocab.len();
    settings.model.validate()?;

    let res = settings.model.input_resolution as u32;
    let train_set = load_split(&records, &root, labelforge_core::corpus::Split::Train, res)?;
    let eval_set = load_split(&records, &root, settings.train.eval_split, res)?;
    info!(
        "training on {} samples, selecting on {} {} samples",
        train_set.len(),
        eval_set.len(),
        settings.train.eval_split.as_str()
    );

    fs::create_dir_all(&settings.out).map_err(|e| io_failure(&settings.out, e))?;
    write_file(&settings.out.join(RESOLVED_TRAIN), &pretty(&settings)?)?;
    let mut model = Captioner::new(settings.model.clone(), settings.train.seed)?;
    let outcome = train_loop(&mut model, &train_set, &eval_set, &vocab, &settings.train, Some(&settings.out))?;
    println!(
        "{}",
        json!({
            "steps_run": outcome.steps_run,
            "best_step": outcome.best_step,
            "eval_split": settings.train.eval_split.as_str(),
            "exact_match": outcome.best_exact_match,
        })
    );
    Ok(())
}

/// Finds the vocabulary whose digest the checkpoint was trained against.
fn matching_vocab(ck: &Checkpoint, places: &[PathBuf]) -> Result<Vocabulary, Failure> {
    for dir in places {
        let path = dir.join(VOCAB_FILE);
        if path.is_file() {
            let vocab = Vocabulary::load(&path)?;
            if vocab.digest() == ck.vocab_digest {
                return Ok(vocab);
            }
            warn!("{} does not match the checkpoint vocabulary", path.display());
        }
    }
    Err(Failure::other(
        "checkpoint",
        "no vocab.txt matching the checkpoint found next to it or next to the manifest",
    ))
}

fn open_checkpoint(path: &Path) -> Result<Checkpoint, Failure> {
    require(path)?;
    if path.is_dir() {
        if !path.join(BEST_FILE).is_file() {
            return Err(Failure::missing(&path.join(BEST_FILE)));
        }
        Ok(load_best(path)?)
    } else {
        Ok(Checkpoint::load(path)?)
    }
}

pub fn predict(args: PredictArgs) -> Result<(), Failure> {
    let ck = open_checkpoint(&args.checkpoint)?;
    let manifest = require(&args.manifest)?;
    let root = manifest_root(manifest);
    let mut places: Vec<PathBuf> = args.checkpoint.ancestors().map(Path::to_path_buf).collect();
    places.push(root.clone());
    let vocab = matching_vocab(&ck, &places)?;
    let res = ck.model.config().input_resolution as u32;

    // a corpus manifest carries token ids; a crop index does not
    let first: Option<Value> = read_jsonl::<Value>(manifest)?.into_iter().next();
    let is_corpus = first.as_ref().is_some_and(|v| v.get("token_ids").is_some());
    let items: Vec<(String, String, String)> = if is_corpus {
        read_manifest(manifest)?
            .into_iter()
            .filter(|r| args.split.map_or(true, |s| r.split == s))
            .map(|r| (r.crop_id, r.app_id, r.image_path))
            .collect()
    } else {
        if args.split.is_some() {
            return Err(Failure::usage("--split applies to corpus manifests, not crop indexes"));
        }
        read_crop_index(manifest)?
            .into_iter()
            .map(|r| (r.crop_id, r.app_id, r.image_path))
            .collect()
    };
    let inputs = items
        .into_iter()
        .map(|(crop_id, app_id, rel)| PredictInput {
            crop_id,
            app_id,
            image: Raster::load_png(&root.join(rel)).map(|img| img.model_input(res)),
        })
        .collect();
    let records = batch_predict(&ck.model, &vocab, inputs, &DecodeOptions { beam: args.beam });
    let failed = records.iter().filter(|r| r.error.is_some()).count();
    if failed > 0 {
        warn!("{failed} of {} crops could not be labeled", records.len());
    }
    match &args.out {
        Some(path) => {
            write_jsonl(path, &records)?;
            println!("{} predictions written to {}", records.len(), path.display());
        }
        None => {
            let mut out = std::io::stdout().lock();
            for r in &records {
                let line = serde_json::to_string(r)?;
                writeln!(out, "{line}").map_err(|e| io_failure(Path::new("<stdout>"), e))?;
            }
        }
    }
    Ok(())
}

/// Crop ids are unique within an app; reference files without `app_id` key on the id alone.
type RefKey = (Option<String>, String);

/// References from any JSON-lines file whose rows carry a `crop_id`, an
/// optional `app_id`, and either a `label` string or a `labels` array.
fn read_references(path: &Path) -> Result<HashMap<RefKey, Vec<Vec<String>>>, Failure> {
    let rows: Vec<Value> = read_jsonl(path)?;
    let mut refs = HashMap::new();
    for (i, row) in rows.iter().enumerate() {
        let bad = |what: &str| Failure::other("format", format!("{} row {}: {what}", path.display(), i + 1));
        let id = row.get("crop_id").and_then(Value::as_str).ok_or_else(|| bad("missing crop_id"))?;
        let app = row.get("app_id").and_then(Value::as_str).map(String::from);
        let split = |s: &str| s.split_whitespace().map(String::from).collect::<Vec<_>>();
        let labels = match (row.get("labels"), row.get("label")) {
            (Some(Value::Array(items)), _) => items
                .iter()
                .map(|v| v.as_str().map(split).ok_or_else(|| bad("labels must be strings")))
                .collect::<Result<Vec<_>, _>>()?,
            (_, Some(Value::String(s))) => vec![split(s)],
            _ => return Err(bad("needs a label string or labels array")),
        };
        if refs.insert((app, id.to_string()), labels).is_some() {
            return Err(bad(&format!("duplicate crop_id {id}")));
        }
    }
    Ok(refs)
}

pub fn evaluate(args: EvaluateArgs) -> Result<(), Failure> {
    let preds: Vec<PredictionRecord> = read_jsonl(require(&args.pred)?)?;
    let refs = read_references(require(&args.refs)?)?;
    let mut hyps = Vec::with_capacity(preds.len());
    let mut targets = Vec::with_capacity(preds.len());
    for p in &preds {
        let r = refs
            .get(&(Some(p.app_id.clone()), p.crop_id.clone()))
            .or_else(|| refs.get(&(None, p.crop_id.clone())))
            .ok_or_else(|| Failure::other("format", format!("no reference for crop {}", p.crop_id)))?;
        if let Some(e) = &p.error {
            warn!("crop {} has no prediction ({e}); scored as empty", p.crop_id);
        }
        hyps.push(p.words());
        targets.push(r.clone());
    }
    if refs.len() > preds.len() {
        warn!("{} references have no prediction and are ignored", refs.len() - preds.len());
    }
    let report = evaluate_corpus_multi(&hyps, &targets, &MetricConfig::default())?;
    let text = pretty(&report)?;
    match &args.out {
        Some(path) => write_file(path, &text)?,
        None => print!("{text}"),
    }
    Ok(())
}

pub fn inspect(args: InspectArgs) -> Result<(), Failure> {
    let ck = open_checkpoint(&args.checkpoint)?;
    let params = ck.model.params();
    let groups: Vec<Value> = params
        .names()
        .iter()
        .zip(params.values())
        .map(|(n, v)| json!({ "name": n, "shape": [v.nrows(), v.ncols()] }))
        .collect();
    let total: usize = params.values().iter().map(|v| v.len()).sum();
    let summary = json!({
        "step": ck.step,
        "vocab_digest": ck.vocab_digest,
        "parameters": total,
        "config": ck.model.config(),
        "groups": groups,
    });
    print!("{}", pretty(&summary)?);
    Ok(())
}
