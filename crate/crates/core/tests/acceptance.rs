//! Acceptance criteria, one PASS/FAIL line each. Run with
//! `cargo test -p labelforge-core --test acceptance`.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use common::*;
use labelforge_core::audit::{aggregate, spearman, AppAudit, Ratio};
use labelforge_core::autodiff::Tape;
use labelforge_core::capture::{dedup_elements, dedup_screens, parse_capture, AppMeta};
use labelforge_core::corpus::clean::{clean_label, CleanOutcome, CleaningRules, RejectReason};
use labelforge_core::corpus::{split_dataset, AppGroup, Split};
use labelforge_core::decoding::{batch_predict, DecodeOptions, PredictInput};
use labelforge_core::metrics::{bleu, cider_d_scores, evaluate_corpus, meteor_lite, rouge_l, CIDER_SIGMA, ROUGE_BETA};
use labelforge_core::model::{attention_weights, kl_loss, softmax, Captioner};
use labelforge_core::synth::icon_samples;
use labelforge_core::training::{load_best, lr_at, lr_branches, train_loop, TrainConfig};
use labelforge_core::{Bounds, ElementCrop, ModelConfig, Raster};
use ndarray::{s, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within_budget(start: Instant, budget: Duration) -> Result<f64, String> {
    let secs = start.elapsed().as_secs_f64();
    ensure(secs < budget.as_secs_f64(), || format!("took {secs:.1}s, budget {}s", budget.as_secs()))?;
    Ok(secs)
}

fn metric_oracles() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let pairs = 240;
    let mut preds = Vec::new();
    let mut refs = Vec::new();
    for i in 0..pairs {
        let p = random_sentence(&mut rng, None);
        let mut rs = vec![random_sentence(&mut rng, Some(&p))];
        if i % 5 == 0 {
            rs.push(random_sentence(&mut rng, Some(&p)));
        }
        preds.push(p);
        refs.push(rs);
    }

    let mut worst = 0.0f64;
    let mut check = |name: &str, i: usize, got: f64, want: f64| -> Result<(), String> {
        let d = (got - want).abs();
        worst = worst.max(d);
        ensure(d <= 1e-8, || format!("{name} pair {i}: {got} vs oracle {want}"))
    };
    for (i, (p, rs)) in preds.iter().zip(&refs).enumerate() {
        for n in 1..=4 {
            check(&format!("bleu{n}"), i, bleu(p, rs, n), bleu_oracle(p, rs, n))?;
        }
        check("rouge_l", i, rouge_l(p, rs, ROUGE_BETA), rouge_oracle(p, rs, ROUGE_BETA))?;
        check("meteor", i, meteor_lite(p, rs), meteor_oracle(p, rs))?;
    }
    let cider = cider_d_scores(&preds, &refs, CIDER_SIGMA).map_err(|e| e.to_string())?;
    for (i, (got, want)) in cider.iter().zip(cider_oracle(&preds, &refs, CIDER_SIGMA)).enumerate() {
        check("cider_d", i, *got, want)?;
    }

    // two-item corpus with a perfect first prediction
    let small_p = vec![words("open menu"), words("play song")];
    let small_r = vec![vec![words("open menu")], vec![words("pause song now")]];
    let got = cider_d_scores(&small_p, &small_r, CIDER_SIGMA).map_err(|e| e.to_string())?;
    for (i, (g, w)) in got.iter().zip(cider_oracle(&small_p, &small_r, CIDER_SIGMA)).enumerate() {
        check("cider_d small", i, *g, w)?;
    }

    let secs = within_budget(start, Duration::from_secs(30))?;
    Ok(format!("{pairs} pairs x 7 metrics, max |diff| {worst:.1e}, {secs:.1}s"))
}

fn attention_and_mask() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut worst_row = 0.0f64;
    for case in 0..100 {
        let (n, m, d) = (rng.gen_range(1..12), rng.gen_range(1..12), rng.gen_range(1..9));
        let q = Array2::from_shape_fn((n, d), |_| rng.gen_range(-3.0..3.0));
        let k = Array2::from_shape_fn((m, d), |_| rng.gen_range(-3.0..3.0));
        let mut mask = Array2::from_shape_fn((n, m), |_| rng.gen_bool(0.6));
        for r in 0..n {
            mask[[r, rng.gen_range(0..m)]] = true;
        }
        let masked = case % 2 == 0;
        let w = attention_weights(&q, &k, masked.then_some(&mask)).map_err(|e| e.to_string())?;
        for r in 0..n {
            let sum: f64 = w.row(r).sum();
            worst_row = worst_row.max((sum - 1.0).abs());
            ensure((sum - 1.0).abs() <= 1e-6, || format!("case {case} row {r} sums to {sum}"))?;
            if masked {
                for c in 0..m {
                    ensure(mask[[r, c]] || w[[r, c]] == 0.0, || format!("case {case} masked weight {}", w[[r, c]]))?;
                }
            }
        }
    }

    let models = 50;
    for seed in 0..models {
        let d_model = [8, 16][seed as usize % 2];
        let heads = [1, 2, 4][rng.gen_range(0..3)];
        let layers = rng.gen_range(1..=2);
        let vocab = rng.gen_range(6..16);
        let model = Captioner::new(micro_config(vocab, d_model, heads, layers), seed).map_err(|e| e.to_string())?;
        let memory = model.encode_image(&random_image(&mut rng, 8)).map_err(|e| e.to_string())?;
        let len = rng.gen_range(2..=16);
        let prefix: Vec<u32> = (0..len).map(|_| rng.gen_range(0..vocab as u32)).collect();
        let base = model.decoder_forward(&memory, &prefix).map_err(|e| e.to_string())?;
        let probs = softmax(&base);
        for r in 0..probs.nrows() {
            let sum: f64 = probs.row(r).sum();
            worst_row = worst_row.max((sum - 1.0).abs());
            ensure((sum - 1.0).abs() <= 1e-6, || format!("model {seed} output row {r} sums to {sum}"))?;
        }
        for pos in 0..len {
            let mut changed = prefix.clone();
            changed[pos] = (changed[pos] + 1 + rng.gen_range(0..vocab as u32 - 1)) % vocab as u32;
            let out = model.decoder_forward(&memory, &changed).map_err(|e| e.to_string())?;
            ensure(out.slice(s![..pos, ..]) == base.slice(s![..pos, ..]), || {
                format!("model {seed}: change at {pos} leaked backwards")
            })?;
        }
    }
    Ok(format!(
        "100 weight matrices + {models} models, max |row sum - 1| {worst_row:.1e}, causal rows bit-identical"
    ))
}

fn gradient_check() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut model = Captioner::new(micro_config(10, 8, 2, 1), 21).map_err(|e| e.to_string())?;
    let image = random_image(&mut rng, 8);
    let ids = [0u32, 5, 8, 4, 9, 1, 3, 3];
    let (length, smoothing, weight) = (6, 0.1, 1.0 / 5.0);
    let loss_of = |m: &Captioner| m.loss_and_grads(&image, &ids, length, smoothing, weight).map(|r| r.0);
    let (_, analytic) = model.loss_and_grads(&image, &ids, length, smoothing, weight).map_err(|e| e.to_string())?;

    let h = 1e-5;
    let names = model.params().names().to_vec();
    let mut worst_group = (0.0f64, String::new());
    let mut entries = 0;
    for (g, name) in names.iter().enumerate() {
        let mut numeric = Array2::zeros(analytic[g].dim());
        for idx in 0..numeric.len() {
            let (r, c) = (idx / numeric.ncols(), idx % numeric.ncols());
            let orig = model.params().values()[g][[r, c]];
            model.params_mut().values_mut()[g][[r, c]] = orig + h;
            let up = loss_of(&model).map_err(|e| e.to_string())?;
            model.params_mut().values_mut()[g][[r, c]] = orig - h;
            let down = loss_of(&model).map_err(|e| e.to_string())?;
            model.params_mut().values_mut()[g][[r, c]] = orig;
            numeric[[r, c]] = (up - down) / (2.0 * h);
            entries += 1;
        }
        let diff = (&analytic[g] - &numeric).mapv(|v| v * v).sum().sqrt();
        let scale = analytic[g].mapv(|v| v * v).sum().sqrt().max(numeric.mapv(|v| v * v).sum().sqrt());
        let rel = if scale == 0.0 { diff } else { diff / scale };
        if rel > worst_group.0 {
            worst_group = (rel, name.clone());
        }
        ensure(rel <= 1e-4, || format!("group {name}: relative error {rel:.2e}"))?;
    }
    let secs = within_budget(start, Duration::from_secs(120))?;
    Ok(format!(
        "{} groups, {entries} entries, worst group {} at {:.1e}, {secs:.1}s",
        names.len(),
        worst_group.1,
        worst_group.0
    ))
}

fn kl_cross_entropy() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst = 0.0f64;
    for case in 0..200 {
        let (rows, v) = (rng.gen_range(1..7), rng.gen_range(2..30));
        let logits = Array2::from_shape_fn((rows, v), |_| rng.gen_range(-4.0..4.0));
        let q = softmax(&logits);
        let targets: Vec<usize> = (0..rows).map(|_| rng.gen_range(0..v)).collect();
        let mut p = Array2::zeros((rows, v));
        for (r, &t) in targets.iter().enumerate() {
            p[[r, t]] = 1.0;
        }
        let ce = targets.iter().enumerate().map(|(r, &t)| -q[[r, t]].ln()).sum::<f64>() / rows as f64;
        let kl = kl_loss(&q, &p, &vec![true; rows]).map_err(|e| e.to_string())?;

        let mut tape = Tape::new();
        let z = tape.constant(logits.clone());
        let node = tape.kl_div(z, p.clone(), vec![1.0 / rows as f64; rows]);
        let from_logits = tape.value(node)[[0, 0]];

        for got in [kl, from_logits] {
            worst = worst.max((got - ce).abs());
            ensure((got - ce).abs() <= 1e-8, || format!("case {case}: {got} vs cross-entropy {ce}"))?;
        }
    }
    Ok(format!("200 cases, max |KL - CE| {worst:.1e}"))
}

fn lr_schedule() -> Outcome {
    let mut worst = 0.0f64;
    for (d_model, warmup) in [(512usize, 4000u64), (64, 400), (8, 10)] {
        let (d, w) = (d_model as f64, warmup as f64);
        for step in [1, warmup / 2, warmup, 10 * warmup] {
            let s = step as f64;
            let want = 1.0 / d.sqrt() * f64::min(1.0 / s.sqrt(), s / (w * w.sqrt()));
            let got = lr_at(step, d_model, warmup).map_err(|e| e.to_string())?;
            let rel = (got - want).abs() / want;
            worst = worst.max(rel);
            ensure(rel <= 1e-12, || format!("d={d_model} w={warmup} step {step}: {got} vs {want}"))?;
        }
        let (decay, ramp) = lr_branches(warmup, d_model, warmup).map_err(|e| e.to_string())?;
        ensure(decay == ramp, || format!("branches differ at warmup {warmup}: {decay} vs {ramp}"))?;
    }
    Ok(format!("3 configurations x 4 steps, max relative error {worst:.1e}, branches equal at warmup"))
}

fn overfit_icons() -> Outcome {
    let start = Instant::now();
    let (samples, vocab) = icon_samples(32);
    let model_cfg = ModelConfig::tiny(vocab.len());
    ensure(
        model_cfg.d_model == 64 && model_cfg.encoder_layers == 2 && model_cfg.decoder_layers == 2 && model_cfg.heads == 4,
        || format!("tiny config drifted: {model_cfg:?}"),
    )?;
    let mut model = Captioner::new(model_cfg, 0).map_err(|e| e.to_string())?;
    let cfg = TrainConfig {
        warmup_steps: 400,
        batch_size: 16,
        max_steps: 2000,
        eval_every: 25,
        eval_split: Split::Train,
        target_exact_match: Some(0.95),
        patience: None,
        ..Default::default()
    };
    let out = tempfile::tempdir().map_err(|e| e.to_string())?;
    let outcome = train_loop(&mut model, &samples, &samples, &vocab, &cfg, Some(out.path())).map_err(|e| e.to_string())?;

    let best = load_best(out.path()).map_err(|e| e.to_string())?;
    let inputs = samples
        .iter()
        .map(|s| PredictInput {
            crop_id: s.crop_id.clone(),
            app_id: s.app_id.clone(),
            image: Ok(s.image.clone()),
        })
        .collect();
    let preds = batch_predict(&best.model, &vocab, inputs, &DecodeOptions::default());
    let pred_words: Vec<Vec<String>> = preds.iter().map(|p| p.words()).collect();
    let ref_words: Vec<Vec<String>> = samples
        .iter()
        .map(|s| vocab.decode(s.content_ids()).map_err(|e| e.to_string()))
        .collect::<Result<_, _>>()?;
    let report = evaluate_corpus(&pred_words, &ref_words).map_err(|e| e.to_string())?;
    ensure(report.exact_match >= 0.95, || {
        format!("exact match {:.3} after {} steps", report.exact_match, outcome.steps_run)
    })?;
    let secs = within_budget(start, Duration::from_secs(15 * 60))?;
    Ok(format!(
        "exact match {:.3} at step {} ({} steps run), BLEU-4 {:.3}, {secs:.0}s",
        report.exact_match, outcome.best_step.unwrap_or(0), outcome.steps_run, report.bleu[3]
    ))
}

fn crop(app: &str, bounds: Bounds, label: Option<&str>, shade: u8) -> ElementCrop {
    let image = Raster::filled(bounds.width() as u32, bounds.height() as u32, [shade, 0, 0]);
    ElementCrop {
        crop_id: format!("{app}-{shade}"),
        app_id: app.into(),
        screen_id: "s0".into(),
        app_category: "TOOLS".into(),
        install_bucket: "1,000+".into(),
        element_class: "ImageButton".into(),
        pixel_digest: image.digest(),
        image,
        bounds,
        raw_label: label.map(String::from),
    }
}

fn preprocessing() -> Outcome {
    let rules = CleaningRules::default();
    let cases = [
        ("image button", "Ringtone Maker", CleanOutcome::Reject(RejectReason::ElementClass)),
        ("ringtone maker", "Ringtone Maker", CleanOutcome::Reject(RejectReason::AppName)),
        ("untitled", "Ringtone Maker", CleanOutcome::Reject(RejectReason::Placeholder)),
        ("add playlist", "Ringtone Maker", CleanOutcome::Accept(words("add playlist"))),
    ];
    for (label, app, want) in cases {
        let got = clean_label(label, app, &rules);
        ensure(got == want, || format!("{label:?} in {app:?}: {got:?}, wanted {want:?}"))?;
    }

    // screens with identical hierarchies collapse within one app only
    let doc = "node class=\"android.widget.ImageButton\" bounds=\"[0,0][10,10]\" clickable=\"true\"\n";
    let shot = Raster::filled(20, 20, [9, 9, 9]);
    let cap = |app: &str, id: &str| parse_capture(doc, shot.clone(), &AppMeta::new(app, "TOOLS", "1,000+"), id).unwrap();
    let n = dedup_screens(vec![cap("a", "s0"), cap("a", "s1"), cap("b", "s0")]).len();
    ensure(n == 2, || format!("screen dedup kept {n}, wanted 2"))?;

    // identical pixels collapse even at different bounds and labels
    let same_pixels = vec![
        crop("a", Bounds::new(0, 0, 8, 8), Some("menu"), 1),
        crop("a", Bounds::new(20, 20, 28, 28), Some("back"), 1),
    ];
    let n = dedup_elements(same_pixels).len();
    ensure(n == 1, || format!("pixel dedup kept {n}, wanted 1"))?;

    // same bounds and label collapse even with different pixels
    let b = Bounds::new(0, 0, 8, 8);
    let n = dedup_elements(vec![crop("a", b, Some("menu"), 1), crop("a", b, Some("menu"), 2)]).len();
    ensure(n == 1, || format!("bounds+label dedup kept {n}, wanted 1"))?;
    let n = dedup_elements(vec![crop("a", b, Some("menu"), 1), crop("a", b, Some("back"), 2)]).len();
    ensure(n == 2, || format!("distinct labels at one position kept {n}, wanted 2"))?;

    let apps: Vec<AppGroup> = (0..10)
        .map(|i| AppGroup {
            app_id: format!("app{i}"),
            category: "TOOLS".into(),
            samples: 5,
            screens: 2,
        })
        .collect();
    let first = split_dataset(&apps, 7).map_err(|e| e.to_string())?;
    let again = split_dataset(&apps, 7).map_err(|e| e.to_string())?;
    let totals = first.totals();
    let counts: Vec<usize> = Split::ALL.iter().map(|s| totals[s].apps).collect();
    ensure(counts == [8, 1, 1], || format!("split counts {counts:?}"))?;
    ensure(first == again, || "same seed gave a different split".into())?;
    Ok("4 cleaning cases, 3 dedup rules, 10-app split 8/1/1 and seed-stable".into())
}

/// `total` spread as evenly as possible over `n` slots.
fn spread(total: u64, n: usize) -> Vec<u64> {
    let (q, r) = (total / n as u64, total % n as u64);
    (0..n as u64).map(|i| q + (i < r) as u64).collect()
}

fn audit_arithmetic() -> Outcome {
    let (apps, missing_apps) = (10_408usize, 8_054usize);
    let pad = |v: Vec<u64>| {
        let mut v = v;
        v.resize(apps, 0);
        v
    };
    let screens_missing = pad(spread(169_149, missing_apps));
    let ib_missing = pad(spread(241_236, missing_apps));
    let ci_missing = pad(spread(305_012, missing_apps));
    let screens_extra = spread(278_234 - 169_149, apps);
    let ib_extra = spread(423_172 - 241_236, apps);
    let ci_extra = spread(397_790 - 305_012, apps);
    let fixture: Vec<AppAudit> = (0..apps)
        .map(|i| AppAudit {
            app_id: format!("app{i:05}"),
            category: "TOOLS".into(),
            install_bucket: "1,000+".into(),
            image_buttons: Ratio {
                missing: ib_missing[i],
                total: ib_missing[i] + ib_extra[i],
            },
            clickable_images: Ratio {
                missing: ci_missing[i],
                total: ci_missing[i] + ci_extra[i],
            },
            screens: Ratio {
                missing: screens_missing[i],
                total: screens_missing[i] + screens_extra[i],
            },
        })
        .collect();
    let t = aggregate(&fixture);
    let expect = [
        ("image buttons", t.image_buttons, "241236/423172 (57.01%)"),
        ("clickable images", t.clickable_images, "305012/397790 (76.68%)"),
        ("all elements", t.elements, "546248/820962 (66.54%)"),
        ("apps", t.apps, "8054/10408 (77.38%)"),
        ("screens", t.screens, "169149/278234 (60.79%)"),
    ];
    for (name, ratio, want) in expect {
        let got = ratio.display();
        ensure(got == want, || format!("{name}: {got}, wanted {want}"))?;
    }

    let up: Vec<f64> = (0..12).map(|i| (i as f64).powi(3)).collect();
    let lin: Vec<f64> = (0..12).map(|i| i as f64 * 0.5 - 1.0).collect();
    let down: Vec<f64> = lin.iter().map(|v| -v.exp()).collect();
    let rho_up = spearman(&up, &lin).map_err(|e| e.to_string())?;
    let rho_down = spearman(&up, &down).map_err(|e| e.to_string())?;
    ensure(rho_up == 1.0 && rho_down == -1.0, || format!("monotone fixtures gave {rho_up}, {rho_down}"))?;

    let mut rng = ChaCha8Rng::seed_from_u64(20);
    let x: Vec<f64> = (0..20).map(|_| rng.gen_range(0..8) as f64).collect();
    let y: Vec<f64> = (0..20).map(|_| rng.gen_range(0..6) as f64 * 0.25).collect();
    let got = spearman(&x, &y).map_err(|e| e.to_string())?;
    let want = spearman_oracle(&x, &y);
    ensure((got - want).abs() <= 1e-10, || format!("20-point fixture: {got} vs oracle {want}"))?;
    Ok(format!("fixture totals reproduce to two decimals, rho = +/-1 on monotone data, tied fixture {got:.6}"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("metric-oracle suite", metric_oracles),
        ("attention/mask suite", attention_and_mask),
        ("gradient check", gradient_check),
        ("KL/cross-entropy identity", kl_cross_entropy),
        ("LR schedule", lr_schedule),
        ("overfit experiment", overfit_icons),
        ("preprocessing fixtures", preprocessing),
        ("audit arithmetic", audit_arithmetic),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failures = 0;
    for (name, run) in criteria {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let result = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|panic| {
            let msg = panic
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into());
            Err(msg)
        });
        match result {
            Ok(detail) => println!("PASS  {name}: {detail}"),
            Err(why) => {
                failures += 1;
                println!("FAIL  {name}: {why}");
            }
        }
    }
    if failures > 0 {
        println!("{failures} acceptance criteria failed");
        std::process::exit(1);
    }
}
