//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use affectguard_core::annotations::{
    dataset_summary, load_annotations, serialize_annotations, split_dataset, synthetic_corpus, ClassId, Emotion,
    NfblClip, NfblRegistry, SplitSizes, SyntheticSpec, VideoRecord,
};
use affectguard_core::anonymizer::{anonymize_mcadams, warp_pole_angles, AnonymizationParams};
use affectguard_core::dsp::{
    lpc_levinson, lpc_residual, mel_spectrogram, poles_to_coeffs, poly_roots, synthesize, AudioSignal, PoleSet, C64,
};
use affectguard_core::metrics::{confusion, pct, ConfusionCounts};
use affectguard_core::pipeline::{
    prepare_request, request_hash, sample_frames_uniform, segment_audio, AblationMode, JudgeRequest, MediaRoot,
    MockFixtures, PipelineConfig, PromptTemplate,
};
use affectguard_core::video::{mask_frame, FaceBox, FrameImage, SigmaPolicy};
use affectguard_core::wav::{encode_wav, WavEncoding};
use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit_s: f64) -> Result<(), String> {
    ensure(elapsed.as_secs_f64() < limit_s, || {
        format!("runtime {:.2}s exceeds {limit_s}s", elapsed.as_secs_f64())
    })
}

fn rel_l2(a: &[f64], b: &[f64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum();
    let den: f64 = b.iter().map(|y| y * y).sum();
    (num / den).sqrt()
}

fn gaussian(rng: &mut impl Rng) -> f64 {
    let u1: f64 = rng.random_range(f64::EPSILON..1.0);
    let u2: f64 = rng.random();
    (-2.0 * u1.ln()).sqrt() * (2.0 * PI * u2).cos()
}

/// White noise through a fixed three-formant all-pole filter.
fn speech_like(rng: &mut impl Rng, n: usize, rate: f64) -> Vec<f64> {
    let mut poles = Vec::new();
    for (f, r) in [(500.0, 0.97), (1500.0, 0.95), (2500.0, 0.93)] {
        let p = C64::from_polar(r, 2.0 * PI * f / rate);
        poles.push(p);
        poles.push(p.conj());
    }
    let a = poles_to_coeffs(&poles).expect("closed pole set");
    let mut y = vec![0.0; n];
    for t in 0..n {
        let mut v = gaussian(rng);
        for (k, &ak) in a.iter().enumerate().skip(1) {
            if t >= k {
                v -= ak * y[t - k];
            }
        }
        y[t] = v;
    }
    let peak = y.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    y.iter().map(|v| 0.5 * v / peak).collect()
}

fn mcadams_identity() -> Check {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let params = AnonymizationParams {
        mcadams_lambda: 1.0,
        ..Default::default()
    };
    let mut worst = 0.0f64;
    let mut total_s = 0.0;
    for k in 0..13 {
        let secs = match k {
            10 => 1.0,
            11 => 10.0,
            12 => 30.0,
            _ => rng.random_range(1.0..=30.0),
        };
        let n = (secs * 16_000.0) as usize;
        let samples = if k < 10 {
            (0..n).map(|_| rng.random_range(-0.5..0.5)).collect()
        } else {
            speech_like(&mut rng, n, 16_000.0)
        };
        let sig = AudioSignal::new(samples, 16_000).unwrap();
        let out = anonymize_mcadams(&sig, &params).map_err(|e| e.to_string())?;
        ensure(out.len() == sig.len(), || "length changed".into())?;
        worst = worst.max(rel_l2(out.samples(), sig.samples()));
        total_s += secs;
    }
    ensure(worst < 1e-4, || format!("worst relative L2 {worst:.3e} >= 1e-4"))?;
    within(start.elapsed(), 30.0)?;
    Ok(format!(
        "13 signals, {total_s:.0} s audio, worst rel L2 {worst:.2e}, {:.1}s",
        start.elapsed().as_secs_f64()
    ))
}

fn random_pole_set(rng: &mut impl Rng, max_degree: usize, mag: std::ops::Range<f64>) -> Vec<C64> {
    let degree = rng.random_range(1..=max_degree);
    let pairs = rng.random_range(0..=degree / 2);
    let mut poles = Vec::with_capacity(degree);
    for _ in 0..pairs {
        let p = C64::from_polar(rng.random_range(mag.clone()), rng.random_range(0.01..PI - 0.01));
        poles.push(p);
        poles.push(p.conj());
    }
    while poles.len() < degree {
        let r: f64 = rng.random_range(mag.clone());
        poles.push(C64::new(if rng.random_bool(0.5) { r } else { -r }, 0.0));
    }
    poles
}

fn conjugate_closed(poles: &[C64]) -> bool {
    poles
        .iter()
        .all(|p| p.im == 0.0 || poles.iter().any(|q| (q - p.conj()).norm() <= 1e-12))
}

fn pole_warp_invariants() -> Check {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst_mag = 0.0f64;
    for _ in 0..10_000 {
        let poles = random_pole_set(&mut rng, 24, 0.05..0.999);
        let set = PoleSet::new(poles.clone(), 1.0).map_err(|e| e.to_string())?;
        let warped = warp_pole_angles(&set, 0.8, 1e-6);
        let out = warped.poles();
        ensure(out.len() == poles.len(), || "pole count changed".into())?;
        for (p, q) in poles.iter().zip(out) {
            worst_mag = worst_mag.max((p.norm() - q.norm()).abs());
            if p.im == 0.0 {
                ensure(p == q, || format!("real pole {p} moved to {q}"))?;
                continue;
            }
            let (t, tn) = (p.arg().abs(), q.arg().abs());
            ensure((tn - 1.0).abs() <= (t - 1.0).abs() + 1e-12, || {
                format!("angle {t} warped away from 1 rad to {tn}")
            })?;
            ensure(
                (t - 1.0).signum() == (tn - 1.0).signum() || (t - 1.0).abs() < 1e-12,
                || format!("angle {t} crossed 1 rad to {tn}"),
            )?;
            ensure(p.im.signum() == q.im.signum(), || "pole changed half-plane".into())?;
        }
        ensure(conjugate_closed(out), || "warped set not conjugate-closed".into())?;
    }
    ensure(worst_mag <= 1e-9, || format!("magnitude drift {worst_mag:.3e}"))?;
    within(start.elapsed(), 10.0)?;
    Ok(format!(
        "10000 sets, max |mag| drift {worst_mag:.2e}, {:.2}s",
        start.elapsed().as_secs_f64()
    ))
}

fn lpc_round_trip() -> Check {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = 0.0f64;
    for _ in 0..1_000 {
        let order = rng.random_range(2..=24);
        let len = rng.random_range(order + 1..=640);
        let frame: Vec<f64> = (0..len).map(|_| gaussian(&mut rng)).collect();
        let c = lpc_levinson(&frame, order).map_err(|e| e.to_string())?.coefficients;
        let res = lpc_residual(&frame, &c).map_err(|e| e.to_string())?;
        let back = synthesize(&res, &c).map_err(|e| e.to_string())?;
        worst = worst.max(rel_l2(&back, &frame));
    }
    ensure(worst < 1e-8, || format!("worst relative L2 {worst:.3e}"))?;
    within(start.elapsed(), 10.0)?;
    Ok(format!("1000 frames, orders 2-24, worst rel L2 {worst:.2e}"))
}

/// Greedy nearest matching; its worst distance bounds the optimal matching's.
fn greedy_match_error(expected: &[C64], found: &[C64]) -> f64 {
    let mut free: Vec<C64> = found.to_vec();
    let mut worst = 0.0f64;
    for e in expected {
        let (i, d) = free
            .iter()
            .enumerate()
            .map(|(i, f)| (i, (f - e).norm()))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("equal counts");
        worst = worst.max(d);
        free.swap_remove(i);
    }
    worst
}

/// LPC-shaped pole set: complex pairs plus at most two real poles.
fn lpc_shaped_poles(rng: &mut impl Rng) -> Vec<C64> {
    let degree = rng.random_range(2..=24usize);
    let pairs = degree / 2 - usize::from(degree % 2 == 0 && rng.random_bool(0.3));
    let mut poles = Vec::with_capacity(degree);
    for _ in 0..pairs {
        let p = C64::from_polar(rng.random_range(0.5..0.99), rng.random_range(0.01..PI - 0.01));
        poles.push(p);
        poles.push(p.conj());
    }
    while poles.len() < degree {
        let r: f64 = rng.random_range(0.5..0.99);
        poles.push(C64::new(if rng.random_bool(0.5) { r } else { -r }, 0.0));
    }
    poles
}

/// First-order bound on root movement caused by rounding the coefficients
/// to double precision: `max_i u * sum_k |a_k| |z_i|^(n-k) / |p'(z_i)|`.
fn rounding_bound(poles: &[C64], coeffs: &[f64]) -> f64 {
    let n = coeffs.len() - 1;
    poles
        .iter()
        .enumerate()
        .map(|(i, z)| {
            let scale: f64 = coeffs
                .iter()
                .enumerate()
                .map(|(k, a)| a.abs() * z.norm().powi((n - k) as i32))
                .sum();
            let deriv: C64 = poles
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .map(|(_, q)| z - q)
                .product();
            scale / deriv.norm()
        })
        .fold(0.0f64, f64::max)
        * f64::EPSILON
}

fn root_round_trip() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (mut accepted, mut excluded) = (0usize, 0usize);
    let (mut worst, mut worst_excluded_ratio) = (0.0f64, 0.0f64);
    while accepted < 1_000 {
        let poles = lpc_shaped_poles(&mut rng);
        let coeffs = poles_to_coeffs(&poles).map_err(|e| e.to_string())?;
        let roots = poly_roots(&coeffs).map_err(|e| e.to_string())?;
        ensure(roots.len() == poles.len(), || "root count mismatch".into())?;
        let err = greedy_match_error(&poles, &roots);
        let bound = rounding_bound(&poles, &coeffs);
        if bound <= 1e-6 {
            accepted += 1;
            worst = worst.max(err);
        } else {
            excluded += 1;
            worst_excluded_ratio = worst_excluded_ratio.max(err / bound);
        }
    }
    ensure(worst <= 1e-6, || format!("worst matched root error {worst:.3e}"))?;
    ensure(worst_excluded_ratio <= 10.0, || {
        format!("ill-conditioned sets missed their rounding bound by {worst_excluded_ratio:.1}x")
    })?;
    let excluded_note = if excluded == 0 {
        "no set had a coefficient rounding bound above 1e-6".to_string()
    } else {
        format!("{excluded} sets with a rounding bound above 1e-6 stayed within {worst_excluded_ratio:.2}x of it")
    };
    Ok(format!(
        "1000 LPC-shaped sets, degree 2-24, worst root error {worst:.2e}; {excluded_note}"
    ))
}

fn metrics_all_positive_row() -> Check {
    let labels: Vec<Emotion> = [Emotion::Positive; 37]
        .into_iter()
        .chain([Emotion::Negative; 37])
        .collect();
    let c = confusion(&[Emotion::Positive; 74], &labels).map_err(|e| e.to_string())?;
    let row = (pct(c.accuracy()), pct(c.precision()), pct(c.f1()));
    ensure(row == ("50.00".into(), "50.00".into(), "66.67".into()), || {
        format!("row {row:?}")
    })?;
    Ok(format!("accuracy {} precision {} F1 {}", row.0, row.1, row.2))
}

fn metrics_oracle() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst = 0.0f64;
    let emo = |b: bool| if b { Emotion::Positive } else { Emotion::Negative };
    for _ in 0..1_000 {
        let n = rng.random_range(1..=200);
        let p_bias: f64 = rng.random();
        let preds: Vec<Emotion> = (0..n).map(|_| emo(rng.random_bool(p_bias))).collect();
        let labels: Vec<Emotion> = (0..n).map(|_| emo(rng.random_bool(0.5))).collect();
        let c = confusion(&preds, &labels).map_err(|e| e.to_string())?;
        let mut naive = [0u64; 4];
        for i in 0..n {
            let k = match (preds[i] == Emotion::Positive, labels[i] == Emotion::Positive) {
                (true, true) => 0,
                (false, false) => 1,
                (true, false) => 2,
                (false, true) => 3,
            };
            naive[k] += 1;
        }
        ensure(
            c == ConfusionCounts {
                tp: naive[0],
                tn: naive[1],
                fp: naive[2],
                fn_: naive[3],
            },
            || format!("counts {c:?} vs naive {naive:?}"),
        )?;
        let [tp, tn, fp, fn_] = naive;
        let ratio = |num: u64, den: u64| {
            if den == 0 {
                Ratio::new(0u64, 1)
            } else {
                Ratio::new(num, den)
            }
        };
        let as_f64 = |r: Ratio<u64>| *r.numer() as f64 / *r.denom() as f64;
        let oracle = [
            ratio(tp + tn, n as u64),
            ratio(tp, tp + fp),
            ratio(tp, tp + fn_),
            ratio(2 * tp, 2 * tp + fp + fn_),
        ];
        let got = [c.accuracy(), c.precision(), c.recall(), c.f1()];
        for (g, o) in got.iter().zip(oracle) {
            worst = worst.max((g - as_f64(o)).abs());
        }
        ensure(
            c.f1() <= 2.0 * c.precision().min(c.recall()) + 1e-15 && c.f1() >= 0.0,
            || "f1 bounds".into(),
        )?;
    }
    ensure(worst <= 1e-12, || format!("max deviation {worst:.3e}"))?;
    Ok(format!(
        "1000 instances, counts exact, max metric deviation {worst:.1e}"
    ))
}

fn sampling_contracts() -> Check {
    let idx = sample_frames_uniform(13478, 32);
    ensure(
        idx.len() == 32 && idx[0] == 210 && idx.iter().all(|&i| i < 13478),
        || format!("indices {idx:?}"),
    )?;
    let audio = AudioSignal::new(vec![0.01; 6_739_200], 16_000).unwrap();
    let clips = segment_audio(&audio, 2.0).map_err(|e| e.to_string())?;
    ensure(clips.len() == 210 && clips.iter().all(|c| c.len() == 32_000), || {
        format!("{} clips", clips.len())
    })?;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let clip = AudioSignal::new((0..32_000).map(|_| rng.random_range(-0.1..0.1)).collect(), 16_000).unwrap();
    let mel = mel_spectrogram(&clip, 128).map_err(|e| e.to_string())?;
    ensure((mel.bin_count(), mel.frame_count()) == (128, 198), || {
        format!("mel shape {}x{}", mel.bin_count(), mel.frame_count())
    })?;
    Ok(format!(
        "first index {}, last {}, 210 x 32000 clips, mel 128x198",
        idx[0], idx[31]
    ))
}

fn variance(frame: &FrameImage, b: &FaceBox) -> f64 {
    let mut vals = Vec::new();
    for y in b.y as u32..(b.y as u32 + b.h) {
        for x in b.x as u32..(b.x as u32 + b.w) {
            for c in 0..frame.channels() {
                vals.push(f64::from(frame.get(x, y, c)));
            }
        }
    }
    let mean = vals.iter().sum::<f64>() / vals.len() as f64;
    vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / vals.len() as f64
}

fn masking_locality() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (w, h) = (1280u32, 720u32);
    let pixels: Vec<u8> = (0..w * h * 3).map(|_| rng.random()).collect();
    let frame = FrameImage::new(w, h, 3, pixels).map_err(|e| e.to_string())?;
    let boxes = [
        FaceBox {
            frame_index: 0,
            x: 300,
            y: 120,
            w: 220,
            h: 260,
        },
        FaceBox {
            frame_index: 0,
            x: 1180,
            y: 600,
            w: 200,
            h: 200,
        },
    ];
    let out = mask_frame(&frame, &boxes, SigmaPolicy::default()).map_err(|e| e.to_string())?;
    let clipped: Vec<FaceBox> = boxes.iter().filter_map(|b| b.clip(w, h)).collect();
    let mut changed_outside = 0usize;
    for y in 0..h {
        for x in 0..w {
            if clipped.iter().any(|b| b.contains(x, y)) {
                continue;
            }
            for c in 0..3 {
                if frame.get(x, y, c) != out.get(x, y, c) {
                    changed_outside += 1;
                }
            }
        }
    }
    ensure(changed_outside == 0, || {
        format!("{changed_outside} samples changed outside the boxes")
    })?;
    let mut ratios = Vec::new();
    for b in &clipped {
        let (before, after) = (variance(&frame, b), variance(&out, b));
        ensure(after < before, || {
            format!("variance {before:.1} -> {after:.1} in {b:?}")
        })?;
        ratios.push(format!("{before:.0}->{after:.1}"));
    }
    let untouched = mask_frame(&frame, &[], SigmaPolicy::default()).map_err(|e| e.to_string())?;
    ensure(untouched.pixels() == frame.pixels(), || {
        "zero-box output differs".into()
    })?;
    Ok(format!(
        "outside identical, variance {}, zero boxes identical",
        ratios.join(", ")
    ))
}

fn write_media(root: &Path, id: &str, rng: &mut impl Rng) {
    let dir = root.join(id).join("frames");
    std::fs::create_dir_all(&dir).unwrap();
    for i in 0..48 {
        let pixels: Vec<u8> = (0..32 * 24 * 3).map(|_| rng.random()).collect();
        let img = FrameImage::new(32, 24, 3, pixels).unwrap();
        std::fs::write(dir.join(format!("frame_{i:05}.ppm")), img.to_ppm().unwrap()).unwrap();
    }
    let audio = AudioSignal::new(speech_like(rng, 16_000 * 7, 16_000.0), 16_000).unwrap();
    std::fs::write(
        root.join(id).join("audio.wav"),
        encode_wav(&audio, WavEncoding::Pcm16).unwrap(),
    )
    .unwrap();
}

fn e2e_records() -> Vec<VideoRecord> {
    (0..6)
        .map(|i| {
            let emotion = if i % 2 == 0 {
                Emotion::Positive
            } else {
                Emotion::Negative
            };
            VideoRecord {
                video_id: format!("vid{i:02}"),
                emotion,
                duration_s: 7.0,
                fps: 32.0,
                clips: (0..i)
                    .map(|k| {
                        NfblClip::new(
                            format!("vid{i:02}"),
                            ClassId([9, 5, 3, 24][k % 4]),
                            k as f64,
                            k as f64 + 0.5,
                        )
                    })
                    .collect(),
            }
        })
        .collect()
}

fn e2e_fixtures(records: &[VideoRecord], media: &MediaRoot) -> MockFixtures {
    let registry = NfblRegistry::builtin();
    let template = PromptTemplate::builtin();
    let config = PipelineConfig::default();
    let mut fx = MockFixtures::default();
    for (i, r) in records.iter().enumerate() {
        for (m, mode) in AblationMode::ALL.into_iter().enumerate() {
            let req = prepare_request(r, mode, &config, &registry, &template, media).unwrap();
            let text = format!("The athlete in {} speaks calmly ({}).", r.video_id, mode.label());
            // More modalities, fewer mistakes.
            let wrong = (i + m) % (4 + m) == 0;
            let emotion = match (r.emotion, wrong) {
                (Emotion::Positive, false) | (Emotion::Negative, true) => "positive",
                _ => "negative",
            };
            let judge = JudgeRequest {
                prompt: template.judge_prompt(&text),
            };
            fx.mllm.insert(request_hash(&req), text);
            fx.judge.insert(
                request_hash(&judge),
                format!("EMOTION: {emotion}\nCONFIDENCE: {}", 5 + (i + m) % 5),
            );
        }
    }
    fx
}

fn read_dir_bytes(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            (
                p.file_name().unwrap().to_string_lossy().into_owned(),
                std::fs::read(&p).unwrap(),
            )
        })
        .collect()
}

fn e2e_mock_run() -> Check {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let root = tmp.path();
    let records = e2e_records();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for r in &records {
        write_media(&root.join("media"), &r.video_id, &mut rng);
    }
    std::fs::write(root.join("ann.jsonl"), serialize_annotations(&records)).unwrap();
    let fx = e2e_fixtures(&records, &MediaRoot::new(root.join("media")));
    std::fs::write(root.join("fixtures.json"), fx.to_json()).unwrap();

    let start = Instant::now();
    let run = |out: &str| {
        let status = Command::new(env!("CARGO_BIN_EXE_affectguard"))
            .args(["--workers", "3", "--log", "warn", "run-pipeline", "--mode", "v,va,van"])
            .arg("--annotations")
            .arg(root.join("ann.jsonl"))
            .arg("--media-root")
            .arg(root.join("media"))
            .arg("--mock-fixtures")
            .arg(root.join("fixtures.json"))
            .arg("--output")
            .arg(root.join(out))
            .output()
            .expect("binary runs");
        ensure(status.status.success(), || {
            String::from_utf8_lossy(&status.stderr).into_owned()
        })
    };
    run("out1")?;
    run("out2")?;
    let elapsed = start.elapsed();
    let (a, b) = (read_dir_bytes(&root.join("out1")), read_dir_bytes(&root.join("out2")));
    ensure(a == b, || "results directories differ between runs".into())?;
    let results = String::from_utf8_lossy(&a["results.jsonl"]).into_owned();
    ensure(results.lines().count() == 18, || {
        format!("{} result lines", results.lines().count())
    })?;
    ensure(a["failures.jsonl"].is_empty(), || "unexpected failures".into())?;

    let table = String::from_utf8_lossy(&a["ablation.txt"]).into_owned();
    let header = table.lines().next().unwrap_or_default();
    let cols: Vec<Option<usize>> = ["Accuracy(%)", "F-score(%)", "Precision(%)", "Confidence"]
        .iter()
        .map(|c| header.find(c))
        .collect();
    ensure(
        cols.iter().all(Option::is_some) && cols.windows(2).all(|w| w[0] < w[1]),
        || format!("header `{header}`"),
    )?;
    let modes: Vec<&str> = table
        .lines()
        .skip(1)
        .map(|l| l.split_whitespace().next().unwrap_or(""))
        .collect();
    ensure(modes == ["video", "video+audio", "video+audio+NFBL"], || {
        format!("rows {modes:?}")
    })?;

    let calls = String::from_utf8_lossy(&a["mock_calls.jsonl"]).into_owned();
    let video_calls: Vec<serde_json::Value> = calls
        .lines()
        .map(|l| serde_json::from_str::<serde_json::Value>(l).unwrap())
        .filter(|v| v["mode"] == "v")
        .collect();
    ensure(
        video_calls.len() == 6 && video_calls.iter().all(|v| v["spectrograms"] == 0),
        || "video-only run sent spectrograms".into(),
    )?;
    within(elapsed, 20.0)?;
    Ok(format!(
        "6 videos x 3 modes, two runs byte-identical, {:.1}s\n{}",
        elapsed.as_secs_f64(),
        table.trim_end()
    ))
}

fn annotation_statistics() -> Check {
    let registry = NfblRegistry::builtin();
    let records = synthetic_corpus(&SyntheticSpec::default(), &registry, 42);
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let path = tmp.path().join("ann.jsonl");
    std::fs::write(&path, serialize_annotations(&records)).unwrap();

    let start = Instant::now();
    let parsed = load_annotations(&path, &registry).map_err(|e| e.to_string())?;
    let parse_time = start.elapsed();
    within(parse_time, 2.0)?;
    let s = dataset_summary(&parsed);
    ensure(s.videos == 275 && s.clips == 16_180, || {
        format!("{} videos, {} clips", s.videos, s.clips)
    })?;

    let split = split_dataset(&parsed, 7, SplitSizes::default()).map_err(|e| e.to_string())?;
    let count = |v: &[VideoRecord], e: Emotion| v.iter().filter(|r| r.emotion == e).count();
    ensure(split.train.len() == 72 && split.test.len() == 74, || {
        "split sizes".into()
    })?;
    ensure(
        count(&split.train, Emotion::Positive) == 36 && count(&split.test, Emotion::Negative) == 37,
        || "split balance".into(),
    )?;
    let train_ids: std::collections::HashSet<&str> = split.train.iter().map(|r| r.video_id.as_str()).collect();
    ensure(
        split.test.iter().all(|r| !train_ids.contains(r.video_id.as_str())),
        || "split overlap".into(),
    )?;
    let again = split_dataset(&parsed, 7, SplitSizes::default()).map_err(|e| e.to_string())?;
    ensure(again == split, || "same seed gave a different split".into())?;
    let other = split_dataset(&parsed, 8, SplitSizes::default()).map_err(|e| e.to_string())?;
    ensure(other != split, || "different seeds gave the same split".into())?;
    Ok(format!(
        "parsed in {:.0} ms: 275 videos, 16180 clips; split 72 (36/36) / 74 (37/37), disjoint, seeded",
        parse_time.as_secs_f64() * 1e3
    ))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("mcadams-identity", mcadams_identity),
        ("pole-warp-invariants", pole_warp_invariants),
        ("lpc-round-trip", lpc_round_trip),
        ("root-round-trip", root_round_trip),
        ("metrics-all-positive-row", metrics_all_positive_row),
        ("metrics-oracle", metrics_oracle),
        ("sampling-contracts", sampling_contracts),
        ("masking-locality", masking_locality),
        ("e2e-mock-run", e2e_mock_run),
        ("annotation-statistics", annotation_statistics),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        match outcome {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL {name}: {detail}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", 10 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
