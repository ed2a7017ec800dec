//! Acceptance suite. Prints one PASS/FAIL/SKIP line per criterion and exits
//! non-zero when any criterion fails.
//!
//! `UPDATE_GOLDEN=1` rewrites the committed end-to-end golden files.
//! `MAPDESIGN_DATASET=<manifest.jsonl>` enables the published-dataset range
//! check, which is informative only and never fails the suite.

mod common;

use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use common::*;
use mapdesign::color::{color_profile, hue_complexity, ColorConfig, HueCategory, HueHistogram};
use mapdesign::cooccur::apriori;
use mapdesign::layout::{hierarchy_deviation, layout_profile, visual_balance, LayoutConfig};
use mapdesign::mask::{label_components, refine_main_mask, Connectivity};
use mapdesign::model::{MapElement, OrientedBox, PageGeometry};
use mapdesign::stats::{mann_whitney_u, spearman, StatsConfig, TestMethod};
use mapdesign::ElementKind;
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};

enum Outcome {
    Pass(String),
    Fail(String),
    Skip(String),
}

type Check = Result<String, String>;
type Criterion = (&'static str, Box<dyn Fn() -> Outcome>);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within_budget(elapsed: Duration, budget: Duration, detail: String) -> Check {
    ensure(elapsed <= budget, || format!("took {elapsed:.2?}, budget {budget:?}"))?;
    Ok(detail)
}

fn color_oracle() -> Check {
    let start = Instant::now();
    let mut rng = StdRng::seed_from_u64(1);
    let config = ColorConfig::default();
    let mut compared = 0;
    for case in 0..200 {
        let (w, h) = (rng.gen_range(1..=64), rng.gen_range(1..=64));
        let mut image = random_raster(&mut rng, w, h);
        if case % 4 == 0 {
            let alpha = (0..w * h).map(|_| if rng.gen_bool(0.2) { 0 } else { 255 }).collect();
            image = image.with_alpha(alpha).unwrap();
        }
        let mask = random_mask(&mut rng, w, h);
        let expected = naive_color(&image, &mask, &config.thresholds, config.presence_threshold);
        let got = color_profile(&image, &mask, &config);
        match (expected, got) {
            (None, Err(_)) => continue,
            (Some(e), Ok(p)) => {
                let ctx = format!("case {case} ({w}x{h})");
                ensure(p.histogram.counts == e.counts && p.histogram.pixel_count == e.n, || format!("{ctx}: histogram"))?;
                ensure(p.h_main == HueCategory::ALL[e.dominant], || format!("{ctx}: h_main"))?;
                ensure(p.s_ave == e.s_ave, || format!("{ctx}: s_ave {} vs {}", p.s_ave, e.s_ave))?;
                ensure(p.b_ave == e.b_ave, || format!("{ctx}: b_ave {} vs {}", p.b_ave, e.b_ave))?;
                ensure(p.n_hue == e.n_hue, || format!("{ctx}: n_hue"))?;
                ensure((p.b_con - e.b_con).abs() <= 1e-9, || format!("{ctx}: b_con {} vs {}", p.b_con, e.b_con))?;
                ensure((p.e_hue - e.e_hue).abs() <= 1e-9, || format!("{ctx}: e_hue {} vs {}", p.e_hue, e.e_hue))?;
                compared += 1;
            }
            (e, g) => return Err(format!("case {case}: oracle empty={} but library ok={}", e.is_none(), g.is_ok())),
        }
    }
    ensure(compared >= 50, || format!("only {compared} non-empty cases"))?;
    within_budget(start.elapsed(), Duration::from_secs(5), format!("{compared} rasters"))
}

fn entropy_bounds() -> Check {
    let mut rng = StdRng::seed_from_u64(2);
    let mut equality_cases = 0;
    for case in 0..1000 {
        let mut counts = [0u64; 10];
        match case % 4 {
            0 => counts[rng.gen_range(0..10)] = rng.gen_range(1..1000),
            1 => {
                let k = rng.gen_range(2..=10);
                let c = rng.gen_range(1..500);
                let mut idx: Vec<usize> = (0..10).collect();
                idx.shuffle(&mut rng);
                idx[..k].iter().for_each(|&i| counts[i] = c);
            }
            _ => counts.iter_mut().for_each(|c| *c = if rng.gen_bool(0.6) { rng.gen_range(0..10_000) } else { 0 }),
        }
        let hist = HueHistogram::from_counts(counts);
        let (n, e) = hue_complexity(&hist, 0.05);
        let upper = (n.max(1) as f64).log2();
        ensure((0.0..=upper).contains(&e), || format!("case {case}: e_hue {e} outside [0, {upper}]"))?;
        if case % 4 == 0 {
            ensure(n == 1 && e == 0.0, || format!("case {case}: single hue gave n={n}, e={e}"))?;
            equality_cases += 1;
        }
        if case % 4 == 1 {
            ensure(e == upper, || format!("case {case}: equal shares gave {e}, expected {upper}"))?;
            equality_cases += 1;
        }
    }
    Ok(format!("1000 histograms, {equality_cases} equality cases"))
}

fn el(kind: ElementKind, cx: f64, cy: f64, w: f64, h: f64, theta: f64) -> MapElement {
    MapElement::new(kind, OrientedBox::new(cx, cy, w, h, theta).unwrap())
}

fn layout_fixtures() -> Check {
    let cfg = LayoutConfig::default();
    let page = PageGeometry::new(800, 600).unwrap();
    let full = [el(ElementKind::MainMap, 0.5, 0.5, 1.0, 1.0, 0.0)];
    let p = layout_profile(&full, page, None, &cfg).map_err(|e| e.to_string())?;
    ensure(p.d_hier == 0.0 && p.r_map == 1.0, || format!("centered: d_hier {} r_map {}", p.d_hier, p.r_map))?;
    ensure(p.balance.b_horizontal == 0.0 && p.balance.b_vertical == 0.0, || "centered: balance".into())?;
    ensure(p.alignment.r_horizontal == 0.0 && p.alignment.r_vertical == 0.0, || "centered: alignment".into())?;

    for corner in [(0.0, 0.0), (1.0, 0.0), (0.0, 1.0), (1.0, 1.0)] {
        let d = hierarchy_deviation(corner, page);
        ensure((d - 1.0).abs() <= 1e-12, || format!("corner {corner:?}: d_hier {d}"))?;
    }
    let corner_map = [el(ElementKind::MainMap, 0.0, 1.0, 0.02, 0.02, 0.0)];
    let d = layout_profile(&corner_map, page, None, &cfg).map_err(|e| e.to_string())?.d_hier;
    ensure((d - 1.0).abs() <= 1e-12, || format!("corner box: d_hier {d}"))?;

    let mut rng = StdRng::seed_from_u64(3);
    let mut worst: f64 = 0.0;
    for case in 0..200 {
        let page = PageGeometry::new(rng.gen_range(100..2000), rng.gen_range(100..2000)).unwrap();
        let elements: Vec<MapElement> = (0..rng.gen_range(1..8))
            .map(|i| {
                let kind = if i == 0 { ElementKind::MainMap } else { ElementKind::ALL[rng.gen_range(1..10)] };
                let theta = if rng.gen_bool(0.3) { rng.gen_range(-90.0..90.0) } else { 0.0 };
                el(kind, rng.gen(), rng.gen(), rng.gen_range(0.01..0.6), rng.gen_range(0.01..0.6), theta)
            })
            .collect();
        let mirror_x: Vec<MapElement> = elements.iter().map(|e| MapElement::new(e.kind, e.bbox.mirrored_x())).collect();
        let mirror_y: Vec<MapElement> = elements.iter().map(|e| MapElement::new(e.kind, e.bbox.mirrored_y())).collect();
        let b = visual_balance(&elements, page, &cfg);
        let bx = visual_balance(&mirror_x, page, &cfg);
        let by = visual_balance(&mirror_y, page, &cfg);
        for (got, want) in [
            (bx.b_vertical, -b.b_vertical),
            (bx.b_horizontal, b.b_horizontal),
            (by.b_horizontal, -b.b_horizontal),
            (by.b_vertical, b.b_vertical),
        ] {
            worst = worst.max((got - want).abs());
            ensure((got - want).abs() <= 1e-9, || format!("mirror case {case}: {got} vs {want}"))?;
        }
    }
    Ok(format!("fixtures exact; 200 mirrored layouts, max |err| {worst:.1e}"))
}

fn cca_equivalence() -> Check {
    let mut rng = StdRng::seed_from_u64(4);
    for case in 0..200 {
        let mask = random_mask(&mut rng, 32, 32);
        for (conn, eight) in [(Connectivity::Four, false), (Connectivity::Eight, true)] {
            let got = label_components(&mask, conn);
            let (labels, sizes) = flood_fill_labels(&mask, eight);
            ensure(got.labels == labels && got.component_sizes == sizes, || format!("case {case} {conn:?}: labels differ"))?;
        }
        if let Ok(once) = refine_main_mask(&mask) {
            let twice = refine_main_mask(&once).map_err(|e| e.to_string())?;
            ensure(once == twice, || format!("case {case}: refinement not idempotent"))?;
        }
    }
    Ok("200 masks, both connectivities".into())
}

fn distinct_sample(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    let mut v: Vec<f64> = (0..n * 4).map(|i| i as f64 + 0.5).collect();
    v.shuffle(rng);
    v.truncate(n);
    v
}

fn stats_oracles() -> Check {
    let start = Instant::now();
    let cfg = StatsConfig::default();
    let mut rng = StdRng::seed_from_u64(5);
    let mut mwu_cases = 0;
    for n1 in 1..=6 {
        for n2 in 1..=6 {
            for _ in 0..5 {
                let pooled = distinct_sample(&mut rng, n1 + n2);
                let r = mann_whitney_u(&pooled[..n1], &pooled[n1..], &cfg).map_err(|e| e.to_string())?;
                let oracle = mwu_enumerated_p(n1, n2, r.u_statistic);
                ensure(r.method == TestMethod::Exact && r.p_value == oracle, || {
                    format!("mwu n1={n1} n2={n2}: p {} vs {oracle}", r.p_value)
                })?;
                mwu_cases += 1;
            }
        }
    }
    let mut spearman_cases = 0;
    for n in 3..=6 {
        for trial in 0..20 {
            let x: Vec<f64> = if trial % 3 == 0 {
                (0..n).map(|_| rng.gen_range(0..3) as f64).collect()
            } else {
                distinct_sample(&mut rng, n)
            };
            let y: Vec<f64> = if trial % 5 == 0 {
                (0..n).map(|_| rng.gen_range(0..3) as f64).collect()
            } else {
                distinct_sample(&mut rng, n)
            };
            let Ok(r) = spearman(&x, &y, &cfg) else {
                continue; // constant input
            };
            let (rho, p) = spearman_enumerated(&x, &y);
            ensure((r.rho - rho).abs() <= 1e-12, || format!("spearman {x:?} {y:?}: rho {} vs {rho}", r.rho))?;
            ensure(r.p_value == p, || format!("spearman {x:?} {y:?}: p {} vs {p}", r.p_value))?;
            spearman_cases += 1;
        }
    }
    let approx_cfg = StatsConfig { mwu_exact_max_product: 0, ..cfg };
    let mut worst: f64 = 0.0;
    for n1 in 15..=30 {
        for n2 in [15, 20, 25, 30] {
            let pooled = distinct_sample(&mut rng, n1 + n2);
            let shift = rng.gen_range(0.0..(n1 + n2) as f64);
            let x: Vec<f64> = pooled[..n1].iter().map(|v| v + shift).collect();
            let exact = mann_whitney_u(&x, &pooled[n1..], &cfg).map_err(|e| e.to_string())?;
            let approx = mann_whitney_u(&x, &pooled[n1..], &approx_cfg).map_err(|e| e.to_string())?;
            ensure(exact.method == TestMethod::Exact && approx.method == TestMethod::NormalApproximation, || {
                "wrong branch".into()
            })?;
            worst = worst.max((exact.p_value - approx.p_value).abs());
        }
    }
    ensure(worst <= 0.01, || format!("exact vs normal approximation |dp| up to {worst}"))?;
    within_budget(
        start.elapsed(),
        Duration::from_secs(30),
        format!("{mwu_cases} MWU, {spearman_cases} Spearman, max exact/approx |dp| {worst:.4}"),
    )
}

fn apriori_equivalence() -> Check {
    let mut rng = StdRng::seed_from_u64(6);
    for case in 0..100 {
        let ts = random_transactions(&mut rng, 500);
        for min_support in [0.05, 0.2, 0.5] {
            let got = apriori(&ts, min_support).map_err(|e| e.to_string())?;
            let want = brute_force_itemsets(&ts, min_support);
            ensure(got == want, || format!("case {case} at {min_support}: {} vs {} itemsets", got.len(), want.len()))?;
        }
    }
    Ok("100 transaction lists x 3 thresholds".into())
}

fn fixture_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

fn run_cli(args: &[&str]) -> Result<(), String> {
    let argv = std::iter::once("mapdesign").chain(args.iter().copied());
    match mapdesign::cli::run_command(argv) {
        0 => Ok(()),
        code => Err(format!("`{}` exited {code}", args.join(" "))),
    }
}

const GOLDEN_FILES: [&str; 3] = ["metrics.jsonl", "aggregate.csv", "cooccur.csv"];

fn end_to_end_golden() -> Check {
    let start = Instant::now();
    let manifest = fixture_dir().join("corpus/manifest.jsonl");
    let manifest = manifest.to_str().unwrap();
    let golden = fixture_dir().join("golden");
    let update = std::env::var_os("UPDATE_GOLDEN").is_some();
    for workers in ["1", "8"] {
        let out = tempfile::tempdir().map_err(|e| e.to_string())?;
        let out_s = out.path().to_str().unwrap();
        let common = ["--manifest", manifest, "--out", out_s, "--workers", workers];
        run_cli(&[&["analyze"][..], &common].concat())?;
        run_cli(&[&["aggregate", "--group-by", "language,year"][..], &common].concat())?;
        run_cli(&[&["cooccur", "--min-support", "0.2"][..], &common].concat())?;
        for name in GOLDEN_FILES {
            let produced = std::fs::read(out.path().join(name)).map_err(|e| format!("{name}: {e}"))?;
            let path = golden.join(name);
            if update {
                std::fs::create_dir_all(&golden).map_err(|e| e.to_string())?;
                std::fs::write(&path, &produced).map_err(|e| e.to_string())?;
                continue;
            }
            let expected = std::fs::read(&path).map_err(|e| format!("{}: {e}", path.display()))?;
            ensure(produced == expected, || format!("{name} differs from golden at {workers} worker(s)"))?;
        }
    }
    let note = if update { "golden files rewritten" } else { "3 files byte-identical at 1 and 8 workers" };
    within_budget(start.elapsed(), Duration::from_secs(10), note.into())
}

fn dataset_ranges() -> Outcome {
    let Some(path) = std::env::var_os("MAPDESIGN_DATASET") else {
        return Outcome::Skip("MAPDESIGN_DATASET not set".into());
    };
    let opts = mapdesign::pipeline::ManifestOptions::default();
    let manifest = match mapdesign::load_manifest(Path::new(&path), &opts) {
        Ok(m) => m,
        Err(e) => return Outcome::Skip(format!("cannot load dataset: {e}")),
    };
    let metrics = mapdesign::analyze_corpus(&manifest.records, &Default::default(), 8);
    let ok: Vec<_> = metrics.iter().filter(|m| !m.is_failed()).collect();
    let share = |f: &dyn Fn(&&mapdesign::MapMetrics) -> bool| ok.iter().filter(|m| f(m)).count() as f64 / ok.len().max(1) as f64;
    let low_sat = share(&|m| m.color.as_ref().is_some_and(|c| c.s_ave < 0.25));
    let compact = share(&|m| m.layout.r_map > 0.6);
    let detail = format!("S_ave<0.25: {:.1}%, r_map>0.6: {:.1}% (informative)", low_sat * 100.0, compact * 100.0);
    if low_sat >= 0.70 && compact >= 0.70 {
        Outcome::Pass(detail)
    } else {
        // Informative only: reported, never gating.
        Outcome::Skip(format!("outside expected ranges: {detail}"))
    }
}

fn main() {
    let criteria: Vec<Criterion> = vec![
        ("color_oracle", Box::new(|| wrap(color_oracle()))),
        ("entropy_bounds", Box::new(|| wrap(entropy_bounds()))),
        ("layout_fixtures_and_mirror_balance", Box::new(|| wrap(layout_fixtures()))),
        ("cca_flood_fill_equivalence", Box::new(|| wrap(cca_equivalence()))),
        ("statistics_oracles", Box::new(|| wrap(stats_oracles()))),
        ("apriori_brute_force_equivalence", Box::new(|| wrap(apriori_equivalence()))),
        ("end_to_end_golden", Box::new(|| wrap(end_to_end_golden()))),
        ("dataset_range_check", Box::new(dataset_ranges)),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(std::panic::AssertUnwindSafe(check))
            .unwrap_or_else(|_| Outcome::Fail("panicked".into()));
        let elapsed = start.elapsed();
        let (tag, detail) = match outcome {
            Outcome::Pass(d) => ("PASS", d),
            Outcome::Fail(d) => {
                failed += 1;
                ("FAIL", d)
            }
            Outcome::Skip(d) => ("SKIP", d),
        };
        println!("{tag} {name:<38} {detail} [{elapsed:.2?}]");
    }
    if failed > 0 {
        println!("{failed} acceptance criterion/criteria failed");
        std::process::exit(1);
    }
}

fn wrap(check: Check) -> Outcome {
    match check {
        Ok(d) => Outcome::Pass(d),
        Err(d) => Outcome::Fail(d),
    }
}
