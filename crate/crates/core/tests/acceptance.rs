//! Acceptance suite: one PASS/FAIL line per criterion, tolerances pinned below.

use std::fs;
use std::time::Instant;

use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use weighted_tv::bounds::{choose_l, theta, Branch};
use weighted_tv::distributions::{AtomSet, GaussianMixture, GridSpec};
use weighted_tv::harness::{emit_report, run_sweep, Format, Scenario, SweepReport, PRESETS};
use weighted_tv::spectral::{char_fn_grid, poly_envelope_char, poly_envelope_density, weighted_diff_direct, weighted_diff_reconstruct, PolyEnvelopeTable};
use weighted_tv::transport::{cost_matrix, ot_entropic, ot_exact, tv_mass, wasserstein_1d, RegSchedule, RHO_TOLERANCE};

const W2_ABS_TOL: f64 = 1e-6;
const TV_ABS_TOL: f64 = 1e-4;
const OT_ORACLE_TOL: f64 = 1e-9;
const ENTROPIC_REL_TOL: f64 = 0.01;
const RECONSTRUCT_SUP_TOL: f64 = 1e-3;
const ENVELOPE_REFINE_TOL: f64 = 0.05;
const POLYLOG_REL_TOL: f64 = 0.01;
const SLOPE_RANGE: (f64, f64) = (0.95, 1.05);
const SYMMETRY_TOL: f64 = 1e-10;
const TRIANGLE_SLACK: f64 = -1e-9;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn normal(m: f64, var: f64) -> GaussianMixture<f64> {
    GaussianMixture::normal(m, var).unwrap()
}

fn random_atoms(rng: &mut ChaCha8Rng, n: usize, d: usize) -> AtomSet<f64> {
    let raw: Vec<f64> = (0..n).map(|_| rng.random_range(0.1..1.0)).collect();
    let total: f64 = raw.iter().sum();
    let atoms = raw
        .iter()
        .map(|w| ((0..d).map(|_| rng.random_range(-1.0..1.0)).collect(), w / total))
        .collect();
    AtomSet::new(d, atoms).unwrap()
}

/// Minimum cost over every basic feasible plan of an `n × m` transport
/// problem: bases are the spanning trees of the bipartite support graph, whose
/// flows follow from peeling leaves.
fn brute_force_cost(a: &[f64], b: &[f64], cost: &[f64]) -> f64 {
    let (n, m) = (a.len(), b.len());
    let cells = n * m;
    let basis = n + m - 1;
    let mut best = f64::INFINITY;
    for mask in 0u32..(1 << cells) {
        if mask.count_ones() as usize != basis {
            continue;
        }
        let mut open: Vec<usize> = (0..cells).filter(|c| mask & (1 << c) != 0).collect();
        let mut row_left = a.to_vec();
        let mut col_left = b.to_vec();
        let mut total = 0.0;
        let mut feasible = true;
        while !open.is_empty() {
            let degree = |node: usize, open: &[usize]| {
                open.iter().filter(|&&c| if node < n { c / m == node } else { c % m == node - n }).count()
            };
            let Some(leaf) = (0..n + m).find(|&v| degree(v, &open) == 1) else {
                feasible = false;
                break;
            };
            let pos = open
                .iter()
                .position(|&c| if leaf < n { c / m == leaf } else { c % m == leaf - n })
                .unwrap();
            let c = open.swap_remove(pos);
            let (i, j) = (c / m, c % m);
            let flow = if leaf < n { row_left[i] } else { col_left[j] };
            if flow < -1e-12 {
                feasible = false;
                break;
            }
            row_left[i] -= flow;
            col_left[j] -= flow;
            total += flow * cost[c];
        }
        let balanced = row_left.iter().chain(&col_left).all(|r| r.abs() < 1e-12);
        if feasible && balanced {
            best = best.min(total);
        }
    }
    best
}

fn closed_form_w2() -> Outcome {
    let base = normal(0.0, 1.0);
    let mut worst: f64 = 0.0;
    for h in [0.5, 0.1, 0.01] {
        let w = wasserstein_1d(&base, &normal(h, 1.0), 2.0).unwrap().value;
        worst = worst.max((w - h).abs());
    }
    outcome(worst <= W2_ABS_TOL, format!("max |W_2 - h| = {worst:.2e} (tol {W2_ABS_TOL:e})"))
}

fn closed_form_tv() -> Outcome {
    let phi_half = 0.5 * (1.0 + libm::erf(0.5 / 2f64.sqrt()));
    let exact = 2.0 * (2.0 * phi_half - 1.0);
    let tv = tv_mass(&normal(0.0, 1.0), &normal(1.0, 1.0), RHO_TOLERANCE).unwrap().value;
    let err = (tv - exact).abs();
    outcome(err <= TV_ABS_TOL, format!("tv = {tv:.7}, oracle {exact:.7}, |err| = {err:.2e} (tol {TV_ABS_TOL:e})"))
}

fn ot_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for d in [1, 2] {
        for q in [1.0, 2.0] {
            for _ in 0..25 {
                let (a, b) = (random_atoms(&mut rng, 4, d), random_atoms(&mut rng, 4, d));
                let cost = cost_matrix(&a, &b, q).unwrap();
                let oracle = brute_force_cost(&a.masses(), &b.masses(), &cost).powf(1.0 / q);
                let exact = ot_exact(&a, &b, q).unwrap().0.value;
                worst = worst.max((exact - oracle).abs());
                count += 1;
            }
        }
    }
    outcome(worst <= OT_ORACLE_TOL, format!("{count} pairs, max |exact - brute force| = {worst:.2e} (tol {OT_ORACLE_TOL:e})"))
}

fn entropic_accuracy() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let schedule = RegSchedule::default();
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let (a, b) = (random_atoms(&mut rng, 64, 2), random_atoms(&mut rng, 64, 2));
        let exact = ot_exact(&a, &b, 2.0).unwrap().0.value;
        let entropic = ot_entropic(&a, &b, 2.0, &schedule).unwrap().0.value;
        worst = worst.max((entropic - exact).abs() / exact);
    }
    outcome(worst <= ENTROPIC_REL_TOL, format!("20 pairs of 64 atoms, max relative gap {worst:.2e} (tol {ENTROPIC_REL_TOL})"))
}

fn fourier_reconstruction() -> Outcome {
    let (a, b) = (normal(0.0, 1.0), normal(0.5, 1.0));
    let region = a.sigma_box(12.0).union(&b.sigma_box(12.0)).unwrap();
    let spec = GridSpec::cube(&region, 4096).unwrap();
    let spectral = weighted_diff_reconstruct(&a, &b, &spec, 2).unwrap();
    let direct = weighted_diff_direct(&a, &b, &spec, 2).unwrap();
    let err = spectral.sup_distance(&direct.values);
    outcome(err <= RECONSTRUCT_SUP_TOL, format!("sup error {err:.2e} on n = 4096 (tol {RECONSTRUCT_SUP_TOL:e})"))
}

fn table_gap(coarse: &PolyEnvelopeTable<f64>, fine: &PolyEnvelopeTable<f64>) -> Option<f64> {
    let mut worst: f64 = 0.0;
    for e in &coarse.entries {
        let f = fine.get(e.k, e.l)?;
        if !e.c.is_finite() || !f.is_finite() {
            return None;
        }
        worst = worst.max((e.c - f).abs() / f.abs().max(f64::MIN_POSITIVE));
    }
    Some(worst)
}

fn envelope_consistency() -> Outcome {
    let laws = [
        normal(0.0, 1.0),
        normal(1.0, 4.0),
        GaussianMixture::mixture_1d(&[(0.5, -2.0, 1.0), (0.5, 2.0, 1.0)]).unwrap(),
        GaussianMixture::mixture_1d(&[(0.3, -1.0, 0.5), (0.7, 1.5, 2.0)]).unwrap(),
        GaussianMixture::mixture_1d(&[(0.2, 0.0, 0.25), (0.5, 1.0, 1.0), (0.3, -3.0, 1.5)]).unwrap(),
    ];
    let mut worst: f64 = 0.0;
    for law in &laws {
        let spec = GridSpec::from_region(&law.sigma_box(10.0), vec![1024]).unwrap();
        let mut gaps = Vec::new();
        let coarse = law.discretize(&spec).unwrap();
        let fine = law.discretize(&spec.refined()).unwrap();
        let pairs = [
            (poly_envelope_density(&coarse, 4, 6), poly_envelope_density(&fine, 4, 6)),
            (poly_envelope_char(&char_fn_grid(&coarse), 4, 6), poly_envelope_char(&char_fn_grid(&fine), 4, 6)),
        ];
        for (c, f) in pairs {
            match (c, f) {
                (Ok(c), Ok(f)) => match table_gap(&c, &f) {
                    Some(g) => gaps.push(g),
                    None => return outcome(false, "non-finite or missing envelope entry"),
                },
                (Err(e), _) | (_, Err(e)) => return outcome(false, format!("envelope failed: {e}")),
            }
        }
        worst = worst.max(gaps.into_iter().fold(0.0, f64::max));
    }
    outcome(worst <= ENVELOPE_REFINE_TOL, format!("5 laws, k <= 4, l <= 6, max refinement change {worst:.2e} (tol {ENVELOPE_REFINE_TOL})"))
}

fn exponent_grid() -> Outcome {
    let mut failures = Vec::new();
    let mut checked = 0;
    for k in 1..20i64 {
        let eps = Ratio::new(k, 20);
        for p in [2usize, 4, 6] {
            for d in 1..=3usize {
                let l = choose_l(eps, p, d).unwrap();
                let th: Ratio<i64> = theta(l, p, d).unwrap();
                checked += 1;
                if th < Ratio::from_integer(1) - eps {
                    failures.push(format!("ε={eps}, p={p}, d={d}, l={l}"));
                }
            }
        }
    }
    outcome(failures.is_empty(), format!("{checked} exact checks, failures: {failures:?}"))
}

fn soundness_lemma1(reports: &[SweepReport<f64>]) -> Outcome {
    let mut bad = Vec::new();
    for r in reports {
        if !r.failures.is_empty() || r.rows.len() != 5 {
            bad.push(format!("{}: {} rows, {} failures", r.scenario, r.rows.len(), r.failures.len()));
        }
        for row in &r.rows {
            if !(row.ok1 && row.okp) {
                bad.push(format!("{} h={:e}", r.scenario, row.h));
            }
        }
    }
    outcome(bad.is_empty(), format!("{} sweeps x 5 rows, violations: {bad:?}", reports.len()))
}

fn soundness_lemma2(reports: &[SweepReport<f64>]) -> Outcome {
    let mut bad = Vec::new();
    let mut spreads = Vec::new();
    for r in reports {
        if let Some(row) = r.rows.iter().find(|row| !row.ok2) {
            bad.push(format!("{} h={:e} violated", r.scenario, row.h));
        }
        let rate: Vec<(f64, f64)> = r
            .rows
            .iter()
            .filter(|row| row.branch2 == Branch::Rate)
            .map(|row| (row.a, row.rhs2 / (row.a * row.a.ln().abs().powi(3))))
            .collect();
        let a_max = rate.iter().map(|x| x.0).fold(0.0, f64::max);
        let a_min = rate.iter().map(|x| x.0).fold(f64::INFINITY, f64::min);
        if rate.len() < 3 || a_max / a_min < 100.0 {
            bad.push(format!("{}: only {} rate rows", r.scenario, rate.len()));
            continue;
        }
        let lo = rate.iter().map(|x| x.1).fold(f64::INFINITY, f64::min);
        let hi = rate.iter().map(|x| x.1).fold(0.0, f64::max);
        let spread = hi / lo - 1.0;
        spreads.push(spread);
        if spread > POLYLOG_REL_TOL {
            bad.push(format!("{}: rhs/(A|ln A|^3) spread {spread:.2e}", r.scenario));
        }
    }
    let worst = spreads.into_iter().fold(0.0, f64::max);
    outcome(bad.is_empty(), format!("max spread of rhs/(A|ln A|^3) {worst:.2e} (tol {POLYLOG_REL_TOL}), issues: {bad:?}"))
}

fn rate_recovery(reports: &[SweepReport<f64>]) -> Outcome {
    let Some(translate) = reports.iter().find(|r| r.scenario == "gaussian-translate") else {
        return outcome(false, "translate sweep missing");
    };
    let Some(fit) = translate.fit else {
        return outcome(false, "no rate fit");
    };
    let pass = fit.slope >= SLOPE_RANGE.0 && fit.slope <= SLOPE_RANGE.1 && fit.slope >= 0.9;
    outcome(pass, format!("slope {:.4} ± {:.4} over {} rows, range {SLOPE_RANGE:?}", fit.slope, fit.stderr, fit.points))
}

fn metric_axioms() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut asym: f64 = 0.0;
    let mut slack = f64::INFINITY;
    for trial in 0..1000 {
        let q = if trial % 2 == 0 { 1.0 } else { 2.0 };
        let d = 1 + trial % 3;
        let (a, b, c) = (random_atoms(&mut rng, 16, d), random_atoms(&mut rng, 16, d), random_atoms(&mut rng, 16, d));
        let w = |x: &AtomSet<f64>, y: &AtomSet<f64>| ot_exact(x, y, q).unwrap().0.value;
        let (ab, bc, ac) = (w(&a, &b), w(&b, &c), w(&a, &c));
        asym = asym.max((ab - w(&b, &a)).abs());
        slack = slack.min(ab + bc - ac);
    }
    let pass = asym <= SYMMETRY_TOL && slack >= TRIANGLE_SLACK;
    outcome(pass, format!("1000 trials, max asymmetry {asym:.2e} (tol {SYMMETRY_TOL:e}), min triangle slack {slack:.2e} (>= {TRIANGLE_SLACK:e})"))
}

fn reproducibility() -> Outcome {
    let mut diffs = Vec::new();
    for name in PRESETS {
        let sc = Scenario::<f64>::preset(name).unwrap();
        let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
        for dir in &dirs {
            emit_report(&run_sweep(&sc).unwrap(), dir.path(), &[Format::Csv, Format::Json]).unwrap();
        }
        for ext in ["csv", "json"] {
            let read = |k: usize| fs::read(dirs[k].path().join(format!("{name}.{ext}"))).unwrap();
            if read(0) != read(1) {
                diffs.push(format!("{name}.{ext}"));
            }
        }
    }
    outcome(diffs.is_empty(), format!("4 scenarios run twice, differing files: {diffs:?}"))
}

fn run(results: &mut Vec<bool>, id: usize, name: &str, limit_secs: Option<f64>, f: impl FnOnce() -> Outcome) {
    let start = Instant::now();
    let out = f();
    let secs = start.elapsed().as_secs_f64();
    let in_time = limit_secs.is_none_or(|l| secs < l);
    let pass = out.pass && in_time;
    let limit = limit_secs.map(|l| format!(", limit {l} s")).unwrap_or_default();
    println!(
        "[{}] {id:>2}. {name}: {} ({secs:.2} s{limit})",
        if pass { "PASS" } else { "FAIL" },
        out.detail
    );
    results.push(pass);
}

fn main() {
    let mut results = Vec::new();
    run(&mut results, 1, "closed-form W_2 of translated normals", Some(1.0), closed_form_w2);
    run(&mut results, 2, "closed-form total variation", None, closed_form_tv);
    run(&mut results, 3, "exact OT against brute-force bases", Some(10.0), ot_oracle);
    run(&mut results, 4, "entropic OT accuracy", Some(30.0), entropic_accuracy);
    run(&mut results, 5, "Fourier reconstruction of the weighted difference", Some(2.0), fourier_reconstruction);
    run(&mut results, 6, "density- and frequency-side envelopes under refinement", None, envelope_consistency);
    run(&mut results, 7, "exponent formula over the (ε, p, d) grid", None, exponent_grid);

    let start = Instant::now();
    let reports: Vec<SweepReport<f64>> =
        PRESETS.iter().map(|name| run_sweep(&Scenario::preset(name).unwrap()).unwrap()).collect();
    let sweep_secs = start.elapsed().as_secs_f64();
    run(&mut results, 8, "polynomial-regime and pointwise certificate soundness", Some(120.0 - sweep_secs), || {
        soundness_lemma1(&reports)
    });
    run(&mut results, 9, "exponential-regime soundness and polylog shape", None, || soundness_lemma2(&reports));
    run(&mut results, 10, "rate recovery on the translate family", None, || rate_recovery(&reports));
    run(&mut results, 11, "metric axioms of exact W_q", None, metric_axioms);
    run(&mut results, 12, "byte-identical sweep reports", None, reproducibility);

    let passed = results.iter().filter(|p| **p).count();
    println!("acceptance: {passed}/{} criteria passed (sweeps took {sweep_secs:.2} s)", results.len());
    assert_eq!(passed, results.len(), "acceptance criteria failed");
}
