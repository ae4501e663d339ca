//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any criterion fails.
//!
//! Run with `cargo test --release --test acceptance`.

#![allow(clippy::approx_constant, clippy::type_complexity)]

use std::process::Command;
use std::time::Instant;

use auxinfo::linalg::sym_eigen_range;
use auxinfo::montecarlo::{
    run_concentration, run_lambda_expansion, run_positivity, run_quantile_experiment, run_variance_reduction,
    run_weight_closeness, ExperimentResult, ExperimentSpec,
};
use auxinfo::solvers::tilt_dual;
use auxinfo::{
    compute_weights, informed_weights, solve_empirical_likelihood, solve_exponential_tilt, ConstraintSet, FunctionSpec,
    InformedMeasure, Sample, SolverConfig, WeightMethod, WeightVector,
};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rand_distr::{Distribution as _, StandardNormal};

const MAX_FAILURE_RATE: f64 = 1e-3;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn failure_rates_ok(r: &ExperimentResult) -> (bool, String) {
    let worst = r.per_n.iter().map(|s| s.failure_rate).fold(0.0, f64::max);
    (worst < MAX_FAILURE_RATE, format!("max failure rate {worst:.2e}"))
}

fn median(r: &ExperimentResult, n: usize, name: &str) -> f64 {
    r.stat(n, name).map_or(f64::NAN, |s| s.median)
}

fn strictly_decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] < w[0])
}

fn within(value: f64, target: f64, rel: f64) -> bool {
    (value - target).abs() <= rel * target.abs()
}

fn criterion_1() -> Outcome {
    let sample = Sample::new(vec![-1.0, 0.0, 2.0]).unwrap();
    let cs = ConstraintSet::evaluate(&sample, &[FunctionSpec::Monomial(1)], &[0.0]).unwrap();
    let cfg = SolverConfig::default();
    let mut errors = Vec::new();

    let (q, rep) = solve_empirical_likelihood(&cs, &cfg).unwrap();
    let el_err = q
        .weights()
        .iter()
        .zip([4.0 / 9.0, 1.0 / 3.0, 2.0 / 9.0])
        .map(|(a, b)| (a - b).abs())
        .fold((rep.lambda[0] - 0.25).abs(), f64::max);
    if el_err > 1e-10 {
        errors.push(format!("EL error {el_err:e}"));
    }

    let (q, rep) = solve_exponential_tilt(&cs, &cfg).unwrap();
    let lam = -std::f64::consts::LN_2 / 3.0;
    let expo: Vec<f64> = [-1.0f64, 0.0, 2.0].iter().map(|x| (lam * x).exp()).collect();
    let total: f64 = expo.iter().sum();
    let tilt_err = q
        .weights()
        .iter()
        .zip(&expo)
        .map(|(a, e)| (a - e / total).abs())
        .fold((rep.lambda[0] - lam).abs(), f64::max);
    if tilt_err > 1e-10 {
        errors.push(format!("tilt error {tilt_err:e}"));
    }

    let p = informed_weights(&cs).unwrap();
    let cf_err = p
        .weights()
        .iter()
        .zip([3.0 / 7.0, 5.0 / 14.0, 3.0 / 14.0])
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    if cf_err > 1e-12 {
        errors.push(format!("closed-form error {cf_err:e}"));
    }
    outcome(
        errors.is_empty(),
        format!("EL {el_err:.1e}, tilt {tilt_err:.1e}, closed {cf_err:.1e} {}", errors.join("; ")),
    )
}

fn criterion_2() -> Outcome {
    let spec = ExperimentSpec::standard_normal(vec![500], 100, 2024);
    let g = &spec.g;
    let target = [0.0, 1.0];
    let cfg = SolverConfig::default();
    let (mut worst_res, mut worst_sum, mut failures) = (0.0f64, 0.0f64, 0usize);
    for k in 0..100 {
        let sample = Sample::new(spec.draw(500, k)).unwrap();
        let cs = ConstraintSet::evaluate(&sample, g, &target).unwrap();
        for method in [WeightMethod::EmpiricalLikelihood, WeightMethod::ExponentialTilt, WeightMethod::ClosedForm] {
            match compute_weights(&cs, method, &cfg) {
                Ok(w) => {
                    for j in 0..2 {
                        let s: f64 = w.weights().iter().zip(sample.values()).map(|(wi, &x)| wi * g[j].eval(x)).sum();
                        worst_res = worst_res.max((s - target[j]).abs());
                    }
                    worst_sum = worst_sum.max((w.weights().iter().sum::<f64>() - 1.0).abs());
                }
                Err(_) => failures += 1,
            }
        }
    }
    outcome(
        failures == 0 && worst_res <= 1e-9 && worst_sum <= 1e-12,
        format!("max |Σwg − Pg| {worst_res:.2e}, max |Σw − 1| {worst_sum:.2e}, failures {failures}"),
    )
}

fn criterion_3() -> Outcome {
    let grid = vec![100, 1000, 10_000];
    let r = run_lambda_expansion(&ExperimentSpec::standard_normal(grid.clone(), 2000, 3)).unwrap();
    let el: Vec<f64> = grid.iter().map(|&n| median(&r, n, "el_dev")).collect();
    let tilt: Vec<f64> = grid.iter().map(|&n| median(&r, n, "tilt_dev")).collect();
    let c00 = r.extra(10_000, "el_cov_0_0").unwrap_or(f64::NAN);
    let c11 = r.extra(10_000, "el_cov_1_1").unwrap_or(f64::NAN);
    let (fr_ok, fr) = failure_rates_ok(&r);
    let pass = strictly_decreasing(&el) && strictly_decreasing(&tilt) && within(c00, 1.0, 0.1) && within(c11, 0.5, 0.1) && fr_ok;
    outcome(
        pass,
        format!("median EL dev {el:.4?}, tilt dev {tilt:.4?}, cov diag ({c00:.4}, {c11:.4}) vs (1, 0.5), {fr}"),
    )
}

fn criterion_4() -> Outcome {
    let grid = vec![100, 1000, 10_000];
    let r = run_weight_closeness(&ExperimentSpec::standard_normal(grid.clone(), 1000, 4)).unwrap();
    let el: Vec<f64> = grid.iter().map(|&n| median(&r, n, "el_gap")).collect();
    let tilt: Vec<f64> = grid.iter().map(|&n| median(&r, n, "tilt_gap")).collect();
    let (fr_ok, fr) = failure_rates_ok(&r);
    outcome(
        strictly_decreasing(&el) && strictly_decreasing(&tilt) && fr_ok,
        format!("median n·max|q−p| EL {el:.4?}, tilt {tilt:.4?}, {fr}"),
    )
}

fn criterion_5() -> Outcome {
    let r = run_variance_reduction(&ExperimentSpec::standard_normal(vec![500], 10_000, 5)).unwrap();
    let vi = r.stat(500, "informed").unwrap().variance;
    let vc = r.stat(500, "classical").unwrap().variance;
    let (fr_ok, fr) = failure_rates_ok(&r);
    outcome(
        within(vi, 0.090845, 0.05) && within(vc, 0.25, 0.05) && fr_ok,
        format!("Var informed {vi:.6} (target 0.090845), classical {vc:.6} (target 0.25), {fr}"),
    )
}

fn criterion_6() -> Outcome {
    let r = run_quantile_experiment(&ExperimentSpec::standard_normal(vec![1000], 10_000, 6), 0.5).unwrap();
    let vi = r.stat(1000, "informed").unwrap().variance;
    let vc = r.stat(1000, "classical").unwrap().variance;
    let (fr_ok, fr) = failure_rates_ok(&r);
    outcome(
        within(vi, 0.570796, 0.1) && within(vc, 1.570796, 0.1) && fr_ok,
        format!("n·Var informed {vi:.6} (target 0.570796), classical {vc:.6} (target 1.570796), {fr}"),
    )
}

fn criterion_7() -> Outcome {
    let r = run_concentration(&ExperimentSpec::standard_normal(vec![1000], 10_000, 7), 0.5).unwrap();
    let ti = r.extra(1000, "tail_informed").unwrap();
    let tc = r.extra(1000, "tail_classical").unwrap();
    let (fr_ok, fr) = failure_rates_ok(&r);
    outcome(
        ti < tc && tc - ti > 0.15 && fr_ok,
        format!("tail informed {ti:.4}, classical {tc:.4}, gap {:.4}, {fr}", tc - ti),
    )
}

fn criterion_8() -> Outcome {
    let grid = [50, 200, 1000];
    let r = run_positivity(&ExperimentSpec::standard_normal(grid.to_vec(), 5000, 8)).unwrap();
    let freq: Vec<f64> = grid.iter().map(|&n| r.extra(n, "positive_frequency").unwrap()).collect();
    let se: Vec<f64> = grid.iter().map(|&n| r.extra(n, "standard_error").unwrap()).collect();
    let monotone = (1..grid.len()).all(|i| freq[i] >= freq[i - 1] - se[i].max(se[i - 1]));
    let (fr_ok, fr) = failure_rates_ok(&r);
    outcome(
        monotone && freq[2] >= 0.999 && fr_ok,
        format!(
            "positive frequency {freq:.4?} (SE {}), {fr}",
            se.iter().map(|v| format!("{v:.1e}")).collect::<Vec<_>>().join(", ")
        ),
    )
}

/// Random feasible problem: normal rows, target a random interior convex
/// combination of the rows.
fn random_problem(rng: &mut StdRng) -> ConstraintSet {
    let m = rng.random_range(1..=3);
    let n = rng.random_range(m + 3..=40);
    let rows: Vec<Vec<f64>> =
        (0..n).map(|_| (0..m).map(|_| StandardNormal.sample(rng)).collect::<Vec<f64>>()).collect();
    let mix: Vec<f64> = (0..n).map(|_| rng.random_range(0.5..1.5)).collect();
    let total: f64 = mix.iter().sum();
    let target: Vec<f64> =
        (0..m).map(|j| rows.iter().zip(&mix).map(|(r, w)| r[j] * w / total).sum()).collect();
    ConstraintSet::from_rows(&rows, target).unwrap()
}

fn shuffled(rng: &mut StdRng, n: usize) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        perm.swap(i, rng.random_range(0..=i));
    }
    perm
}

fn permutation_equivariance(cases: usize) -> Result<(), String> {
    let mut rng = StdRng::seed_from_u64(91);
    let cfg = SolverConfig::default();
    for case in 0..cases {
        let cs = random_problem(&mut rng);
        let perm = shuffled(&mut rng, cs.n());
        let permuted = cs.permute_rows(&perm).unwrap();
        for method in [WeightMethod::EmpiricalLikelihood, WeightMethod::ExponentialTilt, WeightMethod::ClosedForm] {
            let a = compute_weights(&cs, method, &cfg).map_err(|e| format!("case {case}: {e}"))?;
            let b = compute_weights(&permuted, method, &cfg).map_err(|e| format!("case {case}: {e}"))?;
            for (i, &pi) in perm.iter().enumerate() {
                if (b.weights()[i] - a.weights()[pi]).abs() > 1e-10 {
                    return Err(format!("case {case}: {method:?} weight {i} differs"));
                }
            }
        }
    }
    Ok(())
}

fn affine_invariance(cases: usize) -> Result<(), String> {
    let mut rng = StdRng::seed_from_u64(92);
    for case in 0..cases {
        let cs = random_problem(&mut rng);
        let m = cs.m();
        // A = D + E with |D_jj| ∈ [1, 2] and |E_ab| ≤ 0.3/m keeps A well conditioned.
        let mut a = vec![0.0; m * m];
        for r in 0..m {
            for c in 0..m {
                a[r * m + c] = if r == c {
                    rng.random_range(1.0..2.0) * if rng.random_bool(0.5) { 1.0 } else { -1.0 }
                } else {
                    rng.random_range(-0.3..0.3) / m as f64
                };
            }
        }
        let b: Vec<f64> = (0..m).map(|_| rng.random_range(-5.0..5.0)).collect();
        let map = |v: &[f64]| -> Vec<f64> { (0..m).map(|c| (0..m).map(|r| v[r] * a[r * m + c]).sum::<f64>() + b[c]).collect() };
        let rows: Vec<Vec<f64>> = cs.rows().map(map).collect();
        let moved = ConstraintSet::from_rows(&rows, map(cs.target())).unwrap();
        let p = informed_weights(&cs).map_err(|e| format!("case {case}: {e}"))?;
        let p2 = informed_weights(&moved).map_err(|e| format!("case {case}: {e}"))?;
        let err = p.weights().iter().zip(p2.weights()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        if err > 1e-10 {
            return Err(format!("case {case}: affine change moved p by {err:e}"));
        }
    }
    Ok(())
}

/// Tilt dual Hessian −Var_Q(g) is negative semidefinite; the EL dual
/// −(1/n) Σ log(1 + λᵀG_i) has Hessian (1/n) Σ G_i G_iᵀ / t_i² ⪰ 0, checked
/// by central second differences at random points inside its domain.
fn hessian_signs(cases: usize) -> Result<(), String> {
    let mut rng = StdRng::seed_from_u64(93);
    for case in 0..cases {
        let cs = random_problem(&mut rng).to_centered();
        let m = cs.m();
        let lambda: Vec<f64> = (0..m).map(|_| rng.random_range(-2.0..2.0)).collect();
        let dual = tilt_dual(&cs, &lambda);
        let (_, max_eig) = sym_eigen_range(&dual.hessian, m);
        let scale = dual.hessian.iter().map(|v| v.abs()).fold(0.0, f64::max);
        if max_eig > 1e-12 * (1.0 + scale) {
            return Err(format!("case {case}: tilt Hessian eigenvalue {max_eig:e} > 0"));
        }

        let el = |l: &[f64]| -> Option<f64> {
            let mut s = 0.0;
            for r in cs.rows() {
                let t = 1.0 + r.iter().zip(l).map(|(g, x)| g * x).sum::<f64>();
                if t <= 0.0 {
                    return None;
                }
                s -= t.ln();
            }
            Some(s / cs.n() as f64)
        };
        let scale = 0.5 / cs.rows().map(|r| r.iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max);
        let l0: Vec<f64> = (0..m).map(|_| rng.random_range(-scale..scale)).collect();
        let dir: Vec<f64> = (0..m).map(|_| StandardNormal.sample(&mut rng)).collect();
        let h = 1e-3 * scale;
        let at = |s: f64| -> Vec<f64> { l0.iter().zip(&dir).map(|(a, d)| a + s * d).collect() };
        let (Some(fp), Some(f0), Some(fm)) = (el(&at(h)), el(&l0), el(&at(-h))) else {
            return Err(format!("case {case}: EL dual left its domain"));
        };
        if fp + fm - 2.0 * f0 < -1e-12 * (1.0 + f0.abs()) {
            return Err(format!("case {case}: EL dual curvature negative"));
        }
    }
    Ok(())
}

/// Every sample of size 1..=6 over {0, 1, 2, 3} (with repeats and every
/// ordering), every α = a/b with b ≤ 12: the weighted quantile under uniform
/// weights equals the smallest sample value x with b·#{X_i ≤ x} ≥ a·n,
/// decided in integers.
fn quantile_brute_force() -> Result<usize, String> {
    let mut checked = 0;
    for size in 1..=6usize {
        for code in 0..4usize.pow(size as u32) {
            let xs: Vec<i64> = (0..size).map(|i| ((code / 4usize.pow(i as u32)) % 4) as i64).collect();
            let sample = Sample::new(xs.iter().map(|&v| v as f64).collect()).unwrap();
            let measure = InformedMeasure::new(sample, WeightVector::uniform(size)).unwrap();
            for b in 2..=12i64 {
                for a in 1..b {
                    let n = size as i64;
                    let expected = (0..4i64)
                        .filter(|v| xs.contains(v))
                        .find(|&v| b * xs.iter().filter(|&&x| x <= v).count() as i64 >= a * n)
                        .unwrap();
                    let got = measure.quantile(a as f64 / b as f64).map_err(|e| e.to_string())?;
                    if got.value != expected as f64 {
                        return Err(format!("sample {xs:?}, alpha {a}/{b}: got {} expected {expected}", got.value));
                    }
                    checked += 1;
                }
            }
        }
    }
    Ok(checked)
}

fn criterion_9() -> Outcome {
    let cases = 1000;
    let results = [
        ("permutation", permutation_equivariance(cases).map(|_| cases)),
        ("affine", affine_invariance(cases).map(|_| cases)),
        ("hessian", hessian_signs(cases).map(|_| cases)),
        ("quantile", quantile_brute_force()),
    ];
    let pass = results.iter().all(|(_, r)| r.is_ok());
    let detail = results
        .iter()
        .map(|(name, r)| match r {
            Ok(k) => format!("{name} ok ({k} cases)"),
            Err(e) => format!("{name} FAILED: {e}"),
        })
        .collect::<Vec<_>>()
        .join(", ");
    outcome(pass, detail)
}

fn criterion_10() -> Outcome {
    let exe = env!("CARGO_BIN_EXE_auxinfo");
    let runs: &[&[&str]] = &[
        &["simulate", "lambda", "--n", "50,200", "--reps", "50", "--seed", "10"],
        &["simulate", "closeness", "--n", "50,200", "--reps", "50", "--seed", "10"],
        &["simulate", "variance", "--n", "50,200", "--reps", "50", "--seed", "10"],
        &["simulate", "concentration", "--n", "50,200", "--reps", "50", "--seed", "10", "--threshold", "0.5"],
        &["simulate", "quantile", "--n", "50,200", "--reps", "50", "--seed", "10", "--alpha", "0.3"],
        &["simulate", "positivity", "--n", "10,50", "--reps", "50", "--seed", "10"],
        &["simulate", "median-path", "--n", "100", "--seed", "10"],
    ];
    let mut mismatches = Vec::new();
    for args in runs {
        let first = Command::new(exe).args(*args).env("RAYON_NUM_THREADS", "1").output().unwrap();
        let second = Command::new(exe).args(*args).env("RAYON_NUM_THREADS", "4").output().unwrap();
        if !first.status.success() || first.stdout.is_empty() || first.stdout != second.stdout {
            mismatches.push(args[1]);
        }
    }
    outcome(
        mismatches.is_empty(),
        if mismatches.is_empty() {
            format!("{} simulate commands byte-identical across reruns (1 vs 4 threads)", runs.len())
        } else {
            format!("differing output: {mismatches:?}")
        },
    )
}

fn main() {
    // Respect libtest-style filters so `cargo test <name>` skips this target.
    let args: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    if !args.is_empty() && !args.iter().any(|a| "acceptance".contains(a.as_str())) {
        return;
    }
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("analytic n=3 triple check", criterion_1),
        ("constraint recovery", criterion_2),
        ("lambda expansion", criterion_3),
        ("weight closeness", criterion_4),
        ("variance reduction", criterion_5),
        ("quantile asymptotics", criterion_6),
        ("concentration", criterion_7),
        ("positivity", criterion_8),
        ("property suites", criterion_9),
        ("determinism", criterion_10),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = run();
        let status = if o.pass { "PASS" } else { "FAIL" };
        println!("{status} criterion {}: {name}: {} [{:.1}s]", i + 1, o.detail, start.elapsed().as_secs_f64());
        if !o.pass {
            failed += 1;
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
