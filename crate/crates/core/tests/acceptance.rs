//! Acceptance suite: one test per acceptance criterion, each printing a
//! single pass/fail line. Run with `cargo test --test acceptance -- --nocapture`
//! to see the lines for passing criteria as well.

use nalgebra::{DMatrix, DVector};

use kinfer::cli::output::parse_csv;
use kinfer::conductivity::{check_h4, check_h5, in_q, ConductivityKnots};
use kinfer::diagnostics::{ks_distance, quantile};
use kinfer::experiment::{
    generate_data, propagate_uncertainty, reference_pde, Scenario, NR_DEFAULT, NT_DEFAULT,
};
use kinfer::gmrf::{build_precision, condition_on_first};
use kinfer::pde::{forward_map, solve};
use kinfer::sampler::{run_chain, ChainState, StepKind};
use kinfer::seeds::{stream_rng, streams};

fn report(num: u32, name: &str, failures: Vec<String>) {
    if failures.is_empty() {
        println!("criterion {num} ({name}): pass");
    } else {
        println!("criterion {num} ({name}): FAIL");
        for f in &failures {
            println!("  - {f}");
        }
        panic!("criterion {num} failed:\n{}", failures.join("\n"));
    }
}

/// Criterion 1: with the boundary exchange switched off the solver must
/// reproduce the uniform exponential heating T₀ e^{ct}, c = αβ/(ϱC_p), to a
/// relative error below 1e-5 at the default grid, and refining both grid
/// spacings by two must shrink the error by a factor close to four.
#[test]
fn criterion_1_direct_solver_oracle() {
    let mut failures = Vec::new();
    let mut cfg = reference_pde();
    cfg.h = 0.0;

    let err_at = |nr: usize, nt: usize| -> f64 {
        let cfg = cfg.with_grid(nr, nt);
        let field = solve(&|_| 1.0, &cfg).unwrap();
        let c = cfg.alpha * cfg.beta / (cfg.rho * cfg.cp);
        let exact = cfg.t0 * (c * cfg.t_f).exp();
        (0..nr)
            .map(|i| (field.at(nt, i) - exact).abs() / exact)
            .fold(0.0, f64::max)
    };

    let coarse = err_at(NR_DEFAULT, NT_DEFAULT);
    if coarse >= 1e-5 {
        failures.push(format!("relative error {coarse:e} at default grid, need < 1e-5"));
    }
    let fine = err_at(2 * NR_DEFAULT - 1, 2 * NT_DEFAULT);
    let ratio = coarse / fine;
    if !(3.5..=4.5).contains(&ratio) {
        failures.push(format!("error ratio {ratio} under refinement, need ~4 in [3.5, 4.5]"));
    }
    report(1, "direct solver oracle", failures);
}

/// Criterion 2: the conditioned random-field objects must satisfy the exact
/// linear-algebra identities to 1e-10 across sizes, and the full precision
/// matrix must invert to the known closed form for small sizes.
#[test]
fn criterion_2_field_identities() {
    let mut failures = Vec::new();
    let tau = 100.0;
    for n in [1usize, 2, 4, 10] {
        let a_hat = build_precision(n, tau);
        let g = condition_on_first(&a_hat, 0.7).unwrap();

        // precision of the conditional equals the trailing block of Â
        let trailing = a_hat.view((1, 1), (n, n)).into_owned();
        let d1 = (g.precision() - &trailing).abs().max();
        if d1 > 1e-10 {
            failures.push(format!("n={n}: conditional precision vs trailing block, err {d1:e}"));
        }

        // A Σ = I
        let d2 = (g.precision() * g.covariance() - DMatrix::<f64>::identity(n, n))
            .abs()
            .max();
        if d2 > 1e-10 {
            failures.push(format!("n={n}: A·Σ − I error {d2:e}"));
        }

        // Σ equals the Schur complement computed from the full inverse
        let sigma_hat = a_hat.clone().try_inverse().unwrap();
        let schur = sigma_hat.view((1, 1), (n, n)).into_owned()
            - sigma_hat.view((1, 0), (n, 1)) * sigma_hat.view((0, 1), (1, n))
                / sigma_hat[(0, 0)];
        let d3 = (g.covariance() - &schur).abs().max();
        if d3 > 1e-10 {
            failures.push(format!("n={n}: Σ vs Schur complement, err {d3:e}"));
        }

        // Cholesky factor reproduces Σ
        let d4 = (g.chol() * g.chol().transpose() - g.covariance()).abs().max();
        if d4 > 1e-10 {
            failures.push(format!("n={n}: L·Lᵀ − Σ error {d4:e}"));
        }

        // closed-form inverse of the (n+1)×(n+1) second-difference matrix
        if n <= 4 {
            let m = n + 1;
            for i in 0..m {
                for j in 0..m {
                    let (lo, hi) = (i.min(j) + 1, i.max(j) + 1);
                    let exact = tau * tau * (lo * (m + 1 - hi)) as f64 / (m + 1) as f64;
                    let got = sigma_hat[(i, j)];
                    if (got - exact).abs() > 1e-10 * exact.abs().max(1.0) {
                        failures.push(format!(
                            "n={n}: Σ̂[{i},{j}] = {got}, closed form {exact}"
                        ));
                    }
                }
            }
        }
    }
    report(2, "random-field identities", failures);
}

/// Criterion 3: on a small problem the auxiliary-variable sampler and the
/// reference sampler with the explicit normalizer must target the same
/// posterior — Kolmogorov–Smirnov distance below 0.05 on every marginal.
/// Single 10⁵-step chains leave too few effective samples for that
/// resolution (the sampler's integrated autocorrelation time is a few
/// hundred steps), so five independent 10⁵-step chain pairs on one shared
/// dataset are pooled per sampler before comparing marginals.
#[test]
fn criterion_3_exchange_matches_reference() {
    let mut failures = Vec::new();
    let mut scenario = Scenario::example2();
    scenario.n = 2;
    scenario.pde = scenario.pde.with_grid(22, 50);

    let mut data_rng = stream_rng(42, streams::DATA_NOISE);
    let dataset = generate_data(&scenario, true, &mut data_rng).unwrap();
    let model = scenario.inference_model().unwrap();

    let steps = 100_000u64;
    let burn_in = 20_000u64;
    let run = |kind: StepKind, stream: u64| {
        let init = ChainState::new(
            DVector::from_element(scenario.n, model.u0),
            1.0,
            &model,
            &dataset,
        )
        .unwrap();
        let mut rng = stream_rng(42, stream);
        run_chain(init, steps, &model, &dataset, kind, 10, burn_in, &mut rng).unwrap()
    };
    let pairs = 5u64;
    let mut exchange = Vec::new();
    let mut standard = Vec::new();
    for i in 0..pairs {
        exchange.push(run(StepKind::Exchange, streams::CHAIN + 2 * i));
        standard.push(run(StepKind::Standard, streams::CHAIN + 2 * i + 1));
    }

    type Pick = fn(&kinfer::sampler::ChainSample) -> f64;
    let pooled = |recs: &[kinfer::sampler::ChainRecord], pick: Pick| {
        recs.iter()
            .flat_map(|r| r.post_burn_in().into_iter().map(pick).collect::<Vec<f64>>())
            .collect::<Vec<f64>>()
    };
    let picks: [(&str, Pick); 3] = [
        ("u1", |s| s.u[0]),
        ("u2", |s| s.u[1]),
        ("sigma2", |s| s.sigma2),
    ];
    for (label, pick) in picks {
        let d = ks_distance(&pooled(&exchange, pick), &pooled(&standard, pick));
        if d >= 0.05 {
            failures.push(format!("KS distance {d:.4} on {label}, need < 0.05"));
        }
    }
    report(3, "exchange vs reference sampler", failures);
}

/// Criterion 4: the true conductivities of both examples satisfy the
/// constraint set at n = 10, while a large constant profile violates the
/// integral budget and a steep jump violates the growth bound.
#[test]
fn criterion_4_constraint_set() {
    let mut failures = Vec::new();
    let t_f = 1000.0;

    for scenario in [Scenario::example1(), Scenario::example2()] {
        let knots = scenario.truth_knots().unwrap();
        if !in_q(&knots, &scenario.constraints) {
            failures.push(format!("{} truth rejected by Q", scenario.name));
        }
    }

    let cfg = Scenario::example1().constraints;
    let constant = ConductivityKnots::from_k_fn(|_| 2.0, 10, t_f).unwrap();
    if check_h4(&constant, &cfg) {
        failures.push("constant k = 2 passes the integral budget, expected violation".into());
    }

    let jump = ConductivityKnots::from_k_fn(|t| if t < 450.0 { 0.45 } else { 1.8 }, 10, t_f).unwrap();
    if check_h5(&jump, &cfg) {
        failures.push("jump profile passes the growth bound, expected violation".into());
    }
    report(4, "constraint set membership", failures);
}

/// Criterion 5: full-size inference on the first example recovers the
/// truth — the true conductivity lies inside the pointwise 95% band at nine
/// or more of the ten knots, and both estimators fit the observations with
/// an RMS residual under 3σ₁ at each radius.
#[test]
fn criterion_5_inference_recovers_truth() {
    let mut failures = Vec::new();
    let scenario = Scenario::example1();
    let mut data_rng = stream_rng(42, streams::DATA_NOISE);
    let dataset = generate_data(&scenario, true, &mut data_rng).unwrap();
    let model = scenario.inference_model().unwrap();

    let init = ChainState::new(
        DVector::from_element(scenario.n, model.u0),
        1.0,
        &model,
        &dataset,
    )
    .unwrap();
    let mut rng = stream_rng(42, streams::CHAIN);
    let record = run_chain(
        init,
        20_000,
        &model,
        &dataset,
        StepKind::Exchange,
        10,
        4_000,
        &mut rng,
    )
    .unwrap();

    let kept = record.post_burn_in();
    let mut covered = 0;
    for j in 0..scenario.n {
        let ks: Vec<f64> = kept.iter().map(|s| s.u[j].exp()).collect();
        let lo = quantile(&ks, 0.025);
        let hi = quantile(&ks, 0.975);
        let truth = scenario.kind.eval((j + 1) as f64 * scenario.pde.t_f / scenario.n as f64);
        if (lo..=hi).contains(&truth) {
            covered += 1;
        }
    }
    if covered < 9 {
        failures.push(format!("truth inside the 95% band at only {covered}/10 knots, need >= 9"));
    }

    let (map_est, cm_est) = kinfer::sampler::estimators(&record).unwrap();
    for (label, est) in [("MAP", &map_est), ("CM", &cm_est)] {
        let knots = model.knots_for(&DVector::from_vec(est.u.clone())).unwrap();
        let fit = forward_map(&knots, &scenario.pde, &dataset.radii, &dataset.times).unwrap();
        for (i, &r) in dataset.radii.iter().enumerate() {
            let nt = dataset.times.len();
            let sse = (0..nt)
                .map(|j| (fit[i * nt + j] - dataset.values[i * nt + j]).powi(2))
                .sum::<f64>();
            let rms = (sse / nt as f64).sqrt();
            if rms >= 3.0 * dataset.sigma1 {
                failures.push(format!(
                    "{label} RMS residual {rms:.4} at r = {r}, need < 3σ₁ = {:.4}",
                    3.0 * dataset.sigma1
                ));
            }
        }
    }
    report(5, "posterior recovers the truth", failures);
}

/// Criterion 6: propagating observation noise through the direct problem
/// yields a centre-temperature variance that grows in time (after the
/// initial transient) and scales with the noise level — the final-variance
/// ratio between SNR 10 and SNR 1000 falls between 1e3 and 1e5.
#[test]
fn criterion_6_uncertainty_propagation() {
    let mut failures = Vec::new();
    let scenario = Scenario::example1();
    let curves = propagate_uncertainty(&scenario, 100, &[10.0, 1e3], 42).unwrap();

    for c in &curves {
        let last = *c.var_center.last().unwrap();
        let tol = last * 1e-3;
        for m in 1..c.t_grid.len() {
            if c.t_grid[m - 1] >= 50.0 && c.var_center[m] < c.var_center[m - 1] - tol {
                failures.push(format!(
                    "variance at r = 0 decreases at t = {} for SNR {}",
                    c.t_grid[m],
                    c.snr
                ));
                break;
            }
        }
    }

    let ratio = c_last(&curves[0]) / c_last(&curves[1]);
    if !(1e3..=1e5).contains(&ratio) {
        failures.push(format!("final-variance ratio {ratio:e}, need in [1e3, 1e5]"));
    }
    report(6, "uncertainty propagation", failures);
}

fn c_last(c: &kinfer::experiment::VarianceCurves) -> f64 {
    *c.var_center.last().unwrap()
}

/// Criterion 7: rerunning the pipeline binary with the same seed and
/// configuration reproduces every numeric output byte for byte.
#[test]
fn criterion_7_reproducible_outputs() {
    let mut failures = Vec::new();
    let bin = env!("CARGO_BIN_EXE_kinfer");
    let run_pipeline = |dir: &std::path::Path| {
        for cmd in [
            vec!["generate-data"],
            vec!["infer"],
        ] {
            let status = std::process::Command::new(bin)
                .args(&cmd)
                .arg("--seed")
                .arg("42")
                .arg("--steps")
                .arg("400")
                .arg("--out")
                .arg(dir)
                .status()
                .unwrap();
            assert!(status.success(), "{cmd:?} failed");
        }
    };
    let dir_a = tempfile::tempdir().unwrap();
    let dir_b = tempfile::tempdir().unwrap();
    run_pipeline(dir_a.path());
    run_pipeline(dir_b.path());
    for f in ["dataset.csv", "samples.csv", "trace.csv", "estimators.csv", "temperature_fit.csv"] {
        let a = std::fs::read(dir_a.path().join(f)).unwrap();
        let b = std::fs::read(dir_b.path().join(f)).unwrap();
        if a != b {
            failures.push(format!("{f} differs between identical reruns"));
        }
        // sanity on the second run's files being parseable tables
        if f.ends_with(".csv") {
            parse_csv(&dir_b.path().join(f)).unwrap();
        }
    }
    report(7, "byte-identical reruns", failures);
}
