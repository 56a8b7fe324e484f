//! Posterior sampling with the Single Variable Exchange Metropolis–Hastings
//! algorithm driven by a t-walk proposal, plus a standard MH reference
//! implementation (with the exactly normalized prior) used as an oracle.
//!
//! The t-walk operates on the concatenated vector `(u_1..u_n, log σ₂)`;
//! proposing σ₂ in log space keeps it positive, with the Jacobian folded
//! into the acceptance quotient. Every proposal outside the constraint set
//! `Q` is rejected before any forward solve.

use nalgebra::DVector;
use rand::Rng;

use crate::conductivity::{in_q, ConductivityKnots, ConstraintConfig};
use crate::error::{Error, Result};
use crate::gmrf::{
    log_gamma_prior, log_h, normalizer_log_z0, sample_conditional, GmrfConditional, HyperPrior,
};
use crate::pde::{forward_map, PdeConfig};
use crate::twalk::{propose, TwalkParams};

/// Observation radii, times, noisy values and the noise level σ₁.
///
/// Values are radius-major: `values[i*len(times) + j] = T(r_i, t_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub radii: Vec<f64>,
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub sigma1: f64,
}

impl Dataset {
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma1 > 0.0) {
            return Err(Error::InvalidInput(format!(
                "sigma1 must be positive, got {}",
                self.sigma1
            )));
        }
        if self.values.len() != self.radii.len() * self.times.len() {
            return Err(Error::InvalidInput(format!(
                "expected {} values, got {}",
                self.radii.len() * self.times.len(),
                self.values.len()
            )));
        }
        if self.values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("dataset contains non-finite values".into()));
        }
        if self.times.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidInput("observation times must be strictly increasing".into()));
        }
        Ok(())
    }
}

/// Everything a sampling step needs: forward model, constraints, prior.
#[derive(Debug, Clone)]
pub struct InferenceModel {
    pub u0: f64,
    pub t_f: f64,
    pub pde: PdeConfig,
    pub constraints: ConstraintConfig,
    pub gmrf: GmrfConditional,
    pub hyper: HyperPrior,
    pub twalk: TwalkParams,
}

impl InferenceModel {
    pub fn n(&self) -> usize {
        self.gmrf.n()
    }

    pub fn knots_for(&self, u: &DVector<f64>) -> Result<ConductivityKnots> {
        let mut all = Vec::with_capacity(u.len() + 1);
        all.push(self.u0);
        all.extend(u.iter());
        ConductivityKnots::new(all, self.t_f)
    }

    pub fn in_q(&self, u: &DVector<f64>) -> bool {
        match self.knots_for(u) {
            Ok(knots) => in_q(&knots, &self.constraints),
            Err(_) => false,
        }
    }

    /// `−(1/2σ₁²)·Σ (T_ij − F(G(u)_j)_i)²`; the σ₁-only normalization is
    /// constant in θ and omitted.
    pub fn log_likelihood(&self, u: &DVector<f64>, dataset: &Dataset) -> Result<f64> {
        let knots = self.knots_for(u)?;
        let predicted = forward_map(&knots, &self.pde, &dataset.radii, &dataset.times)?;
        let ss: f64 = predicted
            .iter()
            .zip(&dataset.values)
            .map(|(p, d)| (d - p).powi(2))
            .sum();
        Ok(-ss / (2.0 * dataset.sigma1 * dataset.sigma1))
    }

    /// Normalized log-posterior up to θ-independent constants:
    /// likelihood + (log h − log Z₀) + log Gamma prior.
    pub fn log_posterior(&self, state: &ChainState) -> f64 {
        state.cached_loglik + state.cached_logh - normalizer_log_z0(state.sigma2, &self.gmrf)
            + log_gamma_prior(state.sigma2, &self.hyper).unwrap_or(f64::NEG_INFINITY)
    }
}

/// Sampler state: free knots `u`, hyperparameter σ₂ and cached densities.
#[derive(Debug, Clone)]
pub struct ChainState {
    pub u: DVector<f64>,
    pub sigma2: f64,
    pub cached_loglik: f64,
    pub cached_logh: f64,
}

impl ChainState {
    pub fn new(u: DVector<f64>, sigma2: f64, model: &InferenceModel, dataset: &Dataset) -> Result<Self> {
        if !(sigma2 > 0.0) {
            return Err(Error::InvalidInput(format!("sigma2 must be positive, got {sigma2}")));
        }
        let cached_loglik = model.log_likelihood(&u, dataset)?;
        let cached_logh = log_h(&u, sigma2, &model.gmrf)?;
        Ok(Self { u, sigma2, cached_loglik, cached_logh })
    }

    fn as_twalk_point(&self) -> DVector<f64> {
        let n = self.u.len();
        let mut v = DVector::zeros(n + 1);
        v.rows_mut(0, n).copy_from(&self.u);
        v[n] = self.sigma2.ln();
        v
    }
}

/// One stored sample of a chain.
#[derive(Debug, Clone)]
pub struct ChainSample {
    pub step: u64,
    pub u: Vec<f64>,
    pub sigma2: f64,
    /// Normalized log-posterior at this sample.
    pub log_posterior: f64,
}

/// Persisted per-run output: thinned samples, per-step log-posterior trace
/// and acceptance statistics.
#[derive(Debug, Clone)]
pub struct ChainRecord {
    pub samples: Vec<ChainSample>,
    pub log_posterior_trace: Vec<f64>,
    pub acceptance_count: u64,
    pub steps: u64,
    pub burn_in: u64,
    pub thinning: u64,
    /// Proposals rejected by the Q gate (no forward solve performed).
    pub q_rejections: u64,
    /// Proposals rejected because the forward solve failed.
    pub solver_failures: u64,
}

impl ChainRecord {
    pub fn acceptance_rate(&self) -> f64 {
        if self.steps == 0 {
            0.0
        } else {
            self.acceptance_count as f64 / self.steps as f64
        }
    }

    /// Stored samples past burn-in; falls back to all samples when burn-in
    /// would discard everything.
    pub fn post_burn_in(&self) -> Vec<&ChainSample> {
        let kept: Vec<&ChainSample> = self.samples.iter().filter(|s| s.step >= self.burn_in).collect();
        if kept.is_empty() {
            self.samples.iter().collect()
        } else {
            kept
        }
    }
}

/// Which normalizer handling a step uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepKind {
    /// Algorithm 2: auxiliary draw `x ~ N(μ, σ₂′²Σ)` replaces the
    /// normalizer ratio.
    Exchange,
    /// Algorithm 1 with the exact `Z₀(σ₂)`; the testing oracle.
    Standard,
}

/// The pair of states the t-walk evolves; the first leg is the recorded
/// chain.
#[derive(Debug, Clone)]
pub struct SamplerPair {
    pub legs: [ChainState; 2],
}

impl SamplerPair {
    /// Builds the companion leg by nudging the primary inside `Q` and
    /// scaling σ₂, so every coordinate of the pair differs.
    pub fn from_initial(init: ChainState, model: &InferenceModel, dataset: &Dataset) -> Result<Self> {
        if !model.in_q(&init.u) {
            return Err(Error::InvalidInput(
                "initial state is outside the constraint set Q".into(),
            ));
        }
        let n = init.u.len();
        let mut delta = 1e-3;
        for _ in 0..8 {
            let u2 = DVector::from_fn(n, |i, _| init.u[i] + delta * (i + 1) as f64 / n as f64);
            if model.in_q(&u2) {
                let companion = ChainState::new(u2, init.sigma2 * 1.1, model, dataset)?;
                return Ok(Self { legs: [init, companion] });
            }
            delta *= 0.1;
        }
        Err(Error::InvalidInput(
            "could not build a companion point inside Q near the initial state".into(),
        ))
    }

    pub fn primary(&self) -> &ChainState {
        &self.legs[0]
    }
}

/// Outcome of one MCMC step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepOutcome {
    Accepted,
    Rejected,
    /// Rejected by the Q gate before any forward solve.
    RejectedOutsideQ,
    /// Rejected because the forward solve failed on the proposal.
    RejectedSolverFailure,
}

/// Acceptance log-ratio of the standard (normalized) algorithm for a move
/// `from → to` with the given t-walk log proposal ratio. Exposed for the
/// detailed-balance oracle test.
pub fn standard_log_alpha(
    model: &InferenceModel,
    from: &ChainState,
    to: &ChainState,
    log_q_ratio: f64,
) -> f64 {
    let target = |s: &ChainState| {
        s.cached_loglik + s.cached_logh - normalizer_log_z0(s.sigma2, &model.gmrf)
            + log_gamma_prior(s.sigma2, &model.hyper).unwrap_or(f64::NEG_INFINITY)
            + s.sigma2.ln() // Jacobian of the log-σ₂ parameterization
    };
    target(to) - target(from) + log_q_ratio
}

/// One t-walk-driven step of either algorithm on the pair.
pub fn step<R: Rng + ?Sized>(
    pair: &mut SamplerPair,
    model: &InferenceModel,
    dataset: &Dataset,
    kind: StepKind,
    rng: &mut R,
) -> Result<StepOutcome> {
    let points = [pair.legs[0].as_twalk_point(), pair.legs[1].as_twalk_point()];
    let proposal = match propose(&points[0], &points[1], &model.twalk, rng) {
        Ok(p) => p,
        Err(Error::Numerical(_)) => return Ok(StepOutcome::Rejected), // degenerate pair: re-draw next step
        Err(e) => return Err(e),
    };

    let n = model.n();
    if proposal.point.iter().any(|v| !v.is_finite()) {
        return Ok(StepOutcome::Rejected);
    }
    let u_new = proposal.point.rows(0, n).into_owned();
    let sigma2_new = proposal.point[n].exp();
    if !(sigma2_new > 0.0) || !sigma2_new.is_finite() {
        return Ok(StepOutcome::Rejected);
    }

    // Q gate: no forward solve for proposals outside the support.
    if !model.in_q(&u_new) {
        return Ok(StepOutcome::RejectedOutsideQ);
    }

    let loglik_new = match model.log_likelihood(&u_new, dataset) {
        Ok(v) => v,
        Err(Error::InvalidInput(msg)) | Err(Error::Numerical(msg)) => {
            eprintln!("warning: forward solve failed on proposal, rejecting: {msg}");
            return Ok(StepOutcome::RejectedSolverFailure);
        }
        Err(e) => return Err(e),
    };

    let current = &pair.legs[proposal.which];
    let logh_new = log_h(&u_new, sigma2_new, &model.gmrf)?;

    let mut log_alpha = (loglik_new - current.cached_loglik)
        + (logh_new - current.cached_logh)
        + (log_gamma_prior(sigma2_new, &model.hyper)? - log_gamma_prior(current.sigma2, &model.hyper)?)
        + (sigma2_new.ln() - current.sigma2.ln())
        + proposal.log_q_ratio;

    match kind {
        StepKind::Exchange => {
            // Auxiliary draw at the proposed σ₂′; h(x, σ₂)/h(x, σ₂′)
            // replaces Z₀(σ₂′)/Z₀(σ₂) in expectation.
            let x = sample_conditional(sigma2_new, &model.gmrf, rng);
            log_alpha += log_h(&x, current.sigma2, &model.gmrf)? - log_h(&x, sigma2_new, &model.gmrf)?;
        }
        StepKind::Standard => {
            log_alpha += normalizer_log_z0(current.sigma2, &model.gmrf)
                - normalizer_log_z0(sigma2_new, &model.gmrf);
        }
    }

    if rng.gen::<f64>().ln() < log_alpha {
        pair.legs[proposal.which] = ChainState {
            u: u_new,
            sigma2: sigma2_new,
            cached_loglik: loglik_new,
            cached_logh: logh_new,
        };
        Ok(StepOutcome::Accepted)
    } else {
        Ok(StepOutcome::Rejected)
    }
}

/// Runs `n_steps` exchange (or reference) steps from `init`, storing the
/// initial state plus every `thinning`-th step. Fully reproducible from the
/// RNG state.
#[allow(clippy::too_many_arguments)]
pub fn run_chain<R: Rng + ?Sized>(
    init: ChainState,
    n_steps: u64,
    model: &InferenceModel,
    dataset: &Dataset,
    kind: StepKind,
    thinning: u64,
    burn_in: u64,
    rng: &mut R,
) -> Result<ChainRecord> {
    let thinning = thinning.max(1);
    let mut pair = SamplerPair::from_initial(init, model, dataset)?;
    let mut record = ChainRecord {
        samples: Vec::new(),
        log_posterior_trace: Vec::with_capacity(n_steps as usize + 1),
        acceptance_count: 0,
        steps: n_steps,
        burn_in,
        thinning,
        q_rejections: 0,
        solver_failures: 0,
    };
    let store = |record: &mut ChainRecord, step: u64, state: &ChainState, lp: f64| {
        record.samples.push(ChainSample {
            step,
            u: state.u.iter().cloned().collect(),
            sigma2: state.sigma2,
            log_posterior: lp,
        });
    };
    let mut lp = model.log_posterior(pair.primary());
    record.log_posterior_trace.push(lp);
    store(&mut record, 0, pair.primary(), lp);

    for m in 1..=n_steps {
        match step(&mut pair, model, dataset, kind, rng)? {
            StepOutcome::Accepted => record.acceptance_count += 1,
            StepOutcome::RejectedOutsideQ => record.q_rejections += 1,
            StepOutcome::RejectedSolverFailure => record.solver_failures += 1,
            StepOutcome::Rejected => {}
        }
        lp = model.log_posterior(pair.primary());
        record.log_posterior_trace.push(lp);
        if m % thinning == 0 {
            store(&mut record, m, pair.primary(), lp);
        }
    }
    Ok(record)
}

/// θ_MAP (stored sample with maximal normalized log-posterior) and θ_CM
/// (componentwise mean of post-burn-in samples).
pub fn estimators(record: &ChainRecord) -> Result<(ChainSample, ChainSample)> {
    if record.samples.is_empty() {
        return Err(Error::InvalidInput("empty chain record".into()));
    }
    let map = record
        .samples
        .iter()
        .max_by(|a, b| a.log_posterior.partial_cmp(&b.log_posterior).unwrap())
        .unwrap()
        .clone();

    let kept = record.post_burn_in();
    let n = kept[0].u.len();
    let m = kept.len() as f64;
    let mut u_mean = vec![0.0; n];
    let mut sigma2_mean = 0.0;
    for s in &kept {
        for (acc, v) in u_mean.iter_mut().zip(&s.u) {
            *acc += v;
        }
        sigma2_mean += s.sigma2;
    }
    for v in &mut u_mean {
        *v /= m;
    }
    let cm = ChainSample {
        step: 0,
        u: u_mean,
        sigma2: sigma2_mean / m,
        log_posterior: f64::NAN,
    };
    Ok((map, cm))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiment::{generate_data, Scenario};
    use crate::seeds::stream_rng;
    use approx::assert_relative_eq;

    fn small_model_and_data(n: usize, nr: usize, nt: usize) -> (InferenceModel, Dataset) {
        let mut scenario = Scenario::example1();
        scenario.n = n;
        scenario.pde.nr = nr;
        scenario.pde.nt = nt;
        let mut rng = stream_rng(404, 0);
        let dataset = generate_data(&scenario, true, &mut rng).unwrap();
        (scenario.inference_model().unwrap(), dataset)
    }

    #[test]
    fn likelihood_zero_for_self_generated_data() {
        let (model, mut dataset) = small_model_and_data(4, 22, 40);
        let u = DVector::from_vec(vec![model.u0 + 0.1; 4]);
        let knots = model.knots_for(&u).unwrap();
        dataset.values = forward_map(&knots, &model.pde, &dataset.radii, &dataset.times).unwrap();
        let ll = model.log_likelihood(&u, &dataset).unwrap();
        assert_relative_eq!(ll, 0.0, epsilon = 1e-10);
    }

    #[test]
    fn likelihood_quadratic_in_residuals() {
        let (model, dataset) = small_model_and_data(4, 22, 40);
        let u = DVector::from_vec(vec![model.u0 + 0.05; 4]);
        let knots = model.knots_for(&u).unwrap();
        let predicted = forward_map(&knots, &model.pde, &dataset.radii, &dataset.times).unwrap();

        let with_residual = |scale: f64| {
            let mut d = dataset.clone();
            d.values = predicted.iter().map(|p| p + scale * 0.5).collect();
            model.log_likelihood(&u, &d).unwrap()
        };
        let l1 = with_residual(1.0);
        let l2 = with_residual(2.0);
        assert_relative_eq!(l2, 4.0 * l1, max_relative = 1e-10);
    }

    #[test]
    fn likelihood_chi_square_band_at_truth() {
        // At the truth the standardized residual sum is ~χ²(2n), so the
        // log-likelihood concentrates near −n (plus a small discretization
        // bias), within ±3·√(2n)/2 on average.
        let scenario = Scenario::example1();
        let model = scenario.inference_model().unwrap();
        let truth = scenario.truth_knots().unwrap();

        // one fine-grid dataset per seed; predictions are fixed, only noise varies
        let mut rng = stream_rng(777, 0);
        let clean = generate_data(&scenario, false, &mut rng).unwrap();
        let predicted = forward_map(&truth, &model.pde, &clean.radii, &clean.times).unwrap();
        let n = scenario.n as f64;

        use rand_distr::{Distribution, Normal};
        let normal = Normal::new(0.0, clean.sigma1).unwrap();
        let mut total = 0.0;
        let seeds = 100;
        for s in 0..seeds {
            let mut nrng = stream_rng(900 + s, 1);
            let mut d = clean.clone();
            d.values = d.values.iter().map(|v| v + normal.sample(&mut nrng)).collect();
            let ss: f64 = predicted
                .iter()
                .zip(&d.values)
                .map(|(p, v)| (v - p).powi(2))
                .sum();
            total += -ss / (2.0 * d.sigma1 * d.sigma1);
        }
        let mean_ll = total / seeds as f64;
        let band = 3.0 * (2.0 * n).sqrt() / 2.0;
        assert!(
            (mean_ll + n).abs() < band,
            "mean loglik {mean_ll} outside −{n} ± {band}"
        );
    }

    #[test]
    fn q_gate_short_circuits() {
        let (model, dataset) = small_model_and_data(4, 22, 40);
        // force a proposal far outside Q by breaking the lower bound
        let bad = DVector::from_vec(vec![model.u0 - 5.0; 4]);
        assert!(!model.in_q(&bad));
        // log_likelihood would still run; the gate in `step` must reject
        // without it. Exercise via a crafted pair where the only reachable
        // proposals are outside Q is brittle; instead assert the gate's
        // bookkeeping over a short chain.
        let init = ChainState::new(
            DVector::from_vec(vec![model.u0; 4]),
            1.0,
            &model,
            &dataset,
        )
        .unwrap();
        let mut rng = stream_rng(31, 2);
        let record = run_chain(init, 200, &model, &dataset, StepKind::Exchange, 1, 0, &mut rng).unwrap();
        assert!(record.q_rejections > 0, "expected some Q-gated rejections");
        assert_eq!(record.solver_failures, 0);
    }

    #[test]
    fn chain_stays_inside_q() {
        let (model, dataset) = small_model_and_data(3, 22, 40);
        let init = ChainState::new(DVector::from_vec(vec![model.u0; 3]), 1.0, &model, &dataset).unwrap();
        let mut rng = stream_rng(32, 2);
        let record = run_chain(init, 300, &model, &dataset, StepKind::Exchange, 1, 0, &mut rng).unwrap();
        for s in &record.samples {
            assert!(model.in_q(&DVector::from_vec(s.u.clone())));
        }
    }

    #[test]
    fn detailed_balance_identity() {
        let (model, dataset) = small_model_and_data(3, 22, 40);
        let a = ChainState::new(DVector::from_vec(vec![model.u0 + 0.01; 3]), 0.9, &model, &dataset).unwrap();
        let b = ChainState::new(DVector::from_vec(vec![model.u0 + 0.3; 3]), 1.4, &model, &dataset).unwrap();
        let log_q = 0.123; // arbitrary asymmetric proposal ratio
        let fwd = standard_log_alpha(&model, &a, &b, log_q);
        let rev = standard_log_alpha(&model, &b, &a, -log_q);
        // α-ratios satisfy log α(a→b) − log α(b→a) = log π(b) − log π(a) + log q terms
        assert_relative_eq!(fwd, -rev, epsilon = 1e-12);
    }

    #[test]
    fn identical_proposal_always_accepted() {
        let (model, dataset) = small_model_and_data(3, 22, 40);
        let s = ChainState::new(DVector::from_vec(vec![model.u0 + 0.05; 3]), 1.1, &model, &dataset).unwrap();
        assert_eq!(standard_log_alpha(&model, &s, &s.clone(), 0.0), 0.0);
    }

    #[test]
    fn zero_step_chain_contains_only_initial_state() {
        let (model, dataset) = small_model_and_data(3, 22, 40);
        let init = ChainState::new(DVector::from_vec(vec![model.u0; 3]), 1.0, &model, &dataset).unwrap();
        let mut rng = stream_rng(33, 2);
        let record = run_chain(init.clone(), 0, &model, &dataset, StepKind::Exchange, 10, 0, &mut rng).unwrap();
        assert_eq!(record.samples.len(), 1);
        assert_eq!(record.samples[0].step, 0);
        assert_eq!(record.samples[0].sigma2, init.sigma2);
        assert_eq!(record.log_posterior_trace.len(), 1);
    }

    #[test]
    fn equal_seeds_give_identical_chains() {
        let (model, dataset) = small_model_and_data(3, 22, 40);
        let run = || {
            let init =
                ChainState::new(DVector::from_vec(vec![model.u0; 3]), 1.0, &model, &dataset).unwrap();
            let mut rng = stream_rng(55, 2);
            run_chain(init, 150, &model, &dataset, StepKind::Exchange, 5, 30, &mut rng).unwrap()
        };
        let a = run();
        let b = run();
        assert_eq!(a.acceptance_count, b.acceptance_count);
        assert_eq!(a.log_posterior_trace, b.log_posterior_trace);
        for (x, y) in a.samples.iter().zip(&b.samples) {
            assert_eq!(x.u, y.u);
            assert_eq!(x.sigma2, y.sigma2);
        }
    }

    #[test]
    fn init_outside_q_is_input_error() {
        let (model, dataset) = small_model_and_data(3, 22, 40);
        let loglik = 0.0;
        let bad = ChainState {
            u: DVector::from_vec(vec![model.u0 - 1.0; 3]),
            sigma2: 1.0,
            cached_loglik: loglik,
            cached_logh: 0.0,
        };
        let mut rng = stream_rng(56, 2);
        let r = run_chain(bad, 10, &model, &dataset, StepKind::Exchange, 1, 0, &mut rng);
        assert!(matches!(r, Err(Error::InvalidInput(_))));
    }

    #[test]
    fn estimators_single_and_symmetric_records() {
        let sample = |u: Vec<f64>, s2: f64, lp: f64| ChainSample {
            step: 0,
            u,
            sigma2: s2,
            log_posterior: lp,
        };
        let single = ChainRecord {
            samples: vec![sample(vec![1.0, 2.0], 0.5, -3.0)],
            log_posterior_trace: vec![-3.0],
            acceptance_count: 0,
            steps: 0,
            burn_in: 0,
            thinning: 1,
            q_rejections: 0,
            solver_failures: 0,
        };
        let (map, cm) = estimators(&single).unwrap();
        assert_eq!(map.u, vec![1.0, 2.0]);
        assert_eq!(cm.u, vec![1.0, 2.0]);
        assert_eq!(cm.sigma2, 0.5);

        let two = ChainRecord {
            samples: vec![sample(vec![0.0], 1.0, -1.0), sample(vec![2.0], 3.0, -2.0)],
            ..single.clone()
        };
        let (map2, cm2) = estimators(&two).unwrap();
        assert_eq!(map2.u, vec![0.0]); // higher log-posterior
        assert_eq!(cm2.u, vec![1.0]); // midpoint
        assert_eq!(cm2.sigma2, 2.0);
    }

    #[test]
    fn estimators_reject_empty_record() {
        let empty = ChainRecord {
            samples: vec![],
            log_posterior_trace: vec![],
            acceptance_count: 0,
            steps: 0,
            burn_in: 0,
            thinning: 1,
            q_rejections: 0,
            solver_failures: 0,
        };
        assert!(matches!(estimators(&empty), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn log_space_safety_for_huge_residuals() {
        let (model, mut dataset) = small_model_and_data(3, 22, 40);
        // residuals of 10⁶σ₁ must not overflow the acceptance computation
        dataset.values = dataset.values.iter().map(|v| v + 1e6 * dataset.sigma1).collect();
        let init = ChainState::new(DVector::from_vec(vec![model.u0; 3]), 1.0, &model, &dataset).unwrap();
        assert!(init.cached_loglik.is_finite());
        let mut rng = stream_rng(57, 2);
        let record = run_chain(init, 50, &model, &dataset, StepKind::Exchange, 1, 0, &mut rng).unwrap();
        for lp in &record.log_posterior_trace {
            assert!(lp.is_finite());
        }
    }
}
