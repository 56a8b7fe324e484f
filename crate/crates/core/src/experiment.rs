//! Synthetic scenarios (the two arctangent conductivities on the Tylose
//! parameter setup), SNR-based noisy data generation and the
//! uncertainty-propagation ensemble.

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::conductivity::{ConductivityKnots, ConstraintConfig};
use crate::error::{Error, Result};
use crate::gmrf::{build_precision, condition_on_first, HyperPrior};
use crate::pde::{observe, solve, PdeConfig};
use crate::sampler::{Dataset, InferenceModel};
use crate::seeds::{stream_rng, streams};
use crate::twalk::TwalkParams;

/// Tylose physical constants for the reference experiment.
pub const ALPHA: f64 = 4.217e-4;
pub const RHO: f64 = 1000.6;
pub const CP: f64 = 3780.0;
pub const HEAT_EXCHANGE: f64 = 28.0;
pub const R0: f64 = 0.0;
pub const RADIUS: f64 = 0.045;
pub const T0: f64 = 295.0;
pub const BETA: f64 = 120.0 / 61.0 * 1e6;
pub const T_FINAL: f64 = 1000.0;

/// Default discretization: 102 spatial points, 350 timesteps.
pub const NR_DEFAULT: usize = 102;
pub const NT_DEFAULT: usize = 350;

/// Fine-grid factor used for synthetic data (100x finer in time).
pub const DATA_TIME_REFINEMENT: usize = 100;

pub fn reference_pde() -> PdeConfig {
    PdeConfig {
        alpha: ALPHA,
        rho: RHO,
        cp: CP,
        h: HEAT_EXCHANGE,
        radius: RADIUS,
        t0: T0,
        te: T0,
        beta: BETA,
        t_f: T_FINAL,
        nr: NR_DEFAULT,
        nt: NT_DEFAULT,
    }
}

pub fn reference_constraints() -> ConstraintConfig {
    ConstraintConfig {
        rho: RHO,
        cp: CP,
        alpha: ALPHA,
        beta: BETA,
        radius: RADIUS,
        r0: R0,
        k0: true_k_example1(0.0),
    }
}

/// Example 1 truth: `k(t) = arctan(t/30) + 0.45`.
pub fn true_k_example1(t: f64) -> f64 {
    (t / 30.0).atan() + 0.45
}

/// Example 2 truth: `k(t) = (arctan((t−450)/150) + 3.5)/2`.
pub fn true_k_example2(t: f64) -> f64 {
    0.5 * (((t - 450.0) / 150.0).atan() + 3.5)
}

/// The true conductivity of a scenario.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TrueConductivity {
    Example1,
    Example2,
    Constant(f64),
}

impl TrueConductivity {
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            TrueConductivity::Example1 => true_k_example1(t),
            TrueConductivity::Example2 => true_k_example2(t),
            TrueConductivity::Constant(k) => *k,
        }
    }

    pub fn label(&self) -> String {
        match self {
            TrueConductivity::Example1 => "example1".into(),
            TrueConductivity::Example2 => "example2".into(),
            TrueConductivity::Constant(k) => format!("constant:{k}"),
        }
    }
}

/// A synthetic experiment: true conductivity, physics, discretization and
/// noise level.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub kind: TrueConductivity,
    pub pde: PdeConfig,
    pub constraints: ConstraintConfig,
    /// Number of free knots (default 10).
    pub n: usize,
    /// Signal-to-noise ratio mean(T)/σ₁ (default 10³).
    pub snr: f64,
}

impl Scenario {
    fn with_kind(name: &str, kind: TrueConductivity) -> Self {
        let mut constraints = reference_constraints();
        constraints.k0 = kind.eval(0.0);
        Self {
            name: name.into(),
            kind,
            pde: reference_pde(),
            constraints,
            n: 10,
            snr: 1e3,
        }
    }

    pub fn example1() -> Self {
        Self::with_kind("example1", TrueConductivity::Example1)
    }

    pub fn example2() -> Self {
        Self::with_kind("example2", TrueConductivity::Example2)
    }

    pub fn constant(k: f64) -> Self {
        Self::with_kind("constant", TrueConductivity::Constant(k))
    }

    pub fn validate(&self) -> Result<()> {
        self.pde.validate()?;
        self.constraints.validate()?;
        if self.n == 0 {
            return Err(Error::InvalidInput("n must be positive".into()));
        }
        if !(self.snr > 0.0) {
            return Err(Error::InvalidInput(format!("snr must be positive, got {}", self.snr)));
        }
        let k0 = self.kind.eval(0.0);
        if (k0 - self.constraints.k0).abs() > 1e-12 * k0.abs().max(1.0) {
            return Err(Error::InvalidInput(format!(
                "constraints.k0 = {} inconsistent with true k(0) = {k0}",
                self.constraints.k0
            )));
        }
        Ok(())
    }

    pub fn u0(&self) -> f64 {
        self.constraints.k0.ln()
    }

    /// The truth sampled on the knot grid.
    pub fn truth_knots(&self) -> Result<ConductivityKnots> {
        let kind = self.kind;
        ConductivityKnots::from_k_fn(move |t| kind.eval(t), self.n, self.pde.t_f)
    }

    /// Observation times t₁..tₙ (the knot times) at radii {0, R}.
    pub fn observation_times(&self) -> Vec<f64> {
        let tau = self.pde.t_f / self.n as f64;
        (1..=self.n).map(|j| j as f64 * tau).collect()
    }

    pub fn observation_radii(&self) -> Vec<f64> {
        vec![0.0, self.pde.radius]
    }

    /// Bundles the GMRF prior and forward model for the sampler.
    pub fn inference_model(&self) -> Result<InferenceModel> {
        self.validate()?;
        let tau = self.pde.t_f / self.n as f64;
        let a_hat = build_precision(self.n, tau);
        let gmrf = condition_on_first(&a_hat, self.u0())?;
        Ok(InferenceModel {
            u0: self.u0(),
            t_f: self.pde.t_f,
            pde: self.pde.clone(),
            constraints: self.constraints.clone(),
            gmrf,
            hyper: HyperPrior::default(),
            twalk: TwalkParams::default(),
        })
    }
}

/// Generates a noisy dataset on the fine time grid (100x more timesteps)
/// using the exact true conductivity; `σ₁ = mean(T)/SNR` over the full
/// space–time field. `noise = false` disables the noise (SNR = ∞).
pub fn generate_data<R: Rng + ?Sized>(
    scenario: &Scenario,
    noise: bool,
    rng: &mut R,
) -> Result<Dataset> {
    scenario.validate()?;
    let fine = scenario
        .pde
        .with_grid(scenario.pde.nr, scenario.pde.nt * DATA_TIME_REFINEMENT);
    let kind = scenario.kind;
    let field = solve(&move |t| kind.eval(t), &fine)?;
    let radii = scenario.observation_radii();
    let times = scenario.observation_times();
    let mut values = observe(&field, &radii, &times)?;
    let sigma1 = field.mean() / scenario.snr;
    if noise {
        let normal = Normal::new(0.0, sigma1)
            .map_err(|e| Error::Numerical(format!("noise distribution: {e}")))?;
        for v in &mut values {
            *v += normal.sample(rng);
        }
    }
    Ok(Dataset {
        radii,
        times,
        values,
        sigma1,
    })
}

/// Ensemble variance of the temperature at r = 0 and r = R under white-noise
/// perturbations of the conductivity, for one SNR.
#[derive(Debug, Clone)]
pub struct VarianceCurves {
    pub snr: f64,
    pub t_grid: Vec<f64>,
    pub var_center: Vec<f64>,
    pub var_boundary: Vec<f64>,
    /// Perturbed samples redrawn because they produced k ≤ 0.
    pub redraws: u64,
}

/// Draws `ensemble_size` perturbed conductivities per SNR
/// (`k_pert(t) = k(t) + ε`, one `ε ~ N(0, (mean(k)/SNR)²)` per member, so
/// each member is a time-constant offset of the true curve), solves each
/// and returns the time-indexed ensemble variance at both observation
/// radii. Member RNG streams split from the seed.
pub fn propagate_uncertainty(
    scenario: &Scenario,
    ensemble_size: usize,
    snr_list: &[f64],
    seed: u64,
) -> Result<Vec<VarianceCurves>> {
    scenario.validate()?;
    if ensemble_size < 1 {
        return Err(Error::InvalidInput("ensemble_size must be >= 1".into()));
    }
    let cfg = &scenario.pde;
    let nt = cfg.nt;
    let dt = cfg.dt();
    let nodes: Vec<f64> = (0..=nt).map(|m| m as f64 * dt).collect();
    let k_nodes: Vec<f64> = nodes.iter().map(|&t| scenario.kind.eval(t)).collect();
    let mean_k = k_nodes.iter().sum::<f64>() / k_nodes.len() as f64;

    let mut out = Vec::with_capacity(snr_list.len());
    for (snr_idx, &snr) in snr_list.iter().enumerate() {
        if !(snr > 0.0) {
            return Err(Error::InvalidInput(format!("snr must be positive, got {snr}")));
        }
        let normal = Normal::new(0.0, mean_k / snr)
            .map_err(|e| Error::Numerical(format!("perturbation distribution: {e}")))?;
        let mut redraws = 0u64;
        let mut fields = Vec::with_capacity(ensemble_size);
        for member in 0..ensemble_size {
            let stream = streams::ENSEMBLE_BASE + (snr_idx * ensemble_size + member) as u64;
            let mut rng = stream_rng(seed, stream);
            let k_pert = loop {
                let eps = normal.sample(&mut rng);
                let candidate: Vec<f64> = k_nodes.iter().map(|&k| k + eps).collect();
                if candidate.iter().all(|&k| k > 0.0) {
                    break candidate;
                }
                redraws += 1;
            };
            // piecewise-linear in time through the perturbed node values
            let k_fn = move |t: f64| {
                let pos = (t / dt).clamp(0.0, nt as f64);
                let j = (pos.floor() as usize).min(nt - 1);
                let theta = pos - j as f64;
                k_pert[j] + theta * (k_pert[j + 1] - k_pert[j])
            };
            fields.push(solve(&k_fn, cfg)?);
        }

        let boundary_idx = cfg.nr - 1;
        let mut var_center = Vec::with_capacity(nt + 1);
        let mut var_boundary = Vec::with_capacity(nt + 1);
        for m in 0..=nt {
            let variance = |idx: usize| {
                if ensemble_size < 2 {
                    return 0.0;
                }
                let vals: Vec<f64> = fields.iter().map(|f| f.at(m, idx)).collect();
                let mean = vals.iter().sum::<f64>() / vals.len() as f64;
                vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (vals.len() - 1) as f64
            };
            var_center.push(variance(0));
            var_boundary.push(variance(boundary_idx));
        }
        out.push(VarianceCurves {
            snr,
            t_grid: nodes.clone(),
            var_center,
            var_boundary,
            redraws,
        });
    }
    Ok(out)
}
