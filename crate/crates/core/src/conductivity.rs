//! Piecewise-linear log-conductivity model and the uniqueness-constraint
//! set `Q`.
//!
//! The conductivity is represented as `k(t) = exp(u(t))` where `u` is a
//! piecewise-linear interpolant on a uniform grid `t_j = j τ`, `τ = t_f/n`.
//! Membership in `Q` requires the discretized growth constraints H4 and H5
//! together with the lower bound `u_i ≥ u_0`.

use crate::error::{Error, Result};

/// Threshold below which the divided difference `(e^b − e^a)/(b − a)` is
/// replaced by its second-order expansion around `a`.
const EPS_DIVIDED_DIFF: f64 = 1e-8;

/// Log-conductivity values `u_0..u_n` on the uniform time grid.
///
/// `u_0 = log k(0)` is the known atmospheric-pressure value and is never
/// mutated by inference.
#[derive(Debug, Clone, PartialEq)]
pub struct ConductivityKnots {
    u: Vec<f64>,
    n: usize,
    t_f: f64,
}

impl ConductivityKnots {
    pub fn new(u: Vec<f64>, t_f: f64) -> Result<Self> {
        if u.len() < 2 {
            return Err(Error::InvalidInput(format!(
                "knot vector needs at least 2 entries, got {}",
                u.len()
            )));
        }
        if !(t_f > 0.0) {
            return Err(Error::InvalidInput(format!("t_f must be positive, got {t_f}")));
        }
        if u.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("knot vector contains non-finite entries".into()));
        }
        let n = u.len() - 1;
        Ok(Self { u, n, t_f })
    }

    /// Samples `log k(t)` of a given conductivity at the `n+1` knot times.
    pub fn from_k_fn(k: impl Fn(f64) -> f64, n: usize, t_f: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidInput("n must be positive".into()));
        }
        let tau = t_f / n as f64;
        let u = (0..=n).map(|j| k(j as f64 * tau).ln()).collect();
        Self::new(u, t_f)
    }

    pub fn u(&self) -> &[f64] {
        &self.u
    }

    pub fn u0(&self) -> f64 {
        self.u[0]
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn t_f(&self) -> f64 {
        self.t_f
    }

    pub fn tau(&self) -> f64 {
        self.t_f / self.n as f64
    }

    pub fn knot_time(&self, j: usize) -> f64 {
        j as f64 * self.tau()
    }

    /// Knot times `t_1..t_n` (the default observation times).
    pub fn interior_times(&self) -> Vec<f64> {
        (1..=self.n).map(|j| self.knot_time(j)).collect()
    }

    /// Replaces `u_1..u_n`, keeping the known `u_0`.
    pub fn with_free_knots(&self, free: &[f64]) -> Result<Self> {
        if free.len() != self.n {
            return Err(Error::InvalidInput(format!(
                "expected {} free knots, got {}",
                self.n,
                free.len()
            )));
        }
        let mut u = Vec::with_capacity(self.n + 1);
        u.push(self.u[0]);
        u.extend_from_slice(free);
        Self::new(u, self.t_f)
    }

    /// Piecewise-linear interpolant `u(t) = Σ u_i φ_i(t)`.
    pub fn eval_u(&self, t: f64) -> Result<f64> {
        if !(0.0..=self.t_f).contains(&t) {
            return Err(Error::Domain(format!(
                "t = {t} outside [0, {}]",
                self.t_f
            )));
        }
        let tau = self.tau();
        let j = ((t / tau).floor() as usize).min(self.n - 1);
        let theta = (t - self.knot_time(j)) / tau;
        Ok(self.u[j] + theta * (self.u[j + 1] - self.u[j]))
    }

    /// `k(t) = exp(u(t))`, positive for every finite knot vector.
    pub fn eval_k(&self, t: f64) -> Result<f64> {
        Ok(self.eval_u(t)?.exp())
    }
}

/// Physical constants entering the H4/H5 constraint budgets.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintConfig {
    /// Density ϱ, kg m⁻³.
    pub rho: f64,
    /// Specific heat C_p, J kg⁻¹ K⁻¹.
    pub cp: f64,
    /// Thermal expansion coefficient α, K⁻¹.
    pub alpha: f64,
    /// Pressure increase rate β, Pa s⁻¹.
    pub beta: f64,
    /// Outer radius R, m.
    pub radius: f64,
    /// Inner observation radius r₀, m.
    pub r0: f64,
    /// Known lower bound k₀ = exp(u₀), W m⁻¹ K⁻¹.
    pub k0: f64,
}

impl ConstraintConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("rho", self.rho),
            ("cp", self.cp),
            ("alpha", self.alpha),
            ("beta", self.beta),
            ("radius", self.radius),
            ("k0", self.k0),
        ];
        for (name, v) in positive {
            if !(v > 0.0) {
                return Err(Error::InvalidInput(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.r0 >= 0.0) {
            return Err(Error::InvalidInput(format!("r0 must be >= 0, got {}", self.r0)));
        }
        if !(self.r0 < self.radius) {
            return Err(Error::InvalidInput(format!(
                "r0 = {} must be < radius = {}",
                self.r0, self.radius
            )));
        }
        Ok(())
    }

    /// Exponential growth rate c = αβ/(ϱC_p), s⁻¹.
    pub fn growth_rate(&self) -> f64 {
        self.alpha * self.beta / (self.rho * self.cp)
    }

    /// Right-hand side of the H4 budget, ϱC_p(R − r₀)²/4.
    pub fn h4_budget(&self) -> f64 {
        self.rho * self.cp * (self.radius - self.r0).powi(2) / 4.0
    }
}

/// `(e^b − e^a)/(b − a)` with the removable singularity at `b = a` filled
/// by the expansion `e^a (1 + (b−a)/2)`.
fn exp_divided_diff(a: f64, b: f64) -> f64 {
    let d = b - a;
    if d.abs() < EPS_DIVIDED_DIFF {
        a.exp() * (1.0 + d / 2.0)
    } else {
        (b.exp() - a.exp()) / d
    }
}

/// Left-hand side of the discrete H4 constraint, which equals the exact
/// integral of `exp` of the piecewise-linear interpolant.
pub fn h4_lhs(knots: &ConductivityKnots) -> f64 {
    let u = knots.u();
    let tau = knots.tau();
    (0..knots.n())
        .map(|i| tau * exp_divided_diff(u[i], u[i + 1]))
        .sum()
}

/// Discrete H4: `τ Σ (e^{u_{i+1}} − e^{u_i})/(u_{i+1} − u_i) ≤ ϱC_p(R−r₀)²/4`.
pub fn check_h4(knots: &ConductivityKnots, cfg: &ConstraintConfig) -> bool {
    h4_lhs(knots) <= cfg.h4_budget()
}

/// Growth bound `f(t) = c/(e^{ct} − 1)` with `c = αβ/(ϱC_p)`; strictly
/// decreasing and positive on `t > 0`, singular at `t = 0`.
pub fn growth_bound_f(t: f64, cfg: &ConstraintConfig) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::Domain(format!("growth bound requires t > 0, got {t}")));
    }
    let c = cfg.growth_rate();
    Ok(c / ((c * t).exp_m1()))
}

/// Discrete H5 via Simpson quadrature of the variational form:
/// `(u_{i+1} − u_{i−1})/2 ≤ (τ/3)[f((t_i+t_{i−1})/2) + f(t_i) + f((t_{i+1}+t_i)/2)]`
/// for every interior knot. Vacuously true when there are no interior knots.
pub fn check_h5(knots: &ConductivityKnots, cfg: &ConstraintConfig) -> bool {
    let u = knots.u();
    let tau = knots.tau();
    for i in 1..knots.n() {
        let ti = knots.knot_time(i);
        // All three quadrature nodes are strictly positive for i >= 1.
        let rhs = tau / 3.0
            * (growth_bound_f(ti - tau / 2.0, cfg).unwrap()
                + growth_bound_f(ti, cfg).unwrap()
                + growth_bound_f(ti + tau / 2.0, cfg).unwrap());
        if (u[i + 1] - u[i - 1]) / 2.0 > rhs {
            return false;
        }
    }
    true
}

/// Membership in the constraint set `Q`: H4, H5 and the lower bound
/// `u_i ≥ u_0` (equivalently `k_i ≥ k_0`).
pub fn in_q(knots: &ConductivityKnots, cfg: &ConstraintConfig) -> bool {
    let u0 = knots.u0();
    knots.u().iter().all(|&ui| ui >= u0) && check_h4(knots, cfg) && check_h5(knots, cfg)
}
