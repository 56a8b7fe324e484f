//! Crank–Nicolson solver for the radial heat-diffusion problem
//!
//! ```text
//! ϱC_p ∂T/∂t − k(t)(T_rr + T_r/r) = αβ T      in (0,R)×(0,t_f)
//! k(t) ∂T/∂r = h (Tᵉ − T)                      at r = R
//! ∂T/∂r = 0 (symmetry, ΔT → 2T_rr)             at r = 0
//! T = T₀                                       at t = 0
//! ```
//!
//! Space is discretized with second-order centered differences on a uniform
//! grid including both endpoints; the polar origin uses the reflected ghost
//! node (center coefficient `4(T₁−T₀)/Δr²`) and the Robin boundary a
//! second-order ghost-node elimination. The time-dependent coefficient is
//! averaged over the step endpoints, keeping the scheme second order in both
//! variables. Each step solves one tridiagonal system.

use crate::error::{Error, Result};

/// Physical constants plus discretization of the direct problem.
#[derive(Debug, Clone, PartialEq)]
pub struct PdeConfig {
    /// Thermal expansion coefficient α, K⁻¹.
    pub alpha: f64,
    /// Density ϱ, kg m⁻³.
    pub rho: f64,
    /// Specific heat C_p, J kg⁻¹ K⁻¹.
    pub cp: f64,
    /// Heat exchange coefficient h, W m⁻² K⁻¹.
    pub h: f64,
    /// Outer radius R, m.
    pub radius: f64,
    /// Initial temperature T₀, K.
    pub t0: f64,
    /// External temperature Tᵉ, K (constant, equals T₀ under H1).
    pub te: f64,
    /// Pressure increase rate β, Pa s⁻¹.
    pub beta: f64,
    /// Final time t_f, s.
    pub t_f: f64,
    /// Spatial grid points including r = 0 and r = R.
    pub nr: usize,
    /// Number of timesteps.
    pub nt: usize,
}

impl PdeConfig {
    pub fn validate(&self) -> Result<()> {
        if self.nr < 3 {
            return Err(Error::InvalidInput(format!("nr must be >= 3, got {}", self.nr)));
        }
        if self.nt < 1 {
            return Err(Error::InvalidInput(format!("nt must be >= 1, got {}", self.nt)));
        }
        let positive = [
            ("rho", self.rho),
            ("cp", self.cp),
            ("radius", self.radius),
            ("t0", self.t0),
            ("t_f", self.t_f),
        ];
        for (name, v) in positive {
            if !(v > 0.0) {
                return Err(Error::InvalidInput(format!("{name} must be positive, got {v}")));
            }
        }
        for (name, v) in [("alpha", self.alpha), ("h", self.h), ("beta", self.beta)] {
            if !(v >= 0.0) {
                return Err(Error::InvalidInput(format!("{name} must be >= 0, got {v}")));
            }
        }
        Ok(())
    }

    pub fn dr(&self) -> f64 {
        self.radius / (self.nr - 1) as f64
    }

    pub fn dt(&self) -> f64 {
        self.t_f / self.nt as f64
    }

    /// A copy with a different grid (used for refinement studies and
    /// fine-grid data generation).
    pub fn with_grid(&self, nr: usize, nt: usize) -> Self {
        Self { nr, nt, ..self.clone() }
    }
}

/// Space–time temperature solution on the solver grid.
#[derive(Debug, Clone)]
pub struct TemperatureField {
    /// `(nt+1) × nr` values in Kelvin, row `m` is time `t_grid[m]`.
    values: Vec<f64>,
    r_grid: Vec<f64>,
    t_grid: Vec<f64>,
}

impl TemperatureField {
    pub fn r_grid(&self) -> &[f64] {
        &self.r_grid
    }

    pub fn t_grid(&self) -> &[f64] {
        &self.t_grid
    }

    pub fn at(&self, time_index: usize, radius_index: usize) -> f64 {
        self.values[time_index * self.r_grid.len() + radius_index]
    }

    pub fn row(&self, time_index: usize) -> &[f64] {
        let nr = self.r_grid.len();
        &self.values[time_index * nr..(time_index + 1) * nr]
    }

    pub fn num_times(&self) -> usize {
        self.t_grid.len()
    }

    /// Mean of T over the full space–time grid (Kelvin); used by the SNR
    /// noise model.
    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn max(&self) -> f64 {
        self.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Thomas algorithm for a tridiagonal system; `diag` is overwritten-free,
/// returns the solution. Fails on a vanishing pivot.
pub fn solve_tridiagonal(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    debug_assert_eq!(lower.len(), n - 1);
    debug_assert_eq!(upper.len(), n - 1);
    debug_assert_eq!(rhs.len(), n);
    let mut c = vec![0.0; n - 1];
    let mut d = vec![0.0; n];
    let mut piv = diag[0];
    if piv.abs() < f64::MIN_POSITIVE || !piv.is_finite() {
        return Err(Error::Numerical("singular tridiagonal system (first pivot)".into()));
    }
    c[0] = upper[0] / piv;
    d[0] = rhs[0] / piv;
    for i in 1..n {
        piv = diag[i] - lower[i - 1] * c[i - 1];
        if piv.abs() < f64::MIN_POSITIVE || !piv.is_finite() {
            return Err(Error::Numerical(format!("singular tridiagonal system at row {i}")));
        }
        if i < n - 1 {
            c[i] = upper[i] / piv;
        }
        d[i] = (rhs[i] - lower[i - 1] * d[i - 1]) / piv;
    }
    let mut x = d;
    for i in (0..n - 1).rev() {
        x[i] -= c[i] * x[i + 1];
    }
    Ok(x)
}

/// Tridiagonal representation of the affine spatial operator
/// `k·(T_rr + T_r/r)` with the Robin boundary folded in:
/// `(S T)_i = lower_i T_{i-1} + diag_i T_i + upper_i T_{i+1} + b_i`.
struct SpatialOperator {
    lower: Vec<f64>,
    diag: Vec<f64>,
    upper: Vec<f64>,
    /// Constant boundary contribution (from Tᵉ), independent of k.
    boundary_src: f64,
}

fn spatial_operator(k: f64, cfg: &PdeConfig) -> SpatialOperator {
    let nr = cfg.nr;
    let dr = cfg.dr();
    let dr2 = dr * dr;
    let mut lower = vec![0.0; nr - 1];
    let mut diag = vec![0.0; nr];
    let mut upper = vec![0.0; nr - 1];

    // r = 0: polar Laplacian limit 2T_rr with a reflected ghost node.
    diag[0] = -4.0 * k / dr2;
    upper[0] = 4.0 * k / dr2;

    for i in 1..nr - 1 {
        let r = i as f64 * dr;
        lower[i - 1] = k * (1.0 / dr2 - 1.0 / (2.0 * dr * r));
        diag[i] = -2.0 * k / dr2;
        upper[i] = k * (1.0 / dr2 + 1.0 / (2.0 * dr * r));
    }

    // r = R: ghost-node elimination of k T_r = h(Tᵉ − T); k cancels from the
    // Robin contribution, leaving a k-free exchange coefficient.
    let exch = 2.0 * cfg.h / dr + cfg.h / cfg.radius;
    lower[nr - 2] = 2.0 * k / dr2;
    diag[nr - 1] = -2.0 * k / dr2 - exch;

    SpatialOperator {
        lower,
        diag,
        upper,
        boundary_src: exch * cfg.te,
    }
}

/// Solves the direct problem for a given conductivity `k(t)`.
///
/// The conductivity must be positive at every evaluated time (the step
/// endpoints); a nonpositive value is an input error.
pub fn solve(k: &dyn Fn(f64) -> f64, cfg: &PdeConfig) -> Result<TemperatureField> {
    cfg.validate()?;
    let nr = cfg.nr;
    let nt = cfg.nt;
    let dt = cfg.dt();
    let cv = cfg.rho * cfg.cp;
    let src = cfg.alpha * cfg.beta; // zeroth-order source coefficient αβ

    let r_grid: Vec<f64> = (0..nr).map(|i| i as f64 * cfg.dr()).collect();
    let t_grid: Vec<f64> = (0..=nt).map(|m| m as f64 * dt).collect();

    let eval_k = |t: f64| -> Result<f64> {
        let v = k(t);
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::InvalidInput(format!("nonpositive conductivity k({t}) = {v}")));
        }
        Ok(v)
    };

    let mut values = Vec::with_capacity((nt + 1) * nr);
    let mut current = vec![cfg.t0; nr];
    values.extend_from_slice(&current);

    let mut op_now = spatial_operator(eval_k(t_grid[0])?, cfg);
    for m in 0..nt {
        let op_next = spatial_operator(eval_k(t_grid[m + 1])?, cfg);

        // Crank–Nicolson: (cv/dt − S_{m+1}/2 − αβ/2) T^{m+1}
        //               = (cv/dt + S_m/2 + αβ/2) T^m + (b_m + b_{m+1})/2.
        let mut rhs = vec![0.0; nr];
        for i in 0..nr {
            let mut s = op_now.diag[i] * current[i];
            if i > 0 {
                s += op_now.lower[i - 1] * current[i - 1];
            }
            if i < nr - 1 {
                s += op_now.upper[i] * current[i + 1];
            }
            rhs[i] = (cv / dt + src / 2.0) * current[i] + 0.5 * s;
        }
        rhs[nr - 1] += 0.5 * (op_now.boundary_src + op_next.boundary_src);

        let lower: Vec<f64> = op_next.lower.iter().map(|v| -0.5 * v).collect();
        let upper: Vec<f64> = op_next.upper.iter().map(|v| -0.5 * v).collect();
        let diag: Vec<f64> = op_next
            .diag
            .iter()
            .map(|v| cv / dt - 0.5 * v - src / 2.0)
            .collect();

        current = solve_tridiagonal(&lower, &diag, &upper, &rhs)?;
        if current.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numerical(format!("non-finite temperature at step {}", m + 1)));
        }
        values.extend_from_slice(&current);
        op_now = op_next;
    }

    Ok(TemperatureField { values, r_grid, t_grid })
}

/// Extracts observations at the requested radii and times.
///
/// Radii must lie on the spatial grid (the observation radii {0, R} always
/// do); times within range are linearly interpolated between solver steps.
/// Output ordering is radius-major: `[r0 × all times, r1 × all times, ...]`.
pub fn observe(field: &TemperatureField, radii: &[f64], times: &[f64]) -> Result<Vec<f64>> {
    let dr = field.r_grid[1] - field.r_grid[0];
    let mut radius_indices = Vec::with_capacity(radii.len());
    for &r in radii {
        let idx = (r / dr).round() as usize;
        if idx >= field.r_grid.len() || (field.r_grid[idx] - r).abs() > 1e-9 * field.r_grid[field.r_grid.len() - 1] {
            return Err(Error::InvalidInput(format!("observation radius {r} is not on the spatial grid")));
        }
        radius_indices.push(idx);
    }
    let t_min = field.t_grid[0];
    let t_max = *field.t_grid.last().unwrap();
    let dt = field.t_grid[1] - field.t_grid[0];
    let mut out = Vec::with_capacity(radii.len() * times.len());
    for &ri in &radius_indices {
        for &t in times {
            if t < t_min - 1e-9 * t_max || t > t_max * (1.0 + 1e-12) + 1e-12 {
                return Err(Error::InvalidInput(format!("observation time {t} outside [0, {t_max}]")));
            }
            let t = t.clamp(t_min, t_max);
            let m = ((t / dt).floor() as usize).min(field.t_grid.len() - 2);
            let theta = (t - field.t_grid[m]) / dt;
            out.push((1.0 - theta) * field.at(m, ri) + theta * field.at(m + 1, ri));
        }
    }
    Ok(out)
}

/// Forward mapping `G(u) → observations`: solve with `k = exp(u)` on the
/// piecewise-linear knots and observe.
pub fn forward_map(
    knots: &crate::conductivity::ConductivityKnots,
    cfg: &PdeConfig,
    radii: &[f64],
    times: &[f64],
) -> Result<Vec<f64>> {
    let t_f = knots.t_f();
    let k = |t: f64| knots.eval_k(t.clamp(0.0, t_f)).expect("clamped time is in range");
    let field = solve(&k, cfg)?;
    observe(&field, radii, times)
}
