//! The t-walk proposal of Christen and Fox: a tuning-free Metropolis
//! proposal operating on a pair of points with four move kernels (walk,
//! traverse, hop, blow). One point of the pair is moved per proposal, using
//! the other as pivot; the returned log proposal-density ratio
//! `log q(θ|θ′) − log q(θ′|θ)` is exactly what the acceptance quotient
//! needs.

use nalgebra::DVector;
use rand::Rng;

use crate::error::{Error, Result};

const LN_2PI: f64 = 1.837877066409345;

/// Kernel constants from the published construction; selection
/// probabilities default to ≈ (0.4918, 0.4918, 0.0082, 0.0082).
#[derive(Debug, Clone, PartialEq)]
pub struct TwalkParams {
    /// Walk step-size parameter a_w.
    pub aw: f64,
    /// Traverse parameter a_t.
    pub at: f64,
    /// Expected number of coordinates moved per proposal.
    pub n_move: f64,
    /// Selection probabilities for (walk, traverse, hop, blow).
    pub kernel_probs: [f64; 4],
}

impl Default for TwalkParams {
    fn default() -> Self {
        Self {
            aw: 1.5,
            at: 6.0,
            n_move: 4.0,
            kernel_probs: [0.4918, 0.4918, 0.0082, 0.0082],
        }
    }
}

impl TwalkParams {
    /// Per-coordinate move probability min(n, n_move)/n.
    pub fn p_move(&self, dim: usize) -> f64 {
        (self.n_move / dim as f64).min(1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kernel {
    Walk,
    Traverse,
    Hop,
    Blow,
}

/// A proposed move for one point of the pair.
#[derive(Debug, Clone)]
pub struct Proposal {
    /// Index (0 or 1) of the pair point being replaced.
    pub which: usize,
    pub point: DVector<f64>,
    /// `log q(current|proposed) − log q(proposed|current)`.
    pub log_q_ratio: f64,
    pub kernel: Kernel,
    pub n_moved: usize,
}

/// Walk-kernel step drawn from the density ∝ 1/√(1+z) on
/// [−a/(1+a), a]; z = 0 recovers the identity move.
pub fn sample_walk_z(u: f64, aw: f64) -> f64 {
    aw / (1.0 + aw) * (aw * u * u + 2.0 * u - 1.0)
}

/// Traverse scale β with density satisfying ψ(1/β) = β²ψ(β).
fn sample_traverse_beta<R: Rng + ?Sized>(at: f64, rng: &mut R) -> f64 {
    let u: f64 = rng.gen();
    if rng.gen::<f64>() < (at - 1.0) / (2.0 * at) {
        (u.ln() / (at + 1.0)).exp()
    } else {
        (u.ln() / (1.0 - at)).exp()
    }
}

fn draw_move_mask<R: Rng + ?Sized>(dim: usize, p: f64, rng: &mut R) -> Vec<bool> {
    (0..dim).map(|_| rng.gen::<f64>() < p).collect()
}

/// Negative log density of the hop/blow Gaussian restricted to the moved
/// coordinates, centered at `center` with scale `sigma`.
fn gaussian_neg_log_density(
    h: &DVector<f64>,
    center: &DVector<f64>,
    mask: &[bool],
    sigma: f64,
) -> f64 {
    let n_moved = mask.iter().filter(|&&m| m).count() as f64;
    if n_moved == 0.0 {
        return 0.0;
    }
    let mut quad = 0.0;
    for (i, &moved) in mask.iter().enumerate() {
        if moved {
            quad += (h[i] - center[i]).powi(2);
        }
    }
    n_moved / 2.0 * LN_2PI + n_moved * sigma.ln() + quad / (2.0 * sigma * sigma)
}

fn max_moved_distance(x: &DVector<f64>, pivot: &DVector<f64>, mask: &[bool]) -> f64 {
    mask.iter()
        .enumerate()
        .filter(|(_, &m)| m)
        .map(|(i, _)| (x[i] - pivot[i]).abs())
        .fold(0.0, f64::max)
}

/// Walk move: `y_j = x_j + (x_j − x'_j) z_j` on moved coordinates;
/// symmetric, so the log proposal ratio is zero.
pub fn walk_move(x: &DVector<f64>, pivot: &DVector<f64>, mask: &[bool], z: &[f64]) -> DVector<f64> {
    let mut y = x.clone();
    for (i, &moved) in mask.iter().enumerate() {
        if moved {
            y[i] += (x[i] - pivot[i]) * z[i];
        }
    }
    y
}

/// Traverse move: `y_j = x'_j + β (x'_j − x_j)` on moved coordinates;
/// the log proposal ratio is `(n_moved − 2) log β`.
pub fn traverse_move(
    x: &DVector<f64>,
    pivot: &DVector<f64>,
    mask: &[bool],
    beta: f64,
) -> DVector<f64> {
    let mut y = x.clone();
    for (i, &moved) in mask.iter().enumerate() {
        if moved {
            y[i] = pivot[i] + beta * (pivot[i] - x[i]);
        }
    }
    y
}

/// Draws one t-walk proposal for the pair `(p0, p1)`.
///
/// A pair that coincides on every moved coordinate of a hop/blow move is
/// degenerate and yields `Error::Numerical` as a re-draw signal.
pub fn propose<R: Rng + ?Sized>(
    p0: &DVector<f64>,
    p1: &DVector<f64>,
    params: &TwalkParams,
    rng: &mut R,
) -> Result<Proposal> {
    let dim = p0.len();
    debug_assert_eq!(p1.len(), dim);

    let kernel = {
        let r: f64 = rng.gen();
        let mut acc = 0.0;
        let mut chosen = Kernel::Blow;
        for (k, &p) in [Kernel::Walk, Kernel::Traverse, Kernel::Hop, Kernel::Blow]
            .iter()
            .zip(&params.kernel_probs)
        {
            acc += p;
            if r < acc {
                chosen = *k;
                break;
            }
        }
        chosen
    };

    let which = usize::from(rng.gen::<bool>());
    let (x, pivot) = if which == 0 { (p0, p1) } else { (p1, p0) };
    let mask = draw_move_mask(dim, params.p_move(dim), rng);
    let n_moved = mask.iter().filter(|&&m| m).count();

    let (point, log_q_ratio) = match kernel {
        Kernel::Walk => {
            let z: Vec<f64> = (0..dim).map(|_| sample_walk_z(rng.gen(), params.aw)).collect();
            (walk_move(x, pivot, &mask, &z), 0.0)
        }
        Kernel::Traverse => {
            let beta = sample_traverse_beta(params.at, rng);
            let y = traverse_move(x, pivot, &mask, beta);
            let ratio = if n_moved == 0 {
                0.0
            } else {
                (n_moved as f64 - 2.0) * beta.ln()
            };
            (y, ratio)
        }
        Kernel::Hop | Kernel::Blow => {
            let scale = max_moved_distance(x, pivot, &mask);
            if n_moved > 0 && scale == 0.0 {
                return Err(Error::Numerical(
                    "degenerate t-walk pair: points coincide on all moved coordinates".into(),
                ));
            }
            let (sigma_fwd, center_fwd): (f64, &DVector<f64>) = match kernel {
                Kernel::Hop => (scale / 3.0, x),
                _ => (scale, pivot),
            };
            let mut y = x.clone();
            for (i, &moved) in mask.iter().enumerate() {
                if moved {
                    let z: f64 = rng.sample(rand_distr::StandardNormal);
                    y[i] = center_fwd[i] + sigma_fwd * z;
                }
            }
            if n_moved == 0 {
                (y, 0.0)
            } else {
                // Reverse scale is recomputed from the proposed point.
                let scale_rev = max_moved_distance(&y, pivot, &mask);
                if scale_rev == 0.0 {
                    return Err(Error::Numerical("degenerate t-walk reverse move".into()));
                }
                let (sigma_rev, center_rev): (f64, &DVector<f64>) = match kernel {
                    Kernel::Hop => (scale_rev / 3.0, &y),
                    _ => (scale_rev, pivot),
                };
                let fwd = gaussian_neg_log_density(&y, center_fwd, &mask, sigma_fwd);
                let rev = gaussian_neg_log_density(x, center_rev, &mask, sigma_rev);
                (y, fwd - rev)
            }
        }
    };

    Ok(Proposal {
        which,
        point,
        log_q_ratio,
        kernel,
        n_moved,
    })
}
