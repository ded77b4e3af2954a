//! The ε-truncated Cauchy transform
//! `C^ε_μ f(z) = ∫_{ε<|ξ−z|<1/ε} f(ξ) dμ(ξ) / (ξ − z)` as a dense operator on
//! `L²(μ)` for atomic `μ`.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::measure::DiscreteMeasure;
use crate::summation::pairwise_sum;
use crate::{Error, Result};

/// Independent random starts used by [`CauchyMatrix::operator_norm`].
pub const NORM_RESTARTS: u64 = 3;
pub const DEFAULT_NORM_TOL: f64 = 1e-9;
pub const DEFAULT_NORM_MAX_ITER: usize = 2000;

/// `K[i][j] = w_j / (p_j − p_i)` on the annulus `ε < |p_j − p_i| < 1/ε`.
#[derive(Debug, Clone)]
pub struct CauchyMatrix {
    measure: DiscreteMeasure,
    epsilon: f64,
    entries: Vec<Complex64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormEstimate {
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

#[inline]
fn in_annulus(d2: f64, eps: f64) -> bool {
    d2 > eps * eps && d2 * eps * eps < 1.0
}

/// `1/(p_j − p_i)` as a complex number, or 0 outside the annulus.
#[inline]
fn kernel(pi: crate::Point, pj: crate::Point, eps: f64) -> Complex64 {
    let dx = pj.x - pi.x;
    let dy = pj.y - pi.y;
    let d2 = dx * dx + dy * dy;
    if in_annulus(d2, eps) {
        Complex64::new(dx / d2, -dy / d2)
    } else {
        Complex64::new(0.0, 0.0)
    }
}

fn check_eps(eps: f64) -> Result<()> {
    if eps > 0.0 && eps.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("epsilon must be positive, got {eps}")))
    }
}

impl CauchyMatrix {
    pub fn build(mu: &DiscreteMeasure, eps: f64) -> Result<Self> {
        check_eps(eps)?;
        let n = mu.len();
        let pts = mu.points();
        let ws = mu.weights();
        let mut entries = vec![Complex64::new(0.0, 0.0); n * n];
        entries.par_chunks_mut(n.max(1)).enumerate().for_each(|(i, row)| {
            for j in 0..n {
                row[j] = kernel(pts[i], pts[j], eps) * ws[j];
            }
        });
        Ok(Self { measure: mu.clone(), epsilon: eps, entries })
    }

    pub fn n(&self) -> usize {
        self.measure.len()
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn measure(&self) -> &DiscreteMeasure {
        &self.measure
    }

    #[inline]
    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        self.entries[i * self.n() + j]
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        let n = self.n();
        &self.entries[i * n..(i + 1) * n]
    }

    /// `(Kf)_i = Σ_j K[i][j] f_j`.
    pub fn apply(&self, f: &[Complex64]) -> Result<Vec<Complex64>> {
        if f.len() != self.n() {
            return Err(Error::LengthMismatch { expected: self.n(), got: f.len() });
        }
        Ok((0..self.n())
            .into_par_iter()
            .map(|i| self.row(i).iter().zip(f).map(|(k, x)| k * x).sum())
            .collect())
    }

    /// `‖K·1‖²_{L²(μ)} = Σ_i w_i |Σ_j K[i][j]|²`.
    pub fn energy_of_one(&self) -> f64 {
        let ws = self.measure.weights();
        let terms: Vec<f64> = (0..self.n())
            .into_par_iter()
            .map(|i| ws[i] * self.row(i).iter().sum::<Complex64>().norm_sqr())
            .collect();
        pairwise_sum(&terms)
    }

    /// Largest singular value of `K` on `L²(μ)`.
    ///
    /// With `D = diag(√w)`, `‖K‖_{L²(μ)} = ‖D K D⁻¹‖₂` and
    /// `(D K D⁻¹)_{ij} = √(w_i w_j)/(p_j − p_i)`. Power iteration runs on
    /// `MᴴM` from [`NORM_RESTARTS`] seeded random starts and the largest
    /// Rayleigh estimate is kept. Iterates never overshoot: each estimate is
    /// a lower bound of the true norm.
    pub fn operator_norm(&self, tol: f64, max_iter: usize, seed: u64) -> Result<NormEstimate> {
        if !(tol > 0.0) {
            return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
        }
        if self.measure.is_empty() {
            return Err(Error::EmptyInput("operator_norm"));
        }
        let n = self.n();
        let sw: Vec<f64> = self.measure.weights().iter().map(|w| w.sqrt()).collect();
        let pts = self.measure.points();
        let mut m = vec![Complex64::new(0.0, 0.0); n * n];
        m.par_chunks_mut(n).enumerate().for_each(|(i, row)| {
            for j in 0..n {
                row[j] = kernel(pts[i], pts[j], self.epsilon) * (sw[i] * sw[j]);
            }
        });
        let mut best: Option<NormEstimate> = None;
        for restart in 0..NORM_RESTARTS {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(restart);
            let x0: Vec<Complex64> =
                (0..n).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
            let est = power_iteration(&m, n, x0, tol, max_iter);
            if best.map_or(true, |b| est.value > b.value) {
                best = Some(est);
            }
        }
        Ok(best.expect("at least one restart"))
    }

    pub fn operator_norm_default(&self, seed: u64) -> Result<NormEstimate> {
        self.operator_norm(DEFAULT_NORM_TOL, DEFAULT_NORM_MAX_ITER, seed)
    }
}

fn normalize(x: &mut [Complex64]) -> f64 {
    let nrm = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if nrm > 0.0 {
        for z in x.iter_mut() {
            *z /= nrm;
        }
    }
    nrm
}

fn matvec(m: &[Complex64], n: usize, x: &[Complex64]) -> Vec<Complex64> {
    (0..n).into_par_iter().map(|i| m[i * n..(i + 1) * n].iter().zip(x).map(|(a, b)| a * b).sum()).collect()
}

/// `Mᴴ y` for antisymmetric `M`, where `Mᴴ = −conj(M)` and rows can be
/// read contiguously.
fn matvec_adjoint(m: &[Complex64], n: usize, y: &[Complex64]) -> Vec<Complex64> {
    (0..n)
        .into_par_iter()
        .map(|j| -m[j * n..(j + 1) * n].iter().zip(y).map(|(a, b)| a.conj() * b).sum::<Complex64>())
        .collect()
}

fn power_iteration(m: &[Complex64], n: usize, mut x: Vec<Complex64>, tol: f64, max_iter: usize) -> NormEstimate {
    if normalize(&mut x) == 0.0 {
        return NormEstimate { value: 0.0, iterations: 0, converged: true };
    }
    let mut prev = 0.0;
    for it in 1..=max_iter {
        let y = matvec(m, n, &x);
        // ‖Mx‖² = xᴴMᴴMx for unit x
        let rq = y.iter().map(|z| z.norm_sqr()).sum::<f64>();
        if rq == 0.0 {
            return NormEstimate { value: 0.0, iterations: it, converged: true };
        }
        if it > 1 && (rq - prev).abs() <= tol * rq {
            return NormEstimate { value: rq.sqrt(), iterations: it, converged: true };
        }
        prev = rq;
        x = matvec_adjoint(m, n, &y);
        normalize(&mut x);
    }
    NormEstimate { value: prev.sqrt(), iterations: max_iter, converged: false }
}

/// [`CauchyMatrix::energy_of_one`] without storing the matrix.
pub fn energy_of_one(mu: &DiscreteMeasure, eps: f64) -> Result<f64> {
    check_eps(eps)?;
    let pts = mu.points();
    let ws = mu.weights();
    let terms: Vec<f64> = (0..mu.len())
        .into_par_iter()
        .map(|i| {
            let s: Complex64 = (0..pts.len()).map(|j| kernel(pts[i], pts[j], eps) * ws[j]).sum();
            ws[i] * s.norm_sqr()
        })
        .collect();
    Ok(pairwise_sum(&terms))
}

/// Truncation scales `(h/√2)·10^k`, `k = 0, 1, …`, below the diameter of
/// the support. The `1/√2` offset keeps lattice distances off the grid.
pub fn decade_grid(mu: &DiscreteMeasure) -> Vec<f64> {
    let diam = mu.diameter();
    let mut out = Vec::new();
    let mut eps = mu.resolution_h() / std::f64::consts::SQRT_2;
    while eps < diam {
        out.push(eps);
        eps *= 10.0;
    }
    if out.is_empty() {
        out.push(mu.resolution_h() / std::f64::consts::SQRT_2);
    }
    out
}

/// Largest operator norm over a list of truncation scales, with the scale
/// that attains it.
pub fn max_norm_over_grid(mu: &DiscreteMeasure, grid: &[f64], seed: u64) -> Result<(f64, f64)> {
    if grid.is_empty() {
        return Err(Error::EmptyInput("max_norm_over_grid"));
    }
    let mut best = (0.0, grid[0]);
    for &eps in grid {
        let v = CauchyMatrix::build(mu, eps)?.operator_norm_default(seed)?.value;
        if v > best.0 {
            best = (v, eps);
        }
    }
    Ok(best)
}
