//! Menger curvature `c²(μ) = ∭ R(x,y,z)^{-2} dμ(x)dμ(y)dμ(z)` of atomic
//! measures.
//!
//! The exact sums run over ordered triples. Each unordered triple `i<j<k` is
//! visited once and counted six times. Rows (fixed `i`) are summed serially
//! and then combined by pairwise summation in row order, so the result does
//! not depend on the rayon thread count.

use rand::distributions::{Distribution, WeightedIndex};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use num_complex::Complex64;

use crate::geometry::{circumradius_inv_sq, Point};
use crate::measure::DiscreteMeasure;
use crate::summation::pairwise_sum;
use crate::{Error, Result};

/// Default cap on `n³` for the exact evaluators.
pub const DEFAULT_TRIPLE_BUDGET: f64 = 2e9;

/// Smallest sample count accepted by [`c2_monte_carlo`].
pub const MIN_MC_SAMPLES: u64 = 1_000;

/// Monte-Carlo work is split into this many independent ChaCha streams,
/// whatever the thread count.
const MC_STREAMS: u64 = 64;

/// Rows per task in the gradient kernel.
const GRAD_CHUNK: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Estimator {
    Exact,
    MonteCarlo,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvatureReport {
    pub value: f64,
    pub estimator: Estimator,
    /// Truncation scale; 0 means untruncated.
    pub epsilon: f64,
    /// Number of triples summed (exact) or drawn (Monte-Carlo).
    pub samples: u64,
    pub std_error: f64,
}

/// Coordinates, weights and squared distances laid out for the kernels.
struct Prepared {
    n: usize,
    xs: Vec<f64>,
    ys: Vec<f64>,
    ws: Vec<f64>,
    d2: Vec<f64>,
}

impl Prepared {
    fn new(mu: &DiscreteMeasure) -> Self {
        let n = mu.len();
        let xs: Vec<f64> = mu.points().iter().map(|p| p.x).collect();
        let ys: Vec<f64> = mu.points().iter().map(|p| p.y).collect();
        let mut d2 = vec![0.0; n * n];
        d2.par_chunks_mut(n.max(1)).enumerate().for_each(|(i, row)| {
            for j in 0..n {
                let dx = xs[j] - xs[i];
                let dy = ys[j] - ys[i];
                row[j] = dx * dx + dy * dy;
            }
        });
        Self { n, xs, ys, ws: mu.weights().to_vec(), d2 }
    }

    #[inline]
    fn row(&self, i: usize) -> &[f64] {
        &self.d2[i * self.n..(i + 1) * self.n]
    }

    /// `Σ_{k ∈ ks} w_k · cross²/(ab·bc·ca)` for the pair `(i, j)`, over
    /// triples whose three squared sides all exceed `eps2`. The factor 4 of
    /// `1/R²` is left to the caller.
    #[inline]
    fn pair_sum(&self, i: usize, j: usize, ks: std::ops::Range<usize>, eps2: f64) -> f64 {
        let ab = self.row(i)[j];
        if !(ab > eps2) {
            return 0.0;
        }
        let (ax, ay) = (self.xs[i], self.ys[i]);
        let ux = self.xs[j] - ax;
        let uy = self.ys[j] - ay;
        let di = &self.row(i)[ks.clone()];
        let dj = &self.row(j)[ks.clone()];
        let xs = &self.xs[ks.clone()];
        let ys = &self.ys[ks.clone()];
        let ws = &self.ws[ks];
        let mut acc = 0.0;
        for t in 0..ws.len() {
            let ca = di[t];
            let bc = dj[t];
            let cross = ux * (ys[t] - ay) - uy * (xs[t] - ax);
            let v = if bc > eps2 && ca > eps2 { cross * cross / (bc * ca) } else { 0.0 };
            acc += ws[t] * v;
        }
        acc / ab
    }
}

fn check_budget(n: usize, budget: f64) -> Result<()> {
    let needed = (n as f64).powi(3);
    if needed > budget {
        return Err(Error::BudgetExceeded { needed, budget });
    }
    Ok(())
}

fn check_eps(eps: f64) -> Result<()> {
    if eps >= 0.0 && eps.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("epsilon must be finite and nonnegative, got {eps}")))
    }
}

fn exact_report(value: f64, n: usize, epsilon: f64) -> CurvatureReport {
    let n = n as u64;
    CurvatureReport { value, estimator: Estimator::Exact, epsilon, samples: n.pow(3), std_error: 0.0 }
}

/// Exact `c²(μ)`.
pub fn c2_exact(mu: &DiscreteMeasure) -> Result<CurvatureReport> {
    c2_truncated_with_budget(mu, 0.0, DEFAULT_TRIPLE_BUDGET)
}

/// Exact `c²_ε(μ)`: only triples whose pairwise distances all exceed `ε`.
pub fn c2_truncated(mu: &DiscreteMeasure, eps: f64) -> Result<CurvatureReport> {
    c2_truncated_with_budget(mu, eps, DEFAULT_TRIPLE_BUDGET)
}

pub fn c2_truncated_with_budget(mu: &DiscreteMeasure, eps: f64, budget: f64) -> Result<CurvatureReport> {
    check_eps(eps)?;
    check_budget(mu.len(), budget)?;
    let value = triple_sum(&Prepared::new(mu), eps * eps, None);
    Ok(exact_report(value, mu.len(), eps))
}

/// Ordered-triple sum, optionally skipping triples that lie entirely in one
/// block. `block_end[i]` is the exclusive end index of the block holding `i`.
fn triple_sum(prep: &Prepared, eps2: f64, block_end: Option<&[usize]>) -> f64 {
    let n = prep.n;
    let rows: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut row = 0.0;
            for j in i + 1..n {
                let k0 = match block_end {
                    Some(end) if end[i] == end[j] => end[j],
                    _ => j + 1,
                };
                if k0 < n {
                    row += prep.ws[j] * prep.pair_sum(i, j, k0..n, eps2);
                }
            }
            prep.ws[i] * row
        })
        .collect();
    24.0 * pairwise_sum(&rows)
}

/// Curvature of `μ = Σ_j μ_j` coming from triples that are not contained in
/// a single part, i.e. `c²(μ) − Σ_j c²(μ_j)` computed without cancellation.
pub fn c2_cross(parts: &[DiscreteMeasure]) -> Result<CurvatureReport> {
    c2_cross_truncated(parts, 0.0)
}

pub fn c2_cross_truncated(parts: &[DiscreteMeasure], eps: f64) -> Result<CurvatureReport> {
    check_eps(eps)?;
    let total = DiscreteMeasure::sum(parts)?;
    check_budget(total.len(), DEFAULT_TRIPLE_BUDGET)?;
    let mut block_end = Vec::with_capacity(total.len());
    let mut end = 0;
    for p in parts {
        end += p.len();
        block_end.extend(std::iter::repeat(end).take(p.len()));
    }
    let value = triple_sum(&Prepared::new(&total), eps * eps, Some(&block_end));
    Ok(exact_report(value, total.len(), eps))
}

/// `c²_ε(μ)` together with its gradient `∂c²/∂w_i = 6·Σ_{j<k; j,k≠i} w_j w_k R⁻²`.
pub fn c2_and_gradient(mu: &DiscreteMeasure, eps: f64) -> Result<(f64, Vec<f64>)> {
    check_eps(eps)?;
    check_budget(mu.len(), DEFAULT_TRIPLE_BUDGET)?;
    let prep = Prepared::new(mu);
    let n = prep.n;
    let eps2 = eps * eps;
    let partials: Vec<Vec<f64>> = (0..n)
        .collect::<Vec<_>>()
        .par_chunks(GRAD_CHUNK)
        .map(|rows| {
            let mut g = vec![0.0; n];
            for &i in rows {
                let (ax, ay) = (prep.xs[i], prep.ys[i]);
                let di = prep.row(i);
                for j in i + 1..n {
                    let ab = di[j];
                    if !(ab > eps2) {
                        continue;
                    }
                    let dj = prep.row(j);
                    let ux = prep.xs[j] - ax;
                    let uy = prep.ys[j] - ay;
                    let (wi, wj) = (prep.ws[i], prep.ws[j]);
                    let mut gi = 0.0;
                    let mut gj = 0.0;
                    for k in j + 1..n {
                        let (ca, bc) = (di[k], dj[k]);
                        if !(bc > eps2 && ca > eps2) {
                            continue;
                        }
                        let cross = ux * (prep.ys[k] - ay) - uy * (prep.xs[k] - ax);
                        let v = cross * cross / (ab * bc * ca);
                        let wk = prep.ws[k];
                        gi += wk * v;
                        gj += wk * v;
                        g[k] += wi * wj * v;
                    }
                    g[i] += wj * gi;
                    g[j] += wi * gj;
                }
            }
            g
        })
        .collect();
    let mut grad = vec![0.0; n];
    for g in &partials {
        for (a, b) in grad.iter_mut().zip(g) {
            *a += b;
        }
    }
    for g in &mut grad {
        // 4 from 1/R² = 4·cross²/(ab·bc·ca), 6 from the ordered count
        *g *= 24.0;
    }
    let weighted: Vec<f64> = grad.iter().zip(&prep.ws).map(|(g, w)| g * w).collect();
    let c2 = pairwise_sum(&weighted) / 3.0;
    Ok((c2, grad))
}

/// Unbiased Monte-Carlo estimate of `c²(μ)`.
pub fn c2_monte_carlo(mu: &DiscreteMeasure, samples: u64, seed: u64) -> Result<CurvatureReport> {
    c2_monte_carlo_truncated(mu, 0.0, samples, seed)
}

/// Draws `i, j, k` independently with probability proportional to the
/// weights and averages `‖μ‖³·R⁻²` (zero unless all three distances exceed
/// `ε`). The sample budget is cut into a fixed number of ChaCha streams
/// keyed by `(seed, stream)`, so the estimate is independent of threading.
pub fn c2_monte_carlo_truncated(
    mu: &DiscreteMeasure,
    eps: f64,
    samples: u64,
    seed: u64,
) -> Result<CurvatureReport> {
    check_eps(eps)?;
    if mu.is_empty() {
        return Err(Error::EmptyInput("c2_monte_carlo"));
    }
    if samples < MIN_MC_SAMPLES {
        return Err(Error::InvalidArgument(format!(
            "Monte-Carlo curvature needs at least {MIN_MC_SAMPLES} samples, got {samples}"
        )));
    }
    let dist = WeightedIndex::new(mu.weights())
        .map_err(|e| Error::InvalidArgument(format!("weights not samplable: {e}")))?;
    let pts = mu.points();
    let eps2 = eps * eps;
    let stats: Vec<(f64, f64)> = (0..MC_STREAMS)
        .into_par_iter()
        .map(|stream| {
            let count = samples / MC_STREAMS + u64::from(stream < samples % MC_STREAMS);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(stream);
            let (mut s, mut s2) = (0.0, 0.0);
            for _ in 0..count {
                let (a, b, c) = (pts[dist.sample(&mut rng)], pts[dist.sample(&mut rng)], pts[dist.sample(&mut rng)]);
                let v = if eps2 > 0.0
                    && (a.dist_sq(b) <= eps2 || b.dist_sq(c) <= eps2 || a.dist_sq(c) <= eps2)
                {
                    0.0
                } else {
                    circumradius_inv_sq(a, b, c)
                };
                s += v;
                s2 += v * v;
            }
            (s, s2)
        })
        .collect();
    let n = samples as f64;
    let sum: f64 = stats.iter().map(|s| s.0).sum();
    let sum_sq: f64 = stats.iter().map(|s| s.1).sum();
    let mean = sum / n;
    let var = ((sum_sq / n - mean * mean) * n / (n - 1.0)).max(0.0);
    let m3 = mu.total_mass().powi(3);
    Ok(CurvatureReport {
        value: m3 * mean,
        estimator: Estimator::MonteCarlo,
        epsilon: eps,
        samples,
        std_error: m3 * (var / n).sqrt(),
    })
}

/// `Σ_σ 1/((z_σ(2) − z_σ(1))·conj(z_σ(3) − z_σ(1)))` over the six
/// permutations of `(a, b, c)`. The sum is real and equals `1/R²`.
pub fn melnikov_permutation_sum(a: Point, b: Point, c: Point) -> f64 {
    let z = [a.to_complex(), b.to_complex(), c.to_complex()];
    const PERMS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    PERMS
        .iter()
        .map(|&[i, j, k]| (Complex64::new(1.0, 0.0) / ((z[j] - z[i]) * (z[k] - z[i]).conj())).re)
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{CircleArc, Segment};
    use proptest::prelude::*;
    use rand::Rng;
    use std::f64::consts::{PI, TAU};

    #[test]
    fn melnikov_matches_circumradius() {
        let (a, b, c) = (Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(0.0, 1.0));
        // right triangle: hypotenuse √2 is a diameter
        assert!((melnikov_permutation_sum(a, b, c) - 2.0).abs() < 1e-14);
        assert!((circumradius_inv_sq(a, b, c) - 2.0).abs() < 1e-14);
    }

    fn circle(m: usize) -> DiscreteMeasure {
        DiscreteMeasure::arc_length(&CircleArc::full_circle(Point::ORIGIN, 1.0).unwrap(), m).unwrap()
    }

    fn circle_closed_form(m: usize) -> f64 {
        let m = m as f64;
        TAU.powi(3) * m * (m - 1.0) * (m - 2.0) / m.powi(3)
    }

    /// Direct ordered-triple enumeration with the public 1/R².
    fn brute(mu: &DiscreteMeasure, eps: f64) -> f64 {
        let a: Vec<_> = mu.atoms().collect();
        let mut s = 0.0;
        for &(x, wx) in &a {
            for &(y, wy) in &a {
                for &(z, wz) in &a {
                    if x.dist(y) > eps && y.dist(z) > eps && x.dist(z) > eps {
                        s += wx * wy * wz * circumradius_inv_sq(x, y, z);
                    }
                }
            }
        }
        s
    }

    #[test]
    fn collinear_is_zero() {
        // dyadic atom positions, so the points are collinear as floats too
        for (a, b) in [((-1.0, 2.0), (3.0, -2.0)), ((0.0, 0.0), (0.0, 5.0)), ((1.0, 1.0), (9.0, 5.0))] {
            let seg = Segment::new(Point::new(a.0, a.1), Point::new(b.0, b.1));
            let mu = DiscreteMeasure::segment_length(&seg, 33).unwrap();
            assert_eq!(c2_exact(&mu).unwrap().value, 0.0);
        }
        // off-dyadic slopes are only collinear up to rounding
        let seg = Segment::new(Point::new(-1.0, 2.0), Point::new(3.0, -1.0));
        let mu = DiscreteMeasure::segment_length(&seg, 40).unwrap();
        assert!(c2_exact(&mu).unwrap().value < 1e-20);
    }

    #[test]
    fn equilateral_triangle() {
        let s: f64 = 1.7;
        let pts = vec![Point::new(0.0, 0.0), Point::new(s, 0.0), Point::new(0.5 * s, 0.5 * s * 3f64.sqrt())];
        let mu = DiscreteMeasure::new(pts, vec![1.0; 3], 0.1).unwrap();
        let v = c2_exact(&mu).unwrap().value;
        assert!((v - 18.0 / (s * s)).abs() < 1e-12);
    }

    #[test]
    fn circle_matches_closed_form() {
        for m in [3, 10, 64] {
            let v = c2_exact(&circle(m)).unwrap().value;
            let want = circle_closed_form(m);
            assert!((v - want).abs() <= 1e-11 * want, "m={m}: {v} vs {want}");
        }
    }

    #[test]
    fn truncated_cases() {
        let mu = circle(16);
        assert_eq!(c2_truncated(&mu, 3.0).unwrap().value, 0.0);
        assert_eq!(c2_truncated(&mu, 0.0).unwrap().value, c2_exact(&mu).unwrap().value);
        let chord = 2.0 * (PI / 16.0).sin() * (1.0 + 1e-9);
        let got = c2_truncated(&mu, chord).unwrap().value;
        let want = brute(&mu, chord);
        assert!((got - want).abs() < 1e-10 * want);
        assert!(got < c2_exact(&mu).unwrap().value);
    }

    #[test]
    fn budget_is_enforced() {
        let mu = circle(20);
        assert!(matches!(c2_truncated_with_budget(&mu, 0.0, 1000.0), Err(Error::BudgetExceeded { .. })));
    }

    #[test]
    fn gradient_matches_finite_difference_and_euler() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let pts: Vec<Point> = (0..12).map(|_| Point::new(rng.gen(), rng.gen())).collect();
        let ws: Vec<f64> = (0..12).map(|_| rng.gen_range(0.5..1.5)).collect();
        let mu = DiscreteMeasure::new(pts, ws.clone(), 0.01).unwrap();
        let (c2, g) = c2_and_gradient(&mu, 0.05).unwrap();
        let direct = c2_truncated(&mu, 0.05).unwrap().value;
        assert!((c2 - direct).abs() < 1e-10 * direct);
        // c² is a cubic form: c²(w + δe_i) − c²(w − δe_i) = 2δ·∂_i + O(δ³)
        let delta = 1e-4;
        for i in [0, 5, 11] {
            let mut up = ws.clone();
            up[i] += delta;
            let mut dn = ws.clone();
            dn[i] -= delta;
            let fd = (c2_truncated(&mu.with_weights(up).unwrap(), 0.05).unwrap().value
                - c2_truncated(&mu.with_weights(dn).unwrap(), 0.05).unwrap().value)
                / (2.0 * delta);
            assert!((fd - g[i]).abs() < 1e-6 * g[i].abs().max(1.0), "i={i}: {fd} vs {}", g[i]);
        }
    }

    #[test]
    fn cross_term_is_difference() {
        let a = circle(12);
        let b = circle(9).translate(Point::new(3.0, 0.5));
        let c = DiscreteMeasure::segment_length(&Segment::new(Point::new(0.0, 4.0), Point::new(2.0, 5.0)), 7).unwrap();
        let whole = c2_exact(&a.add(&b).add(&c)).unwrap().value;
        let own: f64 = [&a, &b, &c].iter().map(|m| c2_exact(m).unwrap().value).sum();
        let cross = c2_cross(&[a, b, c]).unwrap().value;
        assert!(cross > 0.0);
        assert!((whole - own - cross).abs() < 1e-10 * whole);
    }

    #[test]
    fn monte_carlo_collinear_and_circle() {
        let line = DiscreteMeasure::segment_length(&Segment::new(Point::ORIGIN, Point::new(1.0, 1.0)), 30).unwrap();
        let r = c2_monte_carlo(&line, 5_000, 1).unwrap();
        assert_eq!((r.value, r.std_error), (0.0, 0.0));
        let r = c2_monte_carlo(&circle(64), 100_000, 7).unwrap();
        let want = circle_closed_form(64);
        assert!((r.value - want).abs() <= 3.0 * r.std_error, "{} ± {} vs {want}", r.value, r.std_error);
        assert!(c2_monte_carlo(&circle(8), 999, 1).is_err());
    }

    #[test]
    fn monte_carlo_reproducible_and_thread_independent() {
        let mu = circle(30);
        let a = c2_monte_carlo(&mu, 20_000, 42).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
        let b = pool.install(|| c2_monte_carlo(&mu, 20_000, 42).unwrap());
        assert_eq!(a, b);
        assert_ne!(a.value, c2_monte_carlo(&mu, 20_000, 43).unwrap().value);
    }

    #[test]
    fn report_serializes() {
        let r = c2_exact(&circle(5)).unwrap();
        let s = serde_json::to_value(r).unwrap();
        assert_eq!(s["estimator"], "exact");
        assert_eq!(s["std_error"], 0.0);
        let keys: Vec<_> = s.as_object().unwrap().keys().cloned().collect();
        assert_eq!(keys.len(), 5);
    }

    fn arb_cloud() -> impl Strategy<Value = DiscreteMeasure> {
        prop::collection::vec((-3.0..3.0f64, -3.0..3.0f64, 0.1..2.0f64), 3..14).prop_map(|v| {
            let (pts, ws) = v.into_iter().map(|(x, y, w)| (Point::new(x, y), w)).unzip();
            DiscreteMeasure::new(pts, ws, 0.01).unwrap()
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn weight_scaling_is_cubic(mu in arb_cloud(), t in 0.1..10.0f64) {
            let a = c2_exact(&mu).unwrap().value;
            let b = c2_exact(&mu.scale(t).unwrap()).unwrap().value;
            prop_assert!((b - t.powi(3) * a).abs() <= 1e-11 * b.max(1e-300));
        }

        #[test]
        fn rigid_motion_invariance(mu in arb_cloud(), th in 0.0..TAU, dx in -10.0..10.0f64, dy in -10.0..10.0f64) {
            let a = c2_exact(&mu).unwrap().value;
            let b = c2_exact(&mu.rotate(th).translate(Point::new(dx, dy))).unwrap().value;
            prop_assert!((a - b).abs() <= 1e-9 * a.max(1e-300));
        }

        #[test]
        fn dilation_law(mu in arb_cloud(), s in 0.1..10.0f64) {
            let a = c2_exact(&mu).unwrap().value;
            let b = c2_exact(&mu.dilate(s).unwrap()).unwrap().value;
            prop_assert!((b * s * s - a).abs() <= 1e-11 * a.max(1e-300));
        }

        #[test]
        fn monotone_in_eps(mu in arb_cloud(), e1 in 0.0..2.0f64, e2 in 0.0..2.0f64) {
            let (lo, hi) = if e1 < e2 { (e1, e2) } else { (e2, e1) };
            prop_assert!(c2_truncated(&mu, hi).unwrap().value <= c2_truncated(&mu, lo).unwrap().value);
        }

        #[test]
        fn superadditive_on_disjoint_supports(a in arb_cloud(), b in arb_cloud()) {
            let b = b.translate(Point::new(10.0, 0.0));
            let whole = c2_exact(&a.add(&b)).unwrap().value;
            let parts = c2_exact(&a).unwrap().value + c2_exact(&b).unwrap().value;
            prop_assert!(whole >= parts * (1.0 - 1e-12));
        }

        #[test]
        fn exact_matches_brute_force(mu in arb_cloud(), eps in 0.0..1.0f64) {
            let a = c2_truncated(&mu, eps).unwrap().value;
            let b = brute(&mu, eps);
            prop_assert!((a - b).abs() <= 1e-10 * b.max(1e-300));
        }
    }
}
