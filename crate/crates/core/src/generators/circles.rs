//! Circle families `L` attached to a disc `D`: one small circle at the
//! center of `D` and `N` equal circles spaced evenly and touching
//! `∂(λ'D)` from inside, `λ' = (1 + λ)/2`.
//!
//! `N(λ)` is the least count such that every disc meeting both `D` and the
//! complement of `λD` contains one of the circles. [`covering_number`]
//! finds it by adversarial search.

use std::collections::HashMap;
use std::f64::consts::{PI, TAU};
use std::sync::{Mutex, OnceLock};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::geometry::{CircleArc, Disc, Point};
use crate::{Error, Result};

/// Largest `N` tried before giving up.
pub const MAX_CIRCLES: usize = 4096;
pub const DEFAULT_SEARCH_BUDGET: usize = 20_000;
pub const DEFAULT_SEARCH_SEED: u64 = 0x0c1c_1e5;

/// `λ' = (1 + λ)/2`.
pub fn lambda_prime(lambda: f64) -> f64 {
    0.5 * (1.0 + lambda)
}

/// `A_λ = min(1, λ' − 1)/1000`.
pub fn a_lambda(lambda: f64) -> f64 {
    (lambda_prime(lambda) - 1.0).min(1.0) / 1000.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoveringCertificate {
    pub lambda: f64,
    pub n: usize,
    /// Smallest clearance found for `n` circles (positive).
    pub margin: f64,
    /// Most negative clearance found for `n − 1` circles, the witness that
    /// one circle fewer fails (absent for `n = 1`).
    pub failing_margin_below: Option<f64>,
    pub evaluations: usize,
}

/// The layout for the unit disc: centers and common radius `A_λ`.
fn layout(lambda: f64, n: usize) -> (Vec<Point>, f64) {
    let a = a_lambda(lambda);
    let ring = lambda_prime(lambda) - a;
    let mut centers = vec![Point::ORIGIN];
    centers.extend((0..n).map(|k| Point::from_polar(ring, TAU * k as f64 / n as f64)));
    (centers, a)
}

/// Smallest radius of a disc centered at distance `rho` from the origin that
/// meets both the unit disc and the complement of `λD`.
#[inline]
fn r_min(rho: f64, lambda: f64) -> f64 {
    (rho - 1.0).max(lambda - rho)
}

/// Clearance of the best circle inside the critical disc at `(rho, phi)`:
/// positive iff some circle lies strictly inside. Larger discs with the
/// same center contain everything the critical one does.
fn clearance(rho: f64, phi: f64, lambda: f64, centers: &[Point], a: f64) -> f64 {
    let c = Point::from_polar(rho, phi);
    let nearest = centers.iter().map(|q| q.dist(c)).fold(f64::INFINITY, f64::min);
    r_min(rho, lambda) - (nearest + a)
}

/// Limit of the clearance as `rho → ∞` in direction `phi`, where the
/// critical disc becomes the half-plane `{Re(z e^{-iφ}) > 1}`.
fn clearance_at_infinity(phi: f64, centers: &[Point], a: f64) -> f64 {
    let u = Point::from_polar(1.0, phi);
    let best = centers.iter().map(|q| q.x * u.x + q.y * u.y).fold(f64::NEG_INFINITY, f64::max);
    best - 1.0 - a
}

struct SearchResult {
    worst: f64,
    evaluations: usize,
}

/// Minimizes the clearance over centers with angle in `[0, π/n]` (the
/// layout is symmetric under rotation by `2π/n` and reflection) by a grid,
/// seeded random probes, and coordinate refinement around the worst points.
fn adversarial_search(lambda: f64, n: usize, budget: usize, seed: u64) -> SearchResult {
    let (centers, a) = layout(lambda, n);
    let phi_max = PI / n as f64;
    let rho_max = 1e4 * lambda;
    let mut evals = 0usize;
    let mut f = |rho: f64, phi: f64| {
        evals += 1;
        clearance(rho, phi.clamp(0.0, phi_max), lambda, &centers, a)
    };

    // radial grid: dense across the annulus, geometric beyond it
    let mut rhos: Vec<f64> = (0..=200).map(|i| (lambda + 2.0) * i as f64 / 200.0).collect();
    let mut r = lambda + 2.0;
    while r < rho_max {
        r *= 1.05;
        rhos.push(r);
    }
    let phis: Vec<f64> = (0..=32).map(|i| phi_max * i as f64 / 32.0).collect();
    let mut scored: Vec<(f64, f64, f64)> = Vec::new();
    for &rho in &rhos {
        for &phi in &phis {
            scored.push((f(rho, phi), rho, phi));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..budget {
        let rho = if rng.gen_bool(0.5) {
            rng.gen_range(0.0..lambda + 2.0)
        } else {
            (lambda + 2.0) * (rho_max / (lambda + 2.0)).powf(rng.gen::<f64>())
        };
        let phi = rng.gen_range(0.0..=phi_max);
        scored.push((f(rho, phi), rho, phi));
    }
    scored.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut worst = scored[0].0;
    for &(v0, rho0, phi0) in scored.iter().take(8) {
        let (mut v, mut rho, mut phi) = (v0, rho0, phi0);
        let mut step_r = 0.05 * rho.max(1.0);
        let mut step_p = 0.1 * phi_max;
        while step_r > 1e-12 * rho.max(1.0) || step_p > 1e-12 {
            let mut moved = false;
            for (dr, dp) in [(step_r, 0.0), (-step_r, 0.0), (0.0, step_p), (0.0, -step_p)] {
                let (nr, np) = ((rho + dr).max(0.0), (phi + dp).clamp(0.0, phi_max));
                let nv = f(nr, np);
                if nv < v {
                    (v, rho, phi) = (nv, nr, np);
                    moved = true;
                }
            }
            if !moved {
                step_r *= 0.5;
                step_p *= 0.5;
            }
        }
        worst = worst.min(v);
    }
    for &phi in &phis {
        worst = worst.min(clearance_at_infinity(phi, &centers, a));
    }
    SearchResult { worst, evaluations: evals }
}

/// Whether `n` circles avoid each other and the central circle.
fn layout_is_disjoint(lambda: f64, n: usize) -> bool {
    let a = a_lambda(lambda);
    let ring = lambda_prime(lambda) - a;
    let chord = if n > 1 { 2.0 * ring * (PI / n as f64).sin() } else { f64::INFINITY };
    chord > 2.0 * a && ring > 2.0 * a
}

type CacheKey = (u64, usize, u64);

fn cache() -> &'static Mutex<HashMap<CacheKey, CoveringCertificate>> {
    static CACHE: OnceLock<Mutex<HashMap<CacheKey, CoveringCertificate>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Least `N` for which the adversarial search finds no disc meeting `D` and
/// `ℂ∖λD` without a circle inside. The certificate holds up to the search
/// resolution; results are cached per `(λ, budget, seed)`.
pub fn covering_number(lambda: f64, budget: usize, seed: u64) -> Result<CoveringCertificate> {
    if !(lambda > 1.0 && lambda.is_finite()) {
        return Err(Error::InvalidArgument(format!("separation factor must exceed 1, got {lambda}")));
    }
    let key = (lambda.to_bits(), budget, seed);
    if let Some(c) = cache().lock().unwrap().get(&key) {
        return Ok(*c);
    }
    let mut evaluations = 0;
    let mut below = None;
    for n in 1..=MAX_CIRCLES {
        let res = adversarial_search(lambda, n, budget, seed);
        evaluations += res.evaluations;
        if res.worst > 0.0 {
            if !layout_is_disjoint(lambda, n) {
                return Err(Error::Infeasible(format!("λ = {lambda}: {n} circles would overlap")));
            }
            let cert = CoveringCertificate { lambda, n, margin: res.worst, failing_margin_below: below, evaluations };
            cache().lock().unwrap().insert(key, cert);
            return Ok(cert);
        }
        below = Some(res.worst);
    }
    Err(Error::SearchExhausted(format!(
        "no covering count up to {MAX_CIRCLES} for λ = {lambda}; last worst clearance {below:?} after {evaluations} evaluations"
    )))
}

/// Clearance of a specific disc `B` for the unit-disc layout with `n`
/// circles: positive iff one circle lies inside `B`.
pub fn disc_clearance(lambda: f64, n: usize, b: &Disc) -> f64 {
    let (centers, a) = layout(lambda, n);
    let nearest = centers.iter().map(|q| q.dist(b.center)).fold(f64::INFINITY, f64::min);
    b.radius - (nearest + a)
}

/// The circles `L` for `D` with total length `A_λ(N+1)·target_gamma`: the
/// covering layout scaled to `D`, radii shrunk to `A_λ·target_gamma/(2π)`.
pub fn lj_circles(d: &Disc, lambda: f64, target_gamma: f64) -> Result<Vec<CircleArc>> {
    if !(target_gamma > 0.0 && target_gamma <= d.radius) {
        return Err(Error::InvalidArgument(format!(
            "target capacity must lie in (0, {}], got {target_gamma}",
            d.radius
        )));
    }
    let cert = covering_number(lambda, DEFAULT_SEARCH_BUDGET, DEFAULT_SEARCH_SEED)?;
    let (centers, a) = layout(lambda, cert.n);
    let radius = a_lambda(lambda) * target_gamma / TAU;
    if radius > a * d.radius {
        return Err(Error::Infeasible("circle radius exceeds the covering layout radius".into()));
    }
    centers
        .iter()
        .map(|q| CircleArc::full_circle(d.center.add(q.scale(d.radius)), radius))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constants() {
        assert_eq!(lambda_prime(3.0), 2.0);
        assert_eq!(a_lambda(3.0), 1e-3);
        assert!((a_lambda(1.5) - 0.25e-3).abs() < 1e-18);
    }

    #[test]
    fn n_is_nonincreasing_in_lambda() {
        let ns: Vec<usize> = [1.1, 1.5, 2.0, 3.0, 5.0, 10.0]
            .iter()
            .map(|&l| covering_number(l, 4000, 1).unwrap().n)
            .collect();
        assert!(ns.windows(2).all(|w| w[0] >= w[1]), "{ns:?}");
        assert!(ns[0] >= 3);
    }

    #[test]
    fn random_admissible_discs_contain_a_circle() {
        let lambda = 3.0;
        let cert = covering_number(lambda, DEFAULT_SEARCH_BUDGET, DEFAULT_SEARCH_SEED).unwrap();
        assert!(cert.failing_margin_below.map_or(true, |m| m <= 0.0));
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for _ in 0..100_000 {
            let rho = if rng.gen_bool(0.5) { rng.gen_range(0.0..6.0) } else { 6.0 * 1e3f64.powf(rng.gen::<f64>()) };
            let c = Point::from_polar(rho, rng.gen_range(0.0..TAU));
            let r = r_min(rho, lambda) * (1.0 + 1e-9) + rng.gen_range(0.0..0.5);
            let b = Disc::new(c, r).unwrap();
            assert!(disc_clearance(lambda, cert.n, &b) > 0.0, "{b:?}");
        }
    }

    #[test]
    fn one_fewer_circle_fails() {
        let cert = covering_number(2.0, 4000, 3).unwrap();
        if cert.n > 1 {
            assert!(adversarial_search(2.0, cert.n - 1, 4000, 3).worst <= 0.0);
        }
    }

    #[test]
    fn lj_layout() {
        let d = Disc::new(Point::new(3.0, -1.0), 2.0).unwrap();
        let lambda = 3.0;
        let gamma = 1.3;
        let circles = lj_circles(&d, lambda, gamma).unwrap();
        let n = covering_number(lambda, DEFAULT_SEARCH_BUDGET, DEFAULT_SEARCH_SEED).unwrap().n;
        assert_eq!(circles.len(), n + 1);
        let total: f64 = circles.iter().map(|c| c.length()).sum();
        let want = a_lambda(lambda) * (n as f64 + 1.0) * gamma;
        assert!((total - want).abs() <= 1e-12 * want);
        let outer = d.dilate(lambda_prime(lambda));
        for (i, c) in circles.iter().enumerate() {
            assert!(c.center.dist(outer.center) + c.radius <= outer.radius);
            for o in &circles[i + 1..] {
                assert!(c.center.dist(o.center) > c.radius + o.radius);
            }
        }
        assert!(lj_circles(&d, lambda, 2.5).is_err());
    }
}
