//! Experiments comparing mass, curvature and capacity on sets.

use std::collections::HashMap;
use std::sync::Mutex;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{band_ratio, BandCheck, ExperimentResult};
use crate::capacity::{lower_bound_curvature, lower_bound_opnorm, upper_bound, CurvatureBoundOptions};
use crate::curvature::{c2_cross, c2_exact, c2_monte_carlo, MIN_MC_SAMPLES};
use crate::generators::cantor::cantor_corner;
use crate::generators::family::FamilySpec;
use crate::geometry::{smallest_enclosing_disc, Disc, Point};
use crate::measure::DiscreteMeasure;
use crate::{Error, Result};

/// Largest allowed `max/min` across generations in [`cantor_scaling`].
pub const CANTOR_BAND: f64 = 3.0;
/// Relative tolerance of the self-similar decomposition.
pub const SELF_SIMILARITY_TOL: f64 = 1e-9;

/// Discs centered at the atoms and then at pairwise midpoints (at most
/// `max_centers` centers, strided evenly when there are more), with radii
/// `h·10^{k/per_decade}` up to the diameter.
pub fn sample_discs(mu: &DiscreteMeasure, max_centers: usize, per_decade: usize) -> Result<Vec<Disc>> {
    if mu.is_empty() {
        return Err(Error::EmptyInput("sample_discs"));
    }
    if max_centers == 0 || per_decade == 0 {
        return Err(Error::InvalidArgument("need at least one center and one radius per decade".into()));
    }
    let pts = mu.points();
    let n = pts.len();
    let total = n + n * (n - 1) / 2;
    let center_at = |mut idx: usize| -> Point {
        if idx < n {
            return pts[idx];
        }
        idx -= n;
        // row i holds the midpoints (i, j) for j > i
        let mut i = 0;
        while idx >= n - 1 - i {
            idx -= n - 1 - i;
            i += 1;
        }
        pts[i].midpoint(pts[i + 1 + idx])
    };
    let centers: Vec<Point> = if total <= max_centers {
        (0..total).map(center_at).collect()
    } else {
        (0..max_centers).map(|k| center_at(k * total / max_centers)).collect()
    };
    let h = mu.resolution_h();
    let diam = mu.diameter().max(h);
    let mut radii = Vec::new();
    let mut k = 0;
    loop {
        let r = h * 10f64.powf(k as f64 / per_decade as f64);
        if r > diam * (1.0 + 1e-12) {
            break;
        }
        radii.push(r);
        k += 1;
    }
    let mut out = Vec::with_capacity(centers.len() * radii.len());
    for c in &centers {
        for &r in &radii {
            out.push(Disc::new(*c, r)?);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaincParams {
    pub family: FamilySpec,
    #[serde(default = "default_centers")]
    pub max_centers: usize,
    #[serde(default = "default_per_decade")]
    pub per_decade: usize,
    /// Weight-update iterations of the curvature lower bound per disc.
    #[serde(default)]
    pub iterations: usize,
}

fn default_centers() -> usize {
    10_000
}

fn default_per_decade() -> usize {
    20
}

/// Upper bound for `γ(B ∩ E)` where each part samples its set at its own
/// resolution `h_j`: every point of `E_j` is within `h_j` of an atom, so
/// `B ∩ E` lies in the `h`-neighbourhood of the atoms within `r_B + h_j` of
/// the center. The disc `B` itself is the fallback.
fn set_upper_bound(parts: &[DiscreteMeasure], b: &Disc) -> Result<f64> {
    let mut near = Vec::new();
    let mut h: f64 = 0.0;
    for p in parts {
        let reach = b.radius + p.resolution_h();
        let before = near.len();
        near.extend(p.points().iter().filter(|q| q.dist(b.center) <= reach));
        if near.len() > before {
            h = h.max(p.resolution_h());
        }
    }
    if near.is_empty() {
        return Ok(0.0);
    }
    Ok(b.radius.min(smallest_enclosing_disc(&near)?.radius + h))
}

/// `μ(B)` against capacity bounds of `B ∩ E` over sampled discs. The
/// empirical `C₀` is the largest `μ(B)/lower(B∩E)` over even-indexed discs;
/// an odd-indexed disc is a certified violation when
/// `μ(B) > C₀·upper(B∩E)`.
pub fn mainc_check(params: &MaincParams, seed: u64) -> Result<ExperimentResult> {
    let fam = params.family.build(seed)?;
    let mu = fam.measure()?;
    let discs = sample_discs(&mu, params.max_centers, params.per_decade)?;
    let opts = CurvatureBoundOptions { iterations: params.iterations, seed, ..Default::default() };
    // many discs cut out the same atoms
    let cache: Mutex<HashMap<Vec<u32>, f64>> = Mutex::new(HashMap::new());
    let rows = discs
        .par_iter()
        .map(|b| {
            let key: Vec<u32> = mu.points().iter().enumerate().filter(|(_, p)| b.contains(**p)).map(|(i, _)| i as u32).collect();
            let sample = mu.restrict(b);
            let mass = sample.total_mass();
            let up = set_upper_bound(&fam.parts, b)?;
            if sample.is_empty() {
                return Ok((mass, 0.0, up));
            }
            if let Some(&lo) = cache.lock().unwrap().get(&key) {
                return Ok((mass, lo, up));
            }
            let lo = lower_bound_curvature(&sample, opts)?.bound;
            cache.lock().unwrap().insert(key, lo);
            Ok((mass, lo, up))
        })
        .collect::<Result<Vec<_>>>()?;

    let ratio = |m: f64, d: f64| if m == 0.0 { 0.0 } else if d == 0.0 { f64::INFINITY } else { m / d };
    let c0 = rows.iter().step_by(2).map(|r| ratio(r.0, r.1)).fold(0.0, f64::max);
    let mut res = ExperimentResult::new(
        "mainc_check",
        params,
        seed,
        &["disc", "split", "cx", "cy", "r", "mass", "lower", "upper", "mass_over_lower", "mass_over_upper"],
    );
    let mut violations = 0usize;
    let mut eval_max: f64 = 0.0;
    for (i, (b, &(mass, lo, up))) in discs.iter().zip(&rows).enumerate() {
        let split = if i % 2 == 0 { "calibration" } else { "evaluation" };
        if i % 2 == 1 {
            violations += usize::from(mass > c0 * up);
            eval_max = eval_max.max(ratio(mass, lo));
        }
        res.push(vec![
            i.into(),
            split.into(),
            b.center.x.into(),
            b.center.y.into(),
            b.radius.into(),
            mass.into(),
            lo.into(),
            up.into(),
            ratio(mass, lo).into(),
            ratio(mass, up).into(),
        ]);
    }
    res.set("c0_fitted", c0);
    res.set("c0_evaluation", eval_max);
    res.set("discs", discs.len() as f64);
    res.band(BandCheck::at_most("certified_violations", violations as f64, 0.0));
    res.band(BandCheck::at_most("c0_finite", f64::from(u8::from(!c0.is_finite())), 0.0));
    Ok(res)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CantorScalingParams {
    pub n_min: u32,
    pub n_max: u32,
    pub iterations: usize,
    /// Use Monte-Carlo curvature with this many samples instead of the
    /// exact sum.
    pub monte_carlo_samples: Option<u64>,
}

impl Default for CantorScalingParams {
    fn default() -> Self {
        Self { n_min: 2, n_max: 5, iterations: 10, monte_carlo_samples: None }
    }
}

/// `c²(μ_n)/n` and `lower(E_n)·√n` for the corner Cantor generations; both
/// must stay within [`CANTOR_BAND`].
pub fn cantor_scaling(params: &CantorScalingParams, seed: u64) -> Result<ExperimentResult> {
    if params.n_min == 0 || params.n_max < params.n_min {
        return Err(Error::InvalidArgument("need 1 ≤ n_min ≤ n_max".into()));
    }
    if let Some(s) = params.monte_carlo_samples {
        if s < MIN_MC_SAMPLES {
            return Err(Error::InvalidArgument(format!("at least {MIN_MC_SAMPLES} samples required")));
        }
    }
    let opts = CurvatureBoundOptions { iterations: params.iterations, seed, ..Default::default() };
    let mut res = ExperimentResult::new(
        "cantor_scaling",
        params,
        seed,
        &["n", "c2", "c2_over_n", "lower_bound", "bound_times_sqrt_n"],
    );
    let (mut per_n, mut scaled) = (Vec::new(), Vec::new());
    for n in params.n_min..=params.n_max {
        let mu = cantor_corner(n)?.measure;
        let c2 = match params.monte_carlo_samples {
            Some(s) => c2_monte_carlo(&mu, s, seed)?.value,
            None => c2_exact(&mu)?.value,
        };
        let lower = lower_bound_curvature(&mu, opts)?.bound;
        let nf = n as f64;
        per_n.push(c2 / nf);
        scaled.push(lower * nf.sqrt());
        res.push(vec![n.into(), c2.into(), (c2 / nf).into(), lower.into(), (lower * nf.sqrt()).into()]);
    }
    res.band(BandCheck::at_most("c2_over_n_band", band_ratio(&per_n), CANTOR_BAND));
    res.band(BandCheck::at_most("bound_times_sqrt_n_band", band_ratio(&scaled), CANTOR_BAND));
    Ok(res)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SelfSimilarityParams {
    pub n_max: u32,
}

impl Default for SelfSimilarityParams {
    fn default() -> Self {
        Self { n_max: 4 }
    }
}

/// Splits `μ_{n+1}` into its four quarter pieces. Each is `μ_n` shrunk by
/// 1/4 in space and mass, so `c²` of a piece is `(1/4)³·16·c²(μ_n)` and the
/// four together carry `c²(μ_n)`. The remainder is the cross curvature.
pub fn self_similarity_audit(params: &SelfSimilarityParams, seed: u64) -> Result<ExperimentResult> {
    let mut res = ExperimentResult::new(
        "self_similarity",
        params,
        seed,
        &["n", "c2_n", "within", "predicted_within", "within_rel_err", "cross", "c2_next", "split_rel_err"],
    );
    let (mut worst_within, mut worst_split, mut min_cross): (f64, f64, f64) = (0.0, 0.0, f64::INFINITY);
    for n in 0..params.n_max {
        let c2_n = c2_exact(&cantor_corner(n)?.measure)?.value;
        let next = cantor_corner(n + 1)?;
        let parts = next.quarter_parts()?;
        let within: f64 = parts.iter().map(|p| c2_exact(p).map(|r| r.value)).sum::<Result<f64>>()?;
        let predicted = 4.0 * 0.25f64.powi(3) * 16.0 * c2_n;
        let cross = c2_cross(&parts)?.value;
        let c2_next = c2_exact(&next.measure)?.value;
        let rel = |a: f64, b: f64| if a == b { 0.0 } else { (a - b).abs() / a.abs().max(b.abs()) };
        let within_err = rel(within, predicted);
        let split_err = rel(within + cross, c2_next);
        worst_within = worst_within.max(within_err);
        worst_split = worst_split.max(split_err);
        min_cross = min_cross.min(cross);
        res.push(vec![
            n.into(),
            c2_n.into(),
            within.into(),
            predicted.into(),
            within_err.into(),
            cross.into(),
            c2_next.into(),
            split_err.into(),
        ]);
    }
    res.band(BandCheck::at_most("within_rel_err", worst_within, SELF_SIMILARITY_TOL));
    res.band(BandCheck::at_most("split_rel_err", worst_split, SELF_SIMILARITY_TOL));
    res.band(BandCheck::at_least("min_cross", min_cross, 0.0));
    Ok(res)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CapacitySanityParams {
    pub family: FamilySpec,
    #[serde(default)]
    pub iterations: Option<usize>,
}

/// Both lower bounds and the upper bound for each part and for the union,
/// with the model capacity where the family has one.
pub fn capacity_sanity(params: &CapacitySanityParams, seed: u64) -> Result<ExperimentResult> {
    let fam = params.family.build(seed)?;
    let mut opts = CurvatureBoundOptions { seed, ..Default::default() };
    if let Some(it) = params.iterations {
        opts.iterations = it;
    }
    let mut samples: Vec<(String, DiscreteMeasure, Option<f64>)> = fam
        .parts
        .iter()
        .enumerate()
        .map(|(j, p)| (j.to_string(), p.clone(), fam.part_capacities.as_ref().map(|c| c[j])))
        .collect();
    if fam.parts.len() > 1 {
        samples.push(("union".into(), fam.measure()?, None));
    }
    let rows = samples
        .par_iter()
        .map(|(_, mu, _)| {
            Ok((
                lower_bound_curvature(mu, opts)?.bound,
                lower_bound_opnorm(mu, None, None, seed)?.bound,
                upper_bound(mu)?,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut res = ExperimentResult::new(
        "capacity_sanity",
        params,
        seed,
        &["part", "atoms", "mass", "lower_curvature", "lower_opnorm", "upper", "model"],
    );
    let mut inverted = 0usize;
    for ((label, mu, model), (lc, lo, up)) in samples.iter().zip(&rows) {
        inverted += usize::from(lc > up) + usize::from(lo > up);
        res.push(vec![
            label.clone().into(),
            mu.len().into(),
            mu.total_mass().into(),
            (*lc).into(),
            (*lo).into(),
            (*up).into(),
            model.unwrap_or(f64::NAN).into(),
        ]);
    }
    res.band(BandCheck::at_most("lower_above_upper", inverted as f64, 0.0));
    Ok(res)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sampler_centers_and_radii() {
        let mu = DiscreteMeasure::uniform(vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(0.0, 1.0)], 1.0, 0.1)
            .unwrap();
        let d = sample_discs(&mu, 100, 1).unwrap();
        // 3 atoms + 3 midpoints, radii 0.1 and 1
        assert_eq!(d.len(), 12);
        assert_eq!(d[0].radius, 0.1);
        assert_eq!(d[6 * 2 - 1].center, Point::new(0.5, 0.5));
        let capped = sample_discs(&mu, 2, 1).unwrap();
        assert_eq!(capped.len(), 4);
    }

    #[test]
    fn mainc_on_a_segment() {
        let p = MaincParams {
            family: FamilySpec::Segment { length: 1.0, atoms: 16 },
            max_centers: 200,
            per_decade: 4,
            iterations: 0,
        };
        let r = mainc_check(&p, 0).unwrap();
        assert!(r.passed(), "{:?}", r.bands);
        assert!(r.summary["c0_fitted"].is_finite());
        assert!(r.summary["c0_fitted"] < 50.0, "{:?}", r.summary);
    }

    #[test]
    fn self_similarity_small() {
        let r = self_similarity_audit(&SelfSimilarityParams { n_max: 3 }, 0).unwrap();
        assert!(r.passed(), "{:?}", r.bands);
    }

    #[test]
    fn sanity_on_segment() {
        let p = CapacitySanityParams { family: FamilySpec::Segment { length: 4.0, atoms: 16 }, iterations: Some(20) };
        let r = capacity_sanity(&p, 0).unwrap();
        assert!(r.passed());
        let up = r.column("upper").unwrap();
        assert_eq!(up[0], 2.0);
    }
}
