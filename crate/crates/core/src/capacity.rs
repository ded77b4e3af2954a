//! Two-sided numerical bounds for analytic capacity `γ(F)` of a sampled set.
//!
//! Lower bounds exhibit a measure `μ` on the sample with linear growth at
//! most 1 and either `c²(μ) ≤ ‖μ‖` or `‖C_μ‖ ≤ 1` on a truncation grid, and
//! report `κ·‖μ‖` with a fixed method constant `κ`. The comparability
//! constants between these sups and `γ` are not explicit; the method
//! constants below are conservative choices that keep both bounds under the
//! exact capacities of segments and discs.
//!
//! The upper bound is the radius of the smallest enclosing disc, using
//! monotonicity of `γ` and `γ(D(x,r)) = r`.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::cauchy::{decade_grid, max_norm_over_grid};
use crate::curvature::{c2_and_gradient, c2_monte_carlo, DEFAULT_TRIPLE_BUDGET};
use crate::geometry::{smallest_enclosing_disc, Disc};
use crate::measure::DiscreteMeasure;
use crate::{Error, Result};

/// Multiplier applied to the mass of the curvature witness.
pub const CURVATURE_METHOD_CONSTANT: f64 = 0.5;
/// Multiplier applied to the mass of the operator-norm witness.
pub const OPNORM_METHOD_CONSTANT: f64 = 0.5;
/// Default number of multiplicative-weight iterations.
pub const DEFAULT_ITERATIONS: usize = 200;
/// Step size `η` of the multiplicative update.
pub const DEFAULT_STEP: f64 = 0.1;
/// Monte-Carlo sample count used when a sample is too large for exact
/// curvature.
pub const FALLBACK_MC_SAMPLES: u64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LowerMethod {
    Curvature,
    OperatorNorm,
    ExactModel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UpperMethod {
    EnclosingDisc,
    ExactModel,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CapacityBounds {
    pub lower: f64,
    pub upper: f64,
    pub lower_method: LowerMethod,
    pub upper_method: UpperMethod,
}

/// Shapes with a known capacity value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum ModelShape {
    Disc { radius: f64 },
    Segment { length: f64 },
    Circle { radius: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelCapacity {
    pub value: f64,
    /// True when `value` is only comparable to `γ` (a length proxy), not
    /// equal to it.
    pub comparable_only: bool,
}

/// `γ` of a disc is its radius and of a segment a quarter of its length. A
/// circle gets the proxy `H¹/4`, flagged as comparable only.
pub fn exact_capacity_model(shape: ModelShape) -> Result<ModelCapacity> {
    let (size, value, comparable_only) = match shape {
        ModelShape::Disc { radius } => (radius, radius, false),
        ModelShape::Segment { length } => (length, length / 4.0, false),
        ModelShape::Circle { radius } => (radius, std::f64::consts::TAU * radius / 4.0, true),
    };
    if !(size > 0.0 && size.is_finite()) {
        return Err(Error::InvalidArgument(format!("model size must be positive, got {size}")));
    }
    Ok(ModelCapacity { value, comparable_only })
}

/// A lower bound with the feasible measure that certifies it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LowerBound {
    pub bound: f64,
    pub method: LowerMethod,
    pub witness: DiscreteMeasure,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvatureBoundOptions {
    pub iterations: usize,
    pub step: f64,
    pub seed: u64,
}

impl Default for CurvatureBoundOptions {
    fn default() -> Self {
        Self { iterations: DEFAULT_ITERATIONS, step: DEFAULT_STEP, seed: 0 }
    }
}

fn curvature_of(mu: &DiscreteMeasure, seed: u64) -> Result<(f64, Option<Vec<f64>>)> {
    if (mu.len() as f64).powi(3) <= DEFAULT_TRIPLE_BUDGET {
        let (c2, g) = c2_and_gradient(mu, 0.0)?;
        Ok((c2, Some(g)))
    } else {
        Ok((c2_monte_carlo(mu, FALLBACK_MC_SAMPLES, seed)?.value, None))
    }
}

/// Largest `t` with `g(tμ) ≤ 1` and `c²(tμ) ≤ ‖tμ‖`, from `g(tμ) = t·g(μ)`
/// and `c²(tμ) = t³c²(μ)`.
fn feasible_scale(mass: f64, growth: f64, c2: f64) -> f64 {
    let by_growth = 1.0 / growth;
    if c2 > 0.0 {
        by_growth.min((mass / c2).sqrt())
    } else {
        by_growth
    }
}

/// Curvature lower bound. Starts from uniform weights and alternates a
/// multiplicative update `w_i ← w_i·exp(−η·∂_i c² / mean ∂c²)` with the
/// exact feasibility rescaling; the best feasible mass seen is kept, so the
/// bound is valid at every iteration.
///
/// Samples too large for exact curvature use a seeded Monte-Carlo estimate
/// and skip the weight updates.
pub fn lower_bound_curvature(sample: &DiscreteMeasure, opts: CurvatureBoundOptions) -> Result<LowerBound> {
    if sample.is_empty() {
        return Err(Error::EmptyInput("lower_bound_curvature"));
    }
    let n = sample.len();
    let mass0 = sample.total_mass();
    let mut mu = sample.with_weights(vec![mass0 / n as f64; n])?;
    let mut best: Option<(f64, DiscreteMeasure)> = None;
    for it in 0..=opts.iterations {
        let growth = mu.growth_constant()?.growth_constant;
        let (c2, grad) = curvature_of(&mu, opts.seed)?;
        let mass = mu.total_mass();
        let t = feasible_scale(mass, growth, c2);
        if best.as_ref().map_or(true, |b| t * mass > b.0) {
            best = Some((t * mass, mu.scale(t)?));
        }
        let Some(grad) = grad else { break };
        if it == opts.iterations {
            break;
        }
        let mean = grad.iter().sum::<f64>() / n as f64;
        if !(mean > 0.0) {
            break;
        }
        let w: Vec<f64> =
            mu.weights().iter().zip(&grad).map(|(w, g)| w * (-opts.step * g / mean).exp()).collect();
        mu = mu.with_weights(w)?;
    }
    let (mass, witness) = best.expect("loop runs at least once");
    Ok(LowerBound { bound: CURVATURE_METHOD_CONSTANT * mass, method: LowerMethod::Curvature, witness })
}

/// Operator-norm lower bound. Scales `μ` (uniform weights unless `weights`
/// is given) so that its growth constant and the largest truncated Cauchy
/// norm over `eps_grid` are both at most 1.
///
/// The norm computation is done on a copy dilated to unit diameter, so the
/// outer cutoff `1/ε` of the truncation never bites and the bound scales
/// with the sample. `eps_grid` is given in the units of the sample; `None`
/// selects [`decade_grid`].
pub fn lower_bound_opnorm(
    sample: &DiscreteMeasure,
    eps_grid: Option<&[f64]>,
    weights: Option<Vec<f64>>,
    seed: u64,
) -> Result<LowerBound> {
    if sample.is_empty() {
        return Err(Error::EmptyInput("lower_bound_opnorm"));
    }
    let n = sample.len();
    let weights = weights.unwrap_or_else(|| vec![sample.total_mass() / n as f64; n]);
    let mu = sample.with_weights(weights)?;
    let growth = mu.growth_constant()?.growth_constant;
    let diam = mu.diameter();
    let norm = if diam > 0.0 {
        let grid = match eps_grid {
            Some(g) => g.to_vec(),
            None => decade_grid(&mu),
        };
        let unit = mu.dilate(1.0 / diam)?;
        let unit_grid: Vec<f64> = grid.iter().map(|e| e / diam).collect();
        // C_{sμ} has norm ‖C_μ‖/s when the points are dilated by s
        max_norm_over_grid(&unit, &unit_grid, seed)?.0 / diam
    } else {
        0.0
    };
    let t = if norm > 0.0 { (1.0 / growth).min(1.0 / norm) } else { 1.0 / growth };
    let witness = mu.scale(t)?;
    let bound = OPNORM_METHOD_CONSTANT * witness.total_mass();
    Ok(LowerBound { bound, method: LowerMethod::OperatorNorm, witness })
}

/// Radius of the smallest disc containing the sample.
pub fn upper_bound(sample: &DiscreteMeasure) -> Result<f64> {
    Ok(smallest_enclosing_disc(sample.points())?.radius)
}

/// Curvature lower bound paired with the enclosing-disc upper bound.
pub fn bounds(sample: &DiscreteMeasure, opts: CurvatureBoundOptions) -> Result<CapacityBounds> {
    let lower = lower_bound_curvature(sample, opts)?.bound;
    Ok(CapacityBounds {
        lower,
        upper: upper_bound(sample)?,
        lower_method: LowerMethod::Curvature,
        upper_method: UpperMethod::EnclosingDisc,
    })
}

fn bounds_or_zero(sample: &DiscreteMeasure, opts: CurvatureBoundOptions) -> Result<CapacityBounds> {
    if sample.is_empty() {
        return Ok(CapacityBounds {
            lower: 0.0,
            upper: 0.0,
            lower_method: LowerMethod::Curvature,
            upper_method: UpperMethod::EnclosingDisc,
        });
    }
    bounds(sample, opts)
}

/// One row of a capacity profile: a disc `B` and either one part
/// (`part = Some(j)`) or the union (`part = None`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileRow {
    pub disc_index: usize,
    pub disc: Disc,
    pub part: Option<usize>,
    pub mass: f64,
    pub bounds: CapacityBounds,
}

/// Per-disc summary of the two comparisons `μ(B)` vs `γ(B∩E)` and
/// `Σ_j γ(B∩E_j)` vs `γ(B∩E)`.
///
/// `*_upper` ratios put upper bounds in the numerator and lower bounds in
/// the denominator, so they bound the true ratio from above. `*_certified`
/// ratios do the opposite and bound it from below: a value above a
/// declared constant is a certified violation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileRatios {
    pub disc_index: usize,
    pub mass_ratio_upper: f64,
    pub mass_ratio_certified: f64,
    pub additivity_ratio_upper: f64,
    pub additivity_ratio_certified: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapacityProfile {
    pub rows: Vec<ProfileRow>,
    pub ratios: Vec<ProfileRatios>,
}

fn ratio(num: f64, den: f64) -> f64 {
    if num == 0.0 {
        0.0
    } else if den == 0.0 {
        f64::INFINITY
    } else {
        num / den
    }
}

/// Capacity bounds of `B ∩ E` and each `B ∩ E_j` for every disc `B`.
pub fn capacity_profile(
    parts: &[DiscreteMeasure],
    discs: &[Disc],
    opts: CurvatureBoundOptions,
) -> Result<CapacityProfile> {
    if parts.is_empty() {
        return Err(Error::EmptyInput("capacity_profile parts"));
    }
    let union = DiscreteMeasure::sum(parts)?;
    let mut rows = Vec::new();
    let mut ratios = Vec::new();
    for (b_idx, b) in discs.iter().enumerate() {
        let whole_sample = union.restrict(b);
        let whole = bounds_or_zero(&whole_sample, opts)?;
        let mass = whole_sample.total_mass();
        rows.push(ProfileRow { disc_index: b_idx, disc: *b, part: None, mass, bounds: whole });
        let (mut sum_lower, mut sum_upper) = (0.0, 0.0);
        for (j, part) in parts.iter().enumerate() {
            let s = part.restrict(b);
            let pb = bounds_or_zero(&s, opts)?;
            sum_lower += pb.lower;
            sum_upper += pb.upper;
            rows.push(ProfileRow { disc_index: b_idx, disc: *b, part: Some(j), mass: s.total_mass(), bounds: pb });
        }
        ratios.push(ProfileRatios {
            disc_index: b_idx,
            mass_ratio_upper: ratio(mass, whole.lower),
            mass_ratio_certified: ratio(mass, whole.upper),
            additivity_ratio_upper: ratio(sum_upper, whole.lower),
            additivity_ratio_certified: ratio(sum_lower, whole.upper),
        });
    }
    Ok(CapacityProfile { rows, ratios })
}

impl CapacityProfile {
    /// One CSV line per `(B, part)`; the union rows have an empty part.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "disc,cx,cy,r,part,mass,lower_curvature,upper_enclosing_disc\n",
        );
        for r in &self.rows {
            let part = r.part.map(|p| p.to_string()).unwrap_or_default();
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                r.disc_index, r.disc.center.x, r.disc.center.y, r.disc.radius, part, r.mass, r.bounds.lower, r.bounds.upper
            );
        }
        out
    }
}
