//! Experiments on the truncated Cauchy operator.

use std::f64::consts::SQRT_2;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{band_ratio, BandCheck, ExperimentResult};
use crate::cauchy::{decade_grid, energy_of_one, max_norm_over_grid};
use crate::curvature::c2_truncated;
use crate::generators::cantor::cantor_corner;
use crate::generators::chain::{bead_chain_on_line, random_radii, PartShape};
use crate::generators::family::FamilySpec;
use crate::generators::squares::{david_semmes_ex1, StagedOptions};
use crate::geometry::{CircleArc, Point, Segment};
use crate::measure::DiscreteMeasure;
use crate::{Error, Result};

/// Largest allowed `max/min` of the normalized energies, and of the norm
/// bounds in the constant-gap control.
pub const DIVERGENCE_BAND: f64 = 3.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OpnormDivergenceParams {
    /// Stage depths with growing gaps.
    pub nk: Vec<u32>,
    /// Stage depths with constant gaps.
    pub control_nk: Vec<u32>,
    pub include_initial: bool,
    pub options: StagedOptions,
}

impl Default for OpnormDivergenceParams {
    fn default() -> Self {
        Self {
            nk: vec![0, 2, 5, 9],
            control_nk: vec![0, 2, 4, 6, 8],
            include_initial: false,
            options: StagedOptions::default(),
        }
    }
}

struct StageRow {
    k: usize,
    n_k: u32,
    gap: u32,
    mass: f64,
    energy: f64,
    normalized: f64,
    norm_lower: f64,
}

/// For `k = 0..K−1`: `E_k = ‖C(1)‖²_{L²(μ|Q_k)}`, its normalization
/// `E_k·4^{N_k}/(N_{k+1}−N_k)`, and the norm bound `√(E_k/μ(Q_k))`.
fn stage_energies(nk: &[u32], include_initial: bool, options: StagedOptions) -> Result<Vec<StageRow>> {
    let fam = david_semmes_ex1(nk, include_initial, options)?;
    (0..nk.len() - 1)
        .into_par_iter()
        .map(|k| {
            let mu = fam.measure_in(&fam.chosen[k])?;
            // below the smallest atom spacing: nothing is cut at the inner scale
            let eps = mu.resolution_h() / SQRT_2;
            let energy = energy_of_one(&mu, eps)?;
            let mass = mu.total_mass();
            let gap = nk[k + 1] - nk[k];
            Ok(StageRow {
                k,
                n_k: nk[k],
                gap,
                mass,
                energy,
                normalized: energy * 4f64.powi(nk[k] as i32) / gap as f64,
                norm_lower: (energy / mass).sqrt(),
            })
        })
        .collect()
}

/// Energy of the indicator of the surviving squares, on a run with growing
/// gaps and a control run with constant gaps.
pub fn opnorm_divergence_ex1(params: &OpnormDivergenceParams, seed: u64) -> Result<ExperimentResult> {
    let main = stage_energies(&params.nk, params.include_initial, params.options)?;
    let control = stage_energies(&params.control_nk, params.include_initial, params.options)?;
    let mut res = ExperimentResult::new(
        "opnorm_divergence_ex1",
        params,
        seed,
        &["run", "k", "n_k", "gap", "mass", "energy", "normalized_energy", "norm_lower_bound"],
    );
    for (run, rows) in [("growing", &main), ("control", &control)] {
        for r in rows {
            res.push(vec![
                run.into(),
                r.k.into(),
                r.n_k.into(),
                r.gap.into(),
                r.mass.into(),
                r.energy.into(),
                r.normalized.into(),
                r.norm_lower.into(),
            ]);
        }
    }
    let normalized: Vec<f64> = main.iter().map(|r| r.normalized).collect();
    let floor = normalized.iter().copied().fold(f64::INFINITY, f64::min);
    let increasing = main.windows(2).all(|w| w[1].norm_lower > w[0].norm_lower);
    let control_norms: Vec<f64> = control.iter().map(|r| r.norm_lower).collect();
    res.set("normalized_floor", floor);
    res.set("growing_last_over_first", main.last().unwrap().norm_lower / main[0].norm_lower);
    res.band(BandCheck::above("normalized_energy_floor", floor, 0.0));
    res.band(BandCheck::at_most("normalized_energy_band", band_ratio(&normalized), DIVERGENCE_BAND));
    res.band(BandCheck::at_least("norm_bound_strictly_increasing", f64::from(u8::from(increasing)), 1.0));
    res.band(BandCheck::at_most("control_norm_band", band_ratio(&control_norms), DIVERGENCE_BAND));
    Ok(res)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CauchyIndependenceParams {
    pub family: FamilySpec,
    /// Truncation scales in the units of the family; the decade grid of the
    /// union when absent.
    #[serde(default)]
    pub eps: Option<Vec<f64>>,
}

/// `max_j ‖C_{μ_j}‖`, `‖C_μ‖` and their ratio. Norms are computed after
/// dilating the whole family to unit diameter and rescaled back, so the
/// outer cutoff of the truncation stays outside the support.
pub fn cauchy_independence_check(params: &CauchyIndependenceParams, seed: u64) -> Result<ExperimentResult> {
    let fam = params.family.build(seed)?;
    let union = fam.measure()?;
    let diam = union.diameter();
    if !(diam > 0.0) {
        return Err(Error::InvalidArgument("family support is a single point".into()));
    }
    let s = 1.0 / diam;
    let grid: Vec<f64> = match &params.eps {
        Some(g) => g.iter().map(|e| e * s).collect(),
        None => decade_grid(&union).iter().map(|e| e * s).collect(),
    };
    let part_norms = fam
        .parts
        .par_iter()
        .map(|p| Ok(max_norm_over_grid(&p.dilate(s)?, &grid, seed)?.0 * s))
        .collect::<Result<Vec<_>>>()?;
    let (total, eps_at) = max_norm_over_grid(&union.dilate(s)?, &grid, seed)?;
    let total = total * s;
    let max_part = part_norms.iter().copied().fold(0.0, f64::max);
    let mut res = ExperimentResult::new("cauchy_independence_check", params, seed, &["part", "atoms", "mass", "norm"]);
    for (j, (p, n)) in fam.parts.iter().zip(&part_norms).enumerate() {
        res.push(vec![j.into(), p.len().into(), p.total_mass().into(), (*n).into()]);
    }
    res.push(vec!["union".into(), union.len().into(), union.total_mass().into(), total.into()]);
    res.set("max_part_norm", max_part);
    res.set("union_norm", total);
    res.set("independence_ratio", total / max_part);
    res.set("eps_at_max", eps_at / s);
    // the norm of a sum dominates the norm of each compression, up to the
    // power-iteration tolerance
    res.band(BandCheck::at_least("union_dominates_parts", total / max_part, 1.0 - 1e-6));
    Ok(res)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnergyIdentityParams {
    pub cloud_atoms: usize,
}

impl Default for EnergyIdentityParams {
    fn default() -> Self {
        Self { cloud_atoms: 120 }
    }
}

fn unit_diameter(mu: DiscreteMeasure, label: &str) -> Result<DiscreteMeasure> {
    let d = mu.diameter();
    Ok(mu.dilate(1.0 / d)?.with_label(label))
}

fn cloud(n: usize, seed: u64) -> Result<DiscreteMeasure> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let pts: Vec<Point> = (0..n).map(|_| Point::new(rng.gen(), rng.gen())).collect();
    DiscreteMeasure::uniform(pts, 1.0, (1.0 / n as f64).sqrt())
}

/// Calibration and evaluation corpora over the same kinds of measure. The
/// normalized residual creeps up as the atoms get denser, so calibration
/// takes the finest instance of each kind and evaluation the coarser ones,
/// with fresh seeds.
fn corpora(params: &EnergyIdentityParams, seed: u64) -> Result<(Vec<DiscreteMeasure>, Vec<DiscreteMeasure>)> {
    let circle = |m| DiscreteMeasure::arc_length(&CircleArc::full_circle(Point::ORIGIN, 1.0)?, m);
    let arc = |m| DiscreteMeasure::arc_length(&CircleArc::new(Point::ORIGIN, 1.0, 0.0, 2.0)?, m);
    let seg = |m| DiscreteMeasure::segment_length(&Segment::new(Point::ORIGIN, Point::new(1.0, 0.0)), m);
    let chain = |n, s| -> Result<DiscreteMeasure> {
        bead_chain_on_line(&random_radii(n, 0.5, 2.0, s), 2.0, PartShape::CircleArc, 8, s)?.measure()
    };
    let fresh = seed ^ 0x5eed;
    let calibration = vec![
        unit_diameter(cantor_corner(4)?.measure, "cantor_4")?,
        unit_diameter(circle(96)?, "circle_96")?,
        unit_diameter(arc(96)?, "arc_96")?,
        unit_diameter(seg(96)?, "segment_96")?,
        unit_diameter(cloud(2 * params.cloud_atoms, seed)?, "cloud_fine")?,
        unit_diameter(chain(10, seed)?, "chain_10")?,
    ];
    let evaluation = vec![
        unit_diameter(cantor_corner(2)?.measure, "cantor_2")?,
        unit_diameter(cantor_corner(3)?.measure, "cantor_3")?,
        unit_diameter(circle(48)?, "circle_48")?,
        unit_diameter(arc(64)?, "arc_64")?,
        unit_diameter(seg(48)?, "segment_48")?,
        unit_diameter(seg(80)?, "segment_80")?,
        unit_diameter(cloud(params.cloud_atoms, fresh)?, "cloud")?,
        unit_diameter(chain(6, fresh)?, "chain_6")?,
        unit_diameter(chain(10, fresh)?, "chain_10b")?,
    ];
    Ok((calibration, evaluation))
}

/// Residual `|‖C_ε(1)‖² − c_ε²/6| / (‖μ‖·g²)` over the decade grid, with
/// `g` the growth constant. `κ` is the largest calibration value; every
/// evaluation value must stay at or below it.
pub fn energy_identity_check(params: &EnergyIdentityParams, seed: u64) -> Result<ExperimentResult> {
    let (cal, eval) = corpora(params, seed)?;
    let measure_rows = |corpus: &[DiscreteMeasure]| -> Result<Vec<(String, f64, f64, f64, f64, f64, f64)>> {
        let mut out = Vec::new();
        for mu in corpus {
            let g = mu.growth_constant()?.growth_constant;
            let mass = mu.total_mass();
            let rows = decade_grid(mu)
                .into_par_iter()
                .map(|eps| {
                    let e = energy_of_one(mu, eps)?;
                    let c2 = c2_truncated(mu, eps)?.value;
                    let resid = (e - c2 / 6.0).abs() / mass;
                    Ok((mu.label().unwrap_or("").to_string(), eps, e, c2, g, resid, resid / (g * g)))
                })
                .collect::<Result<Vec<_>>>()?;
            out.extend(rows);
        }
        Ok(out)
    };
    let cal_rows = measure_rows(&cal)?;
    let eval_rows = measure_rows(&eval)?;
    let kappa = cal_rows.iter().map(|r| r.6).fold(0.0, f64::max);
    let mut res = ExperimentResult::new(
        "energy_identity",
        params,
        seed,
        &["split", "measure", "eps", "energy", "c2_eps", "growth", "residual_over_mass", "residual_over_mass_g2"],
    );
    let mut failures = 0usize;
    let mut worst: f64 = 0.0;
    for (split, rows) in [("calibration", &cal_rows), ("evaluation", &eval_rows)] {
        for (label, eps, e, c2, g, resid, normed) in rows {
            if split == "evaluation" {
                failures += usize::from(*normed > kappa);
                worst = worst.max(*normed);
            }
            res.push(vec![
                split.into(),
                label.clone().into(),
                (*eps).into(),
                (*e).into(),
                (*c2).into(),
                (*g).into(),
                (*resid).into(),
                (*normed).into(),
            ]);
        }
    }
    res.set("kappa", kappa);
    res.set("evaluation_max", worst);
    res.band(BandCheck::at_most("evaluation_failures", failures as f64, 0.0));
    Ok(res)
}
