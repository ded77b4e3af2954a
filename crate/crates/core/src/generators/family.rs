//! Serializable family descriptions and the manifest of a built family.

use serde::{Deserialize, Serialize};

use super::cantor::cantor_corner;
use super::chain::{bead_chain_on_line, random_radii, PartShape};
use super::squares::{david_semmes_ex1, ex2_with_discs, grid_prop53, PartSet, SquareFamily, StagedOptions};
use crate::capacity::{exact_capacity_model, ModelShape};
use crate::geometry::{CircleArc, Disc, Point, Segment};
use crate::measure::DiscreteMeasure;
use crate::{Error, Result};

fn default_atoms() -> usize {
    16
}

fn default_true() -> bool {
    true
}

/// A generator with its parameters. Random families draw from the run seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum FamilySpec {
    Segment {
        length: f64,
        #[serde(default = "default_atoms")]
        atoms: usize,
    },
    Circle {
        radius: f64,
        #[serde(default = "default_atoms")]
        atoms: usize,
    },
    /// Two parallel horizontal segments of the given length, `gap` apart.
    TwoSegments {
        length: f64,
        gap: f64,
        #[serde(default = "default_atoms")]
        atoms: usize,
    },
    CantorCorner {
        n: u32,
    },
    /// Cantor generation `n` split into its four quarter parts.
    CantorQuarters {
        n: u32,
    },
    BeadChain {
        n: usize,
        radius_lo: f64,
        radius_hi: f64,
        lambda: f64,
        shape: PartShape,
        #[serde(default = "default_atoms")]
        atoms: usize,
    },
    StagedSquares {
        nk: Vec<u32>,
        #[serde(default = "default_true")]
        include_initial: bool,
        #[serde(default)]
        options: Option<StagedOptions>,
    },
    StagedSquaresWithDiscs {
        nk: Vec<u32>,
        #[serde(default)]
        options: Option<StagedOptions>,
    },
    Grid {
        ell: f64,
        n: usize,
        #[serde(default = "default_atoms")]
        atoms_per_circle: usize,
    },
}

/// A built family: the parts `μ_j`, the discs `D_j` they sit in (when the
/// construction has them), the separation factor, and the capacity of each
/// part when it has a model value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Family {
    pub spec: FamilySpec,
    pub seed: u64,
    pub lambda: Option<f64>,
    pub discs: Vec<Disc>,
    pub parts: Vec<DiscreteMeasure>,
    pub part_capacities: Option<Vec<f64>>,
}

impl Family {
    pub fn measure(&self) -> Result<DiscreteMeasure> {
        DiscreteMeasure::sum(&self.parts)
    }
}

fn from_squares(spec: &FamilySpec, seed: u64, f: SquareFamily) -> Family {
    let discs = f.parts.iter().map(|p| p.set.enclosing_disc()).collect();
    let lambda = f.parts.iter().all(|p| matches!(p.set, PartSet::Disc { .. })).then_some(2.0);
    Family {
        spec: spec.clone(),
        seed,
        lambda,
        discs,
        parts: f.measures(),
        part_capacities: None,
    }
}

impl FamilySpec {
    pub fn build(&self, seed: u64) -> Result<Family> {
        let plain = |parts: Vec<DiscreteMeasure>, caps: Option<Vec<f64>>| Family {
            spec: self.clone(),
            seed,
            lambda: None,
            discs: Vec::new(),
            parts,
            part_capacities: caps,
        };
        match self {
            FamilySpec::Segment { length, atoms } => {
                let seg = Segment::new(Point::ORIGIN, Point::new(*length, 0.0));
                let cap = exact_capacity_model(ModelShape::Segment { length: *length })?.value;
                Ok(plain(vec![DiscreteMeasure::segment_length(&seg, *atoms)?], Some(vec![cap])))
            }
            FamilySpec::Circle { radius, atoms } => {
                let arc = CircleArc::full_circle(Point::ORIGIN, *radius)?;
                let cap = exact_capacity_model(ModelShape::Circle { radius: *radius })?.value;
                Ok(plain(vec![DiscreteMeasure::arc_length(&arc, *atoms)?], Some(vec![cap])))
            }
            FamilySpec::TwoSegments { length, gap, atoms } => {
                if !(*gap > 0.0) {
                    return Err(Error::InvalidArgument(format!("gap must be positive, got {gap}")));
                }
                let a = Segment::new(Point::ORIGIN, Point::new(*length, 0.0));
                let b = Segment::new(Point::new(0.0, *gap), Point::new(*length, *gap));
                let cap = exact_capacity_model(ModelShape::Segment { length: *length })?.value;
                Ok(plain(
                    vec![DiscreteMeasure::segment_length(&a, *atoms)?, DiscreteMeasure::segment_length(&b, *atoms)?],
                    Some(vec![cap, cap]),
                ))
            }
            FamilySpec::CantorCorner { n } => Ok(plain(vec![cantor_corner(*n)?.measure], None)),
            FamilySpec::CantorQuarters { n } => Ok(plain(cantor_corner(*n)?.quarter_parts()?, None)),
            FamilySpec::BeadChain { n, radius_lo, radius_hi, lambda, shape, atoms } => {
                if !(*radius_lo > 0.0 && radius_hi > radius_lo) {
                    return Err(Error::InvalidArgument(format!(
                        "radius range must satisfy 0 < lo < hi, got [{radius_lo}, {radius_hi})"
                    )));
                }
                let radii = random_radii(*n, *radius_lo, *radius_hi, seed);
                let chain = bead_chain_on_line(&radii, *lambda, *shape, *atoms, seed)?;
                Ok(Family {
                    spec: self.clone(),
                    seed,
                    lambda: Some(*lambda),
                    part_capacities: chain.part_capacities(),
                    discs: chain.discs,
                    parts: chain.parts,
                })
            }
            FamilySpec::StagedSquares { nk, include_initial, options } => {
                let f = david_semmes_ex1(nk, *include_initial, options.unwrap_or_default())?;
                Ok(from_squares(self, seed, f))
            }
            FamilySpec::StagedSquaresWithDiscs { nk, options } => {
                Ok(from_squares(self, seed, ex2_with_discs(nk, options.unwrap_or_default())?))
            }
            FamilySpec::Grid { ell, n, atoms_per_circle } => {
                let (f, _) = grid_prop53(*ell, *n, *atoms_per_circle)?;
                let mut fam = from_squares(self, seed, f);
                fam.part_capacities = Some(
                    fam.discs
                        .iter()
                        .map(|d| exact_capacity_model(ModelShape::Circle { radius: d.radius }).map(|m| m.value))
                        .collect::<Result<_>>()?,
                );
                Ok(fam)
            }
        }
    }
}
