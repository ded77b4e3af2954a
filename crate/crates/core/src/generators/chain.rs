//! Chains of separated discs along the real line, each carrying a small set
//! `E_j ⊂ D_j` with a measure of mass `r_j`.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::geometry::{lambda_separated, ChordArcCurve, CircleArc, Disc, Point, Segment};
use crate::measure::DiscreteMeasure;
use crate::{Error, Result};

/// Gaps between consecutive discs are `λ(r_j + r_{j+1})·(1 + GAP_MARGIN + u)`
/// with `u` uniform in `[0, GAP_JITTER)`.
pub const GAP_MARGIN: f64 = 0.01;
pub const GAP_JITTER: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PartShape {
    /// Horizontal segment of length `r_j` through the center.
    Segment,
    /// Concentric circle of radius `r_j / 2`, arc length rescaled to mass `r_j`.
    CircleArc,
    /// Seeded uniform points in the concentric disc of radius `r_j / 2`.
    PointCloud,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeadChain {
    pub curve: ChordArcCurve,
    pub discs: Vec<Disc>,
    pub lambda: f64,
    pub shape: PartShape,
    pub parts: Vec<DiscreteMeasure>,
}

impl BeadChain {
    pub fn len(&self) -> usize {
        self.discs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.discs.is_empty()
    }

    pub fn radii(&self) -> Vec<f64> {
        self.discs.iter().map(|d| d.radius).collect()
    }

    pub fn masses(&self) -> Vec<f64> {
        self.parts.iter().map(DiscreteMeasure::total_mass).collect()
    }

    /// `μ = Σ_j μ_j`.
    pub fn measure(&self) -> Result<DiscreteMeasure> {
        DiscreteMeasure::sum(&self.parts)
    }

    /// Capacity of each part: exact `ℓ/4` for segments, the length proxy
    /// `H¹/4` for circles, `None` for point clouds.
    pub fn part_capacities(&self) -> Option<Vec<f64>> {
        let per = |r: f64| match self.shape {
            PartShape::Segment => Some(r / 4.0),
            PartShape::CircleArc => Some(TAU * 0.5 * r / 4.0),
            PartShape::PointCloud => None,
        };
        self.discs.iter().map(|d| per(d.radius)).collect()
    }

    /// The first `k` beads.
    pub fn prefix(&self, k: usize) -> Result<BeadChain> {
        if k == 0 || k > self.len() {
            return Err(Error::InvalidArgument(format!("prefix length {k} out of 1..={}", self.len())));
        }
        let discs = self.discs[..k].to_vec();
        Ok(BeadChain {
            curve: line_curve(&discs)?,
            discs,
            lambda: self.lambda,
            shape: self.shape,
            parts: self.parts[..k].to_vec(),
        })
    }
}

fn line_curve(discs: &[Disc]) -> Result<ChordArcCurve> {
    let first = discs.first().ok_or(Error::EmptyInput("bead chain"))?;
    let last = discs.last().unwrap();
    let mut v = vec![Point::new(first.center.x - first.radius, 0.0)];
    v.extend(discs.iter().map(|d| d.center));
    v.push(Point::new(last.center.x + last.radius, 0.0));
    ChordArcCurve::new(v)
}

/// Discs centered on the real axis, left to right, consecutive gaps just
/// above `λ(r_j + r_{j+1})`, each holding a part of the requested shape with
/// `atoms` atoms and mass `r_j`.
pub fn bead_chain_on_line(
    radii: &[f64],
    lambda: f64,
    shape: PartShape,
    atoms: usize,
    seed: u64,
) -> Result<BeadChain> {
    if !(lambda > 1.0) {
        return Err(Error::InvalidArgument(format!("separation factor must exceed 1, got {lambda}")));
    }
    if radii.is_empty() {
        return Err(Error::EmptyInput("bead_chain_on_line radii"));
    }
    if let Some(r) = radii.iter().find(|r| !(**r > 0.0 && r.is_finite())) {
        return Err(Error::InvalidArgument(format!("radii must be positive, got {r}")));
    }
    if atoms == 0 {
        return Err(Error::InvalidArgument("parts need at least one atom".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut discs = Vec::with_capacity(radii.len());
    let mut x = 0.0;
    for (j, &r) in radii.iter().enumerate() {
        if j > 0 {
            let prev = radii[j - 1];
            x += lambda * (prev + r) * (1.0 + GAP_MARGIN + rng.gen_range(0.0..GAP_JITTER));
        }
        discs.push(Disc::new(Point::new(x, 0.0), r)?);
    }
    let parts = discs
        .iter()
        .map(|d| make_part(d, shape, atoms, &mut rng))
        .collect::<Result<Vec<_>>>()?;
    debug_assert!(lambda_separated(&discs, lambda));
    Ok(BeadChain { curve: line_curve(&discs)?, discs, lambda, shape, parts })
}

fn make_part(d: &Disc, shape: PartShape, atoms: usize, rng: &mut ChaCha8Rng) -> Result<DiscreteMeasure> {
    let r = d.radius;
    let c = d.center;
    match shape {
        PartShape::Segment => DiscreteMeasure::segment_length(
            &Segment::new(Point::new(c.x - 0.5 * r, c.y), Point::new(c.x + 0.5 * r, c.y)),
            atoms,
        ),
        PartShape::CircleArc => {
            let m = DiscreteMeasure::arc_length(&CircleArc::full_circle(c, 0.5 * r)?, atoms)?;
            m.scale(r / m.total_mass())
        }
        PartShape::PointCloud => {
            let pts: Vec<Point> = (0..atoms)
                .map(|_| {
                    let rho = 0.5 * r * rng.gen::<f64>().sqrt();
                    c.add(Point::from_polar(rho, rng.gen_range(0.0..TAU)))
                })
                .collect();
            // typical spacing of n uniform points in a disc of radius r/2
            let h = 0.5 * r * (std::f64::consts::PI / atoms as f64).sqrt();
            DiscreteMeasure::uniform(pts, r, h)
        }
    }
}

/// Radii drawn uniformly from `[lo, hi)`.
pub fn random_radii(n: usize, lo: f64, hi: f64, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.gen_range(lo..hi)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_unit_discs() {
        let c = bead_chain_on_line(&[1.0, 1.0], 2.0, PartShape::Segment, 8, 0).unwrap();
        assert!(c.discs[1].center.x - c.discs[0].center.x > 4.0);
        assert_eq!(c.part_capacities().unwrap(), vec![0.25, 0.25]);
    }

    #[test]
    fn always_separated_and_parts_inside() {
        for shape in [PartShape::Segment, PartShape::CircleArc, PartShape::PointCloud] {
            for seed in 0..20 {
                let radii = random_radii(15, 0.1, 10.0, seed);
                let lambda = 1.0 + (seed as f64 + 1.0) / 7.0;
                let c = bead_chain_on_line(&radii, lambda, shape, 12, seed).unwrap();
                assert!(lambda_separated(&c.discs, lambda));
                for (d, part) in c.discs.iter().zip(&c.parts) {
                    assert!(part.points().iter().all(|p| d.contains(*p)));
                    assert!(part.total_mass() <= d.radius * (1.0 + 1e-12));
                }
            }
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert!(bead_chain_on_line(&[1.0, -1.0], 2.0, PartShape::Segment, 4, 0).is_err());
        assert!(bead_chain_on_line(&[1.0], 1.0, PartShape::Segment, 4, 0).is_err());
        assert!(bead_chain_on_line(&[], 2.0, PartShape::Segment, 4, 0).is_err());
    }

    #[test]
    fn deterministic_and_prefix_stable() {
        let radii = random_radii(10, 0.5, 2.0, 4);
        let a = bead_chain_on_line(&radii, 2.0, PartShape::PointCloud, 6, 9).unwrap();
        let b = bead_chain_on_line(&radii, 2.0, PartShape::PointCloud, 6, 9).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
        let p = a.prefix(4).unwrap();
        assert_eq!(p.discs, a.discs[..4]);
    }
}
