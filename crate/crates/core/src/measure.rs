//! Finite atomic measures on the plane.
//!
//! A [`DiscreteMeasure`] stands in for a continuous measure sampled at mesh
//! scale `resolution_h`. Linear growth is only meaningful above that scale,
//! so [`DiscreteMeasure::growth_constant`] never looks at radii below it.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::geometry::{CircleArc, Disc, Point, Segment};
use crate::summation::pairwise_sum;
use crate::{Error, Result};

/// Relative tolerance used when deciding whether an atom sits on the
/// boundary of a candidate disc in the growth search.
const GROWTH_TIE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MeasureDoc", into = "MeasureDoc")]
pub struct DiscreteMeasure {
    label: Option<String>,
    resolution_h: f64,
    points: Vec<Point>,
    weights: Vec<f64>,
}

/// On-disk layout: `{label, resolution_h, atoms: [[x, y, w], ...]}`.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MeasureDoc {
    label: Option<String>,
    resolution_h: f64,
    atoms: Vec<[f64; 3]>,
}

impl TryFrom<MeasureDoc> for DiscreteMeasure {
    type Error = Error;

    fn try_from(doc: MeasureDoc) -> Result<Self> {
        let (points, weights) = doc.atoms.iter().map(|a| (Point::new(a[0], a[1]), a[2])).unzip();
        let mut m = DiscreteMeasure::new(points, weights, doc.resolution_h)?;
        m.label = doc.label;
        Ok(m)
    }
}

impl From<DiscreteMeasure> for MeasureDoc {
    fn from(m: DiscreteMeasure) -> Self {
        let atoms = m.points.iter().zip(&m.weights).map(|(p, &w)| [p.x, p.y, w]).collect();
        MeasureDoc { label: m.label, resolution_h: m.resolution_h, atoms }
    }
}

/// Result of the linear-growth search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowthReport {
    pub growth_constant: f64,
    pub witness_disc: Disc,
}

fn check_h(h: f64) -> Result<()> {
    if h > 0.0 && h.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("resolution_h must be positive and finite, got {h}")))
    }
}

impl DiscreteMeasure {
    pub fn new(points: Vec<Point>, weights: Vec<f64>, resolution_h: f64) -> Result<Self> {
        check_h(resolution_h)?;
        if points.len() != weights.len() {
            return Err(Error::LengthMismatch { expected: points.len(), got: weights.len() });
        }
        if let Some(p) = points.iter().find(|p| !p.is_finite()) {
            return Err(Error::InvalidArgument(format!("atom at non-finite position {p:?}")));
        }
        if let Some(w) = weights.iter().find(|w| !(**w > 0.0 && w.is_finite())) {
            return Err(Error::InvalidArgument(format!("atom weights must be positive and finite, got {w}")));
        }
        Ok(Self { label: None, resolution_h, points, weights })
    }

    /// `n` atoms of equal weight `mass / n`.
    pub fn uniform(points: Vec<Point>, mass: f64, resolution_h: f64) -> Result<Self> {
        if points.is_empty() {
            return Self::empty(resolution_h);
        }
        let w = mass / points.len() as f64;
        let weights = vec![w; points.len()];
        Self::new(points, weights, resolution_h)
    }

    pub fn empty(resolution_h: f64) -> Result<Self> {
        Self::new(Vec::new(), Vec::new(), resolution_h)
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    pub fn resolution_h(&self) -> f64 {
        self.resolution_h
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn atoms(&self) -> impl Iterator<Item = (Point, f64)> + '_ {
        self.points.iter().copied().zip(self.weights.iter().copied())
    }

    pub fn total_mass(&self) -> f64 {
        pairwise_sum(&self.weights)
    }

    /// Mass of the closed disc `b`.
    pub fn mass_in(&self, b: &Disc) -> f64 {
        let inside: Vec<f64> = self.atoms().filter(|(p, _)| b.contains(*p)).map(|(_, w)| w).collect();
        pairwise_sum(&inside)
    }

    /// `μ|B` for the closed disc `b`.
    pub fn restrict(&self, b: &Disc) -> DiscreteMeasure {
        self.filter(|p| b.contains(p))
    }

    /// Keeps the atoms whose position satisfies `keep`.
    pub fn filter(&self, mut keep: impl FnMut(Point) -> bool) -> DiscreteMeasure {
        let (points, weights) = self.atoms().filter(|(p, _)| keep(*p)).unzip();
        DiscreteMeasure { label: self.label.clone(), resolution_h: self.resolution_h, points, weights }
    }

    /// Multiplies every weight by `t > 0`.
    pub fn scale(&self, t: f64) -> Result<DiscreteMeasure> {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::InvalidArgument(format!("scale factor must be positive, got {t}")));
        }
        let mut out = self.clone();
        for w in &mut out.weights {
            *w *= t;
        }
        Ok(out)
    }

    /// Same support, new weights.
    pub fn with_weights(&self, weights: Vec<f64>) -> Result<DiscreteMeasure> {
        let mut m = Self::new(self.points.clone(), weights, self.resolution_h)?;
        m.label = self.label.clone();
        Ok(m)
    }

    /// Union of atom lists. The resolution is the smaller of the two, except
    /// that an empty operand does not contribute its resolution.
    pub fn add(&self, other: &DiscreteMeasure) -> DiscreteMeasure {
        let resolution_h = match (self.is_empty(), other.is_empty()) {
            (false, true) => self.resolution_h,
            (true, false) => other.resolution_h,
            _ => self.resolution_h.min(other.resolution_h),
        };
        let mut points = self.points.clone();
        points.extend_from_slice(&other.points);
        let mut weights = self.weights.clone();
        weights.extend_from_slice(&other.weights);
        DiscreteMeasure { label: self.label.clone(), resolution_h, points, weights }
    }

    /// Sum of a list of measures, in order.
    pub fn sum<'a>(parts: impl IntoIterator<Item = &'a DiscreteMeasure>) -> Result<DiscreteMeasure> {
        let mut it = parts.into_iter();
        let first = it.next().ok_or(Error::EmptyInput("DiscreteMeasure::sum"))?;
        Ok(it.fold(first.clone(), |acc, m| acc.add(m)))
    }

    /// Applies `f` to every atom position; `h_factor` rescales the
    /// resolution (1 for rigid motions, `s` for a dilation by `s`).
    pub fn map_points(&self, h_factor: f64, f: impl Fn(Point) -> Point) -> Result<DiscreteMeasure> {
        check_h(self.resolution_h * h_factor)?;
        let points: Vec<Point> = self.points.iter().map(|&p| f(p)).collect();
        let mut m = Self::new(points, self.weights.clone(), self.resolution_h * h_factor)?;
        m.label = self.label.clone();
        Ok(m)
    }

    pub fn translate(&self, v: Point) -> DiscreteMeasure {
        self.map_points(1.0, |p| p.add(v)).expect("translation keeps atoms valid")
    }

    pub fn rotate(&self, theta: f64) -> DiscreteMeasure {
        self.map_points(1.0, |p| p.rotate(theta)).expect("rotation keeps atoms valid")
    }

    /// Dilation `z ↦ s·z`. Weights are unchanged.
    pub fn dilate(&self, s: f64) -> Result<DiscreteMeasure> {
        if !(s > 0.0) {
            return Err(Error::InvalidArgument(format!("dilation factor must be positive, got {s}")));
        }
        self.map_points(s, |p| p.scale(s))
    }

    pub fn diameter(&self) -> f64 {
        let mut d2: f64 = 0.0;
        for (i, p) in self.points.iter().enumerate() {
            for q in &self.points[i + 1..] {
                d2 = d2.max(p.dist_sq(*q));
            }
        }
        d2.sqrt()
    }

    /// Largest `μ(D(p, r)) / r` over centers `p` in the support and radii
    /// `r ∈ {max(h, |p − q|)}`, discs closed.
    ///
    /// Any disc `D(x, r)` with `r ≥ h` that meets the support contains an
    /// atom `p`, and `D(p, 2r) ⊇ D(x, r)`; the candidate radius just above
    /// `2r` therefore certifies `μ(D(x,r)) / r ≤ 2·growth_constant`.
    pub fn growth_constant(&self) -> Result<GrowthReport> {
        if self.is_empty() {
            return Err(Error::EmptyInput("growth_constant"));
        }
        let h = self.resolution_h;
        let per_center: Vec<(f64, f64)> = (0..self.len())
            .into_par_iter()
            .map(|i| self.best_radius_at(i, h))
            .collect();
        // first index wins on ties so the witness does not depend on scheduling
        let mut best = 0;
        for (i, c) in per_center.iter().enumerate() {
            if c.0 > per_center[best].0 {
                best = i;
            }
        }
        let (ratio, radius) = per_center[best];
        Ok(GrowthReport {
            growth_constant: ratio,
            witness_disc: Disc::new_unchecked(self.points[best], radius),
        })
    }

    /// Best ratio and its radius for discs centered at atom `i`.
    fn best_radius_at(&self, i: usize, h: f64) -> (f64, f64) {
        let c = self.points[i];
        let mut by_dist: Vec<(f64, f64)> =
            self.atoms().map(|(q, w)| (q.dist(c), w)).collect();
        by_dist.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));
        let mut best = (0.0, h);
        let mut mass = 0.0;
        let mut next = 0;
        for k in 0..by_dist.len() {
            let r = by_dist[k].0.max(h);
            let reach = r * (1.0 + GROWTH_TIE_TOL);
            while next < by_dist.len() && by_dist[next].0 <= reach {
                mass += by_dist[next].1;
                next += 1;
            }
            let ratio = mass / r;
            if ratio > best.0 {
                best = (ratio, r);
            }
        }
        best
    }

    /// Arc-length measure on a circular arc: `n` atoms of weight
    /// `length / n`, resolution equal to the atom spacing. A full circle
    /// puts atoms at `start + 2πk/n`; a partial arc at sub-arc midpoints.
    pub fn arc_length(arc: &CircleArc, n: usize) -> Result<DiscreteMeasure> {
        if n == 0 {
            return Err(Error::InvalidArgument("arc_length needs at least one atom".into()));
        }
        let step = arc.sweep() / n as f64;
        let offset = if arc.is_full() { 0.0 } else { 0.5 };
        let points =
            (0..n).map(|k| arc.point_at(arc.start_angle + (k as f64 + offset) * step)).collect();
        Self::uniform(points, arc.length(), arc.length() / n as f64)
    }

    /// Length measure on a segment: `n` atoms of weight `length / n` spaced
    /// evenly from endpoint to endpoint, so the sample spans the whole
    /// segment. Resolution is the spacing `length / (n − 1)`; a single atom
    /// sits at the midpoint with resolution `length`.
    pub fn segment_length(seg: &Segment, n: usize) -> Result<DiscreteMeasure> {
        if n == 0 {
            return Err(Error::InvalidArgument("segment_length needs at least one atom".into()));
        }
        let len = seg.length();
        if !(len > 0.0) {
            return Err(Error::InvalidArgument("segment has zero length".into()));
        }
        if n == 1 {
            return Self::uniform(vec![seg.point_at(0.5)], len, len);
        }
        let gaps = (n - 1) as f64;
        let points = (0..n).map(|k| seg.point_at(k as f64 / gaps)).collect();
        Self::uniform(points, len, len / gaps)
    }
}
