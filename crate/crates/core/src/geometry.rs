//! Planar primitives: points, discs, circular arcs, polyline curves, and the
//! predicates the rest of the crate builds on.
//!
//! Complex numbers are represented as coordinate pairs; [`Point::to_complex`]
//! converts when complex arithmetic reads better.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Seed used by [`smallest_enclosing_disc`] to shuffle its input.
pub const ENCLOSING_DISC_SEED: u64 = 0x5eed_d15c;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const ORIGIN: Point = Point { x: 0.0, y: 0.0 };

    #[inline]
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    #[inline]
    pub fn from_polar(radius: f64, angle: f64) -> Self {
        Self::new(radius * angle.cos(), radius * angle.sin())
    }

    #[inline]
    pub fn to_complex(self) -> Complex64 {
        Complex64::new(self.x, self.y)
    }

    #[inline]
    pub fn from_complex(z: Complex64) -> Self {
        Self::new(z.re, z.im)
    }

    #[inline]
    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    #[inline]
    pub fn sub(self, other: Point) -> Point {
        Point::new(self.x - other.x, self.y - other.y)
    }

    #[inline]
    pub fn add(self, other: Point) -> Point {
        Point::new(self.x + other.x, self.y + other.y)
    }

    #[inline]
    pub fn scale(self, s: f64) -> Point {
        Point::new(self.x * s, self.y * s)
    }

    #[inline]
    pub fn norm_sq(self) -> f64 {
        self.x * self.x + self.y * self.y
    }

    #[inline]
    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    #[inline]
    pub fn dist_sq(self, other: Point) -> f64 {
        self.sub(other).norm_sq()
    }

    #[inline]
    pub fn dist(self, other: Point) -> f64 {
        self.sub(other).norm()
    }

    #[inline]
    pub fn midpoint(self, other: Point) -> Point {
        Point::new(0.5 * (self.x + other.x), 0.5 * (self.y + other.y))
    }

    /// Angle of the vector from the origin, in `(-π, π]`.
    #[inline]
    pub fn angle(self) -> f64 {
        self.y.atan2(self.x)
    }

    /// Rotates about the origin by `theta` radians.
    #[inline]
    pub fn rotate(self, theta: f64) -> Point {
        let (s, c) = theta.sin_cos();
        Point::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }
}

/// Closed disc `D(center, radius)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Disc {
    pub center: Point,
    pub radius: f64,
}

impl Disc {
    pub fn new(center: Point, radius: f64) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() || !center.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "disc needs a finite center and positive radius, got radius {radius}"
            )));
        }
        Ok(Self { center, radius })
    }

    /// Builds a disc without validating the radius. Radius 0 is used as the
    /// enclosing disc of a single point.
    pub(crate) const fn new_unchecked(center: Point, radius: f64) -> Self {
        Self { center, radius }
    }

    #[inline]
    pub fn contains(&self, p: Point) -> bool {
        p.dist_sq(self.center) <= self.radius * self.radius
    }

    /// The concentric disc with radius multiplied by `factor`.
    pub fn dilate(&self, factor: f64) -> Disc {
        Disc { center: self.center, radius: self.radius * factor }
    }

    pub fn intersects(&self, other: &Disc) -> bool {
        self.center.dist(other.center) <= self.radius + other.radius
    }
}

/// Circular arc swept counter-clockwise from `start_angle` to `end_angle`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CircleArc {
    pub center: Point,
    pub radius: f64,
    pub start_angle: f64,
    pub end_angle: f64,
}

impl CircleArc {
    pub fn new(center: Point, radius: f64, start_angle: f64, end_angle: f64) -> Result<Self> {
        let sweep = end_angle - start_angle;
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::InvalidArgument(format!("arc radius must be positive, got {radius}")));
        }
        if !(sweep > 0.0 && sweep <= TAU * (1.0 + 1e-15)) {
            return Err(Error::InvalidArgument(format!("arc sweep must lie in (0, 2π], got {sweep}")));
        }
        Ok(Self { center, radius, start_angle, end_angle: start_angle + sweep.min(TAU) })
    }

    pub fn full_circle(center: Point, radius: f64) -> Result<Self> {
        Self::new(center, radius, 0.0, TAU)
    }

    #[inline]
    pub fn sweep(&self) -> f64 {
        self.end_angle - self.start_angle
    }

    #[inline]
    pub fn length(&self) -> f64 {
        self.radius * self.sweep()
    }

    pub fn is_full(&self) -> bool {
        self.sweep() >= TAU
    }

    pub fn point_at(&self, angle: f64) -> Point {
        self.center.add(Point::from_polar(self.radius, angle))
    }
}

/// Straight segment between two points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub a: Point,
    pub b: Point,
}

impl Segment {
    pub fn new(a: Point, b: Point) -> Self {
        Self { a, b }
    }

    pub fn length(&self) -> f64 {
        self.a.dist(self.b)
    }

    pub fn point_at(&self, t: f64) -> Point {
        Point::new(self.a.x + t * (self.b.x - self.a.x), self.a.y + t * (self.b.y - self.a.y))
    }
}

/// Polyline curve with its arc-length parametrization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChordArcCurve {
    vertices: Vec<Point>,
    cumulative_arclength: Vec<f64>,
}

impl ChordArcCurve {
    pub fn new(vertices: Vec<Point>) -> Result<Self> {
        if vertices.len() < 2 {
            return Err(Error::InvalidArgument("a curve needs at least two vertices".into()));
        }
        let mut cumulative = Vec::with_capacity(vertices.len());
        cumulative.push(0.0);
        for w in vertices.windows(2) {
            let len = w[0].dist(w[1]);
            if len == 0.0 {
                return Err(Error::InvalidArgument("consecutive curve vertices coincide".into()));
            }
            let last = *cumulative.last().unwrap();
            cumulative.push(last + len);
        }
        Ok(Self { vertices, cumulative_arclength: cumulative })
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn cumulative_arclength(&self) -> &[f64] {
        &self.cumulative_arclength
    }

    pub fn length(&self) -> f64 {
        *self.cumulative_arclength.last().unwrap()
    }
}

/// `1/R²` for the circle through `a`, `b`, `c`, computed as
/// `16·Area² / (|ab|²|bc|²|ca|²)`.
///
/// Collinear triples give exactly 0 whenever the cross product vanishes, and
/// coincident points (a zero side) also give 0: the circumradius is infinite.
/// The arguments are put in lexicographic order first, so all six
/// permutations return the identical float.
#[inline]
pub fn circumradius_inv_sq(a: Point, b: Point, c: Point) -> f64 {
    let mut t = [a, b, c];
    t.sort_unstable_by(|p, q| p.x.total_cmp(&q.x).then(p.y.total_cmp(&q.y)));
    let [a, b, c] = t;
    let ab = a.dist_sq(b);
    let bc = b.dist_sq(c);
    let ca = c.dist_sq(a);
    inv_sq_from_parts(a, b, c, ab, bc, ca)
}

/// Same as [`circumradius_inv_sq`] with the squared side lengths supplied.
#[inline(always)]
pub(crate) fn inv_sq_from_parts(a: Point, b: Point, c: Point, ab: f64, bc: f64, ca: f64) -> f64 {
    let denom = ab * bc * ca;
    if denom == 0.0 {
        return 0.0;
    }
    // 2·Area = cross
    let cross = (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
    4.0 * cross * cross / denom
}

/// Discrete chord-arc constant: the largest ratio of arc length to chord
/// over all vertex pairs. Returns `f64::INFINITY` when two distinct
/// parameters share a position (a closed loop).
pub fn chord_arc_constant(curve: &ChordArcCurve) -> f64 {
    let v = curve.vertices();
    let s = curve.cumulative_arclength();
    let mut worst: f64 = 1.0;
    for i in 0..v.len() {
        for j in i + 1..v.len() {
            let chord = v[i].dist(v[j]);
            if chord == 0.0 {
                return f64::INFINITY;
            }
            worst = worst.max((s[j] - s[i]) / chord);
        }
    }
    worst
}

/// True iff the dilates `λD_j` are pairwise disjoint.
pub fn lambda_separated(discs: &[Disc], lambda: f64) -> bool {
    for (j, dj) in discs.iter().enumerate() {
        for dk in &discs[j + 1..] {
            if dj.center.dist(dk.center) <= lambda * (dj.radius + dk.radius) {
                return false;
            }
        }
    }
    true
}

/// Reduces an angle into `[0, 2π)`.
#[inline]
pub(crate) fn wrap_angle(theta: f64) -> f64 {
    let r = theta.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Length of the overlap of two angular intervals `[a0, a0+la]` and
/// `[b0, b0+lb]` on the circle, each of length at most 2π.
fn angular_overlap(a0: f64, la: f64, b0: f64, lb: f64) -> f64 {
    if la >= TAU {
        return lb.min(TAU);
    }
    if lb >= TAU {
        return la;
    }
    let mut total = 0.0;
    // shift b so that it starts inside [a0, a0 + 2π)
    let start = a0 + wrap_angle(b0 - a0);
    for shift in [-TAU, 0.0] {
        let s = start + shift;
        let lo = s.max(a0);
        let hi = (s + lb).min(a0 + la);
        if hi > lo {
            total += hi - lo;
        }
    }
    total
}

/// Exact length of the part of `arc` lying in the closed disc `b`.
pub fn circle_disc_intersection_length(arc: &CircleArc, b: &Disc) -> f64 {
    let rho = arc.radius;
    let big_r = b.radius;
    let d = arc.center.dist(b.center);
    if d + rho <= big_r {
        return arc.length();
    }
    if d >= rho + big_r || d + big_r <= rho {
        return 0.0;
    }
    let cos_alpha = ((rho * rho + d * d - big_r * big_r) / (2.0 * rho * d)).clamp(-1.0, 1.0);
    let alpha = cos_alpha.acos();
    let phi = b.center.sub(arc.center).angle();
    let inside_start = phi - alpha;
    rho * angular_overlap(arc.start_angle, arc.sweep(), inside_start, 2.0 * alpha)
}

/// Exact length of the part of a segment lying in the closed disc `b`.
pub fn segment_disc_intersection_length(seg: &Segment, b: &Disc) -> f64 {
    let len = seg.length();
    if len == 0.0 {
        return 0.0;
    }
    // |a + t(b-a) - c|² ≤ R², t ∈ [0,1]
    let dir = seg.b.sub(seg.a);
    let off = seg.a.sub(b.center);
    let qa = dir.norm_sq();
    let qb = 2.0 * (dir.x * off.x + dir.y * off.y);
    let qc = off.norm_sq() - b.radius * b.radius;
    let disc = qb * qb - 4.0 * qa * qc;
    if disc <= 0.0 {
        return 0.0;
    }
    let sq = disc.sqrt();
    let t0 = ((-qb - sq) / (2.0 * qa)).max(0.0);
    let t1 = ((-qb + sq) / (2.0 * qa)).min(1.0);
    if t1 > t0 {
        (t1 - t0) * len
    } else {
        0.0
    }
}

fn disc_from_two(a: Point, b: Point) -> Disc {
    Disc::new_unchecked(a.midpoint(b), 0.5 * a.dist(b))
}

fn disc_from_three(a: Point, b: Point, c: Point) -> Option<Disc> {
    let bx = b.x - a.x;
    let by = b.y - a.y;
    let cx = c.x - a.x;
    let cy = c.y - a.y;
    let d = 2.0 * (bx * cy - by * cx);
    if d == 0.0 {
        return None;
    }
    let b2 = bx * bx + by * by;
    let c2 = cx * cx + cy * cy;
    let ux = (cy * b2 - by * c2) / d;
    let uy = (bx * c2 - cx * b2) / d;
    let center = Point::new(a.x + ux, a.y + uy);
    let radius = center.dist(a).max(center.dist(b)).max(center.dist(c));
    Some(Disc::new_unchecked(center, radius))
}

#[inline]
fn covers(d: &Disc, p: Point) -> bool {
    p.dist(d.center) <= d.radius * (1.0 + 1e-12) + 1e-300
}

/// Smallest disc that contains every point, by the randomized incremental
/// (Welzl) construction with a fixed shuffle seed. A single point yields a
/// radius-0 disc.
pub fn smallest_enclosing_disc(points: &[Point]) -> Result<Disc> {
    if points.is_empty() {
        return Err(Error::EmptyInput("smallest_enclosing_disc"));
    }
    let mut pts = points.to_vec();
    let mut rng = ChaCha8Rng::seed_from_u64(ENCLOSING_DISC_SEED);
    pts.shuffle(&mut rng);

    let mut disc = Disc::new_unchecked(pts[0], 0.0);
    for i in 1..pts.len() {
        if covers(&disc, pts[i]) {
            continue;
        }
        disc = Disc::new_unchecked(pts[i], 0.0);
        for j in 0..i {
            if covers(&disc, pts[j]) {
                continue;
            }
            disc = disc_from_two(pts[i], pts[j]);
            for k in 0..j {
                if covers(&disc, pts[k]) {
                    continue;
                }
                disc = disc_from_three(pts[i], pts[j], pts[k]).unwrap_or_else(|| {
                    // collinear: the farthest pair spans the disc
                    let cands = [
                        disc_from_two(pts[i], pts[j]),
                        disc_from_two(pts[i], pts[k]),
                        disc_from_two(pts[j], pts[k]),
                    ];
                    cands.into_iter().fold(cands[0], |a, b| if b.radius > a.radius { b } else { a })
                });
            }
        }
    }
    Ok(disc)
}

/// Empirical Ahlfors–David ratios `H¹(G ∩ D(x,r)) / r` over every
/// (center, radius) sample, with `G` the union of the given arcs.
/// Returns `(min, max)`.
pub fn ad_regularity_estimate(
    arcs: &[CircleArc],
    sample_centers: &[Point],
    radii: &[f64],
) -> Result<(f64, f64)> {
    if sample_centers.is_empty() || radii.is_empty() {
        return Err(Error::EmptyInput("ad_regularity_estimate samples"));
    }
    let mut lo = f64::INFINITY;
    let mut hi: f64 = 0.0;
    for &x in sample_centers {
        for &r in radii {
            let disc = Disc::new(x, r)?;
            let h1: f64 = arcs.iter().map(|a| circle_disc_intersection_length(a, &disc)).sum();
            let ratio = h1 / r;
            lo = lo.min(ratio);
            hi = hi.max(ratio);
        }
    }
    Ok((lo, hi))
}

/// Evenly spaced sample points on an arc, `count` of them, at the midpoints
/// of equal sub-arcs.
pub fn arc_midpoints(arc: &CircleArc, count: usize) -> Vec<Point> {
    let step = arc.sweep() / count as f64;
    (0..count).map(|i| arc.point_at(arc.start_angle + (i as f64 + 0.5) * step)).collect()
}
