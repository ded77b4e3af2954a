//! The Möbius map from the unit circle to the real line, and the rounded
//! chord-arc curve through the centers of discs sitting on the left unit
//! semicircle.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::circles::lambda_prime;
use crate::geometry::{chord_arc_constant, lambda_separated, ChordArcCurve, Disc, Point};
use crate::{Error, Result};

/// Points closer than this to `z = 1` are rejected by [`mobius_transfer`].
pub const POLE_TOLERANCE: f64 = 1e-9;

/// Left semicircle `T`: angles `π/2 ..= 3π/2` on the unit circle.
pub const SEMICIRCLE_START: f64 = FRAC_PI_2;
pub const SEMICIRCLE_END: f64 = 3.0 * FRAC_PI_2;

/// `h(z) = i(1+z)/(1−z)`, sending the unit circle minus `1` onto ℝ.
pub fn mobius_transfer(points: &[Point]) -> Result<Vec<Point>> {
    let one = Complex64::new(1.0, 0.0);
    points
        .iter()
        .map(|p| {
            let z = p.to_complex();
            if (one - z).norm() < POLE_TOLERANCE {
                return Err(Error::InvalidArgument(format!("({}, {}) is too close to the pole z = 1", p.x, p.y)));
            }
            Ok(Point::from_complex(Complex64::i() * (one + z) / (one - z)))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Envelope {
    pub curve: ChordArcCurve,
    pub lambda: f64,
    pub chord_arc_constant: f64,
}

/// Angular interval of `T ∩ D`, clamped to `T`, or `None` if empty.
fn semicircle_window(d: &Disc) -> Result<Option<(f64, f64)>> {
    let c = d.center.norm();
    let phi = d.center.y.atan2(d.center.x).rem_euclid(2.0 * PI);
    if c == 0.0 || (1.0 + c * c - d.radius * d.radius) / (2.0 * c) <= -1.0 {
        return Err(Error::InvalidArgument("disc covers the whole unit circle".into()));
    }
    let kappa = (1.0 + c * c - d.radius * d.radius) / (2.0 * c);
    if kappa > 1.0 {
        return Ok(None);
    }
    let half = kappa.acos();
    // φ ∈ [0, 2π); the left half sits around π, so no wrap is needed there
    let (lo, hi) = ((phi - half).max(SEMICIRCLE_START), (phi + half).min(SEMICIRCLE_END));
    Ok((lo <= hi).then_some((lo, hi)))
}

/// Follows `T` and, for each disc, replaces the arc `T ∩ λ'D_j` with the
/// two segments `a_j x_j`, `x_j b_j` through the center `x_j`, where
/// `λ' = (1+λ)/2`. Arcs between windows are sampled with step at most
/// `max_step`.
pub fn chordarc_envelope(discs: &[Disc], lambda: f64, max_step: f64) -> Result<Envelope> {
    if !(lambda > 1.0) {
        return Err(Error::InvalidArgument(format!("separation factor must exceed 1, got {lambda}")));
    }
    if !(max_step > 0.0) {
        return Err(Error::InvalidArgument(format!("arc step must be positive, got {max_step}")));
    }
    if !lambda_separated(discs, lambda) {
        return Err(Error::Hypothesis(format!("discs are not {lambda}-separated")));
    }
    let lp = lambda_prime(lambda);
    let mut windows = Vec::with_capacity(discs.len());
    for d in discs {
        if semicircle_window(d)?.is_none() {
            return Err(Error::Hypothesis(format!(
                "disc at ({}, {}) misses the left semicircle",
                d.center.x, d.center.y
            )));
        }
        let w = semicircle_window(&d.dilate(lp))?.expect("contains the undilated window");
        windows.push((w.0, w.1, d.center));
    }
    windows.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut vertices: Vec<Point> = Vec::new();
    let push = |v: &mut Vec<Point>, p: Point| {
        if v.last().map_or(true, |q| q.dist(p) > 0.0) {
            v.push(p);
        }
    };
    let arc = |v: &mut Vec<Point>, from: f64, to: f64| {
        let steps = (((to - from) / max_step).ceil() as usize).max(1);
        for s in 0..=steps {
            let t = from + (to - from) * s as f64 / steps as f64;
            push(v, Point::from_polar(1.0, t));
        }
    };
    let mut at = SEMICIRCLE_START;
    for &(lo, hi, center) in &windows {
        if lo > at {
            arc(&mut vertices, at, lo);
        }
        push(&mut vertices, Point::from_polar(1.0, lo));
        push(&mut vertices, center);
        push(&mut vertices, Point::from_polar(1.0, hi));
        at = hi;
    }
    if at < SEMICIRCLE_END {
        arc(&mut vertices, at, SEMICIRCLE_END);
    }
    let curve = ChordArcCurve::new(vertices)?;
    let a0 = chord_arc_constant(&curve);
    Ok(Envelope { curve, lambda, chord_arc_constant: a0 })
}
