//! The corner 1/4-Cantor construction: every square keeps its four corner
//! sub-squares of a quarter of the side.

use serde::{Deserialize, Serialize};

use crate::geometry::Point;
use crate::measure::DiscreteMeasure;
use crate::{Error, Result};

/// Deepest generation [`cantor_corner`] builds (4⁸ = 65536 squares).
pub const MAX_GENERATION: u32 = 8;

/// Axis-aligned square given by its lower-left corner and side.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Square {
    pub corner: Point,
    pub side: f64,
}

impl Square {
    pub const UNIT: Square = Square { corner: Point::ORIGIN, side: 1.0 };

    pub fn center(&self) -> Point {
        Point::new(self.corner.x + 0.5 * self.side, self.corner.y + 0.5 * self.side)
    }

    pub fn contains(&self, p: Point) -> bool {
        p.x >= self.corner.x
            && p.x <= self.corner.x + self.side
            && p.y >= self.corner.y
            && p.y <= self.corner.y + self.side
    }

    /// The square with the same center and `factor` times the side.
    pub fn dilate(&self, factor: f64) -> Square {
        let c = self.center();
        let s = self.side * factor;
        Square { corner: Point::new(c.x - 0.5 * s, c.y - 0.5 * s), side: s }
    }

    /// Closed squares intersect.
    pub fn intersects(&self, other: &Square) -> bool {
        self.corner.x <= other.corner.x + other.side
            && other.corner.x <= self.corner.x + self.side
            && self.corner.y <= other.corner.y + other.side
            && other.corner.y <= self.corner.y + self.side
    }

    /// Four corner children in the order lower-left, lower-right,
    /// upper-left, upper-right.
    pub fn corner_children(&self) -> [Square; 4] {
        let s = 0.25 * self.side;
        let far = 0.75 * self.side;
        let (x, y) = (self.corner.x, self.corner.y);
        [
            Square { corner: Point::new(x, y), side: s },
            Square { corner: Point::new(x + far, y), side: s },
            Square { corner: Point::new(x, y + far), side: s },
            Square { corner: Point::new(x + far, y + far), side: s },
        ]
    }

    /// All descendants `steps` generations down, in depth-first order.
    pub fn descendants(&self, steps: u32) -> Vec<Square> {
        let mut level = vec![*self];
        for _ in 0..steps {
            level = level.iter().flat_map(|q| q.corner_children()).collect();
        }
        level
    }

    /// `m × m` atoms at cell centers carrying `mass` uniformly; resolution
    /// is the cell side.
    pub fn area_measure(&self, m: usize, mass: f64) -> Result<DiscreteMeasure> {
        if m == 0 {
            return Err(Error::InvalidArgument("area measure needs at least one atom per side".into()));
        }
        let cell = self.side / m as f64;
        let mut pts = Vec::with_capacity(m * m);
        for i in 0..m {
            for j in 0..m {
                pts.push(Point::new(
                    self.corner.x + (i as f64 + 0.5) * cell,
                    self.corner.y + (j as f64 + 0.5) * cell,
                ));
            }
        }
        DiscreteMeasure::uniform(pts, mass, cell)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CantorSet {
    pub n: u32,
    pub squares: Vec<Square>,
    pub side: f64,
    /// One atom of mass `4⁻ⁿ` at the center of each square.
    pub measure: DiscreteMeasure,
}

/// Generation `n` of the corner Cantor set in the unit square.
pub fn cantor_corner(n: u32) -> Result<CantorSet> {
    if n > MAX_GENERATION {
        return Err(Error::InvalidArgument(format!("generation {n} exceeds the cap {MAX_GENERATION}")));
    }
    let squares = Square::UNIT.descendants(n);
    let side = 0.25f64.powi(n as i32);
    let points = squares.iter().map(Square::center).collect();
    let measure = DiscreteMeasure::uniform(points, 1.0, side)?.with_label(format!("cantor_corner_{n}"));
    Ok(CantorSet { n, squares, side, measure })
}

impl CantorSet {
    /// The measure split by first-generation square: four copies of
    /// generation `n − 1`, each scaled by 1/4 in space and in mass.
    pub fn quarter_parts(&self) -> Result<Vec<DiscreteMeasure>> {
        if self.n == 0 {
            return Err(Error::InvalidArgument("generation 0 has no sub-squares".into()));
        }
        Ok(Square::UNIT
            .corner_children()
            .iter()
            .map(|q| self.measure.filter(|p| q.contains(p)))
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_generations() {
        let c0 = cantor_corner(0).unwrap();
        assert_eq!(c0.measure.points(), &[Point::new(0.5, 0.5)]);
        assert_eq!(c0.measure.weights(), &[1.0]);

        let c1 = cantor_corner(1).unwrap();
        assert!(c1.measure.weights().iter().all(|&w| w == 0.25));
        let want = [(0.125, 0.125), (0.875, 0.125), (0.125, 0.875), (0.875, 0.875)];
        for (p, w) in c1.measure.points().iter().zip(want) {
            assert_eq!(*p, Point::new(w.0, w.1));
        }
        assert!(cantor_corner(MAX_GENERATION + 1).is_err());
    }

    #[test]
    fn mass_is_one() {
        for n in 0..=6 {
            let c = cantor_corner(n).unwrap();
            assert_eq!(c.measure.len(), 4usize.pow(n));
            assert_eq!(c.measure.total_mass(), 1.0);
            assert_eq!(c.measure.resolution_h(), c.side);
        }
    }

    #[test]
    fn growth_is_uniformly_bounded() {
        let gs: Vec<f64> =
            (1..=5).map(|n| cantor_corner(n).unwrap().measure.growth_constant().unwrap().growth_constant).collect();
        assert!(gs.iter().all(|&g| g < 3.0), "{gs:?}");
    }

    #[test]
    fn quarter_parts_partition() {
        let c = cantor_corner(3).unwrap();
        let parts = c.quarter_parts().unwrap();
        assert!(parts.iter().all(|p| p.len() == 16));
        assert_eq!(parts.iter().map(|p| p.total_mass()).sum::<f64>(), 1.0);
    }

    #[test]
    fn squares_are_nested() {
        let parents = Square::UNIT.descendants(2);
        for q in Square::UNIT.descendants(3) {
            assert!(parents.iter().any(|p| p.contains(q.corner) && p.contains(q.dilate(1.0).corner)));
        }
    }

    #[test]
    fn area_measure_layout() {
        let q = Square { corner: Point::new(1.0, 2.0), side: 0.5 };
        let m = q.area_measure(4, 2.0).unwrap();
        assert_eq!(m.len(), 16);
        assert_eq!(m.resolution_h(), 0.125);
        assert!(m.points().iter().all(|p| q.contains(*p)));
        assert!((m.total_mass() - 2.0).abs() < 1e-15);
    }
}
