//! Families of separated squares and discs built from the corner Cantor
//! construction with a single surviving square per stage, and the square
//! grid of small discs.

use serde::{Deserialize, Serialize};

use super::cantor::Square;
use crate::geometry::{CircleArc, Disc, Point};
use crate::measure::DiscreteMeasure;
use crate::{Error, Result};

/// Deepest generation the staged constructions accept.
pub const MAX_STAGED_DEPTH: u32 = 10;
/// Mass constant `c` in `‖μ_j‖ = c·ℓ_j`.
pub const DEFAULT_SQUARE_MASS: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PartSet {
    Square { square: Square },
    /// A disc; `host` is the square it was placed in, when there is one.
    Disc { disc: Disc, host: Option<Square> },
}

impl PartSet {
    /// Closed intersection test of the `factor`-dilates about the centers.
    pub fn dilates_intersect(&self, other: &PartSet, factor: f64) -> bool {
        match (self, other) {
            (PartSet::Square { square: a }, PartSet::Square { square: b }) => {
                a.dilate(factor).intersects(&b.dilate(factor))
            }
            (PartSet::Disc { disc: a, .. }, PartSet::Disc { disc: b, .. }) => {
                a.dilate(factor).intersects(&b.dilate(factor))
            }
            (PartSet::Square { square }, PartSet::Disc { disc, .. })
            | (PartSet::Disc { disc, .. }, PartSet::Square { square }) => {
                let q = square.dilate(factor);
                let d = disc.dilate(factor);
                let nx = d.center.x.clamp(q.corner.x, q.corner.x + q.side);
                let ny = d.center.y.clamp(q.corner.y, q.corner.y + q.side);
                Point::new(nx, ny).dist(d.center) <= d.radius
            }
        }
    }

    /// Radius of a disc containing the set, centered at its center.
    pub fn enclosing_disc(&self) -> Disc {
        match self {
            PartSet::Square { square } => {
                Disc { center: square.center(), radius: square.side * std::f64::consts::FRAC_1_SQRT_2 }
            }
            PartSet::Disc { disc, .. } => *disc,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PartRole {
    /// The starting unit square.
    Initial,
    /// A square left behind at the end of a stage.
    Sibling,
    /// The surviving square of the last stage.
    Terminal,
    /// A disc placed at a square center.
    CenterDisc,
    /// A disc of the grid family.
    GridDisc,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyPart {
    pub role: PartRole,
    /// Stage `k ≥ 1` of the construction (0 for the initial square).
    pub stage: usize,
    /// Cantor generation of the square the part comes from.
    pub generation: u32,
    pub set: PartSet,
    pub measure: DiscreteMeasure,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SquareFamily {
    pub nk: Vec<u32>,
    /// Surviving squares `Q_0 = [0,1]², Q_1, …, Q_K`.
    pub chosen: Vec<Square>,
    pub parts: Vec<FamilyPart>,
}

impl SquareFamily {
    pub fn measures(&self) -> Vec<DiscreteMeasure> {
        self.parts.iter().map(|p| p.measure.clone()).collect()
    }

    pub fn measure(&self) -> Result<DiscreteMeasure> {
        DiscreteMeasure::sum(self.parts.iter().map(|p| &p.measure))
    }

    /// `μ|Q` for a square `Q` of the construction, keeping whole parts.
    pub fn measure_in(&self, q: &Square) -> Result<DiscreteMeasure> {
        let inside: Vec<&DiscreteMeasure> = self
            .parts
            .iter()
            .filter(|p| match &p.set {
                PartSet::Square { square } => {
                    q.contains(square.corner)
                        && q.contains(Point::new(square.corner.x + square.side, square.corner.y + square.side))
                }
                PartSet::Disc { disc, .. } => q.contains(disc.center),
            })
            .filter(|p| p.role != PartRole::Initial || *q == Square::UNIT)
            .map(|p| &p.measure)
            .collect();
        DiscreteMeasure::sum(inside)
    }

    /// Index pairs whose 2-dilates meet.
    pub fn two_separation_violations(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 0..self.parts.len() {
            for j in i + 1..self.parts.len() {
                if self.parts[i].set.dilates_intersect(&self.parts[j].set, 2.0) {
                    out.push((i, j));
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StagedOptions {
    /// `c` in `‖μ_j‖ = c·ℓ_j` for square parts.
    pub mass_constant: f64,
    /// Atoms per side of each square's area measure.
    pub atoms_per_side: usize,
    /// Scale `c'` of the disc measures.
    pub disc_mass_constant: f64,
    /// Atoms on each disc's boundary circle.
    pub atoms_per_circle: usize,
}

impl Default for StagedOptions {
    fn default() -> Self {
        Self { mass_constant: DEFAULT_SQUARE_MASS, atoms_per_side: 2, disc_mass_constant: 1.0, atoms_per_circle: 8 }
    }
}

fn check_nk(nk: &[u32]) -> Result<()> {
    if nk.len() < 2 || nk[0] != 0 {
        return Err(Error::InvalidArgument("stage depths must start at 0 and have at least two entries".into()));
    }
    if nk.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument(format!("stage depths must increase strictly, got {nk:?}")));
    }
    let last = *nk.last().unwrap();
    if last > MAX_STAGED_DEPTH {
        return Err(Error::InvalidArgument(format!("depth {last} exceeds the cap {MAX_STAGED_DEPTH}")));
    }
    Ok(())
}

fn square_part(role: PartRole, stage: usize, generation: u32, q: Square, opts: &StagedOptions) -> Result<FamilyPart> {
    Ok(FamilyPart {
        role,
        stage,
        generation,
        set: PartSet::Square { square: q },
        measure: q.area_measure(opts.atoms_per_side, opts.mass_constant * q.side)?,
    })
}

/// Runs the stages: from `Q_{k−1}` take `N_k − N_{k−1}` corner steps, keep
/// the lower-left square as `Q_k` and hand every other square to `emit`.
fn run_stages(
    nk: &[u32],
    mut emit: impl FnMut(usize, u32, &Square, &[Square]) -> Result<()>,
) -> Result<Vec<Square>> {
    let mut chosen = vec![Square::UNIT];
    for k in 1..nk.len() {
        let q = *chosen.last().unwrap();
        let kids = q.descendants(nk[k] - nk[k - 1]);
        emit(k, nk[k], &q, &kids[1..])?;
        chosen.push(kids[0]);
    }
    Ok(chosen)
}

/// Square family: uniform area measures of mass `c·ℓ_j` on the siblings
/// left at each stage, on the terminal square, and (if `include_initial`)
/// on the unit square itself.
pub fn david_semmes_ex1(nk: &[u32], include_initial: bool, opts: StagedOptions) -> Result<SquareFamily> {
    check_nk(nk)?;
    let mut parts = Vec::new();
    if include_initial {
        parts.push(square_part(PartRole::Initial, 0, 0, Square::UNIT, &opts)?);
    }
    let chosen = run_stages(nk, |k, gen, _, siblings| {
        for q in siblings {
            parts.push(square_part(PartRole::Sibling, k, gen, *q, &opts)?);
        }
        Ok(())
    })?;
    let last = *chosen.last().unwrap();
    parts.push(square_part(PartRole::Terminal, nk.len() - 1, *nk.last().unwrap(), last, &opts)?);
    Ok(SquareFamily { nk: nk.to_vec(), chosen, parts })
}

/// The square family without the unit square, plus discs of radius
/// `4⁻ⁿ/10` concentric with every generation-`n` square visited, carrying
/// boundary-circle measures of mass `c'·2⁻ⁿ·4⁻ⁿ`.
///
/// Stage 1 places discs for generations `0..=N_1`; stage `k ≥ 2` for
/// generations `N_{k−1}+1..=N_k` inside `Q_{k−1}`, so that no square gets two
/// discs.
pub fn ex2_with_discs(nk: &[u32], opts: StagedOptions) -> Result<SquareFamily> {
    let mut fam = david_semmes_ex1(nk, false, opts)?;
    let mut discs = Vec::new();
    for k in 1..nk.len() {
        let q = fam.chosen[k - 1];
        let first = if k == 1 { 0 } else { nk[k - 1] + 1 };
        for gen in first..=nk[k] {
            for host in q.descendants(gen - nk[k - 1]) {
                let radius = 0.25f64.powi(gen as i32) / 10.0;
                let disc = Disc::new(host.center(), radius)?;
                let mass = opts.disc_mass_constant * 0.5f64.powi(gen as i32) * 0.25f64.powi(gen as i32);
                let circle = DiscreteMeasure::arc_length(&CircleArc::full_circle(disc.center, radius)?, opts.atoms_per_circle)?;
                discs.push(FamilyPart {
                    role: PartRole::CenterDisc,
                    stage: k,
                    generation: gen,
                    set: PartSet::Disc { disc, host: Some(host) },
                    measure: circle.scale(mass / circle.total_mass())?,
                });
            }
        }
    }
    fam.parts.extend(discs);
    Ok(fam)
}

/// `N²` discs of radius `ℓ/N²` centered at `(ℓi/(N−1), ℓj/(N−1))`, with
/// arc-length measure on their boundary circles. The companion discs
/// `D_ij = 2E_ij` are returned alongside.
pub fn grid_prop53(ell: f64, n: usize, atoms_per_circle: usize) -> Result<(SquareFamily, Vec<Disc>)> {
    if n < 4 {
        return Err(Error::InvalidArgument(format!("grid needs N ≥ 4, got {n}")));
    }
    if !(ell > 0.0) {
        return Err(Error::InvalidArgument(format!("side must be positive, got {ell}")));
    }
    let step = ell / (n - 1) as f64;
    let radius = ell / (n * n) as f64;
    let mut parts = Vec::with_capacity(n * n);
    let mut big = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let disc = Disc::new(Point::new(step * i as f64, step * j as f64), radius)?;
            let measure = DiscreteMeasure::arc_length(&CircleArc::full_circle(disc.center, radius)?, atoms_per_circle)?;
            parts.push(FamilyPart {
                role: PartRole::GridDisc,
                stage: 0,
                generation: 0,
                set: PartSet::Disc { disc, host: None },
                measure,
            });
            big.push(disc.dilate(2.0));
        }
    }
    Ok((SquareFamily { nk: Vec::new(), chosen: Vec::new(), parts }, big))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cauchy::energy_of_one;

    #[test]
    fn first_stage_counts_and_masses() {
        let f = david_semmes_ex1(&[0, 2], true, StagedOptions::default()).unwrap();
        let siblings: Vec<_> = f.parts.iter().filter(|p| p.role == PartRole::Sibling).collect();
        assert_eq!(siblings.len(), 15);
        for p in &siblings {
            assert!((p.measure.total_mass() - 0.25 / 16.0).abs() < 1e-15);
            assert_eq!(p.generation, 2);
        }
        assert_eq!(f.parts.iter().filter(|p| p.role == PartRole::Initial).count(), 1);
        assert_eq!(f.parts.iter().filter(|p| p.role == PartRole::Terminal).count(), 1);
    }

    #[test]
    fn chosen_squares_are_nested() {
        let f = david_semmes_ex1(&[0, 1, 3, 6], false, StagedOptions::default()).unwrap();
        for w in f.chosen.windows(2) {
            assert!(w[0].contains(w[1].corner));
            assert!(w[0].contains(Point::new(w[1].corner.x + w[1].side, w[1].corner.y + w[1].side)));
            assert_eq!(w[1].corner, w[0].corner);
        }
    }

    #[test]
    fn squares_without_initial_are_two_separated() {
        let f = david_semmes_ex1(&[0, 2, 4], false, StagedOptions::default()).unwrap();
        assert!(f.two_separation_violations().is_empty());
    }

    #[test]
    fn bad_depths() {
        let o = StagedOptions::default();
        assert!(david_semmes_ex1(&[1, 2], false, o).is_err());
        assert!(david_semmes_ex1(&[0, 2, 2], false, o).is_err());
        assert!(david_semmes_ex1(&[0, 11], false, o).is_err());
        assert!(david_semmes_ex1(&[0], false, o).is_err());
    }

    #[test]
    fn ex2_disc_counts_and_masses() {
        let f = ex2_with_discs(&[0, 2, 4], StagedOptions::default()).unwrap();
        let discs: Vec<_> = f.parts.iter().filter(|p| p.role == PartRole::CenterDisc).collect();
        let stage1 = discs.iter().filter(|p| p.stage == 1).count();
        assert_eq!(stage1, 1 + 4 + 16);
        let stage2 = discs.iter().filter(|p| p.stage == 2).count();
        assert_eq!(stage2, 4 + 16);
        for p in &discs {
            let n = p.generation as i32;
            let want = 0.5f64.powi(n) * 0.25f64.powi(n);
            assert!((p.measure.total_mass() - want).abs() <= 1e-14 * want);
        }
        assert!(f.parts.iter().all(|p| p.role != PartRole::Initial));
    }

    #[test]
    fn ex2_separation_fails_only_inside_host_squares() {
        let f = ex2_with_discs(&[0, 2, 4], StagedOptions::default()).unwrap();
        let bad = f.two_separation_violations();
        assert!(!bad.is_empty());
        for (i, j) in bad {
            let (a, b) = (&f.parts[i].set, &f.parts[j].set);
            let (host, sq) = match (a, b) {
                (PartSet::Disc { host: Some(h), .. }, PartSet::Square { square })
                | (PartSet::Square { square }, PartSet::Disc { host: Some(h), .. }) => (*h, *square),
                _ => panic!("unexpected overlap between parts {i} and {j}"),
            };
            assert!(host.contains(sq.center()), "{host:?} / {sq:?}");
        }
    }

    #[test]
    fn grid_layout() {
        let (f, big) = grid_prop53(1.0, 4, 8).unwrap();
        assert_eq!(f.parts.len(), 16);
        assert_eq!(big.len(), 16);
        for p in &f.parts {
            let PartSet::Disc { disc, .. } = p.set else { panic!() };
            assert_eq!(disc.radius, 1.0 / 16.0);
        }
        assert!(f.two_separation_violations().is_empty());
        assert!(grid_prop53(1.0, 3, 8).is_err());
    }

    #[test]
    fn grid_potential_stays_bounded() {
        // mean square of the truncated Cauchy transform of the boundary measure
        let vals: Vec<f64> = [4, 8, 16]
            .iter()
            .map(|&n| {
                let (f, _) = grid_prop53(1.0, n, 16).unwrap();
                let mu = f.measure().unwrap();
                energy_of_one(&mu, mu.resolution_h() / 2f64.sqrt()).unwrap() / mu.total_mass()
            })
            .collect();
        let (lo, hi) = vals.iter().fold((f64::MAX, 0.0f64), |(a, b), &x| (a.min(x), b.max(x)));
        assert!(hi / lo < 4.0, "{vals:?}");
    }
}
