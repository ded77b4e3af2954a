//! Experiments that check inequalities, identities and scaling laws on
//! generated families.
//!
//! Every experiment is a pure function of its parameters and seed. Instances
//! run in parallel and are merged by instance index, so records do not
//! depend on the thread count.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

mod chains;
mod energy;
mod sets;

pub use chains::{
    almost_additivity_check, good_index_selection, good_index_trials, main_lemma_check, marcinkiewicz_check,
    marcinkiewicz_sums, marcinkiewicz_trials, AlmostAdditivityParams, GoodIndexParams, GoodIndexReport,
    MainLemmaParams, MarcinkiewiczParams, MAIN_LEMMA_BAND,
};
pub use energy::{
    cauchy_independence_check, energy_identity_check, opnorm_divergence_ex1, CauchyIndependenceParams,
    EnergyIdentityParams, OpnormDivergenceParams, DIVERGENCE_BAND,
};
pub use sets::{
    cantor_scaling, capacity_sanity, mainc_check, sample_discs, self_similarity_audit, CantorScalingParams,
    CapacitySanityParams, MaincParams, SelfSimilarityParams, CANTOR_BAND, SELF_SIMILARITY_TOL,
};

/// One table cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Bool(bool),
    Text(String),
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<u32> for Cell {
    fn from(v: u32) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl std::fmt::Display for Cell {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Cell::Int(v) => write!(f, "{v}"),
            Cell::Float(v) => write!(f, "{v:?}"),
            Cell::Bool(v) => write!(f, "{v}"),
            Cell::Text(v) if v.contains([',', '"', '\n']) => write!(f, "\"{}\"", v.replace('"', "\"\"")),
            Cell::Text(v) => write!(f, "{v}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    AtMost,
    #[serde(rename = ">=")]
    AtLeast,
    #[serde(rename = ">")]
    Above,
}

/// A declared band: `value relation limit`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandCheck {
    pub name: String,
    pub value: f64,
    pub relation: Relation,
    pub limit: f64,
    pub passed: bool,
    /// Exploratory bands are recorded but never fail a run.
    pub asserted: bool,
}

impl BandCheck {
    pub fn new(name: impl Into<String>, value: f64, relation: Relation, limit: f64) -> Self {
        let passed = match relation {
            Relation::AtMost => value <= limit,
            Relation::AtLeast => value >= limit,
            Relation::Above => value > limit,
        };
        Self { name: name.into(), value, relation, limit, passed, asserted: true }
    }

    pub fn at_most(name: impl Into<String>, value: f64, limit: f64) -> Self {
        Self::new(name, value, Relation::AtMost, limit)
    }

    pub fn at_least(name: impl Into<String>, value: f64, limit: f64) -> Self {
        Self::new(name, value, Relation::AtLeast, limit)
    }

    pub fn above(name: impl Into<String>, value: f64, limit: f64) -> Self {
        Self::new(name, value, Relation::Above, limit)
    }

    pub fn exploratory(mut self) -> Self {
        self.asserted = false;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub name: String,
    pub parameters: serde_json::Value,
    pub seed: u64,
    pub columns: Vec<String>,
    pub records: Vec<Vec<Cell>>,
    pub summary: BTreeMap<String, f64>,
    pub bands: Vec<BandCheck>,
}

impl ExperimentResult {
    pub fn new(name: &str, parameters: impl Serialize, seed: u64, columns: &[&str]) -> Self {
        Self {
            name: name.to_string(),
            parameters: serde_json::to_value(parameters).unwrap_or(serde_json::Value::Null),
            seed,
            columns: columns.iter().map(|c| c.to_string()).collect(),
            records: Vec::new(),
            summary: BTreeMap::new(),
            bands: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.records.push(row);
    }

    pub fn set(&mut self, key: &str, value: f64) {
        self.summary.insert(key.to_string(), value);
    }

    pub fn band(&mut self, b: BandCheck) {
        self.bands.push(b);
    }

    /// True when every asserted band holds.
    pub fn passed(&self) -> bool {
        self.bands.iter().all(|b| b.passed || !b.asserted)
    }

    pub fn failed_bands(&self) -> impl Iterator<Item = &BandCheck> {
        self.bands.iter().filter(|b| b.asserted && !b.passed)
    }

    /// Records as CSV with a header row.
    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.records {
            let cells: Vec<String> = row.iter().map(|c| c.to_string()).collect();
            let _ = writeln!(out, "{}", cells.join(","));
        }
        out
    }

    /// Values of a numeric column, in record order.
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let idx = self.columns.iter().position(|c| c == name)?;
        Some(
            self.records
                .iter()
                .map(|r| match &r[idx] {
                    Cell::Int(v) => *v as f64,
                    Cell::Float(v) => *v,
                    Cell::Bool(v) => f64::from(u8::from(*v)),
                    Cell::Text(_) => f64::NAN,
                })
                .collect(),
        )
    }
}

/// `max / min` of positive values, `∞` if the smallest is not positive.
pub fn band_ratio(values: &[f64]) -> f64 {
    let (lo, hi) = values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    if lo > 0.0 {
        hi / lo
    } else {
        f64::INFINITY
    }
}

/// Seed of instance `index` within a run seeded by `seed`.
pub(crate) fn instance_seed(seed: u64, index: u64) -> u64 {
    // splitmix64 finalizer
    let mut z = seed ^ index.wrapping_add(1).wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Registered experiments with the relation each one examines.
pub const EXPERIMENTS: &[(&str, &str)] = &[
    (
        "marcinkiewicz_check",
        "Chains of discs on a line: S_{N,1} = Σ_{j<k} ‖μ_j‖‖μ_k‖²/(r_j+…+r_k)² and its mirror S_{N,2} are at most ‖μ_1‖+…+‖μ_N‖.",
    ),
    (
        "main_lemma_check",
        "Main Lemma: c²(μ) ≤ Σ_j c²(μ_j) + C‖μ‖ for μ = Σμ_j with ‖μ_j‖ ≤ r_j on λ-separated discs; reports ρ = (c²(μ) − Σ c²(μ_j))/‖μ‖.",
    ),
    (
        "good_index_selection",
        "Marcinkiewicz selection: g_i = Σ_{j≠i} r_jγ_j/D(Q_j,Q_i)², Q_i = λ'D_i; I_* = {g_i ≤ 10A₀} keeps Σ_{I_*} γ_j ≥ (9/10)Σ γ_j.",
    ),
    (
        "mainc_check",
        "Mass against capacity on discs: μ(B) ≤ C₀ γ(B∩E) over sampled discs B.",
    ),
    (
        "almost_additivity_check",
        "Almost additivity: γ(∪E_j) ≥ c Σ_j γ(E_j) for sets in λ-separated discs on a line; values of λ near 1 are exploratory.",
    ),
    (
        "opnorm_divergence_ex1",
        "Staged corner squares with growing gaps: ‖C_{μ|Q_k}(1)‖² ≥ c(N_{k+1}−N_k)4^{−N_k}, so ‖C_μ‖ is unbounded.",
    ),
    (
        "cauchy_independence_check",
        "Cauchy independence: max_j ‖C_{μ_j}‖ against ‖C_μ‖ for μ = Σμ_j.",
    ),
    (
        "energy_identity",
        "Energy identity: ‖C_ε(1)‖²_{L²(μ)} = c_ε²(μ)/6 + O(‖μ‖).",
    ),
    (
        "cantor_scaling",
        "Corner 1/4-Cantor sets: c²(μ_n) ≍ n and γ(E_n) ≍ 1/√n.",
    ),
    (
        "self_similarity",
        "Corner Cantor decomposition: the four quarter pieces of μ_{n+1} carry c²(μ_n) in total, cross terms are nonnegative.",
    ),
    (
        "capacity_sanity",
        "Capacity bounds of a sample against model values: curvature and operator-norm lower bounds, enclosing-disc upper bound.",
    ),
];

pub fn describe(name: &str) -> Option<&'static str> {
    EXPERIMENTS.iter().find(|(n, _)| *n == name).map(|(_, d)| *d)
}
