//! Constructions of the planar families used by the experiments.

pub mod cantor;
pub mod chain;
pub mod circles;
pub mod curves;
pub mod family;
pub mod squares;

pub use cantor::{cantor_corner, CantorSet, Square};
pub use chain::{bead_chain_on_line, random_radii, BeadChain, PartShape};
pub use circles::{covering_number, lj_circles, CoveringCertificate};
pub use curves::{chordarc_envelope, mobius_transfer, Envelope};
pub use squares::{david_semmes_ex1, ex2_with_discs, grid_prop53, FamilyPart, PartRole, PartSet, SquareFamily, StagedOptions};
pub use family::{Family, FamilySpec};
