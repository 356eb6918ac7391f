//! Simplification of 2- and 3-qubit circuits built from dressed CNOTs.
//!
//! A DC-NOT is a CNOT dressed by single-qubit rotations and is fully described
//! by one unit vector per wire. Rewrites are justified by the quadratic
//! LO-RHS invariant A σ_y^{⊗n} Aᵀ σ_y^{⊗n} and certified by factoring the
//! leftover operator into single-qubit pieces.

pub mod circuit;
pub mod invariants;
pub mod linalg;
pub mod optimizer;
pub mod rewrite2q;
pub mod rewrite3q;
