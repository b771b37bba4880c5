//! Finite-truncation construction of the Jacobi field of a pure-jump Lévy
//! process in two unitarily equivalent representations — an extended Fock
//! space with interaction weights, and the standard symmetric Fock space
//! over `ℓ₂ ⊗ L²(σ)` — together with the oracles that verify their
//! agreement.

pub mod config;
pub mod extfock;
pub mod grid;
pub mod measure;
pub mod orthopoly;
pub mod stdfock;
pub mod verify;
