//! Truncated extended Fock space: level-indexed families of
//! composition-indexed block-symmetric tensors, the weighted inner product,
//! and the creation / neutral / annihilation operators of the Jacobi field.

mod comp;
mod ops;
mod tensor;

pub use comp::{compositions_of, Composition};
pub use ops::{ExtOps, Tweaks};
pub use tensor::{d_alpha, permutations, tuples, BlockTensor, SymTensor};

use std::collections::BTreeMap;

use rand::Rng;
use thiserror::Error;

use crate::grid::GridError;
use crate::orthopoly::OrthoError;

#[derive(Debug, Error)]
pub enum ExtError {
    #[error("operation would exceed the level truncation n_max = {0}")]
    TruncationOverflow(usize),
    #[error("vectors have different truncations or grid sizes")]
    ShapeMismatch,
    #[error("composition weight {comp_weight} does not match level {level}")]
    WeightMismatch { comp_weight: usize, level: usize },
    #[error(transparent)]
    Ortho(#[from] OrthoError),
    #[error(transparent)]
    Grid(#[from] GridError),
}

pub type LevelMap = BTreeMap<Composition, BlockTensor>;

/// An element of the truncated extended Fock space over an `M`-point grid:
/// levels `0 ..= n_max`, each a map from compositions of that weight to
/// block-symmetric tensors. Missing coordinates are zero.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtVector {
    m: usize,
    n_max: usize,
    levels: Vec<LevelMap>,
}

impl ExtVector {
    pub fn zero(m: usize, n_max: usize) -> Self {
        ExtVector { m, n_max, levels: vec![LevelMap::new(); n_max + 1] }
    }

    /// The vacuum `Ω = (1, 0, 0, …)`.
    pub fn vacuum(m: usize, n_max: usize) -> Self {
        let mut v = Self::zero(m, n_max);
        v.levels[0].insert(Composition::empty(), BlockTensor::scalar(m, 1.0));
        v
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn level(&self, n: usize) -> &LevelMap {
        &self.levels[n]
    }

    pub fn get(&self, n: usize, comp: &Composition) -> Option<&BlockTensor> {
        self.levels.get(n).and_then(|l| l.get(comp))
    }

    /// Highest level with a stored coordinate (0 for the zero vector).
    pub fn top_level(&self) -> usize {
        (0..=self.n_max).rev().find(|&n| !self.levels[n].is_empty()).unwrap_or(0)
    }

    /// Insert (accumulate) a coordinate at the level its weight dictates.
    pub fn add_coord(&mut self, tensor: BlockTensor, factor: f64) -> Result<(), ExtError> {
        let n = tensor.comp().weight();
        if n > self.n_max {
            return Err(ExtError::TruncationOverflow(self.n_max));
        }
        match self.levels[n].entry(tensor.comp().clone()) {
            std::collections::btree_map::Entry::Occupied(mut e) => {
                e.get_mut().add_assign(&tensor, factor);
            }
            std::collections::btree_map::Entry::Vacant(e) => {
                let mut t = tensor;
                t.scale(factor);
                e.insert(t);
            }
        }
        Ok(())
    }

    /// Place a fully symmetric order-`n` tensor at level `n` by taking all
    /// of its diagonal restrictions.
    pub fn from_symmetric(f: &SymTensor, n_max: usize) -> Result<Self, ExtError> {
        let n = f.order();
        if n > n_max {
            return Err(ExtError::TruncationOverflow(n_max));
        }
        let mut v = Self::zero(f.m(), n_max);
        for comp in compositions_of(n) {
            v.levels[n].insert(comp.clone(), d_alpha(f, &comp));
        }
        Ok(v)
    }

    pub fn add_assign(&mut self, other: &ExtVector, factor: f64) -> Result<(), ExtError> {
        if self.m != other.m || self.n_max != other.n_max {
            return Err(ExtError::ShapeMismatch);
        }
        for lvl in other.levels.iter() {
            for t in lvl.values() {
                self.add_coord(t.clone(), factor)?;
            }
        }
        Ok(())
    }

    pub fn max_abs(&self) -> f64 {
        self.levels
            .iter()
            .flat_map(|l| l.values())
            .fold(0.0f64, |acc, t| acc.max(t.max_abs()))
    }

    /// Random vector supported on levels `≤ max_level`, every coordinate a
    /// symmetrized dense tensor with entries in `(−1, 1)`.
    pub fn random(m: usize, n_max: usize, max_level: usize, rng: &mut impl Rng) -> Self {
        let mut v = Self::zero(m, n_max);
        for n in 0..=max_level.min(n_max) {
            for comp in compositions_of(n) {
                let mut t = BlockTensor::zeros(m, comp.clone());
                for tup in tuples(m, comp.size()) {
                    t.set(&tup, rng.gen_range(-1.0..1.0));
                }
                v.levels[n].insert(comp, t.symmetrize());
            }
        }
        v
    }
}
