//! Finite weighted discretization of the spatial factor `(X, σ)` and the
//! real-valued test functions living on it.
//!
//! The non-atomicity the continuum setting assumes for `σ` is deliberately
//! dropped: every identity exercised downstream is algebraic in the pairs
//! `(φᵢ, σᵢ)`, so weighted sums carry the full content at desk scale. The
//! grid weights already include the jump-measure normalization factor
//! (`σ′ = cσ`) when built through [`SpaceGrid::scaled`].

use thiserror::Error;

use crate::measure::csum;

#[derive(Debug, Error)]
pub enum GridError {
    #[error("test functions live on different grids")]
    GridMismatch,
    #[error("value list length {got} does not match grid size {want}")]
    LengthMismatch { got: usize, want: usize },
    #[error("non-positive grid weight {0}")]
    NonPositiveWeight(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpaceGrid {
    weights: Vec<f64>,
}

impl SpaceGrid {
    pub fn new(weights: Vec<f64>) -> Result<Self, GridError> {
        if weights.is_empty() {
            return Err(GridError::LengthMismatch { got: 0, want: 1 });
        }
        for &w in &weights {
            if !(w > 0.0) {
                return Err(GridError::NonPositiveWeight(w));
            }
        }
        Ok(SpaceGrid { weights })
    }

    /// Grid with the measure-normalization factor multiplied into every weight.
    pub fn scaled(weights: Vec<f64>, sigma_scale: f64) -> Result<Self, GridError> {
        Self::new(weights.into_iter().map(|w| w * sigma_scale).collect())
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

/// A function `φ` on the grid, standing in for a smooth test function.
#[derive(Debug, Clone, PartialEq)]
pub struct TestFunction {
    grid: SpaceGrid,
    values: Vec<f64>,
}

impl TestFunction {
    pub fn new(grid: SpaceGrid, values: Vec<f64>) -> Result<Self, GridError> {
        if values.len() != grid.len() {
            return Err(GridError::LengthMismatch { got: values.len(), want: grid.len() });
        }
        Ok(TestFunction { grid, values })
    }

    pub fn grid(&self) -> &SpaceGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, i: usize) -> f64 {
        self.values[i]
    }

    /// `⟨φ, ψ⟩ = Σᵢ φᵢ ψᵢ σᵢ`.
    pub fn inner(&self, other: &TestFunction) -> Result<f64, GridError> {
        if self.grid != other.grid {
            return Err(GridError::GridMismatch);
        }
        Ok(csum(
            self.values
                .iter()
                .zip(&other.values)
                .zip(&self.grid.weights)
                .map(|((&a, &b), &w)| a * b * w),
        ))
    }

    pub fn norm_sq(&self) -> f64 {
        self.inner(self).expect("same grid")
    }

    /// Coordinatewise product `(φψ)ᵢ = φᵢψᵢ`.
    pub fn pointwise_product(&self, other: &TestFunction) -> Result<TestFunction, GridError> {
        if self.grid != other.grid {
            return Err(GridError::GridMismatch);
        }
        Ok(TestFunction {
            grid: self.grid.clone(),
            values: self.values.iter().zip(&other.values).map(|(&a, &b)| a * b).collect(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn grid(w: &[f64]) -> SpaceGrid {
        SpaceGrid::new(w.to_vec()).unwrap()
    }

    #[test]
    fn inner_examples() {
        let g = grid(&[1.0]);
        let one = TestFunction::new(g.clone(), vec![1.0]).unwrap();
        assert_eq!(one.inner(&one).unwrap(), 1.0);

        let g2 = grid(&[1.0, 1.0]);
        let e1 = TestFunction::new(g2.clone(), vec![1.0, 0.0]).unwrap();
        let e2 = TestFunction::new(g2.clone(), vec![0.0, 1.0]).unwrap();
        assert_eq!(e1.inner(&e2).unwrap(), 0.0);

        let g3 = grid(&[0.5, 2.0]);
        let f = TestFunction::new(g3.clone(), vec![1.0, 2.0]).unwrap();
        let h = TestFunction::new(g3, vec![3.0, 1.0]).unwrap();
        assert_relative_eq!(f.inner(&h).unwrap(), 5.5);
    }

    #[test]
    fn product_examples() {
        let g = grid(&[1.0, 1.0]);
        let f = TestFunction::new(g.clone(), vec![1.0, 2.0]).unwrap();
        let one = TestFunction::new(g.clone(), vec![1.0, 1.0]).unwrap();
        assert_eq!(f.pointwise_product(&one).unwrap(), f);

        let e1 = TestFunction::new(g.clone(), vec![1.0, 0.0]).unwrap();
        let e2 = TestFunction::new(g.clone(), vec![0.0, 1.0]).unwrap();
        assert_eq!(e1.pointwise_product(&e2).unwrap().values(), &[0.0, 0.0]);

        let h = TestFunction::new(g, vec![3.0, 1.0]).unwrap();
        assert_eq!(f.pointwise_product(&h).unwrap().values(), &[3.0, 2.0]);
    }

    #[test]
    fn mismatched_grids_rejected() {
        let f = TestFunction::new(grid(&[1.0]), vec![1.0]).unwrap();
        let h = TestFunction::new(grid(&[2.0]), vec![1.0]).unwrap();
        assert!(matches!(f.inner(&h), Err(GridError::GridMismatch)));
        assert!(matches!(f.pointwise_product(&h), Err(GridError::GridMismatch)));
    }

    #[test]
    fn sigma_scale_multiplied_in() {
        let g = SpaceGrid::scaled(vec![1.0, 2.0], 4.0).unwrap();
        assert_eq!(g.weights(), &[4.0, 8.0]);
    }

    proptest! {
        #[test]
        fn inner_bilinear_symmetric_positive(
            vals in prop::collection::vec((-10.0f64..10.0, -10.0f64..10.0, 0.01f64..5.0), 1..6),
            c in -3.0f64..3.0,
        ) {
            let w: Vec<f64> = vals.iter().map(|v| v.2).collect();
            let g = SpaceGrid::new(w).unwrap();
            let f = TestFunction::new(g.clone(), vals.iter().map(|v| v.0).collect()).unwrap();
            let h = TestFunction::new(g.clone(), vals.iter().map(|v| v.1).collect()).unwrap();
            let fh = f.inner(&h).unwrap();
            prop_assert!((fh - h.inner(&f).unwrap()).abs() < 1e-12);
            // linearity in the first slot
            let cf = TestFunction::new(g.clone(), f.values().iter().map(|v| c * v).collect()).unwrap();
            prop_assert!((cf.inner(&h).unwrap() - c * fh).abs() < 1e-9);
            // positive definiteness
            if f.values().iter().any(|&v| v != 0.0) {
                prop_assert!(f.norm_sq() > 0.0);
            }
        }

        #[test]
        fn product_associates_with_inner(
            vals in prop::collection::vec(
                (-5.0f64..5.0, -5.0f64..5.0, -5.0f64..5.0, 0.01f64..5.0), 1..6),
        ) {
            let g = SpaceGrid::new(vals.iter().map(|v| v.3).collect()).unwrap();
            let f = TestFunction::new(g.clone(), vals.iter().map(|v| v.0).collect()).unwrap();
            let h = TestFunction::new(g.clone(), vals.iter().map(|v| v.1).collect()).unwrap();
            let k = TestFunction::new(g.clone(), vals.iter().map(|v| v.2).collect()).unwrap();
            let lhs = f.pointwise_product(&h).unwrap().inner(&k).unwrap();
            let rhs = f.inner(&h.pointwise_product(&k).unwrap()).unwrap();
            prop_assert!((lhs - rhs).abs() < 1e-9);
            prop_assert_eq!(
                f.pointwise_product(&h).unwrap(),
                h.pointwise_product(&f).unwrap()
            );
        }
    }
}
