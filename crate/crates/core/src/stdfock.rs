//! Truncated symmetric Fock space over `ℓ₂ ⊗ L²(X, σ)` with creation,
//! annihilation, differential second quantization, and the simplified field
//! operators built from the Jacobi matrix acting on the `ℓ₂` factor.
//!
//! Level `n` is stored multiset-compressed: one coefficient per
//! non-decreasing tuple of single-particle indices, equal to the value of
//! the underlying symmetric tensor there. The storage contract is the
//! identity `⟨h^⊗n, g^⊗n⟩ = n!·⟨h, g⟩ⁿ`.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::grid::{SpaceGrid, TestFunction};
use crate::orthopoly::{truncated_matrix_dim, JacobiCoeffs, OrthoError, TridiagonalOperator};

#[derive(Debug, Error)]
pub enum FockError {
    #[error("operation would exceed the level truncation n_max = {0}")]
    TruncationOverflow(usize),
    #[error("raising the ℓ₂ index past the truncation K = {0}")]
    EllOverflow(usize),
    #[error("vectors have different shapes")]
    ShapeMismatch,
    #[error(transparent)]
    Ortho(#[from] OrthoError),
}

/// A vector in `ℓ₂ ⊗ L²(X, σ)` at truncation `(K, M)`; index `ℓ·M + x`.
#[derive(Debug, Clone, PartialEq)]
pub struct SingleParticle {
    pub kdim: usize,
    pub m: usize,
    pub data: Vec<f64>,
}

impl SingleParticle {
    pub fn zeros(kdim: usize, m: usize) -> Self {
        SingleParticle { kdim, m, data: vec![0.0; kdim * m] }
    }

    /// `e_ℓ ⊗ φ`.
    pub fn basis_tensor(kdim: usize, ell: usize, phi: &TestFunction) -> Self {
        let m = phi.grid().len();
        let mut sp = Self::zeros(kdim, m);
        for x in 0..m {
            sp.data[ell * m + x] = phi.value(x);
        }
        sp
    }

    /// `ξ ⊗ φ` for a finite `ℓ₂` vector `ξ`.
    pub fn tensor(xi: &[f64], kdim: usize, phi: &TestFunction) -> Self {
        assert!(xi.len() <= kdim);
        let m = phi.grid().len();
        let mut sp = Self::zeros(kdim, m);
        for (l, &c) in xi.iter().enumerate() {
            for x in 0..m {
                sp.data[l * m + x] = c * phi.value(x);
            }
        }
        sp
    }
}

type Multiset = Vec<u16>;

/// Element of the truncated Fock space, levels `0 ..= n_max`; level `n` maps
/// sorted index tuples to symmetric-tensor values.
#[derive(Debug, Clone, PartialEq)]
pub struct FockVector {
    pub kdim: usize,
    pub m: usize,
    n_max: usize,
    levels: Vec<BTreeMap<Multiset, f64>>,
}

const DROP_EPS: f64 = 0.0; // keep exact zeros out of the maps

impl FockVector {
    pub fn zero(kdim: usize, m: usize, n_max: usize) -> Self {
        FockVector { kdim, m, n_max, levels: vec![BTreeMap::new(); n_max + 1] }
    }

    pub fn vacuum(kdim: usize, m: usize, n_max: usize) -> Self {
        let mut v = Self::zero(kdim, m, n_max);
        v.levels[0].insert(Vec::new(), 1.0);
        v
    }

    /// `h` placed at level 1.
    pub fn from_single(h: &SingleParticle, n_max: usize) -> Self {
        let mut v = Self::zero(h.kdim, h.m, n_max);
        for (i, &c) in h.data.iter().enumerate() {
            if c != 0.0 {
                v.levels[1].insert(vec![i as u16], c);
            }
        }
        v
    }

    /// `h^⊗n` at level `n`.
    pub fn product_power(h: &SingleParticle, n: usize, n_max: usize) -> Self {
        assert!(n <= n_max);
        let mut v = Self::zero(h.kdim, h.m, n_max);
        let mut acc: Vec<(Multiset, f64)> = vec![(Vec::new(), 1.0)];
        for _ in 0..n {
            let mut next = Vec::new();
            for (mset, c) in &acc {
                let start = mset.last().copied().unwrap_or(0);
                for i in start as usize..h.data.len() {
                    if h.data[i] != 0.0 {
                        let mut ms = mset.clone();
                        ms.push(i as u16);
                        next.push((ms, c * h.data[i]));
                    }
                }
            }
            acc = next;
        }
        for (mset, c) in acc {
            *v.levels[n].entry(mset).or_insert(0.0) += c;
        }
        v
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn level(&self, n: usize) -> &BTreeMap<Multiset, f64> {
        &self.levels[n]
    }

    pub fn top_level(&self) -> usize {
        (0..=self.n_max).rev().find(|&n| !self.levels[n].is_empty()).unwrap_or(0)
    }

    pub fn add_entry(&mut self, n: usize, mset: Multiset, value: f64) {
        if value != 0.0 {
            *self.levels[n].entry(mset).or_insert(0.0) += value;
        }
    }

    pub fn add_assign(&mut self, other: &FockVector, factor: f64) -> Result<(), FockError> {
        if self.kdim != other.kdim || self.m != other.m || self.n_max != other.n_max {
            return Err(FockError::ShapeMismatch);
        }
        for (n, lvl) in other.levels.iter().enumerate() {
            for (mset, &c) in lvl {
                self.add_entry(n, mset.clone(), factor * c);
            }
        }
        let _ = DROP_EPS;
        Ok(())
    }

    pub fn max_abs(&self) -> f64 {
        self.levels
            .iter()
            .flat_map(|l| l.values())
            .fold(0.0f64, |acc, v| acc.max(v.abs()))
    }

    /// Random vector on levels `≤ max_level` with single-particle indices
    /// `< dim_cap`, entries in `(−1, 1)`.
    pub fn random(
        kdim: usize,
        m: usize,
        n_max: usize,
        max_level: usize,
        dim_cap: usize,
        rng: &mut impl rand::Rng,
    ) -> Self {
        let mut v = Self::zero(kdim, m, n_max);
        let cap = dim_cap.min(kdim * m);
        for n in 0..=max_level.min(n_max) {
            let mut acc: Vec<Multiset> = vec![Vec::new()];
            for _ in 0..n {
                acc = acc
                    .iter()
                    .flat_map(|ms| {
                        (ms.last().copied().unwrap_or(0) as usize..cap).map(|i| {
                            let mut out = ms.clone();
                            out.push(i as u16);
                            out
                        })
                    })
                    .collect();
            }
            for mset in acc {
                v.levels[n].insert(mset, rng.gen_range(-1.0..1.0));
            }
        }
        v
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Distinct orderings of a sorted tuple: `n!/Π(repetition counts)!`.
fn multiplicity(mset: &[u16]) -> f64 {
    let mut mult = factorial(mset.len());
    let mut run = 1usize;
    for i in 1..mset.len() {
        if mset[i] == mset[i - 1] {
            run += 1;
        } else {
            mult /= factorial(run);
            run = 1;
        }
    }
    mult / factorial(run)
}

/// Which part of the Jacobi matrix drives the second quantization.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JacobiPart {
    Plus,
    Zero,
    Minus,
    Full,
}

/// Operator context for the simplified representation.
pub struct StdOps {
    pub grid: SpaceGrid,
    pub kdim: usize,
    jmat: TridiagonalOperator,
    /// Whether the coefficient set genuinely terminates at or before `K`,
    /// making the raising edge exactly zero.
    edge_is_zero: bool,
}

impl StdOps {
    pub fn new(grid: SpaceGrid, coeffs: &JacobiCoeffs, kdim: usize) -> Result<Self, FockError> {
        let jmat = truncated_matrix_dim(coeffs, kdim)?;
        let edge_is_zero = coeffs.terminated() && coeffs.order() <= kdim;
        Ok(StdOps { grid, kdim, jmat, edge_is_zero })
    }

    fn sp_weight(&self, i: usize) -> f64 {
        self.grid.weight(i % self.grid.len())
    }

    /// Single-particle inner product: unit weight on the `ℓ₂` factor,
    /// `σ`-weight on the grid factor.
    pub fn sp_inner(&self, h: &SingleParticle, g: &SingleParticle) -> f64 {
        crate::measure::csum(
            h.data
                .iter()
                .zip(&g.data)
                .enumerate()
                .map(|(i, (&a, &b))| a * b * self.sp_weight(i)),
        )
    }

    /// Full Fock inner product `Σ_n n! ⟨uₙ, vₙ⟩` with multiplicity-aware
    /// coefficient pairing.
    pub fn inner(&self, u: &FockVector, v: &FockVector) -> Result<f64, FockError> {
        if u.kdim != v.kdim || u.m != v.m {
            return Err(FockError::ShapeMismatch);
        }
        let mut total = 0.0;
        for n in 0..=u.n_max.min(v.n_max) {
            let (small, large) = if u.level(n).len() <= v.level(n).len() {
                (u.level(n), v.level(n))
            } else {
                (v.level(n), u.level(n))
            };
            let mut lvl = 0.0;
            for (mset, &a) in small {
                let Some(&b) = large.get(mset) else { continue };
                let w: f64 = mset.iter().map(|&i| self.sp_weight(i as usize)).product();
                lvl += multiplicity(mset) * a * b * w;
            }
            total += factorial(n) * lvl;
        }
        Ok(total)
    }

    pub fn norm(&self, v: &FockVector) -> Result<f64, FockError> {
        Ok(self.inner(v, v)?.max(0.0).sqrt())
    }

    /// Creation `a⁺(h)`: level `n` to `h ⊗̂ vₙ` at level `n+1`.
    pub fn a_plus(&self, h: &SingleParticle, v: &FockVector) -> Result<FockVector, FockError> {
        if !v.level(v.n_max).is_empty() {
            return Err(FockError::TruncationOverflow(v.n_max));
        }
        let mut out = FockVector::zero(v.kdim, v.m, v.n_max);
        for n in 0..v.n_max {
            for (mset, &c) in v.level(n) {
                for (i, &hv) in h.data.iter().enumerate() {
                    if hv == 0.0 {
                        continue;
                    }
                    let mut ms = mset.clone();
                    let pos = ms.partition_point(|&j| (j as usize) < i);
                    ms.insert(pos, i as u16);
                    let cnt = ms.iter().filter(|&&j| j as usize == i).count();
                    out.add_entry(n + 1, ms, cnt as f64 * hv * c / (n as f64 + 1.0));
                }
            }
        }
        Ok(out)
    }

    /// Annihilation `a⁻(h)`: the adjoint of creation; kills the vacuum and
    /// satisfies `a⁻(h) g^⊗n = n ⟨h, g⟩ g^⊗(n−1)`.
    pub fn a_minus(&self, h: &SingleParticle, v: &FockVector) -> Result<FockVector, FockError> {
        let mut out = FockVector::zero(v.kdim, v.m, v.n_max);
        for n in 1..=v.n_max {
            for (mset, &c) in v.level(n) {
                let mut prev = None;
                for (pos, &i) in mset.iter().enumerate() {
                    if prev == Some(i) {
                        continue;
                    }
                    prev = Some(i);
                    let hv = h.data[i as usize];
                    if hv == 0.0 {
                        continue;
                    }
                    let mut ms = mset.clone();
                    ms.remove(pos);
                    out.add_entry(
                        n - 1,
                        ms,
                        n as f64 * hv * self.sp_weight(i as usize) * c,
                    );
                }
            }
        }
        Ok(out)
    }

    /// Column `col` of the selected Jacobi-matrix part as `(row, value)`.
    fn jcol(&self, part: JacobiPart, col: usize) -> Vec<(usize, f64)> {
        let mat = match part {
            JacobiPart::Plus => &self.jmat.plus,
            JacobiPart::Zero => &self.jmat.zero,
            JacobiPart::Minus => &self.jmat.minus,
            JacobiPart::Full => &self.jmat.full,
        };
        let lo = col.saturating_sub(1);
        let hi = (col + 2).min(self.kdim);
        (lo..hi).filter(|&r| mat[(r, col)] != 0.0).map(|r| (r, mat[(r, col)])).collect()
    }

    /// Differential second quantization of `Jpart ⊗ M_φ` applied to `v`.
    pub fn d_gamma(
        &self,
        part: JacobiPart,
        phi: &TestFunction,
        v: &FockVector,
    ) -> Result<FockVector, FockError> {
        let m = v.m;
        let mut out = FockVector::zero(v.kdim, v.m, v.n_max);
        for n in 1..=v.n_max {
            for (mset, &c) in v.level(n) {
                let mut prev = None;
                for (pos, &j) in mset.iter().enumerate() {
                    if prev == Some(j) {
                        continue;
                    }
                    prev = Some(j);
                    let (lj, xj) = ((j as usize) / m, (j as usize) % m);
                    let fphi = phi.value(xj);
                    if fphi == 0.0 {
                        continue;
                    }
                    if matches!(part, JacobiPart::Plus | JacobiPart::Full)
                        && lj + 1 == self.kdim
                        && !self.edge_is_zero
                    {
                        return Err(FockError::EllOverflow(self.kdim));
                    }
                    for (li, coef) in self.jcol(part, lj) {
                        let i = (li * m + xj) as u16;
                        let mut ms = mset.clone();
                        ms.remove(pos);
                        let ins = ms.partition_point(|&q| q < i);
                        ms.insert(ins, i);
                        let cnt = ms.iter().filter(|&&q| q == i).count();
                        out.add_entry(n, ms, cnt as f64 * coef * fphi * c);
                    }
                }
            }
        }
        Ok(out)
    }

    fn e0_phi(&self, phi: &TestFunction) -> SingleParticle {
        SingleParticle::basis_tensor(self.kdim, 0, phi)
    }

    /// `A⁺(φ) = a⁺(e₀⊗φ) + dΓ(J⁺⊗M_φ)`.
    pub fn a_plus_field(&self, phi: &TestFunction, v: &FockVector) -> Result<FockVector, FockError> {
        let mut out = self.a_plus(&self.e0_phi(phi), v)?;
        out.add_assign(&self.d_gamma(JacobiPart::Plus, phi, v)?, 1.0)?;
        Ok(out)
    }

    /// `A⁰(φ) = dΓ(J⁰⊗M_φ)`.
    pub fn a_zero_field(&self, phi: &TestFunction, v: &FockVector) -> Result<FockVector, FockError> {
        self.d_gamma(JacobiPart::Zero, phi, v)
    }

    /// `A⁻(φ) = a⁻(e₀⊗φ) + dΓ(J⁻⊗M_φ)`.
    pub fn a_minus_field(&self, phi: &TestFunction, v: &FockVector) -> Result<FockVector, FockError> {
        let mut out = self.a_minus(&self.e0_phi(phi), v)?;
        out.add_assign(&self.d_gamma(JacobiPart::Minus, phi, v)?, 1.0)?;
        Ok(out)
    }

    /// `A(φ)` as the sum of the three parts.
    pub fn a_field(&self, phi: &TestFunction, v: &FockVector) -> Result<FockVector, FockError> {
        let mut out = self.a_plus_field(phi, v)?;
        out.add_assign(&self.a_zero_field(phi, v)?, 1.0)?;
        out.add_assign(&self.a_minus_field(phi, v)?, 1.0)?;
        Ok(out)
    }

    /// `A(φ)` assembled in one go as `a⁺(e₀⊗φ) + dΓ(J⊗M_φ) + a⁻(e₀⊗φ)`;
    /// must agree exactly with [`Self::a_field`].
    pub fn a_field_direct(&self, phi: &TestFunction, v: &FockVector) -> Result<FockVector, FockError> {
        let h = self.e0_phi(phi);
        let mut out = self.a_plus(&h, v)?;
        out.add_assign(&self.d_gamma(JacobiPart::Full, phi, v)?, 1.0)?;
        out.add_assign(&self.a_minus(&h, v)?, 1.0)?;
        Ok(out)
    }

    /// Product-vector formulas for the field parts on `(ξ⊗ψ)^⊗n`,
    /// independent of the second-quantization assembly.
    pub fn field_part_on_product(
        &self,
        part: JacobiPart,
        phi: &TestFunction,
        xi: &[f64],
        psi: &TestFunction,
        n: usize,
        n_max: usize,
    ) -> Result<FockVector, FockError> {
        assert!(part != JacobiPart::Full);
        let sp = SingleParticle::tensor(xi, self.kdim, psi);
        let base = FockVector::product_power(&sp, n, n_max);
        let base_lower = if n >= 1 {
            FockVector::product_power(&sp, n - 1, n_max)
        } else {
            FockVector::zero(self.kdim, psi.grid().len(), n_max)
        };
        let phipsi = phi.pointwise_product(psi).expect("same grid");
        let jxi = |p: JacobiPart| -> Vec<f64> {
            let mat = match p {
                JacobiPart::Plus => &self.jmat.plus,
                JacobiPart::Zero => &self.jmat.zero,
                JacobiPart::Minus => &self.jmat.minus,
                JacobiPart::Full => &self.jmat.full,
            };
            (0..self.kdim)
                .map(|r| (0..xi.len().min(self.kdim)).map(|c| mat[(r, c)] * xi[c]).sum())
                .collect()
        };
        match part {
            JacobiPart::Plus => {
                let mut out = self.a_plus(&self.e0_phi(phi), &base)?;
                if n >= 1 {
                    let shifted = SingleParticle::tensor(&jxi(JacobiPart::Plus), self.kdim, &phipsi);
                    out.add_assign(&self.a_plus(&shifted, &base_lower)?, n as f64)?;
                }
                Ok(out)
            }
            JacobiPart::Zero => {
                let mut out = FockVector::zero(self.kdim, psi.grid().len(), n_max);
                if n >= 1 {
                    let shifted = SingleParticle::tensor(&jxi(JacobiPart::Zero), self.kdim, &phipsi);
                    out.add_assign(&self.a_plus(&shifted, &base_lower)?, n as f64)?;
                }
                Ok(out)
            }
            JacobiPart::Minus => {
                let mut out = FockVector::zero(self.kdim, psi.grid().len(), n_max);
                if n >= 1 {
                    let pairing = xi.first().copied().unwrap_or(0.0) * phi.inner(psi).expect("same grid");
                    out.add_assign(&base_lower, n as f64 * pairing)?;
                    let shifted = SingleParticle::tensor(&jxi(JacobiPart::Minus), self.kdim, &phipsi);
                    out.add_assign(&self.a_plus(&shifted, &base_lower)?, n as f64)?;
                }
                Ok(out)
            }
            JacobiPart::Full => unreachable!(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::{Atom, LevyModel};
    use crate::orthopoly::stieltjes;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn two_point_coeffs() -> JacobiCoeffs {
        let m = LevyModel::from_nu_tilde(&[Atom { s: 1.0, w: 0.5 }, Atom { s: -1.0, w: 0.5 }])
            .unwrap();
        stieltjes(&m, 2).unwrap()
    }

    fn setup(m: usize, kdim: usize) -> (StdOps, SpaceGrid) {
        let grid = SpaceGrid::new((0..m).map(|i| 0.5 + 0.5 * i as f64).collect()).unwrap();
        let ops = StdOps::new(grid.clone(), &two_point_coeffs(), kdim).unwrap();
        (ops, grid)
    }

    fn rand_sp(ops: &StdOps, m: usize, rng: &mut impl Rng) -> SingleParticle {
        let mut sp = SingleParticle::zeros(ops.kdim, m);
        for v in &mut sp.data {
            *v = rng.gen_range(-1.0..1.0);
        }
        sp
    }

    fn rand_vec(ops: &StdOps, m: usize, n_max: usize, top: usize, rng: &mut impl Rng) -> FockVector {
        let mut v = FockVector::zero(ops.kdim, m, n_max);
        for n in 0..=top {
            // random coefficients over random multisets
            for _ in 0..(3 * (n + 1)) {
                let mut ms: Multiset =
                    (0..n).map(|_| rng.gen_range(0..(ops.kdim * m) as u16)).collect();
                ms.sort_unstable();
                v.add_entry(n, ms, rng.gen_range(-1.0..1.0));
            }
        }
        v
    }

    #[test]
    fn normative_identity() {
        let (ops, grid) = setup(2, 3);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..10 {
            let h = rand_sp(&ops, 2, &mut rng);
            let g = rand_sp(&ops, 2, &mut rng);
            let hg = ops.sp_inner(&h, &g);
            for n in 0..=4usize {
                let hp = FockVector::product_power(&h, n, 4);
                let gp = FockVector::product_power(&g, n, 4);
                assert_relative_eq!(
                    ops.inner(&hp, &gp).unwrap(),
                    factorial(n) * hg.powi(n as i32),
                    max_relative = 1e-10,
                    epsilon = 1e-12
                );
            }
        }
        let _ = grid;
    }

    #[test]
    fn a_plus_examples() {
        let (ops, grid) = setup(2, 3);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let h = rand_sp(&ops, 2, &mut rng);
        let vac = FockVector::vacuum(3, 2, 3);
        let up = ops.a_plus(&h, &vac).unwrap();
        assert_eq!(up, FockVector::from_single(&h, 3));
        let nrm = ops.inner(&up, &up).unwrap();
        assert_relative_eq!(nrm, ops.sp_inner(&h, &h), max_relative = 1e-12);
        // ⟨a⁺(h)h, a⁺(h)h⟩ = 2‖h‖⁴
        let hh = ops.a_plus(&h, &FockVector::from_single(&h, 3)).unwrap();
        let h2 = ops.sp_inner(&h, &h);
        assert_relative_eq!(ops.inner(&hh, &hh).unwrap(), 2.0 * h2 * h2, max_relative = 1e-10);
        let _ = grid;
    }

    #[test]
    fn a_minus_product_rule_and_vacuum() {
        let (ops, _) = setup(2, 3);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let h = rand_sp(&ops, 2, &mut rng);
        let g = rand_sp(&ops, 2, &mut rng);
        assert_eq!(ops.a_minus(&h, &FockVector::vacuum(3, 2, 3)).unwrap().max_abs(), 0.0);
        let g2 = FockVector::product_power(&g, 2, 3);
        let down = ops.a_minus(&h, &g2).unwrap();
        let mut expect = FockVector::product_power(&g, 1, 3);
        let mut zero = FockVector::zero(3, 2, 3);
        zero.add_assign(&expect, 2.0 * ops.sp_inner(&h, &g)).unwrap();
        expect = zero;
        let mut diff = down;
        diff.add_assign(&expect, -1.0).unwrap();
        assert!(ops.norm(&diff).unwrap() < 1e-12);
    }

    #[test]
    fn a_minus_is_adjoint_of_a_plus() {
        let (ops, _) = setup(2, 3);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..10 {
            let h = rand_sp(&ops, 2, &mut rng);
            let u = rand_vec(&ops, 2, 4, 3, &mut rng);
            let v = rand_vec(&ops, 2, 4, 4, &mut rng);
            let lhs = ops.inner(&ops.a_plus(&h, &u).unwrap(), &v).unwrap();
            let rhs = ops.inner(&u, &ops.a_minus(&h, &v).unwrap()).unwrap();
            assert_relative_eq!(lhs, rhs, max_relative = 1e-12, epsilon = 1e-12);
        }
    }

    #[test]
    fn d_gamma_identity_is_number_operator() {
        // with a ≡ 1 on the diagonal and φ ≡ 1, dΓ(J⁰⊗M_φ) counts particles
        let coeffs = JacobiCoeffs::new(vec![1.0; 4], vec![0.5; 3], false);
        let grid = SpaceGrid::new(vec![1.0, 1.0]).unwrap();
        let ops = StdOps::new(grid.clone(), &coeffs, 4).unwrap();
        let one = TestFunction::new(grid, vec![1.0, 1.0]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let v = rand_vec(&ops, 2, 3, 3, &mut rng);
        let nv = ops.d_gamma(JacobiPart::Zero, &one, &v).unwrap();
        for n in 0..=3 {
            for (mset, &c) in nv.level(n) {
                assert_relative_eq!(c, n as f64 * v.level(n)[mset], max_relative = 1e-12);
            }
        }
        assert_eq!(
            ops.d_gamma(JacobiPart::Zero, &one, &FockVector::vacuum(4, 2, 2)).unwrap().max_abs(),
            0.0
        );
    }

    #[test]
    fn d_gamma_product_rule() {
        // dΓ(T)g^⊗3 = 3 (Tg) ⊗̂ g^⊗2, two independent code paths
        let coeffs = JacobiCoeffs::new(vec![0.3, -0.2, 0.9, 0.0], vec![1.1, 0.7, 0.4], false);
        let grid = SpaceGrid::new(vec![0.8, 1.4]).unwrap();
        let ops = StdOps::new(grid.clone(), &coeffs, 4).unwrap();
        let phi = TestFunction::new(grid.clone(), vec![0.6, -1.2]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let mut g = rand_sp(&ops, 2, &mut rng);
        // keep the top ℓ₂ slot empty so the raising part stays in range
        for x in 0..2 {
            g.data[3 * 2 + x] = 0.0;
        }
        let g3 = FockVector::product_power(&g, 3, 4);
        let lhs = ops.d_gamma(JacobiPart::Full, &phi, &g3).unwrap();
        // slot-free path: apply the single-particle operator to g directly
        let mut tg = SingleParticle::zeros(4, 2);
        for l in 0..4usize {
            for x in 0..2usize {
                let mut acc = 0.0;
                for lp in 0..4usize {
                    acc += ops.jmat.full[(l, lp)] * g.data[lp * 2 + x];
                }
                tg.data[l * 2 + x] = acc * phi.value(x);
            }
        }
        let rhs = ops.a_plus(&tg, &FockVector::product_power(&g, 2, 4)).unwrap();
        let mut diff = lhs;
        diff.add_assign(&rhs, -3.0).unwrap();
        assert!(ops.norm(&diff).unwrap() < 1e-12, "norm {}", ops.norm(&diff).unwrap());
    }

    #[test]
    fn field_vacuum_actions() {
        let (ops, grid) = setup(2, 3);
        let phi = TestFunction::new(grid.clone(), vec![1.0, -0.5]).unwrap();
        let vac = FockVector::vacuum(3, 2, 3);
        assert_eq!(ops.a_minus_field(&phi, &vac).unwrap().max_abs(), 0.0);
        assert_eq!(ops.a_zero_field(&phi, &vac).unwrap().max_abs(), 0.0);
        let a = ops.a_field(&phi, &vac).unwrap();
        assert_eq!(a, FockVector::from_single(&ops.e0_phi(&phi), 3));
        // ⟨Ω, A(φ)²Ω⟩ = ‖φ‖²
        assert_relative_eq!(ops.inner(&a, &a).unwrap(), phi.norm_sq(), max_relative = 1e-12);
    }

    #[test]
    fn a_field_two_paths_agree() {
        let (ops, grid) = setup(2, 4);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..10 {
            let phi = TestFunction::new(
                grid.clone(),
                (0..2).map(|_| rng.gen_range(-1.0..1.0)).collect(),
            )
            .unwrap();
            let v = rand_vec(&ops, 2, 4, 3, &mut rng);
            let a = ops.a_field(&phi, &v).unwrap();
            let b = ops.a_field_direct(&phi, &v).unwrap();
            let mut diff = a;
            diff.add_assign(&b, -1.0).unwrap();
            // the two assemblies differ only in summation order
            assert!(diff.max_abs() < 1e-14, "diff {}", diff.max_abs());
        }
    }

    #[test]
    fn canonical_fourth_moment() {
        // two-point measure, one-point grid, φ = 1: ⟨Ω, A(1)⁴Ω⟩ = 4
        let grid = SpaceGrid::new(vec![1.0]).unwrap();
        let ops = StdOps::new(grid.clone(), &two_point_coeffs(), 3).unwrap();
        let one = TestFunction::new(grid, vec![1.0]).unwrap();
        let vac = FockVector::vacuum(3, 1, 2);
        let a1 = ops.a_field(&one, &vac).unwrap();
        let a2 = ops.a_field(&one, &a1).unwrap();
        assert_relative_eq!(ops.inner(&a2, &a2).unwrap(), 4.0, max_relative = 1e-12);
    }

    #[test]
    fn product_formulas_match_assembly() {
        let (ops, grid) = setup(2, 5);
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..10 {
            let phi = TestFunction::new(
                grid.clone(),
                (0..2).map(|_| rng.gen_range(-1.0..1.0)).collect(),
            )
            .unwrap();
            let psi = TestFunction::new(
                grid.clone(),
                (0..2).map(|_| rng.gen_range(-1.0..1.0)).collect(),
            )
            .unwrap();
            let xi: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect();
            for n in 0..=3usize {
                let sp = SingleParticle::tensor(&xi, ops.kdim, &psi);
                let base = FockVector::product_power(&sp, n, 5);
                for part in [JacobiPart::Plus, JacobiPart::Zero, JacobiPart::Minus] {
                    let via_dgamma = match part {
                        JacobiPart::Plus => ops.a_plus_field(&phi, &base).unwrap(),
                        JacobiPart::Zero => ops.a_zero_field(&phi, &base).unwrap(),
                        JacobiPart::Minus => ops.a_minus_field(&phi, &base).unwrap(),
                        JacobiPart::Full => unreachable!(),
                    };
                    let via_product = ops
                        .field_part_on_product(part, &phi, &xi, &psi, n, 5)
                        .unwrap();
                    let mut diff = via_dgamma;
                    diff.add_assign(&via_product, -1.0).unwrap();
                    assert!(
                        ops.norm(&diff).unwrap() <= 1e-12 * (1.0 + ops.norm(&base).unwrap()),
                        "part {part:?}, n = {n}"
                    );
                }
            }
        }
    }

    #[test]
    fn commutativity_of_field_operators() {
        let (ops, grid) = setup(2, 5);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..5 {
            let phi = TestFunction::new(
                grid.clone(),
                (0..2).map(|_| rng.gen_range(-1.0..1.0)).collect(),
            )
            .unwrap();
            let psi = TestFunction::new(
                grid.clone(),
                (0..2).map(|_| rng.gen_range(-1.0..1.0)).collect(),
            )
            .unwrap();
            // keep level and ℓ₂ budgets clear of the truncation
            let mut v = FockVector::zero(5, 2, 5);
            for n in 0..=3usize {
                for _ in 0..4 {
                    let mut ms: Multiset =
                        (0..n).map(|_| rng.gen_range(0..(3 * 2) as u16)).collect();
                    ms.sort_unstable();
                    v.add_entry(n, ms, rng.gen_range(-1.0..1.0));
                }
            }
            let pq = ops.a_field(&phi, &ops.a_field(&psi, &v).unwrap()).unwrap();
            let qp = ops.a_field(&psi, &ops.a_field(&phi, &v).unwrap()).unwrap();
            let mut diff = pq;
            diff.add_assign(&qp, -1.0).unwrap();
            let nv = ops.norm(&v).unwrap();
            assert!(ops.norm(&diff).unwrap() <= 1e-10 * nv.max(1.0));
        }
    }

    #[test]
    fn ell_overflow_detected() {
        let m = LevyModel::from_nu_tilde(&[
            Atom { s: 1.0, w: 0.25 },
            Atom { s: 2.0, w: 0.25 },
            Atom { s: -1.0, w: 0.5 },
        ])
        .unwrap();
        let coeffs = stieltjes(&m, 3).unwrap();
        let grid = SpaceGrid::new(vec![1.0]).unwrap();
        let ops = StdOps::new(grid.clone(), &coeffs, 2).unwrap();
        let one = TestFunction::new(grid, vec![1.0]).unwrap();
        let mut v = FockVector::zero(2, 1, 3);
        // occupy the top ℓ₂ index; raising it must be rejected
        v.add_entry(1, vec![1], 1.0);
        assert!(matches!(
            ops.d_gamma(JacobiPart::Plus, &one, &v),
            Err(FockError::EllOverflow(2))
        ));
    }
}
