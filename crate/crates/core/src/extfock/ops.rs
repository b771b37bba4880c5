//! The Jacobi field in the extended Fock space: the weight `K_α`, the
//! level inner products, and the creation / neutral / annihilation parts.
//!
//! Annihilation and the neutral part follow the coordinate formulas of the
//! chaos decomposition directly. Creation on general coordinate families is
//! the adjoint of annihilation under the weighted inner product, written out
//! coordinate-wise; on vectors coming from genuine symmetric tensors it must
//! (and does, testably) coincide with the symmetric-tensor-product path.

use crate::grid::{SpaceGrid, TestFunction};
use crate::measure::csum;
use crate::orthopoly::JacobiCoeffs;

use super::comp::{compositions_of, Composition};
use super::tensor::{tuples, BlockTensor, SymTensor};
use super::{ExtError, ExtVector, LevelMap};

/// Multiplicative perturbation knobs for the negative controls in the
/// verification harness. All ones in normal operation.
#[derive(Debug, Clone, Copy)]
pub struct Tweaks {
    /// Scales every `K_α` in the inner product.
    pub k_scale: f64,
    /// Scales the neutral-part output.
    pub j0_scale: f64,
    /// Scales the diagonal-shift term of annihilation (and, through
    /// adjointness, of creation).
    pub jminus_scale: f64,
}

impl Default for Tweaks {
    fn default() -> Self {
        Tweaks { k_scale: 1.0, j0_scale: 1.0, jminus_scale: 1.0 }
    }
}

/// Operator context: grid, Jacobi coefficients, truncation-independent.
pub struct ExtOps<'a> {
    pub grid: &'a SpaceGrid,
    pub coeffs: &'a JacobiCoeffs,
    pub tweaks: Tweaks,
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

impl<'a> ExtOps<'a> {
    pub fn new(grid: &'a SpaceGrid, coeffs: &'a JacobiCoeffs) -> Self {
        ExtOps { grid, coeffs, tweaks: Tweaks::default() }
    }

    pub fn with_tweaks(grid: &'a SpaceGrid, coeffs: &'a JacobiCoeffs, tweaks: Tweaks) -> Self {
        ExtOps { grid, coeffs, tweaks }
    }

    /// The diagonal-pattern weight
    /// `K_α = n(α)!/(α₁!α₂!⋯) · Π_{k≥2} ((b₁⋯b_{k−1})/k!)^{2α_k}`.
    pub fn k_alpha(&self, comp: &Composition) -> Result<f64, ExtError> {
        let mut k = factorial(comp.weight());
        for (i, &a) in comp.entries().iter().enumerate() {
            k /= factorial(a);
            let mult = i + 1;
            if mult >= 2 && a > 0 {
                let mut prod_b = 1.0;
                for j in 1..mult {
                    prod_b *= self.coeffs.b(j)?;
                }
                k *= (prod_b / factorial(mult)).powi(2 * a as i32);
            }
        }
        Ok(k * self.tweaks.k_scale)
    }

    fn sigma_weight(&self, t: &[usize]) -> f64 {
        t.iter().map(|&i| self.grid.weight(i)).product()
    }

    /// Level-`n` inner product `Σ_α K_α ⟨f_α, g_α⟩_{σ^⊗|α|}`.
    pub fn inner_level(&self, f: &LevelMap, g: &LevelMap) -> Result<f64, ExtError> {
        let mut total = 0.0;
        for (comp, tf) in f {
            let Some(tg) = g.get(comp) else { continue };
            let k = self.k_alpha(comp)?;
            if k == 0.0 {
                continue;
            }
            let s = csum(
                tuples(tf.m(), comp.size())
                    .map(|t| tf.get(&t) * tg.get(&t) * self.sigma_weight(&t)),
            );
            total += k * s;
        }
        Ok(total)
    }

    /// Full inner product with the `n!` level weights.
    pub fn inner(&self, f: &ExtVector, g: &ExtVector) -> Result<f64, ExtError> {
        if f.m() != g.m() {
            return Err(ExtError::ShapeMismatch);
        }
        let mut total = 0.0;
        for n in 0..=f.n_max().min(g.n_max()) {
            total += factorial(n) * self.inner_level(f.level(n), g.level(n))?;
        }
        Ok(total)
    }

    pub fn norm(&self, f: &ExtVector) -> Result<f64, ExtError> {
        Ok(self.inner(f, f)?.max(0.0).sqrt())
    }

    /// Neutral part: per coordinate,
    /// `Σ_k α_k a_{k−1} S_α(ξ(x_{α₁+⋯+α_k}) f_α)`.
    pub fn j0_apply(&self, xi: &TestFunction, v: &ExtVector) -> Result<ExtVector, ExtError> {
        let mut out = ExtVector::zero(v.m(), v.n_max());
        for n in 1..=v.n_max() {
            for (alpha, tensor) in v.level(n) {
                for k in 1..=alpha.max_index() {
                    let ak = alpha.entry(k);
                    if ak == 0 {
                        continue;
                    }
                    let a_coef = self.coeffs.a(k - 1)?;
                    if a_coef == 0.0 {
                        continue;
                    }
                    let p = alpha.block_end(k) - 1;
                    let mut term = tensor.clone();
                    for t in tuples(term.m(), alpha.size()) {
                        term.set(&t, term.get(&t) * xi.value(t[p]));
                    }
                    let coef = ak as f64 * a_coef * self.tweaks.j0_scale;
                    out.add_coord(term.symmetrize(), coef)?;
                }
            }
        }
        Ok(out)
    }

    /// Annihilation: maps level `n` to level `n−1`. The first term contracts
    /// one simple variable against `ξ dσ`; the second shifts one block from
    /// multiplicity `k−1` to `k`, weighted by `b_{k−1}²`. Coordinates outside
    /// the truncation read as zero.
    pub fn jminus_apply(&self, xi: &TestFunction, v: &ExtVector) -> Result<ExtVector, ExtError> {
        let mut out = ExtVector::zero(v.m(), v.n_max());
        let m = v.m();
        for n in 1..=v.n_max() {
            if v.level(n).is_empty() {
                continue;
            }
            for alpha in compositions_of(n - 1) {
                // term 1: contract the new simple variable of α + 1₁
                let beta = alpha.up(1);
                if let Some(t_in) = v.get(n, &beta) {
                    let mut contracted = BlockTensor::zeros(m, alpha.clone());
                    for t in tuples(m, alpha.size()) {
                        let mut full = Vec::with_capacity(t.len() + 1);
                        full.push(0);
                        full.extend_from_slice(&t);
                        let s = csum((0..m).map(|x| {
                            full[0] = x;
                            xi.value(x) * self.grid.weight(x) * t_in.get(&full)
                        }));
                        contracted.set(&t, s);
                    }
                    out.add_coord(contracted.symmetrize(), n as f64)?;
                }
                // term 2: block promotion k−1 → k
                for k in 2..=alpha.max_index() + 1 {
                    let a_km1 = alpha.entry(k - 1);
                    if a_km1 == 0 {
                        continue;
                    }
                    let b = self.coeffs.b(k - 1)?;
                    if b == 0.0 {
                        continue;
                    }
                    let beta = alpha.down(k - 1).expect("entry checked").up(k);
                    let Some(t_in) = v.get(n, &beta) else { continue };
                    // the demoted variable: last slot of the output's
                    // (k−1)-block section, first slot of the input's k-block
                    // section under the shared variable layout
                    let p = alpha.block_end(k - 1) - 1;
                    let mut term = BlockTensor::zeros(m, alpha.clone());
                    for t in tuples(m, alpha.size()) {
                        term.set(&t, xi.value(t[p]) * t_in.get(&t));
                    }
                    let coef = (n as f64 / k as f64)
                        * a_km1 as f64
                        * b
                        * b
                        * self.tweaks.jminus_scale;
                    out.add_coord(term.symmetrize(), coef)?;
                }
            }
        }
        Ok(out)
    }

    /// Creation on coordinate families: the adjoint of [`Self::jminus_apply`]
    /// under [`Self::inner`]. Each annihilation term transposes into a
    /// coordinate-raising term with the inverse `K`-ratio; coordinates of
    /// zero `K`-weight stay zero.
    pub fn jplus_apply(&self, phi: &TestFunction, v: &ExtVector) -> Result<ExtVector, ExtError> {
        if !v.level(v.n_max()).is_empty() {
            return Err(ExtError::TruncationOverflow(v.n_max()));
        }
        let m = v.m();
        let mut out = ExtVector::zero(m, v.n_max());
        for lvl in 0..v.n_max() {
            for (mu, f) in v.level(lvl) {
                let k_mu = self.k_alpha(mu)?;
                // transpose of the contraction term: prepend a simple variable
                let gamma = mu.up(1);
                let k_gamma = self.k_alpha(&gamma)?;
                if k_gamma != 0.0 {
                    let mut raised = BlockTensor::zeros(m, gamma.clone());
                    for t in tuples(m, gamma.size()) {
                        raised.set(&t, phi.value(t[0]) * f.get(&t[1..]));
                    }
                    out.add_coord(raised.symmetrize(), k_mu / k_gamma)?;
                }
                // transpose of the block-promotion term
                for k in 2..=mu.max_index() + 1 {
                    let mu_km1 = mu.entry(k - 1);
                    if mu_km1 == 0 {
                        continue;
                    }
                    let b = self.coeffs.b(k - 1)?;
                    if b == 0.0 {
                        continue;
                    }
                    let gamma = mu.down(k - 1).expect("entry checked").up(k);
                    let k_gamma = self.k_alpha(&gamma)?;
                    if k_gamma == 0.0 {
                        continue;
                    }
                    // the promoted variable: first slot of the raised
                    // composition's k-block section
                    let p = mu.block_end(k - 1) - 1;
                    let mut term = BlockTensor::zeros(m, gamma.clone());
                    for t in tuples(m, gamma.size()) {
                        term.set(&t, phi.value(t[p]) * f.get(&t));
                    }
                    let coef = k_mu * mu_km1 as f64 * b * b * self.tweaks.jminus_scale
                        / (k as f64 * k_gamma);
                    out.add_coord(term.symmetrize(), coef)?;
                }
            }
        }
        Ok(out)
    }

    /// Creation on a genuine symmetric tensor: `φ ⊗̂ f` followed by all
    /// diagonal restrictions. Independent of the adjoint path.
    pub fn jplus_apply_monomial(
        &self,
        phi: &TestFunction,
        f: &SymTensor,
    ) -> Result<LevelMap, ExtError> {
        let extended = f.sym_extend(phi);
        let mut out = LevelMap::new();
        for comp in compositions_of(extended.order()) {
            out.insert(comp.clone(), super::tensor::d_alpha(&extended, &comp));
        }
        Ok(out)
    }

    /// The full field operator `J(φ) = J⁺(φ) + J⁰(φ) + J⁻(φ)`.
    pub fn jfield_apply(&self, phi: &TestFunction, v: &ExtVector) -> Result<ExtVector, ExtError> {
        let mut out = self.jplus_apply(phi, v)?;
        out.add_assign(&self.j0_apply(phi, v)?, 1.0)?;
        out.add_assign(&self.jminus_apply(phi, v)?, 1.0)?;
        Ok(out)
    }
}
