//! Jacobi recurrence coefficients of `ν̃`, the truncated tridiagonal matrix
//! with its raising/neutral/lowering split, and Gauss quadrature as the
//! finite realization of the spectral transform of the Jacobi matrix.

use nalgebra::DMatrix;
use thiserror::Error;

use crate::measure::{csum, LevyModel};

#[derive(Debug, Error)]
pub enum OrthoError {
    #[error("b_{level}^2 = {value} lost positivity (support exhausted or ill-conditioned input)")]
    LostPositivity { level: usize, value: f64 },
    #[error("coefficient a_{0} not available at truncation order {1}")]
    MissingA(usize, usize),
    #[error("coefficient b_{0} not available at truncation order {1}")]
    MissingB(usize, usize),
    #[error("eigen-decomposition failed")]
    EigenFailure,
}

/// Three-term recurrence coefficients of the orthonormal polynomials of `ν̃`:
/// `s·pₙ(s) = b_{n+1} p_{n+1}(s) + aₙ pₙ(s) + bₙ p_{n−1}(s)`.
///
/// `a` holds `a₀ … a_{N−1}` and `b` holds `b₁ … b_{N−1}`. For a measure with
/// `P` support points only `P` levels exist; `terminated` marks that case,
/// and coefficients beyond the last level then read as zero.
#[derive(Debug, Clone, PartialEq)]
pub struct JacobiCoeffs {
    a: Vec<f64>,
    b: Vec<f64>,
    terminated: bool,
}

impl JacobiCoeffs {
    pub fn new(a: Vec<f64>, b: Vec<f64>, terminated: bool) -> Self {
        assert!(!a.is_empty(), "need at least a_0");
        assert_eq!(b.len() + 1, a.len(), "b must hold b_1 .. b_{{N-1}}");
        JacobiCoeffs { a, b, terminated }
    }

    /// Truncation order `N` (number of stored diagonal entries).
    pub fn order(&self) -> usize {
        self.a.len()
    }

    /// True when the measure's support was exhausted: the matrix terminates
    /// and out-of-range coefficients are genuinely zero.
    pub fn terminated(&self) -> bool {
        self.terminated
    }

    /// Diagonal coefficient `aₙ`, `n ≥ 0`.
    pub fn a(&self, n: usize) -> Result<f64, OrthoError> {
        match self.a.get(n) {
            Some(&v) => Ok(v),
            None if self.terminated => Ok(0.0),
            None => Err(OrthoError::MissingA(n, self.order())),
        }
    }

    /// Off-diagonal coefficient `bₙ`, `n ≥ 1`; `b₀ = 0` by convention.
    pub fn b(&self, n: usize) -> Result<f64, OrthoError> {
        if n == 0 {
            return Ok(0.0);
        }
        match self.b.get(n - 1) {
            Some(&v) => Ok(v),
            None if self.terminated => Ok(0.0),
            None => Err(OrthoError::MissingB(n, self.order())),
        }
    }

    /// Scale both coefficient families; used by the negative controls in the
    /// verification harness.
    pub fn perturbed(&self, a_scale: f64, b_scale: f64) -> Self {
        JacobiCoeffs {
            a: self.a.iter().map(|x| x * a_scale).collect(),
            b: self.b.iter().map(|x| x * b_scale).collect(),
            terminated: self.terminated,
        }
    }
}

/// Relative tolerance (against `m̃₂`) below which `bₙ²` counts as vanished.
const B_SQUARED_TOL: f64 = 1e-13;

/// Discretized Stieltjes procedure: run the three-term recurrence on the
/// atom set itself, orthonormalizing at each level.
///
/// Requests beyond the support size terminate early with the maximal
/// achievable order and the `terminated` flag set. A vanishing `bₙ²` before
/// the support allows it is reported as an error naming the level.
pub fn stieltjes(model: &LevyModel, n: usize) -> Result<JacobiCoeffs, OrthoError> {
    assert!(n >= 1, "need at least one level");
    let atoms = model.atoms();
    let p = model.support_size();
    let m2 = model.moment(2);

    // orthonormal polynomial values at the atoms
    let mut p_prev = vec![0.0; atoms.len()];
    let mut p_cur = vec![1.0; atoms.len()]; // m̃₀ = 1, so p₀ ≡ 1
    let mut basis: Vec<Vec<f64>> = vec![p_cur.clone()];
    let mut a = Vec::with_capacity(n);
    let mut b = Vec::new();
    let mut b_last = 0.0;
    let mut terminated = false;

    for lvl in 0..n {
        let a_lvl = csum(atoms.iter().zip(&p_cur).map(|(at, &pv)| at.w * at.s * pv * pv));
        a.push(a_lvl);
        if lvl + 1 == n {
            terminated = terminated || p == n;
            break;
        }
        // r = (s - a_lvl) p_lvl - b_lvl p_{lvl-1}
        let mut r: Vec<f64> = atoms
            .iter()
            .enumerate()
            .map(|(j, at)| (at.s - a_lvl) * p_cur[j] - b_last * p_prev[j])
            .collect();
        // two sweeps of reorthogonalization against the stored basis keep
        // the recurrence accurate for clustered node sets
        for _ in 0..2 {
            for q in &basis {
                let c = csum(atoms.iter().zip(q.iter()).zip(&r).map(|((at, &qv), &rv)| {
                    at.w * qv * rv
                }));
                for (rv, &qv) in r.iter_mut().zip(q.iter()) {
                    *rv -= c * qv;
                }
            }
        }
        let b_sq = csum(atoms.iter().zip(&r).map(|(at, &rv)| at.w * rv * rv));
        if b_sq <= B_SQUARED_TOL * m2 {
            if lvl + 1 >= p {
                // support exhausted: maximal order reached
                terminated = true;
                break;
            }
            return Err(OrthoError::LostPositivity { level: lvl + 1, value: b_sq });
        }
        let b_lvl = b_sq.sqrt();
        b.push(b_lvl);
        p_prev = p_cur;
        p_cur = r.iter().map(|&rv| rv / b_lvl).collect();
        basis.push(p_cur.clone());
        b_last = b_lvl;
    }
    Ok(JacobiCoeffs { a, b, terminated })
}

/// Truncated symmetric tridiagonal Jacobi matrix `J` together with its
/// strict-lower (raising), diagonal, and strict-upper (lowering) parts.
#[derive(Debug, Clone)]
pub struct TridiagonalOperator {
    pub full: DMatrix<f64>,
    pub plus: DMatrix<f64>,
    pub zero: DMatrix<f64>,
    pub minus: DMatrix<f64>,
}

/// Assemble the truncated Jacobi matrix of size `dim` (zero-padded past the
/// stored coefficients when the measure terminates).
pub fn truncated_matrix_dim(coeffs: &JacobiCoeffs, dim: usize) -> Result<TridiagonalOperator, OrthoError> {
    let mut full = DMatrix::zeros(dim, dim);
    let mut plus = DMatrix::zeros(dim, dim);
    let mut zero = DMatrix::zeros(dim, dim);
    let mut minus = DMatrix::zeros(dim, dim);
    for i in 0..dim {
        let ai = coeffs.a(i)?;
        full[(i, i)] = ai;
        zero[(i, i)] = ai;
        if i + 1 < dim {
            let bi = coeffs.b(i + 1)?;
            full[(i + 1, i)] = bi;
            full[(i, i + 1)] = bi;
            plus[(i + 1, i)] = bi;
            minus[(i, i + 1)] = bi;
        }
    }
    Ok(TridiagonalOperator { full, plus, zero, minus })
}

/// Assemble the matrix at the natural order `N` of the coefficient set.
pub fn truncated_matrix(coeffs: &JacobiCoeffs) -> TridiagonalOperator {
    truncated_matrix_dim(coeffs, coeffs.order()).expect("within stored order")
}

/// One Gauss node/weight pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadPoint {
    pub node: f64,
    pub weight: f64,
}

/// Golub–Welsch: eigenvalues of the truncated Jacobi matrix are the Gauss
/// nodes, squared first eigenvector components the weights. Nodes ascending.
pub fn golub_welsch(coeffs: &JacobiCoeffs) -> Result<Vec<QuadPoint>, OrthoError> {
    let op = truncated_matrix(coeffs);
    let eig = op.full.clone().symmetric_eigen();
    let mut pts: Vec<QuadPoint> = (0..coeffs.order())
        .map(|i| {
            let v0 = eig.eigenvectors[(0, i)];
            QuadPoint { node: eig.eigenvalues[i], weight: v0 * v0 }
        })
        .collect();
    if pts.iter().any(|p| !p.node.is_finite() || !p.weight.is_finite()) {
        return Err(OrthoError::EigenFailure);
    }
    pts.sort_by(|x, y| x.node.partial_cmp(&y.node).unwrap());
    Ok(pts)
}

/// Witness of the spectral characterization of the single-particle
/// transform: Gauss exactness defect up to degree `2N−1` plus the
/// diagonalization residual `‖Vᵀ J V − diag(sᵢ)‖_max`.
pub fn single_particle_intertwining_residual(
    model: &LevyModel,
    coeffs: &JacobiCoeffs,
) -> Result<f64, OrthoError> {
    let n = coeffs.order();
    let quad = golub_welsch(coeffs)?;
    let mut res: f64 = 0.0;
    for k in 0..2 * n {
        let q = csum(quad.iter().map(|p| p.weight * p.node.powi(k as i32)));
        let m = model.moment(k);
        res = res.max((q - m).abs() / m.abs().max(1.0));
    }
    let op = truncated_matrix(coeffs);
    let scale = op.full.amax().max(1.0);
    let eig = op.full.clone().symmetric_eigen();
    let v = &eig.eigenvectors;
    let d = v.transpose() * &op.full * v;
    for i in 0..n {
        for j in 0..n {
            let expect = if i == j { eig.eigenvalues[i] } else { 0.0 };
            res = res.max((d[(i, j)] - expect).abs() / scale);
        }
    }
    Ok(res)
}

/// Analytic generalized-Laguerre (α = 1) recurrence coefficients, i.e. the
/// Jacobi coefficients of the weight `s·e^{−s}` on `(0, ∞)`.
pub fn laguerre1_coeffs(n: usize) -> JacobiCoeffs {
    let a = (0..n).map(|k| 2.0 * k as f64 + 2.0).collect();
    let b = (1..n).map(|k| (k as f64 * (k as f64 + 1.0)).sqrt()).collect();
    JacobiCoeffs::new(a, b, false)
}

/// Gauss weight at `x` as the reciprocal Christoffel sum `1/Σ pₖ(x)²` of the
/// orthonormal polynomials; keeps relative accuracy for tiny tail weights
/// where squared eigenvector components lose it.
fn christoffel_weight(coeffs: &JacobiCoeffs, x: f64) -> f64 {
    let n = coeffs.order();
    let mut p_prev = 0.0;
    let mut p_cur = 1.0;
    let mut sum = p_cur * p_cur;
    for k in 0..n - 1 {
        let a = coeffs.a(k).expect("within order");
        let b_next = coeffs.b(k + 1).expect("within order");
        let b = coeffs.b(k).expect("within order");
        let p_next = ((x - a) * p_cur - b * p_prev) / b_next;
        p_prev = p_cur;
        p_cur = p_next;
        sum += p_cur * p_cur;
    }
    1.0 / sum
}

/// Reference-quadrature discretization of the jump measure `s·e^{−s} ds`
/// (the Gamma-process case) with the given node count.
pub fn gamma_reference(nodes: usize) -> LevyModel {
    use crate::measure::Atom;
    let coeffs = laguerre1_coeffs(nodes);
    let quad = golub_welsch(&coeffs).expect("analytic coefficients are well conditioned");
    LevyModel::from_nu_tilde(
        &quad
            .iter()
            .map(|p| Atom { s: p.node, w: christoffel_weight(&coeffs, p.node) })
            .collect::<Vec<_>>(),
    )
    .expect("positive weights, nonzero nodes")
}
