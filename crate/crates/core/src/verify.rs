//! Independent oracles (cumulant/moment recursion, Hankel determinants) and
//! the harness that witnesses the unitary equivalence of the two field
//! representations through vacuum and mixed moments.

use nalgebra::DMatrix;
use serde::Serialize;
use thiserror::Error;

use crate::extfock::{compositions_of, ExtError, ExtOps, ExtVector, Tweaks};
use crate::grid::TestFunction;
use crate::measure::{csum, LevyModel};
use crate::orthopoly::JacobiCoeffs;
use crate::stdfock::{FockError, FockVector, StdOps};

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error("Hankel matrix of order {0} is not positive definite (law has too few support points)")]
    HankelNotPositive(usize),
    #[error(transparent)]
    Ext(#[from] ExtError),
    #[error(transparent)]
    Fock(#[from] FockError),
}

/// Cumulants `κ₁ … κₙ` of `⟨ω, φ⟩`: the log-characteristic functional
/// expands to `κ₁ = 0` (centered) and `κ_m = m̃_{m−2} Σᵢ φᵢᵐ σᵢ` for `m ≥ 2`.
pub fn cumulants(phi: &TestFunction, model: &LevyModel, n: usize) -> Vec<f64> {
    (1..=n)
        .map(|m| {
            if m == 1 {
                0.0
            } else {
                let phi_pow = csum(
                    phi.values()
                        .iter()
                        .zip(phi.grid().weights())
                        .map(|(&v, &w)| v.powi(m as i32) * w),
                );
                model.moment(m - 2) * phi_pow
            }
        })
        .collect()
}

fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc
}

/// Classical moment–cumulant recursion
/// `mₙ = Σ_{j=1}^{n} C(n−1, j−1) κⱼ m_{n−j}`, `m₀ = 1`. Returns `m₁ … mₙ`.
pub fn moments_from_cumulants(kappa: &[f64]) -> Vec<f64> {
    let n = kappa.len();
    let mut m = vec![1.0]; // m₀
    for order in 1..=n {
        let v = (1..=order)
            .map(|j| binomial(order - 1, j - 1) * kappa[j - 1] * m[order - j])
            .sum();
        m.push(v);
    }
    m[1..].to_vec()
}

/// Moment sequence `m₀ … m_order` of the scalar law with cumulants
/// `κ_m = t·m̃_{m−2}` — the law of the field paired with the indicator of a
/// one-point grid of weight `t`.
pub fn scalar_law_moments(model: &LevyModel, t: f64, order: usize) -> Vec<f64> {
    let kappa: Vec<f64> =
        (1..=order).map(|m| if m == 1 { 0.0 } else { t * model.moment(m - 2) }).collect();
    let mut out = vec![1.0];
    out.extend(moments_from_cumulants(&kappa));
    out
}

/// Squared norm of the degree-`n` Wick monomial of a scalar law, through
/// Hankel determinants: `‖:Yⁿ:‖² = Dₙ/D_{n−1}` with `D_k = det(m_{i+j})`.
pub fn wick_norm_oracle(moments: &[f64], n: usize) -> Result<f64, VerifyError> {
    assert!(moments.len() >= 2 * n + 1, "need moments up to order 2n");
    let det = |k: usize| -> f64 {
        DMatrix::from_fn(k + 1, k + 1, |i, j| moments[i + j]).determinant()
    };
    let d_prev = if n == 0 { 1.0 } else { det(n - 1) };
    let d_n = det(n);
    if d_prev <= 0.0 || d_n <= 0.0 {
        return Err(VerifyError::HankelNotPositive(n));
    }
    Ok(d_n / d_prev)
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Relative deviation with an absolute fallback near zero.
pub fn deviation(a: f64, b: f64, abs_floor: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale < abs_floor {
        (a - b).abs()
    } else {
        (a - b).abs() / scale
    }
}

/// Vacuum moments `⟨Ω, J(φ)ᵏΩ⟩` for `k ≤ kmax` in the extended
/// representation, via the split `⟨J^⌊k/2⌋Ω, J^⌈k/2⌉Ω⟩` so only
/// `⌈kmax/2⌉` levels are ever populated.
pub fn vacuum_moments_ext(
    phi: &TestFunction,
    coeffs: &JacobiCoeffs,
    kmax: usize,
    tweaks: Tweaks,
) -> Result<Vec<f64>, VerifyError> {
    let grid = phi.grid();
    let n_max = kmax.div_ceil(2);
    let ops = ExtOps::with_tweaks(grid, coeffs, tweaks);
    let mut powers = vec![ExtVector::vacuum(grid.len(), n_max)];
    for j in 1..=n_max {
        let next = ops.jfield_apply(phi, &powers[j - 1])?;
        powers.push(next);
    }
    (0..=kmax)
        .map(|k| Ok(ops.inner(&powers[k / 2], &powers[k.div_ceil(2)])?))
        .collect()
}

/// Vacuum moments `⟨Ω, A(φ)ᵏΩ⟩` in the standard representation, same split.
pub fn vacuum_moments_std(
    phi: &TestFunction,
    coeffs: &JacobiCoeffs,
    kmax: usize,
) -> Result<Vec<f64>, VerifyError> {
    let grid = phi.grid();
    let n_max = kmax.div_ceil(2);
    let kdim = n_max + 1;
    let ops = StdOps::new(grid.clone(), coeffs, kdim)?;
    let mut powers = vec![FockVector::vacuum(kdim, grid.len(), n_max)];
    for j in 1..=n_max {
        let next = ops.a_field(phi, &powers[j - 1])?;
        powers.push(next);
    }
    (0..=kmax)
        .map(|k| Ok(ops.inner(&powers[k / 2], &powers[k.div_ceil(2)])?))
        .collect()
}

/// Oracle vacuum moments `m₀ … m_kmax` of `⟨ω, φ⟩` from the cumulant
/// expansion of the characteristic functional.
pub fn vacuum_moments_oracle(phi: &TestFunction, model: &LevyModel, kmax: usize) -> Vec<f64> {
    let kappa = cumulants(phi, model, kmax.max(1));
    let mut out = vec![1.0];
    out.extend(moments_from_cumulants(&kappa));
    out.truncate(kmax + 1);
    out
}

/// Ordered mixed vacuum moment `⟨Ω, J(φ₁)⋯J(φ_k)Ω⟩` (extended rep).
pub fn mixed_moment_ext(
    phis: &[TestFunction],
    coeffs: &JacobiCoeffs,
) -> Result<f64, VerifyError> {
    let grid = phis[0].grid();
    let n_max = phis.len();
    let ops = ExtOps::new(grid, coeffs);
    let mut v = ExtVector::vacuum(grid.len(), n_max);
    for phi in phis.iter().rev() {
        v = ops.jfield_apply(phi, &v)?;
    }
    Ok(ops.inner(&ExtVector::vacuum(grid.len(), n_max), &v)?)
}

/// Ordered mixed vacuum moment `⟨Ω, A(φ₁)⋯A(φ_k)Ω⟩` (standard rep).
pub fn mixed_moment_std(
    phis: &[TestFunction],
    coeffs: &JacobiCoeffs,
) -> Result<f64, VerifyError> {
    let grid = phis[0].grid();
    let n_max = phis.len();
    let kdim = n_max + 1;
    let ops = StdOps::new(grid.clone(), coeffs, kdim)?;
    let mut v = FockVector::vacuum(kdim, grid.len(), n_max);
    for phi in phis.iter().rev() {
        v = ops.a_field(phi, &v)?;
    }
    Ok(ops.inner(&FockVector::vacuum(kdim, grid.len(), n_max), &v)?)
}

/// One row of the cross-representation moment table.
#[derive(Debug, Clone, Serialize)]
pub struct MomentReport {
    pub k: usize,
    pub value_ext: f64,
    pub value_std: f64,
    pub value_oracle: f64,
    pub max_deviation: f64,
}

/// Vacuum moments of order `k ≤ kmax` from all three routes, with the
/// maximal pairwise deviation per order.
pub fn moment_table(
    phi: &TestFunction,
    model: &LevyModel,
    coeffs: &JacobiCoeffs,
    kmax: usize,
    abs_floor: f64,
) -> Result<Vec<MomentReport>, VerifyError> {
    let ext = vacuum_moments_ext(phi, coeffs, kmax, Tweaks::default())?;
    let std_ = vacuum_moments_std(phi, coeffs, kmax)?;
    let oracle = vacuum_moments_oracle(phi, model, kmax);
    Ok((0..=kmax)
        .map(|k| {
            let d = deviation(ext[k], std_[k], abs_floor)
                .max(deviation(ext[k], oracle[k], abs_floor))
                .max(deviation(std_[k], oracle[k], abs_floor));
            MomentReport {
                k,
                value_ext: ext[k],
                value_std: std_[k],
                value_oracle: oracle[k],
                max_deviation: d,
            }
        })
        .collect())
}

/// Jump measures for which the scalar law's orthogonal polynomials coincide
/// with its Wick monomials, so the Hankel-determinant oracle computes the
/// extended-Fock monomial norm exactly: Poisson (`ν̃ = δ₁`), a Pascal-type
/// geometric measure, and the gamma case. For general `ν̃` the degree-`n`
/// orthogonal polynomial and the `n`-th chaos component differ for `n ≥ 3`.
pub fn hankel_reference_models() -> Vec<(&'static str, LevyModel)> {
    use crate::measure::Atom;
    let poisson = LevyModel::from_nu_tilde(&[Atom { s: 1.0, w: 1.0 }]).unwrap();
    let q: f64 = 0.3;
    let pascal_atoms: Vec<Atom> =
        (1..=60).map(|k| Atom { s: k as f64, w: k as f64 * q.powi(k) }).collect();
    let pascal = LevyModel::from_nu_tilde(&pascal_atoms).unwrap();
    let gamma = crate::orthopoly::gamma_reference(48);
    vec![("poisson", poisson), ("pascal", pascal), ("gamma", gamma)]
}

/// Max relative defect of the Hankel identity
/// `‖:Yⁿ:‖²/n! = Σ_{α: n(α)=n} K_α t^{|α|}` over `n ≤ n_le` and the given
/// `t` values.
pub fn hankel_identity_defect(
    model: &LevyModel,
    coeffs: &JacobiCoeffs,
    n_le: usize,
    t_values: &[f64],
) -> Result<f64, VerifyError> {
    let mut worst = 0.0f64;
    for &t in t_values {
        let grid = crate::grid::SpaceGrid::new(vec![t]).expect("positive weight");
        let ops = ExtOps::new(&grid, coeffs);
        let moments = scalar_law_moments(model, t, 2 * n_le);
        for n in 1..=n_le {
            let lhs = wick_norm_oracle(&moments, n)? / factorial(n);
            let rhs: f64 = compositions_of(n)
                .iter()
                .map(|c| ops.k_alpha(c).map(|k| k * t.powi(c.size() as i32)))
                .sum::<Result<f64, _>>()?;
            worst = worst.max(deviation(lhs, rhs, 1e-12));
        }
    }
    Ok(worst)
}

/// One verification check: measured deviation against its threshold.
#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub deviation: f64,
    pub threshold: f64,
    pub pass: bool,
}

/// Full verification report; `pass` is the conjunction of all checks.
#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub seed: u64,
    pub inputs_digest: String,
    pub checks: Vec<CheckResult>,
    pub pass: bool,
}

fn inputs_digest(exp: &crate::config::Experiment) -> String {
    use std::hash::{Hash, Hasher};
    let mut h = std::collections::hash_map::DefaultHasher::new();
    for a in exp.model.atoms() {
        a.s.to_bits().hash(&mut h);
        a.w.to_bits().hash(&mut h);
    }
    for &w in exp.grid.weights() {
        w.to_bits().hash(&mut h);
    }
    for phi in &exp.test_functions {
        for &v in phi.values() {
            v.to_bits().hash(&mut h);
        }
    }
    (exp.jacobi_n, exp.n_max, exp.ell, exp.seed).hash(&mut h);
    exp.tol.to_bits().hash(&mut h);
    format!("{:016x}", h.finish())
}

/// Run every structural check on the configured experiment; failures are
/// recorded, never fatal. Checks that cannot run (truncation too small)
/// report an infinite deviation.
pub fn property_suite(exp: &crate::config::Experiment) -> Report {
    use crate::extfock::{ExtOps, ExtVector};
    use crate::orthopoly::{single_particle_intertwining_residual, stieltjes};
    use crate::stdfock::{FockVector, JacobiPart, StdOps};
    use rand::{Rng, SeedableRng};

    let mut checks: Vec<CheckResult> = Vec::new();
    let push = |checks: &mut Vec<CheckResult>, name: &str, dev: f64, threshold: f64| {
        checks.push(CheckResult {
            name: name.to_string(),
            deviation: dev,
            threshold,
            pass: dev.is_finite() && dev <= threshold,
        });
    };

    let m = exp.grid.len();
    let mut rng: rand_chacha::ChaCha8Rng = SeedableRng::seed_from_u64(exp.seed);
    let phi = exp.test_functions[0].clone();
    let psi = crate::grid::TestFunction::new(
        exp.grid.clone(),
        (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect(),
    )
    .expect("grid-sized values");

    // quadrature exactness + spectral intertwining of the Jacobi matrix
    match stieltjes(&exp.model, exp.jacobi_n) {
        Ok(coeffs_full) => {
            let dev = single_particle_intertwining_residual(&exp.model, &coeffs_full)
                .unwrap_or(f64::INFINITY);
            push(&mut checks, "quadrature_exactness", dev, 1e-9);
        }
        Err(_) => push(&mut checks, "quadrature_exactness", f64::INFINITY, 1e-9),
    }

    let coeffs = match stieltjes(&exp.model, exp.n_max + 1) {
        Ok(c) => c,
        Err(_) => {
            push(&mut checks, "recurrence_construction", f64::INFINITY, 0.0);
            let pass = checks.iter().all(|c| c.pass);
            return Report { seed: exp.seed, inputs_digest: inputs_digest(exp), checks, pass };
        }
    };

    // Hankel identity on the reference measures where the determinant oracle
    // is exact (chaos components coincide with orthogonal polynomials)
    let mut hankel_dev = 0.0f64;
    for (_, model) in hankel_reference_models() {
        let dev = stieltjes(&model, 6)
            .ok()
            .and_then(|c| hankel_identity_defect(&model, &c, 5, &[0.25, 1.0, 2.0]).ok())
            .unwrap_or(f64::INFINITY);
        hankel_dev = hankel_dev.max(dev);
    }
    push(&mut checks, "hankel_identity", hankel_dev, 1e-8);

    // extended representation: adjointness, symmetry, commutativity
    let ops = ExtOps::new(&exp.grid, &coeffs);
    let rel = |x: f64, y: f64| (x - y).abs() / x.abs().max(y.abs()).max(1.0);
    let mut adj_dev = 0.0f64;
    let mut sym_dev = 0.0f64;
    let mut comm_dev = 0.0f64;
    if exp.n_max >= 2 {
        for _ in 0..10 {
            let f = ExtVector::random(m, exp.n_max, exp.n_max - 1, &mut rng);
            let g = ExtVector::random(m, exp.n_max, exp.n_max, &mut rng);
            let lhs = ops.jplus_apply(&phi, &f).and_then(|jf| ops.inner(&jf, &g));
            let rhs = ops.jminus_apply(&phi, &g).and_then(|jg| ops.inner(&f, &jg));
            match (lhs, rhs) {
                (Ok(x), Ok(y)) => adj_dev = adj_dev.max(rel(x, y)),
                _ => adj_dev = f64::INFINITY,
            }

            let g1 = ExtVector::random(m, exp.n_max, exp.n_max - 1, &mut rng);
            let lhs = ops.jfield_apply(&phi, &f).and_then(|jf| ops.inner(&jf, &g1));
            let rhs = ops.jfield_apply(&phi, &g1).and_then(|jg| ops.inner(&f, &jg));
            match (lhs, rhs) {
                (Ok(x), Ok(y)) => sym_dev = sym_dev.max(rel(x, y)),
                _ => sym_dev = f64::INFINITY,
            }

            let v = ExtVector::random(m, exp.n_max, exp.n_max.saturating_sub(2), &mut rng);
            let c = (|| -> Result<f64, ExtError> {
                let pq = ops.jfield_apply(&psi, &ops.jfield_apply(&phi, &v)?)?;
                let mut qp = ops.jfield_apply(&phi, &ops.jfield_apply(&psi, &v)?)?;
                qp.add_assign(&pq, -1.0)?;
                Ok(ops.norm(&qp)? / ops.norm(&v)?.max(1e-300))
            })();
            comm_dev = comm_dev.max(c.unwrap_or(f64::INFINITY));
        }
    }
    push(&mut checks, "adjointness_ext", adj_dev, 1e-10);
    push(&mut checks, "symmetry_ext", sym_dev, 1e-10);
    push(&mut checks, "commutativity_ext", comm_dev, 1e-10);

    // standard representation: symmetry, commutativity, path agreements
    match StdOps::new(exp.grid.clone(), &coeffs, exp.ell) {
        Ok(sops) => {
            let mut sym_dev = 0.0f64;
            let mut comm_dev = 0.0f64;
            let safe_cap = (exp.ell.saturating_sub(2)) * m;
            if exp.n_max >= 2 && safe_cap > 0 {
                for _ in 0..10 {
                    let f = FockVector::random(
                        exp.ell, m, exp.n_max, exp.n_max - 1, safe_cap, &mut rng,
                    );
                    let g = FockVector::random(
                        exp.ell, m, exp.n_max, exp.n_max - 1, safe_cap, &mut rng,
                    );
                    let lhs = sops.a_field(&phi, &f).and_then(|af| sops.inner(&af, &g));
                    let rhs = sops.a_field(&phi, &g).and_then(|ag| sops.inner(&f, &ag));
                    match (lhs, rhs) {
                        (Ok(x), Ok(y)) => sym_dev = sym_dev.max(rel(x, y)),
                        _ => sym_dev = f64::INFINITY,
                    }

                    let v = FockVector::random(
                        exp.ell, m, exp.n_max, exp.n_max - 2, safe_cap, &mut rng,
                    );
                    let c = (|| -> Result<f64, FockError> {
                        let pq = sops.a_field(&psi, &sops.a_field(&phi, &v)?)?;
                        let mut qp = sops.a_field(&phi, &sops.a_field(&psi, &v)?)?;
                        qp.add_assign(&pq, -1.0)?;
                        Ok(sops.norm(&qp)? / sops.norm(&v)?.max(1e-300))
                    })();
                    comm_dev = comm_dev.max(c.unwrap_or(f64::INFINITY));
                }
            }
            push(&mut checks, "symmetry_std", sym_dev, 1e-10);
            push(&mut checks, "commutativity_std", comm_dev, 1e-10);

            // product-vector formulas vs second-quantization assembly
            let mut path_dev = 0.0f64;
            let xi: Vec<f64> =
                (0..exp.ell.saturating_sub(1)).map(|_| rng.gen_range(-1.0..1.0)).collect();
            for n in 0..exp.n_max.min(3) {
                for part in [JacobiPart::Plus, JacobiPart::Zero, JacobiPart::Minus] {
                    let d = (|| -> Result<f64, FockError> {
                        let sp = crate::stdfock::SingleParticle::tensor(&xi, exp.ell, &psi);
                        let base = FockVector::product_power(&sp, n, exp.n_max);
                        let assembled = match part {
                            JacobiPart::Plus => sops.a_plus_field(&phi, &base)?,
                            JacobiPart::Zero => sops.a_zero_field(&phi, &base)?,
                            JacobiPart::Minus => sops.a_minus_field(&phi, &base)?,
                            JacobiPart::Full => unreachable!(),
                        };
                        let mut product = sops.field_part_on_product(
                            part, &phi, &xi, &psi, n, exp.n_max,
                        )?;
                        product.add_assign(&assembled, -1.0)?;
                        Ok(product.max_abs())
                    })();
                    path_dev = path_dev.max(d.unwrap_or(f64::INFINITY));
                }
            }
            push(&mut checks, "product_path_agreement", path_dev, 1e-12);
        }
        Err(_) => {
            push(&mut checks, "symmetry_std", f64::INFINITY, 1e-10);
            push(&mut checks, "commutativity_std", f64::INFINITY, 1e-10);
            push(&mut checks, "product_path_agreement", f64::INFINITY, 1e-12);
        }
    }

    // creation path agreement on monomial vectors
    let mut mono_dev = 0.0f64;
    for n in 0..exp.n_max.min(3) {
        let d = (|| -> Result<f64, ExtError> {
            let vals: Vec<f64> = (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let f = crate::grid::TestFunction::new(exp.grid.clone(), vals)?;
            let tensor = crate::extfock::SymTensor::power(&f, n);
            let via_adjoint =
                ops.jplus_apply(&phi, &ExtVector::from_symmetric(&tensor, exp.n_max)?)?;
            let direct = ops.jplus_apply_monomial(&phi, &tensor)?;
            let mut dev = 0.0f64;
            for (comp, t) in &direct {
                // skip null directions (K_α = 0 for terminated measures)
                if ops.k_alpha(comp)? == 0.0 {
                    continue;
                }
                let mut diff = t.clone();
                if let Some(other) = via_adjoint.get(n + 1, comp) {
                    diff.add_assign(other, -1.0);
                }
                dev = dev.max(diff.max_abs());
            }
            Ok(dev)
        })();
        mono_dev = mono_dev.max(d.unwrap_or(f64::INFINITY));
    }
    push(&mut checks, "creation_monomial_agreement", mono_dev, 1e-10);

    // moment triple-agreement across representations and oracle
    let mut moment_dev = 0.0f64;
    let kmax = exp.n_max.min(6);
    for phi in &exp.test_functions {
        match moment_table(phi, &exp.model, &coeffs, kmax, 1e-10) {
            Ok(rows) => {
                for r in rows {
                    moment_dev = moment_dev.max(r.max_deviation);
                }
            }
            Err(_) => moment_dev = f64::INFINITY,
        }
    }
    push(&mut checks, "moment_triple_agreement", moment_dev, exp.tol.max(1e-8));

    let pass = checks.iter().all(|c| c.pass);
    Report { seed: exp.seed, inputs_digest: inputs_digest(exp), checks, pass }
}
