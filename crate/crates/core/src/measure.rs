//! Lévy measure `ν`, normalized jump measure `ν̃`, and its moment sequence.
//!
//! The jump measure is `ν̃(ds) = s² ν(ds)`. We keep `ν̃` as a finite list of
//! weighted atoms, probability-normalized, together with the original total
//! mass `c = ν̃(ℝ)`. The factor `c` has to be pushed into the intensity
//! measure (`σ′ = cσ`) so that downstream grids compensate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum MeasureError {
    #[error("atom at s = 0 is not allowed (jump measure must vanish at the origin)")]
    AtomAtZero,
    #[error("empty atom list")]
    Empty,
    #[error("non-positive weight {w} at atom s = {s}")]
    NonPositiveWeight { s: f64, w: f64 },
    #[error("measure has zero total mass")]
    ZeroMass,
}

/// One atom `(s, w)` of a discrete measure on the real line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Atom {
    pub s: f64,
    pub w: f64,
}

/// The normalized jump measure `ν̃` of a Lévy process, as weighted atoms.
///
/// Invariants after construction: no atom sits at zero, the weights sum to
/// one, and `scale` records the total mass `c` of `ν̃` before normalization.
#[derive(Debug, Clone, PartialEq)]
pub struct LevyModel {
    atoms: Vec<Atom>,
    scale: f64,
}

/// Kahan-compensated sum.
pub(crate) fn csum(it: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for x in it {
        let y = x - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    sum
}

fn check_atoms(atoms: &[Atom]) -> Result<(), MeasureError> {
    if atoms.is_empty() {
        return Err(MeasureError::Empty);
    }
    for a in atoms {
        if a.s == 0.0 {
            return Err(MeasureError::AtomAtZero);
        }
        if !(a.w > 0.0) {
            return Err(MeasureError::NonPositiveWeight { s: a.s, w: a.w });
        }
    }
    Ok(())
}

impl LevyModel {
    /// Build `ν̃` from the atoms of the Lévy measure `ν`: each atom `(s, w)`
    /// becomes `(s, s²w)`, then the result is probability-normalized.
    pub fn from_nu(nu_atoms: &[Atom]) -> Result<Self, MeasureError> {
        check_atoms(nu_atoms)?;
        let tilde: Vec<Atom> = nu_atoms
            .iter()
            .map(|a| Atom { s: a.s, w: a.s * a.s * a.w })
            .collect();
        Self::from_nu_tilde(&tilde)
    }

    /// Build the model from atoms of `ν̃` directly (normalizing if needed).
    pub fn from_nu_tilde(atoms: &[Atom]) -> Result<Self, MeasureError> {
        check_atoms(atoms)?;
        let mass = csum(atoms.iter().map(|a| a.w));
        if !(mass > 0.0) {
            return Err(MeasureError::ZeroMass);
        }
        Ok(LevyModel {
            atoms: atoms.iter().map(|a| Atom { s: a.s, w: a.w / mass }).collect(),
            scale: mass,
        })
    }

    /// Re-normalize; idempotent. Returns the model and the factor by which
    /// the intensity measure `σ` must be multiplied to compensate.
    pub fn normalize(self) -> Result<(Self, f64), MeasureError> {
        let scale = self.scale;
        let model = Self::from_nu_tilde(&self.atoms)?;
        // from_nu_tilde sees already-unit mass, so the original scale survives
        Ok((LevyModel { atoms: model.atoms, scale }, scale))
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    /// Number of distinct support points.
    pub fn support_size(&self) -> usize {
        let mut s: Vec<f64> = self.atoms.iter().map(|a| a.s).collect();
        s.sort_by(|a, b| a.partial_cmp(b).unwrap());
        s.dedup();
        s.len()
    }

    /// Total mass `c = ν̃(ℝ)` before normalization.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// k-th moment `m̃ₖ = Σ wⱼ sⱼᵏ` of the normalized jump measure.
    pub fn moment(&self, k: usize) -> f64 {
        csum(self.atoms.iter().map(|a| a.w * a.s.powi(k as i32)))
    }

    /// `Σ wⱼ exp(ε|sⱼ|)` — the atomic analogue of the exponential-moment
    /// condition on `ν̃`; always finite here, reported for diagnostics.
    pub fn exp_moment_report(&self, eps: f64) -> f64 {
        assert!(eps > 0.0, "eps must be positive");
        csum(self.atoms.iter().map(|a| a.w * (eps * a.s.abs()).exp()))
    }
}
