//! Two-dimensional complex state algebra for a single spin-½ particle.
//!
//! Every ket is stored as its coordinates in the z basis
//! `(⟨z+|ψ⟩, ⟨z−|ψ⟩)`. Other bases are expressed as pairs of such kets.

use std::fmt;

use num_complex::Complex64;
use thiserror::Error;

/// A superposition coefficient. Finite by construction wherever a
/// [`SpinKet`] holds one.
pub type ComplexAmplitude = Complex64;

/// Tolerance for algebraic identities (normalization, orthogonality,
/// reconstruction).
pub const ALGEBRA_TOL: f64 = 1e-12;

/// Below this modulus both amplitudes count as zero.
const ZERO_TOL: f64 = 1e-15;

/// Squared norms this close to one are left untouched by [`make_ket`].
const EXACT_NORM_TOL: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpinError {
    #[error("both amplitudes vanish; a ket needs a nonzero component")]
    ZeroVector,
    #[error("amplitude has a NaN or infinite component")]
    NonFinite,
    #[error("tolerance {0} must lie strictly between 0 and 1")]
    InvalidTolerance(f64),
    #[error("basis '{label}' is not orthonormal (|overlap| = {overlap:e})")]
    NotOrthonormal { label: String, overlap: f64 },
}

/// Outcome label of a two-outcome measurement, and index of a basis member.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub const BOTH: [Sign; 2] = [Sign::Plus, Sign::Minus];

    pub fn symbol(self) -> &'static str {
        match self {
            Sign::Plus => "+",
            Sign::Minus => "-",
        }
    }

    pub fn index(self) -> usize {
        match self {
            Sign::Plus => 0,
            Sign::Minus => 1,
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

/// A normalized spin-½ state in z coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinKet {
    plus: ComplexAmplitude,
    minus: ComplexAmplitude,
}

impl SpinKet {
    /// `|z+⟩`
    pub const Z_PLUS: SpinKet = SpinKet {
        plus: Complex64::new(1.0, 0.0),
        minus: Complex64::new(0.0, 0.0),
    };
    /// `|z−⟩`
    pub const Z_MINUS: SpinKet = SpinKet {
        plus: Complex64::new(0.0, 0.0),
        minus: Complex64::new(1.0, 0.0),
    };

    /// Same as [`make_ket`].
    pub fn new(plus: ComplexAmplitude, minus: ComplexAmplitude) -> Result<Self, SpinError> {
        make_ket(plus, minus)
    }

    /// Builds a ket from components the caller guarantees are normalized.
    pub(crate) const fn from_normalized(plus: ComplexAmplitude, minus: ComplexAmplitude) -> Self {
        SpinKet { plus, minus }
    }

    /// Coefficient of `|z+⟩`.
    pub fn plus(&self) -> ComplexAmplitude {
        self.plus
    }

    /// Coefficient of `|z−⟩`.
    pub fn minus(&self) -> ComplexAmplitude {
        self.minus
    }

    pub fn component(&self, sign: Sign) -> ComplexAmplitude {
        match sign {
            Sign::Plus => self.plus,
            Sign::Minus => self.minus,
        }
    }

    pub fn components(&self) -> [ComplexAmplitude; 2] {
        [self.plus, self.minus]
    }

    /// `[re+, im+, re−, im−]`
    pub fn to_array(&self) -> [f64; 4] {
        [self.plus.re, self.plus.im, self.minus.re, self.minus.im]
    }

    /// Multiplies the ket by the unit scalar `phase / |phase|`.
    pub fn with_global_phase(&self, phase: ComplexAmplitude) -> SpinKet {
        let unit = phase / phase.norm();
        SpinKet {
            plus: self.plus * unit,
            minus: self.minus * unit,
        }
    }

    /// Rephases so the `|z+⟩` coefficient is real and nonnegative, or, when
    /// that coefficient vanishes, so the `|z−⟩` coefficient is.
    pub fn canonical_phase(&self) -> SpinKet {
        let lead = if self.plus.norm() > ZERO_TOL {
            self.plus
        } else {
            self.minus
        };
        let unit = lead.conj() / lead.norm();
        SpinKet {
            plus: self.plus * unit,
            minus: self.minus * unit,
        }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.plus.norm_sqr() + self.minus.norm_sqr()
    }
}

impl fmt::Display for SpinKet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({:.6}{:+.6}i)|z+⟩ + ({:.6}{:+.6}i)|z−⟩",
            self.plus.re, self.plus.im, self.minus.re, self.minus.im
        )
    }
}

/// Normalizes `plus·|z+⟩ + minus·|z−⟩` into a ket.
///
/// Inputs whose squared norm is already one (to within a few ulps) are
/// returned bit-for-bit unchanged.
pub fn make_ket(plus: ComplexAmplitude, minus: ComplexAmplitude) -> Result<SpinKet, SpinError> {
    if !(plus.re.is_finite() && plus.im.is_finite() && minus.re.is_finite() && minus.im.is_finite())
    {
        return Err(SpinError::NonFinite);
    }
    if plus.norm() < ZERO_TOL && minus.norm() < ZERO_TOL {
        return Err(SpinError::ZeroVector);
    }
    let norm_sqr = plus.norm_sqr() + minus.norm_sqr();
    if (norm_sqr - 1.0).abs() <= EXACT_NORM_TOL {
        return Ok(SpinKet { plus, minus });
    }
    // hypot avoids overflow for huge components
    let norm = plus.norm().hypot(minus.norm());
    if !norm.is_finite() {
        return Err(SpinError::NonFinite);
    }
    Ok(SpinKet {
        plus: plus / norm,
        minus: minus / norm,
    })
}

/// `⟨k1|k2⟩ = a*c + b*d`, conjugate-linear in the first argument.
pub fn inner_product(k1: &SpinKet, k2: &SpinKet) -> ComplexAmplitude {
    k1.plus.conj() * k2.plus + k1.minus.conj() * k2.minus
}

/// True iff the two kets describe the same physical state:
/// `|⟨k1|k2⟩| ≥ 1 − tol`.
pub fn equal_up_to_global_phase(k1: &SpinKet, k2: &SpinKet, tol: f64) -> Result<bool, SpinError> {
    if !(tol > 0.0 && tol < 1.0) {
        return Err(SpinError::InvalidTolerance(tol));
    }
    Ok(inner_product(k1, k2).norm() >= 1.0 - tol)
}

/// An ordered orthonormal pair: the plus and minus eigenstates of one
/// apparatus orientation.
#[derive(Debug, Clone, PartialEq)]
pub struct Basis {
    label: String,
    ket_plus: SpinKet,
    ket_minus: SpinKet,
}

impl Basis {
    pub fn new(
        label: impl Into<String>,
        ket_plus: SpinKet,
        ket_minus: SpinKet,
    ) -> Result<Self, SpinError> {
        let label = label.into();
        let overlap = inner_product(&ket_plus, &ket_minus).norm();
        let worst_norm = (ket_plus.norm_sqr() - 1.0)
            .abs()
            .max((ket_minus.norm_sqr() - 1.0).abs());
        if overlap > ALGEBRA_TOL || worst_norm > ALGEBRA_TOL {
            return Err(SpinError::NotOrthonormal {
                label,
                overlap: overlap.max(worst_norm),
            });
        }
        Ok(Basis {
            label,
            ket_plus,
            ket_minus,
        })
    }

    /// The z basis `{|z+⟩, |z−⟩}`.
    pub fn reference() -> Self {
        Basis {
            label: "z".to_owned(),
            ket_plus: SpinKet::Z_PLUS,
            ket_minus: SpinKet::Z_MINUS,
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn ket_plus(&self) -> &SpinKet {
        &self.ket_plus
    }

    pub fn ket_minus(&self) -> &SpinKet {
        &self.ket_minus
    }

    pub fn ket(&self, sign: Sign) -> &SpinKet {
        match sign {
            Sign::Plus => &self.ket_plus,
            Sign::Minus => &self.ket_minus,
        }
    }
}

/// Coefficients of `k` in basis `b`: `(⟨b+|k⟩, ⟨b−|k⟩)`.
pub fn basis_expand(k: &SpinKet, b: &Basis) -> (ComplexAmplitude, ComplexAmplitude) {
    (inner_product(&b.ket_plus, k), inner_product(&b.ket_minus, k))
}

/// Inverse of [`basis_expand`]: z coordinates of `c_plus·b+ + c_minus·b−`.
/// The result is not renormalized.
pub fn reconstruct(
    c_plus: ComplexAmplitude,
    c_minus: ComplexAmplitude,
    b: &Basis,
) -> [ComplexAmplitude; 2] {
    [
        c_plus * b.ket_plus.plus + c_minus * b.ket_minus.plus,
        c_plus * b.ket_plus.minus + c_minus * b.ket_minus.minus,
    ]
}
