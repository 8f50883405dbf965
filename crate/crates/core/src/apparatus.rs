//! Stern-Gerlach apparatus as a projective two-outcome measurement.

use std::f64::consts::{FRAC_1_SQRT_2, PI, TAU};
use std::fmt;

use num_complex::Complex64;
use thiserror::Error;

use crate::spin::{inner_product, Basis, Sign, SpinKet};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ApparatusError {
    #[error("invalid axis: theta = {theta}, phi = {phi} (need theta in [0, pi], phi in [0, 2pi))")]
    InvalidAxis { theta: f64, phi: f64 },
}

/// Polar angles of a general orientation. Only constructible in range.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarAngles {
    theta: f64,
    phi: f64,
}

impl PolarAngles {
    pub fn new(theta: f64, phi: f64) -> Result<Self, ApparatusError> {
        let ok = theta.is_finite()
            && phi.is_finite()
            && (0.0..=PI).contains(&theta)
            && (0.0..TAU).contains(&phi);
        if ok {
            Ok(PolarAngles { theta, phi })
        } else {
            Err(ApparatusError::InvalidAxis { theta, phi })
        }
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }
}

/// Orientation of an apparatus.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Axis {
    X,
    Y,
    Z,
    Polar(PolarAngles),
}

impl Axis {
    pub const CANONICAL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    pub fn polar(theta: f64, phi: f64) -> Result<Axis, ApparatusError> {
        PolarAngles::new(theta, phi).map(Axis::Polar)
    }

    pub fn label(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Axis::X => f.write_str("x"),
            Axis::Y => f.write_str("y"),
            Axis::Z => f.write_str("z"),
            Axis::Polar(a) => write!(f, "axis({}, {})", a.theta, a.phi),
        }
    }
}

const fn real(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Eigenbasis of the apparatus oriented along `axis`.
///
/// x and y use the conventional exact forms `(1, ±1)/√2` and `(1, ±i)/√2`.
/// A polar orientation `(θ, φ)` uses the half-angle kets
/// `(cos θ/2, e^{iφ} sin θ/2)` and `(sin θ/2, −e^{iφ} cos θ/2)`, each
/// rephased with [`SpinKet::canonical_phase`].
pub fn eigenbasis(axis: &Axis) -> Basis {
    let (plus, minus) = match axis {
        Axis::Z => (SpinKet::Z_PLUS, SpinKet::Z_MINUS),
        Axis::X => (
            SpinKet::from_normalized(real(FRAC_1_SQRT_2), real(FRAC_1_SQRT_2)),
            SpinKet::from_normalized(real(FRAC_1_SQRT_2), real(-FRAC_1_SQRT_2)),
        ),
        Axis::Y => (
            SpinKet::from_normalized(real(FRAC_1_SQRT_2), Complex64::new(0.0, FRAC_1_SQRT_2)),
            SpinKet::from_normalized(real(FRAC_1_SQRT_2), Complex64::new(0.0, -FRAC_1_SQRT_2)),
        ),
        Axis::Polar(a) => {
            let (s, c) = (a.theta / 2.0).sin_cos();
            let e = Complex64::from_polar(1.0, a.phi);
            (
                SpinKet::from_normalized(real(c), e * s).canonical_phase(),
                SpinKet::from_normalized(real(s), -e * c).canonical_phase(),
            )
        }
    };
    Basis::new(axis.label(), plus, minus).expect("eigenbasis construction is orthonormal")
}

/// An apparatus: an orientation together with its eigenbasis.
#[derive(Debug, Clone, PartialEq)]
pub struct SternGerlach {
    axis: Option<Axis>,
    basis: Basis,
}

impl SternGerlach {
    pub fn new(axis: Axis) -> Self {
        SternGerlach {
            basis: eigenbasis(&axis),
            axis: Some(axis),
        }
    }

    /// An apparatus defined directly by its eigenbasis, with no geometric axis.
    pub fn from_basis(basis: Basis) -> Self {
        SternGerlach { axis: None, basis }
    }

    pub fn axis(&self) -> Option<&Axis> {
        self.axis.as_ref()
    }

    pub fn basis(&self) -> &Basis {
        &self.basis
    }

    pub fn split(&self, ket: &SpinKet) -> SplitResult {
        split(ket, self)
    }
}

/// Branch probabilities and collapsed output states of one measurement.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitResult {
    pub p_plus: f64,
    pub p_minus: f64,
    pub out_plus: SpinKet,
    pub out_minus: SpinKet,
}

impl SplitResult {
    pub fn probability(&self, sign: Sign) -> f64 {
        match sign {
            Sign::Plus => self.p_plus,
            Sign::Minus => self.p_minus,
        }
    }

    pub fn output(&self, sign: Sign) -> &SpinKet {
        match sign {
            Sign::Plus => &self.out_plus,
            Sign::Minus => &self.out_minus,
        }
    }
}

/// Born-rule split: `p± = |⟨b±|ket⟩|²`, outputs are the eigenkets.
pub fn split(ket: &SpinKet, sg: &SternGerlach) -> SplitResult {
    let b = &sg.basis;
    SplitResult {
        p_plus: inner_product(b.ket_plus(), ket).norm_sqr(),
        p_minus: inner_product(b.ket_minus(), ket).norm_sqr(),
        out_plus: *b.ket_plus(),
        out_minus: *b.ket_minus(),
    }
}
