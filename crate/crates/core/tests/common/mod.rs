#![allow(dead_code)]

use num_complex::Complex64;

/// Valid scripts exercising every grammar production.
pub const VALID_SCRIPTS: [&str; 20] = [
    "source pure z +\nsg x\ndetect",
    "source unpolarized\nsg z select +\nsg x select +\nsg z\ndetect shots 100000 seed 42",
    "source pure z +\nsg y\ndetect",
    "source pure x +\nsg y\ndetect",
    "source pure x -\nsg z select -\ndetect",
    "source pure y +\nsg y select +\nsg x\ndetect shots 10",
    "source unpolarized\nsg z\ndetect",
    "source pure (0.6, 0.8i)\nsg x\ndetect",
    "source pure (1+1i, 1-1i)\nsg y select -\nsg z\ndetect shots 5 seed 0",
    "# comment\nsource pure z -   # trailing\n\nsg x\n   sg y select +\ndetect",
    "SOURCE PURE Z +\nSG X SELECT +\nDETECT",
    "source pure axis(pi/2, 0) +\nsg x\ndetect",
    "source unpolarized\nsg axis(pi/3, pi/4)\nsg axis(0, 0) select -\ndetect",
    "source pure (3, 4i)\nsg axis(1.25, 6.2)\ndetect shots 1 seed 18446744073709551615",
    "source pure (-i, 0)\nsg z\ndetect",
    "source pure (0.5, -0.5-0.5i)\nsg x select +\nsg y select -\nsg z select +\ndetect",
    "source pure axis(pi, 3pi/2) -\nsg z\ndetect",
    "source unpolarized\nsg x\nsg x\nsg x\nsg x\nsg x\ndetect",
    "source pure y -\nsg axis(0.5*pi, pi/2) select +\ndetect shots 100 seed 7",
    "source pure (1e-3, 2e-3i)\nsg y\n# done\ndetect\n\n",
];

/// Scripts with one injected fault, and the 1-based line holding it.
pub const FAULTY_SCRIPTS: [(&str, usize); 10] = [
    ("source pure z +\nsg w\ndetect", 2),
    ("source pure z +\nsg x\nsg q select +\ndetect", 3),
    ("source pure z +\nsg x\ndetect\nsg z", 4),
    ("source pure z +\nsg axis(4, 0)\ndetect", 2),
    ("source pure z +\nsg x select *\ndetect", 2),
    ("source polarized\nsg x\ndetect", 1),
    ("source unpolarized\nsg x\nmeasure\ndetect", 3),
    ("source unpolarized\nsg x\ndetect shots 0", 3),
    ("source pure (0.6, 0.8j)\nsg x\ndetect", 1),
    ("source unpolarized\nsg y\nsg axis(1, 7)\ndetect", 3),
];

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Hand-written z-coordinate kets, independent of the library's constants.
pub mod kets {
    use super::c;
    use num_complex::Complex64;

    const S: f64 = std::f64::consts::FRAC_1_SQRT_2;

    pub fn z_plus() -> [Complex64; 2] {
        [c(1.0, 0.0), c(0.0, 0.0)]
    }
    pub fn z_minus() -> [Complex64; 2] {
        [c(0.0, 0.0), c(1.0, 0.0)]
    }
    pub fn x_plus() -> [Complex64; 2] {
        [c(S, 0.0), c(S, 0.0)]
    }
    pub fn x_minus() -> [Complex64; 2] {
        [c(S, 0.0), c(-S, 0.0)]
    }
    pub fn y_plus() -> [Complex64; 2] {
        [c(S, 0.0), c(0.0, S)]
    }
    pub fn y_minus() -> [Complex64; 2] {
        [c(S, 0.0), c(0.0, -S)]
    }

    /// `a*c + b*d`
    pub fn braket(a: [Complex64; 2], b: [Complex64; 2]) -> Complex64 {
        a[0].conj() * b[0] + a[1].conj() * b[1]
    }

    /// `|⟨a|b⟩|²`
    pub fn prob(a: [Complex64; 2], b: [Complex64; 2]) -> f64 {
        braket(a, b).norm_sqr()
    }
}
