//! Feasibility of amplitude assignments for the three tandem experiments.
//!
//! An assignment fixes three change-of-basis matrices:
//!
//! | slot      | experiment            | columns                       |
//! |-----------|-----------------------|-------------------------------|
//! | `z_in_x`  | z beam into SG_x      | `|z±⟩` in x coordinates       |
//! | `z_in_y`  | z beam into SG_y      | `|z±⟩` in y coordinates       |
//! | `x_in_y`  | x beam into SG_y      | `|x±⟩` in y coordinates       |
//!
//! Each experiment shows two equal-intensity output beams, so every entry
//! must have modulus `1/√2`. The three matrices must also compose:
//! `x_in_y · z_in_x` has to reproduce `z_in_y`, up to one unit phase per
//! column (the unobservable phase of each `|z±⟩`).
//!
//! [`search`] enumerates every assignment whose entries lie on a grid of
//! phases. Restricted to real entries the search is empty; with complex
//! eighth roots of unity it is not.

use std::collections::HashMap;
use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::fmt;
use std::ops::Mul;

use num_complex::Complex64;
use thiserror::Error;

/// Tolerance for constraint checks; composition multiplies entries.
pub const CHECK_TOL: f64 = 1e-9;

/// Tolerance for the exact closed-form matrices in [`verify_assignment`].
pub const EXACT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProverError {
    #[error("{slot} matrix is not unitary (max |M†M − I| = {deviation:e})")]
    NonUnitary { slot: Slot, deviation: f64 },
    #[error("unsupported phase grid {0}; use 2, 4 or 8")]
    UnsupportedGrid(u32),
}

/// A 2×2 change-of-basis matrix, `m[row][col]`. Column `j` holds the
/// coordinates of source-basis ket `j` in the target basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransferMatrix {
    m: [[Complex64; 2]; 2],
}

impl TransferMatrix {
    pub const fn new(m: [[Complex64; 2]; 2]) -> Self {
        TransferMatrix { m }
    }

    /// `(1/√2)[[1, 1], [1, −1]]`
    pub const fn hadamard() -> Self {
        let s = Complex64::new(FRAC_1_SQRT_2, 0.0);
        let n = Complex64::new(-FRAC_1_SQRT_2, 0.0);
        TransferMatrix::new([[s, s], [s, n]])
    }

    pub const fn identity() -> Self {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        TransferMatrix::new([[one, zero], [zero, one]])
    }

    /// Matrix with entries `e^{iπ·n/4}/√2` for the given eighths `n`.
    pub fn from_eighths(n: [[u32; 2]; 2]) -> Self {
        TransferMatrix::new(n.map(|row| row.map(scaled_eighth_root)))
    }

    pub fn entries(&self) -> &[[Complex64; 2]; 2] {
        &self.m
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.m[row][col]
    }

    pub fn column(&self, col: usize) -> [Complex64; 2] {
        [self.m[0][col], self.m[1][col]]
    }

    pub fn adjoint(&self) -> Self {
        let m = &self.m;
        TransferMatrix::new([
            [m[0][0].conj(), m[1][0].conj()],
            [m[0][1].conj(), m[1][1].conj()],
        ])
    }

    pub fn moduli(&self) -> [[f64; 2]; 2] {
        self.m.map(|row| row.map(|z| z.norm()))
    }

    /// Max entry of `|M†M − I|`.
    pub fn unitarity_deviation(&self) -> f64 {
        let g = self.adjoint() * *self;
        let mut worst = 0.0_f64;
        for r in 0..2 {
            for c in 0..2 {
                let target = if r == c { 1.0 } else { 0.0 };
                worst = worst.max((g.m[r][c] - target).norm());
            }
        }
        worst
    }

    /// Max over entries of `| |m| − 1/√2 |`.
    pub fn bias_deviation(&self) -> f64 {
        self.m
            .iter()
            .flatten()
            .map(|z| (z.norm() - FRAC_1_SQRT_2).abs())
            .fold(0.0, f64::max)
    }

    pub fn is_real(&self, tol: f64) -> bool {
        self.m.iter().flatten().all(|z| z.im.abs() <= tol)
    }

    /// Multiplies column `col` by `phase` (a unit scalar).
    pub fn with_column_phase(&self, col: usize, phase: Complex64) -> Self {
        let mut m = self.m;
        m[0][col] *= phase;
        m[1][col] *= phase;
        TransferMatrix::new(m)
    }

    /// Multiplies row `row` by `phase`.
    pub fn with_row_phase(&self, row: usize, phase: Complex64) -> Self {
        let mut m = self.m;
        m[row][0] *= phase;
        m[row][1] *= phase;
        TransferMatrix::new(m)
    }

    /// Largest entrywise distance between `self` and `other` after each
    /// column of `other` is rotated by its best-fitting unit phase.
    /// Infinite when some column pair is orthogonal.
    pub fn column_phase_distance(&self, other: &TransferMatrix) -> f64 {
        let mut worst = 0.0_f64;
        for c in 0..2 {
            let a = self.column(c);
            let b = other.column(c);
            let overlap = b[0].conj() * a[0] + b[1].conj() * a[1];
            if overlap.norm() < 1e-300 {
                return f64::INFINITY;
            }
            let phase = overlap / overlap.norm();
            for r in 0..2 {
                worst = worst.max((a[r] - phase * b[r]).norm());
            }
        }
        worst
    }

    pub fn equal_up_to_column_phases(&self, other: &TransferMatrix, tol: f64) -> bool {
        self.column_phase_distance(other) <= tol
    }
}

impl Mul for TransferMatrix {
    type Output = TransferMatrix;

    fn mul(self, rhs: TransferMatrix) -> TransferMatrix {
        let (a, b) = (&self.m, &rhs.m);
        let mut m = [[Complex64::new(0.0, 0.0); 2]; 2];
        for (r, row) in m.iter_mut().enumerate() {
            for (c, v) in row.iter_mut().enumerate() {
                *v = a[r][0] * b[0][c] + a[r][1] * b[1][c];
            }
        }
        TransferMatrix::new(m)
    }
}

impl fmt::Display for TransferMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let e = |z: Complex64| format!("{:.6}{:+.6}i", z.re, z.im);
        write!(
            f,
            "[[{}, {}], [{}, {}]]",
            e(self.m[0][0]),
            e(self.m[0][1]),
            e(self.m[1][0]),
            e(self.m[1][1])
        )
    }
}

/// `e^{iπ·n/4}/√2`, exact for every `n`.
fn scaled_eighth_root(n: u32) -> Complex64 {
    const S: f64 = FRAC_1_SQRT_2;
    let (re, im) = match n % 8 {
        0 => (S, 0.0),
        1 => (0.5, 0.5),
        2 => (0.0, S),
        3 => (-0.5, 0.5),
        4 => (-S, 0.0),
        5 => (-0.5, -0.5),
        6 => (0.0, -S),
        _ => (0.5, -0.5),
    };
    Complex64::new(re, im)
}

/// One of the three matrices of an assignment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Slot {
    /// Experiment I: `|z±⟩` expanded in the x basis.
    ZInX,
    /// Experiment II: `|z±⟩` expanded in the y basis.
    ZInY,
    /// Experiment III: `|x±⟩` expanded in the y basis.
    XInY,
}

impl Slot {
    pub const ALL: [Slot; 3] = [Slot::ZInX, Slot::ZInY, Slot::XInY];

    pub fn name(self) -> &'static str {
        match self {
            Slot::ZInX => "z_in_x",
            Slot::ZInY => "z_in_y",
            Slot::XInY => "x_in_y",
        }
    }

    pub fn experiment(self) -> &'static str {
        match self {
            Slot::ZInX => "I",
            Slot::ZInY => "II",
            Slot::XInY => "III",
        }
    }
}

impl fmt::Display for Slot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// The three change-of-basis matrices tied to Experiments I, II and III.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Assignment {
    pub z_in_x: TransferMatrix,
    pub z_in_y: TransferMatrix,
    pub x_in_y: TransferMatrix,
}

impl Assignment {
    pub fn new(z_in_x: TransferMatrix, z_in_y: TransferMatrix, x_in_y: TransferMatrix) -> Self {
        Assignment {
            z_in_x,
            z_in_y,
            x_in_y,
        }
    }

    /// All three experiments written with real coefficients `(1/√2)(±1)`.
    pub fn all_real() -> Self {
        let h = TransferMatrix::hadamard();
        Assignment::new(h, h, h)
    }

    /// Experiments I and II real, Experiment III with coefficients
    /// `(1 ∓ i)/2`.
    pub fn conventional_complex() -> Self {
        let h = TransferMatrix::hadamard();
        Assignment::new(h, h, conventional_x_in_y())
    }

    /// Experiments I and II real, Experiment III as
    /// `|x±⟩ = (|y+⟩ ± i|y−⟩)/√2`.
    pub fn alternative_complex() -> Self {
        let h = TransferMatrix::hadamard();
        Assignment::new(h, h, alternative_x_in_y())
    }

    pub fn slot(&self, slot: Slot) -> &TransferMatrix {
        match slot {
            Slot::ZInX => &self.z_in_x,
            Slot::ZInY => &self.z_in_y,
            Slot::XInY => &self.x_in_y,
        }
    }

    pub fn slot_mut(&mut self, slot: Slot) -> &mut TransferMatrix {
        match slot {
            Slot::ZInX => &mut self.z_in_x,
            Slot::ZInY => &mut self.z_in_y,
            Slot::XInY => &mut self.x_in_y,
        }
    }

    /// `x_in_y · z_in_x`: the z kets carried into y through x.
    pub fn composition(&self) -> TransferMatrix {
        self.x_in_y * self.z_in_x
    }

    pub fn non_real_slots(&self, tol: f64) -> Vec<Slot> {
        Slot::ALL
            .into_iter()
            .filter(|s| !self.slot(*s).is_real(tol))
            .collect()
    }
}

/// `½[[1 − i, 1 + i], [1 + i, 1 − i]]`
pub fn conventional_x_in_y() -> TransferMatrix {
    let a = Complex64::new(0.5, -0.5);
    let b = Complex64::new(0.5, 0.5);
    TransferMatrix::new([[a, b], [b, a]])
}

/// `(1/√2)[[1, 1], [i, −i]]`
pub fn alternative_x_in_y() -> TransferMatrix {
    let s = Complex64::new(FRAC_1_SQRT_2, 0.0);
    let i = Complex64::new(0.0, FRAC_1_SQRT_2);
    TransferMatrix::new([[s, s], [i, -i]])
}

/// A constraint that an assignment fails.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    /// An entry whose modulus is not `1/√2`: the experiment would not show
    /// two equal beams.
    Biased {
        slot: Slot,
        row: usize,
        col: usize,
        modulus: f64,
    },
    /// `x_in_y · z_in_x` differs from `z_in_y` beyond column phases.
    Composition {
        product: TransferMatrix,
        product_moduli: [[f64; 2]; 2],
        deviation: f64,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Biased {
                slot,
                row,
                col,
                modulus,
            } => write!(
                f,
                "experiment {} ({slot}) entry [{row}][{col}] has modulus {modulus:.6}, expected 1/sqrt(2)",
                slot.experiment()
            ),
            Violation::Composition {
                product_moduli: m,
                deviation,
                ..
            } => write!(
                f,
                "composition x_in_y * z_in_x has entry moduli [[{:.6}, {:.6}], [{:.6}, {:.6}]] and misses z_in_y by {deviation:.3e}",
                m[0][0], m[0][1], m[1][0], m[1][1]
            ),
        }
    }
}

/// Detailed outcome of [`check_consistency`].
#[derive(Debug, Clone, PartialEq)]
pub struct ConsistencyReport {
    /// Per slot, max `| |entry| − 1/√2 |`.
    pub bias_deviation: [f64; 3],
    pub product: TransferMatrix,
    pub composition_deviation: f64,
    pub violations: Vec<Violation>,
}

impl ConsistencyReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks an assignment against every experiment and the composition law.
pub fn check_consistency(a: &Assignment) -> Result<ConsistencyReport, ProverError> {
    for slot in Slot::ALL {
        let deviation = a.slot(slot).unitarity_deviation();
        if !(deviation <= CHECK_TOL) {
            return Err(ProverError::NonUnitary { slot, deviation });
        }
    }

    let mut violations = Vec::new();
    let mut bias_deviation = [0.0; 3];
    for (i, slot) in Slot::ALL.into_iter().enumerate() {
        let m = a.slot(slot);
        bias_deviation[i] = m.bias_deviation();
        for row in 0..2 {
            for col in 0..2 {
                let modulus = m.entry(row, col).norm();
                if (modulus - FRAC_1_SQRT_2).abs() > CHECK_TOL {
                    violations.push(Violation::Biased {
                        slot,
                        row,
                        col,
                        modulus,
                    });
                }
            }
        }
    }

    let product = a.composition();
    let composition_deviation = product.column_phase_distance(&a.z_in_y);
    if !(composition_deviation <= CHECK_TOL) {
        violations.push(Violation::Composition {
            product,
            product_moduli: product.moduli(),
            deviation: composition_deviation,
        });
    }

    Ok(ConsistencyReport {
        bias_deviation,
        product,
        composition_deviation,
        violations,
    })
}

/// Number field the assignment coefficients are drawn from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Field {
    Real,
    Complex,
}

impl Field {
    pub fn name(self) -> &'static str {
        match self {
            Field::Real => "real",
            Field::Complex => "complex",
        }
    }
}

/// Phases restricted to multiples of `2π/g`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PhaseGrid(u32);

impl PhaseGrid {
    pub fn new(g: u32) -> Result<Self, ProverError> {
        match g {
            2 | 4 | 8 => Ok(PhaseGrid(g)),
            other => Err(ProverError::UnsupportedGrid(other)),
        }
    }

    pub fn size(self) -> u32 {
        self.0
    }

    /// Grid index `k` in units of `π/4`.
    fn to_eighths(self, k: u32) -> u32 {
        k * (8 / self.0)
    }

    /// Nearest grid index to a unit complex number, if within `tol`.
    fn snap(self, z: Complex64, tol: f64) -> Option<u32> {
        let g = self.0 as f64;
        let turns = z.arg() / (2.0 * PI) * g;
        let k = turns.round().rem_euclid(g) as u32;
        let root = Complex64::from_polar(1.0, 2.0 * PI * k as f64 / g);
        ((z - root).norm() <= tol).then_some(k)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConstraintSet {
    pub field: Field,
    pub grid: PhaseGrid,
}

impl ConstraintSet {
    pub fn new(field: Field, grid: u32) -> Result<Self, ProverError> {
        Ok(ConstraintSet {
            field,
            grid: PhaseGrid::new(grid)?,
        })
    }
}

/// A unitary with every entry `e^{2πik/g}/√2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridUnitary {
    /// Grid index of each entry, `[row][col]`.
    pub phases: [[u32; 2]; 2],
    pub matrix: TransferMatrix,
}

impl GridUnitary {
    /// Entry phases in units of `π/4`.
    pub fn eighths(&self, grid: PhaseGrid) -> [[u32; 2]; 2] {
        self.phases.map(|row| row.map(|k| grid.to_eighths(k)))
    }

    /// Grid index of `m[1][c] / m[0][c]` for each column: the matrix up to
    /// column phases.
    fn column_ratio_key(&self, g: u32) -> (u32, u32) {
        let p = &self.phases;
        (
            (p[1][0] + g - p[0][0]) % g,
            (p[1][1] + g - p[0][1]) % g,
        )
    }
}

/// Every unitary on the grid with all entries of modulus `1/√2`, in
/// lexicographic order of `(k00, k10, k01)`. The remaining entry is fixed
/// by column orthogonality: `k11 = k01 + k10 − k00 + g/2`.
/// [`Field::Real`] keeps only the real ones.
pub fn enumerate_unbiased_unitaries(grid: PhaseGrid, field: Field) -> Vec<GridUnitary> {
    let g = grid.size();
    let allowed: Vec<u32> = match field {
        Field::Real => vec![0, g / 2],
        Field::Complex => (0..g).collect(),
    };
    let mut out = Vec::new();
    for &k00 in &allowed {
        for &k10 in &allowed {
            for &k01 in &allowed {
                let k11 = (k01 + k10 + g + g / 2 - k00) % g;
                if field == Field::Real && k11 % (g / 2) != 0 {
                    continue;
                }
                let phases = [[k00, k01], [k10, k11]];
                let matrix = TransferMatrix::from_eighths(phases.map(|r| r.map(|k| grid.to_eighths(k))));
                out.push(GridUnitary { phases, matrix });
            }
        }
    }
    out
}

/// A passing assignment found by [`search`].
#[derive(Debug, Clone, PartialEq)]
pub struct Witness {
    pub assignment: Assignment,
    /// Candidate index per slot, in [`Slot::ALL`] order.
    pub indices: [usize; 3],
    /// Entry phases in units of `π/4`, per slot in [`Slot::ALL`] order.
    pub eighths: [[[u32; 2]; 2]; 3],
    pub non_real_slots: Vec<Slot>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConsistencyVerdict {
    pub field: Field,
    pub grid: u32,
    pub feasible: bool,
    pub witness: Option<Witness>,
    /// All passing triples, counting every column-phase variant separately.
    pub witness_count: u64,
    /// Why every candidate failed, when infeasible.
    pub violated: Option<String>,
    /// `(z_in_x, x_in_y)` pairs examined; for each, every `z_in_y`
    /// candidate is tested.
    pub search_size: u64,
    pub candidates_per_slot: usize,
    /// Pairs whose composition has an entry of modulus other than `1/√2`.
    pub biased_compositions: u64,
    /// Pairs whose composition is unbiased but matches no grid candidate.
    pub off_grid_compositions: u64,
}

/// Exhaustive search over grid assignments.
///
/// For each `(z_in_x, x_in_y)` pair the composition is formed once and all
/// `z_in_y` candidates equal to it up to column phases are counted as
/// witnesses. The reported witness has the fewest non-real slots; ties go
/// to the lowest `(z_in_x, x_in_y, z_in_y)` index.
pub fn search(constraints: &ConstraintSet) -> ConsistencyVerdict {
    let grid = constraints.grid;
    let g = grid.size();
    let candidates = enumerate_unbiased_unitaries(grid, constraints.field);
    let n = candidates.len();

    let mut by_ratio: HashMap<(u32, u32), Vec<usize>> = HashMap::new();
    for (i, c) in candidates.iter().enumerate() {
        by_ratio.entry(c.column_ratio_key(g)).or_default().push(i);
    }
    let is_real: Vec<bool> = candidates.iter().map(|c| c.matrix.is_real(0.0)).collect();

    let mut witness_count = 0u64;
    let mut biased = 0u64;
    let mut off_grid = 0u64;
    // (non-real count, zx, xy, zy)
    let mut best: Option<(usize, usize, usize, usize)> = None;

    for (i, zx) in candidates.iter().enumerate() {
        for (j, xy) in candidates.iter().enumerate() {
            let product = xy.matrix * zx.matrix;
            if product.bias_deviation() > CHECK_TOL {
                biased += 1;
                continue;
            }
            let ratio = |c: usize| {
                let col = product.column(c);
                grid.snap(col[1] / col[0], CHECK_TOL)
            };
            let key = match (ratio(0), ratio(1)) {
                (Some(a), Some(b)) => (a, b),
                _ => {
                    off_grid += 1;
                    continue;
                }
            };
            let Some(matches) = by_ratio.get(&key) else {
                off_grid += 1;
                continue;
            };
            witness_count += matches.len() as u64;
            for &k in matches {
                let complex_slots = [i, k, j].iter().filter(|&&s| !is_real[s]).count();
                let rank = (complex_slots, i, j, k);
                if best.is_none_or(|b| rank < b) {
                    best = Some(rank);
                }
            }
        }
    }

    let search_size = (n * n) as u64;
    let witness = best.map(|(_, i, j, k)| {
        let assignment = Assignment::new(candidates[i].matrix, candidates[k].matrix, candidates[j].matrix);
        Witness {
            non_real_slots: assignment.non_real_slots(0.0),
            assignment,
            indices: [i, k, j],
            eighths: [
                candidates[i].eighths(grid),
                candidates[k].eighths(grid),
                candidates[j].eighths(grid),
            ],
        }
    });
    let feasible = witness.is_some();
    let violated = (!feasible).then(|| {
        format!(
            "no assignment satisfies all experiments: of {search_size} (z_in_x, x_in_y) pairs over {n} {} candidates per slot, \
             {biased} compose to a matrix with an entry of modulus other than 1/sqrt(2) and {off_grid} match no z_in_y candidate",
            constraints.field.name()
        )
    });

    ConsistencyVerdict {
        field: constraints.field,
        grid: g,
        feasible,
        witness,
        witness_count,
        violated,
        search_size,
        candidates_per_slot: n,
        biased_compositions: biased,
        off_grid_compositions: off_grid,
    }
}

/// Result of checking one assignment at exact tolerance.
#[derive(Debug, Clone, PartialEq)]
pub struct AssignmentCheck {
    pub unitarity_deviation: [f64; 3],
    pub bias_deviation: [f64; 3],
    /// `None` when some slot is not unitary.
    pub consistency: Option<ConsistencyReport>,
}

impl AssignmentCheck {
    pub fn unitary(&self) -> bool {
        self.unitarity_deviation.iter().all(|&d| d <= EXACT_TOL)
    }

    pub fn unbiased(&self) -> bool {
        self.bias_deviation.iter().all(|&d| d <= EXACT_TOL)
    }

    pub fn passed(&self) -> bool {
        self.unitary()
            && self.unbiased()
            && self.consistency.as_ref().is_some_and(ConsistencyReport::passed)
    }
}

/// Unitarity and unbiasedness at `1e-12`, then [`check_consistency`].
pub fn verify_assignment(a: &Assignment) -> AssignmentCheck {
    let unitarity_deviation = Slot::ALL.map(|s| a.slot(s).unitarity_deviation());
    let bias_deviation = Slot::ALL.map(|s| a.slot(s).bias_deviation());
    AssignmentCheck {
        unitarity_deviation,
        bias_deviation,
        consistency: check_consistency(a).ok(),
    }
}

/// Checks the conventional assignment: real Experiments I and II with the
/// `(1 ∓ i)/2` coefficients for Experiment III.
pub fn verify_paper_assignment() -> AssignmentCheck {
    verify_assignment(&Assignment::conventional_complex())
}
