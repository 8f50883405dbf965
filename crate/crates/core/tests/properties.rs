mod common;

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use num_complex::Complex64;
use proptest::prelude::*;

use common::c;
use common::kets::{self, prob};
use sglab::apparatus::{eigenbasis, split, Axis, SternGerlach};
use sglab::engine::{
    apply_apparatus, apply_stage, run_pipeline, sample_shots, Beam, ExperimentScript, Selection,
    Source, Stage,
};
use sglab::prover::{
    check_consistency, enumerate_unbiased_unitaries, search, Assignment, ConstraintSet, Field,
    PhaseGrid, TransferMatrix,
};
use sglab::spin::{
    basis_expand, equal_up_to_global_phase, inner_product, make_ket, reconstruct, Basis, Sign,
    SpinKet,
};

const TOL: f64 = 1e-12;

fn ket_strategy() -> impl Strategy<Value = SpinKet> {
    (-1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64)
        .prop_filter("not too small", |(a, b, c, d)| a * a + b * b + c * c + d * d > 1e-4)
        .prop_map(|(a, b, cc, d)| make_ket(c(a, b), c(cc, d)).unwrap())
}

fn polar_strategy() -> impl Strategy<Value = Axis> {
    (0.0..=PI, 0.0..(2.0 * PI)).prop_map(|(t, p)| Axis::polar(t, p).unwrap())
}

fn axis_strategy() -> impl Strategy<Value = Axis> {
    prop_oneof![
        Just(Axis::X),
        Just(Axis::Y),
        Just(Axis::Z),
        polar_strategy(),
    ]
}

fn selection_strategy() -> impl Strategy<Value = Selection> {
    prop_oneof![
        Just(Selection::KeepPlus),
        Just(Selection::KeepMinus),
        Just(Selection::KeepBoth),
    ]
}

fn unit(phase: f64) -> Complex64 {
    Complex64::from_polar(1.0, phase)
}

// ---------------------------------------------------------------- spin

proptest! {
    #[test]
    fn make_ket_normalizes(a in -10.0..10.0f64, b in -10.0..10.0f64, cc in -10.0..10.0f64, d in -10.0..10.0f64) {
        prop_assume!(a.hypot(b).hypot(cc.hypot(d)) > 1e-6);
        let k = make_ket(c(a, b), c(cc, d)).unwrap();
        prop_assert!((k.norm_sqr() - 1.0).abs() <= TOL);
        // Direction is preserved.
        let raw = [c(a, b), c(cc, d)];
        let n = (raw[0].norm_sqr() + raw[1].norm_sqr()).sqrt();
        prop_assert!((k.plus() - raw[0] / n).norm() <= TOL);
        prop_assert!((k.minus() - raw[1] / n).norm() <= TOL);
    }

    #[test]
    fn inner_product_is_conjugate_symmetric(a in ket_strategy(), b in ket_strategy()) {
        let ab = inner_product(&a, &b);
        let ba = inner_product(&b, &a);
        prop_assert!((ab - ba.conj()).norm() <= TOL);
        prop_assert!((inner_product(&a, &a).re - 1.0).abs() <= TOL);
        prop_assert!(ab.norm() <= 1.0 + TOL);
    }

    #[test]
    fn global_phase_is_invisible(k in ket_strategy(), phi in 0.0..(2.0 * PI)) {
        let rotated = k.with_global_phase(unit(phi));
        prop_assert!(equal_up_to_global_phase(&k, &rotated, 1e-9).unwrap());
        let a = k.canonical_phase();
        let b = rotated.canonical_phase();
        prop_assert!((a.plus() - b.plus()).norm() <= 1e-9);
        prop_assert!((a.minus() - b.minus()).norm() <= 1e-9);
    }

    #[test]
    fn expansion_round_trips(k in ket_strategy(), axis in axis_strategy()) {
        let b = eigenbasis(&axis);
        let (cp, cm) = basis_expand(&k, &b);
        prop_assert!((cp.norm_sqr() + cm.norm_sqr() - 1.0).abs() <= TOL);
        let back = reconstruct(cp, cm, &b);
        prop_assert!((back[0] - k.plus()).norm() <= TOL);
        prop_assert!((back[1] - k.minus()).norm() <= TOL);
    }
}

#[test]
fn canonical_kets_match_hand_written_oracle() {
    let cases = [
        (Axis::Z, kets::z_plus(), kets::z_minus()),
        (Axis::X, kets::x_plus(), kets::x_minus()),
        (Axis::Y, kets::y_plus(), kets::y_minus()),
    ];
    for (axis, plus, minus) in cases {
        let b = eigenbasis(&axis);
        assert_eq!(b.ket_plus().components(), plus, "{axis}+");
        for (got, want) in b.ket_minus().components().iter().zip(minus) {
            assert!((got - want).norm() <= 1e-15, "{axis}-");
        }
    }
}

#[test]
fn canonical_bases_are_mutually_unbiased() {
    let all = [
        kets::z_plus(),
        kets::z_minus(),
        kets::x_plus(),
        kets::x_minus(),
        kets::y_plus(),
        kets::y_minus(),
    ];
    for (i, a) in all.iter().enumerate() {
        for (j, b) in all.iter().enumerate() {
            let oracle = if i == j {
                1.0
            } else if i / 2 == j / 2 {
                0.0
            } else {
                0.5
            };
            let ka = SpinKet::new(a[0], a[1]).unwrap();
            let kb = SpinKet::new(b[0], b[1]).unwrap();
            let got = inner_product(&ka, &kb).norm_sqr();
            assert!((got - oracle).abs() <= TOL, "pair ({i}, {j}): {got}");
            assert!((prob(*a, *b) - oracle).abs() <= TOL);
        }
    }
}

// ---------------------------------------------------------------- apparatus

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn polar_bases_are_valid_and_idempotent(axis in polar_strategy()) {
        let b = eigenbasis(&axis);
        prop_assert!(Basis::new("check", *b.ket_plus(), *b.ket_minus()).is_ok());
        let sg = SternGerlach::new(axis);
        for sign in Sign::BOTH {
            let r = split(b.ket(sign), &sg);
            prop_assert!((r.probability(sign) - 1.0).abs() <= TOL);
            prop_assert!(equal_up_to_global_phase(r.output(sign), b.ket(sign), 1e-12).unwrap());
        }
    }

    #[test]
    fn polar_plus_matches_half_angle_oracle(axis in polar_strategy()) {
        let Axis::Polar(angles) = axis else { unreachable!() };
        let (t, p) = (angles.theta(), angles.phi());
        // Probability of z+ along n is cos^2(theta/2); of x+ it is
        // (1 + sin(theta)cos(phi)) / 2; of y+ it is (1 + sin(theta)sin(phi)) / 2.
        let sg = SternGerlach::new(axis);
        let z = split(&SpinKet::Z_PLUS, &sg).p_plus;
        prop_assert!((z - (t / 2.0).cos().powi(2)).abs() <= TOL);
        let x = split(eigenbasis(&Axis::X).ket_plus(), &sg).p_plus;
        prop_assert!((x - (1.0 + t.sin() * p.cos()) / 2.0).abs() <= TOL);
        let y = split(eigenbasis(&Axis::Y).ket_plus(), &sg).p_plus;
        prop_assert!((y - (1.0 + t.sin() * p.sin()) / 2.0).abs() <= TOL);
    }

    #[test]
    fn split_probabilities_are_complete(k in ket_strategy(), axis in axis_strategy()) {
        let r = split(&k, &SternGerlach::new(axis));
        prop_assert!(r.p_plus >= 0.0 && r.p_minus >= 0.0);
        prop_assert!((r.p_plus + r.p_minus - 1.0).abs() <= TOL);
    }
}

#[test]
fn equatorial_polar_axes_reproduce_x_and_y() {
    let x = eigenbasis(&Axis::polar(PI / 2.0, 0.0).unwrap());
    let y = eigenbasis(&Axis::polar(PI / 2.0, PI / 2.0).unwrap());
    for sign in Sign::BOTH {
        assert!(equal_up_to_global_phase(x.ket(sign), eigenbasis(&Axis::X).ket(sign), 1e-12).unwrap());
        assert!(equal_up_to_global_phase(y.ket(sign), eigenbasis(&Axis::Y).ket(sign), 1e-12).unwrap());
    }
}

// ---------------------------------------------------------------- engine

fn stages_strategy() -> impl Strategy<Value = Vec<Stage>> {
    prop::collection::vec(
        (axis_strategy(), selection_strategy()).prop_map(|(a, s)| Stage::new(a, s)),
        1..6,
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn unfiltered_pipelines_conserve_intensity(k in ket_strategy(), axes in prop::collection::vec(axis_strategy(), 1..6)) {
        let stages = axes.into_iter().map(|a| Stage::new(a, Selection::KeepBoth)).collect();
        let r = run_pipeline(&ExperimentScript::new(Source::Pure(k), stages)).unwrap();
        prop_assert!((r.detector.total() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn each_stage_only_loses_intensity(k in ket_strategy(), stages in stages_strategy()) {
        let mut beams = vec![Beam::new(k, 1.0).unwrap()];
        let mut last = 1.0;
        for stage in &stages {
            let n_in = beams.len();
            beams = apply_stage(&beams, stage);
            let expect_len = if stage.selection == Selection::KeepBoth { 2 * n_in } else { n_in };
            prop_assert_eq!(beams.len(), expect_len);
            let total: f64 = beams.iter().map(|b| b.intensity()).sum();
            prop_assert!(total <= last + 1e-12);
            last = total;
        }
        let r = run_pipeline(&ExperimentScript::new(Source::Pure(k), stages)).unwrap();
        prop_assert!((r.detector.total() - last).abs() <= 1e-12);
    }

    #[test]
    fn sampling_is_deterministic_per_seed(stages in stages_strategy(), seed in any::<u64>(), shots in 1u64..150_000) {
        let script = ExperimentScript::new(Source::Unpolarized, stages);
        let a = sample_shots(&script, shots, seed).unwrap();
        let b = sample_shots(&script, shots, seed).unwrap();
        prop_assert_eq!(&a, &b);
        prop_assert_eq!(a.detected() + a.absorbed.iter().sum::<u64>(), shots);
    }
}

#[test]
fn sampled_counts_agree_with_exact_intensities() {
    let corpus = [
        "source pure z +\nsg x\ndetect",
        "source pure z +\nsg y\ndetect",
        "source pure x +\nsg y\ndetect",
        "source unpolarized\nsg z select +\nsg x select +\nsg z\ndetect",
        "source pure (0.6, 0.8i)\nsg axis(1, 2) select -\nsg y\ndetect",
        "source unpolarized\nsg axis(pi/3, pi/4)\nsg x select +\nsg axis(2.5, 5)\ndetect",
        "source pure y -\nsg z select +\nsg x select -\nsg y select +\nsg z\ndetect",
    ];
    let shots = 200_000u64;
    for (i, text) in corpus.iter().enumerate() {
        let script = sglab::parse_script(text).unwrap();
        let exact = run_pipeline(&script).unwrap();
        let counts = sample_shots(&script, shots, 1000 + i as u64).unwrap();
        for sign in Sign::BOTH {
            let p = exact.detector.get(sign);
            let sigma = (p * (1.0 - p) / shots as f64).sqrt();
            let f = counts.fraction(sign);
            assert!(
                (f - p).abs() <= 3.0 * sigma + 1e-12,
                "script {i} port {sign}: sampled {f}, exact {p}, sigma {sigma}"
            );
        }
    }
}

#[test]
fn stage_order_matters() {
    let a = ExperimentScript::new(
        Source::Pure(SpinKet::Z_PLUS),
        vec![Stage::new(Axis::X, Selection::KeepPlus), Stage::new(Axis::Z, Selection::KeepBoth)],
    );
    let b = ExperimentScript::new(
        Source::Pure(SpinKet::Z_PLUS),
        vec![Stage::new(Axis::Z, Selection::KeepBoth), Stage::new(Axis::X, Selection::KeepPlus)],
    );
    let ra = run_pipeline(&a).unwrap();
    let rb = run_pipeline(&b).unwrap();
    assert!((ra.detector.plus - 0.25).abs() <= TOL && (ra.detector.minus - 0.25).abs() <= TOL);
    assert!((rb.detector.plus - 0.5).abs() <= TOL && rb.detector.minus.abs() <= TOL);
}

#[test]
fn selection_blocks_the_other_port_entirely() {
    let script = sglab::parse_script("source unpolarized\nsg z select +\nsg z\ndetect").unwrap();
    let r = run_pipeline(&script).unwrap();
    assert!((r.detector.plus - 0.5).abs() <= TOL);
    assert!(r.detector.minus.abs() <= TOL);
    let counts = sample_shots(&script, 50_000, 3).unwrap();
    assert_eq!(counts.minus, 0);
}

// ---------------------------------------------------------------- prover

/// The eight real unbiased unitaries, from all 16 sign patterns.
fn real_oracle() -> Vec<TransferMatrix> {
    let s = FRAC_1_SQRT_2;
    let mut out = Vec::new();
    for bits in 0u32..16 {
        let sign = |b: u32| if bits >> b & 1 == 1 { -s } else { s };
        let m = [[c(sign(0), 0.0), c(sign(1), 0.0)], [c(sign(2), 0.0), c(sign(3), 0.0)]];
        // Columns orthogonal.
        if (m[0][0] * m[0][1] + m[1][0] * m[1][1]).norm() < 1e-12 {
            out.push(TransferMatrix::new(m));
        }
    }
    out
}

#[test]
fn real_field_is_infeasible_by_independent_enumeration() {
    let oracle = real_oracle();
    assert_eq!(oracle.len(), 8);
    let enumerated = enumerate_unbiased_unitaries(PhaseGrid::new(2).unwrap(), Field::Real);
    assert_eq!(enumerated.len(), 8);
    for m in &oracle {
        assert!(enumerated.iter().any(|u| u.matrix.column_phase_distance(m) <= 1e-12 && u.matrix.entries() == m.entries()));
    }
    let mut triples = 0;
    for zx in &oracle {
        for zy in &oracle {
            for xy in &oracle {
                triples += 1;
                let report = check_consistency(&Assignment::new(*zx, *zy, *xy)).unwrap();
                assert!(!report.passed(), "real triple passed: {zx} {zy} {xy}");
                // The product of two real unbiased unitaries is a signed
                // permutation, never unbiased.
                let m = report.product.moduli();
                assert!(m.iter().flatten().all(|&v| v < 1e-12 || (v - 1.0).abs() < 1e-12));
            }
        }
    }
    assert_eq!(triples, 512);
}

#[test]
fn grid_four_witness_count_matches_naive_scan() {
    let grid = PhaseGrid::new(4).unwrap();
    let cands = enumerate_unbiased_unitaries(grid, Field::Complex);
    assert_eq!(cands.len(), 64);
    let mut naive = 0u64;
    for zx in &cands {
        for zy in &cands {
            for xy in &cands {
                let a = Assignment::new(zx.matrix, zy.matrix, xy.matrix);
                if check_consistency(&a).unwrap().passed() {
                    naive += 1;
                }
            }
        }
    }
    let v = search(&ConstraintSet::new(Field::Complex, 4).unwrap());
    assert_eq!(v.witness_count, naive);
    assert_eq!(naive, 32768);
}

#[test]
fn field_theorem_across_grids() {
    for g in [2, 4, 8] {
        let real = search(&ConstraintSet::new(Field::Real, g).unwrap());
        assert!(!real.feasible, "real g={g}");
        assert_eq!(real.candidates_per_slot, 8);
        assert!(real.violated.is_some());
        let complex = search(&ConstraintSet::new(Field::Complex, g).unwrap());
        assert_eq!(complex.feasible, g > 2, "complex g={g}");
        assert_eq!(complex.search_size, (complex.candidates_per_slot as u64).pow(2));
    }
}

#[test]
fn search_witnesses_are_sound() {
    for g in [4, 8] {
        let v = search(&ConstraintSet::new(Field::Complex, g).unwrap());
        let w = v.witness.expect("feasible");
        assert!(check_consistency(&w.assignment).unwrap().passed());
        for slot in sglab::prover::Slot::ALL {
            let m = w.assignment.slot(slot);
            assert!(m.unitarity_deviation() <= TOL && m.bias_deviation() <= TOL);
        }
        assert!(!w.non_real_slots.is_empty());
    }
}

proptest! {
    #[test]
    fn consistency_is_gauge_invariant(
        alpha in prop::array::uniform2(0.0..(2.0 * PI)),
        beta in prop::array::uniform2(0.0..(2.0 * PI)),
        gamma in prop::array::uniform2(0.0..(2.0 * PI)),
    ) {
        // Rephasing |z_j> by alpha, |x_i> by beta and |y_k> by gamma.
        let regauge = |a: &Assignment| {
            let mut zx = a.z_in_x;
            let mut zy = a.z_in_y;
            let mut xy = a.x_in_y;
            for j in 0..2 {
                zx = zx.with_column_phase(j, unit(alpha[j]));
                zy = zy.with_column_phase(j, unit(alpha[j]));
                zx = zx.with_row_phase(j, unit(-beta[j]));
                xy = xy.with_column_phase(j, unit(beta[j]));
                zy = zy.with_row_phase(j, unit(-gamma[j]));
                xy = xy.with_row_phase(j, unit(-gamma[j]));
            }
            Assignment::new(zx, zy, xy)
        };
        let good = regauge(&Assignment::conventional_complex());
        prop_assert!(check_consistency(&good).unwrap().passed());
        let bad = regauge(&Assignment::all_real());
        prop_assert!(!check_consistency(&bad).unwrap().passed());
        let alt = regauge(&Assignment::alternative_complex());
        prop_assert!(!check_consistency(&alt).unwrap().passed());
    }
}

/// Kets `|b_i>` in z coordinates from a matrix of `<b_i|z_j>`.
fn basis_from_rows(label: &str, m: &TransferMatrix) -> Basis {
    let e = m.entries();
    let ket = |i: usize| SpinKet::new(e[i][0].conj(), e[i][1].conj()).unwrap();
    Basis::new(label, ket(0), ket(1)).unwrap()
}

fn beam_split(state: SpinKet, basis: &Basis) -> (f64, f64) {
    let out = apply_apparatus(&[Beam::new(state, 1.0).unwrap()], &SternGerlach::from_basis(basis.clone()), Selection::KeepBoth);
    (out[0].intensity(), out[1].intensity())
}

#[test]
fn assignments_cross_validate_through_the_engine() {
    let witness = search(&ConstraintSet::new(Field::Complex, 8).unwrap()).witness.unwrap().assignment;
    for (name, a, consistent) in [
        ("conventional", Assignment::conventional_complex(), true),
        ("witness", witness, true),
        ("all-real", Assignment::all_real(), false),
    ] {
        let x = basis_from_rows("x", &a.z_in_x);
        let y_direct = basis_from_rows("y", &a.z_in_y);
        let y_composed = basis_from_rows("y'", &a.composition());
        let half = |p: (f64, f64)| (p.0 - 0.5).abs() <= 1e-12 && (p.1 - 0.5).abs() <= 1e-12;

        // Each slot on its own reproduces its experiment.
        assert!(half(beam_split(SpinKet::Z_PLUS, &x)), "{name}: experiment I");
        assert!(half(beam_split(SpinKet::Z_PLUS, &y_direct)), "{name}: experiment II");
        assert!(half(beam_split(*x.ket_plus(), &y_composed)), "{name}: experiment III");

        // The y basis implied by x_in_y must also give 50/50 on z+.
        let implied = beam_split(SpinKet::Z_PLUS, &y_composed);
        assert_eq!(half(implied), consistent, "{name}: implied y basis gives {implied:?}");
    }
}
