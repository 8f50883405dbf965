mod common;

use proptest::prelude::*;

use common::{c, FAULTY_SCRIPTS, VALID_SCRIPTS};
use sglab::apparatus::Axis;
use sglab::engine::{ExperimentScript, Selection, Source, Stage};
use sglab::spin::{make_ket, Sign};
use sglab::{parse_script, render_script};

#[test]
fn corpus_round_trips() {
    for (i, text) in VALID_SCRIPTS.iter().enumerate() {
        let parsed = parse_script(text).unwrap_or_else(|e| panic!("script {i}: {e}"));
        let rendered = render_script(&parsed);
        let again = parse_script(&rendered).unwrap_or_else(|e| panic!("script {i} rendered as {rendered:?}: {e}"));
        assert_eq!(parsed, again, "script {i}");
        // Rendering is a fixed point after one pass.
        assert_eq!(rendered, render_script(&again), "script {i}");
    }
}

#[test]
fn faults_report_their_line() {
    for (text, line) in FAULTY_SCRIPTS {
        let err = parse_script(text).expect_err(text);
        assert_eq!(err.line, line, "{text:?}: {err}");
        assert!(err.column >= 1);
        assert!(err.to_string().starts_with(&format!("line {line}, column ")));
    }
}

#[test]
fn missing_sections_are_reported() {
    for text in ["", "# only a comment\n", "source unpolarized", "source unpolarized\nsg x"] {
        assert!(parse_script(text).is_err(), "{text:?}");
    }
    let err = parse_script("source unpolarized\n\nsg x\n").unwrap_err();
    assert_eq!(err.line, 3);
}

#[test]
fn shots_and_seed_are_carried() {
    let s = parse_script(VALID_SCRIPTS[1]).unwrap();
    assert_eq!((s.shots, s.seed), (Some(100_000), Some(42)));
    let s = parse_script(VALID_SCRIPTS[13]).unwrap();
    assert_eq!((s.shots, s.seed), (Some(1), Some(u64::MAX)));
    let s = parse_script(VALID_SCRIPTS[0]).unwrap();
    assert_eq!((s.shots, s.seed), (None, None));
}

fn axis_strategy() -> impl Strategy<Value = Axis> {
    prop_oneof![
        Just(Axis::X),
        Just(Axis::Y),
        Just(Axis::Z),
        (0.0..=std::f64::consts::PI, 0.0..(2.0 * std::f64::consts::PI))
            .prop_map(|(t, p)| Axis::polar(t, p).unwrap()),
    ]
}

fn source_strategy() -> impl Strategy<Value = Source> {
    let sign = prop_oneof![Just(Sign::Plus), Just(Sign::Minus)];
    prop_oneof![
        Just(Source::Unpolarized),
        (axis_strategy(), sign).prop_map(|(axis, sign)| Source::Eigenstate { axis, sign }),
        (-5.0..5.0f64, -5.0..5.0f64, -5.0..5.0f64, -5.0..5.0f64)
            .prop_filter("nonzero", |(a, b, x, y)| a.abs() + b.abs() + x.abs() + y.abs() > 1e-3)
            .prop_map(|(a, b, x, y)| Source::Pure(make_ket(c(a, b), c(x, y)).unwrap())),
    ]
}

fn script_strategy() -> impl Strategy<Value = ExperimentScript> {
    let selection = prop_oneof![
        Just(Selection::KeepPlus),
        Just(Selection::KeepMinus),
        Just(Selection::KeepBoth),
    ];
    let stage = (axis_strategy(), selection).prop_map(|(a, s)| Stage::new(a, s));
    let sampling = prop_oneof![
        Just((None, None)),
        (1u64..u64::MAX).prop_map(|n| (Some(n), None)),
        (1u64..u64::MAX, any::<u64>()).prop_map(|(n, s)| (Some(n), Some(s))),
    ];
    (source_strategy(), prop::collection::vec(stage, 1..8), sampling).prop_map(
        |(source, stages, (shots, seed))| {
            let mut s = ExperimentScript::new(source, stages);
            s.shots = shots;
            s.seed = seed;
            s
        },
    )
}

proptest! {
    #[test]
    fn render_then_parse_is_identity(script in script_strategy()) {
        let text = render_script(&script);
        let parsed = parse_script(&text).map_err(|e| TestCaseError::fail(format!("{text}\n{e}")))?;
        prop_assert_eq!(parsed, script);
    }

    #[test]
    fn parser_never_panics(text in "[a-z0-9 +\\-().,#*/\n]{0,80}") {
        let _ = parse_script(&text);
    }
}
