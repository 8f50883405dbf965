//! Simulator and feasibility prover for tandem Stern-Gerlach experiments on
//! spin-½ particles.
//!
//! - [`spin`]: kets, inner products and basis expansion in z coordinates.
//! - [`apparatus`]: eigenbases and Born-rule splitting.
//! - [`engine`]: exact intensity propagation and seeded shot sampling.
//! - [`prover`]: search for amplitude assignments consistent with the three
//!   tandem experiments, over real or complex phase grids.
//! - [`dsl`]: the experiment script format.
//! - [`report`]: table and JSON output.

pub mod apparatus;
pub mod dsl;
pub mod engine;
pub mod prover;
pub mod report;
pub mod spin;

pub use apparatus::{eigenbasis, split, ApparatusError, Axis, SplitResult, SternGerlach};
pub use dsl::{parse_script, render_script, ParseError};
pub use engine::{
    apply_stage, run_pipeline, sample_shots, Beam, CountsReport, EngineError, ExperimentScript,
    RunReport, Selection, Source, Stage,
};
pub use prover::{
    check_consistency, search, verify_assignment, verify_paper_assignment, Assignment,
    ConsistencyVerdict, ConstraintSet, Field, ProverError, TransferMatrix,
};
pub use report::{render_report, Format, Report};
pub use spin::{
    basis_expand, equal_up_to_global_phase, inner_product, make_ket, Basis, ComplexAmplitude,
    Sign, SpinError, SpinKet,
};
