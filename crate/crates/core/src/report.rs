//! Table and JSON rendering of run, sampling and prover results.
//!
//! JSON keys appear in a fixed order and numbers use the shortest
//! round-trip representation, so identical reports render to identical
//! bytes.

use std::fmt::Write as _;

use num_complex::Complex64;
use serde::Serialize;

use crate::engine::{CountsReport, RunReport};
use crate::prover::{AssignmentCheck, ConsistencyVerdict, Slot};
use crate::spin::{Sign, SpinKet};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Table,
    Json,
}

impl std::str::FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "table" => Ok(Format::Table),
            "json" => Ok(Format::Json),
            other => Err(format!("unknown format '{other}'; expected table or json")),
        }
    }
}

/// Anything that can be printed as a report.
pub trait Report {
    fn to_table(&self) -> String;
    fn to_json(&self) -> String;
}

/// Renders `report` in the requested format, newline-terminated.
pub fn render_report(report: &impl Report, format: Format) -> String {
    let mut s = match format {
        Format::Table => report.to_table(),
        Format::Json => report.to_json(),
    };
    if !s.ends_with('\n') {
        s.push('\n');
    }
    s
}

fn to_json(value: &impl Serialize) -> String {
    serde_json::to_string_pretty(value).expect("report values serialize")
}

fn fmt_complex(z: Complex64) -> String {
    format!("{:.6}{:+.6}i", z.re, z.im)
}

fn fmt_state(k: &SpinKet) -> String {
    format!("{} ; {}", fmt_complex(k.plus()), fmt_complex(k.minus()))
}

#[derive(Serialize)]
struct BranchJson {
    sign: &'static str,
    intensity: f64,
    state: [f64; 4],
}

#[derive(Serialize)]
struct StageJson {
    axis: String,
    selection: &'static str,
    branches: Vec<BranchJson>,
}

#[derive(Serialize)]
struct DetectorJson {
    plus: f64,
    minus: f64,
}

#[derive(Serialize)]
struct RunJson {
    stages: Vec<StageJson>,
    detector: DetectorJson,
}

impl Report for RunReport {
    fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<5}  {:<28}  {:<6}  {:<4}  {:>10}  state (z+ ; z-)",
            "stage", "axis", "select", "port", "intensity"
        );
        for (i, stage) in self.stages.iter().enumerate() {
            for b in &stage.branches {
                let (idx, axis, sel) = if b.sign == Sign::Plus {
                    (
                        (i + 1).to_string(),
                        stage.axis.to_string(),
                        stage.selection.name(),
                    )
                } else {
                    (String::new(), String::new(), "")
                };
                let port = format!("{}{}", b.sign, if b.kept { "" } else { "x" });
                let _ = writeln!(
                    out,
                    "{:<5}  {:<28}  {:<6}  {:<4}  {:>10.6}  {}",
                    idx,
                    axis,
                    sel,
                    port,
                    b.intensity,
                    fmt_state(&b.state)
                );
            }
        }
        let _ = writeln!(
            out,
            "detector  +: {:.6}  -: {:.6}",
            self.detector.plus, self.detector.minus
        );
        out
    }

    fn to_json(&self) -> String {
        let view = RunJson {
            stages: self
                .stages
                .iter()
                .map(|s| StageJson {
                    axis: s.axis.to_string(),
                    selection: s.selection.name(),
                    branches: s
                        .branches
                        .iter()
                        .map(|b| BranchJson {
                            sign: b.sign.symbol(),
                            intensity: b.intensity,
                            state: b.state.to_array(),
                        })
                        .collect(),
                })
                .collect(),
            detector: DetectorJson {
                plus: self.detector.plus,
                minus: self.detector.minus,
            },
        };
        to_json(&view)
    }
}

#[derive(Serialize)]
struct CountsDetectorJson {
    plus: u64,
    minus: u64,
}

#[derive(Serialize)]
struct CountsJson<'a> {
    shots: u64,
    seed: u64,
    detector: CountsDetectorJson,
    absorbed: &'a [u64],
}

impl Report for CountsReport {
    fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "shots     {}", self.shots);
        let _ = writeln!(out, "seed      {}", self.seed);
        for (i, a) in self.absorbed.iter().enumerate() {
            let _ = writeln!(out, "stage {:<3} absorbed {a}", i + 1);
        }
        for sign in Sign::BOTH {
            let _ = writeln!(
                out,
                "detector {}  {:>10}  {:.6}",
                sign,
                self.count(sign),
                self.fraction(sign)
            );
        }
        out
    }

    fn to_json(&self) -> String {
        to_json(&CountsJson {
            shots: self.shots,
            seed: self.seed,
            detector: CountsDetectorJson {
                plus: self.plus,
                minus: self.minus,
            },
            absorbed: &self.absorbed,
        })
    }
}

#[derive(Serialize)]
struct SlotJson {
    slot: &'static str,
    experiment: &'static str,
    /// Entry phases as multiples of pi/4; every modulus is 1/sqrt(2).
    phases_pi_over_4: [[u32; 2]; 2],
    real: bool,
}

#[derive(Serialize)]
struct WitnessJson {
    indices: [usize; 3],
    non_real_slots: Vec<&'static str>,
    slots: Vec<SlotJson>,
}

#[derive(Serialize)]
struct VerdictJson<'a> {
    field: &'static str,
    grid: u32,
    feasible: bool,
    search_size: u64,
    candidates_per_slot: usize,
    witness_count: u64,
    biased_compositions: u64,
    off_grid_compositions: u64,
    violated: Option<&'a str>,
    witness: Option<WitnessJson>,
}

fn phase_label(n: u32) -> String {
    match n % 8 {
        0 => "0".to_owned(),
        2 => "pi/2".to_owned(),
        4 => "pi".to_owned(),
        6 => "3pi/2".to_owned(),
        1 => "pi/4".to_owned(),
        k => format!("{k}pi/4"),
    }
}

impl Report for ConsistencyVerdict {
    fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "field          {}", self.field.name());
        let _ = writeln!(out, "grid           {}", self.grid);
        let _ = writeln!(out, "feasible       {}", self.feasible);
        let _ = writeln!(
            out,
            "search size    {} (z_in_x, x_in_y) pairs, {} candidates per slot",
            self.search_size, self.candidates_per_slot
        );
        let _ = writeln!(out, "witnesses      {}", self.witness_count);
        let _ = writeln!(out, "biased comps   {}", self.biased_compositions);
        let _ = writeln!(out, "off-grid comps {}", self.off_grid_compositions);
        if let Some(v) = &self.violated {
            let _ = writeln!(out, "violated       {v}");
        }
        if let Some(w) = &self.witness {
            let names: Vec<_> = w.non_real_slots.iter().map(|s| s.name()).collect();
            let _ = writeln!(
                out,
                "witness        non-real slots: {}",
                if names.is_empty() { "none".to_owned() } else { names.join(", ") }
            );
            for (slot, e) in Slot::ALL.iter().zip(&w.eighths) {
                let _ = writeln!(
                    out,
                    "  {:<7} (experiment {:<3})  1/sqrt2 * [[e^(i{}), e^(i{})], [e^(i{}), e^(i{})]]",
                    slot.name(),
                    slot.experiment(),
                    phase_label(e[0][0]),
                    phase_label(e[0][1]),
                    phase_label(e[1][0]),
                    phase_label(e[1][1]),
                );
            }
        }
        out
    }

    fn to_json(&self) -> String {
        let witness = self.witness.as_ref().map(|w| WitnessJson {
            indices: w.indices,
            non_real_slots: w.non_real_slots.iter().map(|s| s.name()).collect(),
            slots: Slot::ALL
                .iter()
                .zip(&w.eighths)
                .map(|(slot, e)| SlotJson {
                    slot: slot.name(),
                    experiment: slot.experiment(),
                    phases_pi_over_4: *e,
                    real: e.iter().flatten().all(|n| n % 4 == 0),
                })
                .collect(),
        });
        to_json(&VerdictJson {
            field: self.field.name(),
            grid: self.grid,
            feasible: self.feasible,
            search_size: self.search_size,
            candidates_per_slot: self.candidates_per_slot,
            witness_count: self.witness_count,
            biased_compositions: self.biased_compositions,
            off_grid_compositions: self.off_grid_compositions,
            violated: self.violated.as_deref(),
            witness,
        })
    }
}

#[derive(Serialize)]
struct CheckJson {
    passed: bool,
    unitary: bool,
    unbiased: bool,
    composition_consistent: Option<bool>,
    unitarity_deviation: [f64; 3],
    bias_deviation: [f64; 3],
    violations: Vec<String>,
}

impl Report for AssignmentCheck {
    fn to_table(&self) -> String {
        let mut out = String::new();
        for (i, slot) in Slot::ALL.iter().enumerate() {
            let _ = writeln!(
                out,
                "{:<7} |M†M-I| = {:.3e}  max ||m|-1/sqrt2| = {:.3e}",
                slot.name(),
                self.unitarity_deviation[i],
                self.bias_deviation[i]
            );
        }
        match &self.consistency {
            None => {
                let _ = writeln!(out, "composition not checked: assignment is not unitary");
            }
            Some(c) => {
                let _ = writeln!(out, "composition deviation {:.3e}", c.composition_deviation);
                for v in &c.violations {
                    let _ = writeln!(out, "violation: {v}");
                }
            }
        }
        let _ = writeln!(out, "{}", if self.passed() { "PASS" } else { "FAIL" });
        out
    }

    fn to_json(&self) -> String {
        to_json(&CheckJson {
            passed: self.passed(),
            unitary: self.unitary(),
            unbiased: self.unbiased(),
            composition_consistent: self
                .consistency
                .as_ref()
                .map(|c| c.composition_deviation <= crate::prover::CHECK_TOL),
            unitarity_deviation: self.unitarity_deviation,
            bias_deviation: self.bias_deviation,
            violations: self
                .consistency
                .iter()
                .flat_map(|c| c.violations.iter().map(|v| v.to_string()))
                .collect(),
        })
    }
}
