//! Propagates beams through chains of apparatuses.
//!
//! Two modes share one script type and never mix in one report:
//! [`run_pipeline`] tracks relative intensities exactly, while
//! [`sample_shots`] draws individual particles from a seeded generator.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::apparatus::{eigenbasis, split, Axis, SternGerlach};
use crate::spin::{Sign, SpinKet};

/// Shots simulated per generator substream.
const SHOTS_PER_STREAM: u64 = 1 << 16;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EngineError {
    #[error("experiment has no apparatus stages")]
    EmptyPipeline,
    #[error("shot count must be at least 1")]
    InvalidShots,
    #[error("beam intensity {0} is negative or not finite")]
    InvalidIntensity(f64),
}

/// A collapsed state carrying a relative intensity (source = 1.0).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Beam {
    state: SpinKet,
    intensity: f64,
}

impl Beam {
    pub fn new(state: SpinKet, intensity: f64) -> Result<Self, EngineError> {
        if !intensity.is_finite() || intensity < 0.0 {
            return Err(EngineError::InvalidIntensity(intensity));
        }
        Ok(Beam { state, intensity })
    }

    pub fn state(&self) -> &SpinKet {
        &self.state
    }

    pub fn intensity(&self) -> f64 {
        self.intensity
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Source {
    /// Equal-weight mixture of `|z+⟩` and `|z−⟩`.
    Unpolarized,
    /// Eigenstate of an apparatus orientation, e.g. `|x+⟩`.
    Eigenstate { axis: Axis, sign: Sign },
    /// Arbitrary pure state.
    Pure(SpinKet),
}

impl Source {
    /// Pure components of the source with their statistical weights.
    pub fn components(&self) -> Vec<(f64, SpinKet)> {
        match self {
            Source::Unpolarized => vec![(0.5, SpinKet::Z_PLUS), (0.5, SpinKet::Z_MINUS)],
            Source::Eigenstate { axis, sign } => vec![(1.0, *eigenbasis(axis).ket(*sign))],
            Source::Pure(k) => vec![(1.0, *k)],
        }
    }
}

/// Which output ports of an apparatus are passed on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Selection {
    KeepPlus,
    KeepMinus,
    KeepBoth,
}

impl Selection {
    pub fn keeps(self, sign: Sign) -> bool {
        matches!(
            (self, sign),
            (Selection::KeepBoth, _)
                | (Selection::KeepPlus, Sign::Plus)
                | (Selection::KeepMinus, Sign::Minus)
        )
    }

    pub fn name(self) -> &'static str {
        match self {
            Selection::KeepPlus => "+",
            Selection::KeepMinus => "-",
            Selection::KeepBoth => "both",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stage {
    pub axis: Axis,
    pub selection: Selection,
}

impl Stage {
    pub fn new(axis: Axis, selection: Selection) -> Self {
        Stage { axis, selection }
    }
}

/// A parsed experiment: source, ordered stages, optional sampling request.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentScript {
    pub source: Source,
    pub stages: Vec<Stage>,
    pub shots: Option<u64>,
    pub seed: Option<u64>,
}

impl ExperimentScript {
    pub fn new(source: Source, stages: Vec<Stage>) -> Self {
        ExperimentScript {
            source,
            stages,
            shots: None,
            seed: None,
        }
    }
}

/// Sends every beam through the apparatus and keeps the selected branches.
///
/// Each input beam yields its own branch beams (zero-intensity branches
/// included), in input order, plus before minus. Beams are never merged
/// here.
pub fn apply_stage(beams: &[Beam], stage: &Stage) -> Vec<Beam> {
    apply_apparatus(beams, &SternGerlach::new(stage.axis), stage.selection)
}

/// [`apply_stage`] for an apparatus given directly.
pub fn apply_apparatus(beams: &[Beam], sg: &SternGerlach, selection: Selection) -> Vec<Beam> {
    let mut out = Vec::with_capacity(beams.len() * 2);
    for beam in beams {
        let s = split(&beam.state, sg);
        for sign in Sign::BOTH {
            if selection.keeps(sign) {
                out.push(Beam {
                    state: *s.output(sign),
                    intensity: beam.intensity * s.probability(sign),
                });
            }
        }
    }
    out
}

/// One output port of one stage.
#[derive(Debug, Clone, PartialEq)]
pub struct BranchRecord {
    pub sign: Sign,
    /// Intensity emerging from this port, before any blocking.
    pub intensity: f64,
    pub state: SpinKet,
    pub kept: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StageRecord {
    pub axis: Axis,
    pub selection: Selection,
    pub incoming: f64,
    pub branches: [BranchRecord; 2],
}

impl StageRecord {
    pub fn branch(&self, sign: Sign) -> &BranchRecord {
        &self.branches[sign.index()]
    }

    pub fn emitted(&self) -> f64 {
        self.branches.iter().map(|b| b.intensity).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorIntensities {
    pub plus: f64,
    pub minus: f64,
}

impl DetectorIntensities {
    pub fn get(&self, sign: Sign) -> f64 {
        match sign {
            Sign::Plus => self.plus,
            Sign::Minus => self.minus,
        }
    }

    pub fn total(&self) -> f64 {
        self.plus + self.minus
    }
}

/// Exact-mode result of a pipeline run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub stages: Vec<StageRecord>,
    /// Intensities leaving the last stage through its kept ports.
    pub detector: DetectorIntensities,
}

/// Computes exact branch intensities for every stage.
///
/// An unpolarized source is the average of the `|z+⟩` and `|z−⟩` runs.
/// Branches leaving the same port of a stage share one collapsed state, so
/// they are summed into a single beam before the next stage.
pub fn run_pipeline(script: &ExperimentScript) -> Result<RunReport, EngineError> {
    if script.stages.is_empty() {
        return Err(EngineError::EmptyPipeline);
    }
    let mut beams: Vec<Beam> = script
        .source
        .components()
        .into_iter()
        .map(|(w, k)| Beam {
            state: k,
            intensity: w,
        })
        .collect();

    let mut records = Vec::with_capacity(script.stages.len());
    for stage in &script.stages {
        let sg = SternGerlach::new(stage.axis);
        let incoming: f64 = beams.iter().map(|b| b.intensity).sum();
        // apply_apparatus emits plus, minus for each parent in turn
        let emitted = apply_apparatus(&beams, &sg, Selection::KeepBoth);
        let mut port = [0.0_f64; 2];
        for (i, b) in emitted.iter().enumerate() {
            port[i % 2] += b.intensity;
        }
        let branches = Sign::BOTH.map(|sign| BranchRecord {
            sign,
            intensity: port[sign.index()],
            state: *sg.basis().ket(sign),
            kept: stage.selection.keeps(sign),
        });
        beams = branches
            .iter()
            .filter(|b| b.kept)
            .map(|b| Beam {
                state: b.state,
                intensity: b.intensity,
            })
            .collect();
        records.push(StageRecord {
            axis: stage.axis,
            selection: stage.selection,
            incoming,
            branches,
        });
    }

    let last = records.last().expect("at least one stage");
    let kept = |s: Sign| {
        let b = last.branch(s);
        if b.kept {
            b.intensity
        } else {
            0.0
        }
    };
    let detector = DetectorIntensities {
        plus: kept(Sign::Plus),
        minus: kept(Sign::Minus),
    };
    Ok(RunReport {
        stages: records,
        detector,
    })
}

/// Sampled-mode result: particle counts per detector bin.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountsReport {
    pub shots: u64,
    pub seed: u64,
    pub plus: u64,
    pub minus: u64,
    /// Particles stopped by the selection of each stage.
    pub absorbed: Vec<u64>,
}

impl CountsReport {
    pub fn detected(&self) -> u64 {
        self.plus + self.minus
    }

    pub fn count(&self, sign: Sign) -> u64 {
        match sign {
            Sign::Plus => self.plus,
            Sign::Minus => self.minus,
        }
    }

    /// Fraction of all shots landing in `sign`.
    pub fn fraction(&self, sign: Sign) -> f64 {
        self.count(sign) as f64 / self.shots as f64
    }

    /// Fraction of detected particles landing in `sign`; `None` if every
    /// particle was absorbed.
    pub fn surviving_fraction(&self, sign: Sign) -> Option<f64> {
        let d = self.detected();
        (d > 0).then(|| self.count(sign) as f64 / d as f64)
    }
}

/// Per-stage branch probabilities, indexed by the particle's incoming
/// state: at stage 0 that is the source component, afterwards the port it
/// left the previous stage through.
struct TransitionTable {
    source_weights: Vec<f64>,
    p_plus: Vec<Vec<f64>>,
    selections: Vec<Selection>,
}

impl TransitionTable {
    fn build(script: &ExperimentScript) -> Self {
        let components = script.source.components();
        let mut incoming: Vec<SpinKet> = components.iter().map(|(_, k)| *k).collect();
        let mut p_plus = Vec::with_capacity(script.stages.len());
        for stage in &script.stages {
            let sg = SternGerlach::new(stage.axis);
            p_plus.push(
                incoming
                    .iter()
                    .map(|k| split(k, &sg).p_plus.clamp(0.0, 1.0))
                    .collect(),
            );
            incoming = vec![*sg.basis().ket_plus(), *sg.basis().ket_minus()];
        }
        TransitionTable {
            source_weights: components.iter().map(|(w, _)| *w).collect(),
            p_plus,
            selections: script.stages.iter().map(|s| s.selection).collect(),
        }
    }

    fn simulate(&self, shots: u64, rng: &mut ChaCha8Rng, counts: &mut [u64], absorbed: &mut [u64]) {
        'particle: for _ in 0..shots {
            let mut state = if self.source_weights.len() > 1 {
                usize::from(!rng.random_bool(self.source_weights[0]))
            } else {
                0
            };
            for (i, sel) in self.selections.iter().enumerate() {
                let sign = if rng.random::<f64>() < self.p_plus[i][state] {
                    Sign::Plus
                } else {
                    Sign::Minus
                };
                if !sel.keeps(sign) {
                    absorbed[i] += 1;
                    continue 'particle;
                }
                state = sign.index();
            }
            counts[state] += 1;
        }
    }
}

/// Simulates `shots` individual particles through the script.
///
/// Shots are divided into fixed-size blocks; block `j` draws from
/// ChaCha8 stream `j` of `seed`, so counts depend only on
/// `(script, shots, seed)` and not on thread scheduling.
pub fn sample_shots(
    script: &ExperimentScript,
    shots: u64,
    seed: u64,
) -> Result<CountsReport, EngineError> {
    if script.stages.is_empty() {
        return Err(EngineError::EmptyPipeline);
    }
    if shots == 0 {
        return Err(EngineError::InvalidShots);
    }
    let table = TransitionTable::build(script);
    let n_stages = script.stages.len();
    let blocks = shots.div_ceil(SHOTS_PER_STREAM);

    let partials: Vec<([u64; 2], Vec<u64>)> = (0..blocks)
        .into_par_iter()
        .map(|block| {
            let start = block * SHOTS_PER_STREAM;
            let n = SHOTS_PER_STREAM.min(shots - start);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(block);
            let mut counts = [0u64; 2];
            let mut absorbed = vec![0u64; n_stages];
            table.simulate(n, &mut rng, &mut counts, &mut absorbed);
            (counts, absorbed)
        })
        .collect();

    let mut report = CountsReport {
        shots,
        seed,
        plus: 0,
        minus: 0,
        absorbed: vec![0; n_stages],
    };
    for (counts, absorbed) in partials {
        report.plus += counts[0];
        report.minus += counts[1];
        for (acc, a) in report.absorbed.iter_mut().zip(absorbed) {
            *acc += a;
        }
    }
    Ok(report)
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SG_{} [{}]", self.axis, self.selection.name())
    }
}
