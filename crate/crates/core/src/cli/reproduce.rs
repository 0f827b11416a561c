//! Predefined experiment bundles: the unary-6 snapshot run and the family
//! matrix.

use std::io::Write;

use clap::ValueEnum;
use rayon::prelude::*;

use super::{report_line, Job, JobOutcome, ReproduceArgs, TargetOverride, EXIT_OK, EXIT_SEARCH_FAILED};
use crate::codec::{write_atomic, write_summary, TraceRecord};
use crate::compressor::{OrderStrategy, DEFAULT_BACKTRACKS};
use crate::error::{Error, Result};
use crate::evolution::EAParams;
use crate::families::{FamilyKind, FamilySpec};

/// Largest register in the matrix.
const MATRIX_MAX_N: usize = 8;
const DEFAULT_GENERATIONS: usize = 1000;
const EXTENDED_GENERATIONS: usize = 2000;

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Figure {
    /// Unary states on 6 qubits with per-generation support snapshots.
    Fig5,
    /// Success and gate counts across families and register sizes.
    Fig7,
}

/// The full family matrix in output order. Random-support cells use support
/// size n; their family seed is assigned per cell by the runner.
pub fn fig7_matrix(max_n: usize) -> Vec<FamilySpec> {
    let up_to = |lo: usize, hi: usize| lo..=hi.min(max_n);
    let mut cells = Vec::new();
    cells.extend(up_to(4, 8).map(FamilySpec::unary));
    cells.extend(up_to(4, 8).map(FamilySpec::ghz));
    cells.extend(up_to(4, 8).map(|n| FamilySpec::random_support(n, n, 0)));
    cells.extend(up_to(4, 6).map(FamilySpec::prime));
    cells.extend(up_to(4, 6).map(|n| FamilySpec::m_particle(n, 2)));
    cells.extend(up_to(4, 6).map(|n| FamilySpec::m_particle(n, 3)));
    cells
}

fn cell_generations(spec: &FamilySpec) -> usize {
    let hard = spec.m == Some(3) || (spec.kind == FamilyKind::Unary && spec.n_qubits >= 7);
    if hard {
        EXTENDED_GENERATIONS
    } else {
        DEFAULT_GENERATIONS
    }
}

pub(super) fn run(a: &ReproduceArgs, verbose: u8, out: &mut dyn Write) -> Result<i32> {
    match a.figure {
        Figure::Fig5 => fig5(a, verbose, out),
        Figure::Fig7 => fig7(a, verbose, out),
    }
}

fn base_params(a: &ReproduceArgs, generations: usize, seed: u64) -> EAParams {
    let mut p = EAParams {
        max_generations: a.max_gen.unwrap_or(generations),
        seed,
        ..EAParams::default()
    };
    if let Some(r) = a.restarts {
        p.restarts = r;
    }
    p
}

fn fig5(a: &ReproduceArgs, verbose: u8, out: &mut dyn Write) -> Result<i32> {
    let spec = FamilySpec::unary(6);
    let job = Job {
        label: spec.label(),
        n_qubits: 6,
        dir_name: String::new(),
        training: Some(spec.generate()?),
        target: TargetOverride::default(),
        params: EAParams {
            snapshots: true,
            ..base_params(a, DEFAULT_GENERATIONS, a.seed)
        },
        order: OrderStrategy::Fixed,
        backtracks: DEFAULT_BACKTRACKS,
    };
    if verbose > 0 {
        eprintln!("running unary n=6 seed={}", a.seed);
    }
    let outcome = job.run()?;
    job.write_artifacts(&a.out, &outcome)?;
    write_summary(&a.out.join("summary.csv"), &[job.summary_row(&outcome)])?;
    let JobOutcome::Done(r) = &outcome else {
        unreachable!("unary cells always run")
    };
    write_atomic(&a.out.join("support_dots.csv"), &support_dots(&r.trace)?)?;
    writeln!(out, "{}", report_line(&job, &outcome))?;
    writeln!(out, "artifacts in {}", a.out.display())?;
    Ok(if r.success { EXIT_OK } else { EXIT_SEARCH_FAILED })
}

/// Flattens trace snapshots to one CSV row per (record, state, element, qubit).
/// `step` numbers trace records in order.
fn support_dots(trace: &[TraceRecord]) -> Result<Vec<u8>> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    let csv_err = |e: csv::Error| Error::Artifact(e.to_string());
    w.write_record([
        "step",
        "stage",
        "restart",
        "generation",
        "state",
        "element",
        "qubit",
        "bit",
    ])
    .map_err(csv_err)?;
    for (step, rec) in trace.iter().enumerate() {
        let Some(snapshot) = &rec.support_snapshot else {
            continue;
        };
        let stage = rec.stage.map(|s| s.to_string()).unwrap_or_default();
        for (state, kets) in snapshot.iter().enumerate() {
            for (element, ket) in kets.iter().enumerate() {
                for (qubit, bit) in ket.chars().enumerate() {
                    w.write_record([
                        step.to_string(),
                        stage.clone(),
                        rec.restart.to_string(),
                        rec.generation.to_string(),
                        state.to_string(),
                        element.to_string(),
                        qubit.to_string(),
                        bit.to_string(),
                    ])
                    .map_err(csv_err)?;
                }
            }
        }
    }
    w.into_inner().map_err(|e| Error::Artifact(e.to_string()))
}

fn fig7(a: &ReproduceArgs, verbose: u8, out: &mut dyn Write) -> Result<i32> {
    if a.max_n < 4 || a.max_n > MATRIX_MAX_N {
        return Err(Error::Config(format!("--max-n must lie in 4..={MATRIX_MAX_N}")));
    }
    // Seeds follow the position in the full matrix, so a smaller --max-n
    // reruns the same cells with the same seeds.
    let jobs: Vec<Job> = fig7_matrix(MATRIX_MAX_N)
        .into_iter()
        .enumerate()
        .filter(|(_, s)| s.n_qubits <= a.max_n)
        .map(|(i, mut spec)| {
            let seed = a.seed.wrapping_add(i as u64);
            if spec.kind == FamilyKind::RandomSupport {
                spec.seed = seed;
            }
            let training = if spec.is_complement_equivalent() {
                None
            } else {
                Some(spec.generate()?)
            };
            Ok(Job {
                label: spec.label(),
                n_qubits: spec.n_qubits,
                dir_name: format!("{}_n{}", spec.label(), spec.n_qubits),
                training,
                target: TargetOverride::default(),
                params: base_params(a, cell_generations(&spec), seed),
                order: OrderStrategy::Fixed,
                backtracks: DEFAULT_BACKTRACKS,
            })
        })
        .collect::<Result<_>>()?;

    let outcomes: Vec<JobOutcome> = jobs
        .par_iter()
        .map(|job| {
            if verbose > 0 {
                eprintln!("cell {} n={} seed={}", job.label, job.n_qubits, job.params.seed);
            }
            job.run()
        })
        .collect::<Result<_>>()?;

    let cells = a.out.join("cells");
    let mut all_ok = true;
    let mut rows = Vec::new();
    for (job, outcome) in jobs.iter().zip(&outcomes) {
        job.write_artifacts(&cells.join(&job.dir_name), outcome)?;
        if let JobOutcome::Done(r) = outcome {
            all_ok &= r.success;
        }
        writeln!(out, "{}", report_line(job, outcome))?;
        rows.push(job.summary_row(outcome));
    }
    write_summary(&a.out.join("summary.csv"), &rows)?;
    writeln!(out, "artifacts in {}", a.out.display())?;
    Ok(if all_ok { EXIT_OK } else { EXIT_SEARCH_FAILED })
}
