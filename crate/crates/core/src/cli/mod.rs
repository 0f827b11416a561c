//! Command-line front end. [`run`] parses arguments, dispatches and maps the
//! outcome to an exit code, so tests can drive it without spawning a process.

mod config;
mod reproduce;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::circuit::Circuit;
use crate::codec::{
    read_circuit, read_training, write_circuit, write_summary, write_trace, write_training, SummaryRow,
};
use crate::compressor::{compress, row_outcome, verify, CompressionPlan, CompressionResult, OrderStrategy};
use crate::error::{Error, Result};
use crate::evolution::EAParams;
use crate::families::{default_target, explicit_target, CompressionTarget, FamilyKind, FamilySpec};
use crate::sim::{apply_circuit, permutation_table, TrainingSet, MAX_TABLE_QUBITS};
use crate::state::{ket_string, BasisState, SparseState};

pub use config::{RunConfig, TargetOverride, SCHEMA_VERSION, SEED_ENV};
pub use reproduce::{fig7_matrix, Figure};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_INVALID_INPUT: i32 = 2;
pub const EXIT_SEARCH_FAILED: i32 = 3;

const DEFAULT_OUT: &str = "revcomp-out";

#[derive(Parser, Debug)]
#[command(
    name = "revcomp",
    version,
    about = "Evolve reversible circuits that compress families of quantum states"
)]
pub struct Cli {
    /// Progress on stderr; repeat for more detail.
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Generate a training set, write it as JSON and list its support.
    Gen(GenArgs),
    /// Search for a compression circuit and write circuit, trace and summary.
    Compress(CompressArgs),
    /// Check a circuit against a training set.
    Verify(VerifyArgs),
    /// Apply a circuit to states and print the output support.
    Simulate(SimulateArgs),
    /// Run a predefined experiment bundle.
    Reproduce(ReproduceArgs),
}

#[derive(Args, Debug, Default, Clone)]
pub struct FamilyArgs {
    /// unary, ghz, prime, m_particle or random_support.
    #[arg(long)]
    pub family: Option<FamilyKind>,
    #[arg(long = "n")]
    pub n: Option<usize>,
    /// Particle count for m_particle.
    #[arg(long)]
    pub m: Option<usize>,
    /// Support size for random_support (default n).
    #[arg(long)]
    pub support_size: Option<usize>,
}

impl FamilyArgs {
    fn spec(&self, seed: u64) -> Result<Option<FamilySpec>> {
        let Some(kind) = self.family else {
            if self.n.is_some() || self.m.is_some() || self.support_size.is_some() {
                return Err(Error::Config("--n, --m and --support-size need --family".into()));
            }
            return Ok(None);
        };
        let n = self.n.ok_or_else(|| Error::Config("--family needs --n".into()))?;
        let spec = FamilySpec {
            kind,
            n_qubits: n,
            m: self.m,
            support_size: self.support_size,
            seed,
        };
        spec.validate()?;
        Ok(Some(spec))
    }
}

#[derive(Args, Debug, Default, Clone)]
pub struct TargetArgs {
    /// Number of leading qubits to clear (default: the most the support allows).
    #[arg(long, conflicts_with = "trash_qubits")]
    pub trash: Option<usize>,
    /// Explicit trash qubits, comma separated, cleared in the given order.
    #[arg(long, value_delimiter = ',')]
    pub trash_qubits: Option<Vec<usize>>,
}

impl TargetArgs {
    fn merge(&self, base: &TargetOverride) -> TargetOverride {
        if self.trash.is_some() || self.trash_qubits.is_some() {
            TargetOverride {
                trash: self.trash,
                trash_qubits: self.trash_qubits.clone(),
            }
        } else {
            base.clone()
        }
    }
}

fn resolve_target(training: &TrainingSet, t: &TargetOverride) -> Result<CompressionTarget> {
    match &t.trash_qubits {
        Some(q) => explicit_target(training, q.clone()),
        None => default_target(training, t.trash),
    }
}

#[derive(Args, Debug, Default, Clone)]
pub struct SearchArgs {
    /// Population size.
    #[arg(long)]
    pub pop: Option<usize>,
    /// Parents kept each generation.
    #[arg(long)]
    pub parents: Option<usize>,
    /// Children bred each generation.
    #[arg(long)]
    pub children: Option<usize>,
    /// Generation budget per run.
    #[arg(long)]
    pub max_gen: Option<usize>,
    /// Extra runs after a failed first run.
    #[arg(long)]
    pub restarts: Option<usize>,
    /// Fitness penalty per gate.
    #[arg(long)]
    pub penalty: Option<f64>,
    /// Master seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Record the best candidate's support in every trace line.
    #[arg(long)]
    pub snapshots: bool,
    /// Keep solved circuits as found instead of removing redundant gates.
    #[arg(long)]
    pub no_prune: bool,
}

impl SearchArgs {
    fn apply(&self, p: &mut EAParams) {
        if let Some(v) = self.pop {
            p.population_size = v;
        }
        if let Some(v) = self.parents {
            p.parent_count = v;
        }
        if let Some(v) = self.children {
            p.children = v;
        }
        if let Some(v) = self.max_gen {
            p.max_generations = v;
        }
        if let Some(v) = self.restarts {
            p.restarts = v;
        }
        if let Some(v) = self.penalty {
            p.length_penalty = v;
        }
        if self.snapshots {
            p.snapshots = true;
        }
        if self.no_prune {
            p.prune = false;
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum OrderArg {
    Fixed,
    Greedy,
}

impl From<OrderArg> for OrderStrategy {
    fn from(o: OrderArg) -> Self {
        match o {
            OrderArg::Fixed => OrderStrategy::Fixed,
            OrderArg::Greedy => OrderStrategy::Greedy,
        }
    }
}

#[derive(Args, Debug)]
pub struct GenArgs {
    #[command(flatten)]
    pub family: FamilyArgs,
    /// Seed for random_support.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output file (default: <family>_n<n>.json).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct CompressArgs {
    /// TOML run configuration. Flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub family: FamilyArgs,
    /// Training set JSON to compress instead of a family.
    #[arg(long, conflicts_with = "family")]
    pub training: Option<PathBuf>,
    /// Seed for random_support (default: the master seed).
    #[arg(long)]
    pub family_seed: Option<u64>,
    #[command(flatten)]
    pub target: TargetArgs,
    #[command(flatten)]
    pub search: SearchArgs,
    #[arg(long, value_enum)]
    pub order: Option<OrderArg>,
    /// Times a failed stage may redo the stage before it.
    #[arg(long)]
    pub backtracks: Option<usize>,
    /// Independent runs per family, seeded master, master+1, …; random_support
    /// families also draw a new support per run.
    #[arg(long)]
    pub repetitions: Option<usize>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// Circuit file (.rvc).
    #[arg(long)]
    pub circuit: PathBuf,
    #[command(flatten)]
    pub family: FamilyArgs,
    /// Training set JSON instead of a family.
    #[arg(long, conflicts_with = "family")]
    pub training: Option<PathBuf>,
    /// Seed for random_support.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub target: TargetArgs,
    /// Require the dense permutation-table check and print the table.
    #[arg(long)]
    pub oracle: bool,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    /// Circuit file (.rvc).
    #[arg(long)]
    pub circuit: PathBuf,
    /// Basis state input such as 0110; repeatable.
    #[arg(long)]
    pub ket: Vec<String>,
    #[command(flatten)]
    pub family: FamilyArgs,
    /// Training set JSON.
    #[arg(long, conflicts_with = "family")]
    pub training: Option<PathBuf>,
    /// Seed for random_support.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Args, Debug)]
pub struct ReproduceArgs {
    #[arg(value_enum)]
    pub figure: Figure,
    #[arg(long, default_value = DEFAULT_OUT)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Largest register size in the matrix.
    #[arg(long, default_value_t = 6)]
    pub max_n: usize,
    /// Generation budget for every cell, overriding the per-cell defaults.
    #[arg(long)]
    pub max_gen: Option<usize>,
    #[arg(long)]
    pub restarts: Option<usize>,
}

/// Parses `args` (including the program name) and runs the command. Normal
/// output goes to `out`, progress and errors to stderr.
pub fn run<I, T>(args: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    EXIT_OK
                }
                _ => {
                    let _ = e.print();
                    EXIT_INVALID_INPUT
                }
            };
        }
    };
    match dispatch(&cli, out) {
        Ok(code) => code,
        // The reader went away, as with `revcomp … | head`.
        Err(Error::Io(e)) if e.kind() == std::io::ErrorKind::BrokenPipe => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_INVALID_INPUT
        }
    }
}

fn dispatch(cli: &Cli, out: &mut dyn Write) -> Result<i32> {
    let v = cli.verbose;
    match &cli.command {
        Command::Gen(a) => cmd_gen(a, out),
        Command::Compress(a) => cmd_compress(a, v, out),
        Command::Verify(a) => cmd_verify(a, out),
        Command::Simulate(a) => cmd_simulate(a, out),
        Command::Reproduce(a) => reproduce::run(a, v, out),
    }
}

fn cmd_gen(a: &GenArgs, out: &mut dyn Write) -> Result<i32> {
    let spec = a
        .family
        .spec(a.seed)?
        .ok_or_else(|| Error::Config("gen needs --family and --n".into()))?;
    let training = spec.generate()?;
    let n = training.n_qubits();
    let path = a
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from(format!("{}_n{}.json", spec.label(), n)));
    write_training(&path, &training)?;

    let support = training.union_support();
    let states = if training.len() == 1 { "state" } else { "states" };
    writeln!(
        out,
        "{spec}: {} training {states}, support size {}",
        training.len(),
        support.len()
    )?;
    for b in &support {
        writeln!(out, "  {:>6}  |{}⟩", b, ket_string(*b, n))?;
    }
    writeln!(out, "wrote {}", path.display())?;
    Ok(EXIT_OK)
}

/// One compression job: a training set with a name and its settings.
#[derive(Clone, Debug)]
pub(crate) struct Job {
    pub label: String,
    pub n_qubits: usize,
    pub dir_name: String,
    pub training: Option<TrainingSet>,
    pub target: TargetOverride,
    pub params: EAParams,
    pub order: OrderStrategy,
    pub backtracks: usize,
}

pub(crate) enum JobOutcome {
    /// Complement-equivalent cell; nothing ran.
    Skipped,
    Done(Box<CompressionResult>),
}

impl Job {
    pub fn run(&self) -> Result<JobOutcome> {
        let Some(training) = &self.training else {
            return Ok(JobOutcome::Skipped);
        };
        let plan = CompressionPlan {
            training: training.clone(),
            target: resolve_target(training, &self.target)?,
            ea_params: self.params.clone(),
            order: self.order,
            backtracks: self.backtracks,
        };
        Ok(JobOutcome::Done(Box::new(compress(&plan)?)))
    }

    pub fn summary_row(&self, outcome: &JobOutcome) -> SummaryRow {
        let outcome = match outcome {
            JobOutcome::Skipped => crate::codec::RowOutcome::NotApplicable,
            JobOutcome::Done(r) => row_outcome(r),
        };
        SummaryRow {
            family: self.label.clone(),
            n_qubits: self.n_qubits,
            outcome,
        }
    }

    /// Writes the circuit found so far, the trace and the training set.
    pub fn write_artifacts(&self, dir: &Path, outcome: &JobOutcome) -> Result<()> {
        let (Some(training), JobOutcome::Done(r)) = (&self.training, outcome) else {
            return Ok(());
        };
        write_circuit(&dir.join("circuit.rvc"), &r.full_circuit)?;
        write_trace(&dir.join("trace.jsonl"), &r.trace)?;
        write_training(&dir.join("training.json"), training)
    }
}

pub(crate) fn report_line(job: &Job, outcome: &JobOutcome) -> String {
    match outcome {
        JobOutcome::Skipped => format!("{:<16} n={} -", job.label, job.n_qubits),
        JobOutcome::Done(r) => {
            let status = if r.success {
                "ok".to_string()
            } else if let Some(q) = r.failed_qubit {
                format!("FAILED at qubit {q}")
            } else {
                "FAILED verification".to_string()
            };
            format!(
                "{:<16} n={} trash={:?} {} gates={} ({}) generations={} seed={}",
                job.label,
                job.n_qubits,
                r.target.trash_qubits,
                status,
                r.gate_histogram.total(),
                r.gate_histogram,
                r.total_steps,
                r.seed
            )
        }
    }
}

fn cmd_compress(a: &CompressArgs, verbose: u8, out: &mut dyn Write) -> Result<i32> {
    let mut cfg = match &a.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    cfg.apply_env()?;
    if let Some(s) = a.search.seed {
        cfg.seed = Some(s);
    }
    let master = cfg.master_seed();
    if let Some(spec) = a.family.spec(a.family_seed.unwrap_or(master))? {
        cfg.families = vec![spec];
    }
    cfg.target = a.target.merge(&cfg.target);
    a.search.apply(&mut cfg.ea);
    if let Some(o) = a.order {
        cfg.order = o.into();
    }
    if let Some(b) = a.backtracks {
        cfg.backtracks = b;
    }
    if let Some(r) = a.repetitions {
        cfg.repetitions = r;
    }
    cfg.verbosity = cfg.verbosity.max(verbose);
    let out_dir = a
        .out
        .clone()
        .or(cfg.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));

    // One training set per (source, repetition). Random-support families draw
    // a fresh support for each repetition.
    let mut sources: Vec<(String, usize, Vec<TrainingSet>)> = Vec::new();
    if let Some(path) = &a.training {
        if cfg.target.trash.is_some() && cfg.target.trash_qubits.is_some() {
            return Err(Error::Config("give either trash or trash_qubits, not both".into()));
        }
        cfg.ea.validate()?;
        let t = read_training(path)?;
        sources.push(("training".into(), t.n_qubits(), vec![t; cfg.repetitions]));
    } else {
        cfg.validate()?;
        for f in &cfg.families {
            let sets = (0..cfg.repetitions)
                .map(|rep| match f.kind {
                    FamilyKind::RandomSupport => FamilySpec {
                        seed: f.seed.wrapping_add(rep as u64),
                        ..f.clone()
                    }
                    .generate(),
                    _ => f.generate(),
                })
                .collect::<Result<_>>()?;
            sources.push((f.label(), f.n_qubits, sets));
        }
    }

    let mut jobs = Vec::new();
    for (label, n, sets) in sources {
        for (rep, training) in sets.into_iter().enumerate() {
            // Reject infeasible targets before any search runs.
            resolve_target(&training, &cfg.target)?;
            let mut dir_name = format!("{label}_n{n}");
            if cfg.repetitions > 1 {
                dir_name.push_str(&format!("_rep{rep}"));
            }
            jobs.push(Job {
                label: label.clone(),
                n_qubits: n,
                dir_name,
                training: Some(training),
                target: cfg.target.clone(),
                params: EAParams {
                    seed: master.wrapping_add(rep as u64),
                    ..cfg.ea.clone()
                },
                order: cfg.order,
                backtracks: cfg.backtracks,
            });
        }
    }

    let mut rows = Vec::new();
    let mut all_ok = true;
    for job in &jobs {
        if cfg.verbosity > 0 {
            eprintln!("compressing {} n={} seed={}", job.label, job.n_qubits, job.params.seed);
        }
        let outcome = job.run()?;
        job.write_artifacts(&out_dir.join(&job.dir_name), &outcome)?;
        if let JobOutcome::Done(r) = &outcome {
            all_ok &= r.success;
        }
        writeln!(out, "{}", report_line(job, &outcome))?;
        rows.push(job.summary_row(&outcome));
    }
    write_summary(&out_dir.join("summary.csv"), &rows)?;
    writeln!(out, "artifacts in {}", out_dir.display())?;
    Ok(if all_ok { EXIT_OK } else { EXIT_SEARCH_FAILED })
}

fn load_training(family: &FamilyArgs, training: &Option<PathBuf>, seed: u64) -> Result<Option<TrainingSet>> {
    if let Some(p) = training {
        return read_training(p).map(Some);
    }
    family.spec(seed)?.map(|s| s.generate()).transpose()
}

fn check_width(circuit: &Circuit, training: &TrainingSet) -> Result<()> {
    if circuit.n_qubits() != training.n_qubits() {
        return Err(Error::DimensionMismatch {
            expected: circuit.n_qubits(),
            found: training.n_qubits(),
        });
    }
    Ok(())
}

fn cmd_verify(a: &VerifyArgs, out: &mut dyn Write) -> Result<i32> {
    let circuit = read_circuit(&a.circuit)?;
    let training = load_training(&a.family, &a.training, a.seed)?
        .ok_or_else(|| Error::Config("verify needs --family and --n, or --training".into()))?;
    check_width(&circuit, &training)?;
    let n = training.n_qubits();
    if a.oracle && n > MAX_TABLE_QUBITS {
        return Err(Error::TooManyQubits {
            found: n,
            limit: MAX_TABLE_QUBITS,
        });
    }
    let target = resolve_target(&training, &a.target.merge(&TargetOverride::default()))?;
    let report = verify(&circuit, &training, &target)?;

    let yes_no = |b: bool| if b { "yes" } else { "NO" };
    writeln!(out, "circuit: {} gates ({})", circuit.len(), circuit.histogram())?;
    writeln!(out, "trash qubits: {:?}", target.trash_qubits)?;
    for (i, ok) in report.trash_cleared.iter().enumerate() {
        writeln!(out, "state {i}: trash cleared {}", yes_no(*ok))?;
    }
    writeln!(out, "injective on support: {}", yes_no(report.injective))?;
    match report.oracle_equivalent {
        Some(ok) => writeln!(out, "dense table agrees: {}", yes_no(ok))?,
        None => writeln!(out, "dense table: skipped above {MAX_TABLE_QUBITS} qubits")?,
    }
    if !report.mapping.is_empty() {
        writeln!(out, "mapping:")?;
        for (from, to) in &report.mapping {
            writeln!(out, "  {from} -> {to}")?;
        }
    }
    if a.oracle {
        writeln!(out, "permutation table:")?;
        for (i, img) in permutation_table(&circuit)?.into_iter().enumerate() {
            writeln!(out, "  {} -> {}", ket_string(i as u64, n), ket_string(img, n))?;
        }
    }
    let passed = report.passed();
    writeln!(out, "result: {}", if passed { "PASS" } else { "FAIL" })?;
    Ok(if passed { EXIT_OK } else { EXIT_VERIFY_FAILED })
}

fn cmd_simulate(a: &SimulateArgs, out: &mut dyn Write) -> Result<i32> {
    let circuit = read_circuit(&a.circuit)?;
    let n = circuit.n_qubits();
    let mut inputs: Vec<SparseState> = Vec::new();
    for k in &a.ket {
        let b = BasisState::from_ket(k)?;
        if b.n_qubits() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: b.n_qubits(),
            });
        }
        inputs.push(SparseState::basis(n, b.bits())?);
    }
    if let Some(t) = load_training(&a.family, &a.training, a.seed)? {
        check_width(&circuit, &t)?;
        inputs.extend(t.states().iter().cloned());
    }
    if inputs.is_empty() {
        return Err(Error::Config("simulate needs --ket, --family or --training".into()));
    }
    for (i, s) in inputs.iter().enumerate() {
        let img = apply_circuit(s, &circuit)?;
        writeln!(out, "state {i}:")?;
        for (b, amp) in img.terms() {
            writeln!(
                out,
                "  |{}⟩ p={:.6} amp={:.6}{:+.6}i",
                b.ket(),
                amp.norm_sqr(),
                amp.re,
                amp.im
            )?;
        }
    }
    Ok(EXIT_OK)
}
