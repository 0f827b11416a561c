//! (μ+λ) evolutionary search for a circuit that disentangles one target qubit,
//! and the random-sampling baseline it is compared against.
//!
//! All randomness comes from ChaCha8 seeded per run by [`restart_seed`].
//! Draws are consumed in a fixed order (initialization, then per child: parent
//! index, operator, operator internals), so a seed determines the whole run.

pub mod mutation;

use std::cmp::Ordering;
use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, Gate};
use crate::codec::{serialize_circuit, TraceRecord};
use crate::error::{Error, Result};
use crate::sim::{all_cleared_masked, joint_fitness_masked, TrainingSet};
use crate::state::{ket_string, qubits_mask};

pub use mutation::{
    mutate_add, mutate_permute, mutate_remove, mutate_repeat, mutate_replace, random_circuit, random_gate, MutationOp,
    OpSampler,
};

/// Seed of run `restart`: the master seed offset by a golden-ratio multiple
/// of the run index, so runs of neighbouring master seeds do not coincide.
pub fn restart_seed(seed: u64, restart: usize) -> u64 {
    seed.wrapping_add((restart as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

/// Attempts to draw a circuit whose canonical string is not yet in the population.
const INIT_DEDUP_ATTEMPTS: usize = 100;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EAParams {
    /// Survivors kept after every generation.
    pub population_size: usize,
    /// Top-ranked candidates that produce children.
    pub parent_count: usize,
    /// Children per generation.
    pub children: usize,
    /// Relative weights of add, remove, permute, repeat, replace.
    pub mutation_weights: [f64; 5],
    /// Upper bound of the initial circuit length; `None` means twice the qubit count.
    pub init_max_len: Option<usize>,
    pub max_generations: usize,
    /// Extra runs, each with a fresh seed, after an unsuccessful first run.
    pub restarts: usize,
    pub length_penalty: f64,
    pub seed: u64,
    /// Record the best candidate's transformed support in every trace record.
    pub snapshots: bool,
    /// Drop gates from a successful circuit while it stays successful.
    pub prune: bool,
}

impl Default for EAParams {
    fn default() -> Self {
        Self {
            population_size: 50,
            parent_count: 10,
            children: 40,
            mutation_weights: [1.0; 5],
            init_max_len: None,
            max_generations: 1000,
            restarts: 5,
            length_penalty: 0.0,
            seed: 0,
            snapshots: false,
            prune: true,
        }
    }
}

impl EAParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if self.population_size == 0 || self.parent_count == 0 || self.children == 0 {
            return bad("population, parent and child counts must be positive");
        }
        if self.parent_count > self.population_size {
            return bad("parent count cannot exceed the population size");
        }
        if OpSampler::new(&self.mutation_weights).is_none() {
            return bad("mutation weights must be non-negative with a positive sum");
        }
        if self.init_max_len == Some(0) {
            return bad("initial circuit length bound must be positive");
        }
        if !self.length_penalty.is_finite() || self.length_penalty < 0.0 {
            return bad("length penalty must be a non-negative number");
        }
        Ok(())
    }

    pub fn init_len_bound(&self, n_qubits: usize) -> usize {
        self.init_max_len.unwrap_or(2 * n_qubits).max(1)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Candidate {
    pub circuit: Circuit,
    pub fitness: f64,
    pub canonical_key: String,
    pub birth_order: u64,
}

/// Survivor ranking: fitness descending, then later birth first. Preferring
/// the newer of two equally fit circuits lets the population drift across
/// fitness plateaus instead of collapsing onto the shortest circuits.
pub fn rank(a: &Candidate, b: &Candidate) -> Ordering {
    b.fitness.total_cmp(&a.fitness).then(b.birth_order.cmp(&a.birth_order))
}

/// Ranking between finished runs: fitness descending, then fewer gates, then
/// earlier birth.
pub fn rank_result(a: &Candidate, b: &Candidate) -> Ordering {
    b.fitness
        .total_cmp(&a.fitness)
        .then(a.circuit.len().cmp(&b.circuit.len()))
        .then(a.birth_order.cmp(&b.birth_order))
}

#[derive(Clone, Debug)]
pub struct EAResult {
    pub best: Candidate,
    pub success: bool,
    /// Generations summed over every run, restarts included. A run that
    /// stops at generation g contributes g.
    pub generations_used: usize,
    /// Fitness evaluations summed over every run, restarts included.
    pub evaluations: u64,
    /// Index of the run that produced `best`.
    pub restart: usize,
    /// Records of every run in order; `restart` tells them apart.
    pub trace: Vec<TraceRecord>,
}

/// What a candidate is scored against: every support element counts only
/// when all `mask` qubits read 0.
struct Objective<'a> {
    training: &'a TrainingSet,
    target: usize,
    mask: u64,
    penalty: f64,
}

impl Objective<'_> {
    fn score(&self, circuit: &Circuit) -> f64 {
        joint_fitness_masked(&circuit.compile(), self.training, self.mask) - self.penalty * circuit.len() as f64
    }

    fn solved(&self, circuit: &Circuit) -> bool {
        all_cleared_masked(&circuit.compile(), self.training, self.mask)
    }

    /// Removes single gates, then pairs of identical gates, while the circuit
    /// still solves the objective. Repeats until nothing can be removed.
    fn prune(&self, circuit: &Circuit) -> Circuit {
        let n = circuit.n_qubits();
        let mut gates = circuit.gates().to_vec();
        let solves = |g: &[Gate]| self.solved(&Circuit::from_gates_unchecked(n, g.to_vec()));
        debug_assert!(solves(&gates));
        loop {
            let before = gates.len();
            let mut i = gates.len();
            while i > 0 {
                i -= 1;
                let removed = gates.remove(i);
                if !solves(&gates) {
                    gates.insert(i, removed);
                }
            }
            let mut i = 0;
            'pairs: while i < gates.len() {
                for j in i + 1..gates.len() {
                    if gates[j] == gates[i] {
                        let mut trial = gates.clone();
                        trial.remove(j);
                        trial.remove(i);
                        if solves(&trial) {
                            gates = trial;
                            continue 'pairs;
                        }
                    }
                }
                i += 1;
            }
            if gates.len() == before {
                return Circuit::from_gates_unchecked(n, gates);
            }
        }
    }

    fn snapshot(&self, circuit: &Circuit) -> Vec<Vec<String>> {
        let n = self.training.n_qubits();
        let compiled = circuit.compile();
        self.training
            .states()
            .iter()
            .map(|s| {
                let mut images: Vec<u64> = s.support().map(|b| compiled.apply(b)).collect();
                images.sort_unstable();
                images.into_iter().map(|b| ket_string(b, n)).collect()
            })
            .collect()
    }
}

/// Per-run bookkeeping: candidate factory with birth counter and evaluation count.
struct Run<'a> {
    objective: &'a Objective<'a>,
    births: u64,
    evaluations: u64,
}

impl Run<'_> {
    fn candidate(&mut self, circuit: Circuit) -> Candidate {
        let fitness = self.objective.score(&circuit);
        let canonical_key = serialize_circuit(&circuit);
        self.evaluations += 1;
        self.births += 1;
        Candidate {
            circuit,
            fitness,
            canonical_key,
            birth_order: self.births - 1,
        }
    }
}

fn check_inputs(training: &TrainingSet, target: usize, guard: &[usize]) -> Result<()> {
    let n = training.n_qubits();
    if let Some(&q) = std::iter::once(&target).chain(guard).find(|&&q| q >= n) {
        return Err(Error::QubitOutOfRange { index: q, n_qubits: n });
    }
    Ok(())
}

fn draw_circuit<R: Rng + ?Sized>(params: &EAParams, n_qubits: usize, rng: &mut R) -> Circuit {
    let len = rng.gen_range(1..=params.init_len_bound(n_qubits));
    random_circuit(n_qubits, len, rng)
}

/// `population_size` random circuits, avoiding repeated canonical strings.
pub fn init_population<R: Rng + ?Sized>(params: &EAParams, n_qubits: usize, rng: &mut R) -> Vec<Circuit> {
    let mut seen = HashSet::new();
    (0..params.population_size)
        .map(|_| {
            let mut circuit = draw_circuit(params, n_qubits, rng);
            for _ in 1..INIT_DEDUP_ATTEMPTS {
                if !seen.contains(&serialize_circuit(&circuit)) {
                    break;
                }
                circuit = draw_circuit(params, n_qubits, rng);
            }
            seen.insert(serialize_circuit(&circuit));
            circuit
        })
        .collect()
}

/// Searches for a circuit that clears `target` on every training state.
pub fn ea_disentangle(training: &TrainingSet, target: usize, params: &EAParams) -> Result<EAResult> {
    ea_disentangle_guarded(training, target, &[], params)
}

/// Like [`ea_disentangle`], but `guard` qubits must also end clear; fitness
/// only credits support elements where the target and every guard read 0.
pub fn ea_disentangle_guarded(
    training: &TrainingSet,
    target: usize,
    guard: &[usize],
    params: &EAParams,
) -> Result<EAResult> {
    params.validate()?;
    check_inputs(training, target, guard)?;
    let n = training.n_qubits();
    let mut qubits = vec![target];
    qubits.extend_from_slice(guard);
    let objective = Objective {
        training,
        target,
        mask: qubits_mask(&qubits, n),
        penalty: params.length_penalty,
    };

    let empty = Circuit::new(n)?;
    if objective.solved(&empty) {
        let mut run = Run {
            objective: &objective,
            births: 0,
            evaluations: 0,
        };
        let best = run.candidate(empty);
        let trace = vec![record(&objective, params, 0, &best, 1, run.evaluations, 0)];
        return Ok(EAResult {
            best,
            success: true,
            generations_used: 0,
            evaluations: 1,
            restart: 0,
            trace,
        });
    }

    let mut overall: Option<EAResult> = None;
    let mut evaluations = 0;
    let mut generations = 0;
    let mut trace = Vec::new();
    for restart in 0..=params.restarts {
        let mut result = evolve(&objective, params, restart)?;
        evaluations += result.evaluations;
        generations += result.generations_used;
        trace.append(&mut result.trace);
        let better = match &overall {
            None => true,
            Some(prev) => (result.success, Reverse(&result.best)) > (prev.success, Reverse(&prev.best)),
        };
        let done = result.success;
        if better {
            overall = Some(result);
        }
        if done {
            break;
        }
    }
    let mut out = overall.expect("at least one run");
    out.evaluations = evaluations;
    out.generations_used = generations;
    out.trace = trace;
    if out.success && params.prune {
        let pruned = objective.prune(&out.best.circuit);
        if pruned.len() < out.best.circuit.len() {
            out.best = Candidate {
                fitness: objective.score(&pruned),
                canonical_key: serialize_circuit(&pruned),
                circuit: pruned,
                birth_order: out.best.birth_order,
            };
        }
    }
    Ok(out)
}

/// Orders candidates so that a better-ranked one compares greater.
struct Reverse<'a>(&'a Candidate);

impl PartialEq for Reverse<'_> {
    fn eq(&self, other: &Self) -> bool {
        rank_result(self.0, other.0) == Ordering::Equal
    }
}

impl PartialOrd for Reverse<'_> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(rank_result(other.0, self.0))
    }
}

fn record(
    objective: &Objective<'_>,
    params: &EAParams,
    generation: usize,
    best: &Candidate,
    population_size: usize,
    evaluations: u64,
    restart: usize,
) -> TraceRecord {
    TraceRecord {
        generation,
        best_fitness: best.fitness,
        best_gate_count: best.circuit.len(),
        population_size,
        evaluations,
        stage: None,
        target: Some(objective.target),
        restart,
        support_snapshot: params.snapshots.then(|| objective.snapshot(&best.circuit)),
    }
}

fn evolve(objective: &Objective<'_>, params: &EAParams, restart: usize) -> Result<EAResult> {
    let n = objective.training.n_qubits();
    let mut rng = ChaCha8Rng::seed_from_u64(restart_seed(params.seed, restart));
    let ops = OpSampler::new(&params.mutation_weights).expect("validated weights");
    let mut run = Run {
        objective,
        births: 0,
        evaluations: 0,
    };

    let mut population: Vec<Candidate> = init_population(params, n, &mut rng)
        .into_iter()
        .map(|c| run.candidate(c))
        .collect();
    population.sort_by(rank);

    let mut trace = vec![record(
        objective,
        params,
        0,
        &population[0],
        population.len(),
        run.evaluations,
        restart,
    )];
    let mut generation = 0;
    let mut success = objective.solved(&population[0].circuit);

    while !success && generation < params.max_generations {
        generation += 1;
        let parents = params.parent_count.min(population.len());
        let mut pool = population;
        let children: Vec<Circuit> = (0..params.children)
            .map(|_| {
                let parent = &pool[rng.gen_range(0..parents)].circuit;
                ops.sample(&mut rng).apply(parent, &mut rng)
            })
            .collect();
        pool.extend(children.into_iter().map(|c| run.candidate(c)));
        population = select(pool, params.population_size, &mut run, params, &mut rng);
        trace.push(record(
            objective,
            params,
            generation,
            &population[0],
            population.len(),
            run.evaluations,
            restart,
        ));
        success = objective.solved(&population[0].circuit);
    }

    let best = population.swap_remove(0);
    Ok(EAResult {
        best,
        success,
        generations_used: generation,
        evaluations: run.evaluations,
        restart,
        trace,
    })
}

/// Best `size` distinct candidates of `pool`, topped up with fresh random
/// circuits when deduplication leaves too few.
fn select(
    mut pool: Vec<Candidate>,
    size: usize,
    run: &mut Run<'_>,
    params: &EAParams,
    rng: &mut ChaCha8Rng,
) -> Vec<Candidate> {
    let n = run.objective.training.n_qubits();
    loop {
        pool.sort_by(rank);
        let mut seen = HashSet::with_capacity(pool.len());
        pool.retain(|c| seen.insert(c.canonical_key.clone()));
        if pool.len() >= size {
            pool.truncate(size);
            return pool;
        }
        let missing = size - pool.len();
        for _ in 0..missing {
            let fresh = draw_circuit(params, n, rng);
            pool.push(run.candidate(fresh));
        }
    }
}

/// Options for [`random_search`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RandomSearchParams {
    /// Number of circuits sampled.
    pub budget: usize,
    /// Random part of each sample has length uniform in `[1, max_length]`.
    pub max_length: usize,
    /// Prefix each sample with a CNOT cascade.
    pub cascade_prefix: bool,
    pub seed: u64,
}

impl Default for RandomSearchParams {
    fn default() -> Self {
        Self {
            budget: 100_000,
            max_length: 12,
            cascade_prefix: true,
            seed: 0,
        }
    }
}

/// Trace records are emitted once per this many samples.
const RANDOM_SEARCH_BATCH: usize = 1000;

/// A CNOT ladder through the qubits in a seeded random order: each qubit in
/// the order controls a flip of the one before it.
pub fn cnot_cascade<R: Rng + ?Sized>(n_qubits: usize, rng: &mut R) -> Vec<Gate> {
    use rand::seq::SliceRandom;
    let mut order: Vec<usize> = (0..n_qubits).collect();
    order.shuffle(rng);
    order.windows(2).map(|w| Gate::cx(w[0], w[1])).collect()
}

/// Samples random circuits and keeps the best, stopping early on success.
/// `guard` qubits must end clear as well, as in [`ea_disentangle_guarded`].
pub fn random_search(
    training: &TrainingSet,
    target: usize,
    guard: &[usize],
    params: &RandomSearchParams,
) -> Result<EAResult> {
    if params.budget == 0 || params.max_length == 0 {
        return Err(Error::Config("random search needs a positive budget and length".into()));
    }
    check_inputs(training, target, guard)?;
    let n = training.n_qubits();
    let mut qubits = vec![target];
    qubits.extend_from_slice(guard);
    let objective = Objective {
        training,
        target,
        mask: qubits_mask(&qubits, n),
        penalty: 0.0,
    };
    let ea = EAParams {
        snapshots: false,
        ..EAParams::default()
    };
    let mut run = Run {
        objective: &objective,
        births: 0,
        evaluations: 0,
    };
    let empty = Circuit::new(n)?;
    if objective.solved(&empty) {
        let best = run.candidate(empty);
        let trace = vec![record(&objective, &ea, 0, &best, 1, run.evaluations, 0)];
        return Ok(EAResult {
            best,
            success: true,
            generations_used: 0,
            evaluations: 1,
            restart: 0,
            trace,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);

    let mut best: Option<Candidate> = None;
    let mut trace = Vec::new();
    let mut success = false;
    for i in 0..params.budget {
        let mut gates = if params.cascade_prefix {
            cnot_cascade(n, &mut rng)
        } else {
            Vec::new()
        };
        let len = rng.gen_range(1..=params.max_length);
        gates.extend((0..len).map(|_| random_gate(n, &mut rng)));
        let cand = run.candidate(Circuit::from_gates_unchecked(n, gates));
        if best.as_ref().is_none_or(|b| rank_result(&cand, b) == Ordering::Less) {
            success = objective.solved(&cand.circuit);
            best = Some(cand);
        }
        let batch_end = (i + 1) % RANDOM_SEARCH_BATCH == 0 || i + 1 == params.budget || success;
        if batch_end {
            let b = best.as_ref().expect("sampled at least once");
            trace.push(record(&objective, &ea, trace.len(), b, 1, run.evaluations, 0));
        }
        if success {
            break;
        }
    }
    let best = best.expect("budget is positive");
    Ok(EAResult {
        generations_used: trace.len().saturating_sub(1),
        evaluations: run.evaluations,
        best,
        success,
        restart: 0,
        trace,
    })
}
