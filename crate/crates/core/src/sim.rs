//! Exact simulation of X/CX/CCX circuits on sparse states.
//!
//! Every gate in the set permutes basis states, so a state's support is
//! relabeled term by term and amplitudes never interfere.

use std::collections::{BTreeMap, BTreeSet};

use crate::circuit::{Circuit, Gate};
use crate::error::{Error, Result};
use crate::state::{qubit_mask, qubits_mask, SparseState};

/// Largest register for which dense permutation tables are built.
pub const MAX_TABLE_QUBITS: usize = 12;

/// Weighted collection of states to compress together.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainingSet {
    states: Vec<SparseState>,
    weights: Vec<f64>,
}

impl TrainingSet {
    pub fn new(states: Vec<SparseState>, weights: Vec<f64>) -> Result<Self> {
        let Some(first) = states.first() else {
            return Err(Error::InvalidTraining("no states".into()));
        };
        let n = first.n_qubits();
        if let Some(s) = states.iter().find(|s| s.n_qubits() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: s.n_qubits(),
            });
        }
        if weights.len() != states.len() {
            return Err(Error::InvalidTraining(format!(
                "{} weights for {} states",
                weights.len(),
                states.len()
            )));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidTraining("weights must be finite and non-negative".into()));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidTraining(format!("weights sum to {total}, not 1")));
        }
        Ok(Self { states, weights })
    }

    /// Equal weight on every state.
    pub fn uniform(states: Vec<SparseState>) -> Result<Self> {
        let w = 1.0 / states.len().max(1) as f64;
        let weights = vec![w; states.len()];
        Self::new(states, weights)
    }

    pub fn n_qubits(&self) -> usize {
        self.states[0].n_qubits()
    }

    pub fn states(&self) -> &[SparseState] {
        &self.states
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Union of all supports, ascending.
    pub fn union_support(&self) -> BTreeSet<u64> {
        self.states.iter().flat_map(|s| s.support()).collect()
    }

    /// True when every training state is a single basis state.
    pub fn is_basis_set(&self) -> bool {
        self.states.iter().all(|s| s.as_basis().is_some())
    }

    /// Every state pushed through `circuit`.
    pub fn transformed(&self, circuit: &Circuit) -> Result<Self> {
        let states = self
            .states
            .iter()
            .map(|s| apply_circuit(s, circuit))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            states,
            weights: self.weights.clone(),
        })
    }
}

fn check_qubit(q: usize, n_qubits: usize) -> Result<()> {
    if q >= n_qubits {
        return Err(Error::QubitOutOfRange { index: q, n_qubits });
    }
    Ok(())
}

fn relabel(state: &SparseState, f: impl Fn(u64) -> u64) -> SparseState {
    let terms: BTreeMap<_, _> = state.raw_terms().iter().map(|(&b, &a)| (f(b), a)).collect();
    debug_assert_eq!(terms.len(), state.len());
    SparseState::from_map_unchecked(state.n_qubits(), terms)
}

pub fn apply_gate(state: &SparseState, gate: &Gate) -> Result<SparseState> {
    let n = state.n_qubits();
    gate.check(n)?;
    let (ctrl, tgt) = gate.masks(n);
    Ok(relabel(state, |b| if b & ctrl == ctrl { b ^ tgt } else { b }))
}

pub fn apply_circuit(state: &SparseState, circuit: &Circuit) -> Result<SparseState> {
    if circuit.n_qubits() != state.n_qubits() {
        return Err(Error::DimensionMismatch {
            expected: circuit.n_qubits(),
            found: state.n_qubits(),
        });
    }
    let compiled = circuit.compile();
    Ok(relabel(state, |b| compiled.apply(b)))
}

/// Probability that measuring `target` yields 0.
pub fn target_zero_mass(state: &SparseState, target: usize) -> Result<f64> {
    check_qubit(target, state.n_qubits())?;
    Ok(zero_mass(state, qubit_mask(target, state.n_qubits())))
}

/// Probability that every qubit selected by `mask` reads 0.
fn zero_mass(state: &SparseState, mask: u64) -> f64 {
    state
        .raw_terms()
        .iter()
        .filter(|(&b, _)| b & mask == 0)
        .map(|(_, a)| a.norm_sqr())
        .sum()
}

/// True iff no support element has the target bit set.
pub fn is_disentangled(state: &SparseState, target: usize) -> Result<bool> {
    check_qubit(target, state.n_qubits())?;
    Ok(all_clear(state, qubit_mask(target, state.n_qubits())))
}

fn all_clear(state: &SparseState, mask: u64) -> bool {
    state.support().all(|b| b & mask == 0)
}

/// Disentangling fitness of `circuit` for a single target qubit: the
/// weight-averaged probability of reading 0 on `target`, minus
/// `length_penalty` per gate.
pub fn fitness(circuit: &Circuit, training: &TrainingSet, target: usize, length_penalty: f64) -> Result<f64> {
    joint_fitness(circuit, training, &[target], length_penalty)
}

/// Like [`fitness`], but a support element only counts when every qubit in
/// `targets` reads 0. Used to keep earlier trash qubits clear while a later
/// one is being disentangled.
pub fn joint_fitness(circuit: &Circuit, training: &TrainingSet, targets: &[usize], length_penalty: f64) -> Result<f64> {
    let n = training.n_qubits();
    if circuit.n_qubits() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: circuit.n_qubits(),
        });
    }
    for &t in targets {
        check_qubit(t, n)?;
    }
    let mask = qubits_mask(targets, n);
    Ok(joint_fitness_masked(&circuit.compile(), training, mask) - length_penalty * circuit.len() as f64)
}

/// Hot path of the search: weighted zero-mass under a precompiled circuit.
pub(crate) fn joint_fitness_masked(
    compiled: &crate::circuit::CompiledCircuit,
    training: &TrainingSet,
    mask: u64,
) -> f64 {
    training
        .states
        .iter()
        .zip(&training.weights)
        .map(|(s, &w)| {
            let mass: f64 = s
                .raw_terms()
                .iter()
                .filter(|(&b, _)| compiled.apply(b) & mask == 0)
                .map(|(_, a)| a.norm_sqr())
                .sum();
            w * mass
        })
        .sum()
}

/// Exact check that every qubit in `mask` is clear on every support element
/// of every training state after `compiled`.
pub(crate) fn all_cleared_masked(
    compiled: &crate::circuit::CompiledCircuit,
    training: &TrainingSet,
    mask: u64,
) -> bool {
    training
        .states
        .iter()
        .all(|s| s.support().all(|b| compiled.apply(b) & mask == 0))
}

/// True iff every qubit in `targets` is disentangled in every training state.
pub fn all_disentangled(training: &TrainingSet, targets: &[usize]) -> Result<bool> {
    let n = training.n_qubits();
    for &t in targets {
        check_qubit(t, n)?;
    }
    let mask = qubits_mask(targets, n);
    Ok(training.states.iter().all(|s| all_clear(s, mask)))
}

/// Dense image table: entry `j` is the label that basis state `j` maps to.
pub fn permutation_table(circuit: &Circuit) -> Result<Vec<u64>> {
    let n = circuit.n_qubits();
    if n > MAX_TABLE_QUBITS {
        return Err(Error::TooManyQubits {
            found: n,
            limit: MAX_TABLE_QUBITS,
        });
    }
    // Gate-major sweep over the dense table, independent of the sparse path.
    let mut table: Vec<u64> = (0..1u64 << n).collect();
    for gate in circuit.gates() {
        for img in table.iter_mut() {
            *img = gate.apply_bits(*img, n);
        }
    }
    Ok(table)
}

/// True iff `table` is a permutation of `0..table.len()`.
pub fn is_bijection(table: &[u64]) -> bool {
    let mut seen = vec![false; table.len()];
    table.iter().all(|&img| {
        let i = img as usize;
        i < seen.len() && !std::mem::replace(&mut seen[i], true)
    })
}
