//! Random gates and the five mutation operators.
//!
//! Operators that need existing gates fall back to [`mutate_add`] on an empty
//! circuit. Multi-gate operators touch `k ~ U[1, min(3, len)]` gates.

use rand::distributions::{Distribution, WeightedIndex};
use rand::seq::{index, SliceRandom};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, Gate, GateKind};

/// Most gates a single mutation may remove, repeat or replace.
pub const MAX_MUTATION_ARITY: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MutationOp {
    Add,
    Remove,
    Permute,
    Repeat,
    Replace,
}

impl MutationOp {
    pub const ALL: [MutationOp; 5] = [
        MutationOp::Add,
        MutationOp::Remove,
        MutationOp::Permute,
        MutationOp::Repeat,
        MutationOp::Replace,
    ];

    pub fn apply<R: Rng + ?Sized>(self, circuit: &Circuit, rng: &mut R) -> Circuit {
        match self {
            MutationOp::Add => mutate_add(circuit, rng),
            MutationOp::Remove => mutate_remove(circuit, rng),
            MutationOp::Permute => mutate_permute(circuit, rng),
            MutationOp::Repeat => mutate_repeat(circuit, rng),
            MutationOp::Replace => mutate_replace(circuit, rng),
        }
    }
}

/// Picks an operator with probability proportional to its weight.
pub struct OpSampler {
    dist: WeightedIndex<f64>,
}

impl OpSampler {
    /// `None` when the weights are all zero, negative, or non-finite.
    pub fn new(weights: &[f64; 5]) -> Option<Self> {
        WeightedIndex::new(weights.iter().copied())
            .ok()
            .map(|dist| Self { dist })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> MutationOp {
        MutationOp::ALL[self.dist.sample(rng)]
    }
}

/// Uniform over the gate kinds that fit in `n_qubits`, then uniform over
/// distinct qubit tuples of that kind. Toffoli controls are stored ascending.
pub fn random_gate<R: Rng + ?Sized>(n_qubits: usize, rng: &mut R) -> Gate {
    let kinds = GateKind::ALL.iter().filter(|k| k.arity() <= n_qubits).count();
    let kind = GateKind::ALL[rng.gen_range(0..kinds)];
    let picked = index::sample(rng, n_qubits, kind.arity());
    let mut q = [0usize; 3];
    for (slot, i) in q.iter_mut().zip(picked.iter()) {
        *slot = i;
    }
    match kind {
        GateKind::X => Gate::x(q[0]),
        GateKind::CX => Gate::cx(q[0], q[1]),
        GateKind::CCX => Gate::ccx(q[0], q[1].min(q[2]), q[1].max(q[2])),
    }
}

pub fn random_circuit<R: Rng + ?Sized>(n_qubits: usize, len: usize, rng: &mut R) -> Circuit {
    let gates = (0..len).map(|_| random_gate(n_qubits, rng)).collect();
    Circuit::from_gates_unchecked(n_qubits, gates)
}

fn arity<R: Rng + ?Sized>(len: usize, rng: &mut R) -> usize {
    rng.gen_range(1..=len.min(MAX_MUTATION_ARITY))
}

/// Inserts one random gate at a uniformly random position.
pub fn mutate_add<R: Rng + ?Sized>(circuit: &Circuit, rng: &mut R) -> Circuit {
    let n = circuit.n_qubits();
    let mut gates = circuit.gates().to_vec();
    let gate = random_gate(n, rng);
    let at = rng.gen_range(0..=gates.len());
    gates.insert(at, gate);
    Circuit::from_gates_unchecked(n, gates)
}

/// Removes `k` gates, keeping the order of the rest.
pub fn mutate_remove<R: Rng + ?Sized>(circuit: &Circuit, rng: &mut R) -> Circuit {
    let len = circuit.len();
    if len == 0 {
        return mutate_add(circuit, rng);
    }
    let k = arity(len, rng);
    let mut drop = vec![false; len];
    for i in index::sample(rng, len, k) {
        drop[i] = true;
    }
    let gates = circuit
        .gates()
        .iter()
        .zip(drop)
        .filter(|(_, d)| !d)
        .map(|(g, _)| *g)
        .collect();
    Circuit::from_gates_unchecked(circuit.n_qubits(), gates)
}

/// Reorders all gates by a uniformly random permutation.
pub fn mutate_permute<R: Rng + ?Sized>(circuit: &Circuit, rng: &mut R) -> Circuit {
    let mut gates = circuit.gates().to_vec();
    gates.shuffle(rng);
    Circuit::from_gates_unchecked(circuit.n_qubits(), gates)
}

/// Copies `k` existing gates to random positions.
pub fn mutate_repeat<R: Rng + ?Sized>(circuit: &Circuit, rng: &mut R) -> Circuit {
    let len = circuit.len();
    if len == 0 {
        return mutate_add(circuit, rng);
    }
    let k = arity(len, rng);
    let copies: Vec<Gate> = index::sample(rng, len, k).iter().map(|i| circuit.gates()[i]).collect();
    let mut gates = circuit.gates().to_vec();
    for g in copies {
        let at = rng.gen_range(0..=gates.len());
        gates.insert(at, g);
    }
    Circuit::from_gates_unchecked(circuit.n_qubits(), gates)
}

/// Overwrites `k` positions with fresh random gates.
pub fn mutate_replace<R: Rng + ?Sized>(circuit: &Circuit, rng: &mut R) -> Circuit {
    let len = circuit.len();
    if len == 0 {
        return mutate_add(circuit, rng);
    }
    let n = circuit.n_qubits();
    let k = arity(len, rng);
    let mut gates = circuit.gates().to_vec();
    for i in index::sample(rng, len, k) {
        gates[i] = random_gate(n, rng);
    }
    Circuit::from_gates_unchecked(n, gates)
}
