//! The restricted reversible gate set and circuits built from it.

use std::fmt;

use crate::error::{Error, Result};
use crate::state::{check_width, qubit_mask};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum GateKind {
    X,
    CX,
    CCX,
}

impl GateKind {
    pub const ALL: [GateKind; 3] = [GateKind::X, GateKind::CX, GateKind::CCX];

    /// Number of qubits the gate acts on.
    pub fn arity(self) -> usize {
        match self {
            GateKind::X => 1,
            GateKind::CX => 2,
            GateKind::CCX => 3,
        }
    }

    pub fn from_arity(arity: usize) -> Option<Self> {
        match arity {
            1 => Some(GateKind::X),
            2 => Some(GateKind::CX),
            3 => Some(GateKind::CCX),
            _ => None,
        }
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GateKind::X => "X",
            GateKind::CX => "CX",
            GateKind::CCX => "CCX",
        })
    }
}

/// A NOT, CNOT or Toffoli gate: a target qubit followed by 0–2 controls.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Gate {
    kind: GateKind,
    qubits: [u8; 3],
}

impl Gate {
    /// Builds a gate from its tuple `(target, controls...)`. The kind follows
    /// from the tuple length.
    pub fn from_qubits(qubits: &[usize]) -> Result<Self> {
        let kind = GateKind::from_arity(qubits.len())
            .ok_or_else(|| Error::InvalidState(format!("gate tuple must have 1 to 3 qubits, got {}", qubits.len())))?;
        let mut packed = [0u8; 3];
        for (i, &q) in qubits.iter().enumerate() {
            if q >= crate::state::MAX_QUBITS {
                return Err(Error::QubitOutOfRange {
                    index: q,
                    n_qubits: crate::state::MAX_QUBITS,
                });
            }
            if qubits[..i].contains(&q) {
                return Err(Error::DuplicateQubit(q));
            }
            packed[i] = q as u8;
        }
        Ok(Self { kind, qubits: packed })
    }

    /// NOT on `target`.
    pub fn x(target: usize) -> Self {
        Self::from_qubits(&[target]).expect("valid X gate")
    }

    /// CNOT flipping `target` when `control` is set. Panics if they coincide.
    pub fn cx(target: usize, control: usize) -> Self {
        Self::from_qubits(&[target, control]).expect("distinct CX qubits")
    }

    /// Toffoli flipping `target` when both controls are set. Panics on repeated qubits.
    pub fn ccx(target: usize, c1: usize, c2: usize) -> Self {
        Self::from_qubits(&[target, c1, c2]).expect("distinct CCX qubits")
    }

    pub fn kind(&self) -> GateKind {
        self.kind
    }

    pub fn target(&self) -> usize {
        self.qubits[0] as usize
    }

    pub fn controls(&self) -> impl Iterator<Item = usize> + '_ {
        self.qubits[1..self.kind.arity()].iter().map(|&q| q as usize)
    }

    /// Target first, then controls.
    pub fn qubits(&self) -> impl Iterator<Item = usize> + '_ {
        self.qubits[..self.kind.arity()].iter().map(|&q| q as usize)
    }

    pub fn max_qubit(&self) -> usize {
        self.qubits().max().unwrap_or(0)
    }

    pub fn check(&self, n_qubits: usize) -> Result<()> {
        let max = self.max_qubit();
        if max >= n_qubits {
            return Err(Error::QubitOutOfRange { index: max, n_qubits });
        }
        Ok(())
    }

    /// `(control_mask, target_mask)` for an `n`-qubit register.
    #[inline]
    pub fn masks(&self, n_qubits: usize) -> (u64, u64) {
        let ctrl = self.controls().fold(0, |m, q| m | qubit_mask(q, n_qubits));
        (ctrl, qubit_mask(self.target(), n_qubits))
    }

    /// Truth-table action on one basis label.
    #[inline]
    pub fn apply_bits(&self, bits: u64, n_qubits: usize) -> u64 {
        let (ctrl, tgt) = self.masks(n_qubits);
        if bits & ctrl == ctrl {
            bits ^ tgt
        } else {
            bits
        }
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, q) in self.qubits().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{q}")?;
        }
        f.write_str(")")
    }
}

/// Gate counts by kind.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct GateHistogram {
    pub x: usize,
    pub cx: usize,
    pub ccx: usize,
}

impl GateHistogram {
    pub fn total(&self) -> usize {
        self.x + self.cx + self.ccx
    }
}

impl fmt::Display for GateHistogram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-X, {}-CX, {}-CCX", self.x, self.cx, self.ccx)
    }
}

/// An ordered gate list on a fixed register; the first gate is applied first.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Circuit {
    n_qubits: usize,
    gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(n_qubits: usize) -> Result<Self> {
        check_width(n_qubits)?;
        Ok(Self {
            n_qubits,
            gates: Vec::new(),
        })
    }

    pub fn from_gates(n_qubits: usize, gates: Vec<Gate>) -> Result<Self> {
        check_width(n_qubits)?;
        for g in &gates {
            g.check(n_qubits)?;
        }
        Ok(Self { n_qubits, gates })
    }

    /// For gate lists produced internally against a known register width.
    pub(crate) fn from_gates_unchecked(n_qubits: usize, gates: Vec<Gate>) -> Self {
        debug_assert!(gates.iter().all(|g| g.check(n_qubits).is_ok()));
        Self { n_qubits, gates }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn into_gates(self) -> Vec<Gate> {
        self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn push(&mut self, gate: Gate) -> Result<()> {
        gate.check(self.n_qubits)?;
        self.gates.push(gate);
        Ok(())
    }

    /// Appends `other` after this circuit.
    pub fn concat(&mut self, other: &Circuit) -> Result<()> {
        if other.n_qubits != self.n_qubits {
            return Err(Error::DimensionMismatch {
                expected: self.n_qubits,
                found: other.n_qubits,
            });
        }
        self.gates.extend_from_slice(&other.gates);
        Ok(())
    }

    /// The reversed gate list. Every gate is self-inverse, so this undoes the circuit.
    pub fn inverse(&self) -> Circuit {
        Self {
            n_qubits: self.n_qubits,
            gates: self.gates.iter().rev().copied().collect(),
        }
    }

    /// Image of one basis label under the whole circuit.
    pub fn apply_bits(&self, bits: u64) -> u64 {
        self.gates.iter().fold(bits, |b, g| g.apply_bits(b, self.n_qubits))
    }

    /// Precomputed masks, for evaluating the same circuit on many labels.
    pub fn compile(&self) -> CompiledCircuit {
        CompiledCircuit {
            masks: self.gates.iter().map(|g| g.masks(self.n_qubits)).collect(),
        }
    }

    pub fn histogram(&self) -> GateHistogram {
        let mut h = GateHistogram::default();
        for g in &self.gates {
            match g.kind() {
                GateKind::X => h.x += 1,
                GateKind::CX => h.cx += 1,
                GateKind::CCX => h.ccx += 1,
            }
        }
        h
    }
}

/// A circuit lowered to `(control_mask, target_mask)` pairs.
#[derive(Clone, Debug)]
pub struct CompiledCircuit {
    masks: Vec<(u64, u64)>,
}

impl CompiledCircuit {
    #[inline]
    pub fn apply(&self, mut bits: u64) -> u64 {
        for &(ctrl, tgt) in &self.masks {
            if bits & ctrl == ctrl {
                bits ^= tgt;
            }
        }
        bits
    }
}
