//! Computational basis labels and sparse states.
//!
//! Qubit 0 is the leftmost character of a ket string, and the integer label of
//! a basis state is the big-endian reading of that string. Qubit `q` of an
//! `n`-qubit register therefore lives at bit position `n - 1 - q`.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};

pub const MAX_QUBITS: usize = 64;

/// Amplitudes below this magnitude are never stored.
pub const ZERO_AMPLITUDE: f64 = 1e-15;

/// Allowed deviation of the squared norm from one.
pub const NORM_TOLERANCE: f64 = 1e-12;

/// Bit mask selecting qubit `q` in an `n`-qubit label.
#[inline]
pub fn qubit_mask(q: usize, n_qubits: usize) -> u64 {
    debug_assert!(q < n_qubits);
    1u64 << (n_qubits - 1 - q)
}

/// Mask with every qubit in `qubits` set.
pub fn qubits_mask(qubits: &[usize], n_qubits: usize) -> u64 {
    qubits.iter().fold(0, |m, &q| m | qubit_mask(q, n_qubits))
}

fn width_mask(n_qubits: usize) -> u64 {
    if n_qubits == 64 {
        u64::MAX
    } else {
        (1u64 << n_qubits) - 1
    }
}

pub(crate) fn check_width(n_qubits: usize) -> Result<()> {
    if n_qubits == 0 {
        return Err(Error::InvalidState("register must have at least one qubit".into()));
    }
    if n_qubits > MAX_QUBITS {
        return Err(Error::TooManyQubits {
            found: n_qubits,
            limit: MAX_QUBITS,
        });
    }
    Ok(())
}

/// One computational basis vector of an `n`-qubit register.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BasisState {
    bits: u64,
    n_qubits: u8,
}

impl BasisState {
    pub fn new(bits: u64, n_qubits: usize) -> Result<Self> {
        check_width(n_qubits)?;
        if bits & !width_mask(n_qubits) != 0 {
            return Err(Error::InvalidState(format!(
                "basis label {bits} does not fit in {n_qubits} qubits"
            )));
        }
        Ok(Self {
            bits,
            n_qubits: n_qubits as u8,
        })
    }

    /// Parses a ket string such as `"01100"` (optionally wrapped in `|…⟩`).
    pub fn from_ket(ket: &str) -> Result<Self> {
        let body = ket
            .trim()
            .trim_start_matches('|')
            .trim_end_matches('⟩')
            .trim_end_matches('>');
        check_width(body.len())?;
        let mut bits = 0u64;
        for c in body.chars() {
            bits <<= 1;
            match c {
                '0' => {}
                '1' => bits |= 1,
                other => {
                    return Err(Error::InvalidState(format!(
                        "unexpected character {other:?} in ket {ket:?}"
                    )))
                }
            }
        }
        Self::new(bits, body.len())
    }

    pub fn bits(self) -> u64 {
        self.bits
    }

    pub fn n_qubits(self) -> usize {
        self.n_qubits as usize
    }

    /// Value of qubit `q`.
    pub fn bit(self, q: usize) -> bool {
        self.bits & qubit_mask(q, self.n_qubits()) != 0
    }

    pub fn ket(self) -> String {
        ket_string(self.bits, self.n_qubits())
    }
}

impl fmt::Display for BasisState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.ket())
    }
}

pub fn ket_string(bits: u64, n_qubits: usize) -> String {
    (0..n_qubits)
        .map(|q| if bits & qubit_mask(q, n_qubits) != 0 { '1' } else { '0' })
        .collect()
}

/// A normalized state stored as a map from basis label to amplitude.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseState {
    n_qubits: usize,
    terms: BTreeMap<u64, Complex64>,
}

impl SparseState {
    /// Builds a state from `(label, amplitude)` pairs. Rejects repeated labels,
    /// labels wider than the register, and non-normalized input. Terms with
    /// negligible amplitude are dropped.
    pub fn new<I>(n_qubits: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (u64, Complex64)>,
    {
        check_width(n_qubits)?;
        let mut map = BTreeMap::new();
        for (bits, amp) in terms {
            BasisState::new(bits, n_qubits)?;
            if !amp.re.is_finite() || !amp.im.is_finite() {
                return Err(Error::InvalidState(format!(
                    "non-finite amplitude on {}",
                    ket_string(bits, n_qubits)
                )));
            }
            if map.insert(bits, amp).is_some() {
                return Err(Error::InvalidState(format!(
                    "basis state {} listed twice",
                    ket_string(bits, n_qubits)
                )));
            }
        }
        map.retain(|_, a| a.norm() >= ZERO_AMPLITUDE);
        let norm: f64 = map.values().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::InvalidState(format!("squared norm {norm} is not 1")));
        }
        Ok(Self { n_qubits, terms: map })
    }

    /// A single basis state with amplitude one.
    pub fn basis(n_qubits: usize, bits: u64) -> Result<Self> {
        Self::new(n_qubits, [(bits, Complex64::new(1.0, 0.0))])
    }

    /// Uniform real superposition over `support`.
    pub fn uniform(n_qubits: usize, support: &[u64]) -> Result<Self> {
        if support.is_empty() {
            return Err(Error::InvalidState("empty support".into()));
        }
        let amp = Complex64::new(1.0 / (support.len() as f64).sqrt(), 0.0);
        Self::new(n_qubits, support.iter().map(|&b| (b, amp)))
    }

    /// Rebuilds a state from terms that are already known to be valid, such as
    /// the relabeled terms of another state.
    pub(crate) fn from_map_unchecked(n_qubits: usize, terms: BTreeMap<u64, Complex64>) -> Self {
        Self { n_qubits, terms }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    /// Number of stored basis states.
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in ascending basis order.
    pub fn terms(&self) -> impl Iterator<Item = (BasisState, Complex64)> + '_ {
        let n = self.n_qubits as u8;
        self.terms
            .iter()
            .map(move |(&bits, &amp)| (BasisState { bits, n_qubits: n }, amp))
    }

    /// Support labels in ascending order.
    pub fn support(&self) -> impl Iterator<Item = u64> + '_ {
        self.terms.keys().copied()
    }

    pub(crate) fn raw_terms(&self) -> &BTreeMap<u64, Complex64> {
        &self.terms
    }

    pub fn amplitude(&self, bits: u64) -> Complex64 {
        self.terms.get(&bits).copied().unwrap_or_default()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.terms.values().map(|a| a.norm_sqr()).sum()
    }

    /// The only label of a basis state, or `None` for a superposition.
    pub fn as_basis(&self) -> Option<u64> {
        match self.terms.len() {
            1 => self.terms.keys().next().copied(),
            _ => None,
        }
    }
}

impl fmt::Display for SparseState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (b, a)) in self.terms().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            write!(f, "({:.6}{:+.6}i)|{}⟩", a.re, a.im, b.ket())?;
        }
        Ok(())
    }
}
