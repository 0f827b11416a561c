//! Benchmark state families and their compression targets.
//!
//! Unary and m-particle families train on each basis state separately; GHZ,
//! prime and random-support families train on one superposition state.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sim::TrainingSet;
use crate::state::{qubit_mask, SparseState, MAX_QUBITS};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyKind {
    Unary,
    Ghz,
    RandomSupport,
    Prime,
    MParticle,
}

impl FamilyKind {
    pub fn as_str(self) -> &'static str {
        match self {
            FamilyKind::Unary => "unary",
            FamilyKind::Ghz => "ghz",
            FamilyKind::RandomSupport => "random_support",
            FamilyKind::Prime => "prime",
            FamilyKind::MParticle => "m_particle",
        }
    }
}

impl fmt::Display for FamilyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FamilyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "unary" => FamilyKind::Unary,
            "ghz" => FamilyKind::Ghz,
            "random_support" | "random" => FamilyKind::RandomSupport,
            "prime" => FamilyKind::Prime,
            "m_particle" => FamilyKind::MParticle,
            other => return Err(Error::InvalidFamily(format!("unknown family {other:?}"))),
        })
    }
}

/// A family member to generate. `m` is used only by m-particle states;
/// `support_size` and `seed` only by random-support states.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilySpec {
    pub kind: FamilyKind,
    pub n_qubits: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub support_size: Option<usize>,
    #[serde(default)]
    pub seed: u64,
}

impl FamilySpec {
    pub fn new(kind: FamilyKind, n_qubits: usize) -> Self {
        Self {
            kind,
            n_qubits,
            m: None,
            support_size: None,
            seed: 0,
        }
    }

    pub fn unary(n: usize) -> Self {
        Self::new(FamilyKind::Unary, n)
    }

    pub fn ghz(n: usize) -> Self {
        Self::new(FamilyKind::Ghz, n)
    }

    pub fn prime(n: usize) -> Self {
        Self::new(FamilyKind::Prime, n)
    }

    pub fn m_particle(n: usize, m: usize) -> Self {
        Self {
            m: Some(m),
            ..Self::new(FamilyKind::MParticle, n)
        }
    }

    pub fn random_support(n: usize, support_size: usize, seed: u64) -> Self {
        Self {
            support_size: Some(support_size),
            seed,
            ..Self::new(FamilyKind::RandomSupport, n)
        }
    }

    /// Name used in summaries; m-particle families carry their particle count.
    pub fn label(&self) -> String {
        match (self.kind, self.m) {
            (FamilyKind::MParticle, Some(m)) => format!("m_particle_{m}"),
            (kind, _) => kind.to_string(),
        }
    }

    /// An m-particle spec with `n/2 < m <= n`. Complementing every bit maps it
    /// onto the `n - m` particle problem, so it is never run.
    pub fn is_complement_equivalent(&self) -> bool {
        self.kind == FamilyKind::MParticle && matches!(self.m, Some(m) if 2 * m > self.n_qubits && m <= self.n_qubits)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n_qubits;
        let invalid = |msg: String| Err(Error::InvalidFamily(msg));
        if n > MAX_QUBITS {
            return invalid(format!("{n} qubits exceeds the limit of {MAX_QUBITS}"));
        }
        match self.kind {
            FamilyKind::Unary | FamilyKind::Ghz | FamilyKind::Prime if n < 2 => {
                invalid(format!("{} states need at least 2 qubits", self.kind))
            }
            FamilyKind::MParticle => {
                let Some(m) = self.m else {
                    return invalid("m_particle requires a particle count m".into());
                };
                if self.is_complement_equivalent() {
                    return invalid(format!(
                        "{m}-particle states on {n} qubits are the bit complement of the {}-particle problem; use --m {}",
                        n - m,
                        n - m
                    ));
                }
                if m == 0 || 2 * m > n {
                    return invalid(format!("m_particle requires 1 <= m <= n/2, got m={m}, n={n}"));
                }
                Ok(())
            }
            FamilyKind::RandomSupport => {
                if n == 0 || n >= MAX_QUBITS {
                    return invalid(format!("random_support requires 1 <= n < {MAX_QUBITS}"));
                }
                let k = self.support_size.unwrap_or(n);
                if k == 0 || k as u128 > 1u128 << n {
                    return invalid(format!("support size {k} must lie in 1..=2^{n}"));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    pub fn generate(&self) -> Result<TrainingSet> {
        self.validate()?;
        let n = self.n_qubits;
        match self.kind {
            FamilyKind::Unary => gen_unary(n),
            FamilyKind::Ghz => gen_ghz(n),
            FamilyKind::Prime => gen_prime(n),
            FamilyKind::MParticle => gen_m_particle(n, self.m.unwrap_or(1)),
            FamilyKind::RandomSupport => gen_random_support(n, self.support_size.unwrap_or(n), self.seed),
        }
    }
}

impl fmt::Display for FamilySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} n={}", self.kind, self.n_qubits)?;
        if let Some(m) = self.m {
            write!(f, " m={m}")?;
        }
        if self.kind == FamilyKind::RandomSupport {
            write!(
                f,
                " support={} seed={}",
                self.support_size.unwrap_or(self.n_qubits),
                self.seed
            )?;
        }
        Ok(())
    }
}

fn basis_set(n: usize, labels: impl IntoIterator<Item = u64>) -> Result<TrainingSet> {
    let states = labels
        .into_iter()
        .map(|b| SparseState::basis(n, b))
        .collect::<Result<Vec<_>>>()?;
    TrainingSet::uniform(states)
}

/// One basis state per qubit, with only that qubit set.
pub fn gen_unary(n: usize) -> Result<TrainingSet> {
    FamilySpec::unary(n).validate()?;
    basis_set(n, (0..n).map(|q| qubit_mask(q, n)))
}

/// The single state (|0…0⟩ + |1…1⟩)/√2.
pub fn gen_ghz(n: usize) -> Result<TrainingSet> {
    FamilySpec::ghz(n).validate()?;
    let all = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    TrainingSet::uniform(vec![SparseState::uniform(n, &[0, all])?])
}

/// Uniform superposition over every prime below 2^n.
pub fn gen_prime(n: usize) -> Result<TrainingSet> {
    FamilySpec::prime(n).validate()?;
    if n > 30 {
        return Err(Error::InvalidFamily(format!(
            "prime states are limited to 30 qubits, got {n}"
        )));
    }
    let primes: Vec<u64> = primes_below(1usize << n).into_iter().map(|p| p as u64).collect();
    TrainingSet::uniform(vec![SparseState::uniform(n, &primes)?])
}

/// Every Hamming-weight-`m` basis state as its own training state, ordered by
/// descending label (`11000, 10100, …, 00011` for n=5, m=2).
pub fn gen_m_particle(n: usize, m: usize) -> Result<TrainingSet> {
    FamilySpec::m_particle(n, m).validate()?;
    let mut labels = weight_m_labels(n, m);
    labels.reverse();
    basis_set(n, labels)
}

/// Uniform superposition over `support_size` distinct labels sampled without
/// replacement. Sampling uses Floyd's algorithm driven by ChaCha8 seeded with
/// `seed`, so a seed names the same support on every platform.
pub fn gen_random_support(n: usize, support_size: usize, seed: u64) -> Result<TrainingSet> {
    FamilySpec::random_support(n, support_size, seed).validate()?;
    let universe = 1u64 << n;
    let k = support_size as u64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut chosen = BTreeSet::new();
    for j in universe - k..universe {
        let t = rng.gen_range(0..=j);
        if !chosen.insert(t) {
            chosen.insert(j);
        }
    }
    let support: Vec<u64> = chosen.into_iter().collect();
    TrainingSet::uniform(vec![SparseState::uniform(n, &support)?])
}

/// Ascending labels of Hamming weight `m` in an `n`-bit register.
fn weight_m_labels(n: usize, m: usize) -> Vec<u64> {
    let mut out = Vec::new();
    if m == 0 {
        out.push(0);
        return out;
    }
    if m > n || n > 63 {
        return out;
    }
    // Gosper's hack: next larger integer with the same popcount.
    let limit = 1u64 << n;
    let mut x = (1u64 << m) - 1;
    while x < limit {
        out.push(x);
        let c = x & x.wrapping_neg();
        let r = x + c;
        x = (((r ^ x) >> 2) / c) | r;
    }
    out
}

/// Sieve of Eratosthenes.
pub fn primes_below(limit: usize) -> Vec<usize> {
    if limit < 3 {
        return Vec::new();
    }
    let mut composite = vec![false; limit];
    let mut i = 2;
    while i * i < limit {
        if !composite[i] {
            for j in (i * i..limit).step_by(i) {
                composite[j] = true;
            }
        }
        i += 1;
    }
    (2..limit).filter(|&k| !composite[k]).collect()
}

/// Ordered trash qubits that a compression must clear.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompressionTarget {
    pub trash_qubits: Vec<usize>,
}

impl CompressionTarget {
    pub fn trash_count(&self) -> usize {
        self.trash_qubits.len()
    }
}

fn ceil_log2(u: usize) -> usize {
    if u <= 1 {
        0
    } else {
        (usize::BITS - (u - 1).leading_zeros()) as usize
    }
}

/// Largest number of qubits that can be cleared while keeping every union
/// support element distinct.
pub fn max_trash(training: &TrainingSet) -> usize {
    training.n_qubits() - ceil_log2(training.union_support().len()).min(training.n_qubits())
}

/// Leading-qubit target. With no request the maximum feasible trash count is used.
pub fn default_target(training: &TrainingSet, requested: Option<usize>) -> Result<CompressionTarget> {
    let max = max_trash(training);
    let count = requested.unwrap_or(max);
    if count > max {
        return Err(Error::Infeasible { requested: count, max });
    }
    Ok(CompressionTarget {
        trash_qubits: (0..count).collect(),
    })
}

/// Explicit trash qubits, checked for range, repetition, and feasibility.
pub fn explicit_target(training: &TrainingSet, trash_qubits: Vec<usize>) -> Result<CompressionTarget> {
    let n = training.n_qubits();
    for (i, &q) in trash_qubits.iter().enumerate() {
        if q >= n {
            return Err(Error::QubitOutOfRange { index: q, n_qubits: n });
        }
        if trash_qubits[..i].contains(&q) {
            return Err(Error::DuplicateQubit(q));
        }
    }
    let max = max_trash(training);
    if trash_qubits.len() > max {
        return Err(Error::Infeasible {
            requested: trash_qubits.len(),
            max,
        });
    }
    Ok(CompressionTarget { trash_qubits })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::BasisState;

    fn kets(t: &TrainingSet) -> Vec<String> {
        t.states()
            .iter()
            .flat_map(|s| s.terms().map(|(b, _)| b.ket()).collect::<Vec<_>>())
            .collect()
    }

    #[test]
    fn unary_states() {
        assert_eq!(kets(&gen_unary(4).unwrap()), vec!["1000", "0100", "0010", "0001"]);
        assert_eq!(kets(&gen_unary(2).unwrap()), vec!["10", "01"]);
        for n in 2..=10 {
            let t = gen_unary(n).unwrap();
            assert_eq!(t.union_support().len(), n);
            assert!(t.weights().iter().all(|&w| (w - 1.0 / n as f64).abs() < 1e-15));
        }
        assert!(gen_unary(1).is_err());
    }

    #[test]
    fn ghz_states() {
        let t = gen_ghz(2).unwrap();
        assert_eq!(kets(&t), vec!["00", "11"]);
        for n in 4..=8 {
            let t = gen_ghz(n).unwrap();
            let s = &t.states()[0];
            assert_eq!(s.len(), 2);
            for (_, a) in s.terms() {
                assert!((a.re - 0.5f64.sqrt()).abs() < 1e-15);
            }
            assert!((s.norm_sqr() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn prime_states_match_sieve() {
        let t = gen_prime(4).unwrap();
        assert_eq!(t.states()[0].support().collect::<Vec<_>>(), vec![2, 3, 5, 7, 11, 13]);
        assert!((t.states()[0].amplitude(13).re - 1.0 / 6f64.sqrt()).abs() < 1e-15);
        assert_eq!(gen_prime(5).unwrap().states()[0].len(), 11);
        assert_eq!(gen_prime(6).unwrap().states()[0].len(), 18);
        assert!(gen_prime(1).is_err());
    }

    #[test]
    fn sieve_against_trial_division() {
        let slow: Vec<usize> = (2..500).filter(|&k| (2..k).all(|d| k % d != 0)).collect();
        assert_eq!(primes_below(500), slow);
        assert!(primes_below(2).is_empty());
        assert_eq!(primes_below(3), vec![2]);
    }

    #[test]
    fn m_particle_states() {
        let t = gen_m_particle(5, 2).unwrap();
        assert_eq!(
            kets(&t),
            vec!["11000", "10100", "10010", "10001", "01100", "01010", "01001", "00110", "00101", "00011"]
        );
        assert_eq!(gen_m_particle(4, 2).unwrap().len(), 6);
        assert_eq!(gen_m_particle(6, 3).unwrap().len(), 20);
        for n in 2..=9 {
            assert_eq!(gen_m_particle(n, 1).unwrap(), gen_unary(n).unwrap());
        }
    }

    #[test]
    fn m_particle_rejections() {
        let err = gen_m_particle(5, 3).unwrap_err().to_string();
        assert!(err.contains("--m 2"), "{err}");
        assert!(FamilySpec::m_particle(5, 3).is_complement_equivalent());
        assert!(!FamilySpec::m_particle(6, 3).is_complement_equivalent());
        assert!(gen_m_particle(5, 0).is_err());
        assert!(gen_m_particle(5, 6).is_err());
    }

    #[test]
    fn random_support_properties() {
        let a = gen_random_support(6, 6, 42).unwrap();
        let b = gen_random_support(6, 6, 42).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, gen_random_support(6, 6, 43).unwrap());

        let t = gen_random_support(4, 4, 1).unwrap();
        let s = &t.states()[0];
        assert_eq!(s.len(), 4);
        for (_, amp) in s.terms() {
            assert!((amp.re - 0.5).abs() < 1e-15);
        }

        let full = gen_random_support(3, 8, 9).unwrap();
        assert_eq!(
            full.states()[0].support().collect::<Vec<_>>(),
            (0..8).collect::<Vec<_>>()
        );
        assert!(gen_random_support(3, 9, 0).is_err());
        assert!(gen_random_support(3, 0, 0).is_err());
    }

    #[test]
    fn random_support_is_pinned() {
        // Frozen output of ChaCha8 + Floyd; changes here break seed portability.
        let got: Vec<String> = gen_random_support(6, 6, 2022).unwrap().states()[0]
            .support()
            .map(|b| BasisState::new(b, 6).unwrap().ket())
            .collect();
        assert_eq!(got, ["000000", "010001", "010101", "100011", "100111", "111011"]);
        let got: Vec<String> = gen_random_support(8, 5, 7).unwrap().states()[0]
            .support()
            .map(|b| BasisState::new(b, 8).unwrap().ket())
            .collect();
        assert_eq!(got, ["00010101", "00100111", "00101010", "10110010", "10111001"]);
    }

    #[test]
    fn default_targets() {
        assert_eq!(
            default_target(&gen_unary(6).unwrap(), None).unwrap().trash_qubits,
            vec![0, 1, 2]
        );
        assert_eq!(
            default_target(&gen_m_particle(5, 2).unwrap(), None)
                .unwrap()
                .trash_qubits,
            vec![0]
        );
        for n in 2..=8 {
            assert_eq!(default_target(&gen_ghz(n).unwrap(), None).unwrap().trash_count(), n - 1);
            let unary = gen_unary(n).unwrap();
            assert_eq!(max_trash(&unary), n - ceil_log2(n));
        }
        assert!(matches!(
            default_target(&gen_unary(6).unwrap(), Some(4)),
            Err(Error::Infeasible { requested: 4, max: 3 })
        ));
        assert_eq!(
            default_target(&gen_prime(4).unwrap(), Some(1)).unwrap().trash_qubits,
            vec![0]
        );
    }

    #[test]
    fn explicit_targets() {
        let t = gen_unary(6).unwrap();
        assert_eq!(explicit_target(&t, vec![5, 2]).unwrap().trash_qubits, vec![5, 2]);
        assert!(explicit_target(&t, vec![6]).is_err());
        assert!(explicit_target(&t, vec![1, 1]).is_err());
        assert!(explicit_target(&t, vec![0, 1, 2, 3]).is_err());
    }

    #[test]
    fn ceil_log2_values() {
        assert_eq!(
            [1, 2, 3, 4, 5, 8, 9, 10, 20].map(ceil_log2),
            [0, 1, 2, 2, 3, 3, 4, 4, 5]
        );
    }
}
