//! Property checks shared by the `properties` and `acceptance` targets. Each
//! check runs a fixed number of cases from a deterministic generator.

#![allow(dead_code)]

use std::collections::BTreeSet;
use std::path::Path;

use num_complex::Complex64;
use proptest::prelude::*;
use proptest::sample::subsequence;
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestRng, TestRunner};

use revcomp::codec::{format_circuit_file, parse_circuit, parse_circuit_file, serialize_circuit};
use revcomp::compressor::{decode, encode};
use revcomp::families::{default_target, FamilySpec};
use revcomp::sim::{apply_circuit, apply_gate, is_bijection, permutation_table};
use revcomp::{ea_disentangle, Circuit, EAParams, Gate, SparseState};

pub type Check = fn() -> Result<(), String>;

/// Every property check, by name.
pub const ALL: [(&str, Check); 9] = [
    (
        "support and amplitude conservation (1000 pairs)",
        support_and_amplitudes_conserved,
    ),
    ("codec roundtrip (1000 circuits)", codec_roundtrip),
    ("permutation table bijectivity (200 circuits)", tables_are_bijections),
    ("sparse vs dense oracle (n <= 8)", sparse_matches_dense),
    ("gates are self-inverse", gates_self_inverse),
    ("inverse circuit identity", inverse_circuit_identity),
    ("search best fitness monotone (20 runs)", best_fitness_monotone),
    ("decode inverts encode", decode_inverts_encode),
    ("byte-identical artifacts for equal seeds", identical_artifacts),
];

fn run<S: Strategy>(
    cases: u32,
    strategy: S,
    test: impl Fn(S::Value) -> Result<(), TestCaseError>,
) -> Result<(), String> {
    let config = Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    };
    let mut runner = TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha));
    runner.run(&strategy, test).map_err(|e| e.to_string())
}

fn gate(n: usize) -> impl Strategy<Value = Gate> {
    (1..=n.min(3))
        .prop_flat_map(move |k| subsequence((0..n).collect::<Vec<_>>(), k).prop_shuffle())
        .prop_map(|q| Gate::from_qubits(&q).unwrap())
}

fn circuit_on(n: usize, max_len: usize) -> impl Strategy<Value = Circuit> {
    prop::collection::vec(gate(n), 0..=max_len).prop_map(move |g| Circuit::from_gates(n, g).unwrap())
}

fn circuit(max_n: usize, max_len: usize) -> impl Strategy<Value = Circuit> {
    (1..=max_n).prop_flat_map(move |n| circuit_on(n, max_len))
}

fn state_on(n: usize) -> impl Strategy<Value = SparseState> {
    let dim = 1u64 << n;
    let max_support = (dim as usize).min(12);
    prop::collection::btree_set(0..dim, 1..=max_support)
        .prop_flat_map(|labels| {
            let k = labels.len();
            (Just(labels), prop::collection::vec((0.05f64..1.0, -1.0f64..1.0), k))
        })
        .prop_map(move |(labels, raw)| {
            let amps: Vec<Complex64> = raw.iter().map(|&(r, im)| Complex64::new(r, im)).collect();
            let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
            SparseState::new(n, labels.into_iter().zip(amps.into_iter().map(|a| a / norm))).unwrap()
        })
}

fn circuit_and_state(max_n: usize, max_len: usize) -> impl Strategy<Value = (Circuit, SparseState)> {
    (1..=max_n).prop_flat_map(move |n| (circuit_on(n, max_len), state_on(n)))
}

fn sorted_amplitudes(s: &SparseState) -> Vec<(u64, u64)> {
    let mut v: Vec<(u64, u64)> = s.terms().map(|(_, a)| (a.re.to_bits(), a.im.to_bits())).collect();
    v.sort_unstable();
    v
}

pub fn support_and_amplitudes_conserved() -> Result<(), String> {
    run(1000, circuit_and_state(10, 30), |(c, s)| {
        let out = apply_circuit(&s, &c).unwrap();
        prop_assert_eq!(out.len(), s.len());
        prop_assert_eq!(sorted_amplitudes(&out), sorted_amplitudes(&s));
        prop_assert!((out.norm_sqr() - 1.0).abs() < 1e-12);
        Ok(())
    })
}

pub fn codec_roundtrip() -> Result<(), String> {
    run(1000, circuit(10, 40), |c| {
        let text = serialize_circuit(&c);
        let back = parse_circuit(&text, c.n_qubits()).unwrap();
        prop_assert_eq!(serialize_circuit(&back), text);
        prop_assert_eq!(back.len(), c.len());
        prop_assert_eq!(&parse_circuit_file(&format_circuit_file(&c)).unwrap(), &back);
        // Reordering within moments must not change the function.
        for bits in 0..(1u64 << c.n_qubits()).min(64) {
            prop_assert_eq!(back.apply_bits(bits), c.apply_bits(bits));
        }
        Ok(())
    })
}

pub fn tables_are_bijections() -> Result<(), String> {
    run(200, circuit(8, 40), |c| {
        let table = permutation_table(&c).unwrap();
        prop_assert!(is_bijection(&table));
        let image: BTreeSet<u64> = table.iter().copied().collect();
        prop_assert_eq!(image, (0..1u64 << c.n_qubits()).collect::<BTreeSet<_>>());
        Ok(())
    })
}

pub fn sparse_matches_dense() -> Result<(), String> {
    run(500, circuit_and_state(8, 30), |(c, s)| {
        let table = permutation_table(&c).unwrap();
        let out = apply_circuit(&s, &c).unwrap();
        for (b, amp) in s.terms() {
            prop_assert_eq!(out.amplitude(table[b.bits() as usize]), amp);
        }
        Ok(())
    })
}

pub fn gates_self_inverse() -> Result<(), String> {
    run(200, circuit_and_state(8, 10), |(c, s)| {
        for g in c.gates() {
            let twice = apply_gate(&apply_gate(&s, g).unwrap(), g).unwrap();
            prop_assert_eq!(&twice, &s);
        }
        Ok(())
    })
}

pub fn inverse_circuit_identity() -> Result<(), String> {
    run(200, circuit_and_state(8, 30), |(c, s)| {
        let there = apply_circuit(&s, &c).unwrap();
        prop_assert_eq!(&apply_circuit(&there, &c.inverse()).unwrap(), &s);
        let mut both = c.clone();
        both.concat(&c.inverse()).unwrap();
        let table = permutation_table(&both).unwrap();
        prop_assert!(table.iter().enumerate().all(|(i, &t)| t == i as u64));
        Ok(())
    })
}

pub fn best_fitness_monotone() -> Result<(), String> {
    let specs = [
        FamilySpec::ghz(5),
        FamilySpec::unary(5),
        FamilySpec::prime(5),
        FamilySpec::m_particle(5, 2),
        FamilySpec::random_support(5, 5, 9),
    ];
    for (i, spec) in specs.iter().enumerate() {
        let training = spec.generate().map_err(|e| e.to_string())?;
        for seed in 0..4u64 {
            let params = EAParams {
                max_generations: 60,
                restarts: 1,
                seed: seed * 31 + i as u64,
                ..EAParams::default()
            };
            let r = ea_disentangle(&training, 0, &params).map_err(|e| e.to_string())?;
            for w in r.trace.windows(2) {
                if w[0].restart == w[1].restart && w[1].best_fitness < w[0].best_fitness {
                    return Err(format!(
                        "{spec} seed {seed}: fitness fell at generation {}",
                        w[1].generation
                    ));
                }
            }
        }
    }
    Ok(())
}

pub fn decode_inverts_encode() -> Result<(), String> {
    for spec in [
        FamilySpec::unary(5),
        FamilySpec::ghz(5),
        FamilySpec::m_particle(5, 2),
        FamilySpec::prime(4),
    ] {
        let training = spec.generate().map_err(|e| e.to_string())?;
        let target = default_target(&training, None).map_err(|e| e.to_string())?;
        let plan = revcomp::CompressionPlan::new(
            training.clone(),
            target.clone(),
            EAParams {
                max_generations: 500,
                seed: 4,
                ..EAParams::default()
            },
        );
        let r = revcomp::compress(&plan).map_err(|e| e.to_string())?;
        if !r.success {
            return Err(format!("{spec}: compression failed"));
        }
        for s in training.states() {
            let compressed = encode(s, &r.full_circuit).map_err(|e| e.to_string())?;
            if &decode(&compressed, &r.full_circuit, &target).map_err(|e| e.to_string())? != s {
                return Err(format!("{spec}: decode(encode(s)) != s"));
            }
        }
    }
    Ok(())
}

/// All files under `root`, sorted by relative path.
pub fn tree_bytes(root: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.push((
                    p.strip_prefix(root).unwrap().display().to_string(),
                    std::fs::read(&p).unwrap(),
                ));
            }
        }
    }
    out.sort();
    out
}

/// Runs the CLI in-process and returns its exit code and stdout.
pub fn cli(args: &[&str]) -> (i32, String) {
    let mut buf = Vec::new();
    let code = revcomp::cli::run(std::iter::once("revcomp").chain(args.iter().copied()), &mut buf);
    (code, String::from_utf8(buf).unwrap())
}

pub fn identical_artifacts() -> Result<(), String> {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut bundles = Vec::new();
    for name in ["a", "b"] {
        let out = dir.path().join(name);
        let (code, _) = cli(&[
            "compress",
            "--family",
            "unary",
            "--n",
            "5",
            "--seed",
            "21",
            "--snapshots",
            "--out",
            out.to_str().unwrap(),
        ]);
        if code != 0 {
            return Err(format!("compress exited {code}"));
        }
        bundles.push(tree_bytes(&out));
    }
    if bundles[0] != bundles[1] {
        return Err("artifacts differ between equal-seed runs".into());
    }
    Ok(())
}
