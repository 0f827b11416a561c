//! Sequential compression: clear one trash qubit per stage, concatenate the
//! stage circuits, and verify the result.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, GateHistogram};
use crate::codec::{RowOutcome, SummaryRow, TraceRecord};
use crate::error::{Error, Result};
use crate::evolution::{ea_disentangle_guarded, EAParams};
use crate::families::{max_trash, CompressionTarget, FamilySpec};
use crate::sim::{apply_circuit, is_bijection, permutation_table, target_zero_mass, TrainingSet, MAX_TABLE_QUBITS};
use crate::state::{ket_string, qubits_mask, SparseState};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OrderStrategy {
    /// Trash qubits in the order given.
    #[default]
    Fixed,
    /// Next the remaining trash qubit with the most mass already on 0.
    Greedy,
}

#[derive(Clone, Debug)]
pub struct CompressionPlan {
    pub training: TrainingSet,
    pub target: CompressionTarget,
    pub ea_params: EAParams,
    pub order: OrderStrategy,
    /// How many times a failed stage may send the search back to redo the
    /// stage before it with a fresh seed.
    pub backtracks: usize,
}

pub const DEFAULT_BACKTRACKS: usize = 2;

impl CompressionPlan {
    pub fn new(training: TrainingSet, target: CompressionTarget, ea_params: EAParams) -> Self {
        Self {
            training,
            target,
            ea_params,
            order: OrderStrategy::Fixed,
            backtracks: DEFAULT_BACKTRACKS,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerificationReport {
    /// Per training state: every trash bit is 0 on every support element.
    pub trash_cleared: Vec<bool>,
    /// The circuit maps the union support to distinct labels.
    pub injective: bool,
    /// Sparse images agree with the dense permutation table, which is itself a
    /// bijection. `None` above the dense-table size limit.
    pub oracle_equivalent: Option<bool>,
    /// Input ket → output ket, for training sets made of basis states.
    pub mapping: Vec<(String, String)>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.trash_cleared.iter().all(|&b| b) && self.injective && self.oracle_equivalent != Some(false)
    }
}

#[derive(Clone, Debug)]
pub struct CompressionResult {
    /// Trash qubits in the order they were cleared.
    pub stage_qubits: Vec<usize>,
    pub stage_circuits: Vec<Circuit>,
    pub full_circuit: Circuit,
    pub success: bool,
    /// Trash qubit whose stage failed, if any.
    pub failed_qubit: Option<usize>,
    pub verification: VerificationReport,
    pub gate_histogram: GateHistogram,
    /// Generations summed over stages, restarts and redone stages.
    pub total_steps: usize,
    /// Fitness evaluations summed over stages and restarts.
    pub total_evaluations: u64,
    pub trace: Vec<TraceRecord>,
    pub target: CompressionTarget,
    pub seed: u64,
}

/// Seed for attempt `attempt` at stage `stage`. Restart seeds inside the
/// stage derive from it.
pub fn stage_seed(master: u64, stage: usize, attempt: usize) -> u64 {
    master
        .wrapping_add((stage as u64) << 32)
        .wrapping_add((attempt as u64) << 48)
}

/// A completed stage and what is needed to undo it.
struct Frame {
    before: TrainingSet,
    remaining_before: Vec<usize>,
    qubit: usize,
    circuit: Circuit,
}

fn pick_next(training: &TrainingSet, remaining: &[usize], order: OrderStrategy) -> Result<usize> {
    match order {
        OrderStrategy::Fixed => Ok(0),
        OrderStrategy::Greedy => {
            let mut best = (0, f64::NEG_INFINITY);
            for (i, &q) in remaining.iter().enumerate() {
                let mass: f64 = training
                    .states()
                    .iter()
                    .zip(training.weights())
                    .map(|(s, &w)| target_zero_mass(s, q).map(|m| w * m))
                    .sum::<Result<f64>>()?;
                if mass > best.1 {
                    best = (i, mass);
                }
            }
            Ok(best.0)
        }
    }
}

pub fn compress(plan: &CompressionPlan) -> Result<CompressionResult> {
    let training = &plan.training;
    let n = training.n_qubits();
    let max = max_trash(training);
    if plan.target.trash_count() > max {
        return Err(Error::Infeasible {
            requested: plan.target.trash_count(),
            max,
        });
    }
    plan.ea_params.validate()?;

    let mut current = training.clone();
    let mut remaining = plan.target.trash_qubits.clone();
    let mut frames: Vec<Frame> = Vec::new();
    let mut attempts = vec![0usize; remaining.len()];
    let mut backtracks_left = plan.backtracks;
    let mut trace = Vec::new();
    let mut total_steps = 0;
    let mut total_evaluations = 0;
    let mut failed_qubit = None;

    while !remaining.is_empty() {
        let stage = frames.len();
        let remaining_before = remaining.clone();
        let qubit = remaining.remove(pick_next(&current, &remaining, plan.order)?);
        let cleared: Vec<usize> = frames.iter().map(|f| f.qubit).collect();
        let seed = stage_seed(plan.ea_params.seed, stage, attempts[stage]);
        let params = EAParams {
            seed,
            ..plan.ea_params.clone()
        };
        let result = ea_disentangle_guarded(&current, qubit, &cleared, &params)?;
        total_steps += result.generations_used;
        total_evaluations += result.evaluations;
        trace.extend(result.trace.into_iter().map(|r| TraceRecord {
            stage: Some(stage),
            ..r
        }));
        if !result.success {
            if backtracks_left > 0 && !frames.is_empty() {
                // The previous stage's layout may leave no reachable solution.
                let prev = frames.pop().expect("non-empty");
                backtracks_left -= 1;
                current = prev.before;
                remaining = prev.remaining_before;
                attempts[stage - 1] += 1;
                continue;
            }
            failed_qubit = Some(qubit);
            break;
        }
        let next = current.transformed(&result.best.circuit)?;
        // Later stages must leave earlier trash qubits clear.
        let mask = qubits_mask(&cleared, n) | qubits_mask(&[qubit], n);
        debug_assert!(next.states().iter().all(|s| s.support().all(|b| b & mask == 0)));
        frames.push(Frame {
            before: std::mem::replace(&mut current, next),
            remaining_before,
            qubit,
            circuit: result.best.circuit,
        });
    }

    let stage_qubits: Vec<usize> = frames.iter().map(|f| f.qubit).collect();
    let stage_circuits: Vec<Circuit> = frames.into_iter().map(|f| f.circuit).collect();
    let mut full_circuit = Circuit::new(n)?;
    for c in &stage_circuits {
        full_circuit.concat(c)?;
    }
    let verification = verify(&full_circuit, training, &plan.target)?;
    let success = failed_qubit.is_none() && verification.passed();
    Ok(CompressionResult {
        stage_qubits,
        gate_histogram: full_circuit.histogram(),
        stage_circuits,
        full_circuit,
        success,
        failed_qubit,
        verification,
        total_steps,
        total_evaluations,
        trace,
        target: plan.target.clone(),
        seed: plan.ea_params.seed,
    })
}

pub fn verify(
    full_circuit: &Circuit,
    training: &TrainingSet,
    target: &CompressionTarget,
) -> Result<VerificationReport> {
    let n = training.n_qubits();
    if full_circuit.n_qubits() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: full_circuit.n_qubits(),
        });
    }
    if let Some(&q) = target.trash_qubits.iter().find(|&&q| q >= n) {
        return Err(Error::QubitOutOfRange { index: q, n_qubits: n });
    }
    let mask = qubits_mask(&target.trash_qubits, n);
    let outputs: Vec<SparseState> = training
        .states()
        .iter()
        .map(|s| apply_circuit(s, full_circuit))
        .collect::<Result<_>>()?;

    let trash_cleared = outputs.iter().map(|s| s.support().all(|b| b & mask == 0)).collect();

    let support = training.union_support();
    let images: BTreeSet<u64> = support.iter().map(|&b| full_circuit.apply_bits(b)).collect();
    let injective = images.len() == support.len();

    let oracle_equivalent = if n <= MAX_TABLE_QUBITS {
        let table = permutation_table(full_circuit)?;
        let agrees = training.states().iter().zip(&outputs).all(|(input, output)| {
            input
                .terms()
                .all(|(b, amp)| output.amplitude(table[b.bits() as usize]) == amp)
        });
        Some(agrees && is_bijection(&table))
    } else {
        None
    };

    let mapping = if training.is_basis_set() {
        training
            .states()
            .iter()
            .zip(&outputs)
            .map(|(i, o)| {
                let (a, b) = (i.as_basis().expect("basis set"), o.as_basis().expect("basis image"));
                (ket_string(a, n), ket_string(b, n))
            })
            .collect()
    } else {
        Vec::new()
    };

    Ok(VerificationReport {
        trash_cleared,
        injective,
        oracle_equivalent,
        mapping,
    })
}

/// Applies the circuit forward.
pub fn encode(state: &SparseState, full_circuit: &Circuit) -> Result<SparseState> {
    apply_circuit(state, full_circuit)
}

/// Inverts a compression. The input must have every trash qubit at 0.
pub fn decode(compressed: &SparseState, full_circuit: &Circuit, target: &CompressionTarget) -> Result<SparseState> {
    let n = compressed.n_qubits();
    if full_circuit.n_qubits() != n {
        return Err(Error::DimensionMismatch {
            expected: full_circuit.n_qubits(),
            found: n,
        });
    }
    for &q in &target.trash_qubits {
        if q >= n {
            return Err(Error::QubitOutOfRange { index: q, n_qubits: n });
        }
        let m = qubits_mask(&[q], n);
        if compressed.support().any(|b| b & m != 0) {
            return Err(Error::NonzeroTrash(q));
        }
    }
    apply_circuit(compressed, &full_circuit.inverse())
}

/// One summary row per spec. Complement-equivalent m-particle specs become `-`
/// rows whatever their result slot holds; every other spec needs a result.
pub fn summarize(specs: &[FamilySpec], results: &[Option<CompressionResult>]) -> Result<Vec<SummaryRow>> {
    if specs.len() != results.len() {
        return Err(Error::Config(format!(
            "{} specs but {} results",
            specs.len(),
            results.len()
        )));
    }
    specs
        .iter()
        .zip(results)
        .map(|(spec, result)| {
            let outcome = if spec.is_complement_equivalent() {
                RowOutcome::NotApplicable
            } else {
                let r = result
                    .as_ref()
                    .ok_or_else(|| Error::Config(format!("no result for {spec}")))?;
                row_outcome(r)
            };
            Ok(SummaryRow {
                family: spec.label(),
                n_qubits: spec.n_qubits,
                outcome,
            })
        })
        .collect()
}

pub fn row_outcome(r: &CompressionResult) -> RowOutcome {
    RowOutcome::Ran {
        trash_requested: r.target.trash_count(),
        success: r.success,
        generations: r.total_steps,
        x_count: r.gate_histogram.x,
        cx_count: r.gate_histogram.cx,
        ccx_count: r.gate_histogram.ccx,
        seed: r.seed,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::Gate;
    use crate::families::{default_target, gen_ghz, gen_m_particle, gen_unary};

    fn plan(training: TrainingSet, trash: Vec<usize>, seed: u64) -> CompressionPlan {
        CompressionPlan::new(
            training,
            CompressionTarget { trash_qubits: trash },
            EAParams {
                max_generations: 300,
                seed,
                ..EAParams::default()
            },
        )
    }

    #[test]
    fn ghz_compresses_to_one_qubit() {
        let r = compress(&plan(gen_ghz(4).unwrap(), vec![1, 2, 3], 3)).unwrap();
        assert!(r.success);
        assert_eq!(r.stage_circuits.len(), 3);
        assert_eq!(r.stage_qubits, vec![1, 2, 3]);
        let mut joined = Circuit::new(4).unwrap();
        for c in &r.stage_circuits {
            joined.concat(c).unwrap();
        }
        assert_eq!(joined, r.full_circuit);
        let out = encode(&gen_ghz(4).unwrap().states()[0], &r.full_circuit).unwrap();
        assert_eq!(out.support().collect::<Vec<_>>(), vec![0b0000, 0b1000]);
    }

    #[test]
    fn two_particle_mapping_is_a_relabeling() {
        let t = gen_m_particle(5, 2).unwrap();
        let r = compress(&plan(t, vec![0], 1)).unwrap();
        assert!(r.success);
        let v = &r.verification;
        assert_eq!(v.mapping.len(), 10);
        assert!(v.mapping.iter().all(|(_, out)| out.starts_with('0')));
        let images: BTreeSet<_> = v.mapping.iter().map(|(_, o)| o.clone()).collect();
        assert_eq!(images.len(), 10);
        assert_eq!(v.oracle_equivalent, Some(true));
    }

    #[test]
    fn already_clear_qubits_get_empty_stages() {
        let t = TrainingSet::uniform(vec![SparseState::uniform(3, &[0b000, 0b001]).unwrap()]).unwrap();
        let r = compress(&plan(t, vec![0, 1], 0)).unwrap();
        assert!(r.success);
        assert!(r.stage_circuits.iter().all(Circuit::is_empty));
        assert_eq!(r.total_steps, 0);
    }

    #[test]
    fn greedy_order_takes_easiest_first() {
        let t = TrainingSet::uniform(vec![SparseState::uniform(3, &[0b000, 0b100]).unwrap()]).unwrap();
        let mut p = plan(t, vec![0, 1], 4);
        p.order = OrderStrategy::Greedy;
        let r = compress(&p).unwrap();
        assert!(r.success);
        assert_eq!(r.stage_qubits, vec![1, 0]);
    }

    #[test]
    fn infeasible_plans_are_rejected() {
        let p = plan(gen_unary(4).unwrap(), vec![0, 1, 2], 0);
        assert!(matches!(compress(&p), Err(Error::Infeasible { requested: 3, max: 2 })));
    }

    #[test]
    fn stage_failure_is_reported() {
        let t = gen_unary(6).unwrap();
        let mut p = plan(t, vec![0, 1, 2], 0);
        p.ea_params.max_generations = 0;
        p.ea_params.restarts = 0;
        let r = compress(&p).unwrap();
        assert!(!r.success);
        assert!(r.failed_qubit.is_some());
        assert!(r.stage_circuits.len() < 3);
    }

    /// Number of times the trace steps back to an earlier stage.
    fn backtrack_count(r: &CompressionResult) -> usize {
        let stages: Vec<usize> = r.trace.iter().filter_map(|x| x.stage).collect();
        stages.windows(2).filter(|w| w[1] < w[0]).count()
    }

    #[test]
    fn failed_stages_backtrack_within_budget() {
        let mut seen_backtrack = false;
        for seed in 0..8 {
            let mut p = plan(gen_unary(6).unwrap(), vec![0, 1, 2], seed);
            p.ea_params.max_generations = 20;
            p.ea_params.restarts = 0;
            p.backtracks = 0;
            let r = compress(&p).unwrap();
            assert_eq!(backtrack_count(&r), 0);

            p.backtracks = 2;
            let r = compress(&p).unwrap();
            let k = backtrack_count(&r);
            assert!(k <= 2);
            let failed_stage = r.trace.last().and_then(|x| x.stage).unwrap();
            if !r.success && failed_stage > 0 {
                assert_eq!(k, 2, "seed {seed}");
            }
            assert_eq!(r.stage_circuits.len(), r.stage_qubits.len());
            if r.success {
                assert!(r.verification.passed());
            }
            seen_backtrack |= k > 0;
        }
        assert!(seen_backtrack);
    }

    #[test]
    fn verify_identity_and_broken_circuits() {
        let t = TrainingSet::uniform(vec![SparseState::uniform(3, &[0b000, 0b011]).unwrap()]).unwrap();
        let target = CompressionTarget { trash_qubits: vec![0] };
        let id = Circuit::new(3).unwrap();
        let v = verify(&id, &t, &target).unwrap();
        assert!(v.passed());
        assert!(v.mapping.is_empty());

        let broken = Circuit::from_gates(3, vec![Gate::x(0)]).unwrap();
        let v = verify(&broken, &t, &target).unwrap();
        assert_eq!(v.trash_cleared, vec![false]);
        assert!(v.injective);
        assert!(!v.passed());
        assert!(verify(&Circuit::new(4).unwrap(), &t, &target).is_err());
    }

    #[test]
    fn decode_inverts_encode() {
        let t = gen_unary(4).unwrap();
        let target = default_target(&t, None).unwrap();
        let r = compress(&plan(t.clone(), target.trash_qubits.clone(), 9)).unwrap();
        assert!(r.success);
        for s in t.states() {
            let z = encode(s, &r.full_circuit).unwrap();
            assert_eq!(&decode(&z, &r.full_circuit, &target).unwrap(), s);
        }
        let id = Circuit::new(4).unwrap();
        let s = SparseState::basis(4, 0b0011).unwrap();
        assert_eq!(decode(&s, &id, &target).unwrap(), s);
        let dirty = SparseState::basis(4, 0b0100).unwrap();
        assert!(matches!(decode(&dirty, &id, &target), Err(Error::NonzeroTrash(1))));
    }

    #[test]
    fn summary_rows() {
        let r = compress(&plan(gen_ghz(4).unwrap(), vec![1, 2, 3], 5)).unwrap();
        let specs = [FamilySpec::ghz(4), FamilySpec::m_particle(5, 3)];
        let rows = summarize(&specs, &[Some(r.clone()), None]).unwrap();
        assert_eq!(rows.len(), 2);
        assert!(matches!(
            rows[0].outcome,
            RowOutcome::Ran {
                success: true,
                trash_requested: 3,
                seed: 5,
                ..
            }
        ));
        assert_eq!(rows[1].outcome, RowOutcome::NotApplicable);
        assert_eq!(rows[1].family, "m_particle_3");
        assert!(summarize(&specs[..1], &[]).is_err());
        assert!(summarize(&[FamilySpec::ghz(4)], &[None]).is_err());
    }
}
