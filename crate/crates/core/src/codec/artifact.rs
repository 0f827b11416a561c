//! File formats. All writers go through [`write_atomic`], so a reader never
//! sees a partially written artifact.

use std::fs;
use std::io::Write;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{parse_circuit, serialize_circuit};
use crate::circuit::Circuit;
use crate::error::{Error, Result};
use crate::sim::TrainingSet;
use crate::state::{BasisState, SparseState};

pub const CIRCUIT_HEADER: &str = "revcomp-circuit v1";
const TRAINING_FORMAT: &str = "revcomp-training";
const TRAINING_VERSION: u32 = 1;

pub const SUMMARY_HEADER: [&str; 9] = [
    "family",
    "n_qubits",
    "trash_requested",
    "success",
    "generations",
    "x_count",
    "cx_count",
    "ccx_count",
    "seed",
];

/// Writes `bytes` to a temporary file beside `path` and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

// ---- circuits ------------------------------------------------------------

pub fn format_circuit_file(circuit: &Circuit) -> String {
    format!(
        "{CIRCUIT_HEADER}\nn_qubits={}\n{}\n",
        circuit.n_qubits(),
        serialize_circuit(circuit)
    )
}

pub fn parse_circuit_file(text: &str) -> Result<Circuit> {
    let mut lines = text.lines();
    match lines.next() {
        Some(CIRCUIT_HEADER) => {}
        Some(h) if h.starts_with("revcomp-circuit ") => {
            return Err(Error::Artifact(format!("unsupported circuit file version {h:?}")))
        }
        _ => return Err(Error::Artifact("missing circuit file header".into())),
    }
    let n = lines
        .next()
        .and_then(|l| l.strip_prefix("n_qubits="))
        .and_then(|v| v.trim().parse::<usize>().ok())
        .ok_or_else(|| Error::Artifact("expected n_qubits=<n> on line 2".into()))?;
    let body = lines.next().unwrap_or("");
    if lines.any(|l| !l.trim().is_empty()) {
        return Err(Error::Artifact("trailing content after circuit body".into()));
    }
    parse_circuit(body, n)
}

pub fn write_circuit(path: &Path, circuit: &Circuit) -> Result<()> {
    write_atomic(path, format_circuit_file(circuit).as_bytes())
}

pub fn read_circuit(path: &Path) -> Result<Circuit> {
    parse_circuit_file(&fs::read_to_string(path)?)
}

// ---- training sets -------------------------------------------------------

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TrainingFile {
    format: String,
    version: u32,
    n_qubits: usize,
    states: Vec<StateRecord>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StateRecord {
    weight: f64,
    terms: Vec<TermRecord>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TermRecord {
    ket: String,
    re: f64,
    im: f64,
}

pub fn format_training_file(training: &TrainingSet) -> String {
    let file = TrainingFile {
        format: TRAINING_FORMAT.into(),
        version: TRAINING_VERSION,
        n_qubits: training.n_qubits(),
        states: training
            .states()
            .iter()
            .zip(training.weights())
            .map(|(s, &weight)| StateRecord {
                weight,
                terms: s
                    .terms()
                    .map(|(b, a)| TermRecord {
                        ket: b.ket(),
                        re: a.re,
                        im: a.im,
                    })
                    .collect(),
            })
            .collect(),
    };
    let mut text = serde_json::to_string_pretty(&file).expect("training set serializes");
    text.push('\n');
    text
}

pub fn parse_training_file(text: &str) -> Result<TrainingSet> {
    let file: TrainingFile = serde_json::from_str(text).map_err(|e| Error::Artifact(format!("training set: {e}")))?;
    if file.format != TRAINING_FORMAT {
        return Err(Error::Artifact(format!(
            "not a training set file: format {:?}",
            file.format
        )));
    }
    if file.version != TRAINING_VERSION {
        return Err(Error::Artifact(format!(
            "unsupported training set version {}",
            file.version
        )));
    }
    let mut states = Vec::with_capacity(file.states.len());
    let mut weights = Vec::with_capacity(file.states.len());
    for rec in file.states {
        let mut terms = Vec::with_capacity(rec.terms.len());
        for t in rec.terms {
            let b = BasisState::from_ket(&t.ket)?;
            if b.n_qubits() != file.n_qubits {
                return Err(Error::DimensionMismatch {
                    expected: file.n_qubits,
                    found: b.n_qubits(),
                });
            }
            terms.push((b.bits(), Complex64::new(t.re, t.im)));
        }
        states.push(SparseState::new(file.n_qubits, terms)?);
        weights.push(rec.weight);
    }
    TrainingSet::new(states, weights)
}

pub fn write_training(path: &Path, training: &TrainingSet) -> Result<()> {
    write_atomic(path, format_training_file(training).as_bytes())
}

pub fn read_training(path: &Path) -> Result<TrainingSet> {
    parse_training_file(&fs::read_to_string(path)?)
}

// ---- traces --------------------------------------------------------------

/// One generation of a search run. `evaluations` counts fitness evaluations so
/// far in the run; `support_snapshot` holds the best candidate's transformed
/// support (ket strings) for each training state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceRecord {
    pub generation: usize,
    pub best_fitness: f64,
    pub best_gate_count: usize,
    pub population_size: usize,
    pub evaluations: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stage: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<usize>,
    #[serde(default)]
    pub restart: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub support_snapshot: Option<Vec<Vec<String>>>,
}

pub fn format_trace(records: &[TraceRecord]) -> String {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r).expect("trace record serializes"));
        out.push('\n');
    }
    out
}

pub fn parse_trace(text: &str) -> Result<Vec<TraceRecord>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| serde_json::from_str(l).map_err(|e| Error::Artifact(format!("trace line {}: {e}", i + 1))))
        .collect()
}

pub fn write_trace(path: &Path, records: &[TraceRecord]) -> Result<()> {
    write_atomic(path, format_trace(records).as_bytes())
}

pub fn read_trace(path: &Path) -> Result<Vec<TraceRecord>> {
    parse_trace(&fs::read_to_string(path)?)
}

// ---- summaries -----------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SummaryRow {
    pub family: String,
    pub n_qubits: usize,
    pub outcome: RowOutcome,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RowOutcome {
    /// Cell reduces to a smaller problem and was not run; written as `-`.
    NotApplicable,
    Ran {
        trash_requested: usize,
        success: bool,
        generations: usize,
        x_count: usize,
        cx_count: usize,
        ccx_count: usize,
        seed: u64,
    },
}

pub fn format_summary(rows: &[SummaryRow]) -> String {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(SUMMARY_HEADER).expect("in-memory write");
    for row in rows {
        let mut rec = vec![row.family.clone(), row.n_qubits.to_string()];
        match &row.outcome {
            RowOutcome::NotApplicable => rec.extend(std::iter::repeat_n("-".to_string(), 7)),
            RowOutcome::Ran {
                trash_requested,
                success,
                generations,
                x_count,
                cx_count,
                ccx_count,
                seed,
            } => {
                rec.extend([
                    trash_requested.to_string(),
                    success.to_string(),
                    generations.to_string(),
                    x_count.to_string(),
                    cx_count.to_string(),
                    ccx_count.to_string(),
                    seed.to_string(),
                ]);
            }
        }
        w.write_record(&rec).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii csv")
}

pub fn parse_summary(text: &str) -> Result<Vec<SummaryRow>> {
    let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
    let header = r
        .headers()
        .map_err(|e| Error::Artifact(format!("summary header: {e}")))?;
    if header.iter().ne(SUMMARY_HEADER.iter().copied()) {
        return Err(Error::Artifact(format!("unexpected summary header {:?}", header)));
    }
    let bad = |line: usize, what: &str| Error::Artifact(format!("summary row {line}: bad {what}"));
    let mut rows = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| Error::Artifact(format!("summary row {}: {e}", i + 1)))?;
        let field = |k: usize| rec.get(k).unwrap_or("");
        let num = |k: usize| field(k).parse::<usize>().map_err(|_| bad(i + 1, SUMMARY_HEADER[k]));
        let n_qubits = num(1)?;
        let outcome = if (2..9).all(|k| field(k) == "-") {
            RowOutcome::NotApplicable
        } else {
            RowOutcome::Ran {
                trash_requested: num(2)?,
                success: field(3).parse().map_err(|_| bad(i + 1, "success"))?,
                generations: num(4)?,
                x_count: num(5)?,
                cx_count: num(6)?,
                ccx_count: num(7)?,
                seed: field(8).parse().map_err(|_| bad(i + 1, "seed"))?,
            }
        };
        rows.push(SummaryRow {
            family: field(0).to_string(),
            n_qubits,
            outcome,
        });
    }
    Ok(rows)
}

pub fn write_summary(path: &Path, rows: &[SummaryRow]) -> Result<()> {
    write_atomic(path, format_summary(rows).as_bytes())
}

pub fn read_summary(path: &Path) -> Result<Vec<SummaryRow>> {
    parse_summary(&fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::Gate;

    #[test]
    fn circuit_file_layout() {
        let c = Circuit::from_gates(3, vec![Gate::cx(1, 0), Gate::ccx(2, 0, 1)]).unwrap();
        let text = format_circuit_file(&c);
        assert_eq!(text, "revcomp-circuit v1\nn_qubits=3\n(1, 0) (2, 0, 1)\n");
        assert_eq!(parse_circuit_file(&text).unwrap(), c);
    }

    #[test]
    fn circuit_file_errors() {
        assert!(matches!(
            parse_circuit_file("revcomp-circuit v2\nn_qubits=3\n(0)\n"),
            Err(Error::Artifact(_))
        ));
        assert!(matches!(parse_circuit_file("hello\n"), Err(Error::Artifact(_))));
        assert!(matches!(
            parse_circuit_file("revcomp-circuit v1\nqubits=3\n(0)\n"),
            Err(Error::Artifact(_))
        ));
        assert!(matches!(
            parse_circuit_file("revcomp-circuit v1\nn_qubits=2\n(2)\n"),
            Err(Error::Parse(_))
        ));
        // empty circuit: body line may be blank or missing
        assert!(parse_circuit_file("revcomp-circuit v1\nn_qubits=2\n\n")
            .unwrap()
            .is_empty());
        assert!(parse_circuit_file("revcomp-circuit v1\nn_qubits=2\n")
            .unwrap()
            .is_empty());
    }

    #[test]
    fn training_file_roundtrip_and_errors() {
        let s = SparseState::uniform(4, &[2, 3, 5, 7, 11, 13]).unwrap();
        let t = TrainingSet::uniform(vec![s, SparseState::basis(4, 9).unwrap()]).unwrap();
        let text = format_training_file(&t);
        assert_eq!(parse_training_file(&text).unwrap(), t);

        let wrong_width = text.replacen("\"0010\"", "\"010\"", 1);
        assert!(matches!(
            parse_training_file(&wrong_width),
            Err(Error::DimensionMismatch { .. })
        ));
        let wrong_version = text.replacen("\"version\": 1", "\"version\": 7", 1);
        assert!(matches!(parse_training_file(&wrong_version), Err(Error::Artifact(_))));
        assert!(parse_training_file("{}").is_err());
    }

    #[test]
    fn one_generation_trace() {
        let rec = TraceRecord {
            generation: 0,
            best_fitness: 0.75,
            best_gate_count: 3,
            population_size: 50,
            evaluations: 50,
            stage: None,
            target: None,
            restart: 0,
            support_snapshot: None,
        };
        let text = format_trace(std::slice::from_ref(&rec));
        assert_eq!(text.lines().count(), 1);
        let back = parse_trace(&text).unwrap();
        assert_eq!(back, vec![rec]);
        assert_eq!(back[0].generation, 0);
        assert!(parse_trace("{\"generation\": 1}\n").is_err());
    }

    #[test]
    fn empty_summary_has_header() {
        let text = format_summary(&[]);
        assert_eq!(
            text,
            "family,n_qubits,trash_requested,success,generations,x_count,cx_count,ccx_count,seed\n"
        );
        assert!(parse_summary(&text).unwrap().is_empty());
    }

    #[test]
    fn summary_rows_roundtrip() {
        let rows = vec![
            SummaryRow {
                family: "ghz".into(),
                n_qubits: 4,
                outcome: RowOutcome::Ran {
                    trash_requested: 3,
                    success: true,
                    generations: 12,
                    x_count: 0,
                    cx_count: 3,
                    ccx_count: 1,
                    seed: 7,
                },
            },
            SummaryRow {
                family: "m_particle_3".into(),
                n_qubits: 5,
                outcome: RowOutcome::NotApplicable,
            },
        ];
        let text = format_summary(&rows);
        assert!(text.ends_with("m_particle_3,5,-,-,-,-,-,-,-\n"));
        assert_eq!(parse_summary(&text).unwrap(), rows);
        assert!(parse_summary("a,b\n").is_err());
    }

    #[test]
    fn atomic_write_replaces_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("nested/c.rvc");
        write_atomic(&p, b"one").unwrap();
        write_atomic(&p, b"two").unwrap();
        assert_eq!(fs::read(&p).unwrap(), b"two");
        assert_eq!(fs::read_dir(p.parent().unwrap()).unwrap().count(), 1);
    }
}
