//! Tuple-string representation of circuits and the on-disk artifact formats.
//!
//! A gate is written as its qubit tuple, target first: `(t)`, `(t, c)` or
//! `(t, c1, c2)`. A circuit is the space-separated list of its gate tuples in
//! canonical order: gates are placed in the earliest moment after every
//! earlier gate that shares a qubit, then emitted moment by moment with
//! ascending target inside a moment.

mod artifact;

pub use artifact::{
    format_circuit_file, format_summary, format_trace, format_training_file, parse_circuit_file, parse_summary,
    parse_trace, parse_training_file, read_circuit, read_summary, read_trace, read_training, write_atomic,
    write_circuit, write_summary, write_trace, write_training, RowOutcome, SummaryRow, TraceRecord, CIRCUIT_HEADER,
    SUMMARY_HEADER,
};

use crate::circuit::{Circuit, Gate, GateKind};
use crate::error::{ParseError, ParseErrorKind};

/// ASAP moment index of every gate, in circuit order.
pub fn moment_schedule(circuit: &Circuit) -> Vec<usize> {
    let mut next_free = vec![0usize; circuit.n_qubits()];
    circuit
        .gates()
        .iter()
        .map(|g| {
            let m = g.qubits().map(|q| next_free[q]).max().unwrap_or(0);
            for q in g.qubits() {
                next_free[q] = m + 1;
            }
            m
        })
        .collect()
}

/// Gates in canonical (moment, target) order.
pub fn canonical_gates(circuit: &Circuit) -> Vec<Gate> {
    let moments = moment_schedule(circuit);
    let mut order: Vec<(usize, usize, Gate)> = circuit
        .gates()
        .iter()
        .zip(moments)
        .map(|(g, m)| (m, g.target(), *g))
        .collect();
    order.sort_by_key(|&(m, t, _)| (m, t));
    order.into_iter().map(|(_, _, g)| g).collect()
}

pub fn serialize_circuit(circuit: &Circuit) -> String {
    let mut out = String::with_capacity(circuit.len() * 10);
    for (i, g) in canonical_gates(circuit).iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        push_gate(&mut out, g);
    }
    out
}

fn push_gate(out: &mut String, g: &Gate) {
    use std::fmt::Write;
    let _ = write!(out, "{g}");
}

/// Parses a whitespace-separated list of gate tuples. Gate kind follows tuple
/// arity and gates are kept in token order.
pub fn parse_circuit(text: &str, n_qubits: usize) -> Result<Circuit, crate::error::Error> {
    let gates = Parser {
        src: text.as_bytes(),
        pos: 0,
        n_qubits,
    }
    .gates()?;
    Circuit::from_gates(n_qubits, gates)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    n_qubits: usize,
}

impl Parser<'_> {
    fn err(&self, position: usize, kind: ParseErrorKind) -> ParseError {
        ParseError { position, kind }
    }

    fn malformed(&self, msg: &str) -> ParseError {
        self.err(self.pos, ParseErrorKind::Malformed(msg.to_string()))
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn gates(mut self) -> Result<Vec<Gate>, ParseError> {
        let mut gates = Vec::new();
        loop {
            self.skip_ws();
            if self.peek().is_none() {
                return Ok(gates);
            }
            gates.push(self.tuple()?);
        }
    }

    fn tuple(&mut self) -> Result<Gate, ParseError> {
        let start = self.pos;
        if self.peek() != Some(b'(') {
            return Err(self.malformed("expected '('"));
        }
        self.pos += 1;
        let mut qubits = Vec::with_capacity(3);
        loop {
            self.skip_ws();
            qubits.push(self.integer()?);
            self.skip_ws();
            match self.peek() {
                Some(b',') => self.pos += 1,
                Some(b')') => {
                    self.pos += 1;
                    break;
                }
                Some(_) => return Err(self.malformed("expected ',' or ')'")),
                None => return Err(self.malformed("unterminated tuple")),
            }
        }
        if qubits.len() > 3 {
            return Err(self.err(start, ParseErrorKind::ArityTooLarge(qubits.len())));
        }
        for (i, &q) in qubits.iter().enumerate() {
            if qubits[..i].contains(&q) {
                return Err(self.err(start, ParseErrorKind::DuplicateQubit(q)));
            }
        }
        if let Some(&q) = qubits.iter().find(|&&q| q >= self.n_qubits) {
            return Err(self.err(
                start,
                ParseErrorKind::QubitOutOfRange {
                    index: q,
                    n_qubits: self.n_qubits,
                },
            ));
        }
        debug_assert!(GateKind::from_arity(qubits.len()).is_some());
        Ok(Gate::from_qubits(&qubits).expect("checked tuple"))
    }

    fn integer(&mut self) -> Result<usize, ParseError> {
        let start = self.pos;
        while matches!(self.peek(), Some(b'0'..=b'9')) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.malformed("expected a qubit index"));
        }
        std::str::from_utf8(&self.src[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| self.err(start, ParseErrorKind::Malformed("qubit index too large".into())))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;

    fn parse_err(text: &str, n: usize) -> ParseError {
        match parse_circuit(text, n) {
            Err(Error::Parse(e)) => e,
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn serialize_examples() {
        let c = Circuit::from_gates(3, vec![Gate::x(2)]).unwrap();
        assert_eq!(serialize_circuit(&c), "(2)");

        let c = Circuit::from_gates(3, vec![Gate::cx(1, 0), Gate::ccx(2, 0, 1)]).unwrap();
        assert_eq!(serialize_circuit(&c), "(1, 0) (2, 0, 1)");

        let a = Circuit::from_gates(2, vec![Gate::x(0), Gate::x(1)]).unwrap();
        let b = Circuit::from_gates(2, vec![Gate::x(1), Gate::x(0)]).unwrap();
        assert_eq!(serialize_circuit(&a), "(0) (1)");
        assert_eq!(serialize_circuit(&b), "(0) (1)");
    }

    #[test]
    fn schedule_is_asap() {
        let c = Circuit::from_gates(
            4,
            vec![Gate::cx(1, 0), Gate::x(3), Gate::cx(2, 1), Gate::x(0), Gate::cx(3, 2)],
        )
        .unwrap();
        assert_eq!(moment_schedule(&c), vec![0, 0, 1, 1, 2]);
        assert_eq!(serialize_circuit(&c), "(1, 0) (3) (0) (2, 1) (3, 2)");
        assert!(serialize_circuit(&Circuit::new(2).unwrap()).is_empty());
    }

    #[test]
    fn parse_examples() {
        let c = parse_circuit("(2)", 3).unwrap();
        assert_eq!(c.gates(), &[Gate::x(2)]);
        let c = parse_circuit("(1, 0) (2, 0, 1)", 3).unwrap();
        assert_eq!(c.gates(), &[Gate::cx(1, 0), Gate::ccx(2, 0, 1)]);
        let c = parse_circuit("  (1,0)\n(2 ,0,1 ) ", 3).unwrap();
        assert_eq!(c.len(), 2);
        assert!(parse_circuit("", 3).unwrap().is_empty());
    }

    #[test]
    fn parse_errors_are_distinct() {
        assert_eq!(parse_err("(0, 0)", 3).kind, ParseErrorKind::DuplicateQubit(0));
        assert_eq!(
            parse_err("(0) (0, 1, 2, 3)", 5),
            ParseError {
                position: 4,
                kind: ParseErrorKind::ArityTooLarge(4)
            }
        );
        assert_eq!(
            parse_err("(0) (3)", 3),
            ParseError {
                position: 4,
                kind: ParseErrorKind::QubitOutOfRange { index: 3, n_qubits: 3 }
            }
        );
        assert!(matches!(parse_err("()", 3).kind, ParseErrorKind::Malformed(_)));
        assert!(matches!(parse_err("(1", 3).kind, ParseErrorKind::Malformed(_)));
        assert!(matches!(parse_err("(1; 2)", 3).kind, ParseErrorKind::Malformed(_)));
        assert!(matches!(parse_err("1, 2", 3).kind, ParseErrorKind::Malformed(_)));
        assert!(matches!(parse_err("(-1)", 3).kind, ParseErrorKind::Malformed(_)));
    }

    #[test]
    fn reparse_keeps_canonical_string() {
        let c = Circuit::from_gates(4, vec![Gate::x(3), Gate::cx(0, 3), Gate::x(1), Gate::ccx(2, 0, 1)]).unwrap();
        let s = serialize_circuit(&c);
        let back = parse_circuit(&s, 4).unwrap();
        assert_eq!(serialize_circuit(&back), s);
        for b in 0..16 {
            assert_eq!(back.apply_bits(b), c.apply_bits(b));
        }
    }
}
