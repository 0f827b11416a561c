//! Algebraic properties of the simulator, codec and search.

mod common;

#[test]
fn support_and_amplitudes_are_conserved() {
    common::support_and_amplitudes_conserved().unwrap();
}

#[test]
fn codec_roundtrip() {
    common::codec_roundtrip().unwrap();
}

#[test]
fn permutation_tables_are_bijections() {
    common::tables_are_bijections().unwrap();
}

#[test]
fn sparse_simulation_matches_dense_table() {
    common::sparse_matches_dense().unwrap();
}

#[test]
fn gates_are_self_inverse() {
    common::gates_self_inverse().unwrap();
}

#[test]
fn inverse_circuit_undoes_circuit() {
    common::inverse_circuit_identity().unwrap();
}

#[test]
fn search_best_fitness_never_decreases() {
    common::best_fitness_monotone().unwrap();
}

#[test]
fn decode_inverts_encode() {
    common::decode_inverts_encode().unwrap();
}

#[test]
fn equal_seeds_give_identical_artifacts() {
    common::identical_artifacts().unwrap();
}
