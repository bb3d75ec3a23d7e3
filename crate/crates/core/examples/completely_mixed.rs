// Completely mixed two-qubit marginals: the pure bound equals `d_A d_B d_C = 8`
// and the maximally mixed joint state is an explicit witness.

use qmpb::qstate::{frobenius_distance, CMatrix};
use qmpb::{builtin, dykstra_feasibility, mixed_state_bound, pure_tripartite_bound, OracleConfig};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let instance = builtin("maximally_mixed_qubits")?;
    let ms = instance.marginals();
    let pure = pure_tripartite_bound(&ms[0].state, &ms[1].state)?;
    for t in &pure.entropy_terms {
        println!("{:+} x S({}) = {:.6}", t.coefficient, t.support.join(""), t.entropy_bits);
    }
    println!("pure bound {:.1}, purified bound {:.1}", pure.bound_value, mixed_state_bound(&ms[0].state, &ms[1].state)?.bound_value);

    let result = dykstra_feasibility(&instance, &OracleConfig::default())?;
    let witness = result.witness.expect("maximally mixed joint is feasible");
    let distance = frobenius_distance(witness.matrix(), &CMatrix::identity(8, 8).unscale(8.0));
    println!("witness found in {} iteration(s), distance to I/8: {distance:.2e}", result.iterations_used);
    assert_eq!(pure.m_max, 8);
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("completely mixed example");
}
