// Singlets on AB and on BC cannot both be reductions of one joint state.
//
// The pure bound gives `m ≤ 1/2`, the purified bound `m ≤ 1/4`, and neither
// numerical oracle finds a solution.

use qmpb::{builtin, dykstra_feasibility, mixed_state_bound, pure_solution_search, pure_tripartite_bound, OracleConfig};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let instance = builtin("singlet_monogamy")?;
    let ms = instance.marginals();

    let pure = pure_tripartite_bound(&ms[0].state, &ms[1].state)?;
    let mixed = mixed_state_bound(&ms[0].state, &ms[1].state)?;
    println!("pure bound:   2^{:.6} = {:.6}  (m_max {})", pure.exponent_bits, pure.bound_value, pure.m_max);
    println!("mixed bound:  2^{:.6} = {:.6}  (m_max {})", mixed.exponent_bits, mixed.bound_value, mixed.m_max);

    let config = OracleConfig { max_iterations: 2000, ..OracleConfig::default() };
    let feasibility = dykstra_feasibility(&instance, &config)?;
    println!(
        "alternating projections: {} after {} iterations (residual {:.3e})",
        feasibility.status.as_str(),
        feasibility.iterations_used,
        feasibility.residual
    );
    let solutions = pure_solution_search(&instance, &config)?;
    println!(
        "pure search: {} solutions, lowest objective {:.4}",
        solutions.len(),
        solutions.best_rejected_objective.unwrap_or(f64::NAN)
    );
    assert_eq!(pure.m_max, 0);
    assert!(solutions.is_empty());
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("singlet example");
}
