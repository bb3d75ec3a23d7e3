// Two-party reductions of a random pure three-qubit state usually pin it down:
// the search finds one solution, and the bound never falls below the count.

use qmpb::instances::{builtin_instance, Builtin};
use qmpb::{chain_bound, pure_solution_search, verify_against_bound, OracleConfig};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let config = OracleConfig { restarts: 16, ..OracleConfig::default() };
    for seed in 0..4 {
        let instance = builtin_instance(Builtin::HaarUnique(seed))?;
        let report = chain_bound(&instance)?;
        let solutions = pure_solution_search(&instance, &config)?;
        let ok = verify_against_bound(&instance, &solutions, &report)?;
        println!(
            "seed {seed}: bound {:.4} (m_max {}), found {} (residual {:.2e}), consistent: {ok}",
            report.bound_value,
            report.m_max,
            solutions.len(),
            solutions.per_state_residuals.first().copied().unwrap_or(f64::NAN)
        );
        assert!(ok && !solutions.is_empty());
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("uniqueness example");
}
