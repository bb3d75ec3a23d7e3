// GHZ reductions saturate the pure bound: `m_max = 2`. The marginals fix
// `|000⟩ + e^{iφ}|111⟩` for every φ, and the deflated search returns an orthogonal pair.

use qmpb::{builtin, chain_bound, pure_solution_search, verify_against_bound, OracleConfig};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let instance = builtin("ghz_chain")?;
    let report = chain_bound(&instance)?;
    println!("bound exponent {:.6} bits, m_max {}", report.exponent_bits, report.m_max);

    let solutions = pure_solution_search(&instance, &OracleConfig { seed: 7, ..OracleConfig::default() })?;
    for (i, s) in solutions.states.iter().enumerate() {
        let a = s.amplitudes();
        println!(
            "solution {i}: <000|psi> = {:.6}{:+.6}i, <111|psi> = {:.6}{:+.6}i, residual {:.2e}",
            a[0].re, a[0].im, a[7].re, a[7].im, solutions.per_state_residuals[i]
        );
    }
    println!("max pairwise overlap {:.2e}", solutions.max_overlap());
    let ok = verify_against_bound(&instance, &solutions, &report)?;
    println!("found {} <= m_max {}: {ok}", solutions.len(), report.m_max);
    assert!(ok && solutions.len() == 2);
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("ghz example");
}
