// Canonical purifications: tracing out the primed copy gives back the state,
// and the overlap of two purifications is `tr(√σ √ρ)`, never above the fidelity.

use qmpb::instances::{ginibre_state, seeded_rng};
use qmpb::qstate::frobenius_distance;
use qmpb::{fidelity, g_overlap, partial_trace, purify, SystemLayout};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let layout = SystemLayout::new([("A", 3)])?;
    let mut rng = seeded_rng(2024);
    let rho = ginibre_state(&layout, 3, &mut rng)?;
    let sigma = ginibre_state(&layout, 2, &mut rng)?;

    let (pr, ps) = (purify(&rho)?, purify(&sigma)?);
    println!("purification layout: {:?}", pr.layout().labels());
    let back = partial_trace(&pr.density(), &["A"])?;
    println!("round-trip error: {:.2e}", frobenius_distance(back.matrix(), rho.matrix()));

    let inner = pr.inner(&ps)?;
    let g = g_overlap(&rho, &sigma)?;
    let f = fidelity(&rho, &sigma)?;
    println!("<rho|sigma> = {:.12}{:+.1e}i", inner.re, inner.im);
    println!("tr(sqrt(sigma) sqrt(rho)) = {g:.12}");
    println!("fidelity = {f:.12}");
    assert!((inner.re - g).abs() < 1e-8 && g <= f + 1e-9);
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("purification example");
}
