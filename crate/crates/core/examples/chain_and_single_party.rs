// Longer chains and single-party data: the chained strong-subadditivity bound
// and the plain subadditivity bound on the same random four-party state.

use qmpb::instances::random_instance;
use qmpb::{chain_bound, single_party_bound, InstanceKind};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let dims = [2, 3, 2, 2];
    for rank in [1, 4, 24] {
        let chain = random_instance(&dims, InstanceKind::Chain, Some(rank), 11)?;
        let single = random_instance(&dims, InstanceKind::SingleParty, Some(rank), 11)?;
        let c = chain_bound(&chain)?;
        let s = single_party_bound(&single)?;
        println!(
            "joint rank {rank:>2}: chain bound 2^{:.4} (m_max {:>3}), single-party bound 2^{:.4} (m_max {:>3})",
            c.exponent_bits, c.m_max, s.exponent_bits, s.m_max
        );
        assert!(c.m_max >= 1 && s.m_max >= 1);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("chain example");
}
