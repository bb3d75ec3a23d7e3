use proptest::prelude::*;

use qmpb::bounds::{chain_bound, mixed_state_bound, pure_tripartite_bound, InstanceKind};
use qmpb::instances::{from_json, ginibre_state, haar_pure_state, haar_unitary, random_instance, seeded_rng, to_json};
use qmpb::qstate::{frobenius_distance, CMatrix, CVector, C64};
use qmpb::{g_overlap, fidelity, instance_from_joint, partial_trace, purify, von_neumann_entropy, DensityMatrix, SystemLayout};

/// Partial trace over C of an (a, b, c) tripartite matrix by explicit index contraction.
fn brute_trace_c(m: &CMatrix, a: usize, b: usize, c: usize) -> CMatrix {
    let mut out = CMatrix::zeros(a * b, a * b);
    for i in 0..a {
        for j in 0..b {
            for k in 0..a {
                for l in 0..b {
                    let mut acc = C64::new(0.0, 0.0);
                    for t in 0..c {
                        acc += m[((i * b + j) * c + t, (k * b + l) * c + t)];
                    }
                    out[(i * b + j, k * b + l)] = acc;
                }
            }
        }
    }
    out
}

/// Partial trace over B, keeping A and C.
fn brute_trace_b(m: &CMatrix, a: usize, b: usize, c: usize) -> CMatrix {
    let mut out = CMatrix::zeros(a * c, a * c);
    for i in 0..a {
        for j in 0..c {
            for k in 0..a {
                for l in 0..c {
                    let mut acc = C64::new(0.0, 0.0);
                    for t in 0..b {
                        acc += m[((i * b + t) * c + j, (k * b + t) * c + l)];
                    }
                    out[(i * c + j, k * c + l)] = acc;
                }
            }
        }
    }
    out
}

fn tripartite(dims: [usize; 3]) -> SystemLayout {
    SystemLayout::new([("A", dims[0]), ("B", dims[1]), ("C", dims[2])]).unwrap()
}

fn random_state(layout: &SystemLayout, seed: u64) -> DensityMatrix {
    ginibre_state(layout, layout.total_dim(), &mut seeded_rng(seed)).unwrap()
}

fn dim_strategy() -> impl Strategy<Value = usize> {
    prop_oneof![Just(2usize), Just(3usize)]
}

#[test]
fn partial_trace_matches_index_contraction() {
    let layout = tripartite([2, 2, 2]);
    let rho = random_state(&layout, 17);
    let fast = partial_trace(&rho, &["A", "B"]).unwrap();
    assert!(frobenius_distance(fast.matrix(), &brute_trace_c(rho.matrix(), 2, 2, 2)) < 1e-12);

    let layout = tripartite([2, 3, 2]);
    let rho = random_state(&layout, 18);
    let ab = partial_trace(&rho, &["A", "B"]).unwrap();
    assert!(frobenius_distance(ab.matrix(), &brute_trace_c(rho.matrix(), 2, 3, 2)) < 1e-12);
    let ac = partial_trace(&rho, &["C", "A"]).unwrap();
    assert_eq!(ac.layout().labels(), vec!["A", "C"]);
    assert!(frobenius_distance(ac.matrix(), &brute_trace_b(rho.matrix(), 2, 3, 2)) < 1e-12);
}

#[test]
fn mixtures_of_orthogonal_states_are_counted() {
    // Uniform mixtures of k orthogonal pure states: the pure bound must allow at least k.
    let layout = tripartite([2, 2, 2]);
    for seed in 0..20u64 {
        let u = haar_unitary(8, &mut seeded_rng(seed));
        for k in [1usize, 2, 4] {
            let cols = u.columns(0, k);
            let joint = (&cols * cols.adjoint()).unscale(k as f64);
            let joint = DensityMatrix::new(joint, &layout, 1e-9).unwrap();
            let s = von_neumann_entropy(&joint).unwrap();
            assert!((s - (k as f64).log2()).abs() < 1e-9);
            let inst = instance_from_joint(&joint, InstanceKind::Chain).unwrap();
            let ms = inst.marginals();
            let r = pure_tripartite_bound(&ms[0].state, &ms[1].state).unwrap();
            assert!(r.m_max >= k as u64, "seed {seed} k {k}: m_max {}", r.m_max);
        }
    }
}

#[test]
fn pure_interface_leaves_sum_of_pair_entropies() {
    // B pure: the subtraction term is exactly zero
    let la = SystemLayout::new([("A", 2)]).unwrap();
    let lb = SystemLayout::new([("B", 2)]).unwrap();
    let lc = SystemLayout::new([("C", 3)]).unwrap();
    let a = random_state(&la, 1);
    let b = qmpb::PureState::basis(0, &lb).unwrap().density();
    let c = random_state(&lc, 2);
    let joint = a.tensor(&b).unwrap().tensor(&c).unwrap();
    let inst = instance_from_joint(&joint, InstanceKind::Chain).unwrap();
    let r = chain_bound(&inst).unwrap();
    assert_eq!(r.entropy_terms[2].entropy_bits, 0.0);
    assert_eq!(
        r.exponent_bits,
        r.entropy_terms[0].entropy_bits + r.entropy_terms[1].entropy_bits
    );
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn entropy_within_range(d1 in dim_strategy(), d2 in dim_strategy(), rank in 1usize..=9, seed in any::<u64>()) {
        let layout = SystemLayout::numbered(&[d1, d2]).unwrap();
        let rank = rank.min(layout.total_dim());
        let rho = ginibre_state(&layout, rank, &mut seeded_rng(seed)).unwrap();
        let s = von_neumann_entropy(&rho).unwrap();
        prop_assert!(s >= 0.0);
        prop_assert!(s <= (layout.total_dim() as f64).log2() + 1e-9);
    }

    #[test]
    fn entropy_unitarily_invariant(d in 2usize..=6, seed in any::<u64>()) {
        let layout = SystemLayout::numbered(&[d]).unwrap();
        let mut rng = seeded_rng(seed);
        let rho = ginibre_state(&layout, d, &mut rng).unwrap();
        let u = haar_unitary(d, &mut rng);
        let rotated = rho.conjugate_by(&u).unwrap();
        let diff = von_neumann_entropy(&rho).unwrap() - von_neumann_entropy(&rotated).unwrap();
        prop_assert!(diff.abs() < 1e-9);
    }

    #[test]
    fn partial_trace_preserves_trace_and_is_linear(
        d1 in dim_strategy(), d2 in dim_strategy(), d3 in dim_strategy(),
        seed in any::<u64>(), alpha in 0.0f64..=1.0,
    ) {
        let layout = tripartite([d1, d2, d3]);
        let mut rng = seeded_rng(seed);
        let rho = ginibre_state(&layout, layout.total_dim(), &mut rng).unwrap();
        let sigma = ginibre_state(&layout, 2, &mut rng).unwrap();
        for keep in [vec!["A"], vec!["B"], vec!["A", "B"], vec!["B", "C"], vec!["A", "C"]] {
            let r = partial_trace(&rho, &keep).unwrap();
            prop_assert!((r.trace() - 1.0).abs() <= 1e-10);
            let mixed = partial_trace(&rho.mix(&sigma, alpha).unwrap(), &keep).unwrap();
            let s = partial_trace(&sigma, &keep).unwrap();
            let combo = r.matrix().scale(alpha) + s.matrix().scale(1.0 - alpha);
            let worst = (mixed.matrix() - combo).iter().map(|z| z.norm()).fold(0.0, f64::max);
            prop_assert!(worst <= 1e-10);
        }
    }

    #[test]
    fn purification_round_trip(d1 in dim_strategy(), d2 in 1usize..=2, rank in 1usize..=6, seed in any::<u64>()) {
        let layout = SystemLayout::numbered(&[d1, d2]).unwrap();
        let rank = rank.min(layout.total_dim());
        let rho = ginibre_state(&layout, rank, &mut seeded_rng(seed)).unwrap();
        let psi = purify(&rho).unwrap();
        let back = partial_trace(&psi.density(), &layout.labels()).unwrap();
        prop_assert!(frobenius_distance(back.matrix(), rho.matrix()) <= 1e-10);
    }

    #[test]
    fn purification_overlap_is_g(d in 2usize..=3, seed in any::<u64>()) {
        let layout = SystemLayout::numbered(&[d]).unwrap();
        let mut rng = seeded_rng(seed);
        let rho = ginibre_state(&layout, d, &mut rng).unwrap();
        let sigma = ginibre_state(&layout, 1 + (seed as usize) % d, &mut rng).unwrap();
        let inner = purify(&rho).unwrap().inner(&purify(&sigma).unwrap()).unwrap();
        let g = g_overlap(&rho, &sigma).unwrap();
        prop_assert!((inner.re - g).abs() <= 1e-8);
        prop_assert!(inner.im.abs() <= 1e-8);
        prop_assert!(g <= fidelity(&rho, &sigma).unwrap() + 1e-9);
    }

    #[test]
    fn strong_subadditivity(d1 in dim_strategy(), d2 in dim_strategy(), d3 in 2usize..=2, rank in 1usize..=18, seed in any::<u64>()) {
        let layout = tripartite([d1, d2, d3]);
        let rank = rank.min(layout.total_dim());
        let rho = ginibre_state(&layout, rank, &mut seeded_rng(seed)).unwrap();
        let s = |keep: &[&str]| von_neumann_entropy(&partial_trace(&rho, keep).unwrap()).unwrap();
        let gap = s(&["A", "B"]) + s(&["B", "C"]) - s(&["B"]) - von_neumann_entropy(&rho).unwrap();
        prop_assert!(gap >= -1e-8, "gap {gap}");
    }

    #[test]
    fn subadditivity(d1 in dim_strategy(), d2 in dim_strategy(), rank in 1usize..=9, seed in any::<u64>()) {
        let layout = SystemLayout::numbered(&[d1, d2]).unwrap();
        let rank = rank.min(layout.total_dim());
        let rho = ginibre_state(&layout, rank, &mut seeded_rng(seed)).unwrap();
        let s = |keep: &[&str]| von_neumann_entropy(&partial_trace(&rho, keep).unwrap()).unwrap();
        prop_assert!(s(&["A1", "A2"]) <= s(&["A1"]) + s(&["A2"]) + 1e-8);
    }

    #[test]
    fn bound_formulas_agree(d1 in dim_strategy(), d2 in dim_strategy(), d3 in dim_strategy(), seed in any::<u64>()) {
        let inst = random_instance(&[d1, d2, d3], InstanceKind::Chain, Some(2), seed).unwrap();
        let ms = inst.marginals();
        let pure = pure_tripartite_bound(&ms[0].state, &ms[1].state).unwrap();
        let chain = chain_bound(&inst).unwrap();
        let mixed = mixed_state_bound(&ms[0].state, &ms[1].state).unwrap();
        prop_assert_eq!(chain.exponent_bits.to_bits(), pure.exponent_bits.to_bits());
        prop_assert_eq!(mixed.exponent_bits, 2.0 * pure.exponent_bits);
        for r in [&pure, &chain, &mixed] {
            prop_assert_eq!(r.recomputed_exponent().to_bits(), r.exponent_bits.to_bits());
        }
    }

    #[test]
    fn instance_files_round_trip(n in 2usize..=4, seed in any::<u64>(), single in any::<bool>()) {
        let dims: Vec<usize> = (0..n).map(|i| 2 + ((seed >> i) & 1) as usize).collect();
        let kind = if single { InstanceKind::SingleParty } else { InstanceKind::Chain };
        let inst = random_instance(&dims, kind, None, seed).unwrap();
        prop_assert!(qmpb::interface_consistency_check(&inst, 1e-10));
        let back = from_json(&to_json(&inst)).unwrap();
        prop_assert_eq!(back, inst);
    }

    #[test]
    fn purified_pure_states_are_products(d in 2usize..=4, seed in any::<u64>()) {
        let layout = SystemLayout::numbered(&[d]).unwrap();
        let psi = haar_pure_state(&layout, &mut seeded_rng(seed)).unwrap();
        let purified = purify(&psi.density()).unwrap();
        // Schmidt rank one across A:A'
        let reduced = partial_trace(&purified.density(), &["A1"]).unwrap();
        prop_assert!(von_neumann_entropy(&reduced).unwrap() < 1e-9);
        let amps: Vec<C64> = psi.amplitudes().iter().copied().collect();
        let expected = CVector::from_iterator(d * d, (0..d * d).map(|i| amps[i / d] * amps[i % d].conj()));
        // zero eigenvalues come back as ~1e-16 noise whose square roots are ~1e-8
        prop_assert!((purified.amplitudes() - expected).norm() < 1e-6);
    }
}
