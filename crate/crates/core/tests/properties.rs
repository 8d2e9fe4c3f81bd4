mod common;

use measdisc::constructions;
use measdisc::entangled;
use measdisc::matcore::{self, kron, ComplexMatrix};
use measdisc::single_system::{self, HypersphereParams};
use proptest::prelude::*;

fn seeded(seed: u64) -> rand_chacha::ChaCha8Rng {
    common::rng(seed)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn hypersphere_states_are_unit(raw in proptest::collection::vec(-20.0f64..20.0, 2..=8usize)) {
        prop_assume!(raw.len() % 2 == 0);
        let p = HypersphereParams::from_raw(&raw).unwrap();
        let v = single_system::state_from_params(&p);
        prop_assert_eq!(v.len(), raw.len() / 2 + 1);
        prop_assert!((matcore::vec_norm(&v) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn partial_trace_of_product(seed in any::<u64>(), da in 1usize..4, db in 1usize..4) {
        let mut rng = seeded(seed);
        let a = matcore::random_matrix(&mut rng, da, da);
        let b = matcore::random_matrix(&mut rng, db, db);
        let ab = kron(&a, &b);
        let ta = matcore::partial_trace_a(&ab, da, db).unwrap();
        let tb = matcore::partial_trace_b(&ab, da, db).unwrap();
        prop_assert!(ta.max_abs_diff(&b.scale(a.trace())) < 1e-12);
        prop_assert!(tb.max_abs_diff(&a.scale(b.trace())) < 1e-12);
    }

    #[test]
    fn trace_norm_triangle(seed in any::<u64>(), d in 1usize..6) {
        let mut rng = seeded(seed);
        let a = matcore::random_hermitian(&mut rng, d);
        let b = matcore::random_hermitian(&mut rng, d);
        let s = matcore::trace_norm(&(&a + &b)).unwrap();
        prop_assert!(s <= matcore::trace_norm(&a).unwrap() + matcore::trace_norm(&b).unwrap() + 1e-10);
    }

    #[test]
    fn helstrom_bounds(seed in any::<u64>(), w in 0.05f64..0.95) {
        let mut rng = seeded(seed);
        let s0 = matcore::random_density(&mut rng, 2).scale_real(w);
        let s1 = matcore::random_density(&mut rng, 2).scale_real(1.0 - w);
        let h = entangled::helstrom_pair(&s0, &s1).unwrap();
        prop_assert!(h.value >= w.max(1.0 - w) - 1e-12);
        prop_assert!(h.value <= 1.0 + 1e-12);
        prop_assert!(h.povm.certificate(1e-9).projective);
    }

    #[test]
    fn score_bounded_by_optimum(seed in any::<u64>()) {
        let mut rng = seeded(seed);
        let trine = constructions::trine_pair_ensemble();
        let psi = matcore::random_unit_vector(&mut rng, 2);
        let s = single_system::score(&psi, &trine).unwrap();
        prop_assert!(s <= 5.0 / 6.0 + 1e-12);
        prop_assert!(s >= 0.5 - 1e-12);
    }

    #[test]
    fn eigen_reconstructs(seed in any::<u64>(), d in 1usize..8) {
        let mut rng = seeded(seed);
        let h = matcore::random_hermitian(&mut rng, d);
        let eig = matcore::hermitian_eigen(&h).unwrap();
        prop_assert!(eig.reconstruct().max_abs_diff(&h) < 1e-10);
        let u = &eig.eigenvectors;
        prop_assert!(u.adjoint().matmul(u).unwrap().max_abs_diff(&ComplexMatrix::identity(d)) < 1e-10);
    }
}
