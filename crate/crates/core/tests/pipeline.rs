mod common;

use measdisc::constructions::{self, Construction};
use measdisc::entangled::{self, BMethod, BipartiteDensity, SolverConfig};
use measdisc::matcore::{self, kron, ComplexMatrix};
use measdisc::measurements::{self, MeasurementEnsemble};
use measdisc::single_system::{self, OptimizerConfig};

use common::*;

#[test]
fn d_is_unitarily_covariant() {
    let mut rng = rng(1);
    let (a, b) = constructions::default_magic_angles();
    let ens = constructions::weyl_covariant_povm_ensemble(&constructions::magic_qubit_basis(a, b).unwrap()).unwrap();
    let cfg = OptimizerConfig::default();
    let base = single_system::optimize_d(&ens, &cfg).unwrap();
    for _ in 0..3 {
        let u = matcore::random_unitary(&mut rng, 2);
        let rotated = measurements::conjugate_ensemble(&ens, &u).unwrap();
        let moved = u.apply(&base.best_state).unwrap();
        assert!((single_system::score(&moved, &rotated).unwrap() - base.value).abs() < 1e-12);
        let r = single_system::optimize_d(&rotated, &cfg).unwrap();
        assert!((r.value - base.value).abs() < 2e-6, "{} vs {}", r.value, base.value);
    }
}

#[test]
fn product_states_never_beat_single_system() {
    let mut rng = rng(2);
    let cfg = SolverConfig::default();
    for (d, ens) in [
        (2, constructions::trine_pair_ensemble()),
        (3, random_ensemble(&mut rng, 3, 3, 3)),
    ] {
        let opt = single_system::optimize_d(&ens, &OptimizerConfig::default())
            .unwrap()
            .value;
        for _ in 0..3 {
            let psi = matcore::random_unit_vector(&mut rng, d);
            let phi = matcore::random_unit_vector(&mut rng, 2);
            let rho =
                BipartiteDensity::product(&ComplexMatrix::projector(&psi), &ComplexMatrix::projector(&phi)).unwrap();
            let r = entangled::b_value_optimal(&rho, &ens, &cfg).unwrap();
            let s = single_system::score(&psi, &ens).unwrap();
            assert!((r.value - s).abs() < 1e-6, "{} vs {s}", r.value);
            assert!(r.value <= opt + 1e-6);
        }
    }
}

#[test]
fn optimal_bob_sandwich() {
    let mut rng = rng(3);
    let cfg = SolverConfig::default();
    for settings in [2, 3] {
        let ens = random_ensemble(&mut rng, 2, settings, 3);
        let rho = BipartiteDensity::new(2, 2, matcore::random_density(&mut rng, 4)).unwrap();
        let opt = entangled::b_value_optimal(&rho, &ens, &cfg).unwrap();
        assert!(opt.converged, "gap {:?}", opt.gap);
        assert_eq!(
            opt.method,
            if settings == 2 {
                BMethod::Helstrom
            } else {
                BMethod::Iterative
            }
        );
        let dual = opt.dual_bound.unwrap();
        assert!(opt.value <= dual + 1e-8);
        let recomputed = entangled::b_value_with_bob(&rho, &ens, opt.bob_povms.as_ref().unwrap())
            .unwrap()
            .value;
        assert!((recomputed - opt.value).abs() < 1e-10);
        for _ in 0..20 {
            let bob: Vec<_> = (0..3).map(|_| random_povm(&mut rng, 2, settings)).collect();
            let v = entangled::b_value_with_bob(&rho, &ens, &bob).unwrap().value;
            assert!(v <= opt.value + 1e-8);
        }
    }
}

#[test]
fn iterative_solver_on_mixed_qutrit_assemblage() {
    let mut rng = rng(4);
    let ens = random_ensemble(&mut rng, 3, 3, 2);
    let rho = BipartiteDensity::new(3, 3, matcore::random_density(&mut rng, 9)).unwrap();
    let r = entangled::b_value_optimal(&rho, &ens, &SolverConfig::default()).unwrap();
    assert!(r.converged, "gap {:?} after {} iterations", r.gap, r.iterations);
    assert!(r.gap.unwrap() < 1e-8);
    for povm in r.bob_povms.as_ref().unwrap() {
        assert!(povm.is_valid(1e-8));
    }
}

#[test]
fn werner_value_is_monotone() {
    let ens = constructions::trine_pair_ensemble();
    let mut prev = f64::NEG_INFINITY;
    for i in 0..=20 {
        let p = i as f64 / 20.0;
        let b = entangled::b_value_optimal(&entangled::werner_state(p).unwrap(), &ens, &SolverConfig::default())
            .unwrap()
            .value;
        assert!(b >= prev - 1e-12);
        prev = b;
    }
}

#[test]
fn proof_strategies_reach_one_across_catalog() {
    let cases = [
        Construction::WeylCovariant(
            constructions::normal_eigenbasis(&constructions::mixing_unitary(3).unwrap()).unwrap(),
        ),
        Construction::WeylCovariant(constructions::magic_ic_basis(4).unwrap()),
        Construction::DPlusOne(constructions::example_basis_dplus1(3).unwrap()),
    ];
    for c in &cases {
        let ens = c.ensemble().unwrap();
        let bob = constructions::proof_bob_measurements(c).unwrap();
        for povm in &bob {
            assert!(povm.certificate(1e-9).projective);
        }
        let rho = entangled::max_entangled(ens.dim()).unwrap();
        let b = entangled::b_value_with_bob(&rho, &ens, &bob).unwrap().value;
        assert!((b - 1.0).abs() < 1e-10);
        let opt = entangled::b_value_optimal(&rho, &ens, &SolverConfig::default())
            .unwrap()
            .value;
        assert!((opt - 1.0).abs() < 1e-8);
    }
}

#[test]
fn maxent_assemblage_is_transposed_measurement() {
    let ens = constructions::trine_pair_ensemble();
    let asm = entangled::assemblage_of(&entangled::max_entangled(2).unwrap(), &ens).unwrap();
    for a in 0..3 {
        for x in 0..2 {
            let expected = ens.element(x, a).transpose().scale_real(0.5 / 2.0);
            assert!(asm.get(a, x).max_abs_diff(&expected) < 1e-14);
        }
    }
    assert!((asm.total_trace() - 1.0).abs() < 1e-12);
}

#[test]
fn ensemble_and_state_json_round_trip() {
    let dir = std::env::temp_dir().join(format!("measdisc-pipeline-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let ens = constructions::d4_projective_ensemble();
    let path = dir.join("table1.json");
    std::fs::write(&path, ens.to_json().unwrap()).unwrap();
    let back = MeasurementEnsemble::from_json(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(back, ens);

    let w = entangled::werner_state(0.7).unwrap();
    let spath = dir.join("werner.json");
    std::fs::write(&spath, w.to_json().unwrap()).unwrap();
    let r = measdisc::cli::resolve_state(spath.to_str().unwrap()).unwrap();
    assert_eq!(r, w);
    let e = measdisc::cli::resolve_ensemble(path.to_str().unwrap()).unwrap();
    assert_eq!(e.ensemble, ens);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn maxent_trace_form() {
    let mut rng = rng(5);
    for d in 2..=4 {
        let rho = entangled::max_entangled(d).unwrap();
        let a = matcore::random_matrix(&mut rng, d, d);
        let b = matcore::random_matrix(&mut rng, d, d);
        let lhs = rho.matrix().trace_product(&kron(&a, &b)).unwrap();
        let rhs = a.matmul(&b.transpose()).unwrap().trace() / d as f64;
        assert!((lhs - rhs).norm() < 1e-12);
    }
}
