//! Randomized invariants across the thermodynamic models, the Wertheim root
//! finder, and the panel solver.

use nalgebra::Vector3;
use proptest::prelude::*;
use solvion::bem::{icosphere, PanelSystem, PointCharge};
use solvion::ions::{radius_from_born, IonSpec};
use solvion::solvents::{builtin_solvent, builtin_solvents, wertheim_lambda};
use solvion::thermo::{born_energy, hsbc_solve, msa_energy, Model};
use solvion::units::UnitSystem;

fn units() -> UnitSystem {
    UnitSystem::default()
}

proptest! {
    #[test]
    fn wertheim_residual_is_tiny(eps in 1.0f64..1000.0) {
        let lambda = wertheim_lambda(eps).unwrap();
        let residual = lambda * lambda * (1.0 + lambda).powi(4) - 16.0 * eps;
        prop_assert!(residual.abs() <= 1e-12 * 16.0 * eps);
    }

    #[test]
    fn wertheim_is_monotone(eps in 1.0f64..999.0, bump in 0.001f64..1.0) {
        let a = wertheim_lambda(eps).unwrap();
        let b = wertheim_lambda(eps + bump).unwrap();
        prop_assert!(b > a);
    }

    #[test]
    fn charge_symmetry_all_models(radius in 0.5f64..5.0, z in 1i32..4) {
        let u = units();
        let w = builtin_solvent("W").unwrap();
        let plus = IonSpec::new("p", z, radius).unwrap();
        let minus = IonSpec::new("m", -z, radius).unwrap();
        let eps = w.eps(25.0).unwrap();
        prop_assert_eq!(born_energy(&plus, eps, &u), born_energy(&minus, eps, &u));
        prop_assert_eq!(
            msa_energy(&plus, &w, 25.0, &u).unwrap(),
            msa_energy(&minus, &w, 25.0, &u).unwrap()
        );
        let hp = hsbc_solve(&plus, &w, 25.0, 0.66, &u).unwrap();
        let hm = hsbc_solve(&minus, &w, 25.0, 0.66, &u).unwrap();
        prop_assert!((hp.dg - hm.dg).abs() <= 1e-12 * hp.dg.abs());
    }

    #[test]
    fn alpha_zero_recovers_born(radius in 0.5f64..5.0) {
        let u = units();
        let w = builtin_solvent("W").unwrap();
        let ion = IonSpec::new("x", 1, radius).unwrap();
        let eps = w.eps(25.0).unwrap();
        let r = hsbc_solve(&ion, &w, 25.0, 0.0, &u).unwrap();
        prop_assert!((r.dg - born_energy(&ion, eps, &u)).abs() <= 1e-12 * r.dg.abs());
    }

    #[test]
    fn large_radius_recovers_born(scale in 1.0f64..50.0) {
        // MSA/Born → 1 as R → ∞ since δ_s/R → 0.
        let u = units();
        let w = builtin_solvent("W").unwrap();
        let ion = IonSpec::new("x", 1, 100.0 * scale).unwrap();
        let eps = w.eps(25.0).unwrap();
        let ratio = msa_energy(&ion, &w, 25.0, &u).unwrap() / born_energy(&ion, eps, &u);
        prop_assert!((ratio - 1.0).abs() < 1e-2);
    }

    #[test]
    fn radius_energy_roundtrip(radius in 0.3f64..10.0, z in 1i32..4) {
        let u = units();
        for s in builtin_solvents() {
            let t = 0.5 * (s.valid_range.0 + s.valid_range.1);
            let eps = s.eps(t).unwrap();
            let ion = IonSpec::new("x", z, radius).unwrap();
            let dg = born_energy(&ion, eps, &u);
            let back = radius_from_born(dg, eps, z, &u).unwrap();
            prop_assert!((back - radius).abs() <= 1e-12 * radius);
        }
    }

    #[test]
    fn entropy_sign_and_ordering(radius in 0.6f64..4.0) {
        // In water all three models give negative solvation entropy, and the
        // MSA magnitude exceeds Born (temperature-dependent shift).
        let u = units();
        let w = builtin_solvent("W").unwrap();
        let ion = IonSpec::new("x", 1, radius).unwrap();
        let src = solvion::thermo::AlphaSource::Fixed(0.66);
        let born = solvion::thermo::evaluate(Model::Born, &ion, &w, 25.0, &src, &u).unwrap();
        let msa = solvion::thermo::evaluate(Model::Msa, &ion, &w, 25.0, &src, &u).unwrap();
        prop_assert!(born.ds < 0.0);
        prop_assert!(msa.ds < born.ds);
    }
}

#[test]
fn assembly_is_thread_count_independent() {
    let mesh = icosphere(1.0, 2).unwrap();
    let charges = vec![PointCharge {
        position: Vector3::new(0.1, -0.2, 0.3),
        charge: 1.0,
    }];
    let build = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap();
        pool.install(|| {
            PanelSystem::new(mesh.clone(), charges.clone(), 1.0, 78.283, 0.66).unwrap()
        })
    };
    let s1 = build(1);
    let s4 = build(4);
    let n = s1.mesh.panel_count();
    let probe: Vec<f64> = (0..n).map(|i| ((i * 37) % 11) as f64 / 7.0 - 0.6).collect();
    let a = s1.apply_k(&probe);
    let b = s4.apply_k(&probe);
    assert_eq!(a, b, "operator differs between 1 and 4 assembly threads");
    let sol1 = s1.solve_nonlinear().unwrap();
    let sol4 = s4.solve_nonlinear().unwrap();
    assert_eq!(sol1.sigma, sol4.sigma);
}
