use proptest::prelude::*;

use lorot::diagnostics::{audit, class_fractions, strict_margin};
use lorot::dual::{c_transform, chain_potential, default_root, dkp_verify, reverse_transform, DualPotential};
use lorot::measures::strictify;
use lorot::solver::{brute_force_oracle, solve};
use lorot::{Atom, Coupling, DiscreteMeasure, Error, Point, SpacetimeModel, Tolerances, TransportProblem};

fn model() -> impl Strategy<Value = SpacetimeModel> {
    prop_oneof![
        Just(SpacetimeModel::minkowski(1)),
        Just(SpacetimeModel::minkowski(2)),
        Just(SpacetimeModel::cylinder(5.0)),
    ]
}

/// Atoms with small integer weights; spatial coordinates in `[0, 1)` (or
/// around the whole cylinder) and times in `[t0, t1)`.
fn measure(model: SpacetimeModel, max: usize, t0: f64, t1: f64) -> impl Strategy<Value = DiscreteMeasure> {
    let width = match model {
        SpacetimeModel::Cylinder { circumference } => circumference,
        _ => 1.0,
    };
    let d = model.spatial_dim();
    prop::collection::vec((prop::collection::vec(0.0..width, d), t0..t1, 1u32..5), 1..=max).prop_map(move |raw| {
        let total: u32 = raw.iter().map(|r| r.2).sum();
        let atoms = raw.into_iter().map(|(x, t, w)| Atom::new(model.normalize(Point::new(x, t)), w as f64 / total as f64));
        DiscreteMeasure::new(atoms.collect()).unwrap()
    })
}

fn problem(max: usize, gap: f64) -> impl Strategy<Value = TransportProblem> {
    model().prop_flat_map(move |m| {
        (measure(m, max, 0.0, 1.0), measure(m, max, 1.0 + gap, 3.0 + gap))
            .prop_map(move |(mu, nu)| TransportProblem::new(m, mu, nu).unwrap())
    })
}

fn entries_permuted(model: &SpacetimeModel, c: &Coupling, seed: usize) -> Coupling {
    let mut entries = c.entries().to_vec();
    let k = seed % entries.len().max(1);
    entries.rotate_left(k);
    entries.reverse();
    Coupling::new(model, c.mu().clone(), c.nu().clone(), entries).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn solver_matches_oracle_and_closes_the_duality_gap(p in problem(5, 0.0)) {
        match (solve(&p), brute_force_oracle(&p)) {
            (Ok(s), Ok(o)) => {
                prop_assert!((s.primal() - o.total_cost()).abs() <= 1e-10);
                prop_assert!(s.dual_gap() <= 1e-8 * (1.0 + s.primal().abs()));
                let report = audit(&p, &s, &Tolerances::default(), 0);
                prop_assert_eq!(report.monotonicity_violations, 0);
                let (a, b, c) = class_fractions(&p.model, &s.coupling, 1e-9);
                prop_assert!((a + b + c - 1.0).abs() <= 1e-12);
                for (i, w) in p.mu.weights().iter().enumerate() {
                    let row: f64 = s.coupling.entries().iter().filter(|e| e.i == i).map(|e| e.mass).sum();
                    prop_assert!((row - w).abs() <= 1e-12);
                }
            }
            (Err(Error::Infeasible), Err(Error::Infeasible)) => {}
            (a, b) => prop_assert!(false, "solver {:?} vs oracle {:?}", a.map(|s| s.primal()), b.map(|c| c.total_cost())),
        }
    }

    #[test]
    fn lp_duals_are_feasible_and_tight(p in problem(8, 1.5)) {
        // Every time gap exceeds the diameter of [0,1]^2,
        // so every flat instance is feasible.
        prop_assume!(!matches!(p.model, SpacetimeModel::Cylinder { .. }));
        let s = solve(&p).unwrap();
        let report = dkp_verify(&p.model, &s.coupling, &DualPotential::from_lp(&s.duals), 1e-8);
        prop_assert!(report.passed(), "{:?}", report);
    }

    #[test]
    fn strictified_instances_admit_chain_potentials(p in problem(10, 1.5), eps in 0.1f64..0.5) {
        prop_assume!(!matches!(p.model, SpacetimeModel::Cylinder { .. }));
        let q = TransportProblem::new(p.model, strictify(&p.mu, eps).unwrap(), p.nu.clone()).unwrap();
        let c = solve(&q).unwrap().coupling;
        prop_assert!(strict_margin(&q.model, &c) >= eps);
        let pot = DualPotential::from_chain(&q.model, &c, default_root(&c), 1e-10).unwrap();
        let report = dkp_verify(&q.model, &c, &pot, 1e-8);
        prop_assert!(report.passed(), "{:?}", report);

        let phi: Vec<f64> = c_transform(&q.model, &pot.psi, c.mu(), c.nu()).into_iter().map(|v| v.finite().unwrap()).collect();
        let back = reverse_transform(&q.model, &phi, c.mu(), c.nu());
        for (a, b) in pot.psi.iter().zip(back) {
            prop_assert!((a - b.finite().unwrap()).abs() <= 1e-9);
        }
    }

    #[test]
    fn chain_potential_ignores_entry_order(p in problem(8, 1.5), seed in 0usize..100) {
        prop_assume!(matches!(p.model, SpacetimeModel::Minkowski { .. }));
        let c = solve(&p).unwrap().coupling;
        let shuffled = entries_permuted(&p.model, &c, seed);
        let root = default_root(&c);
        prop_assert_eq!(
            chain_potential(&p.model, &c, root, 1e-10).unwrap(),
            chain_potential(&p.model, &shuffled, root, 1e-10).unwrap()
        );
    }

    #[test]
    fn solving_twice_is_bit_identical(p in problem(6, 0.0)) {
        let a = solve(&p).map(|s| s.coupling.to_csv());
        let b = solve(&p).map(|s| s.coupling.to_csv());
        prop_assert_eq!(a, b);
    }
}
