use lapcg_core::fixed::{FixedSpec, FixedValue};
use lapcg_core::laplacian::{apply_stencil_reference, DecompMode, Grid, Stencil3x3};
use lapcg_core::solvers::{
    cg_solve, cg_solve_observed, newcg_solve, relative_residual, Layout, SolverConfig, StopReason,
};
use proptest::prelude::*;

fn grid(n: usize, vals: &[f64]) -> Grid<f64> {
    Grid::from_fn(n, (), |i, j| vals[i * n + j]).unwrap()
}

fn tight() -> SolverConfig {
    SolverConfig {
        tol: 1e-10,
        ..SolverConfig::default()
    }
}

fn side() -> impl Strategy<Value = usize> {
    prop::sample::select(vec![4usize, 8, 16])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn variants_agree_in_double(n in side(), vals in prop::collection::vec(-1.0f64..1.0, 256)) {
        let b = grid(n, &vals);
        let cg = cg_solve(&b, &tight()).unwrap();
        let new = newcg_solve(&b, &tight()).unwrap();
        prop_assert!(cg.trace.converged && new.trace.converged);
        let d = cg.trace.iterations().abs_diff(new.trace.iterations());
        prop_assert!(d <= 2, "{} vs {}", cg.trace.iterations(), new.trace.iterations());
        prop_assert!(relative_residual(&cg.x, &b).unwrap() <= 1e-9);
        prop_assert!(relative_residual(&new.x, &b).unwrap() <= 1e-9);
        let scale = cg.x.data().iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for (p, q) in cg.x.data().iter().zip(new.x.data()) {
            prop_assert!((p - q).abs() <= 1e-8 * scale);
        }
    }

    #[test]
    fn cg_error_decreases_in_a_norm(n in side(), vals in prop::collection::vec(-1.0f64..1.0, 256)) {
        let b = grid(n, &vals);
        let cfg = SolverConfig { tol: 1e-13, ..SolverConfig::default() };
        let xs = cg_solve(&b, &cfg).unwrap().x;
        let s = Stencil3x3::laplacian(());
        let mut prev = f64::INFINITY;
        let mut first = None;
        cg_solve_observed(&b, &cfg, |st| {
            let e: Vec<f64> = st.x.data().iter().zip(xs.data()).map(|(a, b)| a - b).collect();
            let ae = apply_stencil_reference(&grid(n, &e), &s);
            let en: f64 = e.iter().zip(ae.data()).map(|(a, b)| a * b).sum();
            let first = *first.get_or_insert(en);
            // Ignore the last few iterations where the error is at rounding level.
            if en > 1e-20 * first {
                assert!(en <= prev * (1.0 + 1e-9), "iteration {}: {en} > {prev}", st.iteration);
            }
            prev = en;
        })
        .unwrap();
    }
}

#[test]
fn layout_does_not_change_either_solver() {
    let spec = FixedSpec::default_hw();
    let b = Grid::from_fn(16, spec, |i, j| {
        FixedValue::from_real(((i * 3 + j * 5) % 7) as f64 - 3.0, spec)
    })
    .unwrap();
    let base = SolverConfig::default();
    let cg = cg_solve(&b, &base).unwrap();
    let new = newcg_solve(&b, &base).unwrap();
    for (v, h, mode) in [
        (4, 1, DecompMode::OneD),
        (2, 2, DecompMode::TwoDQuadruple),
        (4, 4, DecompMode::TwoDQuadruple),
    ] {
        let cfg = SolverConfig {
            layout: Layout { v, h, mode },
            ..base
        };
        assert_eq!(cg_solve(&b, &cfg).unwrap(), cg);
        assert_eq!(newcg_solve(&b, &cfg).unwrap(), new);
    }
}

#[test]
fn repeated_runs_are_identical() {
    let b = Grid::from_fn(16, (), |i, j| {
        (i as f64 * 0.3).cos() - (j as f64 * 0.7).sin()
    })
    .unwrap();
    assert_eq!(
        cg_solve(&b, &tight()).unwrap(),
        cg_solve(&b, &tight()).unwrap()
    );
    assert_eq!(
        newcg_solve(&b, &tight()).unwrap(),
        newcg_solve(&b, &tight()).unwrap()
    );
}

#[test]
fn fixed_point_tracks_double_until_quantization() {
    let spec = FixedSpec::default_hw();
    for n in [16, 32] {
        let bd = Grid::from_vec(n, vec![1.0; n * n], ()).unwrap();
        let bf = Grid::from_vec(n, vec![FixedValue::from_real(1.0, spec); n * n], spec).unwrap();
        let d = cg_solve(&bd, &SolverConfig::default()).unwrap();
        for sol in [
            cg_solve(&bf, &SolverConfig::default()).unwrap(),
            newcg_solve(&bf, &SolverConfig::default()).unwrap(),
        ] {
            assert_eq!(sol.trace.saturations, 0);
            assert!(matches!(
                sol.trace.stop,
                StopReason::Converged | StopReason::Stagnated
            ));
            assert!(
                sol.trace.final_relres() <= 1e-5,
                "n={n} {}",
                sol.trace.final_relres()
            );
            for (f, g) in sol.trace.records.iter().zip(&d.trace.records).take(20) {
                assert!(
                    (f.relres.log10() - g.relres.log10()).abs() <= 0.5,
                    "{f:?} {g:?}"
                );
            }
        }
    }
}
