use lapcg_core::ceil_log2;
use lapcg_core::dataflow::{run_stencil_stream, AxpyEngine, DotTreeEngine, LineBufferEngine};
use lapcg_core::fixed::{FixedSpec, FixedValue};
use lapcg_core::laplacian::{pad_subgrids, DecompMode, Decomposition, Grid, Stencil3x3};
use lapcg_core::perfmodel::{
    schedule_iteration, spmv_latency, Algorithm, LaneGeometry, LatencyConstants,
};
use proptest::prelude::*;

const SIDES: [usize; 4] = [8, 16, 32, 100];
const FACTORS: [usize; 5] = [1, 2, 4, 8, 16];

fn consts(a: u64, b: u64) -> LatencyConstants {
    LatencyConstants {
        a_mul: a,
        b_add: b,
        ..LatencyConstants::default()
    }
}

#[test]
fn stencil_cycles_match_strip_formula() {
    for n in SIDES {
        for f in FACTORS {
            if n % f != 0 {
                continue;
            }
            let g = Grid::<f64>::zeros(n, ()).unwrap();
            let d = Decomposition::new(n, f, 1, DecompMode::OneD).unwrap();
            for p in pad_subgrids(&g, &d).unwrap() {
                let run = run_stencil_stream(&p, &Stencil3x3::laplacian(())).unwrap();
                let closed = ((n + 2) * (n / f + 2) + 4) as u64;
                assert_eq!(run.cycles, closed);
                assert_eq!(spmv_latency(n, f), Ok(closed));
            }
        }
    }
}

#[test]
fn vector_engine_cycles_match_formulas() {
    for n in SIDES {
        for f in FACTORS {
            if (n * n) % f != 0 {
                continue;
            }
            let l = n * n / f;
            let lanes = vec![vec![0.5f64; l]; f];
            for a in 1..=6 {
                for b in 1..=6 {
                    let c = consts(a, b);
                    let mut dot = DotTreeEngine::new(f, (), c).unwrap();
                    let (_, cyc) = dot.run(&lanes, &lanes).unwrap();
                    assert_eq!(cyc, a * l as u64 + b * u64::from(ceil_log2(f as u64)) + 2);
                    let mut ax = AxpyEngine::new(f, c).unwrap();
                    let (_, cyc) = ax.run(&lanes, &lanes, 2.0).unwrap();
                    assert_eq!(cyc, (a + b) * l as u64);
                }
            }
        }
    }
}

#[test]
fn schedule_spmv_node_matches_engine() {
    for (n, f) in [(16, 1), (16, 4), (32, 8), (40, 16), (100, 8), (100, 16)] {
        let geom = LaneGeometry::canonical(n, f).unwrap();
        let d = geom.decomposition().unwrap();
        let g = Grid::<f64>::zeros(n, ()).unwrap();
        for p in pad_subgrids(&g, &d).unwrap() {
            let run = run_stencil_stream(&p, &Stencil3x3::laplacian(())).unwrap();
            for a in Algorithm::ALL {
                let s = schedule_iteration(a, &geom, &LatencyConstants::default());
                assert_eq!(s.blocks.spmv.latency, run.cycles);
                assert_eq!(s.blocks.spmv.first_output, run.first_output_cycle);
            }
        }
    }
}

#[test]
fn one_element_per_cycle_after_fill() {
    // Doubling the streamed rows adds exactly one cycle per extra element.
    for cols in [1, 5, 16] {
        let a = LineBufferEngine::<f64>::cycles_for(4, cols);
        let b = LineBufferEngine::<f64>::cycles_for(8, cols);
        assert_eq!(b - a, (4 * (cols + 2)) as u64);
    }
}

proptest! {
    /// Without saturation fixed-point addition is exact, so any reduction
    /// order gives the same sum.
    #[test]
    fn fixed_dot_tree_is_sequential_sum(
        vals in prop::collection::vec((-(1i64 << 30)..(1i64 << 30), -(1i64 << 30)..(1i64 << 30)), 64),
        fi in 0usize..5,
    ) {
        let spec = FixedSpec::default_hw();
        let f = FACTORS[fi];
        let a: Vec<FixedValue> = vals.iter().map(|&(x, _)| FixedValue::from_raw(x, spec)).collect();
        let b: Vec<FixedValue> = vals.iter().map(|&(_, y)| FixedValue::from_raw(y, spec)).collect();
        let seq = a.iter().zip(&b).fold(FixedValue::zero(spec), |acc, (&x, &y)| acc + x * y);
        let la: Vec<&[FixedValue]> = a.chunks(64 / f).collect();
        let lb: Vec<&[FixedValue]> = b.chunks(64 / f).collect();
        let mut e = DotTreeEngine::new(f, spec, LatencyConstants::default()).unwrap();
        let (got, _) = e.run(&la, &lb).unwrap();
        prop_assert_eq!(got, seq);
    }

    #[test]
    fn fixed_axpy_is_scalar_loop(
        vals in prop::collection::vec((any::<i64>(), any::<i64>()), 32),
        alpha: i64,
    ) {
        let spec = FixedSpec::default_hw();
        let fx = |r| FixedValue::from_raw(r, spec);
        let a: Vec<FixedValue> = vals.iter().map(|&(x, _)| fx(x)).collect();
        let b: Vec<FixedValue> = vals.iter().map(|&(_, y)| fx(y)).collect();
        let al = fx(alpha);
        let want: Vec<FixedValue> = a.iter().zip(&b).map(|(&x, &y)| x + al * y).collect();
        let mut e = AxpyEngine::new(4, LatencyConstants::default()).unwrap();
        let la: Vec<&[FixedValue]> = a.chunks(8).collect();
        let lb: Vec<&[FixedValue]> = b.chunks(8).collect();
        prop_assert_eq!(e.run(&la, &lb, al).unwrap().0.concat(), want);
    }

    #[test]
    fn saturating_dot_is_deterministic(vals in prop::collection::vec(any::<i64>(), 32)) {
        let spec = FixedSpec::default_hw();
        let v: Vec<FixedValue> = vals.iter().map(|&r| FixedValue::from_raw(r, spec)).collect();
        let lanes: Vec<&[FixedValue]> = v.chunks(8).collect();
        let mut e1 = DotTreeEngine::new(4, spec, LatencyConstants::default()).unwrap();
        let mut e2 = DotTreeEngine::new(4, spec, LatencyConstants::default()).unwrap();
        prop_assert_eq!(e1.run(&lanes, &lanes).unwrap(), e2.run(&lanes, &lanes).unwrap());
    }
}
