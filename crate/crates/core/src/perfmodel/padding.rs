use super::LaneGeometry;
use crate::laplacian::{DecompMode, Traversal};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PaddingReport {
    /// Cycles until every lane has emitted its full padded stream.
    pub cycles: u64,
    /// Halo cells per lane, `(sr + 2)(sc + 2) - sr * sc`.
    pub halo_cells: u64,
}

/// Cycles spent building the padded input streams of all lanes.
///
/// Each lane receives its interior one element per cycle in stream order
/// and re-emits it with the halo interleaved, one cell per cycle, all lanes
/// in lockstep. A cell can only be emitted once it is available: physical
/// boundary zeros at once, interior cells (own or a neighbour's) once the
/// owning lane has received them.
///
/// With strips, every lane's first emitted row is the halo taken from the
/// last row of the strip above, so strip values are only forwarded once
/// whole strips have been received; only leading boundary zeros go out
/// earlier. With quadruples the mirrored traversals put each neighbour
/// value in place before it is needed and the copy is cut-through.
pub fn padding_latency(g: &LaneGeometry) -> PaddingReport {
    let (sr, sc) = (g.sub_rows, g.sub_cols);
    let (rows, cols) = (sr + 2, sc + 2);
    let traversal = |bi: usize, bj: usize| match g.mode {
        DecompMode::OneD => Traversal::ROW_MAJOR,
        DecompMode::TwoDQuadruple => Traversal {
            flip_rows: bi.is_multiple_of(2),
            flip_cols: bj.is_multiple_of(2),
        },
    };
    // Cycle at which the interior value at global (gr, gc) is held by its lane.
    let available = |gr: isize, gc: isize| -> u64 {
        let n = g.n as isize;
        if gr < 0 || gc < 0 || gr >= n || gc >= n {
            return 0;
        }
        let (gr, gc) = (gr as usize, gc as usize);
        let (bi, bj) = (gr / sr, gc / sc);
        match g.mode {
            DecompMode::OneD => (sr * sc) as u64,
            DecompMode::TwoDQuadruple => {
                traversal(bi, bj).step_of(gr % sr, gc % sc, sr, sc) as u64 + 1
            }
        }
    };
    let mut cycles = 0;
    for bi in 0..g.v {
        for bj in 0..g.h {
            let t = traversal(bi, bj);
            let mut emitted = 0u64;
            for k in 0..rows * cols {
                let (pr, pc) = t.position(k, rows, cols);
                let gr = (bi * sr + pr) as isize - 1;
                let gc = (bj * sc + pc) as isize - 1;
                emitted = emitted.max(available(gr, gc)) + 1;
            }
            cycles = cycles.max(emitted);
        }
    }
    PaddingReport {
        cycles,
        halo_cells: (rows * cols - sr * sc) as u64,
    }
}
