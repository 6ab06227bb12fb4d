use alloc::vec::Vec;

use super::{Algorithm, LaneGeometry, LatencyConstants};
use crate::dataflow::{AxpyEngine, DotTreeEngine, LineBufferEngine};
use crate::math::ceil_log2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BlockKind {
    Spmv,
    Dot,
    Axpy,
    Div,
    Sub,
}

/// How a consumer depends on a producer.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EdgeKind {
    /// Element-wise stream: the consumer may start once the producer's first
    /// element is out and finishes no earlier than its own drain time after
    /// the producer's last element.
    Stream,
    /// The consumer waits for the producer to finish (scalar results, or
    /// vectors read in a different order than they were written).
    Complete,
}

/// Timing of one block, all in cycles relative to its start.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BlockTiming {
    pub latency: u64,
    pub first_output: u64,
    /// Cycles from its last input element to its last output.
    pub drain: u64,
}

/// Latencies of the individual blocks for one geometry and constant set.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BlockLatencies {
    pub spmv: BlockTiming,
    pub dot: BlockTiming,
    pub axpy: BlockTiming,
    pub div: BlockTiming,
    pub sub: BlockTiming,
}

impl BlockLatencies {
    pub fn new(g: &LaneGeometry, c: &LatencyConstants) -> Self {
        let len = g.lane_len();
        let depth = u64::from(ceil_log2(g.factor() as u64));
        let spmv = BlockTiming {
            latency: LineBufferEngine::<f64>::cycles_for(g.sub_rows, g.sub_cols),
            first_output: LineBufferEngine::<f64>::first_output_for(g.sub_cols),
            drain: LineBufferEngine::<f64>::drain_for(g.sub_cols),
        };
        let dot_lat = DotTreeEngine::<f64>::cycles_for(len, g.factor(), c);
        let dot = BlockTiming {
            latency: dot_lat,
            first_output: dot_lat,
            drain: c.a_mul + c.b_add * depth + 2,
        };
        let axpy = BlockTiming {
            latency: AxpyEngine::cycles_for(len, c),
            first_output: AxpyEngine::INITIAL_LATENCY,
            drain: c.a_mul + c.b_add,
        };
        let scalar = |lat| BlockTiming {
            latency: lat,
            first_output: lat,
            drain: lat,
        };
        Self {
            spmv,
            dot,
            axpy,
            div: scalar(c.c_div),
            sub: scalar(c.b_add),
        }
    }

    pub fn of(&self, kind: BlockKind) -> BlockTiming {
        match kind {
            BlockKind::Spmv => self.spmv,
            BlockKind::Dot => self.dot,
            BlockKind::Axpy => self.axpy,
            BlockKind::Div => self.div,
            BlockKind::Sub => self.sub,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockNode {
    pub name: &'static str,
    pub kind: BlockKind,
    /// 0 for the start-up phase, then 1, 2, ...
    pub iteration: usize,
    pub timing: BlockTiming,
    pub start: u64,
    pub finish: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
    pub kind: EdgeKind,
}

/// An unrolled schedule of the start-up phase followed by a run of
/// iterations, with the steady-state cost read off the tail.
#[derive(Clone, Debug, PartialEq)]
pub struct IterationSchedule {
    pub algorithm: Algorithm,
    pub geometry: LaneGeometry,
    pub blocks: BlockLatencies,
    pub nodes: Vec<BlockNode>,
    pub edges: Vec<Edge>,
    /// Makespan of the start-up phase on its own.
    pub prologue_cycles: u64,
    /// Steady-state spacing between consecutive iteration completions.
    pub per_iteration_cycles: u64,
    /// Makespan of one iteration whose inputs are all ready at cycle 0.
    pub isolated_cycles: u64,
    /// SpMV sweeps per iteration and in the start-up phase.
    pub spmv_per_iteration: u64,
    pub spmv_in_prologue: u64,
}

impl IterationSchedule {
    /// Completion cycle of each unrolled iteration, index 0 being start-up.
    pub fn completions(&self) -> Vec<u64> {
        let last = self.nodes.iter().map(|n| n.iteration).max().unwrap_or(0);
        (0..=last)
            .map(|k| {
                self.nodes
                    .iter()
                    .filter(|n| n.iteration == k)
                    .map(|n| n.finish)
                    .max()
                    .unwrap_or(0)
            })
            .collect()
    }

    pub fn find(&self, name: &str, iteration: usize) -> Option<&BlockNode> {
        self.nodes
            .iter()
            .find(|n| n.name == name && n.iteration == iteration)
    }
}

/// A dependency inside a template: producer name, whether it belongs to the
/// previous iteration, and the edge kind.
type Input = (&'static str, bool, EdgeKind);

struct Template {
    body: &'static [(&'static str, BlockKind, &'static [Input])],
    prologue: &'static [(&'static str, BlockKind, &'static [Input])],
    /// Start-up nodes standing in for "previous iteration" producers (and
    /// sharing their hardware) when the first iteration runs.
    aliases: &'static [(&'static str, &'static str)],
}

use BlockKind::{Axpy, Div, Dot, Spmv, Sub};
use EdgeKind::{Complete, Stream};

const PREV: bool = true;
const CUR: bool = false;

static CG: Template = Template {
    prologue: &[
        ("spmv_ax", Spmv, &[]),
        ("axpy_res", Axpy, &[("spmv_ax", CUR, Stream)]),
    ],
    body: &[
        ("spmv", Spmv, &[("axpy_p", PREV, Stream)]),
        ("dot_rold", Dot, &[("axpy_r", PREV, Complete)]),
        (
            "dot_zp",
            Dot,
            &[("spmv", CUR, Stream), ("axpy_p", PREV, Stream)],
        ),
        (
            "div_alpha",
            Div,
            &[("dot_zp", CUR, Complete), ("dot_rold", CUR, Complete)],
        ),
        ("axpy_x", Axpy, &[("div_alpha", CUR, Complete)]),
        (
            "axpy_r",
            Axpy,
            &[("div_alpha", CUR, Complete), ("spmv", CUR, Complete)],
        ),
        ("dot_rr", Dot, &[("axpy_r", CUR, Stream)]),
        (
            "div_beta",
            Div,
            &[("dot_rr", CUR, Complete), ("dot_rold", CUR, Complete)],
        ),
        (
            "axpy_p",
            Axpy,
            &[("div_beta", CUR, Complete), ("axpy_r", CUR, Complete)],
        ),
    ],
    aliases: &[
        ("spmv", "spmv_ax"),
        ("axpy_r", "axpy_res"),
        ("axpy_p", "axpy_res"),
    ],
};

static NEWCG: Template = Template {
    prologue: &[
        ("spmv_ax", Spmv, &[]),
        ("axpy_res", Axpy, &[("spmv_ax", CUR, Stream)]),
        ("spmv_ar", Spmv, &[("axpy_res", CUR, Stream)]),
        ("dot_rr0", Dot, &[("axpy_res", CUR, Stream)]),
        (
            "dot_wr0",
            Dot,
            &[("spmv_ar", CUR, Stream), ("axpy_res", CUR, Stream)],
        ),
        ("spmv_aw", Spmv, &[("spmv_ar", CUR, Stream)]),
        (
            "div_alpha0",
            Div,
            &[("dot_rr0", CUR, Complete), ("dot_wr0", CUR, Complete)],
        ),
        (
            "axpy_x0",
            Axpy,
            &[("div_alpha0", CUR, Complete), ("axpy_res", CUR, Complete)],
        ),
        (
            "axpy_r0",
            Axpy,
            &[("div_alpha0", CUR, Complete), ("spmv_ar", CUR, Complete)],
        ),
        (
            "axpy_w0",
            Axpy,
            &[("div_alpha0", CUR, Complete), ("spmv_aw", CUR, Complete)],
        ),
    ],
    body: &[
        ("dot_rr", Dot, &[("axpy_r", PREV, Stream)]),
        (
            "dot_wr",
            Dot,
            &[("axpy_w", PREV, Stream), ("axpy_r", PREV, Stream)],
        ),
        ("spmv", Spmv, &[("axpy_w", PREV, Stream)]),
        ("div_beta", Div, &[("dot_rr", CUR, Complete)]),
        (
            "div_dg",
            Div,
            &[("dot_wr", CUR, Complete), ("dot_rr", CUR, Complete)],
        ),
        (
            "div_ba",
            Div,
            &[("div_beta", CUR, Complete), ("div_alpha", PREV, Complete)],
        ),
        (
            "sub",
            Sub,
            &[("div_dg", CUR, Complete), ("div_ba", CUR, Complete)],
        ),
        ("div_alpha", Div, &[("sub", CUR, Complete)]),
        (
            "axpy_z",
            Axpy,
            &[("spmv", CUR, Stream), ("div_beta", CUR, Complete)],
        ),
        (
            "axpy_q",
            Axpy,
            &[("div_beta", CUR, Complete), ("axpy_w", PREV, Complete)],
        ),
        (
            "axpy_p",
            Axpy,
            &[("div_beta", CUR, Complete), ("axpy_r", PREV, Complete)],
        ),
        (
            "axpy_x",
            Axpy,
            &[("div_alpha", CUR, Complete), ("axpy_p", CUR, Stream)],
        ),
        (
            "axpy_r",
            Axpy,
            &[("div_alpha", CUR, Complete), ("axpy_q", CUR, Stream)],
        ),
        (
            "axpy_w",
            Axpy,
            &[("div_alpha", CUR, Complete), ("axpy_z", CUR, Stream)],
        ),
    ],
    aliases: &[
        ("spmv", "spmv_aw"),
        ("dot_rr", "dot_rr0"),
        ("dot_wr", "dot_wr0"),
        ("div_alpha", "div_alpha0"),
        ("axpy_x", "axpy_x0"),
        ("axpy_r", "axpy_r0"),
        ("axpy_w", "axpy_w0"),
    ],
};

fn template(a: Algorithm) -> &'static Template {
    match a {
        Algorithm::Cg => &CG,
        Algorithm::NewCg => &NEWCG,
    }
}

/// Iterations unrolled after start-up; the last spacing is reported.
const UNROLL: usize = 12;

struct Builder {
    blocks: BlockLatencies,
    nodes: Vec<BlockNode>,
    edges: Vec<Edge>,
}

impl Builder {
    fn find(&self, name: &str, iteration: usize) -> Option<usize> {
        self.nodes
            .iter()
            .rposition(|n| n.name == name && n.iteration == iteration)
    }

    fn add(
        &mut self,
        name: &'static str,
        kind: BlockKind,
        iteration: usize,
        preds: &[(usize, EdgeKind)],
    ) {
        let timing = self.blocks.of(kind);
        let mut start = 0;
        let mut finish_floor = 0;
        for &(u, kind) in preds {
            let p = &self.nodes[u];
            match kind {
                EdgeKind::Stream => {
                    start = start.max(p.start + p.timing.first_output);
                    finish_floor = finish_floor.max(p.finish + timing.drain);
                }
                EdgeKind::Complete => start = start.max(p.finish),
            }
        }
        let to = self.nodes.len();
        self.edges
            .extend(preds.iter().map(|&(from, kind)| Edge { from, to, kind }));
        self.nodes.push(BlockNode {
            name,
            kind,
            iteration,
            timing,
            start,
            finish: (start + timing.latency).max(finish_floor),
        });
    }

    /// Appends iteration `k` of the body. References to the previous
    /// iteration resolve to iteration `k - 1`, or to start-up aliases when
    /// `k == 1`; with no predecessor at all they are treated as ready.
    fn add_iteration(&mut self, t: &Template, k: usize) {
        let lookup_prev = |b: &Builder, name: &str| -> Option<usize> {
            if k >= 2 {
                b.find(name, k - 1)
            } else {
                t.aliases
                    .iter()
                    .find(|(n, _)| *n == name)
                    .and_then(|(_, alias)| b.find(alias, 0))
            }
        };
        for &(name, kind, inputs) in t.body {
            let mut preds = Vec::new();
            for &(src, prev, ek) in inputs {
                let u = if prev {
                    lookup_prev(self, src)
                } else {
                    self.find(src, k)
                };
                if let Some(u) = u {
                    preds.push((u, ek));
                }
            }
            // The same unit serves this block in every iteration.
            if let Some(u) = lookup_prev(self, name) {
                if !preds.contains(&(u, EdgeKind::Complete)) {
                    preds.push((u, EdgeKind::Complete));
                }
            }
            self.add(name, kind, k, &preds);
        }
    }
}

/// Schedules start-up plus a run of iterations of `algo` over the block
/// DAG and reports the steady-state cycles per iteration.
pub fn schedule_iteration(
    algo: Algorithm,
    g: &LaneGeometry,
    c: &LatencyConstants,
) -> IterationSchedule {
    let t = template(algo);
    let blocks = BlockLatencies::new(g, c);

    let mut isolated = Builder {
        blocks,
        nodes: Vec::new(),
        edges: Vec::new(),
    };
    // Iteration 1 with no start-up nodes: every carried input is ready.
    isolated.add_iteration(t, 1);
    let isolated_cycles = isolated.nodes.iter().map(|n| n.finish).max().unwrap_or(0);

    let mut b = Builder {
        blocks,
        nodes: Vec::new(),
        edges: Vec::new(),
    };
    for &(name, kind, inputs) in t.prologue {
        let preds: Vec<(usize, EdgeKind)> = inputs
            .iter()
            .filter_map(|&(src, _, ek)| b.find(src, 0).map(|u| (u, ek)))
            .collect();
        b.add(name, kind, 0, &preds);
    }
    let prologue_cycles = b.nodes.iter().map(|n| n.finish).max().unwrap_or(0);
    for k in 1..=UNROLL {
        b.add_iteration(t, k);
    }

    let count = |nodes: &[(&str, BlockKind, &[Input])]| {
        nodes.iter().filter(|(_, kind, _)| *kind == Spmv).count() as u64
    };
    let mut s = IterationSchedule {
        algorithm: algo,
        geometry: *g,
        blocks,
        nodes: b.nodes,
        edges: b.edges,
        prologue_cycles,
        per_iteration_cycles: 0,
        isolated_cycles,
        spmv_per_iteration: count(t.body),
        spmv_in_prologue: count(t.prologue),
    };
    let done = s.completions();
    s.per_iteration_cycles = done[UNROLL] - done[UNROLL - 1];
    s
}
