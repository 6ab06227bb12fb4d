//! Functional models of the three streaming units. Each computes the same
//! values as the sequential code it replaces and counts the cycles the
//! hardware would spend.

mod axpy;
mod dot;
mod stencil;

use thiserror::Error;

pub use axpy::AxpyEngine;
pub use dot::DotTreeEngine;
pub use stencil::{run_stencil_stream, LineBufferEngine, StencilRun, PIPELINE_DEPTH};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum DataflowError {
    #[error("engine needs at least one lane")]
    NoLanes,
    #[error("engine has {expected} lanes but was fed {got}")]
    LaneCount { expected: usize, got: usize },
    #[error("lane {lane} has length {got}, expected {expected}")]
    LengthMismatch {
        lane: usize,
        expected: usize,
        got: usize,
    },
    #[error("padded subgrid {rows}x{cols} with {len} values is malformed")]
    PaddedShape {
        rows: usize,
        cols: usize,
        len: usize,
    },
}

/// Checks that `a` and `b` both have `lanes` lanes of a common length and
/// returns that length.
fn common_lane_len<T, U>(
    lanes: usize,
    a: &[impl AsRef<[T]>],
    b: &[impl AsRef<[U]>],
) -> Result<usize, DataflowError> {
    for side in [a.len(), b.len()] {
        if side != lanes {
            return Err(DataflowError::LaneCount {
                expected: lanes,
                got: side,
            });
        }
    }
    let len = a[0].as_ref().len();
    for (lane, (x, y)) in a.iter().zip(b).enumerate() {
        for got in [x.as_ref().len(), y.as_ref().len()] {
            if got != len {
                return Err(DataflowError::LengthMismatch {
                    lane,
                    expected: len,
                    got,
                });
            }
        }
    }
    Ok(len)
}
