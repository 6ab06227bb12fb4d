use super::PerfError;
use crate::laplacian::{DecompMode, Decomposition};

/// Lane layout used for pricing. Unlike [`Decomposition`] the subgrid
/// sizes are rounded up, so layouts whose partition counts do not divide
/// `n` can still be costed (the last lanes are then partly idle).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct LaneGeometry {
    pub n: usize,
    pub v: usize,
    pub h: usize,
    pub mode: DecompMode,
    pub sub_rows: usize,
    pub sub_cols: usize,
}

impl LaneGeometry {
    pub fn new(n: usize, v: usize, h: usize, mode: DecompMode) -> Result<Self, PerfError> {
        if n == 0 {
            return Err(PerfError::EmptyGrid);
        }
        if v == 0 || h == 0 {
            return Err(PerfError::ZeroFactor);
        }
        if v > n || h > n {
            return Err(PerfError::TooManyLanes { n, v, h });
        }
        match mode {
            DecompMode::OneD if h != 1 => return Err(PerfError::OneDNeedsSingleColumn { h }),
            DecompMode::TwoDQuadruple
                if v < 2 || h < 2 || !v.is_multiple_of(2) || !h.is_multiple_of(2) =>
            {
                return Err(PerfError::QuadrupleNeedsEven { v, h })
            }
            _ => {}
        }
        Ok(Self {
            n,
            v,
            h,
            mode,
            sub_rows: n.div_ceil(v),
            sub_cols: n.div_ceil(h),
        })
    }

    /// The layout used for a given FACTOR: strips for `factor <= 2`,
    /// otherwise the most nearly square quadruple lattice (taller than wide
    /// on ties), falling back to strips when no even split exists.
    pub fn canonical(n: usize, factor: usize) -> Result<Self, PerfError> {
        if factor == 0 {
            return Err(PerfError::ZeroFactor);
        }
        if factor > 2 {
            let best = (2..=factor)
                .step_by(2)
                .filter(|&h| {
                    factor.is_multiple_of(h) && (factor / h).is_multiple_of(2) && factor / h >= h
                })
                .map(|h| (factor / h, h))
                .min_by_key(|&(v, h)| v - h);
            if let Some((v, h)) = best {
                return Self::new(n, v, h, DecompMode::TwoDQuadruple);
            }
        }
        Self::new(n, factor, 1, DecompMode::OneD)
    }

    pub fn from_decomposition(d: &Decomposition) -> Self {
        Self {
            n: d.n(),
            v: d.v(),
            h: d.h(),
            mode: d.mode(),
            sub_rows: d.sub_rows(),
            sub_cols: d.sub_cols(),
        }
    }

    pub fn factor(&self) -> usize {
        self.v * self.h
    }

    /// Elements each lane streams per vector operation.
    pub fn lane_len(&self) -> usize {
        self.sub_rows * self.sub_cols
    }

    pub fn is_exact(&self) -> bool {
        self.n.is_multiple_of(self.v) && self.n.is_multiple_of(self.h)
    }

    /// The functional decomposition with this layout, when one exists.
    pub fn decomposition(&self) -> Option<Decomposition> {
        Decomposition::new(self.n, self.v, self.h, self.mode).ok()
    }
}
