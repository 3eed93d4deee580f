use core::sync::atomic::{AtomicU64, AtomicUsize, Ordering};

use crate::{Error, Result};

static RANK_BOUND: AtomicUsize = AtomicUsize::new(Bounds::DEFAULT_RANK);
static COORDINATE_BOUND: AtomicU64 = AtomicU64::new(Bounds::DEFAULT_COORDINATE);

/// Enumeration limits for Hilbert bases, dualization and lattice point searches.
///
/// `rank` caps the dimension of any cone that gets dualized or enumerated;
/// `coordinate` caps the half-width of any enumeration box, measured in
/// lattice coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Bounds {
    pub rank: usize,
    pub coordinate: u64,
}

impl Default for Bounds {
    fn default() -> Self {
        Bounds {
            rank: Self::DEFAULT_RANK,
            coordinate: Self::DEFAULT_COORDINATE,
        }
    }
}

impl Bounds {
    pub const DEFAULT_RANK: usize = 4;
    pub const DEFAULT_COORDINATE: u64 = 64;

    /// The process-wide bounds used by the convenience entry points.
    pub fn current() -> Self {
        Bounds {
            rank: RANK_BOUND.load(Ordering::Relaxed),
            coordinate: COORDINATE_BOUND.load(Ordering::Relaxed),
        }
    }

    /// Replaces the process-wide bounds (the CLI does this once at startup).
    pub fn install(self) {
        RANK_BOUND.store(self.rank, Ordering::Relaxed);
        COORDINATE_BOUND.store(self.coordinate, Ordering::Relaxed);
    }

    pub(crate) fn check_rank(&self, rank: usize) -> Result<()> {
        if rank > self.rank {
            return Err(Error::BoundExceeded {
                what: "rank",
                value: rank as u64,
                bound: self.rank as u64,
            });
        }
        Ok(())
    }

    pub(crate) fn check_coordinate(&self, extent: u64) -> Result<()> {
        if extent > self.coordinate {
            return Err(Error::BoundExceeded {
                what: "coordinate",
                value: extent,
                bound: self.coordinate,
            });
        }
        Ok(())
    }
}
