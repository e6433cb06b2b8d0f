//! Discretization of position and phase space.
//!
//! A [`PhaseSpaceGrid`] fixes, per degree of freedom, a uniform position
//! lattice of `N` points on `[x_min, x_max)` together with the conjugate
//! momentum lattice in the centered convention
//!
//! ```text
//! x_i = x_min + i * dx,            dx = (x_max - x_min) / N
//! p_k = 2*pi*hbar * (k - N/2) / L, k = 0..N      (monotone, one extra negative bin)
//! ```
//!
//! so that `dx * dp * N = 2*pi*hbar` holds exactly per axis. Every transform
//! in the crate is defined relative to these lattices. Grids are immutable
//! after construction and cheap to clone.

use crate::error::{Error, Result};
use std::f64::consts::PI;

/// Uniform position/momentum lattice for `n` degrees of freedom.
///
/// All axes share one `(N, x_min, x_max)` triple; `hbar` is carried as a
/// runtime parameter so conventions can be exercised at values other than 1.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseSpaceGrid {
    n: usize,
    points: usize,
    x_min: f64,
    x_max: f64,
    hbar: f64,
}

impl PhaseSpaceGrid {
    /// Builds a grid with `n` degrees of freedom and `points` lattice sites
    /// per axis. `points` must be even and at least 8.
    pub fn new(n: usize, points: usize, x_min: f64, x_max: f64, hbar: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::ZeroDegrees);
        }
        if !points.is_multiple_of(2) {
            return Err(Error::OddPoints(points));
        }
        if points < 8 {
            return Err(Error::TooFewPoints(points));
        }
        if x_max.is_nan() || x_min.is_nan() || x_max <= x_min || !(x_max - x_min).is_finite() {
            return Err(Error::DegenerateBounds { x_min, x_max });
        }
        if hbar.is_nan() || hbar <= 0.0 || hbar.is_infinite() {
            return Err(Error::NonPositiveHbar(hbar));
        }
        Ok(Self {
            n,
            points,
            x_min,
            x_max,
            hbar,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Lattice points per axis (the `N` of the FFT).
    pub fn points(&self) -> usize {
        self.points
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    /// Side length `L = x_max - x_min` of each position axis.
    pub fn length(&self) -> f64 {
        self.x_max - self.x_min
    }

    /// Position step per axis.
    pub fn dx(&self) -> f64 {
        self.length() / self.points as f64
    }

    /// Momentum step per axis, `2*pi*hbar / L`.
    pub fn dp(&self) -> f64 {
        2.0 * PI * self.hbar / self.length()
    }

    /// Position of lattice site `i` on one axis.
    pub fn position(&self, i: usize) -> Result<f64> {
        if i >= self.points {
            return Err(Error::IndexOutOfRange {
                index: i,
                len: self.points,
            });
        }
        Ok(self.x_min + i as f64 * self.dx())
    }

    /// Momentum of lattice site `k` on one axis, centered convention:
    /// `p_k = dp * (k - N/2)` runs monotonically from `-pi*hbar*N/L`.
    pub fn momentum(&self, k: usize) -> Result<f64> {
        if k >= self.points {
            return Err(Error::IndexOutOfRange {
                index: k,
                len: self.points,
            });
        }
        Ok(self.dp() * (k as f64 - self.points as f64 / 2.0))
    }

    /// All positions on one axis.
    pub fn positions(&self) -> Vec<f64> {
        (0..self.points)
            .map(|i| self.x_min + i as f64 * self.dx())
            .collect()
    }

    /// All momenta on one axis, in increasing order.
    pub fn momenta(&self) -> Vec<f64> {
        (0..self.points)
            .map(|k| self.dp() * (k as f64 - self.points as f64 / 2.0))
            .collect()
    }

    /// Number of position-lattice sites, `N^n` (the dense kernel dimension).
    pub fn kernel_dim(&self) -> usize {
        self.points.pow(self.n as u32)
    }

    /// Number of phase-space lattice sites, `N^(2n)`.
    pub fn phase_len(&self) -> usize {
        self.points.pow(2 * self.n as u32)
    }

    /// Grid for a subset of the degrees of freedom (same axis parameters).
    pub fn subgrid(&self, n: usize) -> Result<Self> {
        Self::new(n, self.points, self.x_min, self.x_max, self.hbar)
    }

    /// Two grids are compatible when they share `N`, bounds and `hbar`
    /// bit-exactly; tensor products and file round trips require this.
    pub fn compatible(&self, other: &Self) -> bool {
        self.points == other.points
            && self.x_min == other.x_min
            && self.x_max == other.x_max
            && self.hbar == other.hbar
    }

    /// Coordinates of a phase-space lattice node.
    ///
    /// `idx` has `2n` entries in storage order `(x_1..x_n, p_1..p_n)`. The
    /// returned coordinates follow the canonical covariance ordering
    /// `(x_A, p_A, x_B, p_B)` when a partition is given, and `(x, p)`
    /// otherwise.
    pub fn phase_point(&self, partition: Option<&Partition>, idx: &[usize]) -> Result<Vec<f64>> {
        if idx.len() != 2 * self.n {
            return Err(Error::PhaseShape);
        }
        let mut xs = Vec::with_capacity(self.n);
        let mut ps = Vec::with_capacity(self.n);
        for axis in 0..self.n {
            xs.push(self.position(idx[axis])?);
            ps.push(self.momentum(idx[self.n + axis])?);
        }
        match partition {
            None => Ok(xs.into_iter().chain(ps).collect()),
            Some(part) => {
                part.check_grid(self)?;
                let mut out = Vec::with_capacity(2 * self.n);
                out.extend_from_slice(&xs[..part.n_a()]);
                out.extend_from_slice(&ps[..part.n_a()]);
                out.extend_from_slice(&xs[part.n_a()..]);
                out.extend_from_slice(&ps[part.n_a()..]);
                Ok(out)
            }
        }
    }
}

/// Bipartite split of the degrees of freedom: the first `n_a` axes belong to
/// subsystem A, the remaining `n_b` to subsystem B.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Partition {
    n_a: usize,
    n_b: usize,
}

impl Partition {
    pub fn new(n_a: usize, n_b: usize) -> Result<Self> {
        if n_a == 0 || n_b == 0 {
            return Err(Error::PartitionMismatch {
                n_a,
                n_b,
                n: n_a + n_b,
            });
        }
        Ok(Self { n_a, n_b })
    }

    pub fn n_a(&self) -> usize {
        self.n_a
    }

    pub fn n_b(&self) -> usize {
        self.n_b
    }

    pub fn n(&self) -> usize {
        self.n_a + self.n_b
    }

    pub fn check_grid(&self, grid: &PhaseSpaceGrid) -> Result<()> {
        if self.n() != grid.n() {
            return Err(Error::PartitionMismatch {
                n_a: self.n_a,
                n_b: self.n_b,
                n: grid.n(),
            });
        }
        Ok(())
    }
}
