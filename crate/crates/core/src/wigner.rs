//! Wigner and cross-Wigner transforms, Weyl symbols, and phase-space
//! marginalization.
//!
//! All transforms share one kernel <-> phase-space engine (see
//! [`crate::fourier`]): per degree of freedom,
//!
//! ```text
//! W(x, p) = (2*pi*hbar)^-1 * sum_y exp(-i p y / hbar) K(x + y/2, x - y/2) dx
//! ```
//!
//! with `y` running over a length-`2N` half-step lattice and values outside
//! the domain taken as zero. The engine is linear in the kernel and factors
//! exactly over axis pairs, so marginalizing the output over one subsystem's
//! phase plane reproduces the transform of the operator-level partial trace
//! up to rounding, independent of how well the state is resolved.
//!
//! Sign conventions are anchored by tests: the ground-state packet
//! (`sigma^2 = hbar/2`) must produce `(pi*hbar)^-n exp(-(x^2+p^2)/hbar)` on
//! the nose, and a packet displaced to momentum `p0 > 0` must peak at
//! positive `p`.

use crate::error::{Error, Result};
use crate::fourier::PairEngine;
use crate::grid::{Partition, PhaseSpaceGrid};
use crate::hilbert::{DensityMatrix, WaveFunction};
use ndarray::{Array2, Array3, ArrayD, Axis, Dimension, IxDyn, Zip};
use num_complex::Complex64;
use std::f64::consts::PI;

/// Largest wavefunction amplitude tolerated at the grid boundary before a
/// transform: the `y` integral zero-pads outside the domain.
pub const STATE_BOUNDARY_TOL: f64 = 1e-10;
/// Kernel boundary magnitude tolerated, relative to `max |K|`.
pub const KERNEL_BOUNDARY_TOL: f64 = 1e-10;
/// Imaginary residue tolerated when truncating a diagonal Wigner transform
/// to real values, relative to `max |Re|`.
pub const IMAG_RESIDUE_TOL: f64 = 1e-10;
/// How far the integral of a Wigner grid may deviate from one before
/// reconstruction refuses it.
pub const WIGNER_NORM_TOL: f64 = 1e-4;

/// Real-valued phase-space distribution sampled on the full lattice,
/// axis order `(x_1..x_n, p_1..p_n)`.
#[derive(Debug, Clone)]
pub struct WignerGrid {
    grid: PhaseSpaceGrid,
    partition: Option<Partition>,
    values: ArrayD<f64>,
}

impl WignerGrid {
    pub fn new(
        grid: PhaseSpaceGrid,
        partition: Option<Partition>,
        values: ArrayD<f64>,
    ) -> Result<Self> {
        let want: Vec<usize> = vec![grid.points(); 2 * grid.n()];
        if values.shape() != want.as_slice() {
            return Err(Error::PhaseShape);
        }
        if let Some(p) = &partition {
            p.check_grid(&grid)?;
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("wigner values"));
        }
        Ok(Self {
            grid,
            partition,
            values: values.as_standard_layout().to_owned(),
        })
    }

    pub fn grid(&self) -> &PhaseSpaceGrid {
        &self.grid
    }

    pub fn partition(&self) -> Option<&Partition> {
        self.partition.as_ref()
    }

    pub fn with_partition(mut self, partition: Option<Partition>) -> Result<Self> {
        if let Some(p) = &partition {
            p.check_grid(&self.grid)?;
        }
        self.partition = partition;
        Ok(self)
    }

    pub fn values(&self) -> &ArrayD<f64> {
        &self.values
    }

    /// Riemann integral over the full phase lattice, `sum W (dx dp)^n`.
    pub fn integral(&self) -> f64 {
        let cell = (self.grid.dx() * self.grid.dp()).powi(self.grid.n() as i32);
        self.values.sum() * cell
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.abs()).fold(0.0, f64::max)
    }
}

/// Complex-valued cross-Wigner transform `W(phi, psi)` on the phase lattice.
#[derive(Debug, Clone)]
pub struct CrossWignerGrid {
    grid: PhaseSpaceGrid,
    values: ArrayD<Complex64>,
}

impl CrossWignerGrid {
    pub fn grid(&self) -> &PhaseSpaceGrid {
        &self.grid
    }

    pub fn values(&self) -> &ArrayD<Complex64> {
        &self.values
    }

    /// `sum W (dx dp)^n`; equals the overlap `<psi|phi>` for a state pair.
    pub fn integral(&self) -> Complex64 {
        let cell = (self.grid.dx() * self.grid.dp()).powi(self.grid.n() as i32);
        self.values.sum() * cell
    }
}

/// Phase-space function used as a Weyl symbol; complex-valued in general.
#[derive(Debug, Clone)]
pub struct SymbolGrid {
    grid: PhaseSpaceGrid,
    values: ArrayD<Complex64>,
}

impl SymbolGrid {
    pub fn new(grid: PhaseSpaceGrid, values: ArrayD<Complex64>) -> Result<Self> {
        let want: Vec<usize> = vec![grid.points(); 2 * grid.n()];
        if values.shape() != want.as_slice() {
            return Err(Error::PhaseShape);
        }
        Ok(Self {
            grid,
            values: values.as_standard_layout().to_owned(),
        })
    }

    /// Samples `f(z)` on the lattice; coordinates arrive in storage order
    /// `(x_1..x_n, p_1..p_n)`.
    pub fn from_fn(grid: &PhaseSpaceGrid, f: impl Fn(&[f64]) -> Complex64) -> Result<Self> {
        let n = grid.n();
        let mut values = ArrayD::<Complex64>::default(IxDyn(&vec![grid.points(); 2 * n]));
        let positions = grid.positions();
        let momenta = grid.momenta();
        let mut z = vec![0.0; 2 * n];
        for (idx, out) in values.indexed_iter_mut() {
            for ax in 0..n {
                z[ax] = positions[idx[ax]];
                z[n + ax] = momenta[idx[n + ax]];
            }
            *out = f(&z);
        }
        Self::new(grid.clone(), values)
    }

    pub fn grid(&self) -> &PhaseSpaceGrid {
        &self.grid
    }

    pub fn values(&self) -> &ArrayD<Complex64> {
        &self.values
    }

    /// Largest magnitude on the outermost phase-lattice shell relative to
    /// the overall maximum; the discrete stand-in for symbol decay.
    pub fn boundary_max_rel(&self) -> f64 {
        let last = self.grid.points() - 1;
        let max_abs = self.values.iter().map(|c| c.norm()).fold(0.0f64, f64::max);
        if max_abs == 0.0 {
            return 0.0;
        }
        let mut m = 0.0f64;
        for (idx, v) in self.values.indexed_iter() {
            if (0..idx.ndim()).any(|ax| idx[ax] == 0 || idx[ax] == last) {
                m = m.max(v.norm());
            }
        }
        m / max_abs
    }
}

/// Trace estimated from a symbol integral, with the boundary-decay proxy
/// reported rather than enforced.
#[derive(Debug, Clone, Copy)]
pub struct TraceEstimate {
    pub value: Complex64,
    /// Whether the symbol decays below [`KERNEL_BOUNDARY_TOL`] at the edge.
    pub boundary_ok: bool,
    pub boundary_max_rel: f64,
}

fn apply_pair(
    arr: ArrayD<Complex64>,
    ax_row: usize,
    ax_col: usize,
    engine: &PairEngine,
    scale: f64,
    forward: bool,
) -> ArrayD<Complex64> {
    let ndim = arr.ndim();
    let mut perm: Vec<usize> = (0..ndim).filter(|&a| a != ax_row && a != ax_col).collect();
    perm.push(ax_row);
    perm.push(ax_col);
    let permuted = arr.permuted_axes(IxDyn(&perm));
    let shape_perm: Vec<usize> = permuted.shape().to_vec();
    let std = permuted.as_standard_layout().into_owned();
    let batch: usize = shape_perm[..ndim - 2].iter().product();
    let n = shape_perm[ndim - 1];
    let a3: Array3<Complex64> = std
        .into_shape_with_order((batch, n, n))
        .expect("contiguous reshape");
    let mut out3 = Array3::<Complex64>::default((batch, n, n));
    Zip::from(a3.outer_iter())
        .and(out3.outer_iter_mut())
        .par_for_each(|lane, mut out| {
            if forward {
                engine.forward_lane(&lane, scale, &mut out);
            } else {
                engine.inverse_lane(&lane, scale, &mut out);
            }
        });
    let outd = out3
        .into_shape_with_order(IxDyn(&shape_perm))
        .expect("reshape back");
    let mut inv = vec![0usize; ndim];
    for (newpos, &old) in perm.iter().enumerate() {
        inv[old] = newpos;
    }
    outd.permuted_axes(IxDyn(&inv))
}

/// Kernel tensor `[r_1..r_n, c_1..c_n]` -> phase tensor `[x_1..x_n, p_1..p_n]`
/// with the Wigner normalization `(2*pi*hbar)^-n`.
fn kernel_to_phase(kernel: ArrayD<Complex64>, grid: &PhaseSpaceGrid) -> ArrayD<Complex64> {
    let n = grid.n();
    let engine = PairEngine::new(grid.points());
    let scale = grid.dx() / (2.0 * PI * grid.hbar());
    let mut arr = kernel;
    for ax in 0..n {
        arr = apply_pair(arr, ax, n + ax, &engine, scale, true);
    }
    arr.as_standard_layout().into_owned()
}

/// Inverse of [`kernel_to_phase`]: phase tensor -> kernel tensor, carrying
/// the momentum measure `dp` per axis.
fn phase_to_kernel(phase: ArrayD<Complex64>, grid: &PhaseSpaceGrid) -> ArrayD<Complex64> {
    let n = grid.n();
    let engine = PairEngine::new(grid.points());
    let scale = grid.dp();
    let mut arr = phase;
    for ax in 0..n {
        arr = apply_pair(arr, ax, n + ax, &engine, scale, false);
    }
    arr.as_standard_layout().into_owned()
}

fn kernel_nd_from_matrix(kernel: &Array2<Complex64>, grid: &PhaseSpaceGrid) -> ArrayD<Complex64> {
    let shape: Vec<usize> = vec![grid.points(); 2 * grid.n()];
    kernel
        .to_owned()
        .into_shape_with_order(IxDyn(&shape))
        .expect("kernel dims are a power of the lattice size")
}

fn truncate_to_real(values: ArrayD<Complex64>) -> Result<ArrayD<f64>> {
    let max_re = values.iter().map(|c| c.re.abs()).fold(0.0f64, f64::max);
    let max_im = values.iter().map(|c| c.im.abs()).fold(0.0f64, f64::max);
    if max_im > IMAG_RESIDUE_TOL * max_re.max(f64::MIN_POSITIVE) {
        return Err(Error::NotHermitian { defect: max_im });
    }
    Ok(values.mapv(|c| c.re))
}

fn check_state_boundary(psi: &WaveFunction) -> Result<()> {
    let leak = psi.boundary_max();
    if leak > STATE_BOUNDARY_TOL {
        return Err(Error::BoundaryLeak {
            leak,
            limit: STATE_BOUNDARY_TOL,
        });
    }
    Ok(())
}

/// Cross-Wigner transform
/// `W(phi, psi)(x, p) = (2*pi*hbar)^-n Int exp(-i p y / hbar) phi(x + y/2) conj(psi)(x - y/2) dy`.
///
/// Both states must live on the same grid and be numerically supported away
/// from the boundary. Integrating the output over phase space yields the
/// overlap `<psi|phi>`.
pub fn cross_wigner(phi: &WaveFunction, psi: &WaveFunction) -> Result<CrossWignerGrid> {
    if phi.grid() != psi.grid() {
        return Err(Error::GridMismatch {
            what: "cross-Wigner state grids",
        });
    }
    check_state_boundary(phi)?;
    check_state_boundary(psi)?;
    let grid = phi.grid().clone();
    let (fa, fb) = (phi.flat(), psi.flat());
    let dim = fa.len();
    let mut kernel = Array2::<Complex64>::default((dim, dim));
    for i in 0..dim {
        for j in 0..dim {
            kernel[(i, j)] = fa[i] * fb[j].conj();
        }
    }
    let values = kernel_to_phase(kernel_nd_from_matrix(&kernel, &grid), &grid);
    Ok(CrossWignerGrid { grid, values })
}

/// Wigner transform of a pure state, `W(psi, psi)` truncated to real.
pub fn wigner_transform(psi: &WaveFunction) -> Result<WignerGrid> {
    let cross = cross_wigner(psi, psi)?;
    let values = truncate_to_real(cross.values)?;
    WignerGrid::new(cross.grid, None, values)
}

/// Wigner distribution of a density matrix: the kernel transformed along
/// the antidiagonal direction per position, truncated to real.
pub fn wigner_of_density(rho: &DensityMatrix) -> Result<WignerGrid> {
    let rel = rho.boundary_max_rel();
    if rel > KERNEL_BOUNDARY_TOL {
        return Err(Error::BoundaryLeak {
            leak: rel,
            limit: KERNEL_BOUNDARY_TOL,
        });
    }
    let grid = rho.grid().clone();
    let values = kernel_to_phase(kernel_nd_from_matrix(rho.kernel(), &grid), &grid);
    let values = truncate_to_real(values)?;
    WignerGrid::new(grid, None, values)
}

/// Reconstructs the position kernel from a Wigner distribution,
/// `<x + y/2| rho |x - y/2> = Int exp(i p y / hbar) W(x, p) dp`,
/// and renormalizes the trace to one (the input may integrate to one only
/// within [`WIGNER_NORM_TOL`]).
pub fn density_from_wigner(w: &WignerGrid) -> Result<DensityMatrix> {
    let total = w.integral();
    if (total - 1.0).abs() > WIGNER_NORM_TOL {
        return Err(Error::WignerNormalization(total));
    }
    let grid = w.grid().clone();
    let phase = w.values().mapv(|v| Complex64::new(v, 0.0));
    let kernel_nd = phase_to_kernel(phase, &grid);
    let dim = grid.kernel_dim();
    let kernel: Array2<Complex64> = kernel_nd
        .into_shape_with_order((dim, dim))
        .expect("kernel dims");
    let cell = grid.dx().powi(grid.n() as i32);
    let trace: Complex64 = kernel.diag().sum() * cell;
    let kernel = kernel.mapv(|c| c / trace.re);
    DensityMatrix::new(grid, kernel)
}

/// Weyl symbol of a density matrix; equals `(2*pi*hbar)^n` times its Wigner
/// distribution, kept complex so Hermiticity can be checked downstream.
pub fn weyl_symbol(rho: &DensityMatrix) -> Result<SymbolGrid> {
    let rel = rho.boundary_max_rel();
    if rel > KERNEL_BOUNDARY_TOL {
        return Err(Error::BoundaryLeak {
            leak: rel,
            limit: KERNEL_BOUNDARY_TOL,
        });
    }
    weyl_symbol_of_kernel(rho.grid(), rho.kernel())
}

/// Weyl symbol of an arbitrary dense kernel on `grid` (no state validation);
/// used for operator products such as `rho^2`.
pub fn weyl_symbol_of_kernel(
    grid: &PhaseSpaceGrid,
    kernel: &Array2<Complex64>,
) -> Result<SymbolGrid> {
    let dim = grid.kernel_dim();
    if kernel.shape() != [dim, dim] {
        return Err(Error::KernelShape {
            got: kernel.nrows(),
            expected: dim,
        });
    }
    let factor = (2.0 * PI * grid.hbar()).powi(grid.n() as i32);
    let values = kernel_to_phase(kernel_nd_from_matrix(kernel, grid), grid).mapv(|c| c * factor);
    SymbolGrid::new(grid.clone(), values)
}

/// Weyl pairing `Int q(z) W(phi, psi)(z) dz`; for `q` the symbol of an
/// operator `Q` this is the matrix element `<phi|Q psi>` (bra-ket linear in
/// the first slot, matching the symbol calculus convention).
pub fn pairing_via_symbol(
    q: &SymbolGrid,
    phi: &WaveFunction,
    psi: &WaveFunction,
) -> Result<Complex64> {
    if q.grid() != phi.grid() || q.grid() != psi.grid() {
        return Err(Error::GridMismatch {
            what: "symbol and state grids",
        });
    }
    let w = cross_wigner(phi, psi)?;
    let cell = (q.grid().dx() * q.grid().dp()).powi(q.grid().n() as i32);
    let acc: Complex64 = q
        .values()
        .iter()
        .zip(w.values().iter())
        .map(|(a, b)| a * b)
        .sum();
    Ok(acc * cell)
}

/// Trace via the symbol integral, `(2*pi*hbar)^-n Int q(z) dz`. Boundary
/// decay of the symbol is reported, not enforced.
pub fn trace_via_integral(q: &SymbolGrid) -> TraceEstimate {
    let grid = q.grid();
    let cell = (grid.dx() * grid.dp()).powi(grid.n() as i32);
    let pref = (2.0 * PI * grid.hbar()).powi(-(grid.n() as i32));
    let value = q.values().sum() * cell * pref;
    let boundary = q.boundary_max_rel();
    TraceEstimate {
        value,
        boundary_ok: boundary <= KERNEL_BOUNDARY_TOL,
        boundary_max_rel: boundary,
    }
}

/// Integrates a bipartite Wigner distribution over the B phase plane:
/// `W_A(z_A) = sum_{x_B, p_B} W(z_A, z_B) (dx dp)^{n_B}`.
///
/// The finite sum preserves the total integral exactly.
pub fn marginalize_b(w: &WignerGrid, part: &Partition) -> Result<WignerGrid> {
    part.check_grid(w.grid())?;
    let n = w.grid().n();
    let n_a = part.n_a();
    let mut values = w.values().clone();
    // remove B momentum axes first (higher indices), then B position axes
    for ax in ((n + n_a)..(2 * n)).rev() {
        values = values.sum_axis(Axis(ax));
    }
    for ax in (n_a..n).rev() {
        values = values.sum_axis(Axis(ax));
    }
    let cell_b = (w.grid().dx() * w.grid().dp()).powi(part.n_b() as i32);
    values.mapv_inplace(|v| v * cell_b);
    let grid_a = w.grid().subgrid(n_a)?;
    WignerGrid::new(grid_a, None, values)
}

/// Position marginal: sums out every momentum axis, leaving a real function
/// over the position lattice that matches the kernel diagonal.
pub fn marginal_position(w: &WignerGrid) -> ArrayD<f64> {
    let n = w.grid().n();
    let mut values = w.values().clone();
    for ax in (n..2 * n).rev() {
        values = values.sum_axis(Axis(ax));
    }
    let dp_n = w.grid().dp().powi(n as i32);
    values.mapv_inplace(|v| v * dp_n);
    values
}
