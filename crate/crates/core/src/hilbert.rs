//! Wavefunctions, density matrices and operator-level reductions.
//!
//! States live on the position lattice of a [`PhaseSpaceGrid`]: a
//! [`WaveFunction`] holds complex amplitudes of shape `[N; n]`, a
//! [`DensityMatrix`] holds the dense kernel `K(i, j) = <x_i| rho |x_j>` with
//! continuum normalization, so traces carry a factor `dx^n` and inner
//! products a factor `dx^n` per degree of freedom.
//!
//! The partial trace implemented here sums the kernel over the diagonal of
//! the traced-out lattice indices. On the lattice this realizes the basis
//! sum over a complete discrete basis exactly (the position delta basis
//! scaled by `dx^{-1/2}`), with no truncation error, which is what makes it
//! usable as an independent oracle for the phase-space marginalization.

use crate::error::{Error, Result};
use crate::grid::{Partition, PhaseSpaceGrid};
use ndarray::{Array1, Array2, ArrayD, IxDyn};
use num_complex::Complex64;

/// Relative Hermiticity tolerance for kernels, against `max |K|`.
pub const HERMITICITY_TOL: f64 = 1e-10;
/// Absolute tolerance on `|Tr(rho) - 1|`.
pub const TRACE_TOL: f64 = 1e-8;
/// Relative tolerance for negative eigenvalues, against the largest one.
pub const PSD_TOL: f64 = 1e-10;
/// Absolute tolerance on the sum of spectral weights.
pub const WEIGHT_SUM_TOL: f64 = 1e-8;
/// Gram defect above which a vector family is rejected as non-orthonormal.
pub const GRAM_TOL: f64 = 1e-6;
/// Eigenvalues at or below this threshold are dropped from decompositions.
pub const DEFAULT_EIGENVALUE_THRESHOLD: f64 = 1e-12;
/// Wavepacket amplitude allowed at the outermost lattice shell.
pub const PACKET_BOUNDARY_TOL: f64 = 1e-12;
/// Hard cap on dense kernel rows (`N^n`); bounds memory at desk scale.
pub const KERNEL_ROW_CAP: usize = 4096;

/// Complex amplitudes sampled on the position lattice, shape `[N; n]`.
#[derive(Debug, Clone)]
pub struct WaveFunction {
    grid: PhaseSpaceGrid,
    amplitudes: ArrayD<Complex64>,
}

impl WaveFunction {
    pub fn new(grid: PhaseSpaceGrid, amplitudes: ArrayD<Complex64>) -> Result<Self> {
        let want: Vec<usize> = vec![grid.points(); grid.n()];
        if amplitudes.shape() != want.as_slice() {
            return Err(Error::PhaseShape);
        }
        if amplitudes
            .iter()
            .any(|c| !c.re.is_finite() || !c.im.is_finite())
        {
            return Err(Error::NonFinite("wavefunction amplitudes"));
        }
        let amplitudes = amplitudes.as_standard_layout().to_owned();
        Ok(Self { grid, amplitudes })
    }

    pub fn grid(&self) -> &PhaseSpaceGrid {
        &self.grid
    }

    pub fn amplitudes(&self) -> &ArrayD<Complex64> {
        &self.amplitudes
    }

    /// Amplitudes as a flat row-major slice of length `N^n`.
    pub fn flat(&self) -> &[Complex64] {
        self.amplitudes.as_slice().expect("standard layout")
    }

    /// L2 norm with the lattice measure, `sqrt(sum |psi|^2 dx^n)`.
    pub fn norm(&self) -> f64 {
        let cell = self.grid.dx().powi(self.grid.n() as i32);
        (self.amplitudes.iter().map(|c| c.norm_sqr()).sum::<f64>() * cell).sqrt()
    }

    /// Inner product `<self|other> = sum conj(self) * other * dx^n`.
    pub fn inner(&self, other: &Self) -> Complex64 {
        let cell = self.grid.dx().powi(self.grid.n() as i32);
        self.amplitudes
            .iter()
            .zip(other.amplitudes.iter())
            .map(|(a, b)| a.conj() * b)
            .sum::<Complex64>()
            * cell
    }

    /// Returns the unit-norm copy of this state.
    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if n.is_nan() || n <= 0.0 || n.is_infinite() {
            return Err(Error::ZeroNorm);
        }
        let s = 1.0 / n;
        Ok(Self {
            grid: self.grid.clone(),
            amplitudes: self.amplitudes.mapv(|c| c * s),
        })
    }

    /// Largest amplitude magnitude on the outermost lattice shell.
    pub fn boundary_max(&self) -> f64 {
        let last = self.grid.points() - 1;
        let mut m: f64 = 0.0;
        for (idx, v) in self.amplitudes.indexed_iter() {
            let on_edge = (0..self.grid.n()).any(|ax| idx[ax] == 0 || idx[ax] == last);
            if on_edge {
                m = m.max(v.norm());
            }
        }
        m
    }

    /// Normalized Gaussian wavepacket
    /// `psi(x) ~ prod_ax exp(-(x - x0)^2 / (4 sigma^2) + i p0 x / hbar)`,
    /// where `sigma` is the position standard deviation of `|psi|^2`.
    /// `sigma = sqrt(hbar/2)` is the vacuum packet, whose Wigner transform
    /// is `(pi hbar)^-n exp(-z^2/hbar)`.
    ///
    /// Rejects packets whose amplitude at the grid boundary exceeds
    /// [`PACKET_BOUNDARY_TOL`] after normalization.
    pub fn gaussian_packet(
        grid: &PhaseSpaceGrid,
        center_x: &[f64],
        center_p: &[f64],
        width: &[f64],
    ) -> Result<Self> {
        let n = grid.n();
        if center_x.len() != n || center_p.len() != n || width.len() != n {
            return Err(Error::PhaseShape);
        }
        for &w in width {
            if w.is_nan() || w <= 0.0 {
                return Err(Error::NonPositiveWidth(w));
            }
        }
        let axis_vals: Vec<Array1<Complex64>> = (0..n)
            .map(|ax| {
                let mut v = Array1::default(grid.points());
                for i in 0..grid.points() {
                    let x = grid.x_min() + i as f64 * grid.dx();
                    let gauss = (-((x - center_x[ax]) / width[ax]).powi(2) / 4.0).exp();
                    let phase = center_p[ax] * x / grid.hbar();
                    v[i] = Complex64::from_polar(gauss, phase);
                }
                v
            })
            .collect();
        let mut amplitudes = ArrayD::<Complex64>::zeros(IxDyn(&vec![grid.points(); n]));
        for (idx, out) in amplitudes.indexed_iter_mut() {
            let mut val = Complex64::new(1.0, 0.0);
            for ax in 0..n {
                val *= axis_vals[ax][idx[ax]];
            }
            *out = val;
        }
        let psi = Self::new(grid.clone(), amplitudes)?.normalized()?;
        let leak = psi.boundary_max();
        if leak > PACKET_BOUNDARY_TOL {
            return Err(Error::BoundaryLeak {
                leak,
                limit: PACKET_BOUNDARY_TOL,
            });
        }
        Ok(psi)
    }

    /// Tensor product `self (x) other` on the combined grid; `amplitudes[i_A, i_B]
    /// = self[i_A] * other[i_B]`, the A axes coming first.
    pub fn tensor(&self, other: &Self) -> Result<Self> {
        if !self.grid.compatible(other.grid()) {
            return Err(Error::GridMismatch {
                what: "axis parameters (N, bounds, hbar)",
            });
        }
        let grid = self.grid.subgrid(self.grid.n() + other.grid.n())?;
        let (fa, fb) = (self.flat(), other.flat());
        let mut out = Vec::with_capacity(fa.len() * fb.len());
        for a in fa {
            for b in fb {
                out.push(a * b);
            }
        }
        let shape: Vec<usize> = vec![grid.points(); grid.n()];
        let amplitudes = ArrayD::from_shape_vec(IxDyn(&shape), out).expect("shape");
        Self::new(grid, amplitudes)
    }

    /// Applies a global phase `exp(i theta)`.
    pub fn phased(&self, theta: f64) -> Self {
        let ph = Complex64::from_polar(1.0, theta);
        Self {
            grid: self.grid.clone(),
            amplitudes: self.amplitudes.mapv(|c| c * ph),
        }
    }
}

/// Deterministic orthonormal family on a grid: a centered Gaussian envelope
/// multiplied by powers of the first axis coordinate, Gram-Schmidt
/// orthonormalized (twice, for stability). Used as the purifying B-side
/// family and as a well-conditioned discrete basis in tests.
pub fn hermite_like_family(
    grid: &PhaseSpaceGrid,
    count: usize,
    center: f64,
    width: f64,
) -> Result<Vec<WaveFunction>> {
    if count > grid.kernel_dim() {
        return Err(Error::RankExceedsDimension {
            rank: count,
            dim: grid.kernel_dim(),
        });
    }
    if width.is_nan() || width <= 0.0 {
        return Err(Error::NonPositiveWidth(width));
    }
    let n = grid.n();
    let pts = grid.points();
    let mut family: Vec<WaveFunction> = Vec::with_capacity(count);
    for k in 0..count {
        let mut amplitudes = ArrayD::<Complex64>::zeros(IxDyn(&vec![pts; n]));
        for (idx, out) in amplitudes.indexed_iter_mut() {
            let mut gauss = 1.0;
            for ax in 0..n {
                let x = grid.x_min() + idx[ax] as f64 * grid.dx();
                gauss *= (-((x - center) / width).powi(2) / 4.0).exp();
            }
            let x0 = grid.x_min() + idx[0] as f64 * grid.dx();
            let ladder = ((x0 - center) / width).powi(k as i32);
            *out = Complex64::new(gauss * ladder, 0.0);
        }
        let mut v = WaveFunction::new(grid.clone(), amplitudes)?.normalized()?;
        for _ in 0..2 {
            for e in &family {
                let c = e.inner(&v);
                let amplitudes = &v.amplitudes - &e.amplitudes.mapv(|a| a * c);
                v = WaveFunction {
                    grid: grid.clone(),
                    amplitudes,
                };
            }
        }
        let nv = v.norm();
        if nv < 1e-6 {
            return Err(Error::GramDefect(1.0 - nv));
        }
        family.push(v.normalized()?);
    }
    Ok(family)
}

/// Largest deviation of the family's Gram matrix from the identity.
pub fn gram_defect(vectors: &[WaveFunction]) -> f64 {
    let mut defect: f64 = 0.0;
    for (i, a) in vectors.iter().enumerate() {
        for (j, b) in vectors.iter().enumerate() {
            let delta = if i == j { 1.0 } else { 0.0 };
            defect = defect.max((a.inner(b) - delta).norm());
        }
    }
    defect
}

/// Eigenvalues and orthonormal eigenvectors of a density matrix, weights in
/// descending order.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    weights: Vec<f64>,
    vectors: Vec<WaveFunction>,
}

impl SpectralDecomposition {
    /// Validates positivity, the unit weight sum and orthonormality
    /// (Gram defect at most [`GRAM_TOL`]); sorts by descending weight.
    pub fn new(weights: Vec<f64>, vectors: Vec<WaveFunction>) -> Result<Self> {
        if weights.is_empty() || weights.len() != vectors.len() {
            return Err(Error::WeightSum(0.0));
        }
        if weights.iter().any(|&w| w.is_nan() || w <= 0.0) {
            return Err(Error::NegativeEigenvalue {
                value: weights.iter().cloned().fold(f64::INFINITY, f64::min),
            });
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::WeightSum(sum));
        }
        let defect = gram_defect(&vectors);
        if defect > GRAM_TOL {
            return Err(Error::GramDefect(defect));
        }
        let mut order: Vec<usize> = (0..weights.len()).collect();
        order.sort_by(|&a, &b| weights[b].partial_cmp(&weights[a]).unwrap());
        Ok(Self {
            weights: order.iter().map(|&i| weights[i]).collect(),
            vectors: order.iter().map(|&i| vectors[i].clone()).collect(),
        })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn vectors(&self) -> &[WaveFunction] {
        &self.vectors
    }

    pub fn rank(&self) -> usize {
        self.weights.len()
    }
}

/// Dense Hermitian position kernel of a quantum state.
///
/// Entry `(i, j)` is `<x_i| rho |x_j>` in continuum normalization; the trace
/// is the diagonal sum times `dx^n`. Construction validates Hermiticity and
/// the unit trace; positive semi-definiteness is an invariant of every
/// operation producing one and can be checked explicitly with
/// [`DensityMatrix::validate_full`] (it costs a full eigendecomposition).
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    grid: PhaseSpaceGrid,
    kernel: Array2<Complex64>,
}

impl DensityMatrix {
    pub fn new(grid: PhaseSpaceGrid, kernel: Array2<Complex64>) -> Result<Self> {
        let dim = grid.kernel_dim();
        if dim > KERNEL_ROW_CAP {
            return Err(Error::KernelTooLarge {
                got: dim,
                cap: KERNEL_ROW_CAP,
            });
        }
        if kernel.shape() != [dim, dim] {
            return Err(Error::KernelShape {
                got: kernel.nrows(),
                expected: dim,
            });
        }
        if kernel
            .iter()
            .any(|c| !c.re.is_finite() || !c.im.is_finite())
        {
            return Err(Error::NonFinite("density kernel"));
        }
        let max_abs = kernel.iter().map(|c| c.norm()).fold(0.0f64, f64::max);
        let mut herm_defect = 0.0f64;
        for i in 0..dim {
            for j in i..dim {
                herm_defect = herm_defect.max((kernel[(i, j)] - kernel[(j, i)].conj()).norm());
            }
        }
        if herm_defect > HERMITICITY_TOL * max_abs.max(f64::MIN_POSITIVE) {
            return Err(Error::NotHermitian {
                defect: herm_defect,
            });
        }
        let rho = Self { grid, kernel };
        let tr = rho.trace();
        let dev = (tr - Complex64::new(1.0, 0.0)).norm();
        if dev > TRACE_TOL {
            return Err(Error::TraceDeviation(dev));
        }
        Ok(rho)
    }

    /// Rank-one projector `|psi><psi|` of a normalized state.
    pub fn from_pure(psi: &WaveFunction) -> Result<Self> {
        let f = psi.flat();
        let dim = f.len();
        let mut kernel = Array2::default((dim, dim));
        for i in 0..dim {
            for j in 0..dim {
                kernel[(i, j)] = f[i] * f[j].conj();
            }
        }
        Self::new(psi.grid().clone(), kernel)
    }

    pub fn grid(&self) -> &PhaseSpaceGrid {
        &self.grid
    }

    pub fn kernel(&self) -> &Array2<Complex64> {
        &self.kernel
    }

    pub fn dim(&self) -> usize {
        self.kernel.nrows()
    }

    /// `Tr(rho)`, diagonal sum times `dx^n`.
    pub fn trace(&self) -> Complex64 {
        let cell = self.grid.dx().powi(self.grid.n() as i32);
        self.kernel.diag().sum() * cell
    }

    /// `Tr(rho^2) = sum |K_ij|^2 dx^{2n}`.
    pub fn purity(&self) -> f64 {
        let cell = self.grid.dx().powi(self.grid.n() as i32);
        self.kernel.iter().map(|c| c.norm_sqr()).sum::<f64>() * cell * cell
    }

    /// Kernel of the operator product `rho * rho` (not itself a state).
    pub fn square_kernel(&self) -> Array2<Complex64> {
        let cell = self.grid.dx().powi(self.grid.n() as i32);
        self.kernel.dot(&self.kernel).mapv(|c| c * cell)
    }

    /// Largest kernel magnitude where either position index touches the
    /// outermost lattice shell, relative to `max |K|`.
    pub fn boundary_max_rel(&self) -> f64 {
        let pts = self.grid.points();
        let n = self.grid.n();
        let max_abs = self.kernel.iter().map(|c| c.norm()).fold(0.0f64, f64::max);
        if max_abs == 0.0 {
            return 0.0;
        }
        let on_edge = |flat: usize| -> bool {
            let mut rest = flat;
            for ax in (0..n).rev() {
                let idx = rest % pts;
                rest /= pts;
                let _ = ax;
                if idx == 0 || idx == pts - 1 {
                    return true;
                }
            }
            false
        };
        let dim = self.dim();
        let mut m = 0.0f64;
        for i in 0..dim {
            let edge_i = on_edge(i);
            for j in 0..dim {
                if edge_i || on_edge(j) {
                    m = m.max(self.kernel[(i, j)].norm());
                }
            }
        }
        m / max_abs
    }

    /// Builds `rho = sum_j lambda_j |psi_j><psi_j|` from a validated
    /// decomposition.
    pub fn assemble(decomp: &SpectralDecomposition) -> Result<Self> {
        let grid = decomp.vectors()[0].grid().clone();
        let dim = grid.kernel_dim();
        let mut kernel = Array2::<Complex64>::default((dim, dim));
        for (w, v) in decomp.weights().iter().zip(decomp.vectors()) {
            if v.grid() != &grid {
                return Err(Error::GridMismatch {
                    what: "decomposition vector grids",
                });
            }
            let f = v.flat();
            for i in 0..dim {
                let wfi = *w * f[i];
                for j in 0..dim {
                    kernel[(i, j)] += wfi * f[j].conj();
                }
            }
        }
        Self::new(grid, kernel)
    }

    /// Eigendecomposition of the state. Eigenpairs with weight at or below
    /// `threshold` are dropped; each eigenvector has its largest-magnitude
    /// component rotated to the positive real axis (ties broken by lowest
    /// index) so the output is deterministic.
    pub fn spectral_decompose(&self, threshold: f64) -> Result<SpectralDecomposition> {
        if !(threshold > 0.0 && threshold < 1.0) {
            return Err(Error::BadThreshold(threshold));
        }
        let dim = self.dim();
        let cell = self.grid.dx().powi(self.grid.n() as i32);
        let m =
            nalgebra::DMatrix::<Complex64>::from_fn(dim, dim, |i, j| self.kernel[(i, j)] * cell);
        let eig = nalgebra::SymmetricEigen::new(m);
        let lambda_max = eig.eigenvalues.iter().cloned().fold(0.0f64, f64::max);
        let lambda_min = eig
            .eigenvalues
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min);
        if lambda_min < -PSD_TOL * lambda_max.max(f64::MIN_POSITIVE) {
            return Err(Error::NegativeEigenvalue { value: lambda_min });
        }
        let mut order: Vec<usize> = (0..dim).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].partial_cmp(&eig.eigenvalues[a]).unwrap());
        let mut weights = Vec::new();
        let mut vectors = Vec::new();
        let scale = 1.0 / cell.sqrt();
        for &i in &order {
            let w = eig.eigenvalues[i];
            if w <= threshold {
                break;
            }
            let col = eig.eigenvectors.column(i);
            // phase fixing: largest-magnitude component made real positive
            let mut imax = 0;
            let mut best = 0.0f64;
            for (k, c) in col.iter().enumerate() {
                if c.norm() > best {
                    best = c.norm();
                    imax = k;
                }
            }
            let phase = col[imax] / best;
            let amps: Vec<Complex64> = col.iter().map(|c| c * phase.conj() * scale).collect();
            let shape: Vec<usize> = vec![self.grid.points(); self.grid.n()];
            let arr = ArrayD::from_shape_vec(IxDyn(&shape), amps).expect("shape");
            weights.push(w);
            vectors.push(WaveFunction::new(self.grid.clone(), arr)?);
        }
        // weights may sum slightly below one after dropping tiny eigenvalues;
        // widen by the dropped mass only if needed
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::WeightSum(sum));
        }
        SpectralDecomposition::new(weights, vectors)
    }

    /// Operator-level partial trace over subsystem B:
    /// `K_A(i_A, j_A) = sum_{i_B} K(i_A i_B, j_A i_B) * dx^{n_B}`.
    ///
    /// On the lattice this realizes the sum over a complete discrete
    /// B-basis exactly, so it serves as the oracle against which the
    /// phase-space marginalization is checked.
    pub fn partial_trace(&self, part: &Partition) -> Result<Self> {
        part.check_grid(&self.grid)?;
        let pts = self.grid.points();
        let dim_a = pts.pow(part.n_a() as u32);
        let dim_b = pts.pow(part.n_b() as u32);
        let cell_b = self.grid.dx().powi(part.n_b() as i32);
        let mut out = Array2::<Complex64>::default((dim_a, dim_a));
        for ia in 0..dim_a {
            for ja in 0..dim_a {
                let mut acc = Complex64::default();
                for ib in 0..dim_b {
                    acc += self.kernel[(ia * dim_b + ib, ja * dim_b + ib)];
                }
                out[(ia, ja)] = acc * cell_b;
            }
        }
        let grid_a = self.grid.subgrid(part.n_a())?;
        Self::new(grid_a, out)
    }

    /// Full invariant check including positive semi-definiteness.
    pub fn validate_full(&self) -> Result<()> {
        let dim = self.dim();
        let cell = self.grid.dx().powi(self.grid.n() as i32);
        let m =
            nalgebra::DMatrix::<Complex64>::from_fn(dim, dim, |i, j| self.kernel[(i, j)] * cell);
        let eigs = m.symmetric_eigenvalues();
        let lambda_max = eigs.iter().cloned().fold(0.0f64, f64::max);
        let lambda_min = eigs.iter().cloned().fold(f64::INFINITY, f64::min);
        if lambda_min < -PSD_TOL * lambda_max.max(f64::MIN_POSITIVE) {
            return Err(Error::NegativeEigenvalue { value: lambda_min });
        }
        Ok(())
    }
}
