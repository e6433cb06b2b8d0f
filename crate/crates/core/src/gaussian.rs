//! Centered Gaussian states as covariance matrices: validation against the
//! uncertainty condition, exact purity and reduction, symplectic spectra,
//! and sampling onto a phase-space lattice.
//!
//! The coordinate ordering is `(x_A, p_A, x_B, p_B)` when a partition is
//! attached and `(x, p)` otherwise; the symplectic form is block-diagonal
//! per subsystem with the standard `[[0, I], [-I, 0]]` blocks. A state is
//! admissible iff the Hermitian matrix `Sigma + i (hbar/2) J` is positive
//! semi-definite, and pure iff every symplectic eigenvalue (the moduli of
//! the spectrum of `i J Sigma`) equals `hbar/2`.

use crate::error::{Error, Result};
use crate::grid::{Partition, PhaseSpaceGrid};
use crate::wigner::WignerGrid;
use nalgebra::{DMatrix, DVector};
use ndarray::parallel::prelude::*;
use ndarray::{ArrayD, IxDyn};
use num_complex::Complex64;
use rand::Rng;
use std::f64::consts::PI;

/// Relative symmetry tolerance on covariance matrices.
pub const SYMMETRY_TOL: f64 = 1e-12;
/// Relative tolerance for the uncertainty-condition eigenvalue test.
pub const ADMISSIBILITY_TOL: f64 = 1e-10;
/// Condition-number cap for Gaussian evaluation.
pub const CONDITION_CAP: f64 = 1e12;
/// Default relative tolerance for the pure-state test.
pub const IS_PURE_TOL: f64 = 1e-8;
/// Grid half-extent required per axis, in units of the marginal deviation.
pub const EXTENT_SIGMAS: f64 = 8.0;

/// Position/momentum slots of one degree of freedom in the canonical
/// coordinate ordering.
fn canonical_slots(n: usize, part: Option<&Partition>, dof: usize) -> (usize, usize) {
    match part {
        None => (dof, n + dof),
        Some(p) => {
            if dof < p.n_a() {
                (dof, p.n_a() + dof)
            } else {
                let d = dof - p.n_a();
                (2 * p.n_a() + d, 2 * p.n_a() + p.n_b() + d)
            }
        }
    }
}

/// The symplectic form matching a coordinate ordering.
#[derive(Debug, Clone)]
pub struct SymplecticForm {
    mat: DMatrix<f64>,
}

impl SymplecticForm {
    /// Standard form for `n` unpartitioned degrees of freedom,
    /// `[[0, I], [-I, 0]]` in `(x, p)` ordering.
    pub fn standard(n: usize) -> Self {
        let mut mat = DMatrix::zeros(2 * n, 2 * n);
        for d in 0..n {
            mat[(d, n + d)] = 1.0;
            mat[(n + d, d)] = -1.0;
        }
        Self { mat }
    }

    /// Block-diagonal form `J_A (+) J_B` in the canonical partitioned
    /// ordering `(x_A, p_A, x_B, p_B)`.
    pub fn for_partition(part: &Partition) -> Self {
        let n = part.n();
        let mut mat = DMatrix::zeros(2 * n, 2 * n);
        for dof in 0..n {
            let (xs, ps) = canonical_slots(n, Some(part), dof);
            mat[(xs, ps)] = 1.0;
            mat[(ps, xs)] = -1.0;
        }
        Self { mat }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.mat
    }

    /// `max |S^T J S - J|`; zero for symplectic `S`.
    pub fn symplectic_defect(&self, s: &DMatrix<f64>) -> f64 {
        let d = s.transpose() * &self.mat * s - &self.mat;
        d.iter().map(|v| v.abs()).fold(0.0, f64::max)
    }
}

/// Validity report of a covariance matrix against the uncertainty
/// condition `Sigma + i (hbar/2) J >= 0`.
#[derive(Debug, Clone, Copy)]
pub struct ValidityReport {
    pub symmetry_defect: f64,
    pub symmetric: bool,
    pub min_sigma_eigenvalue: f64,
    pub positive_definite: bool,
    /// Minimum eigenvalue of the Hermitian matrix `Sigma + i (hbar/2) J`;
    /// negative beyond tolerance means the state is unphysical.
    pub quantum_min_eigenvalue: f64,
    pub admissible: bool,
}

/// Purity test result along with the symplectic spectrum it derives from.
#[derive(Debug, Clone)]
pub struct PurityDiagnostics {
    pub is_pure: bool,
    /// Symplectic eigenvalues in descending order; all equal to `hbar/2`
    /// exactly when the state is pure.
    pub symplectic_spectrum: Vec<f64>,
}

/// Real symmetric second-moment matrix of a centered Gaussian state.
#[derive(Debug, Clone)]
pub struct CovarianceMatrix {
    sigma: DMatrix<f64>,
    partition: Option<Partition>,
    hbar: f64,
}

impl CovarianceMatrix {
    pub fn new(sigma: DMatrix<f64>, partition: Option<Partition>, hbar: f64) -> Result<Self> {
        if hbar.is_nan() || hbar <= 0.0 || hbar.is_infinite() {
            return Err(Error::NonPositiveHbar(hbar));
        }
        let rows = sigma.nrows();
        let cols = sigma.ncols();
        if rows != cols || rows == 0 || !rows.is_multiple_of(2) {
            return Err(Error::CovarianceShape {
                expected: rows.max(2),
                rows,
                cols,
            });
        }
        if let Some(p) = &partition {
            if 2 * p.n() != rows {
                return Err(Error::CovarianceShape {
                    expected: 2 * p.n(),
                    rows,
                    cols,
                });
            }
        }
        if sigma.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("covariance matrix"));
        }
        let max_abs = sigma.iter().map(|v| v.abs()).fold(0.0f64, f64::max);
        let defect = (&sigma - sigma.transpose())
            .iter()
            .map(|v| v.abs())
            .fold(0.0f64, f64::max);
        if defect > SYMMETRY_TOL * max_abs.max(f64::MIN_POSITIVE) {
            return Err(Error::NotSymmetric(defect));
        }
        Ok(Self {
            sigma,
            partition,
            hbar,
        })
    }

    /// Isotropic covariance `c * (hbar/2) * I`; `c = 1` is the vacuum.
    pub fn isotropic(n: usize, c: f64, hbar: f64) -> Result<Self> {
        let sigma = DMatrix::identity(2 * n, 2 * n) * (c * hbar / 2.0);
        Self::new(sigma, None, hbar)
    }

    /// Two-mode squeezed covariance with parameter `r` in the canonical
    /// `(x_A, p_A, x_B, p_B)` ordering: diagonal `cosh(2r) * hbar/2`,
    /// position-position correlation `+sinh(2r) * hbar/2`,
    /// momentum-momentum correlation `-sinh(2r) * hbar/2`.
    pub fn two_mode_squeezed(r: f64, hbar: f64) -> Result<Self> {
        let c = (2.0 * r).cosh() * hbar / 2.0;
        let s = (2.0 * r).sinh() * hbar / 2.0;
        let sigma = DMatrix::from_row_slice(
            4,
            4,
            &[
                c, 0.0, s, 0.0, //
                0.0, c, 0.0, -s, //
                s, 0.0, c, 0.0, //
                0.0, -s, 0.0, c,
            ],
        );
        Self::new(sigma, Some(Partition::new(1, 1)?), hbar)
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.sigma
    }

    pub fn partition(&self) -> Option<&Partition> {
        self.partition.as_ref()
    }

    pub fn with_partition(mut self, partition: Option<Partition>) -> Result<Self> {
        if let Some(p) = &partition {
            if 2 * p.n() != self.sigma.nrows() {
                return Err(Error::CovarianceShape {
                    expected: 2 * p.n(),
                    rows: self.sigma.nrows(),
                    cols: self.sigma.ncols(),
                });
            }
        }
        self.partition = partition;
        Ok(self)
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    /// Degrees of freedom.
    pub fn n(&self) -> usize {
        self.sigma.nrows() / 2
    }

    /// Marginal standard deviations `(sigma_x, sigma_p)` per degree of
    /// freedom, read off the diagonal in the canonical ordering.
    pub fn marginal_deviations(&self) -> Vec<(f64, f64)> {
        let n = self.n();
        (0..n)
            .map(|dof| {
                let (xs, ps) = canonical_slots(n, self.partition.as_ref(), dof);
                (self.sigma[(xs, xs)].sqrt(), self.sigma[(ps, ps)].sqrt())
            })
            .collect()
    }

    /// The symplectic form for this matrix's coordinate ordering.
    pub fn symplectic_form(&self) -> SymplecticForm {
        match &self.partition {
            Some(p) => SymplecticForm::for_partition(p),
            None => SymplecticForm::standard(self.n()),
        }
    }

    /// Checks symmetry, positive-definiteness and the uncertainty condition.
    pub fn validate(&self) -> ValidityReport {
        let max_abs = self.sigma.iter().map(|v| v.abs()).fold(0.0f64, f64::max);
        let symmetry_defect = (&self.sigma - self.sigma.transpose())
            .iter()
            .map(|v| v.abs())
            .fold(0.0f64, f64::max);
        let symmetric = symmetry_defect <= SYMMETRY_TOL * max_abs.max(f64::MIN_POSITIVE);
        let sig_eigs = self.sigma.clone().symmetric_eigenvalues();
        let min_sigma_eigenvalue = sig_eigs.iter().cloned().fold(f64::INFINITY, f64::min);
        let positive_definite = min_sigma_eigenvalue > 0.0;
        let j = self.symplectic_form();
        let dim = self.sigma.nrows();
        let m = DMatrix::<Complex64>::from_fn(dim, dim, |i, k| {
            Complex64::new(self.sigma[(i, k)], self.hbar / 2.0 * j.mat[(i, k)])
        });
        let q_eigs = m.symmetric_eigenvalues();
        let quantum_min_eigenvalue = q_eigs.iter().cloned().fold(f64::INFINITY, f64::min);
        let admissible = symmetric
            && positive_definite
            && quantum_min_eigenvalue >= -ADMISSIBILITY_TOL * max_abs.max(f64::MIN_POSITIVE);
        ValidityReport {
            symmetry_defect,
            symmetric,
            min_sigma_eigenvalue,
            positive_definite,
            quantum_min_eigenvalue,
            admissible,
        }
    }

    fn require_admissible(&self) -> Result<ValidityReport> {
        let report = self.validate();
        if !report.admissible {
            return Err(Error::Inadmissible(report.quantum_min_eigenvalue));
        }
        Ok(report)
    }

    /// Wigner density `(2 pi)^-n (det Sigma)^-1/2 exp(-z^T Sigma^-1 z / 2)`
    /// at a single phase-space point in this matrix's coordinate ordering.
    pub fn wigner_value(&self, z: &[f64]) -> Result<f64> {
        if z.len() != self.sigma.nrows() {
            return Err(Error::PhaseShape);
        }
        self.require_admissible()?;
        let eval = GaussianEvaluator::new(self)?;
        Ok(eval.value(z))
    }

    /// Purity `(hbar/2)^n (det Sigma)^-1/2`, exact for admissible states.
    pub fn purity(&self) -> Result<f64> {
        self.require_admissible()?;
        let chol =
            nalgebra::Cholesky::new(self.sigma.clone()).ok_or(Error::Inadmissible(f64::NAN))?;
        let sqrt_det: f64 = chol.l().diagonal().iter().product();
        Ok((self.hbar / 2.0).powi(self.n() as i32) / sqrt_det)
    }

    /// Covariance of the reduced state on A: the top-left `2 n_A` block,
    /// copied bit-exactly. Admissibility of the block is checked, not
    /// assumed.
    pub fn reduce(&self) -> Result<Self> {
        let part = self.partition.ok_or(Error::PartitionMismatch {
            n_a: 0,
            n_b: 0,
            n: self.n(),
        })?;
        self.require_admissible()?;
        let k = 2 * part.n_a();
        let block = self.sigma.view((0, 0), (k, k)).into_owned();
        let reduced = Self::new(block, None, self.hbar)?;
        reduced.require_admissible()?;
        Ok(reduced)
    }

    /// Symplectic eigenvalues: the moduli of the spectrum of `i J Sigma`,
    /// computed from the Hermitian matrix
    /// `i Sigma^{1/2} J Sigma^{1/2}` (same spectrum, paired `+-nu`).
    pub fn symplectic_spectrum(&self) -> Result<Vec<f64>> {
        let dim = self.sigma.nrows();
        let eig = nalgebra::SymmetricEigen::new(self.sigma.clone());
        if eig.eigenvalues.iter().any(|&l| l <= 0.0) {
            return Err(Error::Inadmissible(
                eig.eigenvalues
                    .iter()
                    .cloned()
                    .fold(f64::INFINITY, f64::min),
            ));
        }
        let sqrt_vals: DVector<f64> = eig.eigenvalues.map(|l| l.sqrt());
        let mut half = eig.eigenvectors.clone();
        for (c, s) in sqrt_vals.iter().enumerate() {
            let mut col = half.column_mut(c);
            col *= *s;
        }
        let sigma_half = &half * eig.eigenvectors.transpose();
        let j = self.symplectic_form();
        let sjs = &sigma_half * &j.mat * &sigma_half;
        let m = DMatrix::<Complex64>::from_fn(dim, dim, |i, k| Complex64::new(0.0, sjs[(i, k)]));
        let spec = m.symmetric_eigenvalues();
        let mut positive: Vec<f64> = spec.iter().cloned().filter(|&v| v > 0.0).collect();
        positive.sort_by(|a, b| b.partial_cmp(a).unwrap());
        Ok(positive)
    }

    /// Pure iff every symplectic eigenvalue equals `hbar/2` within the
    /// relative tolerance `tol`.
    pub fn is_pure(&self, tol: f64) -> Result<PurityDiagnostics> {
        self.require_admissible()?;
        let spectrum = self.symplectic_spectrum()?;
        let target = self.hbar / 2.0;
        let is_pure = spectrum.len() == self.n()
            && spectrum
                .iter()
                .all(|&nu| (nu - target).abs() <= tol * target);
        Ok(PurityDiagnostics {
            is_pure,
            symplectic_spectrum: spectrum,
        })
    }

    /// Samples the Wigner density onto a lattice. The grid must carry the
    /// same `hbar` and be wide enough that the boundary sits at least
    /// [`EXTENT_SIGMAS`] marginal deviations from the origin on every axis.
    pub fn sample_wigner(&self, grid: &PhaseSpaceGrid) -> Result<WignerGrid> {
        if grid.n() != self.n() {
            return Err(Error::GridMismatch {
                what: "degrees of freedom",
            });
        }
        if grid.hbar() != self.hbar {
            return Err(Error::GridMismatch { what: "hbar" });
        }
        self.require_admissible()?;
        let n = self.n();
        if grid.x_min() >= 0.0 || grid.x_max() <= 0.0 {
            return Err(Error::GridTooSmall(
                "grid does not bracket the origin".into(),
            ));
        }
        for dof in 0..n {
            let (xs, ps) = canonical_slots(n, self.partition.as_ref(), dof);
            let x_need = EXTENT_SIGMAS * self.sigma[(xs, xs)].sqrt();
            let x_have = (-grid.x_min()).min(grid.x_max());
            if x_have < x_need {
                return Err(Error::GridTooSmall(format!(
                    "position extent {x_have:.3} < required {x_need:.3} on axis {dof}"
                )));
            }
            let p_need = EXTENT_SIGMAS * self.sigma[(ps, ps)].sqrt();
            let p_have = PI * grid.hbar() / grid.dx();
            if p_have < p_need {
                return Err(Error::GridTooSmall(format!(
                    "momentum extent {p_have:.3} < required {p_need:.3} on axis {dof}"
                )));
            }
        }
        let eval = GaussianEvaluator::new(self)?;
        let positions = grid.positions();
        let momenta = grid.momenta();
        let slots: Vec<(usize, usize)> = (0..n)
            .map(|d| canonical_slots(n, self.partition.as_ref(), d))
            .collect();
        let mut values = ArrayD::<f64>::zeros(IxDyn(&vec![grid.points(); 2 * n]));
        // parallel over the leading position axis; writes are disjoint
        values
            .axis_iter_mut(ndarray::Axis(0))
            .into_par_iter()
            .enumerate()
            .for_each(|(i0, mut slab)| {
                let mut z = [0.0f64; 16];
                z[slots[0].0] = positions[i0];
                for (rest, out) in slab.indexed_iter_mut() {
                    for dof in 1..n {
                        z[slots[dof].0] = positions[rest[dof - 1]];
                    }
                    for dof in 0..n {
                        z[slots[dof].1] = momenta[rest[n + dof - 1]];
                    }
                    *out = eval.value(&z[..2 * n]);
                }
            });
        WignerGrid::new(grid.clone(), None, values)?.with_partition(self.partition)
    }
}

/// Prefactored evaluator for the Gaussian density; solves with the Cholesky
/// factor per point instead of forming an explicit inverse.
struct GaussianEvaluator {
    l: DMatrix<f64>,
    norm: f64,
    dim: usize,
}

impl GaussianEvaluator {
    fn new(cov: &CovarianceMatrix) -> Result<Self> {
        let eigs = cov.sigma.clone().symmetric_eigenvalues();
        let max = eigs.iter().cloned().fold(f64::MIN, f64::max);
        let min = eigs.iter().cloned().fold(f64::MAX, f64::min);
        if min.is_nan() || min <= 0.0 || max / min > CONDITION_CAP {
            return Err(Error::IllConditioned(if min > 0.0 {
                max / min
            } else {
                f64::INFINITY
            }));
        }
        let chol = nalgebra::Cholesky::new(cov.sigma.clone())
            .ok_or(Error::IllConditioned(f64::INFINITY))?;
        let l = chol.l();
        let sqrt_det: f64 = l.diagonal().iter().product();
        let n = cov.n();
        let norm = (2.0 * PI).powi(-(n as i32)) / sqrt_det;
        Ok(Self {
            l,
            norm,
            dim: 2 * n,
        })
    }

    fn value(&self, z: &[f64]) -> f64 {
        // forward substitution: y = L^-1 z, quadratic form = |y|^2
        let mut y = [0.0f64; 16];
        let mut quad = 0.0;
        for i in 0..self.dim {
            let mut acc = z[i];
            for (k, yk) in y.iter().enumerate().take(i) {
                acc -= self.l[(i, k)] * yk;
            }
            let yi = acc / self.l[(i, i)];
            y[i] = yi;
            quad += yi * yi;
        }
        self.norm * (-0.5 * quad).exp()
    }
}

/// Random symplectic matrix in the canonical ordering for `n` degrees of
/// freedom, composed from rotation, squeeze and mode-mixing generators.
pub fn random_symplectic(n: usize, part: Option<&Partition>, rng: &mut impl Rng) -> DMatrix<f64> {
    // build in (x_1..x_n, p_1..p_n) ordering, permute to canonical at the end
    let dim = 2 * n;
    let mut s = DMatrix::<f64>::identity(dim, dim);
    let rounds = 2;
    for _ in 0..rounds {
        for mode in 0..n {
            let theta: f64 = rng.gen_range(-PI..PI);
            let mut rot = DMatrix::<f64>::identity(dim, dim);
            rot[(mode, mode)] = theta.cos();
            rot[(mode, n + mode)] = theta.sin();
            rot[(n + mode, mode)] = -theta.sin();
            rot[(n + mode, n + mode)] = theta.cos();
            s = rot * s;
            let r: f64 = rng.gen_range(-0.4..0.4);
            let mut sq = DMatrix::<f64>::identity(dim, dim);
            sq[(mode, mode)] = r.exp();
            sq[(n + mode, n + mode)] = (-r).exp();
            s = sq * s;
        }
        for i in 0..n {
            for j in (i + 1)..n {
                let theta: f64 = rng.gen_range(-PI..PI);
                let mut mix = DMatrix::<f64>::identity(dim, dim);
                for (a, b) in [(i, j), (n + i, n + j)] {
                    mix[(a, a)] = theta.cos();
                    mix[(a, b)] = theta.sin();
                    mix[(b, a)] = -theta.sin();
                    mix[(b, b)] = theta.cos();
                }
                s = mix * s;
            }
        }
    }
    let mut perm = DMatrix::<f64>::zeros(dim, dim);
    for dof in 0..n {
        let (xs, ps) = canonical_slots(n, part, dof);
        perm[(xs, dof)] = 1.0;
        perm[(ps, n + dof)] = 1.0;
    }
    &perm * s * perm.transpose()
}

/// Random pure Gaussian covariance `(hbar/2) S^T S` with `S` symplectic.
pub fn random_pure_covariance(
    n: usize,
    part: Option<Partition>,
    hbar: f64,
    rng: &mut impl Rng,
) -> Result<CovarianceMatrix> {
    let s = random_symplectic(n, part.as_ref(), rng);
    let sigma = s.transpose() * &s * (hbar / 2.0);
    // symmetrize rounding residue before validation
    let sigma = (&sigma + sigma.transpose()) * 0.5;
    CovarianceMatrix::new(sigma, part, hbar)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::WaveFunction;
    use crate::wigner::{marginalize_b, wigner_transform};
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn symplectic_form_identities() {
        for n in 1..=4 {
            let j = SymplecticForm::standard(n).matrix().clone();
            let jj = &j * &j;
            let id = DMatrix::<f64>::identity(2 * n, 2 * n);
            assert!((jj + &id).iter().all(|v| v.abs() < 1e-15));
            assert!((j.transpose() * &j - &id).iter().all(|v| v.abs() < 1e-15));
            assert!((j.transpose() + &j).iter().all(|v| v.abs() < 1e-15));
        }
        let part = Partition::new(1, 1).unwrap();
        let j = SymplecticForm::for_partition(&part).matrix().clone();
        // two independent 2x2 standard blocks
        let expect = DMatrix::from_row_slice(
            4,
            4,
            &[
                0.0, 1.0, 0.0, 0.0, //
                -1.0, 0.0, 0.0, 0.0, //
                0.0, 0.0, 0.0, 1.0, //
                0.0, 0.0, -1.0, 0.0,
            ],
        );
        assert_eq!(j, expect);
    }

    #[test]
    fn vacuum_saturates_uncertainty() {
        for hbar in [0.5, 1.0, 2.0] {
            let cov = CovarianceMatrix::isotropic(1, 1.0, hbar).unwrap();
            let rep = cov.validate();
            assert!(rep.admissible);
            assert!(rep.quantum_min_eigenvalue.abs() <= 1e-10 * hbar);
        }
    }

    #[test]
    fn sub_vacuum_is_rejected_with_negative_eigenvalue() {
        let hbar = 1.0;
        let cov = CovarianceMatrix::isotropic(1, 0.98, hbar).unwrap();
        let rep = cov.validate();
        assert!(!rep.admissible);
        assert!(rep.quantum_min_eigenvalue < 0.0);
        assert_abs_diff_eq!(
            rep.quantum_min_eigenvalue,
            (0.98 - 1.0) * hbar / 2.0,
            epsilon = 1e-12
        );
        assert!(matches!(cov.purity(), Err(Error::Inadmissible(_))));
        // quarter-vacuum violates uncertainty outright
        let quarter = CovarianceMatrix::isotropic(1, 0.5, hbar).unwrap();
        assert!(!quarter.validate().admissible);
    }

    #[test]
    fn thermal_state_has_margin_half_hbar() {
        let hbar = 1.0;
        let cov = CovarianceMatrix::isotropic(1, 2.0, hbar).unwrap();
        let rep = cov.validate();
        assert!(rep.admissible);
        // eigenvalues of hbar I + (i hbar/2) J are hbar +- hbar/2
        assert_abs_diff_eq!(rep.quantum_min_eigenvalue, hbar / 2.0, epsilon = 1e-12);
    }

    #[test]
    fn wigner_value_closed_forms() {
        let cov = CovarianceMatrix::isotropic(1, 1.0, 1.0).unwrap();
        // (2 pi)^-1 (det (I/2))^{-1/2} = (2 pi)^-1 * 2 = 1/pi
        assert_relative_eq!(
            cov.wigner_value(&[0.0, 0.0]).unwrap(),
            1.0 / PI,
            max_relative = 1e-14
        );
        let thermal = CovarianceMatrix::isotropic(1, 2.0, 1.0).unwrap();
        assert_relative_eq!(
            thermal.wigner_value(&[0.0, 0.0]).unwrap(),
            (2.0 * PI).recip(),
            max_relative = 1e-14
        );
    }

    #[test]
    fn sampled_gaussian_normalizes_and_matches_packet() {
        let grid = PhaseSpaceGrid::new(1, 64, -8.0, 8.0, 1.0).unwrap();
        let cov = CovarianceMatrix::isotropic(1, 1.0, 1.0).unwrap();
        let w = cov.sample_wigner(&grid).unwrap();
        assert_abs_diff_eq!(w.integral(), 1.0, epsilon = 1e-8);
        let psi = WaveFunction::gaussian_packet(&grid, &[0.0], &[0.0], &[(0.5f64).sqrt()]).unwrap();
        let wt = wigner_transform(&psi).unwrap();
        let err: f64 = w
            .values()
            .iter()
            .zip(wt.values().iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-6, "vacuum sample vs packet transform: {err:.3e}");
    }

    #[test]
    fn vacuum_sample_reconstructs_ground_projector() {
        let grid = PhaseSpaceGrid::new(1, 64, -8.0, 8.0, 1.0).unwrap();
        let cov = CovarianceMatrix::isotropic(1, 1.0, 1.0).unwrap();
        let w = cov.sample_wigner(&grid).unwrap();
        let rho = crate::wigner::density_from_wigner(&w).unwrap();
        let psi = WaveFunction::gaussian_packet(&grid, &[0.0], &[0.0], &[(0.5f64).sqrt()]).unwrap();
        let projector = crate::hilbert::DensityMatrix::from_pure(&psi).unwrap();
        let gap: f64 = rho
            .kernel()
            .iter()
            .zip(projector.kernel().iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(gap < 1e-5, "kernel gap {gap:.3e}");
    }

    #[test]
    fn pure_product_reduces_to_pure_state() {
        let part = Partition::new(1, 1).unwrap();
        let vac2 = CovarianceMatrix::isotropic(2, 1.0, 1.0)
            .unwrap()
            .with_partition(Some(part))
            .unwrap();
        let reduced = vac2.reduce().unwrap();
        assert_relative_eq!(reduced.purity().unwrap(), 1.0, max_relative = 1e-12);
        assert!(reduced.is_pure(IS_PURE_TOL).unwrap().is_pure);
    }

    #[test]
    fn sampling_rejects_narrow_grids() {
        let grid = PhaseSpaceGrid::new(1, 16, -2.0, 2.0, 1.0).unwrap();
        let cov = CovarianceMatrix::isotropic(1, 1.0, 1.0).unwrap();
        assert!(matches!(
            cov.sample_wigner(&grid),
            Err(Error::GridTooSmall(_))
        ));
    }

    #[test]
    fn purity_closed_forms() {
        let vac = CovarianceMatrix::isotropic(1, 1.0, 1.0).unwrap();
        assert_relative_eq!(vac.purity().unwrap(), 1.0, max_relative = 1e-12);
        let thermal = CovarianceMatrix::isotropic(1, 2.0, 1.0).unwrap();
        assert_relative_eq!(thermal.purity().unwrap(), 0.5, max_relative = 1e-12);
        // squeezed but pure: det Sigma = (hbar/2)^2
        let hbar = 1.0;
        let sigma = DMatrix::from_row_slice(2, 2, &[hbar / 2.0 * 2.0, 0.0, 0.0, hbar / 2.0 * 0.5]);
        let squeezed = CovarianceMatrix::new(sigma, None, hbar).unwrap();
        assert_relative_eq!(squeezed.purity().unwrap(), 1.0, max_relative = 1e-12);
    }

    #[test]
    fn reduce_block_diagonal_is_exact() {
        let part = Partition::new(1, 1).unwrap();
        let hbar = 1.0;
        let mut sigma = DMatrix::<f64>::zeros(4, 4);
        sigma[(0, 0)] = 0.9;
        sigma[(1, 1)] = 0.6;
        sigma[(0, 1)] = 0.1;
        sigma[(1, 0)] = 0.1;
        sigma[(2, 2)] = 0.7;
        sigma[(3, 3)] = 0.7;
        let cov = CovarianceMatrix::new(sigma.clone(), Some(part), hbar).unwrap();
        let reduced = cov.reduce().unwrap();
        assert_eq!(reduced.matrix(), &sigma.view((0, 0), (2, 2)).into_owned());
        assert!(reduced.partition().is_none());
    }

    #[test]
    fn two_mode_squeezed_family_closed_forms() {
        let hbar = 1.0;
        for r in [0.0, 0.25, 0.5, 1.0] {
            let cov = CovarianceMatrix::two_mode_squeezed(r, hbar).unwrap();
            assert!(cov.validate().admissible);
            assert_relative_eq!(cov.purity().unwrap(), 1.0, max_relative = 1e-10);
            let reduced = cov.reduce().unwrap();
            let expect = (2.0 * r).cosh() * hbar / 2.0;
            assert_relative_eq!(reduced.matrix()[(0, 0)], expect, max_relative = 1e-14);
            assert_relative_eq!(reduced.matrix()[(1, 1)], expect, max_relative = 1e-14);
            assert_relative_eq!(
                reduced.purity().unwrap(),
                1.0 / (2.0 * r).cosh(),
                max_relative = 1e-10
            );
            let diag = reduced.is_pure(IS_PURE_TOL).unwrap();
            assert_eq!(diag.is_pure, r == 0.0);
        }
        // numeric anchor for r = 0.5
        let cov = CovarianceMatrix::two_mode_squeezed(0.5, hbar).unwrap();
        let reduced = cov.reduce().unwrap();
        assert_abs_diff_eq!(reduced.purity().unwrap(), 0.64805427366, epsilon = 1e-8);
    }

    #[test]
    fn random_symplectic_is_symplectic_and_pure() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in 1..=2 {
            let part = if n == 2 {
                Some(Partition::new(1, 1).unwrap())
            } else {
                None
            };
            let s = random_symplectic(n, part.as_ref(), &mut rng);
            let j = match &part {
                Some(p) => SymplecticForm::for_partition(p),
                None => SymplecticForm::standard(n),
            };
            assert!(
                j.symplectic_defect(&s) < 1e-10,
                "defect {}",
                j.symplectic_defect(&s)
            );
            let cov = random_pure_covariance(n, part, 1.0, &mut rng).unwrap();
            let diag = cov.is_pure(IS_PURE_TOL).unwrap();
            assert!(diag.is_pure, "spectrum {:?}", diag.symplectic_spectrum);
            assert_relative_eq!(cov.purity().unwrap(), 1.0, max_relative = 1e-8);
        }
    }

    #[test]
    fn thermal_state_is_not_pure() {
        let cov = CovarianceMatrix::isotropic(1, 2.0, 1.0).unwrap();
        let diag = cov.is_pure(IS_PURE_TOL).unwrap();
        assert!(!diag.is_pure);
        assert_abs_diff_eq!(diag.symplectic_spectrum[0], 1.0, epsilon = 1e-10);
    }

    #[test]
    fn admissibility_is_inherited_by_reduction() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for seed in 0..5 {
            let _ = seed;
            let part = Partition::new(1, 1).unwrap();
            let cov = random_pure_covariance(2, Some(part), 1.0, &mut rng).unwrap();
            let reduced = cov.reduce().unwrap();
            let rep = reduced.validate();
            assert!(rep.admissible, "reduced inadmissible: {rep:?}");
            // det Sigma_AA = (hbar/2)^(2 n_A) iff the reduced state is pure
            let det = reduced.matrix().determinant();
            let pure = reduced.is_pure(1e-6).unwrap().is_pure;
            let det_matches = (det - 0.25f64).abs() < 1e-6;
            assert_eq!(pure, det_matches);
        }
    }

    #[test]
    fn gaussian_marginalization_matches_reduced_sampling() {
        let grid2 = PhaseSpaceGrid::new(2, 32, -8.0, 8.0, 1.0).unwrap();
        let grid1 = grid2.subgrid(1).unwrap();
        let part = Partition::new(1, 1).unwrap();
        let cov = CovarianceMatrix::two_mode_squeezed(0.25, 1.0).unwrap();
        let w2 = cov.sample_wigner(&grid2).unwrap();
        let marg = marginalize_b(&w2, &part).unwrap();
        let w1 = cov.reduce().unwrap().sample_wigner(&grid1).unwrap();
        let err: f64 = marg
            .values()
            .iter()
            .zip(w1.values().iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-6, "gaussian reduction mismatch {err:.3e}");
    }

    #[test]
    fn covariance_validation_errors() {
        let bad = DMatrix::from_row_slice(2, 2, &[1.0, 0.2, 0.0, 1.0]);
        assert!(matches!(
            CovarianceMatrix::new(bad, None, 1.0),
            Err(Error::NotSymmetric(_))
        ));
        let odd = DMatrix::<f64>::identity(3, 3);
        assert!(CovarianceMatrix::new(odd, None, 1.0).is_err());
        let sigma = DMatrix::<f64>::identity(2, 2);
        assert!(CovarianceMatrix::new(sigma.clone(), None, 0.0).is_err());
        let part = Partition::new(1, 1).unwrap();
        assert!(CovarianceMatrix::new(sigma, Some(part), 1.0).is_err());
    }
}
