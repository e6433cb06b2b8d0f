//! Purification: a bipartite pure state whose B-side partial trace
//! reproduces a given density matrix, built from the Schmidt form
//! `psi = sum_j sqrt(lambda_j) phi_j^A (x) phi_j^B` with the `phi_j^A` the
//! eigenvectors of the input and the `phi_j^B` a deterministic orthonormal
//! family on the purifying grid.
//!
//! The construction is finite rank: eigenvalues at or below the spectral
//! threshold are dropped and the dropped mass is reported.

use crate::error::{Error, Result};
use crate::grid::{Partition, PhaseSpaceGrid};
use crate::hilbert::{
    gram_defect, hermite_like_family, DensityMatrix, WaveFunction, DEFAULT_EIGENVALUE_THRESHOLD,
};
use crate::wigner::{marginalize_b, wigner_transform, WignerGrid};
use ndarray::ArrayD;
use num_complex::Complex64;

/// Gram defect allowed for the Schmidt factors.
pub const FACTOR_GRAM_TOL: f64 = 1e-8;
/// Relative residual at which the marginalization identity is declared met.
pub const WIGSUM_TOL: f64 = 1e-6;

/// Schmidt-form purification of a density matrix.
#[derive(Debug, Clone)]
pub struct Purification {
    psi: WaveFunction,
    weights: Vec<f64>,
    a_vectors: Vec<WaveFunction>,
    b_vectors: Vec<WaveFunction>,
    partition: Partition,
    dropped_mass: f64,
}

impl Purification {
    /// Assembles `psi` from weights and orthonormal factor families.
    pub fn from_parts(
        weights: Vec<f64>,
        a_vectors: Vec<WaveFunction>,
        b_vectors: Vec<WaveFunction>,
        dropped_mass: f64,
    ) -> Result<Self> {
        if weights.is_empty()
            || weights.len() != a_vectors.len()
            || weights.len() != b_vectors.len()
        {
            return Err(Error::WeightSum(0.0));
        }
        let total: f64 = weights.iter().sum();
        if (total + dropped_mass - 1.0).abs() > 1e-8 {
            return Err(Error::WeightSum(total));
        }
        let da = gram_defect(&a_vectors);
        if da > FACTOR_GRAM_TOL {
            return Err(Error::GramDefect(da));
        }
        let db = gram_defect(&b_vectors);
        if db > FACTOR_GRAM_TOL {
            return Err(Error::GramDefect(db));
        }
        let n_a = a_vectors[0].grid().n();
        let n_b = b_vectors[0].grid().n();
        let partition = Partition::new(n_a, n_b)?;
        let mut amplitudes: Option<ArrayD<Complex64>> = None;
        for ((w, a), b) in weights.iter().zip(&a_vectors).zip(&b_vectors) {
            let term = a.tensor(b)?;
            let scaled = term.amplitudes().mapv(|c| c * w.sqrt());
            amplitudes = Some(match amplitudes {
                None => scaled,
                Some(acc) => acc + scaled,
            });
        }
        let grid_ab = a_vectors[0].grid().subgrid(n_a + n_b)?;
        let psi = WaveFunction::new(grid_ab, amplitudes.expect("nonempty"))?;
        Ok(Self {
            psi,
            weights,
            a_vectors,
            b_vectors,
            partition,
            dropped_mass,
        })
    }

    pub fn psi(&self) -> &WaveFunction {
        &self.psi
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn a_vectors(&self) -> &[WaveFunction] {
        &self.a_vectors
    }

    pub fn b_vectors(&self) -> &[WaveFunction] {
        &self.b_vectors
    }

    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    /// Eigenvalue mass dropped by the finite-rank truncation.
    pub fn dropped_mass(&self) -> f64 {
        self.dropped_mass
    }

    /// Rebuilds the purification with per-factor phases on the B side;
    /// the reduced state is invariant under this.
    pub fn with_b_phases(&self, phases: &[f64]) -> Result<Self> {
        if phases.len() != self.b_vectors.len() {
            return Err(Error::WeightSum(0.0));
        }
        let b: Vec<WaveFunction> = self
            .b_vectors
            .iter()
            .zip(phases)
            .map(|(v, &theta)| v.phased(theta))
            .collect();
        Self::from_parts(
            self.weights.clone(),
            self.a_vectors.clone(),
            b,
            self.dropped_mass,
        )
    }
}

/// Purifies `rho_a` against the default deterministic B family (Gaussian
/// envelope times the coordinate ladder, orthonormalized).
pub fn purify(rho_a: &DensityMatrix, b_grid: &PhaseSpaceGrid) -> Result<Purification> {
    let decomp = rho_a.spectral_decompose(DEFAULT_EIGENVALUE_THRESHOLD)?;
    let rank = decomp.rank();
    let family = hermite_like_family(b_grid, rank, 0.0, 0.85 * (b_grid.hbar() / 2.0).sqrt())?;
    purify_with_family(rho_a, &family)
}

/// Purifies `rho_a` against a caller-supplied orthonormal B family; the
/// family length bounds the representable rank.
pub fn purify_with_family(
    rho_a: &DensityMatrix,
    b_family: &[WaveFunction],
) -> Result<Purification> {
    if b_family.is_empty() {
        return Err(Error::RankExceedsDimension { rank: 1, dim: 0 });
    }
    let b_grid = b_family[0].grid();
    if !rho_a.grid().compatible(b_grid) {
        return Err(Error::GridMismatch {
            what: "axis parameters (N, bounds, hbar)",
        });
    }
    let decomp = rho_a.spectral_decompose(DEFAULT_EIGENVALUE_THRESHOLD)?;
    let rank = decomp.rank();
    if rank > b_grid.kernel_dim() {
        return Err(Error::RankExceedsDimension {
            rank,
            dim: b_grid.kernel_dim(),
        });
    }
    if rank > b_family.len() {
        return Err(Error::RankExceedsDimension {
            rank,
            dim: b_family.len(),
        });
    }
    let weights = decomp.weights().to_vec();
    let dropped = (1.0 - weights.iter().sum::<f64>()).max(0.0);
    Purification::from_parts(
        weights,
        decomp.vectors().to_vec(),
        b_family[..rank].to_vec(),
        dropped,
    )
}

/// Residuals of the marginalization identity for a purification: the
/// B-marginal of `W(psi)` against the weighted sum of the A-factor
/// transforms.
#[derive(Debug, Clone)]
pub struct WigsumReport {
    pub max_residual: f64,
    pub rhs_max: f64,
    /// `max_residual <= WIGSUM_TOL * rhs_max`.
    pub pass: bool,
    pub weights: Vec<f64>,
    pub dropped_mass: f64,
}

/// Computes both sides of the identity independently: the left side goes
/// through the full 2n-dof Wigner transform and the lattice marginal, the
/// right side through the one-subsystem transforms of the Schmidt factors.
pub fn verify_wigsum(pur: &Purification) -> Result<WigsumReport> {
    let w_full = wigner_transform(pur.psi())?;
    let lhs = marginalize_b(&w_full, pur.partition())?;
    let mut rhs: Option<WignerGrid> = None;
    for (w, a) in pur.weights().iter().zip(pur.a_vectors()) {
        let wa = wigner_transform(a)?;
        let scaled = wa.values().mapv(|v| v * w);
        rhs = Some(match rhs {
            None => WignerGrid::new(wa.grid().clone(), None, scaled)?,
            Some(acc) => {
                let sum = acc.values() + &scaled;
                WignerGrid::new(wa.grid().clone(), None, sum)?
            }
        });
    }
    let rhs = rhs.expect("nonempty purification");
    let rhs_max = rhs.max_abs();
    let max_residual = lhs
        .values()
        .iter()
        .zip(rhs.values().iter())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0f64, f64::max);
    Ok(WigsumReport {
        max_residual,
        rhs_max,
        pass: max_residual <= WIGSUM_TOL * rhs_max,
        weights: pur.weights().to_vec(),
        dropped_mass: pur.dropped_mass(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::SpectralDecomposition;
    use approx::assert_relative_eq;

    fn grid1(points: usize) -> PhaseSpaceGrid {
        PhaseSpaceGrid::new(1, points, -8.0, 8.0, 1.0).unwrap()
    }

    fn kernel_gap(a: &DensityMatrix, b: &DensityMatrix) -> f64 {
        a.kernel()
            .iter()
            .zip(b.kernel().iter())
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max)
    }

    #[test]
    fn rank_one_purification_is_a_product() {
        let g = grid1(32);
        let phi = WaveFunction::gaussian_packet(&g, &[0.5], &[0.3], &[0.6]).unwrap();
        let rho = DensityMatrix::from_pure(&phi).unwrap();
        let pur = purify(&rho, &g).unwrap();
        assert_eq!(pur.weights().len(), 1);
        assert_relative_eq!(pur.weights()[0], 1.0, max_relative = 1e-8);
        let product = pur.a_vectors()[0].tensor(&pur.b_vectors()[0]).unwrap();
        let overlap = product.inner(pur.psi()).norm();
        assert_relative_eq!(overlap, 1.0, max_relative = 1e-10);
        let back = DensityMatrix::from_pure(pur.psi())
            .unwrap()
            .partial_trace(pur.partition())
            .unwrap();
        assert!(kernel_gap(&back, &rho) < 1e-8);
    }

    #[test]
    fn equal_mixture_purifies_to_balanced_schmidt_pair() {
        let g = grid1(32);
        let fam = hermite_like_family(&g, 2, 0.0, 0.62).unwrap();
        let dec = SpectralDecomposition::new(vec![0.5, 0.5], fam).unwrap();
        let rho = DensityMatrix::assemble(&dec).unwrap();
        let pur = purify(&rho, &g).unwrap();
        assert_eq!(pur.weights().len(), 2);
        assert_relative_eq!(pur.weights()[0], 0.5, max_relative = 1e-8);
        assert_relative_eq!(pur.weights()[1], 0.5, max_relative = 1e-8);
        let rho_ab = DensityMatrix::from_pure(pur.psi()).unwrap();
        let reduced = rho_ab.partial_trace(pur.partition()).unwrap();
        assert!(kernel_gap(&reduced, &rho) < 1e-8);
        assert_relative_eq!(reduced.purity(), 0.5, max_relative = 1e-8);
    }

    #[test]
    fn rank_three_round_trip_through_partial_trace() {
        let g = grid1(32);
        let fam = hermite_like_family(&g, 3, 0.2, 0.6).unwrap();
        let dec = SpectralDecomposition::new(vec![0.6, 0.25, 0.15], fam).unwrap();
        let rho = DensityMatrix::assemble(&dec).unwrap();
        let pur = purify(&rho, &g).unwrap();
        let back = DensityMatrix::from_pure(pur.psi())
            .unwrap()
            .partial_trace(pur.partition())
            .unwrap();
        let scale = rho.kernel().iter().map(|c| c.norm()).fold(0.0f64, f64::max);
        assert!(kernel_gap(&back, &rho) < 1e-8 * scale.max(1.0));
    }

    #[test]
    fn wigsum_residual_small_for_low_ranks() {
        let g = grid1(32);
        for rank in 1..=3usize {
            let fam = hermite_like_family(&g, rank, 0.0, 0.62).unwrap();
            let weights: Vec<f64> = match rank {
                1 => vec![1.0],
                2 => vec![0.5, 0.5],
                _ => vec![0.5, 0.3, 0.2],
            };
            let dec = SpectralDecomposition::new(weights, fam).unwrap();
            let rho = DensityMatrix::assemble(&dec).unwrap();
            let pur = purify(&rho, &g).unwrap();
            let report = verify_wigsum(&pur).unwrap();
            assert!(
                report.pass,
                "rank {rank}: residual {:.3e} vs max {:.3e}",
                report.max_residual, report.rhs_max
            );
        }
    }

    #[test]
    fn b_side_phases_leave_the_identity_intact() {
        let g = grid1(32);
        let fam = hermite_like_family(&g, 2, 0.0, 0.62).unwrap();
        let dec = SpectralDecomposition::new(vec![0.7, 0.3], fam).unwrap();
        let rho = DensityMatrix::assemble(&dec).unwrap();
        let pur = purify(&rho, &g).unwrap();
        let phased = pur.with_b_phases(&[0.9, -2.3]).unwrap();
        let report = verify_wigsum(&phased).unwrap();
        assert!(report.pass);
        let back = DensityMatrix::from_pure(phased.psi())
            .unwrap()
            .partial_trace(phased.partition())
            .unwrap();
        let direct = DensityMatrix::from_pure(pur.psi())
            .unwrap()
            .partial_trace(pur.partition())
            .unwrap();
        assert!(kernel_gap(&back, &direct) < 1e-10);
    }

    #[test]
    fn different_b_families_give_the_same_reduced_state() {
        let g = grid1(32);
        let fam = hermite_like_family(&g, 2, 0.1, 0.62).unwrap();
        let dec = SpectralDecomposition::new(vec![0.65, 0.35], fam).unwrap();
        let rho = DensityMatrix::assemble(&dec).unwrap();
        let fam_one = hermite_like_family(&g, 2, 0.0, 0.55).unwrap();
        let fam_two = hermite_like_family(&g, 2, -0.4, 0.66).unwrap();
        let p1 = purify_with_family(&rho, &fam_one).unwrap();
        let p2 = purify_with_family(&rho, &fam_two).unwrap();
        let r1 = DensityMatrix::from_pure(p1.psi())
            .unwrap()
            .partial_trace(p1.partition())
            .unwrap();
        let r2 = DensityMatrix::from_pure(p2.psi())
            .unwrap()
            .partial_trace(p2.partition())
            .unwrap();
        assert!(kernel_gap(&r1, &r2) < 1e-8);
        // while the purifications themselves differ
        let overlap = p1.psi().inner(p2.psi()).norm();
        assert!(overlap < 1.0 - 1e-3);
    }

    #[test]
    fn rank_above_dimension_is_rejected() {
        let g = grid1(32);
        let fam = hermite_like_family(&g, 2, 0.0, 0.62).unwrap();
        let dec = SpectralDecomposition::new(vec![0.5, 0.5], fam).unwrap();
        let rho = DensityMatrix::assemble(&dec).unwrap();
        let short_family = hermite_like_family(&g, 1, 0.0, 0.62).unwrap();
        assert!(matches!(
            purify_with_family(&rho, &short_family),
            Err(Error::RankExceedsDimension { .. })
        ));
        let other = PhaseSpaceGrid::new(1, 32, -8.0, 8.0, 2.0).unwrap();
        assert!(matches!(
            purify(&rho, &other),
            Err(Error::GridMismatch { .. })
        ));
    }
}
