//! Seeded generators for the test-state family: packets, product and
//! Schmidt-correlated states, and random low-rank mixtures.
//!
//! Geometry scales with `sqrt(hbar)` so the boundary and band-limit margins
//! are identical at every `hbar`; a fixed RNG seed fully determines every
//! generated state.

use crate::error::Result;
use crate::grid::{Partition, PhaseSpaceGrid};
use crate::hilbert::{hermite_like_family, DensityMatrix, SpectralDecomposition, WaveFunction};
use nalgebra::DMatrix;
use ndarray::linalg::kron;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

/// Symmetric position bounds wide enough for the packet family at `hbar`.
pub fn standard_bounds(hbar: f64) -> (f64, f64) {
    let r = 9.0 * hbar.sqrt();
    (-r, r)
}

/// Grid over [`standard_bounds`].
pub fn standard_grid(n: usize, points: usize, hbar: f64) -> Result<PhaseSpaceGrid> {
    let (lo, hi) = standard_bounds(hbar);
    PhaseSpaceGrid::new(n, points, lo, hi, hbar)
}

/// Random Gaussian packet with centers and width drawn inside the safe
/// envelope of the grid.
pub fn random_packet(grid: &PhaseSpaceGrid, rng: &mut impl Rng) -> Result<WaveFunction> {
    let n = grid.n();
    let s = grid.hbar().sqrt();
    let x0: Vec<f64> = (0..n).map(|_| rng.gen_range(-0.75..0.75) * s).collect();
    let p0: Vec<f64> = (0..n).map(|_| rng.gen_range(-0.75..0.75) * s).collect();
    let w: Vec<f64> = (0..n)
        .map(|_| rng.gen_range(0.90..0.96) * (grid.hbar() / 2.0).sqrt())
        .collect();
    WaveFunction::gaussian_packet(grid, &x0, &p0, &w)
}

/// Weights on the probability simplex, descending.
pub fn random_weights(rank: usize, rng: &mut impl Rng) -> Vec<f64> {
    let mut w: Vec<f64> = (0..rank).map(|_| rng.gen_range(0.1..1.0)).collect();
    let total: f64 = w.iter().sum();
    for v in &mut w {
        *v /= total;
    }
    w.sort_by(|a, b| b.partial_cmp(a).unwrap());
    w
}

/// Haar-ish random unitary from the QR factorization of a complex Ginibre
/// matrix; deterministic for a fixed RNG stream.
fn random_unitary(dim: usize, rng: &mut impl Rng) -> DMatrix<Complex64> {
    let m = DMatrix::<Complex64>::from_fn(dim, dim, |_, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    m.qr().q()
}

/// Rotates an orthonormal family by a random unitary, keeping it
/// orthonormal but scrambling the individual vectors.
fn rotate_family(family: &[WaveFunction], rank: usize, rng: &mut impl Rng) -> Vec<WaveFunction> {
    let dim = family.len();
    let u = random_unitary(dim, rng);
    (0..rank)
        .map(|j| {
            let mut amps = family[0].amplitudes().mapv(|c| c * u[(0, j)]);
            for (i, f) in family.iter().enumerate().skip(1) {
                amps = amps + f.amplitudes().mapv(|c| c * u[(i, j)]);
            }
            WaveFunction::new(family[0].grid().clone(), amps).expect("rotation keeps shape")
        })
        .collect()
}

/// Random rank-`rank` density matrix on `grid` from a rotated deterministic
/// family with random simplex weights.
pub fn random_density(
    grid: &PhaseSpaceGrid,
    rank: usize,
    rng: &mut impl Rng,
) -> Result<DensityMatrix> {
    let s = grid.hbar().sqrt();
    let center = rng.gen_range(-0.4..0.4) * s;
    let width = rng.gen_range(0.90..0.96) * (grid.hbar() / 2.0).sqrt();
    let family = hermite_like_family(grid, rank, center, width)?;
    let vectors = rotate_family(&family, rank, rng);
    let weights = random_weights(rank, rng);
    DensityMatrix::assemble(&SpectralDecomposition::new(weights, vectors)?)
}

/// Pure unentangled state: a random product packet on the bipartite grid.
pub fn random_pure_product(
    grid_ab: &PhaseSpaceGrid,
    part: &Partition,
    rng: &mut impl Rng,
) -> Result<DensityMatrix> {
    part.check_grid(grid_ab)?;
    let ga = grid_ab.subgrid(part.n_a())?;
    let gb = grid_ab.subgrid(part.n_b())?;
    let a = random_packet(&ga, rng)?;
    let b = random_packet(&gb, rng)?;
    DensityMatrix::from_pure(&a.tensor(&b)?)
}

/// Product of independent rank-2 mixed states, `rho_A (x) rho_B`.
pub fn random_product_mixed(
    grid_ab: &PhaseSpaceGrid,
    part: &Partition,
    rng: &mut impl Rng,
) -> Result<DensityMatrix> {
    part.check_grid(grid_ab)?;
    let ga = grid_ab.subgrid(part.n_a())?;
    let gb = grid_ab.subgrid(part.n_b())?;
    let rho_a = random_density(&ga, 2, rng)?;
    let rho_b = random_density(&gb, 2, rng)?;
    let kernel = kron(rho_a.kernel(), rho_b.kernel());
    DensityMatrix::new(grid_ab.clone(), kernel)
}

/// Entangled pure state in explicit Schmidt form with two terms.
pub fn random_schmidt(
    grid_ab: &PhaseSpaceGrid,
    part: &Partition,
    rng: &mut impl Rng,
) -> Result<DensityMatrix> {
    part.check_grid(grid_ab)?;
    let ga = grid_ab.subgrid(part.n_a())?;
    let gb = grid_ab.subgrid(part.n_b())?;
    let s = grid_ab.hbar().sqrt();
    let fam_a = hermite_like_family(
        &ga,
        2,
        rng.gen_range(-0.4..0.4) * s,
        rng.gen_range(0.90..0.96) * (grid_ab.hbar() / 2.0).sqrt(),
    )?;
    let fam_b = hermite_like_family(
        &gb,
        2,
        rng.gen_range(-0.4..0.4) * s,
        rng.gen_range(0.90..0.96) * (grid_ab.hbar() / 2.0).sqrt(),
    )?;
    let lambda: f64 = rng.gen_range(0.2..0.8);
    let (l0, l1) = if lambda >= 0.5 {
        (lambda, 1.0 - lambda)
    } else {
        (1.0 - lambda, lambda)
    };
    let t0 = fam_a[0].tensor(&fam_b[0])?;
    let t1 = fam_a[1].tensor(&fam_b[1])?;
    let amps = t0.amplitudes().mapv(|c| c * l0.sqrt()) + t1.amplitudes().mapv(|c| c * l1.sqrt());
    let psi = WaveFunction::new(grid_ab.clone(), amps)?;
    DensityMatrix::from_pure(&psi)
}

/// Random mixed bipartite state of the given rank, generically entangled:
/// a rotated product family with random weights.
pub fn random_mixed(
    grid_ab: &PhaseSpaceGrid,
    part: &Partition,
    rank: usize,
    rng: &mut impl Rng,
) -> Result<DensityMatrix> {
    part.check_grid(grid_ab)?;
    let ga = grid_ab.subgrid(part.n_a())?;
    let gb = grid_ab.subgrid(part.n_b())?;
    let s = grid_ab.hbar().sqrt();
    let fam_a = hermite_like_family(
        &ga,
        2,
        rng.gen_range(-0.4..0.4) * s,
        rng.gen_range(0.90..0.96) * (grid_ab.hbar() / 2.0).sqrt(),
    )?;
    let fam_b = hermite_like_family(
        &gb,
        2,
        rng.gen_range(-0.4..0.4) * s,
        rng.gen_range(0.90..0.96) * (grid_ab.hbar() / 2.0).sqrt(),
    )?;
    let mut product = Vec::with_capacity(4);
    for a in &fam_a {
        for b in &fam_b {
            product.push(a.tensor(b)?);
        }
    }
    let rank = rank.clamp(1, product.len());
    let vectors = rotate_family(&product, rank, rng);
    let weights = random_weights(rank, rng);
    DensityMatrix::assemble(&SpectralDecomposition::new(weights, vectors)?)
}

/// The four-family sweep used by the equivalence checks: pure product,
/// mixed product, Schmidt pair, and a random mixture of the given rank.
pub fn family_sweep(
    grid_ab: &PhaseSpaceGrid,
    part: &Partition,
    max_rank: usize,
    rng: &mut impl Rng,
) -> Result<Vec<(&'static str, DensityMatrix)>> {
    Ok(vec![
        ("pure-product", random_pure_product(grid_ab, part, rng)?),
        ("product-mixed", random_product_mixed(grid_ab, part, rng)?),
        ("schmidt", random_schmidt(grid_ab, part, rng)?),
        ("random-mixed", random_mixed(grid_ab, part, max_rank, rng)?),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn generators_are_seed_deterministic() {
        let grid = standard_grid(2, 32, 1.0).unwrap();
        let part = Partition::new(1, 1).unwrap();
        let mut r1 = ChaCha8Rng::seed_from_u64(7);
        let mut r2 = ChaCha8Rng::seed_from_u64(7);
        let a = random_mixed(&grid, &part, 3, &mut r1).unwrap();
        let b = random_mixed(&grid, &part, 3, &mut r2).unwrap();
        assert_eq!(a.kernel(), b.kernel());
        let mut r3 = ChaCha8Rng::seed_from_u64(8);
        let c = random_mixed(&grid, &part, 3, &mut r3).unwrap();
        assert_ne!(a.kernel(), c.kernel());
    }

    #[test]
    fn generated_states_are_valid_at_every_hbar() {
        for hbar in [0.5, 1.0, 2.0] {
            let grid = standard_grid(2, 32, hbar).unwrap();
            let part = Partition::new(1, 1).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(41);
            for (name, rho) in family_sweep(&grid, &part, 4, &mut rng).unwrap() {
                let tr = rho.trace();
                assert!(
                    (tr - Complex64::new(1.0, 0.0)).norm() < 1e-8,
                    "{name} at hbar={hbar}"
                );
                rho.validate_full().unwrap();
            }
        }
    }

    #[test]
    fn random_density_has_requested_rank() {
        let grid = standard_grid(1, 64, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let rho = random_density(&grid, 3, &mut rng).unwrap();
        let dec = rho.spectral_decompose(1e-10).unwrap();
        assert_eq!(dec.rank(), 3);
    }
}
