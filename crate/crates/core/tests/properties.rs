//! Property-based invariants over randomized inputs.

use ndarray::linalg::kron;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use wigmarg_core::grid::{Partition, PhaseSpaceGrid};
use wigmarg_core::hilbert::{hermite_like_family, DensityMatrix, SpectralDecomposition};
use wigmarg_core::states;
use wigmarg_core::wigner::cross_wigner;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn fft_duality_holds_for_any_grid(
        points in (4usize..64).prop_map(|k| 2 * k),
        x_min in -20.0f64..-1.0,
        span in 2.0f64..40.0,
        hbar in 0.1f64..10.0,
    ) {
        let grid = PhaseSpaceGrid::new(1, points, x_min, x_min + span, hbar).unwrap();
        let duality = grid.dx() * grid.dp() * points as f64;
        let target = 2.0 * std::f64::consts::PI * hbar;
        prop_assert!((duality - target).abs() <= 1e-12 * target);
    }

    #[test]
    fn purity_is_weight_square_sum(
        rank in 1usize..4,
        raw in prop::collection::vec(0.05f64..1.0, 3),
        seed in 0u64..256,
    ) {
        let grid = PhaseSpaceGrid::new(1, 16, -8.0, 8.0, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let _ = &mut rng;
        let total: f64 = raw[..rank].iter().sum();
        let weights: Vec<f64> = raw[..rank].iter().map(|w| w / total).collect();
        let family = hermite_like_family(&grid, rank, 0.1, 0.55).unwrap();
        let dec = SpectralDecomposition::new(weights.clone(), family).unwrap();
        let rho = DensityMatrix::assemble(&dec).unwrap();
        let expect: f64 = weights.iter().map(|w| w * w).sum();
        prop_assert!((rho.purity() - expect).abs() <= 1e-8);
    }

    #[test]
    fn partial_trace_preserves_trace_and_hermiticity(seed in 0u64..256) {
        let grid = PhaseSpaceGrid::new(2, 16, -8.0, 8.0, 1.0).unwrap();
        let part = Partition::new(1, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rho = states::random_mixed(&grid, &part, 3, &mut rng).unwrap();
        let reduced = rho.partial_trace(&part).unwrap();
        let tr = reduced.trace();
        prop_assert!((tr.re - 1.0).abs() <= 1e-8 && tr.im.abs() <= 1e-8);
    }

    #[test]
    fn product_states_reduce_to_their_factor(seed in 0u64..256) {
        let grid = PhaseSpaceGrid::new(1, 16, -8.0, 8.0, 1.0).unwrap();
        let grid2 = grid.subgrid(2).unwrap();
        let part = Partition::new(1, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rho_a = states::random_density(&grid, 2, &mut rng).unwrap();
        let rho_b = states::random_density(&grid, 2, &mut rng).unwrap();
        let rho = DensityMatrix::new(grid2, kron(rho_a.kernel(), rho_b.kernel())).unwrap();
        let reduced = rho.partial_trace(&part).unwrap();
        let scale = rho_a.kernel().iter().map(|c| c.norm()).fold(0.0f64, f64::max);
        let gap = reduced
            .kernel()
            .iter()
            .zip(rho_a.kernel().iter())
            .map(|(x, y)| (x - y).norm())
            .fold(0.0f64, f64::max);
        prop_assert!(gap <= 1e-10 * scale);
    }
}

proptest! {
    // transforms are costlier; fewer cases
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn cross_wigner_conjugate_symmetry_random_packets(seed in 0u64..1024) {
        let grid = states::standard_grid(1, 32, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let phi = states::random_packet(&grid, &mut rng).unwrap();
        let psi = states::random_packet(&grid, &mut rng).unwrap();
        let ab = cross_wigner(&phi, &psi).unwrap();
        let ba = cross_wigner(&psi, &phi).unwrap();
        let defect = ab
            .values()
            .iter()
            .zip(ba.values().iter())
            .map(|(u, v)| (u - v.conj()).norm())
            .fold(0.0f64, f64::max);
        prop_assert!(defect <= 1e-10);
        // total cross-Wigner integral is the overlap
        let overlap = psi.inner(&phi);
        prop_assert!((ab.integral() - overlap).norm() <= 1e-8);
    }
}
