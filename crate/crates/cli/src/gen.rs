//! Seeded state generation. Identical flags and seed produce byte-identical
//! output files.

use crate::GenArgs;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::process::ExitCode;
use wigmarg_core::error::{Error, Result};
use wigmarg_core::gaussian::{random_pure_covariance, CovarianceMatrix};
use wigmarg_core::grid::{Partition, PhaseSpaceGrid};
use wigmarg_core::hilbert::DensityMatrix;
use wigmarg_core::states;
use wigmarg_core::{io, states::standard_bounds};

fn build_grid(args: &GenArgs, n: usize) -> Result<PhaseSpaceGrid> {
    let (lo, hi) = standard_bounds(args.grid.hbar);
    let x_min = args.grid.xmin.unwrap_or(lo);
    let x_max = args.grid.xmax.unwrap_or(hi);
    PhaseSpaceGrid::new(n, args.grid.points, x_min, x_max, args.grid.hbar)
}

fn partition(args: &GenArgs) -> Result<Partition> {
    Partition::new(args.grid.na.unwrap_or(1), args.grid.nb.unwrap_or(1))
}

pub fn run(args: &GenArgs) -> Result<ExitCode> {
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    match args.kind.as_str() {
        "packet" => {
            let n = args.grid.n.unwrap_or(1);
            let grid = build_grid(args, n)?;
            let psi = states::random_packet(&grid, &mut rng)?;
            let rho = DensityMatrix::from_pure(&psi)?;
            io::write_density(&args.out, &rho, None)?;
        }
        "mixed" => {
            let part = partition(args)?;
            let grid = build_grid(args, part.n())?;
            let rho = states::random_mixed(&grid, &part, args.rank, &mut rng)?;
            io::write_density(&args.out, &rho, Some(&part))?;
        }
        "schmidt" => {
            let part = partition(args)?;
            let grid = build_grid(args, part.n())?;
            let rho = states::random_schmidt(&grid, &part, &mut rng)?;
            io::write_density(&args.out, &rho, Some(&part))?;
        }
        "gaussian" => {
            let part = partition(args)?;
            let pure = random_pure_covariance(part.n(), Some(part), args.grid.hbar, &mut rng)?;
            let cov = if args.mix > 0.0 {
                let bump = nalgebra::DMatrix::<f64>::identity(2 * part.n(), 2 * part.n())
                    * (args.mix * args.grid.hbar / 2.0);
                CovarianceMatrix::new(pure.matrix() + bump, Some(part), args.grid.hbar)?
            } else {
                pure
            };
            io::write_covariance(&args.out, &cov)?;
        }
        "two-mode-squeezed" => {
            let cov = CovarianceMatrix::two_mode_squeezed(args.r, args.grid.hbar)?;
            io::write_covariance(&args.out, &cov)?;
        }
        other => {
            return Err(Error::MalformedHeader(format!(
                "unknown state kind {other:?}; expected packet|mixed|schmidt|gaussian|two-mode-squeezed"
            )));
        }
    }
    Ok(ExitCode::SUCCESS)
}
