//! File-driven transforms: reduce, wigner, purity, purify.

use crate::{PurifyArgs, PurityArgs, ReduceArgs, WignerArgs};
use serde::Serialize;
use std::io::BufRead;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use wigmarg_core::error::{Error, Result};
use wigmarg_core::grid::Partition;
use wigmarg_core::hilbert::DensityMatrix;
use wigmarg_core::io;
use wigmarg_core::purify::{purify as purify_state, verify_wigsum};
use wigmarg_core::wigner::{
    density_from_wigner, marginalize_b, trace_via_integral, weyl_symbol_of_kernel,
    wigner_of_density,
};

/// Inputs are either `.wqs` state files or covariance JSON; sniff by the
/// header object rather than trusting extensions.
enum InputFile {
    State(io::StateFile),
    Covariance(wigmarg_core::CovarianceMatrix),
}

fn sniff(path: &Path) -> Result<InputFile> {
    let file = std::fs::File::open(path)?;
    let mut first = String::new();
    std::io::BufReader::new(file).read_line(&mut first)?;
    let value: serde_json::Value = serde_json::from_str(first.trim_end())?;
    if value.get("sigma").is_some() {
        Ok(InputFile::Covariance(io::read_covariance(path)?))
    } else if value.get("kind").is_some() {
        Ok(InputFile::State(io::read_state(path)?))
    } else {
        Err(Error::MalformedHeader(
            "neither a state nor a covariance file".into(),
        ))
    }
}

fn with_wig_extension(path: &Path) -> PathBuf {
    path.with_extension("wig")
}

#[derive(Serialize)]
struct ReduceReport {
    version: u32,
    command: &'static str,
    input_kind: &'static str,
    n_a: usize,
    n_b: usize,
    /// Max elementwise gap between the Wigner transform of the reduced
    /// state and the marginalized full distribution, relative to its peak.
    equivalence_residual: Option<f64>,
    reduced_purity: f64,
}

pub fn reduce(args: &ReduceArgs) -> Result<ExitCode> {
    match sniff(&args.input)? {
        InputFile::State(state) => {
            let (rho, part) = state.into_density()?;
            let part = match (part, args.na, args.nb) {
                (_, Some(na), Some(nb)) => Partition::new(na, nb)?,
                (Some(p), None, None) => p,
                _ => {
                    return Err(Error::MalformedHeader(
                        "state carries no partition; pass --na and --nb".into(),
                    ))
                }
            };
            let reduced = rho.partial_trace(&part)?;
            io::write_density(&args.out, &reduced, None)?;
            let via_marginal = marginalize_b(&wigner_of_density(&rho)?, &part)?;
            io::write_wigner(with_wig_extension(&args.out), &via_marginal)?;
            let via_operator = wigner_of_density(&reduced)?;
            let residual = via_operator
                .values()
                .iter()
                .zip(via_marginal.values().iter())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0f64, f64::max)
                / via_operator.max_abs();
            let report = ReduceReport {
                version: 1,
                command: "reduce",
                input_kind: "density",
                n_a: part.n_a(),
                n_b: part.n_b(),
                equivalence_residual: Some(residual),
                reduced_purity: reduced.purity(),
            };
            emit_report(args.report.as_deref(), &report)?;
            println!("equivalence residual = {residual:.3e}");
            println!("reduced purity = {:.12e}", reduced.purity());
        }
        InputFile::Covariance(cov) => {
            let part = cov
                .partition()
                .copied()
                .ok_or_else(|| Error::MalformedHeader("covariance carries no partition".into()))?;
            let reduced = cov.reduce()?;
            io::write_covariance(&args.out, &reduced)?;
            let purity = reduced.purity()?;
            let report = ReduceReport {
                version: 1,
                command: "reduce",
                input_kind: "covariance",
                n_a: part.n_a(),
                n_b: part.n_b(),
                equivalence_residual: None,
                reduced_purity: purity,
            };
            emit_report(args.report.as_deref(), &report)?;
            println!("reduced purity = {purity:.12e}");
        }
    }
    Ok(ExitCode::SUCCESS)
}

pub fn wigner(args: &WignerArgs) -> Result<ExitCode> {
    let InputFile::State(state) = sniff(&args.input)? else {
        return Err(Error::WrongKind {
            got: "covariance".into(),
            expected: "density|wavefunction",
        });
    };
    let (rho, part) = state.into_density()?;
    let w = wigner_of_density(&rho)?.with_partition(part)?;
    io::write_wigner(&args.out, &w)?;
    if let Some(csv_path) = &args.csv {
        let mut buf = Vec::new();
        io::wigner_csv(&w, &mut buf)?;
        std::fs::write(csv_path, buf)?;
    }
    println!("integral = {:.12e}", w.integral());
    Ok(ExitCode::SUCCESS)
}

pub fn purity(args: &PurityArgs) -> Result<ExitCode> {
    match sniff(&args.input)? {
        InputFile::Covariance(cov) => {
            let formula = cov.purity()?;
            let hbar = cov.hbar();
            // size the sampling lattice from the state's own marginals
            let devs = cov.marginal_deviations();
            let sx = devs.iter().map(|d| d.0).fold(0.0f64, f64::max);
            let sp = devs.iter().map(|d| d.1).fold(0.0f64, f64::max);
            let half = 1.05 * 8.0 * sx;
            let points = match args.points {
                Some(n) => n,
                None => {
                    // momentum window pi*hbar*N/(2*half) must cover 8 sigma_p
                    let need = (2.0 * half * 1.05 * 8.0 * sp) / (std::f64::consts::PI * hbar);
                    let n = (need.ceil() as usize).clamp(64, 4096);
                    n + n % 2
                }
            };
            let grid = wigmarg_core::PhaseSpaceGrid::new(cov.n(), points, -half, half, hbar)?;
            let lattice = density_from_wigner(&cov.sample_wigner(&grid)?)?.purity();
            println!("purity (covariance formula) = {formula:.12e}");
            println!("purity (discretized kernel) = {lattice:.12e}");
        }
        InputFile::State(state) => {
            let (rho, _) = state.into_density()?;
            let direct = rho.purity();
            let q2 = weyl_symbol_of_kernel(rho.grid(), &rho.square_kernel())?;
            let symbol_path = trace_via_integral(&q2);
            println!("purity (kernel sum) = {direct:.12e}");
            println!("purity (symbol trace) = {:.12e}", symbol_path.value.re);
            if !symbol_path.boundary_ok {
                eprintln!(
                    "warning: symbol boundary decay {:.3e} exceeds 1e-10",
                    symbol_path.boundary_max_rel
                );
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct PurifyReport {
    version: u32,
    command: &'static str,
    rank: usize,
    weights: Vec<f64>,
    dropped_mass: f64,
    wigsum_max_residual: f64,
    wigsum_rhs_max: f64,
    wigsum_pass: bool,
    partial_trace_residual: f64,
}

pub fn purify(args: &PurifyArgs) -> Result<ExitCode> {
    let InputFile::State(state) = sniff(&args.input)? else {
        return Err(Error::WrongKind {
            got: "covariance".into(),
            expected: "density",
        });
    };
    let (rho, _) = state.into_density()?;
    if let Some(points) = args.points {
        if points != rho.grid().points() {
            return Err(Error::GridMismatch {
                what: "lattice size (--N must match the input grid)",
            });
        }
    }
    let b_grid = rho.grid().subgrid(args.nb)?;
    let pur = purify_state(&rho, &b_grid)?;
    let part = *pur.partition();
    io::write_wavefunction(&args.out, pur.psi(), Some(&part))?;
    let wig = verify_wigsum(&pur)?;
    let back = DensityMatrix::from_pure(pur.psi())?.partial_trace(&part)?;
    let scale = rho
        .kernel()
        .iter()
        .map(|c| c.norm())
        .fold(f64::MIN_POSITIVE, f64::max);
    let round_trip = back
        .kernel()
        .iter()
        .zip(rho.kernel().iter())
        .map(|(a, b)| (a - b).norm())
        .fold(0.0f64, f64::max)
        / scale;
    let report = PurifyReport {
        version: 1,
        command: "purify",
        rank: pur.weights().len(),
        weights: pur.weights().to_vec(),
        dropped_mass: pur.dropped_mass(),
        wigsum_max_residual: wig.max_residual,
        wigsum_rhs_max: wig.rhs_max,
        wigsum_pass: wig.pass,
        partial_trace_residual: round_trip,
    };
    emit_report(args.report.as_deref(), &report)?;
    println!("rank = {}", report.rank);
    println!(
        "wigsum residual = {:.3e} ({})",
        wig.max_residual,
        if wig.pass { "pass" } else { "FAIL" }
    );
    println!("partial-trace residual = {round_trip:.3e}");
    Ok(if wig.pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn emit_report<T: Serialize>(path: Option<&Path>, report: &T) -> Result<()> {
    if let Some(path) = path {
        let mut bytes = serde_json::to_vec(report)?;
        bytes.push(b'\n');
        std::fs::write(path, bytes)?;
    }
    Ok(())
}
