//! File formats: `.wqs` state files, `.wig` Wigner exports, covariance
//! JSON, and CSV emission for plotting pipelines.
//!
//! State and Wigner files are a single-line UTF-8 JSON header (fixed field
//! order, no NaN/Inf) terminated by `\n`, followed by a little-endian
//! float64 block. Density payloads interleave `(re, im)` row-major;
//! wavefunction payloads interleave amplitudes; Wigner payloads are plain
//! real values in storage axis order. The binary block is the source of
//! truth; CSV is a derived view at 17 significant digits.

use crate::error::{Error, Result};
use crate::gaussian::CovarianceMatrix;
use crate::grid::{Partition, PhaseSpaceGrid};
use crate::hilbert::{DensityMatrix, WaveFunction};
use crate::wigner::WignerGrid;
use ndarray::{Array2, ArrayD, IxDyn};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

pub const FORMAT_VERSION: u32 = 1;

/// Grid metadata header; field order is normative.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct GridHeader {
    pub version: u32,
    pub n: usize,
    #[serde(rename = "N")]
    pub points: usize,
    pub x_min: f64,
    pub x_max: f64,
    pub hbar: f64,
    pub n_a: usize,
    pub n_b: usize,
}

impl GridHeader {
    pub fn new(grid: &PhaseSpaceGrid, partition: Option<&Partition>) -> Self {
        let (n_a, n_b) = match partition {
            Some(p) => (p.n_a(), p.n_b()),
            None => (grid.n(), 0),
        };
        Self {
            version: FORMAT_VERSION,
            n: grid.n(),
            points: grid.points(),
            x_min: grid.x_min(),
            x_max: grid.x_max(),
            hbar: grid.hbar(),
            n_a,
            n_b,
        }
    }

    pub fn grid(&self) -> Result<PhaseSpaceGrid> {
        if ![self.x_min, self.x_max, self.hbar]
            .iter()
            .all(|v| v.is_finite())
        {
            return Err(Error::NonFinite("grid header"));
        }
        PhaseSpaceGrid::new(self.n, self.points, self.x_min, self.x_max, self.hbar)
    }

    pub fn partition(&self) -> Result<Option<Partition>> {
        if self.n_b == 0 {
            if self.n_a != self.n {
                return Err(Error::MalformedHeader(format!(
                    "n_a = {} with n_b = 0 must equal n = {}",
                    self.n_a, self.n
                )));
            }
            return Ok(None);
        }
        if self.n_a + self.n_b != self.n {
            return Err(Error::MalformedHeader(format!(
                "n_a + n_b = {} does not match n = {}",
                self.n_a + self.n_b,
                self.n
            )));
        }
        Ok(Some(Partition::new(self.n_a, self.n_b)?))
    }
}

/// The bare grid header serialized exactly as written to file.
pub fn grid_header_json(grid: &PhaseSpaceGrid, partition: Option<&Partition>) -> String {
    serde_json::to_string(&GridHeader::new(grid, partition)).expect("header serializes")
}

#[derive(Debug, Serialize, Deserialize)]
struct StateHeader {
    version: u32,
    n: usize,
    #[serde(rename = "N")]
    points: usize,
    x_min: f64,
    x_max: f64,
    hbar: f64,
    n_a: usize,
    n_b: usize,
    kind: String,
}

impl StateHeader {
    fn new(grid: &PhaseSpaceGrid, partition: Option<&Partition>, kind: &str) -> Self {
        let g = GridHeader::new(grid, partition);
        Self {
            version: g.version,
            n: g.n,
            points: g.points,
            x_min: g.x_min,
            x_max: g.x_max,
            hbar: g.hbar,
            n_a: g.n_a,
            n_b: g.n_b,
            kind: kind.to_string(),
        }
    }

    fn grid_header(&self) -> GridHeader {
        GridHeader {
            version: self.version,
            n: self.n,
            points: self.points,
            x_min: self.x_min,
            x_max: self.x_max,
            hbar: self.hbar,
            n_a: self.n_a,
            n_b: self.n_b,
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct WignerHeader {
    version: u32,
    n: usize,
    #[serde(rename = "N")]
    points: usize,
    x_min: f64,
    x_max: f64,
    hbar: f64,
    n_a: usize,
    n_b: usize,
    kind: String,
    /// Storage axis order, e.g. `["x1", "x2", "p1", "p2"]`.
    axes: Vec<String>,
}

fn axis_labels(n: usize) -> Vec<String> {
    (1..=n)
        .map(|i| format!("x{i}"))
        .chain((1..=n).map(|i| format!("p{i}")))
        .collect()
}

fn write_payload(w: &mut impl Write, values: impl Iterator<Item = f64>) -> Result<()> {
    for v in values {
        if !v.is_finite() {
            return Err(Error::NonFinite("binary payload"));
        }
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

fn read_payload(r: &mut impl Read, expected: usize) -> Result<Vec<f64>> {
    let mut raw = Vec::new();
    r.read_to_end(&mut raw)?;
    if raw.len() != expected * 8 {
        return Err(Error::PayloadSize {
            got: raw.len() / 8,
            expected,
        });
    }
    let mut out = Vec::with_capacity(expected);
    for chunk in raw.chunks_exact(8) {
        let v = f64::from_le_bytes(chunk.try_into().expect("8-byte chunk"));
        if !v.is_finite() {
            return Err(Error::NonFinite("binary payload"));
        }
        out.push(v);
    }
    Ok(out)
}

fn read_header_line(r: &mut impl BufRead) -> Result<String> {
    let mut line = String::new();
    r.read_line(&mut line)?;
    if !line.ends_with('\n') {
        return Err(Error::MalformedHeader(
            "missing newline after header".into(),
        ));
    }
    line.pop();
    Ok(line)
}

/// Writes a density matrix as a `.wqs` file.
pub fn write_density(
    path: impl AsRef<Path>,
    rho: &DensityMatrix,
    partition: Option<&Partition>,
) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    let header = StateHeader::new(rho.grid(), partition, "density");
    serde_json::to_writer(&mut w, &header)?;
    w.write_all(b"\n")?;
    write_payload(&mut w, rho.kernel().iter().flat_map(|c| [c.re, c.im]))?;
    w.flush()?;
    Ok(())
}

/// Writes a wavefunction as a `.wqs` file.
pub fn write_wavefunction(
    path: impl AsRef<Path>,
    psi: &WaveFunction,
    partition: Option<&Partition>,
) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    let header = StateHeader::new(psi.grid(), partition, "wavefunction");
    serde_json::to_writer(&mut w, &header)?;
    w.write_all(b"\n")?;
    write_payload(&mut w, psi.flat().iter().flat_map(|c| [c.re, c.im]))?;
    w.flush()?;
    Ok(())
}

/// Contents of a `.wqs` state file.
#[derive(Debug)]
pub enum StateFile {
    Density(DensityMatrix, Option<Partition>),
    Wave(WaveFunction, Option<Partition>),
}

impl StateFile {
    /// The state as a density matrix, promoting wavefunctions to rank-one
    /// projectors.
    pub fn into_density(self) -> Result<(DensityMatrix, Option<Partition>)> {
        match self {
            StateFile::Density(rho, part) => Ok((rho, part)),
            StateFile::Wave(psi, part) => Ok((DensityMatrix::from_pure(&psi)?, part)),
        }
    }
}

/// Reads a `.wqs` state file of either kind.
pub fn read_state(path: impl AsRef<Path>) -> Result<StateFile> {
    let mut r = BufReader::new(File::open(path)?);
    let line = read_header_line(&mut r)?;
    let header: StateHeader = serde_json::from_str(&line)?;
    if header.version != FORMAT_VERSION {
        return Err(Error::MalformedHeader(format!(
            "unsupported version {}",
            header.version
        )));
    }
    let gh = header.grid_header();
    let grid = gh.grid()?;
    let partition = gh.partition()?;
    match header.kind.as_str() {
        "density" => {
            let dim = grid.kernel_dim();
            let vals = read_payload(&mut r, 2 * dim * dim)?;
            let kernel = Array2::from_shape_vec(
                (dim, dim),
                vals.chunks_exact(2)
                    .map(|c| Complex64::new(c[0], c[1]))
                    .collect(),
            )
            .expect("shape");
            Ok(StateFile::Density(
                DensityMatrix::new(grid, kernel)?,
                partition,
            ))
        }
        "wavefunction" => {
            let len = grid.kernel_dim();
            let vals = read_payload(&mut r, 2 * len)?;
            let shape: Vec<usize> = vec![grid.points(); grid.n()];
            let amps = ArrayD::from_shape_vec(
                IxDyn(&shape),
                vals.chunks_exact(2)
                    .map(|c| Complex64::new(c[0], c[1]))
                    .collect(),
            )
            .expect("shape");
            Ok(StateFile::Wave(WaveFunction::new(grid, amps)?, partition))
        }
        other => Err(Error::WrongKind {
            got: other.to_string(),
            expected: "density|wavefunction",
        }),
    }
}

/// Writes a Wigner grid as a `.wig` file.
pub fn write_wigner(path: impl AsRef<Path>, w: &WignerGrid) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    let gh = GridHeader::new(w.grid(), w.partition());
    let header = WignerHeader {
        version: gh.version,
        n: gh.n,
        points: gh.points,
        x_min: gh.x_min,
        x_max: gh.x_max,
        hbar: gh.hbar,
        n_a: gh.n_a,
        n_b: gh.n_b,
        kind: "wigner".to_string(),
        axes: axis_labels(w.grid().n()),
    };
    serde_json::to_writer(&mut out, &header)?;
    out.write_all(b"\n")?;
    write_payload(&mut out, w.values().iter().copied())?;
    out.flush()?;
    Ok(())
}

/// Reads a `.wig` file.
pub fn read_wigner(path: impl AsRef<Path>) -> Result<WignerGrid> {
    let mut r = BufReader::new(File::open(path)?);
    let line = read_header_line(&mut r)?;
    let header: WignerHeader = serde_json::from_str(&line)?;
    if header.kind != "wigner" {
        return Err(Error::WrongKind {
            got: header.kind,
            expected: "wigner",
        });
    }
    let gh = GridHeader {
        version: header.version,
        n: header.n,
        points: header.points,
        x_min: header.x_min,
        x_max: header.x_max,
        hbar: header.hbar,
        n_a: header.n_a,
        n_b: header.n_b,
    };
    let grid = gh.grid()?;
    let partition = gh.partition()?;
    if header.axes != axis_labels(grid.n()) {
        return Err(Error::MalformedHeader(format!(
            "unexpected axis order {:?}",
            header.axes
        )));
    }
    let vals = read_payload(&mut r, grid.phase_len())?;
    let shape: Vec<usize> = vec![grid.points(); 2 * grid.n()];
    let values = ArrayD::from_shape_vec(IxDyn(&shape), vals).expect("shape");
    WignerGrid::new(grid, partition, values)
}

#[derive(Debug, Serialize, Deserialize)]
struct CovarianceFile {
    version: u32,
    hbar: f64,
    n_a: usize,
    n_b: usize,
    sigma: Vec<Vec<f64>>,
}

/// Writes a covariance matrix as JSON, row-major in the canonical
/// `(x_A, p_A, x_B, p_B)` ordering.
pub fn write_covariance(path: impl AsRef<Path>, cov: &CovarianceMatrix) -> Result<()> {
    let dim = cov.matrix().nrows();
    let (n_a, n_b) = match cov.partition() {
        Some(p) => (p.n_a(), p.n_b()),
        None => (cov.n(), 0),
    };
    let sigma: Vec<Vec<f64>> = (0..dim)
        .map(|i| (0..dim).map(|j| cov.matrix()[(i, j)]).collect())
        .collect();
    if sigma.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("covariance matrix"));
    }
    let file = CovarianceFile {
        version: FORMAT_VERSION,
        hbar: cov.hbar(),
        n_a,
        n_b,
        sigma,
    };
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer(&mut w, &file)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

/// Reads a covariance matrix from JSON.
pub fn read_covariance(path: impl AsRef<Path>) -> Result<CovarianceMatrix> {
    let r = BufReader::new(File::open(path)?);
    let file: CovarianceFile = serde_json::from_reader(r)?;
    if file.version != FORMAT_VERSION {
        return Err(Error::MalformedHeader(format!(
            "unsupported version {}",
            file.version
        )));
    }
    let dim = file.sigma.len();
    if dim == 0 || file.sigma.iter().any(|row| row.len() != dim) {
        return Err(Error::CovarianceShape {
            expected: dim.max(2),
            rows: dim,
            cols: 0,
        });
    }
    if file.sigma.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("covariance matrix"));
    }
    let sigma = nalgebra::DMatrix::from_fn(dim, dim, |i, j| file.sigma[i][j]);
    let partition = if file.n_b == 0 {
        None
    } else {
        Some(Partition::new(file.n_a, file.n_b)?)
    };
    CovarianceMatrix::new(sigma, partition, file.hbar)
}

/// Emits `x,p,value` CSV lines at 17 significant digits, one phase-space
/// node per line in storage order. A comment line names the columns.
pub fn wigner_csv(w: &WignerGrid, out: &mut impl Write) -> Result<()> {
    let labels = axis_labels(w.grid().n());
    writeln!(out, "# {},value", labels.join(","))?;
    let positions = w.grid().positions();
    let momenta = w.grid().momenta();
    let n = w.grid().n();
    for (idx, v) in w.values().indexed_iter() {
        for ax in 0..n {
            write!(out, "{:.16e},", positions[idx[ax]])?;
        }
        for ax in 0..n {
            write!(out, "{:.16e},", momenta[idx[n + ax]])?;
        }
        writeln!(out, "{v:.16e}")?;
    }
    Ok(())
}
