//! Internal FFT machinery for the kernel <-> phase-space maps.
//!
//! The transform of one axis pair takes an `N x N` slice of a position
//! kernel `K(x, x')` to the `N x N` slice of a phase-space function over
//! `(x, p)` and back. Half-integer shifts `x +- y/2` are resolved on a
//! doubled half-step lattice: values at half-step sites come from
//! band-limited (trigonometric) interpolation of the sampled data, realized
//! as a spectral phase multiplication with the Nyquist bin zeroed. Sites
//! outside the domain contribute zero. The `y` integral then runs over a
//! length-`2N` lattice whose even frequency bins coincide with the grid's
//! momentum lattice.
//!
//! With this construction the discrete transform is linear and exact for
//! band-limited data, and summing the output over the momentum lattice
//! collapses onto the kernel diagonal exactly, which is what the
//! marginalization identities rely on.

use ndarray::{Array2, ArrayView2, ArrayViewMut2};
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::f64::consts::PI;
use std::sync::Arc;

fn wrap(i: isize, len: usize) -> usize {
    i.rem_euclid(len as isize) as usize
}

/// FFT plans and phase tables for one axis of `n` lattice points.
pub(crate) struct PairEngine {
    n: usize,
    fwd_n: Arc<dyn Fft<f64>>,
    inv_n: Arc<dyn Fft<f64>>,
    fwd_2n: Arc<dyn Fft<f64>>,
    inv_2n: Arc<dyn Fft<f64>>,
    /// Per DFT bin `j`: `exp(i*pi*ktilde(j)/n)` for a `+dx/2` shift, with the
    /// ambiguous Nyquist bin zeroed (the symmetric interpolant).
    half_phase: Vec<Complex64>,
}

impl PairEngine {
    pub(crate) fn new(n: usize) -> Self {
        assert!(n.is_multiple_of(2) && n >= 2);
        let mut planner = FftPlanner::new();
        let fwd_n = planner.plan_fft_forward(n);
        let inv_n = planner.plan_fft_inverse(n);
        let fwd_2n = planner.plan_fft_forward(2 * n);
        let inv_2n = planner.plan_fft_inverse(2 * n);
        let half_phase = (0..n)
            .map(|j| {
                if j == n / 2 {
                    Complex64::new(0.0, 0.0)
                } else {
                    let ktilde = if j < n / 2 {
                        j as f64
                    } else {
                        j as f64 - n as f64
                    };
                    Complex64::from_polar(1.0, PI * ktilde / n as f64)
                }
            })
            .collect();
        Self {
            n,
            fwd_n,
            inv_n,
            fwd_2n,
            inv_2n,
            half_phase,
        }
    }

    /// In-place band-limited shift of a length-`n` line by `+dx/2`.
    fn half_shift_line(&self, buf: &mut [Complex64], scratch: &mut Vec<Complex64>) {
        scratch.resize(
            self.fwd_n
                .get_inplace_scratch_len()
                .max(self.inv_n.get_inplace_scratch_len()),
            Complex64::default(),
        );
        self.fwd_n.process_with_scratch(buf, scratch);
        for (v, ph) in buf.iter_mut().zip(&self.half_phase) {
            *v *= ph;
        }
        self.inv_n.process_with_scratch(buf, scratch);
        let s = 1.0 / self.n as f64;
        for v in buf.iter_mut() {
            *v *= s;
        }
    }

    /// Shifts both arguments of an `n x n` kernel slice by `+dx/2`,
    /// producing its values on the odd half-step sites.
    fn half_shift_both(&self, mat: &mut Array2<Complex64>) {
        let n = self.n;
        let mut line = vec![Complex64::default(); n];
        let mut scratch = Vec::new();
        for b in 0..n {
            for a in 0..n {
                line[a] = mat[(a, b)];
            }
            self.half_shift_line(&mut line, &mut scratch);
            for a in 0..n {
                mat[(a, b)] = line[a];
            }
        }
        for a in 0..n {
            for b in 0..n {
                line[b] = mat[(a, b)];
            }
            self.half_shift_line(&mut line, &mut scratch);
            for b in 0..n {
                mat[(a, b)] = line[b];
            }
        }
    }

    /// Band-limited upsampling of a length-`n` line to the `2n` half-step
    /// lattice (spectrum zero-padded, Nyquist bin split symmetrically).
    fn upsample_line(
        &self,
        src: &[Complex64],
        dst: &mut [Complex64],
        scratch: &mut Vec<Complex64>,
    ) {
        let n = self.n;
        debug_assert_eq!(dst.len(), 2 * n);
        let mut f = src.to_vec();
        scratch.resize(
            self.fwd_n
                .get_inplace_scratch_len()
                .max(self.inv_2n.get_inplace_scratch_len()),
            Complex64::default(),
        );
        self.fwd_n.process_with_scratch(&mut f, scratch);
        dst.fill(Complex64::default());
        for (j, fj) in f.iter().enumerate() {
            match j.cmp(&(n / 2)) {
                std::cmp::Ordering::Less => dst[j] = *fj,
                std::cmp::Ordering::Equal => {
                    dst[n / 2] = 0.5 * fj;
                    dst[2 * n - n / 2] = 0.5 * fj;
                }
                std::cmp::Ordering::Greater => dst[j + n] = *fj,
            }
        }
        self.inv_2n.process_with_scratch(dst, scratch);
        let s = 1.0 / n as f64;
        for v in dst.iter_mut() {
            *v *= s;
        }
    }

    /// Kernel slice `(x, x')` -> phase-space slice `(x, p)`.
    ///
    /// `scale` carries the per-axis measure, `dx / (2*pi*hbar)` for a Wigner
    /// normalization. Momentum comes out in the centered storage order.
    pub(crate) fn forward_lane(
        &self,
        lane: &ArrayView2<Complex64>,
        scale: f64,
        out: &mut ArrayViewMut2<Complex64>,
    ) {
        let n = self.n;
        let n2 = 2 * n;
        let half = n as isize / 2;
        let mut odd = lane.to_owned();
        self.half_shift_both(&mut odd);
        let mut h = vec![Complex64::default(); n2];
        let mut scratch = vec![Complex64::default(); self.fwd_2n.get_inplace_scratch_len()];
        for i in 0..n {
            h.fill(Complex64::default());
            let ii = i as isize;
            for r in -half..half {
                let a = ii + r;
                if a < 0 || a >= n as isize {
                    continue;
                }
                // even lag y = 2r*dx lands on original sites
                let b = ii - r;
                if (0..n as isize).contains(&b) {
                    h[wrap(2 * r, n2)] = lane[(a as usize, b as usize)];
                }
                // odd lag y = (2r+1)*dx needs the half-step values
                let b = ii - r - 1;
                if (0..n as isize).contains(&b) {
                    h[wrap(2 * r + 1, n2)] = odd[(a as usize, b as usize)];
                }
            }
            self.fwd_2n.process_with_scratch(&mut h, &mut scratch);
            for k in 0..n {
                let kappa = wrap(2 * (k as isize - half), n2);
                out[(i, k)] = scale * h[kappa];
            }
        }
    }

    /// Phase-space slice `(x, p)` -> kernel slice `(x, x')`.
    ///
    /// `scale` carries the momentum measure `dp`. Entries whose arguments sit
    /// at a half-integer midpoint are reconstructed from the band-limited
    /// interpolant of the phase-space data along `x`.
    pub(crate) fn inverse_lane(
        &self,
        lane: &ArrayView2<Complex64>,
        scale: f64,
        out: &mut ArrayViewMut2<Complex64>,
    ) {
        let n = self.n;
        let n2 = 2 * n;
        let mut scratch = Vec::new();
        // upsample along x so midpoints (x_a + x_b)/2 are available
        let mut wh = Array2::<Complex64>::default((n2, n));
        let mut line = vec![Complex64::default(); n];
        let mut line2 = vec![Complex64::default(); n2];
        for col in 0..n {
            for (i, l) in line.iter_mut().enumerate() {
                *l = lane[(i, col)];
            }
            self.upsample_line(&line, &mut line2, &mut scratch);
            for s in 0..n2 {
                wh[(s, col)] = line2[s];
            }
        }
        // per midpoint: inverse DFT over the momentum lattice
        let mut c = Array2::<Complex64>::default((n2, n));
        scratch.resize(self.inv_n.get_inplace_scratch_len(), Complex64::default());
        let mut u = vec![Complex64::default(); n];
        for s in 0..n2 {
            for (j, uj) in u.iter_mut().enumerate() {
                // storage k = ktilde + n/2, DFT wants index ktilde mod n
                *uj = wh[(s, (j + n / 2) % n)];
            }
            self.inv_n.process_with_scratch(&mut u, &mut scratch);
            for m in 0..n {
                c[(s, m)] = u[m] * scale;
            }
        }
        // lags |a - b| >= n/2 are not resolved by the n momentum bins (the
        // inverse DFT is periodic in the lag); states are required to carry
        // no coherence at those separations, so reconstruct them as zero
        // rather than aliasing near-diagonal values into the corners
        for a in 0..n {
            for b in 0..n {
                let lag = a as isize - b as isize;
                out[(a, b)] = if lag.unsigned_abs() < n / 2 {
                    c[(a + b, wrap(lag, n))]
                } else {
                    Complex64::default()
                };
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array1;

    fn packet(n: usize, dx: f64, x_min: f64, x0: f64, sigma: f64) -> Array1<Complex64> {
        let mut v = Array1::default(n);
        for i in 0..n {
            let x = x_min + i as f64 * dx;
            v[i] = Complex64::new((-((x - x0) / sigma).powi(2) / 2.0).exp(), 0.0);
        }
        v
    }

    #[test]
    fn half_shift_matches_shifted_samples() {
        let (n, x_min, x_max) = (64usize, -8.0, 8.0);
        let dx = (x_max - x_min) / n as f64;
        let eng = PairEngine::new(n);
        let f = packet(n, dx, x_min, 0.3, 0.8);
        let mut buf = f.to_vec();
        let mut scratch = Vec::new();
        eng.half_shift_line(&mut buf, &mut scratch);
        let expect = packet(n, dx, x_min + dx / 2.0, 0.3, 0.8);
        for i in 0..n {
            assert!((buf[i] - expect[i]).norm() < 1e-12, "site {i}");
        }
    }

    #[test]
    fn upsample_reproduces_even_sites_and_interpolates_odd() {
        let (n, x_min, x_max) = (64usize, -8.0, 8.0);
        let dx = (x_max - x_min) / n as f64;
        let eng = PairEngine::new(n);
        let f = packet(n, dx, x_min, -0.7, 0.9);
        let mut dst = vec![Complex64::default(); 2 * n];
        let mut scratch = Vec::new();
        eng.upsample_line(f.as_slice().unwrap(), &mut dst, &mut scratch);
        let fine = packet(2 * n, dx / 2.0, x_min, -0.7, 0.9);
        for s in 0..2 * n {
            assert!((dst[s] - fine[s]).norm() < 1e-12, "site {s}");
        }
    }

    #[test]
    fn upsample_and_half_shift_agree_on_odd_sites() {
        // the two interpolation routes must coincide exactly so that the
        // wavefunction and kernel transform paths stay consistent
        let n = 32usize;
        let eng = PairEngine::new(n);
        let mut data = vec![Complex64::default(); n];
        // deterministic rough data; no decay assumptions here
        for (i, v) in data.iter_mut().enumerate() {
            *v = Complex64::new((i as f64 * 0.37).sin(), (i as f64 * 0.13).cos());
        }
        let mut up = vec![Complex64::default(); 2 * n];
        let mut scratch = Vec::new();
        eng.upsample_line(&data, &mut up, &mut scratch);
        let mut shifted = data.clone();
        eng.half_shift_line(&mut shifted, &mut scratch);
        for a in 0..n {
            assert!((up[2 * a] - data[a]).norm() < 1e-12);
            assert!((up[2 * a + 1] - shifted[a]).norm() < 1e-12);
        }
    }
}
