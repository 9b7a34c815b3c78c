//! Discrete Fourier transforms on the centered torus grid, the Heaviside
//! indicator, and the Gaussian spectral filter.
//!
//! Transform convention: coeff(m) = h²·Σ_ij f_ij·exp(−ι k·x_ij) with k = 2π·m
//! and the centered coordinates x_ij of [`GridSpec::coord`]. With this scaling
//! coeff(0) is the mean of f, and Parseval reads h²·Σ f² = Σ |coeff|².
//!
//! Because x_ij = h·(i − n/2, j − n/2), the centered transform differs from the
//! standard DFT only by the phase (−1)^(m₁+m₂); for even n that phase equals
//! (−1)^(i+j) in storage indices, which is how it is applied below.

use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::grid::{ScalarField, SpectralField};

/// Largest imaginary residue tolerated when inverting a conjugate-symmetric field.
pub const IMAG_RESIDUE_TOL: f64 = 1e-10;

fn planner() -> &'static Mutex<FftPlanner<f64>> {
    static PLANNER: OnceLock<Mutex<FftPlanner<f64>>> = OnceLock::new();
    PLANNER.get_or_init(|| Mutex::new(FftPlanner::new()))
}

fn plan(n: usize, forward: bool) -> Arc<dyn Fft<f64>> {
    let mut p = planner().lock().unwrap();
    if forward {
        p.plan_fft_forward(n)
    } else {
        p.plan_fft_inverse(n)
    }
}

fn transpose_square(buf: &mut [Complex64], n: usize) {
    for i in 0..n {
        for j in (i + 1)..n {
            buf.swap(i * n + j, j * n + i);
        }
    }
}

/// Unnormalized 2D DFT over both axes of an n×n row-major buffer, in place.
fn fft2(buf: &mut [Complex64], n: usize, forward: bool) {
    let fft = plan(n, forward);
    // `process` splits the buffer into n contiguous rows of length n.
    fft.process(buf);
    transpose_square(buf, n);
    fft.process(buf);
    transpose_square(buf, n);
}

/// Centered forward transform: coeff(m) = h²·Σ f_ij·exp(−ι k·x_ij).
pub fn forward_transform(f: &ScalarField) -> SpectralField {
    let grid = f.grid();
    let n = grid.n();
    let h2 = grid.h() * grid.h();
    let mut buf: Vec<Complex64> = f.values().iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft2(&mut buf, n, true);
    for i in 0..n {
        for j in 0..n {
            let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
            buf[i * n + j] *= sign * h2;
        }
    }
    SpectralField::from_coeff(grid, buf).expect("buffer sized from grid")
}

/// Inverse of [`forward_transform`]: evaluates Σ_k coeff(k)·exp(ι k·x_ij).
///
/// The imaginary part of the result must vanish (input conjugate-symmetric);
/// residues above [`IMAG_RESIDUE_TOL`] are rejected, smaller ones discarded.
pub fn inverse_transform(field: &SpectralField) -> Result<ScalarField> {
    let grid = field.grid();
    let n = grid.n();
    let mut buf: Vec<Complex64> = field.raw().to_vec();
    for i in 0..n {
        for j in 0..n {
            if (i + j) % 2 != 0 {
                buf[i * n + j] = -buf[i * n + j];
            }
        }
    }
    fft2(&mut buf, n, false);
    // Forward scaling h² times the DFT pair's n² leaves the round trip at 1.
    let max_imag = buf.iter().fold(0.0_f64, |a, c| a.max(c.im.abs()));
    if max_imag > IMAG_RESIDUE_TOL {
        return Err(Error::NotConjugateSymmetric { max_imag });
    }
    let values: Vec<f64> = buf.iter().map(|c| c.re).collect();
    Ok(ScalarField::from_values(grid, values).expect("buffer sized from grid"))
}

/// Pointwise Heaviside of the level set: 1 where φ > 0, 0 where φ < 0, 1/2 at
/// exact zeros (symmetric treatment of the interface nodes).
pub fn heaviside_indicator(phi: &ScalarField) -> ScalarField {
    let mut out = ScalarField::zeros(phi.grid());
    for (o, &v) in out.values_mut().iter_mut().zip(phi.values()) {
        *o = if v > 0.0 {
            1.0
        } else if v < 0.0 {
            0.0
        } else {
            0.5
        };
    }
    out
}

/// Gaussian low-pass filter: multiplies the coefficient of wavenumber k by
/// exp(−ε²|k|²/2). ε = 0 is the identity; negative ε is rejected.
pub fn gaussian_filter(field: &SpectralField, epsilon: f64) -> Result<SpectralField> {
    if epsilon < 0.0 {
        return Err(Error::NegativeEpsilon(epsilon));
    }
    let grid = field.grid();
    let n = grid.n();
    let mut out = field.clone();
    if epsilon == 0.0 {
        return Ok(out);
    }
    let two_pi = std::f64::consts::TAU;
    for i in 0..n {
        let k1 = two_pi * grid.mode(i) as f64;
        for j in 0..n {
            let k2 = two_pi * grid.mode(j) as f64;
            let damp = (-epsilon * epsilon * (k1 * k1 + k2 * k2) / 2.0).exp();
            out.raw_mut()[grid.idx(i, j)] *= damp;
        }
    }
    Ok(out)
}
