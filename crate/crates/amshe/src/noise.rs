//! White-in-time, spatially correlated Gaussian noise increments.
//!
//! A slice over one time step is `dU = dx^d (phi (*) w)` with `w` iid
//! `N(0, dt/dx^d)` per cell and `(*)` circular convolution, so that
//! `Cov(dU(x), dU(x')) = dt R_disc(x - x')`. Sampling happens directly in
//! spectral space: the DFT of `w` is a Hermitian-symmetric complex Gaussian
//! field, which saves the forward transform in the solver hot loop. The
//! public [`sample_noise_increment`] returns the physical-space slice.

use crate::fft::{FftScratch, SpectralGrid};
use crate::grid::DomainSpec;
use crate::kernel::DiscreteKernel;
use rand::Rng;
use rand_distr::StandardNormal;
use rustfft::num_complex::Complex64;

/// One noise increment over a step `dt`, as a density on the grid.
#[derive(Debug, Clone)]
pub struct NoiseSlice {
    pub field: Vec<f64>,
    pub dt: f64,
}

/// Fills `spec` with the DFT of an iid `N(0, var_per_cell)` real field.
///
/// Free bins get independent complex Gaussians with `E|z|^2 = n^d var`;
/// bins whose Hermitian partner is also stored are filled in conjugate
/// pairs, and self-conjugate bins are real. Iteration order is fixed, so the
/// output is a deterministic function of the RNG state.
pub fn sample_spectral_white<R: Rng>(
    rng: &mut R,
    grid: &SpectralGrid,
    var_per_cell: f64,
    spec: &mut [Complex64],
) {
    let s2 = grid.cells() as f64 * var_per_cell;
    let sd_full = s2.sqrt();
    let sd_half = (s2 / 2.0).sqrt();
    for idx in 0..grid.spec_len() {
        match grid.hermitian_partner(idx) {
            None => {
                // partner lives outside the stored half-spectrum: free bin
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                spec[idx] = Complex64::new(re * sd_half, im * sd_half);
            }
            Some(p) if p == idx => {
                let re: f64 = rng.sample(StandardNormal);
                spec[idx] = Complex64::new(re * sd_full, 0.0);
            }
            Some(p) if p > idx => {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                spec[idx] = Complex64::new(re * sd_half, im * sd_half);
            }
            Some(p) => {
                spec[idx] = spec[p].conj();
            }
        }
    }
}

/// Fills `spec` with the DFT of a noise slice `dU` for the given kernel:
/// spectrally sampled white noise times the kernel's convolution
/// multipliers (identity for white-in-space noise).
pub fn sample_spectral_slice<R: Rng>(
    rng: &mut R,
    grid: &SpectralGrid,
    kernel: &DiscreteKernel,
    domain: &DomainSpec,
    dt: f64,
    spec: &mut [Complex64],
) {
    assert!(dt > 0.0, "dt must be > 0");
    let var = dt / domain.cell_volume();
    sample_spectral_white(rng, grid, var, spec);
    if !kernel.is_white() {
        for (s, &m) in spec.iter_mut().zip(&kernel.spectral) {
            *s *= m;
        }
    }
}

/// Physical-space noise increment with covariance `dt R_disc`.
pub fn sample_noise_increment<R: Rng>(
    rng: &mut R,
    kernel: &DiscreteKernel,
    domain: &DomainSpec,
    grid: &SpectralGrid,
    dt: f64,
    scr: &mut FftScratch,
) -> NoiseSlice {
    assert!(dt > 0.0, "dt must be > 0");
    let mut field = vec![0.0; domain.cells()];
    if kernel.is_white() {
        // white kind returns the iid field directly; no transform needed
        let sd = (dt / domain.cell_volume()).sqrt();
        for v in field.iter_mut() {
            let z: f64 = rng.sample(StandardNormal);
            *v = z * sd;
        }
        return NoiseSlice { field, dt };
    }
    let mut spec = vec![Complex64::default(); grid.spec_len()];
    sample_spectral_slice(rng, grid, kernel, domain, dt, &mut spec);
    grid.inverse(&spec, &mut field, scr);
    NoiseSlice { field, dt }
}
