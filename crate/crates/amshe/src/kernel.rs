//! Mollifier kernels and the induced noise covariance.
//!
//! The spatial covariance is `R = phi * phi` for a nonnegative mollifier
//! `phi` normalized to unit mass, so `sum R dx^d = 1` on the grid. The
//! discrete kernel carries `phi` sampled on the grid together with the
//! spectral multipliers `dx^d * DFT(phi)` used for circular convolution.
//! White-in-space noise (d = 1 only) is the sentinel case with identity
//! multipliers and `R(0) = 1/dx`.

use crate::fft::SpectralGrid;
use crate::grid::DomainSpec;
use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelKind {
    White,
    Mollifier,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelShape {
    Bump,
    Triangle,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub kind: KernelKind,
    pub shape: KernelShape,
    /// Support radius of phi.
    pub half_width: f64,
    /// Optional rescaling exponent for `R^eps(y) = eps^-2 R(y/eps)`.
    pub epsilon: Option<f64>,
}

impl KernelSpec {
    pub fn white() -> Self {
        KernelSpec {
            kind: KernelKind::White,
            shape: KernelShape::Bump,
            half_width: 0.0,
            epsilon: None,
        }
    }

    pub fn mollifier(shape: KernelShape, half_width: f64) -> Self {
        KernelSpec {
            kind: KernelKind::Mollifier,
            shape,
            half_width,
            epsilon: None,
        }
    }
}

#[derive(Debug, Error)]
pub enum KernelError {
    #[error("kernel.kind=white requires domain.dimension=1 (got dimension {0})")]
    UnsupportedWhiteNoise(usize),
    #[error("kernel support {support} exceeds half the domain ({limit})")]
    KernelTooWide { support: f64, limit: f64 },
    #[error("kernel.half_width must be > 0, got {0}")]
    BadHalfWidth(f64),
    #[error("kernel.epsilon must lie in (0, 1], got {0}")]
    BadEpsilon(f64),
    #[error(
        "rescaled kernel support {support} spans fewer than 4 cells (dx {dx}); refine the grid"
    )]
    UnresolvableKernel { support: f64, dx: f64 },
}

/// Grid-sampled kernel with precomputed spectral data.
#[derive(Debug, Clone)]
pub struct DiscreteKernel {
    pub kind: KernelKind,
    /// Samples of phi at each grid point (by minimal-image distance to 0);
    /// empty for white noise.
    pub phi_grid: Vec<f64>,
    /// `R(0) = sum phi^2 dx^d`, or `1/dx` for white noise.
    pub r0: f64,
    /// Circular-convolution multipliers `dx^d * DFT(phi)` on the
    /// half-spectrum; empty for white noise (identity).
    pub spectral: Vec<f64>,
}

impl DiscreteKernel {
    pub fn is_white(&self) -> bool {
        self.kind == KernelKind::White
    }

    /// Spectrum of the induced covariance `R`, i.e. `DFT(R_disc)` at bin
    /// `idx`. For white noise this is the flat `1/dx`.
    pub fn covariance_multiplier(&self, idx: usize, domain: &DomainSpec) -> f64 {
        if self.is_white() {
            1.0 / domain.dx()
        } else {
            self.spectral[idx] * self.spectral[idx] / domain.cell_volume()
        }
    }

    /// The induced covariance's grid samples `R(x_j - 0)`, via one inverse
    /// transform. Mostly useful in tests and reports.
    pub fn covariance_grid(&self, domain: &DomainSpec, grid: &SpectralGrid) -> Vec<f64> {
        let mut scr = grid.make_scratch();
        let mut out = vec![0.0; domain.cells()];
        if self.is_white() {
            out[0] = 1.0 / domain.cell_volume();
            return out;
        }
        let spec: Vec<Complex64> = (0..grid.spec_len())
            .map(|i| Complex64::new(self.covariance_multiplier(i, domain), 0.0))
            .collect();
        grid.inverse(&spec, &mut out, &mut scr);
        // inverse() divides by n^d; DFT(R) entries already carry the sum
        // convention, so undo nothing: IDFT(DFT(R)) = R.
        out
    }
}

fn shape_profile(shape: KernelShape, u: f64) -> f64 {
    if u >= 1.0 {
        return 0.0;
    }
    match shape {
        KernelShape::Bump => (-1.0 / (1.0 - u * u)).exp(),
        KernelShape::Triangle => 1.0 - u,
    }
}

fn sample_phi(
    shape: KernelShape,
    half_width: f64,
    scale: f64,
    domain: &DomainSpec,
) -> Vec<f64> {
    let cells = domain.cells();
    let mut phi = vec![0.0; cells];
    let mut mass = 0.0;
    for j in 0..cells {
        let r = domain.torus_distance_to_origin(j);
        let v = shape_profile(shape, r / (half_width * scale));
        phi[j] = v;
        mass += v;
    }
    // exact unit grid mass: sum phi dx^d = 1
    let norm = 1.0 / (mass * domain.cell_volume());
    phi.iter_mut().for_each(|v| *v *= norm);
    phi
}

fn spectral_multipliers(phi: &[f64], domain: &DomainSpec, grid: &SpectralGrid) -> Vec<f64> {
    let mut scr = grid.make_scratch();
    let mut spec = vec![Complex64::default(); grid.spec_len()];
    grid.forward(phi, &mut spec, &mut scr);
    let dv = domain.cell_volume();
    // phi is even under minimal-image sampling, so its transform is real.
    spec.iter()
        .map(|c| {
            debug_assert!(c.im.abs() < 1e-9 * (1.0 + c.re.abs()));
            c.re * dv
        })
        .collect()
}

/// Sample phi on the grid and precompute its convolution multipliers.
pub fn build_kernel(
    spec: &KernelSpec,
    domain: &DomainSpec,
    grid: &SpectralGrid,
) -> Result<DiscreteKernel, KernelError> {
    match spec.kind {
        KernelKind::White => {
            if domain.dimension != 1 {
                return Err(KernelError::UnsupportedWhiteNoise(domain.dimension));
            }
            Ok(DiscreteKernel {
                kind: KernelKind::White,
                phi_grid: Vec::new(),
                r0: 1.0 / domain.dx(),
                spectral: Vec::new(),
            })
        }
        KernelKind::Mollifier => {
            if !(spec.half_width > 0.0) {
                return Err(KernelError::BadHalfWidth(spec.half_width));
            }
            let limit = domain.side_length / 2.0;
            if spec.half_width >= limit {
                return Err(KernelError::KernelTooWide {
                    support: spec.half_width,
                    limit,
                });
            }
            let phi = sample_phi(spec.shape, spec.half_width, 1.0, domain);
            let spectral = spectral_multipliers(&phi, domain, grid);
            let r0 = phi.iter().map(|v| v * v).sum::<f64>() * domain.cell_volume();
            let kernel = DiscreteKernel {
                kind: KernelKind::Mollifier,
                phi_grid: phi,
                r0,
                spectral,
            };
            match spec.epsilon {
                Some(eps) if eps != 1.0 => rescale_kernel(&kernel, spec, eps, domain, grid),
                _ => Ok(kernel),
            }
        }
    }
}

/// Resample the kernel so the induced covariance becomes
/// `eps^-d R(y/eps)`: `phi^eps(y) = eps^-d phi(y/eps)`, renormalized to exact
/// unit grid mass.
pub fn rescale_kernel(
    kernel: &DiscreteKernel,
    spec: &KernelSpec,
    eps: f64,
    domain: &DomainSpec,
    grid: &SpectralGrid,
) -> Result<DiscreteKernel, KernelError> {
    if kernel.is_white() {
        return Err(KernelError::UnsupportedWhiteNoise(domain.dimension));
    }
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(KernelError::BadEpsilon(eps));
    }
    let support = eps * spec.half_width;
    if support < 4.0 * domain.dx() {
        return Err(KernelError::UnresolvableKernel {
            support,
            dx: domain.dx(),
        });
    }
    let phi = sample_phi(spec.shape, spec.half_width, eps, domain);
    let spectral = spectral_multipliers(&phi, domain, grid);
    let r0 = phi.iter().map(|v| v * v).sum::<f64>() * domain.cell_volume();
    Ok(DiscreteKernel {
        kind: KernelKind::Mollifier,
        phi_grid: phi,
        r0,
        spectral,
    })
}
