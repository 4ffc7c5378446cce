//! Real-to-complex spectral transforms on periodic grids in d = 1, 2, 3.
//!
//! Fields are flat `Vec<f64>` of length `n^d` in row-major order. Spectra use
//! a half-spectrum layout with the last axis truncated to `n/2 + 1` bins:
//!
//! - d = 1: `[kc]`, length `hs`
//! - d = 2: `[kc][kr]`, length `hs * n` (transposed so the axis-0 pass is contiguous)
//! - d = 3: `[k0][k1][kc]`, length `n * n * hs`
//!
//! Forward transforms are unnormalized DFT sums; `inverse` divides by `n^d`,
//! so `inverse(forward(x)) == x` up to roundoff. Diagonal multipliers and
//! Parseval sums go through [`SpectralGrid::mode_of`] so callers never touch
//! the layout directly.

use realfft::{ComplexToReal, RealFftPlanner, RealToComplex};
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

/// Shared transform plans for one `(n, d)` grid. Immutable after
/// construction; workers share it behind a reference and keep their own
/// [`FftScratch`].
pub struct SpectralGrid {
    n: usize,
    d: usize,
    hs: usize,
    r2c: Arc<dyn RealToComplex<f64>>,
    c2r: Arc<dyn ComplexToReal<f64>>,
    cfwd: Arc<dyn Fft<f64>>,
    cinv: Arc<dyn Fft<f64>>,
}

/// Per-worker scratch buffers sized for one grid.
pub struct FftScratch {
    row_c: Vec<Complex64>,
    row_r: Vec<f64>,
    real_scratch: Vec<Complex64>,
    cplx_scratch: Vec<Complex64>,
    stage: Vec<Complex64>,
    pencil: Vec<Complex64>,
}

impl SpectralGrid {
    pub fn new(n: usize, d: usize) -> Self {
        assert!((1..=3).contains(&d), "dimension must be 1, 2 or 3");
        assert!(n >= 8 && n % 2 == 0, "points_per_axis must be even and >= 8");
        let mut rp = RealFftPlanner::<f64>::new();
        let mut cp = FftPlanner::<f64>::new();
        SpectralGrid {
            n,
            d,
            hs: n / 2 + 1,
            r2c: rp.plan_fft_forward(n),
            c2r: rp.plan_fft_inverse(n),
            cfwd: cp.plan_fft_forward(n),
            cinv: cp.plan_fft_inverse(n),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    /// Number of cells `n^d` of the real field.
    pub fn cells(&self) -> usize {
        self.n.pow(self.d as u32)
    }

    /// Length of the half-spectrum buffer.
    pub fn spec_len(&self) -> usize {
        match self.d {
            1 => self.hs,
            2 => self.hs * self.n,
            _ => self.n * self.n * self.hs,
        }
    }

    pub fn make_scratch(&self) -> FftScratch {
        FftScratch {
            row_c: vec![Complex64::default(); self.hs],
            row_r: vec![0.0; self.n],
            real_scratch: vec![
                Complex64::default();
                self.r2c
                    .get_scratch_len()
                    .max(self.c2r.get_scratch_len())
            ],
            cplx_scratch: vec![
                Complex64::default();
                self.cfwd
                    .get_inplace_scratch_len()
                    .max(self.cinv.get_inplace_scratch_len())
            ],
            stage: vec![Complex64::default(); self.spec_len()],
            pencil: vec![Complex64::default(); self.n],
        }
    }

    /// Integer mode coordinates `(m_0, .., m_{d-1})` of a spectral index.
    /// The last coordinate is the halved axis and lies in `0..hs`; the
    /// others run over `0..n`.
    pub fn mode_of(&self, idx: usize) -> [usize; 3] {
        match self.d {
            1 => [idx, 0, 0],
            2 => [idx % self.n, idx / self.n, 0], // layout [kc][kr]: idx = kc*n + kr
            _ => {
                let kc = idx % self.hs;
                let rest = idx / self.hs;
                [rest / self.n, rest % self.n, kc]
            }
        }
    }

    /// Spectral index of the Hermitian partner (all non-halved coordinates
    /// negated mod n). Indices on the interior of the halved axis have their
    /// partner outside the stored half-spectrum and return `None`.
    pub fn hermitian_partner(&self, idx: usize) -> Option<usize> {
        let neg = |m: usize| (self.n - m) % self.n;
        match self.d {
            1 => {
                let kc = idx;
                if kc == 0 || kc == self.n / 2 {
                    Some(idx)
                } else {
                    None
                }
            }
            2 => {
                let kr = idx % self.n;
                let kc = idx / self.n;
                if kc == 0 || kc == self.n / 2 {
                    Some(kc * self.n + neg(kr))
                } else {
                    None
                }
            }
            _ => {
                let kc = idx % self.hs;
                let rest = idx / self.hs;
                let k1 = rest % self.n;
                let k0 = rest / self.n;
                if kc == 0 || kc == self.n / 2 {
                    Some((neg(k0) * self.n + neg(k1)) * self.hs + kc)
                } else {
                    None
                }
            }
        }
    }

    /// Parseval weight of a stored bin: 2 for bins whose partner is not
    /// stored, 1 for the self-representing planes of the halved axis.
    pub fn parseval_weight(&self, idx: usize) -> f64 {
        let kc = match self.d {
            1 => idx,
            2 => idx / self.n,
            _ => idx % self.hs,
        };
        if kc == 0 || kc == self.n / 2 {
            1.0
        } else {
            2.0
        }
    }

    /// Squared continuous wavenumber `|k|^2` with `k_i = 2*pi*m_i/l`
    /// (modes folded to the symmetric range).
    pub fn wavenumber_sq(&self, idx: usize, l: f64) -> f64 {
        let m = self.mode_of(idx);
        let fold = |mi: usize| {
            let mi = mi as isize;
            let half = (self.n / 2) as isize;
            let f = if mi > half { mi - self.n as isize } else { mi };
            f as f64
        };
        let base = 2.0 * std::f64::consts::PI / l;
        (0..self.d)
            .map(|ax| {
                let k = base * fold(m[ax]);
                k * k
            })
            .sum()
    }

    /// Heat-semigroup multipliers `exp(-|k|^2 dt / 2)`.
    pub fn heat_multiplier(&self, l: f64, dt: f64) -> Vec<f64> {
        (0..self.spec_len())
            .map(|i| (-self.wavenumber_sq(i, l) * dt / 2.0).exp())
            .collect()
    }

    pub fn forward(&self, real: &[f64], spec: &mut [Complex64], scr: &mut FftScratch) {
        debug_assert_eq!(real.len(), self.cells());
        debug_assert_eq!(spec.len(), self.spec_len());
        let n = self.n;
        let hs = self.hs;
        match self.d {
            1 => {
                // realfft mutates its input; stage a copy
                scr.row_r.copy_from_slice(real);
                self.r2c
                    .process_with_scratch(&mut scr.row_r, spec, &mut scr.real_scratch)
                    .expect("r2c");
            }
            2 => {
                // rows r2c into stage laid out [r][kc]
                for r in 0..n {
                    scr.row_r.copy_from_slice(&real[r * n..(r + 1) * n]);
                    self.r2c
                        .process_with_scratch(&mut scr.row_r, &mut scr.row_c, &mut scr.real_scratch)
                        .expect("r2c");
                    scr.stage[r * hs..(r + 1) * hs].copy_from_slice(&scr.row_c);
                }
                // transpose [r][kc] -> [kc][r] and transform along r
                for r in 0..n {
                    for kc in 0..hs {
                        spec[kc * n + r] = scr.stage[r * hs + kc];
                    }
                }
                for kc in 0..hs {
                    self.cfwd.process_with_scratch(
                        &mut spec[kc * n..(kc + 1) * n],
                        &mut scr.cplx_scratch,
                    );
                }
            }
            _ => {
                // last axis r2c
                for p in 0..n * n {
                    scr.row_r.copy_from_slice(&real[p * n..(p + 1) * n]);
                    self.r2c
                        .process_with_scratch(&mut scr.row_r, &mut scr.row_c, &mut scr.real_scratch)
                        .expect("r2c");
                    spec[p * hs..(p + 1) * hs].copy_from_slice(&scr.row_c);
                }
                // middle axis: pencils at stride hs
                for k0 in 0..n {
                    for kc in 0..hs {
                        let base = k0 * n * hs + kc;
                        for k1 in 0..n {
                            scr.pencil[k1] = spec[base + k1 * hs];
                        }
                        self.cfwd
                            .process_with_scratch(&mut scr.pencil, &mut scr.cplx_scratch);
                        for k1 in 0..n {
                            spec[base + k1 * hs] = scr.pencil[k1];
                        }
                    }
                }
                // first axis: pencils at stride n*hs
                for rest in 0..n * hs {
                    for k0 in 0..n {
                        scr.pencil[k0] = spec[rest + k0 * n * hs];
                    }
                    self.cfwd
                        .process_with_scratch(&mut scr.pencil, &mut scr.cplx_scratch);
                    for k0 in 0..n {
                        spec[rest + k0 * n * hs] = scr.pencil[k0];
                    }
                }
            }
        }
    }

    /// Inverse transform including the `1/n^d` normalization. `spec` is left
    /// untouched (an internal copy is staged).
    pub fn inverse(&self, spec: &[Complex64], real: &mut [f64], scr: &mut FftScratch) {
        debug_assert_eq!(real.len(), self.cells());
        debug_assert_eq!(spec.len(), self.spec_len());
        let n = self.n;
        let hs = self.hs;
        let norm = 1.0 / self.cells() as f64;
        match self.d {
            1 => {
                scr.row_c.copy_from_slice(spec);
                scr.row_c[0].im = 0.0;
                scr.row_c[hs - 1].im = 0.0;
                self.c2r
                    .process_with_scratch(&mut scr.row_c, real, &mut scr.real_scratch)
                    .expect("c2r");
                real.iter_mut().for_each(|v| *v *= norm);
            }
            2 => {
                scr.stage.copy_from_slice(spec);
                for kc in 0..hs {
                    self.cinv.process_with_scratch(
                        &mut scr.stage[kc * n..(kc + 1) * n],
                        &mut scr.cplx_scratch,
                    );
                }
                // transpose [kc][r] -> rows [r][kc], c2r each row
                for r in 0..n {
                    for kc in 0..hs {
                        scr.row_c[kc] = scr.stage[kc * n + r];
                    }
                    scr.row_c[0].im = 0.0;
                    scr.row_c[hs - 1].im = 0.0;
                    self.c2r
                        .process_with_scratch(
                            &mut scr.row_c,
                            &mut real[r * n..(r + 1) * n],
                            &mut scr.real_scratch,
                        )
                        .expect("c2r");
                }
                real.iter_mut().for_each(|v| *v *= norm);
            }
            _ => {
                scr.stage.copy_from_slice(spec);
                for rest in 0..n * hs {
                    for k0 in 0..n {
                        scr.pencil[k0] = scr.stage[rest + k0 * n * hs];
                    }
                    self.cinv
                        .process_with_scratch(&mut scr.pencil, &mut scr.cplx_scratch);
                    for k0 in 0..n {
                        scr.stage[rest + k0 * n * hs] = scr.pencil[k0];
                    }
                }
                for k0 in 0..n {
                    for kc in 0..hs {
                        let base = k0 * n * hs + kc;
                        for k1 in 0..n {
                            scr.pencil[k1] = scr.stage[base + k1 * hs];
                        }
                        self.cinv
                            .process_with_scratch(&mut scr.pencil, &mut scr.cplx_scratch);
                        for k1 in 0..n {
                            scr.stage[base + k1 * hs] = scr.pencil[k1];
                        }
                    }
                }
                for p in 0..n * n {
                    scr.row_c.copy_from_slice(&scr.stage[p * hs..(p + 1) * hs]);
                    scr.row_c[0].im = 0.0;
                    scr.row_c[hs - 1].im = 0.0;
                    self.c2r
                        .process_with_scratch(
                            &mut scr.row_c,
                            &mut real[p * n..(p + 1) * n],
                            &mut scr.real_scratch,
                        )
                        .expect("c2r");
                }
                real.iter_mut().for_each(|v| *v *= norm);
            }
        }
    }
}
