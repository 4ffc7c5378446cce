//! Quadratic-variation analysis of recorded martingale pairs and the
//! time-change to Brownian coordinates.

use crate::fft::SpectralGrid;
use crate::grid::DomainSpec;
use crate::kernel::DiscreteKernel;
use crate::solver::SchemeParams;
use rustfft::num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

/// Discretized trajectory of the pair `(M_tau, N_tau)` with running
/// quadratic-variation series. `qv_*_inc` are accumulated from
/// full-resolution increments during the run; `qv_m_formula` is the
/// integral-formula variation accumulated alongside when enabled.
#[derive(Debug, Clone, Serialize)]
pub struct MartingalePath {
    pub tau_grid: Vec<f64>,
    pub m: Vec<f64>,
    pub n: Vec<f64>,
    pub qv_m_inc: Vec<f64>,
    pub qv_n_inc: Vec<f64>,
    pub cross_inc: Vec<f64>,
    pub qv_m_formula: Option<Vec<f64>>,
    pub mu_mass: f64,
    pub alpha: f64,
    pub beta: f64,
    pub clip_fraction: f64,
}

#[derive(Debug, Error)]
pub enum MartingaleError {
    #[error("path has fewer than 2 samples")]
    TooShort,
    #[error("alpha = 0: the additive coordinate is undefined")]
    DegenerateAlpha,
}

impl MartingalePath {
    pub fn len(&self) -> usize {
        self.tau_grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tau_grid.is_empty()
    }

    pub fn m_end(&self) -> f64 {
        *self.m.last().expect("nonempty path")
    }

    pub fn n_end(&self) -> f64 {
        *self.n.last().expect("nonempty path")
    }

    /// The series used as the Dubins-Schwarz clock: the integral-formula
    /// variation when recorded, otherwise the increment sums.
    pub fn clock(&self) -> &[f64] {
        self.qv_m_formula.as_deref().unwrap_or(&self.qv_m_inc)
    }
}

/// Running sums of increment products over the recorded samples:
/// `(sum (dM)^2, sum (dN)^2, sum dM dN)`.
pub fn qv_increments(path: &MartingalePath) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>), MartingaleError> {
    if path.len() < 2 {
        return Err(MartingaleError::TooShort);
    }
    let k = path.len();
    let mut qv_m = Vec::with_capacity(k);
    let mut qv_n = Vec::with_capacity(k);
    let mut cross = Vec::with_capacity(k);
    qv_m.push(0.0);
    qv_n.push(0.0);
    cross.push(0.0);
    for i in 1..k {
        let dm = path.m[i] - path.m[i - 1];
        let dn = path.n[i] - path.n[i - 1];
        qv_m.push(qv_m[i - 1] + dm * dm);
        qv_n.push(qv_n[i - 1] + dn * dn);
        cross.push(cross[i - 1] + dm * dn);
    }
    Ok((qv_m, qv_n, cross))
}

/// Instantaneous variation rate `iint u(y1) u(y2) R(y1 - y2) dy1 dy2` of a
/// field, via one transform and a Parseval sum.
pub fn covariance_quadratic_form(
    field: &[f64],
    kernel: &DiscreteKernel,
    domain: &DomainSpec,
    grid: &SpectralGrid,
) -> f64 {
    let mut scr = grid.make_scratch();
    let mut spec = vec![Complex64::default(); grid.spec_len()];
    grid.forward(field, &mut spec, &mut scr);
    let dv = domain.cell_volume();
    let cells = grid.cells() as f64;
    let mut acc = 0.0;
    for i in 0..spec.len() {
        acc += grid.parseval_weight(i)
            * kernel.covariance_multiplier(i, domain)
            * spec[i].norm_sqr();
    }
    dv * dv * acc / cells
}

/// Integral-formula quadratic variation of the mass martingale from stored
/// field snapshots (one per step): `beta^2 sum_tau (iint u R u) dt` as a
/// running series. The in-run accumulator computes the same sums; this
/// standalone route exists for cross-checks.
pub fn qv_formula(
    u_snapshots: &[Vec<f64>],
    kernel: &DiscreteKernel,
    domain: &DomainSpec,
    grid: &SpectralGrid,
    params: &SchemeParams,
) -> Vec<f64> {
    let b2 = params.beta * params.beta;
    let mut acc = 0.0;
    let mut out = Vec::with_capacity(u_snapshots.len());
    for u in u_snapshots {
        acc += b2 * covariance_quadratic_form(u, kernel, domain, grid) * params.dt;
        out.push(acc);
    }
    out
}

/// Martingale pair reparameterized by its quadratic-variation clock.
#[derive(Debug, Clone, Serialize)]
pub struct TimeChangedPath {
    pub q_grid: Vec<f64>,
    pub w: Vec<f64>,
    /// `(beta/alpha) N`; absent when alpha = 0.
    pub x: Option<Vec<f64>>,
}

impl TimeChangedPath {
    /// Linear interpolation of `(W, X)` at clock value `q`; `None` when the
    /// path's clock never reaches `q`.
    pub fn sample_at(&self, q: f64) -> Option<(f64, f64)> {
        let qs = &self.q_grid;
        let last = *qs.last()?;
        if q > last {
            return None;
        }
        if q <= qs[0] {
            return Some((self.w[0], self.x.as_ref().map_or(0.0, |x| x[0])));
        }
        let i = qs.partition_point(|&v| v < q);
        let (q0, q1) = (qs[i - 1], qs[i]);
        let t = if q1 > q0 { (q - q0) / (q1 - q0) } else { 0.0 };
        let lerp = |s: &[f64]| s[i - 1] + t * (s[i] - s[i - 1]);
        Some((lerp(&self.w), self.x.as_ref().map_or(0.0, |x| lerp(x))))
    }
}

/// Reparameterize `(M, (beta/alpha) N)` by the variation clock.
pub fn time_change(path: &MartingalePath) -> Result<TimeChangedPath, MartingaleError> {
    if path.len() < 2 {
        return Err(MartingaleError::TooShort);
    }
    let q_grid = path.clock().to_vec();
    let w = path.m.clone();
    let x = if path.alpha == 0.0 {
        None
    } else {
        let scale = path.beta / path.alpha;
        Some(path.n.iter().map(|v| v * scale).collect())
    };
    Ok(TimeChangedPath { q_grid, w, x })
}

/// Terminal values plus the strong-disorder convergence proxy
/// (`M_end < threshold`).
pub fn terminal_extract(path: &MartingalePath, threshold: f64) -> (f64, f64, bool) {
    let m_end = path.m_end();
    let n_end = path.n_end();
    (m_end, n_end, m_end < threshold)
}

/// Variance and cross-correlation of time-changed increments over a clock
/// bin, across the paths whose clock reaches the bin's right edge.
#[derive(Debug, Clone, Serialize)]
pub struct BinStat {
    pub q_lo: f64,
    pub q_hi: f64,
    pub n_paths: usize,
    pub var_w: f64,
    pub corr_wx: f64,
}

pub fn brownianity_bins(paths: &[TimeChangedPath], edges: &[f64]) -> Vec<BinStat> {
    let mut out = Vec::new();
    for win in edges.windows(2) {
        let (lo, hi) = (win[0], win[1]);
        let mut dws = Vec::new();
        let mut dxs = Vec::new();
        for p in paths {
            if let (Some((w0, x0)), Some((w1, x1))) = (p.sample_at(lo), p.sample_at(hi)) {
                dws.push(w1 - w0);
                dxs.push(x1 - x0);
            }
        }
        let n = dws.len();
        if n < 2 {
            out.push(BinStat { q_lo: lo, q_hi: hi, n_paths: n, var_w: f64::NAN, corr_wx: f64::NAN });
            continue;
        }
        let nf = n as f64;
        let mw = dws.iter().sum::<f64>() / nf;
        let mx = dxs.iter().sum::<f64>() / nf;
        let var_w = dws.iter().map(|v| (v - mw) * (v - mw)).sum::<f64>() / (nf - 1.0);
        let var_x = dxs.iter().map(|v| (v - mx) * (v - mx)).sum::<f64>() / (nf - 1.0);
        let cov = dws
            .iter()
            .zip(&dxs)
            .map(|(a, b)| (a - mw) * (b - mx))
            .sum::<f64>()
            / (nf - 1.0);
        let corr = if var_w > 0.0 && var_x > 0.0 {
            cov / (var_w * var_x).sqrt()
        } else {
            0.0
        };
        out.push(BinStat { q_lo: lo, q_hi: hi, n_paths: n, var_w, corr_wx: corr });
    }
    out
}
