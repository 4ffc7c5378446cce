//! Ito time-steppers for the multiplicative and additive-multiplicative
//! equations on the periodic grid.
//!
//! One step of the multiplicative equation is the exponential-Euler update
//! `u <- heat(u (1 + beta dU))`: the noise multiplies the pre-step value
//! (non-anticipating), then the heat semigroup is applied exactly through
//! spectral multipliers. This preserves `E[sum u dx^d]` exactly, which the
//! whole martingale analysis rests on. The additive-multiplicative update is
//! `v <- heat(v (1 + beta dU) + alpha dV)` with no positivity clipping.
//!
//! The adjoint run realizes the martingale pair from one forward simulation:
//! starting from the measure's atoms it iterates multiplicative steps with
//! fresh noise, records the mass `M = sum u dx^d`, and accumulates
//! `dN = alpha sum(u dV) dx^d` against an independent noise stream. Both the
//! additive accumulator and the quadratic-variation rate are evaluated in
//! spectral space from the transform the heat step already produces, so they
//! cost no extra transforms.

use crate::fft::{FftScratch, SpectralGrid};
use crate::grid::DomainSpec;
use crate::kernel::DiscreteKernel;
use crate::martingale::MartingalePath;
use crate::noise::{sample_spectral_slice, NoiseSlice};
use rand::Rng;
use rand_distr::StandardNormal;
use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    MsheU,
    AmsheV,
    AdjointU,
    PropagatorZ,
}

impl Role {
    pub fn is_nonnegative(self) -> bool {
        matches!(self, Role::MsheU | Role::AdjointU | Role::PropagatorZ)
    }
}

/// Real-valued field on the grid at one time instant.
#[derive(Debug, Clone)]
pub struct FieldState {
    pub values: Vec<f64>,
    pub t: f64,
    pub role: Role,
}

impl FieldState {
    pub fn constant(c: f64, t: f64, role: Role, domain: &DomainSpec) -> Self {
        FieldState {
            values: vec![c; domain.cells()],
            t,
            role,
        }
    }

    pub fn mass(&self, domain: &DomainSpec) -> f64 {
        self.values.iter().sum::<f64>() * domain.cell_volume()
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SchemeParams {
    pub dt: f64,
    pub alpha: f64,
    pub beta: f64,
}

#[derive(Debug, Error)]
pub enum SchemeError {
    #[error("scheme.dt must be > 0 and finite, got {0}")]
    BadDt(f64),
    #[error("scheme.alpha must be >= 0, got {0}")]
    BadAlpha(f64),
    #[error("scheme.beta must be >= 0, got {0}")]
    BadBeta(f64),
    #[error("white noise in d=1 requires dt <= dx^2/2 (dt {dt}, dx {dx})")]
    DtTooCoarseForWhite { dt: f64, dx: f64 },
    #[error("time span {t} is not a multiple of dt {dt}")]
    NotMultipleOfDt { t: f64, dt: f64 },
}

impl SchemeParams {
    pub fn new(dt: f64, alpha: f64, beta: f64) -> Result<Self, SchemeError> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(SchemeError::BadDt(dt));
        }
        if !(alpha >= 0.0) {
            return Err(SchemeError::BadAlpha(alpha));
        }
        if !(beta >= 0.0) {
            return Err(SchemeError::BadBeta(beta));
        }
        Ok(SchemeParams { dt, alpha, beta })
    }

    pub fn validate_for(&self, kernel: &DiscreteKernel, domain: &DomainSpec) -> Result<(), SchemeError> {
        let dx = domain.dx();
        if kernel.is_white() && self.dt > dx * dx / 2.0 + 1e-15 {
            return Err(SchemeError::DtTooCoarseForWhite { dt: self.dt, dx });
        }
        Ok(())
    }

    /// Number of steps spanning `t`, which must be an integer multiple of dt
    /// up to roundoff.
    pub fn steps_for(&self, t: f64) -> Result<usize, SchemeError> {
        if t == 0.0 {
            return Ok(0);
        }
        let n = (t / self.dt).round();
        if n < 0.0 || (n * self.dt - t).abs() > 1e-6 * self.dt {
            return Err(SchemeError::NotMultipleOfDt { t, dt: self.dt });
        }
        Ok(n as usize)
    }
}

#[derive(Debug, Error)]
pub enum MeasureError {
    #[error("measure atom {index} has negative weight {gamma}; unsigned measures require gamma >= 0")]
    NegativeWeight { index: usize, gamma: f64 },
    #[error("measure has no atoms")]
    Empty,
    #[error("measure has zero total mass but a Cauchy normalization was requested")]
    DegenerateMeasure,
}

/// Finite atomic measure; atoms snap to the nearest grid cell when
/// deposited. The signed variant exists only for the exploratory mixed-sign
/// experiment and is flagged as such.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MeasureSpec {
    pub atoms: Vec<(f64, Vec<f64>)>,
    pub signed: bool,
}

impl MeasureSpec {
    pub fn unsigned(atoms: Vec<(f64, Vec<f64>)>) -> Result<Self, MeasureError> {
        if atoms.is_empty() {
            return Err(MeasureError::Empty);
        }
        for (i, (g, _)) in atoms.iter().enumerate() {
            if *g < 0.0 {
                return Err(MeasureError::NegativeWeight { index: i, gamma: *g });
            }
        }
        Ok(MeasureSpec { atoms, signed: false })
    }

    pub fn signed_exploratory(atoms: Vec<(f64, Vec<f64>)>) -> Result<Self, MeasureError> {
        if atoms.is_empty() {
            return Err(MeasureError::Empty);
        }
        Ok(MeasureSpec { atoms, signed: true })
    }

    pub fn delta(location: Vec<f64>) -> Self {
        MeasureSpec {
            atoms: vec![(1.0, location)],
            signed: false,
        }
    }

    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|(g, _)| g).sum()
    }

    /// Deposit atoms as `gamma_i / dx^d` at the snapped cells, so the grid
    /// mass `sum u dx^d` equals the measure's total mass exactly.
    pub fn deposit(&self, domain: &DomainSpec) -> Vec<f64> {
        let mut field = vec![0.0; domain.cells()];
        let dv = domain.cell_volume();
        for (gamma, loc) in &self.atoms {
            field[domain.snap(loc)] += gamma / dv;
        }
        field
    }
}

/// Clip accounting for the multiplicative steps.
#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
pub struct ClipStats {
    pub clipped: u64,
    pub cell_steps: u64,
}

impl ClipStats {
    pub fn fraction(&self) -> f64 {
        if self.cell_steps == 0 {
            0.0
        } else {
            self.clipped as f64 / self.cell_steps as f64
        }
    }

    pub fn merge(&mut self, other: ClipStats) {
        self.clipped += other.clipped;
        self.cell_steps += other.cell_steps;
    }
}

/// In-place step engine holding all per-path buffers. Immutable setup
/// (domain, kernel, transform plans) is shared by reference across workers.
pub struct Stepper<'a> {
    pub domain: &'a DomainSpec,
    pub kernel: &'a DiscreteKernel,
    pub grid: &'a SpectralGrid,
    pub params: SchemeParams,
    pub field: Vec<f64>,
    spec: Vec<Complex64>,
    spec_valid: bool,
    noise_spec: Vec<Complex64>,
    noise_phys: Vec<f64>,
    aux_spec: Vec<Complex64>,
    aux_phys: Vec<f64>,
    heat_mult: Vec<f64>,
    cov_mult: Vec<f64>,
    scr: FftScratch,
    pub clips: ClipStats,
}

impl<'a> Stepper<'a> {
    pub fn new(
        domain: &'a DomainSpec,
        kernel: &'a DiscreteKernel,
        grid: &'a SpectralGrid,
        params: SchemeParams,
    ) -> Self {
        let sl = grid.spec_len();
        let cells = domain.cells();
        let cov_mult = (0..sl)
            .map(|i| kernel.covariance_multiplier(i, domain))
            .collect();
        Stepper {
            domain,
            kernel,
            grid,
            params,
            field: vec![0.0; cells],
            spec: vec![Complex64::default(); sl],
            spec_valid: false,
            noise_spec: vec![Complex64::default(); sl],
            noise_phys: vec![0.0; cells],
            aux_spec: vec![Complex64::default(); sl],
            aux_phys: vec![0.0; cells],
            heat_mult: grid.heat_multiplier(domain.side_length, params.dt),
            cov_mult,
            scr: grid.make_scratch(),
            clips: ClipStats::default(),
        }
    }

    pub fn set_field(&mut self, values: &[f64]) {
        self.field.copy_from_slice(values);
        self.spec_valid = false;
    }

    pub fn mass(&self) -> f64 {
        self.field.iter().sum::<f64>() * self.domain.cell_volume()
    }

    fn ensure_spec(&mut self) {
        if !self.spec_valid {
            self.grid.forward(&self.field, &mut self.spec, &mut self.scr);
            self.spec_valid = true;
        }
    }

    /// Draw the multiplicative noise increment for this step into
    /// `noise_phys` (and `noise_spec` for smooth kernels).
    fn draw_u_noise<R: Rng>(&mut self, rng: &mut R) {
        if self.kernel.is_white() {
            let sd = (self.params.dt / self.domain.cell_volume()).sqrt();
            for v in self.noise_phys.iter_mut() {
                let z: f64 = rng.sample(StandardNormal);
                *v = z * sd;
            }
        } else {
            sample_spectral_slice(
                rng,
                self.grid,
                self.kernel,
                self.domain,
                self.params.dt,
                &mut self.noise_spec,
            );
            self.grid
                .inverse(&self.noise_spec, &mut self.noise_phys, &mut self.scr);
        }
    }

    fn multiply_noise_and_clip(&mut self) {
        let beta = self.params.beta;
        let mut clipped = 0u64;
        for (u, &du) in self.field.iter_mut().zip(&self.noise_phys) {
            let next = *u * (1.0 + beta * du);
            *u = if next < 0.0 {
                clipped += 1;
                0.0
            } else {
                next
            };
        }
        self.clips.clipped += clipped;
        self.clips.cell_steps += self.field.len() as u64;
    }

    fn apply_heat_from_physical(&mut self) {
        self.grid.forward(&self.field, &mut self.spec, &mut self.scr);
        for (s, &h) in self.spec.iter_mut().zip(&self.heat_mult) {
            *s *= h;
        }
        self.grid.inverse(&self.spec, &mut self.field, &mut self.scr);
        self.spec_valid = true;
    }

    /// One multiplicative step with fresh noise: `u <- heat(u (1 + beta dU))`.
    pub fn mshe_step<R: Rng>(&mut self, rng: &mut R) {
        self.draw_u_noise(rng);
        self.multiply_noise_and_clip();
        self.apply_heat_from_physical();
    }

    /// One multiplicative step against a supplied noise slice.
    pub fn mshe_step_with(&mut self, du: &NoiseSlice) {
        self.noise_phys.copy_from_slice(&du.field);
        self.multiply_noise_and_clip();
        self.apply_heat_from_physical();
    }

    /// One additive-multiplicative step with fresh independent noises:
    /// `v <- heat(v (1 + beta dU) + alpha dV)`. The additive slice never
    /// leaves spectral space.
    pub fn amshe_step<R: Rng>(&mut self, rng_u: &mut R, rng_v: &mut R) {
        self.draw_u_noise(rng_u);
        let beta = self.params.beta;
        for (v, &du) in self.field.iter_mut().zip(&self.noise_phys) {
            *v *= 1.0 + beta * du;
        }
        self.grid.forward(&self.field, &mut self.spec, &mut self.scr);
        let alpha = self.params.alpha;
        if alpha != 0.0 {
            if self.kernel.is_white() {
                let sd = (self.params.dt / self.domain.cell_volume()).sqrt();
                for v in self.aux_phys.iter_mut() {
                    let z: f64 = rng_v.sample(StandardNormal);
                    *v = z * sd;
                }
                self.grid.forward(&self.aux_phys, &mut self.aux_spec, &mut self.scr);
            } else {
                sample_spectral_slice(
                    rng_v,
                    self.grid,
                    self.kernel,
                    self.domain,
                    self.params.dt,
                    &mut self.aux_spec,
                );
            }
            for (s, a) in self.spec.iter_mut().zip(&self.aux_spec) {
                *s += alpha * a;
            }
        }
        for (s, &h) in self.spec.iter_mut().zip(&self.heat_mult) {
            *s *= h;
        }
        self.grid.inverse(&self.spec, &mut self.field, &mut self.scr);
        self.spec_valid = true;
    }

    /// One additive-multiplicative step against supplied noise slices.
    pub fn amshe_step_with(&mut self, du: &NoiseSlice, dv: &NoiseSlice) {
        let beta = self.params.beta;
        let alpha = self.params.alpha;
        for ((v, &ddu), &ddv) in self.field.iter_mut().zip(&du.field).zip(&dv.field) {
            *v = *v * (1.0 + beta * ddu) + alpha * ddv;
        }
        self.apply_heat_from_physical();
    }

    /// Quadratic-variation rate of the mass martingale over one step:
    /// `beta^2 (iint u(y1) u(y2) R(y1 - y2) dy1 dy2) dt`, evaluated by
    /// Parseval from the current field transform.
    pub fn qv_formula_increment(&mut self) -> f64 {
        self.ensure_spec();
        let dv = self.domain.cell_volume();
        let cells = self.grid.cells() as f64;
        let mut acc = 0.0;
        for i in 0..self.spec.len() {
            acc += self.grid.parseval_weight(i) * self.cov_mult[i] * self.spec[i].norm_sqr();
        }
        self.params.beta * self.params.beta * dv * dv * acc / cells * self.params.dt
    }

    /// Additive-martingale increment `alpha sum(u dV) dx^d` against a fresh
    /// slice from the independent stream, evaluated spectrally.
    pub fn n_increment<R: Rng>(&mut self, rng_v: &mut R) -> f64 {
        if self.params.alpha == 0.0 {
            return 0.0;
        }
        self.ensure_spec();
        if self.kernel.is_white() {
            let sd = (self.params.dt / self.domain.cell_volume()).sqrt();
            let mut acc = 0.0;
            for &u in self.field.iter() {
                let z: f64 = rng_v.sample(StandardNormal);
                acc += u * z;
            }
            return self.params.alpha * acc * sd * self.domain.cell_volume();
        }
        sample_spectral_slice(
            rng_v,
            self.grid,
            self.kernel,
            self.domain,
            self.params.dt,
            &mut self.aux_spec,
        );
        let dv = self.domain.cell_volume();
        let cells = self.grid.cells() as f64;
        let mut acc = 0.0;
        for i in 0..self.spec.len() {
            acc += self.grid.parseval_weight(i) * (self.spec[i] * self.aux_spec[i].conj()).re;
        }
        self.params.alpha * dv * acc / cells
    }
}

/// Pure heat semigroup application `exp(dt Delta / 2)`.
pub fn heat_step(
    state: &FieldState,
    dt: f64,
    domain: &DomainSpec,
    grid: &SpectralGrid,
) -> FieldState {
    assert!(dt > 0.0, "dt must be > 0");
    let mut scr = grid.make_scratch();
    let mut spec = vec![Complex64::default(); grid.spec_len()];
    grid.forward(&state.values, &mut spec, &mut scr);
    let mult = grid.heat_multiplier(domain.side_length, dt);
    for (s, &h) in spec.iter_mut().zip(&mult) {
        *s *= h;
    }
    let mut values = vec![0.0; domain.cells()];
    grid.inverse(&spec, &mut values, &mut scr);
    FieldState {
        values,
        t: state.t + dt,
        role: state.role,
    }
}

/// Pure multiplicative step against a supplied slice. Returns the stepped
/// field and the number of clipped cells.
pub fn mshe_step(
    state: &FieldState,
    du: &NoiseSlice,
    params: &SchemeParams,
    domain: &DomainSpec,
    grid: &SpectralGrid,
    kernel: &DiscreteKernel,
) -> (FieldState, u64) {
    assert!(state.role.is_nonnegative(), "mshe_step requires a nonnegative role");
    let mut stepper = Stepper::new(domain, kernel, grid, *params);
    stepper.set_field(&state.values);
    stepper.mshe_step_with(du);
    let clips = stepper.clips.clipped;
    (
        FieldState {
            values: stepper.field,
            t: state.t + params.dt,
            role: state.role,
        },
        clips,
    )
}

/// Pure additive-multiplicative step against supplied slices.
pub fn amshe_step(
    state: &FieldState,
    du: &NoiseSlice,
    dv: &NoiseSlice,
    params: &SchemeParams,
    domain: &DomainSpec,
    grid: &SpectralGrid,
    kernel: &DiscreteKernel,
) -> FieldState {
    assert_eq!(state.role, Role::AmsheV, "amshe_step requires the amshe_v role");
    let mut stepper = Stepper::new(domain, kernel, grid, *params);
    stepper.set_field(&state.values);
    stepper.amshe_step_with(du, dv);
    FieldState {
        values: stepper.field,
        t: state.t + params.dt,
        role: state.role,
    }
}

/// Simulate the additive-multiplicative equation from zero initial data over
/// a span `t_total` (the zero-start solution, evaluated at its terminal
/// time). Returns the terminal field.
pub fn run_zero_start<R: Rng>(
    params: &SchemeParams,
    domain: &DomainSpec,
    kernel: &DiscreteKernel,
    grid: &SpectralGrid,
    t_total: f64,
    rng_u: &mut R,
    rng_v: &mut R,
) -> Result<FieldState, SchemeError> {
    params.validate_for(kernel, domain)?;
    let n_steps = params.steps_for(t_total)?;
    let mut stepper = Stepper::new(domain, kernel, grid, *params);
    for _ in 0..n_steps {
        stepper.amshe_step(rng_u, rng_v);
    }
    Ok(FieldState {
        values: stepper.field,
        t: 0.0,
        role: Role::AmsheV,
    })
}

#[derive(Debug, Clone, Copy)]
pub struct AdjointOptions {
    pub record_every: usize,
    pub record_formula_qv: bool,
}

impl Default for AdjointOptions {
    fn default() -> Self {
        AdjointOptions {
            record_every: 1,
            record_formula_qv: true,
        }
    }
}

/// One adjoint run realizing the martingale pair `(M_tau, N_tau)` up to
/// `t_max`. Quadratic variations are accumulated from full-resolution
/// increments; the integral-formula variation is accumulated alongside when
/// requested. Samples land on the recording grid every `record_every` steps.
pub fn adjoint_martingale_run<R: Rng>(
    mu: &MeasureSpec,
    params: &SchemeParams,
    domain: &DomainSpec,
    kernel: &DiscreteKernel,
    grid: &SpectralGrid,
    t_max: f64,
    opts: AdjointOptions,
    rng_u: &mut R,
    rng_v: &mut R,
) -> Result<MartingalePath, SchemeError> {
    params.validate_for(kernel, domain)?;
    let n_steps = params.steps_for(t_max)?;
    let record_every = opts.record_every.max(1);
    let mut stepper = Stepper::new(domain, kernel, grid, *params);
    stepper.set_field(&mu.deposit(domain));

    let n_records = n_steps / record_every + 1;
    let mut path = MartingalePath {
        tau_grid: Vec::with_capacity(n_records),
        m: Vec::with_capacity(n_records),
        n: Vec::with_capacity(n_records),
        qv_m_inc: Vec::with_capacity(n_records),
        qv_n_inc: Vec::with_capacity(n_records),
        cross_inc: Vec::with_capacity(n_records),
        qv_m_formula: if opts.record_formula_qv {
            Some(Vec::with_capacity(n_records))
        } else {
            None
        },
        mu_mass: mu.total_mass(),
        alpha: params.alpha,
        beta: params.beta,
        clip_fraction: 0.0,
    };

    let mut m_curr = stepper.mass();
    let mut n_curr = 0.0;
    let mut qv_m = 0.0;
    let mut qv_n = 0.0;
    let mut cross = 0.0;
    let mut qv_f = 0.0;
    let mut record = |path: &mut MartingalePath, tau: f64, m, n, qm, qn, cx, qf| {
        path.tau_grid.push(tau);
        path.m.push(m);
        path.n.push(n);
        path.qv_m_inc.push(qm);
        path.qv_n_inc.push(qn);
        path.cross_inc.push(cx);
        if let Some(f) = path.qv_m_formula.as_mut() {
            f.push(qf);
        }
    };
    record(&mut path, 0.0, m_curr, n_curr, 0.0, 0.0, 0.0, 0.0);

    for step in 0..n_steps {
        if opts.record_formula_qv {
            qv_f += stepper.qv_formula_increment();
        }
        let dn = stepper.n_increment(rng_v);
        stepper.mshe_step(rng_u);
        let m_next = stepper.mass();
        let dm = m_next - m_curr;
        qv_m += dm * dm;
        qv_n += dn * dn;
        cross += dm * dn;
        m_curr = m_next;
        n_curr += dn;
        if (step + 1) % record_every == 0 {
            let tau = (step + 1) as f64 * params.dt;
            record(&mut path, tau, m_curr, n_curr, qv_m, qv_n, cross, qv_f);
        }
    }
    path.clip_fraction = stepper.clips.fraction();
    Ok(path)
}
