//! The multiplicative propagator (Green's function runs against frozen
//! noise) and a Brownian-bridge oracle for cross-checking it.

use crate::fft::SpectralGrid;
use crate::grid::DomainSpec;
use crate::kernel::{DiscreteKernel, KernelKind, KernelShape, KernelSpec};
use crate::noise::{sample_noise_increment, NoiseSlice};
use crate::solver::{mshe_step, FieldState, Role, SchemeParams};
use rand::Rng;
use rand_distr::StandardNormal;
use std::io::{self, Read, Write};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PropagatorError {
    #[error("frozen noise covers [{t0}, {t1}] but [{s}, {t}] was requested")]
    NoiseCoverage { t0: f64, t1: f64, s: f64, t: f64 },
    #[error("the bridge oracle is undefined for white-in-space noise")]
    WhiteNoiseUnsupported,
    #[error("times must satisfy s < t (got s = {s}, t = {t})")]
    BadTimes { s: f64, t: f64 },
    #[error("io: {0}")]
    Io(#[from] io::Error),
    #[error("bad frozen-noise record: {0}")]
    BadRecord(String),
}

/// A stored noise realization: per-step slices covering
/// `[t0, t0 + n dt]`. Slices are physical-space increments.
#[derive(Debug, Clone)]
pub struct FrozenNoise {
    pub t0: f64,
    pub dt: f64,
    pub slices: Vec<Vec<f64>>,
}

const FROZEN_MAGIC: u32 = 0x414d_4e46; // "AMNF"
const FROZEN_VERSION: u32 = 1;

impl FrozenNoise {
    pub fn generate<R: Rng>(
        rng: &mut R,
        kernel: &DiscreteKernel,
        domain: &DomainSpec,
        grid: &SpectralGrid,
        t0: f64,
        n_steps: usize,
        dt: f64,
    ) -> Self {
        let mut scr = grid.make_scratch();
        let slices = (0..n_steps)
            .map(|_| sample_noise_increment(rng, kernel, domain, grid, dt, &mut scr).field)
            .collect();
        FrozenNoise { t0, dt, slices }
    }

    pub fn t_end(&self) -> f64 {
        self.t0 + self.slices.len() as f64 * self.dt
    }

    /// Step index covering time `t` (start of a step).
    fn step_index(&self, t: f64) -> usize {
        ((t - self.t0) / self.dt).round() as usize
    }

    pub fn slice(&self, i: usize) -> NoiseSlice {
        NoiseSlice {
            field: self.slices[i].clone(),
            dt: self.dt,
        }
    }

    fn check_coverage(&self, s: f64, t: f64) -> Result<(), PropagatorError> {
        if s >= t {
            return Err(PropagatorError::BadTimes { s, t });
        }
        let tol = 1e-9 * self.dt;
        if s < self.t0 - tol || t > self.t_end() + tol {
            return Err(PropagatorError::NoiseCoverage {
                t0: self.t0,
                t1: self.t_end(),
                s,
                t,
            });
        }
        Ok(())
    }

    /// Binary record: a small header (domain, kernel descriptor, dt, seed)
    /// followed by little-endian f64 slices.
    pub fn write_to<W: Write>(
        &self,
        w: &mut W,
        domain: &DomainSpec,
        kernel_spec: &KernelSpec,
        seed: u64,
    ) -> Result<(), PropagatorError> {
        let cells = self.slices.first().map_or(domain.cells(), Vec::len);
        w.write_all(&FROZEN_MAGIC.to_le_bytes())?;
        w.write_all(&FROZEN_VERSION.to_le_bytes())?;
        w.write_all(&(domain.dimension as u32).to_le_bytes())?;
        w.write_all(&(domain.points_per_axis as u32).to_le_bytes())?;
        w.write_all(&domain.side_length.to_le_bytes())?;
        let kind: u32 = match kernel_spec.kind {
            KernelKind::White => 0,
            KernelKind::Mollifier => 1,
        };
        let shape: u32 = match kernel_spec.shape {
            KernelShape::Bump => 0,
            KernelShape::Triangle => 1,
        };
        w.write_all(&kind.to_le_bytes())?;
        w.write_all(&shape.to_le_bytes())?;
        w.write_all(&kernel_spec.half_width.to_le_bytes())?;
        w.write_all(&self.t0.to_le_bytes())?;
        w.write_all(&self.dt.to_le_bytes())?;
        w.write_all(&seed.to_le_bytes())?;
        w.write_all(&(self.slices.len() as u64).to_le_bytes())?;
        w.write_all(&(cells as u64).to_le_bytes())?;
        for s in &self.slices {
            for v in s {
                w.write_all(&v.to_le_bytes())?;
            }
        }
        Ok(())
    }

    pub fn read_from<R: Read>(r: &mut R) -> Result<(Self, u64), PropagatorError> {
        let mut b4 = [0u8; 4];
        let mut b8 = [0u8; 8];
        let mut u32v = |r: &mut R, b: &mut [u8; 4]| -> Result<u32, PropagatorError> {
            r.read_exact(b)?;
            Ok(u32::from_le_bytes(*b))
        };
        let magic = u32v(r, &mut b4)?;
        if magic != FROZEN_MAGIC {
            return Err(PropagatorError::BadRecord(format!("bad magic {magic:#x}")));
        }
        let version = u32v(r, &mut b4)?;
        if version != FROZEN_VERSION {
            return Err(PropagatorError::BadRecord(format!(
                "unsupported record version {version}"
            )));
        }
        let _dim = u32v(r, &mut b4)?;
        let _n = u32v(r, &mut b4)?;
        r.read_exact(&mut b8)?; // side_length
        let _kind = u32v(r, &mut b4)?;
        let _shape = u32v(r, &mut b4)?;
        r.read_exact(&mut b8)?; // half_width
        r.read_exact(&mut b8)?;
        let t0 = f64::from_le_bytes(b8);
        r.read_exact(&mut b8)?;
        let dt = f64::from_le_bytes(b8);
        r.read_exact(&mut b8)?;
        let seed = u64::from_le_bytes(b8);
        r.read_exact(&mut b8)?;
        let n_slices = u64::from_le_bytes(b8) as usize;
        r.read_exact(&mut b8)?;
        let cells = u64::from_le_bytes(b8) as usize;
        let mut slices = Vec::with_capacity(n_slices);
        for _ in 0..n_slices {
            let mut s = Vec::with_capacity(cells);
            for _ in 0..cells {
                r.read_exact(&mut b8)?;
                s.push(f64::from_le_bytes(b8));
            }
            slices.push(s);
        }
        Ok((FrozenNoise { t0, dt, slices }, seed))
    }
}

/// Periodized continuum heat kernel `G_t(x)` with unit diffusivity
/// (variance `t` per axis), wrapped over image copies of the box.
pub fn periodized_heat_kernel(displacement: &[f64], t: f64, domain: &DomainSpec) -> f64 {
    let l = domain.side_length;
    let d = domain.dimension;
    let norm = (2.0 * std::f64::consts::PI * t).powf(-(d as f64) / 2.0);
    // per-axis wrap sums factorize
    let mut prod = 1.0;
    for ax in 0..d {
        let x = displacement[ax];
        let mut s = 0.0;
        for img in -6i32..=6 {
            let y = x + img as f64 * l;
            s += (-y * y / (2.0 * t)).exp();
        }
        prod *= s;
    }
    norm * prod
}

/// Run the propagator `Z_{s,t}(y, .)` from a discrete delta at the cell
/// nearest `y` against the supplied frozen noise.
pub fn propagator_run(
    s: f64,
    t: f64,
    y: &[f64],
    params: &SchemeParams,
    domain: &DomainSpec,
    kernel: &DiscreteKernel,
    grid: &SpectralGrid,
    frozen: &FrozenNoise,
) -> Result<FieldState, PropagatorError> {
    frozen.check_coverage(s, t)?;
    let mut values = vec![0.0; domain.cells()];
    values[domain.snap(y)] = 1.0 / domain.cell_volume();
    let mut state = FieldState {
        values,
        t: s,
        role: Role::PropagatorZ,
    };
    let i0 = frozen.step_index(s);
    let i1 = frozen.step_index(t);
    for i in i0..i1 {
        let du = frozen.slice(i);
        let (next, _clips) = mshe_step(&state, &du, params, domain, grid, kernel);
        state = next;
    }
    Ok(state)
}

/// Brownian-bridge estimate of `Z_{s,t}(y, x)`: the heat kernel times the
/// bridge average of `exp(beta * sum dU along the path - beta^2 R(0)(t-s)/2)`,
/// with the bridge reading the same frozen noise by nearest-cell lookup.
#[allow(clippy::too_many_arguments)]
pub fn feynman_kac_oracle<R: Rng>(
    s: f64,
    t: f64,
    y: &[f64],
    x: &[f64],
    params: &SchemeParams,
    domain: &DomainSpec,
    kernel: &DiscreteKernel,
    frozen: &FrozenNoise,
    n_bridges: usize,
    rng: &mut R,
) -> Result<f64, PropagatorError> {
    if kernel.is_white() {
        return Err(PropagatorError::WhiteNoiseUnsupported);
    }
    frozen.check_coverage(s, t)?;
    let d = domain.dimension;
    let dt = frozen.dt;
    let i0 = frozen.step_index(s);
    let i1 = frozen.step_index(t);
    let span = t - s;
    let compensator = 0.5 * params.beta * params.beta * kernel.r0 * span;
    let mut disp = vec![0.0; d];
    for ax in 0..d {
        // minimal-image displacement x - y
        let l = domain.side_length;
        let mut dxy = (x[ax] - y[ax]).rem_euclid(l);
        if dxy > l / 2.0 {
            dxy -= l;
        }
        disp[ax] = dxy;
    }
    let g = periodized_heat_kernel(&disp, span, domain);

    let mut pos = vec![0.0; d];
    let mut mean = 0.0;
    for _ in 0..n_bridges {
        pos.copy_from_slice(y);
        let mut integral = 0.0;
        for i in i0..i1 {
            let tau = s + (i - i0) as f64 * dt;
            integral += frozen.slices[i][domain.snap(&pos)];
            // bridge update toward x over the remaining time
            let remain = t - tau;
            let remain_next = (remain - dt).max(0.0);
            let sd = (dt * remain_next / remain).max(0.0).sqrt();
            for ax in 0..d {
                let l = domain.side_length;
                let mut target = (x[ax] - pos[ax]).rem_euclid(l);
                if target > l / 2.0 {
                    target -= l;
                }
                let z: f64 = rng.sample(StandardNormal);
                pos[ax] += target * dt / remain + sd * z;
            }
        }
        mean += (params.beta * integral - compensator).exp();
    }
    mean /= n_bridges as f64;
    Ok(g * mean)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::build_kernel;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn setup(n: usize) -> (DomainSpec, SpectralGrid) {
        (DomainSpec::unit_torus(1, n).unwrap(), SpectralGrid::new(n, 1))
    }

    #[test]
    fn beta_zero_matches_periodized_heat_kernel() {
        let (dom, grid) = setup(256);
        let k = build_kernel(&KernelSpec::mollifier(KernelShape::Bump, 0.05), &dom, &grid).unwrap();
        let params = SchemeParams::new(1e-3, 0.0, 0.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let frozen = FrozenNoise::generate(&mut rng, &k, &dom, &grid, 0.0, 50, 1e-3);
        let z = propagator_run(0.0, 0.05, &[0.3], &params, &dom, &k, &grid, &frozen).unwrap();
        // value at x = y: periodized (2 pi t)^(-1/2) within 1% at N = 256
        let got = z.values[dom.snap(&[0.3])];
        let want = periodized_heat_kernel(&[0.0], 0.05, &dom);
        assert!((got - want).abs() < 0.01 * want, "{got} vs {want}");
        // and mass 1 (delta normalization)
        let mass = z.mass(&dom);
        assert!((mass - 1.0).abs() < 1e-10);
    }

    #[test]
    fn chapman_kolmogorov_composition() {
        // dt large enough that the spectral delta has no undamped Nyquist
        // ringing; otherwise roundoff-scale clipping breaks exact linearity
        let (dom, grid) = setup(64);
        let k = build_kernel(&KernelSpec::mollifier(KernelShape::Bump, 0.1), &dom, &grid).unwrap();
        let params = SchemeParams::new(3e-3, 0.0, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let frozen = FrozenNoise::generate(&mut rng, &k, &dom, &grid, 0.0, 20, 3e-3);
        let (s, r, t) = (0.0, 0.03, 0.06);
        let y = [0.25];
        let z_st = propagator_run(s, t, &y, &params, &dom, &k, &grid, &frozen).unwrap();
        let z_sr = propagator_run(s, r, &y, &params, &dom, &k, &grid, &frozen).unwrap();
        // compose: sum_z Z_{s,r}(y,z) Z_{r,t}(z,x) dx
        let n = dom.cells();
        let mut composed = vec![0.0; n];
        for zi in 0..n {
            let w = z_sr.values[zi];
            if w == 0.0 {
                continue;
            }
            let zloc = [zi as f64 * dom.dx()];
            let z_rt = propagator_run(r, t, &zloc, &params, &dom, &k, &grid, &frozen).unwrap();
            for xi in 0..n {
                composed[xi] += w * z_rt.values[xi] * dom.dx();
            }
        }
        let scale = z_st.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for xi in 0..n {
            let a = composed[xi];
            let b = z_st.values[xi];
            assert!((a - b).abs() <= 1e-10 * scale, "cell {xi}: {a} vs {b}");
        }
    }

    #[test]
    fn propagator_linearity_in_the_start_measure() {
        let (dom, grid) = setup(64);
        let k = build_kernel(&KernelSpec::mollifier(KernelShape::Bump, 0.1), &dom, &grid).unwrap();
        let params = SchemeParams::new(3e-3, 0.0, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let frozen = FrozenNoise::generate(&mut rng, &k, &dom, &grid, 0.0, 10, 3e-3);
        let (a, b) = (0.4, 2.5);
        let z1 = propagator_run(0.0, 0.03, &[0.1], &params, &dom, &k, &grid, &frozen).unwrap();
        let z2 = propagator_run(0.0, 0.03, &[0.6], &params, &dom, &k, &grid, &frozen).unwrap();
        // combined start a delta_{y1} + b delta_{y2}
        let mut values = vec![0.0; dom.cells()];
        values[dom.snap(&[0.1])] += a / dom.cell_volume();
        values[dom.snap(&[0.6])] += b / dom.cell_volume();
        let mut state = FieldState { values, t: 0.0, role: Role::PropagatorZ };
        for i in 0..10 {
            let (next, _) = mshe_step(&state, &frozen.slice(i), &params, &dom, &grid, &k);
            state = next;
        }
        let scale = state.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for i in 0..dom.cells() {
            let want = a * z1.values[i] + b * z2.values[i];
            assert!(
                (state.values[i] - want).abs() < 1e-11 * scale,
                "cell {i}: {} vs {want}",
                state.values[i]
            );
        }
    }

    #[test]
    fn shift_equivariance_under_translated_noise() {
        let (dom, grid) = setup(64);
        let k = build_kernel(&KernelSpec::mollifier(KernelShape::Bump, 0.1), &dom, &grid).unwrap();
        let params = SchemeParams::new(1e-3, 0.0, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let frozen = FrozenNoise::generate(&mut rng, &k, &dom, &grid, 0.0, 25, 1e-3);
        let shifted = FrozenNoise {
            t0: frozen.t0,
            dt: frozen.dt,
            slices: frozen
                .slices
                .iter()
                .map(|s| {
                    let n = s.len();
                    (0..n).map(|j| s[(j + n - 1) % n]).collect()
                })
                .collect(),
        };
        let z = propagator_run(0.0, 0.025, &[0.25], &params, &dom, &k, &grid, &frozen).unwrap();
        let zs =
            propagator_run(0.0, 0.025, &[0.25 + dom.dx()], &params, &dom, &k, &grid, &shifted)
                .unwrap();
        let n = dom.cells();
        let scale = z.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for j in 0..n {
            let a = z.values[j];
            let b = zs.values[(j + 1) % n];
            assert!((a - b).abs() < 1e-11 * scale, "cell {j}: {a} vs {b}");
        }
    }

    #[test]
    fn oracle_beta_zero_is_heat_kernel() {
        let (dom, grid) = setup(64);
        let k = build_kernel(&KernelSpec::mollifier(KernelShape::Bump, 0.1), &dom, &grid).unwrap();
        let params = SchemeParams::new(1e-3, 0.0, 0.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let frozen = FrozenNoise::generate(&mut rng, &k, &dom, &grid, 0.0, 50, 1e-3);
        let mut rng2 = ChaCha8Rng::seed_from_u64(4);
        let got = feynman_kac_oracle(
            0.0, 0.05, &[0.2], &[0.3], &params, &dom, &k, &frozen, 10, &mut rng2,
        )
        .unwrap();
        let want = periodized_heat_kernel(&[0.1], 0.05, &dom);
        assert!((got - want).abs() < 1e-12 * want, "{got} vs {want}");
    }

    #[test]
    fn oracle_zero_noise_gives_compensator_only() {
        let (dom, grid) = setup(64);
        let k = build_kernel(&KernelSpec::mollifier(KernelShape::Bump, 0.1), &dom, &grid).unwrap();
        let beta = 1.7;
        let params = SchemeParams::new(1e-3, 0.0, beta).unwrap();
        let frozen = FrozenNoise {
            t0: 0.0,
            dt: 1e-3,
            slices: vec![vec![0.0; dom.cells()]; 50],
        };
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let got = feynman_kac_oracle(
            0.0, 0.05, &[0.2], &[0.2], &params, &dom, &k, &frozen, 100, &mut rng,
        )
        .unwrap();
        let want = periodized_heat_kernel(&[0.0], 0.05, &dom)
            * (-0.5 * beta * beta * k.r0 * 0.05).exp();
        assert!((got - want).abs() < 1e-12 * want, "{got} vs {want}");
    }

    #[test]
    fn oracle_rejects_white_noise() {
        let (dom, grid) = setup(64);
        let k = build_kernel(&KernelSpec::white(), &dom, &grid).unwrap();
        let params = SchemeParams::new(1e-5, 0.0, 1.0).unwrap();
        let frozen = FrozenNoise { t0: 0.0, dt: 1e-5, slices: vec![vec![0.0; 64]; 10] };
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        assert!(matches!(
            feynman_kac_oracle(0.0, 1e-4, &[0.0], &[0.0], &params, &dom, &k, &frozen, 10, &mut rng),
            Err(PropagatorError::WhiteNoiseUnsupported)
        ));
    }

    #[test]
    fn oracle_agrees_with_propagator_on_shared_noise() {
        let (dom, grid) = setup(64);
        let k = build_kernel(&KernelSpec::mollifier(KernelShape::Bump, 0.15), &dom, &grid).unwrap();
        let beta = 1.0;
        let params = SchemeParams::new(1e-3, 0.0, beta).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let frozen = FrozenNoise::generate(&mut rng, &k, &dom, &grid, 0.0, 50, 1e-3);
        let y = [0.5];
        let x = [0.55];
        let z = propagator_run(0.0, 0.05, &y, &params, &dom, &k, &grid, &frozen).unwrap();
        let scheme_val = z.values[dom.snap(&x)];
        let mut rng2 = ChaCha8Rng::seed_from_u64(22);
        let oracle_val = feynman_kac_oracle(
            0.0, 0.05, &y, &x, &params, &dom, &k, &frozen, 10_000, &mut rng2,
        )
        .unwrap();
        let rel = (oracle_val - scheme_val).abs() / scheme_val.abs();
        assert!(rel < 0.10, "oracle {oracle_val} vs scheme {scheme_val} (rel {rel:.3})");
    }

    #[test]
    fn frozen_noise_roundtrip() {
        let (dom, grid) = setup(16);
        let kspec = KernelSpec::mollifier(KernelShape::Triangle, 0.2);
        let k = build_kernel(&kspec, &dom, &grid).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(123);
        let frozen = FrozenNoise::generate(&mut rng, &k, &dom, &grid, 0.5, 7, 1e-3);
        let mut buf = Vec::new();
        frozen.write_to(&mut buf, &dom, &kspec, 123).unwrap();
        let (back, seed) = FrozenNoise::read_from(&mut buf.as_slice()).unwrap();
        assert_eq!(seed, 123);
        assert_eq!(back.t0, frozen.t0);
        assert_eq!(back.dt, frozen.dt);
        assert_eq!(back.slices, frozen.slices);
    }
}
