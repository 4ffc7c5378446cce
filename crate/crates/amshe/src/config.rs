//! Experiment configuration: a flat key-value document with dotted
//! sections, fully validated, with every default materialized before the
//! digest is taken.

use crate::grid::{DomainSpec, Geometry};
use crate::kernel::{KernelKind, KernelShape, KernelSpec};
use crate::solver::{MeasureSpec, SchemeParams};
use serde::Serialize;
use sha2::{Digest, Sha256};
use std::collections::HashMap;
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Prop15,
    Cauchy,
    Qv,
    WeakProbe,
    Stationarity,
    Attenuated2d,
    FracMoment,
    MixedSignExplore,
}

impl ExperimentKind {
    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "prop15" => Self::Prop15,
            "cauchy" => Self::Cauchy,
            "qv" => Self::Qv,
            "weak-probe" => Self::WeakProbe,
            "stationarity" => Self::Stationarity,
            "attenuated-2d" => Self::Attenuated2d,
            "frac-moment" => Self::FracMoment,
            "mixed-sign-explore" => Self::MixedSignExplore,
            _ => return None,
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Prop15 => "prop15",
            Self::Cauchy => "cauchy",
            Self::Qv => "qv",
            Self::WeakProbe => "weak-probe",
            Self::Stationarity => "stationarity",
            Self::Attenuated2d => "attenuated-2d",
            Self::FracMoment => "frac-moment",
            Self::MixedSignExplore => "mixed-sign-explore",
        }
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("line {line}: duplicate key `{key}`")]
    DuplicateKey { key: String, line: usize },
    #[error("unknown key `{key}`")]
    UnknownKey { key: String },
    #[error("{field}: {msg}")]
    Invalid { field: String, msg: String },
    #[error("kernel.kind=white is unsupported with domain.dimension={dimension} (white noise needs dimension 1)")]
    UnsupportedWhiteNoise { dimension: usize },
}

/// Everything an experiment run needs, with defaults materialized. The
/// digest covers these values (except the worker count, which cannot
/// change any output).
#[derive(Debug, Clone, Serialize)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub domain: DomainSpec,
    pub kernel: KernelSpec,
    pub scheme: SchemeParams,
    pub measure: MeasureSpec,
    pub n_paths: usize,
    pub t_max: f64,
    pub record_every: usize,
    pub base_seed: u64,
    pub threshold: f64,
    /// Dubins-Schwarz clock bin edges for the Brownianity check.
    pub q_bins: Vec<f64>,
    // prop15
    pub a_list: Vec<f64>,
    pub oracle_dt: f64,
    // qv refinement subrun
    pub refine_paths: usize,
    // stationarity
    pub ks_t_pair: (f64, f64),
    pub t_ladder: Vec<f64>,
    pub ladder_paths: usize,
    pub null_reps: usize,
    // attenuated-2d
    pub eps_list: Vec<f64>,
    pub t_obs: f64,
    pub sigma_budget: f64,
    pub subcritical_beta: f64,
    pub subcritical_eps: f64,
    pub subcritical_t: f64,
    pub subcritical_paths: usize,
    pub decay_probe: bool,
    // frac-moment
    pub theta: f64,
    // weak-probe
    pub contrast_beta: f64,
    #[serde(skip)]
    pub workers: usize,
}

struct KvDoc {
    map: HashMap<String, (String, usize)>,
}

impl KvDoc {
    fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut map = HashMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(ConfigError::Parse {
                    line: line_no,
                    msg: format!("expected `key = value`, got `{line}`"),
                });
            };
            let key = k.trim().to_string();
            let val = v.trim().to_string();
            if key.is_empty() {
                return Err(ConfigError::Parse { line: line_no, msg: "empty key".into() });
            }
            if map.contains_key(&key) {
                return Err(ConfigError::DuplicateKey { key, line: line_no });
            }
            map.insert(key, (val, line_no));
        }
        Ok(KvDoc { map })
    }

    fn get(&self, key: &str) -> Option<&str> {
        self.map.get(key).map(|(v, _)| v.as_str())
    }

    fn get_f64(&self, key: &str) -> Result<Option<f64>, ConfigError> {
        self.get(key)
            .map(|v| {
                v.parse::<f64>().map_err(|_| ConfigError::Invalid {
                    field: key.into(),
                    msg: format!("`{v}` is not a number"),
                })
            })
            .transpose()
    }

    fn get_usize(&self, key: &str) -> Result<Option<usize>, ConfigError> {
        self.get(key)
            .map(|v| {
                v.parse::<usize>().map_err(|_| ConfigError::Invalid {
                    field: key.into(),
                    msg: format!("`{v}` is not a nonnegative integer"),
                })
            })
            .transpose()
    }

    fn get_u64(&self, key: &str) -> Result<Option<u64>, ConfigError> {
        self.get(key)
            .map(|v| {
                v.parse::<u64>().map_err(|_| ConfigError::Invalid {
                    field: key.into(),
                    msg: format!("`{v}` is not a nonnegative integer"),
                })
            })
            .transpose()
    }

    fn get_bool(&self, key: &str) -> Result<Option<bool>, ConfigError> {
        self.get(key)
            .map(|v| match v {
                "true" => Ok(true),
                "false" => Ok(false),
                _ => Err(ConfigError::Invalid {
                    field: key.into(),
                    msg: format!("`{v}` is not true/false"),
                }),
            })
            .transpose()
    }

    fn get_f64_list(&self, key: &str) -> Result<Option<Vec<f64>>, ConfigError> {
        self.get(key)
            .map(|v| {
                v.split(',')
                    .map(|p| {
                        p.trim().parse::<f64>().map_err(|_| ConfigError::Invalid {
                            field: key.into(),
                            msg: format!("`{p}` is not a number"),
                        })
                    })
                    .collect()
            })
            .transpose()
    }
}

const KNOWN_KEYS: &[&str] = &[
    "experiment",
    "domain.geometry",
    "domain.dimension",
    "domain.side_length",
    "domain.points_per_axis",
    "kernel.kind",
    "kernel.shape",
    "kernel.half_width",
    "kernel.epsilon",
    "scheme.dt",
    "scheme.alpha",
    "scheme.beta",
    "measure.atoms",
    "measure.signed",
    "run.n_paths",
    "run.t_max",
    "run.record_every",
    "run.base_seed",
    "run.threshold",
    "run.q_bins",
    "run.a_list",
    "run.oracle_dt",
    "run.refine_paths",
    "run.ks_t_low",
    "run.ks_t_high",
    "run.t_ladder",
    "run.ladder_paths",
    "run.null_reps",
    "run.eps_list",
    "run.t_obs",
    "run.sigma_budget",
    "run.subcritical_beta",
    "run.subcritical_eps",
    "run.subcritical_t",
    "run.subcritical_paths",
    "run.decay_probe",
    "run.theta",
    "run.contrast_beta",
    "run.workers",
];

fn parse_atoms(text: &str, dimension: usize) -> Result<Vec<(f64, Vec<f64>)>, ConfigError> {
    let field = "measure.atoms";
    let mut atoms = Vec::new();
    for part in text.split(';') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        let Some((g, loc)) = part.split_once('@') else {
            return Err(ConfigError::Invalid {
                field: field.into(),
                msg: format!("atom `{part}` is not `gamma @ x1,..`"),
            });
        };
        let gamma: f64 = g.trim().parse().map_err(|_| ConfigError::Invalid {
            field: field.into(),
            msg: format!("weight `{}` is not a number", g.trim()),
        })?;
        let coords: Vec<f64> = loc
            .split(',')
            .map(|c| {
                c.trim().parse::<f64>().map_err(|_| ConfigError::Invalid {
                    field: field.into(),
                    msg: format!("coordinate `{}` is not a number", c.trim()),
                })
            })
            .collect::<Result<_, _>>()?;
        if coords.len() != dimension {
            return Err(ConfigError::Invalid {
                field: field.into(),
                msg: format!(
                    "atom `{part}` has {} coordinates but domain.dimension is {dimension}",
                    coords.len()
                ),
            });
        }
        atoms.push((gamma, coords));
    }
    if atoms.is_empty() {
        return Err(ConfigError::Invalid { field: field.into(), msg: "no atoms given".into() });
    }
    Ok(atoms)
}

struct Defaults {
    dimension: usize,
    points: usize,
    side_length: f64,
    shape: KernelShape,
    half_width: f64,
    alpha: f64,
    beta: f64,
    n_paths: usize,
    t_max: f64,
    record_every: usize,
}

fn defaults_for(kind: ExperimentKind) -> Defaults {
    match kind {
        ExperimentKind::Prop15 => Defaults {
            dimension: 1, points: 64, side_length: 1.0,
            shape: KernelShape::Bump, half_width: 0.1,
            alpha: 1.0, beta: 1.0, n_paths: 100_000, t_max: 20.0, record_every: 10,
        },
        ExperimentKind::Cauchy | ExperimentKind::MixedSignExplore => Defaults {
            dimension: 1, points: 64, side_length: 1.0,
            shape: KernelShape::Bump, half_width: 0.1,
            alpha: 1.0, beta: 1.0, n_paths: 10_000, t_max: 20.0, record_every: 10,
        },
        ExperimentKind::Qv => Defaults {
            dimension: 1, points: 256, side_length: 1.0,
            shape: KernelShape::Bump, half_width: 0.1,
            alpha: 2.0, beta: 1.0, n_paths: 1000, t_max: 0.5, record_every: 1,
        },
        ExperimentKind::WeakProbe => Defaults {
            dimension: 3, points: 24, side_length: 4.0,
            shape: KernelShape::Bump, half_width: 0.75,
            alpha: 1.0, beta: 0.1, n_paths: 400, t_max: 6.0, record_every: 50,
        },
        ExperimentKind::Stationarity => Defaults {
            dimension: 1, points: 64, side_length: 1.0,
            shape: KernelShape::Bump, half_width: 0.1,
            alpha: 1.0, beta: 1.0, n_paths: 10_000, t_max: 12.0, record_every: 10,
        },
        ExperimentKind::Attenuated2d => Defaults {
            dimension: 2, points: 512, side_length: 1.0,
            shape: KernelShape::Triangle, half_width: 0.49,
            alpha: 1.0, beta: (2.0 * std::f64::consts::PI).sqrt(),
            n_paths: 320, t_max: 0.25, record_every: 1,
        },
        ExperimentKind::FracMoment => Defaults {
            dimension: 1, points: 64, side_length: 1.0,
            shape: KernelShape::Bump, half_width: 0.1,
            alpha: 0.0, beta: 1.0, n_paths: 10_000, t_max: 16.0, record_every: 100,
        },
    }
}

pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let doc = KvDoc::parse(text)?;
    for key in doc.map.keys() {
        if !KNOWN_KEYS.contains(&key.as_str()) {
            return Err(ConfigError::UnknownKey { key: key.clone() });
        }
    }
    let exp_name = doc.get("experiment").ok_or(ConfigError::Invalid {
        field: "experiment".into(),
        msg: "missing (one of prop15, cauchy, qv, weak-probe, stationarity, attenuated-2d, frac-moment, mixed-sign-explore)".into(),
    })?;
    let experiment = ExperimentKind::parse(exp_name).ok_or_else(|| ConfigError::Invalid {
        field: "experiment".into(),
        msg: format!("unknown experiment `{exp_name}`"),
    })?;
    let d = defaults_for(experiment);

    let geometry = match doc.get("domain.geometry") {
        None => if d.dimension == 3 { Geometry::TruncatedLine } else { Geometry::Torus },
        Some("torus") => Geometry::Torus,
        Some("truncated-line") => Geometry::TruncatedLine,
        Some(v) => {
            return Err(ConfigError::Invalid {
                field: "domain.geometry".into(),
                msg: format!("`{v}` is not torus|truncated-line"),
            })
        }
    };
    let dimension = doc.get_usize("domain.dimension")?.unwrap_or(d.dimension);
    let side_length = doc.get_f64("domain.side_length")?.unwrap_or(d.side_length);
    let points = doc.get_usize("domain.points_per_axis")?.unwrap_or(d.points);
    let domain = DomainSpec::new(geometry, dimension, side_length, points).map_err(|e| {
        ConfigError::Invalid { field: "domain".into(), msg: e.to_string() }
    })?;

    let kind = match doc.get("kernel.kind") {
        None => KernelKind::Mollifier,
        Some("mollifier") => KernelKind::Mollifier,
        Some("white") => KernelKind::White,
        Some(v) => {
            return Err(ConfigError::Invalid {
                field: "kernel.kind".into(),
                msg: format!("`{v}` is not mollifier|white"),
            })
        }
    };
    if kind == KernelKind::White && dimension != 1 {
        return Err(ConfigError::UnsupportedWhiteNoise { dimension });
    }
    let shape = match doc.get("kernel.shape") {
        None => d.shape,
        Some("bump") => KernelShape::Bump,
        Some("triangle") => KernelShape::Triangle,
        Some(v) => {
            return Err(ConfigError::Invalid {
                field: "kernel.shape".into(),
                msg: format!("`{v}` is not bump|triangle"),
            })
        }
    };
    let half_width = doc.get_f64("kernel.half_width")?.unwrap_or(d.half_width);
    let epsilon = doc.get_f64("kernel.epsilon")?;
    if let Some(e) = epsilon {
        if !(e > 0.0 && e <= 1.0) {
            return Err(ConfigError::Invalid {
                field: "kernel.epsilon".into(),
                msg: format!("must lie in (0, 1], got {e}"),
            });
        }
    }
    let kernel = KernelSpec { kind, shape, half_width, epsilon };

    // documented dt defaults: dx^2/4 under white noise, min(1e-3, dx) for
    // smooth kernels
    let dx = domain.dx();
    let dt_default = match kind {
        KernelKind::White => dx * dx / 4.0,
        KernelKind::Mollifier => (1e-3f64).min(dx),
    };
    let dt = doc.get_f64("scheme.dt")?.unwrap_or(dt_default);
    let alpha = doc.get_f64("scheme.alpha")?.unwrap_or(d.alpha);
    let beta = doc.get_f64("scheme.beta")?.unwrap_or(d.beta);
    let scheme = SchemeParams::new(dt, alpha, beta).map_err(|e| ConfigError::Invalid {
        field: "scheme".into(),
        msg: e.to_string(),
    })?;

    let signed = doc.get_bool("measure.signed")?.unwrap_or(
        experiment == ExperimentKind::MixedSignExplore,
    );
    let atoms = match doc.get("measure.atoms") {
        Some(text) => parse_atoms(text, dimension)?,
        None => match experiment {
            ExperimentKind::MixedSignExplore => vec![
                (0.65, vec![side_length / 4.0; dimension.max(1)][..dimension].to_vec()),
                (-0.35, vec![side_length / 2.0; dimension.max(1)][..dimension].to_vec()),
            ],
            ExperimentKind::Attenuated2d => vec![(1.0, vec![side_length / 2.0; dimension])],
            _ => vec![(1.0, vec![0.0; dimension])],
        },
    };
    let measure = if signed {
        MeasureSpec::signed_exploratory(atoms)
    } else {
        MeasureSpec::unsigned(atoms)
    }
    .map_err(|e| ConfigError::Invalid { field: "measure.atoms".into(), msg: e.to_string() })?;

    let two_pi = 2.0 * std::f64::consts::PI;
    let config = ExperimentConfig {
        experiment,
        domain,
        kernel,
        scheme,
        measure,
        n_paths: doc.get_usize("run.n_paths")?.unwrap_or(d.n_paths),
        t_max: doc.get_f64("run.t_max")?.unwrap_or(d.t_max),
        record_every: doc.get_usize("run.record_every")?.unwrap_or(d.record_every).max(1),
        base_seed: doc.get_u64("run.base_seed")?.unwrap_or(1),
        threshold: doc.get_f64("run.threshold")?.unwrap_or(1e-3),
        q_bins: doc
            .get_f64_list("run.q_bins")?
            .unwrap_or_else(|| vec![0.0, 0.15, 0.3]),
        a_list: doc.get_f64_list("run.a_list")?.unwrap_or_else(|| vec![1.0]),
        oracle_dt: doc.get_f64("run.oracle_dt")?.unwrap_or(1e-4),
        refine_paths: doc.get_usize("run.refine_paths")?.unwrap_or(200),
        ks_t_pair: (
            doc.get_f64("run.ks_t_low")?.unwrap_or(10.0),
            doc.get_f64("run.ks_t_high")?.unwrap_or(12.0),
        ),
        t_ladder: doc
            .get_f64_list("run.t_ladder")?
            .unwrap_or_else(|| match experiment {
                ExperimentKind::Stationarity => vec![2.0, 4.0, 8.0, 16.0],
                _ => vec![1.0, 2.0, 4.0, 8.0, 16.0],
            }),
        ladder_paths: doc.get_usize("run.ladder_paths")?.unwrap_or(2000),
        null_reps: doc.get_usize("run.null_reps")?.unwrap_or(200),
        eps_list: doc
            .get_f64_list("run.eps_list")?
            .unwrap_or_else(|| vec![0.125, 0.0625, 0.03125]),
        t_obs: doc.get_f64("run.t_obs")?.unwrap_or(d.t_max),
        sigma_budget: doc.get_f64("run.sigma_budget")?.unwrap_or(0.1),
        subcritical_beta: doc.get_f64("run.subcritical_beta")?.unwrap_or(1.0),
        subcritical_eps: doc.get_f64("run.subcritical_eps")?.unwrap_or(0.0625),
        subcritical_t: doc.get_f64("run.subcritical_t")?.unwrap_or(0.5),
        subcritical_paths: doc.get_usize("run.subcritical_paths")?.unwrap_or(1200),
        decay_probe: doc.get_bool("run.decay_probe")?.unwrap_or(false),
        theta: doc.get_f64("run.theta")?.unwrap_or(0.5),
        contrast_beta: doc.get_f64("run.contrast_beta")?.unwrap_or(5.0),
        workers: doc.get_usize("run.workers")?.unwrap_or(0),
    };
    validate(&config, two_pi)?;
    Ok(config)
}

fn validate(c: &ExperimentConfig, two_pi: f64) -> Result<(), ConfigError> {
    let err = |field: &str, msg: String| Err(ConfigError::Invalid { field: field.into(), msg });
    if c.n_paths < 2 {
        return err("run.n_paths", "need at least 2 paths".into());
    }
    if c.kernel.kind == KernelKind::Mollifier
        && c.kernel.half_width >= c.domain.side_length / 2.0
    {
        return err(
            "kernel.half_width",
            format!(
                "support {} exceeds half the domain {}",
                c.kernel.half_width,
                c.domain.side_length / 2.0
            ),
        );
    }
    match c.experiment {
        ExperimentKind::Attenuated2d => {
            if c.domain.dimension != 2 {
                return err("domain.dimension", "attenuated-2d requires dimension 2".into());
            }
            if c.eps_list.len() < 2 {
                return err("run.eps_list", "need at least 2 epsilon rungs".into());
            }
            if !c.eps_list.windows(2).all(|w| w[1] < w[0]) {
                return err("run.eps_list", "epsilon rungs must be strictly decreasing".into());
            }
            for &e in &c.eps_list {
                if !(e > 0.0 && e <= 1.0) {
                    return err("run.eps_list", format!("epsilon {e} outside (0, 1]"));
                }
            }
            if c.subcritical_beta * c.subcritical_beta >= two_pi {
                return err(
                    "run.subcritical_beta",
                    format!("{} is not subcritical (needs beta^2 < 2 pi)", c.subcritical_beta),
                );
            }
        }
        ExperimentKind::WeakProbe => {
            if c.domain.dimension != 3 {
                return err("domain.dimension", "weak-probe requires dimension 3".into());
            }
        }
        ExperimentKind::FracMoment => {
            if !(c.theta > 0.0 && c.theta < 1.0) {
                return err("run.theta", format!("theta must lie in (0,1), got {}", c.theta));
            }
            if c.t_ladder.windows(2).any(|w| w[1] <= w[0]) {
                return err("run.t_ladder", "ladder must be strictly increasing".into());
            }
        }
        ExperimentKind::Stationarity => {
            if c.ks_t_pair.0 >= c.ks_t_pair.1 {
                return err("run.ks_t_low", "the two comparison times must be ordered".into());
            }
        }
        _ => {}
    }
    Ok(())
}

impl ExperimentConfig {
    /// Canonical listing of the materialized settings; the digest input.
    pub fn canonical_string(&self) -> String {
        let mut s = String::new();
        let mut kv: Vec<(String, String)> = Vec::new();
        let push = |kv: &mut Vec<(String, String)>, k: &str, v: String| {
            kv.push((k.to_string(), v));
        };
        push(&mut kv, "experiment", self.experiment.name().into());
        push(&mut kv, "domain.geometry", format!("{:?}", self.domain.geometry).to_lowercase());
        push(&mut kv, "domain.dimension", self.domain.dimension.to_string());
        push(&mut kv, "domain.side_length", format!("{:?}", self.domain.side_length));
        push(&mut kv, "domain.points_per_axis", self.domain.points_per_axis.to_string());
        push(&mut kv, "kernel.kind", format!("{:?}", self.kernel.kind).to_lowercase());
        push(&mut kv, "kernel.shape", format!("{:?}", self.kernel.shape).to_lowercase());
        push(&mut kv, "kernel.half_width", format!("{:?}", self.kernel.half_width));
        push(&mut kv, "kernel.epsilon", format!("{:?}", self.kernel.epsilon));
        push(&mut kv, "scheme.dt", format!("{:?}", self.scheme.dt));
        push(&mut kv, "scheme.alpha", format!("{:?}", self.scheme.alpha));
        push(&mut kv, "scheme.beta", format!("{:?}", self.scheme.beta));
        let atoms: Vec<String> = self
            .measure
            .atoms
            .iter()
            .map(|(g, loc)| {
                let coords: Vec<String> = loc.iter().map(|c| format!("{c:?}")).collect();
                format!("{g:?}@{}", coords.join(","))
            })
            .collect();
        push(&mut kv, "measure.atoms", atoms.join(";"));
        push(&mut kv, "measure.signed", self.measure.signed.to_string());
        push(&mut kv, "run.n_paths", self.n_paths.to_string());
        push(&mut kv, "run.t_max", format!("{:?}", self.t_max));
        push(&mut kv, "run.record_every", self.record_every.to_string());
        push(&mut kv, "run.base_seed", self.base_seed.to_string());
        push(&mut kv, "run.threshold", format!("{:?}", self.threshold));
        let fmt_list = |xs: &[f64]| {
            xs.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(",")
        };
        push(&mut kv, "run.q_bins", fmt_list(&self.q_bins));
        push(&mut kv, "run.a_list", fmt_list(&self.a_list));
        push(&mut kv, "run.oracle_dt", format!("{:?}", self.oracle_dt));
        push(&mut kv, "run.refine_paths", self.refine_paths.to_string());
        push(&mut kv, "run.ks_t_low", format!("{:?}", self.ks_t_pair.0));
        push(&mut kv, "run.ks_t_high", format!("{:?}", self.ks_t_pair.1));
        push(&mut kv, "run.t_ladder", fmt_list(&self.t_ladder));
        push(&mut kv, "run.ladder_paths", self.ladder_paths.to_string());
        push(&mut kv, "run.null_reps", self.null_reps.to_string());
        push(&mut kv, "run.eps_list", fmt_list(&self.eps_list));
        push(&mut kv, "run.t_obs", format!("{:?}", self.t_obs));
        push(&mut kv, "run.sigma_budget", format!("{:?}", self.sigma_budget));
        push(&mut kv, "run.subcritical_beta", format!("{:?}", self.subcritical_beta));
        push(&mut kv, "run.subcritical_eps", format!("{:?}", self.subcritical_eps));
        push(&mut kv, "run.subcritical_t", format!("{:?}", self.subcritical_t));
        push(&mut kv, "run.subcritical_paths", self.subcritical_paths.to_string());
        push(&mut kv, "run.decay_probe", self.decay_probe.to_string());
        push(&mut kv, "run.theta", format!("{:?}", self.theta));
        push(&mut kv, "run.contrast_beta", format!("{:?}", self.contrast_beta));
        kv.sort();
        for (k, v) in kv {
            let _ = writeln!(s, "{k} = {v}");
        }
        s
    }

    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.canonical_string().as_bytes());
        let out = h.finalize();
        out.iter().fold(String::with_capacity(64), |mut acc, b| {
            let _ = write!(acc, "{b:02x}");
            acc
        })
    }
}
