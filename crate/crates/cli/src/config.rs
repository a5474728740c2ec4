//! Experiment configuration: a flat `key = value` file, overridden by
//! command-line assignments.
//!
//! Blank lines and lines starting with `#` are ignored. Keys:
//!
//! | key | meaning | default |
//! |---|---|---|
//! | `users` | users `K` | 4 |
//! | `nt` | BS antennas | 10 |
//! | `ns` | IRS elements | 32 |
//! | `ne` | eavesdropper antennas | 2 |
//! | `snr_db` | per-user transmit SNR in dB | 1 |
//! | `rate` | secrecy coding rate, bit/s/Hz | 2 |
//! | `seed` | base seed | 0 |
//! | `trials` | channel draws per sweep point | 20 |
//! | `trial` | draw used by `optimize` and `validate-sop` | 0 |
//! | `schemes` | comma list of `mm-sop`, `mm-sinr` | `mm-sop,mm-sinr` |
//! | `sweep` | `none`, `ns`, `nt` or `ne` | `none` |
//! | `sweep_values` | comma list of positive integers | empty |
//! | `xi` | AO stopping threshold | 1e-4 |
//! | `iter_max` | AO round cap | 20 |
//! | `tau` | Dinkelbach tolerance | 1e-5 |
//! | `max_outer` | Dinkelbach iteration cap | 50 |
//! | `randomization_samples` | Gaussian randomization draws | 1000 |
//! | `sdp_method` | `interior-point` or `admm` | `interior-point` |
//! | `sdp_tol` | SDP tolerance | 1e-6 |
//! | `samples` | eavesdropper draws for `validate-sop` | 100000 |
//! | `receivers` | `validate-sop` receive vectors: `random` or `optimal` for the random phase | `random` |
//! | `threads` | worker threads, 0 = all available | 0 |

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use irs_sop::ao::{AoConfig, Objective, DEFAULT_ITER_MAX, DEFAULT_XI};
use irs_sop::dinkelbach::{DinkelbachSettings, DEFAULT_MAX_OUTER, DEFAULT_TAU};
use irs_sop::lift::DEFAULT_RANDOMIZATION_SAMPLES;
use irs_sop::sdp::{SdpMethod, SdpSettings, DEFAULT_TOL};
use irs_sop::SystemConfig;

use crate::error::CliError;

/// Number of IRS elements (plus the homogenizing entry) the solver budgets
/// are sized for.
pub const DESK_SCALE_DIM: usize = 65;

pub const DEFAULT_TRIALS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Scheme {
    MmSop,
    MmSinr,
}

impl Scheme {
    pub fn name(self) -> &'static str {
        match self {
            Scheme::MmSop => "mm-sop",
            Scheme::MmSinr => "mm-sinr",
        }
    }

    pub fn objective(self) -> Objective {
        match self {
            Scheme::MmSop => Objective::MmSop,
            Scheme::MmSinr => Objective::MmSinr,
        }
    }
}

impl FromStr for Scheme {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "mm-sop" => Ok(Scheme::MmSop),
            "mm-sinr" => Ok(Scheme::MmSinr),
            _ => Err(format!("unknown scheme {s:?} (expected mm-sop or mm-sinr)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    None,
    Ns,
    Nt,
    Ne,
}

impl Axis {
    pub fn name(self) -> &'static str {
        match self {
            Axis::None => "none",
            Axis::Ns => "ns",
            Axis::Nt => "nt",
            Axis::Ne => "ne",
        }
    }
}

impl FromStr for Axis {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "none" => Ok(Axis::None),
            "ns" => Ok(Axis::Ns),
            "nt" => Ok(Axis::Nt),
            "ne" => Ok(Axis::Ne),
            _ => Err(format!("unknown sweep axis {s:?} (expected none, ns, nt or ne)")),
        }
    }
}

/// How `validate-sop` picks receive vectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Receivers {
    Random,
    Optimal,
}

impl Receivers {
    pub fn name(self) -> &'static str {
        match self {
            Receivers::Random => "random",
            Receivers::Optimal => "optimal",
        }
    }
}

impl FromStr for Receivers {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "random" => Ok(Receivers::Random),
            "optimal" => Ok(Receivers::Optimal),
            _ => Err(format!("unknown receiver choice {s:?} (expected random or optimal)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub users: usize,
    pub nt: usize,
    pub ns: usize,
    pub ne: usize,
    pub snr_db: f64,
    pub rate: f64,
    pub seed: u64,
    pub trials: usize,
    /// Whether `trials` came from the built-in default.
    pub trials_defaulted: bool,
    pub trial: u64,
    pub schemes: Vec<Scheme>,
    pub sweep: Axis,
    pub sweep_values: Vec<usize>,
    pub xi: f64,
    pub iter_max: usize,
    pub tau: f64,
    pub max_outer: usize,
    pub randomization_samples: usize,
    pub sdp_method: SdpMethod,
    pub sdp_tol: f64,
    pub samples: usize,
    pub receivers: Receivers,
    pub threads: usize,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        Self {
            users: 4,
            nt: 10,
            ns: 32,
            ne: 2,
            snr_db: 1.0,
            rate: 2.0,
            seed: 0,
            trials: DEFAULT_TRIALS,
            trials_defaulted: true,
            trial: 0,
            schemes: vec![Scheme::MmSop, Scheme::MmSinr],
            sweep: Axis::None,
            sweep_values: Vec::new(),
            xi: DEFAULT_XI,
            iter_max: DEFAULT_ITER_MAX,
            tau: DEFAULT_TAU,
            max_outer: DEFAULT_MAX_OUTER,
            randomization_samples: DEFAULT_RANDOMIZATION_SAMPLES,
            sdp_method: SdpMethod::InteriorPoint,
            sdp_tol: DEFAULT_TOL,
            samples: 100_000,
            receivers: Receivers::Random,
            threads: 0,
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T, String>
where
    T::Err: std::fmt::Display,
{
    value.parse().map_err(|e| format!("{key}: cannot parse {value:?}: {e}"))
}

fn parse_list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>, String>
where
    T::Err: std::fmt::Display,
{
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse(key, s))
        .collect()
}

fn method_name(m: SdpMethod) -> &'static str {
    match m {
        SdpMethod::InteriorPoint => "interior-point",
        SdpMethod::Admm => "admm",
    }
}

fn join<T>(items: &[T], f: impl Fn(&T) -> String) -> String {
    items.iter().map(f).collect::<Vec<_>>().join(",")
}

impl ExperimentSpec {
    /// Sets one key. Unknown keys are errors.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        let v = value.trim();
        match key.trim() {
            "users" => self.users = parse(key, v)?,
            "nt" => self.nt = parse(key, v)?,
            "ns" => self.ns = parse(key, v)?,
            "ne" => self.ne = parse(key, v)?,
            "snr_db" => self.snr_db = parse(key, v)?,
            "rate" => self.rate = parse(key, v)?,
            "seed" => self.seed = parse(key, v)?,
            "trials" => {
                self.trials = parse(key, v)?;
                self.trials_defaulted = false;
            }
            "trial" => self.trial = parse(key, v)?,
            "schemes" => self.schemes = parse_list(key, v)?,
            "sweep" => self.sweep = parse(key, v)?,
            "sweep_values" => self.sweep_values = parse_list(key, v)?,
            "xi" => self.xi = parse(key, v)?,
            "iter_max" => self.iter_max = parse(key, v)?,
            "tau" => self.tau = parse(key, v)?,
            "max_outer" => self.max_outer = parse(key, v)?,
            "randomization_samples" => self.randomization_samples = parse(key, v)?,
            "sdp_method" => {
                self.sdp_method = match v {
                    "interior-point" => SdpMethod::InteriorPoint,
                    "admm" => SdpMethod::Admm,
                    _ => {
                        return Err(format!(
                            "sdp_method: unknown method {v:?} (expected interior-point or admm)"
                        ))
                    }
                }
            }
            "sdp_tol" => self.sdp_tol = parse(key, v)?,
            "samples" => self.samples = parse(key, v)?,
            "receivers" => self.receivers = parse(key, v)?,
            "threads" => self.threads = parse(key, v)?,
            other => return Err(format!("unknown key {other:?}")),
        }
        Ok(())
    }

    /// Applies a `key = value` text; errors carry the 1-based line number.
    pub fn apply_text(&mut self, text: &str, path: &Path) -> Result<(), CliError> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |message: String| CliError::Parse {
                path: path.to_path_buf(),
                line: i + 1,
                message,
            };
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err(format!("expected `key = value`, got {line:?}")))?;
            self.set(key, value).map_err(err)?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<(), CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        self.apply_text(&text, path)
    }

    /// Applies a command-line `key=value` assignment.
    pub fn apply_assignment(&mut self, assignment: &str) -> Result<(), CliError> {
        let (key, value) = assignment
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("expected KEY=VALUE, got {assignment:?}")))?;
        self.set(key, value).map_err(CliError::Config)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: &str| Err(CliError::Config(m.to_string()));
        if self.trials == 0 {
            return bad("trials must be at least 1");
        }
        if self.schemes.is_empty() {
            return bad("schemes must name at least one scheme");
        }
        if self.sweep_values.contains(&0) {
            return bad("sweep values must be positive integers");
        }
        if self.sweep != Axis::None && self.sweep_values.is_empty() {
            return bad("a sweep axis needs sweep_values");
        }
        if !(self.sdp_tol > 0.0) {
            return bad("sdp_tol must be positive");
        }
        self.system(None).validate()?;
        self.ao_config(Scheme::MmSop).validate()?;
        for &v in &self.sweep_values {
            self.system(Some(v)).validate()?;
        }
        Ok(())
    }

    /// Sweep points; a single unlabelled point without a sweep axis.
    pub fn points(&self) -> Vec<Option<usize>> {
        match self.sweep {
            Axis::None => vec![None],
            _ => self.sweep_values.iter().map(|&v| Some(v)).collect(),
        }
    }

    /// Scenario at sweep value `value` (the base scenario for `None`).
    pub fn system(&self, value: Option<usize>) -> SystemConfig {
        let (mut nt, mut ns, mut ne) = (self.nt, self.ns, self.ne);
        if let Some(v) = value {
            match self.sweep {
                Axis::None => {}
                Axis::Ns => ns = v,
                Axis::Nt => nt = v,
                Axis::Ne => ne = v,
            }
        }
        SystemConfig::from_snr_db(self.users, nt, ns, ne, self.snr_db, self.rate, self.seed)
    }

    pub fn ao_config(&self, scheme: Scheme) -> AoConfig {
        AoConfig {
            xi: self.xi,
            iter_max: self.iter_max,
            dinkelbach: DinkelbachSettings {
                tau: self.tau,
                max_outer: self.max_outer,
                sdp: SdpSettings {
                    method: self.sdp_method,
                    tol: self.sdp_tol,
                    gap_tol: self.sdp_tol * 1e-3,
                    ..SdpSettings::default()
                },
            },
            randomization_samples: self.randomization_samples,
            objective: scheme.objective(),
        }
    }

    /// Largest IRS size this configuration will run.
    pub fn max_irs_elements(&self) -> usize {
        match self.sweep {
            Axis::Ns => self.sweep_values.iter().copied().max().unwrap_or(self.ns),
            _ => self.ns,
        }
    }

    pub fn exceeds_desk_scale(&self) -> bool {
        self.max_irs_elements() + 1 > DESK_SCALE_DIM
    }

    pub fn thread_count(&self) -> usize {
        if self.threads > 0 {
            self.threads
        } else {
            std::thread::available_parallelism().map_or(1, |n| n.get())
        }
    }

    /// Every key in file syntax; reading it back reproduces `self`.
    pub fn to_config_text(&self) -> String {
        let mut s = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        kv("users", self.users.to_string());
        kv("nt", self.nt.to_string());
        kv("ns", self.ns.to_string());
        kv("ne", self.ne.to_string());
        kv("snr_db", self.snr_db.to_string());
        kv("rate", self.rate.to_string());
        kv("seed", self.seed.to_string());
        kv("trials", self.trials.to_string());
        kv("trial", self.trial.to_string());
        kv("schemes", join(&self.schemes, |s| s.name().to_string()));
        kv("sweep", self.sweep.name().to_string());
        kv("sweep_values", join(&self.sweep_values, |v| v.to_string()));
        kv("xi", self.xi.to_string());
        kv("iter_max", self.iter_max.to_string());
        kv("tau", self.tau.to_string());
        kv("max_outer", self.max_outer.to_string());
        kv("randomization_samples", self.randomization_samples.to_string());
        kv("sdp_method", method_name(self.sdp_method).to_string());
        kv("sdp_tol", self.sdp_tol.to_string());
        kv("samples", self.samples.to_string());
        kv("receivers", self.receivers.name().to_string());
        kv("threads", self.threads.to_string());
        s
    }
}
