//! Run configuration: a TOML file of `key = value` lines under section
//! headers, then command-line overrides.
//!
//! ```toml
//! [system]
//! kappa = 0.5        # coupling in units of omega0
//! lambda = 1         # +1 or -1
//!
//! [spectral]
//! eta = 0.005
//! omega_c = 30.0
//! n = 1.0
//!
//! [grid]
//! t_max = 10.0
//! dt = 0.002
//!
//! [state]
//! kind = "phi_minus" # psi_plus, psi_minus, phi_plus, phi_minus
//! alpha = 0.8
//! alpha_imag = 0.0
//!
//! [outputs]
//! coeffs = "coeffs.csv"
//! concurrence = "concurrence.csv"
//! sweep_dir = "sweep"
//! companion = false
//!
//! [verify]
//! cutoff = 16
//! t_max = 5.0
//! stride = 1
//! compare_every = 125
//!
//! [sweep]
//! command = "concurrence"
//! lambda = [1, -1]
//! kind = ["psi_plus", "psi_minus", "phi_plus", "phi_minus"]
//! ```
//!
//! Every key is optional; omitted keys take the defaults shown. Unknown
//! keys are rejected. All frequencies are in units of `omega0 = 1`.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use decoherence_core::{
    Complex64, EcsKind, EcsState, MemoryKernel, OracleSettings, PhaseBranch, SpectralParams, SystemParams,
    TimeGrid,
};
use serde::Deserialize;

use crate::csv::format_number;
use crate::error::{CliError, Result};

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    #[serde(default)]
    system: SystemSection,
    #[serde(default)]
    spectral: SpectralSection,
    #[serde(default)]
    grid: GridSection,
    #[serde(default)]
    state: StateSection,
    #[serde(default)]
    outputs: OutputSection,
    #[serde(default)]
    verify: VerifySection,
    sweep: Option<SweepSection>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct SystemSection {
    kappa: Option<f64>,
    lambda: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpectralSection {
    eta: Option<f64>,
    omega_c: Option<f64>,
    n: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct GridSection {
    t_max: Option<f64>,
    dt: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct StateSection {
    kind: Option<String>,
    alpha: Option<f64>,
    alpha_imag: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct OutputSection {
    coeffs: Option<PathBuf>,
    concurrence: Option<PathBuf>,
    sweep_dir: Option<PathBuf>,
    companion: Option<bool>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct VerifySection {
    cutoff: Option<usize>,
    t_max: Option<f64>,
    stride: Option<usize>,
    compare_every: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct SweepSection {
    command: Option<String>,
    kappa: Option<Vec<f64>>,
    lambda: Option<Vec<f64>>,
    eta: Option<Vec<f64>>,
    omega_c: Option<Vec<f64>>,
    n: Option<Vec<f64>>,
    alpha: Option<Vec<f64>>,
    kind: Option<Vec<String>>,
}

/// What a sweep point emits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepCommand {
    Coeffs,
    Concurrence,
}

impl SweepCommand {
    pub fn name(self) -> &'static str {
        match self {
            Self::Coeffs => "coeffs",
            Self::Concurrence => "concurrence",
        }
    }
}

impl FromStr for SweepCommand {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "coeffs" => Ok(Self::Coeffs),
            "concurrence" => Ok(Self::Concurrence),
            other => Err(CliError::Config(format!("sweep command must be coeffs or concurrence, got {other:?}"))),
        }
    }
}

/// A sweepable parameter, in the fixed order used to enumerate the product.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Param {
    Kappa,
    Lambda,
    Eta,
    OmegaC,
    N,
    Alpha,
    Kind,
}

impl Param {
    pub fn name(self) -> &'static str {
        match self {
            Self::Kappa => "kappa",
            Self::Lambda => "lambda",
            Self::Eta => "eta",
            Self::OmegaC => "omega_c",
            Self::N => "n",
            Self::Alpha => "alpha",
            Self::Kind => "kind",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Value {
    Number(f64),
    Lambda(PhaseBranch),
    Kind(EcsKind),
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Number(v) => f.write_str(&format_number(*v)),
            Self::Lambda(l) => write!(f, "{l}"),
            Self::Kind(k) => write!(f, "{k}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub command: SweepCommand,
    pub ranges: Vec<(Param, Vec<Value>)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outputs {
    pub coeffs: PathBuf,
    pub concurrence: PathBuf,
    pub sweep_dir: PathBuf,
    pub companion: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifySettings {
    pub cutoff: usize,
    pub t_max: f64,
    pub stride: usize,
    pub compare_every: usize,
}

/// Fully resolved and validated run parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub kappa: f64,
    pub lambda: PhaseBranch,
    pub eta: f64,
    pub omega_c: f64,
    pub n: f64,
    pub t_max: f64,
    pub dt: f64,
    pub kind: EcsKind,
    pub alpha: Complex64,
    pub outputs: Outputs,
    pub verify: VerifySettings,
    pub sweep: Option<SweepSpec>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            kappa: 0.5,
            lambda: PhaseBranch::InPhase,
            eta: 0.005,
            omega_c: 30.0,
            n: 1.0,
            t_max: 10.0,
            dt: 2e-3,
            kind: EcsKind::PhiMinus,
            alpha: Complex64::new(0.8, 0.0),
            outputs: Outputs {
                coeffs: "coeffs.csv".into(),
                concurrence: "concurrence.csv".into(),
                sweep_dir: "sweep".into(),
                companion: false,
            },
            verify: VerifySettings { cutoff: 16, t_max: 5.0, stride: 1, compare_every: 125 },
            sweep: None,
        }
    }
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub kappa: Option<f64>,
    pub lambda: Option<f64>,
    pub eta: Option<f64>,
    pub omega_c: Option<f64>,
    pub n: Option<f64>,
    pub t_max: Option<f64>,
    pub dt: Option<f64>,
    pub kind: Option<EcsKind>,
    pub alpha: Option<f64>,
    pub alpha_imag: Option<f64>,
}

fn kind(s: &str) -> Result<EcsKind> {
    s.parse().map_err(|e: decoherence_core::Error| CliError::Config(e.to_string()))
}

fn lambda(v: f64) -> Result<PhaseBranch> {
    PhaseBranch::from_sign(v).map_err(|e| CliError::Config(e.to_string()))
}

fn set<T>(slot: &mut T, v: Option<T>) {
    if let Some(v) = v {
        *slot = v;
    }
}

impl RunConfig {
    /// Parses configuration text without validating it.
    fn from_text(text: &str) -> Result<Self> {
        let file: FileConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        let mut c = Self::default();
        set(&mut c.kappa, file.system.kappa);
        set(&mut c.lambda, file.system.lambda.map(lambda).transpose()?);
        set(&mut c.eta, file.spectral.eta);
        set(&mut c.omega_c, file.spectral.omega_c);
        set(&mut c.n, file.spectral.n);
        set(&mut c.t_max, file.grid.t_max);
        set(&mut c.dt, file.grid.dt);
        set(&mut c.kind, file.state.kind.as_deref().map(kind).transpose()?);
        set(&mut c.alpha.re, file.state.alpha);
        set(&mut c.alpha.im, file.state.alpha_imag);
        set(&mut c.outputs.coeffs, file.outputs.coeffs);
        set(&mut c.outputs.concurrence, file.outputs.concurrence);
        set(&mut c.outputs.sweep_dir, file.outputs.sweep_dir);
        set(&mut c.outputs.companion, file.outputs.companion);
        set(&mut c.verify.cutoff, file.verify.cutoff);
        set(&mut c.verify.t_max, file.verify.t_max);
        set(&mut c.verify.stride, file.verify.stride);
        set(&mut c.verify.compare_every, file.verify.compare_every);
        c.sweep = file.sweep.map(SweepSpec::from_section).transpose()?;
        Ok(c)
    }

    /// Reads `path` (or starts from the defaults), applies `overrides` and validates.
    pub fn load(path: Option<&Path>, overrides: &Overrides) -> Result<Self> {
        let mut c = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| CliError::io(p, e))?;
                Self::from_text(&text)?
            }
            None => Self::default(),
        };
        c.apply(overrides)?;
        c.validate()?;
        Ok(c)
    }

    /// Parses and validates configuration text.
    pub fn parse(text: &str, overrides: &Overrides) -> Result<Self> {
        let mut c = Self::from_text(text)?;
        c.apply(overrides)?;
        c.validate()?;
        Ok(c)
    }

    fn apply(&mut self, o: &Overrides) -> Result<()> {
        set(&mut self.kappa, o.kappa);
        set(&mut self.lambda, o.lambda.map(lambda).transpose()?);
        set(&mut self.eta, o.eta);
        set(&mut self.omega_c, o.omega_c);
        set(&mut self.n, o.n);
        set(&mut self.t_max, o.t_max);
        set(&mut self.dt, o.dt);
        set(&mut self.kind, o.kind);
        set(&mut self.alpha.re, o.alpha);
        set(&mut self.alpha.im, o.alpha_imag);
        Ok(())
    }

    /// Re-runs every parameter check of the numerical core.
    pub fn validate(&self) -> Result<()> {
        self.validate_point()?;
        let v = &self.verify;
        if v.stride == 0 || v.compare_every == 0 {
            return Err(CliError::Config("verify stride and compare_every must be positive".into()));
        }
        TimeGrid::new(v.t_max, self.dt)?;
        TimeGrid::new(v.t_max, self.dt * v.stride as f64)?;
        if let Some(sweep) = &self.sweep {
            for point in sweep.points(self) {
                point.config.validate_point()?;
            }
        }
        Ok(())
    }

    fn validate_point(&self) -> Result<()> {
        let env = self.spectral()?;
        self.system()?;
        self.state()?;
        self.grid()?.check_resolution(&MemoryKernel::new(env))?;
        Ok(())
    }

    pub fn system(&self) -> Result<SystemParams> {
        Ok(SystemParams::normalized(self.kappa, self.lambda)?)
    }

    pub fn spectral(&self) -> Result<SpectralParams> {
        Ok(SpectralParams::new(self.eta, self.omega_c, self.n)?)
    }

    pub fn grid(&self) -> Result<TimeGrid> {
        Ok(TimeGrid::new(self.t_max, self.dt)?)
    }

    pub fn state(&self) -> Result<EcsState> {
        Ok(EcsState::new(self.kind, self.alpha)?)
    }

    pub fn oracle_settings(&self) -> OracleSettings {
        OracleSettings {
            dt: self.dt,
            t_max: self.verify.t_max,
            stride: self.verify.stride,
            compare_every: self.verify.compare_every,
            cutoff: self.verify.cutoff,
        }
    }

    fn with(&self, param: Param, value: Value) -> Self {
        let mut c = self.clone();
        c.sweep = None;
        match (param, value) {
            (Param::Kind, Value::Kind(k)) => c.kind = k,
            (Param::Kappa, Value::Number(v)) => c.kappa = v,
            (Param::Lambda, Value::Lambda(l)) => c.lambda = l,
            (Param::Eta, Value::Number(v)) => c.eta = v,
            (Param::OmegaC, Value::Number(v)) => c.omega_c = v,
            (Param::N, Value::Number(v)) => c.n = v,
            (Param::Alpha, Value::Number(v)) => c.alpha.re = v,
            (p, v) => unreachable!("{v} is not a value of {}", p.name()),
        }
        c
    }

    /// Command line that regenerates this run with `command`.
    pub fn command_line(&self, command: SweepCommand) -> String {
        let mut s = format!(
            "decoherence {} --kappa {} --lambda {} --eta {} --omega-c {} --ohmicity {} --t-max {} --dt {} --kind {} --alpha {} --alpha-imag {}",
            command.name(),
            format_number(self.kappa),
            self.lambda,
            format_number(self.eta),
            format_number(self.omega_c),
            format_number(self.n),
            format_number(self.t_max),
            format_number(self.dt),
            self.kind,
            format_number(self.alpha.re),
            format_number(self.alpha.im),
        );
        if command == SweepCommand::Concurrence && self.outputs.companion {
            s.push_str(" --companion");
        }
        s
    }
}

impl SweepSpec {
    fn from_section(s: SweepSection) -> Result<Self> {
        let command = s.command.as_deref().unwrap_or("concurrence").parse()?;
        let numbers = |v: Option<Vec<f64>>| v.map(|v| v.into_iter().map(Value::Number).collect::<Vec<_>>());
        let kinds = s
            .kind
            .map(|v| v.iter().map(|k| kind(k).map(Value::Kind)).collect::<Result<Vec<_>>>())
            .transpose()?;
        let lambdas = s
            .lambda
            .map(|v| v.into_iter().map(|l| lambda(l).map(Value::Lambda)).collect::<Result<Vec<_>>>())
            .transpose()?;
        let ranges: Vec<(Param, Vec<Value>)> = [
            (Param::Kappa, numbers(s.kappa)),
            (Param::Lambda, lambdas),
            (Param::Eta, numbers(s.eta)),
            (Param::OmegaC, numbers(s.omega_c)),
            (Param::N, numbers(s.n)),
            (Param::Alpha, numbers(s.alpha)),
            (Param::Kind, kinds),
        ]
        .into_iter()
        .filter_map(|(p, v)| v.map(|v| (p, v)))
        .collect();
        if ranges.is_empty() {
            return Err(CliError::Config("sweep lists no parameter ranges".into()));
        }
        if let Some((p, _)) = ranges.iter().find(|(_, v)| v.is_empty()) {
            return Err(CliError::Config(format!("sweep range for {} is empty", p.name())));
        }
        Ok(Self { command, ranges })
    }

    /// Cartesian product, last parameter varying fastest.
    pub fn points(&self, base: &RunConfig) -> Vec<SweepPoint> {
        let mut points = vec![SweepPoint { config: base.with_sweep_cleared(), tags: Vec::new() }];
        for (param, values) in &self.ranges {
            points = points
                .into_iter()
                .flat_map(|p| {
                    values.iter().map(move |&v| {
                        let mut tags = p.tags.clone();
                        tags.push((*param, v));
                        SweepPoint { config: p.config.with(*param, v), tags }
                    })
                })
                .collect();
        }
        points
    }
}

impl RunConfig {
    fn with_sweep_cleared(&self) -> Self {
        Self { sweep: None, ..self.clone() }
    }
}

/// One run of a sweep with the values that distinguish it.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub config: RunConfig,
    pub tags: Vec<(Param, Value)>,
}

impl SweepPoint {
    /// Deterministic file name, e.g. `0003_lambda=-1_kind=phi_plus.csv`.
    pub fn file_name(&self, index: usize) -> String {
        let mut name = format!("{index:04}");
        for (p, v) in &self.tags {
            name.push_str(&format!("_{}={v}", p.name()));
        }
        name.push_str(".csv");
        name
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        let c = RunConfig::parse("", &Overrides::default()).unwrap();
        assert_eq!(c, RunConfig::default());
    }

    #[test]
    fn file_values_and_overrides() {
        let text = "[system]\nkappa = 0.25\nlambda = -1\n[spectral]\neta = 0\n[state]\nkind = \"psi_plus\"\n";
        let c = RunConfig::parse(text, &Overrides::default()).unwrap();
        assert_eq!(c.kappa, 0.25);
        assert_eq!(c.lambda, PhaseBranch::OutOfPhase);
        assert_eq!(c.eta, 0.0);
        assert_eq!(c.kind, EcsKind::PsiPlus);
        let o = Overrides { kappa: Some(0.1), lambda: Some(1.0), ..Overrides::default() };
        let c = RunConfig::parse(text, &o).unwrap();
        assert_eq!((c.kappa, c.lambda), (0.1, PhaseBranch::InPhase));
    }

    #[test]
    fn rejects_bad_input() {
        for text in [
            "[system]\nomega0 = 2\n",
            "[nonsense]\n",
            "[system]\nlambda = 0.5\n",
            "[state]\nkind = \"chi\"\n",
            "[spectral]\neta = -1\n",
            "[grid]\ndt = 0.003\nt_max = 0.01\n",
            "[state]\nkind = \"psi_minus\"\nalpha = 0\n",
            "[verify]\nstride = 0\n",
            "[sweep]\nlambda = []\n",
            "[sweep]\ncommand = \"coeffs\"\n",
            "[sweep]\ncommand = \"plot\"\nkappa = [1]\n",
            "kappa = 0.5\n",
        ] {
            let err = RunConfig::parse(text, &Overrides::default()).unwrap_err();
            assert_eq!(err.exit_code(), 1, "{text:?}: {err}");
        }
        // dt too coarse for the cutoff
        let o = Overrides { omega_c: Some(100.0), ..Overrides::default() };
        assert!(RunConfig::parse("", &o).is_err());
    }

    #[test]
    fn sweep_product_order_and_names() {
        let text = "[sweep]\nkind = [\"psi_plus\", \"phi_minus\"]\nlambda = [1, -1]\n";
        let c = RunConfig::parse(text, &Overrides::default()).unwrap();
        let points = c.sweep.as_ref().unwrap().points(&c);
        let names: Vec<_> = points.iter().enumerate().map(|(i, p)| p.file_name(i)).collect();
        assert_eq!(
            names,
            [
                "0000_lambda=+1_kind=psi_plus.csv",
                "0001_lambda=+1_kind=phi_minus.csv",
                "0002_lambda=-1_kind=psi_plus.csv",
                "0003_lambda=-1_kind=phi_minus.csv",
            ]
        );
        assert_eq!(points[2].config.lambda, PhaseBranch::OutOfPhase);
        assert_eq!(points[3].config.kind, EcsKind::PhiMinus);
        assert!(points.iter().all(|p| p.config.sweep.is_none()));
    }

    #[test]
    fn command_line_round_trips_through_overrides() {
        let c = RunConfig { kappa: 0.3, eta: 0.01, alpha: Complex64::new(0.7, 0.1), ..RunConfig::default() };
        let line = c.command_line(SweepCommand::Coeffs);
        assert_eq!(
            line,
            "decoherence coeffs --kappa 0.3 --lambda +1 --eta 0.01 --omega-c 30 --ohmicity 1 --t-max 10 --dt 0.002 --kind phi_minus --alpha 0.7 --alpha-imag 0.1"
        );
    }
}
