use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dynamics::ImperfectionSpec;
use crate::error::{Error, Result};
use crate::experiment::{self, DEFAULT_BOOTSTRAP, DEFAULT_GRID_POINTS, DEFAULT_GRID_SPAN, DEFAULT_SHOTS};
use crate::statespace::{thermal_cavity, ThermalSpec, DEFAULT_N_MAX};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Run,
    Sweep,
    Mc,
    Validate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSpec {
    pub points: usize,
    /// Half-width of the `delta_beta_tilde` range.
    pub span: f64,
    /// Explicit `p_e` values; overrides `points` and `span` when set.
    pub p_e: Option<Vec<f64>>,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            points: DEFAULT_GRID_POINTS,
            span: DEFAULT_GRID_SPAN,
            p_e: None,
        }
    }
}

/// Everything one invocation needs. Loaded from TOML, then overridden by
/// command-line flags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProtocolConfig {
    pub mode: Mode,
    pub p_e: f64,
    pub n_th: f64,
    pub n_max: usize,
    pub demon: bool,
    /// Switches every imperfection channel off.
    pub ideal: bool,
    pub imperfections: ImperfectionSpec,
    pub grid: GridSpec,
    pub shots: u64,
    pub bootstrap: usize,
    pub seed: u64,
    pub out: PathBuf,
    pub format: OutputFormat,
}

impl Default for ProtocolConfig {
    fn default() -> Self {
        ProtocolConfig {
            mode: Mode::Run,
            p_e: 0.5,
            n_th: 0.63,
            n_max: DEFAULT_N_MAX,
            demon: true,
            ideal: false,
            imperfections: ImperfectionSpec::default(),
            grid: GridSpec::default(),
            shots: DEFAULT_SHOTS,
            bootstrap: DEFAULT_BOOTSTRAP,
            seed: 0,
            out: PathBuf::from("out"),
            format: OutputFormat::Csv,
        }
    }
}

/// Flag values that take precedence over the file.
#[derive(Debug, Clone, Default, clap::Args)]
pub struct Overrides {
    /// TOML configuration file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<OutputFormat>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Reference protocol without the read-out pulse.
    #[arg(long)]
    pub no_demon: bool,
    /// Disable every imperfection channel.
    #[arg(long)]
    pub ideal: bool,
    /// Echo the effective configuration and exit.
    #[arg(long)]
    pub print_config: bool,
    #[arg(long = "p-e")]
    pub p_e: Option<f64>,
    #[arg(long = "n-th")]
    pub n_th: Option<f64>,
    #[arg(long = "n-max")]
    pub n_max: Option<usize>,
    #[arg(long)]
    pub eta: Option<f64>,
    #[arg(long = "eps-det")]
    pub eps_det: Option<f64>,
    #[arg(long = "p-det")]
    pub p_det: Option<f64>,
    #[arg(long = "t-flight")]
    pub t_flight: Option<f64>,
    #[arg(long = "t-atom")]
    pub t_atom: Option<f64>,
    #[arg(long = "t-cav")]
    pub t_cav: Option<f64>,
    #[arg(long = "n-env")]
    pub n_env: Option<f64>,
    #[arg(long)]
    pub shots: Option<u64>,
    #[arg(long)]
    pub bootstrap: Option<usize>,
    #[arg(long = "grid-points")]
    pub grid_points: Option<usize>,
    #[arg(long = "grid-span")]
    pub grid_span: Option<f64>,
}

fn unknown_key(message: &str) -> Option<String> {
    let rest = message.split("unknown field `").nth(1)?;
    Some(rest.split('`').next()?.to_string())
}

impl ProtocolConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| {
            let message = e.message().to_string();
            let key = unknown_key(&message).unwrap_or_else(|| "<file>".to_string());
            Error::Config { key, message }
        })
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        ProtocolConfig::from_toml_str(&text)
    }

    pub fn apply(&mut self, o: &Overrides) {
        macro_rules! set {
            ($src:expr => $dst:expr) => {
                if let Some(v) = $src.clone() {
                    $dst = v;
                }
            };
        }
        set!(o.out => self.out);
        set!(o.format => self.format);
        set!(o.seed => self.seed);
        set!(o.p_e => self.p_e);
        set!(o.n_th => self.n_th);
        set!(o.n_max => self.n_max);
        set!(o.eta => self.imperfections.eta_readout);
        set!(o.eps_det => self.imperfections.eps_det);
        set!(o.p_det => self.imperfections.p_det);
        set!(o.t_flight => self.imperfections.t_flight);
        set!(o.t_atom => self.imperfections.t_atom);
        set!(o.t_cav => self.imperfections.t_cav);
        set!(o.n_env => self.imperfections.n_env);
        set!(o.shots => self.shots);
        set!(o.bootstrap => self.bootstrap);
        set!(o.grid_points => self.grid.points);
        set!(o.grid_span => self.grid.span);
        if o.no_demon {
            self.demon = false;
        }
        if o.ideal {
            self.ideal = true;
        }
    }

    /// Imperfections with the `ideal` switch folded in.
    pub fn effective_imperfections(&self) -> ImperfectionSpec {
        if self.ideal {
            ImperfectionSpec {
                readout_loss: false,
                atom_relaxation: false,
                cavity_relaxation: false,
                detection_error: false,
                detection_loss: false,
                ..self.imperfections
            }
        } else {
            self.imperfections
        }
    }

    pub fn thermal_spec(&self) -> Result<ThermalSpec> {
        ThermalSpec::new(self.p_e, self.n_th, self.n_max)
    }

    pub fn grid_values(&self) -> Vec<f64> {
        match &self.grid.p_e {
            Some(values) => values.clone(),
            None => experiment::delta_beta_tilde_grid(self.n_th, self.grid.points, self.grid.span),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let named = |e: Error| match e {
            Error::InvalidParameter { name, value, reason } => Error::Config {
                key: name.to_string(),
                message: format!("{value} is out of range: {reason}"),
            },
            Error::Truncation { n_max, tail, required } => Error::Config {
                key: "n_max".to_string(),
                message: format!("{n_max} leaves P(n_max) = {tail:.3e}; use n_max >= {required}"),
            },
            other => other,
        };
        self.thermal_spec().map_err(named)?;
        thermal_cavity(self.n_th, self.n_max).map_err(named)?;
        self.imperfections.validate().map_err(named)?;
        let bad = |key: &str, message: &str| {
            Err(Error::Config {
                key: key.to_string(),
                message: message.to_string(),
            })
        };
        if self.shots == 0 {
            return bad("shots", "must be at least 1");
        }
        if self.bootstrap < 100 {
            return bad("bootstrap", "must be at least 100");
        }
        if self.grid.points == 0 {
            return bad("grid.points", "must be at least 1");
        }
        if !(self.grid.span > 0.0) || !self.grid.span.is_finite() {
            return bad("grid.span", "must be positive");
        }
        if let Some(values) = &self.grid.p_e {
            if values.is_empty() {
                return bad("grid.p_e", "must not be empty");
            }
        }
        for p_e in self.grid_values() {
            if !(p_e > 0.0 && p_e < 1.0) {
                return bad("grid.p_e", "grid values must lie strictly inside (0, 1)");
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("config serializes")
    }
}

/// Loads the file (if any), applies flag overrides and validates.
pub fn parse_config(overrides: &Overrides) -> Result<ProtocolConfig> {
    let mut config = match &overrides.config {
        Some(path) => ProtocolConfig::from_file(path)?,
        None => ProtocolConfig::default(),
    };
    config.apply(overrides);
    config.validate()?;
    Ok(config)
}
