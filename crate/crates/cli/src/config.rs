use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use monolil_core::chernoff::{DEFAULT_HALF_WIDTH, DEFAULT_STEP};
use monolil_core::harness::{DensityName, DEFAULT_GROWTH};
use monolil_core::strassen::{DEFAULT_ETA, DEFAULT_HALF_RANGE};

use crate::output::Format;

#[derive(Debug, Parser)]
#[command(
    name = "monolil",
    version,
    about = "Grenander estimator and LIL experiments"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    /// Directory receiving the output tables.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
    pub format: FormatArg,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FormatArg {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DensityArg {
    Exp1,
    ParetoLike,
    Triangular,
}

impl From<DensityArg> for DensityName {
    fn from(d: DensityArg) -> Self {
        match d {
            DensityArg::Exp1 => DensityName::Exp1,
            DensityArg::ParetoLike => DensityName::ParetoLike,
            DensityArg::Triangular => DensityName::Triangular,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Argmin,
    Slope,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LilMode {
    /// Normalized statistic along one growing sample.
    Trace,
    /// Limit distribution of the density estimate.
    Distribution,
    /// Limit distribution of the mixing estimate.
    Mixing,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit the Grenander and mixing estimators to a simulated or given sample.
    Estimate {
        #[arg(long, value_enum, default_value_t = DensityArg::Exp1)]
        density: DensityArg,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Observations, one per line; `#` starts a comment.
        #[arg(long, conflicts_with_all = ["n", "seed"])]
        input: Option<PathBuf>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Draw Chernoff's Z by grid argmin and/or hull slope.
    Chernoff {
        /// Number of draws per method.
        #[arg(long, default_value_t = 10_000)]
        n: usize,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long = "grid-L", default_value_t = DEFAULT_HALF_WIDTH)]
        grid_l: f64,
        #[arg(long = "grid-delta", default_value_t = DEFAULT_STEP)]
        grid_delta: f64,
        #[arg(long, value_enum, default_value_t = MethodArg::Both)]
        method: MethodArg,
        /// Also write the Airy tail comparison table.
        #[arg(long)]
        tail: bool,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Solve the minimal-energy problem and bisect for M.
    Strassen {
        #[arg(long = "grid-eta", default_value_t = DEFAULT_ETA)]
        grid_eta: f64,
        #[arg(long = "grid-H", default_value_t = DEFAULT_HALF_RANGE)]
        grid_h: f64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// LIL trace or limit-distribution check on an example density.
    Lil {
        #[arg(long, value_enum, default_value_t = DensityArg::Exp1)]
        density: DensityArg,
        #[arg(long, value_enum, default_value_t = LilMode::Trace)]
        mode: LilMode,
        /// Largest sample size of a trace.
        #[arg(long = "n-max", default_value_t = 1_000_000)]
        n_max: usize,
        #[arg(long, default_value_t = DEFAULT_GROWTH)]
        growth: f64,
        /// Sample size for the distribution checks.
        #[arg(long, default_value_t = 10_000)]
        n: usize,
        #[arg(long, default_value_t = 10_000)]
        replicates: usize,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long = "grid-L", default_value_t = DEFAULT_HALF_WIDTH)]
        grid_l: f64,
        #[arg(long = "grid-delta", default_value_t = DEFAULT_STEP)]
        grid_delta: f64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Check the switching relation exactly on random samples or one given sample.
    Switching {
        /// Number of random samples.
        #[arg(long, default_value_t = 500)]
        replicates: usize,
        /// Largest random sample size.
        #[arg(long = "n-max", default_value_t = 40)]
        n_max: usize,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, conflicts_with_all = ["seed"])]
        input: Option<PathBuf>,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SubcommandName {
    Estimate,
    Chernoff,
    Strassen,
    Lil,
    Switching,
}

impl SubcommandName {
    pub fn as_str(&self) -> &'static str {
        match self {
            SubcommandName::Estimate => "estimate",
            SubcommandName::Chernoff => "chernoff",
            SubcommandName::Strassen => "strassen",
            SubcommandName::Lil => "lil",
            SubcommandName::Switching => "switching",
        }
    }
}

/// Validated run parameters; unset fields do not apply to the subcommand.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub subcommand: SubcommandName,
    pub density: Option<DensityName>,
    pub n: Option<usize>,
    pub n_max: Option<usize>,
    pub replicates: Option<usize>,
    pub seed: Option<u64>,
    pub grid_l: Option<f64>,
    pub grid_delta: Option<f64>,
    pub grid_eta: Option<f64>,
    pub grid_h: Option<f64>,
    pub growth: Option<f64>,
    pub method: Option<MethodArg>,
    pub mode: Option<LilMode>,
    pub tail: bool,
    pub input: Option<PathBuf>,
    pub out: PathBuf,
    pub format: Format,
}

#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn positive(name: &str, v: f64) -> Result<(), ConfigError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(ConfigError(format!("--{name} must be positive (got {v})")))
    }
}

fn at_least_one(name: &str, v: usize) -> Result<(), ConfigError> {
    if v >= 1 {
        Ok(())
    } else {
        Err(ConfigError(format!("--{name} must be at least 1")))
    }
}

fn require_seed(seed: Option<u64>, what: &str) -> Result<u64, ConfigError> {
    seed.ok_or_else(|| ConfigError(format!("--seed is required for {what}")))
}

impl RunConfig {
    fn blank(subcommand: SubcommandName, output: &OutputArgs) -> Self {
        Self {
            subcommand,
            density: None,
            n: None,
            n_max: None,
            replicates: None,
            seed: None,
            grid_l: None,
            grid_delta: None,
            grid_eta: None,
            grid_h: None,
            growth: None,
            method: None,
            mode: None,
            tail: false,
            input: None,
            out: output.out.clone(),
            format: match output.format {
                FormatArg::Csv => Format::Csv,
                FormatArg::Json => Format::Json,
            },
        }
    }

    pub fn from_command(cmd: &Command) -> Result<Self, ConfigError> {
        match cmd {
            Command::Estimate {
                density,
                n,
                seed,
                input,
                output,
            } => {
                let mut c = Self::blank(SubcommandName::Estimate, output);
                if let Some(path) = input {
                    c.input = Some(path.clone());
                } else {
                    let n = n.ok_or_else(|| ConfigError("--n or --input is required".into()))?;
                    at_least_one("n", n)?;
                    c.seed = Some(require_seed(*seed, "simulated samples")?);
                    c.density = Some((*density).into());
                    c.n = Some(n);
                }
                Ok(c)
            }
            Command::Chernoff {
                n,
                seed,
                grid_l,
                grid_delta,
                method,
                tail,
                output,
            } => {
                let mut c = Self::blank(SubcommandName::Chernoff, output);
                at_least_one("n", *n)?;
                positive("grid-L", *grid_l)?;
                positive("grid-delta", *grid_delta)?;
                c.n = Some(*n);
                c.seed = Some(require_seed(*seed, "chernoff")?);
                c.grid_l = Some(*grid_l);
                c.grid_delta = Some(*grid_delta);
                c.method = Some(*method);
                c.tail = *tail;
                Ok(c)
            }
            Command::Strassen {
                grid_eta,
                grid_h,
                output,
            } => {
                let mut c = Self::blank(SubcommandName::Strassen, output);
                positive("grid-eta", *grid_eta)?;
                positive("grid-H", *grid_h)?;
                c.grid_eta = Some(*grid_eta);
                c.grid_h = Some(*grid_h);
                Ok(c)
            }
            Command::Lil {
                density,
                mode,
                n_max,
                growth,
                n,
                replicates,
                seed,
                grid_l,
                grid_delta,
                output,
            } => {
                let mut c = Self::blank(SubcommandName::Lil, output);
                c.density = Some((*density).into());
                c.mode = Some(*mode);
                c.seed = Some(require_seed(*seed, "lil")?);
                match mode {
                    LilMode::Trace => {
                        if *n_max < 100 {
                            return Err(ConfigError("--n-max must be at least 100".into()));
                        }
                        if !(*growth > 1.0 && growth.is_finite()) {
                            return Err(ConfigError("--growth must exceed 1".into()));
                        }
                        c.n_max = Some(*n_max);
                        c.growth = Some(*growth);
                    }
                    LilMode::Distribution | LilMode::Mixing => {
                        at_least_one("n", *n)?;
                        if *replicates < 2 {
                            return Err(ConfigError("--replicates must be at least 2".into()));
                        }
                        positive("grid-L", *grid_l)?;
                        positive("grid-delta", *grid_delta)?;
                        c.n = Some(*n);
                        c.replicates = Some(*replicates);
                        c.grid_l = Some(*grid_l);
                        c.grid_delta = Some(*grid_delta);
                    }
                }
                Ok(c)
            }
            Command::Switching {
                replicates,
                n_max,
                seed,
                input,
                output,
            } => {
                let mut c = Self::blank(SubcommandName::Switching, output);
                if let Some(path) = input {
                    c.input = Some(path.clone());
                } else {
                    at_least_one("replicates", *replicates)?;
                    at_least_one("n-max", *n_max)?;
                    c.replicates = Some(*replicates);
                    c.n_max = Some(*n_max);
                    c.seed = Some(require_seed(*seed, "random switching sweeps")?);
                }
                Ok(c)
            }
        }
    }

    /// Everything that determines the outputs, in a fixed order.
    pub fn metadata(&self) -> Vec<(String, String)> {
        let mut m = vec![
            ("tool".to_string(), "monolil".to_string()),
            ("version".to_string(), env!("CARGO_PKG_VERSION").to_string()),
            ("command".to_string(), self.subcommand.as_str().to_string()),
        ];
        let mut put = |k: &str, v: Option<String>| {
            if let Some(v) = v {
                m.push((k.to_string(), v));
            }
        };
        put("density", self.density.map(|d| d.to_string()));
        put("mode", self.mode.map(|v| mode_name(v).to_string()));
        put("method", self.method.map(|v| method_name(v).to_string()));
        put("n", self.n.map(|v| v.to_string()));
        put("n_max", self.n_max.map(|v| v.to_string()));
        put("growth", self.growth.map(|v| format!("{v:?}")));
        put("replicates", self.replicates.map(|v| v.to_string()));
        put("seed", self.seed.map(|v| v.to_string()));
        put("grid_L", self.grid_l.map(|v| format!("{v:?}")));
        put("grid_delta", self.grid_delta.map(|v| format!("{v:?}")));
        put("grid_eta", self.grid_eta.map(|v| format!("{v:?}")));
        put("grid_H", self.grid_h.map(|v| format!("{v:?}")));
        put(
            "input",
            self.input.as_ref().map(|p| p.display().to_string()),
        );
        if self.subcommand == SubcommandName::Chernoff {
            m.push(("tail".to_string(), self.tail.to_string()));
        }
        m
    }
}

pub fn mode_name(m: LilMode) -> &'static str {
    match m {
        LilMode::Trace => "trace",
        LilMode::Distribution => "distribution",
        LilMode::Mixing => "mixing",
    }
}

pub fn method_name(m: MethodArg) -> &'static str {
    match m {
        MethodArg::Argmin => "argmin",
        MethodArg::Slope => "slope",
        MethodArg::Both => "both",
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Result<RunConfig, ConfigError> {
        let cli = Cli::try_parse_from(std::iter::once("monolil").chain(args.iter().copied()))
            .expect("parses");
        RunConfig::from_command(&cli.command)
    }

    #[test]
    fn simulation_requires_seed() {
        assert!(parse(&["chernoff"]).is_err());
        assert!(parse(&["lil"]).is_err());
        assert!(parse(&["estimate", "--n", "10"]).is_err());
        assert!(parse(&["switching"]).is_err());
        assert!(parse(&["strassen"]).is_ok());
        assert!(parse(&["estimate", "--input", "x.txt"]).is_ok());
    }

    #[test]
    fn nonpositive_grids_rejected() {
        assert!(parse(&["chernoff", "--seed", "1", "--grid-delta", "0"]).is_err());
        assert!(parse(&["strassen", "--grid-eta=-1"]).is_err());
        assert!(parse(&["lil", "--seed", "1", "--n-max", "50"]).is_err());
    }

    #[test]
    fn metadata_lists_set_fields_in_order() {
        let c = parse(&["chernoff", "--seed", "9", "--n", "5"]).unwrap();
        let keys: Vec<String> = c.metadata().into_iter().map(|(k, _)| k).collect();
        assert_eq!(
            keys,
            [
                "tool",
                "version",
                "command",
                "method",
                "n",
                "seed",
                "grid_L",
                "grid_delta",
                "tail"
            ]
        );
    }
}
