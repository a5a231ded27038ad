use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use gldef::warped::GridPolicy;
use gldef::{GlError, Result};

#[derive(Debug, Parser)]
#[command(name = "gldef", version, about = "Build and verify positive scalar curvature deformations of warped metrics")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub options: Options,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Subcommand, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    /// Torpedo profile and its curvature report.
    Torpedo,
    /// Two-bend curve, its neck curvature and the homotopy to the axis.
    Bend,
    /// Collar constants and the collar-creating family.
    Collar,
    /// Deformation into locally torpedo form and the retraction.
    Retract,
    /// Deformation of an annulus to a product.
    Annulus,
    /// Curvature report for a profile.
    Verify,
    /// Square-root isometry between two inner products.
    Sqrt,
    /// Stretched cylinder over a path of round fibres.
    Stretch,
}

/// Every setting, from flags or a JSON config file; flags win.
#[derive(Clone, Debug, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Options {
    /// Disc dimension n.
    #[arg(long, global = true)]
    pub dim: Option<usize>,
    /// Codimension k of the neck, or fibre sphere dimension plus one.
    #[arg(long, global = true)]
    pub codim: Option<usize>,
    /// Scalar curvature of the base of the neck.
    #[arg(long = "kappa-N", global = true, allow_hyphen_values = true)]
    #[serde(rename = "kappa_N")]
    pub kappa_n: Option<f64>,
    /// Scalar curvature floor B.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub floor: Option<f64>,
    /// Uniform points of the verification grid.
    #[arg(long, global = true)]
    pub grid: Option<usize>,
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    #[arg(long = "lambda-samples", global = true)]
    pub lambda_samples: Option<usize>,
    /// Input profile (.csv with t,g,f or .json descriptor) or matrix.
    #[arg(long = "in", global = true)]
    #[serde(rename = "in")]
    pub input: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// JSON config file.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// Torpedo radius, or start radius of the stretch path.
    #[arg(long, global = true)]
    pub eps: Option<f64>,
    /// End radius of the stretch path.
    #[arg(long, global = true)]
    pub eps0: Option<f64>,
    #[arg(long, global = true)]
    pub r0: Option<f64>,
    /// Target radius of the horizontal run.
    #[arg(long, global = true)]
    pub r4: Option<f64>,
    /// Bump height of the default test annulus.
    #[arg(long, global = true)]
    pub amp: Option<f64>,
    /// Second inner product for `sqrt`.
    #[arg(long, global = true)]
    pub g2: Option<PathBuf>,
    #[arg(long = "tau-max", global = true)]
    pub tau_max: Option<f64>,
}

impl Options {
    /// `self` with unset fields taken from `other`.
    pub fn or(self, other: Options) -> Options {
        Options {
            dim: self.dim.or(other.dim),
            codim: self.codim.or(other.codim),
            kappa_n: self.kappa_n.or(other.kappa_n),
            floor: self.floor.or(other.floor),
            grid: self.grid.or(other.grid),
            tol: self.tol.or(other.tol),
            lambda_samples: self.lambda_samples.or(other.lambda_samples),
            input: self.input.or(other.input),
            out: self.out.or(other.out),
            seed: self.seed.or(other.seed),
            config: self.config.or(other.config),
            eps: self.eps.or(other.eps),
            eps0: self.eps0.or(other.eps0),
            r0: self.r0.or(other.r0),
            r4: self.r4.or(other.r4),
            amp: self.amp.or(other.amp),
            g2: self.g2.or(other.g2),
            tau_max: self.tau_max.or(other.tau_max),
        }
    }
}

/// Resolved settings of one run.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PipelineConfig {
    pub command: Command,
    pub dim: usize,
    pub codim: usize,
    #[serde(rename = "kappa_N")]
    pub kappa_n: f64,
    pub floor: f64,
    pub grid: usize,
    pub tol: f64,
    pub lambda_samples: usize,
    /// Whether `dim` came from a flag or the config file rather than the default.
    #[serde(skip)]
    pub dim_set: bool,
    #[serde(rename = "in")]
    pub input: Option<PathBuf>,
    #[serde(skip)]
    pub out: PathBuf,
    pub seed: u64,
    pub eps: f64,
    pub eps0: f64,
    pub r0: f64,
    pub r4: f64,
    pub amp: f64,
    pub g2: Option<PathBuf>,
    pub tau_max: f64,
}

fn bad(msg: String) -> GlError {
    GlError::InvalidParameter(msg)
}

impl PipelineConfig {
    pub fn resolve(command: Command, flags: Options) -> Result<PipelineConfig> {
        let file = match &flags.config {
            Some(p) => read_config(p)?,
            None => Options::default(),
        };
        let o = flags.or(file);
        let cfg = PipelineConfig {
            command,
            dim: o.dim.unwrap_or(5),
            codim: o.codim.unwrap_or(3),
            kappa_n: o.kappa_n.unwrap_or(0.0),
            floor: o.floor.unwrap_or(0.0),
            grid: o.grid.unwrap_or(2048),
            tol: o.tol.unwrap_or(1e-9),
            lambda_samples: o.lambda_samples.unwrap_or(33),
            dim_set: o.dim.is_some(),
            input: o.input,
            out: o.out.unwrap_or_else(|| PathBuf::from("out")),
            seed: o.seed.unwrap_or(0),
            eps: o.eps.unwrap_or(1.0),
            eps0: o.eps0.unwrap_or(1.0),
            r0: o.r0.unwrap_or(1.0),
            r4: o.r4.unwrap_or(1e-3),
            amp: o.amp.unwrap_or(0.01),
            g2: o.g2,
            tau_max: o.tau_max.unwrap_or(1e6),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        use Command::*;
        if matches!(self.command, Torpedo | Collar | Retract | Annulus | Verify) && self.dim < 3 {
            return Err(bad(format!("--dim must be at least 3, got {}", self.dim)));
        }
        if matches!(self.command, Bend | Stretch) && self.codim < 3 {
            return Err(bad(format!("--codim must be at least 3, got {}", self.codim)));
        }
        if self.grid < 16 {
            return Err(bad(format!("--grid must be at least 16, got {}", self.grid)));
        }
        if self.lambda_samples == 0 {
            return Err(bad("--lambda-samples must be positive".into()));
        }
        let positive = [("tol", self.tol), ("eps", self.eps), ("eps0", self.eps0), ("r0", self.r0), ("r4", self.r4), ("tau-max", self.tau_max)];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(bad(format!("--{name} must be positive and finite, got {v}")));
            }
        }
        if !self.floor.is_finite() || !self.kappa_n.is_finite() || !self.amp.is_finite() {
            return Err(bad("--floor, --kappa-N and --amp must be finite".into()));
        }
        Ok(())
    }

    pub fn policy(&self) -> GridPolicy {
        GridPolicy::with_uniform(self.grid)
    }

    /// `λ_i = i / (m - 1)` with `m = max(samples, 2)`: one sample keeps only the endpoints.
    pub fn lambdas(&self) -> Vec<f64> {
        let m = self.lambda_samples.max(2);
        (0..m).map(|i| i as f64 / (m - 1) as f64).collect()
    }

    pub fn out_path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }
}

fn read_config(path: &Path) -> Result<Options> {
    let text = std::fs::read_to_string(path).map_err(|e| GlError::Io(format!("{}: {e}", path.display())))?;
    Ok(serde_json::from_str(&text)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Cli {
        Cli::try_parse_from(std::iter::once("gldef").chain(args.iter().copied())).unwrap()
    }

    #[test]
    fn flags_win_over_config() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("cfg.json");
        std::fs::write(&p, r#"{"dim": 7, "floor": 2.5, "kappa_N": -1.0}"#).unwrap();
        let cli = parse(&["torpedo", "--dim", "4", "--config", p.to_str().unwrap()]);
        let cfg = PipelineConfig::resolve(cli.command, cli.options).unwrap();
        assert_eq!((cfg.dim, cfg.floor, cfg.kappa_n), (4, 2.5, -1.0));
    }

    #[test]
    fn negative_values_and_validation() {
        let cli = parse(&["bend", "--kappa-N", "-1e6", "--codim", "3"]);
        assert_eq!(cli.options.kappa_n, Some(-1e6));
        let cli = parse(&["torpedo", "--eps", "0"]);
        assert!(PipelineConfig::resolve(cli.command, cli.options).is_err());
        let cli = parse(&["bend", "--codim", "2"]);
        assert!(PipelineConfig::resolve(cli.command, cli.options).is_err());
    }

    #[test]
    fn lambda_grid() {
        let cli = parse(&["bend", "--lambda-samples", "1"]);
        let cfg = PipelineConfig::resolve(cli.command, cli.options).unwrap();
        assert_eq!(cfg.lambdas(), vec![0.0, 1.0]);
        let cli = parse(&["bend", "--lambda-samples", "5"]);
        let cfg = PipelineConfig::resolve(cli.command, cli.options).unwrap();
        assert_eq!(cfg.lambdas(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
    }
}
