//! Run configuration: command-line flags merged over an optional TOML file.

use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::Deserialize;

use crate::conv::CirculantSize;
use crate::error::{Error, Result};

/// Default memory cap of the dense-oracle commands.
pub const DEFAULT_MEMORY_CAP: u64 = 2 << 30;

/// Environment variable holding the worker thread count.
pub const THREADS_ENV: &str = "CROSSCONV_NUM_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum KernelKind {
    #[default]
    Newton,
    Yukawa,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum DensityKind {
    #[default]
    Slater,
    Gaussian,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize, Default)]
pub enum CirculantArg {
    #[default]
    #[value(name = "2n-1")]
    #[serde(rename = "2n-1")]
    Odd,
    #[value(name = "2n")]
    #[serde(rename = "2n")]
    Even,
}

impl From<CirculantArg> for CirculantSize {
    fn from(c: CirculantArg) -> Self {
        match c {
            CirculantArg::Odd => CirculantSize::Odd,
            CirculantArg::Even => CirculantSize::Even,
        }
    }
}

impl CirculantArg {
    pub fn label(self) -> &'static str {
        match self {
            CirculantArg::Odd => "2n-1",
            CirculantArg::Even => "2n",
        }
    }
}

/// Flags shared by all commands. Every field is optional so that values
/// from `--config` can fill the gaps.
#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CommonArgs {
    /// Mode sizes (comma separated).
    #[arg(long, value_delimiter = ',', global = true)]
    #[serde(default, deserialize_with = "one_or_many")]
    pub n: Option<Vec<usize>>,
    /// Dimensions (comma separated).
    #[arg(long, value_delimiter = ',', global = true)]
    #[serde(default, deserialize_with = "one_or_many")]
    pub d: Option<Vec<usize>>,
    /// Half width of the box `[-L, L]^3`.
    #[arg(long = "L", global = true)]
    #[serde(rename = "L")]
    pub half_width: Option<f64>,
    /// Accuracies (comma separated).
    #[arg(long, value_delimiter = ',', global = true)]
    #[serde(default, deserialize_with = "one_or_many")]
    pub eps: Option<Vec<f64>>,
    #[arg(long, value_enum, global = true)]
    pub kernel: Option<KernelKind>,
    /// Yukawa decay rate.
    #[arg(long, global = true)]
    pub kappa: Option<f64>,
    #[arg(long, value_enum, global = true)]
    pub density: Option<DensityKind>,
    /// Slater exponent.
    #[arg(long, global = true)]
    pub zeta: Option<f64>,
    /// Gaussian exponent.
    #[arg(long, global = true)]
    pub alpha: Option<f64>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Report path; standard output when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, global = true)]
    pub format: Option<Format>,
    #[arg(long, global = true)]
    pub max_rank: Option<usize>,
    #[arg(long, value_enum, global = true)]
    pub circulant_size: Option<CirculantArg>,
}

fn one_or_many<'de, D, T>(de: D) -> std::result::Result<Option<Vec<T>>, D::Error>
where
    D: serde::Deserializer<'de>,
    T: Deserialize<'de>,
{
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum OneOrMany<T> {
        One(T),
        Many(Vec<T>),
    }
    Ok(Option::<OneOrMany<T>>::deserialize(de)?.map(|v| match v {
        OneOrMany::One(x) => vec![x],
        OneOrMany::Many(xs) => xs,
    }))
}

impl CommonArgs {
    /// Fills unset fields from `other`.
    pub fn or(self, other: CommonArgs) -> CommonArgs {
        CommonArgs {
            n: self.n.or(other.n),
            d: self.d.or(other.d),
            half_width: self.half_width.or(other.half_width),
            eps: self.eps.or(other.eps),
            kernel: self.kernel.or(other.kernel),
            kappa: self.kappa.or(other.kappa),
            density: self.density.or(other.density),
            zeta: self.zeta.or(other.zeta),
            alpha: self.alpha.or(other.alpha),
            seed: self.seed.or(other.seed),
            out: self.out.or(other.out),
            format: self.format.or(other.format),
            max_rank: self.max_rank.or(other.max_rank),
            circulant_size: self.circulant_size.or(other.circulant_size),
        }
    }
}

/// Reads a TOML file whose keys mirror the long flag names.
pub fn load_config_file(path: &Path) -> Result<CommonArgs> {
    let text = std::fs::read_to_string(path)?;
    toml::from_str(&text).map_err(|e| Error::invalid(format!("config {}: {e}", path.display())))
}

/// Validated parameters of one command.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub n: Vec<usize>,
    pub d: Vec<usize>,
    pub half_width: f64,
    pub eps: Vec<f64>,
    pub kernel: KernelKind,
    pub kappa: f64,
    pub density: DensityKind,
    pub zeta: f64,
    pub alpha: f64,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub max_rank: usize,
    pub circulant: CirculantArg,
}

/// Per-command defaults for the list-valued fields.
pub struct Defaults {
    pub n: Vec<usize>,
    pub d: Vec<usize>,
    pub half_width: f64,
    pub eps: Vec<f64>,
}

impl RunConfig {
    pub fn resolve(args: CommonArgs, defaults: Defaults) -> Result<Self> {
        let cfg = RunConfig {
            n: args.n.unwrap_or(defaults.n),
            d: args.d.unwrap_or(defaults.d),
            half_width: args.half_width.unwrap_or(defaults.half_width),
            eps: args.eps.unwrap_or(defaults.eps),
            kernel: args.kernel.unwrap_or_default(),
            kappa: args.kappa.unwrap_or(1.0),
            density: args.density.unwrap_or_default(),
            zeta: args.zeta.unwrap_or(1.0),
            alpha: args.alpha.unwrap_or(1.0),
            seed: args.seed.unwrap_or(crate::cross::DEFAULT_SEED),
            out: args.out,
            format: args.format.unwrap_or_default(),
            max_rank: args.max_rank.unwrap_or(200),
            circulant: args.circulant_size.unwrap_or_default(),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n.is_empty() || self.eps.is_empty() || self.d.is_empty() {
            return Err(Error::invalid("n, d and eps lists must not be empty"));
        }
        if let Some(n) = self.n.iter().find(|&&n| n < 2) {
            return Err(Error::invalid(format!("n must be at least 2, got {n}")));
        }
        if let Some(e) = self.eps.iter().find(|&&e| !(e > 0.0 && e < 1.0)) {
            return Err(Error::invalid(format!("eps must lie in (0, 1), got {e}")));
        }
        if !(self.half_width > 0.0 && self.half_width.is_finite()) {
            return Err(Error::invalid(format!("L must be positive, got {}", self.half_width)));
        }
        for (name, v) in [("kappa", self.kappa), ("zeta", self.zeta), ("alpha", self.alpha)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(format!("{name} must be positive, got {v}")));
            }
        }
        if self.max_rank == 0 {
            return Err(Error::invalid("max rank must be positive"));
        }
        Ok(())
    }

    /// Extra check for the dense-oracle sweep.
    pub fn validate_verify(&self) -> Result<()> {
        if let Some(d) = self.d.iter().find(|&&d| !(1..=6).contains(&d)) {
            return Err(Error::invalid(format!("verify needs 1 <= d <= 6, got {d}")));
        }
        Ok(())
    }
}

/// Parses the thread-count variable; `None` when unset.
pub fn threads_from_env() -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(t) if t > 0 => Ok(Some(t)),
            _ => Err(Error::invalid(format!("{THREADS_ENV} must be a positive integer, got {v:?}"))),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn defaults() -> Defaults {
        Defaults {
            n: vec![8],
            d: vec![3],
            half_width: 10.0,
            eps: vec![1e-6],
        }
    }

    #[test]
    fn toml_accepts_scalars_and_lists() {
        let file: CommonArgs = toml::from_str("n = 64\neps = [1e-5, 1e-7]\nL = 8.0\ncirculant_size = \"2n\"").unwrap();
        assert_eq!(file.n, Some(vec![64]));
        assert_eq!(file.eps, Some(vec![1e-5, 1e-7]));
        assert_eq!(file.half_width, Some(8.0));
        assert_eq!(file.circulant_size, Some(CirculantArg::Even));
        assert!(toml::from_str::<CommonArgs>("bogus = 1").is_err());
    }

    #[test]
    fn flags_override_file() {
        let flags = CommonArgs {
            n: Some(vec![16]),
            ..CommonArgs::default()
        };
        let file = CommonArgs {
            n: Some(vec![32]),
            zeta: Some(2.0),
            ..CommonArgs::default()
        };
        let cfg = RunConfig::resolve(flags.or(file), defaults()).unwrap();
        assert_eq!(cfg.n, vec![16]);
        assert_eq!(cfg.zeta, 2.0);
        assert_eq!(cfg.half_width, 10.0);
    }

    #[test]
    fn ranges_are_checked() {
        let bad_n = CommonArgs {
            n: Some(vec![1]),
            ..CommonArgs::default()
        };
        assert!(RunConfig::resolve(bad_n, defaults()).is_err());
        let bad_eps = CommonArgs {
            eps: Some(vec![1.0]),
            ..CommonArgs::default()
        };
        assert!(RunConfig::resolve(bad_eps, defaults()).is_err());
        let cfg = RunConfig::resolve(
            CommonArgs {
                d: Some(vec![7]),
                ..CommonArgs::default()
            },
            defaults(),
        )
        .unwrap();
        assert!(cfg.validate_verify().is_err());
    }
}
