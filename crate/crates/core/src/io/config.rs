//! Flat `key = value` run configuration.
//!
//! One pair per line; `#` starts a comment; blank lines are ignored. String
//! values may be double-quoted. Every key is optional and defaults to the
//! reference experiment (f = 0.04, κ = 0.0636, D_u = 1, D_v = 0.5, L = n =
//! 200, ε = 1, Δt = 1, t_end = 100000).

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;

use thiserror::Error;

use crate::grid::LatticeSpec;
use crate::integrator::{SeedMode, SeedSpec, Variant};
use crate::kernel::KernelSpec;
use crate::kinetics::ModelParams;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },

    #[error("invalid value for `{key}`: {message}")]
    Semantic { key: String, message: String },

    #[error("line {line}: unknown key `{key}`{}", suggestion.as_ref().map(|s| format!(" (did you mean `{s}`?)")).unwrap_or_default())]
    UnknownKey {
        line: usize,
        key: String,
        suggestion: Option<String>,
    },
}

/// Every accepted key, in serialization order.
pub const KEYS: &[&str] = &[
    "variant",
    "L",
    "n",
    "f",
    "kappa",
    "d_u",
    "d_v",
    "dt",
    "epsilon",
    "t_end",
    "seed_mode",
    "block_side",
    "u_in",
    "v_in",
    "noise_amplitude",
    "rng_seed",
    "report_every",
    "snapshot_every",
    "output_dir",
    "emit_images",
    "waive_stability",
];

#[derive(Clone, Debug, PartialEq)]
pub struct SimConfig {
    pub variant: Variant,
    pub lattice: LatticeSpec,
    pub params: ModelParams,
    /// Present exactly when the variant is mixed.
    pub kernel: Option<KernelSpec>,
    pub seed: SeedSpec,
    pub t_end: f64,
    pub report_every: u64,
    /// 0 writes only the final snapshot.
    pub snapshot_every: u64,
    pub output_dir: PathBuf,
    pub emit_images: bool,
    pub waive_stability: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        parse_config("").expect("defaults are valid")
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let sem = |key: &str, message: String| ConfigError::Semantic {
            key: key.into(),
            message,
        };
        let p = &self.params;
        let positive = |key: &str, x: f64| {
            if x.is_finite() && x > 0.0 {
                Ok(())
            } else {
                Err(sem(key, format!("must be positive, got {x}")))
            }
        };
        let nonneg = |key: &str, x: f64| {
            if x.is_finite() && x >= 0.0 {
                Ok(())
            } else {
                Err(sem(key, format!("must be nonnegative, got {x}")))
            }
        };
        positive("L", self.lattice.length)?;
        if self.lattice.n == 0 {
            return Err(sem("n", "must be at least 1".into()));
        }
        nonneg("f", p.f)?;
        positive("kappa", p.kappa)?;
        nonneg("d_u", p.d_u)?;
        nonneg("d_v", p.d_v)?;
        positive("dt", p.dt)?;
        nonneg("t_end", self.t_end)?;
        if p.h != self.lattice.h {
            return Err(sem("L", "lattice spacing disagrees with model parameters".into()));
        }
        match (self.variant, &self.kernel) {
            (Variant::Mixed, None) => return Err(sem("variant", "mixed variant requires a kernel".into())),
            (Variant::Mixed, Some(k)) => {
                positive("epsilon", k.epsilon)?;
                if k.nx != self.lattice.n || k.ny != self.lattice.n || k.h != self.lattice.h {
                    return Err(sem("epsilon", "kernel grid disagrees with the lattice".into()));
                }
            }
            (Variant::Local, _) => {}
        }
        let s = &self.seed;
        if s.mode != SeedMode::Uniform && s.block_side > self.lattice.n {
            return Err(sem(
                "block_side",
                format!("{} exceeds the grid size {}", s.block_side, self.lattice.n),
            ));
        }
        nonneg("noise_amplitude", s.noise_amplitude)?;
        if !s.u_in.is_finite() {
            return Err(sem("u_in", "must be finite".into()));
        }
        if !s.v_in.is_finite() {
            return Err(sem("v_in", "must be finite".into()));
        }
        if self.report_every == 0 {
            return Err(sem("report_every", "must be at least 1".into()));
        }
        Ok(())
    }

    /// Canonical text form; `parse_config(&c.to_text()) == Ok(c)`.
    pub fn to_text(&self) -> String {
        let p = &self.params;
        let s = &self.seed;
        let mut out = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(out, "{k} = {v}");
        };
        kv("variant", self.variant.to_string());
        kv("L", self.lattice.length.to_string());
        kv("n", self.lattice.n.to_string());
        kv("f", p.f.to_string());
        kv("kappa", p.kappa.to_string());
        kv("d_u", p.d_u.to_string());
        kv("d_v", p.d_v.to_string());
        kv("dt", p.dt.to_string());
        if let Some(k) = &self.kernel {
            kv("epsilon", k.epsilon.to_string());
        }
        kv("t_end", self.t_end.to_string());
        kv("seed_mode", s.mode.as_str().to_string());
        kv("block_side", s.block_side.to_string());
        kv("u_in", s.u_in.to_string());
        kv("v_in", s.v_in.to_string());
        kv("noise_amplitude", s.noise_amplitude.to_string());
        kv("rng_seed", s.rng_seed.to_string());
        kv("report_every", self.report_every.to_string());
        kv("snapshot_every", self.snapshot_every.to_string());
        kv("output_dir", format!("\"{}\"", self.output_dir.display()));
        kv("emit_images", self.emit_images.to_string());
        kv("waive_stability", self.waive_stability.to_string());
        out
    }
}

/// Parses configuration text.
pub fn parse_config(text: &str) -> Result<SimConfig, ConfigError> {
    parse_config_with_overrides(text, &[])
}

/// Parses configuration text, then replaces the given keys before
/// validation. Used by parameter sweeps.
pub fn parse_config_with_overrides(text: &str, overrides: &[(String, String)]) -> Result<SimConfig, ConfigError> {
    let mut raw = RawConfig::parse(text)?;
    for (key, value) in overrides {
        check_known(key, 0)?;
        raw.values.insert(key.clone(), value.clone());
    }
    raw.build()
}

fn check_known(key: &str, line: usize) -> Result<(), ConfigError> {
    if KEYS.contains(&key) {
        return Ok(());
    }
    let suggestion = KEYS
        .iter()
        .map(|k| (strsim::levenshtein(k, key), *k))
        .filter(|(d, _)| *d <= 3)
        .min()
        .map(|(_, k)| k.to_string());
    Err(ConfigError::UnknownKey {
        line,
        key: key.to_string(),
        suggestion,
    })
}

struct RawConfig {
    values: BTreeMap<String, String>,
}

impl RawConfig {
    fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut values = BTreeMap::new();
        for (idx, raw_line) in text.lines().enumerate() {
            let line = idx + 1;
            let content = strip_comment(raw_line).trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| ConfigError::Syntax {
                line,
                message: format!("expected `key = value`, got `{content}`"),
            })?;
            let key = key.trim();
            if key.is_empty() || key.contains(char::is_whitespace) {
                return Err(ConfigError::Syntax {
                    line,
                    message: format!("malformed key `{key}`"),
                });
            }
            let value = unquote(value.trim()).map_err(|message| ConfigError::Syntax { line, message })?;
            check_known(key, line)?;
            if values.insert(key.to_string(), value).is_some() {
                return Err(ConfigError::Syntax {
                    line,
                    message: format!("duplicate key `{key}`"),
                });
            }
        }
        Ok(Self { values })
    }

    fn get<T: std::str::FromStr>(&self, key: &str, default: T) -> Result<T, ConfigError>
    where
        T::Err: std::fmt::Display,
    {
        match self.values.get(key) {
            None => Ok(default),
            Some(s) => s.parse().map_err(|e: T::Err| ConfigError::Semantic {
                key: key.into(),
                message: format!("cannot parse `{s}`: {e}"),
            }),
        }
    }

    fn build(&self) -> Result<SimConfig, ConfigError> {
        let variant: Variant = self.get("variant", Variant::Local)?;
        let length: f64 = self.get("L", 200.0)?;
        let n: usize = self.get("n", 200)?;
        let lattice = LatticeSpec::new(length, n).map_err(|e| ConfigError::Semantic {
            key: if n == 0 { "n" } else { "L" }.into(),
            message: e.to_string(),
        })?;
        let params = ModelParams {
            f: self.get("f", 0.04)?,
            kappa: self.get("kappa", 0.0636)?,
            d_u: self.get("d_u", 1.0)?,
            d_v: self.get("d_v", 0.5)?,
            dt: self.get("dt", 1.0)?,
            h: lattice.h,
        };
        let epsilon: f64 = self.get("epsilon", 1.0)?;
        let kernel = match variant {
            Variant::Mixed => Some(KernelSpec {
                epsilon,
                nx: n,
                ny: n,
                h: lattice.h,
            }),
            Variant::Local => None,
        };
        let defaults = SeedSpec::default();
        let seed = SeedSpec {
            mode: self.get("seed_mode", defaults.mode)?,
            block_side: self.get("block_side", defaults.block_side)?,
            u_in: self.get("u_in", defaults.u_in)?,
            v_in: self.get("v_in", defaults.v_in)?,
            noise_amplitude: self.get("noise_amplitude", defaults.noise_amplitude)?,
            rng_seed: self.get("rng_seed", defaults.rng_seed)?,
        };
        let config = SimConfig {
            variant,
            lattice,
            params,
            kernel,
            seed,
            t_end: self.get("t_end", 100_000.0)?,
            report_every: self.get("report_every", 100)?,
            snapshot_every: self.get("snapshot_every", 0)?,
            output_dir: PathBuf::from(self.get("output_dir", "out".to_string())?),
            emit_images: self.get("emit_images", false)?,
            waive_stability: self.get("waive_stability", false)?,
        };
        config.validate()?;
        Ok(config)
    }
}

fn strip_comment(line: &str) -> &str {
    // a `#` inside a quoted value is literal
    let mut in_quotes = false;
    for (i, c) in line.char_indices() {
        match c {
            '"' => in_quotes = !in_quotes,
            '#' if !in_quotes => return &line[..i],
            _ => {}
        }
    }
    line
}

fn unquote(value: &str) -> Result<String, String> {
    if let Some(rest) = value.strip_prefix('"') {
        let inner = rest
            .strip_suffix('"')
            .ok_or_else(|| format!("unterminated string `{value}`"))?;
        if inner.contains('"') {
            return Err(format!("stray quote in `{value}`"));
        }
        Ok(inner.to_string())
    } else if value.is_empty() {
        Err("missing value".into())
    } else {
        Ok(value.to_string())
    }
}
