//! Run configuration: flat key=value files, flag twins, merge rules.
//!
//! Every key in a config file has a command-line flag twin; flags override
//! file values.  The file format is deliberately dumb — one `key = value`
//! pair per line, `#` comments — so that configs diff cleanly and sweeps
//! stay reproducible.  No environment variables are consulted.

use std::fmt;
use std::path::{Path, PathBuf};

use warped_dirac::{Parity, Sign};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    EvolveEinstein,
    EvolveWk,
    ClosedForm,
    Verify,
    Reparam,
}

impl Mode {
    pub fn parse(s: &str) -> Result<Self, String> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "evolve_einstein" => Ok(Mode::EvolveEinstein),
            "evolve_wk" => Ok(Mode::EvolveWk),
            "closed_form" => Ok(Mode::ClosedForm),
            "verify" => Ok(Mode::Verify),
            "reparam" => Ok(Mode::Reparam),
            other => Err(format!("unknown mode '{other}'")),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Mode::EvolveEinstein => "evolve_einstein",
            Mode::EvolveWk => "evolve_wk",
            Mode::ClosedForm => "closed_form",
            Mode::Verify => "verify",
            Mode::Reparam => "reparam",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn parse(s: &str) -> Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(format!("unknown format '{other}' (csv or json)")),
        }
    }

    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

/// A fully resolved run configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub mode: Mode,
    pub parity: Parity,
    pub m: u32,
    pub a: f64,
    pub lambda_m: f64,
    pub lambda_q: f64,
    pub epsilon: Sign,
    pub norm: f64,
    pub sign: Sign,
    pub c: Option<f64>,
    pub t_end: f64,
    pub step: f64,
    pub omega: Option<f64>,
    pub tolerance: f64,
    pub out: PathBuf,
    pub format: Format,
    pub input: Option<PathBuf>,
}

/// Raw option set before defaults are applied; the file parser and the flag
/// layer both produce one of these.
#[derive(Debug, Clone, Default)]
pub struct PartialConfig {
    pub mode: Option<Mode>,
    pub parity: Option<Parity>,
    pub m: Option<u32>,
    pub a: Option<f64>,
    pub lambda_m: Option<f64>,
    pub lambda_q: Option<f64>,
    pub epsilon: Option<Sign>,
    pub norm: Option<f64>,
    pub sign: Option<Sign>,
    pub c: Option<f64>,
    pub t_end: Option<f64>,
    pub step: Option<f64>,
    pub omega: Option<f64>,
    pub tolerance: Option<f64>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub input: Option<PathBuf>,
}

fn parse_parity(s: &str) -> Result<Parity, String> {
    match s.trim().to_ascii_lowercase().as_str() {
        "even" => Ok(Parity::Even),
        "odd" => Ok(Parity::Odd),
        other => Err(format!("unknown parity '{other}' (even or odd)")),
    }
}

fn parse_sign(s: &str) -> Result<Sign, String> {
    let v: f64 = s
        .trim()
        .parse()
        .map_err(|_| format!("expected ±1, got '{s}'"))?;
    Sign::from_f64(v).map_err(|e| e.to_string())
}

fn parse_num<T: std::str::FromStr>(key: &str, s: &str) -> Result<T, String> {
    s.trim()
        .parse()
        .map_err(|_| format!("invalid value '{s}' for key '{key}'"))
}

impl PartialConfig {
    /// Parse a flat `key = value` config file.
    pub fn from_file(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
        let mut cfg = PartialConfig::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(format!(
                    "{}:{}: expected 'key = value', got '{line}'",
                    path.display(),
                    lineno + 1
                ));
            };
            let (key, value) = (key.trim(), value.trim());
            cfg.set(key, value)
                .map_err(|e| format!("{}:{}: {e}", path.display(), lineno + 1))?;
        }
        Ok(cfg)
    }

    fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        match key {
            "mode" => self.mode = Some(Mode::parse(value)?),
            "parity" => self.parity = Some(parse_parity(value)?),
            "m" => self.m = Some(parse_num(key, value)?),
            "a" => self.a = Some(parse_num(key, value)?),
            "lambda_m" => self.lambda_m = Some(parse_num(key, value)?),
            "lambda_q" => self.lambda_q = Some(parse_num(key, value)?),
            "epsilon" => self.epsilon = Some(parse_sign(value)?),
            "norm" => self.norm = Some(parse_num(key, value)?),
            "sign" => self.sign = Some(parse_sign(value)?),
            "c" => self.c = Some(parse_num(key, value)?),
            "t_end" => self.t_end = Some(parse_num(key, value)?),
            "step" => self.step = Some(parse_num(key, value)?),
            "omega" => self.omega = Some(parse_num(key, value)?),
            "tol" => self.tolerance = Some(parse_num(key, value)?),
            "out" => self.out = Some(PathBuf::from(value)),
            "format" => self.format = Some(Format::parse(value)?),
            "input" => self.input = Some(PathBuf::from(value)),
            other => return Err(format!("unknown config key '{other}'")),
        }
        Ok(())
    }

    /// Overlay `self` (higher precedence) on `base`.
    pub fn over(self, base: PartialConfig) -> PartialConfig {
        PartialConfig {
            mode: self.mode.or(base.mode),
            parity: self.parity.or(base.parity),
            m: self.m.or(base.m),
            a: self.a.or(base.a),
            lambda_m: self.lambda_m.or(base.lambda_m),
            lambda_q: self.lambda_q.or(base.lambda_q),
            epsilon: self.epsilon.or(base.epsilon),
            norm: self.norm.or(base.norm),
            sign: self.sign.or(base.sign),
            c: self.c.or(base.c),
            t_end: self.t_end.or(base.t_end),
            step: self.step.or(base.step),
            omega: self.omega.or(base.omega),
            tolerance: self.tolerance.or(base.tolerance),
            out: self.out.or(base.out),
            format: self.format.or(base.format),
            input: self.input.or(base.input),
        }
    }

    /// Apply defaults and validate.  `mode` must be present (from the
    /// subcommand, a flag, or the file).
    pub fn resolve(self) -> Result<RunConfig, String> {
        let mode = self
            .mode
            .ok_or("no mode given (subcommand or 'mode = ...')")?;
        let format = self.format.unwrap_or(Format::Csv);
        let out = self
            .out
            .unwrap_or_else(|| PathBuf::from(format!("{mode}.{}", format.extension())));
        let cfg = RunConfig {
            mode,
            parity: self.parity.unwrap_or(Parity::Even),
            m: self.m.unwrap_or(1),
            a: self.a.unwrap_or(1.0),
            lambda_m: self.lambda_m.unwrap_or(0.0),
            lambda_q: self.lambda_q.unwrap_or(0.0),
            epsilon: self.epsilon.unwrap_or(Sign::Plus),
            norm: self.norm.unwrap_or(1.0),
            sign: self.sign.unwrap_or(Sign::Plus),
            c: self.c,
            t_end: self.t_end.unwrap_or(1.0),
            step: self.step.unwrap_or(1e-3),
            omega: self.omega,
            tolerance: self.tolerance.unwrap_or(1e-6),
            out,
            format,
            input: self.input,
        };
        if !cfg.step.is_finite() || cfg.step <= 0.0 {
            return Err(format!("step must be positive, got {}", cfg.step));
        }
        if !cfg.tolerance.is_finite() || cfg.tolerance <= 0.0 {
            return Err(format!("tolerance must be positive, got {}", cfg.tolerance));
        }
        if cfg.t_end == 0.0 || !cfg.t_end.is_finite() {
            return Err(format!(
                "t_end must be nonzero and finite, got {}",
                cfg.t_end
            ));
        }
        if let Some(omega) = cfg.omega {
            if !omega.is_finite() || omega <= 0.0 {
                return Err(format!("omega must be positive, got {omega}"));
            }
        }
        match cfg.mode {
            Mode::EvolveWk | Mode::ClosedForm if cfg.c.is_none() => {
                return Err(format!("mode {} requires the warp rate c", cfg.mode));
            }
            Mode::Verify if cfg.input.is_none() => {
                return Err("verify requires an input trajectory (positional or --input)".into());
            }
            _ => {}
        }
        Ok(cfg)
    }
}
