use std::path::Path;

use anyhow::{bail, Context, Result};
use clap::ValueEnum;
use robsched::io::{jsp_to_rcpsp, parse_jsp, parse_native, parse_progen_max};
use robsched::Instance;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Native,
    ProgenMax,
    Jsp,
}

impl Format {
    /// `.json` is native, `.sch` ProGen/max, `.jsp` job shop.
    pub fn from_extension(path: &Path) -> Option<Format> {
        let ext = path.extension()?.to_str()?.to_ascii_lowercase();
        match ext.as_str() {
            "json" => Some(Format::Native),
            "sch" => Some(Format::ProgenMax),
            "jsp" => Some(Format::Jsp),
            _ => None,
        }
    }
}

pub fn read_instance(path: &Path, format: Option<Format>) -> Result<Instance> {
    let format = match format.or_else(|| Format::from_extension(path)) {
        Some(f) => f,
        None => bail!("cannot tell the format of {} from its extension; pass --format", path.display()),
    };
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let instance = match format {
        Format::Native => parse_native(&text)?,
        Format::ProgenMax => parse_progen_max(&text)?,
        Format::Jsp => jsp_to_rcpsp(&parse_jsp(&text)?)?,
    };
    Ok(instance)
}

/// How per-activity σ is set before solving.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SigmaMode {
    /// Keep what the instance file says.
    Keep,
    Constant(f64),
    /// σ = factor × d0.
    Proportional(f64),
}

impl SigmaMode {
    pub fn from_flags(sigma: Option<f64>, mode: Option<&str>) -> Result<SigmaMode> {
        let mode = match (sigma, mode) {
            (Some(_), Some(_)) => bail!("--sigma and --sigma-mode are mutually exclusive"),
            (Some(s), None) => SigmaMode::Constant(s),
            (None, None) => SigmaMode::Keep,
            (None, Some(m)) => match m.split_once(':') {
                Some(("constant", v)) => SigmaMode::Constant(v.parse().context("sigma value")?),
                Some(("proportional", v)) => SigmaMode::Proportional(v.parse().context("sigma factor")?),
                _ => bail!("--sigma-mode expects constant:<v> or proportional:<f>, got `{m}`"),
            },
        };
        if let SigmaMode::Constant(v) | SigmaMode::Proportional(v) = mode {
            if !(v >= 0.0 && v.is_finite()) {
                bail!("sigma must be a nonnegative number, got {v}");
            }
        }
        Ok(mode)
    }

    pub fn apply(self, instance: &mut Instance) {
        match self {
            SigmaMode::Keep => {}
            SigmaMode::Constant(s) => instance.set_uniform_sigma(s),
            SigmaMode::Proportional(f) => instance.set_proportional_sigma(f),
        }
    }

    pub fn describe(self) -> String {
        match self {
            SigmaMode::Keep => "from-instance".into(),
            SigmaMode::Constant(s) => format!("constant:{s}"),
            SigmaMode::Proportional(f) => format!("proportional:{f}"),
        }
    }
}
