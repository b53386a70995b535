//! Run configuration: a TOML file plus command-line overrides.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::CorpusKind;
use crate::dispersion::{check_xi_margin, xi_grid, DEFAULT_XI_MARGIN};
use crate::error::{BgkError, Result};
use crate::evolution::{DecayOptions, DecayTolerances, DEFAULT_BURN_IN, DEFAULT_DT};
use crate::quadrature::{
    Discretization, DEFAULT_INNER_WIDTH, DEFAULT_PANEL_ORDER, DEFAULT_TRUNCATION,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
    Svg,
}

impl OutputFormat {
    pub fn extension(self) -> &'static str {
        match self {
            Self::Csv => "csv",
            Self::Json => "json",
            Self::Svg => "svg",
        }
    }
}

impl fmt::Display for OutputFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.extension())
    }
}

impl FromStr for OutputFormat {
    type Err = BgkError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            "svg" => Ok(Self::Svg),
            _ => Err(BgkError::Config(format!(
                "unknown output format '{s}'; expected csv, json or svg"
            ))),
        }
    }
}

/// Evenly spaced ξ samples, endpoints included.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct XiGridSpec {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub dispersion: f64,
    pub residual_slope: f64,
    pub gds_slope_relative: f64,
    pub oracle: f64,
    pub transient: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        let d = DecayTolerances::default();
        Self {
            dispersion: 1e-8,
            residual_slope: d.residual_slope,
            gds_slope_relative: d.gds_slope_relative,
            oracle: d.oracle_relative,
            transient: d.negligible_transient,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub corpus: CorpusKind,
    /// explicit ξ list; takes precedence over `xi_grid`
    pub xi: Option<Vec<f64>>,
    pub xi_grid: Option<XiGridSpec>,
    pub xi_margin: f64,
    pub t_max: f64,
    pub t_step: f64,
    pub burn_in: f64,
    pub dt: f64,
    pub oracle: bool,
    pub order: usize,
    pub truncation: f64,
    pub inner_width: f64,
    pub out: PathBuf,
    pub formats: Vec<OutputFormat>,
    pub tolerance: Tolerances,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            corpus: CorpusKind::Gaussian,
            xi: None,
            xi_grid: None,
            xi_margin: DEFAULT_XI_MARGIN,
            t_max: 4.0,
            t_step: 0.25,
            burn_in: DEFAULT_BURN_IN,
            dt: DEFAULT_DT,
            oracle: true,
            order: DEFAULT_PANEL_ORDER,
            truncation: DEFAULT_TRUNCATION,
            inner_width: DEFAULT_INNER_WIDTH,
            out: PathBuf::from("out"),
            formats: vec![OutputFormat::Csv, OutputFormat::Json],
            tolerance: Tolerances::default(),
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| BgkError::Config(e.message().to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| BgkError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let t = &self.tolerance;
        let positive = [
            ("tolerance.dispersion", t.dispersion),
            ("tolerance.residual_slope", t.residual_slope),
            ("tolerance.gds_slope_relative", t.gds_slope_relative),
            ("tolerance.oracle", t.oracle),
            ("tolerance.transient", t.transient),
            ("xi_margin", self.xi_margin),
            ("t_max", self.t_max),
            ("t_step", self.t_step),
            ("dt", self.dt),
            ("truncation", self.truncation),
            ("inner_width", self.inner_width),
        ];
        if let Some((name, v)) = positive.iter().find(|(_, v)| !(*v > 0.0 && v.is_finite())) {
            return Err(BgkError::Config(format!(
                "{name} must be positive, got {v}"
            )));
        }
        if !(self.burn_in >= 0.0) {
            return Err(BgkError::Config(format!(
                "burn_in must be nonnegative, got {}",
                self.burn_in
            )));
        }
        if self.order < 2 {
            return Err(BgkError::Config(format!(
                "order must be at least 2, got {}",
                self.order
            )));
        }
        if self.formats.is_empty() {
            return Err(BgkError::Config(
                "at least one output format is required".into(),
            ));
        }
        if let Some(g) = self.xi_grid {
            if g.n < 1 || !(g.lo <= g.hi) {
                return Err(BgkError::Config(format!(
                    "xi_grid needs lo <= hi and n >= 1, got [{}, {}] with n = {}",
                    g.lo, g.hi, g.n
                )));
            }
        }
        if let Some(xs) = self.xi_list() {
            check_xi_margin(&xs, self.xi_margin)?;
        }
        Ok(())
    }

    /// The configured ξ samples, if any were given.
    pub fn xi_list(&self) -> Option<Vec<f64>> {
        match (&self.xi, self.xi_grid) {
            (Some(xs), _) => Some(xs.clone()),
            (None, Some(g)) => Some(xi_grid(g.lo, g.hi, g.n)),
            (None, None) => None,
        }
    }

    pub fn xis_or(&self, default: &[f64]) -> Vec<f64> {
        self.xi_list().unwrap_or_else(|| default.to_vec())
    }

    /// `0, t_step, …` up to and including `t_max`.
    pub fn times(&self) -> Vec<f64> {
        let n = (self.t_max / self.t_step + 1e-9).floor() as usize;
        let mut ts: Vec<f64> = (0..=n).map(|k| k as f64 * self.t_step).collect();
        if self.t_max - ts[n] > 1e-9 * self.t_max {
            ts.push(self.t_max);
        }
        ts
    }

    pub fn discretization(&self) -> Discretization {
        Discretization {
            truncation: self.truncation,
            inner_width: self.inner_width,
            panel_order: self.order,
        }
    }

    pub fn decay_options(&self) -> DecayOptions {
        DecayOptions {
            burn_in: self.burn_in,
            oracle: self.oracle,
            dt: self.dt,
        }
    }

    pub fn decay_tolerances(&self) -> DecayTolerances {
        DecayTolerances {
            residual_slope: self.tolerance.residual_slope,
            gds_slope_relative: self.tolerance.gds_slope_relative,
            negligible_transient: self.tolerance.transient,
            oracle_relative: self.tolerance.oracle,
        }
    }

    pub fn wants(&self, f: OutputFormat) -> bool {
        self.formats.contains(&f)
    }
}
