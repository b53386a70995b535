//! The `bgk` command line.
//!
//! Exit status: 0 when every check passes, 1 on configuration or domain
//! errors, 2 when a computed quantity misses its tolerance.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use log::info;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::coefficients::SpectralSlice;
use crate::config::{OutputFormat, RunConfig};
use crate::corpus::{CorpusKind, CHI_ZERO_XI, CORPUS_XI};
use crate::dispersion::{xi_grid, DispersionTable};
use crate::error::{BgkError, Result};
use crate::evolution::{
    decay_study, density_moment, evolve_spectral, oracle_integrate, SCHEMA_VERSION,
};
use crate::format::fmt17;
use crate::operator::norm_phi;
use crate::riemann::{expected_index, winding_index_with};
use crate::svg::{Plot, Series};
use crate::verify::{self, Suite, VerifyOptions};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_CHECK: i32 = 2;

const INDEX_XI: [f64; 7] = [0.1, 0.5, 1.0, 1.7, -2.0, 1.8, 3.75];
const DISPERSION_EDGE: f64 = 1.76;
const DISPERSION_POINTS: usize = 101;

#[derive(Debug, Parser)]
#[command(
    name = "bgk",
    version,
    about = "Spectral solver for the Fourier-transformed 1D BGK equation"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

/// Options shared by every subcommand; flags override the config file.
#[derive(Debug, Clone, Default, Args)]
pub struct Common {
    /// TOML run configuration
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// wavenumbers, comma separated
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub xi: Option<Vec<f64>>,
    #[arg(long)]
    pub t_max: Option<f64>,
    /// Gauss–Legendre nodes per panel
    #[arg(long)]
    pub order: Option<usize>,
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// any of csv, json, svg
    #[arg(long, value_delimiter = ',')]
    pub format: Option<Vec<OutputFormat>>,
    /// gds-profile, gaussian or shifted-gaussian
    #[arg(long)]
    pub corpus: Option<CorpusKind>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tabulate η(ξ), Λ(ξ) and the constraint residual
    Dispersion {
        #[command(flatten)]
        common: Common,
        /// residual tolerance
        #[arg(long)]
        tolerance: Option<f64>,
    },
    /// Run invariant suites
    Verify {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',')]
        suite: Vec<Suite>,
        #[arg(long, hide = true)]
        inject_dawson_sign_flip: bool,
    },
    /// Evolve corpus data to t_max and compare with the RK4 oracle
    Evolve {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        no_oracle: bool,
    },
    /// Fit decay rates of the grossly determined and transient parts
    Decay {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        no_oracle: bool,
    },
    /// Winding number of G along the real line
    Index {
        #[command(flatten)]
        common: Common,
        /// initial samples of the image curve
        #[arg(long, default_value_t = 64)]
        samples: usize,
    },
}

impl Command {
    fn common(&self) -> &Common {
        match self {
            Self::Dispersion { common, .. }
            | Self::Verify { common, .. }
            | Self::Evolve { common, .. }
            | Self::Decay { common, .. }
            | Self::Index { common, .. } => common,
        }
    }
}

impl Common {
    fn resolve(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        if let Some(xs) = &self.xi {
            cfg.xi = Some(xs.clone());
        }
        if let Some(t) = self.t_max {
            cfg.t_max = t;
        }
        if let Some(o) = self.order {
            cfg.order = o;
        }
        if let Some(o) = &self.out {
            cfg.out = o.clone();
        }
        if let Some(f) = &self.format {
            cfg.formats = f.clone();
        }
        if let Some(c) = self.corpus {
            cfg.corpus = c;
        }
        Ok(cfg)
    }
}

/// Parses `args` (program name first) and runs; returns the exit status.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match run(&cli) {
        Ok(true) => EXIT_OK,
        Ok(false) => EXIT_CHECK,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_CONFIG
        }
    }
}

/// Runs one subcommand; `Ok(false)` means a check failed.
pub fn run(cli: &Cli) -> Result<bool> {
    let mut cfg = cli.command.common().resolve()?;
    match &cli.command {
        Command::Dispersion { tolerance, .. } => {
            if let Some(t) = tolerance {
                cfg.tolerance.dispersion = *t;
            }
            cfg.validate()?;
            cmd_dispersion(&cfg)
        }
        Command::Verify {
            suite,
            inject_dawson_sign_flip,
            ..
        } => {
            cfg.validate()?;
            let suites = if suite.is_empty() {
                Suite::ALL.to_vec()
            } else {
                suite.clone()
            };
            cmd_verify(
                &cfg,
                &suites,
                VerifyOptions {
                    flip_dawson_sign: *inject_dawson_sign_flip,
                },
            )
        }
        Command::Evolve { no_oracle, .. } => {
            cfg.oracle &= !no_oracle;
            cfg.validate()?;
            cmd_evolve(&cfg)
        }
        Command::Decay { no_oracle, .. } => {
            cfg.oracle &= !no_oracle;
            cfg.validate()?;
            cmd_decay(&cfg)
        }
        Command::Index { samples, .. } => {
            cfg.validate()?;
            cmd_index(&cfg, *samples)
        }
    }
}

struct Outputs<'a> {
    cfg: &'a RunConfig,
    stem: &'static str,
}

impl<'a> Outputs<'a> {
    fn new(cfg: &'a RunConfig, stem: &'static str) -> Result<Self> {
        fs::create_dir_all(&cfg.out)
            .map_err(|e| BgkError::Io(format!("cannot create {}: {e}", cfg.out.display())))?;
        Ok(Self { cfg, stem })
    }

    fn path(&self, f: OutputFormat) -> PathBuf {
        self.cfg
            .out
            .join(format!("{}.{}", self.stem, f.extension()))
    }

    fn write(&self, f: OutputFormat, body: impl FnOnce(&mut Vec<u8>) -> Result<()>) -> Result<()> {
        if !self.cfg.wants(f) {
            return Ok(());
        }
        let mut buf = Vec::new();
        body(&mut buf)?;
        write_file(&self.path(f), &buf)
    }

    fn json<T: Serialize>(&self, value: &T) -> Result<()> {
        self.write(OutputFormat::Json, |buf| {
            serde_json::to_writer_pretty(&mut *buf, value)?;
            buf.push(b'\n');
            Ok(())
        })
    }

    fn svg(&self, plot: impl FnOnce() -> String) -> Result<()> {
        self.write(OutputFormat::Svg, |buf| {
            buf.extend_from_slice(plot().as_bytes());
            Ok(())
        })
    }

    fn csv(&self, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<()> {
        self.write(OutputFormat::Csv, |buf| {
            let mut w = csv::Writer::from_writer(buf);
            let err = |e: csv::Error| BgkError::Io(e.to_string());
            w.write_record(header).map_err(err)?;
            for row in rows {
                w.write_record(&row).map_err(err)?;
            }
            w.flush()?;
            Ok(())
        })
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut f = fs::File::create(path)
        .map_err(|e| BgkError::Io(format!("cannot write {}: {e}", path.display())))?;
    f.write_all(bytes)?;
    info!("wrote {}", path.display());
    Ok(())
}

fn status(pass: bool) -> &'static str {
    if pass {
        "PASS"
    } else {
        "FAIL"
    }
}

fn cmd_dispersion(cfg: &RunConfig) -> Result<bool> {
    let xis = cfg.xis_or(&xi_grid(
        -DISPERSION_EDGE,
        DISPERSION_EDGE,
        DISPERSION_POINTS,
    ));
    let table = DispersionTable::build(&xis)?;
    let tol = cfg.tolerance.dispersion;
    let below = table.residuals_below(tol);
    let monotone = table.is_monotone();
    let out = Outputs::new(cfg, "dispersion")?;
    out.write(OutputFormat::Csv, |buf| table.write_csv(buf))?;
    out.json(&json!({
        "schema_version": SCHEMA_VERSION,
        "tolerance": tol,
        "max_residual": table.max_residual(),
        "monotone": monotone,
        "passed": below && monotone,
        "table": table,
    }))?;
    out.svg(|| {
        let mut p = Plot::new("real branch of the spectrum", "xi", "lambda");
        p.push(Series::new(
            "Lambda",
            table.points.iter().map(|q| (q.xi, q.lambda)).collect(),
        ));
        p.render()
    })?;
    println!(
        "dispersion: {} points, max residual {:e} (tolerance {:e}), monotone {monotone}: {}",
        xis.len(),
        table.max_residual(),
        tol,
        status(below && monotone)
    );
    Ok(below && monotone)
}

fn cmd_verify(cfg: &RunConfig, suites: &[Suite], opts: VerifyOptions) -> Result<bool> {
    let report = verify::run(suites, opts);
    let out = Outputs::new(cfg, "verify")?;
    out.json(&report)?;
    out.csv(
        &["suite", "check", "value", "tolerance", "pass"],
        report.checks.iter().map(|c| {
            vec![
                c.suite.to_string(),
                c.name.clone(),
                c.value.map_or_else(|| "error".into(), fmt17),
                fmt17(c.tolerance),
                c.pass.to_string(),
            ]
        }),
    )?;
    for c in &report.checks {
        let value = c
            .value
            .map_or_else(|| c.error.clone().unwrap_or_default(), |v| format!("{v:e}"));
        println!("{:<5} {}/{} {value}", status(c.pass), c.suite, c.name);
    }
    Ok(report.passed)
}

fn default_decay_xis(corpus: CorpusKind) -> Vec<f64> {
    let mut xs = CORPUS_XI.to_vec();
    if corpus != CorpusKind::GdsProfile {
        xs.push(CHI_ZERO_XI);
    }
    xs
}

fn max_abs(xs: &[f64]) -> f64 {
    xs.iter().fold(0.0, |m, x| m.max(x.abs()))
}

#[derive(Debug, Serialize)]
struct EvolveSummary {
    xi: f64,
    lambda: Option<f64>,
    chi: i32,
    #[serde(rename = "C0")]
    c0: Complex64,
    density: Complex64,
    norm: f64,
    oracle_rel_error: Option<f64>,
}

fn cmd_evolve(cfg: &RunConfig) -> Result<bool> {
    let xis = cfg.xis_or(&[0.5]);
    let t = cfg.t_max;
    let data = cfg.corpus.initial_data();
    let disc = cfg.discretization().resolving(max_abs(&xis), t)?;
    let grid = Arc::new(disc.velocity_grid()?);
    let rule = Arc::new(disc.panel_rule()?);
    let runs = xis
        .par_iter()
        .map(|&xi| {
            let slice = SpectralSlice::from_initial_on(&data, xi, Arc::clone(&rule))?;
            let f = evolve_spectral(&slice, Arc::clone(&grid), t)?;
            let oracle_rel_error = if cfg.oracle {
                let o = oracle_integrate(&data.slice(Arc::clone(&grid), xi)?, t, cfg.dt)?;
                Some(norm_phi(&f.sub(&o)) / norm_phi(&o).max(f64::MIN_POSITIVE))
            } else {
                None
            };
            let summary = EvolveSummary {
                xi,
                lambda: slice.lambda(),
                chi: slice.chi(),
                c0: slice.c0(),
                density: density_moment(&f),
                norm: norm_phi(&f),
                oracle_rel_error,
            };
            Ok((summary, f))
        })
        .collect::<Result<Vec<_>>>()?;
    let passed = runs
        .iter()
        .all(|(s, _)| s.oracle_rel_error.is_none_or(|e| e < cfg.tolerance.oracle));
    let out = Outputs::new(cfg, "evolve")?;
    out.csv(
        &["t", "xi", "v", "re", "im"],
        runs.iter().flat_map(|(s, f)| {
            f.nodes()
                .iter()
                .zip(&f.values)
                .map(move |(&v, z)| vec![fmt17(t), fmt17(s.xi), fmt17(v), fmt17(z.re), fmt17(z.im)])
        }),
    )?;
    out.json(&json!({
        "schema_version": SCHEMA_VERSION,
        "corpus": data.name,
        "t": t,
        "oracle_tolerance": cfg.tolerance.oracle,
        "passed": passed,
        "slices": runs.iter().map(|(s, _)| s).collect::<Vec<_>>(),
    }))?;
    out.svg(|| {
        let mut p = Plot::new(format!("{} at t = {t}", data.name), "v", "f");
        for (s, f) in &runs {
            let window = |part: fn(&Complex64) -> f64| -> Vec<(f64, f64)> {
                f.nodes()
                    .iter()
                    .zip(&f.values)
                    .filter(|(v, _)| v.abs() <= 4.0)
                    .map(|(&v, z)| (v, part(z)))
                    .collect()
            };
            p.push(Series::new(format!("Re xi={}", s.xi), window(|z| z.re)));
            p.push(Series::new(format!("Im xi={}", s.xi), window(|z| z.im)));
        }
        p.render()
    })?;
    for (s, _) in &runs {
        let pass = s.oracle_rel_error.is_none_or(|e| e < cfg.tolerance.oracle);
        let err = s
            .oracle_rel_error
            .map_or_else(|| "skipped".into(), |e| format!("{e:e}"));
        println!(
            "{:<5} evolve xi={} t={t}: density {:.6e}{:+.6e}i, oracle error {err}",
            status(pass),
            s.xi,
            s.density.re,
            s.density.im
        );
    }
    Ok(passed)
}

fn cmd_decay(cfg: &RunConfig) -> Result<bool> {
    let xis = cfg.xis_or(&default_decay_xis(cfg.corpus));
    let times = cfg.times();
    let data = cfg.corpus.initial_data();
    let disc = cfg.discretization().resolving(max_abs(&xis), cfg.t_max)?;
    let report = decay_study(&data, &xis, &times, disc, cfg.decay_options())?;
    let checks = report.assess(&cfg.decay_tolerances());
    let passed = checks.iter().all(|c| c.pass);
    let out = Outputs::new(cfg, "decay")?;
    out.write(OutputFormat::Csv, |buf| report.write_csv(buf))?;
    out.json(&json!({
        "schema_version": SCHEMA_VERSION,
        "passed": passed,
        "checks": checks,
        "report": report,
    }))?;
    out.svg(|| report.to_svg())?;
    for c in &checks {
        let value = c.value.map_or_else(String::new, |v| {
            if v != 0.0 && v.abs() < 1e-3 {
                format!("{v:.3e}")
            } else {
                format!("{v:.6}")
            }
        });
        println!(
            "{:<5} decay xi={} {} {value} (target {})",
            status(c.pass),
            c.xi,
            c.name,
            c.target
        );
    }
    Ok(passed)
}

#[derive(Debug, Serialize)]
struct IndexSummary {
    xi: f64,
    chi: i32,
    expected: i32,
    increment: f64,
}

fn cmd_index(cfg: &RunConfig, samples: usize) -> Result<bool> {
    let xis = cfg.xis_or(&INDEX_XI);
    let results = xis
        .par_iter()
        .map(|&xi| winding_index_with(xi, samples))
        .collect::<Result<Vec<_>>>()?;
    let summaries: Vec<IndexSummary> = results
        .iter()
        .map(|r| IndexSummary {
            xi: r.xi,
            chi: r.chi,
            expected: expected_index(r.xi),
            increment: r.increment,
        })
        .collect();
    let passed = summaries.iter().all(|s| s.chi == s.expected);
    let out = Outputs::new(cfg, "index")?;
    out.csv(
        &["xi", "v", "re", "im"],
        results.iter().flat_map(|r| {
            r.image_curve
                .iter()
                .map(move |p| vec![fmt17(r.xi), fmt17(p.v), fmt17(p.re), fmt17(p.im)])
        }),
    )?;
    out.json(&json!({
        "schema_version": SCHEMA_VERSION,
        "passed": passed,
        "results": summaries,
    }))?;
    out.svg(|| {
        let mut p = Plot::new("image of the real line under G", "Re G", "Im G");
        for r in &results {
            p.push(Series::new(
                format!("xi={}", r.xi),
                r.image_curve.iter().map(|q| (q.re, q.im)).collect(),
            ));
        }
        p.render()
    })?;
    for s in &summaries {
        println!(
            "{:<5} index xi={}: chi = {} (expected {})",
            status(s.chi == s.expected),
            s.xi,
            s.chi,
            s.expected
        );
    }
    Ok(passed)
}
