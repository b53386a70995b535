//! Time evolution from spectral coefficients:
//!
//! ```text
//! f̂(t,v) = e^{Λt} C₀/(1+Λ+iξv)
//!        + e^{−t} [ i·p.v.∫ e^{−iξwt} K₀(w)/(w−v) dw + e^{−iξvt} A(v) K₀(v)/φ(v) ]
//! ```
//!
//! plus the grossly determined part alone, a brute-force RK4 integrator of
//! `∂f̂/∂t = −(1+iξv) f̂ + ∫ φ f̂` used as an oracle, and the decay study that
//! fits exponential rates of both parts.

use std::f64::consts::PI;
use std::io::Write;
use std::sync::Arc;

use log::warn;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::coefficients::{InitialData, SpectralSlice};
use crate::dispersion::lambda_of_xi;
use crate::error::{BgkError, Result};
use crate::format::fmt17;
use crate::operator::{collision_moment, norm_phi, VSliceFunction};
use crate::quadrature::{Discretization, PanelRule, VelocityGrid};
use crate::riemann::BoundaryCoefficients;
use crate::specfun::SQRT_PI;
use crate::svg::{Plot, Series};

pub const SCHEMA_VERSION: u32 = 1;
pub const DEFAULT_DT: f64 = 0.01;
pub const DEFAULT_BURN_IN: f64 = 1.0;

/// f̂ sampled on a ξ × v product grid at one time.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComplexField2D {
    pub xi_grid: Vec<f64>,
    #[serde(skip)]
    pub v_grid: Arc<VelocityGrid>,
    /// row-major, one row per ξ
    pub values: Vec<Complex64>,
    pub t: f64,
    pub support: (f64, f64),
    pub holder_smooth: bool,
}

impl ComplexField2D {
    pub fn new(
        xi_grid: Vec<f64>,
        v_grid: Arc<VelocityGrid>,
        values: Vec<Complex64>,
        t: f64,
        support: (f64, f64),
        holder_smooth: bool,
    ) -> Result<Self> {
        if values.len() != xi_grid.len() * v_grid.len() {
            return Err(BgkError::InvalidArgument(format!(
                "{} values for a {} x {} grid",
                values.len(),
                xi_grid.len(),
                v_grid.len()
            )));
        }
        if values.iter().any(|z| !z.is_finite()) {
            return Err(BgkError::NonFinite("field values"));
        }
        if let Some(&xi) = xi_grid.iter().find(|&&x| x < support.0 || x > support.1) {
            return Err(BgkError::Domain(format!(
                "xi = {xi} lies outside the declared support [{}, {}]",
                support.0, support.1
            )));
        }
        Ok(Self {
            xi_grid,
            v_grid,
            values,
            t,
            support,
            holder_smooth,
        })
    }

    /// Samples initial data on the product grid.
    pub fn sample(
        data: &InitialData,
        xi_grid: Vec<f64>,
        v_grid: Arc<VelocityGrid>,
    ) -> Result<Self> {
        let values = xi_grid
            .iter()
            .flat_map(|&xi| v_grid.nodes().iter().map(move |&v| data.eval(xi, v)))
            .collect();
        Self::new(
            xi_grid,
            v_grid,
            values,
            0.0,
            data.xi_support,
            data.smoothness_certificate,
        )
    }

    pub fn row(&self, k: usize) -> &[Complex64] {
        let n = self.v_grid.len();
        &self.values[k * n..(k + 1) * n]
    }

    pub fn slice(&self, k: usize) -> Result<VSliceFunction> {
        VSliceFunction::new(
            Arc::clone(&self.v_grid),
            self.row(k).to_vec(),
            self.xi_grid[k],
        )
    }

    /// Density `ρ̂(ξ) = ∫ φ f̂ dv` per row.
    pub fn density(&self) -> Vec<Complex64> {
        (0..self.xi_grid.len())
            .map(|k| self.v_grid.integrate_values(self.row(k)))
            .collect()
    }
}

/// Panel order needed to resolve `e^{−iξwt}` on the slice's rule, if the
/// current order is insufficient.
pub fn oscillation_budget(slice: &SpectralSlice, t: f64) -> Option<usize> {
    let rule = slice.canonical().rule();
    let phase_per_panel = slice.xi().abs() * t * rule.max_panel_width();
    let needed = phase_per_panel.ceil() as usize;
    (needed > rule.order()).then_some(needed)
}

/// `f̂(t, ·)` on `grid` from the slice's coefficients.
pub fn evolve_spectral(
    slice: &SpectralSlice,
    grid: Arc<VelocityGrid>,
    t: f64,
) -> Result<VSliceFunction> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(BgkError::InvalidArgument(format!(
            "evolution time must be finite and nonnegative, got {t}"
        )));
    }
    if let Some(order) = oscillation_budget(slice, t) {
        warn!(
            "e^(-i xi w t) under-resolved at xi = {}, t = {t}: panels need about {order} nodes",
            slice.xi()
        );
    }
    let xi = slice.xi();
    let rule = slice.canonical().rule();
    let phase = |v: f64| Complex64::from_polar(1.0, -xi * v * t);
    let moving: Vec<Complex64> = slice
        .nodes()
        .iter()
        .zip(slice.k0_nodes())
        .map(|(&w, k)| phase(w) * k)
        .collect();
    let bc = BoundaryCoefficients { xi };
    let real_branch = match slice.lambda() {
        Some(l) => (l * t).exp() * slice.c0(),
        None => Complex64::new(0.0, 0.0),
    };
    let decay = (-t).exp();
    let values: Vec<Complex64> = grid
        .nodes()
        .par_iter()
        .map(|&v| {
            let k_tilde = slice.k_tilde_at(v);
            let pv = rule.pv_at_point(&moving, v, phase(v) * slice.k0_at(v));
            let line = Complex64::new(0.0, 1.0) * pv + phase(v) * bc.a(v) * k_tilde;
            real_branch * slice.gds_profile(v) + decay * line
        })
        .collect();
    VSliceFunction::new(grid, values, xi)
}

/// `e^{Λt} ρ̂₀/(1+Λ+iξv)`.
pub fn gds_solution(
    rho0: Complex64,
    xi: f64,
    t: f64,
    grid: Arc<VelocityGrid>,
) -> Result<VSliceFunction> {
    if xi.abs() >= SQRT_PI {
        return Err(BgkError::Domain(format!(
            "grossly determined solutions need |xi| < sqrt(pi), got {xi}"
        )));
    }
    let l = lambda_of_xi(xi)?;
    let amp = (l * t).exp() * rho0;
    VSliceFunction::from_fn(grid, xi, |v| amp / Complex64::new(1.0 + l, xi * v))
}

/// `ρ̂ = ∫ φ f̂ dv`.
pub fn density_moment(f: &VSliceFunction) -> Complex64 {
    collision_moment(f)
}

/// Classical RK4 on the node ODEs `f' = −(1+iξv) f + Σ w f`.
pub fn oracle_integrate(f0: &VSliceFunction, t_end: f64, dt: f64) -> Result<VSliceFunction> {
    if !(t_end >= 0.0) || !t_end.is_finite() {
        return Err(BgkError::InvalidArgument(format!(
            "oracle end time must be finite and nonnegative, got {t_end}"
        )));
    }
    if !(dt > 0.0) {
        return Err(BgkError::InvalidArgument(format!(
            "dt must be positive, got {dt}"
        )));
    }
    let steps = (t_end / dt).ceil() as usize;
    if steps == 0 {
        return Ok(f0.clone());
    }
    let h = t_end / steps as f64;
    let grid = Arc::clone(&f0.grid);
    let rates: Vec<Complex64> = grid
        .nodes()
        .iter()
        .map(|&v| -Complex64::new(1.0, f0.xi * v))
        .collect();
    let rhs = |f: &[Complex64], out: &mut [Complex64]| {
        let m = grid.integrate_values(f);
        for ((o, &r), &x) in out.iter_mut().zip(&rates).zip(f) {
            *o = r * x + m;
        }
    };
    let n = f0.len();
    let zero = Complex64::new(0.0, 0.0);
    let mut f = f0.values.clone();
    let (mut k1, mut k2, mut k3, mut k4) =
        (vec![zero; n], vec![zero; n], vec![zero; n], vec![zero; n]);
    let mut stage = vec![zero; n];
    for step in 0..steps {
        rhs(&f, &mut k1);
        for j in 0..n {
            stage[j] = f[j] + 0.5 * h * k1[j];
        }
        rhs(&stage, &mut k2);
        for j in 0..n {
            stage[j] = f[j] + 0.5 * h * k2[j];
        }
        rhs(&stage, &mut k3);
        for j in 0..n {
            stage[j] = f[j] + h * k3[j];
        }
        rhs(&stage, &mut k4);
        for j in 0..n {
            f[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        }
        if f.iter().any(|z| !z.is_finite()) {
            return Err(BgkError::NonFinite(if step == 0 {
                "oracle first step"
            } else {
                "oracle stage values"
            }));
        }
    }
    VSliceFunction::new(grid, f, f0.xi)
}

/// Least-squares slope of `ln y` against `t`; `None` if any `y` is not positive.
pub fn fit_log_slope(t: &[f64], y: &[f64]) -> Option<f64> {
    if t.len() < 2 || t.len() != y.len() || y.iter().any(|&v| !(v > 0.0)) {
        return None;
    }
    let n = t.len() as f64;
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let mt = t.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = t.iter().zip(&ly).map(|(a, b)| (a - mt) * (b - my)).sum();
    let sxx: f64 = t.iter().map(|a| (a - mt) * (a - mt)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayOptions {
    /// fits use samples with `t ≥ burn_in`
    pub burn_in: f64,
    pub oracle: bool,
    pub dt: f64,
}

impl Default for DecayOptions {
    fn default() -> Self {
        Self {
            burn_in: DEFAULT_BURN_IN,
            oracle: true,
            dt: DEFAULT_DT,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecaySeries {
    pub xi: f64,
    pub lambda: Option<f64>,
    pub chi: i32,
    #[serde(rename = "C0")]
    pub c0: Complex64,
    pub gds_norm: Vec<f64>,
    pub residual_norm: Vec<f64>,
    pub total_norm: Vec<f64>,
    /// `|∫ φ (f̂ − GDS)|`: density carried by the transient
    pub residual_density: Vec<f64>,
    pub slope_gds: Option<f64>,
    pub slope_residual: Option<f64>,
    pub slope_total: Option<f64>,
    pub ratio_decreasing: bool,
    /// largest `‖spectral − RK4‖/‖RK4‖` over the sampled times
    pub oracle_max_rel_error: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayReport {
    pub schema_version: u32,
    pub corpus: String,
    pub times: Vec<f64>,
    pub burn_in: f64,
    pub series: Vec<DecaySeries>,
}

/// Declared tolerances for the decay checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecayTolerances {
    /// allowed `|slope_residual + 1|`
    pub residual_slope: f64,
    /// allowed `|slope_gds − Λ| / |Λ|`
    pub gds_slope_relative: f64,
    /// residual norms below this (relative to the GDS norm) count as no transient
    pub negligible_transient: f64,
    pub oracle_relative: f64,
}

impl Default for DecayTolerances {
    fn default() -> Self {
        Self {
            residual_slope: 0.05,
            gds_slope_relative: 0.02,
            negligible_transient: 1e-6,
            oracle_relative: 1e-3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayCheck {
    pub xi: f64,
    pub name: String,
    pub value: Option<f64>,
    pub target: String,
    pub pass: bool,
}

impl DecaySeries {
    fn transient_is_negligible(&self, tol: f64) -> bool {
        self.residual_norm
            .iter()
            .zip(&self.gds_norm)
            .all(|(&r, &g)| r <= tol * g.max(1.0))
    }
}

impl DecayReport {
    pub fn assess(&self, tol: &DecayTolerances) -> Vec<DecayCheck> {
        let mut out = Vec::new();
        for s in &self.series {
            if let Some(err) = s.oracle_max_rel_error {
                out.push(DecayCheck {
                    xi: s.xi,
                    name: "oracle_agreement".into(),
                    value: Some(err),
                    target: format!("< {:e}", tol.oracle_relative),
                    pass: err < tol.oracle_relative,
                });
            }
            if s.transient_is_negligible(tol.negligible_transient) {
                let worst = s.residual_norm.iter().copied().fold(0.0, f64::max);
                out.push(DecayCheck {
                    xi: s.xi,
                    name: "no_transient".into(),
                    value: Some(worst),
                    target: format!("< {:e}", tol.negligible_transient),
                    pass: true,
                });
                continue;
            }
            out.push(DecayCheck {
                xi: s.xi,
                name: "residual_slope".into(),
                value: s.slope_residual,
                target: format!("-1 +/- {}", tol.residual_slope),
                pass: s
                    .slope_residual
                    .is_some_and(|r| (r + 1.0).abs() <= tol.residual_slope),
            });
            if let (Some(l), true) = (s.lambda, s.c0.norm() > 0.0) {
                out.push(DecayCheck {
                    xi: s.xi,
                    name: "gds_slope".into(),
                    value: s.slope_gds,
                    target: format!("{l} +/- {}%", 100.0 * tol.gds_slope_relative),
                    pass: s
                        .slope_gds
                        .is_some_and(|g| (g - l).abs() <= tol.gds_slope_relative * l.abs()),
                });
                out.push(DecayCheck {
                    xi: s.xi,
                    name: "ratio_decreasing".into(),
                    value: None,
                    target: "strictly decreasing".into(),
                    pass: s.ratio_decreasing,
                });
            }
        }
        out
    }

    /// Columns `t, xi, gds_norm, residual_norm`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["t", "xi", "gds_norm", "residual_norm"])
            .map_err(|e| BgkError::Io(e.to_string()))?;
        for s in &self.series {
            for (k, &t) in self.times.iter().enumerate() {
                w.write_record([
                    fmt17(t),
                    fmt17(s.xi),
                    fmt17(s.gds_norm[k]),
                    fmt17(s.residual_norm[k]),
                ])
                .map_err(|e| BgkError::Io(e.to_string()))?;
            }
        }
        w.flush()?;
        Ok(())
    }

    /// Semi-log plot of both norms against time.
    pub fn to_svg(&self) -> String {
        let mut plot = Plot::new("decay onto the grossly determined part", "t", "log10 norm");
        for s in &self.series {
            for (label, values) in [("gds", &s.gds_norm), ("residual", &s.residual_norm)] {
                let points: Vec<(f64, f64)> = self
                    .times
                    .iter()
                    .zip(values.iter())
                    .filter(|(_, &y)| y > 0.0)
                    .map(|(&t, &y)| (t, y.log10()))
                    .collect();
                if !points.is_empty() {
                    plot.push(Series::new(format!("{label} xi={}", s.xi), points));
                }
            }
        }
        plot.render()
    }
}

/// Evolves each ξ slice of `data` over `times` and fits decay rates.
pub fn decay_study(
    data: &InitialData,
    xis: &[f64],
    times: &[f64],
    disc: Discretization,
    opts: DecayOptions,
) -> Result<DecayReport> {
    if times.windows(2).any(|w| w[1] <= w[0]) || times.iter().any(|t| !(*t >= 0.0)) {
        return Err(BgkError::InvalidArgument(
            "times must be nonnegative and strictly increasing".into(),
        ));
    }
    let window: Vec<usize> = (0..times.len())
        .filter(|&k| times[k] >= opts.burn_in)
        .collect();
    if window.len() < 3 {
        return Err(BgkError::InvalidArgument(format!(
            "fit window t >= {} holds {} samples; at least 3 are needed",
            opts.burn_in,
            window.len()
        )));
    }
    let grid = Arc::new(disc.velocity_grid()?);
    let rule = Arc::new(disc.panel_rule()?);
    let series = xis
        .par_iter()
        .map(|&xi| {
            decay_series(
                data,
                xi,
                times,
                &window,
                Arc::clone(&grid),
                Arc::clone(&rule),
                opts,
            )
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DecayReport {
        schema_version: SCHEMA_VERSION,
        corpus: data.name.clone(),
        times: times.to_vec(),
        burn_in: opts.burn_in,
        series,
    })
}

fn decay_series(
    data: &InitialData,
    xi: f64,
    times: &[f64],
    window: &[usize],
    grid: Arc<VelocityGrid>,
    rule: Arc<PanelRule>,
    opts: DecayOptions,
) -> Result<DecaySeries> {
    let slice = SpectralSlice::from_initial_on(data, xi, rule)?;
    let gds_shape = VSliceFunction::from_fn(Arc::clone(&grid), xi, |v| slice.gds_profile(v))?;
    let mut gds_norm = Vec::with_capacity(times.len());
    let mut residual_norm = Vec::with_capacity(times.len());
    let mut total_norm = Vec::with_capacity(times.len());
    let mut residual_density = Vec::with_capacity(times.len());
    let mut oracle_err: Option<f64> = None;
    let mut oracle_state = if opts.oracle {
        Some((0.0, data.slice(Arc::clone(&grid), xi)?))
    } else {
        None
    };
    for &t in times {
        let f = evolve_spectral(&slice, Arc::clone(&grid), t)?;
        let amp = slice
            .lambda()
            .map_or(Complex64::new(0.0, 0.0), |l| (l * t).exp() * slice.c0());
        let gds = gds_shape.scale(amp);
        let residual = f.sub(&gds);
        gds_norm.push(norm_phi(&gds));
        residual_norm.push(norm_phi(&residual));
        total_norm.push(norm_phi(&f));
        residual_density.push(density_moment(&residual).norm());
        if let Some((t_prev, state)) = oracle_state.take() {
            let next = oracle_integrate(&state, t - t_prev, opts.dt)?;
            let err = norm_phi(&f.sub(&next)) / norm_phi(&next).max(f64::MIN_POSITIVE);
            oracle_err = Some(oracle_err.map_or(err, |e: f64| e.max(err)));
            oracle_state = Some((t, next));
        }
    }
    let tw: Vec<f64> = window.iter().map(|&k| times[k]).collect();
    let pick = |v: &[f64]| -> Vec<f64> { window.iter().map(|&k| v[k]).collect() };
    let ratios: Vec<f64> = window
        .iter()
        .map(|&k| residual_norm[k] / gds_norm[k])
        .collect();
    Ok(DecaySeries {
        xi,
        lambda: slice.lambda(),
        chi: slice.chi(),
        c0: slice.c0(),
        slope_gds: fit_log_slope(&tw, &pick(&gds_norm)),
        slope_residual: fit_log_slope(&tw, &pick(&residual_norm)),
        slope_total: fit_log_slope(&tw, &pick(&total_norm)),
        ratio_decreasing: ratios.iter().all(|r| r.is_finite())
            && ratios.windows(2).all(|w| w[1] < w[0]),
        gds_norm,
        residual_norm,
        total_norm,
        residual_density,
        oracle_max_rel_error: oracle_err,
    })
}

/// `ρ(x) ≈ (1/2π) ∫ e^{iξx} ρ̂(ξ) dξ` by the trapezoid rule on the sampled
/// ξ window. Diagnostic only: the window truncation is not controlled.
pub fn inverse_transform_density(
    xis: &[f64],
    rho_hat: &[Complex64],
    xs: &[f64],
) -> Result<Vec<Complex64>> {
    if xis.len() != rho_hat.len() || xis.len() < 2 {
        return Err(BgkError::InvalidArgument(
            "inverse transform needs at least two (xi, rho) samples".into(),
        ));
    }
    if xis.windows(2).any(|w| w[1] <= w[0]) {
        return Err(BgkError::InvalidArgument(
            "xi samples must be increasing".into(),
        ));
    }
    Ok(xs
        .iter()
        .map(|&x| {
            let f = |k: usize| Complex64::from_polar(1.0, xis[k] * x) * rho_hat[k];
            (1..xis.len())
                .map(|k| 0.5 * (xis[k] - xis[k - 1]) * (f(k) + f(k - 1)))
                .sum::<Complex64>()
                / (2.0 * PI)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coefficients::VelocityProfile;
    use approx::assert_relative_eq;

    fn resolved() -> Arc<VelocityGrid> {
        Arc::new(VelocityGrid::resolved())
    }

    fn gaussian() -> Arc<dyn VelocityProfile> {
        Arc::new(|v: f64| Complex64::new((-v * v).exp(), 0.0))
    }

    fn rel(a: &VSliceFunction, b: &VSliceFunction) -> f64 {
        norm_phi(&a.sub(b)) / norm_phi(b)
    }

    #[test]
    fn reconstruction_at_t0() {
        let grid = resolved();
        for &xi in &[0.0, 0.25, 1.5, 2.0, -0.5] {
            let slice = SpectralSlice::build(xi, gaussian()).unwrap();
            let f = evolve_spectral(&slice, Arc::clone(&grid), 0.0).unwrap();
            let exact =
                VSliceFunction::from_fn(Arc::clone(&grid), xi, |v| gaussian().eval(v)).unwrap();
            assert!(rel(&f, &exact) < 1e-10, "xi = {xi}: {}", rel(&f, &exact));
        }
    }

    #[test]
    fn reconstruction_off_the_quadrature_nodes() {
        let grid = Arc::new(VelocityGrid::gauss_hermite(60).unwrap());
        let slice = SpectralSlice::build(0.5, gaussian()).unwrap();
        let f = evolve_spectral(&slice, Arc::clone(&grid), 0.0).unwrap();
        let exact = VSliceFunction::from_fn(grid, 0.5, |v| gaussian().eval(v)).unwrap();
        assert!(rel(&f, &exact) < 1e-8);
    }

    #[test]
    fn pure_gds_slice_evolves_exactly() {
        let grid = resolved();
        let xi = 1.0;
        let l = lambda_of_xi(xi).unwrap();
        let slice = SpectralSlice::build(
            xi,
            Arc::new(move |v: f64| Complex64::new(1.0 + l, xi * v).inv()),
        )
        .unwrap();
        for &t in &[0.5, 2.0] {
            let f = evolve_spectral(&slice, Arc::clone(&grid), t).unwrap();
            let g = gds_solution(Complex64::new(1.0, 0.0), xi, t, Arc::clone(&grid)).unwrap();
            assert!(rel(&f, &g) < 1e-12);
        }
    }

    #[test]
    fn spectral_matches_oracle() {
        let grid = resolved();
        for &xi in &[0.5, 1.5] {
            let slice = SpectralSlice::build(xi, gaussian()).unwrap();
            let f0 =
                VSliceFunction::from_fn(Arc::clone(&grid), xi, |v| gaussian().eval(v)).unwrap();
            let o = oracle_integrate(&f0, 1.0, 0.01).unwrap();
            let s = evolve_spectral(&slice, Arc::clone(&grid), 1.0).unwrap();
            assert!(rel(&s, &o) < 1e-8, "xi = {xi}: {}", rel(&s, &o));
        }
    }

    #[test]
    fn oracle_zero_wavenumber_closed_form() {
        let grid = Arc::new(VelocityGrid::gauss_hermite(80).unwrap());
        let f0 =
            VSliceFunction::from_fn(Arc::clone(&grid), 0.0, |v| Complex64::new(v * v + v, 0.0))
                .unwrap();
        let rho = density_moment(&f0);
        for &t in &[0.3, 1.0, 2.5] {
            let f = oracle_integrate(&f0, t, 0.01).unwrap();
            assert!((density_moment(&f) - rho).norm() < 1e-10);
            for (z, z0) in f.values.iter().zip(&f0.values) {
                let exact = rho + (-t).exp() * (z0 - rho);
                assert!((z - exact).norm() < 1e-8);
            }
        }
    }

    #[test]
    fn oracle_eigenfunction() {
        let grid = resolved();
        let xi = 0.5;
        let l = lambda_of_xi(xi).unwrap();
        let g = gds_solution(Complex64::new(1.0, 0.0), xi, 0.0, Arc::clone(&grid)).unwrap();
        let o = oracle_integrate(&g, 1.0, 0.01).unwrap();
        assert!(rel(&o, &g.scale(Complex64::new(l.exp(), 0.0))) < 1e-5);
    }

    #[test]
    fn oracle_argument_checks() {
        let grid = Arc::new(VelocityGrid::gauss_hermite(8).unwrap());
        let f0 = VSliceFunction::from_fn(grid, 0.5, |_| Complex64::new(1.0, 0.0)).unwrap();
        assert!(oracle_integrate(&f0, 1.0, 0.0).is_err());
        assert!(oracle_integrate(&f0, -1.0, 0.01).is_err());
        assert_eq!(oracle_integrate(&f0, 0.0, 0.01).unwrap(), f0);
    }

    #[test]
    fn gds_moments_and_semigroup() {
        let grid = resolved();
        let rho = Complex64::new(0.3, 0.4);
        let xi = 0.25;
        let l = lambda_of_xi(xi).unwrap();
        let g = gds_solution(rho, xi, 1.7, Arc::clone(&grid)).unwrap();
        assert!((density_moment(&g) - rho * (l * 1.7).exp()).norm() < 1e-12);
        let at0 = gds_solution(rho, 0.0, 3.0, Arc::clone(&grid)).unwrap();
        assert!(at0.values.iter().all(|z| (z - rho).norm() < 1e-15));
        assert!(gds_solution(rho, 2.0, 0.0, grid).is_err());
    }

    #[test]
    fn slope_fit() {
        let t = [1.0f64, 2.0, 3.0, 4.0];
        let y: Vec<f64> = t.iter().map(|&s| 3.0 * (-0.7 * s).exp()).collect();
        assert_relative_eq!(fit_log_slope(&t, &y).unwrap(), -0.7, epsilon = 1e-13);
        assert!(fit_log_slope(&t, &[1.0, 0.0, 1.0, 1.0]).is_none());
        assert!(fit_log_slope(&[1.0], &[1.0]).is_none());
    }

    #[test]
    fn decay_study_window_checks() {
        let data =
            InitialData::new("g", (-2.0, 2.0), |_, v| Complex64::new((-v * v).exp(), 0.0)).unwrap();
        let opts = DecayOptions::default();
        let disc = Discretization::default();
        assert!(decay_study(&data, &[0.5], &[0.0, 1.0, 2.0], disc, opts).is_err());
        assert!(decay_study(&data, &[0.5], &[0.0, 2.0, 1.0, 3.0], disc, opts).is_err());
    }

    #[test]
    fn decay_report_outputs() {
        let data =
            InitialData::new("g", (-2.0, 2.0), |_, v| Complex64::new((-v * v).exp(), 0.0)).unwrap();
        let times: Vec<f64> = (0..=8).map(|k| 0.5 * k as f64).collect();
        let opts = DecayOptions {
            oracle: false,
            ..DecayOptions::default()
        };
        let r = decay_study(&data, &[1.0], &times, Discretization::default(), opts).unwrap();
        let s = &r.series[0];
        assert_relative_eq!(
            s.slope_gds.unwrap(),
            lambda_of_xi(1.0).unwrap(),
            max_relative = 1e-10
        );
        assert!(s.ratio_decreasing);
        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        let csv = String::from_utf8(buf).unwrap();
        assert!(csv.starts_with("t,xi,gds_norm,residual_norm\n"));
        assert_eq!(csv.lines().count(), 10);
        assert!(r.to_svg().contains("<polyline"));
        let json = serde_json::to_value(&r).unwrap();
        assert_eq!(json["schema_version"], SCHEMA_VERSION);
    }

    #[test]
    fn inverse_transform_of_gaussian() {
        // ρ̂(ξ) = e^{−ξ²/4}·√(4π)/(2π)·2π ↔ ρ(x) = e^{−x²}
        let xis: Vec<f64> = (0..=400).map(|k| -20.0 + 0.1 * k as f64).collect();
        let rho: Vec<Complex64> = xis
            .iter()
            .map(|&x| Complex64::new(PI.sqrt() * (-x * x / 4.0).exp(), 0.0))
            .collect();
        let out = inverse_transform_density(&xis, &rho, &[0.0, 0.5, 1.0]).unwrap();
        for (z, &x) in out.iter().zip(&[0.0f64, 0.5, 1.0]) {
            assert!((z.re - (-x * x).exp()).abs() < 1e-10);
        }
        assert!(inverse_transform_density(&[0.0], &rho[..1], &[0.0]).is_err());
    }

    #[test]
    fn field_layout() {
        let data = InitialData::new("g", (-2.0, 2.0), |xi, v| {
            Complex64::new((-v * v).exp() * (1.0 + xi), 0.0)
        })
        .unwrap();
        let grid = Arc::new(VelocityGrid::gauss_hermite(20).unwrap());
        let f = ComplexField2D::sample(&data, vec![0.0, 1.0], grid).unwrap();
        assert_eq!(f.row(1).len(), 20);
        let d = f.density();
        assert!((d[1] - 2.0 * d[0]).norm() < 1e-14);
        assert_eq!(f.slice(1).unwrap().xi, 1.0);
        assert!(ComplexField2D::sample(&data, vec![3.0], Arc::clone(&f.v_grid)).is_err());
    }

    #[test]
    fn oscillation_budget_triggers_for_long_times() {
        let slice = SpectralSlice::build(1.5, gaussian()).unwrap();
        assert!(oscillation_budget(&slice, 4.0).is_none());
        assert!(oscillation_budget(&slice, 200.0).is_some());
    }
}
