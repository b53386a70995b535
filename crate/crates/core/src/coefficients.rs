//! Spectral coefficients of initial data: the real-branch weight `C₀(ξ)` and
//! the line weight `K₀(ξ, v)`.
//!
//! With `F = φ(f̂₀ − C₀/(1+Λ+iξv))`, `h = F/(X⁺(A+B))`:
//!
//! ```text
//! C₀ = ∫ φ f̂₀ / ((A+B) X⁺ (τ+i)) dτ  /  ∫ φ / ((A+B) X⁺ (1+Λ+iξτ)(τ+i)) dτ
//! K₀ = A F/(A²−B²) − X⁺ B/(A−B) · (1/πi) p.v.∫ h(τ)/(τ−v) dτ
//! ```
//!
//! The first line is the solvability condition of the index −1 problem
//! (`h` must integrate to zero against `1/(τ+i)`); for `|ξ| ≥ √π` the index
//! is 0 and `C₀ = 0`. Internally the slice stores `K̃ = K₀/φ`, which stays
//! well scaled where φ underflows.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use log::warn;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::dispersion::lambda_of_xi;
use crate::error::{BgkError, Result};
use crate::operator::VSliceFunction;
use crate::quadrature::{PanelRule, VelocityGrid};
use crate::riemann::{default_rule, BoundaryCoefficients, CanonicalSolution};
use crate::specfun::{gaussian_weight, SQRT_PI};

/// Difference quotients above this trigger the Hölder screen warning.
pub const DEFAULT_HOLDER_BOUND: f64 = 1e4;
/// Largest admissible `|K₀(v)|` for `|v| > TAIL_START`.
pub const DEFAULT_TAIL_TOLERANCE: f64 = 1e-6;
pub const TAIL_START: f64 = 6.0;

/// A function of velocity at fixed ξ.
pub trait VelocityProfile: Send + Sync {
    fn eval(&self, v: f64) -> Complex64;
}

impl<F> VelocityProfile for F
where
    F: Fn(f64) -> Complex64 + Send + Sync,
{
    fn eval(&self, v: f64) -> Complex64 {
        self(v)
    }
}

/// Natural cubic spline through gridded samples; zero outside the knots.
#[derive(Debug, Clone, PartialEq)]
pub struct SplineProfile {
    knots: Vec<f64>,
    values: Vec<Complex64>,
    second: Vec<Complex64>,
}

impl SplineProfile {
    pub fn new(knots: Vec<f64>, values: Vec<Complex64>) -> Result<Self> {
        let n = knots.len();
        if n < 3 || values.len() != n {
            return Err(BgkError::InvalidArgument(
                "spline needs at least 3 knots and one value per knot".into(),
            ));
        }
        if knots.windows(2).any(|w| w[1] <= w[0]) {
            return Err(BgkError::InvalidArgument(
                "spline knots must be strictly increasing".into(),
            ));
        }
        // tridiagonal system for the second derivatives, natural end conditions
        let mut diag = vec![0.0; n];
        let mut rhs = vec![Complex64::new(0.0, 0.0); n];
        let mut upper = vec![0.0; n];
        diag[0] = 1.0;
        diag[n - 1] = 1.0;
        for k in 1..n - 1 {
            let h0 = knots[k] - knots[k - 1];
            let h1 = knots[k + 1] - knots[k];
            let lower = h0 / 6.0;
            diag[k] = (h0 + h1) / 3.0;
            upper[k] = h1 / 6.0;
            rhs[k] = (values[k + 1] - values[k]) / h1 - (values[k] - values[k - 1]) / h0;
            // eliminate the sub-diagonal
            let m = lower / diag[k - 1];
            diag[k] -= m * upper[k - 1];
            rhs[k] = rhs[k] - rhs[k - 1] * m;
        }
        let mut second = vec![Complex64::new(0.0, 0.0); n];
        for k in (1..n - 1).rev() {
            second[k] = (rhs[k] - second[k + 1] * upper[k]) / diag[k];
        }
        Ok(Self {
            knots,
            values,
            second,
        })
    }

    pub fn from_slice(slice: &VSliceFunction) -> Result<Self> {
        Self::new(slice.nodes().to_vec(), slice.values.clone())
    }
}

impl VelocityProfile for SplineProfile {
    fn eval(&self, v: f64) -> Complex64 {
        let n = self.knots.len();
        if !(v >= self.knots[0] && v <= self.knots[n - 1]) {
            return Complex64::new(0.0, 0.0);
        }
        let k = self.knots.partition_point(|&x| x <= v).clamp(1, n - 1);
        let (x0, x1) = (self.knots[k - 1], self.knots[k]);
        let h = x1 - x0;
        let a = (x1 - v) / h;
        let b = (v - x0) / h;
        self.values[k - 1] * a
            + self.values[k] * b
            + (self.second[k - 1] * (a * a * a - a) + self.second[k] * (b * b * b - b))
                * (h * h / 6.0)
    }
}

type Field = dyn Fn(f64, f64) -> Complex64 + Send + Sync;

/// `f̂₀(ξ, v)`, zero for ξ outside the declared support.
#[derive(Clone)]
pub struct InitialData {
    pub name: String,
    field: Arc<Field>,
    pub xi_support: (f64, f64),
    /// caller's assertion that f̂₀ is Hölder continuous in v
    pub smoothness_certificate: bool,
}

impl fmt::Debug for InitialData {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("InitialData")
            .field("name", &self.name)
            .field("xi_support", &self.xi_support)
            .field("smoothness_certificate", &self.smoothness_certificate)
            .finish()
    }
}

impl InitialData {
    pub fn new<F>(name: impl Into<String>, xi_support: (f64, f64), field: F) -> Result<Self>
    where
        F: Fn(f64, f64) -> Complex64 + Send + Sync + 'static,
    {
        let (lo, hi) = xi_support;
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(BgkError::InvalidArgument(format!(
                "invalid xi support [{lo}, {hi}]"
            )));
        }
        Ok(Self {
            name: name.into(),
            field: Arc::new(field),
            xi_support,
            smoothness_certificate: true,
        })
    }

    /// Gridded data on a ξ × v product grid; each row is interpolated in v by
    /// a natural cubic spline and ξ must match a grid row.
    pub fn from_rows(
        name: impl Into<String>,
        xi_grid: Vec<f64>,
        v_nodes: Vec<f64>,
        rows: Vec<Vec<Complex64>>,
    ) -> Result<Self> {
        if xi_grid.is_empty() || xi_grid.len() != rows.len() {
            return Err(BgkError::InvalidArgument(
                "one row of samples per xi value is required".into(),
            ));
        }
        let splines = rows
            .into_iter()
            .map(|row| SplineProfile::new(v_nodes.clone(), row))
            .collect::<Result<Vec<_>>>()?;
        let lo = xi_grid.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = xi_grid.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let grid = xi_grid.clone();
        let field = move |xi: f64, v: f64| match grid.iter().position(|&x| (x - xi).abs() <= 1e-12)
        {
            Some(k) => splines[k].eval(v),
            None => Complex64::new(f64::NAN, 0.0),
        };
        let pad = if hi > lo { 1e-12 * (hi - lo) } else { 1e-12 };
        Self::new(name, (lo - pad, hi + pad), field)
    }

    pub fn with_certificate(mut self, certified: bool) -> Self {
        self.smoothness_certificate = certified;
        self
    }

    pub fn in_support(&self, xi: f64) -> bool {
        xi >= self.xi_support.0 && xi <= self.xi_support.1
    }

    pub fn eval(&self, xi: f64, v: f64) -> Complex64 {
        if self.in_support(xi) {
            (self.field)(xi, v)
        } else {
            Complex64::new(0.0, 0.0)
        }
    }

    /// `f̂₀(ξ, ·)` as a velocity profile.
    pub fn profile(&self, xi: f64) -> Arc<dyn VelocityProfile> {
        let data = self.clone();
        Arc::new(move |v: f64| data.eval(xi, v))
    }

    pub fn slice(&self, grid: Arc<VelocityGrid>, xi: f64) -> Result<VSliceFunction> {
        VSliceFunction::from_fn(grid, xi, |v| self.eval(xi, v))
    }
}

/// Thresholds applied while building a slice.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SliceOptions {
    pub holder_bound: f64,
    pub tail_tolerance: f64,
}

impl Default for SliceOptions {
    fn default() -> Self {
        Self {
            holder_bound: DEFAULT_HOLDER_BOUND,
            tail_tolerance: DEFAULT_TAIL_TOLERANCE,
        }
    }
}

/// Coefficients `(C₀, K₀)` for one wavenumber.
#[derive(Clone)]
pub struct SpectralSlice {
    xi: f64,
    lambda: Option<f64>,
    c0: Complex64,
    /// `K̃ = K₀/φ` on the canonical solution's nodes
    k_tilde: Vec<Complex64>,
    /// `h = F/(X⁺(A+B))` on the same nodes
    h: Vec<Complex64>,
    canonical: Arc<CanonicalSolution>,
    profile: Arc<dyn VelocityProfile>,
    holder_warning: bool,
}

impl fmt::Debug for SpectralSlice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SpectralSlice")
            .field("xi", &self.xi)
            .field("lambda", &self.lambda)
            .field("chi", &self.chi())
            .field("c0", &self.c0)
            .finish_non_exhaustive()
    }
}

impl SpectralSlice {
    pub fn build(xi: f64, profile: Arc<dyn VelocityProfile>) -> Result<Self> {
        Self::build_with(xi, profile, SliceOptions::default())
    }

    pub fn from_initial(data: &InitialData, xi: f64) -> Result<Self> {
        Self::from_initial_on(data, xi, default_rule())
    }

    /// As [`SpectralSlice::from_initial`] with a caller-chosen panel rule.
    pub fn from_initial_on(data: &InitialData, xi: f64, rule: Arc<PanelRule>) -> Result<Self> {
        let canonical = Arc::new(CanonicalSolution::with_rule(xi, rule)?);
        let slice = Self::with_canonical(canonical, data.profile(xi), SliceOptions::default())?;
        if !data.smoothness_certificate {
            warn!("initial data '{}' carries no Hölder certificate", data.name);
        }
        Ok(slice)
    }

    pub fn build_with(
        xi: f64,
        profile: Arc<dyn VelocityProfile>,
        opts: SliceOptions,
    ) -> Result<Self> {
        let canonical = Arc::new(CanonicalSolution::build(xi)?);
        Self::with_canonical(canonical, profile, opts)
    }

    /// Builds on a precomputed canonical solution (shared across profiles).
    pub fn with_canonical(
        canonical: Arc<CanonicalSolution>,
        profile: Arc<dyn VelocityProfile>,
        opts: SliceOptions,
    ) -> Result<Self> {
        let xi = canonical.xi();
        let lambda = if xi.abs() < SQRT_PI {
            Some(lambda_of_xi(xi)?)
        } else {
            None
        };
        let nodes = canonical.nodes();
        let f0: Vec<Complex64> = nodes.par_iter().map(|&v| profile.eval(v)).collect();
        if f0.iter().any(|z| !z.is_finite()) {
            return Err(BgkError::NonFinite("initial data samples"));
        }
        let holder_warning = holder_screen(nodes, &f0, opts.holder_bound);
        let bc = BoundaryCoefficients::new(xi)?;
        let c0 = match lambda {
            Some(l) => c0_from_samples(&canonical, &bc, l, &f0)?,
            None => Complex64::new(0.0, 0.0),
        };
        let mut slice = Self {
            xi,
            lambda,
            c0,
            k_tilde: Vec::new(),
            h: Vec::new(),
            canonical,
            profile,
            holder_warning,
        };
        slice.fill_line_weights(&f0);
        if slice.k_tilde.iter().any(|z| !z.is_finite()) {
            return Err(BgkError::NonFinite("K0 on the quadrature nodes"));
        }
        let tail = slice.k0_tail_max();
        if tail > opts.tail_tolerance {
            return Err(BgkError::InvalidInputClass(format!(
                "K0 does not decay: max |K0(v)| over |v| > {TAIL_START} is {tail:e} at xi = {xi}"
            )));
        }
        Ok(slice)
    }

    pub fn xi(&self) -> f64 {
        self.xi
    }

    /// `Λ(ξ)`, or `None` on the index-0 branch `|ξ| ≥ √π`.
    pub fn lambda(&self) -> Option<f64> {
        self.lambda
    }

    pub fn chi(&self) -> i32 {
        self.canonical.chi()
    }

    pub fn c0(&self) -> Complex64 {
        self.c0
    }

    pub fn holder_warning(&self) -> bool {
        self.holder_warning
    }

    pub fn canonical(&self) -> &Arc<CanonicalSolution> {
        &self.canonical
    }

    pub fn profile(&self) -> &Arc<dyn VelocityProfile> {
        &self.profile
    }

    pub fn nodes(&self) -> &[f64] {
        self.canonical.nodes()
    }

    pub fn k_tilde_nodes(&self) -> &[Complex64] {
        &self.k_tilde
    }

    /// `K₀` on the quadrature nodes.
    pub fn k0_nodes(&self) -> Vec<Complex64> {
        self.nodes()
            .iter()
            .zip(&self.k_tilde)
            .map(|(&v, &k)| k * gaussian_weight(v))
            .collect()
    }

    /// `1/(1+Λ+iξv)`, or 0 on the index-0 branch.
    pub fn gds_profile(&self, v: f64) -> Complex64 {
        match self.lambda {
            Some(l) => Complex64::new(1.0 + l, self.xi * v).inv(),
            None => Complex64::new(0.0, 0.0),
        }
    }

    /// `K̃(v) = K₀(v)/φ(v)` at any velocity.
    pub fn k_tilde_at(&self, v: f64) -> Complex64 {
        if let Some(j) = self.canonical.node_index(v) {
            return self.k_tilde[j];
        }
        let bc = BoundaryCoefficients { xi: self.xi };
        let ft = self.profile.eval(v) - self.gds_profile(v) * self.c0;
        let xp = self.canonical.x_plus_at(v);
        let hv = ft * gaussian_weight(v) / (xp * bc.a_plus_b(v));
        let pv = self.canonical.rule().pv_at_point(&self.h, v, hv);
        k_tilde_formula(&bc, v, ft, xp, pv)
    }

    pub fn k0_at(&self, v: f64) -> Complex64 {
        self.k_tilde_at(v) * gaussian_weight(v)
    }

    /// `K₀` on an arbitrary velocity grid.
    pub fn k0_on(&self, grid: Arc<VelocityGrid>) -> Result<VSliceFunction> {
        let values = grid.nodes().par_iter().map(|&v| self.k0_at(v)).collect();
        VSliceFunction::new(grid, values, self.xi)
    }

    /// Fills `h` and `K̃` on the nodes from samples of f̂₀ and the current C₀.
    fn fill_line_weights(&mut self, f0: &[Complex64]) {
        let bc = BoundaryCoefficients { xi: self.xi };
        let nodes = self.canonical.nodes();
        let x_plus = self.canonical.x_plus_nodes();
        let f_tilde: Vec<Complex64> = nodes
            .iter()
            .zip(f0)
            .map(|(&v, &f)| f - self.gds_profile(v) * self.c0)
            .collect();
        self.h = nodes
            .iter()
            .zip(&f_tilde)
            .zip(x_plus)
            .map(|((&v, &ft), &xp)| ft * gaussian_weight(v) / (xp * bc.a_plus_b(v)))
            .collect();
        let pv = self.canonical.rule().pv_all_nodes(&self.h);
        self.k_tilde = nodes
            .iter()
            .zip(&f_tilde)
            .zip(x_plus)
            .zip(&pv)
            .map(|(((&v, &ft), &xp), &p)| k_tilde_formula(&bc, v, ft, xp, p))
            .collect();
    }

    fn k0_tail_max(&self) -> f64 {
        self.nodes()
            .iter()
            .zip(&self.k_tilde)
            .filter(|(v, _)| v.abs() > TAIL_START)
            .map(|(&v, k)| k.norm() * gaussian_weight(v))
            .fold(0.0, f64::max)
    }

    /// Serialisable record `{xi, lambda, chi, c0, k0: {nodes, values}}`.
    pub fn record(&self) -> SliceRecord {
        SliceRecord {
            xi: self.xi,
            lambda: self.lambda,
            chi: self.chi(),
            c0: self.c0,
            k0: NodeValues {
                nodes: self.nodes().to_vec(),
                values: self.k0_nodes(),
            },
        }
    }
}

fn k_tilde_formula(
    bc: &BoundaryCoefficients,
    v: f64,
    f_tilde: Complex64,
    xp: Complex64,
    pv: Complex64,
) -> Complex64 {
    let a = bc.a(v);
    let b = bc.b(v);
    // −X⁺B/(A−B)·(1/πi)·p.v. with B = −πφ, divided through by φ
    a * f_tilde / (a * a - b * b) + xp * PI / (a - b) * pv / Complex64::new(0.0, PI)
}

fn c0_from_samples(
    canonical: &CanonicalSolution,
    bc: &BoundaryCoefficients,
    lambda: f64,
    f0: &[Complex64],
) -> Result<Complex64> {
    let xi = canonical.xi();
    let rule = canonical.rule();
    let mut num = Complex64::new(0.0, 0.0);
    let mut den = Complex64::new(0.0, 0.0);
    let mut scale = 0.0;
    for (((&v, &w), &xp), &f) in rule
        .nodes()
        .iter()
        .zip(rule.weights())
        .zip(canonical.x_plus_nodes())
        .zip(f0)
    {
        let common = w * gaussian_weight(v) / (bc.a_plus_b(v) * xp * Complex64::new(v, 1.0));
        num += common * f;
        let d = common / Complex64::new(1.0 + lambda, xi * v);
        den += d;
        scale += d.norm();
    }
    if den.norm() <= 1e-13 * scale {
        return Err(BgkError::Degenerate(format!(
            "C0 denominator integral vanishes at xi = {xi}"
        )));
    }
    Ok(num / den)
}

/// Flags difference quotients above `bound`; a heuristic, not a proof.
fn holder_screen(nodes: &[f64], values: &[Complex64], bound: f64) -> bool {
    let worst = nodes
        .windows(2)
        .zip(values.windows(2))
        .map(|(x, f)| (f[1] - f[0]).norm() / (x[1] - x[0]))
        .fold(0.0, f64::max);
    if worst > bound {
        warn!("Hölder screen: difference quotient {worst:e} exceeds {bound:e}");
        true
    } else {
        false
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NodeValues {
    pub nodes: Vec<f64>,
    pub values: Vec<Complex64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SliceRecord {
    pub xi: f64,
    pub lambda: Option<f64>,
    pub chi: i32,
    #[serde(rename = "C0")]
    pub c0: Complex64,
    #[serde(rename = "K0")]
    pub k0: NodeValues,
}

/// `F₀ = φ(f̂₀ − C₀/(1+Λ+iξv))` on the slice's grid.
pub fn build_f0(fhat0: &VSliceFunction, c0: Complex64) -> Result<VSliceFunction> {
    let lambda = lambda_of_xi(fhat0.xi)?;
    let xi = fhat0.xi;
    let values = fhat0
        .nodes()
        .iter()
        .zip(&fhat0.values)
        .map(|(&v, &f)| gaussian_weight(v) * (f - c0 / Complex64::new(1.0 + lambda, xi * v)))
        .collect();
    VSliceFunction::new(Arc::clone(&fhat0.grid), values, xi)
}

/// `C₀` for gridded data; the samples are spline-interpolated onto the
/// quadrature nodes. Zero for `|ξ| ≥ √π`.
pub fn compute_c0(fhat0: &VSliceFunction) -> Result<Complex64> {
    if fhat0.xi.abs() >= SQRT_PI {
        return Ok(Complex64::new(0.0, 0.0));
    }
    Ok(SpectralSlice::build(fhat0.xi, Arc::new(SplineProfile::from_slice(fhat0)?))?.c0())
}

/// `K₀` on the slice's own grid for a given `C₀`.
pub fn compute_k0(fhat0: &VSliceFunction, c0: Complex64) -> Result<VSliceFunction> {
    let spline = Arc::new(SplineProfile::from_slice(fhat0)?);
    let canonical = Arc::new(CanonicalSolution::build(fhat0.xi)?);
    let mut slice = SpectralSlice::with_canonical(canonical, spline, SliceOptions::default())?;
    if slice.c0 != c0 {
        slice = slice.with_c0(c0)?;
    }
    slice.k0_on(Arc::clone(&fhat0.grid))
}

impl SpectralSlice {
    /// Recomputes `K₀` for a prescribed `C₀` (used for negative controls).
    pub fn with_c0(&self, c0: Complex64) -> Result<Self> {
        if self.lambda.is_none() && c0 != Complex64::new(0.0, 0.0) {
            return Err(BgkError::Domain(format!(
                "C0 must vanish for |xi| >= sqrt(pi) (xi = {})",
                self.xi
            )));
        }
        let mut out = self.clone();
        out.c0 = c0;
        let f0: Vec<Complex64> = self.nodes().iter().map(|&v| self.profile.eval(v)).collect();
        out.fill_line_weights(&f0);
        Ok(out)
    }
}
