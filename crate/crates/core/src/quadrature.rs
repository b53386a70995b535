//! Quadrature infrastructure.
//!
//! Two kinds of rule live here:
//!
//! * [`VelocityGrid`]: nodes and weights for φ-weighted integrals over ℝ,
//!   either Gauss–Hermite or a φ-weighted composite Gauss–Legendre rule
//!   graded toward `v = 0`.
//! * [`PanelRule`]: a composite Gauss–Legendre rule on a finite window with
//!   geometric grading toward a chosen centre. Principal-value integrals are
//!   evaluated on it by singularity subtraction,
//!   `p.v.∫ g(w)/(w−v) dw = ∫ (g(w)−g(v))/(w−v) dw + g(v)·ln|(b−v)/(a−v)|`,
//!   which stays valid when the pole coincides with a node (the divided
//!   difference is replaced by the panel-interpolated derivative there).

use std::num::NonZeroUsize;

use gauss_quad::{GaussHermite, GaussLegendre};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{BgkError, Result};
use crate::specfun::{gaussian_weight, SQRT_PI};

/// Default half-width of truncated windows.
pub const DEFAULT_TRUNCATION: f64 = 8.0;
/// Default Gauss–Hermite order.
pub const DEFAULT_HERMITE_ORDER: usize = 200;
/// Default Gauss–Legendre nodes per panel.
pub const DEFAULT_PANEL_ORDER: usize = 20;
/// Default width of the innermost panel of a graded rule.
pub const DEFAULT_INNER_WIDTH: f64 = 1e-3;

/// Largest ratio between neighbouring panel widths in a graded rule.
const GRADING_RATIO: f64 = 1.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum GridKind {
    GaussHermite,
    Composite,
}

/// Window, grading and panel order shared by the velocity grid and the
/// panel rule, so that evolution samples land on the Cauchy-integral nodes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Discretization {
    pub truncation: f64,
    pub inner_width: f64,
    pub panel_order: usize,
}

impl Default for Discretization {
    fn default() -> Self {
        Self {
            truncation: DEFAULT_TRUNCATION,
            inner_width: DEFAULT_INNER_WIDTH,
            panel_order: DEFAULT_PANEL_ORDER,
        }
    }
}

impl Discretization {
    pub fn velocity_grid(&self) -> Result<VelocityGrid> {
        VelocityGrid::composite(self.truncation, self.inner_width, self.panel_order)
    }

    pub fn panel_rule(&self) -> Result<PanelRule> {
        PanelRule::graded(
            -self.truncation,
            self.truncation,
            0.0,
            self.inner_width,
            self.panel_order,
        )
    }

    /// Raises the panel order so that `e^{−iξwt}` turns through at most one
    /// radian per node on the widest panel for `|ξ| ≤ xi_max`, `t ≤ t_max`.
    pub fn resolving(self, xi_max: f64, t_max: f64) -> Result<Self> {
        let rule = self.panel_rule()?;
        let needed = (xi_max.abs() * t_max * rule.max_panel_width()).ceil() as usize;
        Ok(Self {
            panel_order: self.panel_order.max(needed),
            ..self
        })
    }
}

/// Nodes and weights representing `∫ g(v) φ(v) dv` as `Σ w_k g(v_k)`.
///
/// Weights are normalised so that they sum to one; nodes are sorted and
/// symmetric about zero.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VelocityGrid {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    order: usize,
    kind: GridKind,
}

/// Gauss–Hermite grid of the given order under the weight φ.
pub fn gauss_hermite(order: usize) -> Result<VelocityGrid> {
    VelocityGrid::gauss_hermite(order)
}

impl VelocityGrid {
    pub fn gauss_hermite(order: usize) -> Result<Self> {
        if order < 2 {
            return Err(BgkError::InvalidArgument(format!(
                "Gauss-Hermite order must be at least 2, got {order}"
            )));
        }
        let rule = GaussHermite::new(NonZeroUsize::new(order).expect("order >= 2"));
        let mut pairs: Vec<(f64, f64)> = rule
            .as_node_weight_pairs()
            .iter()
            .map(|&(x, w)| (x, w / SQRT_PI))
            .collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let (nodes, weights) = symmetrize(pairs);
        Ok(Self {
            nodes,
            weights,
            order,
            kind: GridKind::GaussHermite,
        })
    }

    /// φ-weighted composite Gauss–Legendre grid on `[−half_width, half_width]`,
    /// graded geometrically toward `v = 0` from an innermost panel width.
    pub fn composite(half_width: f64, inner_width: f64, panel_order: usize) -> Result<Self> {
        let rule = PanelRule::graded(-half_width, half_width, 0.0, inner_width, panel_order)?;
        let pairs: Vec<(f64, f64)> = rule
            .nodes
            .iter()
            .zip(&rule.weights)
            .map(|(&x, &w)| (x, w * gaussian_weight(x)))
            .collect();
        let (nodes, weights) = symmetrize(pairs);
        Ok(Self {
            nodes,
            weights,
            order: panel_order,
            kind: GridKind::Composite,
        })
    }

    /// Composite grid with the default window and grading.
    pub fn resolved() -> Self {
        Self::composite(DEFAULT_TRUNCATION, DEFAULT_INNER_WIDTH, DEFAULT_PANEL_ORDER)
            .expect("default composite grid parameters are valid")
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn kind(&self) -> GridKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `Σ w_k g(v_k)`.
    pub fn integrate(&self, f: impl Fn(f64) -> Complex64) -> Complex64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&v, &w)| f(v) * w)
            .sum()
    }

    pub fn integrate_real(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&v, &w)| f(v) * w)
            .sum()
    }

    pub fn integrate_values(&self, values: &[Complex64]) -> Complex64 {
        debug_assert_eq!(values.len(), self.len());
        values.iter().zip(&self.weights).map(|(&g, &w)| g * w).sum()
    }
}

/// Sorts, enforces exact mirror symmetry and normalises the weights to sum 1.
fn symmetrize(mut pairs: Vec<(f64, f64)>) -> (Vec<f64>, Vec<f64>) {
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let n = pairs.len();
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for k in 0..n {
        let m = n - 1 - k;
        nodes[k] = 0.5 * (pairs[k].0 - pairs[m].0);
        weights[k] = 0.5 * (pairs[k].1 + pairs[m].1);
    }
    let total: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= total);
    (nodes, weights)
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Panel {
    start: usize,
    a: f64,
    b: f64,
}

/// Composite Gauss–Legendre rule on a finite window `[lo, hi]`.
#[derive(Debug, Clone)]
pub struct PanelRule {
    lo: f64,
    hi: f64,
    order: usize,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    panels: Vec<Panel>,
    /// differentiation matrix of the reference nodes on [−1, 1], row-major
    reference_diff: Vec<f64>,
}

impl PanelRule {
    /// Builds a rule from explicit, strictly increasing breakpoints.
    pub fn from_breakpoints(breakpoints: &[f64], order: usize) -> Result<Self> {
        if order < 2 {
            return Err(BgkError::InvalidArgument(format!(
                "panel order must be at least 2, got {order}"
            )));
        }
        if breakpoints.len() < 2 || breakpoints.windows(2).any(|w| w[1] <= w[0]) {
            return Err(BgkError::InvalidArgument(
                "panel breakpoints must be strictly increasing".into(),
            ));
        }
        let reference = GaussLegendre::new(NonZeroUsize::new(order).expect("order >= 2"));
        let mut reference: Vec<(f64, f64)> = reference.as_node_weight_pairs().to_vec();
        reference.sort_by(|a, b| a.0.total_cmp(&b.0));
        let ref_nodes: Vec<f64> = reference.iter().map(|p| p.0).collect();

        let mut nodes = Vec::with_capacity(order * (breakpoints.len() - 1));
        let mut weights = Vec::with_capacity(nodes.capacity());
        let mut panels = Vec::with_capacity(breakpoints.len() - 1);
        for w in breakpoints.windows(2) {
            let (a, b) = (w[0], w[1]);
            let half = 0.5 * (b - a);
            let mid = 0.5 * (a + b);
            panels.push(Panel {
                start: nodes.len(),
                a,
                b,
            });
            for &(x, wt) in &reference {
                nodes.push(mid + half * x);
                weights.push(half * wt);
            }
        }
        Ok(Self {
            lo: breakpoints[0],
            hi: *breakpoints.last().expect("non-empty"),
            order,
            nodes,
            weights,
            panels,
            reference_diff: differentiation_matrix(&ref_nodes),
        })
    }

    /// Rule on `[lo, hi]` whose panels grow geometrically away from `center`,
    /// starting from width `inner`.
    pub fn graded(lo: f64, hi: f64, center: f64, inner: f64, order: usize) -> Result<Self> {
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(BgkError::InvalidArgument(format!(
                "invalid window [{lo}, {hi}]"
            )));
        }
        if !(inner > 0.0) {
            return Err(BgkError::InvalidArgument(format!(
                "inner panel width must be positive, got {inner}"
            )));
        }
        let c = center.clamp(lo, hi);
        let mut left = side_breakpoints(c - lo, inner);
        let right = side_breakpoints(hi - c, inner);
        let mut breaks: Vec<f64> = left.drain(..).rev().map(|d| c - d).collect();
        if c > lo && c < hi {
            breaks.push(c);
        }
        breaks.extend(right.into_iter().map(|d| c + d));
        if c == lo {
            breaks.insert(0, lo);
        }
        if c == hi {
            breaks.push(hi);
        }
        breaks.dedup_by(|a, b| (*a - *b).abs() <= 1e-15 * (1.0 + b.abs()));
        // pin the window edges exactly
        breaks[0] = lo;
        *breaks.last_mut().expect("non-empty") = hi;
        Self::from_breakpoints(&breaks, order)
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn panel_count(&self) -> usize {
        self.panels.len()
    }

    pub fn max_panel_width(&self) -> f64 {
        self.panels.iter().map(|p| p.b - p.a).fold(0.0, f64::max)
    }

    pub fn sample<F>(&self, f: F) -> Vec<Complex64>
    where
        F: Fn(f64) -> Complex64 + Sync,
    {
        self.nodes.par_iter().map(|&x| f(x)).collect()
    }

    pub fn integrate(&self, values: &[Complex64]) -> Complex64 {
        debug_assert_eq!(values.len(), self.len());
        values.iter().zip(&self.weights).map(|(&g, &w)| g * w).sum()
    }

    fn panel_of(&self, j: usize) -> &Panel {
        &self.panels[j / self.order]
    }

    /// Derivative at node `j` of the panel's interpolating polynomial.
    pub fn derivative_at_node(&self, values: &[Complex64], j: usize) -> Complex64 {
        let panel = self.panel_of(j);
        let local = j - panel.start;
        let row = &self.reference_diff[local * self.order..(local + 1) * self.order];
        let scale = 2.0 / (panel.b - panel.a);
        let d: Complex64 = row
            .iter()
            .zip(&values[panel.start..panel.start + self.order])
            .map(|(&dm, &g)| g * dm)
            .sum();
        d * scale
    }

    fn log_term(&self, v: f64) -> f64 {
        ((self.hi - v) / (self.lo - v)).abs().ln()
    }

    /// `p.v.∫_lo^hi g(w)/(w − x_j) dw` with the pole at node `j`.
    pub fn pv_at_node(&self, values: &[Complex64], j: usize) -> Complex64 {
        let xj = self.nodes[j];
        let gj = values[j];
        let mut sum = Complex64::new(0.0, 0.0);
        for (k, (&x, &w)) in self.nodes.iter().zip(&self.weights).enumerate() {
            if k != j {
                sum += (values[k] - gj) * (w / (x - xj));
            }
        }
        sum += self.derivative_at_node(values, j) * self.weights[j];
        sum + gj * self.log_term(xj)
    }

    /// Principal values with the pole at every node in turn.
    pub fn pv_all_nodes(&self, values: &[Complex64]) -> Vec<Complex64> {
        (0..self.len())
            .into_par_iter()
            .map(|j| self.pv_at_node(values, j))
            .collect()
    }

    /// `p.v.∫_lo^hi g(w)/(w − v) dw` for an arbitrary `v`; `value_at_pole`
    /// is `g(v)`. For `v` outside the window this is an ordinary integral and
    /// the subtraction merely improves accuracy when `v` is close to an edge.
    pub fn pv_at_point(&self, values: &[Complex64], v: f64, value_at_pole: Complex64) -> Complex64 {
        if let Some(j) = self.coincident_node(v) {
            return self.pv_at_node(values, j);
        }
        let mut sum = Complex64::new(0.0, 0.0);
        for ((&x, &w), &g) in self.nodes.iter().zip(&self.weights).zip(values) {
            sum += (g - value_at_pole) * (w / (x - v));
        }
        if value_at_pole == Complex64::new(0.0, 0.0) {
            return sum;
        }
        sum + value_at_pole * self.log_term(v)
    }

    /// Index of a node within rounding distance of `v`, if any.
    fn coincident_node(&self, v: f64) -> Option<usize> {
        if v <= self.lo || v >= self.hi {
            return None;
        }
        let idx = self.nodes.partition_point(|&x| x < v);
        [idx.wrapping_sub(1), idx]
            .into_iter()
            .filter(|&j| j < self.len())
            .find(|&j| {
                let p = self.panel_of(j);
                (self.nodes[j] - v).abs() <= 1e-12 * (p.b - p.a)
            })
    }
}

/// Distances from the centre at which panels end on one side of length `len`.
fn side_breakpoints(len: f64, inner: f64) -> Vec<f64> {
    if len <= 0.0 {
        return Vec::new();
    }
    if len <= inner {
        return vec![len];
    }
    let n = ((len / inner).ln() / GRADING_RATIO.ln()).ceil().max(1.0) as usize;
    let ratio = (len / inner).powf(1.0 / n as f64);
    let mut out: Vec<f64> = (0..=n).map(|k| inner * ratio.powi(k as i32)).collect();
    *out.last_mut().expect("n >= 1") = len;
    out
}

/// Barycentric differentiation matrix for interpolation through `x`.
fn differentiation_matrix(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let bary: Vec<f64> = (0..n)
        .map(|j| {
            1.0 / (0..n)
                .filter(|&k| k != j)
                .map(|k| x[j] - x[k])
                .product::<f64>()
        })
        .collect();
    let mut d = vec![0.0; n * n];
    for i in 0..n {
        let mut diag = 0.0;
        for j in 0..n {
            if i != j {
                let v = bary[j] / bary[i] / (x[i] - x[j]);
                d[i * n + j] = v;
                diag -= v;
            }
        }
        d[i * n + i] = diag;
    }
    d
}

/// A principal-value integral `p.v.∫_{−T}^{T} g(w)/(w − pole) dw`.
#[derive(Debug, Clone)]
pub struct PVKernelSpec<F> {
    pub pole: f64,
    pub integrand: F,
    /// half-width `T` of the truncation window
    pub truncation: f64,
    /// Gauss–Legendre nodes per panel
    pub refinement: usize,
}

impl<F> PVKernelSpec<F>
where
    F: Fn(f64) -> Complex64 + Sync,
{
    pub fn new(pole: f64, integrand: F) -> Self {
        Self {
            pole,
            integrand,
            truncation: DEFAULT_TRUNCATION,
            refinement: DEFAULT_PANEL_ORDER,
        }
    }

    pub fn with_truncation(mut self, truncation: f64) -> Self {
        self.truncation = truncation;
        self
    }

    pub fn with_refinement(mut self, refinement: usize) -> Self {
        self.refinement = refinement;
        self
    }
}

/// Evaluates a principal-value integral by singularity subtraction on a rule
/// graded toward the pole.
pub fn pv_integral<F>(spec: &PVKernelSpec<F>) -> Result<Complex64>
where
    F: Fn(f64) -> Complex64 + Sync,
{
    let t = spec.truncation;
    if !(t > 0.0) || !t.is_finite() {
        return Err(BgkError::InvalidArgument(format!(
            "truncation must be positive and finite, got {t}"
        )));
    }
    if !(spec.pole.abs() < t) {
        return Err(BgkError::Domain(format!(
            "pole {} lies outside the truncation window [-{t}, {t}]",
            spec.pole
        )));
    }
    let rule = PanelRule::graded(-t, t, spec.pole, 0.05 * t.min(1.0), spec.refinement)?;
    let values = rule.sample(&spec.integrand);
    let at_pole = (spec.integrand)(spec.pole);
    if !at_pole.is_finite() || values.iter().any(|g| !g.is_finite()) {
        return Err(BgkError::NonFinite("pv_integral integrand"));
    }
    Ok(rule.pv_at_point(&values, spec.pole, at_pole))
}

/// `∫_{−T}^{T} f(v) dv` on a rule graded toward `center` with innermost
/// panel `inner`; suited to integrands with a sharp feature at `center`.
pub fn integrate_graded<F>(f: F, center: f64, inner: f64, truncation: f64) -> Result<Complex64>
where
    F: Fn(f64) -> Complex64 + Sync,
{
    let rule = PanelRule::graded(-truncation, truncation, center, inner, DEFAULT_PANEL_ORDER)?;
    let values = rule.sample(f);
    let total = rule.integrate(&values);
    if !total.is_finite() {
        return Err(BgkError::NonFinite("integrate_graded"));
    }
    Ok(total)
}
