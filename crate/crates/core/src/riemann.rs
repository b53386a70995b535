//! Riemann–Hilbert data for the singular integral equation in v:
//! `A = ξ − 2iD(v)`, `B = −πφ(v)`, `G = (A−B)/(A+B)`, the index χ of G
//! along ℝ, and the canonical half-plane solution `X⁺ = e^{Γ⁺}`.
//!
//! `Γ±(v) = ±M(v)/2 + (1/2πi) p.v.∫ M(τ)/(τ−v) dτ` with
//! `M = ln[((τ−i)/(τ+i))^{−χ} G(τ)]` continuous and vanishing at ±∞.
//! Beyond the quadrature window `|τ| > R`, G equals 1 to machine precision
//! and `M = 2iχ·atan(1/τ)`, which decays only like 1/τ; that tail is
//! integrated exactly after the substitution `u = 1/τ`.

use std::f64::consts::PI;
use std::io::Write;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{BgkError, Result};
use crate::format::fmt17;
use crate::quadrature::{PanelRule, DEFAULT_INNER_WIDTH, DEFAULT_PANEL_ORDER, DEFAULT_TRUNCATION};
use crate::specfun::{dawson, gaussian_weight, SQRT_PI};

/// ξ closer than this to ±√π is rejected: `A ∓ B` nearly vanishes at v = 0.
pub const INDEX_EXCLUSION: f64 = 1e-3;

const TAIL_ORDER: usize = 40;

fn i() -> Complex64 {
    Complex64::new(0.0, 1.0)
}

fn check_xi(xi: f64) -> Result<()> {
    if !xi.is_finite() {
        return Err(BgkError::NonFinite("wavenumber"));
    }
    if (xi.abs() - SQRT_PI).abs() < INDEX_EXCLUSION {
        return Err(BgkError::Domain(format!(
            "xi = {xi} lies within {INDEX_EXCLUSION:e} of sqrt(pi), where G is unbounded"
        )));
    }
    Ok(())
}

/// `A_ξ(v) = ξ − 2iD(v)` and `B(v) = −πφ(v)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundaryCoefficients {
    pub xi: f64,
}

impl BoundaryCoefficients {
    pub fn new(xi: f64) -> Result<Self> {
        check_xi(xi)?;
        Ok(Self { xi })
    }

    pub fn a(&self, v: f64) -> Complex64 {
        Complex64::new(self.xi, -2.0 * dawson(v))
    }

    pub fn b(&self, v: f64) -> f64 {
        -PI * gaussian_weight(v)
    }

    pub fn a_plus_b(&self, v: f64) -> Complex64 {
        self.a(v) + self.b(v)
    }

    pub fn a_minus_b(&self, v: f64) -> Complex64 {
        self.a(v) - self.b(v)
    }

    pub fn g(&self, v: f64) -> Complex64 {
        g_explicit(self.xi, v)
    }
}

/// `G = (ξ² − π²φ² + 4D² + 4iπφD) / ((ξ − πφ)² + 4D²)`.
fn g_explicit(xi: f64, v: f64) -> Complex64 {
    let pf = PI * gaussian_weight(v);
    let d = dawson(v);
    let den = (xi - pf) * (xi - pf) + 4.0 * d * d;
    Complex64::new(xi * xi - pf * pf + 4.0 * d * d, 4.0 * pf * d) / den
}

/// `G_ξ(v)` from its explicit real/imaginary split.
pub fn boundary_g(xi: f64, v: f64) -> Result<Complex64> {
    if !xi.is_finite() || !v.is_finite() {
        return Err(BgkError::NonFinite("boundary_g arguments"));
    }
    let pf = PI * gaussian_weight(v);
    let d = dawson(v);
    if (xi - pf) * (xi - pf) + 4.0 * d * d == 0.0 {
        return Err(BgkError::Domain(format!(
            "A + B vanishes at xi = {xi}, v = {v}"
        )));
    }
    Ok(g_explicit(xi, v))
}

/// χ predicted by the sign structure of G: −1 inside |ξ| < √π, else 0.
pub fn expected_index(xi: f64) -> i32 {
    if xi.abs() < SQRT_PI {
        -1
    } else {
        0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ImagePoint {
    pub v: f64,
    pub re: f64,
    pub im: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IndexResult {
    pub xi: f64,
    pub chi: i32,
    /// total argument increment of G along ℝ, in radians
    pub increment: f64,
    pub image_curve: Vec<ImagePoint>,
}

impl IndexResult {
    /// Columns `v, re, im`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["v", "re", "im"]).map_err(csv_err)?;
        for p in &self.image_curve {
            w.write_record([fmt17(p.v), fmt17(p.re), fmt17(p.im)])
                .map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }
}

fn csv_err(e: csv::Error) -> BgkError {
    BgkError::Io(e.to_string())
}

/// Winding number of `v ↦ G_ξ(v)` over ℝ with the default sampling.
pub fn winding_index(xi: f64) -> Result<IndexResult> {
    winding_index_with(xi, 64)
}

/// Winding number from `samples` initial points `v = tan θ`, bisected
/// wherever the argument moves by more than π/8 between neighbours.
pub fn winding_index_with(xi: f64, samples: usize) -> Result<IndexResult> {
    check_xi(xi)?;
    if samples < 2 {
        return Err(BgkError::InvalidArgument(
            "winding_index needs at least 2 samples".into(),
        ));
    }
    let half = PI / 2.0;
    let theta: Vec<f64> = (0..=samples)
        .map(|k| -half + PI * k as f64 / samples as f64)
        .collect();
    let eval = |th: f64| -> Complex64 {
        if th <= -half || th >= half {
            Complex64::new(1.0, 0.0)
        } else {
            g_explicit(xi, th.tan())
        }
    };
    let mut curve = Vec::new();
    let mut increment = 0.0;
    for w in theta.windows(2) {
        increment += refine(&eval, w[0], eval(w[0]), w[1], eval(w[1]), 0, &mut curve)?;
    }
    let chi = (increment / (2.0 * PI)).round();
    if (increment - 2.0 * PI * chi).abs() > 1e-6 {
        return Err(BgkError::Refinement(format!(
            "argument increment {increment} is not a multiple of 2 pi"
        )));
    }
    Ok(IndexResult {
        xi,
        chi: chi as i32,
        increment,
        image_curve: curve,
    })
}

fn refine(
    eval: &impl Fn(f64) -> Complex64,
    ta: f64,
    ga: Complex64,
    tb: f64,
    gb: Complex64,
    depth: usize,
    curve: &mut Vec<ImagePoint>,
) -> Result<f64> {
    let step = (gb / ga).arg();
    if step.abs() > PI / 8.0 && depth < 48 {
        let tm = 0.5 * (ta + tb);
        let gm = eval(tm);
        let left = refine(eval, ta, ga, tm, gm, depth + 1, curve)?;
        let right = refine(eval, tm, gm, tb, gb, depth + 1, curve)?;
        return Ok(left + right);
    }
    if step.abs() > PI / 2.0 {
        return Err(BgkError::Refinement(format!(
            "argument jump {step} between theta = {ta} and {tb} after {depth} bisections"
        )));
    }
    if tb < PI / 2.0 {
        curve.push(ImagePoint {
            v: tb.tan(),
            re: gb.re,
            im: gb.im,
        });
    }
    Ok(step)
}

/// Default rule carrying the Cauchy integrals: graded toward v = 0, where
/// G varies fastest.
pub fn default_rule() -> Arc<PanelRule> {
    Arc::new(
        PanelRule::graded(
            -DEFAULT_TRUNCATION,
            DEFAULT_TRUNCATION,
            0.0,
            DEFAULT_INNER_WIDTH,
            DEFAULT_PANEL_ORDER,
        )
        .expect("default panel rule parameters are valid"),
    )
}

/// Canonical solution of the half-plane Riemann problem for one ξ.
#[derive(Debug, Clone)]
pub struct CanonicalSolution {
    xi: f64,
    chi: i32,
    rule: Arc<PanelRule>,
    tail_rule: PanelRule,
    log_g: Vec<Complex64>,
    cauchy: Vec<Complex64>,
    gamma_plus: Vec<Complex64>,
    x_plus: Vec<Complex64>,
}

impl CanonicalSolution {
    pub fn build(xi: f64) -> Result<Self> {
        Self::with_rule(xi, default_rule())
    }

    pub fn with_rule(xi: f64, rule: Arc<PanelRule>) -> Result<Self> {
        check_xi(xi)?;
        if rule.lo() != -rule.hi() {
            return Err(BgkError::InvalidArgument(
                "canonical solution needs a window symmetric about 0".into(),
            ));
        }
        let chi = expected_index(xi);
        let r = rule.hi();
        let tail_rule = PanelRule::from_breakpoints(&[-1.0 / r, 1.0 / r], TAIL_ORDER)?;
        let log_g = unwrapped_log(xi, chi, rule.nodes())?;
        let pv = rule.pv_all_nodes(&log_g);
        let mut sol = Self {
            xi,
            chi,
            rule,
            tail_rule,
            log_g,
            cauchy: Vec::new(),
            gamma_plus: Vec::new(),
            x_plus: Vec::new(),
        };
        let cauchy: Vec<Complex64> = pv
            .into_par_iter()
            .zip(sol.rule.nodes().par_iter())
            .map(|(p, &v)| p + sol.tail(v))
            .collect();
        let gamma_plus: Vec<Complex64> = sol
            .log_g
            .iter()
            .zip(&cauchy)
            .map(|(&m, &c)| 0.5 * m + c / (2.0 * PI * i()))
            .collect();
        if gamma_plus.iter().any(|g| !g.is_finite()) {
            return Err(BgkError::NonFinite("Gamma+ on the quadrature nodes"));
        }
        sol.x_plus = gamma_plus.iter().map(|g| g.exp()).collect();
        sol.cauchy = cauchy;
        sol.gamma_plus = gamma_plus;
        Ok(sol)
    }

    pub fn xi(&self) -> f64 {
        self.xi
    }

    pub fn chi(&self) -> i32 {
        self.chi
    }

    pub fn rule(&self) -> &Arc<PanelRule> {
        &self.rule
    }

    pub fn nodes(&self) -> &[f64] {
        self.rule.nodes()
    }

    pub fn log_g_nodes(&self) -> &[Complex64] {
        &self.log_g
    }

    pub fn gamma_plus_nodes(&self) -> &[Complex64] {
        &self.gamma_plus
    }

    pub fn x_plus_nodes(&self) -> &[Complex64] {
        &self.x_plus
    }

    /// Index of the quadrature node at `v`, if `v` is one.
    pub fn node_index(&self, v: f64) -> Option<usize> {
        let nodes = self.rule.nodes();
        let k = nodes.partition_point(|&x| x < v);
        (k < nodes.len() && nodes[k] == v).then_some(k)
    }

    /// The continuous corrected logarithm `M(v)`.
    pub fn corrected_log(&self, v: f64) -> Complex64 {
        if let Some(j) = self.node_index(v) {
            return self.log_g[j];
        }
        let g = g_explicit(self.xi, v);
        let r = self.rule.hi();
        if v.abs() >= r {
            return g.ln() + 2.0 * i() * self.chi as f64 * (1.0 / v).atan();
        }
        // continue the branch from the nearest node
        let nodes = self.rule.nodes();
        let k = nodes.partition_point(|&x| x < v).min(nodes.len() - 1);
        let j = if k > 0 && (v - nodes[k - 1]).abs() < (nodes[k] - v).abs() {
            k - 1
        } else {
            k
        };
        let gj = g_explicit(self.xi, nodes[j]);
        let twist = 2.0 * self.chi as f64 * (v.atan2(1.0) - nodes[j].atan2(1.0));
        // atan2(1, v) − atan2(1, x_j) = −(atan(v) − atan(x_j))
        Complex64::new(g.norm().ln(), self.log_g[j].im + (g / gj).arg() - twist)
    }

    /// `∫_ℝ M(τ)/(τ−v) dτ` in the principal-value sense.
    pub fn cauchy_at(&self, v: f64) -> Complex64 {
        if let Some(j) = self.node_index(v) {
            return self.cauchy[j];
        }
        let r = self.rule.hi();
        // the window and tail pieces carry opposite log singularities at |v| = R
        let v = if ((v.abs() - r) / r).abs() < 1e-10 {
            v * (1.0 + 1e-10)
        } else {
            v
        };
        self.rule.pv_at_point(&self.log_g, v, self.corrected_log(v)) + self.tail(v)
    }

    pub fn gamma_plus_at(&self, v: f64) -> Complex64 {
        if let Some(j) = self.node_index(v) {
            return self.gamma_plus[j];
        }
        0.5 * self.corrected_log(v) + self.cauchy_at(v) / (2.0 * PI * i())
    }

    pub fn gamma_minus_at(&self, v: f64) -> Complex64 {
        -0.5 * self.corrected_log(v) + self.cauchy_at(v) / (2.0 * PI * i())
    }

    pub fn x_plus_at(&self, v: f64) -> Complex64 {
        self.gamma_plus_at(v).exp()
    }

    /// `X⁻(v) = ((v−i)/(v+i))^{−χ} e^{Γ⁻(v)}`.
    pub fn x_minus_at(&self, v: f64) -> Complex64 {
        let ratio = Complex64::new(v, -1.0) / Complex64::new(v, 1.0);
        ratio.powi(-self.chi) * self.gamma_minus_at(v).exp()
    }

    /// Net change of `Im M` from −∞ to +∞; zero when the twist cancels the index.
    pub fn total_log_increment(&self) -> f64 {
        let r = self.rule.hi() * 1e6;
        self.corrected_log(r).im - self.corrected_log(-r).im
    }

    /// `∫_{|τ|>R} M(τ)/(τ−v) dτ` with `M = 2iχ·atan(1/τ)` there.
    fn tail(&self, v: f64) -> Complex64 {
        if self.chi == 0 {
            return Complex64::new(0.0, 0.0);
        }
        let r = self.rule.hi();
        let s = |u: f64| -> f64 {
            if u == 0.0 {
                1.0
            } else {
                u.atan() / u
            }
        };
        let value = if v.abs() < r {
            // ∫ s(u)/(1−uv) du over |u| < 1/R
            self.tail_rule
                .nodes()
                .iter()
                .zip(self.tail_rule.weights())
                .map(|(&u, &w)| w * s(u) / (1.0 - u * v))
                .sum::<f64>()
        } else {
            // 1/(1−uv) = −(1/v)/(u − 1/v): a pole inside the u-window
            let us = 1.0 / v;
            let values: Vec<Complex64> = self
                .tail_rule
                .nodes()
                .iter()
                .map(|&u| Complex64::new(s(u), 0.0))
                .collect();
            -self
                .tail_rule
                .pv_at_point(&values, us, Complex64::new(s(us), 0.0))
                .re
                / v
        };
        2.0 * i() * self.chi as f64 * value
    }
}

/// `M` on sorted nodes: unwrapped `arg G` plus the twist `2χ·atan2(1, τ)`,
/// shifted by `−2πχ` so that `M → 0` at both ends.
fn unwrapped_log(xi: f64, chi: i32, nodes: &[f64]) -> Result<Vec<Complex64>> {
    let g: Vec<Complex64> = nodes.iter().map(|&v| g_explicit(xi, v)).collect();
    let mut out = Vec::with_capacity(g.len());
    let mut arg = g[0].arg();
    for (k, (&v, &gk)) in nodes.iter().zip(&g).enumerate() {
        if k > 0 {
            let step = (gk / g[k - 1]).arg();
            if step.abs() > PI / 2.0 {
                return Err(BgkError::Refinement(format!(
                    "log branch jump {step} between v = {} and v = {v}",
                    nodes[k - 1]
                )));
            }
            arg += step;
        }
        let twist = 2.0 * chi as f64 * (1.0f64).atan2(v) - 2.0 * PI * chi as f64;
        out.push(Complex64::new(gk.norm().ln(), arg + twist));
    }
    let end = out.last().expect("non-empty").im;
    let expected_end = 2.0 * chi as f64 * (1.0 / nodes[nodes.len() - 1]).atan();
    if (end - expected_end).abs() > 1e-6 {
        return Err(BgkError::Refinement(format!(
            "corrected log does not return to 0 (ends at {end}); index mismatch"
        )));
    }
    Ok(out)
}

/// `Γ⁺_ξ(v)` for an index χ that must match [`winding_index`].
pub fn gamma_plus(xi: f64, v: f64, chi: i32) -> Result<Complex64> {
    check_xi(xi)?;
    if chi != expected_index(xi) {
        return Err(BgkError::InvalidArgument(format!(
            "chi = {chi} is not the index of G at xi = {xi}"
        )));
    }
    if !v.is_finite() {
        return Err(BgkError::NonFinite("gamma_plus velocity"));
    }
    Ok(CanonicalSolution::build(xi)?.gamma_plus_at(v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn g_forms_agree() {
        for &xi in &[0.5, -1.2, 2.0, 3.75] {
            let bc = BoundaryCoefficients::new(xi).unwrap();
            for k in -30..=30 {
                let v = k as f64 * 0.23;
                let direct = bc.a_minus_b(v) / bc.a_plus_b(v);
                assert!((direct - boundary_g(xi, v).unwrap()).norm() < 1e-12);
                assert!((bc.g(-v) - bc.g(v).conj()).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn g_special_values() {
        let xi = 0.5;
        let g0 = boundary_g(xi, 0.0).unwrap();
        assert_relative_eq!(g0.re, (xi + SQRT_PI) / (xi - SQRT_PI), max_relative = 1e-14);
        assert_eq!(g0.im, 0.0);
        let far = boundary_g(xi, 1e6).unwrap();
        assert!((far - 1.0).norm() < 1e-10);
        let bc = BoundaryCoefficients::new(xi).unwrap();
        assert_eq!(bc.a(1e300).re, xi);
        assert_eq!(bc.b(40.0), 0.0);
    }

    #[test]
    fn imaginary_part_has_sign_of_v() {
        for &xi in &[0.1, 1.0, 1.7, 2.0] {
            for k in 1..100 {
                let v = k as f64 * 0.1;
                assert!(boundary_g(xi, v).unwrap().im > 0.0);
                assert!(boundary_g(xi, -v).unwrap().im < 0.0);
            }
        }
    }

    #[test]
    fn index_values() {
        for &xi in &[0.1, 0.5, 1.0, 1.7, -0.5, 0.0] {
            assert_eq!(winding_index(xi).unwrap().chi, -1, "xi = {xi}");
        }
        for &xi in &[-2.0, 1.8, 3.75] {
            assert_eq!(winding_index(xi).unwrap().chi, 0, "xi = {xi}");
        }
    }

    #[test]
    fn index_stable_under_resolution() {
        for &xi in &[0.5, 1.7, 1.8, -2.0] {
            let a = winding_index_with(xi, 16).unwrap().chi;
            let b = winding_index_with(xi, 32).unwrap().chi;
            let c = winding_index_with(xi, 1024).unwrap().chi;
            assert_eq!(a, b);
            assert_eq!(b, c);
        }
    }

    #[test]
    fn index_rejects_near_sqrt_pi() {
        assert!(winding_index(SQRT_PI + 5e-4).is_err());
        assert!(winding_index(-SQRT_PI).is_err());
        assert!(winding_index(f64::NAN).is_err());
        assert!(winding_index_with(0.5, 1).is_err());
    }

    #[test]
    fn image_curve_export() {
        let r = winding_index(0.5).unwrap();
        assert!(r.image_curve.len() >= 63);
        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        assert!(String::from_utf8(buf).unwrap().starts_with("v,re,im\n"));
    }

    #[test]
    fn corrected_log_vanishes_at_both_ends() {
        for &xi in &[0.5, 1.5, 2.0] {
            let sol = CanonicalSolution::build(xi).unwrap();
            assert!(sol.total_log_increment().abs() < 1e-5);
            assert!(sol.corrected_log(1e7).norm() < 1e-5);
            assert!(sol.corrected_log(-1e7).norm() < 1e-5);
        }
    }

    #[test]
    fn corrected_log_is_continuous_off_nodes() {
        let sol = CanonicalSolution::build(0.5).unwrap();
        for &v in &[-7.99, -3.0, -1e-4, 1e-4, 0.37, 5.5, 7.999, 8.001, 9.0] {
            let a = sol.corrected_log(v);
            let b = sol.corrected_log(v + 1e-7);
            assert!((a - b).norm() < 1e-5, "v = {v}");
            // exp(M) must reproduce G times the twist factor
            let twist = (Complex64::new(v, -1.0) / Complex64::new(v, 1.0)).powi(-sol.chi());
            assert!((a.exp() - twist * boundary_g(0.5, v).unwrap()).norm() < 1e-12);
        }
    }

    #[test]
    fn plemelj_jump() {
        for &xi in &[0.5, 2.0] {
            let sol = CanonicalSolution::build(xi).unwrap();
            for &v in &[-2.0, -1.0, 0.3, 1.0, 2.0] {
                let ratio = sol.x_plus_at(v) / sol.x_minus_at(v);
                assert!((ratio - boundary_g(xi, v).unwrap()).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn node_and_point_evaluations_agree() {
        let sol = CanonicalSolution::build(1.0).unwrap();
        let j = sol.nodes().len() / 2 + 11;
        let x = sol.nodes()[j];
        let off = sol.gamma_plus_at(x + 1e-9);
        assert!((off - sol.gamma_plus_nodes()[j]).norm() < 1e-6);
        let far = sol.gamma_plus_at(8.0);
        let far2 = sol.gamma_plus_at(8.0 + 1e-6);
        assert!((far - far2).norm() < 1e-4);
    }

    #[test]
    fn gamma_plus_decays_for_zero_index() {
        let sol = CanonicalSolution::build(2.0).unwrap();
        // a Cauchy integral decays like 1/v
        let a = sol.gamma_plus_at(1e3);
        let b = sol.gamma_plus_at(1e4);
        assert!(b.norm() < 1e-4);
        assert_relative_eq!(a.norm() / b.norm(), 10.0, max_relative = 1e-3);
        assert!(sol.gamma_plus_at(-1e4).norm() < 1e-4);
    }

    #[test]
    fn gamma_plus_checks_index() {
        assert!(gamma_plus(0.5, 0.3, 0).is_err());
        let g = gamma_plus(0.5, 0.3, -1).unwrap();
        assert!(g.is_finite());
        assert!(gamma_plus(2.0, 0.3, 0).is_ok());
    }

    #[test]
    fn tail_matches_direct_integration() {
        // ∫_{|τ|>R} atan(1/τ)/(τ−v) dτ by substitution τ = R/s on (0, 1]
        let sol = CanonicalSolution::build(0.5).unwrap();
        let r = 8.0;
        for &v in &[0.0, 1.3, -4.0] {
            let n = 200_000;
            let mut acc = 0.0;
            for k in 0..n {
                let s = (k as f64 + 0.5) / n as f64;
                let tau = r / s;
                let jac = r / (s * s);
                acc += ((1.0 / tau).atan() / (tau - v) + (-1.0 / tau).atan() / (-tau - v)) * jac;
            }
            acc /= n as f64;
            let expected = 2.0 * i() * sol.chi() as f64 * acc;
            assert!((sol.tail(v) - expected).norm() < 1e-8, "v = {v}");
        }
    }
}
