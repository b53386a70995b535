//! Real branch of the spectrum: `η(ξ) = Ξ⁻¹(ξ)`, `Λ(ξ) = −1 + ξη(ξ)` with
//! the continuous extension `Λ(0) = 0`, and the constraint integral
//! `∫ φ(v)/(1+λ+iξv) dv = 1` that characterises it.

use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{BgkError, Result};
use crate::format::fmt17;
use crate::quadrature::{integrate_graded, DEFAULT_TRUNCATION};
use crate::specfun::{gaussian_weight, xi_function, SQRT_PI};

/// Below this |ξ| the deviation of Λ from 0 is taken from the large-η
/// expansion of `ηΞ(η)` rather than by subtracting from 1.
pub const SMALL_XI_CROSSOVER: f64 = 1e-4;

/// Default half-width of the excluded neighbourhood of ±√π for ξ grids.
pub const DEFAULT_XI_MARGIN: f64 = 5e-3;

/// `η(ξ)`: the unique root of `Ξ(η) = ξ`, of the same sign as ξ.
pub fn eta_of_xi(xi: f64) -> Result<f64> {
    if !xi.is_finite() {
        return Err(BgkError::NonFinite("eta_of_xi argument"));
    }
    if xi == 0.0 {
        return Err(BgkError::Domain(
            "eta diverges at xi = 0; use lambda_of_xi for the extension".into(),
        ));
    }
    let x = xi.abs();
    if x >= SQRT_PI {
        return Err(BgkError::Domain(format!(
            "|xi| = {x} is outside the range of Xi (must be < sqrt(pi))"
        )));
    }
    // Ξ decreases from √π at 0⁺ and Ξ(η) < 1/η, so the root lies in (0, 1/x].
    let mut lo = 0.0;
    let mut hi = 1.0 / x;
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if xi_function(mid)? > x {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let eta = if lo == 0.0 { hi } else { 0.5 * (lo + hi) };
    Ok(eta.copysign(xi))
}

/// `Λ(ξ)` for `|ξ| < √π`; even, in `(−1, 0]`, zero only at `ξ = 0`.
pub fn lambda_of_xi(xi: f64) -> Result<f64> {
    if !xi.is_finite() {
        return Err(BgkError::NonFinite("lambda_of_xi argument"));
    }
    let x = xi.abs();
    if x >= SQRT_PI {
        return Err(BgkError::Domain(format!(
            "Lambda is undefined for |xi| = {x} >= sqrt(pi)"
        )));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    let eta = eta_of_xi(x)?;
    if x < SMALL_XI_CROSSOVER {
        Ok(product_form_deficit(eta))
    } else {
        Ok(-1.0 + x * eta)
    }
}

/// `ηΞ(η) − 1` for large η from the asymptotic series
/// `ηΞ(η) = Σ (−1)^k (2k−1)!!/(2η²)^k`.
fn product_form_deficit(eta: f64) -> f64 {
    let inv = 1.0 / (2.0 * eta * eta);
    let mut term = 1.0;
    let mut sum = 0.0;
    for k in 1..30 {
        term *= -((2 * k - 1) as f64) * inv;
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    sum
}

/// `∫ φ(v)/(1+λ+iξv) dv − 1`.
///
/// The integrand is a Lorentzian-like peak of width `|1+λ|/|ξ|` at `v = 0`,
/// so the rule is graded toward the origin down to a fraction of that width.
pub fn constraint_residual(lambda: f64, xi: f64) -> Result<Complex64> {
    if !lambda.is_finite() || !xi.is_finite() {
        return Err(BgkError::NonFinite("constraint_residual arguments"));
    }
    let shift = 1.0 + lambda;
    if shift == 0.0 {
        return Err(BgkError::NonFinite(
            "constraint_residual: pole on the real velocity axis (1 + lambda = 0)",
        ));
    }
    if xi == 0.0 {
        return Ok(Complex64::new(1.0 / shift - 1.0, 0.0));
    }
    let width = shift.abs() / xi.abs();
    let inner = (width * 1e-2).min(1e-3);
    let integral = integrate_graded(
        |v| gaussian_weight(v) / Complex64::new(shift, xi * v),
        0.0,
        inner,
        DEFAULT_TRUNCATION,
    )?;
    Ok(integral - 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DispersionPoint {
    pub xi: f64,
    /// `None` at ξ = 0, where η diverges.
    pub eta: Option<f64>,
    pub lambda: f64,
}

impl DispersionPoint {
    pub fn at(xi: f64) -> Result<Self> {
        let lambda = lambda_of_xi(xi)?;
        let eta = if xi == 0.0 {
            None
        } else {
            Some(eta_of_xi(xi)?)
        };
        Ok(Self { xi, eta, lambda })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DispersionTable {
    pub points: Vec<DispersionPoint>,
    /// `|constraint_residual(Λ(ξ), ξ)|` per point
    pub residuals: Vec<f64>,
}

impl DispersionTable {
    pub fn build(xis: &[f64]) -> Result<Self> {
        let rows: Vec<(DispersionPoint, f64)> = xis
            .par_iter()
            .map(|&xi| {
                let p = DispersionPoint::at(xi)?;
                let r = constraint_residual(p.lambda, xi)?.norm();
                Ok((p, r))
            })
            .collect::<Result<_>>()?;
        let (points, residuals) = rows.into_iter().unzip();
        Ok(Self { points, residuals })
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().copied().fold(0.0, f64::max)
    }

    pub fn residuals_below(&self, tolerance: f64) -> bool {
        self.residuals.iter().all(|&r| r < tolerance)
    }

    /// Λ strictly decreasing in |ξ| over the distinct |ξ| values sampled.
    pub fn is_monotone(&self) -> bool {
        let mut by_abs: Vec<(f64, f64)> =
            self.points.iter().map(|p| (p.xi.abs(), p.lambda)).collect();
        by_abs.sort_by(|a, b| a.0.total_cmp(&b.0));
        by_abs.dedup_by(|a, b| (a.0 - b.0).abs() <= 1e-12 * b.0.max(1.0));
        by_abs.windows(2).all(|w| w[1].1 < w[0].1)
    }

    /// Columns `xi, eta, lambda, residual`; η at ξ = 0 is written `inf`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["xi", "eta", "lambda", "residual"])
            .map_err(csv_err)?;
        for (p, r) in self.points.iter().zip(&self.residuals) {
            let eta = p.eta.map_or_else(|| "inf".to_string(), fmt17);
            w.write_record([fmt17(p.xi), eta, fmt17(p.lambda), fmt17(*r)])
                .map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }
}

fn csv_err(e: csv::Error) -> BgkError {
    BgkError::Io(e.to_string())
}

/// `n` evenly spaced ξ values on `[lo, hi]`; exactly mirrored when `lo = −hi`.
pub fn xi_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n > 1 && lo == -hi {
        let mut g: Vec<f64> = (0..n)
            .map(|k| hi * (2 * k as i64 - (n as i64 - 1)) as f64 / (n - 1) as f64)
            .collect();
        for k in 0..n / 2 {
            g[n - 1 - k] = -g[k];
        }
        return g;
    }
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n)
            .map(|k| {
                if k == n - 1 {
                    hi
                } else {
                    lo + (hi - lo) * k as f64 / (n - 1) as f64
                }
            })
            .collect(),
    }
}

/// Rejects ξ values within `margin` of ±√π.
pub fn check_xi_margin(xis: &[f64], margin: f64) -> Result<()> {
    for &xi in xis {
        if !xi.is_finite() || (xi.abs() - SQRT_PI).abs() < margin {
            return Err(BgkError::Domain(format!(
                "xi = {xi} lies within {margin:e} of sqrt(pi)"
            )));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn eta_reference_values() {
        // 40-digit root of √π·erfcx(η) = 0.5
        assert_relative_eq!(
            eta_of_xi(0.5).unwrap(),
            1.772_176_730_856_723_7,
            max_relative = 1e-13
        );
        let x1 = xi_function(1.0).unwrap();
        assert_relative_eq!(eta_of_xi(x1).unwrap(), 1.0, max_relative = 1e-13);
        assert_eq!(eta_of_xi(-0.5).unwrap(), -eta_of_xi(0.5).unwrap());
    }

    #[test]
    fn eta_tends_to_zero_at_sqrt_pi() {
        let e = eta_of_xi(SQRT_PI - 1e-9).unwrap();
        assert!(e > 0.0 && e < 1e-8);
    }

    #[test]
    fn eta_rejects_domain() {
        assert!(eta_of_xi(0.0).is_err());
        assert!(eta_of_xi(SQRT_PI).is_err());
        assert!(eta_of_xi(-2.0).is_err());
        assert!(eta_of_xi(f64::NAN).is_err());
    }

    #[test]
    fn lambda_reference_values() {
        let table = [
            (0.25, -0.030_375_272_856_681_044),
            (0.5, -0.113_911_634_571_638_16),
            (1.0, -0.391_868_595_320_193_62),
            (1.5, -0.766_972_595_805_037_5),
        ];
        for (xi, l) in table {
            assert_relative_eq!(lambda_of_xi(xi).unwrap(), l, max_relative = 1e-12);
        }
        assert_eq!(lambda_of_xi(0.0).unwrap(), 0.0);
    }

    #[test]
    fn lambda_small_xi_branches_agree() {
        let below = lambda_of_xi(SMALL_XI_CROSSOVER * (1.0 - 1e-9)).unwrap();
        let above = lambda_of_xi(SMALL_XI_CROSSOVER * (1.0 + 1e-9)).unwrap();
        assert_relative_eq!(below, above, max_relative = 1e-7);
        let x = 1e-6;
        assert_relative_eq!(lambda_of_xi(x).unwrap(), -x * x / 2.0, max_relative = 1e-6);
    }

    #[test]
    fn lambda_limits() {
        assert!((lambda_of_xi(SQRT_PI - 1e-4).unwrap() + 1.0).abs() < 1e-3);
        assert!(lambda_of_xi(1e-4).unwrap().abs() < 1e-6);
        assert!(lambda_of_xi(SQRT_PI).is_err());
    }

    #[test]
    fn constraint_on_and_off_the_curve() {
        let l = lambda_of_xi(0.5).unwrap();
        assert!(constraint_residual(l, 0.5).unwrap().norm() < 1e-12);
        assert_eq!(
            constraint_residual(0.0, 0.0).unwrap(),
            Complex64::new(0.0, 0.0)
        );
        assert!(constraint_residual(-0.5, 1.5).unwrap().norm() > 0.01);
        assert!(constraint_residual(-1.0, 0.5).is_err());
    }

    #[test]
    fn constraint_near_the_edge() {
        let l = lambda_of_xi(1.76).unwrap();
        assert!(constraint_residual(l, 1.76).unwrap().norm() < 1e-12);
        assert!(constraint_residual(l, -1.76).unwrap().im.abs() < 1e-14);
    }

    #[test]
    fn table_is_monotone_and_writes_csv() {
        let t = DispersionTable::build(&xi_grid(-1.7, 1.7, 11)).unwrap();
        assert!(t.is_monotone());
        assert!(t.residuals_below(1e-10));
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert!(s.starts_with("xi,eta,lambda,residual\n"));
        assert_eq!(s.lines().count(), 12);
        assert!(s.contains(",inf,"));
    }

    #[test]
    fn margin_policy() {
        assert!(check_xi_margin(&[1.77], DEFAULT_XI_MARGIN).is_err());
        assert!(check_xi_margin(&[1.76, -1.76], DEFAULT_XI_MARGIN).is_ok());
        assert!(check_xi_margin(&[2.0, -3.75], DEFAULT_XI_MARGIN).is_ok());
        assert!(check_xi_margin(&[-1.775], DEFAULT_XI_MARGIN).is_err());
    }

    #[test]
    fn grid_endpoints_exact() {
        let g = xi_grid(-1.76, 1.76, 101);
        assert_eq!(g.len(), 101);
        assert_eq!(g[0], -1.76);
        assert_eq!(g[100], 1.76);
        assert_eq!(g[50], 0.0);
    }
}
