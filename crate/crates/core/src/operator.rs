//! The transformed operator `L g = −iξv·g − g + ∫φg` at fixed ξ, its
//! resolvent, and the φ-weighted inner product.

use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{BgkError, Result};
use crate::quadrature::VelocityGrid;
use crate::specfun::{dawson, gaussian_weight};

/// Distance to the spectrum below which the resolvent is refused.
pub const SPECTRAL_PROXIMITY: f64 = 1e-6;

/// A function of velocity sampled on a grid, at one wavenumber.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VSliceFunction {
    #[serde(skip)]
    pub grid: Arc<VelocityGrid>,
    pub values: Vec<Complex64>,
    pub xi: f64,
}

impl VSliceFunction {
    pub fn new(grid: Arc<VelocityGrid>, values: Vec<Complex64>, xi: f64) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(BgkError::InvalidArgument(format!(
                "{} values for a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        if !xi.is_finite() {
            return Err(BgkError::NonFinite("slice wavenumber"));
        }
        if values.iter().any(|z| !z.is_finite()) {
            return Err(BgkError::NonFinite("slice values"));
        }
        Ok(Self { grid, values, xi })
    }

    pub fn from_fn(grid: Arc<VelocityGrid>, xi: f64, f: impl Fn(f64) -> Complex64) -> Result<Self> {
        let values = grid.nodes().iter().map(|&v| f(v)).collect();
        Self::new(grid, values, xi)
    }

    pub fn nodes(&self) -> &[f64] {
        self.grid.nodes()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    fn with_values(&self, values: Vec<Complex64>) -> Self {
        Self {
            grid: Arc::clone(&self.grid),
            values,
            xi: self.xi,
        }
    }

    pub fn scale(&self, s: Complex64) -> Self {
        self.with_values(self.values.iter().map(|&z| z * s).collect())
    }

    pub fn sub(&self, other: &Self) -> Self {
        debug_assert_eq!(self.len(), other.len());
        self.with_values(
            self.values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a - b)
                .collect(),
        )
    }

    pub fn add(&self, other: &Self) -> Self {
        debug_assert_eq!(self.len(), other.len());
        self.with_values(
            self.values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a + b)
                .collect(),
        )
    }
}

/// `∫ φ(w) g(w) dw`.
pub fn collision_moment(g: &VSliceFunction) -> Complex64 {
    g.grid.integrate_values(&g.values)
}

/// `(L g)(v) = −iξv·g(v) − g(v) + ∫ φ g`.
pub fn apply_l(g: &VSliceFunction) -> VSliceFunction {
    let moment = collision_moment(g);
    let values = g
        .nodes()
        .iter()
        .zip(&g.values)
        .map(|(&v, &gv)| -Complex64::new(1.0, g.xi * v) * gv + moment)
        .collect();
    g.with_values(values)
}

/// Collision part `C(g) = −g + ∫ φ g`.
pub fn apply_collision(g: &VSliceFunction) -> VSliceFunction {
    let moment = collision_moment(g);
    g.with_values(g.values.iter().map(|&gv| moment - gv).collect())
}

/// Distance from λ to `S = ℓ ∪ (−1, 0]`.
pub fn spectral_distance(lambda: Complex64) -> f64 {
    let to_line = (lambda.re + 1.0).abs();
    let nearest = Complex64::new(lambda.re.clamp(-1.0, 0.0), 0.0);
    to_line.min((lambda - nearest).norm())
}

/// `(L − λ)⁻¹ h = −(h + ⟨h/d⟩/(1 − ⟨1/d⟩)) / d` with `d = 1 + λ + iξv`.
pub fn apply_resolvent(h: &VSliceFunction, lambda: Complex64) -> Result<VSliceFunction> {
    if !lambda.is_finite() {
        return Err(BgkError::NonFinite("resolvent spectral parameter"));
    }
    let dist = spectral_distance(lambda);
    if dist < SPECTRAL_PROXIMITY {
        return Err(BgkError::SpectralProximity {
            re: lambda.re,
            im: lambda.im,
            tolerance: SPECTRAL_PROXIMITY,
        });
    }
    let inv_d: Vec<Complex64> = h
        .nodes()
        .iter()
        .map(|&v| (Complex64::new(1.0, h.xi * v) + lambda).inv())
        .collect();
    let grid = &h.grid;
    let det = 1.0 - grid.integrate_values(&inv_d);
    if det.norm() < 1e-12 {
        return Err(BgkError::SingularResolvent {
            re: lambda.re,
            im: lambda.im,
        });
    }
    let hd: Vec<Complex64> = h.values.iter().zip(&inv_d).map(|(a, b)| a * b).collect();
    let c = grid.integrate_values(&hd) / det;
    let values = h
        .values
        .iter()
        .zip(&inv_d)
        .map(|(&hv, &id)| -(hv + c) * id)
        .collect();
    Ok(h.with_values(values))
}

/// `⟨f, g⟩_φ = ∫ φ f ḡ`.
pub fn inner_product(f: &VSliceFunction, g: &VSliceFunction) -> Complex64 {
    debug_assert_eq!(f.len(), g.len());
    f.values
        .iter()
        .zip(&g.values)
        .zip(f.grid.weights())
        .map(|((a, b), &w)| a * b.conj() * w)
        .sum()
}

/// `‖f‖₂,φ`.
pub fn norm_phi(f: &VSliceFunction) -> f64 {
    f.values
        .iter()
        .zip(f.grid.weights())
        .map(|(z, &w)| z.norm_sqr() * w)
        .sum::<f64>()
        .sqrt()
}

/// Weight of the delta part of the eigendistribution for `λ = −1 + iα`,
/// `K(ξ) = |ξ|/φ(−α/ξ)·(1 − p.v.∫ φ(w)/(i(ξw+α)) dw)`, normalised to unit
/// collision moment.
pub fn line_eigen_weight(xi: f64, alpha: f64) -> Result<Complex64> {
    if xi == 0.0 || !xi.is_finite() || !alpha.is_finite() {
        return Err(BgkError::Domain(format!(
            "line eigendistribution needs finite xi != 0 (got xi = {xi}, alpha = {alpha})"
        )));
    }
    let pole = -alpha / xi;
    let weight = gaussian_weight(pole);
    if weight == 0.0 {
        return Err(BgkError::Degenerate(format!(
            "phi underflows at the delta location v = {pole}"
        )));
    }
    Ok((1.0 - line_smooth_moment(xi, alpha)) * (xi.abs() / weight))
}

/// `p.v.∫ φ(w)/(i(ξw+α)) dw = −2iD(α/ξ)/ξ`.
pub fn line_smooth_moment(xi: f64, alpha: f64) -> Complex64 {
    Complex64::new(0.0, -2.0 * dawson(alpha / xi) / xi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dispersion::lambda_of_xi;
    use crate::quadrature::{gauss_hermite, pv_integral, PVKernelSpec};
    use approx::assert_relative_eq;

    fn grid() -> Arc<VelocityGrid> {
        Arc::new(gauss_hermite(200).unwrap())
    }

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn l_on_constants_and_linear() {
        let g = VSliceFunction::from_fn(grid(), 0.7, |_| c(2.0)).unwrap();
        let lg = apply_l(&g);
        for (&v, z) in g.nodes().iter().zip(&lg.values) {
            assert!((z - Complex64::new(0.0, -0.7 * v * 2.0)).norm() < 1e-13);
        }
        let g0 = VSliceFunction::from_fn(grid(), 0.0, |_| c(3.0)).unwrap();
        assert!(apply_l(&g0).values.iter().all(|z| z.norm() < 1e-13));
        let lin = VSliceFunction::from_fn(grid(), 0.0, c).unwrap();
        for (&v, z) in lin.nodes().iter().zip(&apply_l(&lin).values) {
            assert!((z + v).norm() < 1e-12);
        }
    }

    #[test]
    fn moments() {
        let one = VSliceFunction::from_fn(grid(), 0.0, |_| c(1.0)).unwrap();
        assert_relative_eq!(collision_moment(&one).re, 1.0, epsilon = 1e-14);
        let odd = VSliceFunction::from_fn(grid(), 0.0, c).unwrap();
        assert!(collision_moment(&odd).norm() < 1e-14);
        let l = lambda_of_xi(0.5).unwrap();
        let gds = VSliceFunction::from_fn(grid(), 0.5, |v| Complex64::new(1.0 + l, 0.5 * v).inv())
            .unwrap();
        assert!((collision_moment(&gds) - 1.0).norm() < 1e-10);
    }

    #[test]
    fn slice_validation() {
        assert!(VSliceFunction::new(grid(), vec![c(1.0); 3], 0.0).is_err());
        let mut v = vec![c(1.0); 200];
        v[7] = c(f64::NAN);
        assert!(VSliceFunction::new(grid(), v, 0.0).is_err());
    }

    #[test]
    fn resolvent_simple_cases() {
        let h = VSliceFunction::from_fn(grid(), 0.0, c).unwrap();
        let r = apply_resolvent(&h, c(1.0)).unwrap();
        for (&v, z) in h.nodes().iter().zip(&r.values) {
            assert!((z + v / 2.0).norm() < 1e-13);
        }
    }

    #[test]
    fn resolvent_round_trip() {
        let g = grid();
        for &xi in &[0.0, 0.5, 1.3] {
            let h =
                VSliceFunction::from_fn(Arc::clone(&g), xi, |v| Complex64::new((v * 0.3).cos(), v))
                    .unwrap();
            for lam in [
                c(1.0),
                Complex64::new(2.0, 1.0),
                Complex64::new(-0.5, 3.0),
                c(-2.0),
            ] {
                let u = apply_resolvent(&h, lam).unwrap();
                let back = apply_l(&u).sub(&u.scale(lam));
                assert!(norm_phi(&back.sub(&h)) / norm_phi(&h) < 1e-12);
            }
        }
    }

    #[test]
    fn resolvent_rejects_spectrum() {
        let h = VSliceFunction::from_fn(grid(), 0.5, |_| c(1.0)).unwrap();
        for lam in [
            c(-0.5),
            Complex64::new(-1.0, 2.0),
            c(0.0),
            Complex64::new(-0.3, 1e-8),
        ] {
            assert!(matches!(
                apply_resolvent(&h, lam),
                Err(BgkError::SpectralProximity { .. })
            ));
        }
        assert!(apply_resolvent(&h, Complex64::new(-0.3, 1e-3)).is_ok());
    }

    #[test]
    fn resolvent_singular_determinant() {
        // the two-node grid at ξ = 1 has a spurious discrete eigenvalue
        // −1/2 ± i/2 off S, where 1 − ⟨1/d⟩ vanishes
        let g = Arc::new(gauss_hermite(2).unwrap());
        let h = VSliceFunction::from_fn(g, 1.0, |_| c(1.0)).unwrap();
        assert!(matches!(
            apply_resolvent(&h, Complex64::new(-0.5, 0.5)),
            Err(BgkError::SingularResolvent { .. })
        ));
        assert!(apply_resolvent(&h, c(5.0)).is_ok());
    }

    #[test]
    fn collision_is_self_adjoint_and_dissipative() {
        let g = grid();
        let a = VSliceFunction::from_fn(Arc::clone(&g), 0.0, |v| Complex64::new(v.sin(), v * v))
            .unwrap();
        let b = VSliceFunction::from_fn(Arc::clone(&g), 0.0, |v| {
            Complex64::new(1.0 + v, (2.0 * v).cos())
        })
        .unwrap();
        let lhs = inner_product(&apply_collision(&a), &b);
        let rhs = inner_product(&a, &apply_collision(&b));
        assert!((lhs - rhs).norm() < 1e-12);
        assert!(inner_product(&apply_collision(&a), &a).re <= 1e-12);
    }

    #[test]
    fn eigenfunction_of_real_branch() {
        let g = Arc::new(VelocityGrid::resolved());
        for &xi in &[0.25, 0.5, 1.0] {
            let l = lambda_of_xi(xi).unwrap();
            let b = VSliceFunction::from_fn(Arc::clone(&g), xi, |v| {
                Complex64::new(1.0 + l, xi * v).inv()
            })
            .unwrap();
            let r = apply_l(&b).sub(&b.scale(c(l)));
            assert!(norm_phi(&r) < 1e-12, "xi = {xi}: {}", norm_phi(&r));
        }
    }

    #[test]
    fn line_branch_integrated_identity() {
        for &(xi, alpha) in &[(0.5, 0.2), (1.0, -0.7), (-1.3, 0.4), (2.0, 1.5)] {
            let pole = -alpha / xi;
            let spec =
                PVKernelSpec::new(pole, |w: f64| Complex64::new(0.0, -gaussian_weight(w) / xi));
            let smooth = pv_integral(&spec).unwrap();
            assert!((smooth - line_smooth_moment(xi, alpha)).norm() < 1e-10);
            let k = line_eigen_weight(xi, alpha).unwrap();
            let total = smooth + k * gaussian_weight(pole) / xi.abs();
            assert!((total - 1.0).norm() < 1e-10);
        }
        assert!(line_eigen_weight(0.0, 1.0).is_err());
    }

    #[test]
    fn distance_to_spectrum() {
        assert_eq!(spectral_distance(c(0.5)), 0.5);
        assert_eq!(spectral_distance(Complex64::new(-0.5, 0.25)), 0.25);
        assert_eq!(spectral_distance(Complex64::new(-1.0, 7.0)), 0.0);
        assert_eq!(spectral_distance(c(-3.0)), 2.0);
    }
}
