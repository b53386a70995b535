//! Scalar special functions: the Maxwellian weight, Dawson's function, the
//! Hilbert transform of the Gaussian and the odd function `Ξ(η)` whose
//! inverse parameterises the real dispersion branch.

use num_complex::Complex64;

use crate::error::{BgkError, Result};

pub const SQRT_PI: f64 = 1.772_453_850_905_516;
const FRAC_1_SQRT_PI: f64 = 0.564_189_583_547_756_3;

/// Below this magnitude `Ξ` is evaluated by its linearisation about 0.
const XI_LIMIT_BRANCH: f64 = 1e-8;
/// Crossover between the power series and the asymptotic expansion of `D`.
const DAWSON_SEAM: f64 = 6.0;
/// Crossover between the series and the continued fraction for `erfcx`.
const ERFCX_SEAM: f64 = 0.5;

/// A velocity paired with a function value at that velocity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightedValue {
    pub v: f64,
    pub value: Complex64,
}

impl WeightedValue {
    /// The Maxwellian weight sampled at `v`.
    pub fn weight(v: f64) -> Self {
        Self {
            v,
            value: Complex64::new(gaussian_weight(v), 0.0),
        }
    }
}

/// `φ(v) = e^{-v²}/√π`.
#[inline]
pub fn gaussian_weight(v: f64) -> f64 {
    (-v * v).exp() * FRAC_1_SQRT_PI
}

/// Dawson's function `D(v) = e^{-v²} ∫₀^v e^{x²} dx`.
///
/// For `|v| < 6` the positive series `e^{-v²} Σ v^{2n+1}/(n!(2n+1))` is
/// summed directly (no cancellation); beyond that the asymptotic series
/// `1/(2v) Σ (2k-1)!!/(2v²)^k` is truncated at its smallest term.
pub fn dawson(v: f64) -> f64 {
    let x = v.abs();
    let d = if x < DAWSON_SEAM {
        dawson_series(x)
    } else {
        dawson_asymptotic(x)
    };
    d.copysign(v)
}

fn dawson_series(x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    let x2 = x * x;
    let mut a = x; // x^{2n+1}/n!
    let mut sum = 0.0;
    let mut n = 0usize;
    loop {
        let term = a / (2 * n + 1) as f64;
        sum += term;
        n += 1;
        if (n as f64) > x2 && term < 1e-18 * sum {
            break;
        }
        a *= x2 / n as f64;
    }
    (-x2).exp() * sum
}

fn dawson_asymptotic(x: f64) -> f64 {
    let inv = 1.0 / (2.0 * x * x);
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..200 {
        let next = term * (2 * k - 1) as f64 * inv;
        if next >= term || next < 1e-18 {
            break;
        }
        term = next;
        sum += term;
    }
    sum / (2.0 * x)
}

/// `p.v.∫ φ(w)/(i(w−v)) dw = 2iD(v)`.
pub fn hilbert_gaussian(v: f64) -> Complex64 {
    Complex64::new(0.0, 2.0 * dawson(v))
}

/// Scaled complementary error function `e^{x²} erfc(x)` for `x ≥ 0`.
pub(crate) fn erfcx_nonneg(x: f64) -> f64 {
    debug_assert!(x >= 0.0);
    if x < ERFCX_SEAM {
        // e^{x²} erf(x) = (2/√π) Σ 2^n x^{2n+1}/(2n+1)!!
        let x2 = x * x;
        let mut term = x;
        let mut sum = x;
        let mut n = 0usize;
        while term > 1e-18 * sum {
            term *= 2.0 * x2 / (2 * n + 3) as f64;
            sum += term;
            n += 1;
        }
        x2.exp() - 2.0 * FRAC_1_SQRT_PI * sum
    } else {
        // 1/(x + (1/2)/(x + 1/(x + (3/2)/(x + ...)))) evaluated backwards
        let depth = if x < 2.0 {
            4000
        } else if x < 4.0 {
            400
        } else {
            120
        };
        let mut tail = x;
        for k in (1..=depth).rev() {
            tail = x + 0.5 * k as f64 / tail;
        }
        FRAC_1_SQRT_PI / tail
    }
}

/// The odd function `Ξ(η) = ∫ ηφ(v)/(η² + v²) dv = sign(η)√π·erfcx(|η|)`.
///
/// Maps `ℝ∖{0}` onto `(−√π, 0) ∪ (0, √π)` and is strictly decreasing on
/// `(0, ∞)`.
pub fn xi_function(eta: f64) -> Result<f64> {
    if eta == 0.0 {
        return Err(BgkError::Domain("Ξ(η) is undefined at η = 0".into()));
    }
    if !eta.is_finite() {
        return Err(BgkError::NonFinite("xi_function argument"));
    }
    let x = eta.abs();
    let value = if x < XI_LIMIT_BRANCH {
        SQRT_PI - 2.0 * x
    } else {
        SQRT_PI * erfcx_nonneg(x)
    };
    Ok(value.copysign(eta))
}
