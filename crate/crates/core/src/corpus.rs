//! Fixed test corpus of initial data.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, Mutex};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::coefficients::InitialData;
use crate::dispersion::{lambda_of_xi, DEFAULT_XI_MARGIN};
use crate::error::{BgkError, Result};
use crate::specfun::SQRT_PI;

/// Wavenumbers on the real branch used throughout the corpus checks.
pub const CORPUS_XI: [f64; 4] = [0.25, 0.5, 1.0, 1.5];
/// Index-0 sample with no grossly determined part.
pub const CHI_ZERO_XI: f64 = 2.0;
const GAUSSIAN_SUPPORT: (f64, f64) = (-2.5, 2.5);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CorpusKind {
    /// `1/(1+Λ+iξv)`, a pure grossly determined profile
    GdsProfile,
    /// `e^{−v²}`
    Gaussian,
    /// `e^{−(v−1)²}`
    ShiftedGaussian,
}

impl CorpusKind {
    pub const ALL: [CorpusKind; 3] = [Self::GdsProfile, Self::Gaussian, Self::ShiftedGaussian];

    pub fn name(self) -> &'static str {
        match self {
            Self::GdsProfile => "gds-profile",
            Self::Gaussian => "gaussian",
            Self::ShiftedGaussian => "shifted-gaussian",
        }
    }

    pub fn initial_data(self) -> InitialData {
        let built = match self {
            Self::GdsProfile => {
                let cache: Arc<Mutex<HashMap<u64, f64>>> = Arc::default();
                let edge = SQRT_PI - DEFAULT_XI_MARGIN;
                InitialData::new(self.name(), (-edge, edge), move |xi, v| {
                    let l = *cache
                        .lock()
                        .expect("lambda cache poisoned")
                        .entry(xi.to_bits())
                        .or_insert_with(|| lambda_of_xi(xi).unwrap_or(f64::NAN));
                    Complex64::new(1.0 + l, xi * v).inv()
                })
            }
            Self::Gaussian => InitialData::new(self.name(), GAUSSIAN_SUPPORT, |_, v| {
                Complex64::new((-v * v).exp(), 0.0)
            }),
            Self::ShiftedGaussian => InitialData::new(self.name(), GAUSSIAN_SUPPORT, |_, v| {
                Complex64::new((-(v - 1.0) * (v - 1.0)).exp(), 0.0)
            }),
        };
        built.expect("corpus supports are valid")
    }
}

impl fmt::Display for CorpusKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CorpusKind {
    type Err = BgkError;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| {
                BgkError::Config(format!(
                    "unknown corpus '{s}'; expected one of gds-profile, gaussian, shifted-gaussian"
                ))
            })
    }
}
