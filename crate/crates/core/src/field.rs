//! Scalar field selection and the shared scalar type.
//!
//! Every coefficient is carried as a [`Complex64`]. Real instances keep the
//! imaginary part at exactly zero, so the same arithmetic serves both fields
//! and only noise generation, ordering, and DoF normalization branch on the
//! field tag.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

pub type Scalar = Complex64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScalarField {
    Real,
    Complex,
}

impl ScalarField {
    /// Draws one standard sample: N(0,1) for real, CN(0,1) for complex.
    pub fn standard_normal<R: Rng + ?Sized>(self, rng: &mut R) -> Scalar {
        match self {
            ScalarField::Real => Scalar::new(rng.sample(StandardNormal), 0.0),
            ScalarField::Complex => {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                Scalar::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
            }
        }
    }

    /// Power scale against which DoF is measured: ½·log₂P (real) or log₂P
    /// (complex).
    pub fn dof_scale(self, power: f64) -> f64 {
        match self {
            ScalarField::Real => 0.5 * power.log2(),
            ScalarField::Complex => power.log2(),
        }
    }

    pub fn dof_scale_name(self) -> &'static str {
        match self {
            ScalarField::Real => "half_log2P",
            ScalarField::Complex => "log2P",
        }
    }

    pub fn is_real(self) -> bool {
        self == ScalarField::Real
    }
}

impl std::fmt::Display for ScalarField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ScalarField::Real => f.write_str("real"),
            ScalarField::Complex => f.write_str("complex"),
        }
    }
}

/// Serialized form of one scalar: a bare number for real values, `[re, im]`
/// for complex ones.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScalarRepr {
    Real(f64),
    Complex([f64; 2]),
}

impl ScalarRepr {
    pub fn encode(value: Scalar, field: ScalarField) -> Self {
        match field {
            ScalarField::Real => ScalarRepr::Real(value.re),
            ScalarField::Complex => ScalarRepr::Complex([value.re, value.im]),
        }
    }

    pub fn decode(self) -> Scalar {
        match self {
            ScalarRepr::Real(re) => Scalar::new(re, 0.0),
            ScalarRepr::Complex([re, im]) => Scalar::new(re, im),
        }
    }
}

/// Total order used for sorting constellation points: by real part, then
/// imaginary part.
pub fn lex_cmp(a: &Scalar, b: &Scalar) -> std::cmp::Ordering {
    a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn real_samples_have_zero_imaginary_part() {
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        for _ in 0..100 {
            assert_eq!(ScalarField::Real.standard_normal(&mut rng).im, 0.0);
        }
    }

    #[test]
    fn complex_samples_have_unit_variance() {
        let mut rng = ChaCha20Rng::seed_from_u64(2);
        let n = 200_000;
        let power: f64 = (0..n)
            .map(|_| ScalarField::Complex.standard_normal(&mut rng).norm_sqr())
            .sum::<f64>()
            / n as f64;
        assert!((power - 1.0).abs() < 0.02, "{power}");
    }

    #[test]
    fn repr_round_trip() {
        let z = Scalar::new(1.5, -2.0);
        let json = serde_json::to_string(&ScalarRepr::encode(z, ScalarField::Complex)).unwrap();
        assert_eq!(json, "[1.5,-2.0]");
        let back: ScalarRepr = serde_json::from_str(&json).unwrap();
        assert_eq!(back.decode(), z);
        let real: ScalarRepr = serde_json::from_str("0.25").unwrap();
        assert_eq!(real.decode(), Scalar::new(0.25, 0.0));
    }
}
