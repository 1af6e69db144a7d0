//! Exact degrees-of-freedom accounting.
//!
//! Finite-instance DoF values are rationals in `ε`, `L_r` and `ξ`, so they
//! are computed with big rationals. `ε` enters as the shortest decimal that
//! round-trips to the configured `f64` (0.05 is treated as exactly 1/20).

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// The decimal value `x` was written as, as an exact rational.
pub fn exact_decimal(x: f64) -> Result<BigRational> {
    if !x.is_finite() {
        return Err(Error::Config(format!("{x} is not a finite number")));
    }
    let text = format!("{x:e}");
    let (mantissa, exp) = text.split_once('e').expect("`{:e}` always has an exponent");
    let exp: i32 = exp.parse().expect("exponent is an integer");
    let negative = mantissa.starts_with('-');
    let mantissa = mantissa.trim_start_matches('-');
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    let digits: BigInt = format!("{int_part}{frac_part}")
        .parse()
        .expect("mantissa digits");
    let shift = exp - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let mut value = if shift >= 0 {
        BigRational::from_integer(digits * num_traits::pow(ten, shift as usize))
    } else {
        BigRational::new(digits, num_traits::pow(ten, (-shift) as usize))
    };
    if negative {
        value = -value;
    }
    Ok(value)
}

pub fn rational_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// `"p/q"`, or `"p"` for integers.
pub fn rational_string(r: &BigRational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// A rational printed both exactly and as a decimal.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RationalValue(pub BigRational);

impl RationalValue {
    pub fn to_f64(&self) -> f64 {
        rational_to_f64(&self.0)
    }
}

impl std::fmt::Display for RationalValue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&rational_string(&self.0))
    }
}

impl Serialize for RationalValue {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("Rational", 2)?;
        st.serialize_field("exact", &rational_string(&self.0))?;
        st.serialize_field("decimal", &self.to_f64())?;
        st.end()
    }
}

fn big(x: u128) -> BigRational {
    BigRational::from_integer(BigInt::from(x))
}

/// `(1 − ε)/(ξ + ε)`: the DoF of one sub-stream.
pub fn stream_dof(xi: u128, eps: &BigRational) -> Result<BigRational> {
    if *eps < BigRational::zero() || *eps >= BigRational::one() {
        return Err(Error::Config(format!(
            "ε = {} must lie in [0, 1)",
            rational_string(eps)
        )));
    }
    let denom = big(xi) + eps;
    if denom.is_zero() {
        return Err(Error::Config("ξ + ε must be positive".into()));
    }
    Ok((BigRational::one() - eps) / denom)
}

/// Per-receiver nominal DoF `M·L_r·(1 − ε)/(ξ + ε)` of the X scheme.
pub fn x_scheme_profile(
    antennas: usize,
    basis_sizes: &[u128],
    xi: u128,
    eps: &BigRational,
) -> Result<Vec<BigRational>> {
    let per = stream_dof(xi, eps)?;
    Ok(basis_sizes
        .iter()
        .map(|&l| big(antennas as u128 * l) * &per)
        .collect())
}

/// Total nominal DoF `M·ΣL_r·(1 − ε)/(ξ + ε)` of the X scheme.
pub fn x_scheme_total(
    antennas: usize,
    basis_sizes: &[u128],
    xi: u128,
    eps: &BigRational,
) -> Result<BigRational> {
    Ok(x_scheme_profile(antennas, basis_sizes, xi, eps)?
        .into_iter()
        .fold(BigRational::zero(), |a, b| a + b))
}

/// Per-receiver nominal DoF of the hybrid scheme: `M·L` streams for each
/// zero-forced receiver and `L` for the last one, each worth
/// `(1 − ε)/(ξ + ε)`.
pub fn hybrid_profile(
    antennas: usize,
    l: u128,
    xi: u128,
    eps: &BigRational,
) -> Result<Vec<BigRational>> {
    if antennas == 0 {
        return Err(Error::Config("M must be at least 1".into()));
    }
    let per = stream_dof(xi, eps)?;
    let mut out = vec![big(antennas as u128 * l) * &per; antennas - 1];
    out.push(big(l) * per);
    Ok(out)
}

pub fn hybrid_total(antennas: usize, l: u128, xi: u128, eps: &BigRational) -> Result<BigRational> {
    Ok(hybrid_profile(antennas, l, xi, eps)?
        .into_iter()
        .fold(BigRational::zero(), |a, b| a + b))
}

/// Optimal DoF of the compound broadcast channel and the bound reached by
/// running the real scheme on the real-lifted complex channel.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DofReference {
    pub antennas: usize,
    pub receivers: usize,
    /// `MK/(M + K − 1)`.
    pub value: RationalValue,
    /// `2MK/(2M + 2K − 1)`.
    pub real_lift_bound: RationalValue,
}

pub fn dof_reference(antennas: usize, receivers: usize) -> Result<DofReference> {
    if antennas == 0 || receivers == 0 {
        return Err(Error::Config("M and K must be at least 1".into()));
    }
    let (m, k) = (antennas as u128, receivers as u128);
    Ok(DofReference {
        antennas,
        receivers,
        value: RationalValue(BigRational::new(
            BigInt::from(m * k),
            BigInt::from(m + k - 1),
        )),
        real_lift_bound: RationalValue(BigRational::new(
            BigInt::from(2 * m * k),
            BigInt::from(2 * m + 2 * k - 1),
        )),
    })
}

/// `M − 1 + 1/M`, the optimal DoF when all but one receiver have a single
/// known state.
pub fn hybrid_reference(antennas: usize) -> Result<BigRational> {
    if antennas == 0 {
        return Err(Error::Config("M must be at least 1".into()));
    }
    let m = BigInt::from(antennas);
    Ok(BigRational::from_integer(m.clone() - 1) + BigRational::new(BigInt::from(1), m))
}
