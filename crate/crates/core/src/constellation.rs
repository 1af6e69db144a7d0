//! Received constellations, minimum distance and hard detection.
//!
//! A receiver sees `λ·Σ_c coef_c·ū_c` plus noise, where each `ū_c` is an
//! integer in `(−w_c, w_c)`. Favorite coefficients carry exactly one
//! sub-stream; merged interference coefficients carry the sum of every
//! aligned sub-stream that lands on them (possibly none). The constellation
//! enumerates every label, sorts the points and answers nearest-point
//! queries exactly.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{lex_cmp, Scalar, ScalarField};
use crate::monomial::Monomial;

pub const DEFAULT_CONSTELLATION_CAP: u128 = 1_000_000;

/// Relative tolerance below which two distinct coefficients are treated as
/// a numeric collision.
pub const COLLISION_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CoefficientEntry {
    pub monomial: Monomial,
    /// Value before the λ scaling.
    #[serde(serialize_with = "serialize_scalar")]
    pub value: Scalar,
    /// Symbols on this coefficient lie in `(−half_width, half_width)`.
    pub half_width: i64,
    /// Sub-stream indices whose symbols add up on this coefficient.
    pub members: Vec<usize>,
    pub favorite: bool,
}

fn serialize_scalar<S: serde::Serializer>(
    v: &Scalar,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeTuple;
    let mut t = s.serialize_tuple(2)?;
    t.serialize_element(&v.re)?;
    t.serialize_element(&v.im)?;
    t.end()
}

impl CoefficientEntry {
    fn radix(&self) -> u64 {
        (2 * self.half_width - 1) as u64
    }
}

#[derive(Clone, Debug)]
pub struct AlignedConstellation {
    pub receiver: usize,
    pub state: usize,
    pub field: ScalarField,
    pub lambda: f64,
    coefficients: Vec<CoefficientEntry>,
    strides: Vec<u64>,
    values: Vec<Scalar>,
    labels: Vec<u64>,
}

/// Number of points the coefficient list would enumerate.
pub fn enumeration_size(coefficients: &[CoefficientEntry]) -> u128 {
    coefficients
        .iter()
        .try_fold(1u128, |acc, c| acc.checked_mul(c.radix() as u128))
        .unwrap_or(u128::MAX)
}

impl AlignedConstellation {
    pub fn build(
        receiver: usize,
        state: usize,
        field: ScalarField,
        lambda: f64,
        coefficients: Vec<CoefficientEntry>,
        cap: u128,
    ) -> Result<Self> {
        if coefficients.iter().any(|c| c.half_width < 1) {
            return Err(Error::Config("symbol half-width must be at least 1".into()));
        }
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::Config(format!(
                "normalizer λ = {lambda} must be positive"
            )));
        }
        check_collisions(&coefficients)?;
        let size = enumeration_size(&coefficients);
        if size > cap {
            return Err(Error::SizeCap {
                what: "received constellation",
                required: size,
                cap,
            });
        }
        let mut strides = Vec::with_capacity(coefficients.len());
        let mut stride = 1u64;
        for c in &coefficients {
            strides.push(stride);
            stride *= c.radix();
        }

        let mut points: Vec<(Scalar, u64)> = vec![(Scalar::new(0.0, 0.0), 0)];
        points.reserve(size as usize);
        for (c, &stride) in coefficients.iter().zip(&strides) {
            let step = c.value * lambda;
            let base_len = points.len();
            for digit in 1..c.radix() {
                let offset = step * (digit as i64 - (c.half_width - 1)) as f64;
                for i in 0..base_len {
                    let (v, label) = points[i];
                    points.push((v + offset, label + digit * stride));
                }
            }
            // digit 0 keeps the existing points, shifted to the lowest symbol
            let offset0 = step * (-(c.half_width - 1)) as f64;
            for p in points.iter_mut().take(base_len) {
                p.0 += offset0;
            }
        }
        points.sort_unstable_by(|a, b| lex_cmp(&a.0, &b.0).then(a.1.cmp(&b.1)));
        let (values, labels) = points.into_iter().unzip();
        Ok(Self {
            receiver,
            state,
            field,
            lambda,
            coefficients,
            strides,
            values,
            labels,
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn coefficients(&self) -> &[CoefficientEntry] {
        &self.coefficients
    }

    pub fn favorite_count(&self) -> usize {
        self.coefficients.iter().filter(|c| c.favorite).count()
    }

    /// Sorted point values (λ-scaled).
    pub fn values(&self) -> &[Scalar] {
        &self.values
    }

    pub fn labels(&self) -> &[u64] {
        &self.labels
    }

    /// Symbols `ū_c` encoded by a label, one per coefficient.
    pub fn digits(&self, label: u64) -> Vec<i64> {
        self.coefficients
            .iter()
            .zip(&self.strides)
            .map(|(c, &s)| ((label / s) % c.radix()) as i64 - (c.half_width - 1))
            .collect()
    }

    pub fn label_of(&self, digits: &[i64]) -> Result<u64> {
        if digits.len() != self.coefficients.len() {
            return Err(Error::Config(format!(
                "label needs {} symbols, got {}",
                self.coefficients.len(),
                digits.len()
            )));
        }
        let mut label = 0u64;
        for ((c, &s), &d) in self.coefficients.iter().zip(&self.strides).zip(digits) {
            if d.abs() >= c.half_width {
                return Err(Error::Config(format!(
                    "symbol {d} outside (−{w}, {w})",
                    w = c.half_width
                )));
            }
            label += (d + c.half_width - 1) as u64 * s;
        }
        Ok(label)
    }

    /// Noiseless received value for a label, evaluated directly.
    pub fn value_of(&self, digits: &[i64]) -> Scalar {
        self.coefficients
            .iter()
            .zip(digits)
            .map(|(c, &d)| c.value * d as f64)
            .sum::<Scalar>()
            * self.lambda
    }

    /// Exact minimum distance between two points. Zero when two labels
    /// share a value.
    pub fn min_distance(&self) -> Result<f64> {
        min_distance_sorted(&self.values, self.field)
    }

    /// Label of the nearest point. Ties go to the smaller value (real) or
    /// the lexicographically smaller point (complex).
    pub fn detect(&self, y: Scalar) -> Result<u64> {
        if self.values.is_empty() {
            return Err(Error::InsufficientData("empty constellation".into()));
        }
        let idx = match self.field {
            ScalarField::Real => nearest_real(&self.values, y.re),
            ScalarField::Complex => nearest_planar(&self.values, y),
        };
        Ok(self.labels[idx])
    }

    /// Points whose own value is not detected back to their label.
    pub fn round_trip_failures(&self) -> usize {
        self.values
            .iter()
            .zip(&self.labels)
            .filter(|&(&v, &l)| self.detect(v).map(|d| d != l).unwrap_or(true))
            .count()
    }
}

fn check_collisions(coefficients: &[CoefficientEntry]) -> Result<()> {
    if let Some(c) = coefficients
        .iter()
        .find(|c| !c.value.is_finite() || c.value.norm() == 0.0)
    {
        return Err(Error::NumericCollision(format!(
            "{} evaluates to {}",
            c.monomial, c.value
        )));
    }
    // |a − b| ≥ |b| − |a|, so only pairs of nearly equal magnitude can collide
    let mut order: Vec<(f64, usize)> = coefficients
        .iter()
        .enumerate()
        .map(|(i, c)| (c.value.norm(), i))
        .collect();
    order.sort_by(|a, b| a.0.total_cmp(&b.0));
    for (pos, &(na, i)) in order.iter().enumerate() {
        for &(nb, j) in &order[pos + 1..] {
            if nb - na > COLLISION_TOLERANCE * nb {
                break;
            }
            let (a, b) = (coefficients[i].value, coefficients[j].value);
            if (a - b).norm() <= COLLISION_TOLERANCE * nb {
                return Err(Error::NumericCollision(format!(
                    "{} and {} both evaluate to {a}",
                    coefficients[i].monomial, coefficients[j].monomial
                )));
            }
        }
    }
    Ok(())
}

/// Minimum pairwise distance of points sorted by [`lex_cmp`].
pub fn min_distance_sorted(values: &[Scalar], field: ScalarField) -> Result<f64> {
    if values.len() < 2 {
        return Err(Error::InsufficientData(
            "minimum distance needs at least two points".into(),
        ));
    }
    match field {
        ScalarField::Real => Ok(values
            .windows(2)
            .map(|w| (w[1].re - w[0].re).abs())
            .fold(f64::INFINITY, f64::min)),
        ScalarField::Complex => {
            // sweep along the real axis, pruning pairs further apart in re
            // than the best distance so far
            let mut best = f64::INFINITY;
            for i in 0..values.len() {
                for j in i + 1..values.len() {
                    if values[j].re - values[i].re >= best {
                        break;
                    }
                    best = best.min((values[j] - values[i]).norm());
                }
            }
            Ok(best)
        }
    }
}

/// Index of the nearest value in an ascending slice; ties go to the lower.
fn nearest_real(values: &[Scalar], y: f64) -> usize {
    let hi = values.partition_point(|v| v.re <= y);
    if hi == 0 {
        return 0;
    }
    if hi == values.len() {
        return values.len() - 1;
    }
    let lo = hi - 1;
    // equal values under distinct labels: report the first copy
    let lo = values[..=lo].partition_point(|v| v.re < values[lo].re);
    if y - values[lo].re <= values[hi].re - y {
        lo
    } else {
        hi
    }
}

fn nearest_planar(values: &[Scalar], y: Scalar) -> usize {
    let start = values.partition_point(|v| v.re < y.re);
    let mut best = usize::MAX;
    let mut best_d = f64::INFINITY;
    let consider = |i: usize, best: &mut usize, best_d: &mut f64| {
        let d = (values[i] - y).norm_sqr();
        if d < *best_d || (d == *best_d && lex_cmp(&values[i], &values[*best]).is_lt()) {
            *best_d = d;
            *best = i;
        }
    };
    for i in start..values.len() {
        let dx = values[i].re - y.re;
        if dx * dx > best_d {
            break;
        }
        consider(i, &mut best, &mut best_d);
    }
    for i in (0..start).rev() {
        let dx = y.re - values[i].re;
        if dx * dx > best_d {
            break;
        }
        consider(i, &mut best, &mut best_d);
    }
    best
}
