//! Outer-bound checks on per-receiver DoF profiles.
//!
//! For each receiver `r` placed in the "×M" slot the converse gives
//! `Σ_{r̂≠r} d_r̂ + M·d_r ≤ M`, valid when receiver `r` has at least `M`
//! states. Summing all `K` rotations gives `(M + K − 1)·Σd ≤ MK`. Each
//! receiver alone is also limited to one DoF.

use serde::Serialize;

use crate::error::{Error, Result};

/// Relative slack allowed before an inequality counts as violated.
pub const BOUND_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    Rotated,
    Aggregate,
    SingleUser,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundCheck {
    pub kind: BoundKind,
    pub receiver: Option<usize>,
    pub lhs: f64,
    pub rhs: f64,
    /// `rhs − lhs`; negative when violated.
    pub slack: f64,
    /// Whether the converse covers this inequality for the given states.
    pub applicable: bool,
    pub violated: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundReport {
    pub antennas: usize,
    pub profile: Vec<f64>,
    pub checks: Vec<BoundCheck>,
    pub violations: usize,
    /// Smallest slack among applicable inequalities.
    pub min_slack: f64,
}

impl BoundReport {
    pub fn passes(&self) -> bool {
        self.violations == 0
    }
}

/// Evaluates every outer bound on `profile`. With `states` given, a rotated
/// bound (and the aggregate built from them) is marked inapplicable when
/// its receiver has fewer than `M` states; inapplicable violations are
/// reported but not counted.
pub fn check_outer_bounds(
    profile: &[f64],
    antennas: usize,
    states: Option<&[usize]>,
) -> Result<BoundReport> {
    if antennas == 0 || profile.is_empty() {
        return Err(Error::Config(
            "need M ≥ 1 and a non-empty DoF profile".into(),
        ));
    }
    if profile.iter().any(|d| !d.is_finite() || *d < 0.0) {
        return Err(Error::Config(
            "DoF values must be finite and non-negative".into(),
        ));
    }
    if let Some(j) = states {
        if j.len() != profile.len() {
            return Err(Error::Config(format!(
                "{} state counts for {} receivers",
                j.len(),
                profile.len()
            )));
        }
    }
    let m = antennas as f64;
    let k = profile.len();
    let total: f64 = profile.iter().sum();
    let mut checks = Vec::with_capacity(2 * k + 1);
    let mut push = |kind, receiver, lhs: f64, rhs: f64, applicable| {
        checks.push(BoundCheck {
            kind,
            receiver,
            lhs,
            rhs,
            slack: rhs - lhs,
            applicable,
            violated: lhs > rhs * (1.0 + BOUND_TOLERANCE),
        });
    };
    let rotation_applies = |r: usize| states.is_none_or(|j| j[r] >= antennas);
    for (r, &d) in profile.iter().enumerate() {
        push(
            BoundKind::Rotated,
            Some(r),
            total - d + m * d,
            m,
            rotation_applies(r),
        );
    }
    push(
        BoundKind::Aggregate,
        None,
        (m + k as f64 - 1.0) * total,
        m * k as f64,
        (0..k).all(rotation_applies),
    );
    for (r, &d) in profile.iter().enumerate() {
        push(BoundKind::SingleUser, Some(r), d, 1.0, true);
    }
    let violations = checks.iter().filter(|c| c.applicable && c.violated).count();
    let min_slack = checks
        .iter()
        .filter(|c| c.applicable)
        .map(|c| c.slack)
        .fold(f64::INFINITY, f64::min);
    Ok(BoundReport {
        antennas,
        profile: profile.to_vec(),
        checks,
        violations,
        min_slack,
    })
}
