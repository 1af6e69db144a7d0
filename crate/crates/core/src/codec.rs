//! The X-channel alignment scheme.
//!
//! Antenna `t` sends, for every receiver `r`, `L_r` integer sub-streams
//! `u_{rt}^{(l)} ∈ (−Q, Q)`, each modulated by one pseudo-vector of `B_r`:
//!
//! ```text
//! x_t[m] = λ Σ_r Σ_l ν_r^{(l)} u_{rt}^{(l)}[m]
//! ```
//!
//! At receiver `r` in state `ŝ` the favorite sub-streams arrive on the
//! `M·L_r` distinct coefficients `h[r][t][ŝ]·ν`, while the sub-streams meant
//! for `r̂ ≠ r` collapse onto the alignment envelope of `B_r̂` and are
//! detected as merged integers in `(−MQ, MQ)`.

use std::collections::HashMap;

use num_rational::BigRational;
use rand::Rng;
use serde::Serialize;

use crate::channel::ChannelRealization;
use crate::constellation::{AlignedConstellation, CoefficientEntry};
use crate::dof;
use crate::error::{Error, Result};
use crate::field::{Scalar, ScalarField};
use crate::monomial::{build_basis_capped, choose_n, kappa, xi, Dims, PseudoVectorBasis, SymbolId};

pub const DEFAULT_EPS: f64 = 0.05;
pub const DEFAULT_CODEWORD_LEN: usize = 10_000;

/// Relative slack in the floor of `Q`, so that powers chosen to make the
/// exponent land on an integer are not floored one step low by rounding.
const Q_FLOOR_SLACK: f64 = 1e-12;

/// Checks `ε ∈ [0, 0.5)`. `ε = 0` is the limit the finite-instance
/// formulas approach as `ε → 0⁺`.
pub fn validate_eps(eps: f64) -> Result<()> {
    if !(0.0..0.5).contains(&eps) {
        return Err(Error::Config(format!("ε = {eps} must lie in [0, 0.5)")));
    }
    Ok(())
}

fn validate_power(power: f64) -> Result<()> {
    if !(power > 0.0 && power.is_finite()) {
        return Err(Error::Config(format!(
            "power P = {power} must be positive and finite"
        )));
    }
    Ok(())
}

/// Exponent `e` with `Q ≈ base^e`: `(1−ε)/(2(ξ+ε))` on `P/M` for real
/// channels and `(1−ε)/(ξ+2ε)` on `P` for complex ones.
pub fn q_exponent(field: ScalarField, xi: u128, eps: f64) -> f64 {
    let xi = xi as f64;
    match field {
        ScalarField::Real => (1.0 - eps) / (2.0 * (xi + eps)),
        ScalarField::Complex => (1.0 - eps) / (xi + 2.0 * eps),
    }
}

/// Un-floored `Q` for the X scheme.
pub fn q_raw(field: ScalarField, power: f64, antennas: usize, xi: u128, eps: f64) -> f64 {
    let base = match field {
        ScalarField::Real => power / antennas as f64,
        ScalarField::Complex => power,
    };
    base.powf(q_exponent(field, xi, eps))
}

/// Integer half-width from a raw `Q`; below one the instance is infeasible.
pub fn floor_q(raw: f64) -> Result<i64> {
    if !raw.is_finite() {
        return Err(Error::Config(format!("Q = {raw} is not finite")));
    }
    let q = (raw * (1.0 + Q_FLOOR_SLACK)).floor();
    if q < 1.0 {
        return Err(Error::Infeasible(format!(
            "Q = {raw:.6} < 1: the power is too low for this instance"
        )));
    }
    Ok(q as i64)
}

/// Parameters of one X-scheme instance at one power level.
#[derive(Clone, Debug, Serialize)]
pub struct CodecParams {
    #[serde(rename = "M")]
    pub antennas: usize,
    #[serde(rename = "K")]
    pub receivers: usize,
    #[serde(rename = "J")]
    pub states: Vec<usize>,
    pub n_list: Vec<u32>,
    #[serde(rename = "L_list")]
    pub basis_sizes: Vec<u128>,
    pub kappa_list: Vec<u128>,
    pub xi: u128,
    pub eps: f64,
    #[serde(rename = "P")]
    pub power: f64,
    #[serde(rename = "Q")]
    pub q: i64,
    /// `Q` before flooring.
    #[serde(rename = "Q_raw")]
    pub q_raw: f64,
    /// Whether `Q` was fixed by the caller instead of derived from `P`.
    #[serde(rename = "Q_pinned")]
    pub q_pinned: bool,
    pub lambda: f64,
    #[serde(rename = "Gamma")]
    pub gamma: f64,
    pub field: ScalarField,
    #[serde(rename = "T")]
    pub codeword_len: usize,
}

impl CodecParams {
    /// Per-antenna power bound `λ²Γ²Q²` implied by the parameters.
    pub fn power_bound(&self) -> f64 {
        (self.lambda * self.gamma * self.q as f64).powi(2)
    }

    pub fn eps_exact(&self) -> Result<BigRational> {
        dof::exact_decimal(self.eps)
    }

    /// `M·ΣL_r·(1 − ε)/(ξ + ε)`.
    pub fn nominal_dof(&self) -> Result<BigRational> {
        dof::x_scheme_total(
            self.antennas,
            &self.basis_sizes,
            self.xi,
            &self.eps_exact()?,
        )
    }

    pub fn nominal_profile(&self) -> Result<Vec<BigRational>> {
        dof::x_scheme_profile(
            self.antennas,
            &self.basis_sizes,
            self.xi,
            &self.eps_exact()?,
        )
    }
}

/// Integer sub-stream symbols, one row per sub-stream.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubStreamGrid {
    q: i64,
    len: usize,
    symbols: Vec<Vec<i64>>,
}

impl SubStreamGrid {
    pub fn zeros(streams: usize, q: i64, len: usize) -> Self {
        Self {
            q,
            len,
            symbols: vec![vec![0; len]; streams],
        }
    }

    /// Uniform symbols in `(−Q, Q)`.
    pub fn random<R: Rng + ?Sized>(streams: usize, q: i64, len: usize, rng: &mut R) -> Self {
        let symbols = (0..streams)
            .map(|_| (0..len).map(|_| rng.random_range(1 - q..q)).collect())
            .collect();
        Self { q, len, symbols }
    }

    pub fn from_symbols(q: i64, symbols: Vec<Vec<i64>>) -> Result<Self> {
        let len = symbols.first().map_or(0, Vec::len);
        if symbols.iter().any(|row| row.len() != len) {
            return Err(Error::Config("sub-stream rows differ in length".into()));
        }
        let grid = Self { q, len, symbols };
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<()> {
        for (s, row) in self.symbols.iter().enumerate() {
            if let Some(&u) = row.iter().find(|u| u.abs() >= self.q) {
                return Err(Error::Config(format!(
                    "sub-stream {s} carries {u}, outside (−{q}, {q})",
                    q = self.q
                )));
            }
        }
        Ok(())
    }

    pub fn q(&self) -> i64 {
        self.q
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn streams(&self) -> usize {
        self.symbols.len()
    }

    pub fn stream(&self, s: usize) -> &[i64] {
        &self.symbols[s]
    }

    pub fn set(&mut self, s: usize, m: usize, value: i64) -> Result<()> {
        if value.abs() >= self.q {
            return Err(Error::Config(format!(
                "symbol {value} outside (−{q}, {q})",
                q = self.q
            )));
        }
        let streams = self.symbols.len();
        let slot = self
            .symbols
            .get_mut(s)
            .and_then(|row| row.get_mut(m))
            .ok_or(Error::IndexOutOfRange {
                what: "sub-stream symbol",
                index: s,
                limit: streams,
            })?;
        *slot = value;
        Ok(())
    }
}

/// `x[t][m] = λ Σ_s w_s[t]·u_s[m]` for per-stream transmit weights `w_s`.
pub fn encode_streams(
    weights: &[Vec<Scalar>],
    lambda: f64,
    grid: &SubStreamGrid,
) -> Result<Vec<Vec<Scalar>>> {
    grid.validate()?;
    if weights.len() != grid.streams() {
        return Err(Error::Config(format!(
            "{} transmit weights for {} sub-streams",
            weights.len(),
            grid.streams()
        )));
    }
    let antennas = weights.first().map_or(0, Vec::len);
    let mut x = vec![vec![Scalar::new(0.0, 0.0); grid.len()]; antennas];
    for (w, u) in weights.iter().zip(&grid.symbols) {
        for (t, &wt) in w.iter().enumerate() {
            if wt == Scalar::new(0.0, 0.0) {
                continue;
            }
            let wt = wt * lambda;
            for (xm, &um) in x[t].iter_mut().zip(u) {
                *xm += wt * um as f64;
            }
        }
    }
    Ok(x)
}

/// Pseudo-vector bases for all receivers of one X-scheme instance.
#[derive(Clone, Debug)]
pub struct XScheme {
    dims: Dims,
    bases: Vec<PseudoVectorBasis>,
    offsets: Vec<usize>,
}

impl XScheme {
    pub fn new(dims: Dims, n_list: &[u32], cap: u128) -> Result<Self> {
        dims.validate()?;
        if n_list.len() != dims.receivers() {
            return Err(Error::Config(format!(
                "need one exponent cap per receiver ({} given, K = {})",
                n_list.len(),
                dims.receivers()
            )));
        }
        let bases = n_list
            .iter()
            .enumerate()
            .map(|(r, &n)| build_basis_capped(&dims, r, n, cap))
            .collect::<Result<Vec<_>>>()?;
        let mut offsets = Vec::with_capacity(bases.len());
        let mut acc = 0;
        for b in &bases {
            offsets.push(acc);
            acc += dims.antennas * b.len();
        }
        Ok(Self {
            dims,
            bases,
            offsets,
        })
    }

    /// Picks each `n_r` as the largest value with `L_r ≤ target`.
    pub fn with_target_size(dims: Dims, target: u128, cap: u128) -> Result<Self> {
        let n_list = (0..dims.receivers())
            .map(|r| choose_n(target, &dims, r))
            .collect::<Result<Vec<_>>>()?;
        Self::new(dims, &n_list, cap)
    }

    pub fn dims(&self) -> &Dims {
        &self.dims
    }

    pub fn bases(&self) -> &[PseudoVectorBasis] {
        &self.bases
    }

    pub fn n_list(&self) -> Vec<u32> {
        self.bases.iter().map(|b| b.n).collect()
    }

    pub fn basis_sizes(&self) -> Vec<u128> {
        self.bases.iter().map(|b| b.len() as u128).collect()
    }

    /// `κ_r̂` per receiver; zero when there is only one receiver.
    pub fn kappa_list(&self) -> Result<Vec<u128>> {
        if self.dims.receivers() == 1 {
            return Ok(vec![0]);
        }
        self.bases
            .iter()
            .enumerate()
            .map(|(r, b)| kappa(b.n, &self.dims, r))
            .collect()
    }

    pub fn xi(&self) -> Result<u128> {
        xi(&self.dims, &self.n_list())
    }

    pub fn stream_count(&self) -> usize {
        self.offsets.last().copied().unwrap_or(0)
            + self.dims.antennas * self.bases.last().map_or(0, |b| b.len())
    }

    /// Flat index of sub-stream `u_{rt}^{(l)}`.
    pub fn stream_index(&self, r: usize, t: usize, l: usize) -> usize {
        self.offsets[r] + t * self.bases[r].len() + l
    }

    /// Inverse of [`XScheme::stream_index`].
    pub fn stream_coords(&self, s: usize) -> (usize, usize, usize) {
        let r = self.offsets.partition_point(|&o| o <= s) - 1;
        let within = s - self.offsets[r];
        let len = self.bases[r].len();
        (r, within / len, within % len)
    }

    pub fn stream_receiver(&self, s: usize) -> usize {
        self.stream_coords(s).0
    }

    fn check_channel(&self, ch: &ChannelRealization) -> Result<()> {
        if Dims::from(ch.config()) != self.dims {
            return Err(Error::Config(format!(
                "channel dimensions (M = {}, J = {:?}) do not match the scheme (M = {}, J = {:?})",
                ch.antennas(),
                ch.config().states,
                self.dims.antennas,
                self.dims.states
            )));
        }
        Ok(())
    }

    /// Numeric pseudo-vectors `ν_r^{(l)}`, indexed `[r][l]`.
    pub fn pseudo_vector_values(&self, ch: &ChannelRealization) -> Result<Vec<Vec<Scalar>>> {
        self.check_channel(ch)?;
        self.bases
            .iter()
            .map(|b| b.elements.iter().map(|m| m.evaluate(ch)).collect())
            .collect()
    }

    /// `Γ = sqrt(Σ_r Σ_{ν∈B_r} |ν|²)`.
    pub fn gamma(&self, ch: &ChannelRealization) -> Result<f64> {
        let values = self.pseudo_vector_values(ch)?;
        let g2: f64 = values.iter().flatten().map(|v| v.norm_sqr()).sum();
        if !(g2 > 0.0 && g2.is_finite()) {
            return Err(Error::NumericCollision(format!(
                "pseudo-vector energy Γ² = {g2} is not usable"
            )));
        }
        Ok(g2.sqrt())
    }

    /// Parameters at power `P`, with `Q` from the field's formula.
    pub fn params(
        &self,
        ch: &ChannelRealization,
        eps: f64,
        power: f64,
        codeword_len: usize,
    ) -> Result<CodecParams> {
        self.params_inner(ch, eps, power, codeword_len, None)
    }

    /// Parameters at power `P` with `Q` pinned; `λ` is still set so the
    /// power constraint holds.
    pub fn params_with_q(
        &self,
        ch: &ChannelRealization,
        eps: f64,
        power: f64,
        codeword_len: usize,
        q: i64,
    ) -> Result<CodecParams> {
        if q < 1 {
            return Err(Error::Config(format!("pinned Q = {q} must be at least 1")));
        }
        self.params_inner(ch, eps, power, codeword_len, Some(q))
    }

    fn params_inner(
        &self,
        ch: &ChannelRealization,
        eps: f64,
        power: f64,
        codeword_len: usize,
        pinned: Option<i64>,
    ) -> Result<CodecParams> {
        self.check_channel(ch)?;
        validate_eps(eps)?;
        validate_power(power)?;
        if codeword_len == 0 {
            return Err(Error::Config("codeword length T must be at least 1".into()));
        }
        let field = ch.field();
        let m = self.dims.antennas;
        let xi = self.xi()?;
        let raw = q_raw(field, power, m, xi, eps);
        let q = match pinned {
            Some(q) => q,
            None => floor_q(raw)?,
        };
        let gamma = self.gamma(ch)?;
        let lambda = (power / m as f64).sqrt() / (gamma * q as f64);
        Ok(CodecParams {
            antennas: m,
            receivers: self.dims.receivers(),
            states: self.dims.states.clone(),
            n_list: self.n_list(),
            basis_sizes: self.basis_sizes(),
            kappa_list: self.kappa_list()?,
            xi,
            eps,
            power,
            q,
            q_raw: raw,
            q_pinned: pinned.is_some(),
            lambda,
            gamma,
            field,
            codeword_len,
        })
    }

    /// Transmit weight vector of every sub-stream: `ν_r^{(l)}` on antenna
    /// `t`, zero elsewhere.
    pub fn transmit_weights(&self, ch: &ChannelRealization) -> Result<Vec<Vec<Scalar>>> {
        let values = self.pseudo_vector_values(ch)?;
        let m = self.dims.antennas;
        let mut out = Vec::with_capacity(self.stream_count());
        for nu in &values {
            for t in 0..m {
                for &v in nu {
                    let mut w = vec![Scalar::new(0.0, 0.0); m];
                    w[t] = v;
                    out.push(w);
                }
            }
        }
        Ok(out)
    }

    /// Transmit signal `x[t][m]` for a grid of sub-stream symbols.
    pub fn encode(
        &self,
        ch: &ChannelRealization,
        params: &CodecParams,
        grid: &SubStreamGrid,
    ) -> Result<Vec<Vec<Scalar>>> {
        if grid.streams() != self.stream_count() {
            return Err(Error::Config(format!(
                "grid has {} sub-streams, scheme needs {}",
                grid.streams(),
                self.stream_count()
            )));
        }
        if grid.q() > params.q {
            return Err(Error::Config(format!(
                "grid half-width {} exceeds Q = {}",
                grid.q(),
                params.q
            )));
        }
        encode_streams(&self.transmit_weights(ch)?, params.lambda, grid)
    }

    /// Coefficients seen at receiver `r` in state `state`: `M·L_r`
    /// favorites followed by the alignment envelope of every other
    /// receiver's basis.
    pub fn received_coefficients(
        &self,
        ch: &ChannelRealization,
        q: i64,
        r: usize,
        state: usize,
        cap: u128,
    ) -> Result<Vec<CoefficientEntry>> {
        self.check_channel(ch)?;
        let states = ch.states(r)?;
        if state >= states {
            return Err(Error::IndexOutOfRange {
                what: "state",
                index: state,
                limit: states,
            });
        }
        let m = self.dims.antennas;
        let values = self.pseudo_vector_values(ch)?;
        let shifts: Vec<SymbolId> = (0..m).map(|t| SymbolId::h(r, t, state)).collect();
        let gains: Vec<Scalar> = (0..m)
            .map(|t| ch.coeff(r, t, state))
            .collect::<Result<_>>()?;

        let mut out = Vec::new();
        for t in 0..m {
            for (l, mono) in self.bases[r].elements.iter().enumerate() {
                out.push(CoefficientEntry {
                    monomial: mono.times(shifts[t]),
                    value: gains[t] * values[r][l],
                    half_width: q,
                    members: vec![self.stream_index(r, t, l)],
                    favorite: true,
                });
            }
        }
        for (rh, basis) in self.bases.iter().enumerate() {
            if rh == r {
                continue;
            }
            let envelope = basis.alignment_envelope(&shifts, cap)?;
            let start = out.len();
            let mut position = HashMap::with_capacity(envelope.len());
            for (i, mono) in envelope.into_iter().enumerate() {
                position.insert(mono.clone(), start + i);
                out.push(CoefficientEntry {
                    value: mono.evaluate(ch)?,
                    monomial: mono,
                    half_width: m as i64 * q,
                    members: Vec::new(),
                    favorite: false,
                });
            }
            for t in 0..m {
                for (l, mono) in basis.elements.iter().enumerate() {
                    let idx = position[&mono.times(shifts[t])];
                    let entry = &mut out[idx];
                    if entry.members.is_empty() {
                        entry.value = gains[t] * values[rh][l];
                    }
                    entry.members.push(self.stream_index(rh, t, l));
                }
            }
        }
        Ok(out)
    }

    /// The merged received constellation `C_r` at state `state`.
    pub fn received_constellation(
        &self,
        ch: &ChannelRealization,
        params: &CodecParams,
        r: usize,
        state: usize,
        cap: u128,
    ) -> Result<AlignedConstellation> {
        let coefficients = self.received_coefficients(ch, params.q, r, state, cap)?;
        AlignedConstellation::build(r, state, ch.field(), params.lambda, coefficients, cap)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{sample_channel, CompoundChannelConfig};
    use crate::constellation::enumeration_size;
    use crate::rng::stream_rng;

    fn tiny(seed: u64, field: ScalarField) -> (XScheme, ChannelRealization) {
        let cfg = CompoundChannelConfig::new(2, vec![1, 1], field, seed);
        let ch = sample_channel(&cfg).unwrap();
        let scheme = XScheme::new(Dims::from(&cfg), &[1, 1], 1 << 20).unwrap();
        (scheme, ch)
    }

    #[test]
    fn q_examples() {
        // (P/M)^{1/12} with P/M = 2^12
        let raw = q_raw(ScalarField::Real, 2.0 * 4096.0, 2, 6, 0.0);
        assert_eq!(floor_q(raw).unwrap(), 2);
        assert_eq!(
            floor_q(q_raw(ScalarField::Real, 2.0, 2, 17, 0.05)).unwrap(),
            1
        );
        assert_eq!(
            floor_q(q_raw(ScalarField::Real, 2.0, 2, 6, 0.45)).unwrap(),
            1
        );
        assert_eq!(
            floor_q(q_raw(ScalarField::Complex, 64.0, 2, 6, 0.0)).unwrap(),
            2
        );
        assert!(matches!(
            floor_q(q_raw(ScalarField::Real, 1.0, 2, 6, 0.05)),
            Err(Error::Infeasible(_))
        ));
    }

    #[test]
    fn eps_range() {
        assert!(validate_eps(0.0).is_ok());
        assert!(validate_eps(0.49).is_ok());
        assert!(validate_eps(0.5).is_err());
        assert!(validate_eps(-0.01).is_err());
        assert!(validate_eps(f64::NAN).is_err());
    }

    #[test]
    fn params_respect_power() {
        let (scheme, ch) = tiny(3, ScalarField::Real);
        for &p in &[10.0, 1e4, 1e9] {
            let params = scheme.params(&ch, 0.05, p, 100).unwrap();
            assert_eq!(params.xi, 6);
            assert_eq!(params.kappa_list, vec![4, 4]);
            assert!(params.power_bound() <= p / 2.0 * (1.0 + 1e-9));
        }
        let limit = scheme.params(&ch, 0.0, 2.0 * 4096.0, 1).unwrap();
        assert_eq!(limit.q, 2);
        assert_eq!(limit.nominal_dof().unwrap().to_string(), "2/3");
    }

    #[test]
    fn stream_indexing_round_trips() {
        let dims = Dims::new(2, vec![1, 2]).unwrap();
        let scheme = XScheme::new(dims, &[2, 1], 1 << 20).unwrap();
        // L_0 = 2^4, L_1 = 1
        assert_eq!(scheme.stream_count(), 2 * 16 + 2);
        for s in 0..scheme.stream_count() {
            let (r, t, l) = scheme.stream_coords(s);
            assert_eq!(scheme.stream_index(r, t, l), s);
        }
    }

    #[test]
    fn encode_basis_response() {
        let (scheme, ch) = tiny(5, ScalarField::Real);
        let params = scheme.params(&ch, 0.0, 8192.0, 4).unwrap();
        let zero = SubStreamGrid::zeros(scheme.stream_count(), params.q, 4);
        let x = scheme.encode(&ch, &params, &zero).unwrap();
        assert!(x.iter().flatten().all(|v| *v == Scalar::new(0.0, 0.0)));

        let mut grid = SubStreamGrid::zeros(scheme.stream_count(), params.q, 4);
        let s = scheme.stream_index(1, 0, 0);
        grid.set(s, 2, 1).unwrap();
        let x = scheme.encode(&ch, &params, &grid).unwrap();
        let nu = scheme.pseudo_vector_values(&ch).unwrap()[1][0];
        assert_eq!(x[0][2], nu * params.lambda);
        assert!(x[1].iter().all(|v| *v == Scalar::new(0.0, 0.0)));
        assert!(grid.set(s, 2, params.q).is_err());
    }

    #[test]
    fn tiny_constellation_counts() {
        let (scheme, ch) = tiny(11, ScalarField::Real);
        let params = scheme.params(&ch, 0.0, 8192.0, 1).unwrap();
        let coeffs = scheme
            .received_coefficients(&ch, params.q, 0, 0, 1 << 20)
            .unwrap();
        assert_eq!(coeffs.len(), 6);
        assert_eq!(coeffs.iter().filter(|c| c.favorite).count(), 2);
        assert_eq!(enumeration_size(&coeffs), 3 * 3 * 7 * 7 * 7 * 7);
        // the two interfering streams land on two of the four envelope slots
        let used: usize = coeffs
            .iter()
            .filter(|c| !c.favorite)
            .map(|c| c.members.len())
            .sum();
        assert_eq!(used, 2);
        let c = scheme
            .received_constellation(&ch, &params, 0, 0, 1 << 20)
            .unwrap();
        assert_eq!(c.len(), 21609);
        assert!(c.min_distance().unwrap() > 0.0);
    }

    #[test]
    fn unit_q_keeps_merged_range() {
        let (scheme, ch) = tiny(2, ScalarField::Real);
        let params = scheme.params(&ch, 0.05, 2.0, 1).unwrap();
        assert_eq!(params.q, 1);
        let c = scheme
            .received_constellation(&ch, &params, 1, 0, 100)
            .unwrap();
        // favorites are pinned to 0, merged symbols still span (−2, 2)
        assert_eq!(c.len(), 81);
        for &l in c.labels() {
            assert_eq!(&c.digits(l)[..2], &[0, 0]);
        }
    }

    #[test]
    fn size_cap_reported() {
        let (scheme, ch) = tiny(2, ScalarField::Real);
        let params = scheme.params(&ch, 0.0, 8192.0, 1).unwrap();
        let err = scheme
            .received_constellation(&ch, &params, 0, 0, 1000)
            .unwrap_err();
        assert!(err.is_infeasible());
    }

    #[test]
    fn encoded_power_within_budget() {
        let (scheme, ch) = tiny(9, ScalarField::Real);
        let params = scheme.params(&ch, 0.0, 8192.0, 10_000).unwrap();
        let mut rng = stream_rng(1, 99);
        let grid = SubStreamGrid::random(scheme.stream_count(), params.q, 10_000, &mut rng);
        let x = scheme.encode(&ch, &params, &grid).unwrap();
        for xt in &x {
            let p: f64 = xt.iter().map(|v| v.norm_sqr()).sum::<f64>() / xt.len() as f64;
            assert!(p <= 8192.0 / 2.0);
        }
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let (scheme, _) = tiny(1, ScalarField::Real);
        let other = sample_channel(&CompoundChannelConfig::new(
            3,
            vec![1, 1],
            ScalarField::Real,
            1,
        ))
        .unwrap();
        assert!(matches!(scheme.gamma(&other), Err(Error::Config(_))));
    }
}
