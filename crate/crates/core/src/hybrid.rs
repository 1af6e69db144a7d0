//! Zero-forcing combined with alignment, for `K = M` receivers where the
//! first `M − 1` have a single known state and the last has `J_M`.
//!
//! Receiver `r < M − 1` (zero-based) gets `M` precoder columns orthogonal to
//! every other zero-forced receiver, so it sees no interference. The last
//! receiver gets one column orthogonal to all of them and carries `L`
//! sub-streams on the powers `β, β², …, β^L` of a random base. Its
//! interference aligns because the pseudo-vectors of receiver `r` are
//! monomials in `g[r][i][s] = h_M^{s}·v_i^{[r]}`.
//!
//! Only real channels are supported.

use nalgebra::DMatrix;
use num_rational::BigRational;
use rand::Rng;
use serde::Serialize;

use crate::channel::{sample_channel, ChannelRealization, CompoundChannelConfig};
use crate::codec::{encode_streams, floor_q, validate_eps, SubStreamGrid};
use crate::constellation::{AlignedConstellation, CoefficientEntry};
use crate::dof;
use crate::error::{Error, Result};
use crate::field::{Scalar, ScalarField};
use crate::monomial::{Monomial, PseudoVectorBasis, SymbolId, SymbolTable};
use crate::rng::{stream_rng, PRECODER_STREAM};

/// Relative tolerance for the precoder orthogonality constraints.
pub const ORTHOGONALITY_TOLERANCE: f64 = 1e-9;

/// Range `β` is drawn from.
pub const BETA_RANGE: (f64, f64) = (1.1, 2.0);

const RANK_TOLERANCE: f64 = 1e-10;
const MAX_COLUMN_ATTEMPTS: usize = 1000;

/// Configuration of one hybrid instance.
#[derive(Clone, Debug, PartialEq, Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HybridConfig {
    #[serde(rename = "M")]
    pub antennas: usize,
    /// States `J_M` of the last receiver.
    #[serde(rename = "JM")]
    pub last_states: usize,
    pub n: u32,
    pub seed: u64,
}

impl HybridConfig {
    pub fn validate(&self) -> Result<()> {
        if self.antennas < 2 {
            return Err(Error::Config("the hybrid scheme needs M ≥ 2".into()));
        }
        if self.last_states == 0 || self.n == 0 {
            return Err(Error::Config("J_M and n must be at least 1".into()));
        }
        Ok(())
    }

    /// `J = [1, …, 1, J_M]` with `K = M`.
    pub fn states(&self) -> Vec<usize> {
        let mut j = vec![1; self.antennas - 1];
        j.push(self.last_states);
        j
    }

    pub fn channel_config(&self) -> CompoundChannelConfig {
        CompoundChannelConfig::new(self.antennas, self.states(), ScalarField::Real, self.seed)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Orthonormal basis of `span(vectors)` by modified Gram-Schmidt. Fails
/// when the vectors are linearly dependent.
pub fn orthonormal_span(vectors: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(vectors.len());
    for (k, v) in vectors.iter().enumerate() {
        let mut w = v.clone();
        for q in &basis {
            let c = dot(&w, q);
            w.iter_mut().zip(q).for_each(|(wi, qi)| *wi -= c * qi);
        }
        let nw = norm(&w);
        if nw <= RANK_TOLERANCE * norm(v).max(f64::MIN_POSITIVE) {
            return Err(Error::RankDeficient(format!(
                "channel vector {k} lies in the span of the previous ones"
            )));
        }
        w.iter_mut().for_each(|x| *x /= nw);
        basis.push(w);
    }
    Ok(basis)
}

/// Unit vector drawn uniformly from the orthogonal complement of the span
/// of the orthonormal `basis`.
pub fn random_unit_in_complement<R: Rng + ?Sized>(
    basis: &[Vec<f64>],
    dim: usize,
    rng: &mut R,
) -> Result<Vec<f64>> {
    if basis.len() >= dim {
        return Err(Error::RankDeficient(format!(
            "span of dimension {} leaves no complement in R^{dim}",
            basis.len()
        )));
    }
    for _ in 0..MAX_COLUMN_ATTEMPTS {
        let mut w: Vec<f64> = (0..dim)
            .map(|_| ScalarField::Real.standard_normal(rng).re)
            .collect();
        let n0 = norm(&w);
        // two passes keep the projection accurate to rounding
        for _ in 0..2 {
            for q in basis {
                let c = dot(&w, q);
                w.iter_mut().zip(q).for_each(|(wi, qi)| *wi -= c * qi);
            }
        }
        let nw = norm(&w);
        if nw > 1e-6 * n0 {
            w.iter_mut().for_each(|x| *x /= nw);
            return Ok(w);
        }
    }
    Err(Error::Sampling("could not draw a precoder column".into()))
}

/// Zero-forcing precoders.
#[derive(Clone, Debug, Serialize)]
pub struct PrecoderSet {
    /// `columns[r][i]` is `v_i^{[r]}` for zero-forced receiver `r`.
    pub columns: Vec<Vec<Vec<f64>>>,
    /// `v_M`, orthogonal to every zero-forced receiver.
    pub last: Vec<f64>,
    /// Largest singular value of each `V^{[r]}`.
    pub sigma_max: Vec<f64>,
    /// Numerical rank of each `V^{[r]}`.
    pub ranks: Vec<usize>,
}

fn real_vector(ch: &ChannelRealization, r: usize, s: usize) -> Result<Vec<f64>> {
    Ok(ch.vector(r, s)?.iter().map(|z| z.re).collect())
}

fn check_hybrid_channel(ch: &ChannelRealization) -> Result<()> {
    let m = ch.antennas();
    if ch.field() != ScalarField::Real {
        return Err(Error::Config(
            "the hybrid scheme is implemented for real channels only".into(),
        ));
    }
    if m < 2 || ch.receivers() != m {
        return Err(Error::Config(format!(
            "the hybrid scheme needs K = M ≥ 2 (got M = {m}, K = {})",
            ch.receivers()
        )));
    }
    if ch.config().states[..m - 1].iter().any(|&j| j != 1) {
        return Err(Error::Config(
            "receivers other than the last must have a single state".into(),
        ));
    }
    Ok(())
}

/// Draws `V^{[r]}` and `v_M` from the required orthogonal complements.
pub fn build_precoders<R: Rng + ?Sized>(
    ch: &ChannelRealization,
    rng: &mut R,
) -> Result<PrecoderSet> {
    check_hybrid_channel(ch)?;
    let m = ch.antennas();
    let zf: Vec<Vec<f64>> = (0..m - 1)
        .map(|r| real_vector(ch, r, 0))
        .collect::<Result<_>>()?;
    let mut columns = Vec::with_capacity(m - 1);
    let mut sigma_max = Vec::with_capacity(m - 1);
    let mut ranks = Vec::with_capacity(m - 1);
    for r in 0..m - 1 {
        let others: Vec<Vec<f64>> = zf
            .iter()
            .enumerate()
            .filter(|&(rh, _)| rh != r)
            .map(|(_, h)| h.clone())
            .collect();
        let span = orthonormal_span(&others)?;
        let v: Vec<Vec<f64>> = (0..m)
            .map(|_| random_unit_in_complement(&span, m, rng))
            .collect::<Result<_>>()?;
        let mat = DMatrix::from_fn(m, m, |row, col| v[col][row]);
        let sv = mat.singular_values();
        let smax = sv.max();
        sigma_max.push(smax);
        ranks.push(sv.iter().filter(|&&s| s > RANK_TOLERANCE * smax).count());
        columns.push(v);
    }
    let span = orthonormal_span(&zf)?;
    let last = random_unit_in_complement(&span, m, rng)?;
    Ok(PrecoderSet {
        columns,
        last,
        sigma_max,
        ranks,
    })
}

/// Largest `|h_r̂·v| / (‖h_r̂‖‖v‖)` over every constraint the precoders
/// must satisfy.
pub fn orthogonality_max_residual(ch: &ChannelRealization, pre: &PrecoderSet) -> Result<f64> {
    let m = ch.antennas();
    let mut worst: f64 = 0.0;
    for rh in 0..m - 1 {
        let h = real_vector(ch, rh, 0)?;
        let mut check = |v: &[f64]| {
            worst = worst.max(dot(&h, v).abs() / (norm(&h) * norm(v)));
        };
        for (r, cols) in pre.columns.iter().enumerate() {
            if r != rh {
                cols.iter().for_each(|v| check(v));
            }
        }
        check(&pre.last);
    }
    Ok(worst)
}

/// `g[r][i][s] = h_M^{s}·v_i^{[r]}`.
pub fn compute_g(ch: &ChannelRealization, pre: &PrecoderSet) -> Result<Vec<Vec<Vec<f64>>>> {
    let m = ch.antennas();
    let jm = ch.states(m - 1)?;
    let hm: Vec<Vec<f64>> = (0..jm)
        .map(|s| real_vector(ch, m - 1, s))
        .collect::<Result<_>>()?;
    Ok(pre
        .columns
        .iter()
        .map(|cols| {
            cols.iter()
                .map(|v| hm.iter().map(|h| dot(h, v)).collect())
                .collect()
        })
        .collect())
}

/// Parameters of a hybrid instance at one power level.
#[derive(Clone, Debug, Serialize)]
pub struct HybridParams {
    #[serde(rename = "M")]
    pub antennas: usize,
    #[serde(rename = "JM")]
    pub last_states: usize,
    pub n: u32,
    #[serde(rename = "L")]
    pub basis_size: u128,
    pub kappa: u128,
    pub xi: u128,
    pub beta: f64,
    pub eps: f64,
    #[serde(rename = "P")]
    pub power: f64,
    #[serde(rename = "Q")]
    pub q: i64,
    #[serde(rename = "Q_raw")]
    pub q_raw: f64,
    #[serde(rename = "Q_pinned")]
    pub q_pinned: bool,
    pub lambda: f64,
    #[serde(rename = "Gamma")]
    pub gamma: f64,
    pub sigma_max: Vec<f64>,
    #[serde(rename = "T")]
    pub codeword_len: usize,
}

impl HybridParams {
    pub fn eps_exact(&self) -> Result<BigRational> {
        dof::exact_decimal(self.eps)
    }

    /// `((M−1)·M·L + L)·(1 − ε)/(ξ + ε)`.
    pub fn nominal_dof(&self) -> Result<BigRational> {
        dof::hybrid_total(self.antennas, self.basis_size, self.xi, &self.eps_exact()?)
    }

    pub fn nominal_profile(&self) -> Result<Vec<BigRational>> {
        dof::hybrid_profile(self.antennas, self.basis_size, self.xi, &self.eps_exact()?)
    }

    /// Total power bound `λ²Γ²Q²`.
    pub fn power_bound(&self) -> f64 {
        (self.lambda * self.gamma * self.q as f64).powi(2)
    }
}

/// `L = n^{M·J_M}`.
pub fn hybrid_basis_size(antennas: usize, last_states: usize, n: u32) -> Result<u128> {
    (n as u128)
        .checked_pow((antennas * last_states) as u32)
        .ok_or(Error::SizeCap {
            what: "hybrid basis",
            required: u128::MAX,
            cap: u128::MAX,
        })
}

/// `κ = n^{M(J_M−1)}·(n+1)^M`.
pub fn hybrid_kappa(antennas: usize, last_states: usize, n: u32) -> Result<u128> {
    let m = antennas as u32;
    (n as u128)
        .checked_pow(m * (last_states as u32 - 1))
        .zip((n as u128 + 1).checked_pow(m))
        .and_then(|(a, b)| a.checked_mul(b))
        .ok_or(Error::SizeCap {
            what: "hybrid kappa",
            required: u128::MAX,
            cap: u128::MAX,
        })
}

/// `ξ = (M − 1)·κ + L`.
pub fn hybrid_xi(antennas: usize, last_states: usize, n: u32) -> Result<u128> {
    Ok(
        (antennas as u128 - 1) * hybrid_kappa(antennas, last_states, n)?
            + hybrid_basis_size(antennas, last_states, n)?,
    )
}

/// A hybrid instance: channel-dependent precoders, the `g` symbols, the
/// pseudo-vector bases and `β`.
#[derive(Clone, Debug)]
pub struct HybridScheme {
    pub precoders: PrecoderSet,
    pub beta: f64,
    bases: Vec<PseudoVectorBasis>,
    symbols: SymbolTable,
    antennas: usize,
    last_states: usize,
    n: u32,
}

impl HybridScheme {
    /// Samples the channel and the precoders of `config`.
    pub fn from_config(config: &HybridConfig, cap: u128) -> Result<(ChannelRealization, Self)> {
        config.validate()?;
        let ch = sample_channel(&config.channel_config())?;
        let scheme = Self::new(&ch, config.n, config.seed, cap)?;
        Ok((ch, scheme))
    }

    /// Builds the scheme on a given channel; precoders and `β` come from
    /// the precoder stream of `seed`.
    pub fn new(ch: &ChannelRealization, n: u32, seed: u64, cap: u128) -> Result<Self> {
        let mut rng = stream_rng(seed, PRECODER_STREAM);
        let precoders = build_precoders(ch, &mut rng)?;
        let beta = rng.random_range(BETA_RANGE.0..BETA_RANGE.1);
        Self::with_parts(ch, n, precoders, beta, cap)
    }

    pub fn with_parts(
        ch: &ChannelRealization,
        n: u32,
        precoders: PrecoderSet,
        beta: f64,
        cap: u128,
    ) -> Result<Self> {
        check_hybrid_channel(ch)?;
        if n == 0 {
            return Err(Error::Config("exponent cap n must be at least 1".into()));
        }
        let m = ch.antennas();
        let jm = ch.states(m - 1)?;
        let g = compute_g(ch, &precoders)?;
        let mut symbols = SymbolTable::new();
        symbols.insert(SymbolId::HybridBeta, Scalar::new(beta, 0.0));
        for (r, cols) in g.iter().enumerate() {
            let h = real_vector(ch, r, 0)?;
            for (i, gs) in cols.iter().enumerate() {
                for (s, &v) in gs.iter().enumerate() {
                    symbols.insert(SymbolId::g(r, i, s), Scalar::new(v, 0.0));
                }
                let hv = dot(&h, &precoders.columns[r][i]);
                symbols.insert(SymbolId::hv(r, i), Scalar::new(hv, 0.0));
            }
        }
        for s in 0..jm {
            let h = real_vector(ch, m - 1, s)?;
            symbols.insert(SymbolId::mv(s), Scalar::new(dot(&h, &precoders.last), 0.0));
        }
        let bases = (0..m - 1)
            .map(|r| {
                let mut syms: Vec<SymbolId> = (0..m)
                    .flat_map(|i| (0..jm).map(move |s| SymbolId::g(r, i, s)))
                    .collect();
                syms.sort();
                PseudoVectorBasis::product(r, syms, n, cap)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            precoders,
            beta,
            bases,
            symbols,
            antennas: m,
            last_states: jm,
            n,
        })
    }

    pub fn antennas(&self) -> usize {
        self.antennas
    }

    pub fn last_states(&self) -> usize {
        self.last_states
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn bases(&self) -> &[PseudoVectorBasis] {
        &self.bases
    }

    pub fn symbols(&self) -> &SymbolTable {
        &self.symbols
    }

    pub fn basis_size(&self) -> usize {
        self.bases[0].len()
    }

    pub fn kappa(&self) -> Result<u128> {
        hybrid_kappa(self.antennas, self.last_states, self.n)
    }

    pub fn xi(&self) -> Result<u128> {
        hybrid_xi(self.antennas, self.last_states, self.n)
    }

    /// `(M − 1)·M·L + L` sub-streams: receiver `r`, column `i`, layer `l`
    /// first, then the last receiver's `L` layers.
    pub fn stream_count(&self) -> usize {
        (self.antennas * (self.antennas - 1) + 1) * self.basis_size()
    }

    pub fn stream_index(&self, r: usize, i: usize, l: usize) -> usize {
        (r * self.antennas + i) * self.basis_size() + l
    }

    pub fn last_stream_index(&self, l: usize) -> usize {
        (self.antennas - 1) * self.antennas * self.basis_size() + l
    }

    /// Receiver a sub-stream is meant for.
    pub fn stream_receiver(&self, s: usize) -> usize {
        (s / (self.antennas * self.basis_size())).min(self.antennas - 1)
    }

    /// `ν_r^{(l)}` as numbers, indexed `[r][l]`.
    pub fn pseudo_vector_values(&self) -> Result<Vec<Vec<f64>>> {
        self.bases
            .iter()
            .map(|b| {
                b.elements
                    .iter()
                    .map(|m| m.evaluate(&self.symbols).map(|v| v.re))
                    .collect()
            })
            .collect()
    }

    fn beta_monomial(l: usize) -> Monomial {
        Monomial::symbol(SymbolId::HybridBeta, l as u32 + 1)
    }

    /// `Γ² = Σ_r σ_max²(V^{[r]})·Σ_i Σ_l ν² + ‖v_M‖²·Σ_l β^{2l}`.
    pub fn gamma(&self) -> Result<f64> {
        let nu = self.pseudo_vector_values()?;
        let mut g2 = 0.0;
        for (r, values) in nu.iter().enumerate() {
            let s = self.precoders.sigma_max[r];
            g2 += s * s * self.antennas as f64 * values.iter().map(|v| v * v).sum::<f64>();
        }
        let vm = norm(&self.precoders.last);
        g2 += vm
            * vm
            * (1..=self.basis_size())
                .map(|l| self.beta.powi(2 * l as i32))
                .sum::<f64>();
        if !(g2 > 0.0 && g2.is_finite()) {
            return Err(Error::NumericCollision(format!(
                "pseudo-vector energy Γ² = {g2} is not usable"
            )));
        }
        Ok(g2.sqrt())
    }

    /// Parameters at power `P`; `Q = ⌊P^{(1−ε)/(2(ξ+ε))}⌋` unless pinned.
    pub fn params(
        &self,
        eps: f64,
        power: f64,
        codeword_len: usize,
        pinned_q: Option<i64>,
    ) -> Result<HybridParams> {
        validate_eps(eps)?;
        if !(power > 0.0 && power.is_finite()) {
            return Err(Error::Config(format!(
                "power P = {power} must be positive and finite"
            )));
        }
        if codeword_len == 0 {
            return Err(Error::Config("codeword length T must be at least 1".into()));
        }
        let xi = self.xi()?;
        let raw = power.powf((1.0 - eps) / (2.0 * (xi as f64 + eps)));
        let q = match pinned_q {
            Some(q) if q >= 1 => q,
            Some(q) => return Err(Error::Config(format!("pinned Q = {q} must be at least 1"))),
            None => floor_q(raw)?,
        };
        let gamma = self.gamma()?;
        Ok(HybridParams {
            antennas: self.antennas,
            last_states: self.last_states,
            n: self.n,
            basis_size: self.basis_size() as u128,
            kappa: self.kappa()?,
            xi,
            beta: self.beta,
            eps,
            power,
            q,
            q_raw: raw,
            q_pinned: pinned_q.is_some(),
            lambda: power.sqrt() / (gamma * q as f64),
            gamma,
            sigma_max: self.precoders.sigma_max.clone(),
            codeword_len,
        })
    }

    /// Transmit vector of every sub-stream: `ν_r^{(l)}·v_i^{[r]}` and
    /// `β^l·v_M`.
    pub fn transmit_weights(&self) -> Result<Vec<Vec<Scalar>>> {
        let nu = self.pseudo_vector_values()?;
        let mut out = Vec::with_capacity(self.stream_count());
        for (r, values) in nu.iter().enumerate() {
            for v in &self.precoders.columns[r] {
                for &nl in values {
                    out.push(v.iter().map(|&x| Scalar::new(x * nl, 0.0)).collect());
                }
            }
        }
        for l in 1..=self.basis_size() {
            let b = self.beta.powi(l as i32);
            out.push(
                self.precoders
                    .last
                    .iter()
                    .map(|&x| Scalar::new(x * b, 0.0))
                    .collect(),
            );
        }
        Ok(out)
    }

    /// Transmit vectors `x[t][m]`.
    pub fn encode(&self, params: &HybridParams, grid: &SubStreamGrid) -> Result<Vec<Vec<Scalar>>> {
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
        encode_streams(&self.transmit_weights()?, params.lambda, grid)
    }

    /// Coefficients seen at receiver `r` in state `state`. Zero-forced
    /// receivers see only their own `M·L` favorites; the last receiver sees
    /// its `L` favorites and the alignment envelope of every other basis.
    pub fn received_coefficients(
        &self,
        ch: &ChannelRealization,
        q: i64,
        r: usize,
        state: usize,
        cap: u128,
    ) -> Result<Vec<CoefficientEntry>> {
        let m = self.antennas;
        let states = ch.states(r)?;
        if state >= states {
            return Err(Error::IndexOutOfRange {
                what: "state",
                index: state,
                limit: states,
            });
        }
        let h = real_vector(ch, r, state)?;
        let weights = self.transmit_weights()?;
        let gain = |s: usize| -> Scalar {
            Scalar::new(
                dot(&h, &weights[s].iter().map(|z| z.re).collect::<Vec<_>>()),
                0.0,
            )
        };
        let mut out = Vec::new();
        if r < m - 1 {
            for i in 0..m {
                for (l, mono) in self.bases[r].elements.iter().enumerate() {
                    let s = self.stream_index(r, i, l);
                    out.push(CoefficientEntry {
                        monomial: mono.times(SymbolId::hv(r, i)),
                        value: gain(s),
                        half_width: q,
                        members: vec![s],
                        favorite: true,
                    });
                }
            }
            return Ok(out);
        }
        for l in 0..self.basis_size() {
            let s = self.last_stream_index(l);
            out.push(CoefficientEntry {
                monomial: Self::beta_monomial(l).times(SymbolId::mv(state)),
                value: gain(s),
                half_width: q,
                members: vec![s],
                favorite: true,
            });
        }
        for (rh, basis) in self.bases.iter().enumerate() {
            let shifts: Vec<SymbolId> = (0..m).map(|i| SymbolId::g(rh, i, state)).collect();
            let envelope = basis.alignment_envelope(&shifts, cap)?;
            let start = out.len();
            let mut position = std::collections::HashMap::with_capacity(envelope.len());
            for (k, mono) in envelope.into_iter().enumerate() {
                position.insert(mono.clone(), start + k);
                out.push(CoefficientEntry {
                    value: mono.evaluate(&self.symbols)?,
                    monomial: mono,
                    half_width: m as i64 * q,
                    members: Vec::new(),
                    favorite: false,
                });
            }
            for (i, &shift) in shifts.iter().enumerate() {
                for (l, mono) in basis.elements.iter().enumerate() {
                    let s = self.stream_index(rh, i, l);
                    let entry = &mut out[position[&mono.times(shift)]];
                    if entry.members.is_empty() {
                        entry.value = gain(s);
                    }
                    entry.members.push(s);
                }
            }
        }
        Ok(out)
    }

    pub fn received_constellation(
        &self,
        ch: &ChannelRealization,
        params: &HybridParams,
        r: usize,
        state: usize,
        cap: u128,
    ) -> Result<AlignedConstellation> {
        let coefficients = self.received_coefficients(ch, params.q, r, state, cap)?;
        AlignedConstellation::build(
            r,
            state,
            ScalarField::Real,
            params.lambda,
            coefficients,
            cap,
        )
    }

    /// Compares the noiseless signal at zero-forced receiver `r` with the
    /// interference-free expression `λ Σ_i Σ_l (h_r·v_i^{[r]})·ν·u`.
    pub fn receiver_clean_check(
        &self,
        ch: &ChannelRealization,
        params: &HybridParams,
        r: usize,
        grid: &SubStreamGrid,
    ) -> Result<CleanCheck> {
        if r + 1 >= self.antennas {
            return Err(Error::Config(format!(
                "receiver {r} is not zero-forced (only receivers below {} are)",
                self.antennas - 1
            )));
        }
        let x = self.encode(params, grid)?;
        let h = real_vector(ch, r, 0)?;
        let nu = self.pseudo_vector_values()?;
        let hv: Vec<f64> = self.precoders.columns[r]
            .iter()
            .map(|v| dot(&h, v))
            .collect();
        let mut max_residual: f64 = 0.0;
        let mut max_signal: f64 = 0.0;
        let mut max_tx: f64 = 0.0;
        for m in 0..grid.len() {
            let y: f64 = (0..self.antennas).map(|t| h[t] * x[t][m].re).sum();
            let mut expected = 0.0;
            for (i, &g) in hv.iter().enumerate() {
                for (l, &v) in nu[r].iter().enumerate() {
                    expected += g * v * grid.stream(self.stream_index(r, i, l))[m] as f64;
                }
            }
            expected *= params.lambda;
            max_residual = max_residual.max((y - expected).abs());
            max_signal = max_signal.max(y.abs());
            let tx: f64 = (0..self.antennas)
                .map(|t| x[t][m].norm_sqr())
                .sum::<f64>()
                .sqrt();
            max_tx = max_tx.max(tx);
        }
        let scale = norm(&h) * max_tx;
        Ok(CleanCheck {
            receiver: r,
            max_residual,
            relative_residual: if scale > 0.0 {
                max_residual / scale
            } else {
                0.0
            },
            max_signal,
        })
    }
}

/// Outcome of [`HybridScheme::receiver_clean_check`]. The relative
/// residual is measured against `‖h_r‖·max_m ‖x[m]‖`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CleanCheck {
    pub receiver: usize,
    pub max_residual: f64,
    pub relative_residual: f64,
    pub max_signal: f64,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::monomial::{scale, union_size, MonomialSet};

    fn instance(m: usize, jm: usize, n: u32, seed: u64) -> (ChannelRealization, HybridScheme) {
        let cfg = HybridConfig {
            antennas: m,
            last_states: jm,
            n,
            seed,
        };
        HybridScheme::from_config(&cfg, 1 << 22).unwrap()
    }

    fn manual_channel(m: usize, h: Vec<Vec<Vec<f64>>>) -> ChannelRealization {
        let states = h.iter().map(|r| r[0].len()).collect();
        let cfg = CompoundChannelConfig::new(m, states, ScalarField::Real, 0);
        let h = h
            .into_iter()
            .map(|r| {
                r.into_iter()
                    .map(|t| t.into_iter().map(|v| Scalar::new(v, 0.0)).collect())
                    .collect()
            })
            .collect();
        ChannelRealization::from_parts(cfg, h).unwrap()
    }

    #[test]
    fn closed_forms() {
        assert_eq!(hybrid_basis_size(2, 2, 2).unwrap(), 16);
        assert_eq!(hybrid_kappa(2, 2, 2).unwrap(), 36);
        assert_eq!(hybrid_xi(2, 2, 2).unwrap(), 52);
        assert_eq!(hybrid_kappa(2, 2, 1).unwrap(), 4);
        assert_eq!(hybrid_xi(3, 3, 1).unwrap(), 2 * 8 + 1);
    }

    #[test]
    fn last_precoder_axis_aligned() {
        // h_1 = (1, 0) forces v_M ∝ (0, 1)
        let ch = manual_channel(
            2,
            vec![
                vec![vec![1.0], vec![0.0]],
                vec![vec![0.3, 0.7], vec![-0.4, 1.2]],
            ],
        );
        let mut rng = stream_rng(3, PRECODER_STREAM);
        let pre = build_precoders(&ch, &mut rng).unwrap();
        assert!(pre.last[0].abs() < 1e-15);
        assert!((pre.last[1].abs() - 1.0).abs() < 1e-15);
        // the only zero-forced receiver has nothing to avoid
        assert_eq!(pre.columns[0].len(), 2);
        for v in &pre.columns[0] {
            assert!((norm(v) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn orthogonality_holds() {
        for m in 2..=4 {
            let (ch, scheme) = instance(m, m, 1, 17 + m as u64);
            let res = orthogonality_max_residual(&ch, &scheme.precoders).unwrap();
            assert!(res < ORTHOGONALITY_TOLERANCE, "M={m}: {res}");
            if m >= 3 {
                // columns are confined to a plane
                assert!(scheme.precoders.ranks.iter().all(|&k| k == 2));
            }
        }
    }

    #[test]
    fn dependent_channels_rejected() {
        let ch = manual_channel(
            3,
            vec![
                vec![vec![1.0], vec![2.0], vec![3.0]],
                vec![vec![2.0], vec![4.0], vec![6.0]],
                vec![
                    vec![0.1, 0.2, 0.3],
                    vec![0.5, 0.6, 0.7],
                    vec![0.9, 1.1, 1.3],
                ],
            ],
        );
        let mut rng = stream_rng(0, PRECODER_STREAM);
        assert!(matches!(
            build_precoders(&ch, &mut rng),
            Err(Error::RankDeficient(_))
        ));
    }

    #[test]
    fn g_is_inner_product() {
        let ch = manual_channel(
            2,
            vec![
                vec![vec![1.0], vec![0.0]],
                vec![vec![1.0, 0.5], vec![1.0, -2.0]],
            ],
        );
        let pre = PrecoderSet {
            columns: vec![vec![vec![0.0, 1.0], vec![1.0, 0.0]]],
            last: vec![0.0, 1.0],
            sigma_max: vec![1.0],
            ranks: vec![2],
        };
        let g = compute_g(&ch, &pre).unwrap();
        assert_eq!(g[0][0], vec![1.0, -2.0]);
        assert_eq!(g[0][1], vec![1.0, 0.5]);
    }

    #[test]
    fn bases_and_unions() {
        let (_, scheme) = instance(2, 2, 2, 5);
        assert_eq!(scheme.basis_size(), 16);
        for s in 0..2 {
            let sets: Vec<MonomialSet> = (0..2)
                .map(|i| scale(&scheme.bases()[0].elements, SymbolId::g(0, i, s)))
                .collect();
            let union = union_size(&sets);
            // exact union n^{M(J−1)}(n^M + M n^{M−1} − 1) sits inside κ
            assert_eq!(union, 4 * (4 + 4 - 1));
            assert!(union as u128 <= scheme.kappa().unwrap());
        }
    }

    #[test]
    fn receiver_m_counts_and_round_trip() {
        let (ch, scheme) = instance(2, 2, 1, 8);
        let params = scheme.params(0.0, 1e6, 1, Some(2)).unwrap();
        for s in 0..2 {
            let coeffs = scheme.received_coefficients(&ch, 2, 1, s, 1 << 20).unwrap();
            assert_eq!(coeffs.len(), 5);
            let c = scheme
                .received_constellation(&ch, &params, 1, s, 1 << 20)
                .unwrap();
            assert_eq!(c.len(), 3 * 7usize.pow(4));
            assert!(c.min_distance().unwrap() > 0.0);
            assert_eq!(c.round_trip_failures(), 0);
        }
        let own = scheme.received_coefficients(&ch, 2, 0, 0, 1 << 20).unwrap();
        assert_eq!(own.len(), 2);
        assert!(own.iter().all(|c| c.favorite));
    }

    #[test]
    fn encoding_branches() {
        let (ch, scheme) = instance(2, 2, 1, 4);
        let params = scheme.params(0.05, 1e4, 8, None).unwrap();
        let streams = scheme.stream_count();
        let zero = SubStreamGrid::zeros(streams, params.q, 8);
        assert!(scheme
            .encode(&params, &zero)
            .unwrap()
            .iter()
            .flatten()
            .all(|v| v.norm() == 0.0));
        let mut grid = SubStreamGrid::zeros(streams, params.q, 8);
        grid.set(scheme.last_stream_index(0), 0, 1).unwrap();
        let x = scheme.encode(&params, &grid).unwrap();
        // parallel to v_M
        let cross = x[0][0].re * scheme.precoders.last[1] - x[1][0].re * scheme.precoders.last[0];
        assert!(cross.abs() < 1e-12 * x[0][0].norm().max(x[1][0].norm()));
        let clean = scheme.receiver_clean_check(&ch, &params, 0, &grid).unwrap();
        assert!(clean.relative_residual < 1e-9);
        assert!(clean.max_signal < 1e-9 * params.lambda);
    }

    #[test]
    fn complex_channels_rejected() {
        let cfg = CompoundChannelConfig::new(2, vec![1, 2], ScalarField::Complex, 1);
        let ch = sample_channel(&cfg).unwrap();
        assert!(matches!(
            HybridScheme::new(&ch, 1, 1, 1 << 20),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn params_respect_power() {
        let (_, scheme) = instance(3, 3, 1, 2);
        let params = scheme.params(0.05, 1e8, 1, None).unwrap();
        assert!(params.power_bound() <= 1e8 * (1.0 + 1e-9));
        assert_eq!(params.xi, 2 * 8 + 1);
    }
}
