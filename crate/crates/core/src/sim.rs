//! Monte Carlo link simulation over AWGN.
//!
//! A trial draws uniform sub-stream symbols, sends them through the exact
//! linear channel with unit-variance noise, detects every symbol time at
//! every state of every receiver against that receiver-state's merged
//! constellation, and scores a favorite symbol as correct only when it is
//! recovered under every state of its receiver.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{check_outer_bounds, BoundReport};
use crate::channel::{
    sample_channel, ChannelRealization, CompoundChannelConfig, DEFAULT_MAGNITUDE_FLOOR,
};
use crate::codec::{encode_streams, validate_eps, SubStreamGrid, XScheme, DEFAULT_CODEWORD_LEN};
use crate::constellation::{AlignedConstellation, DEFAULT_CONSTELLATION_CAP};
use crate::dof::{self, RationalValue};
use crate::error::{Error, Result};
use crate::field::{Scalar, ScalarField};
use crate::hybrid::{hybrid_basis_size, hybrid_xi, HybridConfig, HybridScheme};
use crate::monomial::{basis_size, xi, Dims, DEFAULT_MONOMIAL_CAP};
use crate::rng::{derive_seed, stream_rng, trial_stream, RNG_ALGORITHM};

/// Rows with a symbol error rate above this are left out of slope fits.
pub const RELIABLE_SER: f64 = 1e-2;

fn default_floor() -> f64 {
    DEFAULT_MAGNITUDE_FLOOR
}

fn default_eps() -> f64 {
    crate::codec::DEFAULT_EPS
}

/// The X-channel alignment scheme on a compound channel.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct XInstance {
    #[serde(rename = "M")]
    pub antennas: usize,
    #[serde(rename = "J")]
    pub states: Vec<usize>,
    /// Exponent cap `n_r` per receiver.
    pub n: Vec<u32>,
    #[serde(default = "default_eps")]
    pub eps: f64,
    pub field: ScalarField,
    #[serde(default = "default_floor")]
    pub magnitude_floor: f64,
    /// Pins `Q` instead of deriving it from `P`.
    #[serde(default, rename = "Q")]
    pub q_override: Option<i64>,
}

/// The zero-forcing hybrid scheme (`K = M`, real channels).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HybridInstance {
    #[serde(rename = "M")]
    pub antennas: usize,
    #[serde(rename = "JM")]
    pub last_states: usize,
    pub n: u32,
    #[serde(default = "default_eps")]
    pub eps: f64,
    #[serde(default, rename = "Q")]
    pub q_override: Option<i64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "scheme", rename_all = "lowercase")]
pub enum SchemeInstance {
    X(XInstance),
    Hybrid(HybridInstance),
}

impl SchemeInstance {
    pub fn validate(&self) -> Result<()> {
        match self {
            SchemeInstance::X(x) => {
                let dims = Dims::new(x.antennas, x.states.clone())?;
                if x.n.len() != dims.receivers() || x.n.contains(&0) {
                    return Err(Error::Config(format!(
                        "need one exponent cap n ≥ 1 per receiver (got {:?} for K = {})",
                        x.n,
                        dims.receivers()
                    )));
                }
                if x.magnitude_floor.is_nan() || x.magnitude_floor <= 0.0 {
                    return Err(Error::Config("magnitude_floor must be positive".into()));
                }
                validate_eps(x.eps)?;
                check_pinned(x.q_override)
            }
            SchemeInstance::Hybrid(h) => {
                HybridConfig {
                    antennas: h.antennas,
                    last_states: h.last_states,
                    n: h.n,
                    seed: 0,
                }
                .validate()?;
                validate_eps(h.eps)?;
                check_pinned(h.q_override)
            }
        }
    }

    pub fn field(&self) -> ScalarField {
        match self {
            SchemeInstance::X(x) => x.field,
            SchemeInstance::Hybrid(_) => ScalarField::Real,
        }
    }

    pub fn antennas(&self) -> usize {
        match self {
            SchemeInstance::X(x) => x.antennas,
            SchemeInstance::Hybrid(h) => h.antennas,
        }
    }

    pub fn states(&self) -> Vec<usize> {
        match self {
            SchemeInstance::X(x) => x.states.clone(),
            SchemeInstance::Hybrid(h) => {
                let mut j = vec![1; h.antennas - 1];
                j.push(h.last_states);
                j
            }
        }
    }

    pub fn eps(&self) -> f64 {
        match self {
            SchemeInstance::X(x) => x.eps,
            SchemeInstance::Hybrid(h) => h.eps,
        }
    }

    /// `ξ`, from closed forms.
    pub fn xi(&self) -> Result<u128> {
        match self {
            SchemeInstance::X(x) => xi(&Dims::new(x.antennas, x.states.clone())?, &x.n),
            SchemeInstance::Hybrid(h) => hybrid_xi(h.antennas, h.last_states, h.n),
        }
    }

    /// Nominal per-receiver DoF at the configured `ε`.
    pub fn nominal_profile(&self) -> Result<Vec<num_rational::BigRational>> {
        let eps = dof::exact_decimal(self.eps())?;
        let xi = self.xi()?;
        match self {
            SchemeInstance::X(x) => {
                let dims = Dims::new(x.antennas, x.states.clone())?;
                let sizes = (0..dims.receivers())
                    .map(|r| basis_size(x.n[r], &dims, r))
                    .collect::<Result<Vec<_>>>()?;
                dof::x_scheme_profile(x.antennas, &sizes, xi, &eps)
            }
            SchemeInstance::Hybrid(h) => {
                let l = hybrid_basis_size(h.antennas, h.last_states, h.n)?;
                dof::hybrid_profile(h.antennas, l, xi, &eps)
            }
        }
    }

    pub fn nominal_dof(&self) -> Result<num_rational::BigRational> {
        Ok(self
            .nominal_profile()?
            .into_iter()
            .fold(num_rational::BigRational::from_integer(0.into()), |a, b| {
                a + b
            }))
    }

    /// The optimal DoF the scheme approaches.
    pub fn reference_dof(&self) -> Result<num_rational::BigRational> {
        match self {
            SchemeInstance::X(x) => Ok(dof::dof_reference(x.antennas, x.states.len())?.value.0),
            SchemeInstance::Hybrid(h) => dof::hybrid_reference(h.antennas),
        }
    }
}

fn check_pinned(q: Option<i64>) -> Result<()> {
    match q {
        Some(q) if q < 1 => Err(Error::Config(format!("pinned Q = {q} must be at least 1"))),
        _ => Ok(()),
    }
}

fn default_symbols() -> usize {
    DEFAULT_CODEWORD_LEN
}

fn default_cap() -> u128 {
    DEFAULT_CONSTELLATION_CAP
}

fn default_noise() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub instance: SchemeInstance,
    /// Transmit powers, linear scale.
    #[serde(rename = "P_grid")]
    pub powers: Vec<f64>,
    #[serde(rename = "trials_per_P")]
    pub trials_per_power: usize,
    #[serde(rename = "T", default = "default_symbols")]
    pub symbols_per_trial: usize,
    pub seed: u64,
    /// Reuse the channel drawn from `seed` in every trial instead of a
    /// fresh channel per trial index.
    #[serde(default)]
    pub fixed_channel: bool,
    #[serde(default = "default_cap")]
    pub constellation_cap: u128,
    /// Noise standard deviation; 1 is the channel model, 0 disables noise.
    #[serde(default = "default_noise")]
    pub noise_scale: f64,
}

impl SweepConfig {
    pub fn new(instance: SchemeInstance, powers: Vec<f64>, trials: usize, seed: u64) -> Self {
        Self {
            instance,
            powers,
            trials_per_power: trials,
            symbols_per_trial: DEFAULT_CODEWORD_LEN,
            seed,
            fixed_channel: false,
            constellation_cap: DEFAULT_CONSTELLATION_CAP,
            noise_scale: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.instance.validate()?;
        if self.powers.is_empty() {
            return Err(Error::Config("the power grid is empty".into()));
        }
        if self.powers.iter().any(|p| !(*p > 0.0 && p.is_finite())) {
            return Err(Error::Config("powers must be positive and finite".into()));
        }
        if self.powers.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config(
                "the power grid must be strictly increasing".into(),
            ));
        }
        if self.trials_per_power == 0 || self.symbols_per_trial == 0 {
            return Err(Error::Config(
                "trials and symbols per trial must be positive".into(),
            ));
        }
        if !(self.noise_scale >= 0.0 && self.noise_scale.is_finite()) {
            return Err(Error::Config(
                "noise_scale must be finite and non-negative".into(),
            ));
        }
        Ok(())
    }

    /// Channel seed used by trial `trial`, shared across power levels.
    pub fn channel_seed(&self, trial: usize) -> u64 {
        if self.fixed_channel {
            self.seed
        } else {
            derive_seed(self.seed, trial as u64)
        }
    }
}

/// One receiver state as seen by the detector.
#[derive(Clone, Debug)]
pub struct ReceiverState {
    pub receiver: usize,
    pub state: usize,
    pub h: Vec<Scalar>,
    pub constellation: AlignedConstellation,
    /// `(coefficient index, sub-stream)` of every favorite coefficient.
    pub favorites: Vec<(usize, usize)>,
}

/// Everything a trial needs at one power level on one channel.
#[derive(Clone, Debug)]
pub struct PreparedLink {
    pub field: ScalarField,
    pub q: i64,
    pub lambda: f64,
    pub weights: Vec<Vec<Scalar>>,
    pub stream_receiver: Vec<usize>,
    pub receivers: usize,
    pub states: Vec<ReceiverState>,
}

impl PreparedLink {
    /// Smallest λ-scaled minimum distance over every receiver state with at
    /// least two points.
    pub fn min_distance(&self) -> Result<Option<f64>> {
        let mut best: Option<f64> = None;
        for st in &self.states {
            if st.constellation.len() < 2 {
                continue;
            }
            let d = st.constellation.min_distance()?;
            best = Some(best.map_or(d, |b: f64| b.min(d)));
        }
        Ok(best)
    }

    pub fn favorite_streams(&self) -> usize {
        self.stream_receiver.len()
    }

    fn from_parts(
        field: ScalarField,
        q: i64,
        lambda: f64,
        weights: Vec<Vec<Scalar>>,
        stream_receiver: Vec<usize>,
        ch: &ChannelRealization,
        mut build: impl FnMut(usize, usize) -> Result<AlignedConstellation>,
    ) -> Result<Self> {
        let mut states = Vec::new();
        for r in 0..ch.receivers() {
            for s in 0..ch.states(r)? {
                let constellation = build(r, s)?;
                let favorites = constellation
                    .coefficients()
                    .iter()
                    .enumerate()
                    .filter(|(_, c)| c.favorite)
                    .map(|(i, c)| (i, c.members[0]))
                    .collect();
                states.push(ReceiverState {
                    receiver: r,
                    state: s,
                    h: ch.vector(r, s)?,
                    constellation,
                    favorites,
                });
            }
        }
        Ok(Self {
            field,
            q,
            lambda,
            weights,
            stream_receiver,
            receivers: ch.receivers(),
            states,
        })
    }
}

/// Samples the channel for `channel_seed` and prepares the link at `power`.
pub fn prepare_link(
    instance: &SchemeInstance,
    channel_seed: u64,
    power: f64,
    cap: u128,
) -> Result<PreparedLink> {
    instance.validate()?;
    match instance {
        SchemeInstance::X(x) => {
            let mut cfg =
                CompoundChannelConfig::new(x.antennas, x.states.clone(), x.field, channel_seed);
            cfg.magnitude_floor = x.magnitude_floor;
            let ch = sample_channel(&cfg)?;
            prepare_x(x, &ch, power, cap)
        }
        SchemeInstance::Hybrid(h) => {
            let cfg = HybridConfig {
                antennas: h.antennas,
                last_states: h.last_states,
                n: h.n,
                seed: channel_seed,
            };
            let (ch, scheme) = HybridScheme::from_config(&cfg, DEFAULT_MONOMIAL_CAP)?;
            prepare_hybrid(h, &ch, &scheme, power, cap)
        }
    }
}

/// Prepares the X scheme on a given channel.
pub fn prepare_x(
    x: &XInstance,
    ch: &ChannelRealization,
    power: f64,
    cap: u128,
) -> Result<PreparedLink> {
    let scheme = XScheme::new(Dims::from(ch.config()), &x.n, DEFAULT_MONOMIAL_CAP)?;
    let params = match x.q_override {
        Some(q) => scheme.params_with_q(ch, x.eps, power, 1, q)?,
        None => scheme.params(ch, x.eps, power, 1)?,
    };
    let stream_receiver = (0..scheme.stream_count())
        .map(|s| scheme.stream_receiver(s))
        .collect();
    PreparedLink::from_parts(
        ch.field(),
        params.q,
        params.lambda,
        scheme.transmit_weights(ch)?,
        stream_receiver,
        ch,
        |r, s| scheme.received_constellation(ch, &params, r, s, cap),
    )
}

/// Prepares the hybrid scheme on a given channel.
pub fn prepare_hybrid(
    h: &HybridInstance,
    ch: &ChannelRealization,
    scheme: &HybridScheme,
    power: f64,
    cap: u128,
) -> Result<PreparedLink> {
    let params = scheme.params(h.eps, power, 1, h.q_override)?;
    let stream_receiver = (0..scheme.stream_count())
        .map(|s| scheme.stream_receiver(s))
        .collect();
    PreparedLink::from_parts(
        ScalarField::Real,
        params.q,
        params.lambda,
        scheme.transmit_weights()?,
        stream_receiver,
        ch,
        |r, s| scheme.received_constellation(ch, &params, r, s, cap),
    )
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrialResult {
    pub q: i64,
    /// λ-scaled minimum distance over all receiver states.
    pub dmin: Option<f64>,
    /// Favorite symbols per receiver that failed under at least one state.
    pub errors: Vec<u64>,
    /// Favorite symbols sent per receiver.
    pub symbols: Vec<u64>,
    /// Per receiver state: constellation points detected wrongly.
    pub point_errors: Vec<u64>,
}

impl TrialResult {
    pub fn total_errors(&self) -> u64 {
        self.errors.iter().sum()
    }

    pub fn total_symbols(&self) -> u64 {
        self.symbols.iter().sum()
    }
}

/// One trial on a prepared link.
pub fn run_trial<R: Rng + ?Sized>(
    link: &PreparedLink,
    symbols_per_trial: usize,
    noise_scale: f64,
    rng: &mut R,
) -> Result<TrialResult> {
    let streams = link.weights.len();
    let grid = SubStreamGrid::random(streams, link.q, symbols_per_trial, rng);
    let x = encode_streams(&link.weights, link.lambda, &grid)?;
    // wrong[s][m]: sub-stream s was misdetected at some state at time m
    let mut wrong = vec![vec![false; symbols_per_trial]; streams];
    let mut point_errors = Vec::with_capacity(link.states.len());
    for st in &link.states {
        let mut misses = 0u64;
        for m in 0..symbols_per_trial {
            let mut y: Scalar = st.h.iter().zip(&x).map(|(h, xt)| h * xt[m]).sum();
            if noise_scale > 0.0 {
                y += link.field.standard_normal(rng) * noise_scale;
            }
            let label = st.constellation.detect(y)?;
            let digits = st.constellation.digits(label);
            let mut point_ok = true;
            for &(c, s) in &st.favorites {
                if digits[c] != grid.stream(s)[m] {
                    wrong[s][m] = true;
                    point_ok = false;
                }
            }
            if !point_ok {
                misses += 1;
            }
        }
        point_errors.push(misses);
    }
    let mut errors = vec![0u64; link.receivers];
    let mut symbols = vec![0u64; link.receivers];
    for (s, row) in wrong.iter().enumerate() {
        let r = link.stream_receiver[s];
        errors[r] += row.iter().filter(|&&w| w).count() as u64;
        symbols[r] += symbols_per_trial as u64;
    }
    Ok(TrialResult {
        q: link.q,
        dmin: link.min_distance()?,
        errors,
        symbols,
        point_errors,
    })
}

/// Gaussian tail `Q(d/2)`, the pairwise error bound at minimum distance `d`.
pub fn pe_bound(dmin: f64) -> f64 {
    0.5 * libm::erfc(dmin / (2.0 * std::f64::consts::SQRT_2))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimRow {
    #[serde(rename = "P")]
    pub power: f64,
    /// ½·log₂P (real) or log₂P (complex).
    pub scale: f64,
    #[serde(rename = "Q")]
    pub q: i64,
    /// Median λ-scaled minimum distance over trials.
    pub dmin: Option<f64>,
    pub ser: f64,
    /// Standard error of `ser`.
    pub ser_std_err: f64,
    /// Correctly detected favorite bits per channel use, trial average.
    pub bits_ok: f64,
    /// Mean over trials of `Q(d_min/2)`.
    pub pe_bound: f64,
    /// `ser <= pe_bound + 3 * ser_std_err`.
    pub within_pe_bound: bool,
    pub trials: usize,
    pub symbols: u64,
}

fn median(values: &mut [f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(f64::total_cmp);
    let n = values.len();
    Some(if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    })
}

/// Runs every trial at one power level. Trials run in parallel; results
/// are reduced in trial order.
pub fn run_point(config: &SweepConfig, power_index: usize, power: f64) -> Result<SimRow> {
    let fixed = if config.fixed_channel {
        Some(prepare_link(
            &config.instance,
            config.seed,
            power,
            config.constellation_cap,
        )?)
    } else {
        None
    };
    let results: Vec<Result<TrialResult>> = (0..config.trials_per_power)
        .into_par_iter()
        .map(|t| {
            let owned;
            let link = match &fixed {
                Some(link) => link,
                None => {
                    owned = prepare_link(
                        &config.instance,
                        config.channel_seed(t),
                        power,
                        config.constellation_cap,
                    )?;
                    &owned
                }
            };
            let mut rng = stream_rng(config.seed, trial_stream(power_index, t));
            run_trial(link, config.symbols_per_trial, config.noise_scale, &mut rng)
        })
        .collect();
    let results = results.into_iter().collect::<Result<Vec<_>>>()?;

    let q = results[0].q;
    let errors: u64 = results.iter().map(TrialResult::total_errors).sum();
    let symbols: u64 = results.iter().map(TrialResult::total_symbols).sum();
    let ser = errors as f64 / symbols as f64;
    let bits_per_symbol = ((2 * q - 1) as f64).log2();
    let t = config.symbols_per_trial as f64;
    let bits_ok = results
        .iter()
        .map(|r| (r.total_symbols() - r.total_errors()) as f64 / t * bits_per_symbol)
        .sum::<f64>()
        / results.len() as f64;
    let mut dmins: Vec<f64> = results.iter().filter_map(|r| r.dmin).collect();
    let pe = results
        .iter()
        .map(|r| r.dmin.map_or(0.0, pe_bound))
        .sum::<f64>()
        / results.len() as f64;
    let ser_std_err = (ser * (1.0 - ser) / symbols as f64).sqrt();
    Ok(SimRow {
        power,
        scale: config.instance.field().dof_scale(power),
        q,
        dmin: median(&mut dmins),
        ser,
        ser_std_err,
        bits_ok,
        pe_bound: pe,
        within_pe_bound: ser <= pe + 3.0 * ser_std_err,
        trials: results.len(),
        symbols,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DofFit {
    pub slope: f64,
    pub intercept: f64,
    pub points_used: usize,
    pub ser_threshold: f64,
}

/// Least-squares slope of `bits_ok` against the DoF scale over the rows
/// whose SER is at most [`RELIABLE_SER`].
pub fn estimate_dof(rows: &[SimRow]) -> Result<DofFit> {
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.ser <= RELIABLE_SER)
        .map(|r| (r.scale, r.bits_ok))
        .collect();
    if pts.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "{} reliable grid points (SER ≤ {RELIABLE_SER}); need at least 3",
            pts.len()
        )));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return Err(Error::InsufficientData(
            "all reliable points share one power".into(),
        ));
    }
    let slope = sxy / sxx;
    Ok(DofFit {
        slope,
        intercept: my - slope * mx,
        points_used: pts.len(),
        ser_threshold: RELIABLE_SER,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct SimReport {
    pub rng: &'static str,
    pub seed: u64,
    pub rows: Vec<SimRow>,
    pub fit: Option<DofFit>,
    /// Why no slope was fitted, when `fit` is absent.
    pub fit_error: Option<String>,
    pub fitted_dof: Option<f64>,
    pub nominal_dof: RationalValue,
    pub reference_dof: RationalValue,
    pub bound_report: BoundReport,
}

/// Runs the whole grid and fits the DoF slope.
pub fn run_sweep(config: &SweepConfig) -> Result<SimReport> {
    config.validate()?;
    if config.powers.len() < 3 {
        return Err(Error::Config(
            "a DoF sweep needs at least 3 power levels".into(),
        ));
    }
    let rows = config
        .powers
        .iter()
        .enumerate()
        .map(|(i, &p)| run_point(config, i, p))
        .collect::<Result<Vec<_>>>()?;
    summarize(config, rows)
}

/// Assembles a report from computed rows.
pub fn summarize(config: &SweepConfig, rows: Vec<SimRow>) -> Result<SimReport> {
    let (fit, fit_error) = match estimate_dof(&rows) {
        Ok(f) => (Some(f), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let profile: Vec<f64> = config
        .instance
        .nominal_profile()?
        .iter()
        .map(dof::rational_to_f64)
        .collect();
    let states = config.instance.states();
    let bound_report = check_outer_bounds(&profile, config.instance.antennas(), Some(&states))?;
    Ok(SimReport {
        rng: RNG_ALGORITHM,
        seed: config.seed,
        fitted_dof: fit.as_ref().map(|f| f.slope),
        fit,
        fit_error,
        rows,
        nominal_dof: RationalValue(config.instance.nominal_dof()?),
        reference_dof: RationalValue(config.instance.reference_dof()?),
        bound_report,
    })
}
