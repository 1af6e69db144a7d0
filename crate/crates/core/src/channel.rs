//! Finite-state compound channel instances.
//!
//! Receiver `r` observes `y = Σ_t h[r][t][s]·x_t + z` where the state `s`
//! ranges over `J[r]` possibilities that the transmitter must all serve.
//! Indices are zero-based throughout the crate and in channel files.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Scalar, ScalarField, ScalarRepr};
use crate::rng::{self, RNG_ALGORITHM};

pub const DEFAULT_MAGNITUDE_FLOOR: f64 = 1e-3;
const MAX_SAMPLING_ATTEMPTS: u64 = 1_000_000;

fn default_floor() -> f64 {
    DEFAULT_MAGNITUDE_FLOOR
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompoundChannelConfig {
    /// Transmit antennas `M`.
    #[serde(rename = "M")]
    pub antennas: usize,
    /// Receivers `K`.
    #[serde(rename = "K")]
    pub receivers: usize,
    /// States per receiver `J[r]`.
    #[serde(rename = "J")]
    pub states: Vec<usize>,
    pub field: ScalarField,
    pub seed: u64,
    #[serde(default = "default_floor")]
    pub magnitude_floor: f64,
}

impl CompoundChannelConfig {
    pub fn new(antennas: usize, states: Vec<usize>, field: ScalarField, seed: u64) -> Self {
        Self {
            antennas,
            receivers: states.len(),
            states,
            field,
            seed,
            magnitude_floor: DEFAULT_MAGNITUDE_FLOOR,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.antennas == 0 {
            return Err(Error::Config("M must be at least 1".into()));
        }
        if self.receivers == 0 {
            return Err(Error::Config("K must be at least 1".into()));
        }
        if self.states.len() != self.receivers {
            return Err(Error::Config(format!(
                "J has {} entries but K = {}",
                self.states.len(),
                self.receivers
            )));
        }
        if let Some(r) = self.states.iter().position(|&j| j == 0) {
            return Err(Error::Config(format!("J[{r}] must be at least 1")));
        }
        if !(self.magnitude_floor > 0.0 && self.magnitude_floor.is_finite()) {
            return Err(Error::Config("magnitude_floor must be positive".into()));
        }
        Ok(())
    }

    pub fn total_states(&self) -> usize {
        self.states.iter().sum()
    }

    pub fn coefficient_count(&self) -> usize {
        self.antennas * self.total_states()
    }
}

/// Position of one coefficient `h[receiver][antenna][state]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CoeffIndex {
    pub receiver: usize,
    pub antenna: usize,
    pub state: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChannelRealization {
    config: CompoundChannelConfig,
    h: Vec<Vec<Vec<Scalar>>>,
}

impl ChannelRealization {
    /// Wraps explicit coefficients. Only the shape and field are checked;
    /// genericity is a separate diagnostic ([`validate_genericity`]).
    pub fn from_parts(config: CompoundChannelConfig, h: Vec<Vec<Vec<Scalar>>>) -> Result<Self> {
        config.validate()?;
        if h.len() != config.receivers {
            return Err(Error::Config(format!(
                "h has {} receivers, expected {}",
                h.len(),
                config.receivers
            )));
        }
        for (r, row) in h.iter().enumerate() {
            if row.len() != config.antennas {
                return Err(Error::Config(format!(
                    "h[{r}] has {} antennas, expected {}",
                    row.len(),
                    config.antennas
                )));
            }
            for (t, states) in row.iter().enumerate() {
                if states.len() != config.states[r] {
                    return Err(Error::Config(format!(
                        "h[{r}][{t}] has {} states, expected {}",
                        states.len(),
                        config.states[r]
                    )));
                }
                if config.field.is_real() && states.iter().any(|z| z.im != 0.0) {
                    return Err(Error::Config(format!(
                        "h[{r}][{t}] has complex entries in a real channel"
                    )));
                }
                if states
                    .iter()
                    .any(|z| !z.re.is_finite() || !z.im.is_finite())
                {
                    return Err(Error::Config(format!("h[{r}][{t}] has non-finite entries")));
                }
            }
        }
        Ok(Self { config, h })
    }

    pub fn config(&self) -> &CompoundChannelConfig {
        &self.config
    }

    pub fn field(&self) -> ScalarField {
        self.config.field
    }

    pub fn antennas(&self) -> usize {
        self.config.antennas
    }

    pub fn receivers(&self) -> usize {
        self.config.receivers
    }

    pub fn states(&self, receiver: usize) -> Result<usize> {
        self.config
            .states
            .get(receiver)
            .copied()
            .ok_or(Error::IndexOutOfRange {
                what: "receiver",
                index: receiver,
                limit: self.config.receivers,
            })
    }

    pub fn coeff(&self, receiver: usize, antenna: usize, state: usize) -> Result<Scalar> {
        let row = self.h.get(receiver).ok_or(Error::IndexOutOfRange {
            what: "receiver",
            index: receiver,
            limit: self.config.receivers,
        })?;
        let states = row.get(antenna).ok_or(Error::IndexOutOfRange {
            what: "antenna",
            index: antenna,
            limit: self.config.antennas,
        })?;
        states.get(state).copied().ok_or(Error::IndexOutOfRange {
            what: "state",
            index: state,
            limit: states.len(),
        })
    }

    /// Channel vector `h_r^{s}` across antennas.
    pub fn vector(&self, receiver: usize, state: usize) -> Result<Vec<Scalar>> {
        (0..self.config.antennas)
            .map(|t| self.coeff(receiver, t, state))
            .collect()
    }

    /// All coefficients with their positions, in `[r][t][s]` order.
    pub fn entries(&self) -> impl Iterator<Item = (CoeffIndex, Scalar)> + '_ {
        self.h.iter().enumerate().flat_map(|(r, row)| {
            row.iter().enumerate().flat_map(move |(t, states)| {
                states.iter().enumerate().map(move |(s, &v)| {
                    (
                        CoeffIndex {
                            receiver: r,
                            antenna: t,
                            state: s,
                        },
                        v,
                    )
                })
            })
        })
    }

    pub fn to_file(&self) -> ChannelFile {
        let field = self.config.field;
        ChannelFile {
            meta: None,
            rng_algorithm: RNG_ALGORITHM.to_string(),
            config: self.config.clone(),
            h: self
                .h
                .iter()
                .map(|row| {
                    row.iter()
                        .map(|st| st.iter().map(|&z| ScalarRepr::encode(z, field)).collect())
                        .collect()
                })
                .collect(),
        }
    }

    pub fn from_file(file: ChannelFile) -> Result<Self> {
        let field = file.config.field;
        let mut h = Vec::with_capacity(file.h.len());
        for row in file.h {
            let mut antennas = Vec::with_capacity(row.len());
            for states in row {
                let mut values = Vec::with_capacity(states.len());
                for repr in states {
                    if field.is_real() && matches!(repr, ScalarRepr::Complex(_)) {
                        return Err(Error::ChannelFile(
                            "complex entry in a real-field channel".into(),
                        ));
                    }
                    values.push(repr.decode());
                }
                antennas.push(values);
            }
            h.push(antennas);
        }
        Self::from_parts(file.config, h).map_err(|e| Error::ChannelFile(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("channel serialization")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ChannelFile =
            serde_json::from_str(text).map_err(|e| Error::ChannelFile(e.to_string()))?;
        Self::from_file(file)
    }
}

/// On-disk channel layout: `{config, h, rng_algorithm}` with `h` nested as
/// `[receiver][antenna][state]`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelFile {
    /// Free-form provenance written by front ends; ignored on load.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meta: Option<serde_json::Value>,
    #[serde(default)]
    pub rng_algorithm: String,
    pub config: CompoundChannelConfig,
    pub h: Vec<Vec<Vec<ScalarRepr>>>,
}

/// Draws every coefficient i.i.d. from N(0,1) or CN(0,1), redrawing values
/// below the magnitude floor or equal to an earlier coefficient.
pub fn sample_channel(config: &CompoundChannelConfig) -> Result<ChannelRealization> {
    config.validate()?;
    let mut rng = rng::stream_rng(config.seed, rng::CHANNEL_STREAM);
    sample_with(config, &mut rng)
}

pub(crate) fn sample_with<R: Rng + ?Sized>(
    config: &CompoundChannelConfig,
    rng: &mut R,
) -> Result<ChannelRealization> {
    let mut attempts = 0u64;
    let mut seen: Vec<Scalar> = Vec::with_capacity(config.coefficient_count());
    let mut h = Vec::with_capacity(config.receivers);
    for r in 0..config.receivers {
        let mut row = Vec::with_capacity(config.antennas);
        for _ in 0..config.antennas {
            let mut states = Vec::with_capacity(config.states[r]);
            for _ in 0..config.states[r] {
                let value = loop {
                    attempts += 1;
                    if attempts > MAX_SAMPLING_ATTEMPTS {
                        return Err(Error::Sampling(format!(
                            "no admissible draw within {MAX_SAMPLING_ATTEMPTS} attempts \
                             (magnitude_floor = {})",
                            config.magnitude_floor
                        )));
                    }
                    let z = config.field.standard_normal(rng);
                    if z.norm() >= config.magnitude_floor && !seen.contains(&z) {
                        break z;
                    }
                };
                seen.push(value);
                states.push(value);
            }
            row.push(states);
        }
        h.push(row);
    }
    ChannelRealization::from_parts(config.clone(), h)
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct GenericityReport {
    /// Coefficient pairs closer than the tolerance, with their distance.
    pub close_pairs: Vec<(CoeffIndex, CoeffIndex, f64)>,
    /// Coefficients whose magnitude is below the configured floor.
    pub small_magnitudes: Vec<(CoeffIndex, f64)>,
}

impl GenericityReport {
    pub fn is_generic(&self) -> bool {
        self.close_pairs.is_empty() && self.small_magnitudes.is_empty()
    }
}

pub fn validate_genericity(ch: &ChannelRealization, tol: f64) -> GenericityReport {
    let entries: Vec<_> = ch.entries().collect();
    let mut report = GenericityReport::default();
    for (i, &(a, va)) in entries.iter().enumerate() {
        if va.norm() < ch.config.magnitude_floor {
            report.small_magnitudes.push((a, va.norm()));
        }
        for &(b, vb) in &entries[i + 1..] {
            let d = (va - vb).norm();
            if d < tol {
                report.close_pairs.push((a, b, d));
            }
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(m: usize, j: Vec<usize>, seed: u64) -> CompoundChannelConfig {
        CompoundChannelConfig::new(m, j, ScalarField::Real, seed)
    }

    #[test]
    fn shape_follows_config() {
        let ch = sample_channel(&cfg(2, vec![1, 1], 7)).unwrap();
        assert_eq!(ch.entries().count(), 4);
        assert_eq!(ch.vector(1, 0).unwrap().len(), 2);
        let values: Vec<_> = ch.entries().map(|(_, v)| v).collect();
        for i in 0..values.len() {
            for j in i + 1..values.len() {
                assert_ne!(values[i], values[j]);
            }
        }
    }

    #[test]
    fn ragged_state_counts() {
        let ch = sample_channel(&cfg(3, vec![1, 2, 4], 3)).unwrap();
        assert_eq!(ch.entries().count(), 3 * 7);
        assert!(ch.coeff(2, 2, 3).is_ok());
        assert!(ch.coeff(0, 0, 1).is_err());
    }

    #[test]
    fn same_seed_same_channel() {
        let a = sample_channel(&cfg(2, vec![1, 1], 7)).unwrap();
        let b = sample_channel(&cfg(2, vec![1, 1], 7)).unwrap();
        assert_eq!(a, b);
        let c = sample_channel(&cfg(2, vec![1, 1], 8)).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn accessor_rejects_out_of_range() {
        let ch = sample_channel(&cfg(2, vec![2, 1], 1)).unwrap();
        assert!(matches!(
            ch.coeff(2, 0, 0),
            Err(Error::IndexOutOfRange {
                what: "receiver",
                ..
            })
        ));
        assert!(matches!(
            ch.coeff(0, 2, 0),
            Err(Error::IndexOutOfRange {
                what: "antenna",
                ..
            })
        ));
        assert!(matches!(
            ch.coeff(1, 0, 1),
            Err(Error::IndexOutOfRange { what: "state", .. })
        ));
    }

    #[test]
    fn invalid_configs_rejected() {
        assert!(sample_channel(&cfg(0, vec![1], 1)).is_err());
        assert!(sample_channel(&cfg(2, vec![1, 0], 1)).is_err());
        let mut c = cfg(2, vec![1, 1], 1);
        c.magnitude_floor = 0.0;
        assert!(sample_channel(&c).is_err());
        c.magnitude_floor = 1e-3;
        c.receivers = 3;
        assert!(sample_channel(&c).is_err());
    }

    #[test]
    fn huge_floor_exhausts_attempts() {
        let mut c = cfg(1, vec![1], 1);
        c.magnitude_floor = 1e6;
        assert!(matches!(sample_channel(&c), Err(Error::Sampling(_))));
    }

    #[test]
    fn magnitude_floor_respected() {
        let mut c = cfg(3, vec![3, 3], 11);
        c.magnitude_floor = 0.5;
        let ch = sample_channel(&c).unwrap();
        assert!(ch.entries().all(|(_, v)| v.norm() >= 0.5));
    }

    #[test]
    fn constructed_collision_is_reported() {
        let one = Scalar::new(1.0, 0.0);
        let h = vec![
            vec![vec![one], vec![one]],
            vec![vec![Scalar::new(2.0, 0.0)], vec![Scalar::new(3.0, 0.0)]],
        ];
        let ch = ChannelRealization::from_parts(cfg(2, vec![1, 1], 0), h).unwrap();
        let report = validate_genericity(&ch, 1e-9);
        assert_eq!(report.close_pairs.len(), 1);
        let (a, b, _) = report.close_pairs[0];
        assert_eq!((a.receiver, a.antenna), (0, 0));
        assert_eq!((b.receiver, b.antenna), (0, 1));
    }

    #[test]
    fn huge_tolerance_reports_all_pairs() {
        let ch = sample_channel(&cfg(2, vec![2, 2], 4)).unwrap();
        let n = ch.entries().count();
        let report = validate_genericity(&ch, 1e9);
        assert_eq!(report.close_pairs.len(), n * (n - 1) / 2);
    }

    #[test]
    fn sampled_channels_are_generic() {
        for seed in 0..1000 {
            let ch = sample_channel(&cfg(2, vec![2, 2], seed)).unwrap();
            assert!(validate_genericity(&ch, 1e-12).is_generic(), "seed {seed}");
        }
    }

    #[test]
    fn file_round_trip_real_and_complex() {
        for field in [ScalarField::Real, ScalarField::Complex] {
            let mut c = cfg(2, vec![2, 1], 9);
            c.field = field;
            let ch = sample_channel(&c).unwrap();
            let back = ChannelRealization::from_json(&ch.to_json()).unwrap();
            assert_eq!(ch, back);
        }
    }

    #[test]
    fn malformed_files_rejected() {
        let ch = sample_channel(&cfg(2, vec![1, 1], 9)).unwrap();
        let mut file = ch.to_file();
        file.h[0].pop();
        assert!(ChannelRealization::from_file(file).is_err());
        let mut file = ch.to_file();
        file.h[0][0][0] = ScalarRepr::Complex([1.0, 1.0]);
        assert!(ChannelRealization::from_file(file).is_err());
        assert!(ChannelRealization::from_json("{\"config\": 1}").is_err());
    }
}
