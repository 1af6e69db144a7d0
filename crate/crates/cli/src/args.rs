use std::path::PathBuf;

use cia_core::ScalarField;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

#[derive(Debug, Parser)]
#[command(
    name = "cia-sim",
    version,
    about = "Compound-channel interference alignment toolkit"
)]
pub struct Cli {
    /// JSON parameter file for the subcommand; flags given on the command
    /// line take precedence over its fields.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Output file, written atomically. Standard output when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    #[arg(long, global = true, env = "CIA_SIM_THREADS")]
    pub threads: Option<usize>,

    /// Report errors on standard error as JSON objects.
    #[arg(long, global = true)]
    pub json_errors: bool,

    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    X,
    Hybrid,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample a compound channel and write it as JSON.
    GenChannel(ChannelArgs),
    /// Check the alignment properties by exact monomial algebra.
    AlignCheck(AlignArgs),
    /// Print the X-scheme parameters at one power.
    Params(ParamsArgs),
    /// Write one received constellation as CSV.
    Constellation(ConstellationArgs),
    /// Simulate one power level.
    Simulate(SweepArgs),
    /// Sweep the power grid and fit the DoF slope.
    DofSweep(SweepArgs),
    /// Run the zero-forcing hybrid scheme.
    Hybrid(HybridArgs),
    /// Print the optimal DoF and check a DoF profile against the outer bounds.
    Bounds(BoundsArgs),
}

pub fn parse_field(s: &str) -> Result<ScalarField, String> {
    match s {
        "real" => Ok(ScalarField::Real),
        "complex" => Ok(ScalarField::Complex),
        _ => Err(format!("unknown field `{s}` (expected real or complex)")),
    }
}

/// Fills every `None` field of `$a` from `$b`.
macro_rules! fill {
    ($a:ident, $b:ident; $($f:ident),* $(,)?) => {
        $( if $a.$f.is_none() { $a.$f = $b.$f; } )*
    };
}

#[derive(Clone, Debug, Default, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelArgs {
    /// Existing channel file; overrides the sampling flags.
    #[arg(long)]
    pub channel: Option<PathBuf>,
    #[arg(long = "M")]
    #[serde(rename = "M")]
    pub antennas: Option<usize>,
    /// States per receiver, comma separated.
    #[arg(long = "J", value_delimiter = ',')]
    #[serde(rename = "J")]
    pub states: Option<Vec<usize>>,
    #[arg(long, value_parser = parse_field)]
    pub field: Option<ScalarField>,
    #[arg(long)]
    pub magnitude_floor: Option<f64>,
}

#[derive(Clone, Debug, Default, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlignArgs {
    /// Existing channel file; overrides the sampling flags.
    #[arg(long)]
    pub channel: Option<PathBuf>,
    #[arg(long = "M")]
    #[serde(rename = "M")]
    pub antennas: Option<usize>,
    /// States per receiver, comma separated.
    #[arg(long = "J", value_delimiter = ',')]
    #[serde(rename = "J")]
    pub states: Option<Vec<usize>>,
    #[arg(long, value_parser = parse_field)]
    pub field: Option<ScalarField>,
    #[arg(long)]
    pub magnitude_floor: Option<f64>,
    /// Exponent cap per receiver, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub n: Option<Vec<u32>>,
    /// Check only this receiver (and optionally one state).
    #[arg(long)]
    pub receiver: Option<usize>,
    #[arg(long)]
    pub state: Option<usize>,
}

#[derive(Clone, Debug, Default, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsArgs {
    /// Existing channel file; overrides the sampling flags.
    #[arg(long)]
    pub channel: Option<PathBuf>,
    #[arg(long = "M")]
    #[serde(rename = "M")]
    pub antennas: Option<usize>,
    /// States per receiver, comma separated.
    #[arg(long = "J", value_delimiter = ',')]
    #[serde(rename = "J")]
    pub states: Option<Vec<usize>>,
    #[arg(long, value_parser = parse_field)]
    pub field: Option<ScalarField>,
    #[arg(long)]
    pub magnitude_floor: Option<f64>,
    /// Exponent cap per receiver, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub n: Option<Vec<u32>>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long = "P")]
    #[serde(rename = "P")]
    pub power: Option<f64>,
    #[arg(long = "T")]
    #[serde(rename = "T")]
    pub codeword_len: Option<usize>,
    /// Pin `Q` instead of deriving it from `P`.
    #[arg(long = "Q")]
    #[serde(rename = "Q")]
    pub q: Option<i64>,
}

#[derive(Clone, Debug, Default, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstellationArgs {
    /// Existing channel file; overrides the sampling flags.
    #[arg(long)]
    pub channel: Option<PathBuf>,
    #[arg(long = "M")]
    #[serde(rename = "M")]
    pub antennas: Option<usize>,
    /// States per receiver, comma separated.
    #[arg(long = "J", value_delimiter = ',')]
    #[serde(rename = "J")]
    pub states: Option<Vec<usize>>,
    #[arg(long, value_parser = parse_field)]
    pub field: Option<ScalarField>,
    #[arg(long)]
    pub magnitude_floor: Option<f64>,
    /// Exponent cap per receiver, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub n: Option<Vec<u32>>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long = "P")]
    #[serde(rename = "P")]
    pub power: Option<f64>,
    #[arg(long = "T")]
    #[serde(rename = "T")]
    pub codeword_len: Option<usize>,
    /// Pin `Q` instead of deriving it from `P`.
    #[arg(long = "Q")]
    #[serde(rename = "Q")]
    pub q: Option<i64>,
    #[arg(long)]
    pub receiver: Option<usize>,
    #[arg(long)]
    pub state: Option<usize>,
    /// Largest constellation to enumerate.
    #[arg(long)]
    pub cap: Option<u128>,
}

#[derive(Clone, Debug, Default, Args)]
pub struct SweepArgs {
    #[arg(long, value_enum)]
    pub scheme: Option<Scheme>,
    #[arg(long = "M")]
    pub antennas: Option<usize>,
    #[arg(long = "J", value_delimiter = ',')]
    pub states: Option<Vec<usize>>,
    #[arg(long = "JM")]
    pub last_states: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    pub n: Option<Vec<u32>>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long, value_parser = parse_field)]
    pub field: Option<ScalarField>,
    #[arg(long = "Q")]
    pub q: Option<i64>,
    /// Power levels, comma separated. `simulate` takes exactly one.
    #[arg(long = "P", value_delimiter = ',')]
    pub powers: Option<Vec<f64>>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long = "T")]
    pub symbols: Option<usize>,
    #[arg(long)]
    pub fixed_channel: bool,
    #[arg(long)]
    pub cap: Option<u128>,
    #[arg(long)]
    pub noise_scale: Option<f64>,
    /// Also write the JSON summary here when the main output is CSV.
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

#[derive(Clone, Debug, Default, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HybridArgs {
    #[arg(long = "M")]
    #[serde(rename = "M")]
    pub antennas: Option<usize>,
    #[arg(long = "JM")]
    #[serde(rename = "JM")]
    pub last_states: Option<usize>,
    #[arg(long)]
    pub n: Option<u32>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long = "P")]
    #[serde(rename = "P")]
    pub power: Option<f64>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long = "T")]
    #[serde(rename = "T")]
    pub symbols: Option<usize>,
    #[arg(long = "Q")]
    #[serde(rename = "Q")]
    pub q: Option<i64>,
    /// Power grid for an optional sweep, comma separated.
    #[arg(long = "P-grid", value_delimiter = ',')]
    #[serde(rename = "P_grid")]
    pub power_grid: Option<Vec<f64>>,
    /// Where to write the sweep CSV.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    #[arg(long)]
    pub cap: Option<u128>,
}

#[derive(Clone, Debug, Default, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsArgs {
    #[arg(long = "M")]
    #[serde(rename = "M")]
    pub antennas: Option<usize>,
    #[arg(long = "K")]
    #[serde(rename = "K")]
    pub receivers: Option<usize>,
    /// Per-receiver DoF profile to check, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub profile: Option<Vec<f64>>,
    /// States per receiver; restricts which rotated bounds apply.
    #[arg(long = "J", value_delimiter = ',')]
    #[serde(rename = "J")]
    pub states: Option<Vec<usize>>,
}

impl ChannelArgs {
    pub fn merge(&mut self, other: Self) {
        fill!(self, other; channel, antennas, states, field, magnitude_floor);
    }
}

impl AlignArgs {
    pub fn merge(&mut self, other: Self) {
        fill!(self, other; channel, antennas, states, field, magnitude_floor, n, receiver, state);
    }

    pub fn channel_args(&self) -> ChannelArgs {
        ChannelArgs {
            channel: self.channel.clone(),
            antennas: self.antennas,
            states: self.states.clone(),
            field: self.field,
            magnitude_floor: self.magnitude_floor,
        }
    }
}

impl ParamsArgs {
    pub fn merge(&mut self, other: Self) {
        fill!(self, other; channel, antennas, states, field, magnitude_floor, n, eps, power, codeword_len, q);
    }

    pub fn channel_args(&self) -> ChannelArgs {
        ChannelArgs {
            channel: self.channel.clone(),
            antennas: self.antennas,
            states: self.states.clone(),
            field: self.field,
            magnitude_floor: self.magnitude_floor,
        }
    }
}

impl ConstellationArgs {
    pub fn merge(&mut self, other: Self) {
        fill!(self, other; channel, antennas, states, field, magnitude_floor, n, eps, power, codeword_len, q, receiver, state, cap);
    }

    pub fn params_args(&self) -> ParamsArgs {
        ParamsArgs {
            channel: self.channel.clone(),
            antennas: self.antennas,
            states: self.states.clone(),
            field: self.field,
            magnitude_floor: self.magnitude_floor,
            n: self.n.clone(),
            eps: self.eps,
            power: self.power,
            codeword_len: self.codeword_len,
            q: self.q,
        }
    }
}

impl HybridArgs {
    pub fn merge(&mut self, other: Self) {
        fill!(self, other; antennas, last_states, n, eps, power, trials, symbols, q, power_grid, csv, cap);
    }
}

impl BoundsArgs {
    pub fn merge(&mut self, other: Self) {
        fill!(self, other; antennas, receivers, profile, states);
    }
}
