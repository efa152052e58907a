//! Flat `key = value` config files merged under command-line flags.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::str::FromStr;

use clap::Args;

use crate::CliError;

pub const KEYS: &[&str] = &[
    "channel", "p", "phi", "d", "q", "quantity", "grid", "param", "seed", "starts", "out", "trials", "no-timing",
];

/// Options shared by every subcommand. Any of them may also come from
/// `--config`; flags take precedence.
#[derive(Debug, Clone, Default, Args)]
pub struct Settings {
    /// Channel name, e.g. partial-swap or erasure-cell
    #[arg(long)]
    pub channel: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    pub p: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub phi: Option<f64>,
    /// Qudit dimension of the erasure cell
    #[arg(long)]
    pub d: Option<usize>,
    /// Noise weight of noisy-cnot
    #[arg(long, allow_negative_numbers = true)]
    pub q: Option<f64>,
    /// max-rains, emax, reading-bound or erasure-formula
    #[arg(long)]
    pub quantity: Option<String>,
    /// Sweep grid as start:stop:steps
    #[arg(long)]
    pub grid: Option<String>,
    /// Parameter varied by a sweep (default p)
    #[arg(long)]
    pub param: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Optimizer starts for emax and reading-bound
    #[arg(long)]
    pub starts: Option<usize>,
    /// Output file; stdout when absent
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub trials: Option<usize>,
    /// Flat key = value file supplying defaults for the flags above
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Leave wall_time_ms empty so sweeps are byte-reproducible
    #[arg(long)]
    pub no_timing: bool,
}

pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut map = BTreeMap::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(CliError::Usage(format!("config line {}: expected key = value", n + 1)));
        };
        let key = k.trim().to_string();
        if !KEYS.contains(&key.as_str()) {
            return Err(CliError::Usage(format!("config line {}: unknown key `{key}`", n + 1)));
        }
        if map.insert(key.clone(), v.trim().to_string()).is_some() {
            return Err(CliError::Usage(format!("config line {}: duplicate key `{key}`", n + 1)));
        }
    }
    Ok(map)
}

fn value<T: FromStr>(map: &BTreeMap<String, String>, key: &str) -> Result<Option<T>, CliError> {
    map.get(key)
        .map(|v| {
            v.parse()
                .map_err(|_| CliError::Usage(format!("config key `{key}`: cannot parse `{v}`")))
        })
        .transpose()
}

impl Settings {
    /// Fills unset flags from the config file named by `--config`.
    pub fn resolve(self) -> Result<Settings, CliError> {
        let Some(path) = self.config.clone() else {
            return Ok(self);
        };
        let text = std::fs::read_to_string(&path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        self.merge(&parse_config(&text)?)
    }

    fn merge(self, map: &BTreeMap<String, String>) -> Result<Settings, CliError> {
        Ok(Settings {
            channel: self.channel.or(value(map, "channel")?),
            p: self.p.or(value(map, "p")?),
            phi: self.phi.or(value(map, "phi")?),
            d: self.d.or(value(map, "d")?),
            q: self.q.or(value(map, "q")?),
            quantity: self.quantity.or(value(map, "quantity")?),
            grid: self.grid.or(value(map, "grid")?),
            param: self.param.or(value(map, "param")?),
            seed: self.seed.or(value(map, "seed")?),
            starts: self.starts.or(value(map, "starts")?),
            out: self.out.or(value(map, "out")?),
            trials: self.trials.or(value(map, "trials")?),
            config: self.config,
            no_timing: self.no_timing || value::<bool>(map, "no-timing")?.unwrap_or(false),
        })
    }
}
