//! Run configuration: flat `key = value` text or the equivalent flat JSON
//! object. Angles are in degrees in files and radians inside the library.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use satcrb::signal::{PulseShape, SignalConfig};
use satcrb::SystemParams;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::CliError;

pub const DEFAULT_SEED: u64 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            other => Err(format!("unknown format `{other}` (expected csv or json)")),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Csv => "csv",
            Self::Json => "json",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub params: SystemParams,
    pub signal: Option<SignalConfig>,
    pub seed: u64,
    pub output_path: Option<String>,
    pub format: Format,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            params: SystemParams::default(),
            signal: None,
            seed: DEFAULT_SEED,
            output_path: None,
            format: Format::Csv,
        }
    }
}

/// Every accepted key; all optional.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    r: Option<f64>,
    h: Option<f64>,
    /// Degrees.
    phi_l_max: Option<f64>,
    eta_rho: Option<f64>,
    n_sats: Option<usize>,
    c: Option<f64>,
    eta: Option<f64>,

    pulse: Option<String>,
    pulse_width: Option<f64>,
    sample_rate: Option<f64>,
    obs_window: Option<f64>,
    n0: Option<f64>,
    es_max: Option<f64>,
    truncate_after: Option<f64>,

    seed: Option<u64>,
    output_path: Option<String>,
    format: Option<Format>,
}

impl RunConfig {
    pub fn from_path(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// JSON when the text starts with `{`, key = value lines otherwise.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let value = if text.trim_start().starts_with('{') {
            serde_json::from_str(text).map_err(|e| CliError::Config(format!("bad JSON config: {e}")))?
        } else {
            key_values(text)?
        };
        let raw: RawConfig =
            serde_json::from_value(value).map_err(|e| CliError::Config(e.to_string()))?;
        raw.build()
    }

    pub fn signal_or_default(&self) -> SignalConfig {
        self.signal.unwrap_or_default()
    }
}

fn key_values(text: &str) -> Result<Value, CliError> {
    let mut map = Map::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("line {}: expected key = value", n + 1)))?;
        let (key, value) = (key.trim(), value.trim());
        let parsed = if let Ok(v) = value.parse::<u64>() {
            Value::from(v)
        } else if let Ok(v) = value.parse::<f64>() {
            Value::from(v)
        } else {
            Value::from(value.trim_matches('"'))
        };
        if map.insert(key.to_string(), parsed).is_some() {
            return Err(CliError::Config(format!("line {}: duplicate key `{key}`", n + 1)));
        }
    }
    Ok(Value::Object(map))
}

impl RawConfig {
    fn build(self) -> Result<RunConfig, CliError> {
        let mut params = SystemParams::default();
        params.r = self.r.unwrap_or(params.r);
        params.h = self.h.unwrap_or(params.h);
        params.phi_l_max = self.phi_l_max.map_or(params.phi_l_max, f64::to_radians);
        params.eta_rho = self.eta_rho.unwrap_or(params.eta_rho);
        params.n_sats = self.n_sats.unwrap_or(params.n_sats);
        params.c = self.c.unwrap_or(params.c);
        params.eta = self.eta;
        params.validate()?;

        let any_signal = self.pulse.is_some()
            || self.pulse_width.is_some()
            || self.sample_rate.is_some()
            || self.obs_window.is_some()
            || self.n0.is_some()
            || self.es_max.is_some()
            || self.truncate_after.is_some();
        let signal = if any_signal {
            let d = SignalConfig::default();
            let s = SignalConfig {
                pulse: match &self.pulse {
                    Some(p) => p.parse::<PulseShape>()?,
                    None => d.pulse,
                },
                pulse_width: self.pulse_width.unwrap_or(d.pulse_width),
                sample_rate: self.sample_rate.unwrap_or(d.sample_rate),
                obs_window: self.obs_window.unwrap_or(d.obs_window),
                n0: self.n0.unwrap_or(d.n0),
                es_max: self.es_max.unwrap_or(d.es_max),
                c: params.c,
                truncate_after: self.truncate_after,
            };
            s.validate()?;
            Some(s)
        } else {
            None
        };

        Ok(RunConfig {
            params,
            signal,
            seed: self.seed.unwrap_or(DEFAULT_SEED),
            output_path: self.output_path,
            format: self.format.unwrap_or_default(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_text_gives_defaults() {
        let c = RunConfig::parse("").unwrap();
        assert_eq!(c, RunConfig::default());
        assert_eq!(c.params.n_sats, 250);
        assert!((c.params.phi_l_max - 60f64.to_radians()).abs() < 1e-15);
    }

    #[test]
    fn key_value_and_json_agree() {
        let kv = "h = 2400\nphi_l_max = 30  # degrees\nn_sats = 200\nseed = 7\nformat = json\n";
        let js = r#"{"h": 2400, "phi_l_max": 30, "n_sats": 200, "seed": 7, "format": "json"}"#;
        let a = RunConfig::parse(kv).unwrap();
        let b = RunConfig::parse(js).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.params.h, 2400.0);
        assert!((a.params.phi_l_max - 30f64.to_radians()).abs() < 1e-15);
        assert_eq!(a.seed, 7);
        assert_eq!(a.format, Format::Json);
    }

    #[test]
    fn signal_keys_switch_signal_on() {
        let c = RunConfig::parse("es_max = 100\npulse = raised_cosine\n").unwrap();
        let s = c.signal.unwrap();
        assert_eq!(s.es_max, 100.0);
        assert_eq!(s.pulse, PulseShape::RaisedCosine);
        assert!(RunConfig::parse("h = 1000").unwrap().signal.is_none());
    }

    #[test]
    fn bad_input_is_a_config_error() {
        for text in [
            "bogus = 1",
            "h 20000",
            "h = 1\nh = 2",
            "h = lots",
            "h = -5",
            "{\"h\": ",
            "sample_rate = 1e6",
        ] {
            assert!(matches!(RunConfig::parse(text), Err(CliError::Config(_) | CliError::Core(_))), "{text}");
        }
    }
}
