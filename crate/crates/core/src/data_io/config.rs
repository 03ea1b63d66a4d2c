use crate::antenna::Resonator;
use crate::error::{parse_err, Error, Result};
use crate::medium::ConductiveMedium;
use crate::modem::BfskConfig;

/// Every accepted key. Anything else is rejected.
pub const CONFIG_KEYS: &[&str] = &[
    "medium.conductivity_s_per_m",
    "medium.relative_permittivity",
    "medium.permeability_h_per_m",
    "antenna.f0_hz",
    "antenna.q",
    "antenna.r_resonance_ohm",
    "antenna.c_static_f",
    "antenna.softening_hz_per_v2",
    "array.n_tx",
    "array.n_rx",
    "modem.center_hz",
    "modem.delta_f_hz",
    "modem.rb_bps",
    "modem.sample_rate",
    "modem.amplitude",
];

/// Run configuration: medium, one antenna element, array sizes and modem.
#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub medium: ConductiveMedium,
    pub resonator: Resonator,
    pub n_tx: u32,
    pub n_rx: u32,
    pub modem: BfskConfig,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            medium: ConductiveMedium::freshwater(),
            resonator: Resonator::default(),
            n_tx: 15,
            n_rx: 15,
            modem: BfskConfig::default(),
        }
    }
}

impl Config {
    /// Sets one `section.key`. Used by the parser and by command-line overrides.
    pub fn set(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        let num = || -> std::result::Result<f64, String> {
            value
                .trim()
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| format!("{key}: '{value}' is not a finite number"))
        };
        let count = || -> std::result::Result<u32, String> {
            value
                .trim()
                .parse::<u32>()
                .map_err(|_| format!("{key}: '{value}' is not a non-negative integer"))
        };
        match key {
            "medium.conductivity_s_per_m" => self.medium.conductivity = num()?,
            "medium.relative_permittivity" => self.medium.relative_permittivity = num()?,
            "medium.permeability_h_per_m" => self.medium.permeability = num()?,
            "antenna.f0_hz" => self.resonator.f0 = num()?,
            "antenna.q" => self.resonator.quality_q = num()?,
            "antenna.r_resonance_ohm" => self.resonator.r_resonance = num()?,
            "antenna.c_static_f" => self.resonator.c_static = num()?,
            "antenna.softening_hz_per_v2" => self.resonator.softening_coeff = num()?,
            "array.n_tx" => self.n_tx = count()?,
            "array.n_rx" => self.n_rx = count()?,
            "modem.center_hz" => self.modem.center_frequency = num()?,
            "modem.delta_f_hz" => self.modem.tone_spacing = num()?,
            "modem.rb_bps" => self.modem.bit_rate = num()?,
            "modem.sample_rate" => self.modem.sample_rate = num()?,
            "modem.amplitude" => self.modem.amplitude = num()?,
            other => return Err(format!("unknown key '{other}'")),
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let lines = [
            ("medium.conductivity_s_per_m", self.medium.conductivity.to_string()),
            ("medium.relative_permittivity", self.medium.relative_permittivity.to_string()),
            ("medium.permeability_h_per_m", self.medium.permeability.to_string()),
            ("antenna.f0_hz", self.resonator.f0.to_string()),
            ("antenna.q", self.resonator.quality_q.to_string()),
            ("antenna.r_resonance_ohm", self.resonator.r_resonance.to_string()),
            ("antenna.c_static_f", self.resonator.c_static.to_string()),
            ("antenna.softening_hz_per_v2", self.resonator.softening_coeff.to_string()),
            ("array.n_tx", self.n_tx.to_string()),
            ("array.n_rx", self.n_rx.to_string()),
            ("modem.center_hz", self.modem.center_frequency.to_string()),
            ("modem.delta_f_hz", self.modem.tone_spacing.to_string()),
            ("modem.rb_bps", self.modem.bit_rate.to_string()),
            ("modem.sample_rate", self.modem.sample_rate.to_string()),
            ("modem.amplitude", self.modem.amplitude.to_string()),
        ];
        lines.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }

    pub fn validate(&self) -> Result<()> {
        self.medium.validate()?;
        self.resonator.validate()?;
        if self.n_tx == 0 || self.n_rx == 0 {
            return Err(Error::Domain("array sizes must be >= 1".into()));
        }
        self.modem.validate()
    }
}

/// Parses `section.key = value` lines on top of [`Config::default`].
/// Blank lines and `#` comments are skipped; unknown keys are an error.
pub fn parse_config(text: &str) -> Result<Config> {
    let mut cfg = Config::default();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return parse_err(i + 1, format!("expected 'section.key = value', got '{line}'"));
        };
        if let Err(msg) = cfg.set(key.trim(), value.trim()) {
            return parse_err(i + 1, msg);
        }
    }
    Ok(cfg)
}
