//! Command-line front end. Every subcommand is a thin adapter over
//! `mecomm-core` and prints plot-ready CSV tables or `key = value` reports.
//!
//! Exit codes: 0 success, 1 domain error, 2 usage or input-file error.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use mecomm_core::antenna::{self, ArraySpec, LaminateSpec, Wiring};
use mecomm_core::capacity::{capacity_band, capacity_cumulative};
use mecomm_core::data_io::{
    self, fmt_num, parse_config, write_report, write_table, Config, RangeFile, SpectrumFile,
    SynthOptions,
};
use mecomm_core::link_budget::{
    fit_path_loss_masked, radiation_resistance_ratio_media, region_breakpoints,
    total_link_budget_with_coupling, PathLossModel,
};
use mecomm_core::medium::{self, attenuation_db_per_m, field_regions, propagation_constants};
use mecomm_core::modem::{self, ber_closed_form, ber_monte_carlo};
use mecomm_core::{ConductiveMedium, Error};

/// Speed of light in vacuum, m/s.
const C0: f64 = 299_792_458.0;

#[derive(Debug, Parser)]
#[command(name = "mecomm", version, about = "ME antenna array link analysis and BFSK modem simulation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Config file of `section.key = value` lines
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Write output here instead of standard output
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Master seed for anything random
    #[arg(long, global = true, default_value_t = 1)]
    pub seed: u64,

    /// medium.conductivity_s_per_m
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub conductivity: Option<f64>,
    /// medium.relative_permittivity
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub relative_permittivity: Option<f64>,
    /// antenna.f0_hz
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub f0: Option<f64>,
    /// antenna.q
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub q: Option<f64>,
    /// antenna.r_resonance_ohm
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub r_resonance: Option<f64>,
    /// antenna.c_static_f
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub c_static: Option<f64>,
    /// antenna.softening_hz_per_v2
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub softening: Option<f64>,
    /// array.n_tx
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub n_tx: Option<u32>,
    /// array.n_rx
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub n_rx: Option<u32>,
    /// modem.center_hz
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub center: Option<f64>,
    /// modem.delta_f_hz
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub delta_f: Option<f64>,
    /// modem.rb_bps
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub rb: Option<f64>,
    /// modem.sample_rate
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub sample_rate: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Wavelength, attenuation and field regions in the configured medium
    Medium {
        /// Hz; repeat for several rows
        #[arg(long, default_values_t = [36_000.0])]
        frequency: Vec<f64>,
    },
    /// Laminate resonance and ME coupling coefficient
    Resonance(ResonanceArgs),
    /// Impedance sweep of an antenna array
    Impedance(ImpedanceArgs),
    /// Radiation-resistance and array scaling of the link budget
    Link {
        /// R_rad ratio; computed from air vs the configured medium when omitted
        #[arg(long)]
        medium_ratio: Option<f64>,
        /// Hz, used when the ratio is computed
        #[arg(long, default_value_t = 36_000.0)]
        frequency: f64,
        #[arg(long, default_value_t = 1.0)]
        coupling_efficiency: f64,
    },
    /// Fit a piecewise power-law path-loss model to a range sweep
    Fit {
        #[arg(long)]
        range: PathBuf,
        /// m; defaults to the field-region boundaries at the modem centre frequency
        #[arg(long, value_delimiter = ',')]
        breakpoints: Option<Vec<f64>>,
        /// Leave out samples not flagged `ok`
        #[arg(long)]
        exclude_flagged: bool,
    },
    /// BER tables: vs distance from spectra, or vs SNR
    Ber(BerArgs),
    /// Cumulative Shannon capacity of a spectrum
    Capacity {
        #[arg(long)]
        spectrum: PathBuf,
        /// Report only the band [f_lo, f_hi]
        #[arg(long, requires = "f_hi")]
        f_lo: Option<f64>,
        #[arg(long, requires = "f_lo")]
        f_hi: Option<f64>,
    },
    /// Synthetic range sweep and spectra from a path-loss model
    Synth(SynthArgs),
}

#[derive(Debug, Args)]
pub struct ResonanceArgs {
    /// m
    #[arg(long, default_value_t = 45.7e-3)]
    pub length: f64,
    /// Pa
    #[arg(long, default_value_t = 51e9)]
    pub young_pzt: f64,
    /// Pa
    #[arg(long, default_value_t = 110e9)]
    pub young_metglas: f64,
    #[arg(long, default_value_t = 0.6)]
    pub vol_frac_pzt: f64,
    /// kg/m^3
    #[arg(long, default_value_t = 7800.0)]
    pub density_pzt: f64,
    /// kg/m^3
    #[arg(long, default_value_t = 7180.0)]
    pub density_metglas: f64,
    /// m
    #[arg(long, default_value_t = 150e-6)]
    pub thickness: f64,
    /// V, with --delta-h reports the ME coefficient
    #[arg(long, requires = "delta_h", allow_hyphen_values = true)]
    pub delta_v: Option<f64>,
    /// A/m
    #[arg(long, requires = "delta_v", allow_hyphen_values = true)]
    pub delta_h: Option<f64>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum WiringArg {
    Series,
    Parallel,
}

#[derive(Debug, Args)]
pub struct ImpedanceArgs {
    #[arg(long, default_value_t = 31_000.0)]
    pub f_lo: f64,
    #[arg(long, default_value_t = 41_000.0)]
    pub f_hi: f64,
    #[arg(long, default_value_t = 10.0)]
    pub step: f64,
    /// Element count; defaults to array.n_tx
    #[arg(long)]
    pub elements: Option<usize>,
    #[arg(long, value_enum, default_value_t = WiringArg::Parallel)]
    pub wiring: WiringArg,
    /// V
    #[arg(long, default_value_t = 0.0)]
    pub drive: f64,
    /// Fractional uniform jitter on element f0
    #[arg(long, default_value_t = 0.0)]
    pub f0_jitter: f64,
    /// Fractional uniform jitter on element resistance
    #[arg(long, default_value_t = 0.0)]
    pub r_jitter: f64,
}

#[derive(Debug, Args)]
pub struct BerArgs {
    /// Spectrum files (with distance_m metadata); repeat for several distances
    #[arg(long)]
    pub spectrum: Vec<PathBuf>,
    /// Hz
    #[arg(long, value_delimiter = ',', default_values_t = [10.0, 50.0, 100.0])]
    pub tone_spacings: Vec<f64>,
    /// BER target for the feasibility column
    #[arg(long, default_value_t = 1e-3)]
    pub target_ber: f64,
    /// dB; SNR sweep when no spectra are given
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_values_t = [0.0, 2.0, 4.0, 6.0, 8.0, 10.0, 12.0])]
    pub snr_db: Vec<f64>,
    /// Also run a Monte Carlo estimate with this many bits per SNR point
    #[arg(long)]
    pub monte_carlo: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Directory for range.csv and spectrum_<d>m.csv
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// dB at the first distance
    #[arg(long, default_value_t = 70.0, allow_hyphen_values = true)]
    pub level: f64,
    #[arg(long, value_delimiter = ',', default_values_t = [4.0, 1.0])]
    pub exponents: Vec<f64>,
    /// m, one fewer than exponents
    #[arg(long, value_delimiter = ',', default_values_t = [15.0])]
    pub breakpoints: Vec<f64>,
    /// m
    #[arg(long, value_delimiter = ',')]
    pub distances: Option<Vec<f64>>,
    /// dB
    #[arg(long, default_value_t = 1.0)]
    pub jitter: f64,
    /// dBV
    #[arg(long, default_value_t = data_io::DEFAULT_NOISE_FLOOR_DBV, allow_hyphen_values = true)]
    pub noise_floor: f64,
}

#[derive(Debug)]
pub enum CliError {
    /// Exit code 2.
    Usage(String),
    /// Exit code 1.
    Domain(String),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Domain(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Domain(m) => f.write_str(m),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse { .. } => CliError::Usage(e.to_string()),
            _ => CliError::Domain(e.to_string()),
        }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

/// Wraps a core error with the file it came from.
fn in_file(path: &Path) -> impl Fn(Error) -> CliError + '_ {
    move |e| match CliError::from(e) {
        CliError::Usage(m) => CliError::Usage(format!("{}: {m}", path.display())),
        CliError::Domain(m) => CliError::Domain(format!("{}: {m}", path.display())),
    }
}

/// Config file (if any) with command-line overrides applied on top.
pub fn resolve_config(common: &Common) -> Result<Config, CliError> {
    let mut cfg = match &common.config {
        Some(p) => parse_config(&read(p)?).map_err(in_file(p))?,
        None => Config::default(),
    };
    let overrides: [(&str, Option<String>); 13] = [
        ("medium.conductivity_s_per_m", common.conductivity.map(|v| v.to_string())),
        ("medium.relative_permittivity", common.relative_permittivity.map(|v| v.to_string())),
        ("antenna.f0_hz", common.f0.map(|v| v.to_string())),
        ("antenna.q", common.q.map(|v| v.to_string())),
        ("antenna.r_resonance_ohm", common.r_resonance.map(|v| v.to_string())),
        ("antenna.c_static_f", common.c_static.map(|v| v.to_string())),
        ("antenna.softening_hz_per_v2", common.softening.map(|v| v.to_string())),
        ("array.n_tx", common.n_tx.map(|v| v.to_string())),
        ("array.n_rx", common.n_rx.map(|v| v.to_string())),
        ("modem.center_hz", common.center.map(|v| v.to_string())),
        ("modem.delta_f_hz", common.delta_f.map(|v| v.to_string())),
        ("modem.rb_bps", common.rb.map(|v| v.to_string())),
        ("modem.sample_rate", common.sample_rate.map(|v| v.to_string())),
    ];
    for (key, value) in overrides {
        if let Some(v) = value {
            cfg.set(key, &v).map_err(CliError::Usage)?;
        }
    }
    if common.conductivity.is_some() && common.config.is_none() {
        cfg.medium.label = "custom".into();
    }
    Ok(cfg)
}

pub fn medium_table(medium: &ConductiveMedium, frequencies: &[f64]) -> Result<String, Error> {
    let mut rows = Vec::new();
    for &f in frequencies {
        let pc = propagation_constants(medium, f)?;
        let r = field_regions(medium, f)?;
        rows.push(vec![
            f,
            medium::wavelength(medium, f)?,
            pc.attenuation_alpha,
            attenuation_db_per_m(medium, f)?,
            pc.skin_depth(),
            r.reactive_near_limit,
            r.radiative_near_limit,
            r.transition_limit,
            if pc.approximation_valid { 1.0 } else { 0.0 },
        ]);
    }
    Ok(write_table(
        &[
            "frequency_hz",
            "wavelength_m",
            "alpha_np_per_m",
            "attenuation_db_per_m",
            "skin_depth_m",
            "reactive_near_m",
            "radiative_near_m",
            "transition_m",
            "approximation_valid",
        ],
        &rows,
    ))
}

/// Runs one invocation, writing the result to `stdout` unless `--out` is set.
pub fn run(cli: Cli, stdout: &mut dyn Write) -> Result<(), CliError> {
    let cfg = resolve_config(&cli.common)?;
    let text = match &cli.command {
        Command::Medium { frequency } => medium_table(&cfg.medium, frequency)?,
        Command::Resonance(a) => resonance(a)?,
        Command::Impedance(a) => impedance(&cfg, a, cli.common.seed)?,
        Command::Link { medium_ratio, frequency, coupling_efficiency } => {
            let ratio = match medium_ratio {
                Some(r) => *r,
                None => {
                    let lambda_air = C0 / frequency;
                    let lambda = medium::wavelength(&cfg.medium, *frequency)?;
                    radiation_resistance_ratio_media(lambda_air, lambda, 1.0, cfg.medium.relative_permittivity)?
                }
            };
            let s = total_link_budget_with_coupling(ratio, cfg.n_tx, cfg.n_rx, *coupling_efficiency)?;
            write_table(
                &[
                    "rad_resistance_ratio",
                    "tx_array_power_gain",
                    "rx_array_gain",
                    "coupling_efficiency",
                    "total_link_factor",
                    "total_link_db",
                    "total_link_db_power",
                ],
                &[vec![
                    s.rad_resistance_ratio,
                    s.tx_array_power_gain,
                    s.rx_array_gain,
                    s.coupling_efficiency,
                    s.total_link_factor,
                    s.total_link_db,
                    s.total_link_db_power,
                ]],
            )
        }
        Command::Fit { range, breakpoints, exclude_flagged } => {
            let file = RangeFile::parse(&read(range)?).map_err(in_file(range))?;
            let bps = match breakpoints {
                Some(b) => b.clone(),
                None => {
                    let (lo, hi) = span(&file);
                    region_breakpoints(&field_regions(&cfg.medium, cfg.modem.center_frequency)?)
                        .into_iter()
                        .filter(|&b| b > lo && b < hi)
                        .collect()
                }
            };
            let mask = if *exclude_flagged {
                file.flagged_mask()
            } else {
                vec![false; file.samples.len()]
            };
            let mut model = fit_path_loss_masked(&file.samples, &bps, &mask)?;
            model.noise_floor = data_io::DEFAULT_NOISE_FLOOR_DBV;
            data_io::path_loss_report(&model)
        }
        Command::Ber(a) => ber(&cfg, a, cli.common.seed)?,
        Command::Capacity { spectrum, f_lo, f_hi } => {
            let s = SpectrumFile::parse(&read(spectrum)?)
                .and_then(|f| f.to_spectrum())
                .map_err(in_file(spectrum))?;
            match (f_lo, f_hi) {
                (Some(lo), Some(hi)) => write_report(&[
                    ("band.f_lo_hz".into(), fmt_num(*lo)),
                    ("band.f_hi_hz".into(), fmt_num(*hi)),
                    ("band.capacity_bits_per_s".into(), fmt_num(capacity_band(&s, *lo, *hi)?)),
                ]),
                _ => {
                    let rows: Vec<Vec<f64>> = capacity_cumulative(&s)?
                        .into_iter()
                        .map(|(f, c)| vec![f, c])
                        .collect();
                    write_table(&["frequency_hz", "cumulative_bits_per_s"], &rows)
                }
            }
        }
        Command::Synth(a) => synth(&cfg, a, cli.common.seed)?,
    };
    match &cli.common.out {
        Some(p) => fs::write(p, text).map_err(|e| CliError::Usage(format!("{}: {e}", p.display()))),
        None => stdout
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Usage(format!("stdout: {e}"))),
    }
}

fn span(file: &RangeFile) -> (f64, f64) {
    file.samples
        .iter()
        .fold((f64::INFINITY, 0.0), |(lo, hi), s| (lo.min(s.distance), hi.max(s.distance)))
}

fn resonance(a: &ResonanceArgs) -> Result<String, CliError> {
    let spec = LaminateSpec {
        length: a.length,
        young_pzt: a.young_pzt,
        young_metglas: a.young_metglas,
        vol_frac_pzt: a.vol_frac_pzt,
        vol_frac_metglas: 1.0 - a.vol_frac_pzt,
        density_pzt: a.density_pzt,
        density_metglas: a.density_metglas,
        piezo_thickness: a.thickness,
    };
    let mut pairs = vec![("laminate.resonance_hz".to_string(), fmt_num(antenna::resonance_frequency(&spec)?))];
    if let (Some(dv), Some(dh)) = (a.delta_v, a.delta_h) {
        pairs.push((
            "laminate.me_coefficient_v_per_m_per_a_per_m".into(),
            fmt_num(antenna::me_coefficient(dv, dh, a.thickness)?),
        ));
    }
    Ok(write_report(&pairs))
}

fn impedance(cfg: &Config, a: &ImpedanceArgs, seed: u64) -> Result<String, CliError> {
    if !(a.step > 0.0 && a.f_hi >= a.f_lo) {
        return Err(CliError::Usage("--step must be > 0 and --f-hi >= --f-lo".into()));
    }
    let wiring = match a.wiring {
        WiringArg::Series => Wiring::Series,
        WiringArg::Parallel => Wiring::Parallel,
    };
    let n = a.elements.unwrap_or(cfg.n_tx as usize);
    let array = ArraySpec::jittered(&cfg.resonator, n, a.f0_jitter, a.r_jitter, wiring, seed)?;
    let steps = ((a.f_hi - a.f_lo) / a.step + 1e-9).floor() as usize;
    let mut rows = Vec::with_capacity(steps + 1);
    for i in 0..=steps {
        let f = a.f_lo + a.step * i as f64;
        let z = antenna::array_impedance(&array, f, a.drive)?;
        let h = antenna::frequency_response(&array, f)?;
        rows.push(vec![f, z.re, z.im, z.norm(), z.arg().to_degrees(), h.gain, h.phase, h.group_delay]);
    }
    Ok(write_table(
        &["frequency_hz", "z_re_ohm", "z_im_ohm", "z_mag_ohm", "z_phase_deg", "gain", "phase_rad", "group_delay_s"],
        &rows,
    ))
}

fn ber(cfg: &Config, a: &BerArgs, seed: u64) -> Result<String, CliError> {
    if a.spectrum.is_empty() {
        let mut rows = Vec::new();
        for &snr_db in &a.snr_db {
            let snr = 10f64.powf(snr_db / 10.0);
            let ebn0_db = snr_db + 10.0 * (cfg.modem.bit_rate / cfg.modem.tone_spacing).log10();
            let mut row = vec![snr_db, ebn0_db, ber_closed_form(snr, cfg.modem.bit_rate, cfg.modem.tone_spacing)];
            if let Some(n) = a.monte_carlo {
                let r = ber_monte_carlo(&cfg.modem, snr_db, n, seed)?;
                row.extend([r.ber_estimate, r.wilson_95_interval.0, r.wilson_95_interval.1]);
            }
            rows.push(row);
        }
        let mut header = vec!["snr_db", "ebn0_db", "ber_closed_form"];
        if a.monte_carlo.is_some() {
            header.extend(["ber_monte_carlo", "wilson_lo", "wilson_hi"]);
        }
        return Ok(write_table(&header, &rows));
    }

    let mut rows = Vec::new();
    for path in &a.spectrum {
        let file = SpectrumFile::parse(&read(path)?).map_err(in_file(path))?;
        let distance = file
            .distance_m()
            .map_err(in_file(path))?
            .ok_or_else(|| CliError::Usage(format!("{}: missing distance_m metadata", path.display())))?;
        let spectrum = file.to_spectrum().map_err(in_file(path))?;
        for &df in &a.tone_spacings {
            let (snr, p) = modem::ber_at_max_rate(&spectrum, df, cfg.modem.center_frequency).map_err(in_file(path))?;
            let m = modem::max_bitrate_for_ber(&spectrum, a.target_ber, df, cfg.modem.center_frequency)
                .map_err(in_file(path))?;
            rows.push(vec![distance, df, df, 10.0 * snr.log10(), p, m.bit_rate]);
        }
    }
    rows.sort_by(|x, y| x[0].total_cmp(&y[0]).then(x[1].total_cmp(&y[1])));
    Ok(write_table(
        &["distance_m", "tone_spacing_hz", "bit_rate_bps", "snr_db", "ber", "max_bitrate_bps"],
        &rows,
    ))
}

fn synth(cfg: &Config, a: &SynthArgs, seed: u64) -> Result<String, CliError> {
    let mut opts = SynthOptions { jitter_db: a.jitter, ..SynthOptions::default() };
    if let Some(d) = &a.distances {
        opts.distances = d.clone();
    }
    let first = opts.distances.iter().copied().fold(f64::INFINITY, f64::min);
    let last = opts.distances.iter().copied().fold(0.0, f64::max);
    let mut bounds = vec![first];
    bounds.extend(&a.breakpoints);
    bounds.push(last);
    let model = PathLossModel::from_exponents(a.level, &bounds, &a.exponents, a.noise_floor)?;
    let ds = data_io::synth_dataset(&model, cfg, &opts, seed)?;
    if let Some(dir) = &a.out_dir {
        let io = |e: std::io::Error| CliError::Usage(format!("{}: {e}", dir.display()));
        fs::create_dir_all(dir).map_err(io)?;
        fs::write(dir.join("range.csv"), ds.range.write()).map_err(io)?;
        for (spec, d) in ds.spectra.iter().zip(&opts.distances) {
            fs::write(dir.join(format!("spectrum_{}m.csv", fmt_num(*d))), spec.write()).map_err(io)?;
        }
    }
    Ok(ds.range.write())
}
