use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{domain, Result};
use crate::link_budget::{predict_snr, PathLossModel, RangeFlag, RangeSample};

use super::{fmt_num, Config, RangeFile, SpectrumFile};

#[derive(Debug, Clone, PartialEq)]
pub struct SynthOptions {
    /// m
    pub distances: Vec<f64>,
    /// Standard deviation of the per-distance level jitter, dB. Zero
    /// reproduces the model exactly.
    pub jitter_db: f64,
    /// Spectrum band and bin width, Hz.
    pub f_lo: f64,
    pub f_hi: f64,
    pub delta_f: f64,
}

impl Default for SynthOptions {
    fn default() -> Self {
        SynthOptions {
            distances: vec![
                1.0, 2.0, 3.0, 5.0, 7.0, 10.0, 15.0, 20.0, 30.0, 50.0, 80.0, 100.0, 150.0, 200.0,
                300.0, 500.0, 730.0,
            ],
            jitter_db: 1.0,
            f_lo: 31_000.0,
            f_hi: 41_000.0,
            delta_f: 10.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthDataset {
    /// One spectrum per distance, in `distances` order.
    pub spectra: Vec<SpectrumFile>,
    pub range: RangeFile,
}

/// Synthetic range sweep and received spectra from a path-loss model.
///
/// The peak SNR at each distance is the model prediction plus Gaussian
/// jitter. Each spectrum is a Lorentzian of the configured resonator's `f0`
/// and `Q` whose peak sits that many dB above the model's noise floor.
pub fn synth_dataset(model: &PathLossModel, config: &Config, options: &SynthOptions, seed: u64) -> Result<SynthDataset> {
    config.resonator.validate()?;
    if !(options.jitter_db >= 0.0) {
        return domain("jitter must be >= 0");
    }
    if !(options.delta_f > 0.0 && options.f_hi > options.f_lo) {
        return domain("invalid spectrum band");
    }
    let normal = Normal::new(0.0, options.jitter_db.max(f64::MIN_POSITIVE))
        .map_err(|e| crate::Error::Domain(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (f0, q) = (config.resonator.f0, config.resonator.quality_q);
    let n_bins = ((options.f_hi - options.f_lo) / options.delta_f + 1e-9).floor() as usize + 1;

    let mut range = RangeFile::default();
    range.metadata.push(("medium".into(), config.medium.label.clone()));
    range.metadata.push(("seed".into(), seed.to_string()));
    let mut spectra = Vec::with_capacity(options.distances.len());
    for &d in &options.distances {
        let jitter = if options.jitter_db > 0.0 { normal.sample(&mut rng) } else { 0.0 };
        let snr = predict_snr(model, d)?.snr_db + jitter;
        range.samples.push(RangeSample {
            distance: d,
            peak_snr: snr,
            frequency_at_peak: f0,
            flag: RangeFlag::Ok,
            label: String::new(),
        });
        let mut spec = SpectrumFile::default();
        spec.set("medium", config.medium.label.clone());
        spec.set("distance_m", fmt_num(d));
        spec.set("noise_floor_dbv", fmt_num(model.noise_floor));
        spec.rows = (0..n_bins)
            .map(|i| {
                let f = options.f_lo + i as f64 * options.delta_f;
                let x = 2.0 * q * (f - f0) / f0;
                (f, model.noise_floor + snr - 10.0 * (1.0 + x * x).log10())
            })
            .collect();
        spectra.push(spec);
    }
    Ok(SynthDataset { spectra, range })
}
