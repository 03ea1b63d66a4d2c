//! Binary FSK over AWGN with a noncoherent tone-energy detector.
//!
//! Tones sit symmetrically around the centre frequency:
//! `f1 = fc - df/2` carries bit 0 and `f2 = fc + df/2` carries bit 1. Bit `k`
//! occupies samples `floor(k fs / Rb) .. floor((k + 1) fs / Rb)`, so
//! fractional samples per bit accumulate instead of being truncated.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use rustfft::FftPlanner;

use crate::antenna::{self, ArraySpec};
use crate::capacity::SnrSpectrum;
use crate::error::{domain, Result};

/// Two-sided 97.5 % standard normal quantile.
const Z_95: f64 = 1.959_963_984_540_054;

/// Bits simulated per independent random stream in [`ber_monte_carlo`].
pub const MC_CHUNK_BITS: usize = 2048;

#[derive(Debug, Clone, PartialEq)]
pub struct BfskConfig {
    /// Hz
    pub center_frequency: f64,
    /// Hz
    pub tone_spacing: f64,
    /// bits/s
    pub bit_rate: f64,
    /// samples/s
    pub sample_rate: f64,
    pub amplitude: f64,
    /// Continuous-phase keying (default). When false each tone keeps its own
    /// free-running phase and the waveform jumps at bit boundaries.
    pub phase_continuous: bool,
    /// Require `tone_spacing = k * bit_rate` for integer `k >= 1`.
    pub orthogonal: bool,
}

impl Default for BfskConfig {
    fn default() -> Self {
        BfskConfig {
            center_frequency: 34_629.26,
            tone_spacing: 100.0,
            bit_rate: 100.0,
            sample_rate: 1e6,
            amplitude: 1.0,
            phase_continuous: true,
            orthogonal: true,
        }
    }
}

impl BfskConfig {
    pub fn f1(&self) -> f64 {
        self.center_frequency - self.tone_spacing / 2.0
    }

    pub fn f2(&self) -> f64 {
        self.center_frequency + self.tone_spacing / 2.0
    }

    pub fn samples_per_bit(&self) -> f64 {
        self.sample_rate / self.bit_rate
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("center frequency", self.center_frequency),
            ("tone spacing", self.tone_spacing),
            ("bit rate", self.bit_rate),
            ("sample rate", self.sample_rate),
            ("amplitude", self.amplitude),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return domain(format!("{name} must be > 0, got {v}"));
            }
        }
        if self.f1() <= 0.0 {
            return domain(format!("lower tone {} Hz is not positive", self.f1()));
        }
        if self.sample_rate <= 2.0 * self.f2() {
            return domain(format!(
                "sample rate {} violates Nyquist for the upper tone {} Hz",
                self.sample_rate,
                self.f2()
            ));
        }
        if self.samples_per_bit() < 1.0 {
            return domain("bit rate exceeds the sample rate");
        }
        if self.orthogonal {
            let k = self.tone_spacing / self.bit_rate;
            if k < 1.0 - 1e-9 || (k - k.round()).abs() > 1e-9 {
                return domain(format!(
                    "tone spacing {} Hz is not an integer multiple of the bit rate {} bit/s",
                    self.tone_spacing, self.bit_rate
                ));
            }
        }
        Ok(())
    }

    /// First sample of bit `k`.
    pub fn bit_boundary(&self, k: usize) -> usize {
        ((k as f64 * self.sample_rate) / self.bit_rate + 1e-9).floor() as usize
    }

    fn tone(&self, bit: bool) -> f64 {
        if bit {
            self.f2()
        } else {
            self.f1()
        }
    }
}

/// Unwrapped carrier phase of every sample, starting at `phase0`.
pub fn phase_trajectory(config: &BfskConfig, bits: &[bool], phase0: f64) -> Result<Vec<f64>> {
    config.validate()?;
    let total = config.bit_boundary(bits.len());
    let mut out = Vec::with_capacity(total);
    // accumulate whole cycles and the fractional part separately so long
    // waveforms do not lose precision
    let mut cycles = 0.0f64;
    let mut frac = phase0 / (2.0 * PI);
    for (k, &b) in bits.iter().enumerate() {
        let f = config.tone(b);
        let (start, end) = (config.bit_boundary(k), config.bit_boundary(k + 1));
        for i in start..end {
            if config.phase_continuous {
                out.push(2.0 * PI * (cycles + frac));
                frac += f / config.sample_rate;
                let whole = frac.floor();
                cycles += whole;
                frac -= whole;
            } else {
                out.push(2.0 * PI * f * i as f64 / config.sample_rate + phase0);
            }
        }
    }
    Ok(out)
}

/// BFSK waveform for `bits`, starting at carrier phase zero.
pub fn modulate(config: &BfskConfig, bits: &[bool]) -> Result<Vec<f64>> {
    modulate_with_phase(config, bits, 0.0)
}

pub fn modulate_with_phase(config: &BfskConfig, bits: &[bool], phase0: f64) -> Result<Vec<f64>> {
    Ok(phase_trajectory(config, bits, phase0)?
        .into_iter()
        .map(|p| config.amplitude * p.cos())
        .collect())
}

pub fn mean_power(waveform: &[f64]) -> f64 {
    if waveform.is_empty() {
        return 0.0;
    }
    waveform.iter().map(|x| x * x).sum::<f64>() / waveform.len() as f64
}

/// Adds zero-mean white Gaussian noise of the given per-sample variance.
pub fn add_noise(waveform: &[f64], variance: f64, seed: u64) -> Vec<f64> {
    let sigma = variance.max(0.0).sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    waveform
        .iter()
        .map(|&x| {
            let n: f64 = rng.sample(StandardNormal);
            x + sigma * n
        })
        .collect()
}

/// Adds white Gaussian noise so that the measured waveform power over the
/// noise variance equals `10^(snr_db / 10)`. `+inf` returns the input.
pub fn add_awgn(waveform: &[f64], snr_db: f64, seed: u64) -> Vec<f64> {
    if snr_db == f64::INFINITY {
        return waveform.to_vec();
    }
    let variance = mean_power(waveform) / 10f64.powf(snr_db / 10.0);
    add_noise(waveform, variance, seed)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Demodulated {
    pub bits: Vec<bool>,
    /// Trailing samples that did not make up a whole bit.
    pub discarded_samples: usize,
}

fn bin_energy(x: &[f64], frequency: f64, sample_rate: f64) -> f64 {
    let w = 2.0 * PI * frequency / sample_rate;
    let step = Complex64::new(w.cos(), -w.sin());
    let mut rot = Complex64::new(1.0, 0.0);
    let mut acc = Complex64::new(0.0, 0.0);
    for &v in x {
        acc += rot * v;
        rot *= step;
    }
    acc.norm_sqr()
}

/// Per bit window, compares single-bin DFT energies at the two tones and
/// picks the larger. Equal energies decide bit 0.
pub fn demodulate_noncoherent(config: &BfskConfig, waveform: &[f64]) -> Result<Demodulated> {
    config.validate()?;
    let mut bits = Vec::with_capacity((waveform.len() as f64 / config.samples_per_bit()) as usize);
    let mut k = 0;
    loop {
        let (start, end) = (config.bit_boundary(k), config.bit_boundary(k + 1));
        if end > waveform.len() {
            return Ok(Demodulated {
                bits,
                discarded_samples: waveform.len() - start,
            });
        }
        let window = &waveform[start..end];
        let e1 = bin_energy(window, config.f1(), config.sample_rate);
        let e2 = bin_energy(window, config.f2(), config.sample_rate);
        bits.push(e2 > e1);
        k += 1;
    }
}

/// `P_b = 1/2 exp(-(snr / 2) (Rb / df))` with `Eb/N0 = snr * Rb / df`.
pub fn ber_closed_form(snr_linear: f64, bit_rate: f64, tone_spacing: f64) -> f64 {
    0.5 * (-0.5 * snr_linear * bit_rate / tone_spacing).exp()
}

/// Wilson score interval at 95 % confidence.
pub fn wilson_95(errors: u64, n: u64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let n = n as f64;
    let p = errors as f64 / n;
    let z2 = Z_95 * Z_95;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = Z_95 / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

#[derive(Debug, Clone, PartialEq)]
pub struct BerResult {
    pub bit_errors: u64,
    pub bits_sent: u64,
    pub ber_estimate: f64,
    pub wilson_95_interval: (f64, f64),
    pub seed: u64,
    /// SNR the run was made at, dB.
    pub snr_db: f64,
}

impl BerResult {
    pub fn contains(&self, p: f64) -> bool {
        self.wilson_95_interval.0 <= p && p <= self.wilson_95_interval.1
    }
}

/// Optional impairments for [`ber_monte_carlo_with`].
#[derive(Debug, Clone, Default)]
pub struct ChannelOptions {
    /// Pass the waveform through the array's motional response at the
    /// transmitter (before noise) and again at the receiver (after noise).
    pub antenna: Option<ArraySpec>,
}

/// Monte Carlo BER: random bits, modulate, add AWGN, demodulate.
///
/// `snr_db` is the band SNR; the noise is set so that
/// `Eb/N0 = snr * Rb / df`, which makes the estimate directly comparable
/// with [`ber_closed_form`].
///
/// Bits are simulated in chunks of [`MC_CHUNK_BITS`]. Chunk `i` draws its
/// bits and its noise seed from `ChaCha8Rng::seed_from_u64(seed)` switched to
/// stream `i`, so the result does not depend on scheduling.
pub fn ber_monte_carlo(config: &BfskConfig, snr_db: f64, n_bits: usize, seed: u64) -> Result<BerResult> {
    ber_monte_carlo_with(config, snr_db, n_bits, seed, &ChannelOptions::default())
}

pub fn ber_monte_carlo_with(
    config: &BfskConfig,
    snr_db: f64,
    n_bits: usize,
    seed: u64,
    options: &ChannelOptions,
) -> Result<BerResult> {
    config.validate()?;
    if n_bits < 1000 {
        return domain(format!("need at least 1000 bits, got {n_bits}"));
    }
    if let Some(a) = &options.antenna {
        a.validate()?;
    }
    let ebn0 = 10f64.powf(snr_db / 10.0) * config.bit_rate / config.tone_spacing;
    // Eb/N0 = (A^2/2)/sigma^2 * (fs/Rb) / 2 for real white noise
    let sample_snr_db = 10.0 * (2.0 * ebn0 / config.samples_per_bit()).log10();

    let n_chunks = n_bits.div_ceil(MC_CHUNK_BITS);
    let errors = (0..n_chunks)
        .into_par_iter()
        .map(|i| {
            let len = MC_CHUNK_BITS.min(n_bits - i * MC_CHUNK_BITS);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let bits: Vec<bool> = (0..len).map(|_| rng.gen()).collect();
            let noise_seed: u64 = rng.gen();
            let mut wave = modulate(config, &bits)?;
            if let Some(a) = &options.antenna {
                wave = apply_response(&wave, config.sample_rate, a)?;
            }
            let mut rx = add_awgn(&wave, sample_snr_db, noise_seed);
            if let Some(a) = &options.antenna {
                rx = apply_response(&rx, config.sample_rate, a)?;
            }
            let out = demodulate_noncoherent(config, &rx)?;
            Ok(bits.iter().zip(&out.bits).filter(|(a, b)| a != b).count() as u64)
        })
        .collect::<Result<Vec<u64>>>()?
        .into_iter()
        .sum::<u64>();

    let n = n_bits as u64;
    Ok(BerResult {
        bit_errors: errors,
        bits_sent: n,
        ber_estimate: errors as f64 / n as f64,
        wilson_95_interval: wilson_95(errors, n),
        seed,
        snr_db,
    })
}

/// Filters a real waveform through the array's motional transfer function
/// (circular, via FFT).
pub fn apply_response(waveform: &[f64], sample_rate: f64, array: &ArraySpec) -> Result<Vec<f64>> {
    let n = waveform.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut planner = FftPlanner::<f64>::new();
    let mut buf: Vec<Complex64> = waveform.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    planner.plan_fft_forward(n).process(&mut buf);
    buf[0] = Complex64::new(0.0, 0.0);
    for k in 1..=n / 2 {
        let h = antenna::transfer(array, k as f64 * sample_rate / n as f64)?;
        buf[k] *= h;
        if n - k != k {
            buf[n - k] *= h.conj();
        }
    }
    planner.plan_fft_inverse(n).process(&mut buf);
    Ok(buf.iter().map(|c| c.re / n as f64).collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaxBitrate {
    /// Highest rate in `(0, df]` meeting the target, bits/s. Zero when
    /// infeasible.
    pub bit_rate: f64,
    /// Linear SNR used (the weaker tone).
    pub snr_linear: f64,
    /// Rate at which [`ber_closed_form`] equals the target exactly; infinite
    /// when the SNR is zero.
    pub threshold_rate: f64,
    /// The returned rate is the orthogonality limit `df`.
    pub capped: bool,
    pub feasible: bool,
}

/// Highest bit rate `Rb <= df` for which [`ber_closed_form`] at the weaker
/// of the two tones `fc +- df/2` does not exceed `target_ber`.
///
/// Solving the closed form for the rate gives
/// `Rb* = 2 df ln(1 / (2 P_b)) / snr`. Because the closed form falls as
/// `Rb / df` grows, every rate in `[Rb*, df]` meets the target, so the
/// answer is `df` whenever `Rb* <= df` and there is none otherwise.
/// A target of 0.5 or more is met by any rate.
pub fn max_bitrate_for_ber(
    spectrum: &SnrSpectrum,
    target_ber: f64,
    tone_spacing: f64,
    center_frequency: f64,
) -> Result<MaxBitrate> {
    if !(target_ber > 0.0) || target_ber.is_nan() {
        return domain(format!("target BER must be > 0, got {target_ber}"));
    }
    if !(tone_spacing > 0.0) {
        return domain(format!("tone spacing must be > 0, got {tone_spacing}"));
    }
    let snr = tone_snr(spectrum, tone_spacing, center_frequency)?;
    let threshold_rate = if target_ber >= 0.5 {
        0.0
    } else if snr > 0.0 {
        2.0 * tone_spacing * (1.0 / (2.0 * target_ber)).ln() / snr
    } else {
        f64::INFINITY
    };
    // relative slack so the exact inversion lands on df
    let feasible = threshold_rate <= tone_spacing * (1.0 + 1e-12);
    Ok(MaxBitrate {
        bit_rate: if feasible { tone_spacing } else { 0.0 },
        snr_linear: snr,
        threshold_rate,
        capped: feasible,
        feasible,
    })
}

/// Minimum of the interpolated SNRs at the two tones.
pub fn tone_snr(spectrum: &SnrSpectrum, tone_spacing: f64, center_frequency: f64) -> Result<f64> {
    let (f1, f2) = (center_frequency - tone_spacing / 2.0, center_frequency + tone_spacing / 2.0);
    let s1 = spectrum.snr_at(f1)?;
    let s2 = spectrum.snr_at(f2)?;
    Ok(s1.min(s2))
}

/// Closed-form BER when running at the maximum orthogonal rate `Rb = df`.
pub fn ber_at_max_rate(spectrum: &SnrSpectrum, tone_spacing: f64, center_frequency: f64) -> Result<(f64, f64)> {
    let snr = tone_snr(spectrum, tone_spacing, center_frequency)?;
    Ok((snr, ber_closed_form(snr, tone_spacing, tone_spacing)))
}
