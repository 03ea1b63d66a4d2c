//! Link-budget scaling laws and an empirical piecewise path-loss model.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};

use crate::error::{domain, Error, Result};
use crate::medium::FieldRegions;

/// `R_rad(b) / R_rad(a)` from `R_rad ~ 1 / (lambda^2 sqrt(eps_r))`.
pub fn radiation_resistance_ratio_media(
    lambda_a: f64,
    lambda_b: f64,
    eps_r_a: f64,
    eps_r_b: f64,
) -> Result<f64> {
    for (name, v) in [
        ("lambda_a", lambda_a),
        ("lambda_b", lambda_b),
        ("eps_r_a", eps_r_a),
        ("eps_r_b", eps_r_b),
    ] {
        if !(v > 0.0 && v.is_finite()) {
            return domain(format!("{name} must be > 0, got {v}"));
        }
    }
    Ok((lambda_a / lambda_b).powi(2) * (eps_r_a / eps_r_b).sqrt())
}

/// `R_rad(b) / R_rad(a)` for two conductive media at the same frequency,
/// permeability and permittivity, where `R_rad ~ sigma`.
pub fn radiation_resistance_ratio_conductivity(sigma_a: f64, sigma_b: f64) -> Result<f64> {
    if !(sigma_a > 0.0 && sigma_b > 0.0) {
        return domain("conductivities must be > 0");
    }
    Ok(sigma_b / sigma_a)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ArrayGains {
    /// `n_tx^2`: dipole moment grows linearly, radiated power quadratically.
    pub tx_power_gain: u64,
    /// `n_rx`
    pub rx_gain: u64,
    pub combined: u64,
}

/// Ideal array gains, mutual coupling neglected.
pub fn array_gains(n_tx: u32, n_rx: u32) -> Result<ArrayGains> {
    if n_tx == 0 || n_rx == 0 {
        return domain(format!("array sizes must be >= 1, got n_tx={n_tx} n_rx={n_rx}"));
    }
    let tx = u64::from(n_tx).pow(2);
    let rx = u64::from(n_rx);
    Ok(ArrayGains {
        tx_power_gain: tx,
        rx_gain: rx,
        combined: tx * rx,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkScaling {
    pub rad_resistance_ratio: f64,
    pub tx_array_power_gain: f64,
    pub rx_array_gain: f64,
    /// Multiplies the combined array gain; 1 means ideal arrays.
    pub coupling_efficiency: f64,
    pub total_link_factor: f64,
    /// `20 log10(total_link_factor)`, the convention used for the 119 dB figure.
    pub total_link_db: f64,
    /// `10 log10(total_link_factor)`, the usual power-ratio convention.
    pub total_link_db_power: f64,
}

/// Overall improvement `medium_ratio * n_tx^2 * n_rx`.
pub fn total_link_budget(medium_ratio: f64, n_tx: u32, n_rx: u32) -> Result<LinkScaling> {
    total_link_budget_with_coupling(medium_ratio, n_tx, n_rx, 1.0)
}

/// As [`total_link_budget`], derated by a user-supplied coupling efficiency in `[0, 1]`.
pub fn total_link_budget_with_coupling(
    medium_ratio: f64,
    n_tx: u32,
    n_rx: u32,
    coupling_efficiency: f64,
) -> Result<LinkScaling> {
    if !(medium_ratio > 0.0 && medium_ratio.is_finite()) {
        return domain(format!("medium ratio must be > 0, got {medium_ratio}"));
    }
    if !(0.0..=1.0).contains(&coupling_efficiency) {
        return domain(format!(
            "coupling efficiency must lie in [0, 1], got {coupling_efficiency}"
        ));
    }
    let g = array_gains(n_tx, n_rx)?;
    let factor = medium_ratio * g.combined as f64 * coupling_efficiency;
    Ok(LinkScaling {
        rad_resistance_ratio: medium_ratio,
        tx_array_power_gain: g.tx_power_gain as f64,
        rx_array_gain: g.rx_gain as f64,
        coupling_efficiency,
        total_link_factor: factor,
        total_link_db: 20.0 * factor.log10(),
        total_link_db_power: 10.0 * factor.log10(),
    })
}

/// Quality flag attached to a range measurement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RangeFlag {
    Ok,
    Anomaly,
    NoisefloorShift,
}

impl RangeFlag {
    pub fn as_str(self) -> &'static str {
        match self {
            RangeFlag::Ok => "ok",
            RangeFlag::Anomaly => "anomaly",
            RangeFlag::NoisefloorShift => "noisefloor_shift",
        }
    }
}

impl fmt::Display for RangeFlag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RangeFlag {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "ok" => Ok(RangeFlag::Ok),
            "anomaly" => Ok(RangeFlag::Anomaly),
            "noisefloor_shift" => Ok(RangeFlag::NoisefloorShift),
            other => Err(format!(
                "unknown flag '{other}' (expected ok, anomaly or noisefloor_shift)"
            )),
        }
    }
}

/// Peak received SNR at one transmitter-receiver distance.
#[derive(Debug, Clone, PartialEq)]
pub struct RangeSample {
    /// m
    pub distance: f64,
    /// dB
    pub peak_snr: f64,
    /// Hz
    pub frequency_at_peak: f64,
    pub flag: RangeFlag,
    pub label: String,
}

impl RangeSample {
    pub fn new(distance: f64, peak_snr: f64, frequency_at_peak: f64) -> Self {
        RangeSample {
            distance,
            peak_snr,
            frequency_at_peak,
            flag: RangeFlag::Ok,
            label: String::new(),
        }
    }
}

/// One power-law segment: `SNR(r) = level_at_rmin - 10 n log10(r / r_min)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub r_min: f64,
    pub r_max: f64,
    pub exponent: f64,
    /// dB
    pub level_at_rmin: f64,
}

impl Segment {
    fn eval(&self, distance: f64) -> f64 {
        self.level_at_rmin - 10.0 * self.exponent * (distance / self.r_min).log10()
    }
}

/// Continuous piecewise power-law SNR-vs-distance model.
#[derive(Debug, Clone, PartialEq)]
pub struct PathLossModel {
    pub segments: Vec<Segment>,
    /// Receiver noise reference the SNRs are relative to, dBV.
    pub noise_floor: f64,
    /// RMS residual of the fit, dB. Zero for hand-built models.
    pub rms_residual_db: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnrPrediction {
    pub snr_db: f64,
    /// The distance lies outside the span the model was built on.
    pub extrapolated: bool,
}

impl PathLossModel {
    /// Builds a continuous model from a start level, segment boundaries
    /// (`exponents.len() + 1` distances) and per-segment exponents.
    pub fn from_exponents(level_at_start: f64, boundaries: &[f64], exponents: &[f64], noise_floor: f64) -> Result<Self> {
        if boundaries.len() != exponents.len() + 1 || exponents.is_empty() {
            return domain("need one more boundary than exponents");
        }
        if boundaries[0] <= 0.0 || boundaries.windows(2).any(|w| w[1] <= w[0]) {
            return domain("boundaries must be positive and strictly increasing");
        }
        if exponents.iter().any(|n| !n.is_finite()) {
            return domain("exponents must be finite");
        }
        let mut level = level_at_start;
        let mut segments = Vec::with_capacity(exponents.len());
        for (w, &n) in boundaries.windows(2).zip(exponents) {
            let seg = Segment {
                r_min: w[0],
                r_max: w[1],
                exponent: n,
                level_at_rmin: level,
            };
            level = seg.eval(w[1]);
            segments.push(seg);
        }
        Ok(PathLossModel {
            segments,
            noise_floor,
            rms_residual_db: 0.0,
        })
    }

    pub fn span(&self) -> (f64, f64) {
        (
            self.segments[0].r_min,
            self.segments[self.segments.len() - 1].r_max,
        )
    }

    pub fn exponents(&self) -> Vec<f64> {
        self.segments.iter().map(|s| s.exponent).collect()
    }
}

/// Piecewise log-linear SNR at `distance`. Outside the span the first or
/// last segment is extended and the result is flagged.
pub fn predict_snr(model: &PathLossModel, distance: f64) -> Result<SnrPrediction> {
    if !(distance > 0.0 && distance.is_finite()) {
        return domain(format!("distance must be > 0, got {distance}"));
    }
    if model.segments.is_empty() {
        return domain("model has no segments");
    }
    let (lo, hi) = model.span();
    let seg = model
        .segments
        .iter()
        .find(|s| distance < s.r_max)
        .unwrap_or(&model.segments[model.segments.len() - 1]);
    Ok(SnrPrediction {
        snr_db: seg.eval(distance),
        extrapolated: distance < lo || distance > hi,
    })
}

/// Candidate breakpoints from the field-region boundaries.
pub fn region_breakpoints(regions: &FieldRegions) -> Vec<f64> {
    vec![
        regions.reactive_near_limit,
        regions.radiative_near_limit,
        regions.transition_limit,
    ]
}

/// Fits a continuous piecewise power law with knots at `breakpoints`.
///
/// The span runs from the nearest to the farthest sample. Each segment needs
/// at least two samples. All samples are used; see [`fit_path_loss_masked`]
/// to leave flagged points out.
pub fn fit_path_loss(samples: &[RangeSample], breakpoints: &[f64]) -> Result<PathLossModel> {
    fit_path_loss_masked(samples, breakpoints, &vec![false; samples.len()])
}

/// [`fit_path_loss`] with an exclusion mask (`true` = leave out).
pub fn fit_path_loss_masked(
    samples: &[RangeSample],
    breakpoints: &[f64],
    exclude: &[bool],
) -> Result<PathLossModel> {
    if exclude.len() != samples.len() {
        return domain("exclusion mask length differs from sample count");
    }
    let used: Vec<&RangeSample> = samples
        .iter()
        .zip(exclude)
        .filter(|(_, &x)| !x)
        .map(|(s, _)| s)
        .collect();
    if let Some(s) = used.iter().find(|s| !(s.distance > 0.0) || !s.peak_snr.is_finite()) {
        return domain(format!("invalid sample at distance {} m", s.distance));
    }
    if used.len() < 2 {
        return domain("need at least two samples");
    }
    let r_start = used.iter().map(|s| s.distance).fold(f64::INFINITY, f64::min);
    let r_end = used.iter().map(|s| s.distance).fold(0.0, f64::max);
    let mut bounds = vec![r_start];
    for &b in breakpoints {
        if b <= *bounds.last().unwrap() || b >= r_end {
            return domain(format!(
                "breakpoint {b} m must be increasing and inside ({r_start}, {r_end}) m"
            ));
        }
        bounds.push(b);
    }
    bounds.push(r_end);
    let n_seg = bounds.len() - 1;

    let segment_of = |d: f64| breakpoints.iter().filter(|&&b| d >= b).count();
    for i in 0..n_seg {
        let count = used.iter().filter(|s| segment_of(s.distance) == i).count();
        if count < 2 {
            return Err(Error::Underdetermined {
                index: i,
                r_min: bounds[i],
                r_max: bounds[i + 1],
                count,
            });
        }
    }

    // Unknowns: level at r_start, then one exponent per segment. Each
    // exponent acts on the part of log10(r / r_start) lying inside its segment.
    let logs: Vec<f64> = bounds.iter().map(|b| b.log10()).collect();
    let a = DMatrix::from_fn(used.len(), n_seg + 1, |row, col| {
        if col == 0 {
            return 1.0;
        }
        let x = used[row].distance.log10();
        let (x0, x1) = (logs[col - 1], logs[col]);
        -10.0 * (x - x0).clamp(0.0, x1 - x0)
    });
    let y = DVector::from_iterator(used.len(), used.iter().map(|s| s.peak_snr));
    let svd = a.clone().svd(true, true);
    let p = svd
        .solve(&y, 1e-12)
        .map_err(|e| Error::Domain(format!("least squares failed: {e}")))?;
    let resid = &a * &p - &y;
    let rms = (resid.norm_squared() / used.len() as f64).sqrt();

    let exps: Vec<f64> = p.iter().skip(1).copied().collect();
    let mut model = PathLossModel::from_exponents(p[0], &bounds, &exps, 0.0)?;
    model.rms_residual_db = rms;
    Ok(model)
}
