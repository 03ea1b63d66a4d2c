//! ME laminate resonance and an equivalent-circuit impedance model.
//!
//! One element is a static capacitance `C0` in parallel with a motional
//! series RLC branch. The model is meant for the fundamental length-mode
//! resonance only (roughly 31-41 kHz for the reference laminate); higher
//! modes are not represented.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{domain, Result};

/// Geometry and material constants of a two-phase laminate.
#[derive(Debug, Clone, PartialEq)]
pub struct LaminateSpec {
    /// m
    pub length: f64,
    /// Pa
    pub young_pzt: f64,
    /// Pa
    pub young_metglas: f64,
    pub vol_frac_pzt: f64,
    pub vol_frac_metglas: f64,
    /// kg/m^3
    pub density_pzt: f64,
    /// kg/m^3
    pub density_metglas: f64,
    /// m
    pub piezo_thickness: f64,
}

impl LaminateSpec {
    /// 45.7 mm PZT-5J / Metglas laminate, 150 um piezo layer.
    pub fn reference() -> Self {
        LaminateSpec {
            length: 45.7e-3,
            young_pzt: 51e9,
            young_metglas: 110e9,
            vol_frac_pzt: 0.6,
            vol_frac_metglas: 0.4,
            density_pzt: 7800.0,
            density_metglas: 7180.0,
            piezo_thickness: 150e-6,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("length", self.length),
            ("young_pzt", self.young_pzt),
            ("young_metglas", self.young_metglas),
            ("density_pzt", self.density_pzt),
            ("density_metglas", self.density_metglas),
            ("piezo_thickness", self.piezo_thickness),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return domain(format!("{name} must be > 0, got {v}"));
            }
        }
        for (name, v) in [
            ("vol_frac_pzt", self.vol_frac_pzt),
            ("vol_frac_metglas", self.vol_frac_metglas),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return domain(format!("{name} must lie in [0, 1], got {v}"));
            }
        }
        let sum = self.vol_frac_pzt + self.vol_frac_metglas;
        if (sum - 1.0).abs() > 1e-9 {
            return domain(format!("volume fractions must sum to 1, got {sum}"));
        }
        Ok(())
    }
}

/// Fundamental longitudinal resonance of the laminate, using the
/// volume-averaged stiffness and density.
pub fn resonance_frequency(spec: &LaminateSpec) -> Result<f64> {
    spec.validate()?;
    let stiffness = spec.vol_frac_pzt * spec.young_pzt + spec.vol_frac_metglas * spec.young_metglas;
    let density =
        spec.vol_frac_pzt * spec.density_pzt + spec.vol_frac_metglas * spec.density_metglas;
    Ok((stiffness / density).sqrt() / (2.0 * spec.length))
}

/// ME coupling coefficient: induced field across the piezo layer per unit
/// applied magnetic field, from a finite difference `dV / dH`.
pub fn me_coefficient(delta_voltage: f64, delta_field: f64, piezo_thickness: f64) -> Result<f64> {
    if delta_field == 0.0 || !delta_field.is_finite() {
        return domain("field increment must be non-zero");
    }
    if !(piezo_thickness > 0.0) {
        return domain(format!("piezo thickness must be > 0, got {piezo_thickness}"));
    }
    Ok(delta_voltage / delta_field / piezo_thickness)
}

/// Second-order electrical model of one antenna.
#[derive(Debug, Clone, PartialEq)]
pub struct Resonator {
    /// Small-signal resonance, Hz.
    pub f0: f64,
    pub quality_q: f64,
    /// Motional resistance, i.e. the motional branch impedance at resonance, ohm.
    pub r_resonance: f64,
    /// F
    pub c_static: f64,
    /// Resonance shift per squared drive volt, Hz/V^2. Negative values soften.
    pub softening_coeff: f64,
}

impl Default for Resonator {
    fn default() -> Self {
        Resonator {
            f0: 35_500.0,
            quality_q: 200.0,
            r_resonance: 200.0,
            c_static: 1e-9,
            softening_coeff: 0.0,
        }
    }
}

impl Resonator {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("f0", self.f0),
            ("quality_q", self.quality_q),
            ("r_resonance", self.r_resonance),
            ("c_static", self.c_static),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return domain(format!("resonator {name} must be > 0, got {v}"));
            }
        }
        if !self.softening_coeff.is_finite() {
            return domain("softening coefficient must be finite");
        }
        Ok(())
    }

    /// Resonance under drive: `f0 + k * V^2`.
    pub fn effective_f0(&self, drive_amplitude: f64) -> Result<f64> {
        if !(drive_amplitude >= 0.0) {
            return domain(format!("drive amplitude must be >= 0, got {drive_amplitude}"));
        }
        let f = self.f0 + self.softening_coeff * drive_amplitude * drive_amplitude;
        if f <= 0.0 {
            return domain(format!(
                "drive {drive_amplitude} V pushes the resonance to {f} Hz"
            ));
        }
        Ok(f)
    }

    fn motional(&self, frequency: f64, drive_amplitude: f64) -> Result<Complex64> {
        self.validate()?;
        if !(frequency > 0.0 && frequency.is_finite()) {
            return domain(format!("frequency must be > 0, got {frequency}"));
        }
        let w0 = 2.0 * PI * self.effective_f0(drive_amplitude)?;
        let w = 2.0 * PI * frequency;
        let l = self.quality_q * self.r_resonance / w0;
        let c = 1.0 / (w0 * w0 * l);
        Ok(Complex64::new(self.r_resonance, w * l - 1.0 / (w * c)))
    }
}

/// Complex impedance of one element at `frequency` under a drive amplitude.
pub fn impedance(resonator: &Resonator, frequency: f64, drive_amplitude: f64) -> Result<Complex64> {
    let zm = resonator.motional(frequency, drive_amplitude)?;
    let y0 = Complex64::new(0.0, 2.0 * PI * frequency * resonator.c_static);
    Ok(1.0 / (1.0 / zm + y0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Wiring {
    Series,
    Parallel,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ArraySpec {
    pub elements: Vec<Resonator>,
    pub wiring: Wiring,
}

impl ArraySpec {
    pub fn new(elements: Vec<Resonator>, wiring: Wiring) -> Result<Self> {
        let a = ArraySpec { elements, wiring };
        a.validate()?;
        Ok(a)
    }

    /// `n` copies of one resonator.
    pub fn uniform(element: Resonator, n: usize, wiring: Wiring) -> Result<Self> {
        Self::new(vec![element; n], wiring)
    }

    /// `n` elements with `f0` and `r_resonance` drawn uniformly within
    /// `+-f0_jitter` and `+-r_jitter` (fractions) of the base element.
    pub fn jittered(
        base: &Resonator,
        n: usize,
        f0_jitter: f64,
        r_jitter: f64,
        wiring: Wiring,
        seed: u64,
    ) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let elements = (0..n)
            .map(|_| {
                let mut e = base.clone();
                if f0_jitter > 0.0 {
                    e.f0 *= 1.0 + rng.gen_range(-f0_jitter..=f0_jitter);
                }
                if r_jitter > 0.0 {
                    e.r_resonance *= 1.0 + rng.gen_range(-r_jitter..=r_jitter);
                }
                e
            })
            .collect();
        Self::new(elements, wiring)
    }

    pub fn n_elements(&self) -> usize {
        self.elements.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.elements.is_empty() {
            return domain("array has no elements");
        }
        self.elements.iter().try_for_each(Resonator::validate)
    }
}

/// Series: sum of element impedances. Parallel: reciprocal of the summed
/// admittances.
pub fn array_impedance(array: &ArraySpec, frequency: f64, drive_amplitude: f64) -> Result<Complex64> {
    array.validate()?;
    let mut acc = Complex64::new(0.0, 0.0);
    for e in &array.elements {
        let z = impedance(e, frequency, drive_amplitude)?;
        acc += match array.wiring {
            Wiring::Series => z,
            Wiring::Parallel => 1.0 / z,
        };
    }
    Ok(match array.wiring {
        Wiring::Series => acc,
        Wiring::Parallel => 1.0 / acc,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrequencyResponse {
    pub gain: f64,
    /// rad
    pub phase: f64,
    /// s
    pub group_delay: f64,
}

/// Step used for the central-difference group delay, Hz.
pub const GROUP_DELAY_STEP_HZ: f64 = 1.0;

/// Sum of motional admittances normalized by the sum at exact resonance, so
/// an array of identical elements has unit gain at f0 (zero drive).
pub fn transfer(array: &ArraySpec, frequency: f64) -> Result<Complex64> {
    let mut num = Complex64::new(0.0, 0.0);
    let mut den = 0.0;
    for e in &array.elements {
        num += 1.0 / e.motional(frequency, 0.0)?;
        den += 1.0 / e.r_resonance;
    }
    Ok(num / den)
}

/// Transfer of the radiating (motional) branch at zero drive.
pub fn frequency_response(array: &ArraySpec, frequency: f64) -> Result<FrequencyResponse> {
    array.validate()?;
    if frequency <= GROUP_DELAY_STEP_HZ {
        return domain(format!("frequency must exceed {GROUP_DELAY_STEP_HZ} Hz"));
    }
    let h = transfer(array, frequency)?;
    let hi = transfer(array, frequency + GROUP_DELAY_STEP_HZ)?;
    let lo = transfer(array, frequency - GROUP_DELAY_STEP_HZ)?;
    // arg of the ratio keeps the difference unwrapped
    let dphi = (hi / lo).arg();
    Ok(FrequencyResponse {
        gain: h.norm(),
        phase: h.arg(),
        group_delay: -dphi / (2.0 * PI * 2.0 * GROUP_DELAY_STEP_HZ),
    })
}

/// Frequency of minimum `|Z|` of the array in `[f_lo, f_hi]`: a grid scan
/// followed by golden-section refinement around the best grid point.
pub fn impedance_minimum(array: &ArraySpec, drive_amplitude: f64, f_lo: f64, f_hi: f64) -> Result<f64> {
    if !(f_lo > 0.0 && f_hi > f_lo) {
        return domain(format!("invalid search band [{f_lo}, {f_hi}]"));
    }
    let mag = |f: f64| array_impedance(array, f, drive_amplitude).map(|z| z.norm());
    const GRID: usize = 4000;
    let step = (f_hi - f_lo) / GRID as f64;
    let mut best = (f_lo, mag(f_lo)?);
    for i in 1..=GRID {
        let f = f_lo + step * i as f64;
        let m = mag(f)?;
        if m < best.1 {
            best = (f, m);
        }
    }
    let (mut a, mut b) = ((best.0 - step).max(f_lo), (best.0 + step).min(f_hi));
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut mc, mut md) = (mag(c)?, mag(d)?);
    while b - a > 1e-6 {
        if mc < md {
            b = d;
            d = c;
            md = mc;
            c = b - g * (b - a);
            mc = mag(c)?;
        } else {
            a = c;
            c = d;
            mc = md;
            d = a + g * (b - a);
            md = mag(d)?;
        }
    }
    Ok(0.5 * (a + b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn reference_laminate_resonance() {
        let f = resonance_frequency(&LaminateSpec::reference()).unwrap();
        assert!((f - 34_400.0).abs() / 34_400.0 < 0.005, "{f}");
        assert!((f - 35_000.0).abs() / 35_000.0 < 0.03);
    }

    #[test]
    fn half_length_doubles_resonance() {
        let spec = LaminateSpec::reference();
        let mut half = spec.clone();
        half.length /= 2.0;
        assert_relative_eq!(
            resonance_frequency(&half).unwrap(),
            2.0 * resonance_frequency(&spec).unwrap(),
            max_relative = 1e-14
        );
    }

    #[test]
    fn single_material_limit() {
        let mut spec = LaminateSpec::reference();
        spec.vol_frac_pzt = 1.0;
        spec.vol_frac_metglas = 0.0;
        let expect = (51e9f64 / 7800.0).sqrt() / (2.0 * spec.length);
        assert_relative_eq!(resonance_frequency(&spec).unwrap(), expect, max_relative = 1e-14);
    }

    #[test]
    fn laminate_validation() {
        let mut spec = LaminateSpec::reference();
        spec.length = 0.0;
        assert!(resonance_frequency(&spec).is_err());
        let mut spec = LaminateSpec::reference();
        spec.vol_frac_pzt = 0.7;
        assert!(resonance_frequency(&spec).is_err());
    }

    #[test]
    fn me_coefficient_arithmetic() {
        assert_relative_eq!(me_coefficient(1.0, 1.0, 150e-6).unwrap(), 6666.666_666_666_667, max_relative = 1e-12);
        assert_eq!(me_coefficient(0.0, 1.0, 150e-6).unwrap(), 0.0);
        // 0.5 / 2 / 150e-6 = 1666.67 by hand
        assert_relative_eq!(me_coefficient(0.5, 2.0, 150e-6).unwrap(), 5000.0 / 3.0, max_relative = 1e-12);
        assert!(me_coefficient(1.0, 0.0, 150e-6).is_err());
        assert!(me_coefficient(1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn motional_branch_is_resistive_at_f0() {
        let r = Resonator::default();
        let zm = r.motional(r.f0, 0.0).unwrap();
        assert_relative_eq!(zm.re, r.r_resonance);
        assert!(zm.im.abs() < 1e-9 * r.r_resonance);
        // neighbours have larger |Zm|
        assert!(r.motional(r.f0 * 0.999, 0.0).unwrap().norm() > zm.norm());
        assert!(r.motional(r.f0 * 1.001, 0.0).unwrap().norm() > zm.norm());
    }

    #[test]
    fn capacitive_far_below_resonance() {
        let r = Resonator::default();
        let z = impedance(&r, 1_000.0, 0.0).unwrap();
        assert!((z.arg().to_degrees() + 90.0).abs() < 1.0, "{}", z.arg().to_degrees());
    }

    #[test]
    fn softening_moves_dip_down() {
        let r = Resonator {
            softening_coeff: -20.0,
            ..Resonator::default()
        };
        let a = ArraySpec::uniform(r, 1, Wiring::Parallel).unwrap();
        let f_quiet = impedance_minimum(&a, 0.0, 31e3, 41e3).unwrap();
        let f_loud = impedance_minimum(&a, 10.0, 31e3, 41e3).unwrap();
        assert!(f_loud < f_quiet, "{f_loud} vs {f_quiet}");
        assert!(a.elements[0].effective_f0(-1.0).is_err());
    }

    #[test]
    fn identical_pairs() {
        let e = Resonator::default();
        for f in [31e3, 35e3, 35.5e3, 36e3, 41e3] {
            let z1 = impedance(&e, f, 0.0).unwrap();
            let s = array_impedance(&ArraySpec::uniform(e.clone(), 2, Wiring::Series).unwrap(), f, 0.0).unwrap();
            let p = array_impedance(&ArraySpec::uniform(e.clone(), 2, Wiring::Parallel).unwrap(), f, 0.0).unwrap();
            assert!((s - 2.0 * z1).norm() <= 1e-12 * z1.norm());
            assert!((p - 0.5 * z1).norm() <= 1e-12 * z1.norm());
        }
    }

    #[test]
    fn empty_array_rejected() {
        assert!(ArraySpec::new(vec![], Wiring::Series).is_err());
    }

    fn admittance_width(array: &ArraySpec) -> (f64, f64) {
        // contiguous -3 dB region of |Y| around its maximum, 0.5 Hz sweep
        let fs: Vec<f64> = (0..=20_000).map(|i| 31e3 + 0.5 * i as f64).collect();
        let y: Vec<f64> = fs
            .iter()
            .map(|&f| 1.0 / array_impedance(array, f, 0.0).unwrap().norm())
            .collect();
        let (imax, ymax) = y
            .iter()
            .enumerate()
            .fold((0, 0.0), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc });
        let thr = ymax / 2f64.sqrt();
        let mut lo = imax;
        while lo > 0 && y[lo - 1] >= thr {
            lo -= 1;
        }
        let mut hi = imax;
        while hi + 1 < y.len() && y[hi + 1] >= thr {
            hi += 1;
        }
        (fs[imax], fs[hi] - fs[lo])
    }

    #[test]
    fn jittered_parallel_array_is_broader() {
        let base = Resonator::default();
        let array = ArraySpec::jittered(&base, 15, 0.01, 0.0, Wiring::Parallel, 7).unwrap();
        let f_min = impedance_minimum(&array, 0.0, 31e3, 41e3).unwrap();
        let lo = array.elements.iter().map(|e| e.f0).fold(f64::INFINITY, f64::min);
        let hi = array.elements.iter().map(|e| e.f0).fold(0.0, f64::max);
        assert!(f_min >= lo && f_min <= hi, "{f_min} not in [{lo}, {hi}]");

        let (_, array_bw) = admittance_width(&array);
        for e in &array.elements {
            let single = ArraySpec::uniform(e.clone(), 1, Wiring::Parallel).unwrap();
            let (_, bw) = admittance_width(&single);
            assert!(array_bw > bw, "array {array_bw} Hz vs element {bw} Hz");
        }
    }

    #[test]
    fn phase_swings_through_resonance() {
        let r = Resonator::default();
        let a = ArraySpec::uniform(r.clone(), 1, Wiring::Parallel).unwrap();
        let bw = r.f0 / r.quality_q;
        let below = frequency_response(&a, r.f0 - 5.0 * bw).unwrap();
        let above = frequency_response(&a, r.f0 + 5.0 * bw).unwrap();
        let swing = below.phase - above.phase;
        assert!((swing - PI).abs() < 0.25, "{swing}");
        let at = frequency_response(&a, r.f0).unwrap();
        assert_relative_eq!(at.gain, 1.0, max_relative = 1e-12);
        assert!(at.group_delay > 0.0);
        // group delay of a second-order resonance at f0 is Q / (pi f0)
        assert_relative_eq!(at.group_delay, r.quality_q / (PI * r.f0), max_relative = 1e-3);
        for df in [-200.0, -50.0, 50.0, 200.0] {
            assert!(frequency_response(&a, r.f0 + df).unwrap().gain < at.gain);
        }
    }

    fn resonator_strategy() -> impl Strategy<Value = Resonator> {
        (33e3f64..38e3, 20.0f64..500.0, 10.0f64..5e3, 1e-10f64..1e-8).prop_map(|(f0, q, r, c)| Resonator {
            f0,
            quality_q: q,
            r_resonance: r,
            c_static: c,
            softening_coeff: 0.0,
        })
    }

    proptest! {
        #[test]
        fn composition_is_exact(elements in prop::collection::vec(resonator_strategy(), 1..16), f in 31e3f64..41e3) {
            let zs: Vec<Complex64> = elements.iter().map(|e| impedance(e, f, 0.0).unwrap()).collect();
            let series = array_impedance(&ArraySpec::new(elements.clone(), Wiring::Series).unwrap(), f, 0.0).unwrap();
            let parallel = array_impedance(&ArraySpec::new(elements, Wiring::Parallel).unwrap(), f, 0.0).unwrap();
            let sum: Complex64 = zs.iter().sum();
            let rsum: Complex64 = zs.iter().map(|z| 1.0 / z).sum();
            prop_assert!((series - sum).norm() <= 1e-9 * sum.norm());
            prop_assert!((parallel - 1.0 / rsum).norm() <= 1e-9 * parallel.norm());
        }

        #[test]
        fn resonance_scalings(length in 1e-3f64..0.2, k in 0.25f64..4.0) {
            let mut spec = LaminateSpec::reference();
            spec.length = length;
            let f = resonance_frequency(&spec).unwrap();
            let mut longer = spec.clone();
            longer.length *= k;
            prop_assert!((resonance_frequency(&longer).unwrap() - f / k).abs() <= 1e-12 * f);
            let mut stiffer = spec.clone();
            stiffer.young_pzt *= k;
            stiffer.young_metglas *= k;
            prop_assert!((resonance_frequency(&stiffer).unwrap() - f * k.sqrt()).abs() <= 1e-12 * f);
            let mut denser = spec;
            denser.density_pzt *= k;
            denser.density_metglas *= k;
            prop_assert!((resonance_frequency(&denser).unwrap() - f / k.sqrt()).abs() <= 1e-12 * f);
        }

        #[test]
        fn zero_softening_is_drive_independent(r in resonator_strategy(), f in 31e3f64..41e3, v in 0.0f64..50.0) {
            prop_assert_eq!(impedance(&r, f, 0.0).unwrap(), impedance(&r, f, v).unwrap());
        }
    }

    #[test]
    fn dip_frequency_non_increasing_in_drive() {
        let r = Resonator {
            softening_coeff: -5.0,
            ..Resonator::default()
        };
        let a = ArraySpec::uniform(r, 3, Wiring::Series).unwrap();
        let mut last = f64::INFINITY;
        for v in [0.0, 2.0, 4.0, 6.0, 8.0, 10.0] {
            let f = impedance_minimum(&a, v, 31e3, 41e3).unwrap();
            assert!(f <= last + 1e-6, "drive {v}: {f} > {last}");
            last = f;
        }
    }
}
