//! Unequal-path Michelson interferometer with a herald arm.
//!
//! The herald path equals the short arm, so a short-arm signal photon is
//! detected in coincidence with its herald and a long-arm one arrives a
//! fixed delay later. Moving the long-arm corner reflector R2 by `d` adds
//! `2d` of round-trip path.

use num_traits::Float;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::coincidence::{DetectionEvent, Detector};
use crate::error::{domain, Error, Result};
use crate::num::{Real, Scalar};
use crate::physics::{visibility, SpectrumSpec};
use crate::source::{Photon, RoutedPair};
use crate::units::{fs_to_seconds, round_fs, seconds_to_fs, travel_fs, Femtos};

#[derive(Debug, Clone, PartialEq)]
pub struct InterferometerGeometry<T> {
    herald_path: T,
    short_path: T,
    long_path: T,
    nominal_wavelength: T,
}

impl<T: Scalar> InterferometerGeometry<T> {
    pub fn new(herald_path: T, short_path: T, long_path: T, nominal_wavelength: T) -> Result<Self> {
        if short_path <= T::zero() {
            return Err(Error::Geometry("short path must be positive".into()));
        }
        if long_path <= short_path {
            return Err(Error::Geometry(format!(
                "long path ({long_path:?}) must exceed short path ({short_path:?})"
            )));
        }
        let tol = short_path.clone() * T::lit(1e-12);
        if (herald_path.clone() - short_path.clone()).abs() > tol {
            return Err(Error::Geometry(format!(
                "herald path ({herald_path:?}) must equal the short path ({short_path:?})"
            )));
        }
        if nominal_wavelength <= T::zero() {
            return Err(Error::Geometry("nominal wavelength must be positive".into()));
        }
        Ok(Self {
            herald_path,
            short_path,
            long_path,
            nominal_wavelength,
        })
    }

    pub fn herald_path(&self) -> &T {
        &self.herald_path
    }

    pub fn short_path(&self) -> &T {
        &self.short_path
    }

    pub fn long_path(&self) -> &T {
        &self.long_path
    }

    pub fn nominal_wavelength(&self) -> &T {
        &self.nominal_wavelength
    }

    /// `ΔL = long - short`.
    pub fn path_difference(&self) -> T {
        self.long_path.clone() - self.short_path.clone()
    }

    /// Arm path difference including the R2 round trip: `ΔL + 2d`.
    pub fn effective_difference(&self, setting: &PhaseSetting<T>) -> T {
        self.path_difference() + (T::one() + T::one()) * setting.r2_displacement.clone()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseSetting<T> {
    /// Signed longitudinal offset of R2, m.
    pub r2_displacement: T,
}

impl<T: Scalar> PhaseSetting<T> {
    pub fn new(r2_displacement: T) -> Self {
        Self { r2_displacement }
    }

    /// Displacements of a wavelength or more are legal but outside a scan.
    pub fn is_flagged(&self, geom: &InterferometerGeometry<T>) -> bool {
        self.r2_displacement.abs() >= geom.nominal_wavelength
    }
}

/// Long-arm phase `φ = 2π (ΔL + 2d)/λ`, reduced to `[0, 2π)`.
pub fn phase<T: Real>(geom: &InterferometerGeometry<T>, setting: &PhaseSetting<T>) -> T {
    let cycles = geom.effective_difference(setting) / geom.nominal_wavelength;
    let two_pi = T::PI() + T::PI();
    let phi = two_pi * (cycles - Float::floor(cycles));
    if phi >= two_pi {
        T::zero()
    } else {
        phi
    }
}

/// Output port probabilities `((1 + V cos φ)/2, (1 - V cos φ)/2)`.
pub fn port_probabilities<T: Real>(phi: T, vis: T) -> Result<(T, T)> {
    if !(vis >= T::zero() && vis <= T::one()) {
        return Err(domain(format!(
            "visibility must lie in [0, 1], got {:?}",
            vis.to_f64_lossy()
        )));
    }
    let two = T::one() + T::one();
    let k = vis * Float::cos(phi);
    Ok(((T::one() + k) / two, (T::one() - k) / two))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EventModel {
    /// The photon takes one arm; the wave in both arms picks the port.
    #[default]
    PilotWave,
    /// Port from interference, arrival time blurred by the coherence time.
    Collapse,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Arm {
    Short,
    Long,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorSpec {
    pub efficiency: f64,
    /// Gaussian timing jitter rms, fs.
    pub jitter_rms: f64,
}

impl DetectorSpec {
    pub const IDEAL: DetectorSpec = DetectorSpec {
        efficiency: 1.0,
        jitter_rms: 0.0,
    };

    pub fn new(efficiency: f64, jitter_rms: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&efficiency) {
            return Err(domain(format!(
                "detector efficiency must lie in [0, 1], got {efficiency}"
            )));
        }
        if !(jitter_rms >= 0.0) || !jitter_rms.is_finite() {
            return Err(domain(format!(
                "detector jitter must be non-negative, got {jitter_rms}"
            )));
        }
        Ok(Self { efficiency, jitter_rms })
    }
}

/// Draws detection for a photon whose flight from emission takes `path_fs`
/// plus `extra_fs` of model-specific timing noise. Always consumes exactly
/// two variates so stream positions do not depend on the outcome.
pub(crate) fn detect(
    emission_time: Femtos,
    photon: &Photon,
    path_fs: f64,
    det: &DetectorSpec,
    rng: &mut impl Rng,
) -> Option<Femtos> {
    let u: f64 = rng.random();
    let z: f64 = StandardNormal.sample(rng);
    (u < det.efficiency).then(|| emission_time + round_fs(photon.extra_delay + path_fs + z * det.jitter_rms))
}

pub fn herald_event_id(pair_id: u64) -> u64 {
    2 * pair_id
}

pub fn signal_event_id(pair_id: u64) -> u64 {
    2 * pair_id + 1
}

/// Herald photon to D3 along the herald path.
pub fn propagate_herald(
    pair: &RoutedPair,
    geom: &InterferometerGeometry<f64>,
    det: &DetectorSpec,
    rng: &mut impl Rng,
) -> Option<DetectionEvent> {
    detect(pair.emission_time, &pair.herald, travel_fs(geom.herald_path), det, rng).map(|time| DetectionEvent {
        event_id: herald_event_id(pair.pair_id),
        detector: Detector::D3,
        time,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignalDetection {
    pub event: DetectionEvent,
    /// Arm whose length set the arrival time.
    pub arm: Arm,
}

/// Interferometer at one phase setting, with the per-setting quantities
/// evaluated once.
#[derive(Debug, Clone)]
pub struct Interferometer {
    geom: InterferometerGeometry<f64>,
    setting: PhaseSetting<f64>,
    model: EventModel,
    phase: f64,
    visibility: f64,
    p_d1: f64,
    p_d2: f64,
    short_fs: f64,
    long_fs: f64,
    /// Rms of the collapse-model arrival envelope, fs.
    envelope_fs: f64,
}

impl Interferometer {
    pub fn new(
        geom: &InterferometerGeometry<f64>,
        setting: &PhaseSetting<f64>,
        model: EventModel,
        spectrum: &SpectrumSpec<f64>,
    ) -> Result<Self> {
        let delay_s = geom.effective_difference(setting) / crate::units::SPEED_OF_LIGHT;
        let vis = visibility(delay_s, spectrum);
        let phi = phase(geom, setting);
        let (p_d1, p_d2) = port_probabilities(phi, vis)?;
        let envelope_fs = match model {
            EventModel::PilotWave => 0.0,
            EventModel::Collapse => {
                let coh = spectrum
                    .coherence()
                    .map_err(|_| domain("the collapse model needs a spectrum with non-zero bandwidth"))?;
                seconds_to_fs(*coh.coherence_time())
            }
        };
        Ok(Self {
            geom: geom.clone(),
            setting: setting.clone(),
            model,
            phase: phi,
            visibility: vis,
            p_d1,
            p_d2,
            short_fs: travel_fs(geom.short_path),
            long_fs: travel_fs(geom.long_path + 2.0 * setting.r2_displacement),
            envelope_fs,
        })
    }

    pub fn geometry(&self) -> &InterferometerGeometry<f64> {
        &self.geom
    }

    pub fn setting(&self) -> &PhaseSetting<f64> {
        &self.setting
    }

    pub fn phase(&self) -> f64 {
        self.phase
    }

    pub fn visibility(&self) -> f64 {
        self.visibility
    }

    pub fn port_probabilities(&self) -> (f64, f64) {
        (self.p_d1, self.p_d2)
    }

    /// Long-arm minus short-arm arrival delay, fs.
    pub fn arm_delay_fs(&self) -> f64 {
        self.long_fs - self.short_fs
    }

    pub fn arm_delay_seconds(&self) -> f64 {
        fs_to_seconds(self.arm_delay_fs())
    }

    /// Signal photon to D1 or D2. Arm and port are independent draws under
    /// both models; they differ in what the arrival time encodes.
    pub fn propagate_signal(
        &self,
        pair: &RoutedPair,
        det: &DetectorSpec,
        rng: &mut impl Rng,
    ) -> Option<SignalDetection> {
        self.propagate_signal_to(pair, det, det, rng)
    }

    /// As [`Self::propagate_signal`] with distinct D1 and D2 detectors.
    pub fn propagate_signal_to(
        &self,
        pair: &RoutedPair,
        d1: &DetectorSpec,
        d2: &DetectorSpec,
        rng: &mut impl Rng,
    ) -> Option<SignalDetection> {
        let arm = if rng.random::<bool>() { Arm::Long } else { Arm::Short };
        let detector = if rng.random::<f64>() < self.p_d1 {
            Detector::D1
        } else {
            Detector::D2
        };
        let envelope: f64 = StandardNormal.sample(rng);
        let mut path_fs = match arm {
            Arm::Short => self.short_fs,
            Arm::Long => self.long_fs,
        };
        if self.model == EventModel::Collapse {
            path_fs += envelope * self.envelope_fs;
        }
        let det = match detector {
            Detector::D1 => d1,
            _ => d2,
        };
        let time = detect(pair.emission_time, &pair.signal, path_fs, det, rng)?;
        Some(SignalDetection {
            event: DetectionEvent {
                event_id: signal_event_id(pair.pair_id),
                detector,
                time,
            },
            arm,
        })
    }
}

/// One-shot form of [`Interferometer::propagate_signal`].
#[allow(clippy::too_many_arguments)]
pub fn propagate_signal(
    pair: &RoutedPair,
    geom: &InterferometerGeometry<f64>,
    setting: &PhaseSetting<f64>,
    model: EventModel,
    det: &DetectorSpec,
    spectrum: &SpectrumSpec<f64>,
    rng: &mut impl Rng,
) -> Result<Option<SignalDetection>> {
    Ok(Interferometer::new(geom, setting, model, spectrum)?.propagate_signal(pair, det, rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{Purpose, Streams};
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    const LAMBDA: f64 = 1.0 / 1_048_576.0; // 2^-20 m
    const DL: f64 = 1.0 / 32.0; // 32768 wavelengths

    fn geom() -> InterferometerGeometry<f64> {
        InterferometerGeometry::new(0.5, 0.5, 0.5 + DL, LAMBDA).unwrap()
    }

    fn routed(id: u64) -> RoutedPair {
        RoutedPair {
            pair_id: id,
            emission_time: 1_000_000 * id as i64,
            herald: Photon {
                frequency: 3e14,
                extra_delay: 12.0,
            },
            signal: Photon {
                frequency: 3e14,
                extra_delay: 40.0,
            },
        }
    }

    fn mono() -> SpectrumSpec<f64> {
        SpectrumSpec::monochromatic(3e14).unwrap()
    }

    #[test]
    fn geometry_invariants() {
        assert!(InterferometerGeometry::new(1.0, 1.0, 0.9, 1e-6).is_err());
        assert!(InterferometerGeometry::new(1.1, 1.0, 1.2, 1e-6).is_err());
        assert!(InterferometerGeometry::new(1.0, 1.0, 1.2, 0.0).is_err());
        let g = geom();
        assert_eq!(g.path_difference(), DL);
        assert!(PhaseSetting::new(2.0 * LAMBDA).is_flagged(&g));
        assert!(!PhaseSetting::new(0.25 * LAMBDA).is_flagged(&g));
    }

    #[test]
    fn quarter_wave_shifts_phase_by_pi() {
        let g = geom();
        assert_eq!(phase(&g, &PhaseSetting::new(0.0)), 0.0);
        assert_eq!(phase(&g, &PhaseSetting::new(LAMBDA / 4.0)), PI);
        assert_eq!(phase(&g, &PhaseSetting::new(LAMBDA / 2.0)), 0.0);
        assert_relative_eq!(phase(&g, &PhaseSetting::new(LAMBDA / 8.0)), PI / 2.0);
        assert_relative_eq!(phase(&g, &PhaseSetting::new(-LAMBDA / 8.0)), 1.5 * PI);
    }

    #[test]
    fn port_probability_examples() {
        assert_eq!(port_probabilities(0.0, 1.0).unwrap(), (1.0, 0.0));
        let (a, b) = port_probabilities(PI / 2.0, 0.3).unwrap();
        assert_relative_eq!(a, 0.5, epsilon = 1e-15);
        assert_relative_eq!(b, 0.5, epsilon = 1e-15);
        let (a, b) = port_probabilities(PI, 0.87).unwrap();
        assert_relative_eq!(a, 0.065, epsilon = 1e-12);
        assert_relative_eq!(b, 0.935, epsilon = 1e-12);
        assert!(port_probabilities(0.0, 1.1).is_err());
        assert!(port_probabilities(0.0, -0.1).is_err());
        assert!(port_probabilities(0.0, f64::NAN).is_err());
    }

    #[test]
    fn detector_spec_validation() {
        assert!(DetectorSpec::new(1.5, 0.0).is_err());
        assert!(DetectorSpec::new(0.5, -1.0).is_err());
        assert!(DetectorSpec::new(0.5, 10.0).is_ok());
    }

    #[test]
    fn pilot_wave_steers_every_photon_at_zero_phase() {
        let ifm = Interferometer::new(&geom(), &PhaseSetting::new(0.0), EventModel::PilotWave, &mono()).unwrap();
        let streams = Streams::new(4);
        for id in 0..5000 {
            let s = ifm
                .propagate_signal(
                    &routed(id),
                    &DetectorSpec::IDEAL,
                    &mut streams.for_pair(id, Purpose::Signal),
                )
                .unwrap();
            assert_eq!(s.event.detector, Detector::D1);
        }
    }

    #[test]
    fn pilot_wave_arrival_times_are_exact() {
        let g = geom();
        let ifm = Interferometer::new(&g, &PhaseSetting::new(0.0), EventModel::PilotWave, &mono()).unwrap();
        let streams = Streams::new(5);
        let short = travel_fs(0.5);
        let long = travel_fs(0.5 + DL);
        let mut seen = [false; 2];
        for id in 0..200 {
            let p = routed(id);
            let s = ifm
                .propagate_signal(&p, &DetectorSpec::IDEAL, &mut streams.for_pair(id, Purpose::Signal))
                .unwrap();
            let h = propagate_herald(&p, &g, &DetectorSpec::IDEAL, &mut streams.for_pair(id, Purpose::Herald)).unwrap();
            assert_eq!(h.time, p.emission_time + round_fs(12.0 + short));
            match s.arm {
                Arm::Short => {
                    seen[0] = true;
                    assert_eq!(s.event.time, p.emission_time + round_fs(40.0 + short));
                    // herald and signal differ only by their extra delays
                    assert_eq!(s.event.time - h.time, 28);
                }
                Arm::Long => {
                    seen[1] = true;
                    assert_eq!(s.event.time, p.emission_time + round_fs(40.0 + long));
                }
            }
        }
        assert_eq!(seen, [true, true]);
        assert_relative_eq!(ifm.arm_delay_fs(), travel_fs(DL), max_relative = 1e-9);
    }

    #[test]
    fn quadrature_phase_splits_ports_evenly_in_both_arms() {
        let ifm = Interferometer::new(
            &geom(),
            &PhaseSetting::new(LAMBDA / 8.0),
            EventModel::PilotWave,
            &mono(),
        )
        .unwrap();
        let streams = Streams::new(6);
        let mut d1 = [0u32; 2];
        let mut n = [0u32; 2];
        for id in 0..100_000 {
            let s = ifm
                .propagate_signal(
                    &routed(id),
                    &DetectorSpec::IDEAL,
                    &mut streams.for_pair(id, Purpose::Signal),
                )
                .unwrap();
            let k = (s.arm == Arm::Long) as usize;
            n[k] += 1;
            d1[k] += (s.event.detector == Detector::D1) as u32;
        }
        let total = (n[0] + n[1]) as f64;
        let frac = (d1[0] + d1[1]) as f64 / total;
        assert!((frac - 0.5).abs() < 3.0 * (0.25 / total).sqrt());
        for k in 0..2 {
            let f = d1[k] as f64 / n[k] as f64;
            assert!((f - 0.5).abs() < 3.0 * (0.25 / n[k] as f64).sqrt(), "arm {k}: {f}");
        }
    }

    #[test]
    fn losses_are_accounted() {
        let g = geom();
        let ifm = Interferometer::new(&g, &PhaseSetting::new(0.0), EventModel::PilotWave, &mono()).unwrap();
        let det = DetectorSpec::new(0.3, 100.0).unwrap();
        let streams = Streams::new(7);
        let n = 20_000;
        let detected = (0..n)
            .filter(|&id| {
                ifm.propagate_signal(&routed(id), &det, &mut streams.for_pair(id, Purpose::Signal))
                    .is_some()
            })
            .count();
        let lost = n as usize - detected;
        assert_eq!(detected + lost, n as usize);
        let f = detected as f64 / n as f64;
        assert!((f - 0.3).abs() < 3.0 * (0.21 / n as f64).sqrt());
        let none = DetectorSpec::new(0.0, 0.0).unwrap();
        assert!((0..1000).all(|id| propagate_herald(
            &routed(id),
            &g,
            &none,
            &mut streams.for_pair(id, Purpose::Herald)
        )
        .is_none()));
    }

    #[test]
    fn collapse_requires_finite_bandwidth() {
        assert!(Interferometer::new(&geom(), &PhaseSetting::new(0.0), EventModel::Collapse, &mono()).is_err());
    }

    proptest! {
        #[test]
        fn port_probabilities_sum_and_swap(phi in 0.0_f64..(2.0 * PI), v in 0.0_f64..=1.0) {
            let (a, b) = port_probabilities(phi, v).unwrap();
            prop_assert!((a + b - 1.0).abs() <= f64::EPSILON);
            let (c, d) = port_probabilities(phi + PI, v).unwrap();
            prop_assert!((a - d).abs() < 1e-15 && (b - c).abs() < 1e-15);
            if v > 0.0 && phi.cos().abs() > 1e-12 {
                prop_assert_eq!(a > b, phi.cos() > 0.0);
            }
        }

        #[test]
        fn quarter_wave_law_generic(short in 0.1_f64..1.0, dl in 1e-3_f64..0.1, lambda in 4e-7_f64..2e-6, d in -1e-6_f64..1e-6) {
            let g = InterferometerGeometry::new(short, short, short + dl, lambda).unwrap();
            let a = phase(&g, &PhaseSetting::new(d));
            let b = phase(&g, &PhaseSetting::new(d + lambda / 4.0));
            let shift = (b - a).rem_euclid(2.0 * PI);
            // phase is resolved to the rounding of (ΔL + 2d)/λ cycles
            let tol = 2.0 * PI * 8.0 * f64::EPSILON * (dl / lambda);
            prop_assert!((shift - PI).abs() <= tol, "shift {}", shift);
        }
    }
}
