//! Diffraction-grating monochromator: design equations and the two
//! event-level timing models for photon pairs crossing the grating.
//!
//! Rays hitting opposite edges of the illuminated width travel path lengths
//! that differ by `x = w (sin θ - sin θ₀)`. The same `x` sets the resolving
//! power `λ/dλ = x/λ` and the filtered coherence length `l_c = x`.

use rand::Rng;

use crate::error::{Error, Result};
use crate::num::Scalar;
use crate::physics::CoherenceSpec;
use crate::source::{Photon, PhotonPair};
use crate::units::{travel_fs, SPEED_OF_LIGHT};

#[derive(Debug, Clone, PartialEq)]
pub struct GratingGeometry<T> {
    width: T,
    sin_theta: T,
    sin_theta0: T,
    selected_wavelength: T,
}

impl<T: Scalar> GratingGeometry<T> {
    pub fn new(width: T, sin_theta: T, sin_theta0: T, selected_wavelength: T) -> Result<Self> {
        if width <= T::zero() {
            return Err(Error::Geometry(format!(
                "grating width must be positive, got {width:?}"
            )));
        }
        for (name, s) in [("sin_theta", &sin_theta), ("sin_theta0", &sin_theta0)] {
            if s.abs() > T::one() {
                return Err(Error::Geometry(format!("|{name}| must not exceed 1, got {s:?}")));
            }
        }
        if sin_theta.clone() - sin_theta0.clone() <= T::zero() {
            return Err(Error::Geometry(
                "sin_theta - sin_theta0 must be positive (zero-order geometry has no dispersion)".into(),
            ));
        }
        if selected_wavelength <= T::zero() {
            return Err(Error::Geometry("selected wavelength must be positive".into()));
        }
        Ok(Self {
            width,
            sin_theta,
            sin_theta0,
            selected_wavelength,
        })
    }

    /// Geometry specified by `sin θ - sin θ₀` alone. Differences up to 1 put
    /// the input beam on the normal; larger ones tilt it to the other side.
    pub fn from_sin_difference(width: T, sin_difference: T, selected_wavelength: T) -> Result<Self> {
        let (s, s0) = if sin_difference <= T::one() {
            (sin_difference, T::zero())
        } else {
            (T::one(), T::one() - sin_difference)
        };
        Self::new(width, s, s0, selected_wavelength)
    }

    pub fn width(&self) -> &T {
        &self.width
    }

    pub fn sin_theta(&self) -> &T {
        &self.sin_theta
    }

    pub fn sin_theta0(&self) -> &T {
        &self.sin_theta0
    }

    pub fn selected_wavelength(&self) -> &T {
        &self.selected_wavelength
    }

    pub fn with_selected_wavelength(&self, wavelength: T) -> Result<Self> {
        Self::new(
            self.width.clone(),
            self.sin_theta.clone(),
            self.sin_theta0.clone(),
            wavelength,
        )
    }

    pub fn dispersion(&self) -> T {
        self.sin_theta.clone() - self.sin_theta0.clone()
    }

    /// Path difference between rays at the two edges of the beam, m.
    pub fn edge_path_difference(&self) -> T {
        self.width.clone() * self.dispersion()
    }

    /// `λ/dλ = w (sin θ - sin θ₀) / λ`.
    pub fn resolving_power(&self, wavelength: T) -> Result<T> {
        positive(&wavelength)?;
        Ok(self.edge_path_difference() / wavelength)
    }

    /// `l_c = c T_c = w (sin θ - sin θ₀)`.
    pub fn filtered_coherence(&self) -> CoherenceSpec<T> {
        CoherenceSpec::from_length(self.edge_path_difference()).expect("positive by construction")
    }

    /// Spectral width `dλ = λ²/x` transmitted around `wavelength`.
    pub fn passband(&self, wavelength: T) -> Result<T> {
        positive(&wavelength)?;
        Ok(wavelength.clone() * wavelength / self.edge_path_difference())
    }

    /// Separation of the two-photon state (at `λ_p`) from the one-photon
    /// states (at `2λ_p`), in units of the passband at `λ_p`: `x/λ_p`.
    pub fn state_separation_ratio(&self, pump_wavelength: T) -> Result<T> {
        let separation = (pump_wavelength.clone() - (T::one() + T::one()) * pump_wavelength.clone()).abs();
        Ok(separation / self.passband(pump_wavelength)?)
    }
}

fn positive<T: Scalar>(wavelength: &T) -> Result<()> {
    if *wavelength <= T::zero() {
        return Err(crate::error::domain(format!(
            "wavelength must be positive, got {wavelength:?}"
        )));
    }
    Ok(())
}

/// How the two photons of a pair acquire grating delay.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PhotonLocalityModel {
    /// The pair stays together: one transverse position, one delay.
    #[default]
    Localized,
    /// Each photon's position on the wavefront is independent.
    Dispersed,
}

impl GratingGeometry<f64> {
    /// Edge-to-edge travel time difference `T_d = x/c`, fs.
    pub fn max_delay_fs(&self) -> f64 {
        travel_fs(self.edge_path_difference())
    }

    /// Hard-edged spectral gate of width `dλ` centred on the selected wavelength.
    pub fn transmits(&self, wavelength: f64) -> bool {
        let half = self.passband(self.selected_wavelength).expect("positive") / 2.0;
        (wavelength - self.selected_wavelength).abs() <= half
    }

    /// Filters and delays a pair of one-photon states. Returns `None` when
    /// either photon falls outside the passband.
    pub fn diffract_pair(
        &self,
        pair: &PhotonPair,
        model: PhotonLocalityModel,
        rng: &mut impl Rng,
    ) -> Option<PhotonPair> {
        if !self.transmits(pair.signal.wavelength()) || !self.transmits(pair.idler.wavelength()) {
            return None;
        }
        let td = self.max_delay_fs();
        let (us, ui) = match model {
            PhotonLocalityModel::Localized => {
                let u: f64 = rng.random();
                (u, u)
            }
            PhotonLocalityModel::Dispersed => (rng.random::<f64>(), rng.random::<f64>()),
        };
        Some(PhotonPair {
            signal: delayed(pair.signal, us * td),
            idler: delayed(pair.idler, ui * td),
            ..*pair
        })
    }

    /// Selects a pair as a single two-photon unit at the sum frequency; the
    /// unit is always localized.
    pub fn diffract_two_photon_state(&self, pair: &PhotonPair, rng: &mut impl Rng) -> Option<PhotonPair> {
        let unit_wavelength = SPEED_OF_LIGHT / (pair.signal.frequency + pair.idler.frequency);
        if !self.transmits(unit_wavelength) {
            return None;
        }
        let delay = rng.random::<f64>() * self.max_delay_fs();
        Some(PhotonPair {
            signal: delayed(pair.signal, delay),
            idler: delayed(pair.idler, delay),
            ..*pair
        })
    }
}

fn delayed(photon: Photon, fs: f64) -> Photon {
    Photon {
        extra_delay: photon.extra_delay + fs,
        ..photon
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::{ratio, Exact};
    use crate::rng::{Purpose, Streams};
    use crate::source::{generate_pairs, SourceConfig, SourceStrategy};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn exact(width: Exact, diff: Exact) -> GratingGeometry<Exact> {
        GratingGeometry::from_sin_difference(width, diff, ratio(1, 1_000_000)).unwrap()
    }

    #[test]
    fn centimetre_and_millimetre_ratios_are_exact() {
        let pump = ratio(1, 2_000_000);
        let cm = exact(ratio(1, 100), ratio(1, 1));
        assert_eq!(cm.state_separation_ratio(pump.clone()).unwrap(), ratio(20_000, 1));
        assert_eq!(cm.resolving_power(pump.clone()).unwrap(), ratio(20_000, 1));
        let mm = exact(ratio(1, 1000), ratio(1, 1));
        assert_eq!(mm.state_separation_ratio(pump.clone()).unwrap(), ratio(2000, 1));
        assert_eq!(mm.resolving_power(pump).unwrap(), ratio(2000, 1));
    }

    #[test]
    fn float_examples() {
        let g = GratingGeometry::from_sin_difference(1e-2, 1.0, 1e-6).unwrap();
        assert_relative_eq!(g.state_separation_ratio(0.5e-6).unwrap(), 2e4, max_relative = 1e-12);
        assert_relative_eq!(g.passband(0.5e-6).unwrap(), 2.5e-11, max_relative = 1e-12);
        let coh = g.filtered_coherence();
        assert_eq!(*coh.coherence_length(), 1e-2);
        assert_relative_eq!(*coh.coherence_time(), 33.356_409_52e-12, max_relative = 1e-9);
        assert_relative_eq!(g.max_delay_fs(), 33_356.409_52, max_relative = 1e-9);

        let g = GratingGeometry::from_sin_difference(1e-3, 0.5, 1e-6).unwrap();
        assert_eq!(*g.filtered_coherence().coherence_length(), 0.5e-3);
        assert_relative_eq!(
            GratingGeometry::from_sin_difference(1e-3, 1.0, 1e-6)
                .unwrap()
                .passband(0.5e-6)
                .unwrap(),
            2.5e-10,
            max_relative = 1e-12
        );
    }

    #[test]
    fn definitional_cases() {
        let g = exact(ratio(3, 7), ratio(1, 2));
        let x = g.edge_path_difference();
        assert_eq!(g.resolving_power(x.clone()).unwrap(), ratio(1, 1));
        assert_eq!(g.state_separation_ratio(x.clone()).unwrap(), ratio(1, 1));
        let lambda = ratio(1, 1_000_000);
        let doubled = g.passband(lambda.clone() * ratio(2, 1)).unwrap();
        assert_eq!(doubled, g.passband(lambda).unwrap() * ratio(4, 1));
        let k = ratio(5, 1);
        let scaled = exact(ratio(3, 7) * k.clone(), ratio(1, 2));
        assert_eq!(
            scaled.filtered_coherence().coherence_length().clone(),
            g.filtered_coherence().coherence_length().clone() * k
        );
    }

    #[test]
    fn invalid_geometries_are_rejected() {
        assert!(GratingGeometry::new(0.0, 1.0, 0.0, 1e-6).is_err());
        assert!(GratingGeometry::new(1e-2, 1.2, 0.0, 1e-6).is_err());
        assert!(GratingGeometry::new(1e-2, 0.3, 0.3, 1e-6).is_err());
        assert!(GratingGeometry::new(1e-2, 0.3, 0.5, 1e-6).is_err());
        let g = GratingGeometry::new(1e-2, 0.3, 0.0, 1e-6).unwrap();
        assert!(g.resolving_power(0.0).is_err());
        assert!(g.passband(-1.0).is_err());
    }

    fn narrow_source(seed: u64, n: usize) -> Vec<PhotonPair> {
        let cfg = SourceConfig {
            pump_wavelength: 0.5e-6,
            pair_rate: 1e6,
            detuning_rms: 1e9,
            strategy: SourceStrategy::OnePhotonPairs,
            laser_bandwidth: 0.0,
        };
        generate_pairs(&cfg, seed, n).unwrap()
    }

    #[test]
    fn localized_delay_is_shared_and_uniform() {
        let g = GratingGeometry::from_sin_difference(1e-2, 1.0, 1e-6).unwrap();
        let streams = Streams::new(21);
        let td = g.max_delay_fs();
        let mut delays: Vec<f64> = narrow_source(21, 100_000)
            .iter()
            .filter_map(|p| {
                g.diffract_pair(
                    p,
                    PhotonLocalityModel::Localized,
                    &mut streams.for_pair(p.pair_id, Purpose::Grating),
                )
            })
            .map(|p| {
                assert_eq!(p.signal.extra_delay, p.idler.extra_delay);
                p.signal.extra_delay / td
            })
            .collect();
        assert_eq!(delays.len(), 100_000);
        delays.sort_by(f64::total_cmp);
        let n = delays.len() as f64;
        let ks = delays
            .iter()
            .enumerate()
            .map(|(i, &u)| ((i as f64 + 1.0) / n - u).max(u - i as f64 / n))
            .fold(0.0, f64::max);
        // Kolmogorov-Smirnov critical value at alpha = 0.01
        assert!(ks < 1.628 / n.sqrt(), "KS statistic {ks}");
    }

    #[test]
    fn dispersed_delay_difference_is_triangular() {
        let g = GratingGeometry::from_sin_difference(1e-2, 1.0, 1e-6).unwrap();
        let streams = Streams::new(33);
        let td = g.max_delay_fs();
        let diffs: Vec<f64> = narrow_source(33, 100_000)
            .iter()
            .filter_map(|p| {
                g.diffract_pair(
                    p,
                    PhotonLocalityModel::Dispersed,
                    &mut streams.for_pair(p.pair_id, Purpose::Grating),
                )
            })
            .map(|p| (p.signal.extra_delay - p.idler.extra_delay) / td)
            .collect();
        let n = diffs.len() as f64;
        for a in [0.1, 0.5, 0.9] {
            let expect: f64 = 2.0 * a - a * a;
            let got = diffs.iter().filter(|d| d.abs() <= a).count() as f64 / n;
            let sd = (expect * (1.0 - expect) / n).sqrt();
            assert!((got - expect).abs() < 3.0 * sd, "a={a}: {got} vs {expect}");
        }
    }

    #[test]
    fn out_of_band_pairs_are_rejected() {
        let g = GratingGeometry::from_sin_difference(1e-2, 1.0, 1e-6).unwrap();
        let mut pair = narrow_source(1, 1)[0];
        pair.signal.frequency = SPEED_OF_LIGHT / 1.01e-6;
        pair.idler.frequency = SPEED_OF_LIGHT / 0.99e-6;
        let mut rng = Streams::new(1).for_pair(0, Purpose::Grating);
        assert!(g
            .diffract_pair(&pair, PhotonLocalityModel::Localized, &mut rng)
            .is_none());
        assert!(g
            .diffract_pair(&pair, PhotonLocalityModel::Dispersed, &mut rng)
            .is_none());
    }

    #[test]
    fn two_photon_unit_is_selected_at_the_pump_wavelength() {
        let g = GratingGeometry::from_sin_difference(1e-2, 1.0, 0.5e-6).unwrap();
        let streams = Streams::new(2);
        for p in narrow_source(2, 1000) {
            let out = g
                .diffract_two_photon_state(&p, &mut streams.for_pair(p.pair_id, Purpose::Grating))
                .unwrap();
            assert_eq!(out.signal.extra_delay, out.idler.extra_delay);
            assert_eq!(out.signal.frequency, p.signal.frequency);
        }
        // tuned to one-photon states, the unit is blocked
        let g = g.with_selected_wavelength(1e-6).unwrap();
        let p = narrow_source(2, 1)[0];
        assert!(g
            .diffract_two_photon_state(&p, &mut streams.for_pair(0, Purpose::Grating))
            .is_none());
    }

    proptest! {
        #[test]
        fn shared_edge_difference_links_equations(
            w in 1i64..100_000, num in 1i64..1000, den in 1i64..1000, lam in 1i64..10_000
        ) {
            let diff = ratio(num.min(den), den.max(num));
            prop_assume!(diff > ratio(0, 1));
            let g = GratingGeometry::from_sin_difference(ratio(w, 1_000_000), diff, ratio(1, 1_000_000)).unwrap();
            let lambda = ratio(lam, 1_000_000_000);
            let r = g.resolving_power(lambda.clone()).unwrap();
            prop_assert_eq!(r.clone() * lambda.clone(), g.filtered_coherence().coherence_length().clone());
            prop_assert_eq!(g.passband(lambda.clone()).unwrap() * r, lambda);
        }

        #[test]
        fn widening_the_passband_keeps_accepted_pairs(seed in any::<u64>(), shrink in 1.0_f64..50.0) {
            let wide_grating = GratingGeometry::from_sin_difference(1e-1, 1.0, 1e-6).unwrap();
            let narrow_grating = GratingGeometry::from_sin_difference(1e-1 / shrink, 1.0, 1e-6).unwrap();
            let streams = Streams::new(seed);
            let cfg = SourceConfig {
                pump_wavelength: 0.5e-6,
                pair_rate: 1e6,
                detuning_rms: 3e9,
                strategy: SourceStrategy::OnePhotonPairs,
                laser_bandwidth: 0.0,
            };
            for p in generate_pairs(&cfg, seed, 300).unwrap() {
                let a = wide_grating.diffract_pair(&p, PhotonLocalityModel::Dispersed, &mut streams.for_pair(p.pair_id, Purpose::Grating));
                let b = narrow_grating.diffract_pair(&p, PhotonLocalityModel::Dispersed, &mut streams.for_pair(p.pair_id, Purpose::Grating));
                prop_assert!(a.is_none() || b.is_some());
            }
        }
    }
}
