//! Type I collinear degenerate SPDC pair generation and side routing.

use rand::Rng;
use rand_distr::{Distribution, Exp, StandardNormal};
use rayon::prelude::*;

use crate::error::{domain, Result};
use crate::physics::wavelength_to_frequency;
use crate::rng::{Purpose, Streams};
use crate::units::{round_fs, seconds_to_fs, Femtos};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Photon {
    /// Hz.
    pub frequency: f64,
    /// Delay accumulated in optics, fs.
    pub extra_delay: f64,
}

impl Photon {
    pub fn new(frequency: f64) -> Self {
        Self {
            frequency,
            extra_delay: 0.0,
        }
    }

    pub fn wavelength(&self) -> f64 {
        crate::units::SPEED_OF_LIGHT / self.frequency
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhotonPair {
    pub pair_id: u64,
    /// Shared creation time, fs.
    pub emission_time: Femtos,
    pub signal: Photon,
    pub idler: Photon,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SourceStrategy {
    /// Broadband pairs of one-photon states at about twice the pump wavelength.
    OnePhotonPairs,
    /// Pairs split from a grating-selected two-photon state; the bandwidth is
    /// the pump laser's.
    #[default]
    TwoPhotonDerived,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SourceConfig {
    /// m.
    pub pump_wavelength: f64,
    /// Pairs per second.
    pub pair_rate: f64,
    /// Phase-matching detuning rms, Hz.
    pub detuning_rms: f64,
    pub strategy: SourceStrategy,
    /// Pump laser bandwidth, Hz.
    pub laser_bandwidth: f64,
}

impl SourceConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.pump_wavelength > 0.0) {
            return Err(domain("pump_wavelength must be positive"));
        }
        if !(self.pair_rate > 0.0) {
            return Err(domain("pair_rate must be positive"));
        }
        if !(self.detuning_rms >= 0.0) || !(self.laser_bandwidth >= 0.0) {
            return Err(domain("source bandwidths must be non-negative"));
        }
        Ok(())
    }

    pub fn pump_frequency(&self) -> f64 {
        wavelength_to_frequency(self.pump_wavelength).expect("validated pump wavelength")
    }

    /// Rms of the signal/idler detuning for the configured strategy, Hz.
    pub fn detuning_sigma(&self) -> f64 {
        match self.strategy {
            SourceStrategy::OnePhotonPairs => self.detuning_rms,
            SourceStrategy::TwoPhotonDerived => self.laser_bandwidth,
        }
    }
}

/// Splits the pump frequency into `(ν_p/2 + δ, ν_p/2 - δ)` such that the two
/// floats sum to `pump` with no rounding: the larger part is rounded once and
/// the smaller is its exact complement (Sterbenz).
fn split_frequency(pump: f64, detuning: f64) -> (f64, f64) {
    let hi = pump / 2.0 + detuning.abs();
    let lo = pump - hi;
    if detuning >= 0.0 {
        (hi, lo)
    } else {
        (lo, hi)
    }
}

fn draw_detuning(rng: &mut impl Rng, sigma: f64, pump: f64) -> f64 {
    if sigma == 0.0 {
        return 0.0;
    }
    loop {
        let z: f64 = StandardNormal.sample(rng);
        let d = z * sigma;
        // a photon needs positive frequency
        if d.abs() < pump / 2.0 {
            return d;
        }
    }
}

/// Generates `n` pairs with Poisson emission times, sorted by emission time.
///
/// Pair `k` depends only on `(cfg, seed, k)` and the gaps of pairs before it,
/// so any prefix of a longer run equals the shorter run.
pub fn generate_pairs(cfg: &SourceConfig, seed: u64, n: usize) -> Result<Vec<PhotonPair>> {
    cfg.validate()?;
    let streams = Streams::new(seed);
    Ok(generate_with_streams(cfg, &streams, n))
}

pub(crate) fn generate_with_streams(cfg: &SourceConfig, streams: &Streams, n: usize) -> Vec<PhotonPair> {
    let pump = cfg.pump_frequency();
    let sigma = cfg.detuning_sigma();
    let gap = Exp::new(cfg.pair_rate).expect("validated pair rate");

    let draws: Vec<(Femtos, f64)> = (0..n as u64)
        .into_par_iter()
        .map(|id| {
            let gap_s: f64 = gap.sample(&mut streams.for_pair(id, Purpose::Arrival));
            let delta = draw_detuning(&mut streams.for_pair(id, Purpose::Detuning), sigma, pump);
            (round_fs(seconds_to_fs(gap_s)), delta)
        })
        .collect();

    let mut t: Femtos = 0;
    draws
        .into_iter()
        .enumerate()
        .map(|(id, (gap_fs, delta))| {
            t += gap_fs;
            let (s, i) = split_frequency(pump, delta);
            PhotonPair {
                pair_id: id as u64,
                emission_time: t,
                signal: Photon::new(s),
                idler: Photon::new(i),
            }
        })
        .collect()
}

/// A pair whose photons left the source toward opposite sides.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoutedPair {
    pub pair_id: u64,
    pub emission_time: Femtos,
    pub herald: Photon,
    pub signal: Photon,
}

/// Sends each photon to the herald or interferometer side with probability
/// 1/2; pairs whose photons land on the same side are discarded.
pub fn route_sides(pair: &PhotonPair, rng: &mut impl Rng) -> Option<RoutedPair> {
    let signal_to_herald: bool = rng.random();
    let idler_to_herald: bool = rng.random();
    if signal_to_herald == idler_to_herald {
        return None;
    }
    let (herald, signal) = if signal_to_herald {
        (pair.signal, pair.idler)
    } else {
        (pair.idler, pair.signal)
    };
    Some(RoutedPair {
        pair_id: pair.pair_id,
        emission_time: pair.emission_time,
        herald,
        signal,
    })
}
