//! Built-in sanity checks against closed-form results.

use std::fmt;

use crate::coincidence::{match_streams, CoincidenceWindow, DetectionEvent, Detector};
use crate::design::{design, DesignInputs};
use crate::grating::{GratingGeometry, PhotonLocalityModel};
use crate::interferometer::port_probabilities;
use crate::num::{ratio, Exact};
use crate::physics::{frequency_to_wavelength, wavelength_to_frequency};
use crate::rng::{Purpose, Streams};
use crate::source::{Photon, PhotonPair};
use crate::units::SPEED_OF_LIGHT;
use rand::Rng;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{tag} {:<28} {}", self.name, self.detail)
    }
}

fn check(name: &'static str, passed: bool, detail: String) -> Check {
    Check { name, passed, detail }
}

pub fn run(seed: u64) -> Vec<Check> {
    vec![
        design_ratios(),
        conversion(),
        triangular_overlap(seed),
        fringe_probabilities(seed),
        matching_trace(),
    ]
}

pub fn all_passed(checks: &[Check]) -> bool {
    checks.iter().all(|c| c.passed)
}

fn design_ratios() -> Check {
    let ratio_for = |width: Exact| {
        let inputs = DesignInputs {
            width,
            sin_theta: ratio(1, 1),
            sin_theta0: ratio(0, 1),
            wavelength: None,
            pump_wavelength: Some(ratio(1, 2_000_000)),
            target_visibility: 0.9,
            window: None,
        };
        design(&inputs).ok().and_then(|r| r.separation_ratio)
    };
    let cm = ratio_for(ratio(1, 100));
    let mm = ratio_for(ratio(1, 1000));
    let ok = cm == Some(ratio(20_000, 1)) && mm == Some(ratio(2000, 1));
    let show = |r: Option<Exact>| r.map_or("none".to_string(), |r| r.to_string());
    check(
        "design ratios",
        ok,
        format!("1 cm -> {}, 1 mm -> {}", show(cm), show(mm)),
    )
}

fn conversion() -> Check {
    let f = wavelength_to_frequency(16e-6_f64).unwrap_or(f64::NAN);
    let back = frequency_to_wavelength(f).unwrap_or(f64::NAN);
    let ok = (f / 1e12 - 18.737).abs() < 5e-4 && ((back - 16e-6) / 16e-6).abs() < 1e-12;
    check("16 um <-> THz", ok, format!("{:.4} THz", f / 1e12))
}

fn triangular_overlap(seed: u64) -> Check {
    const N: u64 = 200_000;
    let lambda = 1e-6;
    let grating = GratingGeometry::new(1e-3, 1.0, 0.0, lambda).expect("valid grating");
    let td = grating.max_delay_fs();
    let streams = Streams::new(seed);
    let photon = Photon::new(SPEED_OF_LIGHT / lambda);
    let inside = (0..N)
        .filter(|&id| {
            let pair = PhotonPair {
                pair_id: id,
                emission_time: 0,
                signal: photon,
                idler: photon,
            };
            let mut rng = streams.for_pair(id, Purpose::Grating);
            let out = grating
                .diffract_pair(&pair, PhotonLocalityModel::Dispersed, &mut rng)
                .expect("in band");
            (out.signal.extra_delay - out.idler.extra_delay).abs() <= 0.5 * td
        })
        .count();
    let p = inside as f64 / N as f64;
    let sigma = (0.75 * 0.25 / N as f64).sqrt();
    check(
        "dispersed overlap a=0.5",
        (p - 0.75).abs() <= 4.0 * sigma,
        format!("{p:.4} vs 0.75 +- {sigma:.4}"),
    )
}

fn fringe_probabilities(seed: u64) -> Check {
    const N: u64 = 100_000;
    let streams = Streams::new(seed).derive(1);
    let mut worst: f64 = 0.0;
    for (k, phi) in [0.0, std::f64::consts::FRAC_PI_2, std::f64::consts::PI]
        .into_iter()
        .enumerate()
    {
        let (p1, _) = port_probabilities(phi, 0.8).expect("valid visibility");
        let hits = (0..N)
            .filter(|&id| {
                let mut rng = streams.for_pair(id + k as u64 * N, Purpose::Signal);
                rng.random::<f64>() < p1
            })
            .count();
        let sigma = (p1 * (1.0 - p1) / N as f64).sqrt();
        worst = worst.max((hits as f64 / N as f64 - p1).abs() / sigma);
    }
    check(
        "binomial port fractions",
        worst <= 4.0,
        format!("worst deviation {worst:.2} sigma"),
    )
}

fn matching_trace() -> Check {
    let ev = |id, time| DetectionEvent {
        event_id: id,
        detector: Detector::D1,
        time,
    };
    let a = [ev(0, 0), ev(1, 100), ev(2, 250)];
    let b = [ev(3, 40), ev(4, 90), ev(5, 400)];
    let win = CoincidenceWindow::new(50, 0).expect("valid window");
    let pairs = match_streams(&a, &b, win).map(|m| m.pairs).unwrap_or_default();
    let ok = pairs == [(0, 0), (1, 1)];
    check("window matching trace", ok, format!("{pairs:?}"))
}
