//! Full-experiment runs.
//!
//! Experiment A compares pair synchronization before the grating and after
//! it under both locality models. Experiment B sends heralded pairs through
//! the interferometer and counts D3 coincidences with D1/D2 at zero offset
//! (short arm) and at the arm delay (long arm).

use rayon::prelude::*;

use crate::analysis::{SweepResult, SweepRow};
use crate::coincidence::{dt_histogram, match_streams, select, sort_events, DetectionEvent, Detector, Histogram};
use crate::config::RunConfig;
use crate::error::Result;
use crate::grating::{GratingGeometry, PhotonLocalityModel};
use crate::interferometer::{
    detect, herald_event_id, propagate_herald, signal_event_id, Arm, Interferometer, PhaseSetting,
};
use crate::rng::{Purpose, Streams};
use crate::source::{generate_with_streams, route_sides, PhotonPair, SourceStrategy};
use crate::units::{round_fs, travel_fs, Femtos};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    BeforeGrating,
    After(PhotonLocalityModel),
}

/// Synchronization of photon pairs at one stage of experiment A.
#[derive(Debug, Clone, PartialEq)]
pub struct SyncStats {
    pub stage: Stage,
    pub pairs_in: u64,
    /// Pairs transmitted by the spectral gate (all of them before the grating).
    pub transmitted: u64,
    /// Transmitted pairs with both photons detected.
    pub both_detected: u64,
    /// Of those, pairs whose detection times differ by at most the window.
    pub synchronized: u64,
    /// One-to-one D3/D1 coincidences found in the merged event streams.
    pub matched: u64,
    /// `t_D1 - t_D3` to the nearest neighbour.
    pub histogram: Histogram,
}

impl SyncStats {
    pub fn fraction(&self) -> Option<f64> {
        (self.both_detected > 0).then(|| self.synchronized as f64 / self.both_detected as f64)
    }
}

#[derive(Debug, Clone)]
pub struct SyncReport {
    pub before: SyncStats,
    pub localized: SyncStats,
    pub dispersed: SyncStats,
    /// Post-grating events of the configured locality model, stream order.
    pub events: Vec<DetectionEvent>,
    pub locality: PhotonLocalityModel,
}

impl SyncReport {
    pub fn stats(&self, stage: Stage) -> &SyncStats {
        match stage {
            Stage::BeforeGrating => &self.before,
            Stage::After(PhotonLocalityModel::Localized) => &self.localized,
            Stage::After(PhotonLocalityModel::Dispersed) => &self.dispersed,
        }
    }
}

fn filter_pair(
    grating: &GratingGeometry<f64>,
    strategy: SourceStrategy,
    model: PhotonLocalityModel,
    pair: &PhotonPair,
    streams: &Streams,
) -> Option<PhotonPair> {
    let mut rng = streams.for_pair(pair.pair_id, Purpose::Grating);
    match strategy {
        SourceStrategy::OnePhotonPairs => grating.diffract_pair(pair, model, &mut rng),
        // two-photon states cross the grating as one unit
        SourceStrategy::TwoPhotonDerived => grating.diffract_two_photon_state(pair, &mut rng),
    }
}

fn sync_stage(
    cfg: &RunConfig,
    pairs: &[PhotonPair],
    streams: &Streams,
    grating: &GratingGeometry<f64>,
    stage: Stage,
) -> Result<(SyncStats, Vec<DetectionEvent>)> {
    let window = cfg.window()?;
    let (d1, d3) = (cfg.detectors.d1.spec(), cfg.detectors.d3.spec());
    let outcomes: Vec<Option<(Option<DetectionEvent>, Option<DetectionEvent>)>> = pairs
        .par_iter()
        .map(|p| {
            let p = match stage {
                Stage::BeforeGrating => *p,
                Stage::After(model) => filter_pair(grating, cfg.source.strategy, model, p, streams)?,
            };
            // idler to D3, signal to D1
            let idler = detect(
                p.emission_time,
                &p.idler,
                0.0,
                &d3,
                &mut streams.for_pair(p.pair_id, Purpose::Herald),
            )
            .map(|time| DetectionEvent {
                event_id: herald_event_id(p.pair_id),
                detector: Detector::D3,
                time,
            });
            let signal = detect(
                p.emission_time,
                &p.signal,
                0.0,
                &d1,
                &mut streams.for_pair(p.pair_id, Purpose::Signal),
            )
            .map(|time| DetectionEvent {
                event_id: signal_event_id(p.pair_id),
                detector: Detector::D1,
                time,
            });
            Some((idler, signal))
        })
        .collect();

    let mut events = Vec::new();
    let (mut transmitted, mut both, mut sync) = (0, 0, 0);
    for (idler, signal) in outcomes.into_iter().flatten() {
        transmitted += 1;
        if let (Some(i), Some(s)) = (idler, signal) {
            both += 1;
            sync += window.contains(s.time - i.time) as u64;
        }
        events.extend(idler);
        events.extend(signal);
    }
    sort_events(&mut events);
    let (a, b) = (select(&events, Detector::D3), select(&events, Detector::D1));
    let stats = SyncStats {
        stage,
        pairs_in: pairs.len() as u64,
        transmitted,
        both_detected: both,
        synchronized: sync,
        matched: match_streams(&a, &b, window)?.count() as u64,
        histogram: dt_histogram(&a, &b, cfg.histogram_bin_fs(), cfg.histogram_range_fs())?,
    };
    Ok((stats, events))
}

/// Experiment A. Both locality models see the same pairs and the same
/// grating draws.
pub fn run_experiment_a(cfg: &RunConfig, seed: u64) -> Result<SyncReport> {
    cfg.validate()?;
    let streams = Streams::new(seed);
    let grating = cfg.grating_geometry()?;
    let pairs = generate_with_streams(&cfg.source, &streams, cfg.pairs);
    let (before, _) = sync_stage(cfg, &pairs, &streams, &grating, Stage::BeforeGrating)?;
    let (localized, loc_events) = sync_stage(
        cfg,
        &pairs,
        &streams,
        &grating,
        Stage::After(PhotonLocalityModel::Localized),
    )?;
    let (dispersed, disp_events) = sync_stage(
        cfg,
        &pairs,
        &streams,
        &grating,
        Stage::After(PhotonLocalityModel::Dispersed),
    )?;
    let events = match cfg.locality {
        PhotonLocalityModel::Localized => loc_events,
        PhotonLocalityModel::Dispersed => disp_events,
    };
    Ok(SyncReport {
        before,
        localized,
        dispersed,
        events,
        locality: cfg.locality,
    })
}

/// Ground truth for one detected signal photon.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignalTruth {
    pub pair_id: u64,
    pub arm: Arm,
    pub event: DetectionEvent,
    pub herald_time: Option<Femtos>,
}

/// Experiment B at a single phase setting.
#[derive(Debug, Clone)]
pub struct PhaseRun {
    pub row: SweepRow,
    pub events: Vec<DetectionEvent>,
    pub signals: Vec<SignalTruth>,
    /// Offset of the delayed channel, fs.
    pub arm_delay_fs: Femtos,
    pub visibility: f64,
}

/// D3 coincidences with D1 and D2 at offset 0 and at the arm delay.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CoincidenceCounts {
    pub heralded_d1: u64,
    pub heralded_d2: u64,
    pub delayed_d1: u64,
    pub delayed_d2: u64,
}

pub fn count_coincidences(
    events: &[DetectionEvent],
    half_width: Femtos,
    arm_delay: Femtos,
) -> Result<CoincidenceCounts> {
    let win = crate::coincidence::CoincidenceWindow::new(half_width, 0)?;
    let d3 = select(events, Detector::D3);
    let d1 = select(events, Detector::D1);
    let d2 = select(events, Detector::D2);
    let n = |b: &[DetectionEvent], off| match_streams(&d3, b, win.with_offset(off)).map(|m| m.count() as u64);
    Ok(CoincidenceCounts {
        heralded_d1: n(&d1, 0)?,
        heralded_d2: n(&d2, 0)?,
        delayed_d1: n(&d1, arm_delay)?,
        delayed_d2: n(&d2, arm_delay)?,
    })
}

/// Streams for one phase setting; rows depend only on their own displacement.
fn phase_streams(seed: u64, setting: &PhaseSetting<f64>) -> Streams {
    Streams::new(seed).derive(setting.r2_displacement.to_bits())
}

pub fn run_phase(cfg: &RunConfig, setting: &PhaseSetting<f64>, seed: u64) -> Result<PhaseRun> {
    let streams = phase_streams(seed, setting);
    let grating = cfg.grating_geometry()?;
    let geom = cfg.interferometer_geometry()?;
    let spectrum = cfg.signal_spectrum()?;
    let ifm = Interferometer::new(&geom, setting, cfg.model, &spectrum)?;
    let (d1, d2, d3) = (
        cfg.detectors.d1.spec(),
        cfg.detectors.d2.spec(),
        cfg.detectors.d3.spec(),
    );
    let pairs = generate_with_streams(&cfg.source, &streams, cfg.pairs);

    let outcomes: Vec<_> = pairs
        .par_iter()
        .map(|p| {
            let p = filter_pair(&grating, cfg.source.strategy, cfg.locality, p, &streams)?;
            let routed = route_sides(&p, &mut streams.for_pair(p.pair_id, Purpose::Routing))?;
            let herald = propagate_herald(&routed, &geom, &d3, &mut streams.for_pair(p.pair_id, Purpose::Herald));
            let signal = ifm.propagate_signal_to(&routed, &d1, &d2, &mut streams.for_pair(p.pair_id, Purpose::Signal));
            Some((herald, signal))
        })
        .collect();

    let mut events = Vec::new();
    let mut signals = Vec::new();
    let mut total_signal = 0;
    for (herald, signal) in outcomes.into_iter().flatten() {
        total_signal += 1;
        if let Some(s) = signal {
            signals.push(SignalTruth {
                pair_id: s.event.event_id / 2,
                arm: s.arm,
                event: s.event,
                herald_time: herald.map(|h| h.time),
            });
            events.push(s.event);
        }
        events.extend(herald);
    }
    sort_events(&mut events);
    let arm_delay_fs = round_fs(travel_fs(geom.effective_difference(setting)));
    let counts = count_coincidences(&events, cfg.window_fs(), arm_delay_fs)?;
    Ok(PhaseRun {
        row: SweepRow {
            phase: ifm.phase(),
            heralded_d1: counts.heralded_d1,
            heralded_d2: counts.heralded_d2,
            delayed_d1: counts.delayed_d1,
            delayed_d2: counts.delayed_d2,
            total_signal,
        },
        events,
        signals,
        arm_delay_fs,
        visibility: ifm.visibility(),
    })
}

#[derive(Debug, Clone)]
pub struct SweepOutcome {
    pub sweep: SweepResult,
    pub warnings: Vec<String>,
}

/// Experiment B over a list of R2 displacements, one row per setting.
/// Settings run in parallel; every row equals its stand-alone [`run_phase`].
pub fn run_experiment_b(cfg: &RunConfig, phases: &[PhaseSetting<f64>], seed: u64) -> Result<SweepOutcome> {
    if phases.is_empty() {
        return Err(crate::error::domain("a sweep needs at least one phase setting"));
    }
    let mut warnings = cfg.validate()?;
    let geom = cfg.interferometer_geometry()?;
    for setting in phases {
        let half_delay = travel_fs(geom.effective_difference(setting)) / 2.0;
        if cfg.window_fs() as f64 > half_delay {
            warnings.push(format!(
                "window half width {} fs exceeds half the arm delay ({half_delay:.0} fs) at r2_displacement {} m",
                cfg.window_fs(),
                setting.r2_displacement
            ));
        }
    }
    warnings.sort();
    warnings.dedup();
    let rows = phases
        .par_iter()
        .map(|setting| run_phase(cfg, setting, seed).map(|run| run.row))
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepOutcome {
        sweep: SweepResult::from_unordered(rows)?,
        warnings,
    })
}
