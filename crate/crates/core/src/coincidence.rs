//! Time-tag stream analysis: windowed one-to-one coincidence matching,
//! nearest-neighbour time-difference histograms and the closed-form
//! coincidence fraction of the dispersed grating model.
//!
//! Time differences are signed as `t_B - t_A` throughout.

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use crate::error::{domain, Error, Result};
use crate::num::Scalar;
use crate::units::Femtos;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Detector {
    D1,
    D2,
    D3,
}

impl fmt::Display for Detector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Detector::D1 => "D1",
            Detector::D2 => "D2",
            Detector::D3 => "D3",
        })
    }
}

impl FromStr for Detector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "D1" => Ok(Detector::D1),
            "D2" => Ok(Detector::D2),
            "D3" => Ok(Detector::D3),
            other => Err(domain(format!("unknown detector `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DetectionEvent {
    pub event_id: u64,
    pub detector: Detector,
    /// fs.
    pub time: Femtos,
}

impl DetectionEvent {
    /// Stream order: time, then event id.
    pub fn sort_key(&self) -> (Femtos, u64) {
        (self.time, self.event_id)
    }
}

pub fn sort_events(events: &mut [DetectionEvent]) {
    events.sort_unstable_by_key(DetectionEvent::sort_key);
}

/// Events of one detector, in stream order.
pub fn select(events: &[DetectionEvent], detector: Detector) -> Vec<DetectionEvent> {
    events.iter().filter(|e| e.detector == detector).copied().collect()
}

pub fn check_sorted(stream: &[DetectionEvent], name: &'static str) -> Result<()> {
    match stream.windows(2).position(|w| w[0].sort_key() > w[1].sort_key()) {
        None => Ok(()),
        Some(i) => Err(Error::Unsorted {
            stream: name,
            index: i + 1,
            detail: format!(
                "event {} at {} fs follows event {} at {} fs",
                stream[i + 1].event_id,
                stream[i + 1].time,
                stream[i].event_id,
                stream[i].time
            ),
        }),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CoincidenceWindow {
    half_width: Femtos,
    offset: Femtos,
}

impl CoincidenceWindow {
    pub fn new(half_width: Femtos, offset: Femtos) -> Result<Self> {
        if half_width <= 0 {
            return Err(domain(format!(
                "window half width must be positive, got {half_width} fs"
            )));
        }
        Ok(Self { half_width, offset })
    }

    pub fn half_width(&self) -> Femtos {
        self.half_width
    }

    /// Expected `t_B - t_A`, subtracted before the window test.
    pub fn offset(&self) -> Femtos {
        self.offset
    }

    pub fn with_offset(self, offset: Femtos) -> Self {
        Self { offset, ..self }
    }

    /// Inclusive at the boundary.
    pub fn contains(&self, dt: Femtos) -> bool {
        (dt - self.offset).abs() <= self.half_width
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Matching {
    /// Matched `(A index, B index)` pairs in the order they were formed.
    pub pairs: Vec<(usize, usize)>,
}

impl Matching {
    pub fn count(&self) -> usize {
        self.pairs.len()
    }
}

/// Greedy earliest-first one-to-one matching of `a` against `b`.
///
/// Events are consumed in merged time order with B shifted by `-offset`;
/// each event pairs with the earliest still-unmatched event of the other
/// stream that lies within the window, or waits to be matched later. On a
/// time tie, A is consumed first.
pub fn match_streams(a: &[DetectionEvent], b: &[DetectionEvent], win: CoincidenceWindow) -> Result<Matching> {
    check_sorted(a, "A")?;
    check_sorted(b, "B")?;
    let hw = win.half_width;
    let tb = |k: usize| b[k].time - win.offset;

    let mut pending_a: VecDeque<usize> = VecDeque::new();
    let mut pending_b: VecDeque<usize> = VecDeque::new();
    let mut pairs = Vec::new();
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let take_a = j == b.len() || (i < a.len() && a[i].time <= tb(j));
        if take_a {
            let t = a[i].time;
            while pending_b.front().is_some_and(|&k| tb(k) < t - hw) {
                pending_b.pop_front();
            }
            match pending_b.pop_front() {
                Some(k) => pairs.push((i, k)),
                None => pending_a.push_back(i),
            }
            i += 1;
        } else {
            let t = tb(j);
            while pending_a.front().is_some_and(|&k| a[k].time < t - hw) {
                pending_a.pop_front();
            }
            match pending_a.pop_front() {
                Some(k) => pairs.push((k, j)),
                None => pending_b.push_back(j),
            }
            j += 1;
        }
    }
    Ok(Matching { pairs })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Histogram {
    pub bin_width: Femtos,
    /// Index of the first bin; bin `k` covers `[k·w, (k+1)·w)`.
    pub first_bin: i64,
    pub counts: Vec<u64>,
}

impl Histogram {
    pub fn bin_start(&self, slot: usize) -> Femtos {
        (self.first_bin + slot as i64) * self.bin_width
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Slot index holding time difference `dt`, if inside the histogram.
    pub fn slot_of(&self, dt: Femtos) -> Option<usize> {
        let k = dt.div_euclid(self.bin_width) - self.first_bin;
        (k >= 0 && (k as usize) < self.counts.len()).then_some(k as usize)
    }

    /// Start of the most populated bin.
    pub fn peak(&self) -> Option<Femtos> {
        let (slot, &n) = self
            .counts
            .iter()
            .enumerate()
            .max_by_key(|(i, &n)| (n, std::cmp::Reverse(*i)))?;
        (n > 0).then(|| self.bin_start(slot))
    }
}

/// Histogram of `t_B - t_A` from each A event to its nearest B event within
/// `±range`. Equidistant neighbours resolve to the earlier B event.
pub fn dt_histogram(a: &[DetectionEvent], b: &[DetectionEvent], bin_width: Femtos, range: Femtos) -> Result<Histogram> {
    if bin_width <= 0 {
        return Err(domain("histogram bin width must be positive"));
    }
    if range < 0 {
        return Err(domain("histogram range must be non-negative"));
    }
    check_sorted(a, "A")?;
    check_sorted(b, "B")?;
    let first_bin = (-range).div_euclid(bin_width);
    let last_bin = range.div_euclid(bin_width);
    let mut hist = Histogram {
        bin_width,
        first_bin,
        counts: vec![0; (last_bin - first_bin + 1) as usize],
    };
    for ev in a {
        let idx = b.partition_point(|e| e.time < ev.time);
        let before = idx.checked_sub(1).map(|k| b[k].time - ev.time);
        let after = b.get(idx).map(|e| e.time - ev.time);
        let nearest = match (before, after) {
            (Some(x), Some(y)) => Some(if -x <= y { x } else { y }),
            (x, y) => x.or(y),
        };
        if let Some(dt) = nearest.filter(|dt| dt.abs() <= range) {
            let slot = hist.slot_of(dt).expect("within range");
            hist.counts[slot] += 1;
        }
    }
    Ok(hist)
}

/// `P(|U₁ - U₂| T_d ≤ T_w)` for independent uniforms: `2a - a²` with
/// `a = min(T_w/T_d, 1)`.
pub fn dispersed_coincidence_fraction<T: Scalar>(max_delay: T, half_width: T) -> Result<T> {
    if max_delay <= T::zero() {
        return Err(domain("maximum grating delay must be positive"));
    }
    if half_width < T::zero() {
        return Err(domain("window half width must be non-negative"));
    }
    let mut a = half_width / max_delay;
    if a > T::one() {
        a = T::one();
    }
    Ok((T::one() + T::one()) * a.clone() - a.clone() * a)
}
