//! Fringe statistics over phase sweeps.

use std::f64::consts::PI;

use crate::error::{domain, Result};
use crate::interferometer::Arm;
use crate::units::Femtos;

/// Heralded and delayed coincidence counts at one phase setting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    /// rad, in `[0, 2π)`.
    pub phase: f64,
    pub heralded_d1: u64,
    pub heralded_d2: u64,
    pub delayed_d1: u64,
    pub delayed_d2: u64,
    /// Signal photons sent into the interferometer.
    pub total_signal: u64,
}

impl SweepRow {
    pub fn count(&self, channel: Channel) -> u64 {
        match channel {
            Channel::HeraldedD1 => self.heralded_d1,
            Channel::HeraldedD2 => self.heralded_d2,
            Channel::DelayedD1 => self.delayed_d1,
            Channel::DelayedD2 => self.delayed_d2,
        }
    }

    pub fn heralded(&self) -> u64 {
        self.heralded_d1 + self.heralded_d2
    }

    pub fn delayed(&self) -> u64 {
        self.delayed_d1 + self.delayed_d2
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Channel {
    HeraldedD1,
    HeraldedD2,
    DelayedD1,
    DelayedD2,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SweepResult {
    rows: Vec<SweepRow>,
}

impl SweepResult {
    /// Rows must have strictly increasing phase.
    pub fn new(rows: Vec<SweepRow>) -> Result<Self> {
        if let Some(w) = rows.windows(2).find(|w| !(w[0].phase < w[1].phase)) {
            return Err(domain(format!(
                "sweep phases must be strictly increasing ({} is followed by {})",
                w[0].phase, w[1].phase
            )));
        }
        Ok(Self { rows })
    }

    /// Sorts rows by phase first.
    pub fn from_unordered(mut rows: Vec<SweepRow>) -> Result<Self> {
        rows.sort_by(|a, b| a.phase.total_cmp(&b.phase));
        Self::new(rows)
    }

    pub fn rows(&self) -> &[SweepRow] {
        &self.rows
    }

    /// Whether heralded plus delayed counts stay within the signal total on
    /// every row. Can fail when the two coincidence windows overlap.
    pub fn count_bound_holds(&self) -> bool {
        self.rows.iter().all(|r| r.heralded() + r.delayed() <= r.total_signal)
    }

    /// Row whose phase is circularly closest to `target`.
    pub fn nearest(&self, target: f64) -> Option<(&SweepRow, f64)> {
        self.rows
            .iter()
            .map(|r| (r, circular_distance(r.phase, target)))
            .min_by(|a, b| a.1.total_cmp(&b.1))
    }
}

fn circular_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(2.0 * PI);
    d.min(2.0 * PI - d)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    /// One standard deviation.
    pub sigma: f64,
}

impl Estimate {
    /// `|value - target| ≤ k σ`.
    pub fn agrees_with(&self, target: f64, k: f64) -> bool {
        (self.value - target).abs() <= k * self.sigma
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VisibilityEstimate {
    /// `(C_max - C_min)/(C_max + C_min)` with propagated counting error.
    pub extremal: Estimate,
    /// `sqrt(B² + D²)/A` from a least-squares fit of `A + B cos φ + D sin φ`,
    /// when at least five phases are present.
    pub cosine_fit: Option<f64>,
}

/// Visibility of one channel across the sweep. `None` when the channel
/// recorded no counts.
///
/// Each count is treated as binomial with a small success probability per
/// generated pair, so its variance is the count itself.
pub fn fringe_visibility(sweep: &SweepResult, channel: Channel) -> Result<Option<VisibilityEstimate>> {
    if sweep.rows.len() < 2 {
        return Err(domain("fringe visibility needs at least two phases"));
    }
    let counts: Vec<f64> = sweep.rows.iter().map(|r| r.count(channel) as f64).collect();
    let cmax = counts.iter().copied().fold(f64::MIN, f64::max);
    let cmin = counts.iter().copied().fold(f64::MAX, f64::min);
    let sum = cmax + cmin;
    if sum == 0.0 {
        return Ok(None);
    }
    let value = (cmax - cmin) / sum;
    let sigma = (4.0 * cmax * cmin / (sum * sum * sum)).sqrt();
    let cosine_fit = (sweep.rows.len() >= 5).then(|| cosine_fit(sweep, &counts)).flatten();
    Ok(Some(VisibilityEstimate {
        extremal: Estimate { value, sigma },
        cosine_fit,
    }))
}

fn cosine_fit(sweep: &SweepResult, counts: &[f64]) -> Option<f64> {
    // normal equations for y = a + b cos φ + d sin φ
    let mut m = [[0.0; 3]; 3];
    let mut v = [0.0; 3];
    for (r, &y) in sweep.rows.iter().zip(counts) {
        let basis = [1.0, r.phase.cos(), r.phase.sin()];
        for i in 0..3 {
            v[i] += basis[i] * y;
            for j in 0..3 {
                m[i][j] += basis[i] * basis[j];
            }
        }
    }
    let [a, b, d] = solve3(m, v)?;
    (a > 0.0).then(|| (b * b + d * d).sqrt() / a)
}

fn det3(m: &[[f64; 3]; 3]) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

fn solve3(m: [[f64; 3]; 3], v: [f64; 3]) -> Option<[f64; 3]> {
    let det = det3(&m);
    let scale = m.iter().flatten().fold(0.0_f64, |acc, x| acc.max(x.abs()));
    if det.abs() <= 1e-12 * scale.powi(3) {
        return None;
    }
    let mut out = [0.0; 3];
    for (col, slot) in out.iter_mut().enumerate() {
        let mut mc = m;
        for row in 0..3 {
            mc[row][col] = v[row];
        }
        *slot = det3(&mc) / det;
    }
    Some(out)
}

/// Smaller of the majority-port fractions of the heralded channel at the
/// rows nearest φ = 0 and φ = π. 1 is perfect all-D1/all-D2 switching.
pub fn switching_contrast(sweep: &SweepResult) -> Result<Option<Estimate>> {
    const TOLERANCE: f64 = PI / 8.0;
    let mut best: Option<Estimate> = None;
    for target in [0.0, PI] {
        let (row, dist) = sweep.nearest(target).ok_or_else(|| domain("empty sweep"))?;
        if dist > TOLERANCE {
            return Err(domain(format!("sweep has no row within π/8 of φ = {target}")));
        }
        let n = row.heralded();
        if n == 0 {
            return Ok(None);
        }
        let f = row.heralded_d1.max(row.heralded_d2) as f64 / n as f64;
        let est = Estimate {
            value: f,
            sigma: (f * (1.0 - f) / n as f64).sqrt(),
        };
        if best.is_none_or(|b| est.value < b.value) {
            best = Some(est);
        }
    }
    Ok(best)
}

/// Error rate of the best single-threshold rule assigning an arm from
/// arrival time (either orientation). 0.5 means timing carries no arm
/// information.
pub fn arm_classification_error(samples: &[(Femtos, Arm)]) -> f64 {
    if samples.is_empty() {
        return 0.0;
    }
    let mut sorted = samples.to_vec();
    sorted.sort_unstable_by_key(|s| s.0);
    let n = sorted.len() as i64;
    // threshold below everything: every sample called Long
    let mut errors = sorted.iter().filter(|s| s.1 == Arm::Short).count() as i64;
    let mut best = errors.min(n - errors);
    let mut i = 0;
    while i < sorted.len() {
        let t = sorted[i].0;
        while i < sorted.len() && sorted[i].0 == t {
            errors += if sorted[i].1 == Arm::Short { -1 } else { 1 };
            i += 1;
        }
        best = best.min(errors).min(n - errors);
    }
    best as f64 / n as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn row(phase: f64, h1: u64, h2: u64) -> SweepRow {
        SweepRow {
            phase,
            heralded_d1: h1,
            heralded_d2: h2,
            delayed_d1: h1,
            delayed_d2: h2,
            total_signal: 4 * (h1 + h2),
        }
    }

    #[test]
    fn perfect_and_flat_fringes() {
        let s = SweepResult::new(vec![row(0.0, 100, 0), row(PI, 0, 100)]).unwrap();
        let v = fringe_visibility(&s, Channel::HeraldedD1).unwrap().unwrap();
        assert_eq!(v.extremal.value, 1.0);
        assert_eq!(v.extremal.sigma, 0.0);
        let flat = SweepResult::new(vec![row(0.0, 50, 50), row(1.0, 50, 50), row(PI, 50, 50)]).unwrap();
        assert_eq!(
            fringe_visibility(&flat, Channel::HeraldedD1)
                .unwrap()
                .unwrap()
                .extremal
                .value,
            0.0
        );
    }

    #[test]
    fn visibility_of_087_rows() {
        let s = SweepResult::new(vec![row(0.0, 93_500, 6_500), row(PI, 6_500, 93_500)]).unwrap();
        let v = fringe_visibility(&s, Channel::HeraldedD1).unwrap().unwrap();
        assert_relative_eq!(v.extremal.value, 0.87, epsilon = 1e-12);
        // 4ab/(a+b)^3 at a = 93.5k, b = 6.5k
        assert_relative_eq!(
            v.extremal.sigma,
            (4.0 * 93_500.0 * 6_500.0 / 1e15_f64).sqrt(),
            epsilon = 1e-12
        );
        let c = switching_contrast(&s).unwrap().unwrap();
        assert_relative_eq!(c.value, 0.935, epsilon = 1e-12);
    }

    #[test]
    fn zero_counts_are_absent() {
        let s = SweepResult::new(vec![row(0.0, 0, 0), row(PI, 0, 0)]).unwrap();
        assert!(fringe_visibility(&s, Channel::HeraldedD2).unwrap().is_none());
        assert!(switching_contrast(&s).unwrap().is_none());
    }

    #[test]
    fn preconditions() {
        assert!(SweepResult::new(vec![row(1.0, 1, 1), row(1.0, 1, 1)]).is_err());
        assert!(SweepResult::new(vec![row(2.0, 1, 1), row(1.0, 1, 1)]).is_err());
        let one = SweepResult::new(vec![row(0.0, 1, 1)]).unwrap();
        assert!(fringe_visibility(&one, Channel::HeraldedD1).is_err());
        let no_pi = SweepResult::new(vec![row(0.0, 1, 1), row(1.0, 1, 1)]).unwrap();
        assert!(switching_contrast(&no_pi).is_err());
        let sorted = SweepResult::from_unordered(vec![row(3.0, 1, 1), row(0.5, 1, 1)]).unwrap();
        assert_eq!(sorted.rows()[0].phase, 0.5);
    }

    #[test]
    fn nearest_row_wraps_around() {
        let s = SweepResult::new(vec![row(PI, 0, 10), row(2.0 * PI - 1e-9, 10, 0)]).unwrap();
        let (r, d) = s.nearest(0.0).unwrap();
        assert_eq!(r.heralded_d1, 10);
        assert!(d < 1e-8);
        assert_eq!(switching_contrast(&s).unwrap().unwrap().value, 1.0);
    }

    #[test]
    fn cosine_fit_recovers_visibility() {
        let v = 0.6;
        let rows: Vec<SweepRow> = (0..8)
            .map(|k| {
                let phi = k as f64 * PI / 4.0;
                let h1 = (1e4 * (1.0 + v * phi.cos())).round() as u64;
                row(phi, h1, 20_000 - h1)
            })
            .collect();
        let s = SweepResult::new(rows).unwrap();
        let est = fringe_visibility(&s, Channel::HeraldedD1).unwrap().unwrap();
        assert_relative_eq!(est.cosine_fit.unwrap(), v, epsilon = 1e-4);
        assert_relative_eq!(est.extremal.value, v, epsilon = 1e-4);
    }

    #[test]
    fn classifier_error() {
        let separated: Vec<(Femtos, Arm)> = (0..100)
            .map(|i| {
                if i % 2 == 0 {
                    (i, Arm::Short)
                } else {
                    (1000 + i, Arm::Long)
                }
            })
            .collect();
        assert_eq!(arm_classification_error(&separated), 0.0);
        let inverted: Vec<(Femtos, Arm)> = separated
            .iter()
            .map(|&(t, a)| (t, if a == Arm::Short { Arm::Long } else { Arm::Short }))
            .collect();
        assert_eq!(arm_classification_error(&inverted), 0.0);
        let same_time: Vec<(Femtos, Arm)> = (0..10)
            .map(|i| (5, if i < 5 { Arm::Short } else { Arm::Long }))
            .collect();
        assert_eq!(arm_classification_error(&same_time), 0.5);
    }
}
