//! Experiment configuration files.
//!
//! ```text
//! [source]
//! pump_wavelength = 0.5um
//! pair_rate = 1e6/s
//! strategy = two-photon-derived
//!
//! [window]
//! half_width = 330ps
//! ```
//!
//! Line-based `[section]` headers with `key = value` pairs; `#` starts a
//! comment. Dimensioned values must carry a unit suffix. Unknown sections or
//! keys and duplicate keys are errors.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::str::FromStr;

use crate::coincidence::CoincidenceWindow;
use crate::error::{Error, Result};
use crate::grating::{GratingGeometry, PhotonLocalityModel};
use crate::interferometer::{DetectorSpec, EventModel, InterferometerGeometry, PhaseSetting};
use crate::physics::SpectrumSpec;
use crate::source::{SourceConfig, SourceStrategy};
use crate::units::{format_quantity, parse_quantity, round_fs, seconds_to_fs, Dimension, Femtos, SPEED_OF_LIGHT};

macro_rules! keyword_enum {
    ($ty:ty, $what:literal, { $($variant:path => $word:literal),+ $(,)? }) => {
        impl FromStr for $ty {
            type Err = Error;
            fn from_str(s: &str) -> Result<Self> {
                match s.trim() {
                    $($word => Ok($variant),)+
                    other => Err(Error::Invalid(format!(
                        concat!("unknown ", $what, " `{}` (expected one of: {})"),
                        other,
                        [$($word),+].join(", ")
                    ))),
                }
            }
        }

        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(match self { $($variant => $word,)+ })
            }
        }
    };
}

keyword_enum!(SourceStrategy, "strategy", {
    SourceStrategy::OnePhotonPairs => "one-photon-pairs",
    SourceStrategy::TwoPhotonDerived => "two-photon-derived",
});
keyword_enum!(PhotonLocalityModel, "locality", {
    PhotonLocalityModel::Localized => "localized",
    PhotonLocalityModel::Dispersed => "dispersed",
});
keyword_enum!(EventModel, "event model", {
    EventModel::PilotWave => "pilot-wave",
    EventModel::Collapse => "collapse",
});
keyword_enum!(Experiment, "experiment", {
    Experiment::A => "A",
    Experiment::B => "B",
});

/// A: pair synchronization across the grating. B: heralded interferometer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Experiment {
    A,
    #[default]
    B,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GratingSpec {
    pub width: f64,
    pub sin_theta: f64,
    pub sin_theta0: f64,
    /// Defaults to the pump wavelength for the two-photon strategy and to
    /// twice the pump wavelength otherwise.
    pub selected_wavelength: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InterferometerSpec {
    /// Defaults to the short path.
    pub herald_path: Option<f64>,
    pub short_path: f64,
    pub long_path: f64,
    /// Defaults to twice the pump wavelength.
    pub nominal_wavelength: Option<f64>,
    pub r2_displacement: f64,
}

/// Detector settings as written in the file; jitter in seconds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorSettings {
    pub efficiency: f64,
    pub jitter: f64,
}

impl DetectorSettings {
    pub fn spec(&self) -> DetectorSpec {
        DetectorSpec::new(self.efficiency, seconds_to_fs(self.jitter)).expect("validated on load")
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Detectors {
    pub d1: DetectorSettings,
    pub d2: DetectorSettings,
    pub d3: DetectorSettings,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub experiment: Experiment,
    pub pairs: usize,
    pub source: SourceConfig,
    pub grating: GratingSpec,
    pub locality: PhotonLocalityModel,
    pub interferometer: InterferometerSpec,
    pub model: EventModel,
    pub detectors: Detectors,
    /// Coincidence window half width, s.
    pub window_half_width: f64,
    /// R2 displacements for a sweep, m. Empty means quarter-wave steps.
    pub sweep: Vec<f64>,
    pub histogram_bin: f64,
    pub histogram_range: f64,
}

impl RunConfig {
    pub fn grating_geometry(&self) -> Result<GratingGeometry<f64>> {
        let g = &self.grating;
        let selected = g.selected_wavelength.unwrap_or(match self.source.strategy {
            SourceStrategy::TwoPhotonDerived => self.source.pump_wavelength,
            SourceStrategy::OnePhotonPairs => 2.0 * self.source.pump_wavelength,
        });
        GratingGeometry::new(g.width, g.sin_theta, g.sin_theta0, selected)
    }

    pub fn interferometer_geometry(&self) -> Result<InterferometerGeometry<f64>> {
        let i = &self.interferometer;
        InterferometerGeometry::new(
            i.herald_path.unwrap_or(i.short_path),
            i.short_path,
            i.long_path,
            i.nominal_wavelength.unwrap_or(2.0 * self.source.pump_wavelength),
        )
    }

    pub fn phase_setting(&self) -> PhaseSetting<f64> {
        PhaseSetting::new(self.interferometer.r2_displacement)
    }

    /// Displacements for a sweep: the configured list, or four quarter-wave
    /// steps of the nominal wavelength.
    pub fn sweep_settings(&self) -> Result<Vec<PhaseSetting<f64>>> {
        if !self.sweep.is_empty() {
            return Ok(self.sweep.iter().map(|&d| PhaseSetting::new(d)).collect());
        }
        let lambda = *self.interferometer_geometry()?.nominal_wavelength();
        Ok((0..4).map(|k| PhaseSetting::new(k as f64 * lambda / 8.0)).collect())
    }

    /// Ensemble spectrum of the interfering one-photon states: the pump
    /// laser's bandwidth when derived from two-photon states, otherwise the
    /// phase-matching bandwidth limited by the grating passband `c/x`.
    pub fn signal_spectrum(&self) -> Result<SpectrumSpec<f64>> {
        let center = self.source.pump_frequency() / 2.0;
        let bandwidth = match self.source.strategy {
            SourceStrategy::TwoPhotonDerived => self.source.laser_bandwidth,
            SourceStrategy::OnePhotonPairs => {
                let grating_limit = SPEED_OF_LIGHT / self.grating_geometry()?.edge_path_difference();
                self.source.detuning_rms.min(grating_limit)
            }
        };
        SpectrumSpec::new(center, bandwidth)
    }

    pub fn window_fs(&self) -> Femtos {
        round_fs(seconds_to_fs(self.window_half_width))
    }

    pub fn window(&self) -> Result<CoincidenceWindow> {
        CoincidenceWindow::new(self.window_fs(), 0)
    }

    pub fn histogram_bin_fs(&self) -> Femtos {
        round_fs(seconds_to_fs(self.histogram_bin))
    }

    pub fn histogram_range_fs(&self) -> Femtos {
        round_fs(seconds_to_fs(self.histogram_range))
    }

    /// Revalidates every component; returns non-fatal warnings.
    pub fn validate(&self) -> Result<Vec<String>> {
        self.source.validate()?;
        self.grating_geometry()?;
        let geom = self.interferometer_geometry()?;
        self.window()?;
        for d in [&self.detectors.d1, &self.detectors.d2, &self.detectors.d3] {
            DetectorSpec::new(d.efficiency, seconds_to_fs(d.jitter))?;
        }
        if self.histogram_bin_fs() <= 0 || self.histogram_range_fs() < 0 {
            return Err(Error::Invalid(
                "histogram bin must be positive and range non-negative".into(),
            ));
        }
        let spectrum = self.signal_spectrum()?;
        if self.model == EventModel::Collapse && spectrum.is_monochromatic() {
            return Err(Error::Invalid(
                "the collapse model needs a non-zero signal bandwidth (it has no finite coherence time otherwise)"
                    .into(),
            ));
        }
        let mut warnings = Vec::new();
        for setting in std::iter::once(self.phase_setting()).chain(self.sweep_settings()?) {
            let delay_fs = crate::units::travel_fs(geom.effective_difference(&setting));
            if self.window_fs() as f64 > delay_fs / 2.0 {
                warnings.push(format!(
                    "window half width {} fs exceeds half the arm delay ({:.0} fs) at r2_displacement {}; \
                     heralded and delayed populations overlap",
                    self.window_fs(),
                    delay_fs / 2.0,
                    format_quantity(setting.r2_displacement, Dimension::Length)
                ));
            }
            if setting.is_flagged(&geom) {
                warnings.push(format!(
                    "r2_displacement {} is a wavelength or more",
                    format_quantity(setting.r2_displacement, Dimension::Length)
                ));
            }
        }
        warnings.dedup();
        Ok(warnings)
    }

    pub fn to_config_string(&self) -> String {
        let len = |v: f64| format_quantity(v, Dimension::Length);
        let time = |v: f64| format_quantity(v, Dimension::Time);
        let freq = |v: f64| format_quantity(v, Dimension::Frequency);
        let mut s = String::new();
        let _ = writeln!(s, "[run]\nexperiment = {}\npairs = {}\n", self.experiment, self.pairs);
        let src = &self.source;
        let _ = writeln!(
            s,
            "[source]\npump_wavelength = {}\npair_rate = {}\ndetuning_rms = {}\nlaser_bandwidth = {}\nstrategy = {}\n",
            len(src.pump_wavelength),
            format_quantity(src.pair_rate, Dimension::Rate),
            freq(src.detuning_rms),
            freq(src.laser_bandwidth),
            src.strategy
        );
        let g = &self.grating;
        let _ = write!(
            s,
            "[grating]\nwidth = {}\nsin_theta = {:?}\nsin_theta0 = {:?}\n",
            len(g.width),
            g.sin_theta,
            g.sin_theta0
        );
        if let Some(w) = g.selected_wavelength {
            let _ = writeln!(s, "selected_wavelength = {}", len(w));
        }
        let _ = writeln!(s, "locality = {}\n", self.locality);
        let i = &self.interferometer;
        let _ = writeln!(s, "[interferometer]");
        if let Some(h) = i.herald_path {
            let _ = writeln!(s, "herald_path = {}", len(h));
        }
        let _ = writeln!(
            s,
            "short_path = {}\nlong_path = {}",
            len(i.short_path),
            len(i.long_path)
        );
        if let Some(w) = i.nominal_wavelength {
            let _ = writeln!(s, "nominal_wavelength = {}", len(w));
        }
        let _ = writeln!(
            s,
            "r2_displacement = {}\nmodel = {}\n",
            len(i.r2_displacement),
            self.model
        );
        let _ = writeln!(s, "[detectors]");
        for (name, d) in [
            ("d1", &self.detectors.d1),
            ("d2", &self.detectors.d2),
            ("d3", &self.detectors.d3),
        ] {
            let _ = writeln!(
                s,
                "{name}_efficiency = {:?}\n{name}_jitter = {}",
                d.efficiency,
                time(d.jitter)
            );
        }
        let _ = writeln!(s, "\n[window]\nhalf_width = {}\n", time(self.window_half_width));
        if !self.sweep.is_empty() {
            let list: Vec<String> = self.sweep.iter().map(|&d| len(d)).collect();
            let _ = writeln!(s, "[sweep]\nr2_displacements = {}\n", list.join(", "));
        }
        let _ = writeln!(
            s,
            "[histogram]\nbin_width = {}\nrange = {}",
            time(self.histogram_bin),
            time(self.histogram_range)
        );
        s
    }
}

impl fmt::Display for RunConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_config_string())
    }
}

const SECTIONS: &[(&str, &[&str])] = &[
    ("run", &["experiment", "pairs"]),
    (
        "source",
        &[
            "pump_wavelength",
            "pair_rate",
            "detuning_rms",
            "laser_bandwidth",
            "strategy",
        ],
    ),
    (
        "grating",
        &["width", "sin_theta", "sin_theta0", "selected_wavelength", "locality"],
    ),
    (
        "interferometer",
        &[
            "herald_path",
            "short_path",
            "long_path",
            "nominal_wavelength",
            "r2_displacement",
            "model",
        ],
    ),
    (
        "detectors",
        &[
            "efficiency",
            "jitter",
            "d1_efficiency",
            "d1_jitter",
            "d2_efficiency",
            "d2_jitter",
            "d3_efficiency",
            "d3_jitter",
        ],
    ),
    ("window", &["half_width"]),
    ("sweep", &["r2_displacements"]),
    ("histogram", &["bin_width", "range"]),
];

struct Entries {
    map: BTreeMap<(String, String), (String, usize)>,
}

impl Entries {
    fn parse(text: &str) -> Result<Self> {
        let mut map = BTreeMap::new();
        let mut section: Option<String> = None;
        let mut seen_sections = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: String| Error::Config { line: line_no, msg };
            if let Some(name) = line.strip_prefix('[') {
                let name = name
                    .strip_suffix(']')
                    .ok_or_else(|| err(format!("malformed section header `{line}`")))?
                    .trim();
                if !SECTIONS.iter().any(|(s, _)| *s == name) {
                    return Err(err(format!("unknown section `[{name}]`")));
                }
                if seen_sections.iter().any(|s| s == name) {
                    return Err(err(format!("section `[{name}]` appears twice")));
                }
                seen_sections.push(name.to_string());
                section = Some(name.to_string());
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err(format!("expected `key = value`, got `{line}`")))?;
            let (key, value) = (key.trim(), value.trim());
            let sec = section
                .clone()
                .ok_or_else(|| err(format!("key `{key}` outside any section")))?;
            let allowed = SECTIONS.iter().find(|(s, _)| *s == sec).map(|(_, k)| *k).unwrap_or(&[]);
            if !allowed.contains(&key) {
                return Err(err(format!("unknown key `{key}` in [{sec}]")));
            }
            if value.is_empty() {
                return Err(err(format!("key `{key}` has no value")));
            }
            if map
                .insert((sec.clone(), key.to_string()), (value.to_string(), line_no))
                .is_some()
            {
                return Err(err(format!("duplicate key `{key}` in [{sec}]")));
            }
        }
        Ok(Self { map })
    }

    fn raw(&self, section: &str, key: &str) -> Option<&(String, usize)> {
        self.map.get(&(section.to_string(), key.to_string()))
    }

    fn get<T>(&self, section: &str, key: &str, f: impl FnOnce(&str) -> Result<T>) -> Result<Option<T>> {
        match self.raw(section, key) {
            None => Ok(None),
            Some((value, line)) => f(value).map(Some).map_err(|e| Error::Config {
                line: *line,
                msg: format!("{section}.{key}: {}", strip_prefix(e)),
            }),
        }
    }

    fn require<T>(&self, section: &str, key: &str, f: impl FnOnce(&str) -> Result<T>) -> Result<T> {
        self.get(section, key, f)?
            .ok_or_else(|| Error::Invalid(format!("missing required key `{key}` in [{section}]")))
    }

    fn quantity(&self, section: &str, key: &str, dim: Dimension) -> Result<Option<f64>> {
        self.get(section, key, |v| parse_quantity(v, dim))
    }

    fn required_quantity(&self, section: &str, key: &str, dim: Dimension) -> Result<f64> {
        self.require(section, key, |v| parse_quantity(v, dim))
    }
}

fn strip_prefix(e: Error) -> String {
    match e {
        Error::Domain(m) | Error::Invalid(m) | Error::Geometry(m) => m,
        other => other.to_string(),
    }
}

impl FromStr for RunConfig {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        use Dimension::*;
        let e = Entries::parse(text)?;

        let experiment = e.get("run", "experiment", |v| v.parse())?.unwrap_or_default();
        let pairs = e
            .get("run", "pairs", |v| {
                let n: f64 = parse_quantity(v, Dimensionless)?;
                if n < 0.0 || n.fract() != 0.0 || n > 1e12 {
                    return Err(Error::Invalid(format!(
                        "pair count must be a non-negative integer, got `{v}`"
                    )));
                }
                Ok(n as usize)
            })?
            .unwrap_or(100_000);

        let source = SourceConfig {
            pump_wavelength: e.required_quantity("source", "pump_wavelength", Length)?,
            pair_rate: e.required_quantity("source", "pair_rate", Rate)?,
            detuning_rms: e.quantity("source", "detuning_rms", Frequency)?.unwrap_or(10e12),
            laser_bandwidth: e.quantity("source", "laser_bandwidth", Frequency)?.unwrap_or(0.0),
            strategy: e.get("source", "strategy", |v| v.parse())?.unwrap_or_default(),
        };

        let grating = GratingSpec {
            width: e.required_quantity("grating", "width", Length)?,
            sin_theta: e.quantity("grating", "sin_theta", Dimensionless)?.unwrap_or(1.0),
            sin_theta0: e.quantity("grating", "sin_theta0", Dimensionless)?.unwrap_or(0.0),
            selected_wavelength: e.quantity("grating", "selected_wavelength", Length)?,
        };
        let locality = e.get("grating", "locality", |v| v.parse())?.unwrap_or_default();

        let interferometer = InterferometerSpec {
            herald_path: e.quantity("interferometer", "herald_path", Length)?,
            short_path: e.required_quantity("interferometer", "short_path", Length)?,
            long_path: e.required_quantity("interferometer", "long_path", Length)?,
            nominal_wavelength: e.quantity("interferometer", "nominal_wavelength", Length)?,
            r2_displacement: e.quantity("interferometer", "r2_displacement", Length)?.unwrap_or(0.0),
        };
        let model = e.get("interferometer", "model", |v| v.parse())?.unwrap_or_default();

        let eff = e.quantity("detectors", "efficiency", Dimensionless)?.unwrap_or(1.0);
        let jit = e.quantity("detectors", "jitter", Time)?.unwrap_or(0.0);
        let detector = |name: &str| -> Result<DetectorSettings> {
            let efficiency = e
                .quantity("detectors", &format!("{name}_efficiency"), Dimensionless)?
                .unwrap_or(eff);
            let jitter = e.quantity("detectors", &format!("{name}_jitter"), Time)?.unwrap_or(jit);
            DetectorSpec::new(efficiency, seconds_to_fs(jitter))
                .map_err(|err| Error::Invalid(format!("detector {name}: {}", strip_prefix(err))))?;
            Ok(DetectorSettings { efficiency, jitter })
        };
        let detectors = Detectors {
            d1: detector("d1")?,
            d2: detector("d2")?,
            d3: detector("d3")?,
        };

        let window_half_width = e.required_quantity("window", "half_width", Time)?;
        let sweep = e
            .get("sweep", "r2_displacements", |v| {
                v.split(',')
                    .map(|item| parse_quantity(item, Length))
                    .collect::<Result<Vec<f64>>>()
            })?
            .unwrap_or_default();

        let cfg = RunConfig {
            experiment,
            pairs,
            source,
            grating,
            locality,
            interferometer,
            model,
            detectors,
            window_half_width,
            sweep,
            histogram_bin: e.quantity("histogram", "bin_width", Time)?.unwrap_or(1e-12),
            histogram_range: e.quantity("histogram", "range", Time)?.unwrap_or(100e-12),
        };
        cfg.validate()?;
        Ok(cfg)
    }
}
