//! Grating and interferometer design table.

use std::fmt;

use crate::error::{domain, Result};
use crate::grating::GratingGeometry;
use crate::num::Scalar;

#[derive(Debug, Clone)]
pub struct DesignInputs<T> {
    pub width: T,
    pub sin_theta: T,
    pub sin_theta0: T,
    /// Wavelength for resolving power and passband; the pump wavelength when absent.
    pub wavelength: Option<T>,
    pub pump_wavelength: Option<T>,
    /// Visibility the interferometer should keep at its path difference.
    pub target_visibility: f64,
    /// Coincidence half width, s; bounds the path difference from below.
    pub window: Option<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DesignReport<T> {
    pub edge_path_difference: T,
    pub resolving_power: Option<T>,
    pub passband: Option<T>,
    pub coherence_length: T,
    pub coherence_time: T,
    pub separation_ratio: Option<T>,
    pub target_visibility: f64,
    /// Largest `ΔL` keeping the target visibility with a grating-limited spectrum, m.
    pub max_path_difference: f64,
    /// Smallest `ΔL` whose arm delay exceeds twice the window, m.
    pub min_path_difference: Option<T>,
}

pub fn design<T: Scalar>(inputs: &DesignInputs<T>) -> Result<DesignReport<T>> {
    if !(inputs.target_visibility > 0.0 && inputs.target_visibility < 1.0) {
        return Err(domain("target visibility must lie strictly between 0 and 1"));
    }
    let selected = inputs
        .wavelength
        .clone()
        .or_else(|| inputs.pump_wavelength.clone())
        .unwrap_or_else(T::one);
    let g = GratingGeometry::new(
        inputs.width.clone(),
        inputs.sin_theta.clone(),
        inputs.sin_theta0.clone(),
        selected,
    )?;
    let resolve_at = inputs.wavelength.clone().or_else(|| inputs.pump_wavelength.clone());
    let coherence = g.filtered_coherence();
    let x = g.edge_path_difference();
    // V(ΔL) = exp(-2π² (ΔL/x)²) for a grating-limited bandwidth c/x
    let budget = (-inputs.target_visibility.ln() / (2.0 * std::f64::consts::PI.powi(2))).sqrt();
    let two = T::one() + T::one();
    Ok(DesignReport {
        resolving_power: resolve_at.clone().map(|w| g.resolving_power(w)).transpose()?,
        passband: resolve_at.map(|w| g.passband(w)).transpose()?,
        coherence_length: coherence.coherence_length().clone(),
        coherence_time: coherence.coherence_time().clone(),
        separation_ratio: inputs
            .pump_wavelength
            .clone()
            .map(|p| g.state_separation_ratio(p))
            .transpose()?,
        target_visibility: inputs.target_visibility,
        max_path_difference: x.to_f64_lossy() * budget,
        min_path_difference: inputs.window.clone().map(|w| two * T::speed_of_light() * w),
        edge_path_difference: x,
    })
}

/// Engineering notation with an SI prefix.
pub fn si(value: f64, unit: &str) -> String {
    const PREFIXES: [(f64, &str); 9] = [
        (1e9, "G"),
        (1e6, "M"),
        (1e3, "k"),
        (1.0, ""),
        (1e-3, "m"),
        (1e-6, "u"),
        (1e-9, "n"),
        (1e-12, "p"),
        (1e-15, "f"),
    ];
    if value == 0.0 || !value.is_finite() {
        return format!("{value} {unit}");
    }
    let (scale, prefix) = PREFIXES
        .iter()
        .copied()
        .find(|(s, _)| value.abs() >= *s * 0.999_999_5)
        .unwrap_or((1e-15, "f"));
    format!("{} {prefix}{unit}", sig(value / scale))
}

/// Six significant digits without trailing zeros.
fn sig(v: f64) -> String {
    let digits = (5 - v.abs().log10().floor() as i32).max(0) as usize;
    let s = format!("{v:.digits$}");
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

fn number(v: f64) -> String {
    if v.fract() == 0.0 && v.abs() < 1e15 {
        format!("{v:.0}")
    } else {
        sig(v)
    }
}

impl<T: Scalar> fmt::Display for DesignReport<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let row = |f: &mut fmt::Formatter<'_>, name: &str, value: String| writeln!(f, "{name:<32}{value}");
        row(
            f,
            "edge path difference x",
            si(self.edge_path_difference.to_f64_lossy(), "m"),
        )?;
        if let Some(r) = &self.resolving_power {
            row(f, "resolving power", number(r.to_f64_lossy()))?;
        }
        if let Some(p) = &self.passband {
            row(f, "passband", si(p.to_f64_lossy(), "m"))?;
        }
        row(f, "coherence length l_c", si(self.coherence_length.to_f64_lossy(), "m"))?;
        row(f, "coherence time T_c", si(self.coherence_time.to_f64_lossy(), "s"))?;
        if let Some(r) = &self.separation_ratio {
            row(f, "state separation ratio", number(r.to_f64_lossy()))?;
        }
        row(
            f,
            &format!("max path difference (V>={})", self.target_visibility),
            si(self.max_path_difference, "m"),
        )?;
        if let Some(m) = &self.min_path_difference {
            row(f, "min path difference", si(m.to_f64_lossy(), "m"))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::{ratio, Exact};
    use crate::units::{parse_exact_quantity, Dimension};

    fn inputs(width: &str, pump: Option<&str>) -> DesignInputs<Exact> {
        DesignInputs {
            width: parse_exact_quantity(width, Dimension::Length).unwrap(),
            sin_theta: ratio(1, 1),
            sin_theta0: ratio(0, 1),
            wavelength: None,
            pump_wavelength: pump.map(|p| parse_exact_quantity(p, Dimension::Length).unwrap()),
            target_visibility: 0.9,
            window: None,
        }
    }

    #[test]
    fn centimetre_and_millimetre_gratings() {
        let r = design(&inputs("1cm", Some("0.5um"))).unwrap();
        assert_eq!(r.separation_ratio, Some(ratio(20_000, 1)));
        assert_eq!(r.resolving_power, Some(ratio(20_000, 1)));
        let r = design(&inputs("1mm", Some("0.5um"))).unwrap();
        assert_eq!(r.separation_ratio, Some(ratio(2000, 1)));
        let text = r.to_string();
        assert!(text.contains("state separation ratio          2000\n"), "{text}");
    }

    #[test]
    fn coherence_without_pump() {
        let r = design(&inputs("1cm", None)).unwrap();
        assert_eq!(r.coherence_length, ratio(1, 100));
        assert!(r.separation_ratio.is_none() && r.resolving_power.is_none());
        let text = r.to_string();
        assert!(text.contains("10 mm"), "{text}");
        assert!(text.contains("33.3564 ps"), "{text}");
    }

    #[test]
    fn path_budget() {
        let mut i = inputs("1cm", None);
        i.window = Some(parse_exact_quantity("20ps", Dimension::Time).unwrap());
        let r = design(&i).unwrap();
        let v = (-2.0 * std::f64::consts::PI.powi(2) * (r.max_path_difference / 0.01).powi(2)).exp();
        assert!((v - 0.9).abs() < 1e-12);
        assert_eq!(
            r.min_path_difference,
            Some(ratio(2 * 299_792_458 * 20, 1_000_000_000_000))
        );
        i.target_visibility = 1.0;
        assert!(design(&i).is_err());
    }

    #[test]
    fn formatting() {
        assert_eq!(si(3.33564095198152e-11, "s"), "33.3564 ps");
        assert_eq!(si(0.01, "m"), "10 mm");
        assert_eq!(si(2.5e-11, "m"), "25 pm");
        assert_eq!(number(20000.0), "20000");
    }
}
