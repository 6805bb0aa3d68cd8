//! Physical constants, canonical units and unit-suffixed quantity parsing.
//!
//! Analytic formulas work in SI (m, s, Hz). Event timestamps are integer
//! femtoseconds.

use crate::error::{Error, Result};

/// Speed of light in vacuum, m/s (exact by SI definition).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

pub const FS_PER_SECOND: f64 = 1e15;
pub const HZ_PER_THZ: f64 = 1e12;

/// Integer femtosecond timestamp.
pub type Femtos = i64;

pub fn seconds_to_fs(seconds: f64) -> f64 {
    seconds * FS_PER_SECOND
}

pub fn fs_to_seconds(fs: f64) -> f64 {
    fs / FS_PER_SECOND
}

/// Rounds a real femtosecond offset to the nearest integer tick.
pub fn round_fs(fs: f64) -> Femtos {
    fs.round() as Femtos
}

/// Light travel time over `meters`, in femtoseconds.
pub fn travel_fs(meters: f64) -> f64 {
    seconds_to_fs(meters / SPEED_OF_LIGHT)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dimension {
    Length,
    Time,
    Frequency,
    /// Events per second.
    Rate,
    Dimensionless,
}

impl Dimension {
    fn scale(self, suffix: &str) -> Option<f64> {
        let s = match self {
            Dimension::Length => match suffix {
                "m" => 1.0,
                "cm" => 1e-2,
                "mm" => 1e-3,
                "um" | "µm" | "μm" => 1e-6,
                "nm" => 1e-9,
                "pm" => 1e-12,
                _ => return None,
            },
            Dimension::Time => match suffix {
                "s" => 1.0,
                "ms" => 1e-3,
                "us" | "µs" | "μs" => 1e-6,
                "ns" => 1e-9,
                "ps" => 1e-12,
                "fs" => 1e-15,
                _ => return None,
            },
            Dimension::Frequency => match suffix {
                "Hz" => 1.0,
                "kHz" => 1e3,
                "MHz" => 1e6,
                "GHz" => 1e9,
                "THz" => 1e12,
                _ => return None,
            },
            Dimension::Rate => match suffix {
                "/s" | "Hz" => 1.0,
                "kHz" => 1e3,
                "MHz" => 1e6,
                _ => return None,
            },
            Dimension::Dimensionless => match suffix {
                "" => 1.0,
                _ => return None,
            },
        };
        Some(s)
    }

    /// Suffix used when writing a value back out in canonical SI units.
    pub fn canonical_suffix(self) -> &'static str {
        match self {
            Dimension::Length => "m",
            Dimension::Time => "s",
            Dimension::Frequency => "Hz",
            Dimension::Rate => "/s",
            Dimension::Dimensionless => "",
        }
    }
}

/// Length of the leading numeric literal in `s`.
fn numeric_prefix_len(s: &str) -> usize {
    let b = s.as_bytes();
    let mut i = 0;
    if i < b.len() && (b[i] == b'+' || b[i] == b'-') {
        i += 1;
    }
    while i < b.len() && (b[i].is_ascii_digit() || b[i] == b'.') {
        i += 1;
    }
    if i < b.len() && (b[i] == b'e' || b[i] == b'E') {
        let mut j = i + 1;
        if j < b.len() && (b[j] == b'+' || b[j] == b'-') {
            j += 1;
        }
        if j < b.len() && b[j].is_ascii_digit() {
            while j < b.len() && b[j].is_ascii_digit() {
                j += 1;
            }
            i = j;
        }
    }
    i
}

/// Parses a value such as `1cm`, `330 ps`, `0.5um` or `1e6/s` into SI units.
///
/// A bare number is accepted only for dimensionless quantities; everything
/// else must carry an explicit unit.
pub fn parse_quantity(text: &str, dim: Dimension) -> Result<f64> {
    let text = text.trim();
    let split = numeric_prefix_len(text);
    let (number, suffix) = text.split_at(split);
    let value: f64 = number
        .parse()
        .map_err(|_| Error::Domain(format!("`{text}` does not start with a number")))?;
    let suffix = suffix.trim();
    let scale = dim
        .scale(suffix)
        .ok_or_else(|| Error::Domain(format!("`{text}`: unit `{suffix}` is not valid for a {dim:?} value")))?;
    if !value.is_finite() {
        return Err(Error::Domain(format!("`{text}` is not finite")));
    }
    Ok(value * scale)
}

/// Writes an SI value with its canonical suffix; re-parses to the same bits.
pub fn format_quantity(value: f64, dim: Dimension) -> String {
    format!("{value:?}{}", dim.canonical_suffix())
}


/// Exact rational reading of a decimal quantity: `1cm` is exactly 1/100 m.
pub fn parse_exact_quantity(text: &str, dim: Dimension) -> Result<crate::num::Exact> {
    use num_bigint::BigInt;
    use num_traits::{One, Pow};

    let text = text.trim();
    let split = numeric_prefix_len(text);
    let (number, suffix) = text.split_at(split);
    let scale = dim.scale(suffix.trim()).ok_or_else(|| {
        Error::Domain(format!(
            "`{text}`: unit `{}` is not valid for a {dim:?} value",
            suffix.trim()
        ))
    })?;
    let bad = || Error::Domain(format!("`{text}` does not start with a decimal number"));

    let (mantissa, exponent) = match number.find(['e', 'E']) {
        Some(i) => (&number[..i], number[i + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (number, 0),
    };
    let (sign, mantissa) = match mantissa.strip_prefix('-') {
        Some(m) => (-1, m),
        None => (1, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int, frac) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int.is_empty() && frac.is_empty() || !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits: BigInt = format!("{int}{frac}").parse().map_err(|_| bad())?;
    let exp10 = exponent - frac.len() as i32 + (scale.log10().round() as i32);
    let ten = crate::num::Exact::from_integer(BigInt::from(10));
    let mut value = crate::num::Exact::from_integer(digits * sign);
    value *= if exp10 >= 0 {
        Pow::pow(ten, exp10 as u32)
    } else {
        crate::num::Exact::one() / Pow::pow(ten, (-exp10) as u32)
    };
    Ok(value)
}
