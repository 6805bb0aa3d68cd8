//! Spectral and coherence conversions, and the fringe visibility envelope.

use num_traits::Float;

use crate::error::{domain, Result};
use crate::num::{Real, Scalar};
use crate::units::HZ_PER_THZ;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SpectralShape {
    #[default]
    Gaussian,
}

/// Ensemble spectrum of the interfering light. Frequencies are stored in Hz.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumSpec<T> {
    center_frequency: T,
    rms_bandwidth: T,
    shape: SpectralShape,
}

impl<T: Scalar> SpectrumSpec<T> {
    /// `rms_bandwidth = 0` describes ideal monochromatic light.
    pub fn new(center_frequency_hz: T, rms_bandwidth_hz: T) -> Result<Self> {
        if center_frequency_hz <= T::zero() {
            return Err(domain(format!(
                "center frequency must be positive, got {center_frequency_hz:?} Hz"
            )));
        }
        if rms_bandwidth_hz < T::zero() {
            return Err(domain(format!(
                "rms bandwidth must be non-negative, got {rms_bandwidth_hz:?} Hz"
            )));
        }
        Ok(Self {
            center_frequency: center_frequency_hz,
            rms_bandwidth: rms_bandwidth_hz,
            shape: SpectralShape::Gaussian,
        })
    }

    pub fn from_thz(center_thz: T, rms_thz: T) -> Result<Self> {
        let k = T::lit(HZ_PER_THZ);
        Self::new(center_thz * k.clone(), rms_thz * k)
    }

    pub fn monochromatic(center_frequency_hz: T) -> Result<Self> {
        Self::new(center_frequency_hz, T::zero())
    }

    pub fn center_frequency(&self) -> &T {
        &self.center_frequency
    }

    pub fn rms_bandwidth(&self) -> &T {
        &self.rms_bandwidth
    }

    pub fn center_frequency_thz(&self) -> T {
        self.center_frequency.clone() / T::lit(HZ_PER_THZ)
    }

    pub fn rms_bandwidth_thz(&self) -> T {
        self.rms_bandwidth.clone() / T::lit(HZ_PER_THZ)
    }

    pub fn shape(&self) -> SpectralShape {
        self.shape
    }

    pub fn is_monochromatic(&self) -> bool {
        self.rms_bandwidth.is_zero()
    }

    /// Finite coherence of this spectrum; fails for monochromatic light.
    pub fn coherence(&self) -> Result<CoherenceSpec<T>> {
        coherence_from_bandwidth(self.rms_bandwidth.clone())
    }
}

/// Coherence time (s) and length (m) of a light field.
#[derive(Debug, Clone, PartialEq)]
pub struct CoherenceSpec<T> {
    coherence_time: T,
    coherence_length: T,
}

impl<T: Scalar> CoherenceSpec<T> {
    pub fn from_length(coherence_length_m: T) -> Result<Self> {
        if coherence_length_m <= T::zero() {
            return Err(domain("coherence length must be positive"));
        }
        Ok(Self {
            coherence_time: coherence_length_m.clone() / T::speed_of_light(),
            coherence_length: coherence_length_m,
        })
    }

    pub fn coherence_time(&self) -> &T {
        &self.coherence_time
    }

    pub fn coherence_length(&self) -> &T {
        &self.coherence_length
    }

    /// Bandwidth whose reciprocal is this coherence time, in Hz.
    pub fn bandwidth(&self) -> T {
        T::speed_of_light() / self.coherence_length.clone()
    }
}

/// `T_c = 1/Δν`, `l_c = c/Δν`.
pub fn coherence_from_bandwidth<T: Scalar>(bandwidth_hz: T) -> Result<CoherenceSpec<T>> {
    if bandwidth_hz <= T::zero() {
        return Err(domain(format!(
            "bandwidth must be positive for a finite coherence, got {bandwidth_hz:?} Hz"
        )));
    }
    Ok(CoherenceSpec {
        coherence_time: T::one() / bandwidth_hz.clone(),
        coherence_length: T::speed_of_light() / bandwidth_hz,
    })
}

/// Inverse of [`coherence_from_bandwidth`]: `Δν = c/l_c`.
pub fn bandwidth_from_coherence_length<T: Scalar>(coherence_length_m: T) -> Result<T> {
    Ok(CoherenceSpec::from_length(coherence_length_m)?.bandwidth())
}

/// Fringe visibility at path delay `delay_s` for a gaussian spectrum:
/// `V(τ) = exp(-2π² σ² τ²)`, the normalized Fourier transform of the
/// spectral density.
pub fn visibility<T: Real>(delay_s: T, spectrum: &SpectrumSpec<T>) -> T {
    if spectrum.is_monochromatic() {
        return T::one();
    }
    match spectrum.shape {
        SpectralShape::Gaussian => {
            let two = T::one() + T::one();
            let x = T::PI() * *spectrum.rms_bandwidth() * delay_s;
            Float::exp(-two * x * x)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Conversion {
    WavelengthToFrequency,
    FrequencyToWavelength,
}

/// `ν = c/λ` or `λ = c/ν`, in SI units.
pub fn wavelength_frequency<T: Scalar>(value: T, direction: Conversion) -> Result<T> {
    if value <= T::zero() {
        let what = match direction {
            Conversion::WavelengthToFrequency => "wavelength",
            Conversion::FrequencyToWavelength => "frequency",
        };
        return Err(domain(format!("{what} must be positive, got {value:?}")));
    }
    Ok(T::speed_of_light() / value)
}

pub fn wavelength_to_frequency<T: Scalar>(wavelength_m: T) -> Result<T> {
    wavelength_frequency(wavelength_m, Conversion::WavelengthToFrequency)
}

pub fn frequency_to_wavelength<T: Scalar>(frequency_hz: T) -> Result<T> {
    wavelength_frequency(frequency_hz, Conversion::FrequencyToWavelength)
}
