//! Non-dimensional unit system.
//!
//! Lengths are measured in central wavelengths and times in wavelength
//! transit times, so the reference wave speed is 1 and the central
//! wavenumber is 2*pi. The physical mapping for an X-band configuration
//! (8 GHz carrier) is recorded in [`XBAND`].

use std::f64::consts::PI;

/// Central wavelength (the length unit).
pub const LAMBDA_O: f64 = 1.0;

/// Central wavenumber k_o = 2 pi / lambda_o.
pub const K_O: f64 = 2.0 * PI;

/// Reference wave speed c_o (the velocity unit).
pub const C_O: f64 = 1.0;

/// Central angular frequency omega_o = k_o c_o.
pub const OMEGA_O: f64 = K_O * C_O;

/// Nyquist sampling interval for the carrier, pi / omega_o.
pub const T_NYQUIST: f64 = PI / OMEGA_O;

/// Default snapshot interval: 2.2 times the Nyquist rate at the carrier.
pub const TAU_DEFAULT: f64 = PI / (2.2 * OMEGA_O);

/// Default grid spacing: 25 cells per wavelength.
pub const SPACING_DEFAULT: f64 = LAMBDA_O / 25.0;

/// Physical reference values for an X-band configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalPreset {
    /// Carrier frequency in Hz.
    pub carrier_hz: f64,
    /// Central wavelength in meters.
    pub wavelength_m: f64,
    /// Pulse half-duration in seconds.
    pub pulse_half_duration_s: f64,
    /// Pulse half-duration in non-dimensional time units.
    pub t_b: f64,
    /// Relative bandwidth at the half-amplitude (-3 dB) points.
    pub relative_bandwidth: f64,
}

/// X-band preset: 8 GHz carrier, 3.75 cm wavelength, 0.21 ns pulse
/// half-duration, 66% relative bandwidth.
pub const XBAND: PhysicalPreset = PhysicalPreset {
    carrier_hz: 8.0e9,
    wavelength_m: 0.0375,
    pulse_half_duration_s: 0.21e-9,
    t_b: XBAND_T_B,
    relative_bandwidth: XBAND_REL_BW,
};

/// 0.21 ns expressed in wavelength transit times: t_b * c / lambda.
pub const XBAND_T_B: f64 = 0.21e-9 * 2.99792458e8 / 0.0375;

/// Half-amplitude bandwidth of exp(-w^2 (T_b/3)^2 / 2) relative to the
/// carrier: 2 * (3/T_b) * sqrt(2 ln 2) / omega_o.
pub const XBAND_REL_BW: f64 = 2.0 * 3.5322300675464695 / (XBAND_T_B * OMEGA_O);

/// Envelope of the probing pulse in angular frequency, exp(-w^2 (T_b/3)^2/2).
pub fn pulse_envelope(omega: f64, t_b: f64) -> f64 {
    let s = t_b / 3.0;
    (-0.5 * omega * omega * s * s).exp()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn xband_numbers_match_documented_values() {
        // 8 GHz -> 3.75 cm
        assert!((2.99792458e8 / XBAND.carrier_hz - XBAND.wavelength_m).abs() < 1e-4);
        // t_b a touch under 1.68 transit times
        assert!((XBAND.t_b - 1.679).abs() < 2e-3);
        // 66% relative bandwidth at the half-amplitude points
        assert!((XBAND.relative_bandwidth - 0.66).abs() < 0.02);
    }

    #[test]
    fn envelope_half_amplitude_point() {
        let t_b = XBAND_T_B;
        let w = (3.0 / t_b) * (2.0 * std::f64::consts::LN_2).sqrt();
        assert!((pulse_envelope(w, t_b) - 0.5).abs() < 1e-12);
    }
}
