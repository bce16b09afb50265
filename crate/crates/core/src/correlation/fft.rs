use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::linalg::C64;

use super::spectrum::{find_peaks, Peak, PeakOptions};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum SpectralPart {
    /// |X(f)|
    #[default]
    Magnitude,
    /// Re X(f): the same part of the half-sided transform that defines the
    /// emission spectrum.
    Real,
}

/// Two-sided spectrum of a uniformly sampled signal and its peaks.
#[derive(Clone, Debug, PartialEq)]
pub struct FftLines {
    pub freq_mhz: Vec<f64>,
    /// The selected part of the transform.
    pub values: Vec<f64>,
    pub part: SpectralPart,
    pub peaks: Vec<Peak>,
}

impl FftLines {
    /// Peak closest to `f`, MHz.
    pub fn nearest(&self, f: f64) -> Option<&Peak> {
        self.peaks.iter().min_by(|a, b| (a.position_mhz - f).abs().total_cmp(&(b.position_mhz - f).abs()))
    }
}

/// X(f) = Σ s_k e^{+2πi f t_k} dt on a zero-padded grid (at least `pad`
/// times the record length), so a component e^{−2πi f₀ t} shows at +f₀.
pub fn fft_lines(signal: &[C64], dt_us: f64, pad: usize, part: SpectralPart, peaks: &PeakOptions) -> Result<FftLines> {
    if signal.len() < 4 {
        return Err(Error::InsufficientData(format!("{} samples", signal.len())));
    }
    if !(dt_us > 0.0) {
        return Err(Error::InvalidGrid(format!("sample spacing {dt_us}")));
    }
    let n = (signal.len() * pad.max(1)).next_power_of_two();
    let mut buf = vec![C64::new(0.0, 0.0); n];
    buf[..signal.len()].copy_from_slice(signal);
    FftPlanner::new().plan_fft_inverse(n).process(&mut buf);
    // reorder to ascending frequency
    let half = n / 2;
    let (mut freq, mut mag) = (Vec::with_capacity(n), Vec::with_capacity(n));
    for k in 0..n {
        let idx = (k + half) % n;
        let f = (k as f64 - half as f64) / (n as f64 * dt_us);
        freq.push(f);
        mag.push(match part {
            SpectralPart::Magnitude => buf[idx].norm(),
            SpectralPart::Real => buf[idx].re,
        } * dt_us);
    }
    // zero padding and the finite record distort line shapes: report apexes only
    let peaks = find_peaks(&freq, &mag, &PeakOptions { line_fit: false, ..*peaks });
    Ok(FftLines { freq_mhz: freq, values: mag, part, peaks })
}

/// Angular-frequency helper for tests and callers: e^{−iωt} sampled.
#[allow(dead_code)]
pub(crate) fn tone(omega: f64, dt: f64, n: usize) -> Vec<C64> {
    (0..n).map(|k| C64::from_polar(1.0, -omega * dt * k as f64)).collect()
}
