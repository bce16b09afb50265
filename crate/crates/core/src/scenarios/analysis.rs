//! Reductions of spectra and sweeps to the quantities the scenarios report.

use crate::correlation::{Peak, SpectrumResult};
use crate::dressed::MultipletPrediction;

/// Peak spacings of a sideband-plus-centre multiplet, MHz.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Splittings {
    /// Outermost spread of the peaks below −offset/2; `None` with fewer than two.
    pub left: Option<f64>,
    pub right: Option<f64>,
    /// Outermost spread of the peaks within ±offset/2.
    pub central: Option<f64>,
}

/// Groups the peaks around −offset, 0 and +offset (offset in MHz).
pub fn splittings(peaks: &[Peak], offset_mhz: f64) -> Splittings {
    let cut = 0.5 * offset_mhz.abs();
    let spread = |f: &dyn Fn(f64) -> bool| {
        let xs: Vec<f64> = peaks.iter().map(|p| p.position_mhz).filter(|x| f(*x)).collect();
        (xs.len() >= 2).then(|| {
            let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            hi - lo
        })
    };
    Splittings {
        left: spread(&|x| x < -cut),
        right: spread(&|x| x > cut),
        central: spread(&|x| x.abs() <= cut),
    }
}

/// Half-width of the window around −Ω searched for the sideband pair, MHz.
pub const SIDEBAND_HALF_WINDOW: f64 = 10.0;

/// Separation of the two highest peaks within ±half_window of −drive, MHz.
pub fn lower_sideband_gap(peaks: &[Peak], drive_mhz: f64, half_window: f64) -> Option<f64> {
    let mut near: Vec<&Peak> = peaks.iter().filter(|p| (p.position_mhz + drive_mhz).abs() <= half_window).collect();
    if near.len() < 2 {
        return None;
    }
    near.sort_by(|a, b| b.height.total_cmp(&a.height));
    Some((near[0].position_mhz - near[1].position_mhz).abs())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AntiCrossing {
    pub drive_mhz: f64,
    pub gap_mhz: f64,
}

/// Smallest lower-sideband gap over a sweep of (Ω in MHz, spectrum) points.
pub fn anticrossing<'a, I>(points: I, half_window: f64) -> Option<AntiCrossing>
where
    I: IntoIterator<Item = (f64, &'a SpectrumResult)>,
{
    points
        .into_iter()
        .filter_map(|(w, s)| lower_sideband_gap(&s.peaks, w, half_window).map(|g| AntiCrossing { drive_mhz: w, gap_mhz: g }))
        .min_by(|a, b| a.gap_mhz.total_cmp(&b.gap_mhz))
}

/// FWHM of the peak nearest zero offset, MHz.
pub fn central_linewidth(s: &SpectrumResult) -> Option<(f64, f64)> {
    s.nearest_peak(0.0).map(|p| (p.position_mhz, p.fwhm_mhz))
}

/// Indices of interior points strictly below both neighbours.
pub fn local_minima(y: &[f64]) -> Vec<usize> {
    (1..y.len().saturating_sub(1)).filter(|&i| y[i] < y[i - 1] && y[i] < y[i + 1]).collect()
}

/// Integrated density over `lo ≤ f < hi` (MHz), trapezoid rule.
pub fn band_integral(s: &SpectrumResult, lo: f64, hi: f64) -> f64 {
    s.freq_mhz
        .windows(2)
        .zip(s.density.windows(2))
        .filter(|(f, _)| f[0] >= lo && f[1] <= hi)
        .map(|(f, d)| 0.5 * (d[0] + d[1]) * (f[1] - f[0]))
        .sum()
}

#[derive(Clone, Debug, PartialEq)]
pub struct ComparisonRow {
    pub label: String,
    pub analytic_mhz: f64,
    pub linewidth_mhz: f64,
    pub merged: bool,
    pub numeric_mhz: Option<f64>,
    pub deviation_mhz: Option<f64>,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Comparison {
    pub rows: Vec<ComparisonRow>,
}

impl Comparison {
    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }
}

/// Pairs every predicted line with the nearest detected peak; a pair passes
/// when the deviation is within one predicted linewidth.
pub fn compare_peaks(pred: &MultipletPrediction, numeric: &SpectrumResult) -> Comparison {
    let rows = pred
        .peaks
        .iter()
        .map(|p| {
            let near = numeric.nearest_peak(p.offset_mhz).map(|q| q.position_mhz);
            let dev = near.map(|x| x - p.offset_mhz);
            ComparisonRow {
                label: p.label.clone(),
                analytic_mhz: p.offset_mhz,
                linewidth_mhz: p.linewidth_mhz,
                merged: p.merged,
                numeric_mhz: near,
                deviation_mhz: dev,
                pass: dev.is_some_and(|d| d.abs() <= p.linewidth_mhz),
            }
        })
        .collect();
    Comparison { rows }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn peak(x: f64, h: f64) -> Peak {
        Peak {
            position_mhz: x,
            apex_mhz: x,
            height: h,
            fwhm_mhz: 1.0,
            prominence: h,
            fitted: false,
            line_centre: false,
        }
    }

    fn spectrum(peaks: Vec<Peak>) -> SpectrumResult {
        SpectrumResult { freq_mhz: vec![], density: vec![], peaks, subtracted: Default::default() }
    }

    #[test]
    fn seven_peak_splittings() {
        let xs = [-40.0, -33.0, -7.5, 0.0, 7.5, 33.0, 40.0];
        let ps: Vec<Peak> = xs.iter().map(|x| peak(*x, 1.0)).collect();
        let s = splittings(&ps, 37.0);
        assert_eq!(s.left, Some(7.0));
        assert_eq!(s.right, Some(7.0));
        assert_eq!(s.central, Some(15.0));
        assert_eq!(splittings(&ps[3..4], 37.0).central, None);
    }

    #[test]
    fn gap_uses_two_highest() {
        let ps = vec![peak(-40.0, 1.0), peak(-36.0, 0.1), peak(-33.0, 0.9), peak(-7.0, 5.0)];
        assert_eq!(lower_sideband_gap(&ps, 37.0, 10.0), Some(7.0));
        assert_eq!(lower_sideband_gap(&ps, 60.0, 10.0), None);
    }

    #[test]
    fn minima() {
        assert_eq!(local_minima(&[3.0, 2.0, 2.5, 1.0, 1.0, 4.0]), vec![1]);
        assert!(local_minima(&[1.0]).is_empty());
    }

    #[test]
    fn anticrossing_picks_smallest_gap() {
        let a = spectrum(vec![peak(-30.0, 1.0), peak(-40.0, 1.0)]);
        let b = spectrum(vec![peak(-34.0, 1.0), peak(-40.0, 1.0)]);
        let c = spectrum(vec![peak(-45.0, 1.0)]);
        let ac = anticrossing([(33.0, &a), (37.0, &b), (45.0, &c)], 10.0).unwrap();
        assert_eq!(ac, AntiCrossing { drive_mhz: 37.0, gap_mhz: 6.0 });
    }
}
