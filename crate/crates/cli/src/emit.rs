//! CSV emission. Floats are written with 17 significant digits so the files
//! are bit-stable across runs.

use nested_mz_core::dynamics::{PowerSpectrum, SignalTrace};
use nested_mz_core::interferometer::{InterferometerConfig, Mirror, TiltVector};
use nested_mz_core::smallsignal::{NumericSensitivity, SensitivityVector};
use nested_mz_core::spectrum::KGrid;

use crate::report::PeakRow;

pub fn float(x: f64) -> String {
    format!("{x:.16e}")
}

/// A rendered CSV document and its data-row count.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Table {
    pub bytes: Vec<u8>,
    pub rows: usize,
}

fn table<I, R>(header: &[&str], rows: I) -> Table
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    let mut count = 0;
    for r in rows {
        w.write_record(r).expect("in-memory write");
        count += 1;
    }
    Table {
        bytes: w.into_inner().expect("in-memory flush"),
        rows: count,
    }
}

pub fn trace(trace: &SignalTrace) -> Table {
    table(
        &["t", "S"],
        trace
            .times()
            .zip(&trace.samples)
            .map(|(t, s)| [float(t), float(*s)]),
    )
}

pub fn spectrum(spectrum: &PowerSpectrum) -> Table {
    table(
        &["frequency", "power"],
        spectrum
            .frequencies
            .iter()
            .zip(&spectrum.power)
            .map(|(f, p)| [float(*f), float(*p)]),
    )
}

pub fn peaks(rows: &[PeakRow]) -> Table {
    table(
        &["mirror", "drive_frequency", "frequency", "power", "floor_ratio", "present"],
        rows.iter().map(|r| {
            [
                r.mirror.to_string(),
                float(r.drive_frequency),
                float(r.frequency),
                float(r.power),
                float(r.floor_ratio),
                r.present.to_string(),
            ]
        }),
    )
}

pub fn coeffs(analytic: &SensitivityVector, numeric: &NumericSensitivity) -> Table {
    table(
        &["mirror", "analytic", "numeric", "raw_derivative"],
        Mirror::ALL.iter().map(|&m| {
            [
                m.to_string(),
                float(analytic.get(m)),
                float(numeric.coefficients.get(m)),
                float(numeric.raw.get(m)),
            ]
        }),
    )
}

/// Beam curves for one static tilt: the beam after F, its two unsigned
/// inner-route constituents (`psi_F = psi_A_term ± psi_B_term`), and the beam
/// at the detector.
pub fn beamcurves(config: &InterferometerConfig, tilts: &TiltVector, grid: &KGrid) -> Table {
    let psi_f = config.psi_f(tilts);
    let (route_a, route_b) = config.inner_routes(tilts);
    let psi_d = config.psi_d(tilts);
    table(
        &["k", "psi_F", "psi_A_term", "psi_B_term", "psi_D"],
        grid.points().map(|k| {
            [
                float(k),
                float(psi_f.amplitude_at(k)),
                float(route_a.amplitude_at(k)),
                float(route_b.amplitude_at(k)),
                float(psi_d.amplitude_at(k)),
            ]
        }),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use nested_mz_core::interferometer::AlignmentMode;
    use nested_mz_core::spectrum::normalize_l2;

    fn column(t: &Table, idx: usize) -> Vec<f64> {
        let mut r = csv::Reader::from_reader(t.bytes.as_slice());
        r.records()
            .map(|rec| rec.unwrap()[idx].parse().unwrap())
            .collect()
    }

    fn config() -> InterferometerConfig {
        InterferometerConfig::new(AlignmentMode::DestructiveInner, normalize_l2(1.0).unwrap())
    }

    #[test]
    fn seventeen_digits() {
        assert_eq!(float(1.0), "1.0000000000000000e0");
        assert_eq!(float(0.1).parse::<f64>().unwrap(), 0.1);
        let x = std::f64::consts::PI * 1e-7;
        assert_eq!(float(x).parse::<f64>().unwrap(), x);
    }

    #[test]
    fn zero_tilt_psi_f_column_vanishes() {
        let grid = KGrid::symmetric(4.0, 81).unwrap();
        let t = beamcurves(&config(), &TiltVector::zero(), &grid);
        assert_eq!(t.rows, 81);
        assert!(column(&t, 1).iter().all(|&v| v == 0.0));
        let header = std::str::from_utf8(&t.bytes).unwrap().lines().next().unwrap().to_string();
        assert_eq!(header, "k,psi_F,psi_A_term,psi_B_term,psi_D");
    }

    #[test]
    fn opposite_inner_tilts_give_mirror_image_routes() {
        let grid = KGrid::symmetric(4.0, 161).unwrap();
        let t = beamcurves(&config(), &TiltVector::new(0.05, -0.05, 0.0, 0.0, 0.0), &grid);
        let a = column(&t, 2);
        let b = column(&t, 3);
        let n = a.len();
        for j in 0..n {
            assert!((a[j] - b[n - 1 - j]).abs() < 1e-15);
        }
        let peak = a.iter().cloned().fold(0.0, f64::max);
        assert!((peak - b.iter().cloned().fold(0.0, f64::max)).abs() < 1e-15);
    }

    #[test]
    fn shared_outer_offset_barely_moves_psi_f() {
        let grid = KGrid::symmetric(4.0, 401).unwrap();
        let t = TiltVector::new(1e-3, -1e-3, 0.0, 0.0, 0.0);
        let plain = column(&beamcurves(&config(), &t, &grid), 1);
        let peak = plain.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let change = |delta: f64| {
            let moved = column(
                &beamcurves(&config(), &t.with(Mirror::E, delta).with(Mirror::F, delta), &grid),
                1,
            );
            plain.iter().zip(&moved).fold(0.0f64, |m, (a, b)| m.max((a - b).abs())) / peak
        };
        let big = change(1e-3);
        let small = change(1e-4);
        assert!(big < 1e-2, "{big}");
        // First order in the offset.
        assert!((big / small - 10.0).abs() < 0.1, "{big} {small}");
    }
}
