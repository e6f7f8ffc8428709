//! Least-squares helpers for decay-rate and tail fits.

use serde::Serialize;

use crate::field::SpectralField;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    /// Standard error of the slope.
    pub stderr: f64,
    /// Root-mean-square residual.
    pub rms: f64,
}

/// Ordinary least squares `y = intercept + slope x`. Needs two distinct `x`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Option<LinearFit> {
    let n = xs.len();
    if n < 2 || ys.len() != n {
        return None;
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let rms = (sse / nf).sqrt();
    let stderr = if n > 2 {
        (sse / (nf - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    Some(LinearFit {
        slope,
        intercept,
        stderr,
        rms,
    })
}

/// Mean and least-squares slope of a field-valued series.
pub fn field_mean_and_slope(
    times: &[f64],
    fields: &[SpectralField],
) -> Option<(SpectralField, SpectralField)> {
    let n = times.len();
    if n < 2 || fields.len() != n {
        return None;
    }
    let nf = n as f64;
    let mt = times.iter().sum::<f64>() / nf;
    let stt: f64 = times.iter().map(|t| (t - mt).powi(2)).sum();
    if stt == 0.0 {
        return None;
    }
    let mut mean = SpectralField::zeros(fields[0].lattice());
    let mut slope = SpectralField::zeros(fields[0].lattice());
    for (t, f) in times.iter().zip(fields) {
        mean.axpy_assign(1.0 / nf, f);
        slope.axpy_assign((t - mt) / stt, f);
    }
    Some((mean, slope))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Lattice;

    #[test]
    fn exact_line() {
        let xs = [0.0, 1.0, 2.0, 3.0];
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 - 3.0 * x).collect();
        let f = linear_fit(&xs, &ys).unwrap();
        assert!((f.slope + 3.0).abs() < 1e-14 && (f.intercept - 2.0).abs() < 1e-14);
        assert!(f.stderr < 1e-14);
        assert!(linear_fit(&[1.0, 1.0], &[0.0, 1.0]).is_none());
    }

    #[test]
    fn field_slope() {
        let lat = Lattice::cube(2);
        let a = SpectralField::random_gevrey(&lat, 1, 0.0, 1.0);
        let b = SpectralField::random_gevrey(&lat, 2, 0.0, 1.0);
        let times = [0.0, 0.5, 1.0, 2.0];
        let fields: Vec<SpectralField> = times.iter().map(|t| a.axpy(*t, &b)).collect();
        let (mean, slope) = field_mean_and_slope(&times, &fields).unwrap();
        assert!(slope.sub(&b).max_coeff() < 1e-14);
        assert!(mean.sub(&a.axpy(0.875, &b)).max_coeff() < 1e-14);
    }
}
