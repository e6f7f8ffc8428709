//! Closed-form antiderivatives of `t^m e^{alpha t} cos(omega t)` and
//! `t^m e^{alpha t} sin(omega t)`.
//!
//! With `I(t) = e^{alpha t} (cos omega t, sin omega t)^T` we have `I' = D I`,
//! `D = [[alpha, -omega], [omega, alpha]]`, and repeated integration by parts
//! gives
//!
//! `int t^m I = sum_{n=0}^{m} (-1)^{m-n} m!/n! t^n D^{-(m+1-n)} I(t)`.

use crate::error::{Error, Result};
use crate::linalg::C64;

/// `e^{alpha t} (p(t) cos(omega t) + q(t) sin(omega t))`, with `p`, `q` as
/// ascending coefficient lists.
#[derive(Debug, Clone, PartialEq)]
pub struct TrigAntiderivative {
    pub p: Vec<f64>,
    pub q: Vec<f64>,
}

/// Antiderivatives of the cosine and sine integrands.
#[derive(Debug, Clone, PartialEq)]
pub struct TermIntegral {
    pub cos: TrigAntiderivative,
    pub sin: TrigAntiderivative,
}

type M2 = [[f64; 2]; 2];

fn mul2(a: &M2, b: &M2) -> M2 {
    [
        [
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
        ],
        [
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        ],
    ]
}

/// Closed-form `int t^m e^{alpha t} cos / sin (omega t) dt` (constant omitted).
pub fn integrate_term(m: u32, alpha: f64, omega: f64) -> Result<TermIntegral> {
    let det = alpha * alpha + omega * omega;
    if det == 0.0 {
        return Err(Error::PurePowerCase);
    }
    let dinv: M2 = [[alpha / det, omega / det], [-omega / det, alpha / det]];
    let m = m as usize;
    // powers[r] = D^{-(r+1)}
    let mut powers = Vec::with_capacity(m + 1);
    powers.push(dinv);
    for r in 1..=m {
        let next = mul2(&powers[r - 1], &dinv);
        powers.push(next);
    }
    let mut cos = TrigAntiderivative {
        p: vec![0.0; m + 1],
        q: vec![0.0; m + 1],
    };
    let mut sin = cos.clone();
    // m!/n! built downward from n = m
    let mut factor = 1.0;
    for n in (0..=m).rev() {
        let sign = if (m - n).is_multiple_of(2) { 1.0 } else { -1.0 };
        let c = sign * factor;
        let d = &powers[m - n];
        cos.p[n] = c * d[0][0];
        cos.q[n] = c * d[0][1];
        sin.p[n] = c * d[1][0];
        sin.q[n] = c * d[1][1];
        factor *= n as f64;
    }
    Ok(TermIntegral { cos, sin })
}

/// Coefficients `a_n` with `int t^m e^{z t} dt = e^{z t} sum_n a_n t^n`.
pub fn integrate_complex(m: u32, z: C64) -> Result<Vec<C64>> {
    if z.re == 0.0 && z.im == 0.0 {
        return Err(Error::PurePowerCase);
    }
    let m = m as usize;
    let zinv = z.inv();
    let mut out = vec![C64::new(0.0, 0.0); m + 1];
    // a_n = (-1)^{m-n} m!/n! z^{-(m+1-n)}
    let mut factor = 1.0;
    let mut zpow = zinv;
    for n in (0..=m).rev() {
        let sign = if (m - n).is_multiple_of(2) { 1.0 } else { -1.0 };
        out[n] = zpow * (sign * factor);
        factor *= n as f64;
        zpow *= zinv;
    }
    Ok(out)
}

pub fn poly_eval(coeffs: &[f64], t: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * t + c)
}

fn poly_derivative(coeffs: &[f64]) -> Vec<f64> {
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(n, c)| n as f64 * c)
        .collect()
}

impl TrigAntiderivative {
    pub fn eval(&self, alpha: f64, omega: f64, t: f64) -> f64 {
        let (s, c) = (omega * t).sin_cos();
        (alpha * t).exp() * (poly_eval(&self.p, t) * c + poly_eval(&self.q, t) * s)
    }

    /// Symbolic derivative in the same form: `(p' + alpha p + omega q)` on the
    /// cosine and `(q' + alpha q - omega p)` on the sine.
    pub fn derivative(&self, alpha: f64, omega: f64) -> TrigAntiderivative {
        let n = self.p.len().max(self.q.len());
        let dp = poly_derivative(&self.p);
        let dq = poly_derivative(&self.q);
        let at = |v: &[f64], i: usize| v.get(i).copied().unwrap_or(0.0);
        TrigAntiderivative {
            p: (0..n)
                .map(|i| at(&dp, i) + alpha * at(&self.p, i) + omega * at(&self.q, i))
                .collect(),
            q: (0..n)
                .map(|i| at(&dq, i) + alpha * at(&self.q, i) - omega * at(&self.p, i))
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn documented_cases() {
        let r = integrate_term(0, 0.0, 1.0).unwrap();
        assert!(close(&r.cos.p, &[0.0], 0.0) && close(&r.cos.q, &[1.0], 0.0));
        let r = integrate_term(1, 1.0, 0.0).unwrap();
        assert!(close(&r.cos.p, &[-1.0, 1.0], 0.0));
        let r = integrate_term(1, 0.0, 1.0).unwrap();
        // t sin t + cos t
        assert!(close(&r.cos.p, &[1.0, 0.0], 1e-15) && close(&r.cos.q, &[0.0, 1.0], 1e-15));
        assert!(matches!(integrate_term(2, 0.0, 0.0), Err(Error::PurePowerCase)));
    }

    proptest! {
        #[test]
        fn derivative_reproduces_integrand(
            m in 0u32..=4,
            alpha in -3.0f64..3.0,
            omega in -3.0f64..3.0,
        ) {
            prop_assume!(alpha * alpha + omega * omega > 0.04);
            let r = integrate_term(m, alpha, omega).unwrap();
            let mut unit = vec![0.0; m as usize + 1];
            unit[m as usize] = 1.0;
            let zero = vec![0.0; m as usize + 1];
            let scale = r.cos.p.iter().chain(&r.cos.q).fold(1.0f64, |a, x| a.max(x.abs()));
            let dc = r.cos.derivative(alpha, omega);
            prop_assert!(close(&dc.p, &unit, 1e-12 * scale));
            prop_assert!(close(&dc.q, &zero, 1e-12 * scale));
            let ds = r.sin.derivative(alpha, omega);
            prop_assert!(close(&ds.p, &zero, 1e-12 * scale));
            prop_assert!(close(&ds.q, &unit, 1e-12 * scale));
        }

        #[test]
        fn real_and_complex_routes_agree(
            m in 0u32..=4,
            alpha in -2.0f64..2.0,
            omega in -2.0f64..2.0,
            t in -2.0f64..2.0,
        ) {
            prop_assume!(alpha * alpha + omega * omega > 0.04);
            let r = integrate_term(m, alpha, omega).unwrap();
            let a = integrate_complex(m, C64::new(alpha, omega)).unwrap();
            let z = C64::new(alpha, omega);
            let tn: C64 = a.iter().rev().fold(C64::new(0.0, 0.0), |acc, c| acc * t + c);
            let v = (z * t).exp() * tn;
            let scale = a.iter().fold(1.0f64, |s, c| s.max(c.norm())) * (alpha * t).exp().max(1.0) * 10f64.powi(m as i32);
            prop_assert!((v.re - r.cos.eval(alpha, omega, t)).abs() <= 1e-12 * scale);
            prop_assert!((v.im - r.sin.eval(alpha, omega, t)).abs() <= 1e-12 * scale);
        }
    }
}
