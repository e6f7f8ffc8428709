//! SS-polynomials: S-polynomial terms modulated by
//! `exp(-i (a cos(w t) + b sin(w t) + c t + d))`.

use std::sync::Arc;

use super::frequency::Frequency;
use super::poly::SPoly;
use crate::field::SpectralField;
use crate::lattice::Lattice;
use crate::linalg::{axpy, CVec3, C64, CZERO};
use crate::mean_flow::MeanFlow;

/// Real phase `a cos(w t) + b sin(w t) + c t + d`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Phase {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub omega: f64,
}

impl Phase {
    pub fn value(&self, t: f64) -> f64 {
        let (s, c) = (self.omega * t).sin_cos();
        self.a * c + self.b * s + self.c * t + self.d
    }

    pub fn derivative(&self, t: f64) -> f64 {
        let (s, c) = (self.omega * t).sin_cos();
        self.omega * (self.b * c - self.a * s) + self.c
    }

    pub fn neg(&self) -> Phase {
        Phase {
            a: -self.a,
            b: -self.b,
            c: -self.c,
            d: -self.d,
            omega: self.omega,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SSTerm {
    pub mode: usize,
    pub power: u32,
    pub freq: Frequency,
    pub phase: Phase,
    pub coef: CVec3,
}

impl SSTerm {
    fn factor(&self, t: f64) -> C64 {
        let arg = self.freq.value() * t - self.phase.value(t);
        C64::new(0.0, arg).exp() * t.powi(self.power as i32)
    }

    fn factor_derivative(&self, t: f64) -> C64 {
        let arg = self.freq.value() * t - self.phase.value(t);
        let e = C64::new(0.0, arg).exp();
        let rate = C64::new(0.0, self.freq.value() - self.phase.derivative(t));
        let m = self.power as i32;
        let poly = if m == 0 { 0.0 } else { m as f64 * t.powi(m - 1) };
        e * (rate * t.powi(m) + poly)
    }
}

#[derive(Debug, Clone)]
pub struct SSPoly {
    lattice: Arc<Lattice>,
    terms: Vec<SSTerm>,
}

impl SSPoly {
    pub fn lattice(&self) -> &Arc<Lattice> {
        &self.lattice
    }

    pub fn terms(&self) -> &[SSTerm] {
        &self.terms
    }

    /// Every term of `q` multiplied by `exp(-i kcheck . V(t))`, i.e. the
    /// field `q(x - V(t), t)`.
    pub fn phase_shift(q: &SPoly, flow: &MeanFlow) -> SSPoly {
        let lattice = q.lattice().clone();
        let terms = q
            .terms()
            .map(|(k, c)| SSTerm {
                mode: k.mode,
                power: k.power,
                freq: k.freq.clone(),
                phase: flow.drift_phase(&lattice.mode(k.mode).kcheck),
                coef: *c,
            })
            .collect();
        SSPoly { lattice, terms }
    }

    pub fn scale(&self, s: f64) -> SSPoly {
        let mut out = self.clone();
        for t in &mut out.terms {
            t.coef = t.coef.map(|x| x * s);
        }
        out
    }

    pub fn extend(&mut self, other: SSPoly) {
        self.terms.extend(other.terms);
    }

    pub fn evaluate(&self, t: f64) -> SpectralField {
        self.accumulate(|term| term.factor(t))
    }

    /// Exact time derivative at `t`.
    pub fn evaluate_derivative(&self, t: f64) -> SpectralField {
        self.accumulate(|term| term.factor_derivative(t))
    }

    fn accumulate(&self, factor: impl Fn(&SSTerm) -> C64) -> SpectralField {
        let mut coeffs = vec![CZERO; self.lattice.len()];
        for term in &self.terms {
            axpy(&mut coeffs[term.mode], factor(term), &term.coef);
        }
        SpectralField::from_coeffs(&self.lattice, coeffs, [0.0; 3])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::rdot;

    fn sample(lat: &Arc<Lattice>) -> SPoly {
        let u = SpectralField::random_gevrey(lat, 8, 0.2, 1.0);
        SPoly::constant(&u).apply_exp_s(3.0)
    }

    #[test]
    fn zero_drift_is_identity() {
        let lat = Lattice::cube(3);
        let q = sample(&lat);
        let s = SSPoly::phase_shift(&q, &MeanFlow::new([0.0; 3], 3.0));
        for t in [0.0, 0.5, 2.0] {
            assert!(s.evaluate(t).sub(&q.evaluate(t)).max_coeff() < 1e-15);
        }
    }

    #[test]
    fn vertical_drift_is_linear_phase() {
        let lat = Lattice::cube(3);
        let flow = MeanFlow::new([0.0, 0.0, 0.7], 4.0);
        for m in lat.modes() {
            let p = flow.drift_phase(&m.kcheck);
            assert!(p.a.abs() < 1e-15 && p.b.abs() < 1e-15 && p.d.abs() < 1e-15);
            assert!((p.c - m.kcheck[2] * 0.7).abs() < 1e-15);
        }
    }

    #[test]
    fn generic_drift_matches_pointwise_phase() {
        let lat = Lattice::cube(3);
        let q = sample(&lat);
        let flow = MeanFlow::new([0.3, -0.8, 0.5], 2.5);
        let s = SSPoly::phase_shift(&q, &flow);
        for t in [0.1, 0.9, 1.7, 4.2] {
            let v = flow.drift(t);
            let qt = q.evaluate(t);
            let expect: Vec<CVec3> = qt
                .coeffs()
                .iter()
                .zip(lat.modes())
                .map(|(c, m)| c.map(|x| x * C64::new(0.0, -rdot(&m.kcheck, &v)).exp()))
                .collect();
            let expect = SpectralField::from_coeffs(&lat, expect, [0.0; 3]);
            assert!(s.evaluate(t).sub(&expect).max_coeff() < 1e-13);
            let h = 1e-5;
            let fd = s.evaluate(t + h).sub(&s.evaluate(t - h)).scale(0.5 / h);
            let d = s.evaluate_derivative(t);
            assert!(d.sub(&fd).max_coeff() < 1e-7 * d.max_coeff());
        }
    }
}
