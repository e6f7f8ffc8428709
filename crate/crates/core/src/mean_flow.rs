//! Spatial-mean velocity `U(t) = e^{-Omega t J} U0` of the rotating system,
//! its drift `V(t) = int_0^t U`, and the frame shift
//! `w(x, t) = u(x + V(t), t) - U(t)`.

use crate::field::SpectralField;
use crate::linalg::{rdot, C64, RVec3};
use crate::spoly::Phase;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanFlow {
    pub u0: RVec3,
    pub omega: f64,
}

impl MeanFlow {
    pub fn new(u0: RVec3, omega: f64) -> MeanFlow {
        MeanFlow { u0, omega }
    }

    pub fn velocity(&self, t: f64) -> RVec3 {
        let (s, c) = (self.omega * t).sin_cos();
        let u = self.u0;
        [c * u[0] + s * u[1], -s * u[0] + c * u[1], u[2]]
    }

    /// `V(t)`; for `Omega = 0` the limit `U0 t`.
    pub fn drift(&self, t: f64) -> RVec3 {
        let u = self.u0;
        if self.omega == 0.0 {
            return u.map(|x| x * t);
        }
        let (s, c) = (self.omega * t).sin_cos();
        let w = self.omega;
        [
            (s * u[0] + (1.0 - c) * u[1]) / w,
            ((c - 1.0) * u[0] + s * u[1]) / w,
            u[2] * t,
        ]
    }

    /// `kcheck . V(t)` as `a cos(Omega t) + b sin(Omega t) + c t + d`.
    pub fn drift_phase(&self, kcheck: &RVec3) -> Phase {
        let u = self.u0;
        if self.omega == 0.0 {
            return Phase {
                c: rdot(kcheck, &u),
                ..Phase::default()
            };
        }
        let w = self.omega;
        let a = (kcheck[1] * u[0] - kcheck[0] * u[1]) / w;
        Phase {
            a,
            b: (kcheck[0] * u[0] + kcheck[1] * u[1]) / w,
            c: kcheck[2] * u[2],
            d: -a,
            omega: w,
        }
    }

    /// `u -> w`: coefficients times `e^{i kcheck . V(t)}`, mean minus `U(t)`.
    pub fn galilean_shift(&self, u: &SpectralField, t: f64) -> SpectralField {
        self.shift_with_sign(u, t, 1.0)
    }

    /// Inverse of [`MeanFlow::galilean_shift`].
    pub fn galilean_unshift(&self, w: &SpectralField, t: f64) -> SpectralField {
        self.shift_with_sign(w, t, -1.0)
    }

    fn shift_with_sign(&self, u: &SpectralField, t: f64, sign: f64) -> SpectralField {
        let v = self.drift(t);
        let lat = u.lattice();
        let coeffs = u
            .coeffs()
            .iter()
            .zip(lat.modes())
            .map(|(c, m)| {
                let e = C64::new(0.0, sign * rdot(&m.kcheck, &v)).exp();
                c.map(|x| x * e)
            })
            .collect();
        let big_u = self.velocity(t);
        let mean = u.mean();
        let mean = [
            mean[0] - sign * big_u[0],
            mean[1] - sign * big_u[1],
            mean[2] - sign * big_u[2],
        ];
        SpectralField::from_coeffs(lat, coeffs, mean)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::GevreyIndex;
    use crate::lattice::Lattice;
    use std::f64::consts::PI;

    #[test]
    fn quarter_turn() {
        let f = MeanFlow::new([1.0, 0.0, 0.0], 2.0);
        let u = f.velocity(PI / 4.0);
        assert!(u[0].abs() < 1e-15 && (u[1] + 1.0).abs() < 1e-15 && u[2] == 0.0);
    }

    #[test]
    fn vertical_mean_is_steady() {
        for omega in [0.0, 1.0, 7.5] {
            let f = MeanFlow::new([0.0, 0.0, 1.0], omega);
            for t in [0.0, 0.3, 2.0] {
                assert_eq!(f.velocity(t), [0.0, 0.0, 1.0]);
                let v = f.drift(t);
                assert!(v[0].abs() < 1e-15 && v[1].abs() < 1e-15 && (v[2] - t).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn drift_derivative_is_velocity() {
        let f = MeanFlow::new([0.4, -1.2, 0.9], 3.0);
        let h = 1e-4;
        for t in [0.0, 0.5, 1.7, 3.1] {
            let vp = f.drift(t + h);
            let vm = f.drift(t - h);
            let v2p = f.drift(t + 2.0 * h);
            let v2m = f.drift(t - 2.0 * h);
            let u = f.velocity(t);
            for j in 0..3 {
                let d = (8.0 * (vp[j] - vm[j]) - (v2p[j] - v2m[j])) / (12.0 * h);
                assert!((d - u[j]).abs() < 1e-10);
            }
            let n0 = rdot(&f.u0, &f.u0);
            assert!((rdot(&u, &u) - n0).abs() < 1e-12 * n0);
        }
        assert_eq!(f.drift(0.0), [0.0; 3]);
    }

    #[test]
    fn shift_round_trip_and_norms() {
        let lat = Lattice::cube(5);
        let f = MeanFlow::new([0.4, -1.2, 0.9], 3.0);
        let u = SpectralField::random_gevrey(&lat, 3, 0.3, 1.0).with_mean(f.velocity(1.3));
        let w = f.galilean_shift(&u, 1.3);
        assert!(w.mean().iter().all(|x| x.abs() < 1e-15));
        let back = f.galilean_unshift(&w, 1.3);
        assert!(back.sub(&u).max_coeff() < 1e-13);
        let g = GevreyIndex::new(1.0, 0.5).unwrap();
        assert!((w.gevrey_norm(g) - u.gevrey_norm(g)).abs() < 1e-13 * u.gevrey_norm(g));
        let zero = MeanFlow::new([0.0; 3], 3.0);
        assert!(zero.galilean_shift(&u, 2.0).sub(&u).max_coeff() == 0.0);
    }
}
