//! Divergence-free Fourier fields on a retained mode set and the linear and
//! bilinear operators acting on them.
//!
//! A field stores one coefficient per retained mode (both `k` and `-k`) and a
//! separate real mean. Inner products carry the box volume so that
//! `|u|^2 = L1 L2 L3 * sum_k |u_k|^2`.

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::lattice::{Lattice, Rational};
use crate::linalg::{
    self, add_assign, axpy, cdot_r, conj, cross_rc, mat_cvec, norm_sq, scale_r, CVec3, C64,
    CZERO, I, RVec3,
};
use crate::par::{map_range, Exec};

/// Weighting of a Gevrey norm `|A^alpha e^{sigma A^(1/2)} u|`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct GevreyIndex {
    pub alpha: f64,
    pub sigma: f64,
}

impl GevreyIndex {
    pub const L2: GevreyIndex = GevreyIndex { alpha: 0.0, sigma: 0.0 };
    pub const H1: GevreyIndex = GevreyIndex { alpha: 0.5, sigma: 0.0 };

    pub fn new(alpha: f64, sigma: f64) -> Result<GevreyIndex> {
        if !(alpha.is_finite() && sigma.is_finite() && alpha >= 0.0 && sigma >= 0.0) {
            return Err(Error::InvalidConfig(format!(
                "Gevrey index needs finite alpha, sigma >= 0 (got {alpha}, {sigma})"
            )));
        }
        Ok(GevreyIndex { alpha, sigma })
    }

    /// Squared weight for eigenvalue `lambda`.
    #[inline]
    pub fn weight_sq(&self, lambda: f64) -> f64 {
        let mut w = 1.0;
        if self.alpha != 0.0 {
            w *= lambda.powf(2.0 * self.alpha);
        }
        if self.sigma != 0.0 {
            w *= (2.0 * self.sigma * lambda.sqrt()).exp();
        }
        w
    }
}

#[derive(Debug, Clone)]
pub struct SpectralField {
    lattice: Arc<Lattice>,
    coeffs: Vec<CVec3>,
    mean: RVec3,
}

impl SpectralField {
    pub fn zeros(lattice: &Arc<Lattice>) -> SpectralField {
        SpectralField {
            lattice: lattice.clone(),
            coeffs: vec![CZERO; lattice.len()],
            mean: [0.0; 3],
        }
    }

    /// Wraps coefficients that already satisfy the field invariants.
    pub fn from_coeffs(lattice: &Arc<Lattice>, coeffs: Vec<CVec3>, mean: RVec3) -> SpectralField {
        assert_eq!(coeffs.len(), lattice.len(), "coefficient count");
        SpectralField {
            lattice: lattice.clone(),
            coeffs,
            mean,
        }
    }

    /// Leray projection of raw coefficients given on wave vectors. The `k = 0`
    /// entry becomes the mean. Every `k` and its partner `-k` must satisfy the
    /// reality condition; missing partners are treated as zero.
    pub fn leray_project<I>(lattice: &Arc<Lattice>, raw: I) -> Result<SpectralField>
    where
        I: IntoIterator<Item = ([i32; 3], CVec3)>,
    {
        let mut field = SpectralField::zeros(lattice);
        let mut mean = CZERO;
        for (k, c) in raw {
            if k == [0, 0, 0] {
                add_assign(&mut mean, &c);
                continue;
            }
            let i = lattice.index_of(k).ok_or(Error::ModeNotRetained(k))?;
            add_assign(&mut field.coeffs[i], &c);
        }
        let scale = field.coeffs.iter().map(linalg::max_abs).fold(0.0, f64::max).max(1.0);
        let mean_im = mean.iter().map(|c| c.im.abs()).fold(0.0, f64::max);
        if mean_im > 1e-12 * scale {
            return Err(Error::RealityViolation {
                k: [0, 0, 0],
                defect: mean_im,
            });
        }
        field.mean = linalg::real_part(&mean);
        for i in 0..lattice.len() {
            let j = lattice.neg(i);
            let defect = linalg::max_abs(&linalg::sub(&field.coeffs[i], &conj(&field.coeffs[j])));
            if defect > 1e-12 * scale {
                return Err(Error::RealityViolation {
                    k: lattice.mode(i).k,
                    defect,
                });
            }
        }
        for (c, m) in field.coeffs.iter_mut().zip(lattice.modes()) {
            *c = mat_cvec(&m.proj, c);
        }
        Ok(field)
    }

    /// Builds a real field from one representative per `+-k` pair; the
    /// partner gets the conjugate. Coefficients are Leray-projected.
    pub fn from_half<I>(lattice: &Arc<Lattice>, half: I, mean: RVec3) -> Result<SpectralField>
    where
        I: IntoIterator<Item = ([i32; 3], CVec3)>,
    {
        let mut field = SpectralField::zeros(lattice);
        field.mean = mean;
        for (k, c) in half {
            let i = lattice.index_of(k).ok_or(Error::ModeNotRetained(k))?;
            let j = lattice.neg(i);
            let p = mat_cvec(&lattice.mode(i).proj, &c);
            if i == j {
                return Err(Error::InvalidLattice("mode equals its negative".into()));
            }
            field.coeffs[i] = p;
            field.coeffs[j] = conj(&p);
        }
        Ok(field)
    }

    /// Seeded random real field with Gaussian coefficients damped by
    /// `e^{-sigma |k|}`, rescaled to `|u| = amplitude`.
    pub fn random_gevrey(
        lattice: &Arc<Lattice>,
        seed: u64,
        sigma: f64,
        amplitude: f64,
    ) -> SpectralField {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut field = SpectralField::zeros(lattice);
        for i in 0..lattice.len() {
            let j = lattice.neg(i);
            if j < i {
                continue;
            }
            let m = lattice.mode(i);
            let damp = (-sigma * m.kabs).exp();
            let mut c = CZERO;
            for x in c.iter_mut() {
                let re: f64 = StandardNormal.sample(&mut rng);
                let im: f64 = StandardNormal.sample(&mut rng);
                *x = C64::new(re, im) * damp;
            }
            let p = mat_cvec(&m.proj, &c);
            field.coeffs[i] = p;
            field.coeffs[j] = conj(&p);
        }
        let norm = field.l2_norm();
        if norm > 0.0 {
            field = field.scale(amplitude / norm);
        }
        field
    }

    pub fn lattice(&self) -> &Arc<Lattice> {
        &self.lattice
    }

    pub fn coeffs(&self) -> &[CVec3] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [CVec3] {
        &mut self.coeffs
    }

    pub fn coeff(&self, i: usize) -> &CVec3 {
        &self.coeffs[i]
    }

    pub fn coeff_at(&self, k: [i32; 3]) -> Option<&CVec3> {
        self.lattice.index_of(k).map(|i| &self.coeffs[i])
    }

    pub fn mean(&self) -> RVec3 {
        self.mean
    }

    pub fn with_mean(mut self, mean: RVec3) -> SpectralField {
        self.mean = mean;
        self
    }

    /// Indices of modes with a nonzero coefficient.
    pub fn support(&self) -> Vec<usize> {
        (0..self.coeffs.len())
            .filter(|&i| !linalg::is_zero(&self.coeffs[i]))
            .collect()
    }

    pub fn check_same_lattice(&self, other: &SpectralField) -> Result<()> {
        if self.lattice.same_as(&other.lattice) {
            Ok(())
        } else {
            Err(Error::LatticeMismatch)
        }
    }

    fn map_modes(&self, f: impl Fn(usize, &CVec3) -> CVec3) -> SpectralField {
        SpectralField {
            lattice: self.lattice.clone(),
            coeffs: self.coeffs.iter().enumerate().map(|(i, c)| f(i, c)).collect(),
            mean: self.mean,
        }
    }

    pub fn scale(&self, s: f64) -> SpectralField {
        let mut out = self.map_modes(|_, c| scale_r(c, s));
        out.mean = self.mean.map(|x| x * s);
        out
    }

    /// `self + a * other`
    pub fn axpy(&self, a: f64, other: &SpectralField) -> SpectralField {
        let mut out = self.clone();
        out.axpy_assign(a, other);
        out
    }

    pub fn axpy_assign(&mut self, a: f64, other: &SpectralField) {
        let a = C64::new(a, 0.0);
        for (x, y) in self.coeffs.iter_mut().zip(&other.coeffs) {
            axpy(x, a, y);
        }
        for j in 0..3 {
            self.mean[j] += a.re * other.mean[j];
        }
    }

    pub fn add(&self, other: &SpectralField) -> SpectralField {
        self.axpy(1.0, other)
    }

    pub fn sub(&self, other: &SpectralField) -> SpectralField {
        self.axpy(-1.0, other)
    }

    /// `<u, v> = V * (mean_u . mean_v + sum_k u_k . conj(v_k))`
    pub fn inner(&self, other: &SpectralField) -> C64 {
        let s: C64 = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| linalg::hdot(a, b))
            .sum();
        (s + linalg::rdot(&self.mean, &other.mean)) * self.lattice.volume()
    }

    /// `|u|`, including the mean.
    pub fn l2_norm(&self) -> f64 {
        self.inner(self).re.max(0.0).sqrt()
    }

    /// `|u|_{alpha, sigma}` of the zero-mean part.
    pub fn gevrey_norm(&self, index: GevreyIndex) -> f64 {
        let s: f64 = self
            .coeffs
            .iter()
            .zip(self.lattice.modes())
            .map(|(c, m)| index.weight_sq(m.lambda_f64) * norm_sq(c))
            .sum();
        (self.lattice.volume() * s).sqrt()
    }

    /// `||u|| = |A^(1/2) u|`
    pub fn h1_norm(&self) -> f64 {
        self.gevrey_norm(GevreyIndex::H1)
    }

    /// Largest coefficient modulus, mean included.
    pub fn max_coeff(&self) -> f64 {
        self.coeffs
            .iter()
            .map(linalg::max_abs)
            .chain(self.mean.iter().map(|x| x.abs()))
            .fold(0.0, f64::max)
    }

    /// Largest `|u_{-k} - conj(u_k)|`.
    pub fn reality_defect(&self) -> f64 {
        (0..self.coeffs.len())
            .map(|i| {
                let j = self.lattice.neg(i);
                linalg::max_abs(&linalg::sub(&self.coeffs[i], &conj(&self.coeffs[j])))
            })
            .fold(0.0, f64::max)
    }

    /// Largest `|kcheck . u_k|`.
    pub fn divergence_defect(&self) -> f64 {
        self.coeffs
            .iter()
            .zip(self.lattice.modes())
            .map(|(c, m)| cdot_r(c, &m.kcheck).norm())
            .fold(0.0, f64::max)
    }

    /// `A^alpha u`
    pub fn apply_a_power(&self, alpha: f64) -> SpectralField {
        let lat = self.lattice.clone();
        let mut out = self.map_modes(|i, c| scale_r(c, lat.mode(i).lambda_f64.powf(alpha)));
        out.mean = [0.0; 3];
        out
    }

    /// `e^{sigma A^(1/2)} u`
    pub fn apply_exp_sqrt_a(&self, sigma: f64) -> SpectralField {
        let lat = self.lattice.clone();
        self.map_modes(|i, c| scale_r(c, (sigma * lat.mode(i).kabs).exp()))
    }

    /// `e^{-tA} u`
    pub fn apply_heat(&self, t: f64) -> SpectralField {
        let lat = self.lattice.clone();
        self.map_modes(|i, c| scale_r(c, (-t * lat.mode(i).lambda_f64).exp()))
    }

    /// `S u`, mode-wise `P_k J P_k u_k`.
    pub fn apply_s(&self) -> SpectralField {
        let lat = self.lattice.clone();
        let mut out = self.map_modes(|i, c| {
            let m = lat.mode(i);
            let pc = mat_cvec(&m.proj, c);
            mat_cvec(&m.proj, &mat_cvec(&linalg::J, &pc))
        });
        out.mean = [0.0; 3];
        out
    }

    /// `e^{tS} u`, mode-wise `E_k(ktil_3 t) u_k`.
    pub fn apply_exp_s(&self, t: f64) -> SpectralField {
        if t == 0.0 {
            return self.clone();
        }
        let lat = self.lattice.clone();
        self.map_modes(|i, c| {
            let m = lat.mode(i);
            rotate_mode(&m.ktil, m.ktil[2] * t, c)
        })
    }

    /// `R_Lambda u`: modes with eigenvalue exactly `Lambda`.
    pub fn eigenprojection(&self, value: &Rational) -> Result<SpectralField> {
        if self.lattice.shell_of(value).is_none() {
            return Err(Error::NotAnEigenvalue(value.to_string()));
        }
        let lat = self.lattice.clone();
        let mut out =
            self.map_modes(|i, c| if &lat.mode(i).lambda == value { *c } else { CZERO });
        out.mean = [0.0; 3];
        Ok(out)
    }

    /// `P_Lambda u`: modes with eigenvalue at most `Lambda`.
    pub fn cumulative_projection(&self, value: &Rational) -> Result<SpectralField> {
        if self.lattice.shell_of(value).is_none() {
            return Err(Error::NotAnEigenvalue(value.to_string()));
        }
        let lat = self.lattice.clone();
        let mut out =
            self.map_modes(|i, c| if &lat.mode(i).lambda <= value { *c } else { CZERO });
        out.mean = [0.0; 3];
        Ok(out)
    }

    /// Galerkin-truncated `B(u, v) = P (u . grad) v`.
    pub fn bilinear_b(&self, v: &SpectralField, exec: Exec) -> Result<SpectralField> {
        self.check_same_lattice(v)?;
        if self.mean != [0.0; 3] || v.mean != [0.0; 3] {
            return Err(Error::NonZeroMean);
        }
        let lat = &self.lattice;
        let su = self.support();
        let sv = v.support();
        let pairs = su.len() * sv.len();
        let mut raw = if pairs < lat.triad_count() / 2 {
            let mut raw = vec![CZERO; lat.len()];
            for &m in &su {
                let um = &self.coeffs[m];
                let km = lat.mode(m).k;
                for &j in &sv {
                    let kj = lat.mode(j).k;
                    let k = [km[0] + kj[0], km[1] + kj[1], km[2] + kj[2]];
                    if let Some(i) = lat.index_of(k) {
                        let a = I * cdot_r(um, &lat.mode(j).kcheck);
                        axpy(&mut raw[i], a, &v.coeffs[j]);
                    }
                }
            }
            raw
        } else {
            let exec = exec.for_work(lat.triad_count());
            map_range(exec, lat.len(), |i| {
                let mut acc = CZERO;
                for &(m, j) in lat.triads(i) {
                    let (m, j) = (m as usize, j as usize);
                    let a = I * cdot_r(&self.coeffs[m], &lat.mode(j).kcheck);
                    axpy(&mut acc, a, &v.coeffs[j]);
                }
                acc
            })
        };
        for (c, m) in raw.iter_mut().zip(lat.modes()) {
            *c = mat_cvec(&m.proj, c);
        }
        Ok(SpectralField::from_coeffs(lat, raw, [0.0; 3]))
    }

    /// `B_Omega(t, u, v) = e^{Omega t S} B(e^{-Omega t S} u, e^{-Omega t S} v)`.
    pub fn bilinear_b_omega(
        &self,
        v: &SpectralField,
        t: f64,
        omega: f64,
        exec: Exec,
    ) -> Result<SpectralField> {
        let s = omega * t;
        if s == 0.0 {
            return self.bilinear_b(v, exec);
        }
        let b = self.apply_exp_s(-s).bilinear_b(&v.apply_exp_s(-s), exec)?;
        Ok(b.apply_exp_s(s))
    }

    /// Helicity `<curl u, u>`.
    pub fn helicity(&self) -> f64 {
        let s: f64 = self
            .coeffs
            .iter()
            .zip(self.lattice.modes())
            .map(|(c, m)| {
                let curl = linalg::scale(&cross_rc(&m.kcheck, c), I);
                linalg::hdot(&curl, c).re
            })
            .sum();
        s * self.lattice.volume()
    }

    /// Physical velocity at `x`.
    pub fn value_at(&self, x: &RVec3) -> RVec3 {
        let mut out = self.mean;
        for (c, m) in self.coeffs.iter().zip(self.lattice.modes()) {
            if linalg::is_zero(c) {
                continue;
            }
            let ph = linalg::rdot(&m.kcheck, x);
            let e = C64::new(ph.cos(), ph.sin());
            for j in 0..3 {
                out[j] += (c[j] * e).re;
            }
        }
        out
    }
}

/// `E(theta) z = cos(theta) z + sin(theta) (ktil x z)`.
#[inline]
pub fn rotate_mode(ktil: &RVec3, theta: f64, z: &CVec3) -> CVec3 {
    if theta == 0.0 {
        return *z;
    }
    let (s, c) = theta.sin_cos();
    let jz = cross_rc(ktil, z);
    let mut out = scale_r(z, c);
    axpy(&mut out, C64::new(s, 0.0), &jz);
    out
}
