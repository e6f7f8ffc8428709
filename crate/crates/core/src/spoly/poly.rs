//! Field-valued S-polynomials `sum t^m c e^{i omega t}` in canonical form.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_traits::Zero;
use serde_json::{json, Value};

use super::calculus::integrate_complex;
use super::frequency::Frequency;
use crate::error::{Error, Result};
use crate::field::SpectralField;
use crate::lattice::{rat_to_f64, Lattice, Rational};
use crate::linalg::{
    self, add_assign, axpy, cdot_r, conj, cross_rc, mat_cvec, max_abs, scale, scale_r, CVec3,
    C64, CZERO, I,
};
use crate::par::{map_slice, Exec};

/// Relative size below which a coefficient produced by cancellation is
/// treated as roundoff and dropped.
const CANCEL_TOL: f64 = 1e-13;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TermKey {
    pub mode: usize,
    pub power: u32,
    pub freq: Frequency,
}

impl TermKey {
    pub fn new(mode: usize, power: u32, freq: Frequency) -> TermKey {
        TermKey { mode, power, freq }
    }
}

/// Complex scalar S-polynomial `sum g t^m e^{i omega t}`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ScalarSPoly {
    terms: BTreeMap<(u32, Frequency), C64>,
}

impl ScalarSPoly {
    pub fn one() -> ScalarSPoly {
        ScalarSPoly::monomial(0, Frequency::zero(), C64::new(1.0, 0.0))
    }

    pub fn monomial(power: u32, freq: Frequency, coef: C64) -> ScalarSPoly {
        let mut s = ScalarSPoly::default();
        s.add_term(power, freq, coef);
        s
    }

    /// `cos(omega t)`
    pub fn cos(freq: &Frequency) -> ScalarSPoly {
        let mut s = ScalarSPoly::monomial(0, freq.clone(), C64::new(0.5, 0.0));
        s.add_term(0, freq.neg(), C64::new(0.5, 0.0));
        s
    }

    /// `sin(omega t)`
    pub fn sin(freq: &Frequency) -> ScalarSPoly {
        let mut s = ScalarSPoly::monomial(0, freq.clone(), C64::new(0.0, -0.5));
        s.add_term(0, freq.neg(), C64::new(0.0, 0.5));
        s
    }

    pub fn add_term(&mut self, power: u32, freq: Frequency, coef: C64) {
        let e = self.terms.entry((power, freq)).or_insert(C64::new(0.0, 0.0));
        *e += coef;
        if e.re == 0.0 && e.im == 0.0 {
            self.terms.retain(|_, c| c.re != 0.0 || c.im != 0.0);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(u32, Frequency), &C64)> {
        self.terms.iter()
    }

    pub fn mul(&self, other: &ScalarSPoly) -> ScalarSPoly {
        let mut out = ScalarSPoly::default();
        for ((p1, w1), a) in &self.terms {
            for ((p2, w2), b) in &other.terms {
                out.add_term(p1 + p2, w1.add(w2), a * b);
            }
        }
        out
    }

    pub fn evaluate(&self, t: f64) -> C64 {
        self.terms
            .iter()
            .map(|((p, w), c)| c * t.powi(*p as i32) * C64::new(0.0, w.value() * t).exp())
            .sum()
    }
}

#[derive(Debug, Clone)]
pub struct SPoly {
    lattice: Arc<Lattice>,
    terms: BTreeMap<TermKey, CVec3>,
}

impl SPoly {
    pub fn zero(lattice: &Arc<Lattice>) -> SPoly {
        SPoly {
            lattice: lattice.clone(),
            terms: BTreeMap::new(),
        }
    }

    /// The time-independent S-polynomial equal to `field` (mean ignored).
    pub fn constant(field: &SpectralField) -> SPoly {
        let mut out = SPoly::zero(field.lattice());
        for i in field.support() {
            out.add_term(TermKey::new(i, 0, Frequency::zero()), *field.coeff(i));
        }
        out
    }

    pub fn from_terms<It>(lattice: &Arc<Lattice>, terms: It) -> SPoly
    where
        It: IntoIterator<Item = (TermKey, CVec3)>,
    {
        let mut out = SPoly::zero(lattice);
        for (k, c) in terms {
            out.add_term(k, c);
        }
        out
    }

    pub fn add_term(&mut self, key: TermKey, c: CVec3) {
        if linalg::is_zero(&c) {
            return;
        }
        match self.terms.get_mut(&key) {
            Some(e) => {
                add_assign(e, &c);
                if linalg::is_zero(e) {
                    self.terms.remove(&key);
                }
            }
            None => {
                self.terms.insert(key, c);
            }
        }
    }

    pub fn lattice(&self) -> &Arc<Lattice> {
        &self.lattice
    }

    pub fn terms(&self) -> impl Iterator<Item = (&TermKey, &CVec3)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_empty(&self) -> bool {
        self.is_zero()
    }

    pub fn get(&self, key: &TermKey) -> Option<&CVec3> {
        self.terms.get(key)
    }

    fn check_same(&self, other: &SPoly) -> Result<()> {
        if self.lattice.same_as(&other.lattice) {
            Ok(())
        } else {
            Err(Error::LatticeMismatch)
        }
    }

    /// Drops exact zeros. Idempotent.
    pub fn canonicalize(&self) -> SPoly {
        SPoly {
            lattice: self.lattice.clone(),
            terms: self
                .terms
                .iter()
                .filter(|(_, c)| !linalg::is_zero(c))
                .map(|(k, c)| (k.clone(), *c))
                .collect(),
        }
    }

    pub fn add(&self, other: &SPoly) -> Result<SPoly> {
        self.check_same(other)?;
        let mut out = self.clone();
        for (k, c) in &other.terms {
            out.add_term(k.clone(), *c);
        }
        Ok(out)
    }

    pub fn sub(&self, other: &SPoly) -> Result<SPoly> {
        self.add(&other.scale(-1.0))
    }

    pub fn scale(&self, s: f64) -> SPoly {
        let mut out = SPoly::zero(&self.lattice);
        for (k, c) in &self.terms {
            out.add_term(k.clone(), scale_r(c, s));
        }
        out
    }

    fn map_terms(&self, f: impl Fn(&TermKey, &CVec3) -> Vec<(TermKey, CVec3)>) -> SPoly {
        let mut out = SPoly::zero(&self.lattice);
        for (k, c) in &self.terms {
            for (k2, c2) in f(k, c) {
                out.add_term(k2, c2);
            }
        }
        out
    }

    /// `t -> f(t + T)`
    pub fn time_shift(&self, shift: f64) -> SPoly {
        if shift == 0.0 {
            return self.clone();
        }
        self.map_terms(|k, c| {
            let phase = C64::new(0.0, k.freq.value() * shift).exp();
            let m = k.power;
            let mut binom = 1.0;
            let mut out = Vec::with_capacity(m as usize + 1);
            for n in (0..=m).rev() {
                // C(m, n) T^{m-n}
                let w = binom * shift.powi((m - n) as i32);
                out.push((
                    TermKey::new(k.mode, n, k.freq.clone()),
                    scale(c, phase * w),
                ));
                binom = binom * n as f64 / (m - n + 1) as f64;
            }
            out
        })
    }

    /// `t -> f(kappa t)`
    pub fn time_dilate(&self, kappa: f64) -> SPoly {
        self.map_terms(|k, c| {
            vec![(
                TermKey::new(k.mode, k.power, k.freq.dilate(kappa)),
                scale_r(c, kappa.powi(k.power as i32)),
            )]
        })
    }

    /// `g(t) f(t)` for a scalar S-polynomial `g`. Reality of the product needs
    /// `g` real-valued.
    pub fn multiply_scalar(&self, g: &ScalarSPoly) -> SPoly {
        self.map_terms(|k, c| {
            g.terms()
                .map(|((p, w), a)| {
                    (
                        TermKey::new(k.mode, k.power + p, k.freq.add(w)),
                        scale(c, *a),
                    )
                })
                .collect()
        })
    }

    pub fn differentiate(&self) -> SPoly {
        self.map_terms(|k, c| {
            let mut out = Vec::with_capacity(2);
            if k.power > 0 {
                out.push((
                    TermKey::new(k.mode, k.power - 1, k.freq.clone()),
                    scale_r(c, k.power as f64),
                ));
            }
            if !k.freq.is_zero() {
                out.push((k.clone(), scale(c, C64::new(0.0, k.freq.value()))));
            }
            out
        })
    }

    /// Mode-wise `A^alpha`.
    pub fn apply_a_power(&self, alpha: f64) -> SPoly {
        let lat = self.lattice.clone();
        self.map_terms(|k, c| {
            vec![(
                k.clone(),
                scale_r(c, lat.mode(k.mode).lambda_f64.powf(alpha)),
            )]
        })
    }

    /// Keeps modes whose eigenvalue satisfies `keep`.
    pub fn restrict(&self, keep: impl Fn(&Rational) -> bool) -> SPoly {
        SPoly {
            lattice: self.lattice.clone(),
            terms: self
                .terms
                .iter()
                .filter(|(k, _)| keep(&self.lattice.mode(k.mode).lambda))
                .map(|(k, c)| (k.clone(), *c))
                .collect(),
        }
    }

    /// `R_Lambda f`
    pub fn eigenprojection(&self, value: &Rational) -> SPoly {
        self.restrict(|l| l == value)
    }

    pub fn evaluate(&self, t: f64) -> SpectralField {
        let mut coeffs = vec![CZERO; self.lattice.len()];
        for (k, c) in &self.terms {
            let w = C64::new(0.0, k.freq.value() * t).exp() * t.powi(k.power as i32);
            axpy(&mut coeffs[k.mode], w, c);
        }
        SpectralField::from_coeffs(&self.lattice, coeffs, [0.0; 3])
    }

    /// `e^{Omega t S} f(t)`: each `E_k(Omega ktil_3 t)` splits a term into
    /// `(I -+ i J_k) c / 2` at frequencies `omega +- Omega ktil_3`.
    pub fn apply_exp_s(&self, omega: f64) -> SPoly {
        if omega == 0.0 {
            return self.clone();
        }
        let lat = self.lattice.clone();
        self.map_terms(|k, c| {
            let m = lat.mode(k.mode);
            let Some(cosine) = &m.ktil3 else {
                return vec![(k.clone(), *c)];
            };
            let rot = Frequency::rotation(omega, cosine);
            let jc = scale(&cross_rc(&m.ktil, c), I);
            let plus = scale_r(&linalg::sub(c, &jc), 0.5);
            let minus = scale_r(&add_vec(c, &jc), 0.5);
            let floor = CANCEL_TOL * max_abs(c);
            let mut out = Vec::with_capacity(2);
            if max_abs(&plus) > floor {
                out.push((TermKey::new(k.mode, k.power, k.freq.add(&rot)), plus));
            }
            if max_abs(&minus) > floor {
                out.push((TermKey::new(k.mode, k.power, k.freq.sub(&rot)), minus));
            }
            out
        })
    }

    /// Galerkin-truncated `B(f(t), g(t))` as an S-polynomial.
    pub fn bilinear_plain(&self, g: &SPoly, exec: Exec) -> Result<SPoly> {
        self.check_same(g)?;
        let lat = &self.lattice;
        let mut by_mode: BTreeMap<usize, Vec<(&TermKey, &CVec3)>> = BTreeMap::new();
        for (k, c) in &g.terms {
            by_mode.entry(k.mode).or_default().push((k, c));
        }
        let by_mode: Vec<(usize, Vec<(&TermKey, &CVec3)>)> = by_mode.into_iter().collect();
        let fterms: Vec<(&TermKey, &CVec3)> = self.terms.iter().collect();
        let work = fterms.len() * g.terms.len();
        let parts = map_slice(exec.for_work(work), &fterms, |(kf, cf)| {
            let km = lat.mode(kf.mode).k;
            let mut out: Vec<(TermKey, CVec3, f64)> = Vec::new();
            for (j, gterms) in &by_mode {
                let mj = lat.mode(*j);
                let k = [km[0] + mj.k[0], km[1] + mj.k[1], km[2] + mj.k[2]];
                let Some(i) = lat.index_of(k) else { continue };
                let a = I * cdot_r(cf, &mj.kcheck);
                let amag = linalg::norm_sq(cf).sqrt() * mj.kabs;
                for (kg, cg) in gterms {
                    out.push((
                        TermKey::new(i, kf.power + kg.power, kf.freq.add(&kg.freq)),
                        scale(cg, a),
                        amag * max_abs(cg),
                    ));
                }
            }
            out
        });
        let mut acc: BTreeMap<TermKey, (CVec3, f64)> = BTreeMap::new();
        for (key, c, mag) in parts.into_iter().flatten() {
            let e = acc.entry(key).or_insert((CZERO, 0.0));
            add_assign(&mut e.0, &c);
            e.1 += mag;
        }
        let mut out = SPoly::zero(lat);
        for (key, (c, mag)) in acc {
            let p = mat_cvec(&lat.mode(key.mode).proj, &c);
            if max_abs(&p) > CANCEL_TOL * mag {
                out.add_term(key, p);
            }
        }
        Ok(out)
    }

    /// `B_Omega(t, f(t), g(t)) = e^{Omega t S} B(e^{-Omega t S} f, e^{-Omega t S} g)`.
    pub fn bilinear(&self, g: &SPoly, omega: f64, exec: Exec) -> Result<SPoly> {
        let f = self.apply_exp_s(-omega);
        let g = g.apply_exp_s(-omega);
        Ok(f.bilinear_plain(&g, exec)?.apply_exp_s(omega))
    }

    /// Solves `q' + beta q = self`. For `beta != 0` this is the unique
    /// S-polynomial solution; for `beta = 0` the solution with `q(0) = xi0`.
    pub fn ode_solve(&self, beta: &Rational, xi0: Option<&SpectralField>) -> Result<SPoly> {
        let b = rat_to_f64(beta);
        let resonant = beta.is_zero();
        if resonant && xi0.is_none() {
            return Err(Error::MissingInitialValue);
        }
        let mut out = SPoly::zero(&self.lattice);
        let mut at_zero = vec![CZERO; self.lattice.len()];
        for (k, c) in &self.terms {
            if resonant && k.freq.is_zero() {
                out.add_term(
                    TermKey::new(k.mode, k.power + 1, Frequency::zero()),
                    scale_r(c, 1.0 / (k.power as f64 + 1.0)),
                );
                continue;
            }
            let a = integrate_complex(k.power, C64::new(b, k.freq.value()))?;
            for (n, an) in a.iter().enumerate() {
                out.add_term(TermKey::new(k.mode, n as u32, k.freq.clone()), scale(c, *an));
            }
            if resonant {
                axpy(&mut at_zero[k.mode], a[0], c);
            }
        }
        if let Some(xi) = xi0.filter(|_| resonant) {
            if !self.lattice.same_as(xi.lattice()) {
                return Err(Error::LatticeMismatch);
            }
            for (i, f0) in at_zero.iter().enumerate() {
                let c = linalg::sub(xi.coeff(i), f0);
                out.add_term(TermKey::new(i, 0, Frequency::zero()), c);
            }
        }
        Ok(out)
    }

    pub fn max_coeff(&self) -> f64 {
        self.terms.values().map(max_abs).fold(0.0, f64::max)
    }

    pub fn max_power(&self) -> u32 {
        self.terms.keys().map(|k| k.power).max().unwrap_or(0)
    }

    /// Largest eigenvalue among modes carrying a term.
    pub fn support_bound(&self) -> Option<Rational> {
        self.terms
            .keys()
            .map(|k| self.lattice.mode(k.mode).lambda.clone())
            .max()
    }

    pub fn frequencies(&self) -> impl Iterator<Item = &Frequency> {
        self.terms.keys().map(|k| &k.freq)
    }

    /// Largest mismatch between a term and the conjugate of its partner
    /// `(-k, m, -omega)`.
    pub fn reality_defect(&self) -> f64 {
        self.terms
            .iter()
            .map(|(k, c)| {
                let partner = TermKey::new(self.lattice.neg(k.mode), k.power, k.freq.neg());
                let p = self.terms.get(&partner).copied().unwrap_or(CZERO);
                max_abs(&linalg::sub(c, &conj(&p)))
            })
            .fold(0.0, f64::max)
    }

    pub fn to_json(&self) -> Value {
        let terms: Vec<Value> = self
            .terms
            .iter()
            .map(|(k, c)| {
                json!({
                    "k": self.lattice.mode(k.mode).k,
                    "m": k.power,
                    "omega": k.freq.to_json(),
                    "re": linalg::real_part(c),
                    "im": linalg::imag_part(c),
                })
            })
            .collect();
        json!({ "terms": terms })
    }

    pub fn from_json(lattice: &Arc<Lattice>, v: &Value) -> Result<SPoly> {
        let bad = |what: &str| Error::Format(format!("S-polynomial: bad {what}"));
        let terms = v.get("terms").and_then(Value::as_array).ok_or_else(|| bad("terms"))?;
        let mut out = SPoly::zero(lattice);
        for t in terms {
            let k: [i32; 3] = serde_json::from_value(t.get("k").cloned().ok_or_else(|| bad("k"))?)?;
            let m = t.get("m").and_then(Value::as_u64).ok_or_else(|| bad("m"))? as u32;
            let freq = Frequency::from_json(t.get("omega").ok_or_else(|| bad("omega"))?)?;
            let re: [f64; 3] = serde_json::from_value(t.get("re").cloned().ok_or_else(|| bad("re"))?)?;
            let im: [f64; 3] = serde_json::from_value(t.get("im").cloned().ok_or_else(|| bad("im"))?)?;
            let i = lattice.index_of(k).ok_or(Error::ModeNotRetained(k))?;
            out.add_term(TermKey::new(i, m, freq), linalg::from_parts(&re, &im));
        }
        Ok(out)
    }
}

fn add_vec(a: &CVec3, b: &CVec3) -> CVec3 {
    linalg::add(a, b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::GevreyIndex;
    use crate::lattice::{rat, rat_frac};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c3(a: [f64; 3]) -> CVec3 {
        a.map(|x| C64::new(x, 0.0))
    }

    fn lat() -> Arc<Lattice> {
        Lattice::cube(4)
    }

    /// Real random S-polynomial with rotation and free frequencies.
    fn random_spoly(lat: &Arc<Lattice>, seed: u64, nterms: usize, omega: f64) -> SPoly {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = SPoly::zero(lat);
        for _ in 0..nterms {
            let i = rng.random_range(0..lat.len());
            let m = lat.mode(i);
            let power = rng.random_range(0..3);
            let mut freq = Frequency::free(rng.random_range(-2.0..2.0));
            if let Some(cos) = &m.ktil3 {
                if rng.random_bool(0.5) {
                    freq = freq.add(&Frequency::rotation(omega, cos));
                }
            }
            let raw: CVec3 = std::array::from_fn(|_| {
                C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
            });
            let c = mat_cvec(&m.proj, &raw);
            out.add_term(TermKey::new(i, power, freq.clone()), c);
            out.add_term(TermKey::new(lat.neg(i), power, freq.neg()), conj(&c));
        }
        out
    }

    fn rel_diff(a: &SpectralField, b: &SpectralField) -> f64 {
        a.sub(b).max_coeff() / a.max_coeff().max(b.max_coeff()).max(1e-300)
    }

    #[test]
    fn shift_and_dilate_examples() {
        let lat = lat();
        let i = lat.index_of([1, 0, 0]).unwrap();
        let z = c3([0.0, 1.0, 0.0]);
        let tz = SPoly::from_terms(&lat, [(TermKey::new(i, 1, Frequency::zero()), z)]);
        assert_eq!(tz.time_shift(0.0).terms, tz.terms);
        let sh = tz.time_shift(3.0);
        assert_eq!(sh.get(&TermKey::new(i, 0, Frequency::zero())), Some(&c3([0.0, 3.0, 0.0])));
        assert_eq!(sh.get(&TermKey::new(i, 1, Frequency::zero())), Some(&z));
        let w = Frequency::free(1.0);
        let cos = SPoly::constant(&SpectralField::zeros(&lat))
            .add(&SPoly::from_terms(&lat, [(TermKey::new(i, 0, w.clone()), z)]))
            .unwrap();
        let d = cos.time_dilate(2.0);
        assert!(d.get(&TermKey::new(i, 0, w.add(&w))).is_some());
    }

    #[test]
    fn product_to_sum() {
        let a = Frequency::free(1.0);
        let b = Frequency::free(0.25);
        let p = ScalarSPoly::cos(&a).mul(&ScalarSPoly::cos(&b));
        for t in [0.0, 0.3, 1.7, -2.2] {
            let expect = (1.0f64 * t).cos() * (0.25 * t).cos();
            assert!((p.evaluate(t).re - expect).abs() < 1e-15);
            assert!(p.evaluate(t).im.abs() < 1e-15);
        }
        assert_eq!(p.terms().count(), 4);
        let lat = lat();
        let f = random_spoly(&lat, 9, 4, 3.0);
        assert_eq!(f.multiply_scalar(&ScalarSPoly::one()).terms, f.terms);
    }

    #[test]
    fn derivative_examples() {
        let lat = lat();
        let i = lat.index_of([0, 0, 1]).unwrap();
        let z = c3([1.0, 0.0, 0.0]);
        let konst = SPoly::from_terms(&lat, [(TermKey::new(i, 0, Frequency::zero()), z)]);
        assert!(konst.differentiate().is_zero());
        // d/dt (t cos t) = cos t - t sin t
        let w = Frequency::free(1.0);
        let tcos = SPoly::from_terms(
            &lat,
            [(TermKey::new(i, 1, w.clone()), scale_r(&z, 0.5)), (TermKey::new(i, 1, w.neg()), scale_r(&z, 0.5))],
        );
        let d = tcos.differentiate();
        for t in [0.0f64, 0.7, 2.5] {
            let v = d.evaluate(t).coeff(i)[0];
            assert!((v.re - (t.cos() - t * t.sin())).abs() < 1e-14 && v.im.abs() < 1e-14);
        }
    }

    #[test]
    fn evaluate_examples() {
        let lat = lat();
        assert_eq!(SPoly::zero(&lat).evaluate(1.3).max_coeff(), 0.0);
        let u = SpectralField::random_gevrey(&lat, 2, 0.0, 1.0);
        let c = SPoly::constant(&u);
        assert_eq!(c.evaluate(5.0).sub(&u).max_coeff(), 0.0);
        let i = lat.index_of([0, 1, 0]).unwrap();
        let z = c3([1.0, 0.0, 0.0]);
        let tz = SPoly::from_terms(&lat, [(TermKey::new(i, 1, Frequency::zero()), z)]);
        assert_eq!(*tz.evaluate(2.0).coeff(i), c3([2.0, 0.0, 0.0]));
    }

    #[test]
    fn rotation_of_constant_mode() {
        let lat = lat();
        let omega = 2.5;
        let u = SpectralField::from_half(&lat, [([0, 0, 1], c3([1.0, 0.0, 0.0]))], [0.0; 3]).unwrap();
        let f = SPoly::constant(&u).apply_exp_s(omega);
        let i = lat.index_of([0, 0, 1]).unwrap();
        for t in [0.0, 0.4, 1.1] {
            let c = f.evaluate(t).coeff(i).to_owned();
            let th = omega * t;
            assert!((c[0].re - th.cos()).abs() < 1e-15);
            assert!((c[1].re - th.sin()).abs() < 1e-15);
            assert!(c[2].norm() < 1e-15 && c[0].im.abs() < 1e-15);
        }
        assert_eq!(SPoly::constant(&u).apply_exp_s(0.0).terms, SPoly::constant(&u).terms);
    }

    #[test]
    fn colinear_bilinear_vanishes() {
        let lat = Lattice::cube(8);
        let u = SpectralField::from_half(
            &lat,
            [([1, 1, 0], c3([1.0, -1.0, 0.3])), ([2, 2, 0], c3([0.0, 0.0, 1.0]))],
            [0.0; 3],
        )
        .unwrap();
        let f = SPoly::constant(&u);
        assert!(f.bilinear(&f, 7.0, Exec::Sequential).unwrap().is_zero());
    }

    #[test]
    fn ode_documented_cases() {
        let lat = lat();
        let u = SpectralField::random_gevrey(&lat, 5, 0.0, 1.0);
        let p = SPoly::constant(&u);
        let q = p.ode_solve(&rat(2), None).unwrap();
        assert!(rel_diff(&q.evaluate(0.7), &u.scale(0.5)) < 1e-15);
        let q = p.ode_solve(&rat(-1), None).unwrap();
        assert!(rel_diff(&q.evaluate(0.7), &u.scale(-1.0)) < 1e-15);
        assert!(matches!(p.ode_solve(&rat(0), None), Err(Error::MissingInitialValue)));
        // beta = 0, p = cos(omega t) c: q = xi0 + sin(omega t) c / omega
        let w = Frequency::free(1.5);
        let pc = p.multiply_scalar(&ScalarSPoly::cos(&w));
        let xi = SpectralField::random_gevrey(&lat, 6, 0.0, 1.0);
        let q = pc.ode_solve(&rat(0), Some(&xi)).unwrap();
        for t in [0.0f64, 0.9, 3.3] {
            let expect = xi.add(&u.scale((1.5 * t).sin() / 1.5));
            assert!(rel_diff(&q.evaluate(t), &expect) < 1e-14);
        }
    }

    #[test]
    fn support_bound_of_bilinear() {
        let lat = Lattice::cube(12);
        let u = SpectralField::random_gevrey(&lat, 11, 0.0, 1.0)
            .cumulative_projection(&rat(3))
            .unwrap();
        let f = SPoly::constant(&u);
        let b = f.bilinear(&f, 2.0, Exec::Parallel).unwrap();
        assert!(b.support_bound().unwrap() <= rat(12));
        assert!(b.support_bound().unwrap() > rat(3));
    }

    #[test]
    fn json_round_trip() {
        let lat = lat();
        let f = random_spoly(&lat, 4, 6, 1.5);
        let g = SPoly::from_json(&lat, &f.to_json()).unwrap();
        assert_eq!(f.terms, g.terms);
    }

    #[test]
    fn uniqueness_guard() {
        // numerically vanishing on a window forces negligible coefficients
        let lat = Lattice::cube(2);
        for trial in 0..8 {
            let mut rng = ChaCha8Rng::seed_from_u64(trial);
            let omega = rng.random_range(0.5..4.0);
            let f = random_spoly(&lat, 100 + trial, 5, omega);
            let scale = f.max_coeff();
            let window = |g: &SPoly| (0..64).map(|n| g.evaluate(n as f64 * 0.1).max_coeff()).fold(0.0, f64::max);
            assert!(window(&f) > 1e-12 * scale);
            let s = rng.random_range(-2.0..2.0);
            let g = f.time_shift(s).time_shift(-s).sub(&f).unwrap();
            assert!(window(&g) <= 1e-12 * scale);
            assert!(g.max_coeff() <= 1e-10 * scale);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn symbolic_ops_commute_with_evaluation(seed in any::<u64>(), omega in -6.0f64..6.0, shift in -2.0f64..2.0) {
            let lat = lat();
            let f = random_spoly(&lat, seed, 6, omega);
            let g = random_spoly(&lat, seed ^ 0x55, 6, omega);
            let rot = f.apply_exp_s(omega);
            let b = f.bilinear(&g, omega, Exec::Sequential).unwrap();
            let d = f.differentiate();
            let sh = f.time_shift(shift);
            let dil = f.time_dilate(1.5);
            let w = Frequency::free(0.75);
            let prod = f.multiply_scalar(&ScalarSPoly::sin(&w));
            prop_assert!(f.reality_defect() == 0.0);
            prop_assert!(b.reality_defect() <= 1e-12 * b.max_coeff().max(1e-300));
            prop_assert!(f.canonicalize().terms == f.canonicalize().canonicalize().terms);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..20 {
                let t: f64 = rng.random_range(-3.0..3.0);
                let ft = f.evaluate(t);
                prop_assert!(rel_diff(&rot.evaluate(t), &ft.apply_exp_s(omega * t)) < 1e-11);
                prop_assert!((rot.evaluate(t).gevrey_norm(GevreyIndex::new(0.5, 0.2).unwrap())
                    - ft.gevrey_norm(GevreyIndex::new(0.5, 0.2).unwrap())).abs()
                    <= 1e-11 * ft.gevrey_norm(GevreyIndex::new(0.5, 0.2).unwrap()));
                let direct = ft.bilinear_b_omega(&g.evaluate(t), t, omega, Exec::Sequential).unwrap();
                prop_assert!(rel_diff(&b.evaluate(t), &direct) < 1e-11);
                let h = 1e-4;
                let fd = f.evaluate(t + h).sub(&f.evaluate(t - h)).scale(0.5 / h);
                prop_assert!(rel_diff(&d.evaluate(t), &fd) < 1e-6);
                prop_assert!(rel_diff(&sh.evaluate(t), &f.evaluate(t + shift)) < 1e-11);
                prop_assert!(rel_diff(&dil.evaluate(t), &f.evaluate(1.5 * t)) < 1e-11);
                let s = (0.75 * t).sin();
                prop_assert!(prod.evaluate(t).sub(&ft.scale(s)).max_coeff() <= 1e-11 * ft.max_coeff());
            }
        }

        #[test]
        fn ode_residual_all_signs(seed in any::<u64>(), beta_num in -6i64..=6) {
            let lat = lat();
            let p = random_spoly(&lat, seed, 6, 2.0);
            let beta = rat_frac(beta_num, 2);
            let xi = SpectralField::random_gevrey(&lat, seed, 0.0, 1.0);
            let q = p.ode_solve(&beta, Some(&xi)).unwrap();
            let residual = q.differentiate().add(&q.scale(rat_to_f64(&beta))).unwrap().sub(&p).unwrap();
            let scale = p.max_coeff().max(q.max_coeff());
            prop_assert!(residual.max_coeff() <= 1e-12 * scale);
            prop_assert!(q.reality_defect() <= 1e-12 * scale);
            if beta.is_zero() {
                prop_assert!(rel_diff(&q.evaluate(0.0), &xi) < 1e-12);
            }
        }
    }
}
