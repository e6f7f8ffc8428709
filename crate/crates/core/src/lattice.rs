//! Wave-vector geometry of the periodic box, the Stokes spectrum and the
//! additive semigroup generated by it.
//!
//! Periods are normalized so that the longest one is `2*pi`, which puts the
//! first Stokes eigenvalue at 1. Squared frequency ratios
//! `q_j = (L_max / L_j)^2` are kept as exact rationals, so every eigenvalue
//! `|kcheck|^2 = sum_j q_j k_j^2` and every semigroup element is exact and
//! resonance tests are equality tests.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::f64::consts::PI;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::linalg::{Mat3, RVec3, IDENTITY};

pub type Rational = BigRational;

pub fn rat(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn rat_frac(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn rat_to_f64(r: &Rational) -> f64 {
    r.numer().to_f64().unwrap_or(f64::NAN) / r.denom().to_f64().unwrap_or(f64::NAN)
}

/// Best rational approximation with denominator at most `max_den`, accepted
/// only when it reproduces `x` to `rel_tol`.
pub fn recover_rational(x: f64, max_den: i64, rel_tol: f64) -> Option<Rational> {
    if !x.is_finite() {
        return None;
    }
    let (mut h0, mut h1) = (0i128, 1i128);
    let (mut k0, mut k1) = (1i128, 0i128);
    let mut y = x.abs();
    for _ in 0..64 {
        let a = y.floor();
        if a > 1e15 {
            break;
        }
        let ai = a as i128;
        let h2 = ai * h1 + h0;
        let k2 = ai * k1 + k0;
        if k2 > max_den as i128 {
            break;
        }
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        let approx = h1 as f64 / k1 as f64;
        if (approx - x.abs()).abs() <= rel_tol * x.abs().max(f64::MIN_POSITIVE) {
            let r = Rational::new(BigInt::from(h1), BigInt::from(k1));
            return Some(if x < 0.0 { -r } else { r });
        }
        let frac = y - a;
        if frac == 0.0 {
            break;
        }
        y = 1.0 / frac;
    }
    None
}

/// Splits `n = c^2 * s` with `s` square-free.
pub fn square_free_split(mut n: u128) -> (u128, u128) {
    let mut c = 1u128;
    let mut s = 1u128;
    let mut p = 2u128;
    while p * p <= n {
        let mut e = 0;
        while n.is_multiple_of(p) {
            n /= p;
            e += 1;
        }
        c *= p.pow(e / 2);
        if e % 2 == 1 {
            s *= p;
        }
        p += if p == 2 { 1 } else { 2 };
    }
    s *= n;
    (c, s)
}

/// Exact form of the vertical direction cosine `ktilde_3 = coef * sqrt(s)`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DirectionCosine {
    pub coef: Rational,
    pub square_free: u64,
}

/// One retained Fourier mode `k != 0`.
#[derive(Debug, Clone)]
pub struct Mode {
    pub k: [i32; 3],
    pub kcheck: RVec3,
    pub lambda: Rational,
    pub lambda_f64: f64,
    /// `|kcheck|`
    pub kabs: f64,
    pub ktil: RVec3,
    /// Leray projector `I - ktil ktil^T`.
    pub proj: Mat3,
    /// `J_k z = ktil x z`.
    pub jk: Mat3,
    /// `None` when `k_3 = 0`.
    pub ktil3: Option<DirectionCosine>,
}

impl Mode {
    fn new(k: [i32; 3], sq: &[Rational; 3], scale: &RVec3) -> Mode {
        let kcheck = [
            k[0] as f64 * scale[0],
            k[1] as f64 * scale[1],
            k[2] as f64 * scale[2],
        ];
        let lambda = (0..3)
            .map(|j| &sq[j] * rat(k[j] as i64 * k[j] as i64))
            .fold(Rational::zero(), |a, b| a + b);
        let lambda_f64 = rat_to_f64(&lambda);
        let kabs = lambda_f64.sqrt();
        let ktil = [kcheck[0] / kabs, kcheck[1] / kabs, kcheck[2] / kabs];
        let mut proj = IDENTITY;
        for (i, row) in proj.iter_mut().enumerate() {
            for (j, entry) in row.iter_mut().enumerate() {
                *entry -= ktil[i] * ktil[j];
            }
        }
        let jk = [
            [0.0, -ktil[2], ktil[1]],
            [ktil[2], 0.0, -ktil[0]],
            [-ktil[1], ktil[0], 0.0],
        ];
        let ktil3 = if k[2] == 0 {
            None
        } else {
            let rho = &sq[2] * rat(k[2] as i64 * k[2] as i64) / &lambda;
            let n = (rho.numer() * rho.denom())
                .to_u128()
                .expect("direction cosine numerator overflow");
            let (c, s) = square_free_split(n);
            let mut coef = Rational::new(
                BigInt::from(c),
                rho.denom().clone(),
            );
            if k[2] < 0 {
                coef = -coef;
            }
            Some(DirectionCosine {
                coef,
                square_free: s as u64,
            })
        };
        Mode {
            k,
            kcheck,
            lambda,
            lambda_f64,
            kabs,
            ktil,
            proj,
            jk,
            ktil3,
        }
    }

    /// Numeric `ktilde_3`.
    pub fn ktil3_f64(&self) -> f64 {
        self.ktil[2]
    }
}

/// Set of modes sharing one eigenvalue.
#[derive(Debug, Clone)]
pub struct Shell {
    pub value: Rational,
    pub value_f64: f64,
    pub modes: Vec<usize>,
}

/// The periodic box together with its retained Galerkin mode set.
#[derive(Debug)]
pub struct Lattice {
    sq: [Rational; 3],
    scale: RVec3,
    periods: RVec3,
    volume: f64,
    cutoff: Rational,
    modes: Vec<Mode>,
    index: HashMap<[i32; 3], usize>,
    neg: Vec<usize>,
    shells: Vec<Shell>,
    triads: Vec<Vec<(u32, u32)>>,
    triad_count: usize,
}

impl Lattice {
    /// Builds the lattice from periods given as rational multiples of `2*pi`.
    /// The largest multiple must be exactly 1.
    pub fn from_ratios(ratios: [Rational; 3], cutoff: Rational) -> Result<Arc<Lattice>> {
        for (j, r) in ratios.iter().enumerate() {
            if !r.is_positive() {
                return Err(Error::InvalidLattice(format!("period {j} must be positive")));
            }
        }
        let sq = [
            (&ratios[0] * &ratios[0]).recip(),
            (&ratios[1] * &ratios[1]).recip(),
            (&ratios[2] * &ratios[2]).recip(),
        ];
        Self::from_squared_ratios(sq, cutoff)
    }

    /// Builds the lattice from `q_j = (L_max / L_j)^2`.
    pub fn from_squared_ratios(sq: [Rational; 3], cutoff: Rational) -> Result<Arc<Lattice>> {
        let one = Rational::one();
        if sq.iter().any(|q| q < &one) {
            return Err(Error::InvalidLattice(
                "squared frequency ratios must be >= 1 (longest period is 2*pi)".into(),
            ));
        }
        if !sq.iter().any(|q| q == &one) {
            return Err(Error::InvalidLattice(
                "the longest period must equal 2*pi".into(),
            ));
        }
        if cutoff < one {
            return Err(Error::InvalidLattice(
                "cutoff must be at least the first eigenvalue 1".into(),
            ));
        }
        let sq_f64 = [rat_to_f64(&sq[0]), rat_to_f64(&sq[1]), rat_to_f64(&sq[2])];
        let scale = [sq_f64[0].sqrt(), sq_f64[1].sqrt(), sq_f64[2].sqrt()];
        let periods = [2.0 * PI / scale[0], 2.0 * PI / scale[1], 2.0 * PI / scale[2]];
        let volume = periods[0] * periods[1] * periods[2];

        let mut modes: Vec<Mode> = enumerate_wave_vectors(&sq, &cutoff)
            .into_iter()
            .map(|k| Mode::new(k, &sq, &scale))
            .collect();
        modes.sort_by(|a, b| a.lambda.cmp(&b.lambda).then(a.k.cmp(&b.k)));

        let index: HashMap<[i32; 3], usize> =
            modes.iter().enumerate().map(|(i, m)| (m.k, i)).collect();
        let neg = modes
            .iter()
            .map(|m| index[&[-m.k[0], -m.k[1], -m.k[2]]])
            .collect();

        let mut shells: Vec<Shell> = Vec::new();
        for (i, m) in modes.iter().enumerate() {
            match shells.last_mut() {
                Some(s) if s.value == m.lambda => s.modes.push(i),
                _ => shells.push(Shell {
                    value: m.lambda.clone(),
                    value_f64: m.lambda_f64,
                    modes: vec![i],
                }),
            }
        }

        let mut triads = vec![Vec::new(); modes.len()];
        let mut triad_count = 0;
        for (mi, m) in modes.iter().enumerate() {
            for (ji, j) in modes.iter().enumerate() {
                let k = [m.k[0] + j.k[0], m.k[1] + j.k[1], m.k[2] + j.k[2]];
                if let Some(&ki) = index.get(&k) {
                    triads[ki].push((mi as u32, ji as u32));
                    triad_count += 1;
                }
            }
        }

        Ok(Arc::new(Lattice {
            sq,
            scale,
            periods,
            volume,
            cutoff,
            modes,
            index,
            neg,
            shells,
            triads,
            triad_count,
        }))
    }

    /// Builds the lattice from floating periods. Each `q_j` must be
    /// recoverable as a rational with a small denominator.
    pub fn from_periods(periods: [f64; 3], cutoff: Rational) -> Result<Arc<Lattice>> {
        if periods.iter().any(|l| !(l.is_finite() && *l > 0.0)) {
            return Err(Error::InvalidLattice("periods must be positive".into()));
        }
        let lmax = periods.iter().cloned().fold(0.0, f64::max);
        let mut sq = Vec::with_capacity(3);
        for (index, l) in periods.iter().enumerate() {
            let value = (lmax / l).powi(2);
            let q = recover_rational(value, 1_000_000, 1e-12)
                .ok_or(Error::NonRationalRatio { index, value })?;
            sq.push(q);
        }
        let sq: [Rational; 3] = sq.try_into().expect("three ratios");
        if (lmax - 2.0 * PI).abs() > 1e-12 * 2.0 * PI {
            return Err(Error::InvalidLattice(format!(
                "longest period is {lmax}, expected 2*pi"
            )));
        }
        Self::from_squared_ratios(sq, cutoff)
    }

    /// The `2*pi` cube with an integer cutoff.
    pub fn cube(cutoff: i64) -> Arc<Lattice> {
        Self::from_squared_ratios([rat(1), rat(1), rat(1)], rat(cutoff))
            .expect("cube lattice is valid")
    }

    pub fn squared_ratios(&self) -> &[Rational; 3] {
        &self.sq
    }

    pub fn periods(&self) -> RVec3 {
        self.periods
    }

    /// `L1 * L2 * L3`
    pub fn volume(&self) -> f64 {
        self.volume
    }

    pub fn cutoff(&self) -> &Rational {
        &self.cutoff
    }

    pub fn modes(&self) -> &[Mode] {
        &self.modes
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn mode(&self, i: usize) -> &Mode {
        &self.modes[i]
    }

    pub fn index_of(&self, k: [i32; 3]) -> Option<usize> {
        self.index.get(&k).copied()
    }

    /// Index of `-k` for the mode at index `i`.
    pub fn neg(&self, i: usize) -> usize {
        self.neg[i]
    }

    pub fn kcheck_of(&self, k: [i32; 3]) -> RVec3 {
        [
            k[0] as f64 * self.scale[0],
            k[1] as f64 * self.scale[1],
            k[2] as f64 * self.scale[2],
        ]
    }

    /// Exact eigenvalue of an arbitrary wave vector.
    pub fn eigenvalue_of(&self, k: [i32; 3]) -> Rational {
        (0..3)
            .map(|j| &self.sq[j] * rat(k[j] as i64 * k[j] as i64))
            .fold(Rational::zero(), |a, b| a + b)
    }

    /// Retained eigenvalue shells, increasing.
    pub fn shells(&self) -> &[Shell] {
        &self.shells
    }

    pub fn shell_of(&self, value: &Rational) -> Option<&Shell> {
        self.shells
            .binary_search_by(|s| s.value.cmp(value))
            .ok()
            .map(|i| &self.shells[i])
    }

    /// Pairs `(m, j)` with `k_m + k_j = k_i`, both retained.
    pub fn triads(&self, i: usize) -> &[(u32, u32)] {
        &self.triads[i]
    }

    pub fn triad_count(&self) -> usize {
        self.triad_count
    }

    /// Whether two handles describe the same lattice.
    pub fn same_as(&self, other: &Lattice) -> bool {
        std::ptr::eq(self, other) || (self.sq == other.sq && self.cutoff == other.cutoff)
    }

    /// Distinct eigenvalues `<= cutoff` of the full (untruncated) Stokes
    /// operator with their multiplicities (mode counts). The cutoff may
    /// exceed the Galerkin cutoff.
    pub fn stokes_spectrum(&self, cutoff: &Rational) -> Vec<(Rational, usize)> {
        let mut counts: BTreeMap<Rational, usize> = BTreeMap::new();
        for k in enumerate_wave_vectors(&self.sq, cutoff) {
            *counts.entry(self.eigenvalue_of(k)).or_default() += 1;
        }
        counts.into_iter().collect()
    }

    /// Additive semigroup generated by the spectrum, truncated at `cutoff`.
    pub fn semigroup(&self, cutoff: &Rational) -> SemigroupTable {
        let eigenvalues: Vec<Rational> = self
            .stokes_spectrum(cutoff)
            .into_iter()
            .map(|(v, _)| v)
            .collect();
        SemigroupTable::generate(&eigenvalues, cutoff)
    }
}

fn enumerate_wave_vectors(sq: &[Rational; 3], cutoff: &Rational) -> Vec<[i32; 3]> {
    let c = rat_to_f64(cutoff);
    let bound = |j: usize| (c / rat_to_f64(&sq[j])).sqrt().floor() as i32 + 1;
    let (b0, b1, b2) = (bound(0), bound(1), bound(2));
    let mut out = Vec::new();
    for k0 in -b0..=b0 {
        for k1 in -b1..=b1 {
            for k2 in -b2..=b2 {
                if k0 == 0 && k1 == 0 && k2 == 0 {
                    continue;
                }
                let k = [k0, k1, k2];
                let lambda = (0..3)
                    .map(|j| &sq[j] * rat(k[j] as i64 * k[j] as i64))
                    .fold(Rational::zero(), |a, b| a + b);
                if &lambda <= cutoff {
                    out.push(k);
                }
            }
        }
    }
    out
}

/// Sorted elements `mu_1 < mu_2 < ...` of the additive semigroup together with
/// every ordered decomposition `mu_m + mu_j = mu_n`. Orders are 1-based.
#[derive(Debug, Clone)]
pub struct SemigroupTable {
    pub eigenvalues: Vec<Rational>,
    pub elements: Vec<Rational>,
    pub decompositions: Vec<Vec<(usize, usize)>>,
}

impl SemigroupTable {
    pub fn generate(eigenvalues: &[Rational], cutoff: &Rational) -> SemigroupTable {
        let gens: Vec<Rational> = eigenvalues.iter().filter(|e| *e <= cutoff).cloned().collect();
        let mut set: BTreeSet<Rational> = gens.iter().cloned().collect();
        let mut frontier: Vec<Rational> = set.iter().cloned().collect();
        while !frontier.is_empty() {
            let mut next = Vec::new();
            for a in &frontier {
                for g in &gens {
                    let s = a + g;
                    if &s > cutoff {
                        break;
                    }
                    if set.insert(s.clone()) {
                        next.push(s);
                    }
                }
            }
            frontier = next;
        }
        let elements: Vec<Rational> = set.into_iter().collect();
        let decompositions = elements
            .iter()
            .map(|mu| {
                let mut pairs = Vec::new();
                for (m, a) in elements.iter().enumerate() {
                    if a >= mu {
                        break;
                    }
                    let rest = mu - a;
                    if let Ok(j) = elements.binary_search(&rest) {
                        pairs.push((m + 1, j + 1));
                    }
                }
                pairs
            })
            .collect();
        SemigroupTable {
            eigenvalues: gens,
            elements,
            decompositions,
        }
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// `mu_n` for 1-based `n`.
    pub fn mu(&self, n: usize) -> &Rational {
        &self.elements[n - 1]
    }

    /// 1-based order of `value`, if it is an element.
    pub fn order_of(&self, value: &Rational) -> Option<usize> {
        self.elements.binary_search(value).ok().map(|i| i + 1)
    }

    /// Decomposition pairs of `mu_n` (1-based).
    pub fn pairs(&self, n: usize) -> &[(usize, usize)] {
        &self.decompositions[n - 1]
    }

    pub fn is_eigenvalue(&self, value: &Rational) -> bool {
        self.eigenvalues.binary_search(value).is_ok()
    }
}

pub fn rational_json(r: &Rational) -> Value {
    json!({ "num": big_to_json(r.numer()), "den": big_to_json(r.denom()) })
}

fn big_to_json(b: &BigInt) -> Value {
    match b.to_i64() {
        Some(v) => json!(v),
        None => json!(b.to_string()),
    }
}

/// JSON document describing the spectrum and the semigroup table.
pub fn spectrum_json(spectrum: &[(Rational, usize)], semigroup: &SemigroupTable) -> Value {
    let eigenvalues: Vec<Value> = spectrum
        .iter()
        .map(|(v, mult)| {
            json!({
                "num": big_to_json(v.numer()),
                "den": big_to_json(v.denom()),
                "multiplicity": mult,
            })
        })
        .collect();
    let semigroup: Vec<Value> = semigroup
        .elements
        .iter()
        .zip(&semigroup.decompositions)
        .map(|(mu, pairs)| {
            json!({
                "mu": rational_json(mu),
                "decompositions": pairs.iter().map(|(m, j)| json!([m, j])).collect::<Vec<_>>(),
            })
        })
        .collect();
    json!({ "eigenvalues": eigenvalues, "semigroup": semigroup })
}

/// Parses `"p/q"` or `"p"` into an exact rational.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let parse_int = |t: &str| {
        t.trim()
            .parse::<BigInt>()
            .map_err(|_| Error::Format(format!("not a rational: {s:?}")))
    };
    match s.split_once('/') {
        Some((n, d)) => {
            let d = parse_int(d)?;
            if d.is_zero() {
                return Err(Error::Format(format!("zero denominator in {s:?}")));
            }
            Ok(Rational::new(parse_int(n)?, d))
        }
        None => Ok(Rational::from_integer(parse_int(s)?)),
    }
}

/// `gcd`-reduced copy, mostly for display.
pub fn reduced(r: &Rational) -> (BigInt, BigInt) {
    let g = r.numer().gcd(r.denom());
    (r.numer() / &g, r.denom() / &g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{mat_max_abs, mat_mul, mat_rvec, mat_sub, rdot};

    fn ints(v: &[i64]) -> Vec<Rational> {
        v.iter().map(|&x| rat(x)).collect()
    }

    #[test]
    fn unit_mode_on_cube() {
        let lat = Lattice::cube(3);
        let m = lat.mode(lat.index_of([1, 0, 0]).unwrap());
        assert_eq!(m.kcheck, [1.0, 0.0, 0.0]);
        assert_eq!(m.lambda, rat(1));
        let d = lat.mode(lat.index_of([1, 1, 1]).unwrap());
        assert_eq!(d.lambda, rat(3));
        let s = 1.0 / 3f64.sqrt();
        for c in d.ktil {
            assert!((c - s).abs() < 1e-15);
        }
    }

    #[test]
    fn short_period_scales_eigenvalue() {
        let lat = Lattice::from_ratios([rat(1), rat_frac(1, 2), rat(1)], rat(4)).unwrap();
        let m = lat.mode(lat.index_of([0, 1, 0]).unwrap());
        assert_eq!(m.lambda, rat(4));
        assert!((m.kcheck[1] - 2.0).abs() < 1e-15);
        let spec = lat.stokes_spectrum(&rat(1));
        assert_eq!(spec, vec![(rat(1), 4)]);
    }

    #[test]
    fn cube_spectrum_and_multiplicity() {
        let lat = Lattice::cube(12);
        let spec = lat.stokes_spectrum(&rat(12));
        let values: Vec<Rational> = spec.iter().map(|(v, _)| v.clone()).collect();
        assert_eq!(values, ints(&[1, 2, 3, 4, 5, 6, 8, 9, 10, 11, 12]));
        assert_eq!(spec[0].1, 6);
        assert_eq!(lat.shells()[0].modes.len(), 6);
    }

    #[test]
    fn cube_semigroup() {
        let lat = Lattice::cube(10);
        let sg = lat.semigroup(&rat(10));
        assert_eq!(sg.elements, ints(&[1, 2, 3, 4, 5, 6, 7, 8, 9, 10]));
        assert_eq!(sg.pairs(2), &[(1, 1)]);
        assert_eq!(sg.pairs(3), &[(1, 2), (2, 1)]);
        assert_eq!(sg.pairs(1), &[] as &[(usize, usize)]);
    }

    #[test]
    fn projector_and_rotation_identities() {
        let lat = Lattice::from_ratios([rat(1), rat_frac(2, 3), rat_frac(1, 2)], rat(20)).unwrap();
        for m in lat.modes() {
            let p = m.proj;
            assert!(mat_max_abs(&mat_sub(&mat_mul(&p, &p), &p)) <= 1e-14);
            let pk = mat_rvec(&p, &m.kcheck);
            assert!(pk.iter().all(|x| x.abs() <= 1e-13 * m.kabs));
            // basis of X_k: two unit vectors orthogonal to ktil
            let a = if m.ktil[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
            let t = rdot(&a, &m.ktil);
            let mut e1 = [a[0] - t * m.ktil[0], a[1] - t * m.ktil[1], a[2] - t * m.ktil[2]];
            let n = rdot(&e1, &e1).sqrt();
            e1.iter_mut().for_each(|x| *x /= n);
            let e2 = crate::linalg::rcross(&m.ktil, &e1);
            for e in [e1, e2] {
                assert!(mat_rvec(&p, &e).iter().zip(&e).all(|(x, y)| (x - y).abs() < 1e-14));
                let jj = mat_rvec(&m.jk, &mat_rvec(&m.jk, &e));
                assert!(jj.iter().zip(&e).all(|(x, y)| (x + y).abs() < 1e-14));
            }
        }
    }

    #[test]
    fn direction_cosine_exact_form() {
        let lat = Lattice::cube(3);
        let m = lat.mode(lat.index_of([1, 1, -1]).unwrap());
        let d = m.ktil3.as_ref().unwrap();
        // -1/sqrt(3) = -(1/3) sqrt(3)
        assert_eq!(d.square_free, 3);
        assert_eq!(d.coef, rat_frac(-1, 3));
        assert!((rat_to_f64(&d.coef) * 3f64.sqrt() - m.ktil[2]).abs() < 1e-15);
        assert!(lat.mode(lat.index_of([1, 1, 0]).unwrap()).ktil3.is_none());
    }

    #[test]
    fn rejects_irrational_ratio() {
        let err = Lattice::from_periods([2.0 * PI, 2.0 * PI / 2f64.powf(0.25), 2.0 * PI], rat(2));
        assert!(matches!(err, Err(Error::NonRationalRatio { index: 1, .. })));
        let ok = Lattice::from_periods([2.0 * PI, PI, 2.0 * PI], rat(4)).unwrap();
        assert_eq!(ok.squared_ratios()[1], rat(4));
    }

    #[test]
    fn rejects_bad_normalization() {
        assert!(Lattice::from_ratios([rat_frac(1, 2), rat_frac(1, 2), rat_frac(1, 2)], rat(4)).is_err());
        assert!(Lattice::from_ratios([rat(1), rat(1), rat(1)], rat_frac(1, 2)).is_err());
    }

    #[test]
    fn triads_are_sums() {
        let lat = Lattice::cube(4);
        for i in 0..lat.len() {
            let k = lat.mode(i).k;
            for &(m, j) in lat.triads(i) {
                let (a, b) = (lat.mode(m as usize).k, lat.mode(j as usize).k);
                assert_eq!([a[0] + b[0], a[1] + b[1], a[2] + b[2]], k);
            }
        }
    }

    #[test]
    fn parse_rationals() {
        assert_eq!(parse_rational("3/6").unwrap(), rat_frac(1, 2));
        assert_eq!(parse_rational(" 7 ").unwrap(), rat(7));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
    }

    #[test]
    fn json_shape() {
        let lat = Lattice::cube(3);
        let v = spectrum_json(&lat.stokes_spectrum(&rat(3)), &lat.semigroup(&rat(3)));
        assert_eq!(v["eigenvalues"][0]["multiplicity"], 6);
        assert_eq!(v["semigroup"][2]["decompositions"], json!([[1, 2], [2, 1]]));
        assert_eq!(v["semigroup"][1]["mu"]["num"], 2);
    }
}
