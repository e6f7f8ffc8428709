//! Closed-form solutions supported on a single line of wave vectors, their
//! helicity, the drifting non-zero-mean variant with its pressure, and a
//! pointwise residual check of the full momentum equation.

use std::sync::Arc;

use num_integer::Integer;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::expansion::{drifting_frame, fit_remainder, Expansion, FitPolicy, RateFit};
use crate::field::{rotate_mode, GevreyIndex, SpectralField};
use crate::lattice::{Lattice, Rational};
use crate::linalg::{
    cross_rc, imag_part, is_zero, mat_cvec, mat_rvec, norm_sq, rcross, rdot, real_part,
    CVec3, RVec3, C64, CZERO, I, J,
};
use crate::mean_flow::MeanFlow;
use crate::par::{map_range, Exec};
use crate::solver::{Form, Trajectory};
use crate::spoly::{SPoly, SSPoly};

/// Data on the line `{m k : m != 0}`. Only `m > 0` is stored; `-m` carries
/// the conjugate.
#[derive(Debug, Clone, PartialEq)]
pub struct VkData {
    pub direction: [i32; 3],
    pub coefficients: Vec<(i32, CVec3)>,
}

impl VkData {
    pub fn new(direction: [i32; 3], coefficients: Vec<(i32, CVec3)>) -> Result<VkData> {
        if direction == [0, 0, 0] {
            return Err(Error::InvalidConfig("direction must be non-zero".into()));
        }
        let mut out: Vec<(i32, CVec3)> = Vec::with_capacity(coefficients.len());
        for (m, c) in coefficients {
            let (m, c) = match m {
                0 => return Err(Error::InvalidConfig("multiplier m = 0 is the mean".into())),
                m if m < 0 => (-m, c.map(|x| x.conj())),
                m => (m, c),
            };
            if out.iter().any(|(n, _)| *n == m) {
                return Err(Error::InvalidConfig(format!("multiplier {m} given twice")));
            }
            out.push((m, c));
        }
        out.sort_by_key(|(m, _)| *m);
        Ok(VkData {
            direction,
            coefficients: out,
        })
    }

    /// Random coefficients orthogonal to `kcheck` for each multiplier in `ms`,
    /// rescaled so the field has `|u| = amplitude`.
    pub fn random(
        lattice: &Arc<Lattice>,
        direction: [i32; 3],
        ms: &[i32],
        seed: u64,
        amplitude: f64,
    ) -> Result<VkData> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut coefficients = Vec::with_capacity(ms.len());
        for &m in ms {
            let k = direction.map(|x| x * m);
            let i = lattice.index_of(k).ok_or(Error::ModeNotRetained(k))?;
            let mut c = CZERO;
            for x in c.iter_mut() {
                let re: f64 = StandardNormal.sample(&mut rng);
                let im: f64 = StandardNormal.sample(&mut rng);
                *x = C64::new(re, im);
            }
            coefficients.push((m, mat_cvec(&lattice.mode(i).proj, &c)));
        }
        let data = VkData::new(direction, coefficients)?;
        let norm = data.to_field(lattice)?.l2_norm();
        Ok(data.scale(amplitude / norm))
    }

    pub fn scale(&self, s: f64) -> VkData {
        VkData {
            direction: self.direction,
            coefficients: self
                .coefficients
                .iter()
                .map(|(m, c)| (*m, c.map(|x| x * s)))
                .collect(),
        }
    }

    /// Reads the zero-mean part of a field supported on one line.
    pub fn from_field(field: &SpectralField) -> Result<VkData> {
        let lat = field.lattice();
        let support = field.support();
        let Some(&first) = support.first() else {
            return Err(Error::NotColinear("field is zero".into()));
        };
        let k0 = lat.mode(first).k;
        let mut g = k0.iter().fold(0i32, |a, &b| a.gcd(&b));
        if k0.iter().find(|&&x| x != 0).is_some_and(|&x| x < 0) {
            g = -g;
        }
        let dir = k0.map(|x| x / g);
        let mut coefficients = Vec::new();
        for i in support {
            let k = lat.mode(i).k;
            let m = multiplier(&dir, &k)
                .ok_or_else(|| Error::NotColinear(format!("{k:?} is not a multiple of {dir:?}")))?;
            if m > 0 {
                coefficients.push((m, *field.coeff(i)));
            }
        }
        VkData::new(dir, coefficients)
    }

    /// Largest `|c . kcheck| / |c|` over the stored coefficients.
    pub fn divergence_defect(&self, lattice: &Lattice) -> f64 {
        self.coefficients
            .iter()
            .map(|(m, c)| {
                let kc = lattice.kcheck_of(self.direction.map(|x| x * m));
                let n = norm_sq(c).sqrt();
                if n == 0.0 {
                    0.0
                } else {
                    (c[0] * kc[0] + c[1] * kc[1] + c[2] * kc[2]).norm() / (n * rdot(&kc, &kc).sqrt())
                }
            })
            .fold(0.0, f64::max)
    }

    pub fn to_field(&self, lattice: &Arc<Lattice>) -> Result<SpectralField> {
        let defect = self.divergence_defect(lattice);
        if defect > 1e-12 {
            return Err(Error::InvalidConfig(format!(
                "coefficients are not orthogonal to their wave vectors (defect {defect:.3e})"
            )));
        }
        SpectralField::from_half(
            lattice,
            self.coefficients
                .iter()
                .map(|(m, c)| (self.direction.map(|x| x * m), *c)),
            [0.0; 3],
        )
    }

    pub fn to_json(&self) -> Value {
        json!({
            "k": self.direction,
            "modes": self.coefficients.iter().map(|(m, c)| json!({
                "m": m,
                "re": real_part(c),
                "im": imag_part(c),
            })).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(v: &Value) -> Result<VkData> {
        let bad = |what: &str| Error::Format(format!("vk data: {what}"));
        let direction: [i32; 3] = serde_json::from_value(v.get("k").cloned().ok_or_else(|| bad("missing k"))?)
            .map_err(|e| bad(&e.to_string()))?;
        let modes = v
            .get("modes")
            .and_then(Value::as_array)
            .ok_or_else(|| bad("missing modes"))?;
        let mut coefficients = Vec::with_capacity(modes.len());
        for m in modes {
            let mult = m.get("m").and_then(Value::as_i64).ok_or_else(|| bad("mode without m"))?;
            let re: RVec3 = serde_json::from_value(m.get("re").cloned().unwrap_or(json!([0.0, 0.0, 0.0])))
                .map_err(|e| bad(&e.to_string()))?;
            let im: RVec3 = serde_json::from_value(m.get("im").cloned().unwrap_or(json!([0.0, 0.0, 0.0])))
                .map_err(|e| bad(&e.to_string()))?;
            coefficients.push((mult as i32, crate::linalg::from_parts(&re, &im)));
        }
        VkData::new(direction, coefficients)
    }
}

fn multiplier(dir: &[i32; 3], k: &[i32; 3]) -> Option<i32> {
    let j = (0..3).find(|&j| dir[j] != 0)?;
    if k[j] % dir[j] != 0 {
        return None;
    }
    let m = k[j] / dir[j];
    (dir.map(|x| x * m) == *k).then_some(m)
}

/// `u(t) = e^{-tA} e^{-Omega t S} u0`, mode-wise
/// `e^{-lambda t} E_k(-ktil_3 Omega t) u0_k`.
pub fn closed_form_u(
    data: &VkData,
    lattice: &Arc<Lattice>,
    omega: f64,
    t: f64,
) -> Result<SpectralField> {
    let u0 = data.to_field(lattice)?;
    let mut out = SpectralField::zeros(lattice);
    for i in u0.support() {
        let m = lattice.mode(i);
        out.coeffs_mut()[i] = rotate_mode(&m.ktil, -m.ktil3_f64() * omega * t, u0.coeff(i))
            .map(|x| x * (-m.lambda_f64 * t).exp());
    }
    Ok(out)
}

/// The same solution as `sum e^{-lambda t} Q_lambda(t)` with S-polynomial
/// `Q_lambda = e^{-Omega t S} R_lambda u0`.
pub fn closed_form_series(
    data: &VkData,
    lattice: &Arc<Lattice>,
    omega: f64,
) -> Result<Vec<(Rational, SPoly)>> {
    let u0 = data.to_field(lattice)?;
    let mut out = Vec::new();
    for shell in lattice.shells() {
        let r = u0.eigenprojection(&shell.value)?;
        if r.max_coeff() > 0.0 {
            out.push((shell.value.clone(), SPoly::constant(&r).apply_exp_s(-omega)));
        }
    }
    Ok(out)
}

/// `H(t) = V sum_{m != 0} e^{-2 m^2 |kcheck|^2 t} 2 m |kcheck| (Re u0 x Im u0) . ktil`.
/// Independent of the rotation rate.
pub fn helicity_series(data: &VkData, lattice: &Lattice, t: f64) -> f64 {
    let mut h = 0.0;
    for (m, c) in &data.coefficients {
        let kc = lattice.kcheck_of(data.direction.map(|x| x * m));
        let kabs = rdot(&kc, &kc).sqrt();
        let lambda = kabs * kabs;
        let ktil = kc.map(|x| x / kabs);
        let twist = rdot(&rcross(&real_part(c), &imag_part(c)), &ktil);
        // the -m partner contributes the same amount
        h += 2.0 * (-2.0 * lambda * t).exp() * 2.0 * kabs * twist;
    }
    h * lattice.volume()
}

/// Uniform grid with `n` points per axis over one period cell.
pub fn grid_point(lattice: &Lattice, n: usize, idx: usize) -> RVec3 {
    let p = lattice.periods();
    let (i, j, k) = (idx / (n * n), (idx / n) % n, idx % n);
    [
        p[0] * i as f64 / n as f64,
        p[1] * j as f64 / n as f64,
        p[2] * k as f64 / n as f64,
    ]
}

/// Values and first and second derivatives of a field at a point, by direct
/// summation over its support.
#[derive(Debug, Clone)]
struct Pointwise {
    mean: RVec3,
    kcheck: Vec<RVec3>,
    coef: Vec<CVec3>,
}

#[derive(Debug, Clone, Copy)]
struct Jet {
    u: RVec3,
    /// `grad[j][i] = d_j u_i`
    grad: [RVec3; 3],
    lap: RVec3,
}

impl Pointwise {
    fn new(field: &SpectralField) -> Pointwise {
        let lat = field.lattice();
        let idx = field.support();
        Pointwise {
            mean: field.mean(),
            kcheck: idx.iter().map(|&i| lat.mode(i).kcheck).collect(),
            coef: idx.iter().map(|&i| *field.coeff(i)).collect(),
        }
    }

    fn jet(&self, x: &RVec3) -> Jet {
        let mut jet = Jet {
            u: self.mean,
            grad: [[0.0; 3]; 3],
            lap: [0.0; 3],
        };
        for (k, c) in self.kcheck.iter().zip(&self.coef) {
            let e = C64::new(0.0, rdot(k, x)).exp();
            let k2 = rdot(k, k);
            for i in 0..3 {
                let v = c[i] * e;
                jet.u[i] += v.re;
                jet.lap[i] -= k2 * v.re;
                for j in 0..3 {
                    jet.grad[j][i] += (I * k[j] * v).re;
                }
            }
        }
        jet
    }

    fn value(&self, x: &RVec3) -> RVec3 {
        let mut u = self.mean;
        for (k, c) in self.kcheck.iter().zip(&self.coef) {
            let e = C64::new(0.0, rdot(k, x)).exp();
            for i in 0..3 {
                u[i] += (c[i] * e).re;
            }
        }
        u
    }
}

/// `int (curl u) . u dx` by the rectangle rule on an `n^3` grid, with the
/// curl taken pointwise from analytic derivatives of the mode sum. Exact up
/// to roundoff when `n` exceeds twice the largest wavenumber per axis.
pub fn physical_helicity(field: &SpectralField, n: usize, exec: Exec) -> f64 {
    let lat = field.lattice();
    let pw = Pointwise::new(field);
    let cell = lat.volume() / (n * n * n) as f64;
    let vals = map_range(exec.for_work(n * n * n * pw.coef.len().max(1)), n * n * n, |idx| {
        let jet = pw.jet(&grid_point(lat, n, idx));
        let g = &jet.grad;
        let curl = [
            g[1][2] - g[2][1],
            g[2][0] - g[0][2],
            g[0][1] - g[1][0],
        ];
        rdot(&curl, &jet.u)
    });
    vals.iter().sum::<f64>() * cell
}

/// A velocity and pressure pair depending on time, for residual checks.
pub trait FlowEvaluator: Sync {
    fn lattice(&self) -> &Arc<Lattice>;

    /// Velocity including the spatial mean.
    fn velocity(&self, t: f64) -> SpectralField;

    /// Pressure Fourier coefficients, indexed like the lattice modes. The
    /// spatially constant part is irrelevant and omitted.
    fn pressure(&self, t: f64) -> Vec<C64>;

    /// Time derivative of the velocity; sixth-order central difference
    /// with `h = 1e-3` unless overridden.
    fn velocity_rate(&self, t: f64) -> SpectralField {
        const H: f64 = 1e-3;
        const W: [(f64, f64); 6] = [
            (-3.0, -1.0),
            (-2.0, 9.0),
            (-1.0, -45.0),
            (1.0, 45.0),
            (2.0, -9.0),
            (3.0, 1.0),
        ];
        let mut out = SpectralField::zeros(self.lattice());
        let mut mean = [0.0; 3];
        for (s, w) in W {
            let f = self.velocity(t + s * H);
            out.axpy_assign(w / (60.0 * H), &f);
            for (m, x) in mean.iter_mut().zip(f.mean()) {
                *m += w / (60.0 * H) * x;
            }
        }
        out.with_mean(mean)
    }
}

/// `U(t) + sum e^{-lambda t} e^{-i kcheck . V(t)} E_k(-ktil_3 Omega t) u0_k`
/// with the pressure balancing the Coriolis term. With `U0 = 0` this is
/// `closed_form_u` plus its pressure.
#[derive(Debug, Clone)]
pub struct DriftingVkSolution {
    lattice: Arc<Lattice>,
    omega: f64,
    flow: MeanFlow,
    u0: SpectralField,
    shells: Vec<(f64, SSPoly)>,
}

impl DriftingVkSolution {
    pub fn new(
        data: &VkData,
        lattice: &Arc<Lattice>,
        mean: RVec3,
        omega: f64,
    ) -> Result<DriftingVkSolution> {
        let flow = MeanFlow::new(mean, omega);
        let shells = closed_form_series(data, lattice, omega)?
            .into_iter()
            .map(|(lambda, q)| (crate::lattice::rat_to_f64(&lambda), SSPoly::phase_shift(&q, &flow)))
            .collect();
        Ok(DriftingVkSolution {
            lattice: lattice.clone(),
            omega,
            flow,
            u0: data.to_field(lattice)?,
            shells,
        })
    }

    pub fn flow(&self) -> &MeanFlow {
        &self.flow
    }

    /// Velocity minus its mean as `sum e^{-lambda t} SS_lambda(t)`.
    pub fn shells(&self) -> &[(f64, SSPoly)] {
        &self.shells
    }
}

impl FlowEvaluator for DriftingVkSolution {
    fn lattice(&self) -> &Arc<Lattice> {
        &self.lattice
    }

    fn velocity(&self, t: f64) -> SpectralField {
        let mut out = SpectralField::zeros(&self.lattice);
        for (lambda, ss) in &self.shells {
            out.axpy_assign((-lambda * t).exp(), &ss.evaluate(t));
        }
        out.with_mean(self.flow.velocity(t))
    }

    fn velocity_rate(&self, t: f64) -> SpectralField {
        let mut out = SpectralField::zeros(&self.lattice);
        for (lambda, ss) in &self.shells {
            let w = (-lambda * t).exp();
            out.axpy_assign(w, &ss.evaluate_derivative(t));
            out.axpy_assign(-lambda * w, &ss.evaluate(t));
        }
        // U' = -Omega J U
        let ju = mat_rvec(&J, &self.flow.velocity(t));
        out.with_mean(ju.map(|x| -self.omega * x))
    }

    /// `-i Omega / |kcheck| [cos(theta) J ktil + sin(theta) e3] . u0_k`
    /// times `e^{-lambda t} e^{-i kcheck . V(t)}`, `theta = ktil_3 Omega t`.
    fn pressure(&self, t: f64) -> Vec<C64> {
        let drift = self.flow.drift(t);
        let mut out = vec![C64::new(0.0, 0.0); self.lattice.len()];
        for i in self.u0.support() {
            let m = self.lattice.mode(i);
            let theta = m.ktil3_f64() * self.omega * t;
            let (s, c) = theta.sin_cos();
            let jk = mat_rvec(&J, &m.ktil);
            let dir = [c * jk[0], c * jk[1], c * jk[2] + s];
            let u = self.u0.coeff(i);
            let dot = u[0] * dir[0] + u[1] * dir[1] + u[2] * dir[2];
            let phase = C64::new(-m.lambda_f64 * t, -rdot(&m.kcheck, &drift)).exp();
            out[i] = -I * (self.omega / m.kabs) * dot * phase;
        }
        out
    }
}

/// Wraps an evaluator and drops its pressure.
pub struct WithoutPressure<'a, E: FlowEvaluator>(pub &'a E);

impl<E: FlowEvaluator> FlowEvaluator for WithoutPressure<'_, E> {
    fn lattice(&self) -> &Arc<Lattice> {
        self.0.lattice()
    }
    fn velocity(&self, t: f64) -> SpectralField {
        self.0.velocity(t)
    }
    fn velocity_rate(&self, t: f64) -> SpectralField {
        self.0.velocity_rate(t)
    }
    fn pressure(&self, _t: f64) -> Vec<C64> {
        vec![C64::new(0.0, 0.0); self.0.lattice().len()]
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PdeResidual {
    /// Largest pointwise momentum residual over grid and times.
    pub momentum: f64,
    /// Largest pointwise divergence.
    pub divergence: f64,
    /// Largest pointwise `|du/dt| + |Delta u| + |Omega e3 x u|`, for scale.
    pub scale: f64,
    pub per_time: Vec<(f64, f64)>,
}

/// Pointwise `du/dt - Delta u + (u . grad) u + grad p + Omega e3 x u` and
/// `div u` on an `n^3` grid. Space derivatives are exact for the mode sums;
/// the nonlinear term is formed pointwise.
pub fn pde_residual<E: FlowEvaluator>(
    eval: &E,
    omega: f64,
    times: &[f64],
    n: usize,
    exec: Exec,
) -> PdeResidual {
    let lat = eval.lattice();
    let mut out = PdeResidual {
        momentum: 0.0,
        divergence: 0.0,
        scale: 0.0,
        per_time: Vec::with_capacity(times.len()),
    };
    for &t in times {
        let u = Pointwise::new(&eval.velocity(t));
        let ut = Pointwise::new(&eval.velocity_rate(t));
        let p = eval.pressure(t);
        let grad_p = Pointwise {
            mean: [0.0; 3],
            kcheck: lat.modes().iter().zip(&p).filter(|(_, c)| c.norm() > 0.0).map(|(m, _)| m.kcheck).collect(),
            coef: lat
                .modes()
                .iter()
                .zip(&p)
                .filter(|(_, c)| c.norm() > 0.0)
                .map(|(m, c)| m.kcheck.map(|k| I * k * c))
                .collect(),
        };
        let work = n * n * n * (u.coef.len() + 1);
        let pts = map_range(exec.for_work(work), n * n * n, |idx| {
            let x = grid_point(lat, n, idx);
            let jet = u.jet(&x);
            let du = ut.value(&x);
            let gp = grad_p.value(&x);
            let cor = rcross(&[0.0, 0.0, omega], &jet.u);
            let mut r = [0.0; 3];
            for i in 0..3 {
                let adv: f64 = (0..3).map(|j| jet.u[j] * jet.grad[j][i]).sum();
                r[i] = du[i] - jet.lap[i] + adv + gp[i] + cor[i];
            }
            let div = jet.grad[0][0] + jet.grad[1][1] + jet.grad[2][2];
            let scale = rdot(&du, &du).sqrt() + rdot(&jet.lap, &jet.lap).sqrt() + rdot(&cor, &cor).sqrt();
            (rdot(&r, &r).sqrt(), div.abs(), scale)
        });
        let worst = pts.iter().map(|p| p.0).fold(0.0, f64::max);
        out.momentum = out.momentum.max(worst);
        out.divergence = pts.iter().map(|p| p.1).fold(out.divergence, f64::max);
        out.scale = pts.iter().map(|p| p.2).fold(out.scale, f64::max);
        out.per_time.push((t, worst));
    }
    out
}

/// Residual of `u' + A u + Omega S u = 0` for the closed form, using its
/// exact derivative, relative to `|A u|`.
pub fn linear_equation_residual(data: &VkData, lattice: &Arc<Lattice>, omega: f64, t: f64) -> Result<f64> {
    let sol = DriftingVkSolution::new(data, lattice, [0.0; 3], omega)?;
    let u = sol.velocity(t);
    let au = u.apply_a_power(1.0);
    let r = sol.velocity_rate(t).add(&au).add(&u.apply_s().scale(omega));
    Ok(r.max_coeff() / au.max_coeff().max(f64::MIN_POSITIVE))
}

#[derive(Debug, Clone)]
pub struct SsCheck {
    pub expansion: Expansion,
    pub rate: RateFit,
}

/// Builds the expansion of the shifted zero-mean problem from a u-form
/// trajectory with non-zero mean, moves its terms back to the lab frame as
/// SS-polynomials and fits the decay of `u - U - sum SS_n e^{-mu_n t}`.
pub fn verify_ss_expansion(
    traj: &Trajectory,
    order: usize,
    index: GevreyIndex,
    policy: &FitPolicy,
    exec: Exec,
) -> Result<SsCheck> {
    let flow = traj
        .mean_flow
        .unwrap_or_else(|| MeanFlow::new([0.0; 3], traj.omega));
    let lab = traj.transform(Form::U);
    let expansion = Expansion::build(&drifting_frame(traj), order, policy, exec)?;
    let ss: Vec<(f64, SSPoly)> = expansion
        .to_u_expansion(0.0)
        .iter()
        .zip(expansion.mus())
        .map(|(q, mu)| (crate::lattice::rat_to_f64(&mu), SSPoly::phase_shift(q, &flow)))
        .collect();
    let rate = fit_remainder(&lab, index, policy, exec, |i| {
        let t = lab.times[i];
        let mut r = lab.states[i].clone().with_mean([0.0; 3]);
        for (mu, s) in &ss {
            r.axpy_assign(-(-mu * t).exp(), &s.evaluate(t));
        }
        r
    })?;
    Ok(SsCheck { expansion, rate })
}

/// Largest `|Re c x Im c|` over the support; zero means every coefficient
/// is a real vector times a phase.
pub fn twist(field: &SpectralField) -> f64 {
    field
        .coeffs()
        .iter()
        .filter(|c| !is_zero(c))
        .map(|c| {
            let x = rcross(&real_part(c), &imag_part(c));
            rdot(&x, &x).sqrt()
        })
        .fold(0.0, f64::max)
}

#[allow(dead_code)]
fn curl(field: &SpectralField) -> SpectralField {
    let lat = field.lattice();
    let coeffs = field
        .coeffs()
        .iter()
        .zip(lat.modes())
        .map(|(c, m)| cross_rc(&m.kcheck, c).map(|x| I * x))
        .collect();
    SpectralField::from_coeffs(lat, coeffs, [0.0; 3])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::rat;
    use crate::linalg::from_parts;
    use crate::solver::{integrate, SolverConfig};
    use std::f64::consts::PI;

    fn c3(a: [f64; 3]) -> CVec3 {
        a.map(|x| C64::new(x, 0.0))
    }

    #[test]
    fn closed_form_at_zero_and_without_rotation() {
        let lat = Lattice::cube(12);
        let data = VkData::random(&lat, [1, 1, 1], &[1, 2], 4, 1.0).unwrap();
        let u0 = data.to_field(&lat).unwrap();
        assert!(closed_form_u(&data, &lat, 7.0, 0.0).unwrap().sub(&u0).max_coeff() == 0.0);
        let heat = closed_form_u(&data, &lat, 0.0, 0.4).unwrap();
        assert!(heat.sub(&u0.apply_heat(0.4)).max_coeff() < 1e-15);
    }

    #[test]
    fn closed_form_matches_group_action_and_series() {
        let lat = Lattice::cube(8);
        let data = VkData::random(&lat, [1, 0, 1], &[1, 2], 5, 1.0).unwrap();
        let u0 = data.to_field(&lat).unwrap();
        let series = closed_form_series(&data, &lat, 3.0).unwrap();
        for t in [0.2, 1.1] {
            let u = closed_form_u(&data, &lat, 3.0, t).unwrap();
            let g = u0.apply_exp_s(-3.0 * t).apply_heat(t);
            assert!(u.sub(&g).max_coeff() < 1e-14);
            let mut s = SpectralField::zeros(&lat);
            for (l, q) in &series {
                s.axpy_assign((-crate::lattice::rat_to_f64(l) * t).exp(), &q.evaluate(t));
            }
            assert!(u.sub(&s).max_coeff() < 1e-14);
            assert!(linear_equation_residual(&data, &lat, 3.0, t).unwrap() < 1e-10);
        }
    }

    #[test]
    fn colinearity_is_enforced() {
        let lat = Lattice::cube(8);
        let u = SpectralField::from_half(
            &lat,
            [([1, 0, 0], c3([0.0, 1.0, 0.0])), ([0, 1, 0], c3([1.0, 0.0, 0.0]))],
            [0.0; 3],
        )
        .unwrap();
        assert!(matches!(VkData::from_field(&u), Err(Error::NotColinear(_))));
        let data = VkData::random(&lat, [0, 1, 1], &[1, 2], 1, 1.0).unwrap();
        let back = VkData::from_field(&data.to_field(&lat).unwrap()).unwrap();
        assert_eq!(back.direction, [0, 1, 1]);
        assert_eq!(back.coefficients.len(), 2);
        let bad = VkData::new([0, 0, 1], vec![(1, c3([0.0, 0.0, 1.0]))]).unwrap();
        assert!(bad.to_field(&lat).is_err());
    }

    #[test]
    fn json_round_trip() {
        let lat = Lattice::cube(8);
        let data = VkData::random(&lat, [1, 1, 0], &[1, 2], 9, 1.0).unwrap();
        let back = VkData::from_json(&data.to_json()).unwrap();
        assert_eq!(back, data);
    }

    #[test]
    fn circular_mode_helicity() {
        let lat = Lattice::cube(2);
        let s = 1.0 / 2f64.sqrt();
        let data = VkData::new([0, 0, 1], vec![(1, from_parts(&[s, 0.0, 0.0], &[0.0, s, 0.0]))]).unwrap();
        let u = data.to_field(&lat).unwrap();
        // Re x Im = e3 / 2, both partners count
        let expect = (2.0 * PI).powi(3) * 2.0 * 2.0 * 0.5;
        assert!((u.helicity() - expect).abs() < 1e-12 * expect);
        assert!((helicity_series(&data, &lat, 0.0) - expect).abs() < 1e-12 * expect);
        let q = physical_helicity(&u, 8, Exec::Sequential);
        assert!((q - expect).abs() < 1e-10 * expect);
        let t = 0.3;
        for omega in [0.0, 1.0, 10.0] {
            let h = closed_form_u(&data, &lat, omega, t).unwrap().helicity();
            assert!((h - expect * (-2.0 * t).exp()).abs() < 1e-12 * expect);
        }
    }

    #[test]
    fn real_coefficients_have_no_helicity() {
        let lat = Lattice::cube(9);
        let data = VkData::new([1, 1, 0], vec![(1, c3([1.0, -1.0, 0.4])), (2, c3([0.3, -0.3, 1.0]))]).unwrap();
        assert_eq!(twist(&data.to_field(&lat).unwrap()), 0.0);
        for t in [0.0, 0.5, 2.0] {
            let u = closed_form_u(&data, &lat, 5.0, t).unwrap();
            assert!(u.helicity().abs() < 1e-14);
        }
    }

    #[test]
    fn curl_matches_pointwise_derivative() {
        let lat = Lattice::cube(3);
        let u = SpectralField::random_gevrey(&lat, 2, 0.0, 1.0);
        let w = curl(&u);
        let pw = Pointwise::new(&u);
        for x in [[0.3, 1.2, 5.0], [2.0, 0.1, 0.7]] {
            let g = pw.jet(&x).grad;
            let c = [g[1][2] - g[2][1], g[2][0] - g[0][2], g[0][1] - g[1][0]];
            let v = w.value_at(&x);
            for i in 0..3 {
                assert!((c[i] - v[i]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn pde_residual_of_rotating_solutions() {
        let lat = Lattice::cube(8);
        let data = VkData::random(&lat, [1, 0, 1], &[1, 2], 11, 1.0).unwrap();
        for mean in [[0.0; 3], [0.4, -0.7, 0.2]] {
            let sol = DriftingVkSolution::new(&data, &lat, mean, 4.0).unwrap();
            let r = pde_residual(&sol, 4.0, &[0.0, 0.3, 1.0], 12, Exec::Parallel);
            assert!(r.momentum < 1e-10 * r.scale, "{r:?}");
            assert!(r.divergence < 1e-12);
            let bad = pde_residual(&WithoutPressure(&sol), 4.0, &[0.3], 12, Exec::Parallel);
            assert!(bad.momentum > 1e-2, "{bad:?}");
        }
    }

    #[test]
    fn finite_difference_rate_matches_exact() {
        struct Fd<'a>(&'a DriftingVkSolution);
        impl FlowEvaluator for Fd<'_> {
            fn lattice(&self) -> &Arc<Lattice> {
                self.0.lattice()
            }
            fn velocity(&self, t: f64) -> SpectralField {
                self.0.velocity(t)
            }
            fn pressure(&self, t: f64) -> Vec<C64> {
                self.0.pressure(t)
            }
        }
        let lat = Lattice::cube(5);
        let data = VkData::random(&lat, [1, 1, 1], &[1], 3, 1.0).unwrap();
        let sol = DriftingVkSolution::new(&data, &lat, [0.3, 0.2, -0.1], 2.0).unwrap();
        let d = Fd(&sol).velocity_rate(0.7).sub(&sol.velocity_rate(0.7));
        assert!(d.max_coeff() < 1e-9, "{}", d.max_coeff());
    }

    #[test]
    fn ss_check_on_drifting_closed_form_hits_floor() {
        let lat = Lattice::cube(3);
        let data = VkData::random(&lat, [1, 0, 1], &[1], 6, 0.1).unwrap();
        let u0 = data.to_field(&lat).unwrap().with_mean([0.2, 0.1, 0.3]);
        let traj = integrate(&u0, &SolverConfig::new(2.0, 4.0, 0.01, Form::U)).unwrap();
        let c = verify_ss_expansion(&traj, 2, GevreyIndex::L2, &FitPolicy::default(), Exec::Sequential).unwrap();
        assert_eq!(c.expansion.orders()[1].mu, rat(2));
        assert!(c.rate.floor_limited, "{:?}", c.rate);
    }
}
