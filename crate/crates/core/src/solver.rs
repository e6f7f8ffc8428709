//! Galerkin time integration of
//!
//! * v-form: `v' + A v + B_Omega(t, v, v) = 0`
//! * u-form: `u' + A u + B(u, u) + Omega S u = 0`
//!
//! by integrating-factor (Lawson) RK4. The linear part is applied exactly per
//! mode: `e^{-s A}` in v-form, `e^{-s A} e^{-s Omega S}` in u-form, so linear
//! solutions are reproduced to roundoff. A non-zero mean is handled in the
//! u-form by integrating the zero-mean field of the drifting frame and
//! shifting back when recording.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{rotate_mode, GevreyIndex, SpectralField};
use crate::lattice::Lattice;
use crate::linalg::{scale_r, CVec3};
use crate::mean_flow::MeanFlow;
use crate::par::Exec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Form {
    V,
    U,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolverConfig {
    pub omega: f64,
    pub t_end: f64,
    #[serde(default = "default_dt")]
    pub dt: f64,
    /// Steps between recorded samples; `None` aims at about 1000 samples.
    #[serde(default)]
    pub record_stride: Option<usize>,
    #[serde(default = "default_form")]
    pub form: Form,
    /// Extra Gevrey norms recorded per sample.
    #[serde(default)]
    pub gevrey: Vec<GevreyIndex>,
    #[serde(skip)]
    pub exec: Exec,
}

fn default_dt() -> f64 {
    1e-3
}

fn default_form() -> Form {
    Form::V
}

impl SolverConfig {
    pub fn new(omega: f64, t_end: f64, dt: f64, form: Form) -> SolverConfig {
        SolverConfig {
            omega,
            t_end,
            dt,
            record_stride: None,
            form,
            gevrey: Vec::new(),
            exec: Exec::default(),
        }
    }

    pub fn with_stride(mut self, stride: usize) -> SolverConfig {
        self.record_stride = Some(stride);
        self
    }

    pub fn with_gevrey(mut self, gevrey: Vec<GevreyIndex>) -> SolverConfig {
        self.gevrey = gevrey;
        self
    }

    pub fn with_exec(mut self, exec: Exec) -> SolverConfig {
        self.exec = exec;
        self
    }

    pub fn steps(&self) -> usize {
        (self.t_end / self.dt).round() as usize
    }

    pub fn stride(&self) -> usize {
        self.record_stride
            .unwrap_or_else(|| (self.steps() / 1000).max(1))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return bad(format!("dt must be positive, got {}", self.dt));
        }
        if !(self.t_end.is_finite() && self.t_end >= 0.0) {
            return bad(format!("t_end must be nonnegative, got {}", self.t_end));
        }
        if !self.omega.is_finite() {
            return bad("omega must be finite".into());
        }
        if self.record_stride == Some(0) {
            return bad("record_stride must be at least 1".into());
        }
        let n = self.t_end / self.dt;
        if (n - n.round()).abs() > 1e-9 * n.max(1.0) {
            return bad(format!("t_end = {} is not a multiple of dt = {}", self.t_end, self.dt));
        }
        for g in &self.gevrey {
            GevreyIndex::new(g.alpha, g.sigma)?;
        }
        Ok(())
    }
}

/// Norms recorded with each sample (zero-mean part).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub l2: f64,
    pub h1: f64,
    pub gevrey: Vec<f64>,
}

impl Diagnostics {
    pub fn of(field: &SpectralField, gevrey: &[GevreyIndex]) -> Diagnostics {
        Diagnostics {
            l2: field.gevrey_norm(GevreyIndex::L2),
            h1: field.h1_norm(),
            gevrey: gevrey.iter().map(|g| field.gevrey_norm(*g)).collect(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub lattice: Arc<Lattice>,
    pub omega: f64,
    pub form: Form,
    pub dt: f64,
    pub gevrey: Vec<GevreyIndex>,
    pub times: Vec<f64>,
    pub states: Vec<SpectralField>,
    pub diagnostics: Vec<Diagnostics>,
    /// Present when the run carried a non-zero mean.
    pub mean_flow: Option<MeanFlow>,
}

impl Trajectory {
    pub fn empty(lattice: &Arc<Lattice>, omega: f64, form: Form, dt: f64) -> Trajectory {
        Trajectory {
            lattice: lattice.clone(),
            omega,
            form,
            dt,
            gevrey: Vec::new(),
            times: Vec::new(),
            states: Vec::new(),
            diagnostics: Vec::new(),
            mean_flow: None,
        }
    }

    pub fn push(&mut self, t: f64, state: SpectralField) {
        self.diagnostics.push(Diagnostics::of(&state, &self.gevrey));
        self.times.push(t);
        self.states.push(state);
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> Option<(f64, &SpectralField)> {
        self.times.last().map(|t| (*t, self.states.last().unwrap()))
    }

    /// Index of the first sample with time `>= t - tol`.
    pub fn index_at(&self, t: f64) -> usize {
        let tol = 1e-9 * self.dt;
        self.times.partition_point(|&s| s < t - tol)
    }

    /// Sample spacing, assuming uniform sampling.
    pub fn spacing(&self) -> f64 {
        if self.times.len() < 2 {
            self.dt
        } else {
            self.times[1] - self.times[0]
        }
    }

    /// Sample-wise `e^{+-Omega t S}`; u to v uses the plus sign.
    pub fn transform(&self, to: Form) -> Trajectory {
        if to == self.form {
            return self.clone();
        }
        let sign = if to == Form::V { 1.0 } else { -1.0 };
        let mut out = Trajectory {
            form: to,
            times: Vec::with_capacity(self.len()),
            states: Vec::with_capacity(self.len()),
            diagnostics: Vec::with_capacity(self.len()),
            ..self.clone()
        };
        for (t, s) in self.times.iter().zip(&self.states) {
            out.push(*t, s.apply_exp_s(sign * self.omega * t));
        }
        out
    }
}

/// `e^{s L}` for the linear operator of the chosen form.
fn linear_flow(form: Form, omega: f64, s: f64, x: &SpectralField) -> SpectralField {
    let lat = x.lattice();
    let coeffs: Vec<CVec3> = x
        .coeffs()
        .iter()
        .zip(lat.modes())
        .map(|(c, m)| {
            let d = scale_r(c, (-s * m.lambda_f64).exp());
            match form {
                Form::V => d,
                Form::U => rotate_mode(&m.ktil, -omega * m.ktil[2] * s, &d),
            }
        })
        .collect();
    SpectralField::from_coeffs(lat, coeffs, x.mean())
}

fn nonlinear(form: Form, omega: f64, t: f64, x: &SpectralField, exec: Exec) -> Result<SpectralField> {
    let b = match form {
        Form::V => x.bilinear_b_omega(x, t, omega, exec)?,
        Form::U => x.bilinear_b(x, exec)?,
    };
    Ok(b.scale(-1.0))
}

/// One Lawson RK4 step of size `h` from `(t, x)`.
fn lawson_step(
    form: Form,
    omega: f64,
    t: f64,
    h: f64,
    x: &SpectralField,
    exec: Exec,
) -> Result<SpectralField> {
    let half = |y: &SpectralField| linear_flow(form, omega, 0.5 * h, y);
    let k1 = nonlinear(form, omega, t, x, exec)?;
    let ex_half = half(x);
    let a = half(&x.axpy(0.5 * h, &k1));
    let k2 = nonlinear(form, omega, t + 0.5 * h, &a, exec)?;
    let b = ex_half.axpy(0.5 * h, &k2);
    let k3 = nonlinear(form, omega, t + 0.5 * h, &b, exec)?;
    let ex_full = half(&ex_half);
    let c = ex_full.axpy(h, &half(&k3));
    let k4 = nonlinear(form, omega, t + h, &c, exec)?;
    let mut out = half(&half(&x.axpy(h / 6.0, &k1)));
    out.axpy_assign(h / 3.0, &half(&k2.add(&k3)));
    out.axpy_assign(h / 6.0, &k4);
    Ok(out)
}

fn is_finite_field(x: &SpectralField) -> bool {
    let m = x.max_coeff();
    m.is_finite() && m < 1e150
}

/// Integrates from `t = 0`.
pub fn integrate(x0: &SpectralField, cfg: &SolverConfig) -> Result<Trajectory> {
    cfg.validate()?;
    let lat = x0.lattice().clone();
    let has_mean = x0.mean() != [0.0; 3];
    if has_mean && cfg.form == Form::V {
        return Err(Error::InvalidConfig(
            "a non-zero mean is only supported in the u-form".into(),
        ));
    }
    let flow = has_mean.then(|| MeanFlow::new(x0.mean(), cfg.omega));
    let record = |t: f64, x: &SpectralField| match &flow {
        Some(f) => f.galilean_unshift(x, t),
        None => x.clone(),
    };
    let mut traj = Trajectory::empty(&lat, cfg.omega, cfg.form, cfg.dt);
    traj.gevrey = cfg.gevrey.clone();
    traj.mean_flow = flow;

    let mut x = x0.clone().with_mean([0.0; 3]);
    let steps = cfg.steps();
    let stride = cfg.stride();
    traj.push(0.0, record(0.0, &x));
    let mut t = 0.0;
    for n in 0..steps {
        let next = lawson_step(cfg.form, cfg.omega, t, cfg.dt, &x, cfg.exec)?;
        if !is_finite_field(&next) {
            return Err(Error::NonFinite { last_valid_time: t });
        }
        x = next;
        t = (n + 1) as f64 * cfg.dt;
        if (n + 1) % stride == 0 || n + 1 == steps {
            traj.push(t, record(t, &x));
        }
    }
    Ok(traj)
}

/// Energy balance of a trajectory: `1/2 |v|^2`, `||v||^2` and the residual
/// of `d/dt 1/2 |v|^2 + ||v||^2 = 0` with a five-point central difference.
#[derive(Debug, Clone, Serialize)]
pub struct EnergyReport {
    pub times: Vec<f64>,
    pub half_energy: Vec<f64>,
    pub dissipation: Vec<f64>,
    /// `None` at the two samples next to each end.
    pub residual: Vec<Option<f64>>,
}

impl EnergyReport {
    pub fn max_residual(&self) -> f64 {
        self.residual.iter().flatten().fold(0.0, |m, r| m.max(r.abs()))
    }
}

pub fn energy_report(traj: &Trajectory) -> EnergyReport {
    let half_energy: Vec<f64> = traj.diagnostics.iter().map(|d| 0.5 * d.l2 * d.l2).collect();
    let dissipation: Vec<f64> = traj.diagnostics.iter().map(|d| d.h1 * d.h1).collect();
    let h = traj.spacing();
    let n = half_energy.len();
    let residual = (0..n)
        .map(|i| {
            (i >= 2 && i + 2 < n).then(|| {
                let e = &half_energy;
                let de = (-e[i + 2] + 8.0 * e[i + 1] - 8.0 * e[i - 1] + e[i - 2]) / (12.0 * h);
                de + dissipation[i]
            })
        })
        .collect();
    EnergyReport {
        times: traj.times.clone(),
        half_energy,
        dissipation,
        residual,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::C64;

    fn c3(a: [f64; 3]) -> CVec3 {
        a.map(|x| C64::new(x, 0.0))
    }

    #[test]
    fn zero_data_stays_zero() {
        let lat = Lattice::cube(3);
        let cfg = SolverConfig::new(2.0, 0.1, 0.01, Form::V);
        let tr = integrate(&SpectralField::zeros(&lat), &cfg).unwrap();
        assert!(tr.states.iter().all(|s| s.max_coeff() == 0.0));
        assert_eq!(tr.times.len(), 11);
        assert_eq!(tr.times[10], 0.1);
    }

    #[test]
    fn colinear_data_decays_linearly() {
        let lat = Lattice::cube(8);
        let u0 = SpectralField::from_half(
            &lat,
            [([1, 0, 1], c3([1.0, 0.5, -1.0])), ([2, 0, 2], c3([0.0, 0.3, 0.0]))],
            [0.0; 3],
        )
        .unwrap();
        let omega = 3.0;
        for form in [Form::V, Form::U] {
            let tr = integrate(&u0, &SolverConfig::new(omega, 0.5, 0.01, form)).unwrap();
            let (t, last) = tr.last().unwrap();
            let mut expect = u0.apply_heat(t);
            if form == Form::U {
                expect = expect.apply_exp_s(-omega * t);
            }
            assert!(last.sub(&expect).max_coeff() < 1e-14);
        }
    }

    #[test]
    fn forms_agree_after_transformation() {
        let lat = Lattice::cube(3);
        let u0 = SpectralField::random_gevrey(&lat, 1, 0.0, 2.0);
        let omega = 4.0;
        let v = integrate(&u0, &SolverConfig::new(omega, 0.5, 0.005, Form::V)).unwrap();
        let u = integrate(&u0, &SolverConfig::new(omega, 0.5, 0.005, Form::U)).unwrap();
        let uv = u.transform(Form::V);
        let diff = uv.states.last().unwrap().sub(v.states.last().unwrap()).l2_norm();
        let fine = integrate(&u0, &SolverConfig::new(omega, 0.5, 0.0025, Form::V)).unwrap();
        let scheme = fine.states.last().unwrap().sub(v.states.last().unwrap()).l2_norm();
        assert!(diff <= 10.0 * scheme.max(1e-14), "{diff} vs {scheme}");
        let back = uv.transform(Form::U);
        for (a, b) in back.states.iter().zip(&u.states) {
            assert!(a.sub(b).max_coeff() < 1e-13);
        }
    }

    #[test]
    fn fourth_order_self_convergence() {
        let lat = Lattice::cube(3);
        let u0 = SpectralField::random_gevrey(&lat, 2, 0.0, 3.0);
        let run = |dt: f64| {
            integrate(&u0, &SolverConfig::new(2.0, 0.4, dt, Form::V))
                .unwrap()
                .states
                .last()
                .unwrap()
                .clone()
        };
        let (a, b, c) = (run(0.04), run(0.02), run(0.01));
        let ratio = a.sub(&b).l2_norm() / b.sub(&c).l2_norm();
        assert!((12.0..20.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn energy_decreases() {
        let lat = Lattice::cube(3);
        let u0 = SpectralField::random_gevrey(&lat, 3, 0.0, 1.0);
        let tr = integrate(&u0, &SolverConfig::new(1.0, 1.0, 0.01, Form::V)).unwrap();
        assert!(tr.diagnostics.windows(2).all(|w| w[1].l2 < w[0].l2));
        let rep = energy_report(&tr);
        assert!(rep.max_residual() < 1e-6);
        let zero = integrate(&SpectralField::zeros(&lat), &SolverConfig::new(1.0, 0.1, 0.01, Form::V)).unwrap();
        assert_eq!(energy_report(&zero).max_residual(), 0.0);
    }

    #[test]
    fn rejects_bad_configs() {
        let lat = Lattice::cube(2);
        let u = SpectralField::zeros(&lat);
        assert!(integrate(&u, &SolverConfig::new(1.0, 1.0, 0.0, Form::V)).is_err());
        assert!(integrate(&u, &SolverConfig::new(1.0, 1.0, 0.3, Form::V)).is_err());
        let m = u.clone().with_mean([1.0, 0.0, 0.0]);
        assert!(matches!(
            integrate(&m, &SolverConfig::new(1.0, 1.0, 0.1, Form::V)),
            Err(Error::InvalidConfig(_))
        ));
    }

    #[test]
    fn blow_up_is_reported() {
        let lat = Lattice::cube(3);
        let u0 = SpectralField::random_gevrey(&lat, 4, 0.0, 1e4);
        let err = integrate(&u0, &SolverConfig::new(0.0, 1.0, 0.1, Form::V)).unwrap_err();
        assert!(matches!(err, Error::NonFinite { .. }));
    }
}
