//! Term-by-term construction of the long-time expansion
//! `v(t) ~ sum_n q_n(t) e^{-mu_n t}` of a decaying trajectory, where `mu_n`
//! runs through the additive semigroup of the Stokes spectrum and each `q_n`
//! is an S-polynomial.
//!
//! Order `n` solves, eigenspace by eigenspace,
//! `q' + (Lambda - mu_n) q = R_Lambda P_n`, with forcing
//! `P_n = -sum_{mu_m + mu_j = mu_n} B_Omega(t, q_m, q_j)`. Off resonance the
//! solution is the unique S-polynomial one. At resonance (`Lambda = mu_n`)
//! the constant `xi_n = q_n(0)` depends on the trajectory and is fitted from
//! the tail of `e^{mu_n t} R_Lambda (v - sum_{m<n} q_m e^{-mu_m t})`.
//!
//! A plain tail mean of that signal is biased by the next order, which decays
//! only like `e^{-(mu_{n+1} - mu_n) t}`. The constants are therefore refitted
//! with the expansion through one order beyond the requested one subtracted;
//! a few such passes converge because later orders depend on earlier
//! constants only through decaying terms.

use std::sync::Arc;

use num_traits::Zero;
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::field::{GevreyIndex, SpectralField};
use crate::fit::{field_mean_and_slope, linear_fit};
use crate::lattice::{rat, rat_to_f64, rational_json, Lattice, Rational, SemigroupTable};
use crate::par::{map_range, map_slice, Exec};
use crate::solver::{Form, Trajectory};
use crate::spoly::SPoly;

/// How an eigenspace relates to the current semigroup element.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Case {
    /// `Lambda = mu_n`
    Resonant,
    /// `Lambda >= mu_{n+1}`
    Dissipative,
    /// `Lambda <= mu_{n-1}`
    SubCritical,
}

pub fn classify(lambda: &Rational, mu: &Rational) -> Case {
    match lambda.cmp(mu) {
        std::cmp::Ordering::Equal => Case::Resonant,
        std::cmp::Ordering::Greater => Case::Dissipative,
        std::cmp::Ordering::Less => Case::SubCritical,
    }
}

#[derive(Debug, Clone)]
pub struct FitPolicy {
    /// Tail window; `None` means the last third of the trajectory.
    pub window: Option<(f64, f64)>,
    /// Largest accepted `|slope| / |mean|` of the tail signal, per unit time.
    pub drift_tol: f64,
    /// Refitting passes after the first sequential build.
    pub refine_passes: usize,
    /// Numerical floor of remainders relative to the state norm; `None`
    /// means `max(dt^4, 1e-13)`.
    pub floor_rel: Option<f64>,
}

impl Default for FitPolicy {
    fn default() -> Self {
        FitPolicy {
            window: None,
            drift_tol: 1e-4,
            refine_passes: 2,
            floor_rel: None,
        }
    }
}

impl FitPolicy {
    pub fn window_for(&self, traj: &Trajectory) -> Result<(f64, f64)> {
        let t_end = *traj
            .times
            .last()
            .ok_or_else(|| Error::InvalidConfig("empty trajectory".into()))?;
        let (a, b) = self.window.unwrap_or((2.0 * t_end / 3.0, t_end));
        if !(a < b && a >= traj.times[0] && b <= t_end + 1e-9 * traj.dt) {
            return Err(Error::InvalidConfig(format!(
                "fit window [{a}, {b}] is not inside the trajectory [{}, {t_end}]",
                traj.times[0]
            )));
        }
        Ok((a, b))
    }

    pub fn floor_for(&self, traj: &Trajectory) -> f64 {
        self.floor_rel.unwrap_or_else(|| traj.dt.powi(4).max(1e-13))
    }
}

#[derive(Debug, Clone)]
pub struct FittedConstant {
    pub value: SpectralField,
    pub window: (f64, f64),
    /// `|slope| / |mean|` of the tail signal.
    pub drift: f64,
    /// Relative difference of the means over the two halves of the window.
    pub cross_window: f64,
    pub samples: usize,
}

#[derive(Debug, Clone)]
pub struct Order {
    pub n: usize,
    pub mu: Rational,
    pub q: SPoly,
    pub forcing: SPoly,
    pub cases: Vec<(Rational, Case)>,
    pub constant: Option<FittedConstant>,
    /// Forcing support bound `2 (Lambda_m + Lambda_j)` exceeds the cutoff.
    pub truncation_bias: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct OrderResidual {
    pub n: usize,
    pub abs: f64,
    pub rel: f64,
    pub scale: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateFit {
    /// Fitted decay exponent (positive for decay).
    pub rate: f64,
    pub stderr: f64,
    pub window: (f64, f64),
    pub points: usize,
    pub floor_limited: bool,
}

#[derive(Debug, Clone)]
pub struct Expansion {
    lattice: Arc<Lattice>,
    omega: f64,
    semigroup: SemigroupTable,
    orders: Vec<Order>,
    exec: Exec,
}

/// Semigroup of the retained spectrum with at least `min_len` elements.
pub fn semigroup_for(lattice: &Lattice, min_len: usize) -> SemigroupTable {
    let shells: Vec<Rational> = lattice.shells().iter().map(|s| s.value.clone()).collect();
    let mut cutoff = lattice.cutoff().clone();
    loop {
        let sg = SemigroupTable::generate(&shells, &cutoff);
        if sg.len() >= min_len {
            return sg;
        }
        cutoff *= rat(2);
    }
}

impl Expansion {
    pub fn new(lattice: &Arc<Lattice>, omega: f64, max_order: usize, exec: Exec) -> Expansion {
        Expansion {
            lattice: lattice.clone(),
            omega,
            semigroup: semigroup_for(lattice, max_order + 1),
            orders: Vec::new(),
            exec,
        }
    }

    pub fn lattice(&self) -> &Arc<Lattice> {
        &self.lattice
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn semigroup(&self) -> &SemigroupTable {
        &self.semigroup
    }

    pub fn orders(&self) -> &[Order] {
        &self.orders
    }

    pub fn qs(&self) -> Vec<SPoly> {
        self.orders.iter().map(|o| o.q.clone()).collect()
    }

    pub fn mus(&self) -> Vec<Rational> {
        self.orders.iter().map(|o| o.mu.clone()).collect()
    }

    fn is_resonant(&self, n: usize) -> bool {
        self.lattice.shell_of(self.semigroup.mu(n)).is_some()
    }

    /// `P_n = -sum B_Omega(t, q_m, q_j)` over the decompositions of `mu_n`.
    pub fn forcing(&self, n: usize) -> Result<SPoly> {
        forcing_from(&self.lattice, &self.semigroup, n, &self.qs(), self.omega, self.exec)
    }

    /// Builds order `n` from orders `1..n` and the resonant constant `xi`
    /// (zero when absent).
    fn assemble(&self, n: usize, xi: Option<&SpectralField>) -> Result<Order> {
        let mu = self.semigroup.mu(n).clone();
        let forcing = self.forcing(n)?;
        let mut q = SPoly::zero(&self.lattice);
        let mut cases = Vec::new();
        let mut max_support = Rational::zero();
        for &(m, j) in self.semigroup.pairs(n) {
            if m > self.orders.len() || j > self.orders.len() {
                continue;
            }
            let (a, b) = (&self.orders[m - 1].q, &self.orders[j - 1].q);
            if let (Some(sa), Some(sb)) = (a.support_bound(), b.support_bound()) {
                let bound = (sa + sb) * rat(2);
                if bound > max_support {
                    max_support = bound;
                }
            }
        }
        for shell in self.lattice.shells() {
            let lambda = &shell.value;
            let rp = forcing.eigenprojection(lambda);
            let case = classify(lambda, &mu);
            if case == Case::Resonant {
                let zero = SpectralField::zeros(&self.lattice);
                let xi = xi
                    .unwrap_or(&zero)
                    .eigenprojection(lambda)
                    .expect("shell value is an eigenvalue");
                q = q.add(&rp.ode_solve(&Rational::zero(), Some(&xi))?)?;
                cases.push((lambda.clone(), case));
            } else if !rp.is_zero() {
                q = q.add(&rp.ode_solve(&(lambda - &mu), None)?)?;
                cases.push((lambda.clone(), case));
            }
        }
        Ok(Order {
            n,
            mu,
            q,
            forcing,
            cases,
            constant: None,
            truncation_bias: &max_support > self.lattice.cutoff(),
        })
    }

    /// Sum of orders `1..=upto` at time `t`, weighted by `e^{-mu_n t}`.
    pub fn partial_sum(&self, t: f64, upto: usize) -> SpectralField {
        let mut s = SpectralField::zeros(&self.lattice);
        for o in self.orders.iter().take(upto) {
            if !o.q.is_zero() {
                s.axpy_assign((-rat_to_f64(&o.mu) * t).exp(), &o.q.evaluate(t));
            }
        }
        s
    }

    /// Tail signal `xi_n + e^{mu_n t} R_{mu_n} (v - sum_{m <= upto} q_m e^{-mu_m t})`
    /// on the samples of `window`, where `xi_n` is the constant currently in
    /// order `n`.
    fn tail_signal(
        &self,
        traj: &Trajectory,
        n: usize,
        upto: usize,
        window: (f64, f64),
    ) -> Result<(Vec<f64>, Vec<SpectralField>)> {
        let mu = self.semigroup.mu(n).clone();
        let muf = rat_to_f64(&mu);
        let projected: Vec<(f64, SPoly)> = self
            .orders
            .iter()
            .take(upto)
            .map(|o| (rat_to_f64(&o.mu), o.q.eigenprojection(&mu)))
            .collect();
        let xi_old = self.orders[n - 1].q.eigenprojection(&mu).evaluate(0.0);
        let (i0, i1) = (traj.index_at(window.0), traj.index_at(window.1 + 0.5 * traj.dt));
        let idx: Vec<usize> = (i0..i1.min(traj.len())).collect();
        let fields = map_slice(self.exec, &idx, |&i| {
            let t = traj.times[i];
            let mut r = traj.states[i].eigenprojection(&mu).expect("resonant shell");
            for (m, q) in &projected {
                if !q.is_zero() {
                    r.axpy_assign(-(-m * t).exp(), &q.evaluate(t));
                }
            }
            xi_old.axpy((muf * t).exp(), &r)
        });
        let times = idx.iter().map(|&i| traj.times[i]).collect();
        Ok((times, fields))
    }

    fn fit_constant(
        &self,
        traj: &Trajectory,
        n: usize,
        upto: usize,
        window: (f64, f64),
        scale: f64,
    ) -> Result<FittedConstant> {
        let (times, fields) = self.tail_signal(traj, n, upto, window)?;
        let (mean, slope) = field_mean_and_slope(&times, &fields).ok_or_else(|| {
            Error::FitNotConverged(format!("fewer than two samples in window {window:?}"))
        })?;
        let denom = mean.l2_norm().max(1e-10 * scale).max(f64::MIN_POSITIVE);
        let half = times.len() / 2;
        let cross_window = match (
            field_mean_and_slope(&times[..half], &fields[..half]),
            field_mean_and_slope(&times[half..], &fields[half..]),
        ) {
            (Some((a, _)), Some((b, _))) => a.sub(&b).l2_norm() / denom,
            _ => f64::NAN,
        };
        Ok(FittedConstant {
            drift: slope.l2_norm() / denom,
            value: mean,
            window,
            cross_window,
            samples: times.len(),
        })
    }

    /// Fitted `xi_n` on an arbitrary window, with the current expansion
    /// through all built orders subtracted.
    pub fn constant_on_window(
        &self,
        traj: &Trajectory,
        n: usize,
        window: (f64, f64),
    ) -> Result<FittedConstant> {
        let traj = as_v_form(traj);
        let scale = traj.diagnostics[0].l2;
        self.fit_constant(&traj, n, self.orders.len(), window, scale)
    }

    /// Leading constant `xi_1`: tail mean of `e^{t} R_1 v(t)`.
    pub fn fit_leading_constant(
        traj: &Trajectory,
        policy: &FitPolicy,
        exec: Exec,
    ) -> Result<FittedConstant> {
        let traj = as_v_form(traj);
        let mut e = Expansion::new(&traj.lattice, traj.omega, 1, exec);
        let window = policy.window_for(&traj)?;
        e.orders.push(e.assemble(1, None)?);
        let c = e.fit_constant(&traj, 1, 1, window, traj.diagnostics[0].l2)?;
        check_drift(&c, 1, policy)?;
        Ok(c)
    }

    /// Builds the next order from the current ones with resonant constant
    /// fitted from `traj` by the plain tail mean.
    pub fn build_next_order(&mut self, traj: &Trajectory, policy: &FitPolicy) -> Result<&Order> {
        let traj = as_v_form(traj);
        let n = self.orders.len() + 1;
        if n > self.semigroup.len() {
            self.semigroup = semigroup_for(&self.lattice, n + 1);
        }
        let window = policy.window_for(&traj)?;
        let mut order = self.assemble(n, None)?;
        if self.is_resonant(n) {
            self.orders.push(order);
            let c = self.fit_constant(&traj, n, n, window, traj.diagnostics[0].l2)?;
            self.orders.pop();
            order = self.assemble(n, Some(&c.value))?;
            order.constant = Some(c);
        }
        self.orders.push(order);
        Ok(self.orders.last().unwrap())
    }

    /// Full construction through `n_orders` with refitted constants.
    pub fn build(
        traj: &Trajectory,
        n_orders: usize,
        policy: &FitPolicy,
        exec: Exec,
    ) -> Result<Expansion> {
        let traj = as_v_form(&drifting_frame(traj));
        let window = policy.window_for(&traj)?;
        let scale = traj.diagnostics[0].l2;
        let mut e = Expansion::new(&traj.lattice, traj.omega, n_orders + 1, exec);
        let lookahead = n_orders + 1;
        for _ in 0..lookahead {
            e.build_next_order(&traj, policy)?;
        }
        for _ in 0..policy.refine_passes {
            let mut xis = Vec::with_capacity(lookahead);
            for n in 1..=lookahead {
                xis.push(if e.is_resonant(n) {
                    Some(e.fit_constant(&traj, n, lookahead, window, scale)?)
                } else {
                    None
                });
            }
            e.orders.clear();
            for (n, c) in (1..=lookahead).zip(xis) {
                let mut o = e.assemble(n, c.as_ref().map(|c| &c.value))?;
                o.constant = c;
                e.orders.push(o);
            }
        }
        // final diagnostics with the converged expansion
        for n in 1..=lookahead {
            if e.is_resonant(n) {
                let c = e.fit_constant(&traj, n, lookahead, window, scale)?;
                if n <= n_orders {
                    check_drift(&c, n, policy)?;
                }
                let value = e.orders[n - 1].constant.as_ref().map(|old| old.value.clone());
                e.orders[n - 1].constant = Some(FittedConstant {
                    value: value.unwrap_or(c.value.clone()),
                    ..c
                });
            }
        }
        e.orders.truncate(n_orders);
        Ok(e)
    }

    /// Residual of `q_n' + (A - mu_n) q_n + sum B_Omega(q_m, q_j)` per order.
    pub fn verify(&self) -> Result<Vec<OrderResidual>> {
        verify_expansion_system(&self.qs(), &self.semigroup, self.omega, self.exec)
    }

    /// Decay rate of `|v - sum_{n <= upto} q_n e^{-mu_n t}|` (or the u-form
    /// analogue when `traj` is a u-form trajectory).
    pub fn remainder_rate(
        &self,
        traj: &Trajectory,
        upto: usize,
        index: GevreyIndex,
        policy: &FitPolicy,
    ) -> Result<RateFit> {
        let series = match traj.form {
            Form::V => self.qs(),
            Form::U => self.to_u_expansion(0.0),
        };
        remainder_rate(traj, &series, &self.mus(), upto, index, policy, self.exec)
    }

    /// `|x(t) - sum_{n <= N} ...|_index` for `N = 0..=orders` at every sample,
    /// with `x` the state in the trajectory's own form and frame.
    pub fn remainder_norms(&self, traj: &Trajectory, index: GevreyIndex) -> Vec<Vec<f64>> {
        let series = match traj.form {
            Form::V => self.qs(),
            Form::U => self.to_u_expansion(0.0),
        };
        let mus: Vec<f64> = self.orders.iter().map(|o| rat_to_f64(&o.mu)).collect();
        map_range(self.exec, traj.len(), |i| {
            let t = traj.times[i];
            let mut r = match &traj.mean_flow {
                Some(flow) => flow.galilean_shift(&traj.states[i], t),
                None => traj.states[i].clone(),
            };
            let mut row = vec![r.gevrey_norm(index)];
            for (q, mu) in series.iter().zip(&mus) {
                if !q.is_zero() {
                    r.axpy_assign(-(-mu * t).exp(), &q.evaluate(t));
                }
                row.push(r.gevrey_norm(index));
            }
            row
        })
    }

    /// `Q_n(t) = e^{mu_n T*} e^{-Omega t S} q_n(t - T*)`.
    pub fn to_u_expansion(&self, t_star: f64) -> Vec<SPoly> {
        self.orders
            .iter()
            .map(|o| {
                o.q.time_shift(-t_star)
                    .apply_exp_s(-self.omega)
                    .scale((rat_to_f64(&o.mu) * t_star).exp())
            })
            .collect()
    }

    pub fn to_json(&self) -> Value {
        let orders: Vec<Value> = self
            .orders
            .iter()
            .map(|o| {
                json!({
                    "n": o.n,
                    "mu": rational_json(&o.mu),
                    "q": o.q.to_json(),
                    "terms": o.q.len(),
                    "cases": o.cases.iter().map(|(l, c)| json!({"eigenvalue": rational_json(l), "case": c})).collect::<Vec<_>>(),
                    "constant": o.constant.as_ref().map(|c| json!({
                        "window": [c.window.0, c.window.1],
                        "drift": c.drift,
                        "cross_window": c.cross_window,
                        "samples": c.samples,
                        "norm": c.value.l2_norm(),
                    })),
                    "truncation_bias": o.truncation_bias,
                })
            })
            .collect();
        json!({ "omega": self.omega, "orders": orders })
    }
}

fn check_drift(c: &FittedConstant, n: usize, policy: &FitPolicy) -> Result<()> {
    if c.drift > policy.drift_tol {
        return Err(Error::FitNotConverged(format!(
            "order {n}: tail drift {:.3e} per unit time exceeds {:.1e} on window {:?}",
            c.drift, policy.drift_tol, c.window
        )));
    }
    Ok(())
}

fn as_v_form(traj: &Trajectory) -> Trajectory {
    traj.transform(Form::V)
}

/// The zero-mean trajectory `w(t) = u(. + V(t), t) - U(t)` of a run with
/// non-zero mean, in u-form; other trajectories are returned unchanged.
pub fn drifting_frame(traj: &Trajectory) -> Trajectory {
    let Some(flow) = traj.mean_flow else {
        return traj.clone();
    };
    let lab = traj.transform(Form::U);
    let mut out = Trajectory::empty(&lab.lattice, lab.omega, Form::U, lab.dt);
    out.gevrey = lab.gevrey.clone();
    for (t, u) in lab.times.iter().zip(&lab.states) {
        out.push(*t, flow.galilean_shift(u, *t).with_mean([0.0; 3]));
    }
    out
}

fn forcing_from(
    lattice: &Arc<Lattice>,
    sg: &SemigroupTable,
    n: usize,
    qs: &[SPoly],
    omega: f64,
    exec: Exec,
) -> Result<SPoly> {
    let mut p = SPoly::zero(lattice);
    for &(m, j) in sg.pairs(n) {
        if m > qs.len() || j > qs.len() || qs[m - 1].is_zero() || qs[j - 1].is_zero() {
            continue;
        }
        p = p.sub(&qs[m - 1].bilinear(&qs[j - 1], omega, exec)?)?;
    }
    Ok(p)
}

/// Residuals of `q_n' + (A - mu_n) q_n + sum_{mu_m + mu_j = mu_n} B_Omega(q_m, q_j)`
/// for `q_1, q_2, ...` with `mu_n` from `sg`.
pub fn verify_expansion_system(
    qs: &[SPoly],
    sg: &SemigroupTable,
    omega: f64,
    exec: Exec,
) -> Result<Vec<OrderResidual>> {
    let mut out = Vec::with_capacity(qs.len());
    for (i, q) in qs.iter().enumerate() {
        let n = i + 1;
        let mu = rat_to_f64(sg.mu(n));
        let forcing = forcing_from(q.lattice(), sg, n, &qs[..i], omega, exec)?;
        let dq = q.differentiate();
        let aq = q.apply_a_power(1.0);
        let residual = dq.add(&aq)?.sub(&q.scale(mu))?.sub(&forcing)?;
        let scale = forcing
            .max_coeff()
            .max(aq.max_coeff())
            .max(dq.max_coeff())
            .max(f64::MIN_POSITIVE);
        let abs = residual.max_coeff();
        out.push(OrderResidual {
            n,
            abs,
            rel: abs / scale,
            scale,
        });
    }
    Ok(out)
}

/// Decay rate of `|x(t) - sum_{n <= upto} series_n(t) e^{-mu_n t}|_index`
/// over the fit window, clipped where the remainder drops below `1e2` times
/// the relative numerical floor.
pub fn remainder_rate(
    traj: &Trajectory,
    series: &[SPoly],
    mus: &[Rational],
    upto: usize,
    index: GevreyIndex,
    policy: &FitPolicy,
    exec: Exec,
) -> Result<RateFit> {
    let mus: Vec<f64> = mus.iter().take(upto).map(rat_to_f64).collect();
    fit_remainder(traj, index, policy, exec, |i| {
        let t = traj.times[i];
        let mut r = match &traj.mean_flow {
            Some(flow) => flow.galilean_shift(&traj.states[i], t),
            None => traj.states[i].clone(),
        };
        for (q, mu) in series.iter().zip(&mus) {
            if !q.is_zero() {
                r.axpy_assign(-(-mu * t).exp(), &q.evaluate(t));
            }
        }
        r
    })
}

/// Log-linear decay fit of `remainder(i)` over the samples of the fit
/// window. The window is cut at the first sample where the remainder falls
/// below `1e2` times the floor relative to the zero-mean state norm.
pub fn fit_remainder<F>(
    traj: &Trajectory,
    index: GevreyIndex,
    policy: &FitPolicy,
    exec: Exec,
    remainder: F,
) -> Result<RateFit>
where
    F: Fn(usize) -> SpectralField + Sync + Send,
{
    let window = policy.window_for(traj)?;
    let floor = policy.floor_for(traj);
    let (i0, i1) = (traj.index_at(window.0), traj.index_at(window.1 + 0.5 * traj.dt));
    let idx: Vec<usize> = (i0..i1.min(traj.len())).collect();
    let samples = map_slice(exec, &idx, |&i| {
        let norm = traj.states[i].gevrey_norm(index);
        (traj.times[i], remainder(i).gevrey_norm(index), norm)
    });
    let mut ts = Vec::new();
    let mut ys = Vec::new();
    for (t, r, norm) in &samples {
        if *r < 1e2 * floor * norm || *r == 0.0 {
            break;
        }
        ts.push(*t);
        ys.push(r.ln());
    }
    let floor_limited = ts.len() < 8;
    let end = ts.last().copied().unwrap_or(window.0);
    let (rate, stderr) = match linear_fit(&ts, &ys) {
        Some(f) => (-f.slope, f.stderr),
        None => (f64::NAN, f64::NAN),
    };
    Ok(RateFit {
        rate,
        stderr,
        window: (window.0, end),
        points: ts.len(),
        floor_limited,
    })
}

/// `(1/T) int_t^{t+T} Q(tau) d tau` in closed form.
pub fn time_average(q: &SPoly, period: f64, t: f64) -> Result<SpectralField> {
    let zero = SpectralField::zeros(q.lattice());
    let anti = q.ode_solve(&Rational::zero(), Some(&zero))?;
    Ok(anti.evaluate(t + period).sub(&anti.evaluate(t)).scale(1.0 / period))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepPoint {
    pub omega: f64,
    /// `|Q_bar|` for the window length `T`.
    pub fixed: f64,
    /// RMS of `|Q_bar|` over window lengths in `[T, 2T]`.
    pub envelope: f64,
}

/// Window averages of `Q_Omega` for each rotation rate; `make_q` builds the
/// S-polynomial for one rate. Rates run in parallel.
pub fn omega_sweep<F>(
    omegas: &[f64],
    period: f64,
    t: f64,
    exec: Exec,
    make_q: F,
) -> Result<Vec<SweepPoint>>
where
    F: Fn(f64) -> Result<SPoly> + Sync + Send,
{
    const ENVELOPE_SAMPLES: usize = 64;
    let points = map_slice(exec, omegas, |&omega| -> Result<SweepPoint> {
        let q = make_q(omega)?;
        let fixed = time_average(&q, period, t)?.l2_norm();
        let zero = SpectralField::zeros(q.lattice());
        let anti = q.ode_solve(&Rational::zero(), Some(&zero))?;
        let start = anti.evaluate(t);
        let mut acc = 0.0;
        for s in 0..ENVELOPE_SAMPLES {
            let len = period * (1.0 + s as f64 / (ENVELOPE_SAMPLES - 1) as f64);
            let avg = anti.evaluate(t + len).sub(&start).scale(1.0 / len);
            acc += avg.l2_norm().powi(2);
        }
        Ok(SweepPoint {
            omega,
            fixed,
            envelope: (acc / ENVELOPE_SAMPLES as f64).sqrt(),
        })
    });
    points.into_iter().collect()
}

/// `Q_{n, Omega}(t) = e^{-Omega t S} R_mu u0`, the u-expansion term of a
/// trajectory on which the nonlinearity vanishes.
pub fn linear_q(u0: &SpectralField, mu: &Rational, omega: f64) -> Result<SPoly> {
    Ok(SPoly::constant(&u0.eigenprojection(mu)?).apply_exp_s(-omega))
}
