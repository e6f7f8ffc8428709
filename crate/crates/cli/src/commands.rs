//! Subcommand implementations.

use std::path::Path;
use std::sync::Arc;

use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use rotns_core::expansion::{drifting_frame, linear_q, omega_sweep, FitPolicy};
use rotns_core::io::{field_from_json, lattice_to_json, read_trajectory, write_trajectory};
use rotns_core::lattice::{parse_rational, rat, rat_to_f64, rational_json, spectrum_json};
use rotns_core::special::{
    closed_form_u, helicity_series, linear_equation_residual, pde_residual, physical_helicity,
    DriftingVkSolution, FlowEvaluator, VkData, WithoutPressure,
};
use rotns_core::{integrate, Exec, Expansion, Form, GevreyIndex, Lattice, Rational, SolverConfig};

use crate::config::{self, ExpansionSpec};
use crate::error::CliError;
use crate::output::{self, hash_value, meta, plot_data};
use crate::{ExpandArgs, HelicityArgs, ReportArgs, SimulateArgs, SpecialCase, SpectrumArgs, SweepArgs, VerifyArgs};

fn to_value<T: serde::Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("arguments serialize")
}

fn read_json(path: &Path) -> Result<Value, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

fn file_sha(path: &Path) -> Result<String, CliError> {
    let bytes = std::fs::read(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

fn parse_periods(p: &[String]) -> Result<[Rational; 3], CliError> {
    expect_len("--L", p, 3)?;
    let v = p
        .iter()
        .map(|s| parse_rational(s).map_err(CliError::from))
        .collect::<Result<Vec<_>, _>>()?;
    v.try_into()
        .map_err(|_| CliError::Config("--L needs three periods".into()))
}

/// `m^2 |kcheck|^2` for the largest `|m|` of the data, with periods given
/// as multiples of `2 pi`.
fn data_cutoff(periods: &[Rational; 3], data: &VkData) -> Rational {
    let m = data.coefficients.iter().map(|(m, _)| m.abs()).max().unwrap_or(1) as i64;
    let mut lambda = rat(0);
    for (k, p) in data.direction.iter().zip(periods) {
        let x = Rational::from_integer((*k as i64 * m).into()) / p;
        lambda += &x * &x;
    }
    lambda
}

fn data_lattice(periods: &[String], cutoff: Option<&str>, data: &VkData) -> Result<Arc<Lattice>, CliError> {
    let p = parse_periods(periods)?;
    let cutoff = match cutoff {
        Some(c) => parse_rational(c)?,
        None => data_cutoff(&p, data),
    };
    Ok(Lattice::from_ratios(p, cutoff)?)
}

fn load_vk(path: &Path) -> Result<VkData, CliError> {
    Ok(VkData::from_json(&read_json(path)?)?)
}

/// Four points per wavelength of the highest retained frequency.
fn default_grid(lattice: &Lattice, support: &[usize]) -> usize {
    let kmax = support
        .iter()
        .flat_map(|&i| lattice.mode(i).k)
        .map(|x| x.unsigned_abs() as usize)
        .max()
        .unwrap_or(1);
    (4 * kmax).max(8)
}

pub fn spectrum(a: &SpectrumArgs) -> Result<(), CliError> {
    let lat = Lattice::from_ratios(parse_periods(&a.periods)?, parse_rational(&a.cutoff)?)?;
    let sg_cutoff = match &a.semigroup_cutoff {
        Some(c) => parse_rational(c)?,
        None => lat.cutoff().clone(),
    };
    let spec = lat.stokes_spectrum(lat.cutoff());
    let sg = lat.semigroup(&sg_cutoff);
    let args = to_value(a);
    let mut doc = spectrum_json(&spec, &sg);
    let obj = doc.as_object_mut().expect("object");
    obj.insert("meta".into(), meta("spectrum", &hash_value(&args), args));
    obj.insert("lattice".into(), lattice_to_json(&lat));
    obj.insert("modes".into(), json!(lat.len()));
    output::write_json(&doc, a.out.as_deref(), "spectrum.json")?;
    Ok(())
}

pub fn simulate(a: &SimulateArgs, exec: Exec) -> Result<(), CliError> {
    let loaded = config::load(&a.config)?;
    let cfg = &loaded.config;
    let lat = cfg.lattice.build()?;
    let x0 = cfg.initial_field(&lat, &loaded.dir)?;
    let traj = integrate(&x0, &cfg.solver_config()?.with_exec(exec))?;
    let run = meta("simulate", &loaded.hash, to_value(cfg));
    let out = a
        .out
        .clone()
        .or_else(|| cfg.output.as_ref().and_then(|o| o.trajectory.as_ref()).map(|p| loaded.dir.join(p)));
    let (w, _) = output::writer(out.as_deref(), "trajectory.jsonl")?;
    write_trajectory(&traj, run, w)?;
    Ok(())
}

fn expect_len<T>(flag: &str, v: &[T], n: usize) -> Result<(), CliError> {
    if v.len() != n {
        return Err(CliError::Config(format!("{flag} needs {n} comma-separated values, got {}", v.len())));
    }
    Ok(())
}

pub fn expand(a: &ExpandArgs, exec: Exec) -> Result<(), CliError> {
    expect_len("--norm", &a.norm, 2)?;
    if let Some(w) = &a.window {
        expect_len("--window", w, 2)?;
    }
    let file = std::fs::File::open(&a.traj)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", a.traj.display())))?;
    let (traj, run) = read_trajectory(std::io::BufReader::new(file))?;
    if traj.len() < 2 {
        return Err(CliError::Config("trajectory has fewer than two samples".into()));
    }
    // flags override the policy recorded with the run
    let recorded: ExpansionSpec = run
        .get("config")
        .and_then(|c| c.get("expansion"))
        .filter(|e| !e.is_null())
        .map(|e| serde_json::from_value(e.clone()))
        .transpose()
        .map_err(|e| CliError::Config(format!("recorded expansion settings: {e}")))?
        .unwrap_or_default();
    let base = recorded.policy();
    let policy = FitPolicy {
        window: a.window.as_ref().map(|w| (w[0], w[1])).or(base.window),
        drift_tol: a.drift_tol.unwrap_or(base.drift_tol),
        refine_passes: a.refine_passes.unwrap_or(base.refine_passes),
        floor_rel: a.floor_rel.or(base.floor_rel),
    };
    let index = GevreyIndex::new(a.norm[0], a.norm[1])?;

    let e = Expansion::build(&traj, a.order, &policy, exec)?;
    let frame = drifting_frame(&traj);
    let sg = e.semigroup();
    let mut rates = Vec::with_capacity(a.order + 1);
    for upto in 0..=a.order {
        let fit = e.remainder_rate(&frame, upto, index, &policy)?;
        rates.push(json!({
            "upto": upto,
            "expected": rat_to_f64(sg.mu(upto + 1)),
            "mu_next": rational_json(sg.mu(upto + 1)),
            "rate": fit.rate,
            "stderr": fit.stderr,
            "window": [fit.window.0, fit.window.1],
            "points": fit.points,
            "floor_limited": fit.floor_limited,
        }));
    }
    let residuals = e.verify()?;
    let norms = e.remainder_norms(&frame, index);

    let mut args = to_value(a);
    args["trajectory_sha256"] = json!(file_sha(&a.traj)?);
    args["run_config_hash"] = run.get("config_hash").cloned().unwrap_or(Value::Null);
    let expansion = e.to_json();
    let report = json!({
        "meta": meta("expand", &hash_value(&args), args),
        "omega": traj.omega,
        "lattice": lattice_to_json(&traj.lattice),
        "norm": {"alpha": index.alpha, "sigma": index.sigma},
        "policy": {
            "window": policy.window.map(|w| [w.0, w.1]),
            "drift_tol": policy.drift_tol,
            "refine_passes": policy.refine_passes,
            "floor_rel": policy.floor_for(&frame),
        },
        "orders": expansion["orders"],
        "remainder_rates": rates,
        "residuals": residuals,
        "series": {"t": frame.times, "remainder": norms},
    });
    output::write_json(&report, a.out.as_deref(), "expansion.json")?;
    if let Some(path) = &a.csv {
        output::write_text(&plot_data(&report), path)?;
    }
    Ok(())
}

struct Checks(Vec<Value>);

impl Checks {
    /// Passes when `value <= tol`; `None` records a skipped check.
    fn push(&mut self, name: &str, value: f64, tol: Option<f64>, detail: Value) {
        let pass = tol.map(|t| value <= t);
        self.0.push(json!({"name": name, "value": value, "tol": tol, "pass": pass, "detail": detail}));
    }

    /// Passes when `value >= floor`.
    fn push_min(&mut self, name: &str, value: f64, floor: f64, detail: Value) {
        self.0.push(json!({"name": name, "value": value, "min": floor, "pass": value >= floor, "detail": detail}));
    }

    fn all_pass(&self) -> bool {
        self.0.iter().all(|c| c["pass"].as_bool() != Some(false))
    }
}

fn sample_times(t_end: f64) -> Vec<f64> {
    [0.0, 0.25, 0.5, 1.0].iter().map(|s| s * t_end).collect()
}

fn relative_error(a: &rotns_core::SpectralField, b: &rotns_core::SpectralField) -> f64 {
    a.sub(b).l2_norm() / b.l2_norm().max(f64::MIN_POSITIVE)
}

pub fn verify_special(a: &VerifyArgs, exec: Exec) -> Result<(), CliError> {
    const SOLVER_TOL: f64 = 1e-8;
    const POINTWISE_TOL: f64 = 1e-8;
    const LINEAR_TOL: f64 = 1e-10;
    const HELICITY_TOL: f64 = 1e-10;
    const CONTROL_MIN: f64 = 1e-3;

    if let Some(m) = &a.mean {
        expect_len("--mean", m, 3)?;
    }
    let data = load_vk(&a.data)?;
    let lat = data_lattice(&a.periods, a.cutoff.as_deref(), &data)?;
    let u0 = data.to_field(&lat)?;
    let mean = match (a.case, &a.mean) {
        (SpecialCase::ClosedForm, Some(m)) if m.iter().any(|x| *x != 0.0) => {
            return Err(CliError::Config("the closed-form case has zero mean; use --case drifting".into()))
        }
        (_, Some(m)) => [m[0], m[1], m[2]],
        (_, None) => [0.0; 3],
    };
    let grid = a.grid.unwrap_or_else(|| default_grid(&lat, &u0.support()));
    let times = sample_times(a.t_end);
    let sol = DriftingVkSolution::new(&data, &lat, mean, a.omega)?;
    let mut checks = Checks(Vec::new());

    let form = match a.case {
        SpecialCase::ClosedForm => Form::V,
        SpecialCase::Drifting => Form::U,
    };
    let cfg = SolverConfig::new(a.omega, a.t_end, a.dt, form).with_exec(exec);
    let traj = integrate(&u0.clone().with_mean(mean), &cfg)?.transform(Form::U);
    let mut worst = 0.0f64;
    for (t, u) in traj.times.iter().zip(&traj.states) {
        let exact = match a.case {
            SpecialCase::ClosedForm => closed_form_u(&data, &lat, a.omega, *t)?,
            SpecialCase::Drifting => sol.velocity(*t),
        };
        worst = worst.max(relative_error(&u.clone().with_mean([0.0; 3]), &exact.with_mean([0.0; 3])));
    }
    checks.push("solver_vs_exact", worst, Some(SOLVER_TOL), json!({"dt": a.dt, "t_end": a.t_end, "samples": traj.len()}));

    let pde = pde_residual(&sol, a.omega, &times, grid, exec);
    let scale = pde.scale.max(1.0);
    checks.push(
        "pde_residual",
        pde.momentum,
        Some(POINTWISE_TOL * scale),
        json!({"grid": grid, "divergence": pde.divergence, "scale": pde.scale, "per_time": pde.per_time}),
    );
    checks.push("divergence", pde.divergence, Some(POINTWISE_TOL * scale), json!({"grid": grid}));

    let pressure_max = times
        .iter()
        .flat_map(|t| sol.pressure(*t))
        .map(|c| c.norm())
        .fold(0.0, f64::max);
    let control = pde_residual(&WithoutPressure(&sol), a.omega, &times, grid, exec);
    if pressure_max > 0.0 {
        checks.push_min("without_pressure_fails", control.momentum / scale, CONTROL_MIN, json!({"pressure_max": pressure_max}));
    } else {
        checks.push("without_pressure_fails", control.momentum / scale, None, json!({"skipped": "pressure vanishes"}));
    }

    match a.case {
        SpecialCase::ClosedForm => {
            let mut lin = 0.0f64;
            for t in &times {
                lin = lin.max(linear_equation_residual(&data, &lat, a.omega, *t)?);
            }
            checks.push("linear_equation", lin, Some(LINEAR_TOL), json!({}));

            let mut hel = 0.0f64;
            let mut values = Vec::new();
            for t in &times {
                let series = helicity_series(&data, &lat, *t);
                let quad = physical_helicity(&closed_form_u(&data, &lat, a.omega, *t)?, grid, exec);
                hel = hel.max((series - quad).abs() / series.abs().max(1.0));
                values.push(json!({"t": t, "series": series, "quadrature": quad}));
            }
            checks.push("helicity", hel, Some(HELICITY_TOL), json!({"grid": grid, "values": values}));
        }
        SpecialCase::Drifting => {
            let u_abs = |t: f64| sol.flow().velocity(t).iter().map(|x| x * x).sum::<f64>().sqrt();
            let drift = times
                .iter()
                .map(|t| (u_abs(*t) - u_abs(0.0)).abs())
                .fold(0.0, f64::max);
            checks.push("mean_speed_constant", drift, Some(1e-12 * u_abs(0.0).max(1.0)), json!({"speed": u_abs(0.0)}));
        }
    }

    let all_pass = checks.all_pass();
    let args = to_value(a);
    let mut args_hashed = args.clone();
    args_hashed["data_sha256"] = json!(file_sha(&a.data)?);
    let report = json!({
        "meta": meta("verify-special", &hash_value(&args_hashed), args_hashed),
        "case": a.case,
        "omega": a.omega,
        "mean": mean,
        "lattice": lattice_to_json(&lat),
        "checks": checks.0,
        "all_pass": all_pass,
    });
    output::write_json(&report, a.out.as_deref(), "verify-special.json")?;
    if !all_pass {
        return Err(CliError::CheckFailed("one or more checks failed".into()));
    }
    Ok(())
}

pub fn helicity(a: &HelicityArgs, exec: Exec) -> Result<(), CliError> {
    let field = field_from_json(&read_json(&a.field)?, None)?;
    let lat = field.lattice().clone();
    let grid = a.grid.unwrap_or_else(|| default_grid(&lat, &field.support()));
    let mut args = to_value(a);
    args["field_sha256"] = json!(file_sha(&a.field)?);
    let report = json!({
        "meta": meta("helicity", &hash_value(&args), args),
        "spectral": field.helicity(),
        "quadrature": physical_helicity(&field, grid, exec),
        "grid": grid,
    });
    output::write_json(&report, a.out.as_deref(), "helicity.json")?;
    Ok(())
}

pub fn sweep_omega(a: &SweepArgs, exec: Exec) -> Result<(), CliError> {
    if !(a.window > 0.0 && a.window.is_finite()) {
        return Err(CliError::Config("--window must be positive".into()));
    }
    let data = load_vk(&a.data)?;
    let lat = data_lattice(&a.periods, a.cutoff.as_deref(), &data)?;
    let u0 = data.to_field(&lat)?;
    let mu = match &a.mu {
        Some(m) => parse_rational(m)?,
        None => u0
            .support()
            .iter()
            .map(|&i| lat.mode(i).lambda.clone())
            .min()
            .ok_or_else(|| CliError::Config("data carries no modes".into()))?,
    };
    if lat.shell_of(&mu).is_none() {
        return Err(CliError::Config(format!("{mu} is not a retained eigenvalue")));
    }
    let points = omega_sweep(&a.omegas, a.window, a.at, exec, |omega| linear_q(&u0, &mu, omega))?;
    let ratios: Vec<Value> = points
        .windows(2)
        .map(|w| {
            json!({
                "omega": [w[0].omega, w[1].omega],
                "fixed": w[1].fixed / w[0].fixed,
                "envelope": w[1].envelope / w[0].envelope,
            })
        })
        .collect();
    let decreasing = points.windows(2).all(|w| w[1].envelope < w[0].envelope);
    let mut args = to_value(a);
    args["data_sha256"] = json!(file_sha(&a.data)?);
    let report = json!({
        "meta": meta("sweep-omega", &hash_value(&args), args),
        "mu": rational_json(&mu),
        "direction": data.direction,
        "k3_zero": data.direction[2] == 0,
        "window": a.window,
        "at": a.at,
        "points": points,
        "ratios": ratios,
        "envelope_decreasing": decreasing,
    });
    output::write_json(&report, a.out.as_deref(), "sweep-omega.json")?;
    if let Some(path) = &a.csv {
        output::write_text(&plot_data(&report), path)?;
    }
    Ok(())
}

pub fn report(a: &ReportArgs) -> Result<(), CliError> {
    let text = plot_data(&read_json(&a.input)?);
    match &a.csv {
        Some(p) => output::write_text(&text, p),
        None => {
            use std::io::Write;
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}
