//! File formats: single fields as JSON, trajectories as JSON lines with a
//! leading metadata record.

use std::io::{BufRead, Write};
use std::sync::Arc;

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::field::{GevreyIndex, SpectralField};
use crate::lattice::{parse_rational, Lattice, Rational};
use crate::linalg::{conj, from_parts, imag_part, is_zero, real_part, RVec3};
use crate::mean_flow::MeanFlow;
use crate::solver::{Form, Trajectory};

fn rational_string(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// `{"L": [periods], "q": ["p/q"; 3], "cutoff": "p/q"}`; `q` holds the exact
/// squared frequency ratios.
pub fn lattice_to_json(lat: &Lattice) -> Value {
    json!({
        "L": lat.periods(),
        "q": lat.squared_ratios().iter().map(rational_string).collect::<Vec<_>>(),
        "cutoff": rational_string(lat.cutoff()),
    })
}

pub fn lattice_from_json(v: &Value) -> Result<Arc<Lattice>> {
    let cutoff = match v.get("cutoff") {
        Some(Value::String(s)) => parse_rational(s)?,
        Some(Value::Number(n)) => parse_rational(&n.to_string())?,
        _ => return Err(Error::Format("lattice: missing cutoff".into())),
    };
    if let Some(q) = v.get("q").and_then(Value::as_array) {
        let q: Vec<Rational> = q
            .iter()
            .map(|x| match x {
                Value::String(s) => parse_rational(s),
                other => parse_rational(&other.to_string()),
            })
            .collect::<Result<_>>()?;
        let q: [Rational; 3] = q
            .try_into()
            .map_err(|_| Error::Format("lattice: q needs three entries".into()))?;
        return Lattice::from_squared_ratios(q, cutoff);
    }
    let periods: RVec3 = serde_json::from_value(
        v.get("L")
            .cloned()
            .ok_or_else(|| Error::Format("lattice: missing L".into()))?,
    )?;
    Lattice::from_periods(periods, cutoff)
}

/// Field document with one representative per `+-k` pair (the one whose
/// first non-zero component is positive).
pub fn field_to_json(field: &SpectralField) -> Value {
    let lat = field.lattice();
    let modes: Vec<Value> = field
        .coeffs()
        .iter()
        .zip(lat.modes())
        .filter(|(c, m)| !is_zero(c) && is_representative(&m.k))
        .map(|(c, m)| json!({"k": m.k, "re": real_part(c), "im": imag_part(c)}))
        .collect();
    let mut doc = lattice_to_json(lat);
    doc["mean"] = json!(field.mean());
    doc["modes"] = json!(modes);
    doc
}

fn is_representative(k: &[i32; 3]) -> bool {
    k.iter().find(|&&x| x != 0).is_some_and(|&x| x > 0)
}

/// Reads a field; with `lattice` given the file must describe the same one.
pub fn field_from_json(v: &Value, lattice: Option<&Arc<Lattice>>) -> Result<SpectralField> {
    let lat = match lattice {
        Some(l) => {
            if v.get("cutoff").is_some() {
                let own = lattice_from_json(v)?;
                if !own.same_as(l) {
                    return Err(Error::LatticeMismatch);
                }
            }
            l.clone()
        }
        None => lattice_from_json(v)?,
    };
    let mean: RVec3 = match v.get("mean") {
        Some(m) => serde_json::from_value(m.clone())?,
        None => [0.0; 3],
    };
    let modes = v
        .get("modes")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::Format("field: missing modes".into()))?;
    let mut half = Vec::with_capacity(modes.len());
    for m in modes {
        let k: [i32; 3] = serde_json::from_value(
            m.get("k").cloned().ok_or_else(|| Error::Format("field: mode without k".into()))?,
        )?;
        let re: RVec3 = serde_json::from_value(m.get("re").cloned().unwrap_or(json!([0.0, 0.0, 0.0])))?;
        let im: RVec3 = serde_json::from_value(m.get("im").cloned().unwrap_or(json!([0.0, 0.0, 0.0])))?;
        half.push((k, from_parts(&re, &im)));
    }
    // stored coefficients are kept bit-exact unless they need projecting
    let mut raw = SpectralField::zeros(&lat).with_mean(mean);
    for (k, c) in &half {
        let i = lat.index_of(*k).ok_or(Error::ModeNotRetained(*k))?;
        raw.coeffs_mut()[i] = *c;
        raw.coeffs_mut()[lat.neg(i)] = conj(c);
    }
    let scale = crate::lattice::rat_to_f64(lat.cutoff()).sqrt() * raw.max_coeff();
    if raw.divergence_defect() <= 1e-13 * scale {
        Ok(raw)
    } else {
        SpectralField::from_half(&lat, half, mean)
    }
}

/// Writes the metadata record then one record per sample:
/// `{"t", "field", "norms": {"l2", "h1", "gevrey"}}`.
pub fn write_trajectory<W: Write>(traj: &Trajectory, extra_meta: Value, mut w: W) -> Result<()> {
    let meta = json!({
        "meta": {
            "lattice": lattice_to_json(&traj.lattice),
            "omega": traj.omega,
            "form": traj.form,
            "dt": traj.dt,
            "gevrey": traj.gevrey,
            "mean_flow": traj.mean_flow.map(|f| json!({"u0": f.u0})),
            "samples": traj.len(),
            "run": extra_meta,
        }
    });
    writeln!(w, "{}", serde_json::to_string(&meta)?).map_err(io_err)?;
    for ((t, s), d) in traj.times.iter().zip(&traj.states).zip(&traj.diagnostics) {
        let mut field = field_to_json(s);
        let obj = field.as_object_mut().expect("field is an object");
        obj.remove("L");
        obj.remove("q");
        obj.remove("cutoff");
        let rec = json!({
            "t": t,
            "field": field,
            "norms": {"l2": d.l2, "h1": d.h1, "gevrey": d.gevrey},
        });
        writeln!(w, "{}", serde_json::to_string(&rec)?).map_err(io_err)?;
    }
    w.flush().map_err(io_err)
}

fn io_err(e: std::io::Error) -> Error {
    Error::Format(format!("i/o: {e}"))
}

/// Reads a trajectory written by [`write_trajectory`]; returns it with the
/// `run` metadata.
pub fn read_trajectory<R: BufRead>(r: R) -> Result<(Trajectory, Value)> {
    let mut lines = r.lines();
    let first = lines
        .next()
        .ok_or_else(|| Error::Format("trajectory: empty file".into()))?
        .map_err(io_err)?;
    let head: Value = serde_json::from_str(&first)?;
    let meta = head
        .get("meta")
        .ok_or_else(|| Error::Format("trajectory: first line must be the meta record".into()))?;
    let lat = lattice_from_json(&meta["lattice"])?;
    let omega = meta["omega"]
        .as_f64()
        .ok_or_else(|| Error::Format("trajectory: missing omega".into()))?;
    let form: Form = serde_json::from_value(meta["form"].clone())?;
    let dt = meta["dt"]
        .as_f64()
        .ok_or_else(|| Error::Format("trajectory: missing dt".into()))?;
    let mut traj = Trajectory::empty(&lat, omega, form, dt);
    traj.gevrey = serde_json::from_value::<Vec<GevreyIndex>>(meta["gevrey"].clone()).unwrap_or_default();
    if let Some(u0) = meta.get("mean_flow").and_then(|m| m.get("u0")) {
        traj.mean_flow = Some(MeanFlow::new(serde_json::from_value(u0.clone())?, omega));
    }
    for line in lines {
        let line = line.map_err(io_err)?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: Value = serde_json::from_str(&line)?;
        let t = rec["t"]
            .as_f64()
            .ok_or_else(|| Error::Format("trajectory: record without t".into()))?;
        traj.push(t, field_from_json(&rec["field"], Some(&lat))?);
    }
    Ok((traj, meta["run"].clone()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::rat;
    use crate::solver::{integrate, SolverConfig};

    #[test]
    fn field_round_trip_is_exact() {
        let lat = Lattice::from_ratios([rat(1), crate::lattice::rat_frac(1, 2), rat(1)], rat(9)).unwrap();
        let u = SpectralField::random_gevrey(&lat, 4, 0.3, 1.0).with_mean([0.5, -0.25, 1e-300]);
        let doc = field_to_json(&u);
        assert_eq!(doc["modes"].as_array().unwrap().len(), lat.len() / 2);
        let text = serde_json::to_string(&doc).unwrap();
        let back = field_from_json(&serde_json::from_str(&text).unwrap(), None).unwrap();
        assert!(back.lattice().same_as(&lat));
        assert_eq!(back.sub(&u).max_coeff(), 0.0);
    }

    #[test]
    fn field_from_periods_only() {
        let v = json!({
            "L": [std::f64::consts::PI * 2.0, std::f64::consts::PI * 2.0, std::f64::consts::PI],
            "cutoff": 5,
            "modes": [{"k": [1, 0, 0], "re": [0.0, 1.0, 0.0], "im": [0.0, 0.0, 0.5]}],
        });
        let u = field_from_json(&v, None).unwrap();
        assert_eq!(u.lattice().squared_ratios()[2], rat(4));
        assert_eq!(u.support().len(), 2);
        assert!(u.reality_defect() == 0.0);
    }

    #[test]
    fn mismatched_lattice_is_rejected() {
        let u = SpectralField::random_gevrey(&Lattice::cube(3), 1, 0.0, 1.0);
        let doc = field_to_json(&u);
        assert!(matches!(
            field_from_json(&doc, Some(&Lattice::cube(4))),
            Err(Error::LatticeMismatch)
        ));
    }

    #[test]
    fn trajectory_round_trip() {
        let lat = Lattice::cube(3);
        let u0 = SpectralField::random_gevrey(&lat, 2, 0.0, 0.3).with_mean([0.1, 0.0, 0.2]);
        let cfg = SolverConfig::new(2.0, 0.1, 0.01, Form::U)
            .with_gevrey(vec![GevreyIndex::new(0.5, 0.2).unwrap()]);
        let traj = integrate(&u0, &cfg).unwrap();
        let mut buf = Vec::new();
        write_trajectory(&traj, json!({"seed": 2}), &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.lines().next().unwrap().starts_with("{\"meta\""));
        let (back, run) = read_trajectory(&buf[..]).unwrap();
        assert_eq!(run["seed"], 2);
        assert_eq!(back.len(), traj.len());
        assert_eq!(back.times, traj.times);
        assert_eq!(back.mean_flow, traj.mean_flow);
        for (a, b) in back.states.iter().zip(&traj.states) {
            assert_eq!(a.sub(b).max_coeff(), 0.0);
        }
        assert_eq!(back.diagnostics[3].gevrey, traj.diagnostics[3].gevrey);
    }
}
