//! Symbolic oscillation frequencies.
//!
//! Rotation frequencies `Omega * ktil_3` are `Omega * coef * sqrt(s)` with `s`
//! square-free and `coef` rational, so a frequency is stored as a rational
//! combination of generators `Omega * sqrt(s)`. Square roots of distinct
//! square-free integers are linearly independent over the rationals, hence two
//! combinations are equal as real numbers exactly when their keys are equal.
//! Caller-supplied frequencies get their own opaque generator.

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};

use num_traits::Zero;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::lattice::{parse_rational, rat, rat_to_f64, DirectionCosine, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Generator {
    /// `|Omega| * sqrt(square_free)`; `omega_bits` holds `|Omega|`.
    Rot { square_free: u64, omega_bits: u64 },
    /// An opaque positive frequency.
    Free { bits: u64 },
}

impl Generator {
    pub fn value(&self) -> f64 {
        match *self {
            Generator::Rot {
                square_free,
                omega_bits,
            } => f64::from_bits(omega_bits) * (square_free as f64).sqrt(),
            Generator::Free { bits } => f64::from_bits(bits),
        }
    }

    fn to_json(self) -> Value {
        match self {
            Generator::Rot {
                square_free,
                omega_bits,
            } => json!({ "omega": f64::from_bits(omega_bits), "sqrt": square_free }),
            Generator::Free { bits } => json!({ "free": f64::from_bits(bits) }),
        }
    }

    fn from_json(v: &Value) -> Result<Generator> {
        if let Some(f) = v.get("free").and_then(Value::as_f64) {
            return Ok(Generator::Free { bits: f.to_bits() });
        }
        let omega = v.get("omega").and_then(Value::as_f64);
        let s = v.get("sqrt").and_then(Value::as_u64);
        match (omega, s) {
            (Some(omega), Some(square_free)) => Ok(Generator::Rot {
                square_free,
                omega_bits: omega.to_bits(),
            }),
            _ => Err(Error::Format(format!("bad frequency generator {v}"))),
        }
    }
}

/// Rational combination of generators with a cached numeric value.
/// Equality, ordering and hashing use the combination only.
#[derive(Clone)]
pub struct Frequency {
    combo: Vec<(Generator, Rational)>,
    value: f64,
}

impl Frequency {
    pub fn zero() -> Frequency {
        Frequency {
            combo: Vec::new(),
            value: 0.0,
        }
    }

    fn from_combo(mut combo: Vec<(Generator, Rational)>) -> Frequency {
        combo.sort_by_key(|a| a.0);
        let mut merged: Vec<(Generator, Rational)> = Vec::with_capacity(combo.len());
        for (g, c) in combo {
            match merged.last_mut() {
                Some((h, d)) if *h == g => *d += c,
                _ => merged.push((g, c)),
            }
        }
        merged.retain(|(_, c)| !c.is_zero());
        let value = merged.iter().map(|(g, c)| rat_to_f64(c) * g.value()).sum();
        Frequency {
            combo: merged,
            value,
        }
    }

    /// `omega * ktil_3` for a mode with the given exact direction cosine.
    pub fn rotation(omega: f64, cosine: &DirectionCosine) -> Frequency {
        if omega == 0.0 {
            return Frequency::zero();
        }
        let mut coef = cosine.coef.clone();
        if omega < 0.0 {
            coef = -coef;
        }
        Frequency::from_combo(vec![(
            Generator::Rot {
                square_free: cosine.square_free,
                omega_bits: omega.abs().to_bits(),
            },
            coef,
        )])
    }

    /// A caller-supplied frequency with its own generator.
    pub fn free(value: f64) -> Frequency {
        if value == 0.0 {
            return Frequency::zero();
        }
        let coef = if value < 0.0 { rat(-1) } else { rat(1) };
        Frequency::from_combo(vec![(
            Generator::Free {
                bits: value.abs().to_bits(),
            },
            coef,
        )])
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn is_zero(&self) -> bool {
        self.combo.is_empty()
    }

    pub fn combo(&self) -> &[(Generator, Rational)] {
        &self.combo
    }

    pub fn add(&self, other: &Frequency) -> Frequency {
        if other.is_zero() {
            return self.clone();
        }
        if self.is_zero() {
            return other.clone();
        }
        Frequency::from_combo(self.combo.iter().chain(&other.combo).cloned().collect())
    }

    pub fn neg(&self) -> Frequency {
        Frequency {
            combo: self.combo.iter().map(|(g, c)| (*g, -c)).collect(),
            value: -self.value,
        }
    }

    pub fn sub(&self, other: &Frequency) -> Frequency {
        self.add(&other.neg())
    }

    pub fn scale(&self, factor: &Rational) -> Frequency {
        Frequency::from_combo(self.combo.iter().map(|(g, c)| (*g, c * factor)).collect())
    }

    /// Frequency of `f(kappa t)`; `kappa` is taken exactly as its binary value.
    pub fn dilate(&self, kappa: f64) -> Frequency {
        match Rational::from_float(kappa) {
            Some(k) => self.scale(&k),
            None => panic!("non-finite dilation factor {kappa}"),
        }
    }

    pub fn to_json(&self) -> Value {
        let combo: Vec<Value> = self
            .combo
            .iter()
            .map(|(g, c)| json!([g.to_json(), c.to_string()]))
            .collect();
        json!({ "combo": combo, "value": self.value })
    }

    pub fn from_json(v: &Value) -> Result<Frequency> {
        let combo = v
            .get("combo")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Format(format!("bad frequency {v}")))?;
        let mut out = Vec::with_capacity(combo.len());
        for entry in combo {
            let pair = entry
                .as_array()
                .filter(|a| a.len() == 2)
                .ok_or_else(|| Error::Format(format!("bad frequency entry {entry}")))?;
            let coef = pair[1]
                .as_str()
                .ok_or_else(|| Error::Format(format!("bad coefficient {}", pair[1])))?;
            out.push((Generator::from_json(&pair[0])?, parse_rational(coef)?));
        }
        Ok(Frequency::from_combo(out))
    }
}

impl PartialEq for Frequency {
    fn eq(&self, other: &Self) -> bool {
        self.combo == other.combo
    }
}

impl Eq for Frequency {}

impl PartialOrd for Frequency {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Frequency {
    fn cmp(&self, other: &Self) -> Ordering {
        self.combo.cmp(&other.combo)
    }
}

impl Hash for Frequency {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.combo.hash(state);
    }
}

impl fmt::Debug for Frequency {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (n, (g, c)) in self.combo.iter().enumerate() {
            if n > 0 {
                write!(f, " + ")?;
            }
            match g {
                Generator::Rot {
                    square_free,
                    omega_bits,
                } => write!(
                    f,
                    "({c})*{}*sqrt({square_free})",
                    f64::from_bits(*omega_bits)
                )?,
                Generator::Free { bits } => write!(f, "({c})*{}", f64::from_bits(*bits))?,
            }
        }
        write!(f, " [= {}]", self.value)
    }
}

/// Pairs of distinct frequencies whose numeric values differ by less than
/// `tol`. They are kept apart; the list is a diagnostic.
pub fn collisions<'a, I>(freqs: I, tol: f64) -> Vec<(Frequency, Frequency)>
where
    I: IntoIterator<Item = &'a Frequency>,
{
    let mut sorted: Vec<&Frequency> = freqs.into_iter().collect();
    sorted.sort_by(|a, b| a.value.total_cmp(&b.value).then_with(|| a.cmp(b)));
    sorted.dedup_by(|a, b| a == b);
    let mut out = Vec::new();
    for (i, a) in sorted.iter().enumerate() {
        for b in &sorted[i + 1..] {
            if b.value - a.value >= tol {
                break;
            }
            out.push(((*a).clone(), (*b).clone()));
        }
    }
    out
}
