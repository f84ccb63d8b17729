//! Quasi-polynomial conductor characteristics `i = Σ D_p v^{α_p}`.
//!
//! Only the positive half-line is modelled: branch orientation is chosen so
//! every branch voltage is nonnegative, which makes the odd extension
//! `D |v|^α sign(v)` unnecessary as a runtime type. The solvers use
//! [`Characteristic::eval_odd`] internally for iterates that temporarily
//! reverse a drop.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Exponents closer than this are merged into one term.
pub const EXPONENT_MERGE_TOL: f64 = 1e-12;

/// One power-law term `coefficient · v^exponent`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub coefficient: f64,
    pub exponent: f64,
}

impl Term {
    pub fn new(coefficient: f64, exponent: f64) -> Result<Self> {
        if !(coefficient.is_finite() && coefficient > 0.0) {
            return Err(Error::InvalidCharacteristic(format!(
                "coefficient must be positive and finite, got {coefficient}"
            )));
        }
        if !(exponent.is_finite() && exponent > 0.0) {
            return Err(Error::InvalidCharacteristic(format!(
                "exponent must be positive and finite, got {exponent}"
            )));
        }
        Ok(Self {
            coefficient,
            exponent,
        })
    }

    #[inline]
    fn eval(&self, v: f64) -> f64 {
        self.coefficient * v.powf(self.exponent)
    }
}

/// A monotone passive characteristic with positive coefficients and
/// strictly increasing positive exponents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Characteristic {
    terms: Vec<Term>,
}

impl Characteristic {
    /// Builds a characteristic from arbitrary terms: sorts by exponent and
    /// merges duplicate exponents by summing their coefficients.
    pub fn new(terms: impl IntoIterator<Item = Term>) -> Result<Self> {
        let mut terms: Vec<Term> = terms.into_iter().collect();
        if terms.is_empty() {
            return Err(Error::InvalidCharacteristic(
                "at least one term is required".into(),
            ));
        }
        for t in &terms {
            Term::new(t.coefficient, t.exponent)?;
        }
        terms.sort_by(|a, b| a.exponent.total_cmp(&b.exponent));
        let mut merged: Vec<Term> = Vec::with_capacity(terms.len());
        for t in terms {
            match merged.last_mut() {
                Some(last) if (t.exponent - last.exponent).abs() <= EXPONENT_MERGE_TOL => {
                    last.coefficient += t.coefficient;
                }
                _ => merged.push(t),
            }
        }
        Ok(Self { terms: merged })
    }

    /// Single-term power law `D v^α`.
    pub fn power_law(coefficient: f64, exponent: f64) -> Result<Self> {
        Ok(Self {
            terms: vec![Term::new(coefficient, exponent)?],
        })
    }

    /// Builds from `(D, α)` pairs.
    pub fn from_pairs(pairs: &[(f64, f64)]) -> Result<Self> {
        let terms = pairs
            .iter()
            .map(|&(d, a)| Term::new(d, a))
            .collect::<Result<Vec<_>>>()?;
        Self::new(terms)
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn exponents(&self) -> Vec<f64> {
        self.terms.iter().map(|t| t.exponent).collect()
    }

    pub fn min_exponent(&self) -> f64 {
        self.terms[0].exponent
    }

    pub fn coefficient_sum(&self) -> f64 {
        self.terms.iter().map(|t| t.coefficient).sum()
    }

    pub fn is_power_law(&self) -> bool {
        self.terms.len() == 1
    }

    /// Every coefficient multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(
            self.terms
                .iter()
                .map(|t| Term::new(t.coefficient * factor, t.exponent))
                .collect::<Result<Vec<_>>>()?,
        )
    }

    /// `Σ D_p v^{α_p}` for `v ≥ 0`.
    pub fn eval(&self, v: f64) -> Result<f64> {
        if v.is_nan() || v < 0.0 {
            return Err(Error::Domain(format!(
                "characteristic evaluated at negative voltage {v}"
            )));
        }
        Ok(self.eval_unchecked(v))
    }

    #[inline]
    pub(crate) fn eval_unchecked(&self, v: f64) -> f64 {
        if v == 0.0 {
            return 0.0;
        }
        self.terms.iter().map(|t| t.eval(v)).sum()
    }

    /// Odd extension `sign(v) f(|v|)`.
    #[inline]
    pub fn eval_odd(&self, v: f64) -> f64 {
        let m = self.eval_unchecked(v.abs());
        if v < 0.0 {
            -m
        } else {
            m
        }
    }

    /// Contribution of term `index` alone at `v ≥ 0`.
    pub fn eval_term(&self, index: usize, v: f64) -> f64 {
        if v == 0.0 {
            0.0
        } else {
            self.terms[index].eval(v)
        }
    }

    /// `Σ D_p α_p v^{α_p − 1}`.
    ///
    /// At `v = 0` the slope is `D_p` for a unit exponent, `0` above it, and
    /// unbounded below it (reported as [`Error::SingularSlope`]).
    pub fn slope(&self, v: f64) -> Result<f64> {
        if v.is_nan() || v < 0.0 {
            return Err(Error::Domain(format!("slope evaluated at negative voltage {v}")));
        }
        if v == 0.0 {
            let min = self.min_exponent();
            if min < 1.0 {
                return Err(Error::SingularSlope { min_exponent: min });
            }
            return Ok(self
                .terms
                .iter()
                .filter(|t| t.exponent == 1.0)
                .map(|t| t.coefficient)
                .sum());
        }
        Ok(self.slope_unchecked(v))
    }

    /// Newton slope at `v > 0`: the tangent for convex terms and the chord
    /// `D v^{α−1}` for concave ones (`α < 1`), which never undershoots and
    /// keeps iterates from oscillating across a zero drop.
    #[inline]
    pub(crate) fn newton_slope(&self, v: f64) -> f64 {
        self.terms
            .iter()
            .map(|t| t.coefficient * t.exponent.max(1.0) * v.powf(t.exponent - 1.0))
            .sum()
    }

    #[inline]
    pub(crate) fn slope_unchecked(&self, v: f64) -> f64 {
        self.terms
            .iter()
            .map(|t| t.coefficient * t.exponent * v.powf(t.exponent - 1.0))
            .sum()
    }

    /// `∫₀^v f(u) du = Σ D_p v^{α_p+1}/(α_p+1)` for `v ≥ 0`.
    pub fn integral(&self, v: f64) -> f64 {
        if v == 0.0 {
            return 0.0;
        }
        self.terms
            .iter()
            .map(|t| t.coefficient * v.powf(t.exponent + 1.0) / (t.exponent + 1.0))
            .sum()
    }

    /// The unique `v ≥ 0` with `f(v) = i`.
    pub fn invert(&self, i: f64) -> Result<f64> {
        if i.is_nan() || i < 0.0 {
            return Err(Error::Domain(format!("cannot invert negative current {i}")));
        }
        if i == 0.0 {
            return Ok(0.0);
        }
        if let [t] = self.terms.as_slice() {
            return Ok((i / t.coefficient).powf(1.0 / t.exponent));
        }

        let mut lo = 0.0;
        let mut hi = (i / self.coefficient_sum())
            .powf(1.0 / self.min_exponent())
            .max(1.0);
        while self.eval_unchecked(hi) < i {
            lo = hi;
            hi *= 2.0;
        }

        // Newton with bisection fallback inside [lo, hi].
        let mut v = 0.5 * (lo + hi);
        for _ in 0..400 {
            let r = self.eval_unchecked(v) - i;
            if r == 0.0 {
                return Ok(v);
            }
            if r > 0.0 {
                hi = v;
            } else {
                lo = v;
            }
            let g = self.slope_unchecked(v);
            let mut next = v - r / g;
            if !(next > lo && next < hi) || !next.is_finite() {
                next = 0.5 * (lo + hi);
            }
            if (next - v).abs() <= 1e-16 * v || hi - lo <= 2.0 * f64::EPSILON * hi {
                return Ok(next);
            }
            v = next;
        }
        Ok(v)
    }

    /// Term-wise sum of several characteristics (the node-by-node parallel
    /// connection of same-topology circuits).
    pub fn combine(parts: &[Characteristic]) -> Result<Self> {
        if parts.is_empty() {
            return Err(Error::InvalidCharacteristic(
                "combine needs at least one characteristic".into(),
            ));
        }
        Self::new(parts.iter().flat_map(|c| c.terms.iter().copied()))
    }
}

impl fmt::Display for Characteristic {
    /// Text form `D:alpha[,D:alpha...]`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, t) in self.terms.iter().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            write!(f, "{}:{}", t.coefficient, t.exponent)?;
        }
        Ok(())
    }
}

impl FromStr for Characteristic {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut terms = Vec::new();
        for item in s.split(',') {
            let item = item.trim();
            let (d, a) = item.split_once(':').ok_or_else(|| {
                Error::InvalidCharacteristic(format!("expected `D:alpha`, got `{item}`"))
            })?;
            let d: f64 = d.trim().parse().map_err(|_| {
                Error::InvalidCharacteristic(format!("bad coefficient `{d}`"))
            })?;
            let a: f64 = a
                .trim()
                .parse()
                .map_err(|_| Error::InvalidCharacteristic(format!("bad exponent `{a}`")))?;
            terms.push(Term::new(d, a)?);
        }
        Self::new(terms)
    }
}
