//! The α-test: pure power-law realizations of a topology, their voltage
//! division ratios `d_k(α)` and port coefficient `φ(α)`.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::characteristic::Characteristic;
use crate::circuit::Circuit;
use crate::error::{Error, Result};
use crate::nodal;

/// Exponent standing in for `α → ∞`.
pub const HARDLIMITER_ALPHA: f64 = 64.0;

/// Tolerance used when classifying a sequence as constant or monotone.
pub const TREND_TOL: f64 = 1e-9;

/// Result of solving the `α`-circuit at `v_in = 1`, `D = 1`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlphaProfile {
    pub alpha: f64,
    pub phi: f64,
    /// `v_k / v_in` keyed by node name.
    pub d: BTreeMap<String, f64>,
    /// `φ` summed over the branches incident to `a` instead of `b`.
    #[serde(skip)]
    pub phi_a_side: f64,
    /// `d_k` in circuit node order.
    #[serde(skip)]
    pub ratios: Vec<f64>,
    /// `v_s / v_in` per branch, nonnegative.
    #[serde(skip)]
    pub branch_ratios: Vec<f64>,
}

impl AlphaProfile {
    pub fn d_of(&self, node: &str) -> Option<f64> {
        self.d.get(node).copied()
    }

    /// `F(v_in) = D φ v_in^α`.
    pub fn input_current(&self, coefficient: f64, v_in: f64) -> f64 {
        coefficient * self.phi * v_in.powf(self.alpha)
    }
}

/// Solves the single power-law realization `f = v^α` at `v_in = 1`.
pub fn alpha_solve(c: &Circuit, alpha: f64) -> Result<AlphaProfile> {
    alpha_solve_at(c, alpha, 1.0)
}

/// Same as [`alpha_solve`] but driven at `v_in`; ratios and `φ` are
/// normalized back to unit drive.
pub fn alpha_solve_at(c: &Circuit, alpha: f64, v_in: f64) -> Result<AlphaProfile> {
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(Error::Domain(format!("alpha must be positive, got {alpha}")));
    }
    let f = Characteristic::power_law(1.0, alpha)?;
    let sol = nodal::solve_dc(c, &f, v_in)?;
    let scale = v_in.powf(alpha);
    let ratios: Vec<f64> = sol.potentials.iter().map(|p| p / v_in).collect();
    let d = c.nodes().iter().cloned().zip(ratios.iter().copied()).collect();
    Ok(AlphaProfile {
        alpha,
        phi: sol.input_current / scale,
        phi_a_side: sol.input_current_a_side / scale,
        d,
        ratios,
        branch_ratios: sol.branch_voltages.iter().map(|v| v / v_in).collect(),
    })
}

/// Closed form of `φ(α)` for [`crate::circuit::fig_a1`]:
/// `1 + (1 + 2^{−α}) / (1 + (1 + 2^{−α})^{1/α})^α`.
pub fn phi_closed_form_fig_a1(alpha: f64) -> f64 {
    let q = 1.0 + 2f64.powf(-alpha);
    1.0 + q / (1.0 + q.powf(1.0 / alpha)).powf(alpha)
}

/// Closed form of `d_o(α)` for [`crate::circuit::fig_a1`]: the o-b branch
/// in parallel with the two-element chain o-x-b against the a-o branch.
pub fn d_o_closed_form_fig_a1(alpha: f64) -> f64 {
    let q = 1.0 + 2f64.powf(-alpha);
    1.0 / (1.0 + q.powf(1.0 / alpha))
}

/// Closed form `φ(α) = 1 + 2 (1/3)^α` for [`crate::circuit::fig4`].
pub fn phi_closed_form_fig4(alpha: f64) -> f64 {
    1.0 + 2.0 * (1.0f64 / 3.0).powf(alpha)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Trend {
    Constant,
    Increasing,
    Decreasing,
    Violation,
}

impl Trend {
    pub fn is_monotone(self) -> bool {
        self != Trend::Violation
    }
}

/// Classifies a sequence, ignoring steps smaller than `tol`.
pub fn classify(values: &[f64], tol: f64) -> Trend {
    let mut up = false;
    let mut down = false;
    for w in values.windows(2) {
        let step = w[1] - w[0];
        if step > tol {
            up = true;
        } else if step < -tol {
            down = true;
        }
    }
    match (up, down) {
        (false, false) => Trend::Constant,
        (true, false) => Trend::Increasing,
        (false, true) => Trend::Decreasing,
        (true, true) => Trend::Violation,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NodeTrend {
    pub node: String,
    pub values: Vec<f64>,
    pub trend: Trend,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DSweep {
    pub alphas: Vec<f64>,
    pub phi: Vec<f64>,
    pub nodes: Vec<NodeTrend>,
}

impl DSweep {
    pub fn violations(&self) -> Vec<&NodeTrend> {
        self.nodes
            .iter()
            .filter(|n| n.trend == Trend::Violation)
            .collect()
    }

    pub fn node(&self, name: &str) -> Option<&NodeTrend> {
        self.nodes.iter().find(|n| n.node == name)
    }
}

/// `d_k(α)` over an ascending grid with a monotonicity verdict per node.
pub fn d_sweep(c: &Circuit, alphas: &[f64]) -> Result<DSweep> {
    if alphas.is_empty() {
        return Err(Error::InvalidParameter("alpha grid is empty".into()));
    }
    if alphas.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter(
            "alpha grid must be strictly ascending".into(),
        ));
    }
    let profiles = alphas
        .iter()
        .map(|&a| alpha_solve(c, a))
        .collect::<Result<Vec<_>>>()?;
    let nodes = c
        .nodes()
        .iter()
        .enumerate()
        .map(|(k, name)| {
            let values: Vec<f64> = profiles.iter().map(|p| p.ratios[k]).collect();
            NodeTrend {
                node: name.clone(),
                trend: classify(&values, TREND_TOL),
                values,
            }
        })
        .collect();
    Ok(DSweep {
        alphas: alphas.to_vec(),
        phi: profiles.iter().map(|p| p.phi).collect(),
        nodes,
    })
}

/// `d_k` of the hardlimiter regime, taken at `α = 64`.
pub fn hardlimiter_limit(c: &Circuit) -> Result<BTreeMap<String, f64>> {
    Ok(alpha_solve(c, HARDLIMITER_ALPHA)?.d)
}

/// Richardson refinement of the hardlimiter ratios from `α ∈ {16, 32, 64}`
/// assuming `d(α) = d∞ + c₁/α + c₂/α²`.
pub fn hardlimiter_limit_extrapolated(c: &Circuit) -> Result<BTreeMap<String, f64>> {
    let p16 = alpha_solve(c, 16.0)?;
    let p32 = alpha_solve(c, 32.0)?;
    let p64 = alpha_solve(c, 64.0)?;
    Ok(c
        .nodes()
        .iter()
        .enumerate()
        .map(|(k, name)| {
            let r1_hi = 2.0 * p64.ratios[k] - p32.ratios[k];
            let r1_lo = 2.0 * p32.ratios[k] - p16.ratios[k];
            (name.clone(), (4.0 * r1_hi - r1_lo) / 3.0)
        })
        .collect())
}
