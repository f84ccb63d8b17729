//! Analytical superposition: the surrogate `G(v) = Σ_p D_p φ(α_p) v^{α_p}`
//! built from independent power-law realizations, compared against the
//! exact input current `F(v)` of the full circuit.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::alpha::{self, AlphaProfile, Trend};
use crate::characteristic::{Characteristic, Term};
use crate::circuit::Circuit;
use crate::error::{Error, Result};
use crate::ladder;
use crate::nodal::{self, PortSide};

/// Points in the small-signal series fit grid.
pub const SERIES_GRID_POINTS: usize = 16;
/// Number of series exponents fitted (the characteristic's own exponents
/// plus the next ones of the expansion).
pub const SERIES_BASIS_SIZE: usize = 6;
/// Fits whose scaled design matrix exceeds this condition number are rejected.
pub const SERIES_MAX_CONDITION: f64 = 1e12;

/// One term of `G`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SuperposedTerm {
    pub alpha: f64,
    /// `D_p`.
    pub coefficient: f64,
    pub phi: f64,
    /// `D_p φ(α_p) v_in^{α_p}` at the report's drive (`v_in = 1` from
    /// [`superpose`]).
    pub g_term: f64,
}

impl SuperposedTerm {
    /// `D_p φ(α_p)`.
    pub fn g_coefficient(&self) -> f64 {
        self.coefficient * self.phi
    }
}

/// Coefficients of `G` as a quasi-polynomial in `v_in`.
pub fn superpose(c: &Circuit, f: &Characteristic) -> Result<Vec<SuperposedTerm>> {
    let profiles = f
        .terms()
        .iter()
        .map(|t| alpha::alpha_solve(c, t.exponent))
        .collect::<Result<Vec<_>>>()?;
    Ok(terms_from_profiles(f, &profiles, 1.0))
}

fn terms_from_profiles(f: &Characteristic, profiles: &[AlphaProfile], v_in: f64) -> Vec<SuperposedTerm> {
    f.terms()
        .iter()
        .zip(profiles)
        .map(|(t, p)| SuperposedTerm {
            alpha: t.exponent,
            coefficient: t.coefficient,
            phi: p.phi,
            g_term: t.coefficient * p.phi * v_in.powf(t.exponent),
        })
        .collect()
}

/// `G(v) = Σ D_p φ_p v^{α_p}`.
pub fn g_value(terms: &[SuperposedTerm], v_in: f64) -> f64 {
    terms
        .iter()
        .map(|t| t.g_coefficient() * v_in.powf(t.alpha))
        .sum()
}

/// Exact-versus-superposed comparison at one drive level.
#[allow(non_snake_case)]
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuperpositionReport {
    pub v_in: f64,
    pub F: f64,
    pub G: f64,
    /// `|F − G| / F`.
    pub eta: f64,
    /// `|F − G|` relative to `F` minus its leading (smallest-exponent) term.
    pub eta_nonlinear: f64,
    /// Ratio of the higher-exponent to the leading-exponent currents leaving
    /// `a` in the exact solution.
    pub nonlinearity_degree: f64,
    /// Upper bound on `|F − G|` for two-term characteristics (0 for a
    /// single term, absent otherwise).
    pub bound: Option<f64>,
    pub per_term: Vec<SuperposedTerm>,
    /// Bound evaluated after rescaling to unit coefficients.
    #[serde(skip)]
    pub bound_normalized: bool,
    /// Exact input current split by characteristic term at `b`.
    #[serde(skip)]
    pub connected_terms: Vec<f64>,
    /// `d_k` of the exact solution (`v_k / v_in`) in circuit node order.
    #[serde(skip)]
    pub ratios: Vec<f64>,
}

impl SuperpositionReport {
    /// `|P_F − P_G| / P_F` with `P = v_in · i`.
    pub fn eta_from_powers(&self) -> f64 {
        let pf = self.v_in * self.F;
        let pg = self.v_in * self.G;
        (pf - pg).abs() / pf
    }

    /// `F_p^{cnct} − D_p φ_p v^{α_p}` per term; the signs alternate when
    /// the superposition errors cancel.
    pub fn term_deviations(&self) -> Vec<f64> {
        self.connected_terms
            .iter()
            .zip(&self.per_term)
            .map(|(cn, t)| cn - t.g_term)
            .collect()
    }

    /// Comma-separated row matching [`SuperpositionReport::CSV_HEADER`].
    /// The `per_term` CSV field: `alpha:D:phi:g` entries joined by `;`.
    pub fn per_term_field(&self, fmt: impl Fn(f64) -> String) -> String {
        let terms: Vec<String> = self
            .per_term
            .iter()
            .map(|t| {
                format!(
                    "{}:{}:{}:{}",
                    fmt(t.alpha),
                    fmt(t.coefficient),
                    fmt(t.phi),
                    fmt(t.g_term)
                )
            })
            .collect();
        terms.join(";")
    }

    pub fn csv_row(&self, fmt: impl Fn(f64) -> String) -> String {
        let terms = self.per_term_field(&fmt);
        format!(
            "{},{},{},{},{},{},{},{}",
            fmt(self.v_in),
            fmt(self.F),
            fmt(self.G),
            fmt(self.eta),
            fmt(self.eta_nonlinear),
            fmt(self.nonlinearity_degree),
            self.bound.map(&fmt).unwrap_or_default(),
            terms
        )
    }

    pub const CSV_HEADER: &'static str =
        "v_in,F,G,eta,eta_nonlinear,nonlinearity_degree,bound,per_term";
}

/// Full comparison of `F` and `G` at `v_in`.
pub fn report(c: &Circuit, f: &Characteristic, v_in: f64) -> Result<SuperpositionReport> {
    let exact = nodal::solve_dc(c, f, v_in)?;
    let profiles = f
        .terms()
        .iter()
        .map(|t| alpha::alpha_solve(c, t.exponent))
        .collect::<Result<Vec<_>>>()?;
    let per_term = terms_from_profiles(f, &profiles, v_in);

    let big_f = exact.input_current;
    let big_g: f64 = per_term.iter().map(|t| t.g_term).sum();
    let diff = (big_f - big_g).abs();
    let eta = diff / big_f;
    let leading = per_term[0].g_term;
    let nonlinear = big_f - leading;
    let eta_nonlinear = if nonlinear > 0.0 { diff / nonlinear } else { 0.0 };

    let a_split = nodal::term_currents(c, f, &exact.potentials, PortSide::A);
    let nonlinearity_degree = a_split[1..].iter().sum::<f64>() / a_split[0];
    let connected_terms = nodal::term_currents(c, f, &exact.potentials, PortSide::B);

    let (bound, bound_normalized) = match f.terms() {
        [_] => (Some(0.0), false),
        [lo, hi] => {
            let (b, normalized) = normalized_bound(c, lo, hi, &profiles[0], &profiles[1], v_in);
            (Some(b), normalized)
        }
        _ => (None, false),
    };

    Ok(SuperpositionReport {
        v_in,
        F: big_f,
        G: big_g,
        eta,
        eta_nonlinear,
        nonlinearity_degree,
        bound,
        per_term,
        bound_normalized,
        connected_terms,
        ratios: exact.potentials.iter().map(|p| p / v_in).collect(),
    })
}

/// Rescales `D_m v^m + D_n v^n` to `K (u^m + u^n)` with `v = s u`, which
/// maps the bound for unit coefficients onto the general case exactly.
fn normalized_bound(
    c: &Circuit,
    lo: &Term,
    hi: &Term,
    p_lo: &AlphaProfile,
    p_hi: &AlphaProfile,
    v_in: f64,
) -> (f64, bool) {
    let unit = lo.coefficient == 1.0 && hi.coefficient == 1.0;
    let s = (lo.coefficient / hi.coefficient).powf(1.0 / (hi.exponent - lo.exponent));
    let k = lo.coefficient * s.powf(lo.exponent);
    (k * bound_from_profiles(c, p_lo, p_hi, v_in / s), !unit)
}

/// `(1/v) (Σ_{s₁} [v_s^{n+1}(n) − v_s^{n+1}(m)] + Σ_{s₂} [v_s^{m+1}(m) − v_s^{m+1}(n)])`
/// from the two power-law solutions, `s₁` being the branches with
/// `v_s(n) ≥ v_s(m)`. Each branch counts once per parallel conductor.
pub fn bound_from_profiles(c: &Circuit, pm: &AlphaProfile, pn: &AlphaProfile, v_in: f64) -> f64 {
    let (m, n) = (pm.alpha, pn.alpha);
    let total: f64 = c
        .branches()
        .iter()
        .enumerate()
        .map(|(s, br)| {
            let vm = pm.branch_ratios[s] * v_in;
            let vn = pn.branch_ratios[s] * v_in;
            let w = br.multiplicity as f64;
            if vn >= vm {
                w * (vn.powf(n + 1.0) - vm.powf(n + 1.0))
            } else {
                w * (vm.powf(m + 1.0) - vn.powf(m + 1.0))
            }
        })
        .sum();
    total / v_in
}

/// Bound on `|F − G|` for `f = v^m + v^n` at `v_in`.
pub fn error_bound(c: &Circuit, m: f64, n: f64, v_in: f64) -> Result<f64> {
    if !(v_in.is_finite() && v_in > 0.0) {
        return Err(Error::Domain(format!("v_in must be positive, got {v_in}")));
    }
    let pm = alpha::alpha_solve(c, m)?;
    if m == n {
        return Ok(0.0);
    }
    let pn = alpha::alpha_solve(c, n)?;
    Ok(bound_from_profiles(c, &pm, &pn, v_in))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Statement1Verdict {
    /// `F/G − 1` shrinks with the expected power of `x`.
    Converges,
    /// `F ≡ G` on the whole grid.
    Ideal,
    /// The ratio does not approach 1 as expected.
    Fails,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Statement1Check {
    pub x: Vec<f64>,
    pub ratio: Vec<f64>,
    /// `α₂ − α₁`.
    pub expected_slope: f64,
    /// Least-squares slope of `log|F/G − 1|` against `log x`.
    pub fitted_slope: Option<f64>,
    pub verdict: Statement1Verdict,
}

/// Ratios below this are treated as exactly 1.
const IDEAL_RATIO_TOL: f64 = 1e-11;

/// `F(x)/G(x)` on a descending grid with the slope of `|F/G − 1|`.
pub fn statement1_check(c: &Circuit, f: &Characteristic, x_grid: &[f64]) -> Result<Statement1Check> {
    if x_grid.is_empty() {
        return Err(Error::InvalidParameter("grid is empty".into()));
    }
    let terms = superpose(c, f)?;
    let mut ratio = Vec::with_capacity(x_grid.len());
    for &x in x_grid {
        let exact = nodal::solve_dc(c, f, x)?;
        ratio.push(exact.input_current / g_value(&terms, x));
    }
    let expected_slope = match f.terms() {
        [first, second, ..] => second.exponent - first.exponent,
        _ => 0.0,
    };
    let dev: Vec<f64> = ratio.iter().map(|r| (r - 1.0).abs()).collect();
    if dev.iter().all(|&d| d <= IDEAL_RATIO_TOL) {
        return Ok(Statement1Check {
            x: x_grid.to_vec(),
            ratio,
            expected_slope,
            fitted_slope: None,
            verdict: Statement1Verdict::Ideal,
        });
    }
    let pts: Vec<(f64, f64)> = x_grid
        .iter()
        .zip(&dev)
        .filter(|(_, &d)| d > IDEAL_RATIO_TOL)
        .map(|(&x, &d)| (x.ln(), d.ln()))
        .collect();
    let fitted_slope = (pts.len() >= 2).then(|| fit_slope(&pts));
    let decreasing = x_grid
        .windows(2)
        .zip(dev.windows(2))
        .all(|(x, d)| x[1] >= x[0] || d[1] <= d[0]);
    let verdict = match fitted_slope {
        Some(s) if decreasing && s > 0.0 => Statement1Verdict::Converges,
        _ => Statement1Verdict::Fails,
    };
    Ok(Statement1Check {
        x: x_grid.to_vec(),
        ratio,
        expected_slope,
        fitted_slope,
        verdict,
    })
}

fn fit_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// Small-drive fit `F(v) ≈ Σ b_e v^e`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeriesFit {
    /// Exponents of the characteristic.
    pub exponents: Vec<f64>,
    /// `b_p` at those exponents.
    pub coefficients: Vec<f64>,
    /// Every exponent in the fit basis, ascending.
    pub basis: Vec<f64>,
    pub basis_coefficients: Vec<f64>,
    pub v_max: f64,
    pub condition: f64,
    /// Largest relative misfit over the grid.
    pub max_relative_residual: f64,
}

impl SeriesFit {
    pub fn coefficient(&self, exponent: f64) -> Option<f64> {
        self.exponents
            .iter()
            .position(|e| (e - exponent).abs() < 1e-9)
            .map(|k| self.coefficients[k])
    }

    /// Ratio of the higher-exponent terms to the leading term of the
    /// fitted characteristic-exponent series at `v`.
    pub fn nonlinearity_degree(&self, v: f64) -> f64 {
        let lead = self.coefficients[0] * v.powf(self.exponents[0]);
        let rest: f64 = self
            .exponents
            .iter()
            .zip(&self.coefficients)
            .skip(1)
            .map(|(e, b)| b * v.powf(*e))
            .sum();
        rest / lead
    }
}

/// Exponents `α₁ + Σ_{p≥2} n_p (α_p − α₁)` of the small-drive expansion,
/// smallest first, always including every exponent of `f`.
pub fn series_basis(f: &Characteristic, size: usize) -> Vec<f64> {
    let exps = f.exponents();
    let base = exps[0];
    let gaps: Vec<f64> = exps[1..].iter().map(|e| e - base).collect();
    let mut basis = vec![base];
    if !gaps.is_empty() {
        // all combinations with Σ n_p ≤ size
        let mut frontier = vec![0.0f64];
        for _ in 0..size {
            let mut next = Vec::new();
            for &acc in &frontier {
                for &g in &gaps {
                    next.push(acc + g);
                }
            }
            basis.extend(next.iter().map(|g| base + g));
            frontier = next;
        }
    }
    basis.sort_by(f64::total_cmp);
    basis.dedup_by(|x, y| (*x - *y).abs() < 1e-9);
    basis.truncate(size.max(1));
    for e in &exps {
        if !basis.iter().any(|b| (b - e).abs() < 1e-9) {
            basis.push(*e);
        }
    }
    basis.sort_by(f64::total_cmp);
    basis
}

/// Default upper end of the fit grid: `0.1 (D₁/D₂)^{1/(α₂−α₁)}`, or 1 for
/// a single term.
pub fn default_series_v_max(f: &Characteristic) -> f64 {
    match f.terms() {
        [first, second, ..] => {
            0.1 * (first.coefficient / second.coefficient)
                .powf(1.0 / (second.exponent - first.exponent))
        }
        _ => 1.0,
    }
}

/// Least-squares series coefficients of `F` on 16 log-spaced drives over
/// `[v_max/100, v_max]`. The basis extends the characteristic's exponents
/// with the next exponents of the expansion so truncation does not bias
/// the reported coefficients.
pub fn extract_series_coeffs(
    c: &Circuit,
    f: &Characteristic,
    v_max: Option<f64>,
) -> Result<SeriesFit> {
    let v_max = v_max.unwrap_or_else(|| default_series_v_max(f));
    if !(v_max.is_finite() && v_max > 0.0) {
        return Err(Error::InvalidParameter(format!("v_max must be positive, got {v_max}")));
    }
    let basis = series_basis(f, SERIES_BASIS_SIZE);
    let lead = basis[0];
    let n = SERIES_GRID_POINTS;
    let grid: Vec<f64> = (0..n)
        .map(|k| v_max * 100f64.powf(k as f64 / (n - 1) as f64 - 1.0))
        .collect();
    let currents = grid
        .iter()
        .map(|&v| nodal::solve_dc(c, f, v).map(|s| s.input_current))
        .collect::<Result<Vec<_>>>()?;

    // Fit F / v^{α₁} against (v/v_max)^{e − α₁}: relative residuals, unit-scaled columns.
    let design = DMatrix::from_fn(n, basis.len(), |i, j| (grid[i] / v_max).powf(basis[j] - lead));
    let rhs = DVector::from_fn(n, |i, _| currents[i] / grid[i].powf(lead));
    let svd = design.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    let condition = smax / smin;
    if !condition.is_finite() || condition > SERIES_MAX_CONDITION {
        return Err(Error::IllConditioned { condition });
    }
    let scaled = svd
        .solve(&rhs, 0.0)
        .map_err(|e| Error::Singular(e.to_string()))?;
    let basis_coefficients: Vec<f64> = basis
        .iter()
        .zip(scaled.iter())
        .map(|(e, b)| b / v_max.powf(e - lead))
        .collect();
    let fitted = &design * &scaled;
    let max_relative_residual = (0..n)
        .map(|i| ((fitted[i] - rhs[i]) / rhs[i]).abs())
        .fold(0.0, f64::max);

    let exponents = f.exponents();
    let coefficients = exponents
        .iter()
        .map(|e| {
            let k = basis
                .iter()
                .position(|b| (b - e).abs() < 1e-9)
                .expect("basis contains every exponent");
            basis_coefficients[k]
        })
        .collect();
    Ok(SeriesFit {
        exponents,
        coefficients,
        basis,
        basis_coefficients,
        v_max,
        condition,
        max_relative_residual,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NodeInterval {
    pub node: String,
    /// `d_k` of the smaller-exponent realization.
    pub d_low_alpha: f64,
    /// `d_k` of the larger-exponent realization.
    pub d_high_alpha: f64,
    /// `d_k(v_in)` of the exact solution over the grid.
    pub values: Vec<f64>,
    pub within: Vec<bool>,
    pub trend: Trend,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntermediateCheck {
    pub v_grid: Vec<f64>,
    pub nodes: Vec<NodeInterval>,
}

impl IntermediateCheck {
    pub fn all_within(&self) -> bool {
        self.nodes.iter().all(|n| n.within.iter().all(|&w| w))
    }

    pub fn node(&self, name: &str) -> Option<&NodeInterval> {
        self.nodes.iter().find(|n| n.node == name)
    }
}

/// Checks that each internal `d_k(v_in)` of a two-term circuit lies between
/// its values in the two power-law realizations.
pub fn intermediate_value_check(
    c: &Circuit,
    f: &Characteristic,
    v_grid: &[f64],
) -> Result<IntermediateCheck> {
    let [lo, hi] = f.terms() else {
        return Err(Error::InvalidParameter(
            "intermediate-value check needs a two-term characteristic".into(),
        ));
    };
    let p_lo = alpha::alpha_solve(c, lo.exponent)?;
    let p_hi = alpha::alpha_solve(c, hi.exponent)?;
    let solutions = v_grid
        .iter()
        .map(|&v| nodal::solve_dc(c, f, v))
        .collect::<Result<Vec<_>>>()?;
    let (a, b) = c.input();
    let nodes = (0..c.node_count())
        .filter(|&k| k != a.0 && k != b.0)
        .map(|k| {
            let values: Vec<f64> = solutions
                .iter()
                .zip(v_grid)
                .map(|(s, v)| s.potentials[k] / v)
                .collect();
            let (x, y) = (p_lo.ratios[k], p_hi.ratios[k]);
            let (min, max) = (x.min(y) - 1e-12, x.max(y) + 1e-12);
            NodeInterval {
                node: c.node_name(crate::NodeId(k)).to_string(),
                d_low_alpha: x,
                d_high_alpha: y,
                within: values.iter().map(|&d| d >= min && d <= max).collect(),
                trend: alpha::classify(&values, 1e-12),
                values,
            }
        })
        .collect();
    Ok(IntermediateCheck {
        v_grid: v_grid.to_vec(),
        nodes,
    })
}

/// `(d_k(v) − d_k(α₁)) / v^{α₂ − α₁}`: the leading small-drive departure of
/// a node ratio from its smaller-exponent value.
pub fn intermediate_growth(c: &Circuit, f: &Characteristic, node: &str, v_in: f64) -> Result<f64> {
    let [lo, hi] = f.terms() else {
        return Err(Error::InvalidParameter(
            "growth coefficient needs a two-term characteristic".into(),
        ));
    };
    let id = c
        .node(node)
        .ok_or_else(|| Error::InvalidParameter(format!("unknown node {node}")))?;
    let p_lo = alpha::alpha_solve(c, lo.exponent)?;
    let exact = nodal::solve_dc(c, f, v_in)?;
    let d = exact.potentials[id.0] / v_in;
    Ok((d - p_lo.ratios[id.0]) / v_in.powf(hi.exponent - lo.exponent))
}

/// One row of the precision table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PrecisionRow {
    pub circuit: String,
    pub exponents: Vec<f64>,
    pub nonlinearity_degree: f64,
    pub error: f64,
}

/// Superposition error of the bridge at `v_in = 1` and of the long ladder
/// without and with its central conductor, `f = v + v^k`.
pub fn precision_table() -> Result<Vec<PrecisionRow>> {
    let bridge_f: Characteristic = "1:1,1:3".parse().expect("valid literal");
    let bridge = report(&crate::circuit::fig_a1(), &bridge_f, 1.0)?;
    let mut rows = vec![PrecisionRow {
        circuit: "fig_a1".into(),
        exponents: bridge_f.exponents(),
        nonlinearity_degree: bridge.nonlinearity_degree,
        error: bridge.eta,
    }];
    let ladder_f: Characteristic = "1:1,1:2".parse().expect("valid literal");
    for central in [false, true] {
        let cmp = ladder::series_comparison(&ladder_f, ladder::REFERENCE_SECTIONS, central)?;
        rows.push(PrecisionRow {
            circuit: if central { "ladder_central" } else { "ladder" }.into(),
            exponents: ladder_f.exponents(),
            nonlinearity_degree: cmp.nonlinearity_degree(ladder::SERIES_RADIUS),
            error: cmp.nonlinear_error(),
        });
    }
    Ok(rows)
}
