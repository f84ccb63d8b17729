//! The infinite ladder: `λ = v_in / v_cd` from its self-similarity fixed
//! point, the closed-form `φ(α)`, and checks against truncated ladders.

use serde::Serialize;

use crate::alpha;
use crate::characteristic::Characteristic;
use crate::circuit;
use crate::error::{Error, Result};
use crate::superposition::{self, SeriesFit};

/// Sections used when a finite ladder stands in for the infinite one.
pub const REFERENCE_SECTIONS: usize = 100;

/// Upper end of the small-drive series region in units of `D₁/D₂`.
pub const SERIES_RADIUS: f64 = 0.574;

const LOWER_BRACKET: f64 = 1.0 + 1e-9;
const MAX_EXPANSIONS: usize = 60;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LadderResult {
    pub alpha: f64,
    pub lambda: f64,
    /// Includes the `+1` of the central conductor when `central`.
    pub phi: f64,
    pub central: bool,
}

/// `ln[(λ^α − 1)(λ − 1)^α] − ln[(2λ)^α]`, strictly increasing for `λ > 1`.
fn g(lambda: f64, alpha: f64) -> f64 {
    let l = lambda.ln();
    // ln(λ^α − 1) without cancellation near λ = 1 or for large λ^α
    let head = alpha * l + (-(-alpha * l).exp()).ln_1p();
    head + alpha * (lambda - 1.0).ln() - alpha * (2.0 * lambda).ln()
}

fn g_prime(lambda: f64, alpha: f64) -> f64 {
    let la = lambda.powf(alpha);
    alpha * la / (lambda * (la - 1.0)) + alpha / (lambda - 1.0) - alpha / lambda
}

/// Largest root `λ > 1` of `(λ^α − 1)(λ − 1)^α = (2λ)^α`.
pub fn lambda_root(alpha: f64) -> Result<f64> {
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(Error::Domain(format!("alpha must be positive, got {alpha}")));
    }
    let mut lo = LOWER_BRACKET;
    let mut hi = 8.0;
    let mut expansions = 0;
    while g(hi, alpha) < 0.0 {
        lo = hi;
        hi *= 2.0;
        expansions += 1;
        if expansions > MAX_EXPANSIONS {
            return Err(Error::NonConvergence {
                iterations: expansions,
                residual: g(hi, alpha).abs(),
            });
        }
    }
    if g(lo, alpha) > 0.0 {
        return Err(Error::NonConvergence {
            iterations: 0,
            residual: g(lo, alpha),
        });
    }
    while hi - lo > 1e-13 {
        let mid = 0.5 * (lo + hi);
        if g(mid, alpha) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut lambda = 0.5 * (lo + hi);
    for _ in 0..2 {
        let step = g(lambda, alpha) / g_prime(lambda, alpha);
        if step.is_finite() {
            lambda -= step;
        }
    }
    Ok(lambda)
}

/// `((λ − 1) / 2λ)^α`.
pub fn ladder_phi(alpha: f64) -> Result<f64> {
    let lambda = lambda_root(alpha)?;
    Ok(phi_from_lambda(lambda, alpha))
}

fn phi_from_lambda(lambda: f64, alpha: f64) -> f64 {
    ((lambda - 1.0) / (2.0 * lambda)).powf(alpha)
}

pub fn ladder_result(alpha: f64, central: bool) -> Result<LadderResult> {
    let lambda = lambda_root(alpha)?;
    let phi = phi_from_lambda(lambda, alpha) + if central { 1.0 } else { 0.0 };
    Ok(LadderResult {
        alpha,
        lambda,
        phi,
        central,
    })
}

/// Coefficients `D_p (φ(α_p) + [central])` of `G` for the infinite ladder.
pub fn ladder_g_coeffs(f: &Characteristic, central: bool) -> Result<Vec<(f64, f64)>> {
    f.terms()
        .iter()
        .map(|t| {
            let r = ladder_result(t.exponent, central)?;
            Ok((t.exponent, t.coefficient * r.phi))
        })
        .collect()
}

/// `φ_N` of the truncated ladder for every `N`.
pub fn truncation_convergence(alpha: f64, sections: &[usize]) -> Result<Vec<f64>> {
    sections
        .iter()
        .map(|&n| {
            let c = circuit::ladder(n, false)?;
            Ok(alpha::alpha_solve(&c, alpha)?.phi)
        })
        .collect()
}

/// The exact small-drive series of a truncated ladder compared with `G`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeriesComparison {
    pub central: bool,
    pub fit: SeriesFit,
    /// `(α_p, G coefficient)`.
    pub g_coeffs: Vec<(f64, f64)>,
    /// `|b_p − G_p| / b_p` per exponent.
    pub coefficient_errors: Vec<f64>,
}

impl SeriesComparison {
    /// Relative error of the highest-exponent coefficient.
    pub fn nonlinear_error(&self) -> f64 {
        *self.coefficient_errors.last().expect("at least one term")
    }

    /// Nonlinear over linear part of the fitted series at `v`.
    pub fn nonlinearity_degree(&self, v: f64) -> f64 {
        self.fit.nonlinearity_degree(v)
    }
}

/// Fits the exact series of `ladder(sections, central)` inside the series
/// region `v < 0.574 D₁/D₂` and compares it with the infinite-ladder `G`.
pub fn series_comparison(
    f: &Characteristic,
    sections: usize,
    central: bool,
) -> Result<SeriesComparison> {
    let c = circuit::ladder(sections, central)?;
    let v_max = match f.terms() {
        [first, second, ..] => SERIES_RADIUS * first.coefficient / second.coefficient,
        _ => 1.0,
    };
    let fit = superposition::extract_series_coeffs(&c, f, Some(v_max))?;
    let g_coeffs = ladder_g_coeffs(f, central)?;
    let coefficient_errors = fit
        .coefficients
        .iter()
        .zip(&g_coeffs)
        .map(|(b, (_, g))| (b - g).abs() / b)
        .collect();
    Ok(SeriesComparison {
        central,
        fit,
        g_coeffs,
        coefficient_errors,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lambda_equation(lambda: f64, alpha: f64) -> f64 {
        (lambda.powf(alpha) - 1.0) * (lambda - 1.0).powf(alpha) / (2.0 * lambda).powf(alpha)
    }

    #[test]
    fn linear_root() {
        let l = lambda_root(1.0).unwrap();
        assert!((l - (2.0 + 3f64.sqrt())).abs() < 1e-12);
        assert!((ladder_phi(1.0).unwrap() - 1.0 / (1.0 + 3f64.sqrt())).abs() < 1e-12);
    }

    #[test]
    fn cubic_and_quadratic() {
        let l3 = lambda_root(3.0).unwrap();
        assert!((l3 - 3.024688).abs() < 1e-6, "{l3}");
        assert!((ladder_phi(3.0).unwrap() - 0.03749).abs() < 1e-5);
        let l2 = lambda_root(2.0).unwrap();
        assert!((l2 - 3.1119).abs() < 2e-4, "{l2}");
        assert!((ladder_phi(2.0).unwrap() - 0.115146).abs() < 1e-6);
    }

    #[test]
    fn roots_satisfy_equation() {
        for alpha in [0.2, 0.5, 1.0, 1.7, 2.0, 3.0, 8.0, 16.0, 40.0] {
            let l = lambda_root(alpha).unwrap();
            assert!(l > 1.0);
            assert!((lambda_equation(l, alpha) - 1.0).abs() < 1e-12, "alpha {alpha}");
        }
    }

    #[test]
    fn lambda_monotone_toward_three() {
        let grid = [1.0, 1.5, 2.0, 3.0, 4.0, 6.0, 8.0, 16.0];
        let ls: Vec<f64> = grid.iter().map(|&a| lambda_root(a).unwrap()).collect();
        assert!(ls.windows(2).all(|w| w[1] < w[0]), "{ls:?}");
        assert!((ls.last().unwrap() - 3.0).abs() < 0.05);
    }

    #[test]
    fn g_coeffs() {
        let f: Characteristic = "1:1,1:2".parse().unwrap();
        let plain = ladder_g_coeffs(&f, false).unwrap();
        let central = ladder_g_coeffs(&f, true).unwrap();
        assert!((plain[0].1 - 0.3660254).abs() < 1e-7);
        assert!((plain[1].1 - 0.115146).abs() < 1e-6);
        assert!((central[0].1 - 1.3660254).abs() < 1e-7);
        assert!((central[1].1 - 1.115146).abs() < 1e-6);
        let f: Characteristic = "2:1,0.5:3".parse().unwrap();
        let c = ladder_g_coeffs(&f, false).unwrap();
        assert!((c[1].1 - 0.5 * 0.03749).abs() < 1e-5);
    }

    #[test]
    fn invalid_alpha() {
        assert!(lambda_root(0.0).is_err());
        assert!(lambda_root(f64::NAN).is_err());
    }

    #[test]
    fn truncation_linear() {
        // continued fraction g_{k+1} = (1 + g_k) / (3 + 2 g_k) for per-section conductance
        let mut g = 1.0;
        for _ in 1..100 {
            g = (1.0 + g) / (3.0 + 2.0 * g);
        }
        let phi = truncation_convergence(1.0, &[100]).unwrap()[0];
        assert!((phi - g).abs() < 1e-10);
        assert!((phi - 0.3660254).abs() < 1e-7);
    }

    #[test]
    fn truncation_converges() {
        let target = ladder_phi(2.0).unwrap();
        let phis = truncation_convergence(2.0, &[5, 10, 20, 40]).unwrap();
        let gaps: Vec<f64> = phis.iter().map(|p| (p - target).abs()).collect();
        assert!(gaps.windows(2).all(|w| w[1] < w[0] || w[1] < 1e-15), "{gaps:?}");
        assert!(gaps[0] > gaps[1]);
        let phi3 = truncation_convergence(3.0, &[20]).unwrap()[0];
        assert!((phi3 - ladder_phi(3.0).unwrap()).abs() < 1e-6);
    }

    #[test]
    fn quadratic_series_of_long_ladder() {
        let f: Characteristic = "1:1,1:2".parse().unwrap();
        let plain = series_comparison(&f, REFERENCE_SECTIONS, false).unwrap();
        assert!((plain.fit.coefficients[0] - 0.3660254).abs() < 1e-5);
        assert!((plain.fit.coefficients[1] - 0.1196).abs() < 1e-3);
        assert!((plain.nonlinear_error() - 0.037).abs() < 0.003);
        assert!((plain.nonlinearity_degree(SERIES_RADIUS) - 0.188).abs() < 0.002);
        let central = series_comparison(&f, REFERENCE_SECTIONS, true).unwrap();
        assert!((central.nonlinear_error() - 0.004).abs() < 0.001);
        assert!((central.nonlinearity_degree(SERIES_RADIUS) - 0.47).abs() < 0.01);
    }
}
