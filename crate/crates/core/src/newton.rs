//! Damped Newton iteration for networks of monotone two-terminal elements.
//!
//! Both the nodal and the mesh formulations share one structure: every
//! branch variable is affine in the unknowns, `y = offset + A x`, each branch
//! maps `y` through a monotone law `g`, and the equations are `Aᵀ g(y) = 0`.
//! These are the stationarity conditions of the convex potential
//! `Σ ∫₀^y g`, whose Hessian `Aᵀ diag(g') A` is the Newton matrix.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Default iteration cap, overridable through `ALPHAPORT_MAX_ITERS`.
pub const DEFAULT_MAX_ITERATIONS: usize = 200;

/// Environment variable overriding the Newton iteration cap.
pub const MAX_ITERS_ENV: &str = "ALPHAPORT_MAX_ITERS";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub max_iterations: usize,
    /// Residual tolerance relative to `max(1, f(drive))`.
    pub residual_tol: f64,
    /// Final Newton step tolerance relative to the drive amplitude.
    pub step_tol: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            max_iterations: DEFAULT_MAX_ITERATIONS,
            residual_tol: 1e-12,
            step_tol: 1e-12,
        }
    }
}

impl SolverOptions {
    /// Defaults with the iteration cap taken from `ALPHAPORT_MAX_ITERS` when
    /// it holds a positive integer.
    pub fn from_env() -> Self {
        let mut opts = Self::default();
        if let Some(n) = std::env::var(MAX_ITERS_ENV)
            .ok()
            .and_then(|s| s.trim().parse::<usize>().ok())
            .filter(|&n| n > 0)
        {
            opts.max_iterations = n;
        }
        opts
    }
}

/// Per-branch element law evaluated on the (possibly negative) branch
/// variable: `(g(y), g'(|y|), ∫₀^y g)`.
pub(crate) trait BranchLaw {
    fn eval(&self, branch: usize, y: f64) -> (f64, f64, f64);
}

impl<F: Fn(usize, f64) -> (f64, f64, f64)> BranchLaw for F {
    fn eval(&self, branch: usize, y: f64) -> (f64, f64, f64) {
        self(branch, y)
    }
}

/// `y_s = offset_s + Σ coef · x_j` for each branch.
#[derive(Debug, Clone)]
pub(crate) struct AffineBranches {
    pub unknowns: usize,
    pub rows: Vec<Vec<(usize, f64)>>,
    pub offset: Vec<f64>,
}

impl AffineBranches {
    pub fn branch_values(&self, x: &DVector<f64>) -> Vec<f64> {
        self.rows
            .iter()
            .zip(&self.offset)
            .map(|(row, &o)| o + row.iter().map(|&(j, c)| c * x[j]).sum::<f64>())
            .collect()
    }

    fn residual(&self, law: &dyn BranchLaw, x: &DVector<f64>) -> (DVector<f64>, f64) {
        let y = self.branch_values(x);
        let mut r = DVector::zeros(self.unknowns);
        let mut energy = 0.0;
        for (s, row) in self.rows.iter().enumerate() {
            let (g, _, e) = law.eval(s, y[s]);
            energy += e;
            for &(j, c) in row {
                r[j] += c * g;
            }
        }
        (r, energy)
    }

    /// Newton matrix with slopes floored at `|y| = floor` so sublinear laws
    /// stay finite and superlinear laws stay (barely) positive.
    fn jacobian(&self, law: &dyn BranchLaw, x: &DVector<f64>, floor: f64) -> DMatrix<f64> {
        let y = self.branch_values(x);
        let mut jac = DMatrix::zeros(self.unknowns, self.unknowns);
        for (s, row) in self.rows.iter().enumerate() {
            let ys = if y[s].abs() < floor { floor } else { y[s].abs() };
            let (_, slope, _) = law.eval(s, ys);
            for &(i, ci) in row {
                for &(j, cj) in row {
                    jac[(i, j)] += ci * cj * slope;
                }
            }
        }
        jac
    }
}

/// Solves `J Δ = rhs` for a symmetric positive (semi)definite `J` with
/// Jacobi scaling; adds `1e-9` to the scaled diagonal if the factorization
/// fails.
pub(crate) fn spd_solve(jac: &DMatrix<f64>, rhs: &DVector<f64>) -> Result<DVector<f64>> {
    let n = jac.nrows();
    let max_diag = (0..n).map(|k| jac[(k, k)]).fold(0.0f64, f64::max);
    if !(max_diag > 0.0) || !max_diag.is_finite() {
        return Err(Error::Singular("Newton matrix has no positive diagonal".into()));
    }
    let scale: Vec<f64> = (0..n)
        .map(|k| {
            let d = jac[(k, k)];
            let d = if d > max_diag * 1e-300 { d } else { max_diag * 1e-300 };
            1.0 / d.sqrt()
        })
        .collect();
    let mut scaled = DMatrix::from_fn(n, n, |i, j| jac[(i, j)] * scale[i] * scale[j]);
    let b = DVector::from_fn(n, |i, _| rhs[i] * scale[i]);
    let chol = match scaled.clone().cholesky() {
        Some(c) => c,
        None => {
            for k in 0..n {
                scaled[(k, k)] += 1e-9;
            }
            scaled
                .cholesky()
                .ok_or_else(|| Error::Singular("Newton matrix is not positive definite".into()))?
        }
    };
    let z = chol.solve(&b);
    Ok(DVector::from_fn(n, |i, _| z[i] * scale[i]))
}

#[derive(Debug, Clone)]
pub(crate) struct NewtonOutcome {
    pub x: DVector<f64>,
    pub residual_norm: f64,
    pub iterations: usize,
}

/// Consecutive vanishing steps accepted at the resolution limit.
const STALL_LIMIT: usize = 3;

#[derive(Debug, Clone, Copy)]
pub(crate) struct Tolerances {
    /// Requested `‖r‖∞`.
    pub residual: f64,
    /// Smallest `‖r‖∞` the floating-point unknowns can resolve; accepted
    /// once Newton stalls there.
    pub resolution: f64,
    /// Newton step size counted as converged.
    pub step: f64,
    /// `|y|` below which slopes are evaluated at the floor.
    pub slope_floor: f64,
}

/// Runs damped Newton from `x0`.
///
/// Convergence needs `‖r‖∞ ≤ residual_tol` together with a Newton step of
/// at most `step_tol`; the step test keeps laws with tiny currents (large
/// exponents) from stopping at the starting point.
pub(crate) fn solve(
    system: &AffineBranches,
    law: &dyn BranchLaw,
    x0: DVector<f64>,
    tol: Tolerances,
    max_iterations: usize,
) -> Result<NewtonOutcome> {
    let Tolerances {
        residual: residual_tol,
        resolution: resolution_tol,
        step: step_tol,
        slope_floor,
    } = tol;
    let mut stalled = 0;
    let mut x = x0;
    if system.unknowns == 0 {
        let (r, _) = system.residual(law, &x);
        return Ok(NewtonOutcome {
            residual_norm: r.amax(),
            x,
            iterations: 0,
        });
    }
    let (mut r, mut energy) = system.residual(law, &x);
    for iter in 0..max_iterations {
        let res_inf = r.amax();
        let jac = system.jacobian(law, &x, slope_floor);
        let step = spd_solve(&jac, &(-&r))?;
        let step_inf = step.amax();
        if !step_inf.is_finite() {
            return Err(Error::Singular("non-finite Newton step".into()));
        }
        if step_inf <= step_tol {
            let x_new = &x + &step;
            let (r_new, _) = system.residual(law, &x_new);
            let (best, best_res) = if r_new.amax() <= res_inf {
                (x_new, r_new.amax())
            } else {
                (x.clone(), res_inf)
            };
            if best_res <= residual_tol {
                return Ok(NewtonOutcome {
                    residual_norm: best_res,
                    x: best,
                    iterations: iter + 1,
                });
            }
            stalled = if best_res <= resolution_tol { stalled + 1 } else { 0 };
            if stalled >= STALL_LIMIT {
                return Ok(NewtonOutcome {
                    residual_norm: best_res,
                    x: best,
                    iterations: iter + 1,
                });
            }
        } else {
            stalled = 0;
        }

        // Step halving on the residual norm.
        let norm0 = r.norm();
        let mut accepted = None;
        let mut t = 1.0;
        for _ in 0..40 {
            let trial = &x + t * &step;
            let (rt, et) = system.residual(law, &trial);
            if rt.norm() < norm0 {
                accepted = Some((trial, rt, et));
                break;
            }
            t *= 0.5;
        }
        // Fallback: Armijo backtracking on the convex potential.
        if accepted.is_none() {
            let slope = r.dot(&step);
            let mut t = 1.0;
            for _ in 0..60 {
                let trial = &x + t * &step;
                let (rt, et) = system.residual(law, &trial);
                if et <= energy + 1e-4 * t * slope {
                    accepted = Some((trial, rt, et));
                    break;
                }
                t *= 0.5;
            }
        }
        match accepted {
            Some((xn, rn, en)) => {
                x = xn;
                r = rn;
                energy = en;
            }
            None if res_inf <= resolution_tol.max(residual_tol) => {
                return Ok(NewtonOutcome {
                    residual_norm: res_inf,
                    x,
                    iterations: iter + 1,
                })
            }
            None => {
                return Err(Error::NonConvergence {
                    iterations: iter + 1,
                    residual: res_inf,
                })
            }
        }
    }
    Err(Error::NonConvergence {
        iterations: max_iterations,
        residual: r.amax(),
    })
}

/// Exact solution for the linear law `g(y) = weight_s · y`.
pub(crate) fn linear_solve(system: &AffineBranches, weights: &[f64]) -> Result<DVector<f64>> {
    let law = |s: usize, y: f64| (weights[s] * y, weights[s], 0.5 * weights[s] * y * y);
    let x0 = DVector::zeros(system.unknowns);
    if system.unknowns == 0 {
        return Ok(x0);
    }
    let (r, _) = system.residual(&law, &x0);
    let jac = system.jacobian(&law, &x0, 0.0);
    let step = spd_solve(&jac, &(-r))?;
    Ok(step)
}
