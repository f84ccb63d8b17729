//! Exact DC solution of a circuit of identical conductors driven by a
//! voltage source across its port.

use std::collections::BTreeMap;

use nalgebra::DVector;
use serde::Serialize;

use crate::characteristic::{Characteristic, Term};
use crate::circuit::{Circuit, NodeId};
use crate::error::{Error, Result};
use crate::newton::{self, AffineBranches, SolverOptions, Tolerances};

/// Nodal DC operating point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DcSolution {
    pub v_in: f64,
    /// Node potentials in circuit node order; `b` is at 0, `a` at `v_in`.
    pub potentials: Vec<f64>,
    /// Nonnegative drop of each branch along its stored orientation.
    pub branch_voltages: Vec<f64>,
    /// Nonnegative current of each branch (all parallel conductors).
    pub branch_currents: Vec<f64>,
    /// Branches whose declared orientation opposes the solution's current.
    pub flipped: Vec<bool>,
    /// Input current summed over the branches incident to `b`.
    pub input_current: f64,
    /// The same current summed over the branches incident to `a`.
    pub input_current_a_side: f64,
    pub residual_norm: f64,
    pub iterations: usize,
}

impl DcSolution {
    pub fn potential(&self, c: &Circuit, name: &str) -> Option<f64> {
        c.node(name).map(|id| self.potentials[id.0])
    }

    /// Potentials keyed by node name.
    pub fn potential_map(&self, c: &Circuit) -> BTreeMap<String, f64> {
        c.nodes()
            .iter()
            .cloned()
            .zip(self.potentials.iter().copied())
            .collect()
    }

    /// `v_in · i_in`.
    pub fn input_power(&self) -> f64 {
        self.v_in * self.input_current
    }

    /// `Σ_s v_s i_s` over all branches.
    pub fn dissipated_power(&self) -> f64 {
        self.branch_voltages
            .iter()
            .zip(&self.branch_currents)
            .map(|(v, i)| v * i)
            .sum()
    }

    /// Largest KCL imbalance over internal nodes, recomputed from the
    /// stored branch currents.
    pub fn max_kcl_residual(&self, c: &Circuit) -> f64 {
        let (a, b) = c.input();
        let mut net = vec![0.0; c.node_count()];
        for (s, br) in c.branches().iter().enumerate() {
            let (from, to) = if self.flipped[s] {
                (br.to, br.from)
            } else {
                (br.from, br.to)
            };
            net[from.0] += self.branch_currents[s];
            net[to.0] -= self.branch_currents[s];
        }
        net.iter()
            .enumerate()
            .filter(|&(k, _)| k != a.0 && k != b.0)
            .map(|(_, x)| x.abs())
            .fold(0.0, f64::max)
    }
}

/// Maps internal nodes to unknown indices.
fn internal_index(c: &Circuit) -> Vec<Option<usize>> {
    let (a, b) = c.input();
    let mut next = 0;
    (0..c.node_count())
        .map(|k| {
            if k == a.0 || k == b.0 {
                None
            } else {
                next += 1;
                Some(next - 1)
            }
        })
        .collect()
}

fn nodal_system(c: &Circuit, v_in: f64) -> (AffineBranches, Vec<Option<usize>>) {
    let index = internal_index(c);
    let (a, _) = c.input();
    let known = |n: NodeId| if n == a { v_in } else { 0.0 };
    let mut rows = Vec::with_capacity(c.branches().len());
    let mut offset = Vec::with_capacity(c.branches().len());
    for br in c.branches() {
        let mut row = Vec::new();
        let mut o = 0.0;
        match index[br.from.0] {
            Some(j) => row.push((j, 1.0)),
            None => o += known(br.from),
        }
        match index[br.to.0] {
            Some(j) => row.push((j, -1.0)),
            None => o -= known(br.to),
        }
        rows.push(row);
        offset.push(o);
    }
    let unknowns = index.iter().flatten().count();
    (
        AffineBranches {
            unknowns,
            rows,
            offset,
        },
        index,
    )
}

fn potentials_from(c: &Circuit, index: &[Option<usize>], x: &DVector<f64>, v_in: f64) -> Vec<f64> {
    let (a, _) = c.input();
    (0..c.node_count())
        .map(|k| match index[k] {
            Some(j) => x[j],
            None if k == a.0 => v_in,
            None => 0.0,
        })
        .collect()
}

/// Exponent caps used to reach large exponents by continuation.
pub(crate) fn continuation_stages(f: &Characteristic) -> Vec<Characteristic> {
    let max = f.terms().last().expect("non-empty").exponent;
    let mut stages = Vec::new();
    let mut cap = 4.0;
    while cap < max {
        let capped = f
            .terms()
            .iter()
            .map(|t| Term {
                coefficient: t.coefficient,
                exponent: t.exponent.min(cap),
            })
            .collect::<Vec<_>>();
        stages.push(Characteristic::new(capped).expect("valid terms"));
        cap *= 2.0;
    }
    stages.push(f.clone());
    stages
}

/// Newton tolerances for the drive `drive`: residual `residual_tol ·
/// max(1, f(drive))`, step and slope floor relative to the drive, and the
/// current resolution `f(ε · drive)` of the floating-point unknowns. The
/// resolution only matters for sublinear terms, whose current is not
/// Lipschitz in the voltage at zero drop.
pub(crate) fn tolerances(
    f: &Characteristic,
    drive: f64,
    opts: &SolverOptions,
    max_weight: f64,
) -> Tolerances {
    Tolerances {
        residual: opts.residual_tol * f.eval_unchecked(drive).max(1.0),
        resolution: 64.0 * max_weight * f.eval_unchecked(f64::EPSILON * drive),
        step: opts.step_tol * drive,
        slope_floor: 1e-12 * drive,
    }
}

/// Solves KCL at every internal node for the port drive `v_in > 0`.
pub fn solve_dc(c: &Circuit, f: &Characteristic, v_in: f64) -> Result<DcSolution> {
    solve_dc_with(c, f, v_in, &SolverOptions::from_env())
}

pub fn solve_dc_with(
    c: &Circuit,
    f: &Characteristic,
    v_in: f64,
    opts: &SolverOptions,
) -> Result<DcSolution> {
    if !(v_in.is_finite() && v_in > 0.0) {
        return Err(Error::Domain(format!("v_in must be positive, got {v_in}")));
    }
    c.ensure_valid()?;
    let (system, index) = nodal_system(c, v_in);
    let weights: Vec<f64> = c.branches().iter().map(|b| b.multiplicity as f64).collect();

    let max_weight = weights.iter().copied().fold(1.0, f64::max);

    let mut x = newton::linear_solve(&system, &weights)?;
    let mut residual_norm = 0.0;
    let mut iterations = 0;
    for stage in continuation_stages(f) {
        let law = |s: usize, y: f64| {
            let w = weights[s];
            let m = y.abs();
            (w * stage.eval_odd(y), w * stage.newton_slope(m), w * stage.integral(m))
        };
        let out = newton::solve(
            &system,
            &law,
            x,
            tolerances(&stage, v_in, opts, max_weight),
            opts.max_iterations,
        )?;
        x = out.x;
        residual_norm = out.residual_norm;
        iterations += out.iterations;
    }

    let potentials = potentials_from(c, &index, &x, v_in);
    Ok(assemble(c, f, v_in, potentials, residual_norm, iterations))
}

fn assemble(
    c: &Circuit,
    f: &Characteristic,
    v_in: f64,
    potentials: Vec<f64>,
    residual_norm: f64,
    iterations: usize,
) -> DcSolution {
    let n = c.branches().len();
    let mut branch_voltages = Vec::with_capacity(n);
    let mut branch_currents = Vec::with_capacity(n);
    let mut flipped = Vec::with_capacity(n);
    for br in c.branches() {
        let drop = potentials[br.from.0] - potentials[br.to.0];
        flipped.push(drop < 0.0);
        let v = drop.abs();
        branch_voltages.push(v);
        branch_currents.push(br.multiplicity as f64 * f.eval_unchecked(v));
    }
    let input_current = port_sum(c, f, &potentials, PortSide::B);
    let input_current_a_side = port_sum(c, f, &potentials, PortSide::A);
    DcSolution {
        v_in,
        potentials,
        branch_voltages,
        branch_currents,
        flipped,
        input_current,
        input_current_a_side,
        residual_norm,
        iterations,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PortSide {
    A,
    B,
}

/// Signed current flowing out of `a` (or into `b`) through incident
/// branches, using the odd extension for reversed drops.
fn port_sum(c: &Circuit, f: &Characteristic, potentials: &[f64], side: PortSide) -> f64 {
    let (a, b) = c.input();
    let mut total = 0.0;
    for br in c.branches() {
        let w = br.multiplicity as f64;
        let drop = potentials[br.from.0] - potentials[br.to.0];
        let i = w * f.eval_odd(drop);
        total += match side {
            PortSide::B if br.to == b => i,
            PortSide::B if br.from == b => -i,
            PortSide::A if br.from == a => i,
            PortSide::A if br.to == a => -i,
            _ => 0.0,
        };
    }
    total
}

/// `F(v_in) = Σ_{s''} w f(v_{s''})` over branches incident to `b`.
pub fn input_current_from_potentials(c: &Circuit, f: &Characteristic, potentials: &[f64]) -> f64 {
    port_sum(c, f, potentials, PortSide::B)
}

/// The same input current summed over branches incident to `a`.
pub fn input_current_at(
    c: &Circuit,
    f: &Characteristic,
    potentials: &[f64],
    side: PortSide,
) -> f64 {
    port_sum(c, f, potentials, side)
}

/// Term-wise split of the port current: entry `p` is the current carried by
/// the `p`-th term of `f` through the branches incident to `side`.
pub fn term_currents(
    c: &Circuit,
    f: &Characteristic,
    potentials: &[f64],
    side: PortSide,
) -> Vec<f64> {
    (0..f.terms().len())
        .map(|p| {
            let term = Characteristic::new([f.terms()[p]]).expect("valid term");
            port_sum(c, &term, potentials, side)
        })
        .collect()
}

/// Total co-content `Σ_s w ∫₀^{|v_s|} f`.
pub fn co_content(c: &Circuit, f: &Characteristic, potentials: &[f64]) -> f64 {
    c.branches()
        .iter()
        .map(|br| {
            let v = (potentials[br.from.0] - potentials[br.to.0]).abs();
            br.multiplicity as f64 * f.integral(v)
        })
        .sum()
}

/// Potentials of the all-unit-conductance (linear) circuit at `v_in`.
pub fn linear_potentials(c: &Circuit, v_in: f64) -> Result<Vec<f64>> {
    c.ensure_valid()?;
    let (system, index) = nodal_system(c, v_in);
    let weights: Vec<f64> = c.branches().iter().map(|b| b.multiplicity as f64).collect();
    let x = newton::linear_solve(&system, &weights)?;
    Ok(potentials_from(c, &index, &x, v_in))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{fig4, fig_a1, Circuit};

    fn f13() -> Characteristic {
        "1:1,1:3".parse().unwrap()
    }

    #[test]
    fn fig_a1_exact_solution() {
        let c = fig_a1();
        let sol = solve_dc(&c, &f13(), 1.0).unwrap();
        let vo = sol.potential(&c, "o").unwrap();
        assert!((vo - 0.4350635).abs() < 1e-7, "{vo}");
        assert!((sol.input_current - 2.7452378).abs() < 1e-7);
        // o-x-b divides v_o evenly
        assert!((sol.potential(&c, "x").unwrap() - vo / 2.0).abs() < 1e-12);
        assert!(sol.max_kcl_residual(&c) < 1e-12);
        // 17 v^3 - 24 v^2 + 44 v - 16 = 0 at the solution
        let cubic = 17.0 * vo.powi(3) - 24.0 * vo * vo + 44.0 * vo - 16.0;
        assert!(cubic.abs() < 1e-12);
    }

    #[test]
    fn fig4_potentials_independent_of_f() {
        let c = fig4();
        for f in ["1:1", "1:1,1:3", "0.2:0.5,3:2.5", "1:7"] {
            let sol = solve_dc(&c, &f.parse().unwrap(), 1.0).unwrap();
            for (n, want) in [("c", 2.0 / 3.0), ("e", 2.0 / 3.0), ("d", 1.0 / 3.0), ("f", 1.0 / 3.0)] {
                let got = sol.potential(&c, n).unwrap();
                assert!((got - want).abs() < 1e-12, "{f}: {n} = {got}");
            }
            // cross branches c-e (7) and d-f (8) have no drop
            assert!(sol.branch_voltages[7] < 1e-12 && sol.branch_voltages[8] < 1e-12);
        }
    }

    #[test]
    fn d_scaling_doubles_current() {
        let c = fig_a1();
        let single = solve_dc(&c, &f13(), 1.0).unwrap();
        let double = solve_dc(&c, &"2:1,2:3".parse().unwrap(), 1.0).unwrap();
        assert!((double.input_current - 2.0 * 2.7452378).abs() < 2e-7);
        assert!((double.input_current - 2.0 * single.input_current).abs() < 1e-12);
    }

    #[test]
    fn both_port_sums_agree() {
        let c = fig_a1();
        let sol = solve_dc(&c, &f13(), 1.0).unwrap();
        let vo = sol.potential(&c, "o").unwrap();
        let f = f13();
        let a_side_oracle = f.eval(1.0).unwrap() + f.eval(1.0 - vo).unwrap();
        let b_side = f.eval(1.0).unwrap() + f.eval(vo).unwrap() + f.eval(vo / 2.0).unwrap();
        assert!((a_side_oracle - b_side).abs() < 1e-10);
        assert!((sol.input_current - b_side).abs() < 1e-12);
        assert!((sol.input_current_a_side - a_side_oracle).abs() < 1e-12);
    }

    #[test]
    fn single_branch_port() {
        let c = Circuit::new(("a", "b"), &[("a", "b", 1)]).unwrap();
        let f = Characteristic::power_law(1.0, 2.0).unwrap();
        let sol = solve_dc(&c, &f, 3.0).unwrap();
        assert_eq!(sol.input_current, 9.0);
        assert_eq!(input_current_from_potentials(&c, &f, &sol.potentials), 9.0);
    }

    #[test]
    fn fig4_input_current_formula() {
        let c = fig4();
        for m in [1.0, 2.0, 3.5] {
            let f = Characteristic::power_law(1.0, m).unwrap();
            let sol = solve_dc(&c, &f, 1.0).unwrap();
            let want = 1.0 + 2.0 * (1.0f64 / 3.0).powf(m);
            assert!((sol.input_current - want).abs() < 1e-12);
        }
    }

    #[test]
    fn co_content_examples() {
        let c = Circuit::new(("a", "b"), &[("a", "b", 1)]).unwrap();
        let lin = Characteristic::power_law(1.0, 1.0).unwrap();
        assert_eq!(co_content(&c, &lin, &[1.0, 0.0]), 0.5);
        let cube = Characteristic::power_law(1.0, 3.0).unwrap();
        assert_eq!(co_content(&c, &cube, &[2.0, 0.0]), 4.0);
    }

    #[test]
    fn solution_minimizes_co_content_on_grid() {
        // oracle: brute-force grid over the two internal potentials of fig_a1
        let c = fig_a1();
        let f = f13();
        let sol = solve_dc(&c, &f, 1.0).unwrap();
        let (io, ix) = (c.node("o").unwrap().0, c.node("x").unwrap().0);
        let mut best = (f64::INFINITY, 0.0, 0.0);
        let n = 400;
        for i in 0..=n {
            for j in 0..=n {
                let mut p = sol.potentials.clone();
                p[io] = i as f64 / n as f64;
                p[ix] = j as f64 / n as f64;
                let e = co_content(&c, &f, &p);
                if e < best.0 {
                    best = (e, p[io], p[ix]);
                }
            }
        }
        assert!((best.1 - sol.potentials[io]).abs() <= 1.0 / n as f64);
        assert!((best.2 - sol.potentials[ix]).abs() <= 1.0 / n as f64);
        assert!(co_content(&c, &f, &sol.potentials) <= best.0 + 1e-15);
    }

    #[test]
    fn power_balance_and_orientation() {
        // reversed declaration of the o-b branch must be flipped, not rejected
        let c = Circuit::new(
            ("a", "b"),
            &[("a", "b", 1), ("a", "o", 1), ("b", "o", 2), ("o", "x", 1), ("x", "b", 1)],
        )
        .unwrap();
        let sol = solve_dc(&c, &f13(), 1.3).unwrap();
        assert!(sol.flipped[2]);
        assert!(sol.branch_voltages.iter().all(|&v| v >= 0.0));
        let p_in = sol.input_power();
        assert!((p_in - sol.dissipated_power()).abs() <= 1e-9 * p_in);
    }

    #[test]
    fn sublinear_exponents_converge() {
        let c = fig_a1();
        let f = Characteristic::power_law(1.0, 0.5).unwrap();
        let sol = solve_dc(&c, &f, 1.0).unwrap();
        assert!(sol.max_kcl_residual(&c) < 1e-11);
    }

    #[test]
    fn invalid_inputs() {
        let c = fig_a1();
        assert!(matches!(solve_dc(&c, &f13(), 0.0), Err(Error::Domain(_))));
        let bad = Circuit::new(("a", "a"), &[("a", "c", 1)]).unwrap();
        assert!(matches!(solve_dc(&bad, &f13(), 1.0), Err(Error::InvalidCircuit(_))));
    }

    #[test]
    fn iteration_cap_is_enforced() {
        let opts = SolverOptions {
            max_iterations: 1,
            ..SolverOptions::default()
        };
        let err = solve_dc_with(&fig_a1(), &"1:1,1:9".parse().unwrap(), 3.0, &opts).unwrap_err();
        assert!(matches!(err, Error::NonConvergence { .. }));
    }
}
