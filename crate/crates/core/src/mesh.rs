//! Resistive form of the one-port: elements `v = f(i)`, a current source
//! at the port and mesh currents as unknowns.
//!
//! Branch currents are `i_in` along a fixed `a → b` path plus the signed
//! sum of the mesh currents through the branch; the equations are KVL
//! around every mesh.

use std::collections::{BTreeMap, VecDeque};

use nalgebra::DMatrix;
use serde::Serialize;

use crate::alpha;
use crate::characteristic::Characteristic;
use crate::circuit::{BranchRef, Circuit, Mesh};
use crate::error::{Error, Result};
use crate::newton::{self, AffineBranches, SolverOptions};
use crate::nodal;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeshSolution {
    pub i_in: f64,
    pub mesh_currents: BTreeMap<String, f64>,
    /// Signed current along each branch's `from → to` orientation.
    pub branch_currents: Vec<f64>,
    /// Signed voltage drop along each branch's orientation.
    pub branch_voltages: Vec<f64>,
    pub input_voltage: f64,
    /// `v_in / (D i_in^α)` when the characteristic is a single power law.
    pub phi_meshes: Option<f64>,
    pub residual_norm: f64,
    pub iterations: usize,
}

impl MeshSolution {
    /// Largest KVL mismatch over the meshes of `c`.
    pub fn max_kvl_residual(&self, c: &Circuit) -> f64 {
        c.meshes()
            .iter()
            .map(|m| {
                m.branches
                    .iter()
                    .map(|r| r.sign() * self.branch_voltages[r.branch])
                    .sum::<f64>()
                    .abs()
            })
            .fold(0.0, f64::max)
    }
}

/// Checks that every mesh is a closed walk, no branch lies in more than two
/// meshes, and the meshes form a basis of the cycle space.
pub fn validate_mesh_basis(c: &Circuit) -> Result<()> {
    let meshes = c.meshes();
    let nb = c.branches().len();
    let expected = nb + 1 - c.node_count();
    if meshes.len() != expected {
        return Err(Error::InvalidMeshBasis(format!(
            "{} meshes given, the circuit has {expected} independent loops",
            meshes.len()
        )));
    }
    let mut uses = vec![0usize; nb];
    for m in meshes {
        if m.branches.is_empty() {
            return Err(Error::InvalidMeshBasis(format!("mesh {} is empty", m.name)));
        }
        let mut net = vec![0.0f64; c.node_count()];
        for r in &m.branches {
            let br = c
                .branches()
                .get(r.branch)
                .ok_or_else(|| Error::InvalidMeshBasis(format!("mesh {}: no branch {}", m.name, r.branch + 1)))?;
            uses[r.branch] += 1;
            net[br.from.0] -= r.sign();
            net[br.to.0] += r.sign();
        }
        if net.iter().any(|&x| x != 0.0) {
            return Err(Error::InvalidMeshBasis(format!("mesh {} is not closed", m.name)));
        }
    }
    if let Some(s) = uses.iter().position(|&u| u > 2) {
        return Err(Error::InvalidMeshBasis(format!(
            "branch {} lies in {} meshes",
            s + 1,
            uses[s]
        )));
    }
    if !meshes.is_empty() {
        let m = DMatrix::from_fn(nb, meshes.len(), |s, j| mesh_coefficient(&meshes[j], s));
        let sv = m.singular_values();
        if sv.min() <= 1e-9 * sv.max() {
            return Err(Error::InvalidMeshBasis("meshes are linearly dependent".into()));
        }
    }
    Ok(())
}

fn mesh_coefficient(m: &Mesh, branch: usize) -> f64 {
    m.branches
        .iter()
        .filter(|r| r.branch == branch)
        .map(BranchRef::sign)
        .sum()
}

/// Shortest `a → b` branch path (breadth-first, lowest branch index first).
pub fn input_path(c: &Circuit) -> Result<Vec<BranchRef>> {
    let (a, b) = c.input();
    let adj = c.adjacency();
    let mut prev: Vec<Option<(usize, usize)>> = vec![None; c.node_count()];
    let mut seen = vec![false; c.node_count()];
    seen[a.0] = true;
    let mut queue = VecDeque::from([a.0]);
    while let Some(n) = queue.pop_front() {
        let mut next: Vec<_> = adj[n].iter().map(|&(m, s)| (s, m.0)).collect();
        next.sort_unstable();
        for (s, m) in next {
            if !seen[m] {
                seen[m] = true;
                prev[m] = Some((n, s));
                queue.push_back(m);
            }
        }
    }
    if !seen[b.0] {
        return Err(Error::InvalidCircuit("no path between the port nodes".into()));
    }
    let mut path = Vec::new();
    let mut at = b.0;
    while let Some((p, s)) = prev[at] {
        path.push(BranchRef {
            branch: s,
            reversed: c.branches()[s].from.0 != p,
        });
        at = p;
    }
    path.reverse();
    Ok(path)
}

fn mesh_system(c: &Circuit, path: &[BranchRef], i_in: f64) -> AffineBranches {
    let nb = c.branches().len();
    let mut offset = vec![0.0; nb];
    for r in path {
        offset[r.branch] += r.sign() * i_in;
    }
    let mut rows = vec![Vec::new(); nb];
    for (j, m) in c.meshes().iter().enumerate() {
        for s in 0..nb {
            let k = mesh_coefficient(m, s);
            if k != 0.0 {
                rows[s].push((j, k));
            }
        }
    }
    AffineBranches {
        unknowns: c.meshes().len(),
        rows,
        offset,
    }
}

/// Solves KVL on the circuit's mesh basis with resistive elements
/// `v = f(i)` and the current source `i_in` at the port.
pub fn mesh_solve(c: &Circuit, f: &Characteristic, i_in: f64) -> Result<MeshSolution> {
    mesh_solve_with(c, f, i_in, &SolverOptions::from_env())
}

pub fn mesh_solve_with(
    c: &Circuit,
    f: &Characteristic,
    i_in: f64,
    opts: &SolverOptions,
) -> Result<MeshSolution> {
    if !(i_in.is_finite() && i_in > 0.0) {
        return Err(Error::Domain(format!("i_in must be positive, got {i_in}")));
    }
    c.ensure_valid()?;
    validate_mesh_basis(c)?;
    let path = input_path(c)?;
    let system = mesh_system(c, &path, i_in);
    let w: Vec<f64> = c.branches().iter().map(|b| b.multiplicity as f64).collect();
    let inv_w: Vec<f64> = w.iter().map(|x| 1.0 / x).collect();

    let mut x = newton::linear_solve(&system, &inv_w)?;
    let mut residual_norm = 0.0;
    let mut iterations = 0;
    for stage in nodal::continuation_stages(f) {
        let law = |s: usize, y: f64| {
            let m = y.abs() / w[s];
            (
                stage.eval_odd(y / w[s]),
                stage.newton_slope(m) / w[s],
                w[s] * stage.integral(m),
            )
        };
        let out = newton::solve(
            &system,
            &law,
            x,
            nodal::tolerances(&stage, i_in, opts, 1.0),
            opts.max_iterations,
        )?;
        x = out.x;
        residual_norm = out.residual_norm;
        iterations += out.iterations;
    }

    let branch_currents = system.branch_values(&x);
    let branch_voltages: Vec<f64> = branch_currents
        .iter()
        .zip(&w)
        .map(|(i, w)| f.eval_odd(i / w))
        .collect();
    let input_voltage: f64 = path
        .iter()
        .map(|r| r.sign() * branch_voltages[r.branch])
        .sum();
    let phi_meshes = match f.terms() {
        [t] => Some(input_voltage / (t.coefficient * i_in.powf(t.exponent))),
        _ => None,
    };
    Ok(MeshSolution {
        i_in,
        mesh_currents: c
            .meshes()
            .iter()
            .zip(x.iter())
            .map(|(m, &j)| (m.name.clone(), j))
            .collect(),
        branch_currents,
        branch_voltages,
        input_voltage,
        phi_meshes,
        residual_norm,
        iterations,
    })
}

/// `φ_meshes(α)` of the circuit's resistive `v = i^α` realization.
pub fn phi_meshes(c: &Circuit, alpha: f64) -> Result<f64> {
    let f = Characteristic::power_law(1.0, alpha)?;
    Ok(mesh_solve(c, &f, 1.0)?
        .phi_meshes
        .expect("power law has one term"))
}

/// `1 / [φ_nodes(1/α)]^α`.
pub fn phi_meshes_from_nodes(
    phi_nodes_at: impl Fn(f64) -> Result<f64>,
    alpha: f64,
) -> Result<f64> {
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(Error::Domain(format!("alpha must be positive, got {alpha}")));
    }
    Ok(phi_nodes_at(1.0 / alpha)?.powf(-alpha))
}

/// [`phi_meshes_from_nodes`] with `φ_nodes` from the conductive α-test on
/// the same topology.
pub fn phi_meshes_via_nodes(c: &Circuit, alpha: f64) -> Result<f64> {
    phi_meshes_from_nodes(|a| Ok(alpha::alpha_solve(c, a)?.phi), alpha)
}

/// Mesh currents and `φ` of the resistive bridge in closed form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BridgeClosedForm {
    pub alpha: f64,
    /// `i₁ / i_in`.
    pub i1_ratio: f64,
    /// `i₂ / i_in = (i₁ / i_in) / (1 + 2^{1/α})`.
    pub i2_ratio: f64,
    pub phi: f64,
}

pub fn phi_b6_closed_form(alpha: f64) -> BridgeClosedForm {
    let r = 2f64.powf(1.0 / alpha);
    let q = (1.0 + r).powf(alpha);
    let i1_ratio = 1.0 / (1.0 + (1.0 + 2.0 / q).powf(1.0 / alpha));
    let phi = (2.0 + q) / (1.0 + r + (2.0 + q).powf(1.0 / alpha)).powf(alpha);
    BridgeClosedForm {
        alpha,
        i1_ratio,
        i2_ratio: i1_ratio / (1.0 + r),
        phi,
    }
}

/// A power-law element with its port coefficient, in either formulation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PowerLawPort {
    pub alpha: f64,
    pub coefficient: f64,
    pub phi: f64,
}

/// Converts between the conductive and resistive descriptions:
/// `α → 1/α`, `D → D^{−α'}` with `α'` the new exponent, and
/// `φ → [φ(1/α)]^{−α}`. `phi_at` gives the source formulation's `φ`.
pub fn dual_port(
    coefficient: f64,
    alpha: f64,
    phi_at: impl Fn(f64) -> Result<f64>,
) -> Result<PowerLawPort> {
    if !(coefficient.is_finite() && coefficient > 0.0) {
        return Err(Error::Domain(format!("coefficient must be positive, got {coefficient}")));
    }
    let new_alpha = 1.0 / alpha;
    Ok(PowerLawPort {
        alpha: new_alpha,
        coefficient: coefficient.powf(-new_alpha),
        phi: phi_meshes_from_nodes(phi_at, new_alpha)?,
    })
}
