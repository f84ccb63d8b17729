//! One function per subcommand, each returning a renderable [`Output`].

use std::collections::HashMap;
use std::io::Read;

use alphaport::circuit::{build_canonical, Canonical};
use alphaport::{alpha, ladder as lad, mesh as msh, nodal, superposition, Characteristic, Circuit};
use serde_json::Value;

use crate::format::{jnum, num, object, Cell, Output, Table};
use crate::CircuitArgs;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error(transparent)]
    Core(#[from] alphaport::Error),
}

impl CliError {
    pub fn is_numerical(&self) -> bool {
        matches!(self, CliError::Core(e) if e.is_numerical())
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

/// A single value or a non-empty grid of positive finite numbers.
pub fn grid(single: Option<f64>, list: Option<&[f64]>, name: &str) -> Result<Vec<f64>> {
    let values = match (single, list) {
        (Some(x), _) => vec![x],
        (None, Some(xs)) => xs.to_vec(),
        (None, None) => return Err(CliError::Usage(format!("--{name} or --{name}s is required"))),
    };
    if values.is_empty() {
        return Err(CliError::Usage(format!("the {name} grid is empty")));
    }
    if let Some(bad) = values.iter().find(|x| !(x.is_finite() && **x > 0.0)) {
        return Err(CliError::Usage(format!("{name} values must be positive, got {bad}")));
    }
    Ok(values)
}

fn load_circuit(args: &CircuitArgs, default: Option<&str>) -> Result<(String, Circuit)> {
    if let Some(path) = &args.netlist {
        if args.sections.is_some() || args.central {
            return Err(CliError::Usage("--sections and --central apply to --canonical ladder".into()));
        }
        let label = path.display().to_string();
        let text = if label == "-" {
            let mut s = String::new();
            std::io::stdin()
                .read_to_string(&mut s)
                .map_err(|source| CliError::Io { path: label.clone(), source })?;
            s
        } else {
            std::fs::read_to_string(path).map_err(|source| CliError::Io { path: label.clone(), source })?
        };
        return Ok((label, text.parse()?));
    }
    let name = match (&args.canonical, default) {
        (Some(n), _) => n.as_str(),
        (None, Some(d)) => d,
        (None, None) => {
            return Err(CliError::Usage("a circuit is required: --canonical NAME or --netlist FILE".into()))
        }
    };
    let mut params = HashMap::new();
    if let Some(n) = args.sections {
        params.insert("sections".to_string(), n.to_string());
    }
    if args.central {
        params.insert("central".to_string(), "true".to_string());
    }
    if name != "ladder" && !params.is_empty() {
        return Err(CliError::Usage("--sections and --central apply to the ladder".into()));
    }
    // validate the name before building so unknown names report the catalogue
    Canonical::from_name(name, &params).map_err(|e| match e {
        alphaport::Error::UnknownCanonical(n) => CliError::Usage(format!(
            "unknown canonical circuit `{n}` (known: {})",
            Canonical::NAMES.join(", ")
        )),
        other => other.into(),
    })?;
    Ok((name.to_string(), build_canonical(name, &params)?))
}

fn characteristic(arg: Option<&str>, c: &Circuit) -> Result<Characteristic> {
    match arg {
        Some(text) => Ok(text.parse()?),
        None => c
            .characteristic()
            .cloned()
            .ok_or_else(|| CliError::Usage("a characteristic is required: --f D:alpha,...".into())),
    }
}

fn internal_nodes(c: &Circuit) -> Vec<String> {
    let (a, b) = c.input();
    c.nodes()
        .iter()
        .enumerate()
        .filter(|&(k, _)| k != a.0 && k != b.0)
        .map(|(_, n)| n.clone())
        .collect()
}

fn json_map<'a>(pairs: impl IntoIterator<Item = (&'a String, f64)>) -> Value {
    Value::Object(pairs.into_iter().map(|(k, v)| (k.clone(), jnum(v))).collect())
}

fn pair(k: &str, v: impl Into<String>) -> (String, String) {
    (k.to_string(), v.into())
}

pub fn analyze(args: &CircuitArgs, f: Option<&str>, v_in: f64) -> Result<Output> {
    let (label, c) = load_circuit(args, None)?;
    let f = characteristic(f, &c)?;
    let issues = c.validate().issues;
    let s = nodal::solve_dc(&c, &f, v_in)?;

    let mut table = Table::new(["node", "potential", "d"]);
    for (k, name) in c.nodes().iter().enumerate() {
        table.push(vec![name.as_str().into(), s.potentials[k].into(), (s.potentials[k] / v_in).into()]);
    }
    let branches: Vec<Value> = c
        .branches()
        .iter()
        .enumerate()
        .map(|(k, br)| {
            object([
                ("index", Value::from(k + 1)),
                ("from", Value::from(c.node_name(br.from))),
                ("to", Value::from(c.node_name(br.to))),
                ("multiplicity", Value::from(br.multiplicity)),
                ("voltage", jnum(s.branch_voltages[k])),
                ("current", jnum(s.branch_currents[k])),
                ("reversed", Value::from(s.flipped[k])),
            ])
        })
        .collect();
    let json = object([
        ("command", Value::from("analyze")),
        ("circuit", Value::from(label.clone())),
        ("characteristic", Value::from(f.to_string())),
        ("v_in", jnum(v_in)),
        ("F", jnum(s.input_current)),
        ("residual_norm", jnum(s.residual_norm)),
        ("iterations", Value::from(s.iterations)),
        (
            "potentials",
            json_map(c.nodes().iter().zip(s.potentials.iter().copied())),
        ),
        ("branches", Value::Array(branches)),
        (
            "issues",
            Value::Array(
                issues
                    .iter()
                    .map(|i| object([
                        ("severity", serde_json::to_value(i.severity).expect("serializable")),
                        ("message", Value::from(i.message.clone())),
                    ]))
                    .collect(),
            ),
        ),
    ]);
    let mut summary = vec![
        pair("circuit", label),
        pair("f", f.to_string()),
        pair("v_in", num(v_in)),
        pair("F", num(s.input_current)),
        pair("iterations", s.iterations.to_string()),
    ];
    summary.extend(issues.iter().map(|i| pair("warning", i.message.clone())));
    Ok(Output { json, summary, table })
}

fn profile_table(c: &Circuit, profiles: &[alpha::AlphaProfile]) -> Table {
    let nodes = internal_nodes(c);
    let mut table = Table::new(
        ["alpha".to_string(), "phi".to_string()]
            .into_iter()
            .chain(nodes.iter().map(|n| format!("d_{n}"))),
    );
    for p in profiles {
        let mut row: Vec<Cell> = vec![p.alpha.into(), p.phi.into()];
        row.extend(nodes.iter().map(|n| Cell::from(p.d_of(n))));
        table.push(row);
    }
    table
}

fn trends_json(sweep: &alpha::DSweep) -> Value {
    Value::Array(
        sweep
            .nodes
            .iter()
            .map(|t| object([
                ("node", Value::from(t.node.clone())),
                ("trend", serde_json::to_value(t.trend).expect("serializable")),
            ]))
            .collect(),
    )
}

fn trend_summary(sweep: &alpha::DSweep) -> Vec<(String, String)> {
    let mut out: Vec<_> = sweep
        .nodes
        .iter()
        .map(|t| pair(&format!("trend d_{}", t.node), format!("{:?}", t.trend).to_lowercase()))
        .collect();
    out.push(pair("violations", sweep.violations().len().to_string()));
    out
}

pub fn alpha_test(args: &CircuitArgs, alphas: &[f64]) -> Result<Output> {
    let (label, c) = load_circuit(args, None)?;
    let profiles = alphas
        .iter()
        .map(|&a| alpha::alpha_solve(&c, a))
        .collect::<alphaport::Result<Vec<_>>>()?;
    let table = profile_table(&c, &profiles);
    let nodes = internal_nodes(&c);
    let mut json = vec![
        ("command", Value::from("alpha-test")),
        ("circuit", Value::from(label.clone())),
        (
            "profiles",
            Value::Array(
                profiles
                    .iter()
                    .map(|p| object([
                        ("alpha", jnum(p.alpha)),
                        ("phi", jnum(p.phi)),
                        ("d", json_map(nodes.iter().map(|n| (n, p.d_of(n).expect("node exists"))))),
                    ]))
                    .collect(),
            ),
        ),
    ];
    let mut summary = vec![pair("circuit", label)];
    if alphas.len() > 1 {
        let sweep = alpha::d_sweep(&c, alphas)?;
        json.push(("trends", trends_json(&sweep)));
        json.push(("violations", Value::from(sweep.violations().len())));
        summary.extend(trend_summary(&sweep));
    }
    Ok(Output { json: object(json), summary, table })
}

fn report_json(r: &superposition::SuperpositionReport) -> Value {
    object([
        ("v_in", jnum(r.v_in)),
        ("F", jnum(r.F)),
        ("G", jnum(r.G)),
        ("eta", jnum(r.eta)),
        ("eta_nonlinear", jnum(r.eta_nonlinear)),
        ("nonlinearity_degree", jnum(r.nonlinearity_degree)),
        ("bound", r.bound.map_or(Value::Null, jnum)),
        (
            "per_term",
            Value::Array(
                r.per_term
                    .iter()
                    .map(|t| object([
                        ("alpha", jnum(t.alpha)),
                        ("coefficient", jnum(t.coefficient)),
                        ("phi", jnum(t.phi)),
                        ("g_term", jnum(t.g_term)),
                    ]))
                    .collect(),
            ),
        ),
    ])
}

fn report_cells(r: &superposition::SuperpositionReport) -> Vec<Cell> {
    vec![
        r.v_in.into(),
        r.F.into(),
        r.G.into(),
        r.eta.into(),
        r.eta_nonlinear.into(),
        r.nonlinearity_degree.into(),
        r.bound.into(),
        r.per_term_field(num).into(),
    ]
}

pub fn superpose(args: &CircuitArgs, f: Option<&str>, v_in: f64) -> Result<Output> {
    let (label, c) = load_circuit(args, None)?;
    let f = characteristic(f, &c)?;
    let r = superposition::report(&c, &f, v_in)?;
    let mut table = Table::new(superposition::SuperpositionReport::CSV_HEADER.split(','));
    table.push(report_cells(&r));
    let mut summary = vec![
        pair("circuit", label),
        pair("f", f.to_string()),
        pair("v_in", num(r.v_in)),
        pair("F", num(r.F)),
        pair("G", num(r.G)),
        pair("eta", num(r.eta)),
        pair("eta_nonlinear", num(r.eta_nonlinear)),
        pair("nonlinearity_degree", num(r.nonlinearity_degree)),
        pair("bound", r.bound.map(num).unwrap_or_else(|| "n/a".into())),
    ];
    for t in &r.per_term {
        summary.push(pair(
            &format!("term alpha={}", num(t.alpha)),
            format!("D={} phi={} G_p={}", num(t.coefficient), num(t.phi), num(t.g_term)),
        ));
    }
    Ok(Output {
        json: report_json(&r),
        summary,
        table,
    })
}

pub fn ladder(alphas: &[f64], central: bool, sections: Option<usize>) -> Result<Output> {
    let mut columns = vec!["alpha", "lambda", "phi"];
    if sections.is_some() {
        columns.push("phi_truncated");
    }
    let mut table = Table::new(columns);
    let truncated = match sections {
        Some(n) => Some(alphaport::circuit::ladder(n, central)?),
        None => None,
    };
    let mut rows = Vec::new();
    for &a in alphas {
        let r = lad::ladder_result(a, central)?;
        let mut cells: Vec<Cell> = vec![a.into(), r.lambda.into(), r.phi.into()];
        let mut row = vec![("alpha", jnum(a)), ("lambda", jnum(r.lambda)), ("phi", jnum(r.phi))];
        if let Some(c) = &truncated {
            let phi_n = alpha::alpha_solve(c, a)?.phi;
            cells.push(phi_n.into());
            row.push(("phi_truncated", jnum(phi_n)));
        }
        table.push(cells);
        rows.push(object(row));
    }
    let json = object([
        ("command", Value::from("ladder")),
        ("central", Value::from(central)),
        ("sections", sections.map_or(Value::Null, Value::from)),
        ("rows", Value::Array(rows)),
    ]);
    let mut summary = vec![pair("central", central.to_string())];
    if let Some(n) = sections {
        summary.push(pair("sections", n.to_string()));
    }
    Ok(Output { json, summary, table })
}

pub fn mesh(args: &CircuitArgs, f: Option<&str>, alpha_arg: Option<f64>, i_in: f64) -> Result<Output> {
    let (label, c) = load_circuit(args, Some("fig_b1"))?;
    let f = match alpha_arg {
        Some(a) => Characteristic::power_law(1.0, a)?,
        None => characteristic(f, &c)?,
    };
    let s = msh::mesh_solve(&c, &f, i_in)?;

    let mut table = Table::new(["mesh", "current"]);
    for (name, j) in &s.mesh_currents {
        table.push(vec![name.as_str().into(), (*j).into()]);
    }
    let power = match f.terms() {
        [t] => Some(t.exponent),
        _ => None,
    };
    let via_nodes = match power {
        Some(a) => Some(msh::phi_meshes_via_nodes(&c, a)?),
        None => None,
    };
    let closed = match (power, label.as_str()) {
        (Some(a), "fig_b1") => Some(msh::phi_b6_closed_form(a).phi),
        _ => None,
    };
    let opt = |x: Option<f64>| x.map_or(Value::Null, jnum);
    let json = object([
        ("command", Value::from("mesh")),
        ("circuit", Value::from(label.clone())),
        ("characteristic", Value::from(f.to_string())),
        ("i_in", jnum(i_in)),
        ("input_voltage", jnum(s.input_voltage)),
        ("phi_meshes", opt(s.phi_meshes)),
        ("phi_via_nodes", opt(via_nodes)),
        ("phi_closed_form", opt(closed)),
        ("mesh_currents", json_map(s.mesh_currents.iter().map(|(k, v)| (k, *v)))),
        (
            "branch_currents",
            Value::Array(s.branch_currents.iter().map(|&x| jnum(x)).collect()),
        ),
        ("residual_norm", jnum(s.residual_norm)),
        ("iterations", Value::from(s.iterations)),
    ]);
    let show = |x: Option<f64>| x.map(num).unwrap_or_else(|| "n/a".into());
    let summary = vec![
        pair("circuit", label),
        pair("f", f.to_string()),
        pair("i_in", num(i_in)),
        pair("input_voltage", num(s.input_voltage)),
        pair("phi_meshes", show(s.phi_meshes)),
        pair("phi_via_nodes", show(via_nodes)),
        pair("phi_closed_form", show(closed)),
    ];
    Ok(Output { json, summary, table })
}

fn sweep_json(kind: &str, label: &str, table: &Table, extra: Vec<(&'static str, Value)>) -> Value {
    let mut pairs = vec![
        ("command", Value::from("sweep")),
        ("kind", Value::from(kind)),
        ("circuit", Value::from(label)),
        ("columns", Value::from(table.columns.clone())),
        ("rows", table.rows_json()),
    ];
    pairs.extend(extra);
    object(pairs)
}

pub fn sweep_alphas(args: &CircuitArgs, alphas: &[f64]) -> Result<Output> {
    let (label, c) = load_circuit(args, None)?;
    let sweep = alpha::d_sweep(&c, alphas)?;
    let profiles = alphas
        .iter()
        .map(|&a| alpha::alpha_solve(&c, a))
        .collect::<alphaport::Result<Vec<_>>>()?;
    let table = profile_table(&c, &profiles);
    let json = sweep_json(
        "alpha",
        &label,
        &table,
        vec![
            ("trends", trends_json(&sweep)),
            ("violations", Value::from(sweep.violations().len())),
        ],
    );
    let mut summary = vec![pair("circuit", label)];
    summary.extend(trend_summary(&sweep));
    Ok(Output { json, summary, table })
}

pub fn sweep_vins(args: &CircuitArgs, f: Option<&str>, vins: &[f64]) -> Result<Output> {
    let (label, c) = load_circuit(args, None)?;
    let f = characteristic(f, &c)?;
    let nodes = internal_nodes(&c);
    let reports = vins
        .iter()
        .map(|&v| superposition::report(&c, &f, v))
        .collect::<alphaport::Result<Vec<_>>>()?;
    let mut table = Table::new(
        superposition::SuperpositionReport::CSV_HEADER
            .split(',')
            .map(str::to_string)
            .chain(nodes.iter().map(|n| format!("d_{n}"))),
    );
    let index: Vec<usize> = nodes.iter().map(|n| c.node(n).expect("node exists").0).collect();
    for r in &reports {
        let mut row = report_cells(r);
        row.extend(index.iter().map(|&k| Cell::Num(r.ratios[k])));
        table.push(row);
    }
    let trends: Vec<(String, alpha::Trend)> = nodes
        .iter()
        .zip(&index)
        .map(|(n, &k)| {
            let values: Vec<f64> = reports.iter().map(|r| r.ratios[k]).collect();
            (n.clone(), alpha::classify(&values, alpha::TREND_TOL))
        })
        .collect();
    let json = sweep_json(
        "v_in",
        &label,
        &table,
        vec![
            ("characteristic", Value::from(f.to_string())),
            ("reports", Value::Array(reports.iter().map(report_json).collect())),
            (
                "trends",
                Value::Array(
                    trends
                        .iter()
                        .map(|(n, t)| object([
                            ("node", Value::from(n.clone())),
                            ("trend", serde_json::to_value(t).expect("serializable")),
                        ]))
                        .collect(),
                ),
            ),
        ],
    );
    let mut summary = vec![pair("circuit", label), pair("f", f.to_string())];
    summary.extend(
        trends
            .iter()
            .map(|(n, t)| pair(&format!("trend d_{n}"), format!("{t:?}").to_lowercase())),
    );
    Ok(Output { json, summary, table })
}

pub fn table1() -> Result<Output> {
    let rows = superposition::precision_table()?;
    let mut table = Table::new(["circuit", "exponents", "nonlinearity_degree", "error"]);
    for r in &rows {
        let exps: Vec<String> = r.exponents.iter().map(|&e| num(e)).collect();
        table.push(vec![
            r.circuit.as_str().into(),
            exps.join(";").into(),
            r.nonlinearity_degree.into(),
            r.error.into(),
        ]);
    }
    let json = sweep_json("table1", "table1", &table, vec![]);
    Ok(Output {
        json,
        summary: vec![],
        table,
    })
}
