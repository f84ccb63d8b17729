//! Circuit graph, netlist text format, validation and canonical topologies.

use std::collections::{HashMap, VecDeque};
use std::fmt::Write as _;
use std::str::FromStr;

use serde::Serialize;

use crate::characteristic::Characteristic;
use crate::error::{Error, Result};

/// Index of a node within its [`Circuit`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct NodeId(pub usize);

/// One branch: `multiplicity` identical conductors in parallel between
/// `from` and `to`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Branch {
    pub from: NodeId,
    pub to: NodeId,
    pub multiplicity: u32,
}

/// A branch traversed by a loop or path, `reversed` when walked `to → from`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct BranchRef {
    pub branch: usize,
    pub reversed: bool,
}

impl BranchRef {
    pub fn sign(&self) -> f64 {
        if self.reversed {
            -1.0
        } else {
            1.0
        }
    }
}

/// A named mesh: a closed loop of branches.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Mesh {
    pub name: String,
    pub branches: Vec<BranchRef>,
}

/// A one-port: undirected multigraph of identical conductors with an input
/// port `(a, b)`; `b` is the ground reference.
///
/// Node order is the order of first appearance (port nodes first, then
/// branch endpoints), which keeps netlist round-trips exact.
#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    nodes: Vec<String>,
    index: HashMap<String, NodeId>,
    branches: Vec<Branch>,
    input: (NodeId, NodeId),
    characteristic: Option<Characteristic>,
    meshes: Vec<Mesh>,
}

impl Circuit {
    /// Builds a circuit from node names. Every multiplicity must be ≥ 1.
    pub fn new(input: (&str, &str), branches: &[(&str, &str, u32)]) -> Result<Self> {
        let mut b = CircuitBuilder::new(input.0, input.1);
        for &(from, to, w) in branches {
            b.branch_with(from, to, w)?;
        }
        Ok(b.build())
    }

    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn node_name(&self, id: NodeId) -> &str {
        &self.nodes[id.0]
    }

    pub fn node(&self, name: &str) -> Option<NodeId> {
        self.index.get(name).copied()
    }

    pub fn branches(&self) -> &[Branch] {
        &self.branches
    }

    /// `(a, b)`.
    pub fn input(&self) -> (NodeId, NodeId) {
        self.input
    }

    /// Characteristic declared by a `.f` directive, if any.
    pub fn characteristic(&self) -> Option<&Characteristic> {
        self.characteristic.as_ref()
    }

    pub fn meshes(&self) -> &[Mesh] {
        &self.meshes
    }

    pub fn with_characteristic(mut self, f: Characteristic) -> Self {
        self.characteristic = Some(f);
        self
    }

    pub fn with_meshes(mut self, meshes: Vec<Mesh>) -> Result<Self> {
        for m in &meshes {
            for r in &m.branches {
                if r.branch >= self.branches.len() {
                    return Err(Error::InvalidMeshBasis(format!(
                        "mesh {} references branch {} of {}",
                        m.name,
                        r.branch + 1,
                        self.branches.len()
                    )));
                }
            }
        }
        self.meshes = meshes;
        Ok(self)
    }

    /// Adds a direct `a`–`b` branch at the front of the branch list.
    pub fn with_direct_branch(&self) -> Self {
        let mut c = self.clone();
        c.branches.insert(
            0,
            Branch {
                from: self.input.0,
                to: self.input.1,
                multiplicity: 1,
            },
        );
        for m in &mut c.meshes {
            for r in &mut m.branches {
                r.branch += 1;
            }
        }
        c
    }

    /// Node adjacency as `(neighbor, branch index)` lists.
    pub fn adjacency(&self) -> Vec<Vec<(NodeId, usize)>> {
        let mut adj = vec![Vec::new(); self.nodes.len()];
        for (s, br) in self.branches.iter().enumerate() {
            adj[br.from.0].push((br.to, s));
            adj[br.to.0].push((br.from, s));
        }
        adj
    }

    fn reachable_from(&self, start: NodeId) -> Vec<bool> {
        let adj = self.adjacency();
        let mut seen = vec![false; self.nodes.len()];
        let mut queue = VecDeque::from([start]);
        seen[start.0] = true;
        while let Some(n) = queue.pop_front() {
            for &(m, _) in &adj[n.0] {
                if !seen[m.0] {
                    seen[m.0] = true;
                    queue.push_back(m);
                }
            }
        }
        seen
    }

    /// Structural checks; problems are collected, never thrown.
    pub fn validate(&self) -> ValidationReport {
        let mut issues = Vec::new();
        let (a, b) = self.input;
        if a == b {
            issues.push(Issue::error(format!(
                "degenerate port: a = b = {}",
                self.node_name(a)
            )));
        }
        if self.branches.is_empty() {
            issues.push(Issue::error("circuit has no branches".to_string()));
        }
        for (s, br) in self.branches.iter().enumerate() {
            if br.from == br.to {
                issues.push(Issue::error(format!(
                    "branch {} is a self-loop at node {}",
                    s + 1,
                    self.node_name(br.from)
                )));
            }
            if br.multiplicity == 0 {
                issues.push(Issue::error(format!("branch {} has multiplicity 0", s + 1)));
            }
        }
        let seen = self.reachable_from(a);
        for (k, name) in self.nodes.iter().enumerate() {
            if !seen[k] {
                issues.push(Issue::error(format!("disconnected node {name}")));
            }
        }
        if a != b && !seen[b.0] {
            issues.push(Issue::error(format!(
                "no path between {} and {}",
                self.node_name(a),
                self.node_name(b)
            )));
        }
        let adj = self.adjacency();
        for (k, name) in self.nodes.iter().enumerate() {
            let distinct: std::collections::BTreeSet<usize> =
                adj[k].iter().map(|&(m, _)| m.0).filter(|&m| m != k).collect();
            if k != a.0 && k != b.0 && distinct.len() == 1 && seen[k] {
                issues.push(Issue::warning(format!(
                    "dangling node {name} carries no current"
                )));
            }
        }
        ValidationReport::from_issues(issues)
    }

    /// Fails with [`Error::InvalidCircuit`] unless [`Circuit::validate`] is ok.
    pub fn ensure_valid(&self) -> Result<()> {
        let report = self.validate();
        if report.ok {
            Ok(())
        } else {
            let msgs: Vec<_> = report
                .issues
                .iter()
                .filter(|i| i.severity == Severity::Error)
                .map(|i| i.message.clone())
                .collect();
            Err(Error::InvalidCircuit(msgs.join("; ")))
        }
    }

    /// Renders the circuit in netlist text form.
    pub fn to_netlist(&self) -> String {
        let mut out = String::new();
        let (a, b) = self.input;
        let _ = writeln!(out, ".input {} {}", self.node_name(a), self.node_name(b));
        for br in &self.branches {
            let _ = write!(
                out,
                ".branch {} {}",
                self.node_name(br.from),
                self.node_name(br.to)
            );
            if br.multiplicity != 1 {
                let _ = write!(out, " w={}", br.multiplicity);
            }
            out.push('\n');
        }
        if let Some(f) = &self.characteristic {
            let _ = writeln!(out, ".f {f}");
        }
        for m in &self.meshes {
            let _ = write!(out, ".mesh {}", m.name);
            for r in &m.branches {
                let sign = if r.reversed { "-" } else { "" };
                let _ = write!(out, " {sign}{}", r.branch + 1);
            }
            out.push('\n');
        }
        out
    }
}

impl FromStr for Circuit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_netlist(s)
    }
}

/// Incremental construction preserving first-appearance node order.
#[derive(Debug, Clone)]
pub struct CircuitBuilder {
    nodes: Vec<String>,
    index: HashMap<String, NodeId>,
    branches: Vec<Branch>,
    input: (NodeId, NodeId),
}

impl CircuitBuilder {
    pub fn new(a: &str, b: &str) -> Self {
        let mut builder = Self {
            nodes: Vec::new(),
            index: HashMap::new(),
            branches: Vec::new(),
            input: (NodeId(0), NodeId(0)),
        };
        let a = builder.node(a);
        let b = builder.node(b);
        builder.input = (a, b);
        builder
    }

    /// Returns the id of `name`, creating the node if needed.
    pub fn node(&mut self, name: &str) -> NodeId {
        if let Some(&id) = self.index.get(name) {
            return id;
        }
        let id = NodeId(self.nodes.len());
        self.nodes.push(name.to_string());
        self.index.insert(name.to_string(), id);
        id
    }

    pub fn branch(&mut self, from: &str, to: &str) -> &mut Self {
        self.branch_with(from, to, 1).expect("unit multiplicity")
    }

    pub fn branch_with(&mut self, from: &str, to: &str, multiplicity: u32) -> Result<&mut Self> {
        if multiplicity == 0 {
            return Err(Error::InvalidParameter(format!(
                "branch {from}-{to}: multiplicity must be ≥ 1"
            )));
        }
        let from = self.node(from);
        let to = self.node(to);
        self.branches.push(Branch {
            from,
            to,
            multiplicity,
        });
        Ok(self)
    }

    /// Series chain of unit branches through `via`.
    pub fn chain(&mut self, from: &str, via: &[&str], to: &str) -> &mut Self {
        let mut prev = from;
        for &n in via {
            self.branch(prev, n);
            prev = n;
        }
        self.branch(prev, to)
    }

    pub fn build(self) -> Circuit {
        Circuit {
            nodes: self.nodes,
            index: self.index,
            branches: self.branches,
            input: self.input,
            characteristic: None,
            meshes: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Warning,
    Error,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Issue {
    pub severity: Severity,
    pub message: String,
}

impl Issue {
    fn error(message: String) -> Self {
        Self {
            severity: Severity::Error,
            message,
        }
    }

    fn warning(message: String) -> Self {
        Self {
            severity: Severity::Warning,
            message,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub ok: bool,
    pub issues: Vec<Issue>,
}

impl ValidationReport {
    fn from_issues(issues: Vec<Issue>) -> Self {
        Self {
            ok: !issues.iter().any(|i| i.severity == Severity::Error),
            issues,
        }
    }

    pub fn has_issue(&self, needle: &str) -> bool {
        self.issues.iter().any(|i| i.message.contains(needle))
    }
}

/// Parses the line-oriented netlist format.
///
/// ```text
/// # comment
/// .input a b
/// .branch a o
/// .branch o b w=2
/// .f 1:1,1:3
/// .mesh m1 1 -2
/// ```
///
/// Mesh entries are 1-based branch indices; a leading `-` walks the branch
/// against its declared orientation.
pub fn parse_netlist(text: &str) -> Result<Circuit> {
    let mut input: Option<(String, String)> = None;
    let mut branches: Vec<(String, String, u32, usize)> = Vec::new();
    let mut characteristic = None;
    let mut meshes: Vec<(String, Vec<(i64, usize)>)> = Vec::new();

    for (k, raw) in text.lines().enumerate() {
        let line_no = k + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut tokens = line.split_whitespace();
        let directive = tokens.next().expect("non-empty line");
        let args: Vec<&str> = tokens.collect();
        let syntax = |message: String| Error::Syntax {
            line: line_no,
            message,
        };
        match directive {
            ".input" => {
                if input.is_some() {
                    return Err(Error::DuplicateInput { line: line_no });
                }
                if args.len() != 2 {
                    return Err(syntax(format!(
                        ".input takes exactly 2 nodes, got {}",
                        args.len()
                    )));
                }
                input = Some((args[0].to_string(), args[1].to_string()));
            }
            ".branch" => {
                if !(2..=3).contains(&args.len()) {
                    return Err(syntax(format!(
                        ".branch takes 2 nodes and an optional w=<K>, got {} arguments",
                        args.len()
                    )));
                }
                let w = match args.get(2) {
                    None => 1,
                    Some(opt) => {
                        let value = opt
                            .strip_prefix("w=")
                            .ok_or_else(|| syntax(format!("expected w=<K>, got `{opt}`")))?;
                        match value.parse::<u32>() {
                            Ok(w) if w >= 1 => w,
                            _ => {
                                return Err(syntax(format!(
                                    "multiplicity must be a positive integer, got `{value}`"
                                )))
                            }
                        }
                    }
                };
                branches.push((args[0].to_string(), args[1].to_string(), w, line_no));
            }
            ".f" => {
                if args.is_empty() {
                    return Err(syntax(".f needs a characteristic".into()));
                }
                let text = args.join("");
                let f = Characteristic::from_str(&text).map_err(|e| syntax(e.to_string()))?;
                characteristic = Some(f);
            }
            ".mesh" => {
                if args.len() < 2 {
                    return Err(syntax(".mesh needs a name and branch indices".into()));
                }
                let mut entries = Vec::new();
                for tok in &args[1..] {
                    let idx: i64 = tok
                        .parse()
                        .map_err(|_| syntax(format!("bad branch index `{tok}`")))?;
                    if idx == 0 {
                        return Err(syntax("branch indices are 1-based".into()));
                    }
                    entries.push((idx, line_no));
                }
                meshes.push((args[0].to_string(), entries));
            }
            other => {
                return Err(Error::UnknownDirective {
                    line: line_no,
                    directive: other.to_string(),
                })
            }
        }
    }

    let (a, b) = input.ok_or(Error::MissingInput)?;
    let mut builder = CircuitBuilder::new(&a, &b);
    for (from, to, w, _) in &branches {
        builder.branch_with(from, to, *w)?;
    }
    let mut circuit = builder.build();
    circuit.characteristic = characteristic;

    let n_branches = circuit.branches.len();
    let mut parsed = Vec::new();
    for (name, entries) in meshes {
        let mut refs = Vec::new();
        for (idx, line) in entries {
            let branch = idx.unsigned_abs() as usize - 1;
            if branch >= n_branches {
                return Err(Error::Syntax {
                    line,
                    message: format!("mesh {name} references branch {idx} of {n_branches}"),
                });
            }
            refs.push(BranchRef {
                branch,
                reversed: idx < 0,
            });
        }
        parsed.push(Mesh {
            name,
            branches: refs,
        });
    }
    circuit.meshes = parsed;
    Ok(circuit)
}

/// Topologies used throughout the analyses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Canonical {
    /// Direct a-b branch, a-o, o-b and the two-element chain o-x-b.
    FigA1,
    /// Direct a-b branch, a two-element chain a-p-b, and the bridge part of
    /// [`Canonical::FigA1`] as the remaining subcircuit.
    Fig3,
    /// Direct a-b branch and two three-element chains with balanced cross
    /// branches c-e and d-f.
    Fig4,
    /// Truncated ladder of series-rail sections closed by a shunt.
    Ladder { sections: usize, central: bool },
    /// Same graph as [`Canonical::FigA1`] with its two-mesh basis attached.
    FigB1,
}

impl Canonical {
    pub const NAMES: [&'static str; 5] = ["fig_a1", "fig3", "fig4", "ladder", "fig_b1"];

    /// Looks up a name; `ladder` reads `sections` (default 1) and `central`
    /// (default false) from `params`.
    pub fn from_name(name: &str, params: &HashMap<String, String>) -> Result<Self> {
        match name {
            "fig_a1" => Ok(Self::FigA1),
            "fig3" => Ok(Self::Fig3),
            "fig4" => Ok(Self::Fig4),
            "fig_b1" => Ok(Self::FigB1),
            "ladder" => {
                let sections = match params.get("sections").or_else(|| params.get("N")) {
                    None => 1,
                    Some(s) => s.parse::<usize>().map_err(|_| {
                        Error::InvalidParameter(format!("sections must be an integer, got `{s}`"))
                    })?,
                };
                let central = match params.get("central").map(String::as_str) {
                    None | Some("false") => false,
                    Some("true") => true,
                    Some(other) => {
                        return Err(Error::InvalidParameter(format!(
                            "central must be true or false, got `{other}`"
                        )))
                    }
                };
                Ok(Self::Ladder { sections, central })
            }
            other => Err(Error::UnknownCanonical(other.to_string())),
        }
    }

    pub fn build(&self) -> Result<Circuit> {
        match *self {
            Self::FigA1 => Ok(fig_a1()),
            Self::Fig3 => Ok(fig3()),
            Self::Fig4 => Ok(fig4()),
            Self::FigB1 => Ok(fig_b1()),
            Self::Ladder { sections, central } => ladder(sections, central),
        }
    }
}

/// `build_canonical` by name.
pub fn build_canonical(name: &str, params: &HashMap<String, String>) -> Result<Circuit> {
    Canonical::from_name(name, params)?.build()
}

pub fn fig_a1() -> Circuit {
    let mut b = CircuitBuilder::new("a", "b");
    b.branch("a", "b")
        .branch("a", "o")
        .branch("o", "b")
        .branch("o", "x")
        .branch("x", "b");
    b.build()
}

pub fn fig3() -> Circuit {
    let mut b = CircuitBuilder::new("a", "b");
    b.branch("a", "b")
        .chain("a", &["p"], "b")
        .branch("a", "o")
        .branch("o", "b")
        .branch("o", "x")
        .branch("x", "b");
    b.build()
}

pub fn fig4() -> Circuit {
    let mut b = CircuitBuilder::new("a", "b");
    b.branch("a", "b")
        .chain("a", &["c", "d"], "b")
        .chain("a", &["e", "f"], "b")
        .branch("c", "e")
        .branch("d", "f");
    b.build()
}

/// Fig. A1's graph with meshes `m1 = a→o→b→a` and `m2 = o→x→b→o`.
pub fn fig_b1() -> Circuit {
    let r = |branch: usize, reversed: bool| BranchRef { branch, reversed };
    fig_a1()
        .with_meshes(vec![
            Mesh {
                name: "m1".into(),
                branches: vec![r(1, false), r(2, false), r(0, true)],
            },
            Mesh {
                name: "m2".into(),
                branches: vec![r(3, false), r(4, false), r(2, true)],
            },
        ])
        .expect("indices in range")
}

/// Section `k` (1-based) has top node `c{k}`, bottom node `d{k}`, a top
/// series branch `c{k-1} → c{k}` (with `c0 = a`), a bottom series branch
/// `d{k} → d{k-1}` (with `d0 = b`) and the shunt `c{k} → d{k}`.
pub fn ladder(sections: usize, central: bool) -> Result<Circuit> {
    if sections < 1 {
        return Err(Error::InvalidParameter(
            "ladder needs at least one section".into(),
        ));
    }
    let mut b = CircuitBuilder::new("a", "b");
    if central {
        b.branch("a", "b");
    }
    let mut top = "a".to_string();
    let mut bottom = "b".to_string();
    for k in 1..=sections {
        let c = format!("c{k}");
        let d = format!("d{k}");
        b.branch(&top, &c);
        b.branch(&d, &bottom);
        b.branch(&c, &d);
        top = c;
        bottom = d;
    }
    Ok(b.build())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn minimal_netlist() {
        let c = parse_netlist(".input a b\n.branch a b").unwrap();
        assert_eq!(c.node_count(), 2);
        assert_eq!(c.branches().len(), 1);
        assert!(c.validate().ok);
    }

    #[test]
    fn fig_a1_netlist() {
        let text = "# bridge\n.input a b\n.branch a b\n.branch a o\n.branch o b\n\
                    .branch o x\n.branch x b\n";
        let c = parse_netlist(text).unwrap();
        assert_eq!(c.node_count(), 4);
        assert_eq!(c.branches().len(), 5);
        assert_eq!(c, fig_a1());
    }

    #[test]
    fn parse_errors() {
        assert_eq!(parse_netlist(".branch a b"), Err(Error::MissingInput));
        assert_eq!(
            parse_netlist(".input a b\n.input a c\n.branch a b"),
            Err(Error::DuplicateInput { line: 2 })
        );
        assert!(matches!(
            parse_netlist(".input a b\n.resistor a b"),
            Err(Error::UnknownDirective { line: 2, .. })
        ));
        assert!(matches!(
            parse_netlist(".input a b\n\n.branch a"),
            Err(Error::Syntax { line: 3, .. })
        ));
        assert!(matches!(
            parse_netlist(".input a b\n.branch a b w=0"),
            Err(Error::Syntax { line: 2, .. })
        ));
        assert!(matches!(
            parse_netlist(".input a b\n.branch a b\n.mesh m1 2"),
            Err(Error::Syntax { line: 3, .. })
        ));
    }

    #[test]
    fn node_names_are_case_sensitive() {
        let c = parse_netlist(".input A b\n.branch A a\n.branch a b").unwrap();
        assert_eq!(c.node_count(), 3);
        assert_ne!(c.node("A"), c.node("a"));
    }

    #[test]
    fn characteristic_directive_is_metadata() {
        let c = parse_netlist(".input a b\n.branch a b\n.f 1:1, 1:3").unwrap();
        assert_eq!(c.characteristic().unwrap().to_string(), "1:1,1:3");
    }

    #[test]
    fn validation_issues() {
        assert!(fig4().validate().ok);
        assert!(fig_a1().validate().ok);

        let mut b = CircuitBuilder::new("a", "b");
        b.branch("a", "b");
        b.node("lonely");
        let r = b.build().validate();
        assert!(!r.ok);
        assert!(r.has_issue("disconnected node lonely"));

        let r = Circuit::new(("a", "a"), &[("a", "c", 1)]).unwrap().validate();
        assert!(!r.ok);
        assert!(r.has_issue("degenerate port"));

        let r = Circuit::new(("a", "b"), &[("a", "c", 1), ("b", "d", 1)])
            .unwrap()
            .validate();
        assert!(r.has_issue("no path between a and b"));

        let r = Circuit::new(("a", "b"), &[("a", "b", 1), ("a", "t", 1)])
            .unwrap()
            .validate();
        assert!(r.ok);
        assert!(r.has_issue("dangling node t"));

        let r = Circuit::new(("a", "b"), &[("a", "b", 1), ("a", "a", 1)])
            .unwrap()
            .validate();
        assert!(r.has_issue("self-loop"));
    }

    #[test]
    fn canonical_shapes() {
        let c = fig_a1();
        assert_eq!((c.node_count(), c.branches().len()), (4, 5));
        let c = fig4();
        assert_eq!((c.node_count(), c.branches().len()), (6, 9));
        let c = fig3();
        assert_eq!((c.node_count(), c.branches().len()), (5, 7));
        let c = fig_b1();
        assert_eq!(c.meshes().len(), 2);
        assert!(fig3().validate().ok);

        let one = ladder(1, false).unwrap();
        assert_eq!((one.node_count(), one.branches().len()), (4, 3));
        let one_c = ladder(1, true).unwrap();
        assert_eq!(one_c.branches().len(), 4);

        for n in [1usize, 2, 5, 17] {
            let l = ladder(n, false).unwrap();
            assert_eq!(l.node_count(), 2 + 2 * n);
            assert_eq!(l.branches().len(), 3 * n);
            assert!(l.validate().ok);
        }
        assert!(matches!(ladder(0, false), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn canonical_by_name() {
        let mut params = HashMap::new();
        params.insert("sections".to_string(), "3".to_string());
        params.insert("central".to_string(), "true".to_string());
        let l = build_canonical("ladder", &params).unwrap();
        assert_eq!(l.branches().len(), 10);
        assert!(matches!(
            build_canonical("fig9", &HashMap::new()),
            Err(Error::UnknownCanonical(_))
        ));
        params.insert("sections".to_string(), "0".to_string());
        assert!(build_canonical("ladder", &params).is_err());
    }

    #[test]
    fn fig_b1_round_trips_with_meshes() {
        let c = fig_b1().with_characteristic("1:2".parse().unwrap());
        let text = c.to_netlist();
        assert!(text.contains(".mesh m1 2 3 -1"));
        assert_eq!(parse_netlist(&text).unwrap(), c);
    }

    fn random_circuit() -> impl Strategy<Value = Circuit> {
        (2usize..7, prop::collection::vec((0usize..7, 0usize..7, 1u32..4), 1..12)).prop_map(
            |(n, edges)| {
                let name = |k: usize| match k {
                    0 => "a".to_string(),
                    1 => "b".to_string(),
                    k => format!("n{k}"),
                };
                let mut b = CircuitBuilder::new("a", "b");
                // spanning path keeps everything connected
                for k in 0..n - 1 {
                    b.branch(&name(k), &name(k + 1));
                }
                for (x, y, w) in edges {
                    let (x, y) = (x % n, y % n);
                    if x != y {
                        b.branch_with(&name(x), &name(y), w).unwrap();
                    }
                }
                b.build()
            },
        )
    }

    proptest! {
        #[test]
        fn netlist_round_trip(c in random_circuit()) {
            prop_assert!(c.validate().ok);
            let text = c.to_netlist();
            prop_assert_eq!(parse_netlist(&text).unwrap(), c);
        }

        #[test]
        fn ladder_counts_linear(n in 1usize..60, central in any::<bool>()) {
            let l = ladder(n, central).unwrap();
            prop_assert_eq!(l.node_count(), 2 + 2 * n);
            prop_assert_eq!(l.branches().len(), 3 * n + usize::from(central));
            prop_assert!(l.validate().ok);
        }
    }
}
