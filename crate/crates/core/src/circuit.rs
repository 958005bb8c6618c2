//! Circuit IR, simulation, coupling-graph routing and OpenQASM 2.0 text.
//!
//! A [`Circuit`] lists gates in time order: `ops[0]` acts first. A written
//! operator product such as `M = X_[01] X_[12] X_[20] X_[03] X_[31]` is the
//! reverse of the time order; [`Circuit::as_product`] gives that view.

use std::collections::{BTreeSet, VecDeque};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::dense::DenseOp;
use crate::error::{Error, Result};
use crate::qstate::{SingleQubitGate, StateVector, NUM_QUBITS};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GateOp {
    X(usize),
    Y(usize),
    Z(usize),
    H(usize),
    /// Phase gate `diag(1, i)`; `s` in QASM.
    P(usize),
    Pdg(usize),
    T(usize),
    Rz(usize, f64),
    Ry(usize, f64),
    Rx(usize, f64),
    /// `X_[target control]`.
    Cnot { target: usize, control: usize },
    Swap(usize, usize),
}

impl GateOp {
    pub fn cnot(target: usize, control: usize) -> Self {
        GateOp::Cnot { target, control }
    }

    pub fn qubits(&self) -> Vec<usize> {
        match *self {
            GateOp::Cnot { target, control } => vec![target, control],
            GateOp::Swap(a, b) => vec![a, b],
            GateOp::X(q)
            | GateOp::Y(q)
            | GateOp::Z(q)
            | GateOp::H(q)
            | GateOp::P(q)
            | GateOp::Pdg(q)
            | GateOp::T(q)
            | GateOp::Rz(q, _)
            | GateOp::Ry(q, _)
            | GateOp::Rx(q, _) => vec![q],
        }
    }

    pub fn is_two_qubit(&self) -> bool {
        matches!(self, GateOp::Cnot { .. } | GateOp::Swap(..))
    }

    pub fn validate(&self) -> Result<()> {
        let qs = self.qubits();
        if let Some(&q) = qs.iter().find(|&&q| q >= NUM_QUBITS) {
            return Err(Error::QubitOutOfRange(q));
        }
        if qs.len() == 2 && qs[0] == qs[1] {
            return Err(Error::SameQubit(qs[0]));
        }
        Ok(())
    }

    /// The 2×2 matrix and qubit of a single-qubit gate.
    pub fn single_qubit(&self) -> Option<(SingleQubitGate, usize)> {
        Some(match *self {
            GateOp::X(q) => (SingleQubitGate::x(), q),
            GateOp::Y(q) => (SingleQubitGate::y(), q),
            GateOp::Z(q) => (SingleQubitGate::z(), q),
            GateOp::H(q) => (SingleQubitGate::h(), q),
            GateOp::P(q) => (SingleQubitGate::p(), q),
            GateOp::Pdg(q) => (SingleQubitGate::pdg(), q),
            GateOp::T(q) => (SingleQubitGate::t(), q),
            GateOp::Rz(q, a) => (SingleQubitGate::rz(a), q),
            GateOp::Ry(q, a) => (SingleQubitGate::ry(a), q),
            GateOp::Rx(q, a) => (SingleQubitGate::rx(a), q),
            GateOp::Cnot { .. } | GateOp::Swap(..) => return None,
        })
    }

    pub fn apply(&self, s: &StateVector) -> Result<StateVector> {
        match *self {
            GateOp::Cnot { target, control } => s.apply_cnot(target, control),
            GateOp::Swap(a, b) => s.apply_swap(a, b),
            _ => {
                let (g, q) = self.single_qubit().expect("single-qubit gate");
                s.apply_single(&g, q)
            }
        }
    }

    /// Reference 16×16 matrix from Kronecker products.
    pub fn dense(&self) -> Result<DenseOp> {
        self.validate()?;
        Ok(match *self {
            GateOp::Cnot { target, control } => DenseOp::cnot(target, control),
            GateOp::Swap(a, b) => DenseOp::swap(a, b),
            _ => {
                let (g, q) = self.single_qubit().expect("single-qubit gate");
                DenseOp::single(&g, q)
            }
        })
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Circuit {
    ops: Vec<GateOp>,
}

impl Circuit {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_ops(ops: Vec<GateOp>) -> Result<Self> {
        for op in &ops {
            op.validate()?;
        }
        Ok(Self { ops })
    }

    /// Circuit realizing a written operator product (rightmost factor first).
    pub fn from_product(factors: &[GateOp]) -> Result<Self> {
        Self::from_ops(factors.iter().rev().copied().collect())
    }

    pub fn push(&mut self, op: GateOp) -> Result<()> {
        op.validate()?;
        self.ops.push(op);
        Ok(())
    }

    pub fn extend(&mut self, other: &Circuit) {
        self.ops.extend_from_slice(&other.ops);
    }

    pub fn ops(&self) -> &[GateOp] {
        &self.ops
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    /// Gates as a written operator product, leftmost acting last.
    pub fn as_product(&self) -> Vec<GateOp> {
        self.ops.iter().rev().copied().collect()
    }

    pub fn cnot_count(&self) -> usize {
        self.ops.iter().filter(|op| matches!(op, GateOp::Cnot { .. })).count()
    }

    pub fn simulate(&self) -> Result<StateVector> {
        self.simulate_from(&StateVector::zero())
    }

    pub fn simulate_from(&self, s: &StateVector) -> Result<StateVector> {
        self.ops.iter().try_fold(*s, |acc, op| op.apply(&acc))
    }

    /// Operator of the circuit, column by column.
    pub fn operator(&self) -> Result<DenseOp> {
        for op in &self.ops {
            op.validate()?;
        }
        Ok(DenseOp::from_columns(|b| self.simulate_from(b).expect("validated")))
    }

    /// Operator of the circuit as a product of reference gate matrices.
    pub fn dense_operator(&self) -> Result<DenseOp> {
        self.ops
            .iter()
            .try_fold(DenseOp::identity(), |acc, op| Ok(&op.dense()? * &acc))
    }
}

/// Qubit pairs supporting a native CNOT in either orientation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CouplingGraph {
    edges: BTreeSet<(usize, usize)>,
}

#[derive(Serialize, Deserialize)]
struct CouplingGraphJson {
    edges: Vec<[usize; 2]>,
}

impl CouplingGraph {
    pub fn new(edges: &[[usize; 2]]) -> Result<Self> {
        let mut set = BTreeSet::new();
        for &[a, b] in edges {
            if a == b {
                return Err(Error::SameQubit(a));
            }
            set.insert((a.min(b), a.max(b)));
        }
        Ok(Self { edges: set })
    }

    /// All pairs among the register qubits.
    pub fn complete() -> Self {
        let edges = (0..NUM_QUBITS)
            .flat_map(|a| (a + 1..NUM_QUBITS).map(move |b| (a, b)))
            .collect();
        Self { edges }
    }

    /// The 5-qubit T-shaped device `{1,0}, {1,2}, {1,3}, {3,4}`.
    pub fn quito() -> Self {
        Self::new(&[[1, 0], [1, 2], [1, 3], [3, 4]]).expect("valid edges")
    }

    /// Parses `{"edges": [[1,0],[1,2],...]}`.
    pub fn from_json(text: &str) -> Result<Self> {
        let g: CouplingGraphJson = serde_json::from_str(text)?;
        Self::new(&g.edges)
    }

    pub fn to_json(&self) -> String {
        let g = CouplingGraphJson {
            edges: self.edges.iter().map(|&(a, b)| [a, b]).collect(),
        };
        serde_json::to_string(&g).expect("plain data")
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.edges.contains(&(a.min(b), a.max(b)))
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    fn neighbors(&self, a: usize) -> impl Iterator<Item = usize> + '_ {
        self.edges.iter().filter_map(move |&(x, y)| {
            if x == a {
                Some(y)
            } else if y == a {
                Some(x)
            } else {
                None
            }
        })
    }

    /// BFS shortest path through register qubits, neighbors visited in
    /// increasing order. Vertices outside the register are not used.
    pub fn shortest_path(&self, from: usize, to: usize) -> Option<Vec<usize>> {
        if from >= NUM_QUBITS || to >= NUM_QUBITS {
            return None;
        }
        let mut prev = [usize::MAX; NUM_QUBITS];
        let mut seen = [false; NUM_QUBITS];
        seen[from] = true;
        let mut queue = VecDeque::from([from]);
        while let Some(a) = queue.pop_front() {
            if a == to {
                let mut path = vec![to];
                let mut cur = to;
                while cur != from {
                    cur = prev[cur];
                    path.push(cur);
                }
                path.reverse();
                return Some(path);
            }
            let mut ns: Vec<usize> = self.neighbors(a).filter(|&n| n < NUM_QUBITS).collect();
            ns.sort_unstable();
            for n in ns {
                if !seen[n] {
                    seen[n] = true;
                    prev[n] = a;
                    queue.push_back(n);
                }
            }
        }
        None
    }
}

fn route_cnot(target: usize, control: usize, g: &CouplingGraph, out: &mut Vec<GateOp>) -> Result<()> {
    if g.has_edge(target, control) {
        out.push(GateOp::cnot(target, control));
        return Ok(());
    }
    // the lower-numbered endpoint walks toward the other one
    let (mover, anchor) = if target < control { (target, control) } else { (control, target) };
    let path = g
        .shortest_path(mover, anchor)
        .ok_or(Error::Disconnected(mover, anchor))?;
    let swaps: Vec<(usize, usize)> = path.windows(2).take(path.len() - 2).map(|w| (w[0], w[1])).collect();
    let parked = path[path.len() - 2];
    for &(a, b) in &swaps {
        out.push(GateOp::Swap(a, b));
    }
    out.push(if mover == target {
        GateOp::cnot(parked, control)
    } else {
        GateOp::cnot(target, parked)
    });
    for &(a, b) in swaps.iter().rev() {
        out.push(GateOp::Swap(a, b));
    }
    Ok(())
}

fn same_pair(a: &GateOp, b: &GateOp) -> bool {
    match (a, b) {
        (GateOp::Swap(a0, a1), GateOp::Swap(b0, b1)) => (a0.min(a1), a0.max(a1)) == (b0.min(b1), b0.max(b1)),
        _ => false,
    }
}

/// Rewrites `c` so every CNOT sits on an edge of `g`.
///
/// Non-native CNOTs are conjugated by SWAP chains along BFS shortest paths,
/// adjacent identical SWAPs cancel, and each remaining SWAP becomes three
/// native CNOTs. The operator is unchanged.
pub fn rewrite_for_graph(c: &Circuit, g: &CouplingGraph) -> Result<Circuit> {
    let mut routed = Vec::with_capacity(c.len());
    for op in c.ops() {
        op.validate()?;
        match *op {
            GateOp::Cnot { target, control } => route_cnot(target, control, g, &mut routed)?,
            GateOp::Swap(a, b) if g.has_edge(a, b) => routed.push(*op),
            GateOp::Swap(a, b) => {
                for (t, ctl) in [(a, b), (b, a), (a, b)] {
                    route_cnot(t, ctl, g, &mut routed)?;
                }
            }
            _ => routed.push(*op),
        }
    }
    let mut cancelled: Vec<GateOp> = Vec::with_capacity(routed.len());
    for op in routed {
        if cancelled.last().is_some_and(|last| same_pair(last, &op)) {
            cancelled.pop();
        } else {
            cancelled.push(op);
        }
    }
    let mut ops = Vec::with_capacity(cancelled.len());
    for op in cancelled {
        match op {
            GateOp::Swap(a, b) => {
                let (lo, hi) = (a.min(b), a.max(b));
                ops.extend([GateOp::cnot(lo, hi), GateOp::cnot(hi, lo), GateOp::cnot(lo, hi)]);
            }
            other => ops.push(other),
        }
    }
    Circuit::from_ops(ops)
}

fn fmt_angle(a: f64) -> String {
    format!("{a:.16e}")
}

/// OpenQASM 2.0 text of `c`.
///
/// `X_[ij]` (target `i`, control `j`) is written `cx q[j],q[i];`.
pub fn to_qasm(c: &Circuit) -> String {
    let mut s = String::from("OPENQASM 2.0;\ninclude \"qelib1.inc\";\nqreg q[4];\n");
    for op in c.ops() {
        let _ = match *op {
            GateOp::X(q) => writeln!(s, "x q[{q}];"),
            GateOp::Y(q) => writeln!(s, "y q[{q}];"),
            GateOp::Z(q) => writeln!(s, "z q[{q}];"),
            GateOp::H(q) => writeln!(s, "h q[{q}];"),
            GateOp::P(q) => writeln!(s, "s q[{q}];"),
            GateOp::Pdg(q) => writeln!(s, "sdg q[{q}];"),
            GateOp::T(q) => writeln!(s, "t q[{q}];"),
            GateOp::Rz(q, a) => writeln!(s, "rz({}) q[{q}];", fmt_angle(a)),
            GateOp::Ry(q, a) => writeln!(s, "ry({}) q[{q}];", fmt_angle(a)),
            GateOp::Rx(q, a) => writeln!(s, "rx({}) q[{q}];", fmt_angle(a)),
            GateOp::Cnot { target, control } => writeln!(s, "cx q[{control}],q[{target}];"),
            GateOp::Swap(a, b) => writeln!(s, "swap q[{a}],q[{b}];"),
        };
    }
    s
}

fn parse_angle(expr: &str) -> std::result::Result<f64, String> {
    let e: String = expr.chars().filter(|c| !c.is_whitespace()).collect();
    if let Ok(v) = e.parse::<f64>() {
        return Ok(v);
    }
    // `[-][N*]pi[/M]`
    let (sign, rest) = match e.strip_prefix('-') {
        Some(r) => (-1.0, r),
        None => (1.0, e.as_str()),
    };
    let (num, rest) = match rest.split_once('*') {
        Some((n, r)) => (n.parse::<f64>().map_err(|err| format!("bad angle `{expr}`: {err}"))?, r),
        None => (1.0, rest),
    };
    let (pi, den) = match rest.split_once('/') {
        Some((p, d)) => (p, d.parse::<f64>().map_err(|err| format!("bad angle `{expr}`: {err}"))?),
        None => (rest, 1.0),
    };
    if pi != "pi" {
        return Err(format!("bad angle `{expr}`"));
    }
    Ok(sign * num * std::f64::consts::PI / den)
}

fn parse_qubit(arg: &str, nq: usize) -> std::result::Result<usize, String> {
    let a = arg.trim();
    let inner = a
        .strip_prefix("q[")
        .and_then(|r| r.strip_suffix(']'))
        .ok_or_else(|| format!("expected `q[k]`, got `{a}`"))?;
    let q: usize = inner.trim().parse().map_err(|e| format!("bad qubit `{a}`: {e}"))?;
    if q >= nq {
        return Err(format!("qubit {q} outside qreg of size {nq}"));
    }
    Ok(q)
}

/// Parses the OpenQASM 2.0 subset written by [`to_qasm`].
pub fn parse_qasm(text: &str) -> Result<Circuit> {
    let mut stripped = String::new();
    let mut line_of = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let code = line.split("//").next().unwrap_or("");
        for ch in code.chars() {
            stripped.push(ch);
            line_of.push(n + 1);
        }
        stripped.push('\n');
        line_of.push(n + 1);
    }
    let mut ops = Vec::new();
    let mut nq: Option<usize> = None;
    let mut offset = 0;
    for stmt in stripped.split(';') {
        let line = line_of.get(offset + stmt.len() - stmt.trim_start().len()).copied().unwrap_or(0);
        offset += stmt.len() + 1;
        let stmt = stmt.trim();
        if stmt.is_empty() {
            continue;
        }
        let err = |msg: String| Error::Parse { line, msg };
        if stmt.starts_with("OPENQASM") || stmt.starts_with("include") || stmt.starts_with("creg") {
            continue;
        }
        if let Some(rest) = stmt.strip_prefix("qreg") {
            let size = rest
                .trim()
                .strip_prefix("q[")
                .and_then(|r| r.strip_suffix(']'))
                .and_then(|r| r.trim().parse::<usize>().ok())
                .ok_or_else(|| err(format!("bad qreg `{stmt}`")))?;
            if size > NUM_QUBITS {
                return Err(err(format!("qreg of size {size} exceeds {NUM_QUBITS} qubits")));
            }
            nq = Some(size);
            continue;
        }
        let nq = nq.ok_or_else(|| err("gate before qreg declaration".into()))?;
        let (head, args) = match stmt.find(')') {
            Some(close) if stmt.contains('(') => (&stmt[..=close], stmt[close + 1..].trim()),
            _ => stmt
                .split_once(char::is_whitespace)
                .map(|(h, a)| (h, a.trim()))
                .ok_or_else(|| err(format!("missing operands in `{stmt}`")))?,
        };
        let (name, angle) = match head.split_once('(') {
            Some((n, a)) => {
                let a = a.strip_suffix(')').ok_or_else(|| err(format!("bad parameter list `{head}`")))?;
                (n.trim(), Some(parse_angle(a).map_err(err)?))
            }
            None => (head.trim(), None),
        };
        let qs: Vec<usize> = args
            .split(',')
            .map(|a| parse_qubit(a, nq))
            .collect::<std::result::Result<_, _>>()
            .map_err(err)?;
        let arity = |n: usize| {
            if qs.len() == n {
                Ok(())
            } else {
                Err(err(format!("`{name}` takes {n} operand(s)")))
            }
        };
        let needs_angle = || angle.ok_or_else(|| err(format!("`{name}` needs an angle")));
        let op = match name {
            "x" | "y" | "z" | "h" | "s" | "sdg" | "t" => {
                arity(1)?;
                let q = qs[0];
                match name {
                    "x" => GateOp::X(q),
                    "y" => GateOp::Y(q),
                    "z" => GateOp::Z(q),
                    "h" => GateOp::H(q),
                    "s" => GateOp::P(q),
                    "sdg" => GateOp::Pdg(q),
                    _ => GateOp::T(q),
                }
            }
            "rz" => {
                arity(1)?;
                GateOp::Rz(qs[0], needs_angle()?)
            }
            "ry" => {
                arity(1)?;
                GateOp::Ry(qs[0], needs_angle()?)
            }
            "rx" => {
                arity(1)?;
                GateOp::Rx(qs[0], needs_angle()?)
            }
            "cx" => {
                arity(2)?;
                GateOp::cnot(qs[1], qs[0])
            }
            "swap" => {
                arity(2)?;
                GateOp::Swap(qs[0], qs[1])
            }
            other => return Err(err(format!("unsupported gate `{other}`"))),
        };
        op.validate().map_err(|e| err(e.to_string()))?;
        ops.push(op);
    }
    Circuit::from_ops(ops)
}
