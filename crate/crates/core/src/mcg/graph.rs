use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashSet};
use std::fmt;

use crate::lattice::{Interval, LatticeError, PixelSet, Window};

/// A structuring element together with the window it is declared on.
///
/// The window only matters for locality bookkeeping; evaluation uses `se`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct StructOp {
    se: PixelSet,
    window: Window,
}

impl StructOp {
    pub fn new(se: PixelSet, window: Window) -> Result<Self, LatticeError> {
        if let Some(p) = se.iter().find(|&p| !window.contains(p)) {
            return Err(LatticeError::OutsideWindow(p));
        }
        Ok(StructOp { se, window })
    }

    /// Declared on the centered `d × d` square.
    pub fn square(se: PixelSet, d: u32) -> Result<Self, LatticeError> {
        Self::new(se, Window::square(d))
    }

    pub fn se(&self) -> &PixelSet {
        &self.se
    }

    pub fn window(&self) -> &Window {
        &self.window
    }
}

/// The W-operator computed by an operator vertex.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Operator {
    Identity,
    Complement,
    /// The constant operator `X ↦ ∅`.
    ConstEmpty,
    Erosion(StructOp),
    Dilation(StructOp),
    Opening(StructOp),
    Closing(StructOp),
    /// `φ_B γ_B`.
    Asf(StructOp),
    SupGen(Interval),
    InfGen(Interval),
}

impl Operator {
    pub fn name(&self) -> &'static str {
        match self {
            Operator::Identity => "identity",
            Operator::Complement => "complement",
            Operator::ConstEmpty => "const_empty",
            Operator::Erosion(_) => "erosion",
            Operator::Dilation(_) => "dilation",
            Operator::Opening(_) => "opening",
            Operator::Closing(_) => "closing",
            Operator::Asf(_) => "asf",
            Operator::SupGen(_) => "supgen",
            Operator::InfGen(_) => "infgen",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum VertexKind {
    Input,
    Output,
    Sup,
    Inf,
    Operator(Operator),
}

impl VertexKind {
    pub fn name(&self) -> &'static str {
        match self {
            VertexKind::Input => "input",
            VertexKind::Output => "output",
            VertexKind::Sup => "sup",
            VertexKind::Inf => "inf",
            VertexKind::Operator(op) => op.name(),
        }
    }
}

impl From<Operator> for VertexKind {
    fn from(op: Operator) -> Self {
        VertexKind::Operator(op)
    }
}

/// A directed graph of computing vertices, not yet checked against the
/// axioms. Vertices are addressed by insertion index.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MCGraph {
    vertices: Vec<VertexKind>,
    edges: Vec<(usize, usize)>,
}

impl MCGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_vertex(&mut self, kind: impl Into<VertexKind>) -> usize {
        self.vertices.push(kind.into());
        self.vertices.len() - 1
    }

    pub fn add_edge(&mut self, from: usize, to: usize) {
        self.edges.push((from, to));
    }

    pub fn vertices(&self) -> &[VertexKind] {
        &self.vertices
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Input → `ops[0]` → … → Output.
    pub fn chain(ops: impl IntoIterator<Item = Operator>) -> Self {
        let mut g = MCGraph::new();
        let mut prev = g.add_vertex(VertexKind::Input);
        for op in ops {
            let v = g.add_vertex(op);
            g.add_edge(prev, v);
            prev = v;
        }
        let out = g.add_vertex(VertexKind::Output);
        g.add_edge(prev, out);
        g
    }

    pub fn validate(self) -> Result<ValidGraph, Vec<Violation>> {
        validate(self)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Axiom {
    /// Edges must join existing, distinct vertex pairs, each at most once.
    Structure,
    /// Acyclic, more than two vertices.
    A1,
    /// Unique source, and it is the input.
    A2,
    /// Unique sink, and it is the output; every other vertex feeds something.
    A3,
    /// Operator and output vertices have exactly one incoming edge.
    A4,
    /// Supremum and infimum vertices have at least two incoming edges.
    A5,
}

impl fmt::Display for Axiom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Axiom::Structure => "structure",
            Axiom::A1 => "A1",
            Axiom::A2 => "A2",
            Axiom::A3 => "A3",
            Axiom::A4 => "A4",
            Axiom::A5 => "A5",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub axiom: Axiom,
    pub vertices: Vec<usize>,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] {} (vertices {:?})", self.axiom, self.message, self.vertices)
    }
}

/// A graph that satisfies every axiom, with its evaluation order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValidGraph {
    graph: MCGraph,
    order: Vec<usize>,
    inputs: Vec<Vec<usize>>,
    input: usize,
    output: usize,
}

impl ValidGraph {
    pub fn graph(&self) -> &MCGraph {
        &self.graph
    }

    pub fn into_graph(self) -> MCGraph {
        self.graph
    }

    /// Topological order; among ready vertices the smallest index goes first.
    pub fn order(&self) -> &[usize] {
        &self.order
    }

    /// Incoming neighbors of `v`, ascending.
    pub fn inputs_of(&self, v: usize) -> &[usize] {
        &self.inputs[v]
    }

    pub fn input_vertex(&self) -> usize {
        self.input
    }

    pub fn output_vertex(&self) -> usize {
        self.output
    }

    pub fn kind(&self, v: usize) -> &VertexKind {
        &self.graph.vertices[v]
    }
}

/// Check the axioms; on failure every violation found is reported.
pub fn validate(g: MCGraph) -> Result<ValidGraph, Vec<Violation>> {
    let n = g.vertices.len();
    let mut out = Vec::new();
    let mut violation = |axiom, vertices: Vec<usize>, message: String| {
        out.push(Violation {
            axiom,
            vertices,
            message,
        })
    };

    let mut inputs = vec![Vec::new(); n];
    let mut outputs = vec![Vec::new(); n];
    let mut seen = HashSet::new();
    for &(a, b) in &g.edges {
        if a >= n || b >= n {
            violation(
                Axiom::Structure,
                vec![a, b],
                format!("edge ({a},{b}) references a missing vertex"),
            );
            continue;
        }
        if !seen.insert((a, b)) {
            violation(Axiom::Structure, vec![a, b], format!("edge ({a},{b}) repeated"));
            continue;
        }
        inputs[b].push(a);
        outputs[a].push(b);
    }
    for l in inputs.iter_mut().chain(outputs.iter_mut()) {
        l.sort_unstable();
    }

    if n <= 2 {
        violation(Axiom::A1, vec![], format!("graph has {n} vertices, needs more than 2"));
    }
    let order = kahn(&inputs, &outputs);
    if order.len() < n {
        let mut on_cycle = vec![true; n];
        for &v in &order {
            on_cycle[v] = false;
        }
        let cyc: Vec<usize> = (0..n).filter(|&v| on_cycle[v]).collect();
        violation(Axiom::A1, cyc, "graph has a cycle".into());
    }

    let sources: Vec<usize> = (0..n).filter(|&v| inputs[v].is_empty()).collect();
    let input_vertices: Vec<usize> = (0..n)
        .filter(|&v| g.vertices[v] == VertexKind::Input)
        .collect();
    if sources.len() != 1 || g.vertices[sources[0]] != VertexKind::Input {
        violation(
            Axiom::A2,
            sources.clone(),
            format!("expected exactly one source and it must be the input, found {} source(s)", sources.len()),
        );
    }
    for &v in &input_vertices {
        if !inputs[v].is_empty() {
            violation(Axiom::A2, vec![v], "input vertex has incoming edges".into());
        }
    }
    if input_vertices.len() > 1 {
        violation(Axiom::A2, input_vertices.clone(), "more than one input vertex".into());
    }

    let sinks: Vec<usize> = (0..n).filter(|&v| outputs[v].is_empty()).collect();
    let output_vertices: Vec<usize> = (0..n)
        .filter(|&v| g.vertices[v] == VertexKind::Output)
        .collect();
    if sinks.len() != 1 || g.vertices[sinks[0]] != VertexKind::Output {
        violation(
            Axiom::A3,
            sinks.clone(),
            format!("expected exactly one sink and it must be the output, found {} sink(s)", sinks.len()),
        );
    }
    for &v in &output_vertices {
        if !outputs[v].is_empty() {
            violation(Axiom::A3, vec![v], "output vertex has outgoing edges".into());
        }
    }
    if output_vertices.len() > 1 {
        violation(Axiom::A3, output_vertices.clone(), "more than one output vertex".into());
    }

    for (v, kind) in g.vertices.iter().enumerate() {
        let deg = inputs[v].len();
        match kind {
            VertexKind::Operator(_) | VertexKind::Output if deg != 1 => violation(
                Axiom::A4,
                vec![v],
                format!("{} vertex has in-degree {deg}, expected 1", kind.name()),
            ),
            VertexKind::Sup | VertexKind::Inf if deg < 2 => violation(
                Axiom::A5,
                vec![v],
                format!("{} vertex has in-degree {deg}, expected at least 2", kind.name()),
            ),
            _ => {}
        }
    }

    if !out.is_empty() {
        return Err(out);
    }
    Ok(ValidGraph {
        order,
        input: input_vertices[0],
        output: output_vertices[0],
        inputs,
        graph: g,
    })
}

/// Kahn's algorithm, always releasing the smallest ready index. Vertices on
/// or behind a cycle are left out.
fn kahn(inputs: &[Vec<usize>], outputs: &[Vec<usize>]) -> Vec<usize> {
    let n = inputs.len();
    let mut indeg: Vec<usize> = inputs.iter().map(Vec::len).collect();
    let mut ready: BinaryHeap<Reverse<usize>> =
        (0..n).filter(|&v| indeg[v] == 0).map(Reverse).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(Reverse(v)) = ready.pop() {
        order.push(v);
        for &w in &outputs[v] {
            indeg[w] -= 1;
            if indeg[w] == 0 {
                ready.push(Reverse(w));
            }
        }
    }
    order
}

#[cfg(test)]
mod tests {
    use super::*;

    fn erosion() -> Operator {
        Operator::Erosion(StructOp::square(PixelSet::cross(), 3).unwrap())
    }

    fn axioms(g: MCGraph) -> Vec<Axiom> {
        let mut a: Vec<Axiom> = validate(g).unwrap_err().into_iter().map(|v| v.axiom).collect();
        a.sort();
        a.dedup();
        a
    }

    #[test]
    fn trivial_chain_is_valid() {
        let g = MCGraph::chain([erosion()]).validate().unwrap();
        assert_eq!(g.order(), &[0, 1, 2]);
        assert_eq!(g.input_vertex(), 0);
        assert_eq!(g.output_vertex(), 2);
    }

    #[test]
    fn two_cycle_breaks_a1() {
        let mut g = MCGraph::chain([erosion(), Operator::Complement]);
        g.add_edge(2, 1);
        assert!(axioms(g).contains(&Axiom::A1));
    }

    #[test]
    fn sup_with_one_input_breaks_a5() {
        let mut g = MCGraph::new();
        let i = g.add_vertex(VertexKind::Input);
        let s = g.add_vertex(VertexKind::Sup);
        let o = g.add_vertex(VertexKind::Output);
        g.add_edge(i, s);
        g.add_edge(s, o);
        assert_eq!(axioms(g), vec![Axiom::A5]);
    }

    #[test]
    fn too_small_and_dangling() {
        let mut g = MCGraph::new();
        let i = g.add_vertex(VertexKind::Input);
        let o = g.add_vertex(VertexKind::Output);
        g.add_edge(i, o);
        assert_eq!(axioms(g), vec![Axiom::A1]);

        let mut g = MCGraph::chain([erosion()]);
        g.add_edge(0, 7);
        assert_eq!(axioms(g), vec![Axiom::Structure]);
    }
}
