//! Canonical architectures as a sequence of layers.
//!
//! Each layer reads the previous layer's output (the first reads the
//! input). Set layers carry one structuring element on the centered square
//! `W_d`; combiner layers carry `k` intervals on `W_d` and join `k`
//! sup-generating (or inf-generating) vertices with a supremum (or infimum).
//! A [`ParamVector`] is one point of the parameter lattice; its neighbors
//! differ from it by one point in one set or one interval extremity.

mod io;

pub use io::{deserialize_params, serialize_params};

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lattice::{Interval, PixelSet, Window};
use crate::mcg::{MCGraph, Operator, StructOp, ValidGraph, VertexKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum LayerSpec {
    /// Supremum of `k` sup-generating operators on `W_d`.
    #[serde(rename = "supgen")]
    SupGenSup { k: usize, d: u32 },
    /// Infimum of `k` inf-generating operators on `W_d`.
    #[serde(rename = "infgen")]
    InfGenInf { k: usize, d: u32 },
    Asf { d: u32 },
    Erosion { d: u32 },
    Dilation { d: u32 },
    Opening { d: u32 },
    Closing { d: u32 },
    Complement,
}

impl LayerSpec {
    pub fn name(&self) -> &'static str {
        match self {
            LayerSpec::SupGenSup { .. } => "supgen",
            LayerSpec::InfGenInf { .. } => "infgen",
            LayerSpec::Asf { .. } => "asf",
            LayerSpec::Erosion { .. } => "erosion",
            LayerSpec::Dilation { .. } => "dilation",
            LayerSpec::Opening { .. } => "opening",
            LayerSpec::Closing { .. } => "closing",
            LayerSpec::Complement => "complement",
        }
    }

    /// Window side, if the layer has parameters.
    pub fn side(&self) -> Option<u32> {
        match *self {
            LayerSpec::SupGenSup { d, .. }
            | LayerSpec::InfGenInf { d, .. }
            | LayerSpec::Asf { d }
            | LayerSpec::Erosion { d }
            | LayerSpec::Dilation { d }
            | LayerSpec::Opening { d }
            | LayerSpec::Closing { d } => Some(d),
            LayerSpec::Complement => None,
        }
    }

    /// Number of intervals, for combiner layers.
    pub fn intervals(&self) -> Option<usize> {
        match *self {
            LayerSpec::SupGenSup { k, .. } | LayerSpec::InfGenInf { k, .. } => Some(k),
            _ => None,
        }
    }

    fn check(&self) -> Result<(), String> {
        if let Some(d) = self.side() {
            if d % 2 == 0 {
                return Err(format!("d must be odd, got {d}"));
            }
            if self.intervals().is_some() && d > 7 {
                return Err(format!("d must be at most 7 for interval layers, got {d}"));
            }
            if d > 63 {
                return Err(format!("d must be at most 63, got {d}"));
            }
        }
        if self.intervals() == Some(0) {
            return Err("k must be at least 1".into());
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArchitectureSpec {
    pub layers: Vec<LayerSpec>,
}

impl ArchitectureSpec {
    pub fn new(layers: Vec<LayerSpec>) -> Result<Self, ArchError> {
        let a = ArchitectureSpec { layers };
        a.check()?;
        Ok(a)
    }

    pub fn check(&self) -> Result<(), ArchError> {
        if self.layers.is_empty() {
            return Err(ArchError::Spec {
                layer: None,
                message: "architecture has no layers".into(),
            });
        }
        for (i, l) in self.layers.iter().enumerate() {
            l.check().map_err(|message| ArchError::Spec {
                layer: Some(i),
                message,
            })?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ArchError {
    #[error("{}{message}", layer_prefix(*.layer))]
    Spec { layer: Option<usize>, message: String },
    #[error("{}{message}", layer_prefix(*.layer))]
    Shape { layer: Option<usize>, message: String },
    #[error("{}{message}", layer_prefix(*.layer))]
    Parse { layer: Option<usize>, message: String },
}

fn layer_prefix(layer: Option<usize>) -> String {
    layer.map(|l| format!("layer {l}: ")).unwrap_or_default()
}

impl ArchError {
    fn parse(layer: Option<usize>, message: impl Into<String>) -> Self {
        ArchError::Parse {
            layer,
            message: message.into(),
        }
    }
}

/// Parameters of one layer.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum LayerParams {
    Set(StructOp),
    Intervals(Vec<Interval>),
    None,
}

impl LayerParams {
    fn neighbor_count(&self) -> usize {
        match self {
            LayerParams::Set(s) => s.window().len(),
            LayerParams::Intervals(v) => v.iter().map(Interval::neighbor_count).sum(),
            LayerParams::None => 0,
        }
    }

    fn nth_neighbor(&self, mut k: usize) -> LayerParams {
        match self {
            LayerParams::Set(s) => {
                let p = s.window().points()[k];
                let mut se = s.se().clone();
                if !se.remove(p) {
                    se.insert(p);
                }
                LayerParams::Set(StructOp::new(se, s.window().clone()).expect("point of the window"))
            }
            LayerParams::Intervals(v) => {
                let mut out = v.clone();
                for (slot, i) in v.iter().enumerate() {
                    let c = i.neighbor_count();
                    if k < c {
                        out[slot] = i.nth_neighbor(k).expect("index below count");
                        return LayerParams::Intervals(out);
                    }
                    k -= c;
                }
                unreachable!("neighbor index out of range")
            }
            LayerParams::None => unreachable!("layer has no parameters"),
        }
    }
}

/// One point `C` of the parameter lattice of an architecture.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ParamVector {
    layers: Vec<LayerParams>,
}

impl ParamVector {
    pub fn new(layers: Vec<LayerParams>) -> Self {
        ParamVector { layers }
    }

    pub fn layers(&self) -> &[LayerParams] {
        &self.layers
    }

    /// `|N(C)|`: the sum of per-coordinate neighborhood sizes.
    pub fn neighbor_count(&self) -> usize {
        self.layers.iter().map(LayerParams::neighbor_count).sum()
    }

    /// The `k`-th neighbor in canonical order: by layer, then slot, then
    /// window point.
    ///
    /// # Panics
    ///
    /// If `k >= self.neighbor_count()`.
    pub fn nth_neighbor(&self, mut k: usize) -> ParamVector {
        for (l, p) in self.layers.iter().enumerate() {
            let c = p.neighbor_count();
            if k < c {
                let mut out = self.clone();
                out.layers[l] = p.nth_neighbor(k);
                return out;
            }
            k -= c;
        }
        panic!("neighbor index {k} out of range");
    }

    /// Check that the parameters fit `arch`, layer by layer.
    pub fn check_shape(&self, arch: &ArchitectureSpec) -> Result<(), ArchError> {
        let shape = |layer, message: String| ArchError::Shape {
            layer: Some(layer),
            message,
        };
        if self.layers.len() != arch.layers.len() {
            return Err(ArchError::Shape {
                layer: None,
                message: format!(
                    "architecture has {} layers, parameters have {}",
                    arch.layers.len(),
                    self.layers.len()
                ),
            });
        }
        for (l, (spec, p)) in arch.layers.iter().zip(&self.layers).enumerate() {
            let w = spec.side().map(Window::square).unwrap_or_else(Window::empty);
            match (spec, p) {
                (LayerSpec::Complement, LayerParams::None) => {}
                (LayerSpec::SupGenSup { k, .. } | LayerSpec::InfGenInf { k, .. }, LayerParams::Intervals(v)) => {
                    if v.len() != *k {
                        return Err(shape(l, format!("expected {k} intervals, found {}", v.len())));
                    }
                    if let Some(i) = v.iter().position(|i| !i.window().is_subset(&w)) {
                        return Err(shape(l, format!("interval {i} is not inside the layer window")));
                    }
                }
                (LayerSpec::SupGenSup { .. } | LayerSpec::InfGenInf { .. } | LayerSpec::Complement, _) => {
                    return Err(shape(l, format!("{} layer given the wrong kind of parameters", spec.name())));
                }
                (_, LayerParams::Set(s)) => {
                    if !s.window().is_subset(&w) {
                        return Err(shape(l, "structuring element is not inside the layer window".into()));
                    }
                }
                (_, _) => {
                    return Err(shape(l, format!("{} layer expects one structuring element", spec.name())));
                }
            }
        }
        Ok(())
    }
}

/// All of `N(C)`, in canonical order. Never contains `params` itself.
pub fn param_neighbors(params: &ParamVector) -> Vec<ParamVector> {
    (0..params.neighbor_count())
        .map(|k| params.nth_neighbor(k))
        .collect()
}

/// `n` distinct neighbors drawn uniformly without replacement, returned in
/// canonical order. If `n ≥ |N(C)|` the whole neighborhood is returned.
pub fn sample_neighbors<R: Rng + ?Sized>(
    params: &ParamVector,
    n: usize,
    rng: &mut R,
) -> Vec<ParamVector> {
    sample_neighbor_indices(params, n, rng)
        .into_iter()
        .map(|k| params.nth_neighbor(k))
        .collect()
}

/// The indices behind [`sample_neighbors`].
pub fn sample_neighbor_indices<R: Rng + ?Sized>(
    params: &ParamVector,
    n: usize,
    rng: &mut R,
) -> Vec<usize> {
    let total = params.neighbor_count();
    if n >= total {
        return (0..total).collect();
    }
    let mut picked = index::sample(rng, total, n).into_vec();
    picked.sort_unstable();
    picked
}

/// The output vertex of each layer, alongside the compiled graph.
#[derive(Clone, Debug)]
pub struct Compiled {
    pub graph: ValidGraph,
    pub layer_outputs: Vec<usize>,
}

/// Build the graph for `params` on `arch`.
pub fn compile(arch: &ArchitectureSpec, params: &ParamVector) -> Result<Compiled, ArchError> {
    arch.check()?;
    params.check_shape(arch)?;
    let mut g = MCGraph::new();
    let mut prev = g.add_vertex(VertexKind::Input);
    let mut layer_outputs = Vec::with_capacity(arch.layers.len());
    for (spec, p) in arch.layers.iter().zip(&params.layers) {
        let single = |g: &mut MCGraph, op: Operator| {
            let v = g.add_vertex(op);
            g.add_edge(prev, v);
            v
        };
        prev = match (spec, p) {
            (LayerSpec::Complement, _) => single(&mut g, Operator::Complement),
            (LayerSpec::Asf { .. }, LayerParams::Set(s)) => single(&mut g, Operator::Asf(s.clone())),
            (LayerSpec::Erosion { .. }, LayerParams::Set(s)) => single(&mut g, Operator::Erosion(s.clone())),
            (LayerSpec::Dilation { .. }, LayerParams::Set(s)) => single(&mut g, Operator::Dilation(s.clone())),
            (LayerSpec::Opening { .. }, LayerParams::Set(s)) => single(&mut g, Operator::Opening(s.clone())),
            (LayerSpec::Closing { .. }, LayerParams::Set(s)) => single(&mut g, Operator::Closing(s.clone())),
            (LayerSpec::SupGenSup { .. } | LayerSpec::InfGenInf { .. }, LayerParams::Intervals(v)) => {
                let sup = matches!(spec, LayerSpec::SupGenSup { .. });
                let leaves: Vec<usize> = v
                    .iter()
                    .map(|i| {
                        let op = if sup {
                            Operator::SupGen(i.clone())
                        } else {
                            Operator::InfGen(i.clone())
                        };
                        single(&mut g, op)
                    })
                    .collect();
                if let [one] = leaves[..] {
                    one
                } else {
                    let join = g.add_vertex(if sup { VertexKind::Sup } else { VertexKind::Inf });
                    for v in leaves {
                        g.add_edge(v, join);
                    }
                    join
                }
            }
            _ => unreachable!("shape checked"),
        };
        layer_outputs.push(prev);
    }
    let out = g.add_vertex(VertexKind::Output);
    g.add_edge(prev, out);
    let graph = g.validate().map_err(|v| ArchError::Shape {
        layer: None,
        message: format!("compiled graph is invalid: {v:?}"),
    })?;
    Ok(Compiled {
        graph,
        layer_outputs,
    })
}

/// The identity-like starting point: every structuring element `{o}`, every
/// interval `[{o}, W_d]`.
pub fn identity_params(arch: &ArchitectureSpec) -> ParamVector {
    let layers = arch
        .layers
        .iter()
        .map(|spec| match *spec {
            LayerSpec::Complement => LayerParams::None,
            LayerSpec::SupGenSup { k, d } | LayerSpec::InfGenInf { k, d } => {
                let w = Window::square(d);
                let i = Interval::new(PixelSet::origin(), w.support(), w).expect("o ∈ W_d");
                LayerParams::Intervals(vec![i; k])
            }
            _ => {
                let d = spec.side().expect("set layer");
                LayerParams::Set(StructOp::square(PixelSet::origin(), d).expect("o ∈ W_d"))
            }
        })
        .collect();
    ParamVector { layers }
}

/// [`identity_params`] followed by `perturbation` uniformly chosen
/// distance-one moves on every coordinate (each structuring element and
/// each interval separately).
pub fn init_params<R: Rng + ?Sized>(
    arch: &ArchitectureSpec,
    rng: &mut R,
    perturbation: usize,
) -> ParamVector {
    let mut p = identity_params(arch);
    for layer in &mut p.layers {
        match layer {
            LayerParams::Set(s) => {
                for _ in 0..perturbation {
                    let k = rng.random_range(0..s.window().len());
                    if let LayerParams::Set(n) = LayerParams::Set(s.clone()).nth_neighbor(k) {
                        *s = n;
                    }
                }
            }
            LayerParams::Intervals(v) => {
                for i in v.iter_mut() {
                    for _ in 0..perturbation {
                        let k = rng.random_range(0..i.neighbor_count());
                        *i = i.nth_neighbor(k).expect("index below count");
                    }
                }
            }
            LayerParams::None => {}
        }
    }
    p
}
