use crate::lattice::{BooleanFn, PixelSet, Point, Window, DEFAULT_TABLE_CAP};
use crate::morphology::{
    asf_layer, close, dilate, erode, inf_generating, open, sup_generating, BinaryImage,
};

use super::{McgError, Operator, ValidGraph, VertexKind};

pub(crate) fn apply_operator(op: &Operator, x: &BinaryImage) -> BinaryImage {
    match op {
        Operator::Identity => x.clone(),
        Operator::Complement => x.complement(),
        Operator::ConstEmpty => BinaryImage::new(x.width(), x.height()),
        Operator::Erosion(s) => erode(x, s.se()),
        Operator::Dilation(s) => dilate(x, s.se()),
        Operator::Opening(s) => open(x, s.se()),
        Operator::Closing(s) => close(x, s.se()),
        Operator::Asf(s) => asf_layer(x, s.se()),
        Operator::SupGen(i) => sup_generating(x, i),
        Operator::InfGen(i) => inf_generating(x, i),
    }
}

fn vertex_output(
    g: &ValidGraph,
    v: usize,
    vals: &[Option<BinaryImage>],
    x: &BinaryImage,
) -> BinaryImage {
    let ins = g.inputs_of(v);
    let get = |i: usize| vals[i].as_ref().expect("inputs precede in topological order");
    match g.kind(v) {
        VertexKind::Input => x.clone(),
        VertexKind::Output => get(ins[0]).clone(),
        VertexKind::Sup => ins[1..]
            .iter()
            .fold(get(ins[0]).clone(), |acc, &i| acc.union(get(i))),
        VertexKind::Inf => ins[1..]
            .iter()
            .fold(get(ins[0]).clone(), |acc, &i| acc.intersection(get(i))),
        VertexKind::Operator(op) => apply_operator(op, get(ins[0])),
    }
}

/// Output image of every vertex, indexed by vertex.
pub fn evaluate_all(g: &ValidGraph, x: &BinaryImage) -> Vec<BinaryImage> {
    let mut vals: Vec<Option<BinaryImage>> = vec![None; g.graph().len()];
    for &v in g.order() {
        vals[v] = Some(vertex_output(g, v, &vals, x));
    }
    vals.into_iter().map(|v| v.expect("every vertex evaluated")).collect()
}

/// `ψ_G(X)`: the image stored at the output vertex. Suprema and infima fold
/// their inputs in ascending vertex order.
pub fn evaluate(g: &ValidGraph, x: &BinaryImage) -> BinaryImage {
    let n = g.graph().len();
    let mut vals: Vec<Option<BinaryImage>> = vec![None; n];
    let mut readers = vec![0usize; n];
    for &(a, _) in g.graph().edges() {
        readers[a] += 1;
    }
    for &v in g.order() {
        let out = vertex_output(g, v, &vals, x);
        for &i in g.inputs_of(v) {
            readers[i] -= 1;
            if readers[i] == 0 {
                vals[i] = None;
            }
        }
        vals[v] = Some(out);
    }
    vals[g.output_vertex()].take().expect("output evaluated")
}

/// Window on which an operator reads the output of its predecessor.
pub(crate) fn operator_extent(op: &Operator) -> Option<PixelSet> {
    match op {
        Operator::Identity | Operator::Complement => Some(PixelSet::origin()),
        Operator::ConstEmpty => None,
        Operator::Erosion(s) => Some(s.window().support()),
        Operator::Dilation(s) => Some(s.window().support().transpose()),
        Operator::Opening(s) | Operator::Closing(s) => {
            let w = s.window().support();
            Some(w.minkowski_sum(&w.transpose()))
        }
        Operator::Asf(s) => {
            let w = s.window().support();
            let oc = w.minkowski_sum(&w.transpose());
            Some(oc.minkowski_sum(&oc))
        }
        Operator::SupGen(i) => Some(i.window().support()),
        Operator::InfGen(i) => Some(i.window().support().transpose()),
    }
}

/// Window propagated to vertex `v` given its inputs' windows.
pub(crate) fn vertex_window(kind: &VertexKind, inputs: &[&Window]) -> Window {
    match kind {
        VertexKind::Input => Window::origin(),
        VertexKind::Output => inputs[0].clone(),
        VertexKind::Sup | VertexKind::Inf => inputs[1..]
            .iter()
            .fold(inputs[0].clone(), |acc, w| acc.union(w)),
        VertexKind::Operator(op) => match operator_extent(op) {
            None => Window::empty(),
            Some(e) => inputs[0].minkowski_sum(&e),
        },
    }
}

/// Windows of every vertex.
pub fn vertex_windows(g: &ValidGraph) -> Vec<Window> {
    let mut ws: Vec<Option<Window>> = vec![None; g.graph().len()];
    for &v in g.order() {
        let ins: Vec<&Window> = g
            .inputs_of(v)
            .iter()
            .map(|&i| ws[i].as_ref().expect("topological order"))
            .collect();
        ws[v] = Some(vertex_window(g.kind(v), &ins));
    }
    ws.into_iter().map(|w| w.expect("every vertex")).collect()
}

/// A window within which `ψ_G` is locally defined. Not necessarily minimal.
pub fn window_of(g: &ValidGraph) -> Window {
    vertex_windows(g).swap_remove(g.output_vertex())
}

/// Upper bound on how far, in Chebyshev distance, the output at a pixel can
/// depend on the input, following the reads of every operator.
fn dependency_radius(g: &ValidGraph) -> u32 {
    g.graph()
        .vertices()
        .iter()
        .map(|k| match k {
            VertexKind::Operator(op) => operator_extent(op).map_or(0, |e| e.radius()),
            _ => 0,
        })
        .sum()
}

/// `K_W(ψ_G)` on `W = window_of(g)`, by evaluating the graph on every
/// subset of `W`.
///
/// Subsets are laid out as tiles of one large frame, far enough apart and
/// from the border that no tile sees another or the frame edge, and the
/// graph is evaluated once per frame.
pub fn kernel_by_enumeration(g: &ValidGraph) -> Result<BooleanFn, McgError> {
    let w = window_of(g);
    if w.len() > DEFAULT_TABLE_CAP {
        return Err(McgError::WindowCap {
            size: w.len(),
            cap: DEFAULT_TABLE_CAP,
        });
    }
    let mut f = BooleanFn::zero(w.clone())?;
    let r = (dependency_radius(g) + w.radius() + 1) as usize;
    let side = 2 * r + 1;
    let total = f.entries() as usize;
    let per_row = (total.min(1024) as f64).sqrt().ceil() as usize;
    let per_frame = per_row * per_row;
    let mut start = 0usize;
    while start < total {
        let count = per_frame.min(total - start);
        let rows = count.div_ceil(per_row);
        let mut frame = BinaryImage::new(per_row * side, rows * side);
        let center = |k: usize| Point::new((k % per_row * side + r) as i32, (k / per_row * side + r) as i32);
        for k in 0..count {
            let c = center(k);
            let m = (start + k) as u64;
            for (i, p) in w.points().iter().enumerate() {
                if m >> i & 1 == 1 {
                    let q = c + *p;
                    frame.set(q.x as usize, q.y as usize, true);
                }
            }
        }
        let out = evaluate(g, &frame);
        for k in 0..count {
            if out.at(center(k)) {
                f.set((start + k) as u64, true);
            }
        }
        start += count;
    }
    Ok(f)
}
