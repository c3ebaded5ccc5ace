use rand::seq::IndexedRandom;
use rand::Rng;

use crate::lattice::{Interval, PixelSet, Window};

use super::eval::vertex_window;
use super::{MCGraph, Operator, StructOp, ValidGraph, VertexKind};

fn random_subset<R: Rng + ?Sized>(rng: &mut R, of: &PixelSet, p: f64) -> PixelSet {
    of.iter().filter(|_| rng.random_bool(p)).collect()
}

/// A random window of 1 to 3 points inside the 3×3 square.
fn small_window<R: Rng + ?Sized>(rng: &mut R) -> Window {
    let square: Vec<_> = PixelSet::square(3).iter().collect();
    let k = rng.random_range(1..=3);
    Window::new(square.choose_multiple(rng, k).copied().collect())
}

fn random_operator<R: Rng + ?Sized>(rng: &mut R) -> Operator {
    let w = small_window(rng);
    let support = w.support();
    let st = |rng: &mut R| StructOp::new(random_subset(rng, &support, 0.6), w.clone()).expect("subset");
    match rng.random_range(0..11) {
        0 => Operator::Identity,
        1 => Operator::Complement,
        2 => Operator::Erosion(st(rng)),
        3 => Operator::Dilation(st(rng)),
        4 => Operator::Opening(st(rng)),
        5 => Operator::Closing(st(rng)),
        6 => Operator::Asf(st(rng)),
        7 | 8 => {
            let b = random_subset(rng, &support, 0.7);
            let a = random_subset(rng, &b, 0.5);
            Operator::SupGen(Interval::new(a, b, w.clone()).expect("a ⊆ b ⊆ w"))
        }
        9 => {
            let b = random_subset(rng, &support, 0.7);
            let a = random_subset(rng, &b, 0.5);
            Operator::InfGen(Interval::new(a, b, w.clone()).expect("a ⊆ b ⊆ w"))
        }
        _ => Operator::ConstEmpty,
    }
}

/// A random graph satisfying the axioms whose propagated window never
/// exceeds `max_window` points at any vertex.
///
/// Operators read through windows of at most three points of the 3×3
/// square; suprema and infima join two or three earlier vertices.
pub fn random_graph<R: Rng + ?Sized>(rng: &mut R, max_window: usize) -> ValidGraph {
    loop {
        if let Some(g) = attempt(rng, max_window) {
            return g;
        }
    }
}

fn attempt<R: Rng + ?Sized>(rng: &mut R, max_window: usize) -> Option<ValidGraph> {
    let mut g = MCGraph::new();
    let mut windows = vec![Window::origin()];
    let mut fanout = vec![0usize];
    g.add_vertex(VertexKind::Input);
    let steps = rng.random_range(1..=6);
    let mut tries = 0;
    while g.len() <= steps && tries < 50 {
        tries += 1;
        let n = g.len();
        let (kind, ins): (VertexKind, Vec<usize>) = if n >= 2 && rng.random_bool(0.3) {
            let k = rng.random_range(2..=3.min(n));
            let mut ins: Vec<usize> = (0..n).collect::<Vec<_>>().choose_multiple(rng, k).copied().collect();
            ins.sort_unstable();
            let kind = if rng.random_bool(0.5) { VertexKind::Sup } else { VertexKind::Inf };
            (kind, ins)
        } else {
            (random_operator(rng).into(), vec![rng.random_range(0..n)])
        };
        let in_w: Vec<&Window> = ins.iter().map(|&i| &windows[i]).collect();
        let w = vertex_window(&kind, &in_w);
        if w.len() > max_window {
            continue;
        }
        let v = g.add_vertex(kind);
        for &i in &ins {
            g.add_edge(i, v);
            fanout[i] += 1;
        }
        windows.push(w);
        fanout.push(0);
    }
    let leaves: Vec<usize> = (0..g.len()).filter(|&v| fanout[v] == 0).collect();
    let last = if leaves.len() == 1 {
        leaves[0]
    } else {
        let kind = if rng.random_bool(0.5) { VertexKind::Sup } else { VertexKind::Inf };
        let in_w: Vec<&Window> = leaves.iter().map(|&i| &windows[i]).collect();
        if vertex_window(&kind, &in_w).len() > max_window {
            return None;
        }
        let v = g.add_vertex(kind);
        for &i in &leaves {
            g.add_edge(i, v);
        }
        v
    };
    if g.len() < 2 {
        return None;
    }
    let out = g.add_vertex(VertexKind::Output);
    g.add_edge(last, out);
    g.validate().ok()
}
