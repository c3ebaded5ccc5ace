use crate::lattice::{Interval, IntervalCollection, PixelSet, Window};

use super::eval::vertex_window;
use super::{MCGraph, McgError, Operator, ValidGraph, VertexKind};

/// Guards for [`basis_with_limits`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BasisLimits {
    /// Largest window, in points, any vertex may propagate.
    pub max_window: usize,
    /// Largest interval count any intermediate collection may reach.
    pub max_intervals: usize,
}

impl Default for BasisLimits {
    fn default() -> Self {
        BasisLimits {
            max_window: 49,
            max_intervals: 100_000,
        }
    }
}

struct Engine {
    limits: BasisLimits,
}

impl Engine {
    fn check(&self, c: IntervalCollection) -> Result<IntervalCollection, McgError> {
        if c.len() > self.limits.max_intervals {
            return Err(McgError::Budget {
                intervals: c.len(),
                budget: self.limits.max_intervals,
            });
        }
        Ok(c)
    }

    fn window(&self, w: Window) -> Result<Window, McgError> {
        if w.len() > self.limits.max_window {
            return Err(McgError::WindowCap {
                size: w.len(),
                cap: self.limits.max_window,
            });
        }
        Ok(w)
    }

    /// `B(ε_S ψ) = ⊓_{s∈S} (B(ψ) + s)` over `target`.
    fn erode(
        &self,
        c: &IntervalCollection,
        se: &PixelSet,
        target: &Window,
    ) -> Result<IntervalCollection, McgError> {
        let mut acc = IntervalCollection::top(target.clone())?;
        for s in se.iter() {
            let t = c.translate(s).rewindow(target)?;
            acc = self.check(acc.inf(&t)?)?;
        }
        Ok(acc)
    }

    /// `B(δ_S ψ) = ⊔_{s∈S} (B(ψ) − s)` over `target`.
    fn dilate(
        &self,
        c: &IntervalCollection,
        se: &PixelSet,
        target: &Window,
    ) -> Result<IntervalCollection, McgError> {
        let mut acc = IntervalCollection::bottom(target.clone())?;
        for s in se.iter() {
            let t = c.translate(-s).rewindow(target)?;
            acc = self.check(acc.sup(&t)?)?;
        }
        Ok(acc)
    }

    fn operator(
        &self,
        op: &Operator,
        c: &IntervalCollection,
    ) -> Result<IntervalCollection, McgError> {
        let w1 = c.window().support();
        let sum = |parts: &[&PixelSet]| -> Result<Window, McgError> {
            let w = parts.iter().fold(w1.clone(), |acc, p| acc.minkowski_sum(p));
            self.window(Window::new(w))
        };
        match op {
            Operator::Identity => Ok(c.clone()),
            Operator::Complement => self.check(c.complement()),
            Operator::ConstEmpty => Ok(IntervalCollection::bottom(Window::empty())?),
            Operator::Erosion(s) => {
                let target = sum(&[&s.window().support()])?;
                self.erode(c, s.se(), &target)
            }
            Operator::Dilation(s) => {
                let target = sum(&[&s.window().support().transpose()])?;
                self.dilate(c, s.se(), &target)
            }
            Operator::Opening(s) => {
                let (wv, wt) = (s.window().support(), s.window().support().transpose());
                let e = self.erode(c, s.se(), &sum(&[&wv])?)?;
                self.dilate(&e, s.se(), &sum(&[&wv, &wt])?)
            }
            Operator::Closing(s) => {
                let (wv, wt) = (s.window().support(), s.window().support().transpose());
                let d = self.dilate(c, s.se(), &sum(&[&wt])?)?;
                self.erode(&d, s.se(), &sum(&[&wt, &wv])?)
            }
            Operator::Asf(s) => {
                let (wv, wt) = (s.window().support(), s.window().support().transpose());
                let e = self.erode(c, s.se(), &sum(&[&wv])?)?;
                let o = self.dilate(&e, s.se(), &sum(&[&wv, &wt])?)?;
                let d = self.dilate(&o, s.se(), &sum(&[&wv, &wt, &wt])?)?;
                self.erode(&d, s.se(), &sum(&[&wv, &wt, &wt, &wv])?)
            }
            Operator::SupGen(i) => {
                // λ_[A,B] ψ = ε_A ψ ∧ ν δ_{(W∖B)^t} ψ
                let target = sum(&[&i.window().support()])?;
                let outside = i.window().support().difference(i.right()).transpose();
                let e = self.erode(c, i.left(), &target)?;
                let d = self.dilate(c, &outside, &target)?;
                self.check(e.inf(&self.check(d.complement())?)?)
            }
            Operator::InfGen(i) => {
                // μ_[A,B] ψ = δ_A ψ ∨ ν ε_{(W∖B)^t} ψ
                let target = sum(&[&i.window().support().transpose()])?;
                let outside = i.window().support().difference(i.right()).transpose();
                let d = self.dilate(c, i.left(), &target)?;
                let e = self.erode(c, &outside, &target)?;
                self.check(d.sup(&self.check(e.complement())?)?)
            }
        }
    }
}

/// [`basis_of`] with explicit guards.
pub fn basis_with_limits(
    g: &ValidGraph,
    limits: BasisLimits,
) -> Result<IntervalCollection, McgError> {
    let engine = Engine { limits };
    let mut state: Vec<Option<IntervalCollection>> = vec![None; g.graph().len()];
    for &v in g.order() {
        let ins: Vec<&IntervalCollection> = g
            .inputs_of(v)
            .iter()
            .map(|&i| state[i].as_ref().expect("topological order"))
            .collect();
        let out = match g.kind(v) {
            VertexKind::Input => {
                let w = Window::origin();
                IntervalCollection::from_intervals(
                    w.clone(),
                    [Interval::new(PixelSet::origin(), PixelSet::origin(), w)?],
                )?
            }
            VertexKind::Output => ins[0].clone(),
            kind @ (VertexKind::Sup | VertexKind::Inf) => {
                let windows: Vec<&Window> = ins.iter().map(|c| c.window()).collect();
                let target = engine.window(vertex_window(kind, &windows))?;
                let mut acc = ins[0].rewindow(&target)?;
                for c in &ins[1..] {
                    let c = c.rewindow(&target)?;
                    acc = engine.check(if *kind == VertexKind::Sup {
                        acc.sup(&c)?
                    } else {
                        acc.inf(&c)?
                    })?;
                }
                acc
            }
            VertexKind::Operator(op) => engine.operator(op, ins[0])?,
        };
        debug_assert_eq!(
            out.window(),
            &vertex_window(g.kind(v), &ins.iter().map(|c| c.window()).collect::<Vec<_>>())
        );
        state[v] = Some(out);
    }
    Ok(state[g.output_vertex()].take().expect("output reached"))
}

/// `B_W(ψ_G)` on `W = window_of(g)`, propagated vertex by vertex through
/// the interval algebra.
pub fn basis_of(g: &ValidGraph) -> Result<IntervalCollection, McgError> {
    basis_with_limits(g, BasisLimits::default())
}

/// `b` re-expressed over the larger window `w_new`.
pub fn rewindow(b: &IntervalCollection, w_new: &Window) -> Result<IntervalCollection, McgError> {
    Ok(b.rewindow(w_new)?)
}

/// A graph realizing the operator whose basis is `b`: the supremum of one
/// sup-generating vertex per interval.
///
/// One interval gives a plain chain; an empty basis gives the constant-∅
/// operator.
pub fn build_supgen_from_basis(b: &IntervalCollection) -> ValidGraph {
    let mut g = MCGraph::new();
    let input = g.add_vertex(VertexKind::Input);
    let out = g.add_vertex(VertexKind::Output);
    let ops: Vec<Operator> = if b.is_empty() {
        vec![Operator::ConstEmpty]
    } else {
        b.intervals().map(Operator::SupGen).collect()
    };
    let leaves: Vec<usize> = ops
        .into_iter()
        .map(|op| {
            let v = g.add_vertex(op);
            g.add_edge(input, v);
            v
        })
        .collect();
    if let [single] = leaves[..] {
        g.add_edge(single, out);
    } else {
        let sup = g.add_vertex(VertexKind::Sup);
        for v in leaves {
            g.add_edge(v, sup);
        }
        g.add_edge(sup, out);
    }
    g.validate().expect("constructed graph satisfies the axioms")
}
