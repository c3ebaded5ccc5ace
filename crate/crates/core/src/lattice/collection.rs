use std::fmt;

use super::interval::Bits;
use super::{BooleanFn, Interval, LatticeError, Point, Window};

/// An element of the lattice `Π_W`: the collection of all maximal intervals
/// contained in some sub-collection of `P(W)`.
///
/// Every constructor normalizes, so two collections are equal exactly when
/// they represent the same sub-collection. Intervals are kept sorted by
/// their `(A, B)` masks.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct IntervalCollection {
    window: Window,
    items: Vec<Bits>,
}

impl IntervalCollection {
    /// `{[∅, W]}`, the greatest element.
    pub fn top(window: Window) -> Result<Self, LatticeError> {
        window.check_maskable()?;
        let items = vec![Bits {
            a: 0,
            b: window.full_mask(),
        }];
        Ok(IntervalCollection { window, items })
    }

    /// The empty collection, the least element.
    pub fn bottom(window: Window) -> Result<Self, LatticeError> {
        window.check_maskable()?;
        Ok(IntervalCollection {
            window,
            items: Vec::new(),
        })
    }

    /// `M(∪ intervals)`: the maximal intervals of the sub-collection covered
    /// by `intervals`.
    pub fn from_intervals<I>(window: Window, intervals: I) -> Result<Self, LatticeError>
    where
        I: IntoIterator<Item = Interval>,
    {
        window.check_maskable()?;
        let mut given = Vec::new();
        for i in intervals {
            if i.window() != &window {
                return Err(LatticeError::WindowMismatch);
            }
            given.push(i.bits()?);
        }
        // M(X) = complement of complement, each step a subtraction from the top.
        let top = Bits {
            a: 0,
            b: window.full_mask(),
        };
        let outside = subtract(vec![top], &given);
        let items = subtract(vec![top], &outside);
        Ok(Self::from_raw(window, items))
    }

    pub(crate) fn from_raw(window: Window, mut items: Vec<Bits>) -> Self {
        items.sort_unstable();
        items.dedup();
        IntervalCollection { window, items }
    }

    pub(crate) fn raw(&self) -> &[Bits] {
        &self.items
    }

    pub fn window(&self) -> &Window {
        &self.window
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn intervals(&self) -> impl ExactSizeIterator<Item = Interval> + '_ {
        self.items
            .iter()
            .map(|&b| Interval::from_bits(b, &self.window))
    }

    /// Whether some interval of the collection contains the subset `mask`.
    pub fn covers(&self, mask: u64) -> bool {
        self.items.iter().any(|b| b.contains(mask))
    }

    fn same_window(&self, other: &Self) -> Result<(), LatticeError> {
        if self.window != other.window {
            return Err(LatticeError::WindowMismatch);
        }
        Ok(())
    }

    fn top_bits(&self) -> Bits {
        Bits {
            a: 0,
            b: self.window.full_mask(),
        }
    }

    /// `X̄ = M(𝒳^c)`.
    pub fn complement(&self) -> Self {
        let items = subtract(vec![self.top_bits()], &self.items);
        Self::from_raw(self.window.clone(), items)
    }

    /// `X ⊓ Y = M(𝒳 ∩ 𝒴)`.
    pub fn inf(&self, other: &Self) -> Result<Self, LatticeError> {
        self.same_window(other)?;
        let outside_other = subtract(vec![self.top_bits()], &other.items);
        let items = subtract(self.items.clone(), &outside_other);
        Ok(Self::from_raw(self.window.clone(), items))
    }

    /// `X ⊔ Y = M(𝒳 ∪ 𝒴)`.
    pub fn sup(&self, other: &Self) -> Result<Self, LatticeError> {
        self.same_window(other)?;
        // (𝒳 ∪ 𝒴)^c = 𝒳^c ∖ 𝒴
        let outside_self = subtract(vec![self.top_bits()], &self.items);
        let outside_both = subtract(outside_self, &other.items);
        let items = subtract(vec![self.top_bits()], &outside_both);
        Ok(Self::from_raw(self.window.clone(), items))
    }

    /// Partial order of `Π_W`: every interval of `self` lies in one of `other`.
    pub fn le(&self, other: &Self) -> Result<bool, LatticeError> {
        self.same_window(other)?;
        Ok(self
            .items
            .iter()
            .all(|x| other.items.iter().any(|y| x.within(*y))))
    }

    /// Re-express the same operator over a larger window `w_new ⊇ W`:
    /// every `[A, B]` becomes `[A, B ∪ (w_new ∖ W)]`.
    pub fn rewindow(&self, w_new: &Window) -> Result<Self, LatticeError> {
        if !self.window.is_subset(w_new) {
            return Err(LatticeError::NotSuperset);
        }
        if w_new == &self.window {
            return Ok(self.clone());
        }
        w_new.check_maskable()?;
        let old = self.window.points();
        let map = |m: u64| -> u64 {
            old.iter()
                .enumerate()
                .filter(|&(i, _)| m >> i & 1 == 1)
                .map(|(_, &p)| 1u64 << w_new.index_of(p).expect("subset checked"))
                .fold(0, |acc, bit| acc | bit)
        };
        let extra = w_new.full_mask() & !map(self.window.full_mask());
        let items = self
            .items
            .iter()
            .map(|b| Bits {
                a: map(b.a),
                b: map(b.b) | extra,
            })
            .collect();
        Ok(Self::from_raw(w_new.clone(), items))
    }

    /// The collection of `τ`-translated intervals over the translated window,
    /// every set moved by `h`.
    pub fn translate(&self, h: Point) -> Self {
        // Translation preserves the row-major order, so masks carry over.
        IntervalCollection {
            window: self.window.translate(h),
            items: self.items.clone(),
        }
    }

    pub fn to_boolean(&self) -> Result<BooleanFn, LatticeError> {
        BooleanFn::from_collection(self)
    }
}

impl fmt::Debug for IntervalCollection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.intervals()).finish()
    }
}

/// `M(∪current ∖ ∪removed)`, assuming `current` already holds every maximal
/// interval of its union.
///
/// Each interval meeting a removed one is split into the maximal
/// sub-intervals that avoid it; split pieces that fall inside another
/// surviving interval are pruned.
pub(crate) fn subtract(mut current: Vec<Bits>, removed: &[Bits]) -> Vec<Bits> {
    for &r in removed {
        if current.is_empty() {
            break;
        }
        current = subtract_one(current, r);
    }
    current
}

fn subtract_one(current: Vec<Bits>, r: Bits) -> Vec<Bits> {
    let mut kept = Vec::with_capacity(current.len());
    let mut pieces = Vec::new();
    for iv in current {
        if !iv.meets(r) {
            kept.push(iv);
            continue;
        }
        // X avoids [C, D] iff some p ∈ C is missing from X or some q ∉ D is in X.
        let mut drop_bits = r.a & !iv.a;
        while drop_bits != 0 {
            let p = drop_bits & drop_bits.wrapping_neg();
            drop_bits &= drop_bits - 1;
            pieces.push(Bits { a: iv.a, b: iv.b & !p });
        }
        let mut add_bits = iv.b & !r.b;
        while add_bits != 0 {
            let q = add_bits & add_bits.wrapping_neg();
            add_bits &= add_bits - 1;
            pieces.push(Bits { a: iv.a | q, b: iv.b });
        }
    }
    if pieces.is_empty() {
        return kept;
    }
    pieces.sort_unstable();
    pieces.dedup();
    pieces.retain(|p| !kept.iter().any(|k| p.within(*k)));
    let survivors: Vec<Bits> = pieces
        .iter()
        .filter(|&&p| !pieces.iter().any(|&o| o != p && p.within(o)))
        .copied()
        .collect();
    kept.extend(survivors);
    kept
}

/// The maximal intervals of the kernel `{X : f(X) = 1}`.
pub fn maximal_intervals(kernel: &BooleanFn) -> IntervalCollection {
    let window = kernel.window().clone();
    let top = Bits {
        a: 0,
        b: window.full_mask(),
    };
    let mut current = vec![top];
    for z in kernel.zeros() {
        if current.is_empty() {
            break;
        }
        current = subtract_one(current, Bits { a: z, b: z });
    }
    IntervalCollection::from_raw(window, current)
}

pub fn collection_inf(
    x: &IntervalCollection,
    y: &IntervalCollection,
) -> Result<IntervalCollection, LatticeError> {
    x.inf(y)
}

pub fn collection_sup(
    x: &IntervalCollection,
    y: &IntervalCollection,
) -> Result<IntervalCollection, LatticeError> {
    x.sup(y)
}

pub fn collection_complement(x: &IntervalCollection) -> IntervalCollection {
    x.complement()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::PixelSet;

    fn ab() -> (Window, Point, Point) {
        let a = Point::new(0, 0);
        let b = Point::new(1, 0);
        (Window::new([a, b].into_iter().collect()), a, b)
    }

    fn coll(w: &Window, ivs: &[(&[Point], &[Point])]) -> IntervalCollection {
        let ivs = ivs.iter().map(|(l, r)| {
            Interval::new(
                l.iter().copied().collect(),
                r.iter().copied().collect(),
                w.clone(),
            )
            .unwrap()
        });
        IntervalCollection::from_intervals(w.clone(), ivs).unwrap()
    }

    #[test]
    fn kernel_extremes() {
        let w = Window::square(3);
        let one = BooleanFn::from_predicate(w.clone(), |_| true).unwrap();
        assert_eq!(maximal_intervals(&one), IntervalCollection::top(w.clone()).unwrap());
        let zero = BooleanFn::from_predicate(w.clone(), |_| false).unwrap();
        assert!(maximal_intervals(&zero).is_empty());
    }

    #[test]
    fn kernel_without_full_set() {
        let (w, a, b) = ab();
        // 𝒳 = {∅, {a}, {b}}
        let f = BooleanFn::from_predicate(w.clone(), |m| m != 0b11).unwrap();
        assert_eq!(maximal_intervals(&f), coll(&w, &[(&[], &[a]), (&[], &[b])]));
    }

    #[test]
    fn inf_sup_complement_on_two_points() {
        let (w, a, b) = ab();
        let x = coll(&w, &[(&[], &[a])]);
        let y = coll(&w, &[(&[a], &[a, b])]);
        assert_eq!(x.inf(&y).unwrap(), coll(&w, &[(&[a], &[a])]));

        let z = coll(&w, &[(&[b], &[b])]);
        assert_eq!(x.sup(&z).unwrap(), coll(&w, &[(&[], &[a]), (&[b], &[b])]));

        assert_eq!(x.complement(), coll(&w, &[(&[b], &[a, b])]));
    }

    #[test]
    fn top_and_bottom_laws() {
        let (w, a, _) = ab();
        let x = coll(&w, &[(&[], &[a])]);
        let top = IntervalCollection::top(w.clone()).unwrap();
        let bottom = IntervalCollection::bottom(w.clone()).unwrap();
        assert_eq!(x.inf(&top).unwrap(), x);
        assert!(x.inf(&bottom).unwrap().is_empty());
        assert_eq!(x.sup(&bottom).unwrap(), x);
        assert_eq!(x.sup(&top).unwrap(), top);
        assert_eq!(top.complement(), bottom);
        assert_eq!(bottom.complement(), top);
    }

    #[test]
    fn from_intervals_normalizes() {
        let (w, a, b) = ab();
        // [∅,{a}] ∪ [{b},W] covers P(W).
        let c = coll(&w, &[(&[], &[a]), (&[b], &[a, b])]);
        assert_eq!(c, IntervalCollection::top(w).unwrap());
    }

    #[test]
    fn rewindow_origin_to_square() {
        let o = PixelSet::origin();
        let w1 = Window::origin();
        let c = coll(&w1, &[(&[Point::ORIGIN], &[Point::ORIGIN])]);
        let w3 = Window::square(3);
        let r = c.rewindow(&w3).unwrap();
        let want = IntervalCollection::from_intervals(
            w3.clone(),
            [Interval::new(o, w3.support(), w3.clone()).unwrap()],
        )
        .unwrap();
        assert_eq!(r, want);
        assert_eq!(c.rewindow(&w1).unwrap(), c);
        assert!(IntervalCollection::bottom(w1.clone())
            .unwrap()
            .rewindow(&w3)
            .unwrap()
            .is_empty());
        assert_eq!(r.rewindow(&w1), Err(LatticeError::NotSuperset));
    }

    #[test]
    fn window_mismatch_is_reported() {
        let x = IntervalCollection::top(Window::origin()).unwrap();
        let y = IntervalCollection::top(Window::square(3)).unwrap();
        assert_eq!(x.inf(&y), Err(LatticeError::WindowMismatch));
    }
}
