use std::fmt;

use super::{LatticeError, PixelSet, Window};

/// A closed interval `[A, B] = {X ⊆ W : A ⊆ X ⊆ B}` with `A ⊆ B ⊆ W`.
///
/// Intervals with `A ⊄ B` denote the empty collection and are not
/// representable here.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Interval {
    left: PixelSet,
    right: PixelSet,
    window: Window,
}

impl Interval {
    pub fn new(left: PixelSet, right: PixelSet, window: Window) -> Result<Self, LatticeError> {
        if !left.is_subset(&right) {
            return Err(LatticeError::InvalidInterval);
        }
        if let Some(p) = right.iter().find(|&p| !window.contains(p)) {
            return Err(LatticeError::OutsideWindow(p));
        }
        Ok(Interval {
            left,
            right,
            window,
        })
    }

    /// `[∅, W]`, the whole of `P(W)`.
    pub fn full(window: Window) -> Self {
        Interval {
            left: PixelSet::new(),
            right: window.support(),
            window,
        }
    }

    pub fn left(&self) -> &PixelSet {
        &self.left
    }

    pub fn right(&self) -> &PixelSet {
        &self.right
    }

    pub fn window(&self) -> &Window {
        &self.window
    }

    /// `A ⊆ x ⊆ B`.
    pub fn contains(&self, x: &PixelSet) -> Result<bool, LatticeError> {
        if let Some(p) = x.iter().find(|&p| !self.window.contains(p)) {
            return Err(LatticeError::OutsideWindow(p));
        }
        Ok(self.left.is_subset(x) && x.is_subset(&self.right))
    }

    /// Interval inclusion: `[A,B] ⊆ [C,D] ⟺ C ⊆ A and B ⊆ D`.
    pub fn is_subinterval_of(&self, other: &Interval) -> bool {
        other.left.is_subset(&self.left) && self.right.is_subset(&other.right)
    }

    /// Number of distance-one moves: `|A| + 2|B∖A| + |W∖B|`.
    pub fn neighbor_count(&self) -> usize {
        self.left.len() + 2 * (self.right.len() - self.left.len()) + self.window.len()
            - self.right.len()
    }

    /// All valid intervals at poset distance one, in window order of the
    /// toggled point.
    pub fn neighbors(&self) -> Vec<Interval> {
        let mut out = Vec::with_capacity(self.neighbor_count());
        for &p in self.window.points() {
            let with = |left: PixelSet, right: PixelSet| Interval {
                left,
                right,
                window: self.window.clone(),
            };
            if self.left.contains(p) {
                let mut a = self.left.clone();
                a.remove(p);
                out.push(with(a, self.right.clone()));
            } else if self.right.contains(p) {
                let mut a = self.left.clone();
                a.insert(p);
                out.push(with(a, self.right.clone()));
                let mut b = self.right.clone();
                b.remove(p);
                out.push(with(self.left.clone(), b));
            } else {
                let mut b = self.right.clone();
                b.insert(p);
                out.push(with(self.left.clone(), b));
            }
        }
        out
    }

    /// `self.neighbors()[k]`, without building the others.
    pub fn nth_neighbor(&self, mut k: usize) -> Option<Interval> {
        for &p in self.window.points() {
            let moves = if self.left.contains(p) || !self.right.contains(p) { 1 } else { 2 };
            if k >= moves {
                k -= moves;
                continue;
            }
            let (mut a, mut b) = (self.left.clone(), self.right.clone());
            if self.left.contains(p) {
                a.remove(p);
            } else if !self.right.contains(p) {
                b.insert(p);
            } else if k == 0 {
                a.insert(p);
            } else {
                b.remove(p);
            }
            return Some(Interval {
                left: a,
                right: b,
                window: self.window.clone(),
            });
        }
        None
    }

    pub(crate) fn bits(&self) -> Result<Bits, LatticeError> {
        Ok(Bits {
            a: self.window.mask_of(&self.left)?,
            b: self.window.mask_of(&self.right)?,
        })
    }

    pub(crate) fn from_bits(bits: Bits, window: &Window) -> Self {
        Interval {
            left: window.set_of(bits.a),
            right: window.set_of(bits.b),
            window: window.clone(),
        }
    }
}

impl fmt::Debug for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{:?}, {:?}]",
            self.left.iter().collect::<Vec<_>>(),
            self.right.iter().collect::<Vec<_>>()
        )
    }
}

/// `interval_neighbors` as a free function.
pub fn interval_neighbors(i: &Interval) -> Vec<Interval> {
    i.neighbors()
}

/// An interval as a pair of masks over some window, `a ⊆ b`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub(crate) struct Bits {
    pub a: u64,
    pub b: u64,
}

impl Bits {
    pub fn contains(self, x: u64) -> bool {
        self.a & !x == 0 && x & !self.b == 0
    }

    /// `self ⊆ other` as intervals.
    pub fn within(self, other: Bits) -> bool {
        other.a & !self.a == 0 && self.b & !other.b == 0
    }

    pub fn meets(self, other: Bits) -> bool {
        let a = self.a | other.a;
        a & !(self.b & other.b) == 0
    }
}
