use std::collections::BTreeSet;
use std::fmt;
use std::ops::{Add, Neg, Sub};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::LatticeError;

/// A point of the integer plane. `x` grows to the right, `y` grows downward.
///
/// Points order row-major: by `y`, then by `x`. Every table index and every
/// canonical listing in this crate follows that order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Point {
    pub x: i32,
    pub y: i32,
}

impl Point {
    pub const ORIGIN: Point = Point { x: 0, y: 0 };

    pub const fn new(x: i32, y: i32) -> Self {
        Point { x, y }
    }

    /// Chebyshev norm.
    pub fn radius(self) -> u32 {
        self.x.unsigned_abs().max(self.y.unsigned_abs())
    }
}

impl Ord for Point {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.y, self.x).cmp(&(other.y, other.x))
    }
}

impl PartialOrd for Point {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Add for Point {
    type Output = Point;
    fn add(self, rhs: Point) -> Point {
        Point::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(self, rhs: Point) -> Point {
        Point::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Neg for Point {
    type Output = Point;
    fn neg(self) -> Point {
        Point::new(-self.x, -self.y)
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.x, self.y)
    }
}

/// A finite set of points, kept in canonical (row-major) order.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PixelSet {
    points: BTreeSet<Point>,
}

impl PixelSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn singleton(p: Point) -> Self {
        [p].into_iter().collect()
    }

    /// The origin alone, `{o}`.
    pub fn origin() -> Self {
        Self::singleton(Point::ORIGIN)
    }

    /// Centered `d × d` square, `{-(d-1)/2, …, (d-1)/2}²`. `d` must be odd.
    pub fn square(d: u32) -> Self {
        assert!(d % 2 == 1, "square side must be odd, got {d}");
        let r = (d / 2) as i32;
        (-r..=r)
            .flat_map(|y| (-r..=r).map(move |x| Point::new(x, y)))
            .collect()
    }

    /// The origin and its four edge neighbors.
    pub fn cross() -> Self {
        [(0, -1), (-1, 0), (0, 0), (1, 0), (0, 1)]
            .into_iter()
            .map(|(x, y)| Point::new(x, y))
            .collect()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn contains(&self, p: Point) -> bool {
        self.points.contains(&p)
    }

    pub fn insert(&mut self, p: Point) -> bool {
        self.points.insert(p)
    }

    pub fn remove(&mut self, p: Point) -> bool {
        self.points.remove(&p)
    }

    /// Points in canonical order.
    pub fn iter(&self) -> impl ExactSizeIterator<Item = Point> + '_ {
        self.points.iter().copied()
    }

    pub fn is_subset(&self, other: &PixelSet) -> bool {
        self.points.is_subset(&other.points)
    }

    pub fn union(&self, other: &PixelSet) -> PixelSet {
        self.points.union(&other.points).copied().collect()
    }

    pub fn intersection(&self, other: &PixelSet) -> PixelSet {
        self.points.intersection(&other.points).copied().collect()
    }

    pub fn difference(&self, other: &PixelSet) -> PixelSet {
        self.points.difference(&other.points).copied().collect()
    }

    /// `X + h`.
    pub fn translate(&self, h: Point) -> PixelSet {
        self.iter().map(|p| p + h).collect()
    }

    /// `X^t = {-x : x ∈ X}`.
    pub fn transpose(&self) -> PixelSet {
        self.iter().map(|p| -p).collect()
    }

    /// Minkowski addition `X ⊕ B`. Empty if either operand is empty.
    pub fn minkowski_sum(&self, other: &PixelSet) -> PixelSet {
        self.iter()
            .flat_map(|a| other.iter().map(move |b| a + b))
            .collect()
    }

    /// Largest Chebyshev norm of a member; 0 for the empty set.
    pub fn radius(&self) -> u32 {
        self.iter().map(Point::radius).max().unwrap_or(0)
    }
}

impl FromIterator<Point> for PixelSet {
    fn from_iter<I: IntoIterator<Item = Point>>(iter: I) -> Self {
        PixelSet {
            points: iter.into_iter().collect(),
        }
    }
}

impl<'a> IntoIterator for &'a PixelSet {
    type Item = &'a Point;
    type IntoIter = std::collections::btree_set::Iter<'a, Point>;
    fn into_iter(self) -> Self::IntoIter {
        self.points.iter()
    }
}

/// Bit masks over a window are `u64`, so windows used for interval algebra
/// hold at most this many points.
pub const MAX_MASK_POINTS: usize = 64;

/// A finite window `W`: the support through which an operator reads its input.
///
/// Cloning is cheap; the point list is shared.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Window {
    points: Arc<[Point]>,
}

impl Window {
    pub fn new(support: PixelSet) -> Self {
        Window {
            points: support.iter().collect::<Vec<_>>().into(),
        }
    }

    pub fn empty() -> Self {
        Window::new(PixelSet::new())
    }

    pub fn origin() -> Self {
        Window::new(PixelSet::origin())
    }

    /// Centered odd square `W_d`.
    pub fn square(d: u32) -> Self {
        Window::new(PixelSet::square(d))
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Points in canonical order; position `i` is bit `i` of every mask.
    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn support(&self) -> PixelSet {
        self.points.iter().copied().collect()
    }

    pub fn contains(&self, p: Point) -> bool {
        self.index_of(p).is_some()
    }

    pub fn index_of(&self, p: Point) -> Option<usize> {
        self.points.binary_search(&p).ok()
    }

    pub fn is_subset(&self, other: &Window) -> bool {
        self.points.iter().all(|&p| other.contains(p))
    }

    pub fn contains_set(&self, set: &PixelSet) -> bool {
        set.iter().all(|p| self.contains(p))
    }

    pub fn transpose(&self) -> Window {
        Window::new(self.support().transpose())
    }

    pub fn translate(&self, h: Point) -> Window {
        Window::new(self.support().translate(h))
    }

    pub fn union(&self, other: &Window) -> Window {
        Window::new(self.support().union(&other.support()))
    }

    pub fn minkowski_sum(&self, other: &PixelSet) -> Window {
        Window::new(self.support().minkowski_sum(other))
    }

    pub fn radius(&self) -> u32 {
        self.points.iter().map(|p| p.radius()).max().unwrap_or(0)
    }

    pub(crate) fn check_maskable(&self) -> Result<(), LatticeError> {
        if self.len() > MAX_MASK_POINTS {
            return Err(LatticeError::WindowTooLarge {
                size: self.len(),
                cap: MAX_MASK_POINTS,
            });
        }
        Ok(())
    }

    /// Mask with every window point set.
    pub fn full_mask(&self) -> u64 {
        match self.len() {
            64 => u64::MAX,
            n => (1u64 << n) - 1,
        }
    }

    /// Characteristic bits of `set` in this window.
    pub fn mask_of(&self, set: &PixelSet) -> Result<u64, LatticeError> {
        self.check_maskable()?;
        let mut mask = 0u64;
        for p in set.iter() {
            let i = self.index_of(p).ok_or(LatticeError::OutsideWindow(p))?;
            mask |= 1 << i;
        }
        Ok(mask)
    }

    pub fn set_of(&self, mask: u64) -> PixelSet {
        self.points
            .iter()
            .enumerate()
            .filter(|&(i, _)| mask >> i & 1 == 1)
            .map(|(_, &p)| p)
            .collect()
    }
}

impl fmt::Debug for Window {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.points.iter()).finish()
    }
}

/// All sets at distance one from `a` in `P(W)`: one point of `W` toggled.
/// Listed in window order, so the result has exactly `|W|` entries.
pub fn set_neighbors(a: &PixelSet, w: &Window) -> Vec<PixelSet> {
    w.points()
        .iter()
        .map(|&p| {
            let mut n = a.clone();
            if !n.remove(p) {
                n.insert(p);
            }
            n
        })
        .collect()
}
