use std::fmt;

use crate::lattice::{PixelSet, Point};

/// A binary image on the finite frame `F = [0, width) × [0, height)`.
///
/// Rows are packed into `u64` words, bit `x % 64` of word `x / 64` holding
/// column `x`. Bits past `width` in the last word of a row are always zero.
/// Pixels outside the frame read as background.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BinaryImage {
    width: usize,
    height: usize,
    stride: usize,
    words: Vec<u64>,
}

impl BinaryImage {
    /// An all-background image.
    ///
    /// # Panics
    ///
    /// If either dimension is zero.
    pub fn new(width: usize, height: usize) -> Self {
        assert!(width > 0 && height > 0, "frame must be non-empty, got {width}x{height}");
        let stride = width.div_ceil(64);
        BinaryImage {
            width,
            height,
            stride,
            words: vec![0; stride * height],
        }
    }

    /// Every frame pixel set.
    pub fn full(width: usize, height: usize) -> Self {
        let mut img = Self::new(width, height);
        img.words.fill(u64::MAX);
        img.clear_tail();
        img
    }

    pub fn from_fn<F>(width: usize, height: usize, mut f: F) -> Self
    where
        F: FnMut(usize, usize) -> bool,
    {
        let mut img = Self::new(width, height);
        for y in 0..height {
            for x in 0..width {
                if f(x, y) {
                    img.set(x, y, true);
                }
            }
        }
        img
    }

    /// Image holding the points of `set` that fall inside the frame.
    pub fn from_points(width: usize, height: usize, set: &PixelSet) -> Self {
        let mut img = Self::new(width, height);
        for p in set.iter() {
            if img.in_frame(p) {
                img.set(p.x as usize, p.y as usize, true);
            }
        }
        img
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// `|F|`.
    pub fn area(&self) -> usize {
        self.width * self.height
    }

    pub fn same_frame(&self, other: &BinaryImage) -> bool {
        self.width == other.width && self.height == other.height
    }

    pub fn in_frame(&self, p: Point) -> bool {
        p.x >= 0 && p.y >= 0 && (p.x as usize) < self.width && (p.y as usize) < self.height
    }

    /// Value at `(x, y)`; out-of-frame coordinates read as `false`.
    pub fn get(&self, x: i64, y: i64) -> bool {
        if x < 0 || y < 0 || x as usize >= self.width || y as usize >= self.height {
            return false;
        }
        let (x, y) = (x as usize, y as usize);
        self.words[y * self.stride + x / 64] >> (x % 64) & 1 == 1
    }

    pub fn at(&self, p: Point) -> bool {
        self.get(p.x.into(), p.y.into())
    }

    /// # Panics
    ///
    /// If `(x, y)` is outside the frame.
    pub fn set(&mut self, x: usize, y: usize, value: bool) {
        assert!(x < self.width && y < self.height, "({x},{y}) outside frame");
        let w = &mut self.words[y * self.stride + x / 64];
        if value {
            *w |= 1 << (x % 64);
        } else {
            *w &= !(1 << (x % 64));
        }
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// Set pixels in row-major order.
    pub fn ones(&self) -> impl Iterator<Item = Point> + '_ {
        (0..self.height).flat_map(move |y| {
            (0..self.width)
                .filter(move |&x| self.get(x as i64, y as i64))
                .map(move |x| Point::new(x as i32, y as i32))
        })
    }

    pub fn to_points(&self) -> PixelSet {
        self.ones().collect()
    }

    pub fn row(&self, y: usize) -> &[u64] {
        &self.words[y * self.stride..(y + 1) * self.stride]
    }

    fn row_mut(&mut self, y: usize) -> &mut [u64] {
        &mut self.words[y * self.stride..(y + 1) * self.stride]
    }

    fn tail_mask(&self) -> u64 {
        match self.width % 64 {
            0 => u64::MAX,
            r => (1u64 << r) - 1,
        }
    }

    fn clear_tail(&mut self) {
        let mask = self.tail_mask();
        let stride = self.stride;
        for row in self.words.chunks_mut(stride) {
            row[stride - 1] &= mask;
        }
    }

    fn zip_with(&self, other: &BinaryImage, f: impl Fn(u64, u64) -> u64) -> BinaryImage {
        assert!(self.same_frame(other), "frame mismatch");
        let mut out = self.clone();
        for (o, &w) in out.words.iter_mut().zip(&other.words) {
            *o = f(*o, w);
        }
        out.clear_tail();
        out
    }

    pub fn union(&self, other: &BinaryImage) -> BinaryImage {
        self.zip_with(other, |a, b| a | b)
    }

    pub fn intersection(&self, other: &BinaryImage) -> BinaryImage {
        self.zip_with(other, |a, b| a & b)
    }

    pub fn difference(&self, other: &BinaryImage) -> BinaryImage {
        self.zip_with(other, |a, b| a & !b)
    }

    pub fn symmetric_difference(&self, other: &BinaryImage) -> BinaryImage {
        self.zip_with(other, |a, b| a ^ b)
    }

    /// Frame-relative complement `F ∖ X`.
    pub fn complement(&self) -> BinaryImage {
        let mut out = self.clone();
        for w in &mut out.words {
            *w = !*w;
        }
        out.clear_tail();
        out
    }

    pub fn is_subset(&self, other: &BinaryImage) -> bool {
        assert!(self.same_frame(other), "frame mismatch");
        self.words.iter().zip(&other.words).all(|(a, b)| a & !b == 0)
    }

    /// `|X ∩ Y|` without materializing the intersection.
    pub fn count_and(&self, other: &BinaryImage) -> usize {
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones() as usize)
            .sum()
    }

    pub fn count_or(&self, other: &BinaryImage) -> usize {
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a | b).count_ones() as usize)
            .sum()
    }

    pub fn count_xor(&self, other: &BinaryImage) -> usize {
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a ^ b).count_ones() as usize)
            .sum()
    }

    /// `acc ∘= self translated by h`, row by row, with `∘` either `|` or `&`.
    pub(crate) fn fold_translated(&self, acc: &mut BinaryImage, h: Point, op: Fold) {
        let (dx, dy) = (i64::from(h.x), i64::from(h.y));
        let ws = dx.div_euclid(64);
        let bit = dx.rem_euclid(64) as u32;
        let tail = self.tail_mask();
        let stride = self.stride as i64;
        for y in 0..self.height {
            let sy = y as i64 - dy;
            let dst = acc.row_mut(y);
            if sy < 0 || sy >= self.height as i64 {
                if op == Fold::And {
                    dst.fill(0);
                }
                continue;
            }
            let src = self.row(sy as usize);
            let word = |i: i64| -> u64 {
                if (0..stride).contains(&i) {
                    src[i as usize]
                } else {
                    0
                }
            };
            for (i, d) in dst.iter_mut().enumerate() {
                let i = i as i64;
                let lo = word(i - ws);
                let mut v = lo << bit;
                if bit != 0 {
                    v |= word(i - ws - 1) >> (64 - bit);
                }
                if i == stride - 1 {
                    v &= tail;
                }
                match op {
                    Fold::Or => *d |= v,
                    Fold::And => *d &= v,
                }
            }
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
pub(crate) enum Fold {
    Or,
    And,
}

impl fmt::Debug for BinaryImage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "BinaryImage {}x{}", self.width, self.height)?;
        for y in 0..self.height {
            let row: String = (0..self.width)
                .map(|x| if self.get(x as i64, y as i64) { '#' } else { '.' })
                .collect();
            writeln!(f, "{row}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tail_bits_stay_clear() {
        let full = BinaryImage::full(70, 3);
        assert_eq!(full.count_ones(), 210);
        assert_eq!(full.complement().count_ones(), 0);
        assert_eq!(BinaryImage::new(70, 3).complement(), full);
    }

    #[test]
    fn out_of_frame_reads_are_background() {
        let img = BinaryImage::full(2, 2);
        assert!(img.get(1, 1));
        assert!(!img.get(-1, 0));
        assert!(!img.get(0, 2));
    }

    #[test]
    fn fold_crosses_word_boundaries() {
        let mut img = BinaryImage::new(130, 2);
        img.set(63, 0, true);
        img.set(64, 1, true);
        for dx in [-70, -64, -1, 0, 1, 63, 64, 65] {
            let mut acc = BinaryImage::new(130, 2);
            img.fold_translated(&mut acc, Point::new(dx, 0), Fold::Or);
            let want = BinaryImage::from_fn(130, 2, |x, y| img.get(x as i64 - i64::from(dx), y as i64));
            assert_eq!(acc, want, "dx={dx}");
        }
    }
}
