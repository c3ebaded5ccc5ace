//! Binary images on a finite frame and the elementary W-operators.
//!
//! Reads outside the frame are background, so an erosion near the border
//! sees zeros and the complement is taken relative to the frame. Laws that
//! hold on the infinite plane therefore hold here only away from the border.

mod image;

pub use image::BinaryImage;

pub(crate) use image::Fold;

use crate::lattice::{BooleanFn, Interval, PixelSet, Point};

/// Offsets relative to the origin. May be empty.
pub type StructElem = PixelSet;

/// `τ_h(X) = X + h`, clipped to the frame.
pub fn translate(x: &BinaryImage, h: Point) -> BinaryImage {
    let mut out = BinaryImage::new(x.width(), x.height());
    x.fold_translated(&mut out, h, Fold::Or);
    out
}

pub fn complement(x: &BinaryImage) -> BinaryImage {
    x.complement()
}

/// `X ⊕ B`: union of `X + b` over `b ∈ B`. Empty for `B = ∅`.
pub fn dilate(x: &BinaryImage, b: &StructElem) -> BinaryImage {
    let mut out = BinaryImage::new(x.width(), x.height());
    for p in b.iter() {
        x.fold_translated(&mut out, p, Fold::Or);
    }
    out
}

/// `X ⊖ B`: pixels `h` with `h + b ∈ X` for every `b ∈ B`. The full frame
/// for `B = ∅`.
pub fn erode(x: &BinaryImage, b: &StructElem) -> BinaryImage {
    let mut out = BinaryImage::full(x.width(), x.height());
    for p in b.iter() {
        x.fold_translated(&mut out, -p, Fold::And);
    }
    out
}

/// `γ_B = δ_B ε_B`.
pub fn open(x: &BinaryImage, b: &StructElem) -> BinaryImage {
    dilate(&erode(x, b), b)
}

/// `φ_B = ε_B δ_B`.
pub fn close(x: &BinaryImage, b: &StructElem) -> BinaryImage {
    erode(&dilate(x, b), b)
}

/// One alternating-filter step, `φ_B γ_B`.
pub fn asf_layer(x: &BinaryImage, b: &StructElem) -> BinaryImage {
    close(&open(x, b), b)
}

/// `(W ∖ B)^t`.
fn outside_transposed(i: &Interval) -> PixelSet {
    i.window().support().difference(i.right()).transpose()
}

/// `λ_[A,B](X) = ε_A(X) ∩ ν δ_{(W∖B)^t}(X)`: pixels whose view through `W`
/// lies in `[A, B]`.
pub fn sup_generating(x: &BinaryImage, i: &Interval) -> BinaryImage {
    erode(x, i.left()).difference(&dilate(x, &outside_transposed(i)))
}

/// `μ_[A,B](X) = δ_A(X) ∪ ν ε_{(W∖B)^t}(X)`.
pub fn inf_generating(x: &BinaryImage, i: &Interval) -> BinaryImage {
    dilate(x, i.left()).union(&erode(x, &outside_transposed(i)).complement())
}

/// `T⁻¹(f)(X)`: pixel `h` is set iff `f((X − h) ∩ W) = 1`.
pub fn apply_boolean_fn(x: &BinaryImage, f: &BooleanFn) -> BinaryImage {
    let w = f.window().points();
    let mut out = BinaryImage::new(x.width(), x.height());
    for y in 0..x.height() {
        for xx in 0..x.width() {
            let mut m = 0u64;
            for (i, p) in w.iter().enumerate() {
                if x.get(xx as i64 + i64::from(p.x), y as i64 + i64::from(p.y)) {
                    m |= 1 << i;
                }
            }
            if f.get(m) {
                out.set(xx, y, true);
            }
        }
    }
    out
}
