use super::{maximal_intervals, IntervalCollection, LatticeError, PixelSet, Window};

/// Default largest window for which a truth table is materialized.
pub const DEFAULT_TABLE_CAP: usize = 24;

/// A Boolean function on `P(W)`, stored as a truth table.
///
/// Entry `m` is the value on the subset whose characteristic bits (in
/// canonical window order) are `m`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BooleanFn {
    window: Window,
    words: Vec<u64>,
}

impl BooleanFn {
    /// The constant-zero function, with the default size cap.
    pub fn zero(window: Window) -> Result<Self, LatticeError> {
        Self::zero_with_cap(window, DEFAULT_TABLE_CAP)
    }

    pub fn zero_with_cap(window: Window, cap: usize) -> Result<Self, LatticeError> {
        if window.len() > cap {
            return Err(LatticeError::WindowTooLarge {
                size: window.len(),
                cap,
            });
        }
        let entries = 1usize << window.len();
        Ok(BooleanFn {
            window,
            words: vec![0; entries.div_ceil(64)],
        })
    }

    pub fn from_predicate<F>(window: Window, mut f: F) -> Result<Self, LatticeError>
    where
        F: FnMut(u64) -> bool,
    {
        let mut out = Self::zero(window)?;
        for m in 0..out.entries() {
            if f(m) {
                out.set(m, true);
            }
        }
        Ok(out)
    }

    /// `F(X)`: the indicator of the sub-collection covered by `x`.
    pub fn from_collection(x: &IntervalCollection) -> Result<Self, LatticeError> {
        let mut out = Self::zero(x.window().clone())?;
        for iv in x.raw() {
            // enumerate A ∪ S for every S ⊆ B ∖ A
            let free = iv.b & !iv.a;
            let mut s = free;
            loop {
                out.set(iv.a | s, true);
                if s == 0 {
                    break;
                }
                s = (s - 1) & free;
            }
        }
        Ok(out)
    }

    pub fn window(&self) -> &Window {
        &self.window
    }

    /// `2^|W|`.
    pub fn entries(&self) -> u64 {
        1u64 << self.window.len()
    }

    pub fn get(&self, mask: u64) -> bool {
        self.words[(mask / 64) as usize] >> (mask % 64) & 1 == 1
    }

    pub fn set(&mut self, mask: u64, value: bool) {
        let word = &mut self.words[(mask / 64) as usize];
        if value {
            *word |= 1 << (mask % 64);
        } else {
            *word &= !(1 << (mask % 64));
        }
    }

    pub fn eval(&self, x: &PixelSet) -> Result<bool, LatticeError> {
        Ok(self.get(self.window.mask_of(x)?))
    }

    /// Subsets mapped to 1, in increasing mask order.
    pub fn ones(&self) -> impl Iterator<Item = u64> + '_ {
        (0..self.entries()).filter(|&m| self.get(m))
    }

    /// Subsets mapped to 0, in increasing mask order.
    pub fn zeros(&self) -> impl Iterator<Item = u64> + '_ {
        (0..self.entries()).filter(|&m| !self.get(m))
    }

    pub fn count_ones(&self) -> u64 {
        self.words.iter().map(|w| u64::from(w.count_ones())).sum()
    }

    /// `f*(X) = 1 - f(W ∖ X)`.
    pub fn dual(&self) -> BooleanFn {
        let full = self.window.full_mask();
        let mut out = self.clone();
        for m in 0..self.entries() {
            out.set(m, !self.get(full & !m));
        }
        out
    }

    /// `F⁻¹(f)`.
    pub fn to_collection(&self) -> IntervalCollection {
        maximal_intervals(self)
    }
}

impl std::fmt::Debug for BooleanFn {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "BooleanFn({:?}, ones: {:?})", self.window, self.ones().collect::<Vec<_>>())
    }
}

pub fn collection_to_boolean(x: &IntervalCollection) -> Result<BooleanFn, LatticeError> {
    BooleanFn::from_collection(x)
}

pub fn boolean_to_collection(f: &BooleanFn) -> IntervalCollection {
    maximal_intervals(f)
}

pub fn dual_boolean(f: &BooleanFn) -> BooleanFn {
    f.dual()
}
