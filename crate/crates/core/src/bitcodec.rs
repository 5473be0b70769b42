//! Fixed-width binary words and the combinatorics of words with a fixed number
//! of zeros.
//!
//! Bit `i` of a word is its `i`-th least significant bit. A root-to-leaf path in
//! a tree of height `h` is an `h`-bit word read from bit `h - 1` (the root's
//! child) down to bit 0 (the leaf); a 0 turns left and a 1 turns right.
//!
//! Widths are capped at 64 bits. At width 64 a balanced tree already holds
//! `C(64, 32) - 1 ≈ 1.8·10^18` time steps.

use std::fmt;

use crate::error::{Error, Result};

pub const MAX_WIDTH: u32 = 64;

/// Exact binomial coefficient. Zero when `k > n`.
pub fn binomial(n: u32, k: u32) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) is divisible by i + 1 after the multiply.
        acc = acc * u128::from(n - i) / u128::from(i + 1);
    }
    acc
}

/// An `width`-bit word.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PathWord {
    bits: u64,
    width: u32,
}

impl PathWord {
    pub fn new(bits: u64, width: u32) -> Result<Self> {
        if width == 0 || width > MAX_WIDTH {
            return Err(Error::InvalidArgument(format!(
                "word width must be in 1..=64, got {width}"
            )));
        }
        if width < 64 && bits >> width != 0 {
            return Err(Error::OutOfRange {
                what: "word",
                value: bits.into(),
                bound: 1u128 << width,
            });
        }
        Ok(Self { bits, width })
    }

    pub(crate) const fn from_raw(bits: u64, width: u32) -> Self {
        Self { bits, width }
    }

    pub fn bits(&self) -> u64 {
        self.bits
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn bit(&self, i: u32) -> bool {
        i < self.width && (self.bits >> i) & 1 == 1
    }

    pub fn popcount(&self) -> u32 {
        self.bits.count_ones()
    }

    pub fn zeros(&self) -> u32 {
        self.width - self.popcount()
    }
}

impl fmt::Debug for PathWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PathWord({:0w$b})", self.bits, w = self.width as usize)
    }
}

impl fmt::Display for PathWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:0w$b}", self.bits, w = self.width as usize)
    }
}

pub fn popcount(w: PathWord) -> u32 {
    w.popcount()
}

/// Height, zero count and usable capacity of a tree whose data leaves are the
/// `height`-bit words with exactly `zeros` zeros.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TreeGeometry {
    height: u32,
    zeros: u32,
    capacity: u64,
}

impl TreeGeometry {
    /// Geometry for an arbitrary zero count `0 <= zeros <= height`.
    pub fn new(height: u32, zeros: u32) -> Result<Self> {
        if height == 0 || height > MAX_WIDTH {
            return Err(Error::InvalidArgument(format!(
                "tree height must be in 1..=64, got {height}"
            )));
        }
        if zeros > height {
            return Err(Error::InvalidArgument(format!(
                "zero count {zeros} exceeds height {height}"
            )));
        }
        // C(64, k) < 2^64 for every k, so this never truncates.
        let capacity = (binomial(height, zeros) - 1) as u64;
        Ok(Self {
            height,
            zeros,
            capacity,
        })
    }

    /// Geometry with `zeros = height / 2`; `height` must be even.
    pub fn balanced(height: u32) -> Result<Self> {
        if height % 2 != 0 {
            return Err(Error::InvalidArgument(format!(
                "balanced trees need an even height, got {height}"
            )));
        }
        Self::new(height, height / 2)
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn zeros(&self) -> u32 {
        self.zeros
    }

    pub fn ones(&self) -> u32 {
        self.height - self.zeros
    }

    /// Number of prefix sums the tree can release: `C(height, zeros) - 1`.
    pub fn capacity(&self) -> u64 {
        self.capacity
    }

    /// Number of words with exactly `zeros` zeros.
    pub fn word_count(&self) -> u128 {
        binomial(self.height, self.zeros)
    }

    /// Smallest valid word: all ones packed at the bottom.
    pub fn first_word(&self) -> PathWord {
        PathWord::from_raw(low_mask(self.ones()), self.height)
    }

    /// Largest valid word: all ones packed at the top.
    pub fn last_word(&self) -> PathWord {
        PathWord::from_raw(low_mask(self.ones()) << self.zeros, self.height)
    }
}

fn low_mask(n: u32) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

/// Smallest even height `h` with `C(h, h/2) >= horizon + 1`.
pub fn choose_height(horizon: u64) -> Result<TreeGeometry> {
    if horizon == 0 {
        return Err(Error::InvalidArgument("horizon must be at least 1".into()));
    }
    let needed = u128::from(horizon) + 1;
    (2..=MAX_WIDTH)
        .step_by(2)
        .find(|&h| binomial(h, h / 2) >= needed)
        .map(TreeGeometry::balanced)
        .unwrap_or(Err(Error::WidthOverflow { horizon }))
}

/// The `rank`-th smallest (0-indexed) word of `geom` by combinatorial-number-system
/// unranking, O(height).
pub fn balanced_unrank(geom: TreeGeometry, rank: u64) -> Result<PathWord> {
    let total = geom.word_count();
    let mut r = u128::from(rank);
    if r >= total {
        return Err(Error::OutOfRange {
            what: "rank",
            value: r,
            bound: total,
        });
    }
    let mut ones = geom.ones();
    let mut bits = 0u64;
    for pos in (0..geom.height).rev() {
        if ones == 0 {
            break;
        }
        // Words with a 0 here still have to fit `ones` ones below.
        let below = binomial(pos, ones);
        if r >= below {
            r -= below;
            bits |= 1 << pos;
            ones -= 1;
        }
    }
    Ok(PathWord::from_raw(bits, geom.height))
}

/// Inverse of [`balanced_unrank`].
pub fn balanced_rank(w: PathWord, geom: TreeGeometry) -> Result<u64> {
    if w.width != geom.height {
        return Err(Error::InvalidArgument(format!(
            "word width {} does not match tree height {}",
            w.width, geom.height
        )));
    }
    if w.popcount() != geom.ones() {
        return Err(Error::Unbalanced {
            bits: w.bits,
            width: w.width,
            ones: w.popcount(),
            expected: geom.ones(),
        });
    }
    let mut rank = 0u128;
    let mut ones = geom.ones();
    for pos in (0..geom.height).rev() {
        if w.bit(pos) {
            rank += binomial(pos, ones);
            ones -= 1;
        }
    }
    Ok(rank as u64)
}

/// Next larger word of the same width and popcount, in constant time.
pub fn next_balanced(w: PathWord) -> Result<PathWord> {
    let x = u128::from(w.bits);
    if x == 0 {
        return Err(Error::Exhausted { width: w.width });
    }
    let lowest = x & x.wrapping_neg();
    let ripple = x + lowest;
    let next = (((ripple ^ x) >> 2) / lowest) | ripple;
    if next >> w.width != 0 {
        return Err(Error::Exhausted { width: w.width });
    }
    Ok(PathWord::from_raw(next as u64, w.width))
}

/// Length of the lowest maximal run of ones, ignoring trailing zeros.
pub fn trailing_ones_block(w: PathWord) -> Result<u32> {
    if w.bits == 0 {
        return Err(Error::InvalidArgument(
            "trailing ones block of the zero word".into(),
        ));
    }
    Ok((w.bits >> w.bits.trailing_zeros()).trailing_ones())
}
