//! Word-size parallel (SWAR) lane arithmetic.
//!
//! A [`LaneWord`] packs `n` lanes of `m` bits each into one machine word,
//! lane `l` occupying bits `l*m .. (l+1)*m`. Every operation here keeps each
//! lane's arithmetic inside its own `m` bits, so a carry or borrow in one
//! lane can never reach a neighbour. That property is what lets a single
//! register write update every node on a tree path at once.
//!
//! | Function | Result |
//! |----------|--------|
//! | [`dist`] | `n` copies of an `m`-bit value |
//! | [`mask`] | lane `l` all-ones iff bit `l` of the argument is set |
//! | [`lane_add_mod`] | lane-wise `(a + b) mod M` |
//! | [`fold_sum`] | halving reduction of lanes, `mod M` |

use std::fmt;
use std::ops::{BitAnd, BitOr};

use crate::error::{check_range, Error, Result};

/// Bits available in one register of the simulated machine.
pub const WORD_BITS: u32 = 64;

/// `⌈lg x⌉`, with `ceil_log2(0) == ceil_log2(1) == 0`.
pub fn ceil_log2(x: u64) -> u32 {
    if x <= 1 {
        0
    } else {
        64 - (x - 1).leading_zeros()
    }
}

#[inline]
fn low_ones(bits: u32) -> u64 {
    if bits >= 64 {
        u64::MAX
    } else {
        (1u64 << bits) - 1
    }
}

/// Shape of a packed word: how many lanes, how wide, and the modulus the
/// lane values live under.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LaneGeometry {
    lanes: u32,
    width: u32,
    modulus: u64,
}

impl LaneGeometry {
    /// Build a geometry with an explicit lane width.
    ///
    /// Requires `lanes >= 1`, `width >= 1`, `2 <= modulus <= 2^width` and
    /// `lanes * width <= WORD_BITS`.
    pub fn new(lanes: u32, width: u32, modulus: u64) -> Result<Self> {
        if lanes == 0 {
            return Err(Error::Geometry("lane count must be at least 1".into()));
        }
        if width == 0 || width > WORD_BITS {
            return Err(Error::Geometry(format!(
                "lane width {width} not in 1..={WORD_BITS}"
            )));
        }
        if modulus < 2 {
            return Err(Error::Geometry(format!("modulus {modulus} below 2")));
        }
        if (modulus as u128) > (1u128 << width) {
            return Err(Error::Geometry(format!(
                "modulus {modulus} does not fit in {width}-bit lanes"
            )));
        }
        let bits =
            lanes
                .checked_mul(width)
                .filter(|&b| b <= WORD_BITS)
                .ok_or(Error::WordBudget {
                    lanes,
                    width,
                    bits: lanes.saturating_mul(width),
                    budget: WORD_BITS,
                })?;
        debug_assert!(bits <= WORD_BITS);
        Ok(Self {
            lanes,
            width,
            modulus,
        })
    }

    /// Geometry with the minimal lane width `⌈lg modulus⌉`.
    pub fn for_modulus(lanes: u32, modulus: u64) -> Result<Self> {
        Self::new(lanes, ceil_log2(modulus).max(1), modulus)
    }

    pub fn lanes(&self) -> u32 {
        self.lanes
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    /// Total bits in a word of this geometry (`n * m`).
    pub fn bits(&self) -> u32 {
        self.lanes * self.width
    }

    /// Same lane width and modulus with fewer lanes.
    pub(crate) fn with_lanes(&self, lanes: u32) -> Self {
        debug_assert!(lanes >= 1 && lanes <= self.lanes);
        Self { lanes, ..*self }
    }

    /// `m` ones.
    pub fn lane_ones(&self) -> u64 {
        low_ones(self.width)
    }

    /// `n * m` ones.
    pub fn word_ones(&self) -> u64 {
        low_ones(self.bits())
    }

    /// `pattern` (which must fit in one lane) copied into every lane.
    fn replicate(&self, pattern: u64) -> u64 {
        debug_assert!(pattern <= self.lane_ones());
        (0..self.lanes).fold(0u64, |acc, l| acc | (pattern << (l * self.width)))
    }

    /// Value of lane `l`.
    pub fn lane(&self, w: LaneWord, l: u32) -> u64 {
        debug_assert!(l < self.lanes);
        (w.0 >> (l * self.width)) & self.lane_ones()
    }

    /// All lane values, lowest lane first.
    pub fn unpack(&self, w: LaneWord) -> Vec<u64> {
        (0..self.lanes).map(|l| self.lane(w, l)).collect()
    }

    /// Pack lane values (lowest lane first). Missing lanes are zero.
    pub fn pack(&self, lanes: &[u64]) -> Result<LaneWord> {
        check_range("lane count", lanes.len() as u64, self.lanes as u64 + 1)?;
        let mut bits = 0u64;
        for (l, &v) in lanes.iter().enumerate() {
            if v > self.lane_ones() {
                return Err(Error::OutOfRange {
                    what: "lane value",
                    value: v,
                    limit: self.lane_ones(),
                });
            }
            bits |= v << (l as u32 * self.width);
        }
        Ok(LaneWord(bits))
    }

    /// True when every lane is below the modulus and no bit lies above the
    /// top lane.
    pub fn is_reduced(&self, w: LaneWord) -> bool {
        w.0 & !self.word_ones() == 0 && (0..self.lanes).all(|l| self.lane(w, l) < self.modulus)
    }
}

/// Contents of one register: `n` lanes of `m` bits. The geometry is carried
/// separately.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct LaneWord(pub u64);

impl LaneWord {
    pub const ZERO: LaneWord = LaneWord(0);

    pub fn bits(self) -> u64 {
        self.0
    }
}

impl fmt::Debug for LaneWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LaneWord({:#b})", self.0)
    }
}

impl BitAnd for LaneWord {
    type Output = LaneWord;
    fn bitand(self, rhs: LaneWord) -> LaneWord {
        LaneWord(self.0 & rhs.0)
    }
}

impl BitOr for LaneWord {
    type Output = LaneWord;
    fn bitor(self, rhs: LaneWord) -> LaneWord {
        LaneWord(self.0 | rhs.0)
    }
}

/// `n` copies of the `m`-bit value `delta`.
///
/// `delta * (1 + 2^m + 2^2m + ...)`; no lane overflows because `delta < 2^m`.
pub fn dist(delta: u64, g: &LaneGeometry) -> Result<LaneWord> {
    if delta > g.lane_ones() {
        return Err(Error::OutOfRange {
            what: "dist argument",
            value: delta,
            limit: g.lane_ones(),
        });
    }
    Ok(LaneWord(delta.wrapping_mul(g.replicate(1))))
}

/// Lane `l` is `m` ones when bit `l` of `j` is set, zero otherwise.
pub fn mask(j: u64, g: &LaneGeometry) -> Result<LaneWord> {
    if j & !low_ones(g.lanes) != 0 {
        return Err(Error::OutOfRange {
            what: "mask argument",
            value: j,
            limit: low_ones(g.lanes),
        });
    }
    let spread = (0..g.lanes)
        .filter(|&l| (j >> l) & 1 == 1)
        .fold(0u64, |acc, l| acc | (1u64 << (l * g.width)));
    // Each lane holds 0 or 1, so multiplying by 2^m - 1 stays in-lane.
    Ok(LaneWord(spread.wrapping_mul(g.lane_ones())))
}

/// Lane-wise `(a + b) mod M`.
///
/// Each operand is split into a low piece of `⌈m/2⌉` bits and a high piece of
/// `⌊m/2⌋` bits, carried in two separate packed words. Every piece plus its
/// carry fits in `m` bits, so the plain integer additions below never move a
/// bit across a lane boundary. The reduction computes `c + 2^m - M`, turns its
/// bit `m` into an all-ones lane mask `d`, and selects between `c - M` and `c`.
///
/// For `m = 1` the modulus must be 2 and the sum is XOR.
pub fn lane_add_mod(a: LaneWord, b: LaneWord, g: &LaneGeometry) -> LaneWord {
    debug_assert!(g.is_reduced(a), "unreduced operand {a:?} for {g:?}");
    debug_assert!(g.is_reduced(b), "unreduced operand {b:?} for {g:?}");

    let m = g.width;
    if m == 1 {
        return LaneWord((a.0 ^ b.0) & g.word_ones());
    }

    let lo_bits = m.div_ceil(2);
    let hi_bits = m / 2;
    let lo_mask = g.replicate(low_ones(lo_bits));
    let hi_mask = g.replicate(low_ones(hi_bits));
    let lo_carry = g.replicate(1 << lo_bits);

    let split = |w: u64| (w & lo_mask, (w >> lo_bits) & hi_mask);

    // (lo, hi) + (lo, hi): low sums may use lo_bits + 1 bits; move that bit up.
    let add = |(x_lo, x_hi): (u64, u64), (y_lo, y_hi): (u64, u64)| {
        let s_lo = x_lo + y_lo;
        let carry = (s_lo & lo_carry) >> lo_bits;
        (s_lo & lo_mask, x_hi + y_hi + carry)
    };

    let c = add(split(a.0), split(b.0));

    // c + 2^m - M < 2^(m+1); bit m lands on bit `hi_bits` of the high piece.
    let bias = (((1u128 << m) - g.modulus as u128) as u64) & g.lane_ones();
    let biased = add(c, split(g.replicate(bias)));
    let flags = biased.1 & g.replicate(1 << hi_bits);

    // d = (x AND 2^m) - ((x AND 2^m) >> m), lane-wise: m ones where c >= M.
    let top = ((flags >> hi_bits) as u128) << m;
    let d = (top - (top >> m)) as u64;

    // c - M = (c + 2^m - M) - 2^m; the bias bit is set wherever d is, so the
    // subtraction never borrows.
    let reduced_lo = biased.0;
    let reduced_hi = biased.1 - flags;

    let res_lo = (reduced_lo & d) | (c.0 & !d);
    let res_hi = (reduced_hi & d) | (c.1 & !d);
    LaneWord((res_lo | (res_hi << lo_bits)) & g.word_ones())
}

/// Halving lane reduction.
///
/// Pads `v` with zero lanes up to the next power of two, then runs `steps`
/// rounds that add the upper half of the lanes onto the lower half with
/// [`lane_add_mod`]. Returns the folded word together with its (narrower)
/// geometry. After `⌈lg n⌉` rounds one lane holds `Σ lanes mod M`.
pub fn fold_sum(v: LaneWord, g: &LaneGeometry, steps: u32) -> Result<(LaneWord, LaneGeometry)> {
    let max_steps = ceil_log2(g.lanes as u64);
    if steps > max_steps {
        return Err(Error::OutOfRange {
            what: "fold steps",
            value: steps as u64,
            limit: max_steps as u64 + 1,
        });
    }
    debug_assert!(g.is_reduced(v));
    let mut lanes = g.lanes.next_power_of_two();
    let mut bits = v.0;
    let mut geometry = *g;
    for _ in 0..steps {
        let half = lanes / 2;
        let shift = half * g.width;
        geometry = g.with_lanes(half);
        let upper = LaneWord(bits >> shift);
        let lower = LaneWord(bits & low_ones(shift));
        bits = lane_add_mod(upper, lower, &geometry).0;
        lanes = half;
    }
    Ok((LaneWord(bits), geometry))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn geom(n: u32, m: u32, modulus: u64) -> LaneGeometry {
        LaneGeometry::new(n, m, modulus).unwrap()
    }

    fn naive_dist(delta: u64, n: u32, m: u32) -> u64 {
        let mut out = 0u64;
        for l in 0..n {
            for b in 0..m {
                if (delta >> b) & 1 == 1 {
                    out |= 1 << (l * m + b);
                }
            }
        }
        out
    }

    fn naive_mask(j: u64, n: u32, m: u32) -> u64 {
        let mut out = 0u64;
        for l in 0..n {
            if (j >> l) & 1 == 1 {
                for b in 0..m {
                    out |= 1 << (l * m + b);
                }
            }
        }
        out
    }

    #[test]
    fn dist_worked_values() {
        assert_eq!(dist(0b010, &geom(4, 3, 8)).unwrap().0, 0b010010010010);
        assert_eq!(dist(0b11, &geom(3, 2, 4)).unwrap().0, 0b111111);
        assert_eq!(dist(0, &geom(5, 7, 100)).unwrap(), LaneWord::ZERO);
    }

    #[test]
    fn mask_worked_values() {
        assert_eq!(mask(0b1001, &geom(4, 3, 8)).unwrap().0, 0b111000000111);
        assert_eq!(mask(0b101, &geom(3, 2, 4)).unwrap().0, 0b110011);
        assert_eq!(mask(0, &geom(4, 3, 8)).unwrap(), LaneWord::ZERO);
    }

    #[test]
    fn dist_mask_range_errors() {
        assert!(dist(8, &geom(4, 3, 8)).is_err());
        assert!(mask(16, &geom(4, 3, 8)).is_err());
        assert!(mask(u64::MAX, &geom(64, 1, 2)).is_ok());
    }

    #[test]
    fn dist_and_mask_exhaustive_small() {
        for n in 1..=8u32 {
            for m in 1..=8u32 {
                let g = geom(n, m, 2);
                for delta in 0..(1u64 << m) {
                    assert_eq!(dist(delta, &g).unwrap().0, naive_dist(delta, n, m));
                }
                for j in 0..(1u64 << n) {
                    assert_eq!(mask(j, &g).unwrap().0, naive_mask(j, n, m));
                }
            }
        }
    }

    #[test]
    fn geometry_bounds() {
        assert!(LaneGeometry::new(0, 3, 8).is_err());
        assert!(LaneGeometry::new(2, 0, 2).is_err());
        assert!(LaneGeometry::new(2, 3, 9).is_err());
        assert!(LaneGeometry::new(2, 3, 1).is_err());
        assert!(matches!(
            LaneGeometry::new(9, 8, 256),
            Err(Error::WordBudget { bits: 72, .. })
        ));
        assert!(LaneGeometry::new(8, 8, 256).is_ok());
        assert!(LaneGeometry::new(1, 64, u64::MAX).is_ok());
        assert_eq!(LaneGeometry::for_modulus(4, 5).unwrap().width(), 3);
        assert_eq!(LaneGeometry::for_modulus(4, 2).unwrap().width(), 1);
        assert_eq!(LaneGeometry::for_modulus(4, 16).unwrap().width(), 4);
    }

    #[test]
    fn add_mod_examples() {
        let g = geom(2, 3, 5);
        let a = g.pack(&[3, 4]).unwrap();
        let b = g.pack(&[4, 3]).unwrap();
        assert_eq!(g.unpack(lane_add_mod(a, b, &g)), vec![2, 2]);
        assert_eq!(lane_add_mod(a, dist(0, &g).unwrap(), &g), a);

        let g = geom(4, 1, 2);
        let a = g.pack(&[1, 0, 1, 1]).unwrap();
        let b = g.pack(&[1, 1, 0, 1]).unwrap();
        assert_eq!(g.unpack(lane_add_mod(a, b, &g)), vec![0, 1, 1, 0]);
    }

    #[test]
    fn add_mod_full_width_lanes() {
        // Top lane touches bit 63: no headroom above the word.
        let g = geom(2, 32, (1 << 32) - 5);
        let x = (1u64 << 32) - 6;
        let w = g.pack(&[x, x]).unwrap();
        let r = lane_add_mod(w, w, &g);
        let want = (2 * x) % g.modulus();
        assert_eq!(g.unpack(r), vec![want, want]);

        let g = geom(1, 64, u64::MAX);
        let x = u64::MAX - 1;
        let r = lane_add_mod(LaneWord(x), LaneWord(x), &g);
        assert_eq!(r.0, ((2 * x as u128) % u64::MAX as u128) as u64);
    }

    #[test]
    fn fold_examples() {
        let g = geom(4, 3, 8);
        let v = g.pack(&[1, 2, 3, 0]).unwrap();
        let (w, fg) = fold_sum(v, &g, 2).unwrap();
        assert_eq!(fg.lanes(), 1);
        assert_eq!(w.0, 6);

        let (w, _) = fold_sum(LaneWord::ZERO, &g, 1).unwrap();
        assert_eq!(w, LaneWord::ZERO);

        let g = geom(2, 2, 3);
        let (w, _) = fold_sum(g.pack(&[2, 2]).unwrap(), &g, 1).unwrap();
        assert_eq!(w.0, 1);

        assert!(fold_sum(LaneWord::ZERO, &g, 2).is_err());
    }

    #[test]
    fn fold_pads_odd_lane_counts() {
        let g = geom(3, 4, 11);
        let v = g.pack(&[10, 9, 8]).unwrap();
        let (w, fg) = fold_sum(v, &g, 1).unwrap();
        assert_eq!(fg.unpack(w), vec![(10 + 8) % 11, 9]);
        let (w, _) = fold_sum(v, &g, 2).unwrap();
        assert_eq!(w.0, 27 % 11);
    }

    #[test]
    fn add_mod_exhaustive_small_moduli() {
        for modulus in 2..=64u64 {
            let m = ceil_log2(modulus);
            let g = geom(2, m, modulus);
            for x in 0..modulus {
                for y in 0..modulus {
                    let a = g.pack(&[x, y]).unwrap();
                    let b = g.pack(&[y, x]).unwrap();
                    let s = (x + y) % modulus;
                    assert_eq!(g.unpack(lane_add_mod(a, b, &g)), vec![s, s], "M={modulus}");
                }
            }
        }
    }

    fn geometry_strategy() -> impl Strategy<Value = LaneGeometry> {
        (1u32..=16, 2u64..=1 << 20).prop_filter_map("budget", |(n, modulus)| {
            LaneGeometry::for_modulus(n, modulus).ok()
        })
    }

    fn word_in(g: LaneGeometry) -> impl Strategy<Value = Vec<u64>> {
        prop::collection::vec(0..g.modulus(), g.lanes() as usize)
    }

    proptest! {
        #[test]
        fn add_mod_matches_scalar(
            (g, xs, ys) in geometry_strategy()
                .prop_flat_map(|g| (Just(g), word_in(g), word_in(g)))
        ) {
            let r = lane_add_mod(g.pack(&xs).unwrap(), g.pack(&ys).unwrap(), &g);
            prop_assert!(g.is_reduced(r));
            for (l, (x, y)) in xs.iter().zip(&ys).enumerate() {
                prop_assert_eq!(g.lane(r, l as u32), (x + y) % g.modulus());
            }
        }

        #[test]
        fn fold_matches_lane_sum(
            (g, xs) in geometry_strategy().prop_flat_map(|g| (Just(g), word_in(g)))
        ) {
            let steps = ceil_log2(g.lanes() as u64);
            let (w, fg) = fold_sum(g.pack(&xs).unwrap(), &g, steps).unwrap();
            prop_assert_eq!(fg.lanes(), 1);
            let want = xs.iter().map(|&x| x as u128).sum::<u128>() % g.modulus() as u128;
            prop_assert_eq!(w.0 as u128, want);
        }

        #[test]
        fn mask_complements_partition(n in 1u32..=16, m in 1u32..=4, j in any::<u64>()) {
            let g = geom(n, m, 2);
            let j = j & ((1 << n) - 1);
            let not_j = !j & ((1 << n) - 1);
            let a = mask(j, &g).unwrap();
            let b = mask(not_j, &g).unwrap();
            prop_assert_eq!((a & b).0, 0);
            prop_assert_eq!((a | b).0, g.word_ones());
        }
    }
}
