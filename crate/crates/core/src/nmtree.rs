//! Prefix sums mod `M` over a complete binary tree kept in shared-bit memory.
//!
//! Internal node `i` stores the sum (mod `M`) of the leaves in its left
//! subtree; the last array element, which no node covers, is kept on the
//! side as `vn1`. The array itself is never stored.
//!
//! Because the nodes on the path above leaves `2r` and `2r + 1` form register
//! `r` of a [`YggdrasilMemory`], [`NmTree::update`] is one register
//! read-modify-write and [`NmTree::retrieve`] one register read plus `ι`
//! fold rounds and, when `ι < ⌈lg n⌉`, a [`SumTable`] lookup. The
//! `*_logn` variants walk the tree node by node and serve as the RAM-model
//! reference.

use crate::error::{check_range, Error, Result};
use crate::rambo::YggdrasilMemory;
use crate::wordpar::{ceil_log2, dist, fold_sum, lane_add_mod, mask, LaneGeometry, LaneWord};

/// Default cap on the bit width of a [`SumTable`] index (one million entries).
pub const DEFAULT_TABLE_CAP: u32 = 20;
/// Largest table index width accepted at all.
pub const MAX_TABLE_CAP: u32 = 32;
/// Tallest tree the simulator will allocate.
pub const MAX_HEIGHT: u32 = 32;

#[inline]
fn add_mod(a: u64, b: u64, modulus: u64) -> u64 {
    ((a as u128 + b as u128) % modulus as u128) as u64
}

/// Lookup from a packed word of `r` lanes to the sum of its lanes mod `M`.
#[derive(Debug, Clone)]
pub struct SumTable {
    geometry: LaneGeometry,
    entries: Vec<u64>,
}

impl SumTable {
    /// Populate every entry by summing the lanes of its index.
    pub fn build(geometry: LaneGeometry) -> Self {
        let size = 1usize << geometry.bits();
        let entries = (0..size as u64)
            .map(|v| {
                geometry.unpack(LaneWord(v)).into_iter().fold(0, |acc, x| {
                    add_mod(acc, x % geometry.modulus(), geometry.modulus())
                })
            })
            .collect();
        Self { geometry, entries }
    }

    pub fn geometry(&self) -> &LaneGeometry {
        &self.geometry
    }

    /// Bits in one index, `r * m`.
    pub fn index_bits(&self) -> u32 {
        self.geometry.bits()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Ordinary memory the table occupies, `m` bits per entry.
    pub fn size_bits(&self) -> u64 {
        self.entries.len() as u64 * self.geometry.width() as u64
    }

    pub fn lookup(&self, v: LaneWord) -> u64 {
        self.entries[v.0 as usize]
    }

    pub fn entries(&self) -> &[u64] {
        &self.entries
    }
}

/// Construction parameters for an [`NmTree`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TreeParams {
    /// Array length `N`.
    pub len: u64,
    /// Universe size `M`.
    pub modulus: u64,
    /// Lane width `m`; defaults to `⌈lg M⌉`.
    pub lane_width: Option<u32>,
    /// Fold rounds before the table lookup; defaults to `⌈lg n⌉` (no table).
    pub iota: Option<u32>,
    /// Largest table index width, in bits, that construction will accept.
    pub table_cap: u32,
}

impl TreeParams {
    pub fn new(len: u64, modulus: u64) -> Self {
        Self {
            len,
            modulus,
            lane_width: None,
            iota: None,
            table_cap: DEFAULT_TABLE_CAP,
        }
    }

    pub fn iota(mut self, iota: u32) -> Self {
        self.iota = Some(iota);
        self
    }

    pub fn table_cap(mut self, cap: u32) -> Self {
        self.table_cap = cap;
        self
    }

    pub fn lane_width(mut self, m: u32) -> Self {
        self.lane_width = Some(m);
        self
    }
}

#[derive(Debug)]
pub struct NmTree {
    len: u64,
    capacity: u64,
    geometry: LaneGeometry,
    mem: YggdrasilMemory,
    vn1: u64,
    iota: u32,
    table: Option<SumTable>,
}

impl NmTree {
    pub fn new(params: TreeParams) -> Result<Self> {
        let TreeParams {
            len,
            modulus,
            lane_width,
            iota,
            table_cap,
        } = params;
        if len < 2 {
            return Err(Error::Geometry(format!("array length {len} below 2")));
        }
        let height = ceil_log2(len);
        if height > MAX_HEIGHT {
            return Err(Error::Geometry(format!(
                "tree height {height} above simulator limit {MAX_HEIGHT}"
            )));
        }
        let width = lane_width.unwrap_or_else(|| ceil_log2(modulus).max(1));
        let geometry = LaneGeometry::new(height, width, modulus)?;

        let max_iota = ceil_log2(height as u64);
        let iota = iota.unwrap_or(max_iota);
        if iota > max_iota {
            return Err(Error::OutOfRange {
                what: "iota",
                value: iota as u64,
                limit: max_iota as u64 + 1,
            });
        }
        if table_cap > MAX_TABLE_CAP {
            return Err(Error::OutOfRange {
                what: "table cap",
                value: table_cap as u64,
                limit: MAX_TABLE_CAP as u64 + 1,
            });
        }
        let table = if iota < max_iota {
            let remaining = height.next_power_of_two() >> iota;
            let index_bits = remaining * width;
            if index_bits > table_cap {
                return Err(Error::TableTooLarge {
                    width: index_bits,
                    cap: table_cap,
                });
            }
            Some(SumTable::build(LaneGeometry::new(
                remaining, width, modulus,
            )?))
        } else {
            None
        };

        Ok(Self {
            len,
            capacity: 1 << height,
            geometry,
            mem: YggdrasilMemory::new(geometry),
            vn1: 0,
            iota,
            table,
        })
    }

    /// Array length as requested.
    pub fn len(&self) -> u64 {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Leaves in the complete tree, `2^n`.
    pub fn capacity(&self) -> u64 {
        self.capacity
    }

    pub fn geometry(&self) -> &LaneGeometry {
        &self.geometry
    }

    pub fn modulus(&self) -> u64 {
        self.geometry.modulus()
    }

    pub fn iota(&self) -> u32 {
        self.iota
    }

    /// `⌈lg n⌉`: the fold count at which no table is needed.
    pub fn max_iota(&self) -> u32 {
        ceil_log2(self.geometry.lanes() as u64)
    }

    pub fn vn1(&self) -> u64 {
        self.vn1
    }

    pub fn memory(&self) -> &YggdrasilMemory {
        &self.mem
    }

    pub fn table(&self) -> Option<&SumTable> {
        self.table.as_ref()
    }

    /// Ordinary (non-shared) memory in bits: the table plus `vn1`.
    pub fn ordinary_bits(&self) -> u64 {
        self.table.as_ref().map_or(0, SumTable::size_bits) + self.geometry.width() as u64
    }

    fn check_index(&self, j: u64) -> Result<()> {
        check_range("index", j, self.len)
    }

    fn check_delta(&self, delta: u64) -> Result<()> {
        check_range("delta", delta, self.modulus())
    }

    fn last(&self) -> u64 {
        self.capacity - 1
    }

    /// `A(j) += delta (mod M)` with one register read and one register write.
    pub fn update(&mut self, j: u64, delta: u64) -> Result<()> {
        self.check_index(j)?;
        self.check_delta(delta)?;
        if j == self.last() {
            self.vn1 = add_mod(self.vn1, delta, self.modulus());
            return Ok(());
        }
        let g = self.geometry;
        let reg = self.mem.read_reg(j / 2)?;
        let left_of = !j & self.last();
        let addend = dist(delta, &g)? & mask(left_of, &g)?;
        self.mem.write_reg(j / 2, lane_add_mod(reg, addend, &g))
    }

    /// `Σ_{i ≤ j} A(i) mod M` with one register read.
    pub fn retrieve(&self, j: u64) -> Result<u64> {
        self.check_index(j)?;
        let g = self.geometry;
        if j == self.last() {
            let v = self.mem.read_reg(j / 2)? & mask(j, &g)?;
            Ok(add_mod(self.lane_sum(v)?, self.vn1, self.modulus()))
        } else {
            let v = self.mem.read_reg(j.div_ceil(2))? & mask(j + 1, &g)?;
            self.lane_sum(v)
        }
    }

    /// Sum of the lanes of a register word: `ι` fold rounds, then a table
    /// lookup if the word still has more than one lane.
    fn lane_sum(&self, v: LaneWord) -> Result<u64> {
        let (folded, _) = fold_sum(v, &self.geometry, self.iota)?;
        Ok(match &self.table {
            Some(t) => t.lookup(folded),
            None => folded.0,
        })
    }

    /// Node-at-a-time update walking from leaf `j` to the root.
    pub fn update_logn(&mut self, j: u64, delta: u64) -> Result<()> {
        self.check_index(j)?;
        self.check_delta(delta)?;
        if j == self.last() {
            self.vn1 = add_mod(self.vn1, delta, self.modulus());
            return Ok(());
        }
        let mut i = self.capacity + j;
        while i > 1 {
            let next = i / 2;
            if i.is_multiple_of(2) {
                let cur = self.mem.read_node(next)?;
                self.mem
                    .write_node(next, add_mod(cur, delta, self.modulus()))?;
            }
            i = next;
        }
        Ok(())
    }

    /// Node-at-a-time retrieve.
    pub fn retrieve_logn(&self, j: u64) -> Result<u64> {
        self.check_index(j)?;
        let (mut sum, mut i) = if j == self.last() {
            (self.vn1, self.capacity + j)
        } else {
            (0, self.capacity + j + 1)
        };
        while i > 1 {
            let next = i / 2;
            if i % 2 == 1 {
                sum = add_mod(sum, self.mem.read_node(next)?, self.modulus());
            }
            i = next;
        }
        Ok(sum)
    }

    /// `Σ_{k ≤ i ≤ j} A(i) mod M` as `retrieve(j) - retrieve(k - 1)`.
    pub fn partial_sum(&self, k: u64, j: u64) -> Result<u64> {
        if k > j {
            return Err(Error::InvertedRange { k, j });
        }
        self.check_index(j)?;
        let hi = self.retrieve(j)?;
        let lo = if k == 0 { 0 } else { self.retrieve(k - 1)? };
        Ok(add_mod(hi, self.modulus() - lo, self.modulus()))
    }

    /// Header line `N M iota vn1` followed by the node dump.
    pub fn dump(&self) -> String {
        format!(
            "{} {} {} {}\n{}",
            self.len,
            self.modulus(),
            self.iota,
            self.vn1,
            self.mem.dump()
        )
    }
}
