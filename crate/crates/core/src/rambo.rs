//! Software model of an m-Yggdrasil shared-bit memory.
//!
//! The backing store holds the `2^n - 1` internal nodes of a complete binary
//! tree in heap order, `m` bits each: node `i` (root = 1, children of `i` are
//! `2i` and `2i + 1`) lives at bit offset `(i - 1) * m`. There are `2^(n-1)`
//! registers; lane `l` of register `r` is the node `(2^(n-1) + r) >> l`, so
//! every register is a leaf-to-root path and all registers share the root.
//!
//! A register access gathers or scatters `n` nodes on the host, but costs one
//! access in the model. Register and node counters are kept apart so tests
//! can assert the model cost directly.

use std::cell::Cell;
use std::fmt::Write as _;

use bitvec::prelude::*;

use crate::error::{check_range, Error, Result};
use crate::wordpar::{LaneGeometry, LaneWord};

/// Access counts: `(register_reads, register_writes, node_reads, node_writes)`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Counters {
    pub register_reads: u64,
    pub register_writes: u64,
    pub node_reads: u64,
    pub node_writes: u64,
}

#[derive(Debug, Default)]
struct CounterCells {
    register_reads: Cell<u64>,
    register_writes: Cell<u64>,
    node_reads: Cell<u64>,
    node_writes: Cell<u64>,
}

fn bump(c: &Cell<u64>) {
    c.set(c.get() + 1);
}

#[derive(Debug)]
pub struct YggdrasilMemory {
    geometry: LaneGeometry,
    backing: BitVec<u64, Lsb0>,
    counters: CounterCells,
}

impl YggdrasilMemory {
    /// Zeroed memory for a tree of height `geometry.lanes()`.
    pub fn new(geometry: LaneGeometry) -> Self {
        let nodes = (1usize << geometry.lanes()) - 1;
        Self {
            geometry,
            backing: bitvec![u64, Lsb0; 0; nodes * geometry.width() as usize],
            counters: CounterCells::default(),
        }
    }

    pub fn geometry(&self) -> &LaneGeometry {
        &self.geometry
    }

    /// Number of internal nodes, `2^n - 1`.
    pub fn node_count(&self) -> u64 {
        (1u64 << self.geometry.lanes()) - 1
    }

    /// Number of path registers, `2^(n-1)`.
    pub fn register_count(&self) -> u64 {
        1u64 << (self.geometry.lanes() - 1)
    }

    /// Size of the shared-bit store in bits.
    pub fn backing_bits(&self) -> usize {
        self.backing.len()
    }

    /// Heap index of the node aliased by lane `level` of register `r`.
    pub fn path_node(&self, r: u64, level: u32) -> u64 {
        (self.register_count() + r) >> level
    }

    fn load(&self, node: u64) -> u64 {
        let m = self.geometry.width() as usize;
        let off = (node as usize - 1) * m;
        self.backing[off..off + m].load_le::<u64>()
    }

    fn store(&mut self, node: u64, value: u64) {
        let m = self.geometry.width() as usize;
        let off = (node as usize - 1) * m;
        self.backing[off..off + m].store_le::<u64>(value);
    }

    /// Fetch the whole path for register `r` as one word.
    pub fn read_reg(&self, r: u64) -> Result<LaneWord> {
        check_range("register", r, self.register_count())?;
        bump(&self.counters.register_reads);
        let m = self.geometry.width();
        let bits = (0..self.geometry.lanes()).fold(0u64, |acc, l| {
            acc | (self.load(self.path_node(r, l)) << (l * m))
        });
        Ok(LaneWord(bits))
    }

    /// Store `v` along the path for register `r`.
    pub fn write_reg(&mut self, r: u64, v: LaneWord) -> Result<()> {
        check_range("register", r, self.register_count())?;
        debug_assert!(
            self.geometry.is_reduced(v),
            "unreduced register write {v:?}"
        );
        bump(&self.counters.register_writes);
        for l in 0..self.geometry.lanes() {
            let node = self.path_node(r, l);
            let value = self.geometry.lane(v, l);
            self.store(node, value);
        }
        Ok(())
    }

    pub fn read_node(&self, i: u64) -> Result<u64> {
        check_range("node", i.wrapping_sub(1), self.node_count())?;
        bump(&self.counters.node_reads);
        Ok(self.load(i))
    }

    pub fn write_node(&mut self, i: u64, value: u64) -> Result<()> {
        check_range("node", i.wrapping_sub(1), self.node_count())?;
        if value > self.geometry.lane_ones() {
            return Err(Error::OutOfRange {
                what: "node value",
                value,
                limit: self.geometry.lane_ones(),
            });
        }
        bump(&self.counters.node_writes);
        self.store(i, value);
        Ok(())
    }

    pub fn counters(&self) -> Counters {
        Counters {
            register_reads: self.counters.register_reads.get(),
            register_writes: self.counters.register_writes.get(),
            node_reads: self.counters.node_reads.get(),
            node_writes: self.counters.node_writes.get(),
        }
    }

    pub fn reset_counters(&self) {
        for c in [
            &self.counters.register_reads,
            &self.counters.register_writes,
            &self.counters.node_reads,
            &self.counters.node_writes,
        ] {
            c.set(0);
        }
    }

    /// Every node value in heap order, without touching the counters.
    pub fn snapshot(&self) -> Vec<u64> {
        (1..=self.node_count()).map(|i| self.load(i)).collect()
    }

    /// Raw backing bits, for bit-identity comparisons.
    pub fn backing(&self) -> &BitSlice<u64, Lsb0> {
        &self.backing
    }

    /// `nu[i] = <value>`, one line per node in heap order.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for (i, v) in self.snapshot().into_iter().enumerate() {
            let _ = writeln!(out, "nu[{}] = {}", i + 1, v);
        }
        out
    }
}
