//! Reference structures: a dense array with linear-time retrieve, and a
//! Fenwick tree. Both work mod `M` so they line up with [`crate::NmTree`].

use std::cell::Cell;

use crate::error::{check_range, Error, Result};

#[inline]
fn add_mod(a: u64, b: u64, modulus: u64) -> u64 {
    ((a as u128 + b as u128) % modulus as u128) as u64
}

fn check_modulus(modulus: u64) -> Result<()> {
    if modulus < 2 {
        Err(Error::Geometry(format!("modulus {modulus} below 2")))
    } else {
        Ok(())
    }
}

/// The array itself; `retrieve` is a loop.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Oracle {
    values: Vec<u64>,
    modulus: u64,
}

impl Oracle {
    pub fn new(len: usize, modulus: u64) -> Result<Self> {
        check_modulus(modulus)?;
        Ok(Self {
            values: vec![0; len],
            modulus,
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn values(&self) -> &[u64] {
        &self.values
    }

    pub fn update(&mut self, j: u64, delta: u64) -> Result<()> {
        check_range("index", j, self.values.len() as u64)?;
        check_range("delta", delta, self.modulus)?;
        let slot = &mut self.values[j as usize];
        *slot = add_mod(*slot, delta, self.modulus);
        Ok(())
    }

    pub fn retrieve(&self, j: u64) -> Result<u64> {
        check_range("index", j, self.values.len() as u64)?;
        Ok(self.sum(0, j as usize))
    }

    /// `Σ_{k..=j}` by direct summation.
    pub fn range(&self, k: u64, j: u64) -> Result<u64> {
        if k > j {
            return Err(Error::InvertedRange { k, j });
        }
        check_range("index", j, self.values.len() as u64)?;
        Ok(self.sum(k as usize, j as usize))
    }

    fn sum(&self, k: usize, j: usize) -> u64 {
        self.values[k..=j]
            .iter()
            .fold(0, |acc, &v| add_mod(acc, v, self.modulus))
    }
}

/// Binary indexed tree mod `M`. Entry `i` (1-based) covers
/// `i - lowbit(i) + 1 ..= i`.
#[derive(Debug, Clone)]
pub struct FenwickTree {
    tree: Vec<u64>,
    modulus: u64,
    reads: Cell<u64>,
    writes: Cell<u64>,
}

#[inline]
fn lowbit(i: usize) -> usize {
    i & i.wrapping_neg()
}

impl FenwickTree {
    pub fn new(len: usize, modulus: u64) -> Result<Self> {
        check_modulus(modulus)?;
        Ok(Self {
            tree: vec![0; len + 1],
            modulus,
            reads: Cell::new(0),
            writes: Cell::new(0),
        })
    }

    pub fn len(&self) -> usize {
        self.tree.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn update(&mut self, j: u64, delta: u64) -> Result<()> {
        check_range("index", j, self.len() as u64)?;
        check_range("delta", delta, self.modulus)?;
        let mut i = j as usize + 1;
        while i < self.tree.len() {
            self.reads.set(self.reads.get() + 1);
            self.writes.set(self.writes.get() + 1);
            self.tree[i] = add_mod(self.tree[i], delta, self.modulus);
            i += lowbit(i);
        }
        Ok(())
    }

    pub fn retrieve(&self, j: u64) -> Result<u64> {
        check_range("index", j, self.len() as u64)?;
        let mut i = j as usize + 1;
        let mut sum = 0;
        while i > 0 {
            self.reads.set(self.reads.get() + 1);
            sum = add_mod(sum, self.tree[i], self.modulus);
            i -= lowbit(i);
        }
        Ok(sum)
    }

    /// Cell accesses so far as `(reads, writes)`.
    pub fn accesses(&self) -> (u64, u64) {
        (self.reads.get(), self.writes.get())
    }

    pub fn reset_accesses(&self) {
        self.reads.set(0);
        self.writes.set(0);
    }

    /// Raw 1-based entries (index 0 unused).
    pub fn entries(&self) -> &[u64] {
        &self.tree
    }
}
