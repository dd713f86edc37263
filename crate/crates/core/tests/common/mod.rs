#![allow(dead_code)]

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;

use yggsum::binset::{BinSet, Semigroup};
use yggsum::nmtree::DEFAULT_TABLE_CAP;
use yggsum::workload::Op;
use yggsum::{Error, NmTree, TreeParams};

pub const GEOMETRIES: [(u64, u64); 5] = [(4, 2), (8, 5), (16, 7), (64, 16), (1024, 3)];

/// Every ι for which an `NmTree` of this shape constructs under `cap`.
pub fn valid_iotas(len: u64, modulus: u64, cap: u32) -> Vec<u32> {
    (0..=6)
        .filter(|&i| NmTree::new(TreeParams::new(len, modulus).iota(i).table_cap(cap)).is_ok())
        .collect()
}

pub fn trees(len: u64, modulus: u64) -> Vec<NmTree> {
    valid_iotas(len, modulus, DEFAULT_TABLE_CAP)
        .into_iter()
        .map(|i| NmTree::new(TreeParams::new(len, modulus).iota(i)).unwrap())
        .collect()
}

/// Sorted-map model of a dynamic array under an arbitrary semigroup.
pub struct SparseModel<S: Semigroup> {
    pub op: S,
    pub update_op: S,
    pub map: BTreeMap<u64, S::Value>,
}

impl<S: Semigroup + Clone> SparseModel<S> {
    pub fn new(op: S) -> Self {
        Self {
            update_op: op.clone(),
            op,
            map: BTreeMap::new(),
        }
    }

    pub fn range(&self, k: u64, j: u64) -> Option<S::Value> {
        let acc = self
            .map
            .range(k..=j)
            .fold(None, |acc: Option<S::Value>, (_, &v)| match acc {
                None => Some(v),
                Some(a) => Some(self.op.combine(a, v)),
            });
        acc.or_else(|| self.op.identity())
    }
}

/// Apply one op to both the tree and the model; compare results.
/// `value` maps the op's raw integer to a semigroup value.
pub fn step<S>(
    tree: &mut BinSet<S>,
    model: &mut SparseModel<S>,
    op: Op,
    value: impl Fn(u64) -> S::Value,
) -> Result<(), String>
where
    S: Semigroup + Clone,
{
    let mismatch = |what: String| Err(format!("{op}: {what}"));
    match op {
        Op::Insert { index, value: v } => {
            let got = tree.insert(index, value(v));
            let want = match model.map.entry(index) {
                Entry::Occupied(_) => Err(Error::DuplicateIndex(index)),
                Entry::Vacant(slot) => {
                    slot.insert(value(v));
                    Ok(())
                }
            };
            if got != want {
                return mismatch(format!("{got:?} != {want:?}"));
            }
        }
        Op::Delete { index } => {
            let got = tree.delete(index);
            let want = match model.map.remove(&index) {
                Some(_) => Ok(()),
                None => Err(Error::MissingIndex(index)),
            };
            if got != want {
                return mismatch(format!("{got:?} != {want:?}"));
            }
        }
        Op::Update { index, delta } => {
            let got = tree.update(index, value(delta));
            let want = match model.map.get_mut(&index) {
                Some(v) => {
                    *v = model.update_op.combine(*v, value(delta));
                    Ok(())
                }
                None => Err(Error::MissingIndex(index)),
            };
            if got != want {
                return mismatch(format!("{got:?} != {want:?}"));
            }
        }
        Op::Retrieve { index } => {
            let got = tree.retrieve(index);
            let want = model.range(0, index);
            if got != want {
                return mismatch(format!("{got:?} != {want:?}"));
            }
        }
        Op::Range { from, to } => {
            let got = tree.retrieve_range(from, to).map_err(|e| e.to_string())?;
            let want = model.range(from, to);
            if got != want {
                return mismatch(format!("{got:?} != {want:?}"));
            }
        }
    }
    Ok(())
}
