//! Height-balanced binary segment tree over a sparse, changing set of array
//! positions.
//!
//! Leaves hold `(index, value)`; an internal node holds the smallest index of
//! its right subtree as the search divider and the aggregate of its whole
//! subtree under the retrieve operation. Updates apply the update operation
//! at the leaf and recompute aggregates from the children on the way back up,
//! so the retrieve operation needs no inverse. Insertions and deletions keep
//! the tree AVL-balanced, which bounds every operation by `O(lg N)` nodes.
//!
//! Absent positions contribute nothing to any aggregate.

use std::cell::Cell;
use std::fmt;

use crate::error::{Error, Result};

/// An associative operation on values, with optional identity and inverse.
pub trait Semigroup {
    type Value: Copy + PartialEq + fmt::Debug;

    fn combine(&self, a: Self::Value, b: Self::Value) -> Self::Value;

    fn identity(&self) -> Option<Self::Value> {
        None
    }

    fn inverse(&self, _a: Self::Value) -> Option<Self::Value> {
        None
    }

    /// Whether `v` belongs to the value domain.
    fn contains(&self, _v: &Self::Value) -> bool {
        true
    }
}

/// Addition mod `M`; a group.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AddMod {
    pub modulus: u64,
}

impl Semigroup for AddMod {
    type Value = u64;

    fn combine(&self, a: u64, b: u64) -> u64 {
        ((a as u128 + b as u128) % self.modulus as u128) as u64
    }

    fn identity(&self) -> Option<u64> {
        Some(0)
    }

    fn inverse(&self, a: u64) -> Option<u64> {
        Some((self.modulus - a) % self.modulus)
    }

    fn contains(&self, v: &u64) -> bool {
        *v < self.modulus
    }
}

/// Maximum of unsigned values; 0 is the identity.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Max;

impl Semigroup for Max {
    type Value = u64;

    fn combine(&self, a: u64, b: u64) -> u64 {
        a.max(b)
    }

    fn identity(&self) -> Option<u64> {
        Some(0)
    }
}

/// Composition of affine maps `x -> a*x + b (mod M)`, left map applied first.
/// Associative but not commutative.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AffineMod {
    pub modulus: u64,
}

impl Semigroup for AffineMod {
    type Value = (u64, u64);

    fn combine(&self, (fa, fb): (u64, u64), (ga, gb): (u64, u64)) -> (u64, u64) {
        let m = self.modulus as u128;
        let a = (ga as u128 * fa as u128) % m;
        let b = (ga as u128 * fb as u128 + gb as u128) % m;
        (a as u64, b as u64)
    }

    fn identity(&self) -> Option<(u64, u64)> {
        Some((1 % self.modulus, 0))
    }

    fn contains(&self, &(a, b): &(u64, u64)) -> bool {
        a < self.modulus && b < self.modulus
    }
}

/// Keeps the leftmost operand. No identity, so an empty prefix has no value.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct First;

impl Semigroup for First {
    type Value = u64;

    fn combine(&self, a: u64, _b: u64) -> u64 {
        a
    }
}

type Children<V> = Option<(Box<Node<V>>, Box<Node<V>>)>;

#[derive(Debug, Clone)]
struct Node<V> {
    /// Leaf: the array index. Internal: smallest index in the right subtree.
    key: u64,
    /// Leaf: the stored value. Internal: aggregate of the subtree.
    agg: V,
    height: u32,
    children: Children<V>,
}

impl<V: Copy> Node<V> {
    fn leaf(key: u64, value: V) -> Box<Self> {
        Box::new(Self {
            key,
            agg: value,
            height: 0,
            children: None,
        })
    }

    fn leftmost(&self) -> u64 {
        let mut n = self;
        while let Some((l, _)) = &n.children {
            n = l;
        }
        n.key
    }
}

/// Move a node out of its slot, leaving a throwaway leaf behind.
fn take<V: Copy>(slot: &mut Box<Node<V>>) -> Box<Node<V>> {
    let filler = Node::leaf(0, slot.agg);
    std::mem::replace(slot, filler)
}

fn height<V>(n: &Node<V>) -> i64 {
    n.height as i64
}

fn join<S: Semigroup>(op: &S, a: Option<S::Value>, b: Option<S::Value>) -> Option<S::Value> {
    match (a, b) {
        (Some(x), Some(y)) => Some(op.combine(x, y)),
        (x, None) => x,
        (None, y) => y,
    }
}

/// Dynamic prefix-aggregate tree. `R` aggregates on retrieval, `U` folds a
/// delta into a stored value on update.
pub struct BinSet<R: Semigroup, U: Semigroup<Value = R::Value> = R> {
    root: Option<Box<Node<R::Value>>>,
    retrieve_op: R,
    update_op: U,
    len: usize,
    visits: Cell<u64>,
}

impl<R: Semigroup + Clone> BinSet<R, R> {
    /// One operation for both update and retrieval.
    pub fn new(op: R) -> Self {
        Self::with_ops(op.clone(), op)
    }
}

impl<R: Semigroup, U: Semigroup<Value = R::Value>> BinSet<R, U> {
    pub fn with_ops(update_op: U, retrieve_op: R) -> Self {
        Self {
            root: None,
            retrieve_op,
            update_op,
            len: 0,
            visits: Cell::new(0),
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Height of the tree; a single leaf has height 0.
    pub fn height(&self) -> u32 {
        self.root.as_ref().map_or(0, |n| n.height)
    }

    /// Nodes entered by the most recent operation.
    pub fn last_visits(&self) -> u64 {
        self.visits.get()
    }

    fn visit(&self) {
        self.visits.set(self.visits.get() + 1);
    }

    fn check_value(&self, v: &R::Value) -> Result<()> {
        if self.retrieve_op.contains(v) && self.update_op.contains(v) {
            Ok(())
        } else {
            Err(Error::InvalidValue(format!("{v:?}")))
        }
    }

    /// Value stored at `index`, if present.
    pub fn get(&self, index: u64) -> Option<R::Value> {
        self.visits.set(0);
        let mut node = self.root.as_deref()?;
        loop {
            self.visit();
            match &node.children {
                None => return (node.key == index).then_some(node.agg),
                Some((l, r)) => node = if index < node.key { l } else { r },
            }
        }
    }

    pub fn contains(&self, index: u64) -> bool {
        self.get(index).is_some()
    }

    pub fn insert(&mut self, index: u64, value: R::Value) -> Result<()> {
        self.check_value(&value)?;
        self.visits.set(0);
        let result = match &mut self.root.take() {
            None => {
                self.visit();
                self.root = Some(Node::leaf(index, value));
                Ok(())
            }
            Some(root) => {
                let result = self.insert_at(root, index, value);
                self.root = Some(take(root));
                result
            }
        };
        if result.is_ok() {
            self.len += 1;
        }
        result
    }

    fn insert_at(&self, slot: &mut Box<Node<R::Value>>, index: u64, value: R::Value) -> Result<()> {
        self.visit();
        match &mut slot.children {
            None => {
                if slot.key == index {
                    return Err(Error::DuplicateIndex(index));
                }
                let old = take(slot);
                let new = Node::leaf(index, value);
                let (left, right) = if index < old.key {
                    (new, old)
                } else {
                    (old, new)
                };
                let mut parent = Box::new(Node {
                    key: right.key,
                    agg: left.agg,
                    height: 1,
                    children: Some((left, right)),
                });
                self.refresh(&mut parent);
                *slot = parent;
            }
            Some((l, r)) => {
                if index < slot.key {
                    self.insert_at(l, index, value)?;
                } else {
                    self.insert_at(r, index, value)?;
                }
                *slot = self.rebalance(take(slot));
            }
        }
        Ok(())
    }

    pub fn delete(&mut self, index: u64) -> Result<()> {
        self.visits.set(0);
        let mut root = self.root.take().ok_or(Error::MissingIndex(index))?;
        match self.delete_at(&mut root, index) {
            Ok(removed) => {
                if !removed {
                    self.root = Some(root);
                }
                self.len -= 1;
                Ok(())
            }
            Err(e) => {
                self.root = Some(root);
                Err(e)
            }
        }
    }

    /// Returns `true` when `slot` is the leaf to remove; the parent then
    /// replaces itself with the sibling.
    fn delete_at(&self, slot: &mut Box<Node<R::Value>>, index: u64) -> Result<bool> {
        self.visit();
        let go_left = index < slot.key;
        let Some((l, r)) = &mut slot.children else {
            return if slot.key == index {
                Ok(true)
            } else {
                Err(Error::MissingIndex(index))
            };
        };
        let child = if go_left { l } else { r };
        if self.delete_at(child, index)? {
            let (l, r) = slot.children.take().expect("internal node");
            *slot = if go_left { r } else { l };
            return Ok(false);
        }
        if !go_left && slot.key == index {
            let (_, r) = slot.children.as_ref().expect("internal node");
            slot.key = r.leftmost();
        }
        *slot = self.rebalance(take(slot));
        Ok(false)
    }

    /// `A(index) := A(index) ⊕_u delta`.
    pub fn update(&mut self, index: u64, delta: R::Value) -> Result<()> {
        self.check_value(&delta)?;
        self.visits.set(0);
        let mut root = self.root.take().ok_or(Error::MissingIndex(index))?;
        let result = self.update_at(&mut root, index, delta);
        self.root = Some(root);
        result
    }

    fn update_at(&self, node: &mut Node<R::Value>, index: u64, delta: R::Value) -> Result<()> {
        self.visit();
        match &mut node.children {
            None if node.key == index => {
                node.agg = self.update_op.combine(node.agg, delta);
            }
            None => return Err(Error::MissingIndex(index)),
            Some((l, r)) => {
                if index < node.key {
                    self.update_at(l, index, delta)?;
                } else {
                    self.update_at(r, index, delta)?;
                }
                node.agg = self.retrieve_op.combine(l.agg, r.agg);
            }
        }
        Ok(())
    }

    /// Aggregate of all present positions `<= j`. An empty prefix yields the
    /// identity, or `None` when the operation has none.
    pub fn retrieve(&self, j: u64) -> Option<R::Value> {
        self.visits.set(0);
        let acc = self.root.as_deref().and_then(|n| self.prefix(n, j));
        acc.or_else(|| self.retrieve_op.identity())
    }

    /// Aggregate of present positions in `[k, j]`, by direct descent.
    pub fn retrieve_range(&self, k: u64, j: u64) -> Result<Option<R::Value>> {
        if k > j {
            return Err(Error::InvertedRange { k, j });
        }
        self.visits.set(0);
        let mut acc = None;
        let mut node = self.root.as_deref();
        while let Some(n) = node {
            self.visit();
            match &n.children {
                None => {
                    if k <= n.key && n.key <= j {
                        acc = Some(n.agg);
                    }
                    node = None;
                }
                Some((l, r)) => {
                    if j < n.key {
                        node = Some(l);
                    } else if k >= n.key {
                        node = Some(r);
                    } else {
                        let left = self.suffix(l, k);
                        let right = self.prefix(r, j);
                        acc = join(&self.retrieve_op, left, right);
                        node = None;
                    }
                }
            }
        }
        Ok(acc.or_else(|| self.retrieve_op.identity()))
    }

    fn prefix(&self, mut node: &Node<R::Value>, j: u64) -> Option<R::Value> {
        let mut acc = None;
        loop {
            self.visit();
            match &node.children {
                None => {
                    return if node.key <= j {
                        join(&self.retrieve_op, acc, Some(node.agg))
                    } else {
                        acc
                    };
                }
                Some((l, r)) => {
                    if j < node.key {
                        node = l;
                    } else {
                        acc = join(&self.retrieve_op, acc, Some(l.agg));
                        node = r;
                    }
                }
            }
        }
    }

    fn suffix(&self, mut node: &Node<R::Value>, k: u64) -> Option<R::Value> {
        // Aggregates to the right of the path are folded in right-to-left
        // order, so collect them and combine once the leaf is reached.
        let mut right_parts = Vec::new();
        let head = loop {
            self.visit();
            match &node.children {
                None => break (node.key >= k).then_some(node.agg),
                Some((l, r)) => {
                    if k >= node.key {
                        node = r;
                    } else {
                        right_parts.push(r.agg);
                        node = l;
                    }
                }
            }
        };
        right_parts
            .into_iter()
            .rev()
            .fold(head, |acc, v| join(&self.retrieve_op, acc, Some(v)))
    }

    fn refresh(&self, node: &mut Node<R::Value>) {
        if let Some((l, r)) = &node.children {
            node.height = 1 + l.height.max(r.height);
            node.agg = self.retrieve_op.combine(l.agg, r.agg);
        }
    }

    fn rotate_right(&self, mut node: Box<Node<R::Value>>) -> Box<Node<R::Value>> {
        let (mut l, c) = node.children.take().expect("rotation needs children");
        let (a, b) = l.children.take().expect("left child must be internal");
        node.children = Some((b, c));
        self.refresh(&mut node);
        l.children = Some((a, node));
        self.refresh(&mut l);
        l
    }

    fn rotate_left(&self, mut node: Box<Node<R::Value>>) -> Box<Node<R::Value>> {
        let (a, mut r) = node.children.take().expect("rotation needs children");
        let (b, c) = r.children.take().expect("right child must be internal");
        node.children = Some((a, b));
        self.refresh(&mut node);
        r.children = Some((node, c));
        self.refresh(&mut r);
        r
    }

    fn rebalance(&self, mut node: Box<Node<R::Value>>) -> Box<Node<R::Value>> {
        self.refresh(&mut node);
        let Some((l, r)) = node.children.take() else {
            return node;
        };
        let balance = height(&l) - height(&r);
        if balance > 1 {
            let l = match &l.children {
                Some((ll, lr)) if height(ll) < height(lr) => self.rotate_left(l),
                _ => l,
            };
            node.children = Some((l, r));
            self.rotate_right(node)
        } else if balance < -1 {
            let r = match &r.children {
                Some((rl, rr)) if height(rr) < height(rl) => self.rotate_right(r),
                _ => r,
            };
            node.children = Some((l, r));
            self.rotate_left(node)
        } else {
            node.children = Some((l, r));
            node
        }
    }

    /// Present positions and values in index order.
    pub fn entries(&self) -> Vec<(u64, R::Value)> {
        fn walk<V: Copy>(n: &Node<V>, out: &mut Vec<(u64, V)>) {
            match &n.children {
                None => out.push((n.key, n.agg)),
                Some((l, r)) => {
                    walk(l, out);
                    walk(r, out);
                }
            }
        }
        let mut out = Vec::with_capacity(self.len);
        if let Some(root) = &self.root {
            walk(root, &mut out);
        }
        out
    }

    /// Check search order, dividers, heights, AVL balance and aggregates.
    pub fn check_invariants(&self) -> std::result::Result<(), String> {
        // Returns (min index, max index, leaves).
        fn audit<R: Semigroup>(
            op: &R,
            n: &Node<R::Value>,
        ) -> std::result::Result<(u64, u64, usize), String> {
            let Some((l, r)) = &n.children else {
                if n.height != 0 {
                    return Err(format!("leaf {} has height {}", n.key, n.height));
                }
                return Ok((n.key, n.key, 1));
            };
            let (lmin, lmax, lc) = audit(op, l)?;
            let (rmin, rmax, rc) = audit(op, r)?;
            if lmax >= rmin {
                return Err(format!("order violated at divider {}", n.key));
            }
            if n.key != rmin {
                return Err(format!("divider {} but right minimum {rmin}", n.key));
            }
            if n.height != 1 + l.height.max(r.height) {
                return Err(format!("stale height at divider {}", n.key));
            }
            if (l.height as i64 - r.height as i64).abs() > 1 {
                return Err(format!("unbalanced at divider {}", n.key));
            }
            if n.agg != op.combine(l.agg, r.agg) {
                return Err(format!("stale aggregate at divider {}", n.key));
            }
            Ok((lmin, rmax, lc + rc))
        }
        match &self.root {
            None if self.len == 0 => Ok(()),
            None => Err(format!("empty tree but len {}", self.len)),
            Some(root) => {
                let (_, _, leaves) = audit(&self.retrieve_op, root)?;
                if leaves != self.len {
                    return Err(format!("{leaves} leaves but len {}", self.len));
                }
                Ok(())
            }
        }
    }
}

impl<R: Semigroup, U: Semigroup<Value = R::Value>> fmt::Debug for BinSet<R, U> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BinSet")
            .field("len", &self.len)
            .field("height", &self.height())
            .field("entries", &self.entries())
            .finish()
    }
}
