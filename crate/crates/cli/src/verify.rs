//! `verify`: drive a structure with a seeded workload and run every
//! applicable invariant suite. Each suite records the first counterexample
//! as `seed <s> op <i>: <detail>`.

use std::collections::BTreeMap;
use std::io::{self, Write};

use rand::Rng;
use serde::Serialize;
use yggsum::wordpar::{lane_add_mod, LaneGeometry};
use yggsum::workload::{dynamic_ops, rng, static_ops, Op};
use yggsum::{AddMod, BinSet, FenwickTree, NmTree, Oracle, Semigroup, TreeParams};

use crate::{csv_field, Format, RunConfig, Status, Structure};

#[derive(Debug, Clone, Serialize)]
pub struct SuiteResult {
    pub suite: &'static str,
    pub passed: bool,
    pub checks: u64,
    pub counterexample: Option<String>,
}

struct Suite {
    name: &'static str,
    seed: u64,
    checks: u64,
    failure: Option<String>,
}

impl Suite {
    fn new(name: &'static str, seed: u64) -> Self {
        Self {
            name,
            seed,
            checks: 0,
            failure: None,
        }
    }

    /// Record one check; keeps only the first failure.
    fn check(&mut self, ok: bool, op_index: usize, detail: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok && self.failure.is_none() {
            self.failure = Some(format!("seed {} op {}: {}", self.seed, op_index, detail()));
        }
    }

    fn finish(self) -> SuiteResult {
        SuiteResult {
            suite: self.name,
            passed: self.failure.is_none(),
            checks: self.checks,
            counterexample: self.failure,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub structure: Structure,
    #[serde(rename = "N")]
    pub len: u64,
    #[serde(rename = "M")]
    pub modulus: u64,
    pub iota: Option<u32>,
    pub seed: u64,
    pub ops: usize,
    pub construction_error: Option<String>,
    pub suites: Vec<SuiteResult>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.construction_error.is_none() && self.suites.iter().all(|s| s.passed)
    }

    pub fn status(&self) -> Status {
        if self.construction_error.is_some() {
            Status::Usage
        } else if self.passed() {
            Status::Pass
        } else {
            Status::Mismatch
        }
    }

    pub fn write(&self, format: Format, out: &mut impl Write) -> io::Result<()> {
        match format {
            Format::Json => {
                serde_json::to_writer_pretty(&mut *out, self)?;
                writeln!(out)
            }
            Format::Csv => {
                writeln!(out, "suite,status,checks,counterexample")?;
                if let Some(e) = &self.construction_error {
                    writeln!(out, "construction,error,0,{}", csv_field(e))?;
                }
                for s in &self.suites {
                    writeln!(
                        out,
                        "{},{},{},{}",
                        s.suite,
                        if s.passed { "pass" } else { "fail" },
                        s.checks,
                        csv_field(s.counterexample.as_deref().unwrap_or(""))
                    )?;
                }
                Ok(())
            }
        }
    }
}

pub fn run(cfg: &RunConfig, out: &mut impl Write) -> io::Result<Status> {
    let report = build_report(cfg);
    report.write(cfg.format, out)?;
    Ok(report.status())
}

pub fn build_report(cfg: &RunConfig) -> Report {
    let mut report = Report {
        structure: cfg.structure,
        len: cfg.len,
        modulus: cfg.modulus,
        iota: cfg.iota,
        seed: cfg.seed,
        ops: cfg.ops,
        construction_error: None,
        suites: Vec::new(),
    };
    let outcome = match cfg.structure {
        Structure::Nmtree => verify_nmtree(cfg),
        Structure::Fenwick => verify_fenwick(cfg),
        Structure::Oracle => verify_oracle(cfg),
        Structure::Binset => verify_binset(cfg),
    };
    match outcome {
        Ok(suites) => report.suites = suites,
        Err(e) => report.construction_error = Some(e),
    }
    report
}

fn params(cfg: &RunConfig, iota: Option<u32>) -> TreeParams {
    let mut p = TreeParams::new(cfg.len, cfg.modulus).table_cap(cfg.table_cap);
    p.iota = iota;
    p
}

fn add_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 + b as u128) % m as u128) as u64
}

fn verify_nmtree(cfg: &RunConfig) -> Result<Vec<SuiteResult>, String> {
    let mut tree = NmTree::new(params(cfg, cfg.iota)).map_err(|e| e.to_string())?;
    if cfg.ops == 0 {
        return Ok(Vec::new());
    }
    let mut node_tree = NmTree::new(params(cfg, cfg.iota)).map_err(|e| e.to_string())?;
    let mut variants: Vec<NmTree> = (0..=tree.max_iota())
        .filter(|&i| i != tree.iota())
        .filter_map(|i| NmTree::new(params(cfg, Some(i))).ok())
        .collect();
    let capacity = tree.capacity();
    let mut oracle = Oracle::new(capacity as usize, cfg.modulus).map_err(|e| e.to_string())?;

    let seed = cfg.seed;
    let mut equivalence = Suite::new("oracle-equivalence", seed);
    let mut partial = Suite::new("partial-sum", seed);
    let mut variant = Suite::new("variant-agreement", seed);
    let mut cost = Suite::new("model-cost", seed);
    let mut semantic = Suite::new("semantic-invariant", seed);

    let ops = static_ops(seed, cfg.len, cfg.modulus, cfg.ops, cfg.update_ratio);
    let last = ops.len() - 1;
    for (i, op) in ops.into_iter().enumerate() {
        tree.memory().reset_counters();
        match op {
            Op::Update { index, delta } => {
                tree.update(index, delta).map_err(|e| e.to_string())?;
                let c = tree.memory().counters();
                let want = if index == capacity - 1 {
                    (0, 0)
                } else {
                    (1, 1)
                };
                cost.check((c.register_reads, c.register_writes) == want, i, || {
                    format!(
                        "{op}: {} reads, {} writes",
                        c.register_reads, c.register_writes
                    )
                });
                node_tree
                    .update_logn(index, delta)
                    .map_err(|e| e.to_string())?;
                for t in &mut variants {
                    t.update(index, delta).map_err(|e| e.to_string())?;
                }
                oracle.update(index, delta).map_err(|e| e.to_string())?;
                variant.check(
                    tree.memory().backing() == node_tree.memory().backing()
                        && tree.vn1() == node_tree.vn1(),
                    i,
                    || format!("{op}: backing stores differ"),
                );
            }
            Op::Retrieve { index } => {
                let got = tree.retrieve(index).map_err(|e| e.to_string())?;
                let c = tree.memory().counters();
                cost.check((c.register_reads, c.register_writes) == (1, 0), i, || {
                    format!(
                        "{op}: {} reads, {} writes",
                        c.register_reads, c.register_writes
                    )
                });
                let want = oracle.retrieve(index).map_err(|e| e.to_string())?;
                equivalence.check(got == want, i, || format!("{op}: {got} != {want}"));

                let logn = node_tree.retrieve_logn(index).map_err(|e| e.to_string())?;
                variant.check(logn == got, i, || format!("{op}: logn {logn} != {got}"));
                for t in &variants {
                    let v = t.retrieve(index).map_err(|e| e.to_string())?;
                    variant.check(v == got, i, || {
                        format!("{op}: iota {} gives {v} != {got}", t.iota())
                    });
                }

                let k = index / 2;
                let ps = tree.partial_sum(k, index).map_err(|e| e.to_string())?;
                let want = oracle.range(k, index).map_err(|e| e.to_string())?;
                partial.check(ps == want, i, || {
                    format!("partial_sum({k}, {index}): {ps} != {want}")
                });
            }
            _ => unreachable!("static workloads hold only updates and retrieves"),
        }
        if capacity <= 64 || i == last {
            audit_left_sums(&tree, &oracle, &mut semantic, i);
        }
    }

    let mut space = Suite::new("space", seed);
    let m = tree.geometry().width() as u64;
    let bits = tree.memory().backing_bits() as u64;
    space.check(bits == (capacity - 1) * m, last, || {
        format!("backing {bits} bits, want {}", (capacity - 1) * m)
    });
    let mut table = Suite::new("sum-table", seed);
    if let Some(t) = tree.table() {
        let g = *t.geometry();
        let width = g.lanes() as u64 * m;
        space.check(t.len() as u64 == 1u64 << width, last, || {
            format!("table has {} entries, want 2^{width}", t.len())
        });
        for (v, &entry) in t.entries().iter().enumerate() {
            let want = (0..g.lanes()).fold(0, |acc, l| {
                add_mod(
                    acc,
                    ((v as u64) >> (l * g.width())) & g.lane_ones(),
                    g.modulus(),
                )
            });
            table.check(entry == want, last, || {
                format!("entry {v}: {entry} != {want}")
            });
        }
    }

    let lanes = lane_suite(tree.geometry(), seed, cfg.ops);

    Ok(vec![
        equivalence.finish(),
        partial.finish(),
        variant.finish(),
        cost.finish(),
        semantic.finish(),
        space.finish(),
        table.finish(),
        lanes,
    ])
}

/// Node `i` must hold the oracle's sum over its left subtree.
fn audit_left_sums(tree: &NmTree, oracle: &Oracle, suite: &mut Suite, op_index: usize) {
    let capacity = tree.capacity();
    for (k, v) in tree.memory().snapshot().into_iter().enumerate() {
        let i = k as u64 + 1;
        let level = 63 - i.leading_zeros();
        let span = capacity >> level;
        let first = (i - (1 << level)) * span;
        let want = oracle
            .range(first, first + span / 2 - 1)
            .unwrap_or(u64::MAX);
        suite.check(v == want, op_index, || {
            format!("node {i} holds {v}, left subtree sums to {want}")
        });
    }
    let last = oracle.values()[capacity as usize - 1];
    suite.check(tree.vn1() == last, op_index, || {
        format!("vn1 {} != {last}", tree.vn1())
    });
}

/// Random reduced words on the tree's own geometry: scalar agreement and
/// lane independence of `lane_add_mod`.
fn lane_suite(g: &LaneGeometry, seed: u64, trials: usize) -> SuiteResult {
    fn word(g: &LaneGeometry, r: &mut impl Rng) -> Vec<u64> {
        (0..g.lanes())
            .map(|_| r.random_range(0..g.modulus()))
            .collect()
    }
    let mut suite = Suite::new("lane-arithmetic", seed);
    let mut r = rng(seed ^ 0x5eed);
    for i in 0..trials {
        let (a, b) = (word(g, &mut r), word(g, &mut r));
        let sum = lane_add_mod(g.pack(&a).unwrap(), g.pack(&b).unwrap(), g);
        let l = r.random_range(0..g.lanes());
        let (mut a2, mut b2) = (word(g, &mut r), word(g, &mut r));
        a2[l as usize] = a[l as usize];
        b2[l as usize] = b[l as usize];
        let other = lane_add_mod(g.pack(&a2).unwrap(), g.pack(&b2).unwrap(), g);
        let want = add_mod(a[l as usize], b[l as usize], g.modulus());
        suite.check(
            g.lane(sum, l) == want && g.lane(other, l) == want,
            i,
            || format!("lane {l}: {a:?} + {b:?}"),
        );
    }
    suite.finish()
}

fn verify_fenwick(cfg: &RunConfig) -> Result<Vec<SuiteResult>, String> {
    let mut f = FenwickTree::new(cfg.len as usize, cfg.modulus).map_err(|e| e.to_string())?;
    let mut o = Oracle::new(cfg.len as usize, cfg.modulus).map_err(|e| e.to_string())?;
    if cfg.ops == 0 {
        return Ok(Vec::new());
    }
    let mut suite = Suite::new("oracle-equivalence", cfg.seed);
    for (i, op) in static_ops(cfg.seed, cfg.len, cfg.modulus, cfg.ops, cfg.update_ratio)
        .into_iter()
        .enumerate()
    {
        match op {
            Op::Update { index, delta } => {
                f.update(index, delta).map_err(|e| e.to_string())?;
                o.update(index, delta).map_err(|e| e.to_string())?;
            }
            Op::Retrieve { index } => {
                let got = f.retrieve(index).map_err(|e| e.to_string())?;
                let want = o.retrieve(index).map_err(|e| e.to_string())?;
                suite.check(got == want, i, || format!("{op}: {got} != {want}"));
            }
            _ => unreachable!(),
        }
    }
    Ok(vec![suite.finish()])
}

fn verify_oracle(cfg: &RunConfig) -> Result<Vec<SuiteResult>, String> {
    let mut o = Oracle::new(cfg.len as usize, cfg.modulus).map_err(|e| e.to_string())?;
    if cfg.ops == 0 {
        return Ok(Vec::new());
    }
    let mut shadow = vec![0u128; cfg.len as usize];
    let mut suite = Suite::new("definition", cfg.seed);
    for (i, op) in static_ops(cfg.seed, cfg.len, cfg.modulus, cfg.ops, cfg.update_ratio)
        .into_iter()
        .enumerate()
    {
        match op {
            Op::Update { index, delta } => {
                o.update(index, delta).map_err(|e| e.to_string())?;
                shadow[index as usize] += delta as u128;
            }
            Op::Retrieve { index } => {
                let got = o.retrieve(index).map_err(|e| e.to_string())?;
                let want =
                    (shadow[..=index as usize].iter().sum::<u128>() % cfg.modulus as u128) as u64;
                suite.check(got == want, i, || format!("{op}: {got} != {want}"));
            }
            _ => unreachable!(),
        }
    }
    Ok(vec![suite.finish()])
}

fn verify_binset(cfg: &RunConfig) -> Result<Vec<SuiteResult>, String> {
    if cfg.modulus < 2 {
        return Err(format!("modulus {} below 2", cfg.modulus));
    }
    if cfg.len == 0 {
        return Err("position universe must be non-empty".into());
    }
    if cfg.ops == 0 {
        return Ok(Vec::new());
    }
    let op = AddMod {
        modulus: cfg.modulus,
    };
    let mut tree = BinSet::new(op);
    let mut model: BTreeMap<u64, u64> = BTreeMap::new();
    let range_sum = |m: &BTreeMap<u64, u64>, k: u64, j: u64| {
        m.range(k..=j).fold(0, |acc, (_, &v)| op.combine(acc, v))
    };

    let mut equivalence = Suite::new("oracle-equivalence", cfg.seed);
    let mut audit = Suite::new("balance-and-aggregates", cfg.seed);
    let mut visits = Suite::new("visit-bound", cfg.seed);

    for (i, o) in dynamic_ops(cfg.seed, cfg.len, cfg.modulus, cfg.ops)
        .into_iter()
        .enumerate()
    {
        let size = tree.len();
        let mutated = match o {
            Op::Insert { index, value } => {
                let got = tree.insert(index, value).is_ok();
                let want = !model.contains_key(&index);
                if want {
                    model.insert(index, value);
                }
                equivalence.check(got == want, i, || {
                    format!("{o}: accepted {got}, expected {want}")
                });
                true
            }
            Op::Delete { index } => {
                let got = tree.delete(index).is_ok();
                let want = model.remove(&index).is_some();
                equivalence.check(got == want, i, || {
                    format!("{o}: accepted {got}, expected {want}")
                });
                true
            }
            Op::Update { index, delta } => {
                let got = tree.update(index, delta).is_ok();
                let want = match model.get_mut(&index) {
                    Some(v) => {
                        *v = op.combine(*v, delta);
                        true
                    }
                    None => false,
                };
                equivalence.check(got == want, i, || {
                    format!("{o}: accepted {got}, expected {want}")
                });
                true
            }
            Op::Retrieve { index } => {
                let got = tree.retrieve(index);
                let want = Some(range_sum(&model, 0, index));
                equivalence.check(got == want, i, || format!("{o}: {got:?} != {want:?}"));
                false
            }
            Op::Range { from, to } => {
                let got = tree.retrieve_range(from, to).ok().flatten();
                let want = Some(range_sum(&model, from, to));
                equivalence.check(got == want, i, || format!("{o}: {got:?} != {want:?}"));
                false
            }
        };
        if mutated {
            let res = tree.check_invariants();
            audit.check(res.is_ok(), i, || format!("{o}: {}", res.unwrap_err()));
        }
        let seen = tree.last_visits();
        let bound = 3.0 * ((size + 2) as f64).log2();
        visits.check(seen as f64 <= bound, i, || {
            format!("{o}: {seen} nodes visited at size {size}, bound {bound:.1}")
        });
    }
    Ok(vec![equivalence.finish(), audit.finish(), visits.finish()])
}
