//! `bench`: mean wall-clock and worst-case model cost per operation type.
//!
//! Model cost is counted in the structure's own unit: RAMBO registers for
//! nmtree, array cells for fenwick and oracle, nodes entered for binset.

use std::io::{self, Write};
use std::time::Instant;

use serde::Serialize;
use yggsum::workload::{static_ops, Op};
use yggsum::{AddMod, BinSet, FenwickTree, NmTree, Oracle, TreeParams};

use crate::{csv_field, BenchConfig, Format, Status, Structure};

#[derive(Debug, Clone, Serialize)]
pub struct Row {
    pub structure: Structure,
    #[serde(rename = "N")]
    pub len: u64,
    #[serde(rename = "M")]
    pub modulus: u64,
    pub iota: Option<u32>,
    pub op: &'static str,
    pub model_reads: u64,
    pub model_writes: u64,
    pub ns_per_op: Option<f64>,
}

#[derive(Default)]
struct Tally {
    count: u64,
    reads: u64,
    writes: u64,
    nanos: u128,
}

impl Tally {
    fn add(&mut self, reads: u64, writes: u64, nanos: u128) {
        self.count += 1;
        self.reads = self.reads.max(reads);
        self.writes = self.writes.max(writes);
        self.nanos += nanos;
    }
}

/// Anything the bench loop can drive.
trait Subject {
    fn update(&mut self, j: u64, delta: u64) -> yggsum::Result<()>;
    fn retrieve(&mut self, j: u64) -> yggsum::Result<u64>;
    /// Reads and writes since the last call.
    fn take_cost(&mut self, op: Op) -> (u64, u64);
}

impl Subject for NmTree {
    fn update(&mut self, j: u64, delta: u64) -> yggsum::Result<()> {
        NmTree::update(self, j, delta)
    }
    fn retrieve(&mut self, j: u64) -> yggsum::Result<u64> {
        NmTree::retrieve(self, j)
    }
    fn take_cost(&mut self, _: Op) -> (u64, u64) {
        let c = self.memory().counters();
        self.memory().reset_counters();
        (c.register_reads, c.register_writes)
    }
}

impl Subject for FenwickTree {
    fn update(&mut self, j: u64, delta: u64) -> yggsum::Result<()> {
        FenwickTree::update(self, j, delta)
    }
    fn retrieve(&mut self, j: u64) -> yggsum::Result<u64> {
        FenwickTree::retrieve(self, j)
    }
    fn take_cost(&mut self, _: Op) -> (u64, u64) {
        let c = self.accesses();
        self.reset_accesses();
        c
    }
}

impl Subject for Oracle {
    fn update(&mut self, j: u64, delta: u64) -> yggsum::Result<()> {
        Oracle::update(self, j, delta)
    }
    fn retrieve(&mut self, j: u64) -> yggsum::Result<u64> {
        Oracle::retrieve(self, j)
    }
    fn take_cost(&mut self, op: Op) -> (u64, u64) {
        match op {
            Op::Retrieve { index } => (index + 1, 0),
            _ => (1, 1),
        }
    }
}

impl Subject for BinSet<AddMod> {
    fn update(&mut self, j: u64, delta: u64) -> yggsum::Result<()> {
        BinSet::update(self, j, delta)
    }
    fn retrieve(&mut self, j: u64) -> yggsum::Result<u64> {
        Ok(BinSet::retrieve(self, j).unwrap_or(0))
    }
    fn take_cost(&mut self, _: Op) -> (u64, u64) {
        (self.last_visits(), 0)
    }
}

fn measure(subject: &mut impl Subject, ops: &[Op], timing: bool) -> yggsum::Result<[Tally; 2]> {
    let mut tallies = [Tally::default(), Tally::default()];
    subject.take_cost(Op::Update { index: 0, delta: 0 });
    for &op in ops {
        let start = timing.then(Instant::now);
        let slot = match op {
            Op::Update { index, delta } => {
                subject.update(index, delta)?;
                0
            }
            Op::Retrieve { index } => {
                std::hint::black_box(subject.retrieve(index)?);
                1
            }
            _ => unreachable!("static workloads hold only updates and retrieves"),
        };
        let nanos = start.map_or(0, |s| s.elapsed().as_nanos());
        let (r, w) = subject.take_cost(op);
        tallies[slot].add(r, w, nanos);
    }
    Ok(tallies)
}

/// Measure every configuration of `cfg.structure` at length `len`.
fn measure_all(
    cfg: &BenchConfig,
    len: u64,
    ops: &[Op],
) -> yggsum::Result<Vec<(Option<u32>, [Tally; 2])>> {
    let (modulus, timing) = (cfg.modulus, !cfg.no_timing);
    let mut out = Vec::new();
    match cfg.structure {
        Structure::Nmtree => {
            let base = TreeParams::new(len, modulus).table_cap(cfg.table_cap);
            let iotas: Vec<u32> = match cfg.iota {
                Some(i) => vec![i],
                None => (0..=NmTree::new(base)?.max_iota()).collect(),
            };
            for iota in iotas {
                match NmTree::new(base.iota(iota)) {
                    Ok(mut t) => out.push((Some(iota), measure(&mut t, ops, timing)?)),
                    // A sweep skips tables over the cap; an explicit iota must construct.
                    Err(e) if cfg.iota.is_some() => return Err(e),
                    Err(_) => {}
                }
            }
        }
        Structure::Fenwick => {
            let mut f = FenwickTree::new(len as usize, modulus)?;
            out.push((None, measure(&mut f, ops, timing)?));
        }
        Structure::Oracle => {
            let mut o = Oracle::new(len as usize, modulus)?;
            out.push((None, measure(&mut o, ops, timing)?));
        }
        Structure::Binset => {
            // Validates len and modulus the same way as the array structures.
            Oracle::new(len as usize, modulus)?;
            let mut b = BinSet::new(AddMod { modulus });
            for j in 0..len {
                b.insert(j, 0)?;
            }
            out.push((None, measure(&mut b, ops, timing)?));
        }
    }
    Ok(out)
}

pub fn rows(cfg: &BenchConfig) -> yggsum::Result<Vec<Row>> {
    let mut rows = Vec::new();
    for &len in &cfg.lens {
        let ops = static_ops(
            cfg.seed ^ len,
            len.max(1),
            cfg.modulus.max(1),
            cfg.ops,
            cfg.update_ratio,
        );
        for (iota, tallies) in measure_all(cfg, len, &ops)? {
            for (name, t) in ["update", "retrieve"].into_iter().zip(tallies) {
                if t.count == 0 {
                    continue;
                }
                rows.push(Row {
                    structure: cfg.structure,
                    len,
                    modulus: cfg.modulus,
                    iota,
                    op: name,
                    model_reads: t.reads,
                    model_writes: t.writes,
                    ns_per_op: (!cfg.no_timing).then(|| t.nanos as f64 / t.count as f64),
                });
            }
        }
    }
    Ok(rows)
}

pub fn run(cfg: &BenchConfig, out: &mut impl Write) -> io::Result<Status> {
    let rows = match rows(cfg) {
        Ok(rows) => rows,
        Err(e) => {
            eprintln!("error: {e}");
            return Ok(Status::Usage);
        }
    };
    match cfg.format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut *out, &rows)?;
            writeln!(out)?;
        }
        Format::Csv => {
            writeln!(
                out,
                "structure,N,M,iota,op,model_reads,model_writes,ns_per_op"
            )?;
            for r in &rows {
                writeln!(
                    out,
                    "{},{},{},{},{},{},{},{}",
                    r.structure.name(),
                    r.len,
                    r.modulus,
                    r.iota.map_or(String::new(), |i| i.to_string()),
                    csv_field(r.op),
                    r.model_reads,
                    r.model_writes,
                    r.ns_per_op.map_or(String::new(), |n| format!("{n:.1}"))
                )?;
            }
        }
    }
    Ok(Status::Pass)
}
