//! `trace`: replay a script, dumping the structure before the first op and
//! after every op.
//!
//! ```text
//! > update 0 3
//! = ok
//! 4 8 1 0
//! nu[1] = 3
//! ...
//! ```

use std::io::{self, Write};

use yggsum::workload::{parse_script, Op};
use yggsum::{AddMod, BinSet, FenwickTree, NmTree, Oracle, TreeParams};

use crate::{Status, Structure, TraceConfig};

enum Target {
    Nm(NmTree),
    Fenwick(FenwickTree),
    Oracle(Oracle),
    Bin(BinSet<AddMod>),
}

impl Target {
    fn build(cfg: &TraceConfig) -> yggsum::Result<Self> {
        Ok(match cfg.structure {
            Structure::Nmtree => {
                let mut p = TreeParams::new(cfg.len, cfg.modulus).table_cap(cfg.table_cap);
                p.iota = cfg.iota;
                Target::Nm(NmTree::new(p)?)
            }
            Structure::Fenwick => Target::Fenwick(FenwickTree::new(cfg.len as usize, cfg.modulus)?),
            Structure::Oracle => Target::Oracle(Oracle::new(cfg.len as usize, cfg.modulus)?),
            Structure::Binset => {
                if cfg.modulus < 2 {
                    return Err(yggsum::Error::InvalidValue(format!(
                        "modulus {} below 2",
                        cfg.modulus
                    )));
                }
                Target::Bin(BinSet::new(AddMod {
                    modulus: cfg.modulus,
                }))
            }
        })
    }

    fn dump(&self) -> String {
        let cells = |name: &str, vals: &[u64]| {
            vals.iter()
                .enumerate()
                .map(|(i, v)| format!("{name}[{i}] = {v}\n"))
                .collect::<String>()
        };
        match self {
            Target::Nm(t) => t.dump(),
            Target::Fenwick(f) => {
                format!("{} {}\n{}", f.len(), f.modulus(), cells("F", f.entries()))
            }
            Target::Oracle(o) => format!("{} {}\n{}", o.len(), o.modulus(), cells("a", o.values())),
            Target::Bin(b) => {
                let mut s = format!("{} {}\n", b.len(), b.height());
                for (i, v) in b.entries() {
                    s.push_str(&format!("a[{i}] = {v}\n"));
                }
                s
            }
        }
    }

    /// Apply one op; `Some(value)` for queries.
    fn apply(&mut self, op: Op) -> Result<Option<u64>, String> {
        let e = |e: yggsum::Error| e.to_string();
        match (self, op) {
            (Target::Nm(t), Op::Update { index, delta }) => {
                t.update(index, delta).map(|_| None).map_err(e)
            }
            (Target::Nm(t), Op::Retrieve { index }) => t.retrieve(index).map(Some).map_err(e),
            (Target::Nm(t), Op::Range { from, to }) => t.partial_sum(from, to).map(Some).map_err(e),
            (Target::Fenwick(f), Op::Update { index, delta }) => {
                f.update(index, delta).map(|_| None).map_err(e)
            }
            (Target::Fenwick(f), Op::Retrieve { index }) => f.retrieve(index).map(Some).map_err(e),
            (Target::Oracle(o), Op::Update { index, delta }) => {
                o.update(index, delta).map(|_| None).map_err(e)
            }
            (Target::Oracle(o), Op::Retrieve { index }) => o.retrieve(index).map(Some).map_err(e),
            (Target::Oracle(o), Op::Range { from, to }) => o.range(from, to).map(Some).map_err(e),
            (Target::Bin(b), Op::Insert { index, value }) => {
                b.insert(index, value).map(|_| None).map_err(e)
            }
            (Target::Bin(b), Op::Delete { index }) => b.delete(index).map(|_| None).map_err(e),
            (Target::Bin(b), Op::Update { index, delta }) => {
                b.update(index, delta).map(|_| None).map_err(e)
            }
            (Target::Bin(b), Op::Retrieve { index }) => Ok(Some(b.retrieve(index).unwrap_or(0))),
            (Target::Bin(b), Op::Range { from, to }) => b
                .retrieve_range(from, to)
                .map(|v| Some(v.unwrap_or(0)))
                .map_err(e),
            (_, op) => Err(format!("{op:?} is not supported by this structure")),
        }
    }
}

pub fn run(cfg: &TraceConfig, script: &str, out: &mut impl Write) -> io::Result<Status> {
    let ops = match parse_script(script) {
        Ok(ops) => ops,
        Err((line, e)) => {
            eprintln!("error: script line {line}: {e}");
            return Ok(Status::Usage);
        }
    };
    let mut target = match Target::build(cfg) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {e}");
            return Ok(Status::Usage);
        }
    };
    write!(out, "{}", target.dump())?;
    for (line, op) in ops {
        writeln!(out, "> {op}")?;
        match target.apply(op) {
            Ok(Some(v)) => writeln!(out, "= {v}")?,
            Ok(None) => writeln!(out, "= ok")?,
            Err(e) => {
                writeln!(out, "! {e}")?;
                eprintln!("error: script line {line}: {e}");
                return Ok(Status::Usage);
            }
        }
        write!(out, "{}", target.dump())?;
    }
    Ok(Status::Pass)
}
