//! Seeded operation streams and the one-op-per-line script grammar.
//!
//! ```text
//! update <j> <delta>
//! retrieve <j>
//! insert <j> <value>
//! delete <j>
//! range <k> <j>
//! ```

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Op {
    Update { index: u64, delta: u64 },
    Retrieve { index: u64 },
    Insert { index: u64, value: u64 },
    Delete { index: u64 },
    Range { from: u64, to: u64 },
}

impl fmt::Display for Op {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Op::Update { index, delta } => write!(f, "update {index} {delta}"),
            Op::Retrieve { index } => write!(f, "retrieve {index}"),
            Op::Insert { index, value } => write!(f, "insert {index} {value}"),
            Op::Delete { index } => write!(f, "delete {index}"),
            Op::Range { from, to } => write!(f, "range {from} {to}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseOpError(pub String);

impl fmt::Display for ParseOpError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ParseOpError {}

impl FromStr for Op {
    type Err = ParseOpError;

    fn from_str(line: &str) -> Result<Self, Self::Err> {
        let mut words = line.split_whitespace();
        let verb = words
            .next()
            .ok_or_else(|| ParseOpError("empty line".into()))?;
        let args = words
            .map(|w| {
                w.parse::<u64>()
                    .map_err(|_| ParseOpError(format!("not a decimal integer: {w:?}")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let arity = |n: usize| {
            if args.len() == n {
                Ok(())
            } else {
                Err(ParseOpError(format!(
                    "{verb} takes {n} argument(s), got {}",
                    args.len()
                )))
            }
        };
        match verb {
            "update" => arity(2).map(|_| Op::Update {
                index: args[0],
                delta: args[1],
            }),
            "retrieve" => arity(1).map(|_| Op::Retrieve { index: args[0] }),
            "insert" => arity(2).map(|_| Op::Insert {
                index: args[0],
                value: args[1],
            }),
            "delete" => arity(1).map(|_| Op::Delete { index: args[0] }),
            "range" => arity(2).map(|_| Op::Range {
                from: args[0],
                to: args[1],
            }),
            other => Err(ParseOpError(format!("unknown operation {other:?}"))),
        }
    }
}

/// Parse a script into `(line number, op)` pairs, 1-based. Blank lines and
/// lines starting with `#` are skipped. Errors carry the line number.
pub fn parse_script(text: &str) -> Result<Vec<(usize, Op)>, (usize, ParseOpError)> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| {
            let t = l.trim();
            !t.is_empty() && !t.starts_with('#')
        })
        .map(|(i, l)| l.parse().map(|op| (i + 1, op)).map_err(|e| (i + 1, e)))
        .collect()
}

/// Deterministic generator for a given seed.
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Point updates and prefix retrieves with indices uniform in `[0, len)`
/// and deltas uniform in `[0, modulus)`. `update_ratio` is the probability
/// of an update.
pub fn static_ops(seed: u64, len: u64, modulus: u64, count: usize, update_ratio: f64) -> Vec<Op> {
    let mut rng = rng(seed);
    (0..count)
        .map(|_| {
            let index = rng.random_range(0..len);
            if rng.random_bool(update_ratio.clamp(0.0, 1.0)) {
                Op::Update {
                    index,
                    delta: rng.random_range(0..modulus),
                }
            } else {
                Op::Retrieve { index }
            }
        })
        .collect()
}

/// All five kinds, uniformly, over positions in `[0, universe)`. Some ops
/// will be invalid against the current set (duplicate inserts, missing
/// deletes); structures are expected to reject exactly those.
pub fn dynamic_ops(seed: u64, universe: u64, modulus: u64, count: usize) -> Vec<Op> {
    let mut rng = rng(seed);
    (0..count)
        .map(|_| {
            let index = rng.random_range(0..universe);
            match rng.random_range(0..5) {
                0 => Op::Insert {
                    index,
                    value: rng.random_range(0..modulus),
                },
                1 => Op::Delete { index },
                2 => Op::Update {
                    index,
                    delta: rng.random_range(0..modulus),
                },
                3 => Op::Retrieve { index },
                _ => {
                    let other = rng.random_range(0..universe);
                    Op::Range {
                        from: index.min(other),
                        to: index.max(other),
                    }
                }
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_all_verbs() {
        let ops =
            parse_script("update 0 3\nretrieve 2\n\n# note\ninsert 5 2\ndelete 5\nrange 1 9\n")
                .unwrap();
        assert_eq!(
            ops.iter().map(|(n, _)| *n).collect::<Vec<_>>(),
            vec![1, 2, 5, 6, 7]
        );
        let ops: Vec<Op> = ops.into_iter().map(|(_, op)| op).collect();
        assert_eq!(
            ops,
            vec![
                Op::Update { index: 0, delta: 3 },
                Op::Retrieve { index: 2 },
                Op::Insert { index: 5, value: 2 },
                Op::Delete { index: 5 },
                Op::Range { from: 1, to: 9 },
            ]
        );
        for op in ops {
            assert_eq!(op.to_string().parse::<Op>().unwrap(), op);
        }
    }

    #[test]
    fn parse_errors_have_line_numbers() {
        assert_eq!(parse_script("retrieve 1\nupdate 1").unwrap_err().0, 2);
        assert_eq!(parse_script("frob 1").unwrap_err().0, 1);
        assert_eq!(parse_script("\n\nretrieve -1").unwrap_err().0, 3);
        assert!(parse_script("").unwrap().is_empty());
    }

    #[test]
    fn generators_are_deterministic() {
        assert_eq!(
            static_ops(9, 64, 7, 100, 0.5),
            static_ops(9, 64, 7, 100, 0.5)
        );
        assert_ne!(
            static_ops(9, 64, 7, 100, 0.5),
            static_ops(10, 64, 7, 100, 0.5)
        );
        assert_eq!(dynamic_ops(3, 50, 7, 100), dynamic_ops(3, 50, 7, 100));
        for op in static_ops(1, 10, 3, 500, 0.5) {
            match op {
                Op::Update { index, delta } => assert!(index < 10 && delta < 3),
                Op::Retrieve { index } => assert!(index < 10),
                _ => panic!("unexpected {op}"),
            }
        }
    }
}
