//! Multiplication-table files: first line the order `m`, then `m` rows of
//! `m` whitespace-separated ids; row `g`, column `h` holds `g * h`.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

const EXHAUSTIVE_ASSOCIATIVITY: usize = 200;
const SAMPLED_TRIPLES: usize = 200_000;

pub(crate) fn parse_table(path: &Path, text: &str) -> Result<(usize, Vec<u32>)> {
    let bad = |reason: String| Error::MalformedTable {
        path: path.to_path_buf(),
        reason,
    };
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let order: usize = lines
        .next()
        .ok_or_else(|| bad("empty file".into()))?
        .trim()
        .parse()
        .map_err(|_| bad("first line must be the order".into()))?;
    if order == 0 {
        return Err(bad("order must be positive".into()));
    }
    let mut table = Vec::with_capacity(order * order);
    for row in 0..order {
        let line = lines
            .next()
            .ok_or_else(|| bad(format!("missing row {row}")))?;
        let before = table.len();
        for tok in line.split_whitespace() {
            let v: usize = tok
                .parse()
                .map_err(|_| bad(format!("row {row}: bad entry `{tok}`")))?;
            if v >= order {
                return Err(bad(format!("row {row}: entry {v} out of range")));
            }
            table.push(v as u32);
        }
        if table.len() - before != order {
            return Err(bad(format!("row {row}: expected {order} entries")));
        }
    }
    if lines.next().is_some() {
        return Err(bad("trailing rows".into()));
    }
    audit(order, &table).map_err(bad)?;
    Ok((order, table))
}

/// Checks the group axioms on a full table.
pub(crate) fn audit(order: usize, t: &[u32]) -> std::result::Result<(), String> {
    let m = |a: usize, b: usize| t[a * order + b] as usize;
    for g in 0..order {
        if m(0, g) != g || m(g, 0) != g {
            return Err(format!("element 0 is not the identity (fails at {g})"));
        }
    }
    let mut seen = vec![false; order];
    for g in 0..order {
        seen.iter_mut().for_each(|s| *s = false);
        for h in 0..order {
            seen[m(g, h)] = true;
        }
        if seen.iter().any(|s| !s) {
            return Err(format!("row {g} is not a permutation"));
        }
    }
    for g in 0..order {
        let h = (0..order).find(|&h| m(g, h) == 0).unwrap();
        if m(h, g) != 0 {
            return Err(format!("element {g} has no two-sided inverse"));
        }
    }
    let check = |a: usize, b: usize, c: usize| -> std::result::Result<(), String> {
        if m(m(a, b), c) != m(a, m(b, c)) {
            Err(format!("not associative at ({a}, {b}, {c})"))
        } else {
            Ok(())
        }
    };
    if order <= EXHAUSTIVE_ASSOCIATIVITY {
        for a in 0..order {
            for b in 0..order {
                for c in 0..order {
                    check(a, b, c)?;
                }
            }
        }
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..SAMPLED_TRIPLES {
            check(
                rng.gen_range(0..order),
                rng.gen_range(0..order),
                rng.gen_range(0..order),
            )?;
        }
    }
    Ok(())
}
