use std::sync::Arc;

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};

use super::ClassTable;
use crate::error::{Error, Result};
use crate::group::{AutGroup, Elem, FiniteGroup, IDENTITY};

/// An `n x k` matrix over `G`, stored row-major. Column `c` is the tuple
/// `(A[0][c], ..., A[n-1][c])`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenMatrix {
    n: usize,
    k: usize,
    entries: Vec<Elem>,
    group: String,
}

impl GenMatrix {
    pub fn new(group: &FiniteGroup, n: usize, k: usize, entries: Vec<Elem>) -> Result<Self> {
        if entries.len() != n * k {
            return Err(Error::Invalid(format!(
                "{} entries for a {n}x{k} matrix",
                entries.len()
            )));
        }
        group.check_elements(&entries)?;
        Ok(GenMatrix {
            n,
            k,
            entries,
            group: group.spec().to_string(),
        })
    }

    pub fn from_columns(group: &FiniteGroup, columns: &[Vec<Elem>]) -> Result<Self> {
        let n = columns.first().map_or(0, Vec::len);
        if columns.iter().any(|c| c.len() != n) {
            return Err(Error::Invalid("columns of unequal length".into()));
        }
        let k = columns.len();
        let entries = (0..n)
            .flat_map(|r| columns.iter().map(move |c| c[r]))
            .collect();
        GenMatrix::new(group, n, k, entries)
    }

    /// Re-validates a deserialized matrix against `group`.
    pub fn check(&self, group: &FiniteGroup) -> Result<()> {
        if self.group != group.spec() {
            return Err(Error::Invalid(format!(
                "matrix over {} used with {}",
                self.group,
                group.spec()
            )));
        }
        GenMatrix::new(group, self.n, self.k, self.entries.clone()).map(|_| ())
    }

    pub fn rows(&self) -> usize {
        self.n
    }

    pub fn cols(&self) -> usize {
        self.k
    }

    pub fn group_spec(&self) -> &str {
        &self.group
    }

    pub fn entries(&self) -> &[Elem] {
        &self.entries
    }

    pub fn get(&self, row: usize, col: usize) -> Elem {
        self.entries[row * self.k + col]
    }

    pub fn row(&self, row: usize) -> &[Elem] {
        &self.entries[row * self.k..(row + 1) * self.k]
    }

    pub fn column(&self, col: usize) -> Vec<Elem> {
        (0..self.n).map(|r| self.get(r, col)).collect()
    }

    pub fn columns(&self) -> Vec<Vec<Elem>> {
        (0..self.k).map(|c| self.column(c)).collect()
    }

    /// Submatrix on the given rows, all columns kept.
    pub fn select_rows(&self, rows: &[usize]) -> GenMatrix {
        GenMatrix {
            n: rows.len(),
            k: self.k,
            entries: rows
                .iter()
                .flat_map(|&r| self.row(r).iter().copied())
                .collect(),
            group: self.group.clone(),
        }
    }

    /// Submatrix on the given columns, all rows kept.
    pub fn select_columns(&self, cols: &[usize]) -> GenMatrix {
        GenMatrix {
            n: self.n,
            k: cols.len(),
            entries: (0..self.n)
                .flat_map(|r| cols.iter().map(move |&c| self.get(r, c)))
                .collect(),
            group: self.group.clone(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("matrix serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let m: GenMatrix = serde_json::from_str(text).map_err(|e| Error::Parse {
            what: "matrix JSON",
            text: e.to_string(),
        })?;
        if m.entries.len() != m.n * m.k {
            return Err(Error::Invalid("entry count does not match n*k".into()));
        }
        Ok(m)
    }
}

/// Reusable BFS scratch for subgroups of `G^k` generated by diagonal rows.
pub struct DiagonalClosure {
    order: u64,
    k: usize,
    total: u64,
    visited: FixedBitSet,
    queue: Vec<u64>,
}

impl DiagonalClosure {
    pub fn new(order: usize, k: usize, budget: u64) -> Result<Self> {
        let total = (order as u64)
            .checked_pow(k as u32)
            .filter(|&t| t <= budget && t <= usize::MAX as u64)
            .ok_or_else(|| Error::Budget(format!("{order}^{k} exceeds closure budget {budget}")))?;
        Ok(DiagonalClosure {
            order: order as u64,
            k,
            total,
            visited: FixedBitSet::with_capacity(total as usize),
            queue: Vec::new(),
        })
    }

    /// `|G|^k`.
    pub fn product_order(&self) -> u64 {
        self.total
    }

    fn step(&self, group: &FiniteGroup, code: u64, row: &[Elem]) -> u64 {
        let mut x = code;
        let mut out = 0;
        let mut place = 1;
        for &g in row.iter().rev() {
            let c = (x % self.order) as Elem;
            x /= self.order;
            out += group.mul(c, g) as u64 * place;
            place *= self.order;
        }
        out
    }

    /// Order of `<rows>` in `G^k`. Stops as soon as more than half the
    /// product is reached, since a subgroup that large is everything.
    pub fn size(&mut self, group: &FiniteGroup, rows: &[&[Elem]]) -> u64 {
        debug_assert!(rows.iter().all(|r| r.len() == self.k));
        self.visited.clear();
        self.queue.clear();
        self.visited.insert(0);
        self.queue.push(0);
        let mut head = 0;
        let mut count = 1u64;
        while head < self.queue.len() {
            let code = self.queue[head];
            head += 1;
            for row in rows {
                let next = self.step(group, code, row);
                if !self.visited.put(next as usize) {
                    count += 1;
                    if 2 * count > self.total {
                        return self.total;
                    }
                    self.queue.push(next);
                }
            }
        }
        count
    }

    /// Whether `target` (a `k`-vector) lies in `<rows>`.
    pub fn contains(&mut self, group: &FiniteGroup, rows: &[&[Elem]], target: &[Elem]) -> bool {
        let full = self.size(group, rows) == self.total;
        let code = target
            .iter()
            .fold(0u64, |acc, &g| acc * self.order + g as u64);
        full || self.visited.contains(code as usize)
    }
}

/// Order of the subgroup of `G^k` generated by the given `k`-vectors.
pub fn diagonal_closure_size(group: &FiniteGroup, rows: &[&[Elem]], budget: u64) -> Result<u64> {
    let k = rows.first().map_or(0, |r| r.len());
    let mut closure = DiagonalClosure::new(group.order(), k, budget)?;
    Ok(closure.size(group, rows))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct HallReport {
    pub columns_generate: bool,
    pub classes_distinct: bool,
    pub diagonal_surjective: bool,
    pub closure_size: u64,
    pub product_order: u64,
}

/// Checks generating-matrix criteria for matrices with a fixed column
/// count, reusing closure scratch between calls.
pub struct HallChecker<'g> {
    group: &'g FiniteGroup,
    auts: Arc<AutGroup>,
    closure: DiagonalClosure,
}

impl<'g> HallChecker<'g> {
    pub fn new(group: &'g FiniteGroup, k: usize, budget: u64) -> Result<Self> {
        Ok(HallChecker {
            group,
            auts: group.automorphisms()?,
            closure: DiagonalClosure::new(group.order(), k, budget)?,
        })
    }

    pub fn check(&mut self, m: &GenMatrix) -> Result<HallReport> {
        if m.cols() != self.closure.k {
            return Err(Error::RankMismatch {
                expected: self.closure.k,
                got: m.cols(),
            });
        }
        let columns = m.columns();
        let columns_generate = columns.iter().all(|c| self.group.generates(c));
        let mut canon: Vec<Vec<Elem>> = columns.iter().map(|c| self.auts.canonical(c)).collect();
        canon.sort_unstable();
        let classes_distinct = canon.windows(2).all(|w| w[0] != w[1]);
        let rows: Vec<&[Elem]> = (0..m.rows()).map(|r| m.row(r)).collect();
        let closure_size = self.closure.size(self.group, &rows);
        let product_order = self.closure.product_order();
        let report = HallReport {
            columns_generate,
            classes_distinct,
            diagonal_surjective: closure_size == product_order,
            closure_size,
            product_order,
        };
        if columns_generate && report.classes_distinct != report.diagonal_surjective {
            return Err(Error::Internal(format!(
                "class distinctness and diagonal generation disagree on {m:?}"
            )));
        }
        Ok(report)
    }
}

pub fn hall_check(group: &FiniteGroup, m: &GenMatrix, budget: u64) -> Result<HallReport> {
    HallChecker::new(group, m.cols(), budget)?.check(m)
}

/// Least `h` (by id) with `<h, g> = G` for every `g` in `gs`.
pub fn spread_witness(group: &FiniteGroup, gs: &[Elem]) -> Option<Elem> {
    if gs.iter().any(|&g| g == IDENTITY && group.order() > 1) {
        return None;
    }
    group
        .elements()
        .find(|&h| gs.iter().all(|&g| group.generates_pair(h, g)))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DPower {
    pub k: u64,
    /// `d(G)`.
    pub rank: usize,
    /// Least `n` with `G^k` generated by `n` elements.
    pub d_power: usize,
    /// `(n, |V_n(G) / Aut(G)|)` for each rank examined.
    pub class_counts: Vec<(usize, u64)>,
}

/// `d(G^k)` for simple nonabelian `G`: the least `n` with at least `k`
/// classes of generating `n`-tuples. `class_count(n)` supplies the counts.
pub fn d_power_by(
    group: &FiniteGroup,
    k: u64,
    mut class_count: impl FnMut(usize) -> Result<u64>,
) -> Result<DPower> {
    if k == 0 {
        return Err(Error::Invalid("k must be positive".into()));
    }
    if !group.is_simple_nonabelian() {
        return Err(Error::NotSimple);
    }
    let rank = group.rank();
    let mut class_counts = Vec::new();
    for n in rank.. {
        let count = class_count(n)?;
        class_counts.push((n, count));
        if count >= k {
            return Ok(DPower {
                k,
                rank,
                d_power: n,
                class_counts,
            });
        }
    }
    unreachable!()
}

pub fn d_power(group: &FiniteGroup, k: u64, budget: u64) -> Result<DPower> {
    d_power_by(group, k, |n| {
        Ok(ClassTable::build(group, n, budget)?.len() as u64)
    })
}

/// The `3 x k` matrix with constant rows `a`, `b` and third row `cs`.
pub fn wiegold_matrix(group: &FiniteGroup, a: Elem, b: Elem, cs: &[Elem]) -> Result<GenMatrix> {
    group.check_elements(&[a, b])?;
    group.check_elements(cs)?;
    if !group.generates_pair(a, b) {
        return Err(Error::NoGeneratingPair(vec![a, b]));
    }
    let mut sorted = cs.to_vec();
    sorted.sort_unstable();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::Invalid(
            "third row entries must be pairwise distinct".into(),
        ));
    }
    let k = cs.len();
    let mut entries = vec![a; k];
    entries.extend(std::iter::repeat_n(b, k));
    entries.extend_from_slice(cs);
    GenMatrix::new(group, 3, k, entries)
}
