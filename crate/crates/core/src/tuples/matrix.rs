//! Greedy construction of matrices in which every two entries generate,
//! every three rows generate `G^k`, and no four columns close up into a
//! cycle of partial automorphism matches.

use std::collections::BTreeSet;

use fixedbitset::FixedBitSet;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::hall::{GenMatrix, HallChecker};
use crate::error::{Error, Result};
use crate::group::{AutGroup, Elem, FiniteGroup};

#[derive(Clone, Copy, Debug)]
pub struct MatrixOptions {
    pub seed: u64,
    /// Cap on cell placements during backtracking.
    pub max_steps: u64,
    /// Cap on `|G|^3` for the row-triple check.
    pub closure_budget: u64,
}

impl Default for MatrixOptions {
    fn default() -> Self {
        MatrixOptions {
            seed: 0,
            max_steps: 10_000_000,
            closure_budget: 1 << 30,
        }
    }
}

/// Columns `from < to` agree on rows `rows` up to `automorphism`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct NearWitness {
    pub from: usize,
    pub to: usize,
    pub rows: (usize, usize),
    pub automorphism: usize,
}

/// Near witnesses between columns and, for each ordered column pair
/// `(i, j)`, the automorphisms carrying column `i` to column `j` along a
/// chain of near columns.
#[derive(Clone, Debug, Serialize)]
pub struct RelationLedger {
    k: usize,
    near: Vec<NearWitness>,
    related: Vec<Vec<usize>>,
}

impl RelationLedger {
    fn from_witnesses(auts: &AutGroup, k: usize, near: Vec<NearWitness>) -> Self {
        let mut related = vec![Vec::new(); k * k];
        for i in 0..k {
            for j in 0..k {
                if i != j {
                    related[i * k + j] =
                        chain_automorphisms(auts, &near, i, j).into_iter().collect();
                }
            }
        }
        RelationLedger { k, near, related }
    }

    /// Ledger of a complete matrix, from all of its 2x2 minors.
    pub fn of_matrix(auts: &AutGroup, m: &GenMatrix) -> Self {
        let mut near = Vec::new();
        for from in 0..m.cols() {
            for to in from + 1..m.cols() {
                for s in 0..m.rows() {
                    for t in s + 1..m.rows() {
                        let source = (m.get(s, from), m.get(t, from));
                        let target = (m.get(s, to), m.get(t, to));
                        if let Some(a) = pair_mapping(auts, source, target) {
                            near.push(NearWitness {
                                from,
                                to,
                                rows: (s, t),
                                automorphism: a,
                            });
                        }
                    }
                }
            }
        }
        RelationLedger::from_witnesses(auts, m.cols(), near)
    }

    pub fn columns(&self) -> usize {
        self.k
    }

    pub fn near(&self) -> &[NearWitness] {
        &self.near
    }

    /// Automorphism indices relating column `i` to column `j`.
    pub fn related(&self, i: usize, j: usize) -> &[usize] {
        &self.related[i * self.k + j]
    }

    /// `σ` relates `i` to `j` exactly when `σ^-1` relates `j` to `i`.
    pub fn is_symmetric(&self, auts: &AutGroup) -> bool {
        (0..self.k).all(|i| {
            (0..self.k).all(|j| {
                let mut back: Vec<usize> = self
                    .related(j, i)
                    .iter()
                    .map(|&a| auts.inverse(a))
                    .collect();
                back.sort_unstable();
                back == self.related(i, j)
            })
        })
    }
}

/// The automorphism sending the generating pair `source` to `target`.
fn pair_mapping(auts: &AutGroup, source: (Elem, Elem), target: (Elem, Elem)) -> Option<usize> {
    auts.iter()
        .position(|a| a.apply(source.0) == target.0 && a.apply(source.1) == target.1)
}

/// Composites along simple paths from column `from` to column `to`, each
/// step applied after the previous one.
fn chain_automorphisms(
    auts: &AutGroup,
    near: &[NearWitness],
    from: usize,
    to: usize,
) -> BTreeSet<usize> {
    fn walk(
        auts: &AutGroup,
        near: &[NearWitness],
        at: usize,
        to: usize,
        acc: usize,
        on_path: &mut Vec<usize>,
        out: &mut BTreeSet<usize>,
    ) {
        if at == to {
            out.insert(acc);
            return;
        }
        for w in near {
            let (next, step) = if w.from == at {
                (w.to, w.automorphism)
            } else if w.to == at {
                (w.from, auts.inverse(w.automorphism))
            } else {
                continue;
            };
            if on_path.contains(&next) {
                continue;
            }
            on_path.push(next);
            walk(auts, near, next, to, auts.compose(acc, step), on_path, out);
            on_path.pop();
        }
    }
    let mut out = BTreeSet::new();
    if from != to {
        walk(auts, near, from, to, 0, &mut vec![from], &mut out);
    }
    out
}

/// Number of colors in a greedy coloring of the generating graph on
/// `vertices`; an upper bound on any pairwise generating subset.
fn coloring_bound(group: &FiniteGroup, vertices: &[Elem]) -> usize {
    let mut classes: Vec<Vec<Elem>> = Vec::new();
    for &v in vertices {
        match classes
            .iter_mut()
            .find(|c| c.iter().all(|&u| !group.generates_pair(u, v)))
        {
            Some(c) => c.push(v),
            None => classes.push(vec![v]),
        }
    }
    classes.len()
}

/// Size of the largest set of elements any two of which generate `G`,
/// searching no further once `target` is reached (the result is then at
/// least `target`).
pub fn largest_generating_clique(group: &FiniteGroup, target: usize) -> usize {
    fn expand(
        group: &FiniteGroup,
        size: usize,
        mut cands: Vec<Elem>,
        best: &mut usize,
        target: usize,
    ) {
        // Color classes give per-vertex bounds; branch from the highest color.
        let mut colored: Vec<(Elem, usize)> = Vec::with_capacity(cands.len());
        let mut classes: Vec<Vec<Elem>> = Vec::new();
        for &v in &cands {
            let c = match classes
                .iter()
                .position(|c| c.iter().all(|&u| !group.generates_pair(u, v)))
            {
                Some(c) => c,
                None => {
                    classes.push(Vec::new());
                    classes.len() - 1
                }
            };
            classes[c].push(v);
            colored.push((v, c + 1));
        }
        colored.sort_by_key(|&(_, c)| c);
        while let Some((v, color)) = colored.pop() {
            if size + color <= *best || *best >= target {
                return;
            }
            let next: Vec<Elem> = colored
                .iter()
                .map(|&(u, _)| u)
                .filter(|&u| group.generates_pair(u, v))
                .collect();
            if next.is_empty() {
                *best = (*best).max(size + 1);
            } else {
                expand(group, size + 1, next, best, target);
            }
            cands.retain(|&u| u != v);
        }
    }
    let vertices: Vec<Elem> = group
        .elements()
        .filter(|&g| group.elements().any(|h| group.generates_pair(g, h)))
        .collect();
    let mut best = 0;
    expand(group, 0, vertices, &mut best, target);
    best
}

struct Search<'a> {
    group: &'a FiniteGroup,
    auts: &'a AutGroup,
    n: usize,
    k: usize,
    orders: Vec<Vec<Elem>>,
    // Column-major cells placed so far.
    cells: Vec<Elem>,
    near: Vec<NearWitness>,
    steps: u64,
    max_steps: u64,
}

impl Search<'_> {
    fn cell(&self, row: usize, col: usize) -> Elem {
        self.cells[col * self.n + row]
    }

    fn run(&mut self) -> Result<bool> {
        let pos = self.cells.len();
        if pos == self.n * self.k {
            return Ok(true);
        }
        let (col, row) = (pos / self.n, pos % self.n);
        let pool: Vec<Elem> = self.orders[pos]
            .iter()
            .copied()
            .filter(|&g| self.cells.iter().all(|&c| self.group.generates_pair(c, g)))
            .collect();
        // The coloring bound is quadratic in the pool; only worth it near the end.
        let remaining = self.n * self.k - pos;
        if pool.len() < remaining
            || (pool.len() <= 256 && coloring_bound(self.group, &pool) < remaining)
        {
            return Ok(false);
        }
        let mut excluded = FixedBitSet::with_capacity(self.group.order());
        for i in 0..col {
            for a in chain_automorphisms(self.auts, &self.near, i, col) {
                excluded.insert(self.auts.get(a).apply(self.cell(row, i)) as usize);
            }
        }
        for g in pool {
            if excluded.contains(g as usize) {
                continue;
            }
            self.steps += 1;
            if self.steps > self.max_steps {
                return Err(Error::Exhausted {
                    steps: self.max_steps,
                });
            }
            let mark = self.near.len();
            for from in 0..col {
                for s in 0..row {
                    let source = (self.cell(s, from), self.cell(row, from));
                    if let Some(a) = pair_mapping(self.auts, source, (self.cell(s, col), g)) {
                        self.near.push(NearWitness {
                            from,
                            to: col,
                            rows: (s, row),
                            automorphism: a,
                        });
                    }
                }
            }
            self.cells.push(g);
            if self.run()? {
                return Ok(true);
            }
            self.cells.pop();
            self.near.truncate(mark);
        }
        Ok(false)
    }
}

/// Builds an `n x k` matrix column by column. Each new entry must generate
/// with every earlier entry and avoid the images `σ(A[row][i])` for every
/// `σ` relating an earlier column `i` to the current one; dead ends are
/// backtracked. The result is re-verified before it is returned.
pub fn build_matrix(
    group: &FiniteGroup,
    n: usize,
    k: usize,
    opts: &MatrixOptions,
) -> Result<(GenMatrix, RelationLedger)> {
    if n < 4 || k == 0 {
        return Err(Error::Invalid(format!(
            "need n >= 4 and k >= 1, got {n}x{k}"
        )));
    }
    if group
        .elements()
        .any(|g| group.element_order(g) as usize == group.order())
    {
        return Err(Error::Unsupported(
            "matrix construction needs a noncyclic group".into(),
        ));
    }
    let auts = group.automorphisms()?;
    let needed = n * k;
    let largest = largest_generating_clique(group, needed);
    if largest < needed {
        return Err(Error::CliqueTooSmall { needed, largest });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let orders = (0..needed)
        .map(|_| {
            let mut o: Vec<Elem> = group.elements().collect();
            o.shuffle(&mut rng);
            o
        })
        .collect();
    let mut search = Search {
        group,
        auts: &auts,
        n,
        k,
        orders,
        cells: Vec::with_capacity(needed),
        near: Vec::new(),
        steps: 0,
        max_steps: opts.max_steps,
    };
    if !search.run()? {
        return Err(Error::Exhausted {
            steps: search.steps,
        });
    }
    let entries = (0..n)
        .flat_map(|r| (0..k).map(move |c| (r, c)))
        .map(|(r, c)| search.cell(r, c))
        .collect();
    let matrix = GenMatrix::new(group, n, k, entries)?;
    verify_lemma_matrix(group, &matrix, opts.closure_budget)?;
    let ledger = RelationLedger::of_matrix(&auts, &matrix);
    Ok((matrix, ledger))
}

/// Every two distinct cells generate `G`.
pub fn verify_pairs(group: &FiniteGroup, m: &GenMatrix) -> Result<()> {
    let e = m.entries();
    for a in 0..e.len() {
        for b in a + 1..e.len() {
            if !group.generates_pair(e[a], e[b]) {
                return Err(Error::Verification(format!(
                    "cells ({},{}) and ({},{}) do not generate",
                    a / m.cols(),
                    a % m.cols(),
                    b / m.cols(),
                    b % m.cols()
                )));
            }
        }
    }
    Ok(())
}

/// Every three rows generate `G^k`.
pub fn verify_row_triples(group: &FiniteGroup, m: &GenMatrix, budget: u64) -> Result<()> {
    let mut checker = HallChecker::new(group, m.cols(), budget)?;
    for i in 0..m.rows() {
        for j in i + 1..m.rows() {
            for l in j + 1..m.rows() {
                let report = checker.check(&m.select_rows(&[i, j, l]))?;
                if !report.diagonal_surjective {
                    return Err(Error::Verification(format!(
                        "rows {i}, {j}, {l} generate a subgroup of order {}",
                        report.closure_size
                    )));
                }
            }
        }
    }
    Ok(())
}

/// Four columns and, for each, the row left free in the pattern.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ForbiddenConfiguration {
    pub columns: [usize; 4],
    pub free_rows: [usize; 4],
}

/// Searches for four columns `c_0..c_3` and distinct rows `r_0..r_3` such
/// that column `c_a` off row `r_a` is `(x_b^{σ_a})_b` for one shared
/// vector `x` and automorphisms `σ_a`. Rows are tried in every order.
///
/// Such `σ_a` exist iff each pair of columns `a < b` matches on the two
/// rows `r_c, r_d` (`{c, d}` the complement) through some `φ_ab`, and the
/// matches compose: `φ_ac = φ_ab` then `φ_bc`.
pub fn find_forbidden_configuration(
    auts: &AutGroup,
    m: &GenMatrix,
) -> Option<ForbiddenConfiguration> {
    let (n, k) = (m.rows(), m.cols());
    let pairs = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];
    let slot = |a: usize, b: usize| pairs.iter().position(|&p| p == (a, b)).unwrap();
    for c0 in 0..k {
        for c1 in c0 + 1..k {
            for c2 in c1 + 1..k {
                for c3 in c2 + 1..k {
                    let cols = [c0, c1, c2, c3];
                    for rows in ordered_quadruples(n) {
                        let mut phi = [0usize; 6];
                        let complete = pairs.iter().enumerate().all(|(p, &(a, b))| {
                            let rest: Vec<usize> = (0..4).filter(|&x| x != a && x != b).collect();
                            let (x, y) = (rows[rest[0]], rows[rest[1]]);
                            match pair_mapping(
                                auts,
                                (m.get(x, cols[a]), m.get(y, cols[a])),
                                (m.get(x, cols[b]), m.get(y, cols[b])),
                            ) {
                                Some(f) => {
                                    phi[p] = f;
                                    true
                                }
                                None => false,
                            }
                        });
                        if !complete {
                            continue;
                        }
                        let cocycle = [(0, 1, 2), (0, 1, 3), (0, 2, 3), (1, 2, 3)].iter().all(
                            |&(a, b, c)| {
                                phi[slot(a, c)] == auts.compose(phi[slot(a, b)], phi[slot(b, c)])
                            },
                        );
                        if cocycle {
                            return Some(ForbiddenConfiguration {
                                columns: cols,
                                free_rows: rows,
                            });
                        }
                    }
                }
            }
        }
    }
    None
}

fn ordered_quadruples(n: usize) -> impl Iterator<Item = [usize; 4]> {
    (0..n)
        .flat_map(move |a| {
            (0..n).flat_map(move |b| (0..n).flat_map(move |c| (0..n).map(move |d| [a, b, c, d])))
        })
        .filter(|r| {
            r[0] != r[1]
                && r[0] != r[2]
                && r[0] != r[3]
                && r[1] != r[2]
                && r[1] != r[3]
                && r[2] != r[3]
        })
}

/// Runs the pair, row-triple and configuration checks.
pub fn verify_lemma_matrix(group: &FiniteGroup, m: &GenMatrix, budget: u64) -> Result<()> {
    if m.rows() < 4 {
        return Err(Error::Verification(format!("only {} rows", m.rows())));
    }
    verify_pairs(group, m)?;
    verify_row_triples(group, m, budget)?;
    let auts = group.automorphisms()?;
    if let Some(found) = find_forbidden_configuration(&auts, m) {
        return Err(Error::Verification(format!(
            "forbidden configuration on columns {:?} with free rows {:?}",
            found.columns, found.free_rows
        )));
    }
    Ok(())
}
