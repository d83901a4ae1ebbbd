//! Generating tuples and their classes under automorphisms.
//!
//! [`ClassTable`] is the quotient of the generating `n`-tuples by the
//! diagonal action of `Aut(G)`; each class is named by the rank of its
//! lexicographically least member among all such members.

mod hall;
mod matrix;

use std::fmt::Write as _;
use std::io::{BufRead, Write};
use std::path::Path;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::group::{AutGroup, Elem, FiniteGroup, SubgroupId, SubgroupLattice};

pub use hall::{
    d_power, d_power_by, diagonal_closure_size, hall_check, spread_witness, wiegold_matrix, DPower,
    DiagonalClosure, GenMatrix, HallChecker, HallReport,
};
pub use matrix::{
    build_matrix, find_forbidden_configuration, largest_generating_clique, verify_lemma_matrix,
    verify_pairs, verify_row_triples, ForbiddenConfiguration, MatrixOptions, NearWitness,
    RelationLedger,
};

pub type ClassId = u32;

/// Default cap on `order^n` for anything that walks the whole tuple space.
pub const DEFAULT_TUPLE_BUDGET: u64 = 1 << 32;

/// Tables at most this large keep a dense tuple -> class index.
const DENSE_LIMIT: u64 = 1 << 25;

const UNSET: ClassId = ClassId::MAX;

/// Format version written into cache files.
pub const CACHE_VERSION: &str = env!("CARGO_PKG_VERSION");

fn tuple_space(group: &FiniteGroup, n: usize, budget: u64) -> Result<u64> {
    let total = (group.order() as u64)
        .checked_pow(n as u32)
        .filter(|&t| t <= budget)
        .ok_or_else(|| {
            Error::Budget(format!(
                "{}^{n} tuples exceeds budget {budget}",
                group.order()
            ))
        })?;
    Ok(total)
}

fn encode(order: usize, t: &[Elem]) -> u64 {
    t.iter().fold(0u64, |acc, &g| acc * order as u64 + g as u64)
}

/// Calls `f` on every generating `n`-tuple in lexicographic order.
pub fn for_each_generating_tuple(group: &FiniteGroup, n: usize, mut f: impl FnMut(&[Elem])) {
    fn walk(
        lattice: &mut SubgroupLattice<'_>,
        order: Elem,
        tuple: &mut Vec<Elem>,
        sub: SubgroupId,
        n: usize,
        f: &mut dyn FnMut(&[Elem]),
    ) {
        if tuple.len() == n {
            if lattice.is_whole(sub) {
                f(tuple);
            }
            return;
        }
        for g in 0..order {
            let next = lattice.join(sub, g);
            tuple.push(g);
            walk(lattice, order, tuple, next, n, f);
            tuple.pop();
        }
    }
    let mut lattice = SubgroupLattice::new(group);
    let mut tuple = Vec::with_capacity(n);
    walk(
        &mut lattice,
        group.order() as Elem,
        &mut tuple,
        SubgroupLattice::TRIVIAL,
        n,
        &mut f,
    );
}

/// Number of generating `n`-tuples, `|V_n(G)|`.
pub fn enumerate_generating_tuples(group: &FiniteGroup, n: usize, budget: u64) -> Result<u64> {
    tuple_space(group, n, budget)?;
    let mut count = 0u64;
    for_each_generating_tuple(group, n, |_| count += 1);
    Ok(count)
}

/// Streaming lexicographic iterator over generating `n`-tuples.
pub struct GeneratingTuples<'g> {
    lattice: SubgroupLattice<'g>,
    order: Elem,
    tuple: Vec<Elem>,
    // subs[i] is the subgroup generated by tuple[..i]
    subs: Vec<SubgroupId>,
    started: bool,
    done: bool,
}

impl<'g> GeneratingTuples<'g> {
    pub fn new(group: &'g FiniteGroup, n: usize, budget: u64) -> Result<Self> {
        tuple_space(group, n, budget)?;
        Ok(GeneratingTuples {
            lattice: SubgroupLattice::new(group),
            order: group.order() as Elem,
            tuple: vec![0; n],
            subs: vec![SubgroupLattice::TRIVIAL; n + 1],
            started: false,
            done: false,
        })
    }

    fn refresh(&mut self, from: usize) {
        for i in from..self.tuple.len() {
            self.subs[i + 1] = self.lattice.join(self.subs[i], self.tuple[i]);
        }
    }

    fn advance(&mut self) -> bool {
        if !self.started {
            self.started = true;
            self.refresh(0);
            return true;
        }
        let Some(p) = self.tuple.iter().rposition(|&g| g + 1 < self.order) else {
            return false;
        };
        self.tuple[p] += 1;
        self.tuple[p + 1..].iter_mut().for_each(|g| *g = 0);
        self.refresh(p);
        true
    }
}

impl Iterator for GeneratingTuples<'_> {
    type Item = Vec<Elem>;

    fn next(&mut self) -> Option<Vec<Elem>> {
        while !self.done {
            if !self.advance() {
                self.done = true;
                break;
            }
            if self.lattice.is_whole(self.subs[self.tuple.len()]) {
                return Some(self.tuple.clone());
            }
        }
        None
    }
}

/// Lexicographically least element of the `Aut(G)`-orbit of `tuple`.
pub fn canonical_form(auts: &AutGroup, tuple: &[Elem]) -> Vec<Elem> {
    auts.canonical(tuple)
}

/// `V_n(G) / Aut(G)` with canonical representatives.
pub struct ClassTable<'g> {
    group: &'g FiniteGroup,
    auts: Arc<AutGroup>,
    rank: usize,
    reps: Vec<Elem>,
    index: Option<Vec<ClassId>>,
    tuple_count: u64,
    free_action: bool,
}

impl std::fmt::Debug for ClassTable<'_> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ClassTable")
            .field("group", &self.group.spec())
            .field("rank", &self.rank)
            .field("classes", &self.len())
            .finish()
    }
}

impl<'g> ClassTable<'g> {
    pub fn build(group: &'g FiniteGroup, rank: usize, budget: u64) -> Result<Self> {
        if rank == 0 {
            return Err(Error::Invalid("class tables need rank at least 1".into()));
        }
        let total = tuple_space(group, rank, budget)?;
        let auts = group.automorphisms()?;
        let order = group.order();
        let mut reps = Vec::new();
        let mut tuple_count = 0u64;
        let mut free_action = true;
        let mut index = (total <= DENSE_LIMIT).then(|| vec![UNSET; total as usize]);
        let mut image = vec![0; rank];
        match index.as_mut() {
            Some(index) => for_each_generating_tuple(group, rank, |t| {
                tuple_count += 1;
                if index[encode(order, t) as usize] != UNSET {
                    return;
                }
                // First visit in lex order is the least member of its orbit.
                let id = (reps.len() / rank) as ClassId;
                reps.extend_from_slice(t);
                let mut orbit = 0;
                for a in auts.iter() {
                    for (x, &g) in image.iter_mut().zip(t) {
                        *x = a.apply(g);
                    }
                    let slot = &mut index[encode(order, &image) as usize];
                    if *slot == UNSET {
                        *slot = id;
                        orbit += 1;
                    }
                }
                free_action &= orbit == auts.len();
            }),
            None => for_each_generating_tuple(group, rank, |t| {
                tuple_count += 1;
                if auts.canonical(t) == t {
                    free_action &= orbit_size(&auts, t) == auts.len();
                    reps.extend_from_slice(t);
                }
            }),
        }
        Ok(ClassTable {
            group,
            auts,
            rank,
            reps,
            index,
            tuple_count,
            free_action,
        })
    }

    pub fn group(&self) -> &'g FiniteGroup {
        self.group
    }

    pub fn automorphisms(&self) -> &Arc<AutGroup> {
        &self.auts
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// Number of classes.
    pub fn len(&self) -> usize {
        self.reps.len() / self.rank
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `|V_n(G)|`.
    pub fn tuple_count(&self) -> u64 {
        self.tuple_count
    }

    /// Whether every orbit had exactly `|Aut(G)|` members.
    pub fn free_action(&self) -> bool {
        self.free_action
    }

    pub fn representative(&self, id: ClassId) -> &[Elem] {
        let i = id as usize * self.rank;
        &self.reps[i..i + self.rank]
    }

    pub fn representatives(&self) -> impl Iterator<Item = &[Elem]> + '_ {
        (0..self.len() as ClassId).map(move |id| self.representative(id))
    }

    /// Class of `tuple`, or `None` if it does not generate or is malformed.
    pub fn class_of(&self, tuple: &[Elem]) -> Option<ClassId> {
        if tuple.len() != self.rank || tuple.iter().any(|&g| g as usize >= self.group.order()) {
            return None;
        }
        match &self.index {
            Some(index) => {
                let id = index[encode(self.group.order(), tuple) as usize];
                (id != UNSET).then_some(id)
            }
            None => {
                if !self.group.generates(tuple) {
                    return None;
                }
                self.search(&self.auts.canonical(tuple))
            }
        }
    }

    fn search(&self, canonical: &[Elem]) -> Option<ClassId> {
        let (mut lo, mut hi) = (0usize, self.len());
        while lo < hi {
            let mid = (lo + hi) / 2;
            match self.representative(mid as ClassId).cmp(canonical) {
                std::cmp::Ordering::Less => lo = mid + 1,
                std::cmp::Ordering::Greater => hi = mid,
                std::cmp::Ordering::Equal => return Some(mid as ClassId),
            }
        }
        None
    }

    /// File name under which a cache of this table is stored.
    pub fn cache_file_name(spec: &str, rank: usize) -> String {
        let safe: String = spec
            .chars()
            .map(|c| if c.is_ascii_alphanumeric() { c } else { '_' })
            .collect();
        format!("{safe}.n{rank}.v{CACHE_VERSION}.classes")
    }

    pub fn write_cache(&self, mut out: impl Write) -> std::io::Result<()> {
        writeln!(out, "group {}", self.group.spec())?;
        writeln!(out, "rank {}", self.rank)?;
        writeln!(out, "version {CACHE_VERSION}")?;
        writeln!(out, "classes {}", self.len())?;
        let mut line = String::new();
        for (id, rep) in self.representatives().enumerate() {
            line.clear();
            write!(line, "{id}").unwrap();
            for g in rep {
                write!(line, " {g}").unwrap();
            }
            writeln!(out, "{line}")?;
        }
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let io = |source| Error::Io {
            path: path.to_path_buf(),
            source,
        };
        let tmp = path.with_extension("partial");
        let file = std::fs::File::create(&tmp).map_err(io)?;
        let mut w = std::io::BufWriter::new(file);
        self.write_cache(&mut w).map_err(io)?;
        w.flush().map_err(io)?;
        drop(w);
        std::fs::rename(&tmp, path).map_err(io)
    }

    /// Rebuilds a table from cached representatives, re-checking that each
    /// one generates and is canonical.
    pub fn read_cache(group: &'g FiniteGroup, rank: usize, input: impl BufRead) -> Result<Self> {
        let bad = |msg: String| Error::Cache(msg);
        let mut lines = input.lines();
        let mut header = |key: &str| -> Result<String> {
            let line = lines
                .next()
                .ok_or_else(|| bad(format!("missing `{key}` header")))?
                .map_err(|e| bad(e.to_string()))?;
            line.strip_prefix(key)
                .and_then(|v| v.strip_prefix(' '))
                .map(str::to_string)
                .ok_or_else(|| bad(format!("expected `{key}` header, found `{line}`")))
        };
        let spec = header("group")?;
        let r = header("rank")?;
        let version = header("version")?;
        let classes: usize = header("classes")?
            .parse()
            .map_err(|_| bad("bad class count".into()))?;
        if spec != group.spec() || r != rank.to_string() || version != CACHE_VERSION {
            return Err(bad(format!(
                "header ({spec}, {r}, {version}) does not match ({}, {rank}, {CACHE_VERSION})",
                group.spec()
            )));
        }
        let total = tuple_space(group, rank, u64::MAX)?;
        let auts = group.automorphisms()?;
        let mut reps: Vec<Elem> = Vec::new();
        for (expected, line) in lines.enumerate() {
            let line = line.map_err(|e| bad(e.to_string()))?;
            let fields: Vec<u64> = line
                .split_whitespace()
                .map(|f| f.parse::<u64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| bad(format!("bad line `{line}`")))?;
            if fields.len() != rank + 1 || fields[0] != expected as u64 {
                return Err(bad(format!("bad line `{line}`")));
            }
            let rep: Vec<Elem> = fields[1..].iter().map(|&g| g as Elem).collect();
            group.check_elements(&rep)?;
            if !group.generates(&rep) || auts.canonical(&rep) != rep {
                return Err(bad(format!(
                    "class {expected} is not a canonical generating tuple"
                )));
            }
            if expected > 0 && rep.as_slice() <= &reps[reps.len() - rank..] {
                return Err(bad("representatives out of order".into()));
            }
            reps.extend_from_slice(&rep);
        }
        if reps.len() != classes * rank {
            return Err(bad(format!(
                "expected {classes} classes, found {}",
                reps.len() / rank
            )));
        }
        let order = group.order();
        let mut index = (total <= DENSE_LIMIT).then(|| vec![UNSET; total as usize]);
        let mut tuple_count = 0u64;
        let mut free_action = true;
        for (id, rep) in reps.chunks(rank).enumerate() {
            let size = orbit_size(&auts, rep);
            tuple_count += size as u64;
            free_action &= size == auts.len();
            if let Some(index) = index.as_mut() {
                for a in auts.iter() {
                    index[encode(order, &a.apply_tuple(rep)) as usize] = id as ClassId;
                }
            }
        }
        Ok(ClassTable {
            group,
            auts,
            rank,
            reps,
            index,
            tuple_count,
            free_action,
        })
    }

    pub fn load(group: &'g FiniteGroup, rank: usize, path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::read_cache(group, rank, std::io::BufReader::new(file))
    }
}

fn orbit_size(auts: &AutGroup, t: &[Elem]) -> usize {
    let mut images: Vec<Vec<Elem>> = auts.iter().map(|a| a.apply_tuple(t)).collect();
    images.sort_unstable();
    images.dedup();
    images.len()
}
