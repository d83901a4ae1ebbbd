//! The permutation action of Nielsen moves on classes of generating tuples.

mod certify;

use fixedbitset::FixedBitSet;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::free::{MoveSequence, NielsenMove};
use crate::tuples::{ClassId, ClassTable};

pub use certify::{
    certify_alt_or_sym, schreier_sims_order, Certification, CertifyOptions, Verdict,
};

/// A permutation of `0..N` as its image list.
pub type Perm = Vec<u32>;

/// Permutations of the class set, one per elementary move.
#[derive(Clone, Debug)]
pub struct InducedAction {
    points: usize,
    labels: Vec<String>,
    perms: Vec<Perm>,
}

impl InducedAction {
    /// Wraps arbitrary permutations of `0..points`; each must be a bijection.
    pub fn from_permutations(points: usize, perms: Vec<Perm>) -> Result<Self> {
        for p in &perms {
            if !is_bijection(points, p) {
                return Err(Error::Invalid("generator is not a permutation".into()));
            }
        }
        let labels = (0..perms.len()).map(|i| format!("g{i}")).collect();
        Ok(InducedAction {
            points,
            labels,
            perms,
        })
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn generators(&self) -> &[Perm] {
        &self.perms
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn generator(&self, label: &str) -> Option<&Perm> {
        self.labels
            .iter()
            .position(|l| l == label)
            .map(|i| &self.perms[i])
    }
}

fn is_bijection(points: usize, p: &[u32]) -> bool {
    let mut seen = FixedBitSet::with_capacity(points);
    p.len() == points
        && p.iter()
            .all(|&x| (x as usize) < points && !seen.put(x as usize))
}

/// Image of every class under `seq`, acting on representatives.
pub fn induced_permutation(table: &ClassTable<'_>, seq: &MoveSequence) -> Result<Perm> {
    if seq.rank() != table.rank() {
        return Err(Error::RankMismatch {
            expected: table.rank(),
            got: seq.rank(),
        });
    }
    let group = table.group();
    let mut t = vec![0; table.rank()];
    let mut perm = Vec::with_capacity(table.len());
    for rep in table.representatives() {
        t.copy_from_slice(rep);
        seq.act(group, &mut t);
        let image = table
            .class_of(&t)
            .ok_or_else(|| Error::Internal(format!("move image {t:?} does not generate")))?;
        perm.push(image);
    }
    Ok(perm)
}

/// Spot checks per generator that acting on a non-canonical member of a
/// class agrees with acting on its representative.
const WELL_DEFINED_SAMPLES: usize = 16;

/// The action of every elementary move (see [`NielsenMove::all`]).
pub fn induced_generators(table: &ClassTable<'_>) -> Result<InducedAction> {
    let moves = NielsenMove::all(table.rank());
    let auts = table.automorphisms();
    let group = table.group();
    let mut perms = Vec::with_capacity(moves.len());
    for &m in &moves {
        let seq = MoveSequence::from_moves(table.rank(), vec![m])?;
        let perm = induced_permutation(table, &seq)?;
        let stride = (table.len() / WELL_DEFINED_SAMPLES).max(1);
        for id in (0..table.len()).step_by(stride) {
            let a = auts.get((id * 7 + 1) % auts.len());
            let mut t = a.apply_tuple(table.representative(id as ClassId));
            m.act(group, &mut t);
            if table.class_of(&t) != Some(perm[id]) {
                return Err(Error::Internal(format!(
                    "{m} is not well defined on class {id}"
                )));
            }
        }
        if !is_bijection(table.len(), &perm) {
            return Err(Error::Internal(format!("{m} does not permute the classes")));
        }
        perms.push(perm);
    }
    Ok(InducedAction {
        points: table.len(),
        labels: moves.iter().map(ToString::to_string).collect(),
        perms,
    })
}

/// Orbits of the generated group, each sorted, ordered by least member.
pub fn orbit_partition(action: &InducedAction) -> Vec<Vec<u32>> {
    let mut seen = FixedBitSet::with_capacity(action.points);
    let mut orbits = Vec::new();
    for start in 0..action.points {
        if seen.put(start) {
            continue;
        }
        let mut orbit = vec![start as u32];
        let mut head = 0;
        while head < orbit.len() {
            let x = orbit[head] as usize;
            head += 1;
            for p in &action.perms {
                let y = p[x];
                if !seen.put(y as usize) {
                    orbit.push(y);
                }
            }
        }
        orbit.sort_unstable();
        orbits.push(orbit);
    }
    orbits
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct KTransitivity {
    pub k: usize,
    pub transitive: bool,
    /// Orbits on ordered `k`-tuples of distinct points.
    pub orbit_count: u64,
    /// `N (N-1) ... (N-k+1)`.
    pub tuple_count: u64,
}

/// Default cap on `N^k` for the tuple BFS.
pub const DEFAULT_STATE_BUDGET: u64 = 1 << 33;

/// Orbits of the diagonal action on ordered `k`-tuples of distinct points.
pub fn k_transitivity(action: &InducedAction, k: usize, budget: u64) -> Result<KTransitivity> {
    let n = action.points as u64;
    if k == 0 || k as u64 > n {
        return Err(Error::Invalid(format!("k = {k} outside 1..={n}")));
    }
    let space = n
        .checked_pow(k as u32)
        .filter(|&s| s <= budget && s <= usize::MAX as u64)
        .ok_or_else(|| Error::Budget(format!("{n}^{k} tuple states exceed budget {budget}")))?;
    let tuple_count = (0..k as u64).map(|i| n - i).product();
    let decode = |mut code: u64, out: &mut [u32]| {
        for slot in out.iter_mut().rev() {
            *slot = (code % n) as u32;
            code /= n;
        }
    };
    let encode = |t: &[u32]| t.iter().fold(0u64, |acc, &x| acc * n + x as u64);
    let distinct = |t: &[u32]| (0..t.len()).all(|i| !t[..i].contains(&t[i]));
    let mut visited = FixedBitSet::with_capacity(space as usize);
    let mut queue: Vec<u64> = Vec::new();
    let mut t = vec![0u32; k];
    let mut image = vec![0u32; k];
    let mut orbit_count = 0;
    for start in 0..space {
        if visited.contains(start as usize) {
            continue;
        }
        decode(start, &mut t);
        if !distinct(&t) {
            continue;
        }
        orbit_count += 1;
        visited.insert(start as usize);
        queue.clear();
        queue.push(start);
        let mut head = 0;
        while head < queue.len() {
            decode(queue[head], &mut t);
            head += 1;
            for p in &action.perms {
                for (y, &x) in image.iter_mut().zip(&t) {
                    *y = p[x as usize];
                }
                let code = encode(&image);
                if !visited.put(code as usize) {
                    queue.push(code);
                }
            }
        }
    }
    Ok(KTransitivity {
        k,
        transitive: orbit_count == 1,
        orbit_count,
        tuple_count,
    })
}
