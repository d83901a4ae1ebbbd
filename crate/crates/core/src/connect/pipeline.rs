use serde::Serialize;

use super::{find_word, FindWordOptions, WordConstraint};
use crate::error::{Error, Result};
use crate::free::{MoveSequence, NielsenMove, Sign};
use crate::group::{AutGroup, Elem, FiniteGroup};
use crate::tuples::{spread_witness, verify_lemma_matrix, GenMatrix, HallChecker};

#[derive(Clone, Copy, Debug)]
pub struct ConnectOptions {
    pub word: FindWordOptions,
    /// Cap on `|G|^k` for the Hall checks on auxiliary matrices.
    pub closure_budget: u64,
}

impl Default for ConnectOptions {
    fn default() -> Self {
        ConnectOptions {
            word: FindWordOptions::default(),
            closure_budget: 1 << 30,
        }
    }
}

/// One block of consecutive moves and the tuple it leaves behind.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Stage {
    pub label: String,
    /// Half-open range of move indices.
    pub start: usize,
    pub end: usize,
    /// The word substituted into the stage's moves, empty for reorderings.
    pub word: String,
    pub tuple_after: Vec<Elem>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConnectResult {
    pub source: Vec<Elem>,
    pub target: Vec<Elem>,
    #[serde(serialize_with = "move_list")]
    pub moves: MoveSequence,
    pub stages: Vec<Stage>,
    pub verified: bool,
}

fn move_list<S: serde::Serializer>(
    seq: &MoveSequence,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(seq.moves().iter().map(ToString::to_string))
}

fn r(i: usize, j: usize) -> NielsenMove {
    NielsenMove::R {
        i,
        j,
        sign: Sign::Plus,
    }
}

/// Swaps realizing `t'[r] = t[perm[r]]`.
fn permutation_moves(perm: &[usize]) -> Vec<NielsenMove> {
    let mut cur: Vec<usize> = (0..perm.len()).collect();
    let mut moves = Vec::new();
    for r in 0..perm.len() {
        let p = cur.iter().position(|&x| x == perm[r]).unwrap();
        if p != r {
            cur.swap(r, p);
            moves.push(NielsenMove::P { i: r, j: p });
        }
    }
    moves
}

/// Accumulates moves and stage boundaries while tracking the tuples they
/// act on (one tuple per tracked column).
struct Builder<'g> {
    group: &'g FiniteGroup,
    moves: MoveSequence,
    stages: Vec<Stage>,
    tuples: Vec<Vec<Elem>>,
}

impl<'g> Builder<'g> {
    fn new(group: &'g FiniteGroup, rank: usize, tuples: Vec<Vec<Elem>>) -> Self {
        Builder {
            group,
            moves: MoveSequence::new(rank),
            stages: Vec::new(),
            tuples,
        }
    }

    fn current(&self) -> &[Elem] {
        self.tuples.last().unwrap()
    }

    fn push(
        &mut self,
        label: impl Into<String>,
        moves: Vec<NielsenMove>,
        word: String,
    ) -> Result<()> {
        let start = self.moves.len();
        for m in moves {
            self.moves.push(m)?;
            for t in &mut self.tuples {
                m.act(self.group, t);
            }
        }
        self.stages.push(Stage {
            label: label.into(),
            start,
            end: self.moves.len(),
            word,
            tuple_after: self.current().to_vec(),
        });
        Ok(())
    }

    /// Rewrites slot `slot` of the tracked last tuple to `target` using the
    /// slots in `via`, leaving every other tracked tuple unchanged.
    fn rewrite(
        &mut self,
        label: &str,
        slot: usize,
        via: &[usize],
        target: Elem,
        opts: &FindWordOptions,
    ) -> Result<()> {
        let last = self.tuples.len() - 1;
        let constraints: Vec<WordConstraint> = self
            .tuples
            .iter()
            .enumerate()
            .map(|(c, t)| {
                let wanted = if c == last {
                    self.group.mul(self.group.inv(t[slot]), target)
                } else {
                    0
                };
                WordConstraint::new(via.iter().map(|&v| t[v]).collect(), wanted)
            })
            .collect();
        let w = find_word(self.group, &constraints, opts)?;
        let letters: Vec<NielsenMove> = via.iter().map(|&v| r(slot, v)).collect();
        let seq = MoveSequence::from_word(self.moves.rank(), &w, &letters)?;
        self.push(label, seq.moves().to_vec(), w.to_string())
    }

    fn finish(
        self,
        source: Vec<Elem>,
        target: Vec<Elem>,
        fixed: &[Vec<Elem>],
    ) -> Result<ConnectResult> {
        // Replay from scratch rather than trusting the tracked tuples.
        let mut verified = self.moves.apply(self.group, &source)? == target;
        for col in fixed {
            verified &= &self.moves.apply(self.group, col)? == col;
        }
        Ok(ConnectResult {
            source,
            target,
            moves: self.moves,
            stages: self.stages,
            verified,
        })
    }
}

fn first_generating_pair(group: &FiniteGroup, t: &[Elem]) -> Option<(usize, usize)> {
    (0..t.len())
        .flat_map(|i| (i + 1..t.len()).map(move |j| (i, j)))
        .find(|&(i, j)| group.generates_pair(t[i], t[j]))
}

/// Swaps bringing positions `i < j` to the front.
fn front_pair_moves(n: usize, (i, j): (usize, usize)) -> Vec<NielsenMove> {
    let mut perm: Vec<usize> = vec![i, j];
    perm.extend((0..n).filter(|&x| x != i && x != j));
    permutation_moves(&perm)
}

fn check_generating(group: &FiniteGroup, t: &[Elem]) -> Result<()> {
    group.check_elements(t)?;
    if !group.generates(t) {
        return Err(Error::Invalid(format!("{t:?} does not generate the group")));
    }
    Ok(())
}

/// Moves taking the generating tuple `g` exactly to `h`.
///
/// After bringing a generating pair of each tuple to the front, an element
/// `z` generating with both `g_2` and `h_1` is written into slot 3, then
/// slots 1, 2 and finally 3..n are rewritten one at a time, each through a
/// word in right multiplications by two slots that already generate.
pub fn connect_basis(
    group: &FiniteGroup,
    g: &[Elem],
    h: &[Elem],
    opts: &ConnectOptions,
) -> Result<ConnectResult> {
    let n = g.len();
    if n < 3 {
        return Err(Error::Invalid(format!("rank {n} below 3")));
    }
    if h.len() != n {
        return Err(Error::RankMismatch {
            expected: n,
            got: h.len(),
        });
    }
    check_generating(group, g)?;
    check_generating(group, h)?;
    let mut b = Builder::new(group, n, vec![g.to_vec()]);
    if g == h {
        return b.finish(g.to_vec(), h.to_vec(), &[]);
    }
    let gp = first_generating_pair(group, g).ok_or_else(|| Error::NoGeneratingPair(g.to_vec()))?;
    let hp = first_generating_pair(group, h).ok_or_else(|| Error::NoGeneratingPair(h.to_vec()))?;
    b.push("reorder source", front_pair_moves(n, gp), String::new())?;
    let h_moves = front_pair_moves(n, hp);
    let mut hh = h.to_vec();
    for m in &h_moves {
        m.act(group, &mut hh);
    }
    let cur = b.current().to_vec();
    let z = spread_witness(group, &[cur[1], hh[0]])
        .ok_or_else(|| Error::NoSpreadWitness(vec![cur[1], hh[0]]))?;
    b.rewrite("slot 3 <- z", 2, &[0, 1], z, &opts.word)?;
    b.rewrite("slot 1 <- h1", 0, &[1, 2], hh[0], &opts.word)?;
    b.rewrite("slot 2 <- h2", 1, &[0, 2], hh[1], &opts.word)?;
    for t in 2..n {
        b.rewrite(
            &format!("slot {} <- h{}", t + 1, t + 1),
            t,
            &[0, 1],
            hh[t],
            &opts.word,
        )?;
    }
    let undo: Vec<NielsenMove> = h_moves.iter().rev().copied().collect();
    b.push("restore target order", undo, String::new())?;
    b.finish(g.to_vec(), h.to_vec(), &[])
}

/// Next permutation in lexicographic order, in place.
fn next_permutation(p: &mut [usize]) -> bool {
    let Some(i) = (1..p.len()).rev().find(|&i| p[i - 1] < p[i]) else {
        return false;
    };
    let j = (i..p.len()).rev().find(|&j| p[j] > p[i - 1]).unwrap();
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

/// `{σ(col[c]) : σ(col[a]) = x, σ(col[b]) = y}` over the given columns.
fn images_forced(
    auts: &AutGroup,
    cols: &[Vec<Elem>],
    (a, x): (usize, Elem),
    (b, y): (usize, Elem),
    c: usize,
) -> Vec<Elem> {
    cols.iter()
        .filter_map(|col| {
            auts.iter()
                .find(|s| s.apply(col[a]) == x && s.apply(col[b]) == y)
                .map(|s| s.apply(col[c]))
        })
        .collect()
}

/// The admissible `z` for permuted columns `cols` and target `h`, if any:
/// least by id such that the three auxiliary matrices (rows 2,3 / 1,3 /
/// 1,2 of the fixed columns over row 4, last column `(g2,g3,z)`,
/// `(h1,g3,z)`, `(h1,h2,z)`) have generating columns in distinct classes.
fn choose_z(
    group: &FiniteGroup,
    auts: &AutGroup,
    fixed: &[Vec<Elem>],
    g: &[Elem],
    h: &[Elem],
) -> Option<Elem> {
    let mut bad = images_forced(auts, fixed, (1, g[1]), (2, g[2]), 3);
    if group.generates_pair(h[0], g[2]) {
        bad.extend(images_forced(auts, fixed, (0, h[0]), (2, g[2]), 3));
    }
    bad.extend(images_forced(auts, fixed, (0, h[0]), (1, h[1]), 3));
    group.elements().find(|&z| {
        !bad.contains(&z)
            && group.generates(&[g[1], g[2], z])
            && group.generates(&[h[0], g[2], z])
            && group.generates(&[h[0], h[1], z])
    })
}

/// Moves sending the last column of `a` exactly to `h` while fixing every
/// other column exactly, for a matrix passing [`verify_lemma_matrix`].
///
/// Rows of the matrix (and entries of `h`) are first rearranged by the
/// lexicographically least permutation for which `<h_1, h_2> = G`, the
/// last column's first three rows can move to `(h_1, h_2, h_3)` without
/// colliding with another column's class, and an admissible `z` exists.
/// Then slot 4 becomes `z`, slots 1, 2, 3 become `h_1, h_2, h_3`, and the
/// remaining slots follow; every stage word is trivial on the fixed
/// columns. The rearrangement is undone at the end.
pub fn connect_stabilizing(
    group: &FiniteGroup,
    a: &GenMatrix,
    h: &[Elem],
    opts: &ConnectOptions,
) -> Result<ConnectResult> {
    a.check(group)?;
    let (n, k) = (a.rows(), a.cols());
    if h.len() != n {
        return Err(Error::RankMismatch {
            expected: n,
            got: h.len(),
        });
    }
    check_generating(group, h)?;
    verify_lemma_matrix(group, a, opts.closure_budget)?;
    let columns = a.columns();
    let source = columns[k - 1].clone();
    if k == 1 {
        return connect_basis(group, &source, h, opts);
    }
    let fixed = &columns[..k - 1];
    let auts = group.automorphisms()?;
    let target_class = auts.canonical(h);
    if fixed.iter().any(|c| auts.canonical(c) == target_class) {
        return Err(Error::Invalid(
            "target lies in the class of a fixed column".into(),
        ));
    }
    let mut hall = HallChecker::new(group, k, opts.closure_budget)?;
    let mut perm: Vec<usize> = (0..n).collect();
    let mut passed_rearrangement = false;
    let chosen = loop {
        let permute = |t: &[Elem]| -> Vec<Elem> { perm.iter().map(|&p| t[p]).collect() };
        let pf: Vec<Vec<Elem>> = fixed.iter().map(|c| permute(c)).collect();
        let ph = permute(h);
        let pg = permute(&source);
        if group.generates_pair(ph[0], ph[1]) {
            let head = auts.canonical(&ph[..3]);
            if pf.iter().all(|c| auts.canonical(&c[..3]) != head) {
                passed_rearrangement = true;
                if let Some(z) = choose_z(group, &auts, &pf, &pg, &ph) {
                    break Some((perm.clone(), pf, pg, ph, z));
                }
            }
        }
        if !next_permutation(&mut perm) {
            break None;
        }
    };
    let Some((perm, pf, pg, ph, z)) = chosen else {
        return Err(if passed_rearrangement {
            Error::NoAdmissibleZ
        } else {
            Error::ForbiddenConfiguration
        });
    };
    // Re-check the auxiliary matrices the stage words rely on.
    for (rows, last) in [
        ([1, 2, 3], [pg[1], pg[2], z]),
        ([0, 2, 3], [ph[0], pg[2], z]),
        ([0, 1, 3], [ph[0], ph[1], z]),
        ([0, 1, 2], [ph[0], ph[1], ph[2]]),
    ] {
        let mut cols: Vec<Vec<Elem>> = pf
            .iter()
            .map(|c| rows.iter().map(|&r| c[r]).collect())
            .collect();
        cols.push(last.to_vec());
        let report = hall.check(&GenMatrix::from_columns(group, &cols)?)?;
        if !(report.columns_generate && report.classes_distinct) {
            return Err(Error::Internal(format!(
                "auxiliary matrix on rows {rows:?} fails"
            )));
        }
    }
    let mut tracked = fixed.to_vec();
    tracked.push(source.clone());
    let mut b = Builder::new(group, n, tracked);
    b.push("rearrange rows", permutation_moves(&perm), String::new())?;
    debug_assert_eq!(b.current(), pg.as_slice());
    b.rewrite("slot 4 <- z", 3, &[0, 1, 2], z, &opts.word)?;
    b.rewrite("slot 1 <- h1", 0, &[1, 2, 3], ph[0], &opts.word)?;
    b.rewrite("slot 2 <- h2", 1, &[0, 2, 3], ph[1], &opts.word)?;
    b.rewrite("slot 3 <- h3", 2, &[0, 1, 3], ph[2], &opts.word)?;
    for t in 3..n {
        b.rewrite(
            &format!("slot {} <- h{}", t + 1, t + 1),
            t,
            &[0, 1, 2],
            ph[t],
            &opts.word,
        )?;
    }
    let mut inverse = vec![0; n];
    for (r, &p) in perm.iter().enumerate() {
        inverse[p] = r;
    }
    b.push(
        "restore row order",
        permutation_moves(&inverse),
        String::new(),
    )?;
    b.finish(source, h.to_vec(), fixed)
}

#[cfg(test)]
mod tests {
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::group::load;
    use crate::tuples::{build_matrix, MatrixOptions};

    fn random_generating(g: &FiniteGroup, n: usize, rng: &mut ChaCha8Rng) -> Vec<Elem> {
        loop {
            let t: Vec<Elem> = (0..n)
                .map(|_| rng.gen_range(0..g.order() as Elem))
                .collect();
            if g.generates(&t) {
                return t;
            }
        }
    }

    #[test]
    fn permutation_moves_realize_permutation() {
        let s4 = load("S4").unwrap();
        let perm = [2, 0, 3, 1];
        let t = [5, 6, 7, 8];
        let seq = MoveSequence::from_moves(4, permutation_moves(&perm)).unwrap();
        assert_eq!(seq.apply(&s4, &t).unwrap(), vec![7, 5, 8, 6]);
        let mut p = vec![0, 1, 2];
        let mut all = vec![p.clone()];
        while next_permutation(&mut p) {
            all.push(p.clone());
        }
        assert_eq!(all.len(), 6);
        assert!(all.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn basis_identity_and_random() {
        let a5 = load("A5").unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let g = random_generating(&a5, 3, &mut rng);
        let same = connect_basis(&a5, &g, &g, &ConnectOptions::default()).unwrap();
        assert!(same.verified && same.moves.is_empty());
        for _ in 0..5 {
            let g = random_generating(&a5, 3, &mut rng);
            let h = random_generating(&a5, 4, &mut rng);
            let g4 = [g.clone(), vec![0]].concat();
            let res = connect_basis(&a5, &g4, &h, &ConnectOptions::default()).unwrap();
            assert!(res.verified);
            assert_eq!(res.moves.apply(&a5, &g4).unwrap(), h);
        }
    }

    #[test]
    fn basis_rejects_pairless_target() {
        // Triples of involutions in A5 whose pairs generate dihedral groups.
        let a5 = load("A5").unwrap();
        let inv: Vec<Elem> = a5
            .elements()
            .filter(|&x| a5.element_order(x) == 2)
            .collect();
        let mut h = None;
        'outer: for &x in &inv {
            for &y in &inv {
                for &z in &inv {
                    if a5.generates(&[x, y, z]) {
                        h = Some(vec![x, y, z]);
                        break 'outer;
                    }
                }
            }
        }
        let h = h.unwrap();
        let g = vec![
            0,
            a5.least_generating_pair().unwrap().0,
            a5.least_generating_pair().unwrap().1,
        ];
        assert!(matches!(
            connect_basis(&a5, &g, &h, &ConnectOptions::default()),
            Err(Error::NoGeneratingPair(_))
        ));
    }

    #[test]
    fn stabilizing_on_psl27() {
        let g = load("PSL2(7)").unwrap();
        let (a, _) = build_matrix(&g, 4, 3, &MatrixOptions::default()).unwrap();
        let auts = g.automorphisms().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let fixed: Vec<Vec<Elem>> = a.columns()[..2].to_vec();
        let mut done = 0;
        while done < 3 {
            let h = random_generating(&g, 4, &mut rng);
            if fixed
                .iter()
                .any(|c| auts.canonical(c) == auts.canonical(&h))
            {
                continue;
            }
            let res = connect_stabilizing(&g, &a, &h, &ConnectOptions::default()).unwrap();
            assert!(res.verified);
            for c in &fixed {
                assert_eq!(&res.moves.apply(&g, c).unwrap(), c);
            }
            assert_eq!(res.moves.apply(&g, &a.column(2)).unwrap(), h);
            done += 1;
        }
    }

    #[test]
    fn stabilizing_rejects_bad_matrices() {
        let a5 = load("A5").unwrap();
        let (a, _) = build_matrix(&a5, 4, 1, &MatrixOptions::default()).unwrap();
        let col = a.column(0);
        let dup = GenMatrix::from_columns(&a5, &[col.clone(), col.clone()]).unwrap();
        let h = vec![col[1], col[0], col[2], col[3]];
        assert!(matches!(
            connect_stabilizing(&a5, &dup, &h, &ConnectOptions::default()),
            Err(Error::Verification(_))
        ));
        // One column: behaves as the basis pipeline.
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let h = random_generating(&a5, 4, &mut rng);
        let res = connect_stabilizing(&a5, &a, &h, &ConnectOptions::default()).unwrap();
        assert!(res.verified);
    }
}
