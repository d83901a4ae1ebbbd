//! Word search in products of `G` and explicit move sequences between
//! generating tuples.

mod pipeline;

use std::collections::HashMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::free::Word;
use crate::group::{Elem, FiniteGroup};

pub use pipeline::{connect_basis, connect_stabilizing, ConnectOptions, ConnectResult, Stage};

/// `w(tuple) = target` for the word `w` being searched.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WordConstraint {
    pub tuple: Vec<Elem>,
    pub target: Elem,
}

impl WordConstraint {
    pub fn new(tuple: Vec<Elem>, target: Elem) -> Self {
        WordConstraint { tuple, target }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct FindWordOptions {
    /// Cap on states stored over both search directions.
    pub max_states: u64,
    /// Product orders above this use bidirectional search.
    pub meet_in_middle_above: u64,
}

impl Default for FindWordOptions {
    fn default() -> Self {
        FindWordOptions {
            max_states: 60_000_000,
            meet_in_middle_above: 1 << 22,
        }
    }
}

const UNSEEN: u8 = u8::MAX;

/// `G^K` with elements packed into one integer, coordinate 0 most significant.
struct Product<'g> {
    group: &'g FiniteGroup,
    order: u64,
    size: u64,
    // letters[2j] is x_{j+1}, letters[2j+1] its inverse, as coordinate vectors
    letters: Vec<Vec<Elem>>,
}

impl<'g> Product<'g> {
    fn new(group: &'g FiniteGroup, constraints: &[WordConstraint], rank: usize) -> Result<Self> {
        let order = group.order() as u64;
        let size = order
            .checked_pow(constraints.len() as u32)
            .ok_or_else(|| Error::Budget("product group too large to index".into()))?;
        let mut letters = Vec::with_capacity(2 * rank);
        for j in 0..rank {
            let x: Vec<Elem> = constraints.iter().map(|c| c.tuple[j]).collect();
            let inv = x.iter().map(|&g| group.inv(g)).collect();
            letters.push(x);
            letters.push(inv);
        }
        Ok(Product {
            group,
            order,
            size,
            letters,
        })
    }

    fn encode(&self, v: &[Elem]) -> u64 {
        v.iter().fold(0, |acc, &g| acc * self.order + g as u64)
    }

    fn times(&self, code: u64, letter: usize) -> u64 {
        let mut x = code;
        let mut out = 0;
        let mut place = 1;
        for &g in self.letters[letter].iter().rev() {
            let c = (x % self.order) as Elem;
            x /= self.order;
            out += self.group.mul(c, g) as u64 * place;
            place *= self.order;
        }
        out
    }
}

fn inverse_letter(letter: usize) -> usize {
    letter ^ 1
}

fn signed(letter: usize) -> i32 {
    let j = (letter / 2 + 1) as i32;
    if letter.is_multiple_of(2) {
        j
    } else {
        -j
    }
}

/// Last letter used to reach each state.
enum Parents {
    Dense(Vec<u8>),
    Sparse(HashMap<u64, u8>),
}

impl Parents {
    fn new(size: u64, dense_limit: u64) -> Self {
        if size <= dense_limit {
            Parents::Dense(vec![UNSEEN; size as usize])
        } else {
            Parents::Sparse(HashMap::new())
        }
    }

    fn get(&self, code: u64) -> Option<u8> {
        match self {
            Parents::Dense(v) => Some(v[code as usize]).filter(|&l| l != UNSEEN),
            Parents::Sparse(m) => m.get(&code).copied(),
        }
    }

    /// Records `letter` if `code` is new.
    fn insert(&mut self, code: u64, letter: u8) -> bool {
        match self {
            Parents::Dense(v) => {
                let slot = &mut v[code as usize];
                let fresh = *slot == UNSEEN;
                if fresh {
                    *slot = letter;
                }
                fresh
            }
            Parents::Sparse(m) => match m.entry(code) {
                std::collections::hash_map::Entry::Vacant(e) => {
                    e.insert(letter);
                    true
                }
                _ => false,
            },
        }
    }
}

const DENSE_PARENTS: u64 = 1 << 27;
// Marks the search root.
const ROOT: u8 = u8::MAX - 1;

/// Letters spelling the path to `code`, walking parents back to the root.
/// `forward` paths read root-to-state; backward ones were built from the
/// target by right multiplication with inverse letters.
fn trace(product: &Product<'_>, parents: &Parents, mut code: u64) -> Vec<usize> {
    let mut letters = Vec::new();
    loop {
        let l = parents.get(code).expect("state on a recorded path");
        if l == ROOT {
            break;
        }
        letters.push(l as usize);
        code = product.times(code, inverse_letter(l as usize));
    }
    letters.reverse();
    letters
}

/// A word `w` of rank `m` (the common tuple length) with
/// `w(tuple_i) = target_i` for every constraint.
///
/// Breadth-first search in the product of copies of `G`, one per
/// constraint, starting at the identity and multiplying on the right by the
/// letters `x_1, x_1^-1, x_2, ...` in that order. Below the bidirectional
/// threshold the result is the shortlex-least solution; above it the
/// result is a shortest one.
pub fn find_word(
    group: &FiniteGroup,
    constraints: &[WordConstraint],
    opts: &FindWordOptions,
) -> Result<Word> {
    let rank = constraints.first().map_or(0, |c| c.tuple.len());
    for c in constraints {
        if c.tuple.len() != rank {
            return Err(Error::RankMismatch {
                expected: rank,
                got: c.tuple.len(),
            });
        }
        group.check_elements(&c.tuple)?;
        group.check_element(c.target)?;
    }
    if rank >= 127 {
        return Err(Error::Invalid(
            "word search supports fewer than 127 letters".into(),
        ));
    }
    if constraints.iter().all(|c| c.target == 0) {
        return Ok(Word::identity(rank));
    }
    let product = Product::new(group, constraints, rank)?;
    let targets: Vec<Elem> = constraints.iter().map(|c| c.target).collect();
    let target = product.encode(&targets);
    let letters = if product.size > opts.meet_in_middle_above {
        bidirectional(&product, target, opts)?
    } else {
        forward(&product, target, opts)?
    };
    Word::new(letters.into_iter().map(signed), rank)
}

fn forward(product: &Product<'_>, target: u64, opts: &FindWordOptions) -> Result<Vec<usize>> {
    let mut parents = Parents::new(product.size, DENSE_PARENTS);
    parents.insert(0, ROOT);
    let mut queue = vec![0u64];
    let mut head = 0;
    while head < queue.len() {
        let code = queue[head];
        head += 1;
        for l in 0..product.letters.len() {
            let next = product.times(code, l);
            if parents.insert(next, l as u8) {
                if next == target {
                    return Ok(trace(product, &parents, next));
                }
                queue.push(next);
                if queue.len() as u64 > opts.max_states {
                    return Err(Error::Budget(format!(
                        "word search passed {} states",
                        opts.max_states
                    )));
                }
            }
        }
    }
    Err(Error::Unreachable {
        subgroup_order: queue.len() as u64,
    })
}

fn bidirectional(product: &Product<'_>, target: u64, opts: &FindWordOptions) -> Result<Vec<usize>> {
    let letters = product.letters.len();
    // Forward states are `w(x)`; backward states are `target * v(x)^-1`.
    let mut fwd = Parents::new(product.size, DENSE_PARENTS / 2);
    let mut bwd = Parents::new(product.size, DENSE_PARENTS / 2);
    fwd.insert(0, ROOT);
    bwd.insert(target, ROOT);
    let mut fwd_layer = vec![0u64];
    let mut bwd_layer = vec![target];
    let (mut fwd_total, mut bwd_total) = (1u64, 1u64);
    let (mut df, mut db) = (0usize, 0usize);
    loop {
        let expand_forward = fwd_layer.len() <= bwd_layer.len();
        let (layer, own, other, depth) = if expand_forward {
            (&mut fwd_layer, &mut fwd, &bwd, &mut df)
        } else {
            (&mut bwd_layer, &mut bwd, &fwd, &mut db)
        };
        if layer.is_empty() {
            let subgroup_order = if expand_forward { fwd_total } else { bwd_total };
            return Err(Error::Unreachable { subgroup_order });
        }
        let mut next_layer = Vec::new();
        let mut best: Option<(usize, u64)> = None;
        for &code in layer.iter() {
            for l in 0..letters {
                // Backward steps multiply by the inverse letter.
                let step = if expand_forward { l } else { inverse_letter(l) };
                let next = product.times(code, step);
                if own.insert(next, l as u8) {
                    next_layer.push(next);
                    if other.get(next).is_some() {
                        let other_len = if expand_forward {
                            trace_backward(product, other, next).len()
                        } else {
                            trace(product, other, next).len()
                        };
                        let total = *depth + 1 + other_len;
                        if best.is_none_or(|(t, _)| total < t) {
                            best = Some((total, next));
                        }
                    }
                }
            }
        }
        *depth += 1;
        if expand_forward {
            fwd_total += next_layer.len() as u64;
        } else {
            bwd_total += next_layer.len() as u64;
        }
        *layer = next_layer;
        if fwd_total + bwd_total > opts.max_states {
            return Err(Error::Budget(format!(
                "word search passed {} states",
                opts.max_states
            )));
        }
        if let Some((_, meet)) = best {
            let mut word = trace(product, &fwd, meet);
            let tail = trace_backward(product, &bwd, meet);
            word.extend(tail);
            return Ok(word);
        }
    }
}

/// Letters `v` with `meet * v = target`.
fn trace_backward(product: &Product<'_>, parents: &Parents, mut code: u64) -> Vec<usize> {
    let mut letters = Vec::new();
    loop {
        let l = parents.get(code).expect("state on a recorded path");
        if l == ROOT {
            break;
        }
        // code = prev * l^-1, so prev = code * l
        letters.push(l as usize);
        code = product.times(code, l as usize);
    }
    letters
}

#[cfg(test)]
mod tests {
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::group::load;

    fn satisfies(g: &FiniteGroup, w: &Word, cs: &[WordConstraint]) -> bool {
        cs.iter()
            .all(|c| w.evaluate(g, &c.tuple).unwrap() == c.target)
    }

    #[test]
    fn trivial_cases() {
        let a5 = load("A5").unwrap();
        let w = find_word(
            &a5,
            &[WordConstraint::new(vec![7, 30], 7)],
            &FindWordOptions::default(),
        )
        .unwrap();
        assert_eq!(w.to_string(), "1");
        let w = find_word(
            &a5,
            &[
                WordConstraint::new(vec![7, 30], 0),
                WordConstraint::new(vec![1, 2], 0),
            ],
            &FindWordOptions::default(),
        )
        .unwrap();
        assert!(w.is_identity());
    }

    #[test]
    fn shortlex_least_against_enumeration() {
        let s4 = load("S4").unwrap();
        let cs = [
            WordConstraint::new(vec![5, 13], 11),
            WordConstraint::new(vec![9, 3], 0),
        ];
        let w = find_word(&s4, &cs, &FindWordOptions::default()).unwrap();
        assert!(satisfies(&s4, &w, &cs));
        // Enumerate all words of smaller or equal length in shortlex order.
        let letters = [1, -1, 2, -2];
        let mut layer: Vec<Vec<i32>> = vec![vec![]];
        let mut first = None;
        'outer: for _ in 0..=w.len() {
            for cand in &layer {
                let word = Word::new(cand.clone(), 2).unwrap();
                if word.len() == cand.len() && satisfies(&s4, &word, &cs) {
                    first = Some(word);
                    break 'outer;
                }
            }
            layer = layer
                .iter()
                .flat_map(|p| letters.iter().map(move |&l| [p.as_slice(), &[l]].concat()))
                .collect();
        }
        assert_eq!(first.unwrap(), w);
    }

    #[test]
    fn unreachable_reports_subgroup() {
        let a5 = load("A5").unwrap();
        // Both constraints see the same tuple, so the reachable set is the diagonal.
        let (a, b) = a5.least_generating_pair().unwrap();
        let cs = [
            WordConstraint::new(vec![a, b], 0),
            WordConstraint::new(vec![a, b], 5),
        ];
        match find_word(&a5, &cs, &FindWordOptions::default()) {
            Err(Error::Unreachable { subgroup_order }) => assert_eq!(subgroup_order, 60),
            other => panic!("{other:?}"),
        }
        let mitm = FindWordOptions {
            meet_in_middle_above: 0,
            ..FindWordOptions::default()
        };
        assert!(matches!(
            find_word(&a5, &cs, &mitm),
            Err(Error::Unreachable { subgroup_order: 60 })
        ));
    }

    #[test]
    fn bidirectional_matches_forward_length() {
        let a5 = load("A5").unwrap();
        let mitm = FindWordOptions {
            meet_in_middle_above: 0,
            ..FindWordOptions::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let (a, b) = a5.least_generating_pair().unwrap();
        let c = (0..60)
            .find(|&c| {
                a5.generates(&[a, c])
                    && !a5
                        .automorphisms()
                        .unwrap()
                        .iter()
                        .any(|s| s.apply(a) == a && s.apply(b) == c)
            })
            .unwrap();
        for _ in 0..20 {
            let cs = [
                WordConstraint::new(vec![a, b], rng.gen_range(0..60)),
                WordConstraint::new(vec![a, c], rng.gen_range(0..60)),
            ];
            let x = find_word(&a5, &cs, &FindWordOptions::default()).unwrap();
            let y = find_word(&a5, &cs, &mitm).unwrap();
            assert!(satisfies(&a5, &x, &cs) && satisfies(&a5, &y, &cs));
            assert_eq!(x.len(), y.len());
        }
    }

    #[test]
    fn budget_is_enforced() {
        let a5 = load("A5").unwrap();
        let (a, b) = a5.least_generating_pair().unwrap();
        let cs = [WordConstraint::new(vec![a, b], 17)];
        let tight = FindWordOptions {
            max_states: 3,
            ..FindWordOptions::default()
        };
        assert!(matches!(find_word(&a5, &cs, &tight), Err(Error::Budget(_))));
        let bad = [
            WordConstraint::new(vec![a], 1),
            WordConstraint::new(vec![a, b], 1),
        ];
        assert!(find_word(&a5, &bad, &FindWordOptions::default()).is_err());
    }
}
