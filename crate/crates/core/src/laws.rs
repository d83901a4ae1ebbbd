//! Two-letter laws and the word constructions built from them.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::free::{is_inner, MoveSequence, NielsenMove, Sign, Word};
use crate::group::{Elem, FiniteGroup};

/// Letters of `F_2` in enumeration order: `x1 < x1^-1 < x2 < x2^-1`.
pub const LETTER_ORDER: [i32; 4] = [1, -1, 2, -2];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LawDomain {
    AllPairs,
    GeneratingPairs,
}

#[derive(Clone, Debug, Serialize)]
pub struct LawReport {
    pub group: String,
    pub word: Word,
    pub domain: LawDomain,
    /// Number of pairs the word was evaluated on.
    pub verified_on: u64,
    pub max_len: usize,
}

impl LawReport {
    /// Re-evaluates the word on every pair of the domain.
    pub fn reverify(&self, group: &FiniteGroup) -> bool {
        domain_pairs(group, self.domain)
            .iter()
            .all(|&(a, b)| self.word.evaluate_unchecked(group, &[a, b]) == 0)
    }
}

fn domain_pairs(group: &FiniteGroup, domain: LawDomain) -> Vec<(Elem, Elem)> {
    let mut pairs = Vec::new();
    for a in group.elements() {
        for b in group.elements() {
            if domain == LawDomain::AllPairs || group.generates_pair(a, b) {
                pairs.push((a, b));
            }
        }
    }
    pairs
}

/// The least nontrivial reduced word of length at most `max_len`, in
/// length-then-lex order, vanishing on all of `G^2`.
pub fn find_two_letter_law(group: &FiniteGroup, max_len: usize) -> Option<LawReport> {
    find_law_on(group, max_len, LawDomain::AllPairs)
}

/// As [`find_two_letter_law`], but only generating pairs must satisfy it.
pub fn find_law_on_generating_pairs(group: &FiniteGroup, max_len: usize) -> Option<LawReport> {
    find_law_on(group, max_len, LawDomain::GeneratingPairs)
}

/// Words of each length are split by their first two letters and searched
/// in parallel; the least hit in enumeration order wins.
pub fn find_law_on(group: &FiniteGroup, max_len: usize, domain: LawDomain) -> Option<LawReport> {
    let pairs = domain_pairs(group, domain);
    let (xs, ys): (Vec<Elem>, Vec<Elem>) = pairs.iter().copied().unzip();
    let inv = |v: &[Elem]| -> Vec<Elem> { v.iter().map(|&x| group.inv(x)).collect() };
    let values = [xs.clone(), inv(&xs), ys.clone(), inv(&ys)];
    let identity = vec![0 as Elem; pairs.len()];
    let extend = |prefix: &[Elem], li: usize| -> Vec<Elem> {
        prefix
            .iter()
            .zip(&values[li])
            .map(|(&p, &v)| group.mul(p, v))
            .collect()
    };
    for len in 1..=max_len {
        let mut shards: Vec<Vec<i32>> = vec![vec![]];
        for _ in 0..len.min(2) {
            shards = shards
                .iter()
                .flat_map(|p| {
                    LETTER_ORDER
                        .into_iter()
                        .filter(|&x| p.last() != Some(&-x))
                        .map(move |x| [p.as_slice(), &[x]].concat())
                })
                .collect();
        }
        let hit = shards.par_iter().find_map_first(|shard| {
            let mut prefix = identity.clone();
            for &x in shard {
                let li = LETTER_ORDER.iter().position(|&l| l == x).unwrap();
                prefix = extend(&prefix, li);
            }
            let mut word = shard.clone();
            if word.len() == len {
                return prefix.iter().all(|&x| x == 0).then_some(word);
            }
            let mut stack = vec![prefix];
            search(group, &values, len, &mut word, &mut stack)
        });
        if let Some(w) = hit {
            return Some(LawReport {
                group: group.spec().to_string(),
                word: Word::new(w, 2).expect("letters lie in F_2"),
                domain,
                verified_on: pairs.len() as u64,
                max_len,
            });
        }
    }
    None
}

/// Depth-first over reduced words of exactly `len` letters extending
/// `word`; `stack` holds the prefix values on every pair.
fn search(
    group: &FiniteGroup,
    values: &[Vec<Elem>; 4],
    len: usize,
    word: &mut Vec<i32>,
    stack: &mut Vec<Vec<Elem>>,
) -> Option<Vec<i32>> {
    for (li, &letter) in LETTER_ORDER.iter().enumerate() {
        if word.last() == Some(&-letter) {
            continue;
        }
        let prefix = stack.last().unwrap();
        let next: Vec<Elem> = prefix
            .iter()
            .zip(&values[li])
            .map(|(&p, &v)| group.mul(p, v))
            .collect();
        word.push(letter);
        if word.len() == len {
            if next.iter().all(|&x| x == 0) {
                return Some(word.clone());
            }
        } else {
            stack.push(next);
            if let Some(w) = search(group, values, len, word, stack) {
                return Some(w);
            }
            stack.pop();
        }
        word.pop();
    }
    None
}

/// `v = w z w^-1 z^-1` with `z` the first letter in [`LETTER_ORDER`] that
/// differs from `z_1^-1`, `z_n` and `z_n^-1`, where `w = z_1 ... z_n`.
/// The product is already reduced.
pub fn strengthen_on_generating_pairs(w: &Word) -> Result<Word> {
    if w.is_identity() {
        return Err(Error::Invalid("trivial word".into()));
    }
    if w.rank() > 2 {
        return Err(Error::RankMismatch {
            expected: 2,
            got: w.rank(),
        });
    }
    let l = w.letters();
    let (first, last) = (l[0], l[l.len() - 1]);
    let z = LETTER_ORDER
        .into_iter()
        .find(|&z| z != -first && z != last && z != -last)
        .expect("three exclusions leave a letter");
    let mut letters = l.to_vec();
    letters.push(z);
    letters.extend(l.iter().rev().map(|&x| -x));
    letters.push(-z);
    let v = Word::new(letters, 2)?;
    debug_assert_eq!(v.len(), 2 * w.len() + 2);
    Ok(v)
}

/// A homomorphism `F_m -> F_2` (images of `x_1..x_m`) and the image of the
/// reduced word.
#[derive(Clone, Debug, Serialize)]
pub struct TwoLetterReduction {
    pub images: Vec<Word>,
    pub word: Word,
    pub trials: u64,
}

/// Searches for a substitution `x_i -> u_i` into `F_2` under which `w`
/// stays nontrivial: first `x_1, x_2` kept and the rest sent to `e`, then
/// random words of length `1..=max_sub_len`. `None` after `trials` misses.
pub fn reduce_law_to_two_letters(
    w: &Word,
    trials: u64,
    max_sub_len: usize,
    seed: u64,
) -> Result<Option<TwoLetterReduction>> {
    if w.is_identity() {
        return Err(Error::Invalid("trivial word".into()));
    }
    if w.rank() <= 2 {
        return Ok(Some(TwoLetterReduction {
            images: Word::basis(2)[..w.rank()].to_vec(),
            word: w.with_rank(2)?,
            trials: 0,
        }));
    }
    let m = w.rank();
    let projection: Vec<Word> = (1..=m)
        .map(|i| {
            if i <= 2 {
                Word::generator(i, 2)
            } else {
                Word::identity(2)
            }
        })
        .collect();
    let image = w.substitute(&projection)?.with_rank(2)?;
    if !image.is_identity() {
        return Ok(Some(TwoLetterReduction {
            images: projection,
            word: image,
            trials: 1,
        }));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let max_sub_len = max_sub_len.max(1);
    for t in 0..trials {
        let images: Vec<Word> = (0..m)
            .map(|_| {
                let len = rng.gen_range(1..=max_sub_len);
                let mut letters: Vec<i32> = Vec::with_capacity(len);
                while letters.len() < len {
                    let x = LETTER_ORDER[rng.gen_range(0..4)];
                    if letters.last() != Some(&-x) {
                        letters.push(x);
                    }
                }
                Word::new(letters, 2).expect("letters lie in F_2")
            })
            .collect();
        let image = w.substitute(&images)?.with_rank(2)?;
        if !image.is_identity() {
            return Ok(Some(TwoLetterReduction {
                images,
                word: image,
                trials: t + 2,
            }));
        }
    }
    Ok(None)
}

#[derive(Clone, Copy, Debug)]
pub struct KernelOptions {
    /// Largest `|G|^n` checked exhaustively; above it tuples are sampled.
    pub exhaustive_budget: u64,
    pub samples: u64,
    pub seed: u64,
}

impl Default for KernelOptions {
    fn default() -> Self {
        KernelOptions {
            exhaustive_budget: 1 << 24,
            samples: 100_000,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct KernelElement {
    #[serde(serialize_with = "move_list")]
    pub moves: MoveSequence,
    pub symbolic: Vec<Word>,
    pub non_inner: bool,
    pub acts_trivially: bool,
    /// False when the triviality check sampled tuples instead of covering `G^n`.
    pub exhaustive: bool,
    pub tuples_checked: u64,
    /// A tuple moved by the sequence, if one was found.
    pub moved_tuple: Option<Vec<Elem>>,
}

fn move_list<S: serde::Serializer>(
    seq: &MoveSequence,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(seq.moves().iter().map(ToString::to_string))
}

/// `w(R_{n,1}, R_{n,2})`, acting as `x_n -> x_n w(x_1, x_2)`, together with
/// whether it moves any tuple of `G^n`.
pub fn kernel_element(
    group: &FiniteGroup,
    w: &Word,
    n: usize,
    opts: &KernelOptions,
) -> Result<KernelElement> {
    if w.is_identity() {
        return Err(Error::Invalid("trivial word".into()));
    }
    if w.rank() > 2 {
        return Err(Error::RankMismatch {
            expected: 2,
            got: w.rank(),
        });
    }
    if n < 3 {
        return Err(Error::Invalid(format!("rank {n} below 3")));
    }
    let r = |j| NielsenMove::R {
        i: n - 1,
        j,
        sign: Sign::Plus,
    };
    let moves = MoveSequence::from_word(n, w, &[r(0), r(1)])?;
    let symbolic = moves.symbolic_images();
    let basis = Word::basis(n);
    let mut expected = basis.clone();
    expected[n - 1] = basis[n - 1].multiply(&w.substitute(&basis[..w.rank()])?);
    if symbolic != expected {
        return Err(Error::Internal(
            "kernel element images differ from x_n w(x_1, x_2)".into(),
        ));
    }
    let non_inner = !is_inner(&symbolic);

    let order = group.order() as u64;
    let space = (0..n).try_fold(1u64, |acc, _| acc.checked_mul(order));
    let mut tuple = vec![0 as Elem; n];
    let mut image = vec![0 as Elem; n];
    let moved = |t: &[Elem], image: &mut Vec<Elem>| {
        image.copy_from_slice(t);
        moves.act(group, image);
        image.as_slice() != t
    };
    let (exhaustive, mut checked, mut moved_tuple) = (
        space.is_some_and(|s| s <= opts.exhaustive_budget),
        0u64,
        None,
    );
    if exhaustive {
        loop {
            checked += 1;
            if moved(&tuple, &mut image) {
                moved_tuple = Some(tuple.clone());
                break;
            }
            let Some(pos) = tuple.iter().rposition(|&x| (x as u64) + 1 < order) else {
                break;
            };
            tuple[pos] += 1;
            tuple[pos + 1..].iter_mut().for_each(|x| *x = 0);
        }
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        for _ in 0..opts.samples {
            tuple
                .iter_mut()
                .for_each(|x| *x = rng.gen_range(0..order) as Elem);
            checked += 1;
            if moved(&tuple, &mut image) {
                moved_tuple = Some(tuple.clone());
                break;
            }
        }
    }
    Ok(KernelElement {
        moves,
        symbolic,
        non_inner,
        acts_trivially: moved_tuple.is_none(),
        exhaustive,
        tuples_checked: checked,
        moved_tuple,
    })
}

/// The three words `w_1^u, w_2^u, w_3^u` in `F_2 = <x, y>` built from the
/// first three coordinates `a_1, a_2, a_3` of an endomorphism of `F_3`:
///
/// - `w_3^u = u(a_1(x,y,U), a_2(x,y,U)) a_3(x,y,U)^-1`
/// - `w_2^u = u(a_1(x,U,y), a_3(x,U,y)) a_2(x,U,y)^-1`
/// - `w_1^u = u(a_2(U,x,y), a_3(U,x,y)) a_1(U,x,y)^-1`
///
/// with `U = u(x, y)`. Returned in the order `w_1, w_2, w_3`.
pub fn permuted_law_words(images: &[Word], u: &Word) -> Result<[Word; 3]> {
    if images.len() != 3 {
        return Err(Error::RankMismatch {
            expected: 3,
            got: images.len(),
        });
    }
    if let Some(bad) = images.iter().find(|a| a.rank() > 3) {
        return Err(Error::RankMismatch {
            expected: 3,
            got: bad.rank(),
        });
    }
    if u.rank() > 2 {
        return Err(Error::RankMismatch {
            expected: 2,
            got: u.rank(),
        });
    }
    let a: Vec<Word> = images
        .iter()
        .map(|w| w.with_rank(3))
        .collect::<Result<_>>()?;
    let u = u.with_rank(2)?;
    let (x, y) = (Word::generator(1, 2), Word::generator(2, 2));
    let big_u = u.substitute(&[x.clone(), y.clone()])?;
    let at = |i: usize, args: &[Word; 3]| -> Result<Word> { a[i].substitute(args)?.with_rank(2) };
    let build = |args: [Word; 3], p: usize, q: usize, r: usize| -> Result<Word> {
        let lhs = u.substitute(&[at(p, &args)?, at(q, &args)?])?;
        lhs.multiply(&at(r, &args)?.inverse()).with_rank(2)
    };
    let w3 = build([x.clone(), y.clone(), big_u.clone()], 0, 1, 2)?;
    let w2 = build([x.clone(), big_u.clone(), y.clone()], 0, 2, 1)?;
    let w1 = build([big_u, x, y], 1, 2, 0)?;
    Ok([w1, w2, w3])
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;
    use crate::group::load;

    fn w(s: &str) -> Word {
        Word::parse(s, 2).unwrap()
    }

    /// All reduced words in `F_2` of length `1..=max` in enumeration order.
    fn all_words(max: usize) -> Vec<Word> {
        let mut out = Vec::new();
        let mut layer: Vec<Vec<i32>> = vec![vec![]];
        for _ in 0..max {
            let mut next = Vec::new();
            for p in &layer {
                for x in LETTER_ORDER {
                    if p.last() != Some(&-x) {
                        let mut q = p.clone();
                        q.push(x);
                        next.push(q);
                    }
                }
            }
            out.extend(next.iter().map(|l| Word::new(l.clone(), 2).unwrap()));
            layer = next;
        }
        out
    }

    /// Independent law test: direct evaluation on every pair.
    fn vanishes(g: &FiniteGroup, word: &Word, generating_only: bool) -> bool {
        g.elements().all(|a| {
            g.elements().all(|b| {
                (generating_only && !g.generates_pair(a, b))
                    || word.evaluate(g, &[a, b]).unwrap() == 0
            })
        })
    }

    #[test]
    fn laws_of_small_groups() {
        let t = load("C1").unwrap();
        assert_eq!(find_two_letter_law(&t, 3).unwrap().word, w("1"));
        let v4 = load("C2xC2").unwrap();
        let r = find_two_letter_law(&v4, 4).unwrap();
        assert_eq!(r.word, w("1 1"));
        assert!(r.reverify(&v4));
        assert_eq!(r.verified_on, 16);
        let s3 = load("S3").unwrap();
        let r = find_two_letter_law(&s3, 6).unwrap();
        assert!(r.reverify(&s3));
        let expected = all_words(6)
            .into_iter()
            .find(|x| vanishes(&s3, x, false))
            .unwrap();
        assert_eq!(r.word, expected);
    }

    #[test]
    fn generating_pair_laws_match_enumeration() {
        for spec in ["S3", "Q8", "C3xC3"] {
            let g = load(spec).unwrap();
            let r = find_law_on_generating_pairs(&g, 4);
            let expected = all_words(4).into_iter().find(|x| vanishes(&g, x, true));
            assert_eq!(r.as_ref().map(|r| r.word.clone()), expected, "{spec}");
            if let Some(r) = r {
                assert!(r.reverify(&g));
            }
        }
    }

    #[test]
    fn thread_count_does_not_change_the_law() {
        let q8 = load("Q8").unwrap();
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| find_law_on_generating_pairs(&q8, 6).map(|r| r.word))
        };
        let one = run(1);
        assert!(one.is_some());
        assert_eq!(one, run(4));
    }

    #[test]
    fn a5_has_no_short_law() {
        let a5 = load("A5").unwrap();
        assert!(find_two_letter_law(&a5, 5).is_none());
    }

    #[test]
    fn strengthen_examples() {
        assert_eq!(
            strengthen_on_generating_pairs(&w("1")).unwrap(),
            w("1 2 -1 -2")
        );
        assert_eq!(
            strengthen_on_generating_pairs(&w("1 2")).unwrap(),
            w("1 2 1 -2 -1 -1")
        );
        assert!(strengthen_on_generating_pairs(&Word::identity(2)).is_err());
    }

    /// In groups whose proper subgroups are cyclic, a word vanishing on
    /// generating pairs yields a strengthened word vanishing everywhere.
    #[test]
    fn strengthening_covers_all_pairs() {
        for spec in ["S3", "Q8", "C3xC3"] {
            let g = load(spec).unwrap();
            let mut found = 0;
            for word in all_words(6) {
                if vanishes(&g, &word, true) {
                    let v = strengthen_on_generating_pairs(&word).unwrap();
                    assert!(vanishes(&g, &v, false), "{spec} {word}");
                    found += 1;
                }
            }
            assert!(found > 0, "{spec}");
        }
    }

    #[test]
    fn reduction_examples() {
        let w2 = w("1 2 -1");
        assert_eq!(
            reduce_law_to_two_letters(&w2, 10, 3, 0)
                .unwrap()
                .unwrap()
                .word,
            w2
        );
        let c = Word::parse("1 2 -1 -2", 3).unwrap();
        let r = reduce_law_to_two_letters(&c, 10, 3, 0).unwrap().unwrap();
        assert_eq!(r.word, w("1 2 -1 -2"));
        let x = |i| Word::generator(i, 3);
        let nested = x(1).commutator(&x(2)).commutator(&x(1).commutator(&x(3)));
        let r = reduce_law_to_two_letters(&nested, 10_000, 3, 7)
            .unwrap()
            .unwrap();
        assert!(!r.word.is_identity());
        assert_eq!(
            nested.substitute(&r.images).unwrap().with_rank(2).unwrap(),
            r.word
        );
    }

    #[test]
    fn kernel_examples() {
        let opts = KernelOptions::default();
        let v4 = load("C2xC2").unwrap();
        let k = kernel_element(&v4, &w("1 2 -1 -2"), 4, &opts).unwrap();
        let x = |i| Word::generator(i, 4);
        assert_eq!(
            k.symbolic,
            vec![x(1), x(2), x(3), x(4).multiply(&x(1).commutator(&x(2)))]
        );
        assert!(k.non_inner && k.acts_trivially && k.exhaustive);
        assert_eq!(k.tuples_checked, 256);
        let s3 = load("S3").unwrap();
        let k = kernel_element(&s3, &Word::parse("1 1 1 1 1 1", 1).unwrap(), 3, &opts).unwrap();
        assert!(k.acts_trivially && k.non_inner);
        assert_eq!(k.tuples_checked, 216);
        let c3 = load("C3").unwrap();
        assert!(
            kernel_element(&c3, &w("1 1 1"), 3, &opts)
                .unwrap()
                .acts_trivially
        );
        let a5 = load("A5").unwrap();
        let k = kernel_element(&a5, &w("1 2 -1 -2"), 3, &opts).unwrap();
        assert!(!k.acts_trivially);
        let t = k.moved_tuple.unwrap();
        assert_ne!(a5.mul(t[0], t[1]), a5.mul(t[1], t[0]));
        assert!(kernel_element(&a5, &Word::identity(2), 3, &opts).is_err());
        assert!(kernel_element(&a5, &w("1"), 2, &opts).is_err());
    }

    #[test]
    fn kernel_sampling_is_flagged() {
        let a5 = load("A5").unwrap();
        let opts = KernelOptions {
            exhaustive_budget: 1000,
            samples: 500,
            seed: 3,
        };
        let exponent = Word::generator(1, 1).pow(30);
        let k = kernel_element(&a5, &exponent, 3, &opts).unwrap();
        assert!(!k.exhaustive && k.acts_trivially);
        assert_eq!(k.tuples_checked, 500);
    }

    #[test]
    fn permuted_words_examples() {
        let x = |i| Word::generator(i, 3);
        let ws = permuted_law_words(&Word::basis(3), &w("1")).unwrap();
        assert!(ws.iter().all(Word::is_identity));
        let imgs = vec![x(1), x(2), x(3).multiply(&x(1).commutator(&x(2)))];
        let ws = permuted_law_words(&imgs, &w("1")).unwrap();
        assert_eq!(ws[2], w("1 2 1 -2 -1 -1"));
        assert!(permuted_law_words(&imgs[..2], &w("1")).is_err());
    }

    #[test]
    fn identity_images_give_trivial_words() {
        for u in all_words(6) {
            let ws = permuted_law_words(&Word::basis(3), &u).unwrap();
            assert!(ws.iter().all(Word::is_identity), "{u}");
        }
    }

    proptest! {
        #[test]
        fn strengthened_word_is_reduced(letters in proptest::collection::vec(prop::sample::select(LETTER_ORDER.to_vec()), 1..12)) {
            let word = Word::new(letters, 2).unwrap();
            prop_assume!(!word.is_identity());
            let v = strengthen_on_generating_pairs(&word).unwrap();
            prop_assert_eq!(v.len(), 2 * word.len() + 2);
            let expect = word.multiply(&Word::generator(v.letters()[word.len()].unsigned_abs() as usize, 2).pow(v.letters()[word.len()].signum() as i64));
            prop_assert_eq!(&v.letters()[..=word.len()], expect.letters());
        }
    }
}
