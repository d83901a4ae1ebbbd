//! Reduced words in free groups, evaluation into finite groups, and the
//! Nielsen-move calculus.

mod nielsen;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub use nielsen::{is_inner, MoveSequence, NielsenMove, Sign};

use crate::error::{Error, Result};
use crate::group::{Elem, FiniteGroup, IDENTITY};

/// Multiplication and inversion on some carrier type. Lets the move calculus
/// run on tuples of group elements and on tuples of free words alike.
pub trait GroupOps {
    type Elem: Clone + PartialEq;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn inv(&self, a: &Self::Elem) -> Self::Elem;
}

impl GroupOps for FiniteGroup {
    type Elem = Elem;

    fn mul(&self, a: &Elem, b: &Elem) -> Elem {
        FiniteGroup::mul(self, *a, *b)
    }

    fn inv(&self, a: &Elem) -> Elem {
        FiniteGroup::inv(self, *a)
    }
}

/// The free group `F_m` as a [`GroupOps`] carrier.
#[derive(Clone, Copy, Debug)]
pub struct FreeGroup {
    pub rank: usize,
}

impl GroupOps for FreeGroup {
    type Elem = Word;

    fn mul(&self, a: &Word, b: &Word) -> Word {
        a.multiply(b)
    }

    fn inv(&self, a: &Word) -> Word {
        a.inverse()
    }
}

/// A freely reduced word in `F_m`. Letter `i > 0` is `x_i`, `-i` is its inverse.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word {
    letters: Vec<i32>,
    rank: usize,
}

fn reduce<I: IntoIterator<Item = i32>>(letters: I) -> Vec<i32> {
    let mut out: Vec<i32> = Vec::new();
    for x in letters {
        if out.last() == Some(&-x) {
            out.pop();
        } else {
            out.push(x);
        }
    }
    out
}

impl Word {
    /// Freely reduces `letters`; errors if a letter is zero or exceeds `rank`.
    pub fn new(letters: impl IntoIterator<Item = i32>, rank: usize) -> Result<Self> {
        let letters: Vec<i32> = letters.into_iter().collect();
        if let Some(&bad) = letters
            .iter()
            .find(|&&x| x == 0 || x.unsigned_abs() as usize > rank)
        {
            return Err(Error::LetterOutOfRange { letter: bad, rank });
        }
        Ok(Word {
            letters: reduce(letters),
            rank,
        })
    }

    pub fn identity(rank: usize) -> Self {
        Word {
            letters: Vec::new(),
            rank,
        }
    }

    /// The basis letter `x_i` (1-based).
    pub fn generator(i: usize, rank: usize) -> Self {
        assert!(i >= 1 && i <= rank, "generator x{i} outside rank {rank}");
        Word {
            letters: vec![i as i32],
            rank,
        }
    }

    /// `(x_1, ..., x_n)`.
    pub fn basis(rank: usize) -> Vec<Word> {
        (1..=rank).map(|i| Word::generator(i, rank)).collect()
    }

    pub fn letters(&self) -> &[i32] {
        &self.letters
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.letters.is_empty()
    }

    /// Reinterprets the word in `F_rank`.
    pub fn with_rank(&self, rank: usize) -> Result<Self> {
        Word::new(self.letters.iter().copied(), rank)
    }

    pub fn multiply(&self, other: &Word) -> Word {
        Word {
            letters: reduce(self.letters.iter().chain(&other.letters).copied()),
            rank: self.rank.max(other.rank),
        }
    }

    pub fn inverse(&self) -> Word {
        Word {
            letters: self.letters.iter().rev().map(|&x| -x).collect(),
            rank: self.rank,
        }
    }

    pub fn pow(&self, k: i64) -> Word {
        let base = if k < 0 { self.inverse() } else { self.clone() };
        (0..k.unsigned_abs()).fold(Word::identity(self.rank), |acc, _| acc.multiply(&base))
    }

    /// `[u, v] = u v u^-1 v^-1`.
    pub fn commutator(&self, other: &Word) -> Word {
        self.multiply(other)
            .multiply(&self.inverse())
            .multiply(&other.inverse())
    }

    pub fn conjugate_by(&self, c: &Word) -> Word {
        c.multiply(self).multiply(&c.inverse())
    }

    /// Removes matching first/last letter pairs until none cancel.
    pub fn cyclic_reduce(&self) -> Word {
        let l = &self.letters;
        let (mut i, mut j) = (0, l.len());
        while j >= i + 2 && l[i] == -l[j - 1] {
            i += 1;
            j -= 1;
        }
        Word {
            letters: l[i..j].to_vec(),
            rank: self.rank,
        }
    }

    pub fn is_cyclically_reduced(&self) -> bool {
        self.letters.len() < 2 || self.letters[0] != -self.letters[self.letters.len() - 1]
    }

    /// Minimal displacement of the word acting on the Cayley tree of `F_m`,
    /// i.e. the length of its cyclic reduction.
    pub fn translation_length(&self) -> usize {
        self.cyclic_reduce().len()
    }

    /// Image under `x_i -> tuple[i-1]`.
    pub fn evaluate(&self, group: &FiniteGroup, tuple: &[Elem]) -> Result<Elem> {
        if tuple.len() != self.rank {
            return Err(Error::RankMismatch {
                expected: self.rank,
                got: tuple.len(),
            });
        }
        group.check_elements(tuple)?;
        Ok(self.evaluate_unchecked(group, tuple))
    }

    #[inline]
    pub fn evaluate_unchecked(&self, group: &FiniteGroup, tuple: &[Elem]) -> Elem {
        self.letters.iter().fold(IDENTITY, |acc, &x| {
            let g = tuple[x.unsigned_abs() as usize - 1];
            group.mul(acc, if x > 0 { g } else { group.inv(g) })
        })
    }

    /// Componentwise evaluation into `G^k`, one tuple per coordinate.
    pub fn evaluate_many(&self, group: &FiniteGroup, tuples: &[Vec<Elem>]) -> Result<Vec<Elem>> {
        tuples.iter().map(|t| self.evaluate(group, t)).collect()
    }

    /// The image under the endomorphism `x_i -> images[i-1]`.
    pub fn substitute(&self, images: &[Word]) -> Result<Word> {
        if images.len() != self.rank {
            return Err(Error::RankMismatch {
                expected: self.rank,
                got: images.len(),
            });
        }
        let rank = images.iter().map(Word::rank).max().unwrap_or(0);
        Ok(self.letters.iter().fold(Word::identity(rank), |acc, &x| {
            let w = &images[x.unsigned_abs() as usize - 1];
            if x > 0 {
                acc.multiply(w)
            } else {
                acc.multiply(&w.inverse())
            }
        }))
    }

    /// Parses the whitespace-separated signed-integer form (`"1 -2 3"`).
    pub fn parse(text: &str, rank: usize) -> Result<Self> {
        let letters = text
            .split_whitespace()
            .map(|t| {
                t.parse::<i32>().map_err(|_| Error::Parse {
                    what: "word",
                    text: text.to_string(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Word::new(letters, rank)
    }

    /// `x1 x2^-1 x3` style rendering.
    pub fn pretty(&self) -> String {
        if self.letters.is_empty() {
            return "e".into();
        }
        self.letters
            .iter()
            .map(|&x| {
                if x > 0 {
                    format!("x{x}")
                } else {
                    format!("x{}^-1", -x)
                }
            })
            .collect::<Vec<_>>()
            .join(" ")
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, x) in self.letters.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{x}")?;
        }
        Ok(())
    }
}

/// Parses with the rank inferred from the largest letter.
impl FromStr for Word {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let rank = s
            .split_whitespace()
            .filter_map(|t| t.parse::<i32>().ok())
            .map(|x| x.unsigned_abs() as usize)
            .max()
            .unwrap_or(0);
        Word::parse(s, rank)
    }
}

impl Serialize for Word {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Word {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
