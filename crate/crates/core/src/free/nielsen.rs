use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{FreeGroup, GroupOps, Word};
use crate::error::{Error, Result};
use crate::group::{Elem, FiniteGroup};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn flip(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }

    pub fn of(letter: i32) -> Sign {
        if letter > 0 {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sign::Plus => "+",
            Sign::Minus => "-",
        })
    }
}

/// An elementary Nielsen transformation. Indices are 0-based; the text form
/// (`R(1,2,+)`) is 1-based.
///
/// * `R { i, j, s }`: `g_i <- g_i * g_j^s`
/// * `L { i, j, s }`: `g_i <- g_j^s * g_i`
/// * `P { i, j }`: swap `g_i` and `g_j`
/// * `I { i }`: `g_i <- g_i^-1`
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NielsenMove {
    R { i: usize, j: usize, sign: Sign },
    L { i: usize, j: usize, sign: Sign },
    P { i: usize, j: usize },
    I { i: usize },
}

impl NielsenMove {
    pub fn inverse(self) -> NielsenMove {
        match self {
            NielsenMove::R { i, j, sign } => NielsenMove::R {
                i,
                j,
                sign: sign.flip(),
            },
            NielsenMove::L { i, j, sign } => NielsenMove::L {
                i,
                j,
                sign: sign.flip(),
            },
            other => other,
        }
    }

    pub fn validate(self, rank: usize) -> Result<()> {
        let ok = match self {
            NielsenMove::R { i, j, .. } | NielsenMove::L { i, j, .. } | NielsenMove::P { i, j } => {
                i < rank && j < rank && i != j
            }
            NielsenMove::I { i } => i < rank,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidMove(format!("{self} in rank {rank}")))
        }
    }

    /// Acts on a tuple in place. Indices must already be validated.
    pub fn act<G: GroupOps>(self, ops: &G, t: &mut [G::Elem]) {
        let power = |x: &G::Elem, s: Sign| match s {
            Sign::Plus => x.clone(),
            Sign::Minus => ops.inv(x),
        };
        match self {
            NielsenMove::R { i, j, sign } => t[i] = ops.mul(&t[i], &power(&t[j], sign)),
            NielsenMove::L { i, j, sign } => t[i] = ops.mul(&power(&t[j], sign), &t[i]),
            NielsenMove::P { i, j } => t.swap(i, j),
            NielsenMove::I { i } => t[i] = ops.inv(&t[i]),
        }
    }

    pub fn apply(self, group: &FiniteGroup, tuple: &[Elem]) -> Result<Vec<Elem>> {
        self.validate(tuple.len())?;
        group.check_elements(tuple)?;
        let mut t = tuple.to_vec();
        self.act(group, &mut t);
        Ok(t)
    }

    /// Every elementary move of the given rank, in a fixed order:
    /// `R^+, R^-, L^+, L^-` for each ordered pair, then `P`, then `I`.
    pub fn all(rank: usize) -> Vec<NielsenMove> {
        let mut moves = Vec::new();
        for i in 0..rank {
            for j in 0..rank {
                if i == j {
                    continue;
                }
                for sign in [Sign::Plus, Sign::Minus] {
                    moves.push(NielsenMove::R { i, j, sign });
                }
                for sign in [Sign::Plus, Sign::Minus] {
                    moves.push(NielsenMove::L { i, j, sign });
                }
            }
        }
        for i in 0..rank {
            for j in i + 1..rank {
                moves.push(NielsenMove::P { i, j });
            }
        }
        moves.extend((0..rank).map(|i| NielsenMove::I { i }));
        moves
    }

    fn parse(text: &str) -> Result<NielsenMove> {
        let err = || Error::Parse {
            what: "move",
            text: text.to_string(),
        };
        let t = text.trim();
        let (kind, rest) = t.split_at(t.len().min(1));
        let inner = rest
            .strip_prefix('(')
            .and_then(|r| r.strip_suffix(')'))
            .ok_or_else(err)?;
        let parts: Vec<&str> = inner.split(',').map(str::trim).collect();
        let index = |s: &str| -> Result<usize> {
            match s.parse::<usize>() {
                Ok(v) if v >= 1 => Ok(v - 1),
                _ => Err(err()),
            }
        };
        let sign = |s: &str| match s {
            "+" => Ok(Sign::Plus),
            "-" => Ok(Sign::Minus),
            _ => Err(err()),
        };
        match (kind, parts.as_slice()) {
            ("R", [i, j, s]) => Ok(NielsenMove::R {
                i: index(i)?,
                j: index(j)?,
                sign: sign(s)?,
            }),
            ("L", [i, j, s]) => Ok(NielsenMove::L {
                i: index(i)?,
                j: index(j)?,
                sign: sign(s)?,
            }),
            ("P", [i, j]) => Ok(NielsenMove::P {
                i: index(i)?,
                j: index(j)?,
            }),
            ("I", [i]) => Ok(NielsenMove::I { i: index(i)? }),
            _ => Err(err()),
        }
    }
}

impl fmt::Display for NielsenMove {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            NielsenMove::R { i, j, sign } => write!(f, "R({},{},{})", i + 1, j + 1, sign),
            NielsenMove::L { i, j, sign } => write!(f, "L({},{},{})", i + 1, j + 1, sign),
            NielsenMove::P { i, j } => write!(f, "P({},{})", i + 1, j + 1),
            NielsenMove::I { i } => write!(f, "I({})", i + 1),
        }
    }
}

/// A word in the elementary moves, applied left to right (first move first).
///
/// As an automorphism of `F_n` the sequence `m_1 m_2 ... m_r` acts on tuples
/// by pre-composition, so replaying it on the basis `(x_1, ..., x_n)` yields
/// its symbolic images.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MoveSequence {
    rank: usize,
    moves: Vec<NielsenMove>,
}

impl MoveSequence {
    pub fn new(rank: usize) -> Self {
        MoveSequence {
            rank,
            moves: Vec::new(),
        }
    }

    pub fn from_moves(rank: usize, moves: Vec<NielsenMove>) -> Result<Self> {
        for m in &moves {
            m.validate(rank)?;
        }
        Ok(MoveSequence { rank, moves })
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn moves(&self) -> &[NielsenMove] {
        &self.moves
    }

    pub fn len(&self) -> usize {
        self.moves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.moves.is_empty()
    }

    pub fn push(&mut self, m: NielsenMove) -> Result<()> {
        m.validate(self.rank)?;
        self.moves.push(m);
        Ok(())
    }

    pub fn extend(&mut self, other: &MoveSequence) -> Result<()> {
        if other.rank != self.rank {
            return Err(Error::RankMismatch {
                expected: self.rank,
                got: other.rank,
            });
        }
        self.moves.extend_from_slice(&other.moves);
        Ok(())
    }

    pub fn inverse(&self) -> MoveSequence {
        MoveSequence {
            rank: self.rank,
            moves: self.moves.iter().rev().map(|m| m.inverse()).collect(),
        }
    }

    /// Substitutes `letters[k]^±` for each letter `x_{k+1}^±` of `w`.
    ///
    /// With `letters = [R(3,1,+), R(3,2,+)]` the result sends `g_3` to
    /// `g_3 * w(g_1, g_2)`.
    pub fn from_word(rank: usize, w: &Word, letters: &[NielsenMove]) -> Result<Self> {
        if letters.len() < w.rank() {
            return Err(Error::RankMismatch {
                expected: w.rank(),
                got: letters.len(),
            });
        }
        let moves = w
            .letters()
            .iter()
            .map(|&x| {
                let m = letters[x.unsigned_abs() as usize - 1];
                if x > 0 {
                    m
                } else {
                    m.inverse()
                }
            })
            .collect();
        MoveSequence::from_moves(rank, moves)
    }

    pub fn act<G: GroupOps>(&self, ops: &G, t: &mut [G::Elem]) {
        for m in &self.moves {
            m.act(ops, t);
        }
    }

    pub fn apply(&self, group: &FiniteGroup, tuple: &[Elem]) -> Result<Vec<Elem>> {
        if tuple.len() != self.rank {
            return Err(Error::RankMismatch {
                expected: self.rank,
                got: tuple.len(),
            });
        }
        group.check_elements(tuple)?;
        let mut t = tuple.to_vec();
        self.act(group, &mut t);
        Ok(t)
    }

    /// Images of the basis `x_1, ..., x_n` under the automorphism.
    pub fn symbolic_images(&self) -> Vec<Word> {
        let mut basis = Word::basis(self.rank);
        self.act(&FreeGroup { rank: self.rank }, &mut basis);
        basis
    }

    pub fn parse(text: &str, rank: usize) -> Result<Self> {
        let mut moves = Vec::new();
        let mut depth = 0;
        let mut start = 0;
        let t = text.trim();
        for (pos, ch) in t.char_indices() {
            match ch {
                '(' => depth += 1,
                ')' => depth -= 1,
                ',' if depth == 0 => {
                    moves.push(NielsenMove::parse(&t[start..pos])?);
                    start = pos + 1;
                }
                _ => {}
            }
        }
        if !t[start..].trim().is_empty() {
            moves.push(NielsenMove::parse(&t[start..])?);
        } else if !moves.is_empty() {
            return Err(Error::Parse {
                what: "move sequence",
                text: text.to_string(),
            });
        }
        MoveSequence::from_moves(rank, moves)
    }
}

impl fmt::Display for MoveSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, m) in self.moves.iter().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            write!(f, "{m}")?;
        }
        Ok(())
    }
}

impl Serialize for MoveSequence {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for MoveSequence {
    /// Rank is inferred from the largest index mentioned.
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        let probe = MoveSequence::parse(&s, usize::MAX).map_err(serde::de::Error::custom)?;
        let rank = probe
            .moves
            .iter()
            .map(|m| match *m {
                NielsenMove::R { i, j, .. }
                | NielsenMove::L { i, j, .. }
                | NielsenMove::P { i, j } => i.max(j) + 1,
                NielsenMove::I { i } => i + 1,
            })
            .max()
            .unwrap_or(0);
        Ok(MoveSequence {
            rank,
            moves: probe.moves,
        })
    }
}

/// Splits a reduced `u x_1 u^-1` into `u`.
fn conjugator_of_basis_letter(w: &Word, letter: i32) -> Option<Vec<i32>> {
    let l = w.letters();
    if l.len().is_multiple_of(2) {
        return None;
    }
    let m = l.len() / 2;
    if l[m] != letter || (0..m).any(|i| l[m + 1 + i] != -l[m - 1 - i]) {
        return None;
    }
    Some(l[..m].to_vec())
}

/// Whether some single `c` satisfies `images[i] = c x_{i+1} c^-1` for all `i`.
///
/// Writing `images[0] = u x_1 u^-1` (reduced) forces `c = u x_1^k`; then
/// `u^-1 images[1] u = x_1^k x_2 x_1^-k` pins `k`, and the remaining
/// coordinates are checked against that single candidate.
pub fn is_inner(images: &[Word]) -> bool {
    let rank = images.iter().map(Word::rank).max().unwrap_or(0);
    let Some(first) = images.first() else {
        return true;
    };
    let Some(u) = conjugator_of_basis_letter(first, 1) else {
        return false;
    };
    let u = Word::new(u, rank).expect("letters come from a valid word");
    let c = if images.len() >= 2 {
        let t = images[1].conjugate_by(&u.inverse());
        let l = t.letters();
        if l.len().is_multiple_of(2) {
            return false;
        }
        let m = l.len() / 2;
        if l[m] != 2 || l[..m].iter().any(|&x| x != l[0] || x.abs() != 1) {
            return false;
        }
        let k = if m == 0 {
            0
        } else {
            m as i64 * l[0].signum() as i64
        };
        u.multiply(&Word::generator(1, rank).pow(k))
    } else {
        u
    };
    images
        .iter()
        .enumerate()
        .all(|(i, img)| &Word::generator(i + 1, rank).conjugate_by(&c) == img)
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;
    use crate::group::load;

    fn r(i: usize, j: usize, sign: Sign) -> NielsenMove {
        NielsenMove::R {
            i: i - 1,
            j: j - 1,
            sign,
        }
    }

    #[test]
    fn elementary_formulas() {
        let g = load("A5").unwrap();
        let (a, b) = (5, 17);
        assert_eq!(
            r(1, 2, Sign::Plus).apply(&g, &[a, b]).unwrap(),
            vec![g.mul(a, b), b]
        );
        assert_eq!(
            NielsenMove::L {
                i: 0,
                j: 1,
                sign: Sign::Minus
            }
            .apply(&g, &[a, b])
            .unwrap(),
            vec![g.mul(g.inv(b), a), b]
        );
        assert_eq!(
            NielsenMove::I { i: 0 }.apply(&g, &[a, b]).unwrap(),
            vec![g.inv(a), b]
        );
        assert_eq!(
            NielsenMove::P { i: 0, j: 1 }.apply(&g, &[a, b]).unwrap(),
            vec![b, a]
        );
        let seq =
            MoveSequence::from_moves(2, vec![r(1, 2, Sign::Plus), r(1, 2, Sign::Minus)]).unwrap();
        assert_eq!(seq.apply(&g, &[a, b]).unwrap(), vec![a, b]);
    }

    #[test]
    fn invalid_moves_rejected() {
        assert!(NielsenMove::R {
            i: 0,
            j: 0,
            sign: Sign::Plus
        }
        .validate(3)
        .is_err());
        assert!(NielsenMove::I { i: 3 }.validate(3).is_err());
        let g = load("S3").unwrap();
        assert!(matches!(
            MoveSequence::new(3).apply(&g, &[1, 2]),
            Err(Error::RankMismatch { .. })
        ));
    }

    #[test]
    fn symbolic_examples() {
        let s = MoveSequence::from_moves(3, vec![r(3, 1, Sign::Plus)]).unwrap();
        assert_eq!(
            s.symbolic_images(),
            vec![
                Word::parse("1", 3).unwrap(),
                Word::parse("2", 3).unwrap(),
                Word::parse("3 1", 3).unwrap(),
            ]
        );
        let id = MoveSequence::new(3);
        assert_eq!(id.symbolic_images(), Word::basis(3));
        assert!(is_inner(&id.symbolic_images()));
        let comm = Word::parse("1 2 -1 -2", 3).unwrap();
        let images = vec![
            Word::generator(1, 3),
            Word::generator(2, 3),
            Word::generator(3, 3).multiply(&comm),
        ];
        assert!(!is_inner(&images));
    }

    #[test]
    fn conjugation_is_inner() {
        let c = Word::parse("2 -1 3 1 1", 3).unwrap();
        let images: Vec<Word> = Word::basis(3).iter().map(|x| x.conjugate_by(&c)).collect();
        assert!(is_inner(&images));
        let mut skewed = images.clone();
        skewed[2] = Word::generator(3, 3).conjugate_by(&c.multiply(&Word::generator(2, 3)));
        assert!(!is_inner(&skewed));
        // Inversion of a basis letter is outer.
        let inv = MoveSequence::from_moves(3, vec![NielsenMove::I { i: 1 }]).unwrap();
        assert!(!is_inner(&inv.symbolic_images()));
    }

    #[test]
    fn word_substitution_acts_by_right_multiplication() {
        let g = load("A5").unwrap();
        let w = Word::parse("1 -2 -2 1 2", 2).unwrap();
        let letters = [r(3, 1, Sign::Plus), r(3, 2, Sign::Plus)];
        let seq = MoveSequence::from_word(3, &w, &letters).unwrap();
        for t in [[3u32, 9, 44], [12, 40, 7], [1, 2, 3]] {
            let out = seq.apply(&g, &t).unwrap();
            let wv = w.evaluate(&g, &t[..2]).unwrap();
            assert_eq!(out, vec![t[0], t[1], g.mul(t[2], wv)]);
        }
    }

    #[test]
    fn text_round_trip() {
        let s = MoveSequence::parse("R(1,2,+), L(3,1,-),P(1,3),I(2)", 3).unwrap();
        assert_eq!(s.to_string(), "R(1,2,+),L(3,1,-),P(1,3),I(2)");
        assert_eq!(MoveSequence::parse("", 3).unwrap().len(), 0);
        assert!(MoveSequence::parse("R(1,1,+)", 3).is_err());
        assert!(MoveSequence::parse("Q(1)", 3).is_err());
        assert!(MoveSequence::parse("R(1,4,+)", 3).is_err());
        let json = serde_json::to_string(&s).unwrap();
        let back: MoveSequence = serde_json::from_str(&json).unwrap();
        assert_eq!(back, s);
    }

    fn move_strategy(rank: usize) -> impl Strategy<Value = NielsenMove> {
        (0..4u8, 0..rank, 1..rank, any::<bool>()).prop_map(move |(k, i, d, s)| {
            let j = (i + d) % rank;
            let sign = if s { Sign::Plus } else { Sign::Minus };
            match k {
                0 => NielsenMove::R { i, j, sign },
                1 => NielsenMove::L { i, j, sign },
                2 => NielsenMove::P { i, j },
                _ => NielsenMove::I { i },
            }
        })
    }

    proptest! {
        #[test]
        fn symbolic_images_evaluate_to_tuple_action(
            moves in prop::collection::vec(move_strategy(3), 0..12),
            t in prop::array::uniform3(0u32..24),
        ) {
            let g = load("S4").unwrap();
            let seq = MoveSequence::from_moves(3, moves).unwrap();
            let direct = seq.apply(&g, &t).unwrap();
            let via_words: Vec<Elem> = seq
                .symbolic_images()
                .iter()
                .map(|w| w.evaluate(&g, &t).unwrap())
                .collect();
            prop_assert_eq!(direct, via_words);
            prop_assert_eq!(seq.inverse().apply(&g, &seq.apply(&g, &t).unwrap()).unwrap(), t.to_vec());
        }

        #[test]
        fn text_form_round_trips(moves in prop::collection::vec(move_strategy(4), 0..10)) {
            let seq = MoveSequence::from_moves(4, moves).unwrap();
            prop_assert_eq!(MoveSequence::parse(&seq.to_string(), 4).unwrap(), seq);
        }
    }
}
