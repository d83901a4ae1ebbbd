//! `PSL2(p)` as 2x2 matrices of determinant one modulo `±1`.

use std::collections::HashMap;

use crate::error::{Error, Result};

pub(crate) type Mat = [u32; 4];

#[derive(Clone, Debug)]
pub(crate) struct Psl2 {
    pub p: u32,
    pub mats: Vec<Mat>,
    pub index: HashMap<Mat, u32>,
}

fn is_prime(p: u32) -> bool {
    p >= 2
        && (2..)
            .take_while(|d| d * d <= p)
            .all(|d| !p.is_multiple_of(d))
}

impl Psl2 {
    /// Chooses between `m` and `-m` so the first nonzero entry is the least
    /// positive residue of the two.
    pub fn normalize(&self, m: Mat) -> Mat {
        let p = self.p;
        let first = m.iter().copied().find(|&x| x != 0).unwrap_or(0);
        if first > p - first {
            m.map(|x| (p - x) % p)
        } else {
            m
        }
    }

    pub fn new(p: u32) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::Unsupported(format!("PSL2({p}): {p} is not prime")));
        }
        if p > 97 {
            return Err(Error::Unsupported(format!("PSL2({p}): modulus too large")));
        }
        let mut g = Psl2 {
            p,
            mats: Vec::new(),
            index: HashMap::new(),
        };
        let mut all = Vec::new();
        for a in 0..p {
            for b in 0..p {
                for c in 0..p {
                    for d in 0..p {
                        if (a * d + p * p - b * c) % p == 1 {
                            all.push(g.normalize([a, b, c, d]));
                        }
                    }
                }
            }
        }
        let identity = [1, 0, 0, 1];
        all.retain(|m| *m != identity);
        all.sort_unstable();
        all.dedup();
        all.insert(0, identity);
        g.index = all
            .iter()
            .enumerate()
            .map(|(i, m)| (*m, i as u32))
            .collect();
        g.mats = all;
        Ok(g)
    }

    pub fn mul(&self, x: u32, y: u32) -> u32 {
        let p = self.p;
        let [a, b, c, d] = self.mats[x as usize];
        let [e, f, g, h] = self.mats[y as usize];
        let m = [
            (a * e + b * g) % p,
            (a * f + b * h) % p,
            (c * e + d * g) % p,
            (c * f + d * h) % p,
        ];
        self.index[&self.normalize(m)]
    }

    pub fn inv(&self, x: u32) -> u32 {
        let p = self.p;
        let [a, b, c, d] = self.mats[x as usize];
        let m = [d, (p - b) % p, (p - c) % p, a];
        self.index[&self.normalize(m)]
    }
}
