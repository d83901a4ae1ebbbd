//! Permutation backend: groups given by generating permutations, with
//! elements listed in lexicographic order of their image lists.

use std::collections::{HashMap, HashSet};

use crate::error::{Error, Result};

/// Upper bound on the order of a permutation group we are willing to list.
pub const MAX_PERMUTATION_ORDER: usize = 2_000_000;

#[derive(Clone, Debug)]
pub(crate) struct PermGroup {
    pub degree: usize,
    /// Element `g` occupies `images[g * degree..(g + 1) * degree]`.
    pub images: Vec<u16>,
    pub index: HashMap<Vec<u16>, u32>,
}

impl PermGroup {
    pub fn perm(&self, g: u32) -> &[u16] {
        let d = self.degree;
        &self.images[g as usize * d..(g as usize + 1) * d]
    }

    pub fn order(&self) -> usize {
        self.images.len() / self.degree
    }

    /// `a` first, then `b`.
    pub fn compose(&self, a: u32, b: u32) -> u32 {
        let (pa, pb) = (self.perm(a), self.perm(b));
        let img: Vec<u16> = pa.iter().map(|&i| pb[i as usize]).collect();
        self.index[&img]
    }

    pub fn invert(&self, a: u32) -> u32 {
        let pa = self.perm(a);
        let mut inv = vec![0u16; pa.len()];
        for (i, &j) in pa.iter().enumerate() {
            inv[j as usize] = i as u16;
        }
        self.index[&inv]
    }

    /// Lists the group generated by `gens` (all of length `degree`).
    pub fn generated(degree: usize, gens: &[Vec<u16>]) -> Result<Self> {
        let identity: Vec<u16> = (0..degree as u16).collect();
        let mut seen: HashSet<Vec<u16>> = HashSet::new();
        seen.insert(identity.clone());
        let mut queue = vec![identity];
        let mut head = 0;
        while head < queue.len() {
            let cur = queue[head].clone();
            head += 1;
            for g in gens {
                let next: Vec<u16> = cur.iter().map(|&i| g[i as usize]).collect();
                if seen.insert(next.clone()) {
                    if seen.len() > MAX_PERMUTATION_ORDER {
                        return Err(Error::Budget(format!(
                            "permutation group exceeds {MAX_PERMUTATION_ORDER} elements"
                        )));
                    }
                    queue.push(next);
                }
            }
        }
        Ok(Self::from_elements(degree, queue))
    }

    pub fn from_elements(degree: usize, mut elements: Vec<Vec<u16>>) -> Self {
        elements.sort_unstable();
        elements.dedup();
        let index = elements
            .iter()
            .enumerate()
            .map(|(i, p)| (p.clone(), i as u32))
            .collect();
        let images = elements.into_iter().flatten().collect();
        PermGroup {
            degree,
            images,
            index,
        }
    }

    /// Disjoint-union action of `left x right`.
    pub fn direct_product(left: &PermGroup, right: &PermGroup) -> Self {
        let degree = left.degree + right.degree;
        let shift = left.degree as u16;
        let mut elements = Vec::with_capacity(left.order() * right.order());
        for a in 0..left.order() as u32 {
            for b in 0..right.order() as u32 {
                let mut p = left.perm(a).to_vec();
                p.extend(right.perm(b).iter().map(|&i| i + shift));
                elements.push(p);
            }
        }
        Self::from_elements(degree, elements)
    }
}

fn cycle(degree: usize, points: &[usize]) -> Vec<u16> {
    let mut p: Vec<u16> = (0..degree as u16).collect();
    for (i, &a) in points.iter().enumerate() {
        p[a] = points[(i + 1) % points.len()] as u16;
    }
    p
}

fn product_of(degree: usize, cycles: &[&[usize]]) -> Vec<u16> {
    let mut p: Vec<u16> = (0..degree as u16).collect();
    for c in cycles {
        let q = cycle(degree, c);
        p = p.iter().map(|&i| q[i as usize]).collect();
    }
    p
}

pub(crate) fn cyclic(n: usize) -> Result<PermGroup> {
    let pts: Vec<usize> = (0..n).collect();
    PermGroup::generated(n, &[cycle(n, &pts)])
}

pub(crate) fn symmetric(n: usize) -> Result<PermGroup> {
    let pts: Vec<usize> = (0..n).collect();
    let mut gens = vec![cycle(n, &pts)];
    if n >= 2 {
        gens.push(cycle(n, &[0, 1]));
    }
    PermGroup::generated(n, &gens)
}

pub(crate) fn alternating(n: usize) -> Result<PermGroup> {
    let gens: Vec<Vec<u16>> = (2..n).map(|i| cycle(n, &[0, 1, i])).collect();
    PermGroup::generated(n, &gens)
}

pub(crate) fn dihedral(n: usize) -> Result<PermGroup> {
    let pts: Vec<usize> = (0..n).collect();
    let reflection: Vec<u16> = (0..n).map(|i| ((n - i) % n) as u16).collect();
    PermGroup::generated(n, &[cycle(n, &pts), reflection])
}

pub(crate) fn quaternion() -> Result<PermGroup> {
    let i = product_of(8, &[&[0, 1, 2, 3], &[4, 5, 6, 7]]);
    let j = product_of(8, &[&[0, 4, 2, 6], &[1, 7, 3, 5]]);
    PermGroup::generated(8, &[i, j])
}
