//! Automorphism enumeration.
//!
//! Automorphisms are found by choosing images for a fixed generating tuple
//! (candidates filtered by element order and by the orders of pairwise
//! products) and extending along a spanning tree of the Cayley graph.

use std::collections::HashMap;

use fixedbitset::FixedBitSet;

use super::{Elem, FiniteGroup, SubgroupLattice, IDENTITY};
use crate::error::{Error, Result};

pub const DEFAULT_AUT_CAP: usize = 200_000;

/// Largest automorphism group for which a full composition table is kept.
const COMPOSE_TABLE_LIMIT: usize = 2048;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Automorphism {
    image: Vec<Elem>,
}

impl Automorphism {
    pub fn identity(order: usize) -> Self {
        Automorphism {
            image: (0..order as Elem).collect(),
        }
    }

    /// Wraps an image list without checking it.
    pub fn from_images(image: Vec<Elem>) -> Self {
        Automorphism { image }
    }

    #[inline]
    pub fn apply(&self, g: Elem) -> Elem {
        self.image[g as usize]
    }

    pub fn apply_tuple(&self, t: &[Elem]) -> Vec<Elem> {
        t.iter().map(|&g| self.apply(g)).collect()
    }

    pub fn images(&self) -> &[Elem] {
        &self.image
    }

    /// `self` first, then `other`.
    pub fn then(&self, other: &Automorphism) -> Automorphism {
        Automorphism {
            image: self.image.iter().map(|&g| other.apply(g)).collect(),
        }
    }

    pub fn inverse(&self) -> Automorphism {
        let mut inv = vec![0; self.image.len()];
        for (g, &h) in self.image.iter().enumerate() {
            inv[h as usize] = g as Elem;
        }
        Automorphism { image: inv }
    }

    pub fn is_identity(&self) -> bool {
        self.image.iter().enumerate().all(|(i, &g)| i as Elem == g)
    }

    /// Bijective and multiplicative on all pairs.
    pub fn is_automorphism_of(&self, group: &FiniteGroup) -> bool {
        let n = group.order();
        if self.image.len() != n {
            return false;
        }
        let mut seen = FixedBitSet::with_capacity(n);
        for &g in &self.image {
            if g as usize >= n || seen.put(g as usize) {
                return false;
            }
        }
        group.elements().all(|a| {
            group
                .elements()
                .all(|b| self.apply(group.mul(a, b)) == group.mul(self.apply(a), self.apply(b)))
        })
    }
}

/// The automorphism group, listed in lexicographic order of image lists (so
/// the identity is index 0).
#[derive(Debug)]
pub struct AutGroup {
    generators: Vec<Elem>,
    auts: Vec<Automorphism>,
    by_images: HashMap<Vec<Elem>, usize>,
    inverses: Vec<usize>,
    compose_table: Option<Vec<u32>>,
}

fn generating_tuple(group: &FiniteGroup) -> Vec<Elem> {
    if group.order() == 1 {
        return vec![IDENTITY];
    }
    if let Some((a, b)) = group.least_generating_pair() {
        return vec![a, b];
    }
    let mut lattice = SubgroupLattice::new(group);
    let mut sub = SubgroupLattice::TRIVIAL;
    let mut gens = Vec::new();
    while !lattice.is_whole(sub) {
        let g = group
            .elements()
            .find(|&g| !lattice.contains(sub, g))
            .unwrap();
        gens.push(g);
        sub = lattice.join(sub, g);
    }
    gens
}

impl AutGroup {
    pub fn compute(group: &FiniteGroup, cap: usize) -> Result<Self> {
        let gens = generating_tuple(group);
        let n = group.order();

        // Spanning tree of the Cayley graph: (child, parent, generator index).
        let mut tree = Vec::with_capacity(n);
        let mut seen = FixedBitSet::with_capacity(n);
        seen.insert(IDENTITY as usize);
        let mut queue = vec![IDENTITY];
        let mut head = 0;
        while head < queue.len() {
            let x = queue[head];
            head += 1;
            for (t, &s) in gens.iter().enumerate() {
                let y = group.mul(x, s);
                if !seen.put(y as usize) {
                    tree.push((y, x, t));
                    queue.push(y);
                }
            }
        }

        let fingerprint = |a: Elem, b: Elem| {
            (
                group.element_order(group.mul(a, b)),
                group.element_order(group.mul(a, group.inv(b))),
                group.element_order(group.commutator(a, b)),
            )
        };
        let candidates: Vec<Vec<Elem>> = gens
            .iter()
            .map(|&g| {
                group
                    .elements()
                    .filter(|&h| group.element_order(h) == group.element_order(g))
                    .collect()
            })
            .collect();

        let mut found: Vec<Automorphism> = Vec::new();
        let mut phi = vec![IDENTITY; n];
        let mut used = FixedBitSet::with_capacity(n);
        let mut chosen: Vec<Elem> = Vec::with_capacity(gens.len());

        // Depth-first over candidate image tuples.
        fn recurse(depth: usize, chosen: &mut Vec<Elem>, ctx: &mut SearchCtx<'_>) -> Result<()> {
            if depth == ctx.gens.len() {
                if let Some(aut) = ctx.try_extend(chosen) {
                    ctx.found.push(aut);
                    if ctx.found.len() > ctx.cap {
                        return Err(Error::Budget(format!(
                            "more than {} automorphisms",
                            ctx.cap
                        )));
                    }
                }
                return Ok(());
            }
            for &c in &ctx.candidates[depth] {
                let ok = (0..depth).all(|s| {
                    (ctx.fingerprint)(ctx.gens[s], ctx.gens[depth])
                        == (ctx.fingerprint)(chosen[s], c)
                });
                if ok {
                    chosen.push(c);
                    recurse(depth + 1, chosen, ctx)?;
                    chosen.pop();
                }
            }
            Ok(())
        }

        struct SearchCtx<'a> {
            group: &'a FiniteGroup,
            gens: &'a [Elem],
            candidates: &'a [Vec<Elem>],
            tree: &'a [(Elem, Elem, usize)],
            fingerprint: &'a dyn Fn(Elem, Elem) -> (u32, u32, u32),
            phi: &'a mut Vec<Elem>,
            used: &'a mut FixedBitSet,
            found: &'a mut Vec<Automorphism>,
            cap: usize,
        }

        impl SearchCtx<'_> {
            fn try_extend(&mut self, images: &[Elem]) -> Option<Automorphism> {
                let g = self.group;
                self.phi[IDENTITY as usize] = IDENTITY;
                for &(child, parent, t) in self.tree {
                    self.phi[child as usize] = g.mul(self.phi[parent as usize], images[t]);
                }
                self.used.clear();
                for &y in self.phi.iter() {
                    if self.used.put(y as usize) {
                        return None;
                    }
                }
                for x in g.elements() {
                    for (t, &s) in self.gens.iter().enumerate() {
                        if self.phi[g.mul(x, s) as usize] != g.mul(self.phi[x as usize], images[t])
                        {
                            return None;
                        }
                    }
                }
                Some(Automorphism::from_images(self.phi.clone()))
            }
        }

        let mut ctx = SearchCtx {
            group,
            gens: &gens,
            candidates: &candidates,
            tree: &tree,
            fingerprint: &fingerprint,
            phi: &mut phi,
            used: &mut used,
            found: &mut found,
            cap,
        };
        recurse(0, &mut chosen, &mut ctx)?;

        found.sort_unstable();
        Ok(Self::from_list(gens, found))
    }

    fn from_list(generators: Vec<Elem>, auts: Vec<Automorphism>) -> Self {
        let key = |a: &Automorphism| generators.iter().map(|&g| a.apply(g)).collect::<Vec<_>>();
        let by_images: HashMap<Vec<Elem>, usize> =
            auts.iter().enumerate().map(|(i, a)| (key(a), i)).collect();
        let inverses = auts.iter().map(|a| by_images[&key(&a.inverse())]).collect();
        let mut group = AutGroup {
            generators,
            auts,
            by_images,
            inverses,
            compose_table: None,
        };
        let m = group.auts.len();
        if m <= COMPOSE_TABLE_LIMIT {
            let mut t = Vec::with_capacity(m * m);
            for i in 0..m {
                for j in 0..m {
                    t.push(group.compose_slow(i, j) as u32);
                }
            }
            group.compose_table = Some(t);
        }
        group
    }

    fn compose_slow(&self, i: usize, j: usize) -> usize {
        let (a, b) = (&self.auts[i], &self.auts[j]);
        let key: Vec<Elem> = self
            .generators
            .iter()
            .map(|&g| b.apply(a.apply(g)))
            .collect();
        self.by_images[&key]
    }

    pub fn len(&self) -> usize {
        self.auts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.auts.is_empty()
    }

    pub fn get(&self, i: usize) -> &Automorphism {
        &self.auts[i]
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Automorphism> {
        self.auts.iter()
    }

    pub fn as_slice(&self) -> &[Automorphism] {
        &self.auts
    }

    /// The generating tuple whose images identify each automorphism.
    pub fn generators(&self) -> &[Elem] {
        &self.generators
    }

    /// Index of "apply `i`, then `j`".
    pub fn compose(&self, i: usize, j: usize) -> usize {
        match &self.compose_table {
            Some(t) => t[i * self.auts.len() + j] as usize,
            None => self.compose_slow(i, j),
        }
    }

    pub fn inverse(&self, i: usize) -> usize {
        self.inverses[i]
    }

    /// Index of the automorphism with the given generator images.
    pub fn index_of_images(&self, images: &[Elem]) -> Option<usize> {
        self.by_images.get(images).copied()
    }

    /// The automorphism sending each `from` to its paired `to`, if any. When
    /// the `from` elements generate, it is unique.
    pub fn find_mapping(&self, pairs: &[(Elem, Elem)]) -> Option<usize> {
        self.auts
            .iter()
            .position(|a| pairs.iter().all(|&(x, y)| a.apply(x) == y))
    }

    /// Lexicographically least image of `t` under the group.
    pub fn canonical(&self, t: &[Elem]) -> Vec<Elem> {
        let mut best = t.to_vec();
        let mut cur = vec![0; t.len()];
        for a in &self.auts {
            for (c, &g) in cur.iter_mut().zip(t) {
                *c = a.apply(g);
            }
            if cur < best {
                best.copy_from_slice(&cur);
            }
        }
        best
    }
}
