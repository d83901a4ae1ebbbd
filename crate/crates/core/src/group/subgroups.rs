use std::collections::HashMap;

use fixedbitset::FixedBitSet;

use super::{Elem, FiniteGroup};

pub type SubgroupId = u32;

const UNKNOWN: SubgroupId = SubgroupId::MAX;

/// Interned subgroups with a memoized "join with one element" transition.
///
/// Generation of a tuple is decided by folding [`SubgroupLattice::join`] over
/// its entries; each distinct subgroup is closed once.
pub struct SubgroupLattice<'g> {
    group: &'g FiniteGroup,
    members: Vec<FixedBitSet>,
    sizes: Vec<usize>,
    gens: Vec<Vec<Elem>>,
    ids: HashMap<FixedBitSet, SubgroupId>,
    next: Vec<Vec<SubgroupId>>,
}

impl<'g> SubgroupLattice<'g> {
    pub const TRIVIAL: SubgroupId = 0;

    pub fn new(group: &'g FiniteGroup) -> Self {
        let mut lattice = SubgroupLattice {
            group,
            members: Vec::new(),
            sizes: Vec::new(),
            gens: Vec::new(),
            ids: HashMap::new(),
            next: Vec::new(),
        };
        lattice.intern(group.closure_set(&[]), Vec::new());
        lattice
    }

    fn intern(&mut self, set: FixedBitSet, gens: Vec<Elem>) -> SubgroupId {
        if let Some(&id) = self.ids.get(&set) {
            return id;
        }
        let id = self.members.len() as SubgroupId;
        self.sizes.push(set.count_ones(..));
        self.ids.insert(set.clone(), id);
        self.members.push(set);
        self.gens.push(gens);
        self.next.push(vec![UNKNOWN; self.group.order()]);
        id
    }

    /// The subgroup generated by `sub` and `g`.
    pub fn join(&mut self, sub: SubgroupId, g: Elem) -> SubgroupId {
        let cached = self.next[sub as usize][g as usize];
        if cached != UNKNOWN {
            return cached;
        }
        let id = if self.members[sub as usize].contains(g as usize) {
            sub
        } else {
            let mut gens = self.gens[sub as usize].clone();
            gens.push(g);
            let set = self.group.closure_set(&gens);
            self.intern(set, gens)
        };
        self.next[sub as usize][g as usize] = id;
        id
    }

    pub fn generated_by(&mut self, tuple: &[Elem]) -> SubgroupId {
        tuple.iter().fold(Self::TRIVIAL, |s, &g| self.join(s, g))
    }

    pub fn size(&self, sub: SubgroupId) -> usize {
        self.sizes[sub as usize]
    }

    pub fn is_whole(&self, sub: SubgroupId) -> bool {
        self.sizes[sub as usize] == self.group.order()
    }

    pub fn contains(&self, sub: SubgroupId, g: Elem) -> bool {
        self.members[sub as usize].contains(g as usize)
    }

    /// Number of distinct subgroups met so far.
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}
