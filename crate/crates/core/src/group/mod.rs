//! Finite group backends with dense element ids.
//!
//! Every group is presented as ids `0..order` with `0` the identity. Groups of
//! order at most [`TABLE_LIMIT`] carry a materialized multiplication table;
//! larger ones compute products from the backend representation on demand.

mod aut;
mod perm;
mod psl2;
mod spec;
mod subgroups;
mod table;

use std::fmt;
use std::path::Path;
use std::sync::{Arc, OnceLock};

use fixedbitset::FixedBitSet;

pub use aut::{AutGroup, Automorphism, DEFAULT_AUT_CAP};
pub use spec::GroupSpec;
pub use subgroups::{SubgroupId, SubgroupLattice};

use crate::error::{Error, Result};
use perm::PermGroup;
use psl2::Psl2;

/// Dense element identifier; `0` is always the identity.
pub type Elem = u32;

pub const IDENTITY: Elem = 0;

/// Largest order for which the full multiplication table is stored.
pub const TABLE_LIMIT: usize = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendKind {
    Permutation,
    Psl2,
    Table,
}

#[derive(Debug)]
enum Repr {
    Perm(PermGroup),
    Psl2(Psl2),
    Table,
}

pub struct FiniteGroup {
    spec: String,
    order: usize,
    kind: BackendKind,
    repr: Repr,
    table: Option<Vec<Elem>>,
    inverses: Vec<Elem>,
    element_orders: Vec<u32>,
    automorphisms: OnceLock<Arc<AutGroup>>,
    pair_table: OnceLock<FixedBitSet>,
}

impl fmt::Debug for FiniteGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FiniteGroup")
            .field("spec", &self.spec)
            .field("order", &self.order)
            .field("kind", &self.kind)
            .finish()
    }
}

/// Loads the group named by `spec`. Automorphisms are computed lazily.
pub fn load_group(spec: &GroupSpec) -> Result<FiniteGroup> {
    let group = match spec {
        GroupSpec::Table(path) => {
            let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
                path: path.clone(),
                source,
            })?;
            let (order, table) = table::parse_table(path, &text)?;
            FiniteGroup::from_table(spec.to_string(), order, table)
        }
        GroupSpec::Psl2(p) => FiniteGroup::from_repr(spec.to_string(), Repr::Psl2(Psl2::new(*p)?)),
        GroupSpec::Product(factors) => {
            let groups = factors.iter().map(load_group).collect::<Result<Vec<_>>>()?;
            product_of(spec.to_string(), &groups)?
        }
        other => FiniteGroup::from_repr(spec.to_string(), Repr::Perm(permutation_backend(other)?)),
    };
    Ok(group)
}

fn permutation_backend(spec: &GroupSpec) -> Result<PermGroup> {
    match *spec {
        GroupSpec::Cyclic(n) => perm::cyclic(n),
        GroupSpec::Symmetric(n) => perm::symmetric(n),
        GroupSpec::Alternating(n) => perm::alternating(n),
        GroupSpec::Dihedral(n) => perm::dihedral(n),
        GroupSpec::Quaternion => perm::quaternion(),
        _ => unreachable!("not a permutation spec"),
    }
}

fn product_of(spec: String, groups: &[FiniteGroup]) -> Result<FiniteGroup> {
    if groups.iter().all(|g| matches!(g.repr, Repr::Perm(_))) {
        let mut acc: Option<PermGroup> = None;
        for g in groups {
            let Repr::Perm(p) = &g.repr else {
                unreachable!()
            };
            acc = Some(match acc {
                None => p.clone(),
                Some(left) => PermGroup::direct_product(&left, p),
            });
        }
        return Ok(FiniteGroup::from_repr(spec, Repr::Perm(acc.unwrap())));
    }
    let order: usize = groups.iter().map(FiniteGroup::order).product();
    if order > TABLE_LIMIT {
        return Err(Error::Unsupported(format!(
            "direct product with a non-permutation factor of order {order} > {TABLE_LIMIT}"
        )));
    }
    // Mixed-radix ids: factor 0 most significant, matching the permutation case.
    let decode = |mut x: usize| -> Vec<Elem> {
        let mut parts = vec![0; groups.len()];
        for (i, g) in groups.iter().enumerate().rev() {
            parts[i] = (x % g.order()) as Elem;
            x /= g.order();
        }
        parts
    };
    let encode = |parts: &[Elem]| -> Elem {
        parts
            .iter()
            .zip(groups)
            .fold(0usize, |acc, (&p, g)| acc * g.order() + p as usize) as Elem
    };
    let mut table = Vec::with_capacity(order * order);
    for a in 0..order {
        let pa = decode(a);
        for b in 0..order {
            let pb = decode(b);
            let prod: Vec<Elem> = groups
                .iter()
                .enumerate()
                .map(|(i, g)| g.mul(pa[i], pb[i]))
                .collect();
            table.push(encode(&prod));
        }
    }
    Ok(FiniteGroup::from_table(spec, order, table))
}

impl FiniteGroup {
    /// Builds a group from an explicit multiplication table, auditing the axioms.
    pub fn from_table_checked(
        spec: impl Into<String>,
        order: usize,
        table: Vec<Elem>,
    ) -> Result<Self> {
        let spec = spec.into();
        if order == 0 || table.len() != order * order || table.iter().any(|&x| x as usize >= order)
        {
            return Err(Error::MalformedTable {
                path: spec.clone().into(),
                reason: "table shape or entries out of range".into(),
            });
        }
        table::audit(order, &table).map_err(|reason| Error::MalformedTable {
            path: spec.clone().into(),
            reason,
        })?;
        Ok(Self::from_table(spec, order, table))
    }

    fn from_table(spec: String, order: usize, table: Vec<Elem>) -> Self {
        let inverses = (0..order)
            .map(|g| {
                (0..order)
                    .find(|&h| table[g * order + h] == IDENTITY)
                    .unwrap() as Elem
            })
            .collect();
        let mut group = FiniteGroup {
            spec,
            order,
            kind: BackendKind::Table,
            repr: Repr::Table,
            table: Some(table),
            inverses,
            element_orders: Vec::new(),
            automorphisms: OnceLock::new(),
            pair_table: OnceLock::new(),
        };
        group.element_orders = group.compute_orders();
        group
    }

    fn from_repr(spec: String, repr: Repr) -> Self {
        let (order, kind) = match &repr {
            Repr::Perm(p) => (p.order(), BackendKind::Permutation),
            Repr::Psl2(p) => (p.mats.len(), BackendKind::Psl2),
            Repr::Table => unreachable!(),
        };
        let mut group = FiniteGroup {
            spec,
            order,
            kind,
            repr,
            table: None,
            inverses: Vec::new(),
            element_orders: Vec::new(),
            automorphisms: OnceLock::new(),
            pair_table: OnceLock::new(),
        };
        group.inverses = (0..order as Elem).map(|g| group.inv_slow(g)).collect();
        if order <= TABLE_LIMIT {
            let mut t = Vec::with_capacity(order * order);
            for a in 0..order as Elem {
                for b in 0..order as Elem {
                    t.push(group.mul_slow(a, b));
                }
            }
            group.table = Some(t);
        }
        group.element_orders = group.compute_orders();
        group
    }

    fn compute_orders(&self) -> Vec<u32> {
        (0..self.order as Elem)
            .map(|g| {
                let mut k = 1;
                let mut x = g;
                while x != IDENTITY {
                    x = self.mul(x, g);
                    k += 1;
                }
                k
            })
            .collect()
    }

    fn mul_slow(&self, a: Elem, b: Elem) -> Elem {
        match &self.repr {
            Repr::Perm(p) => p.compose(a, b),
            Repr::Psl2(p) => p.mul(a, b),
            Repr::Table => unreachable!("table groups always materialize"),
        }
    }

    fn inv_slow(&self, a: Elem) -> Elem {
        match &self.repr {
            Repr::Perm(p) => p.invert(a),
            Repr::Psl2(p) => p.inv(a),
            Repr::Table => unreachable!(),
        }
    }

    pub fn spec(&self) -> &str {
        &self.spec
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn kind(&self) -> BackendKind {
        self.kind
    }

    pub fn elements(&self) -> std::ops::Range<Elem> {
        0..self.order as Elem
    }

    #[inline]
    pub fn mul(&self, a: Elem, b: Elem) -> Elem {
        match &self.table {
            Some(t) => t[a as usize * self.order + b as usize],
            None => self.mul_slow(a, b),
        }
    }

    #[inline]
    pub fn inv(&self, a: Elem) -> Elem {
        self.inverses[a as usize]
    }

    /// Row-major multiplication table, when materialized.
    pub fn table(&self) -> Option<&[Elem]> {
        self.table.as_deref()
    }

    pub fn element_order(&self, g: Elem) -> u32 {
        self.element_orders[g as usize]
    }

    pub fn pow(&self, g: Elem, e: i64) -> Elem {
        let base = if e < 0 { self.inv(g) } else { g };
        let e = e.unsigned_abs() % self.element_order(g) as u64;
        (0..e).fold(IDENTITY, |acc, _| self.mul(acc, base))
    }

    pub fn commutator(&self, a: Elem, b: Elem) -> Elem {
        let ab = self.mul(a, b);
        let ab_a = self.mul(ab, self.inv(a));
        self.mul(ab_a, self.inv(b))
    }

    /// Describes an element in its backend's native form.
    pub fn describe(&self, g: Elem) -> String {
        match &self.repr {
            Repr::Perm(p) => format!("{:?}", p.perm(g)),
            Repr::Psl2(p) => format!("{:?}", p.mats[g as usize]),
            Repr::Table => g.to_string(),
        }
    }

    pub fn check_element(&self, g: Elem) -> Result<()> {
        if (g as usize) < self.order {
            Ok(())
        } else {
            Err(Error::InvalidElement {
                id: g,
                order: self.order,
            })
        }
    }

    pub fn check_elements(&self, gs: &[Elem]) -> Result<()> {
        gs.iter().try_for_each(|&g| self.check_element(g))
    }

    /// Bitset of the subgroup generated by `gens`.
    pub fn closure_set(&self, gens: &[Elem]) -> FixedBitSet {
        let mut set = FixedBitSet::with_capacity(self.order);
        set.insert(IDENTITY as usize);
        let mut queue = vec![IDENTITY];
        let mut head = 0;
        while head < queue.len() {
            let x = queue[head];
            head += 1;
            for &s in gens {
                let y = self.mul(x, s);
                if !set.put(y as usize) {
                    queue.push(y);
                }
            }
        }
        set
    }

    /// The subgroup generated by `gens`, as sorted element ids.
    pub fn closure(&self, gens: &[Elem]) -> Result<Vec<Elem>> {
        self.check_elements(gens)?;
        Ok(self.closure_set(gens).ones().map(|g| g as Elem).collect())
    }

    pub fn generates(&self, gens: &[Elem]) -> bool {
        match gens {
            [] => self.order == 1,
            [a, b] if self.pair_table.get().is_some() || self.order <= TABLE_LIMIT => {
                self.generates_pair(*a, *b)
            }
            _ => self.closure_set(gens).count_ones(..) == self.order,
        }
    }

    /// `⟨a, b⟩ = G`, answered from a cached generating graph when the order
    /// permits.
    pub fn generates_pair(&self, a: Elem, b: Elem) -> bool {
        if self.order > TABLE_LIMIT {
            return self.closure_set(&[a, b]).count_ones(..) == self.order;
        }
        let table = self.pair_table.get_or_init(|| {
            let mut lattice = SubgroupLattice::new(self);
            let n = self.order;
            let mut bits = FixedBitSet::with_capacity(n * n);
            for x in self.elements() {
                let sx = lattice.join(SubgroupLattice::TRIVIAL, x);
                for y in self.elements() {
                    let s = lattice.join(sx, y);
                    if lattice.is_whole(s) {
                        bits.insert(x as usize * n + y as usize);
                    }
                }
            }
            bits
        });
        table.contains(a as usize * self.order + b as usize)
    }

    pub fn is_abelian(&self) -> bool {
        self.elements()
            .all(|a| self.elements().all(|b| self.mul(a, b) == self.mul(b, a)))
    }

    pub fn conjugacy_classes(&self) -> Vec<Vec<Elem>> {
        let mut seen = FixedBitSet::with_capacity(self.order);
        let mut classes = Vec::new();
        for g in self.elements() {
            if seen.contains(g as usize) {
                continue;
            }
            let mut class: Vec<Elem> = self
                .elements()
                .map(|x| self.mul(self.mul(x, g), self.inv(x)))
                .collect();
            class.sort_unstable();
            class.dedup();
            for &c in &class {
                seen.insert(c as usize);
            }
            classes.push(class);
        }
        classes
    }

    /// Simple and nonabelian: every nontrivial conjugacy class normally
    /// generates the whole group.
    pub fn is_simple_nonabelian(&self) -> bool {
        if self.order == 1 || self.is_abelian() {
            return false;
        }
        self.conjugacy_classes()
            .iter()
            .filter(|c| c[0] != IDENTITY)
            .all(|c| self.closure_set(c).count_ones(..) == self.order)
    }

    /// Least `n` such that some `n`-tuple generates the group.
    pub fn rank(&self) -> usize {
        if self.order == 1 {
            return 0;
        }
        if self
            .elements()
            .any(|g| self.element_order(g) as usize == self.order)
        {
            return 1;
        }
        if self
            .elements()
            .any(|a| self.elements().any(|b| self.generates_pair(a, b)))
        {
            return 2;
        }
        let mut lattice = SubgroupLattice::new(self);
        let mut frontier = vec![SubgroupLattice::TRIVIAL];
        for n in 1.. {
            let mut next: Vec<SubgroupId> = Vec::new();
            for &s in &frontier {
                for g in self.elements() {
                    let t = lattice.join(s, g);
                    if lattice.is_whole(t) {
                        return n;
                    }
                    next.push(t);
                }
            }
            next.sort_unstable();
            next.dedup();
            frontier = next;
        }
        unreachable!()
    }

    /// Lexicographically least generating pair, if any.
    pub fn least_generating_pair(&self) -> Option<(Elem, Elem)> {
        self.elements()
            .flat_map(|a| self.elements().map(move |b| (a, b)))
            .find(|&(a, b)| self.generates_pair(a, b))
    }

    /// All automorphisms, computed on first use with [`DEFAULT_AUT_CAP`].
    pub fn automorphisms(&self) -> Result<Arc<AutGroup>> {
        if let Some(a) = self.automorphisms.get() {
            return Ok(a.clone());
        }
        let auts = Arc::new(AutGroup::compute(self, DEFAULT_AUT_CAP)?);
        let _ = self.automorphisms.set(auts);
        Ok(self.automorphisms.get().unwrap().clone())
    }

    /// Like [`FiniteGroup::automorphisms`] with an explicit size cap; not cached.
    pub fn automorphisms_with_cap(&self, cap: usize) -> Result<AutGroup> {
        AutGroup::compute(self, cap)
    }
}

/// Parses `spec` and loads it.
pub fn load(spec: &str) -> Result<FiniteGroup> {
    load_group(&spec.parse()?)
}

/// Loads a table file directly.
pub fn load_table(path: &Path) -> Result<FiniteGroup> {
    load_group(&GroupSpec::Table(path.to_path_buf()))
}
