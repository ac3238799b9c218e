//! Permutation groups: stabilizer chains, element tables and the structural
//! queries the map checks need (odd core, Sylow 2-subgroups, quotients,
//! Frattini subgroups, automorphism counts).

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, OnceLock};

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive};
use rayon::prelude::*;
use serde::Serialize;

use crate::algebra::{factor_u64, p_part};
use crate::error::{Error, Result};

/// Default cap on group orders handled by [`group_order`].
pub const ORDER_CAP: u64 = 10_000_000_000;
/// Default cap on explicit element enumeration.
pub const ENUM_CAP: usize = 50_000;
/// Largest group for which a full multiplication table is kept.
pub const TABLE_CAP: usize = 2_600;
/// Budget for [`count_automorphisms`].
pub const AUT_CAP: usize = 1_500;

// ---------------------------------------------------------------------------
// permutations

/// A permutation of {0, ..., n-1}. Products read left to right:
/// `x.mul(y)` applies `x` first.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Perm(Vec<u32>);

impl Serialize for Perm {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.0.serialize(s)
    }
}

impl Perm {
    pub fn identity(degree: usize) -> Self {
        Perm((0..degree as u32).collect())
    }

    pub fn from_images(images: Vec<u32>) -> Result<Self> {
        let n = images.len();
        let mut seen = vec![false; n];
        for &x in &images {
            let x = x as usize;
            if x >= n || seen[x] {
                return Err(Error::param("image list is not a bijection"));
            }
            seen[x] = true;
        }
        Ok(Perm(images))
    }

    /// Builds from disjoint cycles; points not mentioned are fixed.
    pub fn from_cycles(degree: usize, cycles: &[&[u32]]) -> Result<Self> {
        let mut img: Vec<u32> = (0..degree as u32).collect();
        let mut touched = vec![false; degree];
        for cyc in cycles {
            for (i, &x) in cyc.iter().enumerate() {
                let x = x as usize;
                if x >= degree || touched[x] {
                    return Err(Error::param("cycles are not disjoint or leave the domain"));
                }
                touched[x] = true;
                img[x] = cyc[(i + 1) % cyc.len()];
            }
        }
        Ok(Perm(img))
    }

    pub(crate) fn from_vec_unchecked(images: Vec<u32>) -> Self {
        Perm(images)
    }

    pub fn degree(&self) -> usize {
        self.0.len()
    }

    pub fn images(&self) -> &[u32] {
        &self.0
    }

    #[inline]
    pub fn image(&self, x: u32) -> u32 {
        self.0[x as usize]
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().enumerate().all(|(i, &x)| i as u32 == x)
    }

    /// `self` then `other`.
    pub fn mul(&self, other: &Perm) -> Perm {
        Perm(self.0.iter().map(|&x| other.0[x as usize]).collect())
    }

    pub fn inverse(&self) -> Perm {
        let mut inv = vec![0u32; self.0.len()];
        for (i, &x) in self.0.iter().enumerate() {
            inv[x as usize] = i as u32;
        }
        Perm(inv)
    }

    pub fn pow(&self, k: i64) -> Perm {
        let n = self.0.len();
        let mut out = vec![0u32; n];
        let mut done = vec![false; n];
        let mut cyc = Vec::new();
        for start in 0..n {
            if done[start] {
                continue;
            }
            cyc.clear();
            let mut x = start as u32;
            loop {
                done[x as usize] = true;
                cyc.push(x);
                x = self.0[x as usize];
                if x as usize == start {
                    break;
                }
            }
            let len = cyc.len() as i64;
            let shift = k.rem_euclid(len) as usize;
            for (i, &y) in cyc.iter().enumerate() {
                out[y as usize] = cyc[(i + shift) % cyc.len()];
            }
        }
        Perm(out)
    }

    /// Cycle lengths of non-trivial cycles.
    pub fn cycle_lengths(&self) -> Vec<usize> {
        let n = self.0.len();
        let mut done = vec![false; n];
        let mut out = Vec::new();
        for start in 0..n {
            if done[start] {
                continue;
            }
            let mut len = 0;
            let mut x = start;
            while !done[x] {
                done[x] = true;
                x = self.0[x] as usize;
                len += 1;
            }
            if len > 1 {
                out.push(len);
            }
        }
        out
    }

    pub fn order(&self) -> u64 {
        self.cycle_lengths().into_iter().fold(1u64, |acc, l| acc.lcm(&(l as u64)))
    }

    /// `other^-1 self other`.
    pub fn conj(&self, other: &Perm) -> Perm {
        other.inverse().mul(self).mul(other)
    }

    /// `[x, y] = x^-1 y^-1 x y`.
    pub fn commutator(&self, other: &Perm) -> Perm {
        self.inverse().mul(&other.inverse()).mul(self).mul(other)
    }

    pub fn first_moved(&self) -> Option<u32> {
        self.0.iter().enumerate().find(|(i, &x)| *i as u32 != x).map(|(i, _)| i as u32)
    }

    /// Embeds into a larger domain, moving point i to i + offset.
    pub fn shifted(&self, offset: usize, degree: usize) -> Perm {
        let mut img: Vec<u32> = (0..degree as u32).collect();
        for (i, &x) in self.0.iter().enumerate() {
            img[i + offset] = x + offset as u32;
        }
        Perm(img)
    }

    /// Acts as `self` on the first block and `other` on the second.
    pub fn direct_sum(&self, other: &Perm) -> Perm {
        let off = self.0.len() as u32;
        let mut img = self.0.clone();
        img.extend(other.0.iter().map(|&x| x + off));
        Perm(img)
    }

    /// Restriction to the block [start, start + len), which must be invariant.
    pub fn restrict(&self, start: usize, len: usize) -> Perm {
        Perm(self.0[start..start + len].iter().map(|&x| x - start as u32).collect())
    }
}

impl fmt::Display for Perm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = self.0.len();
        let mut done = vec![false; n];
        let mut any = false;
        for start in 0..n {
            if done[start] || self.0[start] as usize == start {
                continue;
            }
            any = true;
            write!(f, "(")?;
            let mut x = start;
            let mut first = true;
            while !done[x] {
                done[x] = true;
                if !first {
                    write!(f, " ")?;
                }
                write!(f, "{x}")?;
                first = false;
                x = self.0[x] as usize;
            }
            write!(f, ")")?;
        }
        if !any {
            write!(f, "()")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Perm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

// ---------------------------------------------------------------------------
// stabilizer chains

struct Level {
    base: u32,
    gens: Vec<Perm>,
    orbit: Vec<u32>,
    /// For each orbit point x: (u, u^-1) with base^u = x.
    trans: Vec<Option<Box<(Perm, Perm)>>>,
}

impl Level {
    fn new(base: u32, degree: usize) -> Self {
        Level { base, gens: Vec::new(), orbit: Vec::new(), trans: (0..degree).map(|_| None).collect() }
    }

    fn rebuild(&mut self, degree: usize) {
        for x in &self.orbit {
            self.trans[*x as usize] = None;
        }
        let id = Perm::identity(degree);
        self.trans[self.base as usize] = Some(Box::new((id.clone(), id)));
        self.orbit = vec![self.base];
        let mut i = 0;
        while i < self.orbit.len() {
            let x = self.orbit[i];
            for s in &self.gens {
                let y = s.image(x);
                if self.trans[y as usize].is_none() {
                    let u = self.trans[x as usize].as_ref().unwrap().0.mul(s);
                    let uinv = u.inverse();
                    self.trans[y as usize] = Some(Box::new((u, uinv)));
                    self.orbit.push(y);
                }
            }
            i += 1;
        }
    }
}

/// Base and strong generating set built by the deterministic Schreier-Sims
/// algorithm.
pub struct StabChain {
    degree: usize,
    levels: Vec<Level>,
}

impl StabChain {
    pub fn new(degree: usize, gens: &[Perm]) -> Self {
        let gens: Vec<Perm> = gens.iter().filter(|g| !g.is_identity()).cloned().collect();
        let mut chain = StabChain { degree, levels: Vec::new() };
        if gens.is_empty() {
            return chain;
        }
        for g in &gens {
            if chain.levels.iter().all(|l| g.image(l.base) == l.base) {
                let b = g.first_moved().unwrap();
                chain.levels.push(Level::new(b, degree));
            }
        }
        for i in 0..chain.levels.len() {
            let fixed: Vec<u32> = chain.levels[..i].iter().map(|l| l.base).collect();
            chain.levels[i].gens =
                gens.iter().filter(|g| fixed.iter().all(|&b| g.image(b) == b)).cloned().collect();
            chain.levels[i].rebuild(degree);
        }

        let mut i = chain.levels.len() as isize - 1;
        while i >= 0 {
            let iu = i as usize;
            let mut jump = None;
            'pairs: for oi in 0..chain.levels[iu].orbit.len() {
                let beta = chain.levels[iu].orbit[oi];
                for si in 0..chain.levels[iu].gens.len() {
                    let lvl = &chain.levels[iu];
                    let s = &lvl.gens[si];
                    let u = &lvl.trans[beta as usize].as_ref().unwrap().0;
                    let target = s.image(beta);
                    let vinv = &lvl.trans[target as usize].as_ref().unwrap().1;
                    let y = u.mul(s).mul(vinv);
                    if y.is_identity() {
                        continue;
                    }
                    let (h, j) = chain.strip(y, iu + 1);
                    if j < chain.levels.len() || !h.is_identity() {
                        if j == chain.levels.len() {
                            chain.levels.push(Level::new(h.first_moved().unwrap(), degree));
                        }
                        for l in iu + 1..=j {
                            chain.levels[l].gens.push(h.clone());
                            chain.levels[l].rebuild(degree);
                        }
                        jump = Some(j as isize);
                        break 'pairs;
                    }
                }
            }
            match jump {
                Some(j) => i = j,
                None => i -= 1,
            }
        }
        chain
    }

    fn strip(&self, mut g: Perm, from: usize) -> (Perm, usize) {
        for (i, lvl) in self.levels.iter().enumerate().skip(from) {
            let beta = g.image(lvl.base);
            match &lvl.trans[beta as usize] {
                None => return (g, i),
                Some(t) => g = g.mul(&t.1),
            }
        }
        (g, self.levels.len())
    }

    pub fn order(&self) -> BigUint {
        self.levels.iter().fold(BigUint::one(), |acc, l| acc * BigUint::from(l.orbit.len()))
    }

    pub fn contains(&self, g: &Perm) -> bool {
        if g.degree() != self.degree {
            return false;
        }
        let (h, j) = self.strip(g.clone(), 0);
        j == self.levels.len() && h.is_identity()
    }

    pub fn base(&self) -> Vec<u32> {
        self.levels.iter().map(|l| l.base).collect()
    }
}

// ---------------------------------------------------------------------------
// groups

#[derive(Clone)]
pub struct PermGroup {
    degree: usize,
    gens: Vec<Perm>,
    order: OnceLock<BigUint>,
    chain: OnceLock<Arc<StabChain>>,
}

impl fmt::Debug for PermGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PermGroup").field("degree", &self.degree).field("gens", &self.gens).finish()
    }
}

impl PermGroup {
    pub fn new(degree: usize, gens: Vec<Perm>) -> Result<Self> {
        if degree == 0 {
            return Err(Error::param("degree must be at least 1"));
        }
        if let Some(g) = gens.iter().find(|g| g.degree() != degree) {
            return Err(Error::param(format!("generator of degree {} in a group of degree {degree}", g.degree())));
        }
        Ok(PermGroup { degree, gens, order: OnceLock::new(), chain: OnceLock::new() })
    }

    pub fn trivial(degree: usize) -> Self {
        PermGroup::new(degree, Vec::new()).unwrap()
    }

    /// A group whose order is known by construction. Used where a stabilizer
    /// chain would be too large to build; callers must certify the order.
    pub fn with_known_order(degree: usize, gens: Vec<Perm>, order: BigUint) -> Result<Self> {
        let g = PermGroup::new(degree, gens)?;
        let _ = g.order.set(order);
        Ok(g)
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn generators(&self) -> &[Perm] {
        &self.gens
    }

    pub fn chain(&self) -> &StabChain {
        self.chain.get_or_init(|| Arc::new(StabChain::new(self.degree, &self.gens)))
    }

    /// Exact order, with no cap.
    pub fn order_big(&self) -> &BigUint {
        self.order.get_or_init(|| self.chain().order())
    }

    pub fn order(&self) -> Result<u64> {
        let o = group_order(self)?;
        Ok(o.to_u64().unwrap())
    }

    pub fn contains(&self, g: &Perm) -> bool {
        self.chain().contains(g)
    }

    pub fn contains_group(&self, other: &PermGroup) -> bool {
        other.gens.iter().all(|g| self.contains(g))
    }

    pub fn is_trivial(&self) -> bool {
        self.gens.iter().all(|g| g.is_identity())
    }

    /// Subgroup generated by some elements of this group's domain.
    pub fn subgroup(&self, gens: Vec<Perm>) -> Result<PermGroup> {
        PermGroup::new(self.degree, gens)
    }

    pub fn elements(&self) -> Result<ElementTable> {
        ElementTable::new(self, ENUM_CAP)
    }

    pub fn elements_capped(&self, cap: usize) -> Result<ElementTable> {
        ElementTable::new(self, cap)
    }
}

/// Order of the generated group, capped at [`ORDER_CAP`].
pub fn group_order(g: &PermGroup) -> Result<BigUint> {
    group_order_capped(g, ORDER_CAP)
}

pub fn group_order_capped(g: &PermGroup, cap: u64) -> Result<BigUint> {
    let o = g.order_big();
    if *o > BigUint::from(cap) {
        return Err(Error::budget(format!("group order {o}"), cap));
    }
    Ok(o.clone())
}

pub fn element_order(g: &PermGroup, x: &Perm) -> Result<u64> {
    if x.degree() != g.degree() {
        return Err(Error::param("permutation degree differs from the group's"));
    }
    Ok(x.order())
}

/// Disjoint-union action of a direct product.
pub fn direct_product(factors: &[&PermGroup]) -> Result<PermGroup> {
    let degree: usize = factors.iter().map(|g| g.degree()).sum();
    let mut gens = Vec::new();
    let mut off = 0;
    for g in factors {
        for s in g.generators() {
            gens.push(s.shifted(off, degree));
        }
        off += g.degree();
    }
    PermGroup::new(degree, gens)
}

// ---------------------------------------------------------------------------
// element tables

/// All elements of a group, indexed in breadth-first order from the
/// identity (index 0), with fast multiplication.
pub struct ElementTable {
    degree: usize,
    elements: Vec<Perm>,
    index: HashMap<Perm, u32>,
    gen_idx: Vec<u32>,
    /// rmul[s][x] = index of x * gen_s
    rmul: Vec<Vec<u32>>,
    parent: Vec<(u32, u32)>,
    table: Option<Vec<u32>>,
    inv: Vec<u32>,
    orders: Vec<u32>,
}

impl ElementTable {
    pub fn new(g: &PermGroup, cap: usize) -> Result<Self> {
        let gens: Vec<Perm> = g.generators().to_vec();
        let id = Perm::identity(g.degree());
        let mut elements = vec![id.clone()];
        let mut index = HashMap::new();
        index.insert(id, 0u32);
        let mut parent = vec![(0u32, u32::MAX)];
        let mut rmul: Vec<Vec<u32>> = vec![Vec::new(); gens.len()];
        let mut i = 0;
        while i < elements.len() {
            for (si, s) in gens.iter().enumerate() {
                let y = elements[i].mul(s);
                let idx = match index.get(&y) {
                    Some(&k) => k,
                    None => {
                        if elements.len() >= cap {
                            return Err(Error::budget("element enumeration", cap as u64));
                        }
                        let k = elements.len() as u32;
                        index.insert(y.clone(), k);
                        elements.push(y);
                        parent.push((i as u32, si as u32));
                        k
                    }
                };
                rmul[si].push(idx);
            }
            i += 1;
        }
        let n = elements.len();
        let gen_idx = rmul.iter().map(|r| r[0]).collect();
        let table = (n <= TABLE_CAP).then(|| {
            let mut t = vec![0u32; n * n];
            for row in 0..n {
                let base = row * n;
                t[base] = row as u32;
                for j in 1..n {
                    let (p, s) = parent[j];
                    t[base + j] = rmul[s as usize][t[base + p as usize] as usize];
                }
            }
            t
        });
        let inv = elements.iter().map(|e| index[&e.inverse()]).collect();
        let orders = elements.iter().map(|e| e.order() as u32).collect();
        Ok(ElementTable { degree: g.degree(), elements, index, gen_idx, rmul, parent, table, inv, orders })
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn perm(&self, i: u32) -> &Perm {
        &self.elements[i as usize]
    }

    pub fn perms(&self) -> &[Perm] {
        &self.elements
    }

    pub fn index_of(&self, p: &Perm) -> Option<u32> {
        self.index.get(p).copied()
    }

    pub fn generator_indices(&self) -> &[u32] {
        &self.gen_idx
    }

    #[inline]
    pub fn mul(&self, i: u32, j: u32) -> u32 {
        match &self.table {
            Some(t) => t[i as usize * self.elements.len() + j as usize],
            None => self.index[&self.elements[i as usize].mul(&self.elements[j as usize])],
        }
    }

    /// Right multiplication by the k-th group generator.
    pub fn mul_gen(&self, i: u32, k: usize) -> u32 {
        self.rmul[k][i as usize]
    }

    #[inline]
    pub fn inv(&self, i: u32) -> u32 {
        self.inv[i as usize]
    }

    #[inline]
    pub fn order_of(&self, i: u32) -> u32 {
        self.orders[i as usize]
    }

    /// `by^-1 x by`
    pub fn conj(&self, x: u32, by: u32) -> u32 {
        self.mul(self.mul(self.inv(by), x), by)
    }

    pub fn pow(&self, x: u32, k: u64) -> u32 {
        let mut r = 0;
        let mut b = x;
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                r = self.mul(r, b);
            }
            b = self.mul(b, b);
            k >>= 1;
        }
        r
    }

    /// Breadth-first word for element i: list of generator numbers.
    pub fn word(&self, i: u32) -> Vec<u32> {
        let mut w = Vec::new();
        let mut x = i;
        while x != 0 {
            let (p, s) = self.parent[x as usize];
            w.push(s);
            x = p;
        }
        w.reverse();
        w
    }

    /// Elements of the subgroup generated by `seeds`.
    pub fn closure(&self, seeds: &[u32]) -> Vec<u32> {
        let mut seen = vec![false; self.len()];
        seen[0] = true;
        let mut out = vec![0u32];
        let mut i = 0;
        while i < out.len() {
            let x = out[i];
            for &s in seeds {
                let y = self.mul(x, s);
                if !seen[y as usize] {
                    seen[y as usize] = true;
                    out.push(y);
                }
            }
            i += 1;
        }
        out
    }

    pub fn generates(&self, seeds: &[u32]) -> bool {
        self.closure(seeds).len() == self.len()
    }

    /// Conjugacy classes, each sorted, ordered by smallest member.
    pub fn classes(&self) -> Vec<Vec<u32>> {
        let n = self.len();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for start in 0..n as u32 {
            if seen[start as usize] {
                continue;
            }
            seen[start as usize] = true;
            let mut cls = vec![start];
            let mut i = 0;
            while i < cls.len() {
                let x = cls[i];
                for &s in &self.gen_idx {
                    let y = self.conj(x, s);
                    if !seen[y as usize] {
                        seen[y as usize] = true;
                        cls.push(y);
                    }
                }
                i += 1;
            }
            cls.sort_unstable();
            out.push(cls);
        }
        out
    }

    pub fn involutions(&self) -> Vec<u32> {
        (0..self.len() as u32).filter(|&i| self.orders[i as usize] == 2).collect()
    }

    pub fn exponent(&self) -> u64 {
        self.orders.iter().fold(1u64, |a, &o| a.lcm(&(o as u64)))
    }

    pub fn center_size(&self) -> usize {
        (0..self.len() as u32)
            .filter(|&x| self.gen_idx.iter().all(|&s| self.mul(x, s) == self.mul(s, x)))
            .count()
    }
}

// ---------------------------------------------------------------------------
// normal subgroups

#[derive(Clone, Debug)]
pub struct NormalSubgroupHandle {
    pub ambient: PermGroup,
    pub group: PermGroup,
}

impl NormalSubgroupHandle {
    pub fn generators(&self) -> &[Perm] {
        self.group.generators()
    }

    pub fn order(&self) -> Result<u64> {
        self.group.order()
    }

    pub fn is_trivial(&self) -> bool {
        self.group.is_trivial()
    }

    pub fn trivial(ambient: &PermGroup) -> Self {
        NormalSubgroupHandle { ambient: ambient.clone(), group: PermGroup::trivial(ambient.degree()) }
    }
}

pub fn is_normal(g: &PermGroup, h: &PermGroup) -> bool {
    h.generators().iter().all(|x| g.generators().iter().all(|s| h.contains(&x.conj(s))))
}

/// Smallest normal subgroup of `g` containing `seeds`.
pub fn normal_closure(g: &PermGroup, seeds: &[Perm]) -> Result<NormalSubgroupHandle> {
    for s in seeds {
        if !g.contains(s) {
            return Err(Error::contract(format!("seed {s} is not in the group")));
        }
    }
    let mut gens: Vec<Perm> = seeds.iter().filter(|s| !s.is_identity()).cloned().collect();
    gens.sort();
    gens.dedup();
    let mut h = PermGroup::new(g.degree(), gens.clone())?;
    let mut queue: Vec<Perm> = gens.clone();
    while let Some(x) = queue.pop() {
        for s in g.generators() {
            let c = x.conj(s);
            if !h.contains(&c) {
                gens.push(c.clone());
                h = PermGroup::new(g.degree(), gens.clone())?;
                queue.push(c);
            }
        }
    }
    Ok(NormalSubgroupHandle { ambient: g.clone(), group: h })
}

/// Largest normal subgroup of odd order.
pub fn odd_core(g: &PermGroup) -> Result<NormalSubgroupHandle> {
    let table = g.elements()?;
    odd_core_with(g, &table)
}

pub fn odd_core_with(g: &PermGroup, table: &ElementTable) -> Result<NormalSubgroupHandle> {
    let mut core = NormalSubgroupHandle::trivial(g);
    for cls in table.classes() {
        let x = cls[0];
        if table.order_of(x).is_multiple_of(2) || x == 0 {
            continue;
        }
        let xp = table.perm(x);
        if core.group.contains(xp) {
            continue;
        }
        let ncl = normal_closure(g, std::slice::from_ref(xp))?;
        if ncl.group.order_big().is_odd() {
            let mut seeds = core.group.generators().to_vec();
            seeds.push(xp.clone());
            core = normal_closure(g, &seeds)?;
        }
    }
    Ok(core)
}

/// The derived subgroup.
pub fn derived_subgroup(g: &PermGroup) -> Result<NormalSubgroupHandle> {
    let gens = g.generators();
    let mut seeds = Vec::new();
    for i in 0..gens.len() {
        for j in i + 1..gens.len() {
            seeds.push(gens[i].commutator(&gens[j]));
        }
    }
    normal_closure(g, &seeds)
}

pub fn is_soluble(g: &PermGroup) -> Result<bool> {
    let mut cur = g.clone();
    loop {
        if cur.is_trivial() {
            return Ok(true);
        }
        let d = derived_subgroup(&cur)?.group;
        if d.order_big() == cur.order_big() {
            return Ok(d.is_trivial());
        }
        cur = d;
    }
}

// ---------------------------------------------------------------------------
// Sylow subgroups

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Sylow2Kind {
    Trivial,
    Cyclic,
    Klein,
    Dihedral,
    Other,
}

impl Sylow2Kind {
    /// Klein four counts as dihedral of order 4.
    pub fn is_dihedral_like(self) -> bool {
        matches!(self, Sylow2Kind::Klein | Sylow2Kind::Dihedral)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Sylow2Shape {
    pub kind: Sylow2Kind,
    pub order: u64,
}

/// A Sylow p-subgroup grown one normalizing p-element at a time.
pub fn sylow_subgroup(g: &PermGroup, table: &ElementTable, p: u64) -> Result<PermGroup> {
    let n = table.len() as u64;
    let target = p_part(n, p)?;
    let mut cands: Vec<u32> = (1..table.len() as u32)
        .filter(|&x| {
            let o = table.order_of(x) as u64;
            p_part(o, p).unwrap() == o
        })
        .collect();
    // large orders first: fewer steps
    cands.sort_by_key(|&x| std::cmp::Reverse(table.order_of(x)));
    let mut sub = PermGroup::trivial(g.degree());
    while sub.order_big() < &BigUint::from(target) {
        // a p-element outside P normalising P exists until P is Sylow
        let x = cands
            .iter()
            .copied()
            .find(|&x| {
                let xp = table.perm(x);
                !sub.contains(xp) && sub.generators().iter().all(|s| sub.contains(&s.conj(xp)))
            })
            .ok_or_else(|| Error::Consistency("no p-element normalises a non-Sylow p-subgroup".into()))?;
        let mut gens = sub.generators().to_vec();
        gens.push(table.perm(x).clone());
        sub = PermGroup::new(g.degree(), gens)?;
    }
    Ok(sub)
}

/// Shape of a 2-group given by generators.
pub fn classify_2group(p: &PermGroup) -> Result<Sylow2Shape> {
    let order = p.order()?;
    let k = order.trailing_zeros();
    if order != 1 << k {
        return Err(Error::contract(format!("order {order} is not a power of 2")));
    }
    let kind = if k == 0 {
        Sylow2Kind::Trivial
    } else {
        let t = p.elements()?;
        let n = t.len() as u32;
        if (0..n).any(|x| t.order_of(x) as u64 == order) {
            Sylow2Kind::Cyclic
        } else if k == 2 {
            Sylow2Kind::Klein
        } else {
            let invs = t.involutions();
            let half = (order / 2) as u32;
            let dihedral = invs.iter().any(|&s| invs.iter().any(|&u| t.order_of(t.mul(s, u)) == half));
            if dihedral {
                Sylow2Kind::Dihedral
            } else {
                Sylow2Kind::Other
            }
        }
    };
    Ok(Sylow2Shape { kind, order })
}

pub fn sylow2_shape(g: &PermGroup) -> Result<Sylow2Shape> {
    let table = g.elements()?;
    sylow2_shape_with(g, &table)
}

pub fn sylow2_shape_with(g: &PermGroup, table: &ElementTable) -> Result<Sylow2Shape> {
    classify_2group(&sylow_subgroup(g, table, 2)?)
}

/// Odd Sylow subgroups cyclic; Sylow 2-subgroup trivial or with a cyclic
/// subgroup of index 2.
pub fn is_almost_sylow_cyclic(g: &PermGroup) -> Result<bool> {
    let table = g.elements()?;
    Ok(almost_sylow_cyclic_with(&table))
}

pub fn almost_sylow_cyclic_with(table: &ElementTable) -> bool {
    let n = table.len() as u64;
    let has_order = |o: u64| (0..table.len() as u32).any(|x| table.order_of(x) as u64 == o);
    for (t, e) in factor_u64(n) {
        let full = t.pow(e);
        if t == 2 {
            if full > 2 && !has_order(full) && !has_order(full / 2) {
                return false;
            }
        } else if !has_order(full) {
            return false;
        }
    }
    true
}

// ---------------------------------------------------------------------------
// quotients

/// G/N realised on the right cosets of N.
pub struct Quotient {
    pub group: PermGroup,
    table: Arc<ElementTable>,
    coset_of: Vec<u32>,
    reps: Vec<u32>,
}

impl Quotient {
    pub fn index(&self) -> usize {
        self.reps.len()
    }

    /// Image of an element of G.
    pub fn project(&self, x: &Perm) -> Result<Perm> {
        let xi = self
            .table
            .index_of(x)
            .ok_or_else(|| Error::contract(format!("{x} is not in the group")))?;
        let img = self.reps.iter().map(|&r| self.coset_of[self.table.mul(r, xi) as usize]).collect();
        Ok(Perm::from_vec_unchecked(img))
    }

    pub fn image_order(&self, x: &Perm) -> Result<u64> {
        Ok(self.project(x)?.order())
    }
}

pub fn quotient_group(g: &PermGroup, n: &NormalSubgroupHandle) -> Result<Quotient> {
    let table = Arc::new(g.elements()?);
    quotient_with(table, n)
}

pub fn quotient_with(table: Arc<ElementTable>, n: &NormalSubgroupHandle) -> Result<Quotient> {
    let mut nseeds = Vec::new();
    for x in n.generators() {
        nseeds.push(table.index_of(x).ok_or_else(|| Error::contract(format!("{x} is not in the group")))?);
    }
    let nelems = table.closure(&nseeds);
    let mut in_n = vec![false; table.len()];
    for &x in &nelems {
        in_n[x as usize] = true;
    }
    for &x in &nseeds {
        for &s in table.generator_indices() {
            if !in_n[table.conj(x, s) as usize] {
                return Err(Error::contract("subgroup is not normal"));
            }
        }
    }
    let mut coset_of = vec![u32::MAX; table.len()];
    let mut reps = Vec::new();
    for e in 0..table.len() as u32 {
        if coset_of[e as usize] != u32::MAX {
            continue;
        }
        let c = reps.len() as u32;
        reps.push(e);
        for &m in &nelems {
            coset_of[table.mul(m, e) as usize] = c;
        }
    }
    let index = reps.len();
    let gens = table
        .generator_indices()
        .iter()
        .map(|&s| Perm::from_vec_unchecked(reps.iter().map(|&r| coset_of[table.mul(r, s) as usize]).collect()))
        .collect();
    let group = PermGroup::new(index, gens)?;
    Ok(Quotient { group, table, coset_of, reps })
}

// ---------------------------------------------------------------------------
// p-groups

pub fn is_p_group(g: &PermGroup, p: u64) -> bool {
    let mut o = g.order_big().clone();
    let pb = BigUint::from(p);
    while (&o % &pb) == BigUint::from(0u32) {
        o /= &pb;
    }
    o.is_one()
}

/// Phi(L) = L^p L', as the normal closure of generator commutators and
/// p-th powers.
pub fn frattini_of_pgroup(g: &PermGroup, p: u64) -> Result<NormalSubgroupHandle> {
    if !crate::algebra::is_prime(p) {
        return Err(Error::param(format!("{p} is not prime")));
    }
    if !is_p_group(g, p) {
        return Err(Error::contract(format!("group of order {} is not a {p}-group", g.order_big())));
    }
    let gens = g.generators();
    let mut seeds: Vec<Perm> = gens.iter().map(|s| s.pow(p as i64)).collect();
    for i in 0..gens.len() {
        for j in i + 1..gens.len() {
            seeds.push(gens[i].commutator(&gens[j]));
        }
    }
    normal_closure(g, &seeds)
}

#[derive(Clone, Debug, Serialize)]
pub struct OrderBound {
    /// Rank of L/Phi(L); 0 for trivial L.
    pub j: u32,
    pub bound: u64,
    pub max_p_part: u64,
    pub holds: bool,
}

/// Checks |ord(h)|_p <= |G|_p / p^(j-1) over all elements of `g`.
pub fn check_order_bound(g: &PermGroup, l: &NormalSubgroupHandle, p: u64) -> Result<OrderBound> {
    if !is_p_group(&l.group, p) {
        return Err(Error::contract("l is not a p-group"));
    }
    if !g.contains_group(&l.group) || !is_normal(g, &l.group) {
        return Err(Error::contract("l is not a normal subgroup"));
    }
    let table = g.elements()?;
    let gp = p_part(table.len() as u64, p)?;
    let max_p_part = (0..table.len() as u32)
        .map(|x| p_part(table.order_of(x) as u64, p).unwrap())
        .max()
        .unwrap_or(1);
    let (j, bound) = if l.is_trivial() {
        (0, gp)
    } else {
        let phi = frattini_of_pgroup(&l.group, p)?;
        let idx = l.group.order_big() / phi.group.order_big();
        let j = crate::algebra::strip_prime(&idx, p).1;
        (j, gp / p.pow(j - 1))
    };
    Ok(OrderBound { j, bound, max_p_part, holds: max_p_part <= bound })
}

// ---------------------------------------------------------------------------
// automorphisms

/// Spanning tree of the Cayley graph for a generating tuple; used to test
/// whether an assignment of images extends to an automorphism.
pub struct GeneratorTree {
    gens: Vec<u32>,
    order: Vec<u32>,
    parent: Vec<(u32, u8)>,
}

impl GeneratorTree {
    pub fn new(table: &ElementTable, gens: &[u32]) -> Result<Self> {
        let n = table.len();
        let mut parent = vec![(u32::MAX, 0u8); n];
        parent[0] = (0, u8::MAX);
        let mut order = vec![0u32];
        let mut i = 0;
        while i < order.len() {
            let x = order[i];
            for (k, &s) in gens.iter().enumerate() {
                let y = table.mul(x, s);
                if parent[y as usize].0 == u32::MAX && y != 0 {
                    parent[y as usize] = (x, k as u8);
                    order.push(y);
                }
            }
            i += 1;
        }
        if order.len() != n {
            return Err(Error::NotGenerating(format!("tuple generates {} of {n} elements", order.len())));
        }
        Ok(GeneratorTree { gens: gens.to_vec(), order, parent })
    }

    /// The automorphism sending gens[k] to images[k], if there is one.
    pub fn extend(&self, table: &ElementTable, images: &[u32]) -> Option<Vec<u32>> {
        let n = table.len();
        let mut img = vec![0u32; n];
        let mut hit = vec![false; n];
        hit[0] = true;
        for &x in &self.order[1..] {
            let (p, k) = self.parent[x as usize];
            let y = table.mul(img[p as usize], images[k as usize]);
            if hit[y as usize] {
                return None;
            }
            hit[y as usize] = true;
            img[x as usize] = y;
        }
        for &x in &self.order {
            for (k, &s) in self.gens.iter().enumerate() {
                if img[table.mul(x, s) as usize] != table.mul(img[x as usize], images[k]) {
                    return None;
                }
            }
        }
        Some(img)
    }
}

/// |Aut(G)|, counted as the number of images of a generating tuple that
/// extend to automorphisms.
pub fn count_automorphisms(g: &PermGroup, triple: (&Perm, &Perm, &Perm)) -> Result<BigUint> {
    let table = g.elements_capped(AUT_CAP + 1).map_err(|_| Error::budget("automorphism count", AUT_CAP as u64))?;
    if table.len() > AUT_CAP {
        return Err(Error::budget("automorphism count", AUT_CAP as u64));
    }
    let idx = |p: &Perm| table.index_of(p).ok_or_else(|| Error::contract(format!("{p} is not in the group")));
    let gens = [idx(triple.0)?, idx(triple.1)?, idx(triple.2)?];
    Ok(BigUint::from(count_tuple_images(&table, &gens)?))
}

/// Number of automorphisms, via images of a generating tuple.
pub fn count_tuple_images(table: &ElementTable, gens: &[u32]) -> Result<u64> {
    let tree = GeneratorTree::new(table, gens)?;
    let n = table.len() as u32;
    let by_order = |o: u32| -> Vec<u32> { (0..n).filter(|&x| table.order_of(x) == o).collect() };
    let cands: Vec<Vec<u32>> = gens.iter().map(|&g| by_order(table.order_of(g))).collect();
    // orders of pairwise products prune most candidates
    let pair_orders: Vec<(usize, usize, u32)> = (0..gens.len())
        .flat_map(|i| (i + 1..gens.len()).map(move |j| (i, j)))
        .map(|(i, j)| (i, j, table.order_of(table.mul(gens[i], gens[j]))))
        .collect();
    let count = cands[0]
        .par_iter()
        .map(|&first| {
            let mut count = 0u64;
            let mut chosen = vec![first];
            search_images(table, &tree, &cands, &pair_orders, &mut chosen, &mut count);
            count
        })
        .sum();
    Ok(count)
}

fn search_images(
    table: &ElementTable,
    tree: &GeneratorTree,
    cands: &[Vec<u32>],
    pair_orders: &[(usize, usize, u32)],
    chosen: &mut Vec<u32>,
    count: &mut u64,
) {
    let k = chosen.len();
    if k == cands.len() {
        if tree.extend(table, chosen).is_some() {
            *count += 1;
        }
        return;
    }
    for &y in &cands[k] {
        let ok = pair_orders
            .iter()
            .filter(|&&(_, j, _)| j == k)
            .all(|&(i, _, o)| table.order_of(table.mul(chosen[i], y)) == o);
        if ok {
            chosen.push(y);
            search_images(table, tree, cands, pair_orders, chosen, count);
            chosen.pop();
        }
    }
}

/// All automorphisms of a small group as permutations of its element
/// indices, found from images of its generators.
pub fn automorphisms(table: &ElementTable) -> Result<Vec<Vec<u32>>> {
    let gens: Vec<u32> = table.generator_indices().to_vec();
    let tree = GeneratorTree::new(table, &gens)?;
    let n = table.len() as u32;
    let cands: Vec<Vec<u32>> =
        gens.iter().map(|&g| (0..n).filter(|&x| table.order_of(x) == table.order_of(g)).collect()).collect();
    let mut out = Vec::new();
    fn rec(table: &ElementTable, tree: &GeneratorTree, cands: &[Vec<u32>], chosen: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if chosen.len() == cands.len() {
            if let Some(img) = tree.extend(table, chosen) {
                out.push(img);
            }
            return;
        }
        for &y in &cands[chosen.len()] {
            chosen.push(y);
            rec(table, tree, cands, chosen, out);
            chosen.pop();
        }
    }
    rec(table, &tree, &cands, &mut Vec::new(), &mut out);
    out.sort();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cyc(n: usize, cs: &[&[u32]]) -> Perm {
        Perm::from_cycles(n, cs).unwrap()
    }

    pub(crate) fn sym(n: usize) -> PermGroup {
        let c: Vec<u32> = (0..n as u32).collect();
        PermGroup::new(n, vec![cyc(n, &[&c]), cyc(n, &[&[0, 1]])]).unwrap()
    }

    fn dihedral(l: usize) -> PermGroup {
        let rot: Vec<u32> = (0..l as u32).map(|i| (i + 1) % l as u32).collect();
        let refl: Vec<u32> = (0..l as u32).map(|i| (l as u32 - i) % l as u32).collect();
        PermGroup::new(l, vec![Perm::from_images(rot).unwrap(), Perm::from_images(refl).unwrap()]).unwrap()
    }

    fn cyclic(n: usize) -> PermGroup {
        let c: Vec<u32> = (0..n as u32).collect();
        PermGroup::new(n, vec![cyc(n, &[&c])]).unwrap()
    }

    #[test]
    fn perm_basics() {
        let a = cyc(4, &[&[0, 1, 2]]);
        let b = cyc(4, &[&[2, 3]]);
        // a then b: 0->1, 1->2->3, 2->0, 3->2
        assert_eq!(a.mul(&b).images(), &[1, 3, 0, 2]);
        assert_eq!(a.order(), 3);
        assert_eq!(a.pow(3), Perm::identity(4));
        assert_eq!(a.pow(-1), a.inverse());
        assert_eq!(format!("{}", a.mul(&b)), "(0 1 3 2)");
        assert_eq!(format!("{}", Perm::identity(3)), "()");
        assert!(Perm::from_images(vec![0, 0]).is_err());
        assert!(Perm::from_cycles(3, &[&[0, 1], &[1, 2]]).is_err());
    }

    #[test]
    fn orders() {
        assert_eq!(group_order(&PermGroup::trivial(1)).unwrap(), BigUint::from(1u32));
        assert_eq!(dihedral(15).order().unwrap(), 30);
        assert_eq!(sym(5).order().unwrap(), 120);
        assert_eq!(sym(8).order().unwrap(), 40320);
        let big = sym(20);
        assert!(matches!(group_order(&big), Err(Error::Budget { .. })));
        let prod = direct_product(&[&dihedral(3), &dihedral(5)]).unwrap();
        assert_eq!(prod.order().unwrap(), 60);
    }

    #[test]
    fn membership() {
        let s4 = sym(4);
        let a4 = PermGroup::new(4, vec![cyc(4, &[&[0, 1, 2]]), cyc(4, &[&[1, 2, 3]])]).unwrap();
        assert_eq!(a4.order().unwrap(), 12);
        assert!(a4.contains(&cyc(4, &[&[0, 1], &[2, 3]])));
        assert!(!a4.contains(&cyc(4, &[&[0, 1]])));
        assert!(s4.contains_group(&a4));
    }

    #[test]
    fn element_table_matches_perms() {
        let g = sym(4);
        let t = g.elements().unwrap();
        assert_eq!(t.len(), 24);
        for i in 0..24u32 {
            for j in 0..24u32 {
                assert_eq!(t.perm(t.mul(i, j)), &t.perm(i).mul(t.perm(j)));
            }
            assert_eq!(t.mul(i, t.inv(i)), 0);
        }
        assert_eq!(t.classes().len(), 5);
        assert_eq!(t.exponent(), 12);
        assert_eq!(t.center_size(), 1);
    }

    #[test]
    fn normal_closures() {
        let s4 = sym(4);
        let n = normal_closure(&s4, &[Perm::identity(4)]).unwrap();
        assert!(n.is_trivial());
        let n = normal_closure(&s4, &[cyc(4, &[&[0, 1], &[2, 3]])]).unwrap();
        assert_eq!(n.order().unwrap(), 4);
        let a5 = PermGroup::new(5, vec![cyc(5, &[&[0, 1, 2, 3, 4]]), cyc(5, &[&[0, 1, 2]])]).unwrap();
        let n = normal_closure(&a5, &[cyc(5, &[&[0, 1], &[2, 3]])]).unwrap();
        assert_eq!(n.order().unwrap(), 60);
        assert!(normal_closure(&a5, &[cyc(5, &[&[0, 1]])]).is_err());
    }

    #[test]
    fn odd_cores() {
        let a5 = PermGroup::new(5, vec![cyc(5, &[&[0, 1, 2, 3, 4]]), cyc(5, &[&[0, 1, 2]])]).unwrap();
        assert!(odd_core(&a5).unwrap().is_trivial());
        assert_eq!(odd_core(&dihedral(15)).unwrap().order().unwrap(), 15);
        assert!(odd_core(&sym(4)).unwrap().is_trivial());
        assert_eq!(odd_core(&cyclic(9)).unwrap().order().unwrap(), 9);
    }

    #[test]
    fn sylow_shapes() {
        let a5 = PermGroup::new(5, vec![cyc(5, &[&[0, 1, 2, 3, 4]]), cyc(5, &[&[0, 1, 2]])]).unwrap();
        assert_eq!(sylow2_shape(&a5).unwrap().kind, Sylow2Kind::Klein);
        assert_eq!(sylow2_shape(&cyclic(6)).unwrap().kind, Sylow2Kind::Cyclic);
        let s4 = sym(4);
        let sh = sylow2_shape(&s4).unwrap();
        assert_eq!((sh.kind, sh.order), (Sylow2Kind::Dihedral, 8));
        assert_eq!(sylow2_shape(&cyclic(9)).unwrap().kind, Sylow2Kind::Trivial);
        // Q8 in its regular representation is not dihedral
        let q8 = PermGroup::new(
            8,
            vec![cyc(8, &[&[0, 1, 2, 3], &[4, 5, 6, 7]]), cyc(8, &[&[0, 4, 2, 6], &[1, 7, 3, 5]])],
        )
        .unwrap();
        assert_eq!(q8.order().unwrap(), 8);
        assert_eq!(sylow2_shape(&q8).unwrap().kind, Sylow2Kind::Other);
    }

    #[test]
    fn almost_sylow_cyclic() {
        assert!(is_almost_sylow_cyclic(&dihedral(15)).unwrap());
        assert!(is_almost_sylow_cyclic(&sym(5)).unwrap());
        assert!(!is_almost_sylow_cyclic(&sym(6)).unwrap());
        let e9 = direct_product(&[&cyclic(3), &cyclic(3)]).unwrap();
        assert!(!is_almost_sylow_cyclic(&e9).unwrap());
    }

    #[test]
    fn quotients() {
        let s4 = sym(4);
        let v4 = normal_closure(&s4, &[cyc(4, &[&[0, 1], &[2, 3]])]).unwrap();
        let q = quotient_group(&s4, &v4).unwrap();
        assert_eq!(q.group.order().unwrap(), 6);
        assert_eq!(q.image_order(&cyc(4, &[&[0, 1, 2, 3]])).unwrap(), 2);
        let q = quotient_group(&s4, &NormalSubgroupHandle::trivial(&s4)).unwrap();
        assert_eq!(q.group.order().unwrap(), 24);
        let bad = NormalSubgroupHandle { ambient: s4.clone(), group: PermGroup::new(4, vec![cyc(4, &[&[0, 1]])]).unwrap() };
        assert!(matches!(quotient_group(&s4, &bad), Err(Error::Contract(_))));
        // S5 x C7 modulo the C7 factor
        let prod = direct_product(&[&sym(5), &cyclic(7)]).unwrap();
        let c7 = normal_closure(&prod, &[cyc(7, &[&[0, 1, 2, 3, 4, 5, 6]]).shifted(5, 12)]).unwrap();
        assert_eq!(quotient_group(&prod, &c7).unwrap().group.order().unwrap(), 120);
    }

    #[test]
    fn frattini() {
        let e9 = direct_product(&[&cyclic(3), &cyclic(3)]).unwrap();
        assert!(frattini_of_pgroup(&e9, 3).unwrap().is_trivial());
        assert_eq!(frattini_of_pgroup(&cyclic(9), 3).unwrap().order().unwrap(), 3);
        assert!(matches!(frattini_of_pgroup(&sym(3), 3), Err(Error::Contract(_))));
        let c9 = cyclic(9);
        let all = NormalSubgroupHandle { ambient: c9.clone(), group: c9.clone() };
        let ob = check_order_bound(&c9, &all, 3).unwrap();
        assert_eq!((ob.j, ob.bound, ob.holds), (1, 9, true));
        let ob = check_order_bound(&c9, &NormalSubgroupHandle::trivial(&c9), 3).unwrap();
        assert!(ob.holds);
    }

    #[test]
    fn automorphism_counts() {
        let c2 = PermGroup::new(2, vec![cyc(2, &[&[0, 1]])]).unwrap();
        let x = &c2.generators()[0];
        assert_eq!(count_automorphisms(&c2, (x, x, x)).unwrap(), BigUint::from(1u32));
        let s3 = sym(3);
        let (s, t) = (cyc(3, &[&[0, 1]]), cyc(3, &[&[1, 2]]));
        assert_eq!(count_automorphisms(&s3, (&s, &t, &s)).unwrap(), BigUint::from(6u32));
        let a5 = PermGroup::new(5, vec![cyc(5, &[&[0, 1, 2, 3, 4]]), cyc(5, &[&[0, 1, 2]])]).unwrap();
        let g0 = &a5.generators()[0];
        let g1 = &a5.generators()[1];
        assert_eq!(count_automorphisms(&a5, (g0, g1, g0)).unwrap(), BigUint::from(120u32));
        let t = cyclic(8).elements().unwrap();
        assert_eq!(automorphisms(&t).unwrap().len(), 4);
    }

    #[test]
    fn solubility() {
        assert!(is_soluble(&sym(4)).unwrap());
        assert!(!is_soluble(&sym(5)).unwrap());
        assert_eq!(derived_subgroup(&sym(4)).unwrap().order().unwrap(), 12);
    }
}
