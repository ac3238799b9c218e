//! Regular-map layer: (2,m,n)*-triples, Euler characteristic, flag counts,
//! the structural predicates on odd-characteristic groups and the brute
//! force census of a small group.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::algebra::{as_prime_power, factor_u64, p_part};
use crate::error::{Error, Result};
use crate::permgrp::{
    count_tuple_images, is_soluble, odd_core_with, quotient_with, sylow2_shape_with, ElementTable,
    GeneratorTree, NormalSubgroupHandle, Perm, PermGroup, Quotient, Sylow2Kind,
};

/// Default budget for [`classify_maps_for_group`].
pub const CENSUS_CAP: usize = 2_000;

/// chi = -|G| (mn - 2m - 2n) / (4mn), checked against the product form
/// -(|G|/2)(1/2 - 1/m - 1/n).
pub fn euler_characteristic(order: &BigUint, m: u64, n: u64) -> Result<BigInt> {
    euler_characteristic_big(order, &BigUint::from(m), &BigUint::from(n))
}

pub fn euler_characteristic_big(order: &BigUint, m: &BigUint, n: &BigUint) -> Result<BigInt> {
    let two = BigUint::from(2u32);
    if *m < two || *n < two {
        return Err(Error::param(format!("type {{{m},{n}}} needs m, n >= 2")));
    }
    let l = m.lcm(n) * &two;
    if !(order % &l).is_zero() {
        return Err(Error::contract(format!("order {order} is not divisible by 2 lcm({m},{n})")));
    }
    let g = BigInt::from(order.clone());
    let (mb, nb) = (BigInt::from(m.clone()), BigInt::from(n.clone()));
    let inner: BigInt = &mb * &nb - BigInt::from(2) * &mb - BigInt::from(2) * &nb;
    let first = BigRational::new(-(&g * inner), BigInt::from(4) * &mb * &nb);
    let half = BigRational::new(BigInt::from(1), BigInt::from(2));
    let second = -(BigRational::from(g) / BigInt::from(2))
        * (half - BigRational::new(1.into(), mb) - BigRational::new(1.into(), nb));
    if first != second {
        return Err(Error::Consistency(format!("Euler forms disagree: {first} vs {second}")));
    }
    if !first.is_integer() {
        return Err(Error::contract(format!("Euler characteristic {first} is not an integer")));
    }
    Ok(first.to_integer())
}

fn chi_i64(order: &BigUint, m: u64, n: u64) -> Result<i64> {
    euler_characteristic(order, m, n)?
        .to_i64()
        .ok_or_else(|| Error::param("Euler characteristic outside i64"))
}

/// A verified (2,m,n)*-group with its generating involutions.
#[derive(Clone, Debug)]
pub struct MapTriple {
    group: PermGroup,
    a: Perm,
    b: Perm,
    c: Perm,
    m: u64,
    n: u64,
    chi: i64,
}

impl MapTriple {
    pub fn group(&self) -> &PermGroup {
        &self.group
    }
    pub fn a(&self) -> &Perm {
        &self.a
    }
    pub fn b(&self) -> &Perm {
        &self.b
    }
    pub fn c(&self) -> &Perm {
        &self.c
    }
    pub fn m(&self) -> u64 {
        self.m
    }
    pub fn n(&self) -> u64 {
        self.n
    }
    pub fn chi(&self) -> i64 {
        self.chi
    }
    pub fn order(&self) -> u64 {
        self.group.order_big().to_u64().expect("order fits in u64")
    }

    pub fn is_degenerate(&self) -> bool {
        self.m <= 2 || self.n <= 2
    }

    /// (c, b, a): the dual map, of type {n, m}.
    pub fn dual(&self) -> MapTriple {
        MapTriple {
            group: self.group.clone(),
            a: self.c.clone(),
            b: self.b.clone(),
            c: self.a.clone(),
            m: self.n,
            n: self.m,
            chi: self.chi,
        }
    }

    /// Triple whose group order and non-orientability were certified by the
    /// caller without a stabilizer chain.
    pub(crate) fn from_certified(group: PermGroup, a: Perm, b: Perm, c: Perm) -> Result<MapTriple> {
        check_relations(&a, &b, &c)?;
        let m = a.mul(&b).order();
        let n = b.mul(&c).order();
        let chi = chi_i64(group.order_big(), m, n)?;
        Ok(MapTriple { group, a, b, c, m, n, chi })
    }

    /// Same generators and group with a different recorded characteristic.
    /// Only meant for negative controls of the structural checks.
    pub fn with_claimed_chi(&self, chi: i64) -> MapTriple {
        MapTriple { chi, ..self.clone() }
    }

    pub fn certificate(&self) -> MapCertificate {
        map_counts(self)
    }
}

fn check_relations(a: &Perm, b: &Perm, c: &Perm) -> Result<()> {
    for (name, x) in [("a", a), ("b", b), ("c", c)] {
        if !x.mul(x).is_identity() {
            return Err(Error::NotInvolution(format!("{name}^2 != 1")));
        }
    }
    let ac = a.mul(c);
    if !ac.mul(&ac).is_identity() {
        return Err(Error::NotInvolution("(ac)^2 != 1".into()));
    }
    Ok(())
}

/// Accepts (a,b,c) iff the relations hold, they generate `g`, and ab, bc
/// already generate `g` (non-orientable carrier surface).
pub fn verify_star_group(g: &PermGroup, a: &Perm, b: &Perm, c: &Perm) -> Result<MapTriple> {
    if [a, b, c].iter().any(|x| x.degree() != g.degree()) {
        return Err(Error::param("degree mismatch"));
    }
    check_relations(a, b, c)?;
    let full = g.order_big();
    if ![a, b, c].iter().all(|x| g.contains(x)) {
        return Err(Error::NotGenerating("a generator lies outside the group".into()));
    }
    let abc = PermGroup::new(g.degree(), vec![a.clone(), b.clone(), c.clone()])?;
    if abc.order_big() != full {
        return Err(Error::NotGenerating(format!("<a,b,c> has order {} < {full}", abc.order_big())));
    }
    let x = a.mul(b);
    let y = b.mul(c);
    let rot = PermGroup::new(g.degree(), vec![x.clone(), y.clone()])?;
    if rot.order_big() != full {
        return Err(Error::Orientable);
    }
    let (m, n) = (x.order(), y.order());
    let chi = chi_i64(full, m, n)?;
    Ok(MapTriple { group: g.clone(), a: a.clone(), b: b.clone(), c: c.clone(), m, n, chi })
}

#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct MapCertificate {
    pub order: u64,
    pub m: u64,
    pub n: u64,
    pub chi: i64,
    pub non_orientable: bool,
    #[serde(rename = "V")]
    pub vertices: u64,
    #[serde(rename = "E")]
    pub edges: u64,
    #[serde(rename = "F")]
    pub faces: u64,
    /// -chi = r^d with r an odd prime.
    pub r: Option<u64>,
    pub d: Option<u32>,
    pub u: u64,
    pub degenerate: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub census_label: Option<String>,
}

impl MapCertificate {
    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.census_label = Some(label.into());
        self
    }
}

/// Odd prime r and d >= 1 with -chi = r^d, if any.
pub fn chi_prime_power(chi: i64) -> Option<(u64, u32)> {
    if chi >= -2 {
        return None;
    }
    let v = BigUint::from(chi.unsigned_abs());
    match as_prime_power(&v).ok()? {
        Some((p, e)) if p > BigUint::from(2u32) => Some((p.to_u64()?, e)),
        _ => None,
    }
}

pub fn map_counts(t: &MapTriple) -> MapCertificate {
    let order = t.order();
    let vertices = order / (2 * t.n);
    let edges = order / 4;
    let faces = order / (2 * t.m);
    debug_assert_eq!(vertices as i64 - edges as i64 + faces as i64, t.chi);
    let pp = chi_prime_power(t.chi);
    MapCertificate {
        order,
        m: t.m,
        n: t.n,
        chi: t.chi,
        non_orientable: true,
        vertices,
        edges,
        faces,
        r: pp.map(|x| x.0),
        d: pp.map(|x| x.1),
        u: vertices + faces,
        degenerate: t.is_degenerate(),
        census_label: None,
    }
}

// ---------------------------------------------------------------------------
// quotient data

#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct QuotientData {
    pub odd_core_order: u64,
    pub m_bar: u64,
    pub n_bar: u64,
    pub m_star: u64,
    pub n_star: u64,
    pub m_o: u64,
    pub n_o: u64,
    pub m_1: u64,
    pub n_1: u64,
}

fn image_orders(q: &Quotient, t: &MapTriple) -> Result<(u64, u64)> {
    Ok((q.image_order(&t.a.mul(&t.b))?, q.image_order(&t.b.mul(&t.c))?))
}

/// Orders of abN, bcN in G/N, without forming G/O.
pub fn quotient_orders(t: &MapTriple, n: &NormalSubgroupHandle) -> Result<(u64, u64)> {
    if n.is_trivial() {
        return Ok((t.m, t.n));
    }
    let table = Arc::new(t.group.elements()?);
    image_orders(&quotient_with(table, n)?, t)
}

pub fn quotient_data(t: &MapTriple, n: &NormalSubgroupHandle) -> Result<QuotientData> {
    let table = Arc::new(t.group.elements()?);
    let core = odd_core_with(&t.group, &table)?;
    let (m_bar, n_bar) = image_orders(&quotient_with(table.clone(), &core)?, t)?;
    let (m_star, n_star) =
        if n.is_trivial() { (t.m, t.n) } else { image_orders(&quotient_with(table, n)?, t)? };
    Ok(QuotientData {
        odd_core_order: core.order()?,
        m_bar,
        n_bar,
        m_star,
        n_star,
        m_o: t.m / m_bar,
        n_o: t.n / n_bar,
        m_1: t.m / m_star,
        n_1: t.n / n_star,
    })
}

// ---------------------------------------------------------------------------
// structural checks

#[derive(Clone, Debug, Serialize)]
pub struct LemmaCheck {
    pub id: &'static str,
    pub statement: &'static str,
    pub applicable: bool,
    pub pass: bool,
    pub witness: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct LemmaReport {
    pub order: u64,
    pub chi: i64,
    pub odd_core_order: u64,
    pub checks: Vec<LemmaCheck>,
}

impl LemmaReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn check(&self, id: &str) -> Option<&LemmaCheck> {
        self.checks.iter().find(|c| c.id == id)
    }
}

pub fn verify_structural_lemmas(t: &MapTriple) -> Result<LemmaReport> {
    structural_checks(t, t.chi)
}

fn part(n: u64, p: u64) -> u64 {
    p_part(n, p).expect("p is prime")
}

fn structural_checks(t: &MapTriple, chi: i64) -> Result<LemmaReport> {
    if chi % 2 == 0 {
        return Err(Error::contract(format!("chi = {chi} is even")));
    }
    let g = &t.group;
    let table = Arc::new(g.elements()?);
    let order = table.len() as u64;
    let has_order = |o: u64| (0..order as u32).any(|x| table.order_of(x) as u64 == o);
    let mut checks = Vec::new();

    let shape = sylow2_shape_with(g, &table)?;
    checks.push(LemmaCheck {
        id: "i",
        statement: "Sylow 2-subgroups are dihedral (Klein four included)",
        applicable: true,
        pass: shape.kind.is_dihedral_like(),
        witness: format!("{:?} of order {}", shape.kind, shape.order),
    });

    let primes: Vec<u64> = factor_u64(order).into_iter().map(|(p, _)| p).filter(|&p| p != 2).collect();
    let mut bad = Vec::new();
    let mut seen = Vec::new();
    for &p in &primes {
        if chi.unsigned_abs().is_multiple_of(p) {
            continue;
        }
        seen.push(p);
        if !has_order(part(order, p)) {
            bad.push(p);
        }
    }
    checks.push(LemmaCheck {
        id: "ii",
        statement: "Sylow t-subgroups are cyclic for odd t not dividing chi",
        applicable: !seen.is_empty(),
        pass: bad.is_empty(),
        witness: if bad.is_empty() {
            format!("cyclic for t in {seen:?}")
        } else {
            format!("non-cyclic for t in {bad:?}")
        },
    });

    let core = odd_core_with(g, &table)?;
    let core_order = core.order()?;
    let q = quotient_with(table.clone(), &core)?;
    let gbar = order / core_order;
    let (mb, nb) = image_orders(&q, t)?;

    let lhs = part(gbar, 2);
    let rhs = 2 * part(mb, 2) * part(nb, 2);
    let antecedent = lhs > rhs;
    let consequent = part(order, 2) == 4 && t.m % 2 == 1 && t.n % 2 == 1;
    checks.push(LemmaCheck {
        id: "iii",
        statement: "|G/O|_2 > 2|m'|_2|n'|_2 forces |G|_2 = 4 with m, n odd",
        applicable: antecedent,
        pass: !antecedent || consequent,
        witness: format!("|G/O|_2 = {lhs}, 2|m'|_2|n'|_2 = {rhs}, |G|_2 = {}", part(order, 2)),
    });

    let r = chi_prime_power(chi).map(|x| x.0);
    let mut offenders = Vec::new();
    let mut big_primes = Vec::new();
    for (p, _) in factor_u64(gbar) {
        if p == 2 {
            continue;
        }
        if part(gbar, p) > part(mb, p) * part(nb, p) {
            big_primes.push(p);
            if Some(p) != r {
                offenders.push(p);
            }
        }
    }
    checks.push(LemmaCheck {
        id: "iv",
        statement: "for chi = -r^d, odd t with |G/O|_t > |m'|_t|n'|_t equals r",
        applicable: r.is_some(),
        pass: r.is_none() || offenders.is_empty(),
        witness: format!("r = {r:?}, primes exceeding the bound: {big_primes:?}"),
    });

    let soluble = is_soluble(g)?;
    let (pass, witness) = if !soluble {
        (true, "not soluble".to_string())
    } else if gbar.is_power_of_two() {
        (true, format!("G/O is a 2-group of order {gbar}"))
    } else if gbar == 24 {
        let mut profile = BTreeMap::new();
        for x in q.group.elements()?.perms() {
            *profile.entry(x.order()).or_insert(0u32) += 1;
        }
        let s4: BTreeMap<u64, u32> = [(1, 1), (2, 9), (3, 8), (4, 6)].into_iter().collect();
        (profile == s4, format!("G/O of order 24 with element-order profile {profile:?}"))
    } else {
        (false, format!("soluble with |G/O| = {gbar}"))
    };
    checks.push(LemmaCheck {
        id: "v",
        statement: "soluble G has G/O a 2-group or S4",
        applicable: soluble,
        pass,
        witness,
    });

    Ok(LemmaReport { order, chi, odd_core_order: core_order, checks })
}

/// The structural checks run against a claimed characteristic instead of
/// the true one; a wrong claim should trip check (iv).
pub fn verify_structural_lemmas_with_chi(t: &MapTriple, chi: i64) -> Result<LemmaReport> {
    structural_checks(t, chi)
}

// ---------------------------------------------------------------------------
// triple search and census

/// Raw triple found by search, as element indices.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub(crate) struct RawTriple {
    pub a: u32,
    pub b: u32,
    pub c: u32,
    pub m: u32,
    pub n: u32,
}

/// Enumerates (a, b, c) with a an involution-class representative, b, c
/// involutions, c commuting with a, ab of order m and bc of order n (when
/// given), and <ab, bc> the whole group. Results sorted.
pub(crate) fn search_raw_triples(
    table: &ElementTable,
    m: Option<u32>,
    n: Option<u32>,
    limit: usize,
    generates: &(dyn Fn(u32, u32) -> bool + Sync),
) -> Vec<(RawTriple, u64)> {
    let invs = table.involutions();
    let classes: Vec<Vec<u32>> =
        table.classes().into_iter().filter(|c| table.order_of(c[0]) == 2).collect();
    let mut out = Vec::new();
    for cls in &classes {
        let a = cls[0];
        let weight = cls.len() as u64;
        let comm: Vec<u32> = invs.iter().copied().filter(|&c| table.mul(a, c) == table.mul(c, a) && c != a).collect();
        let mut found: Vec<RawTriple> = invs
            .par_iter()
            .flat_map_iter(|&b| {
                let ab = table.mul(a, b);
                let mo = table.order_of(ab);
                let mut local = Vec::new();
                if m.is_some_and(|m| m != mo) {
                    return local;
                }
                for &c in &comm {
                    let bc = table.mul(b, c);
                    let no = table.order_of(bc);
                    if n.is_some_and(|n| n != no) {
                        continue;
                    }
                    if generates(ab, bc) {
                        local.push(RawTriple { a, b, c, m: mo, n: no });
                    }
                }
                local
            })
            .collect();
        found.sort();
        for t in found {
            out.push((t, weight));
            if out.len() >= limit {
                return out;
            }
        }
    }
    out
}

#[derive(Clone, Debug)]
pub struct CensusClass {
    pub triple: MapTriple,
    pub m: u64,
    pub n: u64,
    pub chi: i64,
    /// Index of the dual class in the census listing.
    pub dual: usize,
}

impl CensusClass {
    pub fn self_dual(&self, index: usize) -> bool {
        self.dual == index
    }
}

#[derive(Clone, Debug)]
pub struct Census {
    pub order: u64,
    pub aut_order: u64,
    /// Ordered (a, b, c) triples per type.
    pub triple_counts: BTreeMap<(u64, u64), u64>,
    pub classes: Vec<CensusClass>,
}

impl Census {
    pub fn of_type(&self, m: u64, n: u64) -> Vec<&CensusClass> {
        self.classes.iter().filter(|c| c.m == m && c.n == n).collect()
    }

    /// Classes with m, n >= 3 and negative characteristic.
    pub fn hyperbolic(&self) -> Vec<&CensusClass> {
        self.classes.iter().filter(|c| c.m >= 3 && c.n >= 3 && c.chi < 0).collect()
    }

    /// Maps of type {m, n} counted up to duality.
    pub fn maps_up_to_duality(&self, m: u64, n: u64) -> usize {
        let idx: Vec<usize> = (0..self.classes.len())
            .filter(|&i| {
                let c = &self.classes[i];
                (c.m, c.n) == (m, n) || (c.m, c.n) == (n, m)
            })
            .collect();
        let self_dual = idx.iter().filter(|&&i| self.classes[i].dual == i).count();
        (idx.len() + self_dual) / 2
    }
}

/// Every (2,m,n)*-triple of `g` up to automorphisms of `g`.
pub fn classify_maps_for_group(g: &PermGroup) -> Result<Census> {
    classify_maps_capped(g, CENSUS_CAP)
}

pub fn classify_maps_capped(g: &PermGroup, cap: usize) -> Result<Census> {
    let table = g
        .elements_capped(cap + 1)
        .map_err(|_| Error::budget("census group order", cap as u64))?;
    if table.len() > cap {
        return Err(Error::budget("census group order", cap as u64));
    }
    let n = table.len();
    let gen = |x: u32, y: u32| table.generates(&[x, y]);
    let raw = search_raw_triples(&table, None, None, usize::MAX, &gen);
    let order = n as u64;
    if raw.is_empty() {
        return Ok(Census { order, aut_order: 0, triple_counts: BTreeMap::new(), classes: Vec::new() });
    }
    let first = raw[0].0;
    let aut_order = count_tuple_images(&table, &[first.a, first.b, first.c])?;

    let mut counts: BTreeMap<(u64, u64), u64> = BTreeMap::new();
    let mut by_type: BTreeMap<(u64, u64), Vec<RawTriple>> = BTreeMap::new();
    for (t, w) in &raw {
        *counts.entry((t.m as u64, t.n as u64)).or_default() += w;
        by_type.entry((t.m as u64, t.n as u64)).or_default().push(*t);
    }
    let mut reps: Vec<(RawTriple, GeneratorTree)> = Vec::new();
    for (ty, list) in &by_type {
        let total = counts[ty];
        if !total.is_multiple_of(aut_order) {
            return Err(Error::Consistency(format!(
                "{total} triples of type {ty:?} not divisible by |Aut| = {aut_order}"
            )));
        }
        let want = (total / aut_order) as usize;
        let start = reps.len();
        for t in list {
            if reps.len() - start == want {
                break;
            }
            let img = [t.a, t.b, t.c];
            if reps[start..].iter().any(|(_, tree)| tree.extend(&table, &img).is_some()) {
                continue;
            }
            reps.push((*t, GeneratorTree::new(&table, &[t.a, t.b, t.c])?));
        }
        if reps.len() - start != want {
            return Err(Error::Consistency(format!("found {} classes of type {ty:?}, expected {want}", reps.len() - start)));
        }
    }
    let mut classes = Vec::new();
    for (i, (t, _)) in reps.iter().enumerate() {
        let dual_img = [t.c, t.b, t.a];
        let dual = reps
            .iter()
            .position(|(s, tree)| (s.m, s.n) == (t.n, t.m) && tree.extend(&table, &dual_img).is_some())
            .ok_or_else(|| Error::Consistency(format!("dual of class {i} not found")))?;
        let (pa, pb, pc) = (table.perm(t.a), table.perm(t.b), table.perm(t.c));
        let m = t.m as u64;
        let nn = t.n as u64;
        let chi = chi_i64(&BigUint::from(order), m, nn)?;
        let triple = MapTriple {
            group: g.clone(),
            a: pa.clone(),
            b: pb.clone(),
            c: pc.clone(),
            m,
            n: nn,
            chi,
        };
        classes.push(CensusClass { triple, m, n: nn, chi, dual });
    }
    Ok(Census { order, aut_order, triple_counts: counts, classes })
}

/// Whether two triples of the same group are equivalent under Aut(G).
pub fn triples_equivalent(t1: &MapTriple, t2: &MapTriple) -> Result<bool> {
    let table = t1.group.elements_capped(CENSUS_CAP)?;
    let idx = |p: &Perm| table.index_of(p).ok_or_else(|| Error::contract("element outside the group"));
    let tree = GeneratorTree::new(&table, &[idx(&t1.a)?, idx(&t1.b)?, idx(&t1.c)?])?;
    Ok(tree.extend(&table, &[idx(&t2.a)?, idx(&t2.b)?, idx(&t2.c)?]).is_some())
}

/// Sylow 2-shape of the triple's group: convenience for property tests.
pub fn sylow2_kind(t: &MapTriple) -> Result<Sylow2Kind> {
    let table = t.group.elements()?;
    Ok(sylow2_shape_with(&t.group, &table)?.kind)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn big(x: u64) -> BigUint {
        BigUint::from(x)
    }

    fn cyc(n: usize, cs: &[&[u32]]) -> Perm {
        Perm::from_cycles(n, cs).unwrap()
    }

    fn dihedral_triple(l: u32) -> (PermGroup, Perm, Perm, Perm) {
        // D_l on l points: b, c reflections, a the half turn
        let n = l as usize;
        let b = Perm::from_images((0..l).map(|i| (l - i) % l).collect()).unwrap();
        let c = Perm::from_images((0..l).map(|i| (l + 1 - i) % l).collect()).unwrap();
        let a = b.mul(&c).pow(l as i64 / 2);
        let g = PermGroup::new(n, vec![b.clone(), c.clone()]).unwrap();
        (g, a, b, c)
    }

    #[test]
    fn euler_examples() {
        assert_eq!(euler_characteristic(&big(60), 5, 5).unwrap(), BigInt::from(-3));
        assert_eq!(euler_characteristic(&big(336), 3, 8).unwrap(), BigInt::from(-7));
        assert_eq!(euler_characteristic(&big(1092), 3, 13).unwrap(), BigInt::from(-49));
        for l in (2..40).step_by(2) {
            assert_eq!(euler_characteristic(&big(2 * l), 2, l).unwrap(), BigInt::from(1));
        }
        assert!(matches!(euler_characteristic(&big(50), 5, 5), Err(Error::Contract(_))));
        assert!(euler_characteristic(&big(60), 1, 5).is_err());
    }

    #[test]
    fn dihedral_is_degenerate_star_group() {
        let (g, a, b, c) = dihedral_triple(4);
        let t = verify_star_group(&g, &a, &b, &c).unwrap();
        assert_eq!((t.m(), t.n(), t.chi()), (2, 4, 1));
        let cert = t.certificate();
        assert_eq!((cert.vertices, cert.edges, cert.faces), (1, 2, 2));
        assert!(cert.degenerate);
    }

    #[test]
    fn orientable_rejected() {
        // D_5 x C_2: a central, b, c reflections
        let n = 5u32;
        let b = Perm::from_images((0..n).map(|i| (n - i) % n).collect()).unwrap();
        let c = Perm::from_images((0..n).map(|i| (n + 1 - i) % n).collect()).unwrap();
        let z = cyc(2, &[&[0, 1]]);
        let id2 = Perm::identity(2);
        let id5 = Perm::identity(5);
        let a = id5.direct_sum(&z);
        let (b, c) = (b.direct_sum(&z), c.direct_sum(&z));
        let g = PermGroup::new(7, vec![a.clone(), b.clone(), c.clone()]).unwrap();
        assert_eq!(g.order().unwrap(), 20);
        assert_eq!(verify_star_group(&g, &a, &b, &c).unwrap_err(), Error::Orientable);
        let _ = id2;
        let bad = cyc(7, &[&[0, 1, 2]]);
        assert!(matches!(verify_star_group(&g, &bad, &b, &c), Err(Error::NotInvolution(_))));
    }

    #[test]
    fn non_generating_rejected() {
        let s4 = PermGroup::new(4, vec![cyc(4, &[&[0, 1, 2, 3]]), cyc(4, &[&[0, 1]])]).unwrap();
        let a = cyc(4, &[&[0, 1]]);
        let b = cyc(4, &[&[1, 2]]);
        let c = cyc(4, &[&[0, 1]]);
        assert!(matches!(verify_star_group(&s4, &a, &b, &c), Err(Error::NotGenerating(_))));
        let c = cyc(4, &[&[2, 3]]);
        // (2,3,3) inside S4: ab, bc are even
        assert_eq!(verify_star_group(&s4, &a, &b, &c).unwrap_err(), Error::Orientable);
    }

    #[test]
    fn chi_prime_powers() {
        assert_eq!(chi_prime_power(-49), Some((7, 2)));
        assert_eq!(chi_prime_power(-3), Some((3, 1)));
        assert_eq!(chi_prime_power(-15), None);
        assert_eq!(chi_prime_power(1), None);
        assert_eq!(chi_prime_power(-8), None);
    }

    #[test]
    fn klein_census_has_no_hyperbolic_class() {
        let v4 = PermGroup::new(4, vec![cyc(4, &[&[0, 1], &[2, 3]]), cyc(4, &[&[0, 2], &[1, 3]])]).unwrap();
        let c = classify_maps_for_group(&v4).unwrap();
        assert!(c.hyperbolic().is_empty());
    }

    #[test]
    fn a5_census() {
        let a5 = PermGroup::new(5, vec![cyc(5, &[&[0, 1, 2]]), cyc(5, &[&[0, 1, 2, 3, 4]])]).unwrap();
        let c = classify_maps_for_group(&a5).unwrap();
        assert_eq!(c.aut_order, 120);
        let types: Vec<(u64, u64, i64)> = c.classes.iter().map(|k| (k.m, k.n, k.chi)).collect();
        assert!(types.contains(&(5, 5, -3)), "{types:?}");
        assert_eq!(c.of_type(5, 5).len(), 1);
        assert_eq!(c.hyperbolic().len(), 1);
        for (i, k) in c.classes.iter().enumerate() {
            let t = &k.triple;
            let again = verify_star_group(t.group(), t.a(), t.b(), t.c()).unwrap();
            assert_eq!(again.chi(), k.chi);
            assert_eq!(c.classes[k.dual].dual, i);
        }
        let t = &c.of_type(5, 5)[0].triple;
        let rep = verify_structural_lemmas(t).unwrap();
        assert!(rep.all_pass(), "{rep:?}");
    }
}
