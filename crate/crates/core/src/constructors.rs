//! Group builders: finite fields and PSL2/PGL2 on the projective line, the
//! three soluble dihedral families, Heisenberg and wreath groups, split
//! extensions found by homomorphism search, the cyclic semidirect covers,
//! and involution-triple search.

use std::collections::{BTreeSet, HashSet};
use std::path::Path;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::{is_prime, lcm};
use crate::error::{Error, Result};
use crate::mapcore::{
    chi_prime_power, euler_characteristic, search_raw_triples, verify_star_group, MapCertificate,
    MapTriple,
};
use crate::permgrp::{automorphisms, derived_subgroup, ElementTable, Perm, PermGroup, TABLE_CAP};

/// Element budget for [`find_triples`].
pub const FIND_CAP: usize = 50_000;
/// Element budget for the target group of a homomorphism search.
pub const HOM_TARGET_CAP: usize = 100_000;
/// Largest cyclic factor accepted by [`build_semidirect_cell`].
pub const CELL_ELL_CAP: u64 = 1 << 40;
/// Cells are materialized as permutations only below this degree.
pub const MATERIALIZE_CAP: u64 = 1 << 22;

// ---------------------------------------------------------------------------
// finite fields

/// GF(p^e); elements are encoded as integers sum c_i p^i.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FieldCtx {
    pub p: u64,
    pub e: u32,
    /// Monic modulus, lowest coefficient first.
    pub modulus: Vec<u64>,
    q: u64,
    primitive: u32,
}

fn digits(mut x: u64, p: u64, e: u32) -> Vec<u64> {
    let mut d = vec![0; e as usize];
    for c in d.iter_mut() {
        *c = x % p;
        x /= p;
    }
    d
}

fn poly_mod(mut a: Vec<u64>, modulus: &[u64], p: u64) -> Vec<u64> {
    let e = modulus.len() - 1;
    while a.len() > e {
        let top = a.pop().unwrap();
        if top != 0 {
            let base = a.len() - e;
            for (i, &m) in modulus[..e].iter().enumerate() {
                a[base + i] = (a[base + i] + (p - top) * m) % p;
            }
        }
    }
    a.resize(e, 0);
    a
}

fn has_factor(modulus: &[u64], p: u64) -> bool {
    // monic divisors of degree 1..=e/2
    let e = modulus.len() - 1;
    for deg in 1..=e / 2 {
        for code in 0..p.pow(deg as u32) {
            let mut f = digits(code, p, deg as u32);
            f.push(1);
            if poly_mod(modulus.to_vec(), &f, p).iter().all(|&c| c == 0) {
                return true;
            }
        }
    }
    false
}

pub fn make_field(p: u64, e: u32) -> Result<FieldCtx> {
    if p == 2 || p > 97 || !is_prime(p) {
        return Err(Error::param(format!("p = {p} must be an odd prime at most 97")));
    }
    if !(1..=4).contains(&e) {
        return Err(Error::param(format!("exponent {e} outside 1..=4")));
    }
    let q = p.pow(e);
    let modulus = (0..q)
        .map(|code| {
            let mut f = digits(code, p, e);
            f.push(1);
            f
        })
        .find(|f| e == 1 || (f[0] != 0 && !has_factor(f, p)))
        .expect("an irreducible polynomial exists");
    let mut ctx = FieldCtx { p, e, modulus, q, primitive: 0 };
    let divs: Vec<u64> = crate::algebra::factor_u64(q - 1).into_iter().map(|(r, _)| r).collect();
    ctx.primitive = (1..q as u32)
        .find(|&x| divs.iter().all(|&r| ctx.pow(x, (q - 1) / r) != 1))
        .expect("multiplicative group is cyclic");
    Ok(ctx)
}

impl FieldCtx {
    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn primitive(&self) -> u32 {
        self.primitive
    }

    fn encode(&self, d: &[u64]) -> u32 {
        d.iter().rev().fold(0u64, |acc, &c| acc * self.p + c) as u32
    }

    pub fn add(&self, x: u32, y: u32) -> u32 {
        let (a, b) = (digits(x as u64, self.p, self.e), digits(y as u64, self.p, self.e));
        let s: Vec<u64> = a.iter().zip(&b).map(|(u, v)| (u + v) % self.p).collect();
        self.encode(&s)
    }

    pub fn neg(&self, x: u32) -> u32 {
        let a = digits(x as u64, self.p, self.e);
        let s: Vec<u64> = a.iter().map(|u| (self.p - u) % self.p).collect();
        self.encode(&s)
    }

    pub fn sub(&self, x: u32, y: u32) -> u32 {
        self.add(x, self.neg(y))
    }

    pub fn mul(&self, x: u32, y: u32) -> u32 {
        let (a, b) = (digits(x as u64, self.p, self.e), digits(y as u64, self.p, self.e));
        let mut prod = vec![0u64; 2 * self.e as usize - 1];
        for (i, u) in a.iter().enumerate() {
            for (j, v) in b.iter().enumerate() {
                prod[i + j] = (prod[i + j] + u * v) % self.p;
            }
        }
        self.encode(&poly_mod(prod, &self.modulus, self.p))
    }

    pub fn pow(&self, x: u32, mut k: u64) -> u32 {
        let mut r = 1;
        let mut b = x;
        while k > 0 {
            if k & 1 == 1 {
                r = self.mul(r, b);
            }
            b = self.mul(b, b);
            k >>= 1;
        }
        r
    }

    pub fn inv(&self, x: u32) -> Result<u32> {
        if x == 0 {
            return Err(Error::param("zero has no inverse"));
        }
        Ok(self.pow(x, self.q - 2))
    }

    pub fn is_square(&self, x: u32) -> bool {
        x == 0 || self.pow(x, (self.q - 1) / 2) == 1
    }
}

// ---------------------------------------------------------------------------
// projective line

/// P^1(F_q): point 0 is infinity, point 1 + x is (x : 1).
#[derive(Clone, Debug)]
pub struct ProjectiveLine {
    pub ctx: FieldCtx,
}

impl ProjectiveLine {
    pub fn new(ctx: FieldCtx) -> Self {
        ProjectiveLine { ctx }
    }

    pub fn len(&self) -> usize {
        self.ctx.q as usize + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// z -> (alpha z + beta) / (gamma z + delta).
    pub fn mobius(&self, alpha: u32, beta: u32, gamma: u32, delta: u32) -> Result<Perm> {
        let f = &self.ctx;
        if f.sub(f.mul(alpha, delta), f.mul(beta, gamma)) == 0 {
            return Err(Error::param("singular matrix"));
        }
        let mut img = vec![0u32; self.len()];
        img[0] = if gamma == 0 { 0 } else { 1 + f.mul(alpha, f.inv(gamma)?) };
        for z in 0..f.q as u32 {
            let den = f.add(f.mul(gamma, z), delta);
            let num = f.add(f.mul(alpha, z), beta);
            img[1 + z as usize] = if den == 0 { 0 } else { 1 + f.mul(num, f.inv(den)?) };
        }
        Perm::from_images(img)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum LinearKind {
    Psl,
    Pgl,
}

pub fn make_pgl2(ctx: &FieldCtx, kind: LinearKind) -> Result<PermGroup> {
    let q = ctx.q;
    if q < 5 {
        return Err(Error::param(format!("q = {q} < 5")));
    }
    let line = ProjectiveLine::new(ctx.clone());
    let w = ctx.primitive;
    let minus_one = ctx.neg(1);
    let gens = match kind {
        LinearKind::Psl => vec![
            line.mobius(1, 1, 0, 1)?,
            line.mobius(ctx.mul(w, w), 0, 0, 1)?,
            line.mobius(0, minus_one, 1, 0)?,
        ],
        LinearKind::Pgl => vec![line.mobius(1, 1, 0, 1)?, line.mobius(w, 0, 0, 1)?, line.mobius(0, 1, 1, 0)?],
    };
    let order = match kind {
        LinearKind::Psl => q * (q * q - 1) / 2,
        LinearKind::Pgl => q * (q * q - 1),
    };
    let g = PermGroup::new(line.len(), gens)?;
    if *g.order_big() != BigUint::from(order) {
        return Err(Error::Consistency(format!("{kind:?}(2,{q}) came out with order {}", g.order_big())));
    }
    Ok(g)
}

pub fn pgl2(q: u64, kind: LinearKind) -> Result<PermGroup> {
    let (p, e) = match crate::algebra::factor_u64(q).as_slice() {
        [(p, e)] => (*p, *e),
        _ => return Err(Error::param(format!("{q} is not a prime power"))),
    };
    make_pgl2(&make_field(p, e)?, kind)
}

// ---------------------------------------------------------------------------
// triple search

#[derive(Clone, Debug)]
pub struct TripleSearch {
    pub triples: Vec<MapTriple>,
    /// True when the search ran to completion, so an empty list is a proof
    /// of nonexistence.
    pub exhaustive: bool,
}

pub fn find_triples(g: &PermGroup, m: u64, n: u64, limit: usize) -> Result<TripleSearch> {
    let table = g.elements_capped(FIND_CAP)?;
    find_triples_in(g, &table, m, n, limit)
}

pub fn find_triples_in(g: &PermGroup, table: &ElementTable, m: u64, n: u64, limit: usize) -> Result<TripleSearch> {
    let order = g.order_big().clone();
    let with_table = table.len() <= TABLE_CAP;
    let gen = |x: u32, y: u32| {
        if with_table {
            table.generates(&[x, y])
        } else {
            let h = PermGroup::new(g.degree(), vec![table.perm(x).clone(), table.perm(y).clone()]).unwrap();
            *h.order_big() == order
        }
    };
    let raw = search_raw_triples(table, Some(m as u32), Some(n as u32), limit.max(1), &gen);
    let exhaustive = raw.len() < limit.max(1);
    let mut triples = Vec::new();
    for (t, _) in raw.into_iter().take(limit) {
        triples.push(MapTriple::from_certified(
            g.clone(),
            table.perm(t.a).clone(),
            table.perm(t.b).clone(),
            table.perm(t.c).clone(),
        )?);
    }
    Ok(TripleSearch { triples, exhaustive })
}

/// Searches both (m, n) and (n, m).
pub fn find_triple_either(g: &PermGroup, m: u64, n: u64) -> Result<Option<MapTriple>> {
    let table = g.elements_capped(FIND_CAP)?;
    for (x, y) in [(m, n), (n, m)] {
        if let Some(t) = find_triples_in(g, &table, x, y, 1)?.triples.into_iter().next() {
            return Ok(Some(t));
        }
    }
    Ok(None)
}

// ---------------------------------------------------------------------------
// words

/// Evaluates a word in a, b, c such as "cbabc(ab)^2".
pub fn eval_word(word: &str, a: &Perm, b: &Perm, c: &Perm) -> Result<Perm> {
    let chars: Vec<char> = word.chars().filter(|c| !c.is_whitespace()).collect();
    let mut pos = 0;
    let r = parse_seq(&chars, &mut pos, [a, b, c])?;
    if pos != chars.len() {
        return Err(Error::Parse(format!("unexpected '{}' in {word}", chars[pos])));
    }
    Ok(r)
}

fn parse_seq(s: &[char], pos: &mut usize, g: [&Perm; 3]) -> Result<Perm> {
    let mut acc = Perm::identity(g[0].degree());
    while *pos < s.len() && s[*pos] != ')' {
        let base = match s[*pos] {
            'a' => g[0].clone(),
            'b' => g[1].clone(),
            'c' => g[2].clone(),
            '(' => {
                *pos += 1;
                let inner = parse_seq(s, pos, g)?;
                if s.get(*pos) != Some(&')') {
                    return Err(Error::Parse("unbalanced parenthesis".into()));
                }
                inner
            }
            ch => return Err(Error::Parse(format!("bad letter '{ch}'"))),
        };
        *pos += 1;
        let mut x = base;
        if s.get(*pos) == Some(&'^') {
            *pos += 1;
            let start = *pos;
            if s.get(*pos) == Some(&'-') {
                *pos += 1;
            }
            while *pos < s.len() && s[*pos].is_ascii_digit() {
                *pos += 1;
            }
            let k: i64 = s[start..*pos]
                .iter()
                .collect::<String>()
                .parse()
                .map_err(|_| Error::Parse("bad exponent".into()))?;
            x = x.pow(k);
        }
        acc = acc.mul(&x);
    }
    Ok(acc)
}

fn check_relators(t: &MapTriple, words: &[&str]) -> Result<()> {
    for w in words {
        if !eval_word(w, t.a(), t.b(), t.c())?.is_identity() {
            return Err(Error::Consistency(format!("relator {w} fails")));
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// dihedral families

/// Reflections i -> -i and i -> 1 - i on l points; their product is i -> i + 1.
fn polygon_reflections(l: u32) -> (Perm, Perm) {
    let s = Perm::from_vec_unchecked((0..l).map(|i| (l - i) % l).collect());
    let t = Perm::from_vec_unchecked((0..l).map(|i| (l + 1 - i) % l).collect());
    (s, t)
}

/// D_k generated by two involutions: k points for k >= 3, the regular
/// Klein four group for k = 2, C_2 for k = 1.
pub fn dihedral_group(k: u32) -> Result<PermGroup> {
    match k {
        0 => Err(Error::param("D_0")),
        1 => PermGroup::new(2, vec![Perm::from_cycles(2, &[&[0, 1]])?]),
        2 => PermGroup::new(
            4,
            vec![Perm::from_cycles(4, &[&[0, 1], &[2, 3]])?, Perm::from_cycles(4, &[&[0, 2], &[1, 3]])?],
        ),
        _ => {
            let (s, t) = polygon_reflections(k);
            PermGroup::new(k as usize, vec![s, t])
        }
    }
}

pub fn build_h1(ell: u64) -> Result<MapTriple> {
    if ell < 2 || ell % 2 == 1 {
        return Err(Error::param(format!("H1 needs even l >= 2, got {ell}")));
    }
    let (g, a, b, c) = if ell == 2 {
        let g = dihedral_group(2)?;
        let (b, c) = (g.generators()[0].clone(), g.generators()[1].clone());
        (g, b.mul(&c), b, c)
    } else {
        let (b, c) = polygon_reflections(ell as u32);
        let a = b.mul(&c).pow(ell as i64 / 2);
        (PermGroup::new(ell as usize, vec![b.clone(), c.clone()])?, a, b, c)
    };
    let t = verify_star_group(&g, &a, &b, &c)?;
    check_relators(&t, &["a^2", "b^2", "c^2", "(ac)^2", "(ab)^2", &format!("(bc)^{ell}"), &format!("a(bc)^{}", ell / 2)])?;
    Ok(t)
}

pub fn build_h2(j: u64, k: u64) -> Result<MapTriple> {
    if j < 3 || k < 3 || j.is_multiple_of(2) || k.is_multiple_of(2) || j.gcd(&k) != 1 {
        return Err(Error::param(format!("H2 needs odd coprime j, k >= 3, got ({j},{k})")));
    }
    let (s1, s1p) = polygon_reflections(j as u32);
    let (s2p, s2) = polygon_reflections(k as u32);
    let (ij, ik) = (Perm::identity(j as usize), Perm::identity(k as usize));
    let a = s1.direct_sum(&ik);
    let b = s1p.direct_sum(&s2p);
    let c = ij.direct_sum(&s2);
    let g = PermGroup::new((j + k) as usize, vec![a.clone(), b.clone(), c.clone()])?;
    let t = verify_star_group(&g, &a, &b, &c)?;
    check_relators(
        &t,
        &["a^2", "b^2", "c^2", "(ac)^2", &format!("(ab)^{}", 2 * j), &format!("(bc)^{}", 2 * k), &format!("b(ab)^{j}(bc)^{k}")],
    )?;
    Ok(t)
}

pub fn build_h3(ell: u64) -> Result<MapTriple> {
    if ell % 6 != 3 {
        return Err(Error::param(format!("H3 needs l = 3 mod 6, got {ell}")));
    }
    // points 0..4 are F_2^2 (bit 0 = e1, bit 1 = e2), then the l-gon
    let l = ell as u32;
    let (rb, rc) = polygon_reflections(l);
    let translate_e1 = Perm::from_vec_unchecked(vec![1, 0, 3, 2]);
    let swap = Perm::from_vec_unchecked(vec![0, 2, 1, 3]);
    // e1 -> e1, e2 -> e1 + e2
    let shear = Perm::from_vec_unchecked(vec![0, 1, 3, 2]);
    let a = translate_e1.direct_sum(&Perm::identity(l as usize));
    let b = swap.direct_sum(&rb);
    let c = shear.direct_sum(&rc);
    let g = PermGroup::new(4 + l as usize, vec![a.clone(), b.clone(), c.clone()])?;
    let t = verify_star_group(&g, &a, &b, &c)?;
    check_relators(&t, &["a^2", "b^2", "c^2", "(ac)^2", "(ab)^4", &format!("(bc)^{ell}"), "cbabc(ab)^2"])?;
    if t.order() != 8 * ell {
        return Err(Error::Consistency(format!("H3({ell}) has order {}", t.order())));
    }
    Ok(t)
}

// ---------------------------------------------------------------------------
// small p-groups

/// Upper unitriangular 3x3 matrices over F_3, acting regularly on 27 points.
/// (x, y, z)(x', y', z') = (x + x', y + y', z + z' + x y').
pub fn build_heisenberg() -> PermGroup {
    let idx = |x: u32, y: u32, z: u32| x + 3 * y + 9 * z;
    let right = |gx: u32, gy: u32, gz: u32| {
        let mut img = vec![0u32; 27];
        for x in 0..3 {
            for y in 0..3 {
                for z in 0..3 {
                    img[idx(x, y, z) as usize] = idx((x + gx) % 3, (y + gy) % 3, (z + gz + x * gy) % 3);
                }
            }
        }
        Perm::from_vec_unchecked(img)
    };
    PermGroup::with_known_order(27, vec![right(1, 0, 0), right(0, 1, 0)], BigUint::from(27u32)).unwrap()
}

/// C_3 wr C_3 on 9 points.
pub fn build_wreath_c3() -> PermGroup {
    let base = Perm::from_cycles(9, &[&[0, 1, 2]]).unwrap();
    let top = Perm::from_cycles(9, &[&[0, 3, 6], &[1, 4, 7], &[2, 5, 8]]).unwrap();
    PermGroup::with_known_order(9, vec![base, top], BigUint::from(81u32)).unwrap()
}

/// Elementary abelian p^k acting regularly on p^k points.
pub fn elementary_abelian(p: u64, k: u32) -> Result<PermGroup> {
    if !is_prime(p) || k == 0 {
        return Err(Error::param(format!("E_{p}^{k}")));
    }
    let n = p.pow(k);
    let gens = (0..k)
        .map(|i| {
            let step = p.pow(i);
            Perm::from_vec_unchecked(
                (0..n).map(|x| ((x / step + 1) % p * step + x - (x / step % p) * step) as u32).collect(),
            )
        })
        .collect();
    PermGroup::with_known_order(n as usize, gens, BigUint::from(n))
}

/// Regular representation of a direct product of small groups.
pub fn regular_direct_product(parts: &[&PermGroup]) -> Result<PermGroup> {
    crate::permgrp::direct_product(parts)
}

// ---------------------------------------------------------------------------
// homomorphism search

/// Homomorphisms from `acting` into the group enumerated by `target`, as
/// images of the generators of `acting`, one per conjugacy class of
/// homomorphisms. Sorted.
pub fn search_homs(acting: &PermGroup, target: &ElementTable, budget: usize) -> Result<Vec<Vec<u32>>> {
    let hg = acting.generators();
    let r = hg.len();
    if r == 0 {
        return Ok(vec![Vec::new()]);
    }
    let h_order = acting.order_big().clone();
    let nt = target.len() as u32;
    let orders: Vec<u64> = hg.iter().map(|x| x.order()).collect();
    let pair: Vec<Vec<u64>> = (0..r).map(|i| (0..r).map(|j| hg[i].mul(&hg[j]).order()).collect()).collect();
    let cand: Vec<Vec<u32>> = orders
        .iter()
        .map(|&o| (0..nt).filter(|&x| o % target.order_of(x) as u64 == 0).collect())
        .collect();
    let reps: Vec<u32> = target
        .classes()
        .into_iter()
        .map(|c| c[0])
        .filter(|&x| orders[0].is_multiple_of(target.order_of(x) as u64))
        .collect();
    let hdeg = acting.degree();
    let tdeg = target.degree();
    let valid = |imgs: &[u32]| -> bool {
        let diag: Vec<Perm> = hg.iter().zip(imgs).map(|(h, &t)| h.direct_sum(target.perm(t))).collect();
        let d = PermGroup::new(hdeg + tdeg, diag).unwrap();
        *d.order_big() == h_order
    };
    let results: Result<Vec<Vec<Vec<u32>>>> = reps
        .par_iter()
        .map(|&t0| {
            let cent: Vec<u32> = (0..nt).filter(|&y| target.mul(t0, y) == target.mul(y, t0)).collect();
            let mut found: BTreeSet<Vec<u32>> = BTreeSet::new();
            let mut leaves = 0usize;
            let mut stack = vec![t0];
            #[allow(clippy::too_many_arguments)]
            fn rec(
                stack: &mut Vec<u32>,
                r: usize,
                cand: &[Vec<u32>],
                pair: &[Vec<u64>],
                target: &ElementTable,
                leaves: &mut usize,
                budget: usize,
                out: &mut Vec<Vec<u32>>,
            ) -> Result<()> {
                let i = stack.len();
                if i == r {
                    *leaves += 1;
                    if *leaves > budget {
                        return Err(Error::budget("homomorphism search leaves", budget as u64));
                    }
                    out.push(stack.clone());
                    return Ok(());
                }
                for &x in &cand[i] {
                    let ok = (0..i).all(|j| pair[j][i].is_multiple_of(target.order_of(target.mul(stack[j], x)) as u64));
                    if ok {
                        stack.push(x);
                        rec(stack, r, cand, pair, target, leaves, budget, out)?;
                        stack.pop();
                    }
                }
                Ok(())
            }
            let mut leaves_out = Vec::new();
            rec(&mut stack, r, &cand, &pair, target, &mut leaves, budget, &mut leaves_out)?;
            let mut seen: HashSet<Vec<u32>> = HashSet::new();
            for imgs in leaves_out {
                if seen.contains(&imgs) || !valid(&imgs) {
                    continue;
                }
                let orbit: Vec<Vec<u32>> =
                    cent.iter().map(|&y| imgs.iter().map(|&x| target.conj(x, y)).collect()).collect();
                let canon = orbit.iter().min().unwrap().clone();
                seen.extend(orbit);
                found.insert(canon);
            }
            Ok(found.into_iter().collect())
        })
        .collect();
    let mut out: Vec<Vec<u32>> = results?.into_iter().flatten().collect();
    out.sort();
    Ok(out)
}

// ---------------------------------------------------------------------------
// module extensions

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModuleExtensionSpec {
    pub k: u32,
    pub p: u64,
    /// One k x k matrix per generator of the acting group, row-major,
    /// acting on column vectors.
    pub matrices: Vec<Vec<Vec<u64>>>,
}

fn vec_index(v: &[u64], p: u64) -> u32 {
    v.iter().rev().fold(0u64, |acc, &c| acc * p + c) as u32
}

fn matrix_perm(mat: &[Vec<u64>], p: u64) -> Perm {
    let k = mat.len() as u32;
    let n = p.pow(k);
    let img = (0..n)
        .map(|x| {
            let v = digits(x, p, k);
            let w: Vec<u64> = mat.iter().map(|row| row.iter().zip(&v).map(|(a, b)| a * b).sum::<u64>() % p).collect();
            vec_index(&w, p)
        })
        .collect();
    Perm::from_vec_unchecked(img)
}

fn perm_matrix(x: &Perm, p: u64, k: u32) -> Vec<Vec<u64>> {
    // column i is the image of e_i
    let cols: Vec<Vec<u64>> = (0..k).map(|i| digits(x.image(p.pow(i) as u32) as u64, p, k)).collect();
    (0..k as usize).map(|r| (0..k as usize).map(|c| cols[c][r]).collect()).collect()
}

/// GL_k(p) as permutations of the p^k vectors.
pub fn general_linear(p: u64, k: u32) -> Result<PermGroup> {
    if !is_prime(p) || k == 0 {
        return Err(Error::param(format!("GL_{k}({p})")));
    }
    let ku = k as usize;
    let id = |i: usize, j: usize| u64::from(i == j);
    let prim = (2..p).find(|&w| (1..p - 1).all(|e| crate::algebra::pow_mod(w, e, p) != 1)).unwrap_or(1);
    let mut gens = Vec::new();
    let diag: Vec<Vec<u64>> =
        (0..ku).map(|i| (0..ku).map(|j| if i == j && i == 0 { prim } else { id(i, j) }).collect()).collect();
    gens.push(matrix_perm(&diag, p));
    if ku > 1 {
        let cyc: Vec<Vec<u64>> = (0..ku).map(|i| (0..ku).map(|j| id((i + 1) % ku, j)).collect()).collect();
        let mut tv: Vec<Vec<u64>> = (0..ku).map(|i| (0..ku).map(|j| id(i, j)).collect()).collect();
        tv[0][1] = 1;
        gens.push(matrix_perm(&cyc, p));
        gens.push(matrix_perm(&tv, p));
    }
    let mut order = BigUint::from(1u32);
    let pk = BigUint::from(p).pow(k);
    for i in 0..k {
        order *= &pk - BigUint::from(p).pow(i);
    }
    let g = PermGroup::new(p.pow(k) as usize, gens)?;
    if *g.order_big() != order {
        return Err(Error::Consistency(format!("GL_{k}({p}) generators give order {}", g.order_big())));
    }
    Ok(g)
}

/// All actions of `acting` on F_p^k up to GL_k(p)-conjugacy.
pub fn search_module_actions(acting: &PermGroup, p: u64, k: u32) -> Result<Vec<ModuleExtensionSpec>> {
    if k == 0 {
        return Ok(vec![ModuleExtensionSpec { k, p, matrices: vec![Vec::new(); acting.generators().len()] }]);
    }
    if k > 3 || p > 13 {
        return Err(Error::budget("GL_k(p) with k <= 3, p <= 13", HOM_TARGET_CAP as u64));
    }
    let gl = general_linear(p, k)?;
    let table = gl.elements_capped(HOM_TARGET_CAP)?;
    let homs = search_homs(acting, &table, HOM_TARGET_CAP)?;
    Ok(homs
        .into_iter()
        .map(|imgs| ModuleExtensionSpec {
            k,
            p,
            matrices: imgs.iter().map(|&x| perm_matrix(table.perm(x), p, k)).collect(),
        })
        .collect())
}

/// F_p^k ⋊ H, on p^k affine points followed by the domain of H.
pub fn build_module_extension(acting: &PermGroup, spec: &ModuleExtensionSpec) -> Result<PermGroup> {
    if spec.k == 0 {
        return Ok(acting.clone());
    }
    if spec.matrices.len() != acting.generators().len() {
        return Err(Error::contract("one matrix per acting generator expected"));
    }
    let (p, k) = (spec.p, spec.k);
    for m in &spec.matrices {
        if m.len() != k as usize || m.iter().any(|r| r.len() != k as usize || r.iter().any(|&x| x >= p)) {
            return Err(Error::contract("malformed matrix"));
        }
    }
    let lin: Vec<Perm> = spec.matrices.iter().map(|m| matrix_perm(m, p)).collect();
    let n = p.pow(k) as usize;
    let hdeg = acting.degree();
    let diag: Vec<Perm> = lin.iter().zip(acting.generators()).map(|(l, h)| l.direct_sum(h)).collect();
    let d = PermGroup::new(n + hdeg, diag.clone())?;
    if d.order_big() != acting.order_big() {
        return Err(Error::contract("matrices do not satisfy the relations of the acting group"));
    }
    if lin.iter().any(|l| l.image(0) != 0 || matrix_perm(&perm_matrix(l, p, k), p) != *l) {
        return Err(Error::contract("matrix is not invertible"));
    }
    let e = elementary_abelian(p, k)?;
    let mut gens: Vec<Perm> = e.generators().iter().map(|t| t.direct_sum(&Perm::identity(hdeg))).collect();
    gens.extend(diag);
    let order = acting.order_big() * BigUint::from(n);
    let g = PermGroup::new(n + hdeg, gens)?;
    if *g.order_big() != order {
        return Err(Error::Consistency(format!("extension has order {}", g.order_big())));
    }
    Ok(g)
}

// ---------------------------------------------------------------------------
// extensions by automorphisms of a non-abelian kernel

/// A small group N with its element table and Aut(N) acting on N's
/// element indices.
pub struct KernelGroup {
    pub group: PermGroup,
    pub table: ElementTable,
    pub aut: PermGroup,
    pub aut_table: ElementTable,
}

impl KernelGroup {
    pub fn new(group: PermGroup) -> Result<Self> {
        let table = group.elements()?;
        let auts = automorphisms(&table)?;
        let n = table.len();
        let mut gens: Vec<Perm> = Vec::new();
        let mut current = PermGroup::trivial(n);
        for img in auts.iter() {
            let x = Perm::from_vec_unchecked(img.clone());
            if current.contains(&x) {
                continue;
            }
            gens.push(x);
            current = PermGroup::new(n, gens.clone())?;
            if current.order_big() == &BigUint::from(auts.len()) {
                break;
            }
        }
        let aut = PermGroup::with_known_order(n, gens, BigUint::from(auts.len()))?;
        let aut_table = aut.elements_capped(HOM_TARGET_CAP)?;
        Ok(KernelGroup { group, table, aut, aut_table })
    }

    pub fn aut_order(&self) -> usize {
        self.aut_table.len()
    }

    /// Homomorphisms acting -> Aut(N) up to conjugacy in Aut(N).
    pub fn actions(&self, acting: &PermGroup) -> Result<Vec<Vec<Perm>>> {
        let homs = search_homs(acting, &self.aut_table, HOM_TARGET_CAP)?;
        Ok(homs.into_iter().map(|h| h.iter().map(|&x| self.aut_table.perm(x).clone()).collect()).collect())
    }

    /// N ⋊ H on the elements of N (right translations and the given
    /// automorphisms) followed by the domain of H.
    pub fn extension(&self, acting: &PermGroup, images: &[Perm]) -> Result<PermGroup> {
        let n = self.table.len();
        let hdeg = acting.degree();
        let right: Vec<Perm> = self
            .group
            .generators()
            .iter()
            .map(|g| {
                let gi = self.table.index_of(g).unwrap();
                Perm::from_vec_unchecked((0..n as u32).map(|x| self.table.mul(x, gi)).collect())
                    .direct_sum(&Perm::identity(hdeg))
            })
            .collect();
        let mut gens = right;
        gens.extend(images.iter().zip(acting.generators()).map(|(a, h)| a.direct_sum(h)));
        let g = PermGroup::new(n + hdeg, gens)?;
        let want = acting.order_big() * BigUint::from(n);
        if *g.order_big() != want {
            return Err(Error::contract(format!("extension has order {}, expected {want}", g.order_big())));
        }
        Ok(g)
    }
}

// ---------------------------------------------------------------------------
// cyclic semidirect covers

#[derive(Clone, Debug)]
pub struct SemidirectSpec {
    pub base: MapTriple,
    /// The index-2 subgroup whose complement inverts C_l.
    pub h0: PermGroup,
    pub ell: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum CellPattern {
    /// a, b outside H0, c inside: a = z alpha, so ab picks up the factor l.
    TwistA,
    /// b, c outside H0, a inside: c = z gamma, so bc picks up the factor l.
    TwistC,
}

/// Element of C_l ⋊ H: a rotation (or reflection when h is outside H0) by
/// t of the l-gon, paired with h.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CellElem {
    pub t: u64,
    pub refl: bool,
    pub h: Perm,
}

impl CellElem {
    /// Left-to-right product, matching [`Perm::mul`].
    pub fn mul(&self, o: &CellElem, ell: u64) -> CellElem {
        let t = match (self.refl, o.refl) {
            (false, false) | (true, false) => (self.t + o.t) % ell,
            (false, true) | (true, true) => (o.t + ell - self.t) % ell,
        };
        CellElem { t, refl: self.refl != o.refl, h: self.h.mul(&o.h) }
    }

    pub fn order(&self, ell: u64) -> u64 {
        let ho = self.h.order();
        if self.refl {
            lcm(2, ho)
        } else {
            lcm(ell / self.t.gcd(&ell), ho)
        }
    }

    pub fn pow(&self, k: u64, ell: u64) -> CellElem {
        let mut r = CellElem { t: 0, refl: false, h: Perm::identity(self.h.degree()) };
        for _ in 0..k {
            r = r.mul(self, ell);
        }
        r
    }

    pub fn to_perm(&self, ell: u64) -> Perm {
        let l = ell as u32;
        let t = self.t as u32;
        let d: Vec<u32> = if self.refl {
            (0..l).map(|i| (t + l - i) % l).collect()
        } else {
            (0..l).map(|i| (i + t) % l).collect()
        };
        Perm::from_vec_unchecked(d).direct_sum(&self.h)
    }
}

#[derive(Clone, Debug)]
pub struct SemidirectCell {
    pub ell: u64,
    pub pattern: CellPattern,
    pub base: MapTriple,
    pub gens: [CellElem; 3],
    pub m: u64,
    pub n: u64,
    pub order: u64,
    pub chi: i64,
    /// How generation by ab, bc was certified.
    pub generation: String,
    /// Permutation form, when l + deg(H) is below [`MATERIALIZE_CAP`].
    pub triple: Option<MapTriple>,
}

impl SemidirectCell {
    pub fn certificate(&self) -> MapCertificate {
        let pp = chi_prime_power(self.chi);
        let vertices = self.order / (2 * self.n);
        let faces = self.order / (2 * self.m);
        MapCertificate {
            order: self.order,
            m: self.m,
            n: self.n,
            chi: self.chi,
            non_orientable: true,
            vertices,
            edges: self.order / 4,
            faces,
            r: pp.map(|x| x.0),
            d: pp.map(|x| x.1),
            u: vertices + faces,
            degenerate: self.m <= 2 || self.n <= 2,
            census_label: None,
        }
    }

    /// The base triple, recovered by dropping the l-gon coordinates.
    pub fn project(&self) -> [Perm; 3] {
        [self.gens[0].h.clone(), self.gens[1].h.clone(), self.gens[2].h.clone()]
    }
}

pub fn cell_pattern(base: &MapTriple, h0: &PermGroup) -> Result<CellPattern> {
    let inside = |x: &Perm| h0.contains(x);
    match (inside(base.a()), inside(base.b()), inside(base.c())) {
        (false, false, true) => Ok(CellPattern::TwistA),
        (true, false, false) => Ok(CellPattern::TwistC),
        pat => Err(Error::contract(format!(
            "membership pattern (a, b, c) in H0 = {pat:?}; need (out, out, in) or (in, out, out)"
        ))),
    }
}

pub fn build_semidirect_cell(spec: &SemidirectSpec) -> Result<SemidirectCell> {
    let SemidirectSpec { base, h0, ell } = spec;
    let ell = *ell;
    if ell == 0 || ell % 2 == 0 || ell > CELL_ELL_CAP {
        return Err(Error::param(format!("l = {ell} must be odd and at most 2^40")));
    }
    let h_order = base.order();
    if ell.gcd(&h_order) != 1 {
        return Err(Error::param(format!("gcd(l, |H|) = {} != 1", ell.gcd(&h_order))));
    }
    if h0.order_big() * BigUint::from(2u32) != *base.group().order_big() || !base.group().contains_group(h0) {
        return Err(Error::contract("H0 is not an index-2 subgroup"));
    }
    let pattern = cell_pattern(base, h0)?;
    let lift = |x: &Perm, t: u64| CellElem { t, refl: !h0.contains(x), h: x.clone() };
    let gens = match pattern {
        CellPattern::TwistA => [lift(base.a(), 1), lift(base.b(), 0), lift(base.c(), 0)],
        CellPattern::TwistC => [lift(base.a(), 0), lift(base.b(), 0), lift(base.c(), 1)],
    };
    for (name, x) in ["a", "b", "c"].iter().zip(&gens) {
        let sq = x.mul(x, ell);
        if sq.t != 0 || sq.refl || !sq.h.is_identity() {
            return Err(Error::NotInvolution(format!("{name} in the cell")));
        }
    }
    let ac = gens[0].mul(&gens[2], ell);
    let ac2 = ac.mul(&ac, ell);
    if ac2.t != 0 || !ac2.h.is_identity() {
        return Err(Error::NotInvolution("(ac)^2 in the cell".into()));
    }
    let ab = gens[0].mul(&gens[1], ell);
    let bc = gens[1].mul(&gens[2], ell);
    let (m, n) = (ab.order(ell), bc.order(ell));
    // the twisted rotation x has the form (1, h) with h in H0 of order k
    // coprime to l, so x^k = (k, 1) generates C_l, and <ab, bc> maps onto
    // <alpha beta, beta gamma> = H
    let (x, k) = match pattern {
        CellPattern::TwistA => (&ab, base.m()),
        CellPattern::TwistC => (&bc, base.n()),
    };
    let xk = if k <= 64 { x.pow(k, ell) } else { CellElem { t: (x.t * k) % ell, refl: false, h: x.h.pow(k as i64) } };
    if x.refl || !xk.h.is_identity() || xk.t.gcd(&ell) != 1 && ell > 1 {
        return Err(Error::Consistency("twisted rotation does not generate C_l".into()));
    }
    let generation = format!(
        "({}){k} = z^{} generates C_{ell}; base triple is non-orientable of order {h_order}",
        match pattern {
            CellPattern::TwistA => "ab",
            CellPattern::TwistC => "bc",
        },
        xk.t
    );
    let order = ell.checked_mul(h_order).ok_or_else(|| Error::param("cell order overflows"))?;
    let chi = euler_characteristic(&BigUint::from(order), m, n)?
        .to_i64()
        .ok_or_else(|| Error::param("chi outside i64"))?;
    let deg = base.group().degree() as u64;
    let triple = if ell == 1 {
        Some(base.clone())
    } else if ell + deg <= MATERIALIZE_CAP {
        let perms: Vec<Perm> = gens.iter().map(|g| g.to_perm(ell)).collect();
        let g = PermGroup::with_known_order((ell + deg) as usize, perms.clone(), BigUint::from(order))?;
        Some(MapTriple::from_certified(g, perms[0].clone(), perms[1].clone(), perms[2].clone())?)
    } else {
        None
    };
    Ok(SemidirectCell { ell, pattern, base: base.clone(), gens, m, n, order, chi, generation, triple })
}

/// A (2,m,n)* triple of `h` usable as a cell base: some triple of the
/// given type with one of the two allowed membership patterns for H0.
pub fn find_cell_base(h: &PermGroup, h0: &PermGroup, m: u64, n: u64) -> Result<Option<MapTriple>> {
    let table = h.elements_capped(FIND_CAP)?;
    let all = find_triples_in(h, &table, m, n, usize::MAX)?;
    for t in all.triples {
        if cell_pattern(&t, h0).is_ok() {
            return Ok(Some(t));
        }
    }
    Ok(None)
}

/// Derived subgroup, required to have index 2.
pub fn index_two_subgroup(h: &PermGroup) -> Result<PermGroup> {
    let d = derived_subgroup(h)?;
    let g = PermGroup::new(h.degree(), d.generators().to_vec())?;
    if g.order_big() * BigUint::from(2u32) != *h.order_big() {
        return Err(Error::contract("derived subgroup does not have index 2"));
    }
    Ok(g)
}

// ---------------------------------------------------------------------------
// descriptors

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GroupDescriptor {
    Linear(LinearKind, u64),
    H1(u64),
    H2(u64, u64),
    H3(u64),
    Heisenberg,
    Wreath,
    Dihedral(u32),
    ModExt(String),
    Cell(Box<GroupDescriptor>, u64),
}

#[derive(Deserialize)]
struct ModExtFile {
    acting: String,
    #[serde(flatten)]
    spec: ModuleExtensionSpec,
}

/// A built group, with its canonical triple when the construction has one.
#[derive(Clone, Debug)]
pub struct BuiltGroup {
    pub group: PermGroup,
    pub triple: Option<MapTriple>,
}

impl std::str::FromStr for GroupDescriptor {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let (head, rest) = s.split_once(':').unwrap_or((s, ""));
        let num = |x: &str| x.trim().parse::<u64>().map_err(|_| Error::Parse(format!("bad number '{x}' in {s}")));
        match head {
            "pgl2" => Ok(GroupDescriptor::Linear(LinearKind::Pgl, num(rest)?)),
            "psl2" => Ok(GroupDescriptor::Linear(LinearKind::Psl, num(rest)?)),
            "h1" => Ok(GroupDescriptor::H1(num(rest)?)),
            "h2" => {
                let (j, k) = rest.split_once(',').ok_or_else(|| Error::Parse(format!("h2 needs j,k: {s}")))?;
                Ok(GroupDescriptor::H2(num(j)?, num(k)?))
            }
            "h3" => Ok(GroupDescriptor::H3(num(rest)?)),
            "he3" => Ok(GroupDescriptor::Heisenberg),
            "wr3" => Ok(GroupDescriptor::Wreath),
            "dihedral" => Ok(GroupDescriptor::Dihedral(num(rest)? as u32)),
            "modext" if !rest.is_empty() => Ok(GroupDescriptor::ModExt(rest.to_string())),
            "cell" => {
                let (base, l) = rest.rsplit_once(',').ok_or_else(|| Error::Parse(format!("cell needs BASE,l: {s}")))?;
                Ok(GroupDescriptor::Cell(Box::new(base.parse()?), num(l)?))
            }
            _ => Err(Error::Parse(format!("unknown group descriptor '{s}'"))),
        }
    }
}

impl GroupDescriptor {
    /// Builds the group. `cell_type` is the base type used for cells.
    pub fn build(&self, cell_type: Option<(u64, u64)>) -> Result<BuiltGroup> {
        let plain = |g: PermGroup| Ok(BuiltGroup { group: g, triple: None });
        let with = |t: MapTriple| Ok(BuiltGroup { group: t.group().clone(), triple: Some(t) });
        match self {
            GroupDescriptor::Linear(kind, q) => plain(pgl2(*q, *kind)?),
            GroupDescriptor::H1(l) => with(build_h1(*l)?),
            GroupDescriptor::H2(j, k) => with(build_h2(*j, *k)?),
            GroupDescriptor::H3(l) => with(build_h3(*l)?),
            GroupDescriptor::Heisenberg => plain(build_heisenberg()),
            GroupDescriptor::Wreath => plain(build_wreath_c3()),
            GroupDescriptor::Dihedral(k) => plain(dihedral_group(*k)?),
            GroupDescriptor::ModExt(path) => {
                let text = std::fs::read_to_string(Path::new(path))
                    .map_err(|e| Error::Parse(format!("cannot read {path}: {e}")))?;
                let f: ModExtFile = serde_json::from_str(&text).map_err(|e| Error::Parse(e.to_string()))?;
                let acting: GroupDescriptor = f.acting.parse()?;
                let h = acting.build(None)?.group;
                plain(build_module_extension(&h, &f.spec)?)
            }
            GroupDescriptor::Cell(base, ell) => {
                let (m, n) = cell_type.ok_or_else(|| Error::param("a cell needs the base type"))?;
                let h = base.build(None)?.group;
                let h0 = index_two_subgroup(&h)?;
                let t = find_cell_base(&h, &h0, m, n)?
                    .ok_or_else(|| Error::contract(format!("no ({m},{n}) triple with a usable membership pattern")))?;
                let cell = build_semidirect_cell(&SemidirectSpec { base: t, h0, ell: *ell })?;
                let t = cell.triple.ok_or_else(|| Error::budget("cell materialization degree", MATERIALIZE_CAP))?;
                with(t)
            }
        }
    }
}
