//! Homology of the kernel K of an epimorphism from the extended triangle
//! group Δ(2, M, N) = <A, B, C | A², B², C², (AC)², (AB)^M, (BC)^N> onto a
//! (2,m,n)* group. The coset table of K is the Cayley graph of G, and
//! Reidemeister–Schreier rewriting gives an abelianized relation matrix.

use std::collections::{HashMap, HashSet};

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, ToPrimitive};
use serde::Serialize;

use crate::algebra::{mod_p_rank, smith_normal_form, IntMatrix, SnfResult};
use crate::error::{Error, Result};
use crate::mapcore::MapTriple;
use crate::permgrp::Perm;

/// Default index budget for coset tables.
pub const HOMOLOGY_CAP: usize = 2_000;

#[derive(Clone, Debug)]
pub struct TriangleTarget {
    pub triple: MapTriple,
    /// Exponents (M, N) of AB and BC in Δ.
    pub delta_type: (u64, u64),
}

impl TriangleTarget {
    pub fn new(triple: MapTriple, delta_type: (u64, u64)) -> Result<Self> {
        let (m, n) = delta_type;
        if m == 0 || n == 0 || m % triple.m() != 0 || n % triple.n() != 0 {
            return Err(Error::param(format!(
                "Δ exponents ({m},{n}) must be multiples of ({},{})",
                triple.m(),
                triple.n()
            )));
        }
        Ok(TriangleTarget { triple, delta_type })
    }

    pub fn smooth(triple: MapTriple) -> Self {
        let d = (triple.m(), triple.n());
        TriangleTarget { triple, delta_type: d }
    }
}

#[derive(Clone, Debug)]
pub struct CosetTable {
    pub index: usize,
    /// actions[s][x] = coset x·s for s = A, B, C.
    pub actions: [Vec<u32>; 3],
    /// Spanning-tree parent (coset, letter) of each coset; root has letter 3.
    pub parent: Vec<(u32, u8)>,
}

impl CosetTable {
    /// Only forward tree edges give trivial Schreier generators.
    fn is_tree_edge(&self, x: u32, s: usize) -> bool {
        let y = self.actions[s][x as usize];
        y != 0 && self.parent[y as usize] == (x, s as u8)
    }
}

pub fn cayley_coset_table(t: &TriangleTarget) -> Result<CosetTable> {
    cayley_coset_table_ordered(t, [0, 1, 2], HOMOLOGY_CAP)
}

/// Coset table with the breadth-first scan visiting letters in `order`.
pub fn cayley_coset_table_ordered(t: &TriangleTarget, order: [usize; 3], cap: usize) -> Result<CosetTable> {
    let tr = &t.triple;
    let gens: [&Perm; 3] = [tr.a(), tr.b(), tr.c()];
    let id = Perm::identity(tr.group().degree());
    let mut index: HashMap<Perm, u32> = HashMap::new();
    index.insert(id.clone(), 0);
    let mut elems = vec![id];
    let mut parent = vec![(0u32, 3u8)];
    let mut i = 0;
    while i < elems.len() {
        for &s in &order {
            let y = elems[i].mul(gens[s]);
            if !index.contains_key(&y) {
                if elems.len() >= cap {
                    return Err(Error::budget("coset table index", cap as u64));
                }
                index.insert(y.clone(), elems.len() as u32);
                elems.push(y);
                parent.push((i as u32, s as u8));
            }
        }
        i += 1;
    }
    let actions = [0, 1, 2].map(|s| elems.iter().map(|x| index[&x.mul(gens[s])]).collect::<Vec<u32>>());
    Ok(CosetTable { index: elems.len(), actions, parent })
}

#[derive(Clone, Debug)]
pub struct KernelPresentation {
    pub n_generators: usize,
    /// Deduplicated abelianized relator rewrites.
    pub relation_matrix: IntMatrix,
    /// Row count before deduplication: one per relator per coset.
    pub full_rows: usize,
    pub genus_g: i64,
    pub branch_u: u64,
}

fn relators(delta: (u64, u64)) -> Vec<Vec<usize>> {
    let rep = |w: &[usize], k: u64| -> Vec<usize> { (0..k).flat_map(|_| w.iter().copied()).collect() };
    vec![vec![0, 0], vec![1, 1], vec![2, 2], vec![0, 2, 0, 2], rep(&[0, 1], delta.0), rep(&[1, 2], delta.1)]
}

/// Abelianized Reidemeister–Schreier rewrite of the Δ relators at every
/// coset. Schreier generators on spanning-tree edges are dropped, leaving
/// 2|G| + 1 columns.
pub fn reidemeister_schreier(table: &CosetTable, delta: (u64, u64)) -> Result<KernelPresentation> {
    let rows = rewrite_rows(table, delta, true)?;
    let n = table.index;
    let cols = 2 * n + 1;
    let mut m = IntMatrix::zeros(rows.len(), cols);
    for (r, row) in rows.iter().enumerate() {
        for &(c, v) in row {
            m.set(r, c, BigInt::from(v));
        }
    }
    Ok(KernelPresentation {
        n_generators: cols,
        relation_matrix: m,
        full_rows: 6 * n,
        genus_g: 0,
        branch_u: 0,
    })
}

/// All 6|G| rows, without deduplication.
pub fn reidemeister_schreier_full(table: &CosetTable, delta: (u64, u64)) -> Result<IntMatrix> {
    let rows = rewrite_rows(table, delta, false)?;
    let mut m = IntMatrix::zeros(rows.len(), 2 * table.index + 1);
    for (r, row) in rows.iter().enumerate() {
        for &(c, v) in row {
            m.set(r, c, BigInt::from(v));
        }
    }
    Ok(m)
}

fn rewrite_rows(table: &CosetTable, delta: (u64, u64), dedup: bool) -> Result<Vec<Vec<(usize, i64)>>> {
    let n = table.index;
    // column of each non-tree edge (x, s)
    let mut col = vec![[usize::MAX; 3]; n];
    let mut next = 0;
    for (x, c) in col.iter_mut().enumerate() {
        for (s, slot) in c.iter_mut().enumerate() {
            if !table.is_tree_edge(x as u32, s) {
                *slot = next;
                next += 1;
            }
        }
    }
    if next != 2 * n + 1 {
        return Err(Error::contract(format!("{next} non-tree edges, expected {}", 2 * n + 1)));
    }
    let mut out = Vec::new();
    let mut seen: HashSet<Vec<(usize, i64)>> = HashSet::new();
    for rel in relators(delta) {
        for start in 0..n as u32 {
            let mut acc: HashMap<usize, i64> = HashMap::new();
            let mut x = start;
            for &s in &rel {
                let c = col[x as usize][s];
                if c != usize::MAX {
                    *acc.entry(c).or_default() += 1;
                }
                x = table.actions[s][x as usize];
            }
            if x != start {
                return Err(Error::contract("relator does not close up in the coset table"));
            }
            let mut row: Vec<(usize, i64)> = acc.into_iter().filter(|&(_, v)| v != 0).collect();
            row.sort_unstable();
            if dedup && row.is_empty() {
                continue;
            }
            if !dedup || seen.insert(row.clone()) {
                out.push(row);
            }
        }
    }
    Ok(out)
}

pub fn kernel_abelianization(pres: &KernelPresentation) -> SnfResult {
    smith_normal_form(&pres.relation_matrix)
}

/// Presentation of the kernel for a target, with g and u filled in.
pub fn kernel_presentation(t: &TriangleTarget) -> Result<KernelPresentation> {
    let table = cayley_coset_table(t)?;
    let mut pres = reidemeister_schreier(&table, t.delta_type)?;
    let tr = &t.triple;
    let order = tr.order();
    pres.genus_g = 2 - tr.chi();
    pres.branch_u = if t.delta_type == (tr.m(), tr.n()) {
        0
    } else {
        let mut u = 0;
        if t.delta_type.0 != tr.m() {
            u += order / (2 * tr.m());
        }
        if t.delta_type.1 != tr.n() {
            u += order / (2 * tr.n());
        }
        u
    };
    Ok(pres)
}

#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct SmoothKernel {
    pub torsion: Vec<u64>,
    pub free_rank: usize,
    pub expected_free_rank: i64,
    pub pass: bool,
}

/// K/K' for the smooth target should be C_2 × Z^(1 - chi).
pub fn smooth_kernel_check(t: &MapTriple) -> Result<SmoothKernel> {
    let target = TriangleTarget::smooth(t.clone());
    let pres = kernel_presentation(&target)?;
    let snf = kernel_abelianization(&pres);
    let torsion: Vec<u64> = snf.torsion().iter().map(|x| x.to_u64().unwrap_or(u64::MAX)).collect();
    let expected_free_rank = 1 - t.chi();
    let pass = torsion == [2] && snf.free_rank as i64 == expected_free_rank;
    Ok(SmoothKernel { torsion, free_rank: snf.free_rank, expected_free_rank, pass })
}

#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct BranchedRank {
    pub r: u64,
    /// 1 + |G|/4.
    pub expected: u64,
    /// (g - 1) + u with g = 2 - chi and u = V + F.
    pub via_genus: i64,
    pub computed: usize,
    pub pass: bool,
    pub matrix_rows: usize,
    pub matrix_cols: usize,
}

/// Mod-r dimension of K/K'K^r for Δ(2, rm, rn) → G.
pub fn branched_rank_check(base: &MapTriple, r: u64) -> Result<BranchedRank> {
    if r.is_multiple_of(2) || !crate::algebra::is_prime(r) {
        return Err(Error::param(format!("r = {r} must be an odd prime")));
    }
    if base.chi() >= 0 {
        return Err(Error::contract("base must have negative Euler characteristic"));
    }
    let target = TriangleTarget::new(base.clone(), (r * base.m(), r * base.n()))?;
    let pres = kernel_presentation(&target)?;
    let rank = mod_p_rank(&pres.relation_matrix, r)?;
    let computed = pres.n_generators - rank;
    let order = base.order();
    let expected = 1 + order / 4;
    let via_genus = pres.genus_g - 1 + pres.branch_u as i64;
    Ok(BranchedRank {
        r,
        expected,
        via_genus,
        computed,
        pass: computed as u64 == expected && via_genus == expected as i64,
        matrix_rows: pres.relation_matrix.rows(),
        matrix_cols: pres.n_generators,
    })
}

/// s^(1 - chi) · chi.
pub fn cover_characteristic(chi: i64, s: u64) -> Result<BigInt> {
    if chi >= 0 {
        return Err(Error::param(format!("chi = {chi} must be negative")));
    }
    if s == 0 || s.is_multiple_of(2) {
        return Err(Error::param(format!("s = {s} must be odd and positive")));
    }
    let e = (1 - chi) as u32;
    Ok(BigInt::from(BigUint::from(s).pow(e)) * chi)
}

/// alpha (1 + r^d) + d.
pub fn cover_exponent(r: u64, d: u32, alpha: u64) -> BigUint {
    BigUint::from(alpha) * (BigUint::one() + BigUint::from(r).pow(d)) + BigUint::from(d)
}

/// Whether a cover characteristic is -r^beta.
pub fn is_negative_power_of(x: &BigInt, r: u64) -> Option<u32> {
    if !x.is_negative() {
        return None;
    }
    let mut v = x.abs().to_biguint()?;
    let rb = BigUint::from(r);
    let mut e = 0;
    while v > BigUint::one() {
        if &v % &rb != BigUint::from(0u32) {
            return None;
        }
        v /= &rb;
        e += 1;
    }
    Some(e)
}
