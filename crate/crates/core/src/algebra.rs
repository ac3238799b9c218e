//! Exact integer utilities: prime powers, factoring, Smith normal form and
//! ranks over prime fields.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};

pub type BigNat = BigUint;

// ---------------------------------------------------------------------------
// primes and factoring

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod(r, b, m);
        }
        b = mul_mod(b, b, m);
        e >>= 1;
    }
    r
}

/// Deterministic Miller-Rabin for 64-bit inputs.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Miller-Rabin on big integers. Deterministic below 3.3e24, probabilistic
/// (fixed bases) above.
pub fn is_probable_prime_big(n: &BigUint) -> bool {
    if let Some(small) = n.to_u64() {
        return is_prime(small);
    }
    if n.is_even() {
        return false;
    }
    let one = BigUint::one();
    let n1 = n - &one;
    let s = n1.trailing_zeros().unwrap_or(0);
    let d = &n1 >> s;
    'witness: for a in [2u32, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47] {
        let mut x = BigUint::from(a).modpow(&d, n);
        if x == one || x == n1 {
            continue;
        }
        for _ in 1..s {
            x = (&x * &x) % n;
            if x == n1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn pollard_brent(n: u64) -> u64 {
    if n.is_multiple_of(2) {
        return 2;
    }
    let mut c = 1u64;
    loop {
        let f = |x: u64| (mul_mod(x, x, n) + c) % n;
        let (mut x, mut y, mut g) = (2u64, 2u64, 1u64);
        let mut q = 1u64;
        let mut r = 1u64;
        let mut ys = 0u64;
        let m = 128u64;
        while g == 1 {
            x = y;
            for _ in 0..r {
                y = f(y);
            }
            let mut k = 0;
            while k < r && g == 1 {
                ys = y;
                for _ in 0..m.min(r - k) {
                    y = f(y);
                    q = mul_mod(q, x.abs_diff(y), n);
                }
                g = q.gcd(&n);
                k += m;
            }
            r *= 2;
        }
        if g == n {
            loop {
                ys = f(ys);
                g = x.abs_diff(ys).gcd(&n);
                if g > 1 {
                    break;
                }
            }
        }
        if g != n {
            return g;
        }
        c += 1;
    }
}

/// Prime factorisation as sorted (prime, exponent) pairs.
pub fn factor_u64(n: u64) -> Vec<(u64, u32)> {
    let mut primes = Vec::new();
    let mut n = n;
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        while n.is_multiple_of(p) {
            primes.push(p);
            n /= p;
        }
    }
    let mut stack = vec![n];
    while let Some(x) = stack.pop() {
        if x == 1 {
            continue;
        }
        if is_prime(x) {
            primes.push(x);
            continue;
        }
        let d = pollard_brent(x);
        stack.push(d);
        stack.push(x / d);
    }
    primes.sort_unstable();
    let mut out: Vec<(u64, u32)> = Vec::new();
    for p in primes {
        match out.last_mut() {
            Some((q, e)) if *q == p => *e += 1,
            _ => out.push((p, 1)),
        }
    }
    out
}

/// All positive divisors, ascending.
pub fn divisors_u64(n: u64) -> Vec<u64> {
    let mut divs = vec![1u64];
    for (p, e) in factor_u64(n) {
        let len = divs.len();
        let mut pk = 1u64;
        for _ in 0..e {
            pk *= p;
            for i in 0..len {
                divs.push(divs[i] * pk);
            }
        }
    }
    divs.sort_unstable();
    divs
}

/// Largest power of `p` dividing `n`.
pub fn p_part(n: u64, p: u64) -> Result<u64> {
    if n == 0 {
        return Err(Error::param("p_part needs n >= 1"));
    }
    if !is_prime(p) {
        return Err(Error::param(format!("{p} is not prime")));
    }
    let mut n = n;
    let mut out = 1;
    while n.is_multiple_of(p) {
        n /= p;
        out *= p;
    }
    Ok(out)
}

pub fn p_part_big(n: &BigUint, p: u64) -> Result<BigUint> {
    if n.is_zero() {
        return Err(Error::param("p_part needs n >= 1"));
    }
    if !is_prime(p) {
        return Err(Error::param(format!("{p} is not prime")));
    }
    let (_, e) = strip_prime(n, p);
    Ok(BigUint::from(p).pow(e))
}

/// Exponent of `p` in `n` together with the cofactor.
pub fn strip_prime(n: &BigUint, p: u64) -> (BigUint, u32) {
    let pb = BigUint::from(p);
    let mut n = n.clone();
    let mut e = 0;
    loop {
        let (q, r) = n.div_rem(&pb);
        if !r.is_zero() || n.is_zero() {
            return (n, e);
        }
        n = q;
        e += 1;
    }
}

/// Writes `n` as `p^e` with `p` prime, if possible.
pub fn as_prime_power(n: &BigUint) -> Result<Option<(BigUint, u32)>> {
    if *n < BigUint::from(2u32) {
        return Err(Error::param("as_prime_power needs n >= 2"));
    }
    if let Some(small) = n.to_u64() {
        let f = factor_u64(small);
        return Ok(if f.len() == 1 { Some((BigUint::from(f[0].0), f[0].1)) } else { None });
    }
    // small prime factors settle almost every case we meet
    let bound = 1u64 << 16;
    let mut p = 2u64;
    while p < bound {
        if is_prime(p) && (n % p).is_zero() {
            let (rest, e) = strip_prime(n, p);
            return Ok(if rest.is_one() { Some((BigUint::from(p), e)) } else { None });
        }
        p += 1;
    }
    let max_k = n.bits() as u32 / 16 + 1;
    for k in 1..=max_k {
        let root = n.nth_root(k);
        if root.pow(k) == *n && is_probable_prime_big(&root) {
            return Ok(Some((root, k)));
        }
    }
    Ok(None)
}

/// Odd prime power q = p^e.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PrimePower {
    pub p: u64,
    pub e: u32,
    #[serde(serialize_with = "ser_biguint")]
    pub q: BigUint,
}

impl PrimePower {
    pub fn new(p: u64, e: u32) -> Result<Self> {
        if !is_prime(p) || p < 3 || e == 0 {
            return Err(Error::param(format!("{p}^{e} is not an odd prime power")));
        }
        Ok(PrimePower { p, e, q: BigUint::from(p).pow(e) })
    }

    pub fn from_q(q: u64) -> Result<Self> {
        match as_prime_power(&BigUint::from(q))? {
            Some((p, e)) => PrimePower::new(p.to_u64().unwrap(), e),
            None => Err(Error::param(format!("{q} is not a prime power"))),
        }
    }

    pub fn q_u64(&self) -> u64 {
        self.q.to_u64().expect("q fits in u64")
    }
}

/// The dimension bound eps(q, r): 2 if r = p, 3 if q = 9 and r != 3,
/// (q-1)/2 otherwise.
pub fn epsilon(q: &PrimePower, r: u64) -> Result<u64> {
    let qv = q.q_u64();
    if qv < 5 {
        return Err(Error::param(format!("epsilon needs q >= 5, got {qv}")));
    }
    if r < 3 || !is_prime(r) {
        return Err(Error::param(format!("r = {r} is not an odd prime")));
    }
    Ok(if r == q.p {
        2
    } else if qv == 9 {
        3
    } else {
        (qv - 1) / 2
    })
}

// ---------------------------------------------------------------------------
// integer matrices

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<BigInt>,
}

impl IntMatrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<BigInt>) -> Result<Self> {
        if rows * cols != entries.len() {
            return Err(Error::param(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                entries.len()
            )));
        }
        Ok(IntMatrix { rows, cols, entries })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMatrix { rows, cols, entries: vec![BigInt::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.entries[i * n + i] = BigInt::one();
        }
        m
    }

    pub fn from_rows(rows: &[Vec<i64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::param("ragged rows"));
        }
        let entries = rows.iter().flatten().map(|&x| BigInt::from(x)).collect();
        Ok(IntMatrix { rows: rows.len(), cols, entries })
    }

    pub fn from_i64(rows: usize, cols: usize, data: &[i64]) -> Result<Self> {
        Self::new(rows, cols, data.iter().map(|&x| BigInt::from(x)).collect())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn entries(&self) -> &[BigInt] {
        &self.entries
    }

    pub fn get(&self, r: usize, c: usize) -> &BigInt {
        &self.entries[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: BigInt) {
        self.entries[r * self.cols + c] = v;
    }

    /// Plain text: a header line `rows cols`, then one line per row.
    pub fn to_text(&self) -> String {
        let mut s = format!("{} {}\n", self.rows, self.cols);
        for r in 0..self.rows {
            let row: Vec<String> =
                (0..self.cols).map(|c| self.get(r, c).to_string()).collect();
            s.push_str(&row.join(" "));
            s.push('\n');
        }
        s
    }

    fn as_i128(&self) -> Option<Vec<i128>> {
        self.entries.iter().map(|x| x.to_i128()).collect()
    }
}

impl FromStr for IntMatrix {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut tokens = s.split_whitespace();
        let mut dim = |what: &str| -> Result<usize> {
            tokens
                .next()
                .ok_or_else(|| Error::Parse(format!("missing {what}")))?
                .parse::<usize>()
                .map_err(|e| Error::Parse(format!("bad {what}: {e}")))
        };
        let rows = dim("row count")?;
        let cols = dim("column count")?;
        let entries = tokens
            .map(|t| t.parse::<BigInt>().map_err(|e| Error::Parse(format!("bad entry {t:?}: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        IntMatrix::new(rows, cols, entries).map_err(|e| Error::Parse(e.to_string()))
    }
}

impl fmt::Display for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SnfResult {
    /// Nonzero diagonal entries d1 | d2 | ..., units included.
    #[serde(serialize_with = "ser_big_list")]
    pub invariant_factors: Vec<BigUint>,
    pub free_rank: usize,
}

/// Serializes as a JSON number when it fits in u64, else as a decimal string.
pub fn ser_biguint<S: serde::Serializer>(x: &BigUint, s: S) -> std::result::Result<S::Ok, S::Error> {
    match x.to_u64() {
        Some(small) => s.serialize_u64(small),
        None => s.serialize_str(&x.to_string()),
    }
}

pub fn ser_bigint<S: serde::Serializer>(x: &BigInt, s: S) -> std::result::Result<S::Ok, S::Error> {
    match x.to_i64() {
        Some(small) => s.serialize_i64(small),
        None => s.serialize_str(&x.to_string()),
    }
}

/// JSON value for a big integer, with the same number-or-string rule.
pub fn big_json(x: &BigInt) -> serde_json::Value {
    match x.to_i64() {
        Some(v) => serde_json::Value::from(v),
        None => serde_json::Value::from(x.to_string()),
    }
}

fn ser_big_list<S: serde::Serializer>(v: &[BigUint], s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for x in v {
        match x.to_u64() {
            Some(small) => seq.serialize_element(&small)?,
            None => seq.serialize_element(&x.to_string())?,
        }
    }
    seq.end()
}

impl SnfResult {
    pub fn rank(&self) -> usize {
        self.invariant_factors.len()
    }

    /// Factors different from 1: the torsion part of the cokernel.
    pub fn torsion(&self) -> Vec<BigUint> {
        self.invariant_factors.iter().filter(|d| !d.is_one()).cloned().collect()
    }
}

/// Arithmetic needed by the elimination. `None` signals overflow.
trait Scalar: Clone + PartialEq {
    fn is_nil(&self) -> bool;
    fn abs_cmp(&self, other: &Self) -> Ordering;
    fn is_unit(&self) -> bool;
    /// Quotient q with |a - q b| < |b|.
    fn quot(a: &Self, b: &Self) -> Self;
    /// a - q * b
    fn sub_mul(a: &Self, q: &Self, b: &Self) -> Option<Self>;
    fn to_big(&self) -> BigInt;
}

impl Scalar for i128 {
    fn is_nil(&self) -> bool {
        *self == 0
    }
    fn abs_cmp(&self, other: &Self) -> Ordering {
        self.unsigned_abs().cmp(&other.unsigned_abs())
    }
    fn is_unit(&self) -> bool {
        *self == 1 || *self == -1
    }
    fn quot(a: &Self, b: &Self) -> Self {
        a.div_euclid(*b)
    }
    fn sub_mul(a: &Self, q: &Self, b: &Self) -> Option<Self> {
        a.checked_sub(q.checked_mul(*b)?)
    }
    fn to_big(&self) -> BigInt {
        BigInt::from(*self)
    }
}

impl Scalar for BigInt {
    fn is_nil(&self) -> bool {
        Zero::is_zero(self)
    }
    fn abs_cmp(&self, other: &Self) -> Ordering {
        self.magnitude().cmp(other.magnitude())
    }
    fn is_unit(&self) -> bool {
        self.magnitude().is_one()
    }
    fn quot(a: &Self, b: &Self) -> Self {
        a.div_floor(b)
    }
    fn sub_mul(a: &Self, q: &Self, b: &Self) -> Option<Self> {
        Some(a - q * b)
    }
    fn to_big(&self) -> BigInt {
        self.clone()
    }
}

/// Diagonalises `a` (rows x cols, row-major) by unimodular row and column
/// operations and returns the nonzero diagonal. `None` on overflow.
fn diagonalize<T: Scalar>(mut a: Vec<T>, rows: usize, cols: usize) -> Option<Vec<T>> {
    let idx = |r: usize, c: usize| r * cols + c;
    let mut diag = Vec::new();
    let mut row_nz: Vec<usize> = Vec::new();
    for t in 0..rows.min(cols) {
        // global pivot: smallest nonzero magnitude in the trailing block
        let mut best: Option<(usize, usize)> = None;
        'scan: for r in t..rows {
            for c in t..cols {
                let v = &a[idx(r, c)];
                if v.is_nil() {
                    continue;
                }
                let better = match best {
                    None => true,
                    Some((br, bc)) => v.abs_cmp(&a[idx(br, bc)]) == Ordering::Less,
                };
                if better {
                    best = Some((r, c));
                    if v.is_unit() {
                        break 'scan;
                    }
                }
            }
        }
        let Some((pr, pc)) = best else { break };
        swap_rows(&mut a, cols, t, pr);
        swap_cols(&mut a, cols, rows, t, pc);

        loop {
            let p = a[idx(t, t)].clone();
            let mut dirty = false;
            row_nz.clear();
            row_nz.extend((t..cols).filter(|&c| !a[idx(t, c)].is_nil()));
            for r in t + 1..rows {
                let v = &a[idx(r, t)];
                if v.is_nil() {
                    continue;
                }
                let q = T::quot(v, &p);
                if !q.is_nil() {
                    for &c in &row_nz {
                        let nv = T::sub_mul(&a[idx(r, c)], &q, &a[idx(t, c)])?;
                        a[idx(r, c)] = nv;
                    }
                }
                if !a[idx(r, t)].is_nil() {
                    dirty = true;
                }
            }
            let col_nz: Vec<usize> = (t..rows).filter(|&r| !a[idx(r, t)].is_nil()).collect();
            for c in t + 1..cols {
                let v = &a[idx(t, c)];
                if v.is_nil() {
                    continue;
                }
                let q = T::quot(v, &p);
                if !q.is_nil() {
                    for &r in &col_nz {
                        let nv = T::sub_mul(&a[idx(r, c)], &q, &a[idx(r, t)])?;
                        a[idx(r, c)] = nv;
                    }
                }
                if !a[idx(t, c)].is_nil() {
                    dirty = true;
                }
            }
            if !dirty {
                break;
            }
            // a remainder is smaller than the pivot: move it in and repeat
            let mut best = (t, t);
            for r in t + 1..rows {
                if !a[idx(r, t)].is_nil() && a[idx(r, t)].abs_cmp(&a[idx(best.0, best.1)]) == Ordering::Less {
                    best = (r, t);
                }
            }
            for c in t + 1..cols {
                if !a[idx(t, c)].is_nil() && a[idx(t, c)].abs_cmp(&a[idx(best.0, best.1)]) == Ordering::Less {
                    best = (t, c);
                }
            }
            swap_rows(&mut a, cols, t, best.0);
            swap_cols(&mut a, cols, rows, t, best.1);
        }
        diag.push(a[idx(t, t)].clone());
    }
    Some(diag)
}

fn swap_rows<T>(a: &mut [T], cols: usize, r1: usize, r2: usize) {
    if r1 == r2 {
        return;
    }
    for c in 0..cols {
        a.swap(r1 * cols + c, r2 * cols + c);
    }
}

fn swap_cols<T>(a: &mut [T], cols: usize, rows: usize, c1: usize, c2: usize) {
    if c1 == c2 {
        return;
    }
    for r in 0..rows {
        a.swap(r * cols + c1, r * cols + c2);
    }
}

/// Turns a diagonal into the divisibility chain with the same cokernel.
fn normalize_chain(diag: Vec<BigInt>) -> Vec<BigUint> {
    let mut ones = 0usize;
    let mut rest: Vec<BigUint> = Vec::new();
    for d in diag {
        let m = d.magnitude().clone();
        if m.is_one() {
            ones += 1;
        } else {
            rest.push(m);
        }
    }
    for i in 0..rest.len() {
        for j in i + 1..rest.len() {
            let g = rest[i].gcd(&rest[j]);
            if g != rest[i] {
                let l = &rest[i] / &g * &rest[j];
                rest[i] = g;
                rest[j] = l;
            }
        }
    }
    let mut out = vec![BigUint::one(); ones];
    // after the pairwise pass a leading 1 can appear; keep the chain sorted
    rest.sort();
    out.extend(rest);
    out
}

/// Smith normal form of the cokernel of the row space in Z^cols.
///
/// Runs in i128 with overflow checks and restarts with big integers if any
/// intermediate value leaves that range.
pub fn smith_normal_form(m: &IntMatrix) -> SnfResult {
    let diag: Vec<BigInt> = match m.as_i128().and_then(|a| diagonalize(a, m.rows, m.cols)) {
        Some(d) => d.iter().map(Scalar::to_big).collect(),
        None => diagonalize(m.entries.clone(), m.rows, m.cols).expect("big integers never overflow"),
    };
    let rank = diag.len();
    SnfResult { invariant_factors: normalize_chain(diag), free_rank: m.cols - rank }
}

/// Rank over F_p by dense Gaussian elimination.
pub fn mod_p_rank(m: &IntMatrix, p: u64) -> Result<usize> {
    if !is_prime(p) {
        return Err(Error::param(format!("{p} is not prime")));
    }
    let pb = BigInt::from(p);
    let data: Vec<u64> = m
        .entries
        .iter()
        .map(|x| {
            if let Some(v) = x.to_i64() {
                v.rem_euclid(p as i64) as u64
            } else {
                x.mod_floor(&pb).to_u64().unwrap()
            }
        })
        .collect();
    Ok(rank_mod_p_dense(data, m.rows, m.cols, p))
}

/// Rank over F_p of a row-major matrix whose entries are already reduced.
pub fn rank_mod_p_dense(mut a: Vec<u64>, rows: usize, cols: usize, p: u64) -> usize {
    let mut rank = 0;
    for c in 0..cols {
        if rank == rows {
            break;
        }
        let Some(pr) = (rank..rows).find(|&r| a[r * cols + c] != 0) else { continue };
        swap_rows(&mut a, cols, rank, pr);
        let inv = pow_mod(a[rank * cols + c], p - 2, p);
        for x in &mut a[rank * cols + c..(rank + 1) * cols] {
            *x = mul_mod(*x, inv, p);
        }
        let (head, tail) = a.split_at_mut((rank + 1) * cols);
        let pivot_row = &head[rank * cols..];
        let nz: Vec<usize> = (c..cols).filter(|&j| pivot_row[j] != 0).collect();
        for row in tail.chunks_mut(cols) {
            let f = row[c];
            if f == 0 {
                continue;
            }
            for &j in &nz {
                let sub = mul_mod(f, pivot_row[j], p);
                row[j] = if row[j] >= sub { row[j] - sub } else { row[j] + p - sub };
            }
        }
        rank += 1;
    }
    rank
}

/// gcd of a list, 0 for the empty list.
pub fn gcd_all(xs: &[u64]) -> u64 {
    xs.iter().fold(0, |g, &x| g.gcd(&x))
}

pub fn lcm(a: u64, b: u64) -> u64 {
    a.lcm(&b)
}

/// Converts to i64 when it fits; convenient for reports.
pub fn big_to_i64(x: &BigInt) -> Option<i64> {
    x.to_i64()
}

pub fn big_sign_is_negative(x: &BigInt) -> bool {
    x.sign() == Sign::Minus
}

pub fn big_abs(x: &BigInt) -> BigUint {
    x.abs().to_biguint().unwrap()
}
