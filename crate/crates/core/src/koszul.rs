//! Chain-level model of the `E₂` pages for `U(n)` and `PU(n)`.
//!
//! `E₂(U) = Z[x₁..xₙ]/⟨e₁..eₙ⟩ ⊗ Λ(t₀..t_{n-1})` with `d₂(t₀) = x₁` and
//! `d₂(tᵢ) = x_{i+1} - xᵢ`; `E₂(PU)` is the subcomplex without `t₀`. The
//! coinvariant ring is stored on its standard monomials `x^a`, `a_k ≤ n - k`,
//! with products reduced by `g_k = h_{n-k+1}(x₁..x_k)`.
//!
//! Everything here is an independent check on the formulas in
//! [`crate::theta`]: classes are built from explicit cocycles and compared
//! modulo coboundaries.

use std::collections::{BTreeMap, HashMap};
use std::ops::RangeInclusive;
use std::sync::{Arc, OnceLock, RwLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;

use crate::arithmetic::{b as gcd_b, binomial, c_with, factorize, split_tail_sign};
use crate::error::{invalid, Error, Result};
use crate::gradedalg::PresElem;
use crate::indexcalc::MultiIndex;
use crate::intlinalg::{
    kernel_basis, smith_normal_form, smith_normal_form_with_transforms, solve_integer,
    AbelianGroup, Smith, SparseIntMatrix,
};
use crate::presentation::{exterior_poincare, groups_by_degree, sanity_suite, Check};

/// Largest `n` for which a chain-level model is built at all.
pub const MAX_MODEL_N: u64 = 8;

/// Largest bidegree dimension a windowed page will put through Smith form.
pub const MAX_MAP_DIM: usize = 30_000;

/// An integer polynomial in `x₁..xₙ`, keyed by exponent vectors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Poly {
    nvars: usize,
    terms: BTreeMap<Vec<u32>, BigInt>,
}

impl Poly {
    pub fn zero(nvars: usize) -> Self {
        Poly {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn monomial(nvars: usize, exps: Vec<u32>, c: BigInt) -> Self {
        assert_eq!(exps.len(), nvars);
        let mut p = Poly::zero(nvars);
        p.add_term(exps, c);
        p
    }

    /// The variable `x_{i+1}` (zero-based `i`).
    pub fn var(nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        Poly::monomial(nvars, e, BigInt::one())
    }

    /// `e_r(x₁..xₙ)`.
    pub fn elementary(nvars: usize, r: usize) -> Self {
        let mut p = Poly::zero(nvars);
        for mask in 0u32..(1 << nvars) {
            if mask.count_ones() as usize == r {
                let e = (0..nvars).map(|i| (mask >> i) & 1).collect();
                p.add_term(e, BigInt::one());
            }
        }
        p
    }

    /// `h_d(x₁..x_k)` inside `nvars` variables.
    pub fn complete(nvars: usize, k: usize, d: u32) -> Self {
        fn go(nvars: usize, k: usize, d: u32, prefix: &mut Vec<u32>, out: &mut Poly) {
            if prefix.len() + 1 == k {
                let mut e = prefix.clone();
                e.push(d);
                e.resize(nvars, 0);
                out.add_term(e, BigInt::one());
                return;
            }
            for a in 0..=d {
                prefix.push(a);
                go(nvars, k, d - a, prefix, out);
                prefix.pop();
            }
        }
        let mut out = Poly::zero(nvars);
        if k == 0 {
            if d == 0 {
                out.add_term(vec![0; nvars], BigInt::one());
            }
            return out;
        }
        go(nvars, k, d, &mut Vec::new(), &mut out);
        out
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &BigInt)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, e: Vec<u32>, c: BigInt) {
        if c.is_zero() {
            return;
        }
        let slot = self.terms.entry(e).or_insert_with(BigInt::zero);
        *slot += c;
        if slot.is_zero() {
            self.terms.retain(|_, v| !v.is_zero());
        }
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }

    pub fn scale(&self, c: &BigInt) -> Poly {
        let mut out = Poly::zero(self.nvars);
        for (e, v) in &self.terms {
            out.add_term(e.clone(), v * c);
        }
        out
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut out = Poly::zero(self.nvars);
        for (a, x) in &self.terms {
            for (b, y) in &other.terms {
                let e = a.iter().zip(b).map(|(i, j)| i + j).collect();
                out.add_term(e, x * y);
            }
        }
        out
    }

    /// Degree if every term has the same degree.
    pub fn homogeneous_degree(&self) -> Option<u32> {
        let mut degs = self.terms.keys().map(|e| e.iter().sum::<u32>());
        let d = degs.next()?;
        degs.all(|e| e == d).then_some(d)
    }
}

/// An element of the coinvariant ring on standard-monomial indices.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CoinvPoly {
    terms: BTreeMap<usize, BigInt>,
}

impl CoinvPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (usize, &BigInt)> {
        self.terms.iter().map(|(&m, c)| (m, c))
    }

    pub fn coeff(&self, m: usize) -> BigInt {
        self.terms.get(&m).cloned().unwrap_or_default()
    }

    pub fn add_term(&mut self, m: usize, c: &BigInt) {
        if c.is_zero() {
            return;
        }
        let slot = self.terms.entry(m).or_insert_with(BigInt::zero);
        *slot += c;
        if slot.is_zero() {
            self.terms.remove(&m);
        }
    }

    pub fn add(&self, other: &CoinvPoly) -> CoinvPoly {
        let mut out = self.clone();
        for (m, c) in other.terms() {
            out.add_term(m, c);
        }
        out
    }

    pub fn scale(&self, c: &BigInt) -> CoinvPoly {
        let mut out = CoinvPoly::zero();
        for (m, v) in self.terms() {
            out.add_term(m, &(v * c));
        }
        out
    }
}

/// `Z[x₁..xₙ]/⟨e₁..eₙ⟩` on its `n!` standard monomials.
pub struct Coinvariant {
    n: usize,
    weights: Vec<usize>,
    exps: Vec<Vec<u32>>,
    degree: Vec<u32>,
    by_degree: Vec<Vec<usize>>,
    tables: Vec<Vec<OnceLock<Vec<(usize, BigInt)>>>>,
}

impl Coinvariant {
    pub fn new(n: usize) -> Self {
        let mut weights = vec![1usize; n + 1];
        for j in 0..n {
            weights[j + 1] = weights[j] * (n - j);
        }
        let count = weights[n];
        let mut exps = Vec::with_capacity(count);
        let mut degree = Vec::with_capacity(count);
        for idx in 0..count {
            let e: Vec<u32> = (0..n)
                .map(|j| ((idx / weights[j]) % (n - j)) as u32)
                .collect();
            degree.push(e.iter().sum());
            exps.push(e);
        }
        let top = (n * n.saturating_sub(1) / 2) as u32;
        let mut by_degree = vec![Vec::new(); top as usize + 1];

        for idx in 0..count {
            let d = degree[idx] as usize;
            by_degree[d].push(idx);
        }
        let tables = (0..n)
            .map(|_| (0..count).map(|_| OnceLock::new()).collect())
            .collect();
        Coinvariant {
            n,
            weights,
            exps,
            degree,
            by_degree,
            tables,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of standard monomials, `n!`.
    pub fn rank(&self) -> usize {
        self.exps.len()
    }

    pub fn exponents(&self, m: usize) -> &[u32] {
        &self.exps[m]
    }

    pub fn index_of(&self, exps: &[u32]) -> Option<usize> {
        let mut idx = 0;
        for (j, &a) in exps.iter().enumerate() {
            if a as usize >= self.n - j {
                return None;
            }
            idx += a as usize * self.weights[j];
        }
        Some(idx)
    }

    pub fn degree_of(&self, m: usize) -> u32 {
        self.degree[m]
    }

    pub fn top_degree(&self) -> u32 {
        (self.by_degree.len() - 1) as u32
    }

    /// Standard monomials of polynomial degree `d`.
    pub fn monomials_of_degree(&self, d: u32) -> &[usize] {
        self.by_degree.get(d as usize).map_or(&[], Vec::as_slice)
    }

    /// `x_{j+1} · x^a` in standard coordinates.
    pub fn mul_var(&self, j: usize, m: usize) -> &[(usize, BigInt)] {
        self.tables[j][m].get_or_init(|| self.compute_mul_var(j, m))
    }

    fn compute_mul_var(&self, j: usize, m: usize) -> Vec<(usize, BigInt)> {
        let a = self.exps[m][j] as usize;
        let cap = self.n - 1 - j;
        if a < cap {
            return vec![(m + self.weights[j], BigInt::one())];
        }
        // x_j^{cap+1} = -Σ_{i ≤ cap} x_j^i h_{cap+1-i}(x_1..x_{j-1})
        let rest = m - a * self.weights[j];
        let mut out = CoinvPoly::zero();
        for i in 0..=cap {
            let mut start = CoinvPoly::zero();
            start.add_term(rest + i * self.weights[j], &BigInt::one());
            let prod = self.mul_complete(&start, (cap + 1 - i) as u32, j);
            out = out.add(&prod);
        }
        out.terms.into_iter().map(|(k, v)| (k, -v)).collect()
    }

    /// `v · h_d(x_1..x_l)` (zero-based variables `0..l`).
    fn mul_complete(&self, v: &CoinvPoly, d: u32, l: usize) -> CoinvPoly {
        if d == 0 {
            return v.clone();
        }
        if l == 0 || v.is_zero() {
            return CoinvPoly::zero();
        }
        let mut out = CoinvPoly::zero();
        let mut cur = v.clone();
        for e in 0..=d {
            if e > 0 {
                cur = self.mul_var_poly(l - 1, &cur);
            }
            out = out.add(&self.mul_complete(&cur, d - e, l - 1));
        }
        out
    }

    pub fn mul_var_poly(&self, j: usize, v: &CoinvPoly) -> CoinvPoly {
        let mut out = CoinvPoly::zero();
        for (m, c) in v.terms() {
            for (k, w) in self.mul_var(j, m) {
                out.add_term(*k, &(c * w));
            }
        }
        out
    }

    /// `x^exps · v`.
    pub fn mul_exps(&self, exps: &[u32], v: &CoinvPoly) -> CoinvPoly {
        let mut cur = v.clone();
        for (j, &a) in exps.iter().enumerate() {
            for _ in 0..a {
                cur = self.mul_var_poly(j, &cur);
            }
        }
        cur
    }

    pub fn mul(&self, a: &CoinvPoly, b: &CoinvPoly) -> CoinvPoly {
        let mut out = CoinvPoly::zero();
        for (m, c) in a.terms() {
            out = out.add(&self.mul_exps(&self.exps[m], b).scale(c));
        }
        out
    }

    pub fn one(&self) -> CoinvPoly {
        let mut p = CoinvPoly::zero();
        p.add_term(0, &BigInt::one());
        p
    }

    /// Normal form of an arbitrary integer polynomial.
    pub fn reduce(&self, h: &Poly) -> CoinvPoly {
        assert_eq!(
            h.nvars(),
            self.n,
            "polynomial in the wrong number of variables"
        );
        let one = self.one();
        let mut out = CoinvPoly::zero();
        for (e, c) in h.terms() {
            out = out.add(&self.mul_exps(e, &one).scale(c));
        }
        out
    }
}

/// `h = h⁽¹⁾x₁ + Σ_{k≥2} h⁽ᵏ⁾(x_k - x_{k-1})` with `h⁽ᵏ⁾` in `x₁..x_k`.
pub fn taylor_expand(h: &Poly) -> Result<Vec<Poly>> {
    let n = h.nvars();
    match h.homogeneous_degree() {
        None if h.is_zero() => return Err(invalid("taylor expansion of zero")),
        None => return Err(invalid("taylor expansion needs a homogeneous polynomial")),
        Some(0) => return Err(invalid("taylor expansion of a constant")),
        Some(_) => {}
    }
    let mut comps = vec![Poly::zero(n); n];
    let mut cur = h.clone();
    for k in (1..n).rev() {
        let mut comp = Poly::zero(n);
        let mut next = Poly::zero(n);
        for (e, c) in cur.terms() {
            let j = e[k];
            let mut rest = e.clone();
            rest[k] = 0;
            for u in 0..j {
                let mut t = rest.clone();
                t[k] += u;
                t[k - 1] += j - 1 - u;
                comp.add_term(t, c.clone());
            }
            let mut t = rest;
            t[k - 1] += j;
            next.add_term(t, c.clone());
        }
        comps[k] = comp;
        cur = next;
    }
    let mut first = Poly::zero(n);
    for (e, c) in cur.terms() {
        if e[1..].iter().any(|&a| a != 0) || e[0] == 0 {
            return Err(Error::InternalInconsistency(
                "substitution left extra variables".into(),
            ));
        }
        let mut t = e.clone();
        t[0] -= 1;
        first.add_term(t, c.clone());
    }
    comps[0] = first;

    let mut back = comps[0].mul(&Poly::var(n, 0));
    for k in 1..n {
        let diff = Poly::var(n, k).add(&Poly::var(n, k - 1).scale(&-BigInt::one()));
        back = back.add(&comps[k].mul(&diff));
    }
    if back != *h {
        return Err(Error::InternalInconsistency(
            "taylor expansion does not reassemble".into(),
        ));
    }
    Ok(comps)
}

/// Which `E₂` page an element lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Ambient {
    /// Fiber generators `t₀..t_{n-1}`.
    U,
    /// Fiber generators `t₁..t_{n-1}`.
    PU,
}

/// `Σ c · x^a ⊗ t_S`, keyed by (standard monomial, bitmask of `S`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct E2Elem {
    ambient: Ambient,
    terms: BTreeMap<(usize, u32), BigInt>,
}

impl E2Elem {
    pub fn zero(ambient: Ambient) -> Self {
        E2Elem {
            ambient,
            terms: BTreeMap::new(),
        }
    }

    /// `p ⊗ t_S`.
    pub fn from_coinv(ambient: Ambient, p: &CoinvPoly, mask: u32) -> Self {
        assert!(ambient == Ambient::U || mask & 1 == 0, "t0 on the PU page");
        let mut out = E2Elem::zero(ambient);
        for (m, c) in p.terms() {
            out.add_term(m, mask, c);
        }
        out
    }

    pub fn ambient(&self) -> Ambient {
        self.ambient
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = ((usize, u32), &BigInt)> {
        self.terms.iter().map(|(&k, v)| (k, v))
    }

    pub fn add_term(&mut self, m: usize, mask: u32, c: &BigInt) {
        if c.is_zero() {
            return;
        }
        let slot = self.terms.entry((m, mask)).or_insert_with(BigInt::zero);
        *slot += c;
        if slot.is_zero() {
            self.terms.remove(&(m, mask));
        }
    }

    pub fn add(&self, other: &E2Elem) -> E2Elem {
        let mut out = self.clone();
        if other.ambient == Ambient::U {
            out.ambient = Ambient::U;
        }
        for (&(m, s), c) in &other.terms {
            out.add_term(m, s, c);
        }
        out
    }

    pub fn sub(&self, other: &E2Elem) -> E2Elem {
        self.add(&other.scale(&-BigInt::one()))
    }

    pub fn scale(&self, c: &BigInt) -> E2Elem {
        let mut out = E2Elem::zero(self.ambient);
        for (&(m, s), v) in &self.terms {
            out.add_term(m, s, &(v * c));
        }
        out
    }
}

/// A bidegree `(p, q)` basis: standard monomials of degree `p/2` times the
/// `q`-element subsets of the fiber generators.
#[derive(Debug, Clone)]
pub struct BidegreeBasis {
    pub a: u32,
    pub q: u32,
    elems: Vec<(usize, u32)>,
    index: HashMap<(usize, u32), usize>,
}

impl BidegreeBasis {
    pub fn len(&self) -> usize {
        self.elems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elems.is_empty()
    }

    pub fn elems(&self) -> &[(usize, u32)] {
        &self.elems
    }

    pub fn position(&self, m: usize, mask: u32) -> Option<usize> {
        self.index.get(&(m, mask)).copied()
    }

    pub fn to_vector(&self, z: &E2Elem) -> Result<Vec<BigInt>> {
        let mut v = vec![BigInt::zero(); self.len()];
        for ((m, s), c) in z.terms() {
            let i = self.position(m, s).ok_or_else(|| {
                Error::InternalInconsistency("element outside the bidegree".into())
            })?;
            v[i] = c.clone();
        }
        Ok(v)
    }

    pub fn from_vector(&self, ambient: Ambient, v: &[BigInt]) -> E2Elem {
        let mut out = E2Elem::zero(ambient);
        for (i, c) in v.iter().enumerate() {
            let (m, s) = self.elems[i];
            out.add_term(m, s, c);
        }
        out
    }
}

/// Resource bounds for the chain-level computations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleLimits {
    /// Largest `n` for which whole pages are computed.
    pub max_full_n: u64,
    /// Largest `n` for which degree windows are computed.
    pub max_windowed_n: u64,
}

impl Default for OracleLimits {
    fn default() -> Self {
        OracleLimits {
            max_full_n: 6,
            max_windowed_n: MAX_MODEL_N,
        }
    }
}

/// The chain-level model for one `n`, with cached cocycles.
pub struct Koszul {
    n: usize,
    coinv: Coinvariant,
    e_hat: Vec<OnceLock<E2Elem>>,
    h_hat: Vec<OnceLock<E2Elem>>,
    delta: Vec<OnceLock<E2Elem>>,
    bases: RwLock<HashMap<(Ambient, u32, u32), Arc<BidegreeBasis>>>,
}

impl Koszul {
    /// The shared model for `n`, built on first use.
    pub fn get(n: u64) -> Result<Arc<Koszul>> {
        if n < 2 {
            return Err(invalid(format!("n = {n} must be at least 2")));
        }
        if n > MAX_MODEL_N {
            return Err(Error::ResourceLimit(format!(
                "chain-level model limited to n <= {MAX_MODEL_N}, got {n}"
            )));
        }
        static CACHE: OnceLock<RwLock<HashMap<u64, Arc<Koszul>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(Default::default);
        if let Some(k) = cache.read().expect("model cache poisoned").get(&n) {
            return Ok(k.clone());
        }
        let built = Arc::new(Koszul::build(n as usize));
        let mut w = cache.write().expect("model cache poisoned");
        Ok(w.entry(n).or_insert(built).clone())
    }

    fn build(n: usize) -> Self {
        Koszul {
            n,
            coinv: Coinvariant::new(n),
            e_hat: (0..=n).map(|_| OnceLock::new()).collect(),
            h_hat: (0..=n).map(|_| OnceLock::new()).collect(),
            delta: (0..=n).map(|_| OnceLock::new()).collect(),
            bases: RwLock::new(HashMap::new()),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn coinvariant(&self) -> &Coinvariant {
        &self.coinv
    }

    fn fiber_mask(&self, ambient: Ambient) -> u32 {
        let all = (1u32 << self.n) - 1;
        match ambient {
            Ambient::U => all,
            Ambient::PU => all & !1,
        }
    }

    /// Rank of `E₂^{2a,q}` without building its basis.
    pub fn bidegree_dim(&self, ambient: Ambient, a: u32, q: u32) -> usize {
        let f = self.fiber_mask(ambient).count_ones() as usize;
        let q = q as usize;
        if q > f {
            return 0;
        }
        let choose = (0..q).fold(1usize, |c, i| c * (f - i) / (i + 1));
        self.coinv.monomials_of_degree(a).len() * choose
    }

    /// Largest bidegree touched by the maps into and out of total degrees `0..=hi`.
    fn window_cost(&self, hi: u32) -> usize {
        let mut m = 0;
        for a in 0..=self.coinv.top_degree() {
            for q in 0..=self.n as u32 {
                if 2 * a + q <= hi + 1 {
                    m = m.max(self.bidegree_dim(Ambient::U, a, q));
                }
            }
        }
        m
    }

    /// Top total degree of the page (`n²` for `U`, `n² - 1` for `PU`).
    pub fn top_total_degree(&self, ambient: Ambient) -> u32 {
        2 * self.coinv.top_degree() + self.fiber_mask(ambient).count_ones()
    }

    /// `d₂(t_j)`: `x₁` for `j = 0`, `x_{j+1} - x_j` otherwise.
    pub fn transgression(&self, j: usize) -> CoinvPoly {
        let one = self.coinv.one();
        if j == 0 {
            return self.coinv.mul_var_poly(0, &one);
        }
        let hi = self.coinv.mul_var_poly(j, &one);
        let lo = self.coinv.mul_var_poly(j - 1, &one);
        hi.add(&lo.scale(&-BigInt::one()))
    }

    /// The graded derivation `d₂`.
    /// `x^m · d₂(t_j)` in standard coordinates.
    fn tau_times(&self, j: usize, m: usize) -> Vec<(usize, BigInt)> {
        let mut out: Vec<(usize, BigInt)> = self.coinv.mul_var(j, m).to_vec();
        if j > 0 {
            out.extend(self.coinv.mul_var(j - 1, m).iter().map(|(k, v)| (*k, -v)));
        }
        out
    }

    /// The graded derivation `d₂`.
    pub fn d2(&self, z: &E2Elem) -> E2Elem {
        let mut out = E2Elem::zero(z.ambient);
        for ((m, mask), c) in z.terms() {
            let mut pos = 0;
            for j in 0..self.n {
                if mask & (1 << j) == 0 {
                    continue;
                }
                let sign = if pos % 2 == 0 { c.clone() } else { -c };
                pos += 1;
                for (k, v) in self.tau_times(j, m) {
                    out.add_term(k, mask & !(1 << j), &(v * &sign));
                }
            }
        }
        out
    }

    pub fn d2_u(&self, z: &E2Elem) -> Result<E2Elem> {
        if z.ambient != Ambient::U {
            return Err(invalid("d2_U applied to an element of the PU page"));
        }
        Ok(self.d2(z))
    }

    pub fn d2_pu(&self, z: &E2Elem) -> Result<E2Elem> {
        if z.ambient != Ambient::PU || z.terms.keys().any(|&(_, s)| s & 1 != 0) {
            return Err(invalid("d2_PU applied to an element involving t0"));
        }
        Ok(self.d2(z))
    }

    pub fn mul(&self, a: &E2Elem, b: &E2Elem) -> E2Elem {
        let ambient = if a.ambient == Ambient::U || b.ambient == Ambient::U {
            Ambient::U
        } else {
            Ambient::PU
        };
        let mut out = E2Elem::zero(ambient);
        let mut by_mono: BTreeMap<(usize, usize), CoinvPoly> = BTreeMap::new();
        for ((m1, s1), c1) in a.terms() {
            for ((m2, s2), c2) in b.terms() {
                if s1 & s2 != 0 {
                    continue;
                }
                // moving each t of s2 past the higher t's of s1
                let mut swaps = 0;
                for j in 0..self.n {
                    if s2 & (1 << j) != 0 {
                        swaps += (s1 >> (j + 1)).count_ones();
                    }
                }
                let prod = by_mono.entry((m1, m2)).or_insert_with(|| {
                    let mut single = CoinvPoly::zero();
                    single.add_term(m2, &BigInt::one());
                    self.coinv.mul_exps(self.coinv.exponents(m1), &single)
                });
                let c = if swaps % 2 == 0 { c1 * c2 } else { -(c1 * c2) };
                for (k, v) in prod.terms() {
                    out.add_term(k, s1 | s2, &(v * &c));
                }
            }
        }
        out
    }

    /// `(polynomial degree, fiber degree)` of a nonzero homogeneous element.
    pub fn bidegree(&self, z: &E2Elem) -> Option<(u32, u32)> {
        let mut it = z
            .terms()
            .map(|((m, s), _)| (self.coinv.degree_of(m), s.count_ones()));
        let first = it.next()?;
        it.all(|b| b == first).then_some(first)
    }

    /// `ĥ = Σ reduce(h⁽ᵏ⁾) ⊗ t_{k-1}` on the `U` page.
    pub fn hat(&self, h: &Poly) -> Result<E2Elem> {
        let comps = taylor_expand(h)?;
        let mut out = E2Elem::zero(Ambient::U);
        for (k, comp) in comps.iter().enumerate() {
            out = out.add(&E2Elem::from_coinv(
                Ambient::U,
                &self.coinv.reduce(comp),
                1 << k,
            ));
        }
        Ok(out)
    }

    fn check_r(&self, r: usize, lo: usize) -> Result<()> {
        if r < lo || r > self.n {
            return Err(invalid(format!("index {r} outside {lo}..={}", self.n)));
        }
        Ok(())
    }

    /// `ê_r`, the lift of the elementary symmetric polynomial.
    pub fn e_hat(&self, r: usize) -> Result<E2Elem> {
        self.check_r(r, 1)?;
        if let Some(v) = self.e_hat[r].get() {
            return Ok(v.clone());
        }
        let v = self.hat(&Poly::elementary(self.n, r))?;
        Ok(self.e_hat[r].get_or_init(|| v).clone())
    }

    /// `â_r`: `ê_r` without its `t₀` part, on the `PU` page.
    pub fn a_hat(&self, r: usize) -> Result<E2Elem> {
        let e = self.e_hat(r)?;
        let mut out = E2Elem::zero(Ambient::PU);
        for ((m, s), c) in e.terms() {
            if s & 1 == 0 {
                out.add_term(m, s, c);
            }
        }
        Ok(out)
    }

    /// `x₁^k` on the `PU` page.
    pub fn x1_pow(&self, k: u32) -> E2Elem {
        let mut e = vec![0; self.n];
        e[0] = k;
        let p = self.coinv.mul_exps(&e, &self.coinv.one());
        E2Elem::from_coinv(Ambient::PU, &p, 0)
    }

    /// A `PU` cochain `δ_{n,r}` with `d₂(δ) = b(n,r) x₁^r`.
    pub fn delta(&self, r: usize) -> Result<E2Elem> {
        self.check_r(r, 1)?;
        if let Some(v) = self.delta[r].get() {
            return Ok(v.clone());
        }
        let target = self
            .x1_pow(r as u32)
            .scale(&gcd_b(self.n as u64, r as u64)?);
        let v = self
            .preimage(Ambient::PU, &target, (r - 1) as u32, 1)?
            .ok_or_else(|| {
                Error::VerificationFailure(format!("no integral delta for n = {}, r = {r}", self.n))
            })?;
        Ok(self.delta[r].get_or_init(|| v).clone())
    }

    /// `ĥ_r`, the `PU` cocycle lifting `ρ_{2r-1}`.
    pub fn h_hat(&self, r: usize) -> Result<E2Elem> {
        self.check_r(r, 2)?;
        if let Some(v) = self.h_hat[r].get() {
            return Ok(v.clone());
        }
        let n = self.n as u64;
        let f = factorize(n)?;
        let c = c_with(&f, r as u64);
        let v = if c == 1 {
            let coeff = binomial(n, r as i64) / gcd_b(n, r as u64)?;
            let corr = self.mul(&self.x1_pow(1), &self.delta(r - 1)?).scale(&coeff);
            self.a_hat(r)?.add(&corr)
        } else {
            let p = c as usize;
            let mut s = 0u32;
            let mut q = r;
            while q > 1 {
                q /= p;
                s += 1;
            }
            let prev = r / p;
            let span = r - prev;
            let mut acc = self.a_hat(r)?.scale(&BigInt::from(p));
            let m = BigInt::from(n / prev as u64);
            for t in 1..=span {
                let term = self.mul(&self.x1_pow(t as u32), &self.a_hat(r - t)?);
                let coeff = if t % 2 == 1 { -&m } else { m.clone() };
                acc = acc.add(&term.scale(&coeff));
            }
            let tail = self.mul(&self.x1_pow(span as u32), &self.a_hat(prev)?);
            acc.sub(&tail.scale(&BigInt::from(split_tail_sign(c, s))))
        };
        if !self.d2(&v).is_zero() {
            return Err(Error::InternalInconsistency(format!(
                "h_hat({r}) is not a cocycle for n = {}",
                self.n
            )));
        }
        Ok(self.h_hat[r].get_or_init(|| v).clone())
    }

    /// The inclusion of the `PU` page into the `U` page.
    pub fn cstar_chain(&self, z: &E2Elem) -> E2Elem {
        let mut out = z.clone();
        out.ambient = Ambient::U;
        out
    }

    /// The `y` in `x = C*(x₁) + y ⊗ t₀`.
    pub fn theta_chain(&self, x: &E2Elem) -> E2Elem {
        let mut out = E2Elem::zero(Ambient::PU);
        for ((m, s), c) in x.terms() {
            if s & 1 == 0 {
                continue;
            }
            let rest = s & !1;
            // t₀ t_S' = (-1)^{|S'|} t_S' t₀
            let c = if rest.count_ones() % 2 == 0 {
                c.clone()
            } else {
                -c
            };
            out.add_term(m, rest, &c);
        }
        out
    }

    /// The `x₁` in `x = C*(x₁) + y ⊗ t₀`.
    pub fn pu_part(&self, x: &E2Elem) -> E2Elem {
        let mut out = E2Elem::zero(Ambient::PU);
        for ((m, s), c) in x.terms() {
            if s & 1 == 0 {
                out.add_term(m, s, c);
            }
        }
        out
    }

    pub fn basis(&self, ambient: Ambient, a: u32, q: u32) -> Arc<BidegreeBasis> {
        let key = (ambient, a, q);
        if let Some(b) = self.bases.read().expect("basis cache poisoned").get(&key) {
            return b.clone();
        }
        let fiber = self.fiber_mask(ambient);
        let masks: Vec<u32> = (0..=fiber)
            .filter(|&s| s & !fiber == 0 && s.count_ones() == q)
            .collect();
        let mut elems = Vec::new();
        for &m in self.coinv.monomials_of_degree(a) {
            for &s in &masks {
                elems.push((m, s));
            }
        }
        let index = elems.iter().enumerate().map(|(i, &k)| (k, i)).collect();
        let b = Arc::new(BidegreeBasis { a, q, elems, index });
        self.bases
            .write()
            .expect("basis cache poisoned")
            .insert(key, b.clone());
        b
    }

    /// The matrix of `d₂` from bidegree `(a, q)` to `(a+1, q-1)`; columns are
    /// source basis elements.
    pub fn d2_matrix(&self, ambient: Ambient, a: u32, q: u32) -> SparseIntMatrix {
        let src = self.basis(ambient, a, q);
        if q == 0 {
            return SparseIntMatrix::new(0, src.len());
        }
        let dst = self.basis(ambient, a + 1, q - 1);
        let mut mat = SparseIntMatrix::new(dst.len(), src.len());
        for (col, &(m, mask)) in src.elems().iter().enumerate() {
            let mut pos = 0;
            for j in 0..self.n {
                if mask & (1 << j) == 0 {
                    continue;
                }
                let negative = pos % 2 == 1;
                pos += 1;
                for (k, v) in self.tau_times(j, m) {
                    let row = dst.position(k, mask & !(1 << j)).expect("target basis");
                    mat.add_to(row, col, &if negative { -v } else { v });
                }
            }
        }
        mat
    }

    /// A `y` in bidegree `(a, q)` with `d₂(y) = target`, if one exists.
    pub fn preimage(
        &self,
        ambient: Ambient,
        target: &E2Elem,
        a: u32,
        q: u32,
    ) -> Result<Option<E2Elem>> {
        let mat = self.d2_matrix(ambient, a, q);
        let dst = self.basis(ambient, a + 1, q.saturating_sub(1));
        let b = dst.to_vector(target)?;
        Ok(solve_integer(&mat, &b).map(|x| self.basis(ambient, a, q).from_vector(ambient, &x)))
    }

    /// Whether a homogeneous `z` is `d₂` of something.
    pub fn is_coboundary(&self, z: &E2Elem) -> Result<bool> {
        let Some((a, q)) = self.bidegree(z) else {
            return Ok(z.is_zero());
        };
        if a == 0 {
            return Ok(false);
        }
        Ok(self.preimage(z.ambient, z, a - 1, q + 1)?.is_some())
    }

    /// `ê_I = ê_{i₁} ⋯ ê_{i_k}` on the `U` page.
    pub fn e_hat_product(&self, idx: &MultiIndex) -> Result<E2Elem> {
        let mut out = E2Elem::from_coinv(Ambient::U, &self.coinv.one(), 0);
        for i in idx.iter() {
            out = self.mul(&out, &self.e_hat(i as usize)?);
        }
        Ok(out)
    }

    /// `ĥ_J = ĥ_{j₁} ⋯ ĥ_{j_k}` on the `PU` page.
    pub fn h_hat_product(&self, idx: &MultiIndex) -> Result<E2Elem> {
        let mut out = E2Elem::from_coinv(Ambient::PU, &self.coinv.one(), 0);
        for j in idx.iter() {
            out = self.mul(&out, &self.h_hat(j as usize)?);
        }
        Ok(out)
    }

    /// The `PU` cocycle obtained by sending `ω ↦ x₁` and `ρ_J ↦ ĥ_J`.
    pub fn realize(&self, x: &PresElem) -> Result<E2Elem> {
        let mut out = E2Elem::zero(Ambient::PU);
        for (m, c) in x.terms() {
            if !c.is_integer() {
                return Err(invalid(format!(
                    "cannot realize the rational coefficient {c}"
                )));
            }
            let term = self.mul(&self.x1_pow(m.omega), &self.h_hat_product(&m.rho)?);
            out = out.add(&term.scale(&c.to_integer()));
        }
        Ok(out)
    }

    /// `θ(ê_I)` on the chain level, checked to be a cocycle.
    pub fn theta_of_e_hat(&self, idx: &MultiIndex) -> Result<E2Elem> {
        let t = self.theta_chain(&self.e_hat_product(idx)?);
        if !self.d2(&t).is_zero() {
            return Err(Error::VerificationFailure(format!(
                "theta(e_hat_{{{idx}}}) is not a cocycle"
            )));
        }
        Ok(t)
    }
}

/// `E₃^{p,q}` for a range of total degrees.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct E3Page {
    pub n: u64,
    pub ambient: Ambient,
    pub window: RangeInclusive<u32>,
    /// Keyed by `(p, q)` with `p` the even base degree.
    pub groups: BTreeMap<(u32, u32), AbelianGroup>,
}

impl E3Page {
    /// `⊕_{p+q=d} E₃^{p,q}`.
    pub fn total(&self, d: u32) -> AbelianGroup {
        self.groups
            .iter()
            .filter(|((p, q), _)| p + q == d)
            .fold(AbelianGroup::trivial(), |acc, (_, g)| acc.direct_sum(g))
    }

    pub fn total_free_rank(&self) -> usize {
        self.groups.values().map(|g| g.free_rank).sum()
    }

    /// Free rank in each total degree.
    pub fn free_poincare(&self) -> BTreeMap<u32, usize> {
        let mut out = BTreeMap::new();
        for ((p, q), g) in &self.groups {
            if g.free_rank > 0 {
                *out.entry(p + q).or_insert(0) += g.free_rank;
            }
        }
        out
    }
}

fn check_limits(n: u64, full: bool, limits: &OracleLimits) -> Result<()> {
    if n < 2 {
        return Err(invalid(format!("n = {n} must be at least 2")));
    }
    if full && n > limits.max_full_n {
        return Err(Error::ResourceLimit(format!(
            "full oracle runs are limited to n <= {}; pass a degree window",
            limits.max_full_n
        )));
    }
    if n > limits.max_windowed_n.min(MAX_MODEL_N) {
        return Err(Error::ResourceLimit(format!(
            "oracle runs are limited to n <= {}",
            limits.max_windowed_n.min(MAX_MODEL_N)
        )));
    }
    Ok(())
}

/// Widest window `0..=hi` with `hi <= 2n + 1` whose maps stay within
/// [`MAX_MAP_DIM`].
pub fn default_window(n: u64) -> Result<u32> {
    let k = Koszul::get(n)?;
    let mut hi = 2 * n as u32 + 1;
    while hi > 3 && k.window_cost(hi) > MAX_MAP_DIM {
        hi -= 1;
    }
    Ok(hi)
}

/// `ker d₂ / im d₂` in every bidegree whose total degree lies in `window`
/// (all degrees when `None`).
pub fn e3_page(
    n: u64,
    ambient: Ambient,
    window: Option<RangeInclusive<u32>>,
    limits: &OracleLimits,
) -> Result<E3Page> {
    check_limits(n, window.is_none(), limits)?;
    let k = Koszul::get(n)?;
    let top = k.top_total_degree(ambient);
    let window = window.unwrap_or(0..=top);
    let qmax = k.fiber_mask(ambient).count_ones();
    let amax = k.coinv.top_degree();
    let mut cells = Vec::new();
    for a in 0..=amax {
        for q in 0..=qmax {
            if window.contains(&(2 * a + q)) {
                cells.push((a, q));
            }
        }
    }
    // every map touching a cell, keyed by its source bidegree
    let mut maps: Vec<(u32, u32)> = Vec::new();
    for &(a, q) in &cells {
        if q > 0 {
            maps.push((a, q));
        }
        if a > 0 && q < qmax {
            maps.push((a - 1, q + 1));
        }
    }
    maps.sort_unstable();
    maps.dedup();
    if let Some(&(a, q)) = maps
        .iter()
        .find(|&&(a, q)| k.bidegree_dim(ambient, a, q) > MAX_MAP_DIM)
    {
        return Err(Error::ResourceLimit(format!(
            "E2^({},{q}) for n = {n} has rank {} > {MAX_MAP_DIM}; narrow the degree window",
            2 * a,
            k.bidegree_dim(ambient, a, q)
        )));
    }
    let smiths: HashMap<(u32, u32), Smith> = maps
        .par_iter()
        .map(|&(a, q)| ((a, q), smith_normal_form(&k.d2_matrix(ambient, a, q))))
        .collect();
    let mut groups = BTreeMap::new();
    for (a, q) in cells {
        let dim = k.basis(ambient, a, q).len();
        let out_rank = smiths.get(&(a, q)).map_or(0, |s| s.rank);
        let incoming = if a > 0 {
            smiths.get(&(a - 1, q + 1))
        } else {
            None
        };
        let in_rank = incoming.map_or(0, |s| s.rank);
        let torsion = incoming.map(Smith::torsion).unwrap_or_default();
        groups.insert(
            (2 * a, q),
            AbelianGroup::from_orders(dim - out_rank - in_rank, torsion),
        );
    }
    Ok(E3Page {
        n,
        ambient,
        window,
        groups,
    })
}

/// A generator of `E₃^{2a,q}` with its order (zero when free).
#[derive(Debug, Clone)]
pub struct HomologyGenerator {
    pub order: BigInt,
    pub cocycle: E2Elem,
}

/// Largest bidegree dimension for which representatives are computed.
pub const MAX_REPRESENTATIVE_DIM: usize = 600;

/// Cocycle representatives of a generating set of `E₃^{2a,q}`, one per
/// invariant factor.
pub fn homology_generators(
    n: u64,
    ambient: Ambient,
    a: u32,
    q: u32,
) -> Result<Vec<HomologyGenerator>> {
    let k = Koszul::get(n)?;
    let basis = k.basis(ambient, a, q);
    if basis.len() > MAX_REPRESENTATIVE_DIM {
        return Err(Error::ResourceLimit(format!(
            "bidegree ({}, {q}) has dimension {} > {MAX_REPRESENTATIVE_DIM}",
            2 * a,
            basis.len()
        )));
    }
    let cocycles = kernel_basis(&k.d2_matrix(ambient, a, q));
    if cocycles.is_empty() {
        return Ok(Vec::new());
    }
    let dim = basis.len();
    let kn = cocycles.len();
    let mut kmat = SparseIntMatrix::new(dim, kn);
    for (j, v) in cocycles.iter().enumerate() {
        for (i, x) in v.iter().enumerate() {
            kmat.set(i, j, x.clone());
        }
    }
    // boundaries in cocycle coordinates, one row each
    let mut rel = SparseIntMatrix::new(0, kn);
    if a > 0 {
        let din = k.d2_matrix(ambient, a - 1, q + 1);
        let t = din.transpose();
        let mut rows = Vec::new();
        let mut cols: Vec<Vec<BigInt>> = vec![vec![BigInt::zero(); dim]; din.cols()];
        for (c, r, v) in t.entries() {
            cols[c][r] = v.clone();
        }
        for col in cols {
            if col.iter().all(Zero::is_zero) {
                continue;
            }
            let coords = solve_integer(&kmat, &col).ok_or_else(|| {
                Error::InternalInconsistency("boundary outside the cocycles".into())
            })?;
            rows.push(coords);
        }
        rel = SparseIntMatrix::from_dense(&rows);
        if rows.is_empty() {
            rel = SparseIntMatrix::new(0, kn);
        }
    }
    let t = smith_normal_form_with_transforms(&rel);
    // generators are the rows of V⁻¹
    let vmat = SparseIntMatrix::from_dense(&t.v);
    let mut out = Vec::new();
    for j in 0..kn {
        let order = if j < t.smith.rank {
            t.smith.factors[j].clone()
        } else {
            BigInt::zero()
        };
        if order.is_one() {
            continue;
        }
        let mut e = vec![BigInt::zero(); kn];
        e[j] = BigInt::one();
        // row j of V⁻¹ is the solution w of wᵀ V = e_jᵀ, i.e. Vᵀ w = e_j
        let w = solve_integer(&vmat.transpose(), &e)
            .ok_or_else(|| Error::InternalInconsistency("transform is not unimodular".into()))?;
        let v = kmat.mul_vec(&w);
        out.push(HomologyGenerator {
            order,
            cocycle: basis.from_vector(ambient, &v),
        });
    }
    Ok(out)
}

/// Outcome of comparing a formula for `θ(ξ_I)` with the chain-level class.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleMatch {
    pub index: MultiIndex,
    /// `±1` with `realize(formula) - sign · θ(ê_I)` a coboundary.
    pub sign: i8,
}

/// Checks that `θ(ξ_I)` given by `formula` agrees with the chain-level
/// `θ(ê_I)` up to sign, modulo coboundaries.
pub fn compare_with_formula(
    n: u64,
    idx: &MultiIndex,
    formula: &PresElem,
    limits: &OracleLimits,
) -> Result<OracleMatch> {
    check_limits(n, false, limits)?;
    let k = Koszul::get(n)?;
    let chain = k.theta_of_e_hat(idx)?;
    let realized = k.realize(formula)?;
    for sign in [1i8, -1] {
        let diff = realized.sub(&chain.scale(&BigInt::from(sign)));
        if diff.is_zero() || k.is_coboundary(&diff)? {
            return Ok(OracleMatch {
                index: idx.clone(),
                sign,
            });
        }
    }
    Err(Error::VerificationFailure(format!(
        "theta(xi_{{{idx}}}) = {formula} disagrees with the chain-level class for n = {n}"
    )))
}

/// The chain-level `θ(ê_I)` written in the frame `{x₁^a ĥ_J}` modulo
/// coboundaries.
pub fn oracle_theta(n: u64, idx: &MultiIndex, limits: &OracleLimits) -> Result<PresElem> {
    check_limits(n, false, limits)?;
    if idx.is_empty() || u64::from(idx.as_slice()[idx.len() - 1]) > n {
        return Err(invalid(format!(
            "index set {{{idx}}} is not a nonempty subset of 1..={n}"
        )));
    }
    let k = Koszul::get(n)?;
    let chain = k.theta_of_e_hat(idx)?;
    if chain.is_zero() {
        return Ok(PresElem::zero());
    }
    let (a_tot, q) = k
        .bidegree(&chain)
        .ok_or_else(|| Error::InternalInconsistency("inhomogeneous theta".into()))?;
    let basis = k.basis(Ambient::PU, a_tot, q);

    let mut frame: Vec<(u32, MultiIndex)> = Vec::new();
    for j in MultiIndex::all_subsets(2, n as u32) {
        if j.len() as u32 != q {
            continue;
        }
        let used: u32 = j.iter().map(|x| x - 1).sum();
        if used <= a_tot && a_tot - used < n as u32 {
            frame.push((a_tot - used, j));
        }
    }
    let mut columns: Vec<Vec<BigInt>> = Vec::new();
    for (a, j) in &frame {
        let z = k.mul(&k.x1_pow(*a), &k.h_hat_product(j)?);
        columns.push(basis.to_vector(&z)?);
    }
    let mut mat = SparseIntMatrix::new(basis.len(), frame.len());
    for (c, col) in columns.iter().enumerate() {
        for (r, v) in col.iter().enumerate() {
            mat.set(r, c, v.clone());
        }
    }
    if a_tot > 0 {
        let din = k.d2_matrix(Ambient::PU, a_tot - 1, q + 1);
        let offset = mat.cols();
        let mut wide = SparseIntMatrix::new(basis.len(), offset + din.cols());
        for (r, c, v) in mat.entries() {
            wide.set(r, c, v.clone());
        }
        for (r, c, v) in din.entries() {
            wide.set(r, offset + c, v.clone());
        }
        mat = wide;
    }
    let sol = solve_integer(&mat, &basis.to_vector(&chain)?).ok_or_else(|| {
        Error::VerificationFailure(format!(
            "theta(e_hat_{{{idx}}}) is not in the span of x1^a h_hat_J modulo coboundaries (n = {n})"
        ))
    })?;
    let mut out = PresElem::zero();
    for (i, (a, j)) in frame.iter().enumerate() {
        if !sol[i].is_zero() {
            out = &out + &PresElem::monomial(sol[i].clone(), *a, j.clone());
        }
    }
    Ok(out)
}

/// Checks that `C*(ĥ_k) - c_k ê_k` is a coboundary on the `U` page.
pub fn cstar_multiplier_holds(n: u64, k_idx: usize) -> Result<bool> {
    let k = Koszul::get(n)?;
    let f = factorize(n)?;
    let ck = BigInt::from(c_with(&f, k_idx as u64));
    let diff = k
        .cstar_chain(&k.h_hat(k_idx)?)
        .sub(&k.e_hat(k_idx)?.scale(&ck));
    if diff.is_zero() {
        return Ok(true);
    }
    k.is_coboundary(&diff)
}

/// Orders of `x₁^r` on `E₃^{2r,0}(PU)`, read off from the page.
pub fn omega_orders(n: u64) -> Result<Vec<BigInt>> {
    let k = Koszul::get(n)?;
    let mut out = Vec::new();
    for r in 1..=n as u32 {
        let x = k.x1_pow(r);
        if x.is_zero() {
            out.push(BigInt::one());
            continue;
        }
        // smallest m > 0 with m x₁^r a coboundary; a divisor of b(n,1) = n
        let mut found = None;
        for m in 1..=n {
            if m > 1 && !n.is_multiple_of(m) {
                continue;
            }
            if k.is_coboundary(&x.scale(&BigInt::from(m)))? {
                found = Some(BigInt::from(m));
                break;
            }
        }
        out.push(
            found
                .ok_or_else(|| Error::VerificationFailure(format!("x1^{r} has infinite order")))?,
        );
    }
    Ok(out)
}

/// Whether `ĥ₂ ⋯ ĥₙ` generates the top group `E₃^{top}(PU) ≅ Z`.
pub fn top_class_generates(n: u64) -> Result<bool> {
    let k = Koszul::get(n)?;
    let all: Vec<u32> = (2..=n as u32).collect();
    let prod = k.h_hat_product(&MultiIndex::try_from(all)?)?;
    let Some((a, q)) = k.bidegree(&prod) else {
        return Ok(false);
    };
    let gens = homology_generators(n, Ambient::PU, a, q)?;
    let [g] = gens.as_slice() else {
        return Ok(false);
    };
    if !g.order.is_zero() {
        return Ok(false);
    }
    for sign in [1, -1] {
        let diff = prod.sub(&g.cocycle.scale(&BigInt::from(sign)));
        if diff.is_zero() || k.is_coboundary(&diff)? {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Compares the presentation, the θ formulas and the cocycle constructions
/// with the chain-level model in total degrees `0..=max_degree` (all degrees
/// when `None`).
pub fn verify_suite(n: u64, max_degree: Option<u32>, limits: &OracleLimits) -> Result<Vec<Check>> {
    check_limits(n, max_degree.is_none(), limits)?;
    let top = (n * n - 1) as u32;
    let hi = max_degree.unwrap_or(top).min(top);
    let mut out = Vec::new();

    let pu = e3_page(n, Ambient::PU, Some(0..=hi), limits)?;
    let groups = groups_by_degree(n, hi)?;
    let bad: Vec<String> = (0..=hi)
        .filter(|d| groups[d] != pu.total(*d))
        .map(|d| format!("H^{d}: {} vs {}", groups[&d], pu.total(d)))
        .collect();
    out.push(Check::new(
        format!("groups match E3(PU) in degrees 0..={hi}"),
        bad.is_empty(),
        bad.join("; "),
    ));

    let u = e3_page(n, Ambient::U, Some(0..=hi.min(top + 1)), limits)?;
    let expect = exterior_poincare((1..=n as u32).map(|i| 2 * i - 1));
    let free = u.groups.values().all(|g| g.torsion.is_empty());
    let poincare = u.free_poincare();
    let shape = (0..=hi.min(top + 1)).all(|d| {
        poincare.get(&d).copied().unwrap_or(0) as u64 == expect.get(&d).copied().unwrap_or(0)
    });
    out.push(Check::new(
        "E3(U) is a torsion-free exterior algebra",
        free && shape,
        String::new(),
    ));

    let mut theta_bad = Vec::new();
    let mut theta_count = 0;
    for idx in MultiIndex::all_subsets(1, n as u32) {
        if idx.is_empty() || idx.odd_degree() - 1 > hi {
            continue;
        }
        theta_count += 1;
        let formula = crate::theta::theta(n, &idx)?;
        match compare_with_formula(n, &idx, &formula, limits) {
            Ok(_) => {}
            Err(Error::VerificationFailure(msg)) => theta_bad.push(msg),
            Err(e) => return Err(e),
        }
    }
    out.push(Check::new(
        format!("theta agrees with the chain level on {theta_count} index sets"),
        theta_bad.is_empty(),
        theta_bad.join("; "),
    ));

    out.push(cocycle_checks(n)?);

    let orders = omega_orders(n)?;
    let want: Vec<BigInt> = (1..=n).map(|r| gcd_b(n, r)).collect::<Result<_>>()?;
    out.push(Check::new(
        "x1^r has order b(n,r)",
        orders == want,
        format!("{orders:?}"),
    ));

    out.extend(sanity_suite(n)?);
    Ok(out)
}

/// `d₂ ê_r = 0`, `d₂ â_r = -C(n,r) x₁^r`, `d₂ ĥ_r = 0` and
/// `C*(ĥ_k) - c_k ê_k` a coboundary, for every `r` and `k`.
pub fn cocycle_checks(n: u64) -> Result<Check> {
    let k = Koszul::get(n)?;
    let mut cocycle_bad = Vec::new();
    for r in 1..=n as usize {
        if !k.d2(&k.e_hat(r)?).is_zero() {
            cocycle_bad.push(format!("d2(e_hat_{r}) != 0"));
        }
        let expect = k.x1_pow(r as u32).scale(&-binomial(n, r as i64));
        if k.d2(&k.a_hat(r)?) != expect {
            cocycle_bad.push(format!("d2(a_hat_{r}) != -C(n,{r}) x1^{r}"));
        }
    }
    for r in 2..=n as usize {
        match k.h_hat(r) {
            Ok(_) => {}
            Err(Error::InternalInconsistency(msg)) => cocycle_bad.push(msg),
            Err(e) => return Err(e),
        }
        if !cstar_multiplier_holds(n, r)? {
            cocycle_bad.push(format!(
                "C*(h_hat_{r}) - c_{r} e_hat_{r} is not a coboundary"
            ));
        }
    }
    Ok(Check::new(
        "cocycle constructions",
        cocycle_bad.is_empty(),
        cocycle_bad.join("; "),
    ))
}

/// Unsigned content of an element, used to spot spurious zero classes.
pub fn content(z: &E2Elem) -> BigInt {
    z.terms().fold(BigInt::zero(), |g, (_, c)| g.gcd(c)).abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn model(n: u64) -> Arc<Koszul> {
        Koszul::get(n).unwrap()
    }

    fn single(m: usize) -> CoinvPoly {
        let mut p = CoinvPoly::zero();
        p.add_term(m, &BigInt::one());
        p
    }

    fn var(n: usize, i: usize) -> Poly {
        Poly::var(n, i)
    }

    #[test]
    fn reduce_examples() {
        let k = model(2);
        let c = k.coinvariant();
        let x1 = c.reduce(&var(2, 0));
        assert_eq!(c.reduce(&var(2, 1)), x1.scale(&-BigInt::one()));
        assert!(c.reduce(&var(2, 0).mul(&var(2, 0))).is_zero());
        for n in 2..=6usize {
            let k = model(n as u64);
            let c = k.coinvariant();
            assert_eq!(c.rank(), (1..=n).product::<usize>());
            for r in 1..=n {
                assert!(
                    c.reduce(&Poly::elementary(n, r)).is_zero(),
                    "e_{r} for n = {n}"
                );
            }
        }
        assert_eq!(model(3).coinvariant().rank(), 6);
    }

    #[test]
    fn reduction_respects_products() {
        // (x_i x_j) x^a computed two ways
        let k = model(4);
        let c = k.coinvariant();
        for m in 0..c.rank() {
            for i in 0..4 {
                for j in 0..4 {
                    let lhs = c.mul_var_poly(i, &c.mul_var_poly(j, &single(m)));
                    let rhs = c.mul_var_poly(j, &c.mul_var_poly(i, &single(m)));
                    assert_eq!(lhs, rhs);
                }
            }
        }
    }

    #[test]
    fn taylor_examples() {
        let h = var(2, 0).mul(&var(2, 1));
        let comps = taylor_expand(&h).unwrap();
        assert_eq!(comps[0], var(2, 0));
        assert_eq!(comps[1], var(2, 0));

        let n = 5;
        let comps = taylor_expand(&Poly::elementary(n, 1)).unwrap();
        for (k, comp) in comps.iter().enumerate() {
            assert_eq!(*comp, Poly::monomial(n, vec![0; n], BigInt::from(n - k)));
        }
        for r in 1..=n {
            let comps = taylor_expand(&Poly::elementary(n, r)).unwrap();
            let mut e = vec![0; n];
            e[0] = r as u32 - 1;
            assert_eq!(comps[0], Poly::monomial(n, e, binomial(n as u64, r as i64)));
        }
        assert!(taylor_expand(&Poly::zero(3)).is_err());
        assert!(taylor_expand(&Poly::monomial(3, vec![0, 0, 0], BigInt::one())).is_err());
        assert!(taylor_expand(&var(3, 0).add(&var(3, 1).mul(&var(3, 2)))).is_err());
    }

    #[test]
    fn hat_examples() {
        let k = model(2);
        let e1 = k.e_hat(1).unwrap();
        let one = k.coinvariant().one();
        let expect = E2Elem::from_coinv(Ambient::U, &one.scale(&BigInt::from(2)), 1)
            .add(&E2Elem::from_coinv(Ambient::U, &one, 2));
        assert_eq!(e1, expect);
        for n in 2..=5 {
            let k = model(n);
            for r in 1..=n as usize {
                assert!(k.d2(&k.e_hat(r).unwrap()).is_zero());
            }
        }
    }

    #[test]
    fn d2_examples() {
        let k = model(3);
        let c = k.coinvariant();
        let one = c.one();
        let t1 = E2Elem::from_coinv(Ambient::PU, &one, 0b10);
        let expect = c.reduce(&var(3, 1).add(&var(3, 0).scale(&-BigInt::one())));
        assert_eq!(
            k.d2_pu(&t1).unwrap(),
            E2Elem::from_coinv(Ambient::PU, &expect, 0)
        );
        let t01 = E2Elem::from_coinv(Ambient::U, &one, 0b11);
        let x1 = c.reduce(&var(3, 0));
        let lhs = k.d2_u(&t01).unwrap();
        let rhs = E2Elem::from_coinv(Ambient::U, &x1, 0b10).sub(&E2Elem::from_coinv(
            Ambient::U,
            &expect,
            0b01,
        ));
        assert_eq!(lhs, rhs);
        assert!(k.d2_pu(&t01).is_err());
    }

    #[test]
    fn d2_squares_to_zero() {
        for n in 2..=4u64 {
            let k = model(n);
            for amb in [Ambient::U, Ambient::PU] {
                for a in 0..=k.coinvariant().top_degree() {
                    for q in 2..=n as u32 {
                        let first = k.d2_matrix(amb, a, q);
                        let second = k.d2_matrix(amb, a + 1, q - 1);
                        if second.rows() > 0 && first.cols() > 0 {
                            assert_eq!(second.mul(&first).nnz(), 0, "n={n} {amb:?} ({a},{q})");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn cocycle_constructions_small() {
        for n in 2..=6u64 {
            let k = model(n);
            for r in 1..=n as usize {
                let lhs = k.d2(&k.a_hat(r).unwrap());
                let rhs = k.x1_pow(r as u32).scale(&-binomial(n, r as i64));
                assert_eq!(lhs, rhs, "a_hat n={n} r={r}");
                let d = k.d2(&k.delta(r).unwrap());
                assert_eq!(d, k.x1_pow(r as u32).scale(&gcd_b(n, r as u64).unwrap()));
            }
            for r in 2..=n as usize {
                assert!(k.d2(&k.h_hat(r).unwrap()).is_zero());
                assert!(cstar_multiplier_holds(n, r).unwrap(), "n={n} k={r}");
            }
        }
    }

    #[test]
    fn chain_theta_basics() {
        let k = model(4);
        for r in 1..=4usize {
            let t = k.theta_chain(&k.e_hat(r).unwrap());
            let mut e = vec![0; 4];
            e[0] = r as u32 - 1;
            let expect = k
                .coinvariant()
                .reduce(&Poly::monomial(4, e, binomial(4, r as i64)));
            assert_eq!(t, E2Elem::from_coinv(Ambient::PU, &expect, 0));
        }
        let h = k.h_hat(3).unwrap();
        assert!(k.theta_chain(&k.cstar_chain(&h)).is_zero());
    }

    #[test]
    fn oracle_theta_examples() {
        let lim = OracleLimits::default();
        let v = oracle_theta(4, &"1,2".parse().unwrap(), &lim).unwrap();
        // −2ρ₃ up to coboundary: compare through the formula check
        compare_with_formula(4, &"1,2".parse().unwrap(), &v, &lim).unwrap();
        let expect = PresElem::monomial(BigInt::from(-2), 0, MultiIndex::singleton(2));
        compare_with_formula(4, &"1,2".parse().unwrap(), &expect, &lim).unwrap();
        for n in 2..=5u64 {
            for kk in 1..=n as u32 {
                let idx = MultiIndex::singleton(kk);
                let formula = crate::theta::theta_single(n, kk).unwrap();
                let m = compare_with_formula(n, &idx, &formula, &lim).unwrap();
                assert_eq!(m.sign, 1);
            }
        }
    }

    #[test]
    fn small_pages() {
        let lim = OracleLimits::default();
        let pu2 = e3_page(2, Ambient::PU, None, &lim).unwrap();
        let got: Vec<String> = (0..=3).map(|d| pu2.total(d).to_string()).collect();
        assert_eq!(got, ["Z", "0", "Z/2", "Z"]);
        let u3 = e3_page(3, Ambient::U, None, &lim).unwrap();
        assert_eq!(u3.total_free_rank(), 8);
        assert!(u3.groups.values().all(|g| g.torsion.is_empty()));
        let pu4 = e3_page(4, Ambient::PU, Some(2..=2), &lim).unwrap();
        assert_eq!(pu4.total(2), AbelianGroup::cyclic(4));
        assert!(matches!(
            e3_page(7, Ambient::PU, None, &lim),
            Err(Error::ResourceLimit(_))
        ));
    }

    #[test]
    fn representatives_small() {
        let gens = homology_generators(2, Ambient::PU, 1, 0).unwrap();
        assert_eq!(gens.len(), 1);
        assert_eq!(gens[0].order, BigInt::from(2));
        assert!(top_class_generates(3).unwrap());
        for n in 2..=5u64 {
            let expect: Vec<BigInt> = (1..=n).map(|r| gcd_b(n, r).unwrap()).collect();
            assert_eq!(omega_orders(n).unwrap(), expect);
        }
    }

    #[test]
    fn verify_small() {
        let lim = OracleLimits::default();
        for n in 2..=4 {
            for c in verify_suite(n, None, &lim).unwrap() {
                assert!(c.passed, "n={n}: {} {}", c.name, c.detail);
            }
        }
        assert!(matches!(
            verify_suite(7, None, &lim),
            Err(Error::ResourceLimit(_))
        ));
    }

    fn arb_poly(n: usize) -> impl Strategy<Value = Poly> {
        (
            1u32..4,
            proptest::collection::vec((proptest::collection::vec(0u32..3, n), -3i64..4), 1..5),
        )
            .prop_map(move |(d, terms)| {
                let mut p = Poly::zero(n);
                for (mut e, c) in terms {
                    // force homogeneity of degree d by padding the first variable
                    let s: u32 = e.iter().sum();
                    if s > d {
                        continue;
                    }
                    e[0] += d - s;
                    p.add_term(e, BigInt::from(c));
                }
                if p.is_zero() {
                    let mut e = vec![0; n];
                    e[0] = d;
                    p.add_term(e, BigInt::one());
                }
                p
            })
    }

    fn arb_e2(n: usize, ambient: Ambient) -> impl Strategy<Value = E2Elem> {
        let count: usize = (1..=n).product();
        proptest::collection::vec((0..count, 0u32..(1 << n), -3i64..4), 0..6).prop_map(move |ts| {
            let mut z = E2Elem::zero(ambient);
            for (m, mut s, c) in ts {
                if ambient == Ambient::PU {
                    s &= !1;
                }
                z.add_term(m, s, &BigInt::from(c));
            }
            z
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn hat_lifts_reduction(h in arb_poly(4)) {
            let k = model(4);
            let hat = k.hat(&h).unwrap();
            let expect = E2Elem::from_coinv(Ambient::U, &k.coinvariant().reduce(&h), 0);
            prop_assert_eq!(k.d2(&hat), expect);
        }

        #[test]
        fn d2_is_nilpotent(z in arb_e2(4, Ambient::U)) {
            let k = model(4);
            prop_assert!(k.d2(&k.d2(&z)).is_zero());
        }

        #[test]
        fn d2_is_a_derivation(x in arb_e2(3, Ambient::U), y in arb_e2(3, Ambient::U)) {
            let k = model(3);
            // restrict x to a single fiber degree so the sign is defined
            let q = x.terms().next().map_or(0, |((_, s), _)| s.count_ones());
            let mut xq = E2Elem::zero(Ambient::U);
            for ((m, s), c) in x.terms() {
                if s.count_ones() == q { xq.add_term(m, s, c); }
            }
            let lhs = k.d2(&k.mul(&xq, &y));
            let sign = if q % 2 == 0 { BigInt::one() } else { -BigInt::one() };
            let rhs = k.mul(&k.d2(&xq), &y).add(&k.mul(&xq, &k.d2(&y)).scale(&sign));
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn theta_chain_is_multiplicative(x in arb_e2(3, Ambient::U), y in arb_e2(3, Ambient::U)) {
            let k = model(3);
            let q = y.terms().next().map_or(0, |((_, s), _)| s.count_ones());
            let mut yq = E2Elem::zero(Ambient::U);
            for ((m, s), c) in y.terms() {
                if s.count_ones() == q { yq.add_term(m, s, c); }
            }
            // θ(x y) = (-1)^{deg y₁} θ(x) y₁ + x₁ θ(y)
            let y1 = k.pu_part(&yq);
            let x1 = k.pu_part(&x);
            let sign = if q % 2 == 0 { BigInt::one() } else { -BigInt::one() };
            let lhs = k.theta_chain(&k.mul(&x, &yq));
            let rhs = k.mul(&k.theta_chain(&x), &y1).scale(&sign).add(&k.mul(&x1, &k.theta_chain(&yq)));
            prop_assert_eq!(lhs, rhs);
        }
    }
}
