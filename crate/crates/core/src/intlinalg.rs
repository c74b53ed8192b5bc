//! Exact integer linear algebra over sparse matrices: Smith normal form,
//! integer solving, saturated kernels and cokernels.
//!
//! Large matrices are first reduced by eliminating unit pivots in Markowitz
//! order (cheapest fill-in first). Only the non-unit remainder is handed to a
//! dense Smith reduction.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// A sparse integer matrix without stored zeros.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SparseIntMatrix {
    rows: usize,
    cols: usize,
    entries: BTreeMap<(usize, usize), BigInt>,
}

impl SparseIntMatrix {
    pub fn new(rows: usize, cols: usize) -> Self {
        SparseIntMatrix {
            rows,
            cols,
            entries: BTreeMap::new(),
        }
    }

    pub fn identity(k: usize) -> Self {
        let mut m = Self::new(k, k);
        for i in 0..k {
            m.set(i, i, BigInt::one());
        }
        m
    }

    pub fn from_dense<T: Into<BigInt> + Clone>(rows: &[Vec<T>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        let mut m = Self::new(rows.len(), cols);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), cols, "ragged matrix");
            for (j, v) in row.iter().enumerate() {
                m.set(i, j, v.clone().into());
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn get(&self, i: usize, j: usize) -> BigInt {
        self.entries.get(&(i, j)).cloned().unwrap_or_default()
    }

    pub fn set(&mut self, i: usize, j: usize, v: BigInt) {
        assert!(
            i < self.rows && j < self.cols,
            "({i}, {j}) outside {}x{}",
            self.rows,
            self.cols
        );
        if v.is_zero() {
            self.entries.remove(&(i, j));
        } else {
            self.entries.insert((i, j), v);
        }
    }

    pub fn add_to(&mut self, i: usize, j: usize, v: &BigInt) {
        let cur = self.get(i, j);
        self.set(i, j, cur + v);
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, &BigInt)> {
        self.entries.iter().map(|(&(i, j), v)| (i, j, v))
    }

    pub fn transpose(&self) -> Self {
        SparseIntMatrix {
            rows: self.cols,
            cols: self.rows,
            entries: self
                .entries
                .iter()
                .map(|(&(i, j), v)| ((j, i), v.clone()))
                .collect(),
        }
    }

    pub fn to_dense(&self) -> Vec<Vec<BigInt>> {
        let mut out = vec![vec![BigInt::zero(); self.cols]; self.rows];
        for (&(i, j), v) in &self.entries {
            out[i][j] = v.clone();
        }
        out
    }

    pub fn mul_vec(&self, x: &[BigInt]) -> Vec<BigInt> {
        assert_eq!(x.len(), self.cols);
        let mut out = vec![BigInt::zero(); self.rows];
        for (&(i, j), v) in &self.entries {
            out[i] += v * &x[j];
        }
        out
    }

    pub fn mul(&self, rhs: &SparseIntMatrix) -> SparseIntMatrix {
        assert_eq!(self.cols, rhs.rows);
        let mut by_row: Vec<Vec<(usize, &BigInt)>> = vec![Vec::new(); rhs.rows];
        for (&(i, j), v) in &rhs.entries {
            by_row[i].push((j, v));
        }
        let mut out = SparseIntMatrix::new(self.rows, rhs.cols);
        for (&(i, k), a) in &self.entries {
            for &(j, b) in &by_row[k] {
                out.add_to(i, j, &(a * b));
            }
        }
        out
    }

    /// Writes one `row col value` line per stored entry, after a
    /// `rows cols` header.
    pub fn to_coordinate_text(&self) -> String {
        let mut s = format!("{} {}\n", self.rows, self.cols);
        for (&(i, j), v) in &self.entries {
            s.push_str(&format!("{i} {j} {v}\n"));
        }
        s
    }

    pub fn from_coordinate_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| invalid("empty matrix dump"))?;
        let dims: Vec<usize> = header
            .split_whitespace()
            .map(|t| {
                t.parse()
                    .map_err(|_| invalid(format!("bad header {header:?}")))
            })
            .collect::<Result<_>>()?;
        let [rows, cols] = dims[..] else {
            return Err(invalid(format!("bad header {header:?}")));
        };
        let mut m = Self::new(rows, cols);
        for line in lines {
            let parts: Vec<&str> = line.split_whitespace().collect();
            let bad = || invalid(format!("bad entry line {line:?}"));
            if parts.len() != 3 {
                return Err(bad());
            }
            let i: usize = parts[0].parse().map_err(|_| bad())?;
            let j: usize = parts[1].parse().map_err(|_| bad())?;
            let v: BigInt = parts[2].parse().map_err(|_| bad())?;
            if i >= rows || j >= cols {
                return Err(bad());
            }
            m.add_to(i, j, &v);
        }
        Ok(m)
    }
}

/// A finitely generated abelian group `Z^r ⊕ Z/d₁ ⊕ … ⊕ Z/d_k` with
/// `d₁ | d₂ | … | d_k` and every `dᵢ ≥ 2`.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct AbelianGroup {
    pub free_rank: usize,
    #[serde(with = "torsion_serde")]
    pub torsion: Vec<BigInt>,
}

mod torsion_serde {
    use num_bigint::BigInt;
    use serde::{de::Error, Deserialize, Deserializer, Serialize, Serializer};
    use serde_json::Value;

    // Written as decimal strings; plain JSON numbers are accepted on input.
    pub fn serialize<S: Serializer>(v: &[BigInt], s: S) -> Result<S::Ok, S::Error> {
        v.iter()
            .map(ToString::to_string)
            .collect::<Vec<_>>()
            .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<BigInt>, D::Error> {
        let vals = Vec::<Value>::deserialize(d)?;
        vals.into_iter()
            .map(|v| match v {
                Value::Number(n) => n.to_string().parse().map_err(D::Error::custom),
                Value::String(s) => s.parse().map_err(D::Error::custom),
                other => Err(D::Error::custom(format!("bad torsion entry {other}"))),
            })
            .collect()
    }
}

impl AbelianGroup {
    pub fn trivial() -> Self {
        Self::default()
    }

    pub fn free(rank: usize) -> Self {
        AbelianGroup {
            free_rank: rank,
            torsion: Vec::new(),
        }
    }

    /// Canonical form of `Z^r ⊕ ⨁ Z/dᵢ` for arbitrary nonzero `dᵢ`.
    pub fn from_orders<I: IntoIterator<Item = BigInt>>(free_rank: usize, orders: I) -> Self {
        AbelianGroup {
            free_rank,
            torsion: invariant_chain(orders.into_iter().map(|d| d.abs()).collect()),
        }
    }

    pub fn cyclic(d: impl Into<BigInt>) -> Self {
        let d = d.into();
        if d.is_zero() {
            Self::free(1)
        } else {
            Self::from_orders(0, [d])
        }
    }

    pub fn is_trivial(&self) -> bool {
        self.free_rank == 0 && self.torsion.is_empty()
    }

    pub fn torsion_order(&self) -> BigInt {
        self.torsion.iter().product()
    }

    pub fn direct_sum(&self, other: &AbelianGroup) -> AbelianGroup {
        Self::from_orders(
            self.free_rank + other.free_rank,
            self.torsion.iter().chain(&other.torsion).cloned(),
        )
    }

    /// Elementary divisors `p^e` of the `p`-primary torsion, ascending.
    pub fn p_primary(&self, p: u64) -> Vec<BigInt> {
        let p = BigInt::from(p);
        let mut out = Vec::new();
        for d in &self.torsion {
            let mut q = BigInt::one();
            let mut m = d.clone();
            while (&m % &p).is_zero() {
                m /= &p;
                q *= &p;
            }
            if !q.is_one() {
                out.push(q);
            }
        }
        out
    }

    /// Elementary divisors over all primes, sorted.
    pub fn elementary_divisors(&self) -> Vec<BigInt> {
        let mut out = Vec::new();
        for d in &self.torsion {
            let Some(mut m) = d.to_u64() else {
                out.push(d.clone());
                continue;
            };
            let mut p = 2u64;
            while p * p <= m {
                let mut q = 1u64;
                while m % p == 0 {
                    m /= p;
                    q *= p;
                }
                if q > 1 {
                    out.push(BigInt::from(q));
                }
                p += 1;
            }
            if m > 1 {
                out.push(BigInt::from(m));
            }
        }
        out.sort();
        out
    }
}

impl fmt::Display for AbelianGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        match self.free_rank {
            0 => {}
            1 => parts.push("Z".to_string()),
            r => parts.push(format!("Z^{r}")),
        }
        parts.extend(self.torsion.iter().map(|d| format!("Z/{d}")));
        if parts.is_empty() {
            f.write_str("0")
        } else {
            f.write_str(&parts.join(" + "))
        }
    }
}

/// Turns a list of cyclic orders into the invariant-factor chain.
fn invariant_chain(mut ds: Vec<BigInt>) -> Vec<BigInt> {
    ds.retain(|d| !d.is_one() && !d.is_zero());
    for i in 0..ds.len() {
        for j in i + 1..ds.len() {
            if !(&ds[j] % &ds[i]).is_zero() {
                let g = ds[i].gcd(&ds[j]);
                let l = &ds[i] / &g * &ds[j];
                ds[i] = g;
                ds[j] = l;
            }
        }
    }
    ds.retain(|d| !d.is_one());
    ds.sort();
    ds
}

/// Result of [`smith_normal_form`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Smith {
    /// Nonzero diagonal entries `d₁ | d₂ | …`, including the 1s.
    pub factors: Vec<BigInt>,
    pub rank: usize,
}

impl Smith {
    /// The factors larger than 1.
    pub fn torsion(&self) -> Vec<BigInt> {
        self.factors
            .iter()
            .filter(|d| !d.is_one())
            .cloned()
            .collect()
    }
}

/// Smith form with unimodular `U`, `V` such that `U · M · V = D`.
#[derive(Debug, Clone)]
pub struct SmithTransforms {
    pub smith: Smith,
    pub u: Vec<Vec<BigInt>>,
    pub v: Vec<Vec<BigInt>>,
    pub d: Vec<Vec<BigInt>>,
}

pub fn smith_normal_form(m: &SparseIntMatrix) -> Smith {
    let red = Reduction::run(m, None);
    let dense = red.dense_remainder(false);
    let mut smith = dense_smith(dense.a, false).smith;
    smith.rank += red.pivots.len();
    let mut factors = vec![BigInt::one(); red.pivots.len()];
    factors.extend(smith.factors);
    smith.factors = factors;
    smith
}

/// Dense Smith reduction with transforms; intended for small matrices.
pub fn smith_normal_form_with_transforms(m: &SparseIntMatrix) -> SmithTransforms {
    if m.rows() == 0 {
        let v = (0..m.cols())
            .map(|i| {
                (0..m.cols())
                    .map(|j| BigInt::from(u8::from(i == j)))
                    .collect()
            })
            .collect();
        return SmithTransforms {
            smith: Smith {
                factors: Vec::new(),
                rank: 0,
            },
            u: Vec::new(),
            v,
            d: Vec::new(),
        };
    }
    let out = dense_smith(m.to_dense(), true);
    SmithTransforms {
        smith: out.smith,
        u: out.u.expect("requested"),
        v: out.v.expect("requested"),
        d: out.a,
    }
}

pub fn rank(m: &SparseIntMatrix) -> usize {
    smith_normal_form(m).rank
}

/// Cokernel of the map whose rows are relations in a free module of rank
/// `m.cols()`.
pub fn cokernel_invariants(m: &SparseIntMatrix) -> AbelianGroup {
    let s = smith_normal_form(m);
    AbelianGroup::from_orders(m.cols() - s.rank, s.factors)
}

/// An integer vector `x` with `M · x = b`, if one exists.
pub fn solve_integer(m: &SparseIntMatrix, b: &[BigInt]) -> Option<Vec<BigInt>> {
    assert_eq!(b.len(), m.rows(), "right-hand side has the wrong length");
    let red = Reduction::run(m, Some(b));
    let dense = red.dense_remainder(true);
    let mut x = vec![BigInt::zero(); m.cols()];
    let sm = dense_smith(dense.a.clone(), true);
    let u = sm.u.as_ref().expect("requested");
    let v = sm.v.as_ref().expect("requested");
    let rhs = &dense.rhs;
    // D y = U rhs
    let ub: Vec<BigInt> = u
        .iter()
        .map(|row| row.iter().zip(rhs).map(|(a, c)| a * c).sum())
        .collect();
    let mut y = vec![BigInt::zero(); dense.cols.len()];
    for (i, val) in ub.iter().enumerate() {
        if i < sm.smith.rank {
            let d = &sm.a[i][i];
            if !(val % d).is_zero() {
                return None;
            }
            y[i] = val / d;
        } else if !val.is_zero() {
            return None;
        }
    }
    for (k, &c) in dense.cols.iter().enumerate() {
        x[c] = v[k].iter().zip(&y).map(|(a, b)| a * b).sum();
    }
    red.back_substitute(&mut x);
    Some(x)
}

/// A basis of the saturated lattice `{x : M · x = 0}`.
pub fn kernel_basis(m: &SparseIntMatrix) -> Vec<Vec<BigInt>> {
    let red = Reduction::run(m, None);
    let dense = red.dense_remainder(false);
    let pivot_cols: BTreeSet<usize> = red.pivots.iter().map(|p| p.col).collect();
    let dense_cols: BTreeSet<usize> = dense.cols.iter().copied().collect();
    let mut out = Vec::new();
    for c in 0..m.cols() {
        if !pivot_cols.contains(&c) && !dense_cols.contains(&c) {
            let mut x = vec![BigInt::zero(); m.cols()];
            x[c] = BigInt::one();
            red.back_substitute(&mut x);
            out.push(x);
        }
    }
    if !dense.cols.is_empty() {
        let sm = dense_smith(dense.a, true);
        let v = sm.v.expect("requested");
        for j in sm.smith.rank..dense.cols.len() {
            let mut x = vec![BigInt::zero(); m.cols()];
            for (k, &c) in dense.cols.iter().enumerate() {
                x[c] = v[k][j].clone();
            }
            red.back_substitute(&mut x);
            out.push(x);
        }
    }
    out
}

struct Pivot {
    col: usize,
    /// The pivot entry, `±1`.
    unit: BigInt,
    /// The pivot row as it stood when eliminated, pivot included.
    row: Vec<(usize, BigInt)>,
    rhs: BigInt,
}

/// Unit-pivot elimination by row operations, kept for back-substitution.
struct Reduction {
    pivots: Vec<Pivot>,
    rows: Vec<Option<BTreeMap<usize, BigInt>>>,
    rhs: Vec<BigInt>,
}

struct DenseRemainder {
    a: Vec<Vec<BigInt>>,
    rhs: Vec<BigInt>,
    cols: Vec<usize>,
}

impl Reduction {
    fn run(m: &SparseIntMatrix, b: Option<&[BigInt]>) -> Self {
        let mut rows: Vec<Option<BTreeMap<usize, BigInt>>> = vec![Some(BTreeMap::new()); m.rows()];
        let mut col_rows: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); m.cols()];
        for (i, j, v) in m.entries() {
            rows[i].as_mut().expect("fresh").insert(j, v.clone());
            col_rows[j].insert(i);
        }
        let mut rhs = b.map_or_else(|| vec![BigInt::zero(); m.rows()], <[BigInt]>::to_vec);
        let mut pivots = Vec::new();

        loop {
            let batch = choose_unit_pivots(&rows, &col_rows);
            if batch.is_empty() {
                break;
            }
            for (r, c) in batch {
                let prow = rows[r].take().expect("active");
                for &j in prow.keys() {
                    col_rows[j].remove(&r);
                }
                let unit = prow[&c].clone();
                let targets: Vec<usize> = col_rows[c].iter().copied().collect();
                for i in targets {
                    let row = rows[i].as_mut().expect("active");
                    let f = &row[&c] * &unit;
                    for (&j, v) in &prow {
                        let e = row.entry(j).or_insert_with(BigInt::zero);
                        let was_zero = e.is_zero();
                        *e -= &f * v;
                        if e.is_zero() {
                            row.remove(&j);
                            col_rows[j].remove(&i);
                        } else if was_zero {
                            col_rows[j].insert(i);
                        }
                    }
                    let delta = &f * &rhs[r];
                    rhs[i] -= delta;
                }
                pivots.push(Pivot {
                    col: c,
                    unit,
                    row: prow.into_iter().collect(),
                    rhs: rhs[r].clone(),
                });
            }
        }
        Reduction { pivots, rows, rhs }
    }

    /// The surviving rows restricted to their nonzero columns. Rows that
    /// became empty keep their right-hand side so that inconsistency is seen.
    fn dense_remainder(&self, keep_empty_rows: bool) -> DenseRemainder {
        let mut cols = BTreeSet::new();
        let mut live = Vec::new();
        for (i, r) in self.rows.iter().enumerate() {
            if let Some(r) = r {
                if !r.is_empty() || (keep_empty_rows && !self.rhs[i].is_zero()) {
                    live.push(i);
                    cols.extend(r.keys().copied());
                }
            }
        }
        let cols: Vec<usize> = cols.into_iter().collect();
        let index: BTreeMap<usize, usize> = cols.iter().enumerate().map(|(k, &c)| (c, k)).collect();
        let mut a = vec![vec![BigInt::zero(); cols.len()]; live.len()];
        for (k, &i) in live.iter().enumerate() {
            for (c, v) in self.rows[i].as_ref().expect("live") {
                a[k][index[c]] = v.clone();
            }
        }
        let rhs = live.iter().map(|&i| self.rhs[i].clone()).collect();
        DenseRemainder { a, rhs, cols }
    }

    /// Fills the pivot coordinates of `x` so that every eliminated row holds.
    fn back_substitute(&self, x: &mut [BigInt]) {
        for p in self.pivots.iter().rev() {
            let mut acc = p.rhs.clone();
            for (j, v) in &p.row {
                if *j != p.col {
                    acc -= v * &x[*j];
                }
            }
            x[p.col] = acc * &p.unit;
        }
    }
}

/// Unit pivots of low Markowitz cost `(row nnz - 1)(col nnz - 1)` that can
/// be applied one after another: no chosen row is touched by the
/// elimination of an earlier one.
fn choose_unit_pivots(
    rows: &[Option<BTreeMap<usize, BigInt>>],
    col_rows: &[BTreeSet<usize>],
) -> Vec<(usize, usize)> {
    let mut cands: Vec<(usize, usize, usize)> = Vec::new();
    for (i, r) in rows.iter().enumerate() {
        let Some(r) = r else { continue };
        let rl = r.len().saturating_sub(1);
        let best = r
            .iter()
            .filter(|(_, v)| v.abs().is_one())
            .map(|(&j, _)| (rl * (col_rows[j].len() - 1), j))
            .min();
        if let Some((cost, j)) = best {
            cands.push((cost, i, j));
        }
    }
    cands.sort_unstable();
    let Some(&(min_cost, _, _)) = cands.first() else {
        return Vec::new();
    };
    let bound = min_cost.saturating_mul(4).saturating_add(16);
    let mut dirty = BTreeSet::new();
    let mut used_cols = BTreeSet::new();
    let mut out = Vec::new();
    for (cost, i, j) in cands {
        if cost > bound {
            break;
        }
        if dirty.contains(&i) || used_cols.contains(&j) {
            continue;
        }
        dirty.extend(col_rows[j].iter().copied());
        used_cols.insert(j);
        out.push((i, j));
    }
    out
}

struct DenseSmith {
    smith: Smith,
    a: Vec<Vec<BigInt>>,
    u: Option<Vec<Vec<BigInt>>>,
    v: Option<Vec<Vec<BigInt>>>,
}

fn identity(k: usize) -> Vec<Vec<BigInt>> {
    (0..k)
        .map(|i| {
            (0..k)
                .map(|j| {
                    if i == j {
                        BigInt::one()
                    } else {
                        BigInt::zero()
                    }
                })
                .collect()
        })
        .collect()
}

/// Row `dst -= q * row src` on `a` (and on `u` when tracked).
fn row_axpy(a: &mut [Vec<BigInt>], dst: usize, src: usize, q: &BigInt) {
    let (s, d) = if src < dst {
        let (lo, hi) = a.split_at_mut(dst);
        (&lo[src], &mut hi[0])
    } else {
        let (lo, hi) = a.split_at_mut(src);
        (&hi[0], &mut lo[dst])
    };
    for (x, y) in d.iter_mut().zip(s) {
        if !y.is_zero() {
            *x -= q * y;
        }
    }
}

fn col_axpy(a: &mut [Vec<BigInt>], dst: usize, src: usize, q: &BigInt) {
    for row in a.iter_mut() {
        if !row[src].is_zero() {
            let t = q * &row[src];
            row[dst] -= t;
        }
    }
}

fn col_swap(a: &mut [Vec<BigInt>], i: usize, j: usize) {
    for row in a.iter_mut() {
        row.swap(i, j);
    }
}

fn dense_smith(mut a: Vec<Vec<BigInt>>, track: bool) -> DenseSmith {
    let m = a.len();
    let n = a.first().map_or(0, Vec::len);
    let mut u = track.then(|| identity(m));
    let mut v = track.then(|| identity(n));
    let mut t = 0;
    while t < m.min(n) {
        // smallest nonzero entry of the trailing block
        let mut best: Option<(usize, usize)> = None;
        for (i, row) in a.iter().enumerate().skip(t) {
            for (j, x) in row.iter().enumerate().skip(t) {
                if !x.is_zero() && best.is_none_or(|(bi, bj)| x.abs() < a[bi][bj].abs()) {
                    best = Some((i, j));
                }
            }
        }
        let Some((pi, pj)) = best else { break };
        a.swap(t, pi);
        if let Some(u) = u.as_mut() {
            u.swap(t, pi);
        }
        col_swap(&mut a, t, pj);
        if let Some(v) = v.as_mut() {
            col_swap(v, t, pj);
        }
        loop {
            let p = a[t][t].clone();
            let mut clean = true;
            for i in t + 1..m {
                if a[i][t].is_zero() {
                    continue;
                }
                let q = a[i][t].div_floor(&p);
                row_axpy(&mut a, i, t, &q);
                if let Some(u) = u.as_mut() {
                    row_axpy(u, i, t, &q);
                }
                clean &= a[i][t].is_zero();
            }
            for j in t + 1..n {
                if a[t][j].is_zero() {
                    continue;
                }
                let q = a[t][j].div_floor(&p);
                col_axpy(&mut a, j, t, &q);
                if let Some(v) = v.as_mut() {
                    col_axpy(v, j, t, &q);
                }
                clean &= a[t][j].is_zero();
            }
            if clean {
                // the pivot must divide the whole trailing block
                let bad = (t + 1..m).find(|&i| a[i][t + 1..].iter().any(|x| !(x % &p).is_zero()));
                match bad {
                    None => break,
                    Some(i) => {
                        let one = -BigInt::one();
                        row_axpy(&mut a, t, i, &one);
                        if let Some(u) = u.as_mut() {
                            row_axpy(u, t, i, &one);
                        }
                        continue;
                    }
                }
            }
            // move the smallest entry of row t / column t to the pivot
            let mut bi = (t, t);
            for i in t + 1..m {
                if !a[i][t].is_zero() && a[i][t].abs() < a[bi.0][bi.1].abs() {
                    bi = (i, t);
                }
            }
            for j in t + 1..n {
                if !a[t][j].is_zero() && a[t][j].abs() < a[bi.0][bi.1].abs() {
                    bi = (t, j);
                }
            }
            if bi.0 != t {
                a.swap(t, bi.0);
                if let Some(u) = u.as_mut() {
                    u.swap(t, bi.0);
                }
            } else if bi.1 != t {
                col_swap(&mut a, t, bi.1);
                if let Some(v) = v.as_mut() {
                    col_swap(v, t, bi.1);
                }
            }
        }
        if a[t][t].is_negative() {
            for x in a[t].iter_mut() {
                *x = -&*x;
            }
            if let Some(u) = u.as_mut() {
                for x in u[t].iter_mut() {
                    *x = -&*x;
                }
            }
        }
        t += 1;
    }
    let factors: Vec<BigInt> = (0..t).map(|i| a[i][i].clone()).collect();
    DenseSmith {
        smith: Smith {
            rank: factors.len(),
            factors,
        },
        a,
        u,
        v,
    }
}

/// A sublattice of `Z^N` kept in row echelon form, grown one vector at a
/// time.
#[derive(Debug, Clone, Default)]
pub struct RowLattice {
    /// Keyed by pivot column; each pivot entry is positive.
    rows: BTreeMap<usize, BTreeMap<usize, BigInt>>,
}

impl RowLattice {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> impl Iterator<Item = &BTreeMap<usize, BigInt>> {
        self.rows.values()
    }

    pub fn contains(&self, v: &BTreeMap<usize, BigInt>) -> bool {
        let mut v = v.clone();
        v.retain(|_, x| !x.is_zero());
        while let Some((&c, x)) = v.iter().next() {
            let Some(row) = self.rows.get(&c) else {
                return false;
            };
            let (q, r) = x.div_rem(&row[&c]);
            if !r.is_zero() {
                return false;
            }
            sub_scaled(&mut v, row, &q);
        }
        true
    }

    /// Adds `v` to the generating set. Returns `false` when `v` was already
    /// in the lattice.
    pub fn insert(&mut self, v: &BTreeMap<usize, BigInt>) -> bool {
        if self.contains(v) {
            return false;
        }
        let mut v = v.clone();
        v.retain(|_, x| !x.is_zero());
        while let Some((&c, x)) = v.iter().next() {
            let x = x.clone();
            let Some(row) = self.rows.get_mut(&c) else {
                if x.is_negative() {
                    for y in v.values_mut() {
                        *y = -&*y;
                    }
                }
                self.rows.insert(c, v);
                return true;
            };
            let a = row[&c].clone();
            let (q, r) = x.div_rem(&a);
            if r.is_zero() {
                sub_scaled(&mut v, row, &q);
                continue;
            }
            let eg = a.extended_gcd(&x);
            let (g, s, t) = (eg.gcd, eg.x, eg.y);
            // [row; v] <- [[s, t], [-x/g, a/g]] [row; v]
            let mut new_row = BTreeMap::new();
            let mut new_v = BTreeMap::new();
            let keys: BTreeSet<usize> = row.keys().chain(v.keys()).copied().collect();
            let (xg, ag) = (&x / &g, &a / &g);
            for k in keys {
                let rk = row.get(&k).cloned().unwrap_or_default();
                let vk = v.get(&k).cloned().unwrap_or_default();
                let nr = &s * &rk + &t * &vk;
                let nv = &ag * &vk - &xg * &rk;
                if !nr.is_zero() {
                    new_row.insert(k, nr);
                }
                if !nv.is_zero() {
                    new_v.insert(k, nv);
                }
            }
            if new_row[&c].is_negative() {
                for y in new_row.values_mut() {
                    *y = -&*y;
                }
            }
            *row = new_row;
            v = new_v;
        }
        true
    }
}

fn sub_scaled(v: &mut BTreeMap<usize, BigInt>, row: &BTreeMap<usize, BigInt>, q: &BigInt) {
    for (k, r) in row {
        let e = v.entry(*k).or_insert_with(BigInt::zero);
        *e -= q * r;
        if e.is_zero() {
            v.remove(k);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn bi(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    fn mat(rows: &[&[i64]]) -> SparseIntMatrix {
        SparseIntMatrix::from_dense(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>())
    }

    #[test]
    fn smith_examples() {
        let s = smith_normal_form(&mat(&[&[2, 4], &[6, 8]]));
        assert_eq!(s.factors, bi(&[2, 4]));
        assert_eq!(
            smith_normal_form(&SparseIntMatrix::identity(4)).factors,
            bi(&[1, 1, 1, 1])
        );
        let z = smith_normal_form(&SparseIntMatrix::new(3, 2));
        assert!(z.factors.is_empty());
        assert_eq!(z.rank, 0);
    }

    #[test]
    fn cokernel_examples() {
        assert_eq!(cokernel_invariants(&mat(&[&[2]])), AbelianGroup::cyclic(2));
        let g = cokernel_invariants(&mat(&[&[2, 0], &[0, 3]]));
        assert_eq!(
            g,
            AbelianGroup {
                free_rank: 0,
                torsion: bi(&[6])
            }
        );
        assert_eq!(
            cokernel_invariants(&SparseIntMatrix::new(0, 3)),
            AbelianGroup::free(3)
        );
    }

    #[test]
    fn solve_examples() {
        assert_eq!(solve_integer(&mat(&[&[2]]), &bi(&[4])), Some(bi(&[2])));
        assert_eq!(solve_integer(&mat(&[&[2]]), &bi(&[3])), None);
        assert_eq!(
            solve_integer(&mat(&[&[1, 1], &[0, 2]]), &bi(&[0, 2])),
            Some(bi(&[-1, 1]))
        );
        // inconsistent after elimination
        assert_eq!(solve_integer(&mat(&[&[1, 1], &[1, 1]]), &bi(&[0, 1])), None);
    }

    #[test]
    fn kernel_examples() {
        assert_eq!(kernel_basis(&mat(&[&[0]])), vec![bi(&[1])]);
        let k = kernel_basis(&mat(&[&[1, -1]]));
        assert_eq!(k.len(), 1);
        assert!(k[0] == bi(&[1, 1]) || k[0] == bi(&[-1, -1]));
        let k = kernel_basis(&mat(&[&[2, -2]]));
        assert!(k[0] == bi(&[1, 1]) || k[0] == bi(&[-1, -1]));
    }

    #[test]
    fn abelian_group_canonical() {
        let g = AbelianGroup::from_orders(1, bi(&[2, 3, 4, 1]));
        assert_eq!(g.torsion, bi(&[2, 12]));
        assert_eq!(g.to_string(), "Z + Z/2 + Z/12");
        assert_eq!(g.p_primary(2), bi(&[2, 4]));
        assert_eq!(g.elementary_divisors(), bi(&[2, 3, 4]));
        assert_eq!(AbelianGroup::trivial().to_string(), "0");
        let js = serde_json::to_string(&g).unwrap();
        assert_eq!(js, r#"{"free_rank":1,"torsion":["2","12"]}"#);
        let plain: AbelianGroup =
            serde_json::from_str(r#"{"free_rank":1,"torsion":[2,12]}"#).unwrap();
        assert_eq!(plain, g);
        assert_eq!(serde_json::from_str::<AbelianGroup>(&js).unwrap(), g);
    }

    #[test]
    fn coordinate_roundtrip() {
        let m = mat(&[&[2, 0, -3], &[0, 0, 7]]);
        let text = m.to_coordinate_text();
        assert_eq!(SparseIntMatrix::from_coordinate_text(&text).unwrap(), m);
        assert!(SparseIntMatrix::from_coordinate_text("2 2\n5 0 1\n").is_err());
    }

    #[test]
    fn lattice_membership() {
        let v = |xs: &[i64]| -> BTreeMap<usize, BigInt> {
            xs.iter()
                .enumerate()
                .filter(|(_, x)| **x != 0)
                .map(|(i, &x)| (i, BigInt::from(x)))
                .collect()
        };
        let mut l = RowLattice::new();
        assert!(l.insert(&v(&[4, 6])));
        assert!(!l.insert(&v(&[8, 12])));
        assert!(l.insert(&v(&[6, 9])));
        // lattice now spanned by (4,6),(6,9) = (2,3)Z
        assert!(l.contains(&v(&[2, 3])));
        assert!(!l.contains(&v(&[1, 0])));
        assert_eq!(l.rank(), 1);
        assert!(l.insert(&v(&[0, 5])));
        assert!(l.contains(&v(&[2, 8])));
        assert!(!l.contains(&v(&[1, 8])));
        assert!(v(&[]).is_empty() && l.contains(&v(&[])));
    }

    // --- brute-force oracles ---

    fn det(m: &[Vec<BigInt>]) -> BigInt {
        let k = m.len();
        if k == 0 {
            return BigInt::one();
        }
        let mut out = BigInt::zero();
        for j in 0..k {
            let minor: Vec<Vec<BigInt>> = m[1..]
                .iter()
                .map(|r| {
                    r.iter()
                        .enumerate()
                        .filter(|(c, _)| *c != j)
                        .map(|(_, x)| x.clone())
                        .collect()
                })
                .collect();
            let term = &m[0][j] * det(&minor);
            if j % 2 == 0 {
                out += term;
            } else {
                out -= term;
            }
        }
        out
    }

    fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
        if k == 0 {
            return vec![vec![]];
        }
        if n < k {
            return vec![];
        }
        let mut out = combinations(n - 1, k);
        for mut c in combinations(n - 1, k - 1) {
            c.push(n - 1);
            out.push(c);
        }
        out
    }

    /// gcd of all k×k minors.
    fn minor_gcd(m: &[Vec<BigInt>], k: usize) -> BigInt {
        let rows = m.len();
        let cols = m.first().map_or(0, Vec::len);
        let mut g = BigInt::zero();
        for rs in combinations(rows, k) {
            for cs in combinations(cols, k) {
                let sub: Vec<Vec<BigInt>> = rs
                    .iter()
                    .map(|&i| cs.iter().map(|&j| m[i][j].clone()).collect())
                    .collect();
                g = g.gcd(&det(&sub));
            }
        }
        g
    }

    fn matmul(a: &[Vec<BigInt>], b: &[Vec<BigInt>]) -> Vec<Vec<BigInt>> {
        let inner = b.len();
        let cols = b.first().map_or(0, Vec::len);
        a.iter()
            .map(|r| {
                (0..cols)
                    .map(|j| (0..inner).map(|k| &r[k] * &b[k][j]).sum())
                    .collect()
            })
            .collect()
    }

    fn arb_matrix(max: usize) -> impl Strategy<Value = Vec<Vec<i64>>> {
        (1..=max, 1..=max).prop_flat_map(|(r, c)| {
            proptest::collection::vec(
                proptest::collection::vec(
                    prop_oneof![3 => Just(0i64), 2 => -1i64..=1, 2 => -9i64..=9],
                    c,
                ),
                r,
            )
        })
    }

    proptest! {
        #[test]
        fn smith_matches_minor_gcds(rows in arb_matrix(4)) {
            let m = SparseIntMatrix::from_dense(&rows);
            let s = smith_normal_form(&m);
            let dense = m.to_dense();
            // d₁⋯d_k = gcd of k×k minors
            let mut prod = BigInt::one();
            for k in 1..=s.rank {
                prod *= &s.factors[k - 1];
                prop_assert_eq!(&prod, &minor_gcd(&dense, k));
            }
            prop_assert!(minor_gcd(&dense, s.rank + 1).is_zero() || s.rank == rows.len().min(rows[0].len()));
            for w in s.factors.windows(2) {
                prop_assert!((&w[1] % &w[0]).is_zero());
            }
        }

        #[test]
        fn transforms_are_unimodular(rows in arb_matrix(5)) {
            let m = SparseIntMatrix::from_dense(&rows);
            let t = smith_normal_form_with_transforms(&m);
            prop_assert!(det(&t.u).abs().is_one());
            prop_assert!(det(&t.v).abs().is_one());
            prop_assert_eq!(matmul(&matmul(&t.u, &m.to_dense()), &t.v), t.d.clone());
            prop_assert_eq!(&t.smith.factors, &smith_normal_form(&m).factors);
            for (i, row) in t.d.iter().enumerate() {
                for (j, x) in row.iter().enumerate() {
                    prop_assert!(i == j || x.is_zero());
                }
            }
        }

        #[test]
        fn cokernel_permutation_invariant(rows in arb_matrix(5), seed in 0usize..100) {
            let m = SparseIntMatrix::from_dense(&rows);
            let g = cokernel_invariants(&m);
            let mut shuffled = rows.clone();
            shuffled.rotate_left(seed % rows.len());
            for r in shuffled.iter_mut() {
                let k = r.len();
                r.rotate_right(seed % k);
            }
            shuffled.push(vec![0; rows[0].len()]);
            prop_assert_eq!(cokernel_invariants(&SparseIntMatrix::from_dense(&shuffled)), g);
        }

        #[test]
        fn solve_finds_preimages(rows in arb_matrix(6), xs in proptest::collection::vec(-4i64..5, 6)) {
            let m = SparseIntMatrix::from_dense(&rows);
            let x: Vec<BigInt> = xs[..m.cols()].iter().map(|&v| BigInt::from(v)).collect();
            let b = m.mul_vec(&x);
            let sol = solve_integer(&m, &b).expect("b lies in the image");
            prop_assert_eq!(m.mul_vec(&sol), b);
        }

        #[test]
        fn kernel_is_saturated(rows in arb_matrix(6)) {
            let m = SparseIntMatrix::from_dense(&rows);
            let k = kernel_basis(&m);
            prop_assert_eq!(k.len(), m.cols() - rank(&m));
            for v in &k {
                prop_assert!(m.mul_vec(v).iter().all(Zero::is_zero));
            }
            if !k.is_empty() {
                let km = SparseIntMatrix::from_dense(&k);
                let s = smith_normal_form(&km);
                prop_assert_eq!(s.rank, k.len());
                prop_assert!(s.factors.iter().all(One::is_one));
            }
        }

        #[test]
        fn lattice_agrees_with_solver(rows in arb_matrix(5), probe in proptest::collection::vec(-6i64..7, 5)) {
            let m = SparseIntMatrix::from_dense(&rows);
            let mut l = RowLattice::new();
            for r in &rows {
                l.insert(&r.iter().enumerate().filter(|(_, x)| **x != 0).map(|(i, &x)| (i, BigInt::from(x))).collect());
            }
            prop_assert_eq!(l.rank(), rank(&m));
            let b: Vec<BigInt> = probe[..m.cols()].iter().map(|&v| BigInt::from(v)).collect();
            let member = solve_integer(&m.transpose(), &b).is_some();
            let bm: BTreeMap<usize, BigInt> = b.iter().cloned().enumerate().filter(|(_, x)| !x.is_zero()).collect();
            prop_assert_eq!(l.contains(&bm), member);
        }
    }
}
