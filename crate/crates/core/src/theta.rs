//! The connecting map `θ: H*(U(n)) → H*(PU(n))` on the basis `ξ_I`.
//!
//! [`theta`] evaluates the recursion on the largest index of `I`;
//! [`theta_closed`] sums the closed formula over admissible sequences for
//! index sets inside a single prime-power chain `{1, p, …, p^r}`.

use std::collections::HashMap;
use std::sync::{OnceLock, RwLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::arithmetic::{binomial, c_with, factorize, split_tail_sign};
use crate::error::{invalid, Error, Result};
use crate::gradedalg::{ExtElem, PresElem};
use crate::indexcalc::{merge_sign, MultiIndex, PSequence};

/// `θ(ξ_{2k-1}) = C(n,k) ω^{k-1}`.
pub fn theta_single(n: u64, k: u32) -> Result<PresElem> {
    if k < 1 || u64::from(k) > n {
        return Err(invalid(format!("theta_single: k = {k} outside 1..={n}")));
    }
    Ok(PresElem::monomial(
        binomial(n, i64::from(k)),
        k - 1,
        MultiIndex::empty(),
    ))
}

type Memo = RwLock<HashMap<(u64, MultiIndex), PresElem>>;

fn memo() -> &'static Memo {
    static MEMO: OnceLock<Memo> = OnceLock::new();
    MEMO.get_or_init(Default::default)
}

/// `θ(ξ_I)` for a nonempty `I ⊆ {1, …, n}`.
pub fn theta(n: u64, idx: &MultiIndex) -> Result<PresElem> {
    if n < 2 {
        return Err(invalid(format!("n = {n} must be at least 2")));
    }
    match idx.max() {
        None => return Err(invalid("theta of the empty index set")),
        Some(m) if u64::from(m) > n => {
            return Err(invalid(format!("index {m} exceeds n = {n}")));
        }
        _ => {}
    }
    let f = factorize(n)?;
    theta_rec(n, &f, idx)
}

fn theta_rec(
    n: u64,
    f: &crate::arithmetic::PrimeFactorization,
    idx: &MultiIndex,
) -> Result<PresElem> {
    let key = (n, idx.clone());
    if let Some(v) = memo().read().expect("theta memo poisoned").get(&key) {
        return Ok(v.clone());
    }
    let elems = idx.as_slice();
    let value = if elems.len() == 1 {
        theta_single(n, elems[0])?
    } else {
        let top = *elems.last().expect("nonempty");
        let rest = idx.truncate()?;
        let lower = theta_rec(n, f, &rest)?;
        let rho_top = PresElem::rho(top);
        let c = c_with(f, u64::from(top));
        if c == 1 {
            -&(&lower * &rho_top)
        } else {
            let p = c;
            let inv_p = BigRational::new(BigInt::one(), BigInt::from(p));
            let first = (&lower * &rho_top).scale(&-inv_p.clone());
            let base = top / p as u32;
            let mut s = 0;
            let mut m = top;
            while m > 1 {
                m /= p as u32;
                s += 1;
            }
            let second = match merge_sign(rest.as_slice(), &[base]) {
                None => PresElem::zero(),
                Some((merged, sign)) => {
                    let t = theta_rec(n, f, &MultiIndex::from_sorted(merged))?;
                    let coeff =
                        inv_p * BigInt::from(i64::from(sign) * i64::from(split_tail_sign(p, s)));
                    t.shift_omega(top - base).scale(&coeff)
                }
            };
            &first + &second
        }
    }
    .assert_integral()?;
    memo()
        .write()
        .expect("theta memo poisoned")
        .insert(key, value.clone());
    Ok(value)
}

/// `θ` extended linearly to an element of `H*(U(n))`. The empty index set
/// (the unit) maps to zero.
pub fn theta_ext(n: u64, x: &ExtElem) -> Result<PresElem> {
    let mut out = PresElem::zero();
    for (idx, c) in x.terms() {
        if !idx.is_empty() {
            out = &out + &theta(n, idx)?.scale_int(c);
        }
    }
    Ok(out)
}

/// Which power of `p` weights the terms of the closed formula.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ExponentConvention {
    /// `p^{r - i₁ - (k-1) - ε_I(J)}`, the exponent obtained by unrolling the
    /// recursion.
    #[default]
    Corrected,
    /// `p^{r - i₁ - ε_I(J)}`. Disagrees with the recursion by `p^{k-1}`;
    /// kept for comparison only.
    Printed,
}

fn check_chain(n: u64, idx: &PSequence) -> Result<()> {
    let f = factorize(n)?;
    if f.exponent_of(idx.p()) != idx.r() {
        return Err(invalid(format!(
            "{}^{} is not the exact power of {} dividing n = {n}",
            idx.p(),
            idx.r(),
            idx.p()
        )));
    }
    if idx.len() < 2 {
        return Err(invalid("closed formula needs at least two indices"));
    }
    Ok(())
}

/// `Σ_{J ∈ S(I)} p^{e(J)} ω^{κ_I(J)} ρ_J`, every coefficient positive.
pub(crate) fn closed_sum(n: u64, idx: &PSequence, conv: ExponentConvention) -> Result<PresElem> {
    check_chain(n, idx)?;
    let p = idx.p();
    let k = idx.len() as i64;
    let i1 = i64::from(idx.exponents()[0]);
    let r = i64::from(idx.r());
    let mut out = PresElem::zero();
    for j in idx.admissible()? {
        let eps = i64::from(idx.epsilon(&j)?);
        let e = match conv {
            ExponentConvention::Corrected => r - i1 - (k - 1) - eps,
            ExponentConvention::Printed => r - i1 - eps,
        };
        if e < 0 {
            return Err(Error::InternalInconsistency(format!(
                "negative exponent {e} for J = {:?} in I = {:?}",
                j.exponents(),
                idx.exponents()
            )));
        }
        let kappa =
            u32::try_from(idx.kappa(&j)?).map_err(|_| invalid("omega exponent overflow"))?;
        let coeff = BigInt::from(p).pow(e as u32);
        out = &out + &PresElem::monomial(coeff, kappa, j.to_multi_index());
    }
    Ok(out)
}

/// The unit `u = C(n, p^{i₁}) / p^{r - i₁}`, prime to `p`.
pub fn closed_unit(n: u64, idx: &PSequence) -> Result<BigInt> {
    check_chain(n, idx)?;
    let p = BigInt::from(idx.p());
    let i1 = idx.exponents()[0];
    let num = binomial(
        n,
        p.pow(i1)
            .try_into()
            .map_err(|_| invalid("index overflow"))?,
    );
    let den = p.pow(idx.r() - i1);
    let (u, rem) = num.div_rem(&den);
    if !rem.is_zero() || (&u % &p).is_zero() {
        return Err(Error::InternalInconsistency(format!(
            "C({n}, {}) is not exactly divisible by {den}",
            p.pow(i1)
        )));
    }
    Ok(u)
}

/// `θ(ξ_I)` for `I ⊆ {1, p, …, p^r}` with `|I| ≥ 2`, by the closed formula
/// `(-1)^{k-1} u Σ_J p^{e(J)} ω^{κ_I(J)} ρ_J`.
pub fn theta_closed(n: u64, idx: &PSequence, conv: ExponentConvention) -> Result<PresElem> {
    let sum = closed_sum(n, idx, conv)?;
    let mut u = closed_unit(n, idx)?;
    if idx.len().is_multiple_of(2) {
        u = -u;
    }
    Ok(sum.scale_int(&u))
}

/// One prime's share of a [`PrimeSplit`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitPart {
    pub p: u64,
    /// `I_i`, or `{1} ∪ I_i` for the `ξ₁` variant.
    pub index: PSequence,
    /// `b_I(i)`: the product of `p_l^{|I_l|}` over the other primes.
    pub b: BigInt,
    /// Bézout coefficient with `Σ q_i b_i = 1`.
    pub q: BigInt,
    /// `a_i = ±q_i ρ_{J_i}` where `J_i` is the complement of `I_i` in `I`.
    pub coeff: PresElem,
}

/// `θ(ξ_I) = remainder + Σ a_i θ(ξ_{I_i})`, the splitting of `I` along the
/// prime factors of `n`. The identity holds in `H*(PU(n))`, i.e. modulo the
/// defining ideal, not as a formal identity of polynomials.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrimeSplit {
    pub index: MultiIndex,
    pub with_one: bool,
    /// Elements of `I` not of the form `p^s` with `p^s | n`.
    pub unsplit: MultiIndex,
    pub parts: Vec<SplitPart>,
    /// Nonzero only for the `ξ₁` variant when every `I_i` is empty, where it
    /// is `±n ρ_I`.
    pub remainder: PresElem,
}

impl PrimeSplit {
    /// `remainder + Σ a_i θ(ξ_{I_i})`.
    pub fn recombine(&self, n: u64) -> Result<PresElem> {
        let mut out = self.remainder.clone();
        for part in &self.parts {
            let t = theta(n, &part.index.to_multi_index())?;
            out = &out + &(&part.coeff * &t);
        }
        Ok(out)
    }

    /// The left-hand side `θ(ξ_I)` or `θ(ξ₁ ξ_I)`.
    pub fn lhs(&self, n: u64) -> Result<PresElem> {
        if self.with_one {
            let mut with_one = vec![1];
            with_one.extend(self.index.iter());
            theta(n, &MultiIndex::from_sorted(with_one))
        } else {
            theta(n, &self.index)
        }
    }
}

/// Splits `I ⊆ {2, …, n}` into `I₀ ⊔ I₁ ⊔ … ⊔ I_t` with
/// `I_i = I ∩ {p_i, …, p_i^{r_i}}` and expresses `θ(ξ_I)` (or `θ(ξ₁ ξ_I)`
/// when `with_one`) through the `θ(ξ_{I_i})`.
pub fn split_by_primes(n: u64, idx: &MultiIndex, with_one: bool) -> Result<PrimeSplit> {
    if idx.is_empty() || idx.as_slice()[0] < 2 || u64::from(idx.max().unwrap_or(0)) > n {
        return Err(invalid(format!(
            "split_by_primes needs a nonempty subset of 2..={n}, got {{{idx}}}"
        )));
    }
    let f = factorize(n)?;
    let mut buckets: Vec<(u64, u32, Vec<u32>)> = f
        .factors()
        .iter()
        .map(|&(p, r)| (p, r, Vec::new()))
        .collect();
    let mut unsplit = Vec::new();
    for k in idx.iter() {
        let c = c_with(&f, u64::from(k));
        match buckets.iter_mut().find(|(p, _, _)| *p == c) {
            Some((_, _, v)) if c > 1 => v.push(k),
            _ => unsplit.push(k),
        }
    }
    buckets.retain(|(_, _, v)| !v.is_empty());
    let unsplit = MultiIndex::from_sorted(unsplit);

    if buckets.is_empty() {
        let remainder = if with_one {
            let sign = if idx.len() % 2 == 1 {
                -BigInt::one()
            } else {
                BigInt::one()
            };
            PresElem::monomial(sign * BigInt::from(n), 0, idx.clone())
        } else {
            PresElem::zero()
        };
        return Ok(PrimeSplit {
            index: idx.clone(),
            with_one,
            unsplit,
            parts: Vec::new(),
            remainder,
        });
    }

    let bs: Vec<BigInt> = (0..buckets.len())
        .map(|i| {
            buckets
                .iter()
                .enumerate()
                .filter(|(l, _)| *l != i)
                .map(|(_, (p, _, v))| BigInt::from(*p).pow(v.len() as u32))
                .product()
        })
        .collect();
    let qs = bezout(&bs);

    let mut parts = Vec::new();
    for (i, (p, r, part)) in buckets.iter().enumerate() {
        let complement = idx.filter(|k| !part.contains(&k));
        let (merged, s) = merge_sign(complement.as_slice(), part).expect("disjoint");
        debug_assert_eq!(merged, idx.as_slice());
        let mut sign = i64::from(s);
        if with_one && complement.len() % 2 == 1 {
            sign = -sign;
        }
        let coeff = PresElem::monomial(&qs[i] * BigInt::from(sign), 0, complement);
        let mut members = part.clone();
        if with_one {
            members.insert(0, 1);
        }
        let index = PSequence::from_multi_index(*p, *r, &MultiIndex::from_sorted(members))?;
        parts.push(SplitPart {
            p: *p,
            index,
            b: bs[i].clone(),
            q: qs[i].clone(),
            coeff,
        });
    }
    Ok(PrimeSplit {
        index: idx.clone(),
        with_one,
        unsplit,
        parts,
        remainder: PresElem::zero(),
    })
}

/// Integers `q_i` with `Σ q_i b_i = gcd(b)`.
fn bezout(bs: &[BigInt]) -> Vec<BigInt> {
    let mut qs = vec![BigInt::zero(); bs.len()];
    let mut g = BigInt::zero();
    for (i, b) in bs.iter().enumerate() {
        if i == 0 {
            g = b.clone();
            qs[0] = BigInt::one();
            continue;
        }
        let eg = g.extended_gcd(b);
        for q in qs.iter_mut().take(i) {
            *q *= &eg.x;
        }
        qs[i] = eg.y;
        g = eg.gcd;
    }
    qs
}
