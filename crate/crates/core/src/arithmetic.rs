//! Integer arithmetic around binomial coefficients: prime factorization,
//! p-adic valuations, the gcd chain `b(n, r)`, the multiplier `c(n, k)` and
//! the Newton-identity expansions of `C(n, r)`.
//!
//! Everything that can grow is computed with [`BigInt`]; word-sized integers
//! are only used for `n` itself and for exponents.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{invalid, Error, Result};

/// Largest `n` accepted by [`factorize`]; trial division is adequate below it.
pub const MAX_FACTOR_INPUT: u64 = 1_000_000_000_000;

/// `n = p₁^r₁ ⋯ p_t^r_t` with the primes strictly increasing.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PrimeFactorization {
    factors: Vec<(u64, u32)>,
}

impl PrimeFactorization {
    pub fn factors(&self) -> &[(u64, u32)] {
        &self.factors
    }

    pub fn primes(&self) -> impl Iterator<Item = u64> + '_ {
        self.factors.iter().map(|&(p, _)| p)
    }

    /// Exponent of `p` in `n` (zero when `p` does not divide `n`).
    pub fn exponent_of(&self, p: u64) -> u32 {
        self.factors
            .iter()
            .find(|&&(q, _)| q == p)
            .map_or(0, |&(_, r)| r)
    }

    pub fn value(&self) -> u64 {
        self.factors.iter().map(|&(p, r)| p.pow(r)).product()
    }

    pub fn is_squarefree(&self) -> bool {
        self.factors.iter().all(|&(_, r)| r == 1)
    }

    /// If `k` is `p^s` with `p | n` and `s ≥ 1`, returns `(p, s)`.
    pub fn prime_power_of(&self, k: u64) -> Option<(u64, u32)> {
        for &(p, _) in &self.factors {
            if k < p || !k.is_multiple_of(p) {
                continue;
            }
            let mut m = k;
            let mut s = 0;
            while m.is_multiple_of(p) {
                m /= p;
                s += 1;
            }
            return (m == 1).then_some((p, s));
        }
        None
    }
}

/// Trial-division factorization of `n ≥ 2`.
pub fn factorize(n: u64) -> Result<PrimeFactorization> {
    if n < 2 {
        return Err(invalid(format!("cannot factorize {n}: need n >= 2")));
    }
    if n > MAX_FACTOR_INPUT {
        return Err(invalid(format!("{n} exceeds the trial-division bound")));
    }
    let mut factors = Vec::new();
    let mut m = n;
    let mut p = 2u64;
    while p * p <= m {
        if m.is_multiple_of(p) {
            let mut r = 0;
            while m.is_multiple_of(p) {
                m /= p;
                r += 1;
            }
            factors.push((p, r));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if m > 1 {
        factors.push((m, 1));
    }
    Ok(PrimeFactorization { factors })
}

pub fn is_prime(p: u64) -> bool {
    p >= 2 && factorize(p).is_ok_and(|f| f.factors == [(p, 1)])
}

/// `C(n, k)`, zero outside `0 ≤ k ≤ n`.
pub fn binomial(n: u64, k: i64) -> BigInt {
    if k < 0 || k as u64 > n {
        return BigInt::zero();
    }
    let k = (k as u64).min(n - k as u64);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc *= n - i;
        acc /= i + 1;
    }
    BigInt::from(acc)
}

/// Exponent of the prime `p` in `x` (`x ≠ 0`).
pub fn valuation(p: u64, x: &BigInt) -> u32 {
    assert!(!x.is_zero(), "valuation of zero");
    let p = BigInt::from(p);
    let mut m = x.abs();
    let mut v = 0;
    loop {
        let (q, r) = m.div_rem(&p);
        if !r.is_zero() {
            return v;
        }
        m = q;
        v += 1;
    }
}

/// The C*-multiplier `c_k`: `p` when `k = p^s` with `s ≥ 1` and `p^s | n`,
/// else 1. Defined for `2 ≤ k ≤ n`.
///
/// The divisibility condition is what makes `b(n,r-1)/b(n,r) = c_r` hold:
/// for `n = 6`, `b(6,3) = b(6,4) = 1`, so `c_4` must be 1.
pub fn c(n: u64, k: u64) -> Result<u64> {
    if k < 2 || k > n {
        return Err(invalid(format!("c({n}, {k}): k must lie in 2..={n}")));
    }
    let f = factorize(n)?;
    Ok(c_with(&f, k))
}

pub(crate) fn c_with(f: &PrimeFactorization, k: u64) -> u64 {
    match f.prime_power_of(k) {
        Some((p, s)) if s <= f.exponent_of(p) => p,
        _ => 1,
    }
}

/// `b(n, r) = gcd{C(n,1), …, C(n,r)}` for `1 ≤ r ≤ n`.
pub fn b(n: u64, r: u64) -> Result<BigInt> {
    if r < 1 || r > n {
        return Err(invalid(format!("b({n}, {r}): r must lie in 1..={n}")));
    }
    Ok(gcd_prefix(n).swap_remove(r as usize - 1))
}

/// `[b(n,1), …, b(n,n)]`.
pub fn gcd_prefix(n: u64) -> Vec<BigInt> {
    let mut out = Vec::with_capacity(n as usize);
    let mut g = BigInt::zero();
    for r in 1..=n {
        g = g.gcd(&binomial(n, r as i64));
        out.push(g.clone());
    }
    out
}

/// Checks, for every `2 ≤ r ≤ n`, that `b(n,r-1)/b(n,r) = c_r` and that
/// `b(n,r) = c_{r+1} ⋯ c_n`.
pub fn binomial_gcd_chain_holds(n: u64) -> bool {
    let Ok(f) = factorize(n) else { return false };
    let bs = gcd_prefix(n);
    if bs[0] != BigInt::from(n) {
        return false;
    }
    let cs: Vec<u64> = (0..=n)
        .map(|k| if k < 2 { 1 } else { c_with(&f, k) })
        .collect();
    (2..=n).all(|r| {
        let prev = &bs[r as usize - 2];
        let cur = &bs[r as usize - 1];
        let tail: BigInt = ((r + 1)..=n)
            .map(|k| BigInt::from(cs[k as usize]))
            .product();
        prev.is_multiple_of(cur) && prev / cur == BigInt::from(cs[r as usize]) && *cur == tail
    })
}

/// `Σ_{t=lo}^{hi} (-1)^{t-1} C(n, r-t)`.
fn alternating_sum(n: u64, r: u64, lo: u64, hi: u64) -> BigInt {
    (lo..=hi).fold(BigInt::zero(), |acc, t| {
        let term = binomial(n, r as i64 - t as i64);
        if t % 2 == 1 {
            acc + term
        } else {
            acc - term
        }
    })
}

/// Checks `C(n,r) = (n/r) Σ_{1≤t≤r} (-1)^{t-1} C(n,r-t)` exactly.
pub fn newton_identity_holds(n: u64, r: u64) -> bool {
    if r < 1 || r > n {
        return false;
    }
    binomial(n, r as i64) * BigInt::from(r) == BigInt::from(n) * alternating_sum(n, r, 1, r)
}

/// Result of splitting the Newton expansion of `C(n, p^s)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitIdentity {
    /// `(n/p^s) Σ_{1≤t≤p^s-p^{s-1}} (-1)^{t-1} C(n, p^s - t)`.
    pub main_sum: BigInt,
    /// `(-1)^{p^s - p^{s-1}}`, the sign of the `C(n, p^{s-1})/p` tail.
    pub tail_sign: i8,
}

impl SplitIdentity {
    pub fn tail_sign_int(&self) -> BigInt {
        BigInt::from(self.tail_sign)
    }
}

/// The tail sign `(-1)^{p^s - p^{s-1}}`: negative exactly for `p = 2, s = 1`.
pub fn split_tail_sign(p: u64, s: u32) -> i8 {
    if (p.pow(s) - p.pow(s - 1)) % 2 == 1 {
        -1
    } else {
        1
    }
}

/// Splits the Newton expansion of `C(n, p^s)` at `t = p^s - p^{s-1}` and
/// asserts `C(n,p^s) = M + σ·C(n,p^{s-1})/p` exactly.
pub fn split_newton_identity(n: u64, p: u64, s: u32) -> Result<SplitIdentity> {
    if !is_prime(p) {
        return Err(invalid(format!("{p} is not prime")));
    }
    let f = factorize(n)?;
    let r = f.exponent_of(p);
    if s < 1 || s > r {
        return Err(invalid(format!(
            "s = {s} must lie in 1..={r} for n = {n}, p = {p}"
        )));
    }
    let ps = p.pow(s);
    let ps1 = p.pow(s - 1);
    let main_sum = BigInt::from(n / ps) * alternating_sum(n, ps, 1, ps - ps1);
    let tail_sign = split_tail_sign(p, s);
    let lhs = BigInt::from(p) * binomial(n, ps as i64);
    let rhs = BigInt::from(p) * &main_sum + BigInt::from(tail_sign) * binomial(n, ps1 as i64);
    if lhs != rhs {
        return Err(Error::InternalInconsistency(format!(
            "split Newton identity fails for n = {n}, p = {p}, s = {s}"
        )));
    }
    Ok(SplitIdentity {
        main_sum,
        tail_sign,
    })
}
