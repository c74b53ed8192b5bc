//! Exact arithmetic in the exterior algebra `Λ(ξ₁, ξ₃, …)` and in
//! `Q[ω] ⊗ Λ(ρ₃, ρ₅, …)`.
//!
//! Odd generators anticommute and square to zero, `ω` has degree 2 and is
//! central. Generators are addressed by their index `k`, the odd generator of
//! index `k` having degree `2k - 1`.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{invalid, Error, Result};
use crate::indexcalc::{merge_sign, MultiIndex};

/// Total degree of a possibly inhomogeneous element.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Degree {
    /// The zero element.
    Bottom,
    Homogeneous(u32),
    Mixed,
}

fn degree_of<I: IntoIterator<Item = u32>>(degrees: I) -> Degree {
    let mut out = Degree::Bottom;
    for d in degrees {
        out = match out {
            Degree::Bottom => Degree::Homogeneous(d),
            Degree::Homogeneous(e) if e == d => out,
            _ => return Degree::Mixed,
        };
    }
    out
}

/// An integral element `Σ a_I ξ_I` of the exterior algebra.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ExtElem {
    terms: BTreeMap<MultiIndex, BigInt>,
}

impl ExtElem {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::basis(MultiIndex::empty())
    }

    pub fn basis(idx: MultiIndex) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(idx, BigInt::one());
        ExtElem { terms }
    }

    /// The generator `ξ_{2k-1}`.
    pub fn generator(k: u32) -> Self {
        Self::basis(MultiIndex::singleton(k))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &BigInt)> {
        self.terms.iter()
    }

    pub fn coeff(&self, idx: &MultiIndex) -> BigInt {
        self.terms.get(idx).cloned().unwrap_or_default()
    }

    pub fn add_term(&mut self, idx: MultiIndex, c: BigInt) {
        add_into(&mut self.terms, idx, c);
    }

    pub fn scale(&self, c: &BigInt) -> Self {
        let mut out = ExtElem::zero();
        for (k, v) in &self.terms {
            out.add_term(k.clone(), v * c);
        }
        out
    }

    pub fn degree(&self) -> Degree {
        degree_of(self.terms.keys().map(MultiIndex::odd_degree))
    }
}

fn add_into<K: Ord, V: Zero + for<'a> std::ops::AddAssign<V>>(
    map: &mut BTreeMap<K, V>,
    k: K,
    v: V,
) {
    if v.is_zero() {
        return;
    }
    match map.entry(k) {
        std::collections::btree_map::Entry::Vacant(e) => {
            e.insert(v);
        }
        std::collections::btree_map::Entry::Occupied(mut e) => {
            *e.get_mut() += v;
            if e.get().is_zero() {
                e.remove();
            }
        }
    }
}

impl Add for &ExtElem {
    type Output = ExtElem;
    fn add(self, rhs: &ExtElem) -> ExtElem {
        let mut out = self.clone();
        for (k, v) in &rhs.terms {
            out.add_term(k.clone(), v.clone());
        }
        out
    }
}

impl Mul for &ExtElem {
    type Output = ExtElem;
    fn mul(self, rhs: &ExtElem) -> ExtElem {
        let mut out = ExtElem::zero();
        for (a, x) in &self.terms {
            for (b, y) in &rhs.terms {
                if let Some((m, s)) = merge_sign(a.as_slice(), b.as_slice()) {
                    let c = x * y;
                    out.add_term(MultiIndex::from_sorted(m), if s < 0 { -c } else { c });
                }
            }
        }
        out
    }
}

/// A basis monomial `ω^a ρ_J`.
///
/// Ordered by total degree, then by the `ω`-exponent, then lexicographically
/// by `J`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PresMonomial {
    pub omega: u32,
    pub rho: MultiIndex,
}

impl PresMonomial {
    pub fn new(omega: u32, rho: MultiIndex) -> Self {
        PresMonomial { omega, rho }
    }

    pub fn degree(&self) -> u32 {
        2 * self.omega + self.rho.odd_degree()
    }
}

impl Ord for PresMonomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then(self.omega.cmp(&other.omega))
            .then_with(|| self.rho.cmp(&other.rho))
    }
}

impl PartialOrd for PresMonomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// An element `Σ c · ω^a ρ_J` of `Q[ω] ⊗ Λ(ρ)`.
///
/// Coefficients are rational because the θ recursion divides by primes
/// mid-way; final values are checked with [`PresElem::assert_integral`].
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PresElem {
    terms: BTreeMap<PresMonomial, BigRational>,
}

impl PresElem {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::monomial(BigInt::one(), 0, MultiIndex::empty())
    }

    pub fn constant(c: impl Into<BigInt>) -> Self {
        Self::monomial(c.into(), 0, MultiIndex::empty())
    }

    pub fn omega_pow(a: u32) -> Self {
        Self::monomial(BigInt::one(), a, MultiIndex::empty())
    }

    /// The generator `ρ_{2k-1}`.
    pub fn rho(k: u32) -> Self {
        Self::monomial(BigInt::one(), 0, MultiIndex::singleton(k))
    }

    pub fn monomial(c: BigInt, omega: u32, rho: MultiIndex) -> Self {
        let mut out = PresElem::zero();
        out.add_term(PresMonomial::new(omega, rho), BigRational::from_integer(c));
        out
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

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&PresMonomial, &BigRational)> {
        self.terms.iter()
    }

    pub fn coeff(&self, m: &PresMonomial) -> BigRational {
        self.terms.get(m).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn add_term(&mut self, m: PresMonomial, c: BigRational) {
        add_into(&mut self.terms, m, c);
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        if c.is_zero() {
            return PresElem::zero();
        }
        PresElem {
            terms: self.terms.iter().map(|(k, v)| (k.clone(), v * c)).collect(),
        }
    }

    pub fn scale_int(&self, c: &BigInt) -> Self {
        self.scale(&BigRational::from_integer(c.clone()))
    }

    /// Multiplication by `ω^a`.
    pub fn shift_omega(&self, a: u32) -> Self {
        PresElem {
            terms: self
                .terms
                .iter()
                .map(|(k, v)| (PresMonomial::new(k.omega + a, k.rho.clone()), v.clone()))
                .collect(),
        }
    }

    pub fn degree(&self) -> Degree {
        degree_of(self.terms.keys().map(PresMonomial::degree))
    }

    pub fn is_integral(&self) -> bool {
        self.terms.values().all(|c| c.is_integer())
    }

    /// Returns the element unchanged when every coefficient is an integer.
    pub fn assert_integral(self) -> Result<Self> {
        if let Some((m, c)) = self.terms.iter().find(|(_, c)| !c.is_integer()) {
            return Err(Error::IntegralityViolation {
                term: render_monomial_text(m),
                coeff: c.to_string(),
            });
        }
        Ok(self)
    }

    /// Integer coefficients; panics on a non-integral element.
    pub fn integer_terms(&self) -> impl Iterator<Item = (&PresMonomial, BigInt)> {
        self.terms.iter().map(|(m, c)| {
            assert!(c.is_integer(), "non-integral coefficient {c}");
            (m, c.to_integer())
        })
    }

    /// Coefficient of the largest monomial in the canonical order.
    pub fn leading(&self) -> Option<(&PresMonomial, &BigRational)> {
        self.terms.iter().next_back()
    }

    /// Scales by `±1` so that the leading coefficient is positive.
    pub fn normalize_sign(&self) -> Self {
        match self.leading() {
            Some((_, c)) if c.is_negative() => -self,
            _ => self.clone(),
        }
    }

    /// Drops every term with `ω`-exponent at least `bound`.
    pub fn truncate_omega(&self, bound: u32) -> Self {
        PresElem {
            terms: self
                .terms
                .iter()
                .filter(|(k, _)| k.omega < bound)
                .map(|(k, v)| (k.clone(), v.clone()))
                .collect(),
        }
    }

    /// Splits into homogeneous components keyed by degree.
    pub fn homogeneous_parts(&self) -> BTreeMap<u32, PresElem> {
        let mut out: BTreeMap<u32, PresElem> = BTreeMap::new();
        for (k, v) in &self.terms {
            out.entry(k.degree())
                .or_default()
                .add_term(k.clone(), v.clone());
        }
        out
    }

    /// Renders as `4*w*r3 - 2*w^2*r7`.
    pub fn to_text(&self) -> String {
        render(self, render_monomial_text, "*", " + ", " - ")
    }

    /// Renders as `4\omega \otimes \rho _{3}+2\omega ^{2}\otimes \rho _{7}`.
    pub fn to_latex(&self) -> String {
        render(self, render_monomial_latex, "", "+", "-")
    }

    pub fn to_json_terms(&self) -> Vec<TermJson> {
        self.terms
            .iter()
            .map(|(m, c)| TermJson {
                coeff: c.to_string(),
                omega: m.omega,
                rho: m.rho.as_slice().to_vec(),
            })
            .collect()
    }

    pub fn from_json_terms(terms: &[TermJson]) -> Result<Self> {
        let mut out = PresElem::zero();
        for t in terms {
            let c: BigRational = t
                .coeff
                .parse()
                .map_err(|e| invalid(format!("bad coefficient {:?}: {e}", t.coeff)))?;
            let rho = MultiIndex::try_from(t.rho.clone())?;
            if rho.as_slice().first() == Some(&1) {
                return Err(invalid("rho index 1 does not exist"));
            }
            out.add_term(PresMonomial::new(t.omega, rho), c);
        }
        Ok(out)
    }
}

fn render(
    x: &PresElem,
    monomial: fn(&PresMonomial) -> String,
    times: &str,
    plus: &str,
    minus: &str,
) -> String {
    if x.is_zero() {
        return "0".to_string();
    }
    let mut out = String::new();
    for (i, (m, c)) in x.terms.iter().enumerate() {
        let negative = c.is_negative();
        match (i, negative) {
            (0, true) => out.push('-'),
            (0, false) => {}
            (_, true) => out.push_str(minus),
            (_, false) => out.push_str(plus),
        }
        let abs = c.abs();
        let body = monomial(m);
        if body.is_empty() {
            out.push_str(&abs.to_string());
        } else if abs.is_one() {
            out.push_str(&body);
        } else {
            out.push_str(&format!("{abs}{times}{body}"));
        }
    }
    out
}

fn render_monomial_text(m: &PresMonomial) -> String {
    let mut parts = Vec::new();
    match m.omega {
        0 => {}
        1 => parts.push("w".to_string()),
        a => parts.push(format!("w^{a}")),
    }
    if !m.rho.is_empty() {
        parts.push(m.rho.iter().map(|k| format!("r{}", 2 * k - 1)).collect());
    }
    parts.join("*")
}

fn render_monomial_latex(m: &PresMonomial) -> String {
    let omega = match m.omega {
        0 => String::new(),
        1 => "\\omega ".to_string(),
        a => format!("\\omega ^{{{a}}}"),
    };
    let rho: String = m
        .rho
        .iter()
        .map(|k| format!("\\rho _{{{}}}", 2 * k - 1))
        .collect();
    match (omega.is_empty(), rho.is_empty()) {
        (true, _) => rho,
        (false, true) => omega,
        (false, false) => format!("{omega}\\otimes {rho}"),
    }
}

impl fmt::Display for PresElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

impl Add for &PresElem {
    type Output = PresElem;
    fn add(self, rhs: &PresElem) -> PresElem {
        let mut out = self.clone();
        for (k, v) in &rhs.terms {
            out.add_term(k.clone(), v.clone());
        }
        out
    }
}

impl Sub for &PresElem {
    type Output = PresElem;
    fn sub(self, rhs: &PresElem) -> PresElem {
        let mut out = self.clone();
        for (k, v) in &rhs.terms {
            out.add_term(k.clone(), -v.clone());
        }
        out
    }
}

impl Neg for &PresElem {
    type Output = PresElem;
    fn neg(self) -> PresElem {
        PresElem {
            terms: self
                .terms
                .iter()
                .map(|(k, v)| (k.clone(), -v.clone()))
                .collect(),
        }
    }
}

impl Mul for &PresElem {
    type Output = PresElem;
    fn mul(self, rhs: &PresElem) -> PresElem {
        let mut out = PresElem::zero();
        for (a, x) in &self.terms {
            for (b, y) in &rhs.terms {
                if let Some((rho, s)) = merge_sign(a.rho.as_slice(), b.rho.as_slice()) {
                    let c = x * y;
                    let m = PresMonomial::new(a.omega + b.omega, MultiIndex::from_sorted(rho));
                    out.add_term(m, if s < 0 { -c } else { c });
                }
            }
        }
        out
    }
}

/// JSON form of one term: `{"coeff":"4","omega":1,"rho":[2]}`, where `rho`
/// lists generator indices `k` (so `2` is `ρ₃`).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermJson {
    pub coeff: String,
    pub omega: u32,
    pub rho: Vec<u32>,
}

impl Serialize for PresElem {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json_terms().serialize(s)
    }
}

impl<'de> Deserialize<'de> for PresElem {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let terms = Vec::<TermJson>::deserialize(d)?;
        PresElem::from_json_terms(&terms).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ri(x: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(x))
    }

    #[test]
    fn exterior_anticommutes() {
        let x3 = ExtElem::generator(2);
        let x7 = ExtElem::generator(4);
        let idx: MultiIndex = "2,4".parse().unwrap();
        assert_eq!(&x3 * &x7, ExtElem::basis(idx.clone()));
        assert_eq!(&x7 * &x3, ExtElem::basis(idx).scale(&BigInt::from(-1)));
        assert!((&x3 * &x3).is_zero());
        assert_eq!((&x3 * &x7).degree(), Degree::Homogeneous(10));
    }

    #[test]
    fn rho_squares_vanish() {
        let r = PresElem::rho(2);
        assert!((&r * &r).is_zero());
    }

    #[test]
    fn omega_is_central() {
        let x = PresElem::monomial(BigInt::one(), 2, MultiIndex::singleton(2));
        let w = PresElem::omega_pow(1);
        let expect = PresElem::monomial(BigInt::one(), 3, MultiIndex::singleton(2));
        assert_eq!(&w * &x, expect);
        assert_eq!(&x * &w, expect);
    }

    #[test]
    fn degrees() {
        let x = PresElem::monomial(BigInt::one(), 3, MultiIndex::singleton(2));
        assert_eq!(x.degree(), Degree::Homogeneous(9));
        assert_eq!(
            (&PresElem::rho(2) * &PresElem::rho(4)).degree(),
            Degree::Homogeneous(10)
        );
        assert_eq!(PresElem::zero().degree(), Degree::Bottom);
        assert_eq!(
            (&PresElem::rho(2) + &PresElem::omega_pow(1)).degree(),
            Degree::Mixed
        );
    }

    #[test]
    fn integrality() {
        let x = PresElem::monomial(BigInt::from(4), 1, MultiIndex::singleton(2));
        assert!(x.clone().assert_integral().is_ok());
        let half = x.scale(&BigRational::new(BigInt::one(), BigInt::from(8)));
        assert!(matches!(
            half.assert_integral(),
            Err(Error::IntegralityViolation { .. })
        ));
        assert!(
            PresElem::monomial(BigInt::from(-56), 2, MultiIndex::empty())
                .assert_integral()
                .is_ok()
        );
    }

    #[test]
    fn text_and_latex_rendering() {
        let mut x = PresElem::zero();
        x.add_term(PresMonomial::new(1, MultiIndex::singleton(8)), ri(4));
        x.add_term(PresMonomial::new(5, MultiIndex::singleton(4)), ri(2));
        x.add_term(PresMonomial::new(7, MultiIndex::singleton(2)), ri(1));
        assert_eq!(x.to_text(), "4*w*r15 + 2*w^5*r7 + w^7*r3");
        assert_eq!(
            x.to_latex(),
            "4\\omega \\otimes \\rho _{15}+2\\omega ^{5}\\otimes \\rho _{7}+\\omega ^{7}\\otimes \\rho _{3}"
        );
        assert_eq!((-&x).to_text(), "-4*w*r15 - 2*w^5*r7 - w^7*r3");
        assert_eq!(
            PresElem::monomial(BigInt::from(56), 2, MultiIndex::empty()).to_text(),
            "56*w^2"
        );
        assert_eq!(PresElem::constant(8).to_text(), "8");
        assert_eq!(PresElem::zero().to_text(), "0");
        let y = &PresElem::rho(2) * &PresElem::rho(4);
        assert_eq!(y.to_text(), "r3r7");
    }

    #[test]
    fn json_form() {
        let x = PresElem::monomial(BigInt::from(4), 1, MultiIndex::singleton(2));
        let s = serde_json::to_string(&x).unwrap();
        assert_eq!(s, r#"[{"coeff":"4","omega":1,"rho":[2]}]"#);
        let back: PresElem = serde_json::from_str(&s).unwrap();
        assert_eq!(back, x);
        let half = x.scale(&BigRational::new(BigInt::one(), BigInt::from(8)));
        let back: PresElem = serde_json::from_str(&serde_json::to_string(&half).unwrap()).unwrap();
        assert_eq!(back, half);
    }

    fn arb_monomial() -> impl Strategy<Value = PresMonomial> {
        (0u32..4, proptest::collection::btree_set(2u32..7, 0..3)).prop_map(|(a, s)| {
            PresMonomial::new(
                a,
                MultiIndex::try_from(s.into_iter().collect::<Vec<_>>()).unwrap(),
            )
        })
    }

    fn arb_elem() -> impl Strategy<Value = PresElem> {
        proptest::collection::vec((arb_monomial(), -5i64..6), 0..5).prop_map(|ts| {
            let mut x = PresElem::zero();
            for (m, c) in ts {
                x.add_term(m, ri(c));
            }
            x
        })
    }

    fn arb_homogeneous() -> impl Strategy<Value = PresElem> {
        arb_elem().prop_map(|x| {
            x.homogeneous_parts()
                .into_values()
                .next()
                .unwrap_or_default()
        })
    }

    proptest! {
        #[test]
        fn graded_commutative(x in arb_homogeneous(), y in arb_homogeneous()) {
            let (Degree::Homogeneous(dx), Degree::Homogeneous(dy)) = (x.degree(), y.degree()) else {
                return Ok(());
            };
            let xy = &x * &y;
            let yx = &y * &x;
            if dx * dy % 2 == 1 {
                prop_assert_eq!(xy, -&yx);
            } else {
                prop_assert_eq!(xy, yx);
            }
        }

        #[test]
        fn associative(x in arb_elem(), y in arb_elem(), z in arb_elem()) {
            prop_assert_eq!(&(&x * &y) * &z, &x * &(&y * &z));
        }

        #[test]
        fn distributive(x in arb_elem(), y in arb_elem(), z in arb_elem()) {
            prop_assert_eq!(&x * &(&y + &z), &(&x * &y) + &(&x * &z));
        }

        #[test]
        fn degree_is_additive(x in arb_homogeneous(), y in arb_homogeneous()) {
            let xy = &x * &y;
            if let (Degree::Homogeneous(a), Degree::Homogeneous(b), Degree::Homogeneous(c)) =
                (x.degree(), y.degree(), xy.degree())
            {
                prop_assert_eq!(a + b, c);
            }
        }

        #[test]
        fn json_roundtrip(x in arb_elem()) {
            let back: PresElem = serde_json::from_str(&serde_json::to_string(&x).unwrap()).unwrap();
            prop_assert_eq!(back, x);
        }
    }
}
