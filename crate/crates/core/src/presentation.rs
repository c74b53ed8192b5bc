//! `H*(PU(n))` as a quotient of `Z[ω] ⊗ Λ(ρ₃, …, ρ_{2n-1})`, and its
//! additive structure degree by degree.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::{OnceLock, RwLock};

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arithmetic::{b as gcd_b, c as c_mult, factorize, is_prime};
use crate::error::{invalid, Error, Result};
use crate::gradedalg::{Degree, PresElem, PresMonomial, TermJson};
use crate::indexcalc::{MultiIndex, PSequence};
use crate::intlinalg::{cokernel_invariants, AbelianGroup, RowLattice, SparseIntMatrix};
use crate::theta::{closed_sum, theta, ExponentConvention};

/// A ring generator with its degree.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Generator {
    pub name: String,
    pub deg: u32,
}

/// Where a relation comes from.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Provenance {
    /// `b(n,r) ω^r`.
    OmegaOrder(u32),
    /// `ω θ(ξ_I)`.
    Theta(MultiIndex),
    /// `m_p R_I` for `I ⊆ {1, p, …, p^r}`, `m_p = n / p^r`.
    Primary { p: u64, index: MultiIndex },
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Provenance::OmegaOrder(r) => write!(f, "order w^{r}"),
            Provenance::Theta(idx) => write!(f, "I={idx}"),
            Provenance::Primary { p, index } => write!(f, "I={index} p={p}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Relation {
    pub provenance: Provenance,
    pub elem: PresElem,
}

impl Relation {
    pub fn degree(&self) -> u32 {
        match self.elem.degree() {
            Degree::Homogeneous(d) => d,
            _ => unreachable!("relations are homogeneous and nonzero"),
        }
    }
}

/// Generators `ω, ρ₃, …, ρ_{2n-1}` and a list of homogeneous integral
/// relations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RingPresentation {
    pub n: u64,
    pub generators: Vec<Generator>,
    pub relations: Vec<Relation>,
}

#[derive(Serialize, Deserialize)]
struct RelationJson {
    provenance: String,
    terms: Vec<TermJson>,
}

#[derive(Serialize, Deserialize)]
struct PresentationJson {
    n: u64,
    generators: Vec<Generator>,
    relations: Vec<RelationJson>,
}

impl RingPresentation {
    pub fn relation(&self, p: &Provenance) -> Option<&Relation> {
        self.relations.iter().find(|r| &r.provenance == p)
    }

    pub fn to_text(&self) -> String {
        let gens: Vec<String> = self
            .generators
            .iter()
            .map(|g| format!("{}({})", g.name, g.deg))
            .collect();
        let mut out = format!(
            "n = {}\ngenerators: {}\nrelations:\n",
            self.n,
            gens.join(" ")
        );
        for r in &self.relations {
            out.push_str(&format!("  [{}] {}\n", r.provenance, r.elem.to_text()));
        }
        out
    }

    /// The relations coming from index sets, as a two-column table ordered by
    /// the length of `I` and then lexicographically.
    pub fn to_latex(&self) -> String {
        let mut rows: Vec<(&MultiIndex, &PresElem)> = self
            .relations
            .iter()
            .filter_map(|r| match &r.provenance {
                Provenance::Theta(i) | Provenance::Primary { index: i, .. } => Some((i, &r.elem)),
                Provenance::OmegaOrder(_) => None,
            })
            .collect();
        rows.sort_by(|a, b| (a.0.len(), a.0.as_slice()).cmp(&(b.0.len(), b.0.as_slice())));
        let mut out = String::from(
            "\\begin{tabular}{l|l}\n\\hline\\hline\n$I$ & $R_{I}$ \\\\ \\hline\\hline\n",
        );
        for (idx, elem) in rows {
            let set: Vec<String> = idx.iter().map(|k| k.to_string()).collect();
            out.push_str(&format!(
                "$\\{{{}\\}}$ & ${}$ \\\\ \\hline\n",
                set.join(","),
                elem.to_latex()
            ));
        }
        out.push_str("\\end{tabular}\n");
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        let doc = PresentationJson {
            n: self.n,
            generators: self.generators.clone(),
            relations: self
                .relations
                .iter()
                .map(|r| RelationJson {
                    provenance: r.provenance.to_string(),
                    terms: r.elem.to_json_terms(),
                })
                .collect(),
        };
        serde_json::to_value(doc).expect("presentation serializes")
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let doc: PresentationJson = serde_json::from_value(v.clone())
            .map_err(|e| invalid(format!("bad presentation JSON: {e}")))?;
        let mut relations = Vec::new();
        for r in doc.relations {
            let provenance = parse_provenance(&r.provenance)?;
            relations.push(Relation {
                provenance,
                elem: PresElem::from_json_terms(&r.terms)?,
            });
        }
        Ok(RingPresentation {
            n: doc.n,
            generators: doc.generators,
            relations,
        })
    }
}

fn parse_provenance(s: &str) -> Result<Provenance> {
    if let Some(r) = s.strip_prefix("order w^") {
        return r
            .parse()
            .map(Provenance::OmegaOrder)
            .map_err(|_| invalid(format!("bad provenance {s:?}")));
    }
    if let Some(rest) = s.strip_prefix("I=") {
        if let Some((i, p)) = rest.split_once(" p=") {
            let p = p
                .parse()
                .map_err(|_| invalid(format!("bad provenance {s:?}")))?;
            return Ok(Provenance::Primary {
                p,
                index: i.parse()?,
            });
        }
        return Ok(Provenance::Theta(rest.parse()?));
    }
    Err(invalid(format!("bad provenance {s:?}")))
}

fn check_n(n: u64) -> Result<()> {
    if n < 2 {
        return Err(invalid(format!("n = {n} must be at least 2")));
    }
    if n > 32 {
        return Err(Error::ResourceLimit(format!(
            "presentations are limited to n <= 32, got {n}"
        )));
    }
    Ok(())
}

/// `ω, ρ₃, …, ρ_{2n-1}`; `ρ_{2k-1}` is named `r{k}`.
pub fn generators(n: u64) -> Vec<Generator> {
    let mut out = vec![Generator {
        name: "w".into(),
        deg: 2,
    }];
    for k in 2..=n as u32 {
        out.push(Generator {
            name: format!("r{k}"),
            deg: 2 * k - 1,
        });
    }
    out
}

/// `p^{r-s} ω^{p^s}` for `s = 0..=r`.
pub fn j_ring(p: u64, r: u32) -> Result<Vec<PresElem>> {
    if !is_prime(p) || r == 0 {
        return Err(invalid(format!(
            "j_ring needs a prime p and r >= 1, got ({p}, {r})"
        )));
    }
    (0..=r)
        .map(|s| {
            let a = u32::try_from(p.pow(s)).map_err(|_| invalid("omega exponent overflow"))?;
            Ok(PresElem::monomial(
                BigInt::from(p).pow(r - s),
                a,
                MultiIndex::empty(),
            ))
        })
        .collect()
}

/// `R_I = Σ_J p^{r-i₁-(k-1)-ε_I(J)} ω^{κ_I(J)+1} ρ_J` for `I ⊆ {1, p, …, p^r}`.
pub fn relation_r(n: u64, idx: &PSequence) -> Result<PresElem> {
    Ok(closed_sum(n, idx, ExponentConvention::Corrected)?.shift_omega(1))
}

/// `b(n,r) ω^r` for `1 ≤ r ≤ n`.
pub fn omega_relations(n: u64) -> Result<Vec<Relation>> {
    (1..=n)
        .map(|r| {
            Ok(Relation {
                provenance: Provenance::OmegaOrder(r as u32),
                elem: PresElem::monomial(gcd_b(n, r)?, r as u32, MultiIndex::empty()),
            })
        })
        .collect()
}

/// `ω θ(ξ_I)` for every `I ⊆ {1..n}` with `|I| ≥ 2` and `θ(ξ_I) ≠ 0`,
/// ordered by degree, then length, then lexicographically.
pub fn theta_relations(n: u64) -> Result<Vec<Relation>> {
    check_n(n)?;
    let mut out = Vec::new();
    for idx in MultiIndex::all_subsets(1, n as u32) {
        if idx.len() < 2 {
            continue;
        }
        let t = theta(n, &idx)?;
        if t.is_zero() {
            continue;
        }
        let elem = t.shift_omega(1).normalize_sign();
        out.push(Relation {
            provenance: Provenance::Theta(idx),
            elem,
        });
    }
    out.sort_by_key(|r| (r.degree(), r.provenance.clone()));
    Ok(out)
}

/// `m_p R_I` for every prime `p | n` and `I ⊆ {1, p, …, p^r}` with `|I| ≥ 2`.
pub fn primary_relations(n: u64) -> Result<Vec<Relation>> {
    check_n(n)?;
    let f = factorize(n)?;
    let mut out = Vec::new();
    for &(p, r) in f.factors() {
        let m = BigInt::from(n / p.pow(r));
        let chain: Vec<u32> = (0..=r).map(|s| p.pow(s) as u32).collect();
        for idx in crate::indexcalc::subsets_of(&chain) {
            if idx.len() < 2 {
                continue;
            }
            let seq = PSequence::from_multi_index(p, r, &idx)?;
            let elem = relation_r(n, &seq)?.scale_int(&m);
            out.push(Relation {
                provenance: Provenance::Primary { p, index: idx },
                elem,
            });
        }
    }
    out.sort_by_key(|r| (r.degree(), r.provenance.clone()));
    Ok(out)
}

/// Monomials `ω^a ρ_J` of degree `d` with `J ⊆ {2..n}` and `a ≤ omega_cap`.
fn monomials(n: u64, d: u32, omega_cap: Option<u32>) -> Vec<PresMonomial> {
    let mut out = Vec::new();
    for j in MultiIndex::all_subsets(2, n as u32) {
        let dj = j.odd_degree();
        if dj > d || (d - dj) % 2 == 1 {
            continue;
        }
        let a = (d - dj) / 2;
        if omega_cap.is_some_and(|cap| a > cap) {
            continue;
        }
        out.push(PresMonomial::new(a, j));
    }
    out.sort();
    out
}

/// Integral span of all monomial multiples of `rels` in degree `d`, in the
/// ring with `ω^{omega_cap+1}` set to zero when a cap is given.
struct DegreeSpan {
    index: HashMap<PresMonomial, usize>,
    basis: Vec<PresMonomial>,
    rows: Vec<BTreeMap<usize, BigInt>>,
}

impl DegreeSpan {
    fn new(n: u64, d: u32, rels: &[&Relation], omega_cap: Option<u32>) -> Self {
        let basis = monomials(n, d, omega_cap);
        let index: HashMap<PresMonomial, usize> = basis
            .iter()
            .cloned()
            .enumerate()
            .map(|(i, m)| (m, i))
            .collect();
        let mut span = DegreeSpan {
            index,
            basis,
            rows: Vec::new(),
        };
        for rel in rels {
            let e = rel.degree();
            if e > d {
                continue;
            }
            for m in monomials(n, d - e, omega_cap) {
                let prod = &PresElem::monomial(BigInt::one(), m.omega, m.rho.clone()) * &rel.elem;
                if let Some(v) = span.vector(&prod) {
                    if !v.is_empty() {
                        span.rows.push(v);
                    }
                }
            }
        }
        span
    }

    /// Coordinates of `x`, dropping monomials beyond the cap.
    fn vector(&self, x: &PresElem) -> Option<BTreeMap<usize, BigInt>> {
        let mut v = BTreeMap::new();
        for (m, c) in x.terms() {
            if !c.is_integer() {
                return None;
            }
            if let Some(&i) = self.index.get(m) {
                v.insert(i, c.to_integer());
            }
        }
        Some(v)
    }

    fn lattice(&self) -> RowLattice {
        let mut l = RowLattice::new();
        for r in &self.rows {
            l.insert(r);
        }
        l
    }

    fn cokernel(&self) -> AbelianGroup {
        let mut m = SparseIntMatrix::new(self.rows.len(), self.basis.len());
        for (i, r) in self.rows.iter().enumerate() {
            for (&j, v) in r {
                m.set(i, j, v.clone());
            }
        }
        cokernel_invariants(&m)
    }
}

/// Whether `x` lies in the ideal generated by `rels` (in the full ring
/// `Z[ω] ⊗ Λ`).
pub fn in_ideal(n: u64, rels: &[Relation], x: &PresElem) -> Result<bool> {
    if !x.is_integral() {
        return Err(invalid("ideal membership needs an integral element"));
    }
    let refs: Vec<&Relation> = rels.iter().collect();
    for (d, part) in x.homogeneous_parts() {
        let span = DegreeSpan::new(n, d, &refs, None);
        let v = span.vector(&part).expect("integral");
        if !span.lattice().contains(&v) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Drops relations lying in the ideal generated by the others, scanning in
/// order and then once more in reverse.
pub fn minimize(n: u64, mut rels: Vec<Relation>) -> Vec<Relation> {
    rels.sort_by_key(Relation::degree);
    let mut kept: Vec<Relation> = Vec::new();
    let mut rest = rels.into_iter().peekable();
    while let Some(first) = rest.next() {
        let d = first.degree();
        let refs: Vec<&Relation> = kept.iter().collect();
        let span = DegreeSpan::new(n, d, &refs, None);
        let mut lattice = span.lattice();
        let mut batch = vec![first];
        while rest.peek().is_some_and(|r| r.degree() == d) {
            batch.extend(rest.next());
        }
        for rel in batch {
            let v = span.vector(&rel.elem).expect("integral relation");
            if lattice.insert(&v) {
                kept.push(rel);
            }
        }
    }
    let mut i = kept.len();
    while i > 0 {
        i -= 1;
        let d = kept[i].degree();
        let refs: Vec<&Relation> = kept
            .iter()
            .enumerate()
            .filter(|&(j, k)| j != i && k.degree() <= d)
            .map(|(_, k)| k)
            .collect();
        let span = DegreeSpan::new(n, d, &refs, None);
        let v = span.vector(&kept[i].elem).expect("integral relation");
        if span.lattice().contains(&v) {
            kept.remove(i);
        }
    }
    kept
}

/// A minimal set of relations generating the ideal of `ω θ(ξ_I)`. Index sets
/// inside one chain `{1, p, …, p^r}` contribute `m_p R_I`; the others
/// contribute `ω θ(ξ_I)` and are dropped when already implied.
pub fn present(n: u64) -> Result<RingPresentation> {
    static CACHE: OnceLock<RwLock<HashMap<u64, RingPresentation>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(p) = cache.read().expect("presentation cache poisoned").get(&n) {
        return Ok(p.clone());
    }
    let p = build_presentation(n)?;
    cache
        .write()
        .expect("presentation cache poisoned")
        .insert(n, p.clone());
    Ok(p)
}

fn build_presentation(n: u64) -> Result<RingPresentation> {
    let mut rels = omega_relations(n)?;
    rels.extend(primary_relations(n)?);
    let f = factorize(n)?;
    let single_chain = |idx: &MultiIndex| {
        f.factors().iter().any(|&(p, r)| {
            idx.iter()
                .all(|k| (0..=r).any(|s| u64::from(k) == p.pow(s)))
        })
    };
    rels.extend(
        theta_relations(n)?
            .into_iter()
            .filter(|r| match &r.provenance {
                Provenance::Theta(idx) => !single_chain(idx),
                _ => true,
            }),
    );
    rels.sort_by_key(|r| (r.degree(), r.provenance.clone()));
    Ok(RingPresentation {
        n,
        generators: generators(n),
        relations: minimize(n, rels),
    })
}

/// Every relation `b(n,r) ω^r` and `ω θ(ξ_I)`, without reduction.
pub fn present_unreduced(n: u64) -> Result<RingPresentation> {
    let mut rels = omega_relations(n)?;
    rels.extend(theta_relations(n)?);
    Ok(RingPresentation {
        n,
        generators: generators(n),
        relations: rels,
    })
}

/// The presentation built from `b(n,r) ω^r` and the prime-by-prime
/// relations `m_p R_I`.
pub fn present_primary(n: u64) -> Result<RingPresentation> {
    let mut rels = omega_relations(n)?;
    rels.extend(primary_relations(n)?);
    Ok(RingPresentation {
        n,
        generators: generators(n),
        relations: rels,
    })
}

/// Whether `x` vanishes in `H*(PU(n))`.
pub fn reduces_to_zero(n: u64, x: &PresElem) -> Result<bool> {
    in_ideal(n, &present(n)?.relations, x)
}

/// The group in each degree `0..=d_max` of the quotient by `pres`.
pub fn groups_for(pres: &RingPresentation, d_max: u32) -> BTreeMap<u32, AbelianGroup> {
    let n = pres.n;
    assert!(
        in_ideal(n, &pres.relations, &PresElem::omega_pow(n as u32)).expect("integral"),
        "omega^n must lie in the ideal"
    );
    let refs: Vec<&Relation> = pres.relations.iter().collect();
    (0..=d_max)
        .into_par_iter()
        .map(|d| {
            (
                d,
                DegreeSpan::new(n, d, &refs, Some(n as u32 - 1)).cokernel(),
            )
        })
        .collect()
}

/// `H^d(PU(n))` for `0 ≤ d ≤ d_max`.
pub fn groups_by_degree(n: u64, d_max: u32) -> Result<BTreeMap<u32, AbelianGroup>> {
    check_n(n)?;
    if d_max as u64 > n * n + 1 {
        return Err(invalid(format!(
            "max degree {d_max} exceeds n^2 + 1 = {}",
            n * n + 1
        )));
    }
    Ok(groups_for(&present(n)?, d_max))
}

/// Outcome of one named check.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Check {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }
}

/// Coefficients of `Π (1 + t^{e})` over the given exponents.
pub fn exterior_poincare(exps: impl IntoIterator<Item = u32>) -> BTreeMap<u32, u64> {
    let mut poly = BTreeMap::from([(0u32, 1u64)]);
    for e in exps {
        let mut next = poly.clone();
        for (&d, &c) in &poly {
            *next.entry(d + e).or_insert(0) += c;
        }
        poly = next;
    }
    poly
}

/// The free part and the `p`-primary parts, degree by degree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrimaryDecomposition {
    pub n: u64,
    pub free: BTreeMap<u32, usize>,
    /// `p ↦ degree ↦ orders of the cyclic p-power summands`.
    pub primary: BTreeMap<u64, BTreeMap<u32, Vec<BigInt>>>,
    pub checks: Vec<Check>,
}

fn primary_table(groups: &BTreeMap<u32, AbelianGroup>, p: u64) -> BTreeMap<u32, Vec<BigInt>> {
    groups
        .iter()
        .map(|(&d, g)| (d, g.p_primary(p)))
        .filter(|(_, v)| !v.is_empty())
        .collect()
}

/// Splits each `H^d(PU(n))` into its free rank and `p`-primary summands and
/// compares them with the predicted shapes.
pub fn primary_decomposition(n: u64, d_max: u32) -> Result<PrimaryDecomposition> {
    let groups = groups_by_degree(n, d_max)?;
    let f = factorize(n)?;
    let free: BTreeMap<u32, usize> = groups.iter().map(|(&d, g)| (d, g.free_rank)).collect();
    let primary: BTreeMap<u64, BTreeMap<u32, Vec<BigInt>>> =
        f.primes().map(|p| (p, primary_table(&groups, p))).collect();
    let mut checks = Vec::new();

    let expect_free = exterior_poincare((2..=n as u32).map(|i| 2 * i - 1));
    let free_ok = free
        .iter()
        .all(|(d, &r)| expect_free.get(d).copied().unwrap_or(0) == r as u64);
    checks.push(Check::new(
        "free part is an exterior algebra",
        free_ok,
        format!("degrees 0..={d_max}"),
    ));

    let other: Vec<u64> = groups
        .values()
        .flat_map(|g| g.torsion.iter())
        .flat_map(|t| {
            let mut t = t.clone();
            for p in f.primes() {
                while (&t % p).is_zero() {
                    t /= p;
                }
            }
            (!t.is_one()).then_some(1)
        })
        .collect();
    checks.push(Check::new(
        "torsion only at primes dividing n",
        other.is_empty(),
        String::new(),
    ));

    for &(p, r) in f.factors() {
        let bound = BigInt::from(p).pow(r);
        let ok = primary[&p]
            .values()
            .flatten()
            .all(|o| (&bound % o).is_zero());
        checks.push(Check::new(
            format!("sigma_{p} killed by {p}^{r}"),
            ok,
            String::new(),
        ));
    }

    if f.is_squarefree() {
        for p in f.primes() {
            let ext =
                exterior_poincare((2..=n as u32).filter(|&i| i as u64 != p).map(|i| 2 * i - 1));
            let mut expect: BTreeMap<u32, u64> = BTreeMap::new();
            for a in 1..p as u32 {
                for (&d, &c) in &ext {
                    *expect.entry(2 * a + d).or_insert(0) += c;
                }
            }
            let ok = (0..=d_max).all(|d| {
                let got = primary[&p].get(&d).cloned().unwrap_or_default();
                let want = expect.get(&d).copied().unwrap_or(0);
                got.len() as u64 == want && got.iter().all(|o| *o == BigInt::from(p))
            });
            checks.push(Check::new(
                format!("sigma_{p} for squarefree n"),
                ok,
                String::new(),
            ));
        }
    }

    for &(p, r) in f.factors() {
        let q = p.pow(r);
        if q == n || q < 2 {
            continue;
        }
        let small = groups_by_degree(q, (q * q) as u32 - 1)?;
        let small_p = primary_table(&small, p);
        let ext = exterior_poincare((q as u32 + 1..=n as u32).map(|i| 2 * i - 1));
        let mut expect: BTreeMap<u32, Vec<BigInt>> = BTreeMap::new();
        for (&d, orders) in &small_p {
            for (&e, &c) in &ext {
                for _ in 0..c {
                    expect
                        .entry(d + e)
                        .or_default()
                        .extend(orders.iter().cloned());
                }
            }
        }
        let ok = (0..=d_max).all(|d| {
            let mut got = primary[&p].get(&d).cloned().unwrap_or_default();
            let mut want = expect.get(&d).cloned().unwrap_or_default();
            got.sort();
            want.sort();
            got == want
        });
        checks.push(Check::new(
            format!("sigma_{p} from PU({q})"),
            ok,
            String::new(),
        ));
    }

    Ok(PrimaryDecomposition {
        n,
        free,
        primary,
        checks,
    })
}

/// Basic facts about `H*(PU(n))`.
pub fn sanity_suite(n: u64) -> Result<Vec<Check>> {
    check_n(n)?;
    let top = (n * n - 1) as u32;
    let pres = present(n)?;
    let groups = groups_for(&pres, top + 2);
    let mut out = Vec::new();
    let above: Vec<u32> = (top + 1..=top + 2)
        .filter(|d| !groups[d].is_trivial())
        .collect();
    out.push(Check::new(
        "vanishing above the top degree",
        above.is_empty(),
        format!("nonzero in {above:?}"),
    ));
    out.push(Check::new(
        "top degree is Z",
        groups[&top] == AbelianGroup::free(1),
        groups[&top].to_string(),
    ));
    let rho3_free = !pres.relations.iter().any(|r| r.degree() == 3);
    out.push(Check::new(
        "degree 3 is Z on rho_3",
        groups[&3] == AbelianGroup::free(1) && rho3_free,
        groups[&3].to_string(),
    ));
    out.push(Check::new(
        "degree 2 is Z/n",
        groups[&2] == AbelianGroup::cyclic(n),
        groups[&2].to_string(),
    ));
    let rank: usize = groups.values().map(|g| g.free_rank).sum();
    out.push(Check::new(
        "total free rank 2^(n-1)",
        rank as u64 == 1 << (n - 1),
        rank.to_string(),
    ));
    let c2 = c_mult(n, 2)?;
    out.push(Check::new(
        "multiplier of rho_3 is 2 exactly when n is even",
        (c2 == 2) == n.is_multiple_of(2) && (c2 == 1) == (n % 2 == 1),
        format!("c_2 = {c2}"),
    ));
    Ok(out)
}
