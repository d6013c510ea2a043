//! Universal structure polynomials (addition Σ_n, multiplication Π_n,
//! negation, Frobenius f^{(m)}_ν) for each deformation family, derived by
//! symbolic ghost inversion over ℤ[Q][X_d, Y_d].
//!
//! Every division by `n` during the inversion is checked to be exact, so a
//! successful derivation is itself a certificate that the polynomials are
//! integral.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::{Arc, Mutex, RwLock};

use num_bigint::BigInt;
use once_cell::sync::{Lazy, OnceCell};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::mpoly::{MPoly, Var};
use crate::rings::{Elem, Ring, UPoly};
use crate::truncset::{divisors, TruncationSet};
use crate::witt::{QBinding, WittRing, WittVector};

#[derive(Clone, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub enum Family {
    Classical,
    /// Ghost weights `d·Q^{n/d-1}`, products twisted by `Q`.
    QDef,
    /// Ghost weights `d·Q⁻¹(1-(1-Q)^{n/d})`, products twisted by `Q`;
    /// `Some(g)` is the base change along `Q ↦ 1 - g(Q)`.
    QBar(Option<UPoly>),
    /// Same ghost weights as `QDef` at an integer `q`, untwisted products.
    Lenart(i64),
}

impl Family {
    pub fn qbar(g: UPoly) -> Family {
        Family::QBar(Some(g))
    }

    /// The substitution `Q ↦ 1 - g(Q)` for a base-changed `QBar`.
    fn base_change(&self) -> Option<MPoly> {
        match self {
            Family::QBar(Some(g)) => Some(MPoly::one().sub(&MPoly::from_upoly_q(g))),
            _ => None,
        }
    }

    /// Whether the polynomials mention `Q`.
    pub fn uses_q(&self) -> bool {
        matches!(self, Family::QDef | Family::QBar(_))
    }

    /// Ghost weight `w(n, d)` for `d | n`, as a polynomial in `Q`.
    pub fn weight(&self, n: u64, d: u64) -> MPoly {
        debug_assert!(n.is_multiple_of(d));
        let k = (n / d) as u32;
        let w = match self {
            Family::Classical => MPoly::one(),
            Family::QDef => MPoly::q().pow(k - 1),
            Family::QBar(_) => {
                let base = MPoly::one().sub(&MPoly::q());
                let mut h = MPoly::zero();
                let mut pw = MPoly::one();
                for _ in 0..k {
                    h = h.add(&pw);
                    pw = pw.mul(&base);
                }
                match self.base_change() {
                    Some(s) => h.substitute(&|v| (v == Var::Q).then(|| s.clone())),
                    None => h,
                }
            }
            Family::Lenart(q) => MPoly::constant(BigInt::from(*q).pow(k - 1)),
        };
        w.int_scale(d as i64)
    }

    /// Ghost-side multiplication twist τ.
    pub fn twist(&self) -> MPoly {
        match self {
            Family::Classical | Family::Lenart(_) => MPoly::one(),
            Family::QDef | Family::QBar(None) => MPoly::q(),
            Family::QBar(Some(_)) => self.base_change().expect("base-changed family"),
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::Classical => write!(f, "classical"),
            Family::QDef => write!(f, "qdef"),
            Family::QBar(None) => write!(f, "qbar"),
            Family::QBar(Some(g)) => write!(f, "qbar:{g}"),
            Family::Lenart(q) => write!(f, "lenart:{q}"),
        }
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "classical" => Ok(Family::Classical),
            "qdef" => Ok(Family::QDef),
            "qbar" => Ok(Family::QBar(None)),
            "lenart" => Err(Error::Parse(
                "the lenart family needs an integer q, e.g. lenart:3".into(),
            )),
            other => {
                if let Some(g) = other.strip_prefix("qbar:") {
                    let g = crate::expr::Expr::parse(g)?.to_upoly()?;
                    Ok(Family::QBar(Some(g)))
                } else if let Some(q) = other.strip_prefix("lenart:") {
                    let q = q
                        .trim()
                        .parse()
                        .map_err(|_| Error::Parse(format!("bad lenart parameter {q:?}")))?;
                    Ok(Family::Lenart(q))
                } else {
                    Err(Error::Parse(format!("unknown family {other:?}")))
                }
            }
        }
    }
}

/// Which variable bank a ghost polynomial is written in.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Bank {
    X,
    Y,
}

impl Bank {
    fn var(self, d: u64) -> MPoly {
        match self {
            Bank::X => MPoly::x(d),
            Bank::Y => MPoly::y(d),
        }
    }
}

/// `Σ_{d|n} w(n,d)·V_d^{n/d}` in the chosen bank.
pub fn ghost_poly(fam: &Family, s: &TruncationSet, n: u64, bank: Bank) -> Result<MPoly> {
    s.require(n)?;
    Ok(divisors(n).into_iter().fold(MPoly::zero(), |acc, d| {
        acc.add(&fam.weight(n, d).mul(&bank.var(d).pow((n / d) as u32)))
    }))
}

/// Solves `Σ_{d|n} w(n,d)·A_d^{n/d} = ghost_n` for the `A_n`, in increasing `n`.
pub fn invert_ghost(
    s: &TruncationSet,
    ghost: &[MPoly],
    weight: &dyn Fn(u64, u64) -> MPoly,
) -> Result<Vec<MPoly>> {
    if ghost.len() != s.len() {
        return Err(Error::mismatch(format!(
            "{} ghost components for {s}",
            ghost.len()
        )));
    }
    let mut coords: Vec<MPoly> = Vec::with_capacity(s.len());
    for (i, n) in s.iter().enumerate() {
        let mut rest = ghost[i].clone();
        for d in divisors(n).into_iter().filter(|&d| d < n) {
            let a = &coords[s.index_of(d).expect("divisor stable")];
            rest = rest.sub(&weight(n, d).mul(&a.pow((n / d) as u32)));
        }
        let lead = weight(n, n);
        let a = match lead.to_upoly_q().filter(|p| p.is_constant()) {
            Some(c) => rest.try_div_int(&c.coeff(0)),
            None => None,
        }
        .ok_or_else(|| Error::IntegralityViolation(format!("coordinate {n} is not integral")))?;
        coords.push(a);
    }
    Ok(coords)
}

/// Ghost inversion with the family's weights.
pub fn ghost_invert_sym(fam: &Family, s: &TruncationSet, ghost: &[MPoly]) -> Result<Vec<MPoly>> {
    invert_ghost(s, ghost, &|n, d| fam.weight(n, d))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
struct Payload {
    add: Vec<MPoly>,
    mul: Vec<MPoly>,
    neg: Vec<MPoly>,
    frob: BTreeMap<u64, Vec<MPoly>>,
}

/// All structure polynomials of one family on one truncation set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UniversalPolySet {
    family: Family,
    set: TruncationSet,
    payload: Payload,
}

impl UniversalPolySet {
    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn set(&self) -> &TruncationSet {
        &self.set
    }

    pub fn sigma(&self, n: u64) -> Result<&MPoly> {
        Ok(&self.payload.add[self.set.require(n)?])
    }

    pub fn pi(&self, n: u64) -> Result<&MPoly> {
        Ok(&self.payload.mul[self.set.require(n)?])
    }

    pub fn neg(&self, n: u64) -> Result<&MPoly> {
        Ok(&self.payload.neg[self.set.require(n)?])
    }

    pub fn add_polys(&self) -> &[MPoly] {
        &self.payload.add
    }

    pub fn mul_polys(&self) -> &[MPoly] {
        &self.payload.mul
    }

    pub fn neg_polys(&self) -> &[MPoly] {
        &self.payload.neg
    }

    /// `f^{(m)}_ν` for `ν ∈ S/m`, in the `X` bank.
    pub fn frobenius(&self, m: u64) -> Result<&[MPoly]> {
        self.set.require(m)?;
        Ok(&self.payload.frob[&m])
    }

    pub fn ghost(&self, n: u64, bank: Bank) -> Result<MPoly> {
        ghost_poly(&self.family, &self.set, n, bank)
    }

    fn map(&self, family: Family, f: impl Fn(&MPoly) -> MPoly) -> UniversalPolySet {
        let all = |v: &[MPoly]| v.iter().map(&f).collect::<Vec<_>>();
        UniversalPolySet {
            family,
            set: self.set.clone(),
            payload: Payload {
                add: all(&self.payload.add),
                mul: all(&self.payload.mul),
                neg: all(&self.payload.neg),
                frob: self
                    .payload
                    .frob
                    .iter()
                    .map(|(m, v)| (*m, all(v)))
                    .collect(),
            },
        }
    }
}

fn derive_uncached(fam: &Family, s: &TruncationSet) -> Result<UniversalPolySet> {
    if let (Family::QBar(Some(g)), Some(sub)) = (fam, fam.base_change()) {
        let _ = g;
        let base = derive(&Family::QBar(None), s)?;
        return Ok(base.map(fam.clone(), |p| {
            p.substitute(&|v| (v == Var::Q).then(|| sub.clone()))
        }));
    }
    let gx: Vec<MPoly> = s
        .iter()
        .map(|n| ghost_poly(fam, s, n, Bank::X))
        .collect::<Result<_>>()?;
    let gy: Vec<MPoly> = s
        .iter()
        .map(|n| ghost_poly(fam, s, n, Bank::Y))
        .collect::<Result<_>>()?;
    let tau = fam.twist();

    let sum: Vec<MPoly> = gx.iter().zip(&gy).map(|(a, b)| a.add(b)).collect();
    let prod: Vec<MPoly> = gx
        .iter()
        .zip(&gy)
        .map(|(a, b)| tau.mul(&a.mul(b)))
        .collect();
    let negated: Vec<MPoly> = gx.iter().map(MPoly::neg).collect();

    let mut frob = BTreeMap::new();
    for m in s.iter() {
        let sm = s.quotient(m)?;
        let shifted: Vec<MPoly> = sm
            .iter()
            .map(|nu| gx[s.index_of(m * nu).expect("in S")].clone())
            .collect();
        frob.insert(m, ghost_invert_sym(fam, &sm, &shifted)?);
    }

    Ok(UniversalPolySet {
        family: fam.clone(),
        set: s.clone(),
        payload: Payload {
            add: ghost_invert_sym(fam, s, &sum)?,
            mul: ghost_invert_sym(fam, s, &prod)?,
            neg: ghost_invert_sym(fam, s, &negated)?,
            frob,
        },
    })
}

type Key = (Family, TruncationSet);

type Slot = Arc<OnceCell<Arc<UniversalPolySet>>>;

static MEMO: Lazy<Mutex<HashMap<Key, Slot>>> = Lazy::new(Default::default);
static CACHE_DIR: Lazy<RwLock<Option<PathBuf>>> = Lazy::new(|| {
    RwLock::new(
        std::env::var_os("WITT_CACHE")
            .filter(|v| !v.is_empty())
            .map(PathBuf::from),
    )
});

/// Enables (or with `None` disables) the on-disk polynomial cache.
pub fn set_cache_dir(dir: Option<PathBuf>) {
    *CACHE_DIR.write().expect("cache dir lock") = dir;
}

pub fn cache_dir() -> Option<PathBuf> {
    CACHE_DIR.read().expect("cache dir lock").clone()
}

/// Derives (or fetches from the memo and disk caches) the polynomial set.
///
/// Concurrent callers asking for the same key wait for a single derivation.
pub fn derive(fam: &Family, s: &TruncationSet) -> Result<Arc<UniversalPolySet>> {
    let cell = {
        let mut memo = MEMO.lock().expect("memo lock");
        memo.entry((fam.clone(), s.clone())).or_default().clone()
    };
    cell.get_or_try_init(|| {
        let dir = cache_dir();
        if let Some(dir) = &dir {
            if let Some(set) = disk::load(dir, fam, s) {
                return Ok(Arc::new(set));
            }
        }
        let set = derive_uncached(fam, s)?;
        if let Some(dir) = &dir {
            // A failed write only costs a re-derivation next time.
            let _ = disk::store(dir, &set);
        }
        Ok(Arc::new(set))
    })
    .cloned()
}

/// The family `W̄^{g}`: `QBar` polynomials with `Q ↦ 1 - g(Q)`.
pub fn base_change_qbar(g: &UPoly, s: &TruncationSet) -> Result<Arc<UniversalPolySet>> {
    derive(&Family::qbar(g.clone()), s)
}

/// `P(Q·v)/Q` for every variable `v`; `None` if the division is not exact.
pub fn q_transform(p: &MPoly) -> Option<MPoly> {
    p.substitute(&|v| match v {
        Var::X(_) | Var::Y(_) => Some(MPoly::q().mul(&MPoly::var(v))),
        Var::Q => None,
    })
    .try_div_q()
}

/// Checks symbolically that the coordinate shift is the Verschiebung: the
/// ghost of the shifted generic vector is `m·G_{ν/m}` at `m | ν` and zero
/// elsewhere.
pub fn verschiebung_is_shift(fam: &Family, s: &TruncationSet, m: u64) -> Result<bool> {
    let sm = s.quotient(m)?;
    for nu in s.iter() {
        let shifted = ghost_poly(fam, s, nu, Bank::X)?.substitute(&|v| match v {
            Var::X(d) if d % m == 0 => Some(MPoly::x(d / m)),
            Var::X(_) => Some(MPoly::zero()),
            _ => None,
        });
        let expected = if nu % m == 0 {
            ghost_poly(fam, &sm, nu / m, Bank::X)?.int_scale(m as i64)
        } else {
            MPoly::zero()
        };
        if shifted != expected {
            return Ok(false);
        }
    }
    Ok(true)
}

/// The generic vector `(X_d)_{d∈S}` over the universal ring.
pub fn generic_vector(fam: &Family, s: &TruncationSet, bank: Bank) -> Result<WittVector> {
    let ring = WittRing::new(
        fam.clone(),
        s.clone(),
        Ring::universal(),
        universal_binding(fam),
    )?;
    let coords = s.iter().map(|d| Elem::Multi(bank.var(d))).collect();
    WittVector::new(ring, coords)
}

/// How `Q` is bound when computing over the universal ring.
pub fn universal_binding(fam: &Family) -> QBinding {
    if fam.uses_q() {
        QBinding::Element(Elem::Multi(MPoly::q()))
    } else {
        QBinding::None
    }
}

/// Polynomial form of "F_p reduces mod p to the p-th power": the Witt vector
/// difference `F_p(X) − π(X)^p` in `W_{S/p}(ℤ[Q, X])` is `p` times a Witt
/// vector with polynomial coordinates. Returns that quotient, or `None`.
pub fn frobenius_mod_p_quotient(
    fam: &Family,
    s: &TruncationSet,
    p: u64,
) -> Result<Option<WittVector>> {
    if !crate::truncset::is_prime(p) {
        return Err(Error::Parse(format!("{p} is not prime")));
    }
    let sp = s.quotient(p)?;
    let x = generic_vector(fam, s, Bank::X)?;
    let diff = x.frobenius(p)?.sub(&x.project(&sp)?.pow(p as u32)?)?;
    match diff
        .witt()
        .ring()
        .try_div_int(&diff.to_elem(), &BigInt::from(p))
    {
        Ok(Elem::Vec(coords)) => Ok(Some(WittVector::new(diff.witt().clone(), coords)?)),
        Ok(_) => unreachable!("Witt elements are coordinate vectors"),
        Err(Error::NotDivisible(_))
        | Err(Error::IntegralityViolation(_))
        | Err(Error::NotInGhostImage(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

pub fn frobenius_mod_p_certificate(fam: &Family, s: &TruncationSet, p: u64) -> Result<bool> {
    Ok(frobenius_mod_p_quotient(fam, s, p)?.is_some())
}

/// The coordinatewise congruence `f^{(p)}_ν ≡ G_ν (mod p)`, `G` the
/// coordinates of `π(X)^p`. Stronger than [`frobenius_mod_p_certificate`]
/// and false once `p² ∈ S`: for `S = {1,2,4}` the `ν = 2` difference has the
/// term `−3·X_2²`.
pub fn frobenius_mod_p_coordinatewise(fam: &Family, s: &TruncationSet, p: u64) -> Result<bool> {
    if !crate::truncset::is_prime(p) {
        return Err(Error::Parse(format!("{p} is not prime")));
    }
    let polys = derive(fam, s)?;
    let sp = s.quotient(p)?;
    let x = generic_vector(fam, &sp, Bank::X)?;
    let power = x.pow(p as u32)?;
    let pb = BigInt::from(p);
    for (f, g) in polys.frobenius(p)?.iter().zip(power.coords()) {
        let g = g.as_multi().expect("universal ring");
        if !f.sub(g).is_divisible_by(&pb) {
            return Ok(false);
        }
    }
    Ok(true)
}

mod disk {
    use super::*;

    #[derive(Serialize, Deserialize)]
    struct Entry {
        family: String,
        set: TruncationSet,
        sha256: String,
        payload: Payload,
    }

    fn file_name(fam: &Family, s: &TruncationSet) -> String {
        let key = format!("{fam}|{s}");
        let digest = Sha256::digest(key.as_bytes());
        format!("polys-{}.json", &hex::encode(digest)[..24])
    }

    fn payload_hash(p: &Payload) -> String {
        let text = serde_json::to_string(p).expect("payload serializes");
        hex::encode(Sha256::digest(text.as_bytes()))
    }

    pub(super) fn load(dir: &Path, fam: &Family, s: &TruncationSet) -> Option<UniversalPolySet> {
        let text = std::fs::read_to_string(dir.join(file_name(fam, s))).ok()?;
        let entry: Entry = serde_json::from_str(&text).ok()?;
        if entry.family != fam.to_string()
            || &entry.set != s
            || entry.sha256 != payload_hash(&entry.payload)
        {
            return None;
        }
        Some(UniversalPolySet {
            family: fam.clone(),
            set: s.clone(),
            payload: entry.payload,
        })
    }

    pub(super) fn store(dir: &Path, set: &UniversalPolySet) -> std::io::Result<()> {
        std::fs::create_dir_all(dir)?;
        let entry = Entry {
            family: set.family.to_string(),
            set: set.set.clone(),
            sha256: payload_hash(&set.payload),
            payload: set.payload.clone(),
        };
        let path = dir.join(file_name(&set.family, &set.set));
        let tmp = path.with_extension(format!("tmp{}", std::process::id()));
        std::fs::write(&tmp, serde_json::to_vec(&entry).expect("entry serializes"))?;
        std::fs::rename(tmp, path)
    }

}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::truncset::TruncationSet;

    fn set(e: &[u64]) -> TruncationSet {
        TruncationSet::new(e).unwrap()
    }

    fn p(s: &str) -> MPoly {
        s.parse().unwrap()
    }

    #[test]
    fn ghost_poly_examples() {
        let s = set(&[2]);
        assert_eq!(
            ghost_poly(&Family::Classical, &s, 2, Bank::X).unwrap(),
            p("x1^2+2*x2")
        );
        assert_eq!(
            ghost_poly(&Family::QDef, &s, 2, Bank::X).unwrap(),
            p("q*x1^2+2*x2")
        );
        assert_eq!(
            ghost_poly(&Family::QBar(None), &s, 2, Bank::X).unwrap(),
            p("(2-q)*x1^2+2*x2")
        );
        assert!(ghost_poly(&Family::Classical, &s, 3, Bank::X).is_err());
    }

    #[test]
    fn diagonal_weight_is_n() {
        let fams = [
            Family::Classical,
            Family::QDef,
            Family::QBar(None),
            Family::qbar(UPoly::q()),
            Family::Lenart(3),
        ];
        for fam in &fams {
            for n in 1..=12 {
                assert_eq!(fam.weight(n, n), MPoly::constant(n), "{fam} at {n}");
            }
        }
    }

    #[test]
    fn classical_derivation_at_two() {
        let polys = derive(&Family::Classical, &set(&[2])).unwrap();
        assert_eq!(polys.sigma(2).unwrap(), &p("x2+y2-x1*y1"));
        assert_eq!(polys.pi(2).unwrap(), &p("2*x2*y2+x1^2*y2+x2*y1^2"));
        assert_eq!(polys.frobenius(2).unwrap(), &[p("x1^2+2*x2")]);
        assert_eq!(polys.neg(1).unwrap(), &p("-x1"));
        // −(a₁, a₂) = (−a₁, −a₂ − a₁²) classically at p = 2.
        assert_eq!(polys.neg(2).unwrap(), &p("-x2-x1^2"));
    }

    #[test]
    fn ghost_inversion_round_trips() {
        let s = set(&[12]);
        for fam in [
            Family::Classical,
            Family::QDef,
            Family::QBar(None),
            Family::Lenart(5),
        ] {
            let ghosts: Vec<MPoly> = s
                .iter()
                .map(|n| ghost_poly(&fam, &s, n, Bank::X).unwrap())
                .collect();
            let coords = ghost_invert_sym(&fam, &s, &ghosts).unwrap();
            let expected: Vec<MPoly> = s.iter().map(MPoly::x).collect();
            assert_eq!(coords, expected, "{fam}");
        }
        let err =
            ghost_invert_sym(&Family::Classical, &set(&[2]), &[p("x1"), p("x1")]).unwrap_err();
        assert!(matches!(err, Error::IntegralityViolation(_)));
    }

    #[test]
    fn qdef_product_at_two() {
        let polys = derive(&Family::QDef, &set(&[2])).unwrap();
        assert_eq!(polys.pi(1).unwrap(), &p("q*x1*y1"));
        assert_eq!(polys.pi(2).unwrap(), &p("2*q*x2*y2+q^2*(x1^2*y2+x2*y1^2)"));
        assert_eq!(polys.sigma(2).unwrap(), &p("x2+y2-q*x1*y1"));
    }

    #[test]
    fn lenart_at_q3_and_additive_agreement() {
        let s = set(&[2]);
        let lenart = derive(&Family::Lenart(3), &s).unwrap();
        assert_eq!(
            lenart.pi(2).unwrap(),
            &p("2*x2*y2+3*(x2*y1^2+x1^2*y2)+3*x1^2*y1^2")
        );
        let qdef = derive(&Family::QDef, &s).unwrap();
        let q3 = BigInt::from(3);
        assert_eq!(
            lenart.sigma(2).unwrap(),
            &qdef.sigma(2).unwrap().specialize_q(&q3)
        );
    }

    #[test]
    fn lenart_symbolic_product_is_not_integral() {
        // With a symbolic q the untwisted product needs (Q²−Q)/2, which is why
        // the Lenart family carries an integer parameter.
        let s = set(&[2]);
        let w = |n: u64, d: u64| Family::QDef.weight(n, d);
        let gx: Vec<MPoly> = s
            .iter()
            .map(|n| ghost_poly(&Family::QDef, &s, n, Bank::X).unwrap())
            .collect();
        let gy: Vec<MPoly> = s
            .iter()
            .map(|n| ghost_poly(&Family::QDef, &s, n, Bank::Y).unwrap())
            .collect();
        let prod: Vec<MPoly> = gx.iter().zip(&gy).map(|(a, b)| a.mul(b)).collect();
        assert!(matches!(
            invert_ghost(&s, &prod, &w),
            Err(Error::IntegralityViolation(_))
        ));
    }

    #[test]
    fn base_change_examples() {
        let s = set(&[2]);
        let one_minus_q = UPoly::from_i64(&[1, -1]);
        let same = base_change_qbar(&one_minus_q, &s).unwrap();
        let qbar = derive(&Family::QBar(None), &s).unwrap();
        assert_eq!(same.add_polys(), qbar.add_polys());
        assert_eq!(same.mul_polys(), qbar.mul_polys());

        let at_q = base_change_qbar(&UPoly::q(), &s).unwrap();
        assert_eq!(at_q.sigma(2).unwrap(), &p("x2+y2-(1+q)*x1*y1"));
        // Re-derive straight from the substituted ghost weights.
        assert_eq!(
            at_q.add_polys(),
            derive_uncached_direct(&Family::qbar(UPoly::q()), &s)
                .add
                .as_slice()
        );

        let at_zero = base_change_qbar(&UPoly::zero(), &set(&[1, 2, 3, 4, 6])).unwrap();
        let classical = derive(&Family::Classical, &set(&[1, 2, 3, 4, 6])).unwrap();
        assert_eq!(at_zero.add_polys(), classical.add_polys());
        assert_eq!(at_zero.mul_polys(), classical.mul_polys());
    }

    /// Inverts ghosts built from the family's own weights, skipping the
    /// substitution shortcut.
    fn derive_uncached_direct(fam: &Family, s: &TruncationSet) -> Payload {
        let gx: Vec<MPoly> = s
            .iter()
            .map(|n| ghost_poly(fam, s, n, Bank::X).unwrap())
            .collect();
        let gy: Vec<MPoly> = s
            .iter()
            .map(|n| ghost_poly(fam, s, n, Bank::Y).unwrap())
            .collect();
        let sum: Vec<MPoly> = gx.iter().zip(&gy).map(|(a, b)| a.add(b)).collect();
        let prod: Vec<MPoly> = gx
            .iter()
            .zip(&gy)
            .map(|(a, b)| fam.twist().mul(&a.mul(b)))
            .collect();
        Payload {
            add: ghost_invert_sym(fam, s, &sum).unwrap(),
            mul: ghost_invert_sym(fam, s, &prod).unwrap(),
            neg: Vec::new(),
            frob: BTreeMap::new(),
        }
    }

    #[test]
    fn polynomials_are_symmetric_and_have_no_constant_term() {
        for fam in [
            Family::Classical,
            Family::QDef,
            Family::QBar(None),
            Family::Lenart(2),
        ] {
            let polys = derive(&fam, &set(&[1, 2, 3, 4, 6])).unwrap();
            for (a, m) in polys.add_polys().iter().zip(polys.mul_polys()) {
                assert_eq!(&a.swap_xy(), a);
                assert_eq!(&m.swap_xy(), m);
                assert!(
                    a.constant_term() == BigInt::from(0) && m.constant_term() == BigInt::from(0)
                );
            }
            for (i, n) in polys.set().iter().enumerate() {
                let only_divisors = |v: Var| v.index().is_none_or(|d| n % d == 0);
                assert!(polys.add_polys()[i].only_uses(only_divisors));
                assert!(polys.mul_polys()[i].only_uses(only_divisors));
            }
        }
    }

    #[test]
    fn frobenius_polys_compose() {
        let s = set(&[12]);
        for fam in [Family::Classical, Family::QDef, Family::QBar(None)] {
            let polys = derive(&fam, &s).unwrap();
            for (n, m) in [(2, 3), (3, 2), (2, 2), (2, 6), (3, 4)] {
                let s_m = s.quotient(m).unwrap();
                let fm = polys.frobenius(m).unwrap();
                let fnm = polys.frobenius(n * m).unwrap();
                let inner = derive(&fam, &s_m).unwrap();
                let fn_inner = inner.frobenius(n).unwrap();
                for (k, nu) in s.quotient(n * m).unwrap().iter().enumerate() {
                    let composed = fn_inner[k].substitute(&|v| match v {
                        Var::X(d) => Some(fm[s_m.index_of(d).unwrap()].clone()),
                        _ => None,
                    });
                    assert_eq!(composed, fnm[k], "{fam}: F_{n}∘F_{m} at {nu}");
                }
            }
        }
    }

    #[test]
    fn verschiebung_is_a_shift_for_every_family() {
        let s = set(&[12]);
        for fam in [
            Family::Classical,
            Family::QDef,
            Family::QBar(None),
            Family::qbar(UPoly::q()),
            Family::Lenart(3),
        ] {
            for m in s.iter() {
                assert!(verschiebung_is_shift(&fam, &s, m).unwrap(), "{fam} V_{m}");
            }
        }
    }

    #[test]
    fn frobenius_certificates() {
        assert!(frobenius_mod_p_certificate(&Family::Classical, &set(&[2]), 2).unwrap());
        assert!(frobenius_mod_p_certificate(&Family::Classical, &set(&[6]), 2).unwrap());
        assert!(frobenius_mod_p_certificate(&Family::Classical, &set(&[3]), 3).unwrap());
        assert!(frobenius_mod_p_certificate(&Family::QDef, &set(&[6]), 3).unwrap());
        // Lenart at q = 2 breaks the congruence at p = 2.
        assert!(!frobenius_mod_p_certificate(&Family::Lenart(2), &set(&[2]), 2).unwrap());
        for fam in [Family::Classical, Family::QDef] {
            for (s, p) in [
                (set(&[12]), 2),
                (set(&[12]), 3),
                (set(&[9]), 3),
                (set(&[8]), 2),
            ] {
                assert!(
                    frobenius_mod_p_certificate(&fam, &s, p).unwrap(),
                    "{fam} {s} {p}"
                );
            }
        }
    }

    #[test]
    fn coordinatewise_congruence_needs_p_squared_outside() {
        assert!(frobenius_mod_p_coordinatewise(&Family::Classical, &set(&[6]), 2).unwrap());
        assert!(frobenius_mod_p_coordinatewise(&Family::Classical, &set(&[6]), 3).unwrap());
        assert!(!frobenius_mod_p_coordinatewise(&Family::Classical, &set(&[4]), 2).unwrap());
        assert!(!frobenius_mod_p_coordinatewise(&Family::Classical, &set(&[9]), 3).unwrap());
    }

    #[test]
    fn family_strings_round_trip() {
        for f in [
            "classical",
            "qdef",
            "qbar",
            "qbar:q",
            "qbar:0",
            "lenart:3",
            "qbar:-q+1",
        ] {
            let fam: Family = f.parse().unwrap();
            assert_eq!(fam.to_string().parse::<Family>().unwrap(), fam);
        }
        assert!("lenart".parse::<Family>().is_err());
    }
}
