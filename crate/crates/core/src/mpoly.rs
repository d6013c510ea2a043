//! Sparse multivariate integer polynomials in the variables `X_d`, `Y_d` and `Q`.
//!
//! These carry every universal structure polynomial. Coefficients are
//! arbitrary precision and monomials are kept in a canonical order, so two
//! polynomials are equal exactly when their term maps are equal.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::rings::{Elem, Ring};

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum Var {
    X(u64),
    Y(u64),
    Q,
}

impl Var {
    pub fn index(&self) -> Option<u64> {
        match self {
            Var::X(d) | Var::Y(d) => Some(*d),
            Var::Q => None,
        }
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Var::X(d) => write!(f, "x{d}"),
            Var::Y(d) => write!(f, "y{d}"),
            Var::Q => write!(f, "q"),
        }
    }
}

impl FromStr for Var {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("unknown variable {s:?}"));
        if s == "q" || s == "Q" {
            return Ok(Var::Q);
        }
        let (head, tail) = s.split_at(1.min(s.len()));
        let d: u64 = tail.parse().map_err(|_| bad())?;
        if d == 0 {
            return Err(bad());
        }
        match head {
            "x" | "X" => Ok(Var::X(d)),
            "y" | "Y" => Ok(Var::Y(d)),
            _ => Err(bad()),
        }
    }
}

/// Exponent vector: variables in increasing order with nonzero exponents.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Default)]
pub struct Monomial(Vec<(Var, u32)>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(Vec::new())
    }

    pub fn var(v: Var) -> Self {
        Monomial(vec![(v, 1)])
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (Var, u32)>) -> Self {
        let mut map: BTreeMap<Var, u32> = BTreeMap::new();
        for (v, e) in pairs {
            *map.entry(v).or_default() += e;
        }
        Monomial(map.into_iter().filter(|(_, e)| *e > 0).collect())
    }

    pub fn factors(&self) -> &[(Var, u32)] {
        &self.0
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn exponent(&self, v: Var) -> u32 {
        self.0.iter().find(|(w, _)| *w == v).map_or(0, |(_, e)| *e)
    }

    fn mul(&self, other: &Monomial) -> Monomial {
        let (a, b) = (&self.0, &other.0);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                std::cmp::Ordering::Less => {
                    out.push(a[i]);
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    out.push(b[j]);
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    out.push((a[i].0, a[i].1 + b[j].1));
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        Monomial(out)
    }

    fn without(&self, v: Var) -> Monomial {
        Monomial(self.0.iter().copied().filter(|(w, _)| *w != v).collect())
    }

    fn map_vars(&self, f: impl Fn(Var) -> Var) -> Monomial {
        Monomial::from_pairs(self.0.iter().map(|&(v, e)| (f(v), e)))
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .0
            .iter()
            .map(|(v, e)| {
                if *e == 1 {
                    v.to_string()
                } else {
                    format!("{v}^{e}")
                }
            })
            .collect();
        write!(f, "{}", parts.join("*"))
    }
}

#[derive(Clone, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct MPoly {
    terms: BTreeMap<Monomial, BigInt>,
}

impl MPoly {
    pub fn zero() -> Self {
        MPoly::default()
    }

    pub fn constant(c: impl Into<BigInt>) -> Self {
        Self::term(c, Monomial::one())
    }

    pub fn one() -> Self {
        Self::constant(1)
    }

    pub fn var(v: Var) -> Self {
        Self::term(1, Monomial::var(v))
    }

    pub fn x(d: u64) -> Self {
        Self::var(Var::X(d))
    }

    pub fn y(d: u64) -> Self {
        Self::var(Var::Y(d))
    }

    pub fn q() -> Self {
        Self::var(Var::Q)
    }

    pub fn term(c: impl Into<BigInt>, m: Monomial) -> Self {
        let c = c.into();
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        MPoly { terms }
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (Monomial, BigInt)>) -> Self {
        let mut acc: HashMap<Monomial, BigInt> = HashMap::new();
        for (m, c) in terms {
            *acc.entry(m).or_default() += c;
        }
        Self::from_map(acc)
    }

    fn from_map(acc: HashMap<Monomial, BigInt>) -> Self {
        MPoly {
            terms: acc.into_iter().filter(|(_, c)| !c.is_zero()).collect(),
        }
    }

    /// Univariate polynomial in `Q`.
    pub fn from_upoly_q(p: &crate::rings::UPoly) -> Self {
        Self::from_terms(
            p.coeffs()
                .iter()
                .enumerate()
                .map(|(i, c)| (Monomial::from_pairs([(Var::Q, i as u32)]), c.clone())),
        )
    }

    /// Inverse of [`MPoly::from_upoly_q`]; `None` if another variable occurs.
    pub fn to_upoly_q(&self) -> Option<crate::rings::UPoly> {
        let mut coeffs: Vec<BigInt> = Vec::new();
        for (m, c) in &self.terms {
            let e = match m.factors() {
                [] => 0,
                [(Var::Q, e)] => *e as usize,
                _ => return None,
            };
            if coeffs.len() <= e {
                coeffs.resize(e + 1, BigInt::zero());
            }
            coeffs[e] = c.clone();
        }
        Some(crate::rings::UPoly::from_coeffs(coeffs))
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &BigInt)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, m: &Monomial) -> BigInt {
        self.terms.get(m).cloned().unwrap_or_default()
    }

    pub fn constant_term(&self) -> BigInt {
        self.coeff(&Monomial::one())
    }

    /// Variables occurring with nonzero exponent.
    pub fn variables(&self) -> Vec<Var> {
        let mut vs: Vec<Var> = self
            .terms
            .keys()
            .flat_map(|m| m.0.iter().map(|(v, _)| *v))
            .collect();
        vs.sort();
        vs.dedup();
        vs
    }

    pub fn add(&self, other: &MPoly) -> MPoly {
        let mut terms = self.terms.clone();
        for (m, c) in &other.terms {
            let e = terms.entry(m.clone()).or_default();
            *e += c;
            if e.is_zero() {
                terms.remove(m);
            }
        }
        MPoly { terms }
    }

    pub fn neg(&self) -> MPoly {
        MPoly {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }

    pub fn sub(&self, other: &MPoly) -> MPoly {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &MPoly) -> MPoly {
        if self.is_zero() || other.is_zero() {
            return MPoly::zero();
        }
        let mut acc: HashMap<Monomial, BigInt> =
            HashMap::with_capacity(self.terms.len() * other.terms.len());
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                *acc.entry(ma.mul(mb)).or_default() += ca * cb;
            }
        }
        Self::from_map(acc)
    }

    pub fn scale(&self, k: &BigInt) -> MPoly {
        if k.is_zero() {
            return MPoly::zero();
        }
        MPoly {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), c * k)).collect(),
        }
    }

    pub fn int_scale(&self, k: i64) -> MPoly {
        self.scale(&BigInt::from(k))
    }

    pub fn pow(&self, e: u32) -> MPoly {
        let mut result = MPoly::one();
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        result
    }

    /// Exact coefficientwise division; `None` if some coefficient is not a multiple of `k`.
    pub fn try_div_int(&self, k: &BigInt) -> Option<MPoly> {
        let mut terms = BTreeMap::new();
        for (m, c) in &self.terms {
            let (q, r) = c.div_rem(k);
            if !r.is_zero() {
                return None;
            }
            terms.insert(m.clone(), q);
        }
        Some(MPoly { terms })
    }

    /// Whether every coefficient is divisible by `k`.
    pub fn is_divisible_by(&self, k: &BigInt) -> bool {
        self.terms.values().all(|c| c.is_multiple_of(k))
    }

    /// Exact division by `Q`.
    pub fn try_div_q(&self) -> Option<MPoly> {
        let mut terms = BTreeMap::new();
        for (m, c) in &self.terms {
            let e = m.exponent(Var::Q);
            if e == 0 {
                return None;
            }
            let rest = m
                .without(Var::Q)
                .mul(&Monomial::from_pairs([(Var::Q, e - 1)]));
            terms.insert(rest, c.clone());
        }
        Some(MPoly { terms })
    }

    /// Replaces each variable `v` with `map(v)` when it returns `Some`; other variables stay.
    pub fn substitute(&self, map: &dyn Fn(Var) -> Option<MPoly>) -> MPoly {
        let mut images: HashMap<Var, Option<MPoly>> = HashMap::new();
        let mut powers: HashMap<(Var, u32), MPoly> = HashMap::new();
        let mut acc = MPoly::zero();
        for (m, c) in &self.terms {
            let mut kept = Vec::new();
            let mut prod = MPoly::constant(c.clone());
            for &(v, e) in m.factors() {
                let img = images.entry(v).or_insert_with(|| map(v));
                match img {
                    None => kept.push((v, e)),
                    Some(p) => {
                        let pw = powers.entry((v, e)).or_insert_with(|| p.pow(e));
                        prod = prod.mul(pw);
                    }
                }
            }
            if !kept.is_empty() {
                prod = prod.mul(&MPoly::term(1, Monomial::from_pairs(kept)));
            }
            acc = acc.add(&prod);
        }
        acc
    }

    /// Substitutes the integer `k` for `Q`.
    pub fn specialize_q(&self, k: &BigInt) -> MPoly {
        self.substitute(&|v| (v == Var::Q).then(|| MPoly::constant(k.clone())))
    }

    /// Exchanges `X_d` and `Y_d` for all `d`.
    pub fn swap_xy(&self) -> MPoly {
        Self::from_terms(self.terms.iter().map(|(m, c)| {
            (
                m.map_vars(|v| match v {
                    Var::X(d) => Var::Y(d),
                    Var::Y(d) => Var::X(d),
                    Var::Q => Var::Q,
                }),
                c.clone(),
            )
        }))
    }

    /// Evaluates in `ring`, reading variable values from `assign`.
    ///
    /// Only ring operations and the ℤ-action are used, so non-unital rings
    /// are fine as long as the polynomial has no constant term.
    pub fn eval(&self, ring: &Ring, assign: &dyn Fn(Var) -> Option<Elem>) -> Result<Elem> {
        let vars = self.variables();
        let compiled = self.compile(&|v| vars.binary_search(&v).ok())?;
        let vals: Vec<Option<Elem>> = vars.iter().map(|v| assign(*v)).collect();
        for (v, val) in vars.iter().zip(&vals) {
            if val.is_none() {
                return Err(Error::mismatch(format!("no value assigned to {v}")));
            }
        }
        let refs: Vec<Option<&Elem>> = vals.iter().map(|v| v.as_ref()).collect();
        let mut cache = PowerCache::new(ring, &refs);
        compiled.eval(&mut cache)
    }

    /// Flattens into a term list with variables replaced by slot indices.
    pub fn compile(&self, index: &dyn Fn(Var) -> Option<usize>) -> Result<CompiledPoly> {
        let mut terms = Vec::with_capacity(self.terms.len());
        for (m, c) in &self.terms {
            let mut fs = Vec::with_capacity(m.0.len());
            for &(v, e) in &m.0 {
                let i =
                    index(v).ok_or_else(|| Error::mismatch(format!("variable {v} has no slot")))?;
                fs.push((i, e));
            }
            terms.push((c.clone(), fs));
        }
        Ok(CompiledPoly { terms })
    }

    /// Checks that every variable satisfies `pred`.
    pub fn only_uses(&self, pred: impl Fn(Var) -> bool) -> bool {
        self.variables().into_iter().all(pred)
    }
}

impl fmt::Display for MPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, c) in &self.terms {
            let neg = c.is_negative();
            let mag = c.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, "{}", if neg { "-" } else { "+" })?;
            }
            first = false;
            if m.is_one() {
                write!(f, "{mag}")?;
            } else if mag.is_one() {
                write!(f, "{m}")?;
            } else {
                write!(f, "{mag}*{m}")?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for MPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MPoly({self})")
    }
}

impl FromStr for MPoly {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        crate::expr::Expr::parse(s)?.to_mpoly()
    }
}

#[derive(Serialize, Deserialize)]
struct MonomialJson {
    coeff: String,
    exps: BTreeMap<String, u32>,
}

#[derive(Serialize, Deserialize)]
struct MPolyJson {
    monomials: Vec<MonomialJson>,
}

impl Serialize for MPoly {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let monomials = self
            .terms
            .iter()
            .map(|(m, c)| MonomialJson {
                coeff: c.to_string(),
                exps: m.0.iter().map(|(v, e)| (v.to_string(), *e)).collect(),
            })
            .collect();
        MPolyJson { monomials }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for MPoly {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw = MPolyJson::deserialize(d)?;
        let mut terms = Vec::with_capacity(raw.monomials.len());
        for m in raw.monomials {
            let c: BigInt = m
                .coeff
                .parse()
                .map_err(|_| D::Error::custom(format!("bad coefficient {:?}", m.coeff)))?;
            let mut pairs = Vec::new();
            for (name, e) in m.exps {
                let v: Var = name.parse().map_err(D::Error::custom)?;
                pairs.push((v, e));
            }
            terms.push((Monomial::from_pairs(pairs), c));
        }
        Ok(MPoly::from_terms(terms))
    }
}

/// A polynomial whose variables were resolved to slot indices.
#[derive(Clone, Debug)]
pub struct CompiledPoly {
    terms: Vec<(BigInt, Vec<(usize, u32)>)>,
}

impl CompiledPoly {
    pub fn eval(&self, cache: &mut PowerCache<'_>) -> Result<Elem> {
        let ring = cache.ring;
        let mut acc = ring.zero();
        for (c, factors) in &self.terms {
            let mut prod: Option<Elem> = None;
            for &(i, e) in factors {
                let pw = cache.pow(i, e)?;
                prod = Some(match prod {
                    None => pw,
                    Some(p) => ring.mul(&p, &pw)?,
                });
            }
            let prod = match prod {
                Some(p) => p,
                None => ring
                    .one()
                    .ok_or_else(|| Error::ConstantTermNonUnital(ring.to_string()))?,
            };
            let scaled = if c.is_one() {
                prod
            } else if (-c).is_one() {
                ring.neg(&prod)?
            } else {
                ring.int_scale(&prod, c)?
            };
            acc = ring.add(&acc, &scaled)?;
        }
        Ok(acc)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

/// Memoised powers of slot values, shared across several evaluations.
pub struct PowerCache<'a> {
    ring: &'a Ring,
    vals: &'a [Option<&'a Elem>],
    powers: Vec<Vec<Elem>>,
}

impl<'a> PowerCache<'a> {
    pub fn new(ring: &'a Ring, vals: &'a [Option<&'a Elem>]) -> Self {
        PowerCache {
            ring,
            vals,
            powers: vec![Vec::new(); vals.len()],
        }
    }

    fn pow(&mut self, i: usize, e: u32) -> Result<Elem> {
        let base = self
            .vals
            .get(i)
            .copied()
            .flatten()
            .ok_or_else(|| Error::mismatch(format!("slot {i} has no value")))?;
        let list = &mut self.powers[i];
        if list.is_empty() {
            list.push(base.clone());
        }
        while list.len() < e as usize {
            let next = self.ring.mul(list.last().unwrap(), base)?;
            list.push(next);
        }
        Ok(list[e as usize - 1].clone())
    }
}
