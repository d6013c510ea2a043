//! Coefficient rings: commutative, possibly non-unital, with a ℤ-action.
//!
//! A [`Ring`] is a cheap handle describing one ring instance; an [`Elem`] is
//! a plain value that only means something together with its ring. Every
//! operation checks the element shape and reports [`Error::RingMismatch`]
//! rather than panicking.

mod upoly;

use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Pow, Signed, ToPrimitive, Zero};
use rand::Rng;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::expr::{Expr, ExprTarget};
use crate::mpoly::{MPoly, Var};
use crate::witt::WittRing;

pub use upoly::UPoly;

/// Enumeration cap for finite rings.
pub const DEFAULT_ENUM_LIMIT: u64 = 1 << 16;

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum Elem {
    Int(BigInt),
    Poly(UPoly),
    /// `a + b·ε`
    Dual(BigInt, BigInt),
    Multi(MPoly),
    /// Witt coordinates, indexed like the ring's truncation set.
    Vec(Vec<Elem>),
}

impl Elem {
    pub fn int(k: i64) -> Self {
        Elem::Int(BigInt::from(k))
    }

    pub fn as_int(&self) -> Option<&BigInt> {
        match self {
            Elem::Int(k) => Some(k),
            _ => None,
        }
    }

    pub fn as_poly(&self) -> Option<&UPoly> {
        match self {
            Elem::Poly(p) => Some(p),
            _ => None,
        }
    }

    pub fn as_multi(&self) -> Option<&MPoly> {
        match self {
            Elem::Multi(p) => Some(p),
            _ => None,
        }
    }

    pub fn as_vec(&self) -> Option<&[Elem]> {
        match self {
            Elem::Vec(v) => Some(v),
            _ => None,
        }
    }
}

impl fmt::Display for Elem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Elem::Int(k) => write!(f, "{k}"),
            Elem::Poly(p) => write!(f, "{p}"),
            Elem::Dual(a, b) => {
                let eps = |k: &BigInt| {
                    if k.is_one() {
                        "eps".to_string()
                    } else {
                        format!("{k}*eps")
                    }
                };
                if b.is_zero() {
                    write!(f, "{a}")
                } else if a.is_zero() && b.is_negative() {
                    write!(f, "-{}", eps(&-b))
                } else if a.is_zero() {
                    write!(f, "{}", eps(b))
                } else if b.is_negative() {
                    write!(f, "{a}-{}", eps(&-b))
                } else {
                    write!(f, "{a}+{}", eps(b))
                }
            }
            Elem::Multi(p) => write!(f, "{p}"),
            Elem::Vec(v) => {
                let parts: Vec<String> = v.iter().map(|e| e.to_string()).collect();
                write!(f, "({})", parts.join(", "))
            }
        }
    }
}

pub enum RingKind {
    Integers,
    IntegersMod(BigInt),
    /// ℤ[q]
    PolyQ,
    /// ℤ[ε]/(ε²)
    Dual,
    /// ℤ[Q, X_d, Y_d]: lets Witt arithmetic run on generic vectors, so
    /// identities can be checked as polynomial identities.
    Universal,
    /// Same additive group as `base`, product `x ∗ y = r·(x ·_base y)` where
    /// `r` lives in the root (untwisted) ring.
    Twisted {
        base: Ring,
        twist: Elem,
    },
    Witt(Arc<WittRing>),
}

#[derive(Clone)]
pub struct Ring(Arc<RingKind>);

#[derive(Clone, Copy, PartialEq, Eq, Debug, Default)]
pub struct RingFlags {
    pub torsion_free: bool,
    pub reduced: bool,
    pub finite: bool,
    pub supports_div_int: bool,
}

impl Ring {
    pub fn new(kind: RingKind) -> Self {
        Ring(Arc::new(kind))
    }

    pub fn integers() -> Self {
        Ring::new(RingKind::Integers)
    }

    pub fn zmod(m: i64) -> Self {
        assert!(m >= 1, "modulus must be positive");
        Ring::new(RingKind::IntegersMod(BigInt::from(m)))
    }

    pub fn zmod_big(m: BigInt) -> Result<Self> {
        if !m.is_positive() {
            return Err(Error::Parse(format!("modulus must be positive, got {m}")));
        }
        Ok(Ring::new(RingKind::IntegersMod(m)))
    }

    pub fn zq() -> Self {
        Ring::new(RingKind::PolyQ)
    }

    pub fn dual() -> Self {
        Ring::new(RingKind::Dual)
    }

    pub fn universal() -> Self {
        Ring::new(RingKind::Universal)
    }

    /// `base` with multiplication twisted by `r`, an element of the root ring.
    pub fn twisted(base: Ring, r: Elem) -> Result<Self> {
        base.root().check(&r)?;
        Ok(Ring::new(RingKind::Twisted { base, twist: r }))
    }

    pub fn kind(&self) -> &RingKind {
        &self.0
    }

    pub fn ptr_eq(&self, other: &Ring) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
    }

    /// The untwisted ring underneath any stack of twists.
    pub fn root(&self) -> &Ring {
        match self.kind() {
            RingKind::Twisted { base, .. } => base.root(),
            _ => self,
        }
    }

    /// Product of all twists, as an element of the root ring.
    pub fn total_twist(&self) -> Result<Option<Elem>> {
        match self.kind() {
            RingKind::Twisted { base, twist } => match base.total_twist()? {
                None => Ok(Some(twist.clone())),
                Some(t) => Ok(Some(self.root().mul(&t, twist)?)),
            },
            _ => Ok(None),
        }
    }

    pub fn as_witt(&self) -> Option<&Arc<WittRing>> {
        match self.kind() {
            RingKind::Witt(w) => Some(w),
            _ => None,
        }
    }

    pub fn flags(&self) -> RingFlags {
        match self.kind() {
            RingKind::Integers | RingKind::PolyQ | RingKind::Universal => RingFlags {
                torsion_free: true,
                reduced: true,
                finite: false,
                supports_div_int: true,
            },
            RingKind::IntegersMod(m) => RingFlags {
                torsion_free: m.is_one(),
                reduced: is_squarefree(m),
                finite: true,
                supports_div_int: true,
            },
            RingKind::Dual => RingFlags {
                torsion_free: true,
                reduced: false,
                finite: false,
                supports_div_int: true,
            },
            RingKind::Twisted { base, .. } => {
                let b = base.flags();
                let reduced = b.reduced
                    && match self.total_twist() {
                        Ok(Some(t)) => !self.root().is_zero_divisor(&t),
                        _ => false,
                    };
                RingFlags { reduced, ..b }
            }
            RingKind::Witt(w) => w.flags(),
        }
    }

    pub fn is_torsion_free(&self) -> bool {
        self.flags().torsion_free
    }

    pub fn is_reduced(&self) -> bool {
        self.flags().reduced
    }

    pub fn is_finite(&self) -> bool {
        self.flags().finite
    }

    pub fn zero(&self) -> Elem {
        match self.kind() {
            RingKind::Integers | RingKind::IntegersMod(_) => Elem::Int(BigInt::zero()),
            RingKind::PolyQ => Elem::Poly(UPoly::zero()),
            RingKind::Dual => Elem::Dual(BigInt::zero(), BigInt::zero()),
            RingKind::Universal => Elem::Multi(MPoly::zero()),
            RingKind::Twisted { base, .. } => base.zero(),
            RingKind::Witt(w) => Elem::Vec(vec![w.base().zero(); w.set().len()]),
        }
    }

    /// Image of an integer in an untwisted unital ring.
    pub fn from_int(&self, k: impl Into<BigInt>) -> Result<Elem> {
        let k = k.into();
        match self.kind() {
            RingKind::Integers => Ok(Elem::Int(k)),
            RingKind::IntegersMod(m) => Ok(Elem::Int(k.mod_floor(m))),
            RingKind::PolyQ => Ok(Elem::Poly(UPoly::constant(k))),
            RingKind::Dual => Ok(Elem::Dual(k, BigInt::zero())),
            RingKind::Universal => Ok(Elem::Multi(MPoly::constant(k))),
            RingKind::Twisted { .. } | RingKind::Witt(_) => match self.one() {
                Some(one) => self.int_scale(&one, &k),
                None => Err(Error::ConstantTermNonUnital(self.to_string())),
            },
        }
    }

    /// Multiplicative identity, if the ring has one.
    pub fn one(&self) -> Option<Elem> {
        match self.kind() {
            RingKind::Twisted { .. } => {
                let t = self.total_twist().ok()??;
                self.root().inverse(&t)
            }
            RingKind::Witt(w) => w.one(),
            _ => self.from_int(1).ok(),
        }
    }

    pub fn is_unital(&self) -> bool {
        self.one().is_some()
    }

    /// Checks that `a` is a well-formed element of this ring.
    pub fn check(&self, a: &Elem) -> Result<()> {
        let ok = match (self.kind(), a) {
            (RingKind::Integers, Elem::Int(_)) => true,
            (RingKind::IntegersMod(m), Elem::Int(k)) => !k.is_negative() && k < m,
            (RingKind::PolyQ, Elem::Poly(_)) => true,
            (RingKind::Dual, Elem::Dual(..)) => true,
            (RingKind::Universal, Elem::Multi(_)) => true,
            (RingKind::Twisted { base, .. }, _) => return base.check(a),
            (RingKind::Witt(w), Elem::Vec(v)) => {
                if v.len() != w.set().len() {
                    return Err(Error::mismatch(format!(
                        "expected {} Witt coordinates for {}, got {}",
                        w.set().len(),
                        self,
                        v.len()
                    )));
                }
                for c in v {
                    w.base().check(c)?;
                }
                true
            }
            _ => false,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::mismatch(format!("{a} is not an element of {self}")))
        }
    }

    pub fn add(&self, a: &Elem, b: &Elem) -> Result<Elem> {
        match (self.kind(), a, b) {
            (RingKind::Integers, Elem::Int(x), Elem::Int(y)) => Ok(Elem::Int(x + y)),
            (RingKind::IntegersMod(m), Elem::Int(x), Elem::Int(y)) => {
                let s = x + y;
                Ok(Elem::Int(if &s >= m { s - m } else { s }))
            }
            (RingKind::PolyQ, Elem::Poly(x), Elem::Poly(y)) => Ok(Elem::Poly(x.add(y))),
            (RingKind::Dual, Elem::Dual(a0, a1), Elem::Dual(b0, b1)) => {
                Ok(Elem::Dual(a0 + b0, a1 + b1))
            }
            (RingKind::Universal, Elem::Multi(x), Elem::Multi(y)) => Ok(Elem::Multi(x.add(y))),
            (RingKind::Twisted { base, .. }, _, _) => base.add(a, b),
            (RingKind::Witt(w), Elem::Vec(x), Elem::Vec(y)) => Ok(Elem::Vec(w.add_coords(x, y)?)),
            _ => Err(self.shape_error(a, b)),
        }
    }

    pub fn neg(&self, a: &Elem) -> Result<Elem> {
        match (self.kind(), a) {
            (RingKind::Integers, Elem::Int(x)) => Ok(Elem::Int(-x)),
            (RingKind::IntegersMod(m), Elem::Int(x)) => {
                Ok(Elem::Int(if x.is_zero() { x.clone() } else { m - x }))
            }
            (RingKind::PolyQ, Elem::Poly(x)) => Ok(Elem::Poly(x.neg())),
            (RingKind::Dual, Elem::Dual(a0, a1)) => Ok(Elem::Dual(-a0, -a1)),
            (RingKind::Universal, Elem::Multi(x)) => Ok(Elem::Multi(x.neg())),
            (RingKind::Twisted { base, .. }, _) => base.neg(a),
            (RingKind::Witt(w), Elem::Vec(x)) => Ok(Elem::Vec(w.neg_coords(x)?)),
            _ => Err(self.shape_error(a, a)),
        }
    }

    pub fn sub(&self, a: &Elem, b: &Elem) -> Result<Elem> {
        match (self.kind(), a, b) {
            (RingKind::Integers, Elem::Int(x), Elem::Int(y)) => Ok(Elem::Int(x - y)),
            (RingKind::IntegersMod(m), Elem::Int(x), Elem::Int(y)) => {
                Ok(Elem::Int((x - y).mod_floor(m)))
            }
            (RingKind::PolyQ, Elem::Poly(x), Elem::Poly(y)) => Ok(Elem::Poly(x.sub(y))),
            (RingKind::Universal, Elem::Multi(x), Elem::Multi(y)) => Ok(Elem::Multi(x.sub(y))),
            _ => self.add(a, &self.neg(b)?),
        }
    }

    pub fn mul(&self, a: &Elem, b: &Elem) -> Result<Elem> {
        match (self.kind(), a, b) {
            (RingKind::Integers, Elem::Int(x), Elem::Int(y)) => Ok(Elem::Int(x * y)),
            (RingKind::IntegersMod(m), Elem::Int(x), Elem::Int(y)) => Ok(Elem::Int((x * y) % m)),
            (RingKind::PolyQ, Elem::Poly(x), Elem::Poly(y)) => Ok(Elem::Poly(x.mul(y))),
            (RingKind::Dual, Elem::Dual(a0, a1), Elem::Dual(b0, b1)) => {
                Ok(Elem::Dual(a0 * b0, a0 * b1 + a1 * b0))
            }
            (RingKind::Universal, Elem::Multi(x), Elem::Multi(y)) => Ok(Elem::Multi(x.mul(y))),
            (RingKind::Twisted { base, twist }, _, _) => {
                let prod = base.mul(a, b)?;
                self.root().mul(twist, &prod)
            }
            (RingKind::Witt(w), Elem::Vec(x), Elem::Vec(y)) => Ok(Elem::Vec(w.mul_coords(x, y)?)),
            _ => Err(self.shape_error(a, b)),
        }
    }

    /// `a^e` for `e ≥ 1`; no identity is needed.
    pub fn pow(&self, a: &Elem, e: u32) -> Result<Elem> {
        assert!(e >= 1, "pow needs a positive exponent in a non-unital ring");
        let mut result: Option<Elem> = None;
        let mut base = a.clone();
        let mut e = e;
        loop {
            if e & 1 == 1 {
                result = Some(match result {
                    None => base.clone(),
                    Some(r) => self.mul(&r, &base)?,
                });
            }
            e >>= 1;
            if e == 0 {
                break;
            }
            base = self.mul(&base, &base)?;
        }
        Ok(result.expect("exponent is positive"))
    }

    /// The ℤ-action `k·a`.
    pub fn int_scale(&self, a: &Elem, k: &BigInt) -> Result<Elem> {
        match (self.kind(), a) {
            (RingKind::Integers, Elem::Int(x)) => Ok(Elem::Int(x * k)),
            (RingKind::IntegersMod(m), Elem::Int(x)) => Ok(Elem::Int((x * k).mod_floor(m))),
            (RingKind::PolyQ, Elem::Poly(x)) => Ok(Elem::Poly(x.scale(k))),
            (RingKind::Dual, Elem::Dual(a0, a1)) => Ok(Elem::Dual(a0 * k, a1 * k)),
            (RingKind::Universal, Elem::Multi(x)) => Ok(Elem::Multi(x.scale(k))),
            (RingKind::Twisted { base, .. }, _) => base.int_scale(a, k),
            (RingKind::Witt(_), Elem::Vec(_)) => {
                // Double-and-add: works over any base ring, torsion or not.
                let mut acc = self.zero();
                let mut base = if k.is_negative() {
                    self.neg(a)?
                } else {
                    a.clone()
                };
                let mut e = k.abs();
                while !e.is_zero() {
                    if e.is_odd() {
                        acc = self.add(&acc, &base)?;
                    }
                    e >>= 1;
                    if !e.is_zero() {
                        base = self.add(&base, &base)?;
                    }
                }
                Ok(acc)
            }
            _ => Err(self.shape_error(a, a)),
        }
    }

    pub fn int_scale_i64(&self, a: &Elem, k: i64) -> Result<Elem> {
        self.int_scale(a, &BigInt::from(k))
    }

    pub fn is_zero(&self, a: &Elem) -> bool {
        match a {
            Elem::Int(x) => x.is_zero(),
            Elem::Poly(p) => p.is_zero(),
            Elem::Dual(x, y) => x.is_zero() && y.is_zero(),
            Elem::Multi(p) => p.is_zero(),
            Elem::Vec(v) => match self.as_witt() {
                Some(w) => v.iter().all(|c| w.base().is_zero(c)),
                None => false,
            },
        }
    }

    /// Elements are kept in canonical form, so equality is structural.
    pub fn eq(&self, a: &Elem, b: &Elem) -> bool {
        a == b
    }

    /// Returns the unique `b` with `k·b = a`.
    pub fn try_div_int(&self, a: &Elem, k: &BigInt) -> Result<Elem> {
        if !k.is_positive() {
            return Err(Error::NotDivisible(format!(
                "{k} (divisor must be positive)"
            )));
        }
        let not_div = || Error::NotDivisible(k.to_string());
        match (self.kind(), a) {
            (RingKind::Integers, Elem::Int(x)) => {
                let (q, r) = x.div_rem(k);
                if r.is_zero() {
                    Ok(Elem::Int(q))
                } else {
                    Err(not_div())
                }
            }
            (RingKind::IntegersMod(m), Elem::Int(x)) => {
                let g = k.gcd(m);
                if !x.is_multiple_of(&g) {
                    return Err(not_div());
                }
                if !g.is_one() {
                    return Err(Error::NonUniqueQuotient(format!("{k} in {self}")));
                }
                let inv = mod_inverse(&k.mod_floor(m), m).expect("k is coprime to m");
                Ok(Elem::Int((x * inv).mod_floor(m)))
            }
            (RingKind::PolyQ, Elem::Poly(x)) => x.div_int(k).map(Elem::Poly).ok_or_else(not_div),
            (RingKind::Dual, Elem::Dual(a0, a1)) => {
                if a0.is_multiple_of(k) && a1.is_multiple_of(k) {
                    Ok(Elem::Dual(a0 / k, a1 / k))
                } else {
                    Err(not_div())
                }
            }
            (RingKind::Universal, Elem::Multi(x)) => {
                x.try_div_int(k).map(Elem::Multi).ok_or_else(not_div)
            }
            (RingKind::Twisted { base, .. }, _) => base.try_div_int(a, k),
            (RingKind::Witt(w), Elem::Vec(x)) => Ok(Elem::Vec(w.try_div_int_coords(x, k)?)),
            _ => Err(self.shape_error(a, a)),
        }
    }

    pub fn try_div_int_u64(&self, a: &Elem, k: u64) -> Result<Elem> {
        self.try_div_int(a, &BigInt::from(k))
    }

    /// Whether `a ∈ p^e · R`.
    pub fn is_divisible_mod(&self, a: &Elem, p: u64, e: u32) -> Result<bool> {
        let pe: BigInt = BigInt::from(p).pow(e);
        match (self.kind(), a) {
            (RingKind::Integers, Elem::Int(x)) => Ok(x.is_multiple_of(&pe)),
            (RingKind::IntegersMod(m), Elem::Int(x)) => Ok(x.is_multiple_of(&pe.gcd(m))),
            (RingKind::PolyQ, Elem::Poly(x)) => {
                Ok(x.coeffs().iter().all(|c| c.is_multiple_of(&pe)))
            }
            (RingKind::Dual, Elem::Dual(a0, a1)) => {
                Ok(a0.is_multiple_of(&pe) && a1.is_multiple_of(&pe))
            }
            (RingKind::Universal, Elem::Multi(x)) => Ok(x.is_divisible_by(&pe)),
            (RingKind::Twisted { base, .. }, _) => base.is_divisible_mod(a, p, e),
            (RingKind::Witt(_), Elem::Vec(_)) => {
                if self.is_torsion_free() {
                    match self.try_div_int(a, &pe) {
                        Ok(_) => Ok(true),
                        Err(Error::NotDivisible(_)) | Err(Error::NotInGhostImage(_)) => Ok(false),
                        Err(e) => Err(e),
                    }
                } else if self.is_finite() {
                    Ok(!self.divisors_by_enumeration(a, &pe, 1)?.is_empty())
                } else {
                    Err(Error::Unsupported(format!("divisibility test in {self}")))
                }
            }
            _ => Err(self.shape_error(a, a)),
        }
    }

    /// Solutions `b` of `k·b = a`, found by enumerating the (finite) ring.
    /// Stops after `limit` solutions.
    pub fn divisors_by_enumeration(&self, a: &Elem, k: &BigInt, limit: usize) -> Result<Vec<Elem>> {
        let mut out = Vec::new();
        for b in self.elements(DEFAULT_ENUM_LIMIT)? {
            if &self.int_scale(&b, k)? == a {
                out.push(b);
                if out.len() >= limit {
                    break;
                }
            }
        }
        Ok(out)
    }

    /// Multiplicative inverse of a unit of an untwisted unital ring.
    pub fn inverse(&self, a: &Elem) -> Option<Elem> {
        match (self.kind(), a) {
            (RingKind::Integers, Elem::Int(x)) if x.abs().is_one() => Some(a.clone()),
            (RingKind::IntegersMod(m), Elem::Int(x)) => mod_inverse(x, m).map(Elem::Int),
            (RingKind::PolyQ, Elem::Poly(p)) if p.is_constant() && p.coeff(0).abs().is_one() => {
                Some(a.clone())
            }
            (RingKind::Universal, Elem::Multi(p))
                if p.num_terms() == 1 && p.constant_term().abs().is_one() =>
            {
                Some(a.clone())
            }
            (RingKind::Dual, Elem::Dual(a0, a1)) if a0.abs().is_one() => {
                Some(Elem::Dual(a0.clone(), -a1))
            }
            (RingKind::Twisted { .. }, _) | (RingKind::Witt(_), _) => {
                let one = self.one()?;
                self.elements(DEFAULT_ENUM_LIMIT)
                    .ok()?
                    .into_iter()
                    .find(|b| self.mul(a, b).map(|p| p == one).unwrap_or(false))
            }
            _ => None,
        }
    }

    pub fn is_zero_divisor(&self, a: &Elem) -> bool {
        match (self.kind(), a) {
            (RingKind::Integers, Elem::Int(x)) => x.is_zero(),
            (RingKind::IntegersMod(m), Elem::Int(x)) => !x.gcd(m).is_one() && !m.is_one(),
            (RingKind::PolyQ, Elem::Poly(p)) => p.is_zero(),
            (RingKind::Universal, Elem::Multi(p)) => p.is_zero(),
            (RingKind::Dual, Elem::Dual(a0, _)) => a0.is_zero(),
            _ => true,
        }
    }

    /// The unit group, when it can be listed.
    pub fn units(&self) -> Result<Vec<Elem>> {
        match self.kind() {
            RingKind::Integers | RingKind::PolyQ | RingKind::Universal => {
                Ok(vec![self.from_int(1)?, self.from_int(-1)?])
            }
            RingKind::IntegersMod(m) => {
                let m = m
                    .to_u64()
                    .ok_or_else(|| Error::BudgetExceeded(format!("units of {self}")))?;
                if m == 1 {
                    return Ok(vec![Elem::int(0)]);
                }
                Ok((1..m)
                    .filter(|k| k.gcd(&m) == 1)
                    .map(|k| Elem::Int(BigInt::from(k)))
                    .collect())
            }
            RingKind::Dual => Err(Error::Unsupported(format!(
                "the unit group of {self} is infinite"
            ))),
            RingKind::Twisted { .. } => {
                // x ∗ y = t·x·y, so x is a unit exactly when it is one in the root.
                if self.one().is_none() {
                    return Ok(Vec::new());
                }
                self.root().units()
            }
            RingKind::Witt(_) => {
                let Some(one) = self.one() else {
                    return Ok(Vec::new());
                };
                let elems = self.elements(DEFAULT_ENUM_LIMIT)?;
                let mut out = Vec::new();
                for a in &elems {
                    for b in &elems {
                        if self.mul(a, b)? == one {
                            out.push(a.clone());
                            break;
                        }
                    }
                }
                Ok(out)
            }
        }
    }

    pub fn size(&self) -> Option<BigInt> {
        match self.kind() {
            RingKind::IntegersMod(m) => Some(m.clone()),
            RingKind::Twisted { base, .. } => base.size(),
            RingKind::Witt(w) => Some(w.base().size()?.pow(w.set().len() as u32)),
            _ => None,
        }
    }

    /// All elements of a finite ring, in a fixed order.
    pub fn elements(&self, limit: u64) -> Result<Vec<Elem>> {
        let size = self
            .size()
            .ok_or_else(|| Error::Unsupported(format!("cannot enumerate infinite ring {self}")))?;
        if size > BigInt::from(limit) {
            return Err(Error::BudgetExceeded(format!(
                "{self} has {size} elements (limit {limit})"
            )));
        }
        match self.kind() {
            RingKind::IntegersMod(m) => {
                let m = m.to_u64().expect("bounded by limit");
                Ok((0..m).map(|k| Elem::Int(BigInt::from(k))).collect())
            }
            RingKind::Twisted { base, .. } => base.elements(limit),
            RingKind::Witt(w) => {
                let base = w.base().elements(limit)?;
                let mut out: Vec<Vec<Elem>> = vec![Vec::new()];
                for _ in 0..w.set().len() {
                    out = out
                        .into_iter()
                        .flat_map(|prefix| {
                            base.iter().map(move |b| {
                                let mut v = prefix.clone();
                                v.push(b.clone());
                                v
                            })
                        })
                        .collect();
                }
                Ok(out.into_iter().map(Elem::Vec).collect())
            }
            _ => unreachable!("size() is None for infinite rings"),
        }
    }

    /// A random element with small coefficients.
    pub fn random<R: Rng + ?Sized>(&self, rng: &mut R) -> Elem {
        match self.kind() {
            RingKind::Integers => Elem::int(rng.gen_range(-10..=10)),
            RingKind::IntegersMod(m) => {
                let m = m.to_u64().unwrap_or(u64::MAX);
                Elem::Int(BigInt::from(rng.gen_range(0..m)))
            }
            RingKind::PolyQ => {
                let deg = rng.gen_range(0..=2);
                Elem::Poly(UPoly::from_coeffs(
                    (0..=deg)
                        .map(|_| BigInt::from(rng.gen_range(-4..=4)))
                        .collect(),
                ))
            }
            RingKind::Dual => Elem::Dual(
                BigInt::from(rng.gen_range(-10..=10)),
                BigInt::from(rng.gen_range(-10..=10)),
            ),
            RingKind::Universal => Elem::Multi(MPoly::constant(rng.gen_range(-10..=10))),
            RingKind::Twisted { base, .. } => base.random(rng),
            RingKind::Witt(w) => {
                Elem::Vec((0..w.set().len()).map(|_| w.base().random(rng)).collect())
            }
        }
    }

    /// Parses a scalar written in the expression grammar (`2*q^2-1`, `3+eps`).
    pub fn parse_elem(&self, s: &str) -> Result<Elem> {
        let root = self.root();
        if root.as_witt().is_some() {
            return Err(Error::Parse(format!(
                "elements of {self} are written as coordinate objects"
            )));
        }
        let e = Expr::parse(s)?;
        let v = e.eval(&RingTarget(root))?;
        self.check(&v)?;
        Ok(v)
    }

    pub fn elem_to_json(&self, a: &Elem) -> Value {
        match (self.kind(), a) {
            (RingKind::Witt(w), Elem::Vec(v)) => {
                let coords: serde_json::Map<String, Value> = w
                    .set()
                    .iter()
                    .zip(v)
                    .map(|(n, c)| (n.to_string(), w.base().elem_to_json(c)))
                    .collect();
                json!({ "coords": coords })
            }
            (RingKind::Twisted { base, .. }, _) => base.elem_to_json(a),
            (_, Elem::Multi(p)) => serde_json::to_value(p).expect("polynomials serialize"),
            _ => Value::String(a.to_string()),
        }
    }

    pub fn elem_from_json(&self, v: &Value) -> Result<Elem> {
        match self.kind() {
            RingKind::Witt(w) => {
                let coords = v.get("coords").and_then(Value::as_object).ok_or_else(|| {
                    Error::Parse(format!("expected {{\"coords\": ...}} for {self}"))
                })?;
                let mut out = Vec::with_capacity(w.set().len());
                for n in w.set().iter() {
                    let c = coords
                        .get(&n.to_string())
                        .ok_or_else(|| Error::Parse(format!("missing coordinate {n}")))?;
                    out.push(w.base().elem_from_json(c)?);
                }
                if coords.len() != out.len() {
                    return Err(Error::Parse(format!("coordinates outside {}", w.set())));
                }
                Ok(Elem::Vec(out))
            }
            RingKind::Twisted { base, .. } => base.elem_from_json(v),
            RingKind::Universal if v.is_object() => {
                let p: MPoly =
                    serde_json::from_value(v.clone()).map_err(|e| Error::Parse(e.to_string()))?;
                Ok(Elem::Multi(p))
            }
            _ => match v {
                Value::String(s) => self.parse_elem(s),
                Value::Number(n) => self.parse_elem(&n.to_string()),
                _ => Err(Error::Parse(format!(
                    "expected a scalar for {self}, got {v}"
                ))),
            },
        }
    }

    fn shape_error(&self, a: &Elem, b: &Elem) -> Error {
        Error::mismatch(format!("operands {a} and {b} do not belong to {self}"))
    }
}

impl PartialEq for Ring {
    fn eq(&self, other: &Ring) -> bool {
        if self.ptr_eq(other) {
            return true;
        }
        match (self.kind(), other.kind()) {
            (RingKind::Integers, RingKind::Integers)
            | (RingKind::PolyQ, RingKind::PolyQ)
            | (RingKind::Dual, RingKind::Dual)
            | (RingKind::Universal, RingKind::Universal) => true,
            (RingKind::IntegersMod(a), RingKind::IntegersMod(b)) => a == b,
            (
                RingKind::Twisted {
                    base: b1,
                    twist: t1,
                },
                RingKind::Twisted {
                    base: b2,
                    twist: t2,
                },
            ) => b1 == b2 && t1 == t2,
            (RingKind::Witt(a), RingKind::Witt(b)) => a.same_as(b),
            _ => false,
        }
    }
}

impl fmt::Display for Ring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind() {
            RingKind::Integers => write!(f, "z"),
            RingKind::IntegersMod(m) => write!(f, "zmod:{m}"),
            RingKind::PolyQ => write!(f, "zq"),
            RingKind::Dual => write!(f, "dual"),
            RingKind::Universal => write!(f, "universal"),
            RingKind::Twisted { base, twist } => write!(f, "twist:{base}:{twist}"),
            RingKind::Witt(w) => write!(f, "{w}"),
        }
    }
}

impl fmt::Debug for Ring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Ring({self})")
    }
}

impl std::str::FromStr for Ring {
    type Err = Error;

    /// Descriptors: `z`, `zmod:6`, `zq`, `dual`, `twist:<base>:<r>`, `witt:<base>:<set>`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "z" => return Ok(Ring::integers()),
            "zq" => return Ok(Ring::zq()),
            "dual" => return Ok(Ring::dual()),
            "universal" => return Ok(Ring::universal()),
            _ => {}
        }
        if let Some(m) = s.strip_prefix("zmod:") {
            let m: BigInt = m
                .parse()
                .map_err(|_| Error::Parse(format!("bad modulus in {s:?}")))?;
            return Ring::zmod_big(m);
        }
        if let Some(rest) = s.strip_prefix("twist:") {
            let (base, r) = rest
                .rsplit_once(':')
                .ok_or_else(|| Error::Parse(format!("expected twist:<base>:<r>, got {s:?}")))?;
            let base: Ring = base.parse()?;
            let r = base.root().parse_elem(r)?;
            return Ring::twisted(base, r);
        }
        if let Some(rest) = s.strip_prefix("witt:") {
            let (base, set) = rest
                .rsplit_once(':')
                .ok_or_else(|| Error::Parse(format!("expected witt:<base>:<set>, got {s:?}")))?;
            let base: Ring = base.parse()?;
            let set = set.parse()?;
            return WittRing::classical(set, base).map(|w| w.ring());
        }
        Err(Error::Parse(format!("unknown ring descriptor {s:?}")))
    }
}

/// Evaluates parsed expressions directly in an untwisted ring.
struct RingTarget<'a>(&'a Ring);

impl ExprTarget for RingTarget<'_> {
    type Value = Elem;

    fn int(&self, k: &BigInt) -> Result<Elem> {
        self.0.from_int(k.clone())
    }

    fn var(&self, name: &str) -> Result<Elem> {
        let ring = self.0;
        match (ring.kind(), name) {
            (RingKind::PolyQ, "q") => Ok(Elem::Poly(UPoly::q())),
            (RingKind::Dual, "eps") => Ok(Elem::Dual(BigInt::zero(), BigInt::one())),
            (RingKind::Universal, _) => Ok(Elem::Multi(MPoly::var(name.parse::<Var>()?))),
            _ => Err(Error::Parse(format!(
                "variable {name:?} does not exist in {ring}"
            ))),
        }
    }

    fn add(&self, a: &Elem, b: &Elem) -> Result<Elem> {
        self.0.add(a, b)
    }

    fn neg(&self, a: &Elem) -> Result<Elem> {
        self.0.neg(a)
    }

    fn mul(&self, a: &Elem, b: &Elem) -> Result<Elem> {
        self.0.mul(a, b)
    }

    fn pow(&self, a: &Elem, e: u32) -> Result<Elem> {
        if e == 0 {
            return self.int(&BigInt::one());
        }
        self.0.pow(a, e)
    }
}

pub(crate) fn mod_inverse(a: &BigInt, m: &BigInt) -> Option<BigInt> {
    if m.is_one() {
        return Some(BigInt::zero());
    }
    let e = a.mod_floor(m).extended_gcd(m);
    if e.gcd.is_one() {
        Some(e.x.mod_floor(m))
    } else {
        None
    }
}

fn is_squarefree(m: &BigInt) -> bool {
    let Some(mut m) = m.to_u64() else {
        return false;
    };
    let mut p = 2u64;
    while p * p <= m {
        if m % p == 0 {
            m /= p;
            if m % p == 0 {
                return false;
            }
        }
        p += 1;
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn zq(s: &str) -> Elem {
        Ring::zq().parse_elem(s).unwrap()
    }

    #[test]
    fn element_op_examples() {
        let z6 = Ring::zmod(6);
        assert_eq!(z6.add(&Elem::int(4), &Elem::int(5)).unwrap(), Elem::int(3));
        let tw = Ring::twisted(Ring::integers(), Elem::int(2)).unwrap();
        assert_eq!(tw.mul(&Elem::int(3), &Elem::int(5)).unwrap(), Elem::int(30));
        let dual = Ring::dual();
        let eps = dual.parse_elem("eps").unwrap();
        assert!(dual.is_zero(&dual.mul(&eps, &eps).unwrap()));
        assert!(z6.add(&Elem::int(1), &zq("q")).is_err());
    }

    #[test]
    fn try_div_int_examples() {
        let z = Ring::integers();
        assert_eq!(z.try_div_int_u64(&Elem::int(6), 3).unwrap(), Elem::int(2));
        assert!(matches!(
            z.try_div_int_u64(&Elem::int(7), 3),
            Err(Error::NotDivisible(_))
        ));
        assert_eq!(
            Ring::zq().try_div_int_u64(&zq("2*q^2-2*q"), 2).unwrap(),
            zq("q^2-q")
        );
        let z6 = Ring::zmod(6);
        assert_eq!(z6.try_div_int_u64(&Elem::int(2), 5).unwrap(), Elem::int(4));
        assert!(matches!(
            z6.try_div_int_u64(&Elem::int(2), 2),
            Err(Error::NonUniqueQuotient(_))
        ));
        assert!(matches!(
            z6.try_div_int_u64(&Elem::int(3), 2),
            Err(Error::NotDivisible(_))
        ));
    }

    #[test]
    fn is_divisible_mod_examples() {
        let z = Ring::integers();
        assert!(z.is_divisible_mod(&Elem::int(12), 2, 2).unwrap());
        assert!(!z.is_divisible_mod(&Elem::int(12), 2, 3).unwrap());
        assert!(Ring::zq().is_divisible_mod(&zq("2*q-2"), 2, 1).unwrap());
        assert!(Ring::zmod(6).is_divisible_mod(&Elem::int(4), 2, 3).unwrap());
        assert!(!Ring::zmod(6).is_divisible_mod(&Elem::int(3), 2, 1).unwrap());
    }

    #[test]
    fn unit_examples() {
        assert_eq!(
            Ring::zmod(6).units().unwrap(),
            vec![Elem::int(1), Elem::int(5)]
        );
        assert_eq!(
            Ring::integers().units().unwrap(),
            vec![Elem::int(1), Elem::int(-1)]
        );
        assert_eq!(Ring::zq().units().unwrap(), vec![zq("1"), zq("-1")]);
        assert!(Ring::dual().units().is_err());
    }

    #[test]
    fn twisted_identity_and_composition() {
        let z7 = Ring::zmod(7);
        let tw = Ring::twisted(z7.clone(), Elem::int(3)).unwrap();
        let one = tw.one().unwrap();
        assert_eq!(one, Elem::int(5)); // 3⁻¹ mod 7
        for k in 0..7 {
            assert_eq!(tw.mul(&one, &Elem::int(k)).unwrap(), Elem::int(k));
        }
        assert!(Ring::twisted(Ring::integers(), Elem::int(2))
            .unwrap()
            .one()
            .is_none());

        let twice = Ring::twisted(
            Ring::twisted(Ring::integers(), Elem::int(2)).unwrap(),
            Elem::int(5),
        )
        .unwrap();
        assert_eq!(
            twice.mul(&Elem::int(3), &Elem::int(7)).unwrap(),
            Elem::int(2 * 5 * 21)
        );
    }

    #[test]
    fn flags() {
        assert!(Ring::zmod(6).is_reduced());
        assert!(!Ring::zmod(4).is_reduced());
        assert!(!Ring::dual().is_reduced());
        assert!(Ring::integers().is_torsion_free());
        assert!(!Ring::zmod(4).is_torsion_free());
        assert!(!Ring::twisted(Ring::integers(), Elem::int(0))
            .unwrap()
            .is_reduced());
    }

    #[test]
    fn descriptors_round_trip() {
        for d in [
            "z",
            "zmod:6",
            "zq",
            "dual",
            "twist:z:2",
            "twist:zq:q",
            "witt:z:1,3",
        ] {
            let r: Ring = d.parse().unwrap();
            let again: Ring = r.to_string().parse().unwrap();
            assert_eq!(r, again, "{d}");
        }
        assert!("zmod:0".parse::<Ring>().is_err());
        assert!("foo".parse::<Ring>().is_err());
    }

    #[test]
    fn json_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for d in [
            "z",
            "zmod:9",
            "zq",
            "dual",
            "twist:zq:q",
            "witt:zq:1,2",
            "witt:witt:z:1,3:1,2",
        ] {
            let r: Ring = d.parse().unwrap();
            for _ in 0..20 {
                let a = r.random(&mut rng);
                let back = r.elem_from_json(&r.elem_to_json(&a)).unwrap();
                assert_eq!(a, back, "{d}");
            }
        }
    }

    fn axioms_hold(ring: &Ring, a: &Elem, b: &Elem, c: &Elem) -> bool {
        let add = |x: &Elem, y: &Elem| ring.add(x, y).unwrap();
        let mul = |x: &Elem, y: &Elem| ring.mul(x, y).unwrap();
        add(&add(a, b), c) == add(a, &add(b, c))
            && add(a, b) == add(b, a)
            && mul(&mul(a, b), c) == mul(a, &mul(b, c))
            && mul(a, b) == mul(b, a)
            && mul(a, &add(b, c)) == add(&mul(a, b), &mul(a, c))
            && ring.is_zero(&add(a, &ring.neg(a).unwrap()))
            && mul(&ring.int_scale_i64(a, 3).unwrap(), b)
                == ring.int_scale_i64(&mul(a, b), 3).unwrap()
    }

    #[test]
    fn ring_axioms_on_random_triples() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for d in [
            "z",
            "zmod:6",
            "zmod:9",
            "zq",
            "dual",
            "twist:z:2",
            "twist:zq:q",
            "twist:zmod:6:4",
        ] {
            let r: Ring = d.parse().unwrap();
            for _ in 0..1000 {
                let (a, b, c) = (r.random(&mut rng), r.random(&mut rng), r.random(&mut rng));
                assert!(axioms_hold(&r, &a, &b, &c), "{d}: {a}, {b}, {c}");
            }
        }
    }

    #[test]
    fn division_inverts_scaling() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for d in ["z", "zq", "dual", "twist:zq:q"] {
            let r: Ring = d.parse().unwrap();
            for _ in 0..200 {
                let a = r.random(&mut rng);
                let k = BigInt::from(rng.gen_range(1..=12));
                assert_eq!(r.try_div_int(&r.int_scale(&a, &k).unwrap(), &k).unwrap(), a);
            }
        }
    }
}
