//! Witt vectors of inductive systems of rings.
//!
//! An ind-system assigns a ring `A_n` to each `n ∈ S` with transition maps
//! `π_{d,n}: A_d → A_n`. `W_S(Ā) = ∏ A_n` carries the ring structure obtained
//! by evaluating the classical Witt polynomials at `n` on the pushed
//! coordinates `π_{d,n}(a_d)`, `d | n`.

use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::mpoly::{MPoly, Var};
use crate::report::Report;
use crate::rings::{Elem, Ring, RingKind, UPoly};
use crate::truncset::{factorize, prime_chain, valuation, TruncationSet};
use crate::universal::{derive, frobenius_mod_p_quotient, Family, UniversalPolySet};

pub type SysRef = Arc<dyn IndSystem>;

pub trait IndSystem: Send + Sync {
    fn name(&self) -> String;
    fn set(&self) -> &TruncationSet;
    fn ring(&self, n: u64) -> Result<Ring>;
    /// `π_{d,n}: A_d → A_n` for `d | n`.
    fn transition(&self, d: u64, n: u64, a: &Elem) -> Result<Elem>;

    fn has_lifts(&self) -> bool {
        false
    }

    /// `φ_p: A_{n/p} → A_n`.
    fn lift(&self, p: u64, n: u64, _a: &Elem) -> Result<Elem> {
        Err(Error::Unsupported(format!(
            "{} has no Frobenius lift φ_{p} into index {n}",
            self.name()
        )))
    }

    /// `(inner, n)` when this system is `F_n` of `inner`.
    fn as_shift(&self) -> Option<(SysRef, u64)> {
        None
    }

    /// `(inner, T)` when this system is the restriction of `inner` to `T`.
    fn as_restriction(&self) -> Option<(SysRef, TruncationSet)> {
        None
    }
}

fn require_step(s: &TruncationSet, d: u64, n: u64) -> Result<()> {
    s.require(d)?;
    s.require(n)?;
    if !n.is_multiple_of(d) {
        return Err(Error::Parse(format!("{d} does not divide {n}")));
    }
    Ok(())
}

fn require_lift(s: &TruncationSet, p: u64, n: u64) -> Result<()> {
    if !crate::truncset::is_prime(p) {
        return Err(Error::Parse(format!("{p} is not prime")));
    }
    require_step(s, n / p.max(1), n)?;
    if !n.is_multiple_of(p) {
        return Err(Error::Parse(format!("{p} does not divide {n}")));
    }
    Ok(())
}

/// Frobenius lifts on a single ring, used by the constant fixtures.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Lift {
    None,
    Identity,
    /// `f(q) ↦ f(q^p)` on ℤ[q].
    QPower,
}

fn apply_lift(lift: Lift, p: u64, a: &Elem) -> Result<Elem> {
    match (lift, a) {
        (Lift::Identity, _) => Ok(a.clone()),
        (Lift::QPower, Elem::Poly(f)) => Ok(Elem::Poly(f.frobenius(p as usize))),
        (Lift::QPower, Elem::Int(_)) => Ok(a.clone()),
        _ => Err(Error::Unsupported(format!("no lift of {a}"))),
    }
}

/// `A_n = A` for all `n`, `π = id`.
pub struct ConstantInd {
    ring: Ring,
    set: TruncationSet,
    lift: Lift,
}

#[allow(clippy::new_ret_no_self)]
impl ConstantInd {
    pub fn new(ring: Ring, set: TruncationSet, lift: Lift) -> SysRef {
        Arc::new(ConstantInd { ring, set, lift })
    }

    /// ℤ with `φ_p = id`.
    pub fn integers(set: TruncationSet) -> SysRef {
        Self::new(Ring::integers(), set, Lift::Identity)
    }

    /// ℤ[q] with `φ_p(f) = f(q^p)`.
    pub fn q_power(set: TruncationSet) -> SysRef {
        Self::new(Ring::zq(), set, Lift::QPower)
    }
}

impl IndSystem for ConstantInd {
    fn name(&self) -> String {
        match self.lift {
            Lift::QPower => "qpow".into(),
            _ => format!("const:{}", self.ring),
        }
    }

    fn set(&self) -> &TruncationSet {
        &self.set
    }

    fn ring(&self, n: u64) -> Result<Ring> {
        self.set.require(n)?;
        Ok(self.ring.clone())
    }

    fn transition(&self, d: u64, n: u64, a: &Elem) -> Result<Elem> {
        require_step(&self.set, d, n)?;
        Ok(a.clone())
    }

    fn has_lifts(&self) -> bool {
        self.lift != Lift::None
    }

    fn lift(&self, p: u64, n: u64, a: &Elem) -> Result<Elem> {
        require_lift(&self.set, p, n)?;
        apply_lift(self.lift, p, a)
    }
}

/// `A_n = A`, `π_{d,n} = 0` for `d ≠ n`.
pub struct TrivialInd {
    ring: Ring,
    set: TruncationSet,
}

#[allow(clippy::new_ret_no_self)]
impl TrivialInd {
    pub fn new(ring: Ring, set: TruncationSet) -> SysRef {
        Arc::new(TrivialInd { ring, set })
    }
}

impl IndSystem for TrivialInd {
    fn name(&self) -> String {
        format!("triv:{}", self.ring)
    }

    fn set(&self) -> &TruncationSet {
        &self.set
    }

    fn ring(&self, n: u64) -> Result<Ring> {
        self.set.require(n)?;
        Ok(self.ring.clone())
    }

    fn transition(&self, d: u64, n: u64, a: &Elem) -> Result<Elem> {
        require_step(&self.set, d, n)?;
        Ok(if d == n { a.clone() } else { self.ring.zero() })
    }
}

/// `A_1 = ℤ`, `A_n = ℤ[q]` for `n > 1`, inclusions as transitions and
/// `φ_p(f) = f(q^p)` as lifts.
pub struct MixedChain {
    set: TruncationSet,
}

#[allow(clippy::new_ret_no_self)]
impl MixedChain {
    pub fn new(set: TruncationSet) -> SysRef {
        Arc::new(MixedChain { set })
    }
}

fn to_zq(a: &Elem) -> Result<Elem> {
    match a {
        Elem::Int(k) => Ok(Elem::Poly(UPoly::constant(k.clone()))),
        Elem::Poly(_) => Ok(a.clone()),
        _ => Err(Error::mismatch(format!("{a} is not in z or zq"))),
    }
}

impl IndSystem for MixedChain {
    fn name(&self) -> String {
        "mixed".into()
    }

    fn set(&self) -> &TruncationSet {
        &self.set
    }

    fn ring(&self, n: u64) -> Result<Ring> {
        self.set.require(n)?;
        Ok(if n == 1 { Ring::integers() } else { Ring::zq() })
    }

    fn transition(&self, d: u64, n: u64, a: &Elem) -> Result<Elem> {
        require_step(&self.set, d, n)?;
        if d == 1 && n > 1 {
            to_zq(a)
        } else {
            Ok(a.clone())
        }
    }

    fn has_lifts(&self) -> bool {
        true
    }

    fn lift(&self, p: u64, n: u64, a: &Elem) -> Result<Elem> {
        require_lift(&self.set, p, n)?;
        apply_lift(Lift::QPower, p, &to_zq(a)?)
    }
}

/// `F_n(Ā) = (A_{nν})_{ν ∈ S/n}`.
struct Shifted {
    inner: SysRef,
    n: u64,
    set: TruncationSet,
}

impl IndSystem for Shifted {
    fn name(&self) -> String {
        format!("F_{}({})", self.n, self.inner.name())
    }

    fn set(&self) -> &TruncationSet {
        &self.set
    }

    fn ring(&self, nu: u64) -> Result<Ring> {
        self.set.require(nu)?;
        self.inner.ring(self.n * nu)
    }

    fn transition(&self, d: u64, m: u64, a: &Elem) -> Result<Elem> {
        require_step(&self.set, d, m)?;
        self.inner.transition(self.n * d, self.n * m, a)
    }

    fn has_lifts(&self) -> bool {
        self.inner.has_lifts()
    }

    fn lift(&self, p: u64, m: u64, a: &Elem) -> Result<Elem> {
        require_lift(&self.set, p, m)?;
        self.inner.lift(p, self.n * m, a)
    }

    fn as_shift(&self) -> Option<(SysRef, u64)> {
        Some((self.inner.clone(), self.n))
    }
}

/// `Ā` restricted to a divisor-stable `T ⊂ S`.
struct Restricted {
    inner: SysRef,
    set: TruncationSet,
}

impl IndSystem for Restricted {
    fn name(&self) -> String {
        format!("{}|{}", self.inner.name(), self.set.to_list())
    }

    fn set(&self) -> &TruncationSet {
        &self.set
    }

    fn ring(&self, n: u64) -> Result<Ring> {
        self.set.require(n)?;
        self.inner.ring(n)
    }

    fn transition(&self, d: u64, n: u64, a: &Elem) -> Result<Elem> {
        require_step(&self.set, d, n)?;
        self.inner.transition(d, n, a)
    }

    fn has_lifts(&self) -> bool {
        self.inner.has_lifts()
    }

    fn lift(&self, p: u64, n: u64, a: &Elem) -> Result<Elem> {
        require_lift(&self.set, p, n)?;
        self.inner.lift(p, n, a)
    }

    fn as_restriction(&self) -> Option<(SysRef, TruncationSet)> {
        Some((self.inner.clone(), self.set.clone()))
    }
}

/// `F_n(Ā)`, collapsing iterated shifts so that `F_m F_n Ā` and `F_{mn} Ā`
/// are the same system.
pub fn shifted(sys: &SysRef, n: u64) -> Result<SysRef> {
    let set = sys.set().quotient(n)?;
    if n == 1 {
        return Ok(sys.clone());
    }
    let (inner, n) = match sys.as_shift() {
        Some((inner, m)) => (inner, m * n),
        None => (sys.clone(), n),
    };
    Ok(Arc::new(Shifted { inner, n, set }))
}

/// `Ā|_T`; also serves as `V_n(Ā)` with `T = S/n`.
pub fn restricted(sys: &SysRef, t: &TruncationSet) -> Result<SysRef> {
    if !t.is_subset_of(sys.set()) {
        return Err(Error::NotASubset(t.to_string(), sys.set().to_string()));
    }
    if t == sys.set() {
        return Ok(sys.clone());
    }
    let inner = sys
        .as_restriction()
        .map(|(inner, _)| inner)
        .unwrap_or_else(|| sys.clone());
    Ok(Arc::new(Restricted {
        inner,
        set: t.clone(),
    }))
}

pub fn same_system(a: &SysRef, b: &SysRef) -> bool {
    Arc::ptr_eq(a, b) || (a.set() == b.set() && a.name() == b.name())
}

/// Parses `const:<ring>`, `triv:<ring>`, `qpow` or `mixed`.
pub fn parse_system(desc: &str, set: TruncationSet) -> Result<SysRef> {
    let desc = desc.trim();
    if desc == "qpow" {
        return Ok(ConstantInd::q_power(set));
    }
    if desc == "mixed" {
        return Ok(MixedChain::new(set));
    }
    if let Some(r) = desc.strip_prefix("const:") {
        let ring: Ring = r.parse()?;
        let lift = match ring.kind() {
            RingKind::Integers => Lift::Identity,
            _ => Lift::None,
        };
        return Ok(ConstantInd::new(ring, set, lift));
    }
    if let Some(r) = desc.strip_prefix("triv:") {
        return Ok(TrivialInd::new(r.parse()?, set));
    }
    Err(Error::Parse(format!(
        "unknown ind-system {desc:?} (expected const:<ring>, triv:<ring>, qpow or mixed)"
    )))
}

#[derive(Clone)]
pub struct IndWittVector {
    sys: SysRef,
    coords: Vec<Elem>,
}

impl IndWittVector {
    pub fn new(sys: &SysRef, coords: Vec<Elem>) -> Result<IndWittVector> {
        let s = sys.set();
        if coords.len() != s.len() {
            return Err(Error::mismatch(format!(
                "{} coordinates for {s}",
                coords.len()
            )));
        }
        for (n, c) in s.iter().zip(&coords) {
            sys.ring(n)?.check(c)?;
        }
        Ok(IndWittVector {
            sys: sys.clone(),
            coords,
        })
    }

    pub fn zero(sys: &SysRef) -> Result<IndWittVector> {
        let coords = sys
            .set()
            .iter()
            .map(|n| sys.ring(n).map(|r| r.zero()))
            .collect::<Result<_>>()?;
        Ok(IndWittVector {
            sys: sys.clone(),
            coords,
        })
    }

    pub fn random<R: Rng + ?Sized>(sys: &SysRef, rng: &mut R) -> Result<IndWittVector> {
        let coords = sys
            .set()
            .iter()
            .map(|n| sys.ring(n).map(|r| r.random(rng)))
            .collect::<Result<_>>()?;
        Ok(IndWittVector {
            sys: sys.clone(),
            coords,
        })
    }

    pub fn system(&self) -> &SysRef {
        &self.sys
    }

    pub fn set(&self) -> &TruncationSet {
        self.sys.set()
    }

    pub fn coords(&self) -> &[Elem] {
        &self.coords
    }

    pub fn coord(&self, n: u64) -> Result<&Elem> {
        Ok(&self.coords[self.set().require(n)?])
    }

    pub fn to_json(&self) -> serde_json::Value {
        let map: serde_json::Map<String, serde_json::Value> = self
            .set()
            .iter()
            .zip(&self.coords)
            .map(|(n, c)| {
                let v = self
                    .sys
                    .ring(n)
                    .map(|r| r.elem_to_json(c))
                    .unwrap_or(serde_json::Value::Null);
                (n.to_string(), v)
            })
            .collect();
        serde_json::json!({ "system": self.sys.name(), "coords": map })
    }

    /// Reads `{"1": "3", "2": "q+1"}` (or the same under a `coords` key).
    pub fn from_json(sys: &SysRef, v: &serde_json::Value) -> Result<IndWittVector> {
        let v = v.get("coords").unwrap_or(v);
        let obj = v
            .as_object()
            .ok_or_else(|| Error::Parse("expected an object of coordinates".into()))?;
        let mut coords = Vec::with_capacity(sys.set().len());
        for n in sys.set().iter() {
            let ring = sys.ring(n)?;
            coords.push(match obj.get(&n.to_string()) {
                Some(c) => ring.elem_from_json(c)?,
                None => ring.zero(),
            });
        }
        for k in obj.keys() {
            let n: u64 = k
                .parse()
                .map_err(|_| Error::Parse(format!("bad index {k:?}")))?;
            sys.set().require(n)?;
        }
        IndWittVector::new(sys, coords)
    }
}

impl PartialEq for IndWittVector {
    fn eq(&self, other: &Self) -> bool {
        same_system(&self.sys, &other.sys) && self.coords == other.coords
    }
}

impl fmt::Display for IndWittVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.coords.iter().map(|c| c.to_string()).collect();
        write!(f, "({})", parts.join(", "))
    }
}

impl fmt::Debug for IndWittVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} over {}", self, self.sys.name())
    }
}

fn classical(s: &TruncationSet) -> Result<Arc<UniversalPolySet>> {
    derive(&Family::Classical, s)
}

/// `π_{d,n}(a_d)` for every `d | n` in `S`.
fn pushed(v: &IndWittVector, n: u64) -> Result<Vec<(u64, Elem)>> {
    v.set()
        .divisors_of(n)
        .map(|d| Ok((d, v.sys.transition(d, n, v.coord(d)?)?)))
        .collect()
}

fn eval_pushed(poly: &MPoly, ring: &Ring, xs: &[(u64, Elem)], ys: &[(u64, Elem)]) -> Result<Elem> {
    let look =
        |bank: &[(u64, Elem)], d: u64| bank.iter().find(|(e, _)| *e == d).map(|(_, a)| a.clone());
    poly.eval(ring, &|v| match v {
        Var::X(d) => look(xs, d),
        Var::Y(d) => look(ys, d),
        Var::Q => None,
    })
}

fn require_same(v: &IndWittVector, w: &IndWittVector) -> Result<()> {
    if same_system(&v.sys, &w.sys) {
        Ok(())
    } else {
        Err(Error::mismatch(format!(
            "{} and {}",
            v.sys.name(),
            w.sys.name()
        )))
    }
}

/// `x_n = Σ_{d|n} d·π_{d,n}(a_d)^{n/d}`.
pub fn ind_ghost(v: &IndWittVector) -> Result<Vec<Elem>> {
    v.set()
        .iter()
        .map(|n| {
            let ring = v.sys.ring(n)?;
            let mut acc = ring.zero();
            for (d, a) in pushed(v, n)? {
                let term = ring.int_scale_i64(&ring.pow(&a, (n / d) as u32)?, d as i64)?;
                acc = ring.add(&acc, &term)?;
            }
            Ok(acc)
        })
        .collect()
}

fn binary(
    v: &IndWittVector,
    w: &IndWittVector,
    pick: impl Fn(&UniversalPolySet, u64) -> Result<&MPoly>,
) -> Result<IndWittVector> {
    require_same(v, w)?;
    let polys = classical(v.set())?;
    let coords = v
        .set()
        .iter()
        .map(|n| {
            eval_pushed(
                pick(&polys, n)?,
                &v.sys.ring(n)?,
                &pushed(v, n)?,
                &pushed(w, n)?,
            )
        })
        .collect::<Result<_>>()?;
    Ok(IndWittVector {
        sys: v.sys.clone(),
        coords,
    })
}

pub fn ind_add(v: &IndWittVector, w: &IndWittVector) -> Result<IndWittVector> {
    binary(v, w, |p, n| p.sigma(n))
}

pub fn ind_mul(v: &IndWittVector, w: &IndWittVector) -> Result<IndWittVector> {
    binary(v, w, |p, n| p.pi(n))
}

pub fn ind_neg(v: &IndWittVector) -> Result<IndWittVector> {
    binary(v, v, |p, n| p.neg(n))
}

pub fn ind_sub(v: &IndWittVector, w: &IndWittVector) -> Result<IndWittVector> {
    ind_add(v, &ind_neg(w)?)
}

pub fn ind_pow(v: &IndWittVector, e: u32) -> Result<IndWittVector> {
    if e == 0 {
        return Err(Error::Unsupported(
            "zeroth power in a possibly non-unital ring".into(),
        ));
    }
    let mut acc = v.clone();
    for _ in 1..e {
        acc = ind_mul(&acc, v)?;
    }
    Ok(acc)
}

/// `F_n: W_S(Ā) → W_{S/n}(F_n Ā)`.
pub fn ind_frobenius(v: &IndWittVector, n: u64) -> Result<IndWittVector> {
    let target = shifted(&v.sys, n)?;
    let polys = classical(v.set())?;
    let fs = polys.frobenius(n)?;
    let coords = target
        .set()
        .iter()
        .zip(fs)
        .map(|(nu, f)| eval_pushed(f, &v.sys.ring(n * nu)?, &pushed(v, n * nu)?, &[]))
        .collect::<Result<_>>()?;
    Ok(IndWittVector {
        sys: target,
        coords,
    })
}

/// `V_n: W_{S/n}(V_n Ā) → W_S(Ā)`, `(V_n a)_μ = δ_{n|μ}·π_{μ/n,μ}(a_{μ/n})`.
pub fn ind_verschiebung(target: &SysRef, w: &IndWittVector, n: u64) -> Result<IndWittVector> {
    let source = restricted(target, &target.set().quotient(n)?)?;
    if !same_system(&source, &w.sys) {
        return Err(Error::mismatch(format!(
            "V_{n} expects a vector over {}, got {}",
            source.name(),
            w.sys.name()
        )));
    }
    let coords = target
        .set()
        .iter()
        .map(|mu| {
            if mu % n == 0 {
                target.transition(mu / n, mu, w.coord(mu / n)?)
            } else {
                Ok(target.ring(mu)?.zero())
            }
        })
        .collect::<Result<_>>()?;
    Ok(IndWittVector {
        sys: target.clone(),
        coords,
    })
}

/// `W_S(Ā) → W_T(Ā|_T)`.
pub fn ind_project(v: &IndWittVector, t: &TruncationSet) -> Result<IndWittVector> {
    let sys = restricted(&v.sys, t)?;
    let coords = t
        .iter()
        .map(|n| v.coord(n).cloned())
        .collect::<Result<_>>()?;
    Ok(IndWittVector { sys, coords })
}

/// `res = pr_1: W_S(Ā) → A_1`.
pub fn ind_res(v: &IndWittVector) -> Result<Elem> {
    v.coord(1).cloned()
}

/// `W(α)` for a morphism of ind-systems given by its components `α_n`.
pub fn ind_map(
    v: &IndWittVector,
    target: &SysRef,
    alpha: &dyn Fn(u64, &Elem) -> Result<Elem>,
) -> Result<IndWittVector> {
    if target.set() != v.set() {
        return Err(Error::mismatch(format!(
            "{} and {} are indexed differently",
            v.sys.name(),
            target.name()
        )));
    }
    let coords = v
        .set()
        .iter()
        .zip(&v.coords)
        .map(|(n, a)| alpha(n, a))
        .collect::<Result<Vec<_>>>()?;
    IndWittVector::new(target, coords)
}

/// Transition `W̲(Ā)_d → W̲(Ā)_n` of the nested system: project `S/d → S/n`,
/// then push coordinate `ν` along `π_{dν,nν}`.
pub fn nested_transition(
    base: &SysRef,
    d: u64,
    n: u64,
    w: &IndWittVector,
) -> Result<IndWittVector> {
    require_step(base.set(), d, n)?;
    let source = shifted(base, d)?;
    if !same_system(&source, &w.sys) {
        return Err(Error::mismatch(format!(
            "expected a vector over {}, got {}",
            source.name(),
            w.sys.name()
        )));
    }
    let target = shifted(base, n)?;
    let coords = target
        .set()
        .iter()
        .map(|nu| base.transition(d * nu, n * nu, w.coord(nu)?))
        .collect::<Result<_>>()?;
    Ok(IndWittVector {
        sys: target,
        coords,
    })
}

/// Mod-`p` compatibility of `F_p` with the `p`-th power on samples: the
/// difference `F_p(v) − W_{S/p}(π)(proj(v^p))` equals `p·y`, where `y` is the
/// universal quotient `(F_p(X) − X^p)/p` evaluated on the pushed coordinates.
pub fn ind_frobenius_mod_p_certificate(
    sys: &SysRef,
    p: u64,
    samples: usize,
    seed: u64,
) -> Result<bool> {
    let Some(quotient) = frobenius_mod_p_quotient(&Family::Classical, sys.set(), p)? else {
        return Ok(false);
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sp = sys.set().quotient(p)?;
    for _ in 0..samples {
        let v = IndWittVector::random(sys, &mut rng)?;
        let lhs = ind_frobenius(&v, p)?;
        let power = ind_project(&ind_pow(&v, p as u32)?, &sp)?;
        let rhs = ind_map(&power, lhs.system(), &|nu, a| sys.transition(nu, p * nu, a))?;
        let diff = ind_sub(&lhs, &rhs)?;
        let y_coords = sp
            .iter()
            .zip(quotient.coords())
            .map(|(nu, y)| {
                let y = y.as_multi().expect("universal ring");
                eval_pushed(y, &sys.ring(p * nu)?, &pushed(&v, p * nu)?, &[])
            })
            .collect::<Result<Vec<_>>>()?;
        let y = IndWittVector::new(lhs.system(), y_coords)?;
        let mut py = y.clone();
        for _ in 1..p {
            py = ind_add(&py, &y)?;
        }
        if diff != py {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `φ_k: A_n → A_{kn}`, the composite of prime lifts along the factorization of `k`.
pub fn lift_composite(sys: &SysRef, k: u64, n: u64, a: &Elem) -> Result<Elem> {
    sys.set().require(k * n)?;
    let mut at = n;
    let mut x = a.clone();
    for p in prime_chain(k) {
        at *= p;
        x = sys.lift(p, at, &x)?;
    }
    Ok(x)
}

/// Whether `x` lies in the ghost image: `φ_p(x_{n/p}) ≡ x_n (mod p^{v_p(n)} A_n)`
/// for every prime `p | n`, `n ∈ S`.
pub fn dwork_image_test(sys: &SysRef, x: &[Elem]) -> Result<bool> {
    Ok(dwork_violation(sys, x)?.is_none())
}

fn dwork_violation(sys: &SysRef, x: &[Elem]) -> Result<Option<String>> {
    let s = sys.set();
    if x.len() != s.len() {
        return Err(Error::mismatch(format!(
            "{} ghost components for {s}",
            x.len()
        )));
    }
    if !sys.has_lifts() {
        return Err(Error::Unsupported(format!(
            "{} has no Frobenius lifts",
            sys.name()
        )));
    }
    for (i, n) in s.iter().enumerate() {
        let ring = sys.ring(n)?;
        for (p, e) in factorize(n) {
            let prev = &x[s.require(n / p)?];
            let diff = ring.sub(&x[i], &sys.lift(p, n, prev)?)?;
            if !ring.is_divisible_mod(&diff, p, e)? {
                return Ok(Some(format!(
                    "x_{n} - φ_{p}(x_{}) is not divisible by {p}^{e}",
                    n / p
                )));
            }
        }
    }
    Ok(None)
}

/// Solves `ind_ghost(a) = x` recursively; `NotInImage` when a division fails.
pub fn dwork_invert(sys: &SysRef, x: &[Elem]) -> Result<IndWittVector> {
    let s = sys.set();
    if x.len() != s.len() {
        return Err(Error::mismatch(format!(
            "{} ghost components for {s}",
            x.len()
        )));
    }
    let mut coords: Vec<Elem> = Vec::with_capacity(s.len());
    for (i, n) in s.iter().enumerate() {
        let ring = sys.ring(n)?;
        let mut rest = x[i].clone();
        for d in s.divisors_of(n).filter(|&d| d < n) {
            let a = sys.transition(d, n, &coords[s.require(d)?])?;
            let term = ring.int_scale_i64(&ring.pow(&a, (n / d) as u32)?, d as i64)?;
            rest = ring.sub(&rest, &term)?;
        }
        let a = ring
            .try_div_int(&rest, &BigInt::from(n))
            .map_err(|e| match e {
                Error::NotDivisible(_) => {
                    Error::NotInImage(format!("coordinate {n}: {rest} is not divisible by {n}"))
                }
                e => e,
            })?;
        coords.push(a);
    }
    Ok(IndWittVector {
        sys: sys.clone(),
        coords,
    })
}

/// `λ_n(a) ∈ W_{S/n}(F_n Ā)`, the vector with ghost `(φ_k(a))_{k ∈ S/n}`.
pub fn lambda(sys: &SysRef, n: u64, a: &Elem) -> Result<IndWittVector> {
    sys.ring(n)?.check(a)?;
    let target = shifted(sys, n)?;
    let ghost = target
        .set()
        .iter()
        .map(|k| lift_composite(sys, k, n, a))
        .collect::<Result<Vec<_>>>()?;
    dwork_invert(&target, &ghost)
}

/// `β_n = W̲(α)_n ∘ λ_n`.
pub fn beta(
    sys_a: &SysRef,
    sys_b: &SysRef,
    alpha: &dyn Fn(u64, &Elem) -> Result<Elem>,
    n: u64,
    a: &Elem,
) -> Result<IndWittVector> {
    let l = lambda(sys_a, n, a)?;
    let target = shifted(sys_b, n)?;
    ind_map(&l, &target, &|nu, x| alpha(n * nu, x))
}

/// `β_n` computed from its ghost `(α_{kn}(φ_k(a)))_k`.
pub fn beta_from_ghost(
    sys_a: &SysRef,
    sys_b: &SysRef,
    alpha: &dyn Fn(u64, &Elem) -> Result<Elem>,
    n: u64,
    a: &Elem,
) -> Result<IndWittVector> {
    let target = shifted(sys_b, n)?;
    let ghost = target
        .set()
        .iter()
        .map(|k| alpha(k * n, &lift_composite(sys_a, k, n, a)?))
        .collect::<Result<Vec<_>>>()?;
    dwork_invert(&target, &ghost)
}

fn all_torsion_free(sys: &SysRef) -> bool {
    sys.set()
        .iter()
        .all(|n| sys.ring(n).map(|r| r.is_torsion_free()).unwrap_or(false))
}

fn show(v: &[Elem]) -> String {
    let parts: Vec<String> = v.iter().map(|c| c.to_string()).collect();
    format!("({})", parts.join(", "))
}

fn componentwise(
    sys: &SysRef,
    x: &[Elem],
    y: &[Elem],
    op: impl Fn(&Ring, &Elem, &Elem) -> Result<Elem>,
) -> Result<Vec<Elem>> {
    sys.set()
        .iter()
        .zip(x.iter().zip(y))
        .map(|(n, (a, b))| op(&sys.ring(n)?, a, b))
        .collect()
}

/// Random ghost-side tuple: integer coefficients in `[-bound, bound]`.
pub fn random_tuple<R: Rng + ?Sized>(sys: &SysRef, rng: &mut R, bound: i64) -> Result<Vec<Elem>> {
    sys.set()
        .iter()
        .map(|n| {
            let ring = sys.ring(n)?;
            Ok(match ring.kind() {
                RingKind::Integers => Elem::int(rng.gen_range(-bound..=bound)),
                RingKind::PolyQ => {
                    let deg = rng.gen_range(0..=2);
                    Elem::Poly(UPoly::from_coeffs(
                        (0..=deg)
                            .map(|_| BigInt::from(rng.gen_range(-bound..=bound)))
                            .collect(),
                    ))
                }
                _ => ring.random(rng),
            })
        })
        .collect()
}

fn sampled(
    report: &mut Report,
    name: impl Into<String>,
    samples: usize,
    rng: &mut ChaCha8Rng,
    mut body: impl FnMut(&mut ChaCha8Rng) -> Result<Option<String>>,
) {
    let outcome = (|| {
        for _ in 0..samples {
            if let Some(w) = body(rng)? {
                return Ok(Some(w));
            }
        }
        Ok(None)
    })();
    report.record_sampled(name, outcome);
}

/// Checks the structural facts about `W_S(Ā)` on samples: ring laws of the
/// transitions, the ghost map, `res`, projections, `F`/`V`, mod-`p`
/// Frobenius, the nested system and, when lifts exist, the Dwork lemma and `λ`.
pub fn verify_ind_system(sys: &SysRef, samples: usize, seed: u64) -> Report {
    let mut report = Report::new(format!("indwitt {} {}", sys.name(), sys.set()));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let s = sys.set().clone();

    sampled(
        &mut report,
        "transitions compose",
        samples,
        &mut rng,
        |rng| {
            for n in s.iter() {
                let one = sys.ring(n)?.random(rng);
                if sys.transition(n, n, &one)? != one {
                    return Ok(Some(format!("π_{{{n},{n}}} is not the identity")));
                }
                for d in s.divisors_of(n) {
                    for d1 in s.divisors_of(d) {
                        let a = sys.ring(d1)?.random(rng);
                        let direct = sys.transition(d1, n, &a)?;
                        let via = sys.transition(d, n, &sys.transition(d1, d, &a)?)?;
                        if direct != via {
                            return Ok(Some(format!(
                                "π_{{{d1},{n}}}({a}) = {direct} but via {d}: {via}"
                            )));
                        }
                    }
                }
            }
            Ok(None)
        },
    );

    sampled(
        &mut report,
        "ghost is a ring homomorphism",
        samples,
        &mut rng,
        |rng| {
            let v = IndWittVector::random(sys, rng)?;
            let w = IndWittVector::random(sys, rng)?;
            let (gv, gw) = (ind_ghost(&v)?, ind_ghost(&w)?);
            let sum = componentwise(sys, &gv, &gw, |r, a, b| r.add(a, b))?;
            let prod = componentwise(sys, &gv, &gw, |r, a, b| r.mul(a, b))?;
            if ind_ghost(&ind_add(&v, &w)?)? != sum {
                return Ok(Some(format!("ghost(v + w) differs for v = {v}, w = {w}")));
            }
            if ind_ghost(&ind_mul(&v, &w)?)? != prod {
                return Ok(Some(format!("ghost(v·w) differs for v = {v}, w = {w}")));
            }
            if ind_ghost(&ind_neg(&v)?)? != componentwise(sys, &gv, &gv, |r, a, _| r.neg(a))? {
                return Ok(Some(format!("ghost(-v) differs for v = {v}")));
            }
            Ok(None)
        },
    );

    if all_torsion_free(sys) {
        let mut k = 0usize;
        sampled(
            &mut report,
            "ghost is injective",
            samples,
            &mut rng,
            |rng| {
                k += 1;
                let v = IndWittVector::random(sys, rng)?;
                let w = if k.is_multiple_of(10) {
                    v.clone()
                } else {
                    IndWittVector::random(sys, rng)?
                };
                let (gv, gw) = (ind_ghost(&v)?, ind_ghost(&w)?);
                if dwork_invert(sys, &gv)? != v || dwork_invert(sys, &gw)? != w {
                    return Ok(Some(format!("recursive solve does not recover {v} or {w}")));
                }
                if (gv == gw) != (v == w) {
                    return Ok(Some(format!("{v} and {w} have ghost {}", show(&gv))));
                }
                Ok(None)
            },
        );
    }

    sampled(
        &mut report,
        "res is a surjective ring homomorphism",
        samples,
        &mut rng,
        |rng| {
            let v = IndWittVector::random(sys, rng)?;
            let w = IndWittVector::random(sys, rng)?;
            let r1 = sys.ring(1)?;
            let a = r1.random(rng);
            let mut coords = IndWittVector::zero(sys)?.coords;
            coords[0] = a.clone();
            if ind_res(&IndWittVector::new(sys, coords)?)? != a {
                return Ok(Some(format!("{a} has no preimage")));
            }
            let ok = ind_res(&ind_add(&v, &w)?)? == r1.add(&ind_res(&v)?, &ind_res(&w)?)?
                && ind_res(&ind_mul(&v, &w)?)? == r1.mul(&ind_res(&v)?, &ind_res(&w)?)?;
            Ok((!ok).then(|| format!("res fails on {v}, {w}")))
        },
    );

    for t in s.sub_sets().into_iter().filter(|t| t != &s) {
        sampled(
            &mut report,
            format!("projection to {t} is a ring homomorphism"),
            samples,
            &mut rng,
            |rng| {
                let v = IndWittVector::random(sys, rng)?;
                let w = IndWittVector::random(sys, rng)?;
                let (pv, pw) = (ind_project(&v, &t)?, ind_project(&w, &t)?);
                let ok = ind_project(&ind_add(&v, &w)?, &t)? == ind_add(&pv, &pw)?
                    && ind_project(&ind_mul(&v, &w)?, &t)? == ind_mul(&pv, &pw)?;
                Ok((!ok).then(|| format!("projection fails on {v}, {w}")))
            },
        );
    }

    for n in s.iter().filter(|&n| n > 1) {
        sampled(
            &mut report,
            format!("F_{n} and V_{n} are compatible with ghost"),
            samples,
            &mut rng,
            |rng| {
                let v = IndWittVector::random(sys, rng)?;
                let gv = ind_ghost(&v)?;
                let f = ind_frobenius(&v, n)?;
                let gf = ind_ghost(&f)?;
                for (nu, x) in f.set().iter().zip(&gf) {
                    if x != &gv[s.require(n * nu)?] {
                        return Ok(Some(format!(
                            "ghost(F_{n} v)_{nu} ≠ ghost(v)_{} for v = {v}",
                            n * nu
                        )));
                    }
                }
                let sn = s.quotient(n)?;
                let w = IndWittVector::random(&restricted(sys, &sn)?, rng)?;
                let gw = ind_ghost(&w)?;
                let vw = ind_verschiebung(sys, &w, n)?;
                for (mu, x) in s.iter().zip(ind_ghost(&vw)?) {
                    let ring = sys.ring(mu)?;
                    let expect = if mu % n == 0 {
                        let inner = &gw[sn.require(mu / n)?];
                        ring.int_scale_i64(&sys.transition(mu / n, mu, inner)?, n as i64)?
                    } else {
                        ring.zero()
                    };
                    if x != expect {
                        return Ok(Some(format!(
                            "ghost(V_{n} w)_{mu} = {x}, expected {expect} for w = {w}"
                        )));
                    }
                }
                Ok(None)
            },
        );
    }

    for p in s.primes().collect::<Vec<_>>() {
        report.record_result(
            format!("Frobenius mod {p}"),
            ind_frobenius_mod_p_certificate(sys, p, samples, seed ^ p),
        );
    }

    sampled(
        &mut report,
        "nested transitions compose",
        samples.clamp(1, 50),
        &mut rng,
        |rng| {
            for n in s.iter() {
                for d in s.divisors_of(n) {
                    for d1 in s.divisors_of(d) {
                        let w = IndWittVector::random(&shifted(sys, d1)?, rng)?;
                        let direct = nested_transition(sys, d1, n, &w)?;
                        let via =
                            nested_transition(sys, d, n, &nested_transition(sys, d1, d, &w)?)?;
                        if direct != via {
                            return Ok(Some(format!(
                                "π_{{{d1},{n}}} ≠ π_{{{d},{n}}}∘π_{{{d1},{d}}} on {w}"
                            )));
                        }
                        let w2 = IndWittVector::random(&shifted(sys, d1)?, rng)?;
                        let hom = nested_transition(sys, d1, n, &ind_mul(&w, &w2)?)?
                            == ind_mul(&direct, &nested_transition(sys, d1, n, &w2)?)?;
                        if !hom {
                            return Ok(Some(format!(
                                "π_{{{d1},{n}}} is not multiplicative on {w}, {w2}"
                            )));
                        }
                    }
                }
            }
            Ok(None)
        },
    );

    if sys.has_lifts() {
        verify_lifts(sys, samples, &mut rng, &mut report);
    }
    report
}

fn verify_lifts(sys: &SysRef, samples: usize, rng: &mut ChaCha8Rng, report: &mut Report) {
    let s = sys.set().clone();
    sampled(
        report,
        "Frobenius lifts satisfy the lift axioms",
        samples,
        rng,
        |rng| {
            for n in s.iter() {
                for (p, _) in factorize(n) {
                    let ring = sys.ring(n)?;
                    let a = sys.ring(n / p)?.random(rng);
                    let lifted = sys.lift(p, n, &a)?;
                    let power = sys.transition(n / p, n, &sys.ring(n / p)?.pow(&a, p as u32)?)?;
                    if !ring.is_divisible_mod(&ring.sub(&lifted, &power)?, p, 1)? {
                        return Ok(Some(format!("φ_{p}({a}) ≢ π({a}^{p}) mod {p}")));
                    }
                    for (l, _) in factorize(n / p) {
                        let b = sys.ring(n / p / l)?.random(rng);
                        let pl = sys.lift(p, n, &sys.lift(l, n / p, &b)?)?;
                        let lp = if (n / l) % p == 0 {
                            Some(sys.lift(l, n, &sys.lift(p, n / l, &b)?)?)
                        } else {
                            None
                        };
                        if lp.is_some_and(|lp| lp != pl) {
                            return Ok(Some(format!("φ_{p}φ_{l} ≠ φ_{l}φ_{p} on {b}")));
                        }
                    }
                    for m in s.iter().filter(|m| m % n == 0 && *m != n) {
                        let b = sys.ring(n / p)?.random(rng);
                        let one = sys.transition(n, m, &sys.lift(p, n, &b)?)?;
                        let two = sys.lift(p, m, &sys.transition(n / p, m / p, &b)?)?;
                        if one != two {
                            return Ok(Some(format!(
                                "φ_{p} does not commute with π_{{{n},{m}}} on {b}"
                            )));
                        }
                    }
                }
            }
            Ok(None)
        },
    );

    if all_torsion_free(sys) {
        let mut k = 0usize;
        sampled(
            report,
            "Dwork test agrees with inversion",
            samples,
            rng,
            |rng| {
                k += 1;
                let x = if k.is_multiple_of(2) {
                    random_tuple(sys, rng, 50)?
                } else {
                    let coords = random_tuple(sys, rng, 2)?;
                    ind_ghost(&IndWittVector::new(sys, coords)?)?
                };
                let test = dwork_image_test(sys, &x)?;
                let inv = match dwork_invert(sys, &x) {
                    Ok(v) => {
                        if ind_ghost(&v)? != x {
                            return Ok(Some(format!(
                                "inverse of {} has a different ghost",
                                show(&x)
                            )));
                        }
                        true
                    }
                    Err(Error::NotInImage(_)) => false,
                    Err(e) => return Err(e),
                };
                Ok((test != inv).then(|| format!("test = {test}, invert = {inv} on {}", show(&x))))
            },
        );

        sampled(report, "res ∘ λ = id", samples, rng, |rng| {
            for n in s.iter() {
                let a = sys.ring(n)?.random(rng);
                let l = lambda(sys, n, &a)?;
                if ind_res(&l)? != a {
                    return Ok(Some(format!("res(λ_{n}({a})) = {}", ind_res(&l)?)));
                }
            }
            Ok(None)
        });

        sampled(report, "λ ∘ φ_p = F_p ∘ λ", samples, rng, |rng| {
            for n in s.iter() {
                for (p, _) in factorize(n) {
                    let a = sys.ring(n / p)?.random(rng);
                    let left = lambda(sys, n, &sys.lift(p, n, &a)?)?;
                    let right = ind_frobenius(&lambda(sys, n / p, &a)?, p)?;
                    if left != right {
                        return Ok(Some(format!(
                            "n = {n}, p = {p}, a = {a}: {left} vs {right}"
                        )));
                    }
                }
            }
            Ok(None)
        });

        sampled(report, "λ is a ring homomorphism", samples, rng, |rng| {
            for n in s.iter() {
                let ring = sys.ring(n)?;
                let (a, b) = (ring.random(rng), ring.random(rng));
                let (la, lb) = (lambda(sys, n, &a)?, lambda(sys, n, &b)?);
                let ok = lambda(sys, n, &ring.add(&a, &b)?)? == ind_add(&la, &lb)?
                    && lambda(sys, n, &ring.mul(&a, &b)?)? == ind_mul(&la, &lb)?;
                if !ok {
                    return Ok(Some(format!("λ_{n} fails on {a}, {b}")));
                }
            }
            Ok(None)
        });
    }
}

/// The trivial system is the product of the twisted rings `A^{(ν)}` and has
/// `F_n((a_ν)) = (n·a_{νn})`; checked elementwise against the generic
/// operations.
pub fn verify_trivial_system(
    ring: &Ring,
    set: &TruncationSet,
    samples: usize,
    seed: u64,
) -> Report {
    let sys = TrivialInd::new(ring.clone(), set.clone());
    let mut report = Report::new(format!("indwitt triv:{ring} {set}"));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sampled(
        &mut report,
        "(a_ν)·(b_ν) = (ν·a_ν·b_ν)",
        samples,
        &mut rng,
        |rng| {
            let v = IndWittVector::random(&sys, rng)?;
            let w = IndWittVector::random(&sys, rng)?;
            let prod = ind_mul(&v, &w)?;
            for (i, nu) in set.iter().enumerate() {
                let expect =
                    ring.int_scale_i64(&ring.mul(&v.coords[i], &w.coords[i])?, nu as i64)?;
                if prod.coords[i] != expect {
                    return Ok(Some(format!(
                        "coordinate {nu} of {v}·{w} is {}, expected {expect}",
                        prod.coords[i]
                    )));
                }
            }
            Ok(None)
        },
    );
    sampled(
        &mut report,
        "(a_ν)+(b_ν) = (a_ν+b_ν)",
        samples,
        &mut rng,
        |rng| {
            let v = IndWittVector::random(&sys, rng)?;
            let w = IndWittVector::random(&sys, rng)?;
            let sum = ind_add(&v, &w)?;
            let expect = componentwise(&sys, &v.coords, &w.coords, |r, a, b| r.add(a, b))?;
            Ok((sum.coords != expect).then(|| format!("{v} + {w} = {sum}")))
        },
    );
    sampled(
        &mut report,
        "F_n((a_ν)) = (n·a_{νn})",
        samples,
        &mut rng,
        |rng| {
            let v = IndWittVector::random(&sys, rng)?;
            for n in set.iter() {
                let f = ind_frobenius(&v, n)?;
                for (nu, c) in f.set().iter().zip(&f.coords) {
                    let expect = ring.int_scale_i64(v.coord(n * nu)?, n as i64)?;
                    if c != &expect {
                        return Ok(Some(format!("F_{n}({v})_{nu} = {c}, expected {expect}")));
                    }
                }
            }
            Ok(None)
        },
    );
    report
}

/// For `π = id` the ind-system operations are those of `W_S(A)`.
pub fn verify_constant_system(
    ring: &Ring,
    set: &TruncationSet,
    samples: usize,
    seed: u64,
) -> Report {
    use crate::witt::{WittRing, WittVector};
    let mut report = Report::new(format!("indwitt const:{ring} {set}"));
    let sys = ConstantInd::new(ring.clone(), set.clone(), Lift::None);
    let wr = match WittRing::classical(set.clone(), ring.clone()) {
        Ok(w) => w,
        Err(e) => {
            report.fail("constant system agrees with W_S(A)", e.to_string());
            return report;
        }
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sampled(
        &mut report,
        "constant system agrees with W_S(A)",
        samples,
        &mut rng,
        |rng| {
            let v = IndWittVector::random(&sys, rng)?;
            let w = IndWittVector::random(&sys, rng)?;
            let cv = WittVector::new(wr.clone(), v.coords.clone())?;
            let cw = WittVector::new(wr.clone(), w.coords.clone())?;
            if ind_add(&v, &w)?.coords != cv.add(&cw)?.coords()
                || ind_mul(&v, &w)?.coords != cv.mul(&cw)?.coords()
                || ind_ghost(&v)? != cv.ghost()?
            {
                return Ok(Some(format!("ring structure differs on {v}, {w}")));
            }
            for n in set.iter() {
                if ind_frobenius(&v, n)?.coords != cv.frobenius(n)?.coords() {
                    return Ok(Some(format!("F_{n} differs on {v}")));
                }
                let sn = set.quotient(n)?;
                let small = ind_project(&v, &sn)?;
                let classical = WittVector::new(wr.with_set(sn.clone())?, small.coords.clone())?
                    .verschiebung(n, set)?;
                if ind_verschiebung(&sys, &small, n)?.coords != classical.coords() {
                    return Ok(Some(format!("V_{n} differs on {small}")));
                }
            }
            Ok(None)
        },
    );
    report
}

/// The ghost exponent `v_p(n)` used by the Dwork congruence at `n`.
pub fn dwork_exponent(p: u64, n: u64) -> u32 {
    valuation(p, n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn set(e: &[u64]) -> TruncationSet {
        TruncationSet::new(e).unwrap()
    }

    fn ints(xs: &[i64]) -> Vec<Elem> {
        xs.iter().map(|&k| Elem::int(k)).collect()
    }

    fn poly(c: &[i64]) -> Elem {
        Elem::Poly(UPoly::from_i64(c))
    }

    #[test]
    fn ghost_at_p_on_mixed_chain() {
        let sys = MixedChain::new(set(&[1, 3]));
        let v = IndWittVector::new(&sys, vec![Elem::int(2), poly(&[1, 1])]).unwrap();
        // x_3 = π(a_1)^3 + 3·a_3
        assert_eq!(ind_ghost(&v).unwrap(), vec![Elem::int(2), poly(&[11, 3])]);
    }

    #[test]
    fn trivial_ghost_is_scaling() {
        let sys = TrivialInd::new(Ring::integers(), set(&[1, 2, 3, 6]));
        let v = IndWittVector::new(&sys, ints(&[5, -2, 7, 3])).unwrap();
        assert_eq!(ind_ghost(&v).unwrap(), ints(&[5, -4, 21, 18]));
    }

    #[test]
    fn trivial_ring_structure() {
        let s = set(&[1, 2, 3, 4, 6, 12]);
        assert!(verify_trivial_system(&Ring::integers(), &s, 50, 1).passed());
        assert!(verify_trivial_system(&Ring::zmod(6), &s, 50, 2).passed());
        let sys = TrivialInd::new(Ring::integers(), set(&[1, 2, 4]));
        let v = IndWittVector::new(&sys, ints(&[1, 2, 3])).unwrap();
        let f = ind_frobenius(&v, 2).unwrap();
        assert_eq!(f.coords(), &ints(&[4, 6])[..]);
    }

    #[test]
    fn constant_system_is_classical() {
        let r = verify_constant_system(&Ring::integers(), &set(&[1, 2, 3, 6]), 30, 3);
        assert!(r.passed(), "{:?}", r.failures().collect::<Vec<_>>());
        let r = verify_constant_system(&Ring::zq(), &set(&[1, 2, 4]), 20, 4);
        assert!(r.passed(), "{:?}", r.failures().collect::<Vec<_>>());
    }

    #[test]
    fn zero_is_neutral() {
        let sys = MixedChain::new(set(&[1, 2, 4]));
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let v = IndWittVector::random(&sys, &mut rng).unwrap();
        assert_eq!(ind_add(&v, &IndWittVector::zero(&sys).unwrap()).unwrap(), v);
    }

    #[test]
    fn ind_frobenius_mod_p_examples() {
        assert!(
            ind_frobenius_mod_p_certificate(&ConstantInd::integers(set(&[1, 2])), 2, 50, 1)
                .unwrap()
        );
        assert!(ind_frobenius_mod_p_certificate(&MixedChain::new(set(&[1, 2])), 2, 50, 1).unwrap());
        assert!(ind_frobenius_mod_p_certificate(
            &TrivialInd::new(Ring::integers(), set(&[1, 2, 3, 6])),
            3,
            50,
            1
        )
        .unwrap());
        assert!(ind_frobenius_mod_p_certificate(
            &ConstantInd::q_power(set(&[1, 2, 3, 6])),
            2,
            20,
            1
        )
        .unwrap());
    }

    #[test]
    fn dwork_examples() {
        let sys = ConstantInd::integers(set(&[1, 2]));
        assert!(dwork_image_test(&sys, &ints(&[3, 5])).unwrap());
        assert_eq!(
            dwork_invert(&sys, &ints(&[3, 5])).unwrap().coords(),
            &ints(&[3, -2])[..]
        );
        assert!(!dwork_image_test(&sys, &ints(&[3, 4])).unwrap());
        assert!(matches!(
            dwork_invert(&sys, &ints(&[3, 4])),
            Err(Error::NotInImage(_))
        ));
    }

    #[test]
    fn dwork_uses_full_valuation() {
        let sys = ConstantInd::integers(set(&[1, 2, 4]));
        assert_eq!(dwork_exponent(2, 4), 2);
        // x_4 ≡ x_2 holds mod 2 but not mod 4
        assert!(!dwork_image_test(&sys, &ints(&[1, 3, 5])).unwrap());
        assert!(dwork_image_test(&sys, &ints(&[1, 3, 7])).unwrap());
        assert_eq!(
            dwork_invert(&sys, &ints(&[1, 3, 7])).unwrap().coords(),
            &ints(&[1, 1, 1])[..]
        );
        // brute force over a box: the test and the solver agree everywhere
        for x2 in -20..=20 {
            for x4 in -20..=20 {
                let x = ints(&[1, x2, x4]);
                assert_eq!(
                    dwork_image_test(&sys, &x).unwrap(),
                    dwork_invert(&sys, &x).is_ok(),
                    "{x2}, {x4}"
                );
            }
        }
    }

    #[test]
    fn dwork_needs_lifts() {
        let sys = TrivialInd::new(Ring::integers(), set(&[1, 2]));
        assert!(matches!(
            dwork_image_test(&sys, &ints(&[1, 1])),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn lambda_example() {
        let sys = ConstantInd::integers(set(&[1, 2]));
        let l = lambda(&sys, 1, &Elem::int(2)).unwrap();
        assert_eq!(l.coords(), &ints(&[2, -1])[..]);
        assert_eq!(ind_res(&l).unwrap(), Elem::int(2));
    }

    #[test]
    fn lambda_on_qpow() {
        let sys = ConstantInd::q_power(set(&[1, 2]));
        // ghost (q, q²) has coordinates (q, 0)
        let l = lambda(&sys, 1, &poly(&[0, 1])).unwrap();
        assert_eq!(l.coords(), &[poly(&[0, 1]), poly(&[])][..]);
    }

    #[test]
    fn beta_examples() {
        let a = ConstantInd::integers(set(&[1, 2]));
        let b = ConstantInd::new(Ring::zq(), set(&[1, 2]), Lift::None);
        let incl = |_: u64, x: &Elem| to_zq(x);
        let direct = beta(&a, &b, &incl, 1, &Elem::int(2)).unwrap();
        assert_eq!(direct.coords(), &[poly(&[2]), poly(&[-1])][..]);
        assert_eq!(
            beta_from_ghost(&a, &b, &incl, 1, &Elem::int(2)).unwrap(),
            direct
        );
        let id = |_: u64, x: &Elem| Ok(x.clone());
        assert_eq!(
            beta(&a, &a, &id, 1, &Elem::int(5)).unwrap(),
            lambda(&a, 1, &Elem::int(5)).unwrap()
        );
    }

    #[test]
    fn shifts_collapse() {
        let sys = ConstantInd::integers(set(&[1, 2, 4, 8]));
        let two = shifted(&shifted(&sys, 2).unwrap(), 2).unwrap();
        assert!(same_system(&two, &shifted(&sys, 4).unwrap()));
        assert_eq!(two.set(), &set(&[1, 2]));
        assert!(matches!(shifted(&sys, 3), Err(Error::NotAMember { .. })));
    }

    #[test]
    fn mismatched_systems_are_rejected() {
        let a = ConstantInd::integers(set(&[1, 2]));
        let b = TrivialInd::new(Ring::integers(), set(&[1, 2]));
        let v = IndWittVector::zero(&a).unwrap();
        let w = IndWittVector::zero(&b).unwrap();
        assert!(matches!(ind_add(&v, &w), Err(Error::RingMismatch(_))));
    }

    #[test]
    fn fixtures_pass_verification() {
        for sys in [
            ConstantInd::integers(set(&[1, 2, 3, 6])),
            ConstantInd::q_power(set(&[1, 2, 4])),
            MixedChain::new(set(&[1, 2, 3, 6])),
            TrivialInd::new(Ring::integers(), set(&[1, 2, 4])),
            TrivialInd::new(Ring::zmod(4), set(&[1, 2])),
            ConstantInd::new(Ring::zmod(9), set(&[1, 3]), Lift::None),
        ] {
            let r = verify_ind_system(&sys, 20, 9);
            assert!(
                r.passed(),
                "{}: {:?}",
                sys.name(),
                r.failures().collect::<Vec<_>>()
            );
        }
    }

    #[test]
    fn parse_systems() {
        let s = set(&[1, 2, 4]);
        assert_eq!(
            parse_system("const:z", s.clone()).unwrap().name(),
            "const:z"
        );
        assert!(parse_system("qpow", s.clone()).unwrap().has_lifts());
        assert!(!parse_system("triv:z", s.clone()).unwrap().has_lifts());
        assert!(parse_system("bogus", s).is_err());
    }

    #[test]
    fn json_round_trip() {
        let sys = MixedChain::new(set(&[1, 2]));
        let v = IndWittVector::new(&sys, vec![Elem::int(3), poly(&[1, 2])]).unwrap();
        assert_eq!(IndWittVector::from_json(&sys, &v.to_json()).unwrap(), v);
    }

    proptest! {
        #[test]
        fn ghost_injective_on_integers(a in proptest::collection::vec(-30i64..30, 4), b in proptest::collection::vec(-30i64..30, 4)) {
            let sys = ConstantInd::integers(set(&[1, 2, 3, 6]));
            let v = IndWittVector::new(&sys, ints(&a)).unwrap();
            let w = IndWittVector::new(&sys, ints(&b)).unwrap();
            let (gv, gw) = (ind_ghost(&v).unwrap(), ind_ghost(&w).unwrap());
            prop_assert_eq!(dwork_invert(&sys, &gv).unwrap(), v.clone());
            prop_assert_eq!(gv == gw, v == w);
        }

        #[test]
        fn ghost_is_additive_and_multiplicative(a in proptest::collection::vec(-9i64..9, 6), b in proptest::collection::vec(-9i64..9, 6)) {
            let sys = MixedChain::new(set(&[1, 2, 4]));
            let mk = |c: &[i64]| IndWittVector::new(&sys, vec![Elem::int(c[0]), poly(&c[1..3]), poly(&c[3..6])]).unwrap();
            let (v, w) = (mk(&a), mk(&b));
            let (gv, gw) = (ind_ghost(&v).unwrap(), ind_ghost(&w).unwrap());
            let sum = componentwise(&sys, &gv, &gw, |r, x, y| r.add(x, y)).unwrap();
            let prod = componentwise(&sys, &gv, &gw, |r, x, y| r.mul(x, y)).unwrap();
            prop_assert_eq!(ind_ghost(&ind_add(&v, &w).unwrap()).unwrap(), sum);
            prop_assert_eq!(ind_ghost(&ind_mul(&v, &w).unwrap()).unwrap(), prod);
        }

        #[test]
        fn dwork_test_matches_invert(x in proptest::collection::vec(-50i64..=50, 3)) {
            let sys = ConstantInd::integers(set(&[1, 2, 4]));
            let x = ints(&x);
            prop_assert_eq!(dwork_image_test(&sys, &x).unwrap(), dwork_invert(&sys, &x).is_ok());
        }
    }
}
