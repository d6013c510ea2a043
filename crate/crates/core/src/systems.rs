//! Projective systems `(A_S)_{S ≼ T}` with commuting Frobenius lifts and,
//! optionally, Verschiebung maps; the comparison map `α` into Witt vectors;
//! and the Auer decomposition `W_{T₁·T₂} ≅ W_{T₁} ∘ W_{T₂}`.

use std::collections::{HashMap, HashSet};
use std::sync::Arc;

use num_bigint::BigInt;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::mpoly::{MPoly, Var};
use crate::report::Report;
use crate::rings::{Elem, Ring};
use crate::truncset::{prime_chain, TruncationSet};
use crate::universal::Family;
use crate::witt::{QBinding, WittRing, WittVector};

/// Systems whose rings are at most this large are checked by enumeration.
pub const ENUMERATION_LIMIT: u64 = 4096;

/// A projective system of rings indexed by the divisor-stable subsets of `top`.
pub trait ProjSystem: Send + Sync {
    fn name(&self) -> String;

    fn top(&self) -> &TruncationSet;

    fn ring(&self, s: &TruncationSet) -> Result<Ring>;

    /// `π: A_S → A_sub` for `sub ≼ S`.
    fn project(&self, s: &TruncationSet, sub: &TruncationSet, a: &Elem) -> Result<Elem>;

    /// `F_p: A_S → A_{S/p}`.
    fn frobenius(&self, s: &TruncationSet, p: u64, a: &Elem) -> Result<Elem>;

    fn has_verschiebung(&self) -> bool {
        false
    }

    /// `V_p: A_{S/p} → A_S`.
    fn verschiebung(&self, _s: &TruncationSet, p: u64, _b: &Elem) -> Result<Elem> {
        Err(Error::Unsupported(format!("{} has no V_{p}", self.name())))
    }

    /// A set-theoretic section `A_sub → A_S` of `π`.
    fn section(&self, sub: &TruncationSet, s: &TruncationSet, a: &Elem) -> Result<Elem>;

    /// The ring `A_{1}` as a coefficient ring for Witt vectors.
    fn bottom_ring(&self) -> Result<Ring> {
        self.ring(&TruncationSet::one())
    }

    fn to_bottom(&self, a: &Elem) -> Result<Elem> {
        Ok(a.clone())
    }

    #[allow(clippy::wrong_self_convention)]
    fn from_bottom(&self, b: &Elem) -> Result<Elem> {
        Ok(b.clone())
    }
}

fn require_in_top(sys: &dyn ProjSystem, s: &TruncationSet) -> Result<()> {
    if s.is_subset_of(sys.top()) {
        Ok(())
    } else {
        Err(Error::NotASubset(s.to_string(), sys.top().to_string()))
    }
}

/// The twist `τ` of a family, evaluated in the coefficient ring; `None` when it is 1.
fn twist_value(fam: &Family, base: &Ring, q: &QBinding) -> Result<Option<Elem>> {
    let t = fam.twist();
    if t == MPoly::one() {
        return Ok(None);
    }
    let t = match q {
        QBinding::Scalar(k) => t.specialize_q(k),
        _ => t,
    };
    let qv = match q {
        QBinding::Element(e) => Some(e.clone()),
        _ => None,
    };
    let v = t.eval(base, &|var| if var == Var::Q { qv.clone() } else { None })?;
    if base.one().as_ref() == Some(&v) {
        Ok(None)
    } else {
        Ok(Some(v))
    }
}

/// `(W_S(A))_{S ≼ T}` for one family.
#[derive(Clone, Debug)]
pub struct WittSystem {
    family: Family,
    base: Ring,
    q: QBinding,
    top: TruncationSet,
    bottom: Ring,
    name: String,
}

impl WittSystem {
    pub fn new(family: Family, base: Ring, q: QBinding, top: TruncationSet) -> Result<Self> {
        let w = WittRing::new(family.clone(), top.clone(), base.clone(), q)?;
        let q = w.q().clone();
        let bottom = match twist_value(&family, &base, &q)? {
            Some(t) => Ring::twisted(base.clone(), t)?,
            None => base.clone(),
        };
        Ok(WittSystem {
            family,
            base,
            q,
            top,
            bottom,
            name: w.to_string(),
        })
    }

    pub fn classical(base: Ring, top: TruncationSet) -> Result<Self> {
        Self::new(Family::Classical, base, QBinding::None, top)
    }

    pub fn natural(family: Family, base: Ring, top: TruncationSet) -> Result<Self> {
        let q = QBinding::natural(&family, &base)?;
        Self::new(family, base, q, top)
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn witt(&self, s: &TruncationSet) -> Result<Arc<WittRing>> {
        WittRing::new(
            self.family.clone(),
            s.clone(),
            self.base.clone(),
            self.q.clone(),
        )
    }

    fn vector(&self, s: &TruncationSet, a: &Elem) -> Result<WittVector> {
        WittVector::from_elem(&self.witt(s)?.ring(), a)
    }
}

impl ProjSystem for WittSystem {
    fn name(&self) -> String {
        self.name.clone()
    }

    fn top(&self) -> &TruncationSet {
        &self.top
    }

    fn ring(&self, s: &TruncationSet) -> Result<Ring> {
        Ok(self.witt(s)?.ring())
    }

    fn project(&self, s: &TruncationSet, sub: &TruncationSet, a: &Elem) -> Result<Elem> {
        Ok(self.vector(s, a)?.project(sub)?.to_elem())
    }

    fn frobenius(&self, s: &TruncationSet, p: u64, a: &Elem) -> Result<Elem> {
        Ok(self.vector(s, a)?.frobenius(p)?.to_elem())
    }

    fn has_verschiebung(&self) -> bool {
        true
    }

    fn verschiebung(&self, s: &TruncationSet, p: u64, b: &Elem) -> Result<Elem> {
        Ok(self
            .vector(&s.quotient(p)?, b)?
            .verschiebung(p, s)?
            .to_elem())
    }

    fn section(&self, sub: &TruncationSet, s: &TruncationSet, a: &Elem) -> Result<Elem> {
        Ok(self.vector(sub, a)?.section(s)?.to_elem())
    }

    fn bottom_ring(&self) -> Result<Ring> {
        Ok(self.bottom.clone())
    }

    fn to_bottom(&self, a: &Elem) -> Result<Elem> {
        match a.as_vec() {
            Some([x]) => Ok(x.clone()),
            _ => Err(Error::mismatch(format!("{a} is not a vector on {{1}}"))),
        }
    }

    fn from_bottom(&self, b: &Elem) -> Result<Elem> {
        Ok(Elem::Vec(vec![b.clone()]))
    }
}

/// The Lenart system `(W^q_S(ℤ))_S` for an integer `q`.
pub fn lenart_system(q: i64, top: TruncationSet) -> Result<WittSystem> {
    WittSystem::new(Family::Lenart(q), Ring::integers(), QBinding::None, top)
}

type LiftFn = Arc<dyn Fn(u64, &Elem) -> Result<Elem> + Send + Sync>;

/// `A_S = A` for every `S`, with `π = id` and a chosen family of lifts `φ_p`.
#[derive(Clone)]
pub struct ConstantSystem {
    name: String,
    ring: Ring,
    top: TruncationSet,
    lift: LiftFn,
    scaling_verschiebung: bool,
}

impl ConstantSystem {
    pub fn with_lift(
        name: impl Into<String>,
        ring: Ring,
        top: TruncationSet,
        lift: impl Fn(u64, &Elem) -> Result<Elem> + Send + Sync + 'static,
    ) -> Self {
        ConstantSystem {
            name: name.into(),
            ring,
            top,
            lift: Arc::new(lift),
            scaling_verschiebung: false,
        }
    }

    /// `φ_p = id`.
    pub fn identity(ring: Ring, top: TruncationSet) -> Self {
        let name = format!("const:{ring}:{}", top.to_list());
        Self::with_lift(name, ring, top, |_, a| Ok(a.clone()))
    }

    /// `ℤ[q]` with `φ_p(f(q)) = f(q^p)`.
    pub fn q_power(top: TruncationSet) -> Self {
        let name = format!("qpow:{}", top.to_list());
        Self::with_lift(name, Ring::zq(), top, |p, a| match a {
            Elem::Poly(f) => Ok(Elem::Poly(f.frobenius(p as usize))),
            _ => Err(Error::mismatch(format!("{a} is not in Z[q]"))),
        })
    }

    /// Adds `V_p = p·`, which satisfies `F_pV_p = p` but not exactness.
    pub fn with_scaling_verschiebung(mut self) -> Self {
        self.scaling_verschiebung = true;
        self.name.push_str("+V");
        self
    }
}

impl ProjSystem for ConstantSystem {
    fn name(&self) -> String {
        self.name.clone()
    }

    fn top(&self) -> &TruncationSet {
        &self.top
    }

    fn ring(&self, _s: &TruncationSet) -> Result<Ring> {
        Ok(self.ring.clone())
    }

    fn project(&self, _s: &TruncationSet, _sub: &TruncationSet, a: &Elem) -> Result<Elem> {
        Ok(a.clone())
    }

    fn frobenius(&self, s: &TruncationSet, p: u64, a: &Elem) -> Result<Elem> {
        s.require(p)?;
        (self.lift)(p, a)
    }

    fn has_verschiebung(&self) -> bool {
        self.scaling_verschiebung
    }

    fn verschiebung(&self, s: &TruncationSet, p: u64, b: &Elem) -> Result<Elem> {
        if !self.scaling_verschiebung {
            return Err(Error::Unsupported(format!("{} has no V_{p}", self.name)));
        }
        s.require(p)?;
        self.ring.int_scale(b, &BigInt::from(p))
    }

    fn section(&self, _sub: &TruncationSet, _s: &TruncationSet, a: &Elem) -> Result<Elem> {
        Ok(a.clone())
    }
}

/// `M_S = W_{S·T₂}(A)` for `S ≼ T₁`, whose bottom ring is `W_{T₂}(A)`.
#[derive(Clone, Debug)]
pub struct AuerSystem {
    t1: TruncationSet,
    t2: TruncationSet,
    base: Ring,
}

impl AuerSystem {
    pub fn new(t1: TruncationSet, t2: TruncationSet, base: Ring) -> Result<Self> {
        t1.product(&t2)?;
        Ok(AuerSystem { t1, t2, base })
    }

    fn witt(&self, s: &TruncationSet) -> Result<Arc<WittRing>> {
        WittRing::classical(s.product(&self.t2)?, self.base.clone())
    }

    fn vector(&self, s: &TruncationSet, a: &Elem) -> Result<WittVector> {
        WittVector::from_elem(&self.witt(s)?.ring(), a)
    }
}

impl ProjSystem for AuerSystem {
    fn name(&self) -> String {
        format!(
            "auer:{}:{}:{}",
            self.t1.to_list(),
            self.t2.to_list(),
            self.base
        )
    }

    fn top(&self) -> &TruncationSet {
        &self.t1
    }

    fn ring(&self, s: &TruncationSet) -> Result<Ring> {
        Ok(self.witt(s)?.ring())
    }

    fn project(&self, s: &TruncationSet, sub: &TruncationSet, a: &Elem) -> Result<Elem> {
        Ok(self
            .vector(s, a)?
            .project(&sub.product(&self.t2)?)?
            .to_elem())
    }

    fn frobenius(&self, s: &TruncationSet, p: u64, a: &Elem) -> Result<Elem> {
        s.require(p)?;
        Ok(self.vector(s, a)?.frobenius(p)?.to_elem())
    }

    fn has_verschiebung(&self) -> bool {
        true
    }

    fn verschiebung(&self, s: &TruncationSet, p: u64, b: &Elem) -> Result<Elem> {
        s.require(p)?;
        let full = s.product(&self.t2)?;
        Ok(self
            .vector(&s.quotient(p)?, b)?
            .verschiebung(p, &full)?
            .to_elem())
    }

    fn section(&self, sub: &TruncationSet, s: &TruncationSet, a: &Elem) -> Result<Elem> {
        Ok(self
            .vector(sub, a)?
            .section(&s.product(&self.t2)?)?
            .to_elem())
    }
}

/// `F_n = F_{p₁} ∘ ⋯ ∘ F_{p_r}`, returned with its target set `S/n`.
pub fn f_n(
    sys: &dyn ProjSystem,
    s: &TruncationSet,
    n: u64,
    a: &Elem,
) -> Result<(TruncationSet, Elem)> {
    f_n_along(sys, s, n, a, &prime_chain(n))
}

fn f_n_along(
    sys: &dyn ProjSystem,
    s: &TruncationSet,
    n: u64,
    a: &Elem,
    chain: &[u64],
) -> Result<(TruncationSet, Elem)> {
    s.require(n)?;
    let mut cur = s.clone();
    let mut val = a.clone();
    for &p in chain {
        val = sys.frobenius(&cur, p, &val)?;
        cur = cur.quotient(p)?;
    }
    Ok((cur, val))
}

/// Whether applying the prime lifts of `n` in reverse order gives the same map.
pub fn f_n_order_independent(
    sys: &dyn ProjSystem,
    s: &TruncationSet,
    n: u64,
    a: &Elem,
) -> Result<bool> {
    let mut chain = prime_chain(n);
    let (set, forward) = f_n_along(sys, s, n, a, &chain)?;
    chain.reverse();
    let (_, backward) = f_n_along(sys, s, n, a, &chain)?;
    Ok(sys.ring(&set)?.eq(&forward, &backward))
}

fn witt_over_bottom(sys: &dyn ProjSystem, s: &TruncationSet) -> Result<Arc<WittRing>> {
    let bottom = sys.bottom_ring()?;
    let flags = bottom.flags();
    if !(flags.torsion_free && flags.supports_div_int) {
        return Err(Error::Unsupported(format!(
            "alpha needs a torsion-free bottom ring, got {bottom}"
        )));
    }
    WittRing::classical(s.clone(), bottom)
}

/// The unique system map into Witt vectors: the vector over `A_{1}` whose
/// ghost components are `(π F_n(a))_{n∈S}`.
pub fn alpha(sys: &dyn ProjSystem, s: &TruncationSet, a: &Elem) -> Result<WittVector> {
    require_in_top(sys, s)?;
    let target = witt_over_bottom(sys, s)?;
    let one = TruncationSet::one();
    let ghost = s
        .iter()
        .map(|n| {
            let (sn, b) = f_n(sys, s, n, a)?;
            sys.to_bottom(&sys.project(&sn, &one, &b)?)
        })
        .collect::<Result<Vec<_>>>()?;
    WittVector::unghost(&target, &ghost)
}

/// Inverts `α_S` by peeling off Verschiebung layers along
/// `0 → A_{S/p} → A_S → A_{S(p)} → 0`.
pub fn alpha_inverse(sys: &dyn ProjSystem, s: &TruncationSet, w: &WittVector) -> Result<Elem> {
    require_in_top(sys, s)?;
    if w.set() != s {
        return Err(Error::mismatch(format!(
            "expected a vector on {s}, got one on {}",
            w.set()
        )));
    }
    let Some(p) = s.primes().max() else {
        return sys.from_bottom(&w.coords()[0]);
    };
    if !sys.has_verschiebung() {
        return Err(Error::Unsupported(format!(
            "{} has no Verschiebung",
            sys.name()
        )));
    }
    let rest = s.prime_complement(p)?;
    let lower = alpha_inverse(sys, &rest, &w.project(&rest)?)?;
    let x = sys.section(&rest, s, &lower)?;
    let r = w.sub(&alpha(sys, s, &x)?)?;

    let sp = s.quotient(p)?;
    let shifted: Vec<Elem> = sp
        .iter()
        .map(|nu| r.coord(p * nu).cloned())
        .collect::<Result<_>>()?;
    let r_small = WittVector::new(w.witt().with_set(sp.clone())?, shifted)?;
    if r_small.verschiebung(p, s)? != r {
        return Err(Error::NotInImage(format!(
            "residue on {s} is not in the image of V_{p}"
        )));
    }
    let inner = alpha_inverse(sys, &sp, &r_small)?;
    let v = sys.verschiebung(s, p, &inner)?;
    sys.ring(s)?.add(&x, &v)
}

/// Per-set sample pools; small finite rings are enumerated in full.
struct Pool<'a> {
    sys: &'a dyn ProjSystem,
    budget: usize,
    rng: ChaCha8Rng,
    cache: HashMap<TruncationSet, Arc<Vec<Elem>>>,
}

impl<'a> Pool<'a> {
    fn new(sys: &'a dyn ProjSystem, budget: usize, seed: u64) -> Self {
        Pool {
            sys,
            budget: budget.max(1),
            rng: ChaCha8Rng::seed_from_u64(seed),
            cache: HashMap::new(),
        }
    }

    fn get(&mut self, s: &TruncationSet) -> Result<Arc<Vec<Elem>>> {
        if let Some(v) = self.cache.get(s) {
            return Ok(v.clone());
        }
        let ring = self.sys.ring(s)?;
        let small = ring.size().is_some_and(|n| n <= BigInt::from(self.budget));
        let v = if small {
            ring.elements(ENUMERATION_LIMIT)?
        } else {
            (0..self.budget)
                .map(|_| ring.random(&mut self.rng))
                .collect()
        };
        let v = Arc::new(v);
        self.cache.insert(s.clone(), v.clone());
        Ok(v)
    }
}

fn each(items: &[Elem], mut f: impl FnMut(&Elem) -> Result<bool>) -> Result<Option<String>> {
    for a in items {
        if !f(a)? {
            return Ok(Some(format!("fails at {a}")));
        }
    }
    Ok(None)
}

fn each_pair(
    items: &[Elem],
    mut f: impl FnMut(&Elem, &Elem) -> Result<bool>,
) -> Result<Option<String>> {
    let n = items.len();
    for (i, a) in items.iter().enumerate() {
        let b = &items[(7 * i + 1) % n];
        if !f(a, b)? {
            return Ok(Some(format!("fails at ({a}, {b})")));
        }
    }
    Ok(None)
}

fn label(axiom: &str, s: &TruncationSet, p: u64) -> String {
    format!("{axiom} (S={s}, p={p})")
}

fn check_rf(sys: &dyn ProjSystem, pool: &mut Pool<'_>, report: &mut Report) -> Result<()> {
    for s in sys.top().sub_sets() {
        let xs = pool.get(&s)?;
        for p in s.primes().collect::<Vec<_>>() {
            let sp = s.quotient(p)?;
            let rsp = sys.ring(&sp)?;
            let rs = sys.ring(&s)?;

            report.record_sampled(
                label("axiom 1: F_p(a) = π(a)^p mod p", &s, p),
                each(&xs, |a| {
                    let f = sys.frobenius(&s, p, a)?;
                    let pa = sys.project(&s, &sp, a)?;
                    let diff = rsp.sub(&f, &rsp.pow(&pa, p as u32)?)?;
                    rsp.is_divisible_mod(&diff, p, 1)
                }),
            );

            report.record_sampled(
                label("F_p is a ring homomorphism", &s, p),
                each_pair(&xs, |a, b| {
                    let f = |x: &Elem| sys.frobenius(&s, p, x);
                    Ok(rsp.eq(&f(&rs.add(a, b)?)?, &rsp.add(&f(a)?, &f(b)?)?)
                        && rsp.eq(&f(&rs.mul(a, b)?)?, &rsp.mul(&f(a)?, &f(b)?)?))
                }),
            );

            report.record_sampled(
                label("π is a ring homomorphism", &s, p),
                each_pair(&xs, |a, b| {
                    let pi = |x: &Elem| sys.project(&s, &sp, x);
                    Ok(rsp.eq(&pi(&rs.add(a, b)?)?, &rsp.add(&pi(a)?, &pi(b)?)?)
                        && rsp.eq(&pi(&rs.mul(a, b)?)?, &rsp.mul(&pi(a)?, &pi(b)?)?))
                }),
            );

            for sub in s.sub_sets() {
                if sub == s || !sub.contains(p) {
                    continue;
                }
                let subp = sub.quotient(p)?;
                let rsubp = sys.ring(&subp)?;
                report.record_sampled(
                    format!("axiom 2: π∘F_p = F_p∘π (S={s}, S'={sub}, p={p})"),
                    each(&xs, |a| {
                        let lhs = sys.project(&sp, &subp, &sys.frobenius(&s, p, a)?)?;
                        let rhs = sys.frobenius(&sub, p, &sys.project(&s, &sub, a)?)?;
                        Ok(rsubp.eq(&lhs, &rhs))
                    }),
                );
            }

            for l in s
                .primes()
                .filter(|&l| l > p && s.contains(p * l))
                .collect::<Vec<_>>()
            {
                let target = sys.ring(&s.quotient(p * l)?)?;
                report.record_sampled(
                    format!("axiom 3: F_pF_l = F_lF_p (S={s}, p={p}, l={l})"),
                    each(&xs, |a| {
                        let pl = sys.frobenius(&s.quotient(l)?, p, &sys.frobenius(&s, l, a)?)?;
                        let lp = sys.frobenius(&sp, l, &sys.frobenius(&s, p, a)?)?;
                        Ok(target.eq(&pl, &lp))
                    }),
                );
            }
        }
    }
    Ok(())
}

fn check_v(sys: &dyn ProjSystem, pool: &mut Pool<'_>, report: &mut Report) -> Result<()> {
    for s in sys.top().sub_sets() {
        let xs = pool.get(&s)?;
        let rs = sys.ring(&s)?;
        for p in s.primes().collect::<Vec<_>>() {
            let sp = s.quotient(p)?;
            let rsp = sys.ring(&sp)?;
            let bs = pool.get(&sp)?;
            let v = |b: &Elem| sys.verschiebung(&s, p, b);

            report.record_sampled(
                label("V_p is additive", &s, p),
                each_pair(&bs, |a, b| {
                    Ok(rs.eq(&v(&rsp.add(a, b)?)?, &rs.add(&v(a)?, &v(b)?)?))
                }),
            );

            for sub in s.sub_sets() {
                if sub == s || !sub.contains(p) {
                    continue;
                }
                let subp = sub.quotient(p)?;
                let rsub = sys.ring(&sub)?;
                report.record_sampled(
                    format!("axiom 4: π∘V_p = V_p∘π (S={s}, S'={sub}, p={p})"),
                    each(&bs, |b| {
                        let lhs = sys.project(&s, &sub, &v(b)?)?;
                        let rhs = sys.verschiebung(&sub, p, &sys.project(&sp, &subp, b)?)?;
                        Ok(rsub.eq(&lhs, &rhs))
                    }),
                );
            }

            for l in s
                .primes()
                .filter(|&l| l != p && s.contains(p * l))
                .collect::<Vec<_>>()
            {
                let spl = s.quotient(p * l)?;
                let sl = s.quotient(l)?;
                if p < l {
                    let cs = pool.get(&spl)?;
                    report.record_sampled(
                        format!("axiom 5: V_pV_l = V_lV_p (S={s}, p={p}, l={l})"),
                        each(&cs, |c| {
                            let pl = v(&sys.verschiebung(&sp, l, c)?)?;
                            let lp = sys.verschiebung(&s, l, &sys.verschiebung(&sl, p, c)?)?;
                            Ok(rs.eq(&pl, &lp))
                        }),
                    );
                }
                let bl = pool.get(&sl)?;
                report.record_sampled(
                    format!("axiom 5: F_pV_l = V_lF_p (S={s}, p={p}, l={l})"),
                    each(&bl, |b| {
                        let lhs = sys.frobenius(&s, p, &sys.verschiebung(&s, l, b)?)?;
                        let rhs = sys.verschiebung(&sp, l, &sys.frobenius(&sl, p, b)?)?;
                        Ok(rsp.eq(&lhs, &rhs))
                    }),
                );
            }

            report.record_sampled(
                label("axiom 6: F_pV_p = p", &s, p),
                each(&bs, |b| {
                    Ok(rsp.eq(
                        &sys.frobenius(&s, p, &v(b)?)?,
                        &rsp.int_scale(b, &BigInt::from(p))?,
                    ))
                }),
            );

            let rest = s.prime_complement(p)?;
            let rrest = sys.ring(&rest)?;
            let name = label("axiom 7: exactness", &s, p);
            let enumerable = rs
                .size()
                .is_some_and(|n| n <= BigInt::from(ENUMERATION_LIMIT));
            if enumerable {
                report.record_sampled(name, exactness_by_enumeration(sys, &s, p));
                continue;
            }
            let zero_rest = rrest.zero();
            let outcome = (|| -> Result<Option<String>> {
                for b in bs.iter() {
                    if !rsp.is_zero(b) && rs.is_zero(&v(b)?) {
                        return Ok(Some(format!("V_{p} kills {b}")));
                    }
                    if !rrest.eq(&sys.project(&s, &rest, &v(b)?)?, &zero_rest) {
                        return Ok(Some(format!("π V_{p}({b}) is not zero")));
                    }
                }
                for a in pool.get(&rest)?.iter() {
                    if !rrest.eq(&sys.project(&s, &rest, &sys.section(&rest, &s, a)?)?, a) {
                        return Ok(Some(format!("section does not split π at {a}")));
                    }
                }
                if rsp.is_torsion_free() {
                    for x in xs.iter() {
                        let k = rs.sub(x, &sys.section(&rest, &s, &sys.project(&s, &rest, x)?)?)?;
                        let fk = sys.frobenius(&s, p, &k)?;
                        let preimage = match rsp.try_div_int(&fk, &BigInt::from(p)) {
                            Ok(b) => b,
                            Err(_) => {
                                return Ok(Some(format!(
                                    "kernel element {k} has no V_{p} preimage"
                                )))
                            }
                        };
                        if !rs.eq(&v(&preimage)?, &k) {
                            return Ok(Some(format!(
                                "kernel element {k} is not in the image of V_{p}"
                            )));
                        }
                    }
                }
                Ok(None)
            })();
            report.record_sampled(name, outcome);
        }
    }
    Ok(())
}

fn exactness_by_enumeration(
    sys: &dyn ProjSystem,
    s: &TruncationSet,
    p: u64,
) -> Result<Option<String>> {
    let sp = s.quotient(p)?;
    let rest = s.prime_complement(p)?;
    let small = sys.ring(&sp)?.elements(ENUMERATION_LIMIT)?;
    let full = sys.ring(s)?.elements(ENUMERATION_LIMIT)?;
    let rrest = sys.ring(&rest)?;
    let rest_size = rrest.elements(ENUMERATION_LIMIT)?.len();

    let image: HashSet<Elem> = small
        .iter()
        .map(|b| sys.verschiebung(s, p, b))
        .collect::<Result<_>>()?;
    if image.len() != small.len() {
        return Ok(Some(format!("V_{p} is not injective")));
    }
    let mut kernel = HashSet::new();
    let mut hit = HashSet::new();
    for x in &full {
        let y = sys.project(s, &rest, x)?;
        if rrest.is_zero(&y) {
            kernel.insert(x.clone());
        }
        hit.insert(y);
    }
    if hit.len() != rest_size {
        return Ok(Some("π is not surjective".into()));
    }
    if kernel != image {
        return Ok(Some(format!(
            "ker π has {} elements, im V_{p} has {}",
            kernel.len(),
            image.len()
        )));
    }
    Ok(None)
}

/// Samples axioms 1)–3): the congruence, naturality and commutation of the lifts.
pub fn verify_rf(sys: &dyn ProjSystem, budget: usize, seed: u64) -> Report {
    let mut report = Report::new(format!("rf[{}]", sys.name()));
    let mut pool = Pool::new(sys, budget, seed);
    if let Err(e) = check_rf(sys, &mut pool, &mut report) {
        report.fail("system is well formed", e.to_string());
    }
    report
}

/// [`verify_rf`] plus axioms 4)–7) for the Verschiebung maps.
pub fn verify_rfv(sys: &dyn ProjSystem, budget: usize, seed: u64) -> Report {
    let mut report = Report::new(format!("rfv[{}]", sys.name()));
    if !sys.has_verschiebung() {
        report.fail("Verschiebung present", "the system has no V maps");
        return report;
    }
    let mut pool = Pool::new(sys, budget, seed);
    let outcome =
        check_rf(sys, &mut pool, &mut report).and_then(|_| check_v(sys, &mut pool, &mut report));
    if let Err(e) = outcome {
        report.fail("system is well formed", e.to_string());
    }
    report
}

/// Checks that `α_S` is a ring isomorphism compatible with `π`, `F_n` and `V_p`.
/// When anything fails the axiom report of the input system is appended.
pub fn alpha_is_iso(sys: &dyn ProjSystem, s: &TruncationSet, budget: usize, seed: u64) -> Report {
    let mut report = Report::new(format!("alpha-iso[{}]", sys.name()));
    if let Err(e) = alpha_checks(sys, s, budget, seed, &mut report) {
        report.fail("alpha is defined", e.to_string());
    }
    if !report.passed() && sys.has_verschiebung() {
        report.merge(verify_rfv(sys, budget, seed));
    }
    report
}

fn alpha_checks(
    sys: &dyn ProjSystem,
    s: &TruncationSet,
    budget: usize,
    seed: u64,
    report: &mut Report,
) -> Result<()> {
    require_in_top(sys, s)?;
    if !sys.has_verschiebung() {
        report.fail("Verschiebung present", "the system has no V maps");
        return Ok(());
    }
    let target = witt_over_bottom(sys, s)?;
    let mut pool = Pool::new(sys, budget, seed);
    let xs = pool.get(s)?;
    let rs = sys.ring(s)?;
    let a = |x: &Elem| alpha(sys, s, x);

    report.record_sampled(
        format!("alpha is a ring homomorphism (S={s})"),
        each_pair(&xs, |x, y| {
            Ok(a(&rs.add(x, y)?)? == a(x)?.add(&a(y)?)?
                && a(&rs.mul(x, y)?)? == a(x)?.mul(&a(y)?)?)
        }),
    );

    for p in s.primes().collect::<Vec<_>>() {
        let sp = s.quotient(p)?;
        let bs = pool.get(&sp)?;
        report.record_sampled(
            label("alpha∘V_p = V_p∘alpha", s, p),
            each(&bs, |b| {
                Ok(a(&sys.verschiebung(s, p, b)?)? == alpha(sys, &sp, b)?.verschiebung(p, s)?)
            }),
        );
        let rest = s.prime_complement(p)?;
        report.record_sampled(
            label("alpha∘π = π∘alpha", s, p),
            each(&xs, |x| {
                Ok(alpha(sys, &rest, &sys.project(s, &rest, x)?)? == a(x)?.project(&rest)?)
            }),
        );
    }

    for n in s.iter().filter(|&n| n > 1) {
        report.record_sampled(
            format!("alpha∘F_n = F_n∘alpha (S={s}, n={n})"),
            each(&xs, |x| {
                let (sn, fx) = f_n(sys, s, n, x)?;
                Ok(alpha(sys, &sn, &fx)? == a(x)?.frobenius(n)?)
            }),
        );
    }

    report.record_sampled(
        format!("alpha is injective (S={s})"),
        each(&xs, |x| Ok(rs.eq(&alpha_inverse(sys, s, &a(x)?)?, x))),
    );

    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9);
    let ws: Vec<Elem> = (0..budget.max(1))
        .map(|_| WittVector::random(&target, &mut rng).to_elem())
        .collect();
    report.record_sampled(
        format!("alpha is surjective (S={s})"),
        each(&ws, |w| {
            let w = WittVector::from_elem(&target.ring(), w)?;
            match alpha_inverse(sys, s, &w) {
                Ok(x) => Ok(a(&x)? == w),
                Err(Error::NotInImage(_)) | Err(Error::NotInGhostImage(_)) => Ok(false),
                Err(e) => Err(e),
            }
        }),
    );
    Ok(())
}

/// `α_{T₁}: W_{T₁·T₂}(A) → W_{T₁}(W_{T₂}(A))` together with its inverse.
#[derive(Clone, Debug)]
pub struct AuerIso {
    system: AuerSystem,
    source: Arc<WittRing>,
    target: Arc<WittRing>,
}

pub fn auer(t1: &TruncationSet, t2: &TruncationSet, base: Ring) -> Result<AuerIso> {
    let flags = base.flags();
    if !(flags.torsion_free && flags.supports_div_int) {
        return Err(Error::Unsupported(format!(
            "the Auer map needs a torsion-free ring, got {base}"
        )));
    }
    let system = AuerSystem::new(t1.clone(), t2.clone(), base.clone())?;
    let source = WittRing::classical(t1.product(t2)?, base.clone())?;
    let inner = WittRing::classical(t2.clone(), base)?;
    let target = WittRing::classical(t1.clone(), inner.ring())?;
    Ok(AuerIso {
        system,
        source,
        target,
    })
}

impl AuerIso {
    pub fn system(&self) -> &AuerSystem {
        &self.system
    }

    pub fn source(&self) -> &Arc<WittRing> {
        &self.source
    }

    pub fn target(&self) -> &Arc<WittRing> {
        &self.target
    }

    pub fn forward(&self, a: &WittVector) -> Result<WittVector> {
        alpha(&self.system, &self.system.t1, &self.check_source(a)?)
    }

    pub fn inverse(&self, b: &WittVector) -> Result<WittVector> {
        let e = alpha_inverse(&self.system, &self.system.t1, b)?;
        WittVector::from_elem(&self.source.ring(), &e)
    }

    fn check_source(&self, a: &WittVector) -> Result<Elem> {
        if a.ring() != &self.source.ring() {
            return Err(Error::mismatch(format!(
                "expected a vector in {}, got {}",
                self.source,
                a.ring()
            )));
        }
        Ok(a.to_elem())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::universal::{generic_vector, Bank};
    use crate::UPoly;

    fn set(e: &[u64]) -> TruncationSet {
        TruncationSet::new(e).unwrap()
    }

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(7)
    }

    #[test]
    fn alpha_on_witt_system_is_identity() {
        for base in [Ring::integers(), Ring::zq()] {
            let s = set(&[1, 2, 3, 6]);
            let sys = WittSystem::classical(base, s.clone()).unwrap();
            let w = sys.witt(&s).unwrap();
            let mut r = rng();
            for _ in 0..50 {
                let v = WittVector::random(&w, &mut r);
                assert_eq!(alpha(&sys, &s, &v.to_elem()).unwrap().coords(), v.coords());
            }
        }
    }

    #[test]
    fn alpha_on_constant_integers() {
        let s = set(&[1, 2]);
        let sys = ConstantSystem::identity(Ring::integers(), s.clone());
        let v = alpha(&sys, &s, &Elem::int(2)).unwrap();
        assert_eq!(v.coords(), &[Elem::int(2), Elem::int(-1)]);
        let one = TruncationSet::one();
        assert_eq!(
            alpha(&sys, &one, &Elem::int(5)).unwrap().coords(),
            &[Elem::int(5)]
        );

        let s = set(&[1, 2, 3, 6]);
        let sys = ConstantSystem::identity(Ring::integers(), s.clone());
        for k in -20..=20 {
            let v = alpha(&sys, &s, &Elem::int(k)).unwrap();
            assert!(v.ghost().unwrap().iter().all(|g| g == &Elem::int(k)));
        }
    }

    #[test]
    fn f_n_composites() {
        let s = set(&[1, 2, 3, 6]);
        let sys = WittSystem::classical(Ring::integers(), s.clone()).unwrap();
        let w = sys.witt(&s).unwrap();
        let mut r = rng();
        for _ in 0..20 {
            let v = WittVector::random(&w, &mut r).to_elem();
            assert!(f_n_order_independent(&sys, &s, 6, &v).unwrap());
            assert_eq!(f_n(&sys, &s, 1, &v).unwrap().1, v);
        }
        assert!(f_n(&sys, &s, 4, &Elem::Vec(vec![Elem::int(0); 4])).is_err());
    }

    #[test]
    fn constant_identity_over_zq_is_not_a_lift() {
        let sys = ConstantSystem::identity(Ring::zq(), set(&[1, 2]));
        let r = verify_rf(&sys, 50, 1);
        assert!(!r.group_passed("axiom 1"));
        let sys = ConstantSystem::q_power(set(&[1, 2, 3, 6]));
        assert!(verify_rf(&sys, 50, 1).passed());
        let v = alpha(&sys, &set(&[1, 2]), &Elem::Poly(UPoly::q())).unwrap();
        // ghost (q, q²) ↦ (q, 0)
        assert_eq!(v.coords()[1], Elem::Poly(UPoly::zero()));
    }

    #[test]
    fn witt_systems_pass_all_axioms() {
        let sys = WittSystem::classical(Ring::zmod(3), set(&[1, 2])).unwrap();
        let r = verify_rfv(&sys, 100, 1);
        assert!(r.passed(), "{:?}", r.failures().collect::<Vec<_>>());
        let sys = WittSystem::classical(Ring::integers(), set(&[1, 2, 3, 6])).unwrap();
        let r = verify_rfv(&sys, 40, 2);
        assert!(r.passed(), "{:?}", r.failures().collect::<Vec<_>>());
        let sys = WittSystem::natural(Family::QDef, Ring::zq(), set(&[1, 2, 4])).unwrap();
        let r = verify_rfv(&sys, 20, 3);
        assert!(r.passed(), "{:?}", r.failures().collect::<Vec<_>>());
    }

    #[test]
    fn lenart_with_p_dividing_q_breaks_axiom_one() {
        let r = verify_rf(&lenart_system(2, set(&[1, 2])).unwrap(), 50, 1);
        assert_eq!(
            r.check_passed("axiom 1: F_p(a) = π(a)^p mod p (S={1,2}, p=2)"),
            Some(false)
        );
        assert!(verify_rf(&lenart_system(3, set(&[1, 2])).unwrap(), 50, 1).passed());
    }

    #[test]
    fn alpha_iso_reports() {
        let s = set(&[1, 2, 3, 6]);
        let sys = WittSystem::classical(Ring::integers(), s.clone()).unwrap();
        assert!(alpha_is_iso(&sys, &s, 20, 1).passed());

        let s = set(&[1, 2]);
        let sys = ConstantSystem::identity(Ring::integers(), s.clone()).with_scaling_verschiebung();
        let r = alpha_is_iso(&sys, &s, 20, 1);
        assert!(!r.passed());
        assert!(!r.group_passed("rfv[const:z:1,2+V]: axiom 7"));
        assert!(r.group_passed("rfv[const:z:1,2+V]: axiom 6"));
    }

    #[test]
    fn qdef_system_bottom_is_twisted() {
        let s = set(&[1, 2, 3]);
        let sys = WittSystem::natural(Family::QDef, Ring::zq(), s.clone()).unwrap();
        assert_eq!(
            sys.bottom_ring().unwrap(),
            Ring::twisted(Ring::zq(), Elem::Poly(UPoly::q())).unwrap()
        );
        let w = sys.witt(&s).unwrap();
        let mut r = rng();
        for _ in 0..20 {
            let v = WittVector::random(&w, &mut r);
            assert_eq!(alpha(&sys, &s, &v.to_elem()).unwrap().coords(), v.coords());
        }
        assert!(alpha_is_iso(&sys, &s, 10, 4).passed());
    }

    #[test]
    fn auer_small() {
        let (t1, t2) = (set(&[1, 2]), set(&[1, 3]));
        let iso = auer(&t1, &t2, Ring::integers()).unwrap();
        let mut r = rng();
        for _ in 0..30 {
            let a = WittVector::random(iso.source(), &mut r);
            let b = WittVector::random(iso.source(), &mut r);
            let (fa, fb) = (iso.forward(&a).unwrap(), iso.forward(&b).unwrap());
            assert_eq!(
                iso.forward(&a.add(&b).unwrap()).unwrap(),
                fa.add(&fb).unwrap()
            );
            assert_eq!(
                iso.forward(&a.mul(&b).unwrap()).unwrap(),
                fa.mul(&fb).unwrap()
            );
            assert_eq!(iso.inverse(&fa).unwrap(), a);
        }
        for c in [2, 3, 5] {
            let w = WittVector::teichmuller(iso.source(), Elem::int(c)).unwrap();
            let inner = WittRing::classical(t2.clone(), Ring::integers()).unwrap();
            let wc = WittVector::teichmuller(&inner, Elem::int(c))
                .unwrap()
                .to_elem();
            assert_eq!(
                iso.forward(&w).unwrap(),
                WittVector::teichmuller(iso.target(), wc).unwrap()
            );
        }
        let trivial = auer(&t1, &TruncationSet::one(), Ring::integers()).unwrap();
        let a = WittVector::random(trivial.source(), &mut r);
        let fa = trivial.forward(&a).unwrap();
        let flat: Vec<Elem> = fa
            .coords()
            .iter()
            .map(|c| c.as_vec().unwrap()[0].clone())
            .collect();
        assert_eq!(flat, a.coords());
    }

    #[test]
    fn generic_alpha_over_universal() {
        // α on the QDef system over the universal ring is the identity at polynomial level.
        let s = set(&[1, 2]);
        let sys = WittSystem::natural(Family::QDef, Ring::universal(), s.clone()).unwrap();
        let x = generic_vector(&Family::QDef, &s, Bank::X).unwrap();
        assert_eq!(alpha(&sys, &s, &x.to_elem()).unwrap().coords(), x.coords());
    }
}
