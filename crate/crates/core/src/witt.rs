//! Witt vectors over an arbitrary coefficient ring, for every family.
//!
//! Arithmetic evaluates the universal polynomials, so it works over rings
//! with torsion. The ghost map and its inverse are used only where a
//! division is genuinely required.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex};

use num_bigint::BigInt;
use once_cell::sync::{Lazy, OnceCell};

use crate::error::{Error, Result};
use crate::mpoly::{CompiledPoly, MPoly, PowerCache, Var};
use crate::rings::{Elem, Ring, RingFlags, RingKind, DEFAULT_ENUM_LIMIT};
use crate::truncset::TruncationSet;
use crate::universal::{self, Bank, Family, UniversalPolySet};

/// What the deformation parameter `Q` stands for in the coefficient ring.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum QBinding {
    /// The family does not mention `Q`.
    None,
    /// An integer, acting through the ℤ-action.
    Scalar(BigInt),
    /// A ring element, e.g. the generator of ℤ[q].
    Element(Elem),
}

impl QBinding {
    /// `q` for ℤ[q], `Q` for the universal ring, nothing otherwise.
    pub fn natural(fam: &Family, base: &Ring) -> Result<QBinding> {
        if !fam.uses_q() {
            return Ok(QBinding::None);
        }
        match base.kind() {
            RingKind::PolyQ => Ok(QBinding::Element(base.parse_elem("q")?)),
            RingKind::Universal => Ok(QBinding::Element(Elem::Multi(MPoly::q()))),
            _ => Err(Error::Unsupported(format!(
                "family {fam} over {base} needs an explicit value for q"
            ))),
        }
    }
}

impl fmt::Display for QBinding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            QBinding::None => Ok(()),
            QBinding::Scalar(k) => write!(f, "{k}"),
            QBinding::Element(e) => write!(f, "{e}"),
        }
    }
}

/// Compiled structure polynomials; slots are `X_d ↦ i`, `Y_d ↦ |S|+i`, `Q ↦ 2|S|`.
struct Laws {
    polys: Arc<UniversalPolySet>,
    scalar_q: Option<BigInt>,
    add: Vec<CompiledPoly>,
    mul: Vec<CompiledPoly>,
    neg: Vec<CompiledPoly>,
    ghost: Vec<CompiledPoly>,
    /// `G_n` without its `n·X_n` term.
    ghost_low: Vec<CompiledPoly>,
    frob: Mutex<HashMap<u64, Arc<Vec<CompiledPoly>>>>,
}

impl Laws {
    fn prepare(&self, p: &MPoly) -> MPoly {
        match &self.scalar_q {
            Some(k) => p.specialize_q(k),
            None => p.clone(),
        }
    }

    fn compile(&self, p: &MPoly) -> Result<CompiledPoly> {
        let s = self.polys.set();
        let width = s.len();
        self.prepare(p).compile(&|v| match v {
            Var::X(d) => s.index_of(d),
            Var::Y(d) => s.index_of(d).map(|i| width + i),
            Var::Q => Some(2 * width),
        })
    }

    fn frobenius(&self, m: u64) -> Result<Arc<Vec<CompiledPoly>>> {
        let mut cache = self.frob.lock().expect("frobenius cache lock");
        if let Some(c) = cache.get(&m) {
            return Ok(c.clone());
        }
        let compiled: Vec<CompiledPoly> = self
            .polys
            .frobenius(m)?
            .iter()
            .map(|p| self.compile(p))
            .collect::<Result<_>>()?;
        let compiled = Arc::new(compiled);
        cache.insert(m, compiled.clone());
        Ok(compiled)
    }
}

type LawKey = (Family, TruncationSet, Option<BigInt>);

type LawSlot = Arc<OnceCell<Arc<Laws>>>;

static LAWS: Lazy<Mutex<HashMap<LawKey, LawSlot>>> = Lazy::new(Default::default);

fn laws(fam: &Family, s: &TruncationSet, scalar_q: Option<BigInt>) -> Result<Arc<Laws>> {
    let cell = {
        let mut map = LAWS.lock().expect("law cache lock");
        map.entry((fam.clone(), s.clone(), scalar_q.clone()))
            .or_default()
            .clone()
    };
    cell.get_or_try_init(|| {
        let polys = universal::derive(fam, s)?;
        let mut laws = Laws {
            polys: polys.clone(),
            scalar_q,
            add: Vec::new(),
            mul: Vec::new(),
            neg: Vec::new(),
            ghost: Vec::new(),
            ghost_low: Vec::new(),
            frob: Mutex::new(HashMap::new()),
        };
        laws.add = polys
            .add_polys()
            .iter()
            .map(|p| laws.compile(p))
            .collect::<Result<_>>()?;
        laws.mul = polys
            .mul_polys()
            .iter()
            .map(|p| laws.compile(p))
            .collect::<Result<_>>()?;
        laws.neg = polys
            .neg_polys()
            .iter()
            .map(|p| laws.compile(p))
            .collect::<Result<_>>()?;
        for n in s.iter() {
            let g = polys.ghost(n, Bank::X)?;
            let low = g.sub(&MPoly::x(n).int_scale(n as i64));
            laws.ghost.push(laws.compile(&g)?);
            laws.ghost_low.push(laws.compile(&low)?);
        }
        Ok(Arc::new(laws))
    })
    .cloned()
}

/// The ring `W_S(A)` for one family and one binding of `Q`.
pub struct WittRing {
    family: Family,
    set: TruncationSet,
    base: Ring,
    q: QBinding,
    laws: Arc<Laws>,
}

impl WittRing {
    pub fn new(
        family: Family,
        set: TruncationSet,
        base: Ring,
        q: QBinding,
    ) -> Result<Arc<WittRing>> {
        let q = if family.uses_q() { q } else { QBinding::None };
        let scalar = match &q {
            QBinding::None if family.uses_q() => {
                return Err(Error::Unsupported(format!(
                    "family {family} needs a value for q"
                )));
            }
            QBinding::Scalar(k) => Some(k.clone()),
            QBinding::Element(e) => {
                // Q acts through the algebra structure, which for a twisted or
                // nested ring is not the ring's own multiplication.
                if !matches!(
                    base.kind(),
                    RingKind::Integers
                        | RingKind::IntegersMod(_)
                        | RingKind::PolyQ
                        | RingKind::Dual
                        | RingKind::Universal
                ) {
                    return Err(Error::Unsupported(format!(
                        "q bound to an element of {base}"
                    )));
                }
                base.check(e)?;
                None
            }
            QBinding::None => None,
        };
        let laws = laws(&family, &set, scalar)?;
        Ok(Arc::new(WittRing {
            family,
            set,
            base,
            q,
            laws,
        }))
    }

    pub fn classical(set: TruncationSet, base: Ring) -> Result<Arc<WittRing>> {
        Self::new(Family::Classical, set, base, QBinding::None)
    }

    /// Uses [`QBinding::natural`] for the coefficient ring.
    pub fn natural(family: Family, set: TruncationSet, base: Ring) -> Result<Arc<WittRing>> {
        let q = QBinding::natural(&family, &base)?;
        Self::new(family, set, base, q)
    }

    /// Same family, base and binding on another truncation set.
    pub fn with_set(&self, set: TruncationSet) -> Result<Arc<WittRing>> {
        Self::new(self.family.clone(), set, self.base.clone(), self.q.clone())
    }

    pub fn ring(self: &Arc<Self>) -> Ring {
        Ring::new(RingKind::Witt(self.clone()))
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn set(&self) -> &TruncationSet {
        &self.set
    }

    pub fn base(&self) -> &Ring {
        &self.base
    }

    pub fn q(&self) -> &QBinding {
        &self.q
    }

    pub fn polys(&self) -> &Arc<UniversalPolySet> {
        &self.laws.polys
    }

    pub(crate) fn same_as(&self, other: &WittRing) -> bool {
        self.family == other.family
            && self.set == other.set
            && self.base == other.base
            && self.q == other.q
    }

    pub(crate) fn flags(&self) -> RingFlags {
        let b = self.base.flags();
        let untwisted = matches!(self.family, Family::Classical | Family::Lenart(_));
        RingFlags {
            torsion_free: b.torsion_free,
            reduced: untwisted && b.torsion_free && b.reduced,
            finite: b.finite,
            supports_div_int: (b.torsion_free && b.supports_div_int) || b.finite,
        }
    }

    pub(crate) fn one(&self) -> Option<Elem> {
        if self.family != Family::Classical {
            return None;
        }
        let mut coords = vec![self.base.zero(); self.set.len()];
        coords[0] = self.base.one()?;
        Some(Elem::Vec(coords))
    }

    fn q_value(&self) -> Option<&Elem> {
        match &self.q {
            QBinding::Element(e) => Some(e),
            _ => None,
        }
    }

    fn eval_all(
        &self,
        polys: &[CompiledPoly],
        x: &[Elem],
        y: Option<&[Elem]>,
    ) -> Result<Vec<Elem>> {
        let width = self.set.len();
        if x.len() != width || y.is_some_and(|y| y.len() != width) {
            return Err(Error::mismatch(format!(
                "coordinate count does not match {}",
                self.set
            )));
        }
        let mut vals: Vec<Option<&Elem>> = Vec::with_capacity(2 * width + 1);
        vals.extend(x.iter().map(Some));
        match y {
            Some(y) => vals.extend(y.iter().map(Some)),
            None => vals.extend(std::iter::repeat_n(None, width)),
        }
        vals.push(self.q_value());
        let mut cache = PowerCache::new(&self.base, &vals);
        polys.iter().map(|p| p.eval(&mut cache)).collect()
    }

    pub(crate) fn add_coords(&self, x: &[Elem], y: &[Elem]) -> Result<Vec<Elem>> {
        self.eval_all(&self.laws.add, x, Some(y))
    }

    pub(crate) fn mul_coords(&self, x: &[Elem], y: &[Elem]) -> Result<Vec<Elem>> {
        self.eval_all(&self.laws.mul, x, Some(y))
    }

    pub(crate) fn neg_coords(&self, x: &[Elem]) -> Result<Vec<Elem>> {
        self.eval_all(&self.laws.neg, x, None)
    }

    pub fn ghost_coords(&self, x: &[Elem]) -> Result<Vec<Elem>> {
        self.eval_all(&self.laws.ghost, x, None)
    }

    /// Solves for coordinates with the given ghost components.
    pub fn unghost_coords(&self, xs: &[Elem]) -> Result<Vec<Elem>> {
        if xs.len() != self.set.len() {
            return Err(Error::mismatch(format!(
                "{} ghost components for {}",
                xs.len(),
                self.set
            )));
        }
        let mut coords = vec![self.base.zero(); self.set.len()];
        for (i, n) in self.set.iter().enumerate() {
            let low = self
                .eval_all(std::slice::from_ref(&self.laws.ghost_low[i]), &coords, None)?
                .remove(0);
            let rest = self.base.sub(&xs[i], &low)?;
            coords[i] = match self.base.try_div_int(&rest, &BigInt::from(n)) {
                Ok(a) => a,
                Err(Error::NotDivisible(_)) => {
                    return Err(Error::NotInGhostImage(format!(
                        "component {n} fails the congruence"
                    )));
                }
                Err(e) => return Err(e),
            };
        }
        Ok(coords)
    }

    pub(crate) fn try_div_int_coords(&self, x: &[Elem], k: &BigInt) -> Result<Vec<Elem>> {
        let b = self.base.flags();
        if b.torsion_free && b.supports_div_int {
            let ghost = self.ghost_coords(x)?;
            let divided: Vec<Elem> = ghost
                .iter()
                .map(|g| self.base.try_div_int(g, k))
                .collect::<Result<_>>()?;
            return self.unghost_coords(&divided).map_err(|e| match e {
                Error::NotInGhostImage(_) => Error::NotDivisible(k.to_string()),
                other => other,
            });
        }
        if b.finite {
            let ring = Ring::new(RingKind::Witt(Arc::new(self.clone_handle())));
            let target = Elem::Vec(x.to_vec());
            let found = ring.divisors_by_enumeration(&target, k, 2)?;
            return match found.len() {
                0 => Err(Error::NotDivisible(k.to_string())),
                1 => match found.into_iter().next() {
                    Some(Elem::Vec(v)) => Ok(v),
                    _ => unreachable!("Witt elements are coordinate vectors"),
                },
                _ => Err(Error::NonUniqueQuotient(format!("{k} in {self}"))),
            };
        }
        Err(Error::Unsupported(format!("division by {k} in {self}")))
    }

    fn clone_handle(&self) -> WittRing {
        WittRing {
            family: self.family.clone(),
            set: self.set.clone(),
            base: self.base.clone(),
            q: self.q.clone(),
            laws: self.laws.clone(),
        }
    }

    pub(crate) fn frobenius_coords(&self, x: &[Elem], m: u64) -> Result<Vec<Elem>> {
        let polys = self.laws.frobenius(m)?;
        self.eval_all(&polys, x, None)
    }
}

impl fmt::Display for WittRing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (&self.family, &self.q) {
            (Family::Classical, _) => write!(f, "witt:{}:{}", self.base, self.set.to_list()),
            (fam, QBinding::None) => write!(f, "witt[{fam}]:{}:{}", self.base, self.set.to_list()),
            (fam, q) => write!(f, "witt[{fam},q={q}]:{}:{}", self.base, self.set.to_list()),
        }
    }
}

impl fmt::Debug for WittRing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "WittRing({self})")
    }
}

#[derive(Clone)]
pub struct WittVector {
    ring: Ring,
    coords: Vec<Elem>,
}

impl WittVector {
    pub fn new(ring: Arc<WittRing>, coords: Vec<Elem>) -> Result<WittVector> {
        Self::in_ring(&ring.ring(), coords)
    }

    /// `ring` must be a Witt ring.
    pub fn in_ring(ring: &Ring, coords: Vec<Elem>) -> Result<WittVector> {
        if ring.as_witt().is_none() {
            return Err(Error::mismatch(format!("{ring} is not a Witt ring")));
        }
        let e = Elem::Vec(coords);
        ring.check(&e)?;
        let Elem::Vec(coords) = e else { unreachable!() };
        Ok(WittVector {
            ring: ring.clone(),
            coords,
        })
    }

    pub fn from_elem(ring: &Ring, e: &Elem) -> Result<WittVector> {
        match e {
            Elem::Vec(v) => Self::in_ring(ring, v.clone()),
            _ => Err(Error::mismatch(format!("{e} is not a Witt vector"))),
        }
    }

    pub fn zero(ring: &Arc<WittRing>) -> WittVector {
        let r = ring.ring();
        let Elem::Vec(coords) = r.zero() else {
            unreachable!()
        };
        WittVector { ring: r, coords }
    }

    pub fn random<R: rand::Rng + ?Sized>(ring: &Arc<WittRing>, rng: &mut R) -> WittVector {
        let r = ring.ring();
        let Elem::Vec(coords) = r.random(rng) else {
            unreachable!()
        };
        WittVector { ring: r, coords }
    }

    pub fn ring(&self) -> &Ring {
        &self.ring
    }

    pub fn witt(&self) -> &Arc<WittRing> {
        self.ring.as_witt().expect("constructed over a Witt ring")
    }

    pub fn family(&self) -> &Family {
        self.witt().family()
    }

    pub fn set(&self) -> &TruncationSet {
        self.witt().set()
    }

    pub fn base(&self) -> &Ring {
        self.witt().base()
    }

    pub fn coords(&self) -> &[Elem] {
        &self.coords
    }

    pub fn into_coords(self) -> Vec<Elem> {
        self.coords
    }

    pub fn to_elem(&self) -> Elem {
        Elem::Vec(self.coords.clone())
    }

    pub fn coord(&self, n: u64) -> Result<&Elem> {
        Ok(&self.coords[self.set().require(n)?])
    }

    fn same_ring(&self, other: &WittVector) -> Result<()> {
        if self.ring.ptr_eq(&other.ring) || self.ring == other.ring {
            Ok(())
        } else {
            Err(Error::mismatch(format!("{} vs {}", self.ring, other.ring)))
        }
    }

    fn with(&self, coords: Vec<Elem>) -> WittVector {
        WittVector {
            ring: self.ring.clone(),
            coords,
        }
    }

    fn lift(&self, e: Elem) -> WittVector {
        match e {
            Elem::Vec(coords) => self.with(coords),
            _ => unreachable!("Witt ring operations return coordinate vectors"),
        }
    }

    pub fn add(&self, other: &WittVector) -> Result<WittVector> {
        self.same_ring(other)?;
        Ok(self.with(self.witt().add_coords(&self.coords, &other.coords)?))
    }

    pub fn neg(&self) -> Result<WittVector> {
        Ok(self.with(self.witt().neg_coords(&self.coords)?))
    }

    pub fn sub(&self, other: &WittVector) -> Result<WittVector> {
        self.add(&other.neg()?)
    }

    pub fn mul(&self, other: &WittVector) -> Result<WittVector> {
        self.same_ring(other)?;
        Ok(self.with(self.witt().mul_coords(&self.coords, &other.coords)?))
    }

    pub fn pow(&self, e: u32) -> Result<WittVector> {
        Ok(self.lift(self.ring.pow(&self.to_elem(), e)?))
    }

    pub fn int_scale(&self, k: &BigInt) -> Result<WittVector> {
        Ok(self.lift(self.ring.int_scale(&self.to_elem(), k)?))
    }

    pub fn is_zero(&self) -> bool {
        self.ring.is_zero(&self.to_elem())
    }

    /// Ghost components, in the coefficient ring.
    pub fn ghost(&self) -> Result<Vec<Elem>> {
        self.witt().ghost_coords(&self.coords)
    }

    pub fn unghost(ring: &Arc<WittRing>, xs: &[Elem]) -> Result<WittVector> {
        let coords = ring.unghost_coords(xs)?;
        Ok(WittVector {
            ring: ring.ring(),
            coords,
        })
    }

    /// `F_m: W_S → W_{S/m}`.
    pub fn frobenius(&self, m: u64) -> Result<WittVector> {
        let target = self.witt().with_set(self.set().quotient(m)?)?;
        let coords = self.witt().frobenius_coords(&self.coords, m)?;
        Ok(WittVector {
            ring: target.ring(),
            coords,
        })
    }

    /// `V_m: W_{S/m} → W_S`; `self` must live on `S/m`.
    pub fn verschiebung(&self, m: u64, s: &TruncationSet) -> Result<WittVector> {
        let sm = s.quotient(m)?;
        if &sm != self.set() {
            return Err(Error::mismatch(format!(
                "V_{m} expects a vector on {sm}, got {}",
                self.set()
            )));
        }
        let target = self.witt().with_set(s.clone())?;
        let coords = s
            .iter()
            .map(|nu| {
                if nu % m == 0 {
                    self.coords[sm.index_of(nu / m).expect("ν/m ∈ S/m")].clone()
                } else {
                    self.base().zero()
                }
            })
            .collect();
        Ok(WittVector {
            ring: target.ring(),
            coords,
        })
    }

    /// Restriction to a divisor-stable subset (a ring homomorphism).
    pub fn project(&self, sub: &TruncationSet) -> Result<WittVector> {
        if !sub.is_subset_of(self.set()) {
            return Err(Error::NotASubset(sub.to_string(), self.set().to_string()));
        }
        let target = self.witt().with_set(sub.clone())?;
        let coords = sub
            .iter()
            .map(|n| self.coords[self.set().index_of(n).expect("subset")].clone())
            .collect();
        Ok(WittVector {
            ring: target.ring(),
            coords,
        })
    }

    /// Zero-filling section `W_{S'} → W_S` of [`WittVector::project`].
    pub fn section(&self, s: &TruncationSet) -> Result<WittVector> {
        if !self.set().is_subset_of(s) {
            return Err(Error::NotASubset(self.set().to_string(), s.to_string()));
        }
        let target = self.witt().with_set(s.clone())?;
        let coords = s
            .iter()
            .map(|n| match self.set().index_of(n) {
                Some(i) => self.coords[i].clone(),
                None => self.base().zero(),
            })
            .collect();
        Ok(WittVector {
            ring: target.ring(),
            coords,
        })
    }

    /// `(c, 0, …, 0)`.
    pub fn teichmuller(ring: &Arc<WittRing>, c: Elem) -> Result<WittVector> {
        ring.base().check(&c)?;
        let mut coords = vec![ring.base().zero(); ring.set().len()];
        coords[0] = c;
        Ok(WittVector {
            ring: ring.ring(),
            coords,
        })
    }

    /// Whether `self ∈ p·W_S(A)`.
    pub fn is_divisible_by(&self, p: u64) -> Result<bool> {
        self.ring.is_divisible_mod(&self.to_elem(), p, 1)
    }

    pub fn to_json(&self) -> serde_json::Value {
        self.ring.elem_to_json(&self.to_elem())
    }

    pub fn from_json(ring: &Arc<WittRing>, v: &serde_json::Value) -> Result<WittVector> {
        let r = ring.ring();
        let e = r.elem_from_json(v)?;
        WittVector::from_elem(&r, &e)
    }
}

impl PartialEq for WittVector {
    fn eq(&self, other: &WittVector) -> bool {
        self.coords == other.coords && (self.ring.ptr_eq(&other.ring) || self.ring == other.ring)
    }
}

impl Eq for WittVector {}

impl fmt::Display for WittVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_elem())
    }
}

impl fmt::Debug for WittVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "WittVector({} in {})", self.to_elem(), self.ring)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExactSequenceReport {
    pub verschiebung_injective: bool,
    pub projection_surjective: bool,
    pub kernel_is_image: bool,
    pub image_size: usize,
}

impl ExactSequenceReport {
    pub fn holds(&self) -> bool {
        self.verschiebung_injective && self.projection_surjective && self.kernel_is_image
    }
}

/// Enumerates `0 → W_{S/p} → W_S → W_{S(p)} → 0` over a finite ring.
pub fn exact_sequence_check(
    fam: &Family,
    s: &TruncationSet,
    p: u64,
    ring: &Ring,
    q: QBinding,
) -> Result<ExactSequenceReport> {
    if !ring.is_finite() {
        return Err(Error::Unsupported(format!(
            "enumeration over infinite ring {ring}"
        )));
    }
    let full = WittRing::new(fam.clone(), s.clone(), ring.clone(), q)?;
    let small = full.with_set(s.quotient(p)?)?;
    let rest = full.with_set(s.prime_complement(p)?)?;

    let mut image = std::collections::HashSet::new();
    for e in small.ring().elements(DEFAULT_ENUM_LIMIT)? {
        let v = WittVector::from_elem(&small.ring(), &e)?.verschiebung(p, s)?;
        image.insert(v.into_coords());
    }
    let small_size = small.ring().elements(DEFAULT_ENUM_LIMIT)?.len();

    let mut kernel = std::collections::HashSet::new();
    let mut hit = std::collections::HashSet::new();
    for e in full.ring().elements(DEFAULT_ENUM_LIMIT)? {
        let v = WittVector::from_elem(&full.ring(), &e)?;
        let img = v.project(rest.set())?;
        if img.is_zero() {
            kernel.insert(v.coords().to_vec());
        }
        hit.insert(img.into_coords());
    }
    let rest_size = rest.ring().elements(DEFAULT_ENUM_LIMIT)?.len();
    Ok(ExactSequenceReport {
        verschiebung_injective: image.len() == small_size,
        projection_surjective: hit.len() == rest_size,
        kernel_is_image: kernel == image,
        image_size: image.len(),
    })
}

/// The vector with `c` at index `n` and zeros elsewhere.
pub fn basis_vector(ring: &Arc<WittRing>, n: u64, c: Elem) -> Result<WittVector> {
    let mut coords = vec![ring.base().zero(); ring.set().len()];
    coords[ring.set().require(n)?] = c;
    WittVector::new(ring.clone(), coords)
}
