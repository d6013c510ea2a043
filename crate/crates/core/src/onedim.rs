//! One-dimensional polynomial ring laws `(F, G)` over a coefficient ring,
//! their axioms, the normal form over reduced rings, and the isomorphisms
//! between twisted lines `x ∗ y = r·x·y`.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::expr::{Expr, ExprTarget};
use crate::report::Report;
use crate::rings::{Elem, Ring, RingKind};

/// A polynomial in `x, y, z` with coefficients in `ring`.
#[derive(Clone, Debug, PartialEq)]
pub struct RingPoly {
    ring: Ring,
    terms: BTreeMap<[u32; 3], Elem>,
}

const NAMES: [&str; 3] = ["x", "y", "z"];

impl RingPoly {
    pub fn zero(ring: &Ring) -> Self {
        RingPoly {
            ring: ring.clone(),
            terms: BTreeMap::new(),
        }
    }

    pub fn term(ring: &Ring, c: Elem, exps: [u32; 3]) -> Self {
        let mut p = Self::zero(ring);
        if !ring.is_zero(&c) {
            p.terms.insert(exps, c);
        }
        p
    }

    pub fn constant(ring: &Ring, c: Elem) -> Self {
        Self::term(ring, c, [0; 3])
    }

    /// The variable `x` (`i = 0`), `y` (`i = 1`) or `z` (`i = 2`).
    pub fn var(ring: &Ring, i: usize) -> Result<Self> {
        let one = ring
            .one()
            .ok_or_else(|| Error::ConstantTermNonUnital(ring.to_string()))?;
        let mut e = [0; 3];
        e[i] = 1;
        Ok(Self::term(ring, one, e))
    }

    /// Parses `x+y+eps*x*y`; names other than `x, y, z` are ring constants.
    pub fn parse(ring: &Ring, s: &str) -> Result<Self> {
        Expr::parse(s)?.eval(&PolyTarget(ring))
    }

    pub fn ring(&self) -> &Ring {
        &self.ring
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[u32; 3], &Elem)> {
        self.terms.iter()
    }

    pub fn coeff(&self, exps: [u32; 3]) -> Elem {
        self.terms
            .get(&exps)
            .cloned()
            .unwrap_or_else(|| self.ring.zero())
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|e| e.iter().sum()).max().unwrap_or(0)
    }

    fn insert_add(&mut self, exps: [u32; 3], c: &Elem) -> Result<()> {
        let next = match self.terms.get(&exps) {
            Some(old) => self.ring.add(old, c)?,
            None => c.clone(),
        };
        if self.ring.is_zero(&next) {
            self.terms.remove(&exps);
        } else {
            self.terms.insert(exps, next);
        }
        Ok(())
    }

    pub fn add(&self, other: &RingPoly) -> Result<RingPoly> {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.insert_add(*e, c)?;
        }
        Ok(out)
    }

    pub fn neg(&self) -> Result<RingPoly> {
        let mut out = Self::zero(&self.ring);
        for (e, c) in &self.terms {
            out.terms.insert(*e, self.ring.neg(c)?);
        }
        Ok(out)
    }

    pub fn sub(&self, other: &RingPoly) -> Result<RingPoly> {
        self.add(&other.neg()?)
    }

    pub fn mul(&self, other: &RingPoly) -> Result<RingPoly> {
        let mut out = Self::zero(&self.ring);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let e = [ea[0] + eb[0], ea[1] + eb[1], ea[2] + eb[2]];
                out.insert_add(e, &self.ring.mul(ca, cb)?)?;
            }
        }
        Ok(out)
    }

    pub fn pow(&self, e: u32) -> Result<RingPoly> {
        let one = self
            .ring
            .one()
            .ok_or_else(|| Error::ConstantTermNonUnital(self.ring.to_string()))?;
        let mut out = Self::constant(&self.ring, one);
        for _ in 0..e {
            out = out.mul(self)?;
        }
        Ok(out)
    }

    /// Substitutes `subs[i]` for the `i`-th variable.
    pub fn compose(&self, subs: &[RingPoly; 3]) -> Result<RingPoly> {
        let mut out = Self::zero(&self.ring);
        for (e, c) in &self.terms {
            let mut t = Self::constant(&self.ring, c.clone());
            for (i, s) in subs.iter().enumerate() {
                if e[i] > 0 {
                    t = t.mul(&s.pow(e[i])?)?;
                }
            }
            out = out.add(&t)?;
        }
        Ok(out)
    }

    pub fn eval(&self, point: &[Elem; 3]) -> Result<Elem> {
        let mut acc = self.ring.zero();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for (i, v) in point.iter().enumerate() {
                if e[i] > 0 {
                    t = self.ring.mul(&t, &self.ring.pow(v, e[i])?)?;
                }
            }
            acc = self.ring.add(&acc, &t)?;
        }
        Ok(acc)
    }

    /// Drops every term of total degree above `d`.
    fn truncate(&self, d: u32) -> RingPoly {
        let terms = self
            .terms
            .iter()
            .filter(|(e, _)| e.iter().sum::<u32>() <= d)
            .map(|(e, c)| (*e, c.clone()))
            .collect();
        RingPoly {
            ring: self.ring.clone(),
            terms,
        }
    }
}

impl fmt::Display for RingPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, c) in &self.terms {
            let mono: Vec<String> = (0..3)
                .filter(|&i| e[i] > 0)
                .map(|i| {
                    if e[i] == 1 {
                        NAMES[i].to_string()
                    } else {
                        format!("{}^{}", NAMES[i], e[i])
                    }
                })
                .collect();
            let coef = c.to_string();
            let simple = coef
                .trim_start_matches('-')
                .chars()
                .all(|ch| ch.is_ascii_digit());
            let (sign, coef) = match coef.strip_prefix('-') {
                Some(rest) if simple => ("-", rest.to_string()),
                _ if simple => ("+", coef),
                _ => ("+", format!("({coef})")),
            };
            if !first || sign == "-" {
                write!(f, "{sign}")?;
            }
            first = false;
            match (coef.as_str(), mono.is_empty()) {
                (_, true) => write!(f, "{coef}")?,
                ("1", false) => write!(f, "{}", mono.join("*"))?,
                _ => write!(f, "{coef}*{}", mono.join("*"))?,
            }
        }
        Ok(())
    }
}

struct PolyTarget<'a>(&'a Ring);

impl ExprTarget for PolyTarget<'_> {
    type Value = RingPoly;

    fn int(&self, k: &BigInt) -> Result<RingPoly> {
        Ok(RingPoly::constant(self.0, self.0.from_int(k.clone())?))
    }

    fn var(&self, name: &str) -> Result<RingPoly> {
        match NAMES.iter().position(|n| *n == name) {
            Some(i) => RingPoly::var(self.0, i),
            None => Ok(RingPoly::constant(self.0, self.0.parse_elem(name)?)),
        }
    }

    fn add(&self, a: &RingPoly, b: &RingPoly) -> Result<RingPoly> {
        a.add(b)
    }

    fn neg(&self, a: &RingPoly) -> Result<RingPoly> {
        a.neg()
    }

    fn mul(&self, a: &RingPoly, b: &RingPoly) -> Result<RingPoly> {
        a.mul(b)
    }

    fn pow(&self, a: &RingPoly, e: u32) -> Result<RingPoly> {
        a.pow(e)
    }
}

/// A candidate one-dimensional ring law: addition `F(x, y)`, multiplication `G(x, y)`.
#[derive(Clone, Debug, PartialEq)]
pub struct RingLaw1D {
    pub f: RingPoly,
    pub g: RingPoly,
}

impl RingLaw1D {
    pub fn new(f: RingPoly, g: RingPoly) -> Result<Self> {
        if f.ring() != g.ring() {
            return Err(Error::mismatch(format!("{} vs {}", f.ring(), g.ring())));
        }
        if f.terms().any(|(e, _)| e[2] > 0) || g.terms().any(|(e, _)| e[2] > 0) {
            return Err(Error::Parse("ring laws are written in x and y only".into()));
        }
        Ok(RingLaw1D { f, g })
    }

    pub fn parse(ring: &Ring, f: &str, g: &str) -> Result<Self> {
        Self::new(RingPoly::parse(ring, f)?, RingPoly::parse(ring, g)?)
    }

    /// `F = x + y`, `G = r·x·y`.
    pub fn twisted_line(ring: &Ring, r: Elem) -> Result<Self> {
        let f = RingPoly::var(ring, 0)?.add(&RingPoly::var(ring, 1)?)?;
        Self::new(f, RingPoly::term(ring, r, [1, 1, 0]))
    }

    pub fn ring(&self) -> &Ring {
        self.f.ring()
    }
}

/// How a law was checked.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VerifyMode {
    Symbolic,
    Sampled,
}

#[derive(Clone, Debug)]
pub struct LawVerification {
    pub report: Report,
    pub mode: VerifyMode,
    /// The polynomial `I` with `F(x, I(x)) = 0`, when one exists below the bound.
    pub inverse: Option<RingPoly>,
    /// A point `c` with `G(x, c) = x`, when the bounded search finds one.
    pub counit: Option<Elem>,
}

fn symbolic_ring(ring: &Ring) -> bool {
    matches!(
        ring.kind(),
        RingKind::Integers | RingKind::PolyQ | RingKind::Dual | RingKind::Universal
    )
}

fn vars(ring: &Ring) -> Result<[RingPoly; 3]> {
    Ok([
        RingPoly::var(ring, 0)?,
        RingPoly::var(ring, 1)?,
        RingPoly::var(ring, 2)?,
    ])
}

/// Checks the ring-law axioms, symbolically over ℤ, ℤ[q] and the dual
/// numbers and on `budget` sampled triples over finite rings.
pub fn verify_law(law: &RingLaw1D, budget: usize, seed: u64) -> Result<LawVerification> {
    let ring = law.ring().clone();
    let mode = if symbolic_ring(&ring) {
        VerifyMode::Symbolic
    } else {
        VerifyMode::Sampled
    };
    let [x, y, z] = vars(&ring)?;
    let zero = RingPoly::zero(&ring);
    let (f, g) = (&law.f, &law.g);
    let f2 = |a: &RingPoly, b: &RingPoly| f.compose(&[a.clone(), b.clone(), zero.clone()]);
    let g2 = |a: &RingPoly, b: &RingPoly| g.compose(&[a.clone(), b.clone(), zero.clone()]);

    let mut identities: Vec<(&str, RingPoly, RingPoly)> = vec![
        ("F(x, 0) = x", f2(&x, &zero)?, x.clone()),
        (
            "F is associative",
            f2(&x, &f2(&y, &z)?)?,
            f2(&f2(&x, &y)?, &z)?,
        ),
        ("F is commutative", f2(&x, &y)?, f2(&y, &x)?),
        (
            "G is associative",
            g2(&x, &g2(&y, &z)?)?,
            g2(&g2(&x, &y)?, &z)?,
        ),
        ("G is commutative", g2(&x, &y)?, g2(&y, &x)?),
        (
            "G distributes over F",
            g2(&x, &f2(&y, &z)?)?,
            f2(&g2(&x, &y)?, &g2(&x, &z)?)?,
        ),
    ];

    let mut report = Report::new(format!("ringlaw[F={f}, G={g}]"));
    match mode {
        VerifyMode::Symbolic => {
            for (name, lhs, rhs) in identities.drain(..) {
                report.record_result(name, Ok(lhs == rhs));
            }
        }
        VerifyMode::Sampled => {
            let points = sample_points(&ring, budget, seed)?;
            for (name, lhs, rhs) in identities.drain(..) {
                let mut witness = None;
                for pt in &points {
                    if !ring.eq(&lhs.eval(pt)?, &rhs.eval(pt)?) {
                        witness = Some(format!("fails at ({}, {}, {})", pt[0], pt[1], pt[2]));
                        break;
                    }
                }
                report.record_sampled(name, Ok(witness));
            }
        }
    }

    let bound = 2 * f.degree().max(1);
    let inverse = additive_inverse(f, bound)?;
    report.record(
        "additive inverse is a polynomial",
        inverse.is_some(),
        inverse
            .is_none()
            .then(|| format!("no polynomial inverse up to degree {bound}")),
    );
    let counit = find_counit(g)?;
    Ok(LawVerification {
        report,
        mode,
        inverse,
        counit,
    })
}

fn sample_points(ring: &Ring, budget: usize, seed: u64) -> Result<Vec<[Elem; 3]>> {
    if let Some(n) = ring.size() {
        if n.pow(3) <= BigInt::from(budget.max(1)) {
            let elems = ring.elements(crate::rings::DEFAULT_ENUM_LIMIT)?;
            let mut out = Vec::new();
            for a in &elems {
                for b in &elems {
                    for c in &elems {
                        out.push([a.clone(), b.clone(), c.clone()]);
                    }
                }
            }
            return Ok(out);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..budget.max(1))
        .map(|_| {
            [
                ring.random(&mut rng),
                ring.random(&mut rng),
                ring.random(&mut rng),
            ]
        })
        .collect())
}

/// Solves `F(x, I(x)) = 0` degree by degree; `None` if no polynomial of
/// degree at most `bound` works.
fn additive_inverse(f: &RingPoly, bound: u32) -> Result<Option<RingPoly>> {
    let ring = f.ring().clone();
    let x = RingPoly::var(&ring, 0)?;
    let zero = RingPoly::zero(&ring);
    let one = ring
        .one()
        .ok_or_else(|| Error::ConstantTermNonUnital(ring.to_string()))?;
    // The coefficient of y in F must be a unit for the recursion to be solvable.
    let lin = f.coeff([0, 1, 0]);
    if lin != one {
        return Ok(None);
    }
    let mut inv = RingPoly::zero(&ring);
    for k in 1..=bound {
        let val = f
            .compose(&[x.clone(), inv.clone(), zero.clone()])?
            .truncate(k);
        let c = val.coeff([k, 0, 0]);
        if !ring.is_zero(&c) {
            inv = inv.sub(&RingPoly::term(&ring, c, [k, 0, 0]))?;
        }
    }
    let check = f.compose(&[x, inv.clone(), zero])?;
    Ok(check.is_zero().then_some(inv))
}

/// Looks for `c` with `G(x, c) = x` among small integers, units and, for
/// finite rings, every element.
fn find_counit(g: &RingPoly) -> Result<Option<Elem>> {
    let ring = g.ring().clone();
    let x = RingPoly::var(&ring, 0)?;
    let mut candidates: Vec<Elem> = match ring.elements(crate::rings::DEFAULT_ENUM_LIMIT) {
        Ok(all) => all,
        Err(_) => (-8..=8).map(|k| ring.from_int(k)).collect::<Result<_>>()?,
    };
    if let Ok(units) = ring.units() {
        candidates.extend(units);
    }
    for c in candidates {
        let val = g.compose(&[
            x.clone(),
            RingPoly::constant(&ring, c.clone()),
            RingPoly::zero(&ring),
        ])?;
        if val == x {
            return Ok(Some(c));
        }
    }
    Ok(None)
}

/// Over a reduced ring every law is `(x + y, r·x·y)`; returns `r`.
pub fn classify_reduced(law: &RingLaw1D) -> Result<Elem> {
    let ring = law.ring();
    if !ring.is_reduced() {
        return Err(Error::NotReduced(ring.to_string()));
    }
    let one = ring
        .one()
        .ok_or_else(|| Error::ConstantTermNonUnital(ring.to_string()))?;
    let sum =
        RingPoly::term(ring, one.clone(), [1, 0, 0]).add(&RingPoly::term(ring, one, [0, 1, 0]))?;
    if law.f != sum {
        return Err(Error::NotInNormalForm(format!("F = {} is not x+y", law.f)));
    }
    if law.g.terms().any(|(e, _)| *e != [1, 1, 0]) {
        return Err(Error::NotInNormalForm(format!(
            "G = {} is not a multiple of x*y",
            law.g
        )));
    }
    Ok(law.g.coeff([1, 1, 0]))
}

/// All units `u` with `r = r'·u`; each realizes `x ↦ u·x` from the line
/// twisted by `r` to the line twisted by `r'`, which is checked on samples.
pub fn twisted_isos(r: &Elem, r2: &Elem, ring: &Ring) -> Result<Vec<Elem>> {
    ring.check(r)?;
    ring.check(r2)?;
    let units = ring.units()?;
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let samples: Vec<(Elem, Elem)> = (0..16)
        .map(|_| (ring.random(&mut rng), ring.random(&mut rng)))
        .collect();
    let mut out = Vec::new();
    for u in units {
        if !ring.eq(r, &ring.mul(r2, &u)?) {
            continue;
        }
        for (a, b) in &samples {
            let lhs = ring.mul(&u, &ring.mul(r, &ring.mul(a, b)?)?)?;
            let rhs = ring.mul(r2, &ring.mul(&ring.mul(&u, a)?, &ring.mul(&u, b)?)?)?;
            if !ring.eq(&lhs, &rhs) {
                return Err(Error::CertificationFailed(format!(
                    "x ↦ {u}·x is not multiplicative at ({a}, {b})"
                )));
            }
        }
        out.push(u);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn laws_over_integers() {
        let z = Ring::integers();
        for r in [-3, 0, 1, 7] {
            let law = RingLaw1D::twisted_line(&z, Elem::int(r)).unwrap();
            let v = verify_law(&law, 50, 1).unwrap();
            assert!(v.report.passed(), "{:?}", v.report);
            assert_eq!(v.mode, VerifyMode::Symbolic);
            assert_eq!(classify_reduced(&law).unwrap(), Elem::int(r));
            assert_eq!(v.counit.is_some(), r == 1);
        }
        let law = RingLaw1D::parse(&z, "x+y", "5*x*y").unwrap();
        assert_eq!(classify_reduced(&law).unwrap(), Elem::int(5));
        let law = RingLaw1D::parse(&z, "x+y", "0").unwrap();
        assert_eq!(classify_reduced(&law).unwrap(), Elem::int(0));
    }

    #[test]
    fn multiplicative_group_law_has_no_polynomial_inverse() {
        let law = RingLaw1D::parse(&Ring::integers(), "x+y+x*y", "x*y").unwrap();
        let v = verify_law(&law, 50, 1).unwrap();
        assert_eq!(
            v.report.check_passed("additive inverse is a polynomial"),
            Some(false)
        );
        assert_eq!(v.report.check_passed("F is associative"), Some(true));
        assert!(matches!(
            classify_reduced(&law),
            Err(Error::NotInNormalForm(_))
        ));
    }

    #[test]
    fn dual_number_law() {
        let d = Ring::dual();
        for r in ["1", "3", "2+eps"] {
            let law = RingLaw1D::parse(&d, "x+y+eps*x*y", &format!("({r})*eps*x*y")).unwrap();
            let v = verify_law(&law, 50, 1).unwrap();
            assert!(v.report.passed(), "{:?}", v.report);
            assert_eq!(v.inverse.unwrap().to_string(), "-x+(eps)*x^2");
            assert!(matches!(classify_reduced(&law), Err(Error::NotReduced(_))));
        }
    }

    #[test]
    fn sampled_over_finite_rings() {
        let z6 = Ring::zmod(6);
        let law = RingLaw1D::twisted_line(&z6, Elem::int(2)).unwrap();
        let v = verify_law(&law, 500, 1).unwrap();
        assert_eq!(v.mode, VerifyMode::Sampled);
        assert!(v.report.passed());
        let bad = RingLaw1D::parse(&z6, "x+y", "x*y+x").unwrap();
        let v = verify_law(&bad, 500, 1).unwrap();
        assert!(!v.report.passed());
        assert_eq!(
            classify_reduced(&RingLaw1D::twisted_line(&z6, Elem::int(5)).unwrap()).unwrap(),
            Elem::int(5)
        );
        assert!(matches!(
            classify_reduced(&RingLaw1D::twisted_line(&Ring::zmod(4), Elem::int(1)).unwrap()),
            Err(Error::NotReduced(_))
        ));
    }

    #[test]
    fn twisted_iso_examples() {
        let z = Ring::integers();
        assert_eq!(
            twisted_isos(&Elem::int(2), &Elem::int(2), &z).unwrap(),
            vec![Elem::int(1)]
        );
        assert_eq!(
            twisted_isos(&Elem::int(2), &Elem::int(-2), &z).unwrap(),
            vec![Elem::int(-1)]
        );
        assert_eq!(
            twisted_isos(&Elem::int(2), &Elem::int(3), &z).unwrap(),
            vec![]
        );
        let z6 = Ring::zmod(6);
        assert_eq!(
            twisted_isos(&Elem::int(0), &Elem::int(0), &z6).unwrap(),
            vec![Elem::int(1), Elem::int(5)]
        );
        let zq = Ring::zq();
        let q = zq.parse_elem("q").unwrap();
        let mq = zq.parse_elem("-q").unwrap();
        assert_eq!(
            twisted_isos(&q, &mq, &zq).unwrap(),
            vec![zq.from_int(-1).unwrap()]
        );
        assert!(twisted_isos(
            &Elem::Dual(1.into(), 0.into()),
            &Elem::Dual(1.into(), 0.into()),
            &Ring::dual()
        )
        .is_err());
    }

    proptest! {
        #[test]
        fn classify_recovers_r(r in -1000i64..1000) {
            let law = RingLaw1D::twisted_line(&Ring::integers(), Elem::int(r)).unwrap();
            prop_assert_eq!(classify_reduced(&law).unwrap(), Elem::int(r));
        }

        #[test]
        fn iso_sets_are_symmetric(a in 0i64..12, b in 0i64..12) {
            let ring = Ring::zmod(12);
            let (ra, rb) = (Elem::int(a), Elem::int(b));
            let fwd = twisted_isos(&ra, &rb, &ring).unwrap();
            let back = twisted_isos(&rb, &ra, &ring).unwrap();
            prop_assert_eq!(fwd.is_empty(), back.is_empty());
            for u in &fwd {
                let inv = ring.inverse(u).unwrap();
                prop_assert!(back.contains(&inv));
            }
        }

        #[test]
        fn non_zero_divisors_have_trivial_automorphisms(r in 1i64..50) {
            let z = Ring::integers();
            prop_assert_eq!(twisted_isos(&Elem::int(r), &Elem::int(r), &z).unwrap(), vec![Elem::int(1)]);
            let z7 = Ring::zmod(7);
            let e = z7.from_int(r).unwrap();
            if !z7.is_zero(&e) {
                prop_assert_eq!(twisted_isos(&e, &e, &z7).unwrap(), vec![Elem::int(1)]);
            }
        }
    }
}
