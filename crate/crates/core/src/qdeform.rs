//! Constructions specific to the deformations: the polynomials `h` and `r`,
//! the Lenart isomorphism on `{1,p}`, its Frobenius defect when `p | q`, and
//! the identification `W̄^{g} ≅ W^{(1-g)}`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::mpoly::MPoly;
use crate::report::Report;
use crate::rings::{Elem, Ring, UPoly};
use crate::systems::{self, WittSystem};
use crate::truncset::{is_prime, TruncationSet};
use crate::universal::{generic_vector, universal_binding, Bank, Family};
use crate::witt::{WittRing, WittVector};

fn require_prime(p: u64) -> Result<()> {
    if is_prime(p) {
        Ok(())
    } else {
        Err(Error::Parse(format!("{p} is not prime")))
    }
}

/// `h(q) = 1 + (1-q) + ⋯ + (1-q)^{p-1}`.
pub fn h_poly(p: u64) -> Result<UPoly> {
    require_prime(p)?;
    let base = UPoly::from_i64(&[1, -1]);
    let mut h = UPoly::zero();
    let mut pw = UPoly::one();
    for _ in 0..p {
        h = h.add(&pw);
        pw = pw.mul(&base);
    }
    Ok(h)
}

/// `r(q) = (1 - q^p - (1-q)^p) / (p·q)`, with both divisions checked.
pub fn r_poly(p: u64) -> Result<UPoly> {
    require_prime(p)?;
    let e = p as u32;
    let num = UPoly::one()
        .sub(&UPoly::q().pow(e))
        .sub(&UPoly::from_i64(&[1, -1]).pow(e));
    num.div_int(&BigInt::from(p))
        .and_then(|t| t.div_q_power(1))
        .ok_or_else(|| Error::IntegralityViolation(format!("r(q) for p = {p}")))
}

/// `(q^{p-1} - 1)/p`, the correction term of the Lenart isomorphism.
pub fn lenart_correction(p: u64, q: i64) -> Result<BigInt> {
    require_prime(p)?;
    let qb = BigInt::from(q);
    if qb.is_multiple_of(&BigInt::from(p)) {
        return Err(Error::PDividesQ {
            p,
            q: q.to_string(),
        });
    }
    let num: BigInt = qb.pow(p as u32 - 1) - 1;
    let (c, rem) = num.div_rem(&BigInt::from(p));
    if !rem.is_zero() {
        return Err(Error::IntegralityViolation(format!(
            "q^(p-1) - 1 is not divisible by {p}"
        )));
    }
    Ok(c)
}

fn lenart_parts(
    p: u64,
    q: i64,
    a: &WittVector,
    family: &Family,
) -> Result<(BigInt, TruncationSet)> {
    let c = lenart_correction(p, q)?;
    let s = TruncationSet::new(&[1, p])?;
    if a.family() != family || a.set() != &s {
        return Err(Error::mismatch(format!(
            "expected a {family} vector on {s}, got {}",
            a.ring()
        )));
    }
    Ok((c, s))
}

/// `(a₁, a_p) ↦ (a₁, a_p + ((q^{p-1}-1)/p)·a₁^p)`, from `W^q_{1,p}(A)` to `W_{1,p}(A)`.
pub fn lenart_iso(p: u64, q: i64, a: &WittVector) -> Result<WittVector> {
    let (c, s) = lenart_parts(p, q, a, &Family::Lenart(q))?;
    let base = a.base();
    let corr = base.int_scale(&base.pow(&a.coords()[0], p as u32)?, &c)?;
    let coords = vec![a.coords()[0].clone(), base.add(&a.coords()[1], &corr)?];
    WittVector::new(WittRing::classical(s, base.clone())?, coords)
}

/// The inverse of [`lenart_iso`]: subtracts the same correction.
pub fn lenart_iso_inverse(p: u64, q: i64, b: &WittVector) -> Result<WittVector> {
    let (c, s) = lenart_parts(p, q, b, &Family::Classical)?;
    let base = b.base();
    let corr = base.int_scale(&base.pow(&b.coords()[0], p as u32)?, &c)?;
    let coords = vec![b.coords()[0].clone(), base.sub(&b.coords()[1], &corr)?];
    WittVector::new(
        WittRing::new(
            Family::Lenart(q),
            s,
            base.clone(),
            crate::witt::QBinding::None,
        )?,
        coords,
    )
}

/// A vector of `W^q_{1,p}(ℤ)` whose Frobenius is not congruent to its
/// projected `p`-th power modulo `p`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FrobeniusDefect {
    pub vector: WittVector,
    pub frobenius: Elem,
    pub power: Elem,
}

/// Returns a witness when `q^{p-1} ≢ 1 (mod p)`, and `None` otherwise.
pub fn lenart_frobenius_defect(p: u64, q: i64) -> Result<Option<FrobeniusDefect>> {
    require_prime(p)?;
    let pb = BigInt::from(p);
    let defect: BigInt = BigInt::from(q).pow(p as u32 - 1) - 1;
    if defect.is_multiple_of(&pb) {
        return Ok(None);
    }
    let s = TruncationSet::new(&[1, p])?;
    let z = Ring::integers();
    let ring = WittRing::new(Family::Lenart(q), s, z.clone(), crate::witt::QBinding::None)?;
    let one = TruncationSet::one();
    for (a1, ap) in [(1, 0), (1, 1), (2, 0), (-1, 0)] {
        let a = WittVector::new(ring.clone(), vec![Elem::int(a1), Elem::int(ap)])?;
        let f = a.frobenius(p)?.coords()[0].clone();
        let pw = z.pow(&a.project(&one)?.coords()[0], p as u32)?;
        if !z.is_divisible_mod(&z.sub(&f, &pw)?, p, 1)? {
            return Ok(Some(FrobeniusDefect {
                vector: a,
                frobenius: f,
                power: pw,
            }));
        }
    }
    Err(Error::CertificationFailed(format!(
        "no small witness for p = {p}, q = {q}"
    )))
}

/// Polynomial-level certificate for `W̄^{g}_S ≅ W^{(1-g)}_S` and its sign twin.
#[derive(Clone, Debug, Serialize)]
pub struct QBarCertificate {
    pub g: String,
    pub set: TruncationSet,
    /// Coordinates of `α(X)` for the generic vector `X`.
    pub alpha: Vec<MPoly>,
    /// Coordinates of `α⁻¹(Z)` for the generic vector `Z` of `W^{(1-g)}`.
    pub inverse: Vec<MPoly>,
    /// Every `r = c₀ + c₁q + ⋯` with small coefficients admitting an isomorphism.
    pub twists: Vec<String>,
    pub report: Report,
}

fn twisted_universal(r: &UPoly) -> Result<Ring> {
    if r == &UPoly::one() {
        Ok(Ring::universal())
    } else {
        Ring::twisted(Ring::universal(), Elem::Multi(MPoly::from_upoly_q(r)))
    }
}

fn multis(v: &WittVector) -> Vec<MPoly> {
    v.coords()
        .iter()
        .map(|c| c.as_multi().cloned().unwrap_or_else(MPoly::zero))
        .collect()
}

/// `W_S(U^{(r)})` over the universal ring `U = ℤ[Q, X, Y]`.
fn twisted_witt(s: &TruncationSet, r: &UPoly) -> Result<std::sync::Arc<WittRing>> {
    WittRing::classical(s.clone(), twisted_universal(r)?)
}

/// The vector of `W_S(U^{(r)})` with the given ghost components, if integral.
fn unghost_into(s: &TruncationSet, r: &UPoly, ghost: &[Elem]) -> Result<Option<WittVector>> {
    match WittVector::unghost(&twisted_witt(s, r)?, ghost) {
        Ok(v) => Ok(Some(v)),
        Err(Error::NotInGhostImage(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Multiplies every coordinate by `u = ±1`, moving `W^{(r)}` to `W^{(ur)}`.
fn scale_coords(v: &WittVector, u: i64, r: &UPoly) -> Result<WittVector> {
    let target = twisted_witt(v.set(), &r.scale(&BigInt::from(u)))?;
    let coords = v
        .coords()
        .iter()
        .map(|c| v.base().int_scale_i64(c, u))
        .collect::<Result<Vec<_>>>()?;
    WittVector::new(target, coords)
}

/// Whether `φ = u·α_{ur}` is additive and multiplicative on generic inputs.
fn is_ring_map_to(src_x: &WittVector, src_y: &WittVector, r: &UPoly, u: i64) -> Result<bool> {
    let s = src_x.set().clone();
    let inner = r.scale(&BigInt::from(u));
    let phi = |v: &WittVector| -> Result<Option<WittVector>> {
        match unghost_into(&s, &inner, &v.ghost()?)? {
            Some(w) => Ok(Some(scale_coords(&w, u, &inner)?)),
            None => Ok(None),
        }
    };
    let (Some(px), Some(py)) = (phi(src_x)?, phi(src_y)?) else {
        return Ok(false);
    };
    let Some(sum) = phi(&src_x.add(src_y)?)? else {
        return Ok(false);
    };
    if sum != px.add(&py)? {
        return Ok(false);
    }
    let Some(prod) = phi(&src_x.mul(src_y)?)? else {
        return Ok(false);
    };
    Ok(prod == px.mul(&py)?)
}

/// Certifies `W̄^{g}_S ≅ W^{(1-g)}_S` at polynomial level: the map built by
/// the systems construction is an additive, multiplicative bijection
/// commuting with every `F_n` and `V_p`, and so is its composite with
/// coordinatewise negation into `W^{(g-1)}_S`. Also searches the twists
/// `r` with coefficients in `[-2, 2]` up to `max(1, deg g)` for others.
pub fn qbar_to_qdef_iso(g: &UPoly, s: &TruncationSet) -> Result<QBarCertificate> {
    let fam = Family::qbar(g.clone());
    let r = UPoly::one().sub(g);
    let twin = r.neg();
    let mut report = Report::new(format!("qbar-iso[g={g}, S={s}]"));

    let sys = WittSystem::new(
        fam.clone(),
        Ring::universal(),
        universal_binding(&fam),
        s.clone(),
    )?;
    let x = generic_vector(&fam, s, Bank::X)?;
    let y = generic_vector(&fam, s, Bank::Y)?;
    let alpha = |v: &WittVector| systems::alpha(&sys, v.set(), &v.to_elem());
    let (ax, ay) = (alpha(&x)?, alpha(&y)?);

    report.record_result(
        "alpha lands in W^(1-g)",
        Ok(ax.ring() == &twisted_witt(s, &r)?.ring()),
    );
    report.record_result(
        "alpha preserves the first coordinate",
        Ok(ax.coords()[0] == x.coords()[0]),
    );
    report.record_result("alpha is additive", Ok(alpha(&x.add(&y)?)? == ax.add(&ay)?));
    report.record_result(
        "alpha is multiplicative",
        Ok(alpha(&x.mul(&y)?)? == ax.mul(&ay)?),
    );
    for n in s.iter().filter(|&n| n > 1) {
        report.record_result(
            format!("alpha∘F_{n} = F_{n}∘alpha"),
            Ok(alpha(&x.frobenius(n)?)? == ax.frobenius(n)?),
        );
    }
    for p in s.primes() {
        let xp = generic_vector(&fam, &s.quotient(p)?, Bank::X)?;
        let lhs = alpha(&xp.verschiebung(p, s)?)?;
        report.record_result(
            format!("alpha∘V_{p} = V_{p}∘alpha"),
            Ok(lhs == alpha(&xp)?.verschiebung(p, s)?),
        );
    }

    // The inverse goes back through the ghost map of the source family.
    let target = twisted_witt(s, &r)?;
    let z = WittVector::new(target, s.iter().map(|d| Elem::Multi(MPoly::x(d))).collect())?;
    let inverse = |w: &WittVector| WittVector::unghost(x.witt(), &w.ghost()?);
    let zi = inverse(&z)?;
    report.record_result("alpha∘inverse = id", Ok(alpha(&zi)? == z));
    report.record_result("inverse∘alpha = id", Ok(inverse(&ax)? == x));

    let nx = scale_coords(&ax, -1, &r)?;
    let ny = scale_coords(&ay, -1, &r)?;
    let neg_alpha = |v: &WittVector| scale_coords(&alpha(v)?, -1, &r);
    report.record_result(
        "twin lands in W^(g-1)",
        Ok(nx.ring() == &twisted_witt(s, &twin)?.ring()),
    );
    report.record_result(
        "twin is additive",
        Ok(neg_alpha(&x.add(&y)?)? == nx.add(&ny)?),
    );
    report.record_result(
        "twin is multiplicative",
        Ok(neg_alpha(&x.mul(&y)?)? == nx.mul(&ny)?),
    );
    for n in s.iter().filter(|&n| n > 1) {
        report.record_result(
            format!("twin∘F_{n} = F_{n}∘twin"),
            Ok(neg_alpha(&x.frobenius(n)?)? == nx.frobenius(n)?),
        );
    }
    for p in s.primes() {
        let xp = generic_vector(&fam, &s.quotient(p)?, Bank::X)?;
        let lhs = neg_alpha(&xp.verschiebung(p, s)?)?;
        report.record_result(
            format!("twin∘V_{p} = V_{p}∘twin"),
            Ok(lhs == neg_alpha(&xp)?.verschiebung(p, s)?),
        );
    }

    let found = twist_search(g, &x, &y)?;
    let mut expected = vec![r.clone(), twin.clone()];
    expected.sort_by_key(|p| p.to_string());
    expected.dedup();
    report.record(
        "twist search finds exactly 1-g and g-1",
        found == expected,
        (found != expected).then(|| {
            format!(
                "found {}",
                found
                    .iter()
                    .map(|p| p.to_string())
                    .collect::<Vec<_>>()
                    .join(", ")
            )
        }),
    );

    if !report.passed() {
        let failed: Vec<String> = report.failures().map(|c| c.check.clone()).collect();
        return Err(Error::CertificationFailed(failed.join("; ")));
    }
    Ok(QBarCertificate {
        g: g.to_string(),
        set: s.clone(),
        alpha: multis(&ax),
        inverse: multis(&zi),
        twists: found.iter().map(|p| p.to_string()).collect(),
        report,
    })
}

fn twist_search(g: &UPoly, x: &WittVector, y: &WittVector) -> Result<Vec<UPoly>> {
    let deg = g.degree().unwrap_or(0).max(1);
    let mut candidates: Vec<Vec<i64>> = vec![Vec::new()];
    for _ in 0..=deg {
        candidates = candidates
            .into_iter()
            .flat_map(|c| (-2..=2).map(move |k| [c.as_slice(), &[k]].concat()))
            .collect();
    }
    let mut found = Vec::new();
    for coeffs in candidates {
        let r = UPoly::from_i64(&coeffs);
        if r.is_zero() {
            continue;
        }
        for u in [1, -1] {
            if is_ring_map_to(x, y, &r, u)? {
                found.push(r.clone());
                break;
            }
        }
    }
    found.sort_by_key(|p| p.to_string());
    Ok(found)
}

/// Whether `q·h(q) = 1 - (1-q)^p`.
pub fn h_identity_holds(p: u64) -> Result<bool> {
    let lhs = UPoly::q().mul(&h_poly(p)?);
    let rhs = UPoly::one().sub(&UPoly::from_i64(&[1, -1]).pow(p as u32));
    Ok(lhs == rhs && h_poly(p)?.eval(&BigInt::one()).is_one())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Expr;
    use crate::universal::derive;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn up(s: &str) -> UPoly {
        Expr::parse(s).unwrap().to_upoly().unwrap()
    }

    fn set(e: &[u64]) -> TruncationSet {
        TruncationSet::new(e).unwrap()
    }

    #[test]
    fn h_and_r() {
        assert_eq!(h_poly(2).unwrap(), up("2-q"));
        assert_eq!(h_poly(3).unwrap(), up("3-3*q+q^2"));
        assert_eq!(r_poly(2).unwrap(), up("1-q"));
        for p in [2, 3, 5, 7] {
            assert!(h_identity_holds(p).unwrap());
            let r = r_poly(p).unwrap();
            assert_eq!(r.eval(&BigInt::one()), BigInt::zero());
            // p·r = h - q^{p-1}
            let lhs = r.scale(&BigInt::from(p));
            assert_eq!(
                lhs,
                h_poly(p).unwrap().sub(&UPoly::monomial(1, p as usize - 1))
            );
        }
        assert!(h_poly(4).is_err());
    }

    #[test]
    fn qbar_structure_polynomials_match_display() {
        for p in [2u64, 3, 5] {
            let s = set(&[1, p]);
            let polys = derive(&Family::QBar(None), &s).unwrap();
            let h = MPoly::from_upoly_q(&h_poly(p).unwrap());
            let r = MPoly::from_upoly_q(&r_poly(p).unwrap());
            let e = p as u32;
            let mut cross = MPoly::zero();
            for nu in 1..p {
                let c = num_integer::binomial(BigInt::from(p), BigInt::from(nu)) / BigInt::from(p);
                cross = cross.add(
                    &MPoly::x(1)
                        .pow(nu as u32)
                        .mul(&MPoly::y(1).pow(e - nu as u32))
                        .scale(&c),
                );
            }
            let sigma = MPoly::x(p).add(&MPoly::y(p)).sub(&h.mul(&cross));
            assert_eq!(polys.sigma(p).unwrap(), &sigma);
            let q = MPoly::q();
            let pi = q
                .mul(&MPoly::x(p).mul(&MPoly::y(p)))
                .int_scale(p as i64)
                .add(
                    &q.mul(&h).mul(
                        &MPoly::x(1)
                            .pow(e)
                            .mul(&MPoly::y(p))
                            .add(&MPoly::y(1).pow(e).mul(&MPoly::x(p))),
                    ),
                )
                .add(
                    &q.mul(&h)
                        .mul(&r)
                        .mul(&MPoly::x(1).pow(e).mul(&MPoly::y(1).pow(e))),
                );
            assert_eq!(polys.pi(p).unwrap(), &pi);
        }
    }

    #[test]
    fn lenart_examples() {
        let z = Ring::integers();
        let r = WittRing::new(
            Family::Lenart(3),
            set(&[1, 2]),
            z.clone(),
            crate::witt::QBinding::None,
        )
        .unwrap();
        let a = WittVector::new(r, vec![Elem::int(3), Elem::int(1)]).unwrap();
        assert_eq!(
            lenart_iso(2, 3, &a).unwrap().coords(),
            &[Elem::int(3), Elem::int(10)]
        );
        let r = WittRing::new(
            Family::Lenart(2),
            set(&[1, 3]),
            z.clone(),
            crate::witt::QBinding::None,
        )
        .unwrap();
        let a = WittVector::new(r, vec![Elem::int(2), Elem::int(0)]).unwrap();
        assert_eq!(
            lenart_iso(3, 2, &a).unwrap().coords(),
            &[Elem::int(2), Elem::int(8)]
        );
        let r = WittRing::new(
            Family::Lenart(2),
            set(&[1, 2]),
            z,
            crate::witt::QBinding::None,
        )
        .unwrap();
        let a = WittVector::new(r, vec![Elem::int(1), Elem::int(0)]).unwrap();
        assert!(matches!(
            lenart_iso(2, 2, &a),
            Err(Error::PDividesQ { p: 2, .. })
        ));
    }

    #[test]
    fn lenart_iso_is_a_ring_isomorphism() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for (p, q) in [(2u64, 3i64), (3, 2), (5, 2)] {
            let src = WittRing::new(
                Family::Lenart(q),
                set(&[1, p]),
                Ring::integers(),
                crate::witt::QBinding::None,
            )
            .unwrap();
            for _ in 0..100 {
                let a = WittVector::random(&src, &mut rng);
                let b = WittVector::random(&src, &mut rng);
                let (fa, fb) = (lenart_iso(p, q, &a).unwrap(), lenart_iso(p, q, &b).unwrap());
                assert_eq!(
                    lenart_iso(p, q, &a.add(&b).unwrap()).unwrap(),
                    fa.add(&fb).unwrap()
                );
                assert_eq!(
                    lenart_iso(p, q, &a.mul(&b).unwrap()).unwrap(),
                    fa.mul(&fb).unwrap()
                );
                assert_eq!(lenart_iso_inverse(p, q, &fa).unwrap(), a);
            }
        }
    }

    #[test]
    fn frobenius_defects() {
        assert!(lenart_frobenius_defect(2, 3).unwrap().is_none());
        let d = lenart_frobenius_defect(2, 2).unwrap().unwrap();
        assert_eq!(d.vector.coords(), &[Elem::int(1), Elem::int(0)]);
        assert_eq!(d.frobenius, Elem::int(2));
        assert_eq!(d.power, Elem::int(1));
        assert!(lenart_frobenius_defect(3, 3).unwrap().is_some());
        assert!(lenart_frobenius_defect(3, 2).unwrap().is_none());
    }

    #[test]
    fn qbar_certificates() {
        for (g, s) in [("1-q", &[1u64, 2][..]), ("q", &[1, 2]), ("0", &[1, 3])] {
            let cert = qbar_to_qdef_iso(&up(g), &set(s)).unwrap();
            assert!(cert.report.passed());
            assert_eq!(cert.twists.len(), 2);
        }
        // g = 1 - q: the first coordinate is untouched and the second picks up a
        // multiple of X₁², since the ghost weights differ at index 2.
        let cert = qbar_to_qdef_iso(&up("1-q"), &set(&[1, 2])).unwrap();
        assert_eq!(cert.alpha[0], MPoly::x(1));
    }
}
