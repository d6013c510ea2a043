//! Verification suites behind `witt verify` and the acceptance tests.
//!
//! Each function returns a [`Report`]; sample counts and seeds are explicit so
//! runs are reproducible.

use num_bigint::BigInt;
use num_integer::binomial;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::indwitt::{self, ConstantInd, IndWittVector, MixedChain, SysRef};
use crate::mpoly::MPoly;
use crate::onedim::{classify_reduced, twisted_isos, verify_law, RingLaw1D};
use crate::qdeform::{
    h_identity_holds, h_poly, lenart_frobenius_defect, lenart_iso, lenart_iso_inverse,
    qbar_to_qdef_iso, r_poly,
};
use crate::report::Report;
use crate::rings::{Elem, Ring, UPoly};
use crate::systems::{alpha, auer, ConstantSystem, ProjSystem, WittSystem};
use crate::truncset::TruncationSet;
use crate::universal::{
    derive, frobenius_mod_p_certificate, frobenius_mod_p_coordinatewise, q_transform, Family,
};
use crate::witt::{exact_sequence_check, QBinding, WittRing, WittVector};

pub const SUITES: &[&str] = &["polys", "witt", "systems", "deform", "ringlaw", "indwitt"];

fn set(e: &[u64]) -> TruncationSet {
    TruncationSet::new(e).expect("fixed sets are divisor stable")
}

/// Runs the named suite (or `all`) with `budget` samples per sampled check.
pub fn run(name: &str, budget: usize, seed: u64) -> Result<Vec<Report>> {
    let b = budget.max(1);
    Ok(match name {
        "polys" => vec![
            q_tables(),
            q_transform_identity(&set(&[1, 2, 3, 4, 6, 12])),
            frobenius_mod_p(12),
        ],
        "witt" => vec![
            ring_axioms(b.min(200), seed),
            fv_relations(b.min(100), seed),
            exact_sequences(),
        ],
        "systems" => vec![
            construction(b, seed),
            auer_decomposition(b.min(100), b.min(20), seed),
        ],
        "deform" => vec![lenart(b, seed), qbar_certificates()],
        "ringlaw" => vec![ring_laws(b.min(100), seed)],
        "indwitt" => vec![inductive_systems(b, b, seed)],
        "all" => {
            let mut out = Vec::new();
            for s in SUITES {
                out.extend(run(s, budget, seed)?);
            }
            out
        }
        other => {
            return Err(Error::Parse(format!(
                "unknown suite {other:?} (expected all or one of {})",
                SUITES.join(", ")
            )))
        }
    })
}

fn cross_term(p: u64) -> MPoly {
    let e = p as u32;
    (1..p).fold(MPoly::zero(), |acc, nu| {
        let c = binomial(BigInt::from(p), BigInt::from(nu)) / BigInt::from(p);
        acc.add(
            &MPoly::x(1)
                .pow(nu as u32)
                .mul(&MPoly::y(1).pow(e - nu as u32))
                .scale(&c),
        )
    })
}

/// Closed forms of the `S = {1, p}` structure polynomials for the
/// q-deformation and for `W̄^{1-q}`, `p ∈ {2, 3, 5}`.
pub fn q_tables() -> Report {
    let mut report = Report::new("structure polynomial tables");
    let q = MPoly::q();
    for p in [2u64, 3, 5] {
        let s = set(&[1, p]);
        let e = p as u32;
        let (x1, y1, xp, yp) = (MPoly::x(1), MPoly::y(1), MPoly::x(p), MPoly::y(p));
        let mixed = x1.pow(e).mul(&yp).add(&xp.mul(&y1.pow(e)));
        let outcome = (|| {
            let polys = derive(&Family::QDef, &s)?;
            let sigma = xp.add(&yp).sub(&q.pow(e - 1).mul(&cross_term(p)));
            let pi = q
                .mul(&xp)
                .mul(&yp)
                .int_scale(p as i64)
                .add(&q.pow(e).mul(&mixed));
            Ok(polys.sigma(1)? == &x1.add(&y1)
                && polys.sigma(p)? == &sigma
                && polys.pi(1)? == &q.mul(&x1).mul(&y1)
                && polys.pi(p)? == &pi)
        })();
        report.record_result(format!("q-deformed Σ, Π on {{1,{p}}}"), outcome);
        let outcome = (|| {
            let polys = derive(&Family::QBar(None), &s)?;
            let h = MPoly::from_upoly_q(&h_poly(p)?);
            let r = MPoly::from_upoly_q(&r_poly(p)?);
            let sigma = xp.add(&yp).sub(&h.mul(&cross_term(p)));
            let qh = q.mul(&h);
            let pi = q
                .mul(&xp)
                .mul(&yp)
                .int_scale(p as i64)
                .add(&qh.mul(&mixed))
                .add(&qh.mul(&r).mul(&x1.pow(e).mul(&y1.pow(e))));
            Ok(h_identity_holds(p)?
                && polys.sigma(1)? == &x1.add(&y1)
                && polys.sigma(p)? == &sigma
                && polys.pi(1)? == &q.mul(&x1).mul(&y1)
                && polys.pi(p)? == &pi)
        })();
        report.record_result(format!("W̄^(1-q) Σ, Π on {{1,{p}}} with h, r"), outcome);
    }
    report
}

/// q-deformed polynomials are the classical ones under `v ↦ Q·v`, `÷Q`, and
/// specialize to them at `Q = 1`, for every divisor-stable subset of `top`.
pub fn q_transform_identity(top: &TruncationSet) -> Report {
    let mut report = Report::new("q-transform");
    for s in top.sub_sets() {
        let outcome = (|| {
            let qd = derive(&Family::QDef, &s)?;
            let cl = derive(&Family::Classical, &s)?;
            let one = BigInt::from(1);
            let mut pairs: Vec<(&MPoly, &MPoly)> = Vec::new();
            pairs.extend(qd.add_polys().iter().zip(cl.add_polys()));
            pairs.extend(qd.mul_polys().iter().zip(cl.mul_polys()));
            pairs.extend(qd.neg_polys().iter().zip(cl.neg_polys()));
            for m in s.iter() {
                pairs.extend(qd.frobenius(m)?.iter().zip(cl.frobenius(m)?));
            }
            Ok(pairs
                .into_iter()
                .all(|(a, b)| q_transform(b).as_ref() == Some(a) && &a.specialize_q(&one) == b))
        })();
        report.record_result(format!("S={s}"), outcome);
    }
    report
}

/// `F_p(X) ≡ X^p` modulo `p·W_{S/p}` at polynomial level, for `p ∈ {2, 3}`
/// and every divisor-stable `S` with `max S ≤ max`, classical and q-deformed.
/// The coordinatewise congruence is checked where `p² ∉ S`.
pub fn frobenius_mod_p(max: u64) -> Report {
    let mut report = Report::new("Frobenius mod p");
    let all: Vec<u64> = (1..=max).collect();
    for s in set(&all).sub_sets() {
        for p in [2u64, 3].into_iter().filter(|&p| s.contains(p)) {
            for fam in [Family::Classical, Family::QDef] {
                report.record_result(
                    format!("{fam} S={s} p={p}"),
                    frobenius_mod_p_certificate(&fam, &s, p),
                );
                if !s.contains(p * p) {
                    report.record_result(
                        format!("{fam} S={s} p={p} coordinatewise"),
                        frobenius_mod_p_coordinatewise(&fam, &s, p),
                    );
                }
            }
        }
    }
    report
}

/// `(family, base, q)` combinations used by the ring-axiom checks.
pub fn axiom_instances() -> Vec<(Family, Ring, QBinding)> {
    let mut out = Vec::new();
    let rings = [Ring::zmod(4), Ring::zmod(6), Ring::zmod(9), Ring::zq()];
    for base in &rings {
        out.push((Family::Classical, base.clone(), QBinding::None));
        for fam in [Family::QDef, Family::QBar(None)] {
            for k in [1, 2] {
                out.push((fam.clone(), base.clone(), QBinding::Scalar(BigInt::from(k))));
            }
            if base == &Ring::zq() {
                out.push((
                    fam.clone(),
                    base.clone(),
                    QBinding::natural(&fam, base).expect("zq binds q"),
                ));
            }
        }
        for k in [1, 2] {
            out.push((Family::Lenart(k), base.clone(), QBinding::None));
        }
    }
    out
}

/// Associativity, commutativity and distributivity on `samples` seeded triples.
pub fn ring_axioms(samples: usize, seed: u64) -> Report {
    let cases: Vec<(TruncationSet, Family, Ring, QBinding)> =
        [set(&[1, 2]), set(&[1, 2, 4]), set(&[1, 2, 3, 6])]
            .into_iter()
            .flat_map(|s| {
                axiom_instances()
                    .into_iter()
                    .map(move |(f, b, q)| (s.clone(), f, b, q))
            })
            .collect();
    let checks: Vec<(String, Result<Option<String>>)> = cases
        .into_par_iter()
        .map(|(s, fam, base, q)| {
            let qs = if q == QBinding::None {
                String::new()
            } else {
                format!(" q={q}")
            };
            let name = format!("{fam}{qs} over {base}, S={s}");
            (
                name,
                axioms_on(WittRing::new(fam, s, base, q), samples, seed),
            )
        })
        .collect();
    let mut report = Report::new("ring axioms");
    for (name, outcome) in checks {
        report.record_sampled(name, outcome);
    }
    report
}

fn axioms_on(
    ring: Result<std::sync::Arc<WittRing>>,
    samples: usize,
    seed: u64,
) -> Result<Option<String>> {
    let ring = ring?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..samples {
        let a = WittVector::random(&ring, &mut rng);
        let b = WittVector::random(&ring, &mut rng);
        let c = WittVector::random(&ring, &mut rng);
        if a.add(&b)?.add(&c)? != a.add(&b.add(&c)?)?
            || a.mul(&b)?.mul(&c)? != a.mul(&b.mul(&c)?)?
        {
            return Ok(Some(format!("associativity fails at {a}, {b}, {c}")));
        }
        if a.add(&b)? != b.add(&a)? || a.mul(&b)? != b.mul(&a)? {
            return Ok(Some(format!("commutativity fails at {a}, {b}")));
        }
        if a.mul(&b.add(&c)?)? != a.mul(&b)?.add(&a.mul(&c)?)? {
            return Ok(Some(format!("distributivity fails at {a}, {b}, {c}")));
        }
        if !a.add(&a.neg()?)?.is_zero() {
            return Ok(Some(format!("{a} has no additive inverse")));
        }
    }
    Ok(None)
}

/// `F_nF_m = F_{nm}`, `V_nV_m = V_{nm}`, `F_nV_n = n`, `F_nV_m = V_mF_n` for coprime `n, m`.
pub fn fv_relations(samples: usize, seed: u64) -> Report {
    let mut report = Report::new("F/V relations");
    let instances = [
        (Family::Classical, Ring::integers(), QBinding::None),
        (Family::Classical, Ring::zq(), QBinding::None),
        (
            Family::QDef,
            Ring::zq(),
            QBinding::natural(&Family::QDef, &Ring::zq()).expect("zq binds q"),
        ),
    ];
    for s in [set(&[1, 2, 3, 6]), set(&[1, 2, 3, 4, 6, 12])] {
        for (fam, base, q) in &instances {
            let outcome = (|| {
                let ring = WittRing::new(fam.clone(), s.clone(), base.clone(), q.clone())?;
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                for _ in 0..samples {
                    if let Some(w) = fv_sample(&ring, &mut rng)? {
                        return Ok(Some(w));
                    }
                }
                Ok(None)
            })();
            report.record_sampled(format!("{fam} over {base}, S={s}"), outcome);
        }
    }
    report
}

fn fv_sample(ring: &std::sync::Arc<WittRing>, rng: &mut ChaCha8Rng) -> Result<Option<String>> {
    let s = ring.set().clone();
    let v = WittVector::random(ring, rng);
    for n in s.iter() {
        for m in s.iter().filter(|&m| s.contains(n * m)) {
            let lhs = v.frobenius(m)?.frobenius(n)?;
            if lhs != v.frobenius(n * m)? {
                return Ok(Some(format!("F_{n}F_{m} ≠ F_{} on {v}", n * m)));
            }
            let small = WittVector::random(&ring.with_set(s.quotient(n * m)?)?, rng);
            let vv = small
                .verschiebung(m, &s.quotient(n)?)?
                .verschiebung(n, &s)?;
            if vv != small.verschiebung(n * m, &s)? {
                return Ok(Some(format!("V_{n}V_{m} ≠ V_{} on {small}", n * m)));
            }
        }
        let w = WittVector::random(&ring.with_set(s.quotient(n)?)?, rng);
        if w.verschiebung(n, &s)?.frobenius(n)? != w.int_scale(&BigInt::from(n))? {
            return Ok(Some(format!("F_{n}V_{n} ≠ {n} on {w}")));
        }
        for m in s
            .iter()
            .filter(|&m| num_integer::gcd(n, m) == 1 && m > 1 && n > 1)
        {
            let w = WittVector::random(&ring.with_set(s.quotient(m)?)?, rng);
            let lhs = w.verschiebung(m, &s)?.frobenius(n)?;
            let rhs = w.frobenius(n)?.verschiebung(m, &s.quotient(n)?)?;
            if lhs != rhs {
                return Ok(Some(format!("F_{n}V_{m} ≠ V_{m}F_{n} on {w}")));
            }
        }
    }
    Ok(None)
}

/// `ker π = im V_p` by full enumeration.
pub fn exact_sequences() -> Report {
    let mut report = Report::new("exact sequences");
    for (s, p, ring) in [
        (set(&[1, 2]), 2, Ring::zmod(3)),
        (set(&[1, 2, 4]), 2, Ring::zmod(2)),
        (set(&[1, 3]), 3, Ring::zmod(2)),
    ] {
        let outcome = exact_sequence_check(&Family::Classical, &s, p, &ring, QBinding::None)
            .map(|r| r.holds());
        report.record_result(format!("S={s}, p={p}, {ring}"), outcome);
    }
    report
}

/// The `α` construction: identity on Witt systems, integral on the constant
/// system, and compatible with `V_p`.
pub fn construction(samples: usize, seed: u64) -> Report {
    let mut report = Report::new("alpha construction");
    let z = Ring::integers();
    let s = set(&[1, 2, 3, 6]);
    let outcome = (|| {
        let sys = WittSystem::classical(z.clone(), s.clone())?;
        let w = sys.witt(&s)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..samples {
            let v = WittVector::random(&w, &mut rng);
            if alpha(&sys, &s, &v.to_elem())? != v {
                return Ok(Some(format!("alpha({v}) ≠ {v}")));
            }
        }
        Ok(None)
    })();
    report.record_sampled("alpha is the identity on W_S(z)", outcome);

    let outcome = (|| {
        let sys = ConstantSystem::identity(z.clone(), s.clone());
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 1);
        for _ in 0..samples {
            let a = z.random(&mut rng);
            match alpha(&sys, &s, &a) {
                Ok(v) if v.coords()[0] == a => {}
                Ok(v) => return Ok(Some(format!("alpha({a}) = {v} has first coordinate ≠ {a}"))),
                Err(Error::IntegralityViolation(m)) => {
                    return Ok(Some(format!("alpha({a}) is not integral: {m}")))
                }
                Err(e) => return Err(e),
            }
        }
        Ok(None)
    })();
    report.record_sampled("alpha on the constant system is integral", outcome);

    let outcome = (|| {
        let sys = WittSystem::classical(z.clone(), s.clone())?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 2);
        for p in s.primes().collect::<Vec<_>>() {
            let sp = s.quotient(p)?;
            let wp = sys.witt(&sp)?;
            for _ in 0..samples.min(100) {
                let b = WittVector::random(&wp, &mut rng);
                let lhs = alpha(&sys, &s, &sys.verschiebung(&s, p, &b.to_elem())?)?;
                let rhs = alpha(&sys, &sp, &b.to_elem())?.verschiebung(p, &s)?;
                if lhs != rhs {
                    return Ok(Some(format!(
                        "p={p}: alpha(V_p {b}) = {lhs}, V_p alpha = {rhs}"
                    )));
                }
            }
        }
        Ok(None)
    })();
    report.record_sampled("alpha∘V_p = V_p∘alpha", outcome);
    report
}

/// `W_{T₁·T₂}(A) ≅ W_{T₁}(W_{T₂}(A))` for `T₁ = {1,2}`, `T₂ = {1,3}` over ℤ
/// and over `ℤ[q]^{(q)}`.
pub fn auer_decomposition(samples: usize, twisted_samples: usize, seed: u64) -> Report {
    let mut report = Report::new("Auer decomposition");
    let (t1, t2) = (set(&[1, 2]), set(&[1, 3]));
    let zq_twisted = Ring::twisted(Ring::zq(), Elem::Poly(UPoly::q())).expect("q is in zq");
    for (base, n) in [(Ring::integers(), samples), (zq_twisted, twisted_samples)] {
        let outcome = (|| {
            let iso = auer(&t1, &t2, base.clone())?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let src = iso.source().clone();
            let tgt = iso.target().clone();
            for _ in 0..n {
                let a = WittVector::random(&src, &mut rng);
                let b = WittVector::random(&src, &mut rng);
                let (fa, fb) = (iso.forward(&a)?, iso.forward(&b)?);
                if iso.forward(&a.add(&b)?)? != fa.add(&fb)?
                    || iso.forward(&a.mul(&b)?)? != fa.mul(&fb)?
                {
                    return Ok(Some(format!("not a homomorphism on {a}, {b}")));
                }
                if iso.inverse(&fa)? != a {
                    return Ok(Some(format!("inverse∘forward ≠ id on {a}")));
                }
                let c = WittVector::random(&tgt, &mut rng);
                if iso.forward(&iso.inverse(&c)?)? != c {
                    return Ok(Some(format!("forward∘inverse ≠ id on {c}")));
                }
                let small = WittVector::random(&src.with_set(src.set().quotient(2)?)?, &mut rng);
                let v_src = small.verschiebung(2, src.set())?;
                let small_img = auer(&set(&[1]), &t2, base.clone())?.forward(&small)?;
                let v_tgt = WittVector::new(tgt.with_set(set(&[1]))?, small_img.coords().to_vec())?
                    .verschiebung(2, &t1)?;
                if iso.forward(&v_src)? != v_tgt {
                    return Ok(Some(format!("V_2 is not preserved on {small}")));
                }
                let f_src = a.frobenius(2)?;
                let f_img = auer(&set(&[1]), &t2, base.clone())?.forward(&f_src)?;
                if fa.frobenius(2)?.coords() != f_img.coords() {
                    return Ok(Some(format!("F_2 is not preserved on {a}")));
                }
            }
            for c in [2, 3, 5] {
                let c = base.root().from_int(c)?;
                let inner = WittRing::classical(t2.clone(), base.clone())?;
                let omega = WittVector::teichmuller(&src, c.clone())?;
                let omega2 =
                    WittVector::teichmuller(&tgt, WittVector::teichmuller(&inner, c)?.to_elem())?;
                if iso.forward(&omega)? != omega2 {
                    return Ok(Some(format!(
                        "ω({}) is not sent to ω(ω)",
                        omega.coords()[0]
                    )));
                }
            }
            Ok(None)
        })();
        report.record_sampled(format!("over {base}"), outcome);
    }
    report
}

/// The Lenart isomorphisms and Frobenius defects.
pub fn lenart(samples: usize, seed: u64) -> Report {
    let mut report = Report::new("Lenart family");
    let z = Ring::integers();
    for (p, q) in [(2u64, 3i64), (3, 2), (5, 2)] {
        let outcome = (|| {
            let s = set(&[1, p]);
            let src = WittRing::new(Family::Lenart(q), s, z.clone(), QBinding::None)?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..samples {
                let a = WittVector::random(&src, &mut rng);
                let b = WittVector::random(&src, &mut rng);
                let (fa, fb) = (lenart_iso(p, q, &a)?, lenart_iso(p, q, &b)?);
                if lenart_iso(p, q, &a.add(&b)?)? != fa.add(&fb)?
                    || lenart_iso(p, q, &a.mul(&b)?)? != fa.mul(&fb)?
                {
                    return Ok(Some(format!("not a homomorphism on {a}, {b}")));
                }
                if lenart_iso_inverse(p, q, &fa)? != a {
                    return Ok(Some(format!("not invertible at {a}")));
                }
            }
            Ok(None)
        })();
        report.record_sampled(format!("lenart_iso p={p} q={q}"), outcome);
    }
    for (p, q, expect) in [(2u64, 2i64, true), (3, 3, true), (2, 3, false)] {
        let outcome = lenart_frobenius_defect(p, q).map(|d| d.is_some() == expect);
        report.record_result(format!("Frobenius defect p={p} q={q}"), outcome);
    }
    report
}

/// `W̄^{g} ≅ W^{(1-g)}` and its sign twin for `g ∈ {0, q, 1-q}`.
pub fn qbar_certificates() -> Report {
    let mut report = Report::new("W̄ certificates");
    for g in [UPoly::zero(), UPoly::q(), UPoly::from_i64(&[1, -1])] {
        for s in [set(&[1, 2]), set(&[1, 3])] {
            let outcome =
                qbar_to_qdef_iso(&g, &s).map(|c| c.report.passed() && c.twists.len() == 2);
            report.record_result(format!("g={g}, S={s}"), outcome);
        }
    }
    report
}

/// Classification of reduced one-dimensional ring laws and their isomorphisms.
pub fn ring_laws(samples: usize, seed: u64) -> Report {
    let mut report = Report::new("one-dimensional ring laws");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for ring in [Ring::integers(), Ring::zmod(6)] {
        let outcome = (|| {
            for _ in 0..samples {
                let r = ring.random(&mut rng);
                let law = RingLaw1D::twisted_line(&ring, r.clone())?;
                if classify_reduced(&law)? != r {
                    return Ok(Some(format!("classify does not recover {r}")));
                }
            }
            Ok(None)
        })();
        report.record_sampled(format!("classify_reduced recovers r over {ring}"), outcome);
    }
    for r in [0i64, 1, 3] {
        let outcome = (|| {
            let law = RingLaw1D::parse(&Ring::dual(), "x+y+eps*x*y", &format!("{r}*eps*x*y"))?;
            Ok(verify_law(&law, samples, seed)?.report.passed())
        })();
        report.record_result(format!("dual-number law with r={r}"), outcome);
    }
    for ring in [Ring::integers(), Ring::zmod(6), Ring::zq()] {
        let outcome = (|| {
            let units = ring.units()?;
            let mut candidates: Vec<Elem> = match ring.size() {
                Some(_) => ring.elements(64)?,
                None => (-3..=3).map(|k| ring.from_int(k)).collect::<Result<_>>()?,
            };
            if ring == Ring::zq() {
                for e in ["q", "-q", "2*q", "1+q"] {
                    candidates.push(ring.parse_elem(e)?);
                }
            }
            for r in &candidates {
                for r2 in &candidates {
                    let got = twisted_isos(r, r2, &ring)?;
                    let mut want = Vec::new();
                    for u in &units {
                        if ring.eq(r, &ring.mul(r2, u)?) {
                            want.push(u.clone());
                        }
                    }
                    if got != want {
                        return Ok(Some(format!("r={r}, r'={r2}: {got:?} vs {want:?}")));
                    }
                }
            }
            Ok(None)
        })();
        report.record_sampled(format!("twisted_isos over {ring}"), outcome);
    }
    report
}

fn lifted_fixtures(s: &TruncationSet) -> Vec<SysRef> {
    vec![
        ConstantInd::integers(s.clone()),
        ConstantInd::q_power(s.clone()),
        MixedChain::new(s.clone()),
    ]
}

/// The inductive-system suite: ghost injectivity, the Dwork lemma, `λ`, the
/// trivial and constant systems and the general structure checks.
pub fn inductive_systems(pairs: usize, tuples: usize, seed: u64) -> Report {
    let mut report = Report::new("inductive systems");
    let z = Ring::integers();
    for s in [set(&[1, 2]), set(&[1, 2, 4])] {
        for sys in lifted_fixtures(&s) {
            let name = format!("{} S={s}", sys.name());
            report.record_sampled(
                format!("ghost injective, {name}"),
                ghost_injective(&sys, pairs, seed),
            );
            report.record_sampled(
                format!("Dwork test ⇔ invert, {name}"),
                dwork_agrees(&sys, tuples, seed),
            );
        }
    }
    for s in [set(&[1, 2, 3, 6]), set(&[1, 2, 4])] {
        for sys in lifted_fixtures(&s) {
            let r = indwitt::verify_ind_system(&sys, (pairs / 10).clamp(1, 50), seed);
            report.merge(r);
        }
        report.merge(indwitt::verify_trivial_system(&z, &s, pairs.min(200), seed));
        report.merge(indwitt::verify_trivial_system(
            &Ring::zmod(6),
            &s,
            pairs.min(200),
            seed,
        ));
        report.merge(indwitt::verify_constant_system(
            &z,
            &s,
            pairs.min(100),
            seed,
        ));
    }
    report
}

fn ghost_injective(sys: &SysRef, pairs: usize, seed: u64) -> Result<Option<String>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for k in 0..pairs {
        let v = IndWittVector::random(sys, &mut rng)?;
        let w = if k % 10 == 0 {
            v.clone()
        } else {
            IndWittVector::random(sys, &mut rng)?
        };
        let (gv, gw) = (indwitt::ind_ghost(&v)?, indwitt::ind_ghost(&w)?);
        if indwitt::dwork_invert(sys, &gv)? != v {
            return Ok(Some(format!("recursive solve does not recover {v}")));
        }
        if (gv == gw) != (v == w) {
            return Ok(Some(format!("{v} and {w} disagree with their ghosts")));
        }
    }
    Ok(None)
}

fn dwork_agrees(sys: &SysRef, tuples: usize, seed: u64) -> Result<Option<String>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xd0);
    let (mut inside, mut outside) = (0usize, 0usize);
    for k in 0..tuples {
        let x = if k % 2 == 0 {
            indwitt::random_tuple(sys, &mut rng, 50)?
        } else {
            let coords = indwitt::random_tuple(sys, &mut rng, 3)?;
            indwitt::ind_ghost(&IndWittVector::new(sys, coords)?)?
        };
        let test = indwitt::dwork_image_test(sys, &x)?;
        let inv = match indwitt::dwork_invert(sys, &x) {
            Ok(v) => indwitt::ind_ghost(&v)? == x,
            Err(Error::NotInImage(_)) => false,
            Err(e) => return Err(e),
        };
        if test != inv {
            return Ok(Some(format!("test = {test}, invert = {inv} at k = {k}")));
        }
        if test {
            inside += 1;
        } else {
            outside += 1;
        }
    }
    if tuples >= 2 && (inside == 0 || outside == 0) {
        return Ok(Some(format!(
            "only one side exercised ({inside} in image, {outside} outside)"
        )));
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_suites_pass() {
        for name in SUITES {
            for r in run(name, 5, 1).unwrap() {
                assert!(r.passed(), "{name}: {:?}", r.failures().collect::<Vec<_>>());
            }
        }
    }

    #[test]
    fn unknown_suite_is_rejected() {
        assert!(run("nope", 1, 1).is_err());
    }
}
