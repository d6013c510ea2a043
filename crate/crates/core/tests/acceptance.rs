//! The twelve acceptance criteria, each at its stated sample size and time
//! limit. Prints one PASS/FAIL line per criterion.

use std::time::{Duration, Instant};

use witt_core::indwitt::{self, ConstantInd, Lift};
use witt_core::qdeform::qbar_to_qdef_iso;
use witt_core::suites;
use witt_core::systems::{alpha, ConstantSystem};
use witt_core::universal::{derive, frobenius_mod_p_coordinatewise};
use witt_core::{Elem, Family, MPoly, Report, Ring, TruncationSet, UPoly};

const SEED: u64 = 20_240_601;

fn set(e: &[u64]) -> TruncationSet {
    TruncationSet::new(e).unwrap()
}

struct Outcome {
    id: usize,
    title: &'static str,
    passed: bool,
    elapsed: Duration,
    limit: Duration,
    detail: String,
}

fn run(id: usize, title: &'static str, limit_secs: u64, body: impl FnOnce() -> Report) -> Outcome {
    let start = Instant::now();
    let report = body();
    let elapsed = start.elapsed();
    let limit = Duration::from_secs(limit_secs);
    let detail = report
        .failures()
        .take(3)
        .map(|c| format!("{}: {}", c.check, c.detail.clone().unwrap_or_default()))
        .collect::<Vec<_>>()
        .join("; ");
    Outcome {
        id,
        title,
        passed: report.passed() && elapsed <= limit,
        elapsed,
        limit,
        detail,
    }
}

fn spot(report: &mut Report, name: &str, ok: bool) {
    report.record(name, ok, (!ok).then(|| "unexpected value".to_string()));
}

fn criterion_1() -> Report {
    let mut r = suites::q_tables();
    // Σ_2 for the q-deformation, written out by hand: x2 + y2 - q·x1·y1
    let s2 = derive(&Family::QDef, &set(&[1, 2])).unwrap();
    let want: MPoly = "x2+y2-q*x1*y1".parse().unwrap();
    spot(&mut r, "Σ_2 written out", s2.sigma(2).unwrap() == &want);
    let want: MPoly = "2*q*x2*y2+q^2*x1^2*y2+q^2*x2*y1^2".parse().unwrap();
    spot(&mut r, "Π_2 written out", s2.pi(2).unwrap() == &want);
    r
}

fn criterion_5() -> Report {
    let mut r = suites::frobenius_mod_p(12);
    // The literal coordinatewise congruence fails as soon as p² ∈ S.
    let broken = frobenius_mod_p_coordinatewise(&Family::Classical, &set(&[1, 2, 4]), 2).unwrap();
    spot(&mut r, "coordinatewise form fails on {1,2,4}", !broken);
    r
}

fn criterion_7() -> Report {
    let mut r = suites::construction(500, SEED);
    let sys = ConstantSystem::identity(Ring::integers(), set(&[1, 2]));
    let v = alpha(&sys, &set(&[1, 2]), &Elem::int(2)).unwrap();
    // ghost (2, 2) gives a_2 = (2 - 2²)/2 = -1
    spot(
        &mut r,
        "alpha_{1,2}(2) = (2, -1)",
        v.coords() == [Elem::int(2), Elem::int(-1)],
    );
    r
}

fn criterion_10() -> Report {
    let mut r = suites::qbar_certificates();
    let c = qbar_to_qdef_iso(&UPoly::q(), &set(&[1, 2])).unwrap();
    let mut twists = c.twists.clone();
    twists.sort();
    // 1 - g and the sign twin g - 1
    spot(
        &mut r,
        "twists for g = q are ±(1-q)",
        twists == vec!["-q+1".to_string(), "q-1".to_string()],
    );
    r
}

fn criterion_12() -> Report {
    let mut r = suites::inductive_systems(500, 1000, SEED);
    let z = ConstantInd::integers(set(&[1, 2]));
    let l = indwitt::lambda(&z, 1, &Elem::int(2)).unwrap();
    spot(
        &mut r,
        "λ_1(2) = (2, -1)",
        l.coords() == [Elem::int(2), Elem::int(-1)],
    );
    let inv = indwitt::dwork_invert(&z, &[Elem::int(3), Elem::int(5)]).unwrap();
    spot(
        &mut r,
        "Dwork inverse of (3, 5) is (3, -2)",
        inv.coords() == [Elem::int(3), Elem::int(-2)],
    );
    spot(
        &mut r,
        "(3, 4) is outside the image",
        !indwitt::dwork_image_test(&z, &[Elem::int(3), Elem::int(4)]).unwrap(),
    );
    let b = ConstantInd::new(Ring::zq(), set(&[1, 2]), Lift::None);
    let incl = |_: u64, x: &Elem| match x {
        Elem::Int(k) => Ok(Elem::Poly(UPoly::constant(k.clone()))),
        other => Ok(other.clone()),
    };
    let beta = indwitt::beta(&z, &b, &incl, 1, &Elem::int(2)).unwrap();
    spot(
        &mut r,
        "β_1(2) = (2, -1) in z[q]",
        beta.coords()
            == [
                Elem::Poly(UPoly::constant(2)),
                Elem::Poly(UPoly::constant(-1)),
            ],
    );
    r
}

fn main() {
    let outcomes = vec![
        run(1, "structure polynomial tables", 1, criterion_1),
        run(2, "q-transform identity", 10, || {
            suites::q_transform_identity(&set(&[1, 2, 3, 4, 6, 12]))
        }),
        run(3, "ring axioms", 60, || suites::ring_axioms(1000, SEED)),
        run(4, "F/V relations", 30, || suites::fv_relations(200, SEED)),
        run(5, "Frobenius mod p", 30, criterion_5),
        run(6, "exact sequences", 10, suites::exact_sequences),
        run(7, "alpha construction", 30, criterion_7),
        run(8, "Auer decomposition", 120, || {
            suites::auer_decomposition(500, 100, SEED)
        }),
        run(9, "Lenart isomorphisms and defects", 10, || {
            suites::lenart(1000, SEED)
        }),
        run(10, "W̄ to W^(1-g) certificates", 30, criterion_10),
        run(11, "one-dimensional ring laws", 10, || {
            suites::ring_laws(100, SEED)
        }),
        run(12, "inductive systems", 60, criterion_12),
    ];
    for o in &outcomes {
        let status = if o.passed { "PASS" } else { "FAIL" };
        let mut line = format!(
            "criterion {:>2}: {status}  {} ({:.2}s, limit {}s)",
            o.id,
            o.title,
            o.elapsed.as_secs_f64(),
            o.limit.as_secs()
        );
        if !o.detail.is_empty() {
            line.push_str(&format!(" [{}]", o.detail));
        }
        println!("{line}");
    }
    let failed: Vec<usize> = outcomes
        .iter()
        .filter(|o| !o.passed)
        .map(|o| o.id)
        .collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
