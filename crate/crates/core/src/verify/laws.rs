//! Randomized law suites for conditions, amalgamation, the compatibility
//! oracle and the dense-set meets. Samples come from [`crate::gen`] seeded
//! with a ChaCha8 generator, so a `(samples, seed)` pair always replays the
//! same run.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use super::{Report, Tally};
use crate::dense::{meet, member};
use crate::gen;
use crate::kernel::{amalgamate, compat_oracle, Condition, KernelError};
use crate::ordinal::Ordinal;

/// Stand-in for [`amalgamate`] so the suites can be pointed at a faulty
/// implementation.
pub type Amalgamator<'a> = &'a dyn Fn(&Condition, &Condition, &Ordinal) -> Result<Condition, KernelError>;

/// Supports at or below this size are cross-checked against the oracle.
pub const ORACLE_SUPPORT: usize = 6;

fn cj(c: &Condition) -> Value {
    serde_json::to_value(c).expect("conditions serialize")
}

/// Validity as a direct reading of the five clauses, without going through
/// `Condition::validate`.
fn naive_valid(c: &Condition) -> bool {
    let s: Vec<&Ordinal> = c.support().collect();
    let col = |a: &Ordinal| c.color(a).expect("support is coloured");
    s.iter().all(|a| c.rel(a, a))
        && s.iter().all(|a| s.iter().all(|b| !(a < b && c.rel(a, b))))
        && s.iter().all(|a| {
            s.iter()
                .all(|b| s.iter().all(|d| !(c.rel(a, b) && c.rel(b, d)) || c.rel(a, d)))
        })
        && s.iter().all(|a| col(a) < c.bound())
        && s.iter()
            .all(|a| s.iter().all(|b| !(c.rel(a, b) && b < a) || col(a) != col(b)))
}

/// Flips one random relation pair or recolours one ordinal.
fn mutate<R: Rng>(rng: &mut R, p: &Condition) -> Condition {
    let mut m = p.clone();
    let s: Vec<Ordinal> = p.support().cloned().collect();
    if s.is_empty() {
        m.set_bound(rng.gen_range(0..4));
        return m;
    }
    let a = s.choose(rng).expect("nonempty").clone();
    if rng.gen_bool(0.7) {
        let b = s.choose(rng).expect("nonempty").clone();
        if m.rel(&a, &b) {
            m.unlink(&a, &b);
        } else {
            m.link(&a, &b).expect("in support");
        }
    } else {
        m.insert(a, rng.gen_range(0..p.bound() + 2));
    }
    m
}

fn random_cut<R: Rng>(rng: &mut R, p: &Condition) -> Ordinal {
    let s: Vec<&Ordinal> = p.support().collect();
    if !s.is_empty() && rng.gen_bool(0.5) {
        s[rng.gen_range(0..s.len())].successor()
    } else {
        gen::pool_ordinal(rng)
    }
}

/// Validity, partial-order laws for "stronger than", restriction, and
/// amalgamation on `samples` random conditions and `samples / 5`
/// amalgamation instances (the oracle cross-check runs on those with both
/// supports of size at most [`ORACLE_SUPPORT`]).
pub fn check_condition_laws(samples: usize, seed: u64) -> Report {
    check_condition_laws_with(samples, seed, &amalgamate)
}

pub fn check_condition_laws_with(samples: usize, seed: u64, amalgamator: Amalgamator<'_>) -> Report {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut soundness = Tally::new("validate-soundness");
    let mut reflexive = Tally::new("stronger-reflexive");
    let mut transitive = Tally::new("stronger-transitive");
    let mut antisym = Tally::new("stronger-antisymmetric");
    let mut restrict = Tally::new("restrict-valid-weaker");
    let mut am_valid = Tally::new("amalgamate-valid");
    let mut am_stronger = Tally::new("amalgamate-stronger");
    let mut am_restrict = Tally::new("restrict-r-equals-q");
    let mut oracle = Tally::new("oracle-agreement");

    let mut previous = Condition::empty();
    for _ in 0..samples {
        let p = gen::random_condition(&mut rng, 6);
        soundness.expect(p.is_valid() && naive_valid(&p), || json!({"generated": cj(&p)}));
        let m = mutate(&mut rng, &p);
        soundness.expect(m.is_valid() == naive_valid(&m), || json!({"mutated": cj(&m)}));

        reflexive.expect(p.is_stronger_than(&p), || json!({"p": cj(&p)}));

        let r = gen::random_extension(&mut rng, &p, None, 9);
        let s = gen::random_extension(&mut rng, &r, None, 12);
        transitive.expect(
            r.is_stronger_than(&p) && s.is_stronger_than(&r) && s.is_stronger_than(&p),
            || json!({"p": cj(&p), "r": cj(&r), "s": cj(&s)}),
        );

        for other in [&r, &previous, &p.clone()] {
            let mutual = p.is_stronger_than(other) && other.is_stronger_than(&p);
            antisym.expect(!mutual || *other == p, || json!({"p": cj(&p), "other": cj(other)}));
        }

        let eta = random_cut(&mut rng, &p);
        let pr = p.restrict(&eta);
        restrict.expect(
            pr.is_valid() && p.is_stronger_than(&pr) && pr.support().all(|x| x < &eta) && pr.bound() == p.bound(),
            || json!({"p": cj(&p), "eta": eta, "restricted": cj(&pr)}),
        );
        previous = p;
    }

    for _ in 0..samples / 5 {
        let (p, q, eta) = gen::amalgamation_instance(&mut rng, ORACLE_SUPPORT);
        let instance = || json!({"p": cj(&p), "q": cj(&q), "eta": eta});
        match amalgamator(&p, &q, &eta) {
            Err(e) => am_valid.expect(false, || json!({"instance": instance(), "error": e.to_string()})),
            Ok(r) => {
                let union_ok = r.support_set() == p.support().chain(q.support()).cloned().collect();
                am_valid.expect(
                    r.is_valid() && union_ok,
                    || json!({"instance": instance(), "r": cj(&r)}),
                );
                am_stronger.expect(
                    r.is_stronger_than(&p) && r.is_stronger_than(&q),
                    || json!({"instance": instance(), "r": cj(&r)}),
                );
                am_restrict.expect(r.restrict(&eta) == q, || json!({"instance": instance(), "r": cj(&r)}));
            }
        }
        if p.support_len() <= ORACLE_SUPPORT && q.support_len() <= ORACLE_SUPPORT {
            let found = compat_oracle(&p, &q);
            let ok = matches!(&found, Ok(Some(c)) if c.is_valid() && c.is_stronger_than(&p) && c.is_stronger_than(&q));
            oracle.expect(ok, || json!({"instance": instance(), "oracle": format!("{found:?}")}));
        }
    }

    Report::new(vec![
        soundness.finish("conditions"),
        reflexive.finish("conditions"),
        transitive.finish("extension chains"),
        antisym.finish("pairs"),
        restrict.finish("restrictions"),
        am_valid.finish("amalgamations"),
        am_stronger.finish("amalgamations"),
        am_restrict.finish("amalgamations"),
        oracle.finish("instances"),
    ])
}

/// Oracle against amalgamation: `instances` amalgamable pairs with supports
/// of at most [`ORACLE_SUPPORT`] must all have a common extension, and on as
/// many unrelated random pairs every extension the oracle returns must be
/// valid and stronger than both inputs.
pub fn oracle_equivalence(instances: usize, seed: u64) -> Report {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut complete = Tally::new("oracle-complete");
    let mut sound = Tally::new("oracle-sound");
    let mut forced = Tally::new("oracle-agrees-on-forced-pairs");
    for _ in 0..instances {
        let (p, q, eta) = gen::amalgamation_instance(&mut rng, ORACLE_SUPPORT);
        let instance = || json!({"p": cj(&p), "q": cj(&q), "eta": eta});
        let amalgam = amalgamate(&p, &q, &eta);
        let found = compat_oracle(&p, &q);
        complete.expect(
            amalgam.is_ok() && matches!(found, Ok(Some(_))),
            || json!({"instance": instance(), "amalgamate": format!("{amalgam:?}"), "oracle": format!("{found:?}")}),
        );
        if let (Ok(r), Ok(Some(c))) = (&amalgam, &found) {
            sound.expect(
                c.is_valid() && c.is_stronger_than(&p) && c.is_stronger_than(&q),
                || json!({"instance": instance(), "oracle": cj(c)}),
            );
            // pairs inside S_p or S_q are fixed by the inputs; both must agree there
            let agree = r
                .rel1()
                .filter(|(a, b)| (p.contains(a) && p.contains(b)) || (q.contains(a) && q.contains(b)))
                .all(|(a, b)| c.rel(a, b));
            forced.expect(
                agree,
                || json!({"instance": instance(), "amalgam": cj(r), "oracle": cj(c)}),
            );
        }

        let p2 = gen::random_condition(&mut rng, 4);
        let q2 = gen::random_condition(&mut rng, 4);
        match compat_oracle(&p2, &q2) {
            Ok(Some(c)) => sound.expect(
                c.is_valid() && c.is_stronger_than(&p2) && c.is_stronger_than(&q2),
                || json!({"p": cj(&p2), "q": cj(&q2), "oracle": cj(&c)}),
            ),
            Ok(None) => {}
            Err(e) => sound.expect(false, || json!({"p": cj(&p2), "q": cj(&q2), "error": e.to_string()})),
        }
    }
    Report::new(vec![
        complete.finish("instances"),
        sound.finish("oracle outputs"),
        forced.finish("instances"),
    ])
}

/// For each dense-set kind, `per_kind` random `(spec, p)` pairs: the meet
/// must be valid, stronger than `p`, inside the dense set, and colour every
/// new ordinal at or above the bound it was added over.
pub fn dense_meet_contract(per_kind: usize, seed: u64) -> Report {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checks = Vec::new();
    for kind in ["add", "raise_u", "separate"] {
        let mut t = match kind {
            "add" => Tally::new("meet-add"),
            "raise_u" => Tally::new("meet-raise_u"),
            _ => Tally::new("meet-separate"),
        };
        for _ in 0..per_kind {
            let spec = gen::dense_spec(&mut rng, kind);
            let p = gen::random_condition(&mut rng, 6);
            let ctx = || json!({"spec": spec, "p": cj(&p)});
            let m = match meet(&spec, &p) {
                Ok(m) => m,
                Err(e) => {
                    t.expect(false, || json!({"case": ctx(), "error": e.to_string()}));
                    continue;
                }
            };
            let r = &m.result;
            let floor_ok = r
                .support()
                .filter(|x| !p.contains(x))
                .all(|x| r.color(x).is_some_and(|c| c >= p.bound()));
            let witness_ok = match (&spec, &m.witness) {
                (
                    crate::dense::DenseSetSpec::Separate {
                        lambda,
                        alpha,
                        gamma,
                        avoid,
                    },
                    Some(beta),
                ) => {
                    beta >= gamma
                        && beta < lambda
                        && lambda <= alpha
                        && !p.contains(beta)
                        && r.rel(alpha, beta)
                        && avoid.iter().all(|x| !r.rel(x, beta))
                }
                (crate::dense::DenseSetSpec::Separate { .. }, None) => false,
                (_, w) => w.is_none(),
            };
            t.expect(
                r.is_valid() && r.is_stronger_than(&p) && member(&spec, r) && floor_ok && witness_ok,
                || json!({"case": ctx(), "result": cj(r), "witness": m.witness}),
            );
        }
        checks.push(t.finish("meets"));
    }
    Report::new(checks)
}
