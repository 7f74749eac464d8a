//! Acceptance suite. Runs without the libtest harness so every criterion
//! prints its `[PASS]`/`[FAIL]` line; the process fails if any criterion
//! does.

use std::collections::BTreeSet;
use std::panic;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use pcf_forcing::builder::{self, Chain, PcfStructure, Schedule};
use pcf_forcing::dense::DenseSetSpec;
use pcf_forcing::gen;
use pcf_forcing::kernel::{amalgamate, delta_system_demo, Condition};
use pcf_forcing::ordinal::{self, Ordinal};
use pcf_forcing::verify::{self, Report};

const SEED: u64 = 20_240_611;

fn verdict(id: &str, what: &str, ok: bool, detail: &str) {
    println!("[{}] {id} {what}: {detail}", if ok { "PASS" } else { "FAIL" });
    assert!(ok, "{id} {what}: {detail}");
}

fn summary(r: &Report) -> String {
    if r.pass() {
        format!("{} checks passed", r.checks.len())
    } else {
        let failing: Vec<String> = r
            .checks
            .iter()
            .filter(|c| !c.pass)
            .map(|c| format!("{} ({}) {}", c.name, c.detail, c.witness))
            .collect();
        failing.join("; ")
    }
}

fn o(s: &str) -> Ordinal {
    s.parse().unwrap()
}

fn ac1_kernel_laws() {
    let start = Instant::now();
    let r = verify::check_condition_laws(10_000, SEED);
    let elapsed = start.elapsed();
    let counts_ok = r
        .get("stronger-reflexive")
        .is_some_and(|c| c.detail.starts_with("10000 "))
        && r.get("amalgamate-valid").is_some_and(|c| c.detail.starts_with("2000 "));
    verdict(
        "AC1",
        "kernel laws on 10000 conditions and 2000 amalgamations",
        r.pass() && counts_ok && elapsed < Duration::from_secs(60),
        &format!("{} in {:.2?}", summary(&r), elapsed),
    );
}

fn ac2_oracle_equivalence() {
    let start = Instant::now();
    let r = verify::oracle_equivalence(500, SEED);
    let elapsed = start.elapsed();
    let counted = r.get("oracle-complete").is_some_and(|c| c.detail.starts_with("500 "));
    verdict(
        "AC2",
        "oracle agrees with amalgamation on 500 instances",
        r.pass() && counted && elapsed < Duration::from_secs(120),
        &format!("{} in {:.2?}", summary(&r), elapsed),
    );
}

fn ac3_dense_meets() {
    let r = verify::dense_meet_contract(1000, SEED);
    let counted = r.checks.len() == 3 && r.checks.iter().all(|c| c.detail.starts_with("1000 "));
    verdict(
        "AC3",
        "dense meets for 3 kinds x 1000 pairs",
        r.pass() && counted,
        &summary(&r),
    );
}

fn w2_build() -> (Schedule, Chain, PcfStructure, String) {
    let schedule = builder::preset("w2-demo").unwrap();
    let chain = builder::run(&schedule).unwrap();
    let s = builder::extract(&chain);
    let export = serde_json::to_string_pretty(&s.export()).unwrap();
    (schedule, chain, s, export)
}

fn ac4_w2_demo_build() {
    let start = Instant::now();
    let (schedule, chain, s, first) = w2_build();
    let r = verify::check_structure(&s, &chain, &schedule).unwrap();
    let (_, _, _, second) = w2_build();
    let elapsed = start.elapsed();
    let names: BTreeSet<&str> = r.checks.iter().map(|c| c.name.as_str()).collect();
    let expected: BTreeSet<&str> = [
        "a-max",
        "b-transitivity",
        "partition",
        "c-separation",
        "d-trace-audit",
        "ideal-escape",
    ]
    .into();
    let seps = r.get("c-separation").map(|c| c.detail.clone()).unwrap_or_default();
    let ok = schedule.len() == 141
        && chain.len() == 141
        && names == expected
        && r.pass()
        && seps == "100 separations"
        && first == second
        && elapsed < Duration::from_secs(60);
    verdict(
        "AC4",
        "w2-demo builds, verifies and exports identically",
        ok,
        &format!(
            "{} items, {}, exports identical: {}, {:.2?}",
            schedule.len(),
            summary(&r),
            first == second,
            elapsed
        ),
    );
}

/// Applies each candidate mutation in turn and returns the first whose full
/// report fails exactly `target`, with the failing check's witness.
fn inject<F>(
    target: &str,
    base: &PcfStructure,
    chain: &Chain,
    schedule: &Schedule,
    candidates: Vec<F>,
) -> Option<serde_json::Value>
where
    F: FnOnce(&mut PcfStructure),
{
    for mutate in candidates {
        let mut s = base.clone();
        mutate(&mut s);
        let r = verify::check_structure(&s, chain, schedule).unwrap();
        if r.failing() == [target] {
            let w = r.get(target).unwrap().witness.clone();
            if w.as_array().is_some_and(|a| !a.is_empty()) {
                return Some(w);
            }
        }
    }
    None
}

type Mutation = Box<dyn FnOnce(&mut PcfStructure)>;

fn separations(schedule: &Schedule) -> Vec<(Ordinal, Ordinal, Ordinal, BTreeSet<Ordinal>)> {
    schedule
        .separations()
        .filter_map(|s| match s {
            DenseSetSpec::Separate {
                lambda,
                alpha,
                gamma,
                avoid,
            } => Some((lambda.clone(), alpha.clone(), gamma.clone(), avoid.clone())),
            _ => None,
        })
        .collect()
}

fn ac5_fault_injection() {
    let (schedule, chain, s, _) = w2_build();
    let seps = separations(&schedule);
    let avoided: BTreeSet<Ordinal> = seps.iter().flat_map(|(_, _, _, av)| av.iter().cloned()).collect();
    let support: Vec<Ordinal> = s.support().cloned().collect();
    let color = |x: &Ordinal| s.classes.iter().find(|(_, c)| c.contains(x)).map(|(n, _)| *n).unwrap();

    let mut results = Vec::new();

    // a-max: drop alpha from B[alpha]
    let cands: Vec<Mutation> = support
        .iter()
        .map(|a| {
            let a = a.clone();
            Box::new(move |s: &mut PcfStructure| {
                s.b.get_mut(&a).unwrap().remove(&a);
            }) as Mutation
        })
        .collect();
    results.push(("a-max", inject("a-max", &s, &chain, &schedule, cands)));

    // b-transitivity: put x into B[y] for x < y without B[x]
    let mut cands: Vec<Mutation> = Vec::new();
    for y in support.iter().rev().filter(|y| !avoided.contains(*y)) {
        for x in support.iter().filter(|x| *x < y && !s.b[y].contains(*x)) {
            if s.b[x].is_subset(&s.b[y]) {
                continue;
            }
            let (x, y) = (x.clone(), y.clone());
            cands.push(Box::new(move |s: &mut PcfStructure| {
                s.b.get_mut(&y).unwrap().insert(x);
            }));
        }
    }
    results.push(("b-transitivity", inject("b-transitivity", &s, &chain, &schedule, cands)));

    // partition: a class picks up an ordinal outside the support
    let cands: Vec<Mutation> = vec![Box::new(|s: &mut PcfStructure| {
        s.classes.entry(0).or_default().insert(o("w^3"));
    })];
    results.push(("partition", inject("partition", &s, &chain, &schedule, cands)));

    // c-separation: strip every candidate beta from B[alpha]
    let cands: Vec<Mutation> = seps
        .iter()
        .map(|(lambda, alpha, gamma, _)| {
            let (lambda, alpha, gamma) = (lambda.clone(), alpha.clone(), gamma.clone());
            Box::new(move |s: &mut PcfStructure| {
                s.b.get_mut(&alpha).unwrap().retain(|b| !(b >= &gamma && b < &lambda));
            }) as Mutation
        })
        .collect();
    results.push(("c-separation", inject("c-separation", &s, &chain, &schedule, cands)));

    // d-trace-audit: recolour a late beta in B[alpha] into class 0
    let mut cands: Vec<Mutation> = Vec::new();
    for a in support.iter().rev() {
        for beta in s.b[a].iter().filter(|b| *b != a) {
            let from = color(beta);
            if from == 0 {
                continue;
            }
            let beta = beta.clone();
            cands.push(Box::new(move |s: &mut PcfStructure| {
                s.classes.get_mut(&from).unwrap().remove(&beta);
                s.classes.entry(0).or_default().insert(beta);
            }));
        }
    }
    results.push(("d-trace-audit", inject("d-trace-audit", &s, &chain, &schedule, cands)));

    // ideal-escape: forget the audit of an avoided ordinal
    let cands: Vec<Mutation> = avoided
        .iter()
        .map(|x| {
            let x = x.clone();
            Box::new(move |s: &mut PcfStructure| s.audit.retain(|(a, _), _| a != &x)) as Mutation
        })
        .collect();
    results.push(("ideal-escape", inject("ideal-escape", &s, &chain, &schedule, cands)));

    let ok = results.len() == 6 && results.iter().all(|(_, w)| w.is_some());
    let detail: Vec<String> = results
        .iter()
        .map(|(name, w)| match w {
            Some(w) => format!("{name} -> {}", w[0]),
            None => format!("{name} -> no isolating mutation"),
        })
        .collect();
    verdict(
        "AC5",
        "6 mutations each fail exactly their check",
        ok,
        &detail.join("; "),
    );
}

fn random_limit(rng: &mut ChaCha8Rng) -> Ordinal {
    loop {
        let x = gen::cnf_ordinal(rng, 5, 6, 4);
        if x.is_limit() {
            return x;
        }
    }
}

fn ac6_ordinals() {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut failures = Vec::new();

    let big = Ordinal::from_terms((0..1000u32).rev().map(|e| (e, u64::from(e % 7) + 1))).unwrap();
    let text = big.to_string();
    if ordinal::parse(&text).as_ref() != Ok(&big) || big.terms().len() != 1000 {
        failures.push("1000-term round trip".to_string());
    }
    for _ in 0..1000 {
        let x = gen::cnf_ordinal(&mut rng, 12, 1000, 6);
        let s = x.to_string();
        if ordinal::parse(&s).as_ref() != Ok(&x) || ordinal::parse(&s).unwrap().to_string() != s {
            failures.push(format!("round trip {s}"));
        }
    }

    for _ in 0..10_000 {
        let [a, b, c] = [0; 3].map(|_| gen::cnf_ordinal(&mut rng, 3, 3, 3));
        let ab = ordinal::compare(&a, &b);
        if ab != ordinal::compare(&b, &a).reverse() || (ab.is_eq() != (a == b)) {
            failures.push(format!("antisymmetry/totality {a} {b}"));
        }
        if ordinal::compare(&a, &b).is_le() && ordinal::compare(&b, &c).is_le() && ordinal::compare(&a, &c).is_gt() {
            failures.push(format!("transitivity {a} {b} {c}"));
        }
        if !ordinal::compare(&a, &a).is_eq() {
            failures.push(format!("reflexivity {a}"));
        }
    }

    for _ in 0..100 {
        let lambda = random_limit(&mut rng);
        let mu = loop {
            let m = gen::cnf_ordinal(&mut rng, 5, 8, 4);
            if m < lambda {
                break m;
            }
        };
        let seq: Vec<Ordinal> = (0..64).map(|n| lambda.fund_seq(n).unwrap()).collect();
        if !seq.windows(2).all(|w| w[0] < w[1]) || !seq.iter().all(|x| x < &lambda) {
            failures.push(format!("fund_seq of {lambda} not increasing below it"));
        }
        let mut n = 0u64;
        while lambda.fund_seq(n).unwrap() <= mu && n < 1_000_000 {
            n += 1;
        }
        if lambda.fund_seq(n).unwrap() <= mu {
            failures.push(format!("no index of {lambda} dominates {mu}"));
        }
    }
    verdict(
        "AC6",
        "ordinal round trip, order laws and fundamental sequences",
        failures.is_empty(),
        &if failures.is_empty() {
            "0 failures".to_string()
        } else {
            failures[..failures.len().min(5)].join("; ")
        },
    );
}

/// A family of `size` conditions sharing root data (support below `w` and
/// one common bound), member `k` adding fresh ordinals in the block
/// `w*(k+1) + j`.
fn rooted_family(rng: &mut ChaCha8Rng, size: usize) -> Vec<Condition> {
    let root = loop {
        let c = gen::random_condition(rng, 4);
        if c.support().all(|x| x < &o("w")) {
            break c;
        }
    };
    let bound = root.bound().max(1) + rng.gen_range(0..=2);
    (0..size)
        .map(|k| {
            let mut p = root.clone();
            p.set_bound(bound);
            let fresh: Vec<Ordinal> = (0..rng.gen_range(1..=3u64))
                .map(|j| Ordinal::from_terms([(1, k as u64 + 1)]).unwrap().add(&Ordinal::from(j)))
                .collect();
            for x in &fresh {
                p.insert(x.clone(), rng.gen_range(0..bound));
                let below: Vec<Ordinal> = p.support().filter(|y| *y < x).cloned().collect();
                for t in below {
                    if !rng.gen_bool(0.4) || p.rel(x, &t) {
                        continue;
                    }
                    let reach: Vec<Ordinal> = p.related(&t).cloned().collect();
                    if reach.iter().all(|z| p.color(z) != p.color(x)) {
                        for z in reach {
                            p.link(x, &z).unwrap();
                        }
                    }
                }
            }
            assert!(p.is_valid() && p.is_stronger_than(&root));
            p
        })
        .collect()
}

fn ac7_delta_systems() {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut failures = Vec::new();
    let mut full = 0;
    for f in 0..50 {
        let structured = f % 2 == 0;
        let family = if structured {
            rooted_family(&mut rng, 2 + f % 11)
        } else {
            let mut fam = rooted_family(&mut rng, 1 + f % 8);
            for _ in 0..rng.gen_range(1..=4) {
                fam.push(gen::random_condition(&mut rng, 5));
            }
            fam
        };
        assert!(family.len() <= 12);
        let ds = match delta_system_demo(&family, 1) {
            Ok(ds) => ds,
            Err(e) => {
                failures.push(format!("family {f}: {e}"));
                continue;
            }
        };
        for (x, y, r) in &ds.witnesses {
            let (earlier, later) = (&family[ds.members[*x]], &family[ds.members[*y]]);
            let eta = earlier.max_support().map(Ordinal::successor).unwrap_or_default();
            let again = amalgamate(later, earlier, &eta);
            if !(r.is_valid() && r.is_stronger_than(earlier) && r.is_stronger_than(later) && again.as_ref() == Ok(r)) {
                failures.push(format!("family {f}: members {x},{y} not certified"));
            }
        }
        let n = ds.members.len();
        if ds.witnesses.len() != n * (n - 1) / 2 {
            failures.push(format!("family {f}: {} witnesses for {n} members", ds.witnesses.len()));
        }
        if structured {
            if n == family.len() {
                full += 1;
            } else {
                failures.push(format!("family {f}: {n} of {} members returned", family.len()));
            }
        }
    }
    verdict(
        "AC7",
        "delta-system demo on 50 families",
        failures.is_empty() && full == 25,
        &if failures.is_empty() {
            "25 rooted families returned in full, all pairs certified".to_string()
        } else {
            failures.join("; ")
        },
    );
}

fn main() -> ExitCode {
    let criteria: [(&str, fn()); 7] = [
        ("AC1", ac1_kernel_laws),
        ("AC2", ac2_oracle_equivalence),
        ("AC3", ac3_dense_meets),
        ("AC4", ac4_w2_demo_build),
        ("AC5", ac5_fault_injection),
        ("AC6", ac6_ordinals),
        ("AC7", ac7_delta_systems),
    ];
    let mut failed = 0;
    for (id, criterion) in criteria {
        if panic::catch_unwind(criterion).is_err() {
            eprintln!("{id} failed");
            failed += 1;
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
