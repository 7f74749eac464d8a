//! Checks on an extracted structure.
//!
//! * `a-max`: `max B[a] = a`.
//! * `b-transitivity`: `a in B[c]` implies `B[a] <= B[c]`.
//! * `partition`: the colour classes are disjoint, cover the support, hold
//!   nothing else, and are indexed below the bound.
//! * `c-separation`: each scheduled separation has a `beta` in `B[alpha]`
//!   with `gamma <= beta < lambda` outside every avoided `B[x]`, and the
//!   chain's recorded witness is such a `beta`.
//! * `d-trace-audit`: `B[a] n A_n` lies inside the support of the first
//!   chain step that holds `a` with bound above `n`.
//! * `ideal-escape`: every ordinal in a scheduled avoid set has an audited,
//!   finite trace on every `A_n`, and the trace of the union is bounded by
//!   the sum of the traces.

use std::collections::{BTreeMap, BTreeSet};

use serde_json::json;

use super::{Check, Coverage, Report, Tally, VerifyError};
use crate::builder::{Chain, PcfStructure, Schedule};
use crate::dense::DenseSetSpec;
use crate::ordinal::Ordinal;

pub const IDEAL_ESCAPE_BANNER: &str = "ideal-escape certifies finite traces of scheduled ideal generators on \
     each colour class; the statement about unbounded sets in extensions is not checked";

pub fn check_max(s: &PcfStructure) -> Check {
    let mut t = Tally::new("a-max");
    for (a, set) in &s.b {
        let top = set.last();
        t.expect(top == Some(a), || json!({"alpha": a, "max": top}));
    }
    t.finish("sets")
}

pub fn check_transitivity(s: &PcfStructure) -> Check {
    let mut t = Tally::new("b-transitivity");
    for (c, outer) in &s.b {
        for a in outer {
            let Some(inner) = s.b.get(a) else {
                continue;
            };
            let missing = inner.iter().find(|x| !outer.contains(*x));
            t.expect(missing.is_none(), || json!({"alpha": a, "beta": c, "missing": missing}));
        }
    }
    t.finish("memberships")
}

pub fn check_partition(s: &PcfStructure) -> Check {
    let mut t = Tally::new("partition");
    let mut seen: BTreeMap<&Ordinal, u64> = BTreeMap::new();
    for (&n, class) in &s.classes {
        t.expect(
            n < s.bound_u,
            || json!({"class": n, "bound_u": s.bound_u, "reason": "class index not below bound"}),
        );
        for a in class {
            t.expect(
                s.b.contains_key(a),
                || json!({"ordinal": a, "class": n, "reason": "not in the support"}),
            );
            if let Some(prev) = seen.insert(a, n) {
                t.fail(json!({"ordinal": a, "classes": [prev, n], "reason": "in two classes"}));
            }
        }
    }
    for a in s.support() {
        t.expect(seen.contains_key(a), || json!({"ordinal": a, "reason": "uncoloured"}));
    }
    t.finish("class memberships")
}

fn separates(s: &PcfStructure, alpha: &Ordinal, avoid: &BTreeSet<Ordinal>, beta: &Ordinal) -> bool {
    s.b.get(alpha).is_some_and(|b| b.contains(beta))
        && avoid.iter().all(|x| s.b.get(x).is_none_or(|b| !b.contains(beta)))
}

pub fn check_separation(s: &PcfStructure, chain: &Chain, schedule: &Schedule) -> Check {
    let mut t = Tally::new("c-separation");
    for (i, item) in schedule.items.iter().enumerate() {
        let DenseSetSpec::Separate {
            lambda,
            alpha,
            gamma,
            avoid,
        } = item
        else {
            continue;
        };
        let step = i + 1;
        let found = s.b.get(alpha).and_then(|b| {
            b.range(gamma.clone()..lambda.clone())
                .find(|beta| separates(s, alpha, avoid, beta))
        });
        t.expect(found.is_some(), || {
            json!({"step": step, "lambda": lambda, "alpha": alpha, "gamma": gamma, "avoid": avoid,
                   "reason": "no separating beta"})
        });
        let recorded = chain.steps.get(i).and_then(|st| st.witness.as_ref());
        let recorded_ok =
            recorded.is_some_and(|beta| beta >= gamma && beta < lambda && separates(s, alpha, avoid, beta));
        if found.is_some() && !recorded_ok {
            t.fail(json!({"step": step, "alpha": alpha, "recorded": recorded,
                          "reason": "recorded witness does not separate"}));
        }
    }
    t.finish("separations")
}

/// Ordinal to the classes holding it.
fn color_index(s: &PcfStructure) -> BTreeMap<&Ordinal, Vec<u64>> {
    let mut idx: BTreeMap<&Ordinal, Vec<u64>> = BTreeMap::new();
    for (&n, class) in &s.classes {
        for a in class {
            idx.entry(a).or_default().push(n);
        }
    }
    idx
}

pub fn check_trace_audit(s: &PcfStructure) -> Check {
    let mut t = Tally::new("d-trace-audit");
    let colors = color_index(s);
    for (a, set) in &s.b {
        for beta in set {
            for &n in colors.get(beta).into_iter().flatten() {
                if n >= s.bound_u {
                    continue;
                }
                let Some((step, snap)) = s.audit_snapshot(a, n) else {
                    continue;
                };
                t.expect(
                    snap.contains(beta),
                    || json!({"alpha": a, "n": n, "beta": beta, "step": step}),
                );
            }
        }
    }
    t.finish("trace memberships")
}

pub fn check_ideal_escape(s: &PcfStructure, schedule: &Schedule) -> Check {
    let mut t = Tally::new("ideal-escape");
    let generators: BTreeSet<&BTreeSet<Ordinal>> = schedule
        .items
        .iter()
        .filter_map(|item| match item {
            DenseSetSpec::Separate { avoid, .. } if !avoid.is_empty() => Some(avoid),
            _ => None,
        })
        .collect();

    let colors = color_index(s);
    // trace[a][n] = B[a] n A_n
    let mut trace: BTreeMap<&Ordinal, BTreeMap<u64, BTreeSet<&Ordinal>>> = BTreeMap::new();
    for x in generators.iter().flat_map(|g| g.iter()) {
        let entry = trace.entry(x).or_default();
        for beta in s.b.get(x).into_iter().flatten() {
            for &n in colors.get(beta).into_iter().flatten() {
                entry.entry(n).or_default().insert(beta);
            }
        }
    }
    // per audited step, how many snapshot ordinals sit in each class
    let mut snapshot_hist: BTreeMap<usize, BTreeMap<u64, usize>> = BTreeMap::new();
    for (&step, snap) in &s.snapshots {
        let hist = snapshot_hist.entry(step).or_default();
        for y in snap {
            for &n in colors.get(y).into_iter().flatten() {
                *hist.entry(n).or_insert(0) += 1;
            }
        }
    }

    for gens in &generators {
        for n in 0..s.bound_u {
            let mut sum = 0usize;
            let mut union: BTreeSet<&Ordinal> = BTreeSet::new();
            for x in gens.iter() {
                let tr = trace.get(x).and_then(|m| m.get(&n));
                let size = tr.map_or(0, BTreeSet::len);
                match s.audit_snapshot(x, n) {
                    None => t.expect(false, || json!({"generator": x, "n": n, "reason": "trace not audited"})),
                    Some((step, _)) => {
                        let cap = snapshot_hist.get(&step).and_then(|h| h.get(&n)).copied().unwrap_or(0);
                        t.expect(
                            size <= cap,
                            || json!({"generator": x, "n": n, "trace": size, "snapshot_step": step, "cap": cap}),
                        );
                    }
                }
                sum += size;
                union.extend(tr.into_iter().flatten());
            }
            t.expect(
                union.len() <= sum,
                || json!({"generators": gens, "n": n, "union": union.len(), "sum": sum}),
            );
        }
    }
    t.finish("generator traces")
}

/// The structure-only checks: `a-max`, `b-transitivity` and `partition`.
pub fn check_structure_only(s: &PcfStructure) -> Report {
    let mut r = Report::new(vec![check_max(s), check_transitivity(s), check_partition(s)]);
    r.coverage = Some(Coverage {
        separations: 0,
        ordinals: s.b.len(),
        colors: s.bound_u,
        per_lambda: BTreeMap::new(),
    });
    r
}

/// All six checks. The structure, chain and schedule must share provenance
/// (schedule digest and chain length); their contents are what is checked.
pub fn check_structure(s: &PcfStructure, chain: &Chain, schedule: &Schedule) -> Result<Report, VerifyError> {
    let digest = schedule.digest();
    if chain.schedule_digest != digest {
        return Err(VerifyError::Inconsistent(format!(
            "chain was built from schedule {}, not {digest}",
            chain.schedule_digest
        )));
    }
    if s.schedule_digest != digest {
        return Err(VerifyError::Inconsistent(format!(
            "structure was built from schedule {}, not {digest}",
            s.schedule_digest
        )));
    }
    if s.chain_len != chain.len() || chain.len() != schedule.len() {
        return Err(VerifyError::Inconsistent(format!(
            "lengths disagree: structure {}, chain {}, schedule {}",
            s.chain_len,
            chain.len(),
            schedule.len()
        )));
    }

    let mut report = Report::new(vec![
        check_max(s),
        check_transitivity(s),
        check_partition(s),
        check_separation(s, chain, schedule),
        check_trace_audit(s),
        check_ideal_escape(s, schedule),
    ]);
    let mut per_lambda = BTreeMap::new();
    for item in schedule.separations() {
        if let DenseSetSpec::Separate { lambda, .. } = item {
            *per_lambda.entry(lambda.to_string()).or_insert(0) += 1;
        }
    }
    report.coverage = Some(Coverage {
        separations: per_lambda.values().sum(),
        ordinals: s.b.len(),
        colors: s.bound_u,
        per_lambda,
    });
    report.notes.push(IDEAL_ESCAPE_BANNER.to_string());
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builder::{extract, preset, run};

    fn o(s: &str) -> Ordinal {
        s.parse().unwrap()
    }

    fn smoke() -> (PcfStructure, Chain, Schedule) {
        let schedule = preset("smoke").unwrap();
        let chain = run(&schedule).unwrap();
        (extract(&chain), chain, schedule)
    }

    #[test]
    fn smoke_passes() {
        let (s, chain, schedule) = smoke();
        let r = check_structure(&s, &chain, &schedule).unwrap();
        assert!(r.pass(), "{r:?}");
        assert_eq!(r.checks.len(), 6);
        assert_eq!(chain.steps[2].witness, Some(o("2")));
        let cov = r.coverage.unwrap();
        assert_eq!(cov.separations, 1);
        assert_eq!(cov.per_lambda["w"], 1);
    }

    #[test]
    fn missing_self_fails_max() {
        let (mut s, chain, schedule) = smoke();
        s.b.get_mut(&o("w")).unwrap().remove(&o("w"));
        let r = check_structure(&s, &chain, &schedule).unwrap();
        assert_eq!(r.failing(), vec!["a-max"]);
        assert_eq!(r.get("a-max").unwrap().witness[0]["alpha"], json!("w"));
    }

    #[test]
    fn toy_transitivity_failure() {
        // B[2] = {1, 2}, B[w] = {w}; claiming 2 in B[w] drags 1 along
        let mut s = PcfStructure::from_export(crate::builder::StructureExport {
            bound_u: 3,
            b: BTreeMap::new(),
            a: BTreeMap::new(),
            chain_len: 0,
            witnesses: vec![],
            schedule_digest: String::new(),
        });
        s.b.insert(o("1"), [o("1")].into_iter().collect());
        s.b.insert(o("2"), [o("1"), o("2")].into_iter().collect());
        s.b.insert(o("w"), [o("w")].into_iter().collect());
        for (n, a) in ["1", "2", "w"].iter().enumerate() {
            s.classes.insert(n as u64, [o(a)].into_iter().collect());
        }
        assert!(check_structure_only(&s).pass());
        s.b.get_mut(&o("w")).unwrap().insert(o("2"));
        let r = check_structure_only(&s);
        assert_eq!(r.failing(), vec!["b-transitivity"]);
        assert_eq!(
            r.get("b-transitivity").unwrap().witness[0],
            json!({"alpha": "2", "beta": "w", "missing": "1"})
        );
    }

    #[test]
    fn partition_faults() {
        let (mut s, chain, schedule) = smoke();
        s.classes.get_mut(&1).unwrap().remove(&o("2"));
        s.classes.insert(5, [o("2")].into_iter().collect());
        let r = check_structure(&s, &chain, &schedule).unwrap();
        assert_eq!(r.failing(), vec!["partition"]);

        let (mut s, _, _) = smoke();
        s.classes.get_mut(&1).unwrap().remove(&o("2"));
        assert_eq!(check_structure_only(&s).failing(), vec!["partition"]);

        let (mut s, _, _) = smoke();
        s.classes.entry(0).or_default().insert(o("2"));
        let r = check_structure_only(&s);
        assert_eq!(
            r.get("partition").unwrap().witness[0]["reason"],
            json!("in two classes")
        );
    }

    #[test]
    fn provenance_mismatch_is_an_error() {
        let (s, chain, _) = smoke();
        let other = preset("w2-demo").unwrap();
        assert!(matches!(
            check_structure(&s, &chain, &other),
            Err(VerifyError::Inconsistent(_))
        ));
        let (mut s, chain, schedule) = smoke();
        s.chain_len = 2;
        assert!(check_structure(&s, &chain, &schedule).is_err());
    }

    #[test]
    fn banner_is_present() {
        let (s, chain, schedule) = smoke();
        let r = check_structure(&s, &chain, &schedule).unwrap();
        let text = super::super::render(&r, "text").unwrap();
        assert!(text.contains("not checked"));
    }
}
