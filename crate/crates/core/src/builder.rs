//! Chain construction and extraction.
//!
//! A [`Schedule`] is a finite list of dense sets. [`run`] meets them in order
//! starting from the empty condition, which yields an increasing [`Chain`].
//! [`extract`] reads the family `B[a] = {c : b(a, c) = 1}` and the colour
//! classes `A_n` off the last condition. Relations and colours only ever
//! grow along a chain, so the last condition carries every commitment made
//! earlier.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::dense::{meet, member, DenseError, DenseSetSpec};
use crate::kernel::Condition;
use crate::ordinal::Ordinal;

#[derive(Debug, Error)]
pub enum BuildError {
    #[error("separation #{index} is malformed: {reason}")]
    Malformed { index: usize, reason: String },
    #[error("unknown preset {0:?} (expected \"smoke\" or \"w2-demo\")")]
    UnknownPreset(String),
    #[error("step {step}: {source}")]
    Meet {
        step: usize,
        #[source]
        source: DenseError,
    },
}

/// Parameters of one separation demand.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Separation {
    pub lambda: Ordinal,
    pub alpha: Ordinal,
    pub gamma: Ordinal,
    #[serde(default)]
    pub avoid: BTreeSet<Ordinal>,
}

/// What a schedule was generated from. This is also the schedule file
/// format accepted by the CLI.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScheduleParams {
    pub ordinals: BTreeSet<Ordinal>,
    pub colors: u64,
    #[serde(default)]
    pub separations: Vec<Separation>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schedule {
    pub items: Vec<DenseSetSpec>,
    pub params: ScheduleParams,
}

impl Schedule {
    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// SHA-256 of the canonical JSON encoding, hex.
    pub fn digest(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("schedule serializes");
        hex::encode(Sha256::digest(&bytes))
    }

    /// The separation items in schedule order.
    pub fn separations(&self) -> impl Iterator<Item = &DenseSetSpec> + '_ {
        self.items.iter().filter(|s| matches!(s, DenseSetSpec::Separate { .. }))
    }

    /// Separation parameters (alpha or an avoided ordinal) that no earlier
    /// `AddOrdinal` item covers, as `(item index, ordinal)`. These are
    /// handled by the pre-meets inside the separation itself.
    pub fn pre_met_parameters(&self) -> Vec<(usize, Ordinal)> {
        let mut added = BTreeSet::new();
        let mut out = Vec::new();
        for (i, item) in self.items.iter().enumerate() {
            match item {
                DenseSetSpec::AddOrdinal { alpha } => {
                    added.insert(alpha.clone());
                }
                DenseSetSpec::Separate { alpha, avoid, .. } => {
                    for x in std::iter::once(alpha).chain(avoid) {
                        if added.insert(x.clone()) {
                            out.push((i, x.clone()));
                        }
                    }
                }
                DenseSetSpec::RaiseU { .. } => {}
            }
        }
        out
    }
}

/// `AddOrdinal` for each ordinal in ascending order, then `RaiseU(colors)`
/// (omitted when `colors` is 0), then the separations in the given order.
pub fn make_schedule<I>(ordinals: I, colors: u64, separations: Vec<Separation>) -> Result<Schedule, BuildError>
where
    I: IntoIterator<Item = Ordinal>,
{
    let params = ScheduleParams {
        ordinals: ordinals.into_iter().collect(),
        colors,
        separations,
    };
    schedule_from_params(params)
}

pub fn schedule_from_params(params: ScheduleParams) -> Result<Schedule, BuildError> {
    let mut items: Vec<DenseSetSpec> = params.ordinals.iter().cloned().map(DenseSetSpec::add).collect();
    if params.colors > 0 {
        items.push(DenseSetSpec::raise_u(params.colors));
    }
    for (index, s) in params.separations.iter().enumerate() {
        let spec = DenseSetSpec::separate(s.lambda.clone(), s.alpha.clone(), s.gamma.clone(), s.avoid.clone())
            .map_err(|e| BuildError::Malformed {
                index,
                reason: match e {
                    DenseError::Malformed(r) => r,
                    other => other.to_string(),
                },
            })?;
        items.push(spec);
    }
    Ok(Schedule { items, params })
}

fn o(s: &str) -> Ordinal {
    s.parse().expect("preset ordinals are well formed")
}

/// The ordinals of the `w2-demo` preset: `0..=9`, `w..=w+9`, `w*2..=w*2+4`,
/// `w*3..=w*3+4` and `w*4..=w*4+9`.
pub fn w2_demo_ordinals() -> Vec<Ordinal> {
    let mut out = Vec::new();
    for (block, count) in [(0u64, 10u64), (1, 10), (2, 5), (3, 5), (4, 10)] {
        let base = if block == 0 {
            Ordinal::zero()
        } else {
            Ordinal::from_terms([(1, block)]).expect("single term")
        };
        out.extend((0..count).map(|k| base.add(&Ordinal::from(k))));
    }
    out
}

/// The 100 separation demands of the `w2-demo` preset.
///
/// Demand `i` uses `lambda = [w, w*2, w*3][i % 3]`; `alpha` is entry
/// `(7i + i/3) mod m` of the sampled ordinals in `[lambda, w*4]`; `gamma` is
/// `fund_seq(lambda, [0, 2, 5][(i/3) % 3])`; and the avoid set takes entries
/// `(5i + 11t) mod k`, `t < i % 4`, of the sampled ordinals below `alpha`.
pub fn w2_demo_separations() -> Vec<Separation> {
    let sampled = w2_demo_ordinals();
    let limits = [o("w"), o("w*2"), o("w*3")];
    let cap = o("w*4");
    let steps = [0u64, 2, 5];
    (0..100usize)
        .map(|i| {
            let lambda = limits[i % 3].clone();
            let alphas: Vec<&Ordinal> = sampled.iter().filter(|x| **x >= lambda && **x <= cap).collect();
            let alpha = alphas[(7 * i + i / 3) % alphas.len()].clone();
            let gamma = lambda.fund_seq(steps[(i / 3) % 3]).expect("preset limits are limits");
            let below: Vec<&Ordinal> = sampled.iter().filter(|x| **x < alpha).collect();
            let avoid = (0..(i % 4))
                .map(|t| below[(5 * i + 11 * t) % below.len()].clone())
                .collect();
            Separation {
                lambda,
                alpha,
                gamma,
                avoid,
            }
        })
        .collect()
}

pub const PRESETS: [&str; 2] = ["smoke", "w2-demo"];

pub fn preset(name: &str) -> Result<Schedule, BuildError> {
    match name {
        "smoke" => make_schedule(
            [o("w")],
            1,
            vec![Separation {
                lambda: o("w"),
                alpha: o("w"),
                gamma: o("2"),
                avoid: BTreeSet::new(),
            }],
        ),
        "w2-demo" => make_schedule(w2_demo_ordinals(), 5, w2_demo_separations()),
        other => Err(BuildError::UnknownPreset(other.to_string())),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Step {
    pub spec: DenseSetSpec,
    pub condition: Condition,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<Ordinal>,
}

/// A finite increasing chain of conditions, one per scheduled dense set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Chain {
    pub schedule_digest: String,
    pub steps: Vec<Step>,
}

impl Chain {
    /// The last condition, or the empty condition for an empty chain.
    pub fn final_condition(&self) -> Condition {
        self.steps
            .last()
            .map(|s| s.condition.clone())
            .unwrap_or_else(Condition::empty)
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Checks that every step is valid, stronger than its predecessor and a
    /// member of its dense set. Returns the first offending step (1-based).
    pub fn check_invariants(&self) -> Result<(), (usize, String)> {
        let mut prev = Condition::empty();
        for (i, step) in self.steps.iter().enumerate() {
            let n = i + 1;
            if let Err(vs) = step.condition.validate() {
                return Err((n, format!("invalid condition: {vs:?}")));
            }
            let ext = step.condition.extension_violations(&prev);
            if !ext.is_empty() {
                return Err((n, format!("not stronger than step {}: {ext:?}", n - 1)));
            }
            if !member(&step.spec, &step.condition) {
                return Err((n, format!("not a member of {}", step.spec.kind_name())));
            }
            prev = step.condition.clone();
        }
        Ok(())
    }
}

/// Meets every scheduled dense set in order, starting from the empty
/// condition.
pub fn run(schedule: &Schedule) -> Result<Chain, BuildError> {
    let mut cur = Condition::empty();
    let mut steps = Vec::with_capacity(schedule.len());
    for (i, spec) in schedule.items.iter().enumerate() {
        let m = meet(spec, &cur).map_err(|source| BuildError::Meet { step: i + 1, source })?;
        cur = m.result;
        steps.push(Step {
            spec: spec.clone(),
            condition: cur.clone(),
            witness: m.witness,
        });
    }
    Ok(Chain {
        schedule_digest: schedule.digest(),
        steps,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub step: usize,
    pub beta: Ordinal,
}

/// The structure read off a chain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PcfStructure {
    pub bound_u: u64,
    /// `B[a]` for every `a` in the final support.
    pub b: BTreeMap<Ordinal, BTreeSet<Ordinal>>,
    /// The colour classes `A_n`.
    pub classes: BTreeMap<u64, BTreeSet<Ordinal>>,
    pub witnesses: Vec<Witness>,
    pub chain_len: usize,
    pub schedule_digest: String,
    /// `(a, n)` to the first step (1-based) whose condition holds `a` and has
    /// bound above `n`.
    pub audit: BTreeMap<(Ordinal, u64), usize>,
    /// Supports of the steps the audit refers to.
    pub snapshots: BTreeMap<usize, BTreeSet<Ordinal>>,
}

impl PcfStructure {
    /// The final support: every ordinal with a `B` set.
    pub fn support(&self) -> impl Iterator<Item = &Ordinal> + '_ {
        self.b.keys()
    }

    /// Colour classes containing `a` (one, when the classes partition).
    pub fn colors_of(&self, a: &Ordinal) -> Vec<u64> {
        self.classes
            .iter()
            .filter(|(_, s)| s.contains(a))
            .map(|(n, _)| *n)
            .collect()
    }

    /// The audited snapshot for `(a, n)`, if any.
    pub fn audit_snapshot(&self, a: &Ordinal, n: u64) -> Option<(usize, &BTreeSet<Ordinal>)> {
        let step = *self.audit.get(&(a.clone(), n))?;
        self.snapshots.get(&step).map(|s| (step, s))
    }

    pub fn export(&self) -> StructureExport {
        StructureExport {
            bound_u: self.bound_u,
            b: self.b.clone(),
            a: self.classes.clone(),
            chain_len: self.chain_len,
            witnesses: self.witnesses.clone(),
            schedule_digest: self.schedule_digest.clone(),
        }
    }

    /// A structure without audit data, as loaded from an export.
    pub fn from_export(e: StructureExport) -> Self {
        PcfStructure {
            bound_u: e.bound_u,
            b: e.b,
            classes: e.a,
            witnesses: e.witnesses,
            chain_len: e.chain_len,
            schedule_digest: e.schedule_digest,
            audit: BTreeMap::new(),
            snapshots: BTreeMap::new(),
        }
    }

    /// Replaces the audit data with the one computed from `chain`.
    pub fn with_audit_from(mut self, chain: &Chain) -> Self {
        let (audit, snapshots) = build_audit(chain);
        self.audit = audit;
        self.snapshots = snapshots;
        self
    }
}

/// JSON export of a structure.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StructureExport {
    pub bound_u: u64,
    #[serde(rename = "B")]
    pub b: BTreeMap<Ordinal, BTreeSet<Ordinal>>,
    #[serde(rename = "A")]
    pub a: BTreeMap<u64, BTreeSet<Ordinal>>,
    pub chain_len: usize,
    pub witnesses: Vec<Witness>,
    pub schedule_digest: String,
}

/// Chain provenance file: the schedule and every step.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainFile {
    pub schedule: Schedule,
    pub chain: Chain,
}

type Audit = (BTreeMap<(Ordinal, u64), usize>, BTreeMap<usize, BTreeSet<Ordinal>>);

fn build_audit(chain: &Chain) -> Audit {
    let fin = chain.final_condition();
    let bound_u = fin.bound();
    let mut audit = BTreeMap::new();
    let mut used = BTreeSet::new();
    for a in fin.support() {
        let Some(first) = chain.steps.iter().position(|s| s.condition.contains(a)) else {
            continue;
        };
        let mut idx = first;
        for n in 0..bound_u {
            while idx < chain.steps.len() && chain.steps[idx].condition.bound() <= n {
                idx += 1;
            }
            if idx == chain.steps.len() {
                break;
            }
            audit.insert((a.clone(), n), idx + 1);
            used.insert(idx + 1);
        }
    }
    let snapshots = used
        .into_iter()
        .map(|step| (step, chain.steps[step - 1].condition.support_set()))
        .collect();
    (audit, snapshots)
}

pub fn extract(chain: &Chain) -> PcfStructure {
    let fin = chain.final_condition();
    let b = fin
        .support()
        .map(|a| (a.clone(), fin.related(a).cloned().collect()))
        .collect();
    let mut classes: BTreeMap<u64, BTreeSet<Ordinal>> = BTreeMap::new();
    for (a, &n) in fin.colors() {
        classes.entry(n).or_default().insert(a.clone());
    }
    let witnesses = chain
        .steps
        .iter()
        .enumerate()
        .filter_map(|(i, s)| s.witness.clone().map(|beta| Witness { step: i + 1, beta }))
        .collect();
    let (audit, snapshots) = build_audit(chain);
    PcfStructure {
        bound_u: fin.bound(),
        b,
        classes,
        witnesses,
        chain_len: chain.len(),
        schedule_digest: chain.schedule_digest.clone(),
        audit,
        snapshots,
    }
}
