//! The forcing poset.
//!
//! A [`Condition`] is a finite quadruple `(S, pi, b, u)`: a support `S` of
//! ordinals, a colouring `pi: S -> {0..u-1}`, a 0/1 relation `b` on `S x S`,
//! and a natural bound `u`. The relation is stored as its 1-pairs grouped by
//! source ordinal; any pair inside `S x S` that is not stored reads as 0.
//!
//! Validity (see [`Condition::validate`]):
//!
//! * `b(a,a) = 1` for every `a` in `S`;
//! * `b(a,c) = 0` whenever `a < c`;
//! * `b` is transitive;
//! * every colour is below `u`;
//! * `b(a,c) = 1` with `c < a` forces `pi(a) != pi(c)`.
//!
//! `r` is stronger than `p` when `r` contains `p` (support, relation on
//! `S_p x S_p`, colours), `u_r >= u_p`, and every new ordinal that some old
//! ordinal relates to has colour at least `u_p`. That last clause nominally
//! ranges over every new `c`, but order-zero already kills `b(a,c)` for
//! `a < c`, so only new ordinals below an old one can be affected.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ordinal::Ordinal;

/// Largest number of undetermined cross pairs [`compat_oracle`] will enumerate.
pub const ORACLE_MAX_FREE_PAIRS: usize = 20;
/// Largest family [`delta_system_demo`] will search exhaustively.
pub const DELTA_MAX_FAMILY: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Clause {
    Reflexivity,
    OrderZero,
    Transitivity,
    ColorRange,
    ColorClash,
    /// Support containment.
    ExtensionI,
    /// Relation agreement on the old support.
    ExtensionIi,
    /// Colour agreement on the old support.
    ExtensionIii,
    /// Bound monotonicity.
    ExtensionIv,
    /// Colour floor for newly related ordinals.
    ExtensionV,
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Clause::Reflexivity => "reflexivity",
            Clause::OrderZero => "order-zero",
            Clause::Transitivity => "transitivity",
            Clause::ColorRange => "color-range",
            Clause::ColorClash => "color-clash",
            Clause::ExtensionI => "extension-i",
            Clause::ExtensionIi => "extension-ii",
            Clause::ExtensionIii => "extension-iii",
            Clause::ExtensionIv => "extension-iv",
            Clause::ExtensionV => "extension-v",
        };
        f.write_str(s)
    }
}

/// A failed clause together with the ordinals that witness the failure.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub clause: Clause,
    pub offenders: Vec<Ordinal>,
}

impl Violation {
    fn new(clause: Clause, offenders: Vec<Ordinal>) -> Self {
        Violation { clause, offenders }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} [", self.clause)?;
        for (i, o) in self.offenders.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{o}")?;
        }
        f.write_str("]")
    }
}

fn list(vs: &[Violation]) -> String {
    vs.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum KernelError {
    #[error("malformed condition: {0}")]
    Shape(String),
    #[error("invalid {which} condition: {}", list(.violations))]
    Invalid {
        which: &'static str,
        violations: Vec<Violation>,
    },
    #[error("amalgamation precondition failed: {}", list(.violations))]
    Precondition { violations: Vec<Violation> },
    #[error("support of q is not below the cut {eta}: offending {offenders:?}")]
    NotBelowCut { eta: Ordinal, offenders: Vec<Ordinal> },
    #[error("oracle search too large: {free_pairs} free pairs (limit {limit})")]
    OracleGuard { free_pairs: usize, limit: usize },
    #[error("family of {size} conditions exceeds the brute-force limit of {limit}")]
    FamilyGuard { size: usize, limit: usize },
    #[error("no delta-system of size {target} in the family")]
    NoDeltaSystem { target: usize },
}

/// A forcing condition.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Condition {
    color: BTreeMap<Ordinal, u64>,
    rel: BTreeMap<Ordinal, BTreeSet<Ordinal>>,
    bound: u64,
}

impl Condition {
    /// `(empty, empty, empty, 0)`.
    pub fn empty() -> Self {
        Condition::default()
    }

    /// A condition with no support and the given bound.
    pub fn with_bound(bound: u64) -> Self {
        Condition {
            bound,
            ..Default::default()
        }
    }

    /// Assembles a condition from raw parts. Only the shape is checked here
    /// (colours total on the support, relation inside the support); the
    /// forcing clauses are left to [`Condition::validate`].
    pub fn from_parts<S, R>(support: S, color: BTreeMap<Ordinal, u64>, rel1: R, bound: u64) -> Result<Self, KernelError>
    where
        S: IntoIterator<Item = Ordinal>,
        R: IntoIterator<Item = (Ordinal, Ordinal)>,
    {
        let support: BTreeSet<Ordinal> = support.into_iter().collect();
        if let Some(a) = support.iter().find(|a| !color.contains_key(*a)) {
            return Err(KernelError::Shape(format!("no colour for support element {a}")));
        }
        if let Some(a) = color.keys().find(|a| !support.contains(*a)) {
            return Err(KernelError::Shape(format!(
                "colour given for {a}, which is not in the support"
            )));
        }
        let mut rel: BTreeMap<Ordinal, BTreeSet<Ordinal>> = BTreeMap::new();
        for (a, b) in rel1 {
            if !support.contains(&a) || !support.contains(&b) {
                return Err(KernelError::Shape(format!("pair ({a}, {b}) leaves the support")));
            }
            rel.entry(a).or_default().insert(b);
        }
        Ok(Condition { color, rel, bound })
    }

    pub fn support(&self) -> impl Iterator<Item = &Ordinal> + '_ {
        self.color.keys()
    }

    pub fn support_set(&self) -> BTreeSet<Ordinal> {
        self.color.keys().cloned().collect()
    }

    pub fn support_len(&self) -> usize {
        self.color.len()
    }

    pub fn contains(&self, a: &Ordinal) -> bool {
        self.color.contains_key(a)
    }

    pub fn max_support(&self) -> Option<&Ordinal> {
        self.color.keys().next_back()
    }

    pub fn bound(&self) -> u64 {
        self.bound
    }

    pub fn set_bound(&mut self, bound: u64) {
        self.bound = bound;
    }

    pub fn color(&self, a: &Ordinal) -> Option<u64> {
        self.color.get(a).copied()
    }

    pub fn colors(&self) -> &BTreeMap<Ordinal, u64> {
        &self.color
    }

    /// `b(a, c)`; false outside the support.
    pub fn rel(&self, a: &Ordinal, c: &Ordinal) -> bool {
        self.rel.get(a).is_some_and(|s| s.contains(c))
    }

    /// `{c : b(a, c) = 1}`.
    pub fn related(&self, a: &Ordinal) -> impl Iterator<Item = &Ordinal> + '_ {
        self.rel.get(a).into_iter().flatten()
    }

    /// Every 1-pair, ordered by source then target.
    pub fn rel1(&self) -> impl Iterator<Item = (&Ordinal, &Ordinal)> + '_ {
        self.rel.iter().flat_map(|(a, s)| s.iter().map(move |c| (a, c)))
    }

    pub fn rel1_len(&self) -> usize {
        self.rel.values().map(BTreeSet::len).sum()
    }

    /// Adds `a` with colour `color` and `b(a, a) = 1`. An existing entry is
    /// recoloured and keeps its relation.
    pub fn insert(&mut self, a: Ordinal, color: u64) {
        self.rel.entry(a.clone()).or_default().insert(a.clone());
        self.color.insert(a, color);
    }

    /// Sets `b(a, c) = 1`. Both ordinals must already be in the support.
    pub fn link(&mut self, a: &Ordinal, c: &Ordinal) -> Result<(), KernelError> {
        if !self.contains(a) || !self.contains(c) {
            return Err(KernelError::Shape(format!("pair ({a}, {c}) leaves the support")));
        }
        self.rel.entry(a.clone()).or_default().insert(c.clone());
        Ok(())
    }

    /// Sets `b(a, c) = 0`.
    pub fn unlink(&mut self, a: &Ordinal, c: &Ordinal) {
        if let Some(s) = self.rel.get_mut(a) {
            s.remove(c);
            if s.is_empty() {
                self.rel.remove(a);
            }
        }
    }

    /// Checks every validity clause and reports each failure with its
    /// witnesses.
    pub fn validate(&self) -> Result<(), Vec<Violation>> {
        let mut out = Vec::new();
        for a in self.support() {
            if !self.rel(a, a) {
                out.push(Violation::new(Clause::Reflexivity, vec![a.clone()]));
            }
        }
        for (a, c) in self.rel1() {
            if a < c {
                out.push(Violation::new(Clause::OrderZero, vec![a.clone(), c.clone()]));
            }
        }
        for (a, c) in self.rel1() {
            for d in self.related(c) {
                if !self.rel(a, d) {
                    out.push(Violation::new(
                        Clause::Transitivity,
                        vec![a.clone(), c.clone(), d.clone()],
                    ));
                }
            }
        }
        for (a, &col) in &self.color {
            if col >= self.bound {
                out.push(Violation::new(Clause::ColorRange, vec![a.clone()]));
            }
        }
        for (a, c) in self.rel1() {
            if c < a && self.color.get(a) == self.color.get(c) {
                out.push(Violation::new(Clause::ColorClash, vec![a.clone(), c.clone()]));
            }
        }
        if out.is_empty() {
            Ok(())
        } else {
            Err(out)
        }
    }

    pub fn is_valid(&self) -> bool {
        self.validate().is_ok()
    }

    /// The extension clauses that fail for "`self` is stronger than `weaker`".
    pub fn extension_violations(&self, weaker: &Condition) -> Vec<Violation> {
        let mut out = Vec::new();
        let missing: Vec<Ordinal> = weaker.support().filter(|a| !self.contains(a)).cloned().collect();
        if !missing.is_empty() {
            out.push(Violation::new(Clause::ExtensionI, missing));
        }
        for a in weaker.support() {
            for c in weaker.support() {
                if self.rel(a, c) != weaker.rel(a, c) {
                    out.push(Violation::new(Clause::ExtensionIi, vec![a.clone(), c.clone()]));
                }
            }
        }
        for (a, col) in &weaker.color {
            if self.color.get(a) != Some(col) {
                out.push(Violation::new(Clause::ExtensionIii, vec![a.clone()]));
            }
        }
        if self.bound < weaker.bound {
            out.push(Violation::new(Clause::ExtensionIv, vec![]));
        }
        for a in weaker.support() {
            for c in self.related(a) {
                if weaker.contains(c) {
                    continue;
                }
                if self.color(c).is_none_or(|col| col < weaker.bound) {
                    out.push(Violation::new(Clause::ExtensionV, vec![a.clone(), c.clone()]));
                }
            }
        }
        out
    }

    pub fn is_stronger_than(&self, weaker: &Condition) -> bool {
        self.extension_violations(weaker).is_empty()
    }

    /// `p|eta`: the part of the condition strictly below `eta`, same bound.
    pub fn restrict(&self, eta: &Ordinal) -> Condition {
        let color: BTreeMap<Ordinal, u64> = self.color.range(..eta.clone()).map(|(a, c)| (a.clone(), *c)).collect();
        let rel = self
            .rel
            .range(..eta.clone())
            .filter_map(|(a, s)| {
                let below: BTreeSet<Ordinal> = s.range(..eta.clone()).cloned().collect();
                (!below.is_empty()).then(|| (a.clone(), below))
            })
            .collect();
        Condition {
            color,
            rel,
            bound: self.bound,
        }
    }
}

/// `true` iff `r` is stronger than `p`.
pub fn is_stronger(r: &Condition, p: &Condition) -> bool {
    r.is_stronger_than(p)
}

/// Merges `q`, a strengthening of `p|eta` living below `eta`, with `p`.
///
/// The result has support `S_p u S_q`, the union of the colourings, bound
/// `u_q`, and the relation of `p` on `S_p` and of `q` on `S_q`. A pair
/// `(a, c)` with `a >= eta` from `p` and `c` new in `q` is set to 1 exactly
/// when some `g < eta` in `S_p` has `b_p(a, g) = 1` and `b_q(g, c) = 1`.
/// Every other cross pair is 0.
pub fn amalgamate(p: &Condition, q: &Condition, eta: &Ordinal) -> Result<Condition, KernelError> {
    p.validate()
        .map_err(|violations| KernelError::Invalid { which: "p", violations })?;
    q.validate()
        .map_err(|violations| KernelError::Invalid { which: "q", violations })?;
    let above: Vec<Ordinal> = q.support().filter(|a| *a >= eta).cloned().collect();
    if !above.is_empty() {
        return Err(KernelError::NotBelowCut {
            eta: eta.clone(),
            offenders: above,
        });
    }
    let base = p.restrict(eta);
    let violations = q.extension_violations(&base);
    if !violations.is_empty() {
        return Err(KernelError::Precondition { violations });
    }

    let mut r = q.clone();
    for (a, &col) in &p.color {
        r.color.insert(a.clone(), col);
    }
    for (a, c) in p.rel1() {
        r.rel.entry(a.clone()).or_default().insert(c.clone());
    }
    let fresh: Vec<&Ordinal> = q.support().filter(|c| !p.contains(c)).collect();
    for a in p.color.range(eta.clone()..).map(|(a, _)| a) {
        let mediators: Vec<&Ordinal> = p.related(a).filter(|g| *g < eta).collect();
        for &c in &fresh {
            if mediators.iter().any(|g| q.rel(g, c)) {
                r.rel.entry(a.clone()).or_default().insert(c.clone());
            }
        }
    }
    Ok(r)
}

/// Exhaustive search for a common extension of `p` and `q`.
///
/// The candidate has support `S_p u S_q`, the union of the colourings and
/// bound `max(u_p, u_q)`; every 0/1 assignment to the cross pairs that the
/// inputs leave open is tried in a fixed order and the first one that is a
/// valid condition stronger than both inputs is returned.
///
/// Fixing support, colours and bound loses nothing. If some `r'` extends
/// both, its restriction to `S_p u S_q` is still a condition (validity is
/// inherited by subsets), still satisfies the colour-floor clause against
/// both inputs (that clause only looks at colours and the inputs' bounds),
/// and its colours there are forced to be the union. Lowering its bound to
/// `max(u_p, u_q)` keeps every colour in range because each colour comes from
/// an input whose bound is at most the max.
///
/// Pairs are forced to 0 when they would break order-zero, clash colours, or
/// fall under the colour floor of the input that owns the larger ordinal;
/// the remaining pairs are enumerated. The search is exponential, and past
/// [`ORACLE_MAX_FREE_PAIRS`] open pairs it refuses to run.
pub fn compat_oracle(p: &Condition, q: &Condition) -> Result<Option<Condition>, KernelError> {
    for a in p.support().filter(|a| q.contains(a)) {
        if p.color(a) != q.color(a) {
            return Ok(None);
        }
        for c in p.support().filter(|c| q.contains(c)) {
            if p.rel(a, c) != q.rel(a, c) {
                return Ok(None);
            }
        }
    }

    let mut base = Condition::with_bound(p.bound.max(q.bound));
    for (a, &col) in p.color.iter().chain(q.color.iter()) {
        base.color.insert(a.clone(), col);
    }
    for (a, c) in p.rel1().chain(q.rel1()) {
        base.rel.entry(a.clone()).or_default().insert(c.clone());
    }

    let only_p: Vec<&Ordinal> = p.support().filter(|a| !q.contains(a)).collect();
    let only_q: Vec<&Ordinal> = q.support().filter(|a| !p.contains(a)).collect();
    let mut free: Vec<(Ordinal, Ordinal)> = Vec::new();
    let mut consider = |hi: &Ordinal, lo: &Ordinal, owner: &Condition| {
        let (ch, cl) = (base.color[hi], base.color[lo]);
        if ch != cl && cl >= owner.bound {
            free.push((hi.clone(), lo.clone()));
        }
    };
    for &a in &only_p {
        for &c in &only_q {
            if a > c {
                consider(a, c, p);
            } else {
                consider(c, a, q);
            }
        }
    }
    free.sort();
    if free.len() > ORACLE_MAX_FREE_PAIRS {
        return Err(KernelError::OracleGuard {
            free_pairs: free.len(),
            limit: ORACLE_MAX_FREE_PAIRS,
        });
    }

    for mask in 0u64..(1u64 << free.len()) {
        let mut cand = base.clone();
        for (i, (a, c)) in free.iter().enumerate() {
            if mask >> i & 1 == 1 {
                cand.rel.entry(a.clone()).or_default().insert(c.clone());
            }
        }
        if cand.is_valid() && cand.is_stronger_than(p) && cand.is_stronger_than(q) {
            return Ok(Some(cand));
        }
    }
    Ok(None)
}

/// A subfamily found by [`delta_system_demo`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeltaSystem {
    /// Indices into the input family, earliest support first.
    pub members: Vec<usize>,
    pub root: BTreeSet<Ordinal>,
    /// For each pair `(i, j)` of positions in `members` with `i < j`, the
    /// amalgamation of the later condition with the earlier one.
    pub witnesses: Vec<(usize, usize, Condition)>,
}

/// The condition a member of a delta-system is seen to contain on its root.
fn root_condition(p: &Condition, root: &BTreeSet<Ordinal>) -> Condition {
    let mut out = Condition::with_bound(p.bound);
    for a in root {
        out.color.insert(a.clone(), p.color[a]);
    }
    for a in root {
        let s: BTreeSet<Ordinal> = p.related(a).filter(|c| root.contains(*c)).cloned().collect();
        if !s.is_empty() {
            out.rel.insert(a.clone(), s);
        }
    }
    out
}

/// Checks whether `members` (indices into `family`) form a usable
/// delta-system and, if so, returns them in support order with the root.
fn delta_candidate(family: &[Condition], members: &[usize]) -> Option<(Vec<usize>, BTreeSet<Ordinal>)> {
    let supports: Vec<BTreeSet<Ordinal>> = members.iter().map(|&i| family[i].support_set()).collect();
    let root: BTreeSet<Ordinal> = match supports.as_slice() {
        [] => BTreeSet::new(),
        [only] => only.clone(),
        [first, second, ..] => first.intersection(second).cloned().collect(),
    };
    for i in 0..supports.len() {
        for j in i + 1..supports.len() {
            if supports[i].intersection(&supports[j]).ne(root.iter()) {
                return None;
            }
        }
    }

    let reference = root_condition(&family[members[0]], &root);
    for &m in members {
        let rc = root_condition(&family[m], &root);
        if rc != reference {
            return None;
        }
        // The members must strengthen the shared root data; sharing it is not
        // enough once an old ordinal relates to a low-coloured new one.
        if !family[m].is_stronger_than(&rc) {
            return None;
        }
    }

    // Members with something outside the root sort by their least non-root
    // ordinal; members that are all root go last, where the ordering
    // requirement is vacuous for them.
    let mut order: Vec<(Option<Ordinal>, usize)> = members
        .iter()
        .zip(&supports)
        .map(|(&m, s)| (s.difference(&root).next().cloned(), m))
        .collect();
    order.sort_by(|(ka, ia), (kb, ib)| match (ka, kb) {
        (Some(a), Some(b)) => a.cmp(b).then(ia.cmp(ib)),
        (Some(_), None) => std::cmp::Ordering::Less,
        (None, Some(_)) => std::cmp::Ordering::Greater,
        (None, None) => ia.cmp(ib),
    });
    for (x, (_, i)) in order.iter().enumerate() {
        let top = family[*i].max_support();
        for (_, j) in &order[x + 1..] {
            let later_min = family[*j].support().find(|a| !root.contains(*a));
            if let (Some(top), Some(low)) = (top, later_min) {
                if top >= low {
                    return None;
                }
            }
        }
    }
    Some((order.into_iter().map(|(_, i)| i).collect(), root))
}

/// Finds the largest subfamily (at least `target` strong) whose supports form
/// a delta-system with identical root data, and certifies that every pair is
/// compatible by amalgamating the later condition with the earlier one at a
/// cut just above the earlier support.
///
/// Ties between equally large subfamilies go to the lexicographically least
/// index set.
pub fn delta_system_demo(family: &[Condition], target: usize) -> Result<DeltaSystem, KernelError> {
    if family.len() > DELTA_MAX_FAMILY {
        return Err(KernelError::FamilyGuard {
            size: family.len(),
            limit: DELTA_MAX_FAMILY,
        });
    }
    for p in family {
        p.validate().map_err(|violations| KernelError::Invalid {
            which: "family member",
            violations,
        })?;
    }
    let n = family.len();
    for size in (target.max(1)..=n).rev() {
        let mut subsets: Vec<Vec<usize>> = (0u32..(1u32 << n))
            .filter(|m| m.count_ones() as usize == size)
            .map(|m| (0..n).filter(|i| m >> i & 1 == 1).collect())
            .collect();
        subsets.sort();
        for members in subsets {
            let Some((ordered, root)) = delta_candidate(family, &members) else {
                continue;
            };
            let mut witnesses = Vec::new();
            for x in 0..ordered.len() {
                let earlier = &family[ordered[x]];
                let eta = earlier
                    .max_support()
                    .map(Ordinal::successor)
                    .unwrap_or_else(Ordinal::zero);
                for y in x + 1..ordered.len() {
                    let later = &family[ordered[y]];
                    witnesses.push((x, y, amalgamate(later, earlier, &eta)?));
                }
            }
            return Ok(DeltaSystem {
                members: ordered,
                root,
                witnesses,
            });
        }
    }
    Err(KernelError::NoDeltaSystem { target })
}

/// Wire form: `{support, color, rel1, bound}` with ordinal strings.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct ConditionRepr {
    support: Vec<Ordinal>,
    color: BTreeMap<Ordinal, u64>,
    rel1: Vec<(Ordinal, Ordinal)>,
    bound: u64,
}

impl Serialize for Condition {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        ConditionRepr {
            support: self.support().cloned().collect(),
            color: self.color.clone(),
            rel1: self.rel1().map(|(a, c)| (a.clone(), c.clone())).collect(),
            bound: self.bound,
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Condition {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let r = ConditionRepr::deserialize(deserializer)?;
        Condition::from_parts(r.support, r.color, r.rel1, r.bound).map_err(serde::de::Error::custom)
    }
}
