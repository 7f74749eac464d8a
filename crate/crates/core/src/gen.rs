//! Seeded generators for random ordinals, conditions, strengthenings,
//! amalgamation instances and dense-set specs.
//!
//! The recipe is fixed so that a seed always reproduces the same samples:
//!
//! * ordinals come from a small pool `w^2*e + w*a + b` (`e` in 0..=1 with
//!   probability 1/8 for 1, `a` in 0..=3, `b` in 0..=9) so that random
//!   supports overlap often;
//! * a condition has 0..=`max_support` distinct pool ordinals, bound 1..=5
//!   (0..=3 when empty), uniform colours below the bound, and a relation
//!   grown by offering every downward pair in random order and keeping it
//!   with probability 0.35 when its transitive closure stays valid;
//! * a strengthening raises the bound by 0..=2, adds 0..=3 fresh ordinals
//!   (optionally all below a cut), and grows the relation the same way
//!   except that closures may not touch pairs of old ordinals and an old
//!   ordinal may only reach fresh ordinals coloured at or above the old
//!   bound.
//!
//! Every generated object is valid by construction; the law suites check
//! that anyway.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::dense::DenseSetSpec;
use crate::kernel::Condition;
use crate::ordinal::Ordinal;

const EDGE_PROB: f64 = 0.35;

fn build(e: u64, a: u64, b: u64) -> Ordinal {
    let mut terms = Vec::new();
    if e > 0 {
        terms.push((2, e));
    }
    if a > 0 {
        terms.push((1, a));
    }
    if b > 0 {
        terms.push((0, b));
    }
    Ordinal::from_terms(terms).expect("decreasing exponents")
}

pub fn pool_ordinal<R: Rng + ?Sized>(rng: &mut R) -> Ordinal {
    let e = u64::from(rng.gen_ratio(1, 8));
    build(e, rng.gen_range(0..=3), rng.gen_range(0..=9))
}

/// A random ordinal below `w^w` with up to `max_terms` terms, exponents
/// below `max_exp` and coefficients up to `max_coeff`.
pub fn cnf_ordinal<R: Rng + ?Sized>(rng: &mut R, max_exp: u32, max_coeff: u64, max_terms: usize) -> Ordinal {
    let n = rng.gen_range(0..=max_terms.min(max_exp as usize));
    let mut exps: Vec<u32> = (0..max_exp).collect();
    exps.shuffle(rng);
    let mut exps: Vec<u32> = exps.into_iter().take(n).collect();
    exps.sort_unstable_by(|a, b| b.cmp(a));
    Ordinal::from_terms(exps.into_iter().map(|e| (e, rng.gen_range(1..=max_coeff)))).expect("decreasing exponents")
}

/// Tries to set `b(a, c) = 1` together with everything transitivity then
/// forces. `allowed` vets each pair the closure would add; the edit is all
/// or nothing.
fn try_link<F>(cond: &mut Condition, a: &Ordinal, c: &Ordinal, allowed: F) -> bool
where
    F: Fn(&Condition, &Ordinal, &Ordinal) -> bool,
{
    if cond.rel(a, c) {
        return true;
    }
    let sources: Vec<Ordinal> = cond.support().filter(|x| cond.rel(x, a)).cloned().collect();
    let targets: Vec<Ordinal> = cond.related(c).cloned().collect();
    let mut added = Vec::new();
    for x in &sources {
        for y in &targets {
            if cond.rel(x, y) {
                continue;
            }
            let clash = cond.color(x) == cond.color(y);
            if x <= y || clash || !allowed(cond, x, y) {
                return false;
            }
            added.push((x.clone(), y.clone()));
        }
    }
    for (x, y) in &added {
        cond.link(x, y).expect("both ends in support");
    }
    true
}

fn downward_pairs(points: &[Ordinal]) -> Vec<(Ordinal, Ordinal)> {
    let mut pairs = Vec::new();
    for (i, a) in points.iter().enumerate() {
        for c in &points[..i] {
            pairs.push((a.clone(), c.clone()));
        }
    }
    pairs
}

pub fn random_condition<R: Rng + ?Sized>(rng: &mut R, max_support: usize) -> Condition {
    let size = rng.gen_range(0..=max_support);
    let mut points = BTreeSet::new();
    // the pool is large enough that this terminates quickly
    while points.len() < size {
        points.insert(pool_ordinal(rng));
    }
    let bound = if size == 0 {
        rng.gen_range(0..=3)
    } else {
        rng.gen_range(1..=5)
    };
    let mut cond = Condition::with_bound(bound);
    for a in &points {
        cond.insert(a.clone(), rng.gen_range(0..bound.max(1)));
    }
    let points: Vec<Ordinal> = points.into_iter().collect();
    let mut pairs = downward_pairs(&points);
    pairs.shuffle(rng);
    for (a, c) in pairs {
        if rng.gen_bool(EDGE_PROB) {
            try_link(&mut cond, &a, &c, |_, _, _| true);
        }
    }
    cond
}

/// A random condition stronger than `p`. New ordinals are drawn below
/// `below` when given, and the support is capped at `max_support`.
pub fn random_extension<R: Rng + ?Sized>(
    rng: &mut R,
    p: &Condition,
    below: Option<&Ordinal>,
    max_support: usize,
) -> Condition {
    let mut r = p.clone();
    let mut bound = p.bound() + rng.gen_range(0..=2);
    let room = max_support.saturating_sub(p.support_len());
    let want = rng.gen_range(0..=3usize).min(room);
    let mut fresh = BTreeSet::new();
    for _ in 0..want * 4 {
        if fresh.len() == want {
            break;
        }
        let x = pool_ordinal(rng);
        if !p.contains(&x) && below.is_none_or(|b| &x < b) {
            fresh.insert(x);
        }
    }
    if !fresh.is_empty() && bound == 0 {
        bound = 1;
    }
    r.set_bound(bound);
    for x in &fresh {
        r.insert(x.clone(), rng.gen_range(0..bound));
    }

    let old_bound = p.bound();
    let allowed = |c: &Condition, x: &Ordinal, y: &Ordinal| {
        let x_old = p.contains(x);
        let y_old = p.contains(y);
        match (x_old, y_old) {
            (true, true) => false,
            (true, false) => c.color(y).is_some_and(|col| col >= old_bound),
            _ => true,
        }
    };
    let points: Vec<Ordinal> = r.support().cloned().collect();
    let mut pairs: Vec<(Ordinal, Ordinal)> = downward_pairs(&points)
        .into_iter()
        .filter(|(a, c)| fresh.contains(a) || fresh.contains(c))
        .collect();
    pairs.shuffle(rng);
    for (a, c) in pairs {
        if rng.gen_bool(EDGE_PROB) && allowed(&r, &a, &c) {
            try_link(&mut r, &a, &c, allowed);
        }
    }
    r
}

/// `(p, q, eta)` with `q` stronger than `p|eta` and living below `eta`.
pub fn amalgamation_instance<R: Rng + ?Sized>(rng: &mut R, max_support: usize) -> (Condition, Condition, Ordinal) {
    let p = random_condition(rng, max_support);
    let support: Vec<&Ordinal> = p.support().collect();
    let eta = match rng.gen_range(0..4) {
        0 => Ordinal::zero(),
        1 | 2 if !support.is_empty() => support[rng.gen_range(0..support.len())].successor(),
        _ => pool_ordinal(rng),
    };
    let q = random_extension(rng, &p.restrict(&eta), Some(&eta), max_support);
    (p, q, eta)
}

const LIMITS: [(u32, u64); 4] = [(1, 1), (1, 2), (1, 3), (2, 1)];

/// A well-formed dense-set spec of the requested kind (`"add"`,
/// `"raise_u"` or `"separate"`), with parameters that often collide with
/// pool ordinals.
pub fn dense_spec<R: Rng + ?Sized>(rng: &mut R, kind: &str) -> DenseSetSpec {
    match kind {
        "add" => DenseSetSpec::add(pool_ordinal(rng)),
        "raise_u" => DenseSetSpec::raise_u(rng.gen_range(0..=8)),
        "separate" => {
            let (e, c) = LIMITS[rng.gen_range(0..LIMITS.len())];
            let lambda = Ordinal::from_terms([(e, c)]).expect("single term");
            let alpha = lambda.add(&Ordinal::from(rng.gen_range(0..=4u64)));
            let gamma = lambda
                .fund_seq(rng.gen_range(0..=6))
                .expect("limit")
                .add(&Ordinal::from(rng.gen_range(0..=2u64)));
            let mut avoid = BTreeSet::new();
            for _ in 0..rng.gen_range(0..=3) {
                let x = pool_ordinal(rng);
                if x < alpha {
                    avoid.insert(x);
                }
            }
            DenseSetSpec::separate(lambda, alpha, gamma, avoid).expect("generated within constraints")
        }
        other => panic!("unknown dense-set kind {other:?}"),
    }
}
