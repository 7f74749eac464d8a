//! The three dense-set families and their meet procedures.
//!
//! * `AddOrdinal(a)`: conditions whose support contains `a`.
//! * `RaiseU(n)`: conditions with bound at least `n`.
//! * `Separate(lambda, alpha, gamma, avoid)`: conditions holding some `beta`
//!   with `gamma <= beta < lambda`, `b(alpha, beta) = 1`, and
//!   `b(x, beta) = 0` for every `x` in `avoid`.
//!
//! Meeting a dense set returns a stronger condition inside it. Every ordinal
//! a meet adds gets a colour equal to the bound just before the addition,
//! which is what keeps traces `B[a] n A_n` inside an audited snapshot.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kernel::{amalgamate, Condition, KernelError};
use crate::ordinal::Ordinal;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum DenseSetSpec {
    #[serde(rename = "add")]
    AddOrdinal {
        #[serde(rename = "a")]
        alpha: Ordinal,
    },
    #[serde(rename = "raise_u")]
    RaiseU { n: u64 },
    #[serde(rename = "separate")]
    Separate {
        lambda: Ordinal,
        alpha: Ordinal,
        gamma: Ordinal,
        avoid: BTreeSet<Ordinal>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DenseError {
    #[error("malformed separation: {0}")]
    Malformed(String),
    /// Amalgamation refused a condition the construction built. Never
    /// expected; surfaced rather than panicking so callers can report it.
    #[error("defect in separation meet: {0}")]
    Defect(#[from] KernelError),
}

/// Result of [`meet`]: the stronger condition and, for separations, the
/// chosen `beta`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MeetResult {
    pub result: Condition,
    pub witness: Option<Ordinal>,
}

impl DenseSetSpec {
    pub fn add(alpha: Ordinal) -> Self {
        DenseSetSpec::AddOrdinal { alpha }
    }

    pub fn raise_u(n: u64) -> Self {
        DenseSetSpec::RaiseU { n }
    }

    /// A checked separation spec.
    pub fn separate(
        lambda: Ordinal,
        alpha: Ordinal,
        gamma: Ordinal,
        avoid: BTreeSet<Ordinal>,
    ) -> Result<Self, DenseError> {
        let spec = DenseSetSpec::Separate {
            lambda,
            alpha,
            gamma,
            avoid,
        };
        spec.check()?;
        Ok(spec)
    }

    /// Parameter constraints: `lambda` limit, `alpha >= lambda`,
    /// `gamma < lambda`, every avoided ordinal below `alpha`.
    pub fn check(&self) -> Result<(), DenseError> {
        let DenseSetSpec::Separate {
            lambda,
            alpha,
            gamma,
            avoid,
        } = self
        else {
            return Ok(());
        };
        if !lambda.is_limit() {
            return Err(DenseError::Malformed(format!("lambda = {lambda} is not a limit")));
        }
        if alpha < lambda {
            return Err(DenseError::Malformed(format!(
                "alpha = {alpha} is below lambda = {lambda}"
            )));
        }
        if gamma >= lambda {
            return Err(DenseError::Malformed(format!(
                "gamma = {gamma} is not below lambda = {lambda}"
            )));
        }
        if let Some(x) = avoid.iter().find(|x| *x >= alpha) {
            return Err(DenseError::Malformed(format!(
                "avoided {x} is not below alpha = {alpha}"
            )));
        }
        Ok(())
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            DenseSetSpec::AddOrdinal { .. } => "add",
            DenseSetSpec::RaiseU { .. } => "raise_u",
            DenseSetSpec::Separate { .. } => "separate",
        }
    }
}

/// The `beta` that makes `p` a member of a separation set, if any. Picks
/// the least one.
pub fn separation_witness(spec: &DenseSetSpec, p: &Condition) -> Option<Ordinal> {
    let DenseSetSpec::Separate {
        lambda,
        alpha,
        gamma,
        avoid,
    } = spec
    else {
        return None;
    };
    if !p.contains(alpha) || !avoid.iter().all(|x| p.contains(x)) {
        return None;
    }
    p.related(alpha)
        .filter(|b| *b >= gamma && *b < lambda)
        .find(|b| avoid.iter().all(|x| !p.rel(x, b)))
        .cloned()
}

pub fn member(spec: &DenseSetSpec, p: &Condition) -> bool {
    match spec {
        DenseSetSpec::AddOrdinal { alpha } => p.contains(alpha),
        DenseSetSpec::RaiseU { n } => p.bound() >= *n,
        DenseSetSpec::Separate { .. } => separation_witness(spec, p).is_some(),
    }
}

fn add_ordinal(p: &Condition, alpha: &Ordinal) -> Condition {
    if p.contains(alpha) {
        return p.clone();
    }
    let mut r = p.clone();
    r.insert(alpha.clone(), p.bound());
    r.set_bound(p.bound() + 1);
    r
}

pub fn meet(spec: &DenseSetSpec, p: &Condition) -> Result<MeetResult, DenseError> {
    match spec {
        DenseSetSpec::AddOrdinal { alpha } => Ok(MeetResult {
            result: add_ordinal(p, alpha),
            witness: None,
        }),
        DenseSetSpec::RaiseU { n } => {
            let mut r = p.clone();
            r.set_bound(p.bound().max(*n));
            Ok(MeetResult {
                result: r,
                witness: None,
            })
        }
        DenseSetSpec::Separate {
            lambda,
            alpha,
            gamma,
            avoid,
        } => {
            spec.check()?;
            let mut cur = add_ordinal(p, alpha);
            for x in avoid {
                cur = add_ordinal(&cur, x);
            }

            let mut beta = gamma.clone();
            while cur.contains(&beta) {
                beta = beta.successor();
            }
            debug_assert!(&beta < lambda);

            let eta = alpha.successor();
            let mut q = cur.restrict(&eta);
            assert!(
                q.support().all(|x| x == alpha || !q.rel(x, alpha)),
                "only alpha may relate to alpha below alpha+1"
            );
            q.insert(beta.clone(), cur.bound());
            q.set_bound(cur.bound() + 1);
            q.link(alpha, &beta)?;

            let result = amalgamate(&cur, &q, &eta)?;
            Ok(MeetResult {
                result,
                witness: Some(beta),
            })
        }
    }
}
