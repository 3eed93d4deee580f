//! Property checks shared by `selftest` and the `oracle` command.

use std::collections::BTreeMap;

use logtrace_core::fan::{is_snc, model_resolve, model_stellar_subdivide, DecoratedModel, FanPoint};
use logtrace_core::invariants::{trace_report, zeta, zeta_trace_crosscheck};
use logtrace_core::monoid::{cover_degree_bound, lemma33_oracle, pushout_root};
use logtrace_core::Error;
use rand::Rng;

use crate::gen::{random_center, PushoutInstance};
use crate::report::{points, AnalysisError};

/// Trace horizon used when comparing models.
pub const COMPARE_HORIZON: u64 = 12;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Invariants {
    pub volume: i64,
    pub traces: BTreeMap<u64, i64>,
    pub zeta: BTreeMap<u64, i64>,
    pub error_term: i64,
}

pub fn invariants(model: &DecoratedModel) -> Result<(Vec<FanPoint>, Invariants), String> {
    try_invariants(model).map_err(|e| e.details())
}

fn try_invariants(model: &DecoratedModel) -> Result<(Vec<FanPoint>, Invariants), AnalysisError> {
    let pts = points(model)?;
    let r = trace_report(&pts, model.residue_char, COMPARE_HORIZON)?;
    let inv = Invariants {
        volume: r.volume,
        traces: r.traces,
        zeta: zeta(&pts).factors,
        error_term: r.error_term,
    };
    Ok((pts, inv))
}

fn out_of_bounds(e: &AnalysisError) -> bool {
    matches!(e, AnalysisError::Core(Error::BoundExceeded { .. }))
}

/// Applies up to `steps` random stellar subdivisions and compares invariants
/// after each; returns the number applied. A center whose subdivision leaves
/// the enumeration bounds is not legal and gets redrawn.
pub fn subdivision_invariance(model: &DecoratedModel, rng: &mut impl Rng, steps: usize) -> Result<usize, String> {
    let (_, before) = invariants(model)?;
    let mut m = model.clone();
    let mut applied = 0;
    for _ in 0..4 * steps {
        if applied == steps {
            break;
        }
        let Some((face, v)) = random_center(rng, &m) else { continue };
        let next = match model_stellar_subdivide(&m, &face, &v) {
            Ok(next) => next,
            Err(Error::BoundExceeded { .. }) => continue,
            Err(e) => return Err(format!("subdividing at {v:?}: {e}")),
        };
        let after = match try_invariants(&next) {
            Ok((_, after)) => after,
            Err(e) if out_of_bounds(&e) => continue,
            Err(e) => return Err(e.details()),
        };
        if after != before {
            return Err(format!("invariants changed at center {v:?}: {before:?} -> {after:?}"));
        }
        m = next;
        applied += 1;
    }
    Ok(applied)
}

/// Resolves, then checks the output is SNC with the same invariants.
pub fn resolution_invariance(model: &DecoratedModel) -> Result<DecoratedModel, String> {
    let (_, before) = invariants(model)?;
    let (resolved, _) = model_resolve(model).map_err(|e| e.to_string())?;
    let (pts, after) = invariants(&resolved)?;
    if !is_snc(&pts).snc {
        return Err("resolution is not SNC".into());
    }
    if after != before {
        return Err(format!("resolution changed invariants: {before:?} -> {after:?}"));
    }
    Ok(resolved)
}

pub fn crosscheck(points: &[FanPoint], order: usize) -> Result<(), String> {
    match zeta_trace_crosscheck(points, order) {
        Ok(true) => Ok(()),
        Ok(false) => Err("zeta and traces disagree".into()),
        Err(e) => Err(e.to_string()),
    }
}

/// The cover degree bound at `x` divides `d` and every `s` of a height-one
/// generization, for each `d <= max_d` prime to `p`.
pub fn cover_bounds(points: &[FanPoint], p: u64, max_d: u64) -> Result<(), String> {
    for x in points {
        let g = x.ray_multiplicities.iter().fold(0u64, |g, &s| gcd(g, s));
        for d in (1..=max_d).filter(|&d| p == 0 || gcd(d, p) == 1) {
            let b = cover_degree_bound(&x.stalk, &x.e_x, d, p).map_err(|e| format!("{}: {e}", x.id))?;
            if d % b != 0 || g % b != 0 {
                return Err(format!("{}: bound {b} for d = {d} does not divide d and gcd(s) = {g}", x.id));
            }
        }
    }
    Ok(())
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// `3 ×` the largest generator degree of the pushout.
pub fn oracle_degree_bound(instance: &PushoutInstance) -> Result<i64, String> {
    let q = pushout_root(&instance.monoid, &instance.e, instance.d).map_err(|e| e.to_string())?;
    let mut top = 0;
    for g in q.generators() {
        top = top.max(q.degree(g).map_err(|e| e.to_string())?);
    }
    Ok(3 * top)
}

pub fn oracle_case(instance: &PushoutInstance) -> Result<bool, String> {
    let b = oracle_degree_bound(instance)?;
    lemma33_oracle(&instance.monoid, &instance.e, instance.d, b).map_err(|e| e.to_string())
}
