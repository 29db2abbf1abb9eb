//! Branch-switch points: the first value of a branch's orbit that leaves the
//! branch's region.

use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::model::{Bound, IntVal, RelOp, Update};
use crate::AnalysisError;

/// First value of `d, d+v, d+2v, ...` violating `x op_b c1`, for an upper
/// bound `op_b ∈ {<, <=}` and `v > 0`.
pub fn psi_a(d: &IntVal, c1: &IntVal, v: &IntVal, op_b: RelOp) -> Result<IntVal, AnalysisError> {
    if !op_b.bounds_above() || !v.is_positive() {
        return Err(AnalysisError::Precondition("psi_a needs an upper bound and a positive step"));
    }
    if !op_b.holds(d, c1) {
        return Err(AnalysisError::Precondition("psi_a start value outside the region"));
    }
    // largest value inside the region
    let top = if op_b == RelOp::Le { c1.clone() } else { c1 - 1 };
    Ok((&top + v) - (&top - d).mod_floor(v))
}

/// First value of `d, d-s, d-2s, ...` violating `x op_b c1`, for a lower
/// bound `op_b ∈ {>, >=}` and `step > 0`.
pub fn psi_prime_a(d: &IntVal, c1: &IntVal, step: &IntVal, op_b: RelOp) -> Result<IntVal, AnalysisError> {
    if !op_b.bounds_below() || !step.is_positive() {
        return Err(AnalysisError::Precondition("psi_prime_a needs a lower bound and a positive step"));
    }
    if !op_b.holds(d, c1) {
        return Err(AnalysisError::Precondition("psi_prime_a start value outside the region"));
    }
    let bottom = if op_b == RelOp::Ge { c1.clone() } else { c1 + 1 };
    Ok((&bottom - step) + (d - &bottom).mod_floor(step))
}

/// Iterates an exponential update from `d` until `x op_b c1` fails.
pub fn psi_iter(d: &IntVal, c1: &IntVal, upd: &Update, op_b: RelOp) -> Result<IntVal, AnalysisError> {
    if !op_b.holds(d, c1) {
        return Err(AnalysisError::Precondition("psi_iter start value outside the region"));
    }
    if upd.coeff <= IntVal::one() {
        return Err(AnalysisError::Precondition("psi_iter needs a multiplier above 1"));
    }
    let step = upd.step_at(d);
    let escapes = if op_b.bounds_above() { step.is_positive() } else { step.is_negative() };
    if !escapes {
        return Err(AnalysisError::Precondition("update never leaves the region"));
    }
    // the distance to the fixed point at least doubles each step
    let mut x = d.clone();
    while op_b.holds(&x, c1) {
        x = upd.apply(&x);
    }
    Ok(x)
}

/// First value outside `region` reached from `x` under `upd`, dispatching
/// to the closed forms for additive updates.
pub fn escape(x: &IntVal, upd: &Update, region: &Bound) -> Result<IntVal, AnalysisError> {
    if upd.coeff.is_one() && !upd.offset.is_zero() {
        let v = &upd.offset;
        return match (region.op.bounds_above(), v.is_positive()) {
            (true, true) => psi_a(x, &region.bound, v, region.op),
            (false, false) => psi_prime_a(x, &region.bound, &v.abs(), region.op),
            _ => Err(AnalysisError::Precondition("update never leaves the region")),
        };
    }
    psi_iter(x, &region.bound, upd, region.op)
}
