//! Weighted-norm membership by quadrature.
//!
//! The model question: does `r^lambda` near the edge belong to the weighted
//! space with edge weight `r^(s*(delta - l + |alpha|))`?  The integrand of the
//! worst derivative order is `r^(s*(delta - l + Re lambda)) * r dr`, so
//! membership is decided by the decade-to-decade growth of the integral as
//! the inner cutoff shrinks: a convergent tail has geometrically shrinking
//! decade contributions, a divergent one grows geometrically.  The decision
//! never consults the analytic threshold; the threshold shows up only in the
//! test oracles.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MembershipCase {
    /// Sobolev order of the space.
    pub l: u32,
    /// Integrability exponent, `s > 1`.
    pub s: f64,
    /// Edge weight exponent.
    pub delta: f64,
    /// Real part of the model singular exponent.
    pub lambda_re: f64,
    /// Derivative order probed, `0 <= alpha_order <= l`.
    pub alpha_order: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Membership {
    Member,
    NonMember,
    /// The exponent is within the decision margin of the threshold.
    Inconclusive,
}

#[derive(Debug, Error)]
pub enum QuadratureError {
    #[error("membership case requires s > 1, got {0}")]
    BadS(f64),
    #[error("derivative order {alpha} exceeds the space order {l}")]
    BadOrder { alpha: u32, l: u32 },
    #[error("exponent out of the supported range: {0}")]
    ExponentRange(f64),
}

/// 16-point Gauss-Legendre rule on [-1, 1], nodes by Newton on the Legendre
/// recurrence.
fn gauss_legendre_16() -> ([f64; 16], [f64; 16]) {
    const N: usize = 16;
    let mut x = [0.0; N];
    let mut w = [0.0; N];
    for i in 0..N {
        // Chebyshev-like initial guess.
        let mut t = (std::f64::consts::PI * (i as f64 + 0.75) / (N as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0_f64, t);
            for k in 2..=N {
                let p2 = ((2 * k - 1) as f64 * t * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let dp = N as f64 * (t * p1 - p0) / (t * t - 1.0);
            let step = p1 / dp;
            t -= step;
            if step.abs() < 1e-15 {
                let (mut q0, mut q1) = (1.0_f64, t);
                for k in 2..=N {
                    let q2 = ((2 * k - 1) as f64 * t * q1 - (k - 1) as f64 * q0) / k as f64;
                    q0 = q1;
                    q1 = q2;
                }
                let dq = N as f64 * (t * q1 - q0) / (t * t - 1.0);
                x[i] = t;
                w[i] = 2.0 / ((1.0 - t * t) * dq * dq);
                break;
            }
        }
    }
    (x, w)
}

/// Integral of `f` over `[a, b]` with the fixed 16-point rule.
fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let (x, w) = gauss_legendre_16();
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    x.iter()
        .zip(w.iter())
        .map(|(&xi, &wi)| wi * f(mid + half * xi))
        .sum::<f64>()
        * half
}

/// Classifies convergence of `int_0^1 r^exponent dr` from the growth pattern
/// of the per-decade contributions, with a guard band `0.025` in the decade
/// log-ratio.  Convergent iff `exponent > -1`.
fn classify_decades(exponent: f64) -> Membership {
    // Contributions over [10^-k, 10^-(k-1)].
    let decade = |k: u32| -> f64 {
        integrate(|r| r.powf(exponent), 10f64.powi(-(k as i32)), 10f64.powi(1 - k as i32))
    };
    let mut ratios = Vec::new();
    let mut prev = decade(1);
    for k in 2..=10 {
        let cur = decade(k);
        if prev > 0.0 {
            ratios.push(cur / prev);
        }
        prev = cur;
    }
    let tail: Vec<f64> = ratios.iter().rev().take(4).copied().collect();
    let avg = tail.iter().sum::<f64>() / tail.len() as f64;
    let up = 10f64.powf(0.025);
    let down = 10f64.powf(-0.025);
    if avg <= down {
        Membership::Member
    } else if avg >= up {
        Membership::NonMember
    } else {
        Membership::Inconclusive
    }
}

/// Decides whether the model function `r^lambda` lies in the weighted space,
/// by quadrature with a shrinking inner cutoff.  Cases within `0.05` of the
/// threshold in the exponent are reported inconclusive.
pub fn membership_quadrature(case: &MembershipCase) -> Result<Membership, QuadratureError> {
    if case.s <= 1.0 {
        return Err(QuadratureError::BadS(case.s));
    }
    if case.alpha_order > case.l {
        return Err(QuadratureError::BadOrder {
            alpha: case.alpha_order,
            l: case.l,
        });
    }
    let threshold = case.l as f64 - case.delta - 2.0 / case.s;
    if (case.lambda_re - threshold).abs() <= 0.05 {
        return Ok(Membership::Inconclusive);
    }
    // Weight exponent at the probed derivative order plus the derivative's
    // own power loss; the alpha contributions cancel.
    let a = case.alpha_order as f64;
    let q = case.s * (case.delta - case.l as f64 + a) + case.s * (case.lambda_re - a);
    let exponent = q + 1.0; // polar area element contributes one power
    if !exponent.is_finite() || exponent.abs() > 60.0 {
        return Err(QuadratureError::ExponentRange(exponent));
    }
    Ok(classify_decades(exponent))
}

/// Near-edge profile of the divergence datum `g`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeProfile {
    Zero,
    /// `g ~ r^gamma` near the edge.
    Power { gamma: f64 },
}

/// Checks the weighted integrability condition on `g` for the model wedge
/// sector: the weight contributes `r^-1` and the area element `r`, so the
/// integrand is `r^(2*gamma)` and the quadrature classifies its tail.
pub fn condg_check(profile: EdgeProfile) -> Result<bool, QuadratureError> {
    match profile {
        EdgeProfile::Zero => Ok(true),
        EdgeProfile::Power { gamma } => {
            let exponent = 2.0 * gamma;
            if !exponent.is_finite() || exponent.abs() > 60.0 {
                return Err(QuadratureError::ExponentRange(exponent));
            }
            match classify_decades(exponent) {
                Membership::Member => Ok(true),
                Membership::NonMember => Ok(false),
                // Within the guard band of 2*gamma + 1 = 0; report the
                // boundary case as failing the (strict) integrability.
                Membership::Inconclusive => Ok(false),
            }
        }
    }
}
