//! Weighted norms on truncated Gevrey-type series, exhaustive checkers
//! for the combinatorial inequalities behind the Newton estimates, the
//! β-functions of the convergence bookkeeping, and an empirical
//! `C₀·τⁿ·n!` growth fit.
//!
//! All norms are finite sums over stored orders; no tail estimate is
//! added. Tails are a diagnostic concern reported separately.

use serde::{Deserialize, Serialize};

use crate::normal_form::StatePoint;
use crate::series::{HSeries, ZSeries};

/// Exact integer factorials stay below u128 overflow up to 33!; the
/// float/exact cross-check in the inequality checkers caps at 18!.
pub const INEQUALITY_ORDER_CAP: u32 = 18;

/// Weights for the Gevrey norms: `t` weights the h-direction, `rho` is
/// the z-disc radius, `s` the scale parameter in (0, 1].
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct NormParams {
    pub t: f64,
    pub rho: f64,
    pub s: f64,
}

impl NormParams {
    pub fn new(t: f64, rho: f64, s: f64) -> crate::Result<Self> {
        if !(t > 0.0) || !(rho > 0.0) || !(s > 0.0 && s <= 1.0) {
            return Err(crate::Error::Validation(format!(
                "norm parameters need t>0, rho>0, 0<s<=1; got t={t}, rho={rho}, s={s}"
            )));
        }
        Ok(NormParams { t, rho, s })
    }
}

pub fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

fn factorial_u128(n: u32) -> u128 {
    (1..=n as u128).product()
}

/// `N₀(p, t) = Σ_k |p_k| t^k / k!` for a scalar (z-independent) series.
pub fn n0_norm(p: &HSeries, t: f64) -> f64 {
    debug_assert!(p.is_z_constant(), "n0_norm expects scalar coefficients");
    let mut acc = 0.0;
    let mut tk = 1.0;
    for (k, c) in p.coeffs().iter().enumerate() {
        acc += c.coeff(0).norm() * tk / factorial(k);
        tk *= t;
    }
    acc
}

/// `‖g‖_ρ = Σ_j |a_j| ρ^j` over the stored orders.
pub fn rho_norm(g: &ZSeries, rho: f64) -> f64 {
    let mut acc = 0.0;
    let mut rj = 1.0;
    for c in g.coeffs() {
        acc += c.norm() * rj;
        rj *= rho;
    }
    acc
}

/// Norm of an element of `V^t(ρ)`: z-coefficients are h-series measured by
/// `N₀(·, t)`, summed with weights `ρ^j`.
pub fn vt_rho_norm(g: &HSeries, t: f64, rho: f64) -> f64 {
    let mut acc = 0.0;
    for (n, zc) in g.coeffs().iter().enumerate() {
        let hw = t.powi(n as i32) / factorial(n);
        let mut rj = 1.0;
        for c in zc.coeffs() {
            acc += c.norm() * hw * rj;
            rj *= rho;
        }
    }
    acc
}

/// Norm on state tuples: `Σ_j N₀(E_j, t) + Σ_{k=0..3} ‖d^k T/dz^k‖` with
/// the T-norms taken at radius `params.rho`.
pub fn xs_norm(x: &StatePoint, params: &NormParams) -> f64 {
    let mut acc = 0.0;
    for e in x.e() {
        acc += n0_norm(e, params.t);
    }
    acc += vt_rho_norm(x.t(), params.t, params.rho);
    for k in 1..=3 {
        acc += vt_rho_norm(&x.t().dz(k), params.t, params.rho);
    }
    acc
}

/// Truncated-series analogue of the Cauchy-free derivative estimate:
/// `‖g^(k)‖_{ρ-ε} ≤ (k!/ε^k)·‖g‖_ρ`.
pub fn derivative_norm_bound_check(g: &ZSeries, rho: f64, eps: f64, k: usize) -> bool {
    assert!(eps > 0.0 && eps < rho);
    let lhs = rho_norm(&g.differentiate(k), rho - eps);
    let rhs = factorial(k) / eps.powi(k as i32) * rho_norm(g, rho);
    lhs <= rhs + 1e-12
}

fn compositions_sum_factorials(j: u32, k: u32) -> (u128, f64) {
    // Enumerate j1+...+jk = j with ji >= 1 and sum j1!...jk!.
    fn go(remaining: u32, parts_left: u32, prod_exact: u128, prod_f: f64, acc: &mut (u128, f64)) {
        if parts_left == 1 {
            acc.0 += prod_exact * factorial_u128(remaining);
            acc.1 += prod_f * factorial(remaining as usize);
            return;
        }
        // leave at least 1 for each remaining part
        for first in 1..=remaining - (parts_left - 1) {
            go(
                remaining - first,
                parts_left - 1,
                prod_exact * factorial_u128(first),
                prod_f * factorial(first as usize),
                acc,
            );
        }
    }
    let mut acc = (0u128, 0.0f64);
    go(j, k, 1, 1.0, &mut acc);
    acc
}

/// `Σ_{j1+...+jk=j, ji>=1} j1!...jk! <= 4^(k-1) (j-k+1)!` by exhaustive
/// enumeration, in exact integers with a floating cross-check.
pub fn check_composition_inequality(j: u32, k: u32) -> bool {
    assert!(k >= 1 && k <= j, "need 1 <= k <= j");
    assert!(j <= INEQUALITY_ORDER_CAP, "enumeration capped at j <= 18");
    let (lhs_exact, lhs_f) = compositions_sum_factorials(j, k);
    let rhs_exact = (4u128).pow(k - 1) * factorial_u128(j - k + 1);
    let rhs_f = 4.0f64.powi(k as i32 - 1) * factorial((j - k + 1) as usize);
    debug_assert!((lhs_f - lhs_exact as f64).abs() <= 1e-6 * lhs_exact as f64 + 1.0);
    debug_assert!((rhs_f - rhs_exact as f64).abs() <= 1e-6 * rhs_exact as f64 + 1.0);
    lhs_exact <= rhs_exact
}

/// `Σ_{j1+j2=j, ji>=0} j1! j2! <= 6 j!` by exhaustive enumeration.
pub fn check_pair_inequality(j: u32) -> bool {
    assert!(j <= INEQUALITY_ORDER_CAP, "enumeration capped at j <= 18");
    let mut lhs = 0u128;
    for j1 in 0..=j {
        lhs += factorial_u128(j1) * factorial_u128(j - j1);
    }
    lhs <= 6 * factorial_u128(j)
}

/// `β(t) = t·e^{4t}`.
pub fn beta(t: f64) -> f64 {
    assert!(t >= 0.0);
    t * (4.0 * t).exp()
}

fn beta_series(t: f64, term: impl Fn(u32) -> f64) -> f64 {
    // Σ_k term(k) * t^(k+1) * 4^k / k!, summed to machine precision.
    let mut acc = 0.0;
    let mut pow = t; // t^(k+1) 4^k / k! at k=0
    for k in 0u32..200 {
        let contrib = term(k) * pow;
        let next = acc + contrib;
        if contrib.abs() <= f64::EPSILON * acc.abs() && k > 4 {
            break;
        }
        acc = next;
        pow *= 4.0 * t / (k as f64 + 1.0);
    }
    acc
}

/// `β₁(t) = Σ_{k≥0} (k+1) 4^k t^(k+1) / k!`.
pub fn beta1(t: f64) -> f64 {
    assert!(t >= 0.0);
    beta_series(t, |k| (k + 1) as f64)
}

/// `β₂(t) = Σ_{k≥1} 4^k t^(k+1) / k!`.
pub fn beta2(t: f64) -> f64 {
    assert!(t >= 0.0);
    beta_series(t, |k| if k == 0 { 0.0 } else { 1.0 })
}

/// A fitted factorial-growth bound `sample_n ≤ C₀ τⁿ n!`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct GevreyFit {
    pub c0: f64,
    pub tau: f64,
    pub max_order_used: usize,
    /// Max log-domain deviation of the raw least-squares line from the data.
    pub residual: f64,
}

/// Least-squares fit of `log(sample_n / n!) ≈ log C₀ + n log τ`, with C₀
/// then inflated so the bound dominates every sample. Zero samples are
/// dropped from the fit (they are dominated trivially).
pub fn fit_gevrey(samples: &[f64]) -> GevreyFit {
    assert!(samples.len() >= 3, "need at least 3 samples");
    let pts: Vec<(f64, f64)> = samples
        .iter()
        .enumerate()
        .filter(|(_, &s)| s > 0.0)
        .map(|(n, &s)| (n as f64, (s / factorial(n)).ln()))
        .collect();
    let max_order_used = samples.len() - 1;
    if pts.is_empty() {
        return GevreyFit {
            c0: 0.0,
            tau: 1.0,
            max_order_used,
            residual: 0.0,
        };
    }
    let (log_c0, log_tau) = if pts.len() == 1 {
        (pts[0].1, 0.0)
    } else {
        let n = pts.len() as f64;
        let sx: f64 = pts.iter().map(|p| p.0).sum();
        let sy: f64 = pts.iter().map(|p| p.1).sum();
        let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
        let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
        let denom = n * sxx - sx * sx;
        if denom.abs() < 1e-300 {
            (sy / n, 0.0)
        } else {
            let slope = (n * sxy - sx * sy) / denom;
            ((sy - slope * sx) / n, slope)
        }
    };
    let residual = pts
        .iter()
        .map(|&(x, y)| (y - (log_c0 + log_tau * x)).abs())
        .fold(0.0, f64::max);
    let tau = log_tau.exp();
    // Inflate C0 until the bound dominates all samples.
    let mut c0 = log_c0.exp();
    for (n, &s) in samples.iter().enumerate() {
        if s > 0.0 {
            let need = s / (tau.powi(n as i32) * factorial(n));
            c0 = c0.max(need);
        }
    }
    GevreyFit {
        c0,
        tau,
        max_order_used,
        residual,
    }
}
