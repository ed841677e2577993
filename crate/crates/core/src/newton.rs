//! The two solver pipelines for `F(T, E₀, ..., E_{M-2}) = 0`:
//! order-by-order recursion, and the Newton method of tangents with the
//! guaranteed-order schedule `b_{j+1} = 2 b_j - 7`, `b₀ >= 8`.
//!
//! Both exploit the same structure: the h⁰ part of the linearization is
//! the dominant operator `Σ_j z^j 𝓔_j - (z^M/2) 𝓣' - (M/4) z^(M-1) 𝓣`,
//! inverted exactly per h-order by one dominant solve; the remaining
//! blocks of the derivative carry prefactors h¹ (regular) and h²
//! (singular), so the full linearization is block-triangular in h and
//! its truncated inverse — the composition of the dominant inverse with
//! the two truncated Neumann series for the perturbed blocks — is
//! computed by forward substitution over h-orders, which evaluates those
//! Neumann series without re-walking their nested terms.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dominant::solve_dominant;
use crate::normal_form::{eval_f, FrechetTable, StatePoint, TangentVector};
use crate::norms::{n0_norm, vt_rho_norm, NormParams};
use crate::series::{HSeries, ZSeries};
use crate::{Error, Result};

/// Radius used for the bound diagnostics of the per-order dominant solves.
const SOLVE_REPORT_RADIUS: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverMode {
    Recursion,
    Newton,
}

/// Newton configuration. `b0 >= 8` keeps the schedule `b_{j+1} = 2b_j - 7`
/// above `3 + j` at every step.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct NewtonConfig {
    pub b0: usize,
    pub max_iters: usize,
    pub nh: usize,
    pub nz: usize,
    /// Per-h-order relative residual tolerance for the trace.
    pub tol: f64,
    pub mode: SolverMode,
}

impl NewtonConfig {
    pub fn validate(&self) -> Result<()> {
        if self.b0 < 8 {
            return Err(Error::Validation(format!(
                "b0 must be >= 8 to keep the order schedule valid, got {}",
                self.b0
            )));
        }
        if self.mode == SolverMode::Newton && self.nh < self.b0 {
            return Err(Error::Validation(format!(
                "newton mode needs Nh >= b0, got Nh={} < b0={}",
                self.nh, self.b0
            )));
        }
        if !(self.tol > 0.0) {
            return Err(Error::Validation("tol must be positive".into()));
        }
        Ok(())
    }
}

/// The `b_j` values visited for a given target order: the schedule stops
/// with the first entry at or above `nh`.
pub fn order_schedule(b0: usize, nh: usize) -> Vec<usize> {
    let mut out = vec![b0];
    while *out.last().unwrap() < nh {
        let next = 2 * out.last().unwrap() - 7;
        out.push(next);
    }
    out
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TraceStep {
    pub iter: usize,
    pub b_j: usize,
    /// First h-order whose scaled residual exceeds tolerance (`Nh+1` if none).
    pub residual_order: usize,
    pub residual_max_per_order: Vec<f64>,
    /// Weighted norm of the correction applied at this step (0 for the last).
    pub correction_norm: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NewtonTrace {
    pub steps: Vec<TraceStep>,
    pub converged: bool,
    pub b_final: usize,
}

/// Solve order by order: the h^n coefficient of `F` is linear in the
/// order-n unknowns through the dominant operator, so evaluating `F` with
/// those unknowns zeroed yields the forcing for one dominant solve.
pub fn solve_recursive(q1_tilde: &HSeries, m: usize, nh: usize) -> Result<StatePoint> {
    if q1_tilde.h_order() < nh {
        return Err(Error::Validation(format!(
            "perturbation truncated at h-order {} < requested {nh}",
            q1_tilde.h_order()
        )));
    }
    let q1t = q1_tilde.truncated_h(nh)?;
    let mut state = StatePoint::zero(m, nh, q1t.z_order());
    for n in 0..=nh {
        let f = eval_f(&state, &q1t)?;
        let v = f.coeff(n);
        let sol = solve_dominant(v, m, SOLVE_REPORT_RADIUS);
        state = set_order(&state, n, &sol.u, &sol.e)?;
    }
    Ok(state)
}

/// Rebuild a state with the order-n unknowns replaced; T is re-aligned to
/// the new coefficient's z-order.
fn set_order(
    state: &StatePoint,
    n: usize,
    u: &ZSeries,
    e: &[Complex64],
) -> Result<StatePoint> {
    let w = state.t().z_order().min(u.trunc_order());
    let mut t_coeffs = Vec::with_capacity(state.h_order() + 1);
    for (i, c) in state.t().coeffs().iter().enumerate() {
        if i == n {
            t_coeffs.push(u.truncated(w)?);
        } else {
            t_coeffs.push(c.truncated(w)?);
        }
    }
    let t = HSeries::new(t_coeffs)?;
    let new_e = state
        .e()
        .iter()
        .enumerate()
        .map(|(j, ej)| {
            let mut v: Vec<Complex64> = ej.coeffs().iter().map(|c| c.coeff(0)).collect();
            v[n] = e[j];
            HSeries::from_scalars(&v)
        })
        .collect();
    StatePoint::new(new_e, t, state.m())
}

/// The recursion output truncated to an h-polynomial of degree `b0`,
/// re-embedded at the full order of `q1_tilde` (the padding zeros are the
/// polynomial's exact higher coefficients).
pub fn build_initial_guess(q1_tilde: &HSeries, m: usize, b0: usize) -> Result<StatePoint> {
    if b0 > q1_tilde.h_order() {
        return Err(Error::Validation(format!(
            "b0={b0} exceeds available h-order {}",
            q1_tilde.h_order()
        )));
    }
    let low = solve_recursive(&q1_tilde.truncated_h(b0)?, m, b0)?;
    low.embed_h(q1_tilde.h_order())
}

fn sub_aligned(a: &ZSeries, b: &ZSeries) -> ZSeries {
    let w = a.trunc_order().min(b.trunc_order());
    a.truncated(w)
        .unwrap()
        .sub(&b.truncated(w).unwrap())
        .unwrap()
}

/// Solve `eval_df(x, v) = rhs` for the tangent `v`, exactly at the h
/// truncation. The dominant block is inverted per h-order; the regular
/// (h¹) and singular (h²) blocks only feed strictly higher orders, so
/// the triangular sweep reproduces the truncated Neumann inverses of
/// both perturbations in one pass.
pub fn invert_dominant_block(rhs: &HSeries, x: &StatePoint) -> Result<TangentVector> {
    let m = x.m();
    let nh = x.h_order();
    if rhs.h_order() != nh {
        return Err(Error::Validation(format!(
            "h-orders disagree: rhs at {}, state at {nh}",
            rhs.h_order()
        )));
    }
    let tab = FrechetTable::at(x)?;
    let w0 = rhs.z_order().min(tab.order);

    // Per-order right-hand sides, individually truncated as lower-order
    // corrections (which lose z-orders to derivatives and solves) land.
    let mut acc: Vec<ZSeries> = rhs
        .coeffs()
        .iter()
        .map(|c| c.truncated(w0))
        .collect::<std::result::Result<_, _>>()?;
    let mut t_parts: Vec<ZSeries> = Vec::with_capacity(nh + 1);
    let mut e_parts: Vec<Vec<Complex64>> = vec![Vec::with_capacity(nh + 1); m - 1];

    for n in 0..=nh {
        let r = acc[n].clone();
        // Dominant block Σ_j z^j 𝓔_j - D[𝓣] = r: one dominant solve on -r
        // returns 𝓣 directly and its E output is exactly 𝓔_j = r_j.
        let sol = solve_dominant(&r.neg(), m, SOLVE_REPORT_RADIUS);
        for (j, e) in sol.e.iter().enumerate() {
            e_parts[j].push(*e);
        }
        let u = sol.u;

        // Propagate this order's unknowns into the higher-order right-hand
        // sides through the regular (h¹) and singular (h²) streams.
        let streams: [(usize, &HSeries, ZSeries); 3] = [
            (1, &tab.tp_factor, u.differentiate(1)),
            (2, &tab.sing_tpp, u.differentiate(2)),
            (2, &tab.sing_tppp, u.differentiate(3)),
        ];
        if !u.is_zero() {
            for (p, factor, du) in streams.iter() {
                propagate(&mut acc, n + p, factor, du);
            }
            propagate(&mut acc, n + 1, &tab.t_factor, &u);
            propagate(&mut acc, n + 2, &tab.sing_tp, &u.differentiate(1));
        }
        let order_e: Vec<Complex64> = e_parts.iter().map(|col| col[n]).collect();
        for (j, e) in order_e.into_iter().enumerate() {
            if e.norm() != 0.0 {
                propagate_scalar(&mut acc, n + 1, &tab.e_factors[j], e);
            }
        }
        t_parts.push(u);
    }

    let wt = t_parts.iter().map(|t| t.trunc_order()).min().unwrap();
    let dt = HSeries::new(
        t_parts
            .iter()
            .map(|t| t.truncated(wt))
            .collect::<std::result::Result<_, _>>()?,
    )?;
    let de = e_parts
        .into_iter()
        .map(|col| HSeries::from_scalars(&col))
        .collect();
    Ok(TangentVector::new(de, dt))
}

/// `acc[base + i] -= factor_i · w` for every stored factor order i.
fn propagate(acc: &mut [ZSeries], base: usize, factor: &HSeries, w: &ZSeries) {
    if w.is_zero() {
        return;
    }
    for i in 0..=factor.h_order() {
        let target = base + i;
        if target >= acc.len() {
            break;
        }
        let fc = factor.coeff(i);
        if fc.is_zero() {
            continue;
        }
        let ord = fc.trunc_order().min(w.trunc_order());
        let prod = fc
            .truncated(ord)
            .unwrap()
            .mul(&w.truncated(ord).unwrap())
            .unwrap();
        acc[target] = sub_aligned(&acc[target], &prod);
    }
}

fn propagate_scalar(acc: &mut [ZSeries], base: usize, factor: &HSeries, e: Complex64) {
    for i in 0..=factor.h_order() {
        let target = base + i;
        if target >= acc.len() {
            break;
        }
        let fc = factor.coeff(i);
        if fc.is_zero() {
            continue;
        }
        acc[target] = sub_aligned(&acc[target], &fc.scale(e));
    }
}

/// Round-off floor for per-h-order residual screening: the largest
/// coefficient products that can cancel at each order, amplified by the
/// derivative factors of the evaluation.
fn per_order_scales(x: &StatePoint, q1t: &HSeries) -> Vec<f64> {
    let nh = x.h_order();
    let mut mag = x.max_abs_by_order();
    for (n, v) in q1t.max_abs_by_order().into_iter().enumerate() {
        mag[n] = mag[n].max(v).max(1.0);
    }
    let damp = (x.t().z_order() as f64 + 1.0).powi(3);
    let mut scales = vec![0.0; nh + 1];
    for n in 0..=nh {
        let mut s: f64 = 0.0;
        for i in 0..=n {
            s = s.max(mag[i] * mag[n - i]);
        }
        if n >= 2 {
            s = s.max(mag[n - 2] * damp);
        }
        scales[n] = s.max(mag[n] * damp.cbrt());
    }
    scales
}

/// First h-order whose residual exceeds `tol` relative to the evaluation's
/// per-order round-off floor; `Nh+1` if none.
pub fn scaled_residual_order(f: &HSeries, x: &StatePoint, q1t: &HSeries, tol: f64) -> usize {
    let scales = per_order_scales(x, q1t);
    f.max_abs_by_order()
        .iter()
        .zip(&scales)
        .position(|(&r, &s)| r > tol * s)
        .unwrap_or(f.h_order() + 1)
}

/// Newton's method of tangents on the truncated series: evaluate the
/// residual, solve the linearization for the correction, add, repeat.
/// Each iterate's residual order must reach `b_j + 1`; the schedule
/// doubles per step, so the final iterate clears the full truncation.
pub fn newton_iterate(
    q1_tilde: &HSeries,
    m: usize,
    config: &NewtonConfig,
    params: &NormParams,
) -> Result<(StatePoint, NewtonTrace)> {
    config.validate()?;
    let nh = config.nh;
    if q1_tilde.h_order() < nh {
        return Err(Error::Validation(format!(
            "perturbation truncated at h-order {} < requested {nh}",
            q1_tilde.h_order()
        )));
    }
    let q1t = q1_tilde.truncated_h(nh)?;
    // The full guarantee schedule is walked even when the exact truncated
    // solves converge faster than 2b-7; converged iterates record the
    // clean residual and apply no further correction.
    let schedule = order_schedule(config.b0, nh);
    if schedule.len() > config.max_iters + 1 {
        return Err(Error::Validation(format!(
            "schedule needs {} iterates but max_iters={}",
            schedule.len(),
            config.max_iters
        )));
    }

    let mut x = build_initial_guess(&q1t, m, config.b0)?;
    let mut steps: Vec<TraceStep> = Vec::new();
    let mut correction_norm = 0.0;
    for (j, &b_j) in schedule.iter().enumerate() {
        let f = eval_f(&x, &q1t)?;
        let ro = scaled_residual_order(&f, &x, &q1t, config.tol);
        steps.push(TraceStep {
            iter: j,
            b_j,
            residual_order: ro,
            residual_max_per_order: f.max_abs_by_order(),
            correction_norm,
        });
        if ro < b_j + 1 {
            return Err(Error::NonConvergence {
                iter: j,
                required: b_j + 1,
                achieved: ro,
            });
        }
        correction_norm = 0.0;
        if ro <= nh && j + 1 < schedule.len() {
            let w = invert_dominant_block(&f.neg(), &x)?;
            correction_norm = tangent_norm(&w, params);
            x = x.add(&w)?;
        }
    }
    let converged = steps.last().map_or(false, |s| s.residual_order >= nh + 1);
    let b_final = *schedule.last().unwrap();
    if !converged {
        return Err(Error::NonConvergence {
            iter: schedule.len() - 1,
            required: nh + 1,
            achieved: steps.last().unwrap().residual_order,
        });
    }
    Ok((
        x,
        NewtonTrace {
            steps,
            converged,
            b_final,
        },
    ))
}

fn tangent_norm(v: &TangentVector, params: &NormParams) -> f64 {
    let mut acc = 0.0;
    for de in v.de() {
        acc += n0_norm(de, params.t);
    }
    acc + vt_rho_norm(v.dt(), params.t, params.rho)
}

/// z-order headroom consumed by the pipelines: each recursion step loses
/// M-1 orders to the dominant solve and 3 to the evaluation; each Newton
/// sweep additionally walks the triangular inverse, losing at most M
/// orders per h-order above the guaranteed residual order.
pub fn recursion_z_budget(nz_out: usize, nh: usize, m: usize) -> usize {
    nz_out + (m + 2) * (nh + 1) + m + 8
}

pub fn newton_z_budget(nz_out: usize, nh: usize, m: usize, b0: usize) -> usize {
    let mut loss = (m + 2) * (b0 + 2) + m + 8;
    for b_j in order_schedule(b0, nh) {
        loss += m * nh.saturating_sub(b_j + 1) + m + 6;
    }
    nz_out + loss
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::liouville::{PotentialSpec, Transform};
    use crate::normal_form::{eval_df, residual_order};
    use num_complex::Complex64;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn zero_forcing_gives_zero_solution() {
        for m in 1..=3 {
            let q1t = HSeries::zero(6, recursion_z_budget(2, 6, m));
            let state = solve_recursive(&q1t, m, 6).unwrap();
            assert!(state.t().max_abs() == 0.0);
            for e in state.e() {
                assert!(e.max_abs() == 0.0);
            }
        }
    }

    #[test]
    fn constant_forcing_m2() {
        // Q̃₁ = 1: E₀ = 1 at h^0, T = 0, and nothing propagates upward.
        let q1t = HSeries::promote(&ZSeries::one(24), 4);
        let state = solve_recursive(&q1t, 2, 4).unwrap();
        assert!((state.e()[0].coeff(0).coeff(0) - c(1.0)).norm() < 1e-14);
        for n in 1..=4 {
            assert!(state.e()[0].coeff(n).coeff(0).norm() < 1e-14);
        }
        assert!(state.t().max_abs() < 1e-14);
        let f = eval_f(&state, &q1t).unwrap();
        assert_eq!(residual_order(&f, 1e-12), 5);
    }

    #[test]
    fn linear_forcing_m1() {
        // Q̃₁ = z: the h^0 equation is (z/2)T₀' + T₀/4 = -z, so
        // T₀ = -(4/3) z; the residual must clear the truncation.
        let q1t = HSeries::promote(&ZSeries::monomial(c(1.0), 1, 24), 4);
        let state = solve_recursive(&q1t, 1, 4).unwrap();
        assert!((state.t().coeff(0).coeff(1) - c(-4.0 / 3.0)).norm() < 1e-13);
        let f = eval_f(&state, &q1t).unwrap();
        assert_eq!(residual_order(&f, 1e-10), 5);
    }

    /// A synthetic factorially growing perturbation in z and h.
    fn gevrey_forcing(nh: usize, nz: usize, tau: f64) -> HSeries {
        let coeffs = (0..=nh)
            .map(|n| {
                let mag = crate::norms::factorial(n) * tau.powi(n as i32);
                ZSeries::new(
                    (0..=nz)
                        .map(|k| c(mag * 0.5f64.powi(k as i32) * ((n + 2 * k + 1) as f64).sin()))
                        .collect(),
                )
            })
            .collect();
        HSeries::new(coeffs).unwrap()
    }

    #[test]
    fn recursion_clears_truncation_on_gevrey_input() {
        for m in 1..=3usize {
            let nh = 8;
            let q1t = gevrey_forcing(nh, recursion_z_budget(4, nh, m), 0.3);
            let state = solve_recursive(&q1t, m, nh).unwrap();
            let f = eval_f(&state, &q1t).unwrap();
            let ro = scaled_residual_order(&f, &state, &q1t, 1e-9);
            assert_eq!(ro, nh + 1, "M={m}");
            assert!(state.t().z_order() >= 4, "budget exhausted for M={m}");
        }
    }

    #[test]
    fn initial_guess_is_polynomial_with_guaranteed_order() {
        let nh = 14;
        let m = 2;
        let q1t = gevrey_forcing(nh, recursion_z_budget(4, nh, m) + 40, 0.3);
        let guess = build_initial_guess(&q1t, m, 8).unwrap();
        assert_eq!(guess.h_order(), nh);
        for n in 9..=nh {
            assert!(guess.t().coeff(n).is_zero());
            assert!(guess.e()[0].coeff(n).coeff(0).norm() == 0.0);
        }
        let f = eval_f(&guess, &q1t).unwrap();
        assert!(scaled_residual_order(&f, &guess, &q1t, 1e-9) >= 9);
    }

    #[test]
    fn invert_solves_trivial_cases() {
        let nh = 5;
        let x = StatePoint::zero(2, nh, 30);
        // rhs = 0 -> v = 0
        let v = invert_dominant_block(&HSeries::zero(nh, 30), &x).unwrap();
        assert!(v.dt().max_abs() == 0.0);
        assert!(v.de()[0].max_abs() == 0.0);
        // rhs = 1 at h^0 -> 𝓔₀ = 1, 𝓣 = 0
        let rhs = HSeries::promote(&ZSeries::one(30), nh);
        let v = invert_dominant_block(&rhs, &x).unwrap();
        assert!((v.de()[0].coeff(0).coeff(0) - c(1.0)).norm() < 1e-14);
        assert!(v.dt().max_abs() < 1e-14);
        let back = eval_df(&x, &v).unwrap();
        assert!(back.sub(&rhs.truncated_z(back.z_order()).unwrap()).unwrap().max_abs() < 1e-13);
    }

    /// Disc-analytic random series: coefficients decay geometrically in z.
    fn random_analytic_hseries(rng: &mut ChaCha8Rng, nh: usize, nz: usize, scale: f64) -> HSeries {
        HSeries::new(
            (0..=nh)
                .map(|_| {
                    ZSeries::new(
                        (0..=nz)
                            .map(|k| {
                                let a = scale * 0.5f64.powi(k as i32);
                                Complex64::new(rng.gen_range(-a..a), rng.gen_range(-a..a))
                            })
                            .collect(),
                    )
                })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn invert_is_right_inverse_on_random_states() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for m in 1..=3usize {
            let nh = 8;
            let nz = 90;
            let t = random_analytic_hseries(&mut rng, nh, nz, 0.2);
            let e: Vec<HSeries> = (0..m - 1)
                .map(|_| {
                    HSeries::from_scalars(
                        &(0..=nh)
                            .map(|_| Complex64::new(rng.gen_range(-0.2..0.2), 0.0))
                            .collect::<Vec<_>>(),
                    )
                })
                .collect();
            let x = StatePoint::new(e, t, m).unwrap();
            let rhs = random_analytic_hseries(&mut rng, nh, nz, 1.0);
            let v = invert_dominant_block(&rhs, &x).unwrap();
            let back = eval_df(&x, &v).unwrap();
            let w = back.z_order();
            let diff = back.sub(&rhs.truncated_z(w).unwrap()).unwrap();
            let scale = v.dt().max_abs().max(1.0);
            assert!(
                diff.max_abs() / scale < 1e-12,
                "right-inverse defect {} for M={m}",
                diff.max_abs() / scale
            );
        }
    }

    #[test]
    fn newton_matches_recursion_small() {
        let m = 2;
        let nh = 12;
        let nz_work = newton_z_budget(4, nh, m, 8);
        let q1t = gevrey_forcing(nh, nz_work, 0.3);
        let cfg = NewtonConfig {
            b0: 8,
            max_iters: 12,
            nh,
            nz: 4,
            tol: 1e-9,
            mode: SolverMode::Newton,
        };
        let params = NormParams::new(1.0, 0.25, 0.5).unwrap();
        let (xn, trace) = newton_iterate(&q1t, m, &cfg, &params).unwrap();
        assert!(trace.converged);
        // schedule 8 -> 9 -> 11 -> 15: three corrections at Nh=12
        assert_eq!(
            trace.steps.iter().map(|s| s.b_j).collect::<Vec<_>>(),
            vec![8, 9, 11, 15]
        );
        for s in &trace.steps {
            assert!(s.residual_order >= s.b_j + 1, "step {s:?}");
        }
        let xr = solve_recursive(&q1t, m, nh).unwrap();
        let w = xn.t().z_order().min(xr.t().z_order());
        let dt = xn
            .t()
            .truncated_z(w)
            .unwrap()
            .sub(&xr.t().truncated_z(w).unwrap())
            .unwrap();
        let scale = xr.t().max_abs().max(1.0);
        assert!(dt.max_abs() / scale < 1e-8, "relative gap {}", dt.max_abs() / scale);
        let de = xn.e()[0].sub(&xr.e()[0]).unwrap();
        assert!(de.max_abs() / xr.e()[0].max_abs().max(1.0) < 1e-8);
    }

    #[test]
    fn order_schedule_values() {
        assert_eq!(order_schedule(8, 23), vec![8, 9, 11, 15, 23]);
        assert_eq!(order_schedule(8, 12), vec![8, 9, 11, 15]);
        assert_eq!(order_schedule(9, 9), vec![9]);
        // b_j >= 3 + j for all generated entries when b0 >= 8
        for (j, b) in order_schedule(8, 200).iter().enumerate() {
            assert!(*b >= 3 + j);
        }
    }

    #[test]
    fn newton_on_zero_input_converges_immediately() {
        let q1t = HSeries::zero(10, 40);
        let cfg = NewtonConfig {
            b0: 8,
            max_iters: 4,
            nh: 10,
            nz: 4,
            tol: 1e-10,
            mode: SolverMode::Newton,
        };
        let params = NormParams::new(1.0, 0.25, 0.5).unwrap();
        let (x, trace) = newton_iterate(&q1t, 2, &cfg, &params).unwrap();
        assert!(trace.converged);
        // schedule 8 -> 9 -> 11 is still walked; every entry is clean
        assert_eq!(trace.steps.len(), 3);
        for s in &trace.steps {
            assert_eq!(s.residual_order, 11);
            assert_eq!(s.correction_norm, 0.0);
        }
        assert!(x.t().max_abs() == 0.0);
    }

    /// End-to-end on a transformed potential: recursion solution feeds the
    /// canonical-form verification in the x-variable.
    #[test]
    fn recursion_solution_verifies_end_to_end() {
        let m = 2;
        let nh = 8;
        let nz_out = 6;
        let q = [c(0.0), c(0.0), c(-0.25), c(-0.25)];
        let q1 = vec![vec![c(0.4), c(0.1)], vec![c(0.2)]];
        let spec = PotentialSpec::from_polynomials(m, &q, &q1, nh, nz_out).unwrap();
        let nz_work = recursion_z_budget(nz_out, nh, m);
        let td = Transform::build(&spec, nz_work).unwrap();
        let state = solve_recursive(&td.q1_tilde, m, nh).unwrap();
        let psi = td.compute_psi(state.t()).unwrap();
        let y = td.assemble_y_of_x(state.t()).unwrap();
        let report =
            crate::normal_form::verify_canonical_form(&spec, &td, &state, &psi, &y).unwrap();
        for (n, r) in report.residual_per_h.iter().enumerate() {
            assert!(*r < 1e-8, "x-route residual {r} at h^{n}");
        }
        for (n, r) in report.psi_residual_per_h.iter().enumerate() {
            assert!(*r < 1e-8, "psi-route residual {r} at h^{n}");
        }
        assert!(report.two_route_max_diff < 1e-9);
    }
}
