//! Exact solution of the dominant linear equation
//! `(z^M/2) u' + (M/4) z^(M-1) u = E₀ + E₁ z + ... + E_{M-2} z^(M-2) + v(z)`
//! for the unknown pair (u, E), together with its norm bounds as
//! testable ratios.
//!
//! The coefficient formulas are closed-form: `E_j = -v_j` for
//! `j = 0..M-2`, and `u` collects the remaining coefficients of v with
//! denominators `j - M/2 + 1 >= 1/2`.

use num_complex::Complex64;

use crate::norms::rho_norm;
use crate::series::ZSeries;

/// Ratios LHS/RHS for the three bound statements; all must be <= 1.
#[derive(Debug, Clone, Copy)]
pub struct BoundReport {
    /// max_j |E_j| r^j / ‖v‖_r
    pub e_ratio: f64,
    /// ‖u‖_r r^(M-1) / (4 ‖v‖_r)
    pub u_ratio: f64,
    /// ‖u'‖_r r^M / (2 ‖v‖_r)
    pub du_ratio: f64,
}

#[derive(Debug, Clone)]
pub struct DominantSolution {
    pub u: ZSeries,
    pub e: Vec<Complex64>,
    pub bound_report: BoundReport,
}

/// Apply the dominant operator `(z^M/2) d/dz + (M/4) z^(M-1)` exactly;
/// for u of order N the result has order N + M - 1.
pub fn apply_dominant(u: &ZSeries, m: usize) -> ZSeries {
    let target = u.trunc_order() + m - 1;
    let drift = if u.trunc_order() >= 1 {
        u.differentiate(1).z_shift(m).scale_re(0.5).truncated(target).unwrap()
    } else {
        // u constant: the derivative term is exactly zero
        ZSeries::zero(target)
    };
    let weight = u.z_shift(m.saturating_sub(1)).scale_re(m as f64 / 4.0);
    drift.add(&weight.truncated(target).unwrap()).unwrap()
}

/// Solve the dominant equation for a given right-hand side `v`; the
/// solution is unique. `u` comes out at order `Nz - M + 1`; the bound
/// ratios are evaluated at radius `r`.
pub fn solve_dominant(v: &ZSeries, m: usize, r: f64) -> DominantSolution {
    assert!(m >= 1, "turning point order must be >= 1");
    assert!(r > 0.0);
    let nv = v.trunc_order();
    assert!(
        nv + 1 >= m,
        "rhs truncation order {nv} cannot determine u for M = {m}"
    );
    let e: Vec<Complex64> = (0..m.saturating_sub(1)).map(|j| -v.coeff(j)).collect();
    let nu = nv + 1 - m;
    let mut u = vec![Complex64::new(0.0, 0.0); nu + 1];
    for j in (m - 1)..=nv {
        let denom = j as f64 - m as f64 / 2.0 + 1.0;
        debug_assert!(denom >= 0.5);
        u[j + 1 - m] = v.coeff(j) * 2.0 / denom;
    }
    let u = ZSeries::new(u);

    let vnorm = rho_norm(v, r);
    let bound_report = if vnorm == 0.0 {
        BoundReport {
            e_ratio: 0.0,
            u_ratio: 0.0,
            du_ratio: 0.0,
        }
    } else {
        let e_ratio = e
            .iter()
            .enumerate()
            .map(|(j, c)| c.norm() * r.powi(j as i32) / vnorm)
            .fold(0.0, f64::max);
        let u_ratio = rho_norm(&u, r) * r.powi(m as i32 - 1) / (4.0 * vnorm);
        let du_ratio = if u.trunc_order() >= 1 {
            rho_norm(&u.differentiate(1), r) * r.powi(m as i32) / (2.0 * vnorm)
        } else {
            0.0
        };
        BoundReport {
            e_ratio,
            u_ratio,
            du_ratio,
        }
    };
    DominantSolution {
        u,
        e,
        bound_report,
    }
}

/// True iff all three bound statements hold at radius `r` with 1e-12 slack.
pub fn check_dominant_bounds(sol: &DominantSolution, v: &ZSeries, r: f64) -> bool {
    let m = sol.e.len() + 1;
    let vnorm = rho_norm(v, r);
    let slack = 1e-12;
    let e_ok = sol
        .e
        .iter()
        .enumerate()
        .all(|(j, c)| c.norm() <= vnorm / r.powi(j as i32) + slack);
    let u_ok = rho_norm(&sol.u, r) <= 4.0 / r.powi(m as i32 - 1) * vnorm + slack;
    let du_ok = if sol.u.trunc_order() >= 1 {
        rho_norm(&sol.u.differentiate(1), r) <= 2.0 / r.powi(m as i32) * vnorm + slack
    } else {
        true
    };
    e_ok && u_ok && du_ok
}
