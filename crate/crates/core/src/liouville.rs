//! Change of independent variable near the turning point: the new
//! variable `z(x) = A (∫₀ˣ √(-Q(t)) dt)^(2/(M+2))` with
//! `A = (M+2)^(2/(M+2))`, its inverse `x(z)`, the Jacobian data, the
//! transformed perturbation `Q̃₁(z,h)` and the scaling factor `ψ`.
//!
//! The exponent `2/(M+2)` is the one that makes `z(x)` analytic with
//! `z'(0) != 0`; it is enforced by the master self-test
//! `(dx/dz)² · Q(x(z)) + A^(-M-2)((M+2)/2)² z^M = 0`, not by trust.
//!
//! With this normalization the transformed perturbation is
//! `Q̃₁(z,h) = (dx/dz)² Q₁(x(z),h) + (h/2)·[-x''' /x' + (3/2)(x''/x')²]`,
//! which is what makes the z-form and x-form of the reduced equation
//! agree identically; the factor on the h-bracket is pinned by the
//! two-route residual test in `normal_form`.

use num_complex::Complex64;
use num_rational::Rational64;

use crate::series::{HSeries, ZSeries};
use crate::{Error, Result};

/// Problem input: a potential `Q(x)` with a zero of exact order `M` at
/// the origin, a perturbation table `Q₁(x,h)`, and requested truncation
/// orders. `Q` and the rows of `Q₁` are polynomial data: extending them
/// by zero coefficients is exact.
#[derive(Debug, Clone)]
pub struct PotentialSpec {
    m: usize,
    q_poly: Vec<Complex64>,
    q1_rows: Vec<Vec<Complex64>>,
    nh: usize,
    nz: usize,
}

impl PotentialSpec {
    pub fn from_polynomials(
        m: usize,
        q_poly: &[Complex64],
        q1_rows: &[Vec<Complex64>],
        nh: usize,
        nz: usize,
    ) -> Result<Self> {
        if m < 1 {
            return Err(Error::Validation("M must be >= 1".into()));
        }
        if q_poly.len() <= m {
            return Err(Error::Validation(format!(
                "Q needs a nonzero coefficient of x^{m}; only {} coefficients given",
                q_poly.len()
            )));
        }
        for (i, c) in q_poly.iter().take(m).enumerate() {
            if c.norm() >= 1e-14 {
                return Err(Error::Validation(format!(
                    "Q must vanish to order {m} at x=0; coefficient of x^{i} is {c}"
                )));
            }
        }
        if q_poly[m].norm() == 0.0 {
            return Err(Error::Validation(format!(
                "leading coefficient q_M of Q (coefficient of x^{m}) must be nonzero"
            )));
        }
        Ok(PotentialSpec {
            m,
            q_poly: q_poly.to_vec(),
            q1_rows: q1_rows.to_vec(),
            nh,
            nz,
        })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn nh(&self) -> usize {
        self.nh
    }

    pub fn nz(&self) -> usize {
        self.nz
    }

    /// Q as a series at the requested truncation order (exact zero
    /// extension of the polynomial data).
    pub fn q_at(&self, order: usize) -> ZSeries {
        let mut v = vec![Complex64::new(0.0, 0.0); order + 1];
        for (i, c) in self.q_poly.iter().enumerate() {
            if i <= order {
                v[i] = *c;
            }
        }
        ZSeries::new(v)
    }

    /// Q₁ as an h-series of z-series at the requested orders.
    pub fn q1_at(&self, nh: usize, nz: usize) -> HSeries {
        let coeffs = (0..=nh)
            .map(|n| {
                let mut v = vec![Complex64::new(0.0, 0.0); nz + 1];
                if let Some(row) = self.q1_rows.get(n) {
                    for (i, c) in row.iter().enumerate() {
                        if i <= nz {
                            v[i] = *c;
                        }
                    }
                }
                ZSeries::new(v)
            })
            .collect();
        HSeries::new(coeffs).expect("uniform z-orders by construction")
    }

    /// The spec's stored tables at the requested (Nh, Nz).
    pub fn q(&self) -> ZSeries {
        self.q_at(self.nz.max(self.q_poly.len() - 1))
    }

    pub fn q1(&self) -> HSeries {
        self.q1_at(self.nh, self.nz)
    }
}

/// The computed variable change and its derived data, at a common
/// working z-order.
#[derive(Debug, Clone)]
pub struct Transform {
    pub z_of_x: ZSeries,
    pub x_of_z: ZSeries,
    pub dz_dx: ZSeries,
    pub dx_dz: ZSeries,
    pub d2x_dz2: ZSeries,
    pub d3x_dz3: ZSeries,
    pub q1_tilde: HSeries,
    pub a_const: f64,
    /// Max coefficient of `(dx/dz)²·Q(x(z)) + A^(-M-2)((M+2)/2)² z^M`.
    pub identity_residual: f64,
}

/// `z(x)` as an analytic series with `z(0) = 0`: factor
/// `-Q = (-q_M) x^M (1 + r(x))`, integrate `√(-Q)` with the monomial
/// prefactor tracked exactly, and raise to the power `2/(M+2)`.
pub fn compute_z_of_x(spec: &PotentialSpec, order: usize) -> Result<ZSeries> {
    let m = spec.m();
    let q_ext = spec.q_at(order + m);
    let neg_qm = -q_ext.coeff(m);
    // unit part of -Q/( -q_M x^M )
    let mut r = vec![Complex64::new(0.0, 0.0); order + 1];
    r[0] = Complex64::new(1.0, 0.0);
    for i in 1..=order {
        r[i] = -q_ext.coeff(m + i) / neg_qm;
    }
    let unit_sqrt = ZSeries::new(r).unit_power(0.5)?;
    // ∫ t^(M/2 + k) dt = x^(M/2 + k + 1)/(M/2 + k + 1): the antiderivative
    // is x^((M+2)/2) · w(x) with w_k = u_k / (k + (M+2)/2).
    let half_m_plus = (m as f64 + 2.0) / 2.0;
    let w = ZSeries::new(
        unit_sqrt
            .coeffs()
            .iter()
            .enumerate()
            .map(|(k, c)| c / (k as f64 + half_m_plus))
            .collect(),
    );
    // Raising x^((M+2)/2)·w to the power 2/(M+2): the monomial exponent
    // must come back integral (and equal to 1); tracked exactly.
    let exponent = Rational64::new((m as i64) + 2, 2) * Rational64::new(2, (m as i64) + 2);
    assert_eq!(
        exponent,
        Rational64::from_integer(1),
        "non-integer residual exponent survived the fractional power"
    );
    let p = 2.0 / (m as f64 + 2.0);
    let wp = w.unit_power(p)?;
    let a_const = (m as f64 + 2.0).powf(p);
    let scalar = neg_qm.powf(1.0 / (m as f64 + 2.0)) * a_const;
    // z = scalar · x · wp(x); the shift keeps the constant term exactly 0.
    Ok(wp.scale(scalar).z_shift(1).truncated(order)?)
}

impl Transform {
    /// Build the full transform at working z-order `nz_work`, including
    /// the transformed perturbation at h-order `spec.nh()`.
    pub fn build(spec: &PotentialSpec, nz_work: usize) -> Result<Transform> {
        let m = spec.m();
        let base = nz_work + 4;
        let z_of_x = compute_z_of_x(spec, base)?;
        let x_of_z = z_of_x.revert()?;
        let dz_dx = z_of_x.differentiate(1);
        let dx_dz = x_of_z.differentiate(1);
        let d2x_dz2 = x_of_z.differentiate(2);
        let d3x_dz3 = x_of_z.differentiate(3);
        let a_const = (m as f64 + 2.0).powf(2.0 / (m as f64 + 2.0));

        // Master self-test: (dx/dz)² Q(x(z)) + A^(-M-2)((M+2)/2)² z^M = 0.
        let w = base - 1;
        let q_comp = spec.q_at(w).compose(&x_of_z.truncated(w)?)?;
        let lead = a_const.powi(-(m as i32) - 2) * ((m as f64 + 2.0) / 2.0).powi(2);
        let identity = dx_dz
            .mul(&dx_dz)?
            .mul(&q_comp)?
            .add(&ZSeries::monomial(Complex64::new(lead, 0.0), m, w))?;
        let identity_residual = identity.max_abs();

        // Q̃₁ = (dx/dz)² Q₁(x(z), h) + (h/2)[-x'''/x' + (3/2)(x''/x')²]
        let wq = base - 3;
        let xp = dx_dz.truncated(wq)?;
        let xp_inv = xp.reciprocal()?;
        let xpp = d2x_dz2.truncated(wq)?;
        let xppp = d3x_dz3.truncated(wq)?;
        let bracket = xppp.neg().mul(&xp_inv)?.add(
            &xpp.mul(&xpp)?
                .mul(&xp_inv.mul(&xp_inv)?)?
                .scale_re(1.5),
        )?;
        let q1_comp = spec
            .q1_at(spec.nh(), wq)
            .compose_z(&x_of_z.truncated(wq)?)?;
        let q1_tilde = q1_comp
            .mul_z(&xp.mul(&xp)?)?
            .add(&HSeries::promote(&bracket.scale_re(0.5), spec.nh()).h_shift(1))?
            .truncated_z(nz_work)?;

        Ok(Transform {
            z_of_x: z_of_x.truncated(nz_work)?,
            x_of_z: x_of_z.truncated(nz_work)?,
            dz_dx: dz_dx.truncated(nz_work)?,
            dx_dz: dx_dz.truncated(nz_work)?,
            d2x_dz2: d2x_dz2.truncated(nz_work)?,
            d3x_dz3: d3x_dz3.truncated(nz_work)?,
            q1_tilde,
            a_const,
            identity_residual,
        })
    }

    /// `ψ = (dx/dy)^(1/2)` expressed in the x-variable, with
    /// `dx/dy = (dx/dz) / (1 + hT')` and the principal branch on the
    /// constant term.
    pub fn compute_psi(&self, t: &HSeries) -> Result<HSeries> {
        let nh = t.h_order();
        let w = t
            .z_order()
            .saturating_sub(1)
            .min(self.dx_dz.trunc_order())
            .min(self.z_of_x.trunc_order());
        let tp = t.dz(1).truncated_z(w)?;
        let y_prime = HSeries::one(nh, w).add(&tp.h_shift(1))?;
        let dxdy = HSeries::promote(&self.dx_dz.truncated(w)?, nh).mul(&y_prime.reciprocal()?)?;
        let psi_z = dxdy.unit_power(0.5)?;
        Ok(psi_z.compose_z(&self.z_of_x.truncated(w)?)?)
    }

    /// `y(x,h) = z(x) + h·T(z(x), h)`.
    pub fn assemble_y_of_x(&self, t: &HSeries) -> Result<HSeries> {
        let nh = t.h_order();
        let w = t.z_order().min(self.z_of_x.trunc_order());
        let zx = self.z_of_x.truncated(w)?;
        let t_x = t.truncated_z(w)?.compose_z(&zx)?;
        Ok(HSeries::promote(&zx, nh).add(&t_x.h_shift(1))?)
    }
}
