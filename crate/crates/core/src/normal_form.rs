//! The mildly nonlinear functional `F(T, E₀, ..., E_{M-2})` whose zero
//! locus encodes the canonical-form reduction, its Fréchet derivative
//! in the dominant/regular/singular grouping, and residual verification
//! of the end-to-end claim.
//!
//! With primes denoting d/dz and `y = z + hT`:
//!
//! ```text
//! F = Σ_j E_j(h) (z+hT)^j  -  (1/4) Σ_{μ=1..M} C(M,μ) h^(μ-1) z^(M-μ) T^μ
//!     + T'(2+hT') ( -(z+hT)^M/4 + h Σ_j E_j(h) (z+hT)^j )
//!     - (h²/2) T'''/(1+hT')  +  (3h³/4) T''²/(1+hT')²  -  Q̃₁(z,h)
//! ```
//!
//! The h⁰ part is the dominant linear operator acting on (E·, T):
//! `Σ_j E_{j,0} z^j - (z^M/2) T₀' - (M/4) z^(M-1) T₀ - Q̃₁,₀`, which is
//! why one dominant solve per h-order peels the equation.
//!
//! The monomial `z^(M/2)` never appears on its own: the combined form
//! `½ z^(M/2)(z^(M/2) T)' = ½ z^M T' + (M/4) z^(M-1) T` is polynomial and
//! is the only form used here.

use num_complex::Complex64;

use crate::liouville::{PotentialSpec, Transform};
use crate::series::{HSeries, ZSeries};
use crate::{Error, Result};

/// The tuple `(E₀, ..., E_{M-2}, T)` the functional acts on. The `E_j`
/// are scalar h-series (z-order 0); `T` carries z-dependence.
#[derive(Debug, Clone)]
pub struct StatePoint {
    e: Vec<HSeries>,
    t: HSeries,
    m: usize,
}

impl StatePoint {
    pub fn new(e: Vec<HSeries>, t: HSeries, m: usize) -> Result<Self> {
        if m < 1 {
            return Err(Error::Validation("M must be >= 1".into()));
        }
        if e.len() != m - 1 {
            return Err(Error::Validation(format!(
                "state needs {} energy series for M={m}, got {}",
                m - 1,
                e.len()
            )));
        }
        for ej in &e {
            if ej.z_order() != 0 {
                return Err(Error::Validation(
                    "energy series must be scalar (z-order 0)".into(),
                ));
            }
            if ej.h_order() != t.h_order() {
                return Err(Error::Validation(format!(
                    "h-orders disagree: E at {}, T at {}",
                    ej.h_order(),
                    t.h_order()
                )));
            }
        }
        Ok(StatePoint { e, t, m })
    }

    pub fn zero(m: usize, nh: usize, nz: usize) -> Self {
        StatePoint {
            e: vec![HSeries::zero(nh, 0); m - 1],
            t: HSeries::zero(nh, nz),
            m,
        }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn e(&self) -> &[HSeries] {
        &self.e
    }

    pub fn t(&self) -> &HSeries {
        &self.t
    }

    pub fn h_order(&self) -> usize {
        self.t.h_order()
    }

    /// Add a tangent direction scaled by a real factor; T is aligned to
    /// the common z-order.
    pub fn add_scaled(&self, v: &TangentVector, c: f64) -> Result<StatePoint> {
        let e = self
            .e
            .iter()
            .zip(v.de())
            .map(|(a, b)| a.add(&b.scale_re(c)))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        let w = self.t.z_order().min(v.dt().z_order());
        let t = self
            .t
            .truncated_z(w)?
            .add(&v.dt().truncated_z(w)?.scale_re(c))?;
        StatePoint::new(e, t, self.m)
    }

    pub fn add(&self, v: &TangentVector) -> Result<StatePoint> {
        self.add_scaled(v, 1.0)
    }

    /// Re-embed at a higher h-order with zero coefficients above the
    /// current ones; meaningful when the state is, by construction, a
    /// polynomial in h.
    pub fn embed_h(&self, nh: usize) -> Result<StatePoint> {
        if nh < self.h_order() {
            return Err(Error::Validation(format!(
                "embed_h cannot shrink {} to {nh}",
                self.h_order()
            )));
        }
        let pad = |s: &HSeries| {
            let mut coeffs = s.coeffs().to_vec();
            coeffs.resize(nh + 1, ZSeries::zero(s.z_order()));
            HSeries::new(coeffs).expect("uniform orders")
        };
        Ok(StatePoint {
            e: self.e.iter().map(&pad).collect(),
            t: pad(&self.t),
            m: self.m,
        })
    }

    /// Max coefficient magnitude at each h-order across all components.
    pub fn max_abs_by_order(&self) -> Vec<f64> {
        let mut out = self.t.max_abs_by_order();
        for ej in &self.e {
            for (n, v) in ej.max_abs_by_order().into_iter().enumerate() {
                out[n] = out[n].max(v);
            }
        }
        out
    }
}

/// A tangent direction `(𝓔₀, ..., 𝓔_{M-2}, 𝓣)` with the same shape
/// rules as `StatePoint`.
#[derive(Debug, Clone)]
pub struct TangentVector {
    de: Vec<HSeries>,
    dt: HSeries,
}

impl TangentVector {
    pub fn new(de: Vec<HSeries>, dt: HSeries) -> Self {
        TangentVector { de, dt }
    }

    pub fn de(&self) -> &[HSeries] {
        &self.de
    }

    pub fn dt(&self) -> &HSeries {
        &self.dt
    }

    pub fn scale_re(&self, c: f64) -> TangentVector {
        TangentVector {
            de: self.de.iter().map(|s| s.scale_re(c)).collect(),
            dt: self.dt.scale_re(c),
        }
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    let mut b = 1.0;
    for i in 0..k {
        b = b * (n - i) as f64 / (i + 1) as f64;
    }
    b
}

/// Powers (z + hT)^0 ... (z + hT)^top at the given truncations.
fn perturbed_z_powers(t: &HSeries, top: usize, nh: usize, w: usize) -> Result<Vec<HSeries>> {
    let base = HSeries::promote(&ZSeries::monomial(Complex64::new(1.0, 0.0), 1, w), nh)
        .add(&t.truncated_z(w)?.h_shift(1))?;
    let mut pows = Vec::with_capacity(top + 1);
    pows.push(HSeries::one(nh, w));
    for _ in 1..=top {
        let next = pows.last().unwrap().mul(&base)?;
        pows.push(next);
    }
    Ok(pows)
}

/// Evaluate the functional at a state against a given `Q̃₁`. The output
/// z-order is `min(T-order - 3, Q̃₁-order)`.
pub fn eval_f(x: &StatePoint, q1_tilde: &HSeries) -> Result<HSeries> {
    let m = x.m();
    let nh = x.h_order();
    if q1_tilde.h_order() != nh {
        return Err(Error::Validation(format!(
            "h-orders disagree: state at {nh}, perturbation at {}",
            q1_tilde.h_order()
        )));
    }
    let w = x.t().z_order().saturating_sub(3).min(q1_tilde.z_order());
    let t = x.t().truncated_z(w)?;
    let tp = x.t().dz(1).truncated_z(w)?;
    let tpp = x.t().dz(2).truncated_z(w)?;
    let tppp = x.t().dz(3).truncated_z(w)?;
    let pows = perturbed_z_powers(x.t(), m, nh, w)?;

    let mut sum_e = HSeries::zero(nh, w);
    for (j, ej) in x.e().iter().enumerate() {
        sum_e = sum_e.add(&ej.broadcast_z(w)?.mul(&pows[j])?)?;
    }

    // -(1/4) Σ_{μ=1..M} C(M,μ) h^(μ-1) z^(M-μ) T^μ
    let mut mu_sum = HSeries::zero(nh, w);
    let mut tpow = HSeries::one(nh, w);
    for mu in 1..=m {
        tpow = tpow.mul(&t)?;
        let zmono = ZSeries::monomial(Complex64::new(1.0, 0.0), m - mu, w);
        let term = tpow
            .mul_z(&zmono)?
            .h_shift(mu - 1)
            .scale_re(-0.25 * binomial(m, mu));
        mu_sum = mu_sum.add(&term)?;
    }

    // T'(2+hT') ( -(z+hT)^M/4 + h Σ_j E_j (z+hT)^j )
    let two_plus = HSeries::one(nh, w).scale_re(2.0).add(&tp.h_shift(1))?;
    let inner = sum_e.h_shift(1).sub(&pows[m].scale_re(0.25))?;
    let drift = tp.mul(&two_plus)?.mul(&inner)?;

    let recip = HSeries::one(nh, w).add(&tp.h_shift(1))?.reciprocal()?;
    let third = tppp.mul(&recip)?.h_shift(2).scale_re(-0.5);
    let second = tpp
        .mul(&tpp)?
        .mul(&recip)?
        .mul(&recip)?
        .h_shift(3)
        .scale_re(0.75);

    sum_e
        .add(&mu_sum)?
        .add(&drift)?
        .add(&third)?
        .add(&second)?
        .sub(&q1_tilde.truncated_z(w)?)
        .map_err(Into::into)
}

/// Factors of the first variation of `eval_f` at a fixed state, grouped
/// by the tangent component they multiply and by their h-prefactor:
/// the dominant block is h-order-preserving, the regular factors carry
/// h¹ and the singular factors h².
pub(crate) struct FrechetTable {
    m: usize,
    nh: usize,
    pub(crate) order: usize,
    /// multiply 𝓔_j (h¹ prefactor applied by `apply`)
    pub(crate) e_factors: Vec<HSeries>,
    /// multiply 𝓣 (h¹)
    pub(crate) t_factor: HSeries,
    /// multiply 𝓣' (h¹)
    pub(crate) tp_factor: HSeries,
    /// multiply 𝓣', 𝓣'', 𝓣''' (h²)
    pub(crate) sing_tp: HSeries,
    pub(crate) sing_tpp: HSeries,
    pub(crate) sing_tppp: HSeries,
}

impl FrechetTable {
    pub(crate) fn at(x: &StatePoint) -> Result<FrechetTable> {
        let m = x.m();
        let nh = x.h_order();
        let w = x.t().z_order().saturating_sub(3);
        let t = x.t().truncated_z(w)?;
        let tp = x.t().dz(1).truncated_z(w)?;
        let tpp = x.t().dz(2).truncated_z(w)?;
        let tppp = x.t().dz(3).truncated_z(w)?;
        let pows = perturbed_z_powers(x.t(), m, nh, w)?;
        let e_b = x
            .e()
            .iter()
            .map(|ej| ej.broadcast_z(w))
            .collect::<std::result::Result<Vec<_>, _>>()?;

        let one = HSeries::one(nh, w);
        let h_tp = tp.h_shift(1);
        let one_p = one.add(&h_tp)?; // 1 + hT'
        let two_plus = one.scale_re(2.0).add(&h_tp)?; // 2 + hT'
        let drift = tp.mul(&two_plus)?; // T'(2+hT')
        let recip = one_p.reciprocal()?;
        let recip2 = recip.mul(&recip)?;
        let recip3 = recip2.mul(&recip)?;

        // variation in E_j: (1+hT')²(z+hT)^j = z^j + h·e_factors[j]
        let mut e_factors = Vec::with_capacity(m.saturating_sub(1));
        for j in 0..m.saturating_sub(1) {
            let mut f = drift.mul(&pows[j])?;
            let mut tpow = one.clone();
            for mu in 1..=j {
                tpow = tpow.mul(&t)?;
                let zmono = ZSeries::monomial(Complex64::new(1.0, 0.0), j - mu, w);
                f = f.add(&tpow.mul_z(&zmono)?.h_shift(mu - 1).scale_re(binomial(j, mu)))?;
            }
            e_factors.push(f);
        }

        // variation in T (beyond the dominant -(M/4) z^(M-1) piece)
        let mut sum_je = HSeries::zero(nh, w);
        for (j, ej) in e_b.iter().enumerate() {
            if j >= 1 {
                sum_je = sum_je.add(&ej.mul(&pows[j - 1])?.scale_re(j as f64))?;
            }
        }
        let mut t_factor = one_p.mul(&one_p)?.mul(&sum_je)?;
        let mut tpow = one.clone();
        for mu in 2..=m {
            tpow = tpow.mul(&t)?;
            let zmono = ZSeries::monomial(Complex64::new(1.0, 0.0), m - mu, w);
            let coeff = -0.25 * (mu as f64) * binomial(m, mu);
            t_factor = t_factor.add(
                &tpow
                    .truncated_z(w)?
                    .mul_z(&zmono)?
                    .h_shift(mu - 2)
                    .scale_re(coeff),
            )?;
        }
        t_factor = t_factor.sub(&drift.mul(&pows[m - 1])?.scale_re(m as f64 / 4.0))?;

        // variation in T' (beyond the dominant -(z^M/2) piece):
        // 2Σ E_j (z+hT)^j - (1/2)Σ C(M,μ) h^(μ-1) z^(M-μ) T^μ
        //   + 2T'(hΣ E_j (z+hT)^j - (z+hT)^M/4)
        let mut sum_e = HSeries::zero(nh, w);
        for (j, ej) in e_b.iter().enumerate() {
            sum_e = sum_e.add(&ej.mul(&pows[j])?)?;
        }
        let mut tp_factor = sum_e.scale_re(2.0);
        let mut tpow = one.clone();
        for mu in 1..=m {
            tpow = tpow.mul(&t)?;
            let zmono = ZSeries::monomial(Complex64::new(1.0, 0.0), m - mu, w);
            tp_factor = tp_factor.add(
                &tpow
                    .mul_z(&zmono)?
                    .h_shift(mu - 1)
                    .scale_re(-0.5 * binomial(m, mu)),
            )?;
        }
        let inner = sum_e.h_shift(1).sub(&pows[m].scale_re(0.25))?;
        tp_factor = tp_factor.add(&tp.mul(&inner)?.scale_re(2.0))?;

        let sing_tp = tppp
            .mul(&recip2)?
            .h_shift(1)
            .scale_re(0.5)
            .sub(&tpp.mul(&tpp)?.mul(&recip3)?.h_shift(2).scale_re(1.5))?;
        let sing_tpp = tpp.mul(&recip2)?.h_shift(1).scale_re(1.5);
        let sing_tppp = recip.scale_re(-0.5);

        Ok(FrechetTable {
            m,
            nh,
            order: w,
            e_factors,
            t_factor,
            tp_factor,
            sing_tp,
            sing_tpp,
            sing_tppp,
        })
    }

    /// The dominant block `Σ_j z^j 𝓔_j - (z^M/2) 𝓣' - (M/4) z^(M-1) 𝓣`
    /// at a given z-order.
    fn dominant_block(&self, v: &TangentVector, w: usize) -> Result<HSeries> {
        let one = Complex64::new(1.0, 0.0);
        let mut out = v
            .dt()
            .dz(1)
            .truncated_z(w)?
            .mul_z(&ZSeries::monomial(one, self.m, w))?
            .scale_re(-0.5);
        out = out.add(
            &v.dt()
                .truncated_z(w)?
                .mul_z(&ZSeries::monomial(one, self.m - 1, w))?
                .scale_re(-(self.m as f64) / 4.0),
        )?;
        for (j, dej) in v.de().iter().enumerate() {
            out = out.add(&dej.broadcast_z(w)?.mul_z(&ZSeries::monomial(one, j, w))?)?;
        }
        Ok(out)
    }

    pub(crate) fn apply(&self, v: &TangentVector) -> Result<HSeries> {
        let w = self.order.min(v.dt().z_order().saturating_sub(3));
        let nh = self.nh;
        let dt = v.dt().truncated_z(w)?;
        let dtp = v.dt().dz(1).truncated_z(w)?;
        let dtpp = v.dt().dz(2).truncated_z(w)?;
        let dtppp = v.dt().dz(3).truncated_z(w)?;

        let mut out = self.dominant_block(v, w)?;

        let mut benign = HSeries::zero(nh, w);
        for (j, dej) in v.de().iter().enumerate() {
            benign = benign.add(&self.e_factors[j].truncated_z(w)?.mul(&dej.broadcast_z(w)?)?)?;
        }
        benign = benign.add(&self.t_factor.truncated_z(w)?.mul(&dt)?)?;
        benign = benign.add(&self.tp_factor.truncated_z(w)?.mul(&dtp)?)?;
        out = out.add(&benign.h_shift(1))?;

        let mut sing = self.sing_tp.truncated_z(w)?.mul(&dtp)?;
        sing = sing.add(&self.sing_tpp.truncated_z(w)?.mul(&dtpp)?)?;
        sing = sing.add(&self.sing_tppp.truncated_z(w)?.mul(&dtppp)?)?;
        out.add(&sing.h_shift(2)).map_err(Into::into)
    }
}

/// Fréchet derivative of `eval_f` at `x` applied to the direction `v`.
pub fn eval_df(x: &StatePoint, v: &TangentVector) -> Result<HSeries> {
    FrechetTable::at(x)?.apply(v)
}

/// Smallest h-order whose coefficient exceeds `tol` in magnitude;
/// `Nh + 1` if none does.
pub fn residual_order(f: &HSeries, tol: f64) -> usize {
    assert!(tol > 0.0);
    f.max_abs_by_order()
        .iter()
        .position(|&m| m > tol)
        .unwrap_or(f.h_order() + 1)
}

/// Residual diagnostics for the end-to-end reduction claim.
#[derive(Debug, Clone)]
pub struct CanonicalReport {
    /// Per-h-order max |coefficient| of the x-variable identity
    /// `(y')²(Σ h E_j y^j - y^M/4) - (h²/2)[y'''/y' - (3/2)(y''/y')²] - Q - hQ₁`.
    pub residual_per_h: Vec<f64>,
    /// Per-h-order residual of the scaling-factor identity
    /// `Q + hQ₁ - h²ψ''/ψ - (y')²(Σ h E_j y^j - y^M/4)`.
    pub psi_residual_per_h: Vec<f64>,
    /// Max coefficient difference between the x-route residual and the
    /// pulled-back functional residual `h·(z'(x))²·F∘z(x)`.
    pub two_route_max_diff: f64,
    /// Per-h-order residual of `eval_f` at the solution (z-variable route).
    pub f_residual_per_h: Vec<f64>,
}

/// The x-variable residual of the canonical-form identity, built from the
/// raw problem data and the transformed unknowns only. Standalone so a
/// stored report can be re-verified without rebuilding the transform.
pub fn canonical_residual_series(
    spec: &PotentialSpec,
    e: &[HSeries],
    y: &HSeries,
    m: usize,
) -> Result<HSeries> {
    let nh = y.h_order();
    let w = y.z_order().saturating_sub(3);
    let yp = y.dz(1).truncated_z(w)?;
    let ypp = y.dz(2).truncated_z(w)?;
    let yppp = y.dz(3).truncated_z(w)?;
    let mut ypow = HSeries::one(nh, w);
    let mut s = HSeries::zero(nh, w);
    let yt = y.truncated_z(w)?;
    for ej in e.iter() {
        s = s.add(&ej.broadcast_z(w)?.h_shift(1).mul(&ypow)?)?;
        ypow = ypow.mul(&yt)?;
    }
    for _ in e.len()..m {
        ypow = ypow.mul(&yt)?;
    }
    s = s.sub(&ypow.scale_re(0.25))?;

    let ypinv = yp.reciprocal()?;
    let bracket = yppp.mul(&ypinv)?.sub(
        &ypp.mul(&ypp)?
            .mul(&ypinv.mul(&ypinv)?)?
            .scale_re(1.5),
    )?;
    yp.mul(&yp)?
        .mul(&s)?
        .sub(&bracket.h_shift(2).scale_re(0.5))?
        .sub(&HSeries::promote(&spec.q_at(w), nh))?
        .sub(&spec.q1_at(nh, w).h_shift(1))
        .map_err(Into::into)
}

/// Residual of the scaling-factor identity `Q + hQ₁ - h²ψ''/ψ = (y')² S`.
pub fn psi_identity_residual_series(
    spec: &PotentialSpec,
    e: &[HSeries],
    y: &HSeries,
    psi: &HSeries,
    m: usize,
) -> Result<HSeries> {
    let nh = y.h_order();
    let w = y.z_order().saturating_sub(3).min(psi.z_order().saturating_sub(2));
    let yp = y.dz(1).truncated_z(w)?;
    let mut ypow = HSeries::one(nh, w);
    let mut s = HSeries::zero(nh, w);
    let yt = y.truncated_z(w)?;
    for ej in e.iter() {
        s = s.add(&ej.broadcast_z(w)?.h_shift(1).mul(&ypow)?)?;
        ypow = ypow.mul(&yt)?;
    }
    for _ in e.len()..m {
        ypow = ypow.mul(&yt)?;
    }
    s = s.sub(&ypow.scale_re(0.25))?;

    let psi_term = psi
        .dz(2)
        .truncated_z(w)?
        .mul(&psi.truncated_z(w)?.reciprocal()?)?
        .h_shift(2);
    HSeries::promote(&spec.q_at(w), nh)
        .add(&spec.q1_at(nh, w).h_shift(1))?
        .sub(&psi_term)?
        .sub(&yp.mul(&yp)?.mul(&s)?)
        .map_err(Into::into)
}

/// End-to-end verification: the canonical-form residual rebuilt directly
/// from `y` (independent of `eval_f`), the scaling-factor identity, the
/// functional residual, and the agreement between the two routes.
pub fn verify_canonical_form(
    spec: &PotentialSpec,
    td: &Transform,
    solution: &StatePoint,
    psi: &HSeries,
    y: &HSeries,
) -> Result<CanonicalReport> {
    let main = canonical_residual_series(spec, solution.e(), y, solution.m())?;
    let psi_resid = psi_identity_residual_series(spec, solution.e(), y, psi, solution.m())?;
    let fv = eval_f(solution, &td.q1_tilde)?;

    // Pull the z-variable residual back to x: R_x = h · (z'(x))² · F∘z(x).
    let wm = main
        .z_order()
        .min(fv.z_order())
        .min(td.z_of_x.trunc_order())
        .min(td.dz_dx.trunc_order());
    let zc = td.z_of_x.truncated(wm)?;
    let dz = td.dz_dx.truncated(wm)?;
    let mapped = fv
        .truncated_z(wm)?
        .compose_z(&zc)?
        .mul_z(&dz.mul(&dz)?)?
        .h_shift(1);
    let two_route_max_diff = mapped.sub(&main.truncated_z(wm)?)?.max_abs();

    Ok(CanonicalReport {
        residual_per_h: main.max_abs_by_order(),
        psi_residual_per_h: psi_resid.max_abs_by_order(),
        two_route_max_diff,
        f_residual_per_h: fv.max_abs_by_order(),
    })
}
