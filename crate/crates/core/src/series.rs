//! Truncated power-series arithmetic over complex double-precision
//! coefficients.
//!
//! Two nested series types: [`ZSeries`] is a truncated Taylor series in
//! the spatial variable `z`; [`HSeries`] is a truncated series in the
//! semiclassical parameter `h` whose coefficients are `ZSeries` sharing
//! one z-truncation order.
//!
//! Truncation is strict: every operation produces the minimum consistent
//! order and binary operations on mixed orders are an error rather than a
//! silent promotion. Coefficients of a truncated series beyond its stored
//! order are unknown, not zero; zero-padding a generic series fabricates
//! wrong large coefficients once Gevrey growth kicks in. Callers that
//! know a series is an exact polynomial (input data, scalars, monomials)
//! build it at whatever order they need.

use num_complex::Complex64;
use thiserror::Error;

/// Failure kinds for series operations. The kind identifies which
/// precondition was violated; the payload carries context.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SeriesError {
    #[error("truncation orders differ in {op}: {left} vs {right}")]
    TruncationMismatch {
        op: &'static str,
        left: usize,
        right: usize,
    },
    #[error("reciprocal of a series whose constant term vanishes")]
    DivisionByNonUnit,
    #[error("fractional power of a series whose constant term vanishes")]
    NonUnitFractionalPower,
    #[error("composition inner series must have zero constant term, got {0}")]
    CompositionConstantTerm(String),
    #[error("reversion requires f(0)=0 and f'(0)!=0: {0}")]
    ReversionInvalidLinearTerm(String),
}

pub type SResult<T> = std::result::Result<T, SeriesError>;

fn check_orders(op: &'static str, left: usize, right: usize) -> SResult<()> {
    if left != right {
        return Err(SeriesError::TruncationMismatch { op, left, right });
    }
    Ok(())
}

/// Truncated Taylor series in `z`: coefficients of `z^0 ... z^N` where
/// `N` is the truncation order. All coefficients are finite.
#[derive(Clone, Debug, PartialEq)]
pub struct ZSeries {
    coeffs: Vec<Complex64>,
}

impl ZSeries {
    pub fn new(coeffs: Vec<Complex64>) -> Self {
        assert!(!coeffs.is_empty(), "ZSeries needs at least the z^0 slot");
        assert!(
            coeffs.iter().all(|c| c.re.is_finite() && c.im.is_finite()),
            "non-finite ZSeries coefficient"
        );
        ZSeries { coeffs }
    }

    pub fn zero(order: usize) -> Self {
        ZSeries::new(vec![Complex64::new(0.0, 0.0); order + 1])
    }

    pub fn one(order: usize) -> Self {
        ZSeries::constant(Complex64::new(1.0, 0.0), order)
    }

    pub fn constant(c: Complex64, order: usize) -> Self {
        let mut v = vec![Complex64::new(0.0, 0.0); order + 1];
        v[0] = c;
        ZSeries::new(v)
    }

    /// `c·z^degree` truncated at `order`. A degree beyond the order is the
    /// zero series (the monomial truncates away).
    pub fn monomial(c: Complex64, degree: usize, order: usize) -> Self {
        let mut v = vec![Complex64::new(0.0, 0.0); order + 1];
        if degree <= order {
            v[degree] = c;
        }
        ZSeries::new(v)
    }

    /// Convenience constructor from real coefficients.
    pub fn from_re(coeffs: &[f64]) -> Self {
        ZSeries::new(coeffs.iter().map(|&r| Complex64::new(r, 0.0)).collect())
    }

    pub fn trunc_order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Coefficient of `z^k`; `k` must be within the stored orders.
    pub fn coeff(&self, k: usize) -> Complex64 {
        self.coeffs[k]
    }

    /// Restriction to a lower truncation order.
    pub fn truncated(&self, order: usize) -> SResult<Self> {
        if order > self.trunc_order() {
            return Err(SeriesError::TruncationMismatch {
                op: "truncated",
                left: self.trunc_order(),
                right: order,
            });
        }
        Ok(ZSeries::new(self.coeffs[..=order].to_vec()))
    }

    /// Append one unknown-as-zero slot. Only used internally where the
    /// extra coefficient provably multiplies an exact zero (see `revert`).
    fn pad_top_zero(&self) -> Self {
        let mut v = self.coeffs.clone();
        v.push(Complex64::new(0.0, 0.0));
        ZSeries::new(v)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.re == 0.0 && c.im == 0.0)
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn add(&self, rhs: &Self) -> SResult<Self> {
        check_orders("add", self.trunc_order(), rhs.trunc_order())?;
        Ok(ZSeries::new(
            self.coeffs
                .iter()
                .zip(&rhs.coeffs)
                .map(|(a, b)| a + b)
                .collect(),
        ))
    }

    pub fn sub(&self, rhs: &Self) -> SResult<Self> {
        check_orders("sub", self.trunc_order(), rhs.trunc_order())?;
        Ok(ZSeries::new(
            self.coeffs
                .iter()
                .zip(&rhs.coeffs)
                .map(|(a, b)| a - b)
                .collect(),
        ))
    }

    pub fn neg(&self) -> Self {
        ZSeries::new(self.coeffs.iter().map(|a| -a).collect())
    }

    pub fn scale(&self, c: Complex64) -> Self {
        ZSeries::new(self.coeffs.iter().map(|a| a * c).collect())
    }

    pub fn scale_re(&self, r: f64) -> Self {
        self.scale(Complex64::new(r, 0.0))
    }

    /// Cauchy product truncated to the shared order.
    pub fn mul(&self, rhs: &Self) -> SResult<Self> {
        check_orders("mul", self.trunc_order(), rhs.trunc_order())?;
        let n = self.trunc_order();
        if self.is_zero() || rhs.is_zero() {
            return Ok(ZSeries::zero(n));
        }
        let mut out = vec![Complex64::new(0.0, 0.0); n + 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.re == 0.0 && a.im == 0.0 {
                continue;
            }
            for (b, o) in rhs.coeffs[..=n - i].iter().zip(out[i..].iter_mut()) {
                *o += a * b;
            }
        }
        Ok(ZSeries::new(out))
    }

    /// k-fold formal derivative; the output order drops by k (floored at 0).
    pub fn differentiate(&self, k: usize) -> Self {
        debug_assert!(k >= 1);
        let n = self.trunc_order();
        if k > n {
            // Degree-n data determines d^k only when k <= n; for k > n the
            // derivative of the known part is identically zero.
            return ZSeries::zero(0);
        }
        let m = n - k;
        let mut out = vec![Complex64::new(0.0, 0.0); m + 1];
        for j in 0..=m {
            // (j+k)! / j! as an exact small-integer product
            let mut f = 1.0;
            for i in 1..=k {
                f *= (j + i) as f64;
            }
            out[j] = self.coeffs[j + k] * f;
        }
        ZSeries::new(out)
    }

    /// Antiderivative with zero constant term; the order grows by one.
    pub fn integrate(&self) -> Self {
        let n = self.trunc_order();
        let mut out = vec![Complex64::new(0.0, 0.0); n + 2];
        for j in 0..=n {
            out[j + 1] = self.coeffs[j] / ((j + 1) as f64);
        }
        ZSeries::new(out)
    }

    /// Multiplication by `z^k`; the order grows by k (exact shift).
    pub fn z_shift(&self, k: usize) -> Self {
        let n = self.trunc_order();
        let mut out = vec![Complex64::new(0.0, 0.0); n + k + 1];
        out[k..].copy_from_slice(&self.coeffs);
        ZSeries::new(out)
    }

    /// Multiplicative inverse to truncation, by recursive division.
    pub fn reciprocal(&self) -> SResult<Self> {
        let a0 = self.coeffs[0];
        if a0.norm() == 0.0 {
            return Err(SeriesError::DivisionByNonUnit);
        }
        let n = self.trunc_order();
        let inv0 = Complex64::new(1.0, 0.0) / a0;
        let mut out = vec![Complex64::new(0.0, 0.0); n + 1];
        out[0] = inv0;
        for m in 1..=n {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 1..=m {
                acc += self.coeffs[k] * out[m - k];
            }
            out[m] = -inv0 * acc;
        }
        Ok(ZSeries::new(out))
    }

    /// `self ∘ inner` truncated; Horner evaluation in the series ring.
    /// The inner series must have zero constant term.
    pub fn compose(&self, inner: &Self) -> SResult<Self> {
        check_orders("compose", self.trunc_order(), inner.trunc_order())?;
        if inner.coeffs[0].norm() != 0.0 {
            return Err(SeriesError::CompositionConstantTerm(format!(
                "{}",
                inner.coeffs[0]
            )));
        }
        let n = self.trunc_order();
        let mut acc = ZSeries::constant(self.coeffs[n], n);
        for k in (0..n).rev() {
            acc = acc.mul(inner)?;
            acc.coeffs[0] += self.coeffs[k];
        }
        Ok(acc)
    }

    /// Compositional inverse g with `self ∘ g = z` to truncation, by a
    /// Newton iteration whose error valuation doubles each step.
    pub fn revert(&self) -> SResult<Self> {
        let n = self.trunc_order();
        if self.coeffs[0].norm() != 0.0 {
            return Err(SeriesError::ReversionInvalidLinearTerm(format!(
                "f(0) = {}",
                self.coeffs[0]
            )));
        }
        if n < 1 || self.coeffs[1].norm() == 0.0 {
            return Err(SeriesError::ReversionInvalidLinearTerm(
                "f'(0) = 0".to_string(),
            ));
        }
        let c = self.coeffs[1];
        let id = ZSeries::monomial(Complex64::new(1.0, 0.0), 1, n);
        if n == 1 {
            return Ok(ZSeries::monomial(Complex64::new(1.0, 0.0) / c, 1, n));
        }
        let mut g = ZSeries::monomial(Complex64::new(1.0, 0.0) / c, 1, n);
        let fp = self.differentiate(1);
        // Error valuation starts at 2 and at least doubles per step.
        let steps = (usize::BITS - n.leading_zeros()) as usize + 1;
        for _ in 0..steps {
            let resid = self.compose(&g)?.sub(&id)?;
            let inv = fp.compose(&g.truncated(n - 1)?)?.reciprocal()?;
            // resid has zero constant term, so the padded top coefficient
            // of inv only ever multiplies an exact zero.
            let corr = resid.mul(&inv.pad_top_zero())?;
            g = g.sub(&corr)?;
        }
        Ok(g)
    }

    /// `self^p` for a unit series (nonzero constant term), principal branch
    /// of the constant term's power.
    pub fn unit_power(&self, p: f64) -> SResult<Self> {
        let a0 = self.coeffs[0];
        if a0.norm() == 0.0 {
            return Err(SeriesError::NonUnitFractionalPower);
        }
        let n = self.trunc_order();
        let mut out = vec![Complex64::new(0.0, 0.0); n + 1];
        out[0] = a0.powf(p);
        let inv0 = Complex64::new(1.0, 0.0) / a0;
        for m in 1..=n {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 1..=m {
                let w = (p + 1.0) * (k as f64) - (m as f64);
                acc += self.coeffs[k] * out[m - k] * w;
            }
            out[m] = inv0 * acc / (m as f64);
        }
        Ok(ZSeries::new(out))
    }

    /// Exponential to truncation; the scalar exponential of the constant
    /// term multiplies the unit-series part.
    pub fn exp(&self) -> Self {
        let n = self.trunc_order();
        let mut out = vec![Complex64::new(0.0, 0.0); n + 1];
        out[0] = self.coeffs[0].exp();
        for m in 1..=n {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 1..=m {
                acc += self.coeffs[k] * out[m - k] * (k as f64);
            }
            out[m] = acc / (m as f64);
        }
        ZSeries::new(out)
    }

    /// Point evaluation of the stored polynomial part (Horner).
    pub fn eval(&self, z: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for c in self.coeffs.iter().rev() {
            acc = acc * z + c;
        }
        acc
    }
}

/// Truncated series in `h` whose coefficients are `ZSeries` sharing one
/// z-truncation order.
#[derive(Clone, Debug, PartialEq)]
pub struct HSeries {
    coeffs: Vec<ZSeries>,
}

impl HSeries {
    pub fn new(coeffs: Vec<ZSeries>) -> SResult<Self> {
        assert!(!coeffs.is_empty(), "HSeries needs at least the h^0 slot");
        let nz = coeffs[0].trunc_order();
        for c in &coeffs {
            check_orders("HSeries::new", nz, c.trunc_order())?;
        }
        Ok(HSeries { coeffs })
    }

    pub fn zero(h_order: usize, z_order: usize) -> Self {
        HSeries {
            coeffs: vec![ZSeries::zero(z_order); h_order + 1],
        }
    }

    pub fn one(h_order: usize, z_order: usize) -> Self {
        let mut s = Self::zero(h_order, z_order);
        s.coeffs[0] = ZSeries::one(z_order);
        s
    }

    /// Scalar (z-independent) series: z-order 0.
    pub fn from_scalars(coeffs: &[Complex64]) -> Self {
        HSeries {
            coeffs: coeffs.iter().map(|&c| ZSeries::constant(c, 0)).collect(),
        }
    }

    pub fn from_scalars_re(coeffs: &[f64]) -> Self {
        Self::from_scalars(
            &coeffs
                .iter()
                .map(|&r| Complex64::new(r, 0.0))
                .collect::<Vec<_>>(),
        )
    }

    /// Embed an h-independent function of z as the h^0 coefficient (exact:
    /// the higher h-coefficients of such a function are identically zero).
    pub fn promote(z: &ZSeries, h_order: usize) -> Self {
        let mut coeffs = vec![ZSeries::zero(z.trunc_order()); h_order + 1];
        coeffs[0] = z.clone();
        HSeries { coeffs }
    }

    pub fn h_order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn z_order(&self) -> usize {
        self.coeffs[0].trunc_order()
    }

    pub fn coeff(&self, n: usize) -> &ZSeries {
        &self.coeffs[n]
    }

    pub fn coeffs(&self) -> &[ZSeries] {
        &self.coeffs
    }

    pub fn truncated_h(&self, h_order: usize) -> SResult<Self> {
        if h_order > self.h_order() {
            return Err(SeriesError::TruncationMismatch {
                op: "truncated_h",
                left: self.h_order(),
                right: h_order,
            });
        }
        Ok(HSeries {
            coeffs: self.coeffs[..=h_order].to_vec(),
        })
    }

    pub fn truncated_z(&self, z_order: usize) -> SResult<Self> {
        let coeffs = self
            .coeffs
            .iter()
            .map(|c| c.truncated(z_order))
            .collect::<SResult<Vec<_>>>()?;
        Ok(HSeries { coeffs })
    }

    /// Extend a scalar series (z-order 0) to a given z-order. Exact: a
    /// scalar's higher Taylor coefficients are identically zero.
    pub fn broadcast_z(&self, z_order: usize) -> SResult<Self> {
        if self.z_order() != 0 {
            return Err(SeriesError::TruncationMismatch {
                op: "broadcast_z",
                left: self.z_order(),
                right: 0,
            });
        }
        Ok(HSeries {
            coeffs: self
                .coeffs
                .iter()
                .map(|c| ZSeries::constant(c.coeff(0), z_order))
                .collect(),
        })
    }

    pub fn is_z_constant(&self) -> bool {
        self.coeffs
            .iter()
            .all(|c| c.coeffs()[1..].iter().all(|x| x.norm() == 0.0))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.max_abs()).fold(0.0, f64::max)
    }

    /// Max |coefficient| of each h-order.
    pub fn max_abs_by_order(&self) -> Vec<f64> {
        self.coeffs.iter().map(|c| c.max_abs()).collect()
    }

    fn check_shapes(&self, rhs: &Self, op: &'static str) -> SResult<()> {
        check_orders(op, self.h_order(), rhs.h_order())?;
        check_orders(op, self.z_order(), rhs.z_order())
    }

    pub fn add(&self, rhs: &Self) -> SResult<Self> {
        self.check_shapes(rhs, "add")?;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&rhs.coeffs)
            .map(|(a, b)| a.add(b))
            .collect::<SResult<Vec<_>>>()?;
        Ok(HSeries { coeffs })
    }

    pub fn sub(&self, rhs: &Self) -> SResult<Self> {
        self.check_shapes(rhs, "sub")?;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&rhs.coeffs)
            .map(|(a, b)| a.sub(b))
            .collect::<SResult<Vec<_>>>()?;
        Ok(HSeries { coeffs })
    }

    pub fn neg(&self) -> Self {
        HSeries {
            coeffs: self.coeffs.iter().map(|a| a.neg()).collect(),
        }
    }

    pub fn scale(&self, c: Complex64) -> Self {
        HSeries {
            coeffs: self.coeffs.iter().map(|a| a.scale(c)).collect(),
        }
    }

    pub fn scale_re(&self, r: f64) -> Self {
        self.scale(Complex64::new(r, 0.0))
    }

    /// Cauchy product in h with ZSeries products inside.
    pub fn mul(&self, rhs: &Self) -> SResult<Self> {
        self.check_shapes(rhs, "mul")?;
        let nh = self.h_order();
        let nz = self.z_order();
        let azero: Vec<bool> = self.coeffs.iter().map(|c| c.is_zero()).collect();
        let bzero: Vec<bool> = rhs.coeffs.iter().map(|c| c.is_zero()).collect();
        let mut out = vec![ZSeries::zero(nz); nh + 1];
        for i in 0..=nh {
            if azero[i] {
                continue;
            }
            for j in 0..=nh - i {
                if bzero[j] {
                    continue;
                }
                let p = self.coeffs[i].mul(&rhs.coeffs[j])?;
                out[i + j] = out[i + j].add(&p)?;
            }
        }
        Ok(HSeries { coeffs: out })
    }

    /// Multiply every h-coefficient by a fixed function of z.
    pub fn mul_z(&self, z: &ZSeries) -> SResult<Self> {
        let coeffs = self
            .coeffs
            .iter()
            .map(|c| c.mul(z))
            .collect::<SResult<Vec<_>>>()?;
        Ok(HSeries { coeffs })
    }

    /// Multiplication by h^k; the top k coefficient slots are discarded.
    pub fn h_shift(&self, k: usize) -> Self {
        let nh = self.h_order();
        let nz = self.z_order();
        let mut out = vec![ZSeries::zero(nz); nh + 1];
        for n in 0..=nh {
            if n >= k {
                out[n] = self.coeffs[n - k].clone();
            }
        }
        HSeries { coeffs: out }
    }

    /// k-fold z-derivative of every coefficient; z-order drops by k.
    pub fn dz(&self, k: usize) -> Self {
        HSeries {
            coeffs: self.coeffs.iter().map(|c| c.differentiate(k)).collect(),
        }
    }

    /// Reciprocal to truncation; requires the h^0 coefficient to be a unit
    /// series in z.
    pub fn reciprocal(&self) -> SResult<Self> {
        let nh = self.h_order();
        let inv0 = self.coeffs[0].reciprocal()?;
        let mut out = Vec::with_capacity(nh + 1);
        out.push(inv0.clone());
        for m in 1..=nh {
            let mut acc = ZSeries::zero(self.z_order());
            for k in 1..=m {
                if self.coeffs[k].is_zero() || out[m - k].is_zero() {
                    continue;
                }
                acc = acc.add(&self.coeffs[k].mul(&out[m - k])?)?;
            }
            out.push(acc.mul(&inv0)?.neg());
        }
        Ok(HSeries { coeffs: out })
    }

    /// `self^p` for p real, principal branch on the constant term; requires
    /// the h^0 coefficient to be a unit series in z.
    pub fn unit_power(&self, p: f64) -> SResult<Self> {
        let nh = self.h_order();
        let f0 = self.coeffs[0].unit_power(p)?;
        let inv0 = self.coeffs[0].reciprocal()?;
        let mut out = Vec::with_capacity(nh + 1);
        out.push(f0);
        for m in 1..=nh {
            let mut acc = ZSeries::zero(self.z_order());
            for k in 1..=m {
                let w = (p + 1.0) * (k as f64) - (m as f64);
                if w == 0.0 || self.coeffs[k].is_zero() || out[m - k].is_zero() {
                    continue;
                }
                acc = acc.add(&self.coeffs[k].mul(&out[m - k])?.scale_re(w))?;
            }
            out.push(acc.mul(&inv0)?.scale_re(1.0 / m as f64));
        }
        Ok(HSeries { coeffs: out })
    }

    /// Exponential to truncation.
    pub fn exp(&self) -> SResult<Self> {
        let nh = self.h_order();
        let mut out = Vec::with_capacity(nh + 1);
        out.push(self.coeffs[0].exp());
        for m in 1..=nh {
            let mut acc = ZSeries::zero(self.z_order());
            for k in 1..=m {
                if self.coeffs[k].is_zero() {
                    continue;
                }
                acc = acc.add(&self.coeffs[k].mul(&out[m - k])?.scale_re(k as f64))?;
            }
            out.push(acc.scale_re(1.0 / m as f64));
        }
        Ok(HSeries { coeffs: out })
    }

    /// Compose every h-coefficient with a fixed inner series (variable
    /// change in z); the inner series must have zero constant term.
    pub fn compose_z(&self, inner: &ZSeries) -> SResult<Self> {
        let coeffs = self
            .coeffs
            .iter()
            .map(|c| c.compose(inner))
            .collect::<SResult<Vec<_>>>()?;
        Ok(HSeries { coeffs })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn zs(re: &[f64]) -> ZSeries {
        ZSeries::from_re(re)
    }

    fn max_diff(a: &ZSeries, b: &ZSeries) -> f64 {
        a.sub(b).unwrap().max_abs()
    }

    #[test]
    fn add_examples() {
        // (1+z) + (1-z) = 2
        let s = zs(&[1.0, 1.0]).add(&zs(&[1.0, -1.0])).unwrap();
        assert_eq!(s, zs(&[2.0, 0.0]));
        // 0 + f = f
        let f = zs(&[0.5, -0.25, 3.0]);
        assert_eq!(ZSeries::zero(2).add(&f).unwrap(), f);
        // (z+z^2) + z^2 = z + 2z^2
        let s = zs(&[0.0, 1.0, 1.0]).add(&zs(&[0.0, 0.0, 1.0])).unwrap();
        assert_eq!(s, zs(&[0.0, 1.0, 2.0]));
        assert!(matches!(
            zs(&[1.0]).add(&zs(&[1.0, 2.0])),
            Err(SeriesError::TruncationMismatch { .. })
        ));
    }

    #[test]
    fn mul_examples() {
        // (1+z)(1-z) = 1 - z^2 at Nz >= 2
        let s = zs(&[1.0, 1.0, 0.0]).mul(&zs(&[1.0, -1.0, 0.0])).unwrap();
        assert_eq!(s, zs(&[1.0, 0.0, -1.0]));
        // f * 1 = f
        let f = zs(&[2.0, -1.0, 0.5]);
        assert_eq!(f.mul(&ZSeries::one(2)).unwrap(), f);
        // (1+h)(1+h) with Nh=1 -> 1+2h
        let a = HSeries::from_scalars_re(&[1.0, 1.0]);
        let p = a.mul(&a).unwrap();
        assert_eq!(p, HSeries::from_scalars_re(&[1.0, 2.0]));
    }

    #[test]
    fn differentiate_examples() {
        // d/dz z^2 = 2z
        assert_eq!(zs(&[0.0, 0.0, 1.0]).differentiate(1), zs(&[0.0, 2.0]));
        // third derivative of z^2 -> 0 with order collapse
        assert_eq!(zs(&[0.0, 0.0, 1.0]).differentiate(3), zs(&[0.0]));
        // d/dz (1+z+z^2+z^3) = 1+2z+3z^2
        assert_eq!(
            zs(&[1.0, 1.0, 1.0, 1.0]).differentiate(1),
            zs(&[1.0, 2.0, 3.0])
        );
    }

    #[test]
    fn integrate_examples() {
        assert_eq!(zs(&[1.0]).integrate(), zs(&[0.0, 1.0]));
        assert_eq!(zs(&[0.0, 1.0]).integrate(), zs(&[0.0, 0.0, 0.5]));
        assert_eq!(zs(&[1.0, 2.0]).integrate(), zs(&[0.0, 1.0, 1.0]));
    }

    #[test]
    fn reciprocal_examples() {
        // 1/(1-z) = geometric series
        let r = zs(&[1.0, -1.0, 0.0, 0.0]).reciprocal().unwrap();
        assert!(max_diff(&r, &zs(&[1.0, 1.0, 1.0, 1.0])) < 1e-15);
        assert_eq!(ZSeries::one(3).reciprocal().unwrap(), ZSeries::one(3));
        // 1/(2+z) at Nz=2: derived by checking a*result = 1
        let a = zs(&[2.0, 1.0, 0.0]);
        let r = a.reciprocal().unwrap();
        assert!(max_diff(&r, &zs(&[0.5, -0.25, 0.125])) < 1e-15);
        assert!(max_diff(&a.mul(&r).unwrap(), &ZSeries::one(2)) < 1e-15);
        assert!(matches!(
            zs(&[0.0, 1.0]).reciprocal(),
            Err(SeriesError::DivisionByNonUnit)
        ));
    }

    #[test]
    fn compose_examples() {
        // (z+z^2) o (2z) = 2z + 4z^2
        let s = zs(&[0.0, 1.0, 1.0]).compose(&zs(&[0.0, 2.0, 0.0])).unwrap();
        assert_eq!(s, zs(&[0.0, 2.0, 4.0]));
        // f o z = f
        let f = zs(&[3.0, -1.0, 2.0]);
        let id = ZSeries::monomial(c(1.0), 1, 2);
        assert!(max_diff(&f.compose(&id).unwrap(), &f) < 1e-15);
        // geometric o z^2 at Nz=4: 1 + z^2 + z^4
        let geo = zs(&[1.0, 1.0, 1.0, 1.0, 1.0]);
        let s = geo.compose(&zs(&[0.0, 0.0, 1.0, 0.0, 0.0])).unwrap();
        assert!(max_diff(&s, &zs(&[1.0, 0.0, 1.0, 0.0, 1.0])) < 1e-15);
        assert!(matches!(
            f.compose(&zs(&[1.0, 1.0, 0.0])),
            Err(SeriesError::CompositionConstantTerm(_))
        ));
    }

    /// Independent reversion oracle: first-order residual correction,
    /// gaining one valid order per sweep.
    fn revert_oracle(f: &ZSeries) -> ZSeries {
        let n = f.trunc_order();
        let c1 = f.coeff(1);
        let id = ZSeries::monomial(c(1.0), 1, n);
        let mut g = id.scale(c(1.0) / c1);
        for _ in 0..=n {
            let resid = f.compose(&g).unwrap().sub(&id).unwrap();
            g = g.sub(&resid.scale(c(1.0) / c1)).unwrap();
        }
        g
    }

    #[test]
    fn revert_examples() {
        let id4 = ZSeries::monomial(c(1.0), 1, 4);
        assert!(max_diff(&id4.revert().unwrap(), &id4) < 1e-15);
        let two_z = ZSeries::monomial(c(2.0), 1, 3);
        assert!(max_diff(&two_z.revert().unwrap(), &ZSeries::monomial(c(0.5), 1, 3)) < 1e-15);
        // revert(z+z^2) = z - z^2 + 2z^3 - 5z^4, cross-checked against the
        // fixed-point oracle and by composing back.
        let f = zs(&[0.0, 1.0, 1.0, 0.0, 0.0]);
        let g = f.revert().unwrap();
        let expect = zs(&[0.0, 1.0, -1.0, 2.0, -5.0]);
        assert!(max_diff(&g, &expect) < 1e-12);
        assert!(max_diff(&g, &revert_oracle(&f)) < 1e-12);
        assert!(max_diff(&f.compose(&g).unwrap(), &ZSeries::monomial(c(1.0), 1, 4)) < 1e-12);
        assert!(matches!(
            zs(&[1.0, 1.0]).revert(),
            Err(SeriesError::ReversionInvalidLinearTerm(_))
        ));
        assert!(matches!(
            zs(&[0.0, 0.0, 1.0]).revert(),
            Err(SeriesError::ReversionInvalidLinearTerm(_))
        ));
    }

    #[test]
    fn unit_power_examples() {
        // (1+z)^(1/2) at Nz=2, derived by squaring back
        let a = zs(&[1.0, 1.0, 0.0]);
        let r = a.unit_power(0.5).unwrap();
        assert!(max_diff(&r, &zs(&[1.0, 0.5, -0.125])) < 1e-15);
        assert!(max_diff(&r.mul(&r).unwrap(), &a) < 1e-15);
        // a^1 = a
        let b = zs(&[2.0, -0.5, 0.25, 1.0]);
        assert!(max_diff(&b.unit_power(1.0).unwrap(), &b) < 1e-14);
        // (1+z)^(-1) matches reciprocal
        let a = zs(&[1.0, 1.0, 0.0, 0.0]);
        assert!(max_diff(&a.unit_power(-1.0).unwrap(), &a.reciprocal().unwrap()) < 1e-14);
        assert!(matches!(
            zs(&[0.0, 1.0]).unit_power(0.5),
            Err(SeriesError::NonUnitFractionalPower)
        ));
    }

    #[test]
    fn exp_examples() {
        assert_eq!(ZSeries::zero(2).exp(), ZSeries::one(2));
        let e = zs(&[0.0, 1.0, 0.0, 0.0]).exp();
        assert!(max_diff(&e, &zs(&[1.0, 1.0, 0.5, 1.0 / 6.0])) < 1e-15);
        // exp(z+z^2) at Nz=2: verified through (result)' = (1+2z) * result
        let a = zs(&[0.0, 1.0, 1.0]);
        let e = a.exp();
        assert!(max_diff(&e, &zs(&[1.0, 1.0, 1.5])) < 1e-15);
        let lhs = e.differentiate(1);
        let rhs = a.differentiate(1).mul(&e.truncated(1).unwrap()).unwrap();
        assert!(max_diff(&lhs, &rhs) < 1e-15);
    }

    #[test]
    fn h_shift_examples() {
        let one = HSeries::one(2, 0);
        let h = one.h_shift(1);
        assert_eq!(h, HSeries::from_scalars_re(&[0.0, 1.0, 0.0]));
        let f = HSeries::from_scalars_re(&[1.0, 2.0, 3.0]);
        assert_eq!(f.h_shift(0), f);
        // (1+h) * h^2 at Nh=3 -> h^2 + h^3
        let g = HSeries::from_scalars_re(&[1.0, 1.0, 0.0, 0.0]).h_shift(2);
        assert_eq!(g, HSeries::from_scalars_re(&[0.0, 0.0, 1.0, 1.0]));
    }

    #[test]
    fn hseries_shape_checks() {
        let bad = HSeries::new(vec![ZSeries::zero(2), ZSeries::zero(3)]);
        assert!(matches!(bad, Err(SeriesError::TruncationMismatch { .. })));
        let h = HSeries::zero(2, 3);
        assert_eq!(h.h_order(), 2);
        assert_eq!(h.z_order(), 3);
        assert!(HSeries::from_scalars_re(&[1.0, 2.0]).is_z_constant());
    }

    #[test]
    fn hseries_reciprocal_and_power() {
        // 1/(1 + h*(1+z)) has coefficients (-(1+z))^n
        let nz = 3;
        let one_z = ZSeries::one(nz);
        let upz = zs(&[1.0, 1.0, 0.0, 0.0]);
        let a = HSeries::new(vec![one_z.clone(), upz.clone(), ZSeries::zero(nz)]).unwrap();
        let r = a.reciprocal().unwrap();
        assert!(max_diff(r.coeff(0), &one_z) < 1e-15);
        assert!(max_diff(r.coeff(1), &upz.neg()) < 1e-15);
        assert!(max_diff(r.coeff(2), &upz.mul(&upz).unwrap()) < 1e-15);
        assert!(max_diff(
            &a.mul(&r).unwrap().coeff(0).clone(),
            &one_z
        ) < 1e-15);
        // unit_power at p=-1 agrees with reciprocal
        let p = a.unit_power(-1.0).unwrap();
        for n in 0..=2 {
            assert!(max_diff(p.coeff(n), r.coeff(n)) < 1e-14);
        }
    }

    fn arb_zseries(order: usize) -> impl Strategy<Value = ZSeries> {
        proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), order + 1).prop_map(|v| {
            ZSeries::new(v.into_iter().map(|(r, i)| Complex64::new(r, i)).collect())
        })
    }

    fn arb_hseries(nh: usize, nz: usize) -> impl Strategy<Value = HSeries> {
        proptest::collection::vec(arb_zseries(nz), nh + 1)
            .prop_map(|v| HSeries::new(v).unwrap())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn ring_axioms(a in arb_zseries(6), b in arb_zseries(6), d in arb_zseries(6)) {
            let tol = 1e-12;
            prop_assert!(max_diff(&a.add(&b).unwrap(), &b.add(&a).unwrap()) < tol);
            prop_assert!(max_diff(&a.mul(&b).unwrap(), &b.mul(&a).unwrap()) < tol);
            let assoc_l = a.mul(&b).unwrap().mul(&d).unwrap();
            let assoc_r = a.mul(&b.mul(&d).unwrap()).unwrap();
            prop_assert!(max_diff(&assoc_l, &assoc_r) < tol);
            let dist_l = a.mul(&b.add(&d).unwrap()).unwrap();
            let dist_r = a.mul(&b).unwrap().add(&a.mul(&d).unwrap()).unwrap();
            prop_assert!(max_diff(&dist_l, &dist_r) < tol);
        }

        #[test]
        fn hseries_ring_axioms(a in arb_hseries(4, 3), b in arb_hseries(4, 3), d in arb_hseries(4, 3)) {
            let tol = 1e-12;
            let assoc_l = a.mul(&b).unwrap().mul(&d).unwrap();
            let assoc_r = a.mul(&b.mul(&d).unwrap()).unwrap();
            prop_assert!(assoc_l.sub(&assoc_r).unwrap().max_abs() < tol);
            let dist_l = a.mul(&b.add(&d).unwrap()).unwrap();
            let dist_r = a.mul(&b).unwrap().add(&a.mul(&d).unwrap()).unwrap();
            prop_assert!(dist_l.sub(&dist_r).unwrap().max_abs() < tol);
        }

        #[test]
        fn mul_reciprocal_is_one(mut a in arb_zseries(8)) {
            // push the constant term away from zero
            let mut coeffs = a.coeffs().to_vec();
            coeffs[0] += Complex64::new(2.0, 0.0);
            a = ZSeries::new(coeffs);
            let r = a.reciprocal().unwrap();
            prop_assert!(max_diff(&a.mul(&r).unwrap(), &ZSeries::one(8)) < 1e-12);
        }

        #[test]
        fn compose_revert_roundtrip(a in arb_zseries(6)) {
            // force f(0)=0, f'(0)=1
            let mut coeffs = a.coeffs().to_vec();
            coeffs[0] = Complex64::new(0.0, 0.0);
            coeffs[1] = Complex64::new(1.0, 0.0);
            let f = ZSeries::new(coeffs);
            let g = f.revert().unwrap();
            let id = ZSeries::monomial(Complex64::new(1.0, 0.0), 1, 6);
            prop_assert!(max_diff(&f.compose(&g).unwrap(), &id) < 1e-10);
            prop_assert!(max_diff(&g.compose(&f).unwrap(), &id) < 1e-10);
        }

        #[test]
        fn unit_power_group_laws(a in arb_zseries(6), p in -1.5f64..1.5, q in -1.5f64..1.5) {
            let mut coeffs = a.coeffs().to_vec();
            coeffs[0] = Complex64::new(2.0, 0.0) + coeffs[0] * 0.25;
            let a = ZSeries::new(coeffs);
            let fp = a.unit_power(p).unwrap();
            let fq = a.unit_power(q).unwrap();
            let fpq = a.unit_power(p + q).unwrap();
            prop_assert!(max_diff(&fp.mul(&fq).unwrap(), &fpq) < 1e-10);
            let fmp = a.unit_power(-p).unwrap();
            prop_assert!(max_diff(&fp.mul(&fmp).unwrap(), &ZSeries::one(6)) < 1e-10);
        }

        #[test]
        fn exp_is_homomorphic(a in arb_zseries(6), b in arb_zseries(6)) {
            let lhs = a.add(&b).unwrap().exp();
            let rhs = a.exp().mul(&b.exp()).unwrap();
            prop_assert!(max_diff(&lhs, &rhs) < 1e-11);
        }

        #[test]
        fn differentiate_after_integrate_is_identity(a in arb_zseries(7)) {
            prop_assert!(max_diff(&a.integrate().differentiate(1), &a) < 1e-14);
        }

        #[test]
        fn hseries_exp_homomorphic(a in arb_hseries(3, 2), b in arb_hseries(3, 2)) {
            let lhs = a.add(&b).unwrap().exp().unwrap();
            let rhs = a.exp().unwrap().mul(&b.exp().unwrap()).unwrap();
            prop_assert!(lhs.sub(&rhs).unwrap().max_abs() < 1e-11);
        }
    }
}
