//! Finite sine expansions on the unit box and their exact trigonometric
//! algebra.
//!
//! The basis is psi_m(x) = prod_k sin(m_k pi x_k), 1 <= m_k <= N, which is
//! L2-orthogonal with (psi_m, psi_m) = 2^{-d}. Products of two sine series
//! live exactly in the tensor cosine family with indices up to 2N, and all
//! inner products between the sine and cosine families reduce to closed-form
//! one-dimensional integrals. That exactness is what lets the residual and
//! constant bounds avoid quadrature entirely.
//!
//! Series come in two flavours sharing one generic container: plain `f64`
//! coefficients for the approximate solver, `Interval` coefficients for
//! everything rigorous. Conversion widens by zero.

use thiserror::Error;

use crate::rigor::{Interval, PI};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpectralError {
    #[error("dimension {0} not supported (need 1..=3)")]
    BadDimension(usize),
    #[error("order must be at least 1")]
    BadOrder,
    #[error("coefficient count {got} does not match order^dim = {want}")]
    BadLength { got: usize, want: usize },
    #[error("operands have mismatched dimension or order")]
    ShapeMismatch,
    #[error("only the quadratic nonlinearity (p = 2) is implemented, got p = {0}")]
    UnsupportedExponent(u32),
}

/// Scalar abstraction over plain floats and intervals.
///
/// `ratio` must enclose (or equal, for f64) the exact rational num/den, and
/// `inv_pi`/`pi_sq` the corresponding transcendental constants; these are the
/// only scalars the trigonometric tables need.
pub trait Scalar:
    Copy
    + std::ops::Add<Output = Self>
    + std::ops::Sub<Output = Self>
    + std::ops::Mul<Output = Self>
    + std::ops::Neg<Output = Self>
{
    fn zero() -> Self;
    fn from_exact(x: f64) -> Self;
    fn ratio(num: f64, den: f64) -> Self;
    fn inv_pi() -> Self;
    fn pi_sq() -> Self;
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn from_exact(x: f64) -> Self {
        x
    }
    fn ratio(num: f64, den: f64) -> Self {
        num / den
    }
    fn inv_pi() -> Self {
        1.0 / std::f64::consts::PI
    }
    fn pi_sq() -> Self {
        std::f64::consts::PI * std::f64::consts::PI
    }
}

impl Scalar for Interval {
    fn zero() -> Self {
        Interval::ZERO
    }
    fn from_exact(x: f64) -> Self {
        Interval::point(x)
    }
    fn ratio(num: f64, den: f64) -> Self {
        Interval::point(num) / Interval::point(den)
    }
    fn inv_pi() -> Self {
        Interval::ONE / PI
    }
    fn pi_sq() -> Self {
        PI * PI
    }
}

/// A finite sine expansion sum_m a_m prod_k sin(m_k pi x_k) on (0,1)^d.
#[derive(Clone, Debug, PartialEq)]
pub struct SineSeries<C> {
    dim: usize,
    order: usize,
    coeffs: Vec<C>,
}

/// A finite cosine expansion with indices 0..=max_index per axis; the
/// exact home of products of two sine series.
#[derive(Clone, Debug, PartialEq)]
pub struct CosSeries<C> {
    dim: usize,
    max_index: usize,
    coeffs: Vec<C>,
}

#[inline]
fn pow_usize(base: usize, exp: usize) -> usize {
    base.pow(exp as u32)
}

#[inline]
pub(crate) fn decode_index(flat: usize, dim: usize, extent: usize, base: usize) -> [usize; 3] {
    let mut idx = [base; 3];
    let mut rest = flat;
    for slot in idx.iter_mut().take(dim) {
        *slot = rest % extent + base;
        rest /= extent;
    }
    idx
}

impl<C: Scalar> SineSeries<C> {
    pub fn zero(dim: usize, order: usize) -> Result<Self, SpectralError> {
        if !(1..=3).contains(&dim) {
            return Err(SpectralError::BadDimension(dim));
        }
        if order == 0 {
            return Err(SpectralError::BadOrder);
        }
        Ok(SineSeries { dim, order, coeffs: vec![C::zero(); pow_usize(order, dim)] })
    }

    pub fn from_coeffs(dim: usize, order: usize, coeffs: Vec<C>) -> Result<Self, SpectralError> {
        let mut s = Self::zero(dim, order)?;
        if coeffs.len() != s.coeffs.len() {
            return Err(SpectralError::BadLength { got: coeffs.len(), want: s.coeffs.len() });
        }
        s.coeffs = coeffs;
        Ok(s)
    }

    /// Series with a single basis function `m` (1-based per axis).
    pub fn basis(dim: usize, order: usize, m: &[usize], amplitude: C) -> Result<Self, SpectralError> {
        let mut s = Self::zero(dim, order)?;
        let flat = s.flat_of(m)?;
        s.coeffs[flat] = amplitude;
        Ok(s)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn coeffs(&self) -> &[C] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [C] {
        &mut self.coeffs
    }

    fn flat_of(&self, m: &[usize]) -> Result<usize, SpectralError> {
        if m.len() < self.dim {
            return Err(SpectralError::ShapeMismatch);
        }
        let mut flat = 0;
        for k in (0..self.dim).rev() {
            if m[k] < 1 || m[k] > self.order {
                return Err(SpectralError::ShapeMismatch);
            }
            flat = flat * self.order + (m[k] - 1);
        }
        Ok(flat)
    }

    /// Coefficient of psi_m; `m` is 1-based per axis.
    pub fn coeff(&self, m: &[usize]) -> C {
        self.coeffs[self.flat_of(m).expect("index in range")]
    }

    pub fn set_coeff(&mut self, m: &[usize], v: C) {
        let flat = self.flat_of(m).expect("index in range");
        self.coeffs[flat] = v;
    }

    pub fn same_shape(&self, other: &Self) -> bool {
        self.dim == other.dim && self.order == other.order
    }

    pub fn add(&self, other: &Self) -> Result<Self, SpectralError> {
        if !self.same_shape(other) {
            return Err(SpectralError::ShapeMismatch);
        }
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(&a, &b)| a + b)
            .collect();
        Ok(SineSeries { dim: self.dim, order: self.order, coeffs })
    }

    pub fn sub(&self, other: &Self) -> Result<Self, SpectralError> {
        if !self.same_shape(other) {
            return Err(SpectralError::ShapeMismatch);
        }
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(&a, &b)| a - b)
            .collect();
        Ok(SineSeries { dim: self.dim, order: self.order, coeffs })
    }

    pub fn scale(&self, factor: C) -> Self {
        SineSeries {
            dim: self.dim,
            order: self.order,
            coeffs: self.coeffs.iter().map(|&a| a * factor).collect(),
        }
    }

    /// Apply the Laplacian: a_m -> -pi^2 |m|^2 a_m (diagonal, exact).
    pub fn laplacian(&self) -> Self {
        let pi2 = C::pi_sq();
        let mut out = self.clone();
        for (flat, c) in out.coeffs.iter_mut().enumerate() {
            let m = decode_index(flat, self.dim, self.order, 1);
            let m2: usize = m.iter().take(self.dim).map(|&v| v * v).sum();
            *c = -(pi2 * C::from_exact(m2 as f64) * *c);
        }
        out
    }
}

impl SineSeries<f64> {
    /// Pointwise evaluation (approximate mode).
    pub fn eval(&self, x: &[f64]) -> f64 {
        assert!(x.len() >= self.dim);
        let mut sum = 0.0;
        for (flat, &c) in self.coeffs.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            let m = decode_index(flat, self.dim, self.order, 1);
            let mut term = c;
            for k in 0..self.dim {
                term *= (m[k] as f64 * std::f64::consts::PI * x[k]).sin();
            }
            sum += term;
        }
        sum
    }

    /// Exact widening into rigorous mode.
    pub fn to_rigorous(&self) -> SineSeries<Interval> {
        SineSeries {
            dim: self.dim,
            order: self.order,
            coeffs: self.coeffs.iter().map(|&c| Interval::point(c)).collect(),
        }
    }

    pub fn l2_norm_f64(&self) -> f64 {
        let sum: f64 = self.coeffs.iter().map(|c| c * c).sum();
        (sum / pow_usize(2, self.dim) as f64).sqrt()
    }
}

impl<C: Scalar> CosSeries<C> {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn max_index(&self) -> usize {
        self.max_index
    }

    pub fn coeffs(&self) -> &[C] {
        &self.coeffs
    }

    fn zero(dim: usize, max_index: usize) -> Self {
        CosSeries { dim, max_index, coeffs: vec![C::zero(); pow_usize(max_index + 1, dim)] }
    }

    fn flat_of(&self, c: &[usize; 3]) -> usize {
        let ext = self.max_index + 1;
        let mut flat = 0;
        for k in (0..self.dim).rev() {
            flat = flat * ext + c[k];
        }
        flat
    }

    pub fn scale(&self, factor: C) -> Self {
        CosSeries {
            dim: self.dim,
            max_index: self.max_index,
            coeffs: self.coeffs.iter().map(|&a| a * factor).collect(),
        }
    }

    /// L2 inner product of two cosine series of identical shape:
    /// sum_c w_c a_c b_c with w_c = prod_k (c_k == 0 ? 1 : 1/2).
    pub fn l2_inner(&self, other: &Self) -> C {
        assert!(self.dim == other.dim && self.max_index == other.max_index);
        let mut sum = C::zero();
        for (flat, (&a, &b)) in self.coeffs.iter().zip(&other.coeffs).enumerate() {
            let c = decode_index(flat, self.dim, self.max_index + 1, 0);
            let nz = c.iter().take(self.dim).filter(|&&v| v != 0).count();
            let w = C::ratio(1.0, pow_usize(2, nz) as f64);
            sum = sum + w * a * b;
        }
        sum
    }
}

/// Exact expansion of the pointwise product f*g in the tensor cosine family
/// (indices up to f.order + g.order).
pub fn mul_to_cosine<C: Scalar>(
    f: &SineSeries<C>,
    g: &SineSeries<C>,
) -> Result<CosSeries<C>, SpectralError> {
    if f.dim != g.dim {
        return Err(SpectralError::ShapeMismatch);
    }
    let dim = f.dim;
    let m = f.order + g.order;
    let mut out = CosSeries::zero(dim, m);
    let half = C::ratio(1.0, pow_usize(2, dim) as f64);
    for (fa, &ca) in f.coeffs.iter().enumerate() {
        let a = decode_index(fa, dim, f.order, 1);
        for (fb, &cb) in g.coeffs.iter().enumerate() {
            let b = decode_index(fb, dim, g.order, 1);
            let base = ca * cb * half;
            // prod_k [cos(|a-b|) - cos(a+b)] expanded over sign choices
            for subset in 0..(1usize << dim) {
                let mut idx = [0usize; 3];
                let mut neg = false;
                for k in 0..dim {
                    if subset & (1 << k) != 0 {
                        idx[k] = a[k] + b[k];
                        neg = !neg;
                    } else {
                        idx[k] = a[k].abs_diff(b[k]);
                    }
                }
                let flat = out.flat_of(&idx);
                let term = if neg { -base } else { base };
                out.coeffs[flat] = out.coeffs[flat] + term;
            }
        }
    }
    Ok(out)
}

/// Table of the 1-D integrals S(m, c) = int_0^1 sin(m pi x) cos(c pi x) dx,
/// which vanish unless m + c is odd and otherwise equal 2m/((m^2-c^2) pi).
pub struct SinCosTable<C> {
    n: usize,
    m: usize,
    vals: Vec<C>,
}

impl<C: Scalar> SinCosTable<C> {
    pub fn new(n: usize, m: usize) -> Self {
        let mut vals = Vec::with_capacity(n * (m + 1));
        let inv_pi = C::inv_pi();
        for mi in 1..=n {
            for ci in 0..=m {
                let v = if (mi + ci) % 2 == 1 {
                    let num = 2.0 * mi as f64;
                    let den = (mi * mi) as f64 - (ci * ci) as f64;
                    C::ratio(num, den) * inv_pi
                } else {
                    C::zero()
                };
                vals.push(v);
            }
        }
        SinCosTable { n, m, vals }
    }

    #[inline]
    pub fn at(&self, m_sine: usize, c_cos: usize) -> C {
        debug_assert!(m_sine >= 1 && m_sine <= self.n && c_cos <= self.m);
        self.vals[(m_sine - 1) * (self.m + 1) + c_cos]
    }
}

/// Inner product (f, g)_{L2} between a sine series and a cosine series,
/// computed by separable contraction along each axis.
pub fn sine_cos_inner<C: Scalar>(
    f: &SineSeries<C>,
    g: &CosSeries<C>,
    table: &SinCosTable<C>,
) -> C {
    assert!(f.dim == g.dim);
    assert!(table.n >= f.order && table.m >= g.max_index);
    let dim = f.dim;
    let cext = g.max_index + 1;

    // Transform the sine tensor axis by axis into cosine index space.
    let mut data = f.coeffs.clone();
    let mut shape = [1usize; 3];
    for s in shape.iter_mut().take(dim) {
        *s = f.order;
    }
    for axis in 0..dim {
        data = apply_axis(&data, &shape, dim, axis, cext, |m0, c| table.at(m0 + 1, c));
        shape[axis] = cext;
    }
    let mut sum = C::zero();
    for (a, b) in data.iter().zip(&g.coeffs) {
        sum = sum + *a * *b;
    }
    sum
}

/// Contract `data` (row-major, `shape`, `dim` axes) along `axis` with the
/// matrix `mat(in_index, out_index)`, changing that axis extent to
/// `out_extent`.
fn apply_axis<C: Scalar>(
    data: &[C],
    shape: &[usize; 3],
    dim: usize,
    axis: usize,
    out_extent: usize,
    mat: impl Fn(usize, usize) -> C,
) -> Vec<C> {
    let in_extent = shape[axis];
    let stride: usize = shape[..axis].iter().product();
    let outer: usize = shape[axis + 1..dim].iter().product();
    let mut out = vec![C::zero(); stride * out_extent * outer];
    for o in 0..outer {
        for j in 0..out_extent {
            for i in 0..in_extent {
                let m = mat(i, j);
                let src = (o * in_extent + i) * stride;
                let dst = (o * out_extent + j) * stride;
                for s in 0..stride {
                    out[dst + s] = out[dst + s] + data[src + s] * m;
                }
            }
        }
    }
    out
}

/// Enclosure of the L2 norm: (2^{-d} sum a_m^2)^{1/2}.
pub fn l2_norm(f: &SineSeries<Interval>) -> Interval {
    let mut sum = Interval::ZERO;
    for &c in &f.coeffs {
        sum = sum + c.powi(2);
    }
    let scaled = sum * Interval::ratio(1.0, pow_usize(2, f.dim) as f64);
    scaled.pos_part().sqrt().expect("nonnegative")
}

/// Upper bound of the sup norm via the coefficient l1 sum; the lower
/// endpoint is 0 because the l1 sum only bounds from above.
pub fn linf_bound(f: &SineSeries<Interval>) -> Interval {
    let mut sum = Interval::ZERO;
    for &c in &f.coeffs {
        sum = sum + c.abs();
    }
    Interval::new(0.0, sum.hi()).expect("nonnegative upper bound")
}

/// Enclosure of ||f g||_{L2}, exact through the cosine expansion.
pub fn product_l2_norm(
    f: &SineSeries<Interval>,
    g: &SineSeries<Interval>,
) -> Result<Interval, SpectralError> {
    let cos = mul_to_cosine(f, g)?;
    let sq = cos.l2_inner(&cos);
    Ok(sq.pos_part().sqrt().expect("nonnegative"))
}

/// Galerkin projection of f^p onto the sine space of order `n_out`:
/// coefficients 2^d (f^p, psi_m). Only p = 2 is supported.
pub fn galerkin_power<C: Scalar>(
    f: &SineSeries<C>,
    p: u32,
    n_out: usize,
) -> Result<SineSeries<C>, SpectralError> {
    if p != 2 {
        return Err(SpectralError::UnsupportedExponent(p));
    }
    let cos = mul_to_cosine(f, f)?;
    let table = SinCosTable::<C>::new(n_out, cos.max_index());
    Ok(project_cosine(&cos, n_out, &table))
}

/// Projection of a cosine series onto the sine space of order `n_out`:
/// coefficients 2^d (g, psi_m).
pub fn project_cosine<C: Scalar>(
    g: &CosSeries<C>,
    n_out: usize,
    table: &SinCosTable<C>,
) -> SineSeries<C> {
    let dim = g.dim;
    let cext = g.max_index + 1;
    let mut data = g.coeffs.clone();
    let mut shape = [1usize; 3];
    for s in shape.iter_mut().take(dim) {
        *s = cext;
    }
    for axis in 0..dim {
        data = apply_axis(&data, &shape, dim, axis, n_out, |c, m0| table.at(m0 + 1, c));
        shape[axis] = n_out;
    }
    let scale = C::from_exact(pow_usize(2, dim) as f64);
    let coeffs = data.iter().map(|&v| v * scale).collect();
    SineSeries { dim, order: n_out, coeffs }
}
