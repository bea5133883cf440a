//! Rigorous bound of the defect delta_i >= sup_{t in J_i} ||R(t)||_{L2},
//! R = d/dt omega - Lap omega - omega^2.
//!
//! On one solver step the trajectory is linear in the local parameter
//! s = (t - t_{k-1})/tau, so R(s) = P0 + s P1 + s^2 P2 where each P_j is the
//! sum of a sine series (order N) and a cosine series (indices to 2N), both
//! known exactly. Hence ||R(s)||^2 is a degree-4 polynomial in s with
//! interval coefficients assembled from exact trigonometric inner products,
//! and its Bernstein coefficients certify the sup over [0, 1]. No sampling,
//! no quadrature, and the Galerkin truncation defect of omega^2 (modes
//! beyond V_N) is included, not discarded.

use thiserror::Error;

use crate::approx::ApproxSolution;
use crate::bounds::BoundsError;
use crate::rigor::{Interval, RigorError};
use crate::spectral::{
    mul_to_cosine, sine_cos_inner, CosSeries, SinCosTable, SineSeries, SpectralError,
};

#[derive(Debug, Error)]
pub enum ResidualError {
    #[error("node range [{a}, {b}] invalid for a solution with {nodes} nodes")]
    BadRange { a: usize, b: usize, nodes: usize },
    #[error(transparent)]
    Rigor(#[from] RigorError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}

impl From<ResidualError> for BoundsError {
    fn from(e: ResidualError) -> BoundsError {
        match e {
            ResidualError::BadRange { a, b, nodes } => BoundsError::BadRange { a, b, nodes },
            ResidualError::Rigor(r) => BoundsError::Rigor(r),
            ResidualError::Spectral(s) => BoundsError::Spectral(s),
        }
    }
}

/// One piece of the residual: a sine part plus a cosine part.
struct TrigPair {
    sin: Option<SineSeries<Interval>>,
    cos: Option<CosSeries<Interval>>,
}

/// Reusable tables for residual evaluation at one (dim, order).
pub struct ResidualContext {
    order: usize,
    table: SinCosTable<Interval>,
}

impl ResidualContext {
    pub fn new(order: usize) -> ResidualContext {
        ResidualContext { order, table: SinCosTable::new(order, 2 * order) }
    }

    /// L2 inner product between two residual pieces.
    fn inner(&self, x: &TrigPair, y: &TrigPair) -> Interval {
        let mut sum = Interval::ZERO;
        if let (Some(sx), Some(sy)) = (&x.sin, &y.sin) {
            sum = sum + sine_l2_inner(sx, sy);
        }
        if let (Some(cx), Some(cy)) = (&x.cos, &y.cos) {
            sum = sum + cx.l2_inner(cy);
        }
        if let (Some(sx), Some(cy)) = (&x.sin, &y.cos) {
            sum = sum + sine_cos_inner(sx, cy, &self.table);
        }
        if let (Some(sy), Some(cx)) = (&y.sin, &x.cos) {
            sum = sum + sine_cos_inner(sy, cx, &self.table);
        }
        sum
    }

    /// Certified sup of ||R|| over one solver step (k-1, k].
    fn step_bound(
        &self,
        omega: &ApproxSolution,
        k: usize,
        nonlinear: bool,
    ) -> Result<Interval, ResidualError> {
        debug_assert_eq!(omega.snapshot(k).order(), self.order);
        let a = omega.snapshot(k - 1).to_rigorous();
        let b_next = omega.snapshot(k).to_rigorous();
        let diff = b_next.sub(&a)?;
        let tau = Interval::point(omega.grid().nodes()[k])
            - Interval::point(omega.grid().nodes()[k - 1]);
        let inv_tau = Interval::ONE.checked_div(tau)?;

        // d/dt omega - Lap omega: sine family
        let dt_part = diff.scale(inv_tau);
        let lap_a = a.laplacian();
        let lap_diff = diff.laplacian();
        let p0_sin = dt_part.sub(&lap_a)?;
        let p1_sin = lap_diff.scale(Interval::point(-1.0));

        // omega^2 = a^2 + 2s a diff + s^2 diff^2: cosine family
        let (p0_cos, p1_cos, p2_cos) = if nonlinear {
            let minus_one = Interval::point(-1.0);
            let a2 = mul_to_cosine(&a, &a)?.scale(minus_one);
            let ab = mul_to_cosine(&a, &diff)?.scale(Interval::point(-2.0));
            let b2 = mul_to_cosine(&diff, &diff)?.scale(minus_one);
            (Some(a2), Some(ab), Some(b2))
        } else {
            (None, None, None)
        };

        let p0 = TrigPair { sin: Some(p0_sin), cos: p0_cos };
        let p1 = TrigPair { sin: Some(p1_sin), cos: p1_cos };
        let p2 = TrigPair { sin: None, cos: p2_cos };

        // ||R(s)||^2 = sum_{r=0}^4 Q_r s^r
        let two = Interval::point(2.0);
        let q0 = self.inner(&p0, &p0);
        let q1 = two * self.inner(&p0, &p1);
        let q2 = two * self.inner(&p0, &p2) + self.inner(&p1, &p1);
        let q3 = two * self.inner(&p1, &p2);
        let q4 = self.inner(&p2, &p2);

        // Bernstein coefficients of a degree-4 polynomial on [0, 1]:
        // b_j = sum_{r<=j} C(j,r)/C(4,r) Q_r.
        let r = |n: f64, d: f64| Interval::point(n) / Interval::point(d);
        let b0 = q0;
        let b1 = q0 + q1 * r(1.0, 4.0);
        let b2 = q0 + q1 * r(1.0, 2.0) + q2 * r(1.0, 6.0);
        let b3 = q0 + q1 * r(3.0, 4.0) + q2 * r(1.0, 2.0) + q3 * r(1.0, 4.0);
        let b4 = q0 + q1 + q2 + q3 + q4;

        let sup_sq = [b0, b1, b2, b3, b4]
            .iter()
            .fold(f64::NEG_INFINITY, |m, b| m.max(b.hi()))
            .max(0.0);
        let delta = Interval::new(0.0, sup_sq).expect("nonnegative").sqrt()?;
        Ok(Interval::new(0.0, delta.hi()).expect("nonnegative"))
    }
}

fn sine_l2_inner(f: &SineSeries<Interval>, g: &SineSeries<Interval>) -> Interval {
    debug_assert!(f.same_shape(g));
    let mut sum = Interval::ZERO;
    for (&a, &b) in f.coeffs().iter().zip(g.coeffs()) {
        sum = sum + a * b;
    }
    sum / Interval::point((1usize << f.dim()) as f64)
}

/// Upper bound of the defect sup over the node range (a, b] for the full
/// nonlinear equation. Returned as [0, delta] since only the upper end is
/// knowable.
pub fn delta_bound(
    omega: &ApproxSolution,
    a: usize,
    b: usize,
) -> Result<Interval, ResidualError> {
    delta_bound_inner(omega, a, b, true)
}

/// Defect bound for the linear heat equation (nonlinearity removed); used
/// by convergence tests.
pub fn delta_bound_linear(
    omega: &ApproxSolution,
    a: usize,
    b: usize,
) -> Result<Interval, ResidualError> {
    delta_bound_inner(omega, a, b, false)
}

fn delta_bound_inner(
    omega: &ApproxSolution,
    a: usize,
    b: usize,
    nonlinear: bool,
) -> Result<Interval, ResidualError> {
    let nodes = omega.grid().nodes().len();
    if a >= b || b >= nodes {
        return Err(ResidualError::BadRange { a, b, nodes });
    }
    let ctx = ResidualContext::new(omega.snapshot(0).order());
    let mut sup = Interval::ZERO;
    for k in (a + 1)..=b {
        let d = ctx.step_bound(omega, k, nonlinear)?;
        if d.hi() > sup.hi() {
            sup = d;
        }
    }
    Ok(sup)
}

/// Same bound, reusing a caller-provided context (the driver calls this in
/// a loop). The `workers` hint parallelizes across solver steps.
pub fn delta_bound_with(
    ctx: &ResidualContext,
    omega: &ApproxSolution,
    a: usize,
    b: usize,
    workers: usize,
) -> Result<Interval, ResidualError> {
    let nodes = omega.grid().nodes().len();
    if a >= b || b >= nodes {
        return Err(ResidualError::BadRange { a, b, nodes });
    }
    let steps: Vec<usize> = ((a + 1)..=b).collect();
    let results: Vec<Result<Interval, ResidualError>> = if workers > 1 && steps.len() > 1 {
        std::thread::scope(|scope| {
            let handles: Vec<_> = steps
                .chunks(steps.len().div_ceil(workers))
                .map(|chunk| {
                    scope.spawn(move || {
                        chunk
                            .iter()
                            .map(|&k| ctx.step_bound(omega, k, true))
                            .collect::<Vec<_>>()
                    })
                })
                .collect();
            handles
                .into_iter()
                .flat_map(|h| h.join().expect("residual worker panicked"))
                .collect()
        })
    } else {
        steps.iter().map(|&k| ctx.step_bound(omega, k, true)).collect()
    };
    let mut sup = Interval::ZERO;
    for r in results {
        let d = r?;
        if d.hi() > sup.hi() {
            sup = d;
        }
    }
    Ok(sup)
}
