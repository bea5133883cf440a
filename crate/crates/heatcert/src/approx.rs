//! The approximate solution: sine-spectral Galerkin semidiscretization of
//! u_t - Lap u = u^2, advanced by Crank-Nicolson in time and stored as
//! piecewise-linear-in-time coefficient trajectories.
//!
//! Everything here runs in plain floating point; the rigorous layers bound
//! whatever this solver produces, so solver accuracy affects tightness of the
//! certificates but never their validity.

use std::io::Write;

use thiserror::Error;

use crate::spectral::{
    decode_index, galerkin_power, mul_to_cosine, project_cosine, SinCosTable, SineSeries,
    SpectralError,
};

#[derive(Debug, Error)]
pub enum ApproxError {
    #[error("time grid must be strictly increasing with at least two nodes")]
    BadGrid,
    #[error("Newton iteration did not reach tol={tol:e} within {iters} iterations (residual {residual:e}) at step {step}")]
    StepFailure { step: usize, iters: usize, tol: f64, residual: f64 },
    #[error("linear solve failed: singular Jacobian")]
    SingularJacobian,
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error("initial data has higher order than the solver space")]
    InitialDataTooFine,
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// Strictly increasing time nodes t_0 < t_1 < ... < t_n. A single node is
/// allowed and describes a trajectory that has not been advanced yet.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeGrid {
    nodes: Vec<f64>,
}

impl TimeGrid {
    pub fn new(nodes: Vec<f64>) -> Result<TimeGrid, ApproxError> {
        if nodes.is_empty() || nodes.iter().any(|t| t.is_nan()) || nodes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(ApproxError::BadGrid);
        }
        Ok(TimeGrid { nodes })
    }

    /// Uniform grid with `steps` intervals on [t0, t1].
    pub fn uniform(t0: f64, t1: f64, steps: usize) -> Result<TimeGrid, ApproxError> {
        if steps == 0 || t0.is_nan() || t1.is_nan() || t0 >= t1 {
            return Err(ApproxError::BadGrid);
        }
        let nodes = (0..=steps)
            .map(|i| t0 + (t1 - t0) * i as f64 / steps as f64)
            .collect();
        TimeGrid::new(nodes)
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn num_steps(&self) -> usize {
        self.nodes.len() - 1
    }

    /// Step length tau_i = t_i - t_{i-1}; `i` is 1-based.
    pub fn step(&self, i: usize) -> f64 {
        self.nodes[i] - self.nodes[i - 1]
    }
}

/// Reusable tables for one (dim, order) configuration of the solver.
pub struct CnWorkspace {
    dim: usize,
    order: usize,
    /// pi^2 |m|^2 for each flattened index
    lambda: Vec<f64>,
    /// projection table for the nonlinear term
    table: SinCosTable<f64>,
    /// 1-D triple products I(a,b,m) = int sin(a.) sin(b.) sin(m.), flattened
    triple: Vec<f64>,
}

fn triple_1d(a: usize, b: usize, m: usize) -> f64 {
    // int_0^1 sin sin sin = 1/2 [ J(|a-b|, m) - J(a+b, m) ]
    fn j(p: usize, q: usize) -> f64 {
        if (p + q) % 2 == 1 {
            2.0 * q as f64 / (((q * q) as f64 - (p * p) as f64) * std::f64::consts::PI)
        } else {
            0.0
        }
    }
    0.5 * (j(a.abs_diff(b), m) - j(a + b, m))
}

impl CnWorkspace {
    pub fn new(dim: usize, order: usize) -> Result<CnWorkspace, ApproxError> {
        let probe: SineSeries<f64> = SineSeries::zero(dim, order)?;
        let len = probe.coeffs().len();
        let mut lambda = vec![0.0; len];
        for (flat, l) in lambda.iter_mut().enumerate() {
            let m = decode_index(flat, dim, order, 1);
            let m2: usize = m.iter().take(dim).map(|&v| v * v).sum();
            *l = std::f64::consts::PI.powi(2) * m2 as f64;
        }
        let table = SinCosTable::new(order, 2 * order);
        let mut triple = vec![0.0; order * order * order];
        for a in 1..=order {
            for b in 1..=order {
                for m in 1..=order {
                    triple[((a - 1) * order + (b - 1)) * order + (m - 1)] = triple_1d(a, b, m);
                }
            }
        }
        Ok(CnWorkspace { dim, order, lambda, table, triple })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn order(&self) -> usize {
        self.order
    }

    #[inline]
    fn tr(&self, a: usize, b: usize, m: usize) -> f64 {
        self.triple[((a - 1) * self.order + (b - 1)) * self.order + (m - 1)]
    }

    /// Galerkin coefficients of u^2: A_m = 2^d (u^2, psi_m).
    fn square_coeffs(&self, u: &SineSeries<f64>) -> Vec<f64> {
        let cos = mul_to_cosine(u, u).expect("same shape");
        project_cosine(&cos, self.order, &self.table).coeffs().to_vec()
    }

    /// dA_m/dc_b = 2^{d+1} (u psi_b, psi_m), written into `jac` (row m, col b)
    /// scaled by `scale`.
    fn add_square_jacobian(&self, u: &[f64], scale: f64, jac: &mut [f64]) {
        let n = self.order;
        let len = u.len();
        let two_d = (1usize << self.dim) as f64;
        let factor = scale * 2.0 * two_d;
        match self.dim {
            1 => {
                for m in 0..len {
                    for b in 0..len {
                        let mut s = 0.0;
                        for (a, &ca) in u.iter().enumerate() {
                            s += ca * self.tr(a + 1, b + 1, m + 1);
                        }
                        jac[m * len + b] += factor * s;
                    }
                }
            }
            2 => {
                // staged contraction: g[b1][m1][a2] = sum_a1 u[a1,a2] I(a1,b1,m1)
                let mut g = vec![0.0; n * n * n];
                for b1 in 0..n {
                    for m1 in 0..n {
                        for a2 in 0..n {
                            let mut s = 0.0;
                            for a1 in 0..n {
                                s += u[a2 * n + a1] * self.tr(a1 + 1, b1 + 1, m1 + 1);
                            }
                            g[(b1 * n + m1) * n + a2] = s;
                        }
                    }
                }
                for m2 in 0..n {
                    for m1 in 0..n {
                        let row = m2 * n + m1;
                        for b2 in 0..n {
                            for b1 in 0..n {
                                let mut s = 0.0;
                                for a2 in 0..n {
                                    s += g[(b1 * n + m1) * n + a2] * self.tr(a2 + 1, b2 + 1, m2 + 1);
                                }
                                jac[row * len + b2 * n + b1] += factor * s;
                            }
                        }
                    }
                }
            }
            _ => {
                for m in 0..len {
                    let mi = decode_index(m, self.dim, n, 1);
                    for b in 0..len {
                        let bi = decode_index(b, self.dim, n, 1);
                        let mut s = 0.0;
                        for (a, &ca) in u.iter().enumerate() {
                            if ca == 0.0 {
                                continue;
                            }
                            let ai = decode_index(a, self.dim, n, 1);
                            let mut t = ca;
                            for k in 0..self.dim {
                                t *= self.tr(ai[k], bi[k], mi[k]);
                            }
                            s += t;
                        }
                        jac[m * len + b] += factor * s;
                    }
                }
            }
        }
    }

    /// One Crank-Nicolson step of length `tau` from `u_prev`; Newton on the
    /// tau-scaled coefficient system. Returns the new snapshot and the final
    /// Newton residual.
    pub fn step(
        &self,
        u_prev: &SineSeries<f64>,
        tau: f64,
        tol: f64,
        nonlinear: bool,
    ) -> Result<(SineSeries<f64>, f64), ApproxError> {
        assert!(tau > 0.0 && tau.is_finite());
        let len = u_prev.coeffs().len();
        let prev = u_prev.coeffs();
        let a_prev = if nonlinear { self.square_coeffs(u_prev) } else { vec![0.0; len] };

        // residual of the tau-scaled system:
        // F_m = (c_m - prev_m) + tau [ lambda_m (c_m + prev_m)/2 - (A_m(c) + A_prev_m)/2 ]
        let residual = |c: &SineSeries<f64>, a_c: &[f64], out: &mut [f64]| {
            let cc = c.coeffs();
            for m in 0..len {
                out[m] = (cc[m] - prev[m])
                    + tau * (0.5 * self.lambda[m] * (cc[m] + prev[m])
                        - 0.5 * (a_c[m] + a_prev[m]));
            }
        };

        let mut u = u_prev.clone();
        let mut f = vec![0.0; len];
        let mut res_norm = f64::MAX;
        const MAX_ITERS: usize = 50;
        for iter in 0..MAX_ITERS {
            let a_c = if nonlinear { self.square_coeffs(&u) } else { vec![0.0; len] };
            residual(&u, &a_c, &mut f);
            res_norm = f.iter().map(|x| x * x).sum::<f64>().sqrt();
            if res_norm <= tol {
                return Ok((u, res_norm));
            }
            // Jacobian: I + tau [ diag(lambda)/2 - dA/dc / 2 ]
            let mut jac = vec![0.0; len * len];
            for m in 0..len {
                jac[m * len + m] = 1.0 + tau * 0.5 * self.lambda[m];
            }
            if nonlinear {
                self.add_square_jacobian(u.coeffs(), -0.5 * tau, &mut jac);
            }
            let mut rhs: Vec<f64> = f.iter().map(|x| -x).collect();
            lu_solve_in_place(&mut jac, &mut rhs, len)?;
            for (cm, dm) in u.coeffs_mut().iter_mut().zip(&rhs) {
                *cm += dm;
            }
            let _ = iter;
        }
        Err(ApproxError::StepFailure { step: 0, iters: MAX_ITERS, tol, residual: res_norm })
    }
}

/// Dense LU with partial pivoting, solving in place.
fn lu_solve_in_place(a: &mut [f64], b: &mut [f64], n: usize) -> Result<(), ApproxError> {
    for col in 0..n {
        let mut pivot = col;
        let mut best = a[col * n + col].abs();
        for row in col + 1..n {
            let v = a[row * n + col].abs();
            if v > best {
                best = v;
                pivot = row;
            }
        }
        if best == 0.0 || !best.is_finite() {
            return Err(ApproxError::SingularJacobian);
        }
        if pivot != col {
            for k in 0..n {
                a.swap(col * n + k, pivot * n + k);
            }
            b.swap(col, pivot);
        }
        let d = a[col * n + col];
        for row in col + 1..n {
            let factor = a[row * n + col] / d;
            if factor == 0.0 {
                continue;
            }
            a[row * n + col] = 0.0;
            for k in col + 1..n {
                a[row * n + k] -= factor * a[col * n + k];
            }
            b[row] -= factor * b[col];
        }
    }
    for col in (0..n).rev() {
        let mut s = b[col];
        for k in col + 1..n {
            s -= a[col * n + k] * b[k];
        }
        b[col] = s / a[col * n + col];
    }
    Ok(())
}

/// One Crank-Nicolson step for the full nonlinear equation.
pub fn cn_step(
    u_prev: &SineSeries<f64>,
    tau: f64,
    order: usize,
    tol: f64,
) -> Result<SineSeries<f64>, ApproxError> {
    let ws = CnWorkspace::new(u_prev.dim(), order)?;
    let u = embed(u_prev, order)?;
    Ok(ws.step(&u, tau, tol, true)?.0)
}

/// One Crank-Nicolson step for the linear heat equation (nonlinearity off);
/// used by convergence and symmetry tests.
pub fn cn_step_linear(
    u_prev: &SineSeries<f64>,
    tau: f64,
    order: usize,
    tol: f64,
) -> Result<SineSeries<f64>, ApproxError> {
    let ws = CnWorkspace::new(u_prev.dim(), order)?;
    let u = embed(u_prev, order)?;
    Ok(ws.step(&u, tau, tol, false)?.0)
}

fn embed(u: &SineSeries<f64>, order: usize) -> Result<SineSeries<f64>, ApproxError> {
    if u.order() == order {
        return Ok(u.clone());
    }
    if u.order() > order {
        return Err(ApproxError::InitialDataTooFine);
    }
    let mut out = SineSeries::zero(u.dim(), order)?;
    for (flat, &c) in u.coeffs().iter().enumerate() {
        if c != 0.0 {
            let m = decode_index(flat, u.dim(), u.order(), 1);
            out.set_coeff(&m[..u.dim()], c);
        }
    }
    Ok(out)
}

/// The approximate solution: snapshots at the grid nodes, interpolated
/// linearly in time between them.
#[derive(Clone, Debug)]
pub struct ApproxSolution {
    grid: TimeGrid,
    snapshots: Vec<SineSeries<f64>>,
    newton_residuals: Vec<f64>,
}

impl ApproxSolution {
    pub fn new(
        grid: TimeGrid,
        snapshots: Vec<SineSeries<f64>>,
        newton_residuals: Vec<f64>,
    ) -> Result<ApproxSolution, ApproxError> {
        if snapshots.len() != grid.nodes().len() {
            return Err(ApproxError::BadGrid);
        }
        Ok(ApproxSolution { grid, snapshots, newton_residuals })
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn snapshots(&self) -> &[SineSeries<f64>] {
        &self.snapshots
    }

    pub fn snapshot(&self, i: usize) -> &SineSeries<f64> {
        &self.snapshots[i]
    }

    pub fn newton_residuals(&self) -> &[f64] {
        &self.newton_residuals
    }

    /// Value at time t; exact snapshot at the nodes, linear in between.
    pub fn at_time(&self, t: f64) -> SineSeries<f64> {
        let nodes = self.grid.nodes();
        if let Some(pos) = nodes.iter().position(|&n| n == t) {
            return self.snapshots[pos].clone();
        }
        assert!(
            t >= nodes[0] && t <= *nodes.last().unwrap(),
            "time {t} outside the solution range"
        );
        let i = nodes.partition_point(|&n| n < t);
        let (t0, t1) = (nodes[i - 1], nodes[i]);
        let s = (t - t0) / (t1 - t0);
        let a = &self.snapshots[i - 1];
        let b = &self.snapshots[i];
        a.scale(1.0 - s).add(&b.scale(s)).expect("same shape")
    }

    /// Exact time derivative on interval J_i (1-based): (u_i - u_{i-1})/tau_i.
    pub fn time_derivative(&self, i: usize) -> SineSeries<f64> {
        assert!(i >= 1 && i < self.snapshots.len());
        let tau = self.grid.step(i);
        self.snapshots[i]
            .sub(&self.snapshots[i - 1])
            .expect("same shape")
            .scale(1.0 / tau)
    }

    /// CSV export: one row per (node, multi-index) pair.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<(), ApproxError> {
        let dim = self.snapshots[0].dim();
        write!(w, "t")?;
        for k in 1..=dim {
            write!(w, ",m_{k}")?;
        }
        writeln!(w, ",coefficient")?;
        for (node, snap) in self.grid.nodes().iter().zip(&self.snapshots) {
            for (flat, &c) in snap.coeffs().iter().enumerate() {
                let m = decode_index(flat, dim, snap.order(), 1);
                write!(w, "{node}")?;
                for mk in m.iter().take(dim) {
                    write!(w, ",{mk}")?;
                }
                writeln!(w, ",{c}")?;
            }
        }
        Ok(())
    }
}

/// Fourier-Galerkin + Crank-Nicolson solve over a whole grid.
pub fn solve(
    u0: &SineSeries<f64>,
    grid: &TimeGrid,
    order: usize,
    tol: f64,
) -> Result<ApproxSolution, ApproxError> {
    solve_inner(u0, grid, order, tol, true)
}

/// Linear-heat variant of [`solve`], for convergence tests.
pub fn solve_linear(
    u0: &SineSeries<f64>,
    grid: &TimeGrid,
    order: usize,
    tol: f64,
) -> Result<ApproxSolution, ApproxError> {
    solve_inner(u0, grid, order, tol, false)
}

fn solve_inner(
    u0: &SineSeries<f64>,
    grid: &TimeGrid,
    order: usize,
    tol: f64,
    nonlinear: bool,
) -> Result<ApproxSolution, ApproxError> {
    let ws = CnWorkspace::new(u0.dim(), order)?;
    let mut snapshots = Vec::with_capacity(grid.nodes().len());
    let mut residuals = Vec::with_capacity(grid.num_steps());
    snapshots.push(embed(u0, order)?);
    for i in 1..=grid.num_steps() {
        let tau = grid.step(i);
        match ws.step(snapshots.last().unwrap(), tau, tol, nonlinear) {
            Ok((u, r)) => {
                snapshots.push(u);
                residuals.push(r);
            }
            Err(ApproxError::StepFailure { iters, tol, residual, .. }) => {
                return Err(ApproxError::StepFailure { step: i, iters, tol, residual });
            }
            Err(e) => return Err(e),
        }
    }
    ApproxSolution::new(grid.clone(), snapshots, residuals)
}

/// Galerkin square of a snapshot (projection of u^2 onto V_N); exposed for
/// diagnostics and tests.
pub fn galerkin_square(u: &SineSeries<f64>) -> Result<SineSeries<f64>, ApproxError> {
    Ok(galerkin_power(u, 2, u.order())?)
}
