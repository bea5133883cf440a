//! Rigorous evaluation of the analytic constants that enter the local
//! inclusion condition: the shift sigma, the time-Lipschitz constant of the
//! linearization, the fractional-embedding constant, the evolution-operator
//! smoothing factor W, and the contraction coefficient L.

use thiserror::Error;

use crate::approx::ApproxSolution;
use crate::rigor::{beta, gamma, Interval, RigorError, PI};
use crate::spectral::{linf_bound, product_l2_norm, SpectralError};

#[derive(Debug, Error)]
pub enum BoundsError {
    #[error("exponent p={0} is not supported (benchmark uses p=2)")]
    UnsupportedExponent(u32),
    #[error("dimension {0} not supported")]
    BadDimension(usize),
    #[error("alpha={alpha} outside the admissible window ({lo}, {hi})")]
    InadmissibleAlpha { alpha: f64, lo: f64, hi: f64 },
    #[error("shift mu must be positive, got {0}")]
    BadShift(f64),
    #[error("embedding requires alpha > d(q-2)/(4q) = {0}")]
    InadmissibleEmbedding(f64),
    #[error("node range [{a}, {b}] invalid for a solution with {nodes} nodes")]
    BadRange { a: usize, b: usize, nodes: usize },
    #[error(transparent)]
    Rigor(#[from] RigorError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}

/// Problem configuration with the admissibility checks of the local
/// inclusion theorem baked into construction.
#[derive(Clone, Debug)]
pub struct ProblemParams {
    dim: usize,
    p: u32,
    alpha: f64,
    mu: f64,
    gamma: f64,
    order: usize,
}

impl ProblemParams {
    pub fn new(
        dim: usize,
        p: u32,
        alpha: f64,
        mu: f64,
        gamma: f64,
        order: usize,
    ) -> Result<ProblemParams, BoundsError> {
        if !(1..=3).contains(&dim) {
            return Err(BoundsError::BadDimension(dim));
        }
        if p != 2 {
            return Err(BoundsError::UnsupportedExponent(p));
        }
        let lo = dim as f64 * (p as f64 - 1.0) / (4.0 * p as f64);
        let hi = 1.0 / p as f64;
        if alpha.is_nan() || alpha <= lo || alpha >= hi {
            return Err(BoundsError::InadmissibleAlpha { alpha, lo, hi });
        }
        if !mu.is_finite() || mu <= 0.0 {
            return Err(BoundsError::BadShift(mu));
        }
        Ok(ProblemParams { dim, p, alpha, mu, gamma, order })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn alpha(&self) -> Interval {
        Interval::point(self.alpha)
    }

    pub fn alpha_f64(&self) -> f64 {
        self.alpha
    }

    pub fn mu(&self) -> Interval {
        Interval::point(self.mu)
    }

    pub fn mu_f64(&self) -> f64 {
        self.mu
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Smallest Dirichlet-Laplacian eigenvalue on the unit box: d pi^2.
    pub fn lambda_min(&self) -> Interval {
        PI * PI * Interval::point(self.dim as f64)
    }

    /// lambda_A = lambda_min + mu, the spectral floor of the shifted
    /// linearization.
    pub fn lambda_a(&self) -> Interval {
        self.lambda_min() + self.mu()
    }
}

fn check_range(omega: &ApproxSolution, a: usize, b: usize) -> Result<(), BoundsError> {
    let nodes = omega.grid().nodes().len();
    if a >= b || b >= nodes {
        return Err(BoundsError::BadRange { a, b, nodes });
    }
    Ok(())
}

/// Upper bound of sup over the node range of the sup norm of omega, via the
/// coefficient l1 bound at every node (piecewise linearity makes the
/// interior sup attained within the hull of nodal bounds).
fn sup_linf_over_nodes(omega: &ApproxSolution, a: usize, b: usize) -> Interval {
    let mut sup = Interval::ZERO;
    for i in a..=b {
        let s = linf_bound(&omega.snapshot(i).to_rigorous());
        if s.hi() > sup.hi() {
            sup = s;
        }
    }
    sup
}

/// The shift sigma_i = mu + p * (upper bound of sup_{J_i x Omega} |omega|^{p-1}).
///
/// Any value >= mu + p sup omega^{p-1} is admissible; the returned interval
/// has that property at its upper endpoint, which is what every downstream
/// use relies on.
pub fn sigma_for_interval(
    omega: &ApproxSolution,
    a: usize,
    b: usize,
    params: &ProblemParams,
) -> Result<Interval, BoundsError> {
    check_range(omega, a, b)?;
    let sup = sup_linf_over_nodes(omega, a, b);
    Ok(params.mu() + Interval::point(params.p() as f64) * sup)
}

/// Time-Lipschitz constant of the linearized coefficient: for p=2,
/// C_omega = 2 sup_{J_i} ||d/dt omega||_inf, exact for piecewise-linear
/// trajectories.
pub fn c_omega(
    omega: &ApproxSolution,
    a: usize,
    b: usize,
    params: &ProblemParams,
) -> Result<Interval, BoundsError> {
    check_range(omega, a, b)?;
    if params.p() != 2 {
        return Err(BoundsError::UnsupportedExponent(params.p()));
    }
    let mut sup = Interval::ZERO;
    for i in (a + 1)..=b {
        let tau = Interval::point(omega.grid().nodes()[i])
            - Interval::point(omega.grid().nodes()[i - 1]);
        let diff = omega
            .snapshot(i)
            .to_rigorous()
            .sub(&omega.snapshot(i - 1).to_rigorous())?;
        let bound = linf_bound(&diff).checked_div(tau)?;
        if bound.hi() > sup.hi() {
            sup = bound;
        }
    }
    Ok(Interval::point(2.0) * sup)
}

/// sup over the node range of the L4 norm of omega (the C(J; L^{2p}) norm
/// for p=2). Convexity of the linear interpolation keeps the interior
/// below the nodal maxima.
pub fn sup_l4_norm(omega: &ApproxSolution, a: usize, b: usize) -> Result<Interval, BoundsError> {
    check_range(omega, a, b)?;
    let mut sup = Interval::ZERO;
    for i in a..=b {
        let rig = omega.snapshot(i).to_rigorous();
        let sq = product_l2_norm(&rig, &rig)?;
        let l4 = sq.sqrt()?;
        if l4.hi() > sup.hi() {
            sup = l4;
        }
    }
    Ok(sup)
}

/// Upper enclosure of the embedding constant C_{q, alpha} of
/// D(Delta_mu^alpha) into L^q:
///
///   C = Gamma(alpha - e) / ((4 pi)^e Gamma(alpha)) * min_{0 < beta <= 1} zeta(beta),
///   zeta(beta) = beta^{-e} ((1 - beta) lambda_min + mu)^{-(alpha - e)},
///   e = d (q - 2) / (4 q).
///
/// The minimum is replaced by the value at a floating-point golden-section
/// candidate, evaluated in intervals; that is sound because any beta gives
/// an upper bound of the min.
pub fn embedding_constant(q: u32, params: &ProblemParams) -> Result<Interval, BoundsError> {
    let d = params.dim() as f64;
    let e_exp = d * (q as f64 - 2.0) / (4.0 * q as f64);
    let alpha = params.alpha_f64();
    if q > 2 && alpha <= e_exp {
        return Err(BoundsError::InadmissibleEmbedding(e_exp));
    }

    let lam_f = d * std::f64::consts::PI * std::f64::consts::PI;
    let mu_f = params.mu_f64();
    let zeta_f =
        |b: f64| -> f64 { b.powf(-e_exp) * ((1.0 - b) * lam_f + mu_f).powf(-(alpha - e_exp)) };
    // golden-section search for the minimizer candidate
    let inv_phi = 0.618_033_988_749_894_9_f64;
    let (mut lo, mut hi) = (1e-12_f64, 1.0_f64);
    let mut c = hi - inv_phi * (hi - lo);
    let mut dpt = lo + inv_phi * (hi - lo);
    for _ in 0..60 {
        if zeta_f(c) < zeta_f(dpt) {
            hi = dpt;
        } else {
            lo = c;
        }
        c = hi - inv_phi * (hi - lo);
        dpt = lo + inv_phi * (hi - lo);
    }
    let beta_star = (0.5 * (lo + hi)).clamp(1e-12, 1.0);

    // interval evaluation at the candidate
    let bi = Interval::point(beta_star);
    let lam = params.lambda_min();
    let base = (Interval::ONE - bi) * lam + params.mu();
    let e_int = Interval::point(e_exp);
    let a_int = params.alpha();
    let zeta_val = if e_exp == 0.0 {
        base.pow(-a_int)?
    } else {
        bi.pow(-e_int)? * base.pow(-(a_int - e_int))?
    };
    let ratio = if e_exp == 0.0 {
        Interval::ONE
    } else {
        let g_num = gamma(a_int - e_int)?;
        let g_den = gamma(a_int)?;
        let four_pi = Interval::point(4.0) * PI;
        g_num.checked_div(four_pi.pow(e_int)? * g_den)?
    };
    Ok(ratio * zeta_val)
}

/// The evolution-operator smoothing factor
/// W(tau) = (alpha/e)^alpha { 1 + C_omega tau^2 / ((1-alpha)(2-alpha)) }.
pub fn w_factor(tau: Interval, c_om: Interval, alpha: Interval) -> Result<Interval, RigorError> {
    // (alpha/e)^alpha = exp(alpha (ln alpha - 1))
    let lead = ((alpha.ln()? - Interval::ONE) * alpha).exp();
    let denom = (Interval::ONE - alpha) * (Interval::point(2.0) - alpha);
    let bracket = Interval::ONE + (c_om * tau.powi(2)).checked_div(denom)?;
    Ok(lead * bracket)
}

/// The contraction coefficient of the local fixed-point map; for p = 2:
///
///   L_omega = 2 C_{4,alpha}^2 e^{sigma tau} tau^{1-2 alpha} B(1-alpha, 1-2 alpha)
///
/// independent of rho (the general-p middle factor has exponent p-2 = 0,
/// which is why the rho and norm arguments are unused on this path).
pub fn l_omega(
    _rho: Interval,
    _omega_norm_c2p: Interval,
    sigma: Interval,
    tau: Interval,
    c2p: Interval,
    params: &ProblemParams,
) -> Result<Interval, BoundsError> {
    let p = params.p();
    if p != 2 {
        return Err(BoundsError::UnsupportedExponent(p));
    }
    let alpha = params.alpha();
    let pf = Interval::point(p as f64);
    let one = Interval::ONE;
    let exponent = one - pf * alpha; // 1 - p alpha > 0 by admissibility
    let beta_term = beta(one - alpha, exponent)?;
    let lead = pf * (pf - one) * c2p.powi(2);
    let sig_exp = (sigma * tau).exp();
    let tau_pow = tau.pow(exponent)?;
    Ok(lead * sig_exp * tau_pow * beta_term)
}
