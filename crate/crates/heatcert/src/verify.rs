//! The theorem engine: per-interval local inclusion of the mild solution in
//! a tube around the approximate solution, endpoint error bounds nu_i, the
//! wrapping-suppressing grouped error recursion, and the concatenation
//! driver with adaptive step control.
//!
//! A step is verified when the fixed-point condition
//!
//!   W(tau) ( eps_{i-1} + L rho^2 + delta tau / (1 - alpha) ) < rho
//!
//! holds in interval arithmetic for some rho > 0; for p = 2 the left side is
//! quadratic in rho, so a floating-point root predicts the candidate and the
//! interval substitution certifies it.

use thiserror::Error;

use crate::approx::{ApproxError, ApproxSolution, CnWorkspace, TimeGrid};
use crate::bounds::{
    c_omega, embedding_constant, l_omega, sigma_for_interval, w_factor, BoundsError,
    ProblemParams,
};
use crate::residual::{delta_bound_with, ResidualContext, ResidualError};
use crate::rigor::{expm1_ratio, Interval, RigorError};
use crate::spectral::SineSeries;

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error(transparent)]
    Bounds(#[from] BoundsError),
    #[error(transparent)]
    Residual(#[from] ResidualError),
    #[error(transparent)]
    Approx(#[from] ApproxError),
    #[error(transparent)]
    Rigor(#[from] RigorError),
    #[error("initial error bound must be nonnegative and finite, got {0}")]
    BadInitialError(f64),
    #[error("target time {target} must exceed the start time {start}")]
    BadTarget { start: f64, target: f64 },
}

/// How the pointwise endpoint error is propagated between intervals.
///
/// `Grouped` is the wrapping-suppressing scheme: eps_n is reassembled from
/// the stored nu_k and per-interval decay factors, with every product of
/// decay factors evaluated as a single interval before it multiplies
/// anything. `Naive` re-seeds each interval by collapsing the weighted tube
/// bound at the endpoint (lambda_A^{-alpha} rho tau^{-alpha} e^{sigma tau}),
/// which amplifies the previous radius step over step and reproduces the
/// early failures that motivated the grouped scheme.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RunMode {
    Grouped,
    Naive,
}

impl RunMode {
    pub fn parse(s: &str) -> Option<RunMode> {
        match s {
            "grouped" => Some(RunMode::Grouped),
            "naive" => Some(RunMode::Naive),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            RunMode::Grouped => "grouped",
            RunMode::Naive => "naive",
        }
    }
}

/// Evaluation mode for [`pointwise_epsilon`]; the two are algebraically
/// identical and differ only in interval evaluation order.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EpsilonMode {
    Grouped,
    Recursive,
}

/// Stored per-interval estimates feeding the endpoint error recursion.
#[derive(Clone, Debug)]
pub struct EpsilonLedger {
    pub eps0: Interval,
    pub nus: Vec<Interval>,
    pub decays: Vec<Interval>,
}

/// Endpoint error bound from the ledger.
///
/// Grouped: eps_n = (prod_{j<=n} decay_j) eps0
///                + sum_k (prod_{j>k} decay_j) nu_k,
/// every parenthesized product evaluated first as one interval.
/// Recursive: eps_i = decay_i eps_{i-1} + nu_i.
pub fn pointwise_epsilon(ledger: &EpsilonLedger, mode: EpsilonMode) -> Interval {
    let n = ledger.nus.len();
    assert_eq!(n, ledger.decays.len());
    match mode {
        EpsilonMode::Grouped => {
            // suffix[k] = prod_{j=k+1..n} decay_j, built back to front
            let mut suffix = vec![Interval::ONE; n + 1];
            for k in (0..n).rev() {
                suffix[k] = ledger.decays[k] * suffix[k + 1];
            }
            let mut eps = suffix[0] * ledger.eps0;
            for k in 0..n {
                eps = eps + suffix[k + 1] * ledger.nus[k];
            }
            eps
        }
        EpsilonMode::Recursive => {
            let mut eps = ledger.eps0;
            for k in 0..n {
                eps = ledger.decays[k] * eps + ledger.nus[k];
            }
            eps
        }
    }
}

/// Verified record for one time interval J_i = (t_{i-1}, t_i].
#[derive(Clone, Debug)]
pub struct StepCertificate {
    pub index: usize,
    pub t_start: f64,
    pub t_end: f64,
    pub tau: Interval,
    pub sigma: Interval,
    pub delta: Interval,
    pub c_omega: Interval,
    pub w: Interval,
    pub l: Interval,
    /// verified tube radius (point interval)
    pub rho: Interval,
    pub nu: Interval,
    /// e^{-(lambda_A - sigma_i) tau_i}
    pub decay: Interval,
    /// endpoint error bound ||u(t_i) - omega(t_i)||_{L2} per the run mode
    pub eps: Interval,
    /// the eps bound that seeded this interval
    pub eps_prev: Interval,
    pub verified: bool,
}

/// Shared constants for one run configuration.
pub struct ConstantsCache {
    pub c2p: Interval,
    pub lambda_a: Interval,
    pub alpha: Interval,
    pub residual_ctx: ResidualContext,
}

impl ConstantsCache {
    pub fn new(params: &ProblemParams) -> Result<ConstantsCache, VerifyError> {
        Ok(ConstantsCache {
            c2p: embedding_constant(2 * params.p(), params)?,
            lambda_a: params.lambda_a(),
            alpha: params.alpha(),
            residual_ctx: ResidualContext::new(params.order()),
        })
    }
}

/// Endpoint contribution nu_i of the current interval, split by the sign of
/// x = lambda_A - sigma_i:
///
///   x >= 0: nu = p(p-1) C^2 rho^2 K e^{p sigma tau} tau^{1-p alpha}/(1-p alpha)
///              + delta (1 - e^{-x tau})/x
///   x <  0: the exponential picks up the extra e^{-x tau} and the delta
///           transport becomes (e^{-x tau} - 1)/(-x), the same function.
///
/// K is the double integral of the middle power, exactly 1/2 for p = 2.
/// A straddling sign is handled by the hull (the positive part of -x).
pub fn nu_bound(
    sigma: Interval,
    delta: Interval,
    rho: Interval,
    tau: Interval,
    cache: &ConstantsCache,
    params: &ProblemParams,
) -> Result<Interval, VerifyError> {
    let p = Interval::point(params.p() as f64);
    let one = Interval::ONE;
    let x = cache.lambda_a - sigma;
    let k_factor = Interval::point(0.5);
    let exp_arg = p * sigma * tau + (-x).pos_part() * tau;
    let e_factor = exp_arg.exp();
    let exponent = one - p * cache.alpha; // 1 - p alpha > 0
    let tau_pow = tau.pow(exponent)?;
    let main = p
        * (p - one)
        * cache.c2p.powi(2)
        * rho.powi(2)
        * k_factor
        * e_factor
        * tau_pow.checked_div(exponent)?;
    let transport = delta * tau * expm1_ratio(x * tau);
    Ok((main + transport).pos_part())
}

/// Assemble the constants for one interval and try to certify a radius.
///
/// Failure to verify is not an error: the flag comes back false so the
/// driver can shrink the step.
#[allow(clippy::too_many_arguments)]
pub fn local_inclusion(
    cache: &ConstantsCache,
    omega: &ApproxSolution,
    a: usize,
    b: usize,
    eps_prev: Interval,
    params: &ProblemParams,
    rho_margin: f64,
    workers: usize,
) -> Result<StepCertificate, VerifyError> {
    let t_start = omega.grid().nodes()[a];
    let t_end = omega.grid().nodes()[b];
    let tau = Interval::point(t_end) - Interval::point(t_start);
    let sigma = sigma_for_interval(omega, a, b, params)?;
    let cw = c_omega(omega, a, b, params)?;
    let delta = delta_bound_with(&cache.residual_ctx, omega, a, b, workers)?;
    let w = w_factor(tau, cw, cache.alpha)?;
    let l = l_omega(Interval::ZERO, Interval::ZERO, sigma, tau, cache.c2p, params)?;

    let one_minus_alpha = Interval::ONE - cache.alpha;
    let forcing = eps_prev + (delta * tau).checked_div(one_minus_alpha)?;

    // Floating-point prediction of the small root of W L rho^2 - rho + W c = 0,
    // in the cancellation-free form 2c/(1 + sqrt(1 - 4ac)). The upper
    // endpoints are used so the candidate already reflects the coefficients
    // the interval substitution will see.
    let a_f = (w * l).hi();
    let c_f = (w * forcing).hi();
    let rho_candidate = if c_f <= 0.0 {
        // exact zero forcing: any small rho satisfies W L rho^2 < rho
        1e-12
    } else {
        let disc = 1.0 - 4.0 * a_f * c_f;
        if disc <= 0.0 {
            // no real root: condition cannot hold, fall through to a failed
            // substitution at the vertex for the record
            1.0 / (2.0 * a_f.max(f64::MIN_POSITIVE))
        } else {
            2.0 * c_f / (1.0 + disc.sqrt()) * rho_margin
        }
    };

    let rho = Interval::point(rho_candidate);
    let lhs = w * (eps_prev + l * rho.powi(2) + (delta * tau).checked_div(one_minus_alpha)?);
    let verified = rho_candidate > 0.0
        && rho_candidate.is_finite()
        && lhs.hi() < rho.lo()
        && lhs.hi().is_finite();

    let x = cache.lambda_a - sigma;
    let decay = (-(x * tau)).exp();
    let nu = if verified {
        nu_bound(sigma, delta, rho, tau, cache, params)?
    } else {
        Interval::ZERO
    };

    Ok(StepCertificate {
        index: 0,
        t_start,
        t_end,
        tau,
        sigma,
        delta,
        c_omega: cw,
        w,
        l,
        rho,
        nu,
        decay,
        eps: Interval::ZERO,
        eps_prev,
        verified,
    })
}

/// Endpoint collapse of the weighted tube bound, the re-seeding rule of the
/// naive (pre-shrinking) concatenation:
///
///   ||u(t_i) - omega(t_i)||_{L2} <= lambda_A^{-alpha} rho_i tau_i^{-alpha}
///                                   e^{sigma_i tau_i}
///
/// from ||phi||_{L2} <= lambda_A^{-alpha} ||Delta_mu^alpha phi||_{L2} and the
/// definition of the tube.
fn collapse_epsilon(cert: &StepCertificate, cache: &ConstantsCache) -> Result<Interval, VerifyError> {
    let lam_pow = cache.lambda_a.pow(-cache.alpha)?;
    let tau_pow = cert.tau.pow(-cache.alpha)?;
    let sig_exp = (cert.sigma * cert.tau).exp();
    Ok((lam_pow * cert.rho * tau_pow * sig_exp).pos_part())
}

/// Step-size policy of the concatenation driver.
#[derive(Clone, Debug)]
pub struct StepPolicy {
    /// initial verification interval length
    pub tau0: f64,
    /// cap for re-growth after sustained success
    pub tau_max: f64,
    /// halve at most this many times per interval before giving up
    pub max_halvings: u32,
    /// double tau after this many consecutive successes
    pub grow_after: u32,
    /// Crank-Nicolson substeps per verification interval
    pub substeps: usize,
    /// fixed-step mode when false
    pub adaptive: bool,
    /// Newton tolerance of the inner solver
    pub solver_tol: f64,
    /// candidate radius = margin * small root
    pub rho_margin: f64,
    /// initial error bound ||u_0 - omega(0)||_{L2}
    pub eps0: f64,
    /// worker threads for per-interval residual assembly
    pub workers: usize,
}

impl StepPolicy {
    pub fn with_tau0(tau0: f64) -> StepPolicy {
        StepPolicy {
            tau0,
            tau_max: tau0,
            max_halvings: 12,
            grow_after: 5,
            substeps: 2,
            adaptive: true,
            solver_tol: 1e-12,
            rho_margin: 1.01,
            eps0: 0.0,
            workers: 1,
        }
    }
}

/// A completed (or partially completed) verification run.
#[derive(Debug)]
pub struct VerificationRun {
    pub params: ProblemParams,
    pub mode: RunMode,
    pub omega: ApproxSolution,
    pub certificates: Vec<StepCertificate>,
    pub ledger: EpsilonLedger,
    pub target_t: f64,
    pub last_verified_t: f64,
}

impl VerificationRun {
    pub fn reached_target(&self) -> bool {
        // allow for the accumulated rounding of many step additions
        self.last_verified_t >= self.target_t - 1e-9
    }
}

/// Chain local inclusions from t = 0 until `target_t`, a persistent failure,
/// or the step-size floor. The approximate solution is solved lazily so a
/// halved interval always aligns with solver nodes.
pub fn concatenate(
    u0: &SineSeries<f64>,
    params: &ProblemParams,
    policy: &StepPolicy,
    mode: RunMode,
    target_t: f64,
) -> Result<VerificationRun, VerifyError> {
    if !policy.eps0.is_finite() || policy.eps0 < 0.0 {
        return Err(VerifyError::BadInitialError(policy.eps0));
    }
    if target_t.is_nan() || target_t <= 0.0 {
        return Err(VerifyError::BadTarget { start: 0.0, target: target_t });
    }
    let cache = ConstantsCache::new(params)?;
    let ws = CnWorkspace::new(params.dim(), params.order())?;

    let mut nodes: Vec<f64> = vec![0.0];
    let mut snapshots: Vec<SineSeries<f64>> = vec![resize_initial(u0, params.order())?];
    let mut residuals: Vec<f64> = Vec::new();

    let mut certificates: Vec<StepCertificate> = Vec::new();
    let mut ledger = EpsilonLedger {
        eps0: Interval::point(policy.eps0),
        nus: Vec::new(),
        decays: Vec::new(),
    };
    // suffix products of decay factors, maintained incrementally so the
    // grouped eps costs O(n) per step instead of O(n^2)
    let mut suffix: Vec<Interval> = Vec::new();
    let mut decay_prod = Interval::ONE;

    let mut eps_prev = Interval::point(policy.eps0);
    let mut tau = policy.tau0.min(target_t);
    let mut streak: u32 = 0;
    let mut last_verified_t = 0.0_f64;

    'outer: while last_verified_t < target_t - 1e-12 {
        let mut halvings: u32 = 0;
        loop {
            let t0 = *nodes.last().unwrap();
            let step_tau = tau.min(target_t - t0).max(0.0);
            if step_tau < 1e-13 {
                break 'outer;
            }

            // extend the trajectory over the candidate window
            let nsub = policy.substeps.max(1);
            let mut window_nodes = Vec::with_capacity(nsub + 1);
            let mut window_snaps = Vec::with_capacity(nsub + 1);
            window_nodes.push(t0);
            window_snaps.push(snapshots.last().unwrap().clone());
            let mut solver_ok = true;
            let mut window_res = Vec::with_capacity(nsub);
            for j in 1..=nsub {
                let t_j = if j == nsub { t0 + step_tau } else { t0 + step_tau * j as f64 / nsub as f64 };
                let sub_tau = t_j - window_nodes[j - 1];
                match ws.step(&window_snaps[j - 1], sub_tau, policy.solver_tol, true) {
                    Ok((u, r)) => {
                        window_nodes.push(t_j);
                        window_snaps.push(u);
                        window_res.push(r);
                    }
                    Err(_) => {
                        solver_ok = false;
                        break;
                    }
                }
            }

            let cert = if solver_ok {
                let window = ApproxSolution::new(
                    TimeGrid::new(window_nodes.clone())?,
                    window_snaps.clone(),
                    window_res.clone(),
                )?;
                let mut cert = local_inclusion(
                    &cache,
                    &window,
                    0,
                    nsub,
                    eps_prev,
                    params,
                    policy.rho_margin,
                    policy.workers,
                )?;
                cert.index = certificates.len() + 1;
                Some(cert)
            } else {
                None
            };

            match cert {
                Some(mut cert) if cert.verified => {
                    // accept the window into the global trajectory
                    nodes.extend_from_slice(&window_nodes[1..]);
                    snapshots.extend(window_snaps.into_iter().skip(1));
                    residuals.extend(window_res);

                    for s in suffix.iter_mut() {
                        *s = *s * cert.decay;
                    }
                    suffix.push(Interval::ONE);
                    decay_prod = decay_prod * cert.decay;
                    ledger.nus.push(cert.nu);
                    ledger.decays.push(cert.decay);

                    let eps = match mode {
                        RunMode::Grouped => {
                            let mut e = decay_prod * ledger.eps0;
                            for (k, nu) in ledger.nus.iter().enumerate() {
                                e = e + suffix[k] * *nu;
                            }
                            e.pos_part()
                        }
                        RunMode::Naive => collapse_epsilon(&cert, &cache)?,
                    };
                    cert.eps = eps;
                    eps_prev = eps;
                    last_verified_t = cert.t_end;
                    certificates.push(cert);

                    streak += 1;
                    if policy.adaptive && streak >= policy.grow_after && tau * 2.0 <= policy.tau_max
                    {
                        tau *= 2.0;
                        streak = 0;
                    }
                    break;
                }
                maybe_cert => {
                    streak = 0;
                    if !policy.adaptive || halvings >= policy.max_halvings {
                        if let Some(cert) = maybe_cert {
                            certificates.push(cert);
                        }
                        break 'outer;
                    }
                    halvings += 1;
                    tau *= 0.5;
                }
            }
        }
    }

    let omega = ApproxSolution::new(TimeGrid::new(nodes)?, snapshots, residuals)?;
    Ok(VerificationRun {
        params: params.clone(),
        mode,
        omega,
        certificates,
        ledger,
        target_t,
        last_verified_t,
    })
}

fn resize_initial(u0: &SineSeries<f64>, order: usize) -> Result<SineSeries<f64>, VerifyError> {
    if u0.order() == order {
        return Ok(u0.clone());
    }
    if u0.order() > order {
        return Err(VerifyError::Approx(ApproxError::InitialDataTooFine));
    }
    let mut out = SineSeries::zero(u0.dim(), order).map_err(BoundsError::from)?;
    for (flat, &c) in u0.coeffs().iter().enumerate() {
        if c != 0.0 {
            let m = crate::spectral::decode_index(flat, u0.dim(), u0.order(), 1);
            out.set_coeff(&m[..u0.dim()], c);
        }
    }
    Ok(out)
}

/// Independent re-check of every verified certificate: the condition is
/// substituted afresh from the stored primitives (sigma, delta, C_omega,
/// tau, rho, seeding eps), recomputing W and L rather than trusting the
/// stored values or the root-finding path.
pub fn audit(run: &VerificationRun) -> Result<bool, VerifyError> {
    let cache = ConstantsCache::new(&run.params)?;
    for cert in run.certificates.iter().filter(|c| c.verified) {
        let w = w_factor(cert.tau, cert.c_omega, cache.alpha)?;
        let l = l_omega(
            Interval::ZERO,
            Interval::ZERO,
            cert.sigma,
            cert.tau,
            cache.c2p,
            &run.params,
        )?;
        let one_minus_alpha = Interval::ONE - cache.alpha;
        let lhs = w
            * (cert.eps_prev
                + l * cert.rho.powi(2)
                + (cert.delta * cert.tau).checked_div(one_minus_alpha)?);
        if lhs.hi() >= cert.rho.lo() || lhs.hi().is_nan() {
            return Ok(false);
        }
        // the stored decay must also enclose a freshly computed one
        let decay = (-((cache.lambda_a - cert.sigma) * cert.tau)).exp();
        if decay.lo() > cert.decay.hi() || decay.hi() < cert.decay.lo() {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params_benchmark() -> ProblemParams {
        ProblemParams::new(2, 2, 0.375, 70.0, 7.0, 5).unwrap()
    }

    fn ledger_from(eps0: f64, nus: &[f64], decays: &[f64]) -> EpsilonLedger {
        EpsilonLedger {
            eps0: Interval::point(eps0),
            nus: nus.iter().map(|&x| Interval::point(x)).collect(),
            decays: decays.iter().map(|&x| Interval::point(x)).collect(),
        }
    }

    #[test]
    fn epsilon_modes_agree_for_one_step() {
        let ledger = ledger_from(0.25, &[0.1], &[0.9]);
        let g = pointwise_epsilon(&ledger, EpsilonMode::Grouped);
        let r = pointwise_epsilon(&ledger, EpsilonMode::Recursive);
        let want = 0.9 * 0.25 + 0.1;
        assert!(g.contains(want) && r.contains(want));
        assert!((g.mid() - r.mid()).abs() < 1e-15);
    }

    #[test]
    fn epsilon_grouped_two_steps_expansion() {
        // eps_2 = (d2 d1) eps0 + d2 nu1 + nu2
        let ledger = ledger_from(0.5, &[0.04, 0.02], &[0.8, 0.7]);
        let g = pointwise_epsilon(&ledger, EpsilonMode::Grouped);
        let want = (0.7 * 0.8) * 0.5 + 0.7 * 0.04 + 0.02;
        assert!(g.contains(want), "{g:?} vs {want}");
        let r = pointwise_epsilon(&ledger, EpsilonMode::Recursive);
        assert!((g.mid() - r.mid()).abs() / want < 1e-14);
    }

    #[test]
    fn nu_bound_zero_inputs() {
        let params = params_benchmark();
        let cache = ConstantsCache::new(&params).unwrap();
        let nu = nu_bound(
            Interval::point(70.0),
            Interval::ZERO,
            Interval::ZERO,
            Interval::point(0.01),
            &cache,
            &params,
        )
        .unwrap();
        assert_eq!(nu.hi(), 0.0);
    }

    #[test]
    fn nu_bound_closed_form_decaying_branch() {
        // for lambda_A - sigma > 0 and p = 2 (K = 1/2 exactly):
        // nu = C^2 rho^2 e^{2 sigma tau} tau^{1/4}/(1/4) + delta (1-e^{-x tau})/x
        let params = params_benchmark();
        let cache = ConstantsCache::new(&params).unwrap();
        let (sigma, delta, rho, tau) = (75.0, 0.3, 0.01, 0.002);
        let nu = nu_bound(
            Interval::point(sigma),
            Interval::point(delta),
            Interval::point(rho),
            Interval::point(tau),
            &cache,
            &params,
        )
        .unwrap();
        let lam_a = 2.0 * std::f64::consts::PI.powi(2) + 70.0;
        let x = lam_a - sigma;
        let c2 = cache.c2p.mid() * cache.c2p.mid();
        let want = c2 * rho * rho * (2.0 * sigma * tau).exp() * tau.powf(0.25) / 0.25
            + delta * (1.0 - (-x * tau).exp()) / x;
        assert!((nu.mid() - want).abs() / want < 1e-10, "{nu:?} vs {want}");
    }

    #[test]
    fn nu_bound_balanced_at_sign_boundary() {
        // lambda_A - sigma straddling zero: the transport factor approaches
        // tau and both branch exponentials coincide in the limit.
        let params = params_benchmark();
        let cache = ConstantsCache::new(&params).unwrap();
        let lam_a = cache.lambda_a.mid();
        let tau = 0.01;
        let nu_mid = |sig: f64| {
            nu_bound(
                Interval::point(sig),
                Interval::point(0.1),
                Interval::point(0.01),
                Interval::point(tau),
                &cache,
                &params,
            )
            .unwrap()
            .mid()
        };
        let below = nu_mid(lam_a - 1e-6);
        let above = nu_mid(lam_a + 1e-6);
        assert!((below - above).abs() / below < 1e-6, "{below} vs {above}");
        // and the transport term approaches delta * tau
        let at = nu_mid(lam_a);
        let transport_only = 0.1 * tau;
        assert!(at > transport_only * 0.99);
    }

    #[test]
    fn local_inclusion_zero_solution_verifies() {
        let params = params_benchmark();
        let cache = ConstantsCache::new(&params).unwrap();
        let z: SineSeries<f64> = SineSeries::zero(2, 5).unwrap();
        let grid = TimeGrid::new(vec![0.0, 0.01]).unwrap();
        let omega = ApproxSolution::new(grid, vec![z.clone(), z], vec![0.0]).unwrap();
        let cert =
            local_inclusion(&cache, &omega, 0, 1, Interval::ZERO, &params, 1.01, 1).unwrap();
        assert!(cert.verified);
        assert!(cert.rho.lo() > 0.0);
        assert_eq!(cert.delta.hi(), 0.0);
        // nu scales with rho^2, which is only a seed here
        assert!(cert.nu.hi() < 1e-20);
    }

    #[test]
    fn local_inclusion_fails_on_huge_seed_error() {
        // 4 W^2 L (eps + ...) > 1 leaves no real root
        let params = params_benchmark();
        let cache = ConstantsCache::new(&params).unwrap();
        let u = SineSeries::basis(2, 5, &[1, 1], 7.0).unwrap();
        let grid = TimeGrid::new(vec![0.0, 0.01]).unwrap();
        let omega = ApproxSolution::new(grid, vec![u.clone(), u], vec![0.0]).unwrap();
        let cert = local_inclusion(
            &cache,
            &omega,
            0,
            1,
            Interval::point(1e6),
            &params,
            1.01,
            1,
        )
        .unwrap();
        assert!(!cert.verified);
    }

    #[test]
    fn concatenate_zero_solution_to_target() {
        let params = ProblemParams::new(2, 2, 0.375, 70.0, 0.0, 3).unwrap();
        let z: SineSeries<f64> = SineSeries::zero(2, 3).unwrap();
        let policy = StepPolicy::with_tau0(0.025);
        let run = concatenate(&z, &params, &policy, RunMode::Grouped, 0.1).unwrap();
        assert!(run.reached_target(), "stopped at {}", run.last_verified_t);
        assert!(run.certificates.iter().all(|c| c.verified));
        assert!(run.certificates.iter().all(|c| c.rho.lo() > 0.0));
    }

    #[test]
    fn concatenate_benchmark_short_horizon() {
        // gamma=7 benchmark parameters over a short horizon
        let params = params_benchmark();
        let u0 = SineSeries::basis(2, 5, &[1, 1], 7.0).unwrap();
        let mut policy = StepPolicy::with_tau0(1.0 / 512.0);
        policy.substeps = 2;
        let run = concatenate(&u0, &params, &policy, RunMode::Grouped, 0.02).unwrap();
        assert!(run.reached_target(), "stopped at {}", run.last_verified_t);
        let audit_ok = audit(&run).unwrap();
        assert!(audit_ok);
        // eps stays small and positive
        for c in &run.certificates {
            assert!(c.eps.hi() >= 0.0 && c.eps.hi() < 1.0);
        }
    }

    #[test]
    fn verified_prefix_structure() {
        let params = params_benchmark();
        let u0 = SineSeries::basis(2, 5, &[1, 1], 7.0).unwrap();
        let mut policy = StepPolicy::with_tau0(0.02);
        policy.adaptive = false;
        policy.eps0 = 0.5; // large seed to force an early failure
        let run = concatenate(&u0, &params, &policy, RunMode::Grouped, 0.25).unwrap();
        let n_verified = run.certificates.iter().filter(|c| c.verified).count();
        let n_failed = run.certificates.len() - n_verified;
        assert!(n_failed <= 1);
        for (i, c) in run.certificates.iter().enumerate() {
            assert_eq!(c.verified, i < n_verified, "failure row must be last");
        }
    }

    #[test]
    fn grouped_eps_tighter_than_naive_at_fine_fixed_steps() {
        // both modes survive a fine fixed step; the grouped ledger keeps the
        // endpoint bound below the collapse-based one
        let params = params_benchmark();
        let u0 = SineSeries::basis(2, 5, &[1, 1], 7.0).unwrap();
        let mut policy = StepPolicy::with_tau0(0.005);
        policy.adaptive = false;
        policy.substeps = 4;
        let g = concatenate(&u0, &params, &policy, RunMode::Grouped, 0.06).unwrap();
        let n = concatenate(&u0, &params, &policy, RunMode::Naive, 0.06).unwrap();
        assert!(g.reached_target() && n.reached_target());
        let common = g.certificates.len().min(n.certificates.len());
        for i in 2..common {
            assert!(
                g.certificates[i].eps.hi() <= n.certificates[i].eps.hi(),
                "grouped eps wider at step {i}"
            );
        }
    }

    #[test]
    fn widened_inputs_never_verify_more() {
        // inclusion monotonicity of the whole pipeline: a larger seed error
        // cannot turn an unverified step into a verified one
        let params = params_benchmark();
        let cache = ConstantsCache::new(&params).unwrap();
        let u = SineSeries::basis(2, 5, &[1, 1], 7.0).unwrap();
        let grid = TimeGrid::new(vec![0.0, 0.005]).unwrap();
        let omega = ApproxSolution::new(grid, vec![u.clone(), u], vec![0.0]).unwrap();
        let mut last_verified = true;
        for eps in [0.0, 0.01, 0.1, 0.3, 1.0, 3.0, 10.0, 100.0] {
            let cert = local_inclusion(
                &cache,
                &omega,
                0,
                1,
                Interval::point(eps),
                &params,
                1.01,
                1,
            )
            .unwrap();
            if !last_verified {
                assert!(!cert.verified, "verification recovered at eps={eps}");
            }
            last_verified = cert.verified;
        }
    }
}
