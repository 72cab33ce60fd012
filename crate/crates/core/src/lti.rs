//! Linear-Gaussian state-space models, steady-state gains and closed-loop
//! analysis.
//!
//! The filter runs in one-step predictor form,
//! `x̂_{t+1} = A x̂_t + K (y_t − H x̂_t)`, so the prediction error obeys
//! `e_{t+1} = (A − K H) e_t + w_t − K v_t` and its steady covariance solves
//! `P = Φ P Φᵀ + Q + K R Kᵀ` with `Φ = A − K H`.

use alloc::format;

use crate::error::{invalid, Error, Result};
use crate::matrix::{
    condition_number, inverse, is_psd, operator_two_norm, solve_discrete_lyapunov, solve_linear,
    spectral_radius, stein_operator, Conditioning, Mat,
};

pub const DARE_TOLERANCE: f64 = 1e-12;
pub const DARE_MAX_ITERATIONS: usize = 1_000_000;

/// True dynamics `x_{t+1} = A x_t + w_t`, `y_t = H x_t + v_t`,
/// `w ~ N(0, Q)`, `v ~ N(0, R)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LtiSystem {
    pub a: Mat,
    pub h: Mat,
    pub q: Mat,
    pub r: Mat,
}

impl LtiSystem {
    /// Validates shapes and that `Q` is PSD. `R` must be PSD; it is allowed
    /// to vanish only so that noise-free runs can be expressed.
    pub fn new(a: Mat, h: Mat, q: Mat, r: Mat) -> Result<Self> {
        check_model_shapes(&a, &h, &q, &r)?;
        if !is_psd(&q, 1e-12)? {
            return Err(invalid("Q must be symmetric positive semidefinite"));
        }
        if !is_psd(&r, 1e-12)? {
            return Err(invalid("R must be symmetric positive semidefinite"));
        }
        Ok(Self { a, h, q, r })
    }

    pub fn state_dim(&self) -> usize {
        self.a.rows()
    }

    pub fn obs_dim(&self) -> usize {
        self.h.rows()
    }

    /// Same dynamics with a different observation matrix.
    pub fn with_observation(&self, h: Mat) -> Result<Self> {
        Self::new(self.a.clone(), h, self.q.clone(), self.r.clone())
    }
}

fn check_model_shapes(a: &Mat, h: &Mat, q: &Mat, r: &Mat) -> Result<()> {
    let n = a.rows();
    let d = h.rows();
    let ok = a.is_square() && h.cols() == n && q.shape() == (n, n) && r.shape() == (d, d);
    if !ok {
        return Err(Error::Dimension {
            op: "LtiSystem",
            detail: format!(
                "A {:?}, H {:?}, Q {:?}, R {:?} are not conformant",
                a.shape(),
                h.shape(),
                q.shape(),
                r.shape()
            ),
        });
    }
    Ok(())
}

/// How a filter chooses its constant gain.
#[derive(Debug, Clone, PartialEq)]
pub enum GainPolicy {
    /// A frozen reference gain.
    FixedRef(Mat),
    /// `α · K₀`.
    GainRay { base: Mat, alpha: f64 },
    /// Steady-state gain of the filter's own model, recomputed per system.
    DarePerConfig,
}

/// The filter's beliefs about the noise and its gain rule.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterSpec {
    pub q: Mat,
    pub r: Mat,
    pub policy: GainPolicy,
}

impl FilterSpec {
    pub fn new(q: Mat, r: Mat, policy: GainPolicy) -> Result<Self> {
        if !is_psd(&q, 1e-12)? {
            return Err(invalid("filter Q must be symmetric positive semidefinite"));
        }
        if !r.is_symmetric(1e-12) || !crate::matrix::symmetric_eigenvalues(&r)?.iter().all(|&l| l > 0.0) {
            return Err(invalid("filter R must be symmetric positive definite"));
        }
        if let GainPolicy::GainRay { alpha, .. } = policy {
            if !(alpha >= 0.0) {
                return Err(invalid("gain ray scale must be non-negative"));
            }
        }
        Ok(Self { q, r, policy })
    }

    /// Filter that believes the true covariances.
    pub fn matched(sys: &LtiSystem, policy: GainPolicy) -> Result<Self> {
        Self::new(sys.q.clone(), sys.r.clone(), policy)
    }

    /// Filter that believes `q_scale · Q_true` and `r_scale · R_true`.
    pub fn scaled(sys: &LtiSystem, q_scale: f64, r_scale: f64, policy: GainPolicy) -> Result<Self> {
        Self::new(sys.q.scale(q_scale), sys.r.scale(r_scale), policy)
    }

    /// Constant loop gain `K` used in `Φ = A − K H` for this system.
    pub fn resolve_gain(&self, sys: &LtiSystem) -> Result<Mat> {
        let k = match &self.policy {
            GainPolicy::FixedRef(k) => k.clone(),
            GainPolicy::GainRay { base, alpha } => base.scale(*alpha),
            GainPolicy::DarePerConfig => dare_gain(&sys.a, &sys.h, &self.q, &self.r)?.predictor_gain,
        };
        if k.shape() != (sys.state_dim(), sys.obs_dim()) {
            return Err(Error::Dimension {
                op: "resolve_gain",
                detail: format!("gain is {:?}, system needs {}x{}", k.shape(), sys.state_dim(), sys.obs_dim()),
            });
        }
        Ok(k)
    }
}

/// `Φ = A − K H`.
pub fn closed_loop(a: &Mat, h: &Mat, k: &Mat) -> Result<Mat> {
    if !a.is_square() || h.cols() != a.rows() || k.shape() != (a.rows(), h.rows()) {
        return Err(Error::Dimension {
            op: "closed_loop",
            detail: format!("A {:?}, H {:?}, K {:?}", a.shape(), h.shape(), k.shape()),
        });
    }
    a.try_sub(&k.try_mul(h)?)
}

/// Stabilizing solution of the predicted-covariance Riccati equation.
#[derive(Debug, Clone, PartialEq)]
pub struct SteadyGain {
    /// `P = A P Aᵀ − A P Hᵀ (H P Hᵀ + R)⁻¹ H P Aᵀ + Q`.
    pub p_pred: Mat,
    /// Measurement-update gain `P Hᵀ (H P Hᵀ + R)⁻¹`.
    pub gain: Mat,
    /// One-step predictor gain `A · gain`; this is the `K` of `Φ = A − K H`.
    pub predictor_gain: Mat,
    pub iterations: usize,
}

/// Iterates the Riccati recursion from `P₀ = Q` until
/// `‖ΔP‖_F ≤ 1e-12 · max(1, ‖P‖_F)`.
pub fn dare_gain(a: &Mat, h: &Mat, q: &Mat, r: &Mat) -> Result<SteadyGain> {
    check_model_shapes(a, h, q, r)?;
    let mut p = q.symmetrize();
    let ht = h.transpose();
    let at = a.transpose();
    let mut last_delta = f64::INFINITY;
    for it in 1..=DARE_MAX_ITERATIONS {
        let s = &h.congruence(&p)? + r;
        // gain = P Hᵀ S⁻¹, computed as (S⁻¹ H P)ᵀ since S and P are symmetric.
        let gain = solve_linear(&s, &(h * &p))?.transpose();
        let updated = &p - &(&gain * &(h * &p));
        let next = (&(&(a * &updated) * &at) + q).symmetrize();
        let delta = (&next - &p).frobenius_norm();
        if !delta.is_finite() || !next.is_finite() {
            return Err(Error::Detectability { last_delta });
        }
        last_delta = delta;
        p = next;
        if delta <= DARE_TOLERANCE * p.frobenius_norm().max(1.0) {
            let s = &h.congruence(&p)? + r;
            let gain = &(&p * &ht) * &inverse(&s)?;
            let predictor_gain = a * &gain;
            return Ok(SteadyGain { p_pred: p, gain, predictor_gain, iterations: it });
        }
    }
    Err(Error::Detectability { last_delta })
}

/// Structural quantities of a closed loop `Φ = A − K H`.
#[derive(Debug, Clone, PartialEq)]
pub struct ClosedLoopAnalysis {
    pub phi: Mat,
    pub rho: f64,
    pub kappa: Conditioning,
    /// `‖(I − Φ⊗Φ)⁻¹‖₂`.
    pub int_sens: f64,
    /// Steady error covariance, `P = Φ P Φᵀ + Q + K R Kᵀ`.
    pub p: Mat,
    /// Innovation covariance `H P Hᵀ + R`.
    pub s: Mat,
    /// `tr(H P Hᵀ) / tr(R)`.
    pub ia: f64,
}

pub fn analyze_closed_loop(a: &Mat, h: &Mat, k: &Mat, q: &Mat, r: &Mat) -> Result<ClosedLoopAnalysis> {
    check_model_shapes(a, h, q, r)?;
    let phi = closed_loop(a, h, k)?;
    let rho = spectral_radius(&phi)?;
    if rho >= 1.0 {
        return Err(Error::Unstable { rho });
    }
    let kappa = condition_number(&phi)?;
    let int_sens = operator_two_norm(&inverse(&stein_operator(&phi)?)?)?;
    let injected = (&k.congruence(r)? + q).symmetrize();
    let p = solve_discrete_lyapunov(&phi, &injected)?;
    let hph = h.congruence(&p)?;
    let s = (&hph + r).symmetrize();
    let tr_r = r.trace();
    if !(tr_r > 0.0) {
        return Err(invalid("tr(R) must be positive for innovation amplification"));
    }
    let ia = hph.trace() / tr_r;
    Ok(ClosedLoopAnalysis { phi, rho, kappa, int_sens, p, s, ia })
}

impl ClosedLoopAnalysis {
    /// Analysis of a system under a filter gain, using the true covariances.
    pub fn of(sys: &LtiSystem, k: &Mat) -> Result<Self> {
        analyze_closed_loop(&sys.a, &sys.h, k, &sys.q, &sys.r)
    }
}
