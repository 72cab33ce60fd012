//! Truth-plus-filter simulation and normalized innovation statistics.

use alloc::vec;
use alloc::vec::Vec;

#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::error::{invalid, Error, Result};
use crate::lti::{analyze_closed_loop, FilterSpec, LtiSystem};
use crate::matrix::{inverse, Mat};
use crate::rng::NoiseSource;
use crate::special::chi2_quantile;

pub const DEFAULT_STEPS: usize = 10_000;
pub const DEFAULT_BURN_IN: usize = 100;
pub const DEFAULT_QUANTILE: f64 = 0.99;
pub const DEFAULT_GATE_PROBABILITY: f64 = 0.99;
pub const DIVERGENCE_LIMIT: f64 = 1e12;
pub const QUANTILE_CONVENTION: &str = "linear-interpolation-type7";

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub seed: u64,
    /// Recorded steps, after burn-in.
    pub steps: usize,
    pub burn_in: usize,
    pub system: LtiSystem,
    pub filter: FilterSpec,
    /// Initial true state; zero when absent. The filter always starts at zero.
    pub x0: Option<Vec<f64>>,
    pub quantile: f64,
    pub gate_probability: f64,
}

impl RunConfig {
    pub fn new(system: LtiSystem, filter: FilterSpec, seed: u64) -> Self {
        Self {
            seed,
            steps: DEFAULT_STEPS,
            burn_in: DEFAULT_BURN_IN,
            system,
            filter,
            x0: None,
            quantile: DEFAULT_QUANTILE,
            gate_probability: DEFAULT_GATE_PROBABILITY,
        }
    }
}

/// Recorded (post burn-in) states, observations and innovations, row-major
/// with one row per step.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub state_dim: usize,
    pub obs_dim: usize,
    pub states: Vec<f64>,
    pub observations: Vec<f64>,
    pub innovations: Vec<f64>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.innovations.len() / self.obs_dim.max(1)
    }

    pub fn is_empty(&self) -> bool {
        self.innovations.is_empty()
    }

    pub fn innovation(&self, t: usize) -> &[f64] {
        &self.innovations[t * self.obs_dim..(t + 1) * self.obs_dim]
    }

    /// Sample covariance of the recorded innovations (about zero mean).
    pub fn innovation_covariance(&self) -> Mat {
        let d = self.obs_dim;
        let n = self.len().max(1) as f64;
        let mut s = Mat::zeros(d, d);
        for t in 0..self.len() {
            let r = self.innovation(t);
            for i in 0..d {
                for j in 0..d {
                    s[(i, j)] += r[i] * r[j] / n;
                }
            }
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NisSeries {
    pub z2: Vec<f64>,
    pub nis_mean: f64,
    pub nis_q: f64,
    pub q: f64,
    pub gated_fraction: f64,
    pub gamma: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub trajectory: Trajectory,
    pub nis: NisSeries,
    /// Constant loop gain the filter used.
    pub gain: Mat,
    /// Innovation covariance the filter believes, `H P_filt Hᵀ + R_filt`.
    pub believed_s: Mat,
}

/// Lower factor `L` with `L Lᵀ = m` for a PSD `m`; zero pivots give zero
/// columns.
pub fn psd_factor(m: &Mat) -> Result<Mat> {
    let n = m.rows();
    if !m.is_square() {
        return Err(invalid("covariance factor needs a square matrix"));
    }
    let tol = 1e-14 * (1.0 + m.max_abs());
    let mut l = Mat::zeros(n, n);
    for j in 0..n {
        let d = m[(j, j)] - (0..j).map(|k| l[(j, k)] * l[(j, k)]).sum::<f64>();
        if d < -tol {
            return Err(invalid("covariance is not positive semidefinite"));
        }
        if d <= tol {
            continue;
        }
        let ljj = d.sqrt();
        l[(j, j)] = ljj;
        for i in j + 1..n {
            let v = m[(i, j)] - (0..j).map(|k| l[(i, k)] * l[(j, k)]).sum::<f64>();
            l[(i, j)] = v / ljj;
        }
    }
    Ok(l)
}

fn mat_vec(m: &Mat, v: &[f64], out: &mut [f64]) {
    for (i, o) in out.iter_mut().enumerate() {
        *o = (0..m.cols()).map(|j| m[(i, j)] * v[j]).sum();
    }
}

fn draw(src: &mut NoiseSource, factor: &Mat, scratch: &mut [f64], out: &mut [f64]) {
    for s in scratch.iter_mut() {
        *s = src.standard_normal();
    }
    mat_vec(factor, scratch, out);
}

/// Runs the simulation, recording the trajectory.
pub fn simulate_run(cfg: &RunConfig) -> Result<RunOutput> {
    simulate(cfg, true)
}

/// Runs the simulation keeping only the NIS statistics.
pub fn simulate_nis(cfg: &RunConfig) -> Result<NisSeries> {
    Ok(simulate(cfg, false)?.nis)
}

fn simulate(cfg: &RunConfig, record: bool) -> Result<RunOutput> {
    if cfg.steps == 0 {
        return Err(invalid("a run needs at least one recorded step"));
    }
    let sys = &cfg.system;
    let (n, d) = (sys.state_dim(), sys.obs_dim());
    let gain = cfg.filter.resolve_gain(sys)?;
    // The filter's own steady picture of its innovations.
    let believed = analyze_closed_loop(&sys.a, &sys.h, &gain, &cfg.filter.q, &cfg.filter.r)?;
    let s_inv = inverse(&believed.s)?;
    let gamma = chi2_quantile(d as u32, cfg.gate_probability)?;

    let w_factor = psd_factor(&sys.q)?;
    let v_factor = psd_factor(&sys.r)?;
    let mut src = NoiseSource::new(cfg.seed);

    let mut x = match &cfg.x0 {
        Some(x0) if x0.len() != n => return Err(invalid("x0 length must equal the state dimension")),
        Some(x0) => x0.clone(),
        None => vec![0.0; n],
    };
    let mut x_hat = vec![0.0; n];
    let (mut ax, mut ax_hat, mut w, mut hx, mut v, mut y, mut r) =
        (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; d], vec![0.0; d], vec![0.0; d], vec![0.0; d]);
    let (mut scratch_n, mut scratch_d) = (vec![0.0; n], vec![0.0; d]);

    let total = cfg.burn_in + cfg.steps;
    let mut z2 = Vec::with_capacity(cfg.steps);
    let capacity = if record { cfg.steps } else { 0 };
    let mut traj = Trajectory {
        state_dim: n,
        obs_dim: d,
        states: Vec::with_capacity(capacity * n),
        observations: Vec::with_capacity(capacity * d),
        innovations: Vec::with_capacity(capacity * d),
    };

    for t in 0..total {
        draw(&mut src, &v_factor, &mut scratch_d, &mut v);
        mat_vec(&sys.h, &x, &mut hx);
        for i in 0..d {
            y[i] = hx[i] + v[i];
        }
        mat_vec(&sys.h, &x_hat, &mut hx);
        for i in 0..d {
            r[i] = y[i] - hx[i];
        }
        if t >= cfg.burn_in {
            let mut nis = 0.0;
            for i in 0..d {
                for j in 0..d {
                    nis += r[i] * s_inv[(i, j)] * r[j];
                }
            }
            z2.push(nis.max(0.0));
            if record {
                traj.states.extend_from_slice(&x);
                traj.observations.extend_from_slice(&y);
                traj.innovations.extend_from_slice(&r);
            }
        }
        // x̂ ← A x̂ + K r ;  x ← A x + w
        mat_vec(&sys.a, &x_hat, &mut ax_hat);
        for i in 0..n {
            x_hat[i] = ax_hat[i] + (0..d).map(|j| gain[(i, j)] * r[j]).sum::<f64>();
        }
        draw(&mut src, &w_factor, &mut scratch_n, &mut w);
        mat_vec(&sys.a, &x, &mut ax);
        for i in 0..n {
            x[i] = ax[i] + w[i];
        }
        if x.iter().chain(&x_hat).any(|v| !(v.abs() <= DIVERGENCE_LIMIT)) {
            return Err(Error::Divergence { step: t });
        }
    }

    let (nis_mean, nis_q) = nis_stats(&z2, cfg.quantile)?;
    let (_, gated_fraction) = apply_gate(&z2, gamma)?;
    Ok(RunOutput {
        trajectory: traj,
        nis: NisSeries { z2, nis_mean, nis_q, q: cfg.quantile, gated_fraction, gamma },
        gain,
        believed_s: believed.s,
    })
}

/// Type-7 empirical quantile of unsorted data.
pub fn quantile(values: &[f64], q: f64) -> Result<f64> {
    if values.is_empty() {
        return Err(invalid("quantile of an empty sequence"));
    }
    if !(0.0..=1.0).contains(&q) {
        return Err(invalid("quantile level must lie in [0, 1]"));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(quantile_sorted(&sorted, q))
}

pub(crate) fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// `(mean, type-7 quantile at q)`.
pub fn nis_stats(z2: &[f64], q: f64) -> Result<(f64, f64)> {
    if z2.is_empty() {
        return Err(invalid("NIS statistics need at least one value"));
    }
    if !(q > 0.0 && q < 1.0) {
        return Err(invalid("NIS quantile level must lie strictly between 0 and 1"));
    }
    let mean = z2.iter().sum::<f64>() / z2.len() as f64;
    Ok((mean, quantile(z2, q)?))
}

/// Accept flags `z² ≤ γ` and the rejected fraction. Reporting only: the
/// filter recursion never sees the gate.
pub fn apply_gate(z2: &[f64], gamma: f64) -> Result<(Vec<bool>, f64)> {
    if !(gamma > 0.0) {
        return Err(invalid("gate threshold must be positive"));
    }
    let flags: Vec<bool> = z2.iter().map(|&z| z <= gamma).collect();
    let rejected = flags.iter().filter(|&&ok| !ok).count();
    let fraction = if flags.is_empty() { 0.0 } else { rejected as f64 / flags.len() as f64 };
    Ok((flags, fraction))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lti::GainPolicy;

    fn scalar_system(q: f64, r: f64) -> LtiSystem {
        LtiSystem::new(Mat::scalar(0.9), Mat::scalar(1.0), Mat::scalar(q), Mat::scalar(r)).unwrap()
    }

    #[test]
    fn zero_noise_gives_zero_innovations() {
        let sys = scalar_system(0.0, 0.0);
        let filt = FilterSpec::new(Mat::scalar(1.0), Mat::scalar(1.0), GainPolicy::DarePerConfig).unwrap();
        let mut cfg = RunConfig::new(sys, filt, 1);
        cfg.steps = 500;
        let out = simulate_run(&cfg).unwrap();
        assert!(out.nis.z2.iter().all(|&z| z == 0.0));
        assert_eq!(out.nis.nis_mean, 0.0);
    }

    #[test]
    fn same_seed_is_bit_identical() {
        let sys = scalar_system(1.0, 1.0);
        let filt = FilterSpec::matched(&sys, GainPolicy::DarePerConfig).unwrap();
        let mut cfg = RunConfig::new(sys, filt, 99);
        cfg.steps = 2_000;
        let a = simulate_run(&cfg).unwrap();
        let b = simulate_run(&cfg).unwrap();
        assert!(a.nis.z2.iter().zip(&b.nis.z2).all(|(x, y)| x.to_bits() == y.to_bits()));
        assert_eq!(a, b);
        cfg.seed = 100;
        assert_ne!(simulate_run(&cfg).unwrap().nis.z2, a.nis.z2);
    }

    #[test]
    fn correctly_specified_scalar_nis_near_one() {
        let sys = scalar_system(1.0, 1.0);
        let filt = FilterSpec::matched(&sys, GainPolicy::DarePerConfig).unwrap();
        let out = simulate_nis(&RunConfig::new(sys, filt, 2024)).unwrap();
        assert_eq!(out.z2.len(), DEFAULT_STEPS);
        assert!((0.94..=1.06).contains(&out.nis_mean), "{}", out.nis_mean);
        assert!((out.gated_fraction - 0.01).abs() <= 0.005, "{}", out.gated_fraction);
        assert!(out.nis_q >= out.nis_mean);
    }

    #[test]
    fn unstable_gain_is_rejected() {
        let sys = scalar_system(1.0, 1.0);
        let filt = FilterSpec::matched(&sys, GainPolicy::FixedRef(Mat::scalar(2.0))).unwrap();
        assert!(matches!(simulate_run(&RunConfig::new(sys, filt, 1)), Err(Error::Unstable { .. })));
    }

    #[test]
    fn nis_stats_examples() {
        assert_eq!(nis_stats(&[3.5; 7], 0.9).unwrap(), (3.5, 3.5));
        assert_eq!(nis_stats(&[4.0, 1.0, 3.0, 2.0], 0.5).unwrap(), (2.5, 2.5));
        assert!(nis_stats(&[], 0.5).is_err());
        assert!(nis_stats(&[1.0], 1.0).is_err());
    }

    #[test]
    fn gate_extremes() {
        let z = [0.5, 1.0, 2.0, 8.0];
        assert_eq!(apply_gate(&z, 8.0).unwrap().1, 0.0);
        assert_eq!(apply_gate(&z, 0.25).unwrap().1, 1.0);
        let (flags, frac) = apply_gate(&z, 1.5).unwrap();
        assert_eq!(flags, vec![true, true, false, false]);
        assert_eq!(frac, 0.5);
        assert!(apply_gate(&z, 0.0).is_err());
    }

    #[test]
    fn psd_factor_handles_singular() {
        let m = Mat::from_rows(&[[4.0, 2.0], [2.0, 1.0]]).unwrap();
        let l = psd_factor(&m).unwrap();
        let back = &l * &l.transpose();
        assert!((&back - &m).max_abs() < 1e-14);
        assert!(psd_factor(&Mat::diag(&[1.0, -1.0])).is_err());
    }
}
