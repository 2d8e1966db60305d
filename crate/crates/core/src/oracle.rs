//! Reference posterior moments by two-dimensional quadrature.
//!
//! For homoskedastic arms, the joint posterior of the hyperparameters
//! (location `mu`, marginal variance `tau2`) under flat improper priors is
//!
//! ```text
//! p(mu, tau2 | m) ∝ (tau2)^(-k/2) exp{ -[k (mbar - mu)^2 + s2] / (2 tau2) }
//! ```
//!
//! supported on `tau2 >= sigma2`. Conditional on the hyperparameters, each
//! arm mean is normal with mean `mu + (1 - sigma2/tau2)(m_k - mu)` and
//! variance `(1 - sigma2/tau2) sigma2`. This module integrates those
//! conditional moments over a grid, honoring the truncation at
//! `tau2 = sigma2` that the closed-form estimators ignore. It exists to
//! validate the closed forms, not to replace them: it is orders of
//! magnitude slower and restricted to equal standard errors.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::estimator::ArmSummary;

/// Quadrature layout. The `mu` grid spans `mu_span_sd` posterior standard
/// deviations either side of the grand mean (at least 6); the `tau2` grid
/// is log-spaced from `sigma2` up to `tau_upper_factor` times the
/// dispersion-based scale estimate, or, when the factor is `None`, up to a
/// point where a tail bound on the variance posterior leaves mass below
/// 1e-9. Few-arm posteriors have heavy tails in both hyperparameters, so
/// below ~8 arms the `mu` span usually needs widening past the default.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridSpec {
    pub n_mu: usize,
    pub n_tau: usize,
    pub mu_span_sd: f64,
    pub tau_upper_factor: Option<f64>,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            n_mu: 801,
            n_tau: 2001,
            mu_span_sd: 12.0,
            tau_upper_factor: None,
        }
    }
}

/// Posterior mean and variance of one arm's true mean.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PosteriorMoments {
    pub arm_id: String,
    pub mean: f64,
    pub variance: f64,
}

/// Exact-by-quadrature posterior moments of every arm mean.
///
/// Requires at least 4 arms (the flat-prior posterior is improper below
/// that) and a common positive standard error. Fails with a diagnostic
/// when more than 1e-6 of posterior mass sits on the outer grid cells,
/// which signals that the grid does not cover the support.
pub fn posterior_oracle(arms: &[ArmSummary], grid: &GridSpec) -> Result<Vec<PosteriorMoments>> {
    if arms.len() < 4 {
        return Err(Error::TooFewArms {
            found: arms.len(),
            min: 4,
        });
    }
    for arm in arms {
        arm.validate()?;
    }
    if grid.mu_span_sd < 6.0 {
        return Err(Error::InvalidInput(format!(
            "mu grid must span at least 6 posterior standard deviations, got {}",
            grid.mu_span_sd
        )));
    }
    if grid.n_mu < 3 || grid.n_tau < 3 || grid.tau_upper_factor.is_some_and(|f| f <= 1.0) {
        return Err(Error::InvalidInput(
            "grid needs >= 3 points per axis and tau_upper_factor > 1".into(),
        ));
    }
    let sigma = arms[0].std_err;
    if sigma <= 0.0 {
        return Err(Error::InvalidInput(
            "oracle requires a positive common standard error".into(),
        ));
    }
    for arm in arms {
        if (arm.std_err - sigma).abs() > 1e-9 * sigma {
            return Err(Error::InvalidInput(format!(
                "oracle requires homoskedastic arms; {} has std_err {} vs {}",
                arm.arm_id, arm.std_err, sigma
            )));
        }
    }

    let k = arms.len() as f64;
    let grand_mean = arms.iter().map(|a| a.mean).sum::<f64>() / k;
    // Work in coordinates centered on the grand mean; shift back at the end.
    let centered: Vec<f64> = arms.iter().map(|a| a.mean - grand_mean).collect();
    let s2: f64 = centered.iter().map(|d| d * d).sum();

    let sigma2 = sigma * sigma;
    let tau_scale = (s2 / (k - 3.0)).max(sigma2);
    let tau_hi = match grid.tau_upper_factor {
        Some(factor) => factor * tau_scale,
        None => auto_tau_upper(arms.len(), s2, sigma2),
    };
    let mu_half_width = grid.mu_span_sd * (tau_scale / k).sqrt();

    let mu_grid: Vec<f64> = (0..grid.n_mu)
        .map(|i| -mu_half_width + 2.0 * mu_half_width * i as f64 / (grid.n_mu - 1) as f64)
        .collect();
    let log_lo = sigma2.ln();
    let log_hi = tau_hi.ln();
    let tau_grid: Vec<f64> = (0..grid.n_tau)
        .map(|j| (log_lo + (log_hi - log_lo) * j as f64 / (grid.n_tau - 1) as f64).exp())
        .collect();

    // Log-weights on the product grid, with trapezoid end weights and the
    // log-space Jacobian folded in; normalized after subtracting the max.
    let mut log_weights = vec![0.0; grid.n_mu * grid.n_tau];
    let mut max_lw = f64::NEG_INFINITY;
    for (j, &tau2) in tau_grid.iter().enumerate() {
        let base = -(k / 2.0) * tau2.ln() - s2 / (2.0 * tau2) + tau2.ln();
        let trap_tau = if j == 0 || j == grid.n_tau - 1 {
            0.5_f64.ln()
        } else {
            0.0
        };
        for (i, &mu) in mu_grid.iter().enumerate() {
            let trap_mu = if i == 0 || i == grid.n_mu - 1 {
                0.5_f64.ln()
            } else {
                0.0
            };
            let lw = base - k * mu * mu / (2.0 * tau2) + trap_tau + trap_mu;
            log_weights[j * grid.n_mu + i] = lw;
            if lw > max_lw {
                max_lw = lw;
            }
        }
    }

    let mut total = 0.0;
    let mut boundary = 0.0;
    let mut weights = vec![0.0; log_weights.len()];
    for (idx, lw) in log_weights.iter().enumerate() {
        let w = (lw - max_lw).exp();
        weights[idx] = w;
        total += w;
        let i = idx % grid.n_mu;
        let j = idx / grid.n_mu;
        if i == 0 || i == grid.n_mu - 1 || j == grid.n_tau - 1 {
            boundary += w;
        }
    }
    let boundary_mass = boundary / total;
    if boundary_mass > 1e-6 {
        return Err(Error::GridTooCoarse {
            mass: boundary_mass,
        });
    }

    let mut first = vec![0.0; arms.len()];
    let mut second = vec![0.0; arms.len()];
    for (j, &tau2) in tau_grid.iter().enumerate() {
        let shrink = 1.0 - sigma2 / tau2;
        let cond_var = shrink * sigma2;
        for (i, &mu) in mu_grid.iter().enumerate() {
            let w = weights[j * grid.n_mu + i];
            if w == 0.0 {
                continue;
            }
            let anchor = mu * (1.0 - shrink);
            for (arm, dev) in centered.iter().enumerate() {
                let cond_mean = anchor + shrink * dev;
                first[arm] += w * cond_mean;
                second[arm] += w * (cond_mean * cond_mean + cond_var);
            }
        }
    }

    Ok(arms
        .iter()
        .enumerate()
        .map(|(idx, arm)| {
            let mean = first[idx] / total;
            let variance = second[idx] / total - mean * mean;
            PosteriorMoments {
                arm_id: arm.arm_id.clone(),
                mean: mean + grand_mean,
                variance,
            }
        })
        .collect())
}

/// Upper grid bound leaving under 1e-9 of the variance posterior beyond
/// it, from a tail bound on the inverse-gamma (or, for zero dispersion,
/// the pure power-law) posterior.
fn auto_tau_upper(k: usize, s2: f64, sigma2: f64) -> f64 {
    let eps: f64 = 1e-9;
    let half_dof = (k as f64 - 3.0) / 2.0;
    // Truncated power-law tail: (T / sigma2)^(-(k-3)/2) <= eps.
    let power_law = sigma2 * eps.powf(-2.0 / (k as f64 - 3.0));
    if s2 <= 0.0 {
        return power_law;
    }
    // Inverse-gamma tail via P(Gamma(a) <= x) <= x^a / Gamma(a + 1).
    let ln_x = (eps.ln() + ln_gamma_half(k as u64 - 1)) / half_dof;
    let ig_bound = (s2 / 2.0) * (-ln_x).exp();
    ig_bound.max(power_law)
}

/// `ln Gamma(n2 / 2)` for positive integer `n2`, exact by recursion from
/// `Gamma(1) = 1` and `Gamma(1/2) = sqrt(pi)`.
fn ln_gamma_half(n2: u64) -> f64 {
    if n2.is_multiple_of(2) {
        (1..n2 / 2).map(|i| (i as f64).ln()).sum()
    } else {
        let k = (n2 - 1) / 2;
        0.5 * std::f64::consts::PI.ln()
            + (1..=k).map(|i| ((2 * i - 1) as f64).ln()).sum::<f64>()
            - k as f64 * std::f64::consts::LN_2
    }
}
