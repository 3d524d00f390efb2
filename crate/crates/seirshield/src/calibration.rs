//! Next-generation-matrix machinery: basic reproduction number,
//! transmission-rate calibration, the effective reproduction number along
//! trajectories and an implied-fatality diagnostic.

use crate::model::{GroupId, ModelParams, ModelState};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CalibrationError {
    #[error("next-generation matrix requires matching_alpha = 2, got {0}")]
    AlphaNotQuadratic(f64),
    #[error("power iteration did not converge within {0} iterations")]
    NonConvergence(usize),
    #[error("calibration target R0 must be > 0, got {0}")]
    InvalidTarget(f64),
    #[error("contact matrix is degenerate (zero spectral radius)")]
    DegenerateContacts,
}

/// Next-generation matrix: entry (j,k) is the expected number of group-j
/// infections caused by one infectious group-k individual over its
/// infectious period. Flags record which effects are folded in.
#[derive(Clone, Copy, Debug)]
pub struct NextGenMatrix {
    pub k: [[f64; 3]; 3],
    pub shielding_folded: bool,
    pub detection_folded: bool,
    pub depletion_folded: bool,
}

/// Builds the next-generation matrix at the given state and shielding
/// levels. Only defined in the quadratic matching case.
pub fn next_generation_matrix(
    params: &ModelParams,
    state: &ModelState,
    levels: &[f64; 3],
) -> Result<NextGenMatrix, CalibrationError> {
    if params.matching_alpha != 2.0 {
        return Err(CalibrationError::AlphaNotQuadratic(params.matching_alpha));
    }
    let mut k = [[0.0; 3]; 3];
    let mut shielding = false;
    let mut detection = false;
    let mut depletion = false;
    for gj in GroupId::ALL {
        let j = gj.index();
        let pj = &params.groups[gj];
        let sj = state.group(gj).susceptible;
        if (sj - pj.population_share).abs() > 1e-15 {
            depletion = true;
        }
        if levels[j] > 0.0 {
            shielding = true;
        }
        for gk in GroupId::ALL {
            let kk = gk.index();
            let pk = &params.groups[gk];
            if pk.undetected_exposed < 1.0 || pk.undetected_infectious < 1.0 {
                detection = true;
            }
            k[j][kk] = params.beta
                * (1.0 - pj.shielding_leakage * levels[j])
                * sj
                * params.contacts.rho[j][kk]
                * pk.undetected_exposed
                * pk.undetected_infectious
                * (1.0 - pk.shielding_leakage * levels[kk])
                / pk.infectious_exit;
        }
    }
    Ok(NextGenMatrix {
        k,
        shielding_folded: shielding,
        detection_folded: detection,
        depletion_folded: depletion,
    })
}

/// Next-generation matrix in the calibration context: fully susceptible
/// population, no shielding, no testing or tracing. This bypasses the
/// configured detection probabilities, so it does not require alpha = 2.
pub fn calibration_ngm(params: &ModelParams) -> NextGenMatrix {
    let mut k = [[0.0; 3]; 3];
    for gj in GroupId::ALL {
        for gk in GroupId::ALL {
            k[gj.index()][gk.index()] = params.beta
                * params.groups[gj].population_share
                * params.contacts.rho[gj.index()][gk.index()]
                / params.groups[gk].infectious_exit;
        }
    }
    NextGenMatrix {
        k,
        shielding_folded: false,
        detection_folded: false,
        depletion_folded: false,
    }
}

const POWER_MAX_ITERS: usize = 10_000;
const POWER_TOL: f64 = 1e-12;

/// Largest-magnitude eigenvalue modulus of a nonnegative 3x3 matrix via
/// power iteration on a diagonally shifted copy (the shift separates the
/// dominant eigenvalue when others tie in modulus).
pub fn spectral_radius(k: &[[f64; 3]; 3]) -> Result<f64, CalibrationError> {
    let shift = (0..3)
        .map(|j| k[j][0] + k[j][1] + k[j][2])
        .fold(0.0_f64, f64::max);
    if shift == 0.0 {
        return Ok(0.0);
    }
    let mut x = [1.0 / 3.0; 3];
    let mut lambda_prev = f64::INFINITY;
    for _ in 0..POWER_MAX_ITERS {
        let mut y = [0.0; 3];
        for j in 0..3 {
            y[j] = shift * x[j] + k[j][0] * x[0] + k[j][1] * x[1] + k[j][2] * x[2];
        }
        let norm = y[0] + y[1] + y[2];
        if norm == 0.0 {
            return Ok(0.0);
        }
        let lambda = norm; // x is L1-normalized, so the growth is the estimate
        for j in 0..3 {
            x[j] = y[j] / norm;
        }
        if (lambda - lambda_prev).abs() <= POWER_TOL * lambda.max(1.0) {
            return Ok(lambda - shift);
        }
        lambda_prev = lambda;
    }
    Err(CalibrationError::NonConvergence(POWER_MAX_ITERS))
}

/// Basic reproduction number of the parameter set: spectral radius of the
/// calibration-context next-generation matrix built on `params.contacts`.
pub fn r0(params: &ModelParams) -> Result<f64, CalibrationError> {
    spectral_radius(&calibration_ngm(params).k)
}

/// Transmission rate that makes [`r0`] equal `target_r0` for the given
/// contacts and group parameters. R0 is linear in the transmission rate,
/// so this is a single division by the unit-rate spectral radius.
pub fn calibrate_beta(params: &ModelParams, target_r0: f64) -> Result<f64, CalibrationError> {
    if target_r0 <= 0.0 || !target_r0.is_finite() {
        return Err(CalibrationError::InvalidTarget(target_r0));
    }
    let mut unit = *params;
    unit.beta = 1.0;
    let base = r0(&unit)?;
    if base <= 0.0 {
        return Err(CalibrationError::DegenerateContacts);
    }
    Ok(target_r0 / base)
}

/// Effective reproduction number at the current state: susceptible
/// depletion, shielding and detection all folded into the matrix.
pub fn effective_rt(
    state: &ModelState,
    levels: &[f64; 3],
    params: &ModelParams,
) -> Result<f64, CalibrationError> {
    spectral_radius(&next_generation_matrix(params, state, levels)?.k)
}

/// Fraction of an infected cohort that eventually dies, per group, with
/// the congestion term treated as zero: icu_share * death_rate / exit_rate.
/// Diagnostic for auditing the death-rate unit convention.
pub fn implied_ifr(params: &ModelParams) -> [f64; 3] {
    let mut out = [0.0; 3];
    for g in GroupId::ALL {
        let gp = &params.groups[g];
        out[g.index()] = gp.icu_share * gp.baseline_death_rate / gp.infectious_exit;
    }
    out
}
