//! Posterior MSE bounds for tracking in clutter.
//!
//! The measurement information at a state is
//! `Lambda1 * H^T R^-1 H + Lambda2 * grad(psi) grad(psi)^T`, averaged over the
//! measurement count. The three variants differ only in `Lambda2`:
//! the PCRLB drops it, the EFIM keeps the detection-probability term and the
//! IPCRLB keeps all three terms.

mod integrals;

pub use integrals::{
    gate_detection_quantities, igf_lambda2, irf_lambda1, lambda_factors, upsilon_mask, Estimate,
    FactorInputs, LambdaFactors, SampleSet, UpsilonMask, DEFAULT_BATCHES,
};

use serde::{Deserialize, Serialize};

use crate::clutter::{cardinality_probability, measurement_jacobian, ClutterModel};
use crate::error::{Error, Result};
use crate::geometry::KinematicState;
use crate::linalg::{spd_inverse, symmetrize};
use crate::tmu::{evaluate_tmu, snr_gradient, CovForm, MeasCov, SignalModel};
use crate::tracker::MotionModel;
use crate::{Mat3, Mat3x4, Mat4, Vec4};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundVariant {
    Ipcrlb,
    Efim,
    Pcrlb,
}

impl BoundVariant {
    pub const ALL: [BoundVariant; 3] = [BoundVariant::Ipcrlb, BoundVariant::Efim, BoundVariant::Pcrlb];

    pub fn name(self) -> &'static str {
        match self {
            BoundVariant::Ipcrlb => "ipcrlb",
            BoundVariant::Efim => "efim",
            BoundVariant::Pcrlb => "pcrlb",
        }
    }
}

/// Monte Carlo settings of the factor integrals. The gate size comes from
/// the clutter model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct McConfig {
    pub n_samples: usize,
    pub m_max: usize,
    pub seed: u64,
}

impl Default for McConfig {
    fn default() -> Self {
        Self { n_samples: 20000, m_max: 3, seed: 0 }
    }
}

impl McConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_samples == 0 || self.m_max == 0 {
            return Err(Error::Config("bounds.n_samples and bounds.m_max must be at least 1".into()));
        }
        Ok(())
    }
}

/// Everything the measurement information needs at one state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasurementContext {
    pub psi: f64,
    pub pd: f64,
    pub p_fa: f64,
    pub cov: MeasCov,
    pub jacobian: Mat3x4,
    pub snr_gradient: Vec4,
    /// Expected clutter count in the gate.
    pub lambda_vg: f64,
}

impl MeasurementContext {
    pub fn new(
        target: &KinematicState,
        tx: &KinematicState,
        rx: &KinematicState,
        sig: &SignalModel,
        clutter: &ClutterModel,
    ) -> Result<Self> {
        let tmu = evaluate_tmu(target, tx, rx, sig, CovForm::Assumption1)?;
        if !tmu.cov.is_diagonal() {
            return Err(Error::domain(
                "bounds assume a diagonal measurement covariance; the signal model has S2 != 0",
            ));
        }
        Ok(Self {
            psi: tmu.psi,
            pd: tmu.pd,
            p_fa: sig.p_fa,
            cov: tmu.cov,
            jacobian: measurement_jacobian(target, tx, rx)?,
            snr_gradient: snr_gradient(target, tx, rx, sig.vartheta0)?,
            lambda_vg: clutter.expected_count(&tmu.cov),
        })
    }

    pub fn factor_inputs(&self) -> FactorInputs {
        FactorInputs {
            psi: self.psi,
            pd: self.pd,
            lambda_vg: self.lambda_vg,
            p_fa: self.p_fa,
        }
    }

    /// `H^T R^-1 H`.
    pub fn standard_information(&self) -> Mat4 {
        let r_inv: Mat3 = self.cov.inverse();
        symmetrize(&(self.jacobian.transpose() * r_inv * self.jacobian))
    }

    pub fn snr_outer(&self) -> Mat4 {
        self.snr_gradient * self.snr_gradient.transpose()
    }
}

fn combine(standard: &Mat4, outer: &Mat4, lambda1: f64, lambda2: f64, mask: UpsilonMask) -> Mat4 {
    let j = standard * lambda1;
    // an all-off mask skips the outer product entirely
    let j = if mask.iter().any(|&on| on) { j + outer * lambda2 } else { j };
    symmetrize(&j)
}

/// Conditional measurement information for `m` measurements.
pub fn conditional_info_matrix(ctx: &MeasurementContext, factors: &LambdaFactors, variant: BoundVariant) -> Mat4 {
    let mask = upsilon_mask(variant);
    combine(&ctx.standard_information(), &ctx.snr_outer(), factors.lambda1.mean, factors.lambda2_masked(mask), mask)
}

/// Expected measurement information, summed over `m = 1..=m_max`.
pub fn measurement_info(ctx: &MeasurementContext, variant: BoundVariant, samples: &SampleSet, m_max: usize) -> Mat4 {
    measurement_info_batches(ctx, variant, samples, m_max).0
}

/// Expected measurement information with an explicit choice of gain-factor
/// terms.
pub fn measurement_info_masked(ctx: &MeasurementContext, mask: UpsilonMask, samples: &SampleSet, m_max: usize) -> Mat4 {
    masked_info_batches(ctx, mask, samples, m_max).0
}

/// Expected measurement information plus one estimate per sample batch.
pub fn measurement_info_batches(
    ctx: &MeasurementContext,
    variant: BoundVariant,
    samples: &SampleSet,
    m_max: usize,
) -> (Mat4, Vec<Mat4>) {
    masked_info_batches(ctx, upsilon_mask(variant), samples, m_max)
}

fn masked_info_batches(ctx: &MeasurementContext, mask: UpsilonMask, samples: &SampleSet, m_max: usize) -> (Mat4, Vec<Mat4>) {
    let standard = ctx.standard_information();
    let outer = ctx.snr_outer();
    let inputs = ctx.factor_inputs();
    let mut total = Mat4::zeros();
    let mut batches = vec![Mat4::zeros(); samples.batches()];
    for m in 1..=m_max {
        let p = cardinality_probability(ctx.pd, ctx.lambda_vg, m);
        if p == 0.0 {
            continue;
        }
        let f = lambda_factors(&inputs, m, samples);
        total += combine(&standard, &outer, f.lambda1.mean, f.lambda2_masked(mask), mask) * p;
        for (b, jb) in batches.iter_mut().enumerate() {
            *jb += combine(&standard, &outer, f.batch_lambda1(b), f.batch_lambda2_masked(b, mask), mask) * p;
        }
    }
    (total, batches)
}

/// Recursive information state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FimState {
    pub j: Mat4,
    pub f: Mat4,
    pub q: Mat4,
    pub k: usize,
}

impl FimState {
    /// Starts from the inverse of the prior covariance.
    pub fn from_prior(prior_cov: &Mat4, model: &MotionModel) -> Result<Self> {
        Ok(Self {
            j: spd_inverse(prior_cov)?,
            f: model.f,
            q: model.q,
            k: 0,
        })
    }
}

/// One step of `J_k = (Q + F J^-1 F^T)^-1 + J_Z`.
pub fn fim_step(prev: &FimState, j_z: &Mat4) -> Result<FimState> {
    let p = spd_inverse(&prev.j)?;
    let predicted = symmetrize(&(prev.q + prev.f * p * prev.f.transpose()));
    let j = symmetrize(&(spd_inverse(&predicted)? + j_z));
    Ok(FimState { j, k: prev.k + 1, ..*prev })
}

/// Trace of the bound, total and position block.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundTrace {
    pub full: f64,
    pub position: f64,
}

pub fn bound_trace(fim: &FimState) -> Result<BoundTrace> {
    let inv = spd_inverse(&fim.j)?;
    Ok(BoundTrace {
        full: inv.trace(),
        position: inv[(0, 0)] + inv[(1, 1)],
    })
}
