//! Monte Carlo evaluation of the information reduction factor and the
//! information gain factor.
//!
//! Both factors are integrals over the whitened measurement set
//! `z^1 .. z^m`, each component on `[-g, g]`, sampled uniformly. The
//! numerators only involve `z^1` and `z^2` (the other terms were folded in
//! by symmetry) but the mixture density in the denominator sums over every
//! point, so all `m` blocks are drawn. Everything is evaluated with
//! `|R| = 1`: every term is invariant to the scale of `R` once the clutter
//! rate is expressed as the expected gate count `lambda V_g`.

use std::f64::consts::PI;

use rand::Rng;

use crate::rng::SimRng;
use crate::MEAS_DIM;

use super::BoundVariant;

/// Default number of batches used for batch-means error estimates.
pub const DEFAULT_BATCHES: usize = 20;

/// Mean and standard error of a Monte Carlo estimate.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Estimate {
    pub mean: f64,
    pub std_err: f64,
}

/// Precomputed whitened samples shared by every integrand and every
/// candidate state that uses the same seed.
#[derive(Debug, Clone)]
pub struct SampleSet {
    gate: f64,
    batches: usize,
    max_m: usize,
    q1: Vec<f64>,
    q2: Vec<f64>,
    z1_sq: Vec<f64>,
    e1: Vec<f64>,
    e2: Vec<f64>,
    /// Row-major `n x max_m`: running sums of `exp(-|z^i|^2 / 2)` over `i <= j`.
    cum_e: Vec<f64>,
}

impl SampleSet {
    /// Draws `n_samples` sets of `max(max_m, 2)` points, enough for any
    /// measurement count up to `max_m`.
    pub fn from_rng(rng: &mut SimRng, n_samples: usize, gate: f64, max_m: usize) -> Self {
        assert!(n_samples >= 1, "n_samples must be at least 1");
        assert!(max_m >= 1, "max_m must be at least 1");
        let width = max_m.max(2);
        let mut q1 = Vec::with_capacity(n_samples);
        let mut q2 = Vec::with_capacity(n_samples);
        let mut z1_sq = Vec::with_capacity(n_samples);
        let mut e1 = Vec::with_capacity(n_samples);
        let mut e2 = Vec::with_capacity(n_samples);
        let mut cum_e = Vec::with_capacity(n_samples * max_m);
        for _ in 0..n_samples {
            let mut acc = 0.0;
            for i in 0..width {
                let z: [f64; MEAS_DIM] = std::array::from_fn(|_| gate * (2.0 * rng.random::<f64>() - 1.0));
                let q: f64 = z.iter().map(|x| x * x).sum();
                let e = (-0.5 * q).exp();
                match i {
                    0 => {
                        q1.push(q);
                        z1_sq.push(z[0] * z[0]);
                        e1.push(e);
                    }
                    1 => {
                        q2.push(q);
                        e2.push(e);
                    }
                    _ => {}
                }
                acc += e;
                if i < max_m {
                    cum_e.push(acc);
                }
            }
        }
        Self {
            gate,
            batches: DEFAULT_BATCHES.min(n_samples),
            max_m,
            q1,
            q2,
            z1_sq,
            e1,
            e2,
            cum_e,
        }
    }

    pub fn generate(seed: u64, n_samples: usize, gate: f64, max_m: usize) -> Self {
        use rand::SeedableRng;
        Self::from_rng(&mut SimRng::seed_from_u64(seed), n_samples, gate, max_m)
    }

    /// Largest measurement count the set supports.
    pub fn max_m(&self) -> usize {
        self.max_m
    }

    pub fn with_batches(mut self, batches: usize) -> Self {
        self.batches = batches.clamp(1, self.len());
        self
    }

    pub fn len(&self) -> usize {
        self.q1.len()
    }

    pub fn is_empty(&self) -> bool {
        self.q1.is_empty()
    }

    pub fn gate(&self) -> f64 {
        self.gate
    }

    pub fn batches(&self) -> usize {
        self.batches
    }

    fn batch_bounds(&self, b: usize) -> (usize, usize) {
        let n = self.len();
        (b * n / self.batches, (b + 1) * n / self.batches)
    }
}

/// Scalar inputs of the factor integrands at one state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FactorInputs {
    pub psi: f64,
    pub pd: f64,
    /// Expected clutter count in the gate.
    pub lambda_vg: f64,
    pub p_fa: f64,
}

/// `(d_g, l_g)` for `m` measurements in the gate.
pub fn gate_detection_quantities(pd: f64, lambda_vg: f64, m: usize) -> (f64, f64) {
    let l = (1.0 - pd) * lambda_vg + m as f64 * pd;
    let d = if l > 0.0 { m as f64 * pd / l } else { 0.0 };
    (d, l)
}

#[derive(Debug, Clone, Copy, Default)]
struct Acc {
    sum: f64,
    sum_sq: f64,
}

impl Acc {
    fn push(&mut self, x: f64) {
        self.sum += x;
        self.sum_sq += x * x;
    }

    fn estimate(&self, n: usize, scale: f64) -> Estimate {
        let nf = n as f64;
        let mean = self.sum / nf;
        let var = if n > 1 {
            ((self.sum_sq - nf * mean * mean) / (nf - 1.0)).max(0.0)
        } else {
            0.0
        };
        Estimate {
            mean: scale * mean,
            std_err: scale * (var / nf).sqrt(),
        }
    }
}

/// Which of the three gain-factor terms to include.
pub type UpsilonMask = [bool; 3];

pub fn upsilon_mask(variant: BoundVariant) -> UpsilonMask {
    match variant {
        BoundVariant::Ipcrlb => [true, true, true],
        BoundVariant::Efim => [true, false, false],
        BoundVariant::Pcrlb => [false, false, false],
    }
}

/// Factor estimates for one measurement count `m`.
#[derive(Debug, Clone)]
pub struct LambdaFactors {
    pub m: usize,
    pub lambda1: Estimate,
    /// Separate estimates of the three gain-factor terms.
    pub upsilon: [Estimate; 3],
    lambda2_ipcrlb: Estimate,
    lambda2_efim: Estimate,
    batch_lambda1: Vec<f64>,
    batch_upsilon: Vec<[f64; 3]>,
}

impl LambdaFactors {
    /// Gain factor built from the selected terms.
    pub fn lambda2_masked(&self, mask: UpsilonMask) -> f64 {
        let mut s = 0.0;
        for (u, on) in self.upsilon.iter().zip(mask) {
            if on {
                s += u.mean;
            }
        }
        s
    }

    pub fn lambda2(&self, variant: BoundVariant) -> f64 {
        self.lambda2_masked(upsilon_mask(variant))
    }

    pub fn lambda2_estimate(&self, variant: BoundVariant) -> Estimate {
        match variant {
            BoundVariant::Ipcrlb => Estimate { mean: self.lambda2(variant), ..self.lambda2_ipcrlb },
            BoundVariant::Efim => self.lambda2_efim,
            BoundVariant::Pcrlb => Estimate::default(),
        }
    }

    pub fn batch_count(&self) -> usize {
        self.batch_lambda1.len()
    }

    pub fn batch_lambda1(&self, b: usize) -> f64 {
        self.batch_lambda1[b]
    }

    pub fn batch_lambda2(&self, b: usize, variant: BoundVariant) -> f64 {
        self.batch_lambda2_masked(b, upsilon_mask(variant))
    }

    pub fn batch_lambda2_masked(&self, b: usize, mask: UpsilonMask) -> f64 {
        let mut s = 0.0;
        for (u, on) in self.batch_upsilon[b].iter().zip(mask) {
            if on {
                s += u;
            }
        }
        s
    }
}

/// Estimates both factors for `m >= 1` measurements on a shared sample set.
pub fn lambda_factors(inp: &FactorInputs, m: usize, samples: &SampleSet) -> LambdaFactors {
    assert!(m >= 1 && m <= samples.max_m, "m = {m} outside 1..={}", samples.max_m);
    let n = MEAS_DIM as f64;
    let ni = MEAS_DIM as i32;
    let mi = m as i32;
    let mf = m as f64;
    let w = (2.0 * samples.gate).powi(ni);
    let tp = (2.0 * PI).powi(ni);
    let stp = tp.sqrt();

    let (d, l) = gate_detection_quantities(inp.pd, inp.lambda_vg, m);
    let la = inp.lambda_vg / w;
    let ln_pfa = inp.p_fa.ln();
    let one_psi = 1.0 + inp.psi;

    let b0 = (1.0 - d) / w.powi(mi);
    // mixture weight of each individual point
    let b1 = d / (mf * w.powi(mi - 1) * stp);
    let c_l1 = d * d / (mf * w.powi(2 * mi - 2) * tp);

    let (c_u1, c_u2) = if l > 0.0 {
        (
            inp.lambda_vg * inp.lambda_vg * mf * mf * inp.pd * inp.pd * ln_pfa * ln_pfa
                / (l.powi(4) * one_psi.powi(4)),
            d / (inp.psi * w.powi(mi - 2)) * la * inp.pd * ln_pfa / (l * l * one_psi * one_psi),
        )
    } else {
        (0.0, 0.0)
    };
    let a1 = 1.0 / (mf * w.powi(2 * mi - 2) * tp);
    let a2 = 2.0 / (w.powi(2 * mi - 1) * stp);
    let a3 = 1.0 / w.powi(2 * mi);
    let k1 = 1.0 / (w.powi(mi - 1) * tp);
    let k2 = mf / (w.powi(mi) * stp);
    let c_u3 = d * d / (4.0 * inp.psi * inp.psi * mf * mf * w.powi(2 * mi - 2) * tp);
    let mm1 = mf - 1.0;

    // uniform density of the sampled blocks times the exact volume of the rest
    let scale = w.powi(mi);

    let mut l1 = Acc::default();
    let mut u = [Acc::default(); 3];
    let mut efim = Acc::default();
    let mut ipcrlb = Acc::default();
    let mut batch_lambda1 = Vec::with_capacity(samples.batches);
    let mut batch_upsilon = Vec::with_capacity(samples.batches);

    for b in 0..samples.batches {
        let (lo, hi) = samples.batch_bounds(b);
        let mut bl1 = 0.0;
        let mut bu = [0.0; 3];
        for i in lo..hi {
            let q1 = samples.q1[i];
            let q2 = samples.q2[i];
            let e1 = samples.e1[i];
            let e2 = samples.e2[i];
            let e11 = e1 * e1;
            let e12 = e1 * e2;
            let inv_beta = 1.0 / (b0 + b1 * samples.cum_e[i * samples.max_m + m - 1]);

            let x_l1 = c_l1 * samples.z1_sq[i] * e11 * inv_beta;
            let x_u1 = c_u1 * ((e11 + mm1 * e12) * a1 - a2 * e1 + a3) * inv_beta;
            let x_u2 = c_u2 * ((e11 * (q1 - n) + mm1 * e12 * (q2 - n)) * k1 - k2 * e1 * (q1 - n)) * inv_beta;
            let x_u3 = c_u3 * (mf * mm1 * e12 * (q1 - n) * (q2 - n) + mf * e11 * (q1 - n) * (q1 - n)) * inv_beta;

            l1.push(x_l1);
            u[0].push(x_u1);
            u[1].push(x_u2);
            u[2].push(x_u3);
            efim.push(x_u1);
            ipcrlb.push(x_u1 + x_u2 + x_u3);
            bl1 += x_l1;
            bu[0] += x_u1;
            bu[1] += x_u2;
            bu[2] += x_u3;
        }
        let s = scale / (hi - lo) as f64;
        batch_lambda1.push(bl1 * s);
        batch_upsilon.push([bu[0] * s, bu[1] * s, bu[2] * s]);
    }

    let ns = samples.len();
    LambdaFactors {
        m,
        lambda1: l1.estimate(ns, scale),
        upsilon: [u[0].estimate(ns, scale), u[1].estimate(ns, scale), u[2].estimate(ns, scale)],
        lambda2_ipcrlb: ipcrlb.estimate(ns, scale),
        lambda2_efim: efim.estimate(ns, scale),
        batch_lambda1,
        batch_upsilon,
    }
}

/// Information reduction factor for `m` measurements.
pub fn irf_lambda1(inp: &FactorInputs, m: usize, samples: &SampleSet) -> Estimate {
    lambda_factors(inp, m, samples).lambda1
}

/// Information gain factor for `m` measurements; zero for the PCRLB.
pub fn igf_lambda2(inp: &FactorInputs, m: usize, variant: BoundVariant, samples: &SampleSet) -> Estimate {
    if variant == BoundVariant::Pcrlb {
        return Estimate::default();
    }
    lambda_factors(inp, m, samples).lambda2_estimate(variant)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn inputs(pd: f64, lambda_vg: f64) -> FactorInputs {
        FactorInputs { psi: 8.0, pd, lambda_vg, p_fa: 1e-3 }
    }

    #[test]
    fn gate_quantities() {
        assert_eq!(gate_detection_quantities(1.0, 3.0, 2), (1.0, 2.0));
        assert_eq!(gate_detection_quantities(0.0, 3.0, 2).0, 0.0);
        assert_eq!(gate_detection_quantities(0.0, 0.0, 2), (0.0, 0.0));
        let (d, l) = gate_detection_quantities(0.9, 1.0, 2);
        assert_relative_eq!(l, 1.9, max_relative = 1e-15);
        assert_relative_eq!(d, 1.8 / 1.9, max_relative = 1e-15);
    }

    #[test]
    fn no_detection_means_no_information() {
        let s = SampleSet::generate(1, 2000, 4.0, 3);
        for m in 1..=3 {
            let f = lambda_factors(&inputs(0.0, 1.0), m, &s);
            assert_eq!(f.lambda1.mean, 0.0);
        }
    }

    #[test]
    fn clutter_free_single_measurement_is_nearly_one() {
        let s = SampleSet::generate(5, 20000, 4.0, 3);
        let f = lambda_factors(&inputs(1.0, 0.0), 1, &s);
        assert!((f.lambda1.mean - 1.0).abs() < 0.02, "{:?}", f.lambda1);
        assert_eq!(f.lambda2(BoundVariant::Efim), 0.0);
    }

    #[test]
    fn batches_average_to_the_total() {
        let s = SampleSet::generate(2, 1000, 4.0, 3);
        let f = lambda_factors(&inputs(0.8, 0.7), 2, &s);
        let mean_b: f64 = (0..f.batch_count()).map(|b| f.batch_lambda1(b)).sum::<f64>() / f.batch_count() as f64;
        assert_relative_eq!(mean_b, f.lambda1.mean, max_relative = 1e-12);
        let mean_b2: f64 = (0..f.batch_count())
            .map(|b| f.batch_lambda2(b, BoundVariant::Ipcrlb))
            .sum::<f64>()
            / f.batch_count() as f64;
        assert_relative_eq!(mean_b2, f.lambda2(BoundVariant::Ipcrlb), max_relative = 1e-10);
    }

    #[test]
    fn masks_select_terms() {
        let s = SampleSet::generate(3, 500, 4.0, 3);
        let f = lambda_factors(&inputs(0.7, 1.0), 2, &s);
        assert_eq!(f.lambda2(BoundVariant::Pcrlb), 0.0);
        assert_eq!(f.lambda2_masked([true, false, false]), f.lambda2(BoundVariant::Efim));
        assert_eq!(igf_lambda2(&inputs(0.7, 1.0), 2, BoundVariant::Pcrlb, &s), Estimate::default());
    }
}
