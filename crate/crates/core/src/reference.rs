//! Independent oracles: crude Monte Carlo and exact two-component
//! probabilities by 2-D quadrature. These deliberately avoid the subset
//! simulation code paths so they can validate them.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::normal;
use crate::sampler::{sample_unconditional, GaussianMap, RngStream};
use crate::{Error, Result};

/// Absolute tolerance of the bivariate normal CDF quadrature.
pub const BIVARIATE_CDF_TOL: f64 = 1e-8;
/// Integration box edge in standard deviations; mass outside is < 1e-15.
const BOX_EDGE: f64 = 8.5;
/// Default crude-MCS sample cap (keeps a c.o.v. 0.01 target for
/// probabilities around 3e-4 feasible while bounding runtime).
pub const DEFAULT_MCS_CAP: u64 = 100_000_000;

const MCS_BATCH: u64 = 65_536;
/// Batches evaluated between c.o.v. checks; fixed so results do not depend
/// on thread count.
const MCS_GROUP: u64 = 8;

/// Crude Monte Carlo estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McsResult {
    pub p_hat: f64,
    pub n_used: u64,
    pub std_err: f64,
    pub seed: u64,
    /// Set when a c.o.v. target could not be met within the sample cap.
    pub hit_cap: bool,
}

/// Stopping rule for crude Monte Carlo.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum McsTarget {
    /// Fixed sample count.
    Samples(u64),
    /// Run until s.e./p̂ reaches `cov`, up to `cap` samples.
    TargetCov { cov: f64, cap: u64 },
}

/// Crude Monte Carlo over i.i.d. unconditional samples. `make_ls` builds a
/// limit-state evaluator per worker; failure is a limit-state value of
/// exactly zero. Batches draw from per-batch streams, so the estimate is
/// independent of thread count and scheduling.
pub fn crude_mcs<L, F>(make_ls: F, map: &GaussianMap, target: McsTarget, seed: u64) -> McsResult
where
    L: FnMut(&[f64]) -> f64,
    F: Fn() -> L + Sync,
{
    let count_batch = |batch: u64, size: u64| -> u64 {
        let mut ls = make_ls();
        let mut rng = RngStream::new(seed, batch).rng();
        let states = sample_unconditional(map, size as usize, &mut rng);
        states.iter().filter(|s| ls(&s.z) == 0.0).count() as u64
    };

    let (mut failures, mut n_used) = (0u64, 0u64);
    let mut hit_cap = false;
    match target {
        McsTarget::Samples(n) => {
            let batches = n.div_ceil(MCS_BATCH);
            failures = (0..batches)
                .into_par_iter()
                .map(|b| {
                    let size = MCS_BATCH.min(n - b * MCS_BATCH);
                    count_batch(b, size)
                })
                .sum();
            n_used = n;
        }
        McsTarget::TargetCov { cov, cap } => {
            let mut next_batch = 0u64;
            loop {
                let group: u64 = (0..MCS_GROUP)
                    .into_par_iter()
                    .map(|i| count_batch(next_batch + i, MCS_BATCH))
                    .sum();
                failures += group;
                next_batch += MCS_GROUP;
                n_used += MCS_GROUP * MCS_BATCH;
                let p = failures as f64 / n_used as f64;
                if p > 0.0 {
                    let se = (p * (1.0 - p) / n_used as f64).sqrt();
                    if se / p <= cov {
                        break;
                    }
                }
                if n_used >= cap {
                    hit_cap = true;
                    break;
                }
            }
        }
    }
    let p_hat = failures as f64 / n_used as f64;
    McsResult {
        p_hat,
        n_used,
        std_err: (p_hat * (1.0 - p_hat) / n_used as f64).sqrt(),
        seed,
        hit_cap,
    }
}

/// Series (either component failing fails the pair) or parallel (both must
/// fail) arrangement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SystemKind {
    Series,
    Parallel,
}

/// Two-component system in terms of reliability indices and margin
/// correlation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoComponentSystem {
    pub kind: SystemKind,
    pub beta1: f64,
    pub beta2: f64,
    pub rho: f64,
}

/// Exact failure probability of a two-component system:
/// parallel = Φ₂(−β₁, −β₂; ρ), series = Φ(−β₁) + Φ(−β₂) − Φ₂(−β₁, −β₂; ρ).
pub fn exact_two_component(system: &TwoComponentSystem) -> Result<f64> {
    let joint = bivariate_normal_cdf(-system.beta1, -system.beta2, system.rho)?;
    Ok(match system.kind {
        SystemKind::Parallel => joint,
        SystemKind::Series => {
            (normal::cdf(-system.beta1) + normal::cdf(-system.beta2) - joint).clamp(0.0, 1.0)
        }
    })
}

/// P(X ≤ a, Y ≤ b) for standard bivariate normal (X, Y) with correlation
/// `rho`, by adaptive tensor-product Gauss-Legendre quadrature over the
/// truncated box [−8.5, a]×[−8.5, b]. Panels per axis double until two
/// successive refinements agree within [`BIVARIATE_CDF_TOL`]/10.
pub fn bivariate_normal_cdf(a: f64, b: f64, rho: f64) -> Result<f64> {
    if rho.abs() > 1.0 - 1e-6 {
        return Err(Error::NearSingularCorrelation { rho });
    }
    if a <= -BOX_EDGE || b <= -BOX_EDGE {
        return Ok(0.0);
    }
    let ax = a.min(BOX_EDGE);
    let bx = b.min(BOX_EDGE);

    let one_m_r2 = 1.0 - rho * rho;
    let norm = 1.0 / (2.0 * std::f64::consts::PI * one_m_r2.sqrt());
    let density =
        |x: f64, y: f64| norm * (-(x * x - 2.0 * rho * x * y + y * y) / (2.0 * one_m_r2)).exp();

    let mut previous = f64::NAN;
    let mut panels = 2usize;
    while panels <= 128 {
        let estimate = tensor_gauss_legendre(&density, ax, bx, panels);
        if !previous.is_nan() && (estimate - previous).abs() <= BIVARIATE_CDF_TOL / 10.0 {
            return Ok(estimate);
        }
        previous = estimate;
        panels *= 2;
    }
    Err(Error::NearSingularCorrelation { rho })
}

/// 16-point Gauss-Legendre abscissas/weights on [-1, 1] (positive half).
const GL_X: [f64; 8] = [
    0.095_012_509_837_637_44,
    0.281_603_550_779_258_9,
    0.458_016_777_657_227_4,
    0.617_876_244_402_643_8,
    0.755_404_408_355_003_0,
    0.865_631_202_387_831_8,
    0.944_575_023_073_232_6,
    0.989_400_934_991_649_9,
];
const GL_W: [f64; 8] = [
    0.189_450_610_455_068_5,
    0.182_603_415_044_923_6,
    0.169_156_519_395_002_5,
    0.149_595_988_816_576_7,
    0.124_628_971_255_533_9,
    0.095_158_511_682_492_8,
    0.062_253_523_938_647_9,
    0.027_152_459_411_754_1,
];

fn tensor_gauss_legendre(f: &impl Fn(f64, f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let lo = -BOX_EDGE;
    let wx = (a - lo) / panels as f64;
    let wy = (b - lo) / panels as f64;
    let mut nodes_x = Vec::with_capacity(panels * 16);
    let mut nodes_y = Vec::with_capacity(panels * 16);
    for p in 0..panels {
        let cx = lo + (p as f64 + 0.5) * wx;
        let cy = lo + (p as f64 + 0.5) * wy;
        for i in 0..8 {
            nodes_x.push((cx - 0.5 * wx * GL_X[i], 0.5 * wx * GL_W[i]));
            nodes_x.push((cx + 0.5 * wx * GL_X[i], 0.5 * wx * GL_W[i]));
            nodes_y.push((cy - 0.5 * wy * GL_X[i], 0.5 * wy * GL_W[i]));
            nodes_y.push((cy + 0.5 * wy * GL_X[i], 0.5 * wy * GL_W[i]));
        }
    }
    let mut total = 0.0;
    for &(x, wxi) in &nodes_x {
        let mut row = 0.0;
        for &(y, wyi) in &nodes_y {
            row += wyi * f(x, y);
        }
        total += wxi * row;
    }
    total
}
