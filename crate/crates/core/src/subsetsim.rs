//! Fixed-magnitude subset simulation over any non-negative limit-state
//! function whose failure domain is exactly {g = 0}.
//!
//! Level thresholds are the p0-quantiles of the current population's values;
//! the failure probability is the product of the level conditionals
//! p0^(m−1) · (final fraction). N_G counts one evaluation per fresh margin
//! vector: rejected proposals were evaluated once, repeated states reuse
//! their cached value.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::sampler::{
    derive_seed, populate_level, sample_unconditional, ChainState, GaussianMap, RngStream,
};
use crate::{Error, Result};

const REP_SALT: u64 = 0x5245_5045;

/// Subset-simulation parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SsConfig {
    /// Samples per level.
    pub n: usize,
    /// Conditional probability target per intermediate level; n·p0 must be a
    /// positive integer so seed bookkeeping stays exact.
    pub p0: f64,
    /// Cap on level populations in one run.
    pub max_levels: usize,
    /// Hamiltonian flow time of the MCMC proposal.
    pub t_f: f64,
    /// Master seed; all streams derive from it.
    pub seed: u64,
}

impl SsConfig {
    pub fn new(seed: u64) -> Self {
        Self {
            n: 1000,
            p0: 0.1,
            max_levels: 25,
            t_f: std::f64::consts::FRAC_PI_4,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p0 > 0.0 && self.p0 < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "p0 must lie in (0, 1), got {}",
                self.p0
            )));
        }
        let seeds = self.n as f64 * self.p0;
        if (seeds - seeds.round()).abs() > 1e-9 || seeds.round() < 1.0 {
            return Err(Error::InvalidConfig(format!(
                "n*p0 must be a positive integer, got {} * {} = {}",
                self.n, self.p0, seeds
            )));
        }
        if self.max_levels < 1 {
            return Err(Error::InvalidConfig("max_levels must be at least 1".into()));
        }
        if !self.t_f.is_finite() || self.t_f < 0.0 {
            return Err(Error::InvalidConfig(format!(
                "t_f must be finite and non-negative, got {}",
                self.t_f
            )));
        }
        Ok(())
    }

    /// Seed states per conditional level (n·p0).
    pub fn seeds_per_level(&self) -> usize {
        (self.n as f64 * self.p0).round() as usize
    }
}

/// One intermediate or final level: its threshold and the conditional
/// probability it contributed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelRecord {
    pub threshold: f64,
    pub conditional: f64,
}

/// Result of one subset-simulation run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SsResult {
    pub p_hat: f64,
    /// Intermediate levels (threshold > 0, conditional = p0) followed by the
    /// final level (threshold 0, conditional = failure fraction).
    pub levels: Vec<LevelRecord>,
    /// Limit-state evaluations (one per fresh margin vector).
    pub n_g: u64,
    pub wall_time_s: f64,
    /// Final level contained no failed sample; p_hat is zero.
    pub zero_failure_final: bool,
    pub seed: u64,
}

/// The p0-quantile threshold of a population of limit-state values: the
/// ⌈p0·n⌉-th smallest value. Returns 0 when that value is 0 (the failure
/// domain is reachable) or when it equals the population maximum (a
/// degenerate quantile that cannot contract the domain, as happens with
/// binary limit states).
pub fn quantile_threshold(values: &[f64], p0: f64) -> f64 {
    assert!(!values.is_empty(), "quantile of an empty population");
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let scaled = p0 * sorted.len() as f64;
    let idx = if (scaled - scaled.round()).abs() < 1e-9 {
        scaled.round() as usize
    } else {
        scaled.ceil() as usize
    }
    .clamp(1, sorted.len());
    let t = sorted[idx - 1];
    if t == 0.0 || t == sorted[sorted.len() - 1] {
        return 0.0;
    }
    t
}

/// Runs subset simulation; see [`run_ss_with_population`] for the variant
/// that also returns the final level population.
pub fn run_ss(
    ls: &mut dyn FnMut(&[f64]) -> f64,
    map: &GaussianMap,
    cfg: &SsConfig,
) -> Result<SsResult> {
    run_ss_internal(ls, map, cfg).map(|(res, _, _)| res)
}

/// As [`run_ss`], additionally returning the final level population (used by
/// the specialized fragility sweep to keep conditioning).
pub fn run_ss_with_population(
    ls: &mut dyn FnMut(&[f64]) -> f64,
    map: &GaussianMap,
    cfg: &SsConfig,
) -> Result<(SsResult, Vec<ChainState>)> {
    run_ss_internal(ls, map, cfg).map(|(res, pop, _)| (res, pop))
}

/// Internal: returns (result, final population, next unused stream id).
pub(crate) fn run_ss_internal(
    ls: &mut dyn FnMut(&[f64]) -> f64,
    map: &GaussianMap,
    cfg: &SsConfig,
) -> Result<(SsResult, Vec<ChainState>, u64)> {
    cfg.validate()?;
    if map.dim() == 0 {
        return Err(Error::InvalidConfig(
            "sampling space must have at least one dimension".into(),
        ));
    }
    let start = Instant::now();
    let mut n_g: u64 = 0;
    let mut next_stream: u64 = 0;

    let mut rng = RngStream::new(cfg.seed, next_stream).rng();
    next_stream += 1;
    let mut states = sample_unconditional(map, cfg.n, &mut rng);
    for st in &mut states {
        st.g = ls(&st.z);
        n_g += 1;
    }

    let mut levels: Vec<LevelRecord> = Vec::new();
    let mut p_hat = 1.0;
    let mut populations = 1usize;
    let mut values: Vec<f64> = Vec::with_capacity(cfg.n);
    loop {
        values.clear();
        values.extend(states.iter().map(|s| s.g));
        let threshold = quantile_threshold(&values, cfg.p0);
        if threshold == 0.0 {
            let failures = states.iter().filter(|s| s.g == 0.0).count();
            let fraction = failures as f64 / cfg.n as f64;
            levels.push(LevelRecord {
                threshold: 0.0,
                conditional: fraction,
            });
            p_hat *= fraction;
            let result = SsResult {
                p_hat,
                levels,
                n_g,
                wall_time_s: start.elapsed().as_secs_f64(),
                zero_failure_final: failures == 0,
                seed: cfg.seed,
            };
            return Ok((result, states, next_stream));
        }
        if populations >= cfg.max_levels {
            let partial = SsResult {
                p_hat,
                levels,
                n_g,
                wall_time_s: start.elapsed().as_secs_f64(),
                zero_failure_final: false,
                seed: cfg.seed,
            };
            return Err(Error::NoConvergence {
                max_levels: cfg.max_levels,
                partial: Box::new(partial),
            });
        }
        levels.push(LevelRecord {
            threshold,
            conditional: cfg.p0,
        });
        p_hat *= cfg.p0;

        // seeds: samples strictly below the threshold plus the lowest-indexed
        // ties at it, n*p0 in total
        let target_seeds = cfg.seeds_per_level();
        let seeds = crate::sampler::select_seeds(&states, threshold, target_seeds);
        debug_assert_eq!(seeds.len(), target_seeds);
        let chains = seeds.len() as u64;
        let mut domain = |z: &[f64]| {
            let g = ls(z);
            n_g += 1;
            if g <= threshold {
                Some(g)
            } else {
                None
            }
        };
        states = populate_level(
            map,
            seeds,
            cfg.n,
            cfg.t_f,
            cfg.seed,
            next_stream,
            &mut domain,
        )?;
        next_stream += chains;
        populations += 1;
    }
}

/// Summary of repeated, independently seeded subset-simulation runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepeatSummary {
    pub reps: usize,
    pub mean_p_hat: f64,
    /// Sample coefficient of variation of p̂ across repetitions.
    pub cov: f64,
    pub mean_n_g: f64,
    /// eff = c.o.v. · sqrt(mean N_G); lower is better.
    pub eff: f64,
    pub mean_wall_s: f64,
    pub runs: Vec<SsResult>,
}

/// Repeats subset simulation `reps` times with per-repetition seeds derived
/// from the master seed. Repetitions run in parallel; results are identical
/// for any thread count.
pub fn repeat_ss<L, F>(
    make_ls: F,
    map: &GaussianMap,
    cfg: &SsConfig,
    reps: usize,
) -> Result<RepeatSummary>
where
    L: FnMut(&[f64]) -> f64,
    F: Fn(usize) -> L + Sync,
{
    if reps < 2 {
        return Err(Error::InvalidConfig(
            "repetition summary needs at least 2 repetitions".into(),
        ));
    }
    cfg.validate()?;
    let runs: Vec<SsResult> = (0..reps)
        .into_par_iter()
        .map(|rep| {
            let rep_cfg = SsConfig {
                seed: derive_seed(cfg.seed, REP_SALT.wrapping_add(rep as u64)),
                ..*cfg
            };
            let mut ls = make_ls(rep);
            run_ss(&mut |z| ls(z), map, &rep_cfg)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(summarize(runs))
}

pub(crate) fn summarize(runs: Vec<SsResult>) -> RepeatSummary {
    let reps = runs.len();
    let nf = reps as f64;
    let mean_p_hat = runs.iter().map(|r| r.p_hat).sum::<f64>() / nf;
    let var = runs
        .iter()
        .map(|r| (r.p_hat - mean_p_hat).powi(2))
        .sum::<f64>()
        / (nf - 1.0);
    let cov = if mean_p_hat > 0.0 {
        var.sqrt() / mean_p_hat
    } else {
        0.0
    };
    let mean_n_g = runs.iter().map(|r| r.n_g as f64).sum::<f64>() / nf;
    let mean_wall_s = runs.iter().map(|r| r.wall_time_s).sum::<f64>() / nf;
    RepeatSummary {
        reps,
        mean_p_hat,
        cov,
        mean_n_g,
        eff: cov * mean_n_g.sqrt(),
        mean_wall_s,
        runs,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::normal;

    #[test]
    fn quantile_examples() {
        let values: Vec<f64> = (1..=100).map(|v| v as f64).collect();
        assert_eq!(quantile_threshold(&values, 0.1), 10.0);
        assert_eq!(quantile_threshold(&vec![0.0; 50], 0.1), 0.0);
        // binary population with 3% zeros: the 10%-quantile is the maximum,
        // which cannot contract the domain, so the final level triggers
        let mut binary = vec![0.0; 30];
        binary.extend(vec![1.0; 970]);
        assert_eq!(quantile_threshold(&binary, 0.1), 0.0);
    }

    #[test]
    fn config_validation() {
        assert!(SsConfig::new(1).validate().is_ok());
        let mut bad = SsConfig::new(1);
        bad.p0 = 0.13; // 1000 * 0.13 = 130 integral, fine
        assert!(bad.validate().is_ok());
        bad.n = 777; // 777*0.13 = 101.01
        assert!(bad.validate().is_err());
        bad = SsConfig::new(1);
        bad.p0 = 1.5;
        assert!(bad.validate().is_err());
        bad = SsConfig::new(1);
        bad.n = 5;
        bad.p0 = 0.1; // n*p0 < 1
        assert!(bad.validate().is_err());
    }

    #[test]
    fn certain_failure_is_single_level() {
        let map = GaussianMap::standard(1);
        let cfg = SsConfig::new(5);
        let res = run_ss(&mut |_z| 0.0, &map, &cfg).unwrap();
        assert_eq!(res.p_hat, 1.0);
        assert_eq!(res.levels.len(), 1);
        assert_eq!(res.n_g, cfg.n as u64);
        assert!(!res.zero_failure_final);
    }

    /// Half-space target: fails when z0 >= c, so g = max(c - z0, 0) is a
    /// valid informative limit state with p = Phi(-c).
    fn half_space(c: f64) -> impl FnMut(&[f64]) -> f64 {
        move |z: &[f64]| (c - z[0]).max(0.0)
    }

    #[test]
    fn level_arithmetic_and_n_g_pattern() {
        let map = GaussianMap::standard(2);
        let cfg = SsConfig::new(42);
        // p = Phi(-2) = 0.0228: expect exactly one intermediate level
        let res = run_ss(&mut half_space(2.0), &map, &cfg).unwrap();
        assert_eq!(res.levels.len(), 2);
        assert_eq!(res.n_g, 1900);
        let product: f64 = res.levels.iter().map(|l| l.conditional).product();
        assert_eq!(res.p_hat, product);
        assert!((res.p_hat - normal::cdf(-2.0)).abs() / normal::cdf(-2.0) < 0.5);
        // thresholds strictly decreasing, final exactly zero
        for pair in res.levels.windows(2) {
            assert!(pair[1].threshold < pair[0].threshold);
        }
        assert_eq!(res.levels.last().unwrap().threshold, 0.0);
        // p0^(m-1) * final fraction arithmetic
        let final_frac = res.levels.last().unwrap().conditional;
        assert!((res.p_hat - 0.1 * final_frac).abs() < 1e-15);
    }

    #[test]
    fn degenerates_to_crude_mcs_when_failure_is_common() {
        let map = GaussianMap::standard(1);
        let cfg = SsConfig::new(9);
        // p = Phi(-1) = 0.159 > p0: the quantile hits zero immediately
        let res = run_ss(&mut half_space(1.0), &map, &cfg).unwrap();
        assert_eq!(res.levels.len(), 1);
        assert_eq!(res.n_g, 1000);
        // identical to the plain Monte Carlo fraction over the same draws
        let mut rng = RngStream::new(cfg.seed, 0).rng();
        let states = sample_unconditional(&map, cfg.n, &mut rng);
        let fraction = states.iter().filter(|s| s.z[0] >= 1.0).count() as f64 / cfg.n as f64;
        assert_eq!(res.p_hat, fraction);
    }

    #[test]
    fn max_levels_overflow_carries_partial() {
        let map = GaussianMap::standard(1);
        let mut cfg = SsConfig::new(3);
        cfg.max_levels = 2;
        // p = Phi(-5) = 2.9e-7 needs ~6 levels; two populations (the
        // unconditional one plus one conditional) fit within the cap
        let err = run_ss(&mut half_space(5.0), &map, &cfg).unwrap_err();
        match err {
            Error::NoConvergence {
                max_levels,
                partial,
            } => {
                assert_eq!(max_levels, 2);
                assert_eq!(partial.levels.len(), 1);
                assert_eq!(partial.n_g, 1900);
                assert!((partial.p_hat - 0.1).abs() < 1e-15);
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn binary_target_yields_zero_failure_flag() {
        let map = GaussianMap::standard(1);
        let cfg = SsConfig::new(4);
        // rare binary event: quantile degenerates at level 0 and no failures
        // are observed
        let res = run_ss(
            &mut |z: &[f64]| if z[0] <= -6.0 { 0.0 } else { 1.0 },
            &map,
            &cfg,
        )
        .unwrap();
        assert!(res.zero_failure_final);
        assert_eq!(res.p_hat, 0.0);
        assert_eq!(res.levels.len(), 1);
    }

    #[test]
    fn nestedness_of_final_population() {
        let map = GaussianMap::standard(2);
        let cfg = SsConfig::new(17);
        let (res, pop, _) = run_ss_internal(&mut half_space(3.0), &map, &cfg).unwrap();
        assert!(res.levels.len() >= 2);
        let last_intermediate = res.levels[res.levels.len() - 2].threshold;
        for st in &pop {
            assert!(st.g <= last_intermediate);
            assert!((3.0 - st.z[0]).max(0.0) == st.g);
        }
    }

    #[test]
    fn runs_are_seed_deterministic() {
        let map = GaussianMap::standard(2);
        let cfg = SsConfig::new(77);
        let a = run_ss(&mut half_space(2.5), &map, &cfg).unwrap();
        let b = run_ss(&mut half_space(2.5), &map, &cfg).unwrap();
        assert_eq!(a.p_hat, b.p_hat);
        assert_eq!(a.levels, b.levels);
        assert_eq!(a.n_g, b.n_g);
    }

    #[test]
    fn repeat_summary_thread_count_invariance() {
        let map = GaussianMap::standard(1);
        let cfg = SsConfig::new(21);
        let run = || repeat_ss(|_rep| half_space(2.0), &map, &cfg, 16).unwrap();
        let base = run();
        let pool1 = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        let pool4 = rayon::ThreadPoolBuilder::new()
            .num_threads(4)
            .build()
            .unwrap();
        let r1 = pool1.install(run);
        let r4 = pool4.install(run);
        assert_eq!(base.mean_p_hat, r1.mean_p_hat);
        assert_eq!(base.mean_p_hat, r4.mean_p_hat);
        assert_eq!(base.mean_n_g, r4.mean_n_g);
        for (x, y) in base.runs.iter().zip(&r4.runs) {
            assert_eq!(x.p_hat, y.p_hat);
        }
    }

    #[test]
    fn repeat_degenerate_estimator_has_zero_cov() {
        let map = GaussianMap::standard(1);
        let cfg = SsConfig::new(2);
        let summary = repeat_ss(|_rep| |_z: &[f64]| 0.0, &map, &cfg, 5).unwrap();
        assert_eq!(summary.cov, 0.0);
        assert_eq!(summary.mean_p_hat, 1.0);
        // eff arithmetic: cov * sqrt(N_G)
        assert_eq!(summary.eff, 0.0);
        let manual = RepeatSummary {
            reps: 2,
            mean_p_hat: 1.0,
            cov: 0.2,
            mean_n_g: 2500.0,
            eff: 0.2 * 2500.0f64.sqrt(),
            mean_wall_s: 0.0,
            runs: vec![],
        };
        assert!((manual.eff - 10.0).abs() < 1e-12);
        assert!(repeat_ss(|_rep| |_z: &[f64]| 0.0, &map, &cfg, 1).is_err());
    }
}
