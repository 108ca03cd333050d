//! Specialized subset simulation that sweeps moment magnitude.
//!
//! Because the margin correlation matrix does not depend on magnitude, the
//! failure domain at a smaller magnitude equals the base-magnitude domain
//! shifted by a constant margin increment. Descending the magnitude grid
//! therefore produces nested failure domains, and one simulation yields the
//! entire fragility curve: a conventional run reaches the failure domain of
//! the largest magnitude, then each grid step conditions the population into
//! the next domain and multiplies the running estimate by the observed
//! conditional fraction. If a step's conditional fraction would fall below
//! p0, adaptive p0-quantile sub-levels on the shifted limit-state values are
//! inserted.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::gmpe::{MarginDistribution, SeismicModel};
use crate::limitstate::{LimitStateSpec, NetworkLimitState};
use crate::netgraph::Network;
use crate::sampler::{derive_seed, populate_level, GaussianMap};
use crate::subsetsim::{quantile_threshold, run_ss_internal, SsConfig};
use crate::{Error, Result};

const INTERVAL_SALT: u64 = 0x4449_5649;
const FRAG_REP_SALT: u64 = 0x4652_4147;

/// Descending magnitude grid with optional divide-and-conquer intervals.
///
/// Interval tops are grid points; interval i spans from its top down to just
/// above the next interval's top (the last interval reaches `mw_min`). Each
/// interval is estimated by an independent specialized run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MagnitudeGrid {
    pub mw_max: f64,
    pub mw_min: f64,
    pub step: f64,
    /// Descending interval top magnitudes; the first must equal `mw_max`.
    pub interval_tops: Vec<f64>,
}

impl MagnitudeGrid {
    /// Single-interval grid.
    pub fn new(mw_max: f64, mw_min: f64, step: f64) -> Result<Self> {
        Self::with_intervals(mw_max, mw_min, step, vec![mw_max])
    }

    pub fn with_intervals(
        mw_max: f64,
        mw_min: f64,
        step: f64,
        interval_tops: Vec<f64>,
    ) -> Result<Self> {
        let grid = Self {
            mw_max,
            mw_min,
            step,
            interval_tops,
        };
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.step > 0.0) || !self.step.is_finite() {
            return Err(Error::InvalidConfig("grid step must be positive".into()));
        }
        if self.mw_max < self.mw_min {
            return Err(Error::InvalidConfig(
                "grid must descend: mw_max >= mw_min".into(),
            ));
        }
        let span = (self.mw_max - self.mw_min) / self.step;
        if (span - span.round()).abs() > 1e-9 {
            return Err(Error::InvalidConfig(format!(
                "step {} does not divide the span {}..{}",
                self.step, self.mw_min, self.mw_max
            )));
        }
        if self.interval_tops.is_empty() {
            return Err(Error::InvalidConfig("at least one interval".into()));
        }
        if (self.interval_tops[0] - self.mw_max).abs() > 1e-9 {
            return Err(Error::InvalidConfig(
                "first interval must start at mw_max".into(),
            ));
        }
        let mut prev_idx = None;
        for top in &self.interval_tops {
            let pos = (self.mw_max - top) / self.step;
            if (pos - pos.round()).abs() > 1e-9 || pos.round() < 0.0 {
                return Err(Error::InvalidConfig(format!(
                    "interval top {top} is not a grid point"
                )));
            }
            let idx = pos.round() as usize;
            if idx > self.point_count() - 1 {
                return Err(Error::InvalidConfig(format!(
                    "interval top {top} lies below mw_min"
                )));
            }
            if let Some(p) = prev_idx {
                if idx <= p {
                    return Err(Error::InvalidConfig(
                        "interval tops must be strictly descending".into(),
                    ));
                }
            }
            prev_idx = Some(idx);
        }
        Ok(())
    }

    pub fn point_count(&self) -> usize {
        (((self.mw_max - self.mw_min) / self.step).round() as usize) + 1
    }

    /// Grid magnitudes, descending.
    pub fn points(&self) -> Vec<f64> {
        (0..self.point_count())
            .map(|k| self.mw_max - k as f64 * self.step)
            .collect()
    }

    /// Interval index ranges into `points()`: [start, end).
    pub fn intervals(&self) -> Vec<(usize, usize)> {
        let starts: Vec<usize> = self
            .interval_tops
            .iter()
            .map(|top| ((self.mw_max - top) / self.step).round() as usize)
            .collect();
        let mut out = Vec::with_capacity(starts.len());
        for (i, &s) in starts.iter().enumerate() {
            let end = starts.get(i + 1).copied().unwrap_or(self.point_count());
            out.push((s, end));
        }
        out
    }
}

/// One fragility-curve estimate from a single run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub mw: f64,
    pub p_hat: f64,
    /// Limit-state evaluations accumulated up to and including this point.
    pub n_g_cum: u64,
}

/// Level diagnostics of a specialized run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelDetail {
    pub mw: f64,
    pub threshold: f64,
    pub conditional: f64,
}

/// A single specialized (possibly divided) run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FragilityRun {
    pub points: Vec<CurvePoint>,
    pub n_g: u64,
    pub levels: Vec<LevelDetail>,
    pub wall_time_s: f64,
    pub seed: u64,
}

/// Evaluates a base limit state at z + (k−1)·Δz; k = 1 is the identity. The
/// shift is applied as a single fused multiply-add from the unshifted
/// sample, so composing steps equals one combined shift exactly.
pub fn shifted_limit_state<'f>(
    mut base: impl FnMut(&[f64]) -> f64 + 'f,
    k: usize,
    delta: Vec<f64>,
) -> impl FnMut(&[f64]) -> f64 + 'f {
    assert!(k >= 1, "relaxation index starts at 1");
    let factor = (k - 1) as f64;
    let mut buf = vec![0.0; delta.len()];
    move |z: &[f64]| {
        for ((b, zi), d) in buf.iter_mut().zip(z).zip(delta.iter()) {
            *b = zi + factor * d;
        }
        base(&buf)
    }
}

/// Limit-state evaluator with integer-indexed magnitude shifts.
struct ShiftedEvaluator<'n> {
    ls: NetworkLimitState<'n>,
    delta: Vec<f64>,
    buf: Vec<f64>,
}

impl<'n> ShiftedEvaluator<'n> {
    fn new(
        net: &'n Network,
        spec: &LimitStateSpec,
        dist: &MarginDistribution,
        delta: Vec<f64>,
    ) -> Result<Self> {
        Ok(Self {
            ls: NetworkLimitState::for_distribution(net, spec, dist)?,
            buf: vec![0.0; delta.len()],
            delta,
        })
    }

    fn value_at(&mut self, z: &[f64], k: usize) -> f64 {
        let Self { ls, delta, buf } = self;
        let factor = k as f64;
        for ((b, zi), d) in buf.iter_mut().zip(z).zip(delta.iter()) {
            *b = zi + factor * d;
        }
        ls.value(buf)
    }

    fn failed_at(&mut self, z: &[f64], k: usize) -> bool {
        let Self { ls, delta, buf } = self;
        let factor = k as f64;
        for ((b, zi), d) in buf.iter_mut().zip(z).zip(delta.iter()) {
            *b = zi + factor * d;
        }
        ls.failed(buf)
    }
}

/// One specialized subset-simulation pass over the whole grid: conventional
/// SS at the largest magnitude, then one conditional step per grid point.
pub fn run_specialized_ss(
    net: &Network,
    dist: &MarginDistribution,
    spec: &LimitStateSpec,
    grid: &MagnitudeGrid,
    cfg: &SsConfig,
) -> Result<FragilityRun> {
    cfg.validate()?;
    grid.validate()?;
    if (dist.mw_ref - grid.mw_max).abs() > 1e-9 {
        return Err(Error::InvalidConfig(format!(
            "margin distribution is anchored at Mw {} but the grid starts at {}",
            dist.mw_ref, grid.mw_max
        )));
    }
    let start = Instant::now();
    let map = GaussianMap::from_distribution(dist)?;
    let points = grid.points();
    let m = points.len();
    // per-step margin growth: one grid step down in magnitude
    let delta = dist.margin_shift(-grid.step);
    let mut eval = ShiftedEvaluator::new(net, spec, dist, delta.clone())?;

    let (res0, mut population, mut next_stream) =
        run_ss_internal(&mut |z| eval.value_at(z, 0), &map, cfg)?;
    let mut n_g = res0.n_g;
    let mut curve = vec![CurvePoint {
        mw: points[0],
        p_hat: res0.p_hat,
        n_g_cum: n_g,
    }];
    let mut levels: Vec<LevelDetail> = res0
        .levels
        .iter()
        .map(|l| LevelDetail {
            mw: points[0],
            threshold: l.threshold,
            conditional: l.conditional,
        })
        .collect();
    let mut p_hat = res0.p_hat;

    let seeds_target = cfg.seeds_per_level();
    let make_partial = |curve: &Vec<CurvePoint>,
                        levels: &Vec<LevelDetail>,
                        n_g: u64,
                        start: &Instant,
                        seed: u64| FragilityRun {
        points: curve.clone(),
        n_g,
        levels: levels.clone(),
        wall_time_s: start.elapsed().as_secs_f64(),
        seed,
    };

    for target in 1..m {
        // seed the conditioning domain of the previous grid point with the
        // failed states of the current population
        let mut seeds = Vec::with_capacity(seeds_target);
        for st in &population {
            if st.g == 0.0 {
                seeds.push(st.clone());
                if seeds.len() == seeds_target {
                    break;
                }
            }
        }
        if seeds.is_empty() {
            return Err(Error::EmptyConditional {
                mw: points[target],
                partial: Box::new(make_partial(&curve, &levels, n_g, &start, cfg.seed)),
            });
        }
        // seeds keep their margin vectors; only the cached value moves to the
        // new shift (not a fresh evaluation)
        for seed in &mut seeds {
            seed.g = eval.value_at(&seed.z, target);
        }
        let chains = seeds.len() as u64;
        {
            let mut domain = |z: &[f64]| {
                n_g += 1;
                if eval.failed_at(z, target - 1) {
                    Some(eval.value_at(z, target))
                } else {
                    None
                }
            };
            population = populate_level(
                &map,
                seeds,
                cfg.n,
                cfg.t_f,
                cfg.seed,
                next_stream,
                &mut domain,
            )?;
        }
        next_stream += chains;

        // conditional fraction for this step, with adaptive p0-quantile
        // sub-levels when it would fall below p0
        let mut conditional = 1.0;
        let mut sub_levels = 0usize;
        loop {
            let failures = population.iter().filter(|s| s.g == 0.0).count();
            let fraction = failures as f64 / cfg.n as f64;
            if fraction >= cfg.p0 {
                conditional *= fraction;
                levels.push(LevelDetail {
                    mw: points[target],
                    threshold: 0.0,
                    conditional: fraction,
                });
                break;
            }
            let values: Vec<f64> = population.iter().map(|s| s.g).collect();
            let threshold = quantile_threshold(&values, cfg.p0);
            if threshold == 0.0 {
                // the value population cannot be contracted further
                if failures == 0 {
                    return Err(Error::EmptyConditional {
                        mw: points[target],
                        partial: Box::new(make_partial(&curve, &levels, n_g, &start, cfg.seed)),
                    });
                }
                conditional *= fraction;
                levels.push(LevelDetail {
                    mw: points[target],
                    threshold: 0.0,
                    conditional: fraction,
                });
                break;
            }
            if sub_levels >= cfg.max_levels {
                return Err(Error::SpecializedNoConvergence {
                    mw: points[target],
                    max_levels: cfg.max_levels,
                    partial: Box::new(make_partial(&curve, &levels, n_g, &start, cfg.seed)),
                });
            }
            conditional *= cfg.p0;
            levels.push(LevelDetail {
                mw: points[target],
                threshold,
                conditional: cfg.p0,
            });
            let seeds = crate::sampler::select_seeds(&population, threshold, seeds_target);
            let chains = seeds.len() as u64;
            {
                let mut domain = |z: &[f64]| {
                    n_g += 1;
                    let v = eval.value_at(z, target);
                    if v > threshold {
                        None
                    } else if v == 0.0 {
                        // failure at this shift implies failure at the
                        // previous (smaller-margin) shift
                        Some(0.0)
                    } else if eval.failed_at(z, target - 1) {
                        Some(v)
                    } else {
                        None
                    }
                };
                population = populate_level(
                    &map,
                    seeds,
                    cfg.n,
                    cfg.t_f,
                    cfg.seed,
                    next_stream,
                    &mut domain,
                )?;
            }
            next_stream += chains;
            sub_levels += 1;
        }

        p_hat *= conditional;
        curve.push(CurvePoint {
            mw: points[target],
            p_hat,
            n_g_cum: n_g,
        });
    }

    Ok(FragilityRun {
        points: curve,
        n_g,
        levels,
        wall_time_s: start.elapsed().as_secs_f64(),
        seed: cfg.seed,
    })
}

/// Divide-and-conquer variant: each interval runs an independent specialized
/// pass (its own coarse adaptive approach via conventional SS at the
/// interval top, then uniform stepping), which trades some extra samples for
/// less conditioning bias at low magnitudes. A single interval delegates to
/// [`run_specialized_ss`] unchanged.
pub fn run_divided(
    net: &Network,
    dist: &MarginDistribution,
    spec: &LimitStateSpec,
    grid: &MagnitudeGrid,
    cfg: &SsConfig,
) -> Result<FragilityRun> {
    grid.validate()?;
    let intervals = grid.intervals();
    if intervals.len() == 1 {
        return run_specialized_ss(net, dist, spec, grid, cfg);
    }
    let start = Instant::now();
    let points = grid.points();
    let mut all_points: Vec<CurvePoint> = Vec::with_capacity(points.len());
    let mut levels = Vec::new();
    let mut n_g: u64 = 0;
    for (i, &(first, end)) in intervals.iter().enumerate() {
        let sub_grid = MagnitudeGrid::new(points[first], points[end - 1], grid.step)?;
        let sub_dist = dist.at_magnitude(points[first]);
        let sub_cfg = SsConfig {
            seed: derive_seed(cfg.seed, INTERVAL_SALT.wrapping_add(i as u64)),
            ..*cfg
        };
        let merge = |mut partial: Box<FragilityRun>,
                     all_points: &[CurvePoint],
                     levels: &[LevelDetail],
                     n_g: u64| {
            let mut points = all_points.to_vec();
            points.extend(partial.points.iter().map(|p| CurvePoint {
                n_g_cum: p.n_g_cum + n_g,
                ..*p
            }));
            partial.points = points;
            partial.n_g += n_g;
            partial.levels = levels
                .iter()
                .cloned()
                .chain(partial.levels.drain(..))
                .collect();
            partial
        };
        let run = match run_specialized_ss(net, &sub_dist, spec, &sub_grid, &sub_cfg) {
            Ok(run) => run,
            Err(Error::EmptyConditional { mw, partial }) => {
                return Err(Error::EmptyConditional {
                    mw,
                    partial: merge(partial, &all_points, &levels, n_g),
                });
            }
            Err(Error::SpecializedNoConvergence {
                mw,
                max_levels,
                partial,
            }) => {
                return Err(Error::SpecializedNoConvergence {
                    mw,
                    max_levels,
                    partial: merge(partial, &all_points, &levels, n_g),
                });
            }
            Err(other) => return Err(other),
        };
        all_points.extend(run.points.iter().map(|p| CurvePoint {
            n_g_cum: p.n_g_cum + n_g,
            ..*p
        }));
        levels.extend(run.levels);
        n_g += run.n_g;
    }
    Ok(FragilityRun {
        points: all_points,
        n_g,
        levels,
        wall_time_s: start.elapsed().as_secs_f64(),
        seed: cfg.seed,
    })
}

/// One damage state: capacity parameters substituted into every component.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DamageState {
    pub label: String,
    pub capacity_median: f64,
    pub capacity_log_std: f64,
}

/// Ordered damage states (medians strictly increasing).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DamageStateSet {
    pub states: Vec<DamageState>,
}

impl DamageStateSet {
    pub fn new(states: Vec<DamageState>) -> Result<Self> {
        let set = Self { states };
        set.validate()?;
        Ok(set)
    }

    pub fn validate(&self) -> Result<()> {
        if self.states.is_empty() {
            return Err(Error::InvalidConfig("no damage states".into()));
        }
        for s in &self.states {
            if !(s.capacity_median > 0.0) || s.capacity_log_std < 0.0 {
                return Err(Error::InvalidConfig(format!(
                    "damage state `{}` has invalid capacity parameters",
                    s.label
                )));
            }
        }
        for pair in self.states.windows(2) {
            if pair[1].capacity_median <= pair[0].capacity_median {
                return Err(Error::InvalidConfig(
                    "damage-state capacity medians must be strictly increasing".into(),
                ));
            }
        }
        Ok(())
    }

    /// The four HAZUS-style highway-bridge damage states (capacity medians
    /// 0.58 / 0.98 / 1.48 / 2.08 g, log-std 0.69).
    pub fn hazus_four() -> Self {
        let mk = |label: &str, median: f64| DamageState {
            label: label.into(),
            capacity_median: median,
            capacity_log_std: 0.69,
        };
        Self {
            states: vec![
                mk("slight", 0.58),
                mk("moderate", 0.98),
                mk("extensive", 1.48),
                mk("collapse", 2.08),
            ],
        }
    }
}

/// Aggregated fragility-curve record at one magnitude.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FragilityRecord {
    pub mw: f64,
    pub p_hat: f64,
    /// Sample c.o.v. across repetitions (absent for a single run).
    pub cov: Option<f64>,
    /// 2.5 / 97.5 percentile band across repetitions.
    pub p_lo: Option<f64>,
    pub p_hi: Option<f64>,
    /// Mean cumulative evaluation count up to this point.
    pub n_g_cum: f64,
}

/// Fragility curve for one damage state, aggregated over seeded repetitions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FragilityCurve {
    pub damage_state: String,
    pub records: Vec<FragilityRecord>,
    pub reps: usize,
    pub mean_total_n_g: f64,
}

/// Runs `reps` independent divided runs with per-repetition derived seeds,
/// fully parallel and thread-count invariant.
pub fn repeat_fragility_runs(
    net: &Network,
    dist: &MarginDistribution,
    spec: &LimitStateSpec,
    grid: &MagnitudeGrid,
    cfg: &SsConfig,
    reps: usize,
) -> Result<Vec<FragilityRun>> {
    if reps == 0 {
        return Err(Error::InvalidConfig("need at least one repetition".into()));
    }
    (0..reps)
        .into_par_iter()
        .map(|rep| {
            let rep_cfg = SsConfig {
                seed: derive_seed(cfg.seed, FRAG_REP_SALT.wrapping_add(rep as u64)),
                ..*cfg
            };
            run_divided(net, dist, spec, grid, &rep_cfg)
        })
        .collect()
}

/// [`repeat_fragility_runs`] plus aggregation of mean, c.o.v. and 95%
/// percentile bands per grid point.
pub fn repeat_fragility(
    net: &Network,
    dist: &MarginDistribution,
    spec: &LimitStateSpec,
    grid: &MagnitudeGrid,
    cfg: &SsConfig,
    reps: usize,
    damage_label: &str,
) -> Result<FragilityCurve> {
    let runs = repeat_fragility_runs(net, dist, spec, grid, cfg, reps)?;
    Ok(aggregate_runs(&runs, damage_label))
}

/// Aggregates repeated runs into a curve (runs must share one grid).
pub fn aggregate_runs(runs: &[FragilityRun], damage_label: &str) -> FragilityCurve {
    let reps = runs.len();
    let m = runs[0].points.len();
    let nf = reps as f64;
    let mut records = Vec::with_capacity(m);
    for i in 0..m {
        let mut ps: Vec<f64> = runs.iter().map(|r| r.points[i].p_hat).collect();
        let mean = ps.iter().sum::<f64>() / nf;
        let n_g_cum = runs.iter().map(|r| r.points[i].n_g_cum as f64).sum::<f64>() / nf;
        let (cov, p_lo, p_hi) = if reps > 1 {
            let var = ps.iter().map(|p| (p - mean).powi(2)).sum::<f64>() / (nf - 1.0);
            let cov = if mean > 0.0 { var.sqrt() / mean } else { 0.0 };
            ps.sort_by(|a, b| a.total_cmp(b));
            (
                Some(cov),
                Some(percentile(&ps, 0.025)),
                Some(percentile(&ps, 0.975)),
            )
        } else {
            (None, None, None)
        };
        records.push(FragilityRecord {
            mw: runs[0].points[i].mw,
            p_hat: mean,
            cov,
            p_lo,
            p_hi,
            n_g_cum,
        });
    }
    FragilityCurve {
        damage_state: damage_label.to_string(),
        records,
        reps,
        mean_total_n_g: runs.iter().map(|r| r.n_g as f64).sum::<f64>() / nf,
    }
}

fn percentile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// One divided run per damage state, substituting each state's capacity into
/// all components.
pub fn multi_state_curves(
    net: &Network,
    model: &SeismicModel,
    spec: &LimitStateSpec,
    damage_states: &DamageStateSet,
    grid: &MagnitudeGrid,
    cfg: &SsConfig,
    reps: usize,
) -> Result<Vec<FragilityCurve>> {
    damage_states.validate()?;
    let mut curves = Vec::with_capacity(damage_states.states.len());
    for state in &damage_states.states {
        let net_state = net.with_capacities(state.capacity_median, state.capacity_log_std);
        let dist = model.build_margin_distribution(&net_state, grid.mw_max)?;
        let curve = repeat_fragility(&net_state, &dist, spec, grid, cfg, reps, &state.label)?;
        curves.push(curve);
    }
    Ok(curves)
}
