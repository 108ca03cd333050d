//! Sampling in an underlying standard-normal space.
//!
//! Margin vectors are generated as z = μ + D_σ·L·u where u is standard
//! normal and L is the Cholesky factor of the margin correlation matrix.
//! Conditional sampling uses a Hamiltonian Monte Carlo kernel specialized to
//! the Gaussian target: the Hamiltonian flow is the exact rotation
//! u' = u·cos(t_f) + p·sin(t_f), which conserves energy, so proposals are
//! rejected only when they leave the conditioning domain.

use rand::distributions::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::gmpe::MarginDistribution;
use crate::mat::SquareMatrix;
use crate::{Error, Result};

/// Maximum allowed |L·Lᵀ − R| after PSD repair.
pub const CHOLESKY_RECONSTRUCTION_TOL: f64 = 1e-10;

/// Affine map from standard-normal space to margin space.
#[derive(Debug, Clone)]
pub struct GaussianMap {
    mu: Vec<f64>,
    sigma: Vec<f64>,
    chol: SquareMatrix,
    dim: usize,
}

impl GaussianMap {
    /// Builds the map from a (PSD-repaired) margin distribution.
    pub fn from_distribution(dist: &MarginDistribution) -> Result<Self> {
        let chol = dist
            .corr
            .try_cholesky()
            .ok_or(Error::IllConditionedCorrelation { cap: 1e-8 })?;
        let err = dist.corr.reconstruction_error(&chol);
        if err > CHOLESKY_RECONSTRUCTION_TOL {
            return Err(Error::IllConditionedCorrelation { cap: 1e-8 });
        }
        Ok(Self {
            mu: dist.mu.clone(),
            sigma: dist.sigma.clone(),
            chol,
            dim: dist.dim(),
        })
    }

    /// Identity map (μ = 0, σ = 1, L = I); synthetic targets and tests.
    pub fn standard(dim: usize) -> Self {
        Self {
            mu: vec![0.0; dim],
            sigma: vec![1.0; dim],
            chol: SquareMatrix::identity(dim),
            dim,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    /// z = μ + D_σ·L·u into a caller buffer.
    pub fn map_into(&self, u: &[f64], z: &mut [f64]) {
        debug_assert_eq!(u.len(), self.dim);
        debug_assert_eq!(z.len(), self.dim);
        for i in 0..self.dim {
            let mut acc = 0.0;
            for j in 0..=i {
                acc += self.chol.get(i, j) * u[j];
            }
            z[i] = self.mu[i] + self.sigma[i] * acc;
        }
    }

    pub fn map(&self, u: &[f64]) -> Vec<f64> {
        let mut z = vec![0.0; self.dim];
        self.map_into(u, &mut z);
        z
    }
}

/// One point of a Markov chain: standard-normal coordinates, mapped margins
/// and the cached limit-state value of this z (NaN until evaluated).
#[derive(Debug, Clone)]
pub struct ChainState {
    pub u: Vec<f64>,
    pub z: Vec<f64>,
    pub g: f64,
    pub chain: u32,
}

/// A reproducible ChaCha stream: identical (seed, stream) pairs always
/// produce the identical draw sequence, independent of scheduling.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RngStream {
    pub seed: u64,
    pub stream: u64,
}

impl RngStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        Self { seed, stream }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng
    }
}

/// Splitmix-style seed derivation for independent sub-runs (repetitions,
/// intervals, batches).
pub fn derive_seed(master: u64, salt: u64) -> u64 {
    let mut x = master ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

fn draw_standard(rng: &mut ChaCha8Rng, out: &mut [f64]) {
    for v in out.iter_mut() {
        *v = StandardNormal.sample(rng);
    }
}

/// n independent unconditional draws. Limit-state values are left NaN for
/// the caller to fill.
pub fn sample_unconditional(map: &GaussianMap, n: usize, rng: &mut ChaCha8Rng) -> Vec<ChainState> {
    let dim = map.dim();
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let mut u = vec![0.0; dim];
        draw_standard(rng, &mut u);
        let z = map.map(&u);
        out.push(ChainState {
            u,
            z,
            g: f64::NAN,
            chain: 0,
        });
    }
    out
}

/// One exact-flow HMC step conditioned on a domain.
///
/// `domain` receives the proposed margin vector; it returns `Some(g)` with
/// the freshly evaluated limit-state value when the proposal lies inside the
/// conditioning domain, `None` otherwise. On rejection the chain stays put
/// and the cached value is reused.
pub fn hmc_conditional_step(
    map: &GaussianMap,
    state: &ChainState,
    t_f: f64,
    rng: &mut ChaCha8Rng,
    domain: &mut dyn FnMut(&[f64]) -> Option<f64>,
) -> ChainState {
    let dim = map.dim();
    let mut u_new = vec![0.0; dim];
    let mut z_new = vec![0.0; dim];
    let accepted = propose(map, &state.u, t_f, rng, &mut u_new, &mut z_new, domain);
    match accepted {
        Some(g) => ChainState {
            u: u_new,
            z: z_new,
            g,
            chain: state.chain,
        },
        None => state.clone(),
    }
}

/// Shared proposal kernel: fills `u_new`/`z_new` with the rotated state and
/// returns the domain verdict.
fn propose(
    map: &GaussianMap,
    u: &[f64],
    t_f: f64,
    rng: &mut ChaCha8Rng,
    u_new: &mut [f64],
    z_new: &mut [f64],
    domain: &mut dyn FnMut(&[f64]) -> Option<f64>,
) -> Option<f64> {
    let (sin, cos) = t_f.sin_cos();
    for (i, un) in u_new.iter_mut().enumerate() {
        let p: f64 = StandardNormal.sample(rng);
        *un = u[i] * cos + p * sin;
    }
    map.map_into(u_new, z_new);
    domain(z_new)
}

/// Seed selection at a threshold: every state strictly below it first, then
/// the lowest-indexed states tied at it, `target` in total.
pub(crate) fn select_seeds(
    states: &[ChainState],
    threshold: f64,
    target: usize,
) -> Vec<ChainState> {
    let mut seeds: Vec<ChainState> = states
        .iter()
        .filter(|s| s.g < threshold)
        .take(target)
        .cloned()
        .collect();
    if seeds.len() < target {
        for st in states.iter().filter(|s| s.g == threshold) {
            seeds.push(st.clone());
            if seeds.len() == target {
                break;
            }
        }
    }
    seeds
}

/// Populates a conditional level: distributes `n` states evenly across
/// chains started from the seeds (the seed itself counts), each chain
/// drawing from its own stream so results do not depend on scheduling order.
pub fn populate_level(
    map: &GaussianMap,
    seeds: Vec<ChainState>,
    n: usize,
    t_f: f64,
    seed: u64,
    stream_base: u64,
    domain: &mut dyn FnMut(&[f64]) -> Option<f64>,
) -> Result<Vec<ChainState>> {
    if seeds.is_empty() {
        return Err(Error::NoSeeds);
    }
    let s = seeds.len();
    debug_assert!(n >= s, "level population smaller than seed count");
    let base_len = n / s;
    let remainder = n % s;
    let dim = map.dim();
    let mut out = Vec::with_capacity(n);
    let mut u_buf = vec![0.0; dim];
    let mut z_buf = vec![0.0; dim];
    for (c, seed_state) in seeds.into_iter().enumerate() {
        let chain_len = base_len + usize::from(c < remainder);
        let mut rng = RngStream::new(seed, stream_base + c as u64).rng();
        let mut current = ChainState {
            chain: c as u32,
            ..seed_state
        };
        for step in 0..chain_len {
            if step > 0 {
                if let Some(g) = propose(
                    map, &current.u, t_f, &mut rng, &mut u_buf, &mut z_buf, domain,
                ) {
                    current = ChainState {
                        u: std::mem::replace(&mut u_buf, vec![0.0; dim]),
                        z: std::mem::replace(&mut z_buf, vec![0.0; dim]),
                        g,
                        chain: c as u32,
                    };
                }
            }
            out.push(current.clone());
        }
    }
    debug_assert_eq!(out.len(), n);
    Ok(out)
}
