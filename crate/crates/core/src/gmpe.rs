//! Ground-motion model: maps an earthquake scenario and site geometry to the
//! joint Gaussian distribution of logarithmic safety margins.
//!
//! Demand at a site is lognormal around an attenuation mean with shared
//! (inter-event) and site-specific (intra-event) residuals; capacity is
//! lognormal per component. The margin z_i = ln C_i − ln D_i is then Gaussian
//! with an analytic correlation structure, which is everything the samplers
//! downstream need.

use serde::{Deserialize, Serialize};

use crate::mat::SquareMatrix;
use crate::netgraph::Network;
use crate::normal;
use crate::{Error, Result};

/// Planar point in km.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x_km: f64,
    pub y_km: f64,
}

impl Point {
    pub fn new(x_km: f64, y_km: f64) -> Self {
        Self { x_km, y_km }
    }

    /// Euclidean distance in km.
    pub fn distance(&self, other: &Point) -> f64 {
        ((self.x_km - other.x_km).powi(2) + (self.y_km - other.y_km).powi(2)).sqrt()
    }
}

/// Attenuation-relation coefficients for the mean log-PGA:
/// ln D̄ = c0 + c1·sqrt(R² + h²) + ln(R² + h²)·(c2 + c3·(Mw − 4.5)).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GmpeCoefficients {
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    /// Depth-like smoothing term, km.
    pub h: f64,
}

impl Default for GmpeCoefficients {
    fn default() -> Self {
        Self {
            c0: -0.5265,
            c1: -0.0115,
            c2: -0.3303,
            c3: 0.0599,
            h: 1.35,
        }
    }
}

/// Intra-event spatial correlation kernel exp(−a·Δ^b).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelationKernel {
    pub a: f64,
    pub b: f64,
}

impl Default for CorrelationKernel {
    fn default() -> Self {
        Self { a: 0.27, b: 0.40 }
    }
}

/// Earthquake scenario: epicenter, residual dispersions and model
/// coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeismicModel {
    pub epicenter: Point,
    /// Inter-event residual std, ln-PGA units.
    pub sigma_eta: f64,
    /// Intra-event residual std, ln-PGA units.
    pub sigma_eps: f64,
    pub coefficients: GmpeCoefficients,
    pub correlation: CorrelationKernel,
}

impl SeismicModel {
    /// Model with the default coefficients and residual dispersions
    /// (σ_η = 0.265, σ_ε = 0.502).
    pub fn new(epicenter: Point) -> Self {
        Self {
            epicenter,
            sigma_eta: 0.265,
            sigma_eps: 0.502,
            coefficients: GmpeCoefficients::default(),
            correlation: CorrelationKernel::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma_eta > 0.0) || !(self.sigma_eps > 0.0) {
            return Err(Error::InvalidConfig(
                "residual standard deviations must be positive".into(),
            ));
        }
        if !(self.coefficients.h > 0.0) {
            return Err(Error::InvalidConfig("gmpe h must be positive".into()));
        }
        Ok(())
    }

    /// Mean log-PGA at epicentral distance `r_km` for moment magnitude `mw`.
    pub fn ln_mean_pga(&self, r_km: f64, mw: f64) -> f64 {
        let c = &self.coefficients;
        let q = r_km * r_km + c.h * c.h;
        c.c0 + c.c1 * q.sqrt() + q.ln() * (c.c2 + c.c3 * (mw - 4.5))
    }

    /// Sensitivity of the mean log-PGA to Mw at distance `r_km`; constant in
    /// Mw because the attenuation mean is linear in magnitude.
    pub fn mw_sensitivity(&self, r_km: f64) -> f64 {
        let c = &self.coefficients;
        c.c3 * (r_km * r_km + c.h * c.h).ln()
    }

    /// Intra-event residual correlation at inter-site distance `delta_km`.
    /// Equals 1 at zero distance and decays monotonically.
    pub fn intra_event_correlation(&self, delta_km: f64) -> f64 {
        (-self.correlation.a * delta_km.powf(self.correlation.b)).exp()
    }

    /// Total margin standard deviation sqrt(ζ² + σ_η² + σ_ε²); magnitude-
    /// independent.
    pub fn margin_std(&self, capacity_log_std: f64) -> f64 {
        (capacity_log_std * capacity_log_std
            + self.sigma_eta * self.sigma_eta
            + self.sigma_eps * self.sigma_eps)
            .sqrt()
    }

    /// Reliability index β = (ln C̄ − ln D̄)/σ_z of a lognormal-capacity
    /// component. The marginal failure probability is Φ(−β).
    pub fn reliability_index(&self, component: &Component, ln_mean_demand: f64) -> Result<f64> {
        debug_assert!(!component.perfect, "perfect nodes carry no margin");
        let var = component.capacity_log_std * component.capacity_log_std
            + self.sigma_eta * self.sigma_eta
            + self.sigma_eps * self.sigma_eps;
        if var <= 0.0 {
            return Err(Error::DegenerateVariance);
        }
        Ok((component.capacity_median.ln() - ln_mean_demand) / var.sqrt())
    }

    /// Margin correlation ρ_{z_i z_j} between two components:
    /// (ζ_i ζ_j δ_ij + σ_η² + σ_ε²·ρ_ε(Δ_ij)) / (σ_{z_i} σ_{z_j}),
    /// with the Kronecker delta keyed on component identity.
    pub fn margin_correlation(&self, ci: &Component, cj: &Component) -> f64 {
        let same = ci.id == cj.id;
        let delta = ci.position.distance(&cj.position);
        let kron = if same {
            ci.capacity_log_std * cj.capacity_log_std
        } else {
            0.0
        };
        let num = kron
            + self.sigma_eta * self.sigma_eta
            + self.sigma_eps * self.sigma_eps * self.intra_event_correlation(delta);
        num / (self.margin_std(ci.capacity_log_std) * self.margin_std(cj.capacity_log_std))
    }

    /// Second-order approximation of the reliability index for a capacity
    /// given by mean μ_C and coefficient of variation δ_C (capacity not
    /// necessarily lognormal):
    /// β ≅ (ln μ_C − 0.5 δ_C² − ln D̄)/sqrt(δ_C² + σ_η² + σ_ε²).
    pub fn approx_reliability_index(
        &self,
        capacity_mean: f64,
        capacity_cov: f64,
        ln_mean_demand: f64,
    ) -> Result<f64> {
        debug_assert!(capacity_mean > 0.0 && capacity_cov >= 0.0);
        let var = capacity_cov * capacity_cov
            + self.sigma_eta * self.sigma_eta
            + self.sigma_eps * self.sigma_eps;
        if var <= 0.0 {
            return Err(Error::DegenerateVariance);
        }
        Ok((capacity_mean.ln() - 0.5 * capacity_cov * capacity_cov - ln_mean_demand) / var.sqrt())
    }

    /// Approximate margin correlation for capacities given by coefficients of
    /// variation, mirroring [`Self::margin_correlation`] with δ_C in place of ζ.
    pub fn approx_margin_correlation(
        &self,
        cov_i: f64,
        cov_j: f64,
        delta_km: f64,
        same_component: bool,
    ) -> f64 {
        let kron = if same_component { cov_i * cov_j } else { 0.0 };
        let num = kron
            + self.sigma_eta * self.sigma_eta
            + self.sigma_eps * self.sigma_eps * self.intra_event_correlation(delta_km);
        let si =
            (cov_i * cov_i + self.sigma_eta * self.sigma_eta + self.sigma_eps * self.sigma_eps)
                .sqrt();
        let sj =
            (cov_j * cov_j + self.sigma_eta * self.sigma_eta + self.sigma_eps * self.sigma_eps)
                .sqrt();
        num / (si * sj)
    }

    /// Assembles the joint Gaussian margin distribution of all non-perfect
    /// components at reference magnitude `mw_ref`, including PSD repair of
    /// the correlation matrix.
    pub fn build_margin_distribution(
        &self,
        network: &Network,
        mw_ref: f64,
    ) -> Result<MarginDistribution> {
        self.validate()?;
        let comps: Vec<&Component> = network.random_components().collect();
        if comps.is_empty() {
            return Err(Error::InvalidNetwork(
                "network has no random (non-perfect) components".into(),
            ));
        }
        let dim = comps.len();
        let mut mu = Vec::with_capacity(dim);
        let mut sigma = Vec::with_capacity(dim);
        let mut mw_sensitivity = Vec::with_capacity(dim);
        let mut ids = Vec::with_capacity(dim);
        for c in &comps {
            let r = c.position.distance(&self.epicenter);
            mu.push(c.capacity_median.ln() - self.ln_mean_pga(r, mw_ref));
            sigma.push(self.margin_std(c.capacity_log_std));
            mw_sensitivity.push(self.mw_sensitivity(r));
            ids.push(c.id.clone());
        }
        let mut corr = SquareMatrix::identity(dim);
        for i in 0..dim {
            for j in (i + 1)..dim {
                let rho = self.margin_correlation(comps[i], comps[j]);
                corr.set(i, j, rho);
                corr.set(j, i, rho);
            }
        }
        let corr = repair_correlation(corr)?;
        Ok(MarginDistribution {
            component_ids: ids,
            mu,
            sigma,
            corr,
            mw_sensitivity,
            mw_ref,
        })
    }
}

/// PSD repair: escalating jitter ε·I with ε from 1e-12 to 1e-8 in decade
/// steps, renormalized so the diagonal stays exactly one. The analytic kernel
/// is not guaranteed numerically positive definite on arbitrary point sets.
const JITTER_START: f64 = 1e-12;
const JITTER_CAP: f64 = 1e-8;

fn repair_correlation(corr: SquareMatrix) -> Result<SquareMatrix> {
    if corr.try_cholesky().is_some() {
        return Ok(corr);
    }
    let mut eps = JITTER_START;
    while eps <= JITTER_CAP * (1.0 + 1e-12) {
        let candidate = corr.jittered_correlation(eps);
        if candidate.try_cholesky().is_some() {
            return Ok(candidate);
        }
        eps *= 10.0;
    }
    Err(Error::IllConditionedCorrelation { cap: JITTER_CAP })
}

/// A seismic component: a node-type (or converted link-type) physical entity
/// with lognormal capacity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Component {
    pub id: String,
    pub position: Point,
    /// Capacity median C̄, in g (PGA units).
    pub capacity_median: f64,
    /// Capacity log-standard deviation ζ.
    pub capacity_log_std: f64,
    /// Perfect nodes never fail and are excluded from the random margin
    /// vector (typically origin/destination cities).
    pub perfect: bool,
    /// Extra explanatory variables of the attenuation relation; carried but
    /// unused by the built-in model.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub explanatory: Vec<f64>,
}

impl Component {
    pub fn new(id: impl Into<String>, position: Point, median: f64, log_std: f64) -> Self {
        Self {
            id: id.into(),
            position,
            capacity_median: median,
            capacity_log_std: log_std,
            perfect: false,
            explanatory: Vec::new(),
        }
    }

    pub fn perfect(id: impl Into<String>, position: Point) -> Self {
        Self {
            id: id.into(),
            position,
            capacity_median: 1.0,
            capacity_log_std: 0.0,
            perfect: true,
            explanatory: Vec::new(),
        }
    }
}

/// Marginal failure probability Φ(−β).
pub fn failure_probability(beta: f64) -> f64 {
    normal::cdf(-beta)
}

/// Joint Gaussian distribution of the logarithmic safety margins of the
/// random components, at a reference magnitude. Only the mean depends on
/// magnitude; σ and the correlation matrix do not.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarginDistribution {
    /// Component ids in margin-vector order.
    pub component_ids: Vec<String>,
    /// Margin means at `mw_ref`.
    pub mu: Vec<f64>,
    /// Margin standard deviations (magnitude-invariant).
    pub sigma: Vec<f64>,
    /// Margin correlation matrix R_zz (magnitude-invariant, PSD-repaired).
    pub corr: SquareMatrix,
    /// ∂(ln D̄_i)/∂Mw per component.
    pub mw_sensitivity: Vec<f64>,
    /// Magnitude the mean vector refers to.
    pub mw_ref: f64,
}

impl MarginDistribution {
    pub fn dim(&self) -> usize {
        self.mu.len()
    }

    /// Mean-shift vector for a magnitude change of `d_mw`:
    /// Δz_i = −(∂ ln D̄_i/∂Mw)·ΔMw. Negative ΔMw grows every margin.
    pub fn margin_shift(&self, d_mw: f64) -> Vec<f64> {
        self.mw_sensitivity.iter().map(|s| -s * d_mw).collect()
    }

    /// The same distribution re-anchored at magnitude `mw`; only the mean
    /// moves.
    pub fn at_magnitude(&self, mw: f64) -> MarginDistribution {
        let shift = self.margin_shift(mw - self.mw_ref);
        let mut out = self.clone();
        for (m, s) in out.mu.iter_mut().zip(&shift) {
            *m += s;
        }
        out.mw_ref = mw;
        out
    }

    /// Reliability indices β_i = μ_i/σ_i after adding `mean_shift` (pass an
    /// empty slice for none).
    pub fn reliability_indices(&self, mean_shift: &[f64]) -> Vec<f64> {
        self.mu
            .iter()
            .enumerate()
            .map(|(i, m)| {
                let shift = mean_shift.get(i).copied().unwrap_or(0.0);
                (m + shift) / self.sigma[i]
            })
            .collect()
    }
}
