//! Network file schema, study configuration and provenance hashing.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use seisfrag_core::fragility::{DamageState, DamageStateSet, MagnitudeGrid};
use seisfrag_core::gmpe::{Component, Point, SeismicModel};
use seisfrag_core::limitstate::{LimitStateSpec, LsKind};
use seisfrag_core::netgraph::{Network, TerminalSpec};
use seisfrag_core::subsetsim::SsConfig;

use crate::CliError;

/// JSON document describing a network and its earthquake scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkFile {
    pub epicenter: PointDef,
    pub nodes: Vec<NodeDef>,
    pub edges: Vec<(String, String)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub terminals: Option<TerminalsDef>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub od_pairs: Option<Vec<(String, String)>>,
    /// Inter-event residual std override (default 0.265).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma_eta: Option<f64>,
    /// Intra-event residual std override (default 0.502).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma_eps: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointDef {
    pub x_km: f64,
    pub y_km: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeDef {
    pub id: String,
    pub x_km: f64,
    pub y_km: f64,
    /// Capacity median in g; required for non-perfect nodes.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c_median: Option<f64>,
    /// Capacity log-standard deviation; required for non-perfect nodes.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zeta: Option<f64>,
    /// Defaults to true for terminal nodes, false otherwise.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub perfect: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TerminalsDef {
    pub origins: Vec<String>,
    pub destinations: Vec<String>,
}

/// A network file resolved into core types.
pub struct LoadedNetwork {
    pub network: Network,
    pub model: SeismicModel,
    pub terminals: Option<TerminalSpec>,
    pub od_pairs: Option<Vec<(String, String)>>,
}

impl NetworkFile {
    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::User(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| {
            CliError::User(format!("malformed network JSON in {}: {e}", path.display()))
        })
    }

    /// All schema/invariant violations, each as a named diagnostic.
    pub fn diagnostics(&self) -> Vec<String> {
        let mut errors = Vec::new();
        let mut seen = std::collections::HashSet::new();
        for node in &self.nodes {
            if !seen.insert(node.id.as_str()) {
                errors.push(format!("duplicated node id `{}`", node.id));
            }
        }
        let exists = |id: &str| self.nodes.iter().any(|n| n.id == id);
        let mut edge_seen = std::collections::HashSet::new();
        for (a, b) in &self.edges {
            for id in [a, b] {
                if !exists(id) {
                    errors.push(format!("edge [{a}, {b}] references unknown id `{id}`"));
                }
            }
            if a == b {
                errors.push(format!("self-loop at `{a}`"));
            }
            let key = (a.min(b).clone(), a.max(b).clone());
            if !edge_seen.insert(key) {
                errors.push(format!("duplicate edge [{a}, {b}]"));
            }
        }
        if let Some(t) = &self.terminals {
            if t.origins.is_empty() || t.destinations.is_empty() {
                errors.push("terminals must list at least one origin and one destination".into());
            }
            for id in t.origins.iter().chain(&t.destinations) {
                if !exists(id) {
                    errors.push(format!("terminal references unknown id `{id}`"));
                }
            }
        }
        if let Some(pairs) = &self.od_pairs {
            if pairs.is_empty() {
                errors.push("od_pairs must not be empty when present".into());
            }
            for (a, b) in pairs {
                for id in [a, b] {
                    if !exists(id) {
                        errors.push(format!("od pair [{a}, {b}] references unknown id `{id}`"));
                    }
                }
            }
        }
        let terminal_ids: std::collections::HashSet<&str> = self
            .terminals
            .iter()
            .flat_map(|t| t.origins.iter().chain(&t.destinations))
            .map(|s| s.as_str())
            .chain(
                self.od_pairs
                    .iter()
                    .flatten()
                    .flat_map(|(a, b)| [a.as_str(), b.as_str()]),
            )
            .collect();
        for node in &self.nodes {
            let perfect = node
                .perfect
                .unwrap_or(terminal_ids.contains(node.id.as_str()));
            if !perfect {
                match node.c_median {
                    Some(m) if m > 0.0 => {}
                    Some(m) => errors.push(format!(
                        "node `{}` has non-positive capacity median {m}",
                        node.id
                    )),
                    None => errors.push(format!(
                        "non-perfect node `{}` is missing c_median",
                        node.id
                    )),
                }
                match node.zeta {
                    Some(z) if z >= 0.0 => {}
                    Some(z) => errors.push(format!("node `{}` has negative zeta {z}", node.id)),
                    None => errors.push(format!("non-perfect node `{}` is missing zeta", node.id)),
                }
            }
        }
        check_sigma(&mut errors, self.sigma_eta, "sigma_eta");
        check_sigma(&mut errors, self.sigma_eps, "sigma_eps");
        errors
    }

    pub fn load(&self) -> Result<LoadedNetwork, CliError> {
        let diagnostics = self.diagnostics();
        if !diagnostics.is_empty() {
            return Err(CliError::User(format!(
                "invalid network: {}",
                diagnostics.join("; ")
            )));
        }
        let terminal_ids: std::collections::HashSet<&str> = self
            .terminals
            .iter()
            .flat_map(|t| t.origins.iter().chain(&t.destinations))
            .map(|s| s.as_str())
            .chain(
                self.od_pairs
                    .iter()
                    .flatten()
                    .flat_map(|(a, b)| [a.as_str(), b.as_str()]),
            )
            .collect();
        let nodes: Vec<Component> = self
            .nodes
            .iter()
            .map(|n| {
                let perfect = n.perfect.unwrap_or(terminal_ids.contains(n.id.as_str()));
                if perfect {
                    Component::perfect(n.id.clone(), Point::new(n.x_km, n.y_km))
                } else {
                    Component::new(
                        n.id.clone(),
                        Point::new(n.x_km, n.y_km),
                        n.c_median.unwrap_or(1.0),
                        n.zeta.unwrap_or(0.0),
                    )
                }
            })
            .collect();
        let network = Network::new(nodes, &self.edges)
            .map_err(|e| CliError::User(format!("invalid network: {e}")))?;
        let mut model = SeismicModel::new(Point::new(self.epicenter.x_km, self.epicenter.y_km));
        if let Some(s) = self.sigma_eta {
            model.sigma_eta = s;
        }
        if let Some(s) = self.sigma_eps {
            model.sigma_eps = s;
        }
        model
            .validate()
            .map_err(|e| CliError::User(format!("invalid scenario: {e}")))?;
        Ok(LoadedNetwork {
            network,
            model,
            terminals: self
                .terminals
                .as_ref()
                .map(|t| TerminalSpec::new(t.origins.clone(), t.destinations.clone())),
            od_pairs: self.od_pairs.clone(),
        })
    }
}

fn check_sigma(errors: &mut Vec<String>, v: Option<f64>, name: &str) {
    if let Some(s) = v {
        if !(s > 0.0) {
            errors.push(format!("{name} must be positive, got {s}"));
        }
    }
}

/// Study configuration file (TOML or JSON); every field optional, command
/// line flags take precedence.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudyFile {
    #[serde(default)]
    pub limit_state: LimitStateSection,
    #[serde(default)]
    pub ss: SsSection,
    #[serde(default)]
    pub study: StudySection,
    #[serde(default)]
    pub grid: GridSection,
    #[serde(default)]
    pub damage_states: DamageSection,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LimitStateSection {
    pub kind: Option<String>,
    pub aggregation: Option<String>,
    pub k: Option<usize>,
    pub origin: Option<String>,
    pub destination: Option<String>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SsSection {
    pub n: Option<usize>,
    pub p0: Option<f64>,
    pub t_f: Option<f64>,
    pub max_levels: Option<usize>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudySection {
    pub reps: Option<usize>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub mw_max: Option<f64>,
    pub mw_min: Option<f64>,
    pub step: Option<f64>,
    pub intervals: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DamageSection {
    pub preset: Option<String>,
    pub states: Option<Vec<DamageStateDef>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DamageStateDef {
    pub label: String,
    pub median: f64,
    pub zeta: f64,
}

impl StudyFile {
    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::User(format!("cannot read {}: {e}", path.display())))?;
        let parsed = if path.extension().is_some_and(|e| e == "json") {
            serde_json::from_str(&text).map_err(|e| e.to_string())
        } else {
            toml::from_str(&text).map_err(|e| e.to_string())
        };
        parsed
            .map_err(|e| CliError::User(format!("malformed study config {}: {e}", path.display())))
    }
}

/// Fully resolved study parameters; hashed for provenance.
#[derive(Debug, Clone, Serialize)]
pub struct ResolvedStudy {
    pub ls_kind: String,
    pub aggregation: String,
    pub k: Option<usize>,
    pub pairs: Vec<(String, String)>,
    pub n: usize,
    pub p0: f64,
    pub t_f: f64,
    pub max_levels: usize,
    pub seed: u64,
    pub reps: usize,
    pub sigma_eta: f64,
    pub sigma_eps: f64,
}

impl ResolvedStudy {
    /// Content digest embedded in every output record.
    pub fn config_hash(&self) -> String {
        let canonical = serde_json::to_string(self).expect("resolved study serializes");
        let digest = Sha256::digest(canonical.as_bytes());
        let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
        hex[..16].to_string()
    }
}

pub fn parse_ls_kind(s: &str) -> Result<LsKind, CliError> {
    match s {
        "rp" => Ok(LsKind::Rp),
        "sp" => Ok(LsKind::Sp),
        "binary" => Ok(LsKind::Binary),
        other => Err(CliError::User(format!(
            "unknown limit state `{other}` (expected rp, sp or binary)"
        ))),
    }
}

/// Resolves the aggregation from flags, config and the network file.
pub fn resolve_aggregation(
    kind: LsKind,
    loaded: &LoadedNetwork,
    od: &Option<Vec<String>>,
    k: Option<usize>,
) -> Result<(LimitStateSpec, String, Option<usize>, Vec<(String, String)>), CliError> {
    if let Some(od) = od {
        if od.len() != 2 {
            return Err(CliError::User("--od takes exactly two node ids".into()));
        }
        let spec = LimitStateSpec::single(kind, od[0].clone(), od[1].clone());
        return Ok((
            spec,
            "single-od".into(),
            None,
            vec![(od[0].clone(), od[1].clone())],
        ));
    }
    if let Some(pairs) = &loaded.od_pairs {
        let k = k.unwrap_or(pairs.len());
        let spec = LimitStateSpec::k_out_of_n(kind, pairs.clone(), k);
        return Ok((spec, "k-out-of-n".into(), Some(k), pairs.clone()));
    }
    if let Some(terminals) = &loaded.terminals {
        if k.is_some() {
            return Err(CliError::User(
                "--k applies to od_pairs (k-out-of-N); this network declares terminals".into(),
            ));
        }
        let pairs: Vec<(String, String)> = terminals
            .origins
            .iter()
            .flat_map(|o| {
                terminals
                    .destinations
                    .iter()
                    .map(move |d| (o.clone(), d.clone()))
            })
            .collect();
        let spec = LimitStateSpec::k_terminal(kind, terminals.clone());
        return Ok((spec, "k-terminal".into(), None, pairs));
    }
    Err(CliError::User(
        "network file declares neither terminals nor od_pairs; pass --od".into(),
    ))
}

pub fn build_ss_config(
    file: &StudyFile,
    n: Option<usize>,
    p0: Option<f64>,
    t_f: Option<f64>,
    max_levels: Option<usize>,
    seed: Option<u64>,
) -> Result<SsConfig, CliError> {
    let mut cfg = SsConfig::new(seed.or(file.study.seed).unwrap_or(42));
    if let Some(n) = n.or(file.ss.n) {
        cfg.n = n;
    }
    if let Some(p0) = p0.or(file.ss.p0) {
        cfg.p0 = p0;
    }
    if let Some(t_f) = t_f.or(file.ss.t_f) {
        cfg.t_f = t_f;
    }
    if let Some(m) = max_levels.or(file.ss.max_levels) {
        cfg.max_levels = m;
    }
    cfg.validate().map_err(|e| CliError::User(e.to_string()))?;
    Ok(cfg)
}

/// Parses "max:min:step" into a grid, with interval tops from config/flag.
pub fn build_grid(
    grid_arg: Option<&str>,
    intervals_arg: Option<&str>,
    file: &StudyFile,
) -> Result<MagnitudeGrid, CliError> {
    let (mw_max, mw_min, step) = if let Some(text) = grid_arg {
        let parts: Vec<&str> = text.split(':').collect();
        if parts.len() != 3 {
            return Err(CliError::User(format!(
                "--grid expects max:min:step, got `{text}`"
            )));
        }
        let parse = |s: &str| {
            s.parse::<f64>()
                .map_err(|_| CliError::User(format!("bad grid number `{s}`")))
        };
        (parse(parts[0])?, parse(parts[1])?, parse(parts[2])?)
    } else {
        (
            file.grid.mw_max.unwrap_or(9.0),
            file.grid.mw_min.unwrap_or(3.0),
            file.grid.step.unwrap_or(0.5),
        )
    };
    let tops = if let Some(text) = intervals_arg {
        let mut tops = Vec::new();
        for part in text.split(',') {
            tops.push(
                part.trim()
                    .parse::<f64>()
                    .map_err(|_| CliError::User(format!("bad interval top `{part}`")))?,
            );
        }
        tops
    } else if let Some(tops) = &file.grid.intervals {
        tops.clone()
    } else {
        vec![mw_max]
    };
    MagnitudeGrid::with_intervals(mw_max, mw_min, step, tops)
        .map_err(|e| CliError::User(e.to_string()))
}

/// Parses `--damage-states` (preset name or label:median:zeta list).
pub fn build_damage_states(
    arg: Option<&str>,
    file: &StudyFile,
) -> Result<Option<DamageStateSet>, CliError> {
    let from_defs = |defs: &[DamageStateDef]| {
        DamageStateSet::new(
            defs.iter()
                .map(|d| DamageState {
                    label: d.label.clone(),
                    capacity_median: d.median,
                    capacity_log_std: d.zeta,
                })
                .collect(),
        )
        .map_err(|e| CliError::User(e.to_string()))
    };
    if let Some(text) = arg {
        if text == "hazus-4" {
            return Ok(Some(DamageStateSet::hazus_four()));
        }
        let mut defs = Vec::new();
        for part in text.split(',') {
            let fields: Vec<&str> = part.split(':').collect();
            if fields.len() != 3 {
                return Err(CliError::User(format!(
                    "damage state `{part}` must be label:median:zeta (or use preset hazus-4)"
                )));
            }
            let median = fields[1]
                .parse()
                .map_err(|_| CliError::User(format!("bad median in `{part}`")))?;
            let zeta = fields[2]
                .parse()
                .map_err(|_| CliError::User(format!("bad zeta in `{part}`")))?;
            defs.push(DamageStateDef {
                label: fields[0].to_string(),
                median,
                zeta,
            });
        }
        return from_defs(&defs).map(Some);
    }
    if let Some(preset) = &file.damage_states.preset {
        if preset == "hazus-4" {
            return Ok(Some(DamageStateSet::hazus_four()));
        }
        return Err(CliError::User(format!("unknown damage preset `{preset}`")));
    }
    if let Some(states) = &file.damage_states.states {
        return from_defs(states).map(Some);
    }
    Ok(None)
}
