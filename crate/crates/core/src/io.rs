//! Scenario files, bundled fixtures and run manifests.

use std::fs;
use std::path::Path;

use gridplan_milp::{LpBackend, SolverConfig};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::IoError;
use crate::grid::{
    CableType, DemandProfile, EconomicParams, FixtureMetadata, Generator, HeatPumpSpec, LineArc,
    Network, NodeId, NodeSeries, PlanningScenario, PotentialArc, Renewable, Storage, TowerNode,
};

pub const FIXTURES: [&str; 2] = ["ieee9-mod", "toy3"];

const IEEE9_JSON: &str = include_str!("../fixtures/ieee9-mod.json");
const TOY3_JSON: &str = include_str!("../fixtures/toy3.json");

pub fn parse_scenario(text: &str) -> Result<PlanningScenario, IoError> {
    Ok(serde_json::from_str(text)?)
}

pub fn load_scenario(path: &Path) -> Result<PlanningScenario, IoError> {
    let text = fs::read_to_string(path).map_err(|source| IoError::Read {
        path: path.display().to_string(),
        source,
    })?;
    parse_scenario(&text)
}

pub fn scenario_to_json(s: &PlanningScenario) -> String {
    let mut text = serde_json::to_string_pretty(s).expect("scenario serializes");
    text.push('\n');
    text
}

/// Bundled fixture by name.
pub fn fixture(name: &str) -> Result<PlanningScenario, IoError> {
    match name {
        "ieee9-mod" => parse_scenario(IEEE9_JSON),
        "toy3" => parse_scenario(TOY3_JSON),
        _ => Err(IoError::UnknownFixture(name.to_string())),
    }
}

/// Writes `contents` to a sibling temporary file and renames it over `path`.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<(), IoError> {
    let err = |source| IoError::Write {
        path: path.display().to_string(),
        source,
    };
    let file_name = path.file_name().map_or_else(
        || "out".to_string(),
        |n| n.to_string_lossy().into_owned(),
    );
    let tmp = path.with_file_name(format!(".{file_name}.tmp"));
    fs::write(&tmp, contents).map_err(err)?;
    fs::rename(&tmp, path).map_err(err)
}

/// SHA-256 of the canonical JSON form of a scenario.
pub fn scenario_hash(s: &PlanningScenario) -> String {
    let bytes = serde_json::to_vec(s).expect("scenario serializes");
    hex::encode(Sha256::digest(&bytes))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverSettings {
    pub gap_tol: f64,
    pub time_limit_s: Option<f64>,
    pub node_limit: Option<usize>,
    pub backend: String,
}

impl From<&SolverConfig> for SolverSettings {
    fn from(c: &SolverConfig) -> Self {
        Self {
            gap_tol: c.gap_tol,
            time_limit_s: c.time_limit.map(|d| d.as_secs_f64()),
            node_limit: c.node_limit,
            backend: match c.backend {
                LpBackend::Auto => "auto",
                LpBackend::Dense => "dense",
                LpBackend::Sparse => "sparse",
            }
            .to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub scenario: String,
    pub scenario_hash: String,
    pub solver: SolverSettings,
    pub wall_clock_s: f64,
    pub status: String,
}

impl RunManifest {
    pub fn new(
        scenario: &PlanningScenario,
        config: &SolverConfig,
        wall_clock_s: f64,
        status: impl Into<String>,
    ) -> Self {
        Self {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            scenario: scenario.name.clone(),
            scenario_hash: scenario_hash(scenario),
            solver: config.into(),
            wall_clock_s,
            status: status.into(),
        }
    }

    pub fn write(&self, dir: &Path) -> Result<(), IoError> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        write_atomic(&dir.join("manifest.json"), text.as_bytes())
    }
}

fn series(node: NodeId, base: f64, profile: &[f64], growth: f64, years: usize) -> NodeSeries {
    NodeSeries {
        node,
        values: (0..years)
            .map(|k| {
                let f = 1.0 + growth * k as f64;
                profile.iter().map(|p| round6(base * p * f)).collect()
            })
            .collect(),
    }
}

fn round6(v: f64) -> f64 {
    (v * 1e6).round() / 1e6
}

fn arc(from: NodeId, to: NodeId, capacity: f64) -> LineArc {
    LineArc::new(from, to, capacity)
}

/// Nine towers, ten existing arcs, two potential arcs. Generator at 1,
/// renewable and storage at 2, demand at 5, 8 and 9.
pub fn build_ieee9_mod() -> PlanningScenario {
    const YEARS: usize = 10;
    const STEPS: usize = 12;
    let electric_profile = [
        1.0, 0.95, 0.85, 0.75, 0.7, 0.65, 0.7, 0.75, 0.8, 0.85, 0.9, 0.95,
    ];
    let heat_profile = [
        1.0, 0.95, 0.85, 0.7, 0.5, 0.35, 0.3, 0.35, 0.5, 0.7, 0.85, 0.95,
    ];
    let solar = [
        0.2, 0.3, 0.45, 0.6, 0.75, 0.85, 0.9, 0.8, 0.6, 0.4, 0.25, 0.15,
    ];

    let mut nodes: Vec<TowerNode> = (1..=9).map(|i| TowerNode::new(i, 1.0)).collect();
    nodes[0].has_generator = true;
    nodes[1].has_renewable = true;
    nodes[1].has_storage = true;
    for (id, health, cost) in [(7, 0.9, 800.0), (8, 0.8, 800.0)] {
        let n = &mut nodes[id as usize - 1];
        n.health_index = health;
        n.replacement_cost = cost;
        n.replacement_life = 40;
    }

    let mut arcs = vec![
        arc(1, 4, 300.0),
        arc(2, 4, 60.0),
        arc(3, 6, 30.0),
        arc(4, 5, 100.0),
        arc(4, 9, 100.0),
        arc(5, 6, 40.0),
        arc(6, 7, 50.0),
        arc(6, 8, 30.0),
        arc(7, 8, 20.0),
        arc(8, 9, 40.0),
    ];
    for a in &mut arcs {
        match (a.from, a.to) {
            (6, 8) | (7, 8) => {
                a.replacement_candidate = true;
                a.maintenance_cost = 10.0;
            }
            (3, 6) => a.maintenance_cost = 15.0,
            _ => {}
        }
    }

    PlanningScenario {
        name: "ieee9-mod".to_string(),
        network: Network {
            nodes,
            arcs,
            potential_arcs: vec![
                PotentialArc {
                    from: 2,
                    to: 6,
                    allowed: true,
                    length: 1.0,
                },
                PotentialArc {
                    from: 2,
                    to: 7,
                    allowed: true,
                    length: 1.0,
                },
            ],
            generators: vec![Generator {
                node: 1,
                capacity: 300.0,
            }],
            renewables: vec![Renewable {
                node: 2,
                capacity: 40.0,
                availability: solar.to_vec(),
                enabled: true,
            }],
            storage: vec![Storage {
                node: 2,
                power: 10.0,
                energy: 40.0,
                efficiency: 0.9,
            }],
        },
        economics: EconomicParams {
            interest_rate: 0.05,
            learning_rate: 0.0,
            generation_cost: 0.05,
            horizon_years: YEARS,
            construction_time: 3,
            time_steps_per_year: STEPS,
        },
        catalog: vec![
            CableType {
                id: "C1".to_string(),
                capacity: 60.0,
                unit_cost: 20000.0,
                life: 40,
            },
            CableType {
                id: "C2".to_string(),
                capacity: 40.0,
                unit_cost: 12000.0,
                life: 40,
            },
        ],
        demand: DemandProfile {
            electric: vec![
                series(5, 30.0, &electric_profile, 0.03, YEARS),
                series(8, 25.0, &electric_profile, 0.09, YEARS),
                series(9, 25.0, &electric_profile, 0.03, YEARS),
            ],
            heat: vec![
                series(5, 5.0, &heat_profile, 0.03, YEARS),
                series(8, 30.0, &heat_profile, 0.09, YEARS),
                series(9, 5.0, &heat_profile, 0.03, YEARS),
            ],
            step_weight: vec![730.0; STEPS],
        },
        heat_pump: HeatPumpSpec {
            enabled: false,
            cop: 2.5,
            unit_cost: 1000.0,
            life: 20,
        },
        metadata: FixtureMetadata {
            description: "Nine-node desk-scale network with heat demand growing at node 8".into(),
            calibration: vec![
                "node-8 peak load exceeds the health-penalized import capacity (76 MW) from year 6"
                    .into(),
                "without heat pumps both a new line and a replacement are needed by year 10"
                    .into(),
                "heat pumps at COP 2.5 keep node-8 peak load below 76 MW over the horizon".into(),
                "line 3-6 carries no flow and costs maintenance, so dismantling it pays".into(),
            ],
        },
    }
}

/// Three towers in a path 1-2-3 with a potential arc 1-3. Node 3 demand
/// grows past the 20 MW of the candidate line 2-3 in year 6.
pub fn build_toy3() -> PlanningScenario {
    const YEARS: usize = 8;
    let mut nodes: Vec<TowerNode> = (1..=3).map(|i| TowerNode::new(i, 1.0)).collect();
    nodes[0].has_generator = true;
    let mut line = arc(2, 3, 20.0);
    line.replacement_candidate = true;
    line.maintenance_cost = 1.0;
    PlanningScenario {
        name: "toy3".to_string(),
        network: Network {
            nodes,
            arcs: vec![arc(1, 2, 100.0), line],
            potential_arcs: vec![PotentialArc {
                from: 1,
                to: 3,
                allowed: true,
                length: 2.0,
            }],
            generators: vec![Generator {
                node: 1,
                capacity: 200.0,
            }],
            renewables: vec![],
            storage: vec![],
        },
        economics: EconomicParams {
            interest_rate: 0.05,
            learning_rate: 0.0,
            generation_cost: 0.05,
            horizon_years: YEARS,
            construction_time: 1,
            time_steps_per_year: 2,
        },
        catalog: vec![CableType {
            id: "C1".to_string(),
            capacity: 40.0,
            unit_cost: 100.0,
            life: 40,
        }],
        demand: DemandProfile {
            electric: vec![series(3, 14.0, &[1.0, 0.5], 0.1, YEARS)],
            heat: vec![],
            step_weight: vec![4380.0, 4380.0],
        },
        heat_pump: HeatPumpSpec {
            enabled: false,
            cop: 3.0,
            unit_cost: 500.0,
            life: 20,
        },
        metadata: FixtureMetadata {
            description: "Three-node path for hand-checked construction lag".into(),
            calibration: vec!["node-3 peak demand 14 MW grows 10% of base per year".into()],
        },
    }
}
