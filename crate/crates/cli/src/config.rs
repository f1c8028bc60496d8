//! Scenario configuration: the JSON document read from `--config` and its
//! resolution against per-scenario defaults.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use psido_core::quantize::{l_config, RegularizationSchedule};
use psido_core::{DeformationMatrix, GridSpec};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("unknown scenario `{0}` (see `psido list`)")]
    UnknownScenario(String),
    #[error("invalid config: {0}")]
    Invalid(String),
    #[error("cannot read config {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot parse config {path}: {source}")]
    Parse {
        path: PathBuf,
        source: serde_json::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Scenario {
    FourierUnitarity,
    CvBound,
    WindowedTransform,
    AdjointSymbol,
    OperbRoundtrip,
    DeformedProduct,
    ApproxIdentity,
    HeisenbergConjugation,
    Heissmooth,
    Commutant,
}

impl Scenario {
    pub const ALL: [Scenario; 10] = [
        Scenario::FourierUnitarity,
        Scenario::CvBound,
        Scenario::WindowedTransform,
        Scenario::AdjointSymbol,
        Scenario::OperbRoundtrip,
        Scenario::DeformedProduct,
        Scenario::ApproxIdentity,
        Scenario::HeisenbergConjugation,
        Scenario::Heissmooth,
        Scenario::Commutant,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::FourierUnitarity => "fourier-unitarity",
            Scenario::CvBound => "cv-bound",
            Scenario::WindowedTransform => "windowed-transform",
            Scenario::AdjointSymbol => "adjoint-symbol",
            Scenario::OperbRoundtrip => "operb-roundtrip",
            Scenario::DeformedProduct => "deformed-product",
            Scenario::ApproxIdentity => "approx-identity",
            Scenario::HeisenbergConjugation => "heisenberg-conjugation",
            Scenario::Heissmooth => "heissmooth",
            Scenario::Commutant => "commutant",
        }
    }

    pub fn summary(self) -> &'static str {
        match self {
            Scenario::FourierUnitarity => "transform preserves the module inner product",
            Scenario::CvBound => "operator norm bounded by l * pi(a)",
            Scenario::WindowedTransform => "windowed transform energy equals pi^n times the norm",
            Scenario::AdjointSymbol => "extrapolated adjoint symbol satisfies <O(a)phi, psi> = <phi, O(p)psi>",
            Scenario::OperbRoundtrip => "kernel reconstruction inverts the (1 + d)^2 transform",
            Scenario::DeformedProduct => "deformed product: undeformed limit, oracle, associativity, representations",
            Scenario::ApproxIdentity => "e_k x_J phi converges to phi",
            Scenario::HeisenbergConjugation => "modulated translations, conjugation and smoothness probes",
            Scenario::Heissmooth => "T_(z,zeta) = T_(z - J zeta, 0) for left representations",
            Scenario::Commutant => "commutant fingerprint and field extraction",
        }
    }

    fn defaults(self) -> Defaults {
        let base = |n, points, half_width, trial_count| Defaults {
            n,
            points,
            half_width,
            k: 2,
            theta: if n == 2 { 0.5 } else { 0.0 },
            trial_count,
            iterations: 0,
            tolerances: Vec::new(),
        };
        match self {
            Scenario::FourierUnitarity => Defaults {
                tolerances: vec![
                    ("inner_deviation", 1e-8),
                    ("norm_deviation", 1e-8),
                    ("roundtrip", 1e-10),
                    ("a_linearity", 1e-12),
                    ("gaussian_fixed_point", 1e-6),
                ],
                ..base(1, 256, 10.0, 50)
            },
            Scenario::CvBound => Defaults {
                iterations: 150,
                tolerances: vec![
                    ("l_config", f64::NAN),
                    ("scaling_invariance", 1e-12),
                    ("identity_ratio", 1e-10),
                ],
                ..base(1, 256, 10.0, 20)
            },
            Scenario::WindowedTransform => Defaults {
                tolerances: vec![("parseval_identity", 1e-4)],
                ..base(1, 256, 10.0, 5)
            },
            Scenario::AdjointSymbol => Defaults {
                tolerances: vec![
                    ("adjoint_identity", 1e-4),
                    ("extrapolation", 1e-4),
                    ("constant_symbol", 1e-4),
                    ("direct_quadrature", 1e-8),
                ],
                ..base(1, 256, 10.0, 10)
            },
            Scenario::OperbRoundtrip => Defaults {
                tolerances: vec![("roundtrip", 1e-3), ("constant", 1e-10)],
                ..base(1, 1024, 5.0, 1)
            },
            Scenario::DeformedProduct => Defaults {
                tolerances: vec![
                    ("pointwise", 1e-8),
                    ("oracle", 1e-4),
                    ("associativity", 1e-4),
                    ("commutation", 1e-4),
                    ("symbol_paths", 1e-5),
                    ("identity", 1e-8),
                ],
                ..base(2, 64, 6.0, 3)
            },
            Scenario::ApproxIdentity => Defaults {
                tolerances: vec![("bump_mass", 1e-10), ("final_error", 0.1)],
                ..base(2, 128, 52.0, 1)
            },
            Scenario::HeisenbergConjugation => Defaults {
                tolerances: vec![
                    ("isometry", 1e-10),
                    ("inverse", 1e-10),
                    ("t_independence", 1e-10),
                    ("covariance", 1e-5),
                    ("probe", 1e-3),
                    ("step_halving", 0.05),
                ],
                ..base(1, 256, 10.0, 3)
            },
            Scenario::Heissmooth => Defaults {
                tolerances: vec![("heissmooth", 1e-4), ("counterexample", 1e-2)],
                ..base(2, 64, 6.0, 1)
            },
            Scenario::Commutant => Defaults {
                tolerances: vec![
                    ("commutation", 1e-4),
                    ("symbol", 1e-6),
                    ("extraction", 1e-3),
                    ("counterexample", 1e-2),
                ],
                ..base(2, 64, 6.0, 1)
            },
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scenario {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, ConfigError> {
        Scenario::ALL
            .into_iter()
            .find(|sc| sc.name() == s)
            .ok_or_else(|| ConfigError::UnknownScenario(s.to_string()))
    }
}

struct Defaults {
    n: usize,
    points: usize,
    half_width: f64,
    k: usize,
    theta: f64,
    trial_count: usize,
    iterations: usize,
    tolerances: Vec<(&'static str, f64)>,
}

/// The JSON config document. Every field except `schema_version` is
/// optional and falls back to the scenario's defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub schema_version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scenario: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(rename = "N", default, skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,
    #[serde(rename = "L", default, skip_serializing_if = "Option::is_none")]
    pub half_width: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    #[serde(rename = "J", default, skip_serializing_if = "Option::is_none")]
    pub j: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trial_count: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub iterations: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub symbol: Option<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub tolerance_overrides: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon_schedule: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_path: Option<PathBuf>,
}

impl ScenarioConfig {
    pub fn new() -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            ..Self::default()
        }
    }

    pub fn load(path: &std::path::Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        serde_json::from_str(&text).map_err(|source| ConfigError::Parse {
            path: path.to_path_buf(),
            source,
        })
    }
}

/// A config with every field filled in; echoed into the report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResolvedConfig {
    pub schema_version: u32,
    pub scenario: Scenario,
    pub n: usize,
    #[serde(rename = "N")]
    pub points: usize,
    #[serde(rename = "L")]
    pub half_width: f64,
    pub k: usize,
    #[serde(rename = "J")]
    pub j: Vec<Vec<f64>>,
    pub seed: u64,
    pub trial_count: usize,
    #[serde(skip_serializing_if = "is_zero")]
    pub iterations: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub symbol: Option<String>,
    pub tolerances: BTreeMap<String, f64>,
    pub epsilon_schedule: Vec<f64>,
}

fn is_zero(v: &usize) -> bool {
    *v == 0
}

impl Serialize for Scenario {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

/// Scenarios with a choice of symbol, default first.
const SYMBOLS: &[(Scenario, &[&str])] = &[
    (Scenario::CvBound, &["random", "identity"]),
    (Scenario::AdjointSymbol, &["broad", "random"]),
];

impl ResolvedConfig {
    pub fn resolve(scenario: Scenario, config: &ScenarioConfig) -> Result<Self, ConfigError> {
        let invalid = |msg: String| Err(ConfigError::Invalid(msg));
        if config.schema_version != SCHEMA_VERSION {
            return invalid(format!(
                "schema_version {} is not supported (expected {SCHEMA_VERSION})",
                config.schema_version
            ));
        }
        if let Some(name) = &config.scenario {
            if name != scenario.name() {
                return invalid(format!("config is for scenario `{name}`, not `{scenario}`"));
            }
        }
        let d = scenario.defaults();
        let n = config.n.unwrap_or(d.n);
        let points = config.points.unwrap_or(d.points);
        let half_width = config.half_width.unwrap_or(d.half_width);
        GridSpec::new(n, half_width, points).map_err(|e| ConfigError::Invalid(e.to_string()))?;
        let k = config.k.unwrap_or(d.k);
        if !(1..=8).contains(&k) {
            return invalid(format!("k = {k} is outside 1..=8"));
        }

        let j = match (&config.theta, &config.j) {
            (Some(_), Some(_)) => return invalid("give either theta or J, not both".into()),
            (None, Some(rows)) => {
                if rows.len() != n || rows.iter().any(|r| r.len() != n) {
                    return invalid(format!("J must be {n} x {n}"));
                }
                rows.clone()
            }
            (theta, None) => {
                let theta = theta.unwrap_or(if n == 2 { d.theta } else { 0.0 });
                if n == 2 {
                    vec![vec![0.0, theta], vec![-theta, 0.0]]
                } else if theta == 0.0 {
                    vec![vec![0.0; n]; n]
                } else {
                    return invalid(format!("theta describes a 2 x 2 matrix but n = {n}; give J instead"));
                }
            }
        };
        DeformationMatrix::new(n, j.concat()).map_err(|e| ConfigError::Invalid(e.to_string()))?;

        let trial_count = config.trial_count.unwrap_or(d.trial_count);
        if trial_count == 0 {
            return invalid("trial_count must be positive".into());
        }
        let iterations = config.iterations.unwrap_or(d.iterations);
        if d.iterations > 0 && iterations == 0 {
            return invalid("iterations must be positive".into());
        }
        if d.iterations == 0 && config.iterations.is_some() {
            return invalid(format!("scenario `{scenario}` takes no iterations"));
        }

        let allowed = SYMBOLS.iter().find(|(s, _)| *s == scenario).map(|(_, v)| *v).unwrap_or(&[]);
        let symbol = match &config.symbol {
            None => allowed.first().map(|s| s.to_string()),
            Some(s) if allowed.contains(&s.as_str()) => Some(s.clone()),
            Some(s) => {
                return invalid(format!(
                    "symbol `{s}` is not available for `{scenario}` (choices: {})",
                    if allowed.is_empty() { "none".to_string() } else { allowed.join(", ") }
                ))
            }
        };

        let mut tolerances: BTreeMap<String, f64> = d
            .tolerances
            .iter()
            .map(|&(name, v)| (name.to_string(), if name == "l_config" { l_config(n) } else { v }))
            .collect();
        for (name, &value) in &config.tolerance_overrides {
            match tolerances.get_mut(name) {
                Some(slot) if value.is_finite() && value >= 0.0 => *slot = value,
                Some(_) => return invalid(format!("tolerance `{name}` must be a non-negative number")),
                None => {
                    let known: Vec<&str> = tolerances.keys().map(String::as_str).collect();
                    return invalid(format!(
                        "unknown tolerance `{name}` for `{scenario}` (known: {})",
                        known.join(", ")
                    ));
                }
            }
        }

        let epsilon_schedule = config
            .epsilon_schedule
            .clone()
            .unwrap_or_else(|| RegularizationSchedule::default().epsilons);
        RegularizationSchedule {
            epsilons: epsilon_schedule.clone(),
            tolerance: RegularizationSchedule::default().tolerance,
        }
        .validate()
        .map_err(|e| ConfigError::Invalid(e.to_string()))?;

        Ok(Self {
            schema_version: SCHEMA_VERSION,
            scenario,
            n,
            points,
            half_width,
            k,
            j,
            seed: config.seed.unwrap_or(0),
            trial_count,
            iterations,
            symbol,
            tolerances,
            epsilon_schedule,
        })
    }

    pub fn grid(&self) -> GridSpec {
        GridSpec::new(self.n, self.half_width, self.points).expect("validated at resolution")
    }

    pub fn deformation(&self) -> DeformationMatrix {
        DeformationMatrix::new(self.n, self.j.concat()).expect("validated at resolution")
    }

    pub fn tolerance(&self, name: &str) -> f64 {
        self.tolerances[name]
    }
}
