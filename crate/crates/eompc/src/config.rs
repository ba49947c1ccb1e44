//! Suite configuration: TOML schema, vehicle file, dotted-path overrides and
//! validation.

use std::collections::BTreeSet;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use eompc_core::baselines::{LosConfig, PidGains, Setpoints};
use eompc_core::cruise::optimal_cruise_speed;
use eompc_core::empc::{EmpcConfig, TdSearch};
use eompc_core::nlp::SolverOptions;
use eompc_core::vehicle::ParamError;
use eompc_core::{HorizontalState, PowerModel, VehicleParams};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Environment variable naming the default configuration directory.
pub const CONFIG_DIR_ENV: &str = "AUV_EO_CONFIG_DIR";
/// File looked up in the configuration directory when no path is given.
pub const DEFAULT_CONFIG: &str = "paper_suite.toml";

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {}: {source}", path.display())]
    Read { path: PathBuf, source: std::io::Error },
    #[error("{}: {message}", path.display())]
    Parse { path: PathBuf, message: String },
    #[error("{key}: {message}")]
    Invalid { key: String, message: String },
    #[error("--set {raw}: {message}")]
    Override { raw: String, message: String },
}

impl ConfigError {
    fn invalid(key: impl Into<String>, message: impl Into<String>) -> Self {
        ConfigError::Invalid { key: key.into(), message: message.into() }
    }
}

/// A surge speed given as a number (m/s) or as `"optimal-cruise"`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Speed {
    OptimalCruise,
    Fixed(f64),
}

impl Speed {
    pub fn resolve(&self, cruise: f64) -> f64 {
        match *self {
            Speed::OptimalCruise => cruise,
            Speed::Fixed(u) => u,
        }
    }
}

impl Serialize for Speed {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match *self {
            Speed::OptimalCruise => s.serialize_str("optimal-cruise"),
            Speed::Fixed(u) => s.serialize_f64(u),
        }
    }
}

impl<'de> Deserialize<'de> for Speed {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Number(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Number(u) => Ok(Speed::Fixed(u)),
            Raw::Text(t) if t == "optimal-cruise" => Ok(Speed::OptimalCruise),
            Raw::Text(t) => Err(serde::de::Error::custom(format!("expected a number or \"optimal-cruise\", got \"{t}\""))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    DcFeedforward,
    DcFeedback,
    EoEmpc,
    LosMpc,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::DcFeedforward, Method::DcFeedback, Method::EoEmpc, Method::LosMpc];

    pub fn as_str(&self) -> &'static str {
        match self {
            Method::DcFeedforward => "dc-feedforward",
            Method::DcFeedback => "dc-feedback",
            Method::EoEmpc => "eo-empc",
            Method::LosMpc => "los-mpc",
        }
    }

    /// Name used in the Markdown summary.
    pub fn label(&self) -> &'static str {
        match self {
            Method::DcFeedforward => "DC (feedforward)",
            Method::DcFeedback => "DC (feedback)",
            Method::EoEmpc => "EO-EMPC",
            Method::LosMpc => "LOS-MPC",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Method::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| format!("unknown method `{s}` (expected one of dc-feedforward, dc-feedback, eo-empc, los-mpc)"))
    }
}

/// Thruster power law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PowerSection {
    Propeller { kappa: f64 },
    Polynomial { c1: f64, c2: f64, c3: f64 },
}

/// Mirror of [`VehicleParams`] as written in the vehicle file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VehicleSection {
    pub mass: f64,
    pub weight: f64,
    pub buoyancy: f64,
    pub x_du: f64,
    pub y_dv: f64,
    pub z_dw: f64,
    pub k_dp: f64,
    pub m_dq: f64,
    pub n_dr: f64,
    pub x_uu: f64,
    pub y_vv: f64,
    pub z_ww: f64,
    pub k_pp: f64,
    pub m_qq: f64,
    pub n_rr: f64,
    pub i_x: f64,
    pub i_y: f64,
    pub i_z: f64,
    pub z_g: f64,
    pub l1: f64,
    pub l2: f64,
    pub l3: f64,
    pub t_max: f64,
    pub power: PowerSection,
}

impl VehicleSection {
    pub fn params(&self) -> VehicleParams {
        VehicleParams {
            mass: self.mass,
            weight: self.weight,
            buoyancy: self.buoyancy,
            x_du: self.x_du,
            y_dv: self.y_dv,
            z_dw: self.z_dw,
            k_dp: self.k_dp,
            m_dq: self.m_dq,
            n_dr: self.n_dr,
            x_uu: self.x_uu,
            y_vv: self.y_vv,
            z_ww: self.z_ww,
            k_pp: self.k_pp,
            m_qq: self.m_qq,
            n_rr: self.n_rr,
            i_x: self.i_x,
            i_y: self.i_y,
            i_z: self.i_z,
            z_g: self.z_g,
            l1: self.l1,
            l2: self.l2,
            l3: self.l3,
            t_max: self.t_max,
            power: match self.power {
                PowerSection::Propeller { kappa } => PowerModel::Propeller { kappa },
                PowerSection::Polynomial { c1, c2, c3 } => PowerModel::Polynomial { c1, c2, c3 },
            },
        }
    }
}

impl From<&VehicleParams> for VehicleSection {
    fn from(p: &VehicleParams) -> Self {
        VehicleSection {
            mass: p.mass,
            weight: p.weight,
            buoyancy: p.buoyancy,
            x_du: p.x_du,
            y_dv: p.y_dv,
            z_dw: p.z_dw,
            k_dp: p.k_dp,
            m_dq: p.m_dq,
            n_dr: p.n_dr,
            x_uu: p.x_uu,
            y_vv: p.y_vv,
            z_ww: p.z_ww,
            k_pp: p.k_pp,
            m_qq: p.m_qq,
            n_rr: p.n_rr,
            i_x: p.i_x,
            i_y: p.i_y,
            i_z: p.i_z,
            z_g: p.z_g,
            l1: p.l1,
            l2: p.l2,
            l3: p.l3,
            t_max: p.t_max,
            power: match p.power {
                PowerModel::Propeller { kappa } => PowerSection::Propeller { kappa },
                PowerModel::Polynomial { c1, c2, c3 } => PowerSection::Polynomial { c1, c2, c3 },
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationSection {
    /// Integration step (s).
    pub dt: f64,
    /// Default time limit, in straight-line cruise transit times.
    pub timeout_factor: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmpcSection {
    pub horizon: usize,
    pub dt: f64,
    pub thrust_limit: f64,
    pub max_iter: usize,
    pub grad_tol: f64,
    pub warm_start: bool,
    pub td_min: f64,
    pub td_max: f64,
    pub td_grid: usize,
    pub td_tol: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LosSection {
    pub lookahead: f64,
    pub u_ref: Speed,
    pub w_surge: f64,
    pub w_heading: f64,
    pub w_thrust: f64,
    pub horizon: usize,
    pub dt: f64,
    pub max_iter: usize,
    pub grad_tol: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DcSection {
    /// Mesh intervals of the horizontal problem.
    pub intervals: usize,
    /// Terminal disc radius of the plans flown in closed loop (m).
    pub plan_radius: f64,
    /// Re-solve period of DC-feedback (s).
    pub resolve_period: f64,
    pub tol: f64,
    pub constr_viol_tol: f64,
    pub max_iter: usize,
    /// Mesh intervals of the full 6-DOF solve in `dc-solve --full`.
    pub full_model_intervals: usize,
}

impl DcSection {
    pub fn solver_options(&self) -> SolverOptions {
        SolverOptions { tol: self.tol, constr_viol_tol: self.constr_viol_tol, max_iter: self.max_iter, ..Default::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PidSection {
    pub depth_gains: [f64; 3],
    pub pitch_gains: [f64; 3],
    pub integral_limit: f64,
    pub output_limit: f64,
    pub depth_setpoint: f64,
    pub pitch_setpoint: f64,
}

impl PidSection {
    pub fn gains(&self) -> PidGains {
        PidGains {
            depth: self.depth_gains,
            pitch: self.pitch_gains,
            integral_limit: self.integral_limit,
            output_limit: self.output_limit,
        }
    }

    pub fn setpoints(&self) -> Setpoints {
        Setpoints { depth: self.depth_setpoint, pitch: self.pitch_setpoint }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControllerSection {
    pub eo_empc: EmpcSection,
    pub los_mpc: LosSection,
    pub dc: DcSection,
    pub pid: PidSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    pub id: String,
    /// `[x, y, psi]` (m, m, rad).
    pub start: [f64; 3],
    pub initial_surge: Speed,
    pub goal: [f64; 2],
    pub arrival_radius: f64,
    /// Defaults to `timeout_factor` straight-line cruise transit times.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_time: Option<f64>,
    /// Defaults to `simulation.dt`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    /// Start pose DC-feedforward plans from; defaults to `start`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plan_start: Option<[f64; 3]>,
    pub methods: Vec<Method>,
}

/// A complete, validated suite description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteConfig {
    /// Vehicle file, relative to the suite file. Inline `[vehicle]` keys
    /// take precedence over it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vehicle_file: Option<String>,
    pub vehicle: VehicleSection,
    pub simulation: SimulationSection,
    pub controllers: ControllerSection,
    pub scenarios: Vec<ScenarioSpec>,
}

/// One `--set key=value` override.
#[derive(Debug, Clone, PartialEq)]
pub struct Override {
    pub key: String,
    pub value: toml::Value,
    /// The text as given on the command line.
    pub raw: String,
}

impl FromStr for Override {
    type Err = ConfigError;

    fn from_str(raw: &str) -> Result<Self, Self::Err> {
        let err = |message: &str| ConfigError::Override { raw: raw.to_string(), message: message.to_string() };
        let (key, text) = raw.split_once('=').ok_or_else(|| err("expected key=value"))?;
        let key = key.trim();
        if key.is_empty() {
            return Err(err("empty key"));
        }
        let text = text.trim();
        let value = toml::from_str::<toml::Table>(&format!("v = {text}"))
            .ok()
            .and_then(|mut t| t.remove("v"))
            .unwrap_or_else(|| toml::Value::String(text.to_string()));
        Ok(Override { key: key.to_string(), value, raw: raw.to_string() })
    }
}

impl fmt::Display for Override {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.raw)
    }
}

/// Splits `a.b[2].c` into `["a", "b", "2", "c"]`.
fn path_segments(key: &str) -> Vec<String> {
    key.replace('[', ".").replace(']', "").split('.').filter(|s| !s.is_empty()).map(str::to_string).collect()
}

/// Sets the value at a dotted path. Numeric segments index arrays; other
/// segments on an array of tables select the table whose `id` matches.
/// Missing table keys are created.
pub fn apply_override(doc: &mut toml::Value, o: &Override) -> Result<(), ConfigError> {
    let segs = path_segments(&o.key);
    let err = |message: String| ConfigError::Override { raw: o.raw.clone(), message };
    let (last, parents) = segs.split_last().ok_or_else(|| err("empty key".into()))?;
    let mut node = doc;
    let mut walked = String::new();
    for seg in parents {
        node = child(node, seg, true).ok_or_else(|| err(format!("`{walked}` has no entry `{seg}`")))?;
        if !walked.is_empty() {
            walked.push('.');
        }
        walked.push_str(seg);
    }
    match node {
        toml::Value::Table(t) => {
            t.insert(last.clone(), o.value.clone());
        }
        toml::Value::Array(a) => {
            let i: usize = last.parse().map_err(|_| err(format!("`{walked}` is an array; `{last}` is not an index")))?;
            let slot = a.get_mut(i).ok_or_else(|| err(format!("`{walked}` has no element {i}")))?;
            *slot = o.value.clone();
        }
        _ => return Err(err(format!("`{walked}` is not a table or array"))),
    }
    Ok(())
}

fn child<'a>(node: &'a mut toml::Value, seg: &str, create: bool) -> Option<&'a mut toml::Value> {
    match node {
        toml::Value::Table(t) => {
            if create && !t.contains_key(seg) {
                t.insert(seg.to_string(), toml::Value::Table(toml::Table::new()));
            }
            t.get_mut(seg)
        }
        toml::Value::Array(a) => match seg.parse::<usize>() {
            Ok(i) => a.get_mut(i),
            Err(_) => a.iter_mut().find(|v| v.get("id").and_then(|id| id.as_str()) == Some(seg)),
        },
        _ => None,
    }
}

/// Overlays `top` onto `base`, recursing into tables.
fn merge(base: &mut toml::Table, top: toml::Table) {
    for (k, v) in top {
        match (base.get_mut(&k), v) {
            (Some(toml::Value::Table(b)), toml::Value::Table(t)) => merge(b, t),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}

fn read_table(path: &Path) -> Result<toml::Table, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read { path: path.to_path_buf(), source })?;
    text.parse::<toml::Table>().map_err(|e| ConfigError::Parse { path: path.to_path_buf(), message: e.to_string() })
}

/// Directory holding the configuration files shipped with the crate.
pub fn shipped_config_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("config")
}

/// Resolves the suite file to load. An explicit relative path that does not
/// exist is also looked up in `dir`, the configuration directory. Without
/// either, `config/` in the working directory is tried, then the shipped one.
pub fn resolve_config_path(explicit: Option<&Path>, dir: Option<&Path>) -> PathBuf {
    match explicit {
        Some(p) if p.is_absolute() || p.exists() => p.to_path_buf(),
        Some(p) => match dir {
            Some(d) if d.join(p).exists() => d.join(p),
            _ => p.to_path_buf(),
        },
        None => match dir {
            Some(d) => d.join(DEFAULT_CONFIG),
            None => {
                let local = Path::new("config").join(DEFAULT_CONFIG);
                if local.exists() {
                    local
                } else {
                    shipped_config_dir().join(DEFAULT_CONFIG)
                }
            }
        },
    }
}

/// A loaded suite with its provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadedConfig {
    pub config: SuiteConfig,
    pub source: PathBuf,
    pub overrides: Vec<Override>,
}

/// Reads the suite at `path`, merges its vehicle file, applies `overrides`
/// and validates the result.
pub fn load(path: &Path, overrides: &[Override]) -> Result<LoadedConfig, ConfigError> {
    let mut doc = toml::Value::Table(read_table(path)?);
    for o in overrides {
        apply_override(&mut doc, o)?;
    }
    let toml::Value::Table(mut table) = doc else { unreachable!("root stays a table") };
    if let Some(file) = table.get("vehicle_file") {
        let name = file.as_str().ok_or_else(|| ConfigError::invalid("vehicle_file", "must be a string"))?;
        let vehicle_path = path.parent().unwrap_or(Path::new(".")).join(name);
        let mut vehicle = read_table(&vehicle_path)?;
        match table.remove("vehicle") {
            Some(toml::Value::Table(inline)) => merge(&mut vehicle, inline),
            Some(_) => return Err(ConfigError::invalid("vehicle", "must be a table")),
            None => {}
        }
        table.insert("vehicle".into(), toml::Value::Table(vehicle));
    }
    let config = from_table(table).map_err(|message| ConfigError::Parse { path: path.to_path_buf(), message })?;
    config.validate()?;
    Ok(LoadedConfig { config, source: path.to_path_buf(), overrides: overrides.to_vec() })
}

/// Typed deserialization; errors carry the path of the offending key.
fn from_table(table: toml::Table) -> Result<SuiteConfig, String> {
    serde_path_to_error::deserialize(toml::Value::Table(table)).map_err(|e| {
        let at = e.path().to_string();
        let msg = e.inner().message().trim().to_string();
        if at == "." || at.is_empty() {
            msg
        } else {
            format!("{at}: {msg}")
        }
    })
}

impl SuiteConfig {
    /// Parses a self-contained suite (inline `[vehicle]`, no vehicle file).
    pub fn from_toml_str(text: &str) -> Result<SuiteConfig, ConfigError> {
        let table =
            text.parse::<toml::Table>().map_err(|e| ConfigError::Parse { path: "<string>".into(), message: e.to_string() })?;
        let config = from_table(table).map_err(|message| ConfigError::Parse { path: "<string>".into(), message })?;
        config.validate()?;
        Ok(config)
    }

    /// Self-contained TOML of the resolved configuration.
    pub fn to_toml_string(&self) -> String {
        let resolved = SuiteConfig { vehicle_file: None, ..self.clone() };
        toml::to_string(&resolved).expect("suite config serializes")
    }

    pub fn params(&self) -> VehicleParams {
        self.vehicle.params()
    }

    pub fn cruise_speed(&self) -> f64 {
        optimal_cruise_speed(&self.params())
    }

    pub fn scenario(&self, id: &str) -> Option<&ScenarioSpec> {
        self.scenarios.iter().find(|s| s.id == id)
    }

    pub fn empc_config(&self, sc: &ScenarioSpec) -> EmpcConfig {
        let e = &self.controllers.eo_empc;
        EmpcConfig {
            horizon: e.horizon,
            dt: e.dt,
            sim_dt: self.sim_dt(sc),
            thrust_limit: e.thrust_limit,
            td_search: TdSearch { min: e.td_min, max: e.td_max, grid: e.td_grid, tol: e.td_tol },
            max_iter: e.max_iter,
            grad_tol: e.grad_tol,
            warm_start: e.warm_start,
            goal: (sc.goal[0], sc.goal[1]),
            arrival_radius: sc.arrival_radius,
        }
    }

    pub fn los_config(&self) -> LosConfig {
        let l = &self.controllers.los_mpc;
        LosConfig {
            lookahead: l.lookahead,
            u_ref: l.u_ref.resolve(self.cruise_speed()),
            w_surge: l.w_surge,
            w_heading: l.w_heading,
            w_thrust: l.w_thrust,
            horizon: l.horizon,
            dt: l.dt,
            max_iter: l.max_iter,
            grad_tol: l.grad_tol,
        }
    }

    pub fn sim_dt(&self, sc: &ScenarioSpec) -> f64 {
        sc.dt.unwrap_or(self.simulation.dt)
    }

    /// Initial horizontal state; velocities other than surge are zero.
    pub fn initial_state(&self, sc: &ScenarioSpec) -> HorizontalState {
        pose_state(sc.start, sc.initial_surge.resolve(self.cruise_speed()))
    }

    /// State DC-feedforward plans from.
    pub fn plan_state(&self, sc: &ScenarioSpec) -> HorizontalState {
        pose_state(sc.plan_start.unwrap_or(sc.start), sc.initial_surge.resolve(self.cruise_speed()))
    }

    pub fn max_time(&self, sc: &ScenarioSpec) -> f64 {
        sc.max_time.unwrap_or_else(|| {
            let d = (sc.goal[0] - sc.start[0]).hypot(sc.goal[1] - sc.start[1]);
            self.simulation.timeout_factor * d / self.cruise_speed()
        })
    }

    /// Checks every value; the error names the offending key.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let params = self.params();
        params.validate().map_err(|e| match e {
            ParamError::OutOfRange { name, requirement, value } => {
                let key = if matches!(name, "kappa" | "c1" | "c2" | "c3" | "c1 + c2 + c3") {
                    format!("vehicle.power.{name}")
                } else {
                    format!("vehicle.{name}")
                };
                ConfigError::invalid(key, format!("must be {requirement}, got {value}"))
            }
            other @ ParamError::NegativeBuoyancy { .. } => ConfigError::invalid("vehicle.buoyancy", other.to_string()),
        })?;

        let s = &self.simulation;
        positive("simulation.dt", s.dt)?;
        positive("simulation.timeout_factor", s.timeout_factor)?;

        let e = &self.controllers.eo_empc;
        if e.horizon == 0 {
            return Err(ConfigError::invalid("controllers.eo_empc.horizon", "must be >= 1"));
        }
        positive("controllers.eo_empc.dt", e.dt)?;
        positive("controllers.eo_empc.thrust_limit", e.thrust_limit)?;
        positive("controllers.eo_empc.grad_tol", e.grad_tol)?;
        positive("controllers.eo_empc.td_min", e.td_min)?;
        positive("controllers.eo_empc.td_tol", e.td_tol)?;
        if !(e.td_max >= e.td_min) || !e.td_max.is_finite() {
            return Err(ConfigError::invalid(
                "controllers.eo_empc.td_max",
                format!("must be finite and >= td_min, got {}", e.td_max),
            ));
        }
        if e.td_grid < 2 {
            return Err(ConfigError::invalid("controllers.eo_empc.td_grid", "must be >= 2"));
        }

        let los = self.los_config();
        if !(los.u_ref > 0.0) || !los.u_ref.is_finite() {
            return Err(ConfigError::invalid("controllers.los_mpc.u_ref", format!("must be finite and > 0, got {}", los.u_ref)));
        }
        los.validate().map_err(|e| ConfigError::invalid("controllers.los_mpc", e.to_string()))?;

        let dc = &self.controllers.dc;
        if dc.intervals < 2 {
            return Err(ConfigError::invalid("controllers.dc.intervals", "must be >= 2"));
        }
        if dc.full_model_intervals < 2 {
            return Err(ConfigError::invalid("controllers.dc.full_model_intervals", "must be >= 2"));
        }
        positive("controllers.dc.plan_radius", dc.plan_radius)?;
        positive("controllers.dc.resolve_period", dc.resolve_period)?;
        positive("controllers.dc.tol", dc.tol)?;
        positive("controllers.dc.constr_viol_tol", dc.constr_viol_tol)?;
        if dc.max_iter == 0 {
            return Err(ConfigError::invalid("controllers.dc.max_iter", "must be >= 1"));
        }

        let pid = &self.controllers.pid;
        pid.gains().validate(params.t_max).map_err(|e| ConfigError::invalid("controllers.pid", e.to_string()))?;
        finite("controllers.pid.depth_setpoint", pid.depth_setpoint)?;
        finite("controllers.pid.pitch_setpoint", pid.pitch_setpoint)?;

        let mut ids = BTreeSet::new();
        for (i, sc) in self.scenarios.iter().enumerate() {
            let key = |field: &str| format!("scenarios[{i}].{field} (scenario `{}`)", sc.id);
            if sc.id.trim().is_empty() {
                return Err(ConfigError::invalid(format!("scenarios[{i}].id"), "must not be empty"));
            }
            if !ids.insert(sc.id.as_str()) {
                return Err(ConfigError::invalid(key("id"), "duplicate scenario id"));
            }
            for (j, v) in sc.start.iter().enumerate() {
                finite(&format!("{}[{j}]", key("start")), *v)?;
            }
            for (j, v) in sc.goal.iter().enumerate() {
                finite(&format!("{}[{j}]", key("goal")), *v)?;
            }
            if let Some(p) = sc.plan_start {
                for (j, v) in p.iter().enumerate() {
                    finite(&format!("{}[{j}]", key("plan_start")), *v)?;
                }
            }
            if let Speed::Fixed(u) = sc.initial_surge {
                if !(u >= 0.0) || !u.is_finite() {
                    return Err(ConfigError::invalid(key("initial_surge"), format!("must be finite and >= 0, got {u}")));
                }
            }
            positive(&key("arrival_radius"), sc.arrival_radius)?;
            if sc.start[0] == sc.goal[0] && sc.start[1] == sc.goal[1] {
                return Err(ConfigError::invalid(key("goal"), "must differ from the start position"));
            }
            if let Some(t) = sc.max_time {
                positive(&key("max_time"), t)?;
            }
            if let Some(dt) = sc.dt {
                positive(&key("dt"), dt)?;
            }
            let dt = self.sim_dt(sc);
            if dt > e.dt || dt > los.dt {
                return Err(ConfigError::invalid(key("dt"), format!("simulation step {dt} exceeds a controller sample time")));
            }
            if sc.methods.is_empty() {
                return Err(ConfigError::invalid(key("methods"), "must list at least one method"));
            }
            let unique: BTreeSet<_> = sc.methods.iter().collect();
            if unique.len() != sc.methods.len() {
                return Err(ConfigError::invalid(key("methods"), "lists a method twice"));
            }
        }
        Ok(())
    }
}

fn pose_state(pose: [f64; 3], u: f64) -> HorizontalState {
    HorizontalState { u, x: pose[0], y: pose[1], psi: pose[2], ..Default::default() }
}

fn positive(key: &str, v: f64) -> Result<(), ConfigError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(ConfigError::invalid(key, format!("must be finite and > 0, got {v}")))
    }
}

fn finite(key: &str, v: f64) -> Result<(), ConfigError> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(ConfigError::invalid(key, format!("must be finite, got {v}")))
    }
}
