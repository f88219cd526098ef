//! Experiment presets, flat-text configuration, CSV artifact emission, and
//! timing-law fits across families of runs.
//!
//! A run is described by an [`ExperimentPreset`]: model parameters, grid,
//! initial datum, horizon, and checkpoint schedule. Presets serialize to a
//! flat `key = value` text format (dotted sections, `#` comments) chosen to
//! be trivially parseable and diff-friendly; [`parse_config`] and
//! [`serialize_config`] round-trip it.
//!
//! [`run_preset`] executes a preset and writes its artifacts into a
//! directory: `manifest.txt` (written before the run, finalized after),
//! `diagnostics.csv` (one row per checkpoint), `events.csv` (bracketed
//! collapse events), and one `snapshot_NNNN.csv` per checkpoint. Artifacts
//! are written incrementally, so a numerical failure mid-run leaves every
//! checkpoint reached so far on disk, with the failure recorded in the
//! manifest.
//!
//! [`timing_law`] runs a family of presets differing in one parameter
//! (layer distance or `eps`), extracts the first collapse time of each
//! member, and fits the appropriate slow-motion law:
//!
//! * `theta = 2`: `ln t` against `1/eps` (or against the layer distance `d`
//!   at fixed `eps`) — exponentially slow motion;
//! * `theta > 2`: `ln t` against `ln(1/eps)` — algebraically slow motion,
//!   with the exponent expected in `[1, beta]`, `beta = (theta+2)/(theta-2)`
//!   (see [`k_sequence`]).

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::fs::File;
use std::io::{BufWriter, Write as IoWrite};
use std::path::{Path, PathBuf};
use std::time::Instant;

use crate::energy::{c0, c_eps, energy};
use crate::error::CoreError;
use crate::evolution::{
    evolve, evolve_span, CheckpointSchedule, DiagnosticsRecord, EvolutionTrace, ExitReason,
    Scheme, State, StepStats, StepperConfig,
};
use crate::layers::{collapse_times, CollapseEvent, StepFunctionV};
use crate::model::{FluxKind, FluxSpec, ModelParams, PotentialSpec};
use crate::numerics::{line_fit, LineFit};
use crate::stationary::{compacton, transition_layer_datum, Grid, Profile};
use crate::Result;

/// Largest horizon the explicit scheme is allowed to target. Beyond this the
/// stability-bound step count is astronomical, so such runs must be implicit.
pub const EXPLICIT_HORIZON_LIMIT: f64 = 1e8;

// ---------------------------------------------------------------------------
// Preset types
// ---------------------------------------------------------------------------

/// How the initial datum of a run is built.
#[derive(Debug, Clone, PartialEq)]
pub enum DatumSpec {
    /// Standing-wave pieces glued at the midpoints between the given zeros
    /// (starts negative at the left wall).
    TransitionLayers {
        /// Prescribed sign changes, strictly increasing.
        zeros: Vec<f64>,
    },
    /// Exact stationary compacton (requires `1 < theta < 2`).
    Compacton {
        /// Prescribed sign changes, strictly increasing.
        zeros: Vec<f64>,
        /// Sign at the left wall (`+1` or `-1`).
        start_sign: i32,
    },
    /// Small-amplitude step pattern `amplitude * V(x)` with `V` the
    /// `+-1`-valued step function jumping at the given points.
    StepPerturbation {
        /// Jump locations, strictly increasing.
        jumps: Vec<f64>,
        /// Sign at the left wall (`+1` or `-1`).
        start_sign: i32,
        /// Plateau magnitude `u*`.
        amplitude: f64,
    },
    /// Profile loaded from a two-column CSV (`x,u`); its interval must match
    /// the preset's domain.
    CustomCsv {
        /// Path to the CSV file.
        path: PathBuf,
    },
}

/// A fully specified experiment: model, grid, datum, horizon, schedule.
#[derive(Debug, Clone)]
pub struct ExperimentPreset {
    /// Identifier used in artifact manifests and error messages.
    pub name: String,
    /// Flux nonlinearity (kind and scale).
    pub flux: FluxSpec,
    /// Double-well exponent.
    pub theta: f64,
    /// Layer-width parameter.
    pub eps: f64,
    /// Left wall.
    pub a: f64,
    /// Right wall.
    pub b: f64,
    /// Number of grid cells (`n + 1` nodes).
    pub n: usize,
    /// Initial datum description.
    pub datum: DatumSpec,
    /// Final time.
    pub horizon: f64,
    /// Checkpoint times for diagnostics and snapshots.
    pub schedule: CheckpointSchedule,
    /// Time integrator.
    pub scheme: Scheme,
    /// Accept `eps` up to `eps0` instead of the default safety margin.
    pub near_threshold: bool,
}

impl ExperimentPreset {
    /// Build the validated model for this preset.
    pub fn model(&self) -> Result<ModelParams> {
        let potential = PotentialSpec::new(self.theta)
            .map_err(|e| CoreError::Config(format!("model.theta: {e}")))?;
        let build = if self.near_threshold {
            ModelParams::new_near_threshold
        } else {
            ModelParams::new
        };
        build(self.eps, self.a, self.b, self.flux.clone(), potential)
            .map_err(|e| CoreError::Config(format!("model.epsilon: {e}")))
    }

    /// Construct the initial profile on the preset grid.
    pub fn build_datum(&self, m: &ModelParams) -> Result<Profile> {
        let wrap = |e: CoreError| CoreError::Config(format!("init: {e}"));
        match &self.datum {
            DatumSpec::TransitionLayers { zeros } => {
                transition_layer_datum(m, zeros, self.n).map_err(wrap)
            }
            DatumSpec::Compacton { zeros, start_sign } => {
                compacton(m, zeros, *start_sign, self.n).map_err(wrap)
            }
            DatumSpec::StepPerturbation { jumps, start_sign, amplitude } => {
                if !(amplitude.is_finite() && *amplitude > 0.0) {
                    return Err(CoreError::Config(format!(
                        "init.amplitude: must be positive and finite, got {amplitude}"
                    )));
                }
                let mut clearance = jumps
                    .windows(2)
                    .map(|w| w[1] - w[0])
                    .fold(f64::INFINITY, f64::min);
                if let (Some(&first), Some(&last)) = (jumps.first(), jumps.last()) {
                    clearance = clearance.min(first - self.a).min(self.b - last);
                }
                if !(clearance > 0.0) {
                    return Err(CoreError::Config(
                        "init.jumps: jumps must be strictly increasing and interior to the domain"
                            .into(),
                    ));
                }
                let v = StepFunctionV::new(
                    self.a,
                    self.b,
                    jumps.clone(),
                    *start_sign,
                    0.25 * clearance,
                )
                .map_err(wrap)?;
                let grid = Grid::for_model(m, self.n)?;
                let meta = format!(
                    "step-perturbation amplitude={amplitude} jumps={jumps:?} start={start_sign}"
                );
                Profile::sample(grid, meta, |x| amplitude * v.value(x))
            }
            DatumSpec::CustomCsv { path } => {
                let u = Profile::load_csv(path).map_err(|e| {
                    CoreError::Config(format!("init.path: {}: {e}", path.display()))
                })?;
                Ok(u)
            }
        }
    }

    /// Default stepper configuration for the preset's scheme.
    pub fn stepper(&self) -> StepperConfig {
        StepperConfig::for_scheme(self.scheme)
    }

    /// Check cross-field constraints that the individual builders cannot see.
    pub fn validate(&self) -> Result<()> {
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(CoreError::Config(format!(
                "run.horizon: must be positive and finite, got {}",
                self.horizon
            )));
        }
        if self.scheme == Scheme::Explicit && self.horizon > EXPLICIT_HORIZON_LIMIT {
            return Err(CoreError::Config(format!(
                "run.scheme: explicit stepping is limited to horizons <= {EXPLICIT_HORIZON_LIMIT:.0e}; \
                 horizon {:.3e} requires run.scheme = implicit",
                self.horizon
            )));
        }
        if self.n < 2 {
            return Err(CoreError::Config(format!(
                "grid.n: need at least 2 cells, got {}",
                self.n
            )));
        }
        let m = self.model()?;
        self.build_datum(&m)?;
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Flat key-value configuration
// ---------------------------------------------------------------------------

/// Parse flat `key = value` text: one pair per line, `#` starts a comment,
/// blank lines ignored, duplicate keys rejected. Both configs and manifests
/// use this grammar.
pub fn parse_key_values(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = match raw.find('#') {
            Some(p) => &raw[..p],
            None => raw,
        };
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| {
            CoreError::Config(format!(
                "line {}: expected 'key = value', got {line:?}",
                i + 1
            ))
        })?;
        let key = k.trim().to_string();
        if key.is_empty() {
            return Err(CoreError::Config(format!("line {}: empty key", i + 1)));
        }
        if map.insert(key.clone(), v.trim().to_string()).is_some() {
            return Err(CoreError::Config(format!("{key}: duplicate key")));
        }
    }
    Ok(map)
}

struct ConfigMap {
    map: BTreeMap<String, String>,
}

impl ConfigMap {
    fn take(&mut self, key: &str) -> Option<String> {
        self.map.remove(key)
    }

    fn require(&mut self, key: &str) -> Result<String> {
        self.take(key)
            .ok_or_else(|| CoreError::Config(format!("{key}: missing required key")))
    }

    fn finish(self) -> Result<()> {
        if let Some(k) = self.map.keys().next() {
            return Err(CoreError::Config(format!("{k}: unknown key")));
        }
        Ok(())
    }
}

fn parse_f64(key: &str, s: &str) -> Result<f64> {
    s.parse()
        .map_err(|_| CoreError::Config(format!("{key}: expected a number, got {s:?}")))
}

fn parse_usize(key: &str, s: &str) -> Result<usize> {
    s.parse()
        .map_err(|_| CoreError::Config(format!("{key}: expected a non-negative integer, got {s:?}")))
}

fn parse_sign(key: &str, s: &str) -> Result<i32> {
    match s {
        "1" | "+1" => Ok(1),
        "-1" => Ok(-1),
        _ => Err(CoreError::Config(format!(
            "{key}: expected +1 or -1, got {s:?}"
        ))),
    }
}

fn parse_bool(key: &str, s: &str) -> Result<bool> {
    match s {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(CoreError::Config(format!(
            "{key}: expected true or false, got {s:?}"
        ))),
    }
}

fn parse_list(key: &str, s: &str) -> Result<Vec<f64>> {
    let items: Result<Vec<f64>> = s
        .split(',')
        .map(|p| parse_f64(key, p.trim()))
        .collect();
    let items = items?;
    if items.is_empty() {
        return Err(CoreError::Config(format!("{key}: list must not be empty")));
    }
    Ok(items)
}

fn join_list(xs: &[f64]) -> String {
    let mut out = String::new();
    for (i, x) in xs.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        let _ = write!(out, "{x}");
    }
    out
}

/// Parse a preset from its flat-text configuration. Errors name the
/// offending key (`section.field: why`).
pub fn parse_config(text: &str) -> Result<ExperimentPreset> {
    let mut cfg = ConfigMap {
        map: parse_key_values(text)?,
    };
    let name = cfg.take("preset.name").unwrap_or_else(|| "custom".into());

    let kind_s = cfg.require("flux.kind")?;
    let kind = FluxKind::parse(&kind_s)
        .map_err(|e| CoreError::Config(format!("flux.kind: {e}")))?;
    let alpha = match cfg.take("flux.alpha") {
        Some(s) => parse_f64("flux.alpha", &s)?,
        None => 1.0,
    };
    let flux = FluxSpec::scaled(kind, alpha)
        .map_err(|e| CoreError::Config(format!("flux.alpha: {e}")))?;

    let theta = parse_f64("model.theta", &cfg.require("model.theta")?)?;
    let eps = parse_f64("model.epsilon", &cfg.require("model.epsilon")?)?;
    let near_threshold = match cfg.take("model.near_threshold") {
        Some(s) => parse_bool("model.near_threshold", &s)?,
        None => false,
    };
    let a = parse_f64("domain.a", &cfg.require("domain.a")?)?;
    let b = parse_f64("domain.b", &cfg.require("domain.b")?)?;
    let n = parse_usize("grid.n", &cfg.require("grid.n")?)?;

    let datum = match cfg.require("init.kind")?.as_str() {
        "layers" => DatumSpec::TransitionLayers {
            zeros: parse_list("init.zeros", &cfg.require("init.zeros")?)?,
        },
        "compacton" => DatumSpec::Compacton {
            zeros: parse_list("init.zeros", &cfg.require("init.zeros")?)?,
            start_sign: match cfg.take("init.sign") {
                Some(s) => parse_sign("init.sign", &s)?,
                None => 1,
            },
        },
        "step" => DatumSpec::StepPerturbation {
            jumps: parse_list("init.jumps", &cfg.require("init.jumps")?)?,
            start_sign: match cfg.take("init.sign") {
                Some(s) => parse_sign("init.sign", &s)?,
                None => 1,
            },
            amplitude: parse_f64("init.amplitude", &cfg.require("init.amplitude")?)?,
        },
        "csv" => DatumSpec::CustomCsv {
            path: PathBuf::from(cfg.require("init.path")?),
        },
        other => {
            return Err(CoreError::Config(format!(
                "init.kind: expected layers|compacton|step|csv, got {other:?}"
            )))
        }
    };

    let horizon = parse_f64("run.horizon", &cfg.require("run.horizon")?)?;
    let scheme = match cfg.take("run.scheme") {
        Some(s) => Scheme::parse(&s).map_err(|e| CoreError::Config(format!("run.scheme: {e}")))?,
        None => Scheme::Implicit,
    };

    let schedule = match cfg
        .take("checkpoints.kind")
        .unwrap_or_else(|| "geometric".into())
        .as_str()
    {
        "geometric" => CheckpointSchedule::Geometric {
            first: match cfg.take("checkpoints.first") {
                Some(s) => parse_f64("checkpoints.first", &s)?,
                None => 1.0,
            },
            factor: match cfg.take("checkpoints.factor") {
                Some(s) => parse_f64("checkpoints.factor", &s)?,
                None => 2.0,
            },
        },
        "linear" => CheckpointSchedule::Linear {
            spacing: parse_f64("checkpoints.spacing", &cfg.require("checkpoints.spacing")?)?,
        },
        "list" => CheckpointSchedule::Explicit(parse_list(
            "checkpoints.times",
            &cfg.require("checkpoints.times")?,
        )?),
        other => {
            return Err(CoreError::Config(format!(
                "checkpoints.kind: expected geometric|linear|list, got {other:?}"
            )))
        }
    };

    cfg.finish()?;
    let preset = ExperimentPreset {
        name,
        flux,
        theta,
        eps,
        a,
        b,
        n,
        datum,
        horizon,
        schedule,
        scheme,
        near_threshold,
    };
    Ok(preset)
}

/// Canonical flat-text form of a preset. `parse_config` of the output
/// reproduces the preset; serializing again yields the identical string.
pub fn serialize_config(p: &ExperimentPreset) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "preset.name = {}", p.name);
    let _ = writeln!(s, "flux.kind = {}", p.flux.kind().name());
    let _ = writeln!(s, "flux.alpha = {}", p.flux.alpha());
    let _ = writeln!(s, "model.theta = {}", p.theta);
    let _ = writeln!(s, "model.epsilon = {}", p.eps);
    if p.near_threshold {
        let _ = writeln!(s, "model.near_threshold = true");
    }
    let _ = writeln!(s, "domain.a = {}", p.a);
    let _ = writeln!(s, "domain.b = {}", p.b);
    let _ = writeln!(s, "grid.n = {}", p.n);
    match &p.datum {
        DatumSpec::TransitionLayers { zeros } => {
            let _ = writeln!(s, "init.kind = layers");
            let _ = writeln!(s, "init.zeros = {}", join_list(zeros));
        }
        DatumSpec::Compacton { zeros, start_sign } => {
            let _ = writeln!(s, "init.kind = compacton");
            let _ = writeln!(s, "init.zeros = {}", join_list(zeros));
            let _ = writeln!(s, "init.sign = {start_sign}");
        }
        DatumSpec::StepPerturbation { jumps, start_sign, amplitude } => {
            let _ = writeln!(s, "init.kind = step");
            let _ = writeln!(s, "init.jumps = {}", join_list(jumps));
            let _ = writeln!(s, "init.sign = {start_sign}");
            let _ = writeln!(s, "init.amplitude = {amplitude}");
        }
        DatumSpec::CustomCsv { path } => {
            let _ = writeln!(s, "init.kind = csv");
            let _ = writeln!(s, "init.path = {}", path.display());
        }
    }
    let _ = writeln!(s, "run.horizon = {}", p.horizon);
    let _ = writeln!(s, "run.scheme = {}", p.scheme.name());
    match &p.schedule {
        CheckpointSchedule::Geometric { first, factor } => {
            let _ = writeln!(s, "checkpoints.kind = geometric");
            let _ = writeln!(s, "checkpoints.first = {first}");
            let _ = writeln!(s, "checkpoints.factor = {factor}");
        }
        CheckpointSchedule::Linear { spacing } => {
            let _ = writeln!(s, "checkpoints.kind = linear");
            let _ = writeln!(s, "checkpoints.spacing = {spacing}");
        }
        CheckpointSchedule::Explicit(times) => {
            let _ = writeln!(s, "checkpoints.kind = list");
            let _ = writeln!(s, "checkpoints.times = {}", join_list(times));
        }
    }
    s
}

// ---------------------------------------------------------------------------
// Built-in presets
// ---------------------------------------------------------------------------

/// Names accepted by [`preset`]. `exp2-slow` and `exp3` reach metastable
/// horizons near `1e10`–`1e12` and are meant for on-demand runs, not CI.
pub const PRESET_NAMES: &[&str] =
    &["exp1", "exp2-slow", "exp2-fast", "exp3", "exp4a", "exp4b"];

/// Names accepted by [`family`].
pub const FAMILY_NAMES: &[&str] = &["theta2-distance", "theta2-eps", "theta4-eps"];

/// The six-layer datum shared by the rational-flux experiments.
const SIX_LAYERS: [f64; 6] = [-3.4, -2.0, 0.0, 0.9, 2.2, 3.2];

fn base_preset(name: &str, flux: FluxSpec, theta: f64, horizon: f64, datum: DatumSpec) -> ExperimentPreset {
    ExperimentPreset {
        name: name.into(),
        flux,
        theta,
        eps: 0.1,
        a: -4.0,
        b: 4.0,
        n: 2048,
        datum,
        horizon,
        schedule: CheckpointSchedule::Geometric { first: 1.0, factor: 2.0 },
        scheme: Scheme::Implicit,
        near_threshold: false,
    }
}

fn six_layer_datum() -> DatumSpec {
    DatumSpec::TransitionLayers { zeros: SIX_LAYERS.to_vec() }
}

fn step_datum() -> DatumSpec {
    DatumSpec::StepPerturbation { jumps: vec![-3.0, 1.0], start_sign: 1, amplitude: 1e-2 }
}

/// Look up a built-in experiment by name.
pub fn preset(name: &str) -> Result<ExperimentPreset> {
    let p = match name {
        // Six layers under the rational flux: the closest pair (gap 0.9)
        // collapses first, then the next (gap 1.0) an order of magnitude
        // later.
        "exp1" => base_preset("exp1", FluxSpec::rational(), 2.0, 1e5, six_layer_datum()),
        // Same run with the flux scaled down 4x: the interaction decay rate
        // steepens and the first collapse moves out to ~1e10.
        "exp2-slow" => base_preset(
            "exp2-slow",
            FluxSpec::scaled(FluxKind::Rational, 0.25)?,
            2.0,
            1e11,
            six_layer_datum(),
        ),
        // Flux scaled up 2x: collapses accelerate into the hundreds.
        "exp2-fast" => base_preset(
            "exp2-fast",
            FluxSpec::scaled(FluxKind::Rational, 2.0)?,
            2.0,
            5e3,
            six_layer_datum(),
        ),
        // Small-amplitude discontinuous datum: layers form from the steps by
        // t ~ 10, then persist to a ~1e11 first collapse.
        "exp3" => base_preset("exp3", FluxSpec::rational(), 2.0, 1e12, step_datum()),
        // Gaussian flux with quartic wells: algebraic tails interact much
        // more strongly, so the six-layer pattern loses two bumps by ~450.
        "exp4a" => base_preset("exp4a", FluxSpec::gaussian(), 4.0, 1e4, six_layer_datum()),
        // Gaussian flux, cubic wells, step datum: first interface gone near
        // 8e4.
        "exp4b" => base_preset("exp4b", FluxSpec::gaussian(), 3.0, 1e6, step_datum()),
        other => {
            return Err(CoreError::Config(format!(
                "preset.name: unknown preset {other:?} (available: {})",
                PRESET_NAMES.join(", ")
            )))
        }
    };
    Ok(p)
}

// ---------------------------------------------------------------------------
// Families and timing laws
// ---------------------------------------------------------------------------

/// The parameter a family of runs sweeps.
#[derive(Debug, Clone, PartialEq)]
pub enum FamilyVariation {
    /// Sweep `eps`, keeping the base datum.
    EpsList(Vec<f64>),
    /// Sweep the distance `d` between a symmetric layer pair at `+-d/2`,
    /// keeping the base `eps`.
    DistanceList(Vec<f64>),
}

/// A base preset plus the swept parameter values.
#[derive(Debug, Clone)]
pub struct FamilySpec {
    /// Family identifier.
    pub name: String,
    /// Preset every member starts from.
    pub base: ExperimentPreset,
    /// What varies across members.
    pub variation: FamilyVariation,
}

/// Outcome of a family sweep: per-member first collapse times and the
/// fitted timing law.
#[derive(Debug, Clone)]
pub struct FamilyOutcome {
    /// Human-readable law, e.g. `ln(t) ~ 1/eps`.
    pub law: String,
    /// Raw swept parameter per member.
    pub parameters: Vec<f64>,
    /// Transformed abscissa actually used in the fit.
    pub abscissae: Vec<f64>,
    /// First collapse time per member.
    pub first_collapse: Vec<f64>,
    /// Least-squares fit of `ln t` against the abscissa.
    pub fit: LineFit,
}

fn pair_family(name: &str, flux: FluxSpec, theta: f64, horizon: f64, variation: FamilyVariation) -> FamilySpec {
    FamilySpec {
        name: name.into(),
        base: ExperimentPreset {
            name: name.into(),
            flux,
            theta,
            eps: 0.1,
            a: -2.0,
            b: 2.0,
            n: 512,
            datum: DatumSpec::TransitionLayers { zeros: vec![-0.5, 0.5] },
            horizon,
            schedule: CheckpointSchedule::Geometric { first: 1.0, factor: 2.0 },
            scheme: Scheme::Implicit,
            near_threshold: false,
        },
        variation,
    }
}

/// Look up a built-in family by name.
pub fn family(name: &str) -> Result<FamilySpec> {
    let f = match name {
        "theta2-distance" => pair_family(
            name,
            FluxSpec::rational(),
            2.0,
            1e7,
            FamilyVariation::DistanceList(vec![0.8, 1.0, 1.2]),
        ),
        "theta2-eps" => pair_family(
            name,
            FluxSpec::rational(),
            2.0,
            1e8,
            FamilyVariation::EpsList(vec![0.08, 0.1, 0.12]),
        ),
        // Degenerate wells: a *close* pair, where the interaction is strong
        // enough to drive the layers at the algebraic-ladder rate. (Widely
        // separated pairs survive far longer — the measured exponent rises
        // smoothly from ~2.4 at gap 0.22 toward ~2*beta - 1 = 5 beyond gap
        // ~1 — so the gap is chosen where the power-law fit sits squarely in
        // the ladder regime, with the first-collapse times fully
        // grid-converged from n = 512 up.)
        "theta4-eps" => {
            let mut f = pair_family(
                name,
                FluxSpec::gaussian(),
                4.0,
                1e3,
                FamilyVariation::EpsList(vec![0.08, 0.1, 0.12]),
            );
            f.base.n = 1024;
            f.base.datum = DatumSpec::TransitionLayers { zeros: vec![-0.125, 0.125] };
            f.base.schedule = CheckpointSchedule::Geometric { first: 0.25, factor: 2.0 };
            f
        }
        other => {
            return Err(CoreError::Config(format!(
                "family: unknown family {other:?} (available: {})",
                FAMILY_NAMES.join(", ")
            )))
        }
    };
    Ok(f)
}

/// The member preset obtained by substituting one swept value into the base.
pub fn member_preset(spec: &FamilySpec, value: f64) -> ExperimentPreset {
    let mut p = spec.base.clone();
    match spec.variation {
        FamilyVariation::EpsList(_) => {
            p.eps = value;
            p.name = format!("{}-eps{value}", spec.name);
        }
        FamilyVariation::DistanceList(_) => {
            p.datum = DatumSpec::TransitionLayers { zeros: vec![-0.5 * value, 0.5 * value] };
            p.name = format!("{}-d{value}", spec.name);
        }
    }
    p
}

fn first_collapse_of(p: &ExperimentPreset) -> Result<f64> {
    p.validate()?;
    let m = p.model()?;
    let datum = p.build_datum(&m)?;
    let cfg = p.stepper();
    let trace = evolve(&m, &cfg, &datum, p.horizon, &p.schedule)?;
    let events = collapse_times(&m, &cfg, &trace)?;
    match events.first() {
        Some(e) => Ok(e.t),
        None => Err(CoreError::NoSolution(format!(
            "family member {}: no collapse event before the horizon {:.3e}; \
             insufficient events for a timing fit (raise run.horizon)",
            p.name, p.horizon
        ))),
    }
}

/// Run every member of a family (one thread per member), extract first
/// collapse times, and fit the slow-motion law for the base's `theta`.
pub fn timing_law(spec: &FamilySpec) -> Result<FamilyOutcome> {
    let values = match &spec.variation {
        FamilyVariation::EpsList(v) => v.clone(),
        FamilyVariation::DistanceList(v) => v.clone(),
    };
    if values.len() < 3 {
        return Err(CoreError::Config(format!(
            "family {}: a timing fit needs at least 3 members, got {}",
            spec.name,
            values.len()
        )));
    }
    let results: Vec<Result<f64>> = std::thread::scope(|scope| {
        let handles: Vec<_> = values
            .iter()
            .map(|&v| {
                let spec_ref = &*spec;
                scope.spawn(move || first_collapse_of(&member_preset(spec_ref, v)))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("family member worker panicked"))
            .collect()
    });
    let mut times = Vec::with_capacity(values.len());
    for r in results {
        times.push(r?);
    }

    let (law, abscissae): (String, Vec<f64>) = match &spec.variation {
        FamilyVariation::DistanceList(_) => ("ln(t) ~ d".into(), values.clone()),
        FamilyVariation::EpsList(_) if spec.base.theta <= 2.0 => {
            ("ln(t) ~ 1/eps".into(), values.iter().map(|e| 1.0 / e).collect())
        }
        FamilyVariation::EpsList(_) => (
            "ln(t) ~ ln(1/eps)".into(),
            values.iter().map(|e| (1.0 / e).ln()).collect(),
        ),
    };
    let ln_t: Vec<f64> = times.iter().map(|t| t.ln()).collect();
    let fit = line_fit(&abscissae, &ln_t)?;
    Ok(FamilyOutcome {
        law,
        parameters: values,
        abscissae,
        first_collapse: times,
        fit,
    })
}

/// Write the per-member data of a family sweep as CSV.
pub fn write_family_csv<W: IoWrite>(o: &FamilyOutcome, mut w: W) -> Result<()> {
    writeln!(w, "parameter,abscissa,first_collapse_t,ln_t")?;
    for i in 0..o.parameters.len() {
        writeln!(
            w,
            "{},{},{},{}",
            o.parameters[i],
            o.abscissae[i],
            o.first_collapse[i],
            o.first_collapse[i].ln()
        )?;
    }
    Ok(())
}

/// Write the fitted law in the flat key-value grammar.
pub fn write_fit_summary<W: IoWrite>(o: &FamilyOutcome, mut w: W) -> Result<()> {
    writeln!(w, "fit.law = {}", o.law)?;
    writeln!(w, "fit.slope = {}", o.fit.slope)?;
    writeln!(w, "fit.intercept = {}", o.fit.intercept)?;
    writeln!(w, "fit.r2 = {}", o.fit.r2)?;
    Ok(())
}

// ---------------------------------------------------------------------------
// Algebraic timescale ladder
// ---------------------------------------------------------------------------

/// The geometric timescale ladder governing algebraically slow motion.
#[derive(Debug, Clone, PartialEq)]
pub struct AlgebraicTimescales {
    /// Ratio `1/2 + 1/theta` of the ladder.
    pub alpha: f64,
    /// Partial sums `k_j = alpha + alpha^2 + ... + alpha^j`.
    pub partial_sums: Vec<f64>,
    /// Limit exponent `(theta + 2)/(theta - 2)`; the `k_j` increase to it.
    pub beta: f64,
}

/// Exponent ladder `k_j` and its limit `beta` for `theta > 2`.
///
/// For `theta <= 2` the ratio `alpha = 1/2 + 1/theta` reaches 1 and the
/// ladder diverges — the motion is exponentially, not algebraically, slow —
/// so that range is a domain error.
pub fn k_sequence(theta: f64, j: usize) -> Result<AlgebraicTimescales> {
    if !(theta > 2.0 && theta.is_finite()) {
        return Err(CoreError::Domain(format!(
            "the timescale ladder needs theta > 2 (its ratio 1/2 + 1/theta must \
             be below 1; the sums diverge otherwise), got theta = {theta}"
        )));
    }
    if j == 0 {
        return Err(CoreError::Domain("need at least one ladder exponent, got j = 0".into()));
    }
    let alpha = 0.5 + 1.0 / theta;
    let mut partial_sums = Vec::with_capacity(j);
    let mut term = 1.0;
    let mut sum = 0.0;
    for _ in 0..j {
        term *= alpha;
        sum += term;
        partial_sums.push(sum);
    }
    let beta = (theta + 2.0) / (theta - 2.0);
    Ok(AlgebraicTimescales { alpha, partial_sums, beta })
}

// ---------------------------------------------------------------------------
// Derived constants
// ---------------------------------------------------------------------------

/// Constants derived from a model, the ones recorded in every manifest.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivedConstants {
    /// Flux argument where monotonicity turns.
    pub kappa: f64,
    /// Plateau value of the increasing envelope of `s Q(s) - Qt(s)`.
    pub ell: f64,
    /// Maximal slope of the flux.
    pub q_max_slope: f64,
    /// Admissibility threshold for `eps`.
    pub eps0: f64,
    /// Single-transition energy at this `eps`.
    pub c_eps: f64,
    /// Small-`eps` limit of the single-transition energy.
    pub c0: f64,
}

/// Compute the manifest constants for a model.
pub fn derived_constants(m: &ModelParams) -> Result<DerivedConstants> {
    Ok(DerivedConstants {
        kappa: m.flux().kappa(),
        ell: m.flux().ell(),
        q_max_slope: m.flux().q_max_slope(),
        eps0: m.eps0(),
        c_eps: c_eps(m)?,
        c0: c0(m)?,
    })
}

// ---------------------------------------------------------------------------
// Running presets with artifacts
// ---------------------------------------------------------------------------

/// Paths and data produced by [`run_preset`].
#[derive(Debug)]
pub struct RunArtifacts {
    /// Directory everything was written into.
    pub out_dir: PathBuf,
    /// The finalized manifest.
    pub manifest_path: PathBuf,
    /// Per-checkpoint scalar diagnostics.
    pub diagnostics_path: PathBuf,
    /// Bracketed collapse events.
    pub events_path: PathBuf,
    /// One profile CSV per recorded checkpoint.
    pub snapshot_paths: Vec<PathBuf>,
    /// The collapse events themselves.
    pub events: Vec<CollapseEvent>,
    /// Full in-memory trace of the run.
    pub trace: EvolutionTrace,
    /// Wall-clock duration of the run in seconds.
    pub wall_seconds: f64,
}

enum RunStatus<'a> {
    Running,
    Finalized {
        trace: &'a EvolutionTrace,
        events: &'a [CollapseEvent],
    },
    Failed(String),
}

fn write_manifest(
    path: &Path,
    p: &ExperimentPreset,
    constants: &DerivedConstants,
    snapshot_paths: &[PathBuf],
    wall_seconds: f64,
    status: &RunStatus<'_>,
) -> Result<()> {
    let mut s = String::new();
    let _ = writeln!(s, "# run manifest for preset {}", p.name);
    s.push_str(&serialize_config(p));
    let _ = writeln!(s, "constants.kappa = {}", constants.kappa);
    let _ = writeln!(s, "constants.ell = {}", constants.ell);
    let _ = writeln!(s, "constants.q_max_slope = {}", constants.q_max_slope);
    let _ = writeln!(s, "constants.eps0 = {}", constants.eps0);
    let _ = writeln!(s, "constants.c_eps = {}", constants.c_eps);
    let _ = writeln!(s, "constants.c0 = {}", constants.c0);
    let _ = writeln!(s, "manifest.version = {}", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(s, "manifest.wall_seconds = {wall_seconds}");
    match status {
        RunStatus::Running => {
            let _ = writeln!(s, "manifest.status = running");
        }
        RunStatus::Failed(msg) => {
            let _ = writeln!(s, "manifest.status = failed");
            let _ = writeln!(s, "manifest.error = {}", msg.replace('\n', " "));
        }
        RunStatus::Finalized { trace, events } => {
            let _ = writeln!(s, "manifest.status = finalized");
            let last = trace.final_state();
            let _ = writeln!(s, "run.final_t = {}", last.t);
            let _ = writeln!(s, "run.steps = {}", last.stats.steps);
            let _ = writeln!(s, "run.rejected = {}", last.stats.rejected);
            let _ = writeln!(s, "run.newton_iters = {}", last.stats.newton_iters);
            let _ = writeln!(s, "run.dissipation = {}", last.stats.dissipation);
            match trace.exit {
                ExitReason::HorizonReached => {
                    let _ = writeln!(s, "run.exit = horizon");
                }
                ExitReason::Converged { well, t } => {
                    let _ = writeln!(s, "run.exit = converged");
                    let _ = writeln!(s, "run.converged_well = {well}");
                    let _ = writeln!(s, "run.converged_t = {t}");
                }
            }
            let _ = writeln!(s, "run.events = {}", events.len());
            let _ = writeln!(s, "artifact.diagnostics = diagnostics.csv");
            let _ = writeln!(s, "artifact.events = events.csv");
            let names: Vec<String> = snapshot_paths
                .iter()
                .map(|q| {
                    q.file_name()
                        .map(|n| n.to_string_lossy().into_owned())
                        .unwrap_or_default()
                })
                .collect();
            let _ = writeln!(s, "artifact.snapshot_count = {}", names.len());
            let _ = writeln!(s, "artifact.snapshots = {}", names.join(";"));
        }
    }
    fs::write(path, s)?;
    Ok(())
}

fn join_semicolon(xs: &[f64]) -> String {
    let mut out = String::new();
    for (i, x) in xs.iter().enumerate() {
        if i > 0 {
            out.push(';');
        }
        let _ = write!(out, "{x}");
    }
    out
}

/// Diagnostics CSV header written by [`run_preset`].
pub const DIAGNOSTICS_HEADER: &str =
    "t,energy,gradient_energy,potential_energy,rate_l2_sq,n_zeros,max_grad,zeros";

fn append_checkpoint_artifacts(
    m: &ModelParams,
    diag: &mut BufWriter<File>,
    out_dir: &Path,
    snapshot_paths: &mut Vec<PathBuf>,
    r: &DiagnosticsRecord,
    state: &State,
) -> Result<()> {
    let parts = energy(m, &state.u);
    writeln!(
        diag,
        "{},{},{},{},{},{},{},{}",
        r.t,
        r.energy,
        parts.gradient_part,
        parts.potential_part,
        r.ut_l2_sq,
        r.n_zeros,
        r.max_grad,
        join_semicolon(&r.zero_positions)
    )?;
    let path = out_dir.join(format!("snapshot_{:04}.csv", snapshot_paths.len()));
    state.u.save_csv(&path)?;
    snapshot_paths.push(path);
    Ok(())
}

/// Evolve checkpoint by checkpoint, flushing diagnostics and snapshots as
/// they are produced so a failure preserves everything before it.
fn evolve_with_artifacts(
    p: &ExperimentPreset,
    m: &ModelParams,
    datum: Profile,
    out_dir: &Path,
    diagnostics_path: &Path,
    snapshot_paths: &mut Vec<PathBuf>,
) -> Result<EvolutionTrace> {
    let cfg = p.stepper();
    let checkpoints = p.schedule.times(p.horizon)?;
    let mut diag = BufWriter::new(File::create(diagnostics_path)?);
    writeln!(diag, "{DIAGNOSTICS_HEADER}")?;

    let mut records: Vec<DiagnosticsRecord> = Vec::new();
    let mut snapshots: Vec<State> = Vec::new();
    let mut exit = ExitReason::HorizonReached;
    let mut state = State { t: 0.0, u: datum, stats: StepStats::default() };

    for (k, &tc) in checkpoints.iter().enumerate() {
        let span = evolve_span(m, &cfg, &state, &[tc]).inspect_err(|_| {
            let _ = diag.flush();
        })?;
        // Each span re-records its start; keep it only for the first span
        // (that is the t = 0 row).
        let skip = usize::from(k > 0);
        for (r, snap) in span.records.iter().zip(span.snapshots.iter()).skip(skip) {
            append_checkpoint_artifacts(m, &mut diag, out_dir, snapshot_paths, r, snap)?;
            records.push(r.clone());
            snapshots.push(snap.clone());
        }
        state = span.final_state().clone();
        if let ExitReason::Converged { .. } = span.exit {
            exit = span.exit;
            break;
        }
    }
    diag.flush()?;
    Ok(EvolutionTrace { records, snapshots, exit })
}

fn write_events_csv(path: &Path, events: &[CollapseEvent]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "t,zeros_before,zeros_after")?;
    for e in events {
        writeln!(w, "{},{},{}", e.t, e.zeros_before, e.zeros_after)?;
    }
    w.flush()?;
    Ok(())
}

/// Execute a preset, writing `manifest.txt`, `diagnostics.csv`,
/// `events.csv`, and per-checkpoint `snapshot_NNNN.csv` files into
/// `out_dir`.
///
/// The manifest is written with status `running` before stepping begins and
/// rewritten as `finalized` (or `failed`, with the error message and all
/// partial outputs preserved) at the end. Identical presets produce
/// byte-identical diagnostics: the pipeline is deterministic and uses no
/// randomness.
pub fn run_preset(p: &ExperimentPreset, out_dir: impl AsRef<Path>) -> Result<RunArtifacts> {
    let out_dir = out_dir.as_ref();
    let started = Instant::now();
    p.validate()?;
    let m = p.model()?;
    let datum = p.build_datum(&m)?;
    let constants = derived_constants(&m)?;

    fs::create_dir_all(out_dir)?;
    let manifest_path = out_dir.join("manifest.txt");
    let diagnostics_path = out_dir.join("diagnostics.csv");
    let events_path = out_dir.join("events.csv");
    write_manifest(&manifest_path, p, &constants, &[], 0.0, &RunStatus::Running)?;

    let mut snapshot_paths = Vec::new();
    let outcome = evolve_with_artifacts(
        p,
        &m,
        datum,
        out_dir,
        &diagnostics_path,
        &mut snapshot_paths,
    )
    .and_then(|trace| {
        let events = collapse_times(&m, &p.stepper(), &trace)?;
        write_events_csv(&events_path, &events)?;
        Ok((trace, events))
    });
    let wall_seconds = started.elapsed().as_secs_f64();

    match outcome {
        Ok((trace, events)) => {
            write_manifest(
                &manifest_path,
                p,
                &constants,
                &snapshot_paths,
                wall_seconds,
                &RunStatus::Finalized { trace: &trace, events: &events },
            )?;
            Ok(RunArtifacts {
                out_dir: out_dir.to_path_buf(),
                manifest_path,
                diagnostics_path,
                events_path,
                snapshot_paths,
                events,
                trace,
                wall_seconds,
            })
        }
        Err(e) => {
            let _ = write_manifest(
                &manifest_path,
                p,
                &constants,
                &snapshot_paths,
                wall_seconds,
                &RunStatus::Failed(e.to_string()),
            );
            Err(e)
        }
    }
}
