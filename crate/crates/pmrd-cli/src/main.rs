//! `pmrd` — command-line front end for the reaction-diffusion laboratory.
//!
//! Verbs:
//!
//! * `stationary` — emit standing-wave / compacton / periodic profiles as CSV;
//! * `evolve` — run one experiment preset, writing manifest + CSV artifacts;
//! * `family` — run a preset family and fit its slow-motion timing law;
//! * `verify` — check the model inequalities and run invariants;
//! * `constants` — print the derived constants for a configuration.
//!
//! Exit codes: 0 success, 2 configuration error, 3 numerical failure,
//! 4 verification-band miss (only from `verify`).

use std::fs;
use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use pmrd_core::energy::{c0, verify_pointwise_inequality};
use pmrd_core::evolution::{evolve, CheckpointSchedule, ExitReason, Scheme, StepperConfig};
use pmrd_core::harness::{
    self, serialize_config, DatumSpec, ExperimentPreset, FAMILY_NAMES, PRESET_NAMES,
};
use pmrd_core::inversion::InversionContext;
use pmrd_core::model::{FluxSpec, ModelParams, PotentialSpec};
use pmrd_core::stationary::{
    compacton, periodic_profile, standing_wave, standing_wave_decreasing,
};
use pmrd_core::{CoreError, Result};

#[derive(Parser)]
#[command(
    name = "pmrd",
    version,
    about = "Stationary solutions, long-horizon evolution, and slow-motion \
             timing laws for a Perona-Malik reaction-diffusion model"
)]
struct Cli {
    #[command(subcommand)]
    verb: Verb,
}

/// Flags shared by every verb.
#[derive(Args)]
struct CommonOpts {
    /// Flat key-value run configuration file.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Directory artifacts are written into.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Override the number of grid cells.
    #[arg(long, value_name = "N")]
    grid: Option<usize>,
    /// Override the time integrator.
    #[arg(long, value_name = "SCHEME", value_parser = ["explicit", "implicit"])]
    scheme: Option<String>,
    /// Assert that the run uses no randomness. The pipeline is fully
    /// deterministic, so this always holds; the flag exists so scripts can
    /// pin the guarantee.
    #[arg(long)]
    seedless: bool,
}

#[derive(Subcommand)]
enum Verb {
    /// Emit stationary profiles (standing wave, and compacton or periodic
    /// orbit depending on the well exponent) as CSV files.
    Stationary {
        /// Built-in preset name supplying the model (alternative to --config).
        preset: Option<String>,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Run one experiment preset: manifest, diagnostics, events, snapshots.
    Evolve {
        /// Built-in preset name (alternative to --config).
        preset: Option<String>,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Run a family of presets and fit the slow-motion timing law.
    Family {
        /// Built-in family name.
        name: String,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Check inversion, inequality, energy-constant, and dissipation
    /// invariants; exits 4 if any band is missed.
    Verify {
        /// Built-in preset name to verify (alternative to --config); without
        /// either, a default battery over both fluxes runs.
        preset: Option<String>,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Print the derived constants for a configuration.
    Constants {
        /// Built-in preset name (alternative to --config).
        preset: Option<String>,
        #[command(flatten)]
        common: CommonOpts,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.verb {
        Verb::Stationary { preset, common } => {
            seedless_note(&common);
            let p = load_preset(preset.as_deref(), &common)?;
            cmd_stationary(&p, &out_dir(&common, &p.name))?;
            Ok(ExitCode::SUCCESS)
        }
        Verb::Evolve { preset, common } => {
            seedless_note(&common);
            let p = load_preset(preset.as_deref(), &common)?;
            cmd_evolve(&p, &out_dir(&common, &p.name))?;
            Ok(ExitCode::SUCCESS)
        }
        Verb::Family { name, common } => {
            seedless_note(&common);
            cmd_family(&name, &common)?;
            Ok(ExitCode::SUCCESS)
        }
        Verb::Verify { preset, common } => {
            seedless_note(&common);
            cmd_verify(preset.as_deref(), &common)
        }
        Verb::Constants { preset, common } => {
            seedless_note(&common);
            let p = load_preset(preset.as_deref(), &common)?;
            cmd_constants(&p)?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn seedless_note(common: &CommonOpts) {
    if common.seedless {
        println!("seedless: confirmed — no randomness source exists in the pipeline");
    }
}

/// Resolve the preset from a built-in name or a config file, then apply the
/// `--grid` / `--scheme` overrides.
fn load_preset(name: Option<&str>, common: &CommonOpts) -> Result<ExperimentPreset> {
    let mut p = match (name, &common.config) {
        (Some(n), None) => harness::preset(n)?,
        (None, Some(path)) => {
            let text = fs::read_to_string(path)
                .map_err(|e| CoreError::Config(format!("{}: {e}", path.display())))?;
            harness::parse_config(&text)?
        }
        (Some(_), Some(_)) => {
            return Err(CoreError::Config(
                "give either a built-in preset name or --config, not both".into(),
            ))
        }
        (None, None) => {
            return Err(CoreError::Config(format!(
                "need a preset name ({}) or --config PATH",
                PRESET_NAMES.join(", ")
            )))
        }
    };
    if let Some(n) = common.grid {
        p.n = n;
    }
    if let Some(s) = &common.scheme {
        p.scheme = Scheme::parse(s).map_err(|e| CoreError::Config(format!("--scheme: {e}")))?;
    }
    Ok(p)
}

fn out_dir(common: &CommonOpts, name: &str) -> PathBuf {
    common
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from("runs").join(name))
}

// ---------------------------------------------------------------------------
// stationary
// ---------------------------------------------------------------------------

fn cmd_stationary(p: &ExperimentPreset, out: &Path) -> Result<()> {
    let m = p.model()?;
    fs::create_dir_all(out)?;

    let (wave, report) = standing_wave(&m, p.n)?;
    let wave_path = out.join("wave.csv");
    wave.save_csv(&wave_path)?;
    let (dec, _) = standing_wave_decreasing(&m, p.n)?;
    let dec_path = out.join("wave_decreasing.csv");
    dec.save_csv(&dec_path)?;
    println!("wrote {}", wave_path.display());
    println!("wrote {}", dec_path.display());
    if let (Some(x1e), Some(x2e)) = (report.x1e, report.x2e) {
        println!("contact points: x2e = {x2e}, x1e = {x1e}");
    }

    // Sign-change positions for the multi-layer profile: reuse the preset's
    // datum when it prescribes zeros, otherwise a single centered layer.
    let zeros = match &p.datum {
        DatumSpec::TransitionLayers { zeros } | DatumSpec::Compacton { zeros, .. } => {
            zeros.clone()
        }
        _ => vec![0.5 * (p.a + p.b)],
    };

    if p.theta < 2.0 {
        let u = compacton(&m, &zeros, 1, p.n)?;
        let path = out.join("compacton.csv");
        u.save_csv(&path)?;
        println!("wrote {}", path.display());
    } else {
        let n_layers = zeros.len();
        let u = periodic_profile(&m, n_layers, p.n)?;
        let path = out.join("periodic.csv");
        u.save_csv(&path)?;
        println!("wrote {} ({n_layers} sign changes)", path.display());
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// evolve
// ---------------------------------------------------------------------------

fn cmd_evolve(p: &ExperimentPreset, out: &Path) -> Result<()> {
    println!("running preset {} into {}", p.name, out.display());
    let art = harness::run_preset(p, out)?;
    let final_state = art.trace.final_state();
    match art.trace.exit {
        ExitReason::HorizonReached => {
            println!(
                "reached horizon t = {} in {} steps ({:.2}s wall)",
                final_state.t, final_state.stats.steps, art.wall_seconds
            );
        }
        ExitReason::Converged { well, t } => {
            println!(
                "converged to the constant {well} at t = {t} after {} steps ({:.2}s wall)",
                final_state.stats.steps, art.wall_seconds
            );
        }
    }
    for e in &art.events {
        println!(
            "collapse at t = {:.6e} ({} -> {} zeros)",
            e.t, e.zeros_before, e.zeros_after
        );
    }
    if art.events.is_empty() {
        println!("no collapse events before the horizon");
    }
    println!("manifest: {}", art.manifest_path.display());
    Ok(())
}

// ---------------------------------------------------------------------------
// family
// ---------------------------------------------------------------------------

fn cmd_family(name: &str, common: &CommonOpts) -> Result<()> {
    let mut spec = harness::family(name).map_err(|e| {
        CoreError::Config(format!("{e}; available families: {}", FAMILY_NAMES.join(", ")))
    })?;
    if let Some(n) = common.grid {
        spec.base.n = n;
    }
    if let Some(s) = &common.scheme {
        spec.base.scheme =
            Scheme::parse(s).map_err(|e| CoreError::Config(format!("--scheme: {e}")))?;
    }
    let out = out_dir(common, &format!("family-{name}"));
    fs::create_dir_all(&out)?;

    println!("running family {name} ({} members) ...", member_count(&spec));
    let outcome = harness::timing_law(&spec)?;
    for i in 0..outcome.parameters.len() {
        println!(
            "  member {}: first collapse t = {:.6e}",
            outcome.parameters[i], outcome.first_collapse[i]
        );
    }
    println!(
        "law {}: slope = {:.6}, intercept = {:.6}, r2 = {:.6}",
        outcome.law, outcome.fit.slope, outcome.fit.intercept, outcome.fit.r2
    );

    let csv_path = out.join("family.csv");
    harness::write_family_csv(&outcome, BufWriter::new(File::create(&csv_path)?))?;
    let fit_path = out.join("fit.txt");
    harness::write_fit_summary(&outcome, BufWriter::new(File::create(&fit_path)?))?;
    println!("wrote {}", csv_path.display());
    println!("wrote {}", fit_path.display());
    Ok(())
}

fn member_count(spec: &harness::FamilySpec) -> usize {
    match &spec.variation {
        harness::FamilyVariation::EpsList(v) => v.len(),
        harness::FamilyVariation::DistanceList(v) => v.len(),
    }
}

// ---------------------------------------------------------------------------
// verify
// ---------------------------------------------------------------------------

struct Verifier {
    misses: usize,
}

impl Verifier {
    fn check(&mut self, name: &str, ok: bool, detail: String) {
        if ok {
            println!("ok   {name}: {detail}");
        } else {
            println!("MISS {name}: {detail}");
            self.misses += 1;
        }
    }
}

/// Largest relative error of the inversion round-trip `j(p(s)) = s` over a
/// uniform sample of the monotone branch.
fn round_trip_error(ctx: &InversionContext, samples: usize) -> Result<f64> {
    let mut worst = 0.0f64;
    for i in 1..=samples {
        let s = ctx.s_max() * i as f64 / (samples + 1) as f64;
        let back = ctx.j_eps(ctx.p_eps(s))?;
        worst = worst.max((back - s).abs() / s);
    }
    Ok(worst)
}

fn verify_model(v: &mut Verifier, label: &str, m: &ModelParams) -> Result<()> {
    let ctx = InversionContext::for_model(m);

    let rt = round_trip_error(&ctx, 1000)?;
    v.check(
        &format!("{label} inversion-round-trip"),
        rt <= 1e-8,
        format!("max rel err {rt:.3e} (band 1e-8)"),
    );

    let rep = verify_pointwise_inequality(&ctx, 200)?;
    v.check(
        &format!("{label} pointwise-inequality"),
        rep.min_value >= -1e-10,
        format!(
            "min g = {:.3e} at ({:.4}, {:.4}) on a {n}x{n} grid",
            rep.min_value,
            rep.arg_x,
            rep.arg_y,
            n = rep.samples
        ),
    );
    Ok(())
}

fn verify_dissipation(v: &mut Verifier, label: &str, p: &ExperimentPreset) -> Result<()> {
    let m = p.model()?;
    let datum = p.build_datum(&m)?;
    let cfg = StepperConfig::for_scheme(p.scheme);
    let horizon = p.horizon.min(10.0);
    let trace = evolve(
        &m,
        &cfg,
        &datum,
        horizon,
        &CheckpointSchedule::Linear { spacing: horizon / 10.0 },
    )?;
    let mut worst = 0.0f64;
    for w in trace.records.windows(2) {
        let rise = w[1].energy - w[0].energy;
        let allowed = cfg.energy_drift_tol * (1.0 + w[0].energy.abs());
        worst = worst.max(rise - allowed);
    }
    v.check(
        &format!("{label} energy-dissipation"),
        worst <= 0.0,
        format!(
            "checkpointed energy nonincreasing to T = {horizon} (worst excess {worst:.3e})"
        ),
    );
    Ok(())
}

fn cmd_verify(name: Option<&str>, common: &CommonOpts) -> Result<ExitCode> {
    let mut v = Verifier { misses: 0 };

    if name.is_some() || common.config.is_some() {
        let p = load_preset(name, common)?;
        let m = p.model()?;
        verify_model(&mut v, &p.name, &m)?;
        verify_dissipation(&mut v, &p.name, &p)?;
    } else {
        // Default battery: both prototype fluxes at two eps values, the
        // quadratic-well energy constant, and a short dissipation run.
        for (fname, flux) in [("rational", FluxSpec::rational()), ("gaussian", FluxSpec::gaussian())]
        {
            for eps in [0.1, 0.5] {
                let label = format!("{fname} eps={eps}");
                let m = ModelParams::new_near_threshold(
                    eps,
                    -1.0,
                    1.0,
                    flux.clone(),
                    PotentialSpec::new(2.0)?,
                )?;
                verify_model(&mut v, &label, &m)?;
            }
        }

        let m = ModelParams::new(0.01, -1.0, 1.0, FluxSpec::rational(), PotentialSpec::new(2.0)?)?;
        let c = c0(&m)?;
        let exact = 2.0 * 2.0f64.sqrt() / 3.0;
        v.check(
            "quadratic-well limit constant",
            (c - exact).abs() <= 1e-8,
            format!("c0 = {c:.12} vs 2*sqrt(2)/3 = {exact:.12}"),
        );

        let smoke = ExperimentPreset {
            name: "verify-smoke".into(),
            flux: FluxSpec::rational(),
            theta: 2.0,
            eps: 0.1,
            a: -2.0,
            b: 2.0,
            n: 256,
            datum: DatumSpec::TransitionLayers { zeros: vec![-0.25, 0.25] },
            horizon: 10.0,
            schedule: CheckpointSchedule::Linear { spacing: 1.0 },
            scheme: Scheme::Implicit,
            near_threshold: false,
        };
        verify_dissipation(&mut v, "smoke-run", &smoke)?;
    }

    if v.misses == 0 {
        println!("all checks passed");
        Ok(ExitCode::SUCCESS)
    } else {
        println!("{} check(s) missed their band", v.misses);
        Ok(ExitCode::from(4))
    }
}

// ---------------------------------------------------------------------------
// constants
// ---------------------------------------------------------------------------

fn cmd_constants(p: &ExperimentPreset) -> Result<()> {
    let m = p.model()?;
    let c = harness::derived_constants(&m)?;
    print!("{}", serialize_config(p));
    println!("constants.kappa = {}", c.kappa);
    println!("constants.ell = {}", c.ell);
    println!("constants.q_max_slope = {}", c.q_max_slope);
    println!("constants.eps0 = {}", c.eps0);
    println!("constants.c_eps = {}", c.c_eps);
    println!("constants.c0 = {}", c.c0);
    if p.theta > 2.0 {
        let lad = harness::k_sequence(p.theta, 5)?;
        println!("ladder.alpha = {}", lad.alpha);
        println!("ladder.beta = {}", lad.beta);
        let sums: Vec<String> = lad.partial_sums.iter().map(|k| k.to_string()).collect();
        println!("ladder.k = {}", sums.join(";"));
    }
    Ok(())
}
