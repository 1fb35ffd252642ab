use std::path::Path;

use anyhow::{anyhow, Context};
use serde::Serialize;

use nullsteer::beamform::{SolveReport, WeightLabel};
use nullsteer::experiments::{
    compute_weights, differential_map, heatmap_for_weights, run_k_sweep, run_phase_noise_sweep, BeamformerKind,
    HeatmapUnit, SelectionOrder,
};
use nullsteer::{
    apply_csi_error, apply_phase_noise, evaluate, io, load_scenario, los_channel, po_mrt, GridSpec, ImpairmentSpec,
    MetricsReport, Scenario, SolverOptions64,
};

use crate::manifest::{scenario_digest, ManifestBuilder};
use crate::{Cli, Command, Common};

pub const EXIT_OK: u8 = 0;
pub const EXIT_CONFIG: u8 = 1;
pub const EXIT_NUMERICAL: u8 = 2;

pub enum Failure {
    Config(anyhow::Error),
    Numerical(String),
}

impl<E: Into<anyhow::Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Config(e.into())
    }
}

type Outcome = Result<Option<String>, Failure>;

pub fn run(cli: Cli) -> u8 {
    let common = match &cli.command {
        Command::Solve { common, .. }
        | Command::Heatmap { common, .. }
        | Command::Sweep { common, .. }
        | Command::PhaseNoise { common, .. } => common.clone(),
    };
    let mut manifest = ManifestBuilder::new(&common.out, common.seed);

    let result = build_pool(common.threads).and_then(|pool| {
        pool.install(|| match &cli.command {
            Command::Solve {
                beamformer,
                phase_noise_deg,
                ..
            } => cmd_solve(&common, beamformer, *phase_noise_deg, &mut manifest),
            Command::Heatmap {
                beamformer,
                step,
                extent,
                origin,
                phase_noise_deg,
                diff,
                ..
            } => cmd_heatmap(
                &common,
                beamformer,
                *step,
                extent.as_deref(),
                origin.as_deref(),
                *phase_noise_deg,
                diff.as_deref(),
                &mut manifest,
            ),
            Command::Sweep {
                k,
                order,
                beamformer,
                phase_noise_deg,
                ..
            } => cmd_sweep(&common, k, order.as_deref(), beamformer, *phase_noise_deg, &mut manifest),
            Command::PhaseNoise {
                phase_noise_deg,
                trials,
                ..
            } => cmd_phase_noise(&common, phase_noise_deg, *trials, &mut manifest),
        })
    });

    let (code, status, message) = match result {
        Ok(note) => (EXIT_OK, "ok", note),
        Err(Failure::Config(e)) => {
            eprintln!("error: {e:#}");
            (EXIT_CONFIG, "config_error", Some(format!("{e:#}")))
        }
        Err(Failure::Numerical(msg)) => {
            eprintln!("numerical failure: {msg}");
            (EXIT_NUMERICAL, "numerical_failure", Some(msg))
        }
    };
    if let Err(e) = manifest.finish(status, message) {
        eprintln!("error: could not write manifest: {e}");
        return code.max(EXIT_CONFIG);
    }
    code
}

fn build_pool(threads: usize) -> Result<rayon::ThreadPool, Failure> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Failure::Config(anyhow!("thread pool: {e}")))
}

/// Scenario from file (or built-in default) with flag overrides applied.
pub fn resolve_scenario(common: &Common) -> anyhow::Result<Scenario> {
    let mut s = match &common.scenario {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("cannot read scenario file {}", path.display()))?;
            load_scenario(&text).with_context(|| format!("in scenario file {}", path.display()))?
        }
        None => nullsteer::default_techtile_scenario(),
    };
    if let Some(bd) = &common.bd {
        s.bd_position = [bd[0], bd[1], bd[2]];
    }
    if let Some(fc) = common.fc_hz {
        s.carrier_frequency_hz = fc;
    }
    if let Some(p) = common.p_dbm {
        s.per_emitter_power_dbm = p;
    }
    s.validate()?;
    Ok(s)
}

fn impairments(common: &Common, phase_noise_deg: f64) -> anyhow::Result<ImpairmentSpec> {
    let spec = ImpairmentSpec {
        csi_error_rel_std: common.csi_error,
        phase_noise_std_rad: phase_noise_deg.to_radians(),
        rng_seed: common.seed,
    };
    spec.validate()?;
    Ok(spec)
}

fn setup(common: &Common, manifest: &mut ManifestBuilder) -> anyhow::Result<Scenario> {
    let s = resolve_scenario(common)?;
    manifest.digest = Some(scenario_digest(&s));
    std::fs::create_dir_all(&common.out)
        .with_context(|| format!("cannot create output directory {}", common.out.display()))?;
    Ok(s)
}

#[derive(Serialize)]
struct SolveDocument<'a> {
    beamformer: &'a str,
    label: WeightLabel,
    report: SolveReport,
    zeroed_entries: usize,
    low_modulus_warning: bool,
}

fn weights_report(
    scenario: &Scenario,
    kind: BeamformerKind,
    phase_noise_deg: f64,
    common: &Common,
) -> Result<(nullsteer::BeamWeights64, SolveReport, MetricsReport), Failure> {
    let imp = impairments(common, phase_noise_deg)?;
    let truth = los_channel::<f64>(scenario)?;
    let estimate = apply_csi_error(&truth, &ImpairmentSpec {
        rng_seed: nullsteer::rng::sub_seed(imp.rng_seed, 1),
        ..imp
    });
    let opts = SolverOptions64::default();
    let (weights, report) = compute_weights(kind, &estimate, &opts).map_err(numerical_or_config)?;
    let applied = apply_phase_noise(&weights, &ImpairmentSpec {
        rng_seed: nullsteer::rng::sub_seed(nullsteer::rng::sub_seed(imp.rng_seed, 2), 0),
        ..imp
    });
    let report = report.unwrap_or_else(|| plain_report(&estimate, &applied));

    let baseline = evaluate(scenario, &truth, &po_mrt(&truth.h_c)?, None)?;
    let metrics = evaluate(scenario, &truth, &applied, Some(baseline.p_r_total_dbm))?;
    Ok((applied, report, metrics))
}

/// Diagnostics for weights that did not come from the iterative solver.
fn plain_report(ch: &nullsteer::ChannelSet64, w: &nullsteer::BeamWeights64) -> SolveReport {
    let g = w.gain(&ch.h_c);
    SolveReport {
        objective: g.re,
        imag_residual: g.im.abs(),
        null_residual: nullsteer::beamform::null_residual(&ch.h_dl, &w.x),
        outer_iterations: 0,
        inner_projection_iterations_total: 0,
        modulus_min: nullsteer::scalar::min_modulus(&w.x),
        modulus_max: nullsteer::scalar::max_modulus(&w.x),
        converged: true,
        polish_objective_change: 0.0,
        degenerate_objective: false,
    }
}

fn numerical_or_config(e: nullsteer::Error) -> Failure {
    use nullsteer::Error as E;
    match e {
        E::TrivialNullspace | E::DegenerateSolution => Failure::Numerical(e.to_string()),
        other => Failure::Config(other.into()),
    }
}

fn parse_kind(s: &str) -> anyhow::Result<BeamformerKind> {
    Ok(BeamformerKind::parse(s)?)
}

fn cmd_solve(common: &Common, beamformer: &str, phase_noise_deg: f64, manifest: &mut ManifestBuilder) -> Outcome {
    let kind = parse_kind(beamformer)?;
    let scenario = setup(common, manifest)?;
    let (weights, report, metrics) = weights_report(&scenario, kind, phase_noise_deg, common)?;

    manifest.write("weights.csv", io::weights_csv(&weights))?;
    let doc = SolveDocument {
        beamformer: kind.as_str(),
        label: weights.label,
        report: report.clone(),
        zeroed_entries: weights.flags.zeroed_entries,
        low_modulus_warning: weights.flags.low_modulus_warning,
    };
    manifest.write("solve_report.json", serde_json::to_string_pretty(&doc)?)?;
    let metrics_csv = format!(
        "{}\n{}\n",
        MetricsReport::csv_header(scenario.num_readers()),
        metrics.csv_row()
    );
    manifest.write("metrics.csv", metrics_csv)?;
    manifest.write("channels.csv", io::channel_csv(&los_channel::<f64>(&scenario)?))?;

    println!(
        "{}: P_BD {:.2} dBm, P_R {:.2} dBm, delta {:.2} dB, null residual {:.3e}",
        kind.as_str(),
        metrics.p_bd_dbm,
        metrics.p_r_total_dbm,
        metrics.delta_db,
        report.null_residual
    );
    if !report.converged {
        return Err(Failure::Numerical(format!(
            "solver did not converge in {} iterations",
            report.outer_iterations
        )));
    }
    Ok(None)
}

#[allow(clippy::too_many_arguments)]
fn cmd_heatmap(
    common: &Common,
    beamformer: &str,
    step: f64,
    extent: Option<&[f64]>,
    origin: Option<&[f64]>,
    phase_noise_deg: f64,
    diff: Option<&Path>,
    manifest: &mut ManifestBuilder,
) -> Outcome {
    let kind = parse_kind(beamformer)?;
    let scenario = setup(common, manifest)?;
    let (w, h) = match extent {
        Some(e) => (e[0], e[1]),
        None => (
            nullsteer::scenario::DEFAULT_GRID_EXTENT_M,
            nullsteer::scenario::DEFAULT_GRID_EXTENT_M,
        ),
    };
    let reader = scenario.reader_positions[0];
    let grid = match origin {
        Some(o) => GridSpec::new([o[0], o[1]], w, h, step, reader[2])?,
        None => GridSpec::centered(reader, w, h, step)?,
    };

    let (weights, report, _) = weights_report(&scenario, kind, phase_noise_deg, common)?;
    let map = heatmap_for_weights(&scenario, &weights, &grid, kind.as_str())?;
    manifest.write("weights.csv", io::weights_csv(&weights))?;
    manifest.write("heatmap.csv", io::heatmap_csv(&map))?;
    manifest.write("heatmap.pgm", io::heatmap_pgm(&map))?;

    if let Some(path) = diff {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read heatmap {}", path.display()))?;
        let other = io::parse_heatmap_csv(&text, &grid, HeatmapUnit::Microwatt, "reference")
            .with_context(|| format!("heatmap {} does not match this grid", path.display()))?;
        let d = differential_map(&map, &other)?;
        manifest.write("diff.csv", io::heatmap_csv(&d))?;
        manifest.write("diff.pgm", io::heatmap_pgm(&d))?;
    }

    let (i, j) = map.argmin();
    let p = grid.point(i, j);
    println!(
        "{} heatmap {}x{}: minimum {:.3e} uW at ({:.4}, {:.4})",
        kind.as_str(),
        grid.shape().0,
        grid.shape().1,
        map.value(i, j),
        p[0],
        p[1]
    );
    if !report.converged {
        return Err(Failure::Numerical("solver did not converge".into()));
    }
    Ok(None)
}

fn cmd_sweep(
    common: &Common,
    k: &[usize],
    order: Option<&str>,
    beamformers: &[String],
    phase_noise_deg: f64,
    manifest: &mut ManifestBuilder,
) -> Outcome {
    let kinds = beamformers
        .iter()
        .map(|b| parse_kind(b))
        .collect::<anyhow::Result<Vec<_>>>()?;
    let orders = match order {
        Some(o) => vec![SelectionOrder::parse(o)?],
        None => vec![SelectionOrder::StrongestFirst, SelectionOrder::WeakestFirst],
    };
    let scenario = setup(common, manifest)?;
    let imp = impairments(common, phase_noise_deg)?;
    let opts = SolverOptions64::default();

    let mut notes = Vec::new();
    for order in orders {
        let result = run_k_sweep(&scenario, k, order, &kinds, &imp, &opts)?;
        for r in result.records.iter().filter(|r| r.error.is_some()) {
            let msg = format!(
                "{} {} K={}: {}",
                order.as_str(),
                r.beamformer.as_str(),
                r.k,
                r.error.as_deref().unwrap_or_default()
            );
            eprintln!("warning: {msg}");
            notes.push(msg);
        }
        for &kind in &kinds {
            let name = format!("sweep_{}_{}.csv", order.as_str(), kind.as_str());
            manifest.write(&name, io::sweep_csv(&result, kind))?;
        }
    }
    Ok((!notes.is_empty()).then(|| notes.join("; ")))
}

fn cmd_phase_noise(common: &Common, stds_deg: &[f64], trials: usize, manifest: &mut ManifestBuilder) -> Outcome {
    let scenario = setup(common, manifest)?;
    let stds: Vec<f64> = stds_deg.iter().map(|d| d.to_radians()).collect();
    let rows = run_phase_noise_sweep(&scenario, &stds, trials, common.seed, &SolverOptions64::default())?;
    manifest.write("phase_noise.csv", io::phase_noise_csv(&rows))?;
    for r in &rows {
        println!(
            "std {:.2} deg: mean suppression {:.2} dB (p10 {:.2}, p90 {:.2})",
            r.std_rad.to_degrees(),
            r.mean_suppression_db,
            r.p10_suppression_db,
            r.p90_suppression_db
        );
    }
    Ok(None)
}
