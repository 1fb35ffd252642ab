//! Simulated experiment pipelines: spatial heatmaps under fixed weights,
//! differential maps, emitter-count sweeps and phase-noise Monte Carlo.
//!
//! Grid cells and trials are evaluated in parallel; outputs are always
//! assembled in cell / trial order.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::beamform::{azf_phase_only, azf_solve, po_mrt, BeamWeights, SolveReport, SolverOptions};
use crate::channel::{apply_csi_error, apply_phase_noise, direct_row, los_channel, ChannelSet, ImpairmentSpec};
use crate::error::{Error, Result};
use crate::metrics::{evaluate, ratio_db};
use crate::rng::sub_seed;
use crate::scalar::{dot_t, Real};
use crate::scenario::{GridSpec, Point2, Scenario};

// Seed streams derived from `ImpairmentSpec::rng_seed`.
const STREAM_CSI: u64 = 1;
const STREAM_PHASE: u64 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BeamformerKind {
    /// Phase-only maximum ratio transmission.
    PoMrt,
    /// Null-constrained optimum projected to unit modulus.
    Azf,
    /// Null-constrained optimum with amplitudes kept.
    AzfAmplitude,
}

impl BeamformerKind {
    pub fn as_str(self) -> &'static str {
        match self {
            BeamformerKind::PoMrt => "po-mrt",
            BeamformerKind::Azf => "azf",
            BeamformerKind::AzfAmplitude => "azf-amplitude",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "po-mrt" | "po_mrt" => Ok(BeamformerKind::PoMrt),
            "azf" => Ok(BeamformerKind::Azf),
            "azf-amplitude" | "azf_amplitude" => Ok(BeamformerKind::AzfAmplitude),
            other => Err(Error::InvalidArgument(format!("unknown beamformer `{other}`"))),
        }
    }
}

/// Weights of the requested kind from (estimated) channels, with the solver
/// report for the AZF variants.
pub fn compute_weights<T: Real>(
    kind: BeamformerKind,
    channels: &ChannelSet<T>,
    opts: &SolverOptions<T>,
) -> Result<(BeamWeights<T>, Option<SolveReport>)> {
    match kind {
        BeamformerKind::PoMrt => Ok((po_mrt(&channels.h_c)?, None)),
        BeamformerKind::AzfAmplitude => {
            let (x, rep) = azf_solve(&channels.h_c, &channels.h_dl, opts)?;
            Ok((x, Some(rep)))
        }
        BeamformerKind::Azf => {
            let (x, rep) = azf_solve(&channels.h_c, &channels.h_dl, opts)?;
            Ok((azf_phase_only(&x)?, Some(rep)))
        }
    }
}

fn csi_spec(imp: &ImpairmentSpec) -> ImpairmentSpec {
    ImpairmentSpec {
        rng_seed: sub_seed(imp.rng_seed, STREAM_CSI),
        ..*imp
    }
}

fn phase_spec(imp: &ImpairmentSpec, salt: u64) -> ImpairmentSpec {
    ImpairmentSpec {
        rng_seed: sub_seed(sub_seed(imp.rng_seed, STREAM_PHASE), salt),
        ..*imp
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HeatmapUnit {
    Microwatt,
    Db,
}

/// Scalar field over a [`GridSpec`], row-major (y outer, x inner).
#[derive(Debug, Clone, PartialEq)]
pub struct Heatmap {
    pub grid: GridSpec,
    pub values: Vec<f64>,
    pub unit: HeatmapUnit,
    pub beamformer_label: String,
    pub reader_marker: Point2,
}

impl Heatmap {
    pub fn shape(&self) -> (usize, usize) {
        self.grid.shape()
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        let (nx, _) = self.shape();
        self.values[j * nx + i]
    }

    /// `(i, j)` of the smallest value; first in row-major order on ties.
    pub fn argmin(&self) -> (usize, usize) {
        let (nx, _) = self.shape();
        let k = self
            .values
            .iter()
            .enumerate()
            .fold((0, f64::INFINITY), |best, (k, &v)| if v < best.1 { (k, v) } else { best })
            .0;
        (k % nx, k / nx)
    }

    pub fn argmax(&self) -> (usize, usize) {
        let (nx, _) = self.shape();
        let k = self
            .values
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (k, &v)| if v > best.1 { (k, v) } else { best })
            .0;
        (k % nx, k / nx)
    }
}

/// Received direct-link power (µW) over the scan plane for weights computed
/// once at the scenario's reader and held fixed.
pub fn run_heatmap<T: Real>(
    scenario: &Scenario,
    kind: BeamformerKind,
    grid: &GridSpec,
    impairments: &ImpairmentSpec,
    opts: &SolverOptions<T>,
) -> Result<Heatmap> {
    grid.validate()?;
    impairments.validate()?;
    let truth = los_channel::<T>(scenario)?;
    let estimate = apply_csi_error(&truth, &csi_spec(impairments));
    let (weights, _) = compute_weights(kind, &estimate, opts)?;
    let applied = apply_phase_noise(&weights, &phase_spec(impairments, 0));
    heatmap_for_weights(scenario, &applied, grid, kind.as_str())
}

/// Heatmap of arbitrary weights.
pub fn heatmap_for_weights<T: Real>(
    scenario: &Scenario,
    weights: &BeamWeights<T>,
    grid: &GridSpec,
    label: &str,
) -> Result<Heatmap> {
    if weights.len() != scenario.num_emitters() {
        return Err(Error::Dimension("weights do not match the emitter count".into()));
    }
    let tx_uw = scenario.p_max_mw() * scenario.symbol_power * 1e3;
    let values = grid
        .points()
        .par_iter()
        .map(|&p| {
            let row = direct_row::<T>(scenario, p)?;
            Ok(tx_uw * dot_t(&row, &weights.x).norm_sqr().as_f64())
        })
        .collect::<Result<Vec<f64>>>()?;
    let reader = scenario.reader_positions[0];
    Ok(Heatmap {
        grid: *grid,
        values,
        unit: HeatmapUnit::Microwatt,
        beamformer_label: label.to_string(),
        reader_marker: [reader[0], reader[1]],
    })
}

/// Cellwise `10·log10(a / b)` with the ±300 dB cap.
pub fn differential_map(a: &Heatmap, b: &Heatmap) -> Result<Heatmap> {
    if a.grid != b.grid || a.values.len() != b.values.len() {
        return Err(Error::GridMismatch);
    }
    if a.unit != HeatmapUnit::Microwatt || b.unit != HeatmapUnit::Microwatt {
        return Err(Error::InvalidArgument("differential maps need linear power inputs".into()));
    }
    let values = a
        .values
        .iter()
        .zip(&b.values)
        .map(|(&x, &y)| ratio_db(x, y))
        .collect();
    Ok(Heatmap {
        grid: a.grid,
        values,
        unit: HeatmapUnit::Db,
        beamformer_label: format!("{}/{}", a.beamformer_label, b.beamformer_label),
        reader_marker: a.reader_marker,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionOrder {
    StrongestFirst,
    WeakestFirst,
}

impl SelectionOrder {
    pub fn as_str(self) -> &'static str {
        match self {
            SelectionOrder::StrongestFirst => "strongest",
            SelectionOrder::WeakestFirst => "weakest",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "strongest" | "strongest_first" | "high" => Ok(SelectionOrder::StrongestFirst),
            "weakest" | "weakest_first" | "low" => Ok(SelectionOrder::WeakestFirst),
            other => Err(Error::InvalidArgument(format!("unknown order `{other}`"))),
        }
    }
}

/// Emitter indices ranked by `|h_c,m|²` under `order`; ties keep index order.
pub fn emitter_ranking<T: Real>(h_c: &crate::scalar::CVector<T>, order: SelectionOrder) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..h_c.len()).collect();
    let power = |m: usize| h_c[m].norm_sqr().as_f64();
    match order {
        SelectionOrder::StrongestFirst => idx.sort_by(|&a, &b| power(b).total_cmp(&power(a))),
        SelectionOrder::WeakestFirst => idx.sort_by(|&a, &b| power(a).total_cmp(&power(b))),
    }
    idx
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub k: usize,
    pub beamformer: BeamformerKind,
    pub p_bd_dbm: f64,
    pub p_r_dbm: f64,
    pub delta_db: f64,
    /// `|h_cᵀx|` on the estimated sub-channel the weights were designed for.
    pub objective: f64,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub k_values: Vec<usize>,
    pub selection_order: SelectionOrder,
    /// Ordered by K, then by the requested beamformer order.
    pub records: Vec<SweepRecord>,
}

impl SweepResult {
    pub fn records_for(&self, kind: BeamformerKind) -> impl Iterator<Item = &SweepRecord> {
        self.records.iter().filter(move |r| r.beamformer == kind)
    }
}

/// Designs weights on the first K ranked emitters (others silent) and
/// evaluates them against the true channel. Per-K failures are recorded and
/// the sweep continues.
pub fn run_k_sweep<T: Real>(
    scenario: &Scenario,
    k_values: &[usize],
    order: SelectionOrder,
    beamformers: &[BeamformerKind],
    impairments: &ImpairmentSpec,
    opts: &SolverOptions<T>,
) -> Result<SweepResult> {
    impairments.validate()?;
    let m = scenario.num_emitters();
    if k_values.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument("K values must be strictly increasing".into()));
    }
    if let Some(&k) = k_values.iter().find(|&&k| k == 0 || k > m) {
        return Err(Error::InvalidArgument(format!("K = {k} outside [1, {m}]")));
    }
    let truth = los_channel::<T>(scenario)?;
    let estimate = apply_csi_error(&truth, &csi_spec(impairments));
    let ranking = emitter_ranking(&estimate.h_c, order);

    let mut records = Vec::with_capacity(k_values.len() * beamformers.len());
    for &k in k_values {
        let mut selected = ranking[..k].to_vec();
        selected.sort_unstable();
        let sub = estimate.select_emitters(&selected);
        for (b, &kind) in beamformers.iter().enumerate() {
            let rec = match compute_weights(kind, &sub, opts) {
                Ok((w, _)) => {
                    let objective = dot_t(&sub.h_c, &w.x).norm().as_f64();
                    let full = w.embed(&selected, m);
                    let salt = (k as u64) << 8 | b as u64;
                    let applied = apply_phase_noise(&full, &phase_spec(impairments, salt));
                    let rep = evaluate(scenario, &truth, &applied, None)?;
                    SweepRecord {
                        k,
                        beamformer: kind,
                        p_bd_dbm: rep.p_bd_dbm,
                        p_r_dbm: rep.p_r_total_dbm,
                        delta_db: rep.delta_db,
                        objective,
                        error: None,
                    }
                }
                Err(e) => SweepRecord {
                    k,
                    beamformer: kind,
                    p_bd_dbm: f64::NAN,
                    p_r_dbm: f64::NAN,
                    delta_db: f64::NAN,
                    objective: f64::NAN,
                    error: Some(e.to_string()),
                },
            };
            records.push(rec);
        }
    }
    Ok(SweepResult {
        k_values: k_values.to_vec(),
        selection_order: order,
        records,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseNoiseRow {
    pub std_rad: f64,
    pub trials: usize,
    pub mean_suppression_db: f64,
    pub p10_suppression_db: f64,
    pub p90_suppression_db: f64,
}

/// Linear-interpolated percentile of sorted data, `q` in [0, 1].
pub fn percentile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// Reader-side suppression of phase-only AZF relative to PO-MRT when both
/// weight sets suffer independent per-antenna phase errors. Trial `t` draws
/// the same standard-normal errors for every std value.
pub fn run_phase_noise_sweep<T: Real>(
    scenario: &Scenario,
    stds_rad: &[f64],
    trials: usize,
    seed: u64,
    opts: &SolverOptions<T>,
) -> Result<Vec<PhaseNoiseRow>> {
    Ok(phase_noise_trials(scenario, stds_rad, trials, seed, opts)?
        .into_iter()
        .map(|(std, mut s)| {
            let mean = s.iter().sum::<f64>() / s.len() as f64;
            s.sort_by(f64::total_cmp);
            PhaseNoiseRow {
                std_rad: std,
                trials,
                mean_suppression_db: mean,
                p10_suppression_db: percentile(&s, 0.1),
                p90_suppression_db: percentile(&s, 0.9),
            }
        })
        .collect())
}

/// Per-trial suppression values behind [`run_phase_noise_sweep`].
pub fn phase_noise_trials<T: Real>(
    scenario: &Scenario,
    stds_rad: &[f64],
    trials: usize,
    seed: u64,
    opts: &SolverOptions<T>,
) -> Result<Vec<(f64, Vec<f64>)>> {
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be >= 1".into()));
    }
    if let Some(s) = stds_rad.iter().find(|s| !(**s >= 0.0 && s.is_finite())) {
        return Err(Error::InvalidArgument(format!("phase noise std {s} must be >= 0")));
    }
    let truth = los_channel::<T>(scenario)?;
    let (mrt, _) = compute_weights(BeamformerKind::PoMrt, &truth, opts)?;
    let (azf, _) = compute_weights(BeamformerKind::Azf, &truth, opts)?;

    stds_rad
        .iter()
        .map(|&std| {
            let values = (0..trials)
                .into_par_iter()
                .map(|t| {
                    let trial_seed = sub_seed(seed, t as u64);
                    let spec = |stream| ImpairmentSpec {
                        csi_error_rel_std: 0.0,
                        phase_noise_std_rad: std,
                        rng_seed: sub_seed(trial_seed, stream),
                    };
                    let base = evaluate(scenario, &truth, &apply_phase_noise(&mrt, &spec(0)), None)?;
                    let null = evaluate(scenario, &truth, &apply_phase_noise(&azf, &spec(1)), None)?;
                    Ok(base.p_r_total_dbm - null.p_r_total_dbm)
                })
                .collect::<Result<Vec<f64>>>()?;
            Ok((std, values))
        })
        .collect()
}
