//! CSV and image encodings of channels, weights, heatmaps and sweeps.
//!
//! Floats are written with Rust's shortest round-trip formatting, so equal
//! values always produce equal bytes.

use std::fmt::Write as _;

use crate::beamform::BeamWeights;
use crate::channel::ChannelSet;
use crate::error::{Error, Result};
use crate::experiments::{Heatmap, HeatmapUnit, PhaseNoiseRow, SweepResult};
use crate::scalar::Real;
use crate::scenario::GridSpec;

pub const CHANNEL_HEADER: &str = "link_type,reader_index,emitter_index,re,im";
pub const WEIGHTS_HEADER: &str = "emitter_index,re,im,modulus,phase_rad";
pub const HEATMAP_HEADER: &str = "x_m,y_m,power";
pub const SWEEP_HEADER: &str = "K,order,beamformer,p_bd_dbm,p_r_dbm,delta_db";
pub const PHASE_NOISE_HEADER: &str = "std_deg,std_rad,trials,mean_suppression_db,p10_suppression_db,p90_suppression_db";

/// Rows `c` (emitter→BD), `dl` (emitter→reader) and `r` (BD→reader; emitter
/// index left empty). `c` rows have an empty reader index.
pub fn channel_csv<T: Real>(ch: &ChannelSet<T>) -> String {
    let mut out = String::new();
    writeln!(out, "{CHANNEL_HEADER}").unwrap();
    for (m, z) in ch.h_c.iter().enumerate() {
        writeln!(out, "c,,{m},{},{}", z.re.as_f64(), z.im.as_f64()).unwrap();
    }
    for n in 0..ch.h_dl.nrows() {
        for m in 0..ch.h_dl.ncols() {
            let z = ch.h_dl[(n, m)];
            writeln!(out, "dl,{n},{m},{},{}", z.re.as_f64(), z.im.as_f64()).unwrap();
        }
    }
    if let Some(h_r) = &ch.h_r {
        for (n, z) in h_r.iter().enumerate() {
            writeln!(out, "r,{n},,{},{}", z.re.as_f64(), z.im.as_f64()).unwrap();
        }
    }
    out
}

pub fn weights_csv<T: Real>(w: &BeamWeights<T>) -> String {
    let mut out = String::new();
    writeln!(out, "{WEIGHTS_HEADER}").unwrap();
    for (m, z) in w.x.iter().enumerate() {
        writeln!(
            out,
            "{m},{},{},{},{}",
            z.re.as_f64(),
            z.im.as_f64(),
            z.norm().as_f64(),
            z.arg().as_f64()
        )
        .unwrap();
    }
    out
}

/// One line per cell, row-major; HEADER `x_m,y_m,power`.
pub fn heatmap_csv(h: &Heatmap) -> String {
    let mut out = String::new();
    writeln!(out, "{HEATMAP_HEADER}").unwrap();
    let (nx, ny) = h.shape();
    for j in 0..ny {
        for i in 0..nx {
            let p = h.grid.point(i, j);
            writeln!(out, "{},{},{}", p[0], p[1], h.value(i, j)).unwrap();
        }
    }
    out
}

/// Parses a heatmap CSV written by [`heatmap_csv`] back onto `grid`.
pub fn parse_heatmap_csv(text: &str, grid: &GridSpec, unit: HeatmapUnit, label: &str) -> Result<Heatmap> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim() == HEATMAP_HEADER => {}
        _ => return Err(Error::InvalidArgument(format!("heatmap CSV must start with `{HEATMAP_HEADER}`"))),
    }
    let mut values = Vec::with_capacity(grid.len());
    for (k, line) in lines.filter(|l| !l.trim().is_empty()).enumerate() {
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 3 {
            return Err(Error::InvalidArgument(format!("heatmap CSV line {}: expected 3 columns", k + 2)));
        }
        let parse = |s: &str| {
            s.trim()
                .parse::<f64>()
                .map_err(|e| Error::InvalidArgument(format!("heatmap CSV line {}: {e}", k + 2)))
        };
        let (x, y, v) = (parse(cols[0])?, parse(cols[1])?, parse(cols[2])?);
        let (nx, _) = grid.shape();
        let expect = grid.point(k % nx, k / nx);
        if k >= grid.len() || (x - expect[0]).abs() > 1e-9 || (y - expect[1]).abs() > 1e-9 {
            return Err(Error::GridMismatch);
        }
        values.push(v);
    }
    if values.len() != grid.len() {
        return Err(Error::GridMismatch);
    }
    Ok(Heatmap {
        grid: *grid,
        values,
        unit,
        beamformer_label: label.to_string(),
        reader_marker: [f64::NAN, f64::NAN],
    })
}

/// Binary 16-bit portable graymap, min-max normalized, top row = largest y.
pub fn heatmap_pgm(h: &Heatmap) -> Vec<u8> {
    let (nx, ny) = h.shape();
    let lo = h.values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = h.values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = hi - lo;
    let mut out = format!("P5\n{nx} {ny}\n65535\n").into_bytes();
    out.reserve(nx * ny * 2);
    for j in (0..ny).rev() {
        for i in 0..nx {
            let v = h.value(i, j);
            let level = if span > 0.0 && span.is_finite() {
                (((v - lo) / span) * 65535.0).round().clamp(0.0, 65535.0) as u16
            } else {
                0
            };
            out.extend_from_slice(&level.to_be_bytes());
        }
    }
    out
}

fn fmt_or_empty(v: f64) -> String {
    if v.is_nan() {
        String::new()
    } else {
        v.to_string()
    }
}

/// Rows for one beamformer; failed K values have empty metric fields.
pub fn sweep_csv(result: &SweepResult, kind: crate::experiments::BeamformerKind) -> String {
    let mut out = String::new();
    writeln!(out, "{SWEEP_HEADER}").unwrap();
    for r in result.records_for(kind) {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            r.k,
            result.selection_order.as_str(),
            kind.as_str(),
            fmt_or_empty(r.p_bd_dbm),
            fmt_or_empty(r.p_r_dbm),
            fmt_or_empty(r.delta_db)
        )
        .unwrap();
    }
    out
}

pub fn phase_noise_csv(rows: &[PhaseNoiseRow]) -> String {
    let mut out = String::new();
    writeln!(out, "{PHASE_NOISE_HEADER}").unwrap();
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            r.std_rad.to_degrees(),
            r.std_rad,
            r.trials,
            r.mean_suppression_db,
            r.p10_suppression_db,
            r.p90_suppression_db
        )
        .unwrap();
    }
    out
}
