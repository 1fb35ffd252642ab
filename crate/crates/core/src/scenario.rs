//! Room geometry, device placement and RF parameters.
//!
//! A [`Scenario`] is plain configuration data in `f64`; channel synthesis
//! converts into the working scalar type downstream.

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{Error, Result};

pub type Point3 = [f64; 3];
pub type Point2 = [f64; 2];

pub const DEFAULT_CARRIER_HZ: f64 = 920e6;
pub const DEFAULT_POWER_DBM: f64 = 11.0;
pub const DEFAULT_SYMBOL_POWER: f64 = 0.8;
pub const DEFAULT_REFLECTION_EFFICIENCY: f64 = 0.5;

pub const ROOM_WIDTH_M: f64 = 4.0;
pub const ROOM_LENGTH_M: f64 = 8.0;
pub const CEILING_HEIGHT_M: f64 = 2.4;
const CEILING_COLUMNS: usize = 6;
const CEILING_ROWS: usize = 7;

pub const DEFAULT_READER: Point3 = [2.86, 1.226, 1.0];
pub const DEFAULT_BD: Point3 = [3.4, 1.8, 1.0];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    #[serde(rename = "emitters")]
    pub emitter_positions: Vec<Point3>,
    #[serde(rename = "bd")]
    pub bd_position: Point3,
    #[serde(rename = "readers")]
    pub reader_positions: Vec<Point3>,
    #[serde(rename = "fc_hz")]
    pub carrier_frequency_hz: f64,
    #[serde(rename = "p_dbm")]
    pub per_emitter_power_dbm: f64,
    #[serde(rename = "s2")]
    pub symbol_power: f64,
    #[serde(rename = "eta")]
    pub reflection_efficiency: f64,
}

impl Default for Scenario {
    fn default() -> Self {
        default_techtile_scenario()
    }
}

/// Emitter positions of the 6×7 ceiling grid, one emitter at the centre of
/// each tile, indexed row-major along the room length.
pub fn ceiling_grid() -> Vec<Point3> {
    let dx = ROOM_WIDTH_M / CEILING_COLUMNS as f64;
    let dy = ROOM_LENGTH_M / CEILING_ROWS as f64;
    (0..CEILING_ROWS)
        .flat_map(|j| {
            (0..CEILING_COLUMNS).map(move |i| {
                [
                    (i as f64 + 0.5) * dx,
                    (j as f64 + 0.5) * dy,
                    CEILING_HEIGHT_M,
                ]
            })
        })
        .collect()
}

/// The 42-tile ceiling array with one reader, matching the measured room.
pub fn default_techtile_scenario() -> Scenario {
    Scenario {
        emitter_positions: ceiling_grid(),
        bd_position: DEFAULT_BD,
        reader_positions: vec![DEFAULT_READER],
        carrier_frequency_hz: DEFAULT_CARRIER_HZ,
        per_emitter_power_dbm: DEFAULT_POWER_DBM,
        symbol_power: DEFAULT_SYMBOL_POWER,
        reflection_efficiency: DEFAULT_REFLECTION_EFFICIENCY,
    }
}

impl Scenario {
    pub fn num_emitters(&self) -> usize {
        self.emitter_positions.len()
    }

    pub fn num_readers(&self) -> usize {
        self.reader_positions.len()
    }

    pub fn wavelength(&self) -> f64 {
        crate::channel::SPEED_OF_LIGHT / self.carrier_frequency_hz
    }

    /// Per-emitter transmit power in milliwatts.
    pub fn p_max_mw(&self) -> f64 {
        10f64.powf(self.per_emitter_power_dbm / 10.0)
    }

    pub fn validate(&self) -> Result<()> {
        if self.emitter_positions.is_empty() {
            return Err(Error::InvalidScenario("at least one emitter is required".into()));
        }
        if self.reader_positions.is_empty() {
            return Err(Error::InvalidScenario("at least one reader is required".into()));
        }
        if !(self.carrier_frequency_hz.is_finite() && self.carrier_frequency_hz > 0.0) {
            return Err(Error::InvalidScenario(format!(
                "carrier frequency must be positive, got {}",
                self.carrier_frequency_hz
            )));
        }
        if !(self.symbol_power.is_finite() && self.symbol_power > 0.0) {
            return Err(Error::InvalidScenario(format!(
                "symbol power must be positive, got {}",
                self.symbol_power
            )));
        }
        if !self.per_emitter_power_dbm.is_finite() {
            return Err(Error::InvalidScenario("emitter power must be finite".into()));
        }
        let eta = self.reflection_efficiency;
        if !(eta > 0.0 && eta <= 1.0) {
            return Err(Error::InvalidScenario(format!(
                "reflection efficiency must lie in (0, 1], got {eta}"
            )));
        }

        let labelled: Vec<(String, Point3)> = self
            .emitter_positions
            .iter()
            .enumerate()
            .map(|(m, p)| (format!("emitter {m}"), *p))
            .chain(std::iter::once(("bd".to_string(), self.bd_position)))
            .chain(
                self.reader_positions
                    .iter()
                    .enumerate()
                    .map(|(n, p)| (format!("reader {n}"), *p)),
            )
            .collect();
        for (name, p) in &labelled {
            if p.iter().any(|c| !c.is_finite()) {
                return Err(Error::InvalidScenario(format!("{name} has a non-finite coordinate")));
            }
        }
        for (i, (a_name, a)) in labelled.iter().enumerate() {
            for (b_name, b) in &labelled[i + 1..] {
                if a == b {
                    return Err(Error::InvalidScenario(format!(
                        "{a_name} and {b_name} share position {a:?}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Keeps only the listed emitters, in the given order.
    pub fn with_emitters(&self, indices: &[usize]) -> Scenario {
        Scenario {
            emitter_positions: indices.iter().map(|&m| self.emitter_positions[m]).collect(),
            ..self.clone()
        }
    }

    /// Serializes to the JSON scenario schema.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }
}

fn field_err(field: &str, message: impl Into<String>) -> Error {
    Error::ScenarioParse {
        field: field.to_string(),
        message: message.into(),
    }
}

fn parse_f64(field: &str, v: &Value) -> Result<f64> {
    v.as_f64()
        .ok_or_else(|| field_err(field, format!("expected a number, got {v}")))
}

fn parse_point(field: &str, v: &Value) -> Result<Point3> {
    let arr = v
        .as_array()
        .ok_or_else(|| field_err(field, format!("expected [x, y, z], got {v}")))?;
    if arr.len() != 3 {
        return Err(field_err(field, format!("expected 3 coordinates, got {}", arr.len())));
    }
    let mut p = [0.0; 3];
    for (slot, c) in p.iter_mut().zip(arr) {
        *slot = parse_f64(field, c)?;
    }
    Ok(p)
}

fn parse_points(field: &str, v: &Value) -> Result<Vec<Point3>> {
    let arr = v
        .as_array()
        .ok_or_else(|| field_err(field, format!("expected an array of points, got {v}")))?;
    arr.iter()
        .enumerate()
        .map(|(i, p)| parse_point(&format!("{field}[{i}]"), p))
        .collect()
}

/// Parses a JSON scenario document. Missing keys fall back to
/// [`default_techtile_scenario`]; an empty document (or `{}`) yields it
/// unchanged.
pub fn load_scenario(config_text: &str) -> Result<Scenario> {
    let mut s = default_techtile_scenario();
    if config_text.trim().is_empty() {
        return Ok(s);
    }
    let doc: Value = serde_json::from_str(config_text)
        .map_err(|e| field_err("<document>", e.to_string()))?;
    let map: &Map<String, Value> = doc
        .as_object()
        .ok_or_else(|| field_err("<document>", "top level must be an object"))?;

    for (key, v) in map {
        match key.as_str() {
            "emitters" => s.emitter_positions = parse_points(key, v)?,
            "bd" => s.bd_position = parse_point(key, v)?,
            "readers" => s.reader_positions = parse_points(key, v)?,
            "fc_hz" => s.carrier_frequency_hz = parse_f64(key, v)?,
            "p_dbm" => s.per_emitter_power_dbm = parse_f64(key, v)?,
            "s2" => s.symbol_power = parse_f64(key, v)?,
            "eta" => s.reflection_efficiency = parse_f64(key, v)?,
            other => return Err(field_err(other, "unknown key")),
        }
    }
    s.validate()?;
    Ok(s)
}

/// Rectangular scan plane sampled on a square lattice.
///
/// Samples sit at `origin + (i, j) * step` and include both edges, so a
/// 1.25 m side at 0.025 m step has 51 samples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub origin: Point2,
    pub width: f64,
    pub height: f64,
    pub step: f64,
    pub plane_height: f64,
}

pub const DEFAULT_GRID_EXTENT_M: f64 = 1.25;
pub const DEFAULT_GRID_STEP_M: f64 = 0.025;

impl GridSpec {
    pub fn new(origin: Point2, width: f64, height: f64, step: f64, plane_height: f64) -> Result<Self> {
        let g = GridSpec {
            origin,
            width,
            height,
            step,
            plane_height,
        };
        g.validate()?;
        Ok(g)
    }

    /// Grid of the given extent whose centre sample falls on `center`.
    pub fn centered(center: Point3, width: f64, height: f64, step: f64) -> Result<Self> {
        let g = GridSpec {
            origin: [0.0, 0.0],
            width,
            height,
            step,
            plane_height: center[2],
        };
        g.validate()?;
        let (nx, ny) = g.shape();
        let ox = center[0] - ((nx - 1) / 2) as f64 * step;
        let oy = center[1] - ((ny - 1) / 2) as f64 * step;
        Ok(GridSpec {
            origin: [ox, oy],
            ..g
        })
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.step.is_finite() && self.step > 0.0) {
            return Err(Error::InvalidGrid(format!("step must be positive, got {}", self.step)));
        }
        if !(self.width.is_finite() && self.width > 0.0 && self.height.is_finite() && self.height > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "extent must be positive, got {} x {}",
                self.width, self.height
            )));
        }
        if self.origin.iter().any(|c| !c.is_finite()) || !self.plane_height.is_finite() {
            return Err(Error::InvalidGrid("origin and plane height must be finite".into()));
        }
        Ok(())
    }

    fn samples(extent: f64, step: f64) -> usize {
        // Tolerate representation error in ratios like 1.25 / 0.025.
        (extent / step + 1e-9).floor() as usize + 1
    }

    /// `(nx, ny)` sample counts along x and y.
    pub fn shape(&self) -> (usize, usize) {
        (
            Self::samples(self.width, self.step),
            Self::samples(self.height, self.step),
        )
    }

    pub fn len(&self) -> usize {
        let (nx, ny) = self.shape();
        nx * ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Sample point for column `i`, row `j`.
    pub fn point(&self, i: usize, j: usize) -> Point3 {
        [
            self.origin[0] + i as f64 * self.step,
            self.origin[1] + j as f64 * self.step,
            self.plane_height,
        ]
    }

    /// Row-major sample points: y outer, x inner.
    pub fn points(&self) -> Vec<Point3> {
        let (nx, ny) = self.shape();
        (0..ny)
            .flat_map(|j| (0..nx).map(move |i| self.point(i, j)))
            .collect()
    }

    /// `(i, j)` of the sample cell containing `p`, if it lies on the grid.
    pub fn cell_of(&self, p: Point2) -> Option<(usize, usize)> {
        let (nx, ny) = self.shape();
        let fi = ((p[0] - self.origin[0]) / self.step).round();
        let fj = ((p[1] - self.origin[1]) / self.step).round();
        if fi < 0.0 || fj < 0.0 || fi as usize >= nx || fj as usize >= ny {
            return None;
        }
        Some((fi as usize, fj as usize))
    }
}
