//! Line-of-sight and fading channel synthesis plus impairment models.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::beamform::BeamWeights;
use crate::error::{Error, Result};
use crate::rng::{complex_gaussian, gaussian, seeded};
use crate::scalar::{CMatrix, CVector, Cx, Real};
use crate::scenario::{Point3, Scenario};

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Complex baseband channels of one scenario realization.
///
/// `h_c[m]` is emitter `m` to BD, `h_dl[(n, m)]` emitter `m` to reader `n`,
/// `h_r[n]` BD to reader `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSet<T: Real> {
    pub h_c: CVector<T>,
    pub h_dl: CMatrix<T>,
    pub h_r: Option<CVector<T>>,
}

impl<T: Real> ChannelSet<T> {
    pub fn new(h_c: CVector<T>, h_dl: CMatrix<T>, h_r: Option<CVector<T>>) -> Result<Self> {
        let ch = ChannelSet { h_c, h_dl, h_r };
        ch.validate()?;
        Ok(ch)
    }

    pub fn num_emitters(&self) -> usize {
        self.h_c.len()
    }

    pub fn num_readers(&self) -> usize {
        self.h_dl.nrows()
    }

    pub fn validate(&self) -> Result<()> {
        if self.h_dl.ncols() != self.h_c.len() {
            return Err(Error::Dimension(format!(
                "h_dl has {} columns but h_c has {} entries",
                self.h_dl.ncols(),
                self.h_c.len()
            )));
        }
        if let Some(h_r) = &self.h_r {
            if h_r.len() != self.h_dl.nrows() {
                return Err(Error::Dimension(format!(
                    "h_r has {} entries but h_dl has {} rows",
                    h_r.len(),
                    self.h_dl.nrows()
                )));
            }
        }
        let finite = |z: &Cx<T>| num_traits::Float::is_finite(z.re) && num_traits::Float::is_finite(z.im);
        let all_finite = self.h_c.iter().all(finite)
            && self.h_dl.iter().all(finite)
            && self.h_r.as_ref().is_none_or(|h| h.iter().all(finite));
        if !all_finite {
            return Err(Error::Dimension("channel contains non-finite entries".into()));
        }
        Ok(())
    }

    /// Backscatter cascade `h_r h_cᵀ` (N×M, rank one).
    pub fn cascade(&self) -> Option<CMatrix<T>> {
        self.h_r.as_ref().map(|h_r| h_r * self.h_c.transpose())
    }

    /// Restricts to the listed emitters, in the given order.
    pub fn select_emitters(&self, indices: &[usize]) -> ChannelSet<T> {
        let h_c = DVector::from_iterator(indices.len(), indices.iter().map(|&m| self.h_c[m]));
        let h_dl = self.h_dl.select_columns(indices);
        ChannelSet {
            h_c,
            h_dl,
            h_r: self.h_r.clone(),
        }
    }
}

pub fn distance(a: Point3, b: Point3) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

/// Free-space gain `λ/(4πd) · exp(−j2πd/λ)` with isotropic antennas.
pub fn free_space_gain<T: Real>(d: f64, wavelength: f64) -> Cx<T> {
    let amp = wavelength / (4.0 * std::f64::consts::PI * d);
    // Reduce the phase in f64 before narrowing so f32 keeps its precision.
    let phase = (-2.0 * std::f64::consts::PI * d / wavelength).rem_euclid(2.0 * std::f64::consts::PI);
    Cx::new(T::lit(amp * phase.cos()), T::lit(amp * phase.sin()))
}

/// Gain between two points at the scenario's carrier.
pub fn link_gain<T: Real>(scenario: &Scenario, a: Point3, b: Point3) -> Result<Cx<T>> {
    let d = distance(a, b);
    if !(d > 0.0) {
        return Err(Error::InvalidScenario(format!("zero-length link between {a:?} and {b:?}")));
    }
    Ok(free_space_gain(d, scenario.wavelength()))
}

/// Direct-link row from every emitter to an arbitrary receive point.
pub fn direct_row<T: Real>(scenario: &Scenario, point: Point3) -> Result<CVector<T>> {
    let gains = scenario
        .emitter_positions
        .iter()
        .map(|&e| link_gain(scenario, e, point))
        .collect::<Result<Vec<_>>>()?;
    Ok(DVector::from_vec(gains))
}

/// Deterministic free-space line-of-sight channels.
pub fn los_channel<T: Real>(scenario: &Scenario) -> Result<ChannelSet<T>> {
    scenario.validate()?;
    let m = scenario.num_emitters();
    let n = scenario.num_readers();
    let h_c = direct_row(scenario, scenario.bd_position)?;
    let mut h_dl = DMatrix::from_element(n, m, Cx::new(T::zero(), T::zero()));
    for (r, &p) in scenario.reader_positions.iter().enumerate() {
        let row = direct_row::<T>(scenario, p)?;
        h_dl.row_mut(r).copy_from(&row.transpose());
    }
    let h_r = scenario
        .reader_positions
        .iter()
        .map(|&p| link_gain(scenario, scenario.bd_position, p))
        .collect::<Result<Vec<_>>>()?;
    ChannelSet::new(h_c, h_dl, Some(DVector::from_vec(h_r)))
}

fn rician_entry<T: Real, R: Rng>(rng: &mut R, los: Cx<T>, k: f64) -> Cx<T> {
    let power = los.norm_sqr().as_f64();
    let w: Cx<T> = complex_gaussian(rng, power);
    let (a, b) = if k.is_infinite() {
        (1.0, 0.0)
    } else {
        ((k / (k + 1.0)).sqrt(), (1.0 / (k + 1.0)).sqrt())
    };
    los * T::lit(a) + w * T::lit(b)
}

/// Rician fading around the line-of-sight channel, scattered power per entry
/// equal to the LoS entry power. Entries are drawn in a fixed order
/// (`h_c`, then `h_dl` column-major, then `h_r`).
pub fn rician_channel<T: Real>(scenario: &Scenario, k_factor: f64, seed: u64) -> Result<ChannelSet<T>> {
    if k_factor.is_nan() || k_factor < 0.0 {
        return Err(Error::InvalidArgument(format!("K-factor must be >= 0, got {k_factor}")));
    }
    let los = los_channel::<T>(scenario)?;
    let mut rng = seeded(seed);
    let h_c = los.h_c.map(|z| rician_entry(&mut rng, z, k_factor));
    let h_dl = los.h_dl.map(|z| rician_entry(&mut rng, z, k_factor));
    let h_r = los.h_r.map(|h| h.map(|z| rician_entry(&mut rng, z, k_factor)));
    ChannelSet::new(h_c, h_dl, h_r)
}

/// Knobs for CSI estimation error and residual per-antenna phase error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImpairmentSpec {
    pub csi_error_rel_std: f64,
    pub phase_noise_std_rad: f64,
    pub rng_seed: u64,
}

impl Default for ImpairmentSpec {
    fn default() -> Self {
        ImpairmentSpec::none()
    }
}

impl ImpairmentSpec {
    pub fn none() -> Self {
        ImpairmentSpec {
            csi_error_rel_std: 0.0,
            phase_noise_std_rad: 0.0,
            rng_seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.csi_error_rel_std >= 0.0 && self.csi_error_rel_std.is_finite()) {
            return Err(Error::InvalidArgument("CSI error std must be >= 0".into()));
        }
        if !(self.phase_noise_std_rad >= 0.0 && self.phase_noise_std_rad.is_finite()) {
            return Err(Error::InvalidArgument("phase noise std must be >= 0".into()));
        }
        Ok(())
    }

    pub fn is_ideal(&self) -> bool {
        self.csi_error_rel_std == 0.0 && self.phase_noise_std_rad == 0.0
    }
}

/// Adds relative complex Gaussian estimation error, `e ~ CN(0, (std·|h|)²)`.
pub fn apply_csi_error<T: Real>(ch: &ChannelSet<T>, spec: &ImpairmentSpec) -> ChannelSet<T> {
    let std = spec.csi_error_rel_std;
    if std == 0.0 {
        return ch.clone();
    }
    let mut rng = seeded(spec.rng_seed);
    let mut perturb = |z: Cx<T>| {
        let var = (std * z.norm().as_f64()).powi(2);
        z + complex_gaussian::<T, _>(&mut rng, var)
    };
    let h_c = ch.h_c.map(&mut perturb);
    let h_dl = ch.h_dl.map(&mut perturb);
    let h_r = ch.h_r.as_ref().map(|h| h.map(&mut perturb));
    ChannelSet { h_c, h_dl, h_r }
}

/// Rotates each applied weight by an independent `N(0, std²)` phase error.
pub fn apply_phase_noise<T: Real>(x: &BeamWeights<T>, spec: &ImpairmentSpec) -> BeamWeights<T> {
    let std = spec.phase_noise_std_rad;
    if std == 0.0 {
        return x.clone();
    }
    let mut rng = seeded(spec.rng_seed);
    let mut out = x.clone();
    for w in out.x.iter_mut() {
        let phi = gaussian(&mut rng, std);
        *w *= Cx::from_polar(T::one(), T::lit(phi));
    }
    out
}
