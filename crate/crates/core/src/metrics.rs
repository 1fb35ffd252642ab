//! Received-power metrics and synthesis of the reader-side baseband signal.

use serde::{Deserialize, Serialize};

use crate::beamform::BeamWeights;
use crate::channel::ChannelSet;
use crate::error::{Error, Result};
use crate::rng::{complex_gaussian, seeded};
use crate::scalar::{dot_t, CVector, Cx, Real};
use crate::scenario::Scenario;

/// Magnitude cap for every reported dB quantity.
pub const DB_CAP: f64 = 300.0;

/// `10·log10(p)`, clamped to `[−300, 300]` dB.
pub fn to_db(p: f64) -> f64 {
    if p.is_nan() {
        return f64::NAN;
    }
    if p <= 1e-30 {
        return -DB_CAP;
    }
    (10.0 * p.log10()).clamp(-DB_CAP, DB_CAP)
}

pub fn to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Power ratio in dB with the ±300 dB cap; an exactly zero denominator
/// reads as +300 (or 0 when both sides vanish).
pub fn ratio_db(num: f64, den: f64) -> f64 {
    if den <= 0.0 {
        return if num > 0.0 { DB_CAP } else { 0.0 };
    }
    if num <= 0.0 {
        return -DB_CAP;
    }
    (10.0 * (num / den).log10()).clamp(-DB_CAP, DB_CAP)
}

/// Reduction in dB going from level `a` to level `b` (both dBm).
pub fn suppression_between(p_r_a_dbm: f64, p_r_b_dbm: f64) -> f64 {
    p_r_a_dbm - p_r_b_dbm
}

/// ADC bits corresponding to a dynamic-range gap, at 6.02 dB per bit.
pub fn adc_headroom_bits(delta_db: f64) -> f64 {
    delta_db / 6.02
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub label: String,
    /// Carrier power incident on the BD, mW.
    pub p_bd_mw: f64,
    pub p_bd_dbm: f64,
    /// Direct-link power per reader, mW.
    pub p_r_mw: Vec<f64>,
    pub p_r_dbm: Vec<f64>,
    /// Direct-link power summed over readers.
    pub p_r_total_dbm: f64,
    /// `P_BD / P_R` (total).
    pub delta_db: f64,
    /// `|h_cᵀx|² / ‖H_DL x‖²`.
    pub sir_proxy_db: f64,
    pub suppression_db: Option<f64>,
}

/// Evaluates the received powers of weights `x`. With `baseline_p_r_dbm`, the
/// suppression of total reader power relative to that level is reported.
pub fn evaluate<T: Real>(
    scenario: &Scenario,
    channels: &ChannelSet<T>,
    x: &BeamWeights<T>,
    baseline_p_r_dbm: Option<f64>,
) -> Result<MetricsReport> {
    if x.len() != channels.num_emitters() {
        return Err(Error::Dimension(format!(
            "{} weights for {} emitters",
            x.len(),
            channels.num_emitters()
        )));
    }
    let tx = scenario.p_max_mw() * scenario.symbol_power;
    let bd_gain = dot_t(&channels.h_c, &x.x).norm_sqr().as_f64();
    let dli = &channels.h_dl * &x.x;
    let reader_gain: Vec<f64> = dli.iter().map(|z| z.norm_sqr().as_f64()).collect();
    let dli_total: f64 = reader_gain.iter().sum();

    let p_bd_mw = tx * bd_gain;
    let p_r_mw: Vec<f64> = reader_gain.iter().map(|g| tx * g).collect();
    let p_r_total = tx * dli_total;
    let p_r_total_dbm = to_db(p_r_total);
    Ok(MetricsReport {
        label: x.label.as_str().to_string(),
        p_bd_mw,
        p_bd_dbm: to_db(p_bd_mw),
        p_r_dbm: p_r_mw.iter().map(|&p| to_db(p)).collect(),
        p_r_mw,
        p_r_total_dbm,
        delta_db: ratio_db(p_bd_mw, p_r_total),
        sir_proxy_db: ratio_db(bd_gain, dli_total),
        suppression_db: baseline_p_r_dbm.map(|b| suppression_between(b, p_r_total_dbm)),
    })
}

impl MetricsReport {
    pub fn csv_header(num_readers: usize) -> String {
        let mut cols = vec![
            "beamformer".to_string(),
            "p_bd_dbm".into(),
            "p_r_dbm".into(),
            "delta_db".into(),
            "sir_proxy_db".into(),
            "suppression_db".into(),
        ];
        cols.extend((0..num_readers).map(|n| format!("p_r{n}_dbm")));
        cols.join(",")
    }

    /// One CSV row matching [`MetricsReport::csv_header`]; `p_r_dbm` is the
    /// total over readers, suppression is empty when no baseline was given.
    pub fn csv_row(&self) -> String {
        let mut cols = vec![
            self.label.clone(),
            self.p_bd_dbm.to_string(),
            self.p_r_total_dbm.to_string(),
            self.delta_db.to_string(),
            self.sir_proxy_db.to_string(),
            self.suppression_db.map(|v| v.to_string()).unwrap_or_default(),
        ];
        cols.extend(self.p_r_dbm.iter().map(|v| v.to_string()));
        cols.join(",")
    }
}

/// One draw of the reader-side signal, split into its three components.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalRealization<T: Real> {
    pub y_r: CVector<T>,
    pub dli_term: CVector<T>,
    pub backscatter_term: CVector<T>,
    pub noise_term: CVector<T>,
    pub b: Cx<T>,
    pub eta: T,
}

/// Received signal with the scenario's reflection efficiency.
pub fn synthesize_signal<T: Real>(
    scenario: &Scenario,
    channels: &ChannelSet<T>,
    x: &BeamWeights<T>,
    b: Cx<T>,
    noise_power: f64,
    seed: u64,
) -> Result<SignalRealization<T>> {
    synthesize_signal_with_eta(scenario, channels, x, b, scenario.reflection_efficiency, noise_power, seed)
}

/// `y = H_DL √P x s + η b (h_r h_cᵀ) √P x s + n` with real `s = √|s|²`.
pub fn synthesize_signal_with_eta<T: Real>(
    scenario: &Scenario,
    channels: &ChannelSet<T>,
    x: &BeamWeights<T>,
    b: Cx<T>,
    eta: f64,
    noise_power: f64,
    seed: u64,
) -> Result<SignalRealization<T>> {
    if b.norm() > T::one() + T::eps() {
        return Err(Error::InvalidArgument("|b| must not exceed 1".into()));
    }
    if !(noise_power >= 0.0) {
        return Err(Error::InvalidArgument("noise power must be >= 0".into()));
    }
    if !(eta >= 0.0) {
        return Err(Error::InvalidArgument("eta must be >= 0".into()));
    }
    if x.len() != channels.num_emitters() {
        return Err(Error::Dimension("weights do not match the emitter count".into()));
    }
    let h_r = channels
        .h_r
        .as_ref()
        .ok_or_else(|| Error::Dimension("backscatter link h_r is required".into()))?;

    let amp = T::lit(scenario.p_max_mw().sqrt() * scenario.symbol_power.sqrt());
    let drive = x.x.map(|z| z * amp);
    let dli_term = &channels.h_dl * &drive;
    let coupling = b * T::lit(eta) * dot_t(&channels.h_c, &drive);
    let backscatter_term = h_r.map(|h| h * coupling);

    let n = channels.num_readers();
    let mut rng = seeded(seed);
    let noise_term = if noise_power == 0.0 {
        CVector::<T>::from_element(n, Cx::new(T::zero(), T::zero()))
    } else {
        CVector::<T>::from_fn(n, |_, _| complex_gaussian(&mut rng, noise_power))
    };
    let y_r = &dli_term + &backscatter_term + &noise_term;
    Ok(SignalRealization {
        y_r,
        dli_term,
        backscatter_term,
        noise_term,
        b,
        eta: T::lit(eta),
    })
}
