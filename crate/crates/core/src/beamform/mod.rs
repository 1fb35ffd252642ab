//! Transmit beamformers: phase-only MRT, the null-constrained optimum and its
//! phase-only projection, plus independent oracles for small instances.

mod nullspace;
mod oracle;
mod projection;
mod solver;

pub use nullspace::{nullspace_basis, NullspaceProjector};
pub use oracle::{azf_bruteforce, azf_closed_form_dim1};
pub use projection::{clip_to_disks, dykstra_project, DykstraOptions, Projection};
pub use solver::{azf_solve, null_residual, SolveReport, SolverOptions};

use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{dot_t, max_modulus, CVector, Cx, Real};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightLabel {
    PoMrt,
    AzfOptimal,
    AzfPhaseOnly,
    Custom,
}

impl WeightLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            WeightLabel::PoMrt => "po_mrt",
            WeightLabel::AzfOptimal => "azf_optimal",
            WeightLabel::AzfPhaseOnly => "azf_phase_only",
            WeightLabel::Custom => "custom",
        }
    }
}

/// Conditions recorded while constructing a weight vector.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeightFlags {
    /// Phase-only entries zeroed because the source modulus was negligible.
    pub zeroed_entries: usize,
    /// Channel entries too small to define a phase (weight set to 1).
    pub degenerate_channel_entries: usize,
    /// Source modulus spread below 0.1 of its maximum.
    pub low_modulus_warning: bool,
    /// Objective vanished on the feasible set; weights are all zero.
    pub degenerate_objective: bool,
}

/// Per-antenna complex weights, `|x_m| ≤ 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamWeights<T: Real> {
    pub x: CVector<T>,
    pub label: WeightLabel,
    pub flags: WeightFlags,
}

impl<T: Real> BeamWeights<T> {
    pub fn new(x: CVector<T>, label: WeightLabel) -> Self {
        BeamWeights {
            x,
            label,
            flags: WeightFlags::default(),
        }
    }

    pub fn custom(x: CVector<T>) -> Self {
        Self::new(x, WeightLabel::Custom)
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// Slack allowed on `|x_m|² ≤ 1`.
    pub fn power_tolerance() -> T {
        Float::max(T::lit(1e-12), T::lit(8.0) * T::eps())
    }

    /// Whether every entry satisfies the per-antenna power limit.
    pub fn is_feasible(&self) -> bool {
        let limit = T::one() + Self::power_tolerance();
        self.x.iter().all(|z| z.norm_sqr() <= limit)
    }

    /// Whether every non-zeroed entry has unit modulus.
    pub fn is_unit_modulus(&self, tol: T) -> bool {
        self.x
            .iter()
            .filter(|z| z.norm_sqr() > T::zero())
            .all(|z| Float::abs(z.norm() - T::one()) <= tol)
    }

    /// `h_cᵀ x`.
    pub fn gain(&self, h_c: &CVector<T>) -> Cx<T> {
        dot_t(h_c, &self.x)
    }

    /// Applies a common phase rotation.
    pub fn rotated(&self, theta: T) -> Self {
        let r = Cx::from_polar(T::one(), theta);
        BeamWeights {
            x: self.x.map(|z| z * r),
            ..self.clone()
        }
    }

    /// Scatters the weights into a length-`m` vector at `indices`; the other
    /// emitters stay silent.
    pub fn embed(&self, indices: &[usize], m: usize) -> Self {
        let mut x = CVector::<T>::from_element(m, Cx::new(T::zero(), T::zero()));
        for (w, &i) in self.x.iter().zip(indices) {
            x[i] = *w;
        }
        BeamWeights { x, ..self.clone() }
    }
}

/// Phase-only maximum ratio transmission toward the BD.
pub fn po_mrt<T: Real>(h_c: &CVector<T>) -> Result<BeamWeights<T>> {
    if h_c.is_empty() {
        return Err(Error::EmptyChannel);
    }
    let floor = T::lit(1e-300);
    let mut degenerate = 0;
    let x = h_c.map(|h| {
        let r = h.norm();
        if r <= floor {
            degenerate += 1;
            Cx::new(T::one(), T::zero())
        } else {
            h.conj() / Cx::new(r, T::zero())
        }
    });
    let mut w = BeamWeights::new(x, WeightLabel::PoMrt);
    w.flags.degenerate_channel_entries = degenerate;
    Ok(w)
}

/// Relative modulus below which an optimal-weight entry is treated as zero
/// by [`azf_phase_only`].
pub const PHASE_ONLY_MODULUS_EPS: f64 = 1e-9;

/// Keeps only the phase of each entry of the optimal AZF weights.
pub fn azf_phase_only<T: Real>(x_star: &BeamWeights<T>) -> Result<BeamWeights<T>> {
    let peak = max_modulus(&x_star.x);
    let threshold = T::lit(PHASE_ONLY_MODULUS_EPS) * peak;
    if x_star.is_empty() || !(peak > T::zero()) {
        return Err(Error::DegenerateSolution);
    }
    let mut zeroed = 0;
    let mut min_kept = <T as Float>::infinity();
    let x = x_star.x.map(|z| {
        let r = z.norm();
        if r > threshold {
            min_kept = Float::min(min_kept, r);
            z / Cx::new(r, T::zero())
        } else {
            zeroed += 1;
            Cx::new(T::zero(), T::zero())
        }
    });
    let mut out = BeamWeights::new(x, WeightLabel::AzfPhaseOnly);
    out.flags.zeroed_entries = zeroed;
    out.flags.low_modulus_warning =
        crate::scalar::min_modulus(&x_star.x) < T::lit(0.1) * peak;
    Ok(out)
}
