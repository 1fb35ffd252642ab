//! Reference solutions for instances with a one- or two-dimensional null
//! space. Both work directly in null-space coordinates and share nothing
//! with the iterative solver beyond the basis.

use num_traits::Float;

use super::nullspace::NullspaceProjector;
use super::{BeamWeights, WeightLabel};
use crate::error::{Error, Result};
use crate::scalar::{dot_t, max_modulus, CMatrix, CVector, Cx, Real};

/// Global optimum when `null(H_DL)` is spanned by a single direction `v`:
/// `x = v · e^{−j arg(h_cᵀv)} / max_m |v_m|`.
pub fn azf_closed_form_dim1<T: Real>(h_c: &CVector<T>, h_dl: &CMatrix<T>) -> Result<BeamWeights<T>> {
    let ns = NullspaceProjector::new(h_dl)?;
    if ns.dim() != 1 {
        return Err(Error::NullspaceDimension(ns.dim()));
    }
    let v: CVector<T> = ns.basis.column(0).into_owned();
    let phase = dot_t(h_c, &v).arg();
    let scale = Cx::from_polar(T::one() / max_modulus(&v), -phase);
    Ok(BeamWeights::new(v * scale, WeightLabel::AzfOptimal))
}

/// Best `|h_cᵀx(u)|` over a grid of at least `directions` unit directions
/// `u` in null-space coordinates, `x(u) = Vu / max_m |(Vu)_m|`.
///
/// Every sample is feasible, so the result is a lower bound on the optimum.
/// For a two-dimensional null space the directions are
/// `u = (cos θ, e^{jφ} sin θ)` with the common phase factored out, spread
/// uniformly over the corresponding Bloch sphere.
pub fn azf_bruteforce<T: Real>(h_c: &CVector<T>, h_dl: &CMatrix<T>, directions: usize) -> Result<T> {
    let ns = NullspaceProjector::new(h_dl)?;
    let v = &ns.basis;
    let m = v.nrows();
    let directions = directions.max(1);
    match ns.dim() {
        1 => {
            let col: CVector<T> = v.column(0).into_owned();
            let a = dot_t(h_c, &col);
            let peak = max_modulus(&col);
            // Every phase gives the same value; sweep it anyway.
            let best = (0..directions)
                .map(|k| {
                    let phi = T::lit(2.0 * std::f64::consts::PI * k as f64 / directions as f64);
                    (a * Cx::from_polar(T::one(), phi)).norm() / peak
                })
                .fold(T::zero(), Float::max);
            Ok(best)
        }
        2 => {
            let a0 = dot_t(h_c, &v.column(0).into_owned());
            let a1 = dot_t(h_c, &v.column(1).into_owned());
            let rows: Vec<(Cx<T>, Cx<T>)> = (0..m).map(|i| (v[(i, 0)], v[(i, 1)])).collect();

            // Fibonacci lattice on the Bloch sphere: direction k has polar
            // angle 2θ with cos 2θ = 1 − (2k+1)/n and golden-angle azimuth.
            let n = directions;
            let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
            let mut best = T::zero();
            for k in 0..n {
                let z = 1.0 - (2 * k + 1) as f64 / n as f64;
                let c = T::lit(((1.0 + z) / 2.0).sqrt());
                let w = Cx::from_polar(T::lit(((1.0 - z) / 2.0).sqrt()), T::lit(golden * k as f64));
                let num = (a0 * c + a1 * w).norm();
                let den = rows
                    .iter()
                    .fold(T::zero(), |acc, (r0, r1)| Float::max(acc, (*r0 * c + *r1 * w).norm()));
                if den > T::zero() {
                    best = Float::max(best, num / den);
                }
            }
            Ok(best)
        }
        d => Err(Error::OracleTooLarge(d)),
    }
}
