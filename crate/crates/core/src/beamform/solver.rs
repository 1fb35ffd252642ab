//! Projected gradient ascent for
//! `max Re(h_cᵀx)  s.t.  H_DL x = 0,  |x_m| ≤ 1`.

use num_traits::Float;
use serde::{Deserialize, Serialize};

use super::nullspace::NullspaceProjector;
use super::projection::{clip_to_disks, dykstra_project, DykstraOptions};
use super::{po_mrt, BeamWeights, WeightLabel};
use crate::error::{Error, Result};
use crate::scalar::{dot_t, frobenius, max_modulus, min_modulus, norm2, CMatrix, CVector, Cx, Real};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions<T> {
    /// Step is `step_scale / ‖h_c‖₂`.
    pub step_scale: T,
    pub max_outer_iterations: usize,
    /// Relative objective improvement counted as a stall.
    pub rel_tol: T,
    /// Consecutive stalls before stopping.
    pub patience: usize,
    pub projection: DykstraOptions<T>,
}

impl<T: Real> Default for SolverOptions<T> {
    fn default() -> Self {
        SolverOptions {
            step_scale: T::lit(0.5),
            max_outer_iterations: 10_000,
            rel_tol: T::lit(1e-9),
            patience: 10,
            projection: DykstraOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    /// `Re(h_cᵀx)` at the returned weights.
    pub objective: f64,
    /// `|Im(h_cᵀx)|` at the returned weights.
    pub imag_residual: f64,
    /// `‖H_DL x‖₂ / (‖H_DL‖_F · max(‖x‖₂, 1))`.
    pub null_residual: f64,
    pub outer_iterations: usize,
    pub inner_projection_iterations_total: usize,
    pub modulus_min: f64,
    pub modulus_max: f64,
    pub converged: bool,
    /// Objective change caused by the exact-null polish.
    pub polish_objective_change: f64,
    pub degenerate_objective: bool,
}

/// Normalized null-constraint residual.
pub fn null_residual<T: Real>(h_dl: &CMatrix<T>, x: &CVector<T>) -> T {
    let hf = frobenius(h_dl);
    if hf == T::zero() {
        return T::zero();
    }
    let r = norm2(&(h_dl * x));
    r / (hf * Float::max(norm2(x), T::one()))
}

fn objective<T: Real>(h_c: &CVector<T>, x: &CVector<T>) -> T {
    dot_t(h_c, x).re
}

/// Exact-null optimum under per-antenna power limits.
///
/// The final iterate is re-projected onto the null space, rescaled so the
/// largest entry has unit modulus, and phase-rotated so `h_cᵀx` is real.
pub fn azf_solve<T: Real>(
    h_c: &CVector<T>,
    h_dl: &CMatrix<T>,
    opts: &SolverOptions<T>,
) -> Result<(BeamWeights<T>, SolveReport)> {
    if h_c.is_empty() {
        return Err(Error::EmptyChannel);
    }
    if h_dl.ncols() != h_c.len() {
        return Err(Error::Dimension(format!(
            "h_dl has {} columns, h_c has {} entries",
            h_dl.ncols(),
            h_c.len()
        )));
    }
    let ns = NullspaceProjector::new(h_dl)?;
    let m = h_c.len();
    let zero = Cx::new(T::zero(), T::zero());

    let ascent = h_c.map(|z| z.conj());
    let h_norm = norm2(h_c);
    let reachable = norm2(&ns.project(&ascent));
    if !(reachable > T::lit(64.0) * T::eps() * h_norm) {
        let x = CVector::<T>::from_element(m, zero);
        let mut w = BeamWeights::new(x, WeightLabel::AzfOptimal);
        w.flags.degenerate_objective = true;
        let report = SolveReport {
            objective: 0.0,
            imag_residual: 0.0,
            null_residual: 0.0,
            outer_iterations: 0,
            inner_projection_iterations_total: 0,
            modulus_min: 0.0,
            modulus_max: 0.0,
            converged: true,
            polish_objective_change: 0.0,
            degenerate_objective: true,
        };
        return Ok((w, report));
    }

    let step = opts.step_scale / h_norm;
    let step_c = Cx::new(step, T::zero());

    let start = po_mrt(h_c)?;
    let mut x = clip_to_disks(&ns.project(&start.x));
    let mut f = objective(h_c, &x);
    let mut best = (x.clone(), f);
    let mut stalls = 0;
    let mut inner_total = 0;
    let mut outer = 0;
    let mut converged = false;

    while outer < opts.max_outer_iterations {
        outer += 1;
        let z = &x + &ascent * step_c;
        let proj = dykstra_project(&z, &ns, &opts.projection);
        inner_total += proj.iterations;
        let f_next = objective(h_c, &proj.x);
        let scale = Float::max(Float::abs(f), T::min_positive_value());
        let gain = (f_next - f) / scale;
        x = proj.x;
        f = f_next;
        if f > best.1 {
            best = (x.clone(), f);
        }
        if gain < opts.rel_tol {
            stalls += 1;
            if stalls >= opts.patience {
                converged = true;
                break;
            }
        } else {
            stalls = 0;
        }
    }
    let raw = if converged { x } else { best.0 };
    let f_raw = objective(h_c, &raw);

    let mut polished = ns.project(&raw);
    let peak = max_modulus(&polished);
    if peak > T::one() || (peak > T::zero() && objective(h_c, &polished) > T::zero()) {
        polished /= Cx::new(peak, T::zero());
    }
    // Both constraint sets are invariant under a common phase, so rotating
    // h_cᵀx onto the positive real axis is free.
    let g = dot_t(h_c, &polished);
    if g.norm() > T::zero() {
        polished *= Cx::from_polar(T::one(), -g.arg());
    }

    let g = dot_t(h_c, &polished);
    let report = SolveReport {
        objective: g.re.as_f64(),
        imag_residual: Float::abs(g.im).as_f64(),
        null_residual: null_residual(h_dl, &polished).as_f64(),
        outer_iterations: outer,
        inner_projection_iterations_total: inner_total,
        modulus_min: min_modulus(&polished).as_f64(),
        modulus_max: max_modulus(&polished).as_f64(),
        converged,
        polish_objective_change: (g.re - f_raw).as_f64(),
        degenerate_objective: false,
    };
    Ok((BeamWeights::new(polished, WeightLabel::AzfOptimal), report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{complex_gaussian, seeded};

    fn c(re: f64, im: f64) -> Cx<f64> {
        Cx::new(re, im)
    }

    #[test]
    fn two_emitter_closed_form() {
        let h_dl = CMatrix::from_row_slice(1, 2, &[c(1.0, 0.0), c(1.0, 0.0)]);
        let h_c = CVector::from_vec(vec![c(1.0, 0.0), c(-1.0, 0.0)]);
        let (w, rep) = azf_solve(&h_c, &h_dl, &SolverOptions::default()).unwrap();
        assert!((rep.objective - 2.0).abs() < 1e-9, "{rep:?}");
        assert!(rep.null_residual <= 1e-12);
        assert!((w.x[0] + w.x[1]).norm() < 1e-12);
        assert!(rep.converged);
    }

    #[test]
    fn inactive_null_gives_po_mrt() {
        // h_c = [1, j, -1, -j]/2 lies in null([1, 1, 1, 1]).
        let h_c = CVector::from_vec(vec![c(0.5, 0.0), c(0.0, 0.5), c(-0.5, 0.0), c(0.0, -0.5)]);
        let h_dl = CMatrix::from_row_slice(1, 4, &[c(1.0, 0.0); 4]);
        let (w, rep) = azf_solve(&h_c, &h_dl, &SolverOptions::default()).unwrap();
        let mrt = po_mrt(&h_c).unwrap();
        assert!((rep.objective - 2.0).abs() < 1e-9);
        assert!((w.x - mrt.x).norm() < 1e-6);
    }

    #[test]
    fn degenerate_objective() {
        // h_c parallel to the unique reader row: nothing reachable.
        let h_c = CVector::from_vec(vec![c(1.0, 0.0), c(1.0, 0.0)]);
        let h_dl = CMatrix::from_row_slice(1, 2, &[c(1.0, 0.0), c(1.0, 0.0)]);
        let (w, rep) = azf_solve(&h_c, &h_dl, &SolverOptions::default()).unwrap();
        assert!(rep.degenerate_objective && rep.converged && w.flags.degenerate_objective);
        assert!(w.x.iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn trivial_nullspace_errors() {
        let h_c = CVector::from_vec(vec![c(1.0, 0.0)]);
        let h_dl = CMatrix::from_row_slice(1, 1, &[c(1.0, 0.0)]);
        assert!(matches!(
            azf_solve(&h_c, &h_dl, &SolverOptions::default()),
            Err(Error::TrivialNullspace)
        ));
    }

    #[test]
    fn iteration_cap_reports_non_convergence() {
        let mut rng = seeded(8);
        let h_c = CVector::<f64>::from_fn(12, |_, _| complex_gaussian(&mut rng, 1.0));
        let h_dl = CMatrix::<f64>::from_fn(2, 12, |_, _| complex_gaussian(&mut rng, 1.0));
        let opts = SolverOptions {
            max_outer_iterations: 2,
            ..SolverOptions::default()
        };
        let (w, rep) = azf_solve(&h_c, &h_dl, &opts).unwrap();
        assert!(!rep.converged);
        assert_eq!(rep.outer_iterations, 2);
        assert!(w.is_feasible());
        assert!(rep.null_residual <= 1e-12);
    }

    #[test]
    fn random_instances_feasible() {
        let mut rng = seeded(9);
        for _ in 0..20 {
            let h_c = CVector::<f64>::from_fn(10, |_, _| complex_gaussian(&mut rng, 1.0));
            let h_dl = CMatrix::<f64>::from_fn(3, 10, |_, _| complex_gaussian(&mut rng, 1.0));
            let (w, rep) = azf_solve(&h_c, &h_dl, &SolverOptions::default()).unwrap();
            assert!(w.is_feasible());
            assert!(rep.null_residual <= 1e-8);
            assert!(rep.imag_residual <= 1e-9 * rep.objective, "{rep:?}");
            let bound: f64 = h_c.iter().map(|z| z.norm()).sum();
            assert!(rep.objective <= bound + 1e-12);
        }
    }

    #[test]
    fn f32_solver_runs() {
        let h_c = CVector::<f32>::from_vec(vec![Cx::new(0.3, 0.2), Cx::new(-0.5, 0.1), Cx::new(0.2, -0.6)]);
        let h_dl = CMatrix::<f32>::from_row_slice(1, 3, &[Cx::new(0.1, 0.4), Cx::new(0.5, 0.0), Cx::new(-0.3, 0.3)]);
        let opts = SolverOptions {
            rel_tol: 1e-6,
            projection: DykstraOptions { tol: 1e-6, max_iterations: 500 },
            ..SolverOptions::default()
        };
        let (w, rep) = azf_solve(&h_c, &h_dl, &opts).unwrap();
        assert!(w.is_feasible());
        assert!(rep.null_residual < 1e-5);
        let h64 = crate::scalar::cast_vector::<f32, f64>(&h_c);
        let d64 = crate::scalar::cast_matrix::<f32, f64>(&h_dl);
        let (_, rep64) = azf_solve(&h64, &d64, &SolverOptions::default()).unwrap();
        assert!((rep.objective - rep64.objective).abs() < 1e-3 * rep64.objective);
    }
}
