//! Projections onto the per-antenna disks and onto their intersection with
//! the null space.

use num_traits::Float;

use super::nullspace::NullspaceProjector;
use crate::scalar::{CVector, Cx, Real};

/// `x_m ← x_m / max(1, |x_m|)`.
pub fn clip_to_disks<T: Real>(x: &CVector<T>) -> CVector<T> {
    x.map(|z| {
        let r = z.norm();
        if r > T::one() {
            z / Cx::new(r, T::zero())
        } else {
            z
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DykstraOptions<T> {
    pub tol: T,
    pub max_iterations: usize,
}

impl<T: Real> Default for DykstraOptions<T> {
    fn default() -> Self {
        DykstraOptions {
            tol: T::lit(1e-10),
            max_iterations: 500,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Projection<T: Real> {
    /// Last disk-feasible iterate.
    pub x: CVector<T>,
    pub iterations: usize,
    pub converged: bool,
}

fn max_gap<T: Real>(a: &CVector<T>, b: &CVector<T>) -> T {
    a.iter()
        .zip(b.iter())
        .fold(T::zero(), |acc, (u, v)| Float::max(acc, (*u - *v).norm()))
}

/// Dykstra's alternating projection of `z` onto `null(H_DL) ∩ {|x_m| ≤ 1}`.
/// Stops once no entry moves by more than `opts.tol` in one sweep and the two
/// iterates agree to `opts.tol`.
pub fn dykstra_project<T: Real>(
    z: &CVector<T>,
    nullspace: &NullspaceProjector<T>,
    opts: &DykstraOptions<T>,
) -> Projection<T> {
    let zero = Cx::new(T::zero(), T::zero());
    let mut x = z.clone();
    let mut p = CVector::<T>::from_element(z.len(), zero);
    let mut q = CVector::<T>::from_element(z.len(), zero);

    for it in 1..=opts.max_iterations {
        let xp = &x + &p;
        let y = nullspace.project(&xp);
        p = xp - &y;
        let yq = &y + &q;
        let x_next = clip_to_disks(&yq);
        q = yq - &x_next;

        let change = max_gap(&x, &x_next);
        // The disk iterate can stall for a sweep while the corrections still
        // move, so also require it to sit on the null-space iterate.
        let gap = max_gap(&y, &x_next);
        x = x_next;
        if change < opts.tol && gap < opts.tol {
            return Projection {
                x,
                iterations: it,
                converged: true,
            };
        }
    }
    Projection {
        x,
        iterations: opts.max_iterations,
        converged: false,
    }
}
