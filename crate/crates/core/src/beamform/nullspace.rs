use nalgebra::{DMatrix, DVector};
use num_traits::Float;

use crate::error::{Error, Result};
use crate::scalar::{CMatrix, CVector, Cx, Real};

/// Orthonormal bases for the row space of `H_DL` (as columns of `range`) and
/// its orthogonal complement, the null space (`basis`).
#[derive(Debug, Clone)]
pub struct NullspaceProjector<T: Real> {
    pub range: CMatrix<T>,
    pub basis: CMatrix<T>,
}

impl<T: Real> NullspaceProjector<T> {
    pub fn new(h_dl: &CMatrix<T>) -> Result<Self> {
        let m = h_dl.ncols();
        let range = row_space(h_dl);
        let r = range.ncols();
        if r >= m {
            return Err(Error::TrivialNullspace);
        }
        let basis = complement(&range, m);
        Ok(NullspaceProjector { range, basis })
    }

    pub fn rank(&self) -> usize {
        self.range.ncols()
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    /// Orthogonal projection onto `{x : H_DL x = 0}`, through whichever basis
    /// is thinner.
    pub fn project(&self, x: &CVector<T>) -> CVector<T> {
        if self.rank() <= self.dim() {
            if self.rank() == 0 {
                return x.clone();
            }
            let c = self.range.ad_mul(x);
            x - &self.range * c
        } else {
            let c = self.basis.ad_mul(x);
            &self.basis * c
        }
    }
}

/// Numerical rank cut-off relative to the largest singular value.
fn rank_tolerance<T: Real>(shape: (usize, usize), s_max: T) -> T {
    T::lit(shape.0.max(shape.1) as f64) * T::eps() * s_max
}

/// Orthonormal basis of the row space of `h` (columns span range of `hᴴ`).
fn row_space<T: Real>(h: &CMatrix<T>) -> CMatrix<T> {
    let m = h.ncols();
    if h.nrows() == 0 || h.iter().all(|z| z.norm_sqr() == T::zero()) {
        return DMatrix::zeros(m, 0);
    }
    let svd = h.adjoint().svd(true, false);
    let u = svd.u.expect("left singular vectors requested");
    let s_max = svd
        .singular_values
        .iter()
        .fold(T::zero(), |acc, &v| Float::max(acc, v));
    let tol = rank_tolerance(h.shape(), s_max);
    let keep: Vec<usize> = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, &v)| v > tol)
        .map(|(i, _)| i)
        .collect();
    u.select_columns(&keep)
}

/// Completes the orthonormal columns `q` to a basis of `C^m`, returning only
/// the new columns. Greedy pivoting on the largest residual of the unit
/// vectors, with a second orthogonalization pass.
fn complement<T: Real>(q: &CMatrix<T>, m: usize) -> CMatrix<T> {
    let r = q.ncols();
    let want = m - r;
    let zero = Cx::new(T::zero(), T::zero());

    let mut residuals: Vec<CVector<T>> = (0..m)
        .map(|i| {
            let mut e = DVector::from_element(m, zero);
            e[i] = Cx::new(T::one(), T::zero());
            if r > 0 {
                let c = q.ad_mul(&e);
                e -= q * c;
            }
            e
        })
        .collect();
    let mut used = vec![false; m];
    let mut chosen: Vec<CVector<T>> = Vec::with_capacity(want);

    for _ in 0..want {
        let (pick, _) = residuals
            .iter()
            .enumerate()
            .filter(|(i, _)| !used[*i])
            .map(|(i, v)| (i, v.norm_squared()))
            .fold((usize::MAX, T::neg_infinity()), |best, cur| if cur.1 > best.1 { cur } else { best });
        used[pick] = true;

        let mut w = residuals[pick].clone();
        for _ in 0..2 {
            if r > 0 {
                let c = q.ad_mul(&w);
                w -= q * c;
            }
            for v in &chosen {
                let c = v.dotc(&w);
                w -= v * c;
            }
            let n = w.norm();
            w /= Cx::new(n, T::zero());
        }
        for (i, res) in residuals.iter_mut().enumerate() {
            if !used[i] {
                let c = w.dotc(res);
                *res -= &w * c;
            }
        }
        chosen.push(w);
    }
    DMatrix::from_columns(&chosen)
}

/// Orthonormal basis `V` (M×(M−r)) of the null space of `h_dl`.
pub fn nullspace_basis<T: Real>(h_dl: &CMatrix<T>) -> Result<CMatrix<T>> {
    NullspaceProjector::new(h_dl).map(|p| p.basis)
}
