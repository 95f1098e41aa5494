//! Dense complex helpers shared by the bundle and algebra layers.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

/// Default absolute tolerance for entrywise complex comparisons.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Bilinear map `V_left x V_right -> V_out` stored by structure constants:
/// `out[k] = sum_ij t[k, i, j] * a[i] * b[j]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tensor3 {
    pub out: usize,
    pub left: usize,
    pub right: usize,
    pub data: Vec<C64>,
}

impl Tensor3 {
    pub fn zeros(out: usize, left: usize, right: usize) -> Self {
        Tensor3 {
            out,
            left,
            right,
            data: vec![ZERO; out * left * right],
        }
    }

    /// The scalar product `C x C -> C`.
    pub fn scalar() -> Self {
        Tensor3 {
            out: 1,
            left: 1,
            right: 1,
            data: vec![ONE],
        }
    }

    pub fn from_fn(out: usize, left: usize, right: usize, mut f: impl FnMut(usize, usize, usize) -> C64) -> Self {
        let mut t = Tensor3::zeros(out, left, right);
        for k in 0..out {
            for i in 0..left {
                for j in 0..right {
                    t.data[(k * left + i) * right + j] = f(k, i, j);
                }
            }
        }
        t
    }

    #[inline]
    pub fn get(&self, k: usize, i: usize, j: usize) -> C64 {
        self.data[(k * self.left + i) * self.right + j]
    }

    #[inline]
    pub fn set(&mut self, k: usize, i: usize, j: usize, v: C64) {
        self.data[(k * self.left + i) * self.right + j] = v;
    }

    pub fn apply(&self, a: &[C64], b: &[C64]) -> Vec<C64> {
        debug_assert_eq!(a.len(), self.left);
        debug_assert_eq!(b.len(), self.right);
        let mut out = vec![ZERO; self.out];
        for (k, o) in out.iter_mut().enumerate() {
            let mut acc = ZERO;
            for (i, ai) in a.iter().enumerate() {
                if *ai == ZERO {
                    continue;
                }
                let base = (k * self.left + i) * self.right;
                for (j, bj) in b.iter().enumerate() {
                    acc += self.data[base + j] * ai * bj;
                }
            }
            *o = acc;
        }
        out
    }

    /// Column `(i, j)`: the image of the basis pair `(e_i, e_j)`.
    pub fn basis_image(&self, i: usize, j: usize) -> Vec<C64> {
        (0..self.out).map(|k| self.get(k, i, j)).collect()
    }

    /// Precomposes each argument with a linear map and postcomposes the output:
    /// `(a, b) -> post * T(pre_l * a, pre_r * b)`.
    pub fn transform(&self, post: &CMatrix, pre_l: &CMatrix, pre_r: &CMatrix) -> Tensor3 {
        let out = post.nrows();
        let left = pre_l.ncols();
        let right = pre_r.ncols();
        let mut t = Tensor3::zeros(out, left, right);
        for i in 0..left {
            let a: Vec<C64> = pre_l.column(i).iter().copied().collect();
            for j in 0..right {
                let b: Vec<C64> = pre_r.column(j).iter().copied().collect();
                let v = CVector::from_vec(self.apply(&a, &b));
                let w = post * v;
                for k in 0..out {
                    t.set(k, i, j, w[k]);
                }
            }
        }
        t
    }

    pub fn scaled(&self, s: C64) -> Tensor3 {
        let mut t = self.clone();
        t.data.iter_mut().for_each(|v| *v *= s);
        t
    }
}

/// Matrix of `b -> T(c, b)`.
pub fn left_mult_matrix(t: &Tensor3, c: &[C64]) -> CMatrix {
    CMatrix::from_fn(t.out, t.right, |k, j| {
        c.iter()
            .enumerate()
            .map(|(i, ci)| t.get(k, i, j) * ci)
            .sum()
    })
}

/// Matrix of `a -> T(a, c)`.
pub fn right_mult_matrix(t: &Tensor3, c: &[C64]) -> CMatrix {
    CMatrix::from_fn(t.out, t.left, |k, i| {
        c.iter()
            .enumerate()
            .map(|(j, cj)| t.get(k, i, j) * cj)
            .sum()
    })
}

/// Eigenvalues of a square complex matrix (complex Schur form).
pub fn eigenvalues(m: &CMatrix) -> Vec<C64> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    m.clone()
        .schur()
        .eigenvalues()
        .map(|v| v.iter().copied().collect())
        .unwrap_or_default()
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

pub fn conj_matrix(m: &CMatrix) -> CMatrix {
    m.map(|z| z.conj())
}

pub fn max_abs_diff(a: &[C64], b: &[C64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

pub fn max_abs(a: &[C64]) -> f64 {
    a.iter().map(|x| x.norm()).fold(0.0, f64::max)
}

pub fn conj_vec(a: &[C64]) -> Vec<C64> {
    a.iter().map(|x| x.conj()).collect()
}

pub fn basis_vec(n: usize, i: usize) -> Vec<C64> {
    let mut v = vec![ZERO; n];
    v[i] = ONE;
    v
}

pub fn mat_vec(m: &CMatrix, v: &[C64]) -> Vec<C64> {
    debug_assert_eq!(m.ncols(), v.len());
    (0..m.nrows())
        .map(|r| (0..m.ncols()).map(|c| m[(r, c)] * v[c]).sum())
        .collect()
}

pub fn random_complex<R: Rng>(rng: &mut R) -> C64 {
    C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

pub fn random_vector<R: Rng>(rng: &mut R, n: usize) -> Vec<C64> {
    (0..n).map(|_| random_complex(rng)).collect()
}

fn padded_svd(m: &CMatrix) -> nalgebra::linalg::SVD<C64, nalgebra::Dyn, nalgebra::Dyn> {
    // nalgebra computes thin factors; pad wide inputs so V is square.
    let (r, c) = m.shape();
    let padded = if r < c {
        let mut p = CMatrix::zeros(c, c);
        p.view_mut((0, 0), (r, c)).copy_from(m);
        p
    } else {
        m.clone()
    };
    padded.svd(true, true)
}

fn threshold(sv: &DVector<f64>, tol: f64) -> f64 {
    let smax = sv.iter().copied().fold(0.0, f64::max);
    tol * smax.max(1.0)
}

/// Orthonormal basis (as columns) of the kernel of `m`.
pub fn nullspace(m: &CMatrix, tol: f64) -> CMatrix {
    let n = m.ncols();
    if n == 0 {
        return CMatrix::zeros(0, 0);
    }
    if m.nrows() == 0 {
        return CMatrix::identity(n, n);
    }
    let svd = padded_svd(m);
    let thr = threshold(&svd.singular_values, tol);
    let v_t = svd.v_t.expect("v_t requested");
    let cols: Vec<CVector> = (0..v_t.nrows())
        .filter(|&i| svd.singular_values[i] <= thr)
        .map(|i| v_t.row(i).adjoint())
        .collect();
    if cols.is_empty() {
        CMatrix::zeros(n, 0)
    } else {
        CMatrix::from_columns(&cols)
    }
}

pub fn singular_values(m: &CMatrix) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return vec![];
    }
    m.clone().svd(false, false).singular_values.iter().copied().collect()
}

pub fn rank(m: &CMatrix, tol: f64) -> usize {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0;
    }
    let sv = m.clone().svd(false, false).singular_values;
    let thr = threshold(&sv, tol);
    sv.iter().filter(|s| **s > thr).count()
}

/// Orthonormal basis (as columns) of the column space of `m`.
pub fn column_space(m: &CMatrix, tol: f64) -> CMatrix {
    if m.nrows() == 0 || m.ncols() == 0 {
        return CMatrix::zeros(m.nrows(), 0);
    }
    let svd = m.clone().svd(true, false);
    let thr = threshold(&svd.singular_values, tol);
    let u = svd.u.expect("u requested");
    let cols: Vec<CVector> = (0..svd.singular_values.len())
        .filter(|&i| svd.singular_values[i] > thr)
        .map(|i| u.column(i).into_owned())
        .collect();
    if cols.is_empty() {
        CMatrix::zeros(m.nrows(), 0)
    } else {
        CMatrix::from_columns(&cols)
    }
}

/// Smallest eigenvalue of the Hermitian part of `m`.
pub fn min_hermitian_eigenvalue(m: &CMatrix) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    let h = (m + m.adjoint()).scale(0.5);
    let eig = nalgebra::linalg::SymmetricEigen::new(h);
    eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
}

pub fn operator_norm(m: &CMatrix) -> f64 {
    singular_values(m).into_iter().fold(0.0, f64::max)
}

pub fn format_c64(z: C64) -> String {
    fn trim(x: f64) -> String {
        if x == x.round() && x.abs() < 1e15 {
            format!("{}", x as i64)
        } else {
            format!("{x}")
        }
    }
    if z.im == 0.0 {
        trim(z.re)
    } else if z.re == 0.0 {
        format!("{}i", trim(z.im))
    } else {
        format!("{}{}{}i", trim(z.re), if z.im < 0.0 { "-" } else { "+" }, trim(z.im.abs()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nullspace_of_wide_matrix_is_complete() {
        let m = CMatrix::from_row_slice(1, 3, &[ONE, ONE, ZERO]);
        let n = nullspace(&m, 1e-12);
        assert_eq!(n.ncols(), 2);
        assert!((&m * &n).norm() < 1e-12);
    }

    #[test]
    fn tensor_apply_matches_definition() {
        let t = Tensor3::from_fn(2, 2, 2, |k, i, j| C64::new((k + 2 * i + 3 * j) as f64, 0.0));
        let out = t.apply(&[ONE, ZERO], &[ZERO, ONE]);
        assert_eq!(out, vec![C64::new(3.0, 0.0), C64::new(4.0, 0.0)]);
    }

    #[test]
    fn format_trims_integers() {
        assert_eq!(format_c64(C64::new(2.0, 0.0)), "2");
        assert_eq!(format_c64(C64::new(0.5, -1.0)), "0.5-1i");
    }
}
