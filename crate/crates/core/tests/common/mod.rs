//! Oracles shared by the integration tests. They use nalgebra directly and
//! the raw bundle and action data, never the library's derived structures.

#![allow(dead_code)]

use groupoidal::fell::{BundleAction, FellBundle};
use groupoidal::groupoid::{Arrow, Semidirect, Side, Transformation};
use groupoidal::linalg::{CMatrix, C64, ZERO};
use groupoidal::star::StarAlgebra;
use rand::Rng;

fn basis(n: usize, i: usize) -> Vec<C64> {
    let mut v = vec![ZERO; n];
    v[i] = C64::new(1.0, 0.0);
    v
}

/// Orthonormal basis of the center, from the SVD of the stacked
/// commutator maps `z ↦ z b_j - b_j z`.
pub fn center_basis(a: &StarAlgebra, tol: f64) -> Vec<Vec<C64>> {
    let n = a.dim();
    if n == 0 {
        return Vec::new();
    }
    let mut m = CMatrix::zeros(n * n, n);
    for i in 0..n {
        let ei = basis(n, i);
        for j in 0..n {
            let ej = basis(n, j);
            let (l, r) = (a.mul(&ei, &ej), a.mul(&ej, &ei));
            for k in 0..n {
                m[(j * n + k, i)] = l[k] - r[k];
            }
        }
    }
    let svd = m.svd(false, true);
    let v_t = svd.v_t.expect("requested");
    let scale = svd.singular_values.iter().copied().fold(1.0, f64::max);
    (0..n)
        .filter(|&k| svd.singular_values[k] <= tol * scale)
        .map(|k| v_t.row(k).iter().map(|z| z.conj()).collect())
        .collect()
}

pub fn center_dim(a: &StarAlgebra) -> usize {
    center_basis(a, 1e-9).len()
}

/// Simple block sizes, ascending, of a finite-dimensional C*-algebra: the
/// eigenvalue multiplicities of a random self-adjoint central element,
/// made Hermitian by orthonormalizing the trace form `(x, y) ↦ Tr L_{y*x}`.
pub fn wedderburn_blocks<R: Rng>(a: &StarAlgebra, rng: &mut R) -> Vec<usize> {
    let n = a.dim();
    let centre = center_basis(a, 1e-9);
    let mut z = vec![ZERO; n];
    for c in &centre {
        let r = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        for k in 0..n {
            z[k] += c[k] * r;
        }
    }
    let zs = a.adjoint(&z);
    let c: Vec<C64> = z.iter().zip(&zs).map(|(x, y)| x + y).collect();
    let lmul = |v: &[C64]| CMatrix::from_fn(n, n, |k, j| a.mul(v, &basis(n, j))[k]);
    let trace = |v: &[C64]| lmul(v).trace();
    let gram = CMatrix::from_fn(n, n, |i, j| trace(&a.mul(&a.adjoint(&basis(n, i)), &basis(n, j))));
    let chol = gram.cholesky().expect("trace form is positive definite on a C*-algebra");
    let r = chol.l().adjoint();
    let r_inv = r.clone().try_inverse().expect("invertible");
    let k = &r * lmul(&c) * &r_inv;
    let h = (&k + k.adjoint()) * C64::new(0.5, 0.0);
    let mut eig: Vec<f64> = h.symmetric_eigen().eigenvalues.iter().copied().collect();
    eig.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let spread = eig.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(1.0);
    let mut mult = Vec::new();
    let mut run = 0;
    for i in 0..eig.len() {
        run += 1;
        if i + 1 == eig.len() || eig[i + 1] - eig[i] > 1e-6 * spread {
            mult.push(run);
            run = 0;
        }
    }
    let mut blocks: Vec<usize> = mult
        .iter()
        .map(|&m| {
            let s = (m as f64).sqrt().round() as usize;
            assert_eq!(s * s, m, "multiplicity {m} is not a square");
            s
        })
        .collect();
    blocks.sort_unstable();
    blocks
}

/// Random section with small Gaussian-integer coefficients.
pub fn integer_section<R: Rng>(rng: &mut R, n: usize) -> Vec<C64> {
    (0..n).map(|_| C64::new(rng.gen_range(-3..=3) as f64, rng.gen_range(-3..=3) as f64)).collect()
}

fn offsets(b: &FellBundle) -> Vec<usize> {
    let mut off = Vec::with_capacity(b.base.n_arrows());
    let mut acc = 0;
    for x in b.base.arrows() {
        off.push(acc);
        acc += b.dim(x);
    }
    off
}

fn fiber<'a>(b: &FellBundle, off: &[usize], f: &'a [C64], x: Arrow) -> &'a [C64] {
    &f[off[x.0]..off[x.0] + b.dim(x)]
}

/// `(f∗g)(x, u) = Σ_{r(y) = r(x)} f(y, y⁻¹x·u) g(y⁻¹x, u)` on the bundle
/// `𝒜∗Ω`, using only `𝒜` and the action; `t` only supplies the indexing.
pub fn transformation_convolution(
    a: &FellBundle,
    act: &groupoidal::groupoid::SpaceAction,
    t: &Transformation,
    tb: &FellBundle,
    f: &[C64],
    g: &[C64],
) -> Vec<C64> {
    let x = &a.base;
    let off = offsets(tb);
    let mut out = vec![ZERO; f.len()];
    for (p, &(xa, u)) in t.pairs.iter().enumerate() {
        let mut acc = vec![ZERO; a.dim(xa)];
        for y in x.arrows().filter(|&y| x.rng(y) == x.rng(xa)) {
            let yx = x.mul(x.inv(y), xa);
            let v = act.act(yx, u).expect("s(y⁻¹x) = s(x) = ρ(u)");
            let fy = fiber(tb, &off, f, t.arrow(y, v).expect("s(y) = r(y⁻¹x) = ρ(y⁻¹x·u)"));
            let gy = fiber(tb, &off, g, t.arrow(yx, u).expect("fibred"));
            for (k, c) in a.mult(y, yx).apply(fy, gy).into_iter().enumerate() {
                acc[k] += c;
            }
        }
        out[off[p]..off[p] + acc.len()].copy_from_slice(&acc);
    }
    out
}

/// `(f∗f′)(x, s) = Σ_{r(y) = r(x)} Σ_t f(y, t)·α_t(f′(t⁻¹·(y⁻¹x), t⁻¹s))`
/// on `𝒜⋊G`, using only `𝒜`, the group and the fiber maps `α_t`.
pub fn semidirect_convolution(ba: &BundleAction, sd: &Semidirect, sb: &FellBundle, f: &[C64], g: &[C64]) -> Vec<C64> {
    assert_eq!(ba.side(), Side::Left);
    let a = &ba.bundle;
    let x = &a.base;
    let grp = ba.group();
    let act = &ba.base_action;
    let off = offsets(sb);
    let mut out = vec![ZERO; f.len()];
    for xa in x.arrows() {
        for s in grp.elements() {
            let mut acc = vec![ZERO; a.dim(xa)];
            for y in x.arrows().filter(|&y| x.rng(y) == x.rng(xa)) {
                let yx = x.mul(x.inv(y), xa);
                for t in grp.elements() {
                    let ti = grp.inv(t);
                    let z = act.apply(ti, yx);
                    let fy = fiber(sb, &off, f, sd.arrow(y, t));
                    let gz = fiber(sb, &off, g, sd.arrow(z, grp.mul(ti, s)));
                    let moved = ba.apply(t, z, gz);
                    for (k, c) in a.mult(y, yx).apply(fy, &moved).into_iter().enumerate() {
                        acc[k] += c;
                    }
                }
            }
            let p = sd.arrow(xa, s);
            out[off[p.0]..off[p.0] + acc.len()].copy_from_slice(&acc);
        }
    }
    out
}

pub fn max_diff(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}
