use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::StarAlgebra;
use crate::linalg::{basis_vec, nullspace, operator_norm, random_complex, rank, CMatrix, C64, ZERO};
use crate::report::ValidationReport;

/// Images of the basis under a \*-representation on `ℂ^size`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Representation {
    pub size: usize,
    pub images: Vec<CMatrix>,
    /// Injective, with a positive definite defining inner product.
    pub faithful: bool,
}

impl Representation {
    pub fn image(&self, a: &[C64]) -> CMatrix {
        let mut m = CMatrix::zeros(self.size, self.size);
        for (c, e) in a.iter().zip(&self.images) {
            if *c != ZERO {
                m += e * *c;
            }
        }
        m
    }
}

/// Gram matrix of `⟨a, b⟩ = tr L_{a*b}`.
fn trace_gram(a: &StarAlgebra) -> CMatrix {
    let n = a.dim();
    let traces: Vec<C64> = (0..n).map(|k| a.left_mult(&basis_vec(n, k)).trace()).collect();
    let stars: Vec<Vec<C64>> = (0..n).map(|i| a.adjoint(&basis_vec(n, i))).collect();
    CMatrix::from_fn(n, n, |i, j| {
        let p = a.mul(&stars[i], &basis_vec(n, j));
        p.iter().zip(&traces).map(|(c, t)| c * t).sum()
    })
}

/// Left regular representation, made a \*-representation by the trace
/// inner product `⟨a, b⟩ = tr L_{a*b}`. If that form is not positive
/// definite the raw left multiplication matrices are returned and the
/// representation is flagged non-faithful.
pub fn regular_representation(a: &StarAlgebra) -> Representation {
    let n = a.dim();
    let lm: Vec<CMatrix> = (0..n).map(|i| a.left_mult(&basis_vec(n, i))).collect();
    let injective = n == 0 || {
        let stacked = CMatrix::from_fn(n * n, n, |r, i| lm[i][(r / n, r % n)]);
        rank(&stacked, 1e-9) == n
    };
    let gram = trace_gram(a);
    let herm = (&gram - gram.adjoint()).camax() <= 1e-9 * gram.camax().max(1.0);
    let chol = if herm && n > 0 { (gram.clone() + gram.adjoint()).scale(0.5).cholesky() } else { None };
    match chol {
        Some(c) => {
            let w = c.l().adjoint();
            let w_inv = w.clone().try_inverse().expect("cholesky factor is invertible");
            let images = lm.iter().map(|l| &w * l * &w_inv).collect();
            Representation { size: n, images, faithful: injective }
        }
        None => Representation { size: n, images: lm, faithful: n == 0 },
    }
}

/// Multiplicativity and \*-preservation on basis elements.
pub fn check_representation(a: &StarAlgebra, r: &Representation, tol: f64) -> ValidationReport {
    let mut rep = ValidationReport::new("representation");
    let n = a.dim();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let lhs = r.image(&a.basis_product(i, j));
            let rhs = &r.images[i] * &r.images[j];
            let res = (&lhs - &rhs).camax();
            worst = worst.max(res);
            if res > tol {
                rep.push_capped("multiplicative", format!("residual {res:.3e}"), format!("({}, {})", a.labels[i], a.labels[j]));
            }
        }
    }
    rep.record("multiplicative", n * n, worst);
    let mut worst: f64 = 0.0;
    for i in 0..n {
        let lhs = r.image(&a.adjoint(&basis_vec(n, i)));
        let res = (&lhs - r.images[i].adjoint()).camax();
        worst = worst.max(res);
        if res > tol {
            rep.push_capped("star", format!("residual {res:.3e}"), a.labels[i].clone());
        }
    }
    rep.record("star", n, worst);
    rep
}

/// Wedderburn data of a finite-dimensional \*-algebra.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StarStructureReport {
    pub dimension: usize,
    pub radical_dim: usize,
    pub center_dim: usize,
    /// Simple block sizes, ascending; empty unless `decomposed`.
    pub blocks: Vec<usize>,
    pub decomposed: bool,
    /// Semisimple, but no central element separated the blocks.
    pub indeterminate: bool,
    pub is_cstar: bool,
    pub generator_norms: Vec<f64>,
    pub seed: u64,
    pub attempts: usize,
}

impl StarStructureReport {
    pub fn render(&self) -> String {
        let blocks = if self.decomposed {
            format!("{:?}", self.blocks)
        } else if self.indeterminate {
            "indeterminate".into()
        } else {
            "n/a".into()
        };
        format!(
            "dimension {}, radical {}, center {}, blocks {}, C* {}",
            self.dimension, self.radical_dim, self.center_dim, blocks, self.is_cstar
        )
    }
}

const MAX_ATTEMPTS: usize = 8;

/// Radical from the trace form, center from the commutant equations, and
/// simple blocks from the eigenspaces of a random self-adjoint central
/// element in the regular representation.
pub fn star_structure_report(a: &StarAlgebra, tol: f64, seed: u64) -> StarStructureReport {
    let n = a.dim();
    let mut report = StarStructureReport {
        dimension: n,
        radical_dim: 0,
        center_dim: 0,
        blocks: Vec::new(),
        decomposed: false,
        indeterminate: false,
        is_cstar: false,
        generator_norms: Vec::new(),
        seed,
        attempts: 0,
    };
    if n == 0 {
        report.decomposed = true;
        report.is_cstar = true;
        return report;
    }
    let lm: Vec<CMatrix> = (0..n).map(|i| a.left_mult(&basis_vec(n, i))).collect();
    let traces: Vec<C64> = lm.iter().map(|l| l.trace()).collect();
    let bilinear = CMatrix::from_fn(n, n, |i, j| a.basis_product(i, j).iter().zip(&traces).map(|(c, t)| c * t).sum());
    let rank_tol = tol.max(1e-9);
    report.radical_dim = n - rank(&bilinear, rank_tol);

    // c e_i = e_i c for all i.
    let rm: Vec<CMatrix> = (0..n).map(|i| a.right_mult(&basis_vec(n, i))).collect();
    let comm = CMatrix::from_fn(n * n, n, |r, k| {
        let (i, m) = (r / n, r % n);
        rm[i][(m, k)] - lm[i][(m, k)]
    });
    let center = nullspace(&comm, rank_tol);
    report.center_dim = center.ncols();

    let rep = regular_representation(a);
    report.is_cstar = report.radical_dim == 0 && rep.faithful;
    report.generator_norms = rep.images.iter().map(operator_norm).collect();
    if report.radical_dim > 0 || !rep.faithful {
        return report;
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for attempt in 1..=MAX_ATTEMPTS {
        report.attempts = attempt;
        let coeffs: Vec<C64> = (0..center.ncols()).map(|_| random_complex(&mut rng)).collect();
        let c: Vec<C64> = (0..n).map(|k| (0..center.ncols()).map(|j| center[(k, j)] * coeffs[j]).sum()).collect();
        let cs = a.adjoint(&c);
        let z: Vec<C64> = c.iter().zip(&cs).map(|(x, y)| x + y).collect();
        let pz = rep.image(&z);
        let h = (&pz + pz.adjoint()).scale(0.5);
        let mut eig: Vec<f64> = nalgebra::linalg::SymmetricEigen::new(h).eigenvalues.iter().copied().collect();
        eig.sort_by(f64::total_cmp);
        let scale = eig.iter().fold(1.0f64, |m, x| m.max(x.abs()));
        let merge = 1e-6 * scale;
        let mut clusters: Vec<(f64, usize)> = Vec::new();
        for x in eig {
            match clusters.last_mut() {
                Some((last, count)) if x - *last <= merge => {
                    *last = x;
                    *count += 1;
                }
                _ => clusters.push((x, 1)),
            }
        }
        let min_gap = clusters.windows(2).map(|w| w[1].0 - w[0].0).fold(f64::INFINITY, f64::min);
        let squares: Option<Vec<usize>> = clusters
            .iter()
            .map(|&(_, m)| {
                let d = (m as f64).sqrt().round() as usize;
                (d * d == m).then_some(d)
            })
            .collect();
        match squares {
            Some(mut blocks) if blocks.len() == report.center_dim && min_gap > 1e3 * merge => {
                blocks.sort_unstable();
                report.blocks = blocks;
                report.decomposed = true;
                return report;
            }
            _ => continue,
        }
    }
    report.indeterminate = true;
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fell::FellBundle;
    use crate::groupoid::{FiniteGroup, FiniteGroupoid};
    use crate::linalg::{DEFAULT_TOL, ONE};
    use crate::star::section_algebra;

    #[test]
    fn complex_numbers() {
        let r = star_structure_report(&StarAlgebra::complex(), DEFAULT_TOL, 0);
        assert_eq!(r.blocks, vec![1]);
        assert_eq!(r.center_dim, 1);
        assert!(r.is_cstar);
        let rep = regular_representation(&StarAlgebra::complex());
        assert_eq!(rep.size, 1);
    }

    #[test]
    fn pair_groupoid_is_one_block() {
        let a = section_algebra(&FellBundle::line(FiniteGroupoid::pair(3).unwrap()));
        let r = star_structure_report(&a, DEFAULT_TOL, 0);
        assert_eq!((r.blocks.clone(), r.center_dim, r.radical_dim), (vec![3], 1, 0));
        assert_eq!(r.blocks.iter().map(|d| d * d).sum::<usize>() + r.radical_dim, r.dimension);
    }

    #[test]
    fn cyclic_group_splits_into_characters() {
        let a = StarAlgebra::group_algebra(&FiniteGroup::cyclic(3).unwrap());
        let r = star_structure_report(&a, DEFAULT_TOL, 0);
        assert_eq!((r.blocks.clone(), r.center_dim), (vec![1, 1, 1], 3));
    }

    #[test]
    fn symmetric_group_blocks() {
        // Irreducible degrees of S3 are 1, 1, 2.
        let a = StarAlgebra::group_algebra(&FiniteGroup::symmetric(3).unwrap());
        let r = star_structure_report(&a, DEFAULT_TOL, 7);
        assert_eq!((r.blocks.clone(), r.center_dim), (vec![1, 1, 2], 3));
    }

    #[test]
    fn regular_representation_of_m2() {
        let a = section_algebra(&FellBundle::line(FiniteGroupoid::pair(2).unwrap()));
        let rep = regular_representation(&a);
        assert!(rep.faithful);
        assert_eq!(rep.size, 4);
        assert!(check_representation(&a, &rep, DEFAULT_TOL).is_ok());
        for (i, img) in rep.images.iter().enumerate() {
            assert!((operator_norm(img) - 1.0).abs() < 1e-9, "e{i}");
        }
    }

    #[test]
    fn nilpotent_radical_is_flagged() {
        // span{1, e} with e² = 0 and e* = e is a *-algebra with radical span{e}.
        let n = 2;
        let mut t = crate::linalg::Tensor3::zeros(n, n, n);
        t.set(0, 0, 0, ONE);
        t.set(1, 0, 1, ONE);
        t.set(1, 1, 0, ONE);
        let a = StarAlgebra::from_tensor(vec!["1".into(), "e".into()], &t, CMatrix::identity(2, 2), "dual numbers");
        let r = star_structure_report(&a, DEFAULT_TOL, 0);
        assert_eq!(r.radical_dim, 1);
        assert!(!r.is_cstar);
        assert!(!regular_representation(&a).faithful);
    }
}
