//! Fell bundles with finite-dimensional fibers over finite groupoids, group
//! actions on them, the bundle-level constructions (transformation,
//! semidirect and orbit bundles), and equivalence bimodules.

mod action;
mod construct;
mod equivalence;
mod module;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::groupoid::{check_homomorphism, Arrow, FiniteGroupoid, Unit};
use crate::linalg::{basis_vec, conj_matrix, conj_vec, eigenvalues, identity, left_mult_matrix, mat_vec, max_abs_diff, CMatrix, Tensor3, C64, ONE};
use crate::report::ValidationReport;
use crate::star::StarAlgebra;

pub use action::{check_bundle_action, is_free_bundle_action, BundleAction};
pub use construct::{
    orbit_bundle_action, principal_fell_decomposition, quotient_fell_bundle, semidirect_fell_bundle,
    semidirect_fell_bundle_right, semidirect_orbit_bundle_action, transformation_fell_bundle,
    verify_principal_fell_decomposition, verify_quotient_bundle, PrincipalFellDecomposition, QuotientBundle,
    SemidirectOrbitAction,
};
pub use equivalence::{
    one_sided_equivalence, one_sided_transformation_equivalence, symmetric_action_equivalence,
    verify_bundle_equivalence, BundleEquivalence, OneSidedBundleEquivalence, SymmetricBundleEquivalence,
    TransformationBundleEquivalence,
};
pub use module::{check_module_action, ModuleAction};

/// A Fell bundle over a finite groupoid, given by structure constants.
///
/// `mult[x * n + y]` is the bilinear map `A(x) × A(y) → A(xy)` for composable
/// pairs; `star[x]` is the matrix `S` of the antilinear involution
/// `A(x) → A(x⁻¹)`, `a* = S·conj(a)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FellBundle {
    pub base: FiniteGroupoid,
    pub dim: Vec<usize>,
    pub mult: Vec<Option<Tensor3>>,
    pub star: Vec<CMatrix>,
}

/// An element of one fiber of a bundle.
#[derive(Debug, Clone, PartialEq)]
pub struct BundleElement {
    pub arrow: Arrow,
    pub coeffs: Vec<C64>,
}

impl FellBundle {
    #[inline]
    pub fn dim(&self, x: Arrow) -> usize {
        self.dim[x.0]
    }

    #[inline]
    pub fn mult(&self, x: Arrow, y: Arrow) -> &Tensor3 {
        self.mult[x.0 * self.base.n_arrows() + y.0]
            .as_ref()
            .expect("multiplication tensor for a composable pair")
    }

    pub fn mult_opt(&self, x: Arrow, y: Arrow) -> Option<&Tensor3> {
        self.mult[x.0 * self.base.n_arrows() + y.0].as_ref()
    }

    #[inline]
    pub fn star_matrix(&self, x: Arrow) -> &CMatrix {
        &self.star[x.0]
    }

    /// `a*` for `a ∈ A(x)`, an element of `A(x⁻¹)`.
    pub fn star_of(&self, x: Arrow, a: &[C64]) -> Vec<C64> {
        mat_vec(&self.star[x.0], &conj_vec(a))
    }

    pub fn multiply(&self, a: &BundleElement, b: &BundleElement) -> Option<BundleElement> {
        let xy = self.base.comp(a.arrow, b.arrow)?;
        Some(BundleElement {
            arrow: xy,
            coeffs: self.mult(a.arrow, b.arrow).apply(&a.coeffs, &b.coeffs),
        })
    }

    pub fn adjoint(&self, a: &BundleElement) -> BundleElement {
        BundleElement {
            arrow: self.base.inv(a.arrow),
            coeffs: self.star_of(a.arrow, &a.coeffs),
        }
    }

    /// Total dimension `Σ_x dim A(x)`.
    pub fn total_dim(&self) -> usize {
        self.dim.iter().sum()
    }

    /// Offsets of each fiber in the concatenated section space.
    pub fn offsets(&self) -> Vec<usize> {
        let mut off = Vec::with_capacity(self.dim.len());
        let mut acc = 0;
        for d in &self.dim {
            off.push(acc);
            acc += d;
        }
        off
    }

    /// The bundle with fiber `ℂ` everywhere and scalar multiplication.
    pub fn line(base: FiniteGroupoid) -> Self {
        Self::constant(base, Tensor3::scalar(), CMatrix::from_element(1, 1, ONE))
    }

    /// Every fiber equal to one algebra with product `mult` and involution
    /// `star`.
    pub fn constant(base: FiniteGroupoid, mult: Tensor3, star: CMatrix) -> Self {
        let n = base.n_arrows();
        let d = mult.out;
        let mut table = vec![None; n * n];
        for (x, y) in base.composable_pairs() {
            table[x.0 * n + y.0] = Some(mult.clone());
        }
        FellBundle {
            base,
            dim: vec![d; n],
            mult: table,
            star: vec![star; n],
        }
    }

    /// The bundle whose fibers are the unit-fiber algebra `A(u)` of `self`
    /// at a unit, viewed as a single algebra.
    pub fn unit_fiber(&self, u: Unit) -> (Tensor3, CMatrix) {
        let e = self.base.unit_arrow(u);
        (self.mult(e, e).clone(), self.star[e.0].clone())
    }

    /// Pullback along a groupoid homomorphism `f: Y → X` given on arrows.
    pub fn pullback(&self, y: &FiniteGroupoid, f: &[Arrow]) -> Result<FellBundle> {
        let rep = check_homomorphism(y, &self.base, f, false);
        if !rep.is_ok() {
            return Err(Error::Precondition(format!("not a homomorphism:\n{rep}")));
        }
        let n = y.n_arrows();
        let mut mult = vec![None; n * n];
        for (a, b) in y.composable_pairs() {
            mult[a.0 * n + b.0] = Some(self.mult(f[a.0], f[b.0]).clone());
        }
        Ok(FellBundle {
            base: y.clone(),
            dim: f.iter().map(|&x| self.dim(x)).collect(),
            mult,
            star: f.iter().map(|&x| self.star[x.0].clone()).collect(),
        })
    }

    /// The C\*-norm of `a ∈ A(x)`: `‖a‖² = ‖a*a‖`, computed as the spectral
    /// radius of left multiplication by `a*a` on the unit fiber `A(s(x))`.
    pub fn fiber_norm(&self, x: Arrow, a: &[C64]) -> f64 {
        let xi = self.base.inv(x);
        let astar = self.star_of(x, a);
        let c = self.mult(xi, x).apply(&astar, a);
        let e = self.base.unit_arrow(self.base.src(x));
        let l = left_mult_matrix(self.mult(e, e), &c);
        eigenvalues(&l).iter().map(|z| z.norm()).fold(0.0, f64::max).sqrt()
    }
}

/// Builds `B × X`: the constant bundle with fiber `B` over the set `X`
/// viewed as a groupoid of units. `B` must certify as a C\*-algebra.
pub fn make_trivial_cbundle(b: &StarAlgebra, points: Vec<String>, tol: f64) -> Result<FellBundle> {
    let report = crate::star::star_structure_report(b, tol, 0);
    if !report.is_cstar {
        return Err(Error::NotCStar(format!(
            "fiber algebra is not certified C*: radical dimension {}",
            report.radical_dim
        )));
    }
    Ok(FellBundle::constant(
        FiniteGroupoid::unit_space(points),
        b.structure_tensor(),
        b.star_matrix(),
    ))
}

/// Exhaustive check of the bundle axioms to tolerance `tol`.
pub fn validate_fell_bundle(b: &FellBundle, tol: f64) -> ValidationReport {
    let mut rep = ValidationReport::new("Fell bundle");
    let g = &b.base;
    let n = g.n_arrows();
    if b.dim.len() != n || b.mult.len() != n * n || b.star.len() != n {
        rep.fail("tables", "table sizes disagree with the base", format!("arrows={n}"));
        return rep;
    }
    for x in g.arrows() {
        let xi = g.inv(x);
        if b.dim(x) != b.dim(xi) {
            rep.push_capped("dimension", "dim A(x) != dim A(x⁻¹)", g.label(x).to_string());
        }
        let s = &b.star[x.0];
        if s.nrows() != b.dim(xi) || s.ncols() != b.dim(x) {
            rep.push_capped("tables", "star matrix has wrong shape", g.label(x).to_string());
        }
        for y in g.arrows() {
            let t = &b.mult[x.0 * n + y.0];
            match (g.comp(x, y), t) {
                (Some(xy), Some(t)) => {
                    if t.out != b.dim(xy) || t.left != b.dim(x) || t.right != b.dim(y) {
                        rep.push_capped("tables", "multiplication tensor has wrong shape", format!("({}, {})", g.label(x), g.label(y)));
                    }
                }
                (Some(_), None) => rep.push_capped("tables", "missing multiplication tensor", format!("({}, {})", g.label(x), g.label(y))),
                (None, Some(_)) => rep.push_capped("tables", "tensor on a non-composable pair", format!("({}, {})", g.label(x), g.label(y))),
                (None, None) => {}
            }
        }
    }
    if !rep.is_ok() {
        return rep;
    }

    let mut worst: f64 = 0.0;
    let mut cases = 0;
    for x in g.arrows() {
        for y in g.arrows() {
            let Some(xy) = g.comp(x, y) else { continue };
            for z in g.arrows() {
                let Some(yz) = g.comp(y, z) else { continue };
                let (l1, l2) = (b.mult(x, y), b.mult(xy, z));
                let (r1, r2) = (b.mult(y, z), b.mult(x, yz));
                let mut res: f64 = 0.0;
                for i in 0..b.dim(x) {
                    for j in 0..b.dim(y) {
                        let ab = l1.basis_image(i, j);
                        for k in 0..b.dim(z) {
                            let lhs = l2.apply(&ab, &basis_vec(b.dim(z), k));
                            let rhs = r2.apply(&basis_vec(b.dim(x), i), &r1.basis_image(j, k));
                            res = res.max(max_abs_diff(&lhs, &rhs));
                        }
                    }
                }
                cases += 1;
                worst = worst.max(res);
                if res > tol {
                    rep.push_capped(
                        "associativity",
                        format!("(ab)c != a(bc), residual {res:.3e}"),
                        format!("({}, {}, {})", g.label(x), g.label(y), g.label(z)),
                    );
                }
            }
        }
    }
    rep.record("associativity", cases, worst);

    let mut worst: f64 = 0.0;
    for x in g.arrows() {
        let xi = g.inv(x);
        let lhs = &b.star[xi.0] * conj_matrix(&b.star[x.0]);
        let res = (lhs - identity(b.dim(x))).camax();
        worst = worst.max(res);
        if res > tol {
            rep.push_capped("involution", format!("a** != a, residual {res:.3e}"), g.label(x).to_string());
        }
    }
    rep.record("involution", n, worst);

    let mut worst: f64 = 0.0;
    let mut cases = 0;
    for (x, y) in g.composable_pairs() {
        let xy = g.mul(x, y);
        let (xi, yi) = (g.inv(x), g.inv(y));
        let t = b.mult(x, y);
        let ts = b.mult(yi, xi);
        let mut res: f64 = 0.0;
        for i in 0..b.dim(x) {
            let ai = b.star[x.0].column(i).iter().copied().collect::<Vec<_>>();
            for j in 0..b.dim(y) {
                let bj = b.star[y.0].column(j).iter().copied().collect::<Vec<_>>();
                let lhs = b.star_of(xy, &t.basis_image(i, j));
                let rhs = ts.apply(&bj, &ai);
                res = res.max(max_abs_diff(&lhs, &rhs));
            }
        }
        cases += 1;
        worst = worst.max(res);
        if res > tol {
            rep.push_capped(
                "anti-multiplicative",
                format!("(ab)* != b*a*, residual {res:.3e}"),
                format!("({}, {})", g.label(x), g.label(y)),
            );
        }
    }
    rep.record("anti-multiplicative", cases, worst);
    rep.note("C*-property", "unit fibers are certified separately by the star-structure report");
    rep
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groupoid::{transformation_groupoid, SpaceAction};
    use crate::linalg::DEFAULT_TOL;

    #[test]
    fn line_bundles_are_valid() {
        let t = FellBundle::line(FiniteGroupoid::trivial());
        assert!(validate_fell_bundle(&t, DEFAULT_TOL).is_ok());
        let b = FellBundle::line(FiniteGroupoid::pair(3).unwrap());
        let rep = validate_fell_bundle(&b, DEFAULT_TOL);
        assert!(rep.is_ok());
        assert_eq!(rep.checks.iter().find(|c| c.name == "associativity").unwrap().cases, 81);
    }

    #[test]
    fn negated_star_breaks_involution() {
        let mut b = FellBundle::line(FiniteGroupoid::pair(3).unwrap());
        let x = b.base.arrow_by_label("(1,2)").unwrap();
        b.star[x.0] = -b.star[x.0].clone();
        let rep = validate_fell_bundle(&b, DEFAULT_TOL);
        assert!(!rep.check_passed("involution"));
        assert!(rep.violations_of("involution").any(|v| v.witness == "(1,2)" || v.witness == "(2,1)"));
    }

    #[test]
    fn trivial_cbundle_dimensions() {
        let c = StarAlgebra::matrix(1);
        let line = make_trivial_cbundle(&c, vec!["x".into()], DEFAULT_TOL).unwrap();
        assert_eq!(line.dim, vec![1]);
        let m2 = StarAlgebra::matrix(2);
        let b = make_trivial_cbundle(&m2, vec!["x".into(), "y".into()], DEFAULT_TOL).unwrap();
        assert_eq!(b.dim, vec![4, 4]);
        assert!(validate_fell_bundle(&b, DEFAULT_TOL).is_ok());
        assert_eq!(b.mult(Arrow(1), Arrow(1)), &m2.structure_tensor());
    }

    #[test]
    fn pullback_identity_and_projection() {
        let x = FiniteGroupoid::pair(2).unwrap();
        let a = FellBundle::line(x.clone());
        let id: Vec<Arrow> = x.arrows().collect();
        assert_eq!(a.pullback(&x, &id).unwrap(), a);

        // Range-parametrised transformation groupoid (x, v) with r = v and
        // s = x⁻¹·v, compared with the source-parametrised one through
        // (x, u) ↦ (x, x·u).
        let act = SpaceAction::left_translation(&x);
        let t = transformation_groupoid(&act).unwrap();
        let trans = crate::fell::transformation_fell_bundle(&a, &act).unwrap().1;
        let pairs: Vec<(Arrow, usize)> = t.pairs.iter().map(|&(y, u)| (y, act.act(y, u).unwrap())).collect();
        let index = |p: (Arrow, usize)| Arrow(pairs.iter().position(|&q| q == p).unwrap());
        let n = act.n_points();
        let r = FiniteGroupoid::from_fn(
            pairs.iter().map(|(y, v)| format!("<{},{}>", x.label(*y), v)).collect(),
            act.point_labels.clone(),
            (0..n).map(|u| index((x.unit_arrow(act.fibring[u]), u))).collect(),
            pairs.iter().map(|&(y, v)| Unit(act.act(x.inv(y), v).unwrap())).collect(),
            pairs.iter().map(|&(_, v)| Unit(v)).collect(),
            pairs.iter().map(|&(y, v)| index((x.inv(y), act.act(x.inv(y), v).unwrap()))).collect(),
            |p, q| index((x.mul(pairs[p.0].0, pairs[q.0].0), pairs[p.0].1)),
        )
        .unwrap();
        let proj: Vec<Arrow> = pairs.iter().map(|p| p.0).collect();
        let pulled = a.pullback(&r, &proj).unwrap();
        assert!(validate_fell_bundle(&pulled, DEFAULT_TOL).is_ok());
        let phi: Vec<Arrow> = t.pairs.iter().map(|&(y, u)| index((y, act.act(y, u).unwrap()))).collect();
        assert!(check_homomorphism(&t.groupoid, &r, &phi, true).is_ok());
        for (p, q) in t.groupoid.composable_pairs() {
            assert_eq!(trans.mult(p, q), pulled.mult(phi[p.0], phi[q.0]));
        }
        for p in t.groupoid.arrows() {
            assert_eq!(trans.dim(p), pulled.dim(phi[p.0]));
            assert_eq!(trans.star[p.0], pulled.star[phi[p.0].0]);
        }
    }

    #[test]
    fn fiber_norm_of_matrix_unit() {
        let m2 = StarAlgebra::matrix(2);
        let b = FellBundle::constant(FiniteGroupoid::trivial(), m2.structure_tensor(), m2.star_matrix());
        let e01 = basis_vec(4, 1);
        assert!((b.fiber_norm(Arrow(0), &e01) - 1.0).abs() < 1e-9);
        let two_id: Vec<C64> = [2.0, 0.0, 0.0, 2.0].iter().map(|&v| C64::new(v, 0.0)).collect();
        assert!((b.fiber_norm(Arrow(0), &two_id) - 2.0).abs() < 1e-9);
    }
}
