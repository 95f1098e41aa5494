use super::{check_star_homomorphism, section_algebra, StarAlgebra};
use crate::error::{Error, Result};
use crate::fell::{make_trivial_cbundle, quotient_fell_bundle, BundleAction, QuotientBundle};
use crate::groupoid::{Arrow, FiniteGroup, GroupAction, Side};
use crate::linalg::{basis_vec, mat_vec, max_abs_diff, CMatrix, C64, ZERO};
use crate::report::ValidationReport;

/// `Ind_H^X B`: maps `f: X → B` with `f(x·h) = τ_h⁻¹(f(x))`, stored by
/// their values on orbit representatives, together with the identification
/// `θ(f)(x·H) = (f(x), x)·H` with the sections of `(B×X)/H`.
#[derive(Debug, Clone)]
pub struct InducedAlgebra {
    pub algebra: StarAlgebra,
    /// `B × X` with the diagonal action `(b, x)·h = (τ_h⁻¹(b), x·h)`.
    pub diagonal: BundleAction,
    pub quotient: QuotientBundle,
    pub sections: StarAlgebra,
    /// `evaluation[x]` is the matrix of `f ↦ f(x)`.
    pub evaluation: Vec<CMatrix>,
    pub theta: CMatrix,
    pub report: ValidationReport,
}

impl InducedAlgebra {
    pub fn is_verified(&self) -> bool {
        self.report.is_ok()
    }

    pub fn n_orbits(&self) -> usize {
        self.quotient.quotient.rep.len()
    }
}

fn check_group_of_automorphisms(b: &StarAlgebra, group: &FiniteGroup, maps: &[CMatrix], tol: f64) -> Result<()> {
    if maps.len() != group.order() {
        return Err(Error::InvalidArgument("need one automorphism per group element".into()));
    }
    for t in group.elements() {
        let rep = check_star_homomorphism(b, b, &maps[t], true, tol);
        if !rep.is_ok() {
            return Err(Error::Precondition(format!("{} is not a *-automorphism: {rep}", group.label(t))));
        }
        for s in group.elements() {
            if (&maps[s] * &maps[t] - &maps[group.mul(s, t)]).camax() > tol {
                return Err(Error::Precondition(format!(
                    "automorphisms violate the group law at ({}, {})",
                    group.label(s),
                    group.label(t)
                )));
            }
        }
    }
    Ok(())
}

/// Builds `Ind_H^X B` for a free right action `right[h][x] = x·h` and an
/// action `τ` of `H` on `B` by \*-automorphisms, and verifies `θ` as a
/// \*-isomorphism onto the section algebra of the orbit bundle.
pub fn induced_algebra(
    b: &StarAlgebra,
    points: Vec<String>,
    group: &FiniteGroup,
    right: &[Vec<usize>],
    tau: &[CMatrix],
    tol: f64,
) -> Result<InducedAlgebra> {
    check_group_of_automorphisms(b, group, tau, tol)?;
    let npts = points.len();
    if right.len() != group.order() || right.iter().any(|r| r.len() != npts || r.iter().any(|&y| y >= npts)) {
        return Err(Error::InvalidArgument("action table has the wrong shape".into()));
    }
    let bundle = make_trivial_cbundle(b, points, tol)?;
    let base = GroupAction::from_fn(group.clone(), bundle.base.clone(), Side::Right, |h, x| Arrow(right[h][x.0]))?;
    let diagonal = BundleAction::from_fn(bundle, base, |h, _| tau[group.inv(h)].clone())?;
    let quotient = quotient_fell_bundle(&diagonal)?;
    let q = &quotient.quotient;
    let d = b.dim();
    let m = q.rep.len();
    let n = m * d;

    let mut products = vec![Vec::new(); n * n];
    let mut star = CMatrix::zeros(n, n);
    let mut labels = Vec::with_capacity(n);
    for o in 0..m {
        let r = q.rep[o];
        for i in 0..d {
            labels.push(format!("{}@{}", b.labels[i], diagonal.bundle.base.label(r)));
            for j in 0..d {
                star[(o * d + i, o * d + j)] = b.star[(i, j)];
                products[(o * d + i) * n + o * d + j] = b.products[i * d + j].iter().map(|&(k, c)| (o * d + k, c)).collect();
            }
        }
    }
    let algebra = StarAlgebra { labels, basis: Vec::new(), products, star, provenance: "induced algebra".into() };

    let act = &diagonal.base_action;
    let mut evaluation = Vec::with_capacity(npts);
    for x in 0..npts {
        let o = q.class_of[x].0;
        let r = q.rep[o];
        let h0 = group
            .elements()
            .find(|&h| act.apply(h, r) == Arrow(x))
            .ok_or_else(|| Error::Internal("point outside its orbit".into()))?;
        let mut e = CMatrix::zeros(d, n);
        e.view_mut((0, o * d), (d, d)).copy_from(&tau[group.inv(h0)]);
        evaluation.push(e);
    }

    let mut report = ValidationReport::new("induced algebra");
    let fs: Vec<Vec<C64>> = (0..n).map(|k| basis_vec(n, k)).collect();
    let mut worst: f64 = 0.0;
    for f in &fs {
        for x in 0..npts {
            let fx = mat_vec(&evaluation[x], f);
            for h in group.elements() {
                let lhs = mat_vec(&evaluation[right[h][x]], f);
                let res = max_abs_diff(&lhs, &mat_vec(&tau[group.inv(h)], &fx));
                worst = worst.max(res);
                if res > tol {
                    report.push_capped("equivariant", format!("f(x·h) != τ_h⁻¹ f(x), residual {res:.3e}"), format!("x={x}, h={}", group.label(h)));
                }
            }
        }
    }
    report.record("equivariant", n * npts * group.order(), worst);
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let fg = algebra.basis_product(i, j);
            for ev in &evaluation {
                let res = max_abs_diff(&mat_vec(ev, &fg), &b.mul(&mat_vec(ev, &fs[i]), &mat_vec(ev, &fs[j])));
                worst = worst.max(res);
                if res > tol {
                    report.push_capped("pointwise", format!("residual {res:.3e}"), format!("({}, {})", algebra.labels[i], algebra.labels[j]));
                }
            }
        }
        for ev in &evaluation {
            let res = max_abs_diff(&mat_vec(ev, &algebra.adjoint(&fs[i])), &b.adjoint(&mat_vec(ev, &fs[i])));
            worst = worst.max(res);
            if res > tol {
                report.push_capped("pointwise", format!("star residual {res:.3e}"), algebra.labels[i].clone());
            }
        }
    }
    report.record("pointwise", n * n * npts, worst);

    let sections = section_algebra(&quotient.bundle);
    let offsets = quotient.bundle.offsets();
    let mut theta = CMatrix::zeros(sections.dim(), n);
    let mut worst: f64 = 0.0;
    for (k, f) in fs.iter().enumerate() {
        let mut col: Vec<Option<Vec<C64>>> = vec![None; m];
        for x in 0..npts {
            let (o, v) = quotient.project(Arrow(x), &mat_vec(&evaluation[x], f));
            match &col[o.0] {
                Some(prev) => {
                    let res = max_abs_diff(prev, &v);
                    worst = worst.max(res);
                    if res > tol {
                        report.push_capped("theta well-defined", format!("residual {res:.3e}"), format!("f={}, x={x}", algebra.labels[k]));
                    }
                }
                None => col[o.0] = Some(v),
            }
        }
        for (o, v) in col.into_iter().enumerate() {
            for (i, c) in v.unwrap_or_default().into_iter().enumerate() {
                if c != ZERO {
                    theta[(offsets[o] + i, k)] = c;
                }
            }
        }
    }
    report.record("theta well-defined", n * npts, worst);
    let iso = check_star_homomorphism(&algebra, &sections, &theta, true, tol);
    for v in iso.violations {
        report.push_capped("theta", format!("{}: {}", v.check, v.message), v.witness);
    }
    report.record("theta", iso.checks.iter().map(|c| c.cases).sum(), iso.checks.iter().map(|c| c.max_residual).fold(0.0, f64::max));
    Ok(InducedAlgebra { algebra, diagonal, quotient, sections, evaluation, theta, report })
}

/// `(ind σ_t f)(x) = σ_t(f(t⁻¹·x))` for a left action `left[t][x] = t·x`
/// commuting with the inducing one; returns one matrix per group element.
pub fn induced_action(ind: &InducedAlgebra, group: &FiniteGroup, left: &[Vec<usize>], sigma: &[CMatrix], tol: f64) -> Result<Vec<CMatrix>> {
    let q = &ind.quotient.quotient;
    let n = ind.algebra.dim();
    let d = sigma.first().map_or(0, |s| s.nrows());
    let npts = ind.evaluation.len();
    let mut out = Vec::with_capacity(group.order());
    for t in group.elements() {
        let ti = group.inv(t);
        let mut m = CMatrix::zeros(n, n);
        for (o, &r) in q.rep.iter().enumerate() {
            let block = &sigma[t] * &ind.evaluation[left[ti][r.0]];
            m.view_mut((o * d, 0), (d, n)).copy_from(&block);
        }
        for x in 0..npts {
            let lhs = &ind.evaluation[x] * &m;
            let rhs = &sigma[t] * &ind.evaluation[left[ti][x]];
            if (&lhs - &rhs).camax() > tol {
                return Err(Error::NotCommuting {
                    witness: format!("ind σ_{} leaves the induced algebra at point {x}", group.label(t)),
                });
            }
        }
        out.push(m);
    }
    Ok(out)
}

/// The action `(α_t f)(x) = t·f(t⁻¹·x)` on the section algebra of the
/// acted-on bundle, one matrix per group element.
pub fn section_action(ba: &BundleAction) -> Result<Vec<CMatrix>> {
    ba.base_action.require_side(Side::Left)?;
    let b = &ba.bundle;
    let offsets = b.offsets();
    let n = b.total_dim();
    let mut out = Vec::with_capacity(ba.group().order());
    for t in ba.group().elements() {
        let mut m = CMatrix::zeros(n, n);
        for y in b.base.arrows() {
            let ty = ba.base_action.apply(t, y);
            m.view_mut((offsets[ty.0], offsets[y.0]), (b.dim(ty), b.dim(y))).copy_from(ba.map(t, y));
        }
        out.push(m);
    }
    Ok(out)
}
