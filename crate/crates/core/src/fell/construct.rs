use super::action::bundle_commute_witness;
use super::{check_bundle_action, validate_fell_bundle, BundleAction, FellBundle, ModuleAction};
use crate::error::{Error, Result};
use crate::groupoid::{
    orbit_space_action, principal_decomposition, quotient_groupoid, require_free, semidirect_left, semidirect_right,
    semidirect_space_action, transformation_groupoid, unique, verify_principal_decomposition, Arrow, GroupAction,
    PrincipalDecomposition, Quotient, Semidirect, Side, SpaceAction, Transformation,
};
use crate::linalg::{basis_vec, conj_matrix, identity, mat_vec, max_abs_diff, rank, CMatrix, DEFAULT_TOL};
use crate::report::ValidationReport;

fn require_valid(ba: &BundleAction, side: Side) -> Result<()> {
    ba.base_action.require_side(side)?;
    let rep = check_bundle_action(ba, DEFAULT_TOL);
    if rep.is_ok() {
        Ok(())
    } else {
        Err(Error::InvalidBundle(rep))
    }
}

/// The bundle `𝒜∗Ω` over `𝒳∗Ω`: fiber `A(x)` at `(x, u)`,
/// `(a, p(b)·u)(b, u) = (ab, u)` and `(a, u)* = (a*, p(a)·u)`.
pub fn transformation_fell_bundle(a: &FellBundle, act: &SpaceAction) -> Result<(Transformation, FellBundle)> {
    if act.groupoid != a.base {
        return Err(Error::InvalidArgument("action is not on the bundle's base".into()));
    }
    let t = transformation_groupoid(act)?;
    let n = t.groupoid.n_arrows();
    let mut mult = vec![None; n * n];
    for (p, q) in t.groupoid.composable_pairs() {
        mult[p.0 * n + q.0] = Some(a.mult(t.pairs[p.0].0, t.pairs[q.0].0).clone());
    }
    let bundle = FellBundle {
        dim: t.pairs.iter().map(|&(x, _)| a.dim(x)).collect(),
        star: t.pairs.iter().map(|&(x, _)| a.star[x.0].clone()).collect(),
        mult,
        base: t.groupoid.clone(),
    };
    Ok((t, bundle))
}

/// `𝒜⋊G` over `𝒳⋊G`: `(a,s)(b,t) = (a(s·b), st)`, `(a,s)* = (s⁻¹·a*, s⁻¹)`.
pub fn semidirect_fell_bundle(ba: &BundleAction) -> Result<(Semidirect, FellBundle)> {
    require_valid(ba, Side::Left)?;
    let sd = semidirect_left(&ba.base_action)?;
    let a = &ba.bundle;
    let x = &a.base;
    let grp = ba.group();
    let n = sd.groupoid.n_arrows();
    let mut mult = vec![None; n * n];
    for (p, q) in sd.groupoid.composable_pairs() {
        let (y, s) = sd.split(p);
        let (z, _) = sd.split(q);
        let sz = ba.base_action.apply(s, z);
        let m = a.mult(y, sz).transform(&identity(a.dim(x.mul(y, sz))), &identity(a.dim(y)), ba.map(s, z));
        mult[p.0 * n + q.0] = Some(m);
    }
    let mut dim = Vec::with_capacity(n);
    let mut star = Vec::with_capacity(n);
    for p in sd.groupoid.arrows() {
        let (y, s) = sd.split(p);
        dim.push(a.dim(y));
        star.push(ba.map(grp.inv(s), x.inv(y)) * a.star_matrix(y));
    }
    let bundle = FellBundle { base: sd.groupoid.clone(), dim, mult, star };
    Ok((sd, bundle))
}

/// `H⋉𝒜` over `H⋉𝒳`: `(s,a)(t,b) = (st, (a·t)b)`, `(s,a)* = (s⁻¹, a*·s⁻¹)`.
pub fn semidirect_fell_bundle_right(ba: &BundleAction) -> Result<(Semidirect, FellBundle)> {
    require_valid(ba, Side::Right)?;
    let sd = semidirect_right(&ba.base_action)?;
    let a = &ba.bundle;
    let x = &a.base;
    let grp = ba.group();
    let n = sd.groupoid.n_arrows();
    let mut mult = vec![None; n * n];
    for (p, q) in sd.groupoid.composable_pairs() {
        let (y, _) = sd.split(p);
        let (z, t) = sd.split(q);
        let yt = ba.base_action.apply(t, y);
        let m = a.mult(yt, z).transform(&identity(a.dim(x.mul(yt, z))), ba.map(t, y), &identity(a.dim(z)));
        mult[p.0 * n + q.0] = Some(m);
    }
    let mut dim = Vec::with_capacity(n);
    let mut star = Vec::with_capacity(n);
    for p in sd.groupoid.arrows() {
        let (y, s) = sd.split(p);
        dim.push(a.dim(y));
        star.push(ba.map(grp.inv(s), x.inv(y)) * a.star_matrix(y));
    }
    let bundle = FellBundle { base: sd.groupoid.clone(), dim, mult, star };
    Ok((sd, bundle))
}

/// The orbit bundle `𝒜/H` of a free right action. The fiber over an orbit is
/// the fiber over its representative; `to_rep[x]` moves `A(x)` there.
#[derive(Debug, Clone)]
pub struct QuotientBundle {
    pub quotient: Quotient,
    pub bundle: FellBundle,
    pub to_rep: Vec<CMatrix>,
}

impl QuotientBundle {
    /// The image `a·H` of `a ∈ A(x)` in the fiber over `x·H`.
    pub fn project(&self, x: Arrow, a: &[crate::linalg::C64]) -> (Arrow, Vec<crate::linalg::C64>) {
        (self.quotient.class_of[x.0], mat_vec(&self.to_rep[x.0], a))
    }
}

/// `(a·H)(b·H) = (ab)·H` and `(a·H)* = a*·H`, computed on representatives.
pub fn quotient_fell_bundle(ba: &BundleAction) -> Result<QuotientBundle> {
    require_valid(ba, Side::Right)?;
    require_free(&ba.base_action)?;
    let act = &ba.base_action;
    let a = &ba.bundle;
    let x = &a.base;
    let grp = ba.group();
    let q = quotient_groupoid(act)?;
    let mut to_rep = Vec::with_capacity(x.n_arrows());
    for y in x.arrows() {
        let r = q.rep[q.class_of[y.0].0];
        let h0 = unique(grp.elements().filter(|&h| act.apply(h, r) == y), "orbit position")?;
        to_rep.push(ba.map(grp.inv(h0), y).clone());
    }
    let qg = &q.groupoid;
    let n = qg.n_arrows();
    let mut mult = vec![None; n * n];
    for (o1, o2) in qg.composable_pairs() {
        let (r1, r2) = (q.rep[o1.0], q.rep[o2.0]);
        let h = q.adjust_source(act, o1, x.rng(r2))?;
        let r1h = act.apply(h, r1);
        let w = x.mul(r1h, r2);
        mult[o1.0 * n + o2.0] = Some(a.mult(r1h, r2).transform(&to_rep[w.0], ba.map(h, r1), &identity(a.dim(r2))));
    }
    let dim = q.rep.iter().map(|&r| a.dim(r)).collect();
    let star = q.rep.iter().map(|&r| &to_rep[x.inv(r).0] * a.star_matrix(r)).collect();
    let bundle = FellBundle { base: qg.clone(), dim, mult, star };
    Ok(QuotientBundle { quotient: q, bundle, to_rep })
}

/// Checks that the projection `a ↦ a·H` is a bundle homomorphism on every
/// composable pair, preserves the involution and the fiber norms, and that
/// the orbit bundle satisfies the bundle axioms.
pub fn verify_quotient_bundle(ba: &BundleAction, qb: &QuotientBundle, tol: f64) -> ValidationReport {
    let mut rep = validate_fell_bundle(&qb.bundle, tol);
    rep.subject = "orbit bundle".into();
    let a = &ba.bundle;
    let x = &a.base;
    let q = &qb.quotient;
    let mut worst: f64 = 0.0;
    for (y, z) in x.composable_pairs() {
        let t = a.mult(y, z);
        let tq = qb.bundle.mult(q.class_of[y.0], q.class_of[z.0]);
        let post = &qb.to_rep[x.mul(y, z).0];
        let via_quotient = tq.transform(&identity(tq.out), &qb.to_rep[y.0], &qb.to_rep[z.0]);
        let direct = t.transform(post, &identity(a.dim(y)), &identity(a.dim(z)));
        let res = max_abs_diff(&via_quotient.data, &direct.data);
        worst = worst.max(res);
        if res > tol {
            rep.push_capped("projection-multiplicative", format!("(ab)·H != (a·H)(b·H), residual {res:.3e}"), format!("({}, {})", x.label(y), x.label(z)));
        }
    }
    rep.record("projection-multiplicative", x.n_arrows(), worst);
    let mut worst: f64 = 0.0;
    for y in x.arrows() {
        let lhs = &qb.to_rep[x.inv(y).0] * a.star_matrix(y);
        let rhs = qb.bundle.star_matrix(q.class_of[y.0]) * conj_matrix(&qb.to_rep[y.0]);
        let res = (lhs - rhs).camax();
        worst = worst.max(res);
        if res > tol {
            rep.push_capped("projection-star", format!("(a·H)* != a*·H, residual {res:.3e}"), x.label(y).to_string());
        }
        for i in 0..a.dim(y) {
            let e = basis_vec(a.dim(y), i);
            let (o, img) = qb.project(y, &e);
            let d = (qb.bundle.fiber_norm(o, &img) - a.fiber_norm(y, &e)).abs();
            if d > tol.max(1e-7) {
                rep.push_capped("projection-norm", format!("‖a·H‖ != ‖a‖ by {d:.3e}"), x.label(y).to_string());
            }
        }
    }
    rep.record("projection-star", x.n_arrows(), worst);
    rep.record("projection-norm", x.n_arrows(), 0.0);
    rep
}

/// The left action of `𝒜/H` on `𝒜`: `(a·H)·b = (a·h)b` with `h` unique such
/// that `s(a·h) = r(b)`.
pub fn orbit_bundle_action(ba: &BundleAction) -> Result<(QuotientBundle, ModuleAction)> {
    let qb = quotient_fell_bundle(ba)?;
    let (_, space) = orbit_space_action(&ba.base_action)?;
    let a = &ba.bundle;
    let x = &a.base;
    let q = &qb.quotient;
    let module = ModuleAction::build(space, qb.bundle.clone(), a.dim.clone(), |o, z| {
        let y = Arrow(z);
        let h = q.adjust_source(&ba.base_action, o, x.rng(y))?;
        let rh = ba.base_action.apply(h, q.rep[o.0]);
        Ok(a.mult(rh, y).transform(&identity(a.dim(x.mul(rh, y))), ba.map(h, q.rep[o.0]), &identity(a.dim(y))))
    })?;
    Ok((qb, module))
}

/// The pieces of the left half of the symmetric equivalence: the orbit
/// bundle `𝒜/H`, the induced `G`-action on it, the semidirect bundle
/// `(𝒜/H)⋊G`, and its action on `𝒜`.
#[derive(Debug, Clone)]
pub struct SemidirectOrbitAction {
    pub quotient: QuotientBundle,
    pub induced: BundleAction,
    pub semidirect: Semidirect,
    pub bundle: FellBundle,
    pub module: ModuleAction,
}

/// `(a·H, t)·b = (a·h)(t·b)` with `h` unique such that `s(a)·h = t·r(b)`.
pub fn semidirect_orbit_bundle_action(g: &BundleAction, h: &BundleAction) -> Result<SemidirectOrbitAction> {
    require_valid(g, Side::Left)?;
    require_valid(h, Side::Right)?;
    if g.bundle != h.bundle {
        return Err(Error::InvalidArgument("actions are on different bundles".into()));
    }
    if let Some(w) = bundle_commute_witness(g, h, DEFAULT_TOL) {
        return Err(Error::NotCommuting { witness: w });
    }
    let quotient = quotient_fell_bundle(h)?;
    let q = &quotient.quotient;
    let a = &g.bundle;
    let x = &a.base;
    let induced_base = GroupAction::from_fn(g.group().clone(), q.groupoid.clone(), Side::Left, |t, o| {
        q.class_of[g.base_action.apply(t, q.rep[o.0]).0]
    })?;
    let induced = BundleAction::from_fn(quotient.bundle.clone(), induced_base, |t, o| {
        let r = q.rep[o.0];
        &quotient.to_rep[g.base_action.apply(t, r).0] * g.map(t, r)
    })?;
    let (semidirect, bundle) = semidirect_fell_bundle(&induced)?;
    let (_, orbit) = orbit_space_action(&h.base_action)?;
    let g_on_z = SpaceAction::group_on_arrows(&g.base_action);
    let (_, space) = semidirect_space_action(&induced.base_action, &g_on_z, &orbit)?;
    let module = ModuleAction::build(space, bundle.clone(), a.dim.clone(), |p, z| {
        let (o, t) = semidirect.split(p);
        let y = Arrow(z);
        let ty = g.base_action.apply(t, y);
        let k = q.adjust_source(&h.base_action, o, x.rng(ty))?;
        let r = q.rep[o.0];
        let rk = h.base_action.apply(k, r);
        Ok(a.mult(rk, ty).transform(&identity(a.dim(x.mul(rk, ty))), h.map(k, r), g.map(t, y)))
    })?;
    Ok(SemidirectOrbitAction { quotient, induced, semidirect, bundle, module })
}

/// `𝒜 ≅ (𝒜/H)∗𝒳⁽⁰⁾` through `τ(a) = (q(a), s(p(a)))`.
#[derive(Debug, Clone)]
pub struct PrincipalFellDecomposition {
    pub decomposition: PrincipalDecomposition,
    pub quotient: QuotientBundle,
    pub transformation_bundle: FellBundle,
    /// `tau[x]`: `A(x)` onto the fiber over `θ_s(x)`.
    pub tau: Vec<CMatrix>,
}

pub fn principal_fell_decomposition(ba: &BundleAction) -> Result<PrincipalFellDecomposition> {
    let quotient = quotient_fell_bundle(ba)?;
    let decomposition = principal_decomposition(&ba.base_action)?;
    let (_, transformation_bundle) = transformation_fell_bundle(&quotient.bundle, &decomposition.action)?;
    let tau = quotient.to_rep.clone();
    Ok(PrincipalFellDecomposition { decomposition, quotient, transformation_bundle, tau })
}

/// Entrywise check that `τ` is a bijective, multiplicative, \*-preserving and
/// `H`-equivariant bundle map over the verified base isomorphism `θ_s`.
pub fn verify_principal_fell_decomposition(ba: &BundleAction, d: &PrincipalFellDecomposition, tol: f64) -> ValidationReport {
    let mut rep = verify_principal_decomposition(&ba.base_action, &d.decomposition);
    rep.subject = "principal Fell decomposition".into();
    let a = &ba.bundle;
    let x = &a.base;
    let t = &d.transformation_bundle;
    let theta = &d.decomposition.theta_s;
    for y in x.arrows() {
        let m = &d.tau[y.0];
        if m.nrows() != m.ncols() || m.nrows() != t.dim(theta[y.0]) || rank(m, 1e-9) != m.nrows() {
            rep.push_capped("tau-bijective", "fiber map is not invertible", x.label(y).to_string());
        }
    }
    rep.record("tau-bijective", x.n_arrows(), 0.0);
    let mut worst: f64 = 0.0;
    for (y, z) in x.composable_pairs() {
        let lhs = t.mult(theta[y.0], theta[z.0]).transform(&identity(t.dim(theta[x.mul(y, z).0])), &d.tau[y.0], &d.tau[z.0]);
        let rhs = a.mult(y, z).transform(&d.tau[x.mul(y, z).0], &identity(a.dim(y)), &identity(a.dim(z)));
        let res = max_abs_diff(&lhs.data, &rhs.data);
        worst = worst.max(res);
        if res > tol {
            rep.push_capped("tau-multiplicative", format!("τ(a)τ(b) != τ(ab), residual {res:.3e}"), format!("({}, {})", x.label(y), x.label(z)));
        }
    }
    rep.record("tau-multiplicative", x.n_arrows(), worst);
    let mut worst: f64 = 0.0;
    for y in x.arrows() {
        let lhs = &d.tau[x.inv(y).0] * a.star_matrix(y);
        let rhs = t.star_matrix(theta[y.0]) * conj_matrix(&d.tau[y.0]);
        let res = (lhs - rhs).camax();
        worst = worst.max(res);
        if res > tol {
            rep.push_capped("tau-star", format!("τ(a)* != τ(a*), residual {res:.3e}"), x.label(y).to_string());
        }
    }
    rep.record("tau-star", x.n_arrows(), worst);
    let mut worst: f64 = 0.0;
    for k in ba.group().elements() {
        for y in x.arrows() {
            let yk = ba.base_action.apply(k, y);
            let res = (&d.tau[yk.0] * ba.map(k, y) - &d.tau[y.0]).camax();
            worst = worst.max(res);
            if res > tol {
                rep.push_capped("tau-equivariance", format!("τ(a·h) != τ(a)·h, residual {res:.3e}"), format!("h={}, x={}", ba.group().label(k), x.label(y)));
            }
        }
    }
    rep.record("tau-equivariance", ba.group().order() * x.n_arrows(), worst);
    rep
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fell::{check_module_action, make_trivial_cbundle};
    use crate::groupoid::{FiniteGroup, FiniteGroupoid};
    use crate::linalg::{C64, ONE, ZERO};
    use crate::star::StarAlgebra;

    /// Line bundle over pair(4) with `H = Z/2` swapping (01)(23) and the
    /// fiber phase `φ(i)/φ(j)` on the arrow `(i, j)`.
    fn twisted_pair() -> BundleAction {
        let x = FiniteGroupoid::pair(4).unwrap();
        let b = FellBundle::line(x.clone());
        let h = GroupAction::from_unit_permutations(FiniteGroup::cyclic(2).unwrap(), x.clone(), Side::Right, &[vec![0, 1, 2, 3], vec![1, 0, 3, 2]]).unwrap();
        let phase = [ONE, C64::new(0.0, 1.0), ONE, C64::new(0.0, -1.0)];
        let phi = move |t: usize, u: usize| if t == 0 { ONE } else { phase[u] * phase[[1, 0, 3, 2][u]] };
        BundleAction::from_fn(b, h, |t, a| {
            let (i, j) = (x.rng(a).0, x.src(a).0);
            CMatrix::from_element(1, 1, phi(t, i) / phi(t, j))
        })
        .unwrap()
    }

    #[test]
    fn semidirect_bundle_is_valid() {
        let ba = twisted_pair().flipped();
        let (sd, b) = semidirect_fell_bundle(&ba).unwrap();
        assert_eq!(sd.groupoid.n_arrows(), 32);
        assert!(validate_fell_bundle(&b, DEFAULT_TOL).is_ok());
        let (_, br) = semidirect_fell_bundle_right(&twisted_pair()).unwrap();
        assert!(validate_fell_bundle(&br, DEFAULT_TOL).is_ok());
    }

    #[test]
    fn quotient_of_twisted_action() {
        let ba = twisted_pair();
        let qb = quotient_fell_bundle(&ba).unwrap();
        assert_eq!(qb.bundle.base.n_arrows(), 8);
        let rep = verify_quotient_bundle(&ba, &qb, DEFAULT_TOL);
        assert!(rep.is_ok(), "{rep}");
    }

    #[test]
    fn quotient_of_matrix_bundle_by_inner_swap() {
        let m2 = StarAlgebra::matrix(2);
        let b = make_trivial_cbundle(&m2, vec!["a".into(), "b".into()], DEFAULT_TOL).unwrap();
        let act = GroupAction::from_fn(FiniteGroup::cyclic(2).unwrap(), b.base.clone(), Side::Right, |t, u| Arrow((u.0 + t) % 2)).unwrap();
        // Ad of the swap unitary on matrix units e_ij ↦ e_{1-i,1-j}.
        let ad = CMatrix::from_fn(4, 4, |r, c| if r == 3 - c { ONE } else { ZERO });
        let ba = BundleAction::from_fn(b, act, |t, _| if t == 0 { identity(4) } else { ad.clone() }).unwrap();
        let qb = quotient_fell_bundle(&ba).unwrap();
        assert_eq!(qb.bundle.dim, vec![4]);
        assert!(verify_quotient_bundle(&ba, &qb, DEFAULT_TOL).is_ok());
    }

    #[test]
    fn principal_decomposition_of_twisted_action() {
        let ba = twisted_pair();
        let d = principal_fell_decomposition(&ba).unwrap();
        let rep = verify_principal_fell_decomposition(&ba, &d, DEFAULT_TOL);
        assert!(rep.is_ok(), "{rep}");
    }

    #[test]
    fn orbit_action_is_a_module() {
        let (qb, m) = orbit_bundle_action(&twisted_pair()).unwrap();
        assert_eq!(m.bundle, qb.bundle);
        assert!(check_module_action(&m, DEFAULT_TOL).is_ok());
    }

    #[test]
    fn transformation_bundle_is_valid() {
        let g = FiniteGroup::cyclic(3).unwrap();
        let b = FellBundle::line(g.groupoid.clone());
        let pts = (0..3).map(|k| k.to_string()).collect();
        let act = SpaceAction::group_on_set(&g, pts, Side::Left, |s, u| (s + u) % 3).unwrap();
        let (t, tb) = transformation_fell_bundle(&b, &act).unwrap();
        assert_eq!(t.groupoid.n_arrows(), 9);
        assert!(validate_fell_bundle(&tb, DEFAULT_TOL).is_ok());
    }
}
