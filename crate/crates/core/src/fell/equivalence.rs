use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::action::bundle_commute_witness;
use super::construct::{semidirect_orbit_bundle_action, SemidirectOrbitAction};
use super::{
    check_bundle_action, check_module_action, quotient_fell_bundle, semidirect_fell_bundle, semidirect_fell_bundle_right,
    transformation_fell_bundle, BundleAction, FellBundle, ModuleAction, QuotientBundle,
};
use crate::error::{Error, Result};
use crate::groupoid::{
    left_bracket, orbit_space_action_right, require_free, right_bracket, semidirect_space_action,
    symmetric_groupoid_equivalence, unique, verify_groupoid_equivalence, Arrow, FiniteGroup, GroupAction,
    GroupoidEquivalence, Semidirect, Side, SpaceAction, SymmetricGroupoidEquivalence, Transformation,
};
use crate::linalg::{
    basis_vec, conj_vec, eigenvalues, identity, left_mult_matrix, max_abs, max_abs_diff, random_vector, rank, CMatrix,
    Tensor3, C64, DEFAULT_TOL,
};
use crate::report::ValidationReport;

/// An equivalence bimodule between two Fell bundles over a groupoid
/// equivalence: module actions on both sides and fiberwise inner products.
///
/// `left_inner[z1 * |Z| + z2]` is defined when `σ(z1) = σ(z2)` and holds the
/// bracket `_L[z1, z2]` with a tensor `T` such that `_L⟨a, b⟩ = T(a, conj b)`.
/// `right_inner[z1 * |Z| + z2]` is defined when `ρ(z1) = ρ(z2)` and holds
/// `[z1, z2]_R` with `⟨a, b⟩_R = T(conj a, b)`.
#[derive(Debug, Clone)]
pub struct BundleEquivalence {
    pub left: ModuleAction,
    pub right: ModuleAction,
    pub left_inner: Vec<Option<(Arrow, Tensor3)>>,
    pub right_inner: Vec<Option<(Arrow, Tensor3)>>,
}

impl BundleEquivalence {
    pub fn base(&self) -> GroupoidEquivalence {
        GroupoidEquivalence {
            left_action: self.left.space.clone(),
            right_action: self.right.space.clone(),
        }
    }

    pub fn n_points(&self) -> usize {
        self.left.n_points()
    }

    pub fn fiber_dim(&self, z: usize) -> usize {
        self.left.fiber_dims[z]
    }

    pub fn left_bundle(&self) -> &FellBundle {
        &self.left.bundle
    }

    pub fn right_bundle(&self) -> &FellBundle {
        &self.right.bundle
    }

    pub fn left_inner_at(&self, z1: usize, z2: usize) -> Option<&(Arrow, Tensor3)> {
        self.left_inner[z1 * self.n_points() + z2].as_ref()
    }

    pub fn right_inner_at(&self, z1: usize, z2: usize) -> Option<&(Arrow, Tensor3)> {
        self.right_inner[z1 * self.n_points() + z2].as_ref()
    }

    /// `_L⟨a, b⟩` for `a ∈ E(z1)`, `b ∈ E(z2)`.
    pub fn inner_left(&self, z1: usize, a: &[C64], z2: usize, b: &[C64]) -> Option<(Arrow, Vec<C64>)> {
        self.left_inner_at(z1, z2).map(|(p, t)| (*p, t.apply(a, &conj_vec(b))))
    }

    /// `⟨a, b⟩_R` for `a ∈ E(z1)`, `b ∈ E(z2)`.
    pub fn inner_right(&self, z1: usize, a: &[C64], z2: usize, b: &[C64]) -> Option<(Arrow, Vec<C64>)> {
        self.right_inner_at(z1, z2).map(|(q, t)| (*q, t.apply(&conj_vec(a), b)))
    }

    fn build_inner(
        n: usize,
        defined: impl Fn(usize, usize) -> bool,
        mut f: impl FnMut(usize, usize) -> Result<(Arrow, Tensor3)>,
    ) -> Result<Vec<Option<(Arrow, Tensor3)>>> {
        let mut out = vec![None; n * n];
        for z1 in 0..n {
            for z2 in 0..n {
                if defined(z1, z2) {
                    out[z1 * n + z2] = Some(f(z1, z2)?);
                }
            }
        }
        Ok(out)
    }
}

/// The bundle equivalence of two commuting free actions, together with the
/// intermediate constructions used to build it.
#[derive(Debug, Clone)]
pub struct SymmetricBundleEquivalence {
    pub equivalence: BundleEquivalence,
    pub groupoid: SymmetricGroupoidEquivalence,
    /// `𝒜/H`, the induced `G`-action, and `(𝒜/H)⋊G` acting on `𝒜`.
    pub left_half: SemidirectOrbitAction,
    /// `G\𝒜`.
    pub quotient_g: QuotientBundle,
    /// The induced `H`-action on `G\𝒜`.
    pub induced_h: BundleAction,
    pub q_semidirect: Semidirect,
}

fn check_hypotheses(g: &BundleAction, h: &BundleAction) -> Result<()> {
    g.base_action.require_side(Side::Left)?;
    h.base_action.require_side(Side::Right)?;
    if g.bundle != h.bundle {
        return Err(Error::InvalidArgument("actions are on different bundles".into()));
    }
    for ba in [g, h] {
        let rep = check_bundle_action(ba, DEFAULT_TOL);
        if !rep.is_ok() {
            return Err(Error::InvalidBundle(rep));
        }
        require_free(&ba.base_action)?;
    }
    if let Some(w) = bundle_commute_witness(g, h, DEFAULT_TOL) {
        return Err(Error::NotCommuting { witness: w });
    }
    Ok(())
}

/// Builds the `(𝒜/H)⋊G`–`H⋉(G\𝒜)` equivalence carried by `𝒜`:
/// `(a·H, t)·b = (a·h)(t·b)`, `_L⟨a,b⟩ = (a(t·b*)·H, t)`,
/// `a·(h, G·b) = (a·h)(t·b)`, `⟨a,b⟩_R = (h, G·(a*·h)b)`, each with the
/// unique group element found by exhaustive search.
pub fn symmetric_action_equivalence(g: &BundleAction, h: &BundleAction) -> Result<SymmetricBundleEquivalence> {
    check_hypotheses(g, h)?;
    let groupoid = symmetric_groupoid_equivalence(&g.base_action, &h.base_action)?;
    let left_half = semidirect_orbit_bundle_action(g, h)?;
    if left_half.module.space != groupoid.equivalence.left_action {
        return Err(Error::Internal("left module action disagrees with the base equivalence".into()));
    }
    let a = &g.bundle;
    let x = &a.base;
    let ga = &g.base_action;
    let ha = &h.base_action;

    let quotient_g = quotient_fell_bundle(&g.flipped())?;
    let qg = &quotient_g.quotient;
    let induced_h = BundleAction::from_fn(quotient_g.bundle.clone(), groupoid.h_on_quotient.clone(), |k, o| {
        let r = qg.rep[o.0];
        &quotient_g.to_rep[ha.apply(k, r).0] * h.map(k, r)
    })?;
    let (q_semidirect, q_bundle) = semidirect_fell_bundle_right(&induced_h)?;
    if q_bundle.base != groupoid.equivalence.right_action.groupoid {
        return Err(Error::Internal("right bundle base disagrees with the base equivalence".into()));
    }
    let right = ModuleAction::build(groupoid.equivalence.right_action.clone(), q_bundle, a.dim.clone(), |q, z| {
        let (o, k) = q_semidirect.split(q);
        let y = Arrow(z);
        let r = qg.rep[o.0];
        let yk = ha.apply(k, y);
        let t = unique(g.group().elements().filter(|&t| x.rng(ga.apply(t, r)) == x.src(yk)), "t with s(b·h) = t·r(c)")?;
        let tr = ga.apply(t, r);
        Ok(a.mult(yk, tr).transform(&identity(a.dim(x.mul(yk, tr))), h.map(k, y), g.map(t, r)))
    })?;

    let eq = &groupoid.equivalence;
    let n = eq.n_points();
    let qh = &left_half.quotient;
    let left_inner = BundleEquivalence::build_inner(n, |z1, z2| eq.sigma(z1) == eq.sigma(z2), |z1, z2| {
        let p = left_bracket(&groupoid, z1, z2)?;
        let (_, t) = groupoid.p.split(p);
        let (a1, a2) = (Arrow(z1), Arrow(z2));
        let t_inv2 = ga.apply(t, x.inv(a2));
        let w = x.mul(a1, t_inv2);
        let pre = g.map(t, x.inv(a2)) * a.star_matrix(a2);
        Ok((p, a.mult(a1, t_inv2).transform(&qh.to_rep[w.0], &identity(a.dim(a1)), &pre)))
    })?;
    let right_inner = BundleEquivalence::build_inner(n, |z1, z2| eq.rho(z1) == eq.rho(z2), |z1, z2| {
        let q = right_bracket(&groupoid, z1, z2)?;
        let (_, k) = groupoid.q.split(q);
        let (a1, a2) = (Arrow(z1), Arrow(z2));
        let inv1_k = ha.apply(k, x.inv(a1));
        let w = x.mul(inv1_k, a2);
        let pre = h.map(k, x.inv(a1)) * a.star_matrix(a1);
        Ok((q, a.mult(inv1_k, a2).transform(&quotient_g.to_rep[w.0], &pre, &identity(a.dim(a2)))))
    })?;

    let equivalence = BundleEquivalence { left: left_half.module.clone(), right, left_inner, right_inner };
    Ok(SymmetricBundleEquivalence { equivalence, groupoid, left_half, quotient_g, induced_h, q_semidirect })
}

/// The `𝒜⋊G`–`G\𝒜` equivalence for a single free action.
#[derive(Debug, Clone)]
pub struct OneSidedBundleEquivalence {
    pub equivalence: BundleEquivalence,
    pub semidirect: Semidirect,
    pub quotient: QuotientBundle,
}

/// `(a,t)·b = a(t·b)`, `_L⟨a,b⟩ = (a(t·b*), t)`, `a·(G·b) = a(t·b)` with
/// `t` unique such that `s(a) = t·r(b)`, and `⟨a,b⟩_R = G·a*b`.
pub fn one_sided_equivalence(g: &BundleAction) -> Result<OneSidedBundleEquivalence> {
    g.base_action.require_side(Side::Left)?;
    let rep = check_bundle_action(g, DEFAULT_TOL);
    if !rep.is_ok() {
        return Err(Error::InvalidBundle(rep));
    }
    require_free(&g.base_action)?;
    let a = &g.bundle;
    let x = &a.base;
    let ga = &g.base_action;
    let (semidirect, p_bundle) = semidirect_fell_bundle(g)?;
    let g_on_z = SpaceAction::group_on_arrows(ga);
    let (_, left_space) = semidirect_space_action(ga, &g_on_z, &SpaceAction::left_translation(x))?;
    let (_, right_space) = orbit_space_action_right(ga)?;
    let quotient = quotient_fell_bundle(&g.flipped())?;
    let q = &quotient.quotient;
    if right_space.groupoid != q.groupoid {
        return Err(Error::Internal("orbit bundle base disagrees with the orbit action".into()));
    }

    let left = ModuleAction::build(left_space, p_bundle, a.dim.clone(), |p, z| {
        let (y, t) = semidirect.split(p);
        let tz = ga.apply(t, Arrow(z));
        Ok(a.mult(y, tz).transform(&identity(a.dim(x.mul(y, tz))), &identity(a.dim(y)), g.map(t, Arrow(z))))
    })?;
    let right = ModuleAction::build(right_space, quotient.bundle.clone(), a.dim.clone(), |o, z| {
        let y = Arrow(z);
        let r = q.rep[o.0];
        let t = unique(g.group().elements().filter(|&t| x.rng(ga.apply(t, r)) == x.src(y)), "t with s(a) = t·r(b)")?;
        let tr = ga.apply(t, r);
        Ok(a.mult(y, tr).transform(&identity(a.dim(x.mul(y, tr))), &identity(a.dim(y)), g.map(t, r)))
    })?;

    let n = x.n_arrows();
    let sigma = |z: usize| q.unit_class[x.src(Arrow(z)).0];
    let left_inner = BundleEquivalence::build_inner(n, |z1, z2| sigma(z1) == sigma(z2), |z1, z2| {
        let (a1, a2) = (Arrow(z1), Arrow(z2));
        let t = unique(g.group().elements().filter(|&t| x.src(a1) == ga.apply_unit(t, x.src(a2))), "t with s(a) = t·s(b)")?;
        let t_inv2 = ga.apply(t, x.inv(a2));
        let p = semidirect.arrow(x.mul(a1, t_inv2), t);
        let pre = g.map(t, x.inv(a2)) * a.star_matrix(a2);
        Ok((p, a.mult(a1, t_inv2).transform(&identity(a.dim(x.mul(a1, t_inv2))), &identity(a.dim(a1)), &pre)))
    })?;
    let right_inner = BundleEquivalence::build_inner(n, |z1, z2| x.rng(Arrow(z1)) == x.rng(Arrow(z2)), |z1, z2| {
        let (a1, a2) = (Arrow(z1), Arrow(z2));
        let w = x.mul(x.inv(a1), a2);
        Ok((q.class_of[w.0], a.mult(x.inv(a1), a2).transform(&quotient.to_rep[w.0], a.star_matrix(a1), &identity(a.dim(a2)))))
    })?;
    let equivalence = BundleEquivalence { left, right, left_inner, right_inner };
    Ok(OneSidedBundleEquivalence { equivalence, semidirect, quotient })
}

/// The `(𝔅∗Ω)⋊G`–`𝔅` equivalence carried by `𝔅∗Ω`.
#[derive(Debug, Clone)]
pub struct TransformationBundleEquivalence {
    pub equivalence: BundleEquivalence,
    pub transformation: Transformation,
    pub transformation_bundle: FellBundle,
    pub group_action: BundleAction,
    pub semidirect: Semidirect,
}

/// `act` is a left action of the base `𝒴` of `b` on `Ω` with fibring `ρ`;
/// `gact` is a free left action of `G` on `Ω` whose orbits are the fibers
/// of `ρ` and which commutes with `act`.
pub fn one_sided_transformation_equivalence(
    b: &FellBundle,
    act: &SpaceAction,
    group: &FiniteGroup,
    gact: &SpaceAction,
) -> Result<TransformationBundleEquivalence> {
    let y = &b.base;
    let n = act.n_points();
    if gact.side != Side::Left || act.side != Side::Left || gact.n_points() != n || gact.groupoid != group.groupoid {
        return Err(Error::InvalidArgument("expected left actions on the same space".into()));
    }
    let gu = |t: usize, u: usize| gact.act(Arrow(t), u).expect("group actions are total");
    if let Some((t, u)) = gact.free_witness() {
        return Err(Error::NotFree { witness: format!("{} fixes {}", group.label(t.0), act.point_labels[u]) });
    }
    for u in 0..n {
        for v in 0..n {
            let same_fiber = act.fibring[u] == act.fibring[v];
            let same_orbit = group.elements().any(|t| gu(t, u) == v);
            if same_fiber != same_orbit {
                return Err(Error::Precondition(format!(
                    "G-orbits are not the fibers of ρ at ({}, {})",
                    act.point_labels[u], act.point_labels[v]
                )));
            }
        }
    }
    for t in group.elements() {
        for c in y.arrows() {
            for u in 0..n {
                let Some(cu) = act.act(c, u) else { continue };
                if act.act(c, gu(t, u)) != Some(gu(t, cu)) {
                    return Err(Error::NotCommuting {
                        witness: format!("t={}, y={}, u={}", group.label(t), y.label(c), act.point_labels[u]),
                    });
                }
            }
        }
    }

    let (transformation, tb) = transformation_fell_bundle(b, act)?;
    let tg = &transformation.groupoid;
    let pairs = transformation.pairs.clone();
    let base_action = GroupAction::from_fn(group.clone(), tg.clone(), Side::Left, |t, p| {
        let (c, u) = pairs[p.0];
        transformation.arrow(c, gu(t, u)).expect("ρ is G-invariant")
    })?;
    let group_action = BundleAction::identity_maps(tb.clone(), base_action)?;
    let (semidirect, p_bundle) = semidirect_fell_bundle(&group_action)?;
    let g_on_z = SpaceAction::group_on_arrows(&group_action.base_action);
    let (_, left_space) = semidirect_space_action(&group_action.base_action, &g_on_z, &SpaceAction::left_translation(tg))?;
    let right_space = SpaceAction::from_fn(
        y.clone(),
        tg.arrow_labels.clone(),
        pairs.iter().map(|&(c, _)| y.src(c)).collect(),
        Side::Right,
        |c, z| {
            let (d, u) = pairs[z];
            transformation
                .arrow(y.mul(d, c), act.act(y.inv(c), u).expect("defined"))
                .expect("defined")
                .0
        },
    )?;

    let left = ModuleAction::build(left_space, p_bundle, tb.dim.clone(), |p, z| {
        let (q, _) = semidirect.split(p);
        Ok(b.mult(pairs[q.0].0, pairs[z].0).clone())
    })?;
    let right = ModuleAction::build(right_space, b.clone(), tb.dim.clone(), |c, z| Ok(b.mult(pairs[z].0, c).clone()))?;

    let nz = pairs.len();
    let left_inner = BundleEquivalence::build_inner(nz, |z1, z2| y.src(pairs[z1].0) == y.src(pairs[z2].0), |z1, z2| {
        let ((y1, u1), (y2, u2)) = (pairs[z1], pairs[z2]);
        let t = unique(group.elements().filter(|&t| gu(t, u2) == u1), "t with u1 = t·u2")?;
        let y2u2 = act.act(y2, u2).expect("defined");
        let arrow = transformation
            .arrow(y.mul(y1, y.inv(y2)), gu(t, y2u2))
            .ok_or_else(|| Error::Internal("left inner product lands outside 𝒴∗Ω".into()))?;
        let tensor = b.mult(y1, y.inv(y2)).transform(&identity(b.dim(y.mul(y1, y.inv(y2)))), &identity(b.dim(y1)), b.star_matrix(y2));
        Ok((semidirect.arrow(arrow, t), tensor))
    })?;
    let rho = |z: usize| act.act(pairs[z].0, pairs[z].1).expect("defined");
    let right_inner = BundleEquivalence::build_inner(nz, |z1, z2| rho(z1) == rho(z2), |z1, z2| {
        let (y1, y2) = (pairs[z1].0, pairs[z2].0);
        let w = y.mul(y.inv(y1), y2);
        Ok((w, b.mult(y.inv(y1), y2).transform(&identity(b.dim(w)), b.star_matrix(y1), &identity(b.dim(y2)))))
    })?;
    let equivalence = BundleEquivalence { left, right, left_inner, right_inner };
    Ok(TransformationBundleEquivalence { equivalence, transformation, transformation_bundle: tb, group_action, semidirect })
}

fn residual_check(rep: &mut ValidationReport, name: &str, worst: &mut f64, res: f64, tol: f64, message: &str, witness: impl FnOnce() -> String) {
    *worst = worst.max(res);
    if res > tol {
        rep.push_capped(name, format!("{message}, residual {res:.3e}"), witness());
    }
}

/// Exhaustive verification of the imprimitivity-bimodule axioms:
/// Step 1 commuting actions, Step 2 inner products over the brackets,
/// Step 3 adjoint symmetry, Step 4 module compatibility, Step 5 the exchange
/// identity `_L⟨a,b⟩·c = a·⟨b,c⟩_R`, Step 6 fiberwise fullness and
/// positivity. Positivity is probed on basis vectors and seeded random vectors.
pub fn verify_bundle_equivalence(e: &BundleEquivalence, tol: f64) -> ValidationReport {
    let mut rep = ValidationReport::new("bundle equivalence");
    let base = e.base();
    let base_rep = verify_groupoid_equivalence(&base);
    for v in &base_rep.violations {
        rep.push_capped("base", format!("{}: {}", v.check, v.message), v.witness.clone());
    }
    rep.record("base", base_rep.checks.iter().map(|c| c.cases).sum(), 0.0);
    for (name, m) in [("module-left", &e.left), ("module-right", &e.right)] {
        let r = check_module_action(m, tol);
        for v in &r.violations {
            rep.push_capped(name, format!("{}: {}", v.check, v.message), v.witness.clone());
        }
        rep.record(name, r.checks.iter().map(|c| c.cases).sum(), r.max_residual());
    }
    if !rep.is_ok() {
        return rep;
    }
    let n = e.n_points();
    let (pb, qb) = (e.left_bundle(), e.right_bundle());
    let (p, q) = (&pb.base, &qb.base);
    let label = |z: usize| base.point_label(z).to_string();
    let d = |z: usize| e.fiber_dim(z);

    // Step 1.
    let mut worst: f64 = 0.0;
    let mut cases = 0;
    for z in 0..n {
        for pa in p.arrows() {
            let Some(pz) = base.act_left(pa, z) else { continue };
            for qa in q.arrows() {
                let Some(zq) = base.act_right(z, qa) else { continue };
                let (Some(pzq), Some(l1), Some(r1), Some(l2), Some(r2)) = (
                    base.act_right(pz, qa),
                    e.left.tensor(pa, z),
                    e.right.tensor(qa, z),
                    e.left.tensor(pa, zq),
                    e.right.tensor(qa, pz),
                ) else {
                    rep.push_capped("step1 commute", "actions do not compose", format!("p={}, z={}, q={}", p.label(pa), label(z), q.label(qa)));
                    continue;
                };
                let _ = pzq;
                cases += 1;
                let mut res: f64 = 0.0;
                for i in 0..pb.dim(pa) {
                    let pi = basis_vec(pb.dim(pa), i);
                    for k in 0..d(z) {
                        let ek = basis_vec(d(z), k);
                        for j in 0..qb.dim(qa) {
                            let qj = basis_vec(qb.dim(qa), j);
                            let lhs = r2.apply(&l1.apply(&pi, &ek), &qj);
                            let rhs = l2.apply(&pi, &r1.apply(&ek, &qj));
                            res = res.max(max_abs_diff(&lhs, &rhs));
                        }
                    }
                }
                residual_check(&mut rep, "step1 commute", &mut worst, res, tol, "(p·a)·q != p·(a·q)", || {
                    format!("p={}, z={}, q={}", p.label(pa), label(z), q.label(qa))
                });
            }
        }
    }
    rep.record("step1 commute", cases, worst);

    // Step 2.
    let mut cases = 0;
    for z1 in 0..n {
        for z2 in 0..n {
            cases += 1;
            let sig = base.sigma(z1) == base.sigma(z2);
            match (sig, e.left_inner_at(z1, z2)) {
                (true, Some((pa, t))) => {
                    if base.left_bracket_search(z1, z2).ok() != Some(*pa) {
                        rep.push_capped("step2 projection", "left inner product is not over _L[z1, z2]", format!("({}, {})", label(z1), label(z2)));
                    } else if (t.out, t.left, t.right) != (pb.dim(*pa), d(z1), d(z2)) {
                        rep.push_capped("step2 projection", "left inner product tensor misshapen", format!("({}, {})", label(z1), label(z2)));
                    }
                }
                (false, None) => {}
                _ => rep.push_capped("step2 projection", "left inner product defined off the σ-fibers", format!("({}, {})", label(z1), label(z2))),
            }
            let rh = base.rho(z1) == base.rho(z2);
            match (rh, e.right_inner_at(z1, z2)) {
                (true, Some((qa, t))) => {
                    if base.right_bracket_search(z1, z2).ok() != Some(*qa) {
                        rep.push_capped("step2 projection", "right inner product is not over [z1, z2]_R", format!("({}, {})", label(z1), label(z2)));
                    } else if (t.out, t.left, t.right) != (qb.dim(*qa), d(z1), d(z2)) {
                        rep.push_capped("step2 projection", "right inner product tensor misshapen", format!("({}, {})", label(z1), label(z2)));
                    }
                }
                (false, None) => {}
                _ => rep.push_capped("step2 projection", "right inner product defined off the ρ-fibers", format!("({}, {})", label(z1), label(z2))),
            }
        }
    }
    rep.record("step2 projection", cases, 0.0);
    if !rep.check_passed("step2 projection") {
        return rep;
    }

    // Step 3.
    let mut worst: f64 = 0.0;
    let mut cases = 0;
    for z1 in 0..n {
        for z2 in 0..n {
            if let (Some((pa, t12)), Some((_, t21))) = (e.left_inner_at(z1, z2), e.left_inner_at(z2, z1)) {
                cases += 1;
                let mut res: f64 = 0.0;
                for i in 0..d(z1) {
                    for j in 0..d(z2) {
                        res = res.max(max_abs_diff(&pb.star_of(*pa, &t12.basis_image(i, j)), &t21.basis_image(j, i)));
                    }
                }
                residual_check(&mut rep, "step3 adjoint", &mut worst, res, tol, "_L⟨a,b⟩* != _L⟨b,a⟩", || format!("left ({}, {})", label(z1), label(z2)));
            }
            if let (Some((qa, t12)), Some((_, t21))) = (e.right_inner_at(z1, z2), e.right_inner_at(z2, z1)) {
                cases += 1;
                let mut res: f64 = 0.0;
                for i in 0..d(z1) {
                    for j in 0..d(z2) {
                        res = res.max(max_abs_diff(&qb.star_of(*qa, &t12.basis_image(i, j)), &t21.basis_image(j, i)));
                    }
                }
                residual_check(&mut rep, "step3 adjoint", &mut worst, res, tol, "⟨a,b⟩_R* != ⟨b,a⟩_R", || format!("right ({}, {})", label(z1), label(z2)));
            }
        }
    }
    rep.record("step3 adjoint", cases, worst);

    // Step 4.
    let mut worst: f64 = 0.0;
    let mut cases = 0;
    for z1 in 0..n {
        for z2 in 0..n {
            if let Some((br, t12)) = e.left_inner_at(z1, z2) {
                for pa in p.arrows() {
                    let Some(pz1) = base.act_left(pa, z1) else { continue };
                    let Some((_, tp)) = e.left_inner_at(pz1, z2) else { continue };
                    let act = e.left.tensor(pa, z1).unwrap();
                    let m = pb.mult(pa, *br);
                    cases += 1;
                    let mut res: f64 = 0.0;
                    for i in 0..pb.dim(pa) {
                        let c = basis_vec(pb.dim(pa), i);
                        for k in 0..d(z1) {
                            for j in 0..d(z2) {
                                let lhs = tp.apply(&act.apply(&c, &basis_vec(d(z1), k)), &basis_vec(d(z2), j));
                                let rhs = m.apply(&c, &t12.basis_image(k, j));
                                res = res.max(max_abs_diff(&lhs, &rhs));
                            }
                        }
                    }
                    residual_check(&mut rep, "step4 module", &mut worst, res, tol, "_L⟨p·a,b⟩ != p·_L⟨a,b⟩", || {
                        format!("p={}, ({}, {})", p.label(pa), label(z1), label(z2))
                    });
                }
            }
            if let Some((br, t12)) = e.right_inner_at(z1, z2) {
                for qa in q.arrows() {
                    let Some(z2q) = base.act_right(z2, qa) else { continue };
                    let Some((_, tq)) = e.right_inner_at(z1, z2q) else { continue };
                    let act = e.right.tensor(qa, z2).unwrap();
                    let m = qb.mult(*br, qa);
                    cases += 1;
                    let mut res: f64 = 0.0;
                    for i in 0..qb.dim(qa) {
                        let c = basis_vec(qb.dim(qa), i);
                        for k in 0..d(z1) {
                            for j in 0..d(z2) {
                                let lhs = tq.apply(&basis_vec(d(z1), k), &act.apply(&basis_vec(d(z2), j), &c));
                                let rhs = m.apply(&t12.basis_image(k, j), &c);
                                res = res.max(max_abs_diff(&lhs, &rhs));
                            }
                        }
                    }
                    residual_check(&mut rep, "step4 module", &mut worst, res, tol, "⟨a,b·q⟩_R != ⟨a,b⟩_R·q", || {
                        format!("q={}, ({}, {})", q.label(qa), label(z1), label(z2))
                    });
                }
            }
        }
    }
    rep.record("step4 module", cases, worst);

    // Step 5.
    let mut worst: f64 = 0.0;
    let mut cases = 0;
    for z1 in 0..n {
        for z2 in 0..n {
            let Some((pl, tl)) = e.left_inner_at(z1, z2) else { continue };
            for z3 in 0..n {
                let Some((qr, tr)) = e.right_inner_at(z2, z3) else { continue };
                let (Some(act_l), Some(act_r)) = (e.left.tensor(*pl, z3), e.right.tensor(*qr, z1)) else {
                    rep.push_capped("step5 exchange", "brackets do not act", format!("({}, {}, {})", label(z1), label(z2), label(z3)));
                    continue;
                };
                cases += 1;
                let mut res: f64 = 0.0;
                for i in 0..d(z1) {
                    for j in 0..d(z2) {
                        let lij = tl.basis_image(i, j);
                        for k in 0..d(z3) {
                            let lhs = act_l.apply(&lij, &basis_vec(d(z3), k));
                            let rhs = act_r.apply(&basis_vec(d(z1), i), &tr.basis_image(j, k));
                            res = res.max(max_abs_diff(&lhs, &rhs));
                        }
                    }
                }
                residual_check(&mut rep, "step5 exchange", &mut worst, res, tol, "_L⟨a,b⟩·c != a·⟨b,c⟩_R", || {
                    format!("({}, {}, {})", label(z1), label(z2), label(z3))
                });
            }
        }
    }
    rep.record("step5 exchange", cases, worst);

    // Step 6.
    for (name, bundle, inner) in [("step6 fullness", pb, &e.left_inner), ("step6 fullness", qb, &e.right_inner)] {
        let mut spans: Vec<Vec<Vec<C64>>> = vec![Vec::new(); bundle.base.n_arrows()];
        for z1 in 0..n {
            for z2 in 0..n {
                if let Some((a, t)) = &inner[z1 * n + z2] {
                    for i in 0..t.left {
                        for j in 0..t.right {
                            spans[a.0].push(t.basis_image(i, j));
                        }
                    }
                }
            }
        }
        for a in bundle.base.arrows() {
            let dim = bundle.dim(a);
            let cols = &spans[a.0];
            let r = if cols.is_empty() || dim == 0 {
                0
            } else {
                rank(&CMatrix::from_fn(dim, cols.len(), |k, c| cols[c][k]), tol)
            };
            if r < dim {
                rep.push_capped(name, format!("inner products span {r} of {dim} dimensions"), bundle.base.label(a).to_string());
            }
        }
        rep.record(name, bundle.base.n_arrows(), 0.0);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut margin = f64::INFINITY;
    let mut cases = 0;
    for z in 0..n {
        let mut probes: Vec<Vec<C64>> = (0..d(z)).map(|i| basis_vec(d(z), i)).collect();
        for _ in 0..3 {
            probes.push(random_vector(&mut rng, d(z)));
        }
        for (side, bundle, entry) in [("left", pb, e.left_inner_at(z, z)), ("right", qb, e.right_inner_at(z, z))] {
            let Some((a, t)) = entry else {
                rep.push_capped("step6 positivity", format!("{side} inner product of a point with itself undefined"), label(z));
                continue;
            };
            let Some(u) = bundle.base.as_unit(*a) else {
                rep.push_capped("step6 positivity", format!("{side} ⟨a,a⟩ not over a unit"), label(z));
                continue;
            };
            let unit_mult = bundle.mult(*a, *a);
            for v in &probes {
                cases += 1;
                let c = match side {
                    "left" => t.apply(v, &conj_vec(v)),
                    _ => t.apply(&conj_vec(v), v),
                };
                let herm = max_abs_diff(&bundle.star_of(*a, &c), &c);
                let eig = eigenvalues(&left_mult_matrix(unit_mult, &c));
                let min = eig.iter().map(|z| z.re).fold(f64::INFINITY, f64::min);
                let imag = max_abs(&eig.iter().map(|z| C64::new(0.0, z.im)).collect::<Vec<_>>());
                let scale = 1.0f64.max(max_abs(&c));
                margin = margin.min(min / scale);
                if herm > tol * scale || imag > 1e-7 * scale || min < -1e-7 * scale {
                    rep.push_capped(
                        "step6 positivity",
                        format!("{side} ⟨a,a⟩ not positive (min eigenvalue {min:.3e}, hermitian defect {herm:.3e})"),
                        format!("z={}, unit {}", label(z), bundle.base.unit_label(u)),
                    );
                }
            }
        }
    }
    rep.record("step6 positivity", cases, 0.0);
    if margin.is_finite() {
        rep.note("step6 positivity", format!("minimum relative eigenvalue {margin:.3e}"));
    }
    let _ = identity(0);
    rep
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groupoid::FiniteGroupoid;

    pub(crate) fn four_point_line() -> (BundleAction, BundleAction) {
        let x = FiniteGroupoid::pair(4).unwrap();
        let z2 = FiniteGroup::cyclic(2).unwrap();
        let g = GroupAction::from_unit_permutations(z2.clone(), x.clone(), Side::Left, &[vec![0, 1, 2, 3], vec![2, 3, 0, 1]]).unwrap();
        let h = GroupAction::from_unit_permutations(z2, x.clone(), Side::Right, &[vec![0, 1, 2, 3], vec![1, 0, 3, 2]]).unwrap();
        let b = FellBundle::line(x);
        (BundleAction::identity_maps(b.clone(), g).unwrap(), BundleAction::identity_maps(b, h).unwrap())
    }

    #[test]
    fn four_point_symmetric_equivalence_passes() {
        let (g, h) = four_point_line();
        let s = symmetric_action_equivalence(&g, &h).unwrap();
        let rep = verify_bundle_equivalence(&s.equivalence, DEFAULT_TOL);
        assert!(rep.is_ok(), "{rep}");
        for step in ["step1 commute", "step2 projection", "step3 adjoint", "step4 module", "step5 exchange", "step6 fullness", "step6 positivity"] {
            assert!(rep.checks.iter().any(|c| c.name == step && c.passed), "{step}");
        }
    }

    #[test]
    fn inner_products_lie_over_brackets() {
        let (g, h) = four_point_line();
        let s = symmetric_action_equivalence(&g, &h).unwrap();
        let e = &s.equivalence;
        for z1 in 0..e.n_points() {
            for z2 in 0..e.n_points() {
                if let Some((p, _)) = e.left_inner_at(z1, z2) {
                    assert_eq!(*p, left_bracket(&s.groupoid, z1, z2).unwrap());
                }
            }
        }
    }

    #[test]
    fn trivial_groups_reduce_to_associativity() {
        let x = FiniteGroupoid::pair(2).unwrap();
        let b = FellBundle::line(x);
        let g = BundleAction::trivial(b.clone(), FiniteGroup::trivial(), Side::Left);
        let h = BundleAction::trivial(b, FiniteGroup::trivial(), Side::Right);
        let s = symmetric_action_equivalence(&g, &h).unwrap();
        assert!(verify_bundle_equivalence(&s.equivalence, DEFAULT_TOL).is_ok());
    }

    #[test]
    fn negated_inner_product_fails_step3() {
        let (g, h) = four_point_line();
        let mut e = symmetric_action_equivalence(&g, &h).unwrap().equivalence;
        let n = e.n_points();
        let k = (0..n * n)
            .find(|&k| k / n != k % n && e.left_inner[k].is_some())
            .unwrap();
        let (_, t) = e.left_inner[k].as_mut().unwrap();
        *t = t.scaled(-crate::linalg::ONE);
        let rep = verify_bundle_equivalence(&e, DEFAULT_TOL);
        assert!(!rep.check_passed("step3 adjoint"));
        assert!(!rep.violations_of("step3 adjoint").next().unwrap().witness.is_empty());
    }

    #[test]
    fn one_sided_four_point() {
        let (g, _) = four_point_line();
        let o = one_sided_equivalence(&g).unwrap();
        let rep = verify_bundle_equivalence(&o.equivalence, DEFAULT_TOL);
        assert!(rep.is_ok(), "{rep}");
        // ⟨a,b⟩_R = G·a*b for line bundles is the scalar conj(a)·b.
        let e = &o.equivalence;
        let (q, v) = e.inner_right(0, &[C64::new(2.0, 1.0)], 1, &[C64::new(0.0, 3.0)]).unwrap();
        let x = &g.bundle.base;
        assert_eq!(q, o.quotient.quotient.class_of[x.mul(x.inv(Arrow(0)), Arrow(1)).0]);
        assert!((v[0] - C64::new(2.0, -1.0) * C64::new(0.0, 3.0)).norm() < 1e-12);
    }

    #[test]
    fn one_sided_transformation_z2() {
        let z2 = FiniteGroup::cyclic(2).unwrap();
        let b = FellBundle::line(z2.groupoid.clone());
        let labels: Vec<String> = vec!["0".into(), "1".into()];
        let act = SpaceAction::group_on_set(&z2, labels.clone(), Side::Left, |s, u| (s + u) % 2).unwrap();
        let gact = SpaceAction::group_on_set(&z2, labels, Side::Left, |t, u| (t + u) % 2).unwrap();
        let t = one_sided_transformation_equivalence(&b, &act, &z2, &gact).unwrap();
        let rep = verify_bundle_equivalence(&t.equivalence, DEFAULT_TOL);
        assert!(rep.is_ok(), "{rep}");
    }

    #[test]
    fn one_sided_transformation_trivial() {
        let y = FiniteGroupoid::pair(2).unwrap();
        let b = FellBundle::line(y.clone());
        let act = SpaceAction::from_fn(y.clone(), y.unit_labels.clone(), y.units().collect(), Side::Left, |c, _| y.rng(c).0).unwrap();
        let g = FiniteGroup::trivial();
        let gact = SpaceAction::group_on_set(&g, y.unit_labels.clone(), Side::Left, |_, u| u).unwrap();
        let t = one_sided_transformation_equivalence(&b, &act, &g, &gact).unwrap();
        assert!(verify_bundle_equivalence(&t.equivalence, DEFAULT_TOL).is_ok());
    }
}
