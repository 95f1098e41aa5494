use super::action::{check_space_action, commute_witness, require_free};
use super::construct::{orbit_space_action, orbit_space_action_right, semidirect_right_space_action, semidirect_space_action, unique};
use super::{check_action, Arrow, FiniteGroupoid, GroupAction, Quotient, Semidirect, Side, SpaceAction, Unit};
use crate::error::{Error, Result};
use crate::report::ValidationReport;

/// A `P`–`Q` equivalence: a finite space `Z` with a left `P`-action fibred by
/// `ρ` and a right `Q`-action fibred by `σ`.
#[derive(Debug, Clone)]
pub struct GroupoidEquivalence {
    pub left_action: SpaceAction,
    pub right_action: SpaceAction,
}

impl GroupoidEquivalence {
    pub fn left(&self) -> &FiniteGroupoid {
        &self.left_action.groupoid
    }

    pub fn right(&self) -> &FiniteGroupoid {
        &self.right_action.groupoid
    }

    pub fn n_points(&self) -> usize {
        self.left_action.n_points()
    }

    pub fn point_label(&self, z: usize) -> &str {
        &self.left_action.point_labels[z]
    }

    pub fn rho(&self, z: usize) -> Unit {
        self.left_action.fibring[z]
    }

    pub fn sigma(&self, z: usize) -> Unit {
        self.right_action.fibring[z]
    }

    /// `p·z`, if defined.
    pub fn act_left(&self, p: Arrow, z: usize) -> Option<usize> {
        self.left_action.act(p, z)
    }

    /// `z·q`, if defined.
    pub fn act_right(&self, z: usize, q: Arrow) -> Option<usize> {
        self.right_action.act(q, z)
    }

    /// The unique `p` with `p·z2 = z1`, by exhaustive search.
    pub fn left_bracket_search(&self, z1: usize, z2: usize) -> Result<Arrow> {
        unique(
            self.left().arrows().filter(|&p| self.act_left(p, z2) == Some(z1)),
            "left bracket",
        )
    }

    /// The unique `q` with `z1·q = z2`, by exhaustive search.
    pub fn right_bracket_search(&self, z1: usize, z2: usize) -> Result<Arrow> {
        unique(
            self.right().arrows().filter(|&q| self.act_right(z1, q) == Some(z2)),
            "right bracket",
        )
    }

    /// The equivalence of a groupoid with itself through translations.
    pub fn identity(x: &FiniteGroupoid) -> Self {
        GroupoidEquivalence {
            left_action: SpaceAction::left_translation(x),
            right_action: SpaceAction::right_translation(x),
        }
    }
}

/// The equivalence between `(𝒳/H)⋊G` and `H⋉(G\𝒳)` carried by the arrows of
/// `𝒳`, with the intermediate constructions kept for the bracket formulas.
#[derive(Debug, Clone)]
pub struct SymmetricGroupoidEquivalence {
    pub equivalence: GroupoidEquivalence,
    pub g: GroupAction,
    pub h: GroupAction,
    /// `𝒳/H`.
    pub quotient_h: Quotient,
    /// `G\𝒳`.
    pub quotient_g: Quotient,
    /// `G` acting on `𝒳/H`.
    pub g_on_quotient: GroupAction,
    /// `H` acting on `G\𝒳`.
    pub h_on_quotient: GroupAction,
    pub p: Semidirect,
    pub q: Semidirect,
}

/// Builds the equivalence for free commuting actions `G ↷ 𝒳 ↶ H`, with
/// `ρ(x) = (r(x)·H, e)` and `σ(x) = (e, G·s(x))`.
pub fn symmetric_groupoid_equivalence(g: &GroupAction, h: &GroupAction) -> Result<SymmetricGroupoidEquivalence> {
    g.require_side(Side::Left)?;
    h.require_side(Side::Right)?;
    if g.target != h.target {
        return Err(Error::InvalidArgument("actions act on different groupoids".into()));
    }
    for a in [g, h] {
        let rep = check_action(a);
        if !rep.is_ok() {
            return Err(Error::InvalidAction(rep));
        }
        require_free(a)?;
    }
    if let Some((t, x, k)) = commute_witness(g, h) {
        return Err(Error::NotCommuting {
            witness: format!("(t·x)·k != t·(x·k) at t={}, x={}, k={}", g.group.label(t), g.target.label(x), h.group.label(k)),
        });
    }

    let (quotient_h, orbit_left) = orbit_space_action(h)?;
    let g_on_quotient = GroupAction::from_fn(g.group.clone(), quotient_h.groupoid.clone(), Side::Left, |t, o| {
        quotient_h.class_of[g.apply(t, quotient_h.rep[o.0]).0]
    })?;
    let g_on_z = SpaceAction::group_on_arrows(g);
    let (p, left_action) = semidirect_space_action(&g_on_quotient, &g_on_z, &orbit_left)?;

    let (quotient_g, orbit_right) = orbit_space_action_right(g)?;
    let h_on_quotient = GroupAction::from_fn(h.group.clone(), quotient_g.groupoid.clone(), Side::Right, |k, o| {
        quotient_g.class_of[h.apply(k, quotient_g.rep[o.0]).0]
    })?;
    let h_on_z = SpaceAction::group_on_arrows(h);
    let (q, right_action) = semidirect_right_space_action(&h_on_quotient, &h_on_z, &orbit_right)?;

    Ok(SymmetricGroupoidEquivalence {
        equivalence: GroupoidEquivalence { left_action, right_action },
        g: g.clone(),
        h: h.clone(),
        quotient_h,
        quotient_g,
        g_on_quotient,
        h_on_quotient,
        p,
        q,
    })
}

/// `_L[z1, z2] = (z1(t·z2⁻¹)·H, t)` with `t` unique such that
/// `s(z1) = t·s(z2)`; the identity `z1 = _L[z1, z2]·z2` is rechecked.
pub fn left_bracket(e: &SymmetricGroupoidEquivalence, z1: usize, z2: usize) -> Result<Arrow> {
    let eq = &e.equivalence;
    if eq.sigma(z1) != eq.sigma(z2) {
        return Err(Error::Precondition(format!(
            "σ({}) != σ({})",
            eq.point_label(z1),
            eq.point_label(z2)
        )));
    }
    let x = &e.g.target;
    let (a, b) = (Arrow(z1), Arrow(z2));
    let t = unique(
        e.g.group.elements().filter(|&t| x.src(a) == e.g.apply_unit(t, x.src(b))),
        "t with s(z1) = t·s(z2)",
    )?;
    let w = x.mul(a, e.g.apply(t, x.inv(b)));
    let p = e.p.arrow(e.quotient_h.class_of[w.0], t);
    if eq.act_left(p, z2) != Some(z1) {
        return Err(Error::Internal(format!(
            "left bracket identity fails for ({}, {})",
            eq.point_label(z1),
            eq.point_label(z2)
        )));
    }
    Ok(p)
}

/// `[z1, z2]_R = (h, G·(z1⁻¹·h)z2)` with `h` unique such that
/// `r(z2) = r(z1)·h`; the identity `z2 = z1·[z1, z2]_R` is rechecked.
pub fn right_bracket(e: &SymmetricGroupoidEquivalence, z1: usize, z2: usize) -> Result<Arrow> {
    let eq = &e.equivalence;
    if eq.rho(z1) != eq.rho(z2) {
        return Err(Error::Precondition(format!(
            "ρ({}) != ρ({})",
            eq.point_label(z1),
            eq.point_label(z2)
        )));
    }
    let x = &e.h.target;
    let (a, b) = (Arrow(z1), Arrow(z2));
    let k = unique(
        e.h.group.elements().filter(|&k| x.rng(b) == e.h.apply_unit(k, x.rng(a))),
        "h with r(z2) = r(z1)·h",
    )?;
    let w = x.mul(e.h.apply(k, x.inv(a)), b);
    let q = e.q.arrow(e.quotient_g.class_of[w.0], k);
    if eq.act_right(z1, q) != Some(z2) {
        return Err(Error::Internal(format!(
            "right bracket identity fails for ({}, {})",
            eq.point_label(z1),
            eq.point_label(z2)
        )));
    }
    Ok(q)
}

/// Exhaustive check of the equivalence axioms: both actions valid, (i) the
/// left action is free, (ii) the right action is free, (iii) they commute,
/// (iv) `ρ` identifies `Z/Q` with the units of `P`, (v) `σ` identifies
/// `P\Z` with the units of `Q`; plus existence and uniqueness of both
/// brackets and their joint surjectivity.
pub fn verify_groupoid_equivalence(e: &GroupoidEquivalence) -> ValidationReport {
    let mut rep = ValidationReport::new("groupoid equivalence");
    let n = e.n_points();
    let (p, q) = (e.left(), e.right());
    if e.right_action.n_points() != n {
        rep.fail("tables", "actions are on different spaces", "");
        return rep;
    }
    let la = check_space_action(&e.left_action);
    let ra = check_space_action(&e.right_action);
    for (name, r) in [("left-action", &la), ("right-action", &ra)] {
        for v in &r.violations {
            rep.push_capped(name, format!("{}: {}", v.check, v.message), v.witness.clone());
        }
        rep.record(name, r.checks.iter().map(|c| c.cases).sum(), 0.0);
    }
    if !la.check_passed("tables") || !ra.check_passed("tables") {
        return rep;
    }

    match e.left_action.free_witness() {
        Some((a, z)) => rep.fail("(i) left free", "non-unit arrow fixes a point", format!("{} fixes {}", p.label(a), e.point_label(z))),
        None => rep.record("(i) left free", p.n_arrows() * n, 0.0),
    }
    match e.right_action.free_witness() {
        Some((a, z)) => rep.fail("(ii) right free", "non-unit arrow fixes a point", format!("{} fixes {}", q.label(a), e.point_label(z))),
        None => rep.record("(ii) right free", q.n_arrows() * n, 0.0),
    }

    let mut cases = 0;
    for z in 0..n {
        for a in p.arrows() {
            let Some(az) = e.act_left(a, z) else { continue };
            for b in q.arrows() {
                let Some(zb) = e.act_right(z, b) else { continue };
                cases += 1;
                let lhs = e.act_right(az, b);
                let rhs = e.act_left(a, zb);
                if lhs.is_none() || lhs != rhs {
                    rep.push_capped(
                        "(iii) commute",
                        "(p·z)·q != p·(z·q)",
                        format!("p={}, z={}, q={}", p.label(a), e.point_label(z), q.label(b)),
                    );
                }
            }
        }
    }
    rep.record("(iii) commute", cases, 0.0);

    // Bracket counts: left_count[z1][z2] = #{p : p·z2 = z1}, similarly right.
    let mut left_count = vec![0u32; n * n];
    let mut right_count = vec![0u32; n * n];
    let mut left_hit = vec![false; p.n_arrows()];
    let mut right_hit = vec![false; q.n_arrows()];
    for z in 0..n {
        for a in p.arrows() {
            if let Some(w) = e.act_left(a, z) {
                left_count[w * n + z] += 1;
                left_hit[a.0] = true;
            }
        }
        for b in q.arrows() {
            if let Some(w) = e.act_right(z, b) {
                right_count[z * n + w] += 1;
                right_hit[b.0] = true;
            }
        }
    }

    check_fibring(
        &mut rep,
        "(iv) rho",
        e,
        |z| e.rho(z),
        p.n_units(),
        |z| q.arrows().filter_map(move |b| e.act_right(z, b).map(|w| (b, w))).collect(),
        |z1, z2| right_count[z1 * n + z2],
        q,
        p,
    );
    check_fibring(
        &mut rep,
        "(v) sigma",
        e,
        |z| e.sigma(z),
        q.n_units(),
        |z| p.arrows().filter_map(move |a| e.act_left(a, z).map(|w| (a, w))).collect(),
        |z1, z2| left_count[z2 * n + z1],
        p,
        q,
    );

    for (name, count, hit, fib, g) in [
        ("left-bracket", &left_count, &left_hit, &e.right_action.fibring, p),
        ("right-bracket", &right_count, &right_hit, &e.left_action.fibring, q),
    ] {
        let mut cases = 0;
        for z1 in 0..n {
            for z2 in 0..n {
                if fib[z1] != fib[z2] {
                    continue;
                }
                cases += 1;
                let c = count[z1 * n + z2];
                if c != 1 {
                    rep.push_capped(
                        name,
                        format!("{c} arrows realise the bracket (expected 1)"),
                        format!("({}, {})", e.point_label(z1), e.point_label(z2)),
                    );
                }
            }
        }
        rep.record(name, cases, 0.0);
        if let Some(a) = hit.iter().position(|h| !h) {
            rep.fail(name, "bracket map is not surjective", g.label(Arrow(a)).to_string());
        }
    }
    rep.note("properness", "vacuous for finite spaces");
    rep.note("openness", "fibring maps checked through the orbit-space bijections");
    rep
}

/// `f` is constant on orbits of the other groupoid, its fibers are single
/// orbits, and it is onto the units of its own groupoid.
#[allow(clippy::too_many_arguments)]
fn check_fibring(
    rep: &mut ValidationReport,
    name: &str,
    e: &GroupoidEquivalence,
    f: impl Fn(usize) -> Unit,
    n_units: usize,
    moves: impl Fn(usize) -> Vec<(Arrow, usize)>,
    count: impl Fn(usize, usize) -> u32,
    other: &FiniteGroupoid,
    own: &FiniteGroupoid,
) {
    let n = e.n_points();
    let mut cases = 0;
    for z in 0..n {
        for (b, w) in moves(z) {
            cases += 1;
            if f(w) != f(z) {
                rep.push_capped(
                    name,
                    "fibring map is not invariant under the other action",
                    format!("point {} moved by {}", e.point_label(z), other.label(b)),
                );
            }
        }
    }
    for z1 in 0..n {
        for z2 in 0..n {
            if f(z1) == f(z2) {
                cases += 1;
                if count(z1, z2) == 0 {
                    rep.push_capped(
                        name,
                        "points in one fiber lie in different orbits",
                        format!("({}, {})", e.point_label(z1), e.point_label(z2)),
                    );
                }
            }
        }
    }
    let mut hit = vec![false; n_units];
    for z in 0..n {
        hit[f(z).0] = true;
    }
    if let Some(u) = hit.iter().position(|h| !h) {
        rep.push_capped(name, "fibring map is not onto the units", own.unit_label(Unit(u)).to_string());
    }
    rep.record(name, cases, 0.0);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groupoid::{validate_groupoid, FiniteGroup};

    pub(crate) fn four_point() -> (GroupAction, GroupAction) {
        let x = FiniteGroupoid::pair(4).unwrap();
        let z2 = FiniteGroup::cyclic(2).unwrap();
        let g = GroupAction::from_unit_permutations(z2.clone(), x.clone(), Side::Left, &[vec![0, 1, 2, 3], vec![2, 3, 0, 1]]).unwrap();
        let h = GroupAction::from_unit_permutations(z2, x, Side::Right, &[vec![0, 1, 2, 3], vec![1, 0, 3, 2]]).unwrap();
        (g, h)
    }

    #[test]
    fn four_point_instance_is_an_equivalence() {
        let (g, h) = four_point();
        let e = symmetric_groupoid_equivalence(&g, &h).unwrap();
        assert_eq!(e.equivalence.left().n_arrows(), 16);
        assert_eq!(e.equivalence.right().n_arrows(), 16);
        assert!(validate_groupoid(e.equivalence.left()).is_ok());
        let rep = verify_groupoid_equivalence(&e.equivalence);
        assert!(rep.is_ok(), "{rep}");
    }

    #[test]
    fn trivial_groups_give_identity_equivalence() {
        let x = FiniteGroupoid::pair(3).unwrap();
        let g = GroupAction::trivial(FiniteGroup::trivial(), x.clone(), Side::Left);
        let h = GroupAction::trivial(FiniteGroup::trivial(), x.clone(), Side::Right);
        let e = symmetric_groupoid_equivalence(&g, &h).unwrap();
        assert!(verify_groupoid_equivalence(&e.equivalence).is_ok());
        assert!(verify_groupoid_equivalence(&GroupoidEquivalence::identity(&x)).is_ok());
    }

    #[test]
    fn rho_factors_through_right_action() {
        let (g, h) = four_point();
        let e = symmetric_groupoid_equivalence(&g, &h).unwrap();
        let eq = &e.equivalence;
        for z in 0..eq.n_points() {
            for b in eq.right().arrows() {
                if let Some(w) = eq.act_right(z, b) {
                    assert_eq!(eq.rho(w), eq.rho(z));
                }
            }
        }
    }

    #[test]
    fn brackets_match_search_and_identities() {
        let (g, h) = four_point();
        let e = symmetric_groupoid_equivalence(&g, &h).unwrap();
        let eq = &e.equivalence;
        let x = &g.target;
        let a = x.arrow_by_label("(1,2)").unwrap().0;
        let b = x.arrow_by_label("(1,1)").unwrap().0;
        if eq.sigma(a) == eq.sigma(b) {
            let p = left_bracket(&e, a, b).unwrap();
            assert_eq!(eq.act_left(p, b), Some(a));
        }
        for z1 in 0..eq.n_points() {
            assert_eq!(left_bracket(&e, z1, z1).unwrap(), eq.left().unit_arrow(eq.rho(z1)));
            assert_eq!(right_bracket(&e, z1, z1).unwrap(), eq.right().unit_arrow(eq.sigma(z1)));
            for z2 in 0..eq.n_points() {
                if eq.sigma(z1) == eq.sigma(z2) {
                    assert_eq!(left_bracket(&e, z1, z2).unwrap(), eq.left_bracket_search(z1, z2).unwrap());
                    let count = g.group.elements().filter(|&t| x.src(Arrow(z1)) == g.apply_unit(t, x.src(Arrow(z2)))).count();
                    assert_eq!(count, 1);
                } else {
                    assert!(matches!(left_bracket(&e, z1, z2), Err(Error::Precondition(_))));
                }
                if eq.rho(z1) == eq.rho(z2) {
                    assert_eq!(right_bracket(&e, z1, z2).unwrap(), eq.right_bracket_search(z1, z2).unwrap());
                }
            }
        }
    }

    #[test]
    fn corrupted_sigma_fails_item_v() {
        let (g, h) = four_point();
        let mut e = symmetric_groupoid_equivalence(&g, &h).unwrap().equivalence;
        let old = e.right_action.fibring[5];
        e.right_action.fibring[5] = Unit((old.0 + 1) % e.right().n_units());
        let rep = verify_groupoid_equivalence(&e);
        assert!(!rep.check_passed("(v) sigma"));
        assert!(!rep.violations_of("(v) sigma").next().unwrap().witness.is_empty());
    }

    #[test]
    fn non_commuting_actions_rejected() {
        let x = FiniteGroupoid::pair(4).unwrap();
        let g = GroupAction::from_unit_permutations(FiniteGroup::cyclic(2).unwrap(), x.clone(), Side::Left, &[vec![0, 1, 2, 3], vec![1, 0, 3, 2]]).unwrap();
        let cycle: Vec<Vec<usize>> = (0..4).map(|k| (0..4).map(|i| (i + k) % 4).collect()).collect();
        let h = GroupAction::from_unit_permutations(FiniteGroup::cyclic(4).unwrap(), x, Side::Right, &cycle).unwrap();
        let err = symmetric_groupoid_equivalence(&g, &h).unwrap_err();
        assert!(matches!(err, Error::NotCommuting { .. }), "{err}");
    }
}
