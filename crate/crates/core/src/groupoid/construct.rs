use std::collections::HashMap;

use super::action::{check_space_action, require_free};
use super::{check_action, check_homomorphism, Arrow, FiniteGroupoid, GroupAction, Side, SpaceAction, Unit};
use crate::error::{Error, Result};
use crate::report::ValidationReport;

/// Returns the only item of `iter`, failing if there is none or more than one.
pub(crate) fn unique<T>(mut iter: impl Iterator<Item = T>, what: &str) -> Result<T> {
    let first = iter
        .next()
        .ok_or_else(|| Error::Precondition(format!("no {what} exists")))?;
    if iter.next().is_some() {
        return Err(Error::Internal(format!("{what} is not unique")));
    }
    Ok(first)
}

fn require_valid(a: &GroupAction, side: Side) -> Result<()> {
    a.require_side(side)?;
    let rep = check_action(a);
    if rep.is_ok() {
        Ok(())
    } else {
        Err(Error::InvalidAction(rep))
    }
}

/// The transformation groupoid `𝒳∗Ω` of a left groupoid action.
#[derive(Debug, Clone)]
pub struct Transformation {
    pub groupoid: FiniteGroupoid,
    /// `(x, u)` for each arrow, with `src(x) == ρ(u)`.
    pub pairs: Vec<(Arrow, usize)>,
    index: HashMap<(Arrow, usize), Arrow>,
}

impl Transformation {
    pub fn arrow(&self, x: Arrow, u: usize) -> Option<Arrow> {
        self.index.get(&(x, u)).copied()
    }
}

/// Arrows `(x, u)` with `src(x) = ρ(u)`; `(x, y·u)(y, u) = (xy, u)`,
/// `(x, u)⁻¹ = (x⁻¹, x·u)`. Unit `u` of the result is the point `u`.
pub fn transformation_groupoid(a: &SpaceAction) -> Result<Transformation> {
    if a.side != Side::Left {
        return Err(Error::SideMismatch { expected: "left" });
    }
    let rep = check_space_action(a);
    if !rep.is_ok() {
        return Err(Error::InvalidAction(rep));
    }
    let x = &a.groupoid;
    let n = a.n_points();
    let mut pairs = Vec::new();
    for y in x.arrows() {
        for u in 0..n {
            if a.defined(y, u) {
                pairs.push((y, u));
            }
        }
    }
    let index: HashMap<(Arrow, usize), Arrow> =
        pairs.iter().enumerate().map(|(k, &p)| (p, Arrow(k))).collect();
    let act = |y: Arrow, u: usize| a.act(y, u).expect("fibred pair");
    let labels = pairs
        .iter()
        .map(|&(y, u)| format!("({},{})", x.label(y), a.point_labels[u]))
        .collect();
    let unit_arrow = (0..n)
        .map(|u| index[&(x.unit_arrow(a.fibring[u]), u)])
        .collect();
    let src = pairs.iter().map(|&(_, u)| Unit(u)).collect();
    let rng = pairs.iter().map(|&(y, u)| Unit(act(y, u))).collect();
    let inv = pairs
        .iter()
        .map(|&(y, u)| index[&(x.inv(y), act(y, u))])
        .collect();
    let groupoid = FiniteGroupoid::from_fn(
        labels,
        a.point_labels.clone(),
        unit_arrow,
        src,
        rng,
        inv,
        |p, q| {
            let (y, _) = pairs[p.0];
            let (z, u) = pairs[q.0];
            index[&(x.mul(y, z), u)]
        },
    )?;
    Ok(Transformation { groupoid, pairs, index })
}

/// A semidirect product groupoid. Arrow `(x, t)` (left) or `(t, x)` (right)
/// has index `x * |G| + t`; units are those of the base groupoid.
#[derive(Debug, Clone)]
pub struct Semidirect {
    pub groupoid: FiniteGroupoid,
    pub side: Side,
    pub group_order: usize,
}

impl Semidirect {
    #[inline]
    pub fn arrow(&self, x: Arrow, t: usize) -> Arrow {
        Arrow(x.0 * self.group_order + t)
    }

    /// The base arrow and group element of a semidirect arrow.
    #[inline]
    pub fn split(&self, a: Arrow) -> (Arrow, usize) {
        (Arrow(a.0 / self.group_order), a.0 % self.group_order)
    }
}

/// `𝒳⋊G`: `(x,s)(y,t) = (x(s·y), st)`, `r(x,t) = r(x)`, `s(x,t) = t⁻¹·s(x)`,
/// `(x,s)⁻¹ = (s⁻¹·x⁻¹, s⁻¹)`.
pub fn semidirect_left(a: &GroupAction) -> Result<Semidirect> {
    require_valid(a, Side::Left)?;
    let x = &a.target;
    let g = &a.group;
    let m = g.order();
    let sd = |y: Arrow, t: usize| Arrow(y.0 * m + t);
    let mut labels = Vec::new();
    let mut src = Vec::new();
    let mut rng = Vec::new();
    let mut inv = Vec::new();
    for y in x.arrows() {
        for t in g.elements() {
            let ti = g.inv(t);
            labels.push(format!("({},{})", x.label(y), g.label(t)));
            src.push(a.apply_unit(ti, x.src(y)));
            rng.push(x.rng(y));
            inv.push(sd(a.apply(ti, x.inv(y)), ti));
        }
    }
    let unit_arrow = x.units().map(|u| sd(x.unit_arrow(u), g.identity)).collect();
    let groupoid = FiniteGroupoid::from_fn(labels, x.unit_labels.clone(), unit_arrow, src, rng, inv, |p, q| {
        let (y, s) = (Arrow(p.0 / m), p.0 % m);
        let (z, t) = (Arrow(q.0 / m), q.0 % m);
        sd(x.mul(y, a.apply(s, z)), g.mul(s, t))
    })?;
    Ok(Semidirect { groupoid, side: Side::Left, group_order: m })
}

/// `H⋉𝒳`: `(s,x)(t,y) = (st, (x·t)y)`, `r(t,x) = r(x)·t⁻¹`, `s(t,x) = s(x)`,
/// `(s,x)⁻¹ = (s⁻¹, x⁻¹·s⁻¹)`.
pub fn semidirect_right(a: &GroupAction) -> Result<Semidirect> {
    require_valid(a, Side::Right)?;
    let x = &a.target;
    let g = &a.group;
    let m = g.order();
    let sd = |y: Arrow, t: usize| Arrow(y.0 * m + t);
    let mut labels = Vec::new();
    let mut src = Vec::new();
    let mut rng = Vec::new();
    let mut inv = Vec::new();
    for y in x.arrows() {
        for t in g.elements() {
            let ti = g.inv(t);
            labels.push(format!("({},{})", g.label(t), x.label(y)));
            src.push(x.src(y));
            rng.push(a.apply_unit(ti, x.rng(y)));
            inv.push(sd(a.apply(ti, x.inv(y)), ti));
        }
    }
    let unit_arrow = x.units().map(|u| sd(x.unit_arrow(u), g.identity)).collect();
    let groupoid = FiniteGroupoid::from_fn(labels, x.unit_labels.clone(), unit_arrow, src, rng, inv, |p, q| {
        let (y, s) = (Arrow(p.0 / m), p.0 % m);
        let (z, t) = (Arrow(q.0 / m), q.0 % m);
        sd(x.mul(a.apply(t, y), z), g.mul(s, t))
    })?;
    Ok(Semidirect { groupoid, side: Side::Right, group_order: m })
}

/// The orbit groupoid of a free right action, with its quotient map.
///
/// Each orbit is represented by its smallest arrow index; quotient arrows
/// and units are numbered in order of their representatives.
#[derive(Debug, Clone)]
pub struct Quotient {
    pub groupoid: FiniteGroupoid,
    pub class_of: Vec<Arrow>,
    pub rep: Vec<Arrow>,
    pub unit_class: Vec<Unit>,
    pub unit_rep: Vec<Unit>,
}

impl Quotient {
    /// The unique `h` with `src(rep(o)·h) == u`.
    pub fn adjust_source(&self, a: &GroupAction, o: Arrow, u: Unit) -> Result<usize> {
        let r = self.rep[o.0];
        unique(
            a.group.elements().filter(|&h| a.target.src(a.apply(h, r)) == u),
            "group element matching sources",
        )
    }

    /// The unique `h` with `rng(rep(o)·h) == u`.
    pub fn adjust_range(&self, a: &GroupAction, o: Arrow, u: Unit) -> Result<usize> {
        let r = self.rep[o.0];
        unique(
            a.group.elements().filter(|&h| a.target.rng(a.apply(h, r)) == u),
            "group element matching ranges",
        )
    }
}

fn orbits(n: usize, order: usize, act: impl Fn(usize, usize) -> usize) -> (Vec<usize>, Vec<usize>) {
    let mut class = vec![usize::MAX; n];
    let mut reps = Vec::new();
    for x in 0..n {
        if class[x] != usize::MAX {
            continue;
        }
        for h in 0..order {
            class[act(h, x)] = reps.len();
        }
        reps.push(x);
    }
    (class, reps)
}

/// `𝒳/H` for a free right action: `(x·H)(y·H) = (xy)·H` after moving `x`
/// within its orbit so that sources match.
pub fn quotient_groupoid(a: &GroupAction) -> Result<Quotient> {
    require_valid(a, Side::Right)?;
    require_free(a)?;
    let x = &a.target;
    let order = a.group.order();
    let (class, reps) = orbits(x.n_arrows(), order, |h, y| a.apply(h, Arrow(y)).0);
    let (uclass, ureps) = orbits(x.n_units(), order, |h, u| a.apply_unit(h, Unit(u)).0);
    let class_of: Vec<Arrow> = class.into_iter().map(Arrow).collect();
    let rep: Vec<Arrow> = reps.into_iter().map(Arrow).collect();
    let unit_class: Vec<Unit> = uclass.into_iter().map(Unit).collect();
    let unit_rep: Vec<Unit> = ureps.into_iter().map(Unit).collect();

    let labels = rep.iter().map(|&r| format!("[{}]", x.label(r))).collect();
    let unit_labels = unit_rep.iter().map(|&u| format!("[{}]", x.unit_label(u))).collect();
    let unit_arrow = unit_rep.iter().map(|&u| class_of[x.unit_arrow(u).0]).collect();
    let src = rep.iter().map(|&r| unit_class[x.src(r).0]).collect();
    let rng = rep.iter().map(|&r| unit_class[x.rng(r).0]).collect();
    let inv = rep.iter().map(|&r| class_of[x.inv(r).0]).collect();

    let nq = rep.len();
    let mut table = HashMap::new();
    for o1 in 0..nq {
        for o2 in 0..nq {
            let (r1, r2) = (rep[o1], rep[o2]);
            if unit_class[x.src(r1).0] != unit_class[x.rng(r2).0] {
                continue;
            }
            let h = unique(
                a.group.elements().filter(|&h| x.src(a.apply(h, r1)) == x.rng(r2)),
                "orbit adjustment",
            )?;
            table.insert((o1, o2), class_of[x.mul(a.apply(h, r1), r2).0]);
        }
    }
    let groupoid = FiniteGroupoid::from_fn(labels, unit_labels, unit_arrow, src, rng, inv, |p, q| table[&(p.0, q.0)])?;
    Ok(Quotient { groupoid, class_of, rep, unit_class, unit_rep })
}

/// Exhaustive checks that the quotient composition does not depend on the
/// chosen representatives, that the quotient map is a homomorphism, and
/// that counting measures on range fibers descend.
pub fn verify_quotient(a: &GroupAction, q: &Quotient) -> ValidationReport {
    let x = &a.target;
    let mut rep = check_homomorphism(x, &q.groupoid, &q.class_of, false);
    rep.subject = "quotient groupoid".into();
    for u in x.units() {
        let lhs = x.range_fiber(u).len();
        let rhs = q.groupoid.range_fiber(q.unit_class[u.0]).len();
        if lhs != rhs {
            rep.push_capped("haar", "range fiber sizes differ", x.unit_label(u).to_string());
        }
    }
    rep.record("haar", x.n_units(), 0.0);
    if q.groupoid.n_arrows() * a.group.order() != x.n_arrows() {
        rep.fail("cardinality", "|x/H|·|H| != |x|", format!("{} * {} vs {}", q.groupoid.n_arrows(), a.group.order(), x.n_arrows()));
    }
    for y in x.arrows() {
        if q.rep[q.class_of[y.0].0] > y {
            rep.push_capped("representative", "representative is not minimal", x.label(y).to_string());
        }
    }
    rep
}

/// The left action of `𝒳/H` on the arrows of `𝒳`: `(x·H)·y = (x·h)y` with
/// `h` unique such that `src(x·h) = rng(y)`; fibring `y ↦ rng(y)·H`.
pub fn orbit_space_action(a: &GroupAction) -> Result<(Quotient, SpaceAction)> {
    let q = quotient_groupoid(a)?;
    let x = &a.target;
    let fibring = x.arrows().map(|y| q.unit_class[x.rng(y).0]).collect();
    let mut err = None;
    let act = SpaceAction::from_fn_unchecked(q.groupoid.clone(), x.arrow_labels.clone(), fibring, Side::Left, |o, y| {
        let y = Arrow(y);
        match q.adjust_source(a, o, x.rng(y)) {
            Ok(h) => x.mul(a.apply(h, q.rep[o.0]), y).0,
            Err(e) => {
                err = Some(e);
                0
            }
        }
    });
    if let Some(e) = err {
        return Err(e);
    }
    let rep = check_space_action(&act);
    if !rep.is_ok() {
        return Err(Error::InvalidAction(rep));
    }
    Ok((q, act))
}

/// The right action of `G\𝒳` on the arrows of `𝒳` for a free left action:
/// `y·(G·z) = y(t·z)` with `t` unique such that `src(y) = t·rng(z)`; fibring
/// `y ↦ G·src(y)`. The returned quotient is built from the flipped action.
pub fn orbit_space_action_right(g: &GroupAction) -> Result<(Quotient, SpaceAction)> {
    g.require_side(Side::Left)?;
    let flipped = g.flipped();
    let q = quotient_groupoid(&flipped)?;
    let x = &g.target;
    let fibring = x.arrows().map(|y| q.unit_class[x.src(y).0]).collect();
    let mut err = None;
    let act = SpaceAction::from_fn_unchecked(q.groupoid.clone(), x.arrow_labels.clone(), fibring, Side::Right, |o, y| {
        let y = Arrow(y);
        let r = q.rep[o.0];
        match unique(g.group.elements().filter(|&t| x.rng(g.apply(t, r)) == x.src(y)), "orbit adjustment") {
            Ok(t) => x.mul(y, g.apply(t, r)).0,
            Err(e) => {
                err = Some(e);
                0
            }
        }
    });
    if let Some(e) = err {
        return Err(e);
    }
    let rep = check_space_action(&act);
    if !rep.is_ok() {
        return Err(Error::InvalidAction(rep));
    }
    Ok((q, act))
}

/// Checks `s·(x·u) = (s·x)·(s·u)` (mirrored for right actions) and
/// equivariance of the fibring map; the error carries a witness `(x, t, u)`.
pub fn check_covariant(g: &GroupAction, s1: &SpaceAction, s2: &SpaceAction) -> Result<()> {
    if s1.side != g.side || s2.side != g.side {
        return Err(Error::SideMismatch { expected: g.side.name() });
    }
    if s1.n_points() != s2.n_points() || s1.groupoid.n_arrows() != g.group.order() || s2.groupoid != g.target {
        return Err(Error::InvalidArgument("covariance data do not match".into()));
    }
    let x = &g.target;
    for t in g.group.elements() {
        for u in 0..s1.n_points() {
            let tu = s1.act(Arrow(t), u).expect("group actions are total");
            if s2.fibring[tu] != g.apply_unit(t, s2.fibring[u]) {
                return Err(Error::NotCovariant {
                    witness: format!("fibring: t={}, u={}", g.group.label(t), s1.point_labels[u]),
                });
            }
            for y in x.arrows() {
                let Some(yu) = s2.act(y, u) else { continue };
                let lhs = s1.act(Arrow(t), yu);
                let rhs = s2.act(g.apply(t, y), tu);
                if lhs != rhs {
                    return Err(Error::NotCovariant {
                        witness: format!("(x, t, u) = ({}, {}, {})", x.label(y), g.group.label(t), s1.point_labels[u]),
                    });
                }
            }
        }
    }
    Ok(())
}

/// The action of `𝒳⋊G` on `Ω`: `(x,t)·u = x·(t·u)`, defined iff
/// `s(x) = ρ(t·u)`; fibring `u ↦ (ρ(u), e)`.
pub fn semidirect_space_action(g: &GroupAction, s1: &SpaceAction, s2: &SpaceAction) -> Result<(Semidirect, SpaceAction)> {
    g.require_side(Side::Left)?;
    check_covariant(g, s1, s2)?;
    let sd = semidirect_left(g)?;
    let act = SpaceAction::from_fn(sd.groupoid.clone(), s2.point_labels.clone(), s2.fibring.clone(), Side::Left, |p, u| {
        let (y, t) = sd.split(p);
        let tu = s1.act(Arrow(t), u).expect("group actions are total");
        s2.act(y, tu).expect("defined by the fibring condition")
    })?;
    Ok((sd, act))
}

/// The action of `H⋉𝒳` on `Ω`: `u·(h,x) = (u·h)·x`, defined iff
/// `σ(u) = r(x·h⁻¹)`; fibring `u ↦ (e, σ(u))`.
pub fn semidirect_right_space_action(h: &GroupAction, s1: &SpaceAction, s2: &SpaceAction) -> Result<(Semidirect, SpaceAction)> {
    h.require_side(Side::Right)?;
    check_covariant(h, s1, s2)?;
    let sd = semidirect_right(h)?;
    let act = SpaceAction::from_fn(sd.groupoid.clone(), s2.point_labels.clone(), s2.fibring.clone(), Side::Right, |p, u| {
        let (y, k) = sd.split(p);
        let uk = s1.act(Arrow(k), u).expect("group actions are total");
        s2.act(y, uk).expect("defined by the fibring condition")
    })?;
    Ok((sd, act))
}

/// `𝒳 ≅ (𝒳/H)∗𝒳⁽⁰⁾` for a free right action.
#[derive(Debug, Clone)]
pub struct PrincipalDecomposition {
    pub quotient: Quotient,
    /// Left action of `𝒳/H` on the units of `𝒳`.
    pub action: SpaceAction,
    pub transformation: Transformation,
    /// `θ_s(x) = (q(x), s(x))`, indexed by arrows of `𝒳`.
    pub theta_s: Vec<Arrow>,
}

/// Builds `𝒴 = 𝒳/H`, its action `y·u = r(x̃)` on `𝒳⁽⁰⁾` (with `x̃` the unique
/// arrow of the orbit `y` with source `u`), and `θ_s`.
pub fn principal_decomposition(a: &GroupAction) -> Result<PrincipalDecomposition> {
    let quotient = quotient_groupoid(a)?;
    let x = &a.target;
    let fibring = quotient.unit_class.clone();
    let mut err = None;
    let action = SpaceAction::from_fn_unchecked(quotient.groupoid.clone(), x.unit_labels.clone(), fibring, Side::Left, |o, u| {
        match quotient.adjust_source(a, o, Unit(u)) {
            Ok(h) => x.rng(a.apply(h, quotient.rep[o.0])).0,
            Err(e) => {
                err = Some(e);
                0
            }
        }
    });
    if let Some(e) = err {
        return Err(e);
    }
    let transformation = transformation_groupoid(&action)?;
    let theta_s = x
        .arrows()
        .map(|y| {
            transformation
                .arrow(quotient.class_of[y.0], x.src(y).0)
                .ok_or_else(|| Error::Internal("θ_s lands outside the transformation groupoid".into()))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PrincipalDecomposition { quotient, action, transformation, theta_s })
}

/// Exhaustive check that `θ_s` is an isomorphism, carries ranges to the
/// action (`θ_r = θ∘θ_s`), and is `H`-equivariant for `(y,u)·h = (y, u·h)`.
pub fn verify_principal_decomposition(a: &GroupAction, pd: &PrincipalDecomposition) -> ValidationReport {
    let x = &a.target;
    let t = &pd.transformation;
    let mut rep = check_homomorphism(x, &t.groupoid, &pd.theta_s, true);
    rep.subject = "principal decomposition".into();
    for y in x.arrows() {
        if t.groupoid.rng(pd.theta_s[y.0]) != Unit(x.rng(y).0) {
            rep.push_capped("range", "θ_s(x) does not end at r(x)", x.label(y).to_string());
        }
    }
    rep.record("range", x.n_arrows(), 0.0);
    let mut cases = 0;
    for h in a.group.elements() {
        for y in x.arrows() {
            cases += 1;
            let (o, u) = t.pairs[pd.theta_s[y.0].0];
            let moved = t.arrow(o, a.apply_unit(h, Unit(u)).0);
            if moved != Some(pd.theta_s[a.apply(h, y).0]) {
                rep.push_capped(
                    "equivariance",
                    "θ_s(x·h) != θ_s(x)·h",
                    format!("h={}, x={}", a.group.label(h), x.label(y)),
                );
            }
        }
    }
    rep.record("equivariance", cases, 0.0);
    rep
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groupoid::{validate_groupoid, FiniteGroup};

    fn z2() -> FiniteGroup {
        FiniteGroup::cyclic(2).unwrap()
    }

    fn perm_action(n: usize, perm: &[usize], side: Side) -> GroupAction {
        let x = FiniteGroupoid::pair(n).unwrap();
        let perms = vec![(0..n).collect(), perm.to_vec()];
        GroupAction::from_unit_permutations(z2(), x, side, &perms).unwrap()
    }

    #[test]
    fn transformation_of_swap() {
        let g = z2();
        let act = SpaceAction::group_on_set(&g, vec!["a".into(), "b".into()], Side::Left, |t, u| (t + u) % 2).unwrap();
        let t = transformation_groupoid(&act).unwrap();
        assert_eq!(t.groupoid.n_arrows(), 4);
        assert_eq!(t.groupoid.n_units(), 2);
        let ga = t.arrow(Arrow(1), 0).unwrap();
        assert_eq!(t.groupoid.inv(ga), t.arrow(Arrow(1), 1).unwrap());
        for (k, &(y, u)) in t.pairs.iter().enumerate() {
            assert_eq!(t.groupoid.src(Arrow(k)), Unit(u));
            assert_eq!(t.groupoid.rng(Arrow(k)), Unit(act.act(y, u).unwrap()));
        }
    }

    #[test]
    fn transformation_range_fibers_biject() {
        let x = FiniteGroupoid::pair(3).unwrap();
        let act = SpaceAction::left_translation(&x);
        let t = transformation_groupoid(&act).unwrap();
        for (k, &(y, u)) in t.pairs.iter().enumerate() {
            let fiber = x.range_fiber(x.rng(y));
            let images: std::collections::BTreeSet<Arrow> = fiber
                .iter()
                .map(|&z| {
                    let w = act.act(x.mul(x.inv(z), y), u).unwrap();
                    t.arrow(z, w).unwrap()
                })
                .collect();
            let target: std::collections::BTreeSet<Arrow> =
                t.groupoid.range_fiber(t.groupoid.rng(Arrow(k))).into_iter().collect();
            assert_eq!(images, target);
        }
    }

    #[test]
    fn semidirect_sizes_and_formulas() {
        let a = perm_action(2, &[1, 0], Side::Left);
        let sd = semidirect_left(&a).unwrap();
        assert_eq!(sd.groupoid.n_arrows(), 8);
        assert_eq!(sd.groupoid.n_units(), 2);
        for p in sd.groupoid.arrows() {
            let (y, t) = sd.split(p);
            let ti = a.group.inv(t);
            assert_eq!(sd.groupoid.src(p), a.apply_unit(ti, a.target.src(y)));
        }
        let b = perm_action(4, &[1, 0, 3, 2], Side::Right);
        let sr = semidirect_right(&b).unwrap();
        assert_eq!(sr.groupoid.n_arrows(), 32);
        assert!(validate_groupoid(&sr.groupoid).is_ok());
        for p in sr.groupoid.arrows() {
            let (y, t) = sr.split(p);
            assert_eq!(sr.groupoid.rng(p), b.apply_unit(b.group.inv(t), b.target.rng(y)));
        }
    }

    #[test]
    fn semidirect_with_trivial_action_is_product() {
        let x = FiniteGroupoid::pair(2).unwrap();
        let a = GroupAction::trivial(z2(), x.clone(), Side::Left);
        let sd = semidirect_left(&a).unwrap();
        let prod = FiniteGroupoid::product(&x, &a.group.groupoid);
        let map: Vec<Arrow> = sd.groupoid.arrows().collect();
        assert!(check_homomorphism(&sd.groupoid, &prod, &map, true).is_ok());
    }

    #[test]
    fn quotient_of_double_swap() {
        let a = perm_action(4, &[1, 0, 3, 2], Side::Right);
        let q = quotient_groupoid(&a).unwrap();
        assert_eq!(q.groupoid.n_arrows(), 8);
        assert_eq!(q.groupoid.n_units(), 2);
        assert!(verify_quotient(&a, &q).is_ok());
        for u in a.target.units() {
            let img = q.class_of[a.target.unit_arrow(u).0];
            assert_eq!(img, q.groupoid.unit_arrow(q.unit_class[u.0]));
        }
    }

    #[test]
    fn quotient_rejects_non_free() {
        let a = perm_action(3, &[1, 0, 2], Side::Right);
        assert!(matches!(quotient_groupoid(&a), Err(Error::NotFree { .. })));
    }

    #[test]
    fn orbit_action_valid_and_fibring_surjective() {
        let a = perm_action(4, &[1, 0, 3, 2], Side::Right);
        let (q, act) = orbit_space_action(&a).unwrap();
        assert!(check_space_action(&act).is_ok());
        for u in q.groupoid.units() {
            assert!(act.fibring.contains(&u));
        }
    }

    #[test]
    fn orbit_action_with_trivial_group_is_translation() {
        let x = FiniteGroupoid::pair(3).unwrap();
        let a = GroupAction::trivial(FiniteGroup::trivial(), x.clone(), Side::Right);
        let (_, act) = orbit_space_action(&a).unwrap();
        assert_eq!(act.table, SpaceAction::left_translation(&x).table);
    }

    #[test]
    fn covariant_swap_action() {
        let g = perm_action(2, &[1, 0], Side::Left);
        let s1 = SpaceAction::group_on_arrows(&g);
        let s2 = SpaceAction::left_translation(&g.target);
        let (sd, act) = semidirect_space_action(&g, &s1, &s2).unwrap();
        assert!(check_space_action(&act).is_ok());
        for p in sd.groupoid.arrows() {
            let (y, t) = sd.split(p);
            for u in 0..act.n_points() {
                let tu = s1.act(Arrow(t), u).unwrap();
                assert_eq!(act.defined(p, u), g.target.src(y) == s2.fibring[tu]);
            }
        }
    }

    #[test]
    fn non_covariant_action_reports_witness() {
        let g = perm_action(2, &[1, 0], Side::Left);
        let s1 = SpaceAction::group_on_set(&g.group, g.target.arrow_labels.clone(), Side::Left, |_, u| u).unwrap();
        let s2 = SpaceAction::left_translation(&g.target);
        let err = check_covariant(&g, &s1, &s2).unwrap_err();
        assert!(matches!(err, Error::NotCovariant { .. }));
    }

    #[test]
    fn right_covariant_action() {
        let h = perm_action(2, &[1, 0], Side::Right);
        let s1 = SpaceAction::group_on_arrows(&h);
        let s2 = SpaceAction::right_translation(&h.target);
        let (sd, act) = semidirect_right_space_action(&h, &s1, &s2).unwrap();
        assert!(check_space_action(&act).is_ok());
        for p in sd.groupoid.arrows() {
            let (y, k) = sd.split(p);
            let y_hinv = h.apply(h.group.inv(k), y);
            for u in 0..act.n_points() {
                assert_eq!(act.defined(p, u), s2.fibring[u] == h.target.rng(y_hinv));
            }
        }
    }

    #[test]
    fn principal_decomposition_of_double_swap() {
        let a = perm_action(4, &[1, 0, 3, 2], Side::Right);
        let pd = principal_decomposition(&a).unwrap();
        assert_eq!(pd.theta_s.len(), 16);
        assert!(verify_principal_decomposition(&a, &pd).is_ok());
        let t = &pd.transformation;
        for (p, q) in t.groupoid.composable_pairs() {
            let (y, _) = t.pairs[p.0];
            let (z, u) = t.pairs[q.0];
            assert_eq!(t.pairs[t.groupoid.mul(p, q).0], (pd.quotient.groupoid.mul(y, z), u));
        }
    }

    #[test]
    fn principal_decomposition_trivial_group() {
        let x = FiniteGroupoid::pair(2).unwrap();
        let a = GroupAction::trivial(FiniteGroup::trivial(), x.clone(), Side::Right);
        let pd = principal_decomposition(&a).unwrap();
        assert_eq!(pd.quotient.groupoid.n_arrows(), x.n_arrows());
        assert!(verify_principal_decomposition(&a, &pd).is_ok());
    }
}
