//! `build <construction>`: one library construction per entry, verified,
//! with the result emitted as model declarations.

use super::commands::{algebra_entry, scenario_equivalence};
use super::{Ctx, Entry, Usage};
use crate::fell::{
    check_module_action, make_trivial_cbundle, orbit_bundle_action, principal_fell_decomposition, quotient_fell_bundle,
    semidirect_fell_bundle, semidirect_fell_bundle_right, semidirect_orbit_bundle_action, transformation_fell_bundle,
    validate_fell_bundle, verify_principal_fell_decomposition, verify_quotient_bundle, BundleAction, FellBundle,
};
use crate::groupoid::{
    check_covariant, check_space_action, left_bracket, orbit_space_action, orbit_space_action_right,
    principal_decomposition, quotient_groupoid, right_bracket, semidirect_left, semidirect_right,
    semidirect_right_space_action, semidirect_space_action, symmetric_groupoid_equivalence, transformation_groupoid,
    validate_groupoid, verify_groupoid_equivalence, verify_principal_decomposition, verify_quotient, FiniteGroupoid,
    GroupAction, Side, SpaceAction,
};
use crate::io::{emit_algebra, emit_bundle, emit_groupoid, emit_space_action, Decl, Objects};
use crate::morita::{crossed_iso, linking_system};
use crate::report::ValidationReport;
use crate::star::{
    algebra_crossed_product, check_star_homomorphism, crossed_product, induced_algebra, section_action, section_algebra,
    StarAlgebra,
};

type Built = Result<(Entry, Vec<Decl>), Usage>;

pub struct Construction {
    pub name: &'static str,
    pub arity: usize,
    pub usage: &'static str,
    run_fn: fn(&Objects, &[String], &Ctx) -> Built,
}

impl Construction {
    pub fn run(&self, objs: &Objects, args: &[String], ctx: &Ctx) -> Built {
        (self.run_fn)(objs, args, ctx)
    }
}

macro_rules! constructions {
    ($($name:literal $arity:literal $usage:literal => $f:ident),* $(,)?) => {
        pub const CONSTRUCTIONS: &[Construction] = &[
            $(Construction { name: $name, arity: $arity, usage: $usage, run_fn: $f }),*
        ];
    };
}

constructions! {
    "pair-groupoid" 1 "<points>" => pair_groupoid,
    "transformation-groupoid" 1 "<space-action>" => transformation_gpd,
    "semidirect-groupoid" 1 "<action>" => semidirect_gpd,
    "quotient-groupoid" 1 "<action>" => quotient_gpd,
    "orbit-space-action" 1 "<action>" => orbit_space,
    "semidirect-space-action" 3 "<action> <group space-action> <space-action>" => semidirect_space,
    "principal-decomposition" 1 "<action>" => principal,
    "groupoid-equivalence" 2 "<left action> <right action>" => groupoid_equivalence,
    "cbundle" 2 "<algebra> <points>" => cbundle,
    "pullback" 2 "<bundle> <space-action>" => pullback,
    "transformation-bundle" 2 "<bundle> <space-action>" => transformation_bundle,
    "semidirect-bundle" 1 "<bundle-action>" => semidirect_bundle,
    "quotient-bundle" 1 "<bundle-action>" => quotient_bundle,
    "orbit-bundle-action" 1 "<bundle-action>" => orbit_bundle,
    "semidirect-orbit-action" 2 "<left bundle-action> <right bundle-action>" => semidirect_orbit,
    "principal-fell" 1 "<bundle-action>" => principal_fell,
    "section-algebra" 1 "<bundle>" => section,
    "crossed-product" 1 "<bundle-action>" => crossed,
    "induced-algebra" 3 "<right action on a set> <algebra> <automorphisms>" => induced,
    "linking" 1 "<scenario>" => linking,
}

pub fn find(name: &str) -> Result<&'static Construction, Usage> {
    CONSTRUCTIONS.iter().find(|c| c.name == name).ok_or_else(|| {
        let known: Vec<&str> = CONSTRUCTIONS.iter().map(|c| c.name).collect();
        Usage(format!("unknown construction `{name}`; known: {}", known.join(", ")))
    })
}

/// Records a library error as a failed entry.
fn attempt<T>(e: &mut Entry, r: crate::Result<T>) -> Option<T> {
    match r {
        Ok(v) => Some(v),
        Err(err) => {
            e.fail(format!("precondition: {err}"));
            None
        }
    }
}

fn bundle_decls(name: &str, b: &FellBundle) -> Vec<Decl> {
    let base = format!("{name}_base");
    vec![emit_groupoid(&base, &b.base), emit_bundle(name, &base, b)]
}

fn space_decls(name: &str, a: &SpaceAction) -> Vec<Decl> {
    let base = format!("{name}_groupoid");
    vec![emit_groupoid(&base, &a.groupoid), emit_space_action(name, &base, a)]
}

fn as_right(a: &GroupAction) -> GroupAction {
    match a.side {
        Side::Right => a.clone(),
        Side::Left => a.flipped(),
    }
}

fn as_right_bundle(ba: &BundleAction) -> BundleAction {
    match ba.side() {
        Side::Right => ba.clone(),
        Side::Left => ba.flipped(),
    }
}

fn pair_groupoid(_: &Objects, args: &[String], _: &Ctx) -> Built {
    let n: usize = args[0].parse().map_err(|_| Usage(format!("not a point count: {}", args[0])))?;
    let mut e = Entry::new("groupoid", "pair");
    let Some(g) = attempt(&mut e, FiniteGroupoid::pair(n)) else { return Ok((e, vec![])) };
    e.check(validate_groupoid(&g));
    Ok((e, vec![emit_groupoid("pair", &g)]))
}

fn transformation_gpd(o: &Objects, args: &[String], _: &Ctx) -> Built {
    let a = o.space_action(&args[0])?;
    let mut e = Entry::new("groupoid", "transformation");
    let Some(t) = attempt(&mut e, transformation_groupoid(a)) else { return Ok((e, vec![])) };
    e.detail(format!("{} arrows over {} points", t.groupoid.n_arrows(), t.groupoid.n_units()));
    e.check(validate_groupoid(&t.groupoid));
    Ok((e, vec![emit_groupoid("transformation", &t.groupoid)]))
}

fn semidirect_gpd(o: &Objects, args: &[String], _: &Ctx) -> Built {
    let a = o.action(&args[0])?;
    let mut e = Entry::new("groupoid", "semidirect");
    let r = match a.side {
        Side::Left => semidirect_left(a),
        Side::Right => semidirect_right(a),
    };
    let Some(sd) = attempt(&mut e, r) else { return Ok((e, vec![])) };
    e.detail(format!("{} semidirect product, {} arrows", a.side.name(), sd.groupoid.n_arrows()));
    e.check(validate_groupoid(&sd.groupoid));
    Ok((e, vec![emit_groupoid("semidirect", &sd.groupoid)]))
}

fn quotient_gpd(o: &Objects, args: &[String], _: &Ctx) -> Built {
    let a = as_right(o.action(&args[0])?);
    let mut e = Entry::new("groupoid", "quotient");
    let Some(q) = attempt(&mut e, quotient_groupoid(&a)) else { return Ok((e, vec![])) };
    e.check(validate_groupoid(&q.groupoid));
    e.check(verify_quotient(&a, &q));
    Ok((e, vec![emit_groupoid("quotient", &q.groupoid)]))
}

fn orbit_space(o: &Objects, args: &[String], _: &Ctx) -> Built {
    let a = o.action(&args[0])?;
    let mut e = Entry::new("space-action", "orbit");
    let r = match a.side {
        Side::Right => orbit_space_action(a),
        Side::Left => orbit_space_action_right(a),
    };
    let Some((_, act)) = attempt(&mut e, r) else { return Ok((e, vec![])) };
    e.check(check_space_action(&act));
    Ok((e, space_decls("orbit", &act)))
}

fn semidirect_space(o: &Objects, args: &[String], _: &Ctx) -> Built {
    let (g, s1, s2) = (o.action(&args[0])?, o.space_action(&args[1])?, o.space_action(&args[2])?);
    let mut e = Entry::new("space-action", "semidirect");
    if attempt(&mut e, check_covariant(g, s1, s2)).is_none() {
        return Ok((e, vec![]));
    }
    e.detail("covariant");
    let r = match g.side {
        Side::Left => semidirect_space_action(g, s1, s2),
        Side::Right => semidirect_right_space_action(g, s1, s2),
    };
    let Some((_, act)) = attempt(&mut e, r) else { return Ok((e, vec![])) };
    e.check(check_space_action(&act));
    Ok((e, space_decls("semidirect", &act)))
}

fn principal(o: &Objects, args: &[String], _: &Ctx) -> Built {
    let a = as_right(o.action(&args[0])?);
    let mut e = Entry::new("decomposition", "principal");
    let Some(pd) = attempt(&mut e, principal_decomposition(&a)) else { return Ok((e, vec![])) };
    e.check(verify_principal_decomposition(&a, &pd));
    let mut decls = space_decls("principal", &pd.action);
    decls.push(emit_groupoid("principal_transformation", &pd.transformation.groupoid));
    Ok((e, decls))
}

fn groupoid_equivalence(o: &Objects, args: &[String], _: &Ctx) -> Built {
    let (g, h) = (o.action(&args[0])?, o.action(&args[1])?);
    let mut e = Entry::new("equivalence", "symmetric");
    let Some(s) = attempt(&mut e, symmetric_groupoid_equivalence(g, h)) else { return Ok((e, vec![])) };
    e.check(verify_groupoid_equivalence(&s.equivalence));
    let z = &s.equivalence;
    let mut rep = ValidationReport::new("bracket formulas");
    let n = z.n_points();
    for z1 in 0..n {
        for z2 in 0..n {
            if z.sigma(z1) == z.sigma(z2) {
                let ok = matches!((left_bracket(&s, z1, z2), z.left_bracket_search(z1, z2)), (Ok(a), Ok(b)) if a == b);
                if !ok {
                    rep.push_capped("left bracket", "formula disagrees with search", format!("({}, {})", z.point_label(z1), z.point_label(z2)));
                }
            }
            if z.rho(z1) == z.rho(z2) {
                let ok = matches!((right_bracket(&s, z1, z2), z.right_bracket_search(z1, z2)), (Ok(a), Ok(b)) if a == b);
                if !ok {
                    rep.push_capped("right bracket", "formula disagrees with search", format!("({}, {})", z.point_label(z1), z.point_label(z2)));
                }
            }
        }
    }
    rep.record("left bracket", n * n, 0.0);
    rep.record("right bracket", n * n, 0.0);
    e.check(rep);
    Ok((e, vec![emit_groupoid("left_groupoid", z.left()), emit_groupoid("right_groupoid", z.right())]))
}

fn cbundle(o: &Objects, args: &[String], ctx: &Ctx) -> Built {
    let b = o.algebra(&args[0])?;
    let n: usize = args[1].parse().map_err(|_| Usage(format!("not a point count: {}", args[1])))?;
    let mut e = Entry::new("bundle", "cbundle");
    let points = (1..=n).map(|k| k.to_string()).collect();
    let Some(a) = attempt(&mut e, make_trivial_cbundle(b, points, ctx.tol)) else { return Ok((e, vec![])) };
    e.check(validate_fell_bundle(&a, ctx.tol));
    Ok((e, bundle_decls("cbundle", &a)))
}

fn pullback(o: &Objects, args: &[String], ctx: &Ctx) -> Built {
    let (b, act) = (o.bundle(&args[0])?, o.space_action(&args[1])?);
    let mut e = Entry::new("bundle", "pullback");
    let Some(t) = attempt(&mut e, transformation_groupoid(act)) else { return Ok((e, vec![])) };
    let proj: Vec<_> = t.pairs.iter().map(|&(x, _)| x).collect();
    let Some(p) = attempt(&mut e, b.pullback(&t.groupoid, &proj)) else { return Ok((e, vec![])) };
    e.check(validate_fell_bundle(&p, ctx.tol));
    if let Some((_, tb)) = attempt(&mut e, transformation_fell_bundle(b, act)) {
        if tb == p {
            e.detail("equals the transformation bundle");
        } else {
            e.fail("differs from the transformation bundle");
        }
    }
    Ok((e, bundle_decls("pullback", &p)))
}

fn transformation_bundle(o: &Objects, args: &[String], ctx: &Ctx) -> Built {
    let (b, act) = (o.bundle(&args[0])?, o.space_action(&args[1])?);
    let mut e = Entry::new("bundle", "transformation");
    let Some((_, tb)) = attempt(&mut e, transformation_fell_bundle(b, act)) else { return Ok((e, vec![])) };
    e.check(validate_fell_bundle(&tb, ctx.tol));
    Ok((e, bundle_decls("transformation", &tb)))
}

fn semidirect_bundle(o: &Objects, args: &[String], ctx: &Ctx) -> Built {
    let ba = o.bundle_action(&args[0])?;
    let mut e = Entry::new("bundle", "semidirect");
    let r = match ba.side() {
        Side::Left => semidirect_fell_bundle(ba),
        Side::Right => semidirect_fell_bundle_right(ba),
    };
    let Some((_, sb)) = attempt(&mut e, r) else { return Ok((e, vec![])) };
    e.check(validate_fell_bundle(&sb, ctx.tol));
    Ok((e, bundle_decls("semidirect", &sb)))
}

fn quotient_bundle(o: &Objects, args: &[String], ctx: &Ctx) -> Built {
    let ba = as_right_bundle(o.bundle_action(&args[0])?);
    let mut e = Entry::new("bundle", "quotient");
    let Some(qb) = attempt(&mut e, quotient_fell_bundle(&ba)) else { return Ok((e, vec![])) };
    e.check(validate_fell_bundle(&qb.bundle, ctx.tol));
    e.check(verify_quotient_bundle(&ba, &qb, ctx.tol));
    Ok((e, bundle_decls("quotient", &qb.bundle)))
}

fn orbit_bundle(o: &Objects, args: &[String], ctx: &Ctx) -> Built {
    let ba = as_right_bundle(o.bundle_action(&args[0])?);
    let mut e = Entry::new("module", "orbit-bundle-action");
    let Some((qb, m)) = attempt(&mut e, orbit_bundle_action(&ba)) else { return Ok((e, vec![])) };
    e.check(check_module_action(&m, ctx.tol));
    Ok((e, bundle_decls("orbit_quotient", &qb.bundle)))
}

fn semidirect_orbit(o: &Objects, args: &[String], ctx: &Ctx) -> Built {
    let (g, h) = (o.bundle_action(&args[0])?, o.bundle_action(&args[1])?);
    let mut e = Entry::new("module", "semidirect-orbit-action");
    let Some(s) = attempt(&mut e, semidirect_orbit_bundle_action(g, h)) else { return Ok((e, vec![])) };
    e.check(validate_fell_bundle(&s.bundle, ctx.tol));
    e.check(check_module_action(&s.module, ctx.tol));
    Ok((e, bundle_decls("semidirect_orbit", &s.bundle)))
}

fn principal_fell(o: &Objects, args: &[String], ctx: &Ctx) -> Built {
    let ba = as_right_bundle(o.bundle_action(&args[0])?);
    let mut e = Entry::new("decomposition", "principal-fell");
    let Some(d) = attempt(&mut e, principal_fell_decomposition(&ba)) else { return Ok((e, vec![])) };
    e.check(verify_principal_fell_decomposition(&ba, &d, ctx.tol));
    Ok((e, bundle_decls("principal_transformation", &d.transformation_bundle)))
}

fn section(o: &Objects, args: &[String], ctx: &Ctx) -> Built {
    let b = o.bundle(&args[0])?;
    let mut e = Entry::new("algebra", "section-algebra");
    let a = section_algebra(b);
    algebra_entry(&mut e, "structure", &a, ctx);
    Ok((e, vec![emit_algebra("sections", &a)]))
}

fn crossed(o: &Objects, args: &[String], ctx: &Ctx) -> Built {
    let ba = o.bundle_action(&args[0])?;
    let ba = match ba.side() {
        Side::Left => ba.clone(),
        Side::Right => ba.flipped(),
    };
    let mut e = Entry::new("algebra", "crossed-product");
    let Some(bundle_route) = attempt(&mut e, crossed_product(&ba.bundle, &ba)) else { return Ok((e, vec![])) };
    algebra_entry(&mut e, "structure", &bundle_route, ctx);
    let routes = section_action(&ba).and_then(|alpha| {
        let ar = algebra_crossed_product(&section_algebra(&ba.bundle), ba.group(), &alpha);
        let (sd, sb) = semidirect_fell_bundle(&ba)?;
        let iso = crossed_iso(&sd, &sb, &ba.bundle, None);
        let mut rep = check_star_homomorphism(&bundle_route, &ar, &iso, true, ctx.tol);
        rep.subject = "bundle route = action route".into();
        Ok(rep)
    });
    if let Some(rep) = attempt(&mut e, routes) {
        e.check(rep);
    }
    Ok((e, vec![emit_algebra("crossed_product", &bundle_route)]))
}

fn induced(o: &Objects, args: &[String], ctx: &Ctx) -> Built {
    let act = o.action(&args[0])?;
    let b: &StarAlgebra = o.algebra(&args[1])?;
    let tau = o.automorphisms(&args[2])?;
    let mut e = Entry::new("algebra", "induced");
    if act.side != Side::Right || act.target.n_arrows() != act.target.n_units() {
        e.fail("expects a right action on a space of units");
        return Ok((e, vec![]));
    }
    if tau.group != act.group || &tau.algebra != b {
        e.fail("automorphisms must match the action group and the algebra");
        return Ok((e, vec![]));
    }
    let right: Vec<Vec<usize>> = act.table.iter().map(|r| r.iter().map(|x| x.0).collect()).collect();
    let Some(ind) = attempt(&mut e, induced_algebra(b, act.target.unit_labels.clone(), &act.group, &right, &tau.maps, ctx.tol))
    else {
        return Ok((e, vec![]));
    };
    e.detail(format!("{} orbits", ind.n_orbits()));
    e.check(ind.report.clone());
    algebra_entry(&mut e, "structure", &ind.algebra, ctx);
    Ok((e, vec![emit_algebra("induced", &ind.algebra)]))
}

fn linking(o: &Objects, args: &[String], ctx: &Ctx) -> Built {
    let sc = o.scenario(&args[0])?;
    let mut e = Entry::new("linking", &args[0]);
    let Some((_, eq)) = attempt(&mut e, scenario_equivalence(sc, ctx.tol)) else { return Ok((e, vec![])) };
    let Some(ls) = attempt(&mut e, linking_system(&eq, ctx.tol)) else { return Ok((e, vec![])) };
    e.detail(format!(
        "linking algebra of dimension {}, corners {} and {}",
        ls.algebra.dim(),
        ls.left_corner.dim(),
        ls.right_corner.dim()
    ));
    e.check(ls.report.clone());
    Ok((e, bundle_decls("linking", &ls.bundle)))
}
