use super::{Ctx, Entry, Status, Usage};
use crate::error::Result;
use crate::fell::{
    check_bundle_action, is_free_bundle_action, one_sided_equivalence, one_sided_transformation_equivalence,
    symmetric_action_equivalence, validate_fell_bundle, verify_bundle_equivalence, BundleEquivalence, FellBundle,
};
use crate::groupoid::{
    check_action, check_space_action, free_witness, symmetric_groupoid_equivalence, validate_groupoid,
    verify_groupoid_equivalence, FiniteGroup,
};
use crate::instances;
use crate::io::{Automorphisms, Object, Objects, Scenario};
use crate::morita::{
    coaction_action, coaction_demo, cstar_bundle_morita, one_sided_morita, one_sided_transformation_morita, raeburn,
    raeburn_actions, symmetric_morita, MoritaCertificate, RaeburnData,
};
use crate::report::ValidationReport;
use crate::star::{
    check_representation, check_star_homomorphism, regular_representation, star_structure_report, validate_star_algebra,
    StarAlgebra,
};

fn freeness(e: &mut Entry, free: Option<String>) {
    match free {
        None => e.detail("free"),
        Some(w) => e.detail(format!("not free: {w}")),
    }
}

/// Axioms of an algebra plus its regular representation and structure.
pub(super) fn algebra_entry(e: &mut Entry, label: &str, a: &StarAlgebra, ctx: &Ctx) {
    let v = validate_star_algebra(a, ctx.tol);
    let ok = v.is_ok();
    e.check(v);
    if ok {
        let rep = regular_representation(a);
        if rep.faithful {
            e.check(check_representation(a, &rep, ctx.tol));
        } else {
            e.detail(format!("{label}: regular representation is not faithful"));
        }
        e.structure(label, star_structure_report(a, ctx.tol, ctx.seed));
    }
}

fn automorphism_report(aut: &Automorphisms, tol: f64) -> ValidationReport {
    let mut rep = ValidationReport::new("automorphism group");
    for (t, m) in aut.maps.iter().enumerate() {
        let r = check_star_homomorphism(&aut.algebra, &aut.algebra, m, true, tol);
        if !r.is_ok() {
            rep.fail("automorphism", r.to_string(), aut.group.label(t).to_string());
        }
    }
    rep.record("automorphism", aut.maps.len(), 0.0);
    let g = &aut.group;
    let mut worst: f64 = 0.0;
    for s in g.elements() {
        for t in g.elements() {
            let r = (&aut.maps[s] * &aut.maps[t] - &aut.maps[g.mul(s, t)]).camax();
            worst = worst.max(r);
            if r > tol {
                rep.push_capped("group law", format!("residual {r:.3e}"), format!("({}, {})", g.label(s), g.label(t)));
            }
        }
    }
    rep.record("group law", g.order() * g.order(), worst);
    rep
}

/// One entry per declared object, in declaration order.
pub fn validate(objs: &Objects, ctx: &Ctx) -> Vec<Entry> {
    objs.items
        .iter()
        .map(|(name, obj)| {
            ctx.timed(|| {
                let mut e = Entry::new(obj.kind(), name);
                match obj {
                    Object::Group(g) => {
                        e.detail(format!("order {}, abelian {}", g.order(), g.is_abelian()));
                        e.check(validate_groupoid(&g.groupoid));
                    }
                    Object::Groupoid(g) => {
                        e.detail(format!("{} arrows, {} units", g.n_arrows(), g.n_units()));
                        e.check(validate_groupoid(g));
                    }
                    Object::Action(a) => {
                        e.check(check_action(a));
                        freeness(&mut e, free_witness(a).map(|(t, x)| format!("{} fixes {}", a.group.label(t), a.target.label(x))));
                    }
                    Object::SpaceAction(a) => {
                        e.check(check_space_action(a));
                        freeness(&mut e, a.free_witness().map(|(x, u)| format!("{} fixes {}", a.groupoid.label(x), a.point_labels[u])));
                    }
                    Object::Algebra(a) => algebra_entry(&mut e, "structure", a, ctx),
                    Object::Automorphisms(a) => e.check(automorphism_report(a, ctx.tol)),
                    Object::Bundle(b) => {
                        e.detail(format!("total dimension {}", b.total_dim()));
                        e.check(validate_fell_bundle(b, ctx.tol));
                    }
                    Object::BundleAction(ba) => {
                        e.check(check_bundle_action(ba, ctx.tol));
                        freeness(&mut e, (!is_free_bundle_action(ba)).then(|| "the base action has fixed arrows".to_string()));
                    }
                    Object::Scenario(s) => e.detail(format!("{} scenario; run `morita {name}`", s.form())),
                }
                e
            })
        })
        .collect()
}

fn inputs_valid(sc: &Scenario, tol: f64) -> Vec<ValidationReport> {
    let mut out = Vec::new();
    match sc {
        Scenario::Symmetric { g, h } => {
            out.push(check_bundle_action(g, tol));
            out.push(check_bundle_action(h, tol));
        }
        Scenario::OneSided { g } | Scenario::CstarBundle { g } => out.push(check_bundle_action(g, tol)),
        Scenario::Transformation { bundle, act, gact, .. } => {
            out.push(validate_fell_bundle(bundle, tol));
            out.push(check_space_action(act));
            out.push(check_space_action(gact));
        }
        Scenario::Coaction { bundle } => out.push(validate_fell_bundle(bundle, tol)),
        Scenario::Raeburn(d) => out.push(validate_star_algebra(&d.b, tol)),
    }
    out
}

/// Rejects a scenario whose inputs violate the axioms, recording why.
fn precheck(e: &mut Entry, sc: &Scenario, tol: f64) -> bool {
    let mut ok = true;
    for r in inputs_valid(sc, tol) {
        if !r.is_ok() {
            e.fail(format!("input {r}"));
            ok = false;
        }
    }
    ok
}

/// The bundle equivalence behind a scenario, with a groupoid-level report
/// when the scenario has its own groupoid construction.
pub(super) fn scenario_equivalence(sc: &Scenario, tol: f64) -> Result<(Option<ValidationReport>, BundleEquivalence)> {
    Ok(match sc {
        Scenario::Symmetric { g, h } => {
            let ge = symmetric_groupoid_equivalence(&g.base_action, &h.base_action)?;
            (Some(verify_groupoid_equivalence(&ge.equivalence)), symmetric_action_equivalence(g, h)?.equivalence)
        }
        Scenario::OneSided { g } | Scenario::CstarBundle { g } => (None, one_sided_equivalence(g)?.equivalence),
        Scenario::Transformation { bundle, act, group, gact } => {
            (None, one_sided_transformation_equivalence(bundle, act, group, gact)?.equivalence)
        }
        Scenario::Coaction { bundle } => (None, one_sided_equivalence(&coaction_action(bundle)?.1)?.equivalence),
        Scenario::Raeburn(d) => {
            let (g, h) = raeburn_actions(d, tol)?;
            let ge = symmetric_groupoid_equivalence(&g.base_action, &h.base_action)?;
            (Some(verify_groupoid_equivalence(&ge.equivalence)), symmetric_action_equivalence(&g, &h)?.equivalence)
        }
    })
}

pub fn check_equivalence(name: &str, sc: &Scenario, ctx: &Ctx) -> Entry {
    let mut e = Entry::new("equivalence", name);
    e.detail(format!("{} scenario", sc.form()));
    if !precheck(&mut e, sc, ctx.tol) {
        return e;
    }
    match scenario_equivalence(sc, ctx.tol) {
        Ok((sym, eq)) => {
            if let Some(r) = sym {
                e.check(r);
            }
            e.detail(format!("|Z| = {}, P has {} arrows, Q has {} arrows", eq.n_points(), eq.base().left().n_arrows(), eq.base().right().n_arrows()));
            e.check(verify_groupoid_equivalence(&eq.base()));
            e.check(verify_bundle_equivalence(&eq, ctx.tol));
        }
        Err(err) => e.fail(format!("precondition: {err}")),
    }
    e
}

fn certify(sc: &Scenario, ctx: &Ctx) -> Result<MoritaCertificate> {
    let (tol, seed) = (ctx.tol, ctx.seed);
    match sc {
        Scenario::Symmetric { g, h } => symmetric_morita(g, h, tol, seed),
        Scenario::OneSided { g } => one_sided_morita(g, tol, seed),
        Scenario::CstarBundle { g } => cstar_bundle_morita(g, tol, seed),
        Scenario::Transformation { bundle, act, group, gact } => {
            one_sided_transformation_morita(bundle, act, group, gact, tol, seed)
        }
        Scenario::Coaction { bundle } => coaction_demo(bundle, tol, seed),
        Scenario::Raeburn(d) => raeburn(d, tol, seed),
    }
}

fn certificate_entry(kind: &str, name: &str, sc: &Scenario, ctx: &Ctx) -> Entry {
    let mut e = Entry::new(kind, name);
    if !precheck(&mut e, sc, ctx.tol) {
        return e;
    }
    match certify(sc, ctx) {
        Ok(c) => e.certificate(c),
        Err(err) => e.fail(format!("precondition: {err}")),
    }
    e
}

pub fn morita(name: &str, sc: &Scenario, ctx: &Ctx) -> Entry {
    certificate_entry("morita", name, sc, ctx)
}

fn parse_group(s: &str) -> std::result::Result<FiniteGroup, Usage> {
    let order = |t: &str| t.parse::<usize>().ok().filter(|&n| (1..=6).contains(&n));
    let g = match s.split_at(s.len().min(1)) {
        ("Z", n) => order(n).map(FiniteGroup::cyclic),
        ("S", n) => order(n).filter(|&n| n <= 3).map(FiniteGroup::symmetric),
        _ if s == "trivial" => Some(Ok(FiniteGroup::trivial())),
        _ => None,
    };
    match g {
        Some(g) => Ok(g?),
        None => Err(Usage(format!("unknown group `{s}` (expected Z1..Z6, S1..S3 or trivial)"))),
    }
}

/// Largest left-corner dimension `|G|³·dim B` the coaction demo accepts.
pub const COACTION_LIMIT: usize = 128;

pub fn demo_coaction_input(group: &str, bundle: &str) -> std::result::Result<(FiniteGroup, FellBundle), Usage> {
    let g = parse_group(group)?;
    let size = match bundle {
        "line" => None,
        b => match b.strip_prefix("matrix").and_then(|k| k.parse::<usize>().ok()) {
            Some(k) if (1..=3).contains(&k) => Some(k),
            _ => return Err(Usage(format!("unknown bundle `{b}` (expected line or matrix1..matrix3)"))),
        },
    };
    let left = g.order().pow(3) * size.map_or(1, |k| k * k);
    if left > COACTION_LIMIT {
        return Err(Usage(format!(
            "{group} with {bundle} gives a left corner of dimension {left}; the demo is limited to {COACTION_LIMIT}"
        )));
    }
    let b = instances::group_bundle(&g, size);
    Ok((g, b))
}

pub fn demo_coaction(g: &FiniteGroup, b: &FellBundle, ctx: &Ctx) -> Entry {
    let mut e = certificate_entry("demo", "coaction", &Scenario::Coaction { bundle: b.clone() }, ctx);
    e.detail(format!("group of order {}, fiber dimension {}", g.order(), b.dim[0]));
    e
}

pub fn demo_raeburn_input(case: &str) -> std::result::Result<RaeburnData, Usage> {
    match case {
        "translation" => Ok(instances::raeburn_translation()),
        "two-sided" => Ok(instances::raeburn_two_sided_scalar()),
        "swap" => Ok(instances::raeburn_two_sided_swap()),
        c => Err(Usage(format!("unknown raeburn case `{c}` (expected translation, two-sided or swap)"))),
    }
}

pub fn demo_raeburn(case: &str, d: &RaeburnData, ctx: &Ctx) -> Entry {
    let mut e = certificate_entry("demo", &format!("raeburn {case}"), &Scenario::Raeburn(d.clone()), ctx);
    if let Some(c) = &e.certificate {
        let same = c.left.structure.center_dim == c.right.structure.center_dim;
        e.detail(format!("center dimensions {} and {}", c.left.structure.center_dim, c.right.structure.center_dim));
        if !same {
            e.mark(Status::Fail);
        }
    }
    e
}
