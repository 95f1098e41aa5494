//! Name resolution: declarations to library objects.
//!
//! Combinatorial objects (groups, groupoids, actions) are validated here,
//! since later declarations index into them. Numerical data (algebras,
//! bundles, bundle actions, automorphisms) is only checked for shape; the
//! `validate` command checks the axioms and reports violations.

use std::collections::HashMap;

use super::{parse_scalar, Decl, ModelFile};
use crate::error::{Error, Result};
use crate::fell::{BundleAction, FellBundle};
use crate::groupoid::{make_group, Arrow, FiniteGroup, FiniteGroupoid, GroupAction, Side, SpaceAction, Unit};
use crate::linalg::{identity, CMatrix, Tensor3, C64};
use crate::morita::RaeburnData;
use crate::star::StarAlgebra;

/// A group acting on an algebra, one matrix per group element.
#[derive(Debug, Clone, PartialEq)]
pub struct Automorphisms {
    pub group: FiniteGroup,
    pub algebra: StarAlgebra,
    pub maps: Vec<CMatrix>,
}

/// A scenario with its inputs resolved.
#[derive(Debug, Clone)]
pub enum Scenario {
    Symmetric { g: BundleAction, h: BundleAction },
    OneSided { g: BundleAction },
    Transformation { bundle: FellBundle, act: SpaceAction, group: FiniteGroup, gact: SpaceAction },
    CstarBundle { g: BundleAction },
    Coaction { bundle: FellBundle },
    Raeburn(RaeburnData),
}

impl Scenario {
    pub fn form(&self) -> &'static str {
        match self {
            Scenario::Symmetric { .. } => "symmetric",
            Scenario::OneSided { .. } => "one-sided",
            Scenario::Transformation { .. } => "transformation",
            Scenario::CstarBundle { .. } => "cstar-bundle",
            Scenario::Coaction { .. } => "coaction",
            Scenario::Raeburn(_) => "raeburn",
        }
    }
}

#[derive(Debug, Clone)]
pub enum Object {
    Group(FiniteGroup),
    Groupoid(FiniteGroupoid),
    Action(GroupAction),
    SpaceAction(SpaceAction),
    Algebra(StarAlgebra),
    Automorphisms(Automorphisms),
    Bundle(FellBundle),
    BundleAction(BundleAction),
    Scenario(Scenario),
}

impl Object {
    pub fn kind(&self) -> &'static str {
        match self {
            Object::Group(_) => "group",
            Object::Groupoid(_) => "groupoid",
            Object::Action(_) => "action",
            Object::SpaceAction(_) => "space-action",
            Object::Algebra(_) => "algebra",
            Object::Automorphisms(_) => "automorphisms",
            Object::Bundle(_) => "bundle",
            Object::BundleAction(_) => "bundle-action",
            Object::Scenario(_) => "scenario",
        }
    }
}

/// Resolved objects in declaration order.
#[derive(Debug, Clone, Default)]
pub struct Objects {
    pub items: Vec<(String, Object)>,
    index: HashMap<String, usize>,
}

macro_rules! getter {
    ($fn:ident, $variant:ident, $ty:ty, $kind:literal) => {
        pub fn $fn(&self, name: &str) -> Result<&$ty> {
            match self.get(name) {
                Some(Object::$variant(x)) => Ok(x),
                _ => Err(Error::Unresolved { name: name.to_string(), kind: $kind }),
            }
        }
    };
}

impl Objects {
    pub fn get(&self, name: &str) -> Option<&Object> {
        self.index.get(name).map(|&k| &self.items[k].1)
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    getter!(group, Group, FiniteGroup, "group");
    getter!(action, Action, GroupAction, "action");
    getter!(space_action, SpaceAction, SpaceAction, "space-action");
    getter!(algebra, Algebra, StarAlgebra, "algebra");
    getter!(automorphisms, Automorphisms, Automorphisms, "automorphisms");
    getter!(bundle, Bundle, FellBundle, "bundle");
    getter!(bundle_action, BundleAction, BundleAction, "bundle-action");
    getter!(scenario, Scenario, Scenario, "scenario");

    /// A groupoid, or the one-unit groupoid of a group.
    pub fn groupoid(&self, name: &str) -> Result<&FiniteGroupoid> {
        match self.get(name) {
            Some(Object::Groupoid(x)) => Ok(x),
            Some(Object::Group(g)) => Ok(&g.groupoid),
            _ => Err(Error::Unresolved { name: name.to_string(), kind: "groupoid" }),
        }
    }

    fn insert(&mut self, d: &Decl, obj: Object) -> Result<()> {
        if self.index.contains_key(&d.name) {
            return Err(d.err(format!("duplicate name `{}`", d.name)));
        }
        self.index.insert(d.name.clone(), self.items.len());
        self.items.push((d.name.clone(), obj));
        Ok(())
    }
}

fn want_args(d: &Decl, n: usize, usage: &str) -> Result<()> {
    if d.args.len() == n {
        Ok(())
    } else {
        Err(d.err(format!("`{} {}` expects: {usage}", d.kind, d.form)))
    }
}

fn want_no_body(d: &Decl) -> Result<()> {
    if d.body.is_empty() {
        Ok(())
    } else {
        Err(d.body_err(0, 0, format!("`{} {}` takes no body", d.kind, d.form)))
    }
}

fn count(d: &Decl, k: usize) -> Result<usize> {
    d.args[k]
        .parse()
        .ok()
        .filter(|&n: &usize| n > 0)
        .ok_or_else(|| d.err(format!("expected a positive integer, found `{}`", d.args[k])))
}

fn side(d: &Decl, k: usize) -> Result<Side> {
    match d.args[k].as_str() {
        "left" => Ok(Side::Left),
        "right" => Ok(Side::Right),
        s => Err(d.err(format!("expected `left` or `right`, found `{s}`"))),
    }
}

fn lift<T>(d: &Decl, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        e @ (Error::Parse { .. } | Error::Unresolved { .. }) => e,
        e => d.err(e.to_string().lines().next().unwrap_or_default().to_string()),
    })
}

fn scalars(d: &Decl, row: usize, from: usize, expected: usize) -> Result<Vec<C64>> {
    let toks = &d.body[row];
    if toks.len() - from != expected {
        return Err(d.body_err(row, 0, format!("expected {expected} entries, found {}", toks.len() - from)));
    }
    toks[from..]
        .iter()
        .enumerate()
        .map(|(k, t)| parse_scalar(t).ok_or_else(|| d.body_err(row, from + k, format!("malformed number `{t}`"))))
        .collect()
}

fn row_len(d: &Decl, row: usize, n: usize) -> Result<()> {
    if d.body[row].len() == n {
        Ok(())
    } else {
        Err(d.body_err(row, 0, format!("expected {n} tokens, found {}", d.body[row].len())))
    }
}

fn lookup<T>(d: &Decl, row: usize, col: usize, what: &str, f: impl Fn(&str) -> Option<T>) -> Result<T> {
    let t = &d.body[row][col];
    f(t).ok_or_else(|| d.body_err(row, col, format!("unknown {what} `{t}`")))
}

fn matrix(d: &Decl, row: usize, from: usize, rows: usize, cols: usize) -> Result<CMatrix> {
    Ok(CMatrix::from_row_slice(rows, cols, &scalars(d, row, from, rows * cols)?))
}

fn group(d: &Decl, o: &Objects) -> Result<FiniteGroup> {
    match d.form.as_str() {
        "cyclic" => {
            want_args(d, 1, "<order>")?;
            lift(d, FiniteGroup::cyclic(count(d, 0)?))
        }
        "symmetric" => {
            want_args(d, 1, "<degree>")?;
            lift(d, FiniteGroup::symmetric(count(d, 0)?))
        }
        "trivial" => {
            want_args(d, 0, "no arguments")?;
            Ok(FiniteGroup::trivial())
        }
        "product" => {
            want_args(d, 2, "<group> <group>")?;
            Ok(FiniteGroup::product(o.group(&d.args[0])?, o.group(&d.args[1])?))
        }
        "table" => {
            if d.args.is_empty() {
                return Err(d.err("`group table` expects element labels"));
            }
            let n = d.args.len();
            if d.body.len() != n {
                return Err(d.err(format!("expected {n} table rows, found {}", d.body.len())));
            }
            let mut table = Vec::with_capacity(n);
            for r in 0..n {
                row_len(d, r, n)?;
                table.push(
                    (0..n)
                        .map(|c| lookup(d, r, c, "element", |t| d.args.iter().position(|a| a == t)))
                        .collect::<Result<Vec<_>>>()?,
                );
            }
            lift(d, make_group(&table, Some(d.args.clone())))
        }
        f => Err(d.err(format!("unknown group form `{f}`"))),
    }
}

fn explicit_groupoid(d: &Decl) -> Result<FiniteGroupoid> {
    let mut labels: Vec<String> = Vec::new();
    let mut unit_labels: Vec<String> = Vec::new();
    let mut unit_arrow = Vec::new();
    let mut ends: Vec<(String, String, usize)> = Vec::new();
    let mut comps = Vec::new();
    for (r, row) in d.body.iter().enumerate() {
        match row[0].as_str() {
            "unit" => {
                if row.len() != 2 && row.len() != 3 {
                    return Err(d.body_err(r, 0, "expected `unit <arrow> [<unit label>]`"));
                }
                let u = row.last().unwrap().clone();
                unit_arrow.push(Arrow(labels.len()));
                unit_labels.push(u.clone());
                labels.push(row[1].clone());
                ends.push((u.clone(), u, r));
            }
            "arrow" => {
                row_len(d, r, 4)?;
                labels.push(row[1].clone());
                ends.push((row[2].clone(), row[3].clone(), r));
            }
            "comp" => {
                row_len(d, r, 4)?;
                comps.push(r);
            }
            t => return Err(d.body_err(r, 0, format!("expected `unit`, `arrow` or `comp`, found `{t}`"))),
        }
    }
    let n = labels.len();
    let mut seen = HashMap::new();
    for (k, l) in labels.iter().enumerate() {
        if seen.insert(l.clone(), k).is_some() {
            return Err(d.err(format!("duplicate arrow label `{l}`")));
        }
    }
    let unit_of = |r: usize, c: usize, t: &str| -> Result<Unit> {
        unit_labels.iter().position(|u| u == t).map(Unit).ok_or_else(|| d.body_err(r, c, format!("unknown unit `{t}`")))
    };
    let mut src = Vec::with_capacity(n);
    let mut rng = Vec::with_capacity(n);
    for (s, t, r) in &ends {
        let row = &d.body[*r];
        let (cs, ct) = if row[0] == "unit" { (row.len() - 1, row.len() - 1) } else { (2, 3) };
        src.push(unit_of(*r, cs, s)?);
        rng.push(unit_of(*r, ct, t)?);
    }
    let mut table: Vec<Option<Arrow>> = vec![None; n * n];
    for u in 0..unit_arrow.len() {
        let e = unit_arrow[u].0;
        for x in 0..n {
            if src[x] == Unit(u) {
                table[x * n + e] = Some(Arrow(x));
            }
            if rng[x] == Unit(u) {
                table[e * n + x] = Some(Arrow(x));
            }
        }
    }
    for &r in &comps {
        let arrow = |c: usize| lookup(d, r, c, "arrow", |t| seen.get(t).copied());
        let (x, y, z) = (arrow(1)?, arrow(2)?, arrow(3)?);
        if src[x] != rng[y] {
            return Err(d.body_err(r, 1, "composition of a non-composable pair"));
        }
        table[x * n + y] = Some(Arrow(z));
    }
    for x in 0..n {
        for y in 0..n {
            if src[x] == rng[y] && table[x * n + y].is_none() {
                return Err(d.err(format!("composition table is missing `comp {} {} ...`", labels[x], labels[y])));
            }
        }
    }
    let mut inv = Vec::with_capacity(n);
    for x in 0..n {
        let y = (0..n)
            .find(|&y| {
                table[x * n + y] == Some(unit_arrow[rng[x].0]) && table[y * n + x] == Some(unit_arrow[src[x].0])
            })
            .ok_or_else(|| d.err(format!("arrow `{}` has no inverse", labels[x])))?;
        inv.push(Arrow(y));
    }
    lift(
        d,
        FiniteGroupoid::from_fn(labels, unit_labels, unit_arrow, src, rng, inv, |x, y| table[x.0 * n + y.0].unwrap()),
    )
}

fn groupoid(d: &Decl, o: &Objects) -> Result<FiniteGroupoid> {
    match d.form.as_str() {
        "pair" => {
            want_args(d, 1, "<points>")?;
            lift(d, FiniteGroupoid::pair(count(d, 0)?))
        }
        "units" => {
            if d.args.is_empty() {
                return Err(d.err("`groupoid units` expects unit labels"));
            }
            Ok(FiniteGroupoid::unit_space(d.args.clone()))
        }
        "group" => {
            want_args(d, 1, "<group>")?;
            Ok(o.group(&d.args[0])?.groupoid.clone())
        }
        "product" => {
            want_args(d, 2, "<groupoid> <groupoid>")?;
            Ok(FiniteGroupoid::product(o.groupoid(&d.args[0])?, o.groupoid(&d.args[1])?))
        }
        "explicit" => {
            want_args(d, 0, "no arguments")?;
            explicit_groupoid(d)
        }
        f => Err(d.err(format!("unknown groupoid form `{f}`"))),
    }
}

fn action(d: &Decl, o: &Objects) -> Result<GroupAction> {
    want_args(d, 3, "<group> <groupoid> left|right")?;
    let g = o.group(&d.args[0])?.clone();
    let x = o.groupoid(&d.args[1])?.clone();
    let s = side(d, 2)?;
    if d.body.len() != g.order() {
        return Err(d.err(format!("expected one row per group element ({}), found {}", g.order(), d.body.len())));
    }
    match d.form.as_str() {
        "units" => {
            let mut perms = Vec::new();
            for r in 0..d.body.len() {
                row_len(d, r, x.n_units())?;
                perms.push(
                    (0..x.n_units())
                        .map(|c| lookup(d, r, c, "unit", |t| x.unit_by_label(t).map(|u| u.0)))
                        .collect::<Result<Vec<_>>>()?,
                );
            }
            lift(d, GroupAction::from_unit_permutations(g, x, s, &perms))
        }
        "arrows" => {
            let mut table = Vec::new();
            for r in 0..d.body.len() {
                row_len(d, r, x.n_arrows())?;
                table.push((0..x.n_arrows()).map(|c| lookup(d, r, c, "arrow", |t| x.arrow_by_label(t))).collect::<Result<Vec<_>>>()?);
            }
            lift(d, GroupAction::from_fn(g, x, s, |t, y| table[t][y.0]))
        }
        f => Err(d.err(format!("unknown action form `{f}`"))),
    }
}

fn space_action(d: &Decl, o: &Objects) -> Result<SpaceAction> {
    want_args(d, 2, "<groupoid> left|right")?;
    let x = o.groupoid(&d.args[0])?.clone();
    let s = side(d, 1)?;
    match d.form.as_str() {
        "translation" => {
            want_no_body(d)?;
            Ok(match s {
                Side::Left => SpaceAction::left_translation(&x),
                Side::Right => SpaceAction::right_translation(&x),
            })
        }
        "explicit" => {
            let mut points = Vec::new();
            let mut fibring = Vec::new();
            let mut acts = Vec::new();
            for r in 0..d.body.len() {
                match d.body[r][0].as_str() {
                    "point" => {
                        row_len(d, r, 3)?;
                        points.push(d.body[r][1].clone());
                        fibring.push(lookup(d, r, 2, "unit", |t| x.unit_by_label(t))?);
                    }
                    "act" => {
                        row_len(d, r, 4)?;
                        acts.push((lookup(d, r, 1, "arrow", |t| x.arrow_by_label(t))?, r));
                    }
                    t => return Err(d.body_err(r, 0, format!("expected `point` or `act`, found `{t}`"))),
                }
            }
            let mut table = HashMap::new();
            for &(a, r) in &acts {
                let u = lookup(d, r, 2, "point", |t| points.iter().position(|q| q == t))?;
                let v = lookup(d, r, 3, "point", |t| points.iter().position(|q| q == t))?;
                table.insert((a, u), v);
            }
            let probe = SpaceAction::from_fn_unchecked(x.clone(), points.clone(), fibring.clone(), s, |_, _| 0);
            for a in x.arrows() {
                for u in 0..points.len() {
                    if probe.defined(a, u) && !table.contains_key(&(a, u)) {
                        return Err(d.err(format!("missing `act {} {} ...`", x.label(a), points[u])));
                    }
                }
            }
            lift(d, SpaceAction::from_fn(x, points, fibring, s, |a, u| table[&(a, u)]))
        }
        f => Err(d.err(format!("unknown space-action form `{f}`"))),
    }
}

fn algebra(d: &Decl, o: &Objects) -> Result<StarAlgebra> {
    match d.form.as_str() {
        "complex" => {
            want_args(d, 0, "no arguments")?;
            Ok(StarAlgebra::complex())
        }
        "matrix" => {
            want_args(d, 1, "<size>")?;
            Ok(StarAlgebra::matrix(count(d, 0)?))
        }
        "diagonal" => {
            want_args(d, 1, "<size>")?;
            Ok(StarAlgebra::diagonal(count(d, 0)?))
        }
        "group-algebra" => {
            want_args(d, 1, "<group>")?;
            Ok(StarAlgebra::group_algebra(o.group(&d.args[0])?))
        }
        "explicit" => {
            want_args(d, 1, "<dimension>")?;
            let n = count(d, 0)?;
            let mut labels: Vec<String> = (0..n).map(|i| format!("b{i}")).collect();
            let mut t = Tensor3::zeros(n, n, n);
            let mut star = None;
            for r in 0..d.body.len() {
                match d.body[r][0].as_str() {
                    "labels" => {
                        row_len(d, r, n + 1)?;
                        labels = d.body[r][1..].to_vec();
                    }
                    "product" => {
                        let basis = |c: usize| lookup(d, r, c, "basis label", |s| labels.iter().position(|l| l == s));
                        if d.body[r].len() < 3 {
                            return Err(d.body_err(r, 0, "expected `product <i> <j> <entries>`"));
                        }
                        let (i, j) = (basis(1)?, basis(2)?);
                        for (k, v) in scalars(d, r, 3, n)?.into_iter().enumerate() {
                            t.set(k, i, j, v);
                        }
                    }
                    "star" => star = Some(matrix(d, r, 1, n, n)?),
                    s => return Err(d.body_err(r, 0, format!("expected `labels`, `product` or `star`, found `{s}`"))),
                }
            }
            let star = star.ok_or_else(|| d.err("explicit algebra needs a `star` row"))?;
            Ok(StarAlgebra::from_tensor(labels, &t, star, format!("model {}", d.name)))
        }
        f => Err(d.err(format!("unknown algebra form `{f}`"))),
    }
}

fn automorphisms(d: &Decl, o: &Objects) -> Result<Automorphisms> {
    want_args(d, 2, "<group> <algebra>")?;
    let group = o.group(&d.args[0])?.clone();
    let algebra = o.algebra(&d.args[1])?.clone();
    let n = algebra.dim();
    let maps = match d.form.as_str() {
        "trivial" => {
            want_no_body(d)?;
            vec![identity(n); group.order()]
        }
        "explicit" => {
            let mut maps = vec![None; group.order()];
            for r in 0..d.body.len() {
                if d.body[r][0] != "map" || d.body[r].len() < 2 {
                    return Err(d.body_err(r, 0, "expected `map <element> <entries>`"));
                }
                let t = lookup(d, r, 1, "group element", |s| group.groupoid.arrow_by_label(s))?;
                maps[t.0] = Some(matrix(d, r, 2, n, n)?);
            }
            maps.into_iter()
                .enumerate()
                .map(|(t, m)| m.ok_or_else(|| d.err(format!("missing `map {}`", group.label(t)))))
                .collect::<Result<Vec<_>>>()?
        }
        f => return Err(d.err(format!("unknown automorphisms form `{f}`"))),
    };
    Ok(Automorphisms { group, algebra, maps })
}

fn explicit_bundle(d: &Decl, base: FiniteGroupoid) -> Result<FellBundle> {
    let n = base.n_arrows();
    let mut dims = vec![None; n];
    for r in 0..d.body.len() {
        if d.body[r][0] == "dim" {
            row_len(d, r, 3)?;
            let x = lookup(d, r, 1, "arrow", |t| base.arrow_by_label(t))?;
            dims[x.0] = Some(lookup(d, r, 2, "dimension", |t| t.parse::<usize>().ok())?);
        }
    }
    let dim: Vec<usize> = dims
        .into_iter()
        .enumerate()
        .map(|(x, k)| k.ok_or_else(|| d.err(format!("missing `dim {}`", base.label(Arrow(x))))))
        .collect::<Result<_>>()?;
    let mut mult = vec![None; n * n];
    let mut star: Vec<Option<CMatrix>> = vec![None; n];
    for r in 0..d.body.len() {
        let arrow = |c: usize| lookup(d, r, c, "arrow", |t| base.arrow_by_label(t));
        match d.body[r][0].as_str() {
            "dim" => {}
            "mult" => {
                if d.body[r].len() < 3 {
                    return Err(d.body_err(r, 0, "expected `mult <x> <y> <entries>`"));
                }
                let (x, y) = (arrow(1)?, arrow(2)?);
                let xy = base.comp(x, y).ok_or_else(|| d.body_err(r, 1, "product of a non-composable pair"))?;
                let (o, a, b) = (dim[xy.0], dim[x.0], dim[y.0]);
                let data = scalars(d, r, 3, o * a * b)?;
                mult[x.0 * n + y.0] = Some(Tensor3 { out: o, left: a, right: b, data });
            }
            "star" => {
                if d.body[r].len() < 2 {
                    return Err(d.body_err(r, 0, "expected `star <x> <entries>`"));
                }
                let x = arrow(1)?;
                star[x.0] = Some(matrix(d, r, 2, dim[base.inv(x).0], dim[x.0])?);
            }
            s => return Err(d.body_err(r, 0, format!("expected `dim`, `mult` or `star`, found `{s}`"))),
        }
    }
    for (x, y) in base.composable_pairs() {
        if mult[x.0 * n + y.0].is_none() {
            return Err(d.err(format!("missing `mult {} {} ...`", base.label(x), base.label(y))));
        }
    }
    let star = star
        .into_iter()
        .enumerate()
        .map(|(x, s)| s.ok_or_else(|| d.err(format!("missing `star {}`", base.label(Arrow(x))))))
        .collect::<Result<_>>()?;
    Ok(FellBundle { base, dim, mult, star })
}

fn bundle(d: &Decl, o: &Objects) -> Result<FellBundle> {
    match d.form.as_str() {
        "line" => {
            want_args(d, 1, "<groupoid>")?;
            want_no_body(d)?;
            Ok(FellBundle::line(o.groupoid(&d.args[0])?.clone()))
        }
        "constant" => {
            want_args(d, 2, "<groupoid> <algebra>")?;
            want_no_body(d)?;
            let a = o.algebra(&d.args[1])?;
            Ok(FellBundle::constant(o.groupoid(&d.args[0])?.clone(), a.structure_tensor(), a.star_matrix()))
        }
        "explicit" => {
            want_args(d, 1, "<groupoid>")?;
            explicit_bundle(d, o.groupoid(&d.args[0])?.clone())
        }
        f => Err(d.err(format!("unknown bundle form `{f}`"))),
    }
}

fn bundle_action(d: &Decl, o: &Objects) -> Result<BundleAction> {
    let usage = if d.form == "automorphisms" { "<bundle> <action> <automorphisms>" } else { "<bundle> <action>" };
    want_args(d, if d.form == "automorphisms" { 3 } else { 2 }, usage)?;
    let bundle = o.bundle(&d.args[0])?.clone();
    let base_action = o.action(&d.args[1])?.clone();
    if base_action.target != bundle.base {
        return Err(d.err(format!("action `{}` does not act on the base of `{}`", d.args[1], d.args[0])));
    }
    let order = base_action.group.order();
    let maps = match d.form.as_str() {
        "identity" => {
            want_no_body(d)?;
            let row: Vec<CMatrix> = bundle.base.arrows().map(|x| identity(bundle.dim(x))).collect();
            vec![row; order]
        }
        "automorphisms" => {
            want_no_body(d)?;
            let aut = o.automorphisms(&d.args[2])?;
            if aut.group != base_action.group {
                return Err(d.err("automorphisms and action use different groups"));
            }
            if bundle.base.arrows().any(|x| bundle.dim(x) != aut.algebra.dim()) {
                return Err(d.err("fiber dimensions differ from the automorphism algebra"));
            }
            aut.maps.iter().map(|m| vec![m.clone(); bundle.base.n_arrows()]).collect()
        }
        "explicit" => {
            let g = &base_action.group;
            let mut maps = vec![vec![None; bundle.base.n_arrows()]; order];
            for r in 0..d.body.len() {
                if d.body[r][0] != "map" || d.body[r].len() < 3 {
                    return Err(d.body_err(r, 0, "expected `map <element> <arrow> <entries>`"));
                }
                let t = lookup(d, r, 1, "group element", |s| g.groupoid.arrow_by_label(s))?.0;
                let x = lookup(d, r, 2, "arrow", |s| bundle.base.arrow_by_label(s))?;
                let tx = base_action.apply(t, x);
                maps[t][x.0] = Some(matrix(d, r, 3, bundle.dim(tx), bundle.dim(x))?);
            }
            let mut out = Vec::with_capacity(order);
            for (t, row) in maps.into_iter().enumerate() {
                out.push(
                    row.into_iter()
                        .enumerate()
                        .map(|(x, m)| {
                            m.ok_or_else(|| d.err(format!("missing `map {} {}`", g.label(t), bundle.base.label(Arrow(x)))))
                        })
                        .collect::<Result<Vec<_>>>()?,
                );
            }
            out
        }
        f => return Err(d.err(format!("unknown bundle-action form `{f}`"))),
    };
    Ok(BundleAction { bundle, base_action, maps })
}

fn raeburn_data(d: &Decl, o: &Objects) -> Result<RaeburnData> {
    want_args(d, 5, "<left action> <right action> <algebra> <sigma> <tau>")?;
    let ga = o.action(&d.args[0])?;
    let ha = o.action(&d.args[1])?;
    let b = o.algebra(&d.args[2])?.clone();
    let sigma = o.automorphisms(&d.args[3])?;
    let tau = o.automorphisms(&d.args[4])?;
    if ga.side != Side::Left || ha.side != Side::Right {
        return Err(d.err("raeburn expects a left action and a right action"));
    }
    if ga.target != ha.target || ga.target.n_arrows() != ga.target.n_units() {
        return Err(d.err("both actions must act on the same space of units"));
    }
    if sigma.group != ga.group || tau.group != ha.group || sigma.algebra != b || tau.algebra != b {
        return Err(d.err("automorphisms must match the action groups and the algebra"));
    }
    let table = |a: &GroupAction| -> Vec<Vec<usize>> { a.table.iter().map(|r| r.iter().map(|x| x.0).collect()).collect() };
    Ok(RaeburnData {
        points: ga.target.unit_labels.clone(),
        g: ga.group.clone(),
        left: table(ga),
        h: ha.group.clone(),
        right: table(ha),
        b,
        sigma: sigma.maps.clone(),
        tau: tau.maps.clone(),
    })
}

fn scenario(d: &Decl, o: &Objects) -> Result<Scenario> {
    want_no_body(d)?;
    match d.form.as_str() {
        "symmetric" => {
            want_args(d, 2, "<left bundle-action> <right bundle-action>")?;
            Ok(Scenario::Symmetric { g: o.bundle_action(&d.args[0])?.clone(), h: o.bundle_action(&d.args[1])?.clone() })
        }
        "one-sided" => {
            want_args(d, 1, "<bundle-action>")?;
            Ok(Scenario::OneSided { g: o.bundle_action(&d.args[0])?.clone() })
        }
        "cstar-bundle" => {
            want_args(d, 1, "<bundle-action>")?;
            Ok(Scenario::CstarBundle { g: o.bundle_action(&d.args[0])?.clone() })
        }
        "transformation" => {
            want_args(d, 4, "<bundle> <space-action> <group> <group space-action>")?;
            Ok(Scenario::Transformation {
                bundle: o.bundle(&d.args[0])?.clone(),
                act: o.space_action(&d.args[1])?.clone(),
                group: o.group(&d.args[2])?.clone(),
                gact: o.space_action(&d.args[3])?.clone(),
            })
        }
        "coaction" => {
            want_args(d, 1, "<bundle>")?;
            Ok(Scenario::Coaction { bundle: o.bundle(&d.args[0])?.clone() })
        }
        "raeburn" => Ok(Scenario::Raeburn(raeburn_data(d, o)?)),
        f => Err(d.err(format!("unknown scenario form `{f}`"))),
    }
}

/// Resolves every declaration in order; later declarations may refer to
/// earlier ones only.
pub fn resolve(m: &ModelFile) -> Result<Objects> {
    let mut o = Objects::default();
    for d in &m.decls {
        let obj = match d.kind.as_str() {
            "group" => Object::Group(group(d, &o)?),
            "groupoid" => Object::Groupoid(groupoid(d, &o)?),
            "action" => Object::Action(action(d, &o)?),
            "space-action" => Object::SpaceAction(space_action(d, &o)?),
            "algebra" => Object::Algebra(algebra(d, &o)?),
            "automorphisms" => Object::Automorphisms(automorphisms(d, &o)?),
            "bundle" => Object::Bundle(bundle(d, &o)?),
            "bundle-action" => Object::BundleAction(bundle_action(d, &o)?),
            "scenario" => Object::Scenario(scenario(d, &o)?),
            k => return Err(d.err(format!("unknown declaration kind `{k}`"))),
        };
        o.insert(d, obj)?;
    }
    Ok(o)
}
