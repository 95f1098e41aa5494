//! Objects back to declarations, in the explicit forms.

use std::collections::HashSet;

use super::{format_scalar, Decl};
use crate::fell::FellBundle;
use crate::groupoid::{Arrow, FiniteGroup, FiniteGroupoid, GroupAction, SpaceAction};
use crate::linalg::{CMatrix, C64};
use crate::star::StarAlgebra;

/// Makes labels usable as tokens: no whitespace, no `#`, no repeats.
fn tokenize_labels<'a>(labels: impl Iterator<Item = &'a str>) -> Vec<String> {
    let mut seen = HashSet::new();
    labels
        .enumerate()
        .map(|(k, l)| {
            let mut t: String = l.chars().map(|c| if c.is_whitespace() || c == '#' { '_' } else { c }).collect();
            if t.is_empty() || !seen.insert(t.clone()) {
                t = format!("{t}~{k}");
                seen.insert(t.clone());
            }
            t
        })
        .collect()
}

fn entries(v: impl IntoIterator<Item = C64>) -> impl Iterator<Item = String> {
    v.into_iter().map(format_scalar)
}

fn row_major(m: &CMatrix) -> Vec<C64> {
    m.transpose().iter().copied().collect()
}

/// `groupoid <name> explicit`, arrows listed in index order.
pub fn emit_groupoid(name: &str, g: &FiniteGroupoid) -> Decl {
    let arrows = tokenize_labels(g.arrow_labels.iter().map(String::as_str));
    let units = tokenize_labels(g.unit_labels.iter().map(String::as_str));
    let mut d = Decl::new("groupoid", name, "explicit", vec![]);
    for x in g.arrows() {
        match g.as_unit(x) {
            Some(u) => d.row(vec!["unit".into(), arrows[x.0].clone(), units[u.0].clone()]),
            None => d.row(vec![
                "arrow".into(),
                arrows[x.0].clone(),
                units[g.src(x).0].clone(),
                units[g.rng(x).0].clone(),
            ]),
        }
    }
    for (x, y) in g.composable_pairs() {
        if !g.is_unit_arrow(x) && !g.is_unit_arrow(y) {
            let z = g.mul(x, y);
            d.row(vec!["comp".into(), arrows[x.0].clone(), arrows[y.0].clone(), arrows[z.0].clone()]);
        }
    }
    d
}

/// `group <name> table`.
pub fn emit_group(name: &str, g: &FiniteGroup) -> Decl {
    let labels = tokenize_labels(g.groupoid.arrow_labels.iter().map(String::as_str));
    let mut d = Decl::new("group", name, "table", labels.clone());
    for a in g.elements() {
        d.row(g.elements().map(|b| labels[g.mul(a, b)].clone()).collect());
    }
    d
}

/// `action <name> arrows <group> <groupoid> <side>`.
pub fn emit_action(name: &str, group: &str, groupoid: &str, a: &GroupAction) -> Decl {
    let arrows = tokenize_labels(a.target.arrow_labels.iter().map(String::as_str));
    let mut d = Decl::new("action", name, "arrows", vec![group.into(), groupoid.into(), a.side.name().into()]);
    for row in &a.table {
        d.row(row.iter().map(|x| arrows[x.0].clone()).collect());
    }
    d
}

/// `space-action <name> explicit <groupoid> <side>`.
pub fn emit_space_action(name: &str, groupoid: &str, a: &SpaceAction) -> Decl {
    let g = &a.groupoid;
    let arrows = tokenize_labels(g.arrow_labels.iter().map(String::as_str));
    let units = tokenize_labels(g.unit_labels.iter().map(String::as_str));
    let points = tokenize_labels(a.point_labels.iter().map(String::as_str));
    let mut d = Decl::new("space-action", name, "explicit", vec![groupoid.into(), a.side.name().into()]);
    for (p, u) in points.iter().zip(&a.fibring) {
        d.row(vec!["point".into(), p.clone(), units[u.0].clone()]);
    }
    for x in 0..g.n_arrows() {
        for u in 0..a.n_points() {
            if let Some(v) = a.act(Arrow(x), u) {
                d.row(vec!["act".into(), arrows[x].clone(), points[u].clone(), points[v].clone()]);
            }
        }
    }
    d
}

/// `bundle <name> explicit <base>`; `base` must name a groupoid whose arrow
/// labels are those of `emit_groupoid(base, &b.base)`.
pub fn emit_bundle(name: &str, base: &str, b: &FellBundle) -> Decl {
    let g = &b.base;
    let arrows = tokenize_labels(g.arrow_labels.iter().map(String::as_str));
    let mut d = Decl::new("bundle", name, "explicit", vec![base.into()]);
    for x in g.arrows() {
        d.row(vec!["dim".into(), arrows[x.0].clone(), b.dim(x).to_string()]);
    }
    for (x, y) in g.composable_pairs() {
        let t = b.mult(x, y);
        let mut row = vec!["mult".into(), arrows[x.0].clone(), arrows[y.0].clone()];
        row.extend(entries(t.data.iter().copied()));
        d.row(row);
    }
    for x in g.arrows() {
        let mut row = vec!["star".into(), arrows[x.0].clone()];
        row.extend(entries(row_major(&b.star[x.0])));
        d.row(row);
    }
    d
}

/// `algebra <name> explicit <dim>`; zero products are omitted.
pub fn emit_algebra(name: &str, a: &StarAlgebra) -> Decl {
    let n = a.dim();
    let labels = tokenize_labels(a.labels.iter().map(String::as_str));
    let mut d = Decl::new("algebra", name, "explicit", vec![n.to_string()]);
    let mut row = vec!["labels".to_string()];
    row.extend(labels.iter().cloned());
    d.row(row);
    for i in 0..n {
        for j in 0..n {
            let p = a.basis_product(i, j);
            if p.iter().any(|z| *z != C64::new(0.0, 0.0)) {
                let mut row = vec!["product".into(), labels[i].clone(), labels[j].clone()];
                row.extend(entries(p));
                d.row(row);
            }
        }
    }
    let mut row = vec!["star".to_string()];
    row.extend(entries(row_major(&a.star_matrix())));
    d.row(row);
    d
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::{parse_model, resolve, ModelFile};

    fn reparse(decls: Vec<Decl>) -> crate::io::Objects {
        let m = ModelFile { decls, ..Default::default() };
        resolve(&parse_model(&m.to_text()).unwrap()).unwrap()
    }

    #[test]
    fn groupoid_and_bundle_survive_emission() {
        let g = FiniteGroupoid::product(&FiniteGroupoid::pair(2).unwrap(), &crate::groupoid::FiniteGroup::cyclic(2).unwrap().groupoid);
        let mut b = FellBundle::line(g.clone());
        for x in g.arrows() {
            b.star[x.0][(0, 0)] = C64::new(1.0, 0.0);
        }
        let o = reparse(vec![emit_groupoid("X", &g), emit_bundle("B", "X", &b)]);
        assert_eq!(o.groupoid("X").unwrap(), &g);
        assert_eq!(o.bundle("B").unwrap(), &b);
    }

    #[test]
    fn actions_survive_emission() {
        let g = FiniteGroup::symmetric(3).unwrap();
        let x = FiniteGroupoid::pair(3).unwrap();
        let perms: Vec<Vec<usize>> = g.elements().map(|t| FiniteGroup::symmetric_permutation(3, t)).collect();
        let a = GroupAction::from_unit_permutations(g.clone(), x.clone(), crate::groupoid::Side::Left, &perms).unwrap();
        let s = SpaceAction::left_translation(&x);
        let o = reparse(vec![
            emit_group("S3", &g),
            emit_groupoid("X", &x),
            emit_action("a", "S3", "X", &a),
            emit_space_action("s", "X", &s),
        ]);
        assert_eq!(o.action("a").unwrap().table, a.table);
        assert_eq!(o.space_action("s").unwrap().table, s.table);
        assert_eq!(o.group("S3").unwrap().groupoid.comp, g.groupoid.comp);
    }

    #[test]
    fn algebra_survives_emission() {
        let a = StarAlgebra::matrix(2);
        let o = reparse(vec![emit_algebra("M2", &a)]);
        let back = o.algebra("M2").unwrap();
        assert_eq!(back.structure_tensor(), a.structure_tensor());
        assert_eq!(back.star_matrix(), a.star_matrix());
    }
}
