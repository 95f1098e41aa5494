//! Named small instances and seeded random generators of free commuting
//! actions, used by the demos, the examples and the property tests.

use std::collections::HashMap;
use std::f64::consts::PI;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::Result;
use crate::fell::{BundleAction, FellBundle};
use crate::groupoid::{Arrow, FiniteGroup, FiniteGroupoid, GroupAction, Side, Unit};
use crate::linalg::{CMatrix, C64, ONE, ZERO};
use crate::morita::RaeburnData;
use crate::star::StarAlgebra;

/// The pair groupoid on `1..=4` with the line bundle, `Z/2` acting on the
/// left by `(13)(24)` and on the right by `(12)(34)`.
pub fn symmetric_z2z2() -> (BundleAction, BundleAction) {
    let z2 = FiniteGroup::cyclic(2).expect("Z/2");
    let x = FiniteGroupoid::pair(4).expect("pair groupoid");
    let g = GroupAction::from_unit_permutations(z2.clone(), x.clone(), Side::Left, &[vec![0, 1, 2, 3], vec![2, 3, 0, 1]])
        .expect("left swap");
    let h = GroupAction::from_unit_permutations(z2, x.clone(), Side::Right, &[vec![0, 1, 2, 3], vec![1, 0, 3, 2]])
        .expect("right swap");
    let a = FellBundle::line(x);
    (
        BundleAction::identity_maps(a.clone(), g).expect("line bundle action"),
        BundleAction::identity_maps(a, h).expect("line bundle action"),
    )
}

fn z2() -> FiniteGroup {
    FiniteGroup::cyclic(2).expect("Z/2")
}

/// `X = Z/2`, `G = Z/2` by translation, `H` trivial, `B = ℂ`.
pub fn raeburn_translation() -> RaeburnData {
    RaeburnData {
        points: vec!["0".into(), "1".into()],
        g: z2(),
        left: vec![vec![0, 1], vec![1, 0]],
        h: FiniteGroup::trivial(),
        right: vec![vec![0, 1]],
        b: StarAlgebra::complex(),
        sigma: vec![CMatrix::identity(1, 1); 2],
        tau: vec![CMatrix::identity(1, 1)],
    }
}

/// `X = Z/2 × Z/2` (point `(a,b)` at `2a+b`), `G = Z/2` moving `a`,
/// `H = Z/2` moving `b`, with `B`, `σ`, `τ` supplied.
pub fn raeburn_two_sided(b: StarAlgebra, sigma: Vec<CMatrix>, tau: Vec<CMatrix>) -> RaeburnData {
    RaeburnData {
        points: (0..4).map(|k| format!("({},{})", k / 2, k % 2)).collect(),
        g: z2(),
        left: vec![vec![0, 1, 2, 3], vec![2, 3, 0, 1]],
        h: z2(),
        right: vec![vec![0, 1, 2, 3], vec![1, 0, 3, 2]],
        b,
        sigma,
        tau,
    }
}

/// The two-sided case with `B = ℂ` and trivial automorphisms.
pub fn raeburn_two_sided_scalar() -> RaeburnData {
    raeburn_two_sided(StarAlgebra::complex(), vec![CMatrix::identity(1, 1); 2], vec![CMatrix::identity(1, 1); 2])
}

/// The two-sided case with `B = ℂ²` and `G` swapping the summands.
pub fn raeburn_two_sided_swap() -> RaeburnData {
    let swap = CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]);
    raeburn_two_sided(StarAlgebra::diagonal(2), vec![CMatrix::identity(2, 2), swap], vec![CMatrix::identity(2, 2); 2])
}

/// Free commuting actions `G ↷ 𝒳 ↶ H` drawn at random.
#[derive(Debug, Clone)]
pub struct RandomInstance {
    pub g: GroupAction,
    pub h: GroupAction,
    pub description: String,
}

/// Draws `𝒳 = R × K` with `R` a `G×H`-invariant equivalence relation on the
/// units `G × H × [m]` (randomly relabelled, at most `max_units` of them)
/// and `K` a trivial or `Z/2` isotropy group; `G` and `H` act by translation
/// on their coordinates, so both actions are free and commute.
pub fn random_free_commuting<R: Rng>(rng: &mut R, max_units: usize) -> Result<RandomInstance> {
    let max_units = max_units.max(1);
    let shapes: Vec<(usize, usize, usize)> = (1..=3)
        .flat_map(|a| (1..=3).flat_map(move |b| (1..=3).map(move |m| (a, b, m))))
        .filter(|&(a, b, m)| a * b * m <= max_units)
        .collect();
    let &(ng, nh, m) = shapes.choose(rng).expect("the trivial shape always fits");
    let n = ng * nh * m;
    let coords = |u: usize| (u / (nh * m), (u / m) % nh, u % m);
    let index = |a: usize, b: usize, i: usize| (a * nh + b) * m + i;

    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(rng);
    let mut inv = vec![0; n];
    for (k, &p) in perm.iter().enumerate() {
        inv[p] = k;
    }
    let full = rng.gen_bool(0.5);
    let colour: Vec<usize> = (0..m).map(|_| rng.gen_range(0..m)).collect();
    let related = |a: usize, b: usize| full || colour[coords(inv[a]).2] == colour[coords(inv[b]).2];
    let rel = FiniteGroupoid::equivalence_relation(n, related)?;
    let iso = if rng.gen_bool(0.3) { z2() } else { FiniteGroup::trivial() };
    let nk = iso.order();
    let x = FiniteGroupoid::product(&rel, &iso.groupoid);

    let lookup: HashMap<(Unit, Unit), Arrow> = rel.arrows().map(|y| ((rel.rng(y), rel.src(y)), y)).collect();
    let g_grp = FiniteGroup::cyclic(ng)?;
    let h_grp = FiniteGroup::cyclic(nh)?;
    let move_unit = |u: usize, f: &dyn Fn(usize, usize, usize) -> usize| -> usize {
        let (a, b, i) = coords(inv[u]);
        perm[f(a, b, i)]
    };
    let lift = |a: Arrow, f: &dyn Fn(usize, usize, usize) -> usize| -> Arrow {
        let (y, k) = (Arrow(a.0 / nk), a.0 % nk);
        let key = (Unit(move_unit(rel.rng(y).0, f)), Unit(move_unit(rel.src(y).0, f)));
        Arrow(lookup[&key].0 * nk + k)
    };
    let g = GroupAction::from_fn(g_grp, x.clone(), Side::Left, |t, a| {
        lift(a, &|p, q, i| index((t + p) % ng, q, i))
    })?;
    let h = GroupAction::from_fn(h_grp, x, Side::Right, |s, a| lift(a, &|p, q, i| index(p, (q + s) % nh, i)))?;
    let description = format!(
        "Z/{ng} x Z/{nh} on {n} units ({}), isotropy of order {nk}",
        if full { "pair groupoid" } else { "coloured relation" }
    );
    Ok(RandomInstance { g, h, description })
}

/// The line bundle over the target of `a` with fiber maps
/// `φ_t(x) = c_t(r(x))·conj(c_t(s(x)))`, `c_t(u) = ψ(t·u)/ψ(u)` for random
/// phases `ψ`; a cohomologically trivial but non-identity action.
pub fn random_phase_action<R: Rng>(rng: &mut R, a: &GroupAction) -> Result<BundleAction> {
    let x = &a.target;
    let psi: Vec<C64> = x.units().map(|_| C64::from_polar(1.0, 2.0 * PI * rng.gen_range(0..8) as f64 / 8.0)).collect();
    let c = |t: usize, u: Unit| psi[a.apply_unit(t, u).0] / psi[u.0];
    BundleAction::from_fn(FellBundle::line(x.clone()), a.clone(), |t, y| {
        CMatrix::from_element(1, 1, c(t, x.rng(y)) * c(t, x.src(y)).conj())
    })
}

/// The line bundle over a group, or the constant `M_k` bundle.
pub fn group_bundle(group: &FiniteGroup, matrix_size: Option<usize>) -> FellBundle {
    match matrix_size {
        None => FellBundle::line(group.groupoid.clone()),
        Some(k) => {
            let m = StarAlgebra::matrix(k);
            FellBundle::constant(group.groupoid.clone(), m.structure_tensor(), m.star_matrix())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fell::check_bundle_action;
    use crate::groupoid::{is_free, symmetric_groupoid_equivalence, verify_groupoid_equivalence};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn random_instances_are_free_and_commuting() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10 {
            let inst = random_free_commuting(&mut rng, 6).unwrap();
            assert!(inst.g.target.n_units() <= 6);
            assert!(is_free(&inst.g) && is_free(&inst.h), "{}", inst.description);
            let e = symmetric_groupoid_equivalence(&inst.g, &inst.h).unwrap();
            assert!(verify_groupoid_equivalence(&e.equivalence).is_ok(), "{}", inst.description);
        }
    }

    #[test]
    fn phase_actions_are_actions() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let inst = random_free_commuting(&mut rng, 6).unwrap();
        for a in [&inst.g, &inst.h] {
            let ba = random_phase_action(&mut rng, a).unwrap();
            assert!(check_bundle_action(&ba, 1e-12).is_ok());
        }
    }
}
