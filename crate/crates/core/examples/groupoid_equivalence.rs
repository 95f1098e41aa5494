// The groupoid equivalence built from commuting free actions, with both
// bracket maps and a randomized instance.

use groupoidal::groupoid::{left_bracket, right_bracket, symmetric_groupoid_equivalence, verify_groupoid_equivalence};
use groupoidal::instances::{random_free_commuting, symmetric_z2z2};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn run_example() -> String {
    let (g, h) = symmetric_z2z2();
    let s = symmetric_groupoid_equivalence(&g.base_action, &h.base_action).unwrap();
    let z = &s.equivalence;
    assert!(verify_groupoid_equivalence(z).is_ok());
    let mut out = format!(
        "Z has {} points; P has {} arrows, Q has {} arrows\n",
        z.n_points(),
        z.left().n_arrows(),
        z.right().n_arrows()
    );
    let (a, b) = (0, 1);
    if z.sigma(a) == z.sigma(b) {
        let p = left_bracket(&s, a, b).unwrap();
        assert_eq!(p, z.left_bracket_search(a, b).unwrap());
        out += &format!("_L[{}, {}] = {}\n", z.point_label(a), z.point_label(b), z.left().label(p));
    }
    if z.rho(a) == z.rho(b) {
        let q = right_bracket(&s, a, b).unwrap();
        out += &format!("[{}, {}]_R = {}\n", z.point_label(a), z.point_label(b), z.right().label(q));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let inst = random_free_commuting(&mut rng, 6).unwrap();
    let s = symmetric_groupoid_equivalence(&inst.g, &inst.h).unwrap();
    assert!(verify_groupoid_equivalence(&s.equivalence).is_ok());
    out += &format!("random instance ({}): verified\n", inst.description);
    out
}

fn main() {
    print!("{}", run_example());
}
