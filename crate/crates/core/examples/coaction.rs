// The finite coaction case: compact operators on L²(G) crossed by the
// adjoint action are Morita equivalent to the group algebra.

use groupoidal::fell::FellBundle;
use groupoidal::groupoid::FiniteGroup;
use groupoidal::linalg::DEFAULT_TOL;
use groupoidal::morita::coaction_demo;

pub fn run_example() -> String {
    let mut out = String::new();
    for n in [2, 3] {
        let g = FiniteGroup::cyclic(n).unwrap();
        let cert = coaction_demo(&FellBundle::line(g.groupoid.clone()), DEFAULT_TOL, 0).unwrap();
        assert!(cert.is_equivalent());
        assert_eq!(cert.left.dimension, n * n * n);
        out += &format!(
            "Z/{n}: dimension {} ~ {}, centers {} and {}\n",
            cert.left.dimension, cert.right.dimension, cert.left.structure.center_dim, cert.right.structure.center_dim
        );
    }
    out
}

fn main() {
    print!("{}", run_example());
}
