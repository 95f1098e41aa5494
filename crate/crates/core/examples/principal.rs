// Free actions as transformation groupoids and bundles: a random free
// action, decomposed and verified, with a phase-twisted bundle action.

use groupoidal::fell::{principal_fell_decomposition, verify_principal_fell_decomposition};
use groupoidal::groupoid::{principal_decomposition, verify_principal_decomposition};
use groupoidal::instances::{random_free_commuting, random_phase_action};
use groupoidal::linalg::DEFAULT_TOL;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn run_example() -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let inst = random_free_commuting(&mut rng, 6).unwrap();
    let pd = principal_decomposition(&inst.h).unwrap();
    assert!(verify_principal_decomposition(&inst.h, &pd).is_ok());
    let ba = random_phase_action(&mut rng, &inst.h).unwrap();
    let d = principal_fell_decomposition(&ba).unwrap();
    let rep = verify_principal_fell_decomposition(&ba, &d, DEFAULT_TOL);
    assert!(rep.is_ok(), "{rep}");
    format!(
        "{}\nquotient has {} arrows; transformation groupoid has {}; max residual {:.1e}\n",
        inst.description,
        pd.quotient.groupoid.n_arrows(),
        pd.transformation.groupoid.n_arrows(),
        rep.max_residual()
    )
}

fn main() {
    print!("{}", run_example());
}
