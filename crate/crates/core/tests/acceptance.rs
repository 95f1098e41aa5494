//! The acceptance gate: one line per criterion on stdout, then a single
//! assertion that all of them held.

mod common;

use std::io::Write;
use std::time::Instant;

use groupoidal::fell::{
    principal_fell_decomposition, quotient_fell_bundle, semidirect_fell_bundle, symmetric_action_equivalence,
    transformation_fell_bundle, verify_bundle_equivalence, verify_principal_fell_decomposition, BundleAction, FellBundle,
};
use groupoidal::groupoid::{
    orbit_space_action, principal_decomposition, quotient_groupoid, symmetric_groupoid_equivalence,
    verify_groupoid_equivalence, verify_principal_decomposition, Arrow, FiniteGroup, FiniteGroupoid, GroupAction, Side,
    SpaceAction,
};
use groupoidal::instances::{
    raeburn_translation, raeburn_two_sided_scalar, raeburn_two_sided_swap, random_free_commuting, random_phase_action,
    symmetric_z2z2,
};
use groupoidal::linalg::{CMatrix, C64, ONE, ZERO};
use groupoidal::morita::{
    certify, coaction_action, coaction_demo, linking_system, raeburn, raeburn_actions, symmetric_morita, verify_morita,
    RaeburnData, Verdict,
};
use groupoidal::report::ValidationReport;
use groupoidal::star::{section_algebra, StarAlgebra};
use groupoidal::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TOL: f64 = 1e-9;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let (g, h) = symmetric_z2z2();
    let eq = symmetric_action_equivalence(&g, &h).map_err(|e| e.to_string())?;
    let rep = verify_bundle_equivalence(&eq.equivalence, TOL);
    ensure(rep.is_ok(), || rep.to_string())?;
    for step in 1..=6 {
        let c = rep
            .checks
            .iter()
            .find(|c| c.name.starts_with(&format!("step{step} ")))
            .ok_or_else(|| format!("step {step} did not run"))?;
        ensure(c.passed && c.max_residual <= TOL && c.cases > 0, || format!("step {step}: {c:?}"))?;
    }
    let cert = symmetric_morita(&g, &h, TOL, 0).map_err(|e| e.to_string())?;
    ensure(cert.verdict == Verdict::Equivalent, || cert.render())?;
    let (l, r) = (cert.left.structure.center_dim, cert.right.structure.center_dim);
    ensure(l == r, || format!("center dimensions {l} and {r}"))?;
    let secs = start.elapsed().as_secs_f64();
    ensure(secs < 10.0, || format!("took {secs:.1} s"))?;
    Ok(format!("six steps pass, max residual {:.1e}; equivalent, centers {l} = {r}; {secs:.2} s", rep.max_residual()))
}

/// Moves one defined entry of the left action to another point.
fn corrupt(a: &mut SpaceAction, rng: &mut ChaCha8Rng) -> String {
    let n = a.n_points();
    let defined: Vec<usize> = (0..a.table.len()).filter(|&k| a.table[k].is_some()).collect();
    let k = defined[rng.gen_range(0..defined.len())];
    let old = a.table[k].unwrap();
    a.table[k] = Some((old + 1 + rng.gen_range(0..n - 1)) % n);
    format!("{}·{}", a.groupoid.label(Arrow(k / n)), a.point_labels[k % n])
}

fn criterion_2() -> Outcome {
    let (g, h) = symmetric_z2z2();
    let mut instances = vec![(g.base_action.clone(), h.base_action.clone(), "4-point instance".to_string())];
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..50 {
        let inst = random_free_commuting(&mut rng, 6).map_err(|e| e.to_string())?;
        instances.push((inst.g, inst.h, inst.description));
    }
    let mut detected = 0;
    let mut corrupted = 0;
    for (g, h, desc) in &instances {
        let s = symmetric_groupoid_equivalence(g, h).map_err(|e| format!("{desc}: {e}"))?;
        let rep = verify_groupoid_equivalence(&s.equivalence);
        ensure(rep.is_ok(), || format!("{desc}: {rep}"))?;
        if s.equivalence.n_points() < 2 {
            continue;
        }
        let mut bad = s.equivalence.clone();
        let at = corrupt(&mut bad.left_action, &mut rng);
        corrupted += 1;
        let rep = verify_groupoid_equivalence(&bad);
        ensure(!rep.is_ok() && rep.violations.iter().all(|v| !v.witness.is_empty()), || {
            format!("{desc}: corruption at {at} not detected with a witness: {rep}")
        })?;
        detected += 1;
    }
    Ok(format!("{} instances verified exhaustively; {detected}/{corrupted} corruptions detected with witnesses", instances.len()))
}

fn criterion_3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut worst: f64 = 0.0;
    for k in 0..20 {
        let inst = random_free_commuting(&mut rng, 6).map_err(|e| e.to_string())?;
        let h = &inst.h;
        let pd = principal_decomposition(h).map_err(|e| format!("#{k}: {e}"))?;
        let rep = verify_principal_decomposition(h, &pd);
        ensure(rep.is_ok(), || format!("#{k} {}: {rep}", inst.description))?;
        let ba = random_phase_action(&mut rng, h).map_err(|e| e.to_string())?;
        let d = principal_fell_decomposition(&ba).map_err(|e| format!("#{k}: {e}"))?;
        let rep = verify_principal_fell_decomposition(&ba, &d, TOL);
        ensure(rep.is_ok(), || format!("#{k} {}: {rep}", inst.description))?;
        for name in ["tau-multiplicative", "tau-star", "tau-equivariance"] {
            ensure(rep.checks.iter().any(|c| c.name == name && c.cases > 0), || format!("#{k}: {name} did not run"))?;
        }
        worst = worst.max(rep.max_residual());
    }
    Ok(format!("20 random free actions: θ_s and τ verified, max residual {worst:.1e}"))
}

fn raeburn_centers(d: &RaeburnData) -> Result<(usize, usize), String> {
    let (g, h) = raeburn_actions(d, TOL).map_err(|e| e.to_string())?;
    let eq = symmetric_action_equivalence(&g, &h).map_err(|e| e.to_string())?;
    let (ls, _) = certify(&eq.equivalence, "raeburn", TOL, 0).map_err(|e| e.to_string())?;
    Ok((common::center_dim(&ls.left_corner), common::center_dim(&ls.right_corner)))
}

fn criterion_4() -> Outcome {
    let start = Instant::now();
    let cert = raeburn(&raeburn_translation(), TOL, 0).map_err(|e| e.to_string())?;
    ensure(cert.verdict == Verdict::Equivalent, || cert.render())?;
    ensure(cert.left.structure.blocks == vec![2] && cert.right.structure.blocks == vec![1], || {
        format!("blocks {:?} and {:?}", cert.left.structure.blocks, cert.right.structure.blocks)
    })?;
    let mut notes = Vec::new();
    for (name, d) in [("scalar", raeburn_two_sided_scalar()), ("swap", raeburn_two_sided_swap())] {
        let cert = raeburn(&d, TOL, 0).map_err(|e| e.to_string())?;
        ensure(cert.verdict == Verdict::Equivalent, || format!("{name}: {}", cert.render()))?;
        let (l, r) = raeburn_centers(&d)?;
        ensure(l == r, || format!("{name}: oracle centers {l} and {r}"))?;
        ensure(cert.left.structure.center_dim == l && cert.right.structure.center_dim == r, || {
            format!("{name}: certificate centers disagree with the oracle")
        })?;
        notes.push(format!("{name} centers {l} = {r}"));
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(secs < 30.0, || format!("took {secs:.1} s"))?;
    Ok(format!("C(Z/2)⋊Z/2 blocks [2] ~ ℂ; two-sided {}; {secs:.2} s", notes.join(", ")))
}

fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut notes = Vec::new();
    for n in [2usize, 3] {
        let g = FiniteGroup::cyclic(n).map_err(|e| e.to_string())?;
        let b = FellBundle::line(g.groupoid.clone());
        let cert = coaction_demo(&b, TOL, 0).map_err(|e| e.to_string())?;
        ensure(cert.verdict == Verdict::Equivalent, || cert.render())?;
        ensure(cert.left.dimension == n.pow(3) && cert.right.dimension == n, || {
            format!("Z/{n}: dimensions {} and {}", cert.left.dimension, cert.right.dimension)
        })?;
        let (_, ba) = coaction_action(&b).map_err(|e| e.to_string())?;
        let eq = groupoidal::fell::one_sided_equivalence(&ba).map_err(|e| e.to_string())?;
        let (ls, _) = certify(&eq.equivalence, "coaction", TOL, 0).map_err(|e| e.to_string())?;
        let (lb, rb) = (common::wedderburn_blocks(&ls.left_corner, &mut rng), common::wedderburn_blocks(&ls.right_corner, &mut rng));
        ensure(lb == vec![n; n] && rb == vec![1; n], || format!("Z/{n}: oracle blocks {lb:?} and {rb:?}"))?;
        ensure(cert.left.structure.blocks == lb && cert.right.structure.blocks == rb, || {
            format!("Z/{n}: certificate blocks disagree with the oracle")
        })?;
        ensure(cert.left.structure.center_dim == n && cert.right.structure.center_dim == n, || format!("Z/{n}: centers"))?;
        notes.push(format!("Z/{n}: {} ~ {}, centers {n}", n.pow(3), n));
    }
    Ok(notes.join("; "))
}

fn swap_automorphism() -> CMatrix {
    // Ad of the 2x2 flip on M2: e_ij -> e_(1-i)(1-j).
    CMatrix::from_fn(4, 4, |r, c| if r == 3 - c { ONE } else { ZERO })
}

fn criterion_6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let m2 = StarAlgebra::matrix(2);
    let mut worst: f64 = 0.0;

    let y = FiniteGroupoid::pair(3).map_err(|e| e.to_string())?;
    let z3 = FiniteGroup::cyclic(3).map_err(|e| e.to_string())?;
    let cases = [
        (FellBundle::constant(y.clone(), m2.structure_tensor(), m2.star_matrix()), SpaceAction::left_translation(&y)),
        (FellBundle::line(z3.groupoid.clone()), SpaceAction::left_translation(&z3.groupoid)),
    ];
    for (a, act) in &cases {
        let (t, tb) = transformation_fell_bundle(a, act).map_err(|e| e.to_string())?;
        let alg = section_algebra(&tb);
        for _ in 0..5 {
            let f = common::integer_section(&mut rng, alg.dim());
            let g = common::integer_section(&mut rng, alg.dim());
            worst = worst.max(common::max_diff(&alg.mul(&f, &g), &common::transformation_convolution(a, act, &t, &tb, &f, &g)));
        }
    }

    let x = FiniteGroupoid::pair(4).map_err(|e| e.to_string())?;
    let z2 = FiniteGroup::cyclic(2).map_err(|e| e.to_string())?;
    let flip = GroupAction::from_unit_permutations(z2, x.clone(), Side::Left, &[vec![0, 1, 2, 3], vec![2, 3, 0, 1]])
        .map_err(|e| e.to_string())?;
    let constant = FellBundle::constant(x.clone(), m2.structure_tensor(), m2.star_matrix());
    let ad = BundleAction::from_fn(constant, flip.clone(), |t, _| if t == 0 { CMatrix::identity(4, 4) } else { swap_automorphism() })
        .map_err(|e| e.to_string())?;
    let phases = random_phase_action(&mut rng, &flip).map_err(|e| e.to_string())?;
    for ba in [&ad, &phases] {
        let (sd, sb) = semidirect_fell_bundle(ba).map_err(|e| e.to_string())?;
        let alg = section_algebra(&sb);
        for _ in 0..5 {
            let f = common::integer_section(&mut rng, alg.dim());
            let g = common::integer_section(&mut rng, alg.dim());
            worst = worst.max(common::max_diff(&alg.mul(&f, &g), &common::semidirect_convolution(ba, &sd, &sb, &f, &g)));
        }
    }
    ensure(worst <= 1e-12, || format!("max deviation {worst:.3e}"))?;
    Ok(format!("transformation and semidirect products agree with the specialized formulas, max deviation {worst:.1e}"))
}

fn witnesses(rep: &ValidationReport, check: &str) -> Vec<String> {
    rep.violations_of(check).map(|v| v.witness.clone()).filter(|w| !w.is_empty()).collect()
}

fn criterion_7() -> Outcome {
    // Zeroed off-diagonal linking data.
    let (g, h) = symmetric_z2z2();
    let eq = symmetric_action_equivalence(&g, &h).map_err(|e| e.to_string())?;
    let ls = linking_system(&eq.equivalence, TOL).map_err(|e| e.to_string())?;
    let zeroed = ls.with_zeroed_inner_products(TOL).map_err(|e| e.to_string())?;
    let cert = verify_morita(&zeroed, "zeroed", TOL, 0);
    ensure(cert.verdict == Verdict::NotCertified && !cert.left.is_full() && !cert.right.is_full(), || cert.render())?;
    let fullness = format!("fullness {}/{}", cert.left.fullness_rank, cert.left.dimension);

    // A non-free action against every quotient construction.
    let z2 = FiniteGroup::cyclic(2).map_err(|e| e.to_string())?;
    let pts = FiniteGroupoid::unit_space(vec!["a".into(), "b".into()]);
    let still = GroupAction::from_unit_permutations(z2, pts.clone(), Side::Right, &[vec![0, 1], vec![0, 1]])
        .map_err(|e| e.to_string())?;
    let line = BundleAction::identity_maps(FellBundle::line(pts), still.clone()).map_err(|e| e.to_string())?;
    let results: Vec<(&str, Option<Error>)> = vec![
        ("quotient groupoid", quotient_groupoid(&still).err()),
        ("orbit space action", orbit_space_action(&still).err()),
        ("principal decomposition", principal_decomposition(&still).err()),
        ("quotient bundle", quotient_fell_bundle(&line).err()),
        ("principal Fell decomposition", principal_fell_decomposition(&line).err()),
    ];
    for (name, err) in &results {
        match err {
            Some(Error::NotFree { witness }) if !witness.is_empty() => {}
            other => return Err(format!("{name}: expected a not-free rejection, got {other:?}")),
        }
    }

    // A corrupted involution on the left bundle.
    let mut bad = eq.equivalence.clone();
    let p = &bad.left.bundle.base;
    let arrow = p.arrows().find(|&x| !p.is_unit_arrow(x)).ok_or("no non-unit arrow")?;
    bad.left.bundle.star[arrow.0] *= C64::new(-1.0, 0.0);
    let rep = verify_bundle_equivalence(&bad, TOL);
    let w = witnesses(&rep, "step3 adjoint");
    ensure(!w.is_empty(), || format!("step 3 passed on a corrupted involution: {rep}"))?;
    Ok(format!(
        "zeroed linking data: {fullness}, not certified; non-free action rejected by {} constructions; corrupted involution fails step 3 at {}",
        results.len(),
        w[0]
    ))
}

#[test]
fn acceptance() {
    let criteria: [(usize, fn() -> Outcome); 7] =
        [(1, criterion_1), (2, criterion_2), (3, criterion_3), (4, criterion_4), (5, criterion_5), (6, criterion_6), (7, criterion_7)];
    let mut failed = Vec::new();
    let mut out = std::io::stdout().lock();
    for (k, f) in criteria {
        let line = match f() {
            Ok(detail) => format!("criterion {k}: PASS  {detail}"),
            Err(detail) => {
                failed.push(k);
                format!("criterion {k}: FAIL  {detail}")
            }
        };
        writeln!(out, "{line}").unwrap();
    }
    out.flush().unwrap();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
