use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fell::{validate_fell_bundle, verify_bundle_equivalence, BundleEquivalence, FellBundle};
use crate::groupoid::{Arrow, FiniteGroupoid, Unit};
use crate::linalg::{basis_vec, max_abs_diff, random_vector, rank, CMatrix, Tensor3, C64, ZERO};
use crate::report::ValidationReport;
use crate::star::{
    check_star_homomorphism, regular_representation, restrict, section_algebra, star_structure_report, StarAlgebra,
    StarStructureReport,
};

/// Which block of the linking groupoid an arrow belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Block {
    P(usize),
    Z(usize),
    ZOp(usize),
    Q(usize),
}

/// The linking groupoid `P ⊔ Z ⊔ Z̄ ⊔ Q` of an equivalence, the linking
/// bundle over it and its section algebra with the two corners.
///
/// `z ∈ Z` is an arrow from `σ(z)` to `ρ(z)` and `z̄` its inverse. The
/// fiber over `z̄` is the conjugate space of `E(z)`, with `ā` stored as
/// `conj(a)`.
#[derive(Debug, Clone)]
pub struct LinkingSystem {
    pub groupoid: FiniteGroupoid,
    pub bundle: FellBundle,
    pub algebra: StarAlgebra,
    pub blocks: Vec<Block>,
    /// Section-algebra basis indices supported on `P`, `Z`, `Z̄`, `Q`.
    pub p_indices: Vec<usize>,
    pub z_indices: Vec<usize>,
    pub zop_indices: Vec<usize>,
    pub q_indices: Vec<usize>,
    pub p_projection: Vec<C64>,
    pub q_projection: Vec<C64>,
    pub left_corner: StarAlgebra,
    pub right_corner: StarAlgebra,
    pub report: ValidationReport,
}

fn conj_tensor(t: &Tensor3) -> Tensor3 {
    Tensor3::from_fn(t.out, t.left, t.right, |k, i, j| t.get(k, i, j).conj())
}

/// Assembles the linking system and validates the linking groupoid and
/// bundle exhaustively. The equivalence is verified first.
pub fn linking_system(e: &BundleEquivalence, tol: f64) -> Result<LinkingSystem> {
    let rep = verify_bundle_equivalence(e, tol);
    if !rep.is_ok() {
        return Err(Error::EquivalenceFailed(rep));
    }
    build_linking(e, tol)
}

pub(crate) fn build_linking(e: &BundleEquivalence, tol: f64) -> Result<LinkingSystem> {
    let base = e.base();
    let (pb, qb) = (e.left_bundle(), e.right_bundle());
    let (p, q) = (&pb.base, &qb.base);
    let (np, nz, nq) = (p.n_arrows(), e.n_points(), q.n_arrows());
    let npu = p.n_units();
    let n = np + 2 * nz + nq;
    let block = |a: usize| {
        if a < np {
            Block::P(a)
        } else if a < np + nz {
            Block::Z(a - np)
        } else if a < np + 2 * nz {
            Block::ZOp(a - np - nz)
        } else {
            Block::Q(a - np - 2 * nz)
        }
    };
    let blocks: Vec<Block> = (0..n).map(block).collect();
    let (zo, zbo, qo) = (np, np + nz, np + 2 * nz);
    let qu = |u: Unit| Unit(npu + u.0);

    let mut labels = Vec::with_capacity(n);
    let mut src = Vec::with_capacity(n);
    let mut rng = Vec::with_capacity(n);
    let mut inv = Vec::with_capacity(n);
    for b in &blocks {
        match *b {
            Block::P(x) => {
                labels.push(format!("P{}", p.label(Arrow(x))));
                src.push(p.src(Arrow(x)));
                rng.push(p.rng(Arrow(x)));
                inv.push(Arrow(p.inv(Arrow(x)).0));
            }
            Block::Z(z) => {
                labels.push(format!("Z{}", base.point_label(z)));
                src.push(qu(base.sigma(z)));
                rng.push(base.rho(z));
                inv.push(Arrow(zbo + z));
            }
            Block::ZOp(z) => {
                labels.push(format!("Z~{}", base.point_label(z)));
                src.push(base.rho(z));
                rng.push(qu(base.sigma(z)));
                inv.push(Arrow(zo + z));
            }
            Block::Q(y) => {
                labels.push(format!("Q{}", q.label(Arrow(y))));
                src.push(qu(q.src(Arrow(y))));
                rng.push(qu(q.rng(Arrow(y))));
                inv.push(Arrow(qo + q.inv(Arrow(y)).0));
            }
        }
    }
    let unit_labels: Vec<String> = p
        .units()
        .map(|u| format!("P{}", p.unit_label(u)))
        .chain(q.units().map(|u| format!("Q{}", q.unit_label(u))))
        .collect();
    let unit_arrow: Vec<Arrow> = p.units().map(|u| p.unit_arrow(u)).chain(q.units().map(|u| Arrow(qo + q.unit_arrow(u).0))).collect();

    let lb = |k: usize| e.left_inner[k].as_ref();
    let rb = |k: usize| e.right_inner[k].as_ref();
    let mut failure: Option<String> = None;
    let mut compose = |x: Arrow, y: Arrow| -> Arrow {
        let r = match (blocks[x.0], blocks[y.0]) {
            (Block::P(a), Block::P(b)) => Some(p.mul(Arrow(a), Arrow(b)).0),
            (Block::Q(a), Block::Q(b)) => Some(qo + q.mul(Arrow(a), Arrow(b)).0),
            (Block::P(a), Block::Z(z)) => base.act_left(Arrow(a), z).map(|w| zo + w),
            (Block::Z(z), Block::Q(b)) => base.act_right(z, Arrow(b)).map(|w| zo + w),
            (Block::ZOp(z), Block::P(a)) => base.act_left(p.inv(Arrow(a)), z).map(|w| zbo + w),
            (Block::Q(b), Block::ZOp(z)) => base.act_right(z, q.inv(Arrow(b))).map(|w| zbo + w),
            (Block::Z(z1), Block::ZOp(z2)) => lb(z1 * nz + z2).map(|(a, _)| a.0),
            (Block::ZOp(z1), Block::Z(z2)) => rb(z1 * nz + z2).map(|(b, _)| qo + b.0),
            _ => None,
        };
        r.map(Arrow).unwrap_or_else(|| {
            failure.get_or_insert_with(|| format!("no product for composable ({:?}, {:?})", blocks[x.0], blocks[y.0]));
            x
        })
    };
    let groupoid = FiniteGroupoid::from_fn(labels, unit_labels, unit_arrow, src, rng, inv, &mut compose)?;
    if let Some(f) = failure {
        return Err(Error::Internal(f));
    }

    let dim: Vec<usize> = blocks
        .iter()
        .map(|b| match *b {
            Block::P(a) => pb.dim(Arrow(a)),
            Block::Z(z) | Block::ZOp(z) => e.fiber_dim(z),
            Block::Q(a) => qb.dim(Arrow(a)),
        })
        .collect();
    let mut mult = vec![None; n * n];
    for (x, y) in groupoid.composable_pairs() {
        let t = match (blocks[x.0], blocks[y.0]) {
            (Block::P(a), Block::P(b)) => pb.mult(Arrow(a), Arrow(b)).clone(),
            (Block::Q(a), Block::Q(b)) => qb.mult(Arrow(a), Arrow(b)).clone(),
            (Block::P(a), Block::Z(z)) => e.left.tensor(Arrow(a), z).expect("composable").clone(),
            (Block::Z(z), Block::Q(b)) => e.right.tensor(Arrow(b), z).expect("composable").clone(),
            (Block::Z(z1), Block::ZOp(z2)) => lb(z1 * nz + z2).expect("composable").1.clone(),
            (Block::ZOp(z1), Block::Z(z2)) => rb(z1 * nz + z2).expect("composable").1.clone(),
            (Block::ZOp(z), Block::P(a)) => {
                // ā·c = (c*·a)‾ with c* ∈ P(a⁻¹).
                let ai = p.inv(Arrow(a));
                let m = conj_tensor(e.left.tensor(ai, z).expect("composable"));
                let s = pb.star_matrix(Arrow(a)).map(|c| c.conj());
                Tensor3::from_fn(m.out, m.right, s.ncols(), |k, i, j| (0..m.left).map(|l| m.get(k, l, i) * s[(l, j)]).sum())
            }
            (Block::Q(b), Block::ZOp(z)) => {
                // c·ā = (a·c*)‾ with c* ∈ Q(b⁻¹).
                let bi = q.inv(Arrow(b));
                let m = conj_tensor(e.right.tensor(bi, z).expect("composable"));
                let s = qb.star_matrix(Arrow(b)).map(|c| c.conj());
                Tensor3::from_fn(m.out, s.ncols(), m.left, |k, j, i| (0..m.right).map(|l| m.get(k, i, l) * s[(l, j)]).sum())
            }
            (bx, by) => return Err(Error::Internal(format!("unexpected composable pair ({bx:?}, {by:?})"))),
        };
        mult[x.0 * n + y.0] = Some(t);
    }
    let star = blocks
        .iter()
        .map(|b| match *b {
            Block::P(a) => pb.star_matrix(Arrow(a)).clone(),
            Block::Q(a) => qb.star_matrix(Arrow(a)).clone(),
            Block::Z(z) | Block::ZOp(z) => CMatrix::identity(e.fiber_dim(z), e.fiber_dim(z)),
        })
        .collect();
    let bundle = FellBundle { base: groupoid.clone(), dim, mult, star };
    let mut report = validate_fell_bundle(&bundle, tol);
    report.subject = "linking bundle".into();
    assemble(groupoid, bundle, blocks, report, tol)
}

fn assemble(groupoid: FiniteGroupoid, bundle: FellBundle, blocks: Vec<Block>, mut report: ValidationReport, tol: f64) -> Result<LinkingSystem> {
    let algebra = section_algebra(&bundle);
    let offsets = bundle.offsets();
    let mut idx: [Vec<usize>; 4] = Default::default();
    for (a, b) in blocks.iter().enumerate() {
        let slot = match b {
            Block::P(_) => 0,
            Block::Z(_) => 1,
            Block::ZOp(_) => 2,
            Block::Q(_) => 3,
        };
        idx[slot].extend(offsets[a]..offsets[a] + bundle.dim[a]);
    }
    let [p_indices, z_indices, zop_indices, q_indices] = idx;
    let left_corner = restrict(&algebra, &p_indices)?;
    let right_corner = restrict(&algebra, &q_indices)?;

    let embed = |indices: &[usize], v: &[C64]| {
        let mut out = vec![ZERO; algebra.dim()];
        for (k, &i) in indices.iter().enumerate() {
            out[i] = v[k];
        }
        out
    };
    let unit_of = |corner: &StarAlgebra| corner.unit(tol.max(1e-9)).ok_or_else(|| Error::NotCStar(format!("{} has no unit", corner.provenance)));
    let p_projection = embed(&p_indices, &unit_of(&left_corner)?);
    let q_projection = embed(&q_indices, &unit_of(&right_corner)?);

    let one: Vec<C64> = p_projection.iter().zip(&q_projection).map(|(a, b)| a + b).collect();
    let mut worst: f64 = 0.0;
    for k in 0..algebra.dim() {
        let ek = basis_vec(algebra.dim(), k);
        worst = worst.max(max_abs_diff(&algebra.mul(&one, &ek), &ek)).max(max_abs_diff(&algebra.mul(&ek, &one), &ek));
    }
    if worst > tol {
        report.push_capped("corner projections", format!("p_P + p_Q is not the unit, residual {worst:.3e}"), "");
    }
    report.record("corner projections", algebra.dim(), worst);
    for (name, corner, indices) in [("left corner", &left_corner, &p_indices), ("right corner", &right_corner, &q_indices)] {
        let m = CMatrix::from_fn(algebra.dim(), corner.dim(), |r, c| if indices[c] == r { C64::new(1.0, 0.0) } else { ZERO });
        let r = check_star_homomorphism(corner, &algebra, &m, false, tol);
        for v in r.violations {
            report.push_capped(name, format!("inclusion {}: {}", v.check, v.message), v.witness);
        }
        report.record(name, corner.dim(), 0.0);
    }
    Ok(LinkingSystem {
        groupoid,
        bundle,
        algebra,
        blocks,
        p_indices,
        z_indices,
        zop_indices,
        q_indices,
        p_projection,
        q_projection,
        left_corner,
        right_corner,
        report,
    })
}

impl LinkingSystem {
    /// Negative control: zeroes the inner products (the products of `Z`
    /// with `Z̄`) and rebuilds the section algebra.
    pub fn with_zeroed_inner_products(&self, tol: f64) -> Result<LinkingSystem> {
        let n = self.groupoid.n_arrows();
        let mut bundle = self.bundle.clone();
        for (x, y) in self.groupoid.composable_pairs() {
            if matches!((self.blocks[x.0], self.blocks[y.0]), (Block::Z(_), Block::ZOp(_)) | (Block::ZOp(_), Block::Z(_))) {
                if let Some(t) = bundle.mult[x.0 * n + y.0].as_mut() {
                    *t = Tensor3::zeros(t.out, t.left, t.right);
                }
            }
        }
        let mut report = validate_fell_bundle(&bundle, tol);
        report.subject = "linking bundle".into();
        assemble(self.groupoid.clone(), bundle, self.blocks.clone(), report, tol)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Equivalent,
    NotCertified,
    Indeterminate,
}

impl Verdict {
    pub fn name(self) -> &'static str {
        match self {
            Verdict::Equivalent => "equivalent",
            Verdict::NotCertified => "not-certified",
            Verdict::Indeterminate => "indeterminate",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CornerSummary {
    pub dimension: usize,
    pub fullness_rank: usize,
    pub positivity_margin: f64,
    pub structure: StarStructureReport,
}

impl CornerSummary {
    pub fn is_full(&self) -> bool {
        self.fullness_rank == self.dimension
    }
}

/// A named side condition checked along with the certificate, such as a
/// corner identification.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Identification {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MoritaCertificate {
    pub scenario: String,
    pub left: CornerSummary,
    pub right: CornerSummary,
    pub exchange_residual: f64,
    pub linking_dimension: usize,
    pub linking_valid: bool,
    pub identifications: Vec<Identification>,
    pub seed: u64,
    pub tol: f64,
    pub verdict: Verdict,
}

impl MoritaCertificate {
    pub fn is_equivalent(&self) -> bool {
        self.verdict == Verdict::Equivalent
    }

    pub fn identify(&mut self, name: impl Into<String>, report: &ValidationReport) {
        self.identifications.push(Identification { name: name.into(), passed: report.is_ok(), detail: report.to_string() });
        self.recompute_verdict();
    }

    pub fn identify_with(&mut self, name: impl Into<String>, passed: bool, detail: impl Into<String>) {
        self.identifications.push(Identification { name: name.into(), passed, detail: detail.into() });
        self.recompute_verdict();
    }

    fn recompute_verdict(&mut self) {
        let (l, r) = (&self.left, &self.right);
        self.verdict = if l.structure.indeterminate || r.structure.indeterminate {
            Verdict::Indeterminate
        } else if self.linking_valid
            && l.is_full()
            && r.is_full()
            && l.positivity_margin >= -self.tol
            && r.positivity_margin >= -self.tol
            && self.exchange_residual <= self.tol
            && l.structure.center_dim == r.structure.center_dim
            && self.identifications.iter().all(|i| i.passed)
        {
            Verdict::Equivalent
        } else {
            Verdict::NotCertified
        };
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("certificates serialize")
    }

    pub fn render(&self) -> String {
        let mut s = format!("scenario {}\n", self.scenario);
        for (side, c) in [("left", &self.left), ("right", &self.right)] {
            s.push_str(&format!(
                "  {side} corner: {}; fullness {}/{}; positivity margin {:.3e}\n",
                c.structure.render(),
                c.fullness_rank,
                c.dimension,
                c.positivity_margin
            ));
        }
        s.push_str(&format!("  linking algebra: dimension {}, valid {}\n", self.linking_dimension, self.linking_valid));
        s.push_str(&format!("  exchange residual {:.3e}\n", self.exchange_residual));
        for i in &self.identifications {
            s.push_str(&format!("  {}: {}\n", i.name, if i.passed { "ok" } else { "FAILED" }));
        }
        s.push_str(&format!("  seed {}, tol {:e}\n  verdict: {}\n", self.seed, self.tol, self.verdict.name()));
        s
    }
}

fn positivity_margin(alg: &StarAlgebra, corner: &StarAlgebra, corner_idx: &[usize], sections: &[Vec<C64>], left: bool) -> f64 {
    let rep = regular_representation(corner);
    if !rep.faithful {
        return f64::NEG_INFINITY;
    }
    let mut margin = f64::INFINITY;
    for f in sections {
        let fs = alg.adjoint(f);
        let g = if left { alg.mul(f, &fs) } else { alg.mul(&fs, f) };
        let v: Vec<C64> = corner_idx.iter().map(|&i| g[i]).collect();
        let m = rep.image(&v);
        let h = (&m + m.adjoint()).scale(0.5);
        let scale = crate::linalg::operator_norm(&h).max(1.0);
        let min = nalgebra::linalg::SymmetricEigen::new(h).eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
        margin = margin.min(min / scale);
    }
    if margin.is_finite() {
        margin
    } else {
        0.0
    }
}

/// Fullness ranks, positivity margins, the exchange residual and the
/// Wedderburn invariants of both corners.
pub fn verify_morita(ls: &LinkingSystem, scenario: &str, tol: f64, seed: u64) -> MoritaCertificate {
    let alg = &ls.algebra;
    let n = alg.dim();
    let e = |k: usize| basis_vec(n, k);

    let span_rank = |rows: &[usize], lhs: &[usize], rhs: &[usize]| {
        let mut cols: Vec<Vec<C64>> = Vec::new();
        for &i in lhs {
            for &j in rhs {
                let v = alg.basis_product(i, j);
                if v.iter().any(|c| *c != ZERO) {
                    cols.push(rows.iter().map(|&r| v[r]).collect());
                }
            }
        }
        if cols.is_empty() || rows.is_empty() {
            0
        } else {
            rank(&CMatrix::from_fn(rows.len(), cols.len(), |r, c| cols[c][r]), tol.max(1e-9))
        }
    };
    let left_rank = span_rank(&ls.p_indices, &ls.z_indices, &ls.zop_indices);
    let right_rank = span_rank(&ls.q_indices, &ls.zop_indices, &ls.z_indices);

    let mut exchange: f64 = 0.0;
    for &a in &ls.z_indices {
        for &b in &ls.zop_indices {
            let ab = alg.basis_product(a, b);
            for &c in &ls.z_indices {
                let bc = alg.basis_product(b, c);
                exchange = exchange.max(max_abs_diff(&alg.mul(&ab, &e(c)), &alg.mul(&e(a), &bc)));
            }
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sections: Vec<Vec<C64>> = ls.z_indices.iter().map(|&k| e(k)).collect();
    for _ in 0..4 {
        let coeffs = random_vector(&mut rng, ls.z_indices.len());
        let mut f = vec![ZERO; n];
        for (c, &k) in coeffs.iter().zip(&ls.z_indices) {
            f[k] = *c;
        }
        sections.push(f);
    }
    let left_margin = positivity_margin(alg, &ls.left_corner, &ls.p_indices, &sections, true);
    let right_margin = positivity_margin(alg, &ls.right_corner, &ls.q_indices, &sections, false);

    let mut cert = MoritaCertificate {
        scenario: scenario.to_string(),
        left: CornerSummary {
            dimension: ls.left_corner.dim(),
            fullness_rank: left_rank,
            positivity_margin: left_margin,
            structure: star_structure_report(&ls.left_corner, tol, seed),
        },
        right: CornerSummary {
            dimension: ls.right_corner.dim(),
            fullness_rank: right_rank,
            positivity_margin: right_margin,
            structure: star_structure_report(&ls.right_corner, tol, seed),
        },
        exchange_residual: exchange,
        linking_dimension: n,
        linking_valid: ls.report.is_ok(),
        identifications: Vec::new(),
        seed,
        tol,
        verdict: Verdict::NotCertified,
    };
    cert.recompute_verdict();
    cert
}
