//! The acceptance suite: eleven numbered criteria exercising factorization,
//! splitting, cocycles, lifts, the free-group lemma, disk checking, word
//! reduction, and weight combinatorics at fixed seeds and tolerances. Shared
//! by the `selftest` subcommand and the acceptance test target.

use std::f64::consts::TAU;
use std::time::Instant;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::cocycles::{
    self, affine_cocycle_modes, affine_cocycle_quadrature, coboundary, compare_sl2_sections,
    verify_psl2n_lift, virasoro_cocycle_modes, virasoro_cocycle_quadrature, LinearFunctional,
    VectorField,
};
use crate::diffeo::{self, CircleDiffeo};
use crate::geometry::{build_partition_of_unity, uniform_cover, Interval};
use crate::linalg::{su_basis, CMat};
use crate::loops::{self, Group, LieLoop, Loop};
use crate::weights::{self, DynkinDiagram};
use crate::words::{
    self, evaluate, free_equal, permute_with_conjugators, reduce_relation, verify_derivation,
    vk_replay, vk_verify, CyclicOracle, DiffeoOracle, GroupOracle, LocalizedOracle, LoopOracle,
    PermOracle, Presentation, TriangulatedDisk, Word,
};

#[derive(Debug, Clone, Serialize)]
pub struct CriterionReport {
    pub id: usize,
    pub name: String,
    pub pass: bool,
    pub detail: String,
    pub millis: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SelfTestReport {
    pub seed: u64,
    pub all_pass: bool,
    pub criteria: Vec<CriterionReport>,
}

pub const CRITERIA: [(usize, &str); 11] = [
    (1, "diffeo factorization over a 5-interval cover"),
    (2, "circle split contract"),
    (3, "loop factorization and factor commutativity"),
    (4, "Virasoro cocycle values and identities"),
    (5, "coboundary reconciliation of the two cocycle forms"),
    (6, "affine cocycle paths and locality"),
    (7, "psl(2) lift closure and section comparison"),
    (8, "free-group permutation lemma"),
    (9, "disk checker and mutation rejection"),
    (10, "end-to-end word reduction"),
    (11, "weight counts and rank-2 subdiagrams"),
];

fn rng_for(seed: u64, id: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed.wrapping_mul(1000).wrapping_add(id as u64))
}

/// Random circle diffeomorphism from a short sine series, displacement below
/// `max_disp` and strictly monotone.
fn random_diffeo(rng: &mut ChaCha8Rng, n: usize, max_disp: f64) -> CircleDiffeo {
    let modes = 5;
    let mut amp: Vec<f64> = (0..modes).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let phase: Vec<f64> = (0..modes).map(|_| rng.gen_range(0.0..TAU)).collect();
    let total: f64 = amp.iter().map(|a| a.abs()).sum();
    let target = rng.gen_range(0.2..0.95) * max_disp;
    for a in &mut amp {
        *a *= target / total;
    }
    CircleDiffeo::from_fn(n, |t| {
        let mut v = t;
        for k in 0..modes {
            v += amp[k] * ((k + 1) as f64 * t + phase[k]).sin();
        }
        v
    })
    .unwrap()
}

/// Random anti-Hermitian traceless matrix with entries of the given scale.
fn random_algebra_element(rng: &mut ChaCha8Rng, size: usize, scale: f64) -> CMat {
    let basis = su_basis(size);
    let mut m = CMat::zeros(size, size);
    for b in &basis {
        m += b * Complex64::new(rng.gen_range(-scale..scale), 0.0);
    }
    m
}

/// Random chart-domain loop: exponential of a low-frequency algebra path.
fn random_chart_loop(rng: &mut ChaCha8Rng, group: Group, n: usize, scale: f64) -> Loop {
    let size = group.matrix_size();
    let x1 = random_algebra_element(rng, size, scale);
    let x2 = random_algebra_element(rng, size, scale);
    let x3 = random_algebra_element(rng, size, scale);
    let values: Vec<CMat> = (0..n)
        .map(|k| {
            let t = TAU * k as f64 / n as f64;
            &x1 * Complex64::new(t.sin(), 0.0)
                + &x2 * Complex64::new(t.cos() - 1.0, 0.0)
                + &x3 * Complex64::new((2.0 * t).sin(), 0.0)
        })
        .collect();
    LieLoop::new(group, values).unwrap().exp().unwrap()
}

fn check(ok: bool, label: &str, failures: &mut Vec<String>) {
    if !ok {
        failures.push(label.to_string());
    }
}

fn finish(id: usize, start: Instant, failures: Vec<String>, detail: String) -> CriterionReport {
    let millis = start.elapsed().as_millis() as u64;
    let pass = failures.is_empty();
    let detail = if pass {
        detail
    } else {
        format!("{detail}; FAILED: {}", failures.join(", "))
    };
    CriterionReport {
        id,
        name: CRITERIA[id - 1].1.to_string(),
        pass,
        detail,
        millis,
    }
}

// --- criterion 1 -----------------------------------------------------------

fn criterion_1(seed: u64) -> CriterionReport {
    let start = Instant::now();
    let mut failures = Vec::new();
    let mut rng = rng_for(seed, 1);
    let d = 0.1;
    let cover = uniform_cover(5, d).unwrap();
    let oracle = DiffeoOracle {
        tol: 1e-8,
        u_displacement: d,
    };
    let n = 4096;
    let mut max_err = 0.0f64;
    let mut max_disp = 0.0f64;
    for case in 0..1000 {
        let phi = random_diffeo(&mut rng, n, d);
        let factors = match diffeo::factor_over_cover(&phi, &cover) {
            Ok(f) => f,
            Err(e) => {
                failures.push(format!("case {case}: {e}"));
                continue;
            }
        };
        let recon = diffeo::compose_all(&factors, factors[0].n_samples()).unwrap();
        let err = recon.sup_distance(&phi);
        max_err = max_err.max(err);
        if err >= 1e-8 {
            failures.push(format!("case {case}: reconstruction error {err}"));
        }
        for (j, f) in factors.iter().enumerate() {
            max_disp = max_disp.max(f.displacement());
            if !(f.displacement() < d) {
                failures.push(format!("case {case}: factor {j} displacement"));
            }
            if !oracle
                .supported_in(f, &cover.intervals[j], 1e-9)
                .unwrap_or(false)
            {
                failures.push(format!("case {case}: factor {j} support"));
            }
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    check(elapsed < 30.0, "runtime exceeded 30 s", &mut failures);
    finish(
        1,
        start,
        failures,
        format!(
            "1000 diffeos, max reconstruction error {max_err:.3e}, max factor displacement \
             {max_disp:.4}, {elapsed:.1} s"
        ),
    )
}

// --- criterion 2 -----------------------------------------------------------

fn criterion_2(seed: u64) -> CriterionReport {
    let start = Instant::now();
    let mut failures = Vec::new();
    let mut rng = rng_for(seed, 2);
    let d = 0.1;
    let n = 8192;
    let i_minus = Interval::new(5.5, 3.2).unwrap();
    let i_plus =
        Interval::new(crate::geometry::wrap_angle(5.5 + 3.2 - 2.0 * d), TAU - 3.2 + 4.0 * d)
            .unwrap();
    let oracle = DiffeoOracle {
        tol: 1e-8,
        u_displacement: d,
    };
    let mut max_err = 0.0f64;
    for case in 0..1000 {
        let phi = random_diffeo(&mut rng, n, d);
        let (minus, plus) = match diffeo::split_circle(&phi, &i_minus, &i_plus, d) {
            Ok(p) => p,
            Err(e) => {
                failures.push(format!("case {case}: {e}"));
                continue;
            }
        };
        let err = diffeo::compose(&minus, &plus).unwrap().sup_distance(&phi);
        max_err = max_err.max(err);
        if err >= 1e-8 {
            failures.push(format!("case {case}: product error {err}"));
        }
        if !(minus.displacement() < d && plus.displacement() < d) {
            failures.push(format!("case {case}: factor displacement"));
        }
        if !oracle.supported_in(&minus, &i_minus, 1e-8).unwrap_or(false)
            || !oracle.supported_in(&plus, &i_plus, 1e-8).unwrap_or(false)
        {
            failures.push(format!("case {case}: support"));
        }
    }
    // identity input returns identities exactly
    let id = CircleDiffeo::identity(n);
    match diffeo::split_circle(&id, &i_minus, &i_plus, d) {
        Ok((m, p)) => check(
            m.displacement() == 0.0 && p.displacement() == 0.0,
            "identity does not split into exact identities",
            &mut failures,
        ),
        Err(e) => failures.push(format!("identity split: {e}")),
    }
    finish(
        2,
        start,
        failures,
        format!("1000 splits, max product error {max_err:.3e}"),
    )
}

// --- criterion 3 -----------------------------------------------------------

fn criterion_3(seed: u64) -> CriterionReport {
    let start = Instant::now();
    let mut failures = Vec::new();
    let mut rng = rng_for(seed, 3);
    let cover = uniform_cover(5, 0.15).unwrap();
    let pu = build_partition_of_unity(&cover).unwrap();
    let n = 1024;
    let mut max_err = 0.0f64;
    let mut max_comm = 0.0f64;
    for case in 0..500 {
        let group = if case % 2 == 0 { Group::SU(2) } else { Group::SU(3) };
        let gamma = random_chart_loop(&mut rng, group, n, 0.25);
        let factors = match loops::factor_over_cover(&gamma, &cover, &pu) {
            Ok(f) => f,
            Err(e) => {
                failures.push(format!("case {case}: {e}"));
                continue;
            }
        };
        let recon = loops::multiply_all(&factors).unwrap();
        let err = recon.sup_distance(&gamma).unwrap_or(f64::INFINITY);
        max_err = max_err.max(err);
        if err >= 1e-10 {
            failures.push(format!("case {case}: reconstruction error {err}"));
        }
        for a in 0..factors.len() {
            for b in a + 1..factors.len() {
                let ab = loops::multiply(&factors[a], &factors[b]).unwrap();
                let ba = loops::multiply(&factors[b], &factors[a]).unwrap();
                let comm = ab.sup_distance(&ba).unwrap_or(f64::INFINITY);
                max_comm = max_comm.max(comm);
                if comm >= 1e-12 {
                    failures.push(format!("case {case}: factors {a},{b} do not commute"));
                }
            }
        }
    }
    finish(
        3,
        start,
        failures,
        format!(
            "500 loops, max reconstruction error {max_err:.3e}, max commutator {max_comm:.3e}"
        ),
    )
}

// --- criterion 4 -----------------------------------------------------------

fn rat(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

fn random_field(rng: &mut ChaCha8Rng, max_mode: i64) -> VectorField<Complex64> {
    let mut f = VectorField::zero();
    for _ in 0..4 {
        let m = rng.gen_range(-max_mode..=max_mode);
        f.add_mode(
            m,
            Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
        );
    }
    f
}

fn criterion_4(seed: u64) -> CriterionReport {
    let start = Instant::now();
    let mut failures = Vec::new();
    let mut rng = rng_for(seed, 4);
    // mode formula vs quadrature on all basis pairs
    let mut max_gap = 0.0f64;
    for m in -16i64..=16 {
        for n in -16i64..=16 {
            let f = VectorField::<Complex64>::basis(m);
            let g = VectorField::<Complex64>::basis(n);
            let q = virasoro_cocycle_quadrature(&f, &g, 256).unwrap();
            let gap = (q - virasoro_cocycle_modes(&f, &g)).norm();
            max_gap = max_gap.max(gap);
            if gap >= 1e-10 {
                failures.push(format!("basis pair ({m},{n}) gap {gap}"));
            }
        }
    }
    // exact rational values
    let val = |m: i64| {
        virasoro_cocycle_modes(
            &VectorField::<BigRational>::basis(m),
            &VectorField::<BigRational>::basis(-m),
        )
    };
    check(val(2) == rat(1, 2), "omega(l_2, l_-2) != 1/2", &mut failures);
    check(val(3) == rat(2, 1), "omega(l_3, l_-3) != 2", &mut failures);
    // exact vanishing on the sl(2) span
    for m in -1i64..=1 {
        for n in -1i64..=1 {
            let v = virasoro_cocycle_modes(
                &VectorField::<BigRational>::basis(m),
                &VectorField::<BigRational>::basis(n),
            );
            check(
                v == rat(0, 1),
                &format!("omega(l_{m}, l_{n}) != 0"),
                &mut failures,
            );
        }
    }
    // cocycle identity on random triples
    let mut max_res = 0.0f64;
    for case in 0..1000 {
        let f = random_field(&mut rng, 8);
        let g = random_field(&mut rng, 8);
        let h = random_field(&mut rng, 8);
        let res = virasoro_cocycle_modes(&cocycles::witt_bracket(&f, &g), &h)
            + virasoro_cocycle_modes(&cocycles::witt_bracket(&g, &h), &f)
            + virasoro_cocycle_modes(&cocycles::witt_bracket(&h, &f), &g);
        max_res = max_res.max(res.norm());
        if res.norm() >= 1e-10 {
            failures.push(format!("triple {case}: residual {}", res.norm()));
        }
    }
    finish(
        4,
        start,
        failures,
        format!("max mode/quadrature gap {max_gap:.3e}, max identity residual {max_res:.3e}"),
    )
}

// --- criterion 5 -----------------------------------------------------------

fn criterion_5(seed: u64) -> CriterionReport {
    let start = Instant::now();
    let mut failures = Vec::new();
    let _ = seed;
    let lambda = LinearFunctional::from_values([(0i64, rat(-1, 24))]);
    for m in -32i64..=32 {
        let f = VectorField::<BigRational>::basis(m);
        let g = VectorField::<BigRational>::basis(-m);
        let shifted = virasoro_cocycle_modes(&f, &g) - coboundary(&lambda, &f, &g);
        check(
            shifted == rat(m * m * m, 12),
            &format!("m = {m}: shifted cocycle != m^3/12"),
            &mut failures,
        );
    }
    finish(
        5,
        start,
        failures,
        "both normalizations agree up to the lambda(l_0) = -1/24 coboundary, |m| <= 32".into(),
    )
}

// --- criterion 6 -----------------------------------------------------------

fn random_lie_loop(rng: &mut ChaCha8Rng, n: usize, max_mode: usize) -> LieLoop {
    let x = random_algebra_element(rng, 2, 0.6);
    let y = random_algebra_element(rng, 2, 0.6);
    let m = rng.gen_range(1..=max_mode) as f64;
    let values: Vec<CMat> = (0..n)
        .map(|k| {
            let t = TAU * k as f64 / n as f64;
            &x * Complex64::new((m * t).cos(), 0.0) + &y * Complex64::new((m * t).sin(), 0.0)
        })
        .collect();
    LieLoop::new(Group::SU(2), values).unwrap()
}

fn criterion_6(seed: u64) -> CriterionReport {
    let start = Instant::now();
    let mut failures = Vec::new();
    let mut rng = rng_for(seed, 6);
    let n = 512;
    let mut max_gap = 0.0f64;
    let mut max_anti = 0.0f64;
    for case in 0..50 {
        let f = random_lie_loop(&mut rng, n, 6);
        let g = random_lie_loop(&mut rng, n, 6);
        let q = affine_cocycle_quadrature(&f, &g).unwrap();
        let m = affine_cocycle_modes(&f, &g).unwrap();
        let gap = (q - m).norm();
        max_gap = max_gap.max(gap);
        if gap >= 1e-10 {
            failures.push(format!("case {case}: path gap {gap}"));
        }
        let anti = (affine_cocycle_quadrature(&g, &f).unwrap() + q).norm();
        max_anti = max_anti.max(anti);
        if anti >= 1e-10 {
            failures.push(format!("case {case}: antisymmetry {anti}"));
        }
    }
    // vanishing on disjointly supported pairs
    let x = words::su2_sigma_z();
    let bump_loop = |iv: Interval| {
        let values: Vec<CMat> = (0..1024)
            .map(|k| {
                let t = TAU * k as f64 / 1024.0;
                let u = crate::geometry::angle_diff(t, iv.midpoint()) / (0.5 * iv.length);
                &x * Complex64::new(crate::geometry::bump(u), 0.0)
            })
            .collect();
        LieLoop::new(Group::SU(2), values).unwrap()
    };
    let f = bump_loop(Interval::new(0.2, 2.0).unwrap());
    let g = bump_loop(Interval::new(3.3, 2.0).unwrap());
    let v = affine_cocycle_quadrature(&f, &g).unwrap().norm();
    check(v < 1e-12, "disjoint supports do not vanish", &mut failures);
    // cocycle identity with the pointwise commutator bracket
    let bracket = |a: &LieLoop, b: &LieLoop| {
        let values: Vec<CMat> = (0..a.n_samples())
            .map(|k| a.value(k) * b.value(k) - b.value(k) * a.value(k))
            .collect();
        LieLoop::new(Group::SU(2), values).unwrap()
    };
    let mut max_res = 0.0f64;
    for case in 0..20 {
        let f = random_lie_loop(&mut rng, n, 4);
        let g = random_lie_loop(&mut rng, n, 4);
        let h = random_lie_loop(&mut rng, n, 4);
        let res = (affine_cocycle_quadrature(&bracket(&f, &g), &h).unwrap()
            + affine_cocycle_quadrature(&bracket(&g, &h), &f).unwrap()
            + affine_cocycle_quadrature(&bracket(&h, &f), &g).unwrap())
        .norm();
        max_res = max_res.max(res);
        if res >= 1e-10 {
            failures.push(format!("triple {case}: residual {res}"));
        }
    }
    finish(
        6,
        start,
        failures,
        format!(
            "max path gap {max_gap:.3e}, max antisymmetry defect {max_anti:.3e}, max identity \
             residual {max_res:.3e}, disjoint value {v:.3e}"
        ),
    )
}

// --- criterion 7 -----------------------------------------------------------

fn criterion_7(seed: u64) -> CriterionReport {
    let start = Instant::now();
    let mut failures = Vec::new();
    let _ = seed;
    for n in 1i64..=6 {
        match verify_psl2n_lift(n) {
            Ok(report) => check(report.closed, &format!("lift n = {n} not closed"), &mut failures),
            Err(e) => failures.push(format!("lift n = {n}: {e}")),
        }
    }
    for n in 1i64..=6 {
        for m in n + 1..=6 {
            match compare_sl2_sections(n, m) {
                Ok(cmp) => check(
                    cmp.distinct,
                    &format!("sections {n} and {m} not distinct"),
                    &mut failures,
                ),
                Err(e) => failures.push(format!("sections {n},{m}: {e}")),
            }
        }
    }
    finish(
        7,
        start,
        failures,
        "lifts close for n = 1..6; central l_0 components pairwise distinct".into(),
    )
}

// --- criterion 8 -----------------------------------------------------------

fn criterion_8(seed: u64) -> CriterionReport {
    let start = Instant::now();
    let mut failures = Vec::new();
    let mut rng = rng_for(seed, 8);
    for case in 0..500 {
        let n = rng.gen_range(1..=8usize);
        let word = Word::from_letters((0..n).map(|g| (g, 1i8)).collect());
        let mut sigma: Vec<usize> = (0..n).collect();
        sigma.shuffle(&mut rng);
        match permute_with_conjugators(&word, &sigma) {
            Ok((conjugators, expanded)) => {
                if !free_equal(&expanded.letters, &word.letters) {
                    failures.push(format!("case {case}: not freely equal"));
                }
                if !conjugators.iter().all(|c| c.is_positive_distinct()) {
                    failures.push(format!("case {case}: occurrence bound violated"));
                }
            }
            Err(e) => failures.push(format!("case {case}: {e}")),
        }
    }
    finish(
        8,
        start,
        failures,
        "500 permutations, n <= 8, exact free-group equality".into(),
    )
}

// --- criterion 9 -----------------------------------------------------------

/// Fan-triangulated polygon disk over arbitrary vertex labels.
fn fan_disk<E: Clone>(vertices: Vec<E>) -> TriangulatedDisk<E> {
    let m = vertices.len();
    let mut edges: Vec<(usize, usize)> = (0..m - 1).map(|i| (i, i + 1)).collect();
    edges.push((m - 1, 0));
    for j in 2..m - 1 {
        edges.push((0, j));
    }
    let faces: Vec<[usize; 3]> = (1..m - 1).map(|j| [0, j, j + 1]).collect();
    TriangulatedDisk {
        vertices,
        edges,
        faces,
        boundary: (0..m).collect(),
    }
}

fn mutate_and_replay<O: GroupOracle>(
    disk: &TriangulatedDisk<O::Elem>,
    oracle: &O,
    deriv: &mut words::VkDerivation,
    rng: &mut ChaCha8Rng,
) -> bool {
    let s = rng.gen_range(0..deriv.steps.len());
    let n_edges = disk.edges.len();
    let old = deriv.steps[s].relator[1].0;
    deriv.steps[s].relator[1].0 = (old + 1 + rng.gen_range(0..n_edges - 1)) % n_edges;
    vk_replay(disk, oracle, deriv).is_err()
}

fn criterion_9(seed: u64) -> CriterionReport {
    let start = Instant::now();
    let mut failures = Vec::new();
    let mut rng = rng_for(seed, 9);
    for case in 0..50 {
        let m = rng.gen_range(4..=9usize);
        if case % 2 == 0 {
            let modulus = rng.gen_range(5..=40i64);
            let oracle = CyclicOracle::new(modulus);
            let mut vertices: Vec<i64> = (0..m).map(|_| rng.gen_range(0..modulus)).collect();
            vertices[0] = 0;
            let disk = fan_disk(vertices);
            match vk_verify(&disk, &oracle) {
                Ok(mut deriv) => {
                    if vk_replay(&disk, &oracle, &deriv).is_err() {
                        failures.push(format!("case {case}: replay failed"));
                    }
                    if !mutate_and_replay(&disk, &oracle, &mut deriv, &mut rng) {
                        failures.push(format!("case {case}: mutation accepted"));
                    }
                }
                Err(e) => failures.push(format!("case {case}: {e}")),
            }
        } else {
            let degree = rng.gen_range(3..=6usize);
            let oracle = PermOracle { degree };
            let vertices: Vec<Vec<usize>> = (0..m)
                .map(|i| {
                    let mut p: Vec<usize> = (0..degree).collect();
                    if i > 0 {
                        p.shuffle(&mut rng);
                    }
                    p
                })
                .collect();
            let disk = fan_disk(vertices);
            match vk_verify(&disk, &oracle) {
                Ok(mut deriv) => {
                    if vk_replay(&disk, &oracle, &deriv).is_err() {
                        failures.push(format!("case {case}: replay failed"));
                    }
                    if !mutate_and_replay(&disk, &oracle, &mut deriv, &mut rng) {
                        failures.push(format!("case {case}: mutation accepted"));
                    }
                }
                Err(e) => failures.push(format!("case {case}: {e}")),
            }
        }
    }
    finish(
        9,
        start,
        failures,
        "50 disks over cyclic and symmetric oracles; 50 mutations rejected".into(),
    )
}

// --- criterion 10 ----------------------------------------------------------

/// Scramble a positive word by adjacent swaps of letters whose cover
/// intervals are cyclically at distance >= 2; the evaluation is unchanged.
fn disjoint_scramble(
    letters: &mut [(usize, i8)],
    owner: &[usize],
    n_intervals: usize,
    rng: &mut ChaCha8Rng,
    tries: usize,
) {
    for _ in 0..tries {
        let at = rng.gen_range(0..letters.len() - 1);
        let ia = owner[letters[at].0] as i64;
        let ib = owner[letters[at + 1].0] as i64;
        let gap = (ia - ib).abs().min(n_intervals as i64 - (ia - ib).abs());
        if gap >= 2 {
            letters.swap(at, at + 1);
        }
    }
}

fn loop_reduction_case(rng: &mut ChaCha8Rng) -> std::result::Result<(), String> {
    let cover = uniform_cover(5, 0.15).unwrap();
    let pu = build_partition_of_unity(&cover).unwrap();
    let mut ctx = Presentation::new(LoopOracle { tol: 1e-8 }, cover, 1e-10, 1e-8)
        .map_err(|e| e.to_string())?;
    let gamma = random_chart_loop(rng, Group::SU(2), 256, 0.2);
    let mut letters = Vec::new();
    let mut owner = Vec::new();
    for g in [&gamma, &loops::invert(&gamma)] {
        let factors = loops::factor_over_cover(g, &ctx.cover, &pu).map_err(|e| e.to_string())?;
        for (i, f) in factors.into_iter().enumerate() {
            let id = ctx.add_cover_generator(f, i).map_err(|e| e.to_string())?;
            letters.push((id, 1i8));
            owner.push(i);
        }
    }
    disjoint_scramble(&mut letters, &owner, 5, rng, 30);
    let word = Word::from_letters(letters);
    let out = reduce_relation(&mut ctx, &word).map_err(|e| e.to_string())?;
    if !out.complete || !out.derivation.final_word().is_empty() {
        return Err(format!("incomplete: {:?}", out.diagnostic));
    }
    verify_derivation(&ctx, &out.derivation).map_err(|e| e.to_string())
}

fn diffeo_reduction_case(rng: &mut ChaCha8Rng) -> std::result::Result<(), String> {
    let mut cover = uniform_cover(5, 0.1).unwrap();
    cover.strong_separation = true;
    let mut ctx = Presentation::new(
        DiffeoOracle {
            tol: 1e-5,
            u_displacement: 0.1,
        },
        cover,
        1e-8,
        1e-5,
    )
    .map_err(|e| e.to_string())?;
    let phi = random_diffeo(rng, 1024, 0.05);
    let psi = diffeo::invert(&phi).map_err(|e| e.to_string())?;
    let mut letters = Vec::new();
    let mut owner = Vec::new();
    for f in [&phi, &psi] {
        let factors = diffeo::factor_over_cover(f, &ctx.cover).map_err(|e| e.to_string())?;
        for (i, fac) in factors.into_iter().enumerate() {
            let id = ctx.add_cover_generator(fac, i).map_err(|e| e.to_string())?;
            letters.push((id, 1i8));
            owner.push(i);
        }
    }
    disjoint_scramble(&mut letters, &owner, 5, rng, 20);
    let word = Word::from_letters(letters);
    let out = reduce_relation(&mut ctx, &word).map_err(|e| e.to_string())?;
    if !out.complete || !out.derivation.final_word().is_empty() {
        return Err(format!("incomplete: {:?}", out.diagnostic));
    }
    verify_derivation(&ctx, &out.derivation).map_err(|e| e.to_string())
}

fn criterion_10(seed: u64) -> CriterionReport {
    let start = Instant::now();
    let mut failures = Vec::new();
    let mut rng = rng_for(seed, 10);
    for case in 0..100 {
        let result = if case % 10 == 0 {
            diffeo_reduction_case(&mut rng)
        } else {
            loop_reduction_case(&mut rng)
        };
        if let Err(e) = result {
            failures.push(format!("identity case {case}: {e}"));
        }
    }
    // non-identity words are never reduced to empty
    let cover = uniform_cover(5, 0.15).unwrap();
    let pu = build_partition_of_unity(&cover).unwrap();
    let mut ctx = Presentation::new(LoopOracle { tol: 1e-8 }, cover, 1e-10, 1e-8).unwrap();
    let gamma = random_chart_loop(&mut rng, Group::SU(2), 256, 0.25);
    let factors = loops::factor_over_cover(&gamma, &ctx.cover, &pu).unwrap();
    let gens: Vec<usize> = factors
        .into_iter()
        .enumerate()
        .map(|(i, f)| ctx.add_cover_generator(f, i).unwrap())
        .collect();
    for case in 0..100 {
        let mut ids = gens.clone();
        ids.shuffle(&mut rng);
        let take = rng.gen_range(1..=ids.len());
        let word = Word::from_letters(ids[..take].iter().map(|&g| (g, 1i8)).collect());
        let value = evaluate(&ctx, &word).unwrap();
        if ctx.oracle.is_identity(&value).unwrap() {
            continue; // not a usable probe
        }
        match reduce_relation(&mut ctx, &word) {
            Err(_) => {}
            Ok(out) => {
                if out.complete && out.derivation.final_word().is_empty() {
                    failures.push(format!("non-identity case {case}: claimed empty"));
                }
            }
        }
    }
    finish(
        10,
        start,
        failures,
        "100 scrambled factorization words reduced; 100 non-identity words rejected".into(),
    )
}

// --- criterion 11 ----------------------------------------------------------

fn criterion_11(seed: u64) -> CriterionReport {
    let start = Instant::now();
    let mut failures = Vec::new();
    let _ = seed;
    for k in 0..=10i64 {
        let su2 = weights::enumerate_level_k_highest_weights("su2", k).unwrap();
        // brute-force oracle
        let brute2 = (0..=k).filter(|m| *m <= k).count();
        check(
            su2.len() == brute2 && su2.len() as i64 == k + 1,
            &format!("su2 level {k} count"),
            &mut failures,
        );
        let su3 = weights::enumerate_level_k_highest_weights("su3", k).unwrap();
        let mut brute3 = 0usize;
        for m1 in 0..=k {
            for m2 in 0..=k {
                if m1 + m2 <= k {
                    brute3 += 1;
                }
            }
        }
        check(
            su3.len() == brute3 && su3.len() as i64 == (k + 1) * (k + 2) / 2,
            &format!("su3 level {k} count"),
            &mut failures,
        );
    }
    for diagram in DynkinDiagram::affine_catalog() {
        let report = weights::rank2_subdiagram_check(&diagram).unwrap();
        let expect_pass = diagram.name != "A~1";
        check(
            report.pass == expect_pass,
            &format!("rank-2 check on {}", diagram.name),
            &mut failures,
        );
    }
    finish(
        11,
        start,
        failures,
        "|A_k| counts match brute force; only A~1 fails the rank-2 check".into(),
    )
}

// ---------------------------------------------------------------------------

pub fn run_criterion(id: usize, seed: u64) -> CriterionReport {
    match id {
        1 => criterion_1(seed),
        2 => criterion_2(seed),
        3 => criterion_3(seed),
        4 => criterion_4(seed),
        5 => criterion_5(seed),
        6 => criterion_6(seed),
        7 => criterion_7(seed),
        8 => criterion_8(seed),
        9 => criterion_9(seed),
        10 => criterion_10(seed),
        11 => criterion_11(seed),
        _ => CriterionReport {
            id,
            name: "unknown".into(),
            pass: false,
            detail: format!("no criterion {id}"),
            millis: 0,
        },
    }
}

pub fn run(seed: u64) -> SelfTestReport {
    let criteria: Vec<CriterionReport> = (1..=11).map(|id| run_criterion(id, seed)).collect();
    let all_pass = criteria.iter().all(|c| c.pass);
    SelfTestReport {
        seed,
        all_pass,
        criteria,
    }
}

