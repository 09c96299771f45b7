//! Dynkin diagram and weight lattice combinatorics: rank-2 subdiagram
//! classification of affine diagrams, level-k dominant weight enumeration for
//! su(n), and the affine Weyl action on energy-extended weights with its
//! paraboloid bound.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeSet, VecDeque};

use crate::error::{Error, Result};

/// A Dynkin diagram presented by its (generalized) Cartan matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DynkinDiagram {
    pub name: String,
    cartan: Vec<Vec<i64>>,
    pub affine: bool,
}

fn det_rational(m: &[Vec<i64>]) -> BigRational {
    // fraction-free enough for the tiny matrices here: plain elimination
    // over rationals
    let n = m.len();
    let mut a: Vec<Vec<BigRational>> = m
        .iter()
        .map(|row| row.iter().map(|&v| BigRational::from(BigInt::from(v))).collect())
        .collect();
    let mut det = BigRational::from(BigInt::from(1));
    for col in 0..n {
        let pivot = (col..n).find(|&r| !a[r][col].is_zero());
        let Some(p) = pivot else {
            return BigRational::zero();
        };
        if p != col {
            a.swap(p, col);
            det = -det;
        }
        let pv = a[col][col].clone();
        det *= pv.clone();
        for r in col + 1..n {
            let f = a[r][col].clone() / pv.clone();
            for c in col..n {
                let sub = f.clone() * a[col][c].clone();
                a[r][c] -= sub;
            }
        }
    }
    det
}

impl DynkinDiagram {
    pub fn new(name: impl Into<String>, cartan: Vec<Vec<i64>>, affine: bool) -> Result<Self> {
        let name = name.into();
        let n = cartan.len();
        if n == 0 {
            return Err(Error::Precondition(format!("{name}: empty Cartan matrix")));
        }
        for (i, row) in cartan.iter().enumerate() {
            if row.len() != n {
                return Err(Error::Precondition(format!("{name}: Cartan matrix not square")));
            }
            for (j, &v) in row.iter().enumerate() {
                if i == j && v != 2 {
                    return Err(Error::Precondition(format!(
                        "{name}: diagonal entry ({i},{i}) is {v}, expected 2"
                    )));
                }
                if i != j && v > 0 {
                    return Err(Error::Precondition(format!(
                        "{name}: off-diagonal entry ({i},{j}) is positive"
                    )));
                }
                if i != j && (v == 0) != (cartan[j][i] == 0) {
                    return Err(Error::Precondition(format!(
                        "{name}: zero pattern not symmetric at ({i},{j})"
                    )));
                }
            }
        }
        let det = det_rational(&cartan);
        if affine {
            if !det.is_zero() {
                return Err(Error::Precondition(format!(
                    "{name}: affine Cartan matrix must be singular, det = {det}"
                )));
            }
            if n > 1 {
                // corank exactly 1: deleting the affine node leaves a
                // nonsingular matrix
                let minor: Vec<Vec<i64>> = cartan[1..]
                    .iter()
                    .map(|row| row[1..].to_vec())
                    .collect();
                if det_rational(&minor).is_zero() {
                    return Err(Error::Precondition(format!(
                        "{name}: affine Cartan matrix has corank greater than 1"
                    )));
                }
            }
        } else if det.is_zero() {
            return Err(Error::Precondition(format!(
                "{name}: finite-type Cartan matrix must be nonsingular"
            )));
        }
        Ok(DynkinDiagram { name, cartan, affine })
    }

    pub fn rank(&self) -> usize {
        self.cartan.len()
    }

    pub fn cartan(&self) -> &[Vec<i64>] {
        &self.cartan
    }

    /// A_{n} for n >= 1 (the finite series; su(n+1)).
    pub fn finite_a(n: usize) -> Self {
        let mut c = vec![vec![0i64; n]; n];
        for i in 0..n {
            c[i][i] = 2;
            if i + 1 < n {
                c[i][i + 1] = -1;
                c[i + 1][i] = -1;
            }
        }
        DynkinDiagram::new(format!("A{n}"), c, false).unwrap()
    }

    /// Extended diagram of su(n+1); node 0 is the affine node.
    pub fn affine_a(n: usize) -> Self {
        assert!(n >= 1);
        if n == 1 {
            return DynkinDiagram::new("A~1", vec![vec![2, -2], vec![-2, 2]], true).unwrap();
        }
        let m = n + 1;
        let mut c = vec![vec![0i64; m]; m];
        for i in 0..m {
            c[i][i] = 2;
            let j = (i + 1) % m;
            c[i][j] = -1;
            c[j][i] = -1;
        }
        DynkinDiagram::new(format!("A~{n}"), c, true).unwrap()
    }

    pub fn affine_b(n: usize) -> Self {
        assert!(n >= 3);
        let m = n + 1;
        let mut c = vec![vec![0i64; m]; m];
        for (i, row) in c.iter_mut().enumerate() {
            row[i] = 2;
        }
        let mut link = |i: usize, j: usize, a: i64, b: i64| {
            c[i][j] = a;
            c[j][i] = b;
        };
        link(0, 2, -1, -1);
        link(1, 2, -1, -1);
        for i in 2..n - 1 {
            link(i, i + 1, -1, -1);
        }
        link(n - 1, n, -2, -1);
        DynkinDiagram::new(format!("B~{n}"), c, true).unwrap()
    }

    pub fn affine_c(n: usize) -> Self {
        assert!(n >= 2);
        let m = n + 1;
        let mut c = vec![vec![0i64; m]; m];
        for (i, row) in c.iter_mut().enumerate() {
            row[i] = 2;
        }
        c[0][1] = -2;
        c[1][0] = -1;
        for i in 1..n - 1 {
            c[i][i + 1] = -1;
            c[i + 1][i] = -1;
        }
        c[n][n - 1] = -2;
        c[n - 1][n] = -1;
        DynkinDiagram::new(format!("C~{n}"), c, true).unwrap()
    }

    pub fn affine_d(n: usize) -> Self {
        assert!(n >= 4);
        let m = n + 1;
        let mut c = vec![vec![0i64; m]; m];
        for (i, row) in c.iter_mut().enumerate() {
            row[i] = 2;
        }
        let mut link = |i: usize, j: usize| {
            c[i][j] = -1;
            c[j][i] = -1;
        };
        link(0, 2);
        link(1, 2);
        for i in 2..n - 2 {
            link(i, i + 1);
        }
        link(n - 2, n - 1);
        link(n - 2, n);
        DynkinDiagram::new(format!("D~{n}"), c, true).unwrap()
    }

    fn from_edges(name: &str, m: usize, edges: &[(usize, usize, i64, i64)], affine: bool) -> Self {
        let mut c = vec![vec![0i64; m]; m];
        for (i, row) in c.iter_mut().enumerate() {
            row[i] = 2;
        }
        for &(i, j, a, b) in edges {
            c[i][j] = a;
            c[j][i] = b;
        }
        DynkinDiagram::new(name, c, affine).unwrap()
    }

    pub fn affine_e6() -> Self {
        // chain 1-3-4-5-6, node 2 on 4, affine node 0 on 2
        Self::from_edges(
            "E~6",
            7,
            &[
                (1, 3, -1, -1),
                (3, 4, -1, -1),
                (4, 5, -1, -1),
                (5, 6, -1, -1),
                (2, 4, -1, -1),
                (0, 2, -1, -1),
            ],
            true,
        )
    }

    pub fn affine_e7() -> Self {
        Self::from_edges(
            "E~7",
            8,
            &[
                (0, 1, -1, -1),
                (1, 3, -1, -1),
                (3, 4, -1, -1),
                (4, 5, -1, -1),
                (5, 6, -1, -1),
                (6, 7, -1, -1),
                (2, 4, -1, -1),
            ],
            true,
        )
    }

    pub fn affine_e8() -> Self {
        Self::from_edges(
            "E~8",
            9,
            &[
                (1, 3, -1, -1),
                (3, 4, -1, -1),
                (4, 5, -1, -1),
                (5, 6, -1, -1),
                (6, 7, -1, -1),
                (7, 8, -1, -1),
                (2, 4, -1, -1),
                (0, 8, -1, -1),
            ],
            true,
        )
    }

    pub fn affine_f4() -> Self {
        Self::from_edges(
            "F~4",
            5,
            &[
                (0, 1, -1, -1),
                (1, 2, -1, -1),
                (2, 3, -2, -1),
                (3, 4, -1, -1),
            ],
            true,
        )
    }

    pub fn affine_g2() -> Self {
        Self::from_edges("G~2", 3, &[(0, 1, -1, -1), (1, 2, -3, -1)], true)
    }

    /// All built-in affine diagrams of rank >= 2 plus A~1, smallest members
    /// of each series.
    pub fn affine_catalog() -> Vec<DynkinDiagram> {
        vec![
            Self::affine_a(1),
            Self::affine_a(2),
            Self::affine_a(3),
            Self::affine_a(5),
            Self::affine_b(3),
            Self::affine_b(4),
            Self::affine_c(2),
            Self::affine_c(3),
            Self::affine_d(4),
            Self::affine_d(5),
            Self::affine_e6(),
            Self::affine_e7(),
            Self::affine_e8(),
            Self::affine_f4(),
            Self::affine_g2(),
        ]
    }
}

/// Finite type of a rank-2 induced subdiagram, or the affine failure case.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Rank2Type {
    A1xA1,
    A2,
    B2,
    G2,
    NotFinite,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Rank2Report {
    pub diagram: String,
    pub pairs: Vec<(usize, usize, Rank2Type)>,
    pub pass: bool,
}

/// Classify every 2-node induced subdiagram by the product a_ij * a_ji;
/// the diagram passes iff all are of finite type.
pub fn rank2_subdiagram_check(d: &DynkinDiagram) -> Result<Rank2Report> {
    if !d.affine {
        return Err(Error::Precondition(format!(
            "{}: rank-2 subdiagram check applies to affine diagrams",
            d.name
        )));
    }
    let n = d.rank();
    let mut pairs = Vec::new();
    let mut pass = true;
    for i in 0..n {
        for j in i + 1..n {
            let p = d.cartan[i][j] * d.cartan[j][i];
            let ty = match p {
                0 => Rank2Type::A1xA1,
                1 => Rank2Type::A2,
                2 => Rank2Type::B2,
                3 => Rank2Type::G2,
                _ => Rank2Type::NotFinite,
            };
            pass &= ty != Rank2Type::NotFinite;
            pairs.push((i, j, ty));
        }
    }
    Ok(Rank2Report {
        diagram: d.name.clone(),
        pairs,
        pass,
    })
}

/// A weight in fundamental-weight coordinates.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Weight {
    pub coords: Vec<i64>,
}

impl Weight {
    pub fn new(coords: Vec<i64>) -> Self {
        Weight { coords }
    }

    pub fn zero(rank: usize) -> Self {
        Weight {
            coords: vec![0; rank],
        }
    }

    pub fn is_dominant(&self) -> bool {
        self.coords.iter().all(|&c| c >= 0)
    }
}

/// A level-k affine weight: energy coordinate plus finite part.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct AffineWeight {
    pub energy: i64,
    pub finite: Weight,
}

impl AffineWeight {
    pub fn new(energy: i64, finite: Weight) -> Self {
        AffineWeight { energy, finite }
    }
}

/// Drop the energy coordinate.
pub fn project_pi(w: &AffineWeight) -> Weight {
    w.finite.clone()
}

/// Parse an su(n) descriptor ("su2", "su(3)", "SU(4)") into its rank n-1.
pub fn parse_su_rank(desc: &str) -> Result<usize> {
    let lower = desc.to_ascii_lowercase();
    let digits = lower
        .strip_prefix("su")
        .map(|rest| rest.trim_start_matches('(').trim_end_matches(')'))
        .and_then(|s| s.parse::<usize>().ok());
    match digits {
        Some(n) if n >= 2 => Ok(n - 1),
        _ => Err(Error::UnsupportedGroup(desc.to_string())),
    }
}

/// Level of a weight of su(rank+1): the pairing with the highest coroot,
/// which for the A series is the sum of the fundamental coordinates.
pub fn level_of(w: &Weight) -> i64 {
    w.coords.iter().sum()
}

fn enumerate_rec(rank: usize, budget: i64, prefix: &mut Vec<i64>, out: &mut Vec<Weight>) {
    if prefix.len() == rank {
        out.push(Weight::new(prefix.clone()));
        return;
    }
    for v in 0..=budget {
        prefix.push(v);
        enumerate_rec(rank, budget - v, prefix, out);
        prefix.pop();
    }
}

/// The finite set A_k: dominant integral weights with level at most k.
pub fn enumerate_level_k_highest_weights(group: &str, k: i64) -> Result<Vec<Weight>> {
    let rank = parse_su_rank(group)?;
    if k < 0 {
        return Err(Error::Precondition(format!("level k = {k} must be nonnegative")));
    }
    let mut out = Vec::new();
    enumerate_rec(rank, k, &mut Vec::new(), &mut out);
    out.sort();
    Ok(out)
}

fn cartan_a(rank: usize) -> Vec<Vec<i64>> {
    DynkinDiagram::finite_a(rank).cartan.clone()
}

/// (omega_i, omega_j) for A_rank: min(i,j)(rank+1-max(i,j))/(rank+1),
/// 1-based, in the normalization (alpha, alpha) = 2.
fn weight_gram(rank: usize, i: usize, j: usize) -> BigRational {
    let n = rank as i64 + 1;
    let (a, b) = ((i + 1).min(j + 1) as i64, (i + 1).max(j + 1) as i64);
    BigRational::new(BigInt::from(a * (n - b)), BigInt::from(n))
}

/// Squared norm of a weight of su(rank+1).
pub fn norm_sq(w: &Weight) -> BigRational {
    let rank = w.coords.len();
    let mut acc = BigRational::zero();
    for i in 0..rank {
        for j in 0..rank {
            acc += weight_gram(rank, i, j)
                * BigRational::from(BigInt::from(w.coords[i] * w.coords[j]));
        }
    }
    acc
}

/// Simple reflection s_i, acting on the finite part only.
pub fn reflect(w: &AffineWeight, i: usize) -> AffineWeight {
    let rank = w.finite.coords.len();
    let cartan = cartan_a(rank);
    let mi = w.finite.coords[i];
    let coords = (0..rank)
        .map(|j| w.finite.coords[j] - mi * cartan[i][j])
        .collect();
    AffineWeight::new(w.energy, Weight::new(coords))
}

/// Translation by +-k alpha_i (the k-scaled simple coroot, identified with
/// the root in the simply laced normalization). Preserves
/// energy - |finite|^2 / (2k).
pub fn translate(w: &AffineWeight, k: i64, i: usize, sign: i64) -> AffineWeight {
    let rank = w.finite.coords.len();
    let cartan = cartan_a(rank);
    let coords: Vec<i64> = (0..rank)
        .map(|j| w.finite.coords[j] + sign * k * cartan[i][j])
        .collect();
    // E' = E + (lambda, mu) + k (mu, mu)/2 with mu = sign * alpha_i
    let energy = w.energy + sign * w.finite.coords[i] + k;
    AffineWeight::new(energy, Weight::new(coords))
}

/// The conserved quantity of the level-k affine Weyl action.
pub fn weyl_invariant(w: &AffineWeight, k: i64) -> BigRational {
    BigRational::from(BigInt::from(w.energy))
        - norm_sq(&w.finite) / BigRational::from(BigInt::from(2 * k))
}

/// The paraboloid constant: C = max over A_k of |lambda|^2 / (2k).
pub fn paraboloid_constant(group: &str, k: i64) -> Result<BigRational> {
    if k < 1 {
        return Err(Error::Precondition(format!("level k = {k} must be at least 1")));
    }
    let weights = enumerate_level_k_highest_weights(group, k)?;
    let two_k = BigRational::from(BigInt::from(2 * k));
    Ok(weights
        .iter()
        .map(|w| norm_sq(w) / two_k.clone())
        .max()
        .unwrap())
}

#[derive(Debug, Clone)]
pub struct OrbitReport {
    pub points: Vec<AffineWeight>,
    pub constant: BigRational,
    /// every orbit point satisfies energy >= |finite|^2/(2k) - C
    pub paraboloid_ok: bool,
}

/// Orbit of a weight under the affine Weyl generators (simple reflections
/// and translations by +-k alpha_i) up to the given word length, with the
/// paraboloid containment check.
pub fn affine_weyl_orbit(w: &AffineWeight, group: &str, k: i64, depth: usize) -> Result<OrbitReport> {
    let rank = parse_su_rank(group)?;
    if w.finite.coords.len() != rank {
        return Err(Error::GridMismatch(w.finite.coords.len(), rank));
    }
    if k < 1 {
        return Err(Error::Precondition(format!("level k = {k} must be at least 1")));
    }
    let mut seen: BTreeSet<AffineWeight> = BTreeSet::new();
    let mut queue = VecDeque::new();
    seen.insert(w.clone());
    queue.push_back((w.clone(), 0usize));
    while let Some((cur, len)) = queue.pop_front() {
        if len == depth {
            continue;
        }
        let mut nexts = Vec::new();
        for i in 0..rank {
            nexts.push(reflect(&cur, i));
            nexts.push(translate(&cur, k, i, 1));
            nexts.push(translate(&cur, k, i, -1));
        }
        for nx in nexts {
            if seen.insert(nx.clone()) {
                queue.push_back((nx, len + 1));
            }
        }
    }
    let constant = paraboloid_constant(group, k)?;
    let two_k = BigRational::from(BigInt::from(2 * k));
    let paraboloid_ok = seen.iter().all(|p| {
        BigRational::from(BigInt::from(p.energy))
            >= norm_sq(&p.finite) / two_k.clone() - constant.clone()
    });
    Ok(OrbitReport {
        points: seen.into_iter().collect(),
        constant,
        paraboloid_ok,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn catalog_validates() {
        let cat = DynkinDiagram::affine_catalog();
        assert_eq!(cat.len(), 15);
        for d in &cat {
            assert!(d.affine);
            assert!(det_rational(d.cartan()).is_zero(), "{}", d.name);
        }
        for n in 1..=6 {
            let d = DynkinDiagram::finite_a(n);
            assert!(!det_rational(d.cartan()).is_zero());
        }
    }

    #[test]
    fn malformed_cartan_rejected() {
        assert!(DynkinDiagram::new("bad", vec![vec![1]], false).is_err());
        assert!(DynkinDiagram::new("bad", vec![vec![2, 1], vec![-1, 2]], false).is_err());
        assert!(DynkinDiagram::new("bad", vec![vec![2, 0], vec![-1, 2]], false).is_err());
        // wrong affine flag
        assert!(DynkinDiagram::new("bad", vec![vec![2, -1], vec![-1, 2]], true).is_err());
        assert!(DynkinDiagram::new("bad", vec![vec![2, -2], vec![-2, 2]], false).is_err());
    }

    #[test]
    fn rank2_fails_exactly_for_a1_affine() {
        for d in DynkinDiagram::affine_catalog() {
            let report = rank2_subdiagram_check(&d).unwrap();
            if d.name == "A~1" {
                assert!(!report.pass);
                assert_eq!(report.pairs, vec![(0, 1, Rank2Type::NotFinite)]);
            } else {
                assert!(report.pass, "{}", d.name);
            }
        }
        assert!(rank2_subdiagram_check(&DynkinDiagram::finite_a(3)).is_err());
    }

    #[test]
    fn rank2_classification_details() {
        // A~2: 3-cycle, every pair is A2
        let report = rank2_subdiagram_check(&DynkinDiagram::affine_a(2)).unwrap();
        assert!(report.pairs.iter().all(|&(_, _, t)| t == Rank2Type::A2));
        // A~3: adjacent pairs A2, opposite pairs disconnected
        let report = rank2_subdiagram_check(&DynkinDiagram::affine_a(3)).unwrap();
        let a2 = report.pairs.iter().filter(|&&(_, _, t)| t == Rank2Type::A2).count();
        let disc = report.pairs.iter().filter(|&&(_, _, t)| t == Rank2Type::A1xA1).count();
        assert_eq!((a2, disc), (4, 2));
        // G~2 has exactly one G2 pair
        let report = rank2_subdiagram_check(&DynkinDiagram::affine_g2()).unwrap();
        let g2 = report.pairs.iter().filter(|&&(_, _, t)| t == Rank2Type::G2).count();
        assert_eq!(g2, 1);
        // C~2 has two B2 pairs
        let report = rank2_subdiagram_check(&DynkinDiagram::affine_c(2)).unwrap();
        let b2 = report.pairs.iter().filter(|&&(_, _, t)| t == Rank2Type::B2).count();
        assert_eq!(b2, 2);
    }

    #[test]
    fn level_k_weight_counts() {
        for k in 0..=10i64 {
            let su2 = enumerate_level_k_highest_weights("su2", k).unwrap();
            assert_eq!(su2.len() as i64, k + 1);
            let su3 = enumerate_level_k_highest_weights("su3", k).unwrap();
            assert_eq!(su3.len() as i64, (k + 1) * (k + 2) / 2);
        }
        // independent oracle: box enumeration with the level constraint
        for k in 0..=6i64 {
            let got = enumerate_level_k_highest_weights("su4", k).unwrap();
            let mut brute = Vec::new();
            for a in 0..=k {
                for b in 0..=k {
                    for c in 0..=k {
                        let w = Weight::new(vec![a, b, c]);
                        if w.is_dominant() && level_of(&w) <= k {
                            brute.push(w);
                        }
                    }
                }
            }
            brute.sort();
            assert_eq!(got, brute);
        }
    }

    #[test]
    fn level_zero_is_trivial() {
        for g in ["su2", "su3", "su4", "su5"] {
            let weights = enumerate_level_k_highest_weights(g, 0).unwrap();
            assert_eq!(weights.len(), 1);
            assert_eq!(level_of(&weights[0]), 0);
            assert!(weights[0].coords.iter().all(|&c| c == 0));
        }
        assert!(enumerate_level_k_highest_weights("so5", 1).is_err());
        assert!(enumerate_level_k_highest_weights("su2", -1).is_err());
    }

    #[test]
    fn su2_example_weights() {
        let su2 = enumerate_level_k_highest_weights("su2", 2).unwrap();
        assert_eq!(
            su2,
            vec![Weight::new(vec![0]), Weight::new(vec![1]), Weight::new(vec![2])]
        );
        let su3 = enumerate_level_k_highest_weights("su3", 1).unwrap();
        assert_eq!(
            su3,
            vec![
                Weight::new(vec![0, 0]),
                Weight::new(vec![0, 1]),
                Weight::new(vec![1, 0])
            ]
        );
    }

    #[test]
    fn reflections_are_involutions_with_braid_relations() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for rank in 1..=4usize {
            for _ in 0..20 {
                let w = AffineWeight::new(
                    rng.gen_range(-3..8),
                    Weight::new((0..rank).map(|_| rng.gen_range(-5..6)).collect()),
                );
                for i in 0..rank {
                    assert_eq!(reflect(&reflect(&w, i), i), w);
                }
                // braid: (s_i s_j)^3 = id for adjacent, (s_i s_j)^2 = id
                // for disconnected pairs in the A series
                for i in 0..rank {
                    for j in i + 1..rank {
                        let order = if j == i + 1 { 3 } else { 2 };
                        let mut cur = w.clone();
                        for _ in 0..order {
                            cur = reflect(&reflect(&cur, i), j);
                        }
                        assert_eq!(cur, w, "rank {rank} pair ({i},{j})");
                    }
                }
            }
        }
    }

    #[test]
    fn translation_invariant_and_quadratic_growth() {
        // su(2), k=1, start (0, omega): iterated translation gives
        // E = m + m^2 at finite coordinate 1 + 2m
        let k = 1;
        let mut w = AffineWeight::new(0, Weight::new(vec![1]));
        let inv = weyl_invariant(&w, k);
        for m in 1..=5i64 {
            w = translate(&w, k, 0, 1);
            assert_eq!(w.finite.coords, vec![1 + 2 * m]);
            assert_eq!(w.energy, m + m * m);
            assert_eq!(weyl_invariant(&w, k), inv);
        }
        // translation round trip
        let w0 = AffineWeight::new(2, Weight::new(vec![3, -1]));
        let back = translate(&translate(&w0, 2, 1, 1), 2, 1, -1);
        assert_eq!(back, w0);
    }

    #[test]
    fn orbit_contains_start_and_respects_paraboloid() {
        let w = AffineWeight::new(0, Weight::new(vec![0]));
        let report = affine_weyl_orbit(&w, "su2", 1, 1).unwrap();
        assert!(report.points.contains(&w));
        assert!(report.paraboloid_ok);

        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..5 {
            let k = rng.gen_range(1..4);
            let coords: Vec<i64> = (0..2).map(|_| rng.gen_range(0..=k)).collect();
            let coords = if level_of(&Weight::new(coords.clone())) > k {
                vec![0, 0]
            } else {
                coords
            };
            let w = AffineWeight::new(0, Weight::new(coords));
            let report = affine_weyl_orbit(&w, "su3", k, 3).unwrap();
            assert!(report.paraboloid_ok, "k={k} w={w:?}");
            // energies grow: the orbit leaves any bounded energy window
            let max_e = report.points.iter().map(|p| p.energy).max().unwrap();
            assert!(max_e >= k, "orbit should reach energy at least k");
        }
    }

    #[test]
    fn projection_examples() {
        let lam = Weight::new(vec![2, 1]);
        let w = AffineWeight::new(3, lam.clone());
        assert_eq!(project_pi(&w), lam);
        assert_eq!(project_pi(&AffineWeight::new(0, Weight::zero(2))), Weight::zero(2));
        // pi intertwines translation with the finite-part shift formula
        let t = translate(&w, 2, 0, 1);
        let cartan = cartan_a(2);
        let expect: Vec<i64> = (0..2).map(|j| lam.coords[j] + 2 * cartan[0][j]).collect();
        assert_eq!(project_pi(&t).coords, expect);
    }

    #[test]
    fn paraboloid_constant_values() {
        // su2: |m omega|^2 = m^2/2, C = max_{m<=k} m^2/(4k) = k/4
        for k in 1..=5i64 {
            let c = paraboloid_constant("su2", k).unwrap();
            assert_eq!(c, BigRational::new(BigInt::from(k), BigInt::from(4)));
        }
    }
}
