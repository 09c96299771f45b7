//! Word calculus for interval-supported presentations: generators with
//! support certificates, certified rewrite steps, the permutation-conjugator
//! lemma in free groups, a van Kampen disk checker, and the structured
//! relation reduction pipeline (permute, conjugate, group per interval,
//! split supports, telescope).

use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::geometry::{flat_step, validate_cover, wrap_angle, Cover, Interval};
use crate::linalg::CMat;
use crate::loops::{self, LieLoop, Loop};
use crate::diffeo::{self, CircleDiffeo};

/// Containment slack when comparing certified intervals.
const LABEL_TOL: f64 = 1e-9;

// ---------------------------------------------------------------------------
// oracles

/// Group operations plus an identity test and a membership test for the
/// designated neighborhood U. Finite oracles are exact (tolerance 0);
/// numeric oracles compare in the sup metric.
pub trait GroupOracle {
    type Elem: Clone;

    fn identity(&self) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Result<Self::Elem>;
    fn inv(&self, a: &Self::Elem) -> Result<Self::Elem>;
    fn distance(&self, a: &Self::Elem, b: &Self::Elem) -> Result<f64>;
    fn tolerance(&self) -> f64;
    fn in_neighborhood(&self, a: &Self::Elem) -> bool;

    fn is_identity(&self, a: &Self::Elem) -> Result<bool> {
        Ok(self.distance(a, &self.identity())? <= self.tolerance())
    }
}

/// Oracles whose elements carry interval supports and admit the splitting
/// operations, enabling the localized rewrite steps.
pub trait LocalizedOracle: GroupOracle {
    fn support(&self, a: &Self::Elem, eps: f64) -> Result<Option<Interval>>;

    /// Is the element within eps of the identity outside the label? Checked
    /// pointwise, so disconnected supports inside the label are fine.
    fn supported_in(&self, a: &Self::Elem, label: &Interval, eps: f64) -> Result<bool>;

    /// a = minus * plus with plus supported counterclockwise of the
    /// transition up to the cut and minus supported on the other side.
    fn split(
        &self,
        a: &Self::Elem,
        transition_center: f64,
        cut: f64,
        d: f64,
    ) -> Result<(Self::Elem, Self::Elem)>;

    /// Whether conjugation can move supports (true for diffeomorphisms
    /// acting on the circle, false for pointwise-conjugated loops).
    fn conjugation_grows_support(&self) -> bool;

    /// Sup displacement, bounding how far one conjugation moves a support.
    fn displacement(&self, a: &Self::Elem) -> f64;

    /// Slack granted when checking support certificates against labels:
    /// certificates pad by whole grid cells, so containment is only
    /// meaningful up to a few cells.
    fn grid_slack(&self, a: &Self::Elem) -> f64;
}

/// Z/m, exact.
#[derive(Debug, Clone)]
pub struct CyclicOracle {
    pub modulus: i64,
    /// None: the whole group is the neighborhood.
    pub neighborhood: Option<Vec<i64>>,
}

impl CyclicOracle {
    pub fn new(modulus: i64) -> Self {
        CyclicOracle {
            modulus,
            neighborhood: None,
        }
    }
}

impl GroupOracle for CyclicOracle {
    type Elem = i64;

    fn identity(&self) -> i64 {
        0
    }

    fn mul(&self, a: &i64, b: &i64) -> Result<i64> {
        Ok((a + b).rem_euclid(self.modulus))
    }

    fn inv(&self, a: &i64) -> Result<i64> {
        Ok((-a).rem_euclid(self.modulus))
    }

    fn distance(&self, a: &i64, b: &i64) -> Result<f64> {
        Ok(if a == b { 0.0 } else { 1.0 })
    }

    fn tolerance(&self) -> f64 {
        0.0
    }

    fn in_neighborhood(&self, a: &i64) -> bool {
        match &self.neighborhood {
            None => true,
            Some(u) => u.contains(&a.rem_euclid(self.modulus)),
        }
    }
}

/// Symmetric group on 0..degree, exact; elements are images.
#[derive(Debug, Clone)]
pub struct PermOracle {
    pub degree: usize,
}

impl GroupOracle for PermOracle {
    type Elem = Vec<usize>;

    fn identity(&self) -> Vec<usize> {
        (0..self.degree).collect()
    }

    fn mul(&self, a: &Vec<usize>, b: &Vec<usize>) -> Result<Vec<usize>> {
        if a.len() != self.degree || b.len() != self.degree {
            return Err(Error::Precondition("permutation degree mismatch".into()));
        }
        // (a * b)(x) = a(b(x))
        Ok((0..self.degree).map(|x| a[b[x]]).collect())
    }

    fn inv(&self, a: &Vec<usize>) -> Result<Vec<usize>> {
        let mut out = vec![0; self.degree];
        for (x, &ax) in a.iter().enumerate() {
            out[ax] = x;
        }
        Ok(out)
    }

    fn distance(&self, a: &Vec<usize>, b: &Vec<usize>) -> Result<f64> {
        Ok(if a == b { 0.0 } else { 1.0 })
    }

    fn tolerance(&self) -> f64 {
        0.0
    }

    fn in_neighborhood(&self, _a: &Vec<usize>) -> bool {
        true
    }
}

/// Sampled loops into SU(n); U is the logarithm chart.
#[derive(Debug, Clone)]
pub struct LoopOracle {
    pub tol: f64,
}

fn is_constant_identity(a: &Loop) -> bool {
    (0..a.n_samples()).all(|k| a.distance_to_identity(k) == 0.0)
}

/// Rebuild a constant-identity operand on the other operand's grid so the
/// placeholder identity composes with loops sampled at any resolution.
fn reconcile(a: &Loop, b: &Loop) -> Result<(Loop, Loop)> {
    if a.group() == b.group() && a.n_samples() == b.n_samples() {
        return Ok((a.clone(), b.clone()));
    }
    if is_constant_identity(a) {
        return Ok((Loop::identity(b.group(), b.n_samples())?, b.clone()));
    }
    if is_constant_identity(b) {
        return Ok((a.clone(), Loop::identity(a.group(), a.n_samples())?));
    }
    Err(Error::GridMismatch(a.n_samples(), b.n_samples()))
}

impl GroupOracle for LoopOracle {
    type Elem = Loop;

    fn identity(&self) -> Loop {
        Loop::identity(loops::Group::SU(2), 16).unwrap()
    }

    fn mul(&self, a: &Loop, b: &Loop) -> Result<Loop> {
        let (a, b) = reconcile(a, b)?;
        loops::multiply(&a, &b)
    }

    fn inv(&self, a: &Loop) -> Result<Loop> {
        Ok(loops::invert(a))
    }

    fn distance(&self, a: &Loop, b: &Loop) -> Result<f64> {
        let (a, b) = reconcile(a, b)?;
        a.sup_distance(&b)
    }

    fn tolerance(&self) -> f64 {
        self.tol
    }

    fn in_neighborhood(&self, a: &Loop) -> bool {
        loops::log_chart(a).is_ok()
    }

    fn is_identity(&self, a: &Loop) -> Result<bool> {
        let d = (0..a.n_samples())
            .map(|k| a.distance_to_identity(k))
            .fold(0.0f64, f64::max);
        Ok(d <= self.tol)
    }
}

impl LocalizedOracle for LoopOracle {
    fn support(&self, a: &Loop, eps: f64) -> Result<Option<Interval>> {
        Ok(a.support(eps)?.interval)
    }

    fn supported_in(&self, a: &Loop, label: &Interval, eps: f64) -> Result<bool> {
        let padded = label.enlarged(self.grid_slack(a));
        Ok((0..a.n_samples())
            .all(|k| padded.contains(a.angle(k)) || a.distance_to_identity(k) <= eps))
    }

    fn split(&self, a: &Loop, transition_center: f64, cut: f64, d: f64) -> Result<(Loop, Loop)> {
        let l = loops::log_chart(a)?;
        let n = l.n_samples();
        let theta_c = wrap_angle(transition_center - cut);
        let weight = |t: f64| flat_step((wrap_angle(t - cut) - theta_c) / d);
        let mut minus = Vec::with_capacity(n);
        let mut plus = Vec::with_capacity(n);
        for k in 0..n {
            let t = TAU * k as f64 / n as f64;
            let w = weight(t);
            minus.push(l.value(k) * num_complex::Complex64::new(1.0 - w, 0.0));
            plus.push(l.value(k) * num_complex::Complex64::new(w, 0.0));
        }
        let g = a.group();
        Ok((
            LieLoop::new(g, minus)?.exp()?,
            LieLoop::new(g, plus)?.exp()?,
        ))
    }

    fn conjugation_grows_support(&self) -> bool {
        false
    }

    fn displacement(&self, _a: &Loop) -> f64 {
        0.0
    }

    fn grid_slack(&self, a: &Loop) -> f64 {
        3.0 * TAU / a.n_samples() as f64
    }
}

/// Sampled circle diffeomorphisms; U is a displacement ball.
#[derive(Debug, Clone)]
pub struct DiffeoOracle {
    pub tol: f64,
    pub u_displacement: f64,
}

impl GroupOracle for DiffeoOracle {
    type Elem = CircleDiffeo;

    fn identity(&self) -> CircleDiffeo {
        CircleDiffeo::identity(16)
    }

    fn mul(&self, a: &CircleDiffeo, b: &CircleDiffeo) -> Result<CircleDiffeo> {
        diffeo::compose(a, b)
    }

    fn inv(&self, a: &CircleDiffeo) -> Result<CircleDiffeo> {
        diffeo::invert(a)
    }

    fn distance(&self, a: &CircleDiffeo, b: &CircleDiffeo) -> Result<f64> {
        Ok(a.sup_distance(b))
    }

    fn tolerance(&self) -> f64 {
        self.tol
    }

    fn in_neighborhood(&self, a: &CircleDiffeo) -> bool {
        a.displacement() < self.u_displacement
    }

    fn is_identity(&self, a: &CircleDiffeo) -> Result<bool> {
        Ok(a.displacement() <= self.tol)
    }
}

impl LocalizedOracle for DiffeoOracle {
    fn support(&self, a: &CircleDiffeo, eps: f64) -> Result<Option<Interval>> {
        Ok(a.support(eps)?.interval)
    }

    fn supported_in(&self, a: &CircleDiffeo, label: &Interval, eps: f64) -> Result<bool> {
        let n = a.n_samples();
        let padded = label.enlarged(self.grid_slack(a));
        Ok(a.lift().iter().enumerate().all(|(k, v)| {
            let t = TAU * k as f64 / n as f64;
            padded.contains(t) || (v - t).abs() <= eps
        }))
    }

    fn split(
        &self,
        a: &CircleDiffeo,
        transition_center: f64,
        cut: f64,
        d: f64,
    ) -> Result<(CircleDiffeo, CircleDiffeo)> {
        diffeo::split_at_cut(a, transition_center, cut, d)
    }

    fn conjugation_grows_support(&self) -> bool {
        true
    }

    fn displacement(&self, a: &CircleDiffeo) -> f64 {
        a.displacement()
    }

    fn grid_slack(&self, a: &CircleDiffeo) -> f64 {
        3.0 * TAU / a.n_samples() as f64
    }
}

// ---------------------------------------------------------------------------
// presentation context, words, evaluation

/// A generator: an element handle plus its declared interval label. The
/// support certificate of the element is checked against the label on
/// insertion.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Generator {
    pub elem: usize,
    pub label: Interval,
    pub cover_index: Option<usize>,
}

/// Append-only element store plus generators, over a fixed cover.
pub struct Presentation<O: LocalizedOracle> {
    pub oracle: O,
    pub cover: Cover,
    elements: Vec<O::Elem>,
    gens: Vec<Generator>,
    /// support certificates are computed at this deviation threshold
    pub support_eps: f64,
    /// identity tolerance for derivation checking
    pub identity_tol: f64,
}

impl<O: LocalizedOracle> Presentation<O> {
    pub fn new(oracle: O, cover: Cover, support_eps: f64, identity_tol: f64) -> Result<Self> {
        let report = validate_cover(&cover)?;
        if !report.pass {
            return Err(Error::InvalidCover(format!("{report:?}")));
        }
        Ok(Presentation {
            oracle,
            cover,
            elements: Vec::new(),
            gens: Vec::new(),
            support_eps,
            identity_tol,
        })
    }

    pub fn n_generators(&self) -> usize {
        self.gens.len()
    }

    pub fn generator(&self, id: usize) -> Result<&Generator> {
        self.gens.get(id).ok_or(Error::DanglingId(id))
    }

    pub fn element(&self, id: usize) -> Result<&O::Elem> {
        self.elements.get(id).ok_or(Error::DanglingId(id))
    }

    pub fn element_of(&self, gen_id: usize) -> Result<&O::Elem> {
        self.element(self.generator(gen_id)?.elem)
    }

    /// Insert a generator, certifying support containment in the label.
    pub fn add_generator(
        &mut self,
        elem: O::Elem,
        label: Interval,
        cover_index: Option<usize>,
    ) -> Result<usize> {
        if !self.oracle.supported_in(&elem, &label, self.support_eps)? {
            return Err(Error::Precondition(format!(
                "element moves outside its declared label {label:?}"
            )));
        }
        self.elements.push(elem);
        self.gens.push(Generator {
            elem: self.elements.len() - 1,
            label,
            cover_index,
        });
        Ok(self.gens.len() - 1)
    }

    /// New generator for an element already in the store, under a possibly
    /// larger label.
    pub fn relabel_generator(
        &mut self,
        gen_id: usize,
        label: Interval,
        cover_index: Option<usize>,
    ) -> Result<usize> {
        let elem_id = self.generator(gen_id)?.elem;
        let elem = self.element(elem_id)?;
        if !self.oracle.supported_in(elem, &label, self.support_eps)? {
            return Err(Error::Precondition(format!(
                "element moves outside its declared label {label:?}"
            )));
        }
        self.gens.push(Generator {
            elem: elem_id,
            label,
            cover_index,
        });
        Ok(self.gens.len() - 1)
    }

    /// Insert a generator labeled by a cover interval.
    pub fn add_cover_generator(&mut self, elem: O::Elem, cover_index: usize) -> Result<usize> {
        let label = *self
            .cover
            .intervals
            .get(cover_index)
            .ok_or(Error::DanglingId(cover_index))?;
        self.add_generator(elem, label, Some(cover_index))
    }
}

/// A word: sequence of (generator id, exponent +-1).
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Word {
    pub letters: Vec<(usize, i8)>,
}

impl Word {
    pub fn empty() -> Self {
        Word::default()
    }

    pub fn from_letters(letters: Vec<(usize, i8)>) -> Self {
        Word { letters }
    }

    pub fn gen(id: usize) -> Self {
        Word {
            letters: vec![(id, 1)],
        }
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn inverse(&self) -> Word {
        Word {
            letters: self
                .letters
                .iter()
                .rev()
                .map(|&(g, e)| (g, -e))
                .collect(),
        }
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut letters = self.letters.clone();
        letters.extend_from_slice(&other.letters);
        Word { letters }
    }

    /// Positive word of pairwise distinct generators?
    pub fn is_positive_distinct(&self) -> bool {
        let mut seen = std::collections::BTreeSet::new();
        self.letters.iter().all(|&(g, e)| e == 1 && seen.insert(g))
    }
}

/// Free-group reduction: cancel adjacent inverse pairs.
pub fn free_reduce(letters: &[(usize, i8)]) -> Vec<(usize, i8)> {
    let mut stack: Vec<(usize, i8)> = Vec::with_capacity(letters.len());
    for &(g, e) in letters {
        if let Some(&(tg, te)) = stack.last() {
            if tg == g && te == -e {
                stack.pop();
                continue;
            }
        }
        stack.push((g, e));
    }
    stack
}

pub fn free_equal(a: &[(usize, i8)], b: &[(usize, i8)]) -> bool {
    free_reduce(a) == free_reduce(b)
}

/// Left-to-right product of the underlying elements. Runs of inverse letters
/// cost a single inversion.
pub fn evaluate<O: LocalizedOracle>(ctx: &Presentation<O>, word: &Word) -> Result<O::Elem> {
    let mut acc = ctx.oracle.identity();
    let mut i = 0;
    let letters = &word.letters;
    while i < letters.len() {
        if letters[i].1 == 1 {
            acc = ctx.oracle.mul(&acc, ctx.element_of(letters[i].0)?)?;
            i += 1;
        } else {
            // g_i^-1 g_{i+1}^-1 ... = (... g_{i+1} g_i)^-1
            let mut j = i;
            while j < letters.len() && letters[j].1 == -1 {
                j += 1;
            }
            let mut run = ctx.oracle.identity();
            for k in (i..j).rev() {
                run = ctx.oracle.mul(&run, ctx.element_of(letters[k].0)?)?;
            }
            acc = ctx.oracle.mul(&acc, &ctx.oracle.inv(&run)?)?;
            i = j;
        }
    }
    Ok(acc)
}

// ---------------------------------------------------------------------------
// rewrite steps

/// One certified rewrite move. Every variant's side conditions are checked
/// from support certificates and numeric evaluation when the step is applied.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum RewriteStep {
    /// cancel letters at, at+1 (same generator, opposite exponents)
    FreeReduce { at: usize },
    /// replace the word by prod_i w_i a_{sigma(i)} w_i^-1 (free-group valid)
    PermuteFree {
        sigma: Vec<usize>,
        conjugators: Vec<Word>,
    },
    /// relabel the generator at `at` to one with a larger interval
    IntervalInclusion { at: usize, new_gen: usize },
    /// merge letters at, at+1, both supported in the new generator's label
    MergeInInterval { at: usize, new_gen: usize },
    /// swap letters at, at+1 with disjoint support labels
    DisjointCommute { at: usize },
    /// collapse w g w^-1 (w of length conj_len starting at `at`) into new_gen
    ConjugationFormula {
        at: usize,
        conj_len: usize,
        new_gen: usize,
    },
    /// replace the positive letter at `at` by the product of `parts`
    SplitSupport { at: usize, parts: Vec<usize> },
    /// merge `count` letters starting at `at` into new_gen, or drop them
    /// entirely when their product is the identity (new_gen = None)
    TelescopeMerge {
        at: usize,
        count: usize,
        new_gen: Option<usize>,
    },
}

fn sub_word(word: &Word, at: usize, count: usize) -> Result<Word> {
    if at + count > word.len() {
        return Err(Error::RewriteBlocked(format!(
            "window {at}..{} out of bounds (len {})",
            at + count,
            word.len()
        )));
    }
    Ok(Word::from_letters(word.letters[at..at + count].to_vec()))
}

/// Support-growth bookkeeping for a conjugation: starting from the target's
/// label, each conjugator whose support meets the growing region can move it
/// by at most one displacement bound d; at most three such movers are
/// allowed, so the result is certified inside the label enlarged by 3d.
fn conjugation_region<O: LocalizedOracle>(
    ctx: &Presentation<O>,
    conjugator: &[(usize, i8)],
    target_label: Interval,
) -> Result<Interval> {
    if !ctx.oracle.conjugation_grows_support() {
        return Ok(target_label);
    }
    if !ctx.cover.strong_separation {
        return Err(Error::RewriteBlocked(
            "conjugation over diffeomorphisms needs a strongly separated cover".into(),
        ));
    }
    let d = ctx.cover.d;
    let mut region = target_label;
    let mut movers = 0usize;
    for &(id, _) in conjugator.iter().rev() {
        let g = ctx.generator(id)?;
        let disp = ctx.oracle.displacement(ctx.element(g.elem)?);
        if !(disp < d) {
            return Err(Error::RewriteBlocked(format!(
                "conjugator {id} has displacement {disp} >= d = {d}"
            )));
        }
        if g.label.distance(&region) <= 0.0 {
            movers += 1;
            if movers > 3 {
                return Err(Error::RewriteBlocked(
                    "more than three conjugators can move the support".into(),
                ));
            }
            region = region.enlarged(d);
        }
    }
    Ok(region)
}

/// Apply one step to a word, validating all side conditions. Returns the
/// rewritten word.
pub fn apply_step<O: LocalizedOracle>(
    ctx: &Presentation<O>,
    word: &Word,
    step: &RewriteStep,
) -> Result<Word> {
    let tol = ctx.identity_tol;
    match step {
        RewriteStep::FreeReduce { at } => {
            let w = sub_word(word, *at, 2)?;
            let (a, b) = (w.letters[0], w.letters[1]);
            if a.0 != b.0 || a.1 != -b.1 {
                return Err(Error::RewriteBlocked(format!(
                    "letters at {at} are not an inverse pair"
                )));
            }
            let mut out = word.clone();
            out.letters.drain(*at..at + 2);
            Ok(out)
        }
        RewriteStep::PermuteFree { sigma, conjugators } => {
            if !word.is_positive_distinct() {
                return Err(Error::RewriteBlocked(
                    "permutation step needs a positive word of distinct generators".into(),
                ));
            }
            let n = word.len();
            let mut hit = vec![false; n];
            for &s in sigma {
                if s >= n || hit[s] {
                    return Err(Error::RewriteBlocked(format!(
                        "sigma is not a permutation of 0..{n}"
                    )));
                }
                hit[s] = true;
            }
            if sigma.len() != n || conjugators.len() != n {
                return Err(Error::RewriteBlocked(
                    "permutation data has the wrong length".into(),
                ));
            }
            let mut expanded = Word::empty();
            for (i, w_i) in conjugators.iter().enumerate() {
                // occurrence bound: each generator at most once per w_i
                if !w_i.is_positive_distinct() {
                    return Err(Error::RewriteBlocked(format!(
                        "conjugator {i} repeats a generator"
                    )));
                }
                expanded = expanded.concat(w_i);
                expanded.letters.push(word.letters[sigma[i]]);
                expanded = expanded.concat(&w_i.inverse());
            }
            if !free_equal(&expanded.letters, &word.letters) {
                return Err(Error::RewriteBlocked(
                    "permuted form is not freely equal to the word".into(),
                ));
            }
            Ok(expanded)
        }
        RewriteStep::IntervalInclusion { at, new_gen } => {
            let w = sub_word(word, *at, 1)?;
            let old = ctx.generator(w.letters[0].0)?;
            let new = ctx.generator(*new_gen)?;
            if old.elem != new.elem {
                return Err(Error::RewriteBlocked(
                    "interval inclusion must keep the same element".into(),
                ));
            }
            if !new.label.contains_interval(&old.label, LABEL_TOL) {
                return Err(Error::RewriteBlocked(
                    "interval inclusion must enlarge the label".into(),
                ));
            }
            let mut out = word.clone();
            out.letters[*at].0 = *new_gen;
            Ok(out)
        }
        RewriteStep::MergeInInterval { at, new_gen } => {
            let w = sub_word(word, *at, 2)?;
            let new = ctx.generator(*new_gen)?;
            for &(g, _) in &w.letters {
                let lab = ctx.generator(g)?.label;
                if !new.label.contains_interval(&lab, LABEL_TOL) {
                    return Err(Error::RewriteBlocked(format!(
                        "merge target label does not contain the label of generator {g}"
                    )));
                }
            }
            let prod = evaluate(ctx, &w)?;
            let dist = ctx.oracle.distance(&prod, ctx.element(new.elem)?)?;
            if dist > tol {
                return Err(Error::RewriteBlocked(format!(
                    "merged element is off by {dist}"
                )));
            }
            let mut out = word.clone();
            out.letters.splice(*at..at + 2, [(*new_gen, 1)]);
            Ok(out)
        }
        RewriteStep::DisjointCommute { at } => {
            let w = sub_word(word, *at, 2)?;
            let la = ctx.generator(w.letters[0].0)?.label;
            let lb = ctx.generator(w.letters[1].0)?.label;
            if la.distance(&lb) <= 0.0 {
                return Err(Error::RewriteBlocked(
                    "labels are not disjoint, letters cannot commute".into(),
                ));
            }
            let mut out = word.clone();
            out.letters.swap(*at, at + 1);
            Ok(out)
        }
        RewriteStep::ConjugationFormula { at, conj_len, new_gen } => {
            let window = sub_word(word, *at, 2 * conj_len + 1)?;
            let conj = &window.letters[..*conj_len];
            let mid = window.letters[*conj_len];
            let tail = &window.letters[conj_len + 1..];
            for (k, &(g, e)) in tail.iter().enumerate() {
                let &(wg, we) = &conj[conj_len - 1 - k];
                if g != wg || e != -we {
                    return Err(Error::RewriteBlocked(
                        "window is not of the form w g w^-1".into(),
                    ));
                }
            }
            let target = ctx.generator(mid.0)?;
            let region = conjugation_region(ctx, conj, target.label)?;
            let new = ctx.generator(*new_gen)?;
            if !region.contains_interval(&new.label, LABEL_TOL) {
                return Err(Error::RewriteBlocked(
                    "conjugate's label exceeds the certified support region".into(),
                ));
            }
            let value = evaluate(ctx, &window)?;
            let dist = ctx.oracle.distance(&value, ctx.element(new.elem)?)?;
            if dist > tol {
                return Err(Error::RewriteBlocked(format!(
                    "conjugated element is off by {dist}"
                )));
            }
            let mut out = word.clone();
            out.letters.splice(*at..at + 2 * conj_len + 1, [(*new_gen, 1)]);
            Ok(out)
        }
        RewriteStep::SplitSupport { at, parts } => {
            let w = sub_word(word, *at, 1)?;
            if w.letters[0].1 != 1 {
                return Err(Error::RewriteBlocked(
                    "split applies to a positive letter".into(),
                ));
            }
            let old = ctx.generator(w.letters[0].0)?;
            let slack = old.label.enlarged(2.0 * ctx.cover.d + LABEL_TOL);
            let part_word = Word::from_letters(parts.iter().map(|&p| (p, 1)).collect());
            for &p in parts {
                let lab = ctx.generator(p)?.label;
                if !slack.contains_interval(&lab, LABEL_TOL) {
                    return Err(Error::RewriteBlocked(format!(
                        "split part {p} leaves the original support region"
                    )));
                }
            }
            let prod = evaluate(ctx, &part_word)?;
            let dist = ctx.oracle.distance(&prod, ctx.element(old.elem)?)?;
            if dist > tol {
                return Err(Error::RewriteBlocked(format!(
                    "split parts recompose with error {dist}"
                )));
            }
            let mut out = word.clone();
            out.letters.splice(*at..at + 1, part_word.letters);
            Ok(out)
        }
        RewriteStep::TelescopeMerge { at, count, new_gen } => {
            if *count == 0 {
                return Err(Error::RewriteBlocked("empty telescope window".into()));
            }
            let w = sub_word(word, *at, *count)?;
            let prod = evaluate(ctx, &w)?;
            let mut out = word.clone();
            match new_gen {
                Some(g) => {
                    let new = ctx.generator(*g)?;
                    let dist = ctx.oracle.distance(&prod, ctx.element(new.elem)?)?;
                    if dist > tol {
                        return Err(Error::RewriteBlocked(format!(
                            "telescoped element is off by {dist}"
                        )));
                    }
                    out.letters.splice(*at..at + count, [(*g, 1)]);
                }
                None => {
                    let dist = ctx.oracle.distance(&prod, &ctx.oracle.identity())?;
                    if dist > tol {
                        return Err(Error::RewriteBlocked(format!(
                            "window evaluates {dist} away from the identity"
                        )));
                    }
                    out.letters.drain(*at..at + count);
                }
            }
            Ok(out)
        }
    }
}

/// A derivation: initial word and the word after each validated step.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Derivation {
    pub initial: Word,
    pub steps: Vec<(RewriteStep, Word)>,
}

impl Derivation {
    pub fn final_word(&self) -> &Word {
        self.steps.last().map(|(_, w)| w).unwrap_or(&self.initial)
    }
}

/// Replay a derivation: every step must validate, reproduce the recorded
/// word, and leave the numeric evaluation constant.
pub fn verify_derivation<O: LocalizedOracle>(
    ctx: &Presentation<O>,
    derivation: &Derivation,
) -> Result<()> {
    let base = evaluate(ctx, &derivation.initial)?;
    let mut cur = derivation.initial.clone();
    for (i, (step, after)) in derivation.steps.iter().enumerate() {
        let next = apply_step(ctx, &cur, step).map_err(|e| Error::InvalidDerivation {
            step: i,
            reason: e.to_string(),
        })?;
        if &next != after {
            return Err(Error::InvalidDerivation {
                step: i,
                reason: "recorded word does not match the step's result".into(),
            });
        }
        let value = evaluate(ctx, &next)?;
        let drift = ctx.oracle.distance(&value, &base)?;
        if drift > ctx.identity_tol {
            return Err(Error::InvalidDerivation {
                step: i,
                reason: format!("evaluation drifted by {drift}"),
            });
        }
        cur = next;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// permutation-conjugator lemma

/// prod a_i = prod_i w_i a_{sigma(i)} w_i^-1 with w_1 = a_1 ... a_{sigma(1)-1}
/// and recursion on the word with a_{sigma(1)} deleted; each generator occurs
/// at most once in each w_i. Pure free-group construction.
pub fn permute_with_conjugators(word: &Word, sigma: &[usize]) -> Result<(Vec<Word>, Word)> {
    let n = word.len();
    if !word.is_positive_distinct() {
        return Err(Error::Precondition(
            "need a positive word of distinct generators".into(),
        ));
    }
    let mut hit = vec![false; n];
    for &s in sigma {
        if s >= n || hit[s] {
            return Err(Error::Precondition(format!(
                "sigma is not a permutation of 0..{n}"
            )));
        }
        hit[s] = true;
    }
    if sigma.len() != n {
        return Err(Error::Precondition("sigma has the wrong length".into()));
    }
    let mut remaining: Vec<usize> = word.letters.iter().map(|&(g, _)| g).collect();
    let mut conjugators = Vec::with_capacity(n);
    let mut expanded = Word::empty();
    for &s in sigma {
        let target = word.letters[s].0;
        let pos = remaining.iter().position(|&g| g == target).unwrap();
        let w_i = Word::from_letters(remaining[..pos].iter().map(|&g| (g, 1)).collect());
        expanded = expanded.concat(&w_i);
        expanded.letters.push((target, 1));
        expanded = expanded.concat(&w_i.inverse());
        conjugators.push(w_i);
        remaining.remove(pos);
    }
    debug_assert!(free_equal(&expanded.letters, &word.letters));
    Ok((conjugators, expanded))
}

// ---------------------------------------------------------------------------
// van Kampen disks

/// A triangulated disk with vertices labeled by oracle elements. An oriented
/// edge u -> v carries the ratio label x_u^-1 x_v, which must lie in U.
#[derive(Debug, Clone)]
pub struct TriangulatedDisk<E> {
    pub vertices: Vec<E>,
    pub edges: Vec<(usize, usize)>,
    /// faces as vertex triples, consistently oriented
    pub faces: Vec<[usize; 3]>,
    /// boundary vertex cycle
    pub boundary: Vec<usize>,
}

/// One peeled face: the boundary word equals conjugator * relator *
/// conjugator^-1 times the remaining word. Letters are (edge index, sign).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VkStep {
    pub face: usize,
    /// traversal sign of each stored edge of the face relator: one of the
    /// eight orientation patterns
    pub pattern: [i8; 3],
    pub conjugator: Vec<(usize, i8)>,
    pub relator: Vec<(usize, i8)>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VkDerivation {
    pub boundary_word: Vec<(usize, i8)>,
    pub steps: Vec<VkStep>,
}

struct DiskIndex {
    /// (u, v) -> (edge index, sign)
    by_pair: HashMap<(usize, usize), (usize, i8)>,
}

impl DiskIndex {
    fn new<E>(disk: &TriangulatedDisk<E>) -> Result<Self> {
        let mut by_pair = HashMap::new();
        for (i, &(u, v)) in disk.edges.iter().enumerate() {
            if u == v
                || u >= disk.vertices.len()
                || v >= disk.vertices.len()
                || by_pair.insert((u, v), (i, 1)).is_some()
                || by_pair.insert((v, u), (i, -1)).is_some()
            {
                return Err(Error::Precondition(format!("bad or duplicate edge {u}->{v}")));
            }
        }
        Ok(DiskIndex { by_pair })
    }

    fn letter(&self, u: usize, v: usize) -> Result<(usize, i8)> {
        self.by_pair
            .get(&(u, v))
            .copied()
            .ok_or_else(|| Error::Precondition(format!("no edge between {u} and {v}")))
    }
}

fn face_relator<E>(
    disk: &TriangulatedDisk<E>,
    index: &DiskIndex,
    f: usize,
) -> Result<([(usize, i8); 3], [i8; 3])> {
    let [a, b, c] = disk.faces[f];
    let l1 = index.letter(a, b)?;
    let l2 = index.letter(b, c)?;
    let l3 = index.letter(c, a)?;
    Ok(([l1, l2, l3], [l1.1, l2.1, l3.1]))
}

/// Value of an edge letter in the oracle.
fn letter_value<O: GroupOracle>(
    disk: &TriangulatedDisk<O::Elem>,
    oracle: &O,
    letter: (usize, i8),
) -> Result<O::Elem> {
    let (u, v) = disk.edges[letter.0];
    let ratio = oracle.mul(&oracle.inv(&disk.vertices[u])?, &disk.vertices[v])?;
    if letter.1 == 1 {
        Ok(ratio)
    } else {
        oracle.inv(&ratio)
    }
}

/// Check the disk invariants and express the boundary word as a product of
/// conjugates of face relators by peeling boundary faces.
pub fn vk_verify<O: GroupOracle>(
    disk: &TriangulatedDisk<O::Elem>,
    oracle: &O,
) -> Result<VkDerivation> {
    let index = DiskIndex::new(disk)?;
    // every edge ratio lies in U
    for (i, &(u, v)) in disk.edges.iter().enumerate() {
        let ratio = oracle.mul(&oracle.inv(&disk.vertices[u])?, &disk.vertices[v])?;
        if !oracle.in_neighborhood(&ratio) {
            return Err(Error::Precondition(format!(
                "edge {i} ({u}->{v}) has ratio outside the neighborhood"
            )));
        }
    }
    // boundary word
    let nb = disk.boundary.len();
    if nb < 3 {
        return Err(Error::Precondition("boundary cycle too short".into()));
    }
    let mut boundary_word = Vec::with_capacity(nb);
    for k in 0..nb {
        boundary_word.push(index.letter(disk.boundary[k], disk.boundary[(k + 1) % nb])?);
    }
    // edge -> remaining faces
    let mut edge_faces: HashMap<usize, Vec<usize>> = HashMap::new();
    for f in 0..disk.faces.len() {
        let (letters, _) = face_relator(disk, &index, f)?;
        for (e, _) in letters {
            edge_faces.entry(e).or_default().push(f);
        }
    }
    let mut remaining: Vec<bool> = vec![true; disk.faces.len()];
    let mut n_remaining = disk.faces.len();
    let mut word = free_reduce(&boundary_word);
    let mut steps = Vec::new();
    while n_remaining > 0 {
        // find a word position whose edge borders exactly one remaining face
        let found = word.iter().enumerate().find_map(|(p, &(e, s))| {
            let fs: Vec<usize> = edge_faces
                .get(&e)
                .map(|v| v.iter().copied().filter(|&f| remaining[f]).collect())
                .unwrap_or_default();
            if fs.len() == 1 {
                Some((p, s, fs[0]))
            } else {
                None
            }
        });
        let Some((p, s, f)) = found else {
            return Err(Error::Precondition(
                "disk peeling stuck: no boundary edge borders a unique face".into(),
            ));
        };
        let (letters, pattern) = face_relator(disk, &index, f)?;
        // rotate the relator (or its inverse) to start with the letter at p
        let e = word[p].0;
        let j = (0..3).find(|&j| letters[j].0 == e).unwrap();
        let relator: Vec<(usize, i8)> = if letters[j].1 == s {
            (0..3).map(|k| letters[(j + k) % 3]).collect()
        } else {
            // inverse relator, rotated to start with (e, s)
            let inv: Vec<(usize, i8)> = letters.iter().rev().map(|&(g, t)| (g, -t)).collect();
            let jj = (0..3).find(|&k| inv[k].0 == e).unwrap();
            (0..3).map(|k| inv[(jj + k) % 3]).collect()
        };
        debug_assert_eq!(relator[0], (e, s));
        let conjugator: Vec<(usize, i8)> = word[..p].to_vec();
        steps.push(VkStep {
            face: f,
            pattern,
            conjugator: conjugator.clone(),
            relator: relator.clone(),
        });
        // replace the letter by the rest of the relator, inverted
        let mut next = conjugator;
        next.extend(relator[1..].iter().rev().map(|&(g, t)| (g, -t)));
        next.extend_from_slice(&word[p + 1..]);
        word = free_reduce(&next);
        remaining[f] = false;
        n_remaining -= 1;
    }
    if !word.is_empty() {
        return Err(Error::Precondition(
            "all faces consumed but the boundary word did not close up".into(),
        ));
    }
    Ok(VkDerivation {
        boundary_word,
        steps,
    })
}

/// Replay a van Kampen derivation: each relator evaluates to the identity in
/// the oracle, and the concatenated conjugates freely reduce to the boundary
/// word.
pub fn vk_replay<O: GroupOracle>(
    disk: &TriangulatedDisk<O::Elem>,
    oracle: &O,
    derivation: &VkDerivation,
) -> Result<()> {
    let mut concat = Vec::new();
    for (i, step) in derivation.steps.iter().enumerate() {
        let mut value = oracle.identity();
        for &l in &step.relator {
            value = oracle.mul(&value, &letter_value(disk, oracle, l)?)?;
        }
        if !oracle.is_identity(&value)? {
            return Err(Error::InvalidDerivation {
                step: i,
                reason: format!("relator of face {} is not the identity", step.face),
            });
        }
        concat.extend_from_slice(&step.conjugator);
        concat.extend_from_slice(&step.relator);
        concat.extend(step.conjugator.iter().rev().map(|&(g, s)| (g, -s)));
    }
    if !free_equal(&concat, &derivation.boundary_word) {
        return Err(Error::InvalidDerivation {
            step: derivation.steps.len(),
            reason: "conjugated relators do not recompose the boundary word".into(),
        });
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// relation reduction pipeline

#[derive(Debug)]
pub struct ReduceOutcome {
    pub derivation: Derivation,
    pub complete: bool,
    pub diagnostic: Option<String>,
}

struct Reducer<'a, O: LocalizedOracle> {
    ctx: &'a mut Presentation<O>,
    derivation: Derivation,
    cur: Word,
}

impl<'a, O: LocalizedOracle> Reducer<'a, O> {
    fn push(&mut self, step: RewriteStep) -> Result<()> {
        let next = apply_step(self.ctx, &self.cur, &step)?;
        self.derivation.steps.push((step, next.clone()));
        self.cur = next;
        Ok(())
    }

    fn free_reduce_pass(&mut self) -> Result<()> {
        loop {
            let pos = self
                .cur
                .letters
                .windows(2)
                .position(|w| w[0].0 == w[1].0 && w[0].1 == -w[1].1);
            match pos {
                Some(at) => self.push(RewriteStep::FreeReduce { at })?,
                None => return Ok(()),
            }
        }
    }

    /// Greedy disjoint-commute sorting toward cancellations: swap adjacent
    /// disjoint letters whenever it enables a free reduction.
    fn commute_cancel_pass(&mut self) -> Result<()> {
        loop {
            self.free_reduce_pass()?;
            let n = self.cur.len();
            let mut progressed = false;
            'scan: for at in 0..n.saturating_sub(1) {
                let (a, b) = (self.cur.letters[at], self.cur.letters[at + 1]);
                let la = self.ctx.generator(a.0)?.label;
                let lb = self.ctx.generator(b.0)?.label;
                if la.distance(&lb) <= 0.0 {
                    continue;
                }
                // would the swap create a cancellation?
                let left_cancels = at > 0 && {
                    let p = self.cur.letters[at - 1];
                    p.0 == b.0 && p.1 == -b.1
                };
                let right_cancels = at + 2 < n && {
                    let q = self.cur.letters[at + 2];
                    q.0 == a.0 && q.1 == -a.1
                };
                if left_cancels || right_cancels {
                    self.push(RewriteStep::DisjointCommute { at })?;
                    progressed = true;
                    break 'scan;
                }
            }
            if !progressed {
                return Ok(());
            }
        }
    }

    fn cover_index_of(&self, gen: usize) -> Result<usize> {
        self.ctx
            .generator(gen)?
            .cover_index
            .ok_or_else(|| Error::RewriteBlocked(format!("generator {gen} has no cover label")))
    }
}

/// Reduce a word that evaluates to the identity, through the staged pipeline:
/// free reduction, disjoint commutes, permutation into cover order,
/// conjugate collapse, per-interval grouping, support splitting, and
/// telescoping. Returns a partial derivation plus diagnostic when a side
/// condition blocks a stage.
pub fn reduce_relation<O: LocalizedOracle>(
    ctx: &mut Presentation<O>,
    word: &Word,
) -> Result<ReduceOutcome> {
    let value = evaluate(ctx, word)?;
    let dist = ctx.oracle.distance(&value, &ctx.oracle.identity())?;
    if dist > ctx.identity_tol {
        return Err(Error::Precondition(format!(
            "word evaluates {dist} away from the identity"
        )));
    }
    let mut r = Reducer {
        derivation: Derivation {
            initial: word.clone(),
            steps: Vec::new(),
        },
        cur: word.clone(),
        ctx,
    };
    let blocked = |r: Reducer<O>, why: String| {
        Ok(ReduceOutcome {
            derivation: r.derivation,
            complete: false,
            diagnostic: Some(why),
        })
    };

    macro_rules! try_step {
        ($r:ident, $e:expr) => {
            if let Err(e) = $e {
                return blocked($r, e.to_string());
            }
        };
    }

    try_step!(r, r.commute_cancel_pass());
    if r.cur.is_empty() {
        return Ok(ReduceOutcome {
            derivation: r.derivation,
            complete: true,
            diagnostic: None,
        });
    }
    if !r.cur.is_positive_distinct() {
        return blocked(
            r,
            "word is not a positive word of distinct generators; only the structured \
             relation shapes are supported"
                .into(),
        );
    }

    // sort letters by cover interval (stable)
    let indices: Vec<usize> = match r
        .cur
        .letters
        .iter()
        .map(|&(g, _)| r.cover_index_of(g))
        .collect::<Result<Vec<_>>>()
    {
        Ok(v) => v,
        Err(e) => return blocked(r, e.to_string()),
    };
    let mut sigma: Vec<usize> = (0..r.cur.len()).collect();
    sigma.sort_by_key(|&p| (indices[p], p));
    if sigma.iter().enumerate().any(|(i, &s)| i != s) {
        let (conjugators, _) = permute_with_conjugators(&r.cur, &sigma)?;
        let conj_lens: Vec<usize> = conjugators.iter().map(|w| w.len()).collect();
        try_step!(r, r.push(RewriteStep::PermuteFree { sigma, conjugators }));

        // collapse each w_i a w_i^-1 block into a single conjugate generator
        let mut at = 0usize;
        for len in conj_lens {
            if len == 0 {
                at += 1;
                continue;
            }
            let window = Word::from_letters(r.cur.letters[at..at + 2 * len + 1].to_vec());
            let mid = window.letters[len].0;
            let target = match r.ctx.generator(mid) {
                Ok(g) => g.clone(),
                Err(e) => return blocked(r, e.to_string()),
            };
            let region =
                match conjugation_region(r.ctx, &window.letters[..len], target.label) {
                    Ok(reg) => reg,
                    Err(e) => return blocked(r, e.to_string()),
                };
            let value = match evaluate(r.ctx, &window) {
                Ok(v) => v,
                Err(e) => return blocked(r, e.to_string()),
            };
            let new_gen = match r.ctx.add_generator(value, region, target.cover_index) {
                Ok(g) => g,
                Err(e) => return blocked(r, e.to_string()),
            };
            try_step!(
                r,
                r.push(RewriteStep::ConjugationFormula {
                    at,
                    conj_len: len,
                    new_gen,
                })
            );
            at += 1;
        }
    }

    // group letters sharing a cover interval
    loop {
        let mut merged = false;
        for at in 0..r.cur.len().saturating_sub(1) {
            let ga = r.cur.letters[at].0;
            let gb = r.cur.letters[at + 1].0;
            let (ia, ib) = match (r.cover_index_of(ga), r.cover_index_of(gb)) {
                (Ok(a), Ok(b)) => (a, b),
                _ => return blocked(r, "grouped letter lost its cover label".into()),
            };
            if ia != ib {
                continue;
            }
            let (la, lb) = (
                r.ctx.generator(ga).unwrap().label,
                r.ctx.generator(gb).unwrap().label,
            );
            let hull = match la.union(&lb) {
                Some(h) => h,
                None => la,
            };
            let window = Word::from_letters(r.cur.letters[at..at + 2].to_vec());
            let value = match evaluate(r.ctx, &window) {
                Ok(v) => v,
                Err(e) => return blocked(r, e.to_string()),
            };
            let new_gen = match r.ctx.add_generator(value, hull, Some(ia)) {
                Ok(g) => g,
                Err(e) => return blocked(r, e.to_string()),
            };
            try_step!(r, r.push(RewriteStep::MergeInInterval { at, new_gen }));
            merged = true;
            break;
        }
        if !merged {
            break;
        }
    }

    // split each grouped letter against its successor's interval, right to
    // left so positions stay stable
    let k = r.cur.len();
    let d = r.ctx.cover.d;
    if k >= 2 {
        for j in (0..k - 1).rev() {
            let ga = r.cur.letters[j].0;
            let gb = r.cur.letters[j + 1].0;
            let (ia, ib) = (r.cover_index_of(ga), r.cover_index_of(gb));
            let (ia, ib) = match (ia, ib) {
                (Ok(a), Ok(b)) => (a, b),
                _ => return blocked(r, "letter lost its cover label before splitting".into()),
            };
            if ib != ia + 1 {
                continue;
            }
            let iva = r.ctx.cover.intervals[ia];
            let ivb = r.ctx.cover.intervals[ib];
            let overlap = iva.intersect(&ivb);
            let Some(overlap) = overlap.first() else {
                continue;
            };
            let transition = overlap.midpoint();
            let label = r.ctx.generator(ga).unwrap().label;
            let complement = TAU - label.length;
            if complement <= 2.0 * d {
                return blocked(r, format!("no room to cut while splitting letter {j}"));
            }
            let cut = wrap_angle(label.end() + 0.5 * complement);
            let elem = match r.ctx.element_of(ga) {
                Ok(e) => e.clone(),
                Err(e) => return blocked(r, e.to_string()),
            };
            let (minus, plus) = match r.ctx.oracle.split(&elem, transition, cut, d) {
                Ok(p) => p,
                Err(e) => return blocked(r, e.to_string()),
            };
            // left part keeps the label up to the transition plus slack;
            // right part lives in the trailing arc
            let left_len = wrap_angle(transition - label.start) + d;
            let right_start = wrap_angle(transition - d);
            let right_len = wrap_angle(label.end() - transition) + d;
            let (left_label, right_label) = match (
                Interval::new(label.start, left_len.min(TAU - 1e-9)),
                Interval::new(right_start, right_len.min(TAU - 1e-9)),
            ) {
                (Ok(a), Ok(b)) => (a, b),
                _ => return blocked(r, "degenerate split labels".into()),
            };
            let g_minus = match r.ctx.add_generator(minus, left_label, Some(ia)) {
                Ok(g) => g,
                Err(e) => return blocked(r, e.to_string()),
            };
            let g_plus = match r.ctx.add_generator(plus, right_label, Some(ia)) {
                Ok(g) => g,
                Err(e) => return blocked(r, e.to_string()),
            };
            try_step!(
                r,
                r.push(RewriteStep::SplitSupport {
                    at: j,
                    parts: vec![g_minus, g_plus],
                })
            );
        }
    }

    // telescope: pair each plus part with the next minus part, then fold
    while r.cur.len() > 1 {
        let window = Word::from_letters(r.cur.letters[..2].to_vec());
        let value = match evaluate(r.ctx, &window) {
            Ok(v) => v,
            Err(e) => return blocked(r, e.to_string()),
        };
        let la = r.ctx.generator(r.cur.letters[0].0).unwrap().label;
        let lb = r.ctx.generator(r.cur.letters[1].0).unwrap().label;
        let hull = la.union(&lb).unwrap_or_else(|| {
            Interval::new(0.0, TAU - 1e-9).unwrap()
        });
        let new_gen = match r.ctx.add_generator(value, hull, None) {
            Ok(g) => g,
            Err(e) => return blocked(r, e.to_string()),
        };
        try_step!(
            r,
            r.push(RewriteStep::TelescopeMerge {
                at: 0,
                count: 2,
                new_gen: Some(new_gen),
            })
        );
    }
    try_step!(
        r,
        r.push(RewriteStep::TelescopeMerge {
            at: 0,
            count: 1,
            new_gen: None,
        })
    );
    Ok(ReduceOutcome {
        derivation: r.derivation,
        complete: true,
        diagnostic: None,
    })
}

// ---------------------------------------------------------------------------

/// su(2) generator used by loop-valued tests and the self test suite.
pub fn su2_sigma_z() -> CMat {
    CMat::from_row_slice(
        2,
        2,
        &[
            num_complex::Complex64::new(0.0, 1.0),
            num_complex::Complex64::new(0.0, 0.0),
            num_complex::Complex64::new(0.0, 0.0),
            num_complex::Complex64::new(0.0, -1.0),
        ],
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_partition_of_unity, bump, uniform_cover};
    use num_complex::Complex64;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    // --- free-group layer --------------------------------------------------

    #[test]
    fn free_reduction_basics() {
        assert!(free_reduce(&[(0, 1), (0, -1)]).is_empty());
        assert_eq!(free_reduce(&[(0, 1), (1, 1), (1, -1), (0, -1)]), vec![]);
        assert_eq!(
            free_reduce(&[(0, 1), (1, -1), (0, 1)]),
            vec![(0, 1), (1, -1), (0, 1)]
        );
    }

    #[test]
    fn permute_identity_and_swap() {
        let w = Word::from_letters(vec![(0, 1), (1, 1), (2, 1)]);
        let (conj, expanded) = permute_with_conjugators(&w, &[0, 1, 2]).unwrap();
        assert!(conj.iter().all(|c| c.is_empty()));
        assert_eq!(expanded, w);

        let w = Word::from_letters(vec![(0, 1), (1, 1)]);
        let (conj, expanded) = permute_with_conjugators(&w, &[1, 0]).unwrap();
        assert_eq!(conj[0], Word::gen(0));
        assert!(conj[1].is_empty());
        // a1 a2 = (a1 a2 a1^-1) a1
        assert_eq!(
            expanded.letters,
            vec![(0, 1), (1, 1), (0, -1), (0, 1)]
        );
        assert!(free_equal(&expanded.letters, &w.letters));
    }

    #[test]
    fn permute_randomized_free_equality() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..500 {
            let n = rng.gen_range(1..=8);
            let w = Word::from_letters((0..n).map(|g| (g, 1)).collect());
            let mut sigma: Vec<usize> = (0..n).collect();
            sigma.shuffle(&mut rng);
            let (conj, expanded) = permute_with_conjugators(&w, &sigma).unwrap();
            assert!(free_equal(&expanded.letters, &w.letters));
            for c in &conj {
                assert!(c.is_positive_distinct());
            }
        }
        assert!(permute_with_conjugators(&Word::from_letters(vec![(0, 1)]), &[1]).is_err());
    }

    // --- oracles -----------------------------------------------------------

    #[test]
    fn oracle_group_axioms_sampled() {
        let cyc = CyclicOracle::new(7);
        let perm = PermOracle { degree: 4 };
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let (a, b, c) = (
                rng.gen_range(0..7i64),
                rng.gen_range(0..7i64),
                rng.gen_range(0..7i64),
            );
            let ab_c = cyc.mul(&cyc.mul(&a, &b).unwrap(), &c).unwrap();
            let a_bc = cyc.mul(&a, &cyc.mul(&b, &c).unwrap()).unwrap();
            assert_eq!(ab_c, a_bc);
            assert!(cyc
                .is_identity(&cyc.mul(&a, &cyc.inv(&a).unwrap()).unwrap())
                .unwrap());

            let mut p: Vec<usize> = (0..4).collect();
            let mut q: Vec<usize> = (0..4).collect();
            p.shuffle(&mut rng);
            q.shuffle(&mut rng);
            let pq = perm.mul(&p, &q).unwrap();
            let qinv_pinv = perm
                .mul(&perm.inv(&q).unwrap(), &perm.inv(&p).unwrap())
                .unwrap();
            assert_eq!(perm.inv(&pq).unwrap(), qinv_pinv);
        }
    }

    // --- van Kampen --------------------------------------------------------

    #[test]
    fn vk_single_triangle() {
        // vertices e, g, gh in Z/5: boundary relation g * h * (gh)^-1
        let oracle = CyclicOracle::new(5);
        let disk = TriangulatedDisk {
            vertices: vec![0i64, 2, 3],
            edges: vec![(0, 1), (1, 2), (0, 2)],
            faces: vec![[0, 1, 2]],
            boundary: vec![0, 1, 2],
        };
        let deriv = vk_verify(&disk, &oracle).unwrap();
        assert_eq!(deriv.steps.len(), 1);
        vk_replay(&disk, &oracle, &deriv).unwrap();
    }

    #[test]
    fn vk_square_two_faces() {
        let oracle = CyclicOracle::new(5);
        // square e, a, a+b, a+b+c with both diagonally split triangles
        let disk = TriangulatedDisk {
            vertices: vec![0i64, 1, 3, 4],
            edges: vec![(0, 1), (1, 2), (2, 3), (3, 0), (0, 2)],
            faces: vec![[0, 1, 2], [0, 2, 3]],
            boundary: vec![0, 1, 2, 3],
        };
        let deriv = vk_verify(&disk, &oracle).unwrap();
        assert_eq!(deriv.steps.len(), 2);
        vk_replay(&disk, &oracle, &deriv).unwrap();
    }

    #[test]
    fn vk_subdivided_boundary_edge() {
        // boundary path g_j = h_1 + ... + h_j with the relations
        // g_j + h_{j+1} = g_{j+1} encoded as edge ratios; apex fan
        let oracle = CyclicOracle::new(11);
        let h = [3i64, 4, 5];
        let g = [0i64, 3, 7, 12 % 11];
        let disk = TriangulatedDisk {
            vertices: vec![g[0], g[1], g[2], g[3], 6],
            edges: vec![(0, 1), (1, 2), (2, 3), (0, 4), (1, 4), (2, 4), (3, 4)],
            faces: vec![[0, 1, 4], [1, 2, 4], [2, 3, 4]],
            boundary: vec![0, 1, 2, 3, 4],
        };
        // the subdivision relations hold by construction
        for j in 0..3 {
            assert_eq!((g[j] + h[j]).rem_euclid(11), g[j + 1].rem_euclid(11));
        }
        let deriv = vk_verify(&disk, &oracle).unwrap();
        assert_eq!(deriv.steps.len(), 3);
        vk_replay(&disk, &oracle, &deriv).unwrap();
    }

    #[test]
    fn vk_rejects_edge_outside_neighborhood() {
        let oracle = CyclicOracle {
            modulus: 12,
            neighborhood: Some(vec![0, 1, 11]),
        };
        let disk = TriangulatedDisk {
            vertices: vec![0i64, 1, 6],
            edges: vec![(0, 1), (1, 2), (0, 2)],
            faces: vec![[0, 1, 2]],
            boundary: vec![0, 1, 2],
        };
        assert!(matches!(vk_verify(&disk, &oracle), Err(Error::Precondition(_))));
    }

    #[test]
    fn vk_rejects_mutated_derivation() {
        let oracle = CyclicOracle::new(5);
        let disk = TriangulatedDisk {
            vertices: vec![0i64, 2, 3],
            edges: vec![(0, 1), (1, 2), (0, 2)],
            faces: vec![[0, 1, 2]],
            boundary: vec![0, 1, 2],
        };
        let mut deriv = vk_verify(&disk, &oracle).unwrap();
        deriv.steps[0].relator[1].1 *= -1;
        assert!(vk_replay(&disk, &oracle, &deriv).is_err());
    }

    #[test]
    fn vk_numeric_loop_triangle() {
        let n = 128;
        let x = su2_sigma_z();
        let mk = |a: f64| {
            Loop::from_algebra_fn(loops::Group::SU(2), n, |t| {
                &x * Complex64::new(a * t.sin(), 0.0)
            })
            .unwrap()
        };
        let oracle = LoopOracle { tol: 1e-9 };
        let g = mk(0.3);
        let gh = loops::multiply(&g, &mk(0.2)).unwrap();
        let disk = TriangulatedDisk {
            vertices: vec![Loop::identity(loops::Group::SU(2), n).unwrap(), g, gh],
            edges: vec![(0, 1), (1, 2), (0, 2)],
            faces: vec![[0, 1, 2]],
            boundary: vec![0, 1, 2],
        };
        let deriv = vk_verify(&disk, &oracle).unwrap();
        vk_replay(&disk, &oracle, &deriv).unwrap();
    }

    // --- presentations and reduction ---------------------------------------

    const N: usize = 256;

    fn loop_ctx() -> Presentation<LoopOracle> {
        let cover = uniform_cover(5, 0.15).unwrap();
        Presentation::new(LoopOracle { tol: 1e-8 }, cover, 1e-10, 1e-8).unwrap()
    }

    fn bump_loop(center: f64, halfwidth: f64, amp: f64) -> Loop {
        let x = su2_sigma_z();
        Loop::from_algebra_fn(loops::Group::SU(2), N, |t| {
            &x * Complex64::new(amp * bump(crate::geometry::angle_diff(t, center) / halfwidth), 0.0)
        })
        .unwrap()
    }

    #[test]
    fn evaluate_words() {
        let mut ctx = loop_ctx();
        let c0 = ctx.cover.intervals[0].midpoint();
        let c2 = ctx.cover.intervals[2].midpoint();
        let a = bump_loop(c0, 0.4, 0.5);
        let b = bump_loop(c2, 0.4, 0.3);
        let ga = ctx.add_cover_generator(a.clone(), 0).unwrap();
        let gb = ctx.add_cover_generator(b.clone(), 2).unwrap();
        // empty word evaluates to the identity
        let e = evaluate(&ctx, &Word::empty()).unwrap();
        assert!(ctx.oracle.is_identity(&e).unwrap());
        // [a][b] is the pointwise product
        let w = Word::from_letters(vec![(ga, 1), (gb, 1)]);
        let v = evaluate(&ctx, &w).unwrap();
        let expect = loops::multiply(&a, &b).unwrap();
        assert!(v.sup_distance(&expect).unwrap() < 1e-12);
        assert!(matches!(
            evaluate(&ctx, &Word::gen(99)),
            Err(Error::DanglingId(99))
        ));
    }

    #[test]
    fn generator_needs_support_in_label() {
        let mut ctx = loop_ctx();
        let c2 = ctx.cover.intervals[2].midpoint();
        let stray = bump_loop(c2, 0.4, 0.5);
        assert!(ctx.add_cover_generator(stray, 0).is_err());
    }

    #[test]
    fn trivial_reductions() {
        let mut ctx = loop_ctx();
        let c1 = ctx.cover.intervals[1].midpoint();
        let g = ctx
            .add_cover_generator(bump_loop(c1, 0.4, 0.5), 1)
            .unwrap();
        // gamma gamma^-1 -> empty by free reduction
        let w = Word::from_letters(vec![(g, 1), (g, -1)]);
        let out = reduce_relation(&mut ctx, &w).unwrap();
        assert!(out.complete);
        assert!(out.derivation.final_word().is_empty());
        verify_derivation(&ctx, &out.derivation).unwrap();
    }

    #[test]
    fn disjoint_commutator_reduces() {
        let mut ctx = loop_ctx();
        let c1 = ctx.cover.intervals[1].midpoint();
        let c3 = ctx.cover.intervals[3].midpoint();
        let a = ctx.add_cover_generator(bump_loop(c1, 0.35, 0.5), 1).unwrap();
        let b = ctx.add_cover_generator(bump_loop(c3, 0.35, 0.4), 3).unwrap();
        let w = Word::from_letters(vec![(a, 1), (b, 1), (a, -1), (b, -1)]);
        let out = reduce_relation(&mut ctx, &w).unwrap();
        assert!(out.complete, "{:?}", out.diagnostic);
        assert!(out.derivation.final_word().is_empty());
        assert!(out
            .derivation
            .steps
            .iter()
            .any(|(s, _)| matches!(s, RewriteStep::DisjointCommute { .. })));
        verify_derivation(&ctx, &out.derivation).unwrap();
    }

    #[test]
    fn non_identity_word_rejected() {
        let mut ctx = loop_ctx();
        let c1 = ctx.cover.intervals[1].midpoint();
        let g = ctx.add_cover_generator(bump_loop(c1, 0.4, 0.5), 1).unwrap();
        assert!(matches!(
            reduce_relation(&mut ctx, &Word::gen(g)),
            Err(Error::Precondition(_))
        ));
    }

    /// Scramble a word by swapping adjacent letters whose cover intervals are
    /// at distance >= 2, preserving the evaluation.
    fn disjoint_scramble(
        letters: &mut Vec<(usize, i8)>,
        indices: &dyn Fn(usize) -> usize,
        rng: &mut ChaCha8Rng,
        tries: usize,
    ) {
        for _ in 0..tries {
            let at = rng.gen_range(0..letters.len() - 1);
            let ia = indices(letters[at].0) as i64;
            let ib = indices(letters[at + 1].0) as i64;
            let gap = (ia - ib).abs().min(5 - (ia - ib).abs());
            if gap >= 2 {
                letters.swap(at, at + 1);
            }
        }
    }

    #[test]
    fn loop_factorization_word_reduces_to_empty() {
        let mut ctx = loop_ctx();
        let pu = build_partition_of_unity(&ctx.cover).unwrap();
        let x = su2_sigma_z();
        let mk = |a: f64, b: f64| {
            Loop::from_algebra_fn(loops::Group::SU(2), N, |t| {
                &x * Complex64::new(a * t.sin() + b * (2.0 * t).cos(), 0.0)
            })
            .unwrap()
        };
        let g1 = mk(0.25, 0.1);
        let g2 = mk(-0.15, 0.2);
        let g3 = loops::invert(&loops::multiply(&g1, &g2).unwrap());
        let mut letters = Vec::new();
        let mut owner = Vec::new();
        for g in [&g1, &g2, &g3] {
            let factors = loops::factor_over_cover(g, &ctx.cover, &pu).unwrap();
            for (i, f) in factors.into_iter().enumerate() {
                let id = ctx.add_cover_generator(f, i).unwrap();
                letters.push((id, 1i8));
                owner.push(i);
            }
        }
        assert_eq!(letters.len(), 15);
        let owners = owner.clone();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let lookup = move |g: usize| owners[g];
        disjoint_scramble(&mut letters, &lookup, &mut rng, 40);
        let word = Word::from_letters(letters);
        let out = reduce_relation(&mut ctx, &word).unwrap();
        assert!(out.complete, "{:?}", out.diagnostic);
        assert!(out.derivation.final_word().is_empty());
        // the pipeline exercised its stages
        let kinds: Vec<&'static str> = out
            .derivation
            .steps
            .iter()
            .map(|(s, _)| match s {
                RewriteStep::PermuteFree { .. } => "permute",
                RewriteStep::ConjugationFormula { .. } => "conj",
                RewriteStep::MergeInInterval { .. } => "merge",
                RewriteStep::SplitSupport { .. } => "split",
                RewriteStep::TelescopeMerge { .. } => "telescope",
                _ => "other",
            })
            .collect();
        for stage in ["permute", "merge", "split", "telescope"] {
            assert!(kinds.contains(&stage), "missing stage {stage}: {kinds:?}");
        }
        verify_derivation(&ctx, &out.derivation).unwrap();

        // JSON round trip of the derivation
        let json = serde_json::to_string(&out.derivation).unwrap();
        let back: Derivation = serde_json::from_str(&json).unwrap();
        verify_derivation(&ctx, &back).unwrap();
    }

    #[test]
    fn diffeo_factorization_word_reduces_to_empty() {
        let mut cover = uniform_cover(5, 0.1).unwrap();
        cover.strong_separation = true;
        let mut ctx =
            Presentation::new(DiffeoOracle { tol: 1e-6, u_displacement: 0.1 }, cover, 1e-8, 1e-6)
                .unwrap();
        let phi = CircleDiffeo::from_fn(1024, |t| t + 0.03 * t.sin() + 0.01 * (2.0 * t).cos())
            .unwrap();
        let psi = diffeo::invert(&phi).unwrap();
        let mut letters = Vec::new();
        let mut owner = Vec::new();
        for f in [&phi, &psi] {
            let factors = diffeo::factor_over_cover(f, &ctx.cover).unwrap();
            for (i, fac) in factors.into_iter().enumerate() {
                let id = ctx.add_cover_generator(fac, i).unwrap();
                letters.push((id, 1i8));
                owner.push(i);
            }
        }
        let owners = owner.clone();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let lookup = move |g: usize| owners[g];
        disjoint_scramble(&mut letters, &lookup, &mut rng, 25);
        let word = Word::from_letters(letters);
        let out = reduce_relation(&mut ctx, &word).unwrap();
        assert!(out.complete, "{:?}", out.diagnostic);
        assert!(out.derivation.final_word().is_empty());
        verify_derivation(&ctx, &out.derivation).unwrap();
    }

    #[test]
    fn conjugation_side_conditions_block() {
        // four conjugators sharing the target's interval exceed the mover
        // budget
        let mut cover = uniform_cover(5, 0.1).unwrap();
        cover.strong_separation = true;
        let mut ctx =
            Presentation::new(DiffeoOracle { tol: 1e-7, u_displacement: 0.1 }, cover, 1e-9, 1e-7)
                .unwrap();
        let c1 = ctx.cover.intervals[1].midpoint();
        let small = |a: f64| {
            CircleDiffeo::from_fn(512, move |t| {
                t + a * bump(crate::geometry::angle_diff(t, c1) / 0.4)
            })
            .unwrap()
        };
        let target = ctx.add_cover_generator(small(0.02), 1).unwrap();
        let mut conj = Vec::new();
        for k in 0..4 {
            let id = ctx
                .add_cover_generator(small(0.005 + 0.001 * k as f64), 1)
                .unwrap();
            conj.push((id, 1i8));
        }
        let mut letters = conj.clone();
        letters.push((target, 1));
        letters.extend(conj.iter().rev().map(|&(g, _)| (g, -1i8)));
        let word = Word::from_letters(letters);
        let value = evaluate(&ctx, &word).unwrap();
        let region = ctx.cover.intervals[1].enlarged(3.0 * ctx.cover.d);
        let new_gen = ctx.add_generator(value, region, Some(1)).unwrap();
        let step = RewriteStep::ConjugationFormula {
            at: 0,
            conj_len: 4,
            new_gen,
        };
        let err = apply_step(&ctx, &word, &step);
        assert!(matches!(err, Err(Error::RewriteBlocked(_))), "{err:?}");
    }

    #[test]
    fn conjugation_requires_strong_separation() {
        let cover = uniform_cover(5, 0.1).unwrap();
        let mut ctx =
            Presentation::new(DiffeoOracle { tol: 1e-7, u_displacement: 0.1 }, cover, 1e-9, 1e-7)
                .unwrap();
        let c1 = ctx.cover.intervals[1].midpoint();
        let target_elem =
            CircleDiffeo::from_fn(512, move |t| t + 0.02 * bump(crate::geometry::angle_diff(t, c1) / 0.4))
                .unwrap();
        let conj_elem =
            CircleDiffeo::from_fn(512, move |t| t + 0.01 * bump(crate::geometry::angle_diff(t, c1) / 0.4))
                .unwrap();
        let target = ctx.add_cover_generator(target_elem, 1).unwrap();
        let psi = ctx.add_cover_generator(conj_elem, 1).unwrap();
        let word = Word::from_letters(vec![(psi, 1), (target, 1), (psi, -1)]);
        let value = evaluate(&ctx, &word).unwrap();
        let region = ctx.cover.intervals[1].enlarged(3.0 * ctx.cover.d);
        let new_gen = ctx.add_generator(value, region, Some(1)).unwrap();
        let step = RewriteStep::ConjugationFormula {
            at: 0,
            conj_len: 1,
            new_gen,
        };
        assert!(matches!(
            apply_step(&ctx, &word, &step),
            Err(Error::RewriteBlocked(_))
        ));
    }

    #[test]
    fn conjugation_preserves_evaluation() {
        // loops: collapse w g w^-1 and compare values
        let mut ctx = loop_ctx();
        let c1 = ctx.cover.intervals[1].midpoint();
        let c3 = ctx.cover.intervals[3].midpoint();
        let g = ctx.add_cover_generator(bump_loop(c1, 0.35, 0.4), 1).unwrap();
        let w = ctx.add_cover_generator(bump_loop(c3, 0.35, 0.3), 3).unwrap();
        let word = Word::from_letters(vec![(w, 1), (g, 1), (w, -1)]);
        let before = evaluate(&ctx, &word).unwrap();
        let label = ctx.generator(g).unwrap().label;
        let new_gen = ctx.add_generator(before.clone(), label, Some(1)).unwrap();
        let step = RewriteStep::ConjugationFormula {
            at: 0,
            conj_len: 1,
            new_gen,
        };
        let next = apply_step(&ctx, &word, &step).unwrap();
        let after = evaluate(&ctx, &next).unwrap();
        assert!(before.sup_distance(&after).unwrap() < 1e-9);
    }

    #[test]
    fn diagram_commutation_two_charts() {
        // an element supported in a disconnected intersection I1 cap I2:
        // its two generator images are related by inclusions and merges
        let cover = uniform_cover(5, 0.15).unwrap();
        let mut ctx =
            Presentation::new(LoopOracle { tol: 1e-8 }, cover, 1e-10, 1e-8).unwrap();
        // two big arcs whose intersection has two components
        let i1 = Interval::new(0.0, 4.0).unwrap();
        let i2 = Interval::new(3.0, 4.5).unwrap();
        assert_eq!(i1.intersect(&i2).len(), 2);
        let comp_a = Interval::new(3.2, 0.6).unwrap();
        let comp_b = Interval::new(0.1, 0.6).unwrap();
        let ga = bump_loop(comp_a.midpoint(), 0.25, 0.4);
        let gb = bump_loop(comp_b.midpoint(), 0.25, 0.3);
        let g = loops::multiply(&ga, &gb).unwrap();
        let a_small = ctx.add_generator(ga, comp_a, None).unwrap();
        let b_small = ctx.add_generator(gb, comp_b, None).unwrap();
        let a_in_1 = ctx.relabel_generator(a_small, i1, None).unwrap();
        let b_in_1 = ctx.relabel_generator(b_small, i1, None).unwrap();
        let a_in_2 = ctx.relabel_generator(a_small, i2, None).unwrap();
        let b_in_2 = ctx.relabel_generator(b_small, i2, None).unwrap();
        let g_in_1 = ctx.add_generator(g.clone(), i1, None).unwrap();
        let g_in_2 = ctx.add_generator(g.clone(), i2, None).unwrap();
        let start = Word::from_letters(vec![(a_small, 1), (b_small, 1)]);
        // route through I1
        let route = |inc_a: usize, inc_b: usize, merged: usize| -> Derivation {
            let mut deriv = Derivation {
                initial: start.clone(),
                steps: Vec::new(),
            };
            let mut cur = start.clone();
            for step in [
                RewriteStep::IntervalInclusion { at: 0, new_gen: inc_a },
                RewriteStep::IntervalInclusion { at: 1, new_gen: inc_b },
                RewriteStep::MergeInInterval { at: 0, new_gen: merged },
            ] {
                cur = apply_step(&ctx, &cur, &step).unwrap();
                deriv.steps.push((step, cur.clone()));
            }
            deriv
        };
        let d1 = route(a_in_1, b_in_1, g_in_1);
        let d2 = route(a_in_2, b_in_2, g_in_2);
        verify_derivation(&ctx, &d1).unwrap();
        verify_derivation(&ctx, &d2).unwrap();
        // both routes end at a single generator carrying the same element
        let e1 = evaluate(&ctx, d1.final_word()).unwrap();
        let e2 = evaluate(&ctx, d2.final_word()).unwrap();
        assert!(e1.sup_distance(&e2).unwrap() < 1e-12);
        assert!(e1.sup_distance(&g).unwrap() < 1e-12);
    }
}
