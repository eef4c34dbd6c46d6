//! Erasure patterns, worst-case searches, attacks, empirical certification
//! and the noisy erasure channel.
//!
//! Only exhaustive enumeration can certify; sampling and the attacks can
//! only refute.

use std::sync::atomic::{AtomicU64, Ordering};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::seq::index;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::certificates::{analytic_certificates, bicap_cond_lower_bound, AnalyticCertificate, NerfQuery};
use crate::error::{invalid, Error, Result};
use crate::rng::{stream_rng, Stream};
use crate::spectral::{extended_real, extended_real_opt, summarize_columns, Frame, ScalarField, Tolerances};

/// Relative gap below which two condition numbers count as tied.
pub const TIE_RTOL: f64 = 1e-12;

/// Absolute slack on `cond <= C` in verdicts.
pub const CONDITION_SLACK: f64 = 1e-9;

/// Default cap on `binom(N, K)` for exhaustive search.
pub const DEFAULT_WORK_CAP: u64 = 10_000_000;

const CHUNK: u64 = 1024;
const RANDOM_CANDIDATES: usize = 64;
const PAIR_LIMIT: usize = 4096;

/// The surviving column set `K` of an `N`-column frame.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ErasurePattern {
    survivors: Vec<usize>,
    n: usize,
}

impl ErasurePattern {
    /// Sorts the survivors; rejects duplicates, out-of-range indices and
    /// the empty set.
    pub fn new(mut survivors: Vec<usize>, n: usize) -> Result<Self> {
        if survivors.is_empty() {
            return Err(Error::EmptyPattern);
        }
        survivors.sort_unstable();
        if let Some(&index) = survivors.iter().find(|&&i| i >= n) {
            return Err(Error::IndexOutOfRange { index, n });
        }
        if survivors.windows(2).any(|w| w[0] == w[1]) {
            return Err(invalid("erasure pattern lists a column twice"));
        }
        Ok(Self { survivors, n })
    }

    /// Pattern keeping every column except `erased`.
    pub fn from_erased(erased: &[usize], n: usize) -> Result<Self> {
        if let Some(&index) = erased.iter().find(|&&i| i >= n) {
            return Err(Error::IndexOutOfRange { index, n });
        }
        let mut keep = vec![true; n];
        for &i in erased {
            keep[i] = false;
        }
        Self::new((0..n).filter(|&i| keep[i]).collect(), n)
    }

    pub fn full(n: usize) -> Self {
        Self {
            survivors: (0..n).collect(),
            n,
        }
    }

    /// Caller guarantees sorted, distinct, in-range indices.
    pub fn from_sorted_unchecked(survivors: Vec<usize>, n: usize) -> Self {
        Self { survivors, n }
    }

    pub fn survivors(&self) -> &[usize] {
        &self.survivors
    }

    pub fn erased(&self) -> Vec<usize> {
        let mut keep = vec![false; self.n];
        for &i in &self.survivors {
            keep[i] = true;
        }
        (0..self.n).filter(|&i| !keep[i]).collect()
    }

    pub fn len(&self) -> usize {
        self.survivors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.survivors.is_empty()
    }

    /// Width `N` of the parent frame.
    pub fn parent_len(&self) -> usize {
        self.n
    }

    pub fn check_against(&self, frame: &Frame) -> Result<()> {
        if self.n != frame.len() {
            return Err(invalid(format!(
                "pattern is for {} columns, frame has {}",
                self.n,
                frame.len()
            )));
        }
        if let Some(&index) = self.survivors.iter().find(|&&i| i >= self.n) {
            return Err(Error::IndexOutOfRange { index, n: self.n });
        }
        Ok(())
    }
}

/// The `M x K` submatrix `F_K`, which may have fewer columns than rows.
#[derive(Clone, Debug, PartialEq)]
pub struct ErasedFrame {
    matrix: DMatrix<Complex64>,
    scalar_field: ScalarField,
    pattern: ErasurePattern,
}

impl ErasedFrame {
    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn scalar_field(&self) -> ScalarField {
        self.scalar_field
    }

    pub fn pattern(&self) -> &ErasurePattern {
        &self.pattern
    }

    pub fn gram(&self) -> DMatrix<Complex64> {
        self.matrix.adjoint() * &self.matrix
    }

    pub fn summary(&self, tol: &Tolerances) -> crate::spectral::SpectralSummary {
        summarize_columns(&self.matrix, tol.rank)
    }
}

pub fn erase(frame: &Frame, pattern: &ErasurePattern) -> Result<ErasedFrame> {
    if pattern.is_empty() {
        return Err(Error::EmptyPattern);
    }
    pattern.check_against(frame)?;
    Ok(ErasedFrame {
        matrix: frame.columns(pattern.survivors()),
        scalar_field: frame.scalar_field(),
        pattern: pattern.clone(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AttackMethod {
    Exhaustive,
    Sampled,
    Greedy,
    Bicap,
    Sign,
}

impl AttackMethod {
    pub fn name(self) -> &'static str {
        match self {
            Self::Exhaustive => "exhaustive",
            Self::Sampled => "sampled",
            Self::Greedy => "greedy",
            Self::Bicap => "bicap",
            Self::Sign => "sign",
        }
    }
}

/// A search result. `cond` is always recomputed from `pattern` with the
/// same routine as `spectral_summary`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttackReport {
    pub pattern: ErasurePattern,
    #[serde(with = "extended_real")]
    pub cond: f64,
    pub method: AttackMethod,
    /// Lemma lower bound on `cond` for the bi-cap direction found.
    #[serde(default, skip_serializing_if = "Option::is_none", with = "extended_real_opt")]
    pub certificate_cond_lower: Option<f64>,
    /// Patterns evaluated spectrally; for bi-cap, candidate directions
    /// scored.
    pub work: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Bi-cap candidate that produced the pattern, e.g. `pair-sum 3,8`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub candidate: Option<String>,
}

impl AttackReport {
    fn new(frame: &Frame, survivors: Vec<usize>, method: AttackMethod, work: u64, tol: &Tolerances) -> Self {
        let cond = summarize_columns(&frame.columns(&survivors), tol.rank).cond;
        Self {
            pattern: ErasurePattern::from_sorted_unchecked(survivors, frame.len()),
            cond,
            method,
            certificate_cond_lower: None,
            work,
            seed: None,
            candidate: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchOptions {
    /// Largest `binom(N, K)` exhaustive search will take on.
    pub work_cap: u64,
    /// Worker threads; `None` uses the global pool, `Some(1)` runs serially.
    pub workers: Option<usize>,
    /// Stop at the first rank-deficient pattern. The reported pattern is
    /// unchanged (it is the lexicographically first one) but `work` then
    /// depends on scheduling.
    pub stop_at_rank_deficient: bool,
    pub tolerances: Tolerances,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            work_cap: DEFAULT_WORK_CAP,
            workers: None,
            stop_at_rank_deficient: false,
            tolerances: Tolerances::default(),
        }
    }
}

/// `a` is strictly worse-conditioned than `b`, beyond the tie tolerance.
fn beats(a: f64, b: f64) -> bool {
    if b.is_infinite() {
        false
    } else if a.is_infinite() {
        true
    } else {
        a > b * (1.0 + TIE_RTOL)
    }
}

/// `binom(n, k)`, saturating at `u128::MAX`.
pub fn binom_u128(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) / (i + 1) stays integral at every step.
        match acc.checked_mul((n - i) as u128) {
            Some(v) => acc = v / (i + 1) as u128,
            None => return u128::MAX,
        }
    }
    acc
}

/// The `rank`-th `k`-subset of `0..n` in lexicographic order.
fn unrank_combination(n: usize, k: usize, mut rank: u128) -> Vec<usize> {
    let mut out = Vec::with_capacity(k);
    let mut v = 0;
    for i in 0..k {
        loop {
            let count = binom_u128(n - v - 1, k - i - 1);
            if rank < count {
                break;
            }
            rank -= count;
            v += 1;
        }
        out.push(v);
        v += 1;
    }
    out
}

fn next_combination(c: &mut [usize], n: usize) -> bool {
    let k = c.len();
    let Some(i) = (0..k).rev().find(|&i| c[i] < n - k + i) else {
        return false;
    };
    c[i] += 1;
    for j in i + 1..k {
        c[j] = c[j - 1] + 1;
    }
    true
}

/// `(0..count).map(f)` in order, across workers when enabled.
fn map_ordered<R, F>(count: usize, workers: Option<usize>, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if workers != Some(1) {
        use rayon::prelude::*;
        let run = || (0..count).into_par_iter().map(&f).collect::<Vec<_>>();
        return match workers.map(|w| rayon::ThreadPoolBuilder::new().num_threads(w).build()) {
            Some(Ok(pool)) => pool.install(run),
            _ => run(),
        };
    }
    let _ = workers;
    (0..count).map(f).collect()
}

fn check_k(k: usize, n: usize) -> Result<()> {
    if k == 0 || k > n {
        return Err(invalid(format!("need 1 <= K <= N = {n}, got K = {k}")));
    }
    Ok(())
}

struct Best {
    cond: f64,
    survivors: Vec<usize>,
}

/// Worst condition number over all `binom(N, K)` patterns. Ties go to the
/// lexicographically smallest survivor set.
///
/// Patterns are split into fixed chunks of lexicographic ranks, each
/// reduced in order and the chunk winners folded in order, so the result
/// does not depend on the number of workers.
pub fn exhaustive_worst_cond(frame: &Frame, k: usize, opts: &SearchOptions) -> Result<AttackReport> {
    let n = frame.len();
    check_k(k, n)?;
    let total = binom_u128(n, k);
    if total > opts.work_cap as u128 {
        return Err(Error::WorkCapExceeded {
            patterns: total,
            cap: opts.work_cap,
        });
    }
    let total = total as u64;
    let chunks = total.div_ceil(CHUNK);
    let first_singular = AtomicU64::new(u64::MAX);
    let rank_tol = opts.tolerances.rank;

    let results = map_ordered(chunks as usize, opts.workers, |c| {
        let c = c as u64;
        if opts.stop_at_rank_deficient && c > first_singular.load(Ordering::Relaxed) {
            return (None, 0);
        }
        let start = c * CHUNK;
        let len = CHUNK.min(total - start);
        let mut comb = unrank_combination(n, k, start as u128);
        let mut best: Option<Best> = None;
        let mut evaluated = 0u64;
        for i in 0..len {
            if i > 0 {
                next_combination(&mut comb, n);
            }
            let cond = summarize_columns(&frame.columns(&comb), rank_tol).cond;
            evaluated += 1;
            if best.as_ref().is_none_or(|b| beats(cond, b.cond)) {
                best = Some(Best {
                    cond,
                    survivors: comb.clone(),
                });
            }
            if opts.stop_at_rank_deficient && cond.is_infinite() {
                first_singular.fetch_min(c, Ordering::Relaxed);
                break;
            }
        }
        (best, evaluated)
    });

    let mut work = 0;
    let mut best: Option<Best> = None;
    for (candidate, evaluated) in results {
        work += evaluated;
        if let Some(cand) = candidate {
            if best.as_ref().is_none_or(|b| beats(cand.cond, b.cond)) {
                best = Some(cand);
            }
        }
    }
    let best = best.ok_or_else(|| Error::Internal("exhaustive search evaluated no pattern".into()))?;
    Ok(AttackReport::new(frame, best.survivors, AttackMethod::Exhaustive, work, &opts.tolerances))
}

/// A uniform random `k`-subset of `0..n`.
pub fn random_pattern<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> Result<ErasurePattern> {
    check_k(k, n)?;
    let mut survivors = index::sample(rng, n, k).into_vec();
    survivors.sort_unstable();
    Ok(ErasurePattern::from_sorted_unchecked(survivors, n))
}

/// Worst condition number over `trials` uniform random `K`-subsets drawn
/// from the `Patterns` stream of `seed`. Ties go to the earliest trial.
pub fn sampled_worst_cond(frame: &Frame, k: usize, trials: usize, seed: u64, opts: &SearchOptions) -> Result<AttackReport> {
    let n = frame.len();
    check_k(k, n)?;
    if trials == 0 {
        return Err(invalid("need at least one trial"));
    }
    let mut rng = stream_rng(seed, Stream::Patterns);
    let patterns = (0..trials)
        .map(|_| random_pattern(n, k, &mut rng))
        .collect::<Result<Vec<_>>>()?;
    let rank_tol = opts.tolerances.rank;
    let conds = map_ordered(trials, opts.workers, |t| {
        summarize_columns(&frame.columns(patterns[t].survivors()), rank_tol).cond
    });
    let mut worst = 0;
    for (t, &cond) in conds.iter().enumerate() {
        if beats(cond, conds[worst]) {
            worst = t;
        }
    }
    let mut report = AttackReport::new(
        frame,
        patterns[worst].survivors().to_vec(),
        AttackMethod::Sampled,
        trials as u64,
        &opts.tolerances,
    );
    report.seed = Some(seed);
    Ok(report)
}

/// Deletes, one at a time, the column whose removal leaves the worst
/// condition number (ties to the smallest index) until `K` remain.
pub fn greedy_attack(frame: &Frame, k: usize, tol: &Tolerances) -> Result<AttackReport> {
    let n = frame.len();
    check_k(k, n)?;
    let mut survivors: Vec<usize> = (0..n).collect();
    let mut work = 0;
    let mut trial = Vec::with_capacity(n);
    while survivors.len() > k {
        let mut best: Option<(f64, usize)> = None;
        for pos in 0..survivors.len() {
            trial.clear();
            trial.extend(survivors.iter().enumerate().filter(|&(i, _)| i != pos).map(|(_, &c)| c));
            let cond = summarize_columns(&frame.columns(&trial), tol.rank).cond;
            work += 1;
            if best.is_none_or(|(b, _)| beats(cond, b)) {
                best = Some((cond, pos));
            }
        }
        let (_, pos) = best.expect("at least two survivors");
        survivors.remove(pos);
    }
    Ok(AttackReport::new(frame, survivors, AttackMethod::Greedy, work, tol))
}

#[derive(Clone, Debug)]
struct Scored {
    x: DVector<Complex64>,
    label: String,
    in_cap: usize,
    /// Indices by decreasing `|<x, f_n>|`, ties to the smaller index.
    order: Vec<usize>,
    /// `||F_K^* x||^2` over the first `K` of `order`.
    head: f64,
}

/// Searches for a direction `x` whose bi-cap `{y : |<x, y>|^2 >= C^2/M}`
/// holds many columns and keeps the `K` columns closest to `x`.
///
/// Candidates: every column, the phase-aligned sum and difference of every
/// pair of columns (a seeded sample of pairs when there are more than
/// 4096), and 64 seeded Gaussian directions. The direction with the most
/// columns in its bi-cap wins when that count reaches `K`; otherwise the one
/// maximizing `||F_K^* x||^2`.
pub fn bicap_attack(frame: &Frame, k: usize, c: f64, seed: u64, tol: &Tolerances) -> Result<AttackReport> {
    let (m, n) = (frame.dim(), frame.len());
    check_k(k, n)?;
    let deviation = frame.unit_norm_deviation();
    if deviation > tol.structural {
        return Err(Error::NotUnitNorm { deviation });
    }
    if c.is_nan() || c < 1.0 {
        return Err(invalid(format!("condition target must be >= 1, got {c}")));
    }
    let threshold = c * c / m as f64 * (1.0 - 1e-12);
    let f = frame.matrix();
    let adjoint = f.adjoint();
    let mut rng = stream_rng(seed, Stream::BicapCandidates);

    let score = |x: DVector<Complex64>, label: String| -> Option<Scored> {
        let norm = x.norm();
        if norm < 1e-12 {
            return None;
        }
        let x = x.unscale(norm);
        let s: Vec<f64> = (&adjoint * &x).iter().map(|z| z.norm_sqr()).collect();
        let in_cap = s.iter().filter(|&&v| v >= threshold).count();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| s[b].total_cmp(&s[a]).then(a.cmp(&b)));
        let head = order[..k].iter().map(|&i| s[i]).sum();
        Some(Scored {
            x,
            label,
            in_cap,
            order,
            head,
        })
    };

    let mut by_cap: Option<Scored> = None;
    let mut by_head: Option<Scored> = None;
    let mut work = 0u64;
    let mut consider = |cand: Option<Scored>| {
        work += 1;
        let Some(cand) = cand else { return };
        if by_cap
            .as_ref()
            .is_none_or(|b| cand.in_cap > b.in_cap || (cand.in_cap == b.in_cap && cand.head > b.head))
        {
            by_cap = Some(cand.clone());
        }
        if by_head.as_ref().is_none_or(|b| cand.head > b.head) {
            by_head = Some(cand);
        }
    };

    for j in 0..n {
        consider(score(f.column(j).into_owned(), format!("column {j}")));
    }
    let all_pairs = n * (n - 1) / 2;
    let pairs: Vec<(usize, usize)> = if all_pairs <= PAIR_LIMIT {
        (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect()
    } else {
        (0..PAIR_LIMIT)
            .map(|_| {
                let i = rng.random_range(0..n);
                let j = (i + rng.random_range(1..n)) % n;
                (i.min(j), i.max(j))
            })
            .collect()
    };
    for (i, j) in pairs {
        let (fi, fj) = (f.column(i), f.column(j));
        let w = fi.dotc(&fj);
        let phase = if w.norm() > 0.0 { w / w.norm() } else { Complex64::new(1.0, 0.0) };
        consider(score(fi + fj * phase, format!("pair-sum {i},{j}")));
        consider(score(fi - fj * phase, format!("pair-difference {i},{j}")));
    }
    let complex = frame.scalar_field() == ScalarField::Complex;
    for r in 0..RANDOM_CANDIDATES {
        let x = DVector::from_fn(m, |_, _| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = if complex { rng.sample(StandardNormal) } else { 0.0 };
            Complex64::new(re, im)
        });
        consider(score(x, format!("random {r}")));
    }

    let winner = match by_cap {
        Some(b) if b.in_cap >= k => b,
        _ => by_head.ok_or_else(|| Error::Internal("no bi-cap candidate".into()))?,
    };
    let mut survivors = winner.order[..k].to_vec();
    survivors.sort_unstable();
    let lower = bicap_cond_lower_bound(&frame.columns(&survivors), &winner.x)?;
    let mut report = AttackReport::new(frame, survivors, AttackMethod::Bicap, work, tol);
    report.certificate_cond_lower = Some(lower);
    report.seed = Some(seed);
    report.candidate = Some(winner.label);
    Ok(report)
}

/// Column sign patterns if every column is `s_j * (+-1, ..., +-1)` with
/// `s_j > 0`.
fn sign_pattern(frame: &Frame) -> Result<Vec<Vec<bool>>> {
    let f = frame.matrix();
    let (m, n) = f.shape();
    let mut positive = vec![vec![false; n]; m];
    for j in 0..n {
        let scale = f[(0, j)].re.abs();
        for r in 0..m {
            let z = f[(r, j)];
            if z.im != 0.0 || (z.re.abs() - scale).abs() > 1e-12 * scale || scale == 0.0 {
                return Err(Error::NotSignMatrix(format!("entry ({r}, {j}) = {z}")));
            }
            positive[r][j] = z.re > 0.0;
        }
    }
    Ok(positive)
}

pub fn is_sign_matrix(frame: &Frame) -> bool {
    sign_pattern(frame).is_ok()
}

/// For `K <= ceil(N/2)` columns of a `+-1` matrix: finds two rows and
/// `K` columns on which they are equal (or opposite) throughout, so the
/// survivors have two proportional rows and are rank deficient.
pub fn sign_attack(frame: &Frame, k: usize, tol: &Tolerances) -> Result<AttackReport> {
    let (m, n) = (frame.dim(), frame.len());
    check_k(k, n)?;
    let positive = sign_pattern(frame)?;
    if m < 2 {
        return Err(invalid("sign attack needs at least two rows"));
    }
    if k > n.div_ceil(2) {
        return Err(invalid(format!("sign attack needs K <= ceil(N/2) = {}, got {k}", n.div_ceil(2))));
    }
    for r1 in 0..m {
        for r2 in r1 + 1..m {
            let (agree, disagree): (Vec<usize>, Vec<usize>) =
                (0..n).partition(|&j| positive[r1][j] == positive[r2][j]);
            let class = if agree.len() >= disagree.len() { agree } else { disagree };
            if class.len() >= k {
                return Ok(AttackReport::new(frame, class[..k].to_vec(), AttackMethod::Sign, 1, tol));
            }
        }
    }
    Err(Error::Internal("no row pair has a sign class of size K".into()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CertifyMode {
    Exhaustive,
    Sampled,
    Attacks,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    /// Every `K`-column submatrix has `cond <= C`.
    Certified,
    /// A witness with `cond > C` was found.
    Refuted,
    /// No witness found; not a proof.
    NotRefuted,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertifyOptions {
    pub search: SearchOptions,
    /// Patterns drawn in sampled mode.
    pub trials: usize,
    pub seed: u64,
    /// `eps` of the Gaussian guarantee.
    pub eps: f64,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        Self {
            search: SearchOptions::default(),
            trials: 1000,
            seed: 0,
            eps: 0.01,
        }
    }
}

/// What the verdict covers: exactly `K = N - floor(pN)` survivors. Smaller
/// survivor sets are not covered, since deleting columns can make the
/// conditioning worse or better.
pub const VERDICT_SCOPE: &str = "every submatrix of exactly K = N - floor(pN) columns";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificateReport {
    pub m: usize,
    pub n: usize,
    pub p: f64,
    pub c: f64,
    pub k: usize,
    pub erased: usize,
    pub mode: CertifyMode,
    pub verdict: Verdict,
    pub scope: String,
    /// `K < M`: every survivor set is rank deficient.
    pub rank_deficient_by_counting: bool,
    /// Worst pattern found (the witness when refuted).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub worst: Option<AttackReport>,
    /// Every search run, in order.
    pub searches: Vec<AttackReport>,
    pub analytic: Vec<AnalyticCertificate>,
}

/// Empirical `(p, C)` check of `frame` plus the analytic certificates its
/// provenance supports.
pub fn certify_nerf(frame: &Frame, p: f64, c: f64, mode: CertifyMode, opts: &CertifyOptions) -> Result<CertificateReport> {
    let query = NerfQuery::new(p, c, frame.len())?;
    let (m, n, k) = (frame.dim(), frame.len(), query.survivors());
    let analytic = analytic_certificates(frame, &query, opts.eps)?;
    let mut report = CertificateReport {
        m,
        n,
        p,
        c,
        k,
        erased: query.erased(),
        mode,
        verdict: Verdict::Refuted,
        scope: VERDICT_SCOPE.into(),
        rank_deficient_by_counting: k < m,
        worst: None,
        searches: Vec::new(),
        analytic,
    };
    if k < m {
        return Ok(report);
    }
    let tol = &opts.search.tolerances;
    let searches = match mode {
        CertifyMode::Exhaustive => vec![exhaustive_worst_cond(frame, k, &opts.search)?],
        CertifyMode::Sampled => vec![sampled_worst_cond(frame, k, opts.trials, opts.seed, &opts.search)?],
        CertifyMode::Attacks => {
            let mut runs = vec![greedy_attack(frame, k, tol)?];
            if frame.unit_norm_deviation() <= tol.structural {
                runs.push(bicap_attack(frame, k, c, opts.seed, tol)?);
            }
            if m >= 2 && k <= n.div_ceil(2) && is_sign_matrix(frame) {
                runs.push(sign_attack(frame, k, tol)?);
            }
            runs
        }
    };
    let mut worst = 0;
    for (i, s) in searches.iter().enumerate() {
        if beats(s.cond, searches[worst].cond) {
            worst = i;
        }
    }
    let refuted = searches[worst].cond > c + CONDITION_SLACK;
    report.verdict = match (refuted, mode) {
        (true, _) => Verdict::Refuted,
        (false, CertifyMode::Exhaustive) => Verdict::Certified,
        (false, _) => Verdict::NotRefuted,
    };
    report.worst = Some(searches[worst].clone());
    report.searches = searches;
    Ok(report)
}

/// One use of the channel `y + e = F_K^* x + e`, decoded by least squares.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReconstructionReport {
    pub pattern: ErasurePattern,
    pub x: Vec<Complex64>,
    pub x_hat: Vec<Complex64>,
    /// The noise `e` added to the `K` measurements.
    pub noise: Vec<Complex64>,
    /// `||y|| / ||e||`, infinite without noise.
    #[serde(with = "extended_real")]
    pub snr: f64,
    /// `||x_hat - x|| / ||x||`.
    pub error_ratio: f64,
    pub cond: f64,
    /// `cond / snr`.
    pub cond_bound_ratio: f64,
}

/// Slack on `error_ratio <= cond / snr` before it is reported as violated.
pub const RECONSTRUCTION_SLACK: f64 = 1e-9;

pub fn simulate_channel(
    frame: &Frame,
    pattern: &ErasurePattern,
    x: &DVector<Complex64>,
    noise_scale: f64,
    seed: u64,
) -> Result<ReconstructionReport> {
    let mut rng = stream_rng(seed, Stream::Noise);
    simulate_channel_with(frame, pattern, x, noise_scale, &mut rng, &Tolerances::default())
}

fn gaussian_vector<R: Rng + ?Sized>(len: usize, field: ScalarField, rng: &mut R) -> DVector<Complex64> {
    DVector::from_fn(len, |_, _| match field {
        ScalarField::Real => Complex64::new(rng.sample(StandardNormal), 0.0),
        ScalarField::Complex => {
            let s = std::f64::consts::FRAC_1_SQRT_2;
            Complex64::new(rng.sample::<f64, _>(StandardNormal) * s, rng.sample::<f64, _>(StandardNormal) * s)
        }
    })
}

/// Noise entries are standard normal (complex parts variance 1/2 for complex
/// frames) times `noise_scale`.
pub fn simulate_channel_with<R: Rng + ?Sized>(
    frame: &Frame,
    pattern: &ErasurePattern,
    x: &DVector<Complex64>,
    noise_scale: f64,
    rng: &mut R,
    tol: &Tolerances,
) -> Result<ReconstructionReport> {
    let sub = erase(frame, pattern)?;
    let m = frame.dim();
    if x.len() != m {
        return Err(invalid(format!("signal has length {}, frame dimension is {m}", x.len())));
    }
    let x_norm = x.norm();
    if x_norm == 0.0 || !x_norm.is_finite() {
        return Err(invalid("signal must be nonzero and finite"));
    }
    if !(noise_scale >= 0.0 && noise_scale.is_finite()) {
        return Err(invalid(format!("noise scale must be finite and >= 0, got {noise_scale}")));
    }
    if pattern.len() < m {
        return Err(Error::RankDeficient);
    }
    let cond = sub.summary(tol).cond;
    if cond.is_infinite() {
        return Err(Error::RankDeficient);
    }
    let analysis = sub.matrix().adjoint();
    let y = &analysis * x;
    let e = gaussian_vector(pattern.len(), frame.scalar_field(), rng) * Complex64::new(noise_scale, 0.0);
    let received = &y + &e;

    let qr = analysis.qr();
    let rhs = qr.q().adjoint() * received;
    let x_hat = qr.r().solve_upper_triangular(&rhs).ok_or(Error::RankDeficient)?;

    let e_norm = e.norm();
    let snr = if e_norm == 0.0 { f64::INFINITY } else { y.norm() / e_norm };
    let error_ratio = (&x_hat - x).norm() / x_norm;
    let cond_bound_ratio = if snr.is_infinite() { 0.0 } else { cond / snr };
    if error_ratio > cond_bound_ratio + RECONSTRUCTION_SLACK {
        return Err(Error::Internal(format!(
            "reconstruction error {error_ratio:e} exceeds cond/R = {cond_bound_ratio:e}"
        )));
    }
    Ok(ReconstructionReport {
        pattern: pattern.clone(),
        x: x.iter().copied().collect(),
        x_hat: x_hat.iter().copied().collect(),
        noise: e.iter().copied().collect(),
        snr,
        error_ratio,
        cond,
        cond_bound_ratio,
    })
}

/// A random pattern and signal per trial; see [`simulate_trials`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelTrial {
    pub trial: usize,
    pub survivors: Vec<usize>,
    /// `None` when the drawn survivor set was rank deficient.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outcome: Option<ReconstructionReport>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelSummary {
    pub trials: Vec<ChannelTrial>,
    pub rank_deficient_draws: usize,
    pub max_error_ratio: f64,
    pub mean_error_ratio: f64,
    /// Largest `error_ratio - cond/R`; never above the slack.
    pub max_excess: f64,
}

/// `trials` channel uses at erasure rate `p`: uniform survivor sets from
/// the `Patterns` stream, Gaussian signals from the `Signal` stream and
/// noise from the `Noise` stream, all keyed by `seed`.
pub fn simulate_trials(frame: &Frame, p: f64, trials: usize, noise_scale: f64, seed: u64) -> Result<ChannelSummary> {
    let query = NerfQuery::new(p, 1.0, frame.len())?;
    let k = query.survivors();
    if k < frame.dim() {
        return Err(invalid(format!(
            "K = {k} survivors cannot determine a signal in dimension {}",
            frame.dim()
        )));
    }
    let mut patterns = stream_rng(seed, Stream::Patterns);
    let mut signals = stream_rng(seed, Stream::Signal);
    let mut noise = stream_rng(seed, Stream::Noise);
    let tol = Tolerances::default();
    let mut out = Vec::with_capacity(trials);
    let mut rank_deficient_draws = 0;
    for trial in 0..trials {
        let pattern = random_pattern(frame.len(), k, &mut patterns)?;
        let x = gaussian_vector(frame.dim(), frame.scalar_field(), &mut signals);
        let outcome = match simulate_channel_with(frame, &pattern, &x, noise_scale, &mut noise, &tol) {
            Ok(r) => Some(r),
            Err(Error::RankDeficient) => {
                rank_deficient_draws += 1;
                None
            }
            Err(e) => return Err(e),
        };
        out.push(ChannelTrial {
            trial,
            survivors: pattern.survivors().to_vec(),
            outcome,
        });
    }
    let reports: Vec<&ReconstructionReport> = out.iter().filter_map(|t| t.outcome.as_ref()).collect();
    let max_error_ratio = reports.iter().map(|r| r.error_ratio).fold(0.0, f64::max);
    let mean_error_ratio = if reports.is_empty() {
        0.0
    } else {
        reports.iter().map(|r| r.error_ratio).sum::<f64>() / reports.len() as f64
    };
    let max_excess = reports
        .iter()
        .map(|r| r.error_ratio - r.cond_bound_ratio)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(ChannelSummary {
        trials: out,
        rank_deficient_draws,
        max_error_ratio,
        mean_error_ratio,
        max_excess,
    })
}
