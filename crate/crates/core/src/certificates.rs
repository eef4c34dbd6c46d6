//! Closed-form robustness guarantees and the bounds they are built from.
//!
//! Every `max_p` function returns the largest erasure rate for which the
//! family is guaranteed to keep every surviving submatrix at condition
//! number `<= C`. All of them are nondecreasing in `C` and vanish as
//! `C -> 1+`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::constructions::Construction;
use crate::error::{invalid, Error, Result};
use crate::spectral::{squared_ip_distribution, Frame, ScalarField, SquaredIpDistribution};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FormulaId {
    Welch,
    GaussianUnionBound,
    GaussianFailureProbability,
    GaussianMaxErasureRate,
    SingerEtf,
    AsymptoticEtf,
    MutuallyUnbiased,
    GroupSimplex,
    DeltaToCondition,
    EtfDelta,
    DistributionDelta,
    BicapLemma,
    BicapThreshold,
}

/// A checked inequality: `holds` iff `margin >= 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundResult {
    pub holds: bool,
    pub margin: f64,
    pub bound_value: f64,
    pub formula_id: FormulaId,
}

impl BoundResult {
    fn from_margin(margin: f64, bound_value: f64, formula_id: FormulaId) -> Self {
        Self {
            holds: margin >= 0.0,
            margin,
            bound_value,
            formula_id,
        }
    }

    /// `p <= max_p`.
    pub fn rate(p: f64, max_p: f64, formula_id: FormulaId) -> Self {
        Self::from_margin(max_p - p, max_p, formula_id)
    }
}

/// Columns the adversary may erase at rate `p`: `floor(pN)`.
///
/// A relative slack of `1e-9` absorbs rates given as rounded decimals of
/// exact fractions (`p = 1/7` with `N = 7` erases one column).
pub fn erased_count(n: usize, p: f64) -> usize {
    let e = (p * n as f64 * (1.0 + 1e-9)).floor();
    (e.max(0.0) as usize).min(n)
}

/// Erasure rate and condition target, with the surviving count
/// `K = N - floor(pN)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NerfQuery {
    pub p: f64,
    pub c: f64,
    pub n: usize,
}

impl NerfQuery {
    pub fn new(p: f64, c: f64, n: usize) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(invalid(format!("erasure rate must lie in [0, 1], got {p}")));
        }
        if c.is_nan() || c < 1.0 {
            return Err(invalid(format!("condition target must be >= 1, got {c}")));
        }
        Ok(Self { p, c, n })
    }

    pub fn erased(&self) -> usize {
        erased_count(self.n, self.p)
    }

    pub fn survivors(&self) -> usize {
        self.n - self.erased()
    }

    /// The erased fraction actually realized, `floor(pN) / N`.
    pub fn effective_rate(&self) -> f64 {
        self.erased() as f64 / self.n as f64
    }
}

fn check_c(c: f64) -> Result<()> {
    if c.is_nan() || c < 1.0 {
        return Err(invalid(format!("condition target must be >= 1, got {c}")));
    }
    Ok(())
}

/// `sqrt((N - M) / (M (N - 1)))`, the least possible coherence of `N` unit
/// vectors in dimension `M`.
pub fn welch_bound(m: usize, n: usize) -> Result<f64> {
    if m == 0 || n < m {
        return Err(invalid(format!("Welch bound needs N >= M >= 1, got M = {m}, N = {n}")));
    }
    if n == 1 {
        return Ok(0.0);
    }
    Ok((((n - m) as f64) / (m as f64 * (n - 1) as f64)).sqrt())
}

/// `2 p (1 - ln p)`, extended by continuity to 0 at `p = 0`.
fn union_exponent(p: f64) -> f64 {
    if p == 0.0 {
        0.0
    } else {
        2.0 * p * (1.0 - p.ln())
    }
}

/// Sufficient condition for an `M x N` standard Gaussian matrix to be a
/// `(p, C)`-robust frame except with probability `2 e^{-N eps / 2}`:
///
/// `sqrt(M/N) <= (C-1)/(C+1) sqrt(1-p) - sqrt(eps + 2p(1 - ln p))`.
///
/// `bound_value` is the right-hand side, `margin` its excess over
/// `sqrt(M/N)`.
pub fn gaussian_nerf_condition(m: usize, n: usize, p: f64, c: f64, eps: f64) -> Result<BoundResult> {
    if m == 0 || n < m {
        return Err(invalid(format!("needs N >= M >= 1, got M = {m}, N = {n}")));
    }
    if !(0.0..1.0).contains(&p) {
        return Err(invalid(format!("erasure rate must lie in [0, 1), got {p}")));
    }
    if c.is_nan() || c <= 1.0 || eps.is_nan() || eps <= 0.0 {
        return Err(invalid("needs C > 1 and eps > 0"));
    }
    let rhs = (c - 1.0) / (c + 1.0) * (1.0 - p).sqrt() - (eps + union_exponent(p)).sqrt();
    let lhs = (m as f64 / n as f64).sqrt();
    Ok(BoundResult::from_margin(rhs - lhs, rhs, FormulaId::GaussianUnionBound))
}

/// `2 e^{-N eps / 2}`.
pub fn gaussian_failure_probability(n: usize, eps: f64) -> f64 {
    2.0 * (-(n as f64) * eps / 2.0).exp()
}

/// Root of `sqrt(1 - p) = sqrt(2 p (1 - ln p))`, the supremum of rates the
/// Gaussian guarantee can reach at any redundancy and condition number.
pub fn max_gaussian_erasure_rate() -> f64 {
    let h = |p: f64| (1.0 - p).sqrt() - union_exponent(p).sqrt();
    let (mut lo, mut hi) = (1e-3, 0.5);
    debug_assert!(h(lo) > 0.0 && h(hi) < 0.0);
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if h(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// `1/2 - C^2 / (C^4 + 1)` for the `(q+1) x (q^2+q+1)` Singer ETF.
pub fn etf_nerf_max_p(c: f64) -> Result<f64> {
    check_c(c)?;
    if c.is_infinite() {
        return Ok(0.5);
    }
    let c2 = c * c;
    Ok(0.5 - c2 / (c2 * c2 + 1.0))
}

/// `alpha (C^2-1)^2 / (alpha (C^2-1)^2 + (C^2+1)^2)` for any ETF with
/// `(N - 1) / (M (M - 1)) >= alpha`.
pub fn asymp_etf_nerf_max_p(alpha: f64, c: f64) -> Result<f64> {
    check_c(c)?;
    if alpha.is_nan() || alpha <= 0.0 {
        return Err(invalid(format!("alpha must be positive, got {alpha}")));
    }
    let ratio = squared_ratio(c);
    Ok(alpha * ratio / (alpha * ratio + 1.0))
}

/// `((C^2 - 1) / (C^2 + 1))^2`, computed stably for large `C`.
fn squared_ratio(c: f64) -> f64 {
    if c.is_infinite() {
        return 1.0;
    }
    let c2 = c * c;
    let r = (c2 - 1.0) / (c2 + 1.0);
    r * r
}

/// `(C^2-1)^2 / ((C^2+1)^2 (M+1))` for `M` mutually unbiased bases.
pub fn mub_nerf_max_p(m: usize, c: f64) -> Result<f64> {
    check_c(c)?;
    if m < 2 {
        return Err(invalid(format!("needs M >= 2, got {m}")));
    }
    Ok(squared_ratio(c) / (m + 1) as f64)
}

/// Same rate as [`mub_nerf_max_p`], for the `M x binom(M+1, 2)` two-level
/// simplex group frame; the guarantee needs `M >= 7`.
pub fn group_nerf_max_p(m: usize, c: f64) -> Result<f64> {
    check_c(c)?;
    if m < 7 {
        return Err(invalid(format!("group frame guarantee needs M >= 7, got {m}")));
    }
    Ok(squared_ratio(c) / (m + 1) as f64)
}

/// Columns the MUB guarantee lets an adversary erase: `p M^2`.
pub fn mub_erasure_budget(m: usize, c: f64) -> Result<f64> {
    Ok(mub_nerf_max_p(m, c)? * (m * m) as f64)
}

/// Columns the group-frame guarantee lets an adversary erase:
/// `p binom(M+1, 2)`.
pub fn group_erasure_budget(m: usize, c: f64) -> Result<f64> {
    Ok(group_nerf_max_p(m, c)? * (m * (m + 1) / 2) as f64)
}

/// `sqrt((1 + delta) / (1 - delta))`, `+inf` for `delta >= 1`.
///
/// With `delta = max_m |(M/K) lambda_m - 1|` this bounds the condition
/// number of the survivors.
pub fn delta_to_cond_bound(delta: f64) -> f64 {
    let delta = delta.max(0.0);
    if delta >= 1.0 {
        f64::INFINITY
    } else {
        ((1.0 + delta) / (1.0 - delta)).sqrt()
    }
}

/// Deviation bound for any `K` columns of an `M x N` ETF:
/// `sqrt(M (M-1) (N-K) / (K (N-1)))`.
pub fn etf_delta_bound(m: usize, n: usize, k: usize) -> Result<f64> {
    if k == 0 || k > n || n < 2 || m == 0 {
        return Err(invalid(format!("needs 1 <= K <= N, N >= 2; got M = {m}, N = {n}, K = {k}")));
    }
    let (m, n, k) = (m as f64, n as f64, k as f64);
    Ok((m * (m - 1.0) * (n - k) / (k * (n - 1.0))).sqrt())
}

/// `sqrt(max(0, M^2 (mean of the K largest d - 1/M)))`, a deviation bound
/// valid for every `K`-column submatrix of a unit-norm frame.
pub fn delta_from_distribution(d: &SquaredIpDistribution, m: usize, k: usize) -> Result<f64> {
    if k == 0 || k > d.d.len() {
        return Err(invalid(format!("K = {k} outside 1..={}", d.d.len())));
    }
    let m = m as f64;
    Ok((m * m * (d.head_mean(k) - 1.0 / m)).max(0.0).sqrt())
}

/// Lower bound `sqrt((M-1) ||F^* x||^2 / (K - ||F^* x||^2))` on the
/// condition number of a matrix with `K` unit-norm columns, for any unit
/// `x`. Returns `+inf` when every column is parallel to `x`.
pub fn bicap_cond_lower_bound(columns: &DMatrix<Complex64>, x: &DVector<Complex64>) -> Result<f64> {
    let (m, k) = columns.shape();
    if x.len() != m {
        return Err(invalid(format!("x has length {}, frame dimension is {m}", x.len())));
    }
    let norm = x.norm();
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::NotUnitVector { norm });
    }
    let deviation = columns
        .column_iter()
        .map(|c| (c.norm() - 1.0).abs())
        .fold(0.0, f64::max);
    if deviation > 1e-10 {
        return Err(Error::NotUnitNorm { deviation });
    }
    if m == 1 {
        return Ok(1.0);
    }
    let s = (columns.adjoint() * x).norm_squared();
    let rest = k as f64 - s;
    if rest <= 1e-12 * k as f64 {
        return Ok(f64::INFINITY);
    }
    Ok(((m - 1) as f64 * s / rest).sqrt())
}

/// Standard normal upper tail `Q(t) = (2 pi)^{-1/2} int_t^inf e^{-u^2/2} du`.
pub fn q_function(t: f64) -> f64 {
    0.5 * libm::erfc(t / std::f64::consts::SQRT_2)
}

/// `1 - 2 Q(C)`: for real frames, erasure rates whose liminf exceeds this
/// cannot keep condition `<= C` as the dimension grows.
pub fn asymptotic_erasure_threshold(c: f64) -> Result<f64> {
    if c.is_nan() || c < 0.0 {
        return Err(invalid(format!("C must be nonnegative, got {c}")));
    }
    Ok(1.0 - 2.0 * q_function(c))
}

/// A closed-form guarantee applied to a specific frame.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalyticCertificate {
    /// Rate check against the family's `max_p` (or the Gaussian
    /// inequality).
    pub bound: BoundResult,
    /// Condition bound from the deviation chain at this `K`, when the
    /// family provides one.
    #[serde(default, skip_serializing_if = "Option::is_none", with = "crate::spectral::extended_real_opt")]
    pub cond_bound: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cond_bound_formula: Option<FormulaId>,
    /// For probabilistic guarantees: chance the frame is not robust.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure_probability: Option<f64>,
}

/// Certificates applicable to `frame` by its provenance, evaluated at the
/// realized erasure count `floor(pN)`. `eps` only enters the Gaussian
/// guarantee. Frames outside the four families get none.
pub fn analytic_certificates(frame: &Frame, query: &NerfQuery, eps: f64) -> Result<Vec<AnalyticCertificate>> {
    let (m, n, k) = (frame.dim(), frame.len(), query.survivors());
    let p = query.effective_rate();
    let c = query.c;
    let prov = frame.provenance();
    let mut out = Vec::new();
    let distribution_chain = |formula| -> Result<AnalyticCertificate> {
        let delta = delta_from_distribution(&squared_ip_distribution(frame), m, k)?;
        Ok(AnalyticCertificate {
            bound: BoundResult::rate(p, 0.0, formula),
            cond_bound: Some(delta_to_cond_bound(delta)),
            cond_bound_formula: Some(FormulaId::DistributionDelta),
            failure_probability: None,
        })
    };
    match prov.construction {
        Construction::SingerEtf { .. } if k >= 1 => {
            out.push(AnalyticCertificate {
                bound: BoundResult::rate(p, etf_nerf_max_p(c)?, FormulaId::SingerEtf),
                cond_bound: Some(delta_to_cond_bound(etf_delta_bound(m, n, k)?)),
                cond_bound_formula: Some(FormulaId::EtfDelta),
                failure_probability: None,
            });
        }
        Construction::Mub { .. } if k >= 1 => {
            let mut cert = distribution_chain(FormulaId::MutuallyUnbiased)?;
            cert.bound = BoundResult::rate(p, mub_nerf_max_p(m, c)?, FormulaId::MutuallyUnbiased);
            out.push(cert);
        }
        Construction::GroupSimplex { .. } if prov.certified_range && k >= 1 => {
            let mut cert = distribution_chain(FormulaId::GroupSimplex)?;
            cert.bound = BoundResult::rate(p, group_nerf_max_p(m, c)?, FormulaId::GroupSimplex);
            out.push(cert);
        }
        Construction::Gaussian {
            scalar_field: ScalarField::Real,
            ..
        } if p < 1.0 && c > 1.0 => {
            out.push(AnalyticCertificate {
                bound: gaussian_nerf_condition(m, n, p, c, eps)?,
                cond_bound: None,
                cond_bound_formula: None,
                failure_probability: Some(gaussian_failure_probability(n, eps)),
            });
        }
        _ => {}
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::{mub_frame, simplex_group_frame, singer_etf};

    /// Adaptive Simpson on `[a, b]` to relative tolerance `tol`.
    fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
        fn simpson(f: &dyn Fn(f64) -> f64, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
            let m = 0.5 * (a + b);
            let fm = f(m);
            (m, fm, (b - a) / 6.0 * (fa + 4.0 * fm + fb))
        }
        #[allow(clippy::too_many_arguments)]
        fn recurse(f: &dyn Fn(f64) -> f64, a: f64, fa: f64, b: f64, fb: f64, whole: f64, m: f64, fm: f64, tol: f64, depth: u32) -> f64 {
            let (lm, flm, left) = simpson(f, a, fa, m, fm);
            let (rm, frm, right) = simpson(f, m, fm, b, fb);
            let delta = left + right - whole;
            if depth == 0 || delta.abs() <= 15.0 * tol {
                return left + right + delta / 15.0;
            }
            recurse(f, a, fa, m, fm, left, lm, flm, tol / 2.0, depth - 1)
                + recurse(f, m, fm, b, fb, right, rm, frm, tol / 2.0, depth - 1)
        }
        let (fa, fb) = (f(a), f(b));
        let (m, fm, whole) = simpson(f, a, fa, b, fb);
        recurse(f, a, fa, b, fb, whole, m, fm, tol * whole.abs().max(1e-300), 60)
    }

    /// `Q(t) = e^{-t^2/2} / sqrt(2 pi) * int_0^inf e^{-t s - s^2/2} ds`.
    fn q_by_quadrature(t: f64) -> f64 {
        let inner = |s: f64| (-t * s - 0.5 * s * s).exp();
        let upper = if t > 0.0 { (80.0 / t).min(14.0) } else { 14.0 };
        let integral = adaptive_simpson(&inner, 0.0, upper, 1e-14);
        (-0.5 * t * t).exp() / (2.0 * std::f64::consts::PI).sqrt() * integral
    }

    #[test]
    fn q_function_matches_quadrature() {
        for i in 0..=100 {
            let t = i as f64 * 0.1;
            let (ours, oracle) = (q_function(t), q_by_quadrature(t));
            assert!(((ours - oracle) / oracle).abs() < 1e-12, "t = {t}: {ours:e} vs {oracle:e}");
        }
    }

    #[test]
    fn threshold_examples() {
        assert_eq!(q_function(0.0), 0.5);
        assert_eq!(asymptotic_erasure_threshold(0.0).unwrap(), 0.0);
        // Reference: 1 - 2Q(1) = erf(1/sqrt 2) = 0.68268949213708589717...
        assert!((asymptotic_erasure_threshold(1.0).unwrap() - 0.682_689_492_137_085_9).abs() < 1e-15);
        assert!(asymptotic_erasure_threshold(40.0).unwrap() == 1.0);
        assert!(asymptotic_erasure_threshold(-1.0).is_err());
    }

    #[test]
    fn welch_examples() {
        assert!((welch_bound(3, 7).unwrap() - 2f64.sqrt() / 3.0).abs() < 1e-15);
        assert_eq!(welch_bound(4, 4).unwrap(), 0.0);
        assert!((welch_bound(5, 25).unwrap() - 1.0 / 6f64.sqrt()).abs() < 1e-15);
        assert!(welch_bound(5, 4).is_err());
    }

    #[test]
    fn gaussian_condition_examples() {
        let r = gaussian_nerf_condition(100, 500, 0.01, 10.0, 0.01).unwrap();
        assert!(r.holds);
        // 0.0174340602858205... by 40-digit evaluation.
        assert!((r.margin - 0.017_434_060_285_820_55).abs() < 1e-14);
        assert_eq!(r.formula_id, FormulaId::GaussianUnionBound);

        let p0 = gaussian_nerf_condition(3, 7, 0.0, 1e12, 1e-15).unwrap();
        assert!(p0.holds && p0.margin.is_finite());

        for c in [1.5, 10.0, 1e6] {
            assert!(!gaussian_nerf_condition(50, 100, 0.1460, c, 1e-6).unwrap().holds);
        }
        assert!(gaussian_nerf_condition(3, 7, 1.0, 2.0, 0.1).is_err());
    }

    #[test]
    fn failure_probability_examples() {
        assert!((gaussian_failure_probability(100, 0.1) - 0.013_475_893_998_170_934).abs() < 1e-15);
        assert!((gaussian_failure_probability(500, 0.01) - 0.164_169_997_247_797_6).abs() < 1e-15);
        assert!(gaussian_failure_probability(1 << 20, 0.1) < 1e-300);
    }

    #[test]
    fn gaussian_max_rate() {
        let p = max_gaussian_erasure_rate();
        // 0.14603064962814856... by 40-digit root finding.
        assert!((p - 0.146_030_649_628_148_57).abs() < 1e-10);
        assert!((0.14595..=0.14605).contains(&p));
        assert_eq!(format!("{p:.4}"), "0.1460");
        let h = |p: f64| (1.0 - p).sqrt() - (2.0 * p * (1.0 - p.ln())).sqrt();
        assert!(h(0.1) > 0.0 && h(0.2) < 0.0);
    }

    #[test]
    fn etf_rates() {
        let p = etf_nerf_max_p(10.0).unwrap();
        assert!((p - 0.490_000_999_900_01).abs() < 1e-15);
        assert_eq!(format!("{p:.5}"), "0.49000");
        assert!((etf_nerf_max_p(1e8).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(etf_nerf_max_p(f64::INFINITY).unwrap(), 0.5);
        assert!(etf_nerf_max_p(1.0).unwrap().abs() < 1e-15);
        assert!(etf_nerf_max_p(0.5).is_err());
    }

    #[test]
    fn asymptotic_etf_agrees_with_singer_rate() {
        for i in 0..200 {
            let c = 1.0 + i as f64 * 0.37;
            let a = asymp_etf_nerf_max_p(1.0, c).unwrap();
            let b = etf_nerf_max_p(c).unwrap();
            assert!((a - b).abs() < 1e-14, "C = {c}");
        }
        let big = asymp_etf_nerf_max_p(1e9, 10.0).unwrap();
        assert!(big < 1.0 && big > 0.999_999);
        assert!(asymp_etf_nerf_max_p(1.0, 1.0).unwrap() == 0.0);
        assert!(asymp_etf_nerf_max_p(0.0, 2.0).is_err());
    }

    #[test]
    fn mub_and_group_rates() {
        assert!((mub_nerf_max_p(5, 10.0).unwrap() - 0.160_131_359_670_620_53).abs() < 1e-15);
        assert!((mub_nerf_max_p(5, 1.71).unwrap() - 0.040_070_420_169_783_82).abs() < 1e-15);
        assert!((group_nerf_max_p(7, 10.0).unwrap() - 0.120_098_519_752_965_4).abs() < 1e-15);
        assert!(group_nerf_max_p(6, 10.0).is_err());
        assert!(mub_nerf_max_p(1, 10.0).is_err());
        assert_eq!(mub_nerf_max_p(5, 1.0).unwrap(), 0.0);
        assert_eq!(group_nerf_max_p(9, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn erasure_budgets() {
        for m in [101, 1009, 10007] {
            let mub = mub_erasure_budget(m, 10.0).unwrap() / m as f64;
            let grp = group_erasure_budget(m, 10.0).unwrap() / m as f64;
            assert!((mub - 0.96).abs() / 0.96 < 0.01, "{m}: {mub}");
            assert!((grp - 0.48).abs() / 0.48 < 0.01, "{m}: {grp}");
        }
    }

    #[test]
    fn rates_are_monotone_in_c() {
        let cs: Vec<f64> = (0..300).map(|i| 1.0 + 0.05 * i as f64).collect();
        for w in cs.windows(2) {
            let (a, b) = (w[0], w[1]);
            assert!(etf_nerf_max_p(a).unwrap() <= etf_nerf_max_p(b).unwrap());
            assert!(asymp_etf_nerf_max_p(0.3, a).unwrap() <= asymp_etf_nerf_max_p(0.3, b).unwrap());
            assert!(mub_nerf_max_p(5, a).unwrap() <= mub_nerf_max_p(5, b).unwrap());
            assert!(group_nerf_max_p(8, a).unwrap() <= group_nerf_max_p(8, b).unwrap());
            assert!(asymptotic_erasure_threshold(a).unwrap() <= asymptotic_erasure_threshold(b).unwrap());
        }
    }

    #[test]
    fn delta_to_cond_examples() {
        assert_eq!(delta_to_cond_bound(0.0), 1.0);
        assert!((delta_to_cond_bound(0.5) - 3f64.sqrt()).abs() < 1e-15);
        assert!(delta_to_cond_bound(1.0).is_infinite());
        for c in [1.5, 2.0, 10.0] {
            let delta = (c * c - 1.0) / (c * c + 1.0);
            assert!((delta_to_cond_bound(delta) - c).abs() < 1e-12);
        }
    }

    #[test]
    fn distribution_delta_reproduces_closed_forms() {
        // MUB: delta^2 <= M (M^2 - K) / K.
        let mub = squared_ip_distribution(&mub_frame(5).unwrap());
        for k in 21..=25 {
            let got = delta_from_distribution(&mub, 5, k).unwrap();
            let want = 5.0 * (25.0 - k as f64) / k as f64;
            assert!((got * got - want).abs() < 1e-12, "K = {k}");
        }
        // ETF: matches sqrt(p M (M-1) / ((1-p)(N-1))) with K = (1-p) N.
        let etf = squared_ip_distribution(&singer_etf(3).unwrap());
        for k in 1..=13 {
            let p = 1.0 - k as f64 / 13.0;
            let want = p * 12.0 / ((1.0 - p) * 12.0);
            assert!((delta_from_distribution(&etf, 4, k).unwrap().powi(2) - want).abs() < 1e-12);
            assert!((etf_delta_bound(4, 13, k).unwrap().powi(2) - want).abs() < 1e-12);
        }
        let grp = squared_ip_distribution(&simplex_group_frame(7).unwrap());
        let full = delta_from_distribution(&grp, 7, 28).unwrap();
        assert!(full.is_finite() && (0.0..1e-6).contains(&full));
        assert!(delta_from_distribution(&grp, 7, 29).is_err());
    }

    #[test]
    fn bicap_examples() {
        let basis = DMatrix::<Complex64>::identity(4, 4);
        let e1 = basis.column(0).into_owned();
        assert!((bicap_cond_lower_bound(&basis, &e1).unwrap() - 1.0).abs() < 1e-15);

        let copies = DMatrix::from_fn(3, 5, |i, _| Complex64::new(if i == 0 { 1.0 } else { 0.0 }, 0.0));
        let x = copies.column(0).into_owned();
        assert!(bicap_cond_lower_bound(&copies, &x).unwrap().is_infinite());

        let not_unit = &x * Complex64::new(2.0, 0.0);
        assert!(matches!(bicap_cond_lower_bound(&copies, &not_unit), Err(Error::NotUnitVector { .. })));
    }

    #[test]
    fn certificates_follow_provenance() {
        let etf = singer_etf(2).unwrap();
        let q = NerfQuery::new(1.0 / 7.0, 2.0, 7).unwrap();
        assert_eq!(q.erased(), 1);
        let certs = analytic_certificates(&etf, &q, 0.01).unwrap();
        assert_eq!(certs.len(), 1);
        assert!(certs[0].bound.holds);
        assert_eq!(certs[0].bound.formula_id, FormulaId::SingerEtf);
        // delta = sqrt(1/6), cond bound ~ 1.54.
        let cb = certs[0].cond_bound.unwrap();
        assert!((cb - delta_to_cond_bound((1.0f64 / 6.0).sqrt())).abs() < 1e-12 && cb < 1.55);

        let custom = Frame::custom(DMatrix::identity(3, 3), "basis").unwrap();
        assert!(analytic_certificates(&custom, &NerfQuery::new(0.0, 1.0, 3).unwrap(), 0.01).unwrap().is_empty());

        let small_group = simplex_group_frame(5).unwrap();
        let q = NerfQuery::new(0.0, 10.0, small_group.len()).unwrap();
        assert!(analytic_certificates(&small_group, &q, 0.01).unwrap().is_empty());
    }

    #[test]
    fn erased_count_rounding() {
        assert_eq!(erased_count(7, 1.0 / 7.0), 1);
        assert_eq!(erased_count(13, 2.0 / 13.0), 2);
        assert_eq!(erased_count(25, 0.04), 1);
        assert_eq!(erased_count(500, 0.01), 5);
        assert_eq!(erased_count(10, 0.19), 1);
        assert_eq!(erased_count(10, 0.0), 0);
        assert_eq!(erased_count(10, 1.0), 10);
    }
}
