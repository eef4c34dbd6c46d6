//! Dense frame kernel: Gram matrices, partial frame operators, condition
//! numbers and inner-product diagnostics.
//!
//! Inner products are conjugate-linear in the second argument,
//! `<u, v> = sum_k u_k conj(v_k)`, so the Gram matrix is `F^* F` with entry
//! `(i, j) = <f_j, f_i>`. Every certified quantity depends only on moduli.

mod eigen;
mod frame;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::erasure::ErasurePattern;
use crate::error::{Error, Result};

pub use eigen::{hermitian_eigen, singular_values, HermitianEigen};
pub use frame::{Frame, Provenance, ScalarField};

/// Eigenvalue ratio below which the Gram route is not trusted and singular
/// values are recomputed from the explicit submatrix.
const REFINE_RATIO: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Absolute tolerance for tightness, equiangularity and distribution
    /// matching.
    pub structural: f64,
    /// `sigma_min < rank * sigma_max` means rank deficient.
    pub rank: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            structural: 1e-10,
            rank: 1e-12,
        }
    }
}

/// Extreme singular values and spectrum of `F_K F_K^*`.
///
/// `cond` is `f64::INFINITY` exactly when the submatrix is rank deficient at
/// the rank tolerance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralSummary {
    pub sigma_min: f64,
    pub sigma_max: f64,
    #[serde(with = "extended_real")]
    pub cond: f64,
    /// `M` eigenvalues of the partial frame operator, nonincreasing.
    pub eigenvalues: Vec<f64>,
}

impl SpectralSummary {
    pub fn is_rank_deficient(&self) -> bool {
        self.cond.is_infinite()
    }

    /// `max_m |(M/K) lambda_m - 1|` for a `K`-column submatrix.
    pub fn delta(&self, k: usize) -> f64 {
        let m = self.eigenvalues.len() as f64;
        self.eigenvalues
            .iter()
            .map(|&l| (m / k as f64 * l - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

/// Serde helper writing `+inf` as the string `"inf"`.
pub mod extended_real {
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        if x.is_infinite() && *x > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(*x)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Str(String),
        }
        match Repr::deserialize(d)? {
            Repr::Num(x) => Ok(x),
            Repr::Str(s) if s == "inf" => Ok(f64::INFINITY),
            Repr::Str(s) => Err(de::Error::custom(format!("expected number or \"inf\", got {s:?}"))),
        }
    }
}

/// [`extended_real`] for optional fields.
pub mod extended_real_opt {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
        match x {
            Some(v) => super::extended_real::serialize(v, s),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
        #[derive(Deserialize)]
        struct Wrap(#[serde(with = "super::extended_real")] f64);
        Ok(Option::<Wrap>::deserialize(d)?.map(|w| w.0))
    }
}

/// The `N x N` Gram matrix `F^* F`.
pub fn gram(frame: &Frame) -> DMatrix<Complex64> {
    frame.matrix().adjoint() * frame.matrix()
}

pub fn spectral_summary(frame: &Frame, pattern: Option<&ErasurePattern>) -> Result<SpectralSummary> {
    spectral_summary_with(frame, pattern, &Tolerances::default())
}

pub fn spectral_summary_with(
    frame: &Frame,
    pattern: Option<&ErasurePattern>,
    tol: &Tolerances,
) -> Result<SpectralSummary> {
    match pattern {
        None => Ok(summarize_columns(frame.matrix(), tol.rank)),
        Some(p) => {
            if p.is_empty() {
                return Err(Error::EmptyPattern);
            }
            p.check_against(frame)?;
            Ok(summarize_columns(&frame.columns(p.survivors()), tol.rank))
        }
    }
}

/// Summary of an explicit `M x K` matrix.
pub fn summarize_columns(sub: &DMatrix<Complex64>, rank_tol: f64) -> SpectralSummary {
    let op = sub * sub.adjoint();
    summarize_operator(&op, rank_tol, || sub.clone())
}

/// Summary from the partial frame operator, falling back to one-sided
/// Jacobi on the explicit submatrix when the spectrum is too spread for the
/// squared route to resolve `sigma_min`.
pub(crate) fn summarize_operator(
    op: &DMatrix<Complex64>,
    rank_tol: f64,
    explicit: impl FnOnce() -> DMatrix<Complex64>,
) -> SpectralSummary {
    let eig = hermitian_eigen(op, false);
    let lmax = eig.values.first().copied().unwrap_or(0.0).max(0.0);
    let lmin = eig.values.last().copied().unwrap_or(0.0);
    let eigenvalues: Vec<f64> = if lmax > 0.0 && lmin > REFINE_RATIO * lmax {
        eig.values
    } else {
        let sub = explicit();
        let mut sv = singular_values(&sub.adjoint());
        sv.resize(op.nrows(), 0.0);
        sv.iter().map(|s| s * s).collect()
    };
    let eigenvalues: Vec<f64> = eigenvalues.into_iter().map(|l| l.max(0.0)).collect();
    let sigma_max = eigenvalues.first().copied().unwrap_or(0.0).sqrt();
    let sigma_min = eigenvalues.last().copied().unwrap_or(0.0).sqrt();
    let cond = if sigma_max > 0.0 && sigma_min > rank_tol * sigma_max {
        sigma_max / sigma_min
    } else {
        f64::INFINITY
    };
    SpectralSummary {
        sigma_min,
        sigma_max,
        cond,
        eigenvalues,
    }
}

/// Worst-case coherence `max_{n != n'} |<f_n, f_n'>|`.
pub fn coherence(frame: &Frame) -> Result<f64> {
    coherence_with(frame, &Tolerances::default())
}

pub fn coherence_with(frame: &Frame, tol: &Tolerances) -> Result<f64> {
    let deviation = frame.unit_norm_deviation();
    if deviation > tol.structural {
        return Err(Error::NotUnitNorm { deviation });
    }
    let g = gram(frame);
    let n = frame.len();
    let mut mu: f64 = 0.0;
    for j in 0..n {
        for i in 0..j {
            mu = mu.max(g[(i, j)].norm());
        }
    }
    Ok(mu)
}

/// Sorted squared inner products of one frame vector against all of them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SquaredIpDistribution {
    /// `N` nonincreasing values, self inner product included. When rows
    /// differ this is the entrywise maximum over the sorted rows.
    pub d: Vec<f64>,
    /// Signed inner products of the first vector, nonincreasing, present
    /// when they are all real.
    pub signed: Option<Vec<f64>>,
    pub identical_rows: bool,
}

impl SquaredIpDistribution {
    /// Mean of the `k` largest entries of `d`.
    pub fn head_mean(&self, k: usize) -> f64 {
        self.d[..k].iter().sum::<f64>() / k as f64
    }
}

pub fn squared_ip_distribution(frame: &Frame) -> SquaredIpDistribution {
    squared_ip_distribution_with(frame, &Tolerances::default())
}

pub fn squared_ip_distribution_with(frame: &Frame, tol: &Tolerances) -> SquaredIpDistribution {
    let g = gram(frame);
    let n = frame.len();
    let sorted_row = |i: usize| {
        let mut row: Vec<f64> = (0..n).map(|j| g[(i, j)].norm_sqr()).collect();
        row.sort_by(|a, b| b.total_cmp(a));
        row
    };
    let mut d = sorted_row(0);
    let mut identical_rows = true;
    for i in 1..n {
        let row = sorted_row(i);
        for (env, x) in d.iter_mut().zip(&row) {
            if (*env - x).abs() > tol.structural {
                identical_rows = false;
            }
            *env = env.max(*x);
        }
    }
    let signed = (0..n)
        .all(|j| g[(0, j)].im.abs() <= tol.structural)
        .then(|| {
            let mut v: Vec<f64> = (0..n).map(|j| g[(0, j)].re).collect();
            v.sort_by(|a, b| b.total_cmp(a));
            v
        });
    SquaredIpDistribution {
        d,
        signed,
        identical_rows,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::certificates::welch_bound;
    use crate::constructions::{mub_frame, simplex, singer_etf};

    fn identity_frame(m: usize) -> Frame {
        Frame::custom(DMatrix::identity(m, m), "identity").unwrap()
    }

    #[test]
    fn gram_of_orthonormal_basis_is_identity() {
        let g = gram(&identity_frame(4));
        assert!((g - DMatrix::<Complex64>::identity(4, 4)).camax() < 1e-15);
    }

    #[test]
    fn gram_of_singer_etf_is_equiangular() {
        let f = singer_etf(2).unwrap();
        let g = gram(&f);
        let w = (2.0f64).sqrt() / 3.0;
        for i in 0..7 {
            for j in 0..7 {
                if i != j {
                    assert!((g[(i, j)].norm() - w).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn gram_of_simplex() {
        for m in 1..8 {
            let g = gram(&simplex(m).unwrap());
            let expected = DMatrix::from_fn(m + 1, m + 1, |i, j| {
                let v = if i == j { 1.0 } else { -1.0 / m as f64 };
                Complex64::new(v, 0.0)
            });
            assert!((g - expected).camax() < 1e-10);
        }
    }

    #[test]
    fn tight_frame_has_unit_condition() {
        let f = singer_etf(3).unwrap();
        let s = spectral_summary(&f, None).unwrap();
        assert!((s.cond - 1.0).abs() < 1e-12);
        for l in &s.eigenvalues {
            assert!((l - 13.0 / 4.0).abs() < 1e-10);
        }
    }

    #[test]
    fn deleting_duplicate_restores_unit_condition() {
        let mut m = DMatrix::<Complex64>::identity(4, 5);
        m[(0, 4)] = Complex64::new(1.0, 0.0);
        let f = Frame::custom(m, "basis+dup").unwrap();
        let full = spectral_summary(&f, None).unwrap();
        assert!((full.cond - 2f64.sqrt()).abs() < 1e-12);
        let p = ErasurePattern::new(vec![0, 1, 2, 3], 5).unwrap();
        assert!((spectral_summary(&f, Some(&p)).unwrap().cond - 1.0).abs() < 1e-12);
    }

    #[test]
    fn empty_pattern_is_rejected() {
        let f = identity_frame(3);
        let p = ErasurePattern::from_sorted_unchecked(vec![], 3);
        assert_eq!(spectral_summary(&f, Some(&p)), Err(Error::EmptyPattern));
    }

    #[test]
    fn rank_deficiency_is_flagged_not_huge() {
        let f = identity_frame(3);
        let p = ErasurePattern::new(vec![1], 3).unwrap();
        let s = spectral_summary(&f, Some(&p)).unwrap();
        assert!(s.cond.is_infinite());
        assert!(s.is_rank_deficient());
        assert_eq!(s.eigenvalues.len(), 3);
    }

    #[test]
    fn coherence_examples() {
        assert_eq!(coherence(&identity_frame(5)).unwrap(), 0.0);
        let etf = singer_etf(2).unwrap();
        assert!((coherence(&etf).unwrap() - welch_bound(3, 7).unwrap()).abs() < 1e-10);
        let mub = mub_frame(5).unwrap();
        assert!((coherence(&mub).unwrap() - 1.0 / 5f64.sqrt()).abs() < 1e-10);
    }

    #[test]
    fn coherence_rejects_non_unit_norm() {
        let f = Frame::custom(DMatrix::identity(2, 2) * Complex64::new(2.0, 0.0), "x").unwrap();
        assert!(matches!(coherence(&f), Err(Error::NotUnitNorm { .. })));
    }

    #[test]
    fn distribution_of_orthonormal_basis() {
        let d = squared_ip_distribution(&identity_frame(4));
        assert_eq!(d.d, vec![1.0, 0.0, 0.0, 0.0]);
        assert!(d.identical_rows);
    }

    #[test]
    fn distribution_of_mub() {
        let d = squared_ip_distribution(&mub_frame(5).unwrap());
        assert!(d.identical_rows);
        assert!((d.d[0] - 1.0).abs() < 1e-10);
        assert!(d.d[1..21].iter().all(|x| (x - 0.2).abs() < 1e-10));
        assert!(d.d[21..].iter().all(|x| x.abs() < 1e-10));
        let mean = d.d.iter().sum::<f64>() / 25.0;
        assert!((mean - 0.2).abs() < 1e-10);
    }

    #[test]
    fn envelope_when_rows_differ() {
        let mut m = DMatrix::<Complex64>::identity(2, 3);
        let s = 0.5f64.sqrt();
        m[(0, 2)] = Complex64::new(s, 0.0);
        m[(1, 2)] = Complex64::new(s, 0.0);
        let d = squared_ip_distribution(&Frame::custom(m, "x").unwrap());
        assert!(!d.identical_rows);
        // Rows: e1 -> (1, .5, 0); e2 -> (1, .5, 0); diagonal vector -> (1, .5, .5).
        assert!((d.d[2] - 0.5).abs() < 1e-12);
    }
}
