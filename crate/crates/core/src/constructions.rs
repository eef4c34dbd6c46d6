//! Frame families: Gaussian, harmonic (DFT rows), Singer ETFs, mutually
//! unbiased bases, the regular simplex and its two-level group frames.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::certificates::welch_bound;
use crate::error::{invalid, Error, Result};
use crate::galois::{is_prime, singer_difference_set};
use crate::rng::{stream_rng, Stream, PRNG_ID};
use crate::spectral::{gram, squared_ip_distribution, Frame, Provenance, ScalarField};

/// Structural checks run before a constructor returns.
const BUILD_TOL: f64 = 1e-10;

/// Construction tag plus parameters; enough to rebuild the frame.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum Construction {
    Gaussian {
        m: usize,
        n: usize,
        seed: u64,
        scalar_field: ScalarField,
    },
    Harmonic {
        n: usize,
        rows: Vec<usize>,
    },
    SingerEtf {
        q: u64,
    },
    Mub {
        m: usize,
    },
    Simplex {
        m: usize,
        real: bool,
    },
    GroupSimplex {
        m: usize,
    },
    Sign {
        m: usize,
        n: usize,
        seed: u64,
    },
    Custom {
        label: String,
    },
}

impl Construction {
    pub fn family_name(&self) -> &'static str {
        match self {
            Self::Gaussian { .. } => "gaussian",
            Self::Harmonic { .. } => "harmonic",
            Self::SingerEtf { .. } => "singer-etf",
            Self::Mub { .. } => "mub",
            Self::Simplex { .. } => "simplex",
            Self::GroupSimplex { .. } => "group-simplex",
            Self::Sign { .. } => "sign",
            Self::Custom { .. } => "custom",
        }
    }

    /// Rebuilds a deterministic construction. Custom frames have nothing to
    /// rebuild from.
    pub fn build(&self) -> Result<Frame> {
        match self {
            &Self::Gaussian {
                m,
                n,
                seed,
                scalar_field,
            } => gaussian_frame(m, n, seed, scalar_field),
            Self::Harmonic { n, rows } => harmonic_frame(*n, rows),
            &Self::SingerEtf { q } => singer_etf(q),
            &Self::Mub { m } => mub_frame(m),
            &Self::Simplex { m, real: false } => simplex(m),
            &Self::Simplex { m, real: true } => real_simplex(m),
            &Self::GroupSimplex { m } => simplex_group_frame(m),
            &Self::Sign { m, n, seed } => sign_frame(m, n, seed),
            Self::Custom { label } => Err(invalid(format!("custom frame {label:?} cannot be rebuilt"))),
        }
    }
}

/// I.i.d. standard normal entries, columns not normalized.
///
/// Entries are drawn column by column from the `FrameDraw` stream of
/// `seed`. Complex entries draw the real then the imaginary part, each with
/// variance 1/2, so `E|z|^2 = 1`.
pub fn gaussian_frame(m: usize, n: usize, seed: u64, scalar_field: ScalarField) -> Result<Frame> {
    if m == 0 || n < m {
        return Err(invalid(format!("gaussian frame needs N >= M >= 1, got {m}x{n}")));
    }
    let mut rng = stream_rng(seed, Stream::FrameDraw);
    let mut data = Vec::with_capacity(m * n);
    for _ in 0..m * n {
        let z = match scalar_field {
            ScalarField::Real => Complex64::new(StandardNormal.sample(&mut rng), 0.0),
            ScalarField::Complex => {
                let re: f64 = StandardNormal.sample(&mut rng);
                let im: f64 = StandardNormal.sample(&mut rng);
                Complex64::new(re * FRAC_1_SQRT_2, im * FRAC_1_SQRT_2)
            }
        };
        data.push(z);
    }
    let mut prov = Provenance::new(
        Construction::Gaussian {
            m,
            n,
            seed,
            scalar_field,
        },
        false,
    );
    prov.prng = Some(PRNG_ID.to_string());
    Frame::new(DMatrix::from_vec(m, n, data), scalar_field, prov)
}

/// Uniform random `+-1` entries from the `FrameDraw` stream of `seed`.
pub fn sign_frame(m: usize, n: usize, seed: u64) -> Result<Frame> {
    if m == 0 || n < m {
        return Err(invalid(format!("sign frame needs N >= M >= 1, got {m}x{n}")));
    }
    let mut rng = stream_rng(seed, Stream::FrameDraw);
    let data: Vec<f64> = (0..m * n)
        .map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 })
        .collect();
    let mut prov = Provenance::new(Construction::Sign { m, n, seed }, false);
    prov.prng = Some(PRNG_ID.to_string());
    Frame::from_real(DMatrix::from_vec(m, n, data), prov)
}

fn unit_root(numerator: usize, n: usize, scale: f64) -> Complex64 {
    // Reduce the exponent in integers so large indices keep full accuracy.
    let k = numerator % n;
    Complex64::from_polar(scale, 2.0 * PI * k as f64 / n as f64)
}

fn harmonic_matrix(n: usize, rows: &[usize]) -> DMatrix<Complex64> {
    let scale = 1.0 / (rows.len() as f64).sqrt();
    DMatrix::from_fn(rows.len(), n, |r, c| unit_root(rows[r] * c, n, scale))
}

/// Rows of the `N x N` DFT indexed by `rows`, columns normalized.
pub fn harmonic_frame(n: usize, rows: &[usize]) -> Result<Frame> {
    if rows.is_empty() || rows.len() > n {
        return Err(invalid(format!("harmonic frame needs 1..={n} rows, got {}", rows.len())));
    }
    let mut reduced: Vec<usize> = rows.iter().map(|r| r % n).collect();
    reduced.sort_unstable();
    reduced.dedup();
    if reduced.len() != rows.len() {
        return Err(invalid("harmonic frame rows must be distinct residues"));
    }
    Frame::new(
        harmonic_matrix(n, &reduced),
        ScalarField::Complex,
        Provenance::new(Construction::Harmonic { n, rows: reduced }, true),
    )
}

/// The `(q+1) x (q^2+q+1)` harmonic ETF on the Singer difference set.
pub fn singer_etf(q: u64) -> Result<Frame> {
    let ds = singer_difference_set(q)?;
    let n = ds.modulus() as usize;
    let rows: Vec<usize> = ds.elements().iter().map(|&e| e as usize).collect();
    let frame = Frame::new(
        harmonic_matrix(n, &rows),
        ScalarField::Complex,
        Provenance::new(Construction::SingerEtf { q }, true),
    )?;
    let residual = frame.tightness_residual();
    if residual > BUILD_TOL {
        return Err(Error::Internal(format!("Singer frame not tight (residual {residual:e})")));
    }
    let w = welch_bound(frame.dim(), n)?;
    let g = gram(&frame);
    for j in 0..n {
        for i in 0..j {
            if (g[(i, j)].norm() - w).abs() > BUILD_TOL {
                return Err(Error::Internal(format!("Singer frame not equiangular at ({i}, {j})")));
            }
        }
    }
    Ok(frame)
}

/// `M` mutually unbiased bases in `C^M` for odd prime `M`.
///
/// Column `a*M + b` is `m -> exp(2 pi i (a m^2 + b m) / M) / sqrt(M)`, so
/// block `a` is a (chirped) Fourier basis and any two blocks are unbiased.
pub fn mub_frame(m: usize) -> Result<Frame> {
    if m < 3 || !is_prime(m as u64) {
        return Err(invalid(format!("M must be an odd prime, got {m}")));
    }
    let scale = 1.0 / (m as f64).sqrt();
    let mat = DMatrix::from_fn(m, m * m, |row, col| {
        let (a, b) = (col / m, col % m);
        unit_root(a * row * row + b * row, m, scale)
    });
    let frame = Frame::new(mat, ScalarField::Complex, Provenance::new(Construction::Mub { m }, true))?;

    let dist = squared_ip_distribution(&frame);
    let inv_m = 1.0 / m as f64;
    let expected = std::iter::once(1.0)
        .chain(std::iter::repeat_n(inv_m, m * (m - 1)))
        .chain(std::iter::repeat_n(0.0, m - 1));
    let matches = dist.identical_rows && dist.d.iter().zip(expected).all(|(x, e)| (x - e).abs() <= BUILD_TOL);
    if !matches {
        return Err(Error::Internal("MUB inner-product distribution mismatch".into()));
    }
    Ok(frame)
}

/// `M x (M+1)` regular simplex: the DFT of size `M+1` without its row of
/// ones, columns normalized.
pub fn simplex(m: usize) -> Result<Frame> {
    if m == 0 {
        return Err(invalid("simplex needs M >= 1"));
    }
    let rows: Vec<usize> = (1..=m).collect();
    Frame::new(
        harmonic_matrix(m + 1, &rows),
        ScalarField::Complex,
        Provenance::new(Construction::Simplex { m, real: false }, true),
    )
}

/// Real regular simplex from a Sylvester Hadamard matrix; needs `M + 1` to
/// be a power of two.
pub fn real_simplex(m: usize) -> Result<Frame> {
    if m == 0 || !(m + 1).is_power_of_two() {
        return Err(invalid(format!("real simplex needs M + 1 a power of two, got M = {m}")));
    }
    let scale = 1.0 / (m as f64).sqrt();
    let mat = DMatrix::from_fn(m, m + 1, |r, c| {
        let sign = if ((r + 1) & c).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
        sign * scale
    });
    Frame::from_real(mat, Provenance::new(Construction::Simplex { m, real: true }, true))
}

/// Unit vector in `1^perp` of `C^{M+1}` with two level sets: `L` entries
/// `a > 0` followed by `M + 1 - L` entries `b < 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwoLevelSeed {
    pub m: usize,
    pub l: usize,
    pub a: f64,
    pub b: f64,
    pub g: Vec<f64>,
}

pub fn two_level_seed(m: usize, l: usize) -> Result<TwoLevelSeed> {
    if l == 0 || l > m {
        return Err(invalid(format!("level count L must be in 1..={m}, got {l}")));
    }
    let (mf, lf) = ((m + 1) as f64, l as f64);
    let a = ((mf - lf) / (mf * lf)).sqrt();
    let b = -(lf / (mf * (mf - lf))).sqrt();
    let g = std::iter::repeat_n(a, l).chain(std::iter::repeat_n(b, m + 1 - l)).collect();
    Ok(TwoLevelSeed { m, l, a, b, g })
}

impl TwoLevelSeed {
    /// Inner products `<g, Pg>` over the distinct permutations of `g`, as
    /// `(value, multiplicity)` from the largest overlap `J = L` down.
    pub fn permutation_inner_products(&self) -> Vec<(f64, usize)> {
        let (m1, l) = (self.m + 1, self.l);
        let j_min = (2 * l).saturating_sub(m1);
        (j_min..=l)
            .rev()
            .map(|j| {
                let value = (j as f64 * m1 as f64 - (l * l) as f64) / (l as f64 * (m1 - l) as f64);
                (value, binomial(l, j) * binomial(m1 - l, l - j))
            })
            .collect()
    }
}

fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    (0..k.min(n - k)).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

/// Columns `sqrt(M/(M+1)) Psi P g` over the `binom(M+1, 2)` distinct
/// placements of the two `a` entries of the `L = 2` seed, ordered by the
/// position pair `(i, j)`, `i < j`.
///
/// `M` in `3..7` is built but marked outside the certified range.
pub fn simplex_group_frame(m: usize) -> Result<Frame> {
    if m < 3 {
        return Err(invalid(format!("group simplex frame needs M >= 3, got {m}")));
    }
    let seed = two_level_seed(m, 2)?;
    let psi = simplex(m)?;
    let scale = (m as f64 / (m + 1) as f64).sqrt();
    let mut placements = Vec::with_capacity(binomial(m + 1, 2));
    for i in 0..=m {
        for j in i + 1..=m {
            placements.push((i, j));
        }
    }
    let pg = DMatrix::from_fn(m + 1, placements.len(), |r, c| {
        let (i, j) = placements[c];
        let v = if r == i || r == j { seed.a } else { seed.b };
        Complex64::new(v * scale, 0.0)
    });
    let mut prov = Provenance::new(Construction::GroupSimplex { m }, true);
    prov.certified_range = m >= 7;
    let frame = Frame::new(psi.matrix() * pg, ScalarField::Complex, prov)?;

    let mut expected: Vec<f64> = seed
        .permutation_inner_products()
        .into_iter()
        .flat_map(|(v, mult)| std::iter::repeat_n(v, mult))
        .collect();
    expected.sort_by(|a, b| b.total_cmp(a));
    let dist = squared_ip_distribution(&frame);
    let matches = dist
        .signed
        .as_ref()
        .is_some_and(|s| s.len() == expected.len() && s.iter().zip(&expected).all(|(x, e)| (x - e).abs() <= BUILD_TOL));
    if !matches || !dist.identical_rows {
        return Err(Error::Internal("group frame inner products do not match the seed".into()));
    }
    Ok(frame)
}
