//! Cyclic Jacobi routines for small dense complex matrices.
//!
//! Both routines use the same complex plane rotation. For a Hermitian 2x2
//! block `[[a, g], [conj(g), b]]` with `g = |g| e^{i phi}` the rotation
//!
//! ```text
//!     J = [[ c,             s e^{i phi} ],
//!          [ -s e^{-i phi}, c           ]]
//! ```
//!
//! with `t = sign(z) / (|z| + sqrt(1 + z^2))`, `z = (b - a) / (2|g|)`,
//! `c = 1 / sqrt(1 + t^2)`, `s = t c` diagonalizes the block, leaving
//! `a - t|g|` and `b + t|g|` on the diagonal.

use nalgebra::DMatrix;
use num_complex::Complex64;

const MAX_SWEEPS: usize = 100;

#[derive(Clone, Copy, Debug)]
struct Rotation {
    c: f64,
    s: f64,
    t: f64,
    phase: Complex64,
}

impl Rotation {
    /// Rotation annihilating `g` in the block `[[a, g], [conj(g), b]]`.
    fn new(a: f64, b: f64, g: Complex64) -> Option<Self> {
        let mag = g.norm();
        if mag == 0.0 || !mag.is_finite() {
            return None;
        }
        let z = (b - a) / (2.0 * mag);
        let t = if z.abs() > 1e150 {
            0.5 / z
        } else {
            let sign = if z >= 0.0 { 1.0 } else { -1.0 };
            sign / (z.abs() + (1.0 + z * z).sqrt())
        };
        let c = 1.0 / (1.0 + t * t).sqrt();
        Some(Self {
            c,
            s: t * c,
            t,
            phase: g / mag,
        })
    }

    /// Entry `J[q][p] = -s e^{-i phi}`.
    fn qp(&self) -> Complex64 {
        -self.phase.conj() * self.s
    }

    /// Entry `J[p][q] = s e^{i phi}`.
    fn pq(&self) -> Complex64 {
        self.phase * self.s
    }

    /// `A <- A J` restricted to columns `p`, `q`.
    fn apply_right(&self, a: &mut DMatrix<Complex64>, p: usize, q: usize) {
        let (pq, qp) = (self.pq(), self.qp());
        for k in 0..a.nrows() {
            let akp = a[(k, p)];
            let akq = a[(k, q)];
            a[(k, p)] = akp * self.c + akq * qp;
            a[(k, q)] = akp * pq + akq * self.c;
        }
    }

    /// `A <- J^H A` restricted to rows `p`, `q`.
    fn apply_left_adjoint(&self, a: &mut DMatrix<Complex64>, p: usize, q: usize) {
        let (pq, qp) = (self.pq().conj(), self.qp().conj());
        for k in 0..a.ncols() {
            let apk = a[(p, k)];
            let aqk = a[(q, k)];
            a[(p, k)] = apk * self.c + aqk * qp;
            a[(q, k)] = apk * pq + aqk * self.c;
        }
    }
}

/// Eigenvalues in nonincreasing order, with the matching unitary eigenvector
/// matrix when requested (columns are eigenvectors).
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: Option<DMatrix<Complex64>>,
}

/// Eigendecomposition of a Hermitian matrix by cyclic Jacobi rotations.
///
/// Only the upper triangle's Hermitian part is trusted; the input is
/// symmetrized first.
pub fn hermitian_eigen(a: &DMatrix<Complex64>, with_vectors: bool) -> HermitianEigen {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "hermitian_eigen needs a square matrix");
    let mut w = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            Complex64::new(a[(i, i)].re, 0.0)
        } else {
            (a[(i, j)] + a[(j, i)].conj()) * 0.5
        }
    });
    let mut v = with_vectors.then(|| DMatrix::<Complex64>::identity(n, n));

    let scale = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if scale > 0.0 {
        for _ in 0..MAX_SWEEPS {
            let mut off = 0.0;
            for p in 0..n {
                for q in p + 1..n {
                    off += w[(p, q)].norm_sqr();
                }
            }
            if off.sqrt() <= 1e-17 * scale {
                break;
            }
            for p in 0..n {
                for q in p + 1..n {
                    let g = w[(p, q)];
                    if g.norm() <= 1e-300 {
                        continue;
                    }
                    let (app, aqq) = (w[(p, p)].re, w[(q, q)].re);
                    let Some(rot) = Rotation::new(app, aqq, g) else {
                        continue;
                    };
                    rot.apply_right(&mut w, p, q);
                    rot.apply_left_adjoint(&mut w, p, q);
                    let mag = g.norm();
                    w[(p, p)] = Complex64::new(app - rot.t * mag, 0.0);
                    w[(q, q)] = Complex64::new(aqq + rot.t * mag, 0.0);
                    w[(p, q)] = Complex64::new(0.0, 0.0);
                    w[(q, p)] = Complex64::new(0.0, 0.0);
                    if let Some(v) = v.as_mut() {
                        rot.apply_right(v, p, q);
                    }
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| w[(j, j)].re.total_cmp(&w[(i, i)].re));
    let values = order.iter().map(|&i| w[(i, i)].re).collect();
    let vectors = v.map(|v| DMatrix::from_fn(n, n, |r, c| v[(r, order[c])]));
    HermitianEigen { values, vectors }
}

/// Singular values of `a` by one-sided (Hestenes) Jacobi on its columns.
///
/// Returns one value per column, nonincreasing. When `a` has more columns
/// than rows the surplus values are zero up to rounding. Small singular
/// values are resolved to about `eps * sigma_max`, far below what the
/// squared (Gram) route can reach.
pub fn singular_values(a: &DMatrix<Complex64>) -> Vec<f64> {
    let mut w = a.clone();
    let cols = w.ncols();
    let rows = w.nrows();
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..cols {
            for q in p + 1..cols {
                let (mut alpha, mut beta) = (0.0, 0.0);
                let mut gamma = Complex64::new(0.0, 0.0);
                for k in 0..rows {
                    let (u, v) = (w[(k, p)], w[(k, q)]);
                    alpha += u.norm_sqr();
                    beta += v.norm_sqr();
                    gamma += u.conj() * v;
                }
                if gamma.norm() <= 1e-15 * (alpha * beta).sqrt() {
                    continue;
                }
                if let Some(rot) = Rotation::new(alpha, beta, gamma) {
                    rot.apply_right(&mut w, p, q);
                    rotated = true;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut sv: Vec<f64> = (0..cols).map(|j| w.column(j).norm()).collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}
