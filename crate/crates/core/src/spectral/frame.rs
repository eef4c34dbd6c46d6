use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::constructions::Construction;
use crate::error::{invalid, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScalarField {
    Real,
    Complex,
}

/// Where a frame came from, detailed enough to rebuild deterministic
/// constructions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub construction: Construction,
    /// Columns are claimed to be unit norm (checked on construction).
    pub unit_norm: bool,
    /// `false` for parameters outside the range where the family's
    /// closed-form certificate applies.
    pub certified_range: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prng: Option<String>,
}

impl Provenance {
    pub fn new(construction: Construction, unit_norm: bool) -> Self {
        Self {
            construction,
            unit_norm,
            certified_range: true,
            prng: None,
        }
    }

    pub fn custom(label: impl Into<String>) -> Self {
        Self::new(
            Construction::Custom {
                label: label.into(),
            },
            false,
        )
    }
}

/// An `M x N` frame: `N >= M` nonzero columns in `C^M` (or `R^M`).
#[derive(Clone, Debug, PartialEq)]
pub struct Frame {
    matrix: DMatrix<Complex64>,
    scalar_field: ScalarField,
    provenance: Provenance,
}

impl Frame {
    /// Validates shape, nonzero columns, real entries for real frames and
    /// unit norms when the provenance claims them.
    pub fn new(
        matrix: DMatrix<Complex64>,
        scalar_field: ScalarField,
        provenance: Provenance,
    ) -> Result<Self> {
        let (m, n) = matrix.shape();
        if m == 0 {
            return Err(invalid("frame needs at least one row"));
        }
        if n < m {
            return Err(invalid(format!("frame needs N >= M, got {m}x{n}")));
        }
        if matrix.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(invalid("frame has non-finite entries"));
        }
        if scalar_field == ScalarField::Real && matrix.iter().any(|z| z.im != 0.0) {
            return Err(invalid("real frame has entries with nonzero imaginary part"));
        }
        if let Some(j) = (0..n).find(|&j| matrix.column(j).norm() == 0.0) {
            return Err(invalid(format!("column {j} is zero")));
        }
        let frame = Self {
            matrix,
            scalar_field,
            provenance,
        };
        if frame.provenance.unit_norm {
            let deviation = frame.unit_norm_deviation();
            if deviation > 1e-10 {
                return Err(Error::NotUnitNorm { deviation });
            }
        }
        Ok(frame)
    }

    pub fn from_real(matrix: DMatrix<f64>, provenance: Provenance) -> Result<Self> {
        Self::new(
            matrix.map(|x| Complex64::new(x, 0.0)),
            ScalarField::Real,
            provenance,
        )
    }

    /// A frame with no construction behind it, e.g. read from user input.
    pub fn custom(matrix: DMatrix<Complex64>, label: impl Into<String>) -> Result<Self> {
        let field = if matrix.iter().all(|z| z.im == 0.0) {
            ScalarField::Real
        } else {
            ScalarField::Complex
        };
        Self::new(matrix, field, Provenance::custom(label))
    }

    /// Ambient dimension `M`.
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Number of frame vectors `N`.
    pub fn len(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.matrix.ncols() == 0
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn scalar_field(&self) -> ScalarField {
        self.scalar_field
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn column(&self, j: usize) -> DVector<Complex64> {
        self.matrix.column(j).into_owned()
    }

    /// `M x K` matrix of the listed columns, in the given order.
    pub fn columns(&self, indices: &[usize]) -> DMatrix<Complex64> {
        self.matrix.select_columns(indices)
    }

    /// `max_n | ||f_n|| - 1 |`.
    pub fn unit_norm_deviation(&self) -> f64 {
        self.matrix
            .column_iter()
            .map(|c| (c.norm() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    pub fn has_unit_norm_columns(&self, tol: f64) -> bool {
        self.unit_norm_deviation() <= tol
    }

    /// The same frame with every column scaled to unit norm.
    pub fn normalized(&self) -> Result<Frame> {
        let mut matrix = self.matrix.clone();
        for mut c in matrix.column_iter_mut() {
            let norm = c.norm();
            c.unscale_mut(norm);
        }
        let label = format!("normalized {}", self.provenance.construction.family_name());
        let mut provenance = Provenance::custom(label);
        provenance.unit_norm = true;
        provenance.prng = self.provenance.prng.clone();
        Self::new(matrix, self.scalar_field, provenance)
    }

    /// The `M x M` frame operator `F F^*`.
    pub fn frame_operator(&self) -> DMatrix<Complex64> {
        &self.matrix * self.matrix.adjoint()
    }

    /// `|| F F^* - A I ||_max` with `A = ||F||_F^2 / M`, zero for tight frames.
    pub fn tightness_residual(&self) -> f64 {
        let op = self.frame_operator();
        let m = self.dim();
        let a = self.matrix.norm_squared() / m as f64;
        (op - DMatrix::<Complex64>::identity(m, m) * Complex64::new(a, 0.0)).camax()
    }
}
