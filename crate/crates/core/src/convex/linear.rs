use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{ensure_dim, Error, Result};
use crate::tolerance::RANK_CUTOFF;

/// A point of R^n.
pub type Vector = DVector<f64>;

/// Builds a vector from a coordinate slice.
pub fn vector(coords: &[f64]) -> Vector {
    DVector::from_column_slice(coords)
}

/// Builds a vector, rejecting empty input and non-finite coordinates.
pub fn checked_vector(coords: Vec<f64>) -> Result<Vector> {
    if coords.is_empty() {
        return Err(Error::InvalidArgument("vector must have at least one coordinate".into()));
    }
    if coords.iter().any(|c| !c.is_finite()) {
        return Err(Error::NonFinite("vector"));
    }
    Ok(DVector::from_vec(coords))
}

pub(crate) fn all_finite(x: &Vector) -> bool {
    x.iter().all(|c| c.is_finite())
}

/// A square real matrix acting on R^n.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct LinearMap(DMatrix<f64>);

impl LinearMap {
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::InvalidArgument(format!(
                "linear map must be square, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        if matrix.nrows() == 0 {
            return Err(Error::InvalidArgument("linear map must have dimension >= 1".into()));
        }
        if matrix.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite("linear map"));
        }
        Ok(Self(matrix))
    }

    /// Row-major construction.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidArgument("linear map rows must all have length equal to the row count".into()));
        }
        Self::new(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    pub fn identity(dim: usize) -> Self {
        Self(DMatrix::identity(dim, dim))
    }

    pub fn scaled_identity(dim: usize, s: f64) -> Self {
        Self(DMatrix::identity(dim, dim) * s)
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn apply(&self, x: &Vector) -> Result<Vector> {
        ensure_dim(self.dim(), x.len())?;
        Ok(&self.0 * x)
    }

    /// Largest singular value.
    pub fn operator_norm(&self) -> f64 {
        self.0.singular_values().max()
    }

    pub fn is_nonexpansive(&self) -> bool {
        self.operator_norm() <= 1.0 + 1e-10
    }

    /// Smallest eigenvalue of (L + L^T)/2.
    pub fn min_symmetric_eigenvalue(&self) -> f64 {
        let sym = (&self.0 + self.0.transpose()) * 0.5;
        SymmetricEigen::new(sym).eigenvalues.min()
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim())
            .map(|i| self.0.row(i).iter().copied().collect())
            .collect()
    }
}

impl TryFrom<Vec<Vec<f64>>> for LinearMap {
    type Error = Error;

    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        Self::from_rows(&rows)
    }
}

impl From<LinearMap> for Vec<Vec<f64>> {
    fn from(map: LinearMap) -> Self {
        map.to_rows()
    }
}

/// x ↦ Lx + b.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "AffineMapRepr", into = "AffineMapRepr")]
pub struct AffineMap {
    linear: LinearMap,
    offset: Vector,
}

#[derive(Serialize, Deserialize)]
struct AffineMapRepr {
    matrix: LinearMap,
    #[serde(with = "crate::serde_util::vector")]
    offset: Vector,
}

impl TryFrom<AffineMapRepr> for AffineMap {
    type Error = Error;

    fn try_from(r: AffineMapRepr) -> Result<Self> {
        Self::new(r.matrix, r.offset)
    }
}

impl From<AffineMap> for AffineMapRepr {
    fn from(m: AffineMap) -> Self {
        Self {
            matrix: m.linear,
            offset: m.offset,
        }
    }
}

impl AffineMap {
    pub fn new(linear: LinearMap, offset: Vector) -> Result<Self> {
        ensure_dim(linear.dim(), offset.len())?;
        if !all_finite(&offset) {
            return Err(Error::NonFinite("affine offset"));
        }
        Ok(Self { linear, offset })
    }

    pub fn linear(&self) -> &LinearMap {
        &self.linear
    }

    pub fn offset(&self) -> &Vector {
        &self.offset
    }

    pub fn dim(&self) -> usize {
        self.linear.dim()
    }

    pub fn apply(&self, x: &Vector) -> Result<Vector> {
        Ok(self.linear.apply(x)? + &self.offset)
    }

    /// The map x ↦ w + T x.
    pub fn shifted(&self, w: &Vector) -> Result<Self> {
        ensure_dim(self.dim(), w.len())?;
        Self::new(self.linear.clone(), &self.offset + w)
    }
}

/// Orthonormal basis (as columns) of the column space of `m`, using a
/// relative singular-value cutoff. Returns a matrix with zero columns when
/// the range is trivial.
pub fn range_basis(m: &DMatrix<f64>) -> DMatrix<f64> {
    let rows = m.nrows();
    if m.ncols() == 0 {
        return DMatrix::zeros(rows, 0);
    }
    let svd = m.clone().svd(true, false);
    let smax = svd.singular_values.max();
    if smax <= 0.0 {
        return DMatrix::zeros(rows, 0);
    }
    let u = svd.u.expect("left singular vectors requested");
    let keep: Vec<usize> = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, s)| **s > RANK_CUTOFF * smax)
        .map(|(i, _)| i)
        .collect();
    DMatrix::from_fn(rows, keep.len(), |i, j| u[(i, keep[j])])
}

/// Orthonormal basis of the orthogonal complement of span(basis columns),
/// where `basis` already has orthonormal columns.
pub fn complement_basis(basis: &DMatrix<f64>) -> DMatrix<f64> {
    let n = basis.nrows();
    let proj = DMatrix::identity(n, n) - basis * basis.transpose();
    range_basis(&proj)
}

/// Orthogonal projection of `x` onto span(basis columns), `basis` orthonormal.
pub fn project_onto_span(basis: &DMatrix<f64>, x: &Vector) -> Vector {
    if basis.ncols() == 0 {
        return Vector::zeros(x.len());
    }
    basis * (basis.transpose() * x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn checked_vector_rejects_bad_input() {
        assert!(checked_vector(vec![]).is_err());
        assert!(checked_vector(vec![1.0, f64::NAN]).is_err());
        assert!(checked_vector(vec![1.0, f64::INFINITY]).is_err());
        assert_eq!(checked_vector(vec![1.0, 2.0]).unwrap(), vector(&[1.0, 2.0]));
    }

    #[test]
    fn linear_map_validation() {
        assert!(LinearMap::new(DMatrix::zeros(2, 3)).is_err());
        assert!(LinearMap::from_rows(&[vec![1.0, 0.0], vec![0.0]]).is_err());
        let l = LinearMap::from_rows(&[vec![0.0, -1.0], vec![1.0, 0.0]]).unwrap();
        assert!(close(l.operator_norm(), 1.0, 1e-12));
        assert!(l.is_nonexpansive());
        assert!(close(l.min_symmetric_eigenvalue(), 0.0, 1e-12));
        assert!(!LinearMap::scaled_identity(2, 1.5).is_nonexpansive());
    }

    #[test]
    fn affine_map_json_is_row_major() {
        let m = AffineMap::new(
            LinearMap::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap(),
            vector(&[5.0, 6.0]),
        )
        .unwrap();
        let json = serde_json::to_string(&m).unwrap();
        assert_eq!(json, r#"{"matrix":[[1.0,2.0],[3.0,4.0]],"offset":[5.0,6.0]}"#);
        let back: AffineMap = serde_json::from_str(&json).unwrap();
        assert_eq!(back, m);
        assert_eq!(m.apply(&vector(&[1.0, 0.0])).unwrap(), vector(&[6.0, 9.0]));
    }

    #[test]
    fn range_and_complement_bases() {
        let m = DMatrix::from_row_slice(3, 3, &[1.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        let r = range_basis(&m);
        assert_eq!(r.ncols(), 1);
        let c = complement_basis(&r);
        assert_eq!(c.ncols(), 2);
        assert!((r.transpose() * &c).norm() < 1e-12);
        assert_eq!(range_basis(&DMatrix::zeros(2, 2)).ncols(), 0);
    }
}
