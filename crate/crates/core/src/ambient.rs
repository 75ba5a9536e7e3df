//! Signed inner-product linear spaces and the standard space-form embeddings.
//!
//! A hypersurface of dimension `n` sits inside a space form of curvature `k`,
//! which in turn sits inside a flat linear space: `R^{n+1}` when `k = 0`,
//! `R^{n+2}` when `k > 0`, and Minkowski space `R^{n+1,1}` when `k < 0`.
//! The Minkowski minus sign is fixed to coordinate 0 throughout the crate.

use crate::error::{Error, Result};

/// Inner-product signature of the ambient linear space: `dim` coordinates,
/// of which the first `negatives` (0 or 1) carry a minus sign.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Signature {
    pub dim: usize,
    pub negatives: usize,
}

impl Signature {
    pub fn euclidean(dim: usize) -> Self {
        Signature { dim, negatives: 0 }
    }

    pub fn minkowski(dim: usize) -> Self {
        Signature { dim, negatives: 1 }
    }

    /// Sign carried by coordinate `i` in the inner product.
    #[inline]
    pub fn eps(&self, i: usize) -> f64 {
        if i < self.negatives {
            -1.0
        } else {
            1.0
        }
    }

    /// Signed inner product of two coordinate slices (no length check).
    #[inline]
    pub fn inner_slices(&self, u: &[f64], v: &[f64]) -> f64 {
        let mut acc = 0.0;
        for i in 0..u.len() {
            acc += self.eps(i) * u[i] * v[i];
        }
        acc
    }
}

/// Coordinate vector in the ambient linear space.
#[derive(Debug, Clone, PartialEq)]
pub struct AmbientVector {
    pub coords: Vec<f64>,
}

impl AmbientVector {
    pub fn new(coords: Vec<f64>) -> Self {
        AmbientVector { coords }
    }

    pub fn zeros(dim: usize) -> Self {
        AmbientVector {
            coords: vec![0.0; dim],
        }
    }

    /// Standard basis vector `e_i`.
    pub fn basis(dim: usize, i: usize) -> Self {
        let mut v = Self::zeros(dim);
        v.coords[i] = 1.0;
        v
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn is_finite(&self) -> bool {
        self.coords.iter().all(|c| c.is_finite())
    }

    /// Euclidean norm of the coordinates (used for residual magnitudes,
    /// where the positive-definite norm is the honest error measure).
    pub fn euclidean_norm(&self) -> f64 {
        self.coords.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    pub fn scaled(&self, s: f64) -> Self {
        AmbientVector {
            coords: self.coords.iter().map(|c| c * s).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        AmbientVector {
            coords: self
                .coords
                .iter()
                .zip(&other.coords)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        AmbientVector {
            coords: self
                .coords
                .iter()
                .zip(&other.coords)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    /// `self += s * other`, in place.
    pub fn axpy(&mut self, s: f64, other: &Self) {
        for (a, b) in self.coords.iter_mut().zip(&other.coords) {
            *a += s * b;
        }
    }
}

/// Signed inner product `<u, v>` under the given signature.
pub fn inner_product(u: &AmbientVector, v: &AmbientVector, sig: &Signature) -> Result<f64> {
    if u.dim() != sig.dim {
        return Err(Error::DimensionMismatch {
            expected: sig.dim,
            got: u.dim(),
        });
    }
    if v.dim() != sig.dim {
        return Err(Error::DimensionMismatch {
            expected: sig.dim,
            got: v.dim(),
        });
    }
    Ok(sig.inner_slices(&u.coords, &v.coords))
}

/// Simply connected space form of constant sectional curvature `k` carrying
/// an `n`-dimensional hypersurface.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpaceForm {
    /// Sectional curvature (units 1/length^2).
    pub k: f64,
    /// Hypersurface dimension.
    pub n: usize,
    pub signature: Signature,
}

impl SpaceForm {
    pub fn new(n: usize, k: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::Parameter(format!(
                "hypersurface dimension must be >= 2, got {n}"
            )));
        }
        let signature = if k == 0.0 {
            Signature::euclidean(n + 1)
        } else if k > 0.0 {
            Signature::euclidean(n + 2)
        } else {
            Signature::minkowski(n + 2)
        };
        Ok(SpaceForm { k, n, signature })
    }

    /// Ambient linear dimension.
    pub fn ambient_dim(&self) -> usize {
        self.signature.dim
    }

    pub fn inner(&self, u: &AmbientVector, v: &AmbientVector) -> Result<f64> {
        inner_product(u, v, &self.signature)
    }
}

/// True iff `x` lies on the space form: `<x,x> = 1/k` for k != 0 (upper
/// hyperboloid sheet when k < 0); every point qualifies when k = 0.
pub fn validate_point(x: &AmbientVector, form: &SpaceForm, tol: f64) -> bool {
    if x.dim() != form.ambient_dim() {
        return false;
    }
    if form.k == 0.0 {
        return true;
    }
    let norm2 = form.signature.inner_slices(&x.coords, &x.coords);
    if (norm2 - 1.0 / form.k).abs() > tol {
        return false;
    }
    if form.k < 0.0 && x.coords[0] <= 0.0 {
        return false;
    }
    true
}

/// Causal character of a direction vector under the ambient signature.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Causal {
    Spacelike,
    Timelike,
}

/// A fixed direction vector, rescaled so `|<a,a>| = 1`.
///
/// The identity checkers assume unit directions; any input with nonzero
/// signed norm is accepted and normalized, and the achieved `<a,a>` (+1 or
/// -1) is recorded so reports can flag timelike choices in the Minkowski
/// case.
#[derive(Debug, Clone)]
pub struct Direction {
    pub vector: AmbientVector,
    /// `<a,a>` after normalization: +1 (spacelike) or -1 (timelike).
    pub inner: f64,
}

impl Direction {
    pub fn normalize(a: &AmbientVector, sig: &Signature) -> Result<Self> {
        if a.dim() != sig.dim {
            return Err(Error::DimensionMismatch {
                expected: sig.dim,
                got: a.dim(),
            });
        }
        let norm2 = sig.inner_slices(&a.coords, &a.coords);
        if norm2.abs() < 1e-300 {
            return Err(Error::ContractViolation(
                "direction vector has zero signed norm (null vector)".into(),
            ));
        }
        let scale = 1.0 / norm2.abs().sqrt();
        Ok(Direction {
            vector: a.scaled(scale),
            inner: norm2.signum(),
        })
    }

    pub fn causal(&self) -> Causal {
        if self.inner < 0.0 {
            Causal::Timelike
        } else {
            Causal::Spacelike
        }
    }
}
