//! Pointwise extrinsic geometry of an immersed hypersurface.
//!
//! From a second-order jet of the chart map this module assembles the first
//! and second fundamental forms, the unit normal, the shape operator,
//! Christoffel symbols, and the volume density, all under the signed ambient
//! inner product. Residual checks verify the structure equations (Gauss
//! formula, Weingarten relation, and the Reilly operator applied to the
//! position vector) numerically at any point.
//!
//! Sign convention: the second fundamental form is `h_ij = <d_i d_j x, n>`.
//! On the unit sphere with outward normal `n = x` this gives `h = -g` and
//! shape operator `-I`, i.e. outward-oriented spheres have negative
//! principal curvatures.

use nalgebra::DMatrix;

use crate::ambient::{AmbientVector, Signature, SpaceForm};
use crate::curvature::{mean_curvatures, newton_recursion};
use crate::error::{Error, Result};
use crate::jets::{HyperDual, Jet2, Real};

/// Largest acceptable condition estimate in the normal solve.
const NORMAL_CONDITION_LIMIT: f64 = 1e12;

/// Everything extrinsic at one chart point.
#[derive(Debug, Clone)]
pub struct PointGeometry {
    /// First fundamental form `g_ij = <d_i x, d_j x>`.
    pub g: DMatrix<f64>,
    pub g_inv: DMatrix<f64>,
    /// Unit normal under the signed inner product.
    pub normal: AmbientVector,
    /// Second fundamental form `h_ij = <d_i d_j x, n>`.
    pub h: DMatrix<f64>,
    /// Shape operator `S = g^-1 h` (mixed indices, row = upper).
    pub shape_operator: DMatrix<f64>,
    /// Christoffel symbols, flattened as `[l][i][j]`.
    christoffel: Vec<f64>,
    /// Volume density `sqrt(det g)`.
    pub density: f64,
    /// The jet this geometry was built from (kept for residual checks).
    pub jet: Jet2,
}

impl PointGeometry {
    pub fn n(&self) -> usize {
        self.g.nrows()
    }

    #[inline]
    pub fn christoffel(&self, l: usize, i: usize, j: usize) -> f64 {
        let n = self.n();
        self.christoffel[(l * n + i) * n + j]
    }

    pub fn position(&self) -> &AmbientVector {
        &self.jet.x
    }
}

#[inline]
fn signed_dot<T: Real>(sig: &Signature, u: &[T], v: &[T]) -> T {
    let mut acc = T::from_f64(0.0);
    for i in 0..u.len() {
        let term = u[i] * v[i];
        acc = if i < sig.negatives { acc - term } else { acc + term };
    }
    acc
}

/// Orthonormalizes `vectors` in place under the signed inner product
/// (modified Gram-Schmidt with one reorthogonalization pass) and returns the
/// sign `<u,u>` of each resulting unit vector.
fn orthonormalize<T: Real>(sig: &Signature, vectors: &mut [Vec<T>]) -> Result<Vec<f64>> {
    let mut signs = Vec::with_capacity(vectors.len());
    for idx in 0..vectors.len() {
        let (done, rest) = vectors.split_at_mut(idx);
        let v = &mut rest[0];
        for _pass in 0..2 {
            for (u, &eps) in done.iter().zip(&signs) {
                let coef = signed_dot(sig, v, u) * T::from_f64(eps);
                for (vc, uc) in v.iter_mut().zip(u) {
                    *vc = *vc - coef * *uc;
                }
            }
        }
        let norm2 = signed_dot(sig, v, v);
        if norm2.re().abs() < 1e-28 {
            return Err(Error::DegenerateImmersion {
                detail: format!("vector {idx} lies in the span of its predecessors"),
            });
        }
        let eps = norm2.re().signum();
        let inv_len = (norm2 * T::from_f64(eps)).sqrt();
        for vc in v.iter_mut() {
            *vc = *vc / inv_len;
        }
        signs.push(eps);
    }
    Ok(signs)
}

/// Unit vector orthogonal (signed inner product) to the position (when
/// `k != 0`) and to all tangents. The sign is an arbitrary deterministic
/// choice; callers orient it afterwards.
fn normal_unoriented<T: Real>(
    sig: &Signature,
    k: f64,
    x: &[T],
    tangents: &[Vec<T>],
) -> Result<Vec<T>> {
    let m = sig.dim;
    let mut basis: Vec<Vec<T>> = Vec::with_capacity(tangents.len() + 1);
    if k != 0.0 {
        basis.push(x.to_vec());
    }
    for t in tangents {
        basis.push(t.clone());
    }
    let signs = orthonormalize(sig, &mut basis)?;

    // Pick the coordinate axis with the largest residual after projecting
    // away the span; its residual norm is the reciprocal condition estimate.
    let mut best = (0usize, f64::NEG_INFINITY);
    for c in 0..m {
        let eps_c = sig.eps(c);
        let mut res = eps_c;
        for (u, &eps) in basis.iter().zip(&signs) {
            let comp = if c < sig.negatives { -u[c].re() } else { u[c].re() };
            res -= eps * comp * comp;
        }
        if res > best.1 {
            best = (c, res);
        }
    }
    if best.1 < 1.0 / (NORMAL_CONDITION_LIMIT * NORMAL_CONDITION_LIMIT) {
        return Err(Error::NumericalDegeneracy(format!(
            "normal solve condition exceeds {NORMAL_CONDITION_LIMIT:.0e}"
        )));
    }

    let mut w: Vec<T> = (0..m)
        .map(|c| T::from_f64(if c == best.0 { 1.0 } else { 0.0 }))
        .collect();
    for _pass in 0..2 {
        for (u, &eps) in basis.iter().zip(&signs) {
            let coef = signed_dot(sig, &w, u) * T::from_f64(eps);
            for (wc, uc) in w.iter_mut().zip(u) {
                *wc = *wc - coef * *uc;
            }
        }
    }
    let norm2 = signed_dot(sig, &w, &w);
    if norm2.re() <= 0.0 {
        return Err(Error::NumericalDegeneracy(
            "normal direction is not spacelike".into(),
        ));
    }
    let len = norm2.sqrt();
    for wc in w.iter_mut() {
        *wc = *wc / len;
    }
    Ok(w)
}

/// Assembles the full pointwise geometry from a jet.
///
/// `orientation` is +1 or -1 and `reference` is the shape's orienting vector
/// field evaluated at this point: the normal is flipped so that
/// `orientation * <normal, reference> > 0`.
pub fn point_geometry(
    jet: &Jet2,
    form: &SpaceForm,
    orientation: f64,
    reference: &AmbientVector,
) -> Result<PointGeometry> {
    let n = jet.n();
    let m = jet.m();
    let sig = &form.signature;
    if m != form.ambient_dim() {
        return Err(Error::DimensionMismatch {
            expected: form.ambient_dim(),
            got: m,
        });
    }
    if n != form.n {
        return Err(Error::DimensionMismatch {
            expected: form.n,
            got: n,
        });
    }

    let mut g = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = sig.inner_slices(&jet.dx(i).coords, &jet.dx(j).coords);
            g[(i, j)] = v;
            g[(j, i)] = v;
        }
    }
    let chol = nalgebra::Cholesky::new(g.clone()).ok_or_else(|| Error::DegenerateImmersion {
        detail: "first fundamental form is not positive definite".into(),
    })?;
    let density: f64 = (0..n).map(|i| chol.l_dirty()[(i, i)]).product();
    let g_inv = chol.inverse();

    let tangents: Vec<Vec<f64>> = (0..n).map(|i| jet.dx(i).coords.clone()).collect();
    let mut normal = normal_unoriented(sig, form.k, &jet.x.coords, &tangents)?;
    let align = sig.inner_slices(&normal, &reference.coords);
    if align == 0.0 {
        return Err(Error::NumericalDegeneracy(
            "orientation reference is orthogonal to the normal".into(),
        ));
    }
    if align * orientation < 0.0 {
        for c in normal.iter_mut() {
            *c = -*c;
        }
    }
    let normal = AmbientVector::new(normal);

    let mut h = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = sig.inner_slices(&jet.d2(i, j).coords, &normal.coords);
            h[(i, j)] = v;
            h[(j, i)] = v;
        }
    }
    let shape_operator = &g_inv * &h;

    // dg[l] holds the matrix of d_l g_ij assembled from jet entries.
    let mut dg = vec![DMatrix::<f64>::zeros(n, n); n];
    for l in 0..n {
        for i in 0..n {
            for j in 0..n {
                dg[l][(i, j)] = sig.inner_slices(&jet.d2(l, i).coords, &jet.dx(j).coords)
                    + sig.inner_slices(&jet.dx(i).coords, &jet.d2(l, j).coords);
            }
        }
    }
    let mut christoffel = vec![0.0; n * n * n];
    for l in 0..n {
        for i in 0..n {
            for j in 0..n {
                let mut acc = 0.0;
                for p in 0..n {
                    acc += g_inv[(l, p)] * (dg[i][(j, p)] + dg[j][(i, p)] - dg[p][(i, j)]);
                }
                christoffel[(l * n + i) * n + j] = 0.5 * acc;
            }
        }
    }

    Ok(PointGeometry {
        g,
        g_inv,
        normal,
        h,
        shape_operator,
        christoffel,
        density,
        jet: jet.clone(),
    })
}

/// Principal curvatures (eigenvalues of the shape operator) in descending
/// order, via the symmetric generalized eigenproblem `h v = lambda g v`.
pub fn principal_curvatures(pt: &PointGeometry) -> Result<Vec<f64>> {
    let chol = nalgebra::Cholesky::new(pt.g.clone()).ok_or_else(|| Error::DegenerateImmersion {
        detail: "metric lost positive definiteness".into(),
    })?;
    // A = L^-1 h L^-T is symmetric with the same eigenvalues as g^-1 h.
    let mut a = pt.h.clone();
    let ok1 = chol.l_dirty().solve_lower_triangular_mut(&mut a);
    let mut at = a.transpose();
    let ok2 = chol.l_dirty().solve_lower_triangular_mut(&mut at);
    if !(ok1 && ok2) {
        return Err(Error::NumericalDegeneracy(
            "triangular solve failed in principal curvature computation".into(),
        ));
    }
    let sym = (&at + at.transpose()) * 0.5;
    let eig = nalgebra::SymmetricEigen::try_new(sym, f64::EPSILON, 10_000)
        .ok_or_else(|| Error::NumericalDegeneracy("principal curvature eigensolve failed".into()))?;
    let mut vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    vals.sort_by(|a, b| b.partial_cmp(a).unwrap());
    Ok(vals)
}

/// Residual of the Gauss formula in coordinates:
/// max over (i,j) of  | d_i d_j x - Gamma^l_ij d_l x - h_ij n + k g_ij x |.
pub fn check_gauss_formula(pt: &PointGeometry, form: &SpaceForm) -> f64 {
    let n = pt.n();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let mut res = pt.jet.d2(i, j).clone();
            for l in 0..n {
                res.axpy(-pt.christoffel(l, i, j), pt.jet.dx(l));
            }
            res.axpy(-pt.h[(i, j)], &pt.normal);
            res.axpy(form.k * pt.g[(i, j)], &pt.jet.x);
            worst = worst.max(res.euclidean_norm());
        }
    }
    worst
}

/// Residual of the Weingarten relation `d_i n = -S^j_i d_j x`, with the
/// normal differentiated by rerunning the normal solve in dual arithmetic.
pub fn check_weingarten(pt: &PointGeometry, form: &SpaceForm) -> Result<f64> {
    let n = pt.n();
    let m = pt.jet.m();
    let sig = &form.signature;
    let mut worst = 0.0f64;
    for dir in 0..n {
        // First-order dual inputs along direction `dir`: position varies at
        // rate dx_dir, each tangent at rate d2(dir, j).
        let x_dual: Vec<HyperDual> = (0..m)
            .map(|c| HyperDual::seeded(pt.jet.x.coords[c], pt.jet.dx(dir).coords[c], 0.0))
            .collect();
        let tangents: Vec<Vec<HyperDual>> = (0..n)
            .map(|j| {
                (0..m)
                    .map(|c| {
                        HyperDual::seeded(pt.jet.dx(j).coords[c], pt.jet.d2(dir, j).coords[c], 0.0)
                    })
                    .collect()
            })
            .collect();
        let mut n_dual = normal_unoriented(sig, form.k, &x_dual, &tangents)?;
        let re: Vec<f64> = n_dual.iter().map(|h| h.re).collect();
        if sig.inner_slices(&re, &pt.normal.coords) < 0.0 {
            for c in n_dual.iter_mut() {
                *c = -*c;
            }
        }
        let mut res = AmbientVector::new(n_dual.iter().map(|h| h.d1).collect());
        for j in 0..n {
            res.axpy(pt.shape_operator[(j, dir)], pt.jet.dx(j));
        }
        worst = worst.max(res.euclidean_norm());
    }
    Ok(worst)
}

/// Residual of the Reilly operator applied to the position vector:
/// | T_r^{ij} x_ij - (r+1) K_{r+1} n + (n-r) k K_r x |, with `x_ij` the
/// covariant Hessian of the immersion.
pub fn check_reilly_position(pt: &PointGeometry, r: usize, form: &SpaceForm) -> Result<f64> {
    let n = pt.n();
    if r >= n {
        return Err(Error::ContractViolation(format!(
            "Reilly order r = {r} must satisfy 0 <= r <= n-1 = {}",
            n - 1
        )));
    }
    let principal = principal_curvatures(pt)?;
    let k_vals = mean_curvatures(&principal);
    let t = newton_recursion(&pt.shape_operator, &k_vals);
    // Raise the second index: T^{ij} = (T g^-1)_{ij}.
    let t_raised = &t[r] * &pt.g_inv;

    let m = pt.jet.m();
    let mut lr_x = AmbientVector::zeros(m);
    for i in 0..n {
        for j in 0..n {
            let mut hess = pt.jet.d2(i, j).clone();
            for l in 0..n {
                hess.axpy(-pt.christoffel(l, i, j), pt.jet.dx(l));
            }
            lr_x.axpy(t_raised[(i, j)], &hess);
        }
    }
    lr_x.axpy(-((r + 1) as f64) * k_vals[r + 1], &pt.normal);
    lr_x.axpy((n - r) as f64 * form.k * k_vals[r], &pt.jet.x);
    Ok(lr_x.euclidean_norm())
}
