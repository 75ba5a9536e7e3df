//! Catalog of closed oriented test hypersurfaces in each space form.
//!
//! Every entry is covered either by one periodic chart (tori, tubes) or by
//! one polar chart singular on a measure-zero set (spheres); quadrature
//! nodes are always strictly interior, so singular boundaries are never
//! evaluated. Euler characteristics are catalog metadata.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::Arc;

use crate::ambient::{AmbientVector, SpaceForm};
use crate::curvature::mean_curvatures;
use crate::error::{Error, Result};
use crate::geometry::{point_geometry, principal_curvatures, PointGeometry};
use crate::jets::{eval_jet2, Axis, Chart, FnChart, HyperDual};

/// Volume of the unit n-sphere (vol S^0 = 2, vol S^1 = 2 pi, then the
/// two-step recurrence vol S^n = 2 pi / (n-1) * vol S^{n-2}).
pub fn unit_sphere_volume(n: usize) -> f64 {
    match n {
        0 => 2.0,
        1 => 2.0 * PI,
        _ => 2.0 * PI / (n as f64 - 1.0) * unit_sphere_volume(n - 2),
    }
}

type ReferenceNormal = Arc<dyn Fn(&[f64], &AmbientVector) -> AmbientVector + Send + Sync>;

/// A closed oriented hypersurface: chart atlas, topology, orientation, and
/// optional analytic reference quantities.
#[derive(Clone)]
pub struct Shape {
    pub name: String,
    /// Human-readable parameter echo, e.g. `sphere_rn(n=2, rho=1)`.
    pub descriptor: String,
    pub form: SpaceForm,
    pub charts: Vec<Chart>,
    pub euler_characteristic: i64,
    /// +1 or -1; flips the normal field consistently across the shape.
    pub orientation: f64,
    pub reference_data: BTreeMap<String, f64>,
    /// Orienting vector field `(u, x) -> direction`; the unit normal is
    /// chosen so `orientation * <normal, reference> > 0`.
    pub reference_normal: ReferenceNormal,
}

impl Shape {
    pub fn n(&self) -> usize {
        self.form.n
    }

    pub fn ambient_dim(&self) -> usize {
        self.form.ambient_dim()
    }

    /// The stored topological invariant.
    pub fn euler_characteristic(&self) -> i64 {
        self.euler_characteristic
    }

    /// Same shape with the opposite orientation.
    pub fn flipped(&self) -> Shape {
        let mut s = self.clone();
        s.orientation = -s.orientation;
        s.descriptor = format!("{} [flipped]", self.descriptor);
        s
    }

    /// Full pointwise geometry at a chart parameter point.
    pub fn point_geometry(&self, chart_index: usize, u: &[f64]) -> Result<PointGeometry> {
        let chart = &self.charts[chart_index];
        let jet = eval_jet2(chart, u)?;
        let reference = (self.reference_normal)(u, &jet.x);
        point_geometry(&jet, &self.form, self.orientation, &reference)
    }
}

/// Pointwise geometry together with the curvature invariants needed by the
/// integral identities: principal curvatures and `K_0..K_n`.
#[derive(Debug, Clone)]
pub struct SurfacePoint {
    pub geom: PointGeometry,
    pub principal: Vec<f64>,
    /// `k[r]` is the r-th mean curvature; `k[n]` is the Gauss-Kronecker
    /// curvature.
    pub k: Vec<f64>,
}

/// Evaluates everything the integrands need at one chart point.
pub fn surface_point(shape: &Shape, chart: &Chart, u: &[f64]) -> Result<SurfacePoint> {
    let jet = eval_jet2(chart, u)?;
    let reference = (shape.reference_normal)(u, &jet.x);
    let geom = point_geometry(&jet, &shape.form, shape.orientation, &reference)?;
    let principal = principal_curvatures(&geom)?;
    let k = mean_curvatures(&principal);
    Ok(SurfacePoint { geom, principal, k })
}

/// Standard embedding of the unit n-sphere driven by polar angles: the
/// first n-1 angles range over (0, pi), the last over [0, 2 pi).
/// Writes n+1 coordinates.
pub fn unit_sphere_embedding(angles: &[HyperDual], out: &mut [HyperDual]) {
    let n = angles.len();
    let mut sin_prod = HyperDual::constant(1.0);
    for i in 0..n {
        out[i] = sin_prod * angles[i].cos();
        sin_prod = sin_prod * angles[i].sin();
    }
    out[n] = sin_prod;
}

fn polar_axes(n: usize) -> Vec<Axis> {
    let mut axes = Vec::with_capacity(n);
    for _ in 0..n - 1 {
        axes.push(Axis::interval(0.0, PI));
    }
    axes.push(Axis::periodic(0.0, 2.0 * PI));
    axes
}

fn fmt_f(x: f64) -> String {
    format!("{x}")
}

/// Round sphere of radius rho in R^{n+1}.
pub fn sphere(n: usize, rho: f64) -> Result<Shape> {
    if rho <= 0.0 {
        return Err(Error::Parameter(format!("sphere radius must be > 0, got {rho}")));
    }
    let form = SpaceForm::new(n, 0.0)?;
    let chart = Chart::new(
        polar_axes(n),
        Arc::new(FnChart {
            ambient_dim: n + 1,
            f: move |u: &[HyperDual], out: &mut [HyperDual]| {
                unit_sphere_embedding(u, out);
                for c in out.iter_mut() {
                    *c = *c * rho;
                }
            },
        }),
    );
    let mut reference_data = BTreeMap::new();
    reference_data.insert("area".into(), rho.powi(n as i32) * unit_sphere_volume(n));
    reference_data.insert("principal_curvature_magnitude".into(), 1.0 / rho);
    Ok(Shape {
        name: "sphere_rn".into(),
        descriptor: format!("sphere_rn(n={n}, rho={})", fmt_f(rho)),
        form,
        charts: vec![chart],
        euler_characteristic: if n % 2 == 0 { 2 } else { 0 },
        orientation: 1.0,
        reference_data,
        reference_normal: Arc::new(|_u, x| x.clone()),
    })
}

/// Axis-aligned ellipsoid in R^{n+1} with the given semi-axes.
pub fn ellipsoid(semi_axes: &[f64]) -> Result<Shape> {
    if semi_axes.len() < 3 {
        return Err(Error::Parameter(format!(
            "ellipsoid needs >= 3 semi-axes, got {}",
            semi_axes.len()
        )));
    }
    if semi_axes.iter().any(|&a| a <= 0.0) {
        return Err(Error::Parameter("semi-axes must be positive".into()));
    }
    let n = semi_axes.len() - 1;
    let form = SpaceForm::new(n, 0.0)?;
    let axes_map: Vec<f64> = semi_axes.to_vec();
    let axes_ref: Vec<f64> = semi_axes.to_vec();
    let chart = Chart::new(
        polar_axes(n),
        Arc::new(FnChart {
            ambient_dim: n + 1,
            f: move |u: &[HyperDual], out: &mut [HyperDual]| {
                unit_sphere_embedding(u, out);
                for (c, &a) in out.iter_mut().zip(&axes_map) {
                    *c = *c * a;
                }
            },
        }),
    );
    Ok(Shape {
        name: "ellipsoid_rn".into(),
        descriptor: format!(
            "ellipsoid_rn(axes=[{}])",
            semi_axes.iter().map(|a| fmt_f(*a)).collect::<Vec<_>>().join(", ")
        ),
        form,
        charts: vec![chart],
        euler_characteristic: if n % 2 == 0 { 2 } else { 0 },
        orientation: 1.0,
        reference_data: BTreeMap::new(),
        // Outward = gradient of sum x_i^2 / a_i^2.
        reference_normal: Arc::new(move |_u, x| {
            AmbientVector::new(
                x.coords
                    .iter()
                    .zip(&axes_ref)
                    .map(|(xi, ai)| xi / (ai * ai))
                    .collect(),
            )
        }),
    })
}

/// Torus of revolution in R^3 with ring radius R and tube radius r.
pub fn torus_of_revolution(big_r: f64, r: f64) -> Result<Shape> {
    if !(big_r > r && r > 0.0) {
        return Err(Error::Parameter(format!(
            "torus requires R > r > 0, got R = {big_r}, r = {r}"
        )));
    }
    let form = SpaceForm::new(2, 0.0)?;
    let chart = Chart::new(
        vec![Axis::periodic(0.0, 2.0 * PI), Axis::periodic(0.0, 2.0 * PI)],
        Arc::new(FnChart {
            ambient_dim: 3,
            f: move |u: &[HyperDual], out: &mut [HyperDual]| {
                let ring = u[1].cos() * r + big_r;
                out[0] = ring * u[0].cos();
                out[1] = ring * u[0].sin();
                out[2] = u[1].sin() * r;
            },
        }),
    );
    let mut reference_data = BTreeMap::new();
    reference_data.insert("area".into(), 4.0 * PI * PI * big_r * r);
    Ok(Shape {
        name: "torus_rev_r3".into(),
        descriptor: format!("torus_rev_r3(R={}, r={})", fmt_f(big_r), fmt_f(r)),
        form,
        charts: vec![chart],
        euler_characteristic: 0,
        orientation: 1.0,
        reference_data,
        // Outward = away from the core circle.
        reference_normal: Arc::new(move |u, x| {
            let center = AmbientVector::new(vec![big_r * u[0].cos(), big_r * u[0].sin(), 0.0]);
            x.sub(&center)
        }),
    })
}

/// Tube of radius r < 1 around a unit circle in a 2-plane of R^5
/// (topological S^1 x S^3).
pub fn tube_r5(r: f64) -> Result<Shape> {
    if !(0.0 < r && r < 1.0) {
        return Err(Error::Parameter(format!(
            "tube radius must satisfy 0 < r < 1, got {r}"
        )));
    }
    let form = SpaceForm::new(4, 0.0)?;
    let mut axes = vec![Axis::periodic(0.0, 2.0 * PI)];
    axes.extend(polar_axes(3));
    let chart = Chart::new(
        axes,
        Arc::new(FnChart {
            ambient_dim: 5,
            f: move |u: &[HyperDual], out: &mut [HyperDual]| {
                let mut omega = [HyperDual::constant(0.0); 4];
                unit_sphere_embedding(&u[1..], &mut omega);
                let ring = omega[0] * r + 1.0;
                out[0] = ring * u[0].cos();
                out[1] = ring * u[0].sin();
                out[2] = omega[1] * r;
                out[3] = omega[2] * r;
                out[4] = omega[3] * r;
            },
        }),
    );
    let mut reference_data = BTreeMap::new();
    reference_data.insert("area".into(), 4.0 * PI.powi(3) * r.powi(3));
    Ok(Shape {
        name: "tube_r5".into(),
        descriptor: format!("tube_r5(r={})", fmt_f(r)),
        form,
        charts: vec![chart],
        euler_characteristic: 0,
        orientation: 1.0,
        reference_data,
        reference_normal: Arc::new(move |u, x| {
            let center = AmbientVector::new(vec![u[0].cos(), u[0].sin(), 0.0, 0.0, 0.0]);
            x.sub(&center)
        }),
    })
}

/// Geodesic sphere of intrinsic radius rho in the sphere S^{n+1}(k), k > 0.
pub fn geodesic_sphere_spherical(n: usize, k: f64, rho: f64) -> Result<Shape> {
    if k <= 0.0 {
        return Err(Error::Parameter(format!("spherical form needs k > 0, got {k}")));
    }
    let sk = k.sqrt();
    if !(0.0 < rho && rho < PI / sk) {
        return Err(Error::Parameter(format!(
            "geodesic radius must lie in (0, pi/sqrt(k)) = (0, {}), got {rho}",
            PI / sk
        )));
    }
    let form = SpaceForm::new(n, k)?;
    let (c0, s0) = ((sk * rho).cos() / sk, (sk * rho).sin() / sk);
    let chart = Chart::new(
        polar_axes(n),
        Arc::new(FnChart {
            ambient_dim: n + 2,
            f: move |u: &[HyperDual], out: &mut [HyperDual]| {
                out[0] = HyperDual::constant(c0);
                unit_sphere_embedding(u, &mut out[1..]);
                for c in out[1..].iter_mut() {
                    *c = *c * s0;
                }
            },
        }),
    );
    let mut reference_data = BTreeMap::new();
    reference_data.insert("area".into(), s0.powi(n as i32) * unit_sphere_volume(n));
    reference_data.insert(
        "principal_curvature_magnitude".into(),
        sk / (sk * rho).tan(),
    );
    Ok(Shape {
        name: "geodesic_sphere_s".into(),
        descriptor: format!("geodesic_sphere_s(n={n}, k={}, rho={})", fmt_f(k), fmt_f(rho)),
        form,
        charts: vec![chart],
        euler_characteristic: if n % 2 == 0 { 2 } else { 0 },
        orientation: 1.0,
        reference_data,
        // Outward = d/drho = (-sin(sk rho), cos(sk rho) omega).
        reference_normal: Arc::new(move |_u, x| {
            let mut v = x.scaled((sk * rho).cos() / ((sk * rho).sin() / sk));
            v.coords[0] = -(sk * rho).sin();
            v
        }),
    })
}

/// Geodesic sphere of radius rho in hyperbolic space H^{n+1}(k), k < 0,
/// in the upper-sheet hyperboloid model with the minus sign on coordinate 0.
pub fn geodesic_sphere_hyperbolic(n: usize, k: f64, rho: f64) -> Result<Shape> {
    if k >= 0.0 {
        return Err(Error::Parameter(format!("hyperbolic form needs k < 0, got {k}")));
    }
    if rho <= 0.0 {
        return Err(Error::Parameter(format!("geodesic radius must be > 0, got {rho}")));
    }
    let kappa = (-k).sqrt();
    let form = SpaceForm::new(n, k)?;
    let (c0, s0) = ((kappa * rho).cosh() / kappa, (kappa * rho).sinh() / kappa);
    let chart = Chart::new(
        polar_axes(n),
        Arc::new(FnChart {
            ambient_dim: n + 2,
            f: move |u: &[HyperDual], out: &mut [HyperDual]| {
                out[0] = HyperDual::constant(c0);
                unit_sphere_embedding(u, &mut out[1..]);
                for c in out[1..].iter_mut() {
                    *c = *c * s0;
                }
            },
        }),
    );
    let mut reference_data = BTreeMap::new();
    reference_data.insert("area".into(), s0.powi(n as i32) * unit_sphere_volume(n));
    reference_data.insert(
        "principal_curvature_magnitude".into(),
        kappa / (kappa * rho).tanh(),
    );
    Ok(Shape {
        name: "geodesic_sphere_h".into(),
        descriptor: format!(
            "geodesic_sphere_h(n={n}, k={}, rho={})",
            fmt_f(k),
            fmt_f(rho)
        ),
        form,
        charts: vec![chart],
        euler_characteristic: if n % 2 == 0 { 2 } else { 0 },
        orientation: 1.0,
        reference_data,
        // Outward = d/drho = (sinh(kappa rho), cosh(kappa rho) omega).
        reference_normal: Arc::new(move |_u, x| {
            let mut v = x.scaled((kappa * rho).cosh() / ((kappa * rho).sinh() / kappa));
            v.coords[0] = (kappa * rho).sinh();
            v
        }),
    })
}

/// Flat Clifford torus in S^3(k) with radii (cos alpha, sin alpha)/sqrt(k).
pub fn clifford_torus(alpha: f64, k: f64) -> Result<Shape> {
    if !(0.0 < alpha && alpha < PI / 2.0) {
        return Err(Error::Parameter(format!(
            "clifford torus angle must lie in (0, pi/2), got {alpha}"
        )));
    }
    if k <= 0.0 {
        return Err(Error::Parameter(format!("clifford torus needs k > 0, got {k}")));
    }
    let sk = k.sqrt();
    let form = SpaceForm::new(2, k)?;
    let (ca, sa) = (alpha.cos(), alpha.sin());
    let chart = Chart::new(
        vec![Axis::periodic(0.0, 2.0 * PI), Axis::periodic(0.0, 2.0 * PI)],
        Arc::new(FnChart {
            ambient_dim: 4,
            f: move |u: &[HyperDual], out: &mut [HyperDual]| {
                out[0] = u[0].cos() * (ca / sk);
                out[1] = u[0].sin() * (ca / sk);
                out[2] = u[1].cos() * (sa / sk);
                out[3] = u[1].sin() * (sa / sk);
            },
        }),
    );
    let mut reference_data = BTreeMap::new();
    reference_data.insert("area".into(), 4.0 * PI * PI * ca * sa / k);
    // Constant extrinsic curvature: (sqrt(k) tan a)(-sqrt(k) cot a) = -k.
    reference_data.insert("gauss_kronecker".into(), -k);
    Ok(Shape {
        name: "clifford_torus_s3".into(),
        descriptor: format!("clifford_torus_s3(alpha={}, k={})", fmt_f(alpha), fmt_f(k)),
        form,
        charts: vec![chart],
        euler_characteristic: 0,
        orientation: 1.0,
        reference_data,
        reference_normal: Arc::new(move |u, _x| {
            AmbientVector::new(vec![
                -sa * u[0].cos(),
                -sa * u[0].sin(),
                ca * u[1].cos(),
                ca * u[1].sin(),
            ])
        }),
    })
}

/// Generalized Clifford hypersurface S^1(cos alpha) x S^3(sin alpha) in
/// S^5(k): the tube of geodesic radius alpha around a great circle.
pub fn tube_s5(alpha: f64, k: f64) -> Result<Shape> {
    if !(0.0 < alpha && alpha < PI / 2.0) {
        return Err(Error::Parameter(format!(
            "tube angle must lie in (0, pi/2), got {alpha}"
        )));
    }
    if k <= 0.0 {
        return Err(Error::Parameter(format!("spherical tube needs k > 0, got {k}")));
    }
    let sk = k.sqrt();
    let form = SpaceForm::new(4, k)?;
    let (ca, sa) = (alpha.cos(), alpha.sin());
    let mut axes = vec![Axis::periodic(0.0, 2.0 * PI)];
    axes.extend(polar_axes(3));
    let chart = Chart::new(
        axes,
        Arc::new(FnChart {
            ambient_dim: 6,
            f: move |u: &[HyperDual], out: &mut [HyperDual]| {
                out[0] = u[0].cos() * (ca / sk);
                out[1] = u[0].sin() * (ca / sk);
                unit_sphere_embedding(&u[1..], &mut out[2..]);
                for c in out[2..].iter_mut() {
                    *c = *c * (sa / sk);
                }
            },
        }),
    );
    let mut reference_data = BTreeMap::new();
    reference_data.insert(
        "area".into(),
        (2.0 * PI * ca) * (2.0 * PI * PI * sa.powi(3)) / (k * k),
    );
    // kappa = { sqrt(k) tan a, -sqrt(k) cot a (x3) }; G = -k^2 cot^2 a.
    reference_data.insert("gauss_kronecker".into(), -k * k / (alpha.tan() * alpha.tan()));
    Ok(Shape {
        name: "tube_s5".into(),
        descriptor: format!("tube_s5(alpha={}, k={})", fmt_f(alpha), fmt_f(k)),
        form,
        charts: vec![chart],
        euler_characteristic: 0,
        orientation: 1.0,
        reference_data,
        reference_normal: Arc::new(move |u, x| {
            let mut v = vec![-sa * u[0].cos(), -sa * u[0].sin()];
            // S^3 part of the position, rescaled to the unit sphere.
            for c in 2..6 {
                v.push(x.coords[c] * sk / sa * ca);
            }
            AmbientVector::new(v)
        }),
    })
}

/// Named parameters accepted by [`make_shape`].
#[derive(Debug, Clone, Default)]
pub struct ShapeParams {
    pub n: Option<usize>,
    pub k: Option<f64>,
    pub rho: Option<f64>,
    pub big_r: Option<f64>,
    pub r: Option<f64>,
    pub alpha: Option<f64>,
    pub semi_axes: Option<Vec<f64>>,
}

/// Catalog names with one-line descriptions, for CLI listing.
pub fn catalog() -> Vec<(&'static str, &'static str)> {
    vec![
        ("sphere_rn", "round sphere of radius rho in R^{n+1} (params: n, rho)"),
        ("ellipsoid_rn", "axis-aligned ellipsoid in R^{n+1} (params: semi-axes list)"),
        ("torus_rev_r3", "torus of revolution in R^3 (params: R, r with R > r > 0)"),
        ("tube_r5", "tube of radius r < 1 around a unit circle in R^5, S^1 x S^3 (params: r)"),
        ("geodesic_sphere_s", "geodesic sphere in S^{n+1}(k), k > 0 (params: n, k, rho)"),
        ("geodesic_sphere_h", "geodesic sphere in H^{n+1}(k), k < 0 (params: n, k, rho)"),
        ("clifford_torus_s3", "flat Clifford torus in S^3(k) (params: alpha, k)"),
        ("tube_s5", "S^1(cos alpha) x S^3(sin alpha) in S^5(k) (params: alpha, k)"),
    ]
}

/// Builds a catalog shape by name.
pub fn make_shape(name: &str, params: &ShapeParams) -> Result<Shape> {
    let need =
        |v: Option<f64>, what: &str| v.ok_or_else(|| Error::Parameter(format!("missing parameter {what} for {name}")));
    match name {
        "sphere_rn" => sphere(params.n.unwrap_or(2), params.rho.unwrap_or(1.0)),
        "ellipsoid_rn" => {
            let axes = params
                .semi_axes
                .clone()
                .ok_or_else(|| Error::Parameter("missing semi-axes for ellipsoid_rn".into()))?;
            ellipsoid(&axes)
        }
        "torus_rev_r3" | "torus_rev" => {
            torus_of_revolution(need(params.big_r, "R")?, need(params.r, "r")?)
        }
        "tube_r5" => tube_r5(params.r.unwrap_or(0.5)),
        "geodesic_sphere_s" => geodesic_sphere_spherical(
            params.n.unwrap_or(2),
            params.k.unwrap_or(1.0),
            need(params.rho, "rho")?,
        ),
        "geodesic_sphere_h" => geodesic_sphere_hyperbolic(
            params.n.unwrap_or(2),
            params.k.unwrap_or(-1.0),
            need(params.rho, "rho")?,
        ),
        "clifford_torus_s3" => {
            clifford_torus(params.alpha.unwrap_or(PI / 4.0), params.k.unwrap_or(1.0))
        }
        "tube_s5" => tube_s5(params.alpha.unwrap_or(PI / 4.0), params.k.unwrap_or(1.0)),
        other => Err(Error::Parameter(format!("unknown shape name: {other}"))),
    }
}

/// Samples a uniform interior point of a chart domain. Non-periodic axes are
/// inset by a relative margin so coordinate singularities on the boundary are
/// never touched.
pub fn random_interior_point<R: rand::Rng>(chart: &Chart, rng: &mut R) -> Vec<f64> {
    const MARGIN: f64 = 1e-4;
    chart
        .domain
        .iter()
        .map(|ax| {
            let t: f64 = rng.random();
            if ax.periodic {
                ax.lo + t * ax.length()
            } else {
                let inset = MARGIN * ax.length();
                ax.lo + inset + t * (ax.length() - 2.0 * inset)
            }
        })
        .collect()
}

/// The full default catalog instantiated with representative parameters
/// (used by scans and property tests).
pub fn default_catalog() -> Vec<Shape> {
    vec![
        sphere(2, 1.0).unwrap(),
        sphere(4, 1.0).unwrap(),
        ellipsoid(&[1.0, 1.0, 2.0]).unwrap(),
        torus_of_revolution(2.0, 1.0).unwrap(),
        tube_r5(0.5).unwrap(),
        geodesic_sphere_spherical(2, 1.0, PI / 4.0).unwrap(),
        geodesic_sphere_hyperbolic(2, -1.0, 1.0).unwrap(),
        geodesic_sphere_spherical(4, 1.0, PI / 3.0).unwrap(),
        geodesic_sphere_hyperbolic(4, -1.0, 0.8).unwrap(),
        clifford_torus(PI / 4.0, 1.0).unwrap(),
        tube_s5(PI / 4.0, 1.0).unwrap(),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ambient::validate_point;
    use crate::geometry::{check_gauss_formula, check_weingarten};
    use crate::jets::eval_jet2_fd;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn sphere_volumes() {
        assert!((unit_sphere_volume(2) - 4.0 * PI).abs() < 1e-14);
        assert!((unit_sphere_volume(3) - 2.0 * PI * PI).abs() < 1e-13);
        assert!((unit_sphere_volume(4) - 8.0 * PI * PI / 3.0).abs() < 1e-13);
    }

    #[test]
    fn euler_characteristics() {
        assert_eq!(sphere(4, 1.0).unwrap().euler_characteristic(), 2);
        assert_eq!(tube_r5(0.5).unwrap().euler_characteristic(), 0);
        assert_eq!(clifford_torus(PI / 4.0, 1.0).unwrap().euler_characteristic(), 0);
        assert_eq!(sphere(3, 1.0).unwrap().euler_characteristic(), 0);
    }

    #[test]
    fn parameter_validation() {
        assert!(torus_of_revolution(1.0, 1.0).is_err());
        assert!(torus_of_revolution(1.0, 2.0).is_err());
        assert!(tube_r5(1.5).is_err());
        assert!(geodesic_sphere_spherical(2, 1.0, PI).is_err());
        assert!(geodesic_sphere_spherical(2, -1.0, 0.5).is_err());
        assert!(geodesic_sphere_hyperbolic(2, 1.0, 0.5).is_err());
        assert!(make_shape("no_such_shape", &ShapeParams::default()).is_err());
    }

    #[test]
    fn geodesic_sphere_reference_values() {
        let s = geodesic_sphere_spherical(2, 1.0, PI / 4.0).unwrap();
        assert!((s.reference_data["area"] - 2.0 * PI).abs() < 1e-12);
        assert!((s.reference_data["principal_curvature_magnitude"] - 1.0).abs() < 1e-12);

        let h = geodesic_sphere_hyperbolic(2, -1.0, 1.0).unwrap();
        let sh = 1.0f64.sinh();
        assert!((h.reference_data["area"] - 4.0 * PI * sh * sh).abs() < 1e-12);
        assert!(
            (h.reference_data["principal_curvature_magnitude"] - 1.0 / 1.0f64.tanh()).abs()
                < 1e-12
        );
    }

    #[test]
    fn torus_reference_area() {
        let t = torus_of_revolution(2.0, 1.0).unwrap();
        assert!((t.reference_data["area"] - 8.0 * PI * PI).abs() < 1e-12);
    }

    #[test]
    fn catalog_points_validate_and_check() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for shape in default_catalog() {
            let chart = &shape.charts[0];
            for _ in 0..12 {
                let u = random_interior_point(chart, &mut rng);
                let x = chart.position(&u).unwrap();
                assert!(
                    validate_point(&x, &shape.form, 1e-9),
                    "embedding constraint violated for {}",
                    shape.descriptor
                );
                let sp = surface_point(&shape, chart, &u).unwrap();
                let tol = if shape.n() == 2 { 1e-9 } else { 1e-7 };
                assert!(
                    check_gauss_formula(&sp.geom, &shape.form) < tol,
                    "gauss formula residual too large on {}",
                    shape.descriptor
                );
                assert!(
                    check_weingarten(&sp.geom, &shape.form).unwrap() < tol,
                    "weingarten residual too large on {}",
                    shape.descriptor
                );
            }
        }
    }

    #[test]
    fn umbilic_shapes_have_flat_spread() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let umbilic = [
            sphere(2, 1.0).unwrap(),
            sphere(4, 2.0).unwrap(),
            geodesic_sphere_spherical(2, 1.0, PI / 4.0).unwrap(),
            geodesic_sphere_spherical(4, 1.0, PI / 3.0).unwrap(),
            geodesic_sphere_hyperbolic(2, -1.0, 1.0).unwrap(),
            geodesic_sphere_hyperbolic(4, -1.0, 0.8).unwrap(),
        ];
        for shape in &umbilic {
            let chart = &shape.charts[0];
            for _ in 0..10 {
                let u = random_interior_point(chart, &mut rng);
                let sp = surface_point(shape, chart, &u).unwrap();
                let spread = sp.principal[0] - sp.principal[sp.principal.len() - 1];
                assert!(
                    spread.abs() < 1e-8,
                    "principal curvature spread {spread} on {}",
                    shape.descriptor
                );
                if let Some(&mag) = shape.reference_data.get("principal_curvature_magnitude") {
                    assert!(
                        (sp.principal[0].abs() - mag).abs() < 1e-8 * mag.max(1.0),
                        "curvature magnitude mismatch on {}",
                        shape.descriptor
                    );
                }
            }
        }
    }

    #[test]
    fn constant_curvature_products() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for shape in [clifford_torus(0.6, 1.0).unwrap(), tube_s5(PI / 3.0, 1.0).unwrap()] {
            let chart = &shape.charts[0];
            let want = shape.reference_data["gauss_kronecker"];
            for _ in 0..10 {
                let u = random_interior_point(chart, &mut rng);
                let sp = surface_point(&shape, chart, &u).unwrap();
                let g = sp.k[shape.n()];
                assert!(
                    (g - want).abs() < 1e-9 * want.abs().max(1.0),
                    "G = {g}, want {want} on {}",
                    shape.descriptor
                );
            }
        }
    }

    #[test]
    fn catalog_jets_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for shape in default_catalog() {
            let chart = &shape.charts[0];
            let points = if shape.n() == 2 { 100 } else { 25 };
            for _ in 0..points {
                let u = random_interior_point(chart, &mut rng);
                let exact = eval_jet2(chart, &u).unwrap();
                let fd = eval_jet2_fd(chart, &u).unwrap();
                for i in 0..shape.n() {
                    let scale = exact.dx(i).euclidean_norm().max(1.0);
                    assert!(exact.dx(i).sub(fd.dx(i)).euclidean_norm() / scale < 1e-6);
                    for j in i..shape.n() {
                        let scale = exact.d2(i, j).euclidean_norm().max(1.0);
                        assert!(exact.d2(i, j).sub(fd.d2(i, j)).euclidean_norm() / scale < 1e-6);
                    }
                }
            }
        }
    }

    #[test]
    fn make_shape_dispatch() {
        let p = ShapeParams {
            big_r: Some(2.0),
            r: Some(1.0),
            ..Default::default()
        };
        assert_eq!(make_shape("torus_rev", &p).unwrap().name, "torus_rev_r3");
        let p = ShapeParams {
            rho: Some(0.5),
            ..Default::default()
        };
        let s = make_shape("geodesic_sphere_s", &p).unwrap();
        assert_eq!(s.form.k, 1.0);
        assert_eq!(s.n(), 2);
    }
}
