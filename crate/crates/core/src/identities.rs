//! Integral-identity checkers and calibration of the space-form
//! Gauss-Bonnet constants.
//!
//! Every checker evaluates both sides of one identity by quadrature and
//! reports the residual against a threshold that couples a fixed relative
//! tolerance to the quadrature refinement proxy, so under-resolved grids
//! surface as quadrature errors rather than false identity failures.
//!
//! Directions are normalized so `|<a,a>| = 1`. The scalar identities as
//! printed assume a spacelike unit direction; for a timelike `a` in the
//! Minkowski case the checkers carry the `<a,a>` factor through the frame
//! decomposition (each report records the achieved `<a,a>` and flags the
//! timelike case).

use crate::ambient::{AmbientVector, Direction, Signature};
use crate::error::{Error, Result};
use crate::quadrature::{default_nodes, integrate_terms, Integrand, TermIntegral};
use crate::shapes::{
    clifford_torus, geodesic_sphere_hyperbolic, geodesic_sphere_spherical, tube_s5,
    unit_sphere_volume, Shape, SurfacePoint,
};

/// Safety factor on the accumulated-rounding floor of the pass threshold.
const ROUNDING_FLOOR_FACTOR: f64 = 1024.0;

/// Node counts and tolerance for one checker run.
#[derive(Debug, Clone)]
pub struct CheckConfig {
    /// Nodes per axis; a single entry broadcasts to every axis.
    pub nodes_per_axis: Vec<usize>,
    /// Relative tolerance entering the pass threshold.
    pub rel_tol: f64,
}

impl CheckConfig {
    pub fn for_shape(shape: &Shape) -> Self {
        let n = shape.n();
        CheckConfig {
            nodes_per_axis: vec![default_nodes(n)],
            rel_tol: if n <= 2 { 1e-6 } else { 1e-4 },
        }
    }

    pub fn with_nodes(mut self, nodes: Vec<usize>) -> Self {
        self.nodes_per_axis = nodes;
        self
    }

    pub fn with_rel_tol(mut self, tol: f64) -> Self {
        self.rel_tol = tol;
        self
    }

    fn resolved_nodes(&self, n: usize) -> Vec<usize> {
        if self.nodes_per_axis.len() == 1 {
            vec![self.nodes_per_axis[0]; n]
        } else {
            self.nodes_per_axis.clone()
        }
    }
}

/// LHS/RHS of one verified identity with its errors and pass status.
#[derive(Debug, Clone)]
pub struct IdentityReport {
    pub identity: String,
    pub shape: String,
    /// Normalized direction vector, when the identity uses one.
    pub a: Option<Vec<f64>>,
    /// `<a,a>` after normalization (+1 or -1).
    pub a_inner: Option<f64>,
    /// Moment order, when the identity has one.
    pub m: Option<u32>,
    pub lhs: f64,
    pub rhs: f64,
    pub abs_err: f64,
    pub rel_err: f64,
    /// Largest absolute individual integral term in the identity.
    pub scale: f64,
    pub quadrature_error_proxy: f64,
    pub nodes: Vec<usize>,
    pub pass: bool,
    pub notes: Vec<String>,
}

/// The two moment functions at a point: `q = <a, n>`, `p = <a, x>`.
#[derive(Debug, Clone, Copy)]
pub struct MomentFunctions {
    pub q: f64,
    pub p: f64,
}

impl MomentFunctions {
    pub fn at(sp: &SurfacePoint, a: &AmbientVector, sig: &Signature) -> Self {
        MomentFunctions {
            q: sig.inner_slices(&a.coords, &sp.geom.normal.coords),
            p: sig.inner_slices(&a.coords, &sp.geom.position().coords),
        }
    }
}

struct ReportBuilder {
    identity: &'static str,
    shape: String,
    a: Option<(Vec<f64>, f64)>,
    m: Option<u32>,
    nodes: Vec<usize>,
    rel_tol: f64,
    lhs: f64,
    rhs: f64,
    scale: f64,
    proxy: f64,
    l1: f64,
    total_nodes: f64,
    notes: Vec<String>,
}

impl ReportBuilder {
    fn new(identity: &'static str, shape: &Shape, cfg: &CheckConfig) -> Self {
        let nodes = cfg.resolved_nodes(shape.n());
        let per_chart: f64 = nodes.iter().map(|&v| v as f64).product();
        ReportBuilder {
            identity,
            shape: shape.descriptor.clone(),
            a: None,
            m: None,
            nodes,
            rel_tol: cfg.rel_tol,
            lhs: 0.0,
            rhs: 0.0,
            scale: 0.0,
            proxy: 0.0,
            l1: 0.0,
            total_nodes: per_chart * shape.charts.len() as f64,
            notes: Vec::new(),
        }
    }

    fn with_direction(mut self, dir: &Direction) -> Self {
        self.a = Some((dir.vector.coords.clone(), dir.inner));
        if dir.inner < 0.0 {
            self.notes
                .push("timelike direction: <a,a> = -1 carried through the identity".into());
        }
        self
    }

    fn with_m(mut self, m: u32) -> Self {
        self.m = Some(m);
        self
    }

    fn track(&mut self, coeff: f64, term: &TermIntegral) {
        self.scale = self.scale.max((coeff * term.value).abs());
        self.proxy += coeff.abs() * term.proxy;
        self.l1 += coeff.abs() * term.l1;
    }

    fn term_lhs(&mut self, coeff: f64, term: &TermIntegral) {
        if coeff == 0.0 {
            return;
        }
        self.lhs += coeff * term.value;
        self.track(coeff, term);
    }

    fn term_rhs(&mut self, coeff: f64, term: &TermIntegral) {
        if coeff == 0.0 {
            return;
        }
        self.rhs += coeff * term.value;
        self.track(coeff, term);
    }

    fn const_rhs(&mut self, value: f64) {
        self.rhs += value;
        self.scale = self.scale.max(value.abs());
        self.l1 += value.abs();
    }

    fn note(&mut self, s: String) {
        self.notes.push(s);
    }

    /// Floor on the pass threshold from accumulated floating-point rounding:
    /// a random-walk model over the summed absolute mass, with safety margin.
    fn rounding_floor(&self) -> f64 {
        ROUNDING_FLOOR_FACTOR * f64::EPSILON * self.total_nodes.sqrt().max(1.0) * self.l1
    }

    fn finish(self) -> IdentityReport {
        let abs_err = (self.lhs - self.rhs).abs();
        let threshold = (self.rel_tol * self.scale)
            .max(3.0 * self.proxy)
            .max(self.rounding_floor());
        let rel_err = abs_err / self.lhs.abs().max(self.rhs.abs()).max(self.scale).max(1e-300);
        IdentityReport {
            identity: self.identity.into(),
            shape: self.shape,
            a: self.a.as_ref().map(|(v, _)| v.clone()),
            a_inner: self.a.as_ref().map(|(_, e)| *e),
            m: self.m,
            lhs: self.lhs,
            rhs: self.rhs,
            abs_err,
            rel_err,
            scale: self.scale,
            quadrature_error_proxy: self.proxy,
            nodes: self.nodes,
            pass: abs_err <= threshold,
            notes: self.notes,
        }
    }
}

fn require(cond: bool, msg: &str) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::ContractViolation(msg.into()))
    }
}

fn constants_for(n: usize, k: f64, constants: Option<&[f64]>) -> Result<Vec<f64>> {
    if k == 0.0 {
        return Ok(vec![0.0; n / 2]);
    }
    match constants {
        Some(c) if c.len() == n / 2 => Ok(c.to_vec()),
        Some(c) => Err(Error::Configuration(format!(
            "expected {} Gauss-Bonnet constants for n = {n}, got {}",
            n / 2,
            c.len()
        ))),
        None => Err(Error::Configuration(format!(
            "curved space form (k = {k}) requires calibrated Gauss-Bonnet constants c_1..c_{}",
            n / 2
        ))),
    }
}

/// Integrands for `K_{n-2i}`, i = 1..n/2.
fn k_integrands<'a>(n: usize) -> Vec<Integrand<'a>> {
    (1..=n / 2)
        .map(|i| {
            let idx = n - 2 * i;
            Box::new(move |sp: &SurfacePoint| sp.k[idx]) as Integrand<'a>
        })
        .collect()
}

/// Normal-moment flat-space identity: `int q^2 G dv = (2 pi / 3) chi`.
pub fn check_grotemeyer(shape: &Shape, dir: &Direction, cfg: &CheckConfig) -> Result<IdentityReport> {
    require(shape.form.k == 0.0, "identity requires k = 0")?;
    require(shape.n() == 2, "identity requires surface dimension n = 2")?;
    let sig = shape.form.signature;
    let a = &dir.vector;
    let fs: Vec<Integrand> = vec![Box::new(move |sp| {
        let mf = MomentFunctions::at(sp, a, &sig);
        mf.q * mf.q * sp.k[2]
    })];
    let t = integrate_terms(shape, &fs, &cfg.resolved_nodes(2))?;
    let mut rb = ReportBuilder::new("grotemeyer", shape, cfg).with_direction(dir);
    rb.term_lhs(1.0, &t[0]);
    rb.const_rhs(2.0 * std::f64::consts::PI / 3.0 * shape.euler_characteristic as f64);
    Ok(rb.finish())
}

/// Space-form surface identity:
/// `int q^2 G = (2 pi/3) chi - (k/3) vol + (k/3) int q p K_1 - (k/3) int p^2 G`.
pub fn check_corollary2(shape: &Shape, dir: &Direction, cfg: &CheckConfig) -> Result<IdentityReport> {
    require(shape.n() == 2, "identity requires surface dimension n = 2")?;
    let sig = shape.form.signature;
    let k = shape.form.k;
    let e = dir.inner;
    let a = &dir.vector;
    let fs: Vec<Integrand> = vec![
        Box::new(move |sp| {
            let mf = MomentFunctions::at(sp, a, &sig);
            mf.q * mf.q * sp.k[2]
        }),
        Box::new(|_| 1.0),
        Box::new(move |sp| {
            let mf = MomentFunctions::at(sp, a, &sig);
            mf.q * mf.p * sp.k[1]
        }),
        Box::new(move |sp| {
            let mf = MomentFunctions::at(sp, a, &sig);
            mf.p * mf.p * sp.k[2]
        }),
    ];
    let t = integrate_terms(shape, &fs, &cfg.resolved_nodes(2))?;
    let mut rb = ReportBuilder::new("corollary2", shape, cfg).with_direction(dir);
    rb.term_lhs(1.0, &t[0]);
    rb.const_rhs(e * 2.0 * std::f64::consts::PI / 3.0 * shape.euler_characteristic as f64);
    rb.term_rhs(-e * k / 3.0, &t[1]);
    rb.term_rhs(k / 3.0, &t[2]);
    rb.term_rhs(-k / 3.0, &t[3]);
    Ok(rb.finish())
}

/// Moment-family identity, m >= 1:
/// `0 = (n+m) int q^{m+1} G - m int q^{m-1} G - k int q^m p K_{n-1}
///      + m k int q^{m-1} p^2 G`.
pub fn check_moment_identity(
    shape: &Shape,
    dir: &Direction,
    m: u32,
    cfg: &CheckConfig,
) -> Result<IdentityReport> {
    require(m >= 1, "moment identity requires m >= 1 (m = 0 is the Bivens identity)")?;
    let n = shape.n();
    let sig = shape.form.signature;
    let k = shape.form.k;
    let e = dir.inner;
    let a = &dir.vector;
    let mi = m as i32;
    let fs: Vec<Integrand> = vec![
        Box::new(move |sp| {
            let mf = MomentFunctions::at(sp, a, &sig);
            mf.q.powi(mi + 1) * sp.k[n]
        }),
        Box::new(move |sp| {
            let mf = MomentFunctions::at(sp, a, &sig);
            mf.q.powi(mi - 1) * sp.k[n]
        }),
        Box::new(move |sp| {
            let mf = MomentFunctions::at(sp, a, &sig);
            mf.q.powi(mi) * mf.p * sp.k[n - 1]
        }),
        Box::new(move |sp| {
            let mf = MomentFunctions::at(sp, a, &sig);
            mf.q.powi(mi - 1) * mf.p * mf.p * sp.k[n]
        }),
    ];
    let t = integrate_terms(shape, &fs, &cfg.resolved_nodes(n))?;
    let mut rb = ReportBuilder::new("moment", shape, cfg)
        .with_direction(dir)
        .with_m(m);
    rb.term_lhs((n as f64) + m as f64, &t[0]);
    rb.term_lhs(m as f64 * k, &t[3]);
    rb.term_rhs(m as f64 * e, &t[1]);
    rb.term_rhs(k, &t[2]);
    Ok(rb.finish())
}

/// Pre-contraction vector identity, componentwise in the ambient space:
/// `0 = (n+m) int q^m G n - m int q^{m-1} G a - k int q^m K_{n-1} x
///      + m k int q^{m-1} p G x`.
/// The report carries the worst component.
pub fn check_vector_identity(
    shape: &Shape,
    dir: &Direction,
    m: u32,
    cfg: &CheckConfig,
) -> Result<IdentityReport> {
    let n = shape.n();
    let mamb = shape.ambient_dim();
    let sig = shape.form.signature;
    let k = shape.form.k;
    let a = &dir.vector;
    let mi = m as i32;

    let mut fs: Vec<Integrand> = Vec::new();
    for c in 0..mamb {
        fs.push(Box::new(move |sp| {
            let mf = MomentFunctions::at(sp, a, &sig);
            mf.q.powi(mi) * sp.k[n] * sp.geom.normal.coords[c]
        }));
    }
    for c in 0..mamb {
        fs.push(Box::new(move |sp| {
            let mf = MomentFunctions::at(sp, a, &sig);
            mf.q.powi(mi) * sp.k[n - 1] * sp.geom.position().coords[c]
        }));
    }
    if m > 0 {
        fs.push(Box::new(move |sp| {
            let mf = MomentFunctions::at(sp, a, &sig);
            mf.q.powi(mi - 1) * sp.k[n]
        }));
        for c in 0..mamb {
            fs.push(Box::new(move |sp| {
                let mf = MomentFunctions::at(sp, a, &sig);
                mf.q.powi(mi - 1) * mf.p * sp.k[n] * sp.geom.position().coords[c]
            }));
        }
    }
    let t = integrate_terms(shape, &fs, &cfg.resolved_nodes(n))?;

    let mut rb = ReportBuilder::new("vector", shape, cfg)
        .with_direction(dir)
        .with_m(m);
    let mut worst = (0usize, -1.0f64, 0.0f64, 0.0f64, 0.0f64); // (c, abs_err, lhs, rhs, proxy)
    for c in 0..mamb {
        let gn = &t[c];
        let kx = &t[mamb + c];
        let mut lhs = (n as f64 + m as f64) * gn.value;
        let mut rhs = k * kx.value;
        let mut proxy = (n as f64 + m as f64) * gn.proxy + k.abs() * kx.proxy;
        rb.track(n as f64 + m as f64, gn);
        rb.track(k, kx);
        if m > 0 {
            let ga = &t[2 * mamb];
            let px = &t[2 * mamb + 1 + c];
            lhs += m as f64 * k * px.value;
            rhs += m as f64 * a.coords[c] * ga.value;
            proxy += m as f64 * k.abs() * px.proxy + (m as f64 * a.coords[c]).abs() * ga.proxy;
            rb.track(m as f64 * k, px);
            rb.track(m as f64 * a.coords[c], ga);
        }
        let err = (lhs - rhs).abs();
        if err > worst.1 {
            worst = (c, err, lhs, rhs, proxy);
        }
    }
    rb.lhs = worst.2;
    rb.rhs = worst.3;
    rb.proxy = worst.4;
    rb.note(format!("worst ambient component: {}", worst.0));
    Ok(rb.finish())
}

/// Bivens' identity: `int [n q G - k p K_{n-1}] dv = 0` (the m = 0 moment).
pub fn check_bivens(shape: &Shape, dir: &Direction, cfg: &CheckConfig) -> Result<IdentityReport> {
    let n = shape.n();
    let sig = shape.form.signature;
    let k = shape.form.k;
    let a = &dir.vector;
    let fs: Vec<Integrand> = vec![
        Box::new(move |sp| {
            let mf = MomentFunctions::at(sp, a, &sig);
            mf.q * sp.k[n]
        }),
        Box::new(move |sp| {
            let mf = MomentFunctions::at(sp, a, &sig);
            mf.p * sp.k[n - 1]
        }),
    ];
    let t = integrate_terms(shape, &fs, &cfg.resolved_nodes(n))?;
    let mut rb = ReportBuilder::new("bivens", shape, cfg).with_direction(dir);
    rb.term_lhs(n as f64, &t[0]);
    rb.term_rhs(k, &t[1]);
    Ok(rb.finish())
}

/// Generalized normal-moment theorem for even n, via the m = 1 moment with
/// the Gauss-Bonnet bracket substituted for `int G`:
/// `int q^2 G = (1/(n+1)) [ (vol S^n / 2) chi - sum_i c_i k^i int K_{n-2i} ]
///              + (k/(n+1)) int q p K_{n-1} - (k/(n+1)) int p^2 G`.
pub fn check_theorem2(
    shape: &Shape,
    dir: &Direction,
    cfg: &CheckConfig,
    constants: Option<&[f64]>,
) -> Result<IdentityReport> {
    let n = shape.n();
    require(n % 2 == 0, "identity requires even hypersurface dimension")?;
    let c = constants_for(n, shape.form.k, constants)?;
    let sig = shape.form.signature;
    let k = shape.form.k;
    let e = dir.inner;
    let a = &dir.vector;

    let mut fs: Vec<Integrand> = vec![
        Box::new(move |sp| {
            let mf = MomentFunctions::at(sp, a, &sig);
            mf.q * mf.q * sp.k[n]
        }),
        Box::new(move |sp| {
            let mf = MomentFunctions::at(sp, a, &sig);
            mf.q * mf.p * sp.k[n - 1]
        }),
        Box::new(move |sp| {
            let mf = MomentFunctions::at(sp, a, &sig);
            mf.p * mf.p * sp.k[n]
        }),
    ];
    if k != 0.0 {
        fs.extend(k_integrands(n));
    }
    let t = integrate_terms(shape, &fs, &cfg.resolved_nodes(n))?;

    let np1 = n as f64 + 1.0;
    let mut rb = ReportBuilder::new("theorem2", shape, cfg).with_direction(dir);
    rb.term_lhs(1.0, &t[0]);
    rb.const_rhs(e / np1 * unit_sphere_volume(n) / 2.0 * shape.euler_characteristic as f64);
    if k != 0.0 {
        for (i, ci) in c.iter().enumerate() {
            rb.term_rhs(-e / np1 * ci * k.powi(i as i32 + 1), &t[3 + i]);
        }
    }
    rb.term_rhs(k / np1, &t[1]);
    rb.term_rhs(-k / np1, &t[2]);
    Ok(rb.finish())
}

/// Gauss-Bonnet in a space form:
/// `int G = (vol S^n / 2) chi - sum_i c_i k^i int K_{n-2i}`.
pub fn check_gauss_bonnet(
    shape: &Shape,
    cfg: &CheckConfig,
    constants: Option<&[f64]>,
) -> Result<IdentityReport> {
    let n = shape.n();
    require(n % 2 == 0, "identity requires even hypersurface dimension")?;
    let c = constants_for(n, shape.form.k, constants)?;
    let k = shape.form.k;

    let mut fs: Vec<Integrand> = vec![Box::new(move |sp| sp.k[n])];
    if k != 0.0 {
        fs.extend(k_integrands(n));
    }
    let t = integrate_terms(shape, &fs, &cfg.resolved_nodes(n))?;

    let mut rb = ReportBuilder::new("gauss_bonnet", shape, cfg);
    rb.term_lhs(1.0, &t[0]);
    rb.const_rhs(unit_sphere_volume(n) / 2.0 * shape.euler_characteristic as f64);
    if k != 0.0 {
        for (i, ci) in c.iter().enumerate() {
            rb.term_rhs(-ci * k.powi(i as i32 + 1), &t[1 + i]);
        }
    }
    Ok(rb.finish())
}

/// Signature-weighted frame sum: summing the generalized moment theorem over
/// an orthonormal frame of the ambient space reproduces Gauss-Bonnet. The
/// left side is assembled purely from quadrature; the right side is the
/// Gauss-Bonnet bracket.
pub fn check_frame_sum(
    shape: &Shape,
    cfg: &CheckConfig,
    constants: Option<&[f64]>,
) -> Result<IdentityReport> {
    let n = shape.n();
    require(n % 2 == 0, "identity requires even hypersurface dimension")?;
    let c = constants_for(n, shape.form.k, constants)?;
    let k = shape.form.k;
    let mamb = shape.ambient_dim();
    let sig = shape.form.signature;

    let mut fs: Vec<Integrand> = Vec::new();
    for ci in 0..mamb {
        fs.push(Box::new(move |sp| {
            let nc = sp.geom.normal.coords[ci];
            nc * nc * sp.k[n]
        }));
    }
    if k != 0.0 {
        for ci in 0..mamb {
            fs.push(Box::new(move |sp| {
                sp.geom.normal.coords[ci] * sp.geom.position().coords[ci] * sp.k[n - 1]
            }));
        }
        for ci in 0..mamb {
            fs.push(Box::new(move |sp| {
                let xc = sp.geom.position().coords[ci];
                xc * xc * sp.k[n]
            }));
        }
        fs.extend(k_integrands(n));
    }
    let t = integrate_terms(shape, &fs, &cfg.resolved_nodes(n))?;

    let np1 = n as f64 + 1.0;
    let mf = mamb as f64;
    let mut rb = ReportBuilder::new("frame_sum", shape, cfg);
    for ci in 0..mamb {
        let eps = sig.eps(ci);
        rb.term_lhs(np1 * eps / mf, &t[ci]);
        if k != 0.0 {
            rb.term_lhs(-k * eps / mf, &t[mamb + ci]);
            rb.term_lhs(k * eps / mf, &t[2 * mamb + ci]);
        }
    }
    rb.const_rhs(unit_sphere_volume(n) / 2.0 * shape.euler_characteristic as f64);
    if k != 0.0 {
        for (i, ci) in c.iter().enumerate() {
            rb.term_rhs(-ci * k.powi(i as i32 + 1), &t[3 * mamb + i]);
        }
    }
    if sig.negatives > 0 {
        rb.note("signature-weighted frame sum: epsilon_0 = -1 on the timelike axis".into());
    }
    rb.note(format!(
        "frame completeness applied: sum eps_i q_i p_i = <n,x> = 0, sum eps_i p_i^2 = 1/k; {mamb} frame vectors"
    ));
    Ok(rb.finish())
}

/// Downward moment recursion, m >= 2:
/// `int q^m G = ((m-1)/(n+m-1)) [ int q^{m-2} G - k int q^{m-2} p^2 G
///              + (k/(m-1)) int q^{m-1} p K_{n-1} ]`.
pub fn check_recursion(
    shape: &Shape,
    dir: &Direction,
    m: u32,
    cfg: &CheckConfig,
) -> Result<IdentityReport> {
    require(m >= 2, "recursion requires m >= 2")?;
    let n = shape.n();
    let sig = shape.form.signature;
    let k = shape.form.k;
    let e = dir.inner;
    let a = &dir.vector;
    let mi = m as i32;
    let fs: Vec<Integrand> = vec![
        Box::new(move |sp| {
            let mf = MomentFunctions::at(sp, a, &sig);
            mf.q.powi(mi) * sp.k[n]
        }),
        Box::new(move |sp| {
            let mf = MomentFunctions::at(sp, a, &sig);
            mf.q.powi(mi - 2) * sp.k[n]
        }),
        Box::new(move |sp| {
            let mf = MomentFunctions::at(sp, a, &sig);
            mf.q.powi(mi - 2) * mf.p * mf.p * sp.k[n]
        }),
        Box::new(move |sp| {
            let mf = MomentFunctions::at(sp, a, &sig);
            mf.q.powi(mi - 1) * mf.p * sp.k[n - 1]
        }),
    ];
    let t = integrate_terms(shape, &fs, &cfg.resolved_nodes(n))?;

    let cm = (m as f64 - 1.0) / (n as f64 + m as f64 - 1.0);
    let mut rb = ReportBuilder::new("recursion", shape, cfg)
        .with_direction(dir)
        .with_m(m);
    rb.term_lhs(1.0, &t[0]);
    rb.term_rhs(cm * e, &t[1]);
    rb.term_rhs(-cm * k, &t[2]);
    rb.term_rhs(k / (n as f64 + m as f64 - 1.0), &t[3]);

    // Cross-validation: the bracket exactly as printed, with (k/(m-1)) on the
    // K_{n-1} term, against the flat rearrangement of the moment identity.
    let printed = cm * (e * t[1].value - k * t[2].value + k / (m as f64 - 1.0) * t[3].value);
    let diff = (printed - rb.rhs).abs();
    rb.note(format!(
        "printed-bracket vs moment-identity rearrangement: difference {diff:.3e}"
    ));
    Ok(rb.finish())
}

/// Coefficients of the closed-form moment expansion.
#[derive(Debug, Clone)]
pub struct ClosedFormCoefficients {
    /// Coefficient of the Gauss-Bonnet bracket (zero for odd m).
    pub bracket: f64,
    /// `(q exponent, coefficient)` of the `p^2 G` correction series.
    pub p2g: Vec<(i32, f64)>,
    /// `(q exponent, coefficient)` of the `p K_{n-1}` correction series.
    pub pk: Vec<(i32, f64)>,
}

/// Builds the double-factorial coefficient series of the closed forms by
/// unfolding the moment recursion down to its base case (`int G` for even m,
/// the Bivens identity for odd m). `e_a = <a,a>` enters one factor per
/// unfolding step.
pub fn closed_form_coefficients(n: usize, m: u32, e_a: f64) -> Result<ClosedFormCoefficients> {
    require(m >= 1, "closed form requires m >= 1")?;
    let (nf, mf) = (n as f64, m as f64);
    let mut p2g = Vec::new();
    let mut pk = Vec::new();
    let l_max_pk = (m as usize + 1) / 2;
    let l_max_p2g = m as usize / 2;
    let mut ratio = 1.0;
    let mut e_pow = 1.0;
    for l in 1..=l_max_pk {
        let lf = l as f64;
        let num = mf - 2.0 * lf + 1.0;
        let den = nf + mf - 2.0 * lf + 1.0;
        pk.push((m as i32 - 2 * l as i32 + 1, e_pow * ratio / den));
        if l <= l_max_p2g {
            p2g.push((m as i32 - 2 * l as i32, e_pow * ratio * num / den));
        }
        ratio *= num / den;
        e_pow *= e_a;
    }
    let bracket = if m % 2 == 0 { e_pow * ratio } else { 0.0 };

    // Parity guard: the series must terminate exactly where the printed
    // closed forms do.
    let p2g_end = p2g.last().map(|(ex, _)| *ex);
    let pk_end = pk.last().map(|(ex, _)| *ex);
    let ok = if m % 2 == 0 {
        p2g_end == Some(0) && pk_end == Some(1)
    } else {
        pk_end == Some(0) && (m == 1 || p2g_end == Some(1))
    };
    require(ok, "closed-form coefficient series does not match the parity of m")?;
    Ok(ClosedFormCoefficients { bracket, p2g, pk })
}

/// Closed-form moment evaluation for even n: the double-factorial
/// coefficient times the Gauss-Bonnet bracket (even m), corrected by the
/// k-weighted `p^2 G` and `p K_{n-1}` series; no topological term for odd m.
pub fn check_closed_form(
    shape: &Shape,
    dir: &Direction,
    m: u32,
    cfg: &CheckConfig,
    constants: Option<&[f64]>,
) -> Result<IdentityReport> {
    let n = shape.n();
    require(n % 2 == 0, "identity requires even hypersurface dimension")?;
    require(m >= 1, "closed form requires m >= 1")?;
    let k = shape.form.k;
    let needs_bracket = m % 2 == 0;
    let c = if needs_bracket {
        constants_for(n, k, constants)?
    } else {
        vec![0.0; n / 2]
    };
    let coeffs = closed_form_coefficients(n, m, dir.inner)?;
    let sig = shape.form.signature;
    let a = &dir.vector;
    let mi = m as i32;

    let mut fs: Vec<Integrand> = vec![Box::new(move |sp| {
        let mf = MomentFunctions::at(sp, a, &sig);
        mf.q.powi(mi) * sp.k[n]
    })];
    if k != 0.0 {
        for &(ex, _) in &coeffs.p2g {
            fs.push(Box::new(move |sp| {
                let mf = MomentFunctions::at(sp, a, &sig);
                mf.q.powi(ex) * mf.p * mf.p * sp.k[n]
            }));
        }
        for &(ex, _) in &coeffs.pk {
            fs.push(Box::new(move |sp| {
                let mf = MomentFunctions::at(sp, a, &sig);
                mf.q.powi(ex) * mf.p * sp.k[n - 1]
            }));
        }
        if needs_bracket {
            fs.extend(k_integrands(n));
        }
    }
    let t = integrate_terms(shape, &fs, &cfg.resolved_nodes(n))?;

    let mut rb = ReportBuilder::new("closed_form", shape, cfg)
        .with_direction(dir)
        .with_m(m);
    rb.term_lhs(1.0, &t[0]);
    if needs_bracket {
        rb.const_rhs(coeffs.bracket * unit_sphere_volume(n) / 2.0 * shape.euler_characteristic as f64);
    }
    if k != 0.0 {
        let mut idx = 1;
        for &(_, coeff) in &coeffs.p2g {
            rb.term_rhs(-k * coeff, &t[idx]);
            idx += 1;
        }
        for &(_, coeff) in &coeffs.pk {
            rb.term_rhs(k * coeff, &t[idx]);
            idx += 1;
        }
        if needs_bracket {
            for (i, ci) in c.iter().enumerate() {
                rb.term_rhs(-coeffs.bracket * ci * k.powi(i as i32 + 1), &t[idx]);
                idx += 1;
            }
        }
    }
    Ok(rb.finish())
}

/// Result of calibrating the Gauss-Bonnet constants numerically.
#[derive(Debug, Clone)]
pub struct Calibration {
    pub n: usize,
    pub k: f64,
    pub constants: Vec<f64>,
    /// Condition number of the calibration system.
    pub condition: f64,
    /// Relative residual of the solve on the fitting spheres.
    pub fit_residual: f64,
    /// Gauss-Bonnet validation on held-out shapes.
    pub validation: Vec<IdentityReport>,
}

/// Determines `c_1..c_{n/2}` of the Gauss-Bonnet bracket from geodesic
/// spheres: the first n/2 radii build the linear system, any extra radii are
/// held out for validation, and a non-umbilic shape of the same curvature
/// sign is always validated when one exists in the catalog.
pub fn calibrate_gb_constants(
    n: usize,
    k: f64,
    radii: &[f64],
    cfg: &CheckConfig,
) -> Result<Calibration> {
    require(n % 2 == 0 && n >= 2, "calibration requires even n >= 2")?;
    if k == 0.0 {
        return Err(Error::Calibration("k must be nonzero".into()));
    }
    let unknowns = n / 2;
    if radii.len() < unknowns {
        return Err(Error::Calibration(format!(
            "need at least {unknowns} radii, got {}",
            radii.len()
        )));
    }
    for (i, &r) in radii.iter().enumerate() {
        for &s in &radii[i + 1..] {
            if (r - s).abs() < 1e-9 {
                return Err(Error::Calibration(format!("radii must be distinct, got {r} twice")));
            }
        }
    }

    let make_sphere = |rho: f64| -> Result<Shape> {
        if k > 0.0 {
            geodesic_sphere_spherical(n, k, rho)
        } else {
            geodesic_sphere_hyperbolic(n, k, rho)
        }
    };

    // Row per fitting sphere: sum_i c_i k^i int K_{n-2i} = (vol/2) chi - int G.
    let mut mat = nalgebra::DMatrix::<f64>::zeros(unknowns, unknowns);
    let mut rhs = nalgebra::DVector::<f64>::zeros(unknowns);
    for (row, &rho) in radii[..unknowns].iter().enumerate() {
        let sphere = make_sphere(rho)?;
        let mut fs: Vec<Integrand> = vec![Box::new(move |sp| sp.k[n])];
        fs.extend(k_integrands(n));
        let t = integrate_terms(&sphere, &fs, &cfg.resolved_nodes(n))?;
        rhs[row] = unit_sphere_volume(n) / 2.0 * 2.0 - t[0].value;
        for i in 0..unknowns {
            mat[(row, i)] = k.powi(i as i32 + 1) * t[1 + i].value;
        }
    }

    let svd = nalgebra::SVD::new(mat.clone(), true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    let condition = smax / smin.max(1e-300);
    if condition > 1e8 {
        return Err(Error::Calibration(format!(
            "calibration system condition {condition:.3e} exceeds 1e8; choose better-separated radii"
        )));
    }
    let sol = svd
        .solve(&rhs, 1e-14 * smax)
        .map_err(|e| Error::Calibration(e.to_string()))?;
    let constants: Vec<f64> = sol.iter().copied().collect();
    let fit_residual = (&mat * &sol - &rhs).norm() / rhs.norm().max(1e-300);

    let mut validation = Vec::new();
    for &rho in &radii[unknowns..] {
        let sphere = make_sphere(rho)?;
        let report = check_gauss_bonnet(&sphere, &CheckConfig::for_shape(&sphere), Some(&constants))?;
        validation.push(report);
    }
    if k > 0.0 {
        let transfer = if n == 2 {
            clifford_torus(std::f64::consts::FRAC_PI_4, k)?
        } else if n == 4 {
            tube_s5(std::f64::consts::FRAC_PI_4, k)?
        } else {
            return Err(Error::Calibration(format!("no validation shape for n = {n}")));
        };
        let report =
            check_gauss_bonnet(&transfer, &CheckConfig::for_shape(&transfer), Some(&constants))?;
        validation.push(report);
    }

    Ok(Calibration {
        n,
        k,
        constants,
        condition,
        fit_residual,
        validation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shapes::{ellipsoid, sphere, torus_of_revolution};
    use std::f64::consts::PI;

    fn dir(shape: &Shape, coords: Vec<f64>) -> Direction {
        Direction::normalize(&AmbientVector::new(coords), &shape.form.signature).unwrap()
    }

    fn cfg2() -> CheckConfig {
        CheckConfig {
            nodes_per_axis: vec![64],
            rel_tol: 1e-6,
        }
    }

    #[test]
    fn grotemeyer_unit_sphere() {
        let shape = sphere(2, 1.0).unwrap();
        for axis in 0..3 {
            let d = dir(&shape, AmbientVector::basis(3, axis).coords);
            let r = check_grotemeyer(&shape, &d, &cfg2()).unwrap();
            let want = 4.0 * PI / 3.0;
            assert!(r.pass, "{r:?}");
            assert!((r.lhs - want).abs() < 1e-8 * want);
            assert!((r.rhs - want).abs() < 1e-15);
        }
    }

    #[test]
    fn grotemeyer_torus_vanishes() {
        let shape = torus_of_revolution(2.0, 1.0).unwrap();
        let d = dir(&shape, vec![0.3, -0.2, 0.9]);
        let r = check_grotemeyer(&shape, &d, &cfg2()).unwrap();
        assert_eq!(r.rhs, 0.0);
        assert!(r.lhs.abs() < 1e-8 * 8.0 * PI * PI);
        assert!(r.pass, "{r:?}");
    }

    #[test]
    fn grotemeyer_ellipsoid_direction_independent() {
        let shape = ellipsoid(&[1.0, 1.0, 2.0]).unwrap();
        let want = 4.0 * PI / 3.0;
        let mut values = Vec::new();
        for axis in 0..3 {
            let d = dir(&shape, AmbientVector::basis(3, axis).coords);
            let r = check_grotemeyer(&shape, &d, &cfg2()).unwrap();
            assert!(r.pass, "{r:?}");
            assert!((r.lhs - want).abs() < 1e-8 * want, "axis {axis}: {}", r.lhs);
            values.push(r.lhs);
        }
        for v in &values {
            assert!((v - values[0]).abs() < 1e-8 * want);
        }
    }

    #[test]
    fn grotemeyer_preconditions() {
        let curved = geodesic_sphere_spherical(2, 1.0, 0.7).unwrap();
        let d = dir(&curved, vec![0.0, 1.0, 0.0, 0.0]);
        assert!(check_grotemeyer(&curved, &d, &cfg2()).is_err());
    }

    #[test]
    fn corollary2_space_forms() {
        let cases = [
            geodesic_sphere_spherical(2, 1.0, PI / 4.0).unwrap(),
            geodesic_sphere_spherical(2, 4.0, PI / 6.0).unwrap(),
            geodesic_sphere_hyperbolic(2, -1.0, 1.0).unwrap(),
            clifford_torus(PI / 4.0, 1.0).unwrap(),
        ];
        for shape in &cases {
            let mut coords = vec![0.0; shape.ambient_dim()];
            coords[1] = 0.6;
            coords[2] = 0.8;
            let d = dir(shape, coords);
            let r = check_corollary2(shape, &d, &cfg2()).unwrap();
            assert!(r.pass, "{} failed: {r:?}", shape.descriptor);
            assert!(
                r.abs_err < 1e-6 * r.lhs.abs().max(r.rhs.abs()).max(1.0),
                "{}: {r:?}",
                shape.descriptor
            );
        }
    }

    #[test]
    fn corollary2_reduces_to_grotemeyer_flat() {
        let shape = sphere(2, 1.0).unwrap();
        let d = dir(&shape, vec![0.0, 0.0, 1.0]);
        let a = check_grotemeyer(&shape, &d, &cfg2()).unwrap();
        let b = check_corollary2(&shape, &d, &cfg2()).unwrap();
        assert_eq!(a.lhs.to_bits(), b.lhs.to_bits());
        assert!((a.rhs - b.rhs).abs() < 1e-15);
    }

    #[test]
    fn moment_identity_unit_sphere() {
        let shape = sphere(2, 1.0).unwrap();
        let d = dir(&shape, vec![0.0, 0.0, 1.0]);
        let r = check_moment_identity(&shape, &d, 1, &cfg2()).unwrap();
        // (2+1) int q^2 G = int G: both 4 pi.
        assert!((r.lhs - 4.0 * PI).abs() < 1e-9);
        assert!((r.rhs - 4.0 * PI).abs() < 1e-12);
        assert!(r.abs_err < 1e-9, "{r:?}");
        assert!(check_moment_identity(&shape, &d, 0, &cfg2()).is_err());
    }

    #[test]
    fn moment_identity_curved_and_odd_n() {
        let s3 = geodesic_sphere_spherical(2, 1.0, PI / 3.0).unwrap();
        let d3 = dir(&s3, vec![0.0, 0.48, -0.6, 0.64]);
        for m in 1..=4 {
            let r = check_moment_identity(&s3, &d3, m, &cfg2()).unwrap();
            assert!(r.pass, "m={m}: {r:?}");
            assert!(r.abs_err < 1e-6 * r.nodes.len().max(1) as f64 * r.lhs.abs().max(r.rhs.abs()).max(1e-6), "m={m}: {r:?}");
        }
        // Odd hypersurface dimension is allowed for the moment family.
        let s_odd = sphere(3, 1.0).unwrap();
        let d_odd = dir(&s_odd, vec![0.5, 0.5, 0.5, 0.5]);
        let cfg = CheckConfig {
            nodes_per_axis: vec![32],
            rel_tol: 1e-6,
        };
        let r = check_moment_identity(&s_odd, &d_odd, 2, &cfg).unwrap();
        assert!(r.pass, "{r:?}");
    }

    #[test]
    fn vector_identity_examples() {
        // m = 0, k = 0: int G n dv = 0 componentwise.
        let ell = ellipsoid(&[1.0, 1.0, 2.0]).unwrap();
        let d = dir(&ell, vec![0.0, 0.0, 1.0]);
        let r = check_vector_identity(&ell, &d, 0, &cfg2()).unwrap();
        assert!(r.pass, "{r:?}");

        // m = 1 on the unit sphere: 3 int q G n dv = int G a dv = (4 pi / 3) a.
        let sph = sphere(2, 1.0).unwrap();
        let d = dir(&sph, vec![0.0, 0.0, 1.0]);
        let r = check_vector_identity(&sph, &d, 1, &cfg2()).unwrap();
        assert!(r.pass, "{r:?}");
        // The worst component carries both sides close to 4 pi / 3 or zero.
        assert!(r.abs_err < 1e-9, "{r:?}");

        let cliff = clifford_torus(PI / 4.0, 1.0).unwrap();
        let d = dir(&cliff, vec![0.1, 0.5, -0.4, 0.7]);
        let r = check_vector_identity(&cliff, &d, 1, &cfg2()).unwrap();
        assert!(r.pass, "{r:?}");
        let scale = r.lhs.abs().max(r.rhs.abs()).max(1e-12);
        assert!(r.abs_err / scale < 1e-6 || r.abs_err < 1e-9, "{r:?}");
    }

    #[test]
    fn bivens_examples() {
        let ell = ellipsoid(&[1.0, 1.0, 2.0]).unwrap();
        let d = dir(&ell, vec![0.3, -0.1, 0.9]);
        let r = check_bivens(&ell, &d, &cfg2()).unwrap();
        assert!(r.pass && r.rhs == 0.0, "{r:?}");

        let gs = geodesic_sphere_spherical(2, 1.0, PI / 4.0).unwrap();
        let d = dir(&gs, vec![0.0, 0.6, 0.0, 0.8]);
        let r = check_bivens(&gs, &d, &cfg2()).unwrap();
        assert!(r.pass, "{r:?}");

        let cliff = clifford_torus(PI / 4.0, 1.0).unwrap();
        let d = dir(&cliff, vec![0.5, 0.1, -0.3, 0.8]);
        let r = check_bivens(&cliff, &d, &cfg2()).unwrap();
        assert!(r.pass, "{r:?}");
    }

    #[test]
    fn theorem2_matches_corollary2_at_n2() {
        let shape = geodesic_sphere_spherical(2, 1.0, PI / 4.0).unwrap();
        let d = dir(&shape, vec![0.0, 0.6, 0.0, 0.8]);
        let a = check_theorem2(&shape, &d, &cfg2(), Some(&[1.0])).unwrap();
        let b = check_corollary2(&shape, &d, &cfg2()).unwrap();
        assert_eq!(a.lhs.to_bits(), b.lhs.to_bits());
        let scale = a.rhs.abs().max(1.0);
        assert!((a.rhs - b.rhs).abs() < 1e-12 * scale);
        assert!(a.pass && b.pass);
        // Missing constants in a curved form is a configuration error.
        assert!(matches!(
            check_theorem2(&shape, &d, &cfg2(), None),
            Err(Error::Configuration(_))
        ));
    }

    #[test]
    fn gauss_bonnet_closed_form_example() {
        // n=2, k=1, c1=1, geodesic sphere: int G = 4 pi cos^2(rho),
        // rhs = 4 pi - 4 pi sin^2(rho).
        let rho = PI / 4.0;
        let shape = geodesic_sphere_spherical(2, 1.0, rho).unwrap();
        let r = check_gauss_bonnet(&shape, &cfg2(), Some(&[1.0])).unwrap();
        let want = 4.0 * PI * rho.cos() * rho.cos();
        assert!((r.lhs - want).abs() < 1e-9, "{r:?}");
        assert!((r.rhs - want).abs() < 1e-9, "{r:?}");
        assert!(r.pass);

        // Torus in R^3: int G = 0.
        let torus = torus_of_revolution(2.0, 1.0).unwrap();
        let r = check_gauss_bonnet(&torus, &cfg2(), None).unwrap();
        assert!(r.lhs.abs() < 1e-9 * 8.0 * PI * PI && r.rhs == 0.0 && r.pass, "{r:?}");
    }

    #[test]
    fn frame_sum_reproduces_gauss_bonnet() {
        // Flat case: sum over 3 axes = 2 pi chi.
        for shape in [sphere(2, 1.0).unwrap(), ellipsoid(&[1.0, 1.0, 2.0]).unwrap()] {
            let r = check_frame_sum(&shape, &cfg2(), None).unwrap();
            let want = 4.0 * PI;
            assert!((r.lhs - want).abs() < 1e-8 * want, "{r:?}");
            assert!((r.rhs - want).abs() < 1e-14, "{r:?}");
            assert!(r.pass);
        }

        // Curved cases need c1 = 1.
        let cliff = clifford_torus(PI / 4.0, 1.0).unwrap();
        let r = check_frame_sum(&cliff, &cfg2(), Some(&[1.0])).unwrap();
        assert!(r.pass, "{r:?}");

        let hyp = geodesic_sphere_hyperbolic(2, -1.0, 1.0).unwrap();
        let r = check_frame_sum(&hyp, &cfg2(), Some(&[1.0])).unwrap();
        assert!(r.pass, "{r:?}");
        assert!(r.notes.iter().any(|n| n.contains("epsilon_0")), "{r:?}");
        let scale = r.lhs.abs().max(r.rhs.abs());
        assert!(r.abs_err / scale < 1e-6, "{r:?}");
    }

    #[test]
    fn recursion_examples() {
        let shape = sphere(2, 1.0).unwrap();
        let d = dir(&shape, vec![0.0, 0.0, 1.0]);
        // m = 2: int q^2 G = (1/3) int G = 4 pi / 3.
        let r = check_recursion(&shape, &d, 2, &cfg2()).unwrap();
        assert!((r.lhs - 4.0 * PI / 3.0).abs() < 1e-9, "{r:?}");
        assert!(r.pass);
        // m = 4: int q^4 G = (3/5)(1/3) int G = 4 pi / 5.
        let r = check_recursion(&shape, &d, 4, &cfg2()).unwrap();
        assert!((r.lhs - 4.0 * PI / 5.0).abs() < 1e-9, "{r:?}");
        assert!(r.pass);
        assert!(check_recursion(&shape, &d, 1, &cfg2()).is_err());

        let gs = geodesic_sphere_spherical(2, 1.0, PI / 4.0).unwrap();
        let d = dir(&gs, vec![0.0, 1.0, 0.0, 0.0]);
        let r = check_recursion(&gs, &d, 3, &cfg2()).unwrap();
        assert!(r.pass, "{r:?}");
        let scale = r.lhs.abs().max(r.rhs.abs()).max(r.quadrature_error_proxy);
        assert!(r.abs_err <= (1e-6 * scale).max(3.0 * r.quadrature_error_proxy), "{r:?}");
    }

    #[test]
    fn closed_form_examples() {
        // k = 0, n = 2, m = 4 on the unit sphere: int q^4 G = 4 pi / 5.
        let shape = sphere(2, 1.0).unwrap();
        let d = dir(&shape, vec![0.0, 0.0, 1.0]);
        let r = check_closed_form(&shape, &d, 4, &cfg2(), None).unwrap();
        let want = 4.0 * PI / 5.0;
        assert!((r.lhs - want).abs() < 1e-8 * want, "{r:?}");
        assert!((r.rhs - want).abs() < 1e-14, "{r:?}");
        assert!(r.pass);

        // Odd m with k = 0: both correction series carry k, so rhs = 0.
        for m in [1u32, 3, 5] {
            let r = check_closed_form(&shape, &d, m, &cfg2(), None).unwrap();
            assert_eq!(r.rhs, 0.0, "m={m}");
            assert!(r.pass, "m={m}: {r:?}");
        }

        // Curved n = 2, m = 2 with c1 = 1.
        let gs = geodesic_sphere_spherical(2, 1.0, PI / 4.0).unwrap();
        let d = dir(&gs, vec![0.0, 0.28, 0.96, 0.0]);
        let r = check_closed_form(&gs, &d, 2, &cfg2(), Some(&[1.0])).unwrap();
        assert!(r.pass, "{r:?}");
        let scale = r.lhs.abs().max(r.rhs.abs());
        assert!(r.abs_err / scale < 1e-6, "{r:?}");
    }

    #[test]
    fn closed_form_coefficient_series() {
        let close = |got: &[(i32, f64)], want: &[(i32, f64)]| {
            assert_eq!(got.len(), want.len());
            for (g, w) in got.iter().zip(want) {
                assert_eq!(g.0, w.0);
                assert!((g.1 - w.1).abs() < 1e-15, "{got:?} vs {want:?}");
            }
        };
        // Even m: printed double-factorial ratios.
        let c = closed_form_coefficients(2, 4, 1.0).unwrap();
        assert!((c.bracket - 0.2).abs() < 1e-15);
        close(&c.p2g, &[(2, 0.6), (0, 0.2)]);
        close(&c.pk, &[(3, 0.2), (1, 0.2)]);

        // Odd m terminates at the Bivens base case.
        let c = closed_form_coefficients(2, 3, 1.0).unwrap();
        assert_eq!(c.bracket, 0.0);
        close(&c.p2g, &[(1, 0.5)]);
        close(&c.pk, &[(2, 0.25), (0, 0.25)]);

        // m = 1 is exactly the rearranged Bivens identity.
        let c = closed_form_coefficients(4, 1, 1.0).unwrap();
        assert!(c.p2g.is_empty());
        assert_eq!(c.pk, vec![(0, 0.25)]);
    }

    #[test]
    fn moment_vs_theorem2_algebraic_consistency() {
        // Same integrals, algebraic rearrangement only.
        let shape = geodesic_sphere_spherical(2, 1.0, PI / 3.0).unwrap();
        let sig = shape.form.signature;
        let d = dir(&shape, vec![0.0, 0.6, 0.64, 0.48]);
        let a = &d.vector;
        let n = 2usize;
        let k = shape.form.k;
        let fs: Vec<Integrand> = vec![
            Box::new(|sp| sp.k[2]),
            Box::new(move |sp| {
                let mf = MomentFunctions::at(sp, a, &sig);
                mf.q * mf.q * sp.k[2]
            }),
            Box::new(move |sp| {
                let mf = MomentFunctions::at(sp, a, &sig);
                mf.q * mf.p * sp.k[1]
            }),
            Box::new(move |sp| {
                let mf = MomentFunctions::at(sp, a, &sig);
                mf.p * mf.p * sp.k[2]
            }),
        ];
        let t = integrate_terms(&shape, &fs, &[48]).unwrap();
        let (ig, iq2g, iqpk, ip2g) = (t[0].value, t[1].value, t[2].value, t[3].value);
        let np1 = n as f64 + 1.0;
        // Moment m=1 residual vs (n+1) * (Eq 3.9) residual.
        let r_moment = (np1 * iq2g + k * ip2g) - (ig + k * iqpk);
        let r_theorem_form = np1 * (iq2g - (ig / np1 + k / np1 * iqpk - k / np1 * ip2g));
        let scale = iq2g.abs().max(ig.abs()).max(1.0);
        assert!((r_moment - r_theorem_form).abs() < 1e-12 * scale);
    }

    #[test]
    fn vector_contraction_matches_bivens() {
        let shape = geodesic_sphere_hyperbolic(2, -1.0, 0.8).unwrap();
        let sig = shape.form.signature;
        let d = dir(&shape, vec![0.0, 0.8, 0.0, 0.6]);
        let a = d.vector.clone();
        let n = 2usize;
        let k = shape.form.k;
        let mamb = 4usize;
        let mut fs: Vec<Integrand> = Vec::new();
        for c in 0..mamb {
            fs.push(Box::new(move |sp: &SurfacePoint| sp.k[n] * sp.geom.normal.coords[c]));
        }
        for c in 0..mamb {
            fs.push(Box::new(move |sp: &SurfacePoint| {
                sp.k[n - 1] * sp.geom.position().coords[c]
            }));
        }
        let t = integrate_terms(&shape, &fs, &[48]).unwrap();
        // Contract the m=0 vector identity with a under the signed product.
        let mut contracted = 0.0;
        for c in 0..mamb {
            let eps = sig.eps(c);
            contracted += eps * a.coords[c] * (n as f64 * t[c].value - k * t[mamb + c].value);
        }
        let r = check_bivens(&shape, &d, &CheckConfig { nodes_per_axis: vec![48], rel_tol: 1e-6 }).unwrap();
        let bivens_residual = r.lhs - r.rhs;
        let scale = t.iter().map(|v| v.value.abs()).fold(1.0, f64::max);
        assert!((contracted - bivens_residual).abs() < 1e-12 * scale);
    }

    #[test]
    fn calibration_recovers_c1() {
        let cfg = CheckConfig {
            nodes_per_axis: vec![64],
            rel_tol: 1e-6,
        };
        let cal = calibrate_gb_constants(2, 1.0, &[PI / 6.0, PI / 3.0], &cfg).unwrap();
        assert!((cal.constants[0] - 1.0).abs() < 1e-6, "{:?}", cal.constants);
        assert!(cal.condition < 1e8);
        for report in &cal.validation {
            assert!(report.pass, "{report:?}");
        }

        let cal = calibrate_gb_constants(2, -1.0, &[0.5, 1.0], &cfg).unwrap();
        assert!((cal.constants[0] - 1.0).abs() < 1e-6, "{:?}", cal.constants);
    }

    #[test]
    fn calibration_rejects_bad_input() {
        let cfg = cfg2();
        assert!(calibrate_gb_constants(3, 1.0, &[0.5, 0.7], &cfg).is_err());
        assert!(calibrate_gb_constants(2, 0.0, &[0.5, 0.7], &cfg).is_err());
        assert!(calibrate_gb_constants(2, 1.0, &[], &cfg).is_err());
        assert!(calibrate_gb_constants(2, 1.0, &[0.5, 0.5], &cfg).is_err());
    }

    #[test]
    fn orientation_flip_preserves_reports() {
        // For even n every summand is separately orientation-even.
        let shape = geodesic_sphere_spherical(2, 1.0, PI / 4.0).unwrap();
        let flipped = shape.flipped();
        let d = dir(&shape, vec![0.0, 0.6, 0.0, 0.8]);
        // Identities whose every summand has an even power of the normal are
        // value-invariant under the flip.
        let even_pairs: Vec<(IdentityReport, IdentityReport)> = vec![
            (
                check_corollary2(&shape, &d, &cfg2()).unwrap(),
                check_corollary2(&flipped, &d, &cfg2()).unwrap(),
            ),
            (
                check_moment_identity(&shape, &d, 1, &cfg2()).unwrap(),
                check_moment_identity(&flipped, &d, 1, &cfg2()).unwrap(),
            ),
            (
                check_frame_sum(&shape, &cfg2(), Some(&[1.0])).unwrap(),
                check_frame_sum(&flipped, &cfg2(), Some(&[1.0])).unwrap(),
            ),
        ];
        for (plus, minus) in &even_pairs {
            assert_eq!(plus.pass, minus.pass, "{}", plus.identity);
            let scale = plus.lhs.abs().max(plus.scale).max(1.0);
            assert!(
                (plus.lhs - minus.lhs).abs() < 1e-10 * scale,
                "{}: {} vs {}",
                plus.identity,
                plus.lhs,
                minus.lhs
            );
            assert!((plus.rhs - minus.rhs).abs() < 1e-10 * scale, "{}", plus.identity);
        }
        // Odd-power identities negate both sides; the pass status survives.
        let plus = check_bivens(&shape, &d, &cfg2()).unwrap();
        let minus = check_bivens(&flipped, &d, &cfg2()).unwrap();
        assert_eq!(plus.pass, minus.pass);
        let scale = plus.lhs.abs().max(1.0);
        assert!((plus.lhs + minus.lhs).abs() < 1e-10 * scale);
        assert!((plus.rhs + minus.rhs).abs() < 1e-10 * scale);
    }

    #[test]
    fn scaling_covariance_flat_even_n() {
        // Under x -> lambda x the moment integral int q^m G dv is invariant
        // for even n (G scales by lambda^-n, dv by lambda^n).
        let base: Vec<f64> = vec![1.0, 1.0, 2.0];
        let mut values = Vec::new();
        for lambda in [0.5f64, 1.0, 2.0] {
            let axes: Vec<f64> = base.iter().map(|a| a * lambda).collect();
            let shape = ellipsoid(&axes).unwrap();
            let d = dir(&shape, vec![0.25, -0.5, 0.75]);
            let r = check_closed_form(&shape, &d, 2, &cfg2(), None).unwrap();
            values.push(r.lhs);
            assert!(r.pass, "lambda={lambda}: {r:?}");
        }
        for v in &values {
            assert!((v - values[0]).abs() < 1e-8 * values[0].abs());
        }
    }

    #[test]
    fn timelike_direction_flagged_and_consistent() {
        let shape = geodesic_sphere_hyperbolic(2, -1.0, 0.9).unwrap();
        let timelike = Direction::normalize(
            &AmbientVector::new(vec![2.0, 0.5, 0.3, 0.1]),
            &shape.form.signature,
        )
        .unwrap();
        assert_eq!(timelike.inner, -1.0);
        let r = check_moment_identity(&shape, &timelike, 2, &cfg2()).unwrap();
        assert_eq!(r.a_inner, Some(-1.0));
        assert!(r.notes.iter().any(|n| n.contains("timelike")));
        assert!(r.pass, "signed moment identity should hold: {r:?}");
        let r = check_corollary2(&shape, &timelike, &cfg2()).unwrap();
        assert!(r.pass, "signed surface identity should hold: {r:?}");
    }
}
