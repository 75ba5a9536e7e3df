//! Chart maps and their exact first/second partial derivatives.
//!
//! Charts are evaluated in truncated second-order Taylor (hyper-dual)
//! arithmetic: one evaluation per unordered direction pair yields the value,
//! both first partials, and one mixed second partial, all exact to machine
//! precision. A central finite-difference fallback is provided for
//! cross-checking only.

use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::Arc;

use crate::ambient::AmbientVector;
use crate::error::{Error, Result};

/// Truncated second-order Taylor scalar carrying two derivative directions.
///
/// `re` is the value, `d1`/`d2` the directional first derivatives, `dd` the
/// mixed second derivative. Arithmetic propagates all four components by the
/// chain rule; the real part never reads a dual slot, so `re` reproduces
/// plain f64 evaluation bit for bit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HyperDual {
    pub re: f64,
    pub d1: f64,
    pub d2: f64,
    pub dd: f64,
}

impl HyperDual {
    #[inline]
    pub fn constant(re: f64) -> Self {
        HyperDual {
            re,
            d1: 0.0,
            d2: 0.0,
            dd: 0.0,
        }
    }

    /// Variable seeded with unit rates along the two active directions.
    #[inline]
    pub fn seeded(re: f64, d1: f64, d2: f64) -> Self {
        HyperDual {
            re,
            d1,
            d2,
            dd: 0.0,
        }
    }

    /// Univariate chain rule: maps self through g given g(x), g'(x), g''(x).
    #[inline]
    fn lift(self, g: f64, dg: f64, ddg: f64) -> Self {
        HyperDual {
            re: g,
            d1: dg * self.d1,
            d2: dg * self.d2,
            dd: dg * self.dd + ddg * self.d1 * self.d2,
        }
    }

    #[inline]
    pub fn sin(self) -> Self {
        let (s, c) = self.re.sin_cos();
        self.lift(s, c, -s)
    }

    #[inline]
    pub fn cos(self) -> Self {
        let (s, c) = self.re.sin_cos();
        self.lift(c, -s, -c)
    }

    #[inline]
    pub fn sinh(self) -> Self {
        let (s, c) = (self.re.sinh(), self.re.cosh());
        self.lift(s, c, s)
    }

    #[inline]
    pub fn cosh(self) -> Self {
        let (s, c) = (self.re.sinh(), self.re.cosh());
        self.lift(c, s, c)
    }

    #[inline]
    pub fn exp(self) -> Self {
        let e = self.re.exp();
        self.lift(e, e, e)
    }

    #[inline]
    pub fn sqrt(self) -> Self {
        let s = self.re.sqrt();
        let ds = 0.5 / s;
        self.lift(s, ds, -0.5 * ds / self.re)
    }

    #[inline]
    pub fn recip(self) -> Self {
        let inv = 1.0 / self.re;
        self.lift(inv, -inv * inv, 2.0 * inv * inv * inv)
    }

    #[inline]
    pub fn powi(self, n: i32) -> Self {
        let g = self.re.powi(n);
        let dg = f64::from(n) * self.re.powi(n - 1);
        let ddg = f64::from(n) * f64::from(n - 1) * self.re.powi(n - 2);
        self.lift(g, dg, ddg)
    }
}

impl From<f64> for HyperDual {
    fn from(x: f64) -> Self {
        HyperDual::constant(x)
    }
}

impl Add for HyperDual {
    type Output = Self;
    #[inline]
    fn add(self, o: Self) -> Self {
        HyperDual {
            re: self.re + o.re,
            d1: self.d1 + o.d1,
            d2: self.d2 + o.d2,
            dd: self.dd + o.dd,
        }
    }
}

impl Sub for HyperDual {
    type Output = Self;
    #[inline]
    fn sub(self, o: Self) -> Self {
        HyperDual {
            re: self.re - o.re,
            d1: self.d1 - o.d1,
            d2: self.d2 - o.d2,
            dd: self.dd - o.dd,
        }
    }
}

impl Mul for HyperDual {
    type Output = Self;
    #[inline]
    fn mul(self, o: Self) -> Self {
        HyperDual {
            re: self.re * o.re,
            d1: self.d1 * o.re + self.re * o.d1,
            d2: self.d2 * o.re + self.re * o.d2,
            dd: self.dd * o.re + self.d1 * o.d2 + self.d2 * o.d1 + self.re * o.dd,
        }
    }
}

impl Div for HyperDual {
    type Output = Self;
    #[inline]
    fn div(self, o: Self) -> Self {
        let re = self.re / o.re;
        let d1 = (self.d1 - re * o.d1) / o.re;
        let d2 = (self.d2 - re * o.d2) / o.re;
        let dd = (self.dd - d1 * o.d2 - d2 * o.d1 - re * o.dd) / o.re;
        HyperDual { re, d1, d2, dd }
    }
}

impl Neg for HyperDual {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        HyperDual {
            re: -self.re,
            d1: -self.d1,
            d2: -self.d2,
            dd: -self.dd,
        }
    }
}

impl Mul<f64> for HyperDual {
    type Output = Self;
    #[inline]
    fn mul(self, s: f64) -> Self {
        HyperDual {
            re: self.re * s,
            d1: self.d1 * s,
            d2: self.d2 * s,
            dd: self.dd * s,
        }
    }
}

impl Add<f64> for HyperDual {
    type Output = Self;
    #[inline]
    fn add(self, s: f64) -> Self {
        HyperDual {
            re: self.re + s,
            ..self
        }
    }
}

/// Scalar abstraction so geometric pipelines (normal solve, metric assembly)
/// run on plain values and on dual numbers alike.
pub trait Real:
    Copy
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn from_f64(x: f64) -> Self;
    /// Value part, used for branches (pivots, sign choices).
    fn re(&self) -> f64;
    fn sqrt(self) -> Self;
}

impl Real for f64 {
    #[inline]
    fn from_f64(x: f64) -> Self {
        x
    }
    #[inline]
    fn re(&self) -> f64 {
        *self
    }
    #[inline]
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
}

impl Real for HyperDual {
    #[inline]
    fn from_f64(x: f64) -> Self {
        HyperDual::constant(x)
    }
    #[inline]
    fn re(&self) -> f64 {
        self.re
    }
    #[inline]
    fn sqrt(self) -> Self {
        HyperDual::sqrt(self)
    }
}

/// One parameter axis of a chart domain.
#[derive(Debug, Clone, Copy)]
pub struct Axis {
    pub lo: f64,
    pub hi: f64,
    pub periodic: bool,
}

impl Axis {
    pub fn interval(lo: f64, hi: f64) -> Self {
        Axis {
            lo,
            hi,
            periodic: false,
        }
    }

    pub fn periodic(lo: f64, hi: f64) -> Self {
        Axis {
            lo,
            hi,
            periodic: true,
        }
    }

    pub fn length(&self) -> f64 {
        self.hi - self.lo
    }
}

/// A chart map evaluated in hyper-dual arithmetic. Implementations must be
/// pure: same input, same output, no interior mutability.
pub trait ChartMap: Send + Sync {
    fn ambient_dim(&self) -> usize;
    fn eval(&self, u: &[HyperDual], out: &mut [HyperDual]);
}

/// Adapter turning a closure into a [`ChartMap`].
pub struct FnChart<F> {
    pub ambient_dim: usize,
    pub f: F,
}

impl<F> ChartMap for FnChart<F>
where
    F: Fn(&[HyperDual], &mut [HyperDual]) + Send + Sync,
{
    fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }
    fn eval(&self, u: &[HyperDual], out: &mut [HyperDual]) {
        (self.f)(u, out)
    }
}

/// Parameter chart of a hypersurface: a domain box, a map into the ambient
/// linear space, and an optional partition-of-unity weight for multi-chart
/// atlases (absent weight means identically 1).
#[derive(Clone)]
pub struct Chart {
    pub domain: Vec<Axis>,
    pub map: Arc<dyn ChartMap>,
    pub weight: Option<Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>>,
}

impl Chart {
    pub fn new(domain: Vec<Axis>, map: Arc<dyn ChartMap>) -> Self {
        Chart {
            domain,
            map,
            weight: None,
        }
    }

    pub fn with_weight(mut self, w: Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>) -> Self {
        self.weight = Some(w);
        self
    }

    /// Parameter dimension n.
    pub fn dim(&self) -> usize {
        self.domain.len()
    }

    pub fn ambient_dim(&self) -> usize {
        self.map.ambient_dim()
    }

    pub fn weight_at(&self, u: &[f64]) -> f64 {
        match &self.weight {
            Some(w) => w(u),
            None => 1.0,
        }
    }

    /// Checks that `u` is strictly inside every non-periodic axis.
    pub fn check_domain(&self, u: &[f64]) -> Result<()> {
        if u.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: u.len(),
            });
        }
        for (axis, (&ax, &val)) in self.domain.iter().zip(u).enumerate() {
            if !ax.periodic && !(ax.lo < val && val < ax.hi) {
                return Err(Error::OutsideDomain {
                    axis,
                    value: val,
                    lo: ax.lo,
                    hi: ax.hi,
                });
            }
        }
        Ok(())
    }

    /// Position only (duals zeroed; bit-identical to a plain evaluation).
    pub fn position(&self, u: &[f64]) -> Result<AmbientVector> {
        self.check_domain(u)?;
        let seeds: Vec<HyperDual> = u.iter().map(|&v| HyperDual::constant(v)).collect();
        let mut out = vec![HyperDual::constant(0.0); self.ambient_dim()];
        self.map.eval(&seeds, &mut out);
        let x = AmbientVector::new(out.iter().map(|h| h.re).collect());
        if !x.is_finite() {
            return Err(Error::NonFiniteEvaluation {
                context: format!("position at u = {u:?}"),
            });
        }
        Ok(x)
    }
}

/// Position with exact first and second partials at one chart point.
///
/// Second partials are stored once per unordered index pair, so the symmetry
/// `d2(i,j) == d2(j,i)` holds bit-exactly.
#[derive(Debug, Clone)]
pub struct Jet2 {
    n: usize,
    pub x: AmbientVector,
    dx: Vec<AmbientVector>,
    d2x: Vec<AmbientVector>,
}

impl Jet2 {
    /// Parameter dimension.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Ambient dimension.
    pub fn m(&self) -> usize {
        self.x.dim()
    }

    pub fn dx(&self, i: usize) -> &AmbientVector {
        &self.dx[i]
    }

    #[inline]
    fn pair_index(n: usize, i: usize, j: usize) -> usize {
        let (a, b) = if i <= j { (i, j) } else { (j, i) };
        a * n - a * (a + 1) / 2 + b
    }

    pub fn d2(&self, i: usize, j: usize) -> &AmbientVector {
        &self.d2x[Self::pair_index(self.n, i, j)]
    }
}

/// Evaluates the chart together with exact first and second partials.
pub fn eval_jet2(chart: &Chart, u: &[f64]) -> Result<Jet2> {
    chart.check_domain(u)?;
    let n = chart.dim();
    let m = chart.ambient_dim();
    let mut seeds: Vec<HyperDual> = u.iter().map(|&v| HyperDual::constant(v)).collect();
    let mut out = vec![HyperDual::constant(0.0); m];

    let mut x = AmbientVector::zeros(m);
    let mut dx = vec![AmbientVector::zeros(m); n];
    let mut d2x = vec![AmbientVector::zeros(m); n * (n + 1) / 2];

    for i in 0..n {
        for j in i..n {
            seeds[i].d1 = 1.0;
            seeds[j].d2 = 1.0;
            chart.map.eval(&seeds, &mut out);
            seeds[i].d1 = 0.0;
            seeds[j].d2 = 0.0;

            for (c, h) in out.iter().enumerate() {
                if !(h.re.is_finite() && h.d1.is_finite() && h.d2.is_finite() && h.dd.is_finite())
                {
                    return Err(Error::NonFiniteEvaluation {
                        context: format!("jet at u = {u:?}, component {c}"),
                    });
                }
                d2x[Jet2::pair_index(n, i, j)].coords[c] = h.dd;
            }
            if i == j {
                for (c, h) in out.iter().enumerate() {
                    dx[i].coords[c] = h.d1;
                }
            }
            if i == 0 && j == 0 {
                for (c, h) in out.iter().enumerate() {
                    x.coords[c] = h.re;
                }
            }
        }
    }

    Ok(Jet2 { n, x, dx, d2x })
}

/// Central finite-difference jet, for cross-checking the dual evaluation.
///
/// First partials use step `eps^(1/3) * scale`; second partials use
/// `eps^(1/4) * scale`, which balances truncation against cancellation in
/// the second difference.
pub fn eval_jet2_fd(chart: &Chart, u: &[f64]) -> Result<Jet2> {
    chart.check_domain(u)?;
    let n = chart.dim();
    let m = chart.ambient_dim();
    let pos = |v: &[f64]| chart.position(v);

    let x = pos(u)?;
    let mut dx = vec![AmbientVector::zeros(m); n];
    let mut d2x = vec![AmbientVector::zeros(m); n * (n + 1) / 2];

    let h1: Vec<f64> = u
        .iter()
        .map(|&v| f64::EPSILON.cbrt() * v.abs().max(1.0))
        .collect();
    let h2: Vec<f64> = u
        .iter()
        .map(|&v| f64::EPSILON.powf(0.25) * v.abs().max(1.0))
        .collect();

    let shifted = |base: &[f64], i: usize, s: f64| {
        let mut v = base.to_vec();
        v[i] += s;
        v
    };

    for i in 0..n {
        let xp = pos(&shifted(u, i, h1[i]))?;
        let xm = pos(&shifted(u, i, -h1[i]))?;
        for c in 0..m {
            dx[i].coords[c] = (xp.coords[c] - xm.coords[c]) / (2.0 * h1[i]);
        }

        let xp2 = pos(&shifted(u, i, h2[i]))?;
        let xm2 = pos(&shifted(u, i, -h2[i]))?;
        for c in 0..m {
            d2x[Jet2::pair_index(n, i, i)].coords[c] =
                (xp2.coords[c] - 2.0 * x.coords[c] + xm2.coords[c]) / (h2[i] * h2[i]);
        }

        for j in (i + 1)..n {
            let pp = pos(&shifted(&shifted(u, i, h2[i]), j, h2[j]))?;
            let pm = pos(&shifted(&shifted(u, i, h2[i]), j, -h2[j]))?;
            let mp = pos(&shifted(&shifted(u, i, -h2[i]), j, h2[j]))?;
            let mm = pos(&shifted(&shifted(u, i, -h2[i]), j, -h2[j]))?;
            for c in 0..m {
                d2x[Jet2::pair_index(n, i, j)].coords[c] = (pp.coords[c] - pm.coords[c]
                    - mp.coords[c]
                    + mm.coords[c])
                    / (4.0 * h2[i] * h2[j]);
            }
        }
    }

    Ok(Jet2 { n, x, dx, d2x })
}
