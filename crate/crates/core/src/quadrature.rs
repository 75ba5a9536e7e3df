//! Tensor-product quadrature over chart domains.
//!
//! Non-periodic axes use Gauss-Legendre nodes (strictly interior), periodic
//! axes use the equispaced trapezoid rule, which is spectrally accurate for
//! smooth periodic integrands. Surface integrals carry the volume density
//! `sqrt(det g)` and the chart's partition-of-unity weight.
//!
//! Node evaluations are independent pure computations and run in parallel;
//! the final reduction is a fixed-order pairwise tree over the node index,
//! so results are bit-identical across thread counts.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::jets::Chart;
use crate::shapes::{surface_point, Shape, SurfacePoint};

/// Default cap on the total number of tensor-product nodes.
pub const NODE_BUDGET: usize = 10_000_000;

/// Quadrature rule of a single axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AxisRule {
    GaussLegendre,
    TrapezoidPeriodic,
}

/// Tensor-product quadrature grid over one chart domain.
#[derive(Debug, Clone)]
pub struct QuadratureGrid {
    pub nodes_per_axis: Vec<usize>,
    pub rules: Vec<AxisRule>,
    /// Flattened (parameter point, weight) pairs.
    pub points: Vec<(Vec<f64>, f64)>,
}

/// Gauss-Legendre nodes and weights on [-1, 1], by Newton iteration on the
/// Legendre recurrence.
pub fn gauss_legendre(num: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(num >= 1);
    let mut nodes = vec![0.0; num];
    let mut weights = vec![0.0; num];
    for i in 0..num.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (num as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // Legendre P_num(x) and derivative via the three-term recurrence.
            let (mut p0, mut p1) = (1.0, x);
            for j in 2..=num {
                let jf = j as f64;
                let p2 = ((2.0 * jf - 1.0) * x * p1 - (jf - 1.0) * p0) / jf;
                p0 = p1;
                p1 = p2;
            }
            dp = num as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        weights[i] = w;
        nodes[num - 1 - i] = x;
        weights[num - 1 - i] = w;
    }
    if num % 2 == 1 {
        nodes[num / 2] = 0.0;
    }
    (nodes, weights)
}

fn axis_rule_1d(rule: AxisRule, lo: f64, hi: f64, num: usize) -> (Vec<f64>, Vec<f64>) {
    match rule {
        AxisRule::GaussLegendre => {
            let (t, w) = gauss_legendre(num);
            let mid = 0.5 * (lo + hi);
            let half = 0.5 * (hi - lo);
            (
                t.iter().map(|&v| mid + half * v).collect(),
                w.iter().map(|&v| v * half).collect(),
            )
        }
        AxisRule::TrapezoidPeriodic => {
            let h = (hi - lo) / num as f64;
            (
                (0..num).map(|j| lo + j as f64 * h).collect(),
                vec![h; num],
            )
        }
    }
}

/// Builds the tensor-product rule for one chart, respecting per-axis
/// periodicity flags.
pub fn build_grid(chart: &Chart, nodes_per_axis: &[usize]) -> Result<QuadratureGrid> {
    let dim = chart.dim();
    if nodes_per_axis.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: nodes_per_axis.len(),
        });
    }
    if nodes_per_axis.iter().any(|&n| n < 2) {
        return Err(Error::ContractViolation(
            "need at least 2 quadrature nodes per axis".into(),
        ));
    }
    let total: usize = nodes_per_axis.iter().product();
    if total > NODE_BUDGET {
        return Err(Error::BudgetExceeded {
            requested: total,
            cap: NODE_BUDGET,
        });
    }

    let mut rules = Vec::with_capacity(dim);
    let mut axes_1d = Vec::with_capacity(dim);
    for (axis, &num) in chart.domain.iter().zip(nodes_per_axis) {
        let rule = if axis.periodic {
            AxisRule::TrapezoidPeriodic
        } else {
            AxisRule::GaussLegendre
        };
        rules.push(rule);
        axes_1d.push(axis_rule_1d(rule, axis.lo, axis.hi, num));
    }

    let mut points = Vec::with_capacity(total);
    let mut index = vec![0usize; dim];
    loop {
        let mut u = Vec::with_capacity(dim);
        let mut w = 1.0;
        for (d, &i) in index.iter().enumerate() {
            u.push(axes_1d[d].0[i]);
            w *= axes_1d[d].1[i];
        }
        points.push((u, w));
        // Odometer increment.
        let mut d = dim;
        loop {
            if d == 0 {
                return Ok(QuadratureGrid {
                    nodes_per_axis: nodes_per_axis.to_vec(),
                    rules,
                    points,
                });
            }
            d -= 1;
            index[d] += 1;
            if index[d] < nodes_per_axis[d] {
                break;
            }
            index[d] = 0;
        }
    }
}

/// Fixed-order pairwise tree sum over `column` of the row-major table.
fn pairwise_column(rows: &[Vec<f64>], col: usize, lo: usize, hi: usize) -> f64 {
    if hi - lo <= 8 {
        let mut acc = 0.0;
        for row in &rows[lo..hi] {
            acc += row[col];
        }
        acc
    } else {
        let mid = lo + (hi - lo) / 2;
        pairwise_column(rows, col, lo, mid) + pairwise_column(rows, col, mid, hi)
    }
}

/// An integrand over surface points.
pub type Integrand<'a> = Box<dyn Fn(&SurfacePoint) -> f64 + Sync + 'a>;

/// One surface integral with its refinement error proxy and L1 mass.
#[derive(Debug, Clone, Copy)]
pub struct TermIntegral {
    /// Value at the requested node count.
    pub value: f64,
    /// Richardson-style proxy `|I(N) - I(N/2)|`.
    pub proxy: f64,
    /// Integral of the absolute integrand, for rounding-floor estimates.
    pub l1: f64,
}

fn sweep(shape: &Shape, fs: &[Integrand<'_>], nodes_per_axis: &[usize]) -> Result<Vec<Vec<f64>>> {
    let t = fs.len();
    let mut totals = vec![vec![0.0; 2 * t]];
    let totals_row = &mut totals[0];
    for (ci, chart) in shape.charts.iter().enumerate() {
        let grid = build_grid(chart, nodes_per_axis)?;
        let rows: Result<Vec<Vec<f64>>> = grid
            .points
            .par_iter()
            .enumerate()
            .map(|(ni, (u, w))| {
                let sp = surface_point(shape, chart, u)?;
                let base = w * chart.weight_at(u) * sp.geom.density;
                let mut row = vec![0.0; 2 * t];
                for (j, f) in fs.iter().enumerate() {
                    let v = f(&sp);
                    if !v.is_finite() {
                        return Err(Error::NonFiniteEvaluation {
                            context: format!(
                                "integrand {j} on {} chart {ci} node {ni} at u = {u:?}",
                                shape.descriptor
                            ),
                        });
                    }
                    row[2 * j] = base * v;
                    row[2 * j + 1] = base.abs() * v.abs();
                }
                Ok(row)
            })
            .collect();
        let rows = rows?;
        for col in 0..2 * t {
            totals_row[col] += pairwise_column(&rows, col, 0, rows.len());
        }
    }
    Ok(totals)
}

/// Integrates a batch of integrands over the shape in a single sweep
/// (every integrand shares the per-node geometry evaluation). Each result
/// carries the `|I(N) - I(N/2)|` refinement proxy.
pub fn integrate_terms(
    shape: &Shape,
    fs: &[Integrand<'_>],
    nodes_per_axis: &[usize],
) -> Result<Vec<TermIntegral>> {
    let n = shape.n();
    let nodes: Vec<usize> = if nodes_per_axis.len() == 1 {
        vec![nodes_per_axis[0]; n]
    } else {
        nodes_per_axis.to_vec()
    };
    let coarse: Vec<usize> = nodes.iter().map(|&v| (v / 2).max(2)).collect();

    let full = sweep(shape, fs, &nodes)?;
    let half = sweep(shape, fs, &coarse)?;
    Ok((0..fs.len())
        .map(|j| TermIntegral {
            value: full[0][2 * j],
            proxy: (full[0][2 * j] - half[0][2 * j]).abs(),
            l1: full[0][2 * j + 1],
        })
        .collect())
}

/// Integrates a single integrand (`integrate_terms` with one output).
pub fn integrate<F>(shape: &Shape, f: F, nodes_per_axis: &[usize]) -> Result<TermIntegral>
where
    F: Fn(&SurfacePoint) -> f64 + Sync,
{
    let fs: Vec<Integrand> = vec![Box::new(f)];
    Ok(integrate_terms(shape, &fs, nodes_per_axis)?[0])
}

/// Default nodes per axis for a hypersurface dimension (desk-scale runtimes
/// at target tolerances).
pub fn default_nodes(n: usize) -> usize {
    match n {
        2 => 96,
        3 => 48,
        _ => 24,
    }
}
