//! Gauss-Legendre tensor rules on parameter boxes.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::domain::ParamBox;
use crate::error::{Result, TransportError};

/// Relative shift applied to a node that lands on a rank-deficient point.
const NODE_NUDGE: f64 = 1e-7;
/// Below this many nodes evaluation stays on the calling thread.
const PARALLEL_THRESHOLD: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RuleKind {
    GaussTensor,
    MonteCarlo,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuadratureRule {
    pub kind: RuleKind,
    /// Points per axis for Gauss rules, sample count for Monte Carlo.
    pub order_or_count: usize,
    pub seed: u64,
}

impl QuadratureRule {
    pub fn gauss(order: usize) -> Self {
        QuadratureRule {
            kind: RuleKind::GaussTensor,
            order_or_count: order,
            seed: 0,
        }
    }

    pub fn monte_carlo(count: usize, seed: u64) -> Self {
        QuadratureRule {
            kind: RuleKind::MonteCarlo,
            order_or_count: count,
            seed,
        }
    }

    pub fn is_gauss(&self) -> bool {
        self.kind == RuleKind::GaussTensor
    }

    /// Gauss order, or an error for Monte Carlo rules.
    pub fn gauss_order(&self) -> Result<usize> {
        match self.kind {
            RuleKind::GaussTensor if self.order_or_count >= 1 => Ok(self.order_or_count),
            RuleKind::GaussTensor => Err(TransportError::InvalidInput(
                "gauss order must be at least 1".into(),
            )),
            RuleKind::MonteCarlo => Err(TransportError::InvalidInput(
                "this integral requires a gauss_tensor rule".into(),
            )),
        }
    }

    /// The rule used for the error indicator: half the order, at least one point.
    pub fn coarser(&self) -> Self {
        QuadratureRule {
            order_or_count: (self.order_or_count / 2).max(1),
            ..*self
        }
    }
}

impl Default for QuadratureRule {
    fn default() -> Self {
        QuadratureRule::gauss(16)
    }
}

/// A value together with a heuristic error indicator (not a bound).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegralEstimate {
    pub value: f64,
    pub error_indicator: f64,
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`, by Newton iteration on `P_n`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        let w = 2.0 / ((1.0 - x * x) * d * d);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence, for `n ≥ 1`.
fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    (p1, n as f64 * (x * p1 - p0) / (x * x - 1.0))
}

/// One-dimensional rule for an axis of a box: Gauss-Legendre on ordinary
/// axes, the offset trapezoid rule on periodic ones (spectrally accurate for
/// smooth periodic integrands, and never places a node on the seam).
fn axis_rule(param_box: &ParamBox, axis: usize, order: usize) -> (Vec<f64>, Vec<f64>) {
    let (lo, width) = (param_box.lower[axis], param_box.width(axis));
    if param_box.periodic[axis] {
        let step = width / order as f64;
        let nodes = (0..order).map(|j| lo + (j as f64 + 0.5) * step).collect();
        (nodes, vec![step; order])
    } else {
        let (x, w) = gauss_legendre(order);
        let half = 0.5 * width;
        (
            x.iter().map(|xi| lo + half * (xi + 1.0)).collect(),
            w.iter().map(|wi| half * wi).collect(),
        )
    }
}

/// Tensor-product nodes and weights on a box, in lexicographic order (last
/// axis fastest). A zero-dimensional box yields one node of weight one.
pub fn tensor_nodes(param_box: &ParamBox, order: usize) -> Vec<(Vec<f64>, f64)> {
    let k = param_box.dim();
    let rules: Vec<_> = (0..k).map(|axis| axis_rule(param_box, axis, order)).collect();
    let mut out = Vec::with_capacity(order.pow(k as u32));
    let mut idx = vec![0usize; k];
    loop {
        let point = idx.iter().enumerate().map(|(a, &i)| rules[a].0[i]).collect();
        let weight = idx.iter().enumerate().map(|(a, &i)| rules[a].1[i]).product();
        out.push((point, weight));
        let mut axis = k;
        loop {
            if axis == 0 {
                return out;
            }
            axis -= 1;
            idx[axis] += 1;
            if idx[axis] < order {
                break;
            }
            idx[axis] = 0;
        }
    }
}

/// `Σ wᵢ f(uᵢ)` over the tensor rule of a box.
///
/// Node values may be computed concurrently, but they are always accumulated
/// in node order so results are bit-stable. A node that hits a rank-deficient
/// point is retried once after a shift of `1e-7` of the box width per axis.
pub fn tensor_sum<F>(param_box: &ParamBox, order: usize, f: F) -> Result<f64>
where
    F: Fn(&[f64]) -> Result<f64> + Sync,
{
    let nodes = tensor_nodes(param_box, order);
    let eval = |u: &Vec<f64>| -> Result<f64> {
        match f(u) {
            Err(TransportError::RankDeficient { .. }) => {
                let nudged: Vec<f64> = u
                    .iter()
                    .enumerate()
                    .map(|(i, ui)| ui + NODE_NUDGE * param_box.width(i))
                    .collect();
                f(&nudged)
            }
            other => other,
        }
    };
    let values: Vec<Result<f64>> = if nodes.len() >= PARALLEL_THRESHOLD {
        nodes.par_iter().map(|(u, _)| eval(u)).collect()
    } else {
        nodes.iter().map(|(u, _)| eval(u)).collect()
    };
    let mut sum = 0.0;
    for ((_, w), v) in nodes.iter().zip(values) {
        sum += w * v?;
    }
    Ok(sum)
}

/// Runs `sum` at the rule's order and at the coarser order; the difference is
/// the error indicator.
pub(crate) fn gauss_estimate<F>(rule: &QuadratureRule, sum: F) -> Result<IntegralEstimate>
where
    F: Fn(usize) -> Result<f64>,
{
    let order = rule.gauss_order()?;
    let value = sum(order)?;
    let coarse = sum(rule.coarser().order_or_count)?;
    Ok(IntegralEstimate {
        value,
        error_indicator: (value - coarse).abs(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn small_rules_match_tables() {
        let (x, w) = gauss_legendre(2);
        assert_relative_eq!(x[1], 1.0 / 3f64.sqrt(), epsilon = 1e-15);
        assert_relative_eq!(w[0], 1.0, epsilon = 1e-15);
        let (x, w) = gauss_legendre(3);
        assert_eq!(x[1], 0.0);
        assert_relative_eq!(x[2], (0.6f64).sqrt(), epsilon = 1e-15);
        assert_relative_eq!(w[1], 8.0 / 9.0, epsilon = 1e-15);
    }

    #[test]
    fn exact_for_polynomials_up_to_degree_2n_minus_1() {
        for n in 1..=20 {
            let (x, w) = gauss_legendre(n);
            for deg in 0..2 * n {
                let q: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * xi.powi(deg as i32)).sum();
                let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
                assert!((q - exact).abs() < 1e-13, "n={n} deg={deg} q={q}");
            }
        }
    }

    #[test]
    fn weights_positive_and_sum_to_volume() {
        let b = ParamBox::new(vec![0.0, -1.0, 2.0], vec![2.0, 3.0, 2.5]);
        for order in [1, 4, 16] {
            let nodes = tensor_nodes(&b, order);
            assert!(nodes.iter().all(|(_, w)| *w > 0.0));
            let total: f64 = nodes.iter().map(|(_, w)| w).sum();
            assert_relative_eq!(total, b.volume(), epsilon = 1e-12);
        }
    }

    #[test]
    fn zero_dimensional_box_is_a_counting_measure() {
        let nodes = tensor_nodes(&ParamBox::point(), 16);
        assert_eq!(nodes, vec![(vec![], 1.0)]);
    }

    #[test]
    fn nudge_retries_rank_deficient_node() {
        let b = ParamBox::new(vec![-1.0], vec![1.0]);
        // the 3-point rule has a node exactly at 0
        let s = tensor_sum(&b, 3, |u| {
            if u[0] == 0.0 {
                Err(TransportError::RankDeficient { gram_det: 0.0, tol: 1e-10 })
            } else {
                Ok(1.0)
            }
        })
        .unwrap();
        assert_relative_eq!(s, 2.0, epsilon = 1e-14);
    }
}
