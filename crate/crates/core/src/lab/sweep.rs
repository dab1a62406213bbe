//! Convergence sweeps over the finite-difference step, the Gauss order, or
//! the Monte Carlo sample count.

use rayon::prelude::*;
use serde::Serialize;

use super::scenarios::Scenario;
use super::verify::{self, TransportReport};
use crate::error::{Result, TransportError};
use crate::integration;
use crate::quadrature::QuadratureRule;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParam {
    FdStep,
    QuadOrder,
    MonteCarlo,
}

impl std::str::FromStr for SweepParam {
    type Err = TransportError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "h" | "fd_step" => Ok(SweepParam::FdStep),
            "order" | "quad_order" => Ok(SweepParam::QuadOrder),
            "mc" | "monte_carlo" => Ok(SweepParam::MonteCarlo),
            other => Err(TransportError::InvalidInput(format!(
                "unknown sweep parameter {other:?} (expected h, order or mc)"
            ))),
        }
    }
}

/// Settings held fixed while one parameter varies.
#[derive(Debug, Clone, Copy)]
pub struct SweepBase {
    pub h: f64,
    pub order: usize,
    pub seed: u64,
    /// Independent seeds per Monte Carlo count; the error is their RMS.
    pub mc_repeats: usize,
}

impl Default for SweepBase {
    fn default() -> Self {
        SweepBase {
            h: 1e-4,
            order: 16,
            seed: 0,
            mc_repeats: 16,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepPoint {
    pub value: f64,
    pub estimate: f64,
    pub error: f64,
    /// Full transport report at this grid point (step and order sweeps).
    pub report: Option<TransportReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub scenario: String,
    pub field: String,
    pub t: f64,
    pub param: SweepParam,
    /// `closed_form`, `finest_grid` or `gauss_order_64`.
    pub reference_kind: &'static str,
    pub reference: f64,
    pub points: Vec<SweepPoint>,
    /// Least-squares slope of `ln error` against `ln value`.
    pub slope: Option<f64>,
    /// Errors never increase along the grid beyond a roundoff floor.
    pub monotone: bool,
}

/// Errors below this multiple of `1 + |reference|` count as roundoff.
pub const ROUNDOFF_FLOOR: f64 = 1e-14;

/// Runs the sweep and fits its convergence slope.
///
/// `FdStep` measures the central-difference `dI/dt`; `QuadOrder` and
/// `MonteCarlo` measure `I(t)` itself. Errors are taken against the
/// scenario's closed form when it has one, otherwise against the finest grid
/// value (steps, orders) or an order-64 Gauss value (Monte Carlo).
pub fn run_sweep(
    scenario: &Scenario,
    field_name: &str,
    t: f64,
    param: SweepParam,
    grid: &[f64],
    base: &SweepBase,
) -> Result<SweepResult> {
    if grid.len() < 4 {
        return Err(TransportError::InvalidInput(format!(
            "a sweep needs at least 4 grid values, got {}",
            grid.len()
        )));
    }
    if grid.iter().any(|g| !(*g > 0.0 && g.is_finite())) {
        return Err(TransportError::InvalidInput("sweep grid values must be positive".into()));
    }
    let named = scenario.field(field_name)?;
    let closed = named.reference.as_ref();
    let domain = &scenario.domain;

    let (estimates, reports): (Vec<f64>, Vec<Option<TransportReport>>) = match param {
        SweepParam::FdStep => {
            let rule = QuadratureRule::gauss(base.order);
            let rows: Vec<Result<(f64, TransportReport)>> = grid
                .par_iter()
                .map(|&h| {
                    let lhs = verify::lhs_time_derivative(scenario, &named.field, t, h, &rule)?;
                    Ok((lhs.value, verify::verify_transport(scenario, field_name, t, h, &rule)?))
                })
                .collect();
            rows.into_iter()
                .map(|r| r.map(|(v, rep)| (v, Some(rep))))
                .collect::<Result<Vec<_>>>()?
                .into_iter()
                .unzip()
        }
        SweepParam::QuadOrder => {
            let orders = integer_grid(grid)?;
            let rows: Vec<Result<(f64, TransportReport)>> = orders
                .par_iter()
                .map(|&n| {
                    let rule = QuadratureRule::gauss(n);
                    let value = integration::integrate_domain(domain, t, &named.field, &rule)?.value;
                    Ok((value, verify::verify_transport(scenario, field_name, t, base.h, &rule)?))
                })
                .collect();
            rows.into_iter()
                .map(|r| r.map(|(v, rep)| (v, Some(rep))))
                .collect::<Result<Vec<_>>>()?
                .into_iter()
                .unzip()
        }
        SweepParam::MonteCarlo => {
            let counts = integer_grid(grid)?;
            let mut values = Vec::with_capacity(counts.len());
            for (i, &n) in counts.iter().enumerate() {
                let seed = base.seed.wrapping_add(1000 * i as u64);
                let rule = QuadratureRule::monte_carlo(n, seed);
                values.push(integration::integrate_domain(domain, t, &named.field, &rule)?.value);
            }
            (values, vec![None; counts.len()])
        }
    };

    let (reference_kind, reference) = match (param, closed) {
        (SweepParam::FdStep, Some(c)) => ("closed_form", (c.derivative)(t)),
        (_, Some(c)) => ("closed_form", (c.integral)(t)),
        (SweepParam::MonteCarlo, None) => (
            "gauss_order_64",
            integration::integrate_domain(domain, t, &named.field, &QuadratureRule::gauss(64))?.value,
        ),
        (SweepParam::FdStep, None) | (SweepParam::QuadOrder, None) => {
            let finest = match param {
                SweepParam::FdStep => argmin(grid),
                _ => argmax(grid),
            };
            ("finest_grid", estimates[finest])
        }
    };

    let errors: Vec<f64> = if param == SweepParam::MonteCarlo && base.mc_repeats > 1 {
        let counts = integer_grid(grid)?;
        counts
            .iter()
            .enumerate()
            .map(|(i, &n)| {
                let mut sq = (estimates[i] - reference).powi(2);
                for k in 1..base.mc_repeats {
                    let seed = base.seed.wrapping_add(1000 * i as u64 + k as u64);
                    let rule = QuadratureRule::monte_carlo(n, seed);
                    let v = integration::integrate_domain(domain, t, &named.field, &rule)?.value;
                    sq += (v - reference).powi(2);
                }
                Ok((sq / base.mc_repeats as f64).sqrt())
            })
            .collect::<Result<_>>()?
    } else {
        estimates.iter().map(|e| (e - reference).abs()).collect()
    };

    let fit_on: Vec<usize> = (0..grid.len())
        .filter(|&i| reference_kind != "finest_grid" || estimates[i] != reference)
        .collect();
    let slope = fit_slope(
        &fit_on.iter().map(|&i| grid[i]).collect::<Vec<_>>(),
        &fit_on.iter().map(|&i| errors[i]).collect::<Vec<_>>(),
    );
    let floor = ROUNDOFF_FLOOR * (1.0 + reference.abs());
    let monotone = is_monotone(grid, &errors, floor, param != SweepParam::FdStep);

    let points = grid
        .iter()
        .zip(estimates)
        .zip(errors)
        .zip(reports)
        .map(|(((&value, estimate), error), report)| SweepPoint {
            value,
            estimate,
            error,
            report,
        })
        .collect();
    Ok(SweepResult {
        scenario: scenario.name.clone(),
        field: field_name.to_string(),
        t,
        param,
        reference_kind,
        reference,
        points,
        slope,
        monotone,
    })
}

fn integer_grid(grid: &[f64]) -> Result<Vec<usize>> {
    grid.iter()
        .map(|&g| {
            if g.fract() == 0.0 && g >= 1.0 {
                Ok(g as usize)
            } else {
                Err(TransportError::InvalidInput(format!("grid value {g} is not a positive integer")))
            }
        })
        .collect()
}

fn argmin(v: &[f64]) -> usize {
    (0..v.len()).fold(0, |best, i| if v[i] < v[best] { i } else { best })
}

fn argmax(v: &[f64]) -> usize {
    (0..v.len()).fold(0, |best, i| if v[i] > v[best] { i } else { best })
}

/// Least-squares slope of `ln y` on `ln x`, ignoring zero errors.
pub fn fit_slope(x: &[f64], y: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = x
        .iter()
        .zip(y)
        .filter(|(_, &e)| e > 0.0 && e.is_finite())
        .map(|(&a, &e)| (a.ln(), e.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    Some(sxy / sxx)
}

/// Whether errors shrink as the grid is refined, allowing increases only
/// below `floor`. Orders and counts refine upwards, steps downwards.
fn is_monotone(grid: &[f64], errors: &[f64], floor: f64, refine_upwards: bool) -> bool {
    let mut idx: Vec<usize> = (0..grid.len()).collect();
    idx.sort_by(|&a, &b| grid[a].total_cmp(&grid[b]));
    if !refine_upwards {
        idx.reverse();
    }
    idx.windows(2)
        .all(|w| errors[w[1]] <= errors[w[0]] || errors[w[1]] <= floor)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_of_exact_power_law() {
        let x = [1e-1, 1e-2, 1e-3, 1e-4];
        let y: Vec<f64> = x.iter().map(|h: &f64| 3.0 * h * h).collect();
        assert!((fit_slope(&x, &y).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn slope_needs_two_nonzero_points() {
        assert_eq!(fit_slope(&[1.0, 2.0], &[0.0, 1.0]), None);
    }

    #[test]
    fn monotone_uses_refinement_direction() {
        assert!(is_monotone(&[4.0, 8.0, 16.0], &[1e-2, 1e-5, 1e-9], 0.0, true));
        assert!(!is_monotone(&[4.0, 8.0, 16.0], &[1e-9, 1e-5, 1e-2], 0.0, true));
        assert!(is_monotone(&[0.1, 0.01, 0.001], &[1e-2, 1e-4, 1e-6], 0.0, false));
        assert!(is_monotone(&[4.0, 8.0, 16.0], &[1e-2, 1e-15, 2e-15], 1e-14, true));
    }

    #[test]
    fn parses_parameter_names() {
        assert_eq!("h".parse::<SweepParam>().unwrap(), SweepParam::FdStep);
        assert_eq!("order".parse::<SweepParam>().unwrap(), SweepParam::QuadOrder);
        assert_eq!("mc".parse::<SweepParam>().unwrap(), SweepParam::MonteCarlo);
        assert!("dt".parse::<SweepParam>().is_err());
    }
}
