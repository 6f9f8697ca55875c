//! Finite-difference reference for the connection.
//!
//! Uses only plain evaluation of the metric, so it shares no code with the
//! jet route and can catch errors in it.

use crate::curvature::{CurvatureError, MetricChart};
use crate::linalg::{invert, SquareMatrix};

/// Default central-difference step.
pub const FD_STEP: f64 = 1e-5;

/// `∂_a g_{ij}` by central differences, laid out `[a][i][j]`.
pub fn metric_gradient_fd(chart: &MetricChart, p: &[f64], h: f64) -> Result<Vec<f64>, CurvatureError> {
    let m = chart.dim();
    let mut out = Vec::with_capacity(m * m * m);
    for a in 0..m {
        let mut plus = p.to_vec();
        let mut minus = p.to_vec();
        plus[a] += h;
        minus[a] -= h;
        let (gp, gm) = (chart.metric_at(&plus)?, chart.metric_at(&minus)?);
        for i in 0..m {
            for j in 0..m {
                out.push((gp[(i, j)] - gm[(i, j)]) / (2.0 * h));
            }
        }
    }
    Ok(out)
}

/// Christoffel symbols of both kinds by central differences.
pub struct FdConnection {
    pub first: Vec<f64>,
    pub second: Vec<f64>,
    pub g_inv: SquareMatrix,
}

pub fn christoffel_fd(chart: &MetricChart, p: &[f64], h: f64) -> Result<FdConnection, CurvatureError> {
    let m = chart.dim();
    let dg = metric_gradient_fd(chart, p, h)?;
    let d = |a: usize, i: usize, j: usize| dg[(a * m + i) * m + j];
    let mut first = vec![0.0; m * m * m];
    for i in 0..m {
        for j in 0..m {
            for k in 0..m {
                first[(i * m + j) * m + k] = 0.5 * (d(i, j, k) + d(j, i, k) - d(k, i, j));
            }
        }
    }
    let g_inv = invert(&chart.metric_at(p)?, 1e-12)?;
    let mut second = vec![0.0; m * m * m];
    for i in 0..m {
        for j in 0..m {
            for l in 0..m {
                second[(i * m + j) * m + l] = (0..m).map(|q| g_inv[(l, q)] * first[(i * m + j) * m + q]).sum();
            }
        }
    }
    Ok(FdConnection { first, second, g_inv })
}

/// Worst `|Γ_jet − Γ_fd| / (|Γ_jet| + 1)` over both kinds.
pub fn connection_discrepancy(chart: &MetricChart, p: &[f64], h: f64) -> Result<f64, CurvatureError> {
    let cd = crate::curvature::curvature_at(chart, p)?;
    let fd = christoffel_fd(chart, p, h)?;
    let worst = cd
        .christoffel_first
        .iter()
        .zip(&fd.first)
        .chain(cd.christoffel_second.iter().zip(&fd.second))
        .map(|(a, b)| (a - b).abs() / (a.abs() + 1.0))
        .fold(0.0f64, f64::max);
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse_expr, Params};
    use crate::families::build_thm13;

    #[test]
    fn agrees_with_jets_on_exponential_profile() {
        let chart = build_thm13(parse_expr("exp(x1)", 4, &[]).unwrap(), Params::new()).unwrap();
        let r = connection_discrepancy(&chart, &[0.1, 0.4, -0.3, 0.2], FD_STEP).unwrap();
        assert!(r < 1e-5, "{r}");
    }
}
