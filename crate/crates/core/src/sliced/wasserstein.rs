//! Exact Wasserstein solvers: the closed form on the real line and a small
//! assignment-based reference solver for the geodesic cost.

use super::measure::{DiscreteMeasure, Model};
use crate::error::{Error, Result};
use crate::manifold::{lorentz_distance_raw, poincare_distance_raw};

/// Largest support the exact reference solver accepts (it is O(n³)).
pub const EXACT_SOLVER_CAP: usize = 2000;

/// `|x|^p` with exact fast paths for the common orders.
#[inline]
pub(crate) fn pow_abs(x: f64, p: f64) -> f64 {
    if p == 2.0 {
        x * x
    } else if p == 1.0 {
        x.abs()
    } else {
        x.abs().powf(p)
    }
}

fn check_order(p: f64) -> Result<()> {
    if !(p >= 1.0) || !p.is_finite() {
        return Err(Error::domain(format!("order p must be >= 1, got {p}")));
    }
    Ok(())
}

/// `W_p^p` between two weighted samples on the real line.
///
/// Both supports are sorted and the two cumulative-weight ladders merged;
/// on each interval of the merged partition of [0, 1] the quantile
/// functions are constant, so the integral of `|F_a^{-1} − F_b^{-1}|^p`
/// is an exact finite sum.
pub fn wasserstein_1d(a: &[f64], wa: &[f64], b: &[f64], wb: &[f64], p: f64) -> Result<f64> {
    check_order(p)?;
    if a.is_empty() || b.is_empty() {
        return Err(Error::domain("1D Wasserstein needs nonempty supports"));
    }
    if a.len() != wa.len() {
        return Err(Error::Dimension { expected: a.len(), got: wa.len() });
    }
    if b.len() != wb.len() {
        return Err(Error::Dimension { expected: b.len(), got: wb.len() });
    }
    let mut sa: Vec<(f64, f64)> = a.iter().copied().zip(wa.iter().copied()).collect();
    let mut sb: Vec<(f64, f64)> = b.iter().copied().zip(wb.iter().copied()).collect();
    sa.sort_by(|x, y| x.0.total_cmp(&y.0));
    sb.sort_by(|x, y| x.0.total_cmp(&y.0));
    Ok(merged_quantile_cost(&sa, &sb, p))
}

/// Quantile integral over sorted `(value, weight)` atoms.
pub(crate) fn merged_quantile_cost(a: &[(f64, f64)], b: &[(f64, f64)], p: f64) -> f64 {
    let total_a: f64 = a.iter().map(|x| x.1).sum();
    let total_b: f64 = b.iter().map(|x| x.1).sum();
    let (mut i, mut j) = (0, 0);
    let (mut ca, mut cb) = (a[0].1 / total_a, b[0].1 / total_b);
    let mut prev = 0.0;
    let mut cost = 0.0;
    loop {
        let next = ca.min(cb);
        cost += (next - prev).max(0.0) * pow_abs(a[i].0 - b[j].0, p);
        prev = next;
        let step_a = ca <= next && i + 1 < a.len();
        let step_b = cb <= next && j + 1 < b.len();
        if !step_a && !step_b {
            break;
        }
        if step_a {
            i += 1;
            ca += a[i].1 / total_a;
        }
        if step_b {
            j += 1;
            cb += b[j].1 / total_b;
        }
    }
    // The last atoms share whatever mass round-off left on [prev, 1].
    cost + (1.0 - prev).max(0.0) * pow_abs(a[a.len() - 1].0 - b[b.len() - 1].0, p)
}

/// `W_p^p` between two uniform samples of equal size that are already sorted.
#[inline]
pub(crate) fn sorted_uniform_cost(a: &[f64], b: &[f64], p: f64) -> f64 {
    let s: f64 = a.iter().zip(b).map(|(x, y)| pow_abs(x - y, p)).sum();
    s / a.len() as f64
}

/// Minimum-cost perfect matching on a dense square cost matrix (row-major).
///
/// Shortest augmenting paths with dual potentials, O(n³). Returns the
/// column assigned to each row.
pub fn solve_assignment(cost: &[f64], n: usize) -> Vec<usize> {
    assert_eq!(cost.len(), n * n);
    // 1-based arrays; index 0 is a sentinel column.
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut row_of = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    let mut minv = vec![0.0; n + 1];
    let mut used = vec![false; n + 1];
    for i in 1..=n {
        row_of[0] = i;
        let mut j0 = 0;
        minv.iter_mut().for_each(|m| *m = f64::INFINITY);
        used.iter_mut().for_each(|b| *b = false);
        loop {
            used[j0] = true;
            let i0 = row_of[j0];
            let row = &cost[(i0 - 1) * n..i0 * n];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=n {
                if !used[j] {
                    let cur = row[j - 1] - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[row_of[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if row_of[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            row_of[j0] = row_of[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut assignment = vec![0; n];
    for j in 1..=n {
        assignment[row_of[j] - 1] = j - 1;
    }
    assignment
}

/// Exact `W_p^p` with the geodesic cost `d(x,y)^p` between two uniform
/// measures of equal size.
pub fn wasserstein_geodesic_ref(mu: &DiscreteMeasure, nu: &DiscreteMeasure, p: f64) -> Result<f64> {
    check_order(p)?;
    if mu.model() != nu.model() {
        return Err(Error::domain("measures live in different models"));
    }
    if mu.dim() != nu.dim() {
        return Err(Error::Dimension { expected: mu.dim(), got: nu.dim() });
    }
    let n = mu.len();
    if n.max(nu.len()) > EXACT_SOLVER_CAP {
        return Err(Error::TooLarge { size: n.max(nu.len()), cap: EXACT_SOLVER_CAP });
    }
    if nu.len() != n || !mu.is_uniform() || !nu.is_uniform() {
        return Err(Error::domain("the exact reference solver needs uniform measures of equal size"));
    }
    let dist: fn(&[f64], &[f64]) -> f64 = match mu.model() {
        Model::Lorentz => lorentz_distance_raw,
        Model::Poincare => poincare_distance_raw,
    };
    let mut cost = Vec::with_capacity(n * n);
    for x in mu.points() {
        cost.extend(nu.points().map(|y| pow_abs(dist(x, y), p)));
    }
    let assignment = solve_assignment(&cost, n);
    let total: f64 = assignment.iter().enumerate().map(|(i, &j)| cost[i * n + j]).sum();
    Ok(total / n as f64)
}
