//! Rank correlation and axis matching.

use crate::error::{invalid, Result};

/// 1-based ranks with ties sharing their average rank.
pub fn average_ranks(x: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut ranks = vec![0.0; x.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && x[order[j + 1]] == x[order[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            ranks[idx] = avg;
        }
        i = j + 1;
    }
    ranks
}

/// Pearson correlation; 0 when either input is constant.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return invalid(format!("lengths differ: {} vs {}", x.len(), y.len()));
    }
    if x.len() < 2 {
        return invalid("need at least two samples");
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (da, db) = (a - mx, b - my);
        sxy += da * db;
        sxx += da * da;
        syy += db * db;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Ok(0.0);
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return invalid(format!("lengths differ: {} vs {}", x.len(), y.len()));
    }
    pearson(&average_ranks(x), &average_ranks(y))
}

/// `table[p][a]` is the correlation of parameter `p` with axis `a`.
/// Parameters are matched to distinct axes greedily by largest `|ρ|`;
/// returns the chosen axis per parameter.
pub fn greedy_axis_assignment(table: &[Vec<f64>]) -> Result<Vec<usize>> {
    let n_axes = table.first().map_or(0, |r| r.len());
    if table.iter().any(|r| r.len() != n_axes) {
        return invalid("ragged correlation table");
    }
    if table.len() > n_axes {
        return invalid(format!(
            "{} parameters cannot map to {} distinct axes",
            table.len(),
            n_axes
        ));
    }
    let mut cells: Vec<(usize, usize, f64)> = table
        .iter()
        .enumerate()
        .flat_map(|(p, row)| row.iter().enumerate().map(move |(a, &v)| (p, a, v.abs())))
        .collect();
    cells.sort_by(|a, b| b.2.total_cmp(&a.2).then(a.0.cmp(&b.0)).then(a.1.cmp(&b.1)));
    let mut param_axis = vec![usize::MAX; table.len()];
    let mut axis_used = vec![false; n_axes];
    for (p, a, _) in cells {
        if param_axis[p] == usize::MAX && !axis_used[a] {
            param_axis[p] = a;
            axis_used[a] = true;
        }
    }
    Ok(param_axis)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranks_with_ties() {
        assert_eq!(average_ranks(&[3.0, 1.0, 3.0, 2.0]), vec![3.5, 1.0, 3.5, 2.0]);
    }

    #[test]
    fn spearman_monotone_is_one() {
        let x: Vec<f64> = (0..20).map(f64::from).collect();
        let y: Vec<f64> = x.iter().map(|v| v.powi(3) + 1.0).collect();
        assert!((spearman(&x, &y).unwrap() - 1.0).abs() < 1e-12);
        let z: Vec<f64> = x.iter().map(|v| -v.exp()).collect();
        assert!((spearman(&x, &z).unwrap() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn pearson_known_value() {
        let r = pearson(&[1.0, 2.0, 3.0, 4.0], &[1.0, 3.0, 2.0, 4.0]).unwrap();
        assert!((r - 0.8).abs() < 1e-12);
    }

    #[test]
    fn constant_input_gives_zero() {
        assert_eq!(pearson(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]).unwrap(), 0.0);
    }

    #[test]
    fn mismatched_lengths_error() {
        assert!(spearman(&[1.0, 2.0], &[1.0]).is_err());
    }

    #[test]
    fn greedy_takes_strongest_first() {
        let t = vec![vec![0.9, 0.95, 0.1], vec![0.2, 0.99, 0.3], vec![0.5, 0.1, -0.8]];
        assert_eq!(greedy_axis_assignment(&t).unwrap(), vec![0, 1, 2]);
    }

    #[test]
    fn greedy_needs_enough_axes() {
        assert!(greedy_axis_assignment(&[vec![1.0], vec![0.5]]).is_err());
    }
}
