//! Maximum-weight bipartite assignment (Hungarian algorithm with
//! potentials, O(n³)), used for mention and entity alignment.

/// Maximum-weight one-to-one assignment over a rectangular weight matrix
/// (`weights[row][col] >= 0`). Returns, per row, the assigned column.
/// Zero-weight cells count as "no edge": such pairs are left unassigned in
/// the result. Deterministic for ties.
pub fn max_weight_assignment(weights: &[Vec<f64>]) -> Vec<Option<usize>> {
    let rows = weights.len();
    let cols = weights.iter().map(|r| r.len()).max().unwrap_or(0);
    if rows == 0 || cols == 0 {
        return vec![None; rows];
    }
    let n = rows.max(cols);
    let max_w = weights
        .iter()
        .flat_map(|r| r.iter())
        .fold(0.0_f64, |a, &b| a.max(b));
    // minimization form: cost = max_w - weight, padding cells cost max_w
    let cost = |i: usize, j: usize| -> f64 {
        if i < rows && j < weights[i].len() {
            max_w - weights[i][j]
        } else {
            max_w
        }
    };

    let inf = f64::INFINITY;
    let mut u = vec![0.0_f64; n + 1];
    let mut v = vec![0.0_f64; n + 1];
    let mut matched_row = vec![0usize; n + 1]; // per column (1-based), 0 = free
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        matched_row[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![inf; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = matched_row[j0];
            let mut delta = inf;
            let mut j1 = 0usize;
            for j in 1..=n {
                if !used[j] {
                    let cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
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
                    u[matched_row[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if matched_row[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            matched_row[j0] = matched_row[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut out = vec![None; rows];
    for j in 1..=n {
        let i = matched_row[j];
        if i >= 1 && i <= rows && j <= cols {
            let (r, c) = (i - 1, j - 1);
            if c < weights[r].len() && weights[r][c] > 0.0 {
                out[r] = Some(c);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_force_best(weights: &[Vec<f64>]) -> f64 {
        fn rec(weights: &[Vec<f64>], row: usize, used: &mut Vec<bool>) -> f64 {
            if row == weights.len() {
                return 0.0;
            }
            // skip this row
            let mut best = rec(weights, row + 1, used);
            for c in 0..weights[row].len() {
                if !used[c] && weights[row][c] > 0.0 {
                    used[c] = true;
                    best = best.max(weights[row][c] + rec(weights, row + 1, used));
                    used[c] = false;
                }
            }
            best
        }
        let cols = weights.iter().map(|r| r.len()).max().unwrap_or(0);
        rec(weights, 0, &mut vec![false; cols])
    }

    fn total(weights: &[Vec<f64>], assignment: &[Option<usize>]) -> f64 {
        assignment
            .iter()
            .enumerate()
            .filter_map(|(r, c)| c.map(|c| weights[r][c]))
            .sum()
    }

    #[test]
    fn simple_cases() {
        let w = vec![vec![2.0, 1.0], vec![1.0, 3.0]];
        let a = max_weight_assignment(&w);
        assert_eq!(a, vec![Some(0), Some(1)]);

        // forcing a swap
        let w = vec![vec![5.0, 4.0], vec![5.0, 0.0]];
        let a = max_weight_assignment(&w);
        assert_eq!(total(&w, &a), 9.0);
    }

    #[test]
    fn zero_cells_stay_unassigned() {
        let w = vec![vec![0.0, 0.0], vec![0.0, 1.0]];
        let a = max_weight_assignment(&w);
        assert_eq!(a[0], None);
        assert_eq!(a[1], Some(1));
    }

    #[test]
    fn matches_brute_force_on_random_instances() {
        use rand::prelude::*;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..300 {
            let rows = rng.random_range(0..=6);
            let cols = rng.random_range(0..=6);
            let w: Vec<Vec<f64>> = (0..rows)
                .map(|_| {
                    (0..cols)
                        .map(|_| {
                            if rng.random::<f64>() < 0.4 {
                                0.0
                            } else {
                                rng.random_range(1..100) as f64
                            }
                        })
                        .collect()
                })
                .collect();
            let a = max_weight_assignment(&w);
            // one-to-one
            let mut seen = std::collections::HashSet::new();
            for c in a.iter().flatten() {
                assert!(seen.insert(*c));
            }
            let got = total(&w, &a);
            let best = brute_force_best(&w);
            assert!(
                (got - best).abs() < 1e-6,
                "assignment {got} != brute force {best} on {w:?}"
            );
        }
    }
}
