//! Minimum cost bipartite assignment via shortest augmenting paths with
//! potentials (the Jonker-Volgenant flavor of the Hungarian method).

/// Assigns every row to a distinct column minimizing total cost. Requires
/// `rows <= cols` and finite entries. Returns the column per row and the
/// total. Deterministic: all scans resolve ties toward lower indices.
pub fn min_cost_assignment(costs: &[Vec<f64>]) -> (Vec<usize>, f64) {
    let rows = costs.len();
    if rows == 0 {
        return (Vec::new(), 0.0);
    }
    let cols = costs[0].len();
    assert!(rows <= cols, "assignment needs at least as many columns as rows");
    debug_assert!(costs.iter().all(|r| r.len() == cols && r.iter().all(|c| c.is_finite())));

    // job[c] = row currently assigned to column c; cols is a virtual column
    let mut job = vec![usize::MAX; cols + 1];
    let mut row_pot = vec![0.0f64; rows];
    let mut col_pot = vec![0.0f64; cols + 1];

    for row in 0..rows {
        let mut cur = cols;
        job[cur] = row;
        let mut min_to = vec![f64::INFINITY; cols + 1];
        let mut prev = vec![usize::MAX; cols + 1];
        let mut in_tree = vec![false; cols + 1];
        while job[cur] != usize::MAX {
            in_tree[cur] = true;
            let j = job[cur];
            let mut delta = f64::INFINITY;
            let mut next = usize::MAX;
            for c in 0..cols {
                if in_tree[c] {
                    continue;
                }
                let reduced = costs[j][c] - row_pot[j] - col_pot[c];
                if reduced < min_to[c] {
                    min_to[c] = reduced;
                    prev[c] = cur;
                }
                if min_to[c] < delta {
                    delta = min_to[c];
                    next = c;
                }
            }
            debug_assert!(next != usize::MAX, "a free column always remains");
            for c in 0..=cols {
                if in_tree[c] {
                    row_pot[job[c]] += delta;
                    col_pot[c] -= delta;
                } else {
                    min_to[c] -= delta;
                }
            }
            cur = next;
        }
        while cur != cols {
            let c = prev[cur];
            job[cur] = job[c];
            cur = c;
        }
    }

    let mut assignment = vec![usize::MAX; rows];
    for c in 0..cols {
        if job[c] != usize::MAX {
            assignment[job[c]] = c;
        }
    }
    let total = assignment.iter().enumerate().map(|(r, &c)| costs[r][c]).sum();
    (assignment, total)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_force(costs: &[Vec<f64>]) -> f64 {
        fn rec(costs: &[Vec<f64>], row: usize, used: &mut Vec<bool>) -> f64 {
            if row == costs.len() {
                return 0.0;
            }
            let mut best = f64::INFINITY;
            for c in 0..costs[0].len() {
                if !used[c] {
                    used[c] = true;
                    best = best.min(costs[row][c] + rec(costs, row + 1, used));
                    used[c] = false;
                }
            }
            best
        }
        rec(costs, 0, &mut vec![false; costs[0].len()])
    }

    #[test]
    fn rectangular_example() {
        let costs = vec![vec![1.0, 2.0, 9.0], vec![3.0, 1.0, 9.0]];
        let (assignment, total) = min_cost_assignment(&costs);
        assert_eq!(assignment, vec![0, 1]);
        assert_eq!(total, 2.0);
    }

    #[test]
    fn diagonal_dominant_picks_diagonal() {
        let costs = vec![
            vec![1.0, 10.0, 10.0],
            vec![10.0, 2.0, 10.0],
            vec![10.0, 10.0, 3.0],
        ];
        let (assignment, total) = min_cost_assignment(&costs);
        assert_eq!(assignment, vec![0, 1, 2]);
        assert_eq!(total, 6.0);
    }

    #[test]
    fn single_cell() {
        let (assignment, total) = min_cost_assignment(&[vec![7.5]]);
        assert_eq!(assignment, vec![0]);
        assert_eq!(total, 7.5);
    }

    #[test]
    fn matches_brute_force_on_random_matrices() {
        let mut x = 0x2545_f491_4f6c_dd1du64;
        let mut next = move || {
            x ^= x << 13;
            x ^= x >> 7;
            x ^= x << 17;
            (x >> 11) as f64 / (1u64 << 53) as f64
        };
        for trial in 0..300 {
            let rows = 1 + trial % 6;
            let cols = rows + trial % 3;
            let costs: Vec<Vec<f64>> = (0..rows)
                .map(|_| (0..cols).map(|_| (next() * 100.0).round() / 10.0).collect())
                .collect();
            let (assignment, total) = min_cost_assignment(&costs);
            let mut seen = assignment.clone();
            seen.sort_unstable();
            seen.dedup();
            assert_eq!(seen.len(), rows, "assignment must be injective");
            let expected = brute_force(&costs);
            assert!(
                (total - expected).abs() <= 1e-9 * (1.0 + expected),
                "trial {trial}: got {total}, brute force {expected}"
            );
        }
    }

    #[test]
    fn ties_resolve_deterministically() {
        let costs = vec![vec![1.0, 1.0], vec![1.0, 1.0]];
        let (assignment, total) = min_cost_assignment(&costs);
        assert_eq!(total, 2.0);
        assert_eq!(assignment, vec![0, 1]);
    }
}
