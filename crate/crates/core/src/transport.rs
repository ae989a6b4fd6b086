//! Exact transportation simplex on integer data.
//!
//! Maximizes `sum reward[i][j] * x[i][j]` over nonnegative integer-scaled
//! flows with fixed row sums (supplies) and column sums (demands). All
//! arithmetic is `BigInt`, so optima are exact. Pivoting uses Bland's
//! rule on the fixed lexicographic cell order, which both prevents
//! cycling and makes the returned basic solution deterministic.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_traits::Zero;

pub(crate) struct TransportInstance {
    pub supply: Vec<BigInt>,
    pub demand: Vec<BigInt>,
    pub reward: Vec<Vec<BigInt>>,
}

/// Optimal flow matrix for the maximization problem.
pub(crate) fn solve_max(inst: &TransportInstance) -> Vec<Vec<BigInt>> {
    let m = inst.supply.len();
    let n = inst.demand.len();
    assert!(m > 0 && n > 0, "empty transport instance");
    debug_assert!(inst.supply.iter().all(|s| s > &BigInt::zero()));
    debug_assert!(inst.demand.iter().all(|d| d > &BigInt::zero()));
    debug_assert_eq!(
        inst.supply.iter().sum::<BigInt>(),
        inst.demand.iter().sum::<BigInt>()
    );

    let mut flow = vec![vec![BigInt::zero(); n]; m];
    let mut basis: BTreeSet<(usize, usize)> = BTreeSet::new();

    // Northwest-corner start: a spanning-tree basis, possibly degenerate.
    let mut remaining_supply = inst.supply.clone();
    let mut remaining_demand = inst.demand.clone();
    let (mut i, mut j) = (0usize, 0usize);
    loop {
        let amount = remaining_supply[i].clone().min(remaining_demand[j].clone());
        remaining_supply[i] -= &amount;
        remaining_demand[j] -= &amount;
        flow[i][j] = amount;
        basis.insert((i, j));
        if i == m - 1 && j == n - 1 {
            break;
        }
        if remaining_supply[i].is_zero() && i + 1 < m {
            i += 1;
        } else {
            j += 1;
        }
    }
    debug_assert_eq!(basis.len(), m + n - 1);

    let iteration_cap = 10_000 + 100 * m * n * (m + n);
    for iteration in 0.. {
        assert!(iteration < iteration_cap, "transport simplex failed to terminate");

        let (u, v) = potentials(&basis, &inst.reward, m, n);

        // Bland entering rule: first cell in (row, col) order that improves.
        let mut entering = None;
        'scan: for row in 0..m {
            for col in 0..n {
                if basis.contains(&(row, col)) {
                    continue;
                }
                let reduced = &inst.reward[row][col] - &u[row] - &v[col];
                if reduced > BigInt::zero() {
                    entering = Some((row, col));
                    break 'scan;
                }
            }
        }
        let Some((ei, ej)) = entering else { break };

        // Unique cycle: the entering cell plus the tree path from its
        // column node back to its row node. Signs alternate around it.
        let path = tree_path(&basis, m, n + m, n + ei, ej);
        let mut cycle = vec![(ei, ej)];
        cycle.extend(path);

        let mut theta: Option<BigInt> = None;
        for (k, &(r, c)) in cycle.iter().enumerate() {
            if k % 2 == 1 {
                let candidate = flow[r][c].clone();
                if theta.as_ref().is_none_or(|t| &candidate < t) {
                    theta = Some(candidate);
                }
            }
        }
        let theta = theta.expect("cycle has at least one decreasing arc");

        let mut leaving = None;
        for (k, &(r, c)) in cycle.iter().enumerate() {
            if k % 2 == 1 && flow[r][c] == theta {
                match leaving {
                    None => leaving = Some((r, c)),
                    Some(best) if (r, c) < best => leaving = Some((r, c)),
                    _ => {}
                }
            }
        }
        let leaving = leaving.expect("some decreasing arc attains theta");

        for (k, &(r, c)) in cycle.iter().enumerate() {
            if k % 2 == 0 {
                flow[r][c] += &theta;
            } else {
                flow[r][c] -= &theta;
            }
        }
        basis.remove(&leaving);
        basis.insert((ei, ej));
    }

    #[cfg(debug_assertions)]
    {
        for (row, supply) in inst.supply.iter().enumerate() {
            assert_eq!(&flow[row].iter().sum::<BigInt>(), supply);
        }
        for (col, demand) in inst.demand.iter().enumerate() {
            assert_eq!(&(0..m).map(|r| flow[r][col].clone()).sum::<BigInt>(), demand);
        }
        assert!(flow.iter().flatten().all(|x| x >= &BigInt::zero()));
    }
    flow
}

/// Dual potentials over the basis tree, anchored at u[0] = 0.
fn potentials(
    basis: &BTreeSet<(usize, usize)>,
    reward: &[Vec<BigInt>],
    m: usize,
    n: usize,
) -> (Vec<BigInt>, Vec<BigInt>) {
    let mut u: Vec<Option<BigInt>> = vec![None; m];
    let mut v: Vec<Option<BigInt>> = vec![None; n];
    u[0] = Some(BigInt::zero());
    let mut assigned = 1;
    while assigned < m + n {
        let mut progressed = false;
        for &(i, j) in basis {
            match (&u[i], &v[j]) {
                (Some(ui), None) => {
                    v[j] = Some(&reward[i][j] - ui);
                    assigned += 1;
                    progressed = true;
                }
                (None, Some(vj)) => {
                    u[i] = Some(&reward[i][j] - vj);
                    assigned += 1;
                    progressed = true;
                }
                _ => {}
            }
        }
        assert!(progressed, "basis is not a spanning tree");
    }
    (
        u.into_iter().map(Option::unwrap).collect(),
        v.into_iter().map(Option::unwrap).collect(),
    )
}

/// Cells along the unique tree path from node `start` to row node `target`.
/// Nodes 0..m are rows, m..m+n are columns.
fn tree_path(
    basis: &BTreeSet<(usize, usize)>,
    m: usize,
    node_count: usize,
    start: usize,
    target: usize,
) -> Vec<(usize, usize)> {
    let mut adjacency: Vec<Vec<(usize, (usize, usize))>> = vec![Vec::new(); node_count];
    for &(i, j) in basis {
        adjacency[i].push((m + j, (i, j)));
        adjacency[m + j].push((i, (i, j)));
    }
    let mut parent: Vec<Option<(usize, (usize, usize))>> = vec![None; node_count];
    let mut visited = vec![false; node_count];
    let mut queue = std::collections::VecDeque::new();
    visited[start] = true;
    queue.push_back(start);
    while let Some(node) = queue.pop_front() {
        if node == target {
            break;
        }
        for &(next, cell) in &adjacency[node] {
            if !visited[next] {
                visited[next] = true;
                parent[next] = Some((node, cell));
                queue.push_back(next);
            }
        }
    }
    assert!(visited[target], "basis tree is disconnected");
    let mut cells = Vec::new();
    let mut node = target;
    while node != start {
        let (prev, cell) = parent[node].expect("path exists");
        cells.push(cell);
        node = prev;
    }
    cells.reverse();
    cells
}

#[cfg(test)]
mod tests {
    use super::*;

    fn big(values: &[i64]) -> Vec<BigInt> {
        values.iter().map(|&v| BigInt::from(v)).collect()
    }

    fn rewards(rows: &[&[i64]]) -> Vec<Vec<BigInt>> {
        rows.iter().map(|r| big(r)).collect()
    }

    fn objective(flow: &[Vec<BigInt>], reward: &[Vec<BigInt>]) -> BigInt {
        flow.iter()
            .zip(reward)
            .flat_map(|(fr, rr)| fr.iter().zip(rr).map(|(f, r)| f * r))
            .sum()
    }

    #[test]
    fn single_cell_instance() {
        let inst = TransportInstance {
            supply: big(&[6]),
            demand: big(&[6]),
            reward: rewards(&[&[5]]),
        };
        let flow = solve_max(&inst);
        assert_eq!(flow, vec![big(&[6])]);
    }

    #[test]
    fn picks_rewarding_matching() {
        // Two suppliers, two consumers; the off-diagonal pays more.
        let inst = TransportInstance {
            supply: big(&[1, 1]),
            demand: big(&[1, 1]),
            reward: rewards(&[&[0, 3], &[3, 0]]),
        };
        let flow = solve_max(&inst);
        assert_eq!(objective(&flow, &inst.reward), BigInt::from(6));
        assert_eq!(flow[0][1], BigInt::from(1));
        assert_eq!(flow[1][0], BigInt::from(1));
    }

    #[test]
    fn respects_marginals_under_skewed_rewards() {
        let inst = TransportInstance {
            supply: big(&[1, 5]),
            demand: big(&[3, 3]),
            reward: rewards(&[&[10, 0], &[10, 1]]),
        };
        let flow = solve_max(&inst);
        // All of column 0 should carry reward 10 regardless of row split.
        assert_eq!(objective(&flow, &inst.reward), BigInt::from(33));
    }

    #[test]
    fn handles_degenerate_allocations() {
        // Supplies and demands force zero-flow basic cells in the
        // northwest start.
        let inst = TransportInstance {
            supply: big(&[2, 2, 2]),
            demand: big(&[2, 2, 2]),
            reward: rewards(&[&[1, 0, 0], &[0, 1, 0], &[0, 0, 1]]),
        };
        let flow = solve_max(&inst);
        assert_eq!(objective(&flow, &inst.reward), BigInt::from(6));
        for i in 0..3 {
            assert_eq!(flow[i][i], BigInt::from(2));
        }
    }
}
