//! Maximum bipartite matching (augmenting paths).
//!
//! Left vertices are processed in increasing order and each adjacency list is tried in the
//! order given, so callers control tie-breaking by sorting adjacency lists.

/// `adj[l]` lists the right vertices adjacent to left vertex `l`. Returns, for every left
/// vertex, its partner if matched.
pub fn max_matching(n_right: usize, adj: &[Vec<usize>]) -> Vec<Option<usize>> {
    let mut right_owner: Vec<Option<usize>> = vec![None; n_right];
    for l in 0..adj.len() {
        let mut visited = vec![false; n_right];
        augment(l, adj, &mut right_owner, &mut visited);
    }
    let mut left_partner = vec![None; adj.len()];
    for (r, owner) in right_owner.iter().enumerate() {
        if let Some(l) = owner {
            left_partner[*l] = Some(r);
        }
    }
    left_partner
}

fn augment(l: usize, adj: &[Vec<usize>], right_owner: &mut [Option<usize>], visited: &mut [bool]) -> bool {
    for &r in &adj[l] {
        if visited[r] {
            continue;
        }
        visited[r] = true;
        let free = match right_owner[r] {
            None => true,
            Some(other) => augment(other, adj, right_owner, visited),
        };
        if free {
            right_owner[r] = Some(l);
            return true;
        }
    }
    false
}

/// Whether a matching exists that covers every left vertex with `must_left[l]` and every right
/// vertex with `must_right[r]`, using edges `adj`. Returns such a matching (left partner per
/// left vertex) if one exists.
///
/// Reduction: add a copy of each side; an optional vertex may pair with its own copy, copies
/// pair freely with each other, and a perfect matching of the doubled graph is what we want.
pub fn covering_matching(
    adj: &[Vec<usize>],
    must_left: &[bool],
    must_right: &[bool],
) -> Option<Vec<Option<usize>>> {
    let n = adj.len();
    let m = must_right.len();
    // left side: 0..n real left, n..n+m copies of right; right side: 0..m real right, m..m+n copies of left
    let mut big: Vec<Vec<usize>> = Vec::with_capacity(n + m);
    for (l, edges) in adj.iter().enumerate() {
        let mut e = edges.clone();
        if !must_left[l] {
            e.push(m + l);
        }
        big.push(e);
    }
    for r in 0..m {
        let mut e = Vec::new();
        if !must_right[r] {
            e.push(r);
        }
        e.extend((0..n).map(|l| m + l));
        big.push(e);
    }
    let matched = max_matching(n + m, &big);
    if matched.iter().any(|p| p.is_none()) {
        return None;
    }
    Some(
        matched[..n]
            .iter()
            .map(|p| p.filter(|&r| r < m))
            .collect(),
    )
}
