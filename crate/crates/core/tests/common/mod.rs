//! Shared helpers for the integration tests, including a brute-force
//! enumerator of sphere triangulations that shares no code with the library.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashSet};

pub type EdgeSet = BTreeSet<(usize, usize)>;

fn e(a: usize, b: usize) -> (usize, usize) {
    (a.min(b), a.max(b))
}

/// Vertex link of `v` is one cycle through all its neighbours.
fn link_is_cycle(v: usize, tris: &[[usize; 3]]) -> bool {
    let mut adj: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for t in tris.iter().filter(|t| t.contains(&v)) {
        let o: Vec<usize> = t.iter().copied().filter(|&x| x != v).collect();
        adj.entry(o[0]).or_default().push(o[1]);
        adj.entry(o[1]).or_default().push(o[0]);
    }
    if adj.values().any(|n| n.len() != 2) {
        return false;
    }
    let start = *adj.keys().next().unwrap();
    let (mut prev, mut cur, mut len) = (start, adj[&start][0], 1);
    while cur != start {
        let next = if adj[&cur][0] == prev { adj[&cur][1] } else { adj[&cur][0] };
        prev = cur;
        cur = next;
        len += 1;
    }
    len == adj.len()
}

fn grow(n: usize, tris: &mut Vec<[usize; 3]>, count: &mut BTreeMap<(usize, usize), u8>, used: usize, out: &mut Vec<EdgeSet>) {
    if tris.len() > 2 * n - 4 {
        return;
    }
    let open = count.iter().find(|(_, &c)| c == 1).map(|(k, _)| *k);
    let Some((a, b)) = open else {
        if used == n && tris.len() == 2 * n - 4 && (0..n).all(|v| link_is_cycle(v, tris)) {
            out.push(count.keys().copied().collect());
        }
        return;
    };
    for c in 0..n.min(used + 1) {
        if c == a || c == b {
            continue;
        }
        let mut t = [a, b, c];
        t.sort_unstable();
        if tris.contains(&t) || count.get(&e(a, c)).copied().unwrap_or(0) >= 2 || count.get(&e(b, c)).copied().unwrap_or(0) >= 2 {
            continue;
        }
        tris.push(t);
        for k in [e(a, b), e(a, c), e(b, c)] {
            *count.entry(k).or_insert(0) += 1;
        }
        grow(n, tris, count, used.max(c + 1), out);
        for k in [e(a, b), e(a, c), e(b, c)] {
            let x = count.get_mut(&k).unwrap();
            *x -= 1;
            if *x == 0 {
                count.remove(&k);
            }
        }
        tris.pop();
    }
}

fn degrees(n: usize, es: &EdgeSet) -> Vec<usize> {
    let mut d = vec![0; n];
    for &(a, b) in es {
        d[a] += 1;
        d[b] += 1;
    }
    d
}

/// Graph isomorphism by degree-respecting backtracking.
pub fn isomorphic(n: usize, x: &EdgeSet, y: &EdgeSet) -> bool {
    if x.len() != y.len() {
        return false;
    }
    let (dx, dy) = (degrees(n, x), degrees(n, y));
    let mut sx = dx.clone();
    let mut sy = dy.clone();
    sx.sort_unstable();
    sy.sort_unstable();
    if sx != sy {
        return false;
    }
    fn go(i: usize, n: usize, map: &mut Vec<usize>, taken: &mut Vec<bool>, x: &EdgeSet, y: &EdgeSet, dx: &[usize], dy: &[usize]) -> bool {
        if i == n {
            return true;
        }
        for j in 0..n {
            if taken[j] || dx[i] != dy[j] {
                continue;
            }
            let ok = (0..i).all(|k| x.contains(&e(i, k)) == y.contains(&e(j, map[k])));
            if ok {
                map.push(j);
                taken[j] = true;
                if go(i + 1, n, map, taken, x, y, dx, dy) {
                    return true;
                }
                taken[j] = false;
                map.pop();
            }
        }
        false
    }
    go(0, n, &mut Vec::new(), &mut vec![false; n], x, y, &dx, &dy)
}

/// Isomorphism classes of triangulated spheres on `n` vertices, as graphs.
pub fn oracle_triangulations(n: usize) -> Vec<EdgeSet> {
    let mut raw = Vec::new();
    let mut count = BTreeMap::new();
    for k in [(0, 1), (0, 2), (1, 2)] {
        count.insert(k, 1);
    }
    grow(n, &mut vec![[0, 1, 2]], &mut count, 3, &mut raw);
    let mut seen: HashSet<EdgeSet> = HashSet::new();
    let mut classes: Vec<EdgeSet> = Vec::new();
    for es in raw {
        if !seen.insert(es.clone()) {
            continue;
        }
        if !classes.iter().any(|c| isomorphic(n, c, &es)) {
            classes.push(es);
        }
    }
    classes
}

pub fn mean_sd(v: &[f64]) -> (f64, f64) {
    let m = v.iter().sum::<f64>() / v.len() as f64;
    (m, (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / v.len() as f64).sqrt())
}
