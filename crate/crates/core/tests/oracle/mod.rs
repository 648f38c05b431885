//! Brute-force reference implementations used by the integration and
//! acceptance tests. Each one is written independently of the library code
//! it checks.

#![allow(dead_code)]

/// Naive O(n^3) greedy Ward.D on a dense distance matrix. Returns the merge
/// heights in merge order and, for each merge, the pair of clusters joined
/// as sorted member lists.
pub fn naive_ward(dist: &[f64], n: usize) -> (Vec<f64>, Vec<Vec<Vec<usize>>>) {
    let mut d = dist.to_vec();
    let mut members: Vec<Option<Vec<usize>>> = (0..n).map(|i| Some(vec![i])).collect();
    let mut heights = Vec::new();
    let mut partitions = vec![members.iter().flatten().cloned().collect::<Vec<_>>()];
    for _ in 1..n {
        let mut best = (f64::INFINITY, 0, 0);
        for i in 0..n {
            for j in i + 1..n {
                if members[i].is_some() && members[j].is_some() && d[i * n + j] < best.0 {
                    best = (d[i * n + j], i, j);
                }
            }
        }
        let (h, i, j) = best;
        let ni = members[i].as_ref().unwrap().len() as f64;
        let nj = members[j].as_ref().unwrap().len() as f64;
        for k in 0..n {
            if k == i || k == j || members[k].is_none() {
                continue;
            }
            let nk = members[k].as_ref().unwrap().len() as f64;
            let t = ni + nj + nk;
            let v = ((ni + nk) * d[i * n + k] + (nj + nk) * d[j * n + k] - nk * h) / t;
            d[i * n + k] = v;
            d[k * n + i] = v;
        }
        let mut joined = members[i].take().unwrap();
        joined.extend(members[j].take().unwrap());
        joined.sort_unstable();
        members[i] = Some(joined);
        heights.push(h);
        let mut part: Vec<Vec<usize>> = members.iter().flatten().cloned().collect();
        part.sort();
        partitions.push(part);
    }
    (heights, partitions)
}

/// Groups of a label vector as sorted member lists, sorted.
pub fn groups(labels: &[usize]) -> Vec<Vec<usize>> {
    let k = labels.iter().max().map_or(0, |&m| m + 1);
    let mut g = vec![Vec::new(); k];
    for (i, &l) in labels.iter().enumerate() {
        g[l].push(i);
    }
    g.retain(|v| !v.is_empty());
    g.sort();
    g
}

/// ARI by counting agreements over all pairs.
pub fn pair_count_ari(a: &[usize], b: &[usize]) -> f64 {
    let n = a.len();
    let (mut both, mut only_a, mut only_b, mut neither) = (0f64, 0f64, 0f64, 0f64);
    for i in 0..n {
        for j in i + 1..n {
            match (a[i] == a[j], b[i] == b[j]) {
                (true, true) => both += 1.0,
                (true, false) => only_a += 1.0,
                (false, true) => only_b += 1.0,
                (false, false) => neither += 1.0,
            }
        }
    }
    let denom = (both + only_a) * (only_a + neither) + (both + only_b) * (only_b + neither);
    if denom == 0.0 {
        return 1.0;
    }
    2.0 * (both * neither - only_a * only_b) / denom
}

fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, intervals: usize) -> f64 {
    let h = (b - a) / intervals as f64;
    let mut acc = f(a) + f(b);
    for k in 1..intervals {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + k as f64 * h);
    }
    acc * h / 3.0
}

/// Upper tail of the F(d1, d2) distribution at `f` by numerical
/// integration of the (unnormalised) density, normalised numerically.
///
/// Lower part substitutes `x = f s^2`, upper part `x = f / s^2`, which
/// removes the endpoint singularities for small degrees of freedom.
pub fn f_tail_by_quadrature(f: f64, d1: f64, d2: f64) -> f64 {
    if f <= 0.0 {
        return 1.0;
    }
    let kernel = |x: f64| x.powf(d1 / 2.0 - 1.0) * (1.0 + d1 * x / d2).powf(-(d1 + d2) / 2.0);
    let lower = |s: f64| {
        if s == 0.0 {
            return if d1 == 1.0 { 2.0 * f * f.powf(-0.5) } else { 0.0 };
        }
        2.0 * f * s * kernel(f * s * s)
    };
    let upper = |s: f64| {
        if s == 0.0 {
            return if d2 == 1.0 {
                2.0 * f * f.powf(d1 / 2.0 - 1.0) * (d1 * f / d2).powf(-(d1 + d2) / 2.0)
            } else {
                0.0
            };
        }
        2.0 * f * kernel(f / (s * s)) / (s * s * s)
    };
    let lo = simpson(lower, 0.0, 1.0, 20_000);
    let hi = simpson(upper, 0.0, 1.0, 20_000);
    hi / (lo + hi)
}

/// One-way ANOVA F statistic computed from scratch.
pub fn anova_f(values: &[f64], labels: &[usize]) -> (f64, f64, f64) {
    let k = labels.iter().max().unwrap() + 1;
    let n = values.len();
    let grand = values.iter().sum::<f64>() / n as f64;
    let mut ssb = 0.0;
    let mut ssw = 0.0;
    for c in 0..k {
        let g: Vec<f64> = values.iter().zip(labels).filter(|(_, &l)| l == c).map(|(&v, _)| v).collect();
        let m = g.iter().sum::<f64>() / g.len() as f64;
        ssb += g.len() as f64 * (m - grand).powi(2);
        ssw += g.iter().map(|v| (v - m).powi(2)).sum::<f64>();
    }
    let d1 = (k - 1) as f64;
    let d2 = (n - k) as f64;
    ((ssb / d1) / (ssw / d2), d1, d2)
}
