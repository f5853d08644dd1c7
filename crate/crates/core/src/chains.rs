//! Point clouds in `[0, 1]^t`, longest chains under the componentwise order,
//! and maximal chains.
//!
//! A chain is a sequence of points each componentwise `≤` the next. The
//! intervals of a chain `X_1 ≤ … ≤ X_ℓ` are `[0, X_1], [X_1, X_2], …,
//! [X_{ℓ-1}, X_ℓ]`; the chain is maximal when no other sample point lies
//! strictly between the endpoints of any of them.

use std::cmp::Ordering;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harness::RunningStats;

/// Largest cloud accepted by [`count_maximal_chains`].
pub const MAX_COUNT_POINTS: usize = 14;

#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    t: usize,
    n: usize,
    coords: Vec<f64>,
}

impl PointCloud {
    /// Builds a cloud from point-major coordinates.
    pub fn new(t: usize, coords: Vec<f64>) -> Result<Self> {
        if t == 0 {
            return Err(Error::Argument("dimension must be at least 1".into()));
        }
        if !coords.len().is_multiple_of(t) {
            return Err(Error::Argument(format!(
                "{} coordinates do not split into points of dimension {t}",
                coords.len()
            )));
        }
        if let Some(bad) = coords.iter().find(|c| !(0.0..=1.0).contains(*c)) {
            return Err(Error::Argument(format!("coordinate {bad} outside [0, 1]")));
        }
        Ok(Self {
            t,
            n: coords.len() / t,
            coords,
        })
    }

    pub fn from_points(points: &[Vec<f64>]) -> Result<Self> {
        let t = points.first().map_or(0, Vec::len);
        if points.iter().any(|p| p.len() != t) {
            return Err(Error::Argument("points have different dimensions".into()));
        }
        Self::new(t, points.concat())
    }

    pub fn dim(&self) -> usize {
        self.t
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.t..(i + 1) * self.t]
    }

    /// Copy of the cloud without point `i`.
    pub fn without(&self, i: usize) -> Self {
        let mut coords = self.coords.clone();
        coords.drain(i * self.t..(i + 1) * self.t);
        Self {
            t: self.t,
            n: self.n - 1,
            coords,
        }
    }

    /// Copy of the cloud with one extra coordinate equal to `value` on every point.
    pub fn with_constant_coordinate(&self, value: f64) -> Self {
        let mut coords = Vec::with_capacity(self.n * (self.t + 1));
        for i in 0..self.n {
            coords.extend_from_slice(self.point(i));
            coords.push(value);
        }
        Self {
            t: self.t + 1,
            n: self.n,
            coords,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainRunResult {
    pub length: usize,
    /// `length / n^{1/t}`.
    pub ratio: f64,
}

impl ChainRunResult {
    fn new(length: usize, n: usize, t: usize) -> Self {
        let scale = (n as f64).powf(1.0 / t as f64);
        Self {
            length,
            ratio: length as f64 / scale,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MaximalChainCount {
    pub ell: usize,
    pub count: u64,
}

/// Monte Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub estimate: f64,
    pub std_error: f64,
}

/// `n · t` independent uniforms, point-major.
pub fn sample_cloud<R: Rng + ?Sized>(n: usize, t: usize, rng: &mut R) -> PointCloud {
    assert!(n >= 1 && t >= 1, "sample_cloud needs n >= 1 and t >= 1");
    let coords = (0..n * t).map(|_| rng.gen::<f64>()).collect();
    PointCloud { t, n, coords }
}

#[inline]
fn leq(p: &[f64], q: &[f64]) -> bool {
    p.iter().zip(q).all(|(a, b)| a <= b)
}

#[inline]
fn strictly_between(lower: &[f64], p: &[f64], upper: &[f64]) -> bool {
    lower
        .iter()
        .zip(p)
        .zip(upper)
        .all(|((l, x), u)| l < x && x < u)
}

fn check_indices(cloud: &PointCloud, indices: &[usize]) -> Result<()> {
    let mut seen = vec![false; cloud.len()];
    for &i in indices {
        if i >= cloud.len() {
            return Err(Error::Argument(format!(
                "index {i} out of range for {} points",
                cloud.len()
            )));
        }
        if std::mem::replace(&mut seen[i], true) {
            return Err(Error::Argument(format!("index {i} repeated")));
        }
    }
    Ok(())
}

/// Whether consecutive points of `indices` are componentwise `≤`.
pub fn is_chain(cloud: &PointCloud, indices: &[usize]) -> Result<bool> {
    check_indices(cloud, indices)?;
    Ok(indices
        .windows(2)
        .all(|w| leq(cloud.point(w[0]), cloud.point(w[1]))))
}

/// Whether every interval `[X_{i_{j-1}}, X_{i_j}]`, starting from the origin,
/// is free of other sample points.
pub fn is_maximal_chain(cloud: &PointCloud, indices: &[usize]) -> Result<bool> {
    if !is_chain(cloud, indices)? {
        return Err(Error::Argument("indices do not form a chain".into()));
    }
    let origin = vec![0.0; cloud.dim()];
    let mut member = vec![false; cloud.len()];
    for &i in indices {
        member[i] = true;
    }
    let mut lower: &[f64] = &origin;
    for &i in indices {
        let upper = cloud.point(i);
        let occupied =
            (0..cloud.len()).any(|k| !member[k] && strictly_between(lower, cloud.point(k), upper));
        if occupied {
            return Ok(false);
        }
        lower = upper;
    }
    Ok(true)
}

/// Whether `[X_{i_ℓ}, 1]` is free of other sample points. Not part of
/// maximality; every longest chain satisfies it.
pub fn trailing_interval_empty(cloud: &PointCloud, indices: &[usize]) -> Result<bool> {
    if !is_chain(cloud, indices)? {
        return Err(Error::Argument("indices do not form a chain".into()));
    }
    let Some(&last) = indices.last() else {
        return Ok(true);
    };
    let ones = vec![1.0; cloud.dim()];
    let lower = cloud.point(last);
    Ok((0..cloud.len())
        .filter(|k| !indices.contains(k))
        .all(|k| !strictly_between(lower, cloud.point(k), &ones)))
}

fn lex_cmp(a: &[f64], b: &[f64]) -> Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal)
}

/// Point indices in lexicographic coordinate order. If `p ≤ q` componentwise
/// then `p` precedes `q` (or they are equal), so every chain is a
/// subsequence of this order.
fn lex_order(cloud: &PointCloud) -> Vec<usize> {
    let mut order: Vec<usize> = (0..cloud.len()).collect();
    order.sort_by(|&i, &j| lex_cmp(cloud.point(i), cloud.point(j)));
    order
}

fn check_nonempty(cloud: &PointCloud) -> Result<()> {
    if cloud.is_empty() {
        return Err(Error::Argument("empty point cloud".into()));
    }
    Ok(())
}

/// Length of the longest chain.
///
/// Uses the total order for `t = 1`, patience sorting for `t = 2`, a
/// divide-and-conquer dominance sweep for `t = 3` and the quadratic dynamic
/// program otherwise.
pub fn longest_chain(cloud: &PointCloud) -> Result<ChainRunResult> {
    check_nonempty(cloud)?;
    match cloud.dim() {
        1 => Ok(ChainRunResult::new(cloud.len(), cloud.len(), 1)),
        2 => longest_chain_patience(cloud),
        3 => longest_chain_divide(cloud),
        _ => longest_chain_quadratic(cloud),
    }
}

/// `O(n log n)` route for `t = 2`: the longest non-decreasing subsequence of
/// second coordinates in lexicographic order.
pub fn longest_chain_patience(cloud: &PointCloud) -> Result<ChainRunResult> {
    check_nonempty(cloud)?;
    if cloud.dim() != 2 {
        return Err(Error::Argument(format!(
            "patience sorting needs t = 2, got t = {}",
            cloud.dim()
        )));
    }
    let mut pts: Vec<(f64, f64)> = cloud.coords.chunks_exact(2).map(|p| (p[0], p[1])).collect();
    pts.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    // tails[k] is the smallest possible last value of a chain of length k + 1
    let mut tails: Vec<f64> = Vec::new();
    for &(_, y) in &pts {
        let pos = tails.partition_point(|&v| v <= y);
        if pos == tails.len() {
            tails.push(y);
        } else {
            tails[pos] = y;
        }
    }
    Ok(ChainRunResult::new(tails.len(), cloud.len(), 2))
}

/// `O(n² t)` dynamic program; reference path for every dimension.
pub fn longest_chain_quadratic(cloud: &PointCloud) -> Result<ChainRunResult> {
    check_nonempty(cloud)?;
    let t = cloud.dim();
    let order = lex_order(cloud);
    let sorted: Vec<f64> = order
        .iter()
        .flat_map(|&i| cloud.point(i).iter().copied())
        .collect();
    let mut best = vec![1usize; order.len()];
    for i in 0..order.len() {
        let pi = &sorted[i * t..(i + 1) * t];
        let mut b = 0;
        for j in 0..i {
            if best[j] > b && leq(&sorted[j * t..(j + 1) * t], pi) {
                b = best[j];
            }
        }
        best[i] = b + 1;
    }
    let length = best.iter().copied().max().unwrap_or(0);
    Ok(ChainRunResult::new(length, cloud.len(), t))
}

/// Prefix-maximum Fenwick tree over ranks `1..=n`.
struct MaxFenwick {
    tree: Vec<u32>,
}

impl MaxFenwick {
    fn new(n: usize) -> Self {
        Self {
            tree: vec![0; n + 1],
        }
    }

    fn raise(&mut self, mut i: usize, value: u32) {
        while i < self.tree.len() {
            if self.tree[i] < value {
                self.tree[i] = value;
            }
            i += i & i.wrapping_neg();
        }
    }

    fn prefix_max(&self, mut i: usize) -> u32 {
        let mut m = 0;
        while i > 0 {
            m = m.max(self.tree[i]);
            i -= i & i.wrapping_neg();
        }
        m
    }

    fn clear(&mut self, mut i: usize) {
        while i < self.tree.len() && self.tree[i] != 0 {
            self.tree[i] = 0;
            i += i & i.wrapping_neg();
        }
    }
}

struct Divide<'a> {
    ys: &'a [f64],
    z_rank: &'a [usize],
    best: Vec<u32>,
    fenwick: MaxFenwick,
    left: Vec<usize>,
    right: Vec<usize>,
}

impl Divide<'_> {
    fn solve(&mut self, lo: usize, hi: usize) {
        if hi - lo <= 1 {
            return;
        }
        let mid = lo + (hi - lo) / 2;
        self.solve(lo, mid);
        self.propagate(lo, mid, hi);
        self.solve(mid, hi);
    }

    /// Raise `best` on `[mid, hi)` using final values on `[lo, mid)`.
    fn propagate(&mut self, lo: usize, mid: usize, hi: usize) {
        let ys = self.ys;
        let mut left = std::mem::take(&mut self.left);
        let mut right = std::mem::take(&mut self.right);
        left.clear();
        right.clear();
        left.extend(lo..mid);
        right.extend(mid..hi);
        left.sort_unstable_by(|&a, &b| ys[a].total_cmp(&ys[b]));
        right.sort_unstable_by(|&a, &b| ys[a].total_cmp(&ys[b]));
        let mut k = 0;
        for &i in &right {
            while k < left.len() && ys[left[k]] <= ys[i] {
                let j = left[k];
                self.fenwick.raise(self.z_rank[j], self.best[j]);
                k += 1;
            }
            let m = self.fenwick.prefix_max(self.z_rank[i]);
            if m + 1 > self.best[i] {
                self.best[i] = m + 1;
            }
        }
        for &j in &left[..k] {
            self.fenwick.clear(self.z_rank[j]);
        }
        self.left = left;
        self.right = right;
    }
}

/// `O(n log² n)` route for `t = 3`: in lexicographic order a predecessor
/// only has to dominate in the last two coordinates, which is a 2-D
/// dominance query answered by divide and conquer over the order with a
/// Fenwick tree on ranks of the third coordinate.
pub fn longest_chain_divide(cloud: &PointCloud) -> Result<ChainRunResult> {
    check_nonempty(cloud)?;
    if cloud.dim() != 3 {
        return Err(Error::Argument(format!(
            "divide-and-conquer route needs t = 3, got t = {}",
            cloud.dim()
        )));
    }
    let n = cloud.len();
    let order = lex_order(cloud);
    let ys: Vec<f64> = order.iter().map(|&i| cloud.point(i)[1]).collect();
    let zs: Vec<f64> = order.iter().map(|&i| cloud.point(i)[2]).collect();

    // dense 1-based ranks, equal values share a rank
    let mut by_z: Vec<usize> = (0..n).collect();
    by_z.sort_unstable_by(|&a, &b| zs[a].total_cmp(&zs[b]));
    let mut z_rank = vec![0usize; n];
    let mut rank = 0;
    for (k, &i) in by_z.iter().enumerate() {
        if k == 0 || zs[by_z[k - 1]] != zs[i] {
            rank += 1;
        }
        z_rank[i] = rank;
    }

    let mut dc = Divide {
        ys: &ys,
        z_rank: &z_rank,
        best: vec![1; n],
        fenwick: MaxFenwick::new(rank),
        left: Vec::new(),
        right: Vec::new(),
    };
    dc.solve(0, n);
    let length = dc.best.iter().copied().max().unwrap_or(0) as usize;
    Ok(ChainRunResult::new(length, n, 3))
}

/// Number of maximal chains of length `ell`, by depth-first extension through
/// empty intervals only. Limited to [`MAX_COUNT_POINTS`] points.
pub fn count_maximal_chains(cloud: &PointCloud, ell: usize) -> Result<MaximalChainCount> {
    let n = cloud.len();
    if n > MAX_COUNT_POINTS {
        return Err(Error::SizeGuard(format!(
            "maximal-chain enumeration is limited to {MAX_COUNT_POINTS} points, got {n}"
        )));
    }
    if ell == 0 || ell > n {
        return Err(Error::Argument(format!(
            "need 1 <= ell <= n = {n}, got ell = {ell}"
        )));
    }
    let origin = vec![0.0; cloud.dim()];
    let mut in_chain = vec![false; n];
    let count = extend(cloud, &origin, ell, &mut in_chain);
    Ok(MaximalChainCount { ell, count })
}

fn extend(cloud: &PointCloud, last: &[f64], remaining: usize, in_chain: &mut [bool]) -> u64 {
    if remaining == 0 {
        return 1;
    }
    let mut total = 0;
    for p in 0..cloud.len() {
        if in_chain[p] || !leq(last, cloud.point(p)) {
            continue;
        }
        let upper = cloud.point(p);
        let blocked = (0..cloud.len())
            .any(|k| k != p && !in_chain[k] && strictly_between(last, cloud.point(k), upper));
        if blocked {
            continue;
        }
        in_chain[p] = true;
        total += extend(cloud, upper, remaining - 1, in_chain);
        in_chain[p] = false;
    }
    total
}

/// `ln (n)_ℓ = ln n! - ln (n-ℓ)!`.
fn ln_falling(n: usize, ell: usize) -> f64 {
    (n - ell + 1..=n).map(|k| (k as f64).ln()).sum()
}

fn ln_factorial(k: usize) -> f64 {
    (2..=k).map(|j| (j as f64).ln()).sum()
}

/// Unbiased Monte Carlo estimate of the expected number of maximal chains of
/// length `ell`:
///
/// ```text
/// E[C_ℓ] = (n)_ℓ ∫_{0 ≤ x(1) ≤ … ≤ x(ℓ) ≤ 1} (1 - Σ_i Π_j (x_j(i) - x_j(i-1)))^{n-ℓ} dx
/// ```
///
/// The chain region factorizes over coordinates into `t` copies of the
/// simplex `0 ≤ s_1 ≤ … ≤ s_ℓ ≤ 1`, each of volume `1/ℓ!`. Sorting `ℓ`
/// uniforms per coordinate samples that region with constant density
/// `(ℓ!)^t`, so the integral equals `(ℓ!)^{-t} E[f(X)]` for the integrand
/// `f`, and `(n)_ℓ (ℓ!)^{-t} f(X)` is an unbiased single-draw estimator.
/// Returned are its sample mean over `reps` draws and the standard error.
pub fn expected_count_integral_mc<R: Rng + ?Sized>(
    n: usize,
    t: usize,
    ell: usize,
    reps: usize,
    rng: &mut R,
) -> Result<McEstimate> {
    if t == 0 {
        return Err(Error::Argument("dimension must be at least 1".into()));
    }
    if ell == 0 || ell > n {
        return Err(Error::Argument(format!(
            "need 1 <= ell <= n = {n}, got ell = {ell}"
        )));
    }
    if reps == 0 {
        return Err(Error::Argument("reps must be at least 1".into()));
    }
    let scale = (ln_falling(n, ell) - t as f64 * ln_factorial(ell)).exp();
    let exponent = i32::try_from(n - ell)
        .map_err(|_| Error::Argument(format!("n - ell = {} too large", n - ell)))?;
    let mut chain = vec![0.0; t * ell];
    let mut stats = RunningStats::new();
    for _ in 0..reps {
        for coord in chain.chunks_exact_mut(ell) {
            coord.iter_mut().for_each(|c| *c = rng.gen::<f64>());
            coord.sort_unstable_by(f64::total_cmp);
        }
        let mut occupied = 0.0;
        for i in 0..ell {
            let mut vol = 1.0;
            for j in 0..t {
                let c = &chain[j * ell..(j + 1) * ell];
                let prev = if i == 0 { 0.0 } else { c[i - 1] };
                vol *= c[i] - prev;
            }
            occupied += vol;
        }
        let free = (1.0 - occupied).max(0.0);
        stats.push(scale * free.powi(exponent));
    }
    Ok(McEstimate {
        estimate: stats.mean(),
        std_error: stats.std_error(),
    })
}
