//! Hierarchical hat bases on sparse grids over the unit cube.
//!
//! The mother function is the unit hat `(1 - |x|)_+`. Dilating and
//! translating it coordinate-wise gives the basis
//!
//! ```text
//! phi_{l,i}(x) = prod_j (1 - |2^{l_j} x_j - i_j|)_+ ,
//! ```
//!
//! with level `l_j >= 1` and odd position `1 <= i_j <= 2^{l_j} - 1` in every
//! coordinate. All basis functions vanish on the boundary of `[0,1]^d`, so
//! the spanned spaces approximate functions that vanish there.
//!
//! A sparse grid with budget `n` keeps exactly the indices with
//! `|l|_1 <= n + d - 1`. Interpolation onto that set is performed by the
//! hierarchization transform: in one dimension the coefficient at a node is
//! the function value minus the average of the values at the two parent
//! nodes one level up, and in `d` dimensions that stencil is applied once
//! per coordinate. The resulting coefficients (surpluses) of a function
//! with bounded second mixed derivatives decay like `4^{-|l|_1}`, which
//! yields the explicit sup-norm bound implemented in [`error_bound`].

use std::collections::{BTreeMap, HashMap};

use crate::error::{Error, Result};

/// Hard cap on any single level component.
pub const LEVEL_CAP: u32 = 30;

/// Evaluate the unit hat `(1 - |x|)_+`.
#[inline]
pub fn hat_eval(x: f64) -> f64 {
    let v = 1.0 - x.abs();
    if v > 0.0 {
        v
    } else {
        0.0
    }
}

/// A level/position pair addressing one basis function.
///
/// Invariants (checked by [`LevelIndex::new`]): `level` and `position` have
/// equal, positive length; `1 <= level[j] <= LEVEL_CAP`; `position[j]` is odd
/// and `1 <= position[j] <= 2^level[j] - 1`.
///
/// The ordering is lexicographic in `(|l|_1, l, i)`, which makes
/// enumerations and coefficient listings deterministic.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LevelIndex {
    level: Vec<u32>,
    position: Vec<u64>,
}

impl LevelIndex {
    /// Build a validated index.
    pub fn new(level: Vec<u32>, position: Vec<u64>) -> Result<Self> {
        if level.is_empty() || level.len() != position.len() {
            return Err(Error::BadIndex(format!(
                "level has {} entries, position has {}",
                level.len(),
                position.len()
            )));
        }
        for (j, (&l, &i)) in level.iter().zip(&position).enumerate() {
            if l == 0 || l > LEVEL_CAP {
                return Err(Error::BadIndex(format!(
                    "level[{j}] = {l} outside 1..={LEVEL_CAP}"
                )));
            }
            if i % 2 == 0 || i > (1u64 << l) - 1 {
                return Err(Error::BadIndex(format!(
                    "position[{j}] = {i} is not an odd integer in 1..=2^{l}-1"
                )));
            }
        }
        Ok(Self { level, position })
    }

    /// Level vector `l`.
    pub fn level(&self) -> &[u32] {
        &self.level
    }

    /// Position vector `i`.
    pub fn position(&self) -> &[u64] {
        &self.position
    }

    /// Spatial dimension.
    pub fn dim(&self) -> usize {
        self.level.len()
    }

    /// `|l|_1`.
    pub fn level_sum(&self) -> u32 {
        self.level.iter().sum()
    }

    /// Grid node `i / 2^l` addressed by this index.
    pub fn node(&self) -> Vec<f64> {
        self.level
            .iter()
            .zip(&self.position)
            .map(|(&l, &i)| i as f64 / (1u64 << l) as f64)
            .collect()
    }
}

impl PartialOrd for LevelIndex {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for LevelIndex {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.level_sum(), &self.level, &self.position).cmp(&(
            other.level_sum(),
            &other.level,
            &other.position,
        ))
    }
}

impl std::fmt::Display for LevelIndex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "l={:?} i={:?}", self.level, self.position)
    }
}

/// Evaluate `phi_{l,i}(x)`, the tensor-product hat addressed by `li`.
pub fn basis_eval(li: &LevelIndex, x: &[f64]) -> f64 {
    assert_eq!(li.dim(), x.len(), "point dimension mismatch");
    let mut prod = 1.0;
    for ((&l, &i), &xj) in li.level.iter().zip(&li.position).zip(x) {
        prod *= hat_eval((1u64 << l) as f64 * xj - i as f64);
        if prod == 0.0 {
            return 0.0;
        }
    }
    prod
}

fn check_dim_level(d: usize, n: u32) -> Result<()> {
    if d == 0 {
        return Err(Error::ZeroDimension);
    }
    if n == 0 {
        return Err(Error::ZeroLevel);
    }
    Ok(())
}

/// Binomial coefficient with overflow detection.
pub(crate) fn binom(a: u64, b: u64) -> Option<u128> {
    if b > a {
        return Some(0);
    }
    let b = b.min(a - b);
    let mut c: u128 = 1;
    for k in 1..=b {
        c = c.checked_mul((a - b + k) as u128)?;
        c /= k as u128;
    }
    Some(c)
}

/// Enumerate the sparse index set `{(l, i) : |l|_1 <= n + d - 1}` for
/// dimension `d` and budget `n`, sorted lexicographically in `(|l|_1, l, i)`.
pub fn enumerate_indices(d: usize, n: u32) -> Result<Vec<LevelIndex>> {
    check_dim_level(d, n)?;
    if n > LEVEL_CAP {
        return Err(Error::LevelCapExceeded { cap: LEVEL_CAP });
    }
    let max_sum = n + d as u32 - 1;
    let expected = count_indices(d, n)?;
    let mut out = Vec::with_capacity(expected.min(1 << 26) as usize);

    // Level vectors grouped by total, each group in lexicographic order,
    // positions in lexicographic order: the output is sorted by construction.
    let mut level = vec![1u32; d];
    for total in d as u32..=max_sum {
        fill_levels(&mut level, 0, total, &mut out);
    }

    debug_assert!(out.windows(2).all(|w| w[0] < w[1]));
    debug_assert_eq!(out.len() as u64, expected);
    Ok(out)
}

/// Recursively assign `level[j..]` summing to `remaining`, then emit all odd
/// positions for the completed level vector.
fn fill_levels(level: &mut Vec<u32>, j: usize, remaining: u32, out: &mut Vec<LevelIndex>) {
    let d = level.len();
    let tail = (d - j - 1) as u32;
    if j == d - 1 {
        level[j] = remaining;
        emit_positions(level, out);
        return;
    }
    for lj in 1..=remaining - tail {
        level[j] = lj;
        fill_levels(level, j + 1, remaining - lj, out);
    }
}

fn emit_positions(level: &[u32], out: &mut Vec<LevelIndex>) {
    let d = level.len();
    let mut position = vec![1u64; d];
    loop {
        out.push(LevelIndex {
            level: level.to_vec(),
            position: position.clone(),
        });
        // Odometer over odd positions, last coordinate fastest.
        let mut j = d;
        loop {
            if j == 0 {
                return;
            }
            j -= 1;
            position[j] += 2;
            if position[j] < (1u64 << level[j]) {
                break;
            }
            position[j] = 1;
        }
    }
}

/// Size of the sparse index set: `sum_{k=0}^{n-1} 2^k C(d-1+k, d-1)`.
pub fn count_indices(d: usize, n: u32) -> Result<u64> {
    check_dim_level(d, n)?;
    let overflow = || Error::CountOverflow { dim: d, level: n };
    let mut total: u128 = 0;
    for k in 0..n as u64 {
        let c = binom(d as u64 - 1 + k, d as u64 - 1).ok_or_else(overflow)?;
        let term = c.checked_mul(1u128 << k).ok_or_else(overflow)?;
        total = total.checked_add(term).ok_or_else(overflow)?;
    }
    u64::try_from(total).map_err(|_| overflow())
}

/// Combinatorial factor `sum_{k=0}^{d-1} C(n+d-1, k)` appearing in the
/// interpolation error bound.
pub fn error_bound_profile(d: usize, n: u32) -> Result<u64> {
    check_dim_level(d, n)?;
    let overflow = || Error::CountOverflow { dim: d, level: n };
    let mut total: u128 = 0;
    for k in 0..d as u64 {
        let c = binom(n as u64 + d as u64 - 1, k).ok_or_else(overflow)?;
        total = total.checked_add(c).ok_or_else(overflow)?;
    }
    u64::try_from(total).map_err(|_| overflow())
}

/// A-priori sup-norm bound for interpolation of a function whose second
/// mixed derivatives are bounded by `seminorm`:
/// `(2 * seminorm / 8^d) * 4^{-n} * error_bound_profile(d, n)`.
pub fn error_bound(d: usize, n: u32, seminorm: f64) -> Result<f64> {
    if !(seminorm >= 0.0) || !seminorm.is_finite() {
        return Err(Error::BadParameter {
            name: "seminorm",
            value: seminorm,
            range: "[0, inf)",
        });
    }
    let profile = error_bound_profile(d, n)? as f64;
    Ok(2.0 * seminorm / 8f64.powi(d as i32) * 0.25f64.powi(n as i32) * profile)
}

/// Target accuracy paired with the seminorm of the function it applies to.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ErrorBudget {
    eps: f64,
    seminorm: f64,
}

impl ErrorBudget {
    /// Build a budget; both entries must be finite and positive.
    pub fn new(eps: f64, seminorm: f64) -> Result<Self> {
        if !(eps > 0.0) || !eps.is_finite() {
            return Err(Error::BadParameter {
                name: "eps",
                value: eps,
                range: "(0, inf)",
            });
        }
        if !(seminorm > 0.0) || !seminorm.is_finite() {
            return Err(Error::BadParameter {
                name: "seminorm",
                value: seminorm,
                range: "(0, inf)",
            });
        }
        Ok(Self { eps, seminorm })
    }

    /// Requested accuracy.
    pub fn eps(&self) -> f64 {
        self.eps
    }

    /// Seminorm of the target function.
    pub fn seminorm(&self) -> f64 {
        self.seminorm
    }

    /// Normalized accuracy `eps / (2 * seminorm)`.
    pub fn eps_tilde(&self) -> f64 {
        self.eps / (2.0 * self.seminorm)
    }
}

/// Smallest budget `n` whose a-priori bound does not exceed `eps / 2`,
/// found by linear scan from 1; errors out past [`LEVEL_CAP`].
pub fn select_level(d: usize, budget: &ErrorBudget) -> Result<u32> {
    select_level_for(d, budget.eps(), budget.seminorm())
}

/// [`select_level`] on raw numbers; `seminorm = 0` admits every level and
/// returns 1.
pub fn select_level_for(d: usize, eps: f64, seminorm: f64) -> Result<u32> {
    if d == 0 {
        return Err(Error::ZeroDimension);
    }
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::BadParameter {
            name: "eps",
            value: eps,
            range: "(0, inf)",
        });
    }
    for n in 1..=LEVEL_CAP {
        if error_bound(d, n, seminorm)? <= eps / 2.0 {
            return Ok(n);
        }
    }
    Err(Error::LevelCapExceeded { cap: LEVEL_CAP })
}

/// One level vector with all its coefficients, positions sorted.
struct LevelGroup {
    level: Vec<u32>,
    scale: Vec<f64>,
    coeffs: BTreeMap<Vec<u64>, f64>,
}

/// A sparse-grid interpolant: hierarchical coefficients over the index set
/// of a given dimension and budget.
///
/// Coefficients are stored grouped by level vector; within the cube, at most
/// one basis function per level vector is nonzero at any point, so
/// evaluation costs one lookup per level vector.
pub struct SparseGridInterpolant {
    dimension: usize,
    budget: u32,
    groups: Vec<LevelGroup>,
    len: u64,
    boundary_vanishing: bool,
}

impl SparseGridInterpolant {
    /// Spatial dimension.
    pub fn dimension(&self) -> usize {
        self.dimension
    }

    /// Budget `n` the index set was built with.
    pub fn budget(&self) -> u32 {
        self.budget
    }

    /// Number of coefficients; equals `count_indices(dimension, budget)`.
    pub fn len(&self) -> u64 {
        self.len
    }

    /// True if the set is empty (never, for valid inputs).
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// False if the interpolated function was observed nonzero on sampled
    /// boundary points; such functions are accepted but approximated as if
    /// they vanished there.
    pub fn boundary_vanishing(&self) -> bool {
        self.boundary_vanishing
    }

    /// Coefficient for one index, if it is in the set.
    pub fn coefficient(&self, li: &LevelIndex) -> Option<f64> {
        self.groups
            .iter()
            .find(|g| g.level == li.level)
            .and_then(|g| g.coeffs.get(li.position.as_slice()).copied())
    }

    /// Iterate `(index, coefficient)` in the canonical `(|l|_1, l, i)` order.
    pub fn coefficients(&self) -> impl Iterator<Item = (LevelIndex, f64)> + '_ {
        self.groups.iter().flat_map(|g| {
            g.coeffs.iter().map(move |(pos, &v)| {
                (
                    LevelIndex {
                        level: g.level.clone(),
                        position: pos.clone(),
                    },
                    v,
                )
            })
        })
    }

    /// Sum of absolute coefficients.
    pub fn sum_abs(&self) -> f64 {
        self.groups
            .iter()
            .flat_map(|g| g.coeffs.values())
            .map(|v| v.abs())
            .sum()
    }

    /// Evaluate the interpolant at `x` (length must equal the dimension).
    ///
    /// Per level vector the unique candidate position is located directly,
    /// so the cost is proportional to the number of level vectors, not to
    /// the number of coefficients.
    pub fn eval(&self, x: &[f64]) -> f64 {
        assert_eq!(x.len(), self.dimension, "point dimension mismatch");
        let mut scratch = vec![0u64; self.dimension];
        let mut total = 0.0;
        for g in &self.groups {
            let mut factor = 1.0;
            for j in 0..self.dimension {
                let y = g.scale[j] * x[j];
                let cap = (g.scale[j] as u64) - 1;
                let i = (2.0 * (y / 2.0).floor() + 1.0).clamp(1.0, cap as f64) as u64;
                factor *= hat_eval(y - i as f64);
                if factor == 0.0 {
                    break;
                }
                scratch[j] = i;
            }
            if factor == 0.0 {
                continue;
            }
            if let Some(&v) = g.coeffs.get(scratch.as_slice()) {
                total += v * factor;
            }
        }
        total
    }
}

/// Reduce the even-position neighbor `k / 2^l` to its canonical grid index;
/// `None` marks a boundary point of the cube.
fn ancestor(l: u32, k: u64) -> Option<(u32, u64)> {
    let mut l = l;
    let mut k = k;
    while k.is_multiple_of(2) {
        if k == 0 {
            return None;
        }
        k /= 2;
        l -= 1;
        if l == 0 {
            return None;
        }
    }
    if l == 0 {
        None
    } else {
        Some((l, k))
    }
}

/// Sample `f` on face centers and corners; true if all values vanish.
fn samples_vanish_on_boundary<F: Fn(&[f64]) -> f64>(f: &F, d: usize) -> bool {
    let mut x = vec![0.5; d];
    for j in 0..d {
        for v in [0.0, 1.0] {
            x[j] = v;
            if f(&x).abs() > 1e-12 {
                return false;
            }
        }
        x[j] = 0.5;
    }
    if d <= 10 {
        for mask in 0u32..(1 << d) {
            for (j, xj) in x.iter_mut().enumerate() {
                *xj = if mask >> j & 1 == 1 { 1.0 } else { 0.0 };
            }
            if f(&x).abs() > 1e-12 {
                return false;
            }
        }
    }
    true
}

/// Interpolate `f` on the sparse grid of dimension `d` and budget `n` by
/// hierarchization: one parent-averaging stencil sweep per coordinate.
///
/// `f` is read only at grid nodes plus a few boundary samples. Boundary
/// values are treated as zero; functions observed nonzero there are flagged
/// via [`SparseGridInterpolant::boundary_vanishing`].
pub fn hierarchize_hat<F: Fn(&[f64]) -> f64>(
    f: F,
    d: usize,
    n: u32,
) -> Result<SparseGridInterpolant> {
    let indices = enumerate_indices(d, n)?;
    let boundary_vanishing = samples_vanish_on_boundary(&f, d);

    let mut values: HashMap<(Vec<u32>, Vec<u64>), f64> = HashMap::with_capacity(indices.len());
    for li in &indices {
        values.insert((li.level.clone(), li.position.clone()), f(&li.node()));
    }

    for j in 0..d {
        let prev = values;
        values = HashMap::with_capacity(prev.len());
        for ((level, position), &v) in &prev {
            let mut acc = v;
            for side in [position[j] - 1, position[j] + 1] {
                if let Some((la, ia)) = ancestor(level[j], side) {
                    let mut lk = level.clone();
                    let mut ik = position.clone();
                    lk[j] = la;
                    ik[j] = ia;
                    let parent = prev
                        .get(&(lk, ik))
                        .expect("hierarchical parent must be a grid point");
                    acc -= 0.5 * parent;
                }
            }
            values.insert((level.clone(), position.clone()), acc);
        }
    }

    let mut groups: Vec<LevelGroup> = Vec::new();
    for li in &indices {
        let v = values[&(li.level.clone(), li.position.clone())];
        match groups.last_mut() {
            Some(g) if g.level == li.level => {
                g.coeffs.insert(li.position.clone(), v);
            }
            _ => {
                let scale = li.level.iter().map(|&l| (1u64 << l) as f64).collect();
                let mut coeffs = BTreeMap::new();
                coeffs.insert(li.position.clone(), v);
                groups.push(LevelGroup {
                    level: li.level.clone(),
                    scale,
                    coeffs,
                });
            }
        }
    }

    Ok(SparseGridInterpolant {
        dimension: d,
        budget: n,
        groups,
        len: indices.len() as u64,
        boundary_vanishing,
    })
}

/// One row of a coefficient-decay check.
#[derive(Clone, Debug)]
pub struct CoeffBoundEntry {
    pub index: LevelIndex,
    pub surplus: f64,
    pub bound: f64,
    pub ok: bool,
}

/// Result of [`coeff_bound_check`].
#[derive(Clone, Debug)]
pub struct CoeffBoundReport {
    pub entries: Vec<CoeffBoundEntry>,
    pub sum_abs: f64,
    pub sum_bound: f64,
    pub sum_ok: bool,
    pub all_ok: bool,
}

/// Check every coefficient against the decay bound
/// `|v_{l,i}| <= 2^{-d} * 2^{-2|l|_1} * seminorm` and the absolute sum
/// against `seminorm`. Comparisons carry a 1e-12 absolute slack because the
/// bound is attained exactly by polynomial products.
pub fn coeff_bound_check(g: &SparseGridInterpolant, seminorm: f64) -> CoeffBoundReport {
    const SLACK: f64 = 1e-12;
    let d = g.dimension() as i32;
    let mut entries = Vec::with_capacity(g.len() as usize);
    let mut sum_abs = 0.0;
    let mut all_ok = true;
    for (index, surplus) in g.coefficients() {
        let bound = 0.5f64.powi(d) * 0.25f64.powi(index.level_sum() as i32) * seminorm;
        let ok = surplus.abs() <= bound + SLACK;
        all_ok &= ok;
        sum_abs += surplus.abs();
        entries.push(CoeffBoundEntry {
            index,
            surplus,
            bound,
            ok,
        });
    }
    let sum_ok = sum_abs <= seminorm + SLACK;
    CoeffBoundReport {
        entries,
        sum_abs,
        sum_bound: seminorm,
        sum_ok,
        all_ok,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn li(level: &[u32], position: &[u64]) -> LevelIndex {
        LevelIndex::new(level.to_vec(), position.to_vec()).unwrap()
    }

    fn product_poly(x: &[f64]) -> f64 {
        x.iter().map(|&t| 4.0 * t * (1.0 - t)).product()
    }

    fn product_sine(x: &[f64]) -> f64 {
        x.iter().map(|&t| (std::f64::consts::PI * t).sin()).product()
    }

    /// Dense interpolation-system oracle: solve for coefficients directly
    /// with Gaussian elimination instead of stencil sweeps.
    fn oracle_coefficients<F: Fn(&[f64]) -> f64>(f: F, d: usize, n: u32) -> Vec<f64> {
        let indices = enumerate_indices(d, n).unwrap();
        let m = indices.len();
        let mut a = vec![vec![0.0f64; m]; m];
        let mut rhs = vec![0.0f64; m];
        for (r, row_idx) in indices.iter().enumerate() {
            let node = row_idx.node();
            for (c, col_idx) in indices.iter().enumerate() {
                a[r][c] = basis_eval(col_idx, &node);
            }
            rhs[r] = f(&node);
        }
        solve_dense(a, rhs)
    }

    /// Gaussian elimination with partial pivoting (test-only).
    #[allow(clippy::needless_range_loop)]
    fn solve_dense(mut a: Vec<Vec<f64>>, mut rhs: Vec<f64>) -> Vec<f64> {
        let m = rhs.len();
        for col in 0..m {
            let pivot = (col..m)
                .max_by(|&r, &s| a[r][col].abs().total_cmp(&a[s][col].abs()))
                .unwrap();
            a.swap(col, pivot);
            rhs.swap(col, pivot);
            assert!(a[col][col].abs() > 1e-14, "singular interpolation system");
            for row in col + 1..m {
                let factor = a[row][col] / a[col][col];
                if factor == 0.0 {
                    continue;
                }
                for k in col..m {
                    a[row][k] -= factor * a[col][k];
                }
                rhs[row] -= factor * rhs[col];
            }
        }
        let mut x = vec![0.0; m];
        for row in (0..m).rev() {
            let mut acc = rhs[row];
            for k in row + 1..m {
                acc -= a[row][k] * x[k];
            }
            x[row] = acc / a[row][row];
        }
        x
    }

    #[test]
    fn hat_values() {
        assert_eq!(hat_eval(0.0), 1.0);
        assert_eq!(hat_eval(1.0), 0.0);
        assert_eq!(hat_eval(-1.0), 0.0);
        assert_eq!(hat_eval(1.5), 0.0);
        assert_eq!(hat_eval(-2.5), 0.0);
        assert_eq!(hat_eval(0.25), 0.75);
        assert_eq!(hat_eval(-0.25), 0.75);
    }

    #[test]
    fn basis_values() {
        assert_eq!(basis_eval(&li(&[2], &[1]), &[0.375]), 0.5);
        assert_eq!(basis_eval(&li(&[1], &[1]), &[0.375]), 0.75);
        assert_eq!(basis_eval(&li(&[1, 2], &[1, 3]), &[0.5, 0.75]), 1.0);
        assert_eq!(basis_eval(&li(&[1, 2], &[1, 3]), &[0.25, 0.875]), 0.25);
        assert_eq!(basis_eval(&li(&[1, 1], &[1, 1]), &[0.5, 0.0]), 0.0);
    }

    #[test]
    fn index_validation() {
        assert!(LevelIndex::new(vec![], vec![]).is_err());
        assert!(LevelIndex::new(vec![1, 1], vec![1]).is_err());
        assert!(LevelIndex::new(vec![0], vec![1]).is_err());
        assert!(LevelIndex::new(vec![31], vec![1]).is_err());
        assert!(LevelIndex::new(vec![2], vec![2]).is_err());
        assert!(LevelIndex::new(vec![2], vec![5]).is_err());
        assert!(LevelIndex::new(vec![2], vec![3]).is_ok());
    }

    #[test]
    fn enumerate_smallest() {
        let got = enumerate_indices(1, 2).unwrap();
        let want = vec![li(&[1], &[1]), li(&[2], &[1]), li(&[2], &[3])];
        assert_eq!(got, want);
    }

    #[test]
    fn enumerate_rejects_degenerate() {
        assert!(matches!(enumerate_indices(0, 3), Err(Error::ZeroDimension)));
        assert!(matches!(enumerate_indices(2, 0), Err(Error::ZeroLevel)));
        assert!(count_indices(0, 3).is_err());
        assert!(count_indices(2, 0).is_err());
    }

    #[test]
    fn enumerate_is_sorted_and_counted() {
        for (d, n) in [(1, 6), (2, 5), (3, 4), (4, 3)] {
            let set = enumerate_indices(d, n).unwrap();
            assert_eq!(set.len() as u64, count_indices(d, n).unwrap());
            let mut sorted = set.clone();
            sorted.sort();
            assert_eq!(set, sorted);
            sorted.dedup();
            assert_eq!(set.len(), sorted.len());
            for idx in &set {
                assert!(idx.level_sum() < n + d as u32);
            }
        }
    }

    #[test]
    fn count_values() {
        assert_eq!(count_indices(2, 3).unwrap(), 17);
        assert_eq!(count_indices(1, 5).unwrap(), 31);
        assert_eq!(count_indices(5, 1).unwrap(), 1);
        assert_eq!(count_indices(2, 4).unwrap(), 49);
        assert_eq!(count_indices(3, 8).unwrap(), 7423);
    }

    #[test]
    fn count_overflow_detected() {
        assert!(matches!(
            count_indices(20, 30),
            Err(Error::CountOverflow { .. })
        ));
    }

    #[test]
    fn profile_values() {
        // d=2: C(n+1,0) + C(n+1,1) = n + 2.
        for n in 1..=8 {
            assert_eq!(error_bound_profile(2, n).unwrap(), n as u64 + 2);
        }
        assert_eq!(error_bound_profile(1, 7).unwrap(), 1);
        // d=3, n=3: C(5,0)+C(5,1)+C(5,2) = 1+5+10.
        assert_eq!(error_bound_profile(3, 3).unwrap(), 16);
    }

    #[test]
    fn error_bound_values() {
        let s = 3.7;
        let got = error_bound(2, 3, s).unwrap();
        assert!((got - 5.0 * s / 2048.0).abs() < 1e-15);
        for n in 1..=6 {
            let got = error_bound(1, n, s).unwrap();
            assert!((got - s / 4.0 * 0.25f64.powi(n as i32)).abs() < 1e-15);
        }
        assert_eq!(error_bound(3, 2, 0.0).unwrap(), 0.0);
        assert!(error_bound(2, 3, f64::NAN).is_err());
    }

    #[test]
    fn budget_and_level_selection() {
        let b = ErrorBudget::new(0.5, 2.0).unwrap();
        assert_eq!(b.eps_tilde(), 0.125);
        assert_eq!(select_level(1, &b).unwrap(), 1);
        let b = ErrorBudget::new(0.03125, 2.0).unwrap();
        assert_eq!(select_level(1, &b).unwrap(), 3);
        assert!(ErrorBudget::new(0.0, 1.0).is_err());
        assert!(ErrorBudget::new(0.1, 0.0).is_err());
        assert!(matches!(
            select_level_for(1, 1e-30, 1.0),
            Err(Error::LevelCapExceeded { cap: LEVEL_CAP })
        ));
        assert_eq!(select_level_for(3, 0.1, 0.0).unwrap(), 1);
    }

    #[test]
    fn hierarchize_parabola_exact_coefficients() {
        let g = hierarchize_hat(|x| x[0] * (1.0 - x[0]), 1, 2).unwrap();
        assert_eq!(g.len(), 3);
        assert!(g.boundary_vanishing());
        assert_eq!(g.coefficient(&li(&[1], &[1])).unwrap(), 0.25);
        assert_eq!(g.coefficient(&li(&[2], &[1])).unwrap(), 0.0625);
        assert_eq!(g.coefficient(&li(&[2], &[3])).unwrap(), 0.0625);
        assert_eq!(g.eval(&[0.25]), 0.1875);
        assert_eq!(g.eval(&[0.5]), 0.25);
    }

    #[test]
    fn hierarchize_matches_dense_solve() {
        let cases: Vec<(usize, u32)> = vec![(1, 3), (2, 2), (2, 3), (3, 2)];
        for (d, n) in cases {
            for f in [product_poly as fn(&[f64]) -> f64, product_sine] {
                let g = hierarchize_hat(f, d, n).unwrap();
                let oracle = oracle_coefficients(f, d, n);
                for ((_, got), want) in g.coefficients().zip(&oracle) {
                    assert!(
                        (got - want).abs() <= 1e-10,
                        "d={d} n={n}: {got} vs {want}"
                    );
                }
            }
        }
    }

    #[test]
    fn interpolant_matches_target_at_nodes() {
        for (d, n) in [(1, 4), (2, 3), (3, 2)] {
            let g = hierarchize_hat(product_sine, d, n).unwrap();
            for idx in enumerate_indices(d, n).unwrap() {
                let node = idx.node();
                assert!(
                    (g.eval(&node) - product_sine(&node)).abs() <= 1e-12,
                    "node mismatch at {idx}"
                );
            }
        }
    }

    #[test]
    fn eval_outside_cube_is_zero() {
        let g = hierarchize_hat(product_poly, 2, 3).unwrap();
        assert_eq!(g.eval(&[-0.2, 0.5]), 0.0);
        assert_eq!(g.eval(&[0.5, 1.0]), 0.0);
    }

    #[test]
    fn boundary_flag_for_nonvanishing_target() {
        let g = hierarchize_hat(|_| 1.0, 2, 2).unwrap();
        assert!(!g.boundary_vanishing());
    }

    #[test]
    fn coefficient_listing_is_canonical() {
        let g = hierarchize_hat(product_poly, 2, 3).unwrap();
        let listed: Vec<LevelIndex> = g.coefficients().map(|(i, _)| i).collect();
        let expected = enumerate_indices(2, 3).unwrap();
        assert_eq!(listed, expected);
    }

    #[test]
    fn coeff_bounds_tight_for_parabola() {
        let g = hierarchize_hat(|x| x[0] * (1.0 - x[0]), 1, 2).unwrap();
        let report = coeff_bound_check(&g, 2.0);
        assert!(report.all_ok);
        assert!(report.sum_ok);
        assert_eq!(report.entries[0].bound, 0.25);
        assert_eq!(report.entries[0].surplus, 0.25);
        assert_eq!(report.entries[1].bound, 0.0625);
        assert!((report.sum_abs - 0.375).abs() < 1e-15);
    }

    #[test]
    fn coeff_bounds_hold_in_higher_dimension() {
        let g = hierarchize_hat(product_poly, 2, 4).unwrap();
        let report = coeff_bound_check(&g, 64.0);
        assert!(report.all_ok);
        assert!(report.sum_ok);
        let g = hierarchize_hat(product_sine, 3, 3).unwrap();
        let s = std::f64::consts::PI.powi(6);
        let report = coeff_bound_check(&g, s);
        assert!(report.all_ok);
        assert!(report.sum_ok);
    }

    #[test]
    fn ancestor_reduction() {
        assert_eq!(ancestor(1, 0), None);
        assert_eq!(ancestor(1, 2), None);
        assert_eq!(ancestor(2, 2), Some((1, 1)));
        assert_eq!(ancestor(2, 4), None);
        assert_eq!(ancestor(3, 6), Some((2, 3)));
        assert_eq!(ancestor(3, 4), Some((1, 1)));
        assert_eq!(ancestor(3, 8), None);
    }
}
