//! An interpolating refinable mother function on dyadic grids.
//!
//! The mother function is pinned down by two properties: it interpolates
//! the Kronecker delta on the integers, and its values on each finer dyadic
//! grid follow from the previous grid by cubic midpoint insertion
//!
//! ```text
//! u(t) = (9/16) (u(t - h) + u(t + h)) - (1/16) (u(t - 3h) + u(t + 3h)),
//! ```
//!
//! where `h` is the fine step. The rule reproduces cubics exactly, and the
//! limit function is supported on `[-3, 3]`. Because the construction never
//! leaves dyadic points, the function is represented here as a value table
//! per depth rather than in closed form.
//!
//! The same four coefficients give a five-point stencil that reads
//! hierarchical coefficients off a function expanded in dilates and
//! translates of the mother function: at level `l`, odd position `i`,
//!
//! ```text
//! I(u)_{l,i} = u(i/2^l) - (9/16)(u((i-1)/2^l) + u((i+1)/2^l))
//!                       + (1/16)(u((i-3)/2^l) + u((i+3)/2^l)).
//! ```
//!
//! The stencil reads `u` outside `[0, 1]` (offsets reach `(i ± 3)/2^l`), so
//! it takes an evaluator defined on all of `R^d`. Clamping a function to
//! zero outside the cube silently breaks the extraction identity near the
//! boundary; use [`zero_extended`] only for functions that genuinely vanish
//! outside.

use crate::error::{Error, Result};

/// Hard cap on the table depth (finest grid `2^-20`).
pub const DEPTH_CAP: u32 = 20;

/// Which midpoint-insertion rule to apply.
///
/// `Cubic` is the cubic-reproducing rule quoted in the module docs.
/// `WideOuter` replaces the outer pair `t ± 3h` by `t ± 5h`; it is kept for
/// comparison and does not reproduce cubics.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RefinementRule {
    Cubic,
    WideOuter,
}

/// Values of a function on the dyadic grid `{ k / 2^depth : |k| <= 3 * 2^depth }`,
/// implicitly zero outside `[-3, 3]`.
#[derive(Clone, Debug, PartialEq)]
pub struct DyadicValueTable {
    depth: u32,
    values: Vec<f64>,
}

impl DyadicValueTable {
    /// Table at depth 0 holding the Kronecker delta on the integers.
    pub fn integers() -> Self {
        let mut values = vec![0.0; 7];
        values[3] = 1.0;
        Self { depth: 0, values }
    }

    /// Build a table from explicit values; `values.len()` must equal
    /// `6 * 2^depth + 1` (numerators `-3 * 2^depth ..= 3 * 2^depth`).
    pub fn from_values(depth: u32, values: Vec<f64>) -> Result<Self> {
        if depth > DEPTH_CAP {
            return Err(Error::BadParameter {
                name: "depth",
                value: depth as f64,
                range: "0..=20",
            });
        }
        let want = 6 * (1usize << depth) + 1;
        if values.len() != want {
            return Err(Error::BadPieces(format!(
                "value table at depth {depth} needs {want} entries, got {}",
                values.len()
            )));
        }
        Ok(Self { depth, values })
    }

    /// Mother-function table at the given depth (symmetric rule).
    pub fn mother(depth: u32) -> Result<Self> {
        Self::mother_with_rule(depth, RefinementRule::Cubic)
    }

    /// Mother-function table at the given depth under a chosen rule.
    pub fn mother_with_rule(depth: u32, rule: RefinementRule) -> Result<Self> {
        if depth > DEPTH_CAP {
            return Err(Error::BadParameter {
                name: "depth",
                value: depth as f64,
                range: "0..=20",
            });
        }
        let mut table = Self::integers();
        for _ in 0..depth {
            table = table.refine_with_rule(rule)?;
        }
        Ok(table)
    }

    /// Grid depth.
    pub fn depth(&self) -> u32 {
        self.depth
    }

    /// Raw values, numerator `-3 * 2^depth` first.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Value at `numerator / 2^depth`; zero outside `[-3, 3]`.
    pub fn value_at(&self, numerator: i64) -> f64 {
        let half = 3 * (1i64 << self.depth);
        if numerator < -half || numerator > half {
            0.0
        } else {
            self.values[(numerator + half) as usize]
        }
    }

    /// Value at the grid point nearest to `x`.
    pub fn eval(&self, x: f64) -> f64 {
        let numerator = (x * (1i64 << self.depth) as f64).round();
        if !numerator.is_finite() {
            return 0.0;
        }
        self.value_at(numerator as i64)
    }

    /// Insert midpoints once (symmetric rule): depth grows by one, existing
    /// grid values are carried over unchanged.
    pub fn refine(&self) -> Result<Self> {
        self.refine_with_rule(RefinementRule::Cubic)
    }

    /// Insert midpoints once under a chosen rule.
    pub fn refine_with_rule(&self, rule: RefinementRule) -> Result<Self> {
        if self.depth >= DEPTH_CAP {
            return Err(Error::BadParameter {
                name: "depth",
                value: (self.depth + 1) as f64,
                range: "0..=20",
            });
        }
        let depth = self.depth + 1;
        let half = 3 * (1i64 << depth);
        let outer = match rule {
            RefinementRule::Cubic => 3,
            RefinementRule::WideOuter => 5,
        };
        let mut values = Vec::with_capacity((2 * half + 1) as usize);
        for q in -half..=half {
            if q % 2 == 0 {
                values.push(self.value_at(q / 2));
            } else {
                let near = self.value_at((q - 1) / 2) + self.value_at((q + 1) / 2);
                let far = self.value_at((q - outer) / 2) + self.value_at((q + outer) / 2);
                values.push(9.0 / 16.0 * near - far / 16.0);
            }
        }
        Ok(Self { depth, values })
    }
}

/// Mother-function value at the dyadic point nearest to `x`, from a fresh
/// table of the given depth. For bulk evaluation build one
/// [`DyadicValueTable`] and reuse it.
pub fn interpolet_eval(x: f64, depth: u32) -> Result<f64> {
    Ok(DyadicValueTable::mother(depth)?.eval(x))
}

/// Offsets of the coefficient-extraction stencil, in units of `2^-l`.
pub const STENCIL_OFFSETS: [i64; 5] = [-3, -1, 0, 1, 3];

/// Weights of the coefficient-extraction stencil, matching
/// [`STENCIL_OFFSETS`].
pub const STENCIL_WEIGHTS: [f64; 5] = [
    1.0 / 16.0,
    -9.0 / 16.0,
    1.0,
    -9.0 / 16.0,
    1.0 / 16.0,
];

/// Apply the one-dimensional extraction stencil to `u` at level `l`, odd
/// position `i`. `u` must be defined on all of `R`.
pub fn stencil_apply_1d<F: Fn(f64) -> f64>(u: F, l: u32, i: u64) -> f64 {
    let scale = (1u64 << l) as f64;
    let mut acc = 0.0;
    for (o, w) in STENCIL_OFFSETS.iter().zip(&STENCIL_WEIGHTS) {
        acc += w * u((i as i64 + o) as f64 / scale);
    }
    acc
}

/// Apply the tensorized extraction stencil (`5^d` evaluations) to `u` at
/// level vector `level`, position vector `position`. `u` must be defined on
/// all of `R^d`.
pub fn stencil_apply<F: Fn(&[f64]) -> f64>(u: F, level: &[u32], position: &[u64]) -> f64 {
    assert_eq!(level.len(), position.len(), "level/position length mismatch");
    let d = level.len();
    let mut pick = vec![0usize; d];
    let mut point = vec![0.0f64; d];
    let mut acc = 0.0;
    loop {
        let mut weight = 1.0;
        for j in 0..d {
            weight *= STENCIL_WEIGHTS[pick[j]];
            point[j] =
                (position[j] as i64 + STENCIL_OFFSETS[pick[j]]) as f64 / (1u64 << level[j]) as f64;
        }
        acc += weight * u(&point);
        let mut j = d;
        loop {
            if j == 0 {
                return acc;
            }
            j -= 1;
            pick[j] += 1;
            if pick[j] < STENCIL_OFFSETS.len() {
                break;
            }
            pick[j] = 0;
        }
    }
}

/// Extend a function given on the unit cube by zero. Only valid as a stencil
/// input for functions that genuinely vanish outside the cube.
pub fn zero_extended<F: Fn(&[f64]) -> f64>(f: F, d: usize) -> impl Fn(&[f64]) -> f64 {
    move |x: &[f64]| {
        debug_assert_eq!(x.len(), d);
        if x.iter().any(|&t| !(0.0..=1.0).contains(&t)) {
            0.0
        } else {
            f(x)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hierarchy::enumerate_indices;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn integer_table_is_delta() {
        let t = DyadicValueTable::integers();
        for k in -3..=3 {
            let want = if k == 0 { 1.0 } else { 0.0 };
            assert_eq!(t.value_at(k), want);
        }
        assert_eq!(t.value_at(4), 0.0);
        assert_eq!(t.value_at(-17), 0.0);
    }

    #[test]
    fn first_refinement_values() {
        let t = DyadicValueTable::mother(1).unwrap();
        assert_eq!(t.values().len(), 13);
        assert_eq!(t.value_at(0), 1.0);
        assert_eq!(t.value_at(1), 9.0 / 16.0);
        assert_eq!(t.value_at(-1), 9.0 / 16.0);
        assert_eq!(t.value_at(2), 0.0);
        assert_eq!(t.value_at(3), -1.0 / 16.0);
        assert_eq!(t.value_at(-3), -1.0 / 16.0);
        assert_eq!(t.value_at(5), 0.0);
    }

    #[test]
    fn second_refinement_value() {
        let t = DyadicValueTable::mother(2).unwrap();
        assert_eq!(t.value_at(1), 27.0 / 32.0);
        assert_eq!(t.value_at(-1), 27.0 / 32.0);
    }

    #[test]
    fn refinement_preserves_existing_values() {
        let coarse = DyadicValueTable::mother(2).unwrap();
        let fine = coarse.refine().unwrap();
        for k in -12..=12i64 {
            assert_eq!(fine.value_at(2 * k), coarse.value_at(k));
        }
    }

    #[test]
    fn cubic_rule_reproduces_cubics() {
        let p = |x: f64| x * x * x - 2.0 * x * x + 0.5 * x - 1.0;
        let values: Vec<f64> = (-3..=3).map(|k| p(k as f64)).collect();
        let t = DyadicValueTable::from_values(0, values).unwrap();
        let fine = t.refine().unwrap();
        for q in [-3i64, -1, 1, 3] {
            let x = q as f64 / 2.0;
            assert!(
                (fine.value_at(q) - p(x)).abs() < 1e-12,
                "midpoint {x} off: {} vs {}",
                fine.value_at(q),
                p(x)
            );
        }
    }

    #[test]
    fn wide_rule_differs_from_cubic() {
        let t = DyadicValueTable::mother_with_rule(1, RefinementRule::WideOuter).unwrap();
        assert_eq!(t.value_at(1), 9.0 / 16.0);
        assert_eq!(t.value_at(3), 0.0);
        assert_eq!(t.value_at(5), -1.0 / 16.0);
    }

    #[test]
    fn eval_snaps_to_nearest_grid_point() {
        let t = DyadicValueTable::mother(1).unwrap();
        assert_eq!(t.eval(0.3), 9.0 / 16.0);
        assert_eq!(t.eval(0.2), 1.0);
        assert_eq!(t.eval(-0.3), 9.0 / 16.0);
        assert_eq!(t.eval(3.6), 0.0);
        assert_eq!(t.eval(f64::INFINITY), 0.0);
    }

    #[test]
    fn eval_helper_and_depth_cap() {
        assert_eq!(interpolet_eval(0.5, 1).unwrap(), 9.0 / 16.0);
        assert_eq!(interpolet_eval(0.0, 12).unwrap(), 1.0);
        assert!(interpolet_eval(0.5, 21).is_err());
        assert!(DyadicValueTable::mother(20).is_ok_and(|t| t.refine().is_err()));
    }

    #[test]
    fn stencil_annihilates_low_degree_polynomials() {
        for (l, i) in [(1u32, 1u64), (2, 1), (2, 3), (3, 5)] {
            for p in [
                |_: f64| 1.0,
                |x: f64| x,
                |x: f64| x * x - 0.3 * x,
                |x: f64| x * x * x + x,
            ] {
                assert!(stencil_apply_1d(p, l, i).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn stencil_center_weight_is_one() {
        let delta_half = |x: f64| if x == 0.5 { 1.0 } else { 0.0 };
        assert_eq!(stencil_apply_1d(delta_half, 1, 1), 1.0);
    }

    /// Expansion in dilated/translated mother functions, evaluated exactly
    /// on dyadic arguments through a deep table.
    fn expansion<'a>(
        table: &'a DyadicValueTable,
        terms: &[(Vec<u32>, Vec<u64>, f64)],
    ) -> impl Fn(&[f64]) -> f64 + 'a {
        let terms = terms.to_vec();
        move |x: &[f64]| {
            let mut acc = 0.0;
            for (level, position, c) in &terms {
                let mut prod = *c;
                for j in 0..x.len() {
                    prod *= table.eval((1u64 << level[j]) as f64 * x[j] - position[j] as f64);
                }
                acc += prod;
            }
            acc
        }
    }

    #[test]
    fn stencil_recovers_expansion_coefficients() {
        let table = DyadicValueTable::mother(12).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for (d, n) in [(1usize, 3u32), (2, 2)] {
            let terms: Vec<(Vec<u32>, Vec<u64>, f64)> = enumerate_indices(d, n)
                .unwrap()
                .into_iter()
                .map(|li| {
                    (
                        li.level().to_vec(),
                        li.position().to_vec(),
                        rng.gen_range(-2.0..2.0),
                    )
                })
                .collect();
            let u = expansion(&table, &terms);
            for (level, position, c) in &terms {
                let got = stencil_apply(&u, level, position);
                assert!(
                    (got - c).abs() < 1e-8,
                    "d={d} level={level:?} position={position:?}: {got} vs {c}"
                );
            }
        }
    }

    #[test]
    fn zero_extension_masks_outside_points() {
        let f = zero_extended(|_| 1.0, 1);
        assert_eq!(f(&[0.5]), 1.0);
        assert_eq!(f(&[-0.1]), 0.0);
        assert_eq!(f(&[1.1]), 0.0);
    }
}
