//! Windows, typed point patterns, gridded fields and pair enumeration.

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::real::Real;

/// Axis-aligned rectangular observation window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window<T> {
    pub x0: T,
    pub y0: T,
    pub x1: T,
    pub y1: T,
}

impl<T: Real> Window<T> {
    pub fn new(x0: T, y0: T, x1: T, y1: T) -> Result<Self> {
        if !(x1 > x0 && y1 > y0) || !(x0.is_finite() && x1.is_finite() && y0.is_finite() && y1.is_finite()) {
            return invalid("window requires x1 > x0 and y1 > y0");
        }
        Ok(Self { x0, y0, x1, y1 })
    }

    pub fn unit() -> Self {
        Self { x0: T::zero(), y0: T::zero(), x1: T::one(), y1: T::one() }
    }

    pub fn width(&self) -> T {
        self.x1 - self.x0
    }

    pub fn height(&self) -> T {
        self.y1 - self.y0
    }

    pub fn area(&self) -> T {
        self.width() * self.height()
    }

    pub fn shorter_side(&self) -> T {
        self.width().min(self.height())
    }

    pub fn contains(&self, x: T, y: T) -> bool {
        x >= self.x0 && x <= self.x1 && y >= self.y0 && y <= self.y1
    }

    /// Area of `W ∩ (W + (dx, dy))`, the translation edge-correction weight.
    pub fn translated_overlap(&self, dx: T, dy: T) -> T {
        let w = (self.width() - dx.abs()).max(T::zero());
        let h = (self.height() - dy.abs()).max(T::zero());
        w * h
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point<T> {
    pub x: T,
    pub y: T,
    /// Zero-based type label.
    pub ty: usize,
}

/// A multitype point pattern. Types are `0..n_types`; the count is declared,
/// so a type may be empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointPattern<T> {
    window: Window<T>,
    n_types: usize,
    points: Vec<Point<T>>,
}

impl<T: Real> PointPattern<T> {
    pub fn new(window: Window<T>, n_types: usize, points: Vec<Point<T>>) -> Result<Self> {
        if n_types == 0 {
            return invalid("a pattern needs at least one type");
        }
        for pt in &points {
            if !window.contains(pt.x, pt.y) {
                return Err(Error::PointOutsideWindow { x: pt.x.as_f64(), y: pt.y.as_f64() });
            }
            if pt.ty >= n_types {
                return Err(Error::TypeOutOfRange { index: pt.ty, n_types });
            }
        }
        Ok(Self { window, n_types, points })
    }

    pub fn window(&self) -> &Window<T> {
        &self.window
    }

    pub fn n_types(&self) -> usize {
        self.n_types
    }

    pub fn points(&self) -> &[Point<T>] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn counts(&self) -> Vec<usize> {
        let mut c = vec![0; self.n_types];
        for pt in &self.points {
            c[pt.ty] += 1;
        }
        c
    }

    /// Points of one type, relabelled as a single-type pattern.
    pub fn of_type(&self, ty: usize) -> Result<PointPattern<T>> {
        if ty >= self.n_types {
            return Err(Error::TypeOutOfRange { index: ty, n_types: self.n_types });
        }
        let pts = self
            .points
            .iter()
            .filter(|p| p.ty == ty)
            .map(|p| Point { ty: 0, ..*p })
            .collect();
        Ok(PointPattern { window: self.window, n_types: 1, points: pts })
    }
}

/// Real-valued function on a regular grid over a window, evaluated by
/// nearest cell. Values are stored row-major: `values[iy * nx + ix]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalarField<T> {
    window: Window<T>,
    nx: usize,
    ny: usize,
    values: Vec<T>,
}

impl<T: Real> ScalarField<T> {
    pub fn new(window: Window<T>, nx: usize, ny: usize, values: Vec<T>) -> Result<Self> {
        if nx < 2 || ny < 2 {
            return invalid("field grids need at least 2 cells per axis");
        }
        if values.len() != nx * ny {
            return invalid(format!("expected {} field values, got {}", nx * ny, values.len()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return invalid("field values must be finite");
        }
        Ok(Self { window, nx, ny, values })
    }

    pub fn constant(window: Window<T>, nx: usize, ny: usize, value: T) -> Result<Self> {
        Self::new(window, nx, ny, vec![value; nx * ny])
    }

    /// Builds a field by evaluating `f` at every cell centre.
    pub fn from_fn(window: Window<T>, nx: usize, ny: usize, mut f: impl FnMut(T, T) -> T) -> Result<Self> {
        let mut values = Vec::with_capacity(nx * ny);
        let dx = window.width() / T::of(nx as f64);
        let dy = window.height() / T::of(ny as f64);
        for iy in 0..ny {
            for ix in 0..nx {
                let x = window.x0 + dx * T::of(ix as f64 + 0.5);
                let y = window.y0 + dy * T::of(iy as f64 + 0.5);
                values.push(f(x, y));
            }
        }
        Self::new(window, nx, ny, values)
    }

    pub fn window(&self) -> &Window<T> {
        &self.window
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn dx(&self) -> T {
        self.window.width() / T::of(self.nx as f64)
    }

    pub fn dy(&self) -> T {
        self.window.height() / T::of(self.ny as f64)
    }

    pub fn cell_area(&self) -> T {
        self.dx() * self.dy()
    }

    pub fn cell_center(&self, ix: usize, iy: usize) -> (T, T) {
        (
            self.window.x0 + self.dx() * T::of(ix as f64 + 0.5),
            self.window.y0 + self.dy() * T::of(iy as f64 + 0.5),
        )
    }

    /// Index of the cell containing `(x, y)`; locations on or beyond the
    /// boundary snap to the nearest edge cell.
    pub fn cell_of(&self, x: T, y: T) -> usize {
        let fx = ((x - self.window.x0) / self.dx()).floor();
        let fy = ((y - self.window.y0) / self.dy()).floor();
        let ix = fx.max(T::zero()).to_usize().unwrap_or(0).min(self.nx - 1);
        let iy = fy.max(T::zero()).to_usize().unwrap_or(0).min(self.ny - 1);
        iy * self.nx + ix
    }

    pub fn value_at(&self, x: T, y: T) -> T {
        self.values[self.cell_of(x, y)]
    }

    /// Midpoint-rule integral over the window.
    pub fn integral(&self) -> T {
        crate::real::tree_sum(&self.values) * self.cell_area()
    }

    pub fn mean(&self) -> T {
        crate::real::tree_sum(&self.values) / T::of(self.values.len() as f64)
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Result<Self> {
        Self::new(self.window, self.nx, self.ny, self.values.iter().map(|&v| f(v)).collect())
    }

    /// Cellwise combination of two fields on the same grid.
    pub fn zip_with(&self, other: &Self, f: impl Fn(T, T) -> T) -> Result<Self> {
        if self.nx != other.nx || self.ny != other.ny || self.window != other.window {
            return invalid("fields must share window and grid");
        }
        let v = self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect();
        Self::new(self.window, self.nx, self.ny, v)
    }
}

/// One ordered pair of distinct points within the interaction range.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairEntry<T> {
    pub u: usize,
    pub v: usize,
    pub ti: usize,
    pub tj: usize,
    pub r: T,
}

/// All ordered pairs `(u, v)`, `u != v`, with `0 < |u - v| <= R`, bucketed by
/// type pair. The entry set is closed under swapping `u` and `v`.
#[derive(Debug, Clone, PartialEq)]
pub struct PairIndex<T> {
    r_max: T,
    n_types: usize,
    entries: Vec<PairEntry<T>>,
    buckets: Vec<Vec<usize>>,
}

impl<T: Real> PairIndex<T> {
    pub fn from_entries(r_max: T, n_types: usize, entries: Vec<PairEntry<T>>) -> Self {
        let mut buckets = vec![Vec::new(); n_types * n_types];
        for (k, e) in entries.iter().enumerate() {
            buckets[e.ti * n_types + e.tj].push(k);
        }
        Self { r_max, n_types, entries, buckets }
    }

    pub fn r_max(&self) -> T {
        self.r_max
    }

    pub fn n_types(&self) -> usize {
        self.n_types
    }

    pub fn entries(&self) -> &[PairEntry<T>] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Entry indices of the bucket `M_ij`.
    pub fn bucket(&self, i: usize, j: usize) -> &[usize] {
        &self.buckets[i * self.n_types + j]
    }

    /// Keeps the entries whose index satisfies `keep`, preserving order.
    pub fn select(&self, mut keep: impl FnMut(usize) -> bool) -> Self {
        let entries = self
            .entries
            .iter()
            .enumerate()
            .filter(|(k, _)| keep(*k))
            .map(|(_, e)| *e)
            .collect();
        Self::from_entries(self.r_max, self.n_types, entries)
    }

    pub fn is_swap_closed(&self) -> bool {
        let mut counts: HashMap<(usize, usize, usize, usize), i64> = HashMap::new();
        for e in &self.entries {
            if e.u < e.v {
                *counts.entry((e.u, e.v, e.ti, e.tj)).or_default() += 1;
            } else {
                *counts.entry((e.v, e.u, e.tj, e.ti)).or_default() -= 1;
            }
        }
        counts.values().all(|&c| c == 0)
    }
}

/// Enumerates every ordered pair of distinct points at distance `0 < r <= R`
/// using a uniform hash grid with cells no smaller than `R`.
pub fn enumerate_pairs<T: Real>(pattern: &PointPattern<T>, r_max: T) -> Result<PairIndex<T>> {
    if !(r_max > T::zero()) || !r_max.is_finite() {
        return invalid("pair range R must be positive and finite");
    }
    let win = pattern.window();
    let pts = pattern.points();
    let cells_x = ((win.width() / r_max).floor().to_usize().unwrap_or(1)).clamp(1, 4096);
    let cells_y = ((win.height() / r_max).floor().to_usize().unwrap_or(1)).clamp(1, 4096);
    let cell_w = win.width() / T::of(cells_x as f64);
    let cell_h = win.height() / T::of(cells_y as f64);
    let cell_xy = |p: &Point<T>| -> (usize, usize) {
        let cx = ((p.x - win.x0) / cell_w).floor().to_usize().unwrap_or(0).min(cells_x - 1);
        let cy = ((p.y - win.y0) / cell_h).floor().to_usize().unwrap_or(0).min(cells_y - 1);
        (cx, cy)
    };
    let mut grid: Vec<Vec<usize>> = vec![Vec::new(); cells_x * cells_y];
    for (k, p) in pts.iter().enumerate() {
        let (cx, cy) = cell_xy(p);
        grid[cy * cells_x + cx].push(k);
    }
    let r2 = r_max * r_max;
    let mut entries = Vec::new();
    let mut near: Vec<(usize, T)> = Vec::new();
    for (u, pu) in pts.iter().enumerate() {
        let (cx, cy) = cell_xy(pu);
        near.clear();
        for gy in cy.saturating_sub(1)..=(cy + 1).min(cells_y - 1) {
            for gx in cx.saturating_sub(1)..=(cx + 1).min(cells_x - 1) {
                for &v in &grid[gy * cells_x + gx] {
                    if v == u {
                        continue;
                    }
                    let pv = &pts[v];
                    let dx = pu.x - pv.x;
                    let dy = pu.y - pv.y;
                    let d2 = dx * dx + dy * dy;
                    if d2 <= r2 && d2 > T::zero() {
                        near.push((v, d2.sqrt()));
                    }
                }
            }
        }
        near.sort_by_key(|&(v, _)| v);
        for &(v, r) in &near {
            entries.push(PairEntry { u, v, ti: pu.ty, tj: pts[v].ty, r });
        }
    }
    Ok(PairIndex::from_entries(r_max, pattern.n_types(), entries))
}

/// Assigns every entry to one of `k` folds.
///
/// Within each unordered type bucket the unordered pairs are shuffled and
/// dealt round-robin, so fold sizes differ by at most one unordered pair;
/// the two orientations of a pair always share a fold.
pub fn kfold_assign<T: Real>(pairs: &PairIndex<T>, k: usize, seed: u64) -> Result<Vec<usize>> {
    if k < 2 {
        return invalid("K-fold splitting needs K >= 2");
    }
    let p = pairs.n_types();
    let mut unit_of: HashMap<(usize, usize), usize> = HashMap::new();
    let mut unit_bucket: Vec<usize> = Vec::new();
    let mut entry_unit = Vec::with_capacity(pairs.len());
    for e in pairs.entries() {
        let key = (e.u.min(e.v), e.u.max(e.v));
        let next = unit_bucket.len();
        let unit = *unit_of.entry(key).or_insert_with(|| {
            unit_bucket.push(e.ti.min(e.tj) * p + e.ti.max(e.tj));
            next
        });
        entry_unit.push(unit);
    }
    let mut by_bucket: Vec<Vec<usize>> = vec![Vec::new(); p * p];
    for (unit, &b) in unit_bucket.iter().enumerate() {
        by_bucket[b].push(unit);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut unit_fold = vec![0; unit_bucket.len()];
    for units in by_bucket.iter_mut() {
        units.shuffle(&mut rng);
        for (pos, &unit) in units.iter().enumerate() {
            unit_fold[unit] = pos % k;
        }
    }
    Ok(entry_unit.into_iter().map(|u| unit_fold[u]).collect())
}

/// Splits the pair set into `k` disjoint, swap-closed folds.
pub fn kfold_split<T: Real>(pairs: &PairIndex<T>, k: usize, seed: u64) -> Result<Vec<PairIndex<T>>> {
    let fold = kfold_assign(pairs, k, seed)?;
    Ok((0..k).map(|f| pairs.select(|e| fold[e] == f)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;

    fn pattern(points: &[(f64, f64, usize)], n_types: usize) -> PointPattern<f64> {
        let pts = points.iter().map(|&(x, y, ty)| Point { x, y, ty }).collect();
        PointPattern::new(Window::unit(), n_types, pts).unwrap()
    }

    fn random_pattern(n: usize, n_types: usize, seed: u64) -> PointPattern<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pts: Vec<_> = (0..n)
            .map(|_| (rng.random::<f64>(), rng.random::<f64>(), rng.random_range(0..n_types)))
            .collect();
        pattern(&pts, n_types)
    }

    fn brute_force_count(p: &PointPattern<f64>, r: f64) -> usize {
        let pts = p.points();
        let mut n = 0;
        for (a, pa) in pts.iter().enumerate() {
            for (b, pb) in pts.iter().enumerate() {
                let d = ((pa.x - pb.x).powi(2) + (pa.y - pb.y).powi(2)).sqrt();
                if a != b && d > 0.0 && d <= r {
                    n += 1;
                }
            }
        }
        n
    }

    #[test]
    fn window_rejects_degenerate() {
        assert!(Window::new(0.0, 0.0, 0.0, 1.0).is_err());
        assert_eq!(Window::new(0.0, 0.0, 2.0, 3.0).unwrap().area(), 6.0);
    }

    #[test]
    fn pattern_validates_points() {
        let w = Window::unit();
        assert!(PointPattern::new(w, 2, vec![Point { x: 1.5, y: 0.5, ty: 0 }]).is_err());
        assert!(PointPattern::new(w, 2, vec![Point { x: 0.5, y: 0.5, ty: 2 }]).is_err());
        let p = PointPattern::new(w, 3, vec![Point { x: 0.5, y: 0.5, ty: 1 }]).unwrap();
        assert_eq!(p.counts(), vec![0, 1, 0]);
    }

    #[test]
    fn field_nearest_cell() {
        let f = ScalarField::from_fn(Window::unit(), 4, 2, |x, y| x + 10.0 * y).unwrap();
        assert_eq!(f.value_at(0.1, 0.1), 0.125 + 2.5);
        assert_eq!(f.value_at(1.0, 1.0), 0.875 + 7.5);
        assert!((f.integral() - 5.5f64).abs() < 1e-12);
        assert!(ScalarField::<f64>::constant(Window::unit(), 1, 4, 0.0).is_err());
    }

    #[test]
    fn single_point_has_no_pairs() {
        let p = pattern(&[(0.5, 0.5, 0)], 1);
        assert!(enumerate_pairs(&p, 10.0).unwrap().is_empty());
    }

    #[test]
    fn two_points_give_two_ordered_entries() {
        let p = pattern(&[(0.2, 0.5, 0), (0.7, 0.5, 1)], 2);
        let idx = enumerate_pairs(&p, 1.0).unwrap();
        assert_eq!(idx.len(), 2);
        let e = idx.entries();
        assert_eq!((e[0].ti, e[0].tj), (0, 1));
        assert_eq!((e[1].ti, e[1].tj), (1, 0));
        assert!((e[0].r - 0.5).abs() < 1e-15 && e[0].r == e[1].r);
        assert_eq!(idx.bucket(0, 1), &[0]);
        assert_eq!(idx.bucket(1, 0), &[1]);
    }

    #[test]
    fn rejects_non_positive_range() {
        let p = pattern(&[(0.5, 0.5, 0)], 1);
        assert!(enumerate_pairs(&p, 0.0).is_err());
        assert!(enumerate_pairs(&p, -1.0).is_err());
    }

    #[test]
    fn matches_brute_force_on_200_uniform_points() {
        let p = random_pattern(200, 3, 7);
        let idx = enumerate_pairs(&p, 0.1).unwrap();
        assert_eq!(idx.len(), brute_force_count(&p, 0.1));
        assert!(idx.entries().iter().all(|e| e.r > 0.0 && e.r <= 0.1));
    }

    #[test]
    fn coincident_points_are_skipped() {
        let p = pattern(&[(0.5, 0.5, 0), (0.5, 0.5, 1), (0.6, 0.5, 0)], 2);
        assert_eq!(enumerate_pairs(&p, 0.5).unwrap().len(), 4);
    }

    fn cross_bucket(n: usize) -> PairIndex<f64> {
        let mut entries = Vec::new();
        for k in 0..n {
            entries.push(PairEntry { u: 2 * k, v: 2 * k + 1, ti: 0, tj: 1, r: 0.01 });
            entries.push(PairEntry { u: 2 * k + 1, v: 2 * k, ti: 1, tj: 0, r: 0.01 });
        }
        PairIndex::from_entries(1.0, 2, entries)
    }

    fn bucket_sizes(folds: &[PairIndex<f64>]) -> Vec<usize> {
        folds.iter().map(|f| f.bucket(0, 1).len()).collect()
    }

    #[test]
    fn ten_pairs_five_folds() {
        let folds = kfold_split(&cross_bucket(10), 5, 3).unwrap();
        assert_eq!(bucket_sizes(&folds), vec![2; 5]);
    }

    #[test]
    fn eleven_pairs_remainder_rule() {
        let folds = kfold_split(&cross_bucket(11), 5, 3).unwrap();
        assert_eq!(bucket_sizes(&folds), vec![3, 2, 2, 2, 2]);
    }

    #[test]
    fn folds_are_deterministic_and_reject_small_k() {
        let p = random_pattern(150, 2, 1);
        let idx = enumerate_pairs(&p, 0.15).unwrap();
        assert_eq!(kfold_assign(&idx, 5, 42).unwrap(), kfold_assign(&idx, 5, 42).unwrap());
        assert_ne!(kfold_assign(&idx, 5, 42).unwrap(), kfold_assign(&idx, 5, 43).unwrap());
        assert!(kfold_assign(&idx, 1, 0).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn pairs_are_swap_closed_and_exact(n in 1usize..120, seed in any::<u64>(), r in 0.02f64..0.5) {
            let p = random_pattern(n, 3, seed);
            let idx = enumerate_pairs(&p, r).unwrap();
            prop_assert!(idx.is_swap_closed());
            prop_assert_eq!(idx.len(), brute_force_count(&p, r));
        }

        #[test]
        fn folds_partition_pairs(n in 2usize..120, seed in any::<u64>(), k in 2usize..8) {
            let p = random_pattern(n, 3, seed);
            let idx = enumerate_pairs(&p, 0.2).unwrap();
            let folds = kfold_split(&idx, k, seed).unwrap();
            prop_assert_eq!(folds.iter().map(|f| f.len()).sum::<usize>(), idx.len());
            for f in &folds {
                prop_assert!(f.is_swap_closed());
            }
            for i in 0..3 {
                for j in 0..3 {
                    let sizes: Vec<usize> = folds.iter().map(|f| f.bucket(i, j).len()).collect();
                    let spread = sizes.iter().max().unwrap() - sizes.iter().min().unwrap();
                    let limit = if i == j { 2 } else { 1 };
                    prop_assert!(spread <= limit);
                }
            }
        }
    }
}
