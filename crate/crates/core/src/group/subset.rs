use std::cmp::Ordering;
use std::fmt;

use super::GroupElement;
use crate::{Error, Result};

/// A non-empty finite subset of `Z^d`.
///
/// Elements are stored flat, sorted lexicographically by coordinates and
/// deduplicated, so equal sets have equal representations.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct FiniteSubset {
    dim: usize,
    coords: Vec<i64>,
}

fn cmp_points(a: &[i64], b: &[i64]) -> Ordering {
    a.cmp(b)
}

impl FiniteSubset {
    /// Builds a set from arbitrary points, sorting and deduplicating.
    pub fn from_points<I, P>(dim: usize, points: I) -> Result<Self>
    where
        I: IntoIterator<Item = P>,
        P: AsRef<[i64]>,
    {
        let mut flat = Vec::new();
        for p in points {
            let p = p.as_ref();
            if p.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: p.len(),
                });
            }
            flat.extend_from_slice(p);
        }
        Self::from_flat(dim, flat)
    }

    pub fn from_elements(dim: usize, elements: &[GroupElement]) -> Result<Self> {
        Self::from_points(dim, elements.iter().map(|g| g.coords()))
    }

    /// Builds a set from flat coordinates (any order, duplicates allowed).
    pub fn from_flat(dim: usize, flat: Vec<i64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::config("groups of rank 0 are not supported"));
        }
        if flat.is_empty() {
            return Err(Error::config("finite subsets must be non-empty"));
        }
        if !flat.len().is_multiple_of(dim) {
            return Err(Error::config("flat coordinate list is not a multiple of the rank"));
        }
        let coords = if dim == 1 {
            let mut v = flat;
            v.sort_unstable();
            v.dedup();
            v
        } else {
            let n = flat.len() / dim;
            let mut idx: Vec<usize> = (0..n).collect();
            idx.sort_unstable_by(|&a, &b| cmp_points(&flat[a * dim..(a + 1) * dim], &flat[b * dim..(b + 1) * dim]));
            let mut out: Vec<i64> = Vec::with_capacity(flat.len());
            for i in idx {
                let p = &flat[i * dim..(i + 1) * dim];
                if out.len() >= dim && &out[out.len() - dim..] == p {
                    continue;
                }
                out.extend_from_slice(p);
            }
            out
        };
        Ok(FiniteSubset { dim, coords })
    }

    /// Builds from already sorted, deduplicated flat coordinates.
    fn from_sorted_unchecked(dim: usize, coords: Vec<i64>) -> Self {
        debug_assert!(!coords.is_empty());
        FiniteSubset { dim, coords }
    }

    pub fn singleton(g: &GroupElement) -> Self {
        FiniteSubset {
            dim: g.dim(),
            coords: g.coords().to_vec(),
        }
    }

    /// `{1_G}`.
    pub fn identity(dim: usize) -> Self {
        Self::singleton(&GroupElement::identity(dim))
    }

    /// The interval `[a, b)` in `Z`.
    pub fn interval(a: i64, b: i64) -> Result<Self> {
        if b <= a {
            return Err(Error::config(format!("empty interval [{a}, {b})")));
        }
        Ok(FiniteSubset {
            dim: 1,
            coords: (a..b).collect(),
        })
    }

    /// The box `prod [lo_i, hi_i)`.
    pub fn product_box(lo: &[i64], hi: &[i64]) -> Result<Self> {
        let dim = lo.len();
        if dim == 0 || hi.len() != dim {
            return Err(Error::config("box bounds must have equal positive rank"));
        }
        if lo.iter().zip(hi).any(|(a, b)| b <= a) {
            return Err(Error::config("box with an empty side"));
        }
        let mut coords = Vec::new();
        let mut cur = lo.to_vec();
        'outer: loop {
            coords.extend_from_slice(&cur);
            let mut i = dim;
            loop {
                if i == 0 {
                    break 'outer;
                }
                i -= 1;
                cur[i] += 1;
                if cur[i] < hi[i] {
                    break;
                }
                cur[i] = lo[i];
            }
        }
        Ok(FiniteSubset::from_sorted_unchecked(dim, coords))
    }

    /// The centered box `[-n, n]^d`.
    pub fn centered_box(dim: usize, n: usize) -> Self {
        let n = n as i64;
        Self::product_box(&vec![-n; dim], &vec![n + 1; dim]).expect("non-empty box")
    }

    /// The corner box `[0, n)^d`, `n >= 1`.
    pub fn corner_box(dim: usize, n: usize) -> Result<Self> {
        Self::product_box(&vec![0; dim], &vec![n as i64; dim])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    /// Always false; kept for API symmetry with collections.
    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn point(&self, i: usize) -> &[i64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = &[i64]> + '_ {
        self.coords.chunks_exact(self.dim)
    }

    pub fn elements(&self) -> Vec<GroupElement> {
        self.points().map(GroupElement::from).collect()
    }

    pub fn flat(&self) -> &[i64] {
        &self.coords
    }

    /// Position of `p` in the sorted order.
    pub fn index_of(&self, p: &[i64]) -> Option<usize> {
        let (mut lo, mut hi) = (0usize, self.len());
        while lo < hi {
            let mid = (lo + hi) / 2;
            match cmp_points(self.point(mid), p) {
                Ordering::Less => lo = mid + 1,
                Ordering::Greater => hi = mid,
                Ordering::Equal => return Some(mid),
            }
        }
        None
    }

    pub fn contains(&self, p: &[i64]) -> bool {
        self.index_of(p).is_some()
    }

    /// `{f - g : f in F}`; order is preserved so no re-sort is needed.
    pub fn shifted_by_inverse(&self, g: &GroupElement) -> Self {
        assert_eq!(g.dim(), self.dim, "rank mismatch in translate");
        let mut coords = self.coords.clone();
        for chunk in coords.chunks_exact_mut(self.dim) {
            for (c, s) in chunk.iter_mut().zip(g.coords()) {
                *c -= s;
            }
        }
        FiniteSubset::from_sorted_unchecked(self.dim, coords)
    }

    /// `{f + g : f in F}`.
    pub fn shifted_by(&self, g: &GroupElement) -> Self {
        self.shifted_by_inverse(&-g)
    }

    /// The product set `KF = {k + f}`.
    pub fn minkowski_sum(&self, other: &FiniteSubset) -> Self {
        assert_eq!(self.dim, other.dim, "rank mismatch in product set");
        let mut flat = Vec::with_capacity(self.coords.len() * other.len());
        for k in self.points() {
            for f in other.points() {
                flat.extend(k.iter().zip(f).map(|(a, b)| a + b));
            }
        }
        FiniteSubset::from_flat(self.dim, flat).expect("non-empty product set")
    }

    pub fn union(&self, other: &FiniteSubset) -> Self {
        assert_eq!(self.dim, other.dim, "rank mismatch in union");
        let mut flat = self.coords.clone();
        flat.extend_from_slice(&other.coords);
        FiniteSubset::from_flat(self.dim, flat).expect("non-empty union")
    }

    /// Points of `self` not in `other`; `None` when empty.
    pub fn difference(&self, other: &FiniteSubset) -> Option<Self> {
        let flat: Vec<i64> = self
            .points()
            .filter(|p| !other.contains(p))
            .flat_map(|p| p.iter().copied())
            .collect();
        if flat.is_empty() {
            None
        } else {
            Some(FiniteSubset::from_sorted_unchecked(self.dim, flat))
        }
    }

    pub fn is_subset(&self, other: &FiniteSubset) -> bool {
        self.points().all(|p| other.contains(p))
    }

    /// `|A Δ B|` by a merge of the two sorted lists.
    pub fn symmetric_difference_size(&self, other: &FiniteSubset) -> usize {
        let (mut i, mut j, mut count) = (0, 0, 0);
        let (n, m) = (self.len(), other.len());
        while i < n && j < m {
            match cmp_points(self.point(i), other.point(j)) {
                Ordering::Less => {
                    count += 1;
                    i += 1;
                }
                Ordering::Greater => {
                    count += 1;
                    j += 1;
                }
                Ordering::Equal => {
                    i += 1;
                    j += 1;
                }
            }
        }
        count + (n - i) + (m - j)
    }

    /// Coordinatewise bounding box as `(lo, hi_inclusive)`.
    pub fn bounds(&self) -> (Vec<i64>, Vec<i64>) {
        let mut lo = self.point(0).to_vec();
        let mut hi = lo.clone();
        for p in self.points() {
            for k in 0..self.dim {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        (lo, hi)
    }

    /// The smallest box containing the set.
    pub fn hull(&self) -> Self {
        let (lo, hi) = self.bounds();
        let hi1: Vec<i64> = hi.iter().map(|h| h + 1).collect();
        Self::product_box(&lo, &hi1).expect("non-empty hull")
    }

    /// True when the set is a box (an interval for `d = 1`).
    pub fn is_box(&self) -> bool {
        let (lo, hi) = self.bounds();
        let vol: i128 = lo.iter().zip(&hi).map(|(a, b)| (b - a + 1) as i128).product();
        vol == self.len() as i128
    }

    pub fn is_interval(&self) -> bool {
        self.dim == 1 && self.is_box()
    }
}

impl fmt::Debug for FiniteSubset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for FiniteSubset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.len() > 6 && self.is_box() {
            let (lo, hi) = self.bounds();
            write!(f, "box{lo:?}..={hi:?}")
        } else {
            write!(f, "{{")?;
            for (i, p) in self.points().enumerate() {
                if i > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{}", GroupElement::from(p))?;
            }
            write!(f, "}}")
        }
    }
}

/// `g . F = F g^{-1}`, which is `F - g` additively.
pub fn translate(f: &FiniteSubset, g: &GroupElement) -> FiniteSubset {
    f.shifted_by_inverse(g)
}

/// `|KF Δ F| / |F|`.
pub fn invariance_defect(k: &FiniteSubset, f: &FiniteSubset) -> f64 {
    let kf = k.minkowski_sum(f);
    kf.symmetric_difference_size(f) as f64 / f.len() as f64
}

/// A pair `(K, delta)` with `delta > 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct InvariancePair {
    pub k: FiniteSubset,
    pub delta: f64,
}

impl InvariancePair {
    pub fn new(k: FiniteSubset, delta: f64) -> Result<Self> {
        if !(delta > 0.0) || !delta.is_finite() {
            return Err(Error::config(format!("invariance delta must be positive, got {delta}")));
        }
        Ok(InvariancePair { k, delta })
    }

    /// Partial order: `self <= other` iff `K ⊆ K'` and `delta' <= delta`.
    pub fn precedes(&self, other: &InvariancePair) -> bool {
        self.k.is_subset(&other.k) && other.delta <= self.delta
    }

    pub fn strictly_precedes(&self, other: &InvariancePair) -> bool {
        self.precedes(other) && (self.k != other.k || other.delta < self.delta)
    }
}

/// True iff `F` is `(K, delta)`-invariant.
pub fn is_invariant(f: &FiniteSubset, pair: &InvariancePair) -> bool {
    invariance_defect(&pair.k, f) <= pair.delta
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn z(points: &[i64]) -> FiniteSubset {
        FiniteSubset::from_points(1, points.iter().map(|p| [*p])).unwrap()
    }

    #[test]
    fn translate_examples() {
        let f = z(&[0, 1, 2]);
        assert_eq!(translate(&f, &GroupElement::identity(1)), f);
        assert_eq!(translate(&f, &GroupElement::new(vec![1])), z(&[-1, 0, 1]));
        let f2 = FiniteSubset::from_points(2, [[0, 0], [1, 0]]).unwrap();
        let t = translate(&f2, &GroupElement::new(vec![2, 3]));
        assert_eq!(t, FiniteSubset::from_points(2, [[-2, -3], [-1, -3]]).unwrap());
    }

    #[test]
    fn defect_examples() {
        let f = FiniteSubset::interval(0, 10).unwrap();
        assert_eq!(invariance_defect(&FiniteSubset::identity(1), &f), 0.0);
        for n in 1..40 {
            let f = FiniteSubset::interval(0, n).unwrap();
            assert_eq!(invariance_defect(&z(&[0, 1]), &f), 1.0 / n as f64);
        }
    }

    /// Brute-force oracle: count the symmetric difference with a hash set.
    fn brute_defect(k: &[[i64; 2]], f: &[[i64; 2]]) -> f64 {
        use std::collections::HashSet;
        let fs: HashSet<[i64; 2]> = f.iter().copied().collect();
        let kf: HashSet<[i64; 2]> = k
            .iter()
            .flat_map(|a| f.iter().map(move |b| [a[0] + b[0], a[1] + b[1]]))
            .collect();
        kf.symmetric_difference(&fs).count() as f64 / fs.len() as f64
    }

    #[test]
    fn defect_of_unit_square_on_boxes() {
        let k = [[0, 0], [0, 1], [1, 0], [1, 1]];
        let kset = FiniteSubset::from_points(2, k).unwrap();
        for n in [1usize, 2, 3, 7, 20, 50] {
            let pts: Vec<[i64; 2]> = (0..n as i64).flat_map(|i| (0..n as i64).map(move |j| [i, j])).collect();
            let f = FiniteSubset::corner_box(2, n).unwrap();
            let brute = brute_defect(&k, &pts);
            let nf = n as f64;
            assert!((brute - (2.0 * nf + 1.0) / (nf * nf)).abs() < 1e-15);
            assert_eq!(invariance_defect(&kset, &f), brute);
        }
    }

    #[test]
    fn is_invariant_examples() {
        let k = z(&[0, 1]);
        let f100 = FiniteSubset::interval(0, 100).unwrap();
        let f10 = FiniteSubset::interval(0, 10).unwrap();
        assert!(is_invariant(&f100, &InvariancePair::new(k.clone(), 0.02).unwrap()));
        assert!(!is_invariant(&f10, &InvariancePair::new(k, 0.05).unwrap()));
        let id = InvariancePair::new(FiniteSubset::identity(1), 1e-9).unwrap();
        assert!(is_invariant(&z(&[3, 9, -4]), &id));
        assert!(InvariancePair::new(FiniteSubset::identity(1), 0.0).is_err());
    }

    #[test]
    fn empty_sets_are_rejected() {
        assert!(FiniteSubset::from_flat(1, vec![]).is_err());
        assert!(FiniteSubset::interval(3, 3).is_err());
    }

    #[test]
    fn box_defect_bound() {
        for d in 1..=2usize {
            for n in 1..=50usize {
                let f = FiniteSubset::centered_box(d, n);
                let side = (2 * n + 1) as f64;
                for g in [vec![1i64, 0], vec![3, -2], vec![-5, 4]] {
                    let g = GroupElement::new(g[..d].to_vec());
                    let defect = invariance_defect(&FiniteSubset::singleton(&g), &f);
                    let bound = (2.0 * g.linf_norm() as f64 * d as f64 * side.powi(d as i32 - 1)) / side.powi(d as i32);
                    assert!(defect <= bound + 1e-12, "d={d} n={n} g={g}");
                }
            }
        }
    }

    proptest! {
        #[test]
        fn translate_preserves_size_and_composes(
            pts in proptest::collection::vec((-20i64..20, -20i64..20), 1..30),
            g in (-9i64..9, -9i64..9),
            h in (-9i64..9, -9i64..9),
        ) {
            let f = FiniteSubset::from_points(2, pts.iter().map(|(a, b)| [*a, *b])).unwrap();
            let g = GroupElement::new(vec![g.0, g.1]);
            let h = GroupElement::new(vec![h.0, h.1]);
            let fg = translate(&f, &g);
            prop_assert_eq!(fg.len(), f.len());
            prop_assert_eq!(translate(&fg, &h), translate(&f, &(&g + &h)));
        }

        #[test]
        fn identity_has_zero_defect(pts in proptest::collection::vec(-50i64..50, 1..40)) {
            let f = FiniteSubset::from_points(1, pts.iter().map(|p| [*p])).unwrap();
            prop_assert_eq!(invariance_defect(&FiniteSubset::identity(1), &f), 0.0);
        }

        #[test]
        fn invariance_is_monotone_in_delta(
            pts in proptest::collection::vec(-30i64..30, 1..40),
            delta in 0.001f64..3.0,
            extra in 0.0f64..2.0,
        ) {
            let f = FiniteSubset::from_points(1, pts.iter().map(|p| [*p])).unwrap();
            let k = FiniteSubset::from_points(1, [[0], [1], [3]]).unwrap();
            let p1 = InvariancePair::new(k.clone(), delta).unwrap();
            let p2 = InvariancePair::new(k, delta + extra).unwrap();
            prop_assert!(!is_invariant(&f, &p1) || is_invariant(&f, &p2));
        }
    }
}
