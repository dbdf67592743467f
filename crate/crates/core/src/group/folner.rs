use std::fmt;
use std::sync::Arc;

use super::FiniteSubset;
use crate::{Error, Result};

type Generator = Arc<dyn Fn(usize) -> Result<FiniteSubset> + Send + Sync>;

/// Built-in box families.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoxKind {
    /// `[-n, n]^d`: nested and exhausting.
    Centered,
    /// `[0, n)^d`: nested, exhausts the positive cone only.
    Corner,
}

/// A rule `n -> F_n` with a finite window `[n_min, n_max]` used by the
/// estimators.
#[derive(Clone)]
pub struct FolnerSchedule {
    dim: usize,
    kind: ScheduleKind,
    n_min: usize,
    n_max: usize,
}

#[derive(Clone)]
enum ScheduleKind {
    Boxes(BoxKind),
    Custom { name: String, generator: Generator },
}

impl fmt::Debug for FolnerSchedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match &self.kind {
            ScheduleKind::Boxes(k) => format!("{k:?} boxes"),
            ScheduleKind::Custom { name, .. } => format!("custom({name})"),
        };
        write!(
            f,
            "FolnerSchedule({kind}, d={}, n={}..={})",
            self.dim, self.n_min, self.n_max
        )
    }
}

impl FolnerSchedule {
    pub fn boxes(dim: usize, n_min: usize, n_max: usize) -> Result<Self> {
        Self::build(dim, ScheduleKind::Boxes(BoxKind::Centered), n_min, n_max)
    }

    pub fn corner_boxes(dim: usize, n_min: usize, n_max: usize) -> Result<Self> {
        if n_min == 0 {
            return Err(Error::config("corner boxes need n_min >= 1"));
        }
        Self::build(dim, ScheduleKind::Boxes(BoxKind::Corner), n_min, n_max)
    }

    /// Centered boxes on the default window: `[4, 64]` for `Z`, `[2, 12]`
    /// otherwise.
    pub fn default_for(dim: usize) -> Self {
        let (a, b) = if dim == 1 { (4, 64) } else { (2, 12) };
        Self::boxes(dim, a, b).expect("valid default schedule")
    }

    pub fn custom<F>(dim: usize, name: &str, n_min: usize, n_max: usize, generator: F) -> Result<Self>
    where
        F: Fn(usize) -> Result<FiniteSubset> + Send + Sync + 'static,
    {
        Self::build(
            dim,
            ScheduleKind::Custom {
                name: name.to_string(),
                generator: Arc::new(generator),
            },
            n_min,
            n_max,
        )
    }

    fn build(dim: usize, kind: ScheduleKind, n_min: usize, n_max: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::config("schedule rank must be positive"));
        }
        if n_min > n_max {
            return Err(Error::config(format!("empty Følner window [{n_min}, {n_max}]")));
        }
        Ok(FolnerSchedule {
            dim,
            kind,
            n_min,
            n_max,
        })
    }

    pub fn with_range(&self, n_min: usize, n_max: usize) -> Result<Self> {
        Self::build(self.dim, self.kind.clone(), n_min, n_max)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn range(&self) -> (usize, usize) {
        (self.n_min, self.n_max)
    }

    pub fn indices(&self) -> std::ops::RangeInclusive<usize> {
        self.n_min..=self.n_max
    }

    pub fn len(&self) -> usize {
        self.n_max - self.n_min + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn box_kind(&self) -> Option<BoxKind> {
        match self.kind {
            ScheduleKind::Boxes(k) => Some(k),
            ScheduleKind::Custom { .. } => None,
        }
    }

    /// `F_n`.
    pub fn set_at(&self, n: usize) -> Result<FiniteSubset> {
        let set = match &self.kind {
            ScheduleKind::Boxes(BoxKind::Centered) => FiniteSubset::centered_box(self.dim, n),
            ScheduleKind::Boxes(BoxKind::Corner) => FiniteSubset::corner_box(self.dim, n)?,
            ScheduleKind::Custom { generator, .. } => generator(n)?,
        };
        if set.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: set.dim(),
            });
        }
        Ok(set)
    }
}

/// Materializes `F_{n_min}, ..., F_{n_max}` in increasing `n`.
pub fn folner_window(schedule: &FolnerSchedule) -> Result<Vec<FiniteSubset>> {
    schedule.indices().map(|n| schedule.set_at(n)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{invariance_defect, GroupElement};

    #[test]
    fn window_examples() {
        let s = FolnerSchedule::boxes(1, 1, 3).unwrap();
        let w = folner_window(&s).unwrap();
        assert_eq!(w.len(), 3);
        assert_eq!(w[0], FiniteSubset::interval(-1, 2).unwrap());
        assert_eq!(w[2], FiniteSubset::interval(-3, 4).unwrap());

        let s2 = FolnerSchedule::boxes(2, 2, 2).unwrap();
        assert_eq!(folner_window(&s2).unwrap()[0].len(), 25);

        let c = FolnerSchedule::custom(1, "prefix", 2, 4, |n| FiniteSubset::interval(0, n as i64)).unwrap();
        let w = folner_window(&c).unwrap();
        assert_eq!(w.iter().map(|f| f.len()).collect::<Vec<_>>(), vec![2, 3, 4]);
        assert_eq!(w[0], FiniteSubset::interval(0, 2).unwrap());
    }

    #[test]
    fn empty_range_is_an_error() {
        assert!(FolnerSchedule::boxes(1, 5, 4).is_err());
    }

    #[test]
    fn boxes_are_nested_and_folner() {
        let s = FolnerSchedule::default_for(2);
        let w = folner_window(&s).unwrap();
        for pair in w.windows(2) {
            assert!(pair[0].is_subset(&pair[1]));
        }
        let g = FiniteSubset::singleton(&GroupElement::new(vec![1, 2]));
        let d: Vec<f64> = w.iter().map(|f| invariance_defect(&g, f)).collect();
        assert!(d.windows(2).all(|p| p[1] <= p[0]));
    }
}
