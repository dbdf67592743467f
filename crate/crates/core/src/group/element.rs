use std::fmt;
use std::ops::{Add, Neg, Sub};

use serde::{Deserialize, Serialize};

/// An element of `Z^d`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GroupElement {
    coords: Vec<i64>,
}

impl GroupElement {
    pub fn new(coords: Vec<i64>) -> Self {
        GroupElement { coords }
    }

    pub fn identity(dim: usize) -> Self {
        GroupElement { coords: vec![0; dim] }
    }

    /// The `axis`-th standard generator.
    pub fn unit(dim: usize, axis: usize) -> Self {
        let mut coords = vec![0; dim];
        coords[axis] = 1;
        GroupElement { coords }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[i64] {
        &self.coords
    }

    pub fn is_identity(&self) -> bool {
        self.coords.iter().all(|&c| c == 0)
    }

    pub fn inverse(&self) -> Self {
        -self
    }

    pub fn linf_norm(&self) -> i64 {
        self.coords.iter().map(|c| c.abs()).max().unwrap_or(0)
    }

    pub fn l1_norm(&self) -> i64 {
        self.coords.iter().map(|c| c.abs()).sum()
    }
}

impl From<&[i64]> for GroupElement {
    fn from(c: &[i64]) -> Self {
        GroupElement { coords: c.to_vec() }
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coords.len() == 1 {
            return write!(f, "{}", self.coords[0]);
        }
        write!(f, "(")?;
        for (i, c) in self.coords.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

impl Add for &GroupElement {
    type Output = GroupElement;
    fn add(self, rhs: &GroupElement) -> GroupElement {
        assert_eq!(self.dim(), rhs.dim(), "group elements of different rank");
        GroupElement {
            coords: self.coords.iter().zip(&rhs.coords).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &GroupElement {
    type Output = GroupElement;
    fn sub(self, rhs: &GroupElement) -> GroupElement {
        self + &(-rhs)
    }
}

impl Neg for &GroupElement {
    type Output = GroupElement;
    fn neg(self) -> GroupElement {
        GroupElement {
            coords: self.coords.iter().map(|c| -c).collect(),
        }
    }
}

/// The abstract interface the rest of the toolkit would need from another
/// finitely generated group.
pub trait CountableGroup {
    type Element: Clone + Eq;

    fn identity(&self) -> Self::Element;
    fn compose(&self, a: &Self::Element, b: &Self::Element) -> Self::Element;
    fn invert(&self, a: &Self::Element) -> Self::Element;
    /// Symmetric generating set.
    fn generators(&self) -> Vec<Self::Element>;
    /// All elements of word length at most `radius`.
    fn ball(&self, radius: usize) -> Vec<Self::Element>;
}

/// The group `Z^d`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Zd {
    pub dim: usize,
}

impl Zd {
    pub fn new(dim: usize) -> Self {
        Zd { dim }
    }
}

impl CountableGroup for Zd {
    type Element = GroupElement;

    fn identity(&self) -> GroupElement {
        GroupElement::identity(self.dim)
    }

    fn compose(&self, a: &GroupElement, b: &GroupElement) -> GroupElement {
        a + b
    }

    fn invert(&self, a: &GroupElement) -> GroupElement {
        -a
    }

    fn generators(&self) -> Vec<GroupElement> {
        (0..self.dim)
            .flat_map(|i| {
                let e = GroupElement::unit(self.dim, i);
                [-&e, e]
            })
            .collect()
    }

    fn ball(&self, radius: usize) -> Vec<GroupElement> {
        let r = radius as i64;
        let mut out = Vec::new();
        let mut cur = vec![-r; self.dim];
        if self.dim == 0 {
            return vec![GroupElement::identity(0)];
        }
        loop {
            if cur.iter().map(|c| c.abs()).sum::<i64>() <= r {
                out.push(GroupElement::new(cur.clone()));
            }
            let mut i = self.dim;
            loop {
                if i == 0 {
                    return out;
                }
                i -= 1;
                if cur[i] < r {
                    cur[i] += 1;
                    break;
                }
                cur[i] = -r;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ball_sizes() {
        assert_eq!(Zd::new(1).ball(3).len(), 7);
        // |{x in Z^2 : |x|_1 <= 2}| = 13
        assert_eq!(Zd::new(2).ball(2).len(), 13);
    }

    #[test]
    fn group_law() {
        let g = GroupElement::new(vec![2, -3]);
        let h = GroupElement::new(vec![-1, 5]);
        assert_eq!(&g + &h, GroupElement::new(vec![1, 2]));
        assert!((&g + &g.inverse()).is_identity());
        assert_eq!(g.to_string(), "(2,-3)");
    }
}
