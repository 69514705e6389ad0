use std::fmt;

use serde::{Deserialize, Serialize};

use super::{BellInequality, Party};
use crate::error::{Error, Result};

/// An element of the equivalence group: party exchange, setting
/// permutations and outcome exchanges.
///
/// Applied in this order:
/// 1. if `swap_parties`, Alice and Bob exchange roles;
/// 2. setting `i` of each party is flipped when `flip_a[i]` / `flip_b[i]`
///    is set (indices refer to the post-swap labels);
/// 3. settings are reordered so that new setting `k` is old setting `perm[k]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Transform {
    pub swap_parties: bool,
    pub perm_a: Vec<usize>,
    pub perm_b: Vec<usize>,
    pub flip_a: Vec<bool>,
    pub flip_b: Vec<bool>,
}

/// Where one measurement of the source lands: (party, index, flipped).
type Image = (Party, usize, bool);

impl Transform {
    /// Identity on an `m_a x m_b` inequality.
    pub fn identity(m_a: usize, m_b: usize) -> Self {
        Self {
            swap_parties: false,
            perm_a: (0..m_a).collect(),
            perm_b: (0..m_b).collect(),
            flip_a: vec![false; m_a],
            flip_b: vec![false; m_b],
        }
    }

    /// Dimensions `(m_a, m_b)` of the inequality this transform acts on.
    pub fn source_dims(&self) -> (usize, usize) {
        if self.swap_parties {
            (self.perm_b.len(), self.perm_a.len())
        } else {
            (self.perm_a.len(), self.perm_b.len())
        }
    }

    /// Dimensions of the transformed inequality.
    pub fn target_dims(&self) -> (usize, usize) {
        (self.perm_a.len(), self.perm_b.len())
    }

    pub fn is_identity(&self) -> bool {
        let (m_a, m_b) = self.target_dims();
        *self == Self::identity(m_a, m_b)
    }

    fn validate(&self) -> Result<()> {
        if self.flip_a.len() != self.perm_a.len() || self.flip_b.len() != self.perm_b.len() {
            return Err(Error::Dimension("flip and permutation lengths differ".into()));
        }
        for perm in [&self.perm_a, &self.perm_b] {
            let mut seen = vec![false; perm.len()];
            for &p in perm {
                if p >= perm.len() || std::mem::replace(&mut seen[p], true) {
                    return Err(Error::InvalidArgument(format!("{perm:?} is not a permutation")));
                }
            }
        }
        Ok(())
    }

    pub fn apply(&self, ineq: &BellInequality) -> Result<BellInequality> {
        self.validate()?;
        if self.source_dims() != (ineq.m_a(), ineq.m_b()) {
            return Err(Error::Dimension(format!(
                "transform acts on {:?}, inequality is {}x{}",
                self.source_dims(),
                ineq.m_a(),
                ineq.m_b()
            )));
        }
        let mut x = if self.swap_parties {
            ineq.transposed()
        } else {
            ineq.clone()
        };
        for (i, _) in self.flip_a.iter().enumerate().filter(|(_, &f)| f) {
            x.flip_in_place(Party::A, i);
        }
        for (j, _) in self.flip_b.iter().enumerate().filter(|(_, &f)| f) {
            x.flip_in_place(Party::B, j);
        }
        Ok(x.permuted(&self.perm_a, &self.perm_b))
    }

    /// Images of the source's Alice and Bob measurements.
    fn images(&self) -> (Vec<Image>, Vec<Image>) {
        let inv_a = invert(&self.perm_a);
        let inv_b = invert(&self.perm_b);
        // post-swap party p, index i  ->  (p, inv_p[i], flip_p[i])
        let post = |p: Party, i: usize| match p {
            Party::A => (Party::A, inv_a[i], self.flip_a[i]),
            Party::B => (Party::B, inv_b[i], self.flip_b[i]),
        };
        let (src_a, src_b) = self.source_dims();
        let pa = if self.swap_parties { Party::B } else { Party::A };
        (
            (0..src_a).map(|i| post(pa, i)).collect(),
            (0..src_b).map(|j| post(pa.other(), j)).collect(),
        )
    }

    fn from_images(a: &[Image], b: &[Image]) -> Self {
        let swap_parties = a.first().is_some_and(|im| im.0 == Party::B);
        let (post_a, post_b) = if swap_parties { (b, a) } else { (a, b) };
        let mut perm_a = vec![0; post_a.len()];
        let mut flip_a = vec![false; post_a.len()];
        for (i, &(_, k, f)) in post_a.iter().enumerate() {
            perm_a[k] = i;
            flip_a[i] = f;
        }
        let mut perm_b = vec![0; post_b.len()];
        let mut flip_b = vec![false; post_b.len()];
        for (j, &(_, k, f)) in post_b.iter().enumerate() {
            perm_b[k] = j;
            flip_b[j] = f;
        }
        Self {
            swap_parties,
            perm_a,
            perm_b,
            flip_a,
            flip_b,
        }
    }

    pub fn inverse(&self) -> Self {
        let (a, b) = self.images();
        let (t_a, t_b) = self.target_dims();
        let mut inv_a = vec![(Party::A, 0, false); t_a];
        let mut inv_b = vec![(Party::A, 0, false); t_b];
        for (party, images) in [(Party::A, &a), (Party::B, &b)] {
            for (i, &(p, k, f)) in images.iter().enumerate() {
                let slot = match p {
                    Party::A => &mut inv_a[k],
                    Party::B => &mut inv_b[k],
                };
                *slot = (party, i, f);
            }
        }
        Self::from_images(&inv_a, &inv_b)
    }

    /// `self` followed by `next`.
    pub fn then(&self, next: &Transform) -> Result<Self> {
        if self.target_dims() != next.source_dims() {
            return Err(Error::Dimension("transforms do not compose".into()));
        }
        let (a, b) = self.images();
        let (na, nb) = next.images();
        let follow = |&(p, k, f): &Image| {
            let (p2, k2, f2) = match p {
                Party::A => na[k],
                Party::B => nb[k],
            };
            (p2, k2, f ^ f2)
        };
        let a: Vec<Image> = a.iter().map(follow).collect();
        let b: Vec<Image> = b.iter().map(follow).collect();
        Ok(Self::from_images(&a, &b))
    }
}

fn invert(perm: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; perm.len()];
    for (k, &i) in perm.iter().enumerate() {
        inv[i] = k;
    }
    inv
}

impl fmt::Display for Transform {
    /// One-line description, settings 1-based: `swap=no A:[2,1] B:[1,2] flipA:{1} flipB:{}`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let list = |v: &[usize]| {
            v.iter()
                .map(|x| (x + 1).to_string())
                .collect::<Vec<_>>()
                .join(",")
        };
        let flips = |v: &[bool]| {
            v.iter()
                .enumerate()
                .filter(|(_, &b)| b)
                .map(|(i, _)| (i + 1).to_string())
                .collect::<Vec<_>>()
                .join(",")
        };
        write!(
            f,
            "swap={} A:[{}] B:[{}] flipA:{{{}}} flipB:{{{}}}",
            if self.swap_parties { "yes" } else { "no" },
            list(&self.perm_a),
            list(&self.perm_b),
            flips(&self.flip_a),
            flips(&self.flip_b)
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inequality::parse_cg;

    fn a8() -> BellInequality {
        parse_cg(
            "cg 4 5 0\n0 -1 -2 0\n-1 1 1 1 -1\n-2 1 1 1 1\n0 -1 1 0 0\n0 -1 0 1 0\n0 0 -1 1 0\n",
        )
        .unwrap()
    }

    fn sample() -> Transform {
        Transform {
            swap_parties: true,
            perm_a: vec![4, 0, 3, 1, 2],
            perm_b: vec![2, 3, 1, 0],
            flip_a: vec![true, false, false, true, false],
            flip_b: vec![false, true, false, false],
        }
    }

    #[test]
    fn identity_is_noop() {
        let x = a8();
        assert_eq!(Transform::identity(4, 5).apply(&x).unwrap(), x);
        assert!(Transform::identity(4, 5).is_identity());
    }

    #[test]
    fn inverse_restores() {
        let x = a8();
        let t = sample();
        let y = t.apply(&x).unwrap();
        assert_eq!((y.m_a(), y.m_b()), (5, 4));
        assert_eq!(t.inverse().apply(&y).unwrap(), x);
        assert!(t.then(&t.inverse()).unwrap().is_identity());
    }

    #[test]
    fn composition_matches_sequential_application() {
        let x = a8();
        let t = sample();
        let u = Transform {
            swap_parties: false,
            perm_a: vec![1, 2, 3, 4, 0],
            perm_b: vec![3, 2, 1, 0],
            flip_a: vec![false, true, true, false, false],
            flip_b: vec![true, false, false, true],
        };
        let seq = u.apply(&t.apply(&x).unwrap()).unwrap();
        assert_eq!(t.then(&u).unwrap().apply(&x).unwrap(), seq);
    }

    #[test]
    fn rejects_mismatched_sizes() {
        let x = a8();
        assert!(Transform::identity(5, 4).apply(&x).is_err());
        let mut bad = Transform::identity(4, 5);
        bad.perm_a = vec![0, 0, 1, 2];
        assert!(bad.apply(&x).is_err());
    }

    #[test]
    fn display_is_one_based() {
        let s = sample().to_string();
        assert_eq!(s, "swap=yes A:[5,1,4,2,3] B:[3,4,2,1] flipA:{1,4} flipB:{2}");
    }
}
