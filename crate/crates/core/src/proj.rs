//! Projective spaces PG(N-1, F) over the top field of a tower, with points
//! indexed densely in lexicographic order of their normalized coordinates.

use crate::gf::{Elem, FieldTower};

/// Scales `v` so that its first nonzero coordinate is 1.
pub fn normalize<const N: usize>(t: &FieldTower, v: [Elem; N]) -> Option<[Elem; N]> {
    let lead = v.iter().copied().find(|x| !x.is_zero())?;
    if lead == Elem::ONE {
        return Some(v);
    }
    let inv = t.inv(lead).expect("nonzero");
    Some(v.map(|x| t.mul(inv, x)))
}

pub fn dot<const N: usize>(t: &FieldTower, a: &[Elem; N], b: &[Elem; N]) -> Elem {
    let mut acc = Elem::ZERO;
    for i in 0..N {
        acc = t.add(acc, t.mul(a[i], b[i]));
    }
    acc
}

/// Index arithmetic for PG(N-1, F) with |F| = `order`.
///
/// Points with leading 1 in position k come before those with leading 1 in
/// position k+1; within a block the trailing coordinates are read as base
/// `order` digits, least significant first.
#[derive(Clone, Copy, Debug)]
pub struct ProjSpace<const N: usize> {
    order: u64,
    offsets: [u64; N],
    count: u64,
}

impl<const N: usize> ProjSpace<N> {
    pub fn new(order: u32) -> Self {
        let order = order as u64;
        let mut offsets = [0u64; N];
        let mut acc = 0;
        for (k, off) in offsets.iter_mut().enumerate() {
            *off = acc;
            acc += order.pow((N - 1 - k) as u32);
        }
        ProjSpace {
            order,
            offsets,
            count: acc,
        }
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    /// Number of points on a hyperplane.
    pub fn hyperplane_count(&self) -> u64 {
        (self.count - 1) / self.order
    }

    pub fn point(&self, idx: u64) -> [Elem; N] {
        let k = (0..N)
            .rev()
            .find(|&k| self.offsets[k] <= idx)
            .expect("index in range");
        let mut rest = idx - self.offsets[k];
        let mut v = [Elem::ZERO; N];
        v[k] = Elem::ONE;
        for x in v.iter_mut().skip(k + 1) {
            *x = Elem((rest % self.order) as u32);
            rest /= self.order;
        }
        v
    }

    /// Index of an already normalized vector.
    pub fn index(&self, v: &[Elem; N]) -> u64 {
        let k = v.iter().position(|x| !x.is_zero()).expect("nonzero vector");
        debug_assert_eq!(v[k], Elem::ONE);
        let mut code = 0u64;
        for x in v[k + 1..].iter().rev() {
            code = code * self.order + x.0 as u64;
        }
        self.offsets[k] + code
    }

    pub fn index_of(&self, t: &FieldTower, v: [Elem; N]) -> Option<u64> {
        normalize(t, v).map(|w| self.index(&w))
    }

    pub fn points(&self) -> impl Iterator<Item = [Elem; N]> + '_ {
        (0..self.count).map(|i| self.point(i))
    }

    /// Calls `f` on every normalized point of the hyperplane `a · x = 0`,
    /// solving for the last nonzero coordinate of `a`.
    pub fn for_each_on_hyperplane(
        &self,
        t: &FieldTower,
        a: &[Elem; N],
        mut f: impl FnMut([Elem; N]),
    ) {
        let j = (0..N)
            .rev()
            .find(|&i| !a[i].is_zero())
            .expect("nonzero hyperplane");
        let neg_inv = t.neg(t.inv(a[j]).expect("nonzero"));
        // free coordinates: all but j, enumerated as points of PG(N-2)
        let sub_count = self.hyperplane_count();
        let free: Vec<usize> = (0..N).filter(|&i| i != j).collect();
        for idx in 0..sub_count {
            // the points of PG(N-1) with last coordinate zero index PG(N-2)
            let w = self.sub_point(idx);
            let mut v = [Elem::ZERO; N];
            let mut s = Elem::ZERO;
            for (slot, &i) in free.iter().enumerate() {
                v[i] = w[slot];
                s = t.add(s, t.mul(a[i], w[slot]));
            }
            v[j] = t.mul(neg_inv, s);
            f(normalize(t, v).expect("nonzero"));
        }
    }

    /// Point `idx` of PG(N-2), padded with a trailing zero.
    fn sub_point(&self, idx: u64) -> [Elem; N] {
        // blocks of PG(N-2) have sizes order^(N-2-k)
        let mut acc = 0u64;
        let mut k = 0;
        loop {
            let size = self.order.pow((N - 2 - k) as u32);
            if idx < acc + size {
                break;
            }
            acc += size;
            k += 1;
        }
        let mut rest = idx - acc;
        let mut v = [Elem::ZERO; N];
        v[k] = Elem::ONE;
        for x in v.iter_mut().take(N - 1).skip(k + 1) {
            *x = Elem((rest % self.order) as u32);
            rest /= self.order;
        }
        v
    }

    pub fn hyperplane_points(&self, t: &FieldTower, a: &[Elem; N]) -> Vec<[Elem; N]> {
        let mut out = Vec::with_capacity(self.hyperplane_count() as usize);
        self.for_each_on_hyperplane(t, a, |p| out.push(p));
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn index_roundtrip_and_counts() {
        let t = FieldTower::with_params(3, 1, 2).unwrap();
        let s = ProjSpace::<4>::new(9);
        assert_eq!(s.count(), 820);
        assert_eq!(s.hyperplane_count(), 91);
        for i in 0..s.count() {
            let p = s.point(i);
            assert_eq!(normalize(&t, p), Some(p));
            assert_eq!(s.index(&p), i);
        }
        assert_eq!(ProjSpace::<5>::new(9).count(), 7381);
    }

    #[test]
    fn hyperplane_enumeration_matches_filter() {
        let t = FieldTower::with_params(3, 1, 2).unwrap();
        let s = ProjSpace::<4>::new(9);
        for pi in (0..s.count()).step_by(37) {
            let a = s.point(pi);
            let got: HashSet<u64> = s
                .hyperplane_points(&t, &a)
                .iter()
                .map(|p| s.index(p))
                .collect();
            let want: HashSet<u64> = (0..s.count())
                .filter(|&i| dot(&t, &a, &s.point(i)).is_zero())
                .collect();
            assert_eq!(got.len(), 91);
            assert_eq!(got, want);
        }
    }

    #[test]
    fn normalization_is_idempotent_and_scaling_invariant() {
        let t = FieldTower::with_params(5, 1, 2).unwrap();
        let v = [Elem::ZERO, Elem(7), Elem(3), Elem(12)];
        let n = normalize(&t, v).unwrap();
        assert_eq!(normalize(&t, n), Some(n));
        for c in t.elements().skip(1) {
            assert_eq!(normalize(&t, v.map(|x| t.mul(c, x))), Some(n));
        }
        assert_eq!(normalize(&t, [Elem::ZERO; 3]), None);
    }
}
