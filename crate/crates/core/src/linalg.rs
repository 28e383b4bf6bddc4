//! Dense matrices over the top field of a tower.

use crate::gf::{Elem, FieldTower};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<Elem>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat {
            rows,
            cols,
            data: vec![Elem::ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Elem::ONE);
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Elem>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Mat {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Elem) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Mat { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Elem {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Elem) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[Elem] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn entries(&self) -> &[Elem] {
        &self.data
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    pub fn transpose(&self) -> Mat {
        Mat::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    pub fn map(&self, f: impl Fn(Elem) -> Elem) -> Mat {
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&x| f(x)).collect(),
        }
    }

    pub fn add(&self, t: &FieldTower, other: &Mat) -> Mat {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| t.add(a, b))
                .collect(),
        }
    }

    pub fn scale(&self, t: &FieldTower, c: Elem) -> Mat {
        self.map(|x| t.mul(c, x))
    }

    pub fn mul(&self, t: &FieldTower, other: &Mat) -> Mat {
        assert_eq!(self.cols, other.rows);
        Mat::from_fn(self.rows, other.cols, |i, j| {
            let mut acc = Elem::ZERO;
            for k in 0..self.cols {
                acc = t.add(acc, t.mul(self.get(i, k), other.get(k, j)));
            }
            acc
        })
    }

    /// Row vector times matrix.
    pub fn vec_mul(&self, t: &FieldTower, v: &[Elem]) -> Vec<Elem> {
        assert_eq!(v.len(), self.rows);
        (0..self.cols)
            .map(|j| {
                let mut acc = Elem::ZERO;
                for (i, &vi) in v.iter().enumerate() {
                    acc = t.add(acc, t.mul(vi, self.get(i, j)));
                }
                acc
            })
            .collect()
    }

    /// In-place reduced row echelon form; returns the pivot columns.
    pub fn rref(&mut self, t: &FieldTower) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..self.cols {
            if r == self.rows {
                break;
            }
            let Some(pr) = (r..self.rows).find(|&i| !self.get(i, c).is_zero()) else {
                continue;
            };
            if pr != r {
                for j in 0..self.cols {
                    self.data.swap(pr * self.cols + j, r * self.cols + j);
                }
            }
            let inv = t.inv(self.get(r, c)).expect("pivot is nonzero");
            for j in 0..self.cols {
                let v = t.mul(inv, self.get(r, j));
                self.set(r, j, v);
            }
            for i in 0..self.rows {
                if i == r {
                    continue;
                }
                let f = self.get(i, c);
                if f.is_zero() {
                    continue;
                }
                for j in 0..self.cols {
                    let v = t.sub(self.get(i, j), t.mul(f, self.get(r, j)));
                    self.set(i, j, v);
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }

    pub fn rank(&self, t: &FieldTower) -> usize {
        self.clone().rref(t).len()
    }

    pub fn det(&self, t: &FieldTower) -> Elem {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut m = self.clone();
        let mut det = Elem::ONE;
        for c in 0..n {
            let Some(pr) = (c..n).find(|&i| !m.get(i, c).is_zero()) else {
                return Elem::ZERO;
            };
            if pr != c {
                for j in 0..n {
                    m.data.swap(pr * n + j, c * n + j);
                }
                det = t.neg(det);
            }
            let piv = m.get(c, c);
            det = t.mul(det, piv);
            let inv = t.inv(piv).expect("pivot is nonzero");
            for i in c + 1..n {
                let f = t.mul(m.get(i, c), inv);
                if f.is_zero() {
                    continue;
                }
                for j in c..n {
                    let v = t.sub(m.get(i, j), t.mul(f, m.get(c, j)));
                    m.set(i, j, v);
                }
            }
        }
        det
    }

    pub fn inverse(&self, t: &FieldTower) -> Option<Mat> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut aug = Mat::from_fn(n, 2 * n, |i, j| {
            if j < n {
                self.get(i, j)
            } else if j - n == i {
                Elem::ONE
            } else {
                Elem::ZERO
            }
        });
        let pivots = aug.rref(t);
        if pivots.len() < n || pivots[n - 1] >= n {
            return None;
        }
        Some(Mat::from_fn(n, n, |i, j| aug.get(i, j + n)))
    }

    /// Basis of the right null space {x : M x = 0}.
    pub fn kernel(&self, t: &FieldTower) -> Vec<Vec<Elem>> {
        let mut m = self.clone();
        let pivots = m.rref(t);
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        free.iter()
            .map(|&f| {
                let mut v = vec![Elem::ZERO; self.cols];
                v[f] = Elem::ONE;
                for (r, &pc) in pivots.iter().enumerate() {
                    v[pc] = t.neg(m.get(r, f));
                }
                v
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_and_det_agree() {
        let t = FieldTower::with_params(5, 1, 2).unwrap();
        let mut seen_singular = false;
        for a in [0u32, 3, 7, 11] {
            for b in [1u32, 4, 19] {
                let m = Mat::from_rows(vec![
                    vec![Elem(a), Elem(b), Elem(2)],
                    vec![Elem(b), Elem(a + 1), Elem(0)],
                    vec![Elem(5), Elem(1), Elem(a)],
                ]);
                let d = m.det(&t);
                match m.inverse(&t) {
                    Some(inv) => {
                        assert!(!d.is_zero());
                        assert_eq!(m.mul(&t, &inv), Mat::identity(3));
                        assert_eq!(m.rank(&t), 3);
                    }
                    None => {
                        seen_singular = true;
                        assert!(d.is_zero());
                    }
                }
            }
        }
        let _ = seen_singular;
    }

    #[test]
    fn kernel_vectors_are_annihilated() {
        let t = FieldTower::with_params(3, 1, 2).unwrap();
        let m = Mat::from_rows(vec![
            vec![Elem(1), Elem(2), Elem(4)],
            vec![Elem(2), Elem(4), Elem(8)],
        ]);
        let k = m.kernel(&t);
        assert_eq!(k.len() + m.rank(&t), 3);
        for v in k {
            let mv = m.mul(&t, &Mat::from_fn(3, 1, |i, _| v[i]));
            assert!(mv.is_zero());
        }
    }
}
