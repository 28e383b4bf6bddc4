//! Threefold tensors in the cyclic model.
//!
//! A tensor over F_q of format n×n×n is stored as an n×n matrix `M` over
//! F_{q^n}; its multiplication is `T(x, y) = sum c_ij x^(q^i) y^(q^j)`.
//! Dickson matrices (linearised polynomials) are the fixed points of σ.

use std::collections::{HashSet, VecDeque};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf::{Elem, FieldTower};
use crate::linalg::Mat;

/// `f(x) = sum f_i x^(q^i)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LinearizedMap {
    pub coeffs: Vec<Elem>,
}

impl LinearizedMap {
    pub fn new(coeffs: Vec<Elem>) -> Self {
        LinearizedMap { coeffs }
    }

    pub fn identity(n: usize) -> Self {
        Self::scalar(Elem::ONE, n)
    }

    /// `x ↦ z x`.
    pub fn scalar(z: Elem, n: usize) -> Self {
        let mut coeffs = vec![Elem::ZERO; n];
        coeffs[0] = z;
        LinearizedMap { coeffs }
    }

    pub fn n(&self) -> usize {
        self.coeffs.len()
    }

    pub fn eval(&self, t: &FieldTower, x: Elem) -> Elem {
        let mut acc = Elem::ZERO;
        let mut xp = x;
        for &f in &self.coeffs {
            acc = t.add(acc, t.mul(f, xp));
            xp = t.frob(xp);
        }
        acc
    }

    /// `D[i][j] = f_{i-j}^(q^j)`, so that `phi(x) · D = phi(f(x))`.
    pub fn dickson(&self, t: &FieldTower) -> Mat {
        let n = self.n();
        Mat::from_fn(n, n, |i, j| {
            t.frobenius(self.coeffs[(i + n - j) % n], j as i64)
        })
    }

    /// Reads the map back off the first column of a Dickson matrix.
    pub fn from_dickson(d: &Mat) -> Self {
        LinearizedMap {
            coeffs: (0..d.rows()).map(|k| d.get(k, 0)).collect(),
        }
    }

    pub fn is_invertible(&self, t: &FieldTower) -> bool {
        !self.dickson(t).det(t).is_zero()
    }

    /// Kernel size by evaluating on every element.
    pub fn kernel_size(&self, t: &FieldTower) -> usize {
        t.elements().filter(|&x| self.eval(t, x).is_zero()).count()
    }

    pub fn random(t: &FieldTower, rng: &mut impl Rng) -> Self {
        let n = t.n() as usize;
        LinearizedMap {
            coeffs: (0..n).map(|_| random_elem(t, rng)).collect(),
        }
    }

    pub fn random_invertible(t: &FieldTower, rng: &mut impl Rng) -> Self {
        loop {
            let f = Self::random(t, rng);
            if f.is_invertible(t) {
                return f;
            }
        }
    }

    /// Coordinates over F_q of the coefficient vector (length n²).
    pub fn fq_vector(&self, t: &FieldTower) -> Vec<Elem> {
        self.coeffs.iter().flat_map(|&c| t.fq_coords(c)).collect()
    }
}

pub fn random_elem(t: &FieldTower, rng: &mut impl Rng) -> Elem {
    Elem(rng.gen_range(0..t.order()))
}

/// Dickson matrix of `f` together with its rank.
pub fn dickson_matrix(t: &FieldTower, f: &LinearizedMap) -> (Mat, usize) {
    let d = f.dickson(t);
    let r = d.rank(t);
    (d, r)
}

pub fn is_dickson(t: &FieldTower, m: &Mat) -> bool {
    sigma_map(t, &CyclicTensor::new(m.clone())).m == *m
}

/// A threefold tensor as an n×n matrix over F_{q^n}.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CyclicTensor {
    pub m: Mat,
}

#[derive(Serialize, Deserialize)]
struct TensorJson {
    q: u32,
    n: u32,
    entries: Vec<String>,
}

impl CyclicTensor {
    pub fn new(m: Mat) -> Self {
        assert_eq!(m.rows(), m.cols(), "cyclic tensors are square");
        CyclicTensor { m }
    }

    pub fn zero(n: usize) -> Self {
        CyclicTensor::new(Mat::zeros(n, n))
    }

    /// The tensor of multiplication in F_{q^n}: `E_00`.
    pub fn field(n: usize) -> Self {
        let mut m = Mat::zeros(n, n);
        m.set(0, 0, Elem::ONE);
        CyclicTensor::new(m)
    }

    /// `[[α, β], [γ, δ]]`.
    pub fn from_abcd(a: Elem, b: Elem, c: Elem, d: Elem) -> Self {
        CyclicTensor::new(Mat::from_rows(vec![vec![a, b], vec![c, d]]))
    }

    pub fn n(&self) -> usize {
        self.m.rows()
    }

    pub fn random(t: &FieldTower, rng: &mut impl Rng) -> Self {
        let n = t.n() as usize;
        CyclicTensor::new(Mat::from_fn(n, n, |_, _| random_elem(t, rng)))
    }

    pub fn to_json(&self, t: &FieldTower) -> String {
        let j = TensorJson {
            q: t.q(),
            n: self.n() as u32,
            entries: self.m.entries().iter().map(|&x| t.format(x)).collect(),
        };
        serde_json::to_string(&j).expect("plain data serializes")
    }

    pub fn from_json(t: &FieldTower, s: &str) -> Result<Self> {
        let j: TensorJson = serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        if j.q != t.q() || j.n != t.n() {
            return Err(Error::Parse(format!(
                "tensor over q={}, n={} does not match the tower",
                j.q, j.n
            )));
        }
        let n = j.n as usize;
        if j.entries.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                got: j.entries.len(),
            });
        }
        let vals = j
            .entries
            .iter()
            .map(|e| t.parse(e))
            .collect::<Result<Vec<_>>>()?;
        Ok(CyclicTensor::new(Mat::from_fn(n, n, |i, k| {
            vals[i * n + k]
        })))
    }
}

/// `sum γ_i phi(α_i)^T phi(β_i)`.
pub fn tensor_from_pure_sum(t: &FieldTower, terms: &[(Elem, Elem, Elem)]) -> CyclicTensor {
    let n = t.n() as usize;
    let mut m = Mat::zeros(n, n);
    for &(a, b, c) in terms {
        let term = Mat::from_fn(n, n, |i, j| {
            t.mul(c, t.mul(t.frobenius(a, i as i64), t.frobenius(b, j as i64)))
        });
        m = m.add(t, &term);
    }
    CyclicTensor::new(m)
}

pub fn bilinear_eval(t: &FieldTower, m: &CyclicTensor, x: Elem, y: Elem) -> Elem {
    let n = m.n();
    let xs: Vec<Elem> = (0..n).map(|i| t.frobenius(x, i as i64)).collect();
    let ys: Vec<Elem> = (0..n).map(|j| t.frobenius(y, j as i64)).collect();
    let mut acc = Elem::ZERO;
    for i in 0..n {
        for j in 0..n {
            acc = t.add(acc, t.mul(m.m.get(i, j), t.mul(xs[i], ys[j])));
        }
    }
    acc
}

/// `(M^σ)_ij = c_{i-1,j-1}^q`.
pub fn sigma_map(t: &FieldTower, m: &CyclicTensor) -> CyclicTensor {
    let n = m.n();
    CyclicTensor::new(Mat::from_fn(n, n, |i, j| {
        t.frob(m.m.get((i + n - 1) % n, (j + n - 1) % n))
    }))
}

/// `[M, M^σ, …, M^(σ^(n-1))]`.
pub fn sigma_orbit(t: &FieldTower, m: &CyclicTensor) -> Vec<CyclicTensor> {
    let mut out = vec![m.clone()];
    for _ in 1..m.n() {
        let next = sigma_map(t, out.last().expect("nonempty"));
        out.push(next);
    }
    out
}

/// `sum h_i M^(σ^i)` for precomputed σ-images.
pub fn combine(t: &FieldTower, images: &[CyclicTensor], h: &[Elem]) -> Mat {
    let n = images[0].n();
    let mut acc = Mat::zeros(n, n);
    for (img, &hi) in images.iter().zip(h) {
        if !hi.is_zero() {
            acc = acc.add(t, &img.m.scale(t, hi));
        }
    }
    acc
}

/// The map `h_z` with Dickson matrix `sum_j z^(q^j) M^(σ^j)`.
pub fn contraction(t: &FieldTower, m: &CyclicTensor, z: Elem) -> LinearizedMap {
    let images = sigma_orbit(t, m);
    contraction_from_images(t, &images, z)
}

pub(crate) fn contraction_from_images(
    t: &FieldTower,
    images: &[CyclicTensor],
    z: Elem,
) -> LinearizedMap {
    let n = images.len();
    let h: Vec<Elem> = (0..n).map(|j| t.frobenius(z, j as i64)).collect();
    LinearizedMap::from_dickson(&combine(t, images, &h))
}

/// An F_q-independent subset of a list of linearised maps.
pub fn fq_independent(t: &FieldTower, maps: &[LinearizedMap]) -> Vec<LinearizedMap> {
    let mut rows: Vec<Vec<Elem>> = Vec::new();
    let mut out = Vec::new();
    for f in maps {
        let v = f.fq_vector(t);
        let mut trial = rows.clone();
        trial.push(v.clone());
        if Mat::from_rows(trial).rank(t) > rows.len() {
            rows.push(v);
            out.push(f.clone());
        }
    }
    out
}

/// F_q-dimension of the span of a list of linearised maps.
pub fn fq_span_dim(t: &FieldTower, maps: &[LinearizedMap]) -> usize {
    if maps.is_empty() {
        return 0;
    }
    Mat::from_rows(maps.iter().map(|f| f.fq_vector(t)).collect()).rank(t)
}

/// F_q-basis of `C_3(T) = { h_z : z in F_{q^n} }`.
pub fn contraction_space(t: &FieldTower, m: &CyclicTensor) -> Vec<LinearizedMap> {
    let images = sigma_orbit(t, m);
    let gens: Vec<LinearizedMap> = t
        .fq_basis()
        .iter()
        .map(|&z| contraction_from_images(t, &images, z))
        .collect();
    fq_independent(t, &gens)
}

/// Whether two lists of maps span the same F_q-space.
pub fn same_fq_span(t: &FieldTower, a: &[LinearizedMap], b: &[LinearizedMap]) -> bool {
    let da = fq_span_dim(t, a);
    let db = fq_span_dim(t, b);
    let both: Vec<LinearizedMap> = a.iter().chain(b).cloned().collect();
    da == db && fq_span_dim(t, &both) == da
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum S3Gen {
    /// (12): transposition of the matrix.
    Tau1,
    /// (123).
    Tau2,
}

fn tau1(m: &CyclicTensor) -> CyclicTensor {
    CyclicTensor::new(m.m.transpose())
}

fn tau2(t: &FieldTower, m: &CyclicTensor) -> CyclicTensor {
    let n = m.n();
    CyclicTensor::new(Mat::from_fn(n, n, |i, j| {
        t.frobenius(m.m.get((j + n - i) % n, (n - i) % n), i as i64)
    }))
}

/// Applies the generators of a word left to right.
pub fn s3_apply(t: &FieldTower, word: &[S3Gen], m: &CyclicTensor) -> CyclicTensor {
    word.iter().fold(m.clone(), |acc, g| match g {
        S3Gen::Tau1 => tau1(&acc),
        S3Gen::Tau2 => tau2(t, &acc),
    })
}

/// One word for each element of Sym(3).
pub fn s3_words() -> [Vec<S3Gen>; 6] {
    use S3Gen::*;
    [
        vec![],
        vec![Tau1],
        vec![Tau2],
        vec![Tau2, Tau2],
        vec![Tau1, Tau2],
        vec![Tau2, Tau1],
    ]
}

#[derive(Clone, Debug)]
pub struct IsotopyTriple {
    pub f: LinearizedMap,
    pub g: LinearizedMap,
    pub h: LinearizedMap,
}

impl IsotopyTriple {
    pub fn identity(n: usize) -> Self {
        IsotopyTriple {
            f: LinearizedMap::identity(n),
            g: LinearizedMap::identity(n),
            h: LinearizedMap::identity(n),
        }
    }

    pub fn random(t: &FieldTower, rng: &mut impl Rng) -> Self {
        IsotopyTriple {
            f: LinearizedMap::random_invertible(t, rng),
            g: LinearizedMap::random_invertible(t, rng),
            h: LinearizedMap::random_invertible(t, rng),
        }
    }
}

/// `D_f M D_g^T`, the (f, g, 1) action.
pub fn apply_fg(t: &FieldTower, f: &LinearizedMap, g: &LinearizedMap, m: &Mat) -> Mat {
    f.dickson(t).mul(t, m).mul(t, &g.dickson(t).transpose())
}

/// `sum h_i M^(σ^i)`, the (1, 1, h) action.
pub fn apply_h(t: &FieldTower, h: &LinearizedMap, m: &CyclicTensor) -> CyclicTensor {
    CyclicTensor::new(combine(t, &sigma_orbit(t, m), &h.coeffs))
}

/// Applies (f, g, 1) and then (1, 1, h).
pub fn isotopy_apply(
    t: &FieldTower,
    triple: &IsotopyTriple,
    m: &CyclicTensor,
) -> Result<CyclicTensor> {
    for (name, map) in [('f', &triple.f), ('g', &triple.g), ('h', &triple.h)] {
        if !map.is_invertible(t) {
            return Err(Error::SingularIsotopyComponent(name));
        }
    }
    let fg = CyclicTensor::new(apply_fg(t, &triple.f, &triple.g, &m.m));
    Ok(apply_h(t, &triple.h, &fg))
}

/// Every nonzero contraction `h_z` is invertible. Scalars of F_q only
/// rescale `h_z`, so one z per F_q*-class suffices.
pub fn is_nonsingular_tensor(t: &FieldTower, m: &CyclicTensor) -> bool {
    if m.m.is_zero() {
        return false;
    }
    let images = sigma_orbit(t, m);
    projective_reps(t).all(|z| contraction_from_images(t, &images, z).is_invertible(t))
}

/// Representatives of F_{q^n}* / F_q*: the powers g^k for k below (q^n-1)/(q-1).
fn projective_reps(t: &FieldTower) -> impl Iterator<Item = Elem> + '_ {
    let count = (t.order() - 1) / (t.q() - 1);
    (0..count as u64).map(move |k| t.pow(t.primitive(), k))
}

/// Oracle: `T(x, y) = 0` forces `x = 0` or `y = 0`.
pub fn is_nonsingular_bilinear(t: &FieldTower, m: &CyclicTensor) -> bool {
    let reps: Vec<Elem> = projective_reps(t).collect();
    // T(cx, y) = c T(x, y) for c in F_q, so x runs over projective reps
    reps.iter().all(|&x| {
        t.elements()
            .skip(1)
            .all(|y| !bilinear_eval(t, m, x, y).is_zero())
    })
}

/// Normalized coefficient vectors: first nonzero entry equal to 1.
fn projective_vectors(t: &FieldTower, len: usize) -> Vec<Vec<Elem>> {
    let order = t.order() as u64;
    let total = order.pow(len as u32);
    let mut out = Vec::new();
    for code in 1..total {
        let mut c = code;
        let v: Vec<Elem> = (0..len)
            .map(|_| {
                let d = (c % order) as u32;
                c /= order;
                Elem(d)
            })
            .collect();
        if v.iter().find(|x| !x.is_zero()) == Some(&Elem::ONE) {
            out.push(v);
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BelRank {
    pub rank: usize,
    /// Some S₃-image had linearly dependent σ-images, so the
    /// linearised-polynomial reading of the minimisation does not apply.
    pub dependent_images: bool,
}

/// Minimum of `rank(sum h_i M'^(σ^i))` over the six S₃-images `M'` and all
/// invertible `h`, with `h` taken up to F_{q^n}*-scaling.
pub fn bel_rank(t: &FieldTower, m: &CyclicTensor) -> BelRank {
    let n = m.n();
    let hs: Vec<LinearizedMap> = projective_vectors(t, n)
        .into_iter()
        .map(LinearizedMap::new)
        .filter(|h| h.is_invertible(t))
        .collect();
    let mut best = n;
    let mut dependent = false;
    for word in s3_words() {
        let img = s3_apply(t, &word, m);
        let images = sigma_orbit(t, &img);
        let stacked = Mat::from_rows(images.iter().map(|x| x.m.entries().to_vec()).collect());
        if stacked.rank(t) < n {
            dependent = true;
        }
        for h in &hs {
            let r = combine(t, &images, &h.coeffs).rank(t);
            if r < best {
                best = r;
            }
            if best <= 1 {
                break;
            }
        }
    }
    BelRank {
        rank: best,
        dependent_images: dependent,
    }
}

/// `q^n - (n-1)(n-2) q^(n/2) - 5 n^(13/3)`, the BEL-rank inequality divided
/// through by `q^(n(n-2))`.
pub fn belrank_margin(n: u32, q: f64) -> f64 {
    let n_f = n as f64;
    q.powf(n_f) - (n_f - 1.0) * (n_f - 2.0) * q.powf(n_f / 2.0) - 5.0 * n_f.powf(13.0 / 3.0)
}

pub fn belrank_inequality_holds(n: u32, q: f64) -> bool {
    belrank_margin(n, q) > 0.0
}

/// Least real `q0 >= 2` beyond which the inequality holds.
pub fn belrank_qbound(n: u32) -> f64 {
    assert!(n >= 3, "the bound is stated for n >= 3");
    if belrank_inequality_holds(n, 2.0) {
        return 2.0;
    }
    let mut lo = 2.0;
    let mut hi = 4.0;
    while !belrank_inequality_holds(n, hi) {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if belrank_inequality_holds(n, mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Tensor rank over F_q by breadth-first search over sums of pure tensors.
/// Returns `None` when the rank exceeds `max_rank`.
pub fn tensor_rank_bruteforce(t: &FieldTower, m: &CyclicTensor, max_rank: usize) -> Option<usize> {
    if m.m.is_zero() {
        return Some(0);
    }
    let nz: Vec<Elem> = t.elements().skip(1).collect();
    let mut pure: HashSet<Mat> = HashSet::new();
    for &a in &nz {
        for &b in &nz {
            for &c in &nz {
                pure.insert(tensor_from_pure_sum(t, &[(a, b, c)]).m);
            }
        }
    }
    let pure: Vec<Mat> = pure.into_iter().collect();
    let n = m.n();
    let mut seen: HashSet<Mat> = HashSet::new();
    let mut frontier: VecDeque<Mat> = VecDeque::new();
    seen.insert(Mat::zeros(n, n));
    frontier.push_back(Mat::zeros(n, n));
    for r in 1..=max_rank {
        let mut next = VecDeque::new();
        while let Some(x) = frontier.pop_front() {
            for p in &pure {
                let y = x.add(t, p);
                if y == m.m {
                    return Some(r);
                }
                if seen.insert(y.clone()) {
                    next.push_back(y);
                }
            }
        }
        frontier = next;
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::{any, prop_assert, prop_assert_eq, proptest};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn f9() -> FieldTower {
        FieldTower::with_params(3, 1, 2).unwrap()
    }

    fn f27() -> FieldTower {
        FieldTower::with_params(3, 1, 3).unwrap()
    }

    #[test]
    fn dickson_of_identity_and_frobenius_minus_one() {
        let t = f9();
        let (d, r) = dickson_matrix(&t, &LinearizedMap::identity(2));
        assert_eq!((d, r), (Mat::identity(2), 2));
        let m1 = t.from_int(-1);
        let f = LinearizedMap::new(vec![m1, Elem::ONE]);
        let (d, r) = dickson_matrix(&t, &f);
        assert_eq!(
            d,
            Mat::from_rows(vec![vec![m1, Elem::ONE], vec![Elem::ONE, m1]])
        );
        assert_eq!(r, 1);
        let kernel: Vec<Elem> = t.elements().filter(|&x| f.eval(&t, x).is_zero()).collect();
        assert_eq!(kernel, t.base_elements());
    }

    #[test]
    fn dickson_action_on_cyclic_vectors() {
        let t = f27();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            let f = LinearizedMap::random(&t, &mut rng);
            let d = f.dickson(&t);
            for x in t.elements() {
                let phi: Vec<Elem> = (0..3).map(|i| t.frobenius(x, i)).collect();
                let fx = f.eval(&t, x);
                let want: Vec<Elem> = (0..3).map(|i| t.frobenius(fx, i)).collect();
                assert_eq!(d.vec_mul(&t, &phi), want);
            }
        }
    }

    #[test]
    fn dickson_determinant_lies_in_base() {
        let t = f27();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..50 {
            let d = LinearizedMap::random(&t, &mut rng).dickson(&t).det(&t);
            assert_eq!(t.frob(d), d);
        }
    }

    #[test]
    fn rank_plus_kernel_dimension() {
        // q^n = 27 and q^n = 81: every map is checked on the whole field
        for (p, e, n) in [(3, 1, 3), (3, 2, 2)] {
            let t = FieldTower::with_params(p, e, n).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(3);
            for _ in 0..60 {
                let mut f = LinearizedMap::random(&t, &mut rng);
                if rng.gen_bool(0.5) {
                    // force a kernel: f(x) = g(x)^q - g(x) tends to be singular
                    f.coeffs[0] = t.neg(t.frobenius(f.coeffs[1], -1));
                }
                let (_, r) = dickson_matrix(&t, &f);
                let k = f.kernel_size(&t);
                let kdim = (k as f64).log(t.q() as f64).round() as usize;
                assert_eq!(t.q().pow(kdim as u32) as usize, k);
                assert_eq!(r + kdim, n as usize);
                assert_eq!(f.is_invertible(&t), k == 1);
            }
        }
    }

    #[test]
    fn pure_sums() {
        let t = f9();
        let ones = tensor_from_pure_sum(&t, &[(Elem::ONE, Elem::ONE, Elem::ONE)]);
        assert!(ones.m.entries().iter().all(|&x| x == Elem::ONE));
        assert_eq!(bilinear_eval(&t, &ones, Elem::ONE, Elem::ONE), Elem::ONE);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..20 {
            let a = Elem(rng.gen_range(1..9));
            let b = Elem(rng.gen_range(1..9));
            let c = Elem(rng.gen_range(1..9));
            assert_eq!(tensor_from_pure_sum(&t, &[(a, b, c)]).m.rank(&t), 1);
        }
        assert!(tensor_from_pure_sum(&t, &[]).m.is_zero());
    }

    #[test]
    fn field_tensor_multiplies() {
        let t = f27();
        let e = CyclicTensor::field(3);
        for x in t.elements() {
            for y in t.elements().step_by(5) {
                assert_eq!(bilinear_eval(&t, &e, x, y), t.mul(x, y));
            }
            assert_eq!(
                bilinear_eval(
                    &t,
                    &CyclicTensor::random(&t, &mut ChaCha8Rng::seed_from_u64(x.0 as u64)),
                    Elem::ZERO,
                    x
                ),
                Elem::ZERO
            );
        }
    }

    #[test]
    fn sigma_rule_for_n2() {
        let t = f9();
        let [a, b, c, d] = [Elem(2), Elem(5), Elem(7), Elem(4)];
        let m = CyclicTensor::from_abcd(a, b, c, d);
        let s = sigma_map(&t, &m);
        assert_eq!(
            s,
            CyclicTensor::from_abcd(t.frob(d), t.frob(c), t.frob(b), t.frob(a))
        );
    }

    #[test]
    fn sigma_fixes_exactly_the_dickson_matrices() {
        let t = f9();
        let mut fixed = 0;
        for code in 0..9u32.pow(4) {
            let e = [code % 9, code / 9 % 9, code / 81 % 9, code / 729];
            let m = CyclicTensor::from_abcd(Elem(e[0]), Elem(e[1]), Elem(e[2]), Elem(e[3]));
            if sigma_map(&t, &m) == m {
                fixed += 1;
                let f = LinearizedMap::from_dickson(&m.m);
                assert_eq!(f.dickson(&t), m.m);
            }
        }
        assert_eq!(fixed, 81);
    }

    #[test]
    fn contraction_of_field_is_scalar_map() {
        let t = f9();
        let e = CyclicTensor::field(2);
        for z in t.elements() {
            let h = contraction(&t, &e, z);
            assert_eq!(h, LinearizedMap::scalar(z, 2));
            assert_eq!(
                h.dickson(&t),
                Mat::from_rows(vec![vec![z, Elem::ZERO], vec![Elem::ZERO, t.frob(z)]])
            );
        }
    }

    #[test]
    fn contraction_is_the_trace_adjoint() {
        // tr(z T(x, y)) = tr(h_z(x) y)
        let t = f27();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let m = CyclicTensor::random(&t, &mut rng);
        for _ in 0..30 {
            let z = random_elem(&t, &mut rng);
            let h = contraction(&t, &m, z);
            assert!(is_dickson(&t, &h.dickson(&t)));
            for _ in 0..10 {
                let x = random_elem(&t, &mut rng);
                let y = random_elem(&t, &mut rng);
                let lhs = t.trace(t.mul(z, bilinear_eval(&t, &m, x, y)));
                let rhs = t.trace(t.mul(h.eval(&t, x), y));
                assert_eq!(lhs, rhs);
            }
        }
    }

    #[test]
    fn generic_contraction_space_has_dimension_n() {
        let t = f27();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let m = CyclicTensor::random(&t, &mut rng);
        assert_eq!(contraction_space(&t, &m).len(), 3);
        assert!(contraction(&t, &m, Elem::ZERO)
            .coeffs
            .iter()
            .all(|c| c.is_zero()));
    }

    #[test]
    fn tensor_lies_in_span_of_its_sigma_images() {
        for t in [f9(), f27()] {
            let mut rng = ChaCha8Rng::seed_from_u64(7);
            for _ in 0..20 {
                let m = CyclicTensor::random(&t, &mut rng);
                let imgs = sigma_orbit(&t, &m);
                let rows: Vec<Vec<Elem>> = imgs.iter().map(|x| x.m.entries().to_vec()).collect();
                let base = Mat::from_rows(rows.clone()).rank(&t);
                let mut with = rows;
                with.push(m.m.entries().to_vec());
                assert_eq!(Mat::from_rows(with).rank(&t), base);
            }
        }
    }

    #[test]
    fn contraction_coordinates_have_frobenius_shape() {
        // in the basis of σ-images, h_z has coordinates (z, z^q, ...)
        for t in [f9(), f27()] {
            let n = t.n() as usize;
            let mut rng = ChaCha8Rng::seed_from_u64(8);
            let m = CyclicTensor::random(&t, &mut rng);
            let imgs = sigma_orbit(&t, &m);
            let a = Mat::from_rows(imgs.iter().map(|x| x.m.entries().to_vec()).collect());
            assert_eq!(a.rank(&t), n);
            for z in t.elements().skip(1).step_by(3) {
                let d = contraction(&t, &m, z).dickson(&t);
                // solve coords · A = d
                let mut aug = Mat::from_fn(n * n, n + 1, |r, c| {
                    if c < n {
                        a.get(c, r)
                    } else {
                        d.entries()[r]
                    }
                });
                aug.rref(&t);
                let coords: Vec<Elem> = (0..n).map(|i| aug.get(i, n)).collect();
                let want: Vec<Elem> = (0..n).map(|i| t.frobenius(z, i as i64)).collect();
                assert_eq!(coords, want);
            }
        }
    }

    #[test]
    fn s3_relations() {
        use S3Gen::*;
        for t in [f9(), f27()] {
            let mut rng = ChaCha8Rng::seed_from_u64(9);
            for _ in 0..100 {
                let m = CyclicTensor::random(&t, &mut rng);
                assert_eq!(s3_apply(&t, &[Tau1, Tau1], &m), m);
                assert_eq!(s3_apply(&t, &[Tau2, Tau2, Tau2], &m), m);
                assert_eq!(s3_apply(&t, &[Tau1, Tau2, Tau1, Tau2], &m), m);
            }
        }
    }

    #[test]
    fn tau2_on_pure_tensors_cycles_factors() {
        // (a, b, c) ↦ (c, a, b) up to the dual identification
        let t = f27();
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for _ in 0..10 {
            let m = tensor_from_pure_sum(
                &t,
                &[(
                    random_elem(&t, &mut rng),
                    random_elem(&t, &mut rng),
                    Elem::ONE,
                )],
            );
            assert!(s3_apply(&t, &[S3Gen::Tau2], &m).m.rank(&t) <= 1);
        }
    }

    #[test]
    fn isotopy_identity_and_errors() {
        let t = f9();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let m = CyclicTensor::random(&t, &mut rng);
        assert_eq!(
            isotopy_apply(&t, &IsotopyTriple::identity(2), &m).unwrap(),
            m
        );
        let mut bad = IsotopyTriple::identity(2);
        bad.g = LinearizedMap::new(vec![t.from_int(-1), Elem::ONE]);
        assert_eq!(
            isotopy_apply(&t, &bad, &m),
            Err(Error::SingularIsotopyComponent('g'))
        );
    }

    #[test]
    fn isotopy_invariants() {
        for t in [f9(), f27()] {
            let n = t.n() as usize;
            let mut rng = ChaCha8Rng::seed_from_u64(12);
            for _ in 0..20 {
                let m = CyclicTensor::random(&t, &mut rng);
                let f = LinearizedMap::random_invertible(&t, &mut rng);
                let g = LinearizedMap::random_invertible(&t, &mut rng);
                assert_eq!(apply_fg(&t, &f, &g, &m.m).rank(&t), m.m.rank(&t));
                let h = LinearizedMap::random_invertible(&t, &mut rng);
                let mh = apply_h(&t, &h, &m);
                assert!(same_fq_span(
                    &t,
                    &contraction_space(&t, &mh),
                    &contraction_space(&t, &m)
                ));
                // the bilinear map of the (1,1,h) image is h applied to T
                let x = random_elem(&t, &mut rng);
                let y = random_elem(&t, &mut rng);
                assert_eq!(
                    bilinear_eval(&t, &mh, x, y),
                    h.eval(&t, bilinear_eval(&t, &m, x, y))
                );
                let _ = n;
            }
        }
    }

    #[test]
    fn nonsingularity_examples() {
        let t = f9();
        assert!(is_nonsingular_tensor(&t, &CyclicTensor::field(2)));
        assert!(!is_nonsingular_tensor(
            &t,
            &CyclicTensor::new(Mat::identity(2))
        ));
        assert!(!is_nonsingular_tensor(&t, &CyclicTensor::zero(2)));
    }

    #[test]
    fn nonsingularity_is_an_isotopy_and_s3_invariant() {
        for t in [f9(), f27()] {
            let mut rng = ChaCha8Rng::seed_from_u64(13);
            for _ in 0..40 {
                let m = CyclicTensor::random(&t, &mut rng);
                let ns = is_nonsingular_tensor(&t, &m);
                assert_eq!(ns, is_nonsingular_bilinear(&t, &m));
                let tr = IsotopyTriple::random(&t, &mut rng);
                assert_eq!(
                    is_nonsingular_tensor(&t, &isotopy_apply(&t, &tr, &m).unwrap()),
                    ns
                );
                for w in s3_words() {
                    assert_eq!(is_nonsingular_tensor(&t, &s3_apply(&t, &w, &m)), ns);
                }
            }
        }
    }

    #[test]
    fn bel_rank_of_field_is_one() {
        for t in [f9(), f27()] {
            let n = t.n() as usize;
            assert_eq!(bel_rank(&t, &CyclicTensor::field(n)).rank, 1);
        }
    }

    #[test]
    fn qbound() {
        let b5 = belrank_qbound(5);
        assert!(b5 > 5.0 && b5 < 6.0, "{b5}");
        assert!(belrank_inequality_holds(5, 11.0));
        assert!(!belrank_inequality_holds(5, 5.0));
        let b3 = belrank_qbound(3);
        assert!(b3.is_finite() && belrank_inequality_holds(3, b3 + 1e-6));
    }

    #[test]
    fn tensor_rank_dominates_matrix_rank() {
        let t = FieldTower::with_params(2, 1, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        assert_eq!(
            tensor_rank_bruteforce(&t, &CyclicTensor::field(2), 4),
            Some(3)
        );
        for _ in 0..30 {
            let m = CyclicTensor::random(&t, &mut rng);
            let r = tensor_rank_bruteforce(&t, &m, 4).expect("2x2x2 tensors have rank at most 3");
            assert!(r >= m.m.rank(&t));
        }
    }

    #[test]
    fn json_roundtrip() {
        let t = f27();
        let m = CyclicTensor::random(&t, &mut ChaCha8Rng::seed_from_u64(15));
        let s = m.to_json(&t);
        assert!(s.starts_with("{\"q\":3,\"n\":3,\"entries\":["));
        assert_eq!(CyclicTensor::from_json(&t, &s).unwrap(), m);
    }

    proptest! {
        #[test]
        fn sigma_has_order_n(seed in any::<u64>()) {
            let t = f27();
            let m = CyclicTensor::random(&t, &mut ChaCha8Rng::seed_from_u64(seed));
            let mut x = m.clone();
            for _ in 0..3 {
                x = sigma_map(&t, &x);
            }
            prop_assert_eq!(x, m);
        }

        #[test]
        fn contractions_are_dickson(seed in any::<u64>(), z in 0u32..27) {
            let t = f27();
            let m = CyclicTensor::random(&t, &mut ChaCha8Rng::seed_from_u64(seed));
            let d = contraction(&t, &m, Elem(z)).dickson(&t);
            prop_assert!(is_dickson(&t, &d));
        }

        #[test]
        fn bilinear_is_additive(seed in any::<u64>(), x1 in 0u32..27, x2 in 0u32..27, y in 0u32..27) {
            let t = f27();
            let m = CyclicTensor::random(&t, &mut ChaCha8Rng::seed_from_u64(seed));
            let (x1, x2, y) = (Elem(x1), Elem(x2), Elem(y));
            let lhs = bilinear_eval(&t, &m, t.add(x1, x2), y);
            let rhs = t.add(bilinear_eval(&t, &m, x1, y), bilinear_eval(&t, &m, x2, y));
            prop_assert_eq!(lhs, rhs);
            prop_assert_eq!(bilinear_eval(&t, &m, y, t.add(x1, x2)),
                t.add(bilinear_eval(&t, &m, y, x1), bilinear_eval(&t, &m, y, x2)));
        }
    }
}
