//! Common zeros of Hermitian forms over F_{q²}: rank spectra of F_q-subspaces
//! of Hermitian matrices, the character-sum zero count, brute-force oracles
//! and the inclusion–exclusion count for a point of an S¹ surface.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geom::{Geometry, OrbitLabel, Polarity};
use crate::gf::{Elem, FieldTower};
use crate::linalg::Mat;

/// Square matrix with `M[i][j] = M[j][i]^q`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HermitianMatrix {
    m: Mat,
}

impl HermitianMatrix {
    pub fn new(t: &FieldTower, m: Mat) -> Result<Self> {
        if m.rows() != m.cols() {
            return Err(Error::DimensionMismatch {
                expected: m.rows(),
                got: m.cols(),
            });
        }
        for i in 0..m.rows() {
            for j in i..m.cols() {
                if m.get(i, j) != t.frob(m.get(j, i)) {
                    return Err(Error::NotHermitian);
                }
            }
        }
        Ok(HermitianMatrix { m })
    }

    pub fn diagonal(t: &FieldTower, d: &[Elem]) -> Result<Self> {
        Self::new(
            t,
            Mat::from_fn(
                d.len(),
                d.len(),
                |i, j| if i == j { d[i] } else { Elem::ZERO },
            ),
        )
    }

    pub fn dim(&self) -> usize {
        self.m.rows()
    }

    pub fn matrix(&self) -> &Mat {
        &self.m
    }

    pub fn rank(&self, t: &FieldTower) -> usize {
        self.m.rank(t)
    }

    /// A uniformly random Hermitian matrix of size `m`.
    pub fn random(t: &FieldTower, m: usize, rng: &mut impl rand::Rng) -> Self {
        let base = t.base_elements();
        let mut a = Mat::zeros(m, m);
        for i in 0..m {
            a.set(i, i, base[rng.gen_range(0..base.len())]);
            for j in i + 1..m {
                let x = Elem(rng.gen_range(0..t.order()));
                a.set(i, j, x);
                a.set(j, i, t.frob(x));
            }
        }
        HermitianMatrix { m: a }
    }
}

/// `Σ v_i M_ij v_j^q`, an element of F_q.
pub fn herm_eval(t: &FieldTower, h: &HermitianMatrix, v: &[Elem]) -> Result<Elem> {
    if v.len() != h.dim() {
        return Err(Error::DimensionMismatch {
            expected: h.dim(),
            got: v.len(),
        });
    }
    let vq: Vec<Elem> = v.iter().map(|&x| t.frob(x)).collect();
    Ok(eval_with_conj(t, &h.m, v, &vq))
}

fn eval_with_conj(t: &FieldTower, m: &Mat, v: &[Elem], vq: &[Elem]) -> Elem {
    let mut acc = Elem::ZERO;
    for (i, &vi) in v.iter().enumerate() {
        if vi.is_zero() {
            continue;
        }
        let mut row = Elem::ZERO;
        for (j, &wj) in vq.iter().enumerate() {
            row = t.add(row, t.mul(m.get(i, j), wj));
        }
        acc = t.add(acc, t.mul(vi, row));
    }
    acc
}

/// `counts[r]` = number of elements of rank r, the zero matrix included.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RankSpectrum {
    pub counts: Vec<u64>,
}

impl RankSpectrum {
    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

/// All F_q-combinations of `basis`, in lexicographic coefficient order.
fn combinations(t: &FieldTower, basis: &[HermitianMatrix]) -> Vec<Mat> {
    let m = basis.first().map_or(0, HermitianMatrix::dim);
    let base = t.base_elements();
    let q = base.len();
    let total = q.pow(basis.len() as u32);
    (0..total)
        .map(|mut code| {
            let mut acc = Mat::zeros(m, m);
            for b in basis {
                let c = base[code % q];
                code /= q;
                if !c.is_zero() {
                    acc = acc.add(t, &b.m.scale(t, c));
                }
            }
            acc
        })
        .collect()
}

pub fn rank_spectrum(t: &FieldTower, basis: &[HermitianMatrix]) -> Result<RankSpectrum> {
    let m = basis.first().map_or(0, HermitianMatrix::dim);
    if let Some(b) = basis.iter().find(|b| b.dim() != m) {
        return Err(Error::DimensionMismatch {
            expected: m,
            got: b.dim(),
        });
    }
    let mut counts = vec![0u64; m + 1];
    for (k, mat) in combinations(t, basis).iter().enumerate() {
        // only the all-zero coefficient vector (index 0) may give 0
        if k > 0 && mat.is_zero() {
            return Err(Error::DependentBasis);
        }
        counts[mat.rank(t)] += 1;
    }
    Ok(RankSpectrum { counts })
}

fn check_total(q: u64, d: usize, s: &RankSpectrum) -> Result<()> {
    let expected = q.pow(d as u32);
    if s.total() != expected {
        return Err(Error::InconsistentSpectrum {
            expected,
            got: s.total(),
        });
    }
    Ok(())
}

/// Number of common zeros in F_{q²}^m of a d-dimensional subspace:
/// `Σ_r (−1)^r A_r q^(2m−d−r)`.
pub fn zero_count_formula(q: u64, m: usize, d: usize, s: &RankSpectrum) -> Result<i128> {
    check_total(q, d, s)?;
    let q = q as i128;
    let mut num = 0i128;
    for (r, &a) in s.counts.iter().enumerate() {
        let sign = if r % 2 == 0 { 1 } else { -1 };
        num += sign * a as i128 * q.pow((2 * m - r) as u32);
    }
    // the exponent 2m−d−r can go negative termwise; the sum is divisible
    Ok(num / q.pow(d as u32))
}

/// `q^n + Σ_{r<n} (−1)^r A_r (q^(n−r) − (−1)^r)`, the other normalization.
pub fn zero_count_alt(q: u64, n: usize, d: usize, s: &RankSpectrum) -> Result<i128> {
    check_total(q, d, s)?;
    let q = q as i128;
    let mut acc = q.pow(n as u32);
    for (r, &a) in s.counts.iter().enumerate().take(n) {
        let sign = if r % 2 == 0 { 1 } else { -1 };
        acc += sign * a as i128 * (q.pow((n - r) as u32) - sign);
    }
    Ok(acc)
}

/// Vectors of F_{q²}^m vanishing on every form and on no exclusion.
pub fn brute_zero_count(
    t: &FieldTower,
    m: usize,
    forms: &[HermitianMatrix],
    exclusions: &[HermitianMatrix],
) -> Result<u64> {
    if let Some(b) = forms.iter().chain(exclusions).find(|b| b.dim() != m) {
        return Err(Error::DimensionMismatch {
            expected: m,
            got: b.dim(),
        });
    }
    let order = t.order() as u64;
    let total = order.pow(m as u32);
    Ok((0..total)
        .into_par_iter()
        .filter(|&code| {
            let mut c = code;
            let v: Vec<Elem> = (0..m)
                .map(|_| {
                    let x = Elem((c % order) as u32);
                    c /= order;
                    x
                })
                .collect();
            let vq: Vec<Elem> = v.iter().map(|&x| t.frob(x)).collect();
            forms
                .iter()
                .all(|h| eval_with_conj(t, &h.m, &v, &vq).is_zero())
                && exclusions
                    .iter()
                    .all(|h| !eval_with_conj(t, &h.m, &v, &vq).is_zero())
        })
        .count() as u64)
}

/// The four forms attached to `P = (1,0,0,ξ)`: two equations and the two
/// non-vanishing conditions `x^(q+1) ≠ y^(q+1)`, `z^(q+1) ≠ t^(q+1)`.
#[derive(Clone, Debug)]
pub struct PerpForms {
    pub xi: Elem,
    pub a: Elem,
    pub b: Elem,
    pub h: [HermitianMatrix; 4],
}

impl PerpForms {
    /// `A = 1 + ξ^(q+1)`, `B = (1 − ξ^(q+1)) i` with `i^q = −i`.
    pub fn from_xi(t: &FieldTower, xi: Elem) -> Result<Self> {
        let n = t.norm(xi);
        let a = t.add(Elem::ONE, n);
        let i = t
            .imaginary_unit()
            .ok_or(Error::EvenCharacteristicUnsupported)?;
        let b = t.mul(t.sub(Elem::ONE, n), i);
        if a.is_zero() || b.is_zero() {
            return Err(Error::DegenerateXi(format!(
                "{}: 1 + N(xi) or 1 - N(xi) vanishes",
                t.format(xi)
            )));
        }
        Self::from_parts(t, a, b, xi)
    }

    /// Same shape with free parameters: `a ∈ F_q`, `b^q = −b`.
    pub fn from_parts(t: &FieldTower, a: Elem, b: Elem, xi: Elem) -> Result<Self> {
        if !t.is_base(a) {
            return Err(Error::NotInBaseField(t.format(a)));
        }
        let z = Elem::ZERO;
        let two_xi = t.mul(t.from_int(2), xi);
        let h1 = Mat::from_rows(vec![
            vec![z, z, a, z],
            vec![z, z, z, two_xi],
            vec![a, z, z, z],
            vec![z, t.frob(two_xi), z, z],
        ]);
        let h2 = Mat::from_rows(vec![
            vec![z, z, b, z],
            vec![z, z, z, z],
            vec![t.frob(b), z, z, z],
            vec![z, z, z, z],
        ]);
        let one = Elem::ONE;
        let m1 = t.neg(one);
        let h = [
            HermitianMatrix::new(t, h1)?,
            HermitianMatrix::new(t, h2)?,
            HermitianMatrix::diagonal(t, &[z, z, one, m1])?,
            HermitianMatrix::diagonal(t, &[one, m1, z, z])?,
        ];
        if a.is_zero() || b.is_zero() {
            return Err(Error::DegenerateXi(format!(
                "{}: A or B is zero",
                t.format(xi)
            )));
        }
        Ok(PerpForms { xi, a, b, h })
    }

    pub fn subspace(&self, members: &[usize]) -> Vec<HermitianMatrix> {
        members.iter().map(|&i| self.h[i].clone()).collect()
    }
}

/// One subspace of the inclusion–exclusion.
#[derive(Clone, Debug, Serialize)]
pub struct SubspaceRow {
    pub name: String,
    pub spectrum: Vec<u64>,
    pub stated_spectrum: Option<Vec<u64>>,
    pub formula: i64,
    pub alt: i64,
    pub brute: u64,
    pub stated: i64,
}

#[derive(Clone, Debug, Serialize)]
pub struct PerpCountReport {
    pub q: u32,
    pub xi: String,
    pub a: String,
    pub b: String,
    pub rows: Vec<SubspaceRow>,
    /// `N₁₂₃₄ − N₁₂₃ − N₁₂₄ + N₁₂`, counted over vectors.
    pub n_vectors: i64,
    /// Direct count with the two exclusions.
    pub n_brute: u64,
    /// `n_vectors / (q−1)`.
    pub n: i64,
    pub closed_form: i64,
    pub in_s1: Option<bool>,
    /// `(q+1)·|P^⊥ ∩ S̃|` read off the geometry.
    pub bridge: Option<u64>,
    pub discrepancies: Vec<String>,
    pub pass: bool,
}

/// The displayed rank counts and closed forms, by subspace.
fn stated(q: i64, name: &str) -> (Option<Vec<u64>>, i64) {
    let q2 = q * q - 1;
    let u = |v: i64| v as u64;
    match name {
        "12" => (
            Some(vec![1, 0, u(q - 1), 0, u(q * (q - 1))]),
            1 + q2 * (q.pow(4) + q.pow(3) + q * q + 1),
        ),
        "123" | "124" => (
            Some(vec![
                1,
                0,
                u(2 * (q - 1)),
                u((q - 1).pow(2)),
                u(q * (q - 1).pow(2) + q * (q - 1)),
            ]),
            1 + q2 * (q.pow(3) + 2 * q * q + 1),
        ),
        _ => (None, 1 + 2 * q2 * (q + 1)),
    }
}

/// Closed form `(q²−1)(q³−3q−1)`.
pub fn perp_closed_form(q: i64) -> i64 {
    (q * q - 1) * (q.pow(3) - 3 * q - 1)
}

/// Spectra, formula values and brute-force counts for the four subspaces.
pub fn perp_counts(t: &FieldTower, forms: &PerpForms) -> Result<PerpCountReport> {
    let q = t.q() as u64;
    let subspaces: [(&str, &[usize]); 4] = [
        ("12", &[0, 1]),
        ("123", &[0, 1, 2]),
        ("124", &[0, 1, 3]),
        ("1234", &[0, 1, 2, 3]),
    ];
    let mut rows = Vec::new();
    let mut discrepancies = Vec::new();
    for (name, members) in subspaces {
        let basis = forms.subspace(members);
        let spectrum = rank_spectrum(t, &basis)?;
        let d = members.len();
        let formula = zero_count_formula(q, 4, d, &spectrum)? as i64;
        let alt = zero_count_alt(q, 4, d, &spectrum)? as i64;
        let brute = brute_zero_count(t, 4, &basis, &[])?;
        let (stated_spectrum, stated_value) = stated(q as i64, name);
        if formula != brute as i64 {
            discrepancies.push(format!("N{name}: formula {formula} vs brute force {brute}"));
        }
        if stated_spectrum
            .as_ref()
            .is_some_and(|s| *s != spectrum.counts)
        {
            discrepancies.push(format!(
                "N{name}: spectrum {:?} vs stated {:?}",
                spectrum.counts,
                stated_spectrum.as_ref().unwrap()
            ));
        }
        if stated_value != brute as i64 {
            discrepancies.push(format!(
                "N{name}: stated {stated_value} vs brute force {brute}"
            ));
        }
        rows.push(SubspaceRow {
            name: name.to_string(),
            spectrum: spectrum.counts,
            stated_spectrum,
            formula,
            alt,
            brute,
            stated: stated_value,
        });
    }
    let n_vectors = rows[3].formula - rows[1].formula - rows[2].formula + rows[0].formula;
    let n_brute = brute_zero_count(t, 4, &forms.subspace(&[0, 1]), &forms.subspace(&[2, 3]))?;
    if n_brute as i64 != n_vectors {
        discrepancies.push(format!(
            "inclusion-exclusion {n_vectors} vs direct count {n_brute}"
        ));
    }
    let n = n_vectors / (q as i64 - 1);
    let closed_form = perp_closed_form(q as i64);
    if n != closed_form {
        discrepancies.push(format!("N = {n} vs closed form {closed_form}"));
    }
    let pass = rows.iter().all(|r| r.formula == r.brute as i64)
        && n_brute as i64 == n_vectors
        && n == closed_form;
    Ok(PerpCountReport {
        q: t.q(),
        xi: t.format(forms.xi),
        a: t.format(forms.a),
        b: t.format(forms.b),
        rows,
        n_vectors,
        n_brute,
        n,
        closed_form,
        in_s1: None,
        bridge: None,
        discrepancies,
        pass,
    })
}

/// First ξ ∉ F_q with `(1,0,0,ξ)` on an S¹ surface and nonzero A, B.
pub fn default_xi(g: &Geometry) -> Result<Elem> {
    let t = g.tower();
    t.elements()
        .filter(|&x| !t.is_base(x))
        .find(|&x| {
            matches!(
                g.classify(&[Elem::ONE, Elem::ZERO, Elem::ZERO, x]),
                OrbitLabel::S1(_)
            ) && PerpForms::from_xi(t, x).is_ok()
        })
        .ok_or_else(|| Error::DegenerateXi(format!("no admissible xi at q={}", g.q())))
}

pub fn perp_count_pipeline(g: &Geometry, xi: Elem) -> Result<PerpCountReport> {
    let t = g.tower();
    if t.p() == 2 {
        return Err(Error::EvenCharacteristicUnsupported);
    }
    let forms = PerpForms::from_xi(t, xi)?;
    let mut report = perp_counts(t, &forms)?;
    let p = [Elem::ONE, Elem::ZERO, Elem::ZERO, xi];
    let label = g.classify(&p);
    report.in_s1 = Some(matches!(label, OrbitLabel::S1(_)));
    let on_surface = g
        .plane_points(&g.perp(&p, Polarity::Hermitian))
        .iter()
        .filter(|r| g.classify(r) == label)
        .count() as u64;
    let bridge = (g.q() as u64 + 1) * on_surface;
    if bridge as i64 != report.n {
        report
            .discrepancies
            .push(format!("(q+1)|P^perp ∩ S| = {bridge} vs N = {}", report.n));
    }
    report.bridge = Some(bridge);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::{prop_assert_eq, proptest, ProptestConfig};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn t3() -> FieldTower {
        FieldTower::for_q(3).unwrap()
    }

    /// Forms with A = 1, B = i at q=3, where no ξ gives both nonzero.
    fn generic3(t: &FieldTower) -> PerpForms {
        let i = t.imaginary_unit().unwrap();
        PerpForms::from_parts(t, Elem::ONE, i, i).unwrap()
    }

    #[test]
    fn eval_examples() {
        let t = t3();
        let id = HermitianMatrix::new(&t, Mat::identity(4)).unwrap();
        assert_eq!(
            herm_eval(&t, &id, &[Elem::ONE, Elem::ZERO, Elem::ZERO, Elem::ZERO]).unwrap(),
            Elem::ONE
        );
        assert_eq!(herm_eval(&t, &id, &[Elem::ZERO; 4]).unwrap(), Elem::ZERO);
        assert!(matches!(
            herm_eval(&t, &id, &[Elem::ONE]),
            Err(Error::DimensionMismatch { .. })
        ));
        let h3 = &generic3(&t).h[2];
        for v in [[1u32, 2, 3, 4], [0, 5, 7, 8], [4, 4, 2, 0]] {
            let v = v.map(Elem);
            let want = t.sub(t.norm(v[2]), t.norm(v[3]));
            assert_eq!(herm_eval(&t, h3, &v).unwrap(), want);
        }
        assert!(HermitianMatrix::new(&t, Mat::from_rows(vec![vec![Elem(3)]])).is_err());
    }

    #[test]
    fn pencil_spectra_q3() {
        let t = t3();
        let f = generic3(&t);
        assert_eq!(
            rank_spectrum(&t, &f.subspace(&[0, 1])).unwrap().counts,
            vec![1, 0, 2, 0, 6]
        );
        assert_eq!(
            rank_spectrum(&t, &f.subspace(&[0, 1, 2])).unwrap().counts,
            vec![1, 0, 4, 4, 18]
        );
        assert_eq!(
            rank_spectrum(&t, &f.subspace(&[0, 1, 3])).unwrap().counts,
            vec![1, 0, 4, 4, 18]
        );
        let one =
            rank_spectrum(&t, &[HermitianMatrix::new(&t, Mat::identity(4)).unwrap()]).unwrap();
        assert_eq!(one.counts, vec![1, 0, 0, 0, 2]);
        assert_eq!(
            rank_spectrum(&t, &[f.h[2].clone(), f.h[2].clone()]),
            Err(Error::DependentBasis)
        );
    }

    #[test]
    fn zero_count_examples() {
        let t = t3();
        let f = generic3(&t);
        let s = rank_spectrum(&t, &f.subspace(&[0, 1])).unwrap();
        assert_eq!(zero_count_formula(3, 4, 2, &s).unwrap(), 945);
        assert_eq!(
            brute_zero_count(&t, 4, &f.subspace(&[0, 1]), &[]).unwrap(),
            945
        );
        let id = HermitianMatrix::new(&t, Mat::identity(4)).unwrap();
        let s1 = rank_spectrum(&t, std::slice::from_ref(&id)).unwrap();
        assert_eq!(zero_count_formula(3, 4, 1, &s1).unwrap(), 2241);
        assert_eq!(brute_zero_count(&t, 4, &[id], &[]).unwrap(), 2241);
        let zero = RankSpectrum {
            counts: vec![1, 0, 0, 0, 0],
        };
        assert_eq!(zero_count_formula(3, 4, 0, &zero).unwrap(), 6561);
        assert_eq!(brute_zero_count(&t, 4, &[], &[]).unwrap(), 6561);
        assert_eq!(
            zero_count_formula(3, 4, 1, &zero),
            Err(Error::InconsistentSpectrum {
                expected: 3,
                got: 1
            })
        );
    }

    #[test]
    fn every_xi_degenerates_at_q3() {
        let t = t3();
        for x in t.elements().skip(1) {
            assert!(matches!(
                PerpForms::from_xi(&t, x),
                Err(Error::DegenerateXi(_))
            ));
        }
        let g = Geometry::new(3).unwrap();
        assert!(matches!(default_xi(&g), Err(Error::DegenerateXi(_))));
    }

    #[test]
    fn generic_q3_counts_match_brute_force() {
        let t = t3();
        let r = perp_counts(&t, &generic3(&t)).unwrap();
        assert!(r.rows.iter().all(|row| row.formula == row.brute as i64));
        assert_eq!(r.n_brute as i64, r.n_vectors);
        assert_eq!(r.rows[1].brute, 369);
        assert_eq!(r.rows[2].brute, 369);
    }

    #[test]
    fn pipeline_q5_closed_form() {
        let g = Geometry::new(5).unwrap();
        let xi = default_xi(&g).unwrap();
        let r = perp_count_pipeline(&g, xi).unwrap();
        assert_eq!(r.n, 2616);
        assert_eq!(r.n_vectors, 10464);
        assert_eq!(r.n_brute, 10464);
        assert_eq!(r.in_s1, Some(true));
        assert!(r.pass, "{:?}", r.discrepancies);
    }

    #[test]
    fn spectrum_is_basis_invariant() {
        let t = t3();
        let f = generic3(&t);
        let s = rank_spectrum(&t, &f.subspace(&[0, 1, 2])).unwrap();
        // (H1, H2, H3) -> (H1 + H3, 2 H2 + H1, H3)
        let two = t.from_int(2);
        let b1 = HermitianMatrix::new(&t, f.h[0].m.add(&t, &f.h[2].m)).unwrap();
        let b2 = HermitianMatrix::new(&t, f.h[1].m.scale(&t, two).add(&t, &f.h[0].m)).unwrap();
        let s2 = rank_spectrum(&t, &[b1, b2, f.h[2].clone()]).unwrap();
        assert_eq!(s, s2);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn formula_matches_brute_force(seed in 0u64..1_000_000, m in 1usize..4, d in 0usize..4) {
            let t = t3();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let basis: Vec<HermitianMatrix> = (0..d).map(|_| HermitianMatrix::random(&t, m, &mut rng)).collect();
            if let Ok(s) = rank_spectrum(&t, &basis) {
                prop_assert_eq!(s.total(), 3u64.pow(d as u32));
                let f = zero_count_formula(3, m, d, &s).unwrap();
                prop_assert_eq!(f, brute_zero_count(&t, m, &basis, &[]).unwrap() as i128);
            }
        }

        #[test]
        fn inclusion_exclusion_two_conditions(seed in 0u64..1_000_000) {
            let t = t3();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let h: Vec<HermitianMatrix> = (0..3).map(|_| HermitianMatrix::random(&t, 3, &mut rng)).collect();
            let z = |f: &[HermitianMatrix]| brute_zero_count(&t, 3, f, &[]).unwrap() as i64;
            let direct = brute_zero_count(&t, 3, &h[..1], &h[1..]).unwrap() as i64;
            let ie = z(&h[..1]) - z(&[h[0].clone(), h[1].clone()]) - z(&[h[0].clone(), h[2].clone()]) + z(&h);
            prop_assert_eq!(direct, ie);
        }
    }
}
