//! Quasi-Hermitian surfaces: joins of the surfaces `S_ξ`, their plane
//! sections, and the `H² − 4Q^(q+1) = 0` varieties in any dimension.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{line_points, Geometry, LabelKind, OrbitLabel, Point4};
use crate::gf::{Elem, FieldTower};
use crate::linalg::Mat;
use crate::proj::{normalize, ProjSpace};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SurfaceSpec {
    Xi(Elem),
    /// `H ∖ H₂ = base ∪ H₁`.
    HminusH2,
    /// `H ∖ H₁ = base ∪ H₂`.
    HminusH1,
}

impl SurfaceSpec {
    pub fn format(&self, t: &FieldTower) -> String {
        match self {
            SurfaceSpec::Xi(x) => format!("xi:{}", t.format(*x)),
            SurfaceSpec::HminusH2 => "H-minus-H2".into(),
            SurfaceSpec::HminusH1 => "H-minus-H1".into(),
        }
    }

    pub fn parse(t: &FieldTower, s: &str) -> Result<Self> {
        match s {
            "H-minus-H2" => Ok(SurfaceSpec::HminusH2),
            "H-minus-H1" => Ok(SurfaceSpec::HminusH1),
            _ => match s.strip_prefix("xi:") {
                Some(x) => Ok(SurfaceSpec::Xi(t.parse(x)?)),
                None => Err(Error::Parse(format!("unknown surface spec {s:?}"))),
            },
        }
    }

    /// `ξ ↦ −ξ`; the H-specs are fixed.
    pub fn negate(&self, t: &FieldTower) -> Self {
        match self {
            SurfaceSpec::Xi(x) => SurfaceSpec::Xi(t.neg(*x)),
            other => *other,
        }
    }
}

/// A point set of PG(3,q²) stored as sorted point indices plus a bitmap.
#[derive(Clone)]
pub struct QHSet {
    pub q: u32,
    pub spec: String,
    members: Vec<u64>,
    bitmap: Vec<bool>,
}

impl fmt::Debug for QHSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "QHSet(q={}, {}, {} points)",
            self.q,
            self.spec,
            self.members.len()
        )
    }
}

#[derive(Serialize, Deserialize)]
struct QHSetJson {
    q: u32,
    spec: String,
    points: Vec<u64>,
}

impl QHSet {
    pub fn from_indices(q: u32, spec: String, total: u64, mut members: Vec<u64>) -> Self {
        members.sort_unstable();
        members.dedup();
        let mut bitmap = vec![false; total as usize];
        for &i in &members {
            bitmap[i as usize] = true;
        }
        QHSet {
            q,
            spec,
            members,
            bitmap,
        }
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn indices(&self) -> &[u64] {
        &self.members
    }

    #[inline]
    pub fn contains(&self, idx: u64) -> bool {
        self.bitmap[idx as usize]
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&QHSetJson {
            q: self.q,
            spec: self.spec.clone(),
            points: self.members.clone(),
        })
        .expect("plain data serializes")
    }

    pub fn from_json(g: &Geometry, s: &str) -> Result<Self> {
        let j: QHSetJson = serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        if j.q != g.q() {
            return Err(Error::Parse(format!(
                "set is over q={}, geometry over q={}",
                j.q,
                g.q()
            )));
        }
        if let Some(&bad) = j.points.iter().find(|&&i| i >= g.point_count()) {
            return Err(Error::Parse(format!("point index {bad} out of range")));
        }
        Ok(QHSet::from_indices(j.q, j.spec, g.point_count(), j.points))
    }
}

fn check_xi(g: &Geometry, x: Elem, side: &[Elem], spec: &SurfaceSpec) -> Result<()> {
    let t = g.tower();
    if !g.is_valid_xi(x) || x == Elem::ONE || x == t.neg(Elem::ONE) {
        return Err(Error::InvalidXi(t.format(x)));
    }
    if !side.contains(&x) {
        return Err(Error::WrongSide(spec.format(t)));
    }
    Ok(())
}

/// `base ∪ part(s1) ∪ part(s2)` with `s1` from the Z₁ side and `s2` from
/// the Z₂ side.
pub fn qh_join(g: &Geometry, s1: SurfaceSpec, s2: SurfaceSpec) -> Result<QHSet> {
    let t = g.tower();
    let (z1, z2) = g.zsets();
    match s1 {
        SurfaceSpec::Xi(x) => check_xi(g, x, &z1, &s1)?,
        SurfaceSpec::HminusH2 => {}
        SurfaceSpec::HminusH1 => return Err(Error::WrongSide(s1.format(t))),
    }
    match s2 {
        SurfaceSpec::Xi(x) => check_xi(g, x, &z2, &s2)?,
        SurfaceSpec::HminusH1 => {}
        SurfaceSpec::HminusH2 => return Err(Error::WrongSide(s2.format(t))),
    }
    let part = |spec: SurfaceSpec, label: OrbitLabel| match spec {
        SurfaceSpec::Xi(x) => label.xi() == Some(x),
        SurfaceSpec::HminusH2 => label == OrbitLabel::H1,
        SurfaceSpec::HminusH1 => label == OrbitLabel::H2,
    };
    let labels = g.labels()?;
    let members: Vec<u64> = labels
        .iter()
        .enumerate()
        .filter(|(_, &l)| matches!(l, OrbitLabel::Q0 | OrbitLabel::T) || part(s1, l) || part(s2, l))
        .map(|(i, _)| i as u64)
        .collect();
    let spec = format!("{}+{}", s1.format(t), s2.format(t));
    Ok(QHSet::from_indices(g.q(), spec, g.point_count(), members))
}

/// Every valid `(s1, s2)` pair at this q.
pub fn valid_spec_pairs(g: &Geometry) -> Vec<(SurfaceSpec, SurfaceSpec)> {
    let (z1, z2) = g.zsets();
    let side1: Vec<SurfaceSpec> = std::iter::once(SurfaceSpec::HminusH2)
        .chain(z1.into_iter().map(SurfaceSpec::Xi))
        .collect();
    let side2: Vec<SurfaceSpec> = std::iter::once(SurfaceSpec::HminusH1)
        .chain(z2.into_iter().map(SurfaceSpec::Xi))
        .collect();
    side1
        .iter()
        .flat_map(|&a| side2.iter().map(move |&b| (a, b)))
        .collect()
}

/// `(q²+1)(q³+1)`.
pub fn hermitian_surface_size(q: u64) -> u64 {
    (q * q + 1) * (q * q * q + 1)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SectionReport {
    pub q: u32,
    /// Section size → number of hyperplanes.
    pub sections: BTreeMap<u64, u64>,
    pub expected: Vec<u64>,
    pub pass: bool,
}

/// Sizes of all hyperplane sections of a point set given by a membership
/// bitmap over the points of `space`.
pub fn hyperplane_sections<const D: usize>(
    t: &FieldTower,
    space: &ProjSpace<D>,
    member: impl Fn(u64) -> bool + Sync,
) -> BTreeMap<u64, u64> {
    (0..space.count())
        .into_par_iter()
        .fold(BTreeMap::new, |mut acc: BTreeMap<u64, u64>, pi| {
            let plane = space.point(pi);
            let mut k = 0u64;
            space.for_each_on_hyperplane(t, &plane, |p| {
                if member(space.index(&p)) {
                    k += 1;
                }
            });
            *acc.entry(k).or_default() += 1;
            acc
        })
        .reduce(BTreeMap::new, |mut a, b| {
            for (k, v) in b {
                *a.entry(k).or_default() += v;
            }
            a
        })
}

/// Passes iff exactly the sizes `q³+1` and `q³+q²+1` occur.
pub fn two_intersection_check(g: &Geometry, k: &QHSet) -> SectionReport {
    let q = g.q() as u64;
    let sections = hyperplane_sections(g.tower(), g.space(), |i| k.contains(i));
    let expected = vec![q * q * q + 1, q * q * q + q * q + 1];
    let pass = sections.keys().copied().collect::<Vec<_>>() == expected;
    SectionReport {
        q: g.q(),
        sections,
        expected,
        pass,
    }
}

/// Number of lines through `p` contained in `k`.
pub fn lines_through_point_census(g: &Geometry, k: &QHSet, p: &Point4) -> Result<u64> {
    let pi = g.index(p);
    if !k.contains(pi) {
        return Err(Error::PointNotInSet);
    }
    let t = g.tower();
    let q2 = t.order() as u64;
    let full = k
        .indices()
        .par_iter()
        .filter(|&&r| r != pi)
        .filter(|&&r| {
            line_points(t, p, &g.point(r))
                .iter()
                .all(|x| k.contains(g.space().index(x)))
        })
        .count() as u64;
    // each contained line is reached once from each of its q² other points
    Ok(full / q2)
}

/// Invariants of a join used as isomorphism evidence.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Fingerprint {
    pub size: usize,
    pub sections: BTreeMap<u64, u64>,
    /// Orbit kind → sorted line counts at one point per label.
    pub lines: BTreeMap<String, Vec<u64>>,
}

pub fn fingerprint(g: &Geometry, k: &QHSet) -> Result<Fingerprint> {
    let mut reps: BTreeMap<OrbitLabel, Point4> = BTreeMap::new();
    for &i in k.indices() {
        let p = g.point(i);
        reps.entry(g.classify(&p)).or_insert(p);
    }
    let mut lines: BTreeMap<String, Vec<u64>> = BTreeMap::new();
    for (label, p) in reps {
        let n = lines_through_point_census(g, k, &p)?;
        lines
            .entry(label.kind().name().to_string())
            .or_default()
            .push(n);
    }
    for v in lines.values_mut() {
        v.sort_unstable();
    }
    Ok(Fingerprint {
        size: k.len(),
        sections: two_intersection_check(g, k).sections,
        lines,
    })
}

/// The variety `H² = 4 Q^(q+1)` in PG(D−1, q²) attached to a symmetric
/// bilinear form `b` and a semilinear involution `φ(u) = C u^q`, with
/// `Q(u) = b(u,u)/2` and `H(u) = b(u, φ(u))`.
pub struct BaerModel<'a, const D: usize> {
    t: &'a FieldTower,
    b: Mat,
    c: Mat,
    half: Elem,
}

impl<'a, const D: usize> BaerModel<'a, D> {
    pub fn new(t: &'a FieldTower, b: Mat, c: Mat) -> Result<Self> {
        if t.p() == 2 {
            return Err(Error::EvenCharacteristicUnsupported);
        }
        for m in [&b, &c] {
            if m.rows() != D || m.cols() != D {
                return Err(Error::DimensionMismatch {
                    expected: D,
                    got: m.rows(),
                });
            }
        }
        if b.transpose() != b || b.det(t).is_zero() {
            return Err(Error::Parse(
                "the bilinear form must be symmetric and nondegenerate".into(),
            ));
        }
        let half = t.inv(t.from_int(2)).expect("odd characteristic");
        Ok(BaerModel { t, b, c, half })
    }

    /// Canonical Baer subgeometry (coordinate-wise Frobenius) with form `b`.
    pub fn frobenius(t: &'a FieldTower, b: Mat) -> Result<Self> {
        Self::new(t, b, Mat::identity(D))
    }

    /// `x0 x1 + x2 x3 + …` with a trailing `x_{D−1}²` when D is odd.
    pub fn default_form(t: &FieldTower) -> Mat {
        let mut b = Mat::zeros(D, D);
        for k in 0..D / 2 {
            b.set(2 * k, 2 * k + 1, Elem::ONE);
            b.set(2 * k + 1, 2 * k, Elem::ONE);
        }
        if D % 2 == 1 {
            b.set(D - 1, D - 1, t.from_int(2));
        }
        b
    }

    pub fn phi(&self, u: &[Elem; D]) -> [Elem; D] {
        let uq = u.map(|x| self.t.frob(x));
        std::array::from_fn(|i| {
            let mut acc = Elem::ZERO;
            for j in 0..D {
                acc = self.t.add(acc, self.t.mul(self.c.get(i, j), uq[j]));
            }
            acc
        })
    }

    pub fn bilinear(&self, u: &[Elem; D], v: &[Elem; D]) -> Elem {
        let t = self.t;
        let mut acc = Elem::ZERO;
        for i in 0..D {
            if u[i].is_zero() {
                continue;
            }
            for j in 0..D {
                acc = t.add(acc, t.mul(self.b.get(i, j), t.mul(u[i], v[j])));
            }
        }
        acc
    }

    pub fn quadric(&self, u: &[Elem; D]) -> Elem {
        self.t.mul(self.half, self.bilinear(u, u))
    }

    pub fn hermitian(&self, u: &[Elem; D]) -> Elem {
        self.bilinear(u, &self.phi(u))
    }

    pub fn on_variety(&self, u: &[Elem; D]) -> bool {
        let t = self.t;
        let h = self.hermitian(u);
        t.mul(h, h) == t.mul(t.from_int(4), t.norm(self.quadric(u)))
    }

    pub fn in_sigma(&self, u: &[Elem; D]) -> bool {
        let n = normalize(self.t, *u).expect("nonzero");
        normalize(self.t, self.phi(&n)) == Some(n)
    }

    pub fn space(&self) -> ProjSpace<D> {
        ProjSpace::new(self.t.order())
    }

    /// Indices of the points of the variety.
    pub fn variety(&self) -> Vec<u64> {
        let s = self.space();
        (0..s.count())
            .into_par_iter()
            .filter(|&i| self.on_variety(&s.point(i)))
            .collect()
    }

    /// Union of the extended Σ-lines meeting `Q₀ = Σ ∩ {Q = 0}` in one or
    /// q+1 points.
    pub fn line_union(&self) -> Vec<u64> {
        let s = self.space();
        let t = self.t;
        let q = t.q() as usize;
        let sigma: Vec<[Elem; D]> = s.points().filter(|p| self.in_sigma(p)).collect();
        let mut seen: HashSet<(u64, u64)> = HashSet::new();
        let mut out: HashSet<u64> = HashSet::new();
        for (i, u) in sigma.iter().enumerate() {
            for v in &sigma[i + 1..] {
                let pts = line_points_d(t, u, v);
                let mut sig: Vec<u64> = pts
                    .iter()
                    .filter(|p| self.in_sigma(p))
                    .map(|p| s.index(p))
                    .collect();
                sig.sort_unstable();
                if !seen.insert((sig[0], sig[1])) {
                    continue;
                }
                debug_assert_eq!(sig.len(), q + 1);
                let on_q0 = pts
                    .iter()
                    .filter(|p| self.in_sigma(p) && self.quadric(p).is_zero())
                    .count();
                if on_q0 == 1 || on_q0 == q + 1 {
                    out.extend(pts.iter().map(|p| s.index(p)));
                }
            }
        }
        let mut v: Vec<u64> = out.into_iter().collect();
        v.sort_unstable();
        v
    }
}

/// The Dickson model of PG(3,q²): `Q = αδ − βγ`, `φ = ρ`.
pub fn dickson_model(t: &FieldTower) -> Result<BaerModel<'_, 4>> {
    let one = Elem::ONE;
    let m1 = t.neg(one);
    let mut b = Mat::zeros(4, 4);
    b.set(0, 3, one);
    b.set(3, 0, one);
    b.set(1, 2, m1);
    b.set(2, 1, m1);
    let mut c = Mat::zeros(4, 4);
    for i in 0..4 {
        c.set(i, 3 - i, one);
    }
    BaerModel::new(t, b, c)
}

fn line_points_d<const D: usize>(t: &FieldTower, u: &[Elem; D], v: &[Elem; D]) -> Vec<[Elem; D]> {
    let mut out = vec![normalize(t, *v).expect("nonzero")];
    for lam in t.elements() {
        let w: [Elem; D] = std::array::from_fn(|i| t.add(u[i], t.mul(lam, v[i])));
        out.push(normalize(t, w).expect("independent"));
    }
    out
}

/// Hyperplane section sizes of the standard Hermitian variety
/// `sum x_i^(q+1) = 0` of PG(D−1, q²).
pub fn hermitian_variety_sections<const D: usize>(t: &FieldTower) -> BTreeMap<u64, u64> {
    let s = ProjSpace::<D>::new(t.order());
    let member: Vec<bool> = s
        .points()
        .map(|p| {
            p.iter()
                .fold(Elem::ZERO, |acc, &x| t.add(acc, t.norm(x)))
                .is_zero()
        })
        .collect();
    hyperplane_sections(t, &s, |i| member[i as usize])
}

#[derive(Clone, Debug, Serialize)]
pub struct BaerVarietyReport {
    pub dimension: usize,
    pub q: u32,
    pub size: usize,
    pub sections: BTreeMap<u64, u64>,
    pub hermitian_sections: BTreeMap<u64, u64>,
    pub pass: bool,
}

/// Builds the variety in PG(D−1, q²) for the default form and compares its
/// hyperplane sections with those of the Hermitian variety.
pub fn baer_variety_report<const D: usize>(t: &FieldTower) -> Result<BaerVarietyReport> {
    let model = BaerModel::<D>::frobenius(t, BaerModel::<D>::default_form(t))?;
    let s = model.space();
    let v = model.variety();
    let mut member = vec![false; s.count() as usize];
    for &i in &v {
        member[i as usize] = true;
    }
    let sections = hyperplane_sections(t, &s, |i| member[i as usize]);
    let hermitian_sections = hermitian_variety_sections::<D>(t);
    let pass = sections.keys().eq(hermitian_sections.keys());
    Ok(BaerVarietyReport {
        dimension: D - 1,
        q: t.q(),
        size: v.len(),
        sections,
        hermitian_sections,
        pass,
    })
}

/// Points of the variety in the Dickson model equal `Q0 ∪ T ∪ Σ̃ ∪ D̃`.
pub fn delta_zero_labels(g: &Geometry) -> Result<Vec<u64>> {
    let labels = g.labels()?;
    Ok(labels
        .iter()
        .enumerate()
        .filter(|(_, l)| {
            matches!(
                l.kind(),
                LabelKind::Q0 | LabelKind::T | LabelKind::SigmaTilde | LabelKind::DTilde
            )
        })
        .map(|(i, _)| i as u64)
        .collect())
}

#[derive(Clone, Debug, Serialize)]
pub struct JoinReport {
    pub spec: String,
    pub size: usize,
    pub expected_size: u64,
    pub sections: SectionReport,
}

/// Plane sections of every valid join at once. Each plane is scanned a
/// single time and its points tallied by surface part, so the cost does not
/// grow with the number of joins.
pub fn all_join_sections(g: &Geometry) -> Result<Vec<JoinReport>> {
    let t = g.tower();
    let q = g.q() as u64;
    let pairs = valid_spec_pairs(g);
    let (z1, z2) = g.zsets();
    let xis: Vec<Elem> = z1.iter().chain(z2.iter()).copied().collect();
    // Part 0 is the common base, 1 and 2 are H₁ and H₂, then one per ξ.
    let slot = |spec: SurfaceSpec| match spec {
        SurfaceSpec::HminusH2 => 1,
        SurfaceSpec::HminusH1 => 2,
        SurfaceSpec::Xi(x) => 3 + xis.iter().position(|&y| y == x).expect("valid xi"),
    };
    let parts = 3 + xis.len();
    let part_of: Vec<u8> = g
        .labels()?
        .iter()
        .map(|l| match l {
            OrbitLabel::Q0 | OrbitLabel::T => 0,
            OrbitLabel::H1 => 1,
            OrbitLabel::H2 => 2,
            OrbitLabel::S1(x) | OrbitLabel::S2(x) => xis
                .iter()
                .position(|y| y == x)
                .map_or(u8::MAX, |i| 3 + i as u8),
            _ => u8::MAX,
        })
        .collect();
    let slots: Vec<(usize, usize)> = pairs.iter().map(|&(a, b)| (slot(a), slot(b))).collect();
    let space = g.space();
    let empty = || vec![BTreeMap::<u64, u64>::new(); slots.len()];
    let tallies = (0..space.count())
        .into_par_iter()
        .fold(empty, |mut acc, pi| {
            let mut counts = vec![0u64; parts];
            space.for_each_on_hyperplane(t, &space.point(pi), |p| {
                let c = part_of[space.index(&p) as usize];
                if c != u8::MAX {
                    counts[c as usize] += 1;
                }
            });
            for (m, &(a, b)) in acc.iter_mut().zip(&slots) {
                *m.entry(counts[0] + counts[a] + counts[b]).or_default() += 1;
            }
            acc
        })
        .reduce(empty, |mut a, b| {
            for (x, y) in a.iter_mut().zip(b) {
                for (k, v) in y {
                    *x.entry(k).or_default() += v;
                }
            }
            a
        });
    let mut totals = vec![0u64; parts];
    for &c in &part_of {
        if c != u8::MAX {
            totals[c as usize] += 1;
        }
    }
    let expected = vec![q * q * q + 1, q * q * q + q * q + 1];
    Ok(pairs
        .iter()
        .zip(&slots)
        .zip(tallies)
        .map(|((&(s1, s2), &(a, b)), sections)| {
            let pass = sections.keys().copied().collect::<Vec<_>>() == expected;
            JoinReport {
                spec: format!("{}+{}", s1.format(t), s2.format(t)),
                size: (totals[0] + totals[a] + totals[b]) as usize,
                expected_size: hermitian_surface_size(q),
                sections: SectionReport {
                    q: g.q(),
                    sections,
                    expected: expected.clone(),
                    pass,
                },
            }
        })
        .collect())
}

impl FromStr for SurfaceSpec {
    type Err = Error;

    /// Parses the H-specs only; ξ needs a tower, see [`SurfaceSpec::parse`].
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "H-minus-H2" => Ok(SurfaceSpec::HminusH2),
            "H-minus-H1" => Ok(SurfaceSpec::HminusH1),
            _ => Err(Error::Parse(format!("unknown surface spec {s:?}"))),
        }
    }
}
