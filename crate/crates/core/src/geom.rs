//! The geometry of PG(3,q²) seen through 2×2 cyclic tensors.
//!
//! A point `(α, β, γ, δ)` is the tensor `[[α, β], [γ, δ]]` up to scalars.
//! The quadric `Q = αδ − βγ`, the Hermitian form
//! `H = α^(q+1) − β^(q+1) − γ^(q+1) + δ^(q+1)` and the discriminant
//! `Δ = H² − 4Q^(q+1)` decide everything here: singularity, orbit labels,
//! plane sections. Only odd q is supported.

use std::collections::{BTreeMap, HashSet, VecDeque};
use std::fmt;

use rayon::prelude::*;
use serde::Serialize;

use crate::cyclic::{is_dickson, CyclicTensor, LinearizedMap};
use crate::error::{Error, Result};
use crate::gf::{prime_power, Elem, FieldTower, ModulusSpec, SquareClass};
use crate::linalg::Mat;
use crate::proj::{dot, normalize, ProjSpace};

pub type Point4 = [Elem; 4];
/// Dual coordinates `(a, b, c, d)` of the plane `aα + bβ + cγ + dδ = 0`.
pub type Plane4 = [Elem; 4];

/// Largest q for which whole-space censuses are run.
pub const MAX_CENSUS_Q: u32 = 13;
/// Largest q for which orbit BFS is run.
pub const MAX_BFS_Q: u32 = 5;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Forms {
    pub q: Elem,
    pub h: Elem,
    pub delta: Elem,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum LabelKind {
    Q0,
    SigmaTilde,
    T,
    QTilde,
    DTilde,
    H1,
    H2,
    S1,
    S2,
}

impl LabelKind {
    pub const ALL: [LabelKind; 9] = [
        LabelKind::Q0,
        LabelKind::SigmaTilde,
        LabelKind::T,
        LabelKind::QTilde,
        LabelKind::DTilde,
        LabelKind::H1,
        LabelKind::H2,
        LabelKind::S1,
        LabelKind::S2,
    ];

    pub fn name(self) -> &'static str {
        match self {
            LabelKind::Q0 => "Q0",
            LabelKind::SigmaTilde => "SigmaTilde",
            LabelKind::T => "T",
            LabelKind::QTilde => "QTilde",
            LabelKind::DTilde => "DTilde",
            LabelKind::H1 => "H1",
            LabelKind::H2 => "H2",
            LabelKind::S1 => "S1",
            LabelKind::S2 => "S2",
        }
    }

    pub fn is_nonsingular(self) -> bool {
        matches!(self, LabelKind::QTilde | LabelKind::H1 | LabelKind::S1)
    }

    /// Number of Q₀-tangent planes through a point of this kind.
    pub fn tangent_planes(self, q: u32) -> u32 {
        match self {
            LabelKind::Q0 => 2 * q + 1,
            LabelKind::SigmaTilde | LabelKind::T => q + 1,
            LabelKind::QTilde | LabelKind::S1 | LabelKind::H1 => 0,
            LabelKind::S2 | LabelKind::H2 => 2,
            LabelKind::DTilde => 1,
        }
    }
}

/// Orbit of a point under the stabiliser of Q₀. `S1`/`S2` carry ξ.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum OrbitLabel {
    Q0,
    SigmaTilde,
    T,
    QTilde,
    DTilde,
    H1,
    H2,
    S1(Elem),
    S2(Elem),
}

impl OrbitLabel {
    pub fn kind(self) -> LabelKind {
        match self {
            OrbitLabel::Q0 => LabelKind::Q0,
            OrbitLabel::SigmaTilde => LabelKind::SigmaTilde,
            OrbitLabel::T => LabelKind::T,
            OrbitLabel::QTilde => LabelKind::QTilde,
            OrbitLabel::DTilde => LabelKind::DTilde,
            OrbitLabel::H1 => LabelKind::H1,
            OrbitLabel::H2 => LabelKind::H2,
            OrbitLabel::S1(_) => LabelKind::S1,
            OrbitLabel::S2(_) => LabelKind::S2,
        }
    }

    pub fn xi(self) -> Option<Elem> {
        match self {
            OrbitLabel::S1(x) | OrbitLabel::S2(x) => Some(x),
            _ => None,
        }
    }

    pub fn is_nonsingular(self) -> bool {
        self.kind().is_nonsingular()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Polarity {
    Hermitian,
    Quadric,
}

/// A line of PG(3,q) inside Σ, given by two Dickson parameter pairs
/// `(a, b)` standing for the points `(a, b, b^q, a^q)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SigmaLine {
    pub u: (Elem, Elem),
    pub v: (Elem, Elem),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SigmaLineThrough {
    InSigma,
    Line(SigmaLine),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum SublineType {
    External,
    Tangent,
    Secant,
    Generator,
}

/// Exact counts per orbit label.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Counts {
    #[serde(rename = "Q0")]
    pub q0: u64,
    #[serde(rename = "SigmaTilde")]
    pub sigma_tilde: u64,
    #[serde(rename = "T")]
    pub t: u64,
    #[serde(rename = "QTilde")]
    pub q_tilde: u64,
    #[serde(rename = "DTilde")]
    pub d_tilde: u64,
    #[serde(rename = "H1")]
    pub h1: u64,
    #[serde(rename = "H2")]
    pub h2: u64,
    /// ξ-string → count.
    #[serde(rename = "S1")]
    pub s1: BTreeMap<String, u64>,
    #[serde(rename = "S2")]
    pub s2: BTreeMap<String, u64>,
}

impl Counts {
    pub fn add(&mut self, t: &FieldTower, label: OrbitLabel) {
        match label {
            OrbitLabel::Q0 => self.q0 += 1,
            OrbitLabel::SigmaTilde => self.sigma_tilde += 1,
            OrbitLabel::T => self.t += 1,
            OrbitLabel::QTilde => self.q_tilde += 1,
            OrbitLabel::DTilde => self.d_tilde += 1,
            OrbitLabel::H1 => self.h1 += 1,
            OrbitLabel::H2 => self.h2 += 1,
            OrbitLabel::S1(x) => *self.s1.entry(t.format(x)).or_default() += 1,
            OrbitLabel::S2(x) => *self.s2.entry(t.format(x)).or_default() += 1,
        }
    }

    pub fn merge(mut self, other: Counts) -> Counts {
        self.q0 += other.q0;
        self.sigma_tilde += other.sigma_tilde;
        self.t += other.t;
        self.q_tilde += other.q_tilde;
        self.d_tilde += other.d_tilde;
        self.h1 += other.h1;
        self.h2 += other.h2;
        for (k, v) in other.s1 {
            *self.s1.entry(k).or_default() += v;
        }
        for (k, v) in other.s2 {
            *self.s2.entry(k).or_default() += v;
        }
        self
    }

    pub fn kind_total(&self, kind: LabelKind) -> u64 {
        match kind {
            LabelKind::Q0 => self.q0,
            LabelKind::SigmaTilde => self.sigma_tilde,
            LabelKind::T => self.t,
            LabelKind::QTilde => self.q_tilde,
            LabelKind::DTilde => self.d_tilde,
            LabelKind::H1 => self.h1,
            LabelKind::H2 => self.h2,
            LabelKind::S1 => self.s1.values().sum(),
            LabelKind::S2 => self.s2.values().sum(),
        }
    }

    pub fn total(&self) -> u64 {
        LabelKind::ALL.iter().map(|&k| self.kind_total(k)).sum()
    }

    /// Points of the Hermitian surface `H = 0`.
    pub fn hermitian_section(&self) -> u64 {
        self.q0 + self.t + self.h1 + self.h2
    }

    /// Points of the quadric `Q = 0`.
    pub fn quadric_section(&self) -> u64 {
        self.q0 + self.t + self.q_tilde
    }

    /// Points of Σ.
    pub fn sigma_section(&self) -> u64 {
        self.q0 + self.sigma_tilde
    }

    /// `label,count` rows; surfaces appear as `S1[ξ]`.
    pub fn rows(&self) -> Vec<(String, u64)> {
        let mut out: Vec<(String, u64)> = vec![
            ("Q0".into(), self.q0),
            ("SigmaTilde".into(), self.sigma_tilde),
            ("T".into(), self.t),
            ("QTilde".into(), self.q_tilde),
            ("DTilde".into(), self.d_tilde),
            ("H1".into(), self.h1),
            ("H2".into(), self.h2),
        ];
        out.extend(self.s1.iter().map(|(k, &v)| (format!("S1[{k}]"), v)));
        out.extend(self.s2.iter().map(|(k, &v)| (format!("S2[{k}]"), v)));
        out
    }
}

/// One disagreement between a displayed plane-table entry and enumeration.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Erratum {
    pub q: u32,
    /// Orbit of the point P whose plane P^⊥ is tabulated.
    pub row: String,
    pub column: String,
    pub stated: i64,
    pub computed: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct CensusReport {
    pub q: u32,
    pub modulus: String,
    pub version: String,
    pub scope: String,
    pub counts: Counts,
    pub total: u64,
    pub errata: Vec<Erratum>,
}

impl CensusReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data serializes")
    }
}

/// PG(3,q²) with its forms, polarities and orbit classification.
pub struct Geometry {
    t: FieldTower,
    space: ProjSpace<4>,
    q: u32,
    two: Elem,
    four: Elem,
    half_exp: u64,
    q0_points: Vec<Point4>,
}

impl fmt::Debug for Geometry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Geometry(q={})", self.q)
    }
}

impl Geometry {
    pub fn new(q: u32) -> Result<Self> {
        let (p, e) = prime_power(q).ok_or(Error::NotPrimePower(q))?;
        Self::with_spec(&ModulusSpec::new(p, e, 2))
    }

    pub fn with_spec(spec: &ModulusSpec) -> Result<Self> {
        if spec.p == 2 {
            return Err(Error::EvenCharacteristicUnsupported);
        }
        if spec.n != 2 {
            return Err(Error::Parse(format!(
                "the PG(3,q^2) geometry needs n = 2, got {}",
                spec.n
            )));
        }
        let t = FieldTower::new(spec)?;
        let q = t.q();
        let mut g = Geometry {
            space: ProjSpace::new(t.order()),
            two: t.from_int(2),
            four: t.from_int(4),
            half_exp: q.div_ceil(2) as u64,
            q,
            t,
            q0_points: Vec::new(),
        };
        g.q0_points = g
            .sigma_points()
            .into_iter()
            .filter(|p| g.quadric(p).is_zero())
            .collect();
        Ok(g)
    }

    pub fn tower(&self) -> &FieldTower {
        &self.t
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn space(&self) -> &ProjSpace<4> {
        &self.space
    }

    pub fn point_count(&self) -> u64 {
        self.space.count()
    }

    pub fn point(&self, idx: u64) -> Point4 {
        self.space.point(idx)
    }

    pub fn index(&self, p: &Point4) -> u64 {
        self.space
            .index(&normalize(&self.t, *p).expect("nonzero point"))
    }

    pub fn normalize(&self, p: Point4) -> Option<Point4> {
        normalize(&self.t, p)
    }

    pub fn format_point(&self, p: &Point4) -> String {
        p.iter()
            .map(|&x| self.t.format(x))
            .collect::<Vec<_>>()
            .join(";")
    }

    pub fn parse_point(&self, s: &str) -> Result<Point4> {
        let parts: Vec<&str> = s.split(';').collect();
        if parts.len() != 4 {
            return Err(Error::Parse(format!(
                "point {s:?} needs four ';'-separated coordinates"
            )));
        }
        let mut p = [Elem::ZERO; 4];
        for (slot, part) in p.iter_mut().zip(parts) {
            *slot = self.t.parse(part)?;
        }
        self.normalize(p)
            .ok_or_else(|| Error::Parse("the zero vector is not a point".into()))
    }

    fn require_census_scale(&self) -> Result<()> {
        if self.q > MAX_CENSUS_Q {
            return Err(Error::UnsupportedScale(format!(
                "q = {} exceeds the census limit {MAX_CENSUS_Q}",
                self.q
            )));
        }
        Ok(())
    }

    pub fn quadric(&self, p: &Point4) -> Elem {
        let t = &self.t;
        t.sub(t.mul(p[0], p[3]), t.mul(p[1], p[2]))
    }

    pub fn hermitian(&self, p: &Point4) -> Elem {
        let t = &self.t;
        let n = |x| t.norm(x);
        t.add(t.sub(t.sub(n(p[0]), n(p[1])), n(p[2])), n(p[3]))
    }

    pub fn forms(&self, p: &Point4) -> Forms {
        let t = &self.t;
        let q = self.quadric(p);
        let h = self.hermitian(p);
        let delta = t.sub(t.mul(h, h), t.mul(self.four, t.norm(q)));
        Forms { q, h, delta }
    }

    /// `(δ^q, γ^q, β^q, α^q)`.
    pub fn rho(&self, p: &Point4) -> Point4 {
        let t = &self.t;
        [t.frob(p[3]), t.frob(p[2]), t.frob(p[1]), t.frob(p[0])]
    }

    pub fn in_sigma(&self, p: &Point4) -> bool {
        let n = self.normalize(*p).expect("nonzero point");
        self.normalize(self.rho(&n)) == Some(n)
    }

    pub fn perp(&self, p: &Point4, pol: Polarity) -> Plane4 {
        let t = &self.t;
        match pol {
            Polarity::Hermitian => [
                t.frob(p[0]),
                t.neg(t.frob(p[1])),
                t.neg(t.frob(p[2])),
                t.frob(p[3]),
            ],
            Polarity::Quadric => [p[3], t.neg(p[2]), t.neg(p[1]), p[0]],
        }
    }

    pub fn incident(&self, plane: &Plane4, p: &Point4) -> bool {
        dot(&self.t, plane, p).is_zero()
    }

    /// Normalized points of a plane.
    pub fn plane_points(&self, plane: &Plane4) -> Vec<Point4> {
        self.space.hyperplane_points(&self.t, plane)
    }

    /// `(a, b, b^q, a^q)`.
    pub fn dickson_point(&self, a: Elem, b: Elem) -> Point4 {
        [a, b, self.t.frob(b), self.t.frob(a)]
    }

    /// The (q+1)(q²+1) points of Σ, normalized.
    pub fn sigma_points(&self) -> Vec<Point4> {
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        for a in self.t.elements() {
            for b in self.t.elements() {
                if let Some(p) = self.normalize(self.dickson_point(a, b)) {
                    if seen.insert(p) {
                        out.push(p);
                    }
                }
            }
        }
        out.sort();
        out
    }

    pub fn q0_points(&self) -> &[Point4] {
        &self.q0_points
    }

    /// Tangent planes of Q₀: `perp(R)` for `R` in Q₀.
    pub fn tangent_planes(&self) -> Vec<Plane4> {
        self.q0_points
            .iter()
            .map(|r| self.perp(r, Polarity::Quadric))
            .collect()
    }

    pub fn tangent_plane_count(&self, p: &Point4) -> u32 {
        self.q0_points
            .iter()
            .filter(|r| self.incident(&self.perp(r, Polarity::Quadric), p))
            .count() as u32
    }

    pub fn is_square(&self, a: Elem) -> SquareClass {
        self.t.is_square_base(a).expect("odd q and a in F_q")
    }

    /// `ξ = H / (2 Q^((q+1)/2))`, defined when both `H` and `Q` are nonzero.
    pub fn xi(&self, f: &Forms) -> Option<Elem> {
        if f.h.is_zero() || f.q.is_zero() {
            return None;
        }
        let t = &self.t;
        let den = t.mul(self.two, t.pow(f.q, self.half_exp));
        Some(t.div(f.h, den).expect("nonzero"))
    }

    pub fn classify(&self, p: &Point4) -> OrbitLabel {
        let f = self.forms(p);
        if self.in_sigma(p) {
            return if f.q.is_zero() {
                OrbitLabel::Q0
            } else {
                OrbitLabel::SigmaTilde
            };
        }
        match (f.q.is_zero(), f.h.is_zero()) {
            (true, true) => OrbitLabel::T,
            (true, false) => OrbitLabel::QTilde,
            _ if f.delta.is_zero() => OrbitLabel::DTilde,
            (false, true) => match self.is_square(f.delta) {
                SquareClass::Square => OrbitLabel::H1,
                _ => OrbitLabel::H2,
            },
            (false, false) => {
                let xi = self.xi(&f).expect("H, Q nonzero");
                match self.is_square(f.delta) {
                    SquareClass::Square => OrbitLabel::S1(xi),
                    _ => OrbitLabel::S2(xi),
                }
            }
        }
    }

    pub fn tensor(&self, p: &Point4) -> CyclicTensor {
        CyclicTensor::from_abcd(p[0], p[1], p[2], p[3])
    }

    /// Labels of all points, by index.
    pub fn labels(&self) -> Result<Vec<OrbitLabel>> {
        self.require_census_scale()?;
        Ok((0..self.point_count())
            .into_par_iter()
            .map(|i| self.classify(&self.point(i)))
            .collect())
    }

    /// Points whose Δ-label disagrees with direct invertibility of every
    /// contraction `h_z`.
    pub fn nonsingularity_mismatches(&self) -> Result<Vec<u64>> {
        self.require_census_scale()?;
        Ok((0..self.point_count())
            .into_par_iter()
            .filter(|&i| {
                let p = self.point(i);
                self.classify(&p).is_nonsingular()
                    != crate::cyclic::is_nonsingular_tensor(&self.t, &self.tensor(&p))
            })
            .collect())
    }

    fn report(&self, scope: String, counts: Counts) -> CensusReport {
        CensusReport {
            q: self.q,
            modulus: self.t.spec().to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            scope,
            total: counts.total(),
            counts,
            errata: Vec::new(),
        }
    }

    pub fn count_points(&self, points: impl IntoParallelIterator<Item = Point4>) -> Counts {
        points
            .into_par_iter()
            .fold(Counts::default, |mut c, p| {
                c.add(&self.t, self.classify(&p));
                c
            })
            .reduce(Counts::default, Counts::merge)
    }

    pub fn orbit_census(&self) -> Result<CensusReport> {
        self.require_census_scale()?;
        let counts = (0..self.point_count())
            .into_par_iter()
            .fold(Counts::default, |mut c, i| {
                c.add(&self.t, self.classify(&self.point(i)));
                c
            })
            .reduce(Counts::default, Counts::merge);
        Ok(self.report("space".into(), counts))
    }

    /// `(Z₁, Z₂)`: the ξ with `ξ^(2(q−1)) = 1`, `ξ ≠ ±1`, split by whether
    /// `1 − 1/ξ²` is a square of F_q.
    pub fn zsets(&self) -> (Vec<Elem>, Vec<Elem>) {
        let t = &self.t;
        let mut z1 = Vec::new();
        let mut z2 = Vec::new();
        for x in t.elements().skip(1) {
            if !self.is_valid_xi(x) || x == Elem::ONE || x == t.neg(Elem::ONE) {
                continue;
            }
            let x2 = t.mul(x, x);
            let c = t.sub(Elem::ONE, t.inv(x2).expect("nonzero"));
            match self.is_square(c) {
                SquareClass::Square => z1.push(x),
                _ => z2.push(x),
            }
        }
        (z1, z2)
    }

    pub fn is_valid_xi(&self, x: Elem) -> bool {
        !x.is_zero() && self.t.pow(x, 2 * (self.q as u64 - 1)) == Elem::ONE
    }

    /// All points of `S_ξ : H = 2ξ Q^((q+1)/2)`, as indices.
    pub fn surface_points(&self, xi: Elem) -> Result<Vec<u64>> {
        if !self.is_valid_xi(xi) {
            return Err(Error::InvalidXi(self.t.format(xi)));
        }
        self.require_census_scale()?;
        let t = &self.t;
        let c = t.mul(self.two, xi);
        Ok((0..self.point_count())
            .into_par_iter()
            .filter(|&i| {
                let p = self.point(i);
                let rhs = t.mul(c, t.pow(self.quadric(&p), self.half_exp));
                self.hermitian(&p) == rhs
            })
            .collect())
    }

    /// The base locus `Q ∩ H` shared by all surfaces `S_ξ`.
    pub fn base_locus(&self) -> Result<Vec<u64>> {
        self.require_census_scale()?;
        Ok((0..self.point_count())
            .into_par_iter()
            .filter(|&i| {
                let p = self.point(i);
                self.quadric(&p).is_zero() && self.hermitian(&p).is_zero()
            })
            .collect())
    }

    pub fn sigma_line_through(&self, p: &Point4) -> SigmaLineThrough {
        if self.in_sigma(p) {
            return SigmaLineThrough::InSigma;
        }
        let r = self.rho(p);
        let t = &self.t;
        let at = |mu: Elem| -> (Elem, Elem) {
            let mq = t.frob(mu);
            (
                t.add(t.mul(mu, p[0]), t.mul(mq, r[0])),
                t.add(t.mul(mu, p[1]), t.mul(mq, r[1])),
            )
        };
        // μ ↦ μP + μ^q ρ(P) is F_q-linear and injective, so 1 and a
        // primitive element give independent Σ-points
        SigmaLineThrough::Line(SigmaLine {
            u: at(Elem::ONE),
            v: at(t.primitive()),
        })
    }

    fn dickson_independent(&self, l: &SigmaLine) -> bool {
        let t = &self.t;
        let rows = vec![
            [t.fq_coords(l.u.0), t.fq_coords(l.u.1)].concat(),
            [t.fq_coords(l.v.0), t.fq_coords(l.v.1)].concat(),
        ];
        Mat::from_rows(rows).rank(t) == 2
    }

    /// The q+1 Σ-points of a Σ-line.
    pub fn sigma_line_points(&self, l: &SigmaLine) -> Result<Vec<Point4>> {
        if !self.dickson_independent(l) {
            return Err(Error::DegenerateLine);
        }
        let t = &self.t;
        let base = t.base_elements();
        let mut pts: Vec<(Elem, Elem)> = vec![l.v];
        for &lam in base {
            pts.push((
                t.add(l.u.0, t.mul(lam, l.v.0)),
                t.add(l.u.1, t.mul(lam, l.v.1)),
            ));
        }
        Ok(pts
            .into_iter()
            .map(|(a, b)| {
                self.normalize(self.dickson_point(a, b))
                    .expect("independent")
            })
            .collect())
    }

    /// The q²+1 points of the extension of a Σ-line to PG(3,q²).
    pub fn extended_line_points(&self, l: &SigmaLine) -> Result<Vec<Point4>> {
        if !self.dickson_independent(l) {
            return Err(Error::DegenerateLine);
        }
        let u = self.dickson_point(l.u.0, l.u.1);
        let v = self.dickson_point(l.v.0, l.v.1);
        Ok(line_points(&self.t, &u, &v))
    }

    pub fn subline_type(&self, l: &SigmaLine) -> Result<SublineType> {
        let on_q0 = self
            .sigma_line_points(l)?
            .iter()
            .filter(|p| self.quadric(p).is_zero())
            .count();
        Ok(match on_q0 {
            0 => SublineType::External,
            1 => SublineType::Tangent,
            2 => SublineType::Secant,
            _ => SublineType::Generator,
        })
    }

    /// Classifies every point of the plane `P^⊥` (Hermitian polarity).
    pub fn plane_distribution(&self, p: &Point4) -> CensusReport {
        let plane = self.perp(p, Polarity::Hermitian);
        let counts = self.count_points(self.plane_points(&plane));
        self.report(format!("plane:perp({})", self.format_point(p)), counts)
    }

    /// First point in index order of every label kind present.
    pub fn representatives(&self) -> Result<Vec<(LabelKind, Point4)>> {
        self.require_census_scale()?;
        let mut out: Vec<(LabelKind, Point4)> = Vec::new();
        for i in 0..self.point_count() {
            let p = self.point(i);
            let k = self.classify(&p).kind();
            if !out.iter().any(|(kk, _)| *kk == k) {
                out.push((k, p));
                if out.len() == 9 {
                    break;
                }
            }
        }
        out.sort_by_key(|(k, _)| *k);
        Ok(out)
    }

    /// Compares the plane distribution of `p` with the displayed table row.
    pub fn compare_with_table(&self, p: &Point4, report: &CensusReport) -> Vec<Erratum> {
        let label = self.classify(p);
        let row = stated_row(label.kind(), self.q as i64);
        let c = &report.counts;
        let mut out = Vec::new();
        let mut push = |column: String, stated: i64, computed: u64| {
            if stated != computed as i64 {
                let e = Erratum {
                    q: self.q,
                    row: label.kind().name().into(),
                    column,
                    stated,
                    computed,
                };
                if !out.contains(&e) {
                    out.push(e);
                }
            }
        };
        let fixed = [
            (LabelKind::Q0, c.q0),
            (LabelKind::SigmaTilde, c.sigma_tilde),
            (LabelKind::T, c.t),
            (LabelKind::QTilde, c.q_tilde),
            (LabelKind::DTilde, c.d_tilde),
            (LabelKind::H1, c.h1),
            (LabelKind::H2, c.h2),
        ];
        for (i, (k, v)) in fixed.into_iter().enumerate() {
            push(k.name().into(), row.entries[i], v);
        }
        let own = label.xi().map(|x| self.t.format(x));
        let (z1, z2) = self.zsets();
        for (kind, zs, map, col) in [
            (LabelKind::S1, z1, &c.s1, row.entries[7]),
            (LabelKind::S2, z2, &c.s2, row.entries[8]),
        ] {
            for x in zs {
                let key = self.t.format(x);
                let v = map.get(&key).copied().unwrap_or(0);
                let is_own = label.kind() == kind && own.as_deref() == Some(key.as_str());
                let (name, stated) = match (is_own, row.own_surface) {
                    (true, Some(o)) => (format!("{} own", kind.name()), o),
                    (true, None) => (format!("{} own", kind.name()), col),
                    (false, _) if label.kind() == kind => (format!("{} other", kind.name()), col),
                    _ => (kind.name().to_string(), col),
                };
                push(name, stated, v);
            }
        }
        out
    }

    /// Plane tables for one representative of every orbit, each annotated
    /// with its disagreements with the displayed tables.
    pub fn plane_tables(&self) -> Result<Vec<(LabelKind, Point4, CensusReport)>> {
        let reps = self.representatives()?;
        Ok(reps
            .into_iter()
            .map(|(k, p)| {
                let mut r = self.plane_distribution(&p);
                r.errata = self.compare_with_table(&p, &r);
                (k, p, r)
            })
            .collect())
    }

    pub fn errata(&self) -> Result<Vec<Erratum>> {
        Ok(self
            .plane_tables()?
            .into_iter()
            .flat_map(|(_, _, r)| r.errata)
            .collect())
    }
}

/// Points of the line through `u` and `v`.
pub fn line_points(t: &FieldTower, u: &Point4, v: &Point4) -> Vec<Point4> {
    let mut out = vec![normalize(t, *v).expect("nonzero")];
    for lam in t.elements() {
        let w: Point4 = std::array::from_fn(|i| t.add(u[i], t.mul(lam, v[i])));
        out.push(normalize(t, w).expect("independent"));
    }
    out
}

/// A row of the displayed plane tables: entries for Q₀, Σ̃, T, Q̃, D̃, H₁,
/// H₂, each S̃ in S¹, each S̃ in S², plus a separate value for the point's
/// own surface where the table gives one.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StatedRow {
    pub entries: [i64; 9],
    pub own_surface: Option<i64>,
}

pub fn stated_row(kind: LabelKind, q: i64) -> StatedRow {
    let h = |x: i64| x / 2;
    let row = |entries, own_surface| StatedRow {
        entries,
        own_surface,
    };
    match kind {
        LabelKind::Q0 => row(
            [
                2 * q + 1,
                q * q - q,
                2 * (q * q - q),
                0,
                (q - 1) * (q * q - q),
                0,
                q * q * q - q * q,
                0,
                (q - 1) * q * q,
            ],
            None,
        ),
        LabelKind::SigmaTilde => {
            let s = h((q * q - q) * (q + 1));
            row(
                [
                    q + 1,
                    q * q,
                    0,
                    q * q - q,
                    (q * q - q) * (q + 1),
                    s,
                    s,
                    s,
                    s,
                ],
                None,
            )
        }
        LabelKind::T => {
            let s = h((q * q - q) * (q + 1));
            row(
                [
                    q + 1,
                    0,
                    q * q,
                    q * q - q,
                    (q * q - q) * (q + 1),
                    s,
                    s,
                    s,
                    s,
                ],
                None,
            )
        }
        LabelKind::S1 => {
            let a = h((q + 1) * (q * q - 2 * q - 1));
            let b = h((q - 1) * (q + 1) * (q + 1));
            row(
                [
                    0,
                    q + 1,
                    2 * (q + 1),
                    q * q - 2 * q - 1,
                    (q - 2) * (q + 1) * (q + 1),
                    a,
                    a + q * q,
                    a,
                    b,
                ],
                None,
            )
        }
        LabelKind::QTilde => {
            let a = h((q + 1) * (q * q - 2 * q - 1));
            let b = h((q - 1) * (q + 1) * (q + 1));
            row(
                [
                    0,
                    q + 1,
                    2 * (q + 1),
                    2 * (q * q - q) - 1,
                    (q - 1) * (q * q - q + 1),
                    a,
                    b,
                    a,
                    b,
                ],
                None,
            )
        }
        LabelKind::DTilde => {
            let a = q * h(q + 1) * h(q + 1);
            let b = h((q * q + 2 * q) * (q - 1));
            row(
                [
                    1,
                    q,
                    2 * q,
                    q * q - 2 * q,
                    q * q * q + q * q - q,
                    a,
                    b,
                    a,
                    b,
                ],
                None,
            )
        }
        LabelKind::H2 => {
            let a = h((q + 1) * (q - 1) * (q - 1));
            let b = h(((q + 1) * (q + 1) - 2) * (q - 1));
            row(
                [
                    2,
                    q - 1,
                    2 * (q - 1),
                    (q - 1) * (q - 1),
                    (q - 1) * (q - 1) * (q + 1),
                    a,
                    b + q * q,
                    a,
                    b,
                ],
                None,
            )
        }
        LabelKind::S2 => {
            let a = h((q - 1) * (q - 1) * (q + 1));
            let b = h(((q + 1) * (q + 1) - 2) * (q - 1));
            row(
                [
                    2,
                    q - 1,
                    2 * (q - 1),
                    (q - 1) * (q - 1),
                    (q - 1) * (q - 1) * (q + 1),
                    a,
                    b,
                    a,
                    b,
                ],
                Some(b + q * q),
            )
        }
        LabelKind::H1 => {
            let a = h((q + 1) * (q * q - 2 * q - 1));
            let b = h((q - 1) * (q + 1) * (q + 1));
            row(
                [
                    0,
                    q + 1,
                    2 * (q + 1),
                    q * q - 2 * q - 1,
                    (q - 2) * (q + 1) * (q + 1),
                    a + q * q,
                    b,
                    a + q * q,
                    a,
                ],
                None,
            )
        }
    }
}

/// A generator of the stabiliser of Q₀, acting on 2×2 matrices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Collineation {
    /// `M ↦ D_A^T M`.
    Left(Mat),
    /// `M ↦ M D_B`.
    Right(Mat),
    Transpose,
}

impl Collineation {
    pub fn apply(&self, t: &FieldTower, p: &Point4) -> Point4 {
        let m = Mat::from_rows(vec![vec![p[0], p[1]], vec![p[2], p[3]]]);
        let r = match self {
            Collineation::Left(a) => a.transpose().mul(t, &m),
            Collineation::Right(b) => m.mul(t, b),
            Collineation::Transpose => m.transpose(),
        };
        normalize(t, [r.get(0, 0), r.get(0, 1), r.get(1, 0), r.get(1, 1)])
            .expect("invertible action")
    }
}

impl Geometry {
    /// A small generating set of the invertible 2×2 Dickson matrices
    /// (a copy of GL(2,q)), found greedily in element order.
    pub fn dickson_gl2_generators(&self) -> Vec<Mat> {
        let t = &self.t;
        let q = self.q as usize;
        let target = (q * q - 1) * (q * q - q);
        let mut gens: Vec<Mat> = Vec::new();
        let mut group: HashSet<Mat> = HashSet::new();
        group.insert(Mat::identity(2));
        for a in t.elements() {
            for b in t.elements() {
                let d = LinearizedMap::new(vec![a, b]).dickson(t);
                if d.det(t).is_zero() || group.contains(&d) {
                    continue;
                }
                gens.push(d);
                group = closure(t, &gens);
                if group.len() == target {
                    return gens;
                }
            }
        }
        unreachable!("the invertible Dickson matrices form GL(2,q)")
    }

    pub fn group_generators(&self) -> Vec<Collineation> {
        let gl = self.dickson_gl2_generators();
        debug_assert!(gl.iter().all(|m| is_dickson(&self.t, m)));
        let mut out: Vec<Collineation> = gl.iter().cloned().map(Collineation::Left).collect();
        out.extend(gl.into_iter().map(Collineation::Right));
        out.push(Collineation::Transpose);
        out
    }

    /// Orbit of `seed` under the group generated by `gens`, as sorted indices.
    pub fn orbit_bfs(&self, seed: &Point4, gens: &[Collineation]) -> Result<Vec<u64>> {
        if self.q > MAX_BFS_Q {
            return Err(Error::UnsupportedScale(format!(
                "orbit BFS is limited to q <= {MAX_BFS_Q}"
            )));
        }
        let start = self.normalize(*seed).expect("nonzero point");
        let mut seen: HashSet<Point4> = HashSet::from([start]);
        let mut queue = VecDeque::from([start]);
        while let Some(p) = queue.pop_front() {
            for g in gens {
                let r = g.apply(&self.t, &p);
                if seen.insert(r) {
                    queue.push_back(r);
                }
            }
        }
        let mut out: Vec<u64> = seen.iter().map(|p| self.space.index(p)).collect();
        out.sort_unstable();
        Ok(out)
    }
}

fn closure(t: &FieldTower, gens: &[Mat]) -> HashSet<Mat> {
    let id = Mat::identity(2);
    let mut seen: HashSet<Mat> = HashSet::from([id.clone()]);
    let mut queue = VecDeque::from([id]);
    while let Some(m) = queue.pop_front() {
        for g in gens {
            let r = m.mul(t, g);
            if seen.insert(r.clone()) {
                queue.push_back(r);
            }
        }
    }
    seen
}
