//! Fourfold tensors seen through their contraction pencil: q+1 points of
//! PG(3,q²) forming a subline, whose contraction spaces are Σ-lines.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::cyclic::{
    contraction_space, fq_span_dim, isotopy_apply, random_elem, IsotopyTriple, LinearizedMap,
};
use crate::error::{Error, Result};
use crate::geom::{Geometry, Point4, SigmaLine};
use crate::gf::{Elem, FieldTower};
use crate::linalg::Mat;

/// The pencil `{λS + μT : (λ:μ) ∈ PG(1,q)}`, points written `(α,β,γ,δ)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FourfoldTensor {
    pub s: Point4,
    pub t: Point4,
}

#[derive(Serialize, Deserialize)]
struct PencilJson {
    q: u32,
    s: Vec<String>,
    t: Vec<String>,
}

impl FourfoldTensor {
    pub fn new(s: Point4, t: Point4) -> Self {
        FourfoldTensor { s, t }
    }

    pub fn random(tw: &FieldTower, rng: &mut impl Rng) -> Self {
        let mut p = || std::array::from_fn(|_| random_elem(tw, rng));
        FourfoldTensor { s: p(), t: p() }
    }

    pub fn to_json(&self, g: &Geometry) -> String {
        let t = g.tower();
        let f = |p: &Point4| p.iter().map(|&x| t.format(x)).collect();
        serde_json::to_string(&PencilJson {
            q: g.q(),
            s: f(&self.s),
            t: f(&self.t),
        })
        .expect("plain data")
    }

    pub fn from_json(g: &Geometry, s: &str) -> Result<Self> {
        let j: PencilJson = serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        if j.q != g.q() {
            return Err(Error::Parse(format!(
                "pencil is over q={}, geometry over q={}",
                j.q,
                g.q()
            )));
        }
        let t = g.tower();
        let p = |v: &[String]| -> Result<Point4> {
            if v.len() != 4 {
                return Err(Error::DimensionMismatch {
                    expected: 4,
                    got: v.len(),
                });
            }
            Ok([
                t.parse(&v[0])?,
                t.parse(&v[1])?,
                t.parse(&v[2])?,
                t.parse(&v[3])?,
            ])
        };
        Ok(FourfoldTensor {
            s: p(&j.s)?,
            t: p(&j.t)?,
        })
    }

    /// Replaces `(S, T)` by `(aS + bT, cS + dT)` over F_q.
    pub fn recombine(&self, tw: &FieldTower, [a, b, c, d]: [Elem; 4]) -> Self {
        let mix = |x: Elem, y: Elem| -> Point4 {
            std::array::from_fn(|i| tw.add(tw.mul(x, self.s[i]), tw.mul(y, self.t[i])))
        };
        FourfoldTensor {
            s: mix(a, b),
            t: mix(c, d),
        }
    }

    /// Applies the same isotopism to both generators.
    pub fn isotope(&self, tw: &FieldTower, triple: &IsotopyTriple) -> Result<Self> {
        let act = |p: &Point4| -> Result<Point4> {
            let m = isotopy_apply(
                tw,
                triple,
                &crate::cyclic::CyclicTensor::from_abcd(p[0], p[1], p[2], p[3]),
            )?
            .m;
            Ok([m.get(0, 0), m.get(0, 1), m.get(1, 0), m.get(1, 1)])
        };
        Ok(FourfoldTensor {
            s: act(&self.s)?,
            t: act(&self.t)?,
        })
    }
}

/// The q+1 normalized points of the pencil, `T` first.
///
/// Only F_q-dependence of the generators is degenerate: isotopisms of the
/// third factor are merely F_q-linear and may make `S`, `T` proportional
/// over F_{q²}, in which case the points repeat.
pub fn fourfold_contractions(g: &Geometry, u: &FourfoldTensor) -> Result<Vec<Point4>> {
    let t = g.tower();
    let (Some(_), Some(tt)) = (g.normalize(u.s), g.normalize(u.t)) else {
        return Err(Error::DegeneratePencil);
    };
    let mut out = vec![tt];
    for &lam in t.base_elements() {
        let p: Point4 = std::array::from_fn(|i| t.add(u.s[i], t.mul(lam, u.t[i])));
        out.push(g.normalize(p).ok_or(Error::DegeneratePencil)?);
    }
    Ok(out)
}

pub fn fourfold_nonsingular(g: &Geometry, u: &FourfoldTensor) -> Result<bool> {
    Ok(fourfold_contractions(g, u)?
        .iter()
        .all(|p| g.classify(p).is_nonsingular()))
}

fn contraction_spaces(g: &Geometry, u: &FourfoldTensor) -> Result<Vec<Vec<LinearizedMap>>> {
    if !fourfold_nonsingular(g, u)? {
        return Err(Error::SingularFourfold);
    }
    let t = g.tower();
    Ok(fourfold_contractions(g, u)?
        .iter()
        .map(|p| contraction_space(t, &g.tensor(p)))
        .collect())
}

/// F_q-dimension of the joint span of the contraction spaces.
pub fn d_invariant(g: &Geometry, u: &FourfoldTensor) -> Result<usize> {
    let all: Vec<LinearizedMap> = contraction_spaces(g, u)?.into_iter().flatten().collect();
    Ok(fq_span_dim(g.tower(), &all))
}

/// A pencil of two non-Σ points on the extension of `line` whose subline
/// misses Σ.
pub fn same_line_pencil(g: &Geometry, line: &SigmaLine) -> Result<Option<FourfoldTensor>> {
    let ext = g.extended_line_points(line)?;
    let off: Vec<Point4> = ext.into_iter().filter(|p| !g.in_sigma(p)).collect();
    for (i, s) in off.iter().enumerate() {
        for t in &off[i + 1..] {
            let u = FourfoldTensor::new(*s, *t);
            if fourfold_contractions(g, &u)?.iter().all(|p| !g.in_sigma(p)) {
                return Ok(Some(u));
            }
        }
    }
    Ok(None)
}

/// First pencil with the requested d-invariant among `tries` seeded samples.
pub fn search_pencil(
    g: &Geometry,
    d: usize,
    rng: &mut impl Rng,
    tries: usize,
) -> Option<FourfoldTensor> {
    (0..tries).find_map(|_| {
        let u = FourfoldTensor::random(g.tower(), rng);
        match d_invariant(g, &u) {
            Ok(k) if k == d => Some(u),
            _ => None,
        }
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct RegulusReport {
    pub q: u32,
    pub pairwise_disjoint: bool,
    pub points: usize,
    pub unique_quadric: bool,
    /// Coefficients of `x_i x_j`, `i ≤ j`, in lexicographic order.
    pub quadric: Vec<String>,
    pub quadric_points: u64,
    pub nondegenerate: bool,
    pub hyperbolic: bool,
    pub disjoint_from_q0: bool,
    pub pass: bool,
}

fn quad_eval(t: &FieldTower, c: &[Elem], x: &[Elem]) -> Elem {
    let mut acc = Elem::ZERO;
    let mut k = 0;
    for i in 0..4 {
        for j in i..4 {
            acc = t.add(acc, t.mul(c[k], t.mul(x[i], x[j])));
            k += 1;
        }
    }
    acc
}

/// Nonzero vectors of F_q^4, one per projective point.
fn fq_points(t: &FieldTower) -> Vec<Vec<Elem>> {
    let base = t.base_elements();
    let q = base.len();
    (1..q.pow(4))
        .map(|mut code| {
            (0..4)
                .map(|_| {
                    let x = base[code % q];
                    code /= q;
                    x
                })
                .collect::<Vec<Elem>>()
        })
        .filter(|v| v.iter().find(|x| !x.is_zero()) == Some(&Elem::ONE))
        .collect()
}

/// Checks that the contraction sublines of a d=4 pencil form a regulus of
/// a hyperbolic quadric of Σ disjoint from Q₀.
pub fn regulus_quadric_check(g: &Geometry, u: &FourfoldTensor) -> Result<RegulusReport> {
    let t = g.tower();
    let spaces = contraction_spaces(g, u)?;
    let d = fq_span_dim(t, &spaces.concat());
    if d != 4 {
        return Err(Error::NotRankFour(d));
    }
    let pairwise_disjoint = spaces.iter().enumerate().all(|(i, a)| {
        spaces[i + 1..]
            .iter()
            .all(|b| fq_span_dim(t, &[a.clone(), b.clone()].concat()) == 4)
    });
    // Σ-points of every subline, as vectors of F_q^4
    let mut pts: Vec<Vec<Elem>> = Vec::new();
    for sp in &spaces {
        let (a, b) = (sp[0].fq_vector(t), sp[1].fq_vector(t));
        pts.push(b.clone());
        for &lam in t.base_elements() {
            pts.push(
                a.iter()
                    .zip(&b)
                    .map(|(&x, &y)| t.add(x, t.mul(lam, y)))
                    .collect(),
            );
        }
    }
    let monomials = Mat::from_rows(
        pts.iter()
            .map(|x| {
                let mut row = Vec::with_capacity(10);
                for i in 0..4 {
                    for j in i..4 {
                        row.push(t.mul(x[i], x[j]));
                    }
                }
                row
            })
            .collect(),
    );
    let kernel = monomials.kernel(t);
    let unique_quadric = kernel.len() == 1;
    let c = kernel
        .into_iter()
        .next()
        .unwrap_or_else(|| vec![Elem::ZERO; 10]);
    let all = fq_points(t);
    let quadric_points = all.iter().filter(|x| quad_eval(t, &c, x).is_zero()).count() as u64;
    let gram = {
        let mut m = Mat::zeros(4, 4);
        let mut k = 0;
        for i in 0..4 {
            for j in i..4 {
                if i == j {
                    m.set(i, i, t.mul(t.from_int(2), c[k]));
                } else {
                    m.set(i, j, c[k]);
                    m.set(j, i, c[k]);
                }
                k += 1;
            }
        }
        m
    };
    let nondegenerate = !gram.det(t).is_zero();
    let q = g.q() as u64;
    let hyperbolic = nondegenerate && quadric_points == (q + 1) * (q + 1);
    // Q₀ is the set of singular Dickson maps
    let disjoint_from_q0 = t.elements().all(|a| {
        t.elements().all(|b| {
            let f = LinearizedMap::new(vec![a, b]);
            if (a.is_zero() && b.is_zero()) || f.is_invertible(t) {
                return true;
            }
            !quad_eval(t, &c, &f.fq_vector(t)).is_zero()
        })
    });
    let pass = pairwise_disjoint && unique_quadric && hyperbolic && disjoint_from_q0;
    Ok(RegulusReport {
        q: g.q(),
        pairwise_disjoint,
        points: pts.len(),
        unique_quadric,
        quadric: c.iter().map(|&x| t.format(x)).collect(),
        quadric_points,
        nondegenerate,
        hyperbolic,
        disjoint_from_q0,
        pass,
    })
}

/// One seeded random equivalence move: an isotopism, or an F_q-basis
/// change of the pencil.
pub fn random_move(g: &Geometry, u: &FourfoldTensor, rng: &mut impl Rng) -> Result<FourfoldTensor> {
    let t = g.tower();
    if rng.gen_bool(0.5) {
        let triple = IsotopyTriple::random(t, rng);
        return u.isotope(t, &triple);
    }
    let base = t.base_elements();
    loop {
        let m: [Elem; 4] = std::array::from_fn(|_| base[rng.gen_range(0..base.len())]);
        let det = t.sub(t.mul(m[0], m[3]), t.mul(m[1], m[2]));
        if !det.is_zero() {
            return Ok(u.recombine(t, m));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn g3() -> Geometry {
        Geometry::new(3).unwrap()
    }

    fn external(g: &Geometry) -> SigmaLine {
        let i = g.tower().imaginary_unit().unwrap();
        SigmaLine {
            u: (Elem::ONE, Elem::ZERO),
            v: (i, Elem::ZERO),
        }
    }

    #[test]
    fn contractions_are_distinct_and_degenerate_pencils_fail() {
        let g = g3();
        let t = g.tower();
        let s = [Elem(1), Elem(1), Elem(0), Elem(1)];
        let u = FourfoldTensor::new(s, [Elem(0), Elem(1), Elem(3), Elem(5)]);
        let pts = fourfold_contractions(&g, &u).unwrap();
        assert_eq!(pts.len(), 4);
        let set: std::collections::HashSet<_> = pts.iter().collect();
        assert_eq!(set.len(), 4);
        let two = s.map(|x| t.mul(t.from_int(2), x));
        assert_eq!(
            fourfold_contractions(&g, &FourfoldTensor::new(s, two)),
            Err(Error::DegeneratePencil)
        );
        let w = s.map(|x| t.mul(Elem(5), x));
        let pts = fourfold_contractions(&g, &FourfoldTensor::new(s, w)).unwrap();
        assert!(pts.iter().all(|p| *p == pts[0]));
    }

    #[test]
    fn same_line_pencil_has_d2() {
        let g = g3();
        let u = same_line_pencil(&g, &external(&g)).unwrap().unwrap();
        assert!(fourfold_nonsingular(&g, &u).unwrap());
        assert_eq!(d_invariant(&g, &u).unwrap(), 2);
        assert_eq!(
            regulus_quadric_check(&g, &u).unwrap_err(),
            Error::NotRankFour(2)
        );
    }

    #[test]
    fn singular_pencils() {
        let g = g3();
        let q0 = g.q0_points()[0];
        let u = FourfoldTensor::new(q0, [Elem(1), Elem(1), Elem(0), Elem(1)]);
        assert!(!fourfold_nonsingular(&g, &u).unwrap());
        assert_eq!(d_invariant(&g, &u), Err(Error::SingularFourfold));
        let sig = g
            .sigma_points()
            .into_iter()
            .find(|p| !g.quadric(p).is_zero())
            .unwrap();
        let u = FourfoldTensor::new(sig, [Elem(0), Elem(1), Elem(3), Elem(5)]);
        assert!(!fourfold_nonsingular(&g, &u).unwrap());
    }

    #[test]
    fn nonsingular_contraction_sublines_are_external() {
        let g = g3();
        let t = g.tower();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut seen = 0;
        while seen < 20 {
            let u = FourfoldTensor::random(t, &mut rng);
            let Ok(spaces) = contraction_spaces(&g, &u) else {
                continue;
            };
            seen += 1;
            for sp in &spaces {
                assert_eq!(sp.len(), 2);
                for &lam in t.base_elements() {
                    for &mu in t.base_elements() {
                        if lam.is_zero() && mu.is_zero() {
                            continue;
                        }
                        let f = LinearizedMap::new(
                            (0..2)
                                .map(|k| {
                                    t.add(t.mul(lam, sp[0].coeffs[k]), t.mul(mu, sp[1].coeffs[k]))
                                })
                                .collect(),
                        );
                        assert!(f.is_invertible(t));
                    }
                }
            }
            let d = fq_span_dim(t, &spaces.concat());
            let all_equal = spaces
                .iter()
                .all(|sp| crate::cyclic::same_fq_span(t, sp, &spaces[0]));
            assert_eq!(d == 2, all_equal);
        }
    }

    #[test]
    fn d_invariant_is_stable_under_moves() {
        let g = g3();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for d in [2, 4] {
            let mut cur = search_pencil(&g, d, &mut rng, 100_000).expect("pencil");
            for _ in 0..30 {
                cur = random_move(&g, &cur, &mut rng).unwrap();
                assert_eq!(d_invariant(&g, &cur).unwrap(), d);
            }
        }
    }

    #[test]
    fn d4_search_and_regulus() {
        let g = g3();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let u = search_pencil(&g, 4, &mut rng, 100_000).expect("d=4 pencil");
        let r = regulus_quadric_check(&g, &u).unwrap();
        assert!(r.pass, "{r:?}");
        assert_eq!(r.points, 16);
        assert_eq!(r.quadric_points, 16);
        let back = FourfoldTensor::from_json(&g, &u.to_json(&g)).unwrap();
        assert_eq!(back, u);
    }

    #[test]
    fn pinned_witness() {
        let g = g3();
        let u =
            FourfoldTensor::from_json(&g, include_str!("../tests/fixtures/fourfold_d4_q3.json"))
                .unwrap();
        assert_eq!(d_invariant(&g, &u).unwrap(), 4);
        assert!(regulus_quadric_check(&g, &u).unwrap().pass);
    }
}
