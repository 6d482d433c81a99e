//! Exact Newton polyhedra.
//!
//! The Newton polyhedron of a germ is conv(support) + R^n_+. Facets are
//! found by exhaustive enumeration of n-subsets of the homogenized
//! generators {(1, s) : s in support} and the recession rays {(0, e_j)};
//! every computation is over arbitrary-precision integers, so the vertex
//! set, the compact-face lattice, and the Newton number are exact.

use std::collections::BTreeSet;

use itertools::Itertools;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::poly::{Expo, Germ, Q, Z};
use crate::{Error, Result};

/// One facet inequality <normal, x> >= offset of the polyhedron (the
/// coordinate inequalities x_j >= 0 appear here too when they are genuine
/// facets). Normals are primitive with non-negative entries.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Facet {
    pub normal: Vec<i64>,
    pub offset: i64,
}

/// A compact face of the polyhedron: a face whose supporting normal can be
/// chosen strictly positive.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Face {
    pub dim: usize,
    #[serde(serialize_with = "ser_expos")]
    pub vertex_set: Vec<Expo>,
    pub supporting_normal: Vec<i64>,
    #[serde(serialize_with = "ser_expos")]
    pub support_points: Vec<Expo>,
}

fn ser_expos<S: serde::Serializer>(v: &[Expo], s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for e in v {
        seq.serialize_element(&e.0)?;
    }
    seq.end()
}

/// The z1-free boundary vertices alpha_1..alpha_m and the componentwise
/// suprema (a_2,...,a_n) of their z2..zn exponents.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Z1ZeroVertexData {
    pub alphas: Vec<Expo>,
    pub a_sup: Vec<u32>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct NewtonPolyhedron {
    pub n: usize,
    #[serde(serialize_with = "ser_expos")]
    pub support: Vec<Expo>,
    #[serde(serialize_with = "ser_expos")]
    pub vertices: Vec<Expo>,
    pub facets: Vec<Facet>,
    pub compact_faces: Vec<Face>,
}

/// Newton polyhedron of a nonzero germ.
pub fn newton_polyhedron(f: &Germ) -> Result<NewtonPolyhedron> {
    if f.is_zero() {
        return Err(Error::InvalidInput(
            "Newton polyhedron of the zero polynomial is undefined".into(),
        ));
    }
    NewtonPolyhedron::from_support(f.n(), f.support())
}

impl NewtonPolyhedron {
    pub fn from_support(n: usize, support: Vec<Expo>) -> Result<Self> {
        assert!(n >= 1);
        let support: Vec<Expo> = support
            .into_iter()
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        assert!(support.iter().all(|e| e.len() == n));
        if support.is_empty() {
            return Err(Error::InvalidInput("empty support".into()));
        }
        let m = support.len();
        let gen_count = m + n;
        if binomial(gen_count, n) > 2_000_000 {
            return Err(Error::InvalidInput(format!(
                "support too large for exact hull enumeration ({m} points in dimension {n})"
            )));
        }

        // Homogenized generators: (1, s) for support points, (0, e_j) for rays.
        let gens: Vec<Vec<Z>> = support
            .iter()
            .map(|e| {
                std::iter::once(Z::one())
                    .chain(e.0.iter().map(|&b| Z::from(b)))
                    .collect()
            })
            .chain((0..n).map(|j| {
                (0..=n)
                    .map(|k| if k == j + 1 { Z::one() } else { Z::zero() })
                    .collect()
            }))
            .collect();

        // Candidate facet normals from n-subsets of generators.
        let mut facet_vectors: BTreeSet<Vec<Z>> = BTreeSet::new();
        for subset in (0..gen_count).combinations(n) {
            let rows: Vec<&Vec<Z>> = subset.iter().map(|&i| &gens[i]).collect();
            let Some(a) = cross_null(&rows, n) else {
                continue;
            };
            // Orient so every generator is on the non-negative side.
            let mut pos = false;
            let mut neg = false;
            for g in &gens {
                if pos && neg {
                    break;
                }
                let d = dot(&a, g);
                if d.is_positive() {
                    pos = true;
                } else if d.is_negative() {
                    neg = true;
                }
            }
            if pos && neg {
                continue;
            }
            let a: Vec<Z> = if neg { a.iter().map(|x| -x).collect() } else { a };
            // Exclude the hyperplane-at-infinity x0 >= 0.
            if a.iter().skip(1).all(|x| x.is_zero()) {
                continue;
            }
            // Facet iff the contact set spans an n-dimensional subspace.
            let contact: Vec<&Vec<Z>> = gens.iter().filter(|g| dot(&a, g).is_zero()).collect();
            if rank(&contact, n + 1) == n {
                facet_vectors.insert(primitive(a));
            }
        }

        let mut facets: Vec<Facet> = Vec::new();
        let mut contacts: Vec<BTreeSet<usize>> = Vec::new();
        for a in &facet_vectors {
            facets.push(Facet {
                normal: a[1..]
                    .iter()
                    .map(|x| {
                        x.to_i64()
                            .ok_or_else(|| Error::Overflow("facet normal exceeds i64".into()))
                    })
                    .collect::<Result<_>>()?,
                offset: (-&a[0])
                    .to_i64()
                    .ok_or_else(|| Error::Overflow("facet offset exceeds i64".into()))?,
            });
            contacts.push(
                gens.iter()
                    .enumerate()
                    .filter(|(_, g)| dot(a, g).is_zero())
                    .map(|(i, _)| i)
                    .collect(),
            );
        }

        // Face lattice: contact sets are closed under intersection.
        let mut closed: BTreeSet<BTreeSet<usize>> = contacts.iter().cloned().collect();
        let mut work: Vec<BTreeSet<usize>> = closed.iter().cloned().collect();
        while let Some(c) = work.pop() {
            for seed in &contacts {
                let inter: BTreeSet<usize> = c.intersection(seed).cloned().collect();
                if !inter.is_empty() && closed.insert(inter.clone()) {
                    work.push(inter);
                }
            }
        }

        let mut compact_faces: Vec<Face> = Vec::new();
        for c in &closed {
            if c.iter().any(|&i| i >= m) {
                continue; // a recession ray lies on the face
            }
            let pts: Vec<Expo> = c.iter().map(|&i| support[i].clone()).collect();
            let homog: Vec<&Vec<Z>> = c.iter().map(|&i| &gens[i]).collect();
            let dim = rank(&homog, n + 1) - 1;
            let mut normal_sum = vec![Z::zero(); n];
            for (fi, contact) in contacts.iter().enumerate() {
                if c.is_subset(contact) {
                    for (k, v) in facets[fi].normal.iter().enumerate() {
                        normal_sum[k] += Z::from(*v);
                    }
                }
            }
            let normal_sum = primitive(normal_sum);
            debug_assert!(
                normal_sum.iter().all(|x| x.is_positive()),
                "compact face without strictly positive normal"
            );
            compact_faces.push(Face {
                dim,
                vertex_set: Vec::new(), // filled below
                supporting_normal: normal_sum
                    .iter()
                    .map(|x| {
                        x.to_i64()
                            .ok_or_else(|| Error::Overflow("face normal exceeds i64".into()))
                    })
                    .collect::<Result<_>>()?,
                support_points: pts,
            });
        }

        let vertices: Vec<Expo> = compact_faces
            .iter()
            .filter(|f| f.dim == 0)
            .flat_map(|f| f.support_points.iter().cloned())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        for face in &mut compact_faces {
            face.vertex_set = face
                .support_points
                .iter()
                .filter(|p| vertices.binary_search(p).is_ok())
                .cloned()
                .collect();
        }
        compact_faces.sort_by(|a, b| {
            (a.dim, &a.vertex_set, &a.support_points).cmp(&(
                b.dim,
                &b.vertex_set,
                &b.support_points,
            ))
        });
        facets.sort();

        let np = NewtonPolyhedron {
            n,
            support,
            vertices,
            facets,
            compact_faces,
        };
        np.check_face_minimality();
        Ok(np)
    }

    /// Every compact face's support points must be exactly the minimizers
    /// of its supporting normal over the support; re-checked after
    /// construction.
    fn check_face_minimality(&self) {
        for face in &self.compact_faces {
            let val = |e: &Expo| -> i128 {
                e.0.iter()
                    .zip(&face.supporting_normal)
                    .map(|(&b, &l)| b as i128 * l as i128)
                    .sum()
            };
            let min = self.support.iter().map(val).min().unwrap();
            for p in &self.support {
                let on_face = face.support_points.contains(p);
                assert_eq!(
                    val(p) == min,
                    on_face,
                    "face minimality violated at {p} (normal {:?})",
                    face.supporting_normal
                );
            }
        }
    }

    /// Faces of one face, one dimension down; used by the fan triangulation.
    fn subfacets<'a>(&'a self, face: &'a Face) -> impl Iterator<Item = &'a Face> {
        let pts: BTreeSet<&Expo> = face.support_points.iter().collect();
        self.compact_faces.iter().filter(move |g| {
            g.dim + 1 == face.dim && g.support_points.iter().all(|p| pts.contains(p))
        })
    }

    /// Fan triangulation of a compact face, pulling from its
    /// lexicographically smallest vertex. Returns simplices as vertex lists
    /// of length dim+1.
    fn triangulate(&self, face: &Face) -> Vec<Vec<Expo>> {
        if face.vertex_set.len() == face.dim + 1 {
            return vec![face.vertex_set.clone()];
        }
        let v0 = &face.vertex_set[0];
        let mut simplices = Vec::new();
        for g in self.subfacets(face) {
            if g.support_points.contains(v0) {
                continue;
            }
            for mut s in self.triangulate(g) {
                s.push(v0.clone());
                simplices.push(s);
            }
        }
        simplices
    }

    pub fn has_pure_power(&self, axis: usize) -> bool {
        self.support.iter().any(|e| e.as_pure_power(axis).is_some())
    }
}

/// Quasi-convenient: every axis z2..zn carries a pure power of the support.
pub fn is_quasi_convenient(np: &NewtonPolyhedron) -> bool {
    (1..np.n).all(|axis| np.has_pure_power(axis))
}

/// Convenient: every axis including z1 carries a pure power.
pub fn is_convenient(np: &NewtonPolyhedron) -> bool {
    (0..np.n).all(|axis| np.has_pure_power(axis))
}

/// Vertices with first coordinate zero, plus the componentwise suprema of
/// their remaining exponents. Errors when no z1-free vertex exists.
pub fn z1zero_vertex_data(np: &NewtonPolyhedron) -> Result<Z1ZeroVertexData> {
    let alphas: Vec<Expo> = np
        .vertices
        .iter()
        .filter(|v| v.get(0) == 0)
        .cloned()
        .collect();
    if alphas.is_empty() {
        return Err(Error::NoZ1FreeVertex);
    }
    let mut a_sup = vec![0u32; np.n - 1];
    for alpha in &alphas {
        for j in 1..np.n {
            a_sup[j - 1] = a_sup[j - 1].max(alpha.get(j));
        }
    }
    Ok(Z1ZeroVertexData { alphas, a_sup })
}

/// Newton number of a convenient polyhedron:
/// nu = sum_{k=0}^n (-1)^{n-k} k! V_k, with V_0 = 1 and V_k the total
/// k-volume under the Newton boundary in the k-dimensional coordinate
/// subspaces. Exact; errors on non-convenient input.
pub fn newton_number(np: &NewtonPolyhedron) -> Result<u64> {
    if !is_convenient(np) {
        return Err(Error::NewtonNumberUndefined(
            "support does not meet every coordinate axis".into(),
        ));
    }
    let n = np.n;
    let mut nu = if n % 2 == 0 { Q::one() } else { -Q::one() }; // k = 0 term
    let mut factorial = Q::one();
    for k in 1..=n {
        factorial *= Q::from_integer(Z::from(k));
        let mut v_k = Q::zero();
        for subset in (0..n).combinations(k) {
            let pts: Vec<Expo> = np
                .support
                .iter()
                .filter(|e| (0..n).all(|j| subset.contains(&j) || e.get(j) == 0))
                .map(|e| Expo(subset.iter().map(|&j| e.get(j)).collect()))
                .collect();
            v_k += under_volume(k, pts)?;
        }
        let sign = if (n - k) % 2 == 0 { Q::one() } else { -Q::one() };
        nu += sign * &factorial * v_k;
    }
    if !nu.is_integer() {
        return Err(Error::Overflow(format!(
            "Newton number came out non-integral ({nu}); volume computation is inconsistent"
        )));
    }
    let nu = nu.to_integer();
    if nu.is_negative() {
        return Err(Error::Overflow(format!(
            "Newton number came out negative ({nu})"
        )));
    }
    nu.to_u64()
        .ok_or_else(|| Error::Overflow("Newton number exceeds u64".into()))
}

/// k-volume of the region under the Newton boundary of the given support in
/// R^k: star decomposition from the origin over the compact facets, each
/// triangulated by a vertex fan.
fn under_volume(k: usize, pts: Vec<Expo>) -> Result<Q> {
    let sub = NewtonPolyhedron::from_support(k, pts)?;
    debug_assert!(is_convenient(&sub));
    let mut vol = Q::zero();
    let mut kfact = Z::one();
    for i in 1..=k {
        kfact *= Z::from(i);
    }
    for face in sub.compact_faces.iter().filter(|f| f.dim + 1 == k) {
        for simplex in sub.triangulate(face) {
            let mat: Vec<Vec<Z>> = simplex
                .iter()
                .map(|e| e.0.iter().map(|&b| Z::from(b)).collect())
                .collect();
            let d = det(mat);
            vol += Q::new(d.abs(), kfact.clone());
        }
    }
    Ok(vol)
}

fn binomial(n: usize, k: usize) -> u128 {
    let mut acc: u128 = 1;
    for i in 0..k.min(n - k) {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > u64::MAX as u128 {
            return acc;
        }
    }
    acc
}

fn dot(a: &[Z], b: &[Z]) -> Z {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn primitive(v: Vec<Z>) -> Vec<Z> {
    let mut g = Z::zero();
    for x in &v {
        g = g.gcd(x);
    }
    if g.is_zero() || g.is_one() {
        return v;
    }
    v.into_iter().map(|x| x / &g).collect()
}

/// Bareiss determinant of a square integer matrix.
fn det(mut m: Vec<Vec<Z>>) -> Z {
    let n = m.len();
    if n == 0 {
        return Z::one();
    }
    let mut sign = 1i32;
    let mut prev = Z::one();
    for k in 0..n - 1 {
        if m[k][k].is_zero() {
            let Some(swap) = (k + 1..n).find(|&r| !m[r][k].is_zero()) else {
                return Z::zero();
            };
            m.swap(k, swap);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let num = &m[i][j] * &m[k][k] - &m[i][k] * &m[k][j];
                m[i][j] = num / &prev;
            }
            m[i][k] = Z::zero();
        }
        prev = m[k][k].clone();
    }
    let d = m[n - 1][n - 1].clone();
    if sign < 0 {
        -d
    } else {
        d
    }
}

/// Rank of a set of integer row vectors of the given width.
fn rank(rows: &[&Vec<Z>], width: usize) -> usize {
    let mut mat: Vec<Vec<Q>> = rows
        .iter()
        .map(|r| r.iter().map(|x| Q::from_integer(x.clone())).collect())
        .collect();
    let mut rank = 0;
    for col in 0..width {
        let Some(pivot) = (rank..mat.len()).find(|&r| !mat[r][col].is_zero()) else {
            continue;
        };
        mat.swap(rank, pivot);
        let p = mat[rank][col].clone();
        for r in rank + 1..mat.len() {
            if mat[r][col].is_zero() {
                continue;
            }
            let factor = &mat[r][col] / &p;
            for c in col..width {
                let delta = &factor * &mat[rank][c];
                mat[r][c] -= delta;
            }
        }
        rank += 1;
        if rank == mat.len() {
            break;
        }
    }
    rank
}

/// For n independent rows in n+1 columns, the (unique up to sign) integer
/// normal via signed maximal minors. `None` when the rows are dependent.
fn cross_null(rows: &[&Vec<Z>], n: usize) -> Option<Vec<Z>> {
    let mut out = Vec::with_capacity(n + 1);
    let mut all_zero = true;
    for skip in 0..=n {
        let minor: Vec<Vec<Z>> = rows
            .iter()
            .map(|r| {
                r.iter()
                    .enumerate()
                    .filter(|&(c, _)| c != skip)
                    .map(|(_, x)| x.clone())
                    .collect()
            })
            .collect();
        let mut d = det(minor);
        if skip % 2 == 1 {
            d = -d;
        }
        if !d.is_zero() {
            all_zero = false;
        }
        out.push(d);
    }
    if all_zero {
        None
    } else {
        Some(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_family;
    use crate::poly::q_int;

    fn np_of(src: &str, t0: i64) -> NewtonPolyhedron {
        let f = parse_family(src).unwrap();
        newton_polyhedron(&f.germ_at(&q_int(t0))).unwrap()
    }

    fn e(v: &[u32]) -> Expo {
        Expo(v.to_vec())
    }

    #[test]
    fn interior_point_is_not_a_vertex() {
        let np = np_of("z2^2+z3^2+t*z1^2*z2^2*z3^2", 1);
        assert_eq!(np.vertices, vec![e(&[0, 0, 2]), e(&[0, 2, 0])]);
    }

    #[test]
    fn brieskorn_face_counts() {
        let np = np_of("z1^5+z2^4+z3^3", 0);
        assert_eq!(np.vertices.len(), 3);
        let edges = np.compact_faces.iter().filter(|f| f.dim == 1).count();
        let twofaces = np.compact_faces.iter().filter(|f| f.dim == 2).count();
        assert_eq!(edges, 3);
        assert_eq!(twofaces, 1);
    }

    #[test]
    fn dominated_points_drop_out() {
        // Example 2 support before adding a z1-power.
        let np = NewtonPolyhedron::from_support(
            3,
            vec![e(&[0, 2, 0]), e(&[0, 0, 2]), e(&[2, 2, 2]), e(&[1, 2, 0])],
        )
        .unwrap();
        assert_eq!(np.vertices, vec![e(&[0, 0, 2]), e(&[0, 2, 0])]);
        assert_eq!(np.compact_faces.iter().filter(|f| f.dim == 1).count(), 1);
    }

    #[test]
    fn z1zero_data_examples() {
        let np = np_of("z2^2+z3^2+t*z1^2*z2^2*z3^2", 1);
        let d = z1zero_vertex_data(&np).unwrap();
        assert_eq!(d.alphas, vec![e(&[0, 0, 2]), e(&[0, 2, 0])]);
        assert_eq!(d.a_sup, vec![2, 2]);

        let np = np_of("z2^4+z3^3+t*z1^2*z2^4*z3^3", 1);
        let d = z1zero_vertex_data(&np).unwrap();
        assert_eq!(d.alphas, vec![e(&[0, 0, 3]), e(&[0, 4, 0])]);
        assert_eq!(d.a_sup, vec![4, 3]);

        let np = np_of("vars t, z1, z2, z3\nf = t*z1*z2^2", 1);
        assert!(matches!(
            z1zero_vertex_data(&np),
            Err(Error::NoZ1FreeVertex)
        ));
    }

    #[test]
    fn convenience_predicates() {
        let np = np_of("z2^2+z3^2+t*z1^2*z2^2*z3^2", 1);
        assert!(is_quasi_convenient(&np));
        assert!(!is_convenient(&np));

        let np = np_of("z2^2*z3+z3^2", 0);
        assert!(!is_quasi_convenient(&np));

        let np = np_of("z1^5+z2^2+z3^2", 0);
        assert!(is_convenient(&np));
    }

    #[test]
    fn newton_number_brieskorn_plane_curves() {
        for a in 2..=6u32 {
            for b in 2..=6u32 {
                let np = NewtonPolyhedron::from_support(2, vec![e(&[a, 0]), e(&[0, b])]).unwrap();
                assert_eq!(
                    newton_number(&np).unwrap(),
                    ((a - 1) * (b - 1)) as u64,
                    "a={a} b={b}"
                );
            }
        }
    }

    #[test]
    fn newton_number_surface_families() {
        for a in 5..=10u32 {
            let np = NewtonPolyhedron::from_support(
                3,
                vec![e(&[a, 0, 0]), e(&[0, 4, 0]), e(&[0, 0, 3])],
            )
            .unwrap();
            assert_eq!(newton_number(&np).unwrap(), (6 * (a - 1)) as u64, "a={a}");
        }
        for a in 3..=8u32 {
            let np = NewtonPolyhedron::from_support(
                3,
                vec![e(&[a, 0, 0]), e(&[0, 2, 0]), e(&[0, 0, 2])],
            )
            .unwrap();
            assert_eq!(newton_number(&np).unwrap(), (a - 1) as u64, "a={a}");
        }
    }

    #[test]
    fn newton_number_requires_convenience() {
        let np = np_of("z2^2+z3^2+t*z1^2*z2^2*z3^2", 1);
        assert!(matches!(
            newton_number(&np),
            Err(Error::NewtonNumberUndefined(_))
        ));
    }

    #[test]
    fn midpoint_sits_on_edge_support() {
        let np =
            NewtonPolyhedron::from_support(2, vec![e(&[2, 0]), e(&[1, 1]), e(&[0, 2])]).unwrap();
        let edge = np.compact_faces.iter().find(|f| f.dim == 1).unwrap();
        assert_eq!(edge.support_points.len(), 3);
        assert_eq!(edge.vertex_set.len(), 2);
    }

    #[test]
    fn interior_point_changes_nothing() {
        let base =
            NewtonPolyhedron::from_support(3, vec![e(&[4, 0, 0]), e(&[0, 4, 0]), e(&[0, 0, 3])])
                .unwrap();
        let with_inner = NewtonPolyhedron::from_support(
            3,
            vec![e(&[4, 0, 0]), e(&[0, 4, 0]), e(&[0, 0, 3]), e(&[2, 2, 2])],
        )
        .unwrap();
        assert_eq!(base.vertices, with_inner.vertices);
        assert_eq!(base.compact_faces, with_inner.compact_faces);
        assert_eq!(
            newton_number(&base).unwrap(),
            newton_number(&with_inner).unwrap()
        );
    }
}
