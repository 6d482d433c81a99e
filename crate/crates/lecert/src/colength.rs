//! Jacobian-ideal colength by exact linear algebra.
//!
//! For a germ f with an isolated critical point at the origin, the Milnor
//! number is dim_C of C[[z]] / (df/dz1, ..., df/dzn). We compute
//! dim C[z]/(J + m^D) for a doubling sequence of degree bounds D and accept
//! the value once two consecutive bounds agree; for isolated singularities
//! the truncated dimension is eventually constant and equal to the
//! colength. This is a cross-check route, deliberately independent of the
//! polyhedral one.

use std::collections::BTreeMap;

use num_traits::Zero;

use crate::poly::{Expo, Germ, Q};

const DEGREE_SCHEDULE: [u32; 4] = [5, 10, 20, 40];
const MAX_COLUMNS: usize = 60_000;

/// Colength of the Jacobian ideal of `f` in the local ring at the origin,
/// or `None` when the dimension does not stabilize below the degree cap
/// (non-isolated singularity, or out of reach).
pub fn jacobian_colength(f: &Germ) -> Option<u64> {
    jacobian_colength_capped(f, *DEGREE_SCHEDULE.last().unwrap())
}

pub fn jacobian_colength_capped(f: &Germ, cap: u32) -> Option<u64> {
    if f.is_zero() {
        return None;
    }
    let partials: Vec<Germ> = f.partials().into_iter().filter(|g| !g.is_zero()).collect();
    if partials.is_empty() {
        return None;
    }
    let mut prev: Option<u64> = None;
    for &d in DEGREE_SCHEDULE.iter().filter(|&&d| d <= cap) {
        let dim = truncated_quotient_dim(f.n(), &partials, d)?;
        if prev == Some(dim) {
            return Some(dim);
        }
        prev = Some(dim);
    }
    None
}

/// dim C[z] / (J + m^D): monomials of degree < D modulo the truncations of
/// all monomial multiples of the partials.
fn truncated_quotient_dim(n: usize, partials: &[Germ], degree: u32) -> Option<u64> {
    let monomials = monomials_below(n, degree);
    if monomials.len() > MAX_COLUMNS {
        return None;
    }
    let col: BTreeMap<Expo, usize> = monomials
        .iter()
        .enumerate()
        .map(|(i, e)| (e.clone(), i))
        .collect();

    let mut rows: Vec<Vec<(usize, Q)>> = Vec::new();
    for g in partials {
        let ord = g
            .terms()
            .map(|(e, _)| e.total_degree() as u32)
            .min()
            .unwrap();
        if ord >= degree {
            continue;
        }
        for gamma in monomials_below(n, degree - ord) {
            let mut row: Vec<(usize, Q)> = Vec::new();
            for (e, c) in g.terms() {
                let shifted = Expo(
                    e.0.iter()
                        .zip(&gamma.0)
                        .map(|(&a, &b)| a + b)
                        .collect(),
                );
                if let Some(&idx) = col.get(&shifted) {
                    row.push((idx, c.clone()));
                }
            }
            if !row.is_empty() {
                row.sort_by_key(|&(i, _)| i);
                rows.push(row);
            }
        }
    }

    let rank = sparse_rank(rows);
    Some((monomials.len() - rank) as u64)
}

/// All exponent vectors of total degree < `degree`, sorted.
fn monomials_below(n: usize, degree: u32) -> Vec<Expo> {
    let mut out = Vec::new();
    let mut current = vec![0u32; n];
    fn rec(n: usize, pos: usize, left: u32, current: &mut Vec<u32>, out: &mut Vec<Expo>) {
        if pos == n {
            out.push(Expo(current.clone()));
            return;
        }
        for b in 0..=left {
            current[pos] = b;
            rec(n, pos + 1, left - b, current, out);
        }
        current[pos] = 0;
    }
    rec(n, 0, degree.saturating_sub(1), &mut current, &mut out);
    out.sort();
    out
}

/// Rank of a sparse rational matrix by forward elimination with pivot rows
/// normalized to leading coefficient 1.
fn sparse_rank(rows: Vec<Vec<(usize, Q)>>) -> usize {
    let mut pivots: BTreeMap<usize, Vec<(usize, Q)>> = BTreeMap::new();
    for mut row in rows {
        loop {
            let Some(&(lead, ref c)) = row.first() else {
                break;
            };
            let lead_coeff = c.clone();
            match pivots.get(&lead) {
                Some(pivot) => {
                    row = row_sub_scaled(&row, pivot, &lead_coeff);
                }
                None => {
                    let inv = lead_coeff;
                    let normalized: Vec<(usize, Q)> =
                        row.iter().map(|(i, c)| (*i, c / &inv)).collect();
                    pivots.insert(lead, normalized);
                    break;
                }
            }
        }
    }
    pivots.len()
}

/// row - scale * pivot, sparse merge; pivot has leading coefficient 1.
fn row_sub_scaled(row: &[(usize, Q)], pivot: &[(usize, Q)], scale: &Q) -> Vec<(usize, Q)> {
    let mut out = Vec::with_capacity(row.len() + pivot.len());
    let (mut i, mut j) = (0, 0);
    while i < row.len() || j < pivot.len() {
        match (row.get(i), pivot.get(j)) {
            (Some((ci, vi)), Some((cj, vj))) => {
                if ci < cj {
                    out.push((*ci, vi.clone()));
                    i += 1;
                } else if cj < ci {
                    out.push((*cj, -(scale * vj)));
                    j += 1;
                } else {
                    let v = vi - scale * vj;
                    if !v.is_zero() {
                        out.push((*ci, v));
                    }
                    i += 1;
                    j += 1;
                }
            }
            (Some((ci, vi)), None) => {
                out.push((*ci, vi.clone()));
                i += 1;
            }
            (None, Some((cj, vj))) => {
                out.push((*cj, -(scale * vj)));
                j += 1;
            }
            (None, None) => unreachable!(),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_family;
    use crate::poly::{q_int, q_ratio};

    fn germ(src: &str) -> Germ {
        parse_family(src).unwrap().germ_at(&q_int(1))
    }

    #[test]
    fn morse_point() {
        let g = Germ::from_terms(
            2,
            vec![
                (Expo(vec![2, 0]), q_int(1)),
                (Expo(vec![0, 2]), q_int(1)),
            ],
        );
        assert_eq!(jacobian_colength(&g), Some(1));
    }

    #[test]
    fn brieskorn_products() {
        for (a, b) in [(2u32, 3u32), (4, 4), (5, 3)] {
            let g = Germ::from_terms(
                2,
                vec![
                    (Expo(vec![a, 0]), q_int(1)),
                    (Expo(vec![0, b]), q_int(1)),
                ],
            );
            assert_eq!(jacobian_colength(&g), Some(((a - 1) * (b - 1)) as u64));
        }
        let g = Germ::from_terms(
            3,
            vec![
                (Expo(vec![5, 0, 0]), q_int(1)),
                (Expo(vec![0, 4, 0]), q_int(1)),
                (Expo(vec![0, 0, 3]), q_int(1)),
            ],
        );
        assert_eq!(jacobian_colength(&g), Some(24));
    }

    #[test]
    fn cusp_families() {
        // A3: mu = 3.
        let g = germ("z2^2+z3^4");
        let g = g.substitute_var(1, &q_int(0)); // drop the unused z1
        assert_eq!(jacobian_colength(&g), Some(3));
    }

    #[test]
    fn perturbed_slice_from_deformed_quartic() {
        // mu(z2^4 + z3^3 + (1/9) z2^4 z3^3) = 6.
        let g = Germ::from_terms(
            2,
            vec![
                (Expo(vec![4, 0]), q_int(1)),
                (Expo(vec![0, 3]), q_int(1)),
                (Expo(vec![4, 3]), q_ratio(1, 9)),
            ],
        );
        assert_eq!(jacobian_colength(&g), Some(6));
    }

    #[test]
    fn non_isolated_returns_none() {
        // f = z2^2 in two variables: the z3-axis is critical.
        let g = Germ::from_terms(2, vec![(Expo(vec![2, 0]), q_int(1))]);
        assert_eq!(jacobian_colength(&g), None);
    }
}
