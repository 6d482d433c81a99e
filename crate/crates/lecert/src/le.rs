//! Milnor and Le numbers through Newton numbers.
//!
//! For a convenient Newton non-degenerate germ the Milnor number equals the
//! Newton number, and for an admissible line singularity the modification
//! f_t + z1^a has an isolated singularity whose Milnor number is
//! lambda0 + (a-1) * lambda1 once a is large enough. Both Le numbers are
//! therefore differences of exact Newton numbers; the generic-slice Milnor
//! number provides an independent cross-check of lambda1.

use std::collections::BTreeMap;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::colength::jacobian_colength;
use crate::newton::{is_convenient, newton_number, newton_polyhedron};
use crate::nondegen::{is_newton_nondegenerate, NdStatus};
use crate::poly::{Germ, Q};
use crate::{Error, Result};

/// Hard cap offset for the stabilization search.
pub const EXPONENT_CAP_OFFSET: u32 = 64;

#[derive(Clone, Debug, Serialize)]
pub struct LeNumbers {
    pub lambda0: u64,
    pub lambda1: u64,
    pub exponent_a: u32,
    /// nu(f_t + z1^a') for the stabilization window.
    pub nu_values: BTreeMap<u32, u64>,
    /// Generic-slice Milnor number when the cross-check ran and agreed.
    pub slice_mu: Option<u64>,
}

/// Milnor number of a convenient, certified non-degenerate germ via the
/// Newton number. Refuses when the equality mu = nu is not certified.
pub fn milnor_via_nu(f: &Germ, tier: u8, seed: u64) -> Result<u64> {
    let np = newton_polyhedron(f)?;
    if !is_convenient(&np) {
        return Err(Error::MuNuNotCertified("germ is not convenient".into()));
    }
    let verdict = is_newton_nondegenerate(f, tier, seed)?;
    match verdict.status {
        NdStatus::Nondegenerate => newton_number(&np),
        NdStatus::Degenerate => Err(Error::MuNuNotCertified(
            "germ is Newton degenerate".into(),
        )),
        NdStatus::Unknown => Err(Error::MuNuNotCertified(
            "non-degeneracy undecided".into(),
        )),
    }
}

/// nu(f + z1^a).
pub fn nu_with_power(f: &Germ, a: u32) -> Result<u64> {
    let g = f.add_pure_power(1, a);
    let np = newton_polyhedron(&g)?;
    newton_number(&np)
}

/// Window test at exponent a: f + z1^{a'} is convenient and certified
/// non-degenerate for a' in {a, a+1, a+2}, and the three Newton numbers are
/// affine in a' (vanishing second difference).
pub fn stabilization_ok(f: &Germ, a: u32, tier: u8, seed: u64) -> Result<bool> {
    let mut nus = Vec::with_capacity(3);
    for a_prime in a..a + 3 {
        let g = f.add_pure_power(1, a_prime);
        let np = newton_polyhedron(&g)?;
        if !is_convenient(&np) {
            return Err(Error::NewtonNumberUndefined(format!(
                "f + z1^{a_prime} is not convenient (the germ is not quasi-convenient)"
            )));
        }
        let verdict = is_newton_nondegenerate(&g, tier, seed)?;
        if verdict.status != NdStatus::Nondegenerate {
            return Ok(false);
        }
        nus.push(newton_number(&np)? as i128);
    }
    Ok(nus[2] - 2 * nus[1] + nus[0] == 0)
}

/// Smallest exponent a = max(M+2, 3), where M is the largest z1-exponent
/// over all sampled germs, increased until the stabilization window passes
/// for every sample; capped at M + 64.
pub fn choose_exponent_a(sample_germs: &[Germ], tier: u8, seed: u64) -> Result<u32> {
    assert!(!sample_germs.is_empty());
    let m_big = sample_germs
        .iter()
        .flat_map(|g| g.support())
        .map(|e| e.get(0))
        .max()
        .unwrap_or(0);
    let start = (m_big + 2).max(3);
    let cap = m_big + EXPONENT_CAP_OFFSET;
    let mut last_reason = String::new();
    for a in start..=cap {
        let mut all_ok = true;
        for (idx, g) in sample_germs.iter().enumerate() {
            match stabilization_ok(g, a, tier, seed) {
                Ok(true) => {}
                Ok(false) => {
                    all_ok = false;
                    last_reason = format!("sample #{idx}: window at a={a} not affine or not certified non-degenerate");
                    break;
                }
                Err(e) => return Err(e),
            }
        }
        if all_ok {
            return Ok(a);
        }
    }
    Err(Error::StabilizationNotReached {
        cap,
        detail: last_reason,
    })
}

/// Le numbers of one germ of the family at the given exponent:
/// lambda1 = nu(a+1) - nu(a), lambda0 = nu(a) - (a-1) lambda1, verified
/// consistent across the whole window {a, a+1, a+2} and non-negative.
///
/// Precondition (caller's responsibility): admissibility of the family.
pub fn le_numbers(f: &Germ, a: u32, tier: u8, seed: u64) -> Result<LeNumbers> {
    let mut nu_values = BTreeMap::new();
    for a_prime in a..a + 3 {
        let g = f.add_pure_power(1, a_prime);
        let np = newton_polyhedron(&g)?;
        if !is_convenient(&np) {
            return Err(Error::NewtonNumberUndefined(format!(
                "f + z1^{a_prime} is not convenient"
            )));
        }
        let verdict = is_newton_nondegenerate(&g, tier, seed)?;
        if verdict.status != NdStatus::Nondegenerate {
            return Err(Error::MuNuNotCertified(format!(
                "f + z1^{a_prime} is not certified non-degenerate"
            )));
        }
        nu_values.insert(a_prime, newton_number(&np)?);
    }
    let nu_a = nu_values[&a];
    let nu_a1 = nu_values[&(a + 1)];
    let nu_a2 = nu_values[&(a + 2)];
    let lambda1 = nu_a1
        .checked_sub(nu_a)
        .ok_or_else(|| Error::IlmExtraction("negative lambda1".into()))?;
    let lambda0 = nu_a
        .checked_sub((a as u64 - 1) * lambda1)
        .ok_or_else(|| Error::IlmExtraction("negative lambda0".into()))?;
    if nu_a2 != lambda0 + (a as u64 + 1) * lambda1 {
        return Err(Error::IlmExtraction(
            "window is not affine in the exponent".into(),
        ));
    }
    Ok(LeNumbers {
        lambda0,
        lambda1,
        exponent_a: a,
        nu_values,
        slice_mu: None,
    })
}

/// Milnor number of an isolated germ: the Newton-number route when the
/// germ is convenient and certified non-degenerate, the Jacobian-colength
/// route otherwise. `None` when neither applies.
pub fn milnor_of_isolated_germ(g: &Germ, tier: u8, seed: u64) -> Option<u64> {
    if g.is_zero() {
        return None;
    }
    let np = newton_polyhedron(g).ok()?;
    if is_convenient(&np) {
        if let Ok(verdict) = is_newton_nondegenerate(g, tier, seed) {
            if verdict.status == NdStatus::Nondegenerate {
                return newton_number(&np).ok();
            }
        }
    }
    jacobian_colength(g)
}

/// Milnor number of f restricted to a random hyperplane z1 = a1, computed
/// at the origin of the slice for several nonzero rational a1. Returns the
/// common value, or `None` when trials disagree or all fail.
pub fn generic_slice_milnor(
    f: &Germ,
    trials: usize,
    rng: &mut ChaCha8Rng,
    tier: u8,
    seed: u64,
) -> Option<u64> {
    let mut values = Vec::new();
    for _ in 0..trials {
        let a1 = random_small_rational(rng);
        let slice = f.substitute_var(1, &a1);
        if let Some(mu) = milnor_of_isolated_germ(&slice, tier, seed) {
            values.push(mu);
        }
    }
    match values.as_slice() {
        [] => None,
        [first, rest @ ..] => rest.iter().all(|v| v == first).then_some(*first),
    }
}

/// Nonzero rational with small numerator and denominator, away from 0.
pub fn random_small_rational(rng: &mut ChaCha8Rng) -> Q {
    let numerators = [1i64, 2, -1, -2, 3, -3];
    let denominators = [3i64, 4, 5, 7, 11];
    let num = numerators[rng.gen_range(0..numerators.len())];
    let den = denominators[rng.gen_range(0..denominators.len())];
    Q::new(num.into(), den.into())
}

/// Cross-check lambda1 against the generic-slice Milnor number; on
/// agreement records it, on disagreement reports the inconsistency.
pub fn attach_slice_check(
    le: &mut LeNumbers,
    f: &Germ,
    trials: usize,
    rng: &mut ChaCha8Rng,
    tier: u8,
    seed: u64,
) -> Result<()> {
    match generic_slice_milnor(f, trials, rng, tier, seed) {
        None => Ok(()),
        Some(mu) if mu == le.lambda1 => {
            le.slice_mu = Some(mu);
            Ok(())
        }
        Some(mu) => Err(Error::IlmExtraction(format!(
            "generic-slice Milnor number {mu} disagrees with lambda1 = {}",
            le.lambda1
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_family;
    use crate::poly::{q_int, q_ratio, PolyFamily};
    use rand::SeedableRng;

    fn family(src: &str) -> PolyFamily {
        parse_family(src).unwrap()
    }

    #[test]
    fn milnor_via_nu_matches_known_values() {
        let g = family("z1^2+z2^2").germ_at(&q_int(0));
        assert_eq!(milnor_via_nu(&g, 3, 42).unwrap(), 1);
        let g = family("z1^5+z2^4+z3^3").germ_at(&q_int(0));
        assert_eq!(milnor_via_nu(&g, 3, 42).unwrap(), 24);
        let g = family("z1^2+z2^2").germ_at(&q_int(0)); // two-variable convenient germ
        assert_eq!(milnor_via_nu(&g, 3, 42).unwrap(), 1);
    }

    #[test]
    fn milnor_via_nu_refuses_nonconvenient() {
        let g = family("z2^2+z3^2+t*z1^2*z2^2*z3^2").germ_at(&q_int(1));
        assert!(matches!(
            milnor_via_nu(&g, 3, 42),
            Err(Error::MuNuNotCertified(_))
        ));
    }

    #[test]
    fn milnor_via_nu_refuses_degenerate() {
        let g = family("z1^2+z2^2+2*z1*z2").germ_at(&q_int(0));
        assert!(matches!(
            milnor_via_nu(&g, 3, 42),
            Err(Error::MuNuNotCertified(_))
        ));
    }

    #[test]
    fn stabilization_windows_for_the_worked_families() {
        // nu = 6(a-1): every window from a >= 5 is affine.
        let g = family("z2^4+z3^3+t*z1^2*z2^4*z3^3").germ_at(&q_int(1));
        for a in 5..8 {
            assert!(stabilization_ok(&g, a, 3, 42).unwrap());
        }
        // nu = a-1 for the other two families.
        let g = family("z2^2+z3^2+z1*z2^2*z3^2+t*z1*z2^2").germ_at(&q_ratio(1, 2));
        for a in 3..6 {
            assert!(stabilization_ok(&g, a, 3, 42).unwrap());
        }
        let g = family("z2^2+z3^2+t*z1^2*z2^2*z3^2").germ_at(&q_int(1));
        for a in 3..6 {
            assert!(stabilization_ok(&g, a, 3, 42).unwrap());
        }
    }

    #[test]
    fn chosen_exponent_is_small_for_example_one() {
        let f = family("z2^4+z3^3+t*z1^2*z2^4*z3^3");
        let germs: Vec<Germ> = [q_int(0), q_int(1), q_ratio(1, 2), q_int(-2)]
            .iter()
            .map(|t| f.germ_at(t))
            .collect();
        let a = choose_exponent_a(&germs, 3, 42).unwrap();
        assert!((4..=5).contains(&a));
    }

    #[test]
    fn le_numbers_of_the_worked_families() {
        let g = family("z2^4+z3^3+t*z1^2*z2^4*z3^3").germ_at(&q_int(1));
        let le = le_numbers(&g, 5, 3, 42).unwrap();
        assert_eq!((le.lambda0, le.lambda1), (0, 6));

        let g = family("z2^2+z3^2+z1*z2^2*z3^2+t*z1*z2^2").germ_at(&q_ratio(1, 2));
        let le = le_numbers(&g, 3, 3, 42).unwrap();
        assert_eq!((le.lambda0, le.lambda1), (0, 1));

        let g = family("z2^2+z3^2+t*z1^2*z2^2*z3^2").germ_at(&q_int(0));
        let le = le_numbers(&g, 3, 3, 42).unwrap();
        assert_eq!((le.lambda0, le.lambda1), (0, 1));
    }

    #[test]
    fn slice_milnor_matches_lambda1() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let g = family("z2^4+z3^3+t*z1^2*z2^4*z3^3").germ_at(&q_int(1));
        assert_eq!(generic_slice_milnor(&g, 3, &mut rng, 3, 42), Some(6));

        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let g = family("z2^2+z3^2+z1*z2^2*z3^2+t*z1*z2^2").germ_at(&q_ratio(1, 2));
        assert_eq!(generic_slice_milnor(&g, 3, &mut rng, 3, 42), Some(1));
    }

    #[test]
    fn slice_of_z1_free_family_is_the_germ_itself() {
        // f independent of z1: slicing is the identity on terms.
        let f = family("vars t, z1, z2, z3\nf = z2^2+z3^4+t*z3^2");
        let g = f.germ_at(&q_int(0));
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert_eq!(generic_slice_milnor(&g, 3, &mut rng, 3, 42), Some(3));
        let g = f.germ_at(&q_int(1));
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert_eq!(generic_slice_milnor(&g, 3, &mut rng, 3, 42), Some(1));
    }

    #[test]
    fn attach_slice_check_records_agreement() {
        let g = family("z2^4+z3^3+t*z1^2*z2^4*z3^3").germ_at(&q_int(1));
        let mut le = le_numbers(&g, 5, 3, 42).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        attach_slice_check(&mut le, &g, 3, &mut rng, 3, 42).unwrap();
        assert_eq!(le.slice_mu, Some(6));
    }
}
