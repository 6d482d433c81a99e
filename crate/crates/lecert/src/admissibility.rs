//! Admissibility of a family of line singularities: the singular axis
//! conditions, quasi-convenience, Newton non-degeneracy per parameter
//! sample, and the exponent-domination condition on z1-carrying monomials.
//!
//! Everything here is exact except the slice probe, which is an explicitly
//! probabilistic guard that the singular locus is the axis and nothing
//! more; its verdict is recorded as such and an `Admissible` overall still
//! requires it to pass.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::colength::jacobian_colength;
use crate::le::milnor_of_isolated_germ;
use crate::newton::{is_quasi_convenient, newton_polyhedron, z1zero_vertex_data, Z1ZeroVertexData};
use crate::nondegen::{is_newton_nondegenerate, NdStatus, NondegeneracyVerdict};
use crate::numeric::lm_solve;
use crate::poly::{Expo, Germ, PolyFamily, Q};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Mode {
    #[serde(rename = "per_vertex_domination")]
    PerVertexDomination,
    #[serde(rename = "strict_sup")]
    StrictSup,
}

impl Mode {
    pub fn parse(s: &str) -> Result<Mode> {
        match s {
            "per-vertex" | "per_vertex_domination" => Ok(Mode::PerVertexDomination),
            "strict" | "strict_sup" => Ok(Mode::StrictSup),
            other => Err(Error::InvalidInput(format!(
                "unknown condition-(iii) mode `{other}` (expected per-vertex or strict)"
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum IsolatedStatus {
    Yes(u64),
    No,
    Unknown,
}

#[derive(Clone, Debug, Serialize)]
pub struct SliceWitness {
    pub t: String,
    pub z1: String,
    pub ztilde: Vec<[f64; 2]>,
    pub residual: f64,
}

#[derive(Clone, Debug, Serialize)]
pub enum SliceProbe {
    Pass,
    Fail(SliceWitness),
    Skipped,
}

#[derive(Clone, Debug, Serialize)]
pub struct LineSingularityReport {
    pub axis_contained: bool,
    /// Aggregate status; the Milnor number shown is the one at t = 0.
    pub restriction_isolated: IsolatedStatus,
    pub restriction_by_sample: Vec<(String, IsolatedStatus)>,
    pub slice_probe: SliceProbe,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum ConditionIii {
    PassStrict,
    PassPerVertex,
    Fail { offender: Vec<u32> },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum Overall {
    Admissible,
    NotAdmissible(String),
    Unknown(String),
}

#[derive(Clone, Debug, Serialize)]
pub struct AdmissibilityReport {
    pub line_singularity: LineSingularityReport,
    /// Quasi-convenience of f_t at every nonzero sample.
    pub quasi_convenient: bool,
    pub pure_z1_power_present: bool,
    pub nondegenerate: Vec<(String, NondegeneracyVerdict)>,
    pub condition_iii: ConditionIii,
    pub mode: Mode,
    /// z1-free boundary vertices at the first nonzero sample (they feed the
    /// control function), and their componentwise suprema.
    #[serde(serialize_with = "ser_expos")]
    pub alphas: Vec<Expo>,
    pub a_sup: Vec<u32>,
    /// Whether the z1-free boundary data agrees across all nonzero samples.
    pub boundary_consistent: bool,
    pub overall: Overall,
}

fn ser_expos<S: serde::Serializer>(v: &[Expo], s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for e in v {
        seq.serialize_element(&e.0)?;
    }
    seq.end()
}

/// The two singular-axis conditions plus the heuristic slice probe.
pub fn check_line_singularity(
    f: &PolyFamily,
    t_samples: &[Q],
    tier: u8,
    seed: u64,
) -> LineSingularityReport {
    let axis_contained = f.vanishes_on_axis()
        && (1..=f.n()).all(|j| f.partial_z(j).vanishes_on_axis());

    let mut restriction_by_sample = Vec::new();
    let mut mu_at_zero = None;
    for t in t_samples {
        let germ = f.germ_at(t);
        let status = restriction_status(&germ, tier, seed);
        if t.numer().bits() == 0 {
            if let IsolatedStatus::Yes(mu) = status {
                mu_at_zero = Some(mu);
            }
        }
        restriction_by_sample.push((t.to_string(), status));
    }
    let restriction_isolated = if restriction_by_sample
        .iter()
        .any(|(_, s)| *s == IsolatedStatus::No)
    {
        IsolatedStatus::No
    } else if restriction_by_sample
        .iter()
        .any(|(_, s)| *s == IsolatedStatus::Unknown)
    {
        IsolatedStatus::Unknown
    } else {
        IsolatedStatus::Yes(mu_at_zero.unwrap_or(0))
    };

    let slice_probe = if axis_contained {
        slice_probe(f, t_samples, seed)
    } else {
        SliceProbe::Skipped
    };

    LineSingularityReport {
        axis_contained,
        restriction_isolated,
        restriction_by_sample,
        slice_probe,
    }
}

/// Isolatedness (with Milnor number) of f_t restricted to z1 = 0.
fn restriction_status(germ_t: &Germ, tier: u8, seed: u64) -> IsolatedStatus {
    let restriction = germ_t.substitute_var(1, &Q::from_integer(0.into()));
    if restriction.is_zero() {
        return IsolatedStatus::No;
    }
    if let Some(mu) = milnor_of_isolated_germ(&restriction, tier, seed) {
        return IsolatedStatus::Yes(mu);
    }
    match jacobian_colength(&restriction) {
        Some(mu) => IsolatedStatus::Yes(mu),
        None => IsolatedStatus::Unknown,
    }
}

/// Heuristic guard that the singular locus equals the axis: for a few small
/// rational z1 = c and every t-sample, multistart minimization of
/// |d f / d ztilde|^2 must find no critical point of the slice other than
/// the origin inside the box max |z_j| <= 0.1.
fn slice_probe(f: &PolyFamily, t_samples: &[Q], seed: u64) -> SliceProbe {
    const BOX: f64 = 0.1;
    const ORIGIN_RADIUS: f64 = 1e-3;
    const STARTS: usize = 6;

    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9e37_79b9).wrapping_add(17));
    let numerators = [1i64, 2, -1, -2];
    let denominators = [29i64, 31, 37];

    for t in t_samples {
        let germ = f.germ_at(t);
        if germ.is_zero() {
            continue;
        }
        for _ in 0..3 {
            let c = Q::new(
                numerators[rng.gen_range(0..numerators.len())].into(),
                denominators[rng.gen_range(0..denominators.len())].into(),
            );
            let slice = germ.substitute_var(1, &c);
            if slice.is_zero() {
                continue;
            }
            let k = slice.n();
            let d1: Vec<Germ> = slice.partials();
            let d2: Vec<Vec<Germ>> = d1
                .iter()
                .map(|g| (1..=k).map(|j| g.partial(j)).collect())
                .collect();
            let eval = |z: &[Complex64]| {
                let r: Vec<Complex64> = d1
                    .iter()
                    .map(|g| g.evaluate(z).unwrap_or(Complex64::new(f64::NAN, 0.0)))
                    .collect();
                let jac: Vec<Vec<Complex64>> = d2
                    .iter()
                    .map(|row| {
                        row.iter()
                            .map(|g| g.evaluate(z).unwrap_or(Complex64::new(f64::NAN, 0.0)))
                            .collect()
                    })
                    .collect();
                (r, jac)
            };
            let tol = 1e-10 * (1.0 + slice.max_abs_coeff_f64());
            for _ in 0..STARTS {
                let z0: Vec<Complex64> = (0..k)
                    .map(|_| {
                        Complex64::new(
                            rng.gen_range(-BOX..BOX),
                            rng.gen_range(-BOX..BOX),
                        )
                    })
                    .collect();
                let (z, rnorm, _) = lm_solve(&eval, z0, tol, 200);
                if rnorm > tol {
                    continue;
                }
                let sup = z.iter().map(|c| c.norm()).fold(0.0, f64::max);
                if sup > ORIGIN_RADIUS && sup <= BOX {
                    return SliceProbe::Fail(SliceWitness {
                        t: t.to_string(),
                        z1: c.to_string(),
                        ztilde: z.iter().map(|c| [c.re, c.im]).collect(),
                        residual: rnorm,
                    });
                }
            }
        }
    }
    SliceProbe::Pass
}

/// Condition (iii) on monomials carrying z1: strict mode compares against
/// the componentwise suprema a_j; per-vertex mode asks for a single
/// boundary vertex dominating the monomial. Returns the strongest passing
/// level, or the first offending exponent in lexicographic order.
pub fn check_condition_iii(f: &PolyFamily, data: &Z1ZeroVertexData, mode: Mode) -> ConditionIii {
    let carriers: Vec<&Expo> = f
        .term_map()
        .keys()
        .filter(|e| e.get(0) != 0)
        .collect();

    let strict_offender = carriers.iter().find(|e| {
        (1..e.len()).any(|j| e.get(j) < data.a_sup[j - 1])
    });
    let pv_offender = carriers.iter().find(|e| {
        !data.alphas.iter().any(|alpha| e.dominates_ztilde(alpha))
    });

    match mode {
        Mode::StrictSup => match strict_offender {
            None => ConditionIii::PassStrict,
            Some(e) => ConditionIii::Fail {
                offender: e.0.clone(),
            },
        },
        Mode::PerVertexDomination => {
            if strict_offender.is_none() {
                ConditionIii::PassStrict
            } else if pv_offender.is_none() {
                ConditionIii::PassPerVertex
            } else {
                ConditionIii::Fail {
                    offender: pv_offender.unwrap().0.clone(),
                }
            }
        }
    }
}

/// Full admissibility check across the sampled parameter values.
pub fn check_admissible(
    f: &PolyFamily,
    t_samples: &[Q],
    mode: Mode,
    tier: u8,
    seed: u64,
) -> Result<AdmissibilityReport> {
    let zero = Q::from_integer(0.into());
    if !t_samples.contains(&zero) {
        return Err(Error::InvalidInput(
            "t-samples must include 0".into(),
        ));
    }
    if t_samples.iter().filter(|t| **t != zero).count() < 2 {
        return Err(Error::InvalidInput(
            "t-samples must include at least two nonzero rationals".into(),
        ));
    }

    let line_singularity = check_line_singularity(f, t_samples, tier, seed);
    let pure_z1_power_present = f.has_pure_z1_power();

    let nonzero: Vec<&Q> = t_samples.iter().filter(|t| **t != zero).collect();
    let mut quasi_convenient = true;
    let mut quasi_fail_at = String::new();
    let mut datas: Vec<Z1ZeroVertexData> = Vec::new();
    for t in &nonzero {
        let germ = f.germ_at(t);
        if germ.is_zero() {
            quasi_convenient = false;
            quasi_fail_at = t.to_string();
            continue;
        }
        let np = newton_polyhedron(&germ)?;
        if !is_quasi_convenient(&np) {
            quasi_convenient = false;
            quasi_fail_at = t.to_string();
        }
        if let Ok(d) = z1zero_vertex_data(&np) {
            datas.push(d);
        }
    }
    let boundary_consistent = datas.windows(2).all(|w| w[0] == w[1]) && datas.len() == nonzero.len();
    let (alphas, a_sup) = match datas.first() {
        Some(d) => (d.alphas.clone(), d.a_sup.clone()),
        None => (Vec::new(), Vec::new()),
    };

    let mut nondegenerate: Vec<(String, NondegeneracyVerdict)> = Vec::new();
    for t in t_samples {
        let germ = f.germ_at(t);
        if germ.is_zero() {
            nondegenerate.push((
                t.to_string(),
                NondegeneracyVerdict {
                    status: NdStatus::Unknown,
                    witness: None,
                    undecided_faces: Vec::new(),
                },
            ));
            continue;
        }
        nondegenerate.push((t.to_string(), is_newton_nondegenerate(&germ, tier, seed)?));
    }

    let condition_iii = check_condition_iii(
        f,
        &Z1ZeroVertexData {
            alphas: alphas.clone(),
            a_sup: a_sup.clone(),
        },
        mode,
    );

    let overall = aggregate_overall(
        &line_singularity,
        quasi_convenient,
        &quasi_fail_at,
        pure_z1_power_present,
        &nondegenerate,
        &condition_iii,
        mode,
        boundary_consistent,
    );

    Ok(AdmissibilityReport {
        line_singularity,
        quasi_convenient,
        pure_z1_power_present,
        nondegenerate,
        condition_iii,
        mode,
        alphas,
        a_sup,
        boundary_consistent,
        overall,
    })
}

#[allow(clippy::too_many_arguments)]
fn aggregate_overall(
    line: &LineSingularityReport,
    quasi_convenient: bool,
    quasi_fail_at: &str,
    pure_z1_power: bool,
    nondegenerate: &[(String, NondegeneracyVerdict)],
    condition_iii: &ConditionIii,
    mode: Mode,
    boundary_consistent: bool,
) -> Overall {
    if pure_z1_power {
        return Overall::NotAdmissible(
            "family contains a pure z1-power term, so it would be convenient with an isolated singularity"
                .into(),
        );
    }
    if !line.axis_contained {
        return Overall::NotAdmissible(
            "f or one of its z-partials does not vanish identically on the z1-axis".into(),
        );
    }
    if line.restriction_isolated == IsolatedStatus::No {
        return Overall::NotAdmissible(
            "restriction to z1 = 0 does not have an isolated critical point".into(),
        );
    }
    if !quasi_convenient {
        return Overall::NotAdmissible(format!(
            "f_t is not quasi-convenient at t = {quasi_fail_at}"
        ));
    }
    let iii_ok = match (mode, condition_iii) {
        (_, ConditionIii::PassStrict) => true,
        (Mode::PerVertexDomination, ConditionIii::PassPerVertex) => true,
        _ => false,
    };
    if !iii_ok {
        let offender = match condition_iii {
            ConditionIii::Fail { offender } => format!("{offender:?}"),
            ConditionIii::PassPerVertex => "per-vertex level only".to_string(),
            ConditionIii::PassStrict => unreachable!(),
        };
        return Overall::NotAdmissible(format!(
            "condition (iii) fails in the selected mode: {offender}"
        ));
    }
    for (t, v) in nondegenerate {
        if v.status == NdStatus::Degenerate {
            return Overall::NotAdmissible(format!("f_t is Newton degenerate at t = {t}"));
        }
    }
    if let SliceProbe::Fail(w) = &line.slice_probe {
        return Overall::NotAdmissible(format!(
            "slice probe found an off-axis critical point near z1 = {} at t = {} (numerical witness)",
            w.z1, w.t
        ));
    }
    for (t, v) in nondegenerate {
        if v.status == NdStatus::Unknown {
            return Overall::Unknown(format!("non-degeneracy undecided at t = {t}"));
        }
    }
    if line.restriction_isolated == IsolatedStatus::Unknown {
        return Overall::Unknown("restriction Milnor number undecided".into());
    }
    if !boundary_consistent {
        return Overall::Unknown(
            "z1-free boundary data varies across the nonzero t-samples".into(),
        );
    }
    if matches!(line.slice_probe, SliceProbe::Skipped) {
        return Overall::Unknown("slice probe skipped".into());
    }
    Overall::Admissible
}

/// Default parameter samples: the degenerate point t = 0 plus nonzero
/// rationals of mixed sign and size.
pub fn default_t_samples() -> Vec<Q> {
    vec![
        Q::from_integer(0.into()),
        Q::from_integer(1.into()),
        Q::new(1.into(), 2.into()),
        Q::from_integer((-2).into()),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_family;
    use crate::poly::q_int;

    fn family(src: &str) -> PolyFamily {
        parse_family(src).unwrap()
    }

    #[test]
    fn example_families_are_admissible() {
        for src in [
            "z2^2+z3^2+t*z1^2*z2^2*z3^2",
            "z2^4+z3^3+t*z1^2*z2^4*z3^3",
        ] {
            let r = check_admissible(
                &family(src),
                &default_t_samples(),
                Mode::StrictSup,
                3,
                42,
            )
            .unwrap();
            assert_eq!(r.overall, Overall::Admissible, "{src}: {:?}", r.overall);
            assert_eq!(r.condition_iii, ConditionIii::PassStrict);
        }
    }

    #[test]
    fn second_example_needs_per_vertex_mode() {
        let f = family("z2^2+z3^2+z1*z2^2*z3^2+t*z1*z2^2");
        let strict = check_admissible(&f, &default_t_samples(), Mode::StrictSup, 3, 42).unwrap();
        assert_eq!(
            strict.condition_iii,
            ConditionIii::Fail {
                offender: vec![1, 2, 0]
            }
        );
        assert!(matches!(strict.overall, Overall::NotAdmissible(_)));

        let pv =
            check_admissible(&f, &default_t_samples(), Mode::PerVertexDomination, 3, 42).unwrap();
        assert_eq!(pv.condition_iii, ConditionIii::PassPerVertex);
        assert_eq!(pv.overall, Overall::Admissible, "{:?}", pv.overall);
    }

    #[test]
    fn line_singularity_reports_restriction_mu() {
        let r = check_line_singularity(
            &family("z2^2+z3^2+t*z1^2*z2^2*z3^2"),
            &default_t_samples(),
            3,
            42,
        );
        assert!(r.axis_contained);
        assert_eq!(r.restriction_isolated, IsolatedStatus::Yes(1));
        assert!(matches!(r.slice_probe, SliceProbe::Pass));

        let r = check_line_singularity(
            &family("z2^4+z3^3+t*z1^2*z2^4*z3^3"),
            &default_t_samples(),
            3,
            42,
        );
        assert_eq!(r.restriction_isolated, IsolatedStatus::Yes(6));
    }

    #[test]
    fn axis_containment_is_syntactic() {
        let r = check_line_singularity(&family("z1*z2+z3^2"), &default_t_samples(), 3, 42);
        assert!(!r.axis_contained);
    }

    #[test]
    fn pure_z1_power_is_rejected() {
        let r = check_admissible(
            &family("z1^5+z2^2+z3^2"),
            &default_t_samples(),
            Mode::PerVertexDomination,
            3,
            42,
        )
        .unwrap();
        match &r.overall {
            Overall::NotAdmissible(reason) => assert!(reason.contains("pure z1-power")),
            other => panic!("expected NotAdmissible, got {other:?}"),
        }
    }

    #[test]
    fn condition_iii_fail_case() {
        let f = family("z2^2+z3^2+t*z1*z2");
        let germ = f.germ_at(&q_int(1));
        let np = newton_polyhedron(&germ).unwrap();
        let data = z1zero_vertex_data(&np).unwrap();
        let res = check_condition_iii(&f, &data, Mode::PerVertexDomination);
        assert_eq!(
            res,
            ConditionIii::Fail {
                offender: vec![1, 1, 0]
            }
        );
    }

    #[test]
    fn axis_containment_matches_degree_characterization() {
        // Provable characterization: axis containment iff every monomial
        // has ztilde-degree >= 2.
        for src in [
            "z2^2+z3^2+t*z1^2*z2^2*z3^2",
            "z1*z2+z3^2",
            "z2^2+t*z1^4*z2",
            "z1^3*z2^2+z3^2",
            "t*z1*z2^2+z2*z3",
        ] {
            let f = family(src);
            let syntactic = f.vanishes_on_axis()
                && (1..=f.n()).all(|j| f.partial_z(j).vanishes_on_axis());
            let by_degree = f.term_map().keys().all(|e| e.ztilde_degree() >= 2);
            assert_eq!(syntactic, by_degree, "{src}");
        }
    }
}
