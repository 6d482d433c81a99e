//! Certificate assembly: admissibility plus Le-number constancy across the
//! sampled parameter values.
//!
//! The verdict is EQUISINGULAR exactly when every sub-check is a definite
//! pass; it asserts a *sufficient* condition and never claims
//! non-equisingularity. Constancy is sampled at fixed rationals, guarded by
//! an exact check that the Newton boundary agrees across the nonzero
//! samples, and the certificate records the samples it used.

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::admissibility::{check_admissible, AdmissibilityReport, Mode, Overall};
use crate::le::{
    attach_slice_check, choose_exponent_a, le_numbers, nu_with_power, random_small_rational,
    LeNumbers,
};
use crate::newton::{newton_polyhedron, z1zero_vertex_data};
use crate::poly::{PolyFamily, Q};
use crate::Result;

pub const VERDICT_BASIS: &str = "sufficient conditions verified: admissible family of line \
singularities with Le numbers constant across the sampled parameters; such a family has a \
Bekka (c)-regular natural stratification and is topologically equisingular. The converse is \
not asserted: INCONCLUSIVE never means non-equisingular.";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Verdict {
    #[serde(rename = "EQUISINGULAR")]
    Equisingular,
    #[serde(rename = "INCONCLUSIVE")]
    Inconclusive,
}

#[derive(Clone, Debug, Serialize)]
pub struct ModesEcho {
    pub condition_iii: Mode,
    pub nondegen_tier: u8,
    pub t_samples: Vec<String>,
    pub exponent_a: Option<u32>,
    pub slice_cross_check: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct Certificate {
    pub input_digest: String,
    pub admissibility: AdmissibilityReport,
    pub le_table: BTreeMap<String, LeNumbers>,
    pub constancy: bool,
    pub verdict: Verdict,
    pub verdict_basis: String,
    pub reasons: Vec<String>,
    pub seed: u64,
    pub version: String,
    pub modes: ModesEcho,
}

#[derive(Clone, Debug)]
pub struct CertifyOptions {
    pub t_samples: Vec<Q>,
    pub mode: Mode,
    pub tier: u8,
    pub seed: u64,
    pub threads: usize,
    pub slice_cross_check: bool,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        CertifyOptions {
            t_samples: crate::admissibility::default_t_samples(),
            mode: Mode::PerVertexDomination,
            tier: 3,
            seed: 42,
            threads: 1,
            slice_cross_check: true,
        }
    }
}

/// Content hash of the normalized input text.
pub fn input_digest(f: &PolyFamily) -> String {
    let canonical = f.to_string();
    let hash = Sha256::digest(canonical.as_bytes());
    hash.iter().map(|b| format!("{b:02x}")).collect()
}

pub fn certify_family(f: &PolyFamily, opts: &CertifyOptions) -> Result<Certificate> {
    let mut reasons: Vec<String> = Vec::new();

    let admissibility = check_admissible(f, &opts.t_samples, opts.mode, opts.tier, opts.seed)?;
    match &admissibility.overall {
        Overall::Admissible => {}
        Overall::NotAdmissible(r) => reasons.push(format!("not admissible: {r}")),
        Overall::Unknown(r) => reasons.push(format!("admissibility unknown: {r}")),
    }

    // Exact sampling guard: the Newton boundary must agree across all
    // nonzero samples, otherwise the sampled constancy claim is about
    // different generic boundaries.
    let zero = Q::from_integer(0.into());
    let nonzero: Vec<&Q> = opts.t_samples.iter().filter(|t| **t != zero).collect();
    let mut boundaries = Vec::new();
    for t in &nonzero {
        let germ = f.germ_at(t);
        if germ.is_zero() {
            reasons.push(format!("f_t vanishes identically at t = {t}"));
            continue;
        }
        let np = newton_polyhedron(&germ)?;
        boundaries.push((t.to_string(), np.vertices.clone(), np.compact_faces.clone()));
    }
    if boundaries
        .windows(2)
        .any(|w| w[0].1 != w[1].1 || w[0].2 != w[1].2)
    {
        reasons.push("Newton boundary differs between nonzero t-samples".into());
    }

    // Shared exponent and per-sample Le numbers.
    let germs: Vec<_> = opts.t_samples.iter().map(|t| f.germ_at(t)).collect();
    let mut exponent_a = None;
    let mut le_table: BTreeMap<String, LeNumbers> = BTreeMap::new();
    if germs.iter().any(|g| g.is_zero()) {
        reasons.push("a sampled germ is identically zero; Le numbers not computed".into());
    } else {
        match choose_exponent_a(&germs, opts.tier, opts.seed) {
            Err(e) => reasons.push(format!("exponent selection failed: {e}")),
            Ok(a) => {
                exponent_a = Some(a);
                let results = le_for_samples(f, &opts.t_samples, a, opts);
                for (t, res) in opts.t_samples.iter().zip(results) {
                    match res {
                        Ok(le) => {
                            le_table.insert(t.to_string(), le);
                        }
                        Err(e) => reasons.push(format!("Le numbers at t = {t} failed: {e}")),
                    }
                }
            }
        }
    }

    let pairs: Vec<(u64, u64)> = le_table.values().map(|l| (l.lambda0, l.lambda1)).collect();
    let complete = le_table.len() == opts.t_samples.len();
    let constancy = complete && pairs.windows(2).all(|w| w[0] == w[1]);
    if complete && !constancy {
        reasons.push("Lê numbers not constant across the t-samples".into());
    }

    let verdict = if admissibility.overall == Overall::Admissible && constancy && reasons.is_empty()
    {
        Verdict::Equisingular
    } else {
        Verdict::Inconclusive
    };

    Ok(Certificate {
        input_digest: input_digest(f),
        admissibility,
        le_table,
        constancy,
        verdict,
        verdict_basis: VERDICT_BASIS.to_string(),
        reasons,
        seed: opts.seed,
        version: env!("CARGO_PKG_VERSION").to_string(),
        modes: ModesEcho {
            condition_iii: opts.mode,
            nondegen_tier: opts.tier,
            t_samples: opts.t_samples.iter().map(|t| t.to_string()).collect(),
            exponent_a,
            slice_cross_check: opts.slice_cross_check,
        },
    })
}

/// Per-sample Le numbers with a shared exponent; independent samples may
/// run on scoped threads, results are collected back in sample order (all
/// quantities are exact integers, so scheduling cannot change them).
fn le_for_samples(
    f: &PolyFamily,
    t_samples: &[Q],
    a: u32,
    opts: &CertifyOptions,
) -> Vec<Result<LeNumbers>> {
    let job = |t: &Q| -> Result<LeNumbers> {
        let germ = f.germ_at(t);
        let mut le = le_numbers(&germ, a, opts.tier, opts.seed)?;
        if opts.slice_cross_check {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0x5eed_51ce);
            attach_slice_check(&mut le, &germ, 3, &mut rng, opts.tier, opts.seed)?;
        }
        Ok(le)
    };
    if opts.threads <= 1 || t_samples.len() <= 1 {
        return t_samples.iter().map(job).collect();
    }
    std::thread::scope(|scope| {
        let handles: Vec<_> = t_samples
            .iter()
            .map(|t| scope.spawn(move || job(t)))
            .collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct DeformationEntry {
    pub t: String,
    pub s: Vec<String>,
    pub nu_base: u64,
    pub nu_deformed: u64,
    pub equal: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct DeformationReport {
    pub exponent_a: u32,
    pub entries: Vec<DeformationEntry>,
    pub all_equal: bool,
}

/// Perturbing the coefficients of the z1-free boundary vertices must not
/// change nu(f_t + z1^a): the vertices are already on the boundary, so the
/// polyhedron is unchanged. A violation is a bug, not a math finding.
pub fn deformation_invariance_check(
    f: &PolyFamily,
    t_samples: &[Q],
    a: u32,
    s_draws: usize,
    seed: u64,
) -> Result<DeformationReport> {
    let zero = Q::from_integer(0.into());
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xdef0_99);
    let mut entries = Vec::new();
    for t in t_samples.iter().filter(|t| **t != zero) {
        let germ = f.germ_at(t);
        if germ.is_zero() {
            continue;
        }
        let np = newton_polyhedron(&germ)?;
        let data = z1zero_vertex_data(&np)?;
        let nu_base = nu_with_power(&germ, a)?;
        for _ in 0..s_draws {
            let mut g = germ.clone();
            let mut s_used = Vec::new();
            for alpha in &data.alphas {
                // Avoid exact cancellation of an existing coefficient.
                let mut s_i = random_small_rational(&mut rng);
                while germ.coefficient(alpha) + &s_i == zero {
                    s_i = random_small_rational(&mut rng);
                }
                s_used.push(s_i.to_string());
                g = g.add_term(alpha.clone(), s_i);
            }
            let nu_deformed = nu_with_power(&g, a)?;
            entries.push(DeformationEntry {
                t: t.to_string(),
                s: s_used,
                nu_base,
                nu_deformed,
                equal: nu_base == nu_deformed,
            });
        }
    }
    let all_equal = entries.iter().all(|e| e.equal);
    Ok(DeformationReport {
        exponent_a: a,
        entries,
        all_equal,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_family;

    fn family(src: &str) -> PolyFamily {
        parse_family(src).unwrap()
    }

    #[test]
    fn example_one_is_equisingular() {
        let f = family("z2^4+z3^3+t*z1^2*z2^4*z3^3");
        let cert = certify_family(&f, &CertifyOptions::default()).unwrap();
        assert_eq!(cert.verdict, Verdict::Equisingular, "{:?}", cert.reasons);
        assert!(cert.constancy);
        for le in cert.le_table.values() {
            assert_eq!((le.lambda0, le.lambda1), (0, 6));
        }
    }

    #[test]
    fn nonconstant_family_is_inconclusive() {
        let f = family("vars t, z1, z2, z3\nf = z2^2+z3^4+t*z3^2");
        let cert = certify_family(&f, &CertifyOptions::default()).unwrap();
        assert_eq!(cert.verdict, Verdict::Inconclusive);
        assert!(!cert.constancy);
        assert!(cert
            .reasons
            .iter()
            .any(|r| r.contains("not constant")), "{:?}", cert.reasons);
        assert_eq!(cert.le_table["0"].lambda1, 3);
        assert_eq!(cert.le_table["1"].lambda1, 1);
    }

    #[test]
    fn certificates_are_reproducible() {
        let f = family("z2^2+z3^2+t*z1^2*z2^2*z3^2");
        let opts = CertifyOptions::default();
        let a = serde_json::to_string(&certify_family(&f, &opts).unwrap()).unwrap();
        let b = serde_json::to_string(&certify_family(&f, &opts).unwrap()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn strict_implies_per_vertex_verdict() {
        let f = family("z2^4+z3^3+t*z1^2*z2^4*z3^3");
        let strict = certify_family(
            &f,
            &CertifyOptions {
                mode: Mode::StrictSup,
                ..CertifyOptions::default()
            },
        )
        .unwrap();
        let pv = certify_family(&f, &CertifyOptions::default()).unwrap();
        assert_eq!(strict.verdict, Verdict::Equisingular);
        assert_eq!(pv.verdict, Verdict::Equisingular);
    }

    #[test]
    fn deformation_invariance_on_example_one() {
        let f = family("z2^4+z3^3+t*z1^2*z2^4*z3^3");
        let report =
            deformation_invariance_check(&f, &crate::admissibility::default_t_samples(), 6, 2, 42)
                .unwrap();
        assert!(report.all_equal);
        assert!(report.entries.iter().all(|e| e.nu_base == 30));
    }

    #[test]
    fn threads_do_not_change_the_certificate() {
        let f = family("z2^2+z3^2+z1*z2^2*z3^2+t*z1*z2^2");
        let seq = certify_family(&f, &CertifyOptions::default()).unwrap();
        let par = certify_family(
            &f,
            &CertifyOptions {
                threads: 4,
                ..CertifyOptions::default()
            },
        )
        .unwrap();
        assert_eq!(
            serde_json::to_string(&seq).unwrap(),
            serde_json::to_string(&par).unwrap()
        );
    }
}
