//! Numerical regularity probe.
//!
//! Along seeded random arcs on V(f) \ Sigma f approaching the origin we
//! monitor the decay of four ratios: the Thom-type ratio R1, the wedge
//! ratio R2, and the two control-function ratios C1, C2 whose joint decay
//! characterizes (c)-regularity of the open stratum over the singular one
//! with respect to rho. Decay is judged by final/initial < 0.2 and a
//! fitted log-log slope > 0.1; both thresholds are engineering choices
//! (the theory is asymptotic and gives no rates) and are echoed into every
//! report.
//!
//! Floating point is confined to this module and to witness searches; a
//! probe report is evidence, never a certificate.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::newton::{newton_polyhedron, z1zero_vertex_data};
use crate::numeric::newton_scalar;
use crate::poly::{q_to_f64, ComplexPoint, Expo, PolyFamily, Q};
use crate::{Error, Result};

pub const PASS_FINAL_OVER_INITIAL: f64 = 0.2;
pub const PASS_MIN_SLOPE: f64 = 0.1;
const RESIDUAL_REL: f64 = 1e-12;
const WEDGE_FLOOR: f64 = 1e-300;
const GRAD_FLOOR: f64 = 1e-14;
/// When sin^2 of the angle between the gradients falls below the relative
/// noise of the defining subtraction, the computed wedge is meaningless
/// and the point is skipped rather than reported.
const WEDGE_NOISE_REL: f64 = 1e-12;

/// Which stratum the arcs approach: the (t, z1)-plane for line
/// singularities, or the t-axis for families with isolated singular points
/// (used by the Briancon-Speder style cross-checks).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Stratum {
    #[serde(rename = "line")]
    Line,
    #[serde(rename = "isolated")]
    Isolated,
}

impl Stratum {
    pub fn parse(s: &str) -> Result<Stratum> {
        match s {
            "line" => Ok(Stratum::Line),
            "isolated" => Ok(Stratum::Isolated),
            other => Err(Error::InvalidInput(format!(
                "unknown stratum `{other}` (expected line or isolated)"
            ))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ProbeConfig {
    pub arcs: usize,
    pub seed: u64,
    pub s0: f64,
    pub ratio: f64,
    pub steps: usize,
    pub stratum: Stratum,
    /// Parameter value at which the boundary vertices feeding rho are read.
    pub boundary_t: Q,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        ProbeConfig {
            arcs: 20,
            seed: 42,
            s0: 0.1,
            ratio: 0.5,
            steps: 14,
            stratum: Stratum::Line,
            boundary_t: Q::from_integer(1.into()),
        }
    }
}

/// rho(t, z) = sum_i |z^{alpha_i}|^2 built from boundary vertices; for line
/// singularities the alpha_i are the z1-free vertices, so rho vanishes
/// exactly on the singular axis (given quasi-convenience).
#[derive(Clone, Debug)]
pub struct ControlFunction {
    pub alphas: Vec<Expo>,
    n: usize,
}

impl ControlFunction {
    pub fn new(n: usize, alphas: Vec<Expo>) -> Self {
        assert!(alphas.iter().all(|a| a.len() == n));
        ControlFunction { alphas, n }
    }

    /// Monomial values z^{alpha_i}.
    fn monomials(&self, z: &[Complex64]) -> Vec<Complex64> {
        self.alphas
            .iter()
            .map(|alpha| {
                let mut m = Complex64::new(1.0, 0.0);
                for (j, &b) in alpha.0.iter().enumerate() {
                    m *= z[j].powi(b as i32);
                }
                m
            })
            .collect()
    }

    pub fn eval(&self, z: &[Complex64]) -> f64 {
        self.monomials(z).iter().map(|m| m.norm_sqr()).sum()
    }

    pub fn monomial_abs_sum(&self, z: &[Complex64]) -> f64 {
        self.monomials(z).iter().map(|m| m.norm()).sum()
    }

    /// Gradient in (t, z1, ..., zn) under the conjugated convention used
    /// for f as well; the t-component is identically zero.
    pub fn grad_tz(&self, z: &[Complex64]) -> Vec<Complex64> {
        let mut grad = vec![Complex64::new(0.0, 0.0); self.n + 1];
        for alpha in &self.alphas {
            let mono: Complex64 = {
                let mut m = Complex64::new(1.0, 0.0);
                for (j, &b) in alpha.0.iter().enumerate() {
                    m *= z[j].powi(b as i32);
                }
                m
            };
            for (j, &b) in alpha.0.iter().enumerate() {
                if b == 0 {
                    continue;
                }
                // d(z^alpha)/dz_j * conj(z^alpha), computed without division.
                let mut deriv = Complex64::new(b as f64, 0.0);
                for (k, &bk) in alpha.0.iter().enumerate() {
                    let e = if k == j { bk - 1 } else { bk };
                    deriv *= z[k].powi(e as i32);
                }
                grad[j + 1] += (deriv * mono.conj()).conj();
            }
        }
        grad
    }
}

/// Control function for a family: z1-free boundary vertices in line mode,
/// all boundary vertices in isolated mode, read off at `boundary_t`.
pub fn control_function(f: &PolyFamily, stratum: Stratum, boundary_t: &Q) -> Result<ControlFunction> {
    let germ = f.germ_at(boundary_t);
    let np = newton_polyhedron(&germ)?;
    let alphas = match stratum {
        Stratum::Line => z1zero_vertex_data(&np)?.alphas,
        Stratum::Isolated => np.vertices.clone(),
    };
    Ok(ControlFunction::new(f.n(), alphas))
}

#[derive(Clone, Debug, Serialize)]
pub struct Arc {
    pub arc_id: usize,
    pub s_grid: Vec<f64>,
    #[serde(skip)]
    pub points: Vec<ComplexPoint>,
    pub adjusted_var: usize,
    pub redraws: u32,
    pub newton_iters: Vec<usize>,
}

/// Gradient pack at one probe point, with the conjugation convention
/// applied identically to f and rho.
#[derive(Clone, Debug)]
pub struct GradientData {
    pub grad_f: Vec<Complex64>,
    pub grad_rho: Vec<Complex64>,
    /// |d_{t,z1} f| in line mode, |d_t f| in isolated mode.
    pub small_norm: f64,
    /// |d_{ztilde} f| in line mode, |d_z f| in isolated mode.
    pub trans_norm: f64,
    pub grad_f_norm: f64,
    pub grad_rho_norm: f64,
    pub a_coef: Complex64,
    pub wedge: f64,
    /// Relative deviation in the Pythagorean identity
    /// (wedge/|df|)^2 + |A|^2 |df|^2 = |drho|^2.
    pub identity_reldev: f64,
    /// Relative deviation in wedge^2 + |<drho, df>|^2 = |df|^2 |drho|^2.
    pub cauchy_schwarz_reldev: f64,
}

/// Evaluate all gradients and derived quantities at a point off the
/// singular locus.
pub fn gradients_at(
    partials: &[PolyFamily],
    rho: &ControlFunction,
    p: &ComplexPoint,
    stratum: Stratum,
) -> Result<GradientData> {
    let grad_f: Vec<Complex64> = partials
        .iter()
        .map(|g| g.evaluate(p).map(|v| v.conj()))
        .collect::<Result<_>>()?;
    let grad_f_norm = norm(&grad_f);
    if grad_f_norm < GRAD_FLOOR {
        return Err(Error::InvalidInput(
            "probe point lies on the singular locus (gradient below floor)".into(),
        ));
    }
    let grad_rho = rho.grad_tz(&p.z);
    let grad_rho_norm = norm(&grad_rho);

    let inner: Complex64 = grad_rho
        .iter()
        .zip(&grad_f)
        .map(|(u, v)| u * v.conj())
        .sum();
    let a_coef = inner / Complex64::new(grad_f_norm * grad_f_norm, 0.0);
    let prod = grad_f_norm * grad_f_norm * grad_rho_norm * grad_rho_norm;
    let wedge_sq = (prod - inner.norm_sqr()).max(0.0);
    let wedge = wedge_sq.sqrt();

    let small_norm = match stratum {
        Stratum::Line => (grad_f[0].norm_sqr() + grad_f[1].norm_sqr()).sqrt(),
        Stratum::Isolated => grad_f[0].norm(),
    };
    let trans_norm = match stratum {
        Stratum::Line => norm(&grad_f[2..]),
        Stratum::Isolated => norm(&grad_f[1..]),
    };

    let lhs = wedge_sq / (grad_f_norm * grad_f_norm) + a_coef.norm_sqr() * grad_f_norm * grad_f_norm;
    let rhs = grad_rho_norm * grad_rho_norm;
    let identity_reldev = if rhs > 0.0 { (lhs - rhs).abs() / rhs } else { 0.0 };
    let cs_lhs = wedge_sq + inner.norm_sqr();
    let cauchy_schwarz_reldev = if prod > 0.0 {
        (cs_lhs - prod).abs() / prod
    } else {
        0.0
    };

    Ok(GradientData {
        grad_f,
        grad_rho,
        small_norm,
        trans_norm,
        grad_f_norm,
        grad_rho_norm,
        a_coef,
        wedge,
        identity_reldev,
        cauchy_schwarz_reldev,
    })
}

fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

/// Draw arcs on V(f) \ Sigma f: a random direction shrinking like s (with
/// z1 shrinking like sqrt(s) in line mode, to approach non-tangentially to
/// {z1 = 0}), then a damped Newton projection in one randomly chosen
/// coordinate of the directional block.
pub fn make_arcs(f: &PolyFamily, cfg: &ProbeConfig) -> Result<Vec<Arc>> {
    let n = f.n();
    let partials = f.partials();
    let eligible: Vec<usize> = match cfg.stratum {
        Stratum::Line => (2..=n).filter(|&j| !partials[j].is_zero()).collect(),
        Stratum::Isolated => (1..=n).filter(|&j| !partials[j].is_zero()).collect(),
    };
    if eligible.is_empty() {
        return Err(Error::ArcGeneration(
            "no coordinate available for the Newton projection".into(),
        ));
    }
    let s_grid: Vec<f64> = (0..=cfg.steps).map(|k| cfg.s0 * cfg.ratio.powi(k as i32)).collect();
    let coeff_scale = 1.0
        + f.terms()
            .flat_map(|(_, c)| c.coeffs().iter())
            .map(|q| q_to_f64(&q.clone()).abs())
            .fold(0.0, f64::max);

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut arcs = Vec::new();
    let mut failed = 0usize;
    for arc_id in 0..cfg.arcs {
        let mut made = None;
        let mut redraws = 0u32;
        while redraws <= 5 {
            match draw_one_arc(f, &partials, &eligible, &s_grid, coeff_scale, cfg, &mut rng) {
                Some((points, adjusted_var, iters)) => {
                    made = Some(Arc {
                        arc_id,
                        s_grid: s_grid.clone(),
                        points,
                        adjusted_var,
                        redraws,
                        newton_iters: iters,
                    });
                    break;
                }
                None => redraws += 1,
            }
        }
        match made {
            Some(a) => arcs.push(a),
            None => failed += 1,
        }
    }
    if failed * 2 > cfg.arcs {
        return Err(Error::ArcGeneration(format!(
            "{failed} of {} arcs exhausted their redraws",
            cfg.arcs
        )));
    }
    Ok(arcs)
}

#[allow(clippy::too_many_arguments)]
fn draw_one_arc(
    f: &PolyFamily,
    partials: &[PolyFamily],
    eligible: &[usize],
    s_grid: &[f64],
    coeff_scale: f64,
    cfg: &ProbeConfig,
    rng: &mut ChaCha8Rng,
) -> Option<(Vec<ComplexPoint>, usize, Vec<usize>)> {
    let n = f.n();
    let tau = random_phase(rng);
    let zeta = random_phase(rng);
    let dir: Vec<Complex64> = (0..n).map(|_| random_phase(rng)).collect();
    let adjust = eligible[rng.gen_range(0..eligible.len())];

    let mut points = Vec::with_capacity(s_grid.len());
    let mut iters = Vec::with_capacity(s_grid.len());
    // Track one analytic branch: warm-start each projection from the
    // previous grid point's adjusted coordinate (scaled), otherwise the
    // projection may hop between sheets of V(f) and the ratio sequences
    // jump mid-arc.
    let mut warm: Option<Complex64> = None;
    for &s in s_grid {
        // The along-stratum coordinates shrink like sqrt(s), slower than
        // the transverse ones, so arcs approach the origin non-tangentially
        // to the stratum and the along-stratum derivative terms are
        // genuinely exercised: z1 in line mode, t in isolated mode.
        let t = match cfg.stratum {
            Stratum::Line => tau * s,
            Stratum::Isolated => tau * s.sqrt(),
        };
        let mut z: Vec<Complex64> = (0..n)
            .map(|j| {
                if cfg.stratum == Stratum::Line && j == 0 {
                    zeta * s.sqrt()
                } else {
                    dir[j] * s
                }
            })
            .collect();
        let eval = |w: Complex64| {
            let mut zz = z.clone();
            zz[adjust - 1] = w;
            let p = ComplexPoint { t, z: zz };
            let v = f.evaluate(&p).unwrap_or(Complex64::new(f64::NAN, 0.0));
            let dv = partials[adjust]
                .evaluate(&p)
                .unwrap_or(Complex64::new(f64::NAN, 0.0));
            (v, dv)
        };
        let start = match warm {
            Some(prev) => prev * cfg.ratio,
            None => z[adjust - 1],
        };
        let (w, it) = newton_scalar(eval, start, 1e-15 * coeff_scale, 60)?;
        z[adjust - 1] = w;
        warm = Some(w);
        if w.norm() == 0.0 {
            return None;
        }
        let p = ComplexPoint::new(t, z).ok()?;
        // Residual acceptance: |f| <= 1e-12 (1 + |grad f|).
        let grad_norm = {
            let mut acc = 0.0f64;
            for g in partials {
                acc += g.evaluate(&p).ok()?.norm_sqr();
            }
            acc.sqrt()
        };
        let residual = f.evaluate(&p).ok()?.norm();
        if residual > RESIDUAL_REL * (1.0 + grad_norm) {
            return None;
        }
        // The directional block must stay off the stratum.
        let block_norm = match cfg.stratum {
            Stratum::Line => norm(&p.z[1..]),
            Stratum::Isolated => norm(&p.z),
        };
        if block_norm == 0.0 {
            return None;
        }
        points.push(p);
        iters.push(it);
    }
    Some((points, adjust, iters))
}

fn random_phase(rng: &mut ChaCha8Rng) -> Complex64 {
    let theta = rng.gen_range(0.0..std::f64::consts::TAU);
    Complex64::from_polar(1.0, theta)
}

#[derive(Clone, Debug, Serialize)]
pub struct RatioRow {
    pub k: usize,
    pub s: f64,
    pub r1: f64,
    pub r2: f64,
    pub c1: f64,
    pub c2: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ArcReport {
    pub arc_id: usize,
    pub adjusted_var: usize,
    pub redraws: u32,
    pub rows: Vec<RatioRow>,
    pub skipped: Vec<usize>,
    /// Fitted log-log slopes of (R1, R2, C1, C2) against s.
    pub slopes: [f64; 4],
    pub final_over_initial: [f64; 4],
    pub passes: [bool; 4],
}

#[derive(Clone, Debug, Serialize)]
pub struct ArcProbeReport {
    pub stratum: Stratum,
    pub arcs_requested: usize,
    pub arcs_used: usize,
    pub seed: u64,
    pub s0: f64,
    pub ratio: f64,
    pub steps: usize,
    pub thresholds: Thresholds,
    #[serde(serialize_with = "ser_expos")]
    pub alphas: Vec<Expo>,
    pub arcs: Vec<ArcReport>,
    /// Fraction of arcs passing each of (R1, R2, C1, C2).
    pub pass_fraction: [f64; 4],
    pub identity_max_reldev: f64,
    pub cauchy_schwarz_max_reldev: f64,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct Thresholds {
    pub final_over_initial: f64,
    pub min_slope: f64,
}

fn ser_expos<S: serde::Serializer>(v: &[Expo], s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for e in v {
        seq.serialize_element(&e.0)?;
    }
    seq.end()
}

/// Full probe: arcs, all four ratio families, decay fits, identity checks.
pub fn probe_family(f: &PolyFamily, cfg: &ProbeConfig) -> Result<ArcProbeReport> {
    let rho = control_function(f, cfg.stratum, &cfg.boundary_t)?;
    let partials = f.partials();
    let arcs = make_arcs(f, cfg)?;

    let mut reports = Vec::new();
    let mut identity_max = 0.0f64;
    let mut cs_max = 0.0f64;
    for arc in &arcs {
        let mut rows = Vec::new();
        let mut skipped = Vec::new();
        for (k, p) in arc.points.iter().enumerate() {
            let g = match gradients_at(&partials, &rho, p, cfg.stratum) {
                Ok(g) => g,
                Err(_) => {
                    skipped.push(k);
                    continue;
                }
            };
            identity_max = identity_max.max(g.identity_reldev);
            cs_max = cs_max.max(g.cauchy_schwarz_reldev);
            let prod = g.grad_f_norm * g.grad_rho_norm;
            if g.wedge < WEDGE_FLOOR || g.wedge * g.wedge <= WEDGE_NOISE_REL * prod * prod {
                skipped.push(k);
                continue;
            }
            let r1 = (g.grad_f[0].norm() + rho.monomial_abs_sum(&p.z)) / norm(&g.grad_f[1..]);
            let r2 = g.small_norm * g.grad_rho_norm / g.wedge;
            let c1 = g.a_coef.norm() * g.small_norm * g.grad_f_norm / g.wedge;
            let c2 = g.small_norm / g.trans_norm;
            if ![r1, r2, c1, c2].iter().all(|v| v.is_finite()) {
                skipped.push(k);
                continue;
            }
            rows.push(RatioRow {
                k,
                s: arc.s_grid[k],
                r1,
                r2,
                c1,
                c2,
            });
        }
        let series = |pick: fn(&RatioRow) -> f64| -> Vec<(f64, f64)> {
            rows.iter().map(|r| (r.s, pick(r))).collect()
        };
        let all = [
            series(|r| r.r1),
            series(|r| r.r2),
            series(|r| r.c1),
            series(|r| r.c2),
        ];
        let mut slopes = [f64::NAN; 4];
        let mut foi = [f64::NAN; 4];
        let mut passes = [false; 4];
        for (i, seq) in all.iter().enumerate() {
            let (slope, ratio_fi) = fit_decay(seq);
            slopes[i] = slope;
            foi[i] = ratio_fi;
            passes[i] = ratio_fi < PASS_FINAL_OVER_INITIAL && slope > PASS_MIN_SLOPE;
        }
        reports.push(ArcReport {
            arc_id: arc.arc_id,
            adjusted_var: arc.adjusted_var,
            redraws: arc.redraws,
            rows,
            skipped,
            slopes,
            final_over_initial: foi,
            passes,
        });
    }

    let used = reports.len().max(1);
    let mut pass_fraction = [0.0f64; 4];
    for i in 0..4 {
        pass_fraction[i] =
            reports.iter().filter(|r| r.passes[i]).count() as f64 / used as f64;
    }

    Ok(ArcProbeReport {
        stratum: cfg.stratum,
        arcs_requested: cfg.arcs,
        arcs_used: reports.len(),
        seed: cfg.seed,
        s0: cfg.s0,
        ratio: cfg.ratio,
        steps: cfg.steps,
        thresholds: Thresholds {
            final_over_initial: PASS_FINAL_OVER_INITIAL,
            min_slope: PASS_MIN_SLOPE,
        },
        alphas: rho.alphas.clone(),
        arcs: reports,
        pass_fraction,
        identity_max_reldev: identity_max,
        cauchy_schwarz_max_reldev: cs_max,
    })
}

/// Least-squares slope of ln(ratio) against ln(s) (positive slope = decay
/// as s -> 0) and the final/initial value ratio.
fn fit_decay(seq: &[(f64, f64)]) -> (f64, f64) {
    let valid: Vec<(f64, f64)> = seq
        .iter()
        .filter(|(s, v)| *s > 0.0 && *v > 0.0 && v.is_finite())
        .map(|&(s, v)| (s.ln(), v.ln()))
        .collect();
    if valid.len() < 3 {
        return (f64::NAN, f64::NAN);
    }
    let n = valid.len() as f64;
    let mx = valid.iter().map(|(x, _)| x).sum::<f64>() / n;
    let my = valid.iter().map(|(_, y)| y).sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for (x, y) in &valid {
        num += (x - mx) * (y - my);
        den += (x - mx) * (x - mx);
    }
    let slope = num / den;
    let foi = (valid.last().unwrap().1 - valid[0].1).exp();
    (slope, foi)
}

/// Per-arc R1 sequences (Thom-type ratio).
pub fn probe_thom_af(f: &PolyFamily, cfg: &ProbeConfig) -> Result<Vec<Vec<f64>>> {
    Ok(probe_family(f, cfg)?
        .arcs
        .iter()
        .map(|a| a.rows.iter().map(|r| r.r1).collect())
        .collect())
}

/// Per-arc R2 sequences (wedge ratio).
pub fn probe_mr3(f: &PolyFamily, cfg: &ProbeConfig) -> Result<Vec<Vec<f64>>> {
    Ok(probe_family(f, cfg)?
        .arcs
        .iter()
        .map(|a| a.rows.iter().map(|r| r.r2).collect())
        .collect())
}

/// Per-arc (C1, C2) sequence pairs.
pub fn probe_abderrahmane(
    f: &PolyFamily,
    cfg: &ProbeConfig,
) -> Result<Vec<(Vec<f64>, Vec<f64>)>> {
    Ok(probe_family(f, cfg)?
        .arcs
        .iter()
        .map(|a| {
            (
                a.rows.iter().map(|r| r.c1).collect(),
                a.rows.iter().map(|r| r.c2).collect(),
            )
        })
        .collect())
}

/// CSV rendering: one row per retained grid point.
pub fn probe_csv(report: &ArcProbeReport) -> String {
    let mut out = String::from("arc_id,k,s,R1,R2,C1,C2\n");
    for arc in &report.arcs {
        for row in &arc.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                arc.arc_id, row.k, row.s, row.r1, row.r2, row.c1, row.c2
            ));
        }
    }
    out
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
    fn rho_vanishes_exactly_on_the_axis() {
        let f = family("z2^4+z3^3+t*z1^2*z2^4*z3^3");
        let rho = control_function(&f, Stratum::Line, &q_int(1)).unwrap();
        let on_axis = vec![
            Complex64::new(0.3, -0.2),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
        ];
        assert_eq!(rho.eval(&on_axis), 0.0);
        assert!(rho.grad_tz(&on_axis).iter().all(|c| c.norm() == 0.0));
        let off_axis = vec![
            Complex64::new(0.3, -0.2),
            Complex64::new(0.05, 0.0),
            Complex64::new(0.0, 0.01),
        ];
        assert!(rho.eval(&off_axis) > 0.0);
    }

    #[test]
    fn rho_on_real_z2_slice_is_a_pure_power() {
        // At z = (_, x, 0) with x real, rho = x^8 and |d rho/dz2| = 4|x|^7.
        let f = family("z2^4+z3^3+t*z1^2*z2^4*z3^3");
        let rho = control_function(&f, Stratum::Line, &q_int(1)).unwrap();
        let x = 0.7f64;
        let z = vec![
            Complex64::new(0.2, 0.1),
            Complex64::new(x, 0.0),
            Complex64::new(0.0, 0.0),
        ];
        assert!((rho.eval(&z) - x.powi(8)).abs() < 1e-15);
        let grad = rho.grad_tz(&z);
        assert!((grad[2].norm() - 4.0 * x.powi(7)).abs() < 1e-12);
        assert_eq!(grad[0].norm(), 0.0);
        assert_eq!(grad[1].norm(), 0.0);
    }

    #[test]
    fn arcs_satisfy_the_residual_invariant() {
        let f = family("z2^4+z3^3+t*z1^2*z2^4*z3^3");
        let cfg = ProbeConfig {
            arcs: 8,
            ..ProbeConfig::default()
        };
        let arcs = make_arcs(&f, &cfg).unwrap();
        assert_eq!(arcs.len(), 8);
        let partials = f.partials();
        for arc in &arcs {
            assert_eq!(arc.points.len(), cfg.steps + 1);
            for p in &arc.points {
                let gn: f64 = partials
                    .iter()
                    .map(|g| g.evaluate(p).unwrap().norm_sqr())
                    .sum::<f64>()
                    .sqrt();
                let res = f.evaluate(p).unwrap().norm();
                assert!(res <= 1e-12 * (1.0 + gn));
                assert!(norm(&p.z[1..]) > 0.0);
            }
            for w in arc.s_grid.windows(2) {
                assert!(w[1] < w[0]);
            }
        }
    }

    #[test]
    fn identity_holds_along_probe_points() {
        let f = family("z2^4+z3^3+t*z1^2*z2^4*z3^3");
        let cfg = ProbeConfig {
            arcs: 6,
            ..ProbeConfig::default()
        };
        let report = probe_family(&f, &cfg).unwrap();
        assert!(report.identity_max_reldev < 1e-9);
        assert!(report.cauchy_schwarz_max_reldev < 1e-9);
    }

    #[test]
    fn example_families_pass_the_probe() {
        for src in [
            "z2^4+z3^3+t*z1^2*z2^4*z3^3",
            "z2^2+z3^2+z1*z2^2*z3^2+t*z1*z2^2",
            "z2^2+z3^2+t*z1^2*z2^2*z3^2",
        ] {
            let report = probe_family(&family(src), &ProbeConfig::default()).unwrap();
            for i in 0..4 {
                assert!(
                    report.pass_fraction[i] >= 0.9,
                    "{src}: ratio {i} pass fraction {}",
                    report.pass_fraction[i]
                );
            }
        }
    }

    #[test]
    fn briancon_speder_isolated_mode_behaviour() {
        let f = family("z3^5+t*z2^6*z3+z2^7*z1+z1^15");
        let cfg = ProbeConfig {
            stratum: Stratum::Isolated,
            ..ProbeConfig::default()
        };
        let report = probe_family(&f, &cfg).unwrap();
        // rho is built from all boundary vertices here; R1 and the rho-free
        // ratio C2 decay on every arc. This family is not convenient, so
        // rho^{-1}(0) contains the whole z2-axis and rho is not a control
        // function for the stratification: the rho-dependent ratio C1
        // levels off on the arcs tracking the linear z3-branch instead of
        // decaying, and only the arcs landing on the z1-power branch show
        // clean C1 decay.
        assert_eq!(report.arcs_used, 20);
        assert!(report.pass_fraction[0] >= 0.9, "R1: {:?}", report.pass_fraction);
        assert!(report.pass_fraction[3] >= 0.9, "C2: {:?}", report.pass_fraction);
        assert!(report.pass_fraction[2] > 0.0, "C1: {:?}", report.pass_fraction);
        assert!(report.identity_max_reldev < 1e-9);
    }

    #[test]
    fn reports_are_bit_reproducible() {
        let f = family("z2^2+z3^2+t*z1^2*z2^2*z3^2");
        let a = serde_json::to_string(&probe_family(&f, &ProbeConfig::default()).unwrap()).unwrap();
        let b = serde_json::to_string(&probe_family(&f, &ProbeConfig::default()).unwrap()).unwrap();
        assert_eq!(a, b);
    }
}
