//! Invariant approximants with certified error bounds.
//!
//! On a group acting on itself by left translations the invariant functions
//! are exactly the homomorphisms, so every approximant here is a homomorphism
//! determined by generator values: directional mean growth for free groups,
//! adjusted values within `η`, and kernel-projected values for finitely
//! presented quotients.

use num::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::finite::TabularOracle;
use crate::kernel::{linf_kernel_project, sup_norm, RationalMatrix};
use crate::lipschitz::{
    delta_defect, lip_norm, DefectReport, DefectWitness, LipFn, NormWitness, Scope,
    StructuredNormTable,
};
use crate::mean_growth::mean_growth;
use crate::presentation::{exponent_matrix, Presentation};
use crate::rational::{rat, rat_int, Rat};
use crate::space::{GroupSpace, MetricBackend};
use crate::word::Word;

/// Certified approximation outcome: the measured defect, the theorem bound,
/// and the achieved distance to the approximant.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ApproximationReport {
    #[serde(with = "crate::rational::rat_string")]
    pub delta_hat: Rat,
    #[serde(with = "crate::rational::rat_string")]
    pub bound: Rat,
    #[serde(with = "crate::rational::rat_string")]
    pub achieved_ball: Rat,
    #[serde(with = "crate::rational::rat_string_opt")]
    #[serde(default)]
    pub achieved_exact: Option<Rat>,
    #[serde(with = "crate::rational::rat_string")]
    pub radius: Rat,
    pub pass: bool,
    pub scope: Scope,
    pub defect_witness: DefectWitness,
    pub norm_witness: NormWitness,
}

impl ApproximationReport {
    /// The achieved error the pass verdict refers to.
    pub fn achieved(&self) -> &Rat {
        self.achieved_exact.as_ref().unwrap_or(&self.achieved_ball)
    }
}

/// Constants of the finitely presented pipeline.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PresentedConstants {
    /// Half the longest relator length.
    #[serde(with = "crate::rational::rat_string")]
    pub c_r: Rat,
    /// Per-instance surrogate `‖x − u‖∞ / ‖A·x‖∞` (zero when `A·x = 0`).
    #[serde(with = "crate::rational::rat_string")]
    pub d_emp: Rat,
    #[serde(with = "crate::rational::rat_string")]
    pub ax_norm: Rat,
    /// Whether `‖A·x‖∞ ≤ C_R · δ̂` held, as the defect chain predicts.
    pub growth_residual_ok: bool,
}

fn generator_growth(f: &LipFn, space: &GroupSpace, radius: &Rat) -> Result<Vec<Rat>> {
    let e = Word::identity();
    (0..space.generator_count())
        .map(|i| Ok(mean_growth(f, space, &Word::generator(i), &e, radius)?.c))
        .collect()
}

/// One offset table per pipeline call; everything exact reads from it.
fn exact_table(f: &LipFn, space: &GroupSpace) -> Result<Option<StructuredNormTable>> {
    match (f.structured_parts(), space.supports_exact_structured()) {
        (Some((_, p)), true) => Ok(Some(StructuredNormTable::new(space, p)?)),
        _ => Ok(None),
    }
}

fn measured_defect(
    f: &LipFn,
    space: &GroupSpace,
    radius: &Rat,
    table: Option<&StructuredNormTable>,
) -> Result<DefectReport> {
    match table {
        Some(t) => {
            let (delta_hat, witness) = t.defect();
            Ok(DefectReport {
                delta_hat,
                witness,
                scope: Scope::Exact,
            })
        }
        None => delta_defect(f, space, radius),
    }
}

fn growth_with(
    f: &LipFn,
    space: &GroupSpace,
    radius: &Rat,
    table: Option<&StructuredNormTable>,
) -> Result<Vec<Rat>> {
    match (table, f.structured_parts()) {
        (Some(t), Some((hom, _))) => t.generator_growth(hom),
        _ => generator_growth(f, space, radius),
    }
}

/// Maximum of `|(f − f̄)(x) − (f − f̄)(y)| / d(x, y)` over ball pairs.
fn difference_norm_on_ball(
    f: &LipFn,
    fbar: &LipFn,
    space: &GroupSpace,
    radius: &Rat,
) -> Result<(Rat, NormWitness)> {
    let ball = space.ball(radius)?;
    let pts: Vec<Word> = ball.words().cloned().collect();
    let diffs: Vec<Rat> = pts
        .iter()
        .map(|w| Ok(f.eval(space, w)? - fbar.eval(space, w)?))
        .collect::<Result<_>>()?;
    let mut best = Rat::zero();
    let mut witness = NormWitness {
        x: Word::identity(),
        y: pts.iter().find(|w| !w.is_identity()).cloned().unwrap_or_else(|| Word::generator(0)),
    };
    for i in 0..pts.len() {
        for j in (i + 1)..pts.len() {
            let num = (&diffs[i] - &diffs[j]).abs();
            if num.is_zero() {
                continue;
            }
            let d = space.distance(&pts[i], &pts[j])?;
            if d.is_zero() {
                if space.is_pseudometric() {
                    continue;
                }
                return Err(Error::ZeroDistance {
                    x: pts[i].display(space.generator_names()),
                    y: pts[j].display(space.generator_names()),
                });
            }
            let ratio = num / d;
            if ratio > best {
                best = ratio;
                witness = NormWitness {
                    x: pts[i].clone(),
                    y: pts[j].clone(),
                };
            }
        }
    }
    Ok((best, witness))
}

/// Distance from `f` to the homomorphism with values `hom`, exact when the
/// structure allows it, otherwise truncated to the ball.
fn approximant_error(
    f: &LipFn,
    hom: &[Rat],
    space: &GroupSpace,
    radius: &Rat,
    table: Option<&StructuredNormTable>,
) -> Result<(Rat, Option<Rat>, NormWitness, Scope)> {
    let fbar = LipFn::homomorphism(hom.to_vec());

    if let (Some(table), Some((fh, _))) = (table, f.structured_parts()) {
        let diff: Vec<Rat> = fh.iter().zip(hom).map(|(a, b)| a - b).collect();
        let (exact, witness) = table.norm_against(&diff)?;
        let ball_radius = {
            let rho = f.support_radius(space)?;
            let rho1 = &rho + rat_int(1);
            if radius > &rho1 {
                radius.clone()
            } else {
                rho1
            }
        };
        let (ball_value, _) = difference_norm_on_ball(f, &fbar, space, &ball_radius)?;
        return Ok((ball_value, Some(exact), witness, Scope::Exact));
    }

    if let Some(order) = space.group_order() {
        let whole = rat_int(order as i64);
        let (value, witness) = difference_norm_on_ball(f, &fbar, space, &whole)?;
        return Ok((value.clone(), Some(value), witness, Scope::Exact));
    }

    let (value, witness) = difference_norm_on_ball(f, &fbar, space, radius)?;
    Ok((value, None, witness, Scope::Ball(radius.clone())))
}

fn build_report(
    defect: DefectReport,
    bound: Rat,
    error: (Rat, Option<Rat>, NormWitness, Scope),
    radius: &Rat,
) -> ApproximationReport {
    let (achieved_ball, achieved_exact, norm_witness, scope) = error;
    let achieved = achieved_exact.as_ref().unwrap_or(&achieved_ball);
    ApproximationReport {
        pass: achieved <= &bound,
        delta_hat: defect.delta_hat,
        bound,
        achieved_ball,
        achieved_exact,
        radius: radius.clone(),
        scope,
        defect_witness: defect.witness,
        norm_witness,
    }
}

/// Invariant approximant on a free group: the homomorphism whose generator
/// values are the mean growth constants `c(s, e)`, certified against the
/// half-defect bound `‖f − f̄‖ ≤ δ̂ / 2`.
pub fn free_approximant(
    f: &LipFn,
    space: &GroupSpace,
    radius: &Rat,
) -> Result<(LipFn, ApproximationReport)> {
    if !matches!(space.backend(), MetricBackend::FreeWord) {
        return Err(Error::UnsupportedBackend {
            operation: "free_approximant",
            backend: space.backend().name(),
        });
    }
    let table = exact_table(f, space)?;
    let c = growth_with(f, space, radius, table.as_ref())?;
    let defect = measured_defect(f, space, radius, table.as_ref())?;
    let bound = &defect.delta_hat / rat_int(2);
    let error = approximant_error(f, &c, space, radius, table.as_ref())?;
    let report = build_report(defect, bound, error, radius);
    Ok((LipFn::homomorphism(c), report))
}

/// Whether `‖f − f̄‖ ≤ ‖f − h̃‖` for every candidate homomorphism, in exact
/// norms. Requires a structured `f` on an exact backend.
pub fn optimality_check(
    f: &LipFn,
    fbar: &LipFn,
    candidates: &[Vec<Rat>],
    space: &GroupSpace,
) -> Result<bool> {
    let Some((fh, p)) = f.structured_parts() else {
        return Err(Error::Scope {
            operation: "optimality_check",
            reason: "exact norms need a structured function".into(),
        });
    };
    let Some((bar_hom, bar_p)) = fbar.structured_parts() else {
        return Err(Error::Scope {
            operation: "optimality_check",
            reason: "the approximant must be a homomorphism".into(),
        });
    };
    if !bar_p.is_empty() {
        return Err(Error::Scope {
            operation: "optimality_check",
            reason: "the approximant must have no perturbation".into(),
        });
    }
    let table = StructuredNormTable::new(space, p)?;
    let diff_bar: Vec<Rat> = fh.iter().zip(bar_hom).map(|(a, b)| a - b).collect();
    let (base, _) = table.norm_against(&diff_bar)?;
    for candidate in candidates {
        if candidate.len() != space.generator_count() {
            return Err(Error::AlphabetMismatch {
                left: candidate.len(),
                right: space.generator_count(),
            });
        }
        let diff: Vec<Rat> = fh.iter().zip(candidate).map(|(a, b)| a - b).collect();
        let (other, _) = table.norm_against(&diff)?;
        if other < base {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Invariant approximant with prescribed generator values `u` within `η` of
/// the growth constants; certified against `δ̂ / 2 + η`.
pub fn adjusted_approximant(
    f: &LipFn,
    space: &GroupSpace,
    u: &[Rat],
    eta: &Rat,
    radius: &Rat,
) -> Result<(LipFn, ApproximationReport)> {
    if !matches!(space.backend(), MetricBackend::FreeWord) {
        return Err(Error::UnsupportedBackend {
            operation: "adjusted_approximant",
            backend: space.backend().name(),
        });
    }
    if u.len() != space.generator_count() {
        return Err(Error::AlphabetMismatch {
            left: u.len(),
            right: space.generator_count(),
        });
    }
    if eta.is_negative() {
        return Err(Error::Precondition("eta must be nonnegative".into()));
    }
    let table = exact_table(f, space)?;
    let c = growth_with(f, space, radius, table.as_ref())?;
    for (i, (c_i, u_i)) in c.iter().zip(u).enumerate() {
        if (c_i - u_i).abs() > *eta {
            return Err(Error::Precondition(format!(
                "|c({name}) − u({name})| > eta for generator {name}",
                name = space.generator_names()[i]
            )));
        }
    }
    let defect = measured_defect(f, space, radius, table.as_ref())?;
    let bound = &defect.delta_hat / rat_int(2) + eta;
    let error = approximant_error(f, u, space, radius, table.as_ref())?;
    let report = build_report(defect, bound, error, radius);
    Ok((LipFn::homomorphism(u.to_vec()), report))
}

/// Pullback of a quotient function along the quotient map: the free-group
/// function `F(w) = f(q(w))`, returned with the free domain it lives on.
pub fn lift_to_free(
    f: &LipFn,
    presentation: &Presentation,
    quotient_space: &GroupSpace,
) -> Result<(GroupSpace, LipFn)> {
    if quotient_space.generator_count() != presentation.generator_count() {
        return Err(Error::AlphabetMismatch {
            left: quotient_space.generator_count(),
            right: presentation.generator_count(),
        });
    }
    let free = GroupSpace::free(presentation.generator_names.clone());
    Ok((free, LipFn::lifted(quotient_space.clone(), f.clone())))
}

/// Invariant approximant on a finitely presented quotient.
///
/// The generator growth vector is projected onto the nullspace of the relator
/// exponent matrix, which makes the resulting homomorphism well defined on
/// the quotient; the certified bound is `(1/2 + C_R · D_emp) · δ̂`.
pub fn presented_approximant(
    f: &LipFn,
    presentation: &Presentation,
    quotient_space: &GroupSpace,
    radius: &Rat,
) -> Result<(LipFn, ApproximationReport, PresentedConstants)> {
    if quotient_space.generator_count() != presentation.generator_count() {
        return Err(Error::AlphabetMismatch {
            left: quotient_space.generator_count(),
            right: presentation.generator_count(),
        });
    }
    let table = exact_table(f, quotient_space)?;
    let defect = measured_defect(f, quotient_space, radius, table.as_ref())?;
    // Growth constants transfer exactly along the quotient map, so they are
    // computed downstairs.
    let x = growth_with(f, quotient_space, radius, table.as_ref())?;

    let (u, ax_norm, c_r) = if presentation.relators.is_empty() {
        (x.clone(), Rat::zero(), Rat::zero())
    } else {
        let a = RationalMatrix::from_integers(
            &exponent_matrix(presentation).entries,
        )?;
        let ax_norm = sup_norm(&a.apply(&x)?);
        let c_r = rat(presentation.max_relator_length() as i64, 2);
        let projection = linf_kernel_project(&a, &x)?;
        (projection.u, ax_norm, c_r)
    };

    let deviation: Vec<Rat> = x.iter().zip(&u).map(|(a, b)| a - b).collect();
    let d_emp = if ax_norm.is_zero() {
        Rat::zero()
    } else {
        sup_norm(&deviation) / &ax_norm
    };
    let growth_residual_ok = ax_norm <= &c_r * &defect.delta_hat;

    let bound = (rat(1, 2) + &c_r * &d_emp) * &defect.delta_hat;
    let error = approximant_error(f, &u, quotient_space, radius, table.as_ref())?;
    let report = build_report(defect, bound, error, radius);
    Ok((
        LipFn::homomorphism(u),
        report,
        PresentedConstants {
            c_r,
            d_emp,
            ax_norm,
            growth_residual_ok,
        },
    ))
}

/// On a finite group every invariance defect collapses the norm:
/// `lip_norm(f) ≤ delta` whenever `f` is `delta`-invariant. Returns the
/// verdict of the exhaustive check; `false` flags a defect-computation bug.
pub fn shrink_norm_check(space: &GroupSpace, f: &LipFn, delta: &Rat) -> Result<bool> {
    let order = space.group_order().ok_or(Error::Scope {
        operation: "shrink_norm_check",
        reason: "requires a finite backend".into(),
    })?;
    let ball = space.ball(&rat_int(order as i64))?;
    let pts: Vec<Word> = ball.words().cloned().collect();
    Ok(&lip_norm(f, &pts, space)? <= delta)
}

/// Restriction of `f` to the orbit of the cyclic subgroup generated by
/// `h_generator`, translated by `g` and based at `y`:
/// `f'(hᵏ) = f(g·hᵏ·y) − f(g·y)` with the pulled-back pseudometric
/// `d'(hᵏ, hˡ) = d(hᵏ·y, hˡ·y)`.
pub fn restrict_to_orbit(
    f: &LipFn,
    space: &GroupSpace,
    g: &Word,
    y: &Word,
    h_generator: &Word,
) -> Result<(GroupSpace, LipFn)> {
    space.check_word(g)?;
    space.check_word(y)?;
    space.check_word(h_generator)?;

    // Enumerate the cyclic subgroup ⟨h⟩.
    let mut powers: Vec<Word> = vec![space.normal_form(&Word::identity())?];
    let mut cur = space.normal_form(h_generator)?;
    while !cur.is_identity() {
        if powers.len() >= space.element_cap() {
            return Err(Error::Scope {
                operation: "restrict_to_orbit",
                reason: "generator has unbounded or capped order".into(),
            });
        }
        powers.push(cur.clone());
        cur = space.multiply_nf(&cur, h_generator)?;
    }
    let n = powers.len();

    let mut dist = vec![vec![Rat::zero(); n]; n];
    for i in 0..n {
        let iy = space.multiply_nf(&powers[i], y)?;
        for j in 0..n {
            let jy = space.multiply_nf(&powers[j], y)?;
            dist[i][j] = space.distance(&iy, &jy)?;
        }
    }
    let mult: Vec<Vec<usize>> = (0..n)
        .map(|i| (0..n).map(|j| (i + j) % n).collect())
        .collect();
    let oracle = TabularOracle {
        generator_count: 1,
        words: (0..n).map(|k| Word::power(0, k as i64)).collect(),
        mult,
        gen_elem: vec![1 % n],
        gen_inv_elem: vec![(n - 1) % n],
        dist,
    };
    oracle.validate()?;
    let cyclic = GroupSpace::oracle(vec!["t"], std::sync::Arc::new(oracle), true)?;

    let base = f.eval(space, &space.multiply_nf(g, y)?)?;
    let mut values = Vec::with_capacity(n);
    for (k, h_k) in powers.iter().enumerate() {
        let point = space.multiply_nf(&space.multiply_nf(g, h_k)?, y)?;
        values.push((Word::power(0, k as i64), f.eval(space, &point)? - &base));
    }
    let restricted = LipFn::tabulated_on(&cyclic, values)?;
    Ok((cyclic, restricted))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances;
    use crate::lipschitz::random_delta_invariant;

    #[test]
    fn ramp_free_approximant() {
        let (space, f) = instances::ramp_on_line(&rat_int(1), 16);
        let (fbar, report) = free_approximant(&f, &space, &rat_int(16)).unwrap();
        let (hom, p) = fbar.structured_parts().unwrap();
        assert_eq!(hom, &[rat(1, 2)]);
        assert!(p.is_empty());
        assert_eq!(report.delta_hat, rat_int(1));
        assert_eq!(report.bound, rat(1, 2));
        assert_eq!(report.achieved_exact, Some(rat(1, 2)));
        assert!(report.achieved_ball <= rat(1, 2));
        assert!(report.pass);
    }

    #[test]
    fn homomorphism_is_its_own_approximant() {
        let space = GroupSpace::free(vec!["a", "b"]);
        let f = LipFn::homomorphism(vec![rat(2, 3), rat_int(-1)]);
        let (fbar, report) = free_approximant(&f, &space, &rat_int(3)).unwrap();
        assert_eq!(fbar.structured_parts().unwrap().0, &[rat(2, 3), rat_int(-1)]);
        assert!(report.delta_hat.is_zero());
        assert_eq!(report.achieved_exact, Some(rat_int(0)));
        assert!(report.pass);
    }

    #[test]
    fn non_free_backend_is_rejected() {
        let space = GroupSpace::free_abelian(vec!["a", "b"]);
        let f = LipFn::homomorphism(vec![rat_int(0), rat_int(0)]);
        assert!(matches!(
            free_approximant(&f, &space, &rat_int(2)),
            Err(Error::UnsupportedBackend { .. })
        ));
    }

    #[test]
    fn ramp_optimality_against_full_slope() {
        let (space, f) = instances::ramp_on_line(&rat_int(1), 16);
        let (fbar, _) = free_approximant(&f, &space, &rat_int(16)).unwrap();
        // The identity-slope candidate is strictly worse: ‖f − x‖ = 1.
        let (_, p) = f.structured_parts().unwrap();
        let table = StructuredNormTable::new(&space, p).unwrap();
        let diff = vec![rat(1, 2) - rat_int(1)];
        assert_eq!(table.norm_against(&diff).unwrap().0, rat_int(1));
        assert!(optimality_check(&f, &fbar, &[vec![rat_int(1)]], &space).unwrap());
        assert!(optimality_check(&f, &fbar, &[vec![rat(1, 2)]], &space).unwrap());
    }

    #[test]
    fn adjusted_approximant_examples() {
        let (space, f) = instances::ramp_on_line(&rat_int(1), 16);
        // u = c, eta = 0 reduces to the free approximant.
        let (fbar, report) = adjusted_approximant(&f, &space, &[rat(1, 2)], &rat_int(0), &rat_int(16)).unwrap();
        assert_eq!(fbar.structured_parts().unwrap().0, &[rat(1, 2)]);
        assert_eq!(report.bound, rat(1, 2));
        assert!(report.pass);

        // u = 0 within eta = 1/2: exact error is the full norm 1.
        let (_, report) = adjusted_approximant(&f, &space, &[rat_int(0)], &rat(1, 2), &rat_int(16)).unwrap();
        assert_eq!(report.bound, rat_int(1));
        assert_eq!(report.achieved_exact, Some(rat_int(1)));
        assert!(report.pass);

        // eta violated names the generator.
        let err = adjusted_approximant(&f, &space, &[rat_int(2)], &rat(1, 2), &rat_int(16)).unwrap_err();
        assert!(err.to_string().contains('a'));
    }

    #[test]
    fn lift_examples() {
        let z2 = GroupSpace::free_abelian(vec!["a", "b"]);
        let f = LipFn::homomorphism(vec![rat_int(1), rat_int(0)]);
        let p = instances::presentation_z2();
        let (free, lifted) = lift_to_free(&f, &p, &z2).unwrap();
        let aba_inv = Word::from_letters([
            crate::word::Letter::new(0, false),
            crate::word::Letter::new(1, false),
            crate::word::Letter::new(0, true),
        ]);
        assert_eq!(lifted.eval(&free, &aba_inv).unwrap(), rat_int(0));
        assert_eq!(lifted.eval(&free, &Word::identity()).unwrap(), rat_int(0));

        let z5 = instances::cyclic_group(5).unwrap();
        let table = LipFn::tabulated_on(
            &z5,
            (0..5).map(|k| (Word::power(0, k), rat_int([0, 1, 3, 2, 1][k as usize]))),
        )
        .unwrap();
        let (free1, lifted5) = lift_to_free(&table, &instances::presentation_cyclic(5), &z5).unwrap();
        assert_eq!(
            lifted5.eval(&free1, &Word::power(0, 7)).unwrap(),
            table.eval(&z5, &Word::power(0, 2)).unwrap()
        );
    }

    #[test]
    fn presented_on_z2_commutator() {
        let z2 = GroupSpace::free_abelian(vec!["a", "b"]);
        let p = instances::presentation_z2();
        let f = random_delta_invariant(&z2, &rat_int(1), &rat_int(2), 11).unwrap();
        let (fbar, report, constants) = presented_approximant(&f, &p, &z2, &rat_int(3)).unwrap();
        // Zero exponent matrix: projection is the identity, bound is δ̂/2.
        assert_eq!(constants.c_r, rat_int(2));
        assert!(constants.ax_norm.is_zero());
        assert!(constants.d_emp.is_zero());
        assert!(constants.growth_residual_ok);
        assert_eq!(report.bound, &report.delta_hat / rat_int(2));
        assert!(report.pass, "bound {} achieved {}", report.bound, report.achieved());
        // Well-definedness across representatives.
        let aba_inv = Word::from_letters([
            crate::word::Letter::new(0, false),
            crate::word::Letter::new(1, false),
            crate::word::Letter::new(0, true),
        ]);
        assert_eq!(
            fbar.eval(&z2, &aba_inv).unwrap(),
            fbar.eval(&z2, &Word::generator(1)).unwrap()
        );
    }

    #[test]
    fn presented_on_cyclic_five() {
        let z5 = instances::cyclic_group(5).unwrap();
        let p = instances::presentation_cyclic(5);
        let f = random_delta_invariant(&z5, &rat_int(1), &rat_int(2), 5).unwrap();
        let (fbar, report, constants) = presented_approximant(&f, &p, &z5, &rat_int(5)).unwrap();
        // ker [5] = {0}: the approximant is the zero homomorphism.
        assert!(fbar.structured_parts().unwrap().0.iter().all(Rat::is_zero));
        assert_eq!(constants.c_r, rat(5, 2));
        assert!(constants.growth_residual_ok);
        assert!(report.pass);
        // Norm collapse cross-check: ‖f‖ ≤ δ̂ on the whole group.
        assert!(shrink_norm_check(&z5, &f, &report.delta_hat).unwrap());
        assert_eq!(fbar.eval(&z5, &Word::power(0, 7)).unwrap(), rat_int(0));
    }

    #[test]
    fn shrink_norm_rejects_infinite_backend() {
        let space = GroupSpace::free(vec!["a"]);
        let f = LipFn::homomorphism(vec![rat_int(0)]);
        assert!(matches!(
            shrink_norm_check(&space, &f, &rat_int(1)),
            Err(Error::Scope { .. })
        ));
    }

    #[test]
    fn orbit_restriction_on_z6() {
        let z6 = instances::cyclic_group(6).unwrap();
        let f = random_delta_invariant(&z6, &rat_int(1), &rat_int(3), 9).unwrap();
        let defect_f = delta_defect(&f, &z6, &rat_int(6)).unwrap().delta_hat;
        // h = s² generates the order-three subgroup.
        let (cyclic, restricted) =
            restrict_to_orbit(&f, &z6, &Word::identity(), &Word::identity(), &Word::power(0, 2)).unwrap();
        assert_eq!(cyclic.group_order(), Some(3));
        let defect_r = delta_defect(&restricted, &cyclic, &rat_int(3)).unwrap().delta_hat;
        assert!(defect_r <= defect_f);
        // g = e, y = e restricts f itself along the subgroup.
        assert_eq!(
            restricted.eval(&cyclic, &Word::generator(0)).unwrap(),
            f.eval(&z6, &Word::power(0, 2)).unwrap()
        );
    }

    #[test]
    fn orbit_restriction_preserves_homomorphisms() {
        let z6 = instances::cyclic_group(6).unwrap();
        let f = LipFn::homomorphism(vec![rat_int(0)]);
        let (cyclic, restricted) =
            restrict_to_orbit(&f, &z6, &Word::generator(0), &Word::identity(), &Word::power(0, 3)).unwrap();
        let report = delta_defect(&restricted, &cyclic, &rat_int(2)).unwrap();
        assert!(report.delta_hat.is_zero());
    }
}
