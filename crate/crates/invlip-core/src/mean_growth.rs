//! Directional mean-growth constants: the supremum, infimum, and midpoint of
//! `f(g·s·x) − f(g·x)` over group elements `g`.

use num::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lipschitz::{delta_defect, offset_extremes, LipFn, Scope};
use crate::rational::{rat_int, Rat};
use crate::space::GroupSpace;
use crate::word::Word;

/// The triple `(c⁺, c⁻, c)` for a direction `s` at a base point `x`, with the
/// translators attaining the extremes.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MeanGrowth {
    pub direction: Word,
    pub base: Word,
    #[serde(with = "crate::rational::rat_string")]
    pub c_plus: Rat,
    #[serde(with = "crate::rational::rat_string")]
    pub c_minus: Rat,
    #[serde(with = "crate::rational::rat_string")]
    pub c: Rat,
    pub scope: Scope,
    pub witness_plus: Word,
    pub witness_minus: Word,
}

impl MeanGrowth {
    /// Re-evaluates `f(g·s·x) − f(g·x)` for one of the stored witnesses.
    pub fn recheck(&self, f: &LipFn, space: &GroupSpace, plus: bool) -> Result<Rat> {
        let g = if plus { &self.witness_plus } else { &self.witness_minus };
        let gx = space.multiply_nf(g, &self.base)?;
        let gsx = space.multiply_nf(&space.multiply_nf(g, &self.direction)?, &self.base)?;
        Ok(f.eval(space, &gsx)? - f.eval(space, &gx)?)
    }
}

/// Mean growth of `f` in direction `s` at base `x`.
///
/// Structured functions on free and free-abelian backends are exact over the
/// whole group: with `f = h + p` and `z = g·x`, the difference equals
/// `h(s) + p(z·s') − p(z)` for the conjugate `s' = x⁻¹·s·x`, and the
/// perturbation difference vanishes off a finite set. Finite backends are
/// exhausted; anything else is truncated to translators in `ball(radius)`.
pub fn mean_growth(
    f: &LipFn,
    space: &GroupSpace,
    s: &Word,
    x: &Word,
    radius: &Rat,
) -> Result<MeanGrowth> {
    space.check_word(s)?;
    space.check_word(x)?;

    if let (Some((hom, p)), true) = (f.structured_parts(), space.supports_exact_structured()) {
        // h(g·s·x) − h(g·x) = h(s) for a genuine homomorphism.
        let exps = space.normal_form(s)?.exponent_vector(space.generator_count());
        let baseline: Rat = hom
            .iter()
            .zip(&exps)
            .map(|(h, &k)| h * rat_int(k))
            .fold(Rat::zero(), |a, t| a + t);
        let conjugate = space.normal_form(
            &x.inverse().concat(s).concat(x),
        )?;
        if conjugate.is_identity() {
            // s acts trivially along this orbit; the difference is exactly h(s).
            return Ok(MeanGrowth {
                direction: s.clone(),
                base: x.clone(),
                c_plus: baseline.clone(),
                c_minus: baseline.clone(),
                c: baseline,
                scope: Scope::Exact,
                witness_plus: Word::identity(),
                witness_minus: Word::identity(),
            });
        }
        let ext = offset_extremes(space, p, &conjugate)?;
        let c_plus = &baseline + &ext.max_diff;
        let c_minus = &baseline + &ext.min_diff;
        let c = (&c_plus + &c_minus) / rat_int(2);
        // Translators recover from base points: z = g·x.
        let x_inv = space.inverse_nf(x)?;
        return Ok(MeanGrowth {
            direction: s.clone(),
            base: x.clone(),
            c_plus,
            c_minus,
            c,
            scope: Scope::Exact,
            witness_plus: space.multiply_nf(&ext.argmax, &x_inv)?,
            witness_minus: space.multiply_nf(&ext.argmin, &x_inv)?,
        });
    }

    let (translators, scope) = match space.group_order() {
        Some(order) => {
            let ball = space.ball(&rat_int(order as i64))?;
            (ball, Scope::Exact)
        }
        None => (space.ball(radius)?, Scope::Ball(radius.clone())),
    };

    let mut best: Option<(Rat, Word, Rat, Word)> = None;
    for g in translators.words() {
        let gx = space.multiply_nf(g, x)?;
        let gsx = space.multiply_nf(&space.multiply_nf(g, s)?, x)?;
        let diff = f.eval(space, &gsx)? - f.eval(space, &gx)?;
        best = Some(match best {
            None => (diff.clone(), g.clone(), diff, g.clone()),
            Some((mut max, mut amax, mut min, mut amin)) => {
                if diff > max {
                    max = diff.clone();
                    amax = g.clone();
                }
                if diff < min {
                    min = diff;
                    amin = g.clone();
                }
                (max, amax, min, amin)
            }
        });
    }
    let (c_plus, witness_plus, c_minus, witness_minus) =
        best.ok_or(Error::Empty("mean growth needs a nonempty translator set"))?;
    let c = (&c_plus + &c_minus) / rat_int(2);
    Ok(MeanGrowth {
        direction: s.clone(),
        base: x.clone(),
        c_plus,
        c_minus,
        c,
        scope,
        witness_plus,
        witness_minus,
    })
}

/// Whether `c⁺ − c⁻ ≤ delta · d(s·x, x)` holds for a computed triple.
pub fn check_gap(mg: &MeanGrowth, delta: &Rat, space: &GroupSpace) -> Result<bool> {
    let sx = space.multiply_nf(&mg.direction, &mg.base)?;
    let d = space.distance(&sx, &mg.base)?;
    Ok(&mg.c_plus - &mg.c_minus <= delta * d)
}

/// Largest normalized growth gap over directions:
/// `max_s (c⁺(s, e) − c⁻(s, e)) / d(s, e)`.
///
/// On exact scopes the candidate directions are the same offsets that decide
/// the invariance defect (the ball of twice the support radius plus the far
/// generator power), so the result equals `delta_defect` exactly; otherwise
/// directions range over `ball(radius)`.
pub fn gap_characterization(f: &LipFn, space: &GroupSpace, radius: &Rat) -> Result<Rat> {
    let e = Word::identity();
    let directions: Vec<Word> =
        if f.structured_parts().is_some() && space.supports_exact_structured() {
            let two_rho = {
                let r = f.support_radius(space)?;
                &r + &r
            };
            let far = &two_rho + rat_int(1);
            let mut ds: Vec<Word> = space.ball(&two_rho)?.words().cloned().collect();
            ds.push(space.normal_form(&Word::power(
                0,
                i64::try_from(&far.to_integer()).expect("small radius"),
            ))?);
            ds
        } else {
            space.ball(radius)?.words().cloned().collect()
        };

    let mut best = Rat::zero();
    for s in &directions {
        if space.normal_form(s)?.is_identity() {
            continue;
        }
        let d = space.distance_to_identity(s)?;
        if d.is_zero() {
            continue;
        }
        let mg = mean_growth(f, space, s, &e, radius)?;
        let gap = (&mg.c_plus - &mg.c_minus) / d;
        if gap > best {
            best = gap;
        }
    }
    Ok(best)
}

/// `|c⁺(s, x)| ≤ (δ̂ + ‖f‖) · d(s·x, x)`: the well-definedness bound relating
/// growth, defect, and norm.
pub fn growth_bound_holds(
    mg: &MeanGrowth,
    f: &LipFn,
    space: &GroupSpace,
    norm: &Rat,
    radius: &Rat,
) -> Result<bool> {
    let defect = delta_defect(f, space, radius)?.delta_hat;
    let sx = space.multiply_nf(&mg.direction, &mg.base)?;
    let d = space.distance(&sx, &mg.base)?;
    Ok(mg.c_plus.abs() <= (&defect + norm) * d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances;
    use crate::rational::rat;

    #[test]
    fn ramp_growth_constants() {
        let (space, f) = instances::ramp_on_line(&rat_int(1), 16);
        let e = Word::identity();
        let mg = mean_growth(&f, &space, &Word::generator(0), &e, &rat_int(6)).unwrap();
        assert_eq!(mg.c_plus, rat_int(1));
        assert_eq!(mg.c_minus, rat_int(0));
        assert_eq!(mg.c, rat(1, 2));
        assert!(mg.scope.is_exact());
        assert_eq!(mg.recheck(&f, &space, true).unwrap(), rat_int(1));
        assert_eq!(mg.recheck(&f, &space, false).unwrap(), rat_int(0));

        let back = mean_growth(&f, &space, &Word::power(0, -1), &e, &rat_int(6)).unwrap();
        assert_eq!(back.c, rat(-1, 2));
    }

    #[test]
    fn homomorphism_growth_is_constant() {
        let space = crate::space::GroupSpace::free(vec!["a", "b"]);
        let f = LipFn::homomorphism(vec![rat(1, 3), rat_int(2)]);
        let s = Word::generator(1);
        let mg = mean_growth(&f, &space, &s, &Word::identity(), &rat_int(3)).unwrap();
        assert_eq!(mg.c_plus, rat_int(2));
        assert_eq!(mg.c_minus, rat_int(2));
        assert_eq!(mg.c, rat_int(2));
    }

    #[test]
    fn ramp_gap_check() {
        let (space, f) = instances::ramp_on_line(&rat_int(1), 16);
        let mg = mean_growth(&f, &space, &Word::generator(0), &Word::identity(), &rat_int(6)).unwrap();
        assert!(check_gap(&mg, &rat_int(1), &space).unwrap());
        assert!(!check_gap(&mg, &rat(1, 2), &space).unwrap());
    }

    #[test]
    fn gap_characterization_equals_defect() {
        let (space, f) = instances::ramp_on_line(&rat_int(1), 16);
        assert_eq!(gap_characterization(&f, &space, &rat_int(4)).unwrap(), rat_int(1));

        let f2 = crate::space::GroupSpace::free(vec!["a", "b"]);
        for seed in [3, 9, 27] {
            let g = crate::lipschitz::random_delta_invariant(&f2, &rat_int(1), &rat_int(2), seed).unwrap();
            let defect = delta_defect(&g, &f2, &rat_int(2)).unwrap().delta_hat;
            assert_eq!(gap_characterization(&g, &f2, &rat_int(2)).unwrap(), defect);
        }
    }

    #[test]
    fn finite_backend_growth_is_exhaustive() {
        let space = instances::cyclic_group(5).unwrap();
        let f = LipFn::tabulated_on(
            &space,
            [
                (Word::identity(), rat_int(0)),
                (Word::power(0, 1), rat_int(1)),
                (Word::power(0, 2), rat_int(1)),
                (Word::power(0, 3), rat_int(0)),
                (Word::power(0, 4), rat_int(0)),
            ],
        )
        .unwrap();
        let mg = mean_growth(&f, &space, &Word::generator(0), &Word::identity(), &rat_int(5)).unwrap();
        assert!(mg.scope.is_exact());
        assert_eq!(mg.c_plus, rat_int(1));
        assert_eq!(mg.c_minus, rat_int(-1));
    }

    #[test]
    fn antisymmetry_on_random_functions() {
        let space = crate::space::GroupSpace::free(vec!["a", "b"]);
        for seed in 1..=10u64 {
            let f = crate::lipschitz::random_delta_invariant(&space, &rat_int(1), &rat_int(2), seed).unwrap();
            for s in space.ball(&rat_int(2)).unwrap().words() {
                if s.is_identity() {
                    continue;
                }
                let fwd = mean_growth(&f, &space, s, &Word::identity(), &rat_int(2)).unwrap();
                let bwd = mean_growth(&f, &space, &s.inverse(), &Word::identity(), &rat_int(2)).unwrap();
                assert_eq!(fwd.c, -bwd.c.clone());
                assert_eq!(fwd.c_plus, -bwd.c_minus.clone());
            }
        }
    }
}
