//! The certification suite: every pipeline bound re-proved on seeded
//! instances with exact arithmetic. Each criterion returns a deterministic
//! result record; wall-clock budgets affect only the pass verdict so that
//! serialized reports are byte-stable across runs and worker counts.

use std::time::Instant;

use num::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::approx::{free_approximant, optimality_check, presented_approximant, shrink_norm_check};
use crate::error::Result;
use crate::instances;
use crate::kernel::{kernel_project_oracle, linf_kernel_project, sup_norm, RationalMatrix};
use crate::lipschitz::{delta_defect, random_delta_invariant, recheck_defect_witness};
use crate::mean_growth::{check_gap, gap_characterization, mean_growth};
use crate::orbit::orbit_collapse_approximant;
use crate::qm::{check_pqm_implications, pqm_constant_from_lipschitz};
use crate::rational::{format_rat, rat, rat_int, Rat};
use crate::space::GroupSpace;
use crate::word::Word;

/// Outcome of one criterion.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct CriterionResult {
    pub id: usize,
    pub name: String,
    pub pass: bool,
    pub details: String,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct SuiteReport {
    pub results: Vec<CriterionResult>,
    pub all_pass: bool,
}

impl SuiteReport {
    pub fn lines(&self) -> Vec<String> {
        self.results
            .iter()
            .map(|r| {
                format!(
                    "criterion {:>2} [{}] {} — {}",
                    r.id,
                    if r.pass { "PASS" } else { "FAIL" },
                    r.name,
                    r.details
                )
            })
            .collect()
    }
}

fn result(id: usize, name: &str, pass: bool, details: String) -> CriterionResult {
    CriterionResult {
        id,
        name: name.to_string(),
        pass,
        details,
    }
}

fn fail(id: usize, name: &str, err: impl std::fmt::Display) -> CriterionResult {
    result(id, name, false, format!("error: {err}"))
}

/// Cycle of defect thresholds used by the seeded free-group criteria.
fn delta_for_seed(seed: u64) -> Rat {
    match seed % 3 {
        0 => rat(1, 2),
        1 => rat_int(1),
        _ => rat_int(3),
    }
}

fn free_rank2() -> GroupSpace {
    GroupSpace::free(vec!["a", "b"])
}

/// Criterion 1: exact reproduction of the one-sided ramp on the line —
/// growth constants `(1, 0, 1/2)`, approximant slope `1/2`, exact error
/// `1/2`, in under a second.
pub fn criterion_1() -> CriterionResult {
    let name = "ramp on the line reproduces exactly";
    let started = Instant::now();
    let run = || -> Result<(bool, String)> {
        let delta = rat_int(1);
        let (space, f) = instances::ramp_on_line(&delta, 16);
        let growth = mean_growth(&f, &space, &Word::generator(0), &Word::identity(), &rat_int(16))?;
        let (fbar, report) = free_approximant(&f, &space, &rat_int(16))?;
        let slope = fbar.structured_parts().map(|(h, _)| h[0].clone());
        let ok = growth.c_plus == rat_int(1)
            && growth.c_minus == rat_int(0)
            && growth.c == rat(1, 2)
            && growth.scope.is_exact()
            && slope == Some(rat(1, 2))
            && report.achieved_exact == Some(rat(1, 2))
            && report.delta_hat == rat_int(1)
            && report.pass;
        Ok((
            ok,
            format!(
                "c+ = {}, c- = {}, c = {}, slope = {}, exact error = {}",
                format_rat(&growth.c_plus),
                format_rat(&growth.c_minus),
                format_rat(&growth.c),
                slope.map(|s| format_rat(&s)).unwrap_or_default(),
                report
                    .achieved_exact
                    .as_ref()
                    .map(format_rat)
                    .unwrap_or_default()
            ),
        ))
    };
    match run() {
        Ok((ok, details)) => {
            let within_budget = started.elapsed().as_secs() < 1;
            result(1, name, ok && within_budget, details)
        }
        Err(e) => fail(1, name, e),
    }
}

/// Criterion 2: the half-defect bound on seeded rank-two samples.
pub fn criterion_2(seeds: &[u64]) -> CriterionResult {
    let name = "free-group bound |f - fbar| <= delta_hat / 2";
    let started = Instant::now();
    let space = free_rank2();
    let run = || -> Result<(bool, String)> {
        let mut worst: Option<Rat> = None;
        for &seed in seeds {
            let delta = delta_for_seed(seed);
            let f = random_delta_invariant(&space, &delta, &rat_int(3), seed)?;
            let (_, report) = free_approximant(&f, &space, &rat_int(4))?;
            if !report.pass || report.achieved_exact.is_none() {
                return Ok((false, format!("seed {seed} failed: {report:?}")));
            }
            if recheck_defect_witness(&f, &space, &report.defect_witness)? != report.delta_hat {
                return Ok((false, format!("seed {seed}: defect witness mismatch")));
            }
            let slack = if report.delta_hat.is_zero() {
                Rat::zero()
            } else {
                report.achieved() / (&report.delta_hat / rat_int(2))
            };
            if worst.as_ref().map_or(true, |w| &slack > w) {
                worst = Some(slack);
            }
        }
        Ok((
            true,
            format!(
                "{} seeds, worst achieved/(delta_hat/2) = {}",
                seeds.len(),
                worst.map(|w| format_rat(&w)).unwrap_or_default()
            ),
        ))
    };
    match run() {
        Ok((ok, details)) => {
            let within_budget = started.elapsed().as_secs() < 30;
            result(2, name, ok && within_budget, details)
        }
        Err(e) => fail(2, name, e),
    }
}

/// Criterion 3: optimality of the growth-constant approximant against random
/// homomorphism candidates.
pub fn criterion_3(seeds: &[u64]) -> CriterionResult {
    let name = "approximant is optimal among homomorphisms";
    let space = free_rank2();
    let run = || -> Result<(bool, String)> {
        let mut comparisons = 0usize;
        for &seed in seeds {
            let delta = delta_for_seed(seed);
            let f = random_delta_invariant(&space, &delta, &rat_int(3), seed)?;
            let (fbar, _) = free_approximant(&f, &space, &rat_int(4))?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e3779b97f4a7c15);
            let candidates: Vec<Vec<Rat>> = (0..20)
                .map(|_| {
                    (0..2)
                        .map(|_| rat(rng.gen_range(-12i64..=12), rng.gen_range(1i64..=6)))
                        .collect()
                })
                .collect();
            comparisons += candidates.len();
            if !optimality_check(&f, &fbar, &candidates, &space)? {
                return Ok((false, format!("seed {seed}: a candidate beat the approximant")));
            }
        }
        Ok((true, format!("{comparisons} comparisons, all optimal")))
    };
    match run() {
        Ok((ok, details)) => result(3, name, ok, details),
        Err(e) => fail(3, name, e),
    }
}

/// Criterion 4: growth antisymmetry, the defect gap bound, and agreement of
/// the gap characterization with the measured defect on exact scopes.
pub fn criterion_4(seeds: &[u64]) -> CriterionResult {
    let name = "mean-growth antisymmetry, gap bound, characterization";
    let space = free_rank2();
    let run = || -> Result<(bool, String)> {
        let e = Word::identity();
        let directions: Vec<Word> = space
            .ball(&rat_int(2))?
            .words()
            .filter(|w| !w.is_identity())
            .cloned()
            .collect();
        for &seed in seeds {
            let delta = delta_for_seed(seed);
            let f = random_delta_invariant(&space, &delta, &rat_int(3), seed)?;
            let report = delta_defect(&f, &space, &rat_int(4))?;
            for s in &directions {
                let fwd = mean_growth(&f, &space, s, &e, &rat_int(4))?;
                let bwd = mean_growth(&f, &space, &s.inverse(), &e, &rat_int(4))?;
                if fwd.c != -bwd.c.clone() {
                    return Ok((false, format!("seed {seed}: antisymmetry fails at {s:?}")));
                }
                if !check_gap(&fwd, &report.delta_hat, &space)? {
                    return Ok((false, format!("seed {seed}: gap exceeds defect at {s:?}")));
                }
            }
            let gap = gap_characterization(&f, &space, &rat_int(4))?;
            if gap != report.delta_hat {
                return Ok((
                    false,
                    format!(
                        "seed {seed}: gap characterization {} != defect {}",
                        format_rat(&gap),
                        format_rat(&report.delta_hat)
                    ),
                ));
            }
        }
        Ok((
            true,
            format!("{} seeds x {} directions", seeds.len(), directions.len()),
        ))
    };
    match run() {
        Ok((ok, details)) => result(4, name, ok, details),
        Err(e) => fail(4, name, e),
    }
}

/// Criterion 5: the simplex optimum equals the vertex-enumeration oracle on
/// random integer instances, with exactly zero kernel residual.
pub fn criterion_5() -> CriterionResult {
    let name = "kernel projection matches the enumeration oracle";
    let run = || -> Result<(bool, String)> {
        let mut checked = 0usize;
        for k in 0..200u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(51_000 + k);
            let m = rng.gen_range(1usize..=3);
            let n = rng.gen_range(1usize..=5);
            let entries: Vec<Vec<i64>> = (0..m)
                .map(|_| (0..n).map(|_| rng.gen_range(-9i64..=9)).collect())
                .collect();
            let a = RationalMatrix::from_integers(&entries)?;
            let x: Vec<Rat> = (0..n).map(|_| rat_int(rng.gen_range(-9i64..=9))).collect();

            let projection = linf_kernel_project(&a, &x)?;
            let oracle = kernel_project_oracle(&a, &x)?;
            if projection.t != oracle {
                return Ok((
                    false,
                    format!("instance {k}: simplex {} vs oracle {}", projection.t, oracle),
                ));
            }
            if a.apply(&projection.u)?.iter().any(|r| !r.is_zero()) {
                return Ok((false, format!("instance {k}: nonzero kernel residual")));
            }
            if projection.t > sup_norm(&x) {
                return Ok((false, format!("instance {k}: t exceeds |x|")));
            }
            // Scaling covariance on a subsample.
            if k % 10 == 0 {
                let lambda = rat(-3, 2);
                let scaled: Vec<Rat> = x.iter().map(|v| v * &lambda).collect();
                let scaled_t = linf_kernel_project(&a, &scaled)?.t;
                if scaled_t != lambda.abs() * &projection.t {
                    return Ok((false, format!("instance {k}: scaling covariance fails")));
                }
            }
            checked += 1;
        }
        Ok((true, format!("{checked} random instances agree")))
    };
    match run() {
        Ok((ok, details)) => result(5, name, ok, details),
        Err(e) => fail(5, name, e),
    }
}

/// Criterion 6: the finitely presented pipeline on the rank-two abelian
/// quotient and the cyclic group of order five.
pub fn criterion_6(seeds: &[u64]) -> CriterionResult {
    let name = "finitely presented pipeline bounds";
    let run = || -> Result<(bool, String)> {
        let z2 = GroupSpace::free_abelian(vec!["a", "b"]);
        let pres_z2 = instances::presentation_z2();
        for &seed in seeds {
            let delta = delta_for_seed(seed);
            let f = random_delta_invariant(&z2, &delta, &rat_int(2), seed)?;
            let (_, report, constants) = presented_approximant(&f, &pres_z2, &z2, &rat_int(3))?;
            if constants.c_r != rat_int(2) {
                return Ok((false, format!("seed {seed}: C_R = {}", format_rat(&constants.c_r))));
            }
            if !constants.growth_residual_ok || !report.pass {
                return Ok((false, format!("seed {seed}: rank-two case failed: {report:?}")));
            }
        }

        let z5 = instances::cyclic_group(5)?;
        let pres_z5 = instances::presentation_cyclic(5);
        for &seed in seeds {
            let delta = delta_for_seed(seed);
            let f = random_delta_invariant(&z5, &delta, &rat_int(2), seed)?;
            let (fbar, report, constants) = presented_approximant(&f, &pres_z5, &z5, &rat_int(5))?;
            let hom_is_zero = fbar
                .structured_parts()
                .map_or(false, |(h, p)| h.iter().all(Rat::is_zero) && p.is_empty());
            if !hom_is_zero {
                return Ok((false, format!("seed {seed}: kernel projection not zero")));
            }
            if !report.pass || !constants.growth_residual_ok {
                return Ok((false, format!("seed {seed}: cyclic case failed: {report:?}")));
            }
            // Cross-check with the norm collapse criterion.
            if !shrink_norm_check(&z5, &f, &report.delta_hat)? {
                return Ok((false, format!("seed {seed}: |f| > delta_hat on the cyclic group")));
            }
        }
        Ok((true, format!("{} seeds on both quotients", seeds.len())))
    };
    match run() {
        Ok((ok, details)) => result(6, name, ok, details),
        Err(e) => fail(6, name, e),
    }
}

/// Criterion 7: on finite groups the norm of a `delta`-invariant function
/// collapses below its measured defect.
pub fn criterion_7(seeds: &[u64]) -> CriterionResult {
    let name = "norm collapse on finite groups";
    let run = || -> Result<(bool, String)> {
        let mut spaces: Vec<(String, GroupSpace)> = Vec::new();
        for n in [2usize, 3, 5, 8] {
            spaces.push((format!("Z{n}"), instances::cyclic_group(n)?));
        }
        spaces.push(("S3".into(), instances::symmetric_group_3()?));
        for (label, space) in &spaces {
            let order = space.group_order().unwrap_or(0) as i64;
            for &seed in seeds {
                let delta = delta_for_seed(seed);
                let f = random_delta_invariant(space, &delta, &rat_int(order), seed)?;
                let report = delta_defect(&f, space, &rat_int(order))?;
                if !report.scope.is_exact() {
                    return Ok((false, format!("{label}: scope not exhaustive")));
                }
                if !shrink_norm_check(space, &f, &report.delta_hat)? {
                    return Ok((
                        false,
                        format!("{label} seed {seed}: lip norm exceeds defect {}", report.delta_hat),
                    ));
                }
            }
        }
        Ok((true, format!("{} seeds on 5 groups", seeds.len())))
    };
    match run() {
        Ok((ok, details)) => result(7, name, ok, details),
        Err(e) => fail(7, name, e),
    }
}

/// Criterion 8: the orbit-collapse bound `(2α + 1)·δ̂` on the eight-point
/// swap space, with invariance of the collapsed function.
pub fn criterion_8(seeds: &[u64]) -> CriterionResult {
    let name = "orbit collapse within (2a + 1) delta_hat";
    let run = || -> Result<(bool, String)> {
        let space = instances::eight_point_swap_space()?;
        for &seed in seeds {
            let f = instances::random_point_function(space.point_count(), seed);
            let (_, report) = orbit_collapse_approximant(&space, &f)?;
            if !report.invariant {
                return Ok((false, format!("seed {seed}: collapsed function not invariant")));
            }
            if !report.pass {
                return Ok((
                    false,
                    format!(
                        "seed {seed}: achieved {} > bound {}",
                        format_rat(&report.achieved),
                        format_rat(&report.bound)
                    ),
                ));
            }
        }
        Ok((true, format!("{} seeds, alpha = 1, bound 3 delta_hat", seeds.len())))
    };
    match run() {
        Ok((ok, details)) => result(8, name, ok, details),
        Err(e) => fail(8, name, e),
    }
}

/// Criterion 9: the invariance / partial-quasimorphism implication chain and
/// the Lipschitz-derived constant, on both rank-two backends.
pub fn criterion_9(seeds: &[u64]) -> CriterionResult {
    let name = "quasimorphism implications and Lipschitz constant";
    let run = || -> Result<(bool, String)> {
        for (label, space) in [
            ("free", free_rank2()),
            ("abelian", GroupSpace::free_abelian(vec!["a", "b"])),
        ] {
            for &seed in seeds {
                let delta = delta_for_seed(seed);
                let f = random_delta_invariant(&space, &delta, &rat_int(1), seed)?;
                let imp = check_pqm_implications(&f, &space, &delta, &rat_int(4))?;
                if !imp.implications_hold {
                    return Ok((false, format!("{label} seed {seed}: implication chain broke: {imp:?}")));
                }
                let constant = pqm_constant_from_lipschitz(&f, &space, &rat_int(1), &rat_int(4))?;
                if !constant.holds {
                    return Ok((
                        false,
                        format!(
                            "{label} seed {seed}: partial defect {} exceeds 2L(f) = {}",
                            format_rat(&constant.partial_d),
                            format_rat(&constant.constant)
                        ),
                    ));
                }
            }
        }
        Ok((true, format!("{} seeds on 2 backends", seeds.len())))
    };
    match run() {
        Ok((ok, details)) => result(9, name, ok, details),
        Err(e) => fail(9, name, e),
    }
}

/// Criterion 10 (in-process part): repeating a criterion yields a
/// byte-identical serialized record. The worker-count comparison lives in the
/// command-line front end.
pub fn criterion_10(seeds: &[u64]) -> CriterionResult {
    let name = "repeated runs serialize identically";
    let short: Vec<u64> = seeds.iter().copied().take(5).collect();
    let once = (criterion_1(), criterion_2(&short), criterion_8(&short));
    let twice = (criterion_1(), criterion_2(&short), criterion_8(&short));
    let a = serde_json::to_string(&once).unwrap_or_default();
    let b = serde_json::to_string(&twice).unwrap_or_default();
    result(
        10,
        name,
        !a.is_empty() && a == b,
        format!("{} bytes compared", a.len()),
    )
}

/// Runs the whole suite. `seeds` is the full seed range; criteria pinned to
/// fifty samples use the first half.
pub fn run_all(seeds: &[u64]) -> SuiteReport {
    let fifty: Vec<u64> = seeds.iter().copied().take(50.min(seeds.len().max(1))).collect();
    let results = vec![
        criterion_1(),
        criterion_2(seeds),
        criterion_3(seeds),
        criterion_4(seeds),
        criterion_5(),
        criterion_6(&fifty),
        criterion_7(&fifty),
        criterion_8(&fifty),
        criterion_9(seeds),
        criterion_10(seeds),
    ];
    let all_pass = results.iter().all(|r| r.pass);
    SuiteReport { results, all_pass }
}

/// Expands an inclusive seed range.
pub fn seed_range(start: u64, end: u64) -> Vec<u64> {
    (start..=end).collect()
}
