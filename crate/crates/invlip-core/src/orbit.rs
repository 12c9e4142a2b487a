//! Orbit-collapse approximants on finite pointed metric spaces with a group
//! action by isometries.
//!
//! When a fundamental domain `D` controls orbit distances up to a factor `α`,
//! collapsing a function to its `D`-representative values yields an invariant
//! function within `(2α + 1)· δ̂` of the original.

use num::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::finite::Permutation;
use crate::rational::{rat_int, Rat};
use crate::space::{GroupSpace, MetricBackend};
use crate::word::Word;

/// A finite pointed metric space with an isometric action of a finite group,
/// a fundamental domain, and its distortion constant.
#[derive(Clone, Debug)]
pub struct FiniteActionSpace {
    /// Symmetric distance matrix over the points; index 0 is the basepoint.
    pub dist: Vec<Vec<Rat>>,
    /// The acting group.
    pub group: GroupSpace,
    /// Action of each generator as a permutation of the points.
    pub generator_actions: Vec<Permutation>,
    /// Point indices of the fundamental domain; must contain 0.
    pub fundamental_domain: Vec<usize>,
    pub alpha: Rat,
    /// Action of every group element, in group element order.
    element_actions: Vec<Permutation>,
    /// Fundamental-domain representative of each point's orbit.
    representative: Vec<usize>,
}

/// Values of a function on the points of a [`FiniteActionSpace`], basepoint
/// first. The basepoint value must be zero.
pub type PointFn = Vec<Rat>;

/// Certified orbit-collapse outcome.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OrbitReport {
    #[serde(with = "crate::rational::rat_string")]
    pub delta_hat: Rat,
    #[serde(with = "crate::rational::rat_string")]
    pub bound: Rat,
    #[serde(with = "crate::rational::rat_string")]
    pub achieved: Rat,
    pub pass: bool,
    /// The collapsed function is invariant with trivial homomorphism part.
    pub invariant: bool,
    pub defect_witness: (Word, usize, usize),
    pub norm_witness: (usize, usize),
}

impl FiniteActionSpace {
    pub fn new(
        dist: Vec<Vec<Rat>>,
        group: GroupSpace,
        generator_actions: Vec<Permutation>,
        fundamental_domain: Vec<usize>,
        alpha: Rat,
    ) -> Result<Self> {
        let mut space = FiniteActionSpace {
            dist,
            group,
            generator_actions,
            fundamental_domain,
            alpha,
            element_actions: Vec::new(),
            representative: Vec::new(),
        };
        space.validate()?;
        Ok(space)
    }

    pub fn point_count(&self) -> usize {
        self.dist.len()
    }

    pub fn element_actions(&self) -> &[Permutation] {
        &self.element_actions
    }

    pub fn group_elements(&self) -> Result<Vec<Word>> {
        let order = self.group.group_order().ok_or(Error::ActionSpace(
            "acting group must be finite".into(),
        ))?;
        Ok(self.group.ball(&rat_int(order as i64))?.words().cloned().collect())
    }

    fn validate(&mut self) -> Result<()> {
        let n = self.point_count();
        let fail = |msg: String| Err(Error::ActionSpace(msg));
        if n == 0 {
            return fail("at least one point required".into());
        }
        if self.dist.iter().any(|row| row.len() != n) {
            return fail("distance matrix must be square".into());
        }
        for i in 0..n {
            if !self.dist[i][i].is_zero() {
                return fail(format!("d({i}, {i}) must be 0"));
            }
            for j in 0..n {
                if self.dist[i][j] != self.dist[j][i] {
                    return fail(format!("distance matrix not symmetric at ({i}, {j})"));
                }
                if i != j && !self.dist[i][j].is_positive() {
                    return fail(format!("d({i}, {j}) must be positive"));
                }
                for k in 0..n {
                    if &self.dist[i][j] > &(&self.dist[i][k] + &self.dist[k][j]) {
                        return fail(format!("triangle inequality fails at ({i}, {j}, {k})"));
                    }
                }
            }
        }

        let MetricBackend::FiniteCayley(cayley) = self.group.backend() else {
            return fail("acting group must use the finite Cayley backend".into());
        };
        if self.generator_actions.len() != self.group.generator_count() {
            return fail("one action permutation per generator required".into());
        }
        for p in &self.generator_actions {
            p.validate().map_err(|e| Error::ActionSpace(e.to_string()))?;
            if p.degree() != n {
                return fail("action permutations must cover all points".into());
            }
        }

        // Compose the generator actions along each element's normal form.
        self.element_actions = cayley
            .words
            .iter()
            .map(|w| {
                let mut perm = Permutation::identity(n);
                for letter in w.letters() {
                    let step = if letter.inverse {
                        self.generator_actions[letter.index].inverse()
                    } else {
                        self.generator_actions[letter.index].clone()
                    };
                    // π(w·s) = π(w) ∘ π(s)
                    perm = perm.compose(&step);
                }
                perm
            })
            .collect();

        // The action must be a homomorphism into the isometries.
        let order = cayley.order();
        for i in 0..order {
            for j in 0..order {
                let composed = self.element_actions[i].compose(&self.element_actions[j]);
                if composed != self.element_actions[cayley.mult[i][j]] {
                    return fail(format!("action is not a homomorphism at elements ({i}, {j})"));
                }
            }
        }
        for (idx, perm) in self.element_actions.iter().enumerate() {
            for x in 0..n {
                for y in 0..n {
                    if self.dist[perm.apply(x)][perm.apply(y)] != self.dist[x][y] {
                        return fail(format!("element {idx} does not act by isometries"));
                    }
                }
            }
        }

        if !self.fundamental_domain.contains(&0) {
            return fail("fundamental domain must contain the basepoint".into());
        }
        if self.fundamental_domain.iter().any(|&x| x >= n) {
            return fail("fundamental domain indices out of range".into());
        }

        // Orbits of domain points: disjoint and covering.
        self.representative = vec![usize::MAX; n];
        for &d in &self.fundamental_domain {
            for perm in &self.element_actions {
                let image = perm.apply(d);
                if self.representative[image] != usize::MAX && self.representative[image] != d {
                    return fail(format!(
                        "orbits of domain points {} and {} overlap",
                        self.representative[image], d
                    ));
                }
                self.representative[image] = d;
            }
        }
        if let Some(missing) = self.representative.iter().position(|&r| r == usize::MAX) {
            return fail(format!("point {missing} is not covered by any domain orbit"));
        }

        if self.alpha < rat_int(1) {
            return fail("alpha must be at least 1".into());
        }
        // d(x, y) ≤ α · d(Gx, Gy) for distinct domain points.
        for &x in &self.fundamental_domain {
            for &y in &self.fundamental_domain {
                if x == y {
                    continue;
                }
                let mut orbit_dist: Option<Rat> = None;
                for p in &self.element_actions {
                    for q in &self.element_actions {
                        let d = self.dist[p.apply(x)][q.apply(y)].clone();
                        if orbit_dist.as_ref().map_or(true, |m| &d < m) {
                            orbit_dist = Some(d);
                        }
                    }
                }
                let orbit_dist = orbit_dist.expect("group is nonempty");
                if self.dist[x][y] > &self.alpha * &orbit_dist {
                    return fail(format!(
                        "domain distortion exceeds alpha between points {x} and {y}"
                    ));
                }
            }
        }
        Ok(())
    }

    /// Orbit representative of a point within the fundamental domain.
    pub fn representative(&self, point: usize) -> usize {
        self.representative[point]
    }

    fn check_point_fn(&self, f: &PointFn) -> Result<()> {
        if f.len() != self.point_count() {
            return Err(Error::Precondition(format!(
                "function has {} values for {} points",
                f.len(),
                self.point_count()
            )));
        }
        if !f[0].is_zero() {
            return Err(Error::Precondition("basepoint value must be 0".into()));
        }
        Ok(())
    }

    /// Invariance defect of the action:
    /// `max |(f(gx) − f(x)) − (f(gy) − f(y))| / d(x, y)`.
    pub fn action_defect(&self, f: &PointFn) -> Result<(Rat, (Word, usize, usize))> {
        self.check_point_fn(f)?;
        let elements = self.group_elements()?;
        let n = self.point_count();
        let mut best = Rat::zero();
        let mut witness = (Word::identity(), 0, if n > 1 { 1 } else { 0 });
        for (g, perm) in elements.iter().zip(&self.element_actions) {
            for x in 0..n {
                let qx = &f[perm.apply(x)] - &f[x];
                for y in (x + 1)..n {
                    let qy = &f[perm.apply(y)] - &f[y];
                    let num = (&qx - &qy).abs();
                    if num.is_zero() {
                        continue;
                    }
                    let ratio = num / &self.dist[x][y];
                    if ratio > best {
                        best = ratio;
                        witness = (g.clone(), x, y);
                    }
                }
            }
        }
        Ok((best, witness))
    }

    /// Lipschitz number of `f` over all point pairs.
    pub fn point_lip_norm(&self, f: &PointFn) -> Result<(Rat, (usize, usize))> {
        self.check_point_fn(f)?;
        let n = self.point_count();
        let mut best = Rat::zero();
        let mut witness = (0, if n > 1 { 1 } else { 0 });
        for x in 0..n {
            for y in (x + 1)..n {
                let ratio = (&f[x] - &f[y]).abs() / &self.dist[x][y];
                if ratio > best {
                    best = ratio;
                    witness = (x, y);
                }
            }
        }
        Ok((best, witness))
    }
}

/// Collapses `f` to its fundamental-domain values: `f̄(y) = f(x)` for `y` in
/// the orbit of the domain point `x`. The result is invariant, and
/// `‖f − f̄‖ ≤ (2α + 1) · δ̂` over all point pairs.
pub fn orbit_collapse_approximant(
    space: &FiniteActionSpace,
    f: &PointFn,
) -> Result<(PointFn, OrbitReport)> {
    space.check_point_fn(f)?;
    let (delta_hat, defect_witness) = space.action_defect(f)?;

    let collapsed: PointFn = (0..space.point_count())
        .map(|x| f[space.representative(x)].clone())
        .collect();

    // Invariance with trivial homomorphism part: f̄(g·x) = f̄(x) everywhere.
    let invariant = space.element_actions().iter().all(|perm| {
        (0..space.point_count()).all(|x| collapsed[perm.apply(x)] == collapsed[x])
    });

    let difference: PointFn = f.iter().zip(&collapsed).map(|(a, b)| a - b).collect();
    let n = space.point_count();
    let mut achieved = Rat::zero();
    let mut norm_witness = (0, if n > 1 { 1 } else { 0 });
    for x in 0..n {
        for y in (x + 1)..n {
            let ratio = (&difference[x] - &difference[y]).abs() / &space.dist[x][y];
            if ratio > achieved {
                achieved = ratio;
                norm_witness = (x, y);
            }
        }
    }

    let bound = (&space.alpha + &space.alpha + rat_int(1)) * &delta_hat;
    let report = OrbitReport {
        pass: achieved <= bound && invariant,
        delta_hat,
        bound,
        achieved,
        invariant,
        defect_witness,
        norm_witness,
    };
    Ok((collapsed, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances;
    use crate::rational::rat;

    #[test]
    fn trivial_action_returns_f() {
        let group = instances::cyclic_group(1).unwrap();
        let dist = vec![
            vec![rat_int(0), rat_int(1)],
            vec![rat_int(1), rat_int(0)],
        ];
        let space = FiniteActionSpace::new(
            dist,
            group,
            vec![Permutation::identity(2)],
            vec![0, 1],
            rat_int(1),
        )
        .unwrap();
        let f = vec![rat_int(0), rat(3, 2)];
        let (collapsed, report) = orbit_collapse_approximant(&space, &f).unwrap();
        assert_eq!(collapsed, f);
        assert!(report.achieved.is_zero());
        assert!(report.invariant);
        assert!(report.pass);
    }

    #[test]
    fn orbit_constant_function_is_fixed() {
        let space = instances::eight_point_swap_space().unwrap();
        // Constant on each orbit {i, i+4}.
        let f = vec![
            rat_int(0),
            rat_int(1),
            rat_int(2),
            rat_int(1),
            rat_int(0),
            rat_int(1),
            rat_int(2),
            rat_int(1),
        ];
        let (collapsed, report) = orbit_collapse_approximant(&space, &f).unwrap();
        assert_eq!(collapsed, f);
        assert!(report.invariant);
        assert!(report.pass);
    }

    #[test]
    fn swap_space_bound_holds_for_perturbed_functions() {
        let space = instances::eight_point_swap_space().unwrap();
        let f = vec![
            rat_int(0),
            rat(1, 2),
            rat_int(1),
            rat(5, 4),
            rat(1, 3),
            rat(2, 3),
            rat(3, 4),
            rat_int(1),
        ];
        let (collapsed, report) = orbit_collapse_approximant(&space, &f).unwrap();
        assert!(report.invariant);
        assert!(report.pass, "achieved {} bound {}", report.achieved, report.bound);
        for x in 0..8 {
            assert_eq!(collapsed[x], f[space.representative(x)]);
        }
        // bound is (2α + 1)·δ̂ = 3·δ̂ here
        assert_eq!(report.bound, rat_int(3) * &report.delta_hat);
    }

    #[test]
    fn validation_names_failed_axiom() {
        let group = instances::cyclic_group(2).unwrap();
        let dist = vec![
            vec![rat_int(0), rat_int(1)],
            vec![rat_int(1), rat_int(0)],
        ];
        // Swapping permutation is an isometry but the domain misses point 1's
        // orbit only if we pass a bad domain list.
        let err = FiniteActionSpace::new(
            dist,
            group,
            vec![Permutation(vec![0, 1])],
            vec![0],
            rat_int(1),
        )
        .unwrap_err();
        assert!(err.to_string().contains("not covered"));
    }
}
