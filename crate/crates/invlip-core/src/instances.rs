//! Canonical spaces and functions used by the test suites and the CLI.

use num::Zero;

use crate::error::Result;
use crate::finite::{FiniteCayley, Permutation};
use crate::lipschitz::LipFn;
use crate::presentation::Presentation;
use crate::rational::{rat_int, Rat};
use crate::space::GroupSpace;
use crate::word::{Letter, Word};

/// The integer line as a free group of rank one, together with the structured
/// encoding of the one-sided ramp: slope `delta` on `[0, r/2]`, flat on
/// `[-r/2, 0]`, interpolating back to the homomorphism `delta/2 · x` at
/// `±r`. Its perturbation is `p(x) = delta · min(|x|, r − |x|) / 2` inside
/// `[-r, r]` and zero outside, so all directional and norm computations are
/// exact.
pub fn ramp_on_line(delta: &Rat, support_radius: i64) -> (GroupSpace, LipFn) {
    assert!(support_radius >= 2, "ramp needs support radius >= 2");
    let space = GroupSpace::free(vec!["a"]);
    let half = delta / rat_int(2);
    let mut perturbation = Vec::new();
    for k in -support_radius..=support_radius {
        if k == 0 {
            continue;
        }
        let height = k.abs().min(support_radius - k.abs());
        let value = &half * rat_int(height);
        if !value.is_zero() {
            perturbation.push((Word::power(0, k), value));
        }
    }
    let f = LipFn::structured_on(&space, vec![half], perturbation)
        .expect("ramp construction is well-formed");
    (space, f)
}

/// Cyclic group of order `n` with the word metric of the single generator.
pub fn cyclic_group(n: usize) -> Result<GroupSpace> {
    let rotation = Permutation((0..n).map(|x| (x + 1) % n).collect());
    let group = FiniteCayley::from_permutations(&[rotation], n + 1)?;
    GroupSpace::finite_cayley(vec!["s"], group)
}

/// Symmetric group on three letters generated by the two adjacent
/// transpositions.
pub fn symmetric_group_3() -> Result<GroupSpace> {
    let s12 = Permutation(vec![1, 0, 2]);
    let s23 = Permutation(vec![0, 2, 1]);
    let group = FiniteCayley::from_permutations(&[s12, s23], 16)?;
    GroupSpace::finite_cayley(vec!["a", "b"], group)
}

/// `⟨a, b | aba⁻¹b⁻¹⟩`, the rank-two free-abelian presentation.
pub fn presentation_z2() -> Presentation {
    let commutator = Word::from_letters([
        Letter::new(0, false),
        Letter::new(1, false),
        Letter::new(0, true),
        Letter::new(1, true),
    ]);
    Presentation::new(vec!["a", "b"], vec![commutator]).expect("well-formed")
}

/// `⟨s | sⁿ⟩`.
pub fn presentation_cyclic(n: i64) -> Presentation {
    Presentation::new(vec!["s"], vec![Word::power(0, n)]).expect("well-formed")
}

/// Eight points in two isometric blocks swapped by an order-two action:
/// `d(i, j) = |i − j|` within a block, `|i − j| + 3` across. The fundamental
/// domain is the first block and realizes orbit distances exactly (`α = 1`).
pub fn eight_point_swap_space() -> Result<crate::orbit::FiniteActionSpace> {
    let block = 4usize;
    let n = 2 * block;
    let mut dist = vec![vec![rat_int(0); n]; n];
    for i in 0..n {
        for j in 0..n {
            let (bi, pi) = (i / block, i % block);
            let (bj, pj) = (j / block, j % block);
            let base = (pi as i64 - pj as i64).abs();
            dist[i][j] = rat_int(if bi == bj { base } else { base + 3 });
        }
    }
    let swap = Permutation((0..n).map(|x| (x + block) % n).collect());
    crate::orbit::FiniteActionSpace::new(
        dist,
        cyclic_group(2)?,
        vec![swap],
        (0..block).collect(),
        rat_int(1),
    )
}

/// Seeded random point values with a zero basepoint, for orbit-collapse
/// sweeps.
pub fn random_point_function(point_count: usize, seed: u64) -> Vec<Rat> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x5851_f42d_4c95_7f2d));
    let mut values: Vec<Rat> = (0..point_count)
        .map(|_| crate::rational::rat(rng.gen_range(-12i64..=12), rng.gen_range(1i64..=6)))
        .collect();
    if let Some(first) = values.first_mut() {
        *first = Rat::zero();
    }
    values
}

/// `⟨a, b | a²b⁻²⟩`.
pub fn presentation_a2_b_minus2() -> Presentation {
    let relator = Word::from_letters([
        Letter::new(0, false),
        Letter::new(0, false),
        Letter::new(1, true),
        Letter::new(1, true),
    ]);
    Presentation::new(vec!["a", "b"], vec![relator]).expect("well-formed")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    #[test]
    fn ramp_perturbation_shape() {
        let (space, f) = ramp_on_line(&rat_int(1), 16);
        let (hom, p) = f.structured_parts().unwrap();
        assert_eq!(hom, &[rat(1, 2)]);
        assert_eq!(p.get(&Word::power(0, 8)), Some(&rat_int(4)));
        assert_eq!(p.get(&Word::power(0, 2)), Some(&rat_int(1)));
        assert_eq!(p.get(&Word::power(0, -8)), Some(&rat_int(4)));
        assert!(p.get(&Word::power(0, 16)).is_none());
        assert_eq!(f.support_radius(&space).unwrap(), rat_int(15));
    }

    #[test]
    fn cyclic_group_orders() {
        for n in [2usize, 3, 5, 8] {
            let g = cyclic_group(n).unwrap();
            assert_eq!(g.group_order(), Some(n));
        }
    }
}
