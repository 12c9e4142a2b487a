//! Finite concrete groups: permutation-generated Cayley tables and tabulated
//! metric oracles.

use std::collections::{HashMap, VecDeque};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{rat_int, Rat};
use crate::word::{Letter, Word};

/// A permutation of `{0, .., n-1}` in one-line notation.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub struct Permutation(pub Vec<usize>);

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Permutation((0..n).collect())
    }

    pub fn degree(&self) -> usize {
        self.0.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.0.len();
        let mut seen = vec![false; n];
        for &image in &self.0 {
            if image >= n || seen[image] {
                return Err(Error::Precondition(format!(
                    "not a permutation of 0..{n}: {:?}",
                    self.0
                )));
            }
            seen[image] = true;
        }
        Ok(())
    }

    pub fn apply(&self, x: usize) -> usize {
        self.0[x]
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &Permutation) -> Permutation {
        Permutation(other.0.iter().map(|&x| self.0[x]).collect())
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0; self.0.len()];
        for (x, &image) in self.0.iter().enumerate() {
            inv[image] = x;
        }
        Permutation(inv)
    }
}

/// Default cap on enumerated elements; the CLI can override it through the
/// `INVLIP_MAX_BALL` environment variable.
pub const DEFAULT_ELEMENT_CAP: usize = 1_000_000;

/// An explicit finite group closed under its generators, with word-metric
/// distances from a breadth-first search and shortest-word normal forms.
#[derive(Clone, Debug)]
pub struct FiniteCayley {
    /// Normal form of each element; index 0 is the identity.
    pub words: Vec<Word>,
    /// Word-metric distance of each element to the identity.
    pub dist: Vec<u32>,
    /// `mult[i][j]` is the index of `element_i · element_j`.
    pub mult: Vec<Vec<usize>>,
    /// Index of each element's inverse.
    pub inv: Vec<usize>,
    /// Element index of each generator.
    pub gen_elem: Vec<usize>,
    /// Element index of each generator's inverse.
    pub gen_inv_elem: Vec<usize>,
    index_by_word: HashMap<Word, usize>,
}

impl FiniteCayley {
    /// Closes a set of generator permutations under composition. The walk is
    /// breadth-first in generator order `s_0, s_0^-1, s_1, ..`, so each
    /// element's stored word is a deterministic shortest representative.
    pub fn from_permutations(generators: &[Permutation], cap: usize) -> Result<Self> {
        if generators.is_empty() {
            return Err(Error::Empty("finite Cayley group needs generators"));
        }
        let degree = generators[0].degree();
        for g in generators {
            g.validate()?;
            if g.degree() != degree {
                return Err(Error::Precondition(
                    "generator permutations must share a degree".into(),
                ));
            }
        }

        // Signed generator list in canonical letter order.
        let mut steps: Vec<(Letter, Permutation)> = Vec::new();
        for (i, g) in generators.iter().enumerate() {
            steps.push((Letter::new(i, false), g.clone()));
            steps.push((Letter::new(i, true), g.inverse()));
        }

        let mut perms: Vec<Permutation> = vec![Permutation::identity(degree)];
        let mut words: Vec<Word> = vec![Word::identity()];
        let mut dist: Vec<u32> = vec![0];
        let mut index_of: HashMap<Permutation, usize> = HashMap::new();
        index_of.insert(perms[0].clone(), 0);

        let mut queue = VecDeque::from([0usize]);
        while let Some(cur) = queue.pop_front() {
            let cur_perm = perms[cur].clone();
            let cur_word = words[cur].clone();
            let cur_dist = dist[cur];
            for (letter, step) in &steps {
                // Right multiplication: π(w·s) = π(w) ∘ π(s).
                let next = cur_perm.compose(step);
                if !index_of.contains_key(&next) {
                    if perms.len() >= cap {
                        return Err(Error::ElementCap { cap });
                    }
                    index_of.insert(next.clone(), perms.len());
                    perms.push(next);
                    words.push(cur_word.concat(&Word::from_letters([*letter])));
                    dist.push(cur_dist + 1);
                    queue.push_back(perms.len() - 1);
                }
            }
        }

        let n = perms.len();
        let mut mult = vec![vec![0usize; n]; n];
        for i in 0..n {
            for j in 0..n {
                mult[i][j] = index_of[&perms[i].compose(&perms[j])];
            }
        }
        let inv: Vec<usize> = perms.iter().map(|p| index_of[&p.inverse()]).collect();
        let gen_elem: Vec<usize> = generators.iter().map(|g| index_of[g]).collect();
        let gen_inv_elem: Vec<usize> = generators.iter().map(|g| index_of[&g.inverse()]).collect();
        let index_by_word = words
            .iter()
            .enumerate()
            .map(|(i, w)| (w.clone(), i))
            .collect();

        Ok(FiniteCayley {
            words,
            dist,
            mult,
            inv,
            gen_elem,
            gen_inv_elem,
            index_by_word,
        })
    }

    pub fn order(&self) -> usize {
        self.words.len()
    }

    pub fn generator_count(&self) -> usize {
        self.gen_elem.len()
    }

    /// Element index reached by multiplying the letters of `w` from the identity.
    pub fn index_of_word(&self, w: &Word) -> Result<usize> {
        w.check_alphabet(self.generator_count())?;
        let mut idx = 0usize;
        for letter in w.letters() {
            let step = if letter.inverse {
                self.gen_inv_elem[letter.index]
            } else {
                self.gen_elem[letter.index]
            };
            idx = self.mult[idx][step];
        }
        Ok(idx)
    }

    pub fn normal_form(&self, w: &Word) -> Result<Word> {
        Ok(self.words[self.index_of_word(w)?].clone())
    }

    pub fn distance(&self, g: &Word, h: &Word) -> Result<Rat> {
        let gi = self.index_of_word(g)?;
        let hi = self.index_of_word(h)?;
        let rel = self.mult[self.inv[gi]][hi];
        Ok(rat_int(self.dist[rel] as i64))
    }

    /// Index of a stored normal form.
    pub fn index_of_normal_form(&self, w: &Word) -> Option<usize> {
        self.index_by_word.get(w).copied()
    }

    pub fn diameter(&self) -> u32 {
        self.dist.iter().copied().max().unwrap_or(0)
    }
}

/// Externally supplied metric backend: a normal-form map and a distance map.
pub trait MetricOracle: Send + Sync + std::fmt::Debug {
    fn generator_count(&self) -> usize;
    fn normal_form(&self, w: &Word) -> Result<Word>;
    fn distance(&self, g: &Word, h: &Word) -> Result<Rat>;
    /// All normal forms when the oracle is finite; `None` otherwise.
    fn elements(&self) -> Option<Vec<Word>> {
        None
    }
}

/// A fully tabulated finite oracle: element list, multiplication table, and a
/// distance matrix that may be a pseudometric.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TabularOracle {
    pub generator_count: usize,
    /// Normal forms; index 0 must be the identity.
    pub words: Vec<Word>,
    pub mult: Vec<Vec<usize>>,
    /// Element index of each generator and of its inverse.
    pub gen_elem: Vec<usize>,
    pub gen_inv_elem: Vec<usize>,
    /// Pairwise distances.
    #[serde(with = "crate::rational::rat_string_mat")]
    pub dist: Vec<Vec<Rat>>,
}

impl TabularOracle {
    pub fn validate(&self) -> Result<()> {
        let n = self.words.len();
        let fail = |msg: String| Err(Error::Oracle(msg));
        if n == 0 || !self.words[0].is_identity() {
            return fail("element 0 must be the identity".into());
        }
        if self.mult.len() != n
            || self.mult.iter().any(|r| r.len() != n || r.iter().any(|&x| x >= n))
        {
            return fail("multiplication table shape mismatch".into());
        }
        if self.dist.len() != n || self.dist.iter().any(|r| r.len() != n) {
            return fail("distance matrix shape mismatch".into());
        }
        if self.gen_elem.len() != self.generator_count || self.gen_inv_elem.len() != self.generator_count {
            return fail("generator element lists must match the alphabet".into());
        }
        for i in 0..n {
            if self.dist[i][i] != rat_int(0) {
                return fail(format!("d(x, x) != 0 at element {i}"));
            }
            for j in 0..n {
                if self.dist[i][j] != self.dist[j][i] {
                    return fail(format!("distance matrix not symmetric at ({i}, {j})"));
                }
                if self.dist[i][j] < rat_int(0) {
                    return fail(format!("negative distance at ({i}, {j})"));
                }
                // Left invariance over the multiplication table.
                for k in 0..n {
                    if self.dist[self.mult[k][i]][self.mult[k][j]] != self.dist[i][j] {
                        return fail(format!("distances not left-invariant at k={k}, ({i}, {j})"));
                    }
                }
            }
        }
        Ok(())
    }

    fn index_of_word(&self, w: &Word) -> Result<usize> {
        w.check_alphabet(self.generator_count)
            .map_err(|e| Error::Oracle(e.to_string()))?;
        let mut idx = 0usize;
        for letter in w.letters() {
            let step = if letter.inverse {
                self.gen_inv_elem[letter.index]
            } else {
                self.gen_elem[letter.index]
            };
            idx = self.mult[idx][step];
        }
        Ok(idx)
    }
}

impl MetricOracle for TabularOracle {
    fn generator_count(&self) -> usize {
        self.generator_count
    }

    fn normal_form(&self, w: &Word) -> Result<Word> {
        Ok(self.words[self.index_of_word(w)?].clone())
    }

    fn distance(&self, g: &Word, h: &Word) -> Result<Rat> {
        Ok(self.dist[self.index_of_word(g)?][self.index_of_word(h)?].clone())
    }

    fn elements(&self) -> Option<Vec<Word>> {
        Some(self.words.clone())
    }
}

pub type SharedOracle = Arc<dyn MetricOracle>;

#[cfg(test)]
mod tests {
    use super::*;

    fn cyclic_perm(n: usize) -> Permutation {
        Permutation((0..n).map(|x| (x + 1) % n).collect())
    }

    #[test]
    fn cyclic_five_closure() {
        let g = FiniteCayley::from_permutations(&[cyclic_perm(5)], 100).unwrap();
        assert_eq!(g.order(), 5);
        assert_eq!(g.diameter(), 2);
        // s^7 normalizes to s^2
        assert_eq!(g.normal_form(&Word::power(0, 7)).unwrap(), Word::power(0, 2));
        // d(e, s^3) = 2 via s^-2
        assert_eq!(g.distance(&Word::identity(), &Word::power(0, 3)).unwrap(), rat_int(2));
    }

    #[test]
    fn element_cap_is_enforced() {
        let err = FiniteCayley::from_permutations(&[cyclic_perm(10)], 4).unwrap_err();
        assert!(matches!(err, Error::ElementCap { cap: 4 }));
    }

    #[test]
    fn symmetric_group_from_transpositions() {
        let s12 = Permutation(vec![1, 0, 2]);
        let s23 = Permutation(vec![0, 2, 1]);
        let g = FiniteCayley::from_permutations(&[s12, s23], 100).unwrap();
        assert_eq!(g.order(), 6);
        // both generators are involutions
        let a = Word::generator(0);
        assert_eq!(g.normal_form(&a.concat(&a)).unwrap(), Word::identity());
    }
}
