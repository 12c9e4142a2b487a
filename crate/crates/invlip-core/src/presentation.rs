//! Finite group presentations and their relator exponent matrices.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{rat_int, Rat};
use crate::word::Word;

/// A finite presentation: named generators and freely reduced relators.
///
/// Relators are stored exactly as given; cyclic reduction is never applied
/// since exponent sums are invariant under cyclic permutation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Presentation {
    pub generator_names: Vec<String>,
    pub relators: Vec<Word>,
}

impl Presentation {
    pub fn new<S: Into<String>>(names: Vec<S>, relators: Vec<Word>) -> Result<Self> {
        let p = Presentation {
            generator_names: names.into_iter().map(Into::into).collect(),
            relators,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn generator_count(&self) -> usize {
        self.generator_names.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.generator_names.is_empty() {
            return Err(Error::Empty("presentation needs at least one generator"));
        }
        for r in &self.relators {
            if r.is_empty() {
                return Err(Error::Precondition("relators must be nonempty".into()));
            }
            r.check_alphabet(self.generator_count())?;
        }
        Ok(())
    }

    /// Length of the longest relator as a word-metric distance.
    pub fn max_relator_length(&self) -> usize {
        self.relators.iter().map(Word::len).max().unwrap_or(0)
    }
}

/// Integer matrix of relator exponent sums: rows are relators, columns are
/// generators in index order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExponentMatrix {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<Vec<i64>>,
}

impl ExponentMatrix {
    pub fn to_rational_rows(&self) -> Vec<Vec<Rat>> {
        self.entries
            .iter()
            .map(|row| row.iter().map(|&e| rat_int(e)).collect())
            .collect()
    }
}

/// The `|R| × |S|` matrix whose `(r, s)` entry is the signed count of
/// generator `s` in relator `r`.
pub fn exponent_matrix(p: &Presentation) -> ExponentMatrix {
    let cols = p.generator_count();
    let entries: Vec<Vec<i64>> = p
        .relators
        .iter()
        .map(|r| r.exponent_vector(cols))
        .collect();
    ExponentMatrix {
        rows: entries.len(),
        cols,
        entries,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::word::Letter;

    fn w(s: &[(usize, i64)]) -> Word {
        Word::from_letters(s.iter().map(|&(i, sg)| Letter::new(i, sg < 0)))
    }

    #[test]
    fn commutator_has_zero_exponents() {
        let p = Presentation::new(vec!["a", "b"], vec![w(&[(0, 1), (1, 1), (0, -1), (1, -1)])]).unwrap();
        assert_eq!(exponent_matrix(&p).entries, vec![vec![0, 0]]);
    }

    #[test]
    fn power_relator() {
        let p = Presentation::new(vec!["s"], vec![Word::power(0, 5)]).unwrap();
        assert_eq!(exponent_matrix(&p).entries, vec![vec![5]]);
    }

    #[test]
    fn mixed_relator() {
        let p = Presentation::new(vec!["a", "b"], vec![w(&[(0, 1), (0, 1), (1, -1), (1, -1), (1, -1)])]).unwrap();
        assert_eq!(exponent_matrix(&p).entries, vec![vec![2, -3]]);
        assert_eq!(p.max_relator_length(), 5);
    }

    #[test]
    fn rejects_empty_relator() {
        assert!(Presentation::new(vec!["a"], vec![Word::identity()]).is_err());
    }

    #[test]
    fn rejects_out_of_range_relator() {
        assert!(Presentation::new(vec!["a"], vec![Word::generator(1)]).is_err());
    }
}
