//! Groups with left-invariant metric backends: normal forms, distances, and
//! ball enumeration.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::finite::{FiniteCayley, MetricOracle, SharedOracle, DEFAULT_ELEMENT_CAP};
use crate::rational::{rat_int, Rat};
use crate::word::Word;

/// The metric realization behind a [`GroupSpace`].
#[derive(Clone, Debug)]
pub enum MetricBackend {
    /// Word metric on the free group over the alphabet.
    FreeWord,
    /// ℓ1 metric on exponent vectors; models ℤⁿ with its induced word metric.
    FreeAbelianL1,
    /// Explicit finite group with BFS word-metric distances.
    FiniteCayley(FiniteCayley),
    /// Externally supplied normal-form and distance maps.
    Oracle(SharedOracle),
}

impl MetricBackend {
    pub fn name(&self) -> &'static str {
        match self {
            MetricBackend::FreeWord => "free",
            MetricBackend::FreeAbelianL1 => "free_abelian",
            MetricBackend::FiniteCayley(_) => "finite_cayley",
            MetricBackend::Oracle(_) => "oracle",
        }
    }
}

/// A group with a left-invariant metric and basepoint the identity.
#[derive(Clone, Debug)]
pub struct GroupSpace {
    generator_names: Vec<String>,
    backend: MetricBackend,
    pseudometric: bool,
    element_cap: usize,
}

/// All normal forms within a radius of the identity, with their distances.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ball {
    #[serde(with = "crate::rational::rat_string")]
    pub radius: Rat,
    pub elements: Vec<BallElement>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BallElement {
    pub word: Word,
    #[serde(with = "crate::rational::rat_string")]
    pub distance: Rat,
}

impl Ball {
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn words(&self) -> impl Iterator<Item = &Word> {
        self.elements.iter().map(|e| &e.word)
    }

    pub fn contains(&self, w: &Word) -> bool {
        self.elements.iter().any(|e| &e.word == w)
    }
}

impl GroupSpace {
    pub fn free<S: Into<String>>(names: Vec<S>) -> Self {
        GroupSpace {
            generator_names: names.into_iter().map(Into::into).collect(),
            backend: MetricBackend::FreeWord,
            pseudometric: false,
            element_cap: DEFAULT_ELEMENT_CAP,
        }
    }

    pub fn free_abelian<S: Into<String>>(names: Vec<S>) -> Self {
        GroupSpace {
            generator_names: names.into_iter().map(Into::into).collect(),
            backend: MetricBackend::FreeAbelianL1,
            pseudometric: false,
            element_cap: DEFAULT_ELEMENT_CAP,
        }
    }

    pub fn finite_cayley<S: Into<String>>(names: Vec<S>, group: FiniteCayley) -> Result<Self> {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        if names.len() != group.generator_count() {
            return Err(Error::AlphabetMismatch {
                left: names.len(),
                right: group.generator_count(),
            });
        }
        Ok(GroupSpace {
            generator_names: names,
            backend: MetricBackend::FiniteCayley(group),
            pseudometric: false,
            element_cap: DEFAULT_ELEMENT_CAP,
        })
    }

    pub fn oracle<S: Into<String>>(names: Vec<S>, oracle: Arc<dyn MetricOracle>, pseudometric: bool) -> Result<Self> {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        if names.len() != oracle.generator_count() {
            return Err(Error::AlphabetMismatch {
                left: names.len(),
                right: oracle.generator_count(),
            });
        }
        Ok(GroupSpace {
            generator_names: names,
            backend: MetricBackend::Oracle(oracle),
            pseudometric,
            element_cap: DEFAULT_ELEMENT_CAP,
        })
    }

    pub fn with_element_cap(mut self, cap: usize) -> Self {
        self.element_cap = cap;
        self
    }

    pub fn generator_count(&self) -> usize {
        self.generator_names.len()
    }

    pub fn generator_names(&self) -> &[String] {
        &self.generator_names
    }

    pub fn backend(&self) -> &MetricBackend {
        &self.backend
    }

    pub fn is_pseudometric(&self) -> bool {
        self.pseudometric
    }

    pub fn element_cap(&self) -> usize {
        self.element_cap
    }

    /// True when exact global suprema of structured functions are computable:
    /// the free and free-abelian backends.
    pub fn supports_exact_structured(&self) -> bool {
        matches!(self.backend, MetricBackend::FreeWord | MetricBackend::FreeAbelianL1)
    }

    /// Number of group elements when the backend is finite.
    pub fn group_order(&self) -> Option<usize> {
        match &self.backend {
            MetricBackend::FiniteCayley(g) => Some(g.order()),
            MetricBackend::Oracle(o) => o.elements().map(|e| e.len()),
            _ => None,
        }
    }

    pub fn check_word(&self, w: &Word) -> Result<()> {
        w.check_alphabet(self.generator_count())
    }

    /// Reduced free product of two words over this alphabet. Quotient
    /// backends identify further under [`GroupSpace::normal_form`].
    pub fn multiply(&self, u: &Word, v: &Word) -> Result<Word> {
        self.check_word(u)?;
        self.check_word(v)?;
        Ok(u.concat(v))
    }

    /// Canonical representative of the group element named by `w`.
    pub fn normal_form(&self, w: &Word) -> Result<Word> {
        self.check_word(w)?;
        match &self.backend {
            MetricBackend::FreeWord => Ok(w.clone()),
            MetricBackend::FreeAbelianL1 => {
                Ok(abelian_normal_form(&w.exponent_vector(self.generator_count())))
            }
            MetricBackend::FiniteCayley(g) => g.normal_form(w),
            MetricBackend::Oracle(o) => o.normal_form(w),
        }
    }

    /// Normal form of `u · v`.
    pub fn multiply_nf(&self, u: &Word, v: &Word) -> Result<Word> {
        self.normal_form(&self.multiply(u, v)?)
    }

    /// Normal form of `u^-1`.
    pub fn inverse_nf(&self, u: &Word) -> Result<Word> {
        self.check_word(u)?;
        self.normal_form(&u.inverse())
    }

    pub fn distance(&self, g: &Word, h: &Word) -> Result<Rat> {
        self.check_word(g)?;
        self.check_word(h)?;
        match &self.backend {
            MetricBackend::FreeWord => Ok(rat_int(g.inverse().concat(h).len() as i64)),
            MetricBackend::FreeAbelianL1 => {
                let n = self.generator_count();
                let (eg, eh) = (g.exponent_vector(n), h.exponent_vector(n));
                let l1: i64 = eg.iter().zip(&eh).map(|(a, b)| (b - a).abs()).sum();
                Ok(rat_int(l1))
            }
            MetricBackend::FiniteCayley(grp) => grp.distance(g, h),
            MetricBackend::Oracle(o) => o.distance(g, h),
        }
    }

    pub fn distance_to_identity(&self, w: &Word) -> Result<Rat> {
        self.distance(&Word::identity(), w)
    }

    /// Every normal form at distance ≤ `radius` from the identity, sorted by
    /// distance and then by word order.
    pub fn ball(&self, radius: &Rat) -> Result<Ball> {
        if radius < &rat_int(0) {
            return Err(Error::Precondition("ball radius must be nonnegative".into()));
        }
        let mut elements: Vec<BallElement> = match &self.backend {
            MetricBackend::FreeWord => {
                let max_len = radius.floor().to_integer();
                let max_len = usize::try_from(&max_len).map_err(|_| Error::ElementCap {
                    cap: self.element_cap,
                })?;
                free_ball(self.generator_count(), max_len, self.element_cap)?
            }
            MetricBackend::FreeAbelianL1 => {
                let max_norm = radius.floor().to_integer();
                let max_norm = i64::try_from(&max_norm).map_err(|_| Error::ElementCap {
                    cap: self.element_cap,
                })?;
                abelian_ball(self.generator_count(), max_norm, self.element_cap)?
            }
            MetricBackend::FiniteCayley(g) => g
                .words
                .iter()
                .zip(&g.dist)
                .filter(|(_, &d)| &rat_int(d as i64) <= radius)
                .map(|(w, &d)| BallElement {
                    word: w.clone(),
                    distance: rat_int(d as i64),
                })
                .collect(),
            MetricBackend::Oracle(o) => {
                let all = o.elements().ok_or_else(|| Error::Scope {
                    operation: "ball",
                    reason: "oracle backend does not enumerate".into(),
                })?;
                let e = Word::identity();
                let mut out = Vec::new();
                for w in all {
                    let d = o.distance(&e, &w)?;
                    if &d <= radius {
                        out.push(BallElement { word: w, distance: d });
                    }
                }
                out
            }
        };
        if elements.len() > self.element_cap {
            return Err(Error::ElementCap { cap: self.element_cap });
        }
        elements.sort_by(|a, b| (&a.distance, &a.word).cmp(&(&b.distance, &b.word)));
        Ok(Ball {
            radius: radius.clone(),
            elements,
        })
    }
}

/// Canonical word `a_0^{e_0} · a_1^{e_1} · ..` for an exponent vector.
pub fn abelian_normal_form(exponents: &[i64]) -> Word {
    let mut w = Word::identity();
    for (i, &e) in exponents.iter().enumerate() {
        if e != 0 {
            w = w.concat(&Word::power(i, e));
        }
    }
    w
}

fn free_ball(generator_count: usize, max_len: usize, cap: usize) -> Result<Vec<BallElement>> {
    let mut out = vec![BallElement {
        word: Word::identity(),
        distance: rat_int(0),
    }];
    // Depth-first over reduced words; never extend by the inverse of the last
    // letter, so every emitted word is already reduced and prefixes appear
    // before their extensions.
    let mut stack: Vec<Word> = vec![Word::identity()];
    while let Some(cur) = stack.pop() {
        if cur.len() == max_len {
            continue;
        }
        for i in 0..generator_count {
            for inverse in [false, true] {
                let letter = crate::word::Letter::new(i, inverse);
                if cur.letters().last().is_some_and(|&l| l.flipped() == letter) {
                    continue;
                }
                let next = cur.concat(&Word::from_letters([letter]));
                if out.len() >= cap {
                    return Err(Error::ElementCap { cap });
                }
                out.push(BallElement {
                    distance: rat_int(next.len() as i64),
                    word: next.clone(),
                });
                stack.push(next);
            }
        }
    }
    Ok(out)
}

fn abelian_ball(generator_count: usize, max_norm: i64, cap: usize) -> Result<Vec<BallElement>> {
    let mut out = Vec::new();
    let mut current = vec![0i64; generator_count];
    fn rec(
        coord: usize,
        budget: i64,
        current: &mut Vec<i64>,
        out: &mut Vec<BallElement>,
        cap: usize,
    ) -> Result<()> {
        if coord == current.len() {
            if out.len() >= cap {
                return Err(Error::ElementCap { cap });
            }
            let norm: i64 = current.iter().map(|e| e.abs()).sum();
            out.push(BallElement {
                word: abelian_normal_form(current),
                distance: rat_int(norm),
            });
            return Ok(());
        }
        for e in -budget..=budget {
            current[coord] = e;
            rec(coord + 1, budget - e.abs(), current, out, cap)?;
        }
        current[coord] = 0;
        Ok(())
    }
    rec(0, max_norm, &mut current, &mut out, cap)?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::word::Letter;

    fn w(s: &[(usize, i64)]) -> Word {
        Word::from_letters(s.iter().map(|&(i, sg)| Letter::new(i, sg < 0)))
    }

    fn f2() -> GroupSpace {
        GroupSpace::free(vec!["a", "b"])
    }

    #[test]
    fn free_word_distances() {
        let s = f2();
        // d(ab, a) = d(e, b) = 1 by left invariance
        assert_eq!(s.distance(&w(&[(0, 1), (1, 1)]), &Word::generator(0)).unwrap(), rat_int(1));
        assert_eq!(
            s.distance(&Word::identity(), &w(&[(0, 1), (1, 1), (0, -1)])).unwrap(),
            rat_int(3)
        );
    }

    #[test]
    fn abelian_distance_and_normal_form() {
        let s = GroupSpace::free_abelian(vec!["a", "b"]);
        let aba_inv = w(&[(0, 1), (1, 1), (0, -1)]);
        assert_eq!(s.normal_form(&aba_inv).unwrap(), Word::generator(1));
        assert_eq!(s.distance(&Word::identity(), &aba_inv).unwrap(), rat_int(1));
    }

    #[test]
    fn line_ball() {
        let s = GroupSpace::free(vec!["a"]);
        let b = s.ball(&rat_int(2)).unwrap();
        let words: Vec<Word> = b.words().cloned().collect();
        assert_eq!(b.len(), 5);
        for expected in [
            Word::power(0, -2),
            Word::power(0, -1),
            Word::identity(),
            Word::power(0, 1),
            Word::power(0, 2),
        ] {
            assert!(words.contains(&expected));
        }
    }

    #[test]
    fn f2_ball_sizes() {
        let s = f2();
        assert_eq!(s.ball(&rat_int(1)).unwrap().len(), 5);
        assert_eq!(s.ball(&rat_int(3)).unwrap().len(), 53);
    }

    #[test]
    fn free_ball_closed_under_prefixes() {
        let s = f2();
        let b = s.ball(&rat_int(3)).unwrap();
        for e in &b.elements {
            let letters = e.word.letters();
            for k in 0..letters.len() {
                let prefix = Word::from_letters(letters[..k].iter().copied());
                assert!(b.contains(&prefix));
            }
        }
    }

    #[test]
    fn ball_respects_cap() {
        let s = f2().with_element_cap(10);
        assert!(matches!(s.ball(&rat_int(3)), Err(Error::ElementCap { cap: 10 })));
    }

    #[test]
    fn ball_is_monotone() {
        let s = GroupSpace::free_abelian(vec!["a", "b"]);
        let small = s.ball(&rat_int(2)).unwrap();
        let large = s.ball(&rat_int(3)).unwrap();
        for e in &small.elements {
            assert!(large.contains(&e.word));
        }
    }
}
