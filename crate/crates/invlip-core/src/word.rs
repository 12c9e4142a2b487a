//! Freely reduced words over a signed generator alphabet.
//!
//! A [`Word`] is the canonical element representation for free groups and the
//! raw material every other backend normalizes. The reduction invariant — no
//! letter ever sits next to its own inverse — is enforced by construction.

use std::fmt;

use serde::de::{self, SeqAccess, Visitor};
use serde::ser::SerializeSeq;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// One signed letter: a generator index and an orientation.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Letter {
    pub index: usize,
    pub inverse: bool,
}

impl Letter {
    pub fn new(index: usize, inverse: bool) -> Self {
        Letter { index, inverse }
    }

    pub fn flipped(self) -> Self {
        Letter {
            index: self.index,
            inverse: !self.inverse,
        }
    }

    pub fn sign(self) -> i64 {
        if self.inverse {
            -1
        } else {
            1
        }
    }

    fn cancels(self, other: Letter) -> bool {
        self.index == other.index && self.inverse != other.inverse
    }
}

impl Serialize for Letter {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(2))?;
        seq.serialize_element(&(self.index as i64))?;
        seq.serialize_element(&self.sign())?;
        seq.end()
    }
}

impl<'de> Deserialize<'de> for Letter {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl<'de> Visitor<'de> for V {
            type Value = Letter;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                write!(f, "a [generator_index, sign] pair with sign +1 or -1")
            }
            fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> std::result::Result<Letter, A::Error> {
                let index: i64 = seq
                    .next_element()?
                    .ok_or_else(|| de::Error::invalid_length(0, &self))?;
                let sign: i64 = seq
                    .next_element()?
                    .ok_or_else(|| de::Error::invalid_length(1, &self))?;
                if seq.next_element::<de::IgnoredAny>()?.is_some() {
                    return Err(de::Error::invalid_length(3, &self));
                }
                if index < 0 {
                    return Err(de::Error::custom("negative generator index"));
                }
                match sign {
                    1 => Ok(Letter::new(index as usize, false)),
                    -1 => Ok(Letter::new(index as usize, true)),
                    _ => Err(de::Error::custom("sign must be +1 or -1")),
                }
            }
        }
        d.deserialize_seq(V)
    }
}

/// A freely reduced word. The empty word is the identity.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Word(Vec<Letter>);

impl Word {
    pub fn identity() -> Self {
        Word(Vec::new())
    }

    pub fn generator(index: usize) -> Self {
        Word(vec![Letter::new(index, false)])
    }

    /// `generator(index)^exponent`.
    pub fn power(index: usize, exponent: i64) -> Self {
        let letter = Letter::new(index, exponent < 0);
        Word(std::iter::repeat(letter).take(exponent.unsigned_abs() as usize).collect())
    }

    /// Builds a word from raw letters, cancelling adjacent inverse pairs.
    pub fn from_letters<I: IntoIterator<Item = Letter>>(letters: I) -> Self {
        let mut stack: Vec<Letter> = Vec::new();
        for letter in letters {
            match stack.last() {
                Some(&top) if top.cancels(letter) => {
                    stack.pop();
                }
                _ => stack.push(letter),
            }
        }
        Word(stack)
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.0.is_empty()
    }

    /// Reduced concatenation `self · other` in the free group.
    pub fn concat(&self, other: &Word) -> Word {
        let mut stack = self.0.clone();
        for &letter in &other.0 {
            match stack.last() {
                Some(&top) if top.cancels(letter) => {
                    stack.pop();
                }
                _ => stack.push(letter),
            }
        }
        Word(stack)
    }

    /// Reversed letters with flipped orientations.
    pub fn inverse(&self) -> Word {
        Word(self.0.iter().rev().map(|l| l.flipped()).collect())
    }

    /// Signed number of occurrences of `generator` in the reduced word.
    pub fn exponent_sum(&self, generator: usize) -> i64 {
        self.0
            .iter()
            .filter(|l| l.index == generator)
            .map(|l| l.sign())
            .sum()
    }

    /// Exponent sums for every generator of an alphabet of the given size.
    pub fn exponent_vector(&self, generator_count: usize) -> Vec<i64> {
        let mut v = vec![0i64; generator_count];
        for l in &self.0 {
            v[l.index] += l.sign();
        }
        v
    }

    /// Largest generator index used, if any.
    pub fn max_index(&self) -> Option<usize> {
        self.0.iter().map(|l| l.index).max()
    }

    /// Checks every letter against an alphabet size.
    pub fn check_alphabet(&self, generator_count: usize) -> Result<()> {
        match self.max_index() {
            Some(i) if i >= generator_count => Err(Error::InvalidGenerator {
                index: i,
                generator_count,
            }),
            _ => Ok(()),
        }
    }

    /// Renders the word with generator names, `e` for the identity.
    pub fn display(&self, names: &[String]) -> String {
        if self.0.is_empty() {
            return "e".to_string();
        }
        let mut out = String::new();
        let mut i = 0;
        while i < self.0.len() {
            let letter = self.0[i];
            let mut run = 1;
            while i + run < self.0.len() && self.0[i + run] == letter {
                run += 1;
            }
            let name = names
                .get(letter.index)
                .cloned()
                .unwrap_or_else(|| format!("g{}", letter.index));
            if !out.is_empty() {
                out.push('*');
            }
            let exp = letter.sign() * run as i64;
            if exp == 1 {
                out.push_str(&name);
            } else {
                out.push_str(&format!("{name}^{exp}"));
            }
            i += run;
        }
        out
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "e");
        }
        for (i, l) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, "·")?;
            }
            write!(f, "g{}{}", l.index, if l.inverse { "⁻" } else { "" })?;
        }
        Ok(())
    }
}

impl Serialize for Word {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.0.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Word {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let letters = Vec::<Letter>::deserialize(d)?;
        Ok(Word::from_letters(letters))
    }
}

/// Free reduction of a raw letter sequence over a sized alphabet.
pub fn reduce<I: IntoIterator<Item = Letter>>(letters: I, generator_count: usize) -> Result<Word> {
    let mut raw = Vec::new();
    for letter in letters {
        if letter.index >= generator_count {
            return Err(Error::InvalidGenerator {
                index: letter.index,
                generator_count,
            });
        }
        raw.push(letter);
    }
    Ok(Word::from_letters(raw))
}

/// Reduced product of two words over a shared sized alphabet.
pub fn multiply(u: &Word, v: &Word, generator_count: usize) -> Result<Word> {
    u.check_alphabet(generator_count)?;
    v.check_alphabet(generator_count)?;
    Ok(u.concat(v))
}

/// Parses `a`, `a^-1`, `a^3*b^-2`, or `e` against a list of generator names.
pub fn parse_word_text(names: &[String], text: &str) -> Result<Word> {
    let text = text.trim();
    if text.is_empty() || text == "e" {
        return Ok(Word::identity());
    }
    let mut letters = Vec::new();
    for term in text.split('*') {
        let term = term.trim();
        let (name, exponent) = match term.split_once('^') {
            Some((n, e)) => {
                let exponent: i64 = e
                    .trim()
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad exponent in {term:?}")))?;
                (n.trim(), exponent)
            }
            None => (term, 1),
        };
        let index = names
            .iter()
            .position(|candidate| candidate == name)
            .ok_or_else(|| Error::Parse(format!("unknown generator {name:?}")))?;
        let letter = Letter::new(index, exponent < 0);
        letters.extend(std::iter::repeat(letter).take(exponent.unsigned_abs() as usize));
    }
    Ok(Word::from_letters(letters))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &[(usize, i64)]) -> Word {
        Word::from_letters(s.iter().map(|&(i, sg)| Letter::new(i, sg < 0)))
    }

    #[test]
    fn reduce_examples() {
        assert_eq!(reduce(vec![], 2).unwrap(), Word::identity());
        assert_eq!(
            reduce(vec![Letter::new(0, false), Letter::new(0, true)], 1).unwrap(),
            Word::identity()
        );
        // a b b^-1 a -> a^2
        assert_eq!(
            reduce(
                vec![
                    Letter::new(0, false),
                    Letter::new(1, false),
                    Letter::new(1, true),
                    Letter::new(0, false)
                ],
                2
            )
            .unwrap(),
            Word::power(0, 2)
        );
        assert!(matches!(
            reduce(vec![Letter::new(3, false)], 2),
            Err(Error::InvalidGenerator { index: 3, generator_count: 2 })
        ));
    }

    #[test]
    fn multiply_examples() {
        let a = Word::generator(0);
        assert_eq!(multiply(&a, &a.inverse(), 2).unwrap(), Word::identity());
        // (ab, b^-1) -> a
        assert_eq!(
            multiply(&w(&[(0, 1), (1, 1)]), &w(&[(1, -1)]), 2).unwrap(),
            a
        );
        // (a^2 b, b^-1 a) -> a^3
        assert_eq!(
            multiply(&w(&[(0, 1), (0, 1), (1, 1)]), &w(&[(1, -1), (0, 1)]), 2).unwrap(),
            Word::power(0, 3)
        );
        assert!(multiply(&w(&[(1, 1)]), &a, 1).is_err());
    }

    #[test]
    fn inverse_examples() {
        assert_eq!(Word::identity().inverse(), Word::identity());
        assert_eq!(w(&[(0, 1), (1, 1)]).inverse(), w(&[(1, -1), (0, -1)]));
        assert_eq!(Word::power(0, -2).inverse(), Word::power(0, 2));
    }

    #[test]
    fn exponent_sum_examples() {
        // commutator a b a^-1 b^-1
        let c = w(&[(0, 1), (1, 1), (0, -1), (1, -1)]);
        assert_eq!(c.exponent_sum(0), 0);
        assert_eq!(Word::power(0, 5).exponent_sum(0), 5);
        assert_eq!(w(&[(0, 1), (0, 1), (1, -1)]).exponent_sum(1), -1);
    }

    #[test]
    fn serde_round_trip_reduces() {
        let parsed: Word = serde_json::from_str("[[0,1],[0,-1],[1,1]]").unwrap();
        assert_eq!(parsed, Word::generator(1));
        assert_eq!(serde_json::to_string(&parsed).unwrap(), "[[1,1]]");
    }

    #[test]
    fn display_groups_runs() {
        let names = vec!["a".to_string(), "b".to_string()];
        assert_eq!(Word::identity().display(&names), "e");
        assert_eq!(w(&[(0, 1), (0, 1), (1, -1)]).display(&names), "a^2*b^-1");
    }

    #[test]
    fn parse_text_round_trips_display() {
        let names = vec!["a".to_string(), "b".to_string()];
        for text in ["e", "a", "a^-1", "a^2*b^-1", "b^3"] {
            let parsed = parse_word_text(&names, text).unwrap();
            assert_eq!(parsed.display(&names), text);
        }
        assert!(parse_word_text(&names, "c").is_err());
        assert!(parse_word_text(&names, "a^x").is_err());
    }
}
