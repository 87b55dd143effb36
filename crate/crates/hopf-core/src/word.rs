//! Words over signed generators in run-length form.
//!
//! A [`Word`] is kept canonical at all times: adjacent runs never share a
//! generator and no run has exponent zero. Under that invariant, splicing
//! letter sequences back together performs free reduction automatically, so
//! every constructor and combinator below returns freely reduced words.

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

/// Hard ceiling on the letter length of any word produced by a combinator.
///
/// Reduction algorithms only shrink words, so the cap is only reachable by
/// deliberately adversarial input (huge exponents, nested powers). Hitting it
/// is reported as an error rather than exhausting memory.
pub const MAX_WORD_LETTERS: u64 = 1_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WordError {
    #[error("generator name {0:?} is not a valid token")]
    BadName(String),
    #[error("no image supplied for generator {0}")]
    UnmappedGenerator(GeneratorId),
    #[error("operation would produce a word longer than {MAX_WORD_LETTERS} letters")]
    WordTooLarge,
}

/// A generator symbol together with the tower node that introduced it.
///
/// Equality is on the (name, scope) pair, so identically named generators of
/// unrelated groups never collide.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GeneratorId {
    name: Arc<str>,
    scope: Arc<str>,
}

fn valid_token(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

impl GeneratorId {
    pub fn new(name: &str, scope: &str) -> Result<Self, WordError> {
        if !valid_token(name) {
            return Err(WordError::BadName(name.to_string()));
        }
        Ok(GeneratorId {
            name: Arc::from(name),
            scope: Arc::from(scope),
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn scope(&self) -> &str {
        &self.scope
    }
}

impl fmt::Display for GeneratorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name)
    }
}

impl fmt::Debug for GeneratorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}@{}", self.name, self.scope)
    }
}

/// One run of a word: a generator raised to a nonzero power.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Letter {
    pub gen: GeneratorId,
    pub exp: i64,
}

impl Letter {
    pub fn new(gen: GeneratorId, exp: i64) -> Self {
        Letter { gen, exp }
    }
}

/// A freely reduced word in run-length form.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Word {
    letters: Vec<Letter>,
}

impl Word {
    pub fn identity() -> Self {
        Word::default()
    }

    pub fn generator(gen: GeneratorId) -> Self {
        Word::letter(gen, 1)
    }

    pub fn letter(gen: GeneratorId, exp: i64) -> Self {
        if exp == 0 {
            Word::identity()
        } else {
            Word {
                letters: vec![Letter { gen, exp }],
            }
        }
    }

    /// Builds a word from arbitrary letters, merging runs and cancelling
    /// inverse pairs until the result is canonical.
    pub fn from_letters<I: IntoIterator<Item = Letter>>(letters: I) -> Result<Self, WordError> {
        let mut stack: Vec<Letter> = Vec::new();
        let mut len: u64 = 0;
        for l in letters {
            if l.exp == 0 {
                continue;
            }
            len = len.saturating_add(l.exp.unsigned_abs());
            if len > MAX_WORD_LETTERS.saturating_mul(4) {
                return Err(WordError::WordTooLarge);
            }
            match stack.last_mut() {
                Some(top) if top.gen == l.gen => {
                    top.exp += l.exp;
                    if top.exp == 0 {
                        stack.pop();
                    }
                }
                _ => stack.push(l),
            }
        }
        let w = Word { letters: stack };
        if w.letter_len() > MAX_WORD_LETTERS {
            return Err(WordError::WordTooLarge);
        }
        Ok(w)
    }

    /// Like [`Word::from_letters`] for inputs known to stay within bounds.
    fn from_letters_unchecked<I: IntoIterator<Item = Letter>>(letters: I) -> Self {
        Word::from_letters(letters).expect("word length invariant violated")
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    /// Number of runs (distinct maximal generator powers).
    pub fn run_len(&self) -> usize {
        self.letters.len()
    }

    /// Total letter count, i.e. the sum of absolute exponents.
    pub fn letter_len(&self) -> u64 {
        self.letters.iter().map(|l| l.exp.unsigned_abs()).sum()
    }

    pub fn first(&self) -> Option<&Letter> {
        self.letters.first()
    }

    pub fn last(&self) -> Option<&Letter> {
        self.letters.last()
    }

    pub fn concat(&self, other: &Word) -> Result<Word, WordError> {
        Word::from_letters(self.letters.iter().chain(other.letters.iter()).cloned())
    }

    pub fn inverse(&self) -> Word {
        Word {
            letters: self
                .letters
                .iter()
                .rev()
                .map(|l| Letter::new(l.gen.clone(), -l.exp))
                .collect(),
        }
    }

    pub fn pow(&self, n: i64) -> Result<Word, WordError> {
        let total = self.letter_len().saturating_mul(n.unsigned_abs());
        if total > MAX_WORD_LETTERS {
            return Err(WordError::WordTooLarge);
        }
        let base = if n < 0 { self.inverse() } else { self.clone() };
        let mut out = Word::identity();
        for _ in 0..n.unsigned_abs() {
            out = out.concat(&base)?;
        }
        Ok(out)
    }

    /// The commutator `a b a^-1 b^-1`.
    pub fn commutator(a: &Word, b: &Word) -> Result<Word, WordError> {
        a.concat(b)?.concat(&a.inverse())?.concat(&b.inverse())
    }

    /// Conjugate of `self` by `c`, i.e. `c self c^-1`.
    pub fn conjugate_by(&self, c: &Word) -> Result<Word, WordError> {
        c.concat(self)?.concat(&c.inverse())
    }

    /// Replaces every generator by its image, reducing the result.
    pub fn substitute<'a, F>(&self, mut image: F) -> Result<Word, WordError>
    where
        F: FnMut(&GeneratorId) -> Option<&'a Word>,
    {
        let mut out = Word::identity();
        for l in &self.letters {
            let img = image(&l.gen).ok_or_else(|| WordError::UnmappedGenerator(l.gen.clone()))?;
            out = out.concat(&img.pow(l.exp)?)?;
        }
        Ok(out)
    }

    /// Peels mutually inverse first/last letters, returning `(conjugator,
    /// core)` with `self = conjugator . core . conjugator^-1` and the core
    /// cyclically reduced.
    pub fn cyclically_reduce(&self) -> (Word, Word) {
        let mut conj: Vec<Letter> = Vec::new();
        let mut core = self.clone();
        loop {
            if core.run_len() < 2 {
                break;
            }
            let first = core.letters.first().unwrap().clone();
            let last = core.letters.last().unwrap().clone();
            if first.gen != last.gen || first.exp.signum() != -last.exp.signum() {
                break;
            }
            // Strip one letter from each end; runs shrink toward zero.
            let s = first.exp.signum();
            let mut letters = core.letters.clone();
            letters[0].exp -= s;
            let lastidx = letters.len() - 1;
            letters[lastidx].exp += s;
            conj.push(Letter::new(first.gen.clone(), s));
            core = Word::from_letters_unchecked(letters);
        }
        (Word::from_letters_unchecked(conj), core)
    }

    /// True when no proper cyclic rotation shortens the word.
    pub fn is_cyclically_reduced(&self) -> bool {
        let (conj, _) = self.cyclically_reduce();
        conj.is_empty()
    }

    /// Expands the run-length form into unit letters, e.g. `c^-2 -> c^-1 c^-1`.
    pub fn unit_letters(&self) -> Vec<Letter> {
        let mut out = Vec::new();
        for l in &self.letters {
            let s = l.exp.signum();
            for _ in 0..l.exp.unsigned_abs() {
                out.push(Letter::new(l.gen.clone(), s));
            }
        }
        out
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.letters.is_empty() {
            return Ok(());
        }
        for (i, l) in self.letters.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            if l.exp == 1 {
                write!(f, "{}", l.gen)?;
            } else {
                write!(f, "{}^{}", l.gen, l.exp)?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.letters.is_empty() {
            write!(f, "ε")
        } else {
            write!(f, "{self}")
        }
    }
}

/// Prints a word for reports, rendering the identity visibly.
pub fn display_word(w: &Word) -> String {
    if w.is_empty() {
        "ε".to_string()
    } else {
        w.to_string()
    }
}

/// A word considered up to cyclic rotation.
///
/// The core is cyclically reduced; the marker remembers a preferred rotation
/// for printing. Equality compares cores up to rotation and ignores markers.
#[derive(Clone, Debug)]
pub struct CyclicWord {
    core: Word,
    marker: usize,
}

impl CyclicWord {
    pub fn new(w: &Word) -> Self {
        let (_, core) = w.cyclically_reduce();
        CyclicWord { core, marker: 0 }
    }

    pub fn core(&self) -> &Word {
        &self.core
    }

    pub fn marker(&self) -> usize {
        self.marker
    }

    /// Moves the marker forward by `k` unit letters.
    pub fn rotated(&self, k: usize) -> Self {
        let n = self.core.letter_len().max(1) as usize;
        CyclicWord {
            core: self.core.clone(),
            marker: (self.marker + k) % n,
        }
    }
}

impl PartialEq for CyclicWord {
    fn eq(&self, other: &Self) -> bool {
        let a = self.core.unit_letters();
        let b = other.core.unit_letters();
        if a.len() != b.len() {
            return false;
        }
        if a.is_empty() {
            return true;
        }
        (0..a.len()).any(|k| (0..a.len()).all(|i| a[(i + k) % a.len()] == b[i]))
    }
}

impl Eq for CyclicWord {}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(name: &str) -> GeneratorId {
        GeneratorId::new(name, "test").unwrap()
    }

    fn w(pairs: &[(&str, i64)]) -> Word {
        Word::from_letters(pairs.iter().map(|(n, e)| Letter::new(g(n), *e))).unwrap()
    }

    #[test]
    fn rejects_bad_names() {
        assert!(GeneratorId::new("", "s").is_err());
        assert!(GeneratorId::new("1a", "s").is_err());
        assert!(GeneratorId::new("a b", "s").is_err());
        assert!(GeneratorId::new("a_1", "s").is_ok());
    }

    #[test]
    fn cancellation_cascades() {
        // x y y^-1 x^-1 collapses completely.
        let v = w(&[("x", 1), ("y", 1), ("y", -1), ("x", -1)]);
        assert!(v.is_empty());
    }

    #[test]
    fn runs_merge() {
        let v = w(&[("c", 2), ("c", 3), ("b", 1)]);
        assert_eq!(v.run_len(), 2);
        assert_eq!(v.letter_len(), 6);
        assert_eq!(v.to_string(), "c^5 b");
    }

    #[test]
    fn inverse_concat_is_trivial() {
        let v = w(&[("a", 2), ("b", -1), ("c", 3)]);
        assert!(v.concat(&v.inverse()).unwrap().is_empty());
        assert!(v.inverse().concat(&v).unwrap().is_empty());
    }

    #[test]
    fn pow_matches_repeated_concat() {
        let v = w(&[("a", 1), ("b", 1)]);
        let sq = v.concat(&v).unwrap();
        assert_eq!(v.pow(2).unwrap(), sq);
        assert_eq!(v.pow(-1).unwrap(), v.inverse());
        assert!(v.pow(0).unwrap().is_empty());
    }

    #[test]
    fn substitution_example() {
        // s^-1 a s a^-2 under a -> a^2, s -> s gives s^-1 a^2 s a^-4.
        let v = w(&[("s", -1), ("a", 1), ("s", 1), ("a", -2)]);
        let a_img = w(&[("a", 2)]);
        let s_img = w(&[("s", 1)]);
        let out = v
            .substitute(|gen| match gen.name() {
                "a" => Some(&a_img),
                "s" => Some(&s_img),
                _ => None,
            })
            .unwrap();
        assert_eq!(out, w(&[("s", -1), ("a", 2), ("s", 1), ("a", -4)]));
    }

    #[test]
    fn substitution_reports_missing_images() {
        let v = w(&[("a", 1)]);
        let err = v.substitute(|_| None).unwrap_err();
        assert!(matches!(err, WordError::UnmappedGenerator(_)));
    }

    #[test]
    fn commutator_expansion() {
        let a = w(&[("s", 1), ("a", 2), ("s", -1)]);
        let b = w(&[("b", 1)]);
        let comm = Word::commutator(&a, &b).unwrap();
        assert_eq!(
            comm,
            w(&[
                ("s", 1),
                ("a", 2),
                ("s", -1),
                ("b", 1),
                ("s", 1),
                ("a", -2),
                ("s", -1),
                ("b", -1)
            ])
        );
    }

    #[test]
    fn cyclic_reduction_peels_conjugators() {
        // b a c b^-1 reduces to core a c with conjugator b.
        let v = w(&[("b", 1), ("a", 1), ("c", 1), ("b", -1)]);
        let (conj, core) = v.cyclically_reduce();
        assert_eq!(conj, w(&[("b", 1)]));
        assert_eq!(core, w(&[("a", 1), ("c", 1)]));
        let back = core.conjugate_by(&conj).unwrap();
        assert_eq!(back, v);
    }

    #[test]
    fn same_sign_ends_are_already_cyclically_reduced() {
        let v = w(&[("b", 2), ("a", 1), ("b", 1)]);
        assert!(v.is_cyclically_reduced());
    }

    #[test]
    fn cyclic_words_compare_up_to_rotation() {
        let u = CyclicWord::new(&w(&[("a", 1), ("b", 1), ("c", 1)]));
        let v = CyclicWord::new(&w(&[("c", 1), ("a", 1), ("b", 1)]));
        let x = CyclicWord::new(&w(&[("b", 1), ("a", 1), ("c", 1)]));
        assert_eq!(u, v);
        assert_ne!(u, x);
        assert_eq!(u, u.rotated(2));
    }

    #[test]
    fn oversized_powers_error_out() {
        let v = w(&[("a", 1), ("b", 1)]);
        assert!(matches!(v.pow(i64::MAX / 4), Err(WordError::WordTooLarge)));
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        fn arb_letter() -> impl Strategy<Value = Letter> {
            ("[abcd]", -4i64..=4)
                .prop_filter("nonzero", |(_, e)| *e != 0)
                .prop_map(|(n, e)| Letter::new(g(&n), e))
        }

        fn arb_word() -> impl Strategy<Value = Word> {
            proptest::collection::vec(arb_letter(), 0..24)
                .prop_map(|ls| Word::from_letters(ls).unwrap())
        }

        proptest! {
            #[test]
            fn canonicalization_is_idempotent(v in arb_word()) {
                let again = Word::from_letters(v.letters().to_vec()).unwrap();
                prop_assert_eq!(again, v);
            }

            #[test]
            fn no_adjacent_runs_share_generator(v in arb_word()) {
                for pair in v.letters().windows(2) {
                    prop_assert_ne!(&pair[0].gen, &pair[1].gen);
                    prop_assert_ne!(pair[0].exp, 0);
                }
            }

            #[test]
            fn inverse_is_involutive(v in arb_word()) {
                prop_assert_eq!(v.inverse().inverse(), v);
            }

            #[test]
            fn word_times_inverse_vanishes(v in arb_word()) {
                prop_assert!(v.concat(&v.inverse()).unwrap().is_empty());
            }

            #[test]
            fn cyclic_reduction_round_trips(v in arb_word()) {
                let (conj, core) = v.cyclically_reduce();
                prop_assert!(core.is_cyclically_reduced());
                prop_assert_eq!(core.conjugate_by(&conj).unwrap(), v);
            }
        }
    }
}
