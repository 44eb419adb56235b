//! Braid words on two and three strands and the entangling-pattern checks.
//!
//! Pairwise braids live in `B₂ ≅ Z`, so a pair is tracked by its exponent sum.
//! Triplet braids are tracked by their reduced Burau image, which is a
//! faithful representation of `B₃`: two words are the same braid exactly when
//! their matrices agree.
//!
//! A team of robots stays untangled while every pair avoids `σ₁²`/`σ₁⁻²` and
//! every triplet avoids the four words `σ_f^c σ_g^{-c} σ_f^c` (`f ≠ g`), at
//! every prefix of its history.

mod laurent;
mod table;

use std::fmt;
use std::hash::{Hash, Hasher};
use std::str::FromStr;
use std::sync::{Arc, OnceLock};

use rustc_hash::FxHasher;
use thiserror::Error;

pub use laurent::{LaurentMatrix, LaurentPoly};
pub use table::{BraidTable, Subset, Violation};
pub(crate) use table::{sorted3, SwapLetters};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BraidError {
    #[error("generator σ{index} is not valid on {strands} strands")]
    BadGenerator { index: u8, strands: usize },
    #[error("a braid word needs at least 2 strands, got {0}")]
    TooFewStrands(usize),
    #[error("sign must be +1 or -1, got {0}")]
    BadSign(i32),
    #[error("cannot update a state that is already entangled")]
    AlreadyViolated,
    #[error("cannot parse braid letter {0:?}")]
    Parse(String),
}

/// One crossing: `σ_i` (overpass by the `i`-th strand from the left) or `σ_i⁻¹`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ElementaryBraid {
    index: u8,
    inverse: bool,
}

impl ElementaryBraid {
    /// `index` is 1-based; `sign` is `+1` or `-1`.
    pub fn new(index: u8, sign: i32) -> Result<Self, BraidError> {
        if index == 0 {
            return Err(BraidError::BadGenerator { index, strands: 0 });
        }
        match sign {
            1 => Ok(Self { index, inverse: false }),
            -1 => Ok(Self { index, inverse: true }),
            s => Err(BraidError::BadSign(s)),
        }
    }

    pub fn sigma(index: u8) -> Self {
        assert!(index > 0, "generators are 1-based");
        Self { index, inverse: false }
    }

    pub fn sigma_inv(index: u8) -> Self {
        assert!(index > 0, "generators are 1-based");
        Self { index, inverse: true }
    }

    pub fn index(self) -> u8 {
        self.index
    }

    pub fn sign(self) -> i32 {
        if self.inverse { -1 } else { 1 }
    }

    pub fn is_inverse(self) -> bool {
        self.inverse
    }

    pub fn inverse(self) -> Self {
        Self { index: self.index, inverse: !self.inverse }
    }

    /// Right-multiply `m` by the reduced Burau image of this letter
    /// (`σ₁ ↦ [[-t, 1], [0, 1]]`, `σ₂ ↦ [[1, 0], [t, -t]]`).
    fn burau_right_mul(self, m: &LaurentMatrix) -> LaurentMatrix {
        let [[a, b], [c, d]] = &m.entries;
        match (self.index, self.inverse) {
            (1, false) => LaurentMatrix::new(a.shifted(1, true), a + b, c.shifted(1, true), c + d),
            (1, true) => LaurentMatrix::new(
                a.shifted(-1, true),
                &a.shifted(-1, false) + b,
                c.shifted(-1, true),
                &c.shifted(-1, false) + d,
            ),
            (2, false) => LaurentMatrix::new(
                a + &b.shifted(1, false),
                b.shifted(1, true),
                c + &d.shifted(1, false),
                d.shifted(1, true),
            ),
            (2, true) => LaurentMatrix::new(a + b, b.shifted(-1, true), c + d, d.shifted(-1, true)),
            _ => panic!("Burau images are only defined for σ₁, σ₂"),
        }
    }

    /// Burau image of this single letter; only `σ₁^{±1}` and `σ₂^{±1}` exist in `B₃`.
    pub fn burau_matrix(self) -> LaurentMatrix {
        self.burau_right_mul(&LaurentMatrix::identity())
    }
}

impl fmt::Display for ElementaryBraid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", if self.inverse { 'S' } else { 's' }, self.index)
    }
}

impl FromStr for ElementaryBraid {
    type Err = BraidError;
    fn from_str(s: &str) -> Result<Self, BraidError> {
        let err = || BraidError::Parse(s.to_string());
        let mut chars = s.chars();
        let inverse = match chars.next() {
            Some('s') => false,
            Some('S') => true,
            _ => return Err(err()),
        };
        let index: u8 = chars.as_str().parse().map_err(|_| err())?;
        if index == 0 {
            return Err(err());
        }
        Ok(Self { index, inverse })
    }
}

/// A word `τ₁τ₂…τ_q` on a fixed number of strands; empty means the identity.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BraidWord {
    strands: usize,
    letters: Vec<ElementaryBraid>,
}

impl BraidWord {
    pub fn identity(strands: usize) -> Result<Self, BraidError> {
        if strands < 2 {
            return Err(BraidError::TooFewStrands(strands));
        }
        Ok(Self { strands, letters: Vec::new() })
    }

    pub fn from_letters(
        strands: usize,
        letters: impl IntoIterator<Item = ElementaryBraid>,
    ) -> Result<Self, BraidError> {
        let mut w = Self::identity(strands)?;
        for l in letters {
            w.push(l)?;
        }
        Ok(w)
    }

    /// Parses the compact text form (`"s1 S2 s1"`, identity is `"e"`).
    pub fn parse(strands: usize, text: &str) -> Result<Self, BraidError> {
        let text = text.trim();
        if text == "e" || text.is_empty() {
            return Self::identity(strands);
        }
        let letters = text.split_whitespace().map(str::parse).collect::<Result<Vec<_>, _>>()?;
        Self::from_letters(strands, letters)
    }

    pub fn push(&mut self, letter: ElementaryBraid) -> Result<(), BraidError> {
        if usize::from(letter.index) >= self.strands {
            return Err(BraidError::BadGenerator { index: letter.index, strands: self.strands });
        }
        self.letters.push(letter);
        Ok(())
    }

    pub fn strands(&self) -> usize {
        self.strands
    }

    pub fn letters(&self) -> &[ElementaryBraid] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn exponent_sum(&self) -> i64 {
        self.letters.iter().map(|l| i64::from(l.sign())).sum()
    }

    /// The group inverse: letters reversed and each inverted.
    pub fn inverse(&self) -> Self {
        Self {
            strands: self.strands,
            letters: self.letters.iter().rev().map(|l| l.inverse()).collect(),
        }
    }

    pub fn concat(&self, other: &Self) -> Result<Self, BraidError> {
        if self.strands != other.strands {
            return Err(BraidError::TooFewStrands(other.strands.min(self.strands)));
        }
        let mut letters = self.letters.clone();
        letters.extend_from_slice(&other.letters);
        Ok(Self { strands: self.strands, letters })
    }

    /// Cancels adjacent inverse pairs until none remain.
    pub fn free_reduce(&self) -> Self {
        let mut out: Vec<ElementaryBraid> = Vec::with_capacity(self.letters.len());
        for &l in &self.letters {
            if out.last() == Some(&l.inverse()) {
                out.pop();
            } else {
                out.push(l);
            }
        }
        Self { strands: self.strands, letters: out }
    }

    /// Product of the reduced Burau images in word order. Three strands only.
    pub fn burau(&self) -> LaurentMatrix {
        assert_eq!(self.strands, 3, "the Burau oracle is defined for B₃");
        self.letters.iter().fold(LaurentMatrix::identity(), |m, l| l.burau_right_mul(&m))
    }
}

impl fmt::Display for BraidWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.letters.is_empty() {
            return write!(f, "e");
        }
        for (i, l) in self.letters.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

/// Free reduction as a standalone function.
pub fn free_reduce(word: &BraidWord) -> BraidWord {
    word.free_reduce()
}

/// Reduced Burau image of a 3-strand word.
pub fn burau(word: &BraidWord) -> LaurentMatrix {
    word.burau()
}

/// The entangling 3-braid words `σ_f^c σ_g^{-c} σ_f^c`, `c = ±1`, `f ≠ g`.
pub fn forbidden_words() -> [BraidWord; 4] {
    let w = |f: u8, g: u8, c: i32| {
        let a = ElementaryBraid::new(f, c).unwrap();
        let b = ElementaryBraid::new(g, -c).unwrap();
        BraidWord::from_letters(3, [a, b, a]).unwrap()
    };
    [w(1, 2, 1), w(2, 1, 1), w(1, 2, -1), w(2, 1, -1)]
}

fn forbidden_matrices() -> &'static [LaurentMatrix; 4] {
    static CELL: OnceLock<[LaurentMatrix; 4]> = OnceLock::new();
    CELL.get_or_init(|| forbidden_words().map(|w| w.burau()))
}

/// Whether a 3-strand word is equivalent to one of the entangling patterns.
pub fn is_forbidden3(word: &BraidWord) -> bool {
    is_forbidden_matrix(&word.burau())
}

fn is_forbidden_matrix(m: &LaurentMatrix) -> bool {
    forbidden_matrices().iter().any(|f| f == m)
}

/// Running state of a pairwise braid.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub struct Braid2State {
    pub exponent_sum: i32,
    pub violated: bool,
}

impl Braid2State {
    pub fn identity() -> Self {
        Self::default()
    }

    /// Appends one crossing. Returns the new state and whether the pair is
    /// still untangled (`|sum| ≤ 1`).
    pub fn update(self, tau: ElementaryBraid) -> Result<(Self, bool), BraidError> {
        if tau.index != 1 {
            return Err(BraidError::BadGenerator { index: tau.index, strands: 2 });
        }
        if self.violated {
            return Err(BraidError::AlreadyViolated);
        }
        let exponent_sum = self.exponent_sum + tau.sign();
        let valid = exponent_sum.abs() <= 1;
        Ok((Self { exponent_sum, violated: !valid }, valid))
    }

    /// Representative word: `e`, `s1` or `S1` (or longer when violated).
    pub fn word(&self) -> BraidWord {
        let letter = if self.exponent_sum >= 0 {
            ElementaryBraid::sigma(1)
        } else {
            ElementaryBraid::sigma_inv(1)
        };
        BraidWord::from_letters(2, std::iter::repeat_n(letter, self.exponent_sum.unsigned_abs() as usize))
            .unwrap()
    }

    pub(crate) fn fingerprint(&self) -> u64 {
        let mut h = FxHasher::default();
        self.hash(&mut h);
        h.finish()
    }
}

/// A freely reduced word stored as a shared stack, so that extending a state
/// never copies the letters of its parent.
#[derive(Debug)]
struct WordNode {
    letter: ElementaryBraid,
    len: usize,
    prev: Option<Arc<WordNode>>,
}

impl Drop for WordNode {
    // unlink iteratively: a long chain would otherwise drop recursively
    fn drop(&mut self) {
        let mut prev = self.prev.take();
        while let Some(node) = prev {
            match Arc::try_unwrap(node) {
                Ok(mut inner) => prev = inner.prev.take(),
                Err(_) => break,
            }
        }
    }
}

#[derive(Clone, Debug, Default)]
struct WordTrail(Option<Arc<WordNode>>);

impl WordTrail {
    fn len(&self) -> usize {
        self.0.as_ref().map_or(0, |n| n.len)
    }

    /// Appends `tau`, cancelling it against the last letter when they are inverse.
    fn push_reduced(&self, tau: ElementaryBraid) -> Self {
        match &self.0 {
            Some(top) if top.letter == tau.inverse() => Self(top.prev.clone()),
            _ => Self(Some(Arc::new(WordNode { letter: tau, len: self.len() + 1, prev: self.0.clone() }))),
        }
    }

    fn to_word(&self) -> BraidWord {
        let mut letters = Vec::with_capacity(self.len());
        let mut at = &self.0;
        while let Some(node) = at {
            letters.push(node.letter);
            at = &node.prev;
        }
        letters.reverse();
        BraidWord { strands: 3, letters }
    }
}

/// Reduced Burau image at `t = -1` (an integer matrix) with the exponent
/// sum. The pair is faithful on `B₃`: the kernel of the specialization is
/// generated by the full twist squared, whose exponent sum is 12.
///
/// Entries are tracked with wrapping arithmetic so hashing stays consistent;
/// `exact` says they never overflowed and may be compared as integers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub(crate) struct Sl2Key {
    m: [i64; 4],
    exp: i32,
    exact: bool,
}

impl Default for Sl2Key {
    fn default() -> Self {
        Self::IDENTITY
    }
}

impl Sl2Key {
    pub(crate) const IDENTITY: Self = Self { m: [1, 0, 0, 1], exp: 0, exact: true };

    /// Right-multiply by the image of `tau`: `σ₁ ↦ [[1, 1], [0, 1]]`,
    /// `σ₂ ↦ [[1, 0], [-1, 1]]`.
    pub(crate) fn mul(self, tau: ElementaryBraid) -> Self {
        let [a, b, c, d] = self.m.map(i128::from);
        let s = i128::from(tau.sign());
        // columns (a, c), (b, d): σ₁ adds s × first to second, σ₂ takes s ×
        // second from first
        let wide = if tau.index == 1 { [a, b + s * a, c, d + s * c] } else { [a - s * b, b, c - s * d, d] };
        let exact = wide.iter().all(|&v| i64::try_from(v).is_ok());
        let m = wide.map(|v| v as i64);
        Self { m, exp: self.exp + tau.sign(), exact: self.exact && exact }
    }

    fn of_word(word: &BraidWord) -> Self {
        word.letters.iter().fold(Self::IDENTITY, |k, &l| k.mul(l))
    }

    pub(crate) fn exact(&self) -> bool {
        self.exact
    }

    /// Whether an exact key is one of the entangling braids.
    pub(crate) fn is_forbidden(&self) -> bool {
        debug_assert!(self.exact);
        forbidden_keys().iter().any(|f| f.m == self.m && f.exp == self.exp)
    }

    fn hash_value(&self, violated: bool) -> u64 {
        let mut h = FxHasher::default();
        self.m.hash(&mut h);
        self.exp.hash(&mut h);
        violated.hash(&mut h);
        h.finish()
    }
}

fn forbidden_keys() -> &'static [Sl2Key; 4] {
    static CELL: OnceLock<[Sl2Key; 4]> = OnceLock::new();
    CELL.get_or_init(|| forbidden_words().map(|w| Sl2Key::of_word(&w)))
}

/// Running state of a triplet braid: freely reduced word plus its Burau image.
///
/// The Burau matrix is the canonical form; it is built from the word on
/// first use. Updates, equality and hashing go through an integer
/// specialization that identifies exactly the same braids, falling back to
/// the matrix if its entries ever overflow.
#[derive(Clone, Debug)]
pub struct Braid3State {
    reduced_word: WordTrail,
    key: Sl2Key,
    matrix: OnceLock<Box<LaurentMatrix>>,
    violated: bool,
    fingerprint: u64,
}

impl Braid3State {
    pub fn identity() -> Self {
        Self::from_parts(WordTrail::default(), Sl2Key::IDENTITY, false)
    }

    fn from_parts(reduced_word: WordTrail, key: Sl2Key, violated: bool) -> Self {
        let fingerprint = key.hash_value(violated);
        Self { reduced_word, key, matrix: OnceLock::new(), violated, fingerprint }
    }

    /// State of a word folded from the identity without prefix checks.
    pub fn from_word(word: &BraidWord) -> Result<Self, BraidError> {
        if word.strands() != 3 {
            return Err(BraidError::TooFewStrands(word.strands()));
        }
        let trail = word.letters.iter().fold(WordTrail::default(), |t, &l| t.push_reduced(l));
        let state = Self::from_parts(trail, Sl2Key::of_word(word), false);
        let violated = state.is_forbidden();
        Ok(Self { violated, fingerprint: state.key.hash_value(violated), ..state })
    }

    pub fn reduced_word(&self) -> BraidWord {
        self.reduced_word.to_word()
    }

    /// The reduced Burau image, the canonical form of the braid.
    pub fn matrix(&self) -> &LaurentMatrix {
        self.matrix.get_or_init(|| Box::new(self.reduced_word().burau()))
    }

    pub fn violated(&self) -> bool {
        self.violated
    }

    pub(crate) fn fingerprint(&self) -> u64 {
        self.fingerprint
    }

    pub(crate) fn key(&self) -> Sl2Key {
        self.key
    }

    fn is_forbidden(&self) -> bool {
        if self.key.exact {
            self.key.is_forbidden()
        } else {
            is_forbidden_matrix(self.matrix())
        }
    }

    /// Whether appending `tau` keeps the braid untangled, and the
    /// fingerprint of the result, without building it. `None` when only the
    /// full update can tell.
    pub(crate) fn peek(&self, tau: ElementaryBraid) -> Option<(bool, u64)> {
        let key = self.key.mul(tau);
        if self.violated || !key.exact {
            return None;
        }
        let bad = key.is_forbidden();
        Some((!bad, key.hash_value(bad)))
    }

    /// Whether `self` with `ta` appended equals `other` with `tb` appended.
    /// A letter that entangles its state makes the answer `false`.
    pub(crate) fn equals_with(&self, ta: Option<ElementaryBraid>, other: &Self, tb: Option<ElementaryBraid>) -> bool {
        if ta.is_none() && tb.is_none() {
            return self == other;
        }
        let ka = ta.map_or(self.key, |l| self.key.mul(l));
        let kb = tb.map_or(other.key, |l| other.key.mul(l));
        if ka.exact && kb.exact && !self.violated && !other.violated {
            return ka == kb && !ka.is_forbidden();
        }
        let after = |s: &Self, t: Option<ElementaryBraid>| match t {
            None => Some(s.clone()),
            Some(l) => s.update(l).ok().filter(|r| r.1).map(|r| r.0),
        };
        matches!((after(self, ta), after(other, tb)), (Some(x), Some(y)) if x == y)
    }

    /// Appends one crossing. Returns the new state and whether it avoids all
    /// four entangling patterns.
    pub fn update(&self, tau: ElementaryBraid) -> Result<(Self, bool), BraidError> {
        if !(1..=2).contains(&tau.index) {
            return Err(BraidError::BadGenerator { index: tau.index, strands: 3 });
        }
        if self.violated {
            return Err(BraidError::AlreadyViolated);
        }
        let state = Self::from_parts(self.reduced_word.push_reduced(tau), self.key.mul(tau), false);
        if state.is_forbidden() {
            let fingerprint = state.key.hash_value(true);
            return Ok((Self { violated: true, fingerprint, ..state }, false));
        }
        Ok((state, true))
    }
}

impl PartialEq for Braid3State {
    fn eq(&self, other: &Self) -> bool {
        if self.fingerprint != other.fingerprint || self.violated != other.violated {
            return false;
        }
        if self.key.exact && other.key.exact {
            self.key.m == other.key.m && self.key.exp == other.key.exp
        } else {
            self.matrix() == other.matrix()
        }
    }
}

impl Eq for Braid3State {}

impl Hash for Braid3State {
    fn hash<H: Hasher>(&self, state: &mut H) {
        state.write_u64(self.fingerprint);
    }
}

/// `updateCheck2Braid`
pub fn update_check_2braid(
    state: Braid2State,
    tau: ElementaryBraid,
) -> Result<(Braid2State, bool), BraidError> {
    state.update(tau)
}

/// `updateCheck3Braid`
pub fn update_check_3braid(
    state: &Braid3State,
    tau: ElementaryBraid,
) -> Result<(Braid3State, bool), BraidError> {
    state.update(tau)
}
