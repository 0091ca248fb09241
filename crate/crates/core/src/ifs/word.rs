use std::fmt;

use smallvec::SmallVec;

use crate::error::{Error, Result};

/// A finite address over an alphabet of at most 256 letters. Letters are
/// stored 0-based; the text form is 1-based. Ordering is lexicographic with
/// a prefix sorting before its extensions, so the descendants of a word in a
/// sorted antichain are contiguous.
#[derive(Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Word(SmallVec<[u8; 23]>);

impl Word {
    pub fn empty() -> Self {
        Word(SmallVec::new())
    }

    pub fn from_letters(letters: &[u8]) -> Self {
        Word(SmallVec::from_slice(letters))
    }

    pub fn letters(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn push(&mut self, letter: u8) {
        self.0.push(letter);
    }

    pub fn pop(&mut self) -> Option<u8> {
        self.0.pop()
    }

    pub fn child(&self, letter: u8) -> Word {
        let mut w = self.clone();
        w.push(letter);
        w
    }

    /// Drops the last letter; the empty word is its own parent.
    pub fn parent(&self) -> Word {
        let mut w = self.clone();
        w.0.pop();
        w
    }

    pub fn truncate(&self, len: usize) -> Word {
        Word::from_letters(&self.0[..len.min(self.len())])
    }

    pub fn is_prefix_of(&self, other: &Word) -> bool {
        other.0.starts_with(&self.0)
    }

    /// Whether either word is a prefix of the other.
    pub fn comparable(&self, other: &Word) -> bool {
        self.is_prefix_of(other) || other.is_prefix_of(self)
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut w = self.clone();
        w.0.extend_from_slice(&other.0);
        w
    }

    /// Text form for an alphabet of `alphabet` letters: concatenated digits
    /// when the alphabet fits in `1..=9`, dot-separated numbers otherwise.
    pub fn display(&self, alphabet: usize) -> WordDisplay<'_> {
        WordDisplay { word: self, alphabet }
    }

    pub fn parse(s: &str, alphabet: usize) -> Result<Word> {
        let s = s.trim();
        if s.is_empty() {
            return Ok(Word::empty());
        }
        let bad = || Error::Parse(format!("bad word {s:?} over {alphabet} letters"));
        let mut w = Word::empty();
        let push = |w: &mut Word, v: usize| -> Result<()> {
            if v == 0 || v > alphabet || v > 256 {
                return Err(bad());
            }
            w.push((v - 1) as u8);
            Ok(())
        };
        if alphabet <= 9 && !s.contains('.') {
            for ch in s.chars() {
                push(&mut w, ch.to_digit(10).ok_or_else(bad)? as usize)?;
            }
        } else {
            for part in s.split('.') {
                push(&mut w, part.parse().map_err(|_| bad())?)?;
            }
        }
        Ok(w)
    }
}

/// Longest common prefix.
pub fn wedge(a: &Word, b: &Word) -> Word {
    let n = a.0.iter().zip(&b.0).take_while(|(x, y)| x == y).count();
    a.truncate(n)
}

pub struct WordDisplay<'a> {
    word: &'a Word,
    alphabet: usize,
}

impl fmt::Display for WordDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.alphabet <= 9 {
            for &l in self.word.letters() {
                write!(f, "{}", l + 1)?;
            }
        } else {
            for (i, &l) in self.word.letters().iter().enumerate() {
                if i > 0 {
                    f.write_str(".")?;
                }
                write!(f, "{}", l as u32 + 1)?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Word({})", self.display(256))
    }
}
