//! Dialogue text to fixed-length byte sequences.
//!
//! The pipeline is: half-width to full-width normalization, stop-word
//! deletion, restriction to a 20964-character alphabet, reduction of each
//! alphabet ordinal modulo 256, then truncation / zero padding to
//! [`SEQUENCE_LEN`] codes.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::ops::RangeInclusive;

use num_traits::Float;

use crate::error::{Error, Result};
use crate::label::EmotionLabel;
use crate::rng::Prng;

/// Number of byte codes in an encoded dialogue.
pub const SEQUENCE_LEN: usize = 144;

/// Offset between an ASCII letter/digit and its full-width form.
const FULL_WIDTH_OFFSET: u32 = 0xFEE0;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawDialogue {
    pub text: String,
    pub label: Option<EmotionLabel>,
}

impl RawDialogue {
    pub fn new(text: impl Into<String>, label: Option<EmotionLabel>) -> Self {
        RawDialogue {
            text: text.into(),
            label,
        }
    }
}

/// An encoded dialogue: exactly [`SEQUENCE_LEN`] byte codes.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct ByteSequence([u8; SEQUENCE_LEN]);

impl core::fmt::Debug for ByteSequence {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "ByteSequence(")?;
        for b in &self.0 {
            write!(f, "{b:02x}")?;
        }
        write!(f, ")")
    }
}

impl Default for ByteSequence {
    fn default() -> Self {
        ByteSequence([0; SEQUENCE_LEN])
    }
}

impl ByteSequence {
    pub fn from_codes(codes: [u8; SEQUENCE_LEN]) -> Self {
        ByteSequence(codes)
    }

    pub fn codes(&self) -> &[u8; SEQUENCE_LEN] {
        &self.0
    }

    /// Network input values: each code divided by 255.
    pub fn scaled<T: crate::Scalar>(&self) -> impl Iterator<Item = T> + '_ {
        self.0
            .iter()
            .map(|&c| T::from_f64_lossy(f64::from(c) / 255.0))
    }
}

/// Ordered, duplicate-free set of non-empty stop words.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct StopWordList {
    entries: Vec<String>,
    // first char -> entries (as chars), longest first
    by_first: BTreeMap<char, Vec<Vec<char>>>,
    max_len: usize,
}

impl StopWordList {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Builds the list, dropping repeated entries. Empty entries are rejected.
    pub fn new<I, S>(entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut list = StopWordList::default();
        for entry in entries {
            let entry = entry.into();
            if entry.is_empty() {
                return Err(Error::invalid("stop word entries must be non-empty"));
            }
            if list.entries.contains(&entry) {
                continue;
            }
            let chars: Vec<char> = entry.chars().collect();
            list.max_len = list.max_len.max(chars.len());
            let bucket = list.by_first.entry(chars[0]).or_default();
            let at = bucket
                .iter()
                .position(|w| w.len() < chars.len())
                .unwrap_or(bucket.len());
            bucket.insert(at, chars);
            list.entries.push(entry);
        }
        Ok(list)
    }

    pub fn entries(&self) -> &[String] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Length (in chars) of the longest entry matching at `text[pos..]`.
    fn longest_match_at(&self, text: &[char], pos: usize) -> Option<usize> {
        let bucket = self.by_first.get(&text[pos])?;
        bucket
            .iter()
            .find(|w| text[pos..].starts_with(w))
            .map(|w| w.len())
    }
}

/// The character subset kept by the encoder, as ordered inclusive ranges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alphabet {
    ranges: Vec<RangeInclusive<char>>,
}

impl Default for Alphabet {
    fn default() -> Self {
        Self::standard()
    }
}

impl Alphabet {
    /// CJK unified ideographs U+4E00..U+9FA5, then full-width uppercase,
    /// lowercase and digits.
    pub fn standard() -> Self {
        Alphabet {
            ranges: alloc::vec![
                '\u{4E00}'..='\u{9FA5}',
                '\u{FF21}'..='\u{FF3A}',
                '\u{FF41}'..='\u{FF5A}',
                '\u{FF10}'..='\u{FF19}',
            ],
        }
    }

    pub fn ranges(&self) -> &[RangeInclusive<char>] {
        &self.ranges
    }

    pub fn len(&self) -> usize {
        self.ranges
            .iter()
            .map(|r| (*r.end() as usize) - (*r.start() as usize) + 1)
            .sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn contains(&self, ch: char) -> bool {
        self.ranges.iter().any(|r| r.contains(&ch))
    }

    /// Zero-based position of `ch` in the concatenated ranges.
    pub fn ordinal(&self, ch: char) -> Option<usize> {
        let mut base = 0;
        for r in &self.ranges {
            let (lo, hi) = (*r.start() as usize, *r.end() as usize);
            let c = ch as usize;
            if (lo..=hi).contains(&c) {
                return Some(base + c - lo);
            }
            base += hi - lo + 1;
        }
        None
    }

    /// Inverse of [`Alphabet::ordinal`].
    pub fn char_at(&self, ordinal: usize) -> Option<char> {
        let mut rest = ordinal;
        for r in &self.ranges {
            let (lo, hi) = (*r.start() as u32, *r.end() as u32);
            let size = (hi - lo + 1) as usize;
            if rest < size {
                return char::from_u32(lo + rest as u32);
            }
            rest -= size;
        }
        None
    }

    pub fn iter(&self) -> impl Iterator<Item = char> + '_ {
        self.ranges.iter().flat_map(|r| r.clone())
    }
}

/// What gets reduced modulo 256.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum ResampleBasis {
    /// Position in the truncated alphabet (0..20963).
    #[default]
    AlphabetOrdinal,
    /// Raw Unicode scalar value of the (alphabet member) character.
    CodePoint,
}

/// Replaces ASCII letters and digits with their full-width forms.
pub fn normalize_width(text: &str) -> String {
    text.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() {
                char::from_u32(c as u32 + FULL_WIDTH_OFFSET).unwrap_or(c)
            } else {
                c
            }
        })
        .collect()
}

/// Deletes the leftmost, longest stop-word occurrence until none remain.
pub fn remove_stop_words(text: &str, stops: &StopWordList) -> String {
    if stops.is_empty() {
        return String::from(text);
    }
    let mut chars: Vec<char> = text.chars().collect();
    let mut pos = 0;
    while pos < chars.len() {
        match stops.longest_match_at(&chars, pos) {
            Some(len) => {
                chars.drain(pos..pos + len);
                // A new match must overlap the splice point; nothing left of
                // this window can have changed.
                pos = pos.saturating_sub(stops.max_len - 1);
            }
            None => pos += 1,
        }
    }
    chars.into_iter().collect()
}

pub fn alphabet_ordinal(ch: char, alphabet: &Alphabet) -> Option<usize> {
    alphabet.ordinal(ch)
}

/// Reduces an alphabet ordinal to one byte.
pub fn remap(ordinal: usize) -> Result<u8> {
    let size = Alphabet::standard().len();
    if ordinal >= size {
        return Err(Error::invalid(alloc::format!(
            "ordinal {ordinal} outside alphabet of {size}"
        )));
    }
    Ok((ordinal % 256) as u8)
}

pub fn encode_dialogue(text: &str, stops: &StopWordList) -> ByteSequence {
    encode_dialogue_with(text, stops, &Alphabet::standard(), ResampleBasis::default())
}

pub fn encode_dialogue_with(
    text: &str,
    stops: &StopWordList,
    alphabet: &Alphabet,
    basis: ResampleBasis,
) -> ByteSequence {
    let cleaned = remove_stop_words(&normalize_width(text), stops);
    let mut codes = [0u8; SEQUENCE_LEN];
    let survivors = cleaned.chars().filter_map(|c| {
        alphabet.ordinal(c).map(|ord| match basis {
            ResampleBasis::AlphabetOrdinal => (ord % 256) as u8,
            ResampleBasis::CodePoint => (c as u32 % 256) as u8,
        })
    });
    for (slot, code) in codes.iter_mut().zip(survivors) {
        *slot = code;
    }
    ByteSequence(codes)
}

/// Deterministic shuffle, then split off `round(eval_fraction * n)` items
/// for evaluation. Returns `(train, eval)`.
pub fn split_dataset<T: Clone>(
    data: &[T],
    eval_fraction: f64,
    seed: u64,
) -> Result<(Vec<T>, Vec<T>)> {
    if !(eval_fraction > 0.0 && eval_fraction < 1.0) {
        return Err(Error::invalid(alloc::format!(
            "eval fraction {eval_fraction} outside (0, 1)"
        )));
    }
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut order: Vec<usize> = (0..data.len()).collect();
    Prng::new(seed).shuffle(&mut order);
    let n_eval = Float::round(eval_fraction * data.len() as f64) as usize;
    let (eval_idx, train_idx) = order.split_at(n_eval);
    let pick = |idx: &[usize]| idx.iter().map(|&i| data[i].clone()).collect::<Vec<_>>();
    Ok((pick(train_idx), pick(eval_idx)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;
    use alloc::vec;
    use proptest::prelude::*;

    fn stops(words: &[&str]) -> StopWordList {
        StopWordList::new(words.iter().copied()).unwrap()
    }

    #[test]
    fn width_normalization() {
        assert_eq!(normalize_width("A"), "\u{FF21}");
        assert_eq!(normalize_width("9"), "\u{FF19}");
        assert_eq!(normalize_width("z"), "\u{FF5A}");
        assert_eq!(normalize_width("你好世界"), "你好世界");
        assert_eq!(normalize_width("a!b"), "\u{FF41}!\u{FF42}");
    }

    #[test]
    fn stop_word_examples() {
        assert_eq!(remove_stop_words("ABCB", &stops(&["B"])), "AC");
        assert_eq!(
            remove_stop_words("任何文本", &StopWordList::empty()),
            "任何文本"
        );
        assert_eq!(remove_stop_words("的确", &stops(&["的确"])), "");
    }

    #[test]
    fn stop_words_prefer_longest_at_leftmost() {
        // "ab" and "abc" both match at 0; the longer one wins.
        assert_eq!(remove_stop_words("abcd", &stops(&["ab", "abc"])), "d");
        // Deletion can expose a new match spanning the splice.
        assert_eq!(remove_stop_words("aabb", &stops(&["ab"])), "");
        assert_eq!(remove_stop_words("xaabby", &stops(&["ab"])), "xy");
    }

    #[test]
    fn stop_word_list_rejects_empty_and_dedups() {
        assert!(StopWordList::new(["a", ""]).is_err());
        let l = stops(&["a", "b", "a"]);
        assert_eq!(l.entries(), &["a".to_string(), "b".to_string()]);
    }

    #[test]
    fn alphabet_size_and_ordinals() {
        let a = Alphabet::standard();
        assert_eq!(a.len(), 20964);
        assert_eq!(a.ordinal('\u{4E00}'), Some(0));
        assert_eq!(a.ordinal('\u{9FA5}'), Some(20901));
        assert_eq!(a.ordinal('\u{FF21}'), Some(20902));
        assert_eq!(a.ordinal('\u{FF41}'), Some(20928));
        assert_eq!(a.ordinal('\u{FF10}'), Some(20954));
        assert_eq!(a.ordinal('\u{FF19}'), Some(20963));
        assert_eq!(a.ordinal('A'), None);
        assert_eq!(a.ordinal('\u{9FA6}'), None);
    }

    #[test]
    fn alphabet_char_at_inverts_ordinal() {
        let a = Alphabet::standard();
        for (i, c) in a.iter().enumerate() {
            assert_eq!(a.ordinal(c), Some(i));
            assert_eq!(a.char_at(i), Some(c));
        }
        assert_eq!(a.char_at(20964), None);
    }

    #[test]
    fn remap_examples() {
        assert_eq!(remap(0).unwrap(), 0);
        assert_eq!(remap(256).unwrap(), 0);
        assert_eq!(remap(20963).unwrap(), 227);
        assert!(remap(20964).is_err());
    }

    #[test]
    fn encode_examples() {
        let none = StopWordList::empty();
        assert_eq!(encode_dialogue("", &none).codes(), &[0u8; SEQUENCE_LEN]);

        let mut expected = [0u8; SEQUENCE_LEN];
        expected[0] = 1;
        assert_eq!(encode_dialogue("\u{4E01}", &none).codes(), &expected);

        let a = Alphabet::standard();
        let long: String = (0..200).map(|i| a.char_at(i * 7).unwrap()).collect();
        let enc = encode_dialogue(&long, &none);
        for (i, &code) in enc.codes().iter().enumerate() {
            assert_eq!(code as usize, (i * 7) % 256);
        }
    }

    #[test]
    fn encode_drops_non_members_and_normalizes() {
        let none = StopWordList::empty();
        // '!' dropped; 'A' becomes U+FF21 (ordinal 20902 -> 166).
        let enc = encode_dialogue("!A", &none);
        assert_eq!(enc.codes()[0], (20902 % 256) as u8);
        assert_eq!(enc.codes()[1], 0);
    }

    #[test]
    fn encode_code_point_basis() {
        let enc = encode_dialogue_with(
            "\u{4E01}",
            &StopWordList::empty(),
            &Alphabet::standard(),
            ResampleBasis::CodePoint,
        );
        assert_eq!(enc.codes()[0], (0x4E01 % 256) as u8);
    }

    #[test]
    fn split_examples() {
        let data: Vec<u32> = (0..10).collect();
        let (train, eval) = split_dataset(&data, 0.2, 5).unwrap();
        assert_eq!((train.len(), eval.len()), (8, 2));
        let mut all = [train.clone(), eval.clone()].concat();
        all.sort_unstable();
        assert_eq!(all, data);
        assert_eq!(split_dataset(&data, 0.2, 5).unwrap(), (train, eval));
        assert!(split_dataset(&data, 0.0, 5).is_err());
        assert!(split_dataset(&data, 1.0, 5).is_err());
        assert!(split_dataset::<u32>(&[], 0.5, 5).is_err());
    }

    proptest! {
        #[test]
        fn encoded_length_is_fixed(s in "\\PC{0,400}") {
            let enc = encode_dialogue(&s, &StopWordList::empty());
            prop_assert_eq!(enc.codes().len(), SEQUENCE_LEN);
            prop_assert_eq!(enc, encode_dialogue(&s, &StopWordList::empty()));
        }

        #[test]
        fn single_char_stop_removal_idempotent(
            s in "[abc的了是]{0,40}",
            words in proptest::sample::subsequence(vec!["a", "b", "的", "了"], 0..4),
        ) {
            let list = StopWordList::new(words).unwrap();
            let once = remove_stop_words(&s, &list);
            prop_assert_eq!(remove_stop_words(&once, &list), once.clone());
        }

        #[test]
        fn stop_removal_leaves_no_occurrence(s in "[abx]{0,30}") {
            let list = stops(&["ab", "ba", "x"]);
            let out = remove_stop_words(&s, &list);
            prop_assert!(!out.contains("ab") && !out.contains("ba") && !out.contains('x'));
        }
    }
}
