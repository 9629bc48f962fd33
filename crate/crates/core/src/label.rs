//! Label spaces, binary label vectors and labeled corpora.
//!
//! Label `i` of a [`LabelSpace`] is bit `i` of every [`LabelVector`] aligned with it, so the
//! first declared label is the least significant bit. Configuration enumeration walks masks
//! in ascending order, which makes `(0,0), (1,0), (0,1), (1,1)` the order for two labels.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};

/// Largest label space accepted; exhaustive inference visits `2^MAX_LABELS` configurations.
pub const MAX_LABELS: usize = 20;

/// Plutchik's basic emotions in canonical order.
pub const PLUTCHIK_EMOTIONS: [&str; 8] = [
    "joy",
    "trust",
    "fear",
    "surprise",
    "sadness",
    "disgust",
    "anger",
    "anticipation",
];

/// Ordered set of unique label names.
#[derive(Clone, PartialEq, Eq)]
pub struct LabelSpace {
    names: Arc<[String]>,
}

impl LabelSpace {
    pub fn new<I, S>(names: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        if names.is_empty() {
            return Err(Error::EmptyLabelSpace);
        }
        if names.len() > MAX_LABELS {
            return Err(Error::EnumerationTooLarge {
                labels: names.len(),
                limit: MAX_LABELS,
            });
        }
        for (i, name) in names.iter().enumerate() {
            if name.is_empty() {
                return Err(Error::EmptyLabelName);
            }
            if names[..i].contains(name) {
                return Err(Error::DuplicateLabel(name.clone()));
            }
        }
        Ok(Self {
            names: names.into(),
        })
    }

    /// The eight Plutchik emotions.
    pub fn plutchik() -> Self {
        Self::new(PLUTCHIK_EMOTIONS).expect("static label set is valid")
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    /// Always false; a label space holds at least one label.
    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, index: usize) -> Option<&str> {
        self.names.get(index).map(String::as_str)
    }

    pub fn index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.index(name)
            .ok_or_else(|| Error::UnknownLabel(name.to_string()))
    }

    /// Number of configurations, `2^L`.
    pub fn configuration_count(&self) -> usize {
        1usize << self.len()
    }

    pub(crate) fn check_index(&self, index: usize) -> Result<()> {
        if index < self.len() {
            Ok(())
        } else {
            Err(Error::IndexOutOfRange {
                index,
                labels: self.len(),
            })
        }
    }

    pub(crate) fn check_vector(&self, v: &LabelVector) -> Result<()> {
        if v.len() == self.len() {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected: self.len(),
                got: v.len(),
            })
        }
    }

    pub(crate) fn check_same(&self, other: &LabelSpace) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::SpaceMismatch)
        }
    }
}

impl fmt::Debug for LabelSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.names.iter()).finish()
    }
}

/// Binary vector over a label space, packed into a bit mask.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct LabelVector {
    mask: u32,
    len: u8,
}

impl LabelVector {
    pub fn zeros(len: usize) -> Self {
        assert!(len <= MAX_LABELS, "label vector longer than {MAX_LABELS}");
        Self {
            mask: 0,
            len: len as u8,
        }
    }

    pub fn ones(len: usize) -> Self {
        Self::from_mask(((1u64 << len) - 1) as u32, len)
    }

    /// Builds a vector from a mask; bits at or above `len` are discarded.
    pub fn from_mask(mask: u32, len: usize) -> Self {
        assert!(len <= MAX_LABELS, "label vector longer than {MAX_LABELS}");
        let keep = ((1u64 << len) - 1) as u32;
        Self {
            mask: mask & keep,
            len: len as u8,
        }
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        let mut v = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            v.set(i, b);
        }
        v
    }

    /// Builds a vector from integer bits, rejecting anything other than 0 or 1.
    pub fn from_bits(bits: &[u8]) -> Result<Self> {
        if bits.len() > MAX_LABELS {
            return Err(Error::EnumerationTooLarge {
                labels: bits.len(),
                limit: MAX_LABELS,
            });
        }
        let mut v = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            match b {
                0 => {}
                1 => v.set(i, true),
                other => return Err(Error::InvalidBit(other as i64)),
            }
        }
        Ok(v)
    }

    pub fn len(&self) -> usize {
        self.len as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn mask(&self) -> u32 {
        self.mask
    }

    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len(), "label index {i} out of range");
        self.mask >> i & 1 == 1
    }

    pub fn set(&mut self, i: usize, value: bool) {
        assert!(i < self.len(), "label index {i} out of range");
        if value {
            self.mask |= 1 << i;
        } else {
            self.mask &= !(1 << i);
        }
    }

    /// Number of active labels.
    pub fn count_ones(&self) -> usize {
        self.mask.count_ones() as usize
    }

    pub fn bits(&self) -> Vec<u8> {
        self.iter().map(u8::from).collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len()).map(move |i| self.get(i))
    }

    /// Indices of active labels in ascending order.
    pub fn active(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len()).filter(move |&i| self.get(i))
    }

    /// Lexicographic comparison of the bit sequences in declared label order (0 < 1).
    pub fn lex_cmp(&self, other: &Self) -> Ordering {
        for i in 0..self.len().min(other.len()) {
            match self.get(i).cmp(&other.get(i)) {
                Ordering::Equal => continue,
                ord => return ord,
            }
        }
        self.len().cmp(&other.len())
    }

    /// Bitwise subset test: every active label of `self` is active in `other`.
    pub fn is_subset_of(&self, other: &Self) -> bool {
        self.mask & !other.mask == 0
    }
}

impl fmt::Debug for LabelVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, b) in self.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", u8::from(b))?;
        }
        write!(f, ")")
    }
}

/// Iterator over all `2^L` configurations in ascending mask order.
#[derive(Debug, Clone)]
pub struct Configurations {
    next: u64,
    end: u64,
    len: usize,
}

impl Iterator for Configurations {
    type Item = LabelVector;

    fn next(&mut self) -> Option<LabelVector> {
        if self.next >= self.end {
            return None;
        }
        let v = LabelVector::from_mask(self.next as u32, self.len);
        self.next += 1;
        Some(v)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let n = (self.end - self.next) as usize;
        (n, Some(n))
    }
}

impl ExactSizeIterator for Configurations {}

/// Enumerates every configuration of `space`, bit 0 being the first label.
pub fn enumerate_configurations(space: &LabelSpace) -> Configurations {
    configurations(space.len())
}

pub(crate) fn configurations(len: usize) -> Configurations {
    debug_assert!(len <= MAX_LABELS);
    Configurations {
        next: 0,
        end: 1u64 << len,
        len,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LabeledItem {
    pub id: String,
    pub labels: LabelVector,
}

impl Serialize for LabelVector {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_seq(self.iter().map(u8::from))
    }
}

/// Labeled corpus with unique ids, every vector aligned with one label space.
#[derive(Debug, Clone)]
pub struct LabeledDataset {
    space: LabelSpace,
    items: Vec<LabeledItem>,
    by_id: HashMap<String, usize>,
}

impl LabeledDataset {
    pub fn new(space: LabelSpace) -> Self {
        Self {
            space,
            items: Vec::new(),
            by_id: HashMap::new(),
        }
    }

    pub fn from_items<I>(space: LabelSpace, items: I) -> Result<Self>
    where
        I: IntoIterator<Item = (String, LabelVector)>,
    {
        let mut data = Self::new(space);
        for (id, labels) in items {
            data.push(id, labels)?;
        }
        Ok(data)
    }

    /// Builds a dataset with ids `"0"`, `"1"`, ... in iteration order.
    pub fn from_vectors<I>(space: LabelSpace, vectors: I) -> Result<Self>
    where
        I: IntoIterator<Item = LabelVector>,
    {
        Self::from_items(
            space,
            vectors
                .into_iter()
                .enumerate()
                .map(|(i, v)| (i.to_string(), v)),
        )
    }

    pub fn push(&mut self, id: impl Into<String>, labels: LabelVector) -> Result<()> {
        let id = id.into();
        self.space.check_vector(&labels)?;
        if self.by_id.contains_key(&id) {
            return Err(Error::DuplicateId(id));
        }
        self.by_id.insert(id.clone(), self.items.len());
        self.items.push(LabeledItem { id, labels });
        Ok(())
    }

    pub fn space(&self) -> &LabelSpace {
        &self.space
    }

    pub fn items(&self) -> &[LabeledItem] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&LabelVector> {
        self.by_id.get(id).map(|&i| &self.items[i].labels)
    }

    pub fn vectors(&self) -> impl Iterator<Item = &LabelVector> + '_ {
        self.items.iter().map(|item| &item.labels)
    }

    pub(crate) fn require_non_empty(&self) -> Result<()> {
        if self.items.is_empty() {
            Err(Error::EmptyDataset)
        } else {
            Ok(())
        }
    }
}

/// Marginal and pairwise co-occurrence counts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CooccurrenceCounts {
    pub n: usize,
    /// `marginals[i]`: items with label `i` active.
    pub marginals: Vec<usize>,
    /// `joint[i][j]`: items with both `i` and `j` active; the diagonal equals `marginals`.
    pub joint: Vec<Vec<usize>>,
}

impl CooccurrenceCounts {
    pub fn from_vectors<'a, I>(len: usize, vectors: I) -> Self
    where
        I: IntoIterator<Item = &'a LabelVector>,
    {
        let mut joint = vec![vec![0usize; len]; len];
        let mut n = 0;
        for v in vectors {
            debug_assert_eq!(v.len(), len);
            n += 1;
            let active: Vec<usize> = v.active().collect();
            for &i in &active {
                for &j in &active {
                    joint[i][j] += 1;
                }
            }
        }
        let marginals = (0..len).map(|i| joint[i][i]).collect();
        Self { n, marginals, joint }
    }
}

/// Counts label marginals and pairwise co-occurrences over a non-empty dataset.
pub fn cooccurrence_counts(data: &LabeledDataset) -> Result<CooccurrenceCounts> {
    data.require_non_empty()?;
    Ok(CooccurrenceCounts::from_vectors(
        data.space().len(),
        data.vectors(),
    ))
}

#[cfg(test)]
mod tests {
    use std::collections::HashSet;

    use super::*;

    fn v(bits: &[u8]) -> LabelVector {
        LabelVector::from_bits(bits).unwrap()
    }

    fn space(n: usize) -> LabelSpace {
        LabelSpace::new((0..n).map(|i| format!("l{i}"))).unwrap()
    }

    #[test]
    fn plutchik_order() {
        let s = LabelSpace::plutchik();
        assert_eq!(s.len(), 8);
        assert_eq!(s.index("joy"), Some(0));
        assert_eq!(s.index("anticipation"), Some(7));
        assert_eq!(s.name(4), Some("sadness"));
    }

    #[test]
    fn label_space_validation() {
        assert!(matches!(
            LabelSpace::new(Vec::<String>::new()),
            Err(Error::EmptyLabelSpace)
        ));
        assert!(matches!(
            LabelSpace::new(["a", "b", "a"]),
            Err(Error::DuplicateLabel(n)) if n == "a"
        ));
        assert!(matches!(LabelSpace::new(["a", ""]), Err(Error::EmptyLabelName)));
        assert!(LabelSpace::new((0..20).map(|i| i.to_string())).is_ok());
        assert!(matches!(
            LabelSpace::new((0..21).map(|i| i.to_string())),
            Err(Error::EnumerationTooLarge { labels: 21, .. })
        ));
    }

    #[test]
    fn enumerate_small_spaces() {
        let one: Vec<_> = enumerate_configurations(&space(1)).collect();
        assert_eq!(one, vec![v(&[0]), v(&[1])]);

        let two: Vec<_> = enumerate_configurations(&space(2)).collect();
        assert_eq!(two, vec![v(&[0, 0]), v(&[1, 0]), v(&[0, 1]), v(&[1, 1])]);

        assert_eq!(enumerate_configurations(&LabelSpace::plutchik()).len(), 256);
    }

    #[test]
    fn enumeration_has_no_duplicates() {
        for l in 1..=12 {
            let seen: HashSet<_> = enumerate_configurations(&space(l)).collect();
            assert_eq!(seen.len(), 1 << l);
        }
    }

    #[test]
    fn bits_reject_non_binary() {
        assert!(matches!(LabelVector::from_bits(&[0, 2]), Err(Error::InvalidBit(2))));
    }

    #[test]
    fn lexicographic_order_follows_declared_labels() {
        // (0,1) precedes (1,0): the first label decides.
        assert_eq!(v(&[0, 1]).lex_cmp(&v(&[1, 0])), Ordering::Less);
        assert_eq!(v(&[1, 1, 0]).lex_cmp(&v(&[1, 1, 0])), Ordering::Equal);
    }

    #[test]
    fn dataset_rejects_duplicates_and_misaligned_vectors() {
        let mut d = LabeledDataset::new(space(2));
        d.push("a", v(&[1, 0])).unwrap();
        assert!(matches!(d.push("a", v(&[0, 0])), Err(Error::DuplicateId(_))));
        assert!(matches!(
            d.push("b", v(&[0, 0, 1])),
            Err(Error::DimensionMismatch { expected: 2, got: 3 })
        ));
        assert_eq!(d.get("a"), Some(&v(&[1, 0])));
    }

    #[test]
    fn cooccurrence_by_hand() {
        let d = LabeledDataset::from_vectors(space(2), [v(&[1, 1]), v(&[1, 0])]).unwrap();
        let c = cooccurrence_counts(&d).unwrap();
        assert_eq!(c.marginals, vec![2, 1]);
        assert_eq!(c.joint[0][1], 1);
        assert_eq!(c.joint[1][0], 1);
    }

    #[test]
    fn cooccurrence_degenerate_inputs() {
        let zeros = LabeledDataset::from_vectors(space(3), vec![v(&[0, 0, 0]); 4]).unwrap();
        let c = cooccurrence_counts(&zeros).unwrap();
        assert!(c.joint.iter().flatten().all(|&x| x == 0));

        let full = LabeledDataset::from_vectors(space(3), [v(&[1, 1, 1])]).unwrap();
        let c = cooccurrence_counts(&full).unwrap();
        assert!(c.joint.iter().flatten().all(|&x| x == 1));

        let empty = LabeledDataset::new(space(3));
        assert!(matches!(cooccurrence_counts(&empty), Err(Error::EmptyDataset)));
    }

    proptest::proptest! {
        #[test]
        fn cooccurrence_is_symmetric_and_bounded(masks in proptest::collection::vec(0u32..64, 1..60)) {
            let d = LabeledDataset::from_vectors(space(6), masks.iter().map(|&m| LabelVector::from_mask(m, 6))).unwrap();
            let c = cooccurrence_counts(&d).unwrap();
            for i in 0..6 {
                proptest::prop_assert_eq!(c.joint[i][i], c.marginals[i]);
                for j in 0..6 {
                    proptest::prop_assert_eq!(c.joint[i][j], c.joint[j][i]);
                    proptest::prop_assert!(c.joint[i][j] <= c.marginals[i].min(c.marginals[j]));
                }
            }
        }
    }
}
