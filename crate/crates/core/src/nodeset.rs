//! Fixed-universe bitsets over node indices.
//!
//! Graphs up to 128 nodes keep their sets inline; larger universes spill to
//! the heap transparently.

use smallvec::{smallvec, SmallVec};
use std::cmp::Ordering;
use std::fmt;

use crate::graph::NodeId;

const WORD: usize = 64;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct NodeSet {
    universe: usize,
    words: SmallVec<[u64; 2]>,
}

impl NodeSet {
    pub fn empty(universe: usize) -> Self {
        let nwords = universe.div_ceil(WORD).max(1);
        NodeSet {
            universe,
            words: smallvec![0; nwords],
        }
    }

    pub fn full(universe: usize) -> Self {
        let mut s = Self::empty(universe);
        for i in 0..universe {
            s.words[i / WORD] |= 1 << (i % WORD);
        }
        s
    }

    pub fn singleton(universe: usize, v: NodeId) -> Self {
        let mut s = Self::empty(universe);
        s.insert(v);
        s
    }

    pub fn from_nodes(universe: usize, nodes: impl IntoIterator<Item = NodeId>) -> Self {
        let mut s = Self::empty(universe);
        for v in nodes {
            s.insert(v);
        }
        s
    }

    /// Builds a set from the low `universe` bits of `mask`.
    pub fn from_mask(universe: usize, mask: u64) -> Self {
        debug_assert!(universe <= WORD);
        let mut s = Self::empty(universe);
        let keep = if universe == WORD { u64::MAX } else { (1u64 << universe) - 1 };
        s.words[0] = mask & keep;
        s
    }

    /// Low word of the set; exact when the universe has at most 64 nodes.
    pub fn mask(&self) -> u64 {
        self.words[0]
    }

    pub fn universe(&self) -> usize {
        self.universe
    }

    #[inline]
    pub fn contains(&self, v: NodeId) -> bool {
        let i = v.index();
        i < self.universe && self.words[i / WORD] >> (i % WORD) & 1 == 1
    }

    #[inline]
    pub fn insert(&mut self, v: NodeId) -> bool {
        let i = v.index();
        assert!(i < self.universe, "node {i} outside universe {}", self.universe);
        let w = &mut self.words[i / WORD];
        let fresh = *w >> (i % WORD) & 1 == 0;
        *w |= 1 << (i % WORD);
        fresh
    }

    #[inline]
    pub fn remove(&mut self, v: NodeId) -> bool {
        let i = v.index();
        if i >= self.universe {
            return false;
        }
        let w = &mut self.words[i / WORD];
        let had = *w >> (i % WORD) & 1 == 1;
        *w &= !(1 << (i % WORD));
        had
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn union_with(&mut self, other: &NodeSet) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= *b;
        }
    }

    pub fn intersect_with(&mut self, other: &NodeSet) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a &= *b;
        }
    }

    pub fn subtract(&mut self, other: &NodeSet) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a &= !*b;
        }
    }

    pub fn union(&self, other: &NodeSet) -> NodeSet {
        let mut s = self.clone();
        s.union_with(other);
        s
    }

    pub fn intersection(&self, other: &NodeSet) -> NodeSet {
        let mut s = self.clone();
        s.intersect_with(other);
        s
    }

    pub fn difference(&self, other: &NodeSet) -> NodeSet {
        let mut s = self.clone();
        s.subtract(other);
        s
    }

    pub fn complement(&self) -> NodeSet {
        NodeSet::full(self.universe).difference(self)
    }

    pub fn is_subset(&self, other: &NodeSet) -> bool {
        self.words.iter().zip(&other.words).all(|(a, b)| a & !b == 0)
    }

    pub fn intersects(&self, other: &NodeSet) -> bool {
        self.words.iter().zip(&other.words).any(|(a, b)| a & b != 0)
    }

    pub fn first(&self) -> Option<NodeId> {
        self.iter().next()
    }

    pub fn iter(&self) -> Iter<'_> {
        Iter {
            words: &self.words,
            word_idx: 0,
            current: self.words[0],
        }
    }

    pub fn to_vec(&self) -> Vec<NodeId> {
        self.iter().collect()
    }

    /// Cardinality first, then the sorted member lists lexicographically.
    pub fn cmp_card_lex(&self, other: &NodeSet) -> Ordering {
        self.len()
            .cmp(&other.len())
            .then_with(|| self.iter().cmp(other.iter()))
    }
}

pub struct Iter<'a> {
    words: &'a [u64],
    word_idx: usize,
    current: u64,
}

impl Iterator for Iter<'_> {
    type Item = NodeId;

    fn next(&mut self) -> Option<NodeId> {
        loop {
            if self.current != 0 {
                let bit = self.current.trailing_zeros() as usize;
                self.current &= self.current - 1;
                return Some(NodeId(self.word_idx * WORD + bit));
            }
            self.word_idx += 1;
            if self.word_idx >= self.words.len() {
                return None;
            }
            self.current = self.words[self.word_idx];
        }
    }
}

impl<'a> IntoIterator for &'a NodeSet {
    type Item = NodeId;
    type IntoIter = Iter<'a>;

    fn into_iter(self) -> Iter<'a> {
        self.iter()
    }
}

impl fmt::Debug for NodeSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter().map(|v| v.0)).finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn insert_remove_roundtrip() {
        let mut s = NodeSet::empty(130);
        assert!(s.insert(NodeId(0)));
        assert!(s.insert(NodeId(129)));
        assert!(!s.insert(NodeId(129)));
        assert_eq!(s.len(), 2);
        assert_eq!(s.to_vec(), vec![NodeId(0), NodeId(129)]);
        assert!(s.remove(NodeId(0)));
        assert_eq!(s.to_vec(), vec![NodeId(129)]);
    }

    #[test]
    fn set_algebra() {
        let a = NodeSet::from_nodes(5, [NodeId(0), NodeId(1), NodeId(2)]);
        let b = NodeSet::from_nodes(5, [NodeId(2), NodeId(3)]);
        assert_eq!(a.union(&b).len(), 4);
        assert_eq!(a.intersection(&b).to_vec(), vec![NodeId(2)]);
        assert_eq!(a.difference(&b).len(), 2);
        assert_eq!(a.complement().to_vec(), vec![NodeId(3), NodeId(4)]);
        assert!(NodeSet::from_nodes(5, [NodeId(2)]).is_subset(&b));
        assert!(a.intersects(&b));
    }

    #[test]
    fn full_set_of_64_uses_whole_word() {
        let s = NodeSet::full(64);
        assert_eq!(s.len(), 64);
        assert_eq!(s.mask(), u64::MAX);
        assert_eq!(NodeSet::from_mask(64, u64::MAX), s);
    }

    #[test]
    fn card_lex_order() {
        let a = NodeSet::from_nodes(4, [NodeId(1)]);
        let b = NodeSet::from_nodes(4, [NodeId(0), NodeId(3)]);
        let c = NodeSet::from_nodes(4, [NodeId(1), NodeId(2)]);
        assert_eq!(a.cmp_card_lex(&b), Ordering::Less);
        assert_eq!(b.cmp_card_lex(&c), Ordering::Less);
    }
}
