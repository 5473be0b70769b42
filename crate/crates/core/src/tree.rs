//! Node identities and the live node stack shared by the tree mechanisms.

use std::fmt;

use crate::bitcodec::PathWord;

/// A stored p-sum, named by the prefix of a query word that selects it.
///
/// The prefix is the top `prefix_len` bits of the query word and always ends
/// in a 1. The node itself is the left child reached by the same prefix with
/// its last bit cleared, i.e. it covers every leaf whose path starts with
/// `prefix_bits - 1`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId {
    prefix_bits: u64,
    prefix_len: u32,
}

impl NodeId {
    pub fn new(prefix_bits: u64, prefix_len: u32) -> Option<Self> {
        let fits = prefix_len >= 64 || prefix_bits >> prefix_len == 0;
        (prefix_len >= 1 && prefix_len <= 64 && prefix_bits & 1 == 1 && fits).then_some(Self {
            prefix_bits,
            prefix_len,
        })
    }

    /// The node selected by bit `bit` of `query`, which must be set.
    pub fn from_query_bit(query: PathWord, bit: u32) -> Self {
        debug_assert!(query.bit(bit));
        Self {
            prefix_bits: if bit >= 64 { 0 } else { query.bits() >> bit },
            prefix_len: query.width() - bit,
        }
    }

    pub fn prefix_bits(&self) -> u64 {
        self.prefix_bits
    }

    pub fn prefix_len(&self) -> u32 {
        self.prefix_len
    }

    /// Closed 1-based leaf interval `[a, b]` covered in a tree of `height`.
    pub fn interval(&self, height: u32) -> (u128, u128) {
        let shift = height - self.prefix_len;
        let p = u128::from(self.prefix_bits);
        (((p - 1) << shift) + 1, p << shift)
    }

    /// Whether this node's prefix is a prefix of `word`.
    pub fn is_prefix_of(&self, word: PathWord) -> bool {
        self.prefix_len <= word.width()
            && u128::from(word.bits()) >> (word.width() - self.prefix_len)
                == u128::from(self.prefix_bits)
    }

    /// Whether the node covers the 0-based leaf with path `leaf`.
    pub fn covers(&self, leaf: PathWord) -> bool {
        self.prefix_len <= leaf.width()
            && u128::from(leaf.bits()) >> (leaf.width() - self.prefix_len)
                == u128::from(self.prefix_bits - 1)
    }
}

impl fmt::Debug for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "NodeId({:0w$b})",
            self.prefix_bits,
            w = self.prefix_len as usize
        )
    }
}

/// Record of one admitted node, kept when a mechanism runs with node recording.
#[derive(Debug, Clone, PartialEq)]
pub struct Admission {
    pub step: u64,
    pub node: NodeId,
    pub noise: Vec<f64>,
}

/// The live set of noisy nodes plus the exact running count.
///
/// Entries are ordered from the shortest prefix (bottom) to the longest (top).
/// Each entry holds the *cumulative* noise of itself and every entry below it,
/// so retiring a node is a pop and admitting one is a push of `top + fresh`.
/// The noise total is always the left fold of the live noises in query
/// order, with no subtraction involved.
#[derive(Debug, Clone)]
pub struct NodeStack {
    dim: usize,
    ids: Vec<NodeId>,
    cumulative: Vec<f64>,
    true_count: Vec<f64>,
    log: Option<Vec<Admission>>,
}

impl NodeStack {
    pub fn new(dim: usize, capacity_hint: usize, record: bool) -> Self {
        Self {
            dim,
            ids: Vec::with_capacity(capacity_hint),
            cumulative: Vec::with_capacity(capacity_hint * dim),
            true_count: vec![0.0; dim],
            log: record.then(Vec::new),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[NodeId] {
        &self.ids
    }

    pub fn top(&self) -> Option<NodeId> {
        self.ids.last().copied()
    }

    pub fn add_element(&mut self, x: &[f64]) {
        for (c, v) in self.true_count.iter_mut().zip(x) {
            *c += v;
        }
    }

    pub fn true_count(&self) -> &[f64] {
        &self.true_count
    }

    /// Drops the `n` most recently admitted nodes.
    pub fn retire(&mut self, n: usize) {
        let keep = self.ids.len().saturating_sub(n);
        self.ids.truncate(keep);
        self.cumulative.truncate(keep * self.dim);
    }

    /// Pushes a node carrying `noise`.
    pub fn admit(&mut self, step: u64, node: NodeId, noise: &[f64]) {
        debug_assert_eq!(noise.len(), self.dim);
        let base = self.cumulative.len();
        if base == 0 {
            self.cumulative.extend_from_slice(noise);
        } else {
            let below = base - self.dim;
            for i in 0..self.dim {
                let v = self.cumulative[below + i] + noise[i];
                self.cumulative.push(v);
            }
        }
        self.ids.push(node);
        if let Some(log) = &mut self.log {
            log.push(Admission {
                step,
                node,
                noise: noise.to_vec(),
            });
        }
    }

    /// Sum of the noise of every live node.
    pub fn noise_total(&self) -> Vec<f64> {
        match self.cumulative.len() {
            0 => vec![0.0; self.dim],
            n => self.cumulative[n - self.dim..].to_vec(),
        }
    }

    /// Exact count plus the noise total.
    pub fn estimate(&self) -> Vec<f64> {
        let mut out = self.true_count.clone();
        let n = self.cumulative.len();
        if n > 0 {
            for (o, z) in out.iter_mut().zip(&self.cumulative[n - self.dim..]) {
                *o += z;
            }
        }
        out
    }

    pub fn admissions(&self) -> Option<&[Admission]> {
        self.log.as_deref()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn intervals() {
        // Height 4: prefix 01 is the left child [1, 4]; prefix 0101 is leaf 5.
        assert_eq!(NodeId::new(0b01, 2).unwrap().interval(4), (1, 4));
        assert_eq!(NodeId::new(0b0101, 4).unwrap().interval(4), (5, 5));
        assert_eq!(NodeId::new(0b1, 1).unwrap().interval(3), (1, 4));
        assert_eq!(NodeId::new(0b11, 2).unwrap().interval(3), (5, 6));
        assert!(NodeId::new(0b10, 2).is_none());
        assert!(NodeId::new(0b101, 2).is_none());
    }

    #[test]
    fn query_bits_and_coverage() {
        let q = PathWord::new(0b0101, 4).unwrap();
        let hi = NodeId::from_query_bit(q, 2);
        assert_eq!((hi.prefix_bits(), hi.prefix_len()), (0b01, 2));
        assert!(hi.is_prefix_of(q));
        assert!(hi.covers(PathWord::new(0b0011, 4).unwrap()));
        assert!(!hi.covers(PathWord::new(0b0100, 4).unwrap()));
        let wide = PathWord::new(1 << 63, 64).unwrap();
        let root_child = NodeId::from_query_bit(wide, 63);
        assert_eq!(root_child.interval(64), (1, 1u128 << 63));
    }

    #[test]
    fn cumulative_stack() {
        let mut s = NodeStack::new(2, 4, true);
        assert_eq!(s.noise_total(), vec![0.0, 0.0]);
        s.admit(1, NodeId::new(1, 1).unwrap(), &[1.0, 2.0]);
        s.admit(1, NodeId::new(3, 2).unwrap(), &[0.5, 0.25]);
        s.add_element(&[1.0, 0.0]);
        assert_eq!(s.noise_total(), vec![1.5, 2.25]);
        assert_eq!(s.estimate(), vec![2.5, 2.25]);
        s.retire(1);
        assert_eq!(s.noise_total(), vec![1.0, 2.0]);
        s.retire(5);
        assert!(s.is_empty());
        assert_eq!(s.estimate(), vec![1.0, 0.0]);
        assert_eq!(s.admissions().unwrap().len(), 2);
    }
}
