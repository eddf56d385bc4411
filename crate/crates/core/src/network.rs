//! Network and message structure.
//!
//! A network has `n_tx` transmitters and `n_rx` receivers (both 1-based). Each
//! message is known at a subset of transmitters and must be decoded at a subset
//! of receivers. Sets of messages are handled as bitmasks over the canonical
//! message order of a [`NetworkSpec`], so every combinatorial routine here is
//! deterministic.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Upper limit on the number of messages; message sets are `u64` bitmasks.
pub const MAX_MESSAGES: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpecError {
    #[error("message #{position}: duplicate of message #{first}")]
    Duplicate { position: usize, first: usize },
    #[error("message #{position}: empty transmitter set")]
    EmptyTxSet { position: usize },
    #[error("message #{position}: empty receiver set")]
    EmptyRxSet { position: usize },
    #[error("message #{position}: {kind} index {index} out of range 1..={max}")]
    IndexOutOfRange {
        position: usize,
        kind: &'static str,
        index: usize,
        max: usize,
    },
    #[error("network needs at least one transmitter and one receiver")]
    NoNodes,
    #[error("network has no messages")]
    NoMessages,
    #[error("too many messages: {0} (limit {MAX_MESSAGES})")]
    TooManyMessages(usize),
    #[error("operation requires a nonempty message set")]
    EmptySet,
}

/// A message `W_{i->j}`: known at transmitters `tx`, decoded at receivers `rx`.
///
/// The derived ordering compares the sorted transmitter set first, then the
/// sorted receiver set, both lexicographically. This is the global canonical
/// order.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct MessageId {
    pub tx: BTreeSet<usize>,
    pub rx: BTreeSet<usize>,
}

impl MessageId {
    pub fn new(tx: impl IntoIterator<Item = usize>, rx: impl IntoIterator<Item = usize>) -> Self {
        MessageId {
            tx: tx.into_iter().collect(),
            rx: rx.into_iter().collect(),
        }
    }
}

fn join(set: &BTreeSet<usize>) -> String {
    set.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")
}

/// Renders as `{tx|rx}`, e.g. `{1|1,2}`.
impl fmt::Display for MessageId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}|{}}}", join(&self.tx), join(&self.rx))
    }
}

/// A validated network with messages stored in canonical order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct NetworkSpec {
    n_tx: usize,
    n_rx: usize,
    messages: Vec<MessageId>,
}

/// Checks a raw message list against the network dimensions.
///
/// Errors carry the 1-based position of the offending message in `messages`.
pub fn validate_spec(n_tx: usize, n_rx: usize, messages: &[MessageId]) -> Result<(), SpecError> {
    if n_tx == 0 || n_rx == 0 {
        return Err(SpecError::NoNodes);
    }
    if messages.is_empty() {
        return Err(SpecError::NoMessages);
    }
    if messages.len() > MAX_MESSAGES {
        return Err(SpecError::TooManyMessages(messages.len()));
    }
    let mut seen: BTreeMap<&MessageId, usize> = BTreeMap::new();
    for (idx, m) in messages.iter().enumerate() {
        let position = idx + 1;
        if m.tx.is_empty() {
            return Err(SpecError::EmptyTxSet { position });
        }
        if m.rx.is_empty() {
            return Err(SpecError::EmptyRxSet { position });
        }
        for (kind, set, max) in [("transmitter", &m.tx, n_tx), ("receiver", &m.rx, n_rx)] {
            if let Some(&index) = set.iter().find(|&&v| v == 0 || v > max) {
                return Err(SpecError::IndexOutOfRange {
                    position,
                    kind,
                    index,
                    max,
                });
            }
        }
        if let Some(&first) = seen.get(m) {
            return Err(SpecError::Duplicate { position, first });
        }
        seen.insert(m, position);
    }
    Ok(())
}

impl NetworkSpec {
    pub fn new(n_tx: usize, n_rx: usize, mut messages: Vec<MessageId>) -> Result<Self, SpecError> {
        validate_spec(n_tx, n_rx, &messages)?;
        messages.sort();
        Ok(NetworkSpec {
            n_tx,
            n_rx,
            messages,
        })
    }

    pub fn n_tx(&self) -> usize {
        self.n_tx
    }

    pub fn n_rx(&self) -> usize {
        self.n_rx
    }

    pub fn messages(&self) -> &[MessageId] {
        &self.messages
    }

    pub fn len(&self) -> usize {
        self.messages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.messages.is_empty()
    }

    pub fn message(&self, index: usize) -> &MessageId {
        &self.messages[index]
    }

    /// Position of `id` in canonical order.
    pub fn position(&self, id: &MessageId) -> Option<usize> {
        self.messages.binary_search(id).ok()
    }

    pub fn all(&self) -> MessageSet {
        MessageSet::full(self.messages.len())
    }

    pub fn is_mac(&self) -> bool {
        self.n_rx == 1
    }

    /// Union of every receiver set (`j_all`).
    pub fn all_receivers(&self) -> BTreeSet<usize> {
        self.messages.iter().flat_map(|m| m.rx.iter().copied()).collect()
    }

    /// Renders a message set as `{{1|1},{1|1,2}}`.
    pub fn render_set(&self, set: MessageSet) -> String {
        let inner: Vec<String> = set.iter().map(|i| self.messages[i].to_string()).collect();
        format!("{{{}}}", inner.join(","))
    }
}

/// A subset of a spec's messages, as a bitmask over canonical positions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct MessageSet(u64);

impl MessageSet {
    pub const EMPTY: MessageSet = MessageSet(0);

    pub fn from_bits(bits: u64) -> Self {
        MessageSet(bits)
    }

    pub fn full(len: usize) -> Self {
        if len >= 64 {
            MessageSet(u64::MAX)
        } else {
            MessageSet((1u64 << len) - 1)
        }
    }

    pub fn singleton(index: usize) -> Self {
        MessageSet(1u64 << index)
    }

    pub fn from_indices(indices: impl IntoIterator<Item = usize>) -> Self {
        MessageSet(indices.into_iter().fold(0, |acc, i| acc | (1u64 << i)))
    }

    pub fn bits(self) -> u64 {
        self.0
    }

    pub fn contains(self, index: usize) -> bool {
        self.0 >> index & 1 == 1
    }

    pub fn insert(&mut self, index: usize) {
        self.0 |= 1u64 << index;
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn union(self, other: MessageSet) -> MessageSet {
        MessageSet(self.0 | other.0)
    }

    pub fn intersection(self, other: MessageSet) -> MessageSet {
        MessageSet(self.0 & other.0)
    }

    pub fn difference(self, other: MessageSet) -> MessageSet {
        MessageSet(self.0 & !other.0)
    }

    pub fn is_subset(self, other: MessageSet) -> bool {
        self.0 & !other.0 == 0
    }

    /// Complement relative to the first `len` messages.
    pub fn complement(self, len: usize) -> MessageSet {
        MessageSet::full(len).difference(self)
    }

    pub fn iter(self) -> impl Iterator<Item = usize> {
        let bits = self.0;
        (0..64).filter(move |i| bits >> i & 1 == 1)
    }

    /// Canonical sort key: cardinality, then ascending index list.
    pub fn sort_key(self) -> (usize, Vec<usize>) {
        (self.len(), self.iter().collect())
    }
}

/// `T_S`: transmitters that know every message in `set`. May be empty.
pub fn common_transmitters(spec: &NetworkSpec, set: MessageSet) -> Result<BTreeSet<usize>, SpecError> {
    let mut it = set.iter();
    let first = it.next().ok_or(SpecError::EmptySet)?;
    let mut acc = spec.message(first).tx.clone();
    for i in it {
        acc.retain(|k| spec.message(i).tx.contains(k));
    }
    Ok(acc)
}

/// `R_S`: receivers that decode any message in `set`.
pub fn involved_receivers(spec: &NetworkSpec, set: MessageSet) -> Result<BTreeSet<usize>, SpecError> {
    if set.is_empty() {
        return Err(SpecError::EmptySet);
    }
    Ok(set
        .iter()
        .flat_map(|i| spec.message(i).rx.iter().copied())
        .collect())
}

/// Receivers that decode every message in `set` (`∩ j`). Empty for an empty set.
pub fn shared_receivers(spec: &NetworkSpec, set: MessageSet) -> BTreeSet<usize> {
    let mut it = set.iter();
    let Some(first) = it.next() else {
        return BTreeSet::new();
    };
    let mut acc = spec.message(first).rx.clone();
    for i in it {
        acc.retain(|z| spec.message(i).rx.contains(z));
    }
    acc
}

/// Result of merging all messages with the same transmitter set into a single
/// message decoded by every receiver.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Reduction {
    original: NetworkSpec,
    reduced: NetworkSpec,
    /// For each reduced message (canonical order), the original messages whose
    /// rates sum into it.
    rate_map: Vec<MessageSet>,
}

impl Reduction {
    pub fn original(&self) -> &NetworkSpec {
        &self.original
    }

    pub fn reduced(&self) -> &NetworkSpec {
        &self.reduced
    }

    pub fn rate_map(&self) -> &[MessageSet] {
        &self.rate_map
    }

    /// Original messages merged into reduced message `index`.
    pub fn group(&self, index: usize) -> MessageSet {
        self.rate_map[index]
    }

    /// Reduced message that original message `index` was merged into.
    pub fn group_of(&self, index: usize) -> usize {
        self.rate_map
            .iter()
            .position(|g| g.contains(index))
            .expect("every original message belongs to a group")
    }

    /// Maps original rates to reduced rates by summing each group.
    pub fn reduce_rates(&self, rates: &[f64]) -> Vec<f64> {
        self.rate_map
            .iter()
            .map(|g| g.iter().map(|i| rates[i]).sum())
            .collect()
    }

    /// Expands a set of reduced messages to every original message it encodes.
    pub fn expand(&self, reduced_set: MessageSet) -> MessageSet {
        reduced_set
            .iter()
            .fold(MessageSet::EMPTY, |acc, g| acc.union(self.rate_map[g]))
    }
}

/// Rate splitting where every receiver decodes every message: one message per
/// distinct transmitter set, all addressed to `j_all`.
pub fn all_common_reduction(spec: &NetworkSpec) -> Reduction {
    let j_all = spec.all_receivers();
    let mut groups: BTreeMap<BTreeSet<usize>, MessageSet> = BTreeMap::new();
    for (i, m) in spec.messages().iter().enumerate() {
        groups.entry(m.tx.clone()).or_default().insert(i);
    }
    let reduced_messages: Vec<MessageId> = groups
        .keys()
        .map(|tx| MessageId {
            tx: tx.clone(),
            rx: j_all.clone(),
        })
        .collect();
    let reduced = NetworkSpec::new(spec.n_tx(), spec.n_rx(), reduced_messages)
        .expect("reduction of a valid spec is valid");
    // BTreeMap key order equals canonical order of the reduced messages since
    // they share one receiver set.
    let rate_map = groups.into_values().collect();
    Reduction {
        original: spec.clone(),
        reduced,
        rate_map,
    }
}

fn is_strict_subset(a: &BTreeSet<usize>, b: &BTreeSet<usize>) -> bool {
    a.len() < b.len() && a.is_subset(b)
}

/// Every nonempty set of messages that is closed under taking messages with a
/// strictly smaller transmitter set: if a message with transmitter set `i` is
/// in, so is every message whose transmitter set is a proper subset of `i`.
///
/// Intended for all-common reduced specs. Only transmitter sets that appear
/// in the network impose constraints. Sets are returned ordered by cardinality,
/// then by ascending index list.
pub fn enumerate_closed_sets(spec: &NetworkSpec) -> Vec<MessageSet> {
    let m = spec.len();
    // Process messages so that every strict subset comes before its supersets.
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by_key(|&i| (spec.message(i).tx.len(), i));
    let below: Vec<MessageSet> = (0..m)
        .map(|i| {
            MessageSet::from_indices(
                (0..m).filter(|&l| is_strict_subset(&spec.message(l).tx, &spec.message(i).tx)),
            )
        })
        .collect();

    fn extend(pos: usize, order: &[usize], below: &[MessageSet], cur: MessageSet, out: &mut Vec<MessageSet>) {
        if pos == order.len() {
            if !cur.is_empty() {
                out.push(cur);
            }
            return;
        }
        let i = order[pos];
        extend(pos + 1, order, below, cur, out);
        if below[i].is_subset(cur) {
            let mut with = cur;
            with.insert(i);
            extend(pos + 1, order, below, with, out);
        }
    }

    let mut out = Vec::new();
    extend(0, &order, &below, MessageSet::EMPTY, &mut out);
    out.sort_by_key(|s| s.sort_key());
    out
}

/// Assignment of each message in a set to one of its decoding receivers.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Partition {
    set: MessageSet,
    /// `(message index, receiver)` pairs in ascending message order.
    assignment: Vec<(usize, usize)>,
}

impl Partition {
    /// Every message of `set` assigned to `z`. Does not check `z ∈ j`.
    pub fn single_block(set: MessageSet, z: usize) -> Partition {
        Partition {
            set,
            assignment: set.iter().map(|m| (m, z)).collect(),
        }
    }

    pub fn set(&self) -> MessageSet {
        self.set
    }

    pub fn assignment(&self) -> &[(usize, usize)] {
        &self.assignment
    }

    pub fn receiver_of(&self, message: usize) -> Option<usize> {
        self.assignment
            .iter()
            .find(|(m, _)| *m == message)
            .map(|&(_, z)| z)
    }

    /// Block `S^z`.
    pub fn block(&self, z: usize) -> MessageSet {
        MessageSet::from_indices(
            self.assignment
                .iter()
                .filter(|(_, r)| *r == z)
                .map(|&(m, _)| m),
        )
    }

    /// Receivers with a nonempty block, ascending.
    pub fn receivers(&self) -> BTreeSet<usize> {
        self.assignment.iter().map(|&(_, z)| z).collect()
    }

    pub fn render(&self, spec: &NetworkSpec) -> String {
        let parts: Vec<String> = self
            .assignment
            .iter()
            .map(|&(m, z)| format!("{}->{}", spec.message(m), z))
            .collect();
        format!("[{}]", parts.join(","))
    }
}

/// All partitions `{S^z}` of `set` with `(i,j) ∈ S^z ⟹ z ∈ j`.
///
/// The count is the product of the receiver-set sizes. The last message varies
/// fastest.
pub fn enumerate_partitions(spec: &NetworkSpec, set: MessageSet) -> Vec<Partition> {
    let members: Vec<usize> = set.iter().collect();
    let choices: Vec<Vec<usize>> = members
        .iter()
        .map(|&i| spec.message(i).rx.iter().copied().collect())
        .collect();
    let mut out = Vec::new();
    let mut cursor = vec![0usize; members.len()];
    loop {
        out.push(Partition {
            set,
            assignment: members
                .iter()
                .zip(&cursor)
                .zip(&choices)
                .map(|((&m, &c), ch)| (m, ch[c]))
                .collect(),
        });
        // mixed-radix increment
        let mut pos = members.len();
        loop {
            if pos == 0 {
                return out;
            }
            pos -= 1;
            cursor[pos] += 1;
            if cursor[pos] < choices[pos].len() {
                break;
            }
            cursor[pos] = 0;
        }
    }
}
