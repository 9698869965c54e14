//! Taint labels and the propagation calculus.
//!
//! Every stack value, local, global and linear-memory byte carries a
//! [`TaintLabel`]: a map from taint source (an argument position of the entry
//! invocation) to a [`TaintLevel`]. Sources missing from the map are at
//! [`TaintLevel::None`].
//!
//! Propagation rules:
//!
//! * a value computed from operands takes the point-wise maximum of the
//!   operand labels ([`TaintLabel::merge`]);
//! * a value written while execution is control-dependent on a tainted
//!   condition picks up that condition's sources at `Indirect`
//!   ([`ControlContext`]);
//! * a value read through a tainted address or table index picks up the
//!   address's sources at `Indirect` ([`assign_label`]).
//!
//! Indirect influence never produces `Direct` taint.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

/// Upper bound on distinct taint sources in one invocation.
pub const MAX_SOURCES: usize = 64;

/// Identifies a taint source by the argument position it was bound to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SourceId(u8);

impl SourceId {
    pub fn new(index: usize) -> Option<Self> {
        (index < MAX_SOURCES).then_some(SourceId(index as u8))
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    fn bit(self) -> u64 {
        1u64 << self.0
    }
}

impl fmt::Display for SourceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// How strongly a value depends on a source. Totally ordered.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum TaintLevel {
    None,
    Indirect,
    Direct,
}

impl TaintLevel {
    pub fn as_str(self) -> &'static str {
        match self {
            TaintLevel::None => "NONE",
            TaintLevel::Indirect => "INDIRECT",
            TaintLevel::Direct => "DIRECT",
        }
    }
}

impl fmt::Display for TaintLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Sparse source → level map, stored as two disjoint bitsets.
///
/// A source bit is set in at most one of `direct` and `indirect`; a source in
/// neither is `None`, so no entry is ever stored at level `None`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct TaintLabel {
    direct: u64,
    indirect: u64,
}

impl TaintLabel {
    pub const EMPTY: TaintLabel = TaintLabel {
        direct: 0,
        indirect: 0,
    };

    /// A label holding a single source at `DIRECT`, as given to a tainted argument.
    pub fn source(id: SourceId) -> Self {
        TaintLabel {
            direct: id.bit(),
            indirect: 0,
        }
    }

    pub fn with(mut self, id: SourceId, level: TaintLevel) -> Self {
        self.set(id, level);
        self
    }

    pub fn set(&mut self, id: SourceId, level: TaintLevel) {
        let bit = id.bit();
        self.direct &= !bit;
        self.indirect &= !bit;
        match level {
            TaintLevel::None => {}
            TaintLevel::Indirect => self.indirect |= bit,
            TaintLevel::Direct => self.direct |= bit,
        }
    }

    pub fn level(&self, id: SourceId) -> TaintLevel {
        let bit = id.bit();
        if self.direct & bit != 0 {
            TaintLevel::Direct
        } else if self.indirect & bit != 0 {
            TaintLevel::Indirect
        } else {
            TaintLevel::None
        }
    }

    /// Bit `i` set when source `i` is at `DIRECT`.
    pub fn direct_mask(&self) -> u64 {
        self.direct
    }

    /// Bit `i` set when source `i` is at `INDIRECT`.
    pub fn indirect_mask(&self) -> u64 {
        self.indirect
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        (self.direct | self.indirect) == 0
    }

    /// Number of sources with a non-`None` level.
    pub fn len(&self) -> usize {
        (self.direct | self.indirect).count_ones() as usize
    }

    /// Point-wise maximum of the two labels.
    #[inline]
    pub fn merge(self, other: TaintLabel) -> TaintLabel {
        let direct = self.direct | other.direct;
        TaintLabel {
            direct,
            indirect: (self.indirect | other.indirect) & !direct,
        }
    }

    /// Lowers every `DIRECT` entry to `INDIRECT`.
    #[inline]
    pub fn cap_indirect(self) -> TaintLabel {
        TaintLabel {
            direct: 0,
            indirect: self.direct | self.indirect,
        }
    }

    /// Entries in ascending source order.
    pub fn iter(&self) -> impl Iterator<Item = (SourceId, TaintLevel)> + '_ {
        let all = self.direct | self.indirect;
        (0..MAX_SOURCES as u8)
            .filter(move |i| all & (1u64 << i) != 0)
            .map(move |i| {
                let id = SourceId(i);
                (id, self.level(id))
            })
    }

    pub fn to_map(&self) -> BTreeMap<SourceId, TaintLevel> {
        self.iter().collect()
    }

    /// Whether every source in the label belongs to `sources`.
    pub fn within(&self, sources: &[SourceId]) -> bool {
        let allowed = sources.iter().fold(0u64, |acc, s| acc | s.bit());
        (self.direct | self.indirect) & !allowed == 0
    }
}

impl FromIterator<(SourceId, TaintLevel)> for TaintLabel {
    fn from_iter<I: IntoIterator<Item = (SourceId, TaintLevel)>>(iter: I) -> Self {
        iter.into_iter()
            .fold(TaintLabel::EMPTY, |label, (id, level)| {
                label.merge(TaintLabel::EMPTY.with(id, level))
            })
    }
}

impl fmt::Debug for TaintLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map().entries(self.iter()).finish()
    }
}

/// Compact form used in traces and text reports: `{0:D,1:I}`.
impl fmt::Display for TaintLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (n, (id, level)) in self.iter().enumerate() {
            if n > 0 {
                f.write_str(",")?;
            }
            let tag = if level == TaintLevel::Direct { "D" } else { "I" };
            write!(f, "{id}:{tag}")?;
        }
        f.write_str("}")
    }
}

impl Serialize for TaintLabel {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        let mut map = serializer.serialize_map(Some(self.len()))?;
        for (id, level) in self.iter() {
            map.serialize_entry(&id.to_string(), level.as_str())?;
        }
        map.end()
    }
}

impl<'de> Deserialize<'de> for TaintLabel {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let raw = BTreeMap::<String, TaintLevel>::deserialize(deserializer)?;
        let mut label = TaintLabel::EMPTY;
        for (key, level) in raw {
            let id = key
                .parse::<usize>()
                .ok()
                .and_then(SourceId::new)
                .ok_or_else(|| D::Error::custom(format!("invalid taint source id `{key}`")))?;
            label.set(id, level);
        }
        Ok(label)
    }
}

/// Effective control context: the capped union of the condition labels of
/// every scope the current instruction is nested in, across frames.
///
/// Never holds `DIRECT` entries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ControlContext(TaintLabel);

impl ControlContext {
    pub const CLEAN: ControlContext = ControlContext(TaintLabel::EMPTY);

    /// The context inside a region that runs only because `condition` had the value it had.
    #[inline]
    pub fn under(self, condition: TaintLabel) -> ControlContext {
        ControlContext(self.0.merge(condition.cap_indirect()))
    }

    #[inline]
    pub fn label(&self) -> TaintLabel {
        self.0
    }

    #[inline]
    pub fn is_clean(&self) -> bool {
        self.0.is_empty()
    }
}

/// The label written along with a value to a local, global, stack slot or
/// memory byte.
#[inline]
pub fn assign_label(
    value: TaintLabel,
    context: &ControlContext,
    address: Option<TaintLabel>,
) -> TaintLabel {
    let mut label = value.merge(context.label());
    if let Some(address) = address {
        label = label.merge(address.cap_indirect());
    }
    label
}

/// One label per linear-memory byte.
///
/// Also keeps a running count of bytes holding a non-empty label and the
/// peak of that count, so memory overhead can be observed without rescanning.
#[derive(Debug, Clone, Default)]
pub struct Shadow {
    labels: Vec<TaintLabel>,
    tainted: usize,
    peak: usize,
}

impl Shadow {
    pub fn new(len: usize) -> Self {
        Shadow {
            labels: vec![TaintLabel::EMPTY; len],
            tainted: 0,
            peak: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Extends with `extra` clean bytes.
    pub fn grow(&mut self, extra: usize) {
        self.labels.resize(self.labels.len() + extra, TaintLabel::EMPTY);
    }

    /// Overwrites the labels of `width` bytes at `addr` with `label`. Bounds
    /// must already be checked.
    #[inline]
    pub fn store(&mut self, addr: usize, width: usize, label: TaintLabel) {
        let slots = &mut self.labels[addr..addr + width];
        let was = slots.iter().filter(|l| !l.is_empty()).count();
        slots.fill(label);
        let now = if label.is_empty() { 0 } else { width };
        self.tainted = self.tainted + now - was;
        if self.tainted > self.peak {
            self.peak = self.tainted;
        }
    }

    /// Union of the labels of `width` bytes at `addr`.
    #[inline]
    pub fn load(&self, addr: usize, width: usize) -> TaintLabel {
        self.labels[addr..addr + width]
            .iter()
            .fold(TaintLabel::EMPTY, |acc, l| acc.merge(*l))
    }

    pub fn label(&self, addr: usize) -> TaintLabel {
        self.labels[addr]
    }

    pub fn labels(&self) -> &[TaintLabel] {
        &self.labels
    }

    pub fn tainted_bytes(&self) -> usize {
        self.tainted
    }

    pub fn peak_tainted_bytes(&self) -> usize {
        self.peak
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn s(i: usize) -> SourceId {
        SourceId::new(i).unwrap()
    }

    fn label(entries: &[(usize, TaintLevel)]) -> TaintLabel {
        entries.iter().map(|&(i, l)| (s(i), l)).collect()
    }

    use TaintLevel::{Direct, Indirect};

    #[test]
    fn merge_examples() {
        assert_eq!(
            label(&[(0, Direct)]).merge(TaintLabel::EMPTY),
            label(&[(0, Direct)])
        );
        assert_eq!(
            label(&[(0, Indirect)]).merge(label(&[(0, Direct)])),
            label(&[(0, Direct)])
        );
        let mixed = label(&[(0, Direct)]).merge(label(&[(1, Indirect)]));
        assert_eq!(mixed.level(s(0)), Direct);
        assert_eq!(mixed.level(s(1)), Indirect);
        assert_eq!(mixed.level(s(2)), TaintLevel::None);
        assert_eq!(mixed.len(), 2);
    }

    #[test]
    fn cap_examples() {
        assert_eq!(
            label(&[(0, Direct)]).cap_indirect(),
            label(&[(0, Indirect)])
        );
        assert_eq!(TaintLabel::EMPTY.cap_indirect(), TaintLabel::EMPTY);
        assert_eq!(
            label(&[(0, Direct), (1, Indirect)]).cap_indirect(),
            label(&[(0, Indirect), (1, Indirect)])
        );
    }

    #[test]
    fn assign_examples() {
        let clean = ControlContext::CLEAN;
        assert_eq!(
            assign_label(label(&[(0, Direct)]), &clean, None),
            label(&[(0, Direct)])
        );
        let ctx = clean.under(label(&[(0, Direct)]));
        assert_eq!(
            assign_label(TaintLabel::EMPTY, &ctx, None),
            label(&[(0, Indirect)])
        );
        assert_eq!(
            assign_label(TaintLabel::EMPTY, &clean, Some(label(&[(1, Direct)]))),
            label(&[(1, Indirect)])
        );
    }

    #[test]
    fn setting_none_removes_entry() {
        let mut l = label(&[(3, Direct)]);
        l.set(s(3), TaintLevel::None);
        assert!(l.is_empty());
        assert_eq!(l.iter().count(), 0);
    }

    #[test]
    fn source_id_bounds() {
        assert!(SourceId::new(63).is_some());
        assert!(SourceId::new(64).is_none());
    }

    #[test]
    fn display_and_json() {
        let l = label(&[(0, Direct), (2, Indirect)]);
        assert_eq!(l.to_string(), "{0:D,2:I}");
        let json = serde_json::to_string(&l).unwrap();
        assert_eq!(json, r#"{"0":"DIRECT","2":"INDIRECT"}"#);
        let back: TaintLabel = serde_json::from_str(&json).unwrap();
        assert_eq!(back, l);
        assert!(serde_json::from_str::<TaintLabel>(r#"{"x":"DIRECT"}"#).is_err());
    }

    #[test]
    fn shadow_store_overwrites() {
        let mut shadow = Shadow::new(16);
        let t = label(&[(0, Direct)]);
        shadow.store(0, 4, t);
        assert_eq!(shadow.label(3), t);
        assert!(shadow.label(4).is_empty());
        assert_eq!(shadow.tainted_bytes(), 4);
        shadow.store(2, 4, TaintLabel::EMPTY);
        assert_eq!(shadow.tainted_bytes(), 2);
        assert_eq!(shadow.peak_tainted_bytes(), 4);
        assert!(shadow.label(2).is_empty());
    }

    #[test]
    fn shadow_store_under_context() {
        let mut shadow = Shadow::new(8);
        let ctx = ControlContext::CLEAN.under(label(&[(1, Direct)]));
        shadow.store(0, 4, assign_label(TaintLabel::EMPTY, &ctx, None));
        assert_eq!(shadow.load(0, 4), label(&[(1, Indirect)]));
    }

    #[test]
    fn shadow_load_unions() {
        let mut shadow = Shadow::new(16);
        shadow.store(0, 1, label(&[(0, Direct)]));
        assert_eq!(shadow.load(0, 4), label(&[(0, Direct)]));
        shadow.store(4, 4, label(&[(1, Indirect)]));
        assert!(shadow.load(8, 1).is_empty());
        assert_eq!(
            shadow.load(2, 4),
            label(&[(1, Indirect)]),
            "bytes 2..6 only see the second region"
        );
        assert_eq!(
            shadow.load(0, 8),
            label(&[(0, Direct), (1, Indirect)])
        );
    }

    fn arb_level() -> impl Strategy<Value = TaintLevel> {
        prop_oneof![
            Just(TaintLevel::None),
            Just(TaintLevel::Indirect),
            Just(TaintLevel::Direct)
        ]
    }

    fn arb_label() -> impl Strategy<Value = TaintLabel> {
        proptest::collection::vec((0usize..MAX_SOURCES, arb_level()), 0..8)
            .prop_map(|v| v.into_iter().fold(TaintLabel::EMPTY, |l, (i, lv)| l.with(s(i), lv)))
    }

    proptest! {
        #[test]
        fn merge_laws(a in arb_label(), b in arb_label(), c in arb_label()) {
            prop_assert_eq!(a.merge(b), b.merge(a));
            prop_assert_eq!(a.merge(b).merge(c), a.merge(b.merge(c)));
            prop_assert_eq!(a.merge(a), a);
            prop_assert_eq!(a.merge(TaintLabel::EMPTY), a);
        }

        #[test]
        fn merge_is_pointwise_max(a in arb_label(), b in arb_label(), i in 0usize..MAX_SOURCES) {
            let id = s(i);
            prop_assert_eq!(a.merge(b).level(id), a.level(id).max(b.level(id)));
        }

        #[test]
        fn cap_laws(a in arb_label(), i in 0usize..MAX_SOURCES) {
            let id = s(i);
            prop_assert_eq!(a.cap_indirect().cap_indirect(), a.cap_indirect());
            prop_assert!(a.cap_indirect().level(id) <= a.level(id));
            prop_assert!(a.cap_indirect().level(id) <= TaintLevel::Indirect);
            prop_assert_eq!(a.cap_indirect().level(id) == TaintLevel::None, a.level(id) == TaintLevel::None);
        }

        #[test]
        fn assign_is_bounded(v in arb_label(), ctx in arb_label(), addr in arb_label(), i in 0usize..MAX_SOURCES) {
            let id = s(i);
            let context = ControlContext::CLEAN.under(ctx);
            let out = assign_label(v, &context, Some(addr));
            prop_assert!(out.level(id) >= v.level(id));
            prop_assert!(out.level(id) >= ctx.cap_indirect().level(id));
            prop_assert!(out.level(id) >= addr.cap_indirect().level(id));
            prop_assert!(context.label().level(id) <= TaintLevel::Indirect);
        }

        #[test]
        fn shadow_counter_matches_scan(ops in proptest::collection::vec((0usize..60, 1usize..5, arb_label()), 0..40)) {
            let mut shadow = Shadow::new(64);
            for (addr, width, l) in ops {
                shadow.store(addr, width, l);
                let scanned = shadow.labels().iter().filter(|l| !l.is_empty()).count();
                prop_assert_eq!(shadow.tainted_bytes(), scanned);
                prop_assert!(shadow.peak_tainted_bytes() >= scanned);
            }
        }
    }
}
