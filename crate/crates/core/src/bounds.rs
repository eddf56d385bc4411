//! Symbolic rate bounds.
//!
//! Every bound has the shape `Σ_{m ∈ lhs} R_m <= Σ_t I(Y_z; targets | conditioning)`.
//! Four families are generated:
//!
//! * [`han_bounds`]: one bound per nonempty message set of a MAC, conditioned on
//!   the independent auxiliaries of the complement.
//! * [`compact_bounds`]: the Han bounds restricted to closed message sets, over
//!   superposition-coded auxiliaries.
//! * [`cutset_bounds`]: one bound per message set and receiver partition, for
//!   any number of receivers.
//! * [`inner_bounds`]: the all-decode superposition inner bound on the
//!   all-common reduced network, one bound per closed set and decoder.

use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::network::{
    all_common_reduction, common_transmitters, enumerate_closed_sets, enumerate_partitions,
    involved_receivers, MessageId, MessageSet, NetworkSpec, Partition, Reduction,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BoundError {
    #[error("formulation requires a single-receiver network (got {0} receivers)")]
    NotMac(usize),
}

/// A random variable appearing in a mutual-information term.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum VariableId {
    /// Channel input `X_k`.
    Input(usize),
    /// Independent auxiliary `U_{i->j}` of the outer-bound factorization.
    AuxOuter(MessageId),
    /// Superposition auxiliary `U'_{i->j}` of the inner-bound factorization.
    AuxInner(MessageId),
}

impl VariableId {
    pub fn is_auxiliary(&self) -> bool {
        !matches!(self, VariableId::Input(_))
    }

    pub fn message(&self) -> Option<&MessageId> {
        match self {
            VariableId::Input(_) => None,
            VariableId::AuxOuter(m) | VariableId::AuxInner(m) => Some(m),
        }
    }
}

impl fmt::Display for VariableId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VariableId::Input(k) => write!(f, "X{k}"),
            VariableId::AuxOuter(m) => write!(f, "U[{m}]"),
            VariableId::AuxInner(m) => write!(f, "U'[{m}]"),
        }
    }
}

/// `I(Y_output; targets | conditioning)`.
///
/// Sets are kept sorted, so two terms with permuted variables compare equal.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MiTerm {
    pub output: usize,
    pub targets: BTreeSet<VariableId>,
    pub conditioning: BTreeSet<VariableId>,
}

impl MiTerm {
    pub fn new(
        output: usize,
        targets: impl IntoIterator<Item = VariableId>,
        conditioning: impl IntoIterator<Item = VariableId>,
    ) -> Self {
        MiTerm {
            output,
            targets: targets.into_iter().collect(),
            conditioning: conditioning.into_iter().collect(),
        }
    }

    /// Auxiliaries never appear on both sides. Inputs can: the cut-set family
    /// keeps every input as a target while conditioning on the inputs of
    /// `T_{S̄^z}`, which evaluates to the same value as dropping them from the
    /// targets (and to zero when every input is conditioned on).
    pub fn is_well_formed(&self) -> bool {
        self.targets
            .intersection(&self.conditioning)
            .all(|v| !v.is_auxiliary())
    }

    pub fn variables(&self) -> impl Iterator<Item = &VariableId> {
        self.targets.iter().chain(self.conditioning.iter())
    }
}

fn join_vars(vars: &BTreeSet<VariableId>) -> String {
    vars.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")
}

impl fmt::Display for MiTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.conditioning.is_empty() {
            write!(f, "I(Y{}; {})", self.output, join_vars(&self.targets))
        } else {
            write!(
                f,
                "I(Y{}; {} | {})",
                self.output,
                join_vars(&self.targets),
                join_vars(&self.conditioning)
            )
        }
    }
}

/// Which family a bound belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Formulation {
    Han,
    Compact,
    Cutset,
    Inner,
}

impl Formulation {
    pub fn name(self) -> &'static str {
        match self {
            Formulation::Han => "han",
            Formulation::Compact => "compact",
            Formulation::Cutset => "cutset",
            Formulation::Inner => "inner",
        }
    }

    /// Han and cut-set bounds use independent auxiliaries.
    pub fn uses_outer_auxiliaries(self) -> bool {
        matches!(self, Formulation::Han | Formulation::Cutset)
    }
}

impl fmt::Display for Formulation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Formulation {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "han" => Ok(Formulation::Han),
            "compact" => Ok(Formulation::Compact),
            "cutset" => Ok(Formulation::Cutset),
            "inner" => Ok(Formulation::Inner),
            other => Err(format!(
                "unknown formulation '{other}' (expected han, compact, cutset or inner)"
            )),
        }
    }
}

/// Where a bound came from.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Provenance {
    Subset(MessageSet),
    Partition(Partition),
    Decoder { set: MessageSet, z: usize },
}

#[derive(Debug, Clone)]
pub struct RateBound {
    pub lhs: MessageSet,
    pub rhs: Vec<MiTerm>,
    pub tag: Formulation,
    pub provenance: Provenance,
}

impl RateBound {
    /// Equality of `(lhs, rhs)` after canonicalization; ignores tag and provenance.
    pub fn same_content(&self, other: &RateBound) -> bool {
        self.content_key() == other.content_key()
    }

    pub fn content_key(&self) -> (MessageSet, Vec<MiTerm>) {
        let mut rhs = self.rhs.clone();
        rhs.sort();
        (self.lhs, rhs)
    }

    pub fn render(&self, spec: &NetworkSpec) -> String {
        let lhs: Vec<String> = self
            .lhs
            .iter()
            .map(|i| format!("R[{}]", spec.message(i)))
            .collect();
        let rhs: Vec<String> = self.rhs.iter().map(|t| t.to_string()).collect();
        format!("{} <= {}", lhs.join("+"), rhs.join(" + "))
    }
}

/// Sorts the rhs terms into canonical order. Idempotent.
pub fn canonicalize(bound: &RateBound) -> RateBound {
    let mut out = bound.clone();
    out.rhs.sort();
    out
}

/// An ordered, deduplicated list of bounds over one network.
#[derive(Debug, Clone)]
pub struct BoundSet {
    spec: NetworkSpec,
    formulation: Formulation,
    bounds: Vec<RateBound>,
    reduction: Option<Reduction>,
}

impl BoundSet {
    fn from_generated(
        spec: NetworkSpec,
        formulation: Formulation,
        generated: Vec<RateBound>,
        reduction: Option<Reduction>,
    ) -> Self {
        let mut seen = HashSet::new();
        let bounds = generated
            .iter()
            .map(canonicalize)
            .filter(|b| seen.insert(b.content_key()))
            .collect();
        BoundSet {
            spec,
            formulation,
            bounds,
            reduction,
        }
    }

    /// The network whose messages the bound left-hand sides refer to. For the
    /// inner formulation this is the all-common reduced network.
    pub fn spec(&self) -> &NetworkSpec {
        &self.spec
    }

    pub fn formulation(&self) -> Formulation {
        self.formulation
    }

    pub fn bounds(&self) -> &[RateBound] {
        &self.bounds
    }

    pub fn len(&self) -> usize {
        self.bounds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bounds.is_empty()
    }

    /// Present for inner bounds: maps reduced rates back to original rates.
    pub fn reduction(&self) -> Option<&Reduction> {
        self.reduction.as_ref()
    }

    /// Rewrites inner bounds in the original rates: each reduced rate becomes
    /// the sum of the rates merged into it, and each `U'_{i->j_all}` becomes
    /// the collection `{U_{i->j}}` of the messages it carries. Other bound sets
    /// are returned unchanged.
    pub fn re_expressed(&self) -> BoundSet {
        let Some(red) = &self.reduction else {
            return self.clone();
        };
        let original = red.original();
        let map_var = |v: &VariableId| -> Vec<VariableId> {
            match v {
                VariableId::AuxInner(m) => {
                    let g = red
                        .reduced()
                        .position(m)
                        .expect("auxiliary refers to a reduced message");
                    red.group(g)
                        .iter()
                        .map(|i| VariableId::AuxOuter(original.message(i).clone()))
                        .collect()
                }
                other => vec![other.clone()],
            }
        };
        let generated = self
            .bounds
            .iter()
            .map(|b| RateBound {
                lhs: red.expand(b.lhs),
                rhs: b
                    .rhs
                    .iter()
                    .map(|t| MiTerm {
                        output: t.output,
                        targets: t.targets.iter().flat_map(map_var).collect(),
                        conditioning: t.conditioning.iter().flat_map(map_var).collect(),
                    })
                    .collect(),
                tag: b.tag,
                provenance: match &b.provenance {
                    Provenance::Decoder { set, z } => Provenance::Decoder {
                        set: red.expand(*set),
                        z: *z,
                    },
                    p => p.clone(),
                },
            })
            .collect();
        BoundSet::from_generated(original.clone(), self.formulation, generated, None)
    }

    /// One canonical line per bound.
    pub fn lines(&self) -> Vec<String> {
        self.bounds.iter().map(|b| b.render(&self.spec)).collect()
    }
}

impl fmt::Display for BoundSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for line in self.lines() {
            writeln!(f, "{line}")?;
        }
        Ok(())
    }
}

fn all_inputs(spec: &NetworkSpec) -> Vec<VariableId> {
    (1..=spec.n_tx()).map(VariableId::Input).collect()
}

fn aux_of(spec: &NetworkSpec, set: MessageSet, inner: bool) -> Vec<VariableId> {
    set.iter()
        .map(|i| {
            let m = spec.message(i).clone();
            if inner {
                VariableId::AuxInner(m)
            } else {
                VariableId::AuxOuter(m)
            }
        })
        .collect()
}

fn require_mac(spec: &NetworkSpec) -> Result<(), BoundError> {
    if spec.is_mac() {
        Ok(())
    } else {
        Err(BoundError::NotMac(spec.n_rx()))
    }
}

fn nonempty_subsets(len: usize) -> impl Iterator<Item = MessageSet> {
    (1..=MessageSet::full(len).bits()).map(MessageSet::from_bits)
}

/// `Σ_S R <= I(Y; all X | {U_m, m ∉ S})` for every nonempty `S` of a MAC.
pub fn han_bounds(spec: &NetworkSpec) -> Result<BoundSet, BoundError> {
    require_mac(spec)?;
    let m = spec.len();
    let mut sets: Vec<MessageSet> = nonempty_subsets(m).collect();
    sets.sort_by_key(|s| s.sort_key());
    let generated = sets
        .into_iter()
        .map(|s| RateBound {
            lhs: s,
            rhs: vec![MiTerm::new(1, all_inputs(spec), aux_of(spec, s.complement(m), false))],
            tag: Formulation::Han,
            provenance: Provenance::Subset(s),
        })
        .collect();
    Ok(BoundSet::from_generated(spec.clone(), Formulation::Han, generated, None))
}

/// Han bounds restricted to closed message sets, with superposition auxiliaries.
pub fn compact_bounds(spec: &NetworkSpec) -> Result<BoundSet, BoundError> {
    require_mac(spec)?;
    let m = spec.len();
    let generated = enumerate_closed_sets(spec)
        .into_iter()
        .map(|s| RateBound {
            lhs: s,
            rhs: vec![MiTerm::new(1, all_inputs(spec), aux_of(spec, s.complement(m), true))],
            tag: Formulation::Compact,
            provenance: Provenance::Subset(s),
        })
        .collect();
    Ok(BoundSet::from_generated(spec.clone(), Formulation::Compact, generated, None))
}

/// The cut-set term for one partition: one mutual information per receiver
/// with a nonempty block, conditioned on the inputs of `T_{S̄^z}` and the
/// auxiliaries of `S̄^z`, where `S̄^z` is taken against all messages.
pub fn cutset_terms(spec: &NetworkSpec, partition: &Partition) -> Vec<MiTerm> {
    let m = spec.len();
    partition
        .receivers()
        .into_iter()
        .map(|z| {
            let complement = partition.block(z).complement(m);
            let inputs = if complement.is_empty() {
                BTreeSet::new()
            } else {
                common_transmitters(spec, complement).expect("nonempty complement")
            };
            let conditioning = inputs
                .into_iter()
                .map(VariableId::Input)
                .chain(aux_of(spec, complement, false));
            MiTerm::new(z, all_inputs(spec), conditioning)
        })
        .collect()
}

/// Cut-set outer bound: every nonempty `S` and every partition of `S`.
pub fn cutset_bounds(spec: &NetworkSpec) -> BoundSet {
    let mut sets: Vec<MessageSet> = nonempty_subsets(spec.len()).collect();
    sets.sort_by_key(|s| s.sort_key());
    let mut generated = Vec::new();
    for s in sets {
        debug_assert!(involved_receivers(spec, s).is_ok());
        for p in enumerate_partitions(spec, s) {
            generated.push(RateBound {
                lhs: s,
                rhs: cutset_terms(spec, &p),
                tag: Formulation::Cutset,
                provenance: Provenance::Partition(p),
            });
        }
    }
    BoundSet::from_generated(spec.clone(), Formulation::Cutset, generated, None)
}

/// The single inner-bound term for a closed set `S'` of the reduced network
/// decoded at `z`.
pub fn inner_term(reduced: &NetworkSpec, closed: MessageSet, z: usize) -> MiTerm {
    MiTerm::new(z, all_inputs(reduced), aux_of(reduced, closed.complement(reduced.len()), true))
}

/// Superposition inner bound on the all-common reduction of `spec`: every
/// closed `S'` and every decoder `z`.
pub fn inner_bounds(spec: &NetworkSpec) -> BoundSet {
    let red = all_common_reduction(spec);
    let reduced = red.reduced().clone();
    let mut generated = Vec::new();
    for s in enumerate_closed_sets(&reduced) {
        for z in 1..=reduced.n_rx() {
            generated.push(RateBound {
                lhs: s,
                rhs: vec![inner_term(&reduced, s, z)],
                tag: Formulation::Inner,
                provenance: Provenance::Decoder { set: s, z },
            });
        }
    }
    BoundSet::from_generated(reduced, Formulation::Inner, generated, Some(red))
}

/// Dispatches on the formulation.
pub fn generate(spec: &NetworkSpec, formulation: Formulation) -> Result<BoundSet, BoundError> {
    match formulation {
        Formulation::Han => han_bounds(spec),
        Formulation::Compact => compact_bounds(spec),
        Formulation::Cutset => Ok(cutset_bounds(spec)),
        Formulation::Inner => Ok(inner_bounds(spec)),
    }
}
