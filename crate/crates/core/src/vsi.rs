//! Certification of the very-strong-interference regime.
//!
//! Every closed set `S'` of the all-common reduction and every receiver `z`
//! give one obligation. An obligation is discharged when the inner-bound
//! constraint for `(S', z)` is either matched by an outer bound or implied by
//! other inner-bound constraints. Conditions that quantify over all
//! distributions are checked on a fixed, seeded list of samples, so
//! "certified" means "not falsified on those samples".

use std::fmt::{self, Write as _};
use std::sync::OnceLock;

use rayon::prelude::*;
use thiserror::Error;

use crate::bounds::{inner_bounds, MiTerm, VariableId};
use crate::eval::sample::sample_components;
use crate::eval::{
    build_joint, evaluate_all, mutual_info, Channel, EvalError, FactorizationSchema, JointDistribution,
};
use crate::network::{
    all_common_reduction, enumerate_closed_sets, enumerate_partitions, MessageSet, NetworkSpec, Partition,
    Reduction,
};
use crate::polytope::{HPolytope, Halfspace, PolytopeError, RegionEstimate};

/// Absolute slack on every sampled inequality.
pub const VSI_TOL: f64 = 1e-9;

/// Largest collection searched for condition iii.
pub const DEFAULT_K_MAX: usize = 2;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum VsiError {
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Polytope(#[from] PolytopeError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VsiSettings {
    pub samples: usize,
    pub seed: u64,
    pub k_max: usize,
    pub tol: f64,
}

impl Default for VsiSettings {
    fn default() -> Self {
        VsiSettings {
            samples: 200,
            seed: 42,
            k_max: DEFAULT_K_MAX,
            tol: VSI_TOL,
        }
    }
}

/// One `(S, z)` pair to discharge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Obligation {
    /// Closed set of the reduced network.
    pub origin: MessageSet,
    /// `origin` expanded to the original messages.
    pub set: MessageSet,
    pub z: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ConditionKind {
    I,
    Ii,
    Iii,
}

impl fmt::Display for ConditionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ConditionKind::I => "i",
            ConditionKind::Ii => "ii",
            ConditionKind::Iii => "iii",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Witness {
    /// Condition i: the whole set decoded at `z`.
    Trivial(Partition),
    /// Condition ii: a partition of `S` and the receiver `z'` whose single
    /// bound dominates the cut-set sum.
    Partition { partition: Partition, z_prime: usize },
    /// Condition iii: pairs `(S̃', z̃)` of reduced closed sets and receivers.
    Collection(Vec<(MessageSet, usize)>),
}

impl Witness {
    pub fn kind(&self) -> ConditionKind {
        match self {
            Witness::Trivial(_) => ConditionKind::I,
            Witness::Partition { .. } => ConditionKind::Ii,
            Witness::Collection(_) => ConditionKind::Iii,
        }
    }

    /// Compact, space-free rendering. Collections use reduced messages.
    pub fn render(&self, spec: &NetworkSpec, reduced: &NetworkSpec) -> String {
        match self {
            Witness::Trivial(p) => p.render(spec),
            Witness::Partition { partition, z_prime } => format!("{};z'={}", partition.render(spec), z_prime),
            Witness::Collection(pairs) => pairs
                .iter()
                .map(|(s, z)| format!("{}@{}", reduced.render_set(*s), z))
                .collect::<Vec<_>>()
                .join("+"),
        }
    }
}

/// Values of one sampled inequality `lhs <= rhs`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evidence {
    pub sample: usize,
    pub lhs: f64,
    pub rhs: f64,
}

impl Evidence {
    pub fn violated(&self, tol: f64) -> bool {
        self.lhs > self.rhs + tol
    }
}

/// A candidate witness and a sample on which it fails.
#[derive(Debug, Clone, PartialEq)]
pub struct Refutation {
    pub witness: Witness,
    pub evidence: Evidence,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Certified,
    /// Every candidate has a violating sample.
    Falsified,
    /// No candidate to try.
    Exhausted,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConditionCheck {
    pub kind: ConditionKind,
    pub verdict: Verdict,
    /// The candidate that passed, when certified.
    pub witness: Option<Witness>,
    /// Per-sample values of the passing candidate.
    pub evidence: Vec<Evidence>,
    /// First violating sample of every rejected candidate.
    pub refutations: Vec<Refutation>,
}

impl ConditionCheck {
    fn exhausted(kind: ConditionKind) -> Self {
        ConditionCheck {
            kind,
            verdict: Verdict::Exhausted,
            witness: None,
            evidence: Vec::new(),
            refutations: Vec::new(),
        }
    }
}

/// The checks run for one obligation, in order, stopping at the first
/// success.
#[derive(Debug, Clone, PartialEq)]
pub struct ObligationReport {
    pub obligation: Obligation,
    pub checks: Vec<ConditionCheck>,
}

impl ObligationReport {
    pub fn decisive(&self) -> Option<&ConditionCheck> {
        self.checks.iter().find(|c| c.verdict == Verdict::Certified)
    }

    pub fn certified(&self) -> bool {
        self.decisive().is_some()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VSICertificate {
    pub settings: VsiSettings,
    pub spec: NetworkSpec,
    pub reduced: NetworkSpec,
    pub obligations: Vec<ObligationReport>,
}

impl VSICertificate {
    pub fn certified(&self) -> bool {
        self.obligations.iter().all(|o| o.certified())
    }

    pub fn failing(&self) -> impl Iterator<Item = &ObligationReport> {
        self.obligations.iter().filter(|o| !o.certified())
    }

    /// Header, one line per obligation, and a closing verdict line.
    pub fn report(&self) -> String {
        let s = &self.settings;
        let mut out = format!("seed={} samples={} k_max={} tol={:e}\n", s.seed, s.samples, s.k_max, s.tol);
        for o in &self.obligations {
            let ob = &o.obligation;
            write!(out, "S={} z={} -> ", self.spec.render_set(ob.set), ob.z).expect("write to string");
            match o.decisive() {
                Some(c) => {
                    let w = c.witness.as_ref().expect("certified check has a witness");
                    writeln!(out, "condition={} witness={}", c.kind, w.render(&self.spec, &self.reduced))
                }
                None => {
                    let refuted: Vec<String> = o
                        .checks
                        .iter()
                        .filter_map(|c| {
                            c.refutations.first().map(|r| {
                                format!(
                                    "{}@sample{}(lhs={:.6},rhs={:.6})",
                                    c.kind, r.evidence.sample, r.evidence.lhs, r.evidence.rhs
                                )
                            })
                        })
                        .collect();
                    let refuted = if refuted.is_empty() {
                        "none".to_string()
                    } else {
                        refuted.join(",")
                    };
                    writeln!(out, "condition=FAILED witness=none refuted={refuted}")
                }
            }
            .expect("write to string");
        }
        let failing = self.failing().count();
        if failing == 0 {
            out.push_str("verdict=certified\n");
        } else {
            writeln!(out, "verdict=not-certified failing={failing}").expect("write to string");
        }
        out
    }
}

/// Obligations in closed-set order, receivers ascending within a set.
pub fn obligations(spec: &NetworkSpec) -> Vec<Obligation> {
    let red = all_common_reduction(spec);
    enumerate_closed_sets(red.reduced())
        .into_iter()
        .flat_map(|origin| {
            let set = red.expand(origin);
            (1..=spec.n_rx()).map(move |z| Obligation { origin, set, z })
        })
        .collect()
}

/// Exact: `z` decodes every message of `S`.
pub fn check_condition_i(spec: &NetworkSpec, ob: &Obligation) -> ConditionCheck {
    let holds = ob.set.iter().all(|m| spec.message(m).rx.contains(&ob.z));
    if holds {
        ConditionCheck {
            kind: ConditionKind::I,
            verdict: Verdict::Certified,
            witness: Some(Witness::Trivial(Partition::single_block(ob.set, ob.z))),
            evidence: Vec::new(),
            refutations: Vec::new(),
        }
    } else {
        ConditionCheck::exhausted(ConditionKind::I)
    }
}

fn all_inputs(spec: &NetworkSpec) -> Vec<VariableId> {
    (1..=spec.n_tx()).map(VariableId::Input).collect()
}

fn outer_aux(spec: &NetworkSpec, set: MessageSet) -> Vec<VariableId> {
    set.iter()
        .map(|i| VariableId::AuxOuter(spec.message(i).clone()))
        .collect()
}

/// The two sides of a witness's inequality `Σ lhs <= Σ rhs`.
///
/// Condition ii: the cut-set sum `Σ_z I(Y_z; X | U of S̄^z)` against
/// `I(Y_z'; X | U of S̄`). Condition iii: the sum of the collection's inner
/// terms against the obligation's own inner term, over the reduced network.
pub fn witness_terms(spec: &NetworkSpec, ob: &Obligation, witness: &Witness) -> (Vec<MiTerm>, Vec<MiTerm>) {
    let m = spec.len();
    match witness {
        Witness::Trivial(_) => (Vec::new(), Vec::new()),
        Witness::Partition { partition, z_prime } => {
            let lhs = partition
                .receivers()
                .into_iter()
                .map(|z| MiTerm::new(z, all_inputs(spec), outer_aux(spec, partition.block(z).complement(m))))
                .collect();
            let rhs = MiTerm::new(*z_prime, all_inputs(spec), outer_aux(spec, ob.set.complement(m)));
            (lhs, vec![rhs])
        }
        Witness::Collection(pairs) => {
            let red = all_common_reduction(spec);
            let reduced = red.reduced();
            let lhs = pairs
                .iter()
                .map(|&(s, z)| crate::bounds::inner_term(reduced, s, z))
                .collect();
            (lhs, vec![crate::bounds::inner_term(reduced, ob.origin, ob.z)])
        }
    }
}

fn sum_mi(joint: &JointDistribution, terms: &[MiTerm]) -> Result<f64, EvalError> {
    terms.iter().map(|t| mutual_info(joint, t)).sum()
}

/// Tries candidates in order; the first one with no violating sample wins.
fn search(
    kind: ConditionKind,
    spec: &NetworkSpec,
    ob: &Obligation,
    candidates: Vec<Witness>,
    samples: &[JointDistribution],
    tol: f64,
) -> Result<ConditionCheck, EvalError> {
    if candidates.is_empty() {
        return Ok(ConditionCheck::exhausted(kind));
    }
    let mut refutations = Vec::new();
    for witness in candidates {
        let (lhs, rhs) = witness_terms(spec, ob, &witness);
        let evidence: Vec<Evidence> = samples
            .par_iter()
            .enumerate()
            .map(|(sample, j)| {
                Ok(Evidence {
                    sample,
                    lhs: sum_mi(j, &lhs)?,
                    rhs: sum_mi(j, &rhs)?,
                })
            })
            .collect::<Result<_, EvalError>>()?;
        match evidence.iter().find(|e| e.violated(tol)) {
            Some(&e) => refutations.push(Refutation { witness, evidence: e }),
            None => {
                return Ok(ConditionCheck {
                    kind,
                    verdict: Verdict::Certified,
                    witness: Some(witness),
                    evidence,
                    refutations,
                })
            }
        }
    }
    Ok(ConditionCheck {
        kind,
        verdict: Verdict::Falsified,
        witness: None,
        evidence: Vec::new(),
        refutations,
    })
}

/// Candidates for condition ii: every partition of `S`, with `z' = z`.
pub fn condition_ii_candidates(spec: &NetworkSpec, ob: &Obligation) -> Vec<Witness> {
    enumerate_partitions(spec, ob.set)
        .into_iter()
        .map(|partition| Witness::Partition { partition, z_prime: ob.z })
        .collect()
}

/// `samples` must use independent auxiliaries over the original messages.
pub fn check_condition_ii(
    spec: &NetworkSpec,
    ob: &Obligation,
    samples: &[JointDistribution],
    tol: f64,
) -> Result<ConditionCheck, EvalError> {
    search(ConditionKind::Ii, spec, ob, condition_ii_candidates(spec, ob), samples, tol)
}

/// Candidates for condition iii: collections of 1..=`k_max` distinct pairs
/// `(S̃', z̃)` with every `S̃'` closed and containing `S'`, never including
/// `(S', z)` itself. Ordered by size, then lexicographically by pair.
pub fn condition_iii_candidates(spec: &NetworkSpec, ob: &Obligation, k_max: usize) -> Vec<Witness> {
    let red = all_common_reduction(spec);
    let pairs: Vec<(MessageSet, usize)> = enumerate_closed_sets(red.reduced())
        .into_iter()
        .filter(|s| ob.origin.is_subset(*s))
        .flat_map(|s| (1..=spec.n_rx()).map(move |z| (s, z)))
        .filter(|&p| p != (ob.origin, ob.z))
        .collect();
    let mut out = Vec::new();
    let mut chosen = Vec::new();
    for size in 1..=k_max.min(pairs.len()) {
        combinations(&pairs, size, 0, &mut chosen, &mut out);
    }
    out
}

fn combinations(
    pairs: &[(MessageSet, usize)],
    size: usize,
    start: usize,
    chosen: &mut Vec<(MessageSet, usize)>,
    out: &mut Vec<Witness>,
) {
    if chosen.len() == size {
        out.push(Witness::Collection(chosen.clone()));
        return;
    }
    for i in start..pairs.len() {
        chosen.push(pairs[i]);
        combinations(pairs, size, i + 1, chosen, out);
        chosen.pop();
    }
}

/// `samples` must use superposition auxiliaries over the reduced messages.
pub fn check_condition_iii(
    spec: &NetworkSpec,
    ob: &Obligation,
    samples: &[JointDistribution],
    k_max: usize,
    tol: f64,
) -> Result<ConditionCheck, EvalError> {
    search(
        ConditionKind::Iii,
        spec,
        ob,
        condition_iii_candidates(spec, ob, k_max),
        samples,
        tol,
    )
}

/// Schema under which a witness kind is sampled.
pub fn witness_schema(spec: &NetworkSpec, channel: &Channel, kind: ConditionKind) -> Result<FactorizationSchema, EvalError> {
    match kind {
        ConditionKind::Iii => FactorizationSchema::inner(all_common_reduction(spec).reduced(), channel.input_alphabets()),
        _ => FactorizationSchema::outer(spec, channel.input_alphabets()),
    }
}

/// Rebuilds sample `sample` of the seeded sequence from scratch and
/// re-evaluates `witness` on it.
pub fn replay(
    spec: &NetworkSpec,
    channel: &Channel,
    ob: &Obligation,
    witness: &Witness,
    sample: usize,
    seed: u64,
) -> Result<Evidence, EvalError> {
    let schema = witness_schema(spec, channel, witness.kind())?;
    let pmfs = sample_components(&schema, sample + 1, seed).pop().expect("at least one sample");
    let joint = build_joint(&schema, channel, &pmfs)?;
    let (lhs, rhs) = witness_terms(spec, ob, witness);
    Ok(Evidence {
        sample,
        lhs: sum_mi(&joint, &lhs)?,
        rhs: sum_mi(&joint, &rhs)?,
    })
}

/// Re-expresses a polytope over reduced rates in the original rates: a
/// reduced rate is the sum of the rates it merges.
pub fn lift(reduction: &Reduction, p: &HPolytope) -> Result<HPolytope, PolytopeError> {
    let original = reduction.original();
    HPolytope::new(
        original.len(),
        p.halfspaces()
            .iter()
            .map(|h| Halfspace {
                coeffs: (0..original.len()).map(|m| h.coeffs[reduction.group_of(m)]).collect(),
                rhs: h.rhs,
            })
            .collect(),
    )
}

/// Certificate plus, when every obligation is certified, the sampled inner
/// region in original rates.
#[derive(Debug, Clone)]
pub struct VsiOutcome {
    pub certificate: VSICertificate,
    pub region: Option<RegionEstimate>,
}

struct Samples<'a> {
    spec: &'a NetworkSpec,
    channel: &'a Channel,
    settings: VsiSettings,
    outer: OnceLock<Result<Vec<JointDistribution>, EvalError>>,
    inner: OnceLock<Result<Vec<JointDistribution>, EvalError>>,
}

impl Samples<'_> {
    fn get(&self, kind: ConditionKind) -> Result<&[JointDistribution], EvalError> {
        let cell = if kind == ConditionKind::Iii { &self.inner } else { &self.outer };
        cell.get_or_init(|| {
            let schema = witness_schema(self.spec, self.channel, kind)?;
            crate::eval::sample_distributions(&schema, self.channel, self.settings.samples, self.settings.seed)
        })
        .as_ref()
        .map(Vec::as_slice)
        .map_err(Clone::clone)
    }
}

fn check_dimensions(spec: &NetworkSpec, channel: &Channel) -> Result<(), EvalError> {
    if channel.n_tx() != spec.n_tx() || channel.n_rx() != spec.n_rx() {
        return Err(EvalError::ChannelMismatch(format!(
            "channel is {}x{} but network is {}x{}",
            channel.n_tx(),
            channel.n_rx(),
            spec.n_tx(),
            spec.n_rx()
        )));
    }
    Ok(())
}

/// Runs conditions i, ii, iii in order for every obligation.
pub fn certify(spec: &NetworkSpec, channel: &Channel, settings: VsiSettings) -> Result<VSICertificate, VsiError> {
    check_dimensions(spec, channel)?;
    let samples = Samples {
        spec,
        channel,
        settings,
        outer: OnceLock::new(),
        inner: OnceLock::new(),
    };
    let mut reports = Vec::new();
    for ob in obligations(spec) {
        let mut checks = vec![check_condition_i(spec, &ob)];
        if checks[0].verdict != Verdict::Certified {
            let ii = check_condition_ii(spec, &ob, samples.get(ConditionKind::Ii)?, settings.tol)?;
            let done = ii.verdict == Verdict::Certified;
            checks.push(ii);
            if !done {
                checks.push(check_condition_iii(
                    spec,
                    &ob,
                    samples.get(ConditionKind::Iii)?,
                    settings.k_max,
                    settings.tol,
                )?);
            }
        }
        reports.push(ObligationReport { obligation: ob, checks });
    }
    Ok(VSICertificate {
        settings,
        spec: spec.clone(),
        reduced: all_common_reduction(spec).reduced().clone(),
        obligations: reports,
    })
}

/// The sampled inner region (superposition samples over the reduced
/// network), in original rates.
pub fn inner_region(spec: &NetworkSpec, channel: &Channel, samples: usize, seed: u64) -> Result<RegionEstimate, VsiError> {
    check_dimensions(spec, channel)?;
    let bounds = inner_bounds(spec);
    let red = bounds.reduction().expect("inner bounds carry their reduction").clone();
    let schema = FactorizationSchema::inner(red.reduced(), channel.input_alphabets())?;
    let joints = crate::eval::sample_distributions(&schema, channel, samples, seed)?;
    let polys = evaluate_all(&bounds, &joints)?
        .iter()
        .map(|p| lift(&red, p))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(RegionEstimate::new(polys)?)
}

pub fn vsi_capacity(spec: &NetworkSpec, channel: &Channel, settings: VsiSettings) -> Result<VsiOutcome, VsiError> {
    let certificate = certify(spec, channel, settings)?;
    let region = if certificate.certified() {
        Some(inner_region(spec, channel, settings.samples, settings.seed)?)
    } else {
        None
    };
    Ok(VsiOutcome { certificate, region })
}
