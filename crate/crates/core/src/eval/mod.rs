//! Channels, joint distributions and numeric evaluation of bound sets.

pub mod channel;
pub mod joint;
pub mod sample;

use rayon::prelude::*;
use thiserror::Error;

use crate::bounds::{BoundSet, Formulation};
use crate::polytope::{HPolytope, Halfspace, PolytopeError};

pub use channel::{Channel, ChannelFile};
pub use joint::{
    build_joint, mutual_info, Axis, Component, ComponentPmfs, FactorizationSchema, JointDistribution, SchemaMode,
};
pub use sample::sample_distributions;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("invalid channel: {0}")]
    InvalidChannel(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("arity mismatch: {0}")]
    ArityMismatch(String),
    #[error("channel does not match network: {0}")]
    ChannelMismatch(String),
    #[error("negative or non-finite probability: {0}")]
    NegativeEntry(String),
    #[error("not normalized: {0}")]
    NotNormalized(String),
    #[error("joint table would have {0} entries, above the limit of {max}", max = joint::MAX_JOINT_ENTRIES)]
    TooLarge(usize),
    #[error("unknown variable {0}")]
    UnknownVariable(String),
    #[error("{formulation} bounds cannot be evaluated on a {mode:?} joint")]
    SchemaMismatch { formulation: Formulation, mode: SchemaMode },
    #[error(transparent)]
    Polytope(#[from] PolytopeError),
}

/// Instantiates every bound on `joint`: one half-space per bound, with
/// coefficient 1 on each rate of the lhs and rhs the sum of its mutual
/// informations (clamped at 0 against rounding).
///
/// Independent auxiliaries are a special case of superposition, so inner and
/// compact bounds are accepted on either kind of joint; Han and cut-set
/// bounds need independent auxiliaries.
pub fn evaluate_bounds(bounds: &BoundSet, joint: &JointDistribution) -> Result<HPolytope, EvalError> {
    if let Some(mode) = joint.mode() {
        if bounds.formulation().uses_outer_auxiliaries() && mode != SchemaMode::OuterIndependent {
            return Err(EvalError::SchemaMismatch {
                formulation: bounds.formulation(),
                mode,
            });
        }
    }
    let dim = bounds.spec().len();
    let halfspaces = bounds
        .bounds()
        .iter()
        .map(|b| {
            let mut coeffs = vec![0.0; dim];
            for i in b.lhs.iter() {
                coeffs[i] = 1.0;
            }
            let mut rhs = 0.0;
            for t in &b.rhs {
                rhs += mutual_info(joint, t)?;
            }
            Ok(Halfspace {
                coeffs,
                rhs: rhs.max(0.0),
            })
        })
        .collect::<Result<_, EvalError>>()?;
    Ok(HPolytope::new(dim, halfspaces)?)
}

/// [`evaluate_bounds`] over many joints, in parallel, preserving order.
pub fn evaluate_all(bounds: &BoundSet, joints: &[JointDistribution]) -> Result<Vec<HPolytope>, EvalError> {
    joints.par_iter().map(|j| evaluate_bounds(bounds, j)).collect()
}
