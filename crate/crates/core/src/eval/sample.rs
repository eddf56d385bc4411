use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use rayon::prelude::*;

use super::channel::{unflatten, Channel};
use super::joint::{build_joint, ComponentPmfs, FactorizationSchema, JointDistribution};
use super::EvalError;

/// Every conditional row uniform.
pub fn uniform_components(schema: &FactorizationSchema) -> ComponentPmfs {
    schema
        .components()
        .iter()
        .enumerate()
        .map(|(c, comp)| vec![1.0 / comp.alphabet as f64; schema.table_len(c)])
        .collect()
}

/// Point-mass conditionals: a component with parents takes the value
/// `(Σ parent symbols) mod alphabet`. Parentless components stay uniform so
/// the corner still carries information.
pub fn deterministic_components(schema: &FactorizationSchema) -> ComponentPmfs {
    let comps = schema.components();
    comps
        .iter()
        .enumerate()
        .map(|(c, comp)| {
            if comp.parents.is_empty() {
                return vec![1.0 / comp.alphabet as f64; comp.alphabet];
            }
            let parent_dims: Vec<usize> = comp.parents.iter().map(|&p| comps[p].alphabet).collect();
            let rows = schema.parent_rows(c);
            let mut table = vec![0.0; rows * comp.alphabet];
            let mut sym = vec![0; parent_dims.len()];
            for r in 0..rows {
                unflatten(r, &parent_dims, &mut sym);
                let v = sym.iter().sum::<usize>() % comp.alphabet;
                table[r * comp.alphabet + v] = 1.0;
            }
            table
        })
        .collect()
}

/// A uniform draw from the probability simplex (symmetric Dirichlet(1)),
/// via normalized unit exponentials.
pub fn dirichlet_one<R: Rng + ?Sized>(rng: &mut R, k: usize) -> Vec<f64> {
    if k == 1 {
        return vec![1.0];
    }
    let draws: Vec<f64> = (0..k).map(|_| rng.sample::<f64, _>(Exp1)).collect();
    let sum: f64 = draws.iter().sum();
    draws.into_iter().map(|d| d / sum).collect()
}

pub fn random_components<R: Rng + ?Sized>(schema: &FactorizationSchema, rng: &mut R) -> ComponentPmfs {
    schema
        .components()
        .iter()
        .enumerate()
        .map(|(c, comp)| {
            (0..schema.parent_rows(c))
                .flat_map(|_| dirichlet_one(rng, comp.alphabet))
                .collect()
        })
        .collect()
}

/// Component tables for the first `n` entries of the sequence
/// `[uniform, deterministic, random_0, random_1, ...]`.
///
/// The sequence depends only on the schema and `seed`, so a smaller `n` always
/// yields a prefix of a larger one.
pub fn sample_components(schema: &FactorizationSchema, n: usize, seed: u64) -> Vec<ComponentPmfs> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| match i {
            0 => uniform_components(schema),
            1 => deterministic_components(schema),
            _ => random_components(schema, &mut rng),
        })
        .collect()
}

/// Joint distributions for [`sample_components`], built in parallel and
/// returned in sequence order.
pub fn sample_distributions(
    schema: &FactorizationSchema,
    channel: &Channel,
    n: usize,
    seed: u64,
) -> Result<Vec<JointDistribution>, EvalError> {
    sample_components(schema, n, seed)
        .par_iter()
        .map(|pmfs| build_joint(schema, channel, pmfs))
        .collect()
}
