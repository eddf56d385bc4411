use std::collections::BTreeSet;

use crate::bounds::{MiTerm, VariableId};
use crate::network::NetworkSpec;

use super::channel::{product, unflatten, Channel, ROW_TOLERANCE};
use super::EvalError;

/// Largest dense joint table we are willing to build.
pub const MAX_JOINT_ENTRIES: usize = 10_000_000;

/// Tolerance on the total mass of a built joint.
pub const JOINT_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SchemaMode {
    /// `Π P(U_m) Π_k P(X_k | U_m : k ∈ i_m)`.
    OuterIndependent,
    /// `Π P(U'_m | U'_l : i_l ⊋ i_m) Π_k P(X_k | U'_m : k ∈ i_m)`.
    InnerSuperposition,
}

/// One factor of the joint: a variable and the earlier components it is
/// conditioned on.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Component {
    pub var: VariableId,
    pub alphabet: usize,
    pub parents: Vec<usize>,
}

/// How the joint of auxiliaries and inputs factorizes for a network.
///
/// Components are ordered so that every parent precedes its children:
/// auxiliaries first, then the inputs `X_1..X_T`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FactorizationSchema {
    mode: SchemaMode,
    spec: NetworkSpec,
    components: Vec<Component>,
}

impl FactorizationSchema {
    /// Independent auxiliaries, one per message of `spec`.
    pub fn outer(spec: &NetworkSpec, input_alphabets: &[usize]) -> Result<Self, EvalError> {
        Self::build(SchemaMode::OuterIndependent, spec, input_alphabets)
    }

    /// Superposition auxiliaries, one per message of `spec` (normally the
    /// all-common reduction). A codeword is conditioned on every codeword
    /// whose transmitter set strictly contains its own.
    pub fn inner(spec: &NetworkSpec, input_alphabets: &[usize]) -> Result<Self, EvalError> {
        Self::build(SchemaMode::InnerSuperposition, spec, input_alphabets)
    }

    fn build(mode: SchemaMode, spec: &NetworkSpec, input_alphabets: &[usize]) -> Result<Self, EvalError> {
        if input_alphabets.len() != spec.n_tx() {
            return Err(EvalError::ArityMismatch(format!(
                "{} input alphabets for {} transmitters",
                input_alphabets.len(),
                spec.n_tx()
            )));
        }
        let mut order: Vec<usize> = (0..spec.len()).collect();
        if mode == SchemaMode::InnerSuperposition {
            // superset first
            order.sort_by_key(|&i| (std::cmp::Reverse(spec.message(i).tx.len()), i));
        }
        let mut components: Vec<Component> = Vec::new();
        for (slot, &i) in order.iter().enumerate() {
            let m = spec.message(i);
            let alphabet = m.tx.iter().map(|&k| input_alphabets[k - 1]).product();
            let (var, parents) = match mode {
                SchemaMode::OuterIndependent => (VariableId::AuxOuter(m.clone()), Vec::new()),
                SchemaMode::InnerSuperposition => {
                    let parents = order[..slot]
                        .iter()
                        .enumerate()
                        .filter(|(_, &l)| {
                            let tl = &spec.message(l).tx;
                            tl.len() > m.tx.len() && m.tx.is_subset(tl)
                        })
                        .map(|(pos, _)| pos)
                        .collect();
                    (VariableId::AuxInner(m.clone()), parents)
                }
            };
            components.push(Component {
                var,
                alphabet,
                parents,
            });
        }
        let n_aux = components.len();
        for k in 1..=spec.n_tx() {
            let parents = (0..n_aux)
                .filter(|&c| components[c].var.message().is_some_and(|m| m.tx.contains(&k)))
                .collect();
            components.push(Component {
                var: VariableId::Input(k),
                alphabet: input_alphabets[k - 1],
                parents,
            });
        }
        Ok(FactorizationSchema {
            mode,
            spec: spec.clone(),
            components,
        })
    }

    /// Overrides the auxiliary alphabet sizes (in component order).
    pub fn with_aux_alphabets(mut self, sizes: &[usize]) -> Result<Self, EvalError> {
        if sizes.len() != self.n_aux() {
            return Err(EvalError::ArityMismatch(format!(
                "{} auxiliary alphabet sizes for {} auxiliaries",
                sizes.len(),
                self.n_aux()
            )));
        }
        if sizes.contains(&0) {
            return Err(EvalError::ArityMismatch("alphabet sizes must be positive".into()));
        }
        for (c, &s) in self.components.iter_mut().zip(sizes) {
            c.alphabet = s;
        }
        Ok(self)
    }

    pub fn mode(&self) -> SchemaMode {
        self.mode
    }

    pub fn spec(&self) -> &NetworkSpec {
        &self.spec
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn n_aux(&self) -> usize {
        self.spec.len()
    }

    /// Number of parent assignments (rows) of component `c`.
    pub fn parent_rows(&self, c: usize) -> usize {
        self.components[c]
            .parents
            .iter()
            .map(|&p| self.components[p].alphabet)
            .product()
    }

    /// Expected length of the conditional table of component `c`.
    pub fn table_len(&self, c: usize) -> usize {
        self.parent_rows(c) * self.components[c].alphabet
    }

    /// Parents always precede children.
    pub fn is_acyclic(&self) -> bool {
        self.components
            .iter()
            .enumerate()
            .all(|(i, c)| c.parents.iter().all(|&p| p < i))
    }

    fn input_alphabets(&self) -> Vec<usize> {
        self.components[self.n_aux()..].iter().map(|c| c.alphabet).collect()
    }
}

/// A joint-distribution axis.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Axis {
    Var(VariableId),
    Output(usize),
}

/// A dense pmf over auxiliaries, inputs and outputs.
#[derive(Debug, Clone)]
pub struct JointDistribution {
    mode: Option<SchemaMode>,
    axes: Vec<Axis>,
    dims: Vec<usize>,
    pmf: Vec<f64>,
}

/// Conditional tables for every component of a schema, in component order.
/// Table `c` holds one pmf over the component's alphabet per parent
/// assignment, parents in row-major order.
pub type ComponentPmfs = Vec<Vec<f64>>;

/// Multiplies the schema factors with the channel transition.
pub fn build_joint(
    schema: &FactorizationSchema,
    channel: &Channel,
    pmfs: &[Vec<f64>],
) -> Result<JointDistribution, EvalError> {
    let spec = schema.spec();
    if channel.n_tx() != spec.n_tx() || channel.n_rx() != spec.n_rx() {
        return Err(EvalError::ChannelMismatch(format!(
            "channel is {}x{} but network is {}x{}",
            channel.n_tx(),
            channel.n_rx(),
            spec.n_tx(),
            spec.n_rx()
        )));
    }
    if channel.input_alphabets() != schema.input_alphabets() {
        return Err(EvalError::ChannelMismatch(format!(
            "channel input alphabets {:?} differ from schema {:?}",
            channel.input_alphabets(),
            schema.input_alphabets()
        )));
    }
    let comps = schema.components();
    if pmfs.len() != comps.len() {
        return Err(EvalError::ArityMismatch(format!(
            "{} component tables for {} components",
            pmfs.len(),
            comps.len()
        )));
    }
    let comp_dims: Vec<usize> = comps.iter().map(|c| c.alphabet).collect();
    let n_states = comp_dims
        .iter()
        .try_fold(1usize, |acc, &d| acc.checked_mul(d))
        .ok_or(EvalError::TooLarge(usize::MAX))?;
    let n_out = channel.output_tuples();
    let total = n_states
        .checked_mul(n_out)
        .ok_or(EvalError::TooLarge(usize::MAX))?;
    if total > MAX_JOINT_ENTRIES {
        return Err(EvalError::TooLarge(total));
    }

    for (c, table) in pmfs.iter().enumerate() {
        let expected = schema.table_len(c);
        if table.len() != expected {
            return Err(EvalError::ArityMismatch(format!(
                "component {} ({}) has {} entries, expected {}",
                c,
                comps[c].var,
                table.len(),
                expected
            )));
        }
        if let Some(&p) = table.iter().find(|p| !(**p >= 0.0) || !p.is_finite()) {
            return Err(EvalError::NegativeEntry(format!("component {} ({}): {}", c, comps[c].var, p)));
        }
        for row in table.chunks(comps[c].alphabet) {
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > ROW_TOLERANCE {
                return Err(EvalError::NotNormalized(format!(
                    "component {} ({}) row sums to {}",
                    c, comps[c].var, sum
                )));
            }
        }
    }

    let n_aux = schema.n_aux();
    let input_dims = &comp_dims[n_aux..];
    let mut state = vec![0usize; comps.len()];
    let mut pmf = vec![0.0; total];
    for s in 0..n_states {
        unflatten(s, &comp_dims, &mut state);
        let mut p = 1.0;
        for (c, comp) in comps.iter().enumerate() {
            let row = comp
                .parents
                .iter()
                .fold(0, |acc, &q| acc * comp_dims[q] + state[q]);
            p *= pmfs[c][row * comp.alphabet + state[c]];
            if p == 0.0 {
                break;
            }
        }
        if p == 0.0 {
            continue;
        }
        let x = state[n_aux..]
            .iter()
            .zip(input_dims)
            .fold(0, |acc, (&v, &d)| acc * d + v);
        for (slot, &w) in pmf[s * n_out..(s + 1) * n_out].iter_mut().zip(channel.row(x)) {
            *slot = p * w;
        }
    }
    let sum: f64 = pmf.iter().sum();
    if (sum - 1.0).abs() > JOINT_TOLERANCE {
        return Err(EvalError::NotNormalized(format!("joint sums to {sum}")));
    }

    let mut axes: Vec<Axis> = comps.iter().map(|c| Axis::Var(c.var.clone())).collect();
    let mut dims = comp_dims;
    for (z, &a) in channel.output_alphabets().iter().enumerate() {
        axes.push(Axis::Output(z + 1));
        dims.push(a);
    }
    Ok(JointDistribution {
        mode: Some(schema.mode()),
        axes,
        dims,
        pmf,
    })
}

fn entropy_term(p: f64, total: f64) -> f64 {
    if p > 0.0 {
        p * (total / p).log2()
    } else {
        0.0
    }
}

impl JointDistribution {
    /// A joint from an explicit table (row-major over `axes`).
    pub fn from_table(axes: Vec<Axis>, dims: Vec<usize>, pmf: Vec<f64>) -> Result<Self, EvalError> {
        if axes.len() != dims.len() {
            return Err(EvalError::ArityMismatch(format!("{} axes, {} dims", axes.len(), dims.len())));
        }
        let distinct: std::collections::HashSet<&Axis> = axes.iter().collect();
        if distinct.len() != axes.len() {
            return Err(EvalError::ArityMismatch("duplicate axis".into()));
        }
        if pmf.len() != product(&dims) {
            return Err(EvalError::ArityMismatch(format!(
                "{} entries for dims {:?}",
                pmf.len(),
                dims
            )));
        }
        if let Some(&p) = pmf.iter().find(|p| !(**p >= 0.0) || !p.is_finite()) {
            return Err(EvalError::NegativeEntry(p.to_string()));
        }
        let sum: f64 = pmf.iter().sum();
        if (sum - 1.0).abs() > ROW_TOLERANCE {
            return Err(EvalError::NotNormalized(format!("table sums to {sum}")));
        }
        Ok(JointDistribution {
            mode: None,
            axes,
            dims,
            pmf,
        })
    }

    pub fn mode(&self) -> Option<SchemaMode> {
        self.mode
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn pmf(&self) -> &[f64] {
        &self.pmf
    }

    /// Index of the axis holding `axis`.
    ///
    /// An independent-auxiliary joint is a special case of the superposition
    /// factorization, so superposition auxiliaries resolve to the independent
    /// auxiliary of the same message when the joint was built in outer mode.
    pub fn position(&self, axis: &Axis) -> Option<usize> {
        if let Some(p) = self.axes.iter().position(|a| a == axis) {
            return Some(p);
        }
        match (axis, self.mode) {
            (Axis::Var(VariableId::AuxInner(m)), Some(SchemaMode::OuterIndependent)) => {
                let alias = Axis::Var(VariableId::AuxOuter(m.clone()));
                self.axes.iter().position(|a| *a == alias)
            }
            _ => None,
        }
    }

    fn require(&self, axis: Axis) -> Result<usize, EvalError> {
        self.position(&axis).ok_or_else(|| {
            EvalError::UnknownVariable(match axis {
                Axis::Var(v) => v.to_string(),
                Axis::Output(z) => format!("Y{z}"),
            })
        })
    }

    /// Marginal over `axes`, laid out row-major in the given order.
    pub fn marginal(&self, axes: &[usize]) -> Vec<f64> {
        let nd = self.dims.len();
        let mut mstride = vec![0usize; nd];
        let mut size = 1;
        for &a in axes.iter().rev() {
            mstride[a] = size;
            size *= self.dims[a];
        }
        let mut out = vec![0.0; size];
        let mut idx = vec![0usize; nd];
        let mut m = 0usize;
        for &p in &self.pmf {
            out[m] += p;
            for ax in (0..nd).rev() {
                idx[ax] += 1;
                m += mstride[ax];
                if idx[ax] < self.dims[ax] {
                    break;
                }
                m -= mstride[ax] * self.dims[ax];
                idx[ax] = 0;
            }
        }
        out
    }

    /// `H(axes)` in bits.
    pub fn entropy(&self, axes: &[usize]) -> f64 {
        self.marginal(axes).iter().map(|&p| entropy_term(p, 1.0)).sum()
    }

    /// `H(target | cond)` in bits, summed per conditioning row.
    pub fn conditional_entropy(&self, target: usize, cond: &[usize]) -> f64 {
        let mut axes = cond.to_vec();
        axes.push(target);
        let size = self.dims[target];
        self.marginal(&axes)
            .chunks(size)
            .map(|row| {
                let pb: f64 = row.iter().sum();
                row.iter().map(|&p| entropy_term(p, pb)).sum::<f64>()
            })
            .sum()
    }

    /// Resolves the axes a term needs: `(output, conditioning, targets ∪ conditioning)`.
    pub fn term_axes(&self, term: &MiTerm) -> Result<(usize, Vec<usize>, Vec<usize>), EvalError> {
        let y = self.require(Axis::Output(term.output))?;
        let cond: BTreeSet<usize> = term
            .conditioning
            .iter()
            .map(|v| self.require(Axis::Var(v.clone())))
            .collect::<Result<_, _>>()?;
        let mut all = cond.clone();
        for v in &term.targets {
            all.insert(self.require(Axis::Var(v.clone()))?);
        }
        Ok((y, cond.into_iter().collect(), all.into_iter().collect()))
    }
}

/// `I(Y_z; targets | conditioning) = H(Y_z | B) - H(Y_z | A ∪ B)` in bits.
pub fn mutual_info(joint: &JointDistribution, term: &MiTerm) -> Result<f64, EvalError> {
    let (y, cond, all) = joint.term_axes(term)?;
    Ok(joint.conditional_entropy(y, &cond) - joint.conditional_entropy(y, &all))
}
