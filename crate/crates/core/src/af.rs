//! Dung-style abstract argumentation frameworks.
//!
//! Arguments are dense integer ids with a side table of display names, so
//! adjacency lookups during mining and grounded evaluation are plain slice
//! indexing. Frameworks are immutable once built; use [`FrameworkBuilder`]
//! to assemble one.

use std::collections::BTreeSet;
use std::fmt::{self, Write as _};

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(
    Debug, Default, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct ArgumentId(pub u32);

impl ArgumentId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for ArgumentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AfError {
    #[error("relation endpoint {0} is not an argument of this framework")]
    UnknownArgument(ArgumentId),
    #[error("argument {0} cannot support itself")]
    SelfSupport(ArgumentId),
    #[error("pair ({0}, {1}) is both a support and an attack")]
    SupportAttackOverlap(ArgumentId, ArgumentId),
    #[error("support relation contains a cycle through {0}")]
    SupportCycle(ArgumentId),
}

/// Compressed adjacency: `targets[offsets[i]..offsets[i + 1]]` are the
/// neighbours of argument `i`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
struct Adjacency {
    offsets: Vec<u32>,
    targets: Vec<ArgumentId>,
}

impl Adjacency {
    fn build(n: usize, pairs: impl Iterator<Item = (ArgumentId, ArgumentId)> + Clone) -> Self {
        let mut offsets = vec![0u32; n + 1];
        for (from, _) in pairs.clone() {
            offsets[from.index() + 1] += 1;
        }
        for i in 0..n {
            offsets[i + 1] += offsets[i];
        }
        let mut fill = offsets.clone();
        let mut targets = vec![ArgumentId(0); offsets[n] as usize];
        for (from, to) in pairs {
            let slot = &mut fill[from.index()];
            targets[*slot as usize] = to;
            *slot += 1;
        }
        Adjacency { offsets, targets }
    }

    #[inline]
    fn of(&self, id: ArgumentId) -> &[ArgumentId] {
        let i = id.index();
        &self.targets[self.offsets[i] as usize..self.offsets[i + 1] as usize]
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArgumentationFramework {
    names: Vec<String>,
    attacks: Vec<(ArgumentId, ArgumentId)>,
    supports: Vec<(ArgumentId, ArgumentId)>,
    attacked_by: Adjacency,
    attacks_on: Adjacency,
}

#[derive(Debug, Clone, Default)]
pub struct FrameworkBuilder {
    names: Vec<String>,
    attacks: Vec<(ArgumentId, ArgumentId)>,
    supports: Vec<(ArgumentId, ArgumentId)>,
}

impl FrameworkBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_capacity(arguments: usize) -> Self {
        FrameworkBuilder {
            names: Vec::with_capacity(arguments),
            ..Self::default()
        }
    }

    pub fn add_argument(&mut self, name: impl Into<String>) -> ArgumentId {
        let id = ArgumentId(self.names.len() as u32);
        self.names.push(name.into());
        id
    }

    pub fn add_attack(&mut self, attacker: ArgumentId, target: ArgumentId) -> &mut Self {
        self.attacks.push((attacker, target));
        self
    }

    pub fn add_support(&mut self, supporter: ArgumentId, supported: ArgumentId) -> &mut Self {
        self.supports.push((supporter, supported));
        self
    }

    pub fn extend_attacks(
        &mut self,
        pairs: impl IntoIterator<Item = (ArgumentId, ArgumentId)>,
    ) -> &mut Self {
        self.attacks.extend(pairs);
        self
    }

    pub fn extend_supports(
        &mut self,
        pairs: impl IntoIterator<Item = (ArgumentId, ArgumentId)>,
    ) -> &mut Self {
        self.supports.extend(pairs);
        self
    }

    /// Validates endpoints and the support invariants, removing duplicate pairs.
    pub fn build(self) -> Result<ArgumentationFramework, AfError> {
        let FrameworkBuilder {
            names,
            mut attacks,
            mut supports,
        } = self;
        let n = names.len();
        for &(a, b) in attacks.iter().chain(supports.iter()) {
            for id in [a, b] {
                if id.index() >= n {
                    return Err(AfError::UnknownArgument(id));
                }
            }
        }
        attacks.sort_unstable();
        attacks.dedup();
        supports.sort_unstable();
        supports.dedup();
        for &(a, b) in &supports {
            if a == b {
                return Err(AfError::SelfSupport(a));
            }
            if attacks.binary_search(&(a, b)).is_ok() {
                return Err(AfError::SupportAttackOverlap(a, b));
            }
        }
        Ok(ArgumentationFramework::from_sorted(
            names, attacks, supports,
        ))
    }
}

impl ArgumentationFramework {
    fn from_sorted(
        names: Vec<String>,
        attacks: Vec<(ArgumentId, ArgumentId)>,
        supports: Vec<(ArgumentId, ArgumentId)>,
    ) -> Self {
        let n = names.len();
        let attacks_on = Adjacency::build(n, attacks.iter().copied());
        let attacked_by = Adjacency::build(n, attacks.iter().map(|&(a, b)| (b, a)));
        ArgumentationFramework {
            names,
            attacks,
            supports,
            attacked_by,
            attacks_on,
        }
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn arguments(&self) -> impl ExactSizeIterator<Item = ArgumentId> {
        (0..self.names.len() as u32).map(ArgumentId)
    }

    pub fn name(&self, id: ArgumentId) -> &str {
        &self.names[id.index()]
    }

    pub fn find(&self, name: &str) -> Option<ArgumentId> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| ArgumentId(i as u32))
    }

    /// Attack pairs in ascending `(attacker, target)` order.
    pub fn attacks(&self) -> &[(ArgumentId, ArgumentId)] {
        &self.attacks
    }

    pub fn supports(&self) -> &[(ArgumentId, ArgumentId)] {
        &self.supports
    }

    pub fn attackers_of(&self, id: ArgumentId) -> &[ArgumentId] {
        self.attacked_by.of(id)
    }

    pub fn targets_of(&self, id: ArgumentId) -> &[ArgumentId] {
        self.attacks_on.of(id)
    }

    pub fn attacks_pair(&self, attacker: ArgumentId, target: ArgumentId) -> bool {
        self.attacks.binary_search(&(attacker, target)).is_ok()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Label {
    In,
    Out,
    Undec,
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Label::In => "IN",
            Label::Out => "OUT",
            Label::Undec => "UNDEC",
        })
    }
}

/// Grounded extension together with the rounds that produced it.
///
/// `layers[0]` holds the unattacked arguments; `layers[i]` holds the
/// arguments first defended in round `i`. The cumulative set after round
/// `i` is the union of `layers[..=i]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundedResult {
    extension: Vec<ArgumentId>,
    layers: Vec<Vec<ArgumentId>>,
    labels: Vec<Label>,
}

impl GroundedResult {
    /// Members of the grounded extension, ascending.
    pub fn extension(&self) -> &[ArgumentId] {
        &self.extension
    }

    pub fn layers(&self) -> &[Vec<ArgumentId>] {
        &self.layers
    }

    pub fn cumulative_layers(&self) -> Vec<BTreeSet<ArgumentId>> {
        let mut acc = BTreeSet::new();
        self.layers
            .iter()
            .map(|layer| {
                acc.extend(layer.iter().copied());
                acc.clone()
            })
            .collect()
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn label(&self, id: ArgumentId) -> Label {
        self.labels[id.index()]
    }

    pub fn contains(&self, id: ArgumentId) -> bool {
        self.labels[id.index()] == Label::In
    }

    /// Round in which `id` entered the extension.
    pub fn layer_of(&self, id: ArgumentId) -> Option<usize> {
        self.layers
            .iter()
            .position(|layer| layer.binary_search(&id).is_ok())
    }
}

/// Computes the grounded extension by the cumulative defence iteration.
///
/// Supports are ignored; resolve them first with [`effective_attacks`].
pub fn grounded(framework: &ArgumentationFramework) -> GroundedResult {
    let n = framework.len();
    let mut labels = vec![Label::Undec; n];
    // Attackers of each argument not yet known to be OUT.
    let mut live_attackers: Vec<u32> = framework
        .arguments()
        .map(|id| framework.attackers_of(id).len() as u32)
        .collect();

    let mut frontier: Vec<ArgumentId> = framework
        .arguments()
        .filter(|id| live_attackers[id.index()] == 0)
        .collect();
    let mut layers = Vec::new();
    let mut newly_out = Vec::new();

    while !frontier.is_empty() {
        for &id in &frontier {
            labels[id.index()] = Label::In;
        }
        newly_out.clear();
        for &id in &frontier {
            for &target in framework.targets_of(id) {
                if labels[target.index()] == Label::Undec {
                    labels[target.index()] = Label::Out;
                    newly_out.push(target);
                }
            }
        }
        let mut next = Vec::new();
        for &out in &newly_out {
            for &target in framework.targets_of(out) {
                let live = &mut live_attackers[target.index()];
                *live -= 1;
                if *live == 0 && labels[target.index()] == Label::Undec {
                    next.push(target);
                }
            }
        }
        next.sort_unstable();
        layers.push(std::mem::replace(&mut frontier, next));
    }

    let extension = framework
        .arguments()
        .filter(|id| labels[id.index()] == Label::In)
        .collect();
    GroundedResult {
        extension,
        layers,
        labels,
    }
}

/// Attacks derived from supports: `(a, c)` whenever `a` reaches some `b`
/// through one or more support edges and `b` attacks `c`. Direct attacks
/// that happen to coincide are not repeated.
pub fn indirect_attacks(
    framework: &ArgumentationFramework,
) -> Result<Vec<(ArgumentId, ArgumentId)>, AfError> {
    let n = framework.len();
    if framework.supports.is_empty() {
        return Ok(Vec::new());
    }
    let support_adj = Adjacency::build(n, framework.supports.iter().copied());
    let order = support_topological_order(n, &support_adj)?;

    // Reverse topological order: every supported argument is closed before
    // its supporters, so each closure is its direct targets plus theirs.
    let mut reach: Vec<FixedBitSet> = vec![FixedBitSet::new(); n];
    for &id in order.iter().rev() {
        let mut closure = FixedBitSet::with_capacity(n);
        for &next in support_adj.of(id) {
            closure.insert(next.index());
            closure.union_with(&reach[next.index()]);
        }
        reach[id.index()] = closure;
    }

    let mut derived = Vec::new();
    for a in framework.arguments() {
        for b in reach[a.index()].ones() {
            for &c in framework.targets_of(ArgumentId(b as u32)) {
                if !framework.attacks_pair(a, c) {
                    derived.push((a, c));
                }
            }
        }
    }
    derived.sort_unstable();
    derived.dedup();
    Ok(derived)
}

fn support_topological_order(n: usize, adj: &Adjacency) -> Result<Vec<ArgumentId>, AfError> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        Fresh,
        Active,
        Done,
    }
    let mut marks = vec![Mark::Fresh; n];
    let mut order = Vec::with_capacity(n);
    let mut stack: Vec<(ArgumentId, usize)> = Vec::new();
    for start in 0..n {
        if marks[start] != Mark::Fresh {
            continue;
        }
        let start = ArgumentId(start as u32);
        marks[start.index()] = Mark::Active;
        stack.push((start, 0));
        while let Some(&mut (node, ref mut cursor)) = stack.last_mut() {
            let succ = adj.of(node);
            if *cursor < succ.len() {
                let next = succ[*cursor];
                *cursor += 1;
                match marks[next.index()] {
                    Mark::Fresh => {
                        marks[next.index()] = Mark::Active;
                        stack.push((next, 0));
                    }
                    Mark::Active => return Err(AfError::SupportCycle(next)),
                    Mark::Done => {}
                }
            } else {
                marks[node.index()] = Mark::Done;
                order.push(node);
                stack.pop();
            }
        }
    }
    order.reverse();
    Ok(order)
}

/// Folds supports into attacks, returning a support-free framework over the
/// same arguments.
pub fn effective_attacks(
    framework: &ArgumentationFramework,
) -> Result<ArgumentationFramework, AfError> {
    let derived = indirect_attacks(framework)?;
    let mut attacks = framework.attacks.clone();
    attacks.extend(derived);
    attacks.sort_unstable();
    attacks.dedup();
    Ok(ArgumentationFramework::from_sorted(
        framework.names.clone(),
        attacks,
        Vec::new(),
    ))
}

fn dot_escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// Renders the framework as a Graphviz digraph.
///
/// Direct attacks are solid, support-derived attacks dashed and supports
/// dotted. Accepted arguments are filled green, rejected ones grey.
pub fn to_dot(framework: &ArgumentationFramework, result: &GroundedResult) -> String {
    let mut out = String::new();
    out.push_str("digraph af {\n");
    out.push_str("  rankdir=BT;\n");
    out.push_str("  node [shape=box, style=\"rounded,filled\", fillcolor=white];\n");
    for id in framework.arguments() {
        let label = result
            .labels
            .get(id.index())
            .copied()
            .unwrap_or(Label::Undec);
        let fill = match label {
            Label::In => "palegreen",
            Label::Out => "lightgrey",
            Label::Undec => "lightyellow",
        };
        let _ = writeln!(
            out,
            "  a{} [label=\"{}\", fillcolor={}, xlabel=\"{}\"];",
            id.0,
            dot_escape(framework.name(id)),
            fill,
            label
        );
    }
    for &(a, b) in &framework.attacks {
        let _ = writeln!(out, "  a{} -> a{};", a.0, b.0);
    }
    // A cyclic support relation cannot have been mined; draw what is there.
    for (a, b) in indirect_attacks(framework).unwrap_or_default() {
        let _ = writeln!(out, "  a{} -> a{} [style=dashed, color=red];", a.0, b.0);
    }
    for &(a, b) in &framework.supports {
        let _ = writeln!(
            out,
            "  a{} -> a{} [style=dotted, arrowhead=empty, color=blue];",
            a.0, b.0
        );
    }
    out.push_str("}\n");
    out
}
