//! Sequent proof search for `Γ ⊢ M ↔ N` and `Σ ⊢ M`.
//!
//! Both calculi share one engine. Left rules are saturated first: `pl`
//! unconditionally, `el` once its key is derivable with right rules over the
//! current context. The goal is then decomposed with right rules only. Every
//! context reached is a set of subterms of the root sequent, so saturation
//! terminates.

use std::collections::{BTreeSet, HashSet};
use std::fmt;

use thiserror::Error;

use super::{MessageSet, ObserverTheory};
use crate::terms::Message;

/// Inference rule names, shared by both calculi.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Rule {
    Var,
    Id,
    Pr,
    Pl,
    Er,
    El,
}

impl Rule {
    pub fn as_str(self) -> &'static str {
        match self {
            Rule::Var => "var",
            Rule::Id => "id",
            Rule::Pr => "pr",
            Rule::Pl => "pl",
            Rule::Er => "er",
            Rule::El => "el",
        }
    }

    pub fn from_name(s: &str) -> Option<Rule> {
        Some(match s {
            "var" => Rule::Var,
            "id" => Rule::Id,
            "pr" => Rule::Pr,
            "pl" => Rule::Pl,
            "er" => Rule::Er,
            "el" => Rule::El,
            _ => return None,
        })
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A sequent of either calculus.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Sequent {
    Equiv {
        theory: ObserverTheory,
        left: Message,
        right: Message,
    },
    Synth {
        set: MessageSet,
        goal: Message,
    },
}

/// A context element or goal: a message pair or a single message.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Entry {
    Pair(Message, Message),
    Msg(Message),
}

impl fmt::Display for Entry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Entry::Pair(l, r) => write!(f, "{l} <-> {r}"),
            Entry::Msg(m) => write!(f, "{m}"),
        }
    }
}

impl fmt::Display for Sequent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sequent::Equiv { theory, left, right } => write!(f, "{theory} |- {left} <-> {right}"),
            Sequent::Synth { set, goal } => write!(f, "{set} |- {goal}"),
        }
    }
}

/// A proof tree. `principal` names the decomposed context entry of `pl`/`el`
/// nodes; when absent (e.g. parsed from text) the validator infers it.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Derivation {
    pub rule: Rule,
    pub conclusion: Sequent,
    pub premises: Vec<Derivation>,
    pub principal: Option<Entry>,
}

/// First invalid node found, addressed by premise indices from the root.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid {rule} node at {path:?}: {reason}")]
pub struct InvalidDerivation {
    pub path: Vec<usize>,
    pub rule: Rule,
    pub reason: String,
}

impl Derivation {
    /// Node-by-node check against the rules of the calculus of the root.
    pub fn validate(&self) -> Result<(), InvalidDerivation> {
        match self.conclusion {
            Sequent::Equiv { .. } => validate_node::<EquivLogic>(self, &mut Vec::new()),
            Sequent::Synth { .. } => validate_node::<SynthLogic>(self, &mut Vec::new()),
        }
    }

    /// Every message in every node is a subterm of a message of the root.
    pub fn has_subformula_property(&self) -> bool {
        let mut root = BTreeSet::new();
        sequent_messages(&self.conclusion, &mut |m| {
            m.subterms(&mut root);
        });
        fn walk(d: &Derivation, root: &BTreeSet<Message>) -> bool {
            let mut ok = true;
            sequent_messages(&d.conclusion, &mut |m| ok &= root.contains(m));
            ok && d.premises.iter().all(|p| walk(p, root))
        }
        walk(self, &root)
    }

    pub fn height(&self) -> usize {
        1 + self.premises.iter().map(Derivation::height).max().unwrap_or(0)
    }

    pub fn node_count(&self) -> usize {
        1 + self.premises.iter().map(Derivation::node_count).sum::<usize>()
    }

    /// Pair context and goal of an equivalence conclusion.
    pub fn equiv_parts(&self) -> Option<(&ObserverTheory, &Message, &Message)> {
        match &self.conclusion {
            Sequent::Equiv { theory, left, right } => Some((theory, left, right)),
            Sequent::Synth { .. } => None,
        }
    }
}

fn sequent_messages(s: &Sequent, f: &mut dyn FnMut(&Message)) {
    match s {
        Sequent::Equiv { theory, left, right } => {
            for (l, r) in theory.iter() {
                f(l);
                f(r);
            }
            f(left);
            f(right);
        }
        Sequent::Synth { set, goal } => {
            for m in set.iter() {
                f(m);
            }
            f(goal);
        }
    }
}

/// Renders `rule(conclusion; premise, ...)`; leaves omit the `;` part.
impl fmt::Display for Derivation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({}", self.rule, self.conclusion)?;
        if !self.premises.is_empty() {
            f.write_str("; ")?;
            for (i, p) in self.premises.iter().enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                write!(f, "{p}")?;
            }
        }
        f.write_str(")")
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub(crate) enum Ctor {
    Pair,
    Enc,
}

impl Ctor {
    fn right_rule(self) -> Rule {
        match self {
            Ctor::Pair => Rule::Pr,
            Ctor::Enc => Rule::Er,
        }
    }

    fn left_rule(self) -> Rule {
        match self {
            Ctor::Pair => Rule::Pl,
            Ctor::Enc => Rule::El,
        }
    }
}

/// The parts in which the two calculi differ.
pub(crate) trait Logic {
    type Item: Ord + Clone + std::hash::Hash + fmt::Debug;

    /// Decomposition of a same-constructor compound into its components.
    fn split(item: &Self::Item) -> Option<(Ctor, Self::Item, Self::Item)>;
    fn is_var(item: &Self::Item) -> bool;
    fn sequent(ctx: &BTreeSet<Self::Item>, goal: &Self::Item) -> Sequent;
    fn open(seq: &Sequent) -> Option<(BTreeSet<Self::Item>, Self::Item)>;
    fn entry(item: &Self::Item) -> Entry;
    fn from_entry(e: &Entry) -> Option<Self::Item>;
}

pub(crate) struct EquivLogic;
pub(crate) struct SynthLogic;

impl Logic for EquivLogic {
    type Item = (Message, Message);

    fn split(item: &Self::Item) -> Option<(Ctor, Self::Item, Self::Item)> {
        match item {
            (Message::Pair(a, b), Message::Pair(c, d)) => Some((
                Ctor::Pair,
                ((**a).clone(), (**c).clone()),
                ((**b).clone(), (**d).clone()),
            )),
            (Message::Enc(a, b), Message::Enc(c, d)) => Some((
                Ctor::Enc,
                ((**a).clone(), (**c).clone()),
                ((**b).clone(), (**d).clone()),
            )),
            _ => None,
        }
    }

    fn is_var(item: &Self::Item) -> bool {
        matches!(item, (Message::Name(x), Message::Name(y)) if x == y)
    }

    fn sequent(ctx: &BTreeSet<Self::Item>, goal: &Self::Item) -> Sequent {
        Sequent::Equiv {
            theory: ctx.iter().cloned().collect(),
            left: goal.0.clone(),
            right: goal.1.clone(),
        }
    }

    fn open(seq: &Sequent) -> Option<(BTreeSet<Self::Item>, Self::Item)> {
        match seq {
            Sequent::Equiv { theory, left, right } => {
                Some((theory.pairs().clone(), (left.clone(), right.clone())))
            }
            Sequent::Synth { .. } => None,
        }
    }

    fn entry(item: &Self::Item) -> Entry {
        Entry::Pair(item.0.clone(), item.1.clone())
    }

    fn from_entry(e: &Entry) -> Option<Self::Item> {
        match e {
            Entry::Pair(l, r) => Some((l.clone(), r.clone())),
            Entry::Msg(_) => None,
        }
    }
}

impl Logic for SynthLogic {
    type Item = Message;

    fn split(item: &Message) -> Option<(Ctor, Message, Message)> {
        match item {
            Message::Pair(a, b) => Some((Ctor::Pair, (**a).clone(), (**b).clone())),
            Message::Enc(a, b) => Some((Ctor::Enc, (**a).clone(), (**b).clone())),
            _ => None,
        }
    }

    fn is_var(item: &Message) -> bool {
        matches!(item, Message::Name(_))
    }

    fn sequent(ctx: &BTreeSet<Message>, goal: &Message) -> Sequent {
        Sequent::Synth {
            set: ctx.iter().cloned().collect(),
            goal: goal.clone(),
        }
    }

    fn open(seq: &Sequent) -> Option<(BTreeSet<Message>, Message)> {
        match seq {
            Sequent::Synth { set, goal } => Some((set.messages().clone(), goal.clone())),
            Sequent::Equiv { .. } => None,
        }
    }

    fn entry(item: &Message) -> Entry {
        Entry::Msg(item.clone())
    }

    fn from_entry(e: &Entry) -> Option<Message> {
        match e {
            Entry::Msg(m) => Some(m.clone()),
            Entry::Pair(..) => None,
        }
    }
}

/// Right rules only, no tree.
fn right_derivable<L: Logic>(ctx: &HashSet<L::Item>, goal: &L::Item) -> bool {
    if ctx.contains(goal) || L::is_var(goal) {
        return true;
    }
    match L::split(goal) {
        Some((_, a, b)) => right_derivable::<L>(ctx, &a) && right_derivable::<L>(ctx, &b),
        None => false,
    }
}

/// Right rules only, building the tree; `id` is preferred over decomposition.
fn right_tree<L: Logic>(ctx: &BTreeSet<L::Item>, goal: &L::Item) -> Option<Derivation> {
    let leaf = |rule| Derivation {
        rule,
        conclusion: L::sequent(ctx, goal),
        premises: Vec::new(),
        principal: None,
    };
    if ctx.contains(goal) {
        return Some(leaf(Rule::Id));
    }
    if L::is_var(goal) {
        return Some(leaf(Rule::Var));
    }
    let (ctor, a, b) = L::split(goal)?;
    let da = right_tree::<L>(ctx, &a)?;
    let db = right_tree::<L>(ctx, &b)?;
    Some(Derivation {
        rule: ctor.right_rule(),
        conclusion: L::sequent(ctx, goal),
        premises: vec![da, db],
        principal: None,
    })
}

/// One left-rule application recorded during saturation.
struct LeftStep<I> {
    ctor: Ctor,
    principal: I,
    first: I,
    second: I,
}

/// Closure of `ctx` under the left rules, with the applications in order.
fn saturate<L: Logic>(ctx: &BTreeSet<L::Item>) -> (HashSet<L::Item>, Vec<LeftStep<L::Item>>) {
    let mut known: HashSet<L::Item> = ctx.iter().cloned().collect();
    let mut order: Vec<L::Item> = ctx.iter().cloned().collect();
    let mut steps = Vec::new();
    let mut done: HashSet<L::Item> = HashSet::new();
    loop {
        let mut progress = false;
        let mut i = 0;
        while i < order.len() {
            let item = order[i].clone();
            i += 1;
            if done.contains(&item) {
                continue;
            }
            let Some((ctor, a, b)) = L::split(&item) else {
                done.insert(item);
                continue;
            };
            if ctor == Ctor::Enc && !right_derivable::<L>(&known, &b) {
                continue;
            }
            done.insert(item.clone());
            if known.contains(&a) && known.contains(&b) {
                continue;
            }
            for c in [&a, &b] {
                if known.insert(c.clone()) {
                    order.push(c.clone());
                }
            }
            steps.push(LeftStep {
                ctor,
                principal: item,
                first: a,
                second: b,
            });
            progress = true;
        }
        if !progress {
            return (known, steps);
        }
    }
}

fn collect_ids<L: Logic>(d: &Derivation, used: &mut HashSet<L::Item>) {
    if d.rule == Rule::Id {
        if let Some((_, goal)) = L::open(&d.conclusion) {
            used.insert(goal);
        }
    }
    for p in &d.premises {
        collect_ids::<L>(p, used);
    }
}

fn prove<L: Logic>(ctx: &BTreeSet<L::Item>, goal: &L::Item) -> Option<Derivation> {
    let (known, steps) = saturate::<L>(ctx);
    if !right_derivable::<L>(&known, goal) {
        return None;
    }
    // Keep only the left steps whose additions are used above them.
    // Key subproofs must only use entries present when the step was taken.
    let mut at_step = Vec::with_capacity(steps.len());
    let mut running = ctx.clone();
    for step in &steps {
        at_step.push(running.clone());
        running.insert(step.first.clone());
        running.insert(step.second.clone());
    }
    let top = right_tree::<L>(&running, goal)?;
    let mut used = HashSet::new();
    collect_ids::<L>(&top, &mut used);
    let mut needed = vec![false; steps.len()];
    for (k, step) in steps.iter().enumerate().rev() {
        let adds = |c: &L::Item| !ctx.contains(c) && used.contains(c);
        if adds(&step.first) || adds(&step.second) {
            needed[k] = true;
            used.insert(step.principal.clone());
            if step.ctor == Ctor::Enc {
                let key = right_tree::<L>(&at_step[k], &step.second)?;
                collect_ids::<L>(&key, &mut used);
            }
        }
    }
    // Rebuild contexts bottom-up, then nest the nodes top-down.
    let mut contexts = vec![ctx.clone()];
    let kept: Vec<&LeftStep<L::Item>> = steps
        .iter()
        .zip(&needed)
        .filter(|(_, n)| **n)
        .map(|(s, _)| s)
        .collect();
    for step in &kept {
        let mut next = contexts.last().expect("non-empty").clone();
        next.insert(step.first.clone());
        next.insert(step.second.clone());
        contexts.push(next);
    }
    let mut tree = right_tree::<L>(contexts.last().expect("non-empty"), goal)?;
    for (k, step) in kept.iter().enumerate().rev() {
        let here = &contexts[k];
        let mut premises = Vec::new();
        if step.ctor == Ctor::Enc {
            premises.push(right_tree::<L>(here, &step.second)?);
        }
        premises.push(tree);
        tree = Derivation {
            rule: step.ctor.left_rule(),
            conclusion: L::sequent(here, goal),
            premises,
            principal: Some(L::entry(&step.principal)),
        };
    }
    Some(tree)
}

/// A derivation of `Γ ⊢ M ↔ N`, or `None` when the sequent is not derivable.
pub fn prove_equiv(gamma: &ObserverTheory, m: &Message, n: &Message) -> Option<Derivation> {
    prove::<EquivLogic>(gamma.pairs(), &(m.clone(), n.clone()))
}

/// A derivation of `Σ ⊢ M`, or `None` when the sequent is not derivable.
pub fn prove_synth(sigma: &MessageSet, m: &Message) -> Option<Derivation> {
    prove::<SynthLogic>(sigma.messages(), m)
}

/// Derivability of `Γ ⊢ M ↔ N` without building a tree.
pub fn entails_equiv(gamma: &ObserverTheory, m: &Message, n: &Message) -> bool {
    EquivKnowledge::new(gamma).entails(m, n)
}

/// Derivability of `Σ ⊢ M` without building a tree.
pub fn entails_synth(sigma: &MessageSet, m: &Message) -> bool {
    SynthKnowledge::new(sigma).derives(m)
}

/// Every `N` with `Γ ⊢ M ↔ N`, sorted.
pub fn equivalents(gamma: &ObserverTheory, m: &Message) -> Vec<Message> {
    EquivKnowledge::new(gamma).equivalents(m)
}

/// A saturated theory answering repeated equivalence queries.
#[derive(Clone)]
pub struct EquivKnowledge {
    known: HashSet<(Message, Message)>,
}

impl EquivKnowledge {
    pub fn new(gamma: &ObserverTheory) -> Self {
        EquivKnowledge {
            known: saturate::<EquivLogic>(gamma.pairs()).0,
        }
    }

    pub fn entails(&self, m: &Message, n: &Message) -> bool {
        right_derivable::<EquivLogic>(&self.known, &(m.clone(), n.clone()))
    }

    /// Every `N` with `Γ ⊢ M ↔ N`, sorted.
    pub fn equivalents(&self, m: &Message) -> Vec<Message> {
        let mut out: BTreeSet<Message> = self
            .known
            .iter()
            .filter(|(l, _)| l == m)
            .map(|(_, r)| r.clone())
            .collect();
        match m {
            Message::Name(_) => {
                out.insert(m.clone());
            }
            Message::Rigid(_) => {}
            Message::Pair(a, b) | Message::Enc(a, b) => {
                let lefts = self.equivalents(a);
                let rights = self.equivalents(b);
                for l in &lefts {
                    for r in &rights {
                        out.insert(match m {
                            Message::Pair(..) => Message::pair(l.clone(), r.clone()),
                            _ => Message::enc(l.clone(), r.clone()),
                        });
                    }
                }
            }
        }
        out.into_iter().collect()
    }
}

/// A saturated message set answering repeated synthesis queries.
#[derive(Clone)]
pub struct SynthKnowledge {
    known: HashSet<Message>,
}

impl SynthKnowledge {
    pub fn new(sigma: &MessageSet) -> Self {
        SynthKnowledge {
            known: saturate::<SynthLogic>(sigma.messages()).0,
        }
    }

    pub fn derives(&self, m: &Message) -> bool {
        right_derivable::<SynthLogic>(&self.known, m)
    }

    /// The saturated set: every message obtainable by decomposition.
    pub fn analysed(&self) -> BTreeSet<Message> {
        self.known.iter().cloned().collect()
    }
}

fn invalid(path: &[usize], rule: Rule, reason: impl Into<String>) -> InvalidDerivation {
    InvalidDerivation {
        path: path.to_vec(),
        rule,
        reason: reason.into(),
    }
}

/// Principal entries consistent with a left node, explicit one first.
fn principal_candidates<L: Logic>(
    d: &Derivation,
    ctx: &BTreeSet<L::Item>,
    ctor: Ctor,
) -> Vec<(L::Item, L::Item, L::Item)> {
    let explicit = d.principal.as_ref().and_then(L::from_entry);
    let mut out = Vec::new();
    let mut push = |item: &L::Item| {
        if let Some((c, a, b)) = L::split(item) {
            if c == ctor {
                out.push((item.clone(), a, b));
            }
        }
    };
    match explicit {
        Some(p) => push(&p),
        None => ctx.iter().for_each(&mut push),
    }
    out
}

fn validate_node<L: Logic>(d: &Derivation, path: &mut Vec<usize>) -> Result<(), InvalidDerivation> {
    let rule = d.rule;
    let (ctx, goal) = L::open(&d.conclusion).ok_or_else(|| invalid(path, rule, "mixed sequent kinds"))?;
    let open_premise = |k: usize| -> Result<(BTreeSet<L::Item>, L::Item), InvalidDerivation> {
        L::open(&d.premises[k].conclusion).ok_or_else(|| invalid(path, rule, "mixed sequent kinds"))
    };
    let arity = match rule {
        Rule::Var | Rule::Id => 0,
        Rule::Pl => 1,
        Rule::Pr | Rule::Er | Rule::El => 2,
    };
    if d.premises.len() != arity {
        return Err(invalid(path, rule, format!("expected {arity} premises")));
    }
    match rule {
        Rule::Var => {
            if !L::is_var(&goal) {
                return Err(invalid(path, rule, "goal is not a name identity"));
            }
        }
        Rule::Id => {
            if !ctx.contains(&goal) {
                return Err(invalid(path, rule, "goal not in context"));
            }
        }
        Rule::Pr | Rule::Er => {
            let want = if rule == Rule::Pr { Ctor::Pair } else { Ctor::Enc };
            let Some((ctor, a, b)) = L::split(&goal) else {
                return Err(invalid(path, rule, "goal has the wrong shape"));
            };
            if ctor != want {
                return Err(invalid(path, rule, "goal has the wrong constructor"));
            }
            for (k, sub) in [a, b].into_iter().enumerate() {
                let (pctx, pgoal) = open_premise(k)?;
                if pctx != ctx || pgoal != sub {
                    return Err(invalid(path, rule, format!("premise {k} does not match")));
                }
            }
        }
        Rule::Pl | Rule::El => {
            let ctor = if rule == Rule::Pl { Ctor::Pair } else { Ctor::Enc };
            let main = open_premise(arity - 1)?;
            let key = if rule == Rule::El {
                Some(open_premise(0)?)
            } else {
                None
            };
            let fits = principal_candidates::<L>(d, &ctx, ctor)
                .into_iter()
                .any(|(p, a, b)| {
                    if !ctx.contains(&p) || main.1 != goal {
                        return false;
                    }
                    let mut extended = ctx.clone();
                    extended.insert(a);
                    extended.insert(b.clone());
                    if main.0 != extended {
                        return false;
                    }
                    match &key {
                        Some((kctx, kgoal)) => *kctx == ctx && *kgoal == b,
                        None => true,
                    }
                });
            if !fits {
                return Err(invalid(path, rule, "no principal entry matches the premises"));
            }
        }
    }
    for (k, p) in d.premises.iter().enumerate() {
        path.push(k);
        validate_node::<L>(p, path)?;
        path.pop();
    }
    Ok(())
}
