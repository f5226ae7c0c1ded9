//! Consistency of observer theories: the decision procedure on the
//! irreducible form, and a bounded brute-force oracle over derivable pairs.

use std::collections::HashMap;
use std::fmt;

use super::proof::{EquivKnowledge, SynthKnowledge};
use super::{normalize, ObserverTheory};
use crate::terms::{Message, MessageKind};

/// A violated condition of the irreducible-form characterisation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ConsistencyViolation {
    /// (a): the components have different types, or a name is paired with
    /// something other than itself.
    TypeMismatch { pair: (Message, Message) },
    /// (b): a projection derives the key of an irreducible encryption pair.
    KeyDerivable { pair: (Message, Message), side: u8 },
    /// (c): two pairs share exactly one component.
    NotFunctional {
        first: (Message, Message),
        second: (Message, Message),
    },
}

impl ConsistencyViolation {
    pub fn condition(&self) -> char {
        match self {
            ConsistencyViolation::TypeMismatch { .. } => 'a',
            ConsistencyViolation::KeyDerivable { .. } => 'b',
            ConsistencyViolation::NotFunctional { .. } => 'c',
        }
    }
}

impl fmt::Display for ConsistencyViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "condition ({}) violated: ", self.condition())?;
        match self {
            ConsistencyViolation::TypeMismatch { pair: (l, r) } => {
                write!(f, "{l} <-> {r} relates different kinds of message")
            }
            ConsistencyViolation::KeyDerivable { pair: (l, r), side } => {
                write!(f, "projection {side} derives the key of {l} <-> {r}")
            }
            ConsistencyViolation::NotFunctional { first, second } => {
                write!(f, "{} <-> {} and {} <-> {}", first.0, first.1, second.0, second.1)
            }
        }
    }
}

/// Verdict of [`is_consistent`] together with the irreducible form checked.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Consistency {
    pub normal_form: ObserverTheory,
    pub violation: Option<ConsistencyViolation>,
}

impl Consistency {
    pub fn is_consistent(&self) -> bool {
        self.violation.is_none()
    }
}

/// Names and rigid names share one type; pairs and encryptions are distinct.
fn same_type(l: &Message, r: &Message) -> bool {
    let coarse = |m: &Message| match m.kind() {
        MessageKind::Name | MessageKind::Rigid => 0,
        MessageKind::Pair => 1,
        MessageKind::Enc => 2,
    };
    coarse(l) == coarse(r)
}

/// Decides consistency from `Γ↓`, reporting the first violated condition in
/// the order (a), (b), (c).
pub fn is_consistent(gamma: &ObserverTheory) -> Consistency {
    let nf = normalize(gamma);
    let violation = first_violation(&nf);
    Consistency {
        normal_form: nf,
        violation,
    }
}

fn first_violation(nf: &ObserverTheory) -> Option<ConsistencyViolation> {
    for (l, r) in nf.iter() {
        let name_ok = match (l, r) {
            (Message::Name(_), _) | (_, Message::Name(_)) => l == r,
            _ => true,
        };
        if !same_type(l, r) || !name_ok {
            return Some(ConsistencyViolation::TypeMismatch {
                pair: (l.clone(), r.clone()),
            });
        }
    }
    let left = SynthKnowledge::new(&nf.first_projection());
    let right = SynthKnowledge::new(&nf.second_projection());
    for (l, r) in nf.iter() {
        if let (Message::Enc(_, k1), Message::Enc(_, k2)) = (l, r) {
            let pair = (l.clone(), r.clone());
            if left.derives(k1) {
                return Some(ConsistencyViolation::KeyDerivable { pair, side: 1 });
            }
            if right.derives(k2) {
                return Some(ConsistencyViolation::KeyDerivable { pair, side: 2 });
            }
        }
    }
    let pairs: Vec<&(Message, Message)> = nf.iter().collect();
    for (i, p) in pairs.iter().enumerate() {
        for q in &pairs[i + 1..] {
            if (p.0 == q.0) != (p.1 == q.1) {
                return Some(ConsistencyViolation::NotFunctional {
                    first: (*p).clone(),
                    second: (*q).clone(),
                });
            }
        }
    }
    None
}

/// Hash-consed messages for the oracle's enumeration. Built messages are
/// kept as `(enc, left, right)` and only materialised when a key is tested.
#[derive(Default)]
struct Interner {
    shape: Vec<Shape>,
    atoms: HashMap<Message, u32>,
    built: HashMap<(bool, u32, u32), u32>,
}

#[derive(Clone)]
enum Shape {
    Atom(Message),
    Built { enc: bool, left: u32, right: u32 },
}

impl Interner {
    fn message(&mut self, m: &Message) -> u32 {
        if let Some(&id) = self.atoms.get(m) {
            return id;
        }
        let id = match m {
            Message::Pair(a, b) | Message::Enc(a, b) => {
                let (ia, ib) = (self.message(a), self.message(b));
                self.build(matches!(m, Message::Enc(..)), ia, ib)
            }
            _ => self.push(Shape::Atom(m.clone())),
        };
        self.atoms.insert(m.clone(), id);
        id
    }

    fn build(&mut self, enc: bool, a: u32, b: u32) -> u32 {
        if let Some(&id) = self.built.get(&(enc, a, b)) {
            return id;
        }
        let id = self.push(Shape::Built {
            enc,
            left: a,
            right: b,
        });
        self.built.insert((enc, a, b), id);
        id
    }

    fn push(&mut self, s: Shape) -> u32 {
        self.shape.push(s);
        (self.shape.len() - 1) as u32
    }

    fn materialise(&self, id: u32) -> Message {
        match &self.shape[id as usize] {
            Shape::Atom(m) => m.clone(),
            Shape::Built { enc, left, right } => {
                let (l, r) = (self.materialise(*left), self.materialise(*right));
                if *enc {
                    Message::enc(l, r)
                } else {
                    Message::pair(l, r)
                }
            }
        }
    }

    /// Coarse type, as in [`same_type`].
    fn kind(&self, id: u32) -> u8 {
        match &self.shape[id as usize] {
            Shape::Atom(m) => match m.kind() {
                MessageKind::Name | MessageKind::Rigid => 0,
                MessageKind::Pair => 1,
                MessageKind::Enc => 2,
            },
            Shape::Built { enc, .. } => 1 + *enc as u8,
        }
    }

    fn key(&self, id: u32) -> Option<u32> {
        match &self.shape[id as usize] {
            Shape::Built { enc: true, right, .. } => Some(*right),
            _ => None,
        }
    }
}

/// Conditions (1)-(3) over a stream of derivable pairs.
struct OracleState {
    know: EquivKnowledge,
    left: SynthKnowledge,
    right: SynthKnowledge,
    key_memo: HashMap<(u32, u32), bool>,
    partner_of_left: HashMap<u32, u32>,
    partner_of_right: HashMap<u32, u32>,
}

impl OracleState {
    fn admits(&mut self, interner: &Interner, im: u32, inn: u32) -> bool {
        if interner.kind(im) != interner.kind(inn) {
            return false;
        }
        if let (Some(k1), Some(k2)) = (interner.key(im), interner.key(inn)) {
            let (know, left, right) = (&self.know, &self.left, &self.right);
            let ok = *self.key_memo.entry((k1, k2)).or_insert_with(|| {
                let (k1, k2) = (interner.materialise(k1), interner.materialise(k2));
                know.entails(&k1, &k2) || (!left.derives(&k1) && !right.derives(&k2))
            });
            if !ok {
                return false;
            }
        }
        *self.partner_of_left.entry(im).or_insert(inn) == inn
            && *self.partner_of_right.entry(inn).or_insert(im) == im
    }
}

/// Brute-force check of the definition of consistency: enumerates every
/// derivable `M ↔ N` with `M` in the closure of the subterms of `Γ` under
/// `depth` rounds of pairing and encryption, and tests conditions (1)-(3)
/// with `R` ranging over the same space.
pub fn is_consistent_oracle(gamma: &ObserverTheory, depth: usize) -> bool {
    let know = EquivKnowledge::new(gamma);
    let mut state = OracleState {
        left: SynthKnowledge::new(&gamma.first_projection()),
        right: SynthKnowledge::new(&gamma.second_projection()),
        know: know.clone(),
        key_memo: HashMap::new(),
        partner_of_left: HashMap::new(),
        partner_of_right: HashMap::new(),
    };
    let mut interner = Interner::default();
    let mut derivable: Vec<(u32, u32)> = Vec::new();
    let mut seen: std::collections::HashSet<(u32, u32)> = Default::default();
    for m in gamma.subterms() {
        let im = interner.message(&m);
        for n in know.equivalents(&m) {
            let pair = (im, interner.message(&n));
            if seen.insert(pair) {
                if !state.admits(&interner, pair.0, pair.1) {
                    return false;
                }
                derivable.push(pair);
            }
        }
    }
    for round in 0..depth {
        let last = round + 1 == depth;
        let current = derivable.clone();
        for &(a, c) in &current {
            for &(b, d) in &current {
                for enc in [false, true] {
                    let pair = (interner.build(enc, a, b), interner.build(enc, c, d));
                    // The final round is checked on the fly and not stored.
                    if last || seen.insert(pair) {
                        if !state.admits(&interner, pair.0, pair.1) {
                            return false;
                        }
                        if !last {
                            derivable.push(pair);
                        }
                    }
                }
            }
        }
    }
    true
}
