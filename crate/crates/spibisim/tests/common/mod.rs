//! Proptest strategies shared by the property suites.
#![allow(dead_code)]

use proptest::prelude::*;

use spibisim::bitrace::{validate_bitrace, BiTrace, IOPair};
use spibisim::process::Process;
use spibisim::terms::{Message, Name, RigidName, Substitution};
use spibisim::theory::ObserverTheory;

pub fn name(s: &str) -> Name {
    Name::new(s).unwrap()
}

pub fn var(s: &str) -> Message {
    Message::Name(name(s))
}

pub fn rigid(s: &str) -> Message {
    Message::Rigid(RigidName::new(s).unwrap())
}

pub fn atom() -> impl Strategy<Value = Message> {
    prop_oneof![
        Just(var("x")),
        Just(var("y")),
        Just(rigid("a")),
        Just(rigid("b")),
        Just(rigid("k")),
    ]
}

pub fn pure_atom() -> impl Strategy<Value = Message> {
    prop_oneof![Just(var("x")), Just(var("y")), Just(var("z"))]
}

pub fn message_from(leaf: impl Strategy<Value = Message> + 'static, depth: u32) -> BoxedStrategy<Message> {
    leaf.prop_recursive(depth, 16, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Message::pair(a, b)),
            (inner.clone(), inner).prop_map(|(a, b)| Message::enc(a, b)),
        ]
    })
    .boxed()
}

pub fn message(depth: u32) -> BoxedStrategy<Message> {
    message_from(atom(), depth)
}

pub fn theory(max_pairs: usize, depth: u32) -> impl Strategy<Value = ObserverTheory> {
    prop::collection::vec((message(depth), message(depth)), 0..=max_pairs)
        .prop_map(|pairs| pairs.into_iter().collect())
}

/// Theories whose pairs mostly relate a message to itself with rigid names
/// swapped, so a good share is consistent.
pub fn likely_consistent_theory(max_pairs: usize, depth: u32) -> impl Strategy<Value = ObserverTheory> {
    prop::collection::vec((message(depth), any::<bool>()), 0..=max_pairs).prop_map(|pairs| {
        pairs
            .into_iter()
            .map(|(m, swap)| {
                let n = if swap { swap_rigids(&m) } else { m.clone() };
                (m, n)
            })
            .collect()
    })
}

pub fn swap_rigids(m: &Message) -> Message {
    m.map_atoms(&|a| match a {
        Message::Rigid(r) if r.as_str() == "a" => Some(rigid("b")),
        Message::Rigid(r) if r.as_str() == "b" => Some(rigid("a")),
        _ => None,
    })
}

pub fn substitution(depth: u32) -> impl Strategy<Value = Substitution> {
    prop::collection::vec(
        (prop_oneof![Just("x"), Just("y"), Just("z")], message(depth)),
        0..3,
    )
    .prop_map(|binds| {
        let mut s = Substitution::identity();
        for (x, m) in binds {
            s.bind(name(x), m);
        }
        s
    })
}

/// Replication-free processes over the names `a`, `b`, `c`, binding `x`
/// and `y`. `pure` keeps every message a name.
pub fn process(pure: bool, size: u32) -> BoxedStrategy<Process> {
    let chan = || prop_oneof![Just(var("a")), Just(var("b")), Just(var("x"))];
    let msg = move || -> BoxedStrategy<Message> {
        let names = prop_oneof![
            Just(var("a")),
            Just(var("b")),
            Just(var("c")),
            Just(var("x")),
            Just(var("y"))
        ];
        if pure {
            names.boxed()
        } else {
            message_from(names, 1)
        }
    };
    let binder = || prop_oneof![Just(name("x")), Just(name("y"))];
    Just(Process::Nil)
        .prop_recursive(size, 10, 2, move |inner| {
            prop_oneof![
                (chan(), msg(), inner.clone()).prop_map(|(c, m, p)| Process::output(c, m, p)),
                (chan(), binder(), inner.clone()).prop_map(|(c, x, p)| Process::input(c, x, p)),
                (inner.clone(), inner.clone()).prop_map(|(p, q)| Process::par(p, q)),
                (binder(), inner.clone()).prop_map(|(x, p)| Process::restrict(x, p)),
                (msg(), msg(), inner).prop_map(|(m, n, p)| Process::matching(m, n, p)),
            ]
        })
        .boxed()
}

/// Small well-scoped bi-traces: name inputs, and outputs of rigid names or
/// of messages built from what is already known.
pub fn bitrace(max_len: usize) -> impl Strategy<Value = BiTrace> {
    let entry = prop_oneof![
        prop_oneof![Just("x"), Just("y")].prop_map(|x| IOPair::input(var(x), var(x))),
        (
            prop_oneof![Just("a"), Just("b"), Just("k")],
            prop_oneof![Just("a"), Just("b"), Just("k")]
        )
            .prop_map(|(l, r)| IOPair::output(rigid(l), rigid(r))),
        (
            message_from(prop_oneof![Just(rigid("a")), Just(rigid("b"))], 1),
            prop_oneof![Just("k"), Just("m")]
        )
            .prop_map(|(m, k)| IOPair::output(
                Message::enc(m.clone(), rigid(k)),
                Message::enc(swap_rigids(&m), rigid(k))
            )),
    ];
    prop::collection::vec(entry, 0..=max_len).prop_filter_map("ill-scoped", |es| validate_bitrace(es).ok())
}

/// Input prefixes in `p`; each one multiplies the respectful instances the
/// checker has to visit.
pub fn inputs(p: &Process) -> usize {
    match p {
        Process::Nil => 0,
        Process::Input { cont, .. } => 1 + inputs(cont),
        Process::Par { left, right } => inputs(left) + inputs(right),
        Process::Output { cont, .. }
        | Process::Match { cont, .. }
        | Process::Let { cont, .. }
        | Process::Case { cont, .. } => inputs(cont),
        Process::Restrict { body, .. } | Process::Bang { body } => inputs(body),
    }
}

/// Small enough for saturation to stay in the tens of milliseconds.
pub fn cheap(p: &Process) -> bool {
    use spibisim::terms::FreeNames;
    p.free_names().names.len() <= 2 && inputs(p) <= 2
}
