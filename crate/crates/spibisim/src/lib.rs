//! Symbolic open bisimulation for the spi calculus.
//!
//! The crate is layered: [`terms`] defines messages and substitutions,
//! [`theory`] decides what an observer can derive from pairs of messages,
//! [`process`] gives the operational semantics, [`bitrace`] records the
//! interaction history with two processes, and [`bisim`] checks candidate
//! relations against the open bisimulation clauses. [`syntax`] reads and
//! writes the text formats used by the command-line tool.
//!
//! ```
//! use spibisim::syntax::{parse_message, parse_theory};
//! use spibisim::theory::prove_equiv;
//!
//! let gamma = parse_theory("enc(#a,#k) <-> enc(#b,#k)\n#k <-> #k").unwrap();
//! let (a, b) = (parse_message("#a").unwrap(), parse_message("#b").unwrap());
//! assert!(prove_equiv(&gamma, &a, &b).is_some());
//! ```

pub mod bisim;
pub mod bitrace;
pub mod process;
pub mod syntax;
pub mod terms;
pub mod theory;

/// Guide chapters, compiled so their snippets run as doctests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/messages.md")]
    mod messages {}
    #[doc = include_str!("../../../book/src/theories.md")]
    mod theories {}
    #[doc = include_str!("../../../book/src/processes.md")]
    mod processes {}
    #[doc = include_str!("../../../book/src/bitraces.md")]
    mod bitraces {}
    #[doc = include_str!("../../../book/src/bisimulation.md")]
    mod bisimulation {}
    #[doc = include_str!("../../../book/src/formats.md")]
    mod formats {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
