//! Incremental black-box context-free grammar inference.
//!
//! Given a handful of example programs and an accept/reject oracle, the
//! pipeline tokenizes the examples, decomposes them into small fragments,
//! and grows a grammar one fragment at a time by merging interchangeable
//! subsequences.

pub mod cfg;
pub mod decompose;
pub mod eval;
pub mod infer;
pub mod oracle;
pub mod refbench;
pub mod rng;
pub mod sampler;
pub mod tokenizer;

pub use cfg::{CharClass, Grammar, GrammarError, GrammarMetrics, LexAtom, NtId, Symbol, Tok, TokId, TokenDef, TokenSequence};
