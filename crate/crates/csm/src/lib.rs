//! Compiler and analyzer for parameterized concurrent-state-machine
//! libraries: parse library modules and system instantiations, check them,
//! macro-expand to flat automata, and analyze the result.

pub mod analyze;
pub mod ast;
pub mod automaton;
pub mod check;
pub mod diag;
pub mod expand;
pub mod formula;
pub mod lexer;
pub mod parser;
pub mod signal;
pub mod stdlib;

pub use automaton::{ConcreteAutomaton, ConcreteState, ConcreteTransition, SystemConfig};
pub use diag::{Code, Diagnostic, Pos, Severity};
pub use formula::Formula;
pub use signal::{SignalId, Valuation};
