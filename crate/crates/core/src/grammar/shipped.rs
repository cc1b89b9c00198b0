//! The bundled pipeline grammar.

use std::sync::OnceLock;

use super::Grammar;

/// Source text of the bundled grammar (`grammar.bnf` at the crate root).
pub const SHIPPED_BNF: &str = include_str!("../../grammar.bnf");

/// Environment variable naming an alternative default grammar file.
pub const GRAMMAR_ENV: &str = "PK_AUTOML_GRAMMAR";

/// The bundled grammar, parsed once.
pub fn shipped() -> &'static Grammar {
    static G: OnceLock<Grammar> = OnceLock::new();
    G.get_or_init(|| Grammar::parse_bnf(SHIPPED_BNF).expect("bundled grammar parses"))
}
