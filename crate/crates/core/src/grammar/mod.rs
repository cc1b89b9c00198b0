//! Context-free grammars describing the pipeline search space.
//!
//! A [`Grammar`] is read from a small BNF dialect:
//!
//! ```text
//! # comment
//! <Start> ::= <feature_definition> [<feature_scaling>] <ML_algorithms>
//! <norm>  ::= l1 | l2
//!           | max
//! ```
//!
//! `[<X>]` marks an optional nonterminal. A rule may continue on the next
//! line when either line carries the `|` separator at the join.

mod bnf;
pub mod shipped;
mod tree;

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;
use std::sync::Arc;

pub(crate) use tree::expand;
pub use tree::{derive_from, parse_sentence, random_derivation, DerivationTree, Node, NodeLabel, NodeSite};

pub const DEFAULT_DEPTH_LIMIT: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Symbol {
    NonTerminal(Arc<str>),
    Terminal(Arc<str>),
    Optional(Arc<str>),
}

impl Symbol {
    /// Nonterminal name for `NonTerminal` and `Optional` symbols.
    pub fn nonterminal(&self) -> Option<&Arc<str>> {
        match self {
            Symbol::NonTerminal(n) | Symbol::Optional(n) => Some(n),
            Symbol::Terminal(_) => None,
        }
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Symbol::NonTerminal(n) => write!(f, "<{n}>"),
            Symbol::Terminal(t) => write!(f, "{t}"),
            Symbol::Optional(n) => write!(f, "[<{n}>]"),
        }
    }
}

pub type Alternative = Vec<Symbol>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rule {
    pub lhs: Arc<str>,
    pub alternatives: Vec<Alternative>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GrammarError {
    UndefinedNonterminal { name: String, line: usize },
    DuplicateRule { name: String, line: usize },
    EmptyAlternative { name: String, line: usize },
    MalformedRule { reason: String, line: usize },
    DepthInfeasible { symbol: String, limit: usize, required: Option<usize> },
    UnknownSymbol { name: String },
    UnparseableSentence { position: usize },
    TrailingTokens { position: usize },
}

impl fmt::Display for GrammarError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::UndefinedNonterminal { name, line } => {
                write!(f, "line {line}: nonterminal <{name}> is referenced but never defined")
            }
            Self::DuplicateRule { name, line } => write!(f, "line {line}: duplicate rule for <{name}>"),
            Self::EmptyAlternative { name, line } => {
                write!(f, "line {line}: empty alternative in rule <{name}>")
            }
            Self::MalformedRule { reason, line } => write!(f, "line {line}: malformed rule: {reason}"),
            Self::DepthInfeasible { symbol, limit, required } => match required {
                Some(r) => write!(f, "<{symbol}> needs depth {r}, limit is {limit}"),
                None => write!(f, "<{symbol}> cannot derive a finite sentence"),
            },
            Self::UnknownSymbol { name } => write!(f, "unknown nonterminal <{name}>"),
            Self::UnparseableSentence { position } => {
                write!(f, "sentence does not match the grammar at token {position}")
            }
            Self::TrailingTokens { position } => write!(f, "unexpected trailing tokens from position {position}"),
        }
    }
}

impl std::error::Error for GrammarError {}

/// A context-free grammar `<N, T, P, S>`.
///
/// Rule order and alternative order are preserved as written; alternative
/// order is semantic (it breaks ties when parsing sentences).
#[derive(Debug, Clone)]
pub struct Grammar {
    start: Arc<str>,
    rules: Vec<Rule>,
    lines: Vec<usize>,
    index: HashMap<Arc<str>, usize>,
    terminals: BTreeSet<Arc<str>>,
    // minimal derivation depth per rule; None = non-productive
    min_depth: Vec<Option<usize>>,
    first: Vec<BTreeSet<Arc<str>>>,
    nullable: Vec<bool>,
}

impl PartialEq for Grammar {
    fn eq(&self, other: &Self) -> bool {
        self.start == other.start && self.rules == other.rules
    }
}

impl Eq for Grammar {}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub unreachable: Vec<String>,
    pub non_productive: Vec<String>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.unreachable.is_empty() && self.non_productive.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_clean() {
            return write!(f, "ok: every nonterminal is reachable and productive");
        }
        for n in &self.unreachable {
            writeln!(f, "unreachable: <{n}>")?;
        }
        for n in &self.non_productive {
            writeln!(f, "non-productive: <{n}>")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GrammarStats {
    pub rules: usize,
    pub nonterminals: usize,
    pub terminals: usize,
}

impl Grammar {
    /// Parses BNF source text.
    pub fn parse_bnf(text: &str) -> Result<Grammar, GrammarError> {
        let (rules, lines) = bnf::parse_rules(text)?;
        Grammar::from_rules(rules, lines)
    }

    pub(crate) fn from_rules(rules: Vec<Rule>, lines: Vec<usize>) -> Result<Grammar, GrammarError> {
        let Some(first_rule) = rules.first() else {
            return Err(GrammarError::MalformedRule { reason: "no rules".into(), line: 0 });
        };
        let start = first_rule.lhs.clone();
        let mut index = HashMap::new();
        for (i, r) in rules.iter().enumerate() {
            if index.insert(r.lhs.clone(), i).is_some() {
                return Err(GrammarError::DuplicateRule { name: r.lhs.to_string(), line: lines[i] });
            }
        }
        let mut terminals = BTreeSet::new();
        for (i, r) in rules.iter().enumerate() {
            for alt in &r.alternatives {
                if alt.is_empty() {
                    return Err(GrammarError::EmptyAlternative { name: r.lhs.to_string(), line: lines[i] });
                }
                for s in alt {
                    match s {
                        Symbol::Terminal(t) => {
                            terminals.insert(t.clone());
                        }
                        Symbol::NonTerminal(n) | Symbol::Optional(n) => {
                            if !index.contains_key(n) {
                                return Err(GrammarError::UndefinedNonterminal {
                                    name: n.to_string(),
                                    line: lines[i],
                                });
                            }
                        }
                    }
                }
            }
        }
        let mut g = Grammar {
            start,
            rules,
            lines,
            index,
            terminals,
            min_depth: Vec::new(),
            first: Vec::new(),
            nullable: Vec::new(),
        };
        g.min_depth = g.compute_min_depths();
        let (first, nullable) = g.compute_first_sets();
        g.first = first;
        g.nullable = nullable;
        Ok(g)
    }

    pub fn start(&self) -> &str {
        &self.start
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn rule(&self, nonterminal: &str) -> Option<&Rule> {
        self.index.get(nonterminal).map(|&i| &self.rules[i])
    }

    pub(crate) fn rule_index(&self, nonterminal: &str) -> Option<usize> {
        self.index.get(nonterminal).copied()
    }

    pub fn terminals(&self) -> impl Iterator<Item = &str> {
        self.terminals.iter().map(|t| t.as_ref())
    }

    pub fn nonterminals(&self) -> impl Iterator<Item = &str> {
        self.rules.iter().map(|r| r.lhs.as_ref())
    }

    /// Line number of the rule defining `nonterminal` in the source text.
    pub fn line_of(&self, nonterminal: &str) -> Option<usize> {
        self.index.get(nonterminal).map(|&i| self.lines[i])
    }

    pub fn stats(&self) -> GrammarStats {
        GrammarStats { rules: self.rules.len(), nonterminals: self.index.len(), terminals: self.terminals.len() }
    }

    /// Minimal number of nonterminal expansions needed to derive a sentence
    /// from `nonterminal`; `None` when it cannot terminate.
    pub fn min_depth(&self, nonterminal: &str) -> Option<usize> {
        self.index.get(nonterminal).and_then(|&i| self.min_depth[i])
    }

    pub(crate) fn min_depth_at(&self, rule: usize) -> Option<usize> {
        self.min_depth[rule]
    }

    /// Depth required by one alternative: one for the expansion itself plus
    /// the deepest mandatory nonterminal child.
    pub(crate) fn alternative_depth(&self, alt: &[Symbol]) -> Option<usize> {
        let mut deepest = 0;
        for s in alt {
            if let Symbol::NonTerminal(n) = s {
                deepest = deepest.max(self.min_depth(n)?);
            }
        }
        Some(deepest + 1)
    }

    pub(crate) fn first_set(&self, rule: usize) -> &BTreeSet<Arc<str>> {
        &self.first[rule]
    }

    pub(crate) fn is_nullable(&self, rule: usize) -> bool {
        self.nullable[rule]
    }

    fn compute_min_depths(&self) -> Vec<Option<usize>> {
        let mut depth: Vec<Option<usize>> = vec![None; self.rules.len()];
        loop {
            let mut changed = false;
            for (i, r) in self.rules.iter().enumerate() {
                let best = r
                    .alternatives
                    .iter()
                    .filter_map(|alt| {
                        let mut deepest = 0;
                        for s in alt {
                            if let Symbol::NonTerminal(n) = s {
                                deepest = deepest.max(depth[self.index[n]]?);
                            }
                        }
                        Some(deepest + 1)
                    })
                    .min();
                if best.is_some() && (depth[i].is_none() || best < depth[i]) {
                    depth[i] = best;
                    changed = true;
                }
            }
            if !changed {
                return depth;
            }
        }
    }

    fn compute_first_sets(&self) -> (Vec<BTreeSet<Arc<str>>>, Vec<bool>) {
        let n = self.rules.len();
        let mut first: Vec<BTreeSet<Arc<str>>> = vec![BTreeSet::new(); n];
        let mut nullable = vec![false; n];
        loop {
            let mut changed = false;
            for (i, r) in self.rules.iter().enumerate() {
                for alt in &r.alternatives {
                    let mut all_nullable = true;
                    for s in alt {
                        match s {
                            Symbol::Terminal(t) => {
                                changed |= first[i].insert(t.clone());
                                all_nullable = false;
                            }
                            Symbol::NonTerminal(m) | Symbol::Optional(m) => {
                                let j = self.index[m];
                                if j != i {
                                    let add: Vec<_> = first[j].iter().cloned().collect();
                                    for t in add {
                                        changed |= first[i].insert(t);
                                    }
                                }
                                let sym_nullable = matches!(s, Symbol::Optional(_)) || nullable[j];
                                if !sym_nullable {
                                    all_nullable = false;
                                }
                            }
                        }
                        if !all_nullable {
                            break;
                        }
                    }
                    if all_nullable && !nullable[i] {
                        nullable[i] = true;
                        changed = true;
                    }
                }
            }
            if !changed {
                return (first, nullable);
            }
        }
    }

    /// Reports unreachable and non-productive nonterminals.
    pub fn validate(&self) -> ValidationReport {
        let mut reachable = vec![false; self.rules.len()];
        let mut queue = VecDeque::from([self.index[&self.start]]);
        reachable[self.index[&self.start]] = true;
        while let Some(i) = queue.pop_front() {
            for alt in &self.rules[i].alternatives {
                for s in alt {
                    if let Some(n) = s.nonterminal() {
                        let j = self.index[n];
                        if !reachable[j] {
                            reachable[j] = true;
                            queue.push_back(j);
                        }
                    }
                }
            }
        }
        ValidationReport {
            unreachable: self
                .rules
                .iter()
                .zip(&reachable)
                .filter(|(_, &r)| !r)
                .map(|(r, _)| r.lhs.to_string())
                .collect(),
            non_productive: self
                .rules
                .iter()
                .zip(&self.min_depth)
                .filter(|(_, d)| d.is_none())
                .map(|(r, _)| r.lhs.to_string())
                .collect(),
        }
    }

    /// Renders the grammar back to BNF, one rule per line.
    pub fn to_bnf(&self) -> String {
        let mut out = String::new();
        for r in &self.rules {
            out.push('<');
            out.push_str(&r.lhs);
            out.push_str("> ::= ");
            let alts: Vec<String> = r
                .alternatives
                .iter()
                .map(|alt| alt.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(" "))
                .collect();
            out.push_str(&alts.join(" | "));
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const FRAME_START: &str = "<Start> ::= <feature_definition> [<feature_scaling>] [<feature_selection>] <ML_algorithms>
<feature_definition> ::= General_Descriptors | Advanced_Descriptors
<feature_scaling> ::= <Normalizer>
<Normalizer> ::= Normalizer <norm>
<norm> ::= l1 | l2 | max
<feature_selection> ::= VarianceThreshold
<ML_algorithms> ::= DecisionTree
";

    #[test]
    fn norm_rule_has_three_terminal_alternatives() {
        let g = Grammar::parse_bnf(FRAME_START).unwrap();
        let norm = g.rule("norm").unwrap();
        assert_eq!(norm.alternatives.len(), 3);
        let toks: Vec<String> = norm.alternatives.iter().map(|a| a[0].to_string()).collect();
        assert_eq!(toks, ["l1", "l2", "max"]);
        assert!(norm.alternatives.iter().all(|a| a.len() == 1 && matches!(a[0], Symbol::Terminal(_))));
    }

    #[test]
    fn start_rule_has_two_optional_middle_symbols() {
        let g = Grammar::parse_bnf(FRAME_START).unwrap();
        let start = g.rule(g.start()).unwrap();
        assert_eq!(start.alternatives.len(), 1);
        let alt = &start.alternatives[0];
        assert_eq!(alt.len(), 4);
        assert!(matches!(alt[0], Symbol::NonTerminal(_)));
        assert!(matches!(alt[1], Symbol::Optional(_)));
        assert!(matches!(alt[2], Symbol::Optional(_)));
        assert!(matches!(alt[3], Symbol::NonTerminal(_)));
    }

    #[test]
    fn minimal_grammar() {
        let g = Grammar::parse_bnf("<S> ::= a").unwrap();
        assert_eq!(g.stats(), GrammarStats { rules: 1, nonterminals: 1, terminals: 1 });
        let g = Grammar::parse_bnf("<S> ::= a | b").unwrap();
        assert_eq!(g.stats(), GrammarStats { rules: 1, nonterminals: 1, terminals: 2 });
    }

    #[test]
    fn stats_are_stable_across_reparse() {
        let g = Grammar::parse_bnf(FRAME_START).unwrap();
        let again = Grammar::parse_bnf(&g.to_bnf()).unwrap();
        assert_eq!(g.stats(), again.stats());
        assert_eq!(g, again);
    }

    #[test]
    fn validation_flags_non_productive_and_unreachable() {
        let g = Grammar::parse_bnf("<A> ::= a | <S>\n<S> ::= <S>\n<X> ::= a").unwrap();
        let report = g.validate();
        assert_eq!(report.non_productive, vec!["S".to_string()]);
        assert_eq!(report.unreachable, vec!["X".to_string()]);
        assert!(!report.is_clean());
        assert!(Grammar::parse_bnf(FRAME_START).unwrap().validate().is_clean());
    }

    #[test]
    fn min_depth_accounts_for_optional_symbols() {
        let g = Grammar::parse_bnf(FRAME_START).unwrap();
        // Start -> feature_definition -> terminal : optional scaling is skippable
        assert_eq!(g.min_depth("Start"), Some(2));
        assert_eq!(g.min_depth("Normalizer"), Some(2));
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let err = Grammar::parse_bnf("<S> ::= <T>\n").unwrap_err();
        assert_eq!(err, GrammarError::UndefinedNonterminal { name: "T".into(), line: 1 });
        let err = Grammar::parse_bnf("<S> ::= a\n\n<S> ::= b").unwrap_err();
        assert_eq!(err, GrammarError::DuplicateRule { name: "S".into(), line: 3 });
        let err = Grammar::parse_bnf("<S> ::= a | | b").unwrap_err();
        assert_eq!(err, GrammarError::EmptyAlternative { name: "S".into(), line: 1 });
        let err = Grammar::parse_bnf("# header\n<S> a b").unwrap_err();
        assert!(matches!(err, GrammarError::MalformedRule { line: 2, .. }), "{err:?}");
        let err = Grammar::parse_bnf("<S> ::= a | ... | b").unwrap_err();
        assert!(matches!(err, GrammarError::MalformedRule { line: 1, .. }), "{err:?}");
        let err = Grammar::parse_bnf("<S> ::= a |").unwrap_err();
        assert!(matches!(err, GrammarError::EmptyAlternative { .. }), "{err:?}");
    }

    #[test]
    fn multi_line_rules_continue_after_separator() {
        let g = Grammar::parse_bnf("<S> ::= a | b |\n   c\n   | d <T>\n<T> ::= x").unwrap();
        assert_eq!(g.rule("S").unwrap().alternatives.len(), 4);
        assert_eq!(g.line_of("T"), Some(4));
        assert_eq!(g.rule("S").unwrap().alternatives[3].len(), 2);
    }
}
