use std::sync::Arc;

use rand::Rng;

use super::{Grammar, GrammarError, Symbol};

/// A node of a derivation tree.
///
/// Optional symbols of a rule always produce an `Optional` marker child;
/// the marker holds the expansion when present, so omitted parts still
/// occupy their slot and contribute no terminals.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Node {
    Terminal(Arc<str>),
    NonTerminal { symbol: Arc<str>, alternative: usize, children: Vec<Node> },
    Optional { symbol: Arc<str>, expansion: Option<Box<Node>> },
}

/// Label shared by crossover points. Optional markers are labelled
/// separately from the nonterminal they wrap.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NodeLabel {
    NonTerminal(Arc<str>),
    Optional(Arc<str>),
}

impl Node {
    pub fn label(&self) -> Option<NodeLabel> {
        match self {
            Node::Terminal(_) => None,
            Node::NonTerminal { symbol, .. } => Some(NodeLabel::NonTerminal(symbol.clone())),
            Node::Optional { symbol, .. } => Some(NodeLabel::Optional(symbol.clone())),
        }
    }

    fn children_slice(&self) -> &[Node] {
        match self {
            Node::NonTerminal { children, .. } => children,
            Node::Optional { expansion: Some(e), .. } => std::slice::from_ref(e.as_ref()),
            _ => &[],
        }
    }

    fn child_mut(&mut self, i: usize) -> &mut Node {
        match self {
            Node::NonTerminal { children, .. } => &mut children[i],
            Node::Optional { expansion: Some(e), .. } if i == 0 => e.as_mut(),
            _ => panic!("path does not address a child"),
        }
    }

    fn collect_tokens<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            Node::Terminal(t) => out.push(t),
            _ => {
                for c in self.children_slice() {
                    c.collect_tokens(out);
                }
            }
        }
    }

    /// Number of nonterminal expansions on the longest root-to-leaf path.
    pub fn depth(&self) -> usize {
        match self {
            Node::Terminal(_) => 0,
            Node::NonTerminal { children, .. } => 1 + children.iter().map(Node::depth).max().unwrap_or(0),
            Node::Optional { expansion, .. } => expansion.as_ref().map_or(0, |e| e.depth()),
        }
    }

    pub fn node_count(&self) -> usize {
        1 + self.children_slice().iter().map(Node::node_count).sum::<usize>()
    }
}

/// Location of an internal node: child-index path from the root plus the
/// number of nonterminal expansions above it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeSite {
    pub path: Vec<usize>,
    pub label: NodeLabel,
    pub depth_above: usize,
}

/// A genome: a derivation tree whose frontier spells a pipeline.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DerivationTree {
    root: Node,
}

impl DerivationTree {
    pub fn new(root: Node) -> Self {
        DerivationTree { root }
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    /// Left-to-right frontier.
    pub fn tokens(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.root.collect_tokens(&mut out);
        out
    }

    pub fn sentence(&self) -> Vec<String> {
        self.tokens().into_iter().map(str::to_string).collect()
    }

    /// Space-joined frontier; the canonical identity of a pipeline.
    pub fn canonical(&self) -> String {
        self.tokens().join(" ")
    }

    pub fn depth(&self) -> usize {
        self.root.depth()
    }

    pub fn node_count(&self) -> usize {
        self.root.node_count()
    }

    /// All nonterminal and optional-marker nodes in pre-order.
    pub fn internal_sites(&self) -> Vec<NodeSite> {
        fn walk(node: &Node, path: &mut Vec<usize>, depth_above: usize, out: &mut Vec<NodeSite>) {
            let Some(label) = node.label() else { return };
            out.push(NodeSite { path: path.clone(), label, depth_above });
            let below = match node {
                Node::NonTerminal { .. } => depth_above + 1,
                _ => depth_above,
            };
            for (i, c) in node.children_slice().iter().enumerate() {
                path.push(i);
                walk(c, path, below, out);
                path.pop();
            }
        }
        let mut out = Vec::new();
        walk(&self.root, &mut Vec::new(), 0, &mut out);
        out
    }

    pub fn subtree(&self, path: &[usize]) -> &Node {
        path.iter().fold(&self.root, |n, &i| &n.children_slice()[i])
    }

    pub fn replace_subtree(&mut self, path: &[usize], node: Node) -> Node {
        let slot = path.iter().fold(&mut self.root, |n, &i| n.child_mut(i));
        std::mem::replace(slot, node)
    }

    /// Checks that every internal node matches one alternative of its rule.
    pub fn conforms_to(&self, g: &Grammar) -> bool {
        fn check(node: &Node, g: &Grammar) -> bool {
            match node {
                Node::Terminal(_) => false,
                Node::NonTerminal { symbol, alternative, children } => {
                    let Some(rule) = g.rule(symbol) else { return false };
                    let Some(alt) = rule.alternatives.get(*alternative) else { return false };
                    alt.len() == children.len()
                        && alt.iter().zip(children).all(|(s, c)| match (s, c) {
                            (Symbol::Terminal(t), Node::Terminal(u)) => t == u,
                            (Symbol::NonTerminal(n), Node::NonTerminal { symbol, .. }) => {
                                n == symbol && check(c, g)
                            }
                            (Symbol::Optional(n), Node::Optional { symbol, expansion }) => {
                                n == symbol
                                    && expansion.as_deref().is_none_or(|e| {
                                        matches!(e, Node::NonTerminal { symbol, .. } if symbol == n) && check(e, g)
                                    })
                            }
                            _ => false,
                        })
                }
                Node::Optional { .. } => false,
            }
        }
        matches!(&self.root, Node::NonTerminal { symbol, .. } if symbol.as_ref() == g.start()) && check(&self.root, g)
    }
}

/// Expands rule `rule` with at most `budget` nonterminal levels.
/// Caller guarantees `budget >= min_depth(rule)`.
pub(crate) fn expand<R: Rng + ?Sized>(g: &Grammar, rule: usize, rng: &mut R, budget: usize) -> Node {
    let r = &g.rules()[rule];
    let feasible: Vec<usize> = r
        .alternatives
        .iter()
        .enumerate()
        .filter(|(_, alt)| g.alternative_depth(alt).is_some_and(|d| d <= budget))
        .map(|(i, _)| i)
        .collect();
    debug_assert!(!feasible.is_empty(), "budget below minimal depth");
    let alternative = feasible[rng.gen_range(0..feasible.len())];
    let children = r.alternatives[alternative]
        .iter()
        .map(|s| match s {
            Symbol::Terminal(t) => Node::Terminal(t.clone()),
            Symbol::NonTerminal(n) => expand(g, g.rule_index(n).expect("validated"), rng, budget - 1),
            Symbol::Optional(n) => {
                let idx = g.rule_index(n).expect("validated");
                let fits = g.min_depth_at(idx).is_some_and(|d| d < budget);
                let expansion = (fits && rng.gen_bool(0.5)).then(|| Box::new(expand(g, idx, rng, budget - 1)));
                Node::Optional { symbol: n.clone(), expansion }
            }
        })
        .collect();
    Node::NonTerminal { symbol: r.lhs.clone(), alternative, children }
}

/// Derives a subtree rooted at `symbol` within `budget` levels.
pub fn derive_from<R: Rng + ?Sized>(
    g: &Grammar,
    symbol: &str,
    rng: &mut R,
    budget: usize,
) -> Result<Node, GrammarError> {
    let idx = g.rule_index(symbol).ok_or_else(|| GrammarError::UnknownSymbol { name: symbol.to_string() })?;
    match g.min_depth_at(idx) {
        Some(d) if d <= budget => Ok(expand(g, idx, rng, budget)),
        required => Err(GrammarError::DepthInfeasible { symbol: symbol.to_string(), limit: budget, required }),
    }
}

/// Samples a random derivation of the start symbol.
///
/// Alternatives are drawn uniformly among those whose minimal completion fits
/// the remaining depth budget; optional symbols are expanded with
/// probability 0.5 when they fit.
pub fn random_derivation<R: Rng + ?Sized>(
    g: &Grammar,
    rng: &mut R,
    depth_limit: usize,
) -> Result<DerivationTree, GrammarError> {
    derive_from(g, g.start(), rng, depth_limit).map(DerivationTree::new)
}

struct SentenceParser<'a> {
    g: &'a Grammar,
    tokens: Vec<&'a str>,
    furthest_mismatch: usize,
}

impl<'a> SentenceParser<'a> {
    /// All parses of `rule` starting at `pos`, in preference order.
    fn parse_rule(&mut self, rule: usize, pos: usize) -> Vec<(Node, usize)> {
        if !self.g.is_nullable(rule) {
            match self.tokens.get(pos) {
                Some(t) if self.g.first_set(rule).contains(*t) => {}
                _ => {
                    self.furthest_mismatch = self.furthest_mismatch.max(pos);
                    return Vec::new();
                }
            }
        }
        let r = &self.g.rules()[rule];
        let mut out = Vec::new();
        for (ai, alt) in r.alternatives.iter().enumerate() {
            for (children, end) in self.parse_seq(alt, pos) {
                out.push((Node::NonTerminal { symbol: r.lhs.clone(), alternative: ai, children }, end));
            }
        }
        out
    }

    fn parse_symbol(&mut self, s: &Symbol, pos: usize) -> Vec<(Node, usize)> {
        match s {
            Symbol::Terminal(t) => {
                if self.tokens.get(pos) == Some(&t.as_ref()) {
                    vec![(Node::Terminal(t.clone()), pos + 1)]
                } else {
                    self.furthest_mismatch = self.furthest_mismatch.max(pos);
                    Vec::new()
                }
            }
            Symbol::NonTerminal(n) => self.parse_rule(self.g.rule_index(n).expect("validated"), pos),
            Symbol::Optional(n) => {
                let mut out: Vec<(Node, usize)> = self
                    .parse_rule(self.g.rule_index(n).expect("validated"), pos)
                    .into_iter()
                    .map(|(node, end)| (Node::Optional { symbol: n.clone(), expansion: Some(Box::new(node)) }, end))
                    .collect();
                out.push((Node::Optional { symbol: n.clone(), expansion: None }, pos));
                out
            }
        }
    }

    fn parse_seq(&mut self, syms: &[Symbol], pos: usize) -> Vec<(Vec<Node>, usize)> {
        let Some((head, rest)) = syms.split_first() else {
            return vec![(Vec::new(), pos)];
        };
        let mut out = Vec::new();
        for (node, mid) in self.parse_symbol(head, pos) {
            for (tail, end) in self.parse_seq(rest, mid) {
                let mut children = Vec::with_capacity(tail.len() + 1);
                children.push(node.clone());
                children.extend(tail);
                out.push((children, end));
            }
        }
        out
    }
}

/// Recovers a derivation tree whose frontier equals `tokens`.
///
/// Alternatives are explored in declaration order with backtracking; the
/// first complete parse wins.
pub fn parse_sentence<S: AsRef<str>>(g: &Grammar, tokens: &[S]) -> Result<DerivationTree, GrammarError> {
    let mut p = SentenceParser { g, tokens: tokens.iter().map(AsRef::as_ref).collect(), furthest_mismatch: 0 };
    let start = g.rule_index(g.start()).expect("start rule exists");
    let parses = p.parse_rule(start, 0);
    let n = p.tokens.len();
    if let Some((node, _)) = parses.iter().find(|(_, end)| *end == n) {
        return Ok(DerivationTree::new(node.clone()));
    }
    match parses.iter().map(|(_, end)| *end).max() {
        Some(end) if end >= p.furthest_mismatch => Err(GrammarError::TrailingTokens { position: end }),
        _ => Err(GrammarError::UnparseableSentence { position: p.furthest_mismatch }),
    }
}
