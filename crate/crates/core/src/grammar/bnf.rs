use std::sync::Arc;

use super::{GrammarError, Rule, Symbol};

struct Statement {
    line: usize,
    text: String,
}

fn malformed(reason: impl Into<String>, line: usize) -> GrammarError {
    GrammarError::MalformedRule { reason: reason.into(), line }
}

/// Groups physical lines into rule statements.
fn statements(text: &str) -> Result<Vec<Statement>, GrammarError> {
    let mut out: Vec<Statement> = Vec::new();
    let mut prev_ends_with_bar = false;
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if line.contains("::=") {
            out.push(Statement { line: line_no, text: line.to_string() });
        } else if !out.is_empty() && (prev_ends_with_bar || line.starts_with('|')) {
            let cur = out.last_mut().expect("checked non-empty");
            cur.text.push(' ');
            cur.text.push_str(line);
        } else {
            return Err(malformed("expected `<name> ::= ...`", line_no));
        }
        prev_ends_with_bar = line.ends_with('|');
    }
    Ok(out)
}

/// Splits on whitespace and isolates `|` separators.
fn tokenize(s: &str) -> Vec<&str> {
    let mut toks = Vec::new();
    for piece in s.split_whitespace() {
        let mut rest = piece;
        while let Some(p) = rest.find('|') {
            if p > 0 {
                toks.push(&rest[..p]);
            }
            toks.push("|");
            rest = &rest[p + 1..];
        }
        if !rest.is_empty() {
            toks.push(rest);
        }
    }
    toks
}

fn is_name(s: &str) -> bool {
    !s.is_empty() && !s.contains(['<', '>', '[', ']', '|'])
}

fn nonterminal_name(tok: &str) -> Option<&str> {
    tok.strip_prefix('<').and_then(|t| t.strip_suffix('>')).filter(|n| is_name(n))
}

fn classify(tok: &str, line: usize) -> Result<Symbol, GrammarError> {
    if let Some(inner) = tok.strip_prefix('[').and_then(|t| t.strip_suffix(']')) {
        return nonterminal_name(inner)
            .map(|n| Symbol::Optional(Arc::from(n)))
            .ok_or_else(|| malformed(format!("bad optional symbol `{tok}`"), line));
    }
    if tok.starts_with('<') {
        return nonterminal_name(tok)
            .map(|n| Symbol::NonTerminal(Arc::from(n)))
            .ok_or_else(|| malformed(format!("bad nonterminal `{tok}`"), line));
    }
    if tok.contains("...") {
        return Err(malformed("ellipsis is documentation shorthand, not grammar syntax", line));
    }
    if !is_name(tok) {
        return Err(malformed(format!("bad terminal `{tok}`"), line));
    }
    Ok(Symbol::Terminal(Arc::from(tok)))
}

pub(super) fn parse_rules(text: &str) -> Result<(Vec<Rule>, Vec<usize>), GrammarError> {
    let mut rules = Vec::new();
    let mut lines = Vec::new();
    for st in statements(text)? {
        let (lhs, rhs) = st.text.split_once("::=").expect("statement contains ::=");
        let lhs_toks: Vec<&str> = lhs.split_whitespace().collect();
        let [lhs_tok] = lhs_toks.as_slice() else {
            return Err(malformed("left-hand side must be a single nonterminal", st.line));
        };
        let name = nonterminal_name(lhs_tok)
            .ok_or_else(|| malformed(format!("left-hand side `{lhs_tok}` is not a nonterminal"), st.line))?;
        let mut alternatives: Vec<Vec<Symbol>> = vec![Vec::new()];
        for tok in tokenize(rhs) {
            if tok == "|" {
                alternatives.push(Vec::new());
            } else if tok == "::=" {
                return Err(malformed("unexpected `::=`", st.line));
            } else {
                alternatives.last_mut().expect("non-empty").push(classify(tok, st.line)?);
            }
        }
        if alternatives.iter().any(Vec::is_empty) {
            return Err(GrammarError::EmptyAlternative { name: name.to_string(), line: st.line });
        }
        rules.push(Rule { lhs: Arc::from(name), alternatives });
        lines.push(st.line);
    }
    Ok((rules, lines))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tokenizer_splits_glued_bars() {
        assert_eq!(tokenize("a|b | <c>|[<d>]"), ["a", "|", "b", "|", "<c>", "|", "[<d>]"]);
    }

    #[test]
    fn classify_symbols() {
        assert_eq!(classify("<x_y>", 1).unwrap(), Symbol::NonTerminal("x_y".into()));
        assert_eq!(classify("[<x>]", 1).unwrap(), Symbol::Optional("x".into()));
        assert_eq!(classify("SAMME.R", 1).unwrap(), Symbol::Terminal("SAMME.R".into()));
        assert!(classify("<x", 1).is_err());
        assert!(classify("[x]", 1).is_err());
        assert!(classify("<>", 1).is_err());
    }
}
