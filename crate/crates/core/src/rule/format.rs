//! Text form of rules: one rule per line,
//! `atom ∧ atom ⇒ head TAB support TAB confidence`.
//!
//! Identifiers that would be ambiguous (reserved atom names, punctuation,
//! whitespace) are written inside `<...>` with `\` escaping `\` and `>`.

use std::io::{BufRead, Write};

use super::{Atom, Polarity, Rule, Term, Var};
use crate::error::{Error, Result};

const AND: &str = " ∧ ";
const IMPLIES: &str = "⇒";

fn var_name(v: Var) -> String {
    match v {
        0 => "?x".into(),
        1 => "?y".into(),
        2 => "?z".into(),
        3 => "?w".into(),
        n => format!("?v{n}"),
    }
}

fn parse_var(s: &str) -> Option<Var> {
    match s {
        "?x" => Some(0),
        "?y" => Some(1),
        "?z" => Some(2),
        "?w" => Some(3),
        _ => s.strip_prefix("?v")?.parse().ok().filter(|&n: &Var| n >= 4),
    }
}

fn is_reserved_relation(name: &str) -> bool {
    matches!(
        name,
        "type" | "notype" | "isPopular" | "hasNotChanged" | "complete" | "incomplete"
    ) || cardinality_prefix(name).is_some()
}

fn cardinality_prefix(name: &str) -> Option<(bool, usize)> {
    let (less, rest) = if let Some(rest) = name.strip_prefix("lessThan_") {
        (true, rest)
    } else {
        (false, name.strip_prefix("moreThan_")?)
    };
    if rest.is_empty() || !rest.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    rest.parse().ok().map(|n| (less, n))
}

fn needs_quoting(s: &str) -> bool {
    s.is_empty()
        || s.starts_with('?')
        || s.starts_with('<')
        || s == "true"
        || s.chars()
            .any(|c| c.is_whitespace() || matches!(c, '(' | ')' | ',' | '∧' | '⇒' | '\\'))
}

fn ident(s: &str, reserved: bool) -> String {
    if reserved || needs_quoting(s) {
        let mut out = String::with_capacity(s.len() + 2);
        out.push('<');
        for c in s.chars() {
            if c == '>' || c == '\\' {
                out.push('\\');
            }
            out.push(c);
        }
        out.push('>');
        out
    } else {
        s.to_string()
    }
}

fn term_text(t: &Term) -> String {
    match t {
        Term::Var(v) => var_name(*v),
        Term::Const(c) => ident(c, false),
    }
}

pub(crate) fn render_atom(atom: &Atom) -> String {
    match atom {
        Atom::Relation {
            relation,
            subject,
            object,
        } => format!(
            "{}({},{})",
            ident(relation, is_reserved_relation(relation)),
            term_text(subject),
            term_text(object)
        ),
        Atom::Type { var, class } => format!("type({},{})", var_name(*var), ident(class, false)),
        Atom::NoType { var, class } => format!("notype({},{})", var_name(*var), ident(class, false)),
        Atom::LessThan { var, relation, bound } => {
            format!("lessThan_{bound}({},{})", var_name(*var), ident(relation, false))
        }
        Atom::MoreThan { var, relation, bound } => {
            format!("moreThan_{bound}({},{})", var_name(*var), ident(relation, false))
        }
        Atom::IsPopular { var } => format!("isPopular({},true)", var_name(*var)),
        Atom::HasNotChanged { var, relation } => {
            format!("hasNotChanged({},{})", var_name(*var), ident(relation, false))
        }
        Atom::Completeness {
            polarity,
            var,
            relation,
        } => {
            format!("{polarity}({},{})", var_name(*var), ident(relation, false))
        }
    }
}

pub(crate) fn render_rule_text(rule: &Rule) -> String {
    let body: Vec<String> = rule.body.iter().map(render_atom).collect();
    let head = render_atom(&rule.head);
    if body.is_empty() {
        format!("{IMPLIES} {head}")
    } else {
        format!("{} {IMPLIES} {head}", body.join(AND))
    }
}

pub fn write_rules<W: Write>(mut w: W, rules: &[Rule]) -> std::io::Result<()> {
    for r in rules {
        writeln!(w, "{}\t{}\t{}", render_rule_text(r), r.support, r.confidence)?;
    }
    Ok(())
}

struct Cursor<'a> {
    text: &'a str,
    pos: usize,
}

#[derive(Debug)]
enum Token {
    Plain(String),
    Quoted(String),
}

impl Token {
    fn text(&self) -> &str {
        match self {
            Token::Plain(s) | Token::Quoted(s) => s,
        }
    }
}

impl<'a> Cursor<'a> {
    fn rest(&self) -> &'a str {
        &self.text[self.pos..]
    }

    fn skip_ws(&mut self) {
        let trimmed = self.rest().trim_start();
        self.pos = self.text.len() - trimmed.len();
    }

    fn eat(&mut self, s: &str) -> bool {
        self.skip_ws();
        if self.rest().starts_with(s) {
            self.pos += s.len();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, s: &str) -> std::result::Result<(), String> {
        if self.eat(s) {
            Ok(())
        } else {
            Err(format!("expected `{s}` at `{}`", self.rest()))
        }
    }

    fn token(&mut self) -> std::result::Result<Token, String> {
        self.skip_ws();
        let rest = self.rest();
        if let Some(inner) = rest.strip_prefix('<') {
            let mut out = String::new();
            let mut chars = inner.char_indices();
            while let Some((i, c)) = chars.next() {
                match c {
                    '\\' => match chars.next() {
                        Some((_, e)) => out.push(e),
                        None => return Err("dangling escape".into()),
                    },
                    '>' => {
                        self.pos += 1 + i + 1;
                        return Ok(Token::Quoted(out));
                    }
                    c => out.push(c),
                }
            }
            return Err("unterminated `<`".into());
        }
        let end = rest
            .find(|c: char| c.is_whitespace() || matches!(c, '(' | ')' | ','))
            .unwrap_or(rest.len());
        if end == 0 {
            return Err(format!("expected identifier at `{rest}`"));
        }
        self.pos += end;
        Ok(Token::Plain(rest[..end].to_string()))
    }
}

fn to_var(tok: &Token) -> std::result::Result<Var, String> {
    match tok {
        Token::Plain(s) => parse_var(s).ok_or_else(|| format!("expected variable, found `{s}`")),
        Token::Quoted(s) => Err(format!("expected variable, found `<{s}>`")),
    }
}

fn to_term(tok: Token) -> std::result::Result<Term, String> {
    match tok {
        Token::Plain(s) if s.starts_with('?') => parse_var(&s)
            .map(Term::Var)
            .ok_or_else(|| format!("bad variable `{s}`")),
        Token::Plain(s) | Token::Quoted(s) => Ok(Term::Const(s)),
    }
}

fn parse_atom(c: &mut Cursor<'_>) -> std::result::Result<Atom, String> {
    let name = c.token()?;
    c.expect("(")?;
    let a = c.token()?;
    c.expect(",")?;
    let b = c.token()?;
    c.expect(")")?;
    let plain = match &name {
        Token::Plain(s) => Some(s.as_str()),
        Token::Quoted(_) => None,
    };
    let atom = match plain {
        Some("type") => Atom::Type {
            var: to_var(&a)?,
            class: b.text().to_string(),
        },
        Some("notype") => Atom::NoType {
            var: to_var(&a)?,
            class: b.text().to_string(),
        },
        Some("isPopular") => {
            if !matches!(&b, Token::Plain(s) if s == "true") {
                return Err("isPopular takes `true` as second argument".into());
            }
            Atom::IsPopular { var: to_var(&a)? }
        }
        Some("hasNotChanged") => Atom::HasNotChanged {
            var: to_var(&a)?,
            relation: b.text().to_string(),
        },
        Some(p @ ("complete" | "incomplete")) => Atom::Completeness {
            polarity: if p == "complete" {
                Polarity::Complete
            } else {
                Polarity::Incomplete
            },
            var: to_var(&a)?,
            relation: b.text().to_string(),
        },
        Some(s) if cardinality_prefix(s).is_some() => {
            let (less, bound) = cardinality_prefix(s).unwrap();
            let var = to_var(&a)?;
            let relation = b.text().to_string();
            if less {
                Atom::LessThan { var, relation, bound }
            } else {
                Atom::MoreThan { var, relation, bound }
            }
        }
        _ => Atom::Relation {
            relation: name.text().to_string(),
            subject: to_term(a)?,
            object: to_term(b)?,
        },
    };
    Ok(atom)
}

fn parse_rule_text(text: &str) -> std::result::Result<(Vec<Atom>, Atom), String> {
    let mut c = Cursor { text, pos: 0 };
    let mut body = Vec::new();
    if !c.eat(IMPLIES) {
        loop {
            body.push(parse_atom(&mut c)?);
            if c.eat(IMPLIES) {
                break;
            }
            c.expect("∧")?;
        }
    }
    let head = parse_atom(&mut c)?;
    c.skip_ws();
    if !c.rest().is_empty() {
        return Err(format!("trailing input `{}`", c.rest()));
    }
    Ok((body, head))
}

/// Parses one `rule TAB support TAB confidence` line.
pub fn parse_rule(line: &str) -> std::result::Result<Rule, String> {
    let fields: Vec<&str> = line.split('\t').collect();
    if fields.len() != 3 {
        return Err(format!("expected 3 tab-separated fields, found {}", fields.len()));
    }
    let (body, head) = parse_rule_text(fields[0])?;
    let support = fields[1]
        .parse()
        .map_err(|e| format!("bad support `{}`: {e}", fields[1]))?;
    let confidence = fields[2]
        .parse()
        .map_err(|e| format!("bad confidence `{}`: {e}", fields[2]))?;
    Ok(Rule {
        body,
        head,
        support,
        confidence,
        provenance: Vec::new(),
    })
}

/// Reads a rule file; `#` lines and blank lines are skipped.
pub fn parse_rules<R: BufRead>(reader: R, source_name: &str) -> Result<Vec<Rule>> {
    let mut rules = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(source_name, e))?;
        let line = line.strip_suffix('\r').unwrap_or(&line);
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        rules.push(parse_rule(line).map_err(|m| Error::parse(source_name, idx + 1, m))?);
    }
    Ok(rules)
}
