//! Text format for grammars.
//!
//! ```text
//! # comment
//! %start t0
//! %token t1 = "a" | "3" ;
//! %token t5 = [a-z]+ ;
//! t0 : t1 "+" t1 ";" | t1 ";" ;
//! ```
//!
//! `%whitespace sensitive` may follow `%start` for languages where
//! whitespace is significant. An empty alternative denotes epsilon.

use std::collections::HashMap;
use std::fmt::Write as _;

use super::{CharClass, Grammar, GrammarError, LexAtom, NtId, Symbol, TokId, TokenDef};

pub fn escape_literal(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            c if (c as u32) < 0x20 || c as u32 == 0x7f => {
                let _ = write!(out, "\\x{:02X}", c as u32);
            }
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

pub(crate) fn write_symbol(out: &mut String, g: &Grammar, s: &Symbol) {
    match s {
        Symbol::Lit(l) => out.push_str(&escape_literal(l)),
        Symbol::Class(c) => {
            let _ = write!(out, "{c}");
        }
        Symbol::Nt(n) => out.push_str(g.name(*n)),
        Symbol::Tok(t) => match g.token(*t) {
            Some(def) => out.push_str(&def.name),
            None => {
                let _ = write!(out, "{}", t.default_name());
            }
        },
    }
}

fn write_atom(out: &mut String, a: &LexAtom) {
    match a {
        LexAtom::Lit(l) => out.push_str(&escape_literal(l)),
        LexAtom::Class(c) => {
            let _ = write!(out, "{c}");
        }
    }
}

/// Serializes `g`. Output is deterministic and parses back to an equal grammar.
pub fn to_text(g: &Grammar) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "%start {}", g.name(g.start()));
    if g.whitespace_sensitive() {
        out.push_str("%whitespace sensitive\n");
    }
    for def in g.tokens() {
        let _ = write!(out, "%token {} =", def.name);
        for (i, alt) in def.alts.iter().enumerate() {
            if i > 0 {
                out.push_str(" |");
            }
            for a in alt {
                out.push(' ');
                write_atom(&mut out, a);
            }
        }
        out.push_str(" ;\n");
    }
    for nt in g.nonterminals() {
        let alts = g.alternatives(nt);
        if alts.is_empty() {
            continue;
        }
        let _ = write!(out, "{} :", g.name(nt));
        for (i, rhs) in alts.iter().enumerate() {
            if i > 0 {
                out.push_str(" |");
            }
            for s in rhs {
                out.push(' ');
                write_symbol(&mut out, g, s);
            }
        }
        out.push_str(" ;\n");
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
enum Lexeme {
    Directive(String),
    Ident(String),
    Literal(String),
    Class(CharClass),
    Colon,
    Equals,
    Bar,
    Semi,
}

struct Lexer<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: usize,
    column: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Self {
            chars: src.chars().peekable(),
            line: 1,
            column: 1,
        }
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn err(&self, message: impl Into<String>) -> GrammarError {
        GrammarError::Syntax {
            line: self.line,
            column: self.column,
            message: message.into(),
        }
    }

    fn escape(&mut self) -> Result<char, GrammarError> {
        let (line, column) = (self.line, self.column);
        let Some(c) = self.bump() else {
            return Err(self.err("unterminated escape"));
        };
        Ok(match c {
            '"' => '"',
            '\\' => '\\',
            'n' => '\n',
            't' => '\t',
            'r' => '\r',
            ']' => ']',
            '[' => '[',
            '-' => '-',
            'x' => {
                let mut v = 0u32;
                for _ in 0..2 {
                    let d = self
                        .bump()
                        .and_then(|h| h.to_digit(16))
                        .ok_or_else(|| self.err("expected two hex digits after \\x"))?;
                    v = v * 16 + d;
                }
                char::from_u32(v).expect("two hex digits are a valid scalar")
            }
            other => {
                return Err(GrammarError::UnknownEscape {
                    line,
                    column,
                    escape: other,
                })
            }
        })
    }

    fn next(&mut self) -> Result<Option<(usize, usize, Lexeme)>, GrammarError> {
        loop {
            match self.chars.peek() {
                None => return Ok(None),
                Some(c) if c.is_whitespace() => {
                    self.bump();
                }
                Some('#') => {
                    while let Some(c) = self.bump() {
                        if c == '\n' {
                            break;
                        }
                    }
                }
                Some(_) => break,
            }
        }
        let (line, column) = (self.line, self.column);
        let c = self.bump().expect("peeked");
        let lex = match c {
            ':' => Lexeme::Colon,
            '=' => Lexeme::Equals,
            '|' => Lexeme::Bar,
            ';' => Lexeme::Semi,
            '"' => {
                let mut s = String::new();
                loop {
                    match self.bump() {
                        None => return Err(self.err("unterminated literal")),
                        Some('"') => break,
                        Some('\\') => s.push(self.escape()?),
                        Some(c) => s.push(c),
                    }
                }
                if s.is_empty() {
                    return Err(GrammarError::Syntax {
                        line,
                        column,
                        message: "empty literal".into(),
                    });
                }
                Lexeme::Literal(s)
            }
            '[' => {
                let mut items: Vec<char> = Vec::new();
                let mut ranges = Vec::new();
                loop {
                    let c = match self.bump() {
                        None => return Err(self.err("unterminated character class")),
                        Some(']') => break,
                        Some('\\') => self.escape()?,
                        Some(c) => c,
                    };
                    items.push(c);
                    // a '-' between two items forms a range
                    if self.chars.peek() == Some(&'-') {
                        self.bump();
                        let hi = match self.bump() {
                            None => return Err(self.err("unterminated character class")),
                            Some('\\') => self.escape()?,
                            Some(']') => return Err(self.err("dangling '-' in character class")),
                            Some(h) => h,
                        };
                        items.pop();
                        if hi < c {
                            return Err(self.err(format!("invalid range {c:?}-{hi:?}")));
                        }
                        ranges.push((c, hi));
                    }
                }
                ranges.extend(items.into_iter().map(|c| (c, c)));
                let repeatable = if self.chars.peek() == Some(&'+') {
                    self.bump();
                    true
                } else {
                    false
                };
                let class = CharClass::new(ranges, repeatable).map_err(|e| GrammarError::Syntax {
                    line,
                    column,
                    message: e.to_string(),
                })?;
                Lexeme::Class(class)
            }
            '%' => {
                let mut s = String::new();
                while let Some(&c) = self.chars.peek() {
                    if c.is_ascii_alphanumeric() || c == '_' {
                        s.push(c);
                        self.bump();
                    } else {
                        break;
                    }
                }
                Lexeme::Directive(s)
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut s = String::from(c);
                while let Some(&c) = self.chars.peek() {
                    if c.is_ascii_alphanumeric() || c == '_' {
                        s.push(c);
                        self.bump();
                    } else {
                        break;
                    }
                }
                Lexeme::Ident(s)
            }
            other => {
                return Err(GrammarError::Syntax {
                    line,
                    column,
                    message: format!("unexpected character {other:?}"),
                })
            }
        };
        Ok(Some((line, column, lex)))
    }
}

enum RawSym {
    Lit(String),
    Class(CharClass),
    Name(String),
}

struct RawRule {
    lhs: String,
    line: usize,
    column: usize,
    alts: Vec<Vec<RawSym>>,
}

/// Parses the text format. Errors carry 1-based line/column positions.
pub fn parse(src: &str) -> Result<Grammar, GrammarError> {
    let mut lexer = Lexer::new(src);
    let mut lexemes = Vec::new();
    while let Some(l) = lexer.next()? {
        lexemes.push(l);
    }
    let end = (lexer.line, lexer.column);
    let mut pos = 0usize;
    let at = |pos: usize| lexemes.get(pos).map(|(l, c, _)| (*l, *c)).unwrap_or(end);
    let syntax = |(line, column): (usize, usize), message: &str| GrammarError::Syntax {
        line,
        column,
        message: message.to_string(),
    };

    let mut start: Option<String> = None;
    let mut sensitive = false;
    let mut tokens: Vec<TokenDef> = Vec::new();
    let mut rules: Vec<RawRule> = Vec::new();

    while pos < lexemes.len() {
        let (line, column, lex) = lexemes[pos].clone();
        pos += 1;
        match lex {
            Lexeme::Directive(d) if d == "start" => {
                if start.is_some() {
                    return Err(syntax((line, column), "duplicate %start"));
                }
                match lexemes.get(pos) {
                    Some((_, _, Lexeme::Ident(name))) => {
                        start = Some(name.clone());
                        pos += 1;
                    }
                    _ => return Err(syntax(at(pos), "expected a name after %start")),
                }
            }
            Lexeme::Directive(d) if d == "whitespace" => {
                match lexemes.get(pos) {
                    Some((_, _, Lexeme::Ident(mode))) if mode == "sensitive" => sensitive = true,
                    Some((_, _, Lexeme::Ident(mode))) if mode == "insensitive" => sensitive = false,
                    _ => return Err(syntax(at(pos), "expected `sensitive` or `insensitive`")),
                }
                pos += 1;
            }
            Lexeme::Directive(d) if d == "token" => {
                if start.is_none() {
                    return Err(syntax((line, column), "%start must come first"));
                }
                let name = match lexemes.get(pos) {
                    Some((_, _, Lexeme::Ident(name))) => name.clone(),
                    _ => return Err(syntax(at(pos), "expected a token name")),
                };
                pos += 1;
                if lexemes.get(pos).map(|l| &l.2) != Some(&Lexeme::Equals) {
                    return Err(syntax(at(pos), "expected `=`"));
                }
                pos += 1;
                let mut alts = vec![Vec::new()];
                loop {
                    match lexemes.get(pos).map(|l| &l.2) {
                        Some(Lexeme::Literal(s)) => alts.last_mut().unwrap().push(LexAtom::Lit(s.clone())),
                        Some(Lexeme::Class(c)) => alts.last_mut().unwrap().push(LexAtom::Class(c.clone())),
                        Some(Lexeme::Bar) => alts.push(Vec::new()),
                        Some(Lexeme::Semi) => {
                            pos += 1;
                            break;
                        }
                        _ => return Err(syntax(at(pos), "expected a literal, class, `|` or `;`")),
                    }
                    pos += 1;
                }
                if alts.iter().any(Vec::is_empty) {
                    return Err(syntax((line, column), "token alternatives must be non-empty"));
                }
                if tokens.iter().any(|t| t.name == name) {
                    return Err(GrammarError::DuplicateName(name));
                }
                tokens.push(TokenDef { name, alts });
            }
            Lexeme::Directive(d) => {
                return Err(syntax((line, column), &format!("unknown directive %{d}")));
            }
            Lexeme::Ident(lhs) => {
                if start.is_none() {
                    return Err(syntax((line, column), "%start must come first"));
                }
                if lexemes.get(pos).map(|l| &l.2) != Some(&Lexeme::Colon) {
                    return Err(syntax(at(pos), "expected `:`"));
                }
                pos += 1;
                let mut alts = vec![Vec::new()];
                loop {
                    let Some((l, c, lex)) = lexemes.get(pos) else {
                        return Err(syntax(end, "unterminated rule, expected `;`"));
                    };
                    match lex {
                        Lexeme::Literal(s) => alts.last_mut().unwrap().push(RawSym::Lit(s.clone())),
                        Lexeme::Class(cls) => alts.last_mut().unwrap().push(RawSym::Class(cls.clone())),
                        Lexeme::Ident(n) => alts.last_mut().unwrap().push(RawSym::Name(n.clone())),
                        Lexeme::Bar => alts.push(Vec::new()),
                        Lexeme::Semi => {
                            pos += 1;
                            break;
                        }
                        _ => return Err(syntax((*l, *c), "unexpected token in rule body")),
                    }
                    pos += 1;
                }
                rules.push(RawRule {
                    lhs,
                    line,
                    column,
                    alts,
                });
            }
            _ => return Err(syntax((line, column), "expected a directive or a rule")),
        }
    }

    let Some(start) = start else {
        return Err(syntax((1, 1), "missing %start"));
    };
    if tokens.iter().any(|t| t.name == start) {
        return Err(syntax((1, 1), "the start symbol cannot be a token"));
    }

    let mut g = Grammar::new(start.clone());
    g.set_whitespace_sensitive(sensitive);
    g.set_tokens(tokens);
    let token_ids: HashMap<String, TokId> = g
        .tokens()
        .iter()
        .enumerate()
        .map(|(i, t)| (t.name.clone(), TokId(i as u32)))
        .collect();

    // registry order: start, then rules in the order they are defined
    let mut ids: HashMap<String, NtId> = HashMap::new();
    ids.insert(start, g.start());
    let mut defined: HashMap<String, (usize, usize)> = HashMap::new();
    for rule in &rules {
        if token_ids.contains_key(&rule.lhs) {
            return Err(GrammarError::Syntax {
                line: rule.line,
                column: rule.column,
                message: format!("`{}` is declared as a token", rule.lhs),
            });
        }
        if defined.insert(rule.lhs.clone(), (rule.line, rule.column)).is_some() {
            return Err(GrammarError::DuplicateName(rule.lhs.clone()));
        }
        if !ids.contains_key(&rule.lhs) {
            let id = g.add_nonterminal(rule.lhs.clone())?;
            ids.insert(rule.lhs.clone(), id);
        }
    }
    for rule in rules {
        let lhs = ids[&rule.lhs];
        for alt in rule.alts {
            let mut rhs = Vec::with_capacity(alt.len());
            for s in alt {
                rhs.push(match s {
                    RawSym::Lit(l) => Symbol::Lit(l),
                    RawSym::Class(c) => Symbol::Class(c),
                    RawSym::Name(n) => {
                        if let Some(t) = token_ids.get(&n) {
                            Symbol::Tok(*t)
                        } else if defined.contains_key(&n) {
                            Symbol::Nt(ids[&n])
                        } else {
                            return Err(GrammarError::DanglingReference(n));
                        }
                    }
                });
            }
            if !g.add_production(lhs, rhs) {
                return Err(GrammarError::Syntax {
                    line: rule.line,
                    column: rule.column,
                    message: format!("duplicate alternative for `{}`", rule.lhs),
                });
            }
        }
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const SECTION_2_3: &str = r#"# bubbled-and-merged example
%start t0
t0 : t1 t2 t1 ";" ;
t1 : "a" | "3" ;
t2 : "<" | "+" ;
"#;

    #[test]
    fn round_trip_is_byte_identical() {
        let g = parse(SECTION_2_3).unwrap();
        let text = to_text(&g);
        let again = parse(&text).unwrap();
        assert_eq!(g, again);
        assert_eq!(text, to_text(&again));
        assert_eq!(
            text,
            "%start t0\nt0 : t1 t2 t1 \";\" ;\nt1 : \"a\" | \"3\" ;\nt2 : \"<\" | \"+\" ;\n"
        );
    }

    #[test]
    fn charclass_survives_round_trip() {
        let g = parse("%start s\n%token t5 = [0-9]+ | \"x\" ;\ns : t5 \";\" ;\n").unwrap();
        let back = parse(&to_text(&g)).unwrap();
        let def = &back.tokens()[0];
        match &def.alts[0][0] {
            LexAtom::Class(c) => {
                assert!(c.repeatable());
                assert_eq!(c.ranges(), &[('0', '9')]);
            }
            other => panic!("expected class, got {other:?}"),
        }
        assert_eq!(def.alts[1], vec![LexAtom::Lit("x".into())]);
        assert_eq!(g, back);
    }

    #[test]
    fn dangling_reference_is_reported() {
        let err = parse("%start s\ns : x \";\" ;\n").unwrap_err();
        assert_eq!(err, GrammarError::DanglingReference("x".into()));
    }

    #[test]
    fn syntax_errors_carry_positions() {
        let err = parse("%start s\ns : \"a\" \n  ? ;\n").unwrap_err();
        assert_eq!(
            err,
            GrammarError::Syntax {
                line: 3,
                column: 3,
                message: "unexpected character '?'".into()
            }
        );
        let err = parse("%start s\ns : \"\\q\" ;\n").unwrap_err();
        assert!(matches!(err, GrammarError::UnknownEscape { line: 2, escape: 'q', .. }), "{err:?}");
    }

    #[test]
    fn escapes_and_epsilon_round_trip() {
        let src = "%start s\n%whitespace sensitive\ns : \"\\\"\\\\\\n\\t\\x01\" | ;\n";
        let g = parse(src).unwrap();
        assert!(g.whitespace_sensitive());
        assert_eq!(g.alternatives(g.start())[0], vec![Symbol::Lit("\"\\\n\t\u{1}".into())]);
        assert!(g.alternatives(g.start())[1].is_empty());
        assert_eq!(to_text(&g), src);
    }

    #[test]
    fn missing_start_is_an_error() {
        assert!(parse("s : \"a\" ;").is_err());
        assert!(parse("").is_err());
    }
}
