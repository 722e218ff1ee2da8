use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use super::ast::{Atom, Constant, Formula, FormulaAst, SymbolCategory, Term};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ParseErrorKind {
    Syntax,
    Negation,
    Disjunction,
    ImplicationOutsideGuard,
    UnboundedQuantifier,
    UnknownSymbolCategory,
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ParseErrorKind::Syntax => "syntax error",
            ParseErrorKind::Negation => "negation is not a formula-building rule",
            ParseErrorKind::Disjunction => "disjunction is not a formula-building rule",
            ParseErrorKind::ImplicationOutsideGuard => "implication only allowed as `forall x in t (P => Q)`",
            ParseErrorKind::UnboundedQuantifier => "quantifier without an `in` bound",
            ParseErrorKind::UnknownSymbolCategory => "symbol used in more than one category",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Error, Serialize)]
#[error("{kind} at line {line}, column {col}: {msg}")]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub line: usize,
    pub col: usize,
    pub msg: String,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Num(f64),
    LParen,
    RParen,
    Comma,
    Amp,
    Eq,
    Implies,
    Forall,
    Exists,
    In,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "identifier `{s}`"),
            Tok::Num(x) => write!(f, "number `{x}`"),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::Comma => f.write_str("`,`"),
            Tok::Amp => f.write_str("`&`"),
            Tok::Eq => f.write_str("`=`"),
            Tok::Implies => f.write_str("`=>`"),
            Tok::Forall => f.write_str("`forall`"),
            Tok::Exists => f.write_str("`exists`"),
            Tok::In => f.write_str("`in`"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(text: &str) -> Result<Vec<Spanned>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0, 1, 1);
    let err = |kind, line, col, msg: String| Err(ParseError { kind, line, col, msg });
    while i < chars.len() {
        let c = chars[i];
        let (l0, c0) = (line, col);
        let next = chars.get(i + 1).copied();
        let mut adv = 1;
        let tok = match c {
            '\n' => {
                line += 1;
                col = 1;
                i += 1;
                continue;
            }
            c if c.is_whitespace() => None,
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            ',' => Some(Tok::Comma),
            '&' => Some(Tok::Amp),
            '=' if next == Some('>') => {
                adv = 2;
                Some(Tok::Implies)
            }
            '=' => Some(Tok::Eq),
            '|' | '∨' => return err(ParseErrorKind::Disjunction, l0, c0, format!("`{c}`")),
            '!' | '~' | '¬' => return err(ParseErrorKind::Negation, l0, c0, format!("`{c}`")),
            '-' if next == Some('>') => {
                return err(ParseErrorKind::ImplicationOutsideGuard, l0, c0, "`->`".into());
            }
            '<' if matches!(next, Some('-') | Some('=')) => {
                return err(ParseErrorKind::ImplicationOutsideGuard, l0, c0, "biconditional".into());
            }
            '→' | '⇒' | '↔' => return err(ParseErrorKind::ImplicationOutsideGuard, l0, c0, format!("`{c}`")),
            c if c.is_ascii_digit()
                || c == '.'
                || (c == '-' && next.is_some_and(|n| n.is_ascii_digit() || n == '.')) =>
            {
                let mut j = i + 1;
                while j < chars.len()
                    && (chars[j].is_ascii_digit()
                        || chars[j] == '.'
                        || chars[j] == 'e'
                        || chars[j] == 'E'
                        || ((chars[j] == '-' || chars[j] == '+') && matches!(chars[j - 1], 'e' | 'E')))
                {
                    j += 1;
                }
                let s: String = chars[i..j].iter().collect();
                adv = j - i;
                match s.parse::<f64>() {
                    Ok(x) => Some(Tok::Num(x)),
                    Err(_) => return err(ParseErrorKind::Syntax, l0, c0, format!("bad number `{s}`")),
                }
            }
            c if c.is_alphabetic() || c == '_' => {
                let mut j = i + 1;
                while j < chars.len() && (chars[j].is_alphanumeric() || chars[j] == '_' || chars[j] == '\'') {
                    j += 1;
                }
                let s: String = chars[i..j].iter().collect();
                adv = j - i;
                match s.as_str() {
                    "forall" => Some(Tok::Forall),
                    "exists" => Some(Tok::Exists),
                    "in" => Some(Tok::In),
                    "or" => return err(ParseErrorKind::Disjunction, l0, c0, "`or`".into()),
                    "not" => return err(ParseErrorKind::Negation, l0, c0, "`not`".into()),
                    "implies" | "iff" => {
                        return err(ParseErrorKind::ImplicationOutsideGuard, l0, c0, format!("`{s}`"));
                    }
                    _ => Some(Tok::Ident(s)),
                }
            }
            c => return err(ParseErrorKind::Syntax, l0, c0, format!("unexpected character `{c}`")),
        };
        if let Some(tok) = tok {
            out.push(Spanned { tok, line: l0, col: c0 });
        }
        i += adv;
        col += adv;
    }
    out.push(Spanned { tok: Tok::Eof, line, col });
    Ok(out)
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    scope: Vec<String>,
    constants: BTreeMap<String, SymbolCategory>,
}

/// Parses the ASCII surface syntax into an AST.
pub fn parse(text: &str) -> Result<FormulaAst, ParseError> {
    let mut p = Parser { toks: lex(text)?, pos: 0, scope: Vec::new(), constants: BTreeMap::new() };
    let root = p.conj()?;
    match p.peek() {
        Tok::Eof => {}
        Tok::Implies => return p.fail(ParseErrorKind::ImplicationOutsideGuard, "`=>` outside a universal quantifier"),
        t => {
            let m = format!("unexpected {t}");
            return p.fail(ParseErrorKind::Syntax, m);
        }
    }
    let constants = p.constants.into_iter().map(|(k, category)| (k, Constant { category, object: None })).collect();
    Ok(FormulaAst { root, constants })
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if t != Tok::Eof {
            self.pos += 1;
        }
        t
    }

    fn fail<T>(&self, kind: ParseErrorKind, msg: impl Into<String>) -> Result<T, ParseError> {
        let s = &self.toks[self.pos];
        Err(ParseError { kind, line: s.line, col: s.col, msg: msg.into() })
    }

    fn expect(&mut self, t: Tok) -> Result<(), ParseError> {
        if *self.peek() == t {
            self.bump();
            Ok(())
        } else {
            let m = format!("expected {t}, found {}", self.peek());
            self.fail(ParseErrorKind::Syntax, m)
        }
    }

    fn ident(&mut self) -> Result<String, ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok(s)
            }
            t => self.fail(ParseErrorKind::Syntax, format!("expected identifier, found {t}")),
        }
    }

    fn conj(&mut self) -> Result<Formula, ParseError> {
        let mut f = self.unit()?;
        while *self.peek() == Tok::Amp {
            self.bump();
            let g = self.unit()?;
            f = Formula::And(Box::new(f), Box::new(g));
        }
        Ok(f)
    }

    fn unit(&mut self) -> Result<Formula, ParseError> {
        match self.peek() {
            Tok::Forall | Tok::Exists => self.quantifier(),
            _ => self.atom().map(Formula::Atom),
        }
    }

    fn quantifier(&mut self) -> Result<Formula, ParseError> {
        let universal = self.bump() == Tok::Forall;
        let var = self.ident()?;
        if *self.peek() != Tok::In {
            if *self.peek() == Tok::LParen {
                return self.fail(ParseErrorKind::UnboundedQuantifier, format!("`{var}` has no bound"));
            }
            let m = format!("expected `in`, found {}", self.peek());
            return self.fail(ParseErrorKind::Syntax, m);
        }
        self.bump();
        let bound = self.bound_term()?;
        self.expect(Tok::LParen)?;
        self.scope.push(var.clone());
        let body = self.conj()?;
        let f = if *self.peek() == Tok::Implies {
            if !universal {
                return self.fail(ParseErrorKind::ImplicationOutsideGuard, "`=>` under `exists`");
            }
            self.bump();
            let concl = self.conj()?;
            Formula::GuardedImpl { var, bound, guard: Box::new(body), conclusion: Box::new(concl) }
        } else if universal {
            Formula::Forall { var, bound, body: Box::new(body) }
        } else {
            Formula::Exists { var, bound, body: Box::new(body) }
        };
        self.scope.pop();
        self.expect(Tok::RParen)?;
        Ok(f)
    }

    /// A quantifier bound; `f(t)` is read as an application only when a
    /// body `(` follows it, otherwise the bound is the bare symbol.
    fn bound_term(&mut self) -> Result<Term, ParseError> {
        let (pos, consts) = (self.pos, self.constants.clone());
        if let Ok(t) = self.term() {
            if *self.peek() == Tok::LParen {
                return Ok(t);
            }
        }
        self.pos = pos;
        self.constants = consts;
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                self.symbol(s, SymbolCategory::Term)
            }
            _ => self.term(),
        }
    }

    fn atom(&mut self) -> Result<Atom, ParseError> {
        let a = self.term()?;
        match self.peek().clone() {
            Tok::Eq => {
                self.bump();
                Ok(Atom::Eq(a, self.term()?))
            }
            Tok::In => {
                self.bump();
                Ok(Atom::In(a, self.term()?))
            }
            Tok::Ident(r) => {
                self.bump();
                self.register(&r, SymbolCategory::Relation)?;
                Ok(Atom::Rel(r, a, self.term()?))
            }
            t => self.fail(ParseErrorKind::Syntax, format!("expected `=`, `in` or a relation symbol, found {t}")),
        }
    }

    fn term(&mut self) -> Result<Term, ParseError> {
        match self.peek().clone() {
            Tok::Num(x) => {
                self.bump();
                Ok(Term::Num(x))
            }
            Tok::Ident(s) => {
                self.bump();
                if *self.peek() == Tok::LParen {
                    self.register(&s, SymbolCategory::Function)?;
                    self.bump();
                    let arg = self.term()?;
                    self.expect(Tok::RParen)?;
                    Ok(Term::Apply(s, Box::new(arg)))
                } else {
                    self.symbol(s, SymbolCategory::Term)
                }
            }
            Tok::LParen => {
                self.bump();
                let mut items = vec![self.term()?];
                while *self.peek() == Tok::Comma {
                    self.bump();
                    items.push(self.term()?);
                }
                if items.len() < 2 {
                    return self.fail(ParseErrorKind::Syntax, "a tuple needs at least two components");
                }
                self.expect(Tok::RParen)?;
                Ok(Term::Tuple(items))
            }
            t => self.fail(ParseErrorKind::Syntax, format!("expected a term, found {t}")),
        }
    }

    fn symbol(&mut self, s: String, cat: SymbolCategory) -> Result<Term, ParseError> {
        self.register(&s, cat)?;
        Ok(Term::Var(s))
    }

    fn register(&mut self, name: &str, cat: SymbolCategory) -> Result<(), ParseError> {
        if self.scope.iter().any(|v| v == name) {
            if cat != SymbolCategory::Term {
                // the token has been consumed; point at it
                self.pos -= 1;
                return self
                    .fail(ParseErrorKind::UnknownSymbolCategory, format!("bound variable `{name}` used as {cat:?}"));
            }
            return Ok(());
        }
        match self.constants.get(name) {
            Some(&c) if c != cat => {
                self.pos -= 1;
                self.fail(ParseErrorKind::UnknownSymbolCategory, format!("`{name}` used as {c:?} and as {cat:?}"))
            }
            _ => {
                self.constants.insert(name.to_string(), cat);
                Ok(())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_examples() {
        let a = parse("forall x in A (x = x)").unwrap();
        assert!(matches!(a.root, Formula::Forall { .. }));
        let e = parse("forall x in A (P(x) or Q(x))").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::Disjunction);
        assert_eq!((e.line, e.col), (1, 21));
        let n = parse("exists x in A (forall y in B (x R y))").unwrap();
        match &n.root {
            Formula::Exists { body, .. } => assert!(matches!(**body, Formula::Forall { .. })),
            _ => panic!(),
        }
        assert_eq!(n.constants["R"].category, SymbolCategory::Relation);
        assert_eq!(n.constants["A"].category, SymbolCategory::Term);
        assert!(!n.constants.contains_key("x"));
    }

    #[test]
    fn guarded_implication() {
        let a = parse("forall x in A (x in B => x le c)").unwrap();
        assert!(matches!(a.root, Formula::GuardedImpl { .. }));
        assert_eq!(parse("x = y => y = x").unwrap_err().kind, ParseErrorKind::ImplicationOutsideGuard);
        assert_eq!(parse("exists x in A (x = x => x = x)").unwrap_err().kind, ParseErrorKind::ImplicationOutsideGuard);
        assert_eq!(parse("x = y -> y = x").unwrap_err().kind, ParseErrorKind::ImplicationOutsideGuard);
    }

    #[test]
    fn forbidden_forms() {
        assert_eq!(parse("not x = y").unwrap_err().kind, ParseErrorKind::Negation);
        assert_eq!(parse("!(x = y)").unwrap_err().kind, ParseErrorKind::Negation);
        assert_eq!(parse("x = y | y = x").unwrap_err().kind, ParseErrorKind::Disjunction);
        assert_eq!(parse("forall x (x = x)").unwrap_err().kind, ParseErrorKind::UnboundedQuantifier);
        assert_eq!(parse("x f y & f(x) = y").unwrap_err().kind, ParseErrorKind::UnknownSymbolCategory);
        assert_eq!(parse("forall x in A (y x y)").unwrap_err().kind, ParseErrorKind::UnknownSymbolCategory);
        assert_eq!(parse("forall x in A (x = x").unwrap_err().kind, ParseErrorKind::Syntax);
        assert_eq!(parse("(x) = y").unwrap_err().kind, ParseErrorKind::Syntax);
    }

    #[test]
    fn applied_bound_and_tuples() {
        let a = parse("forall x in f(A) (exists y in B ((x, y) in C & g((x, y)) = 2.5))").unwrap();
        match &a.root {
            Formula::Forall { bound, .. } => assert_eq!(*bound, Term::Apply("f".into(), Box::new(Term::var("A")))),
            _ => panic!(),
        }
        assert_eq!(a.constants["f"].category, SymbolCategory::Function);
        assert_eq!(a.constants["g"].category, SymbolCategory::Function);
    }

    #[test]
    fn roundtrip_print() {
        for s in [
            "forall x in A (x le 3)",
            "x = y & y = z & z in A",
            "forall x in f(A) (x in B => exists y in B (sq(y) ge x))",
            "exists p in H ((p, 0) in R & -1.5 lt p)",
        ] {
            let a = parse(s).unwrap();
            assert_eq!(a.root.to_string(), s);
            assert_eq!(parse(&a.root.to_string()).unwrap(), a);
        }
    }

    #[test]
    fn line_and_column() {
        let e = parse("forall x in A (\n  x = x or x = x)").unwrap_err();
        assert_eq!((e.kind, e.line, e.col), (ParseErrorKind::Disjunction, 2, 9));
    }
}
