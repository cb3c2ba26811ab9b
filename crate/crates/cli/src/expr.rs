//! Morphism expressions.
//!
//! ```text
//! term := atom (";" atom)*
//! atom := "id(" WORD ")" | NAME "[" WORD "|" WORD "]" | "(" term ")"
//! ```
//!
//! A WORD is a possibly empty whitespace-separated list of object names.

use std::ops::Range;

use restrace::{FreeCategory, GeneratorId, ObjectId, PremonoidalMorphism, Word};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    Id(Word),
    Event { gen: GeneratorId, left: Word, right: Word },
    Compose(Box<Spanned>, Box<Spanned>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Spanned {
    pub expr: Expr,
    pub span: Range<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Name(String),
    Open,
    Close,
    LBracket,
    RBracket,
    Bar,
    Semi,
}

fn tokens(text: &str) -> Result<Vec<(Tok, Range<usize>)>, CliError> {
    let mut out = Vec::new();
    let mut chars = text.char_indices().peekable();
    while let Some(&(i, c)) = chars.peek() {
        let single = match c {
            '(' => Some(Tok::Open),
            ')' => Some(Tok::Close),
            '[' => Some(Tok::LBracket),
            ']' => Some(Tok::RBracket),
            '|' => Some(Tok::Bar),
            ';' => Some(Tok::Semi),
            _ => None,
        };
        if let Some(t) = single {
            out.push((t, i..i + 1));
            chars.next();
        } else if c.is_whitespace() {
            chars.next();
        } else if restrace::graphs::RESERVED_CHARS.contains(&c) {
            return Err(CliError::Expr { span: i..i + c.len_utf8(), message: format!("unexpected `{c}`") });
        } else {
            let mut end = i;
            while let Some(&(j, d)) = chars.peek() {
                if d.is_whitespace() || restrace::graphs::RESERVED_CHARS.contains(&d) {
                    break;
                }
                end = j + d.len_utf8();
                chars.next();
            }
            out.push((Tok::Name(text[i..end].to_string()), i..end));
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, Range<usize>)>,
    pos: usize,
    len: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn here(&self) -> Range<usize> {
        self.toks.get(self.pos).map_or(self.len..self.len, |(_, s)| s.clone())
    }

    fn fail<T>(&self, message: impl Into<String>) -> Result<T, CliError> {
        Err(CliError::Expr { span: self.here(), message: message.into() })
    }

    fn expect(&mut self, t: Tok, what: &str) -> Result<usize, CliError> {
        if self.peek() == Some(&t) {
            self.pos += 1;
            Ok(self.toks[self.pos - 1].1.end)
        } else {
            self.fail(format!("expected {what}"))
        }
    }

    fn word(&mut self) -> Result<Word, CliError> {
        let mut items = Vec::new();
        while let Some(Tok::Name(n)) = self.peek() {
            let o: ObjectId = n.parse().map_err(|e: restrace::graphs::InvalidName| CliError::Expr {
                span: self.here(),
                message: e.to_string(),
            })?;
            items.push(o);
            self.pos += 1;
        }
        Ok(Word::new(items))
    }

    fn term(&mut self) -> Result<Spanned, CliError> {
        let mut acc = self.atom()?;
        while self.peek() == Some(&Tok::Semi) {
            self.pos += 1;
            let rhs = self.atom()?;
            let span = acc.span.start..rhs.span.end;
            acc = Spanned { expr: Expr::Compose(Box::new(acc), Box::new(rhs)), span };
        }
        Ok(acc)
    }

    fn atom(&mut self) -> Result<Spanned, CliError> {
        let start = self.here().start;
        match self.peek().cloned() {
            Some(Tok::Open) => {
                self.pos += 1;
                let inner = self.term()?;
                let end = self.expect(Tok::Close, "`)`")?;
                Ok(Spanned { expr: inner.expr, span: start..end })
            }
            Some(Tok::Name(name)) => {
                self.pos += 1;
                match self.peek() {
                    Some(Tok::Open) if name == "id" => {
                        self.pos += 1;
                        let w = self.word()?;
                        let end = self.expect(Tok::Close, "`)`")?;
                        Ok(Spanned { expr: Expr::Id(w), span: start..end })
                    }
                    Some(Tok::LBracket) => {
                        let gen: GeneratorId = name.parse().map_err(|e: restrace::graphs::InvalidName| {
                            CliError::Expr { span: start..start + name.len(), message: e.to_string() }
                        })?;
                        self.pos += 1;
                        let left = self.word()?;
                        self.expect(Tok::Bar, "`|`")?;
                        let right = self.word()?;
                        let end = self.expect(Tok::RBracket, "`]`")?;
                        Ok(Spanned { expr: Expr::Event { gen, left, right }, span: start..end })
                    }
                    _ => self.fail(format!("expected `[` after generator {name}")),
                }
            }
            _ => self.fail("expected `id(`, a generator or `(`"),
        }
    }
}

pub fn parse_expr(text: &str) -> Result<Spanned, CliError> {
    let mut p = Parser { toks: tokens(text)?, pos: 0, len: text.len() };
    let t = p.term()?;
    if p.pos < p.toks.len() {
        return p.fail("unexpected input after expression");
    }
    Ok(t)
}

pub fn elaborate(cat: &FreeCategory, e: &Spanned) -> Result<PremonoidalMorphism, CliError> {
    let at = |err: restrace::FreeCatError| CliError::Expr { span: e.span.clone(), message: err.to_string() };
    match &e.expr {
        Expr::Id(w) => cat.identity(w).map_err(at),
        Expr::Event { gen, left, right } => cat.gen_event(left, gen, right).map_err(at),
        Expr::Compose(a, b) => {
            let (f, g) = (elaborate(cat, a)?, elaborate(cat, b)?);
            f.compose(&g).map_err(at)
        }
    }
}

/// Parses and elaborates an expression over `cat`.
pub fn parse_morphism_expr(text: &str, cat: &FreeCategory) -> Result<PremonoidalMorphism, CliError> {
    elaborate(cat, &parse_expr(text)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphfile::parse_graph_file;

    fn printer() -> FreeCategory {
        let f = parse_graph_file("objects Doc\ndevices p\npure doc : -> Doc\ngen print : Doc -> @ p\n").unwrap();
        FreeCategory::new(f.impure()).unwrap()
    }

    #[test]
    fn identities_and_events() {
        let c = printer();
        let id = parse_morphism_expr("id(Doc)", &c).unwrap();
        assert!(id.is_empty());
        assert_eq!(id.source().to_string(), "Doc");
        assert_eq!(parse_morphism_expr("id()", &c).unwrap().source(), Word::empty());
        let f = parse_morphism_expr("print[ | Doc] ; print[ | ]", &c).unwrap();
        assert_eq!(f.len(), 2);
        assert_eq!(f.to_string(), "print[ | Doc] ; print[ | ]");
        let g = parse_morphism_expr("doc[ | ] ; print[ | ]", &c).unwrap();
        assert!(g.source().is_empty() && g.target().is_empty());
    }

    #[test]
    fn composition_is_left_associative() {
        match parse_expr("a[|];b[|];c[|]").unwrap().expr {
            Expr::Compose(lhs, rhs) => {
                assert!(matches!(lhs.expr, Expr::Compose(..)));
                assert!(matches!(rhs.expr, Expr::Event { .. }));
            }
            other => panic!("{other:?}"),
        }
        let c = printer();
        let grouped = parse_morphism_expr("doc[ | ] ; (doc[Doc | ] ; print[ | Doc])", &c).unwrap();
        assert_eq!(grouped.len(), 3);
    }

    #[test]
    fn boundary_errors_point_at_the_composite() {
        let c = printer();
        let text = "doc[ | ] ; doc[ | ] ; print[ | ]";
        match parse_morphism_expr(text, &c).unwrap_err() {
            CliError::Expr { span, message } => {
                assert_eq!(&text[span], "doc[ | ] ; doc[ | ]");
                assert!(message.contains("boundary mismatch"), "{message}");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn syntax_errors() {
        for bad in ["", "print", "print[ | ", "id(Doc", "(id(Doc)", "id(Doc) ;", "id(Doc) id(Doc)", "print[,|]"] {
            assert!(matches!(parse_expr(bad), Err(CliError::Expr { .. })), "{bad:?}");
        }
        let c = printer();
        assert!(parse_morphism_expr("scan[ | ]", &c).is_err());
    }
}
