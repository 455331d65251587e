//! Parenthesised text format for diagram terms.
//!
//! ```text
//! (seq D D)  (par D D)  (id r)  (id l)  (sym r l)  (letter a)
//! copy discard merge generate cap cup wmult wunit wcomult wcounit empty
//! ```
//!
//! `seq` and `par` also accept more than two arguments, nested to the left.
//! The printer always emits the binary form.

use thiserror::Error;

use crate::diagram::{is_letter, Diagram, Generator, Sort, Term};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("parse error at offset {pos}: {msg}")]
pub struct ParseError {
    pub pos: usize,
    pub msg: String,
}

pub fn print(d: &Diagram) -> String {
    let mut out = String::new();
    write_term(d, &mut out);
    out
}

fn write_term(d: &Diagram, out: &mut String) {
    match d.term() {
        Term::Empty => out.push_str("empty"),
        Term::Gen(Generator::Letter(a)) => {
            out.push_str("(letter ");
            out.push(*a);
            out.push(')');
        }
        Term::Gen(g) => out.push_str(g.keyword()),
        Term::Id(s) => {
            out.push_str("(id ");
            out.push(s.code());
            out.push(')');
        }
        Term::Sym(a, b) => {
            out.push_str("(sym ");
            out.push(a.code());
            out.push(' ');
            out.push(b.code());
            out.push(')');
        }
        Term::Seq(a, b) | Term::Par(a, b) => {
            out.push_str(if matches!(d.term(), Term::Seq(..)) {
                "(seq "
            } else {
                "(par "
            });
            write_term(a, out);
            out.push(' ');
            write_term(b, out);
            out.push(')');
        }
    }
}

pub fn parse(text: &str) -> Result<Diagram, ParseError> {
    let mut p = Parser {
        src: text.as_bytes(),
        pos: 0,
    };
    let d = p.term()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(p.error("trailing input"));
    }
    Ok(d)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn error(&self, msg: impl Into<String>) -> ParseError {
        ParseError {
            pos: self.pos,
            msg: msg.into(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn word(&mut self) -> Result<(usize, &str), ParseError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_alphanumeric() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.error("expected a word"));
        }
        let w = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
        Ok((start, w))
    }

    fn expect(&mut self, c: u8) -> Result<(), ParseError> {
        self.skip_ws();
        if self.src.get(self.pos) == Some(&c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(format!("expected '{}'", c as char)))
        }
    }

    fn sort(&mut self) -> Result<Sort, ParseError> {
        let (start, w) = self.word()?;
        let mut chars = w.chars();
        match (chars.next().and_then(Sort::from_code), chars.next()) {
            (Some(s), None) => Ok(s),
            _ => Err(ParseError {
                pos: start,
                msg: format!("expected sort 'r' or 'l', found '{w}'"),
            }),
        }
    }

    fn peek_close(&mut self) -> bool {
        self.skip_ws();
        self.src.get(self.pos) == Some(&b')')
    }

    fn term(&mut self) -> Result<Diagram, ParseError> {
        self.skip_ws();
        if self.pos >= self.src.len() {
            return Err(self.error("unexpected end of input"));
        }
        if self.src[self.pos] != b'(' {
            let (start, w) = self.word()?;
            if w == "empty" {
                return Ok(Diagram::empty());
            }
            return Generator::from_keyword(w)
                .map(Diagram::gen)
                .ok_or_else(|| ParseError {
                    pos: start,
                    msg: format!("unknown generator '{w}'"),
                });
        }
        let open = self.pos;
        self.pos += 1;
        let (hstart, head) = self.word()?;
        let head = head.to_string();
        let d = match head.as_str() {
            "id" => Diagram::id(self.sort()?),
            "sym" => {
                let a = self.sort()?;
                let b = self.sort()?;
                Diagram::sym(a, b)
            }
            "letter" => {
                let (s, w) = self.word()?;
                let mut chars = w.chars();
                match (chars.next(), chars.next()) {
                    (Some(c), None) if is_letter(c) => Diagram::letter(c),
                    _ => {
                        return Err(ParseError {
                            pos: s,
                            msg: format!("'{w}' is not a single-letter symbol"),
                        })
                    }
                }
            }
            "seq" | "par" => {
                let mut acc = self.term()?;
                let mut count = 1;
                while !self.peek_close() {
                    let at = self.pos;
                    let next = self.term()?;
                    acc = if head == "seq" {
                        Diagram::seq(&acc, &next).map_err(|e| ParseError {
                            pos: at,
                            msg: format!("ill-typed composition opened at offset {open}: {e}"),
                        })?
                    } else {
                        Diagram::par(&acc, &next)
                    };
                    count += 1;
                }
                if count < 2 {
                    return Err(self.error(format!("'{head}' needs at least two arguments")));
                }
                acc
            }
            _ => {
                return Err(ParseError {
                    pos: hstart,
                    msg: format!("unknown form '{head}'"),
                })
            }
        };
        self.expect(b')')?;
        Ok(d)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn print_parse_round_trip() {
        let src = "(seq (par (id r) cup) (par cap (id r)))";
        let d = parse(src).unwrap();
        assert_eq!(print(&d), src);
        assert_eq!(parse(&print(&d)).unwrap(), d);
    }

    #[test]
    fn whitespace_insensitive() {
        let a = parse("( seq  copy\n (par (letter a)\t(letter b)) )").unwrap();
        assert_eq!(print(&a), "(seq copy (par (letter a) (letter b)))");
    }

    #[test]
    fn nary_forms_nest_left() {
        let a = parse("(par (id r) (id r) (id l))").unwrap();
        assert_eq!(print(&a), "(par (par (id r) (id r)) (id l))");
    }

    #[test]
    fn ill_typed_composition_reports_position() {
        let err = parse("(seq copy (letter a))").unwrap_err();
        assert_eq!(err.pos, 10);
        assert!(err.msg.contains("ill-typed"));
    }

    #[test]
    fn rejects_garbage() {
        assert!(parse("copy copy").is_err());
        assert!(parse("(id x)").is_err());
        assert!(parse("(letter ab)").is_err());
        assert!(parse("(frob)").is_err());
        assert!(parse("(seq copy)").is_err());
        assert!(parse("").is_err());
    }

    #[test]
    fn empty_keyword() {
        assert_eq!(parse("empty").unwrap(), Diagram::empty());
        assert_eq!(print(&Diagram::empty()), "empty");
    }
}
