//! Recursive-descent parser for the map grammar.
//!
//! ```text
//! map    := expr (';' expr)*
//! expr   := term (('+' | '-') term)*
//! term   := factor (('*' | '/') factor)*
//! factor := '-' factor | base ('^' '-'? integer)?
//! base   := number | ident | call | '(' expr ')'
//! call   := ('abs' | 'exp' | 'scale' | 'constant') '(' expr ')'
//! ```
//!
//! Identifiers: `x` (alias of `x0`), `x0 .. x{k-1}`, `t` where allowed, and the
//! catalog names `identity`, `square`, `half`, `scale(a)`, `constant(c)`, which
//! expand in place and act on the coordinate of the component being parsed.
//! Positions in errors are 0-based character offsets into the source.

use super::expr::Expr;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64, bool),
    Ident(String),
    Op(char),
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    pos: usize,
}

fn lex(src: &str) -> Result<(Vec<Token>, usize)> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            let mut integral = true;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                if chars[i] == '.' {
                    integral = false;
                }
                i += 1;
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    integral = false;
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let text: String = chars[start..i].iter().collect();
            let value: f64 = text.parse().map_err(|_| Error::Syntax {
                position: start,
                message: format!("malformed number `{text}`"),
            })?;
            out.push(Token {
                tok: Tok::Num(value, integral),
                pos: start,
            });
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(Token {
                tok: Tok::Ident(chars[start..i].iter().collect()),
                pos: start,
            });
        } else if "+-*/^(),;".contains(c) {
            out.push(Token { tok: Tok::Op(c), pos: i });
            i += 1;
        } else if c == '\u{2212}' {
            // typographic minus
            out.push(Token { tok: Tok::Op('-'), pos: i });
            i += 1;
        } else {
            return Err(Error::Syntax {
                position: i,
                message: format!("unexpected character `{c}`"),
            });
        }
    }
    Ok((out, chars.len()))
}

/// Which free symbols an expression may use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Symbols {
    /// Number of point coordinates (`x0 ..`); zero forbids `x` entirely.
    pub point_dimension: usize,
    pub allow_t: bool,
}

struct Parser<'a> {
    tokens: &'a [Token],
    cursor: usize,
    end: usize,
    symbols: Symbols,
    component: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.cursor).map(|t| &t.tok)
    }

    fn pos(&self) -> usize {
        self.tokens.get(self.cursor).map_or(self.end, |t| t.pos)
    }

    fn eat_op(&mut self, op: char) -> bool {
        if self.peek() == Some(&Tok::Op(op)) {
            self.cursor += 1;
            true
        } else {
            false
        }
    }

    fn expect_op(&mut self, op: char) -> Result<()> {
        if self.eat_op(op) {
            Ok(())
        } else {
            Err(self.error(format!("expected `{op}`")))
        }
    }

    fn error(&self, message: impl Into<String>) -> Error {
        Error::Syntax {
            position: self.pos(),
            message: message.into(),
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            if self.eat_op('+') {
                lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat_op('-') {
                lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.factor()?;
        loop {
            if self.eat_op('*') {
                lhs = Expr::Mul(Box::new(lhs), Box::new(self.factor()?));
            } else if self.eat_op('/') {
                lhs = Expr::Div(Box::new(lhs), Box::new(self.factor()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn factor(&mut self) -> Result<Expr> {
        if self.eat_op('-') {
            return Ok(Expr::Neg(Box::new(self.factor()?)));
        }
        let base = self.base()?;
        if self.eat_op('^') {
            let negative = self.eat_op('-');
            match self.peek().cloned() {
                Some(Tok::Num(v, true)) if v <= i32::MAX as f64 => {
                    self.cursor += 1;
                    let n = v as i32;
                    return Ok(Expr::Pow(Box::new(base), if negative { -n } else { n }));
                }
                Some(Tok::Num(_, _)) => return Err(self.error("integer exponent expected")),
                _ => return Err(self.error("exponent expected")),
            }
        }
        Ok(base)
    }

    fn var(&self, index: usize, pos: usize, name: &str) -> Result<Expr> {
        if index < self.symbols.point_dimension {
            Ok(Expr::Var(index))
        } else {
            Err(Error::UnknownIdentifier {
                name: name.to_string(),
                position: pos,
            })
        }
    }

    fn call_arg(&mut self) -> Result<Expr> {
        self.expect_op('(')?;
        let arg = self.expr()?;
        self.expect_op(')')?;
        Ok(arg)
    }

    fn base(&mut self) -> Result<Expr> {
        let pos = self.pos();
        let Some(tok) = self.peek().cloned() else {
            return Err(self.error("unexpected end of input"));
        };
        match tok {
            Tok::Num(v, _) => {
                self.cursor += 1;
                Ok(Expr::Const(v))
            }
            Tok::Op('(') => {
                self.cursor += 1;
                let e = self.expr()?;
                self.expect_op(')')?;
                Ok(e)
            }
            Tok::Op(c) => Err(self.error(format!("unexpected `{c}`"))),
            Tok::Ident(name) => {
                self.cursor += 1;
                let component = self.component;
                let own = || Expr::Var(component);
                let has_point = self.symbols.point_dimension > 0;
                match name.as_str() {
                    "abs" => Ok(Expr::Abs(Box::new(self.call_arg()?))),
                    "exp" => Ok(Expr::Exp(Box::new(self.call_arg()?))),
                    "t" if self.symbols.allow_t => Ok(Expr::GridT),
                    "x" => self.var(0, pos, &name),
                    "identity" if has_point => Ok(own()),
                    "square" if has_point => Ok(Expr::Pow(Box::new(own()), 2)),
                    "half" if has_point => Ok(Expr::Div(Box::new(own()), Box::new(Expr::Const(2.0)))),
                    "scale" if has_point => {
                        let a = self.call_arg()?;
                        Ok(Expr::Mul(Box::new(a), Box::new(own())))
                    }
                    "constant" => self.call_arg(),
                    _ => {
                        if let Some(digits) = name.strip_prefix('x') {
                            if !digits.is_empty() && digits.chars().all(|c| c.is_ascii_digit()) {
                                if let Ok(i) = digits.parse::<usize>() {
                                    return self.var(i, pos, &name);
                                }
                            }
                        }
                        Err(Error::UnknownIdentifier { name, position: pos })
                    }
                }
            }
        }
    }
}

/// Parse a `;`-separated list of component expressions.
pub fn parse_components(source: &str, symbols: Symbols) -> Result<Vec<Expr>> {
    let (tokens, end) = lex(source)?;
    if tokens.is_empty() {
        return Err(Error::Syntax {
            position: 0,
            message: "empty expression".into(),
        });
    }
    let mut parser = Parser {
        tokens: &tokens,
        cursor: 0,
        end,
        symbols,
        component: 0,
    };
    let mut components = vec![parser.expr()?];
    while parser.eat_op(';') {
        parser.component += 1;
        components.push(parser.expr()?);
    }
    if parser.cursor < tokens.len() {
        return Err(parser.error("unexpected trailing input"));
    }
    Ok(components)
}

/// Parse a single scalar expression.
pub fn parse_expr(source: &str, symbols: Symbols) -> Result<Expr> {
    let mut comps = parse_components(source, symbols)?;
    if comps.len() != 1 {
        return Err(Error::Syntax {
            position: 0,
            message: format!("expected one expression, found {}", comps.len()),
        });
    }
    Ok(comps.remove(0))
}

#[cfg(test)]
mod tests {
    use super::super::expr::Env;
    use super::*;

    const ONE: Symbols = Symbols {
        point_dimension: 1,
        allow_t: false,
    };

    fn var() -> Box<Expr> {
        Box::new(Expr::Var(0))
    }

    #[test]
    fn square_and_half() {
        assert_eq!(parse_expr("x^2", ONE).unwrap(), Expr::Pow(var(), 2));
        assert_eq!(
            parse_expr("x/2", ONE).unwrap(),
            Expr::Div(var(), Box::new(Expr::Const(2.0)))
        );
    }

    #[test]
    fn dangling_caret_reports_position() {
        assert_eq!(
            parse_expr("x^", ONE),
            Err(Error::Syntax {
                position: 2,
                message: "exponent expected".into()
            })
        );
    }

    #[test]
    fn precedence_and_unary_minus() {
        let e = parse_expr("-x^2 + 3*x - 1", ONE).unwrap();
        let x = 2.0;
        let v = e.eval(&Env { point: &[x], t: 0.0 }).unwrap();
        assert_eq!(v, -(x * x) + 3.0 * x - 1.0);
    }

    #[test]
    fn unknown_identifiers() {
        assert!(matches!(
            parse_expr("y + 1", ONE),
            Err(Error::UnknownIdentifier { position: 0, .. })
        ));
        assert!(matches!(
            parse_expr("x1", ONE),
            Err(Error::UnknownIdentifier { .. })
        ));
        assert!(matches!(parse_expr("t", ONE), Err(Error::UnknownIdentifier { .. })));
        let weight = Symbols {
            point_dimension: 0,
            allow_t: true,
        };
        assert_eq!(parse_expr("exp(t)", weight).unwrap(), Expr::Exp(Box::new(Expr::GridT)));
        assert!(parse_expr("x", weight).is_err());
    }

    #[test]
    fn catalog_names_expand() {
        assert_eq!(parse_expr("square", ONE).unwrap(), parse_expr("x^2", ONE).unwrap());
        assert_eq!(parse_expr("identity", ONE).unwrap(), Expr::Var(0));
        assert_eq!(
            parse_expr("scale(0.2)", ONE).unwrap(),
            Expr::Mul(Box::new(Expr::Const(0.2)), var())
        );
        assert_eq!(parse_expr("constant(3)", ONE).unwrap(), Expr::Const(3.0));
        let two = Symbols {
            point_dimension: 2,
            allow_t: false,
        };
        let comps = parse_components("half; square", two).unwrap();
        assert_eq!(comps[1], Expr::Pow(Box::new(Expr::Var(1)), 2));
    }

    #[test]
    fn errors() {
        assert!(parse_expr("", ONE).is_err());
        assert!(parse_expr("   ", ONE).is_err());
        assert!(matches!(parse_expr("x^1.5", ONE), Err(Error::Syntax { position: 2, .. })));
        assert!(matches!(parse_expr("(x", ONE), Err(Error::Syntax { position: 2, .. })));
        assert!(matches!(parse_expr("x x", ONE), Err(Error::Syntax { position: 2, .. })));
        assert!(matches!(parse_expr("x $ 1", ONE), Err(Error::Syntax { position: 2, .. })));
    }

    #[test]
    fn numbers() {
        assert_eq!(parse_expr("1e-3", ONE).unwrap(), Expr::Const(1e-3));
        assert_eq!(parse_expr(".5", ONE).unwrap(), Expr::Const(0.5));
        assert_eq!(parse_expr("x^-2", ONE).unwrap(), Expr::Pow(var(), -2));
    }
}
