//! Concrete syntax.
//!
//! ```text
//! expr    ::= ('\' | 'λ') ident '.' expr | app
//! app     ::= postfix+ [ ('\' | 'λ') ident '.' expr ]
//! postfix ::= atom ( '[' ident ('<-' | '←') expr ']' )*
//! atom    ::= ident | '[.]' [ '{' ident (',' ident)* '}' ] | '(' expr ')'
//! ident   ::= [A-Za-z_][A-Za-z0-9_']*
//! ```
//!
//! Application is left-associative; an explicit substitution is postfix and
//! attaches to the atom right before it, so `x y[y<-z]` is `x (y[y<-z])`.

use std::fmt;

use thiserror::Error;

use crate::term::{Expression, VarName};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("syntax error at byte {position}: {message}")]
pub struct SyntaxError {
    pub position: usize,
    pub message: String,
}

pub fn parse(text: &str) -> Result<Expression, SyntaxError> {
    let mut p = Parser { src: text, pos: 0 };
    let e = p.expr()?;
    p.skip_ws();
    if p.pos != text.len() {
        return Err(p.error("unexpected trailing input"));
    }
    Ok(e)
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn error(&self, message: impl Into<String>) -> SyntaxError {
        SyntaxError { position: self.pos, message: message.into() }
    }

    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn skip_ws(&mut self) {
        let trimmed = self.rest().trim_start();
        self.pos = self.src.len() - trimmed.len();
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.rest().chars().next()
    }

    fn eat(&mut self, token: &str) -> bool {
        self.skip_ws();
        if self.rest().starts_with(token) {
            self.pos += token.len();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, token: &str) -> Result<(), SyntaxError> {
        if self.eat(token) {
            Ok(())
        } else {
            Err(self.error(format!("expected `{token}`")))
        }
    }

    fn at_lambda(&mut self) -> bool {
        matches!(self.peek(), Some('\\') | Some('λ'))
    }

    fn ident(&mut self) -> Result<VarName, SyntaxError> {
        self.skip_ws();
        let rest = self.rest();
        let mut chars = rest.char_indices();
        match chars.next() {
            Some((_, c)) if c.is_ascii_alphabetic() || c == '_' => {}
            _ => return Err(self.error("expected an identifier")),
        }
        let end = chars
            .find(|&(_, c)| !(c.is_ascii_alphanumeric() || c == '_' || c == '\''))
            .map(|(i, _)| i)
            .unwrap_or(rest.len());
        self.pos += end;
        Ok(VarName::new(&rest[..end]))
    }

    fn expr(&mut self) -> Result<Expression, SyntaxError> {
        if self.at_lambda() {
            return self.lambda();
        }
        let mut acc = self.postfix()?;
        loop {
            if self.at_lambda() {
                let arg = self.lambda()?;
                return Ok(Expression::app(acc, arg));
            }
            if self.at_atom_start() {
                let arg = self.postfix()?;
                acc = Expression::app(acc, arg);
            } else {
                return Ok(acc);
            }
        }
    }

    fn lambda(&mut self) -> Result<Expression, SyntaxError> {
        if !self.eat("\\") && !self.eat("λ") {
            return Err(self.error("expected a lambda"));
        }
        let x = self.ident()?;
        self.expect(".")?;
        let body = self.expr()?;
        Ok(Expression::abs(x, body))
    }

    fn at_atom_start(&mut self) -> bool {
        match self.peek() {
            Some('(') => true,
            Some('[') => self.rest().starts_with("[."),
            Some(c) => c.is_ascii_alphabetic() || c == '_',
            None => false,
        }
    }

    fn postfix(&mut self) -> Result<Expression, SyntaxError> {
        let mut e = self.atom()?;
        loop {
            self.skip_ws();
            let rest = self.rest();
            if !rest.starts_with('[') || rest.starts_with("[.") {
                return Ok(e);
            }
            self.pos += 1;
            let x = self.ident()?;
            if !self.eat("<-") && !self.eat("←") {
                return Err(self.error("expected `<-`"));
            }
            let def = self.expr()?;
            self.expect("]")?;
            e = Expression::esub(e, x, def);
        }
    }

    fn atom(&mut self) -> Result<Expression, SyntaxError> {
        match self.peek() {
            Some('(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(")")?;
                Ok(e)
            }
            Some('[') => {
                self.expect("[.]")?;
                let mut interface = Vec::new();
                if self.eat("{") && !self.eat("}") {
                    loop {
                        interface.push(self.ident()?);
                        if self.eat("}") {
                            break;
                        }
                        self.expect(",")?;
                    }
                }
                Ok(Expression::Hole(interface.into_iter().collect()))
            }
            Some(_) => Ok(Expression::Var(self.ident()?)),
            None => Err(self.error("unexpected end of input")),
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Prec {
    /// Anything, including an unparenthesised abstraction.
    Top,
    /// Function position of an application.
    AppLeft,
    /// Argument position, or body of an explicit substitution.
    Postfix,
}

fn write_expr(e: &Expression, prec: Prec, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match e {
        Expression::Var(x) => write!(f, "{x}"),
        Expression::Hole(delta) => {
            f.write_str("[.]{")?;
            for (i, x) in delta.iter().enumerate() {
                if i > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{x}")?;
            }
            f.write_str("}")
        }
        Expression::Abs(x, body) => {
            if prec > Prec::Top {
                f.write_str("(")?;
            }
            write!(f, "\\{x}. ")?;
            write_expr(body, Prec::Top, f)?;
            if prec > Prec::Top {
                f.write_str(")")?;
            }
            Ok(())
        }
        Expression::App(fun, arg) => {
            let parens = prec == Prec::Postfix;
            if parens {
                f.write_str("(")?;
            }
            write_expr(fun, Prec::AppLeft, f)?;
            f.write_str(" ")?;
            write_expr(arg, Prec::Postfix, f)?;
            if parens {
                f.write_str(")")?;
            }
            Ok(())
        }
        Expression::ESub(body, x, def) => {
            write_expr(body, Prec::Postfix, f)?;
            write!(f, "[{x}<-")?;
            write_expr(def, Prec::Top, f)?;
            f.write_str("]")
        }
    }
}

impl fmt::Display for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_expr(self, Prec::Top, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parse_examples() {
        let xx = Expression::app(Expression::var("x"), Expression::var("x"));
        assert_eq!(
            parse("(\\x. x x) y").unwrap(),
            Expression::app(Expression::abs("x", xx), Expression::var("y"))
        );
        assert_eq!(parse("x[x<-y]").unwrap(), Expression::esub(Expression::var("x"), "x", Expression::var("y")));
        assert_eq!(parse("[.]{x,y}").unwrap(), Expression::hole(["x", "y"]));
        assert_eq!(parse("λx. x").unwrap(), parse("\\x.x").unwrap());
        assert_eq!(parse("x[x←y]").unwrap(), parse("x[x<-y]").unwrap());
        assert_eq!(parse("[.]").unwrap(), Expression::hole(Vec::<&str>::new()));
    }

    #[test]
    fn substitution_attaches_to_the_preceding_atom() {
        let t = parse("x y[y<-z]").unwrap();
        assert_eq!(
            t,
            Expression::app(Expression::var("x"), Expression::esub(Expression::var("y"), "y", Expression::var("z")))
        );
        let t = parse("x[x<-y][y<-z]").unwrap();
        assert!(matches!(t, Expression::ESub(ref b, ref v, _) if v.as_str() == "y" && matches!(**b, Expression::ESub(..))));
    }

    #[test]
    fn trailing_lambda_is_an_argument() {
        assert_eq!(parse("f \\x. x").unwrap(), parse("f (\\x. x)").unwrap());
    }

    #[test]
    fn errors_carry_a_position() {
        let err = parse("(x").unwrap_err();
        assert_eq!(err.position, 2);
        let err = parse("x[x y]").unwrap_err();
        assert_eq!(err.position, 4);
        assert!(parse("").is_err());
        assert!(parse("x )").is_err());
    }

    #[test]
    fn print_examples() {
        for s in [
            "x",
            "\\x. x x",
            "(\\x. x) y",
            "x (y z)",
            "(x y)[x<-z]",
            "x y[y<-z]",
            "(\\y. x)[x<-z]",
            "x[x<-y][y<-\\z. z]",
            "[.]{x,y}",
            "f (\\x. x) y",
        ] {
            assert_eq!(parse(s).unwrap().to_string(), s);
        }
    }

    fn arb_expression() -> impl Strategy<Value = Expression> {
        let leaf = prop_oneof![
            prop::sample::select(vec!["x", "y", "z'", "_a1"]).prop_map(Expression::var),
            prop::collection::btree_set(prop::sample::select(vec!["x", "y", "z"]), 0..3)
                .prop_map(Expression::hole),
        ];
        leaf.prop_recursive(6, 40, 2, |inner| {
            prop_oneof![
                (prop::sample::select(vec!["x", "y", "w"]), inner.clone()).prop_map(|(x, b)| Expression::abs(x, b)),
                (inner.clone(), inner.clone()).prop_map(|(f, a)| Expression::app(f, a)),
                (inner.clone(), prop::sample::select(vec!["x", "y"]), inner)
                    .prop_map(|(b, x, d)| Expression::esub(b, x, d)),
            ]
        })
    }

    proptest! {
        #[test]
        fn parse_inverts_print(e in arb_expression()) {
            let printed = e.to_string();
            prop_assert_eq!(parse(&printed).unwrap(), e);
        }
    }
}
