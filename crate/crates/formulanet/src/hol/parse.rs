//! Recursive-descent parser with precedence climbing for the infix levels.
//! Application is a tighter-binding left-associative chain of primaries;
//! a binder swallows everything to its right as the body.

use super::{Ast, ParseError, Token, TokenKind, APP_SENTINEL, INFIX_OPS};

struct Parser<'a> {
    tokens: &'a [Token],
    at: usize,
}

pub fn parse(tokens: &[Token]) -> Result<Ast, ParseError> {
    let mut parser = Parser { tokens, at: 0 };
    let ast = parser.expr(0)?;
    match parser.peek() {
        None => Ok(ast),
        Some(tok) if tok.kind == TokenKind::RParen => Err(ParseError::UnbalancedParens {
            pos: tok.pos,
        }),
        Some(tok) => Err(ParseError::UnexpectedToken {
            pos: tok.pos,
            text: tok.text.clone(),
        }),
    }
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&'a Token> {
        self.tokens.get(self.at)
    }

    fn bump(&mut self) -> Option<&'a Token> {
        let tok = self.tokens.get(self.at);
        if tok.is_some() {
            self.at += 1;
        }
        tok
    }

    /// Infix levels, loosest first; all right-associative.
    fn expr(&mut self, level: usize) -> Result<Ast, ParseError> {
        if level >= INFIX_OPS.len() {
            return self.application();
        }
        let lhs = self.expr(level + 1)?;
        if let Some(tok) = self.peek() {
            if tok.kind == TokenKind::InfixOp && tok.text == INFIX_OPS[level] {
                let op = self.bump().unwrap();
                let rhs = self.expr(level)?;
                return Ok(Ast::Apply {
                    head: op.text.clone(),
                    args: vec![lhs, rhs],
                });
            }
        }
        Ok(lhs)
    }

    /// `f a b c` flattens into one application with an ordered argument list.
    fn application(&mut self) -> Result<Ast, ParseError> {
        let head = self.primary()?;
        let mut args = Vec::new();
        while let Some(tok) = self.peek() {
            match tok.kind {
                TokenKind::Ident | TokenKind::LParen | TokenKind::Binder => {
                    args.push(self.primary()?);
                }
                _ => break,
            }
        }
        if args.is_empty() {
            return Ok(head);
        }
        Ok(match head {
            Ast::Leaf { name } => Ast::Apply { head: name, args },
            Ast::Apply {
                head: name,
                args: mut first,
            } => {
                first.extend(args);
                Ast::Apply {
                    head: name,
                    args: first,
                }
            }
            quantifier => {
                let mut all = vec![quantifier];
                all.extend(args);
                Ast::Apply {
                    head: APP_SENTINEL.to_string(),
                    args: all,
                }
            }
        })
    }

    fn primary(&mut self) -> Result<Ast, ParseError> {
        let tok = match self.bump() {
            Some(tok) => tok,
            None => return Err(ParseError::EmptyExpression),
        };
        match tok.kind {
            TokenKind::Ident => Ok(Ast::Leaf {
                name: tok.text.clone(),
            }),
            TokenKind::LParen => {
                let inner = self.expr(0)?;
                match self.bump() {
                    Some(close) if close.kind == TokenKind::RParen => Ok(inner),
                    Some(other) => Err(ParseError::UnexpectedToken {
                        pos: other.pos,
                        text: other.text.clone(),
                    }),
                    None => Err(ParseError::UnbalancedParens { pos: tok.pos }),
                }
            }
            TokenKind::Binder => self.binder(tok),
            TokenKind::RParen => Err(ParseError::EmptyExpression),
            TokenKind::Dot | TokenKind::InfixOp => Err(ParseError::UnexpectedToken {
                pos: tok.pos,
                text: tok.text.clone(),
            }),
        }
    }

    /// `BINDER v1 v2 ... . body` desugars to nested single-variable binders.
    fn binder(&mut self, binder: &Token) -> Result<Ast, ParseError> {
        let mut vars = Vec::new();
        while let Some(tok) = self.peek() {
            if tok.kind == TokenKind::Ident {
                vars.push(self.bump().unwrap().text.clone());
            } else {
                break;
            }
        }
        if vars.is_empty() {
            return Err(ParseError::DanglingBinder { pos: binder.pos });
        }
        match self.bump() {
            Some(tok) if tok.kind == TokenKind::Dot => {}
            _ => return Err(ParseError::DanglingBinder { pos: binder.pos }),
        }
        if self.peek().is_none() {
            return Err(ParseError::DanglingBinder { pos: binder.pos });
        }
        let mut body = self.expr(0)?;
        for var in vars.into_iter().rev() {
            body = Ast::Quantifier {
                binder: binder.text.clone(),
                var,
                body: Box::new(body),
            };
        }
        Ok(body)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hol::{parse_text, tokenize};

    #[test]
    fn parse_fig1_formula() {
        let ast = parse_text("!x. ?y. P x /\\ Q x y").unwrap();
        let expected = Ast::quantifier(
            "!",
            "x",
            Ast::quantifier(
                "?",
                "y",
                Ast::apply(
                    "/\\",
                    vec![
                        Ast::apply("P", vec![Ast::leaf("x")]),
                        Ast::apply("Q", vec![Ast::leaf("x"), Ast::leaf("y")]),
                    ],
                ),
            ),
        );
        assert_eq!(ast, expected);
    }

    #[test]
    fn parse_fig2_formula() {
        let ast = parse_text("!f. ?x. f x c /\\ P f").unwrap();
        let expected = Ast::quantifier(
            "!",
            "f",
            Ast::quantifier(
                "?",
                "x",
                Ast::apply(
                    "/\\",
                    vec![
                        Ast::apply("f", vec![Ast::leaf("x"), Ast::leaf("c")]),
                        Ast::apply("P", vec![Ast::leaf("f")]),
                    ],
                ),
            ),
        );
        assert_eq!(ast, expected);
    }

    #[test]
    fn parse_single_atom() {
        assert_eq!(parse_text("c").unwrap(), Ast::leaf("c"));
    }

    #[test]
    fn application_is_left_associative_flat() {
        // `f x y` and `(f x) y` both flatten to one n-ary application.
        assert_eq!(parse_text("f x y").unwrap(), parse_text("(f x) y").unwrap());
        assert_eq!(
            parse_text("f x y").unwrap(),
            Ast::apply("f", vec![Ast::leaf("x"), Ast::leaf("y")])
        );
    }

    #[test]
    fn infix_right_associative() {
        assert_eq!(
            parse_text("a ==> b ==> c").unwrap(),
            parse_text("a ==> (b ==> c)").unwrap()
        );
    }

    #[test]
    fn precedence_order() {
        // /\ binds tighter than \/ which binds tighter than ==>.
        assert_eq!(
            parse_text("a ==> b \\/ c /\\ d").unwrap(),
            parse_text("a ==> (b \\/ (c /\\ d))").unwrap()
        );
        // = binds tighter than /\, application tighter than =.
        assert_eq!(
            parse_text("f x = g y /\\ p").unwrap(),
            parse_text("((f x) = (g y)) /\\ p").unwrap()
        );
    }

    #[test]
    fn parens_override_precedence() {
        assert_ne!(
            parse_text("(a ==> b) ==> c").unwrap(),
            parse_text("a ==> b ==> c").unwrap()
        );
    }

    #[test]
    fn binder_body_extends_right() {
        assert_eq!(
            parse_text("!x. P x /\\ Q").unwrap(),
            parse_text("!x. (P x /\\ Q)").unwrap()
        );
    }

    #[test]
    fn multi_variable_binder_desugars() {
        assert_eq!(
            parse_text("!x y. P x y").unwrap(),
            parse_text("!x. !y. P x y").unwrap()
        );
    }

    #[test]
    fn binder_as_argument_needs_parens() {
        let ast = parse_text("F (\\x. x)").unwrap();
        assert_eq!(
            ast,
            Ast::apply("F", vec![Ast::quantifier("\\", "x", Ast::leaf("x"))])
        );
    }

    #[test]
    fn beta_redex_uses_sentinel_head() {
        let ast = parse_text("(\\x. x) y").unwrap();
        match &ast {
            Ast::Apply { head, args } => {
                assert_eq!(head, APP_SENTINEL);
                assert_eq!(args.len(), 2);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn error_unbalanced_parens() {
        assert!(matches!(
            parse_text("(P x"),
            Err(ParseError::UnbalancedParens { .. })
        ));
        assert!(matches!(
            parse_text("P x)"),
            Err(ParseError::UnbalancedParens { .. })
        ));
    }

    #[test]
    fn error_dangling_binder() {
        assert!(matches!(
            parse_text("!x"),
            Err(ParseError::DanglingBinder { .. })
        ));
        assert!(matches!(
            parse_text("! . P"),
            Err(ParseError::DanglingBinder { .. })
        ));
        assert!(matches!(
            parse_text("!x."),
            Err(ParseError::DanglingBinder { .. })
        ));
    }

    #[test]
    fn error_empty_expression() {
        assert!(matches!(parse(&[]), Err(ParseError::EmptyExpression)));
        assert!(matches!(
            parse_text("()"),
            Err(ParseError::EmptyExpression)
        ));
    }

    #[test]
    fn error_stray_infix() {
        assert!(matches!(
            parse_text("/\\ x"),
            Err(ParseError::UnexpectedToken { .. })
        ));
    }

    #[test]
    fn quantifiers_always_have_one_child() {
        // Structural guarantee of the Ast type plus parser: spot-check a few.
        for text in ["!x. P", "?!y. Q y", "@z. z = z", "\\w. f w w"] {
            let toks = tokenize(text).unwrap();
            match parse(&toks).unwrap() {
                Ast::Quantifier { var, .. } => assert!(!var.is_empty()),
                other => panic!("expected quantifier for {text}, got {other:?}"),
            }
        }
    }
}
