use super::{Atom, Formula, FormulaError, Quantifier, Qf, Relation};
use crate::poly::{variable_index, ParseError, PolyParser, TokenKind};

fn is_keyword(kind: &TokenKind, word: &str) -> bool {
    matches!(kind, TokenKind::Ident(s) if s == word)
}

struct Parser {
    inner: PolyParser,
}

impl Parser {
    fn relation(&mut self) -> Result<Relation, ParseError> {
        let t = self.inner.advance();
        Ok(match &t.kind {
            TokenKind::Eq => Relation::Eq,
            TokenKind::Ne => Relation::Ne,
            TokenKind::Lt => Relation::Lt,
            TokenKind::Le => Relation::Le,
            TokenKind::Gt => Relation::Gt,
            TokenKind::Ge => Relation::Ge,
            other => return Err(t.error(format!("expected a relation, found {other}"))),
        })
    }

    fn atom(&mut self) -> Result<Qf, ParseError> {
        let lhs = self.inner.parse_poly()?;
        let rel = self.relation()?;
        let rhs = self.inner.parse_poly()?;
        // lhs - rhs with a positive denominator has the sign of the difference
        let diff = lhs.sub(&rhs);
        Ok(Qf::Atom(Atom {
            poly: diff.num,
            rel,
        }))
    }

    fn expr(&mut self) -> Result<Qf, ParseError> {
        let mut acc = self.term()?;
        while *self.inner.peek_kind() == TokenKind::Or {
            self.inner.advance();
            acc = Qf::Or(Box::new(acc), Box::new(self.term()?));
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<Qf, ParseError> {
        let mut acc = self.factor()?;
        while *self.inner.peek_kind() == TokenKind::And {
            self.inner.advance();
            acc = Qf::And(Box::new(acc), Box::new(self.factor()?));
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<Qf, ParseError> {
        let kind = self.inner.peek_kind().clone();
        match kind {
            TokenKind::Not => {
                self.inner.advance();
                Ok(Qf::Not(Box::new(self.factor()?)))
            }
            TokenKind::Ident(ref w) if w == "true" => {
                self.inner.advance();
                Ok(Qf::True)
            }
            TokenKind::Ident(ref w) if w == "false" => {
                self.inner.advance();
                Ok(Qf::False)
            }
            TokenKind::Ident(ref w) if w == "exists" || w == "forall" => Err(self
                .inner
                .peek()
                .error("quantifier inside the matrix: only prenex formulas are accepted")),
            TokenKind::LParen => {
                let cp = self.inner.checkpoint();
                let as_atom = self.atom();
                match as_atom {
                    Ok(a) => Ok(a),
                    Err(atom_err) => {
                        self.inner.reset(cp);
                        self.inner.advance();
                        match self.expr().and_then(|e| {
                            self.inner.expect(TokenKind::RParen)?;
                            Ok(e)
                        }) {
                            Ok(e) => Ok(e),
                            Err(expr_err) => {
                                let key = |e: &ParseError| (e.line, e.column);
                                Err(if key(&atom_err) > key(&expr_err) {
                                    atom_err
                                } else {
                                    expr_err
                                })
                            }
                        }
                    }
                }
            }
            _ => self.atom(),
        }
    }
}

pub(super) fn parse(src: &str) -> Result<Formula, FormulaError> {
    let mut p = Parser {
        inner: PolyParser::new(src)?,
    };
    let mut quants: Vec<(Quantifier, usize, ParseError)> = Vec::new();
    loop {
        let kind = p.inner.peek_kind().clone();
        let q = if is_keyword(&kind, "exists") {
            Quantifier::Exists
        } else if is_keyword(&kind, "forall") {
            Quantifier::Forall
        } else {
            break;
        };
        p.inner.advance();
        let t = p.inner.advance();
        let v = match &t.kind {
            TokenKind::Ident(name) => variable_index(name).ok_or_else(|| {
                t.error(format!("`{name}` is not a variable (variables are x1, x2, ...)"))
            })?,
            other => return Err(t.error(format!("expected a variable, found {other}")).into()),
        };
        p.inner.expect(TokenKind::Dot)?;
        p.inner.note_var(v);
        quants.push((q, v, t.error("")));
    }
    let matrix = p.expr()?;
    p.inner.expect_end()?;

    let k = p.inner.max_var();
    let nq = quants.len();
    let free = k - nq.min(k);
    for (j, (_, v, at)) in quants.iter().enumerate() {
        if quants[..j].iter().any(|(_, w, _)| w == v) {
            return Err(FormulaError::Shape {
                line: at.line,
                column: at.column,
                message: format!("x{v} is bound twice"),
            });
        }
    }
    for (j, (_, v, at)) in quants.iter().enumerate() {
        let expected = free + 1 + j;
        if *v != expected {
            return Err(FormulaError::Shape {
                line: at.line,
                column: at.column,
                message: format!(
                    "quantifiers must bind the trailing variables x{}..x{k} in order; found x{v} where x{expected} was expected",
                    free + 1
                ),
            });
        }
    }
    Ok(Formula {
        free,
        k,
        quantifiers: quants.into_iter().map(|(q, _, _)| q).collect(),
        matrix,
    })
}
