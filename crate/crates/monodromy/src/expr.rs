//! Parsers for the small algebraic input languages of the CLI.
//!
//! Class expressions:   `expr := term ("+" term)*`,
//! `term := NAME | "0" | "Phi(" int "," int ")(" NAME ")"`.
//!
//! Factorization expressions: products of `eta[^k]`, `xi(p,q)`,
//! `Y(p,q;r,s)`, `Phi(p,q)(EXPR)` and `T(CLASS)(EXPR)`, with `*` binding
//! left factor applied last. Certificate expressions (used by scripts):
//! `t(CLASS)`, `conj(c1,c2)`, `conjinv(c1,c2)`.
//!
//! All grammars are whitespace-insensitive; errors carry byte positions.

use thiserror::Error;

use crate::factorization::{self, Factorization};
use crate::surface::{apply_word, kanenobu_word, CurveRegistry, HomologyClass};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ExprError {
    #[error("syntax error at position {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("{what} expects {expected} arguments (position {pos})")]
    Arity {
        what: String,
        expected: usize,
        pos: usize,
    },
    #[error("unknown name {name:?} at position {pos}")]
    UnknownName { name: String, pos: usize },
    #[error("evaluation error: {0}")]
    Eval(String),
}

// ---------------------------------------------------------------------------
// Tokens
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Int(i64),
    Plus,
    Star,
    Caret,
    LParen,
    RParen,
    Comma,
    Semi,
}

#[derive(Debug, Clone)]
struct Lexed {
    tok: Tok,
    pos: usize,
}

struct Tokens {
    toks: Vec<Lexed>,
    idx: usize,
    end_pos: usize,
}

fn lex(s: &str) -> Result<Tokens, ExprError> {
    let chars: Vec<char> = s.chars().collect();
    let mut toks = Vec::new();
    let mut i = 0usize;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let pos = i;
        let tok = match c {
            '+' => {
                i += 1;
                Tok::Plus
            }
            '*' => {
                i += 1;
                Tok::Star
            }
            '^' => {
                i += 1;
                Tok::Caret
            }
            '(' => {
                i += 1;
                Tok::LParen
            }
            ')' => {
                i += 1;
                Tok::RParen
            }
            ',' => {
                i += 1;
                Tok::Comma
            }
            ';' => {
                i += 1;
                Tok::Semi
            }
            '-' | '0'..='9' => {
                let start = i;
                if c == '-' {
                    i += 1;
                    if i >= chars.len() || !chars[i].is_ascii_digit() {
                        return Err(ExprError::Syntax {
                            pos,
                            msg: "expected digits after '-'".into(),
                        });
                    }
                }
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let text: String = chars[start..i].iter().collect();
                Tok::Int(text.parse().map_err(|_| ExprError::Syntax {
                    pos,
                    msg: format!("bad integer {text:?}"),
                })?)
            }
            c if c.is_ascii_alphabetic() => {
                let start = i;
                while i < chars.len()
                    && (chars[i].is_ascii_alphanumeric() || chars[i] == '_' || chars[i] == '\'')
                {
                    i += 1;
                }
                Tok::Ident(chars[start..i].iter().collect())
            }
            other => {
                return Err(ExprError::Syntax {
                    pos,
                    msg: format!("unexpected character {other:?}"),
                })
            }
        };
        toks.push(Lexed { tok, pos });
    }
    Ok(Tokens {
        toks,
        idx: 0,
        end_pos: chars.len(),
    })
}

impl Tokens {
    fn peek(&self) -> Option<&Lexed> {
        self.toks.get(self.idx)
    }

    fn next(&mut self) -> Option<Lexed> {
        let t = self.toks.get(self.idx).cloned();
        if t.is_some() {
            self.idx += 1;
        }
        t
    }

    fn pos(&self) -> usize {
        self.peek().map_or(self.end_pos, |l| l.pos)
    }

    fn expect(&mut self, want: &Tok, desc: &str) -> Result<usize, ExprError> {
        let pos = self.pos();
        match self.next() {
            Some(l) if &l.tok == want => Ok(l.pos),
            Some(l) => Err(ExprError::Syntax {
                pos: l.pos,
                msg: format!("expected {desc}, found {:?}", l.tok),
            }),
            None => Err(ExprError::Syntax {
                pos,
                msg: format!("expected {desc}, found end of input"),
            }),
        }
    }

    fn expect_int(&mut self, desc: &str) -> Result<(i64, usize), ExprError> {
        let pos = self.pos();
        match self.next() {
            Some(Lexed {
                tok: Tok::Int(v),
                pos,
            }) => Ok((v, pos)),
            Some(l) => Err(ExprError::Syntax {
                pos: l.pos,
                msg: format!("expected {desc}, found {:?}", l.tok),
            }),
            None => Err(ExprError::Syntax {
                pos,
                msg: format!("expected {desc}, found end of input"),
            }),
        }
    }

    fn expect_ident(&mut self, desc: &str) -> Result<(String, usize), ExprError> {
        let pos = self.pos();
        match self.next() {
            Some(Lexed {
                tok: Tok::Ident(s),
                pos,
            }) => Ok((s, pos)),
            Some(l) => Err(ExprError::Syntax {
                pos: l.pos,
                msg: format!("expected {desc}, found {:?}", l.tok),
            }),
            None => Err(ExprError::Syntax {
                pos,
                msg: format!("expected {desc}, found end of input"),
            }),
        }
    }

    fn expect_end(&self) -> Result<(), ExprError> {
        if let Some(l) = self.peek() {
            return Err(ExprError::Syntax {
                pos: l.pos,
                msg: format!("unexpected trailing {:?}", l.tok),
            });
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Class expressions
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ClassTerm {
    Name { name: String, pos: usize },
    Phi {
        p: i64,
        q: i64,
        name: String,
        pos: usize,
    },
    Zero,
}

/// Parsed sum of curve names and word applications.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassExpr {
    pub terms: Vec<ClassTerm>,
}

impl ClassExpr {
    pub fn eval(&self, registry: &CurveRegistry) -> Result<HomologyClass, ExprError> {
        let mut acc = HomologyClass::zero(registry.genus());
        for term in &self.terms {
            let v = match term {
                ClassTerm::Zero => continue,
                ClassTerm::Name { name, pos } => registry
                    .get(name)
                    .map_err(|_| ExprError::UnknownName {
                        name: name.clone(),
                        pos: *pos,
                    })?
                    .clone(),
                ClassTerm::Phi { p, q, name, pos } => {
                    let base = registry.get(name).map_err(|_| ExprError::UnknownName {
                        name: name.clone(),
                        pos: *pos,
                    })?;
                    apply_word(registry, &kanenobu_word(*p, *q), base)
                        .map_err(|e| ExprError::Eval(e.to_string()))?
                }
            };
            acc = acc.xor(&v);
        }
        Ok(acc)
    }

    pub fn render(&self) -> String {
        if self.terms.is_empty() {
            return "0".to_string();
        }
        self.terms
            .iter()
            .map(|t| match t {
                ClassTerm::Zero => "0".to_string(),
                ClassTerm::Name { name, .. } => name.clone(),
                ClassTerm::Phi { p, q, name, .. } => format!("Phi({p},{q})({name})"),
            })
            .collect::<Vec<_>>()
            .join("+")
    }
}

fn parse_class_terms(tz: &mut Tokens) -> Result<ClassExpr, ExprError> {
    let mut terms = Vec::new();
    loop {
        let pos = tz.pos();
        match tz.next() {
            Some(Lexed {
                tok: Tok::Int(0), ..
            }) => terms.push(ClassTerm::Zero),
            Some(Lexed {
                tok: Tok::Ident(id),
                pos,
            }) if id == "Phi" => {
                tz.expect(&Tok::LParen, "'('")?;
                let (p, _) = tz.expect_int("integer")?;
                if matches!(tz.peek().map(|l| &l.tok), Some(Tok::RParen)) {
                    return Err(ExprError::Arity {
                        what: "Phi".into(),
                        expected: 2,
                        pos,
                    });
                }
                tz.expect(&Tok::Comma, "','")?;
                let (q, _) = tz.expect_int("integer")?;
                tz.expect(&Tok::RParen, "')'")?;
                tz.expect(&Tok::LParen, "'('")?;
                let (name, npos) = tz.expect_ident("curve name")?;
                tz.expect(&Tok::RParen, "')'")?;
                terms.push(ClassTerm::Phi {
                    p,
                    q,
                    name,
                    pos: npos,
                });
            }
            Some(Lexed {
                tok: Tok::Ident(name),
                pos,
            }) => terms.push(ClassTerm::Name { name, pos }),
            Some(l) => {
                return Err(ExprError::Syntax {
                    pos: l.pos,
                    msg: format!("expected curve name, found {:?}", l.tok),
                })
            }
            None => {
                return Err(ExprError::Syntax {
                    pos,
                    msg: "expected curve name, found end of input".into(),
                })
            }
        }
        if matches!(tz.peek().map(|l| &l.tok), Some(Tok::Plus)) {
            tz.next();
        } else {
            break;
        }
    }
    Ok(ClassExpr { terms })
}

pub fn parse_class_ast(s: &str) -> Result<ClassExpr, ExprError> {
    let mut tz = lex(s)?;
    let e = parse_class_terms(&mut tz)?;
    tz.expect_end()?;
    Ok(e)
}

/// Parses and resolves a class expression against a registry.
pub fn parse_class_expr(
    registry: &CurveRegistry,
    s: &str,
) -> Result<HomologyClass, ExprError> {
    parse_class_ast(s)?.eval(registry)
}

// ---------------------------------------------------------------------------
// Factorization expressions
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FactExpr {
    Eta { power: u32 },
    Xi { p: i64, q: i64 },
    Y { p: i64, q: i64, r: i64, s: i64 },
    Phi { p: i64, q: i64, inner: Box<FactExpr> },
    TwistConj { class: ClassExpr, inner: Box<FactExpr> },
    /// Display order: the leftmost factor applies last.
    Product(Vec<FactExpr>),
}

impl FactExpr {
    pub fn eval(&self, registry: &CurveRegistry) -> Result<Factorization, ExprError> {
        let map = |e: factorization::FactError| ExprError::Eval(e.to_string());
        match self {
            FactExpr::Eta { power } => {
                factorization::eta_power(registry, *power).map_err(map)
            }
            FactExpr::Xi { p, q } => factorization::xi(registry, *p, *q).map_err(map),
            FactExpr::Y { p, q, r, s } => {
                factorization::y_fact(registry, *p, *q, *r, *s).map_err(map)
            }
            FactExpr::Phi { p, q, inner } => {
                let base = inner.eval(registry)?;
                factorization::conjugate_factorization(registry, &kanenobu_word(*p, *q), &base)
                    .map_err(map)
            }
            FactExpr::TwistConj { class, inner } => {
                let c = class.eval(registry)?;
                let base = inner.eval(registry)?;
                factorization::conjugate_by_class(&c, &base).map_err(map)
            }
            FactExpr::Product(items) => {
                let genus = registry.genus();
                let mut acc = Factorization::empty(genus);
                for item in items.iter().rev() {
                    acc = acc.then(&item.eval(registry)?).map_err(map)?;
                }
                Ok(acc)
            }
        }
    }

    pub fn render(&self) -> String {
        match self {
            FactExpr::Eta { power: 1 } => "eta".to_string(),
            FactExpr::Eta { power } => format!("eta^{power}"),
            FactExpr::Xi { p, q } => format!("xi({p},{q})"),
            FactExpr::Y { p, q, r, s } => format!("Y({p},{q};{r},{s})"),
            FactExpr::Phi { p, q, inner } => format!("Phi({p},{q})({})", inner.render()),
            FactExpr::TwistConj { class, inner } => {
                format!("T({})({})", class.render(), inner.render())
            }
            FactExpr::Product(items) => items
                .iter()
                .map(FactExpr::render)
                .collect::<Vec<_>>()
                .join(" * "),
        }
    }
}

fn parse_fact_atom(tz: &mut Tokens) -> Result<FactExpr, ExprError> {
    let pos = tz.pos();
    match tz.next() {
        Some(Lexed {
            tok: Tok::LParen, ..
        }) => {
            let inner = parse_fact_product(tz)?;
            tz.expect(&Tok::RParen, "')'")?;
            Ok(inner)
        }
        Some(Lexed {
            tok: Tok::Ident(id),
            pos,
        }) => match id.as_str() {
            "eta" => {
                let power = if matches!(tz.peek().map(|l| &l.tok), Some(Tok::Caret)) {
                    tz.next();
                    let (k, kpos) = tz.expect_int("exponent")?;
                    if k < 0 {
                        return Err(ExprError::Syntax {
                            pos: kpos,
                            msg: "eta exponent must be nonnegative".into(),
                        });
                    }
                    k as u32
                } else {
                    1
                };
                Ok(FactExpr::Eta { power })
            }
            "xi" => {
                tz.expect(&Tok::LParen, "'('")?;
                let (p, _) = tz.expect_int("integer")?;
                if matches!(tz.peek().map(|l| &l.tok), Some(Tok::RParen)) {
                    return Err(ExprError::Arity {
                        what: "xi".into(),
                        expected: 2,
                        pos,
                    });
                }
                tz.expect(&Tok::Comma, "','")?;
                let (q, _) = tz.expect_int("integer")?;
                tz.expect(&Tok::RParen, "')'")?;
                Ok(FactExpr::Xi { p, q })
            }
            "Y" => {
                tz.expect(&Tok::LParen, "'('")?;
                let (p, _) = tz.expect_int("integer")?;
                if matches!(tz.peek().map(|l| &l.tok), Some(Tok::RParen)) {
                    return Err(ExprError::Arity {
                        what: "Y".into(),
                        expected: 4,
                        pos,
                    });
                }
                tz.expect(&Tok::Comma, "','")?;
                let (q, _) = tz.expect_int("integer")?;
                if matches!(tz.peek().map(|l| &l.tok), Some(Tok::RParen)) {
                    return Err(ExprError::Arity {
                        what: "Y".into(),
                        expected: 4,
                        pos,
                    });
                }
                tz.expect(&Tok::Semi, "';'")?;
                let (r, _) = tz.expect_int("integer")?;
                tz.expect(&Tok::Comma, "','")?;
                let (s, _) = tz.expect_int("integer")?;
                tz.expect(&Tok::RParen, "')'")?;
                Ok(FactExpr::Y { p, q, r, s })
            }
            "Phi" => {
                tz.expect(&Tok::LParen, "'('")?;
                let (p, _) = tz.expect_int("integer")?;
                if matches!(tz.peek().map(|l| &l.tok), Some(Tok::RParen)) {
                    return Err(ExprError::Arity {
                        what: "Phi".into(),
                        expected: 2,
                        pos,
                    });
                }
                tz.expect(&Tok::Comma, "','")?;
                let (q, _) = tz.expect_int("integer")?;
                tz.expect(&Tok::RParen, "')'")?;
                tz.expect(&Tok::LParen, "'('")?;
                let inner = parse_fact_product(tz)?;
                tz.expect(&Tok::RParen, "')'")?;
                Ok(FactExpr::Phi {
                    p,
                    q,
                    inner: Box::new(inner),
                })
            }
            "T" => {
                tz.expect(&Tok::LParen, "'('")?;
                let class = parse_class_terms(tz)?;
                tz.expect(&Tok::RParen, "')'")?;
                tz.expect(&Tok::LParen, "'('")?;
                let inner = parse_fact_product(tz)?;
                tz.expect(&Tok::RParen, "')'")?;
                Ok(FactExpr::TwistConj {
                    class,
                    inner: Box::new(inner),
                })
            }
            other => Err(ExprError::Syntax {
                pos,
                msg: format!(
                    "unknown constructor {other:?} (expected eta, xi, Y, Phi or T)"
                ),
            }),
        },
        Some(l) => Err(ExprError::Syntax {
            pos: l.pos,
            msg: format!("expected factorization expression, found {:?}", l.tok),
        }),
        None => Err(ExprError::Syntax {
            pos,
            msg: "expected factorization expression, found end of input".into(),
        }),
    }
}

fn parse_fact_product(tz: &mut Tokens) -> Result<FactExpr, ExprError> {
    let mut items = vec![parse_fact_atom(tz)?];
    while matches!(tz.peek().map(|l| &l.tok), Some(Tok::Star)) {
        tz.next();
        items.push(parse_fact_atom(tz)?);
    }
    if items.len() == 1 {
        Ok(items.pop().unwrap())
    } else {
        Ok(FactExpr::Product(items))
    }
}

pub fn parse_fact_ast(s: &str) -> Result<FactExpr, ExprError> {
    let mut tz = lex(s)?;
    let e = parse_fact_product(&mut tz)?;
    tz.expect_end()?;
    Ok(e)
}

/// Parses and materializes a factorization expression.
pub fn parse_factorization_expr(
    registry: &CurveRegistry,
    s: &str,
) -> Result<Factorization, ExprError> {
    parse_fact_ast(s)?.eval(registry)
}

// ---------------------------------------------------------------------------
// Certificate expressions (script conjugation witnesses)
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CertExpr {
    Twist(ClassExpr),
    /// conj(a, b) = a b a^-1 at the matrix level.
    Conj(Box<CertExpr>, Box<CertExpr>),
    /// conjinv(a, b) = a^-1 b a.
    ConjInv(Box<CertExpr>, Box<CertExpr>),
}

impl CertExpr {
    pub fn render(&self) -> String {
        match self {
            CertExpr::Twist(c) => format!("t({})", c.render()),
            CertExpr::Conj(a, b) => format!("conj({}, {})", a.render(), b.render()),
            CertExpr::ConjInv(a, b) => format!("conjinv({}, {})", a.render(), b.render()),
        }
    }
}

fn parse_cert_inner(tz: &mut Tokens) -> Result<CertExpr, ExprError> {
    let (id, pos) = tz.expect_ident("certificate operator")?;
    match id.as_str() {
        "t" => {
            tz.expect(&Tok::LParen, "'('")?;
            let class = parse_class_terms(tz)?;
            tz.expect(&Tok::RParen, "')'")?;
            Ok(CertExpr::Twist(class))
        }
        "conj" | "conjinv" => {
            tz.expect(&Tok::LParen, "'('")?;
            let a = parse_cert_inner(tz)?;
            tz.expect(&Tok::Comma, "','")?;
            let b = parse_cert_inner(tz)?;
            tz.expect(&Tok::RParen, "')'")?;
            if id == "conj" {
                Ok(CertExpr::Conj(Box::new(a), Box::new(b)))
            } else {
                Ok(CertExpr::ConjInv(Box::new(a), Box::new(b)))
            }
        }
        other => Err(ExprError::Syntax {
            pos,
            msg: format!("unknown certificate operator {other:?}"),
        }),
    }
}

pub fn parse_cert_ast(s: &str) -> Result<CertExpr, ExprError> {
    let mut tz = lex(s)?;
    let e = parse_cert_inner(&mut tz)?;
    tz.expect_end()?;
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::CurveRegistry;

    fn reg() -> &'static CurveRegistry {
        CurveRegistry::builtin()
    }

    #[test]
    fn class_expr_resolves_sums() {
        let got = parse_class_expr(reg(), "B_4 + a_2 + d").unwrap();
        let want = reg()
            .get("B_4")
            .unwrap()
            .xor(reg().get("a_2").unwrap())
            .xor(reg().get("d").unwrap());
        assert_eq!(got, want);
        // B_4+a_2+d = (a_3+b_2+b_4)+(a_2)+(a_1+a_2) = a_1+a_3+b_2+b_4
        assert_eq!(got.render(), "a_1+a_3+b_2+b_4");
    }

    #[test]
    fn class_expr_phi_application() {
        let got = parse_class_expr(reg(), "Phi(0,0)(B_4)").unwrap();
        let want = reg().get("B_4").unwrap().xor(reg().get("a_2").unwrap());
        assert_eq!(got, want);
    }

    #[test]
    fn class_expr_unknown_name() {
        let err = parse_class_expr(reg(), "B_7 + a_1").unwrap_err();
        assert!(matches!(err, ExprError::UnknownName { ref name, .. } if name == "B_7"));
    }

    #[test]
    fn class_expr_syntax_error_has_position() {
        let err = parse_class_expr(reg(), "a_1 + + b_2").unwrap_err();
        match err {
            ExprError::Syntax { pos, .. } => assert_eq!(pos, 6),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn class_expr_zero_literal() {
        let got = parse_class_expr(reg(), "0").unwrap();
        assert!(got.is_zero());
        let got = parse_class_expr(reg(), "a_1 + a_1 + 0").unwrap();
        assert!(got.is_zero());
    }

    #[test]
    fn class_expr_whitespace_insensitive() {
        let a = parse_class_expr(reg(), "B_1+b_1+a_2+b_2+d").unwrap();
        let b = parse_class_expr(reg(), "  B_1 +b_1+ a_2    + b_2+d ").unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn class_round_trip() {
        for src in ["B_4+a_2+d", "Phi(0,1)(B_3)+c_2", "b_3'+a_3", "0"] {
            let ast = parse_class_ast(src).unwrap();
            let rendered = ast.render();
            let reparsed = parse_class_ast(&rendered).unwrap();
            assert_eq!(
                ast.eval(reg()).unwrap(),
                reparsed.eval(reg()).unwrap(),
                "round trip value drift for {src}"
            );
        }
    }

    #[test]
    fn fact_expr_constructors() {
        assert_eq!(
            parse_factorization_expr(reg(), "xi(1,0)").unwrap().len(),
            40
        );
        assert_eq!(
            parse_factorization_expr(reg(), "Y(0,0;1,0)").unwrap().len(),
            80
        );
        assert_eq!(parse_factorization_expr(reg(), "eta").unwrap().len(), 10);
        assert_eq!(parse_factorization_expr(reg(), "eta^2").unwrap().len(), 20);
    }

    #[test]
    fn fact_expr_product_matches_xi() {
        let a = parse_factorization_expr(reg(), "Phi(0,1)(eta^2) * eta^2").unwrap();
        let b = parse_factorization_expr(reg(), "xi(0,1)").unwrap();
        assert_eq!(a.letter_classes(), b.letter_classes());
        assert_eq!(a.labels(), b.labels());
    }

    #[test]
    fn fact_expr_arity_error() {
        let err = parse_factorization_expr(reg(), "xi(1)").unwrap_err();
        assert!(matches!(err, ExprError::Arity { ref what, expected: 2, .. } if what == "xi"));
        let err = parse_factorization_expr(reg(), "Y(1,2)").unwrap_err();
        assert!(matches!(err, ExprError::Arity { ref what, expected: 4, .. } if what == "Y"));
    }

    #[test]
    fn fact_expr_unknown_constructor() {
        let err = parse_factorization_expr(reg(), "zeta(1,0)").unwrap_err();
        assert!(matches!(err, ExprError::Syntax { .. }));
    }

    #[test]
    fn fact_round_trip() {
        for src in [
            "xi(1,0)",
            "Phi(0,1)(eta^2) * eta^2",
            "T(c_2)(eta^2)",
            "Y(-1,2;0,2)",
            "eta^2 * eta",
        ] {
            let ast = parse_fact_ast(src).unwrap();
            let rendered = ast.render();
            let reparsed = parse_fact_ast(&rendered).unwrap();
            assert_eq!(
                ast.eval(reg()).unwrap().letter_classes(),
                reparsed.eval(reg()).unwrap().letter_classes(),
                "round trip drift for {src}"
            );
        }
    }

    #[test]
    fn cert_expr_parses() {
        let c = parse_cert_ast("conj(t(B_2), t(B_2+c_2))").unwrap();
        assert_eq!(c.render(), "conj(t(B_2), t(B_2+c_2))");
        assert!(parse_cert_ast("conj(t(B_2))").is_err());
        assert!(parse_cert_ast("swap(t(B_2), t(c_2))").is_err());
    }
}
