use indexmap::IndexMap;

use super::lexer::{tokenize, Tok, Token};
use super::validate::validate_with_source;
use super::{ArchitectureModel, ParseDiagnostic, Pos};
use crate::tomasys::{Comparator, Component, Function, FunctionDesign, Nfr, Objective, Polarity, QaType};

/// Source positions of every declaration and reference, kept parallel to
/// the model's lists so the validator can point back into the text.
#[derive(Debug, Default, Clone)]
pub(crate) struct SourceMap {
    pub qa_types: Vec<Pos>,
    pub components: Vec<Pos>,
    pub functions: Vec<Pos>,
    pub designs: Vec<DesignPos>,
    pub objectives: Vec<ObjectivePos>,
}

#[derive(Debug, Default, Clone)]
pub(crate) struct DesignPos {
    pub name: Pos,
    pub realizes: Pos,
    pub requires: Vec<Pos>,
    pub qa: Vec<Pos>,
    pub utility: Pos,
}

#[derive(Debug, Default, Clone)]
pub(crate) struct ObjectivePos {
    pub id: Pos,
    pub function: Pos,
    pub nfrs: Vec<Pos>,
}

/// Parses and validates an `.archmodel` source.
///
/// Returns the model when no error-level diagnostic was produced; warnings
/// are dropped here and can be obtained with [`super::validate`].
pub fn parse_model(source: &str) -> Result<ArchitectureModel, Vec<ParseDiagnostic>> {
    let tokens = tokenize(source).map_err(|d| vec![d])?;
    let (model, map) = Parser { tokens, at: 0 }.system().map_err(|d| vec![d])?;
    let errors: Vec<_> = validate_with_source(&model, Some(&map))
        .into_iter()
        .filter(ParseDiagnostic::is_error)
        .collect();
    if errors.is_empty() {
        Ok(model)
    } else {
        Err(errors)
    }
}

/// Parses without semantic checks; used by the validator entry point so it
/// can report warnings with positions.
pub(crate) fn parse_unchecked(source: &str) -> Result<(ArchitectureModel, SourceMap), ParseDiagnostic> {
    let tokens = tokenize(source)?;
    Parser { tokens, at: 0 }.system()
}

struct Parser {
    tokens: Vec<Token>,
    at: usize,
}

type PResult<T> = Result<T, ParseDiagnostic>;

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.at]
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.at].clone();
        if self.at + 1 < self.tokens.len() {
            self.at += 1;
        }
        t
    }

    fn unexpected<T>(&self, expected: &str) -> PResult<T> {
        let t = self.peek();
        Err(ParseDiagnostic::error(
            t.pos,
            format!("expected {expected}, found {}", t.tok.describe()),
        ))
    }

    fn expect(&mut self, tok: Tok) -> PResult<Pos> {
        if self.peek().tok == tok {
            Ok(self.bump().pos)
        } else {
            self.unexpected(&tok.describe())
        }
    }

    fn ident(&mut self) -> PResult<(String, Pos)> {
        match &self.peek().tok {
            Tok::Ident(s) => {
                let s = s.clone();
                let pos = self.bump().pos;
                Ok((s, pos))
            }
            _ => self.unexpected("an identifier"),
        }
    }

    fn keyword(&mut self, kw: &str) -> PResult<Pos> {
        match &self.peek().tok {
            Tok::Ident(s) if s == kw => Ok(self.bump().pos),
            _ => self.unexpected(&format!("`{kw}`")),
        }
    }

    fn number(&mut self) -> PResult<(f64, Pos)> {
        match self.peek().tok {
            Tok::Number(n) => {
                let pos = self.bump().pos;
                Ok((n, pos))
            }
            _ => self.unexpected("a number"),
        }
    }

    fn system(mut self) -> PResult<(ArchitectureModel, SourceMap)> {
        self.keyword("system")?;
        let (name, _) = self.ident()?;
        self.expect(Tok::LBrace)?;
        let mut model = ArchitectureModel {
            name,
            qa_types: vec![],
            components: vec![],
            functions: vec![],
            designs: vec![],
            objectives: vec![],
        };
        let mut map = SourceMap::default();
        loop {
            let t = self.peek().clone();
            match &t.tok {
                Tok::RBrace => {
                    self.bump();
                    break;
                }
                Tok::Ident(kw) => match kw.as_str() {
                    "qa_type" => {
                        self.bump();
                        let (name, pos) = self.ident()?;
                        let polarity = match &self.peek().tok {
                            Tok::Ident(p) if p == "higher_better" => Polarity::HigherBetter,
                            Tok::Ident(p) if p == "lower_better" => Polarity::LowerBetter,
                            _ => return self.unexpected("`higher_better` or `lower_better`"),
                        };
                        self.bump();
                        self.expect(Tok::Semi)?;
                        model.qa_types.push(QaType { name, polarity });
                        map.qa_types.push(pos);
                    }
                    "component" => {
                        self.bump();
                        let (name, pos) = self.ident()?;
                        self.expect(Tok::Semi)?;
                        model.components.push(Component { name });
                        map.components.push(pos);
                    }
                    "function" => {
                        self.bump();
                        let (name, pos) = self.ident()?;
                        self.expect(Tok::Semi)?;
                        model.functions.push(Function { name });
                        map.functions.push(pos);
                    }
                    "design" => {
                        self.bump();
                        let (d, p) = self.design()?;
                        model.designs.push(d);
                        map.designs.push(p);
                    }
                    "objective" => {
                        self.bump();
                        let (o, p) = self.objective()?;
                        model.objectives.push(o);
                        map.objectives.push(p);
                    }
                    _ => return self.unexpected("a declaration (`qa_type`, `component`, `function`, `design`, `objective`) or `}`"),
                },
                _ => return self.unexpected("a declaration or `}`"),
            }
        }
        self.expect(Tok::Eof)?;
        Ok((model, map))
    }

    fn design(&mut self) -> PResult<(FunctionDesign, DesignPos)> {
        let (name, name_pos) = self.ident()?;
        self.keyword("realizes")?;
        let (realizes, realizes_pos) = self.ident()?;
        let open = self.expect(Tok::LBrace)?;
        let mut pos = DesignPos {
            name: name_pos,
            realizes: realizes_pos,
            ..Default::default()
        };
        let mut requires: Option<Vec<String>> = None;
        let mut qa_estimates = IndexMap::new();
        let mut utility = None;
        loop {
            let t = self.peek().clone();
            match &t.tok {
                Tok::RBrace => {
                    self.bump();
                    break;
                }
                Tok::Ident(kw) if kw == "requires" => {
                    self.bump();
                    if requires.is_some() {
                        return Err(ParseDiagnostic::error(t.pos, format!("design `{name}` has more than one `requires` clause")));
                    }
                    let mut list = Vec::new();
                    loop {
                        let (c, p) = self.ident()?;
                        list.push(c);
                        pos.requires.push(p);
                        if self.peek().tok == Tok::Comma {
                            self.bump();
                        } else {
                            break;
                        }
                    }
                    self.expect(Tok::Semi)?;
                    requires = Some(list);
                }
                Tok::Ident(kw) if kw == "qa" => {
                    self.bump();
                    let (q, p) = self.ident()?;
                    self.expect(Tok::Eq)?;
                    let (v, _) = self.number()?;
                    self.expect(Tok::Semi)?;
                    if qa_estimates.insert(q.clone(), v).is_some() {
                        return Err(ParseDiagnostic::error(p, format!("duplicate estimate for `{q}` in design `{name}`")));
                    }
                    pos.qa.push(p);
                }
                Tok::Ident(kw) if kw == "utility" => {
                    self.bump();
                    if utility.is_some() {
                        return Err(ParseDiagnostic::error(t.pos, format!("design `{name}` has more than one utility")));
                    }
                    self.expect(Tok::Eq)?;
                    let (v, _) = self.number()?;
                    self.expect(Tok::Semi)?;
                    utility = Some(v);
                    pos.utility = t.pos;
                }
                _ => return self.unexpected("`requires`, `qa`, `utility` or `}`"),
            }
        }
        let requires = requires.ok_or_else(|| ParseDiagnostic::error(open, format!("design `{name}` lacks a `requires` clause")))?;
        let utility = utility.ok_or_else(|| ParseDiagnostic::error(open, format!("design `{name}` lacks a utility")))?;
        Ok((
            FunctionDesign {
                name,
                realizes,
                requires,
                qa_estimates,
                utility,
            },
            pos,
        ))
    }

    fn objective(&mut self) -> PResult<(Objective, ObjectivePos)> {
        let (id, id_pos) = self.ident()?;
        self.expect(Tok::Colon)?;
        let (function, function_pos) = self.ident()?;
        self.expect(Tok::LBrace)?;
        let mut pos = ObjectivePos {
            id: id_pos,
            function: function_pos,
            nfrs: vec![],
        };
        let mut nfrs = Vec::new();
        while self.peek().tok != Tok::RBrace {
            self.keyword("require")?;
            let (qa_type, p) = self.ident()?;
            let comparator = match self.peek().tok {
                Tok::Ge => Comparator::AtLeast,
                Tok::Le => Comparator::AtMost,
                _ => return self.unexpected("`>=` or `<=`"),
            };
            self.bump();
            let (threshold, _) = self.number()?;
            self.expect(Tok::Semi)?;
            nfrs.push(Nfr {
                qa_type,
                comparator,
                threshold,
            });
            pos.nfrs.push(p);
        }
        self.bump();
        Ok((Objective { id, function, nfrs }, pos))
    }
}
