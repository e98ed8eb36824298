//! Recursive-descent parser over the token stream.

use super::ast::*;
use super::lex::{lex, Token, TokenKind};
use super::{ParseError, SourceSpan};
use crate::graph::Physicality;

/// How far a row's probabilities may deviate from summing to exactly 1.
pub const ROW_SUM_TOLERANCE: f64 = 1e-9;

/// Parses a `.potx` document.
pub fn parse(source: &str) -> Result<Document, ParseError> {
    let tokens = lex(source)?;
    let mut parser = Parser { tokens, pos: 0 };
    parser.document()
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn next(&mut self) -> Token {
        let token = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        token
    }

    fn error(&self, span: SourceSpan, message: impl Into<String>) -> ParseError {
        ParseError { span, message: message.into(), expected: None }
    }

    fn expected(&self, span: SourceSpan, found: &str, expected: &str) -> ParseError {
        ParseError {
            span,
            message: format!("unexpected {found}"),
            expected: Some(expected.to_string()),
        }
    }

    fn describe(token: &Token) -> String {
        match token.kind {
            TokenKind::Eof => "end of input".to_string(),
            TokenKind::Str => format!("string \"{}\"", token.text),
            _ => format!("'{}'", token.text),
        }
    }

    fn expect_kind(&mut self, kind: TokenKind, expected: &str) -> Result<Token, ParseError> {
        let token = self.peek().clone();
        if token.kind == kind {
            Ok(self.next())
        } else {
            Err(self.expected(token.span, &Self::describe(&token), expected))
        }
    }

    fn ident(&mut self, what: &str) -> Result<Token, ParseError> {
        self.expect_kind(TokenKind::Ident, what)
    }

    /// Consumes an identifier token with exactly this text.
    fn keyword(&mut self, word: &str) -> Result<Token, ParseError> {
        let token = self.peek().clone();
        if token.kind == TokenKind::Ident && token.text == word {
            Ok(self.next())
        } else {
            Err(self.expected(token.span, &Self::describe(&token), &format!("'{word}'")))
        }
    }

    fn peek_keyword(&self, word: &str) -> bool {
        let token = self.peek();
        token.kind == TokenKind::Ident && token.text == word
    }

    fn document(&mut self) -> Result<Document, ParseError> {
        self.keyword("system")?;
        let name = self.ident("system name")?.text;
        self.expect_kind(TokenKind::LBrace, "'{'")?;
        let mut doc = Document {
            name,
            measures: vec![],
            states: vec![],
            models: vec![],
            observers: vec![],
            cpts: vec![],
            targets: vec![],
            expects: vec![],
        };
        loop {
            let token = self.peek().clone();
            match token.kind {
                TokenKind::RBrace => {
                    self.next();
                    break;
                }
                TokenKind::Ident => match token.text.as_str() {
                    "measure" => doc.measures.push(self.measure()?),
                    "state" => doc.states.push(self.state()?),
                    "model" => doc.models.push(self.model()?),
                    "observer" => doc.observers.push(self.observer()?),
                    "cpt" => doc.cpts.push(self.cpt()?),
                    "target" => doc.targets.push(self.target()?),
                    "expect" => doc.expects.push(self.expect_block()?),
                    _ => {
                        return Err(self.expected(
                            token.span,
                            &Self::describe(&token),
                            "measure|state|model|observer|cpt|target|expect",
                        ))
                    }
                },
                _ => {
                    return Err(self.expected(
                        token.span,
                        &Self::describe(&token),
                        "an item or '}'",
                    ))
                }
            }
        }
        let token = self.peek().clone();
        if token.kind != TokenKind::Eof {
            return Err(self.expected(token.span, &Self::describe(&token), "end of input"));
        }
        Ok(doc)
    }

    fn label(&mut self) -> Result<Option<String>, ParseError> {
        if self.peek().kind == TokenKind::Str {
            Ok(Some(self.next().text))
        } else {
            Ok(None)
        }
    }

    fn measure(&mut self) -> Result<MeasureDecl, ParseError> {
        self.keyword("measure")?;
        let id = self.ident("measure id")?.text;
        let label = self.label()?;
        Ok(MeasureDecl { id, label })
    }

    fn state(&mut self) -> Result<StateDecl, ParseError> {
        self.keyword("state")?;
        let id = self.ident("state id")?.text;
        let token = self.peek().clone();
        let physicality = if token.kind == TokenKind::Ident {
            match token.text.as_str() {
                "physical" => {
                    self.next();
                    Physicality::Physical
                }
                "nonphysical" => {
                    self.next();
                    Physicality::NonPhysical
                }
                _ => {
                    return Err(self.expected(
                        token.span,
                        &Self::describe(&token),
                        "physical|nonphysical",
                    ))
                }
            }
        } else {
            return Err(self.expected(
                token.span,
                &Self::describe(&token),
                "physical|nonphysical",
            ));
        };
        let domain = if self.peek_keyword("domain") {
            self.next();
            self.expect_kind(TokenKind::LBrace, "'{'")?;
            let span = self.peek().span;
            let values = self.id_list("domain value")?;
            self.expect_kind(TokenKind::RBrace, "'}'")?;
            if values.len() < 2 {
                return Err(self.error(span, "a domain needs at least two values"));
            }
            Some(values)
        } else {
            None
        };
        let label = self.label()?;
        Ok(StateDecl { id, physicality, domain, label })
    }

    fn id_list(&mut self, what: &str) -> Result<Vec<String>, ParseError> {
        let mut ids = vec![self.ident(what)?.text];
        while self.peek().kind == TokenKind::Comma {
            self.next();
            ids.push(self.ident(what)?.text);
        }
        Ok(ids)
    }

    fn section(&mut self, name: &str, what: &str) -> Result<Vec<String>, ParseError> {
        self.keyword(name)?;
        self.expect_kind(TokenKind::Colon, "':'")?;
        self.id_list(what)
    }

    fn model(&mut self) -> Result<ModelDecl, ParseError> {
        self.keyword("model")?;
        let id = self.ident("model id")?.text;
        self.expect_kind(TokenKind::LBrace, "'{'")?;
        let inputs = self.section("in", "input id")?;
        self.expect_kind(TokenKind::Semi, "';'")?;
        let outputs = self.section("out", "output id")?;
        let mut goal = false;
        let mut alt_group = None;
        while self.peek().kind == TokenKind::Semi {
            self.next();
            let token = self.peek().clone();
            if token.kind != TokenKind::Ident {
                return Err(self.expected(token.span, &Self::describe(&token), "goal|alt-of"));
            }
            match token.text.as_str() {
                "goal" if !goal && alt_group.is_none() => {
                    self.next();
                    goal = true;
                }
                "alt" if alt_group.is_none() => {
                    self.next();
                    self.expect_kind(TokenKind::Minus, "'-'")?;
                    self.keyword("of")?;
                    self.expect_kind(TokenKind::Colon, "':'")?;
                    alt_group = Some(self.ident("group id")?.text);
                }
                _ => {
                    return Err(self.expected(token.span, &Self::describe(&token), "goal|alt-of"))
                }
            }
        }
        self.expect_kind(TokenKind::RBrace, "'}'")?;
        Ok(ModelDecl { id, inputs, outputs, goal, alt_group })
    }

    fn level(&mut self) -> Result<u8, ParseError> {
        let token = self.expect_kind(TokenKind::Number, "a level between 0 and 5")?;
        match token.text.parse::<u8>() {
            Ok(n) if n <= 5 && token.text.len() == 1 => Ok(n),
            _ => Err(self.error(token.span, format!("level {} is out of range 0..=5", token.text))),
        }
    }

    fn observer(&mut self) -> Result<ObserverDecl, ParseError> {
        self.keyword("observer")?;
        let id = self.ident("observer id")?.text;
        self.keyword("level")?;
        let level = self.level()?;
        let experimentable = if self.peek_keyword("experimentable") {
            self.next();
            true
        } else {
            false
        };
        self.expect_kind(TokenKind::LBrace, "'{'")?;
        let mut covers = vec![];
        let mut embeds = vec![];
        if self.peek_keyword("covers") {
            covers = self.section("covers", "covered id")?;
            self.expect_kind(TokenKind::Semi, "';'")?;
        }
        if self.peek_keyword("embeds") {
            embeds = self.section("embeds", "embedded observer id")?;
            self.expect_kind(TokenKind::Semi, "';'")?;
        }
        self.expect_kind(TokenKind::RBrace, "'}'")?;
        Ok(ObserverDecl { id, level, experimentable, covers, embeds })
    }

    fn number(&mut self) -> Result<(f64, SourceSpan), ParseError> {
        let token = self.expect_kind(TokenKind::Number, "a number")?;
        match token.text.parse::<f64>() {
            Ok(value) => Ok((value, token.span)),
            Err(_) => Err(self.error(token.span, format!("invalid number '{}'", token.text))),
        }
    }

    fn row(&mut self) -> Result<RowDecl, ParseError> {
        let start = self.keyword("row")?.span;
        self.expect_kind(TokenKind::LParen, "'('")?;
        let mut parents = vec![];
        if self.peek().kind != TokenKind::RParen {
            parents = self.id_list("parent value")?;
        }
        self.expect_kind(TokenKind::RParen, "')'")?;
        self.expect_kind(TokenKind::Arrow, "'->'")?;
        self.expect_kind(TokenKind::LBrace, "'{'")?;
        let mut entries: Vec<(String, f64)> = vec![];
        loop {
            let value = self.ident("domain value")?;
            self.expect_kind(TokenKind::Colon, "':'")?;
            let (prob, span) = self.number()?;
            if entries.iter().any(|(v, _)| *v == value.text) {
                return Err(self.error(value.span, format!("duplicate value '{}'", value.text)));
            }
            if !(0.0..=1.0).contains(&prob) {
                return Err(self.error(span, format!("probability {prob} is outside [0, 1]")));
            }
            entries.push((value.text, prob));
            if self.peek().kind == TokenKind::Comma {
                self.next();
            } else {
                break;
            }
        }
        self.expect_kind(TokenKind::RBrace, "'}'")?;
        let sum: f64 = entries.iter().map(|(_, p)| p).sum();
        if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
            return Err(self.error(start, format!("row probabilities sum to {sum}, expected 1")));
        }
        Ok(RowDecl { parents, entries })
    }

    fn cpt(&mut self) -> Result<CptDecl, ParseError> {
        self.keyword("cpt")?;
        let node = self.ident("model or root state id")?.text;
        self.expect_kind(TokenKind::LBrace, "'{'")?;
        let mut rows = vec![self.row()?];
        while self.peek_keyword("row") {
            rows.push(self.row()?);
        }
        self.expect_kind(TokenKind::RBrace, "'}'")?;
        Ok(CptDecl { node, rows })
    }

    fn target(&mut self) -> Result<TargetDecl, ParseError> {
        self.keyword("target")?;
        self.keyword("transparent")?;
        self.expect_kind(TokenKind::LBrace, "'{'")?;
        let ids = self.id_list("target id")?;
        self.expect_kind(TokenKind::RBrace, "'}'")?;
        Ok(TargetDecl { ids })
    }

    fn assertion(&mut self) -> Result<Assertion, ParseError> {
        let token = self.peek().clone();
        if token.kind != TokenKind::Ident {
            return Err(self.expected(token.span, &Self::describe(&token), "model|observer|gap"));
        }
        match token.text.as_str() {
            "model" => {
                self.next();
                let model = self.ident("model id")?.text;
                self.keyword("is")?;
                let class_token = self.ident("intro|extero|bridge")?;
                let class = match class_token.text.as_str() {
                    "intro" => ModelClassName::Intro,
                    "extero" => ModelClassName::Extero,
                    "bridge" => ModelClassName::Bridge,
                    _ => {
                        return Err(self.expected(
                            class_token.span,
                            &Self::describe(&class_token),
                            "intro|extero|bridge",
                        ))
                    }
                };
                Ok(Assertion::ModelIs { model, class })
            }
            "observer" => {
                self.next();
                let observer = self.ident("observer id")?.text;
                let token = self.peek().clone();
                if self.peek_keyword("ok") {
                    self.next();
                    Ok(Assertion::ObserverOk { observer })
                } else if self.peek_keyword("violates") {
                    self.next();
                    let rule = self.ident("violation rule name")?.text;
                    Ok(Assertion::ObserverViolates { observer, rule })
                } else {
                    Err(self.expected(token.span, &Self::describe(&token), "ok|violates"))
                }
            }
            "gap" => {
                self.next();
                let node = self.ident("node id")?.text;
                self.keyword("level")?;
                let level = self.level()?;
                Ok(Assertion::GapLevel { node, level })
            }
            _ => Err(self.expected(token.span, &Self::describe(&token), "model|observer|gap")),
        }
    }

    fn expect_block(&mut self) -> Result<ExpectDecl, ParseError> {
        self.keyword("expect")?;
        self.expect_kind(TokenKind::LBrace, "'{'")?;
        let mut assertions = vec![self.assertion()?];
        while self.peek().kind != TokenKind::RBrace {
            assertions.push(self.assertion()?);
        }
        self.expect_kind(TokenKind::RBrace, "'}'")?;
        Ok(ExpectDecl { assertions })
    }
}
