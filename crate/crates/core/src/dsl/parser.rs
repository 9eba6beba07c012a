use std::collections::{BTreeMap, HashMap};

use super::lexer::{tokenize, Tok, Token};
use crate::diagnostic::{ParseError, ParseErrorCode as Code, SourceSpan};
use crate::model::{
    slug, Actor, ActorId, ActorKind, Dependency, DependencyId, Dependum, ElementKind, ModelError, SdModel,
    SrBoundary, SrElement, SubjectKind, Tags, Violation,
};

/// Source positions of every declaration, used to place violations.
#[derive(Debug, Default)]
pub(crate) struct Spans {
    actors: HashMap<ActorId, SourceSpan>,
    dependencies: HashMap<DependencyId, SourceSpan>,
    scopes: HashMap<String, SourceSpan>,
    boundaries: HashMap<ActorId, SourceSpan>,
}

impl Spans {
    pub(crate) fn locate(&self, violation: &Violation) -> Option<SourceSpan> {
        let key = violation.subject.as_str();
        match violation.subject_kind {
            SubjectKind::Actor => self.actors.get(key),
            SubjectKind::Dependency => self.dependencies.get(key),
            SubjectKind::Scope => self.scopes.get(key),
            SubjectKind::Boundary => self.boundaries.get(key),
        }
        .copied()
    }
}

type Step<T> = Result<T, ParseError>;

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    errors: Vec<ParseError>,
    model: SdModel,
    spans: Spans,
    names: HashMap<String, ActorId>,
    dep_count: usize,
    model_line: Option<SourceSpan>,
}

enum LinkKind {
    Decompose,
    MeansEnd,
}

struct Link {
    kind: LinkKind,
    from: (String, Option<ElementKind>, SourceSpan),
    to: (String, ElementKind, SourceSpan),
}

pub(crate) fn parse(text: &str) -> Result<(SdModel, Spans), Vec<ParseError>> {
    let (tokens, lex_errors) = tokenize(text);
    let mut parser = Parser {
        tokens,
        pos: 0,
        errors: lex_errors,
        model: SdModel::default(),
        spans: Spans::default(),
        names: HashMap::new(),
        dep_count: 0,
        model_line: None,
    };
    parser.document();
    if parser.errors.is_empty() {
        Ok((parser.model, parser.spans))
    } else {
        let mut errors = parser.errors;
        errors.sort_by_key(|e| e.span());
        errors.dedup();
        Err(errors)
    }
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].tok
    }

    fn span(&self) -> SourceSpan {
        self.tokens[self.pos].span
    }

    fn advance(&mut self) -> Token {
        let token = self.tokens[self.pos].clone();
        if token.tok != Tok::Eof {
            self.pos += 1;
        }
        token
    }

    fn unexpected(&self, wanted: &str) -> ParseError {
        ParseError::at(Code::Syntax, self.span(), format!("expected {wanted}, found {}", self.peek().describe()))
    }

    fn expect(&mut self, tok: Tok) -> Step<SourceSpan> {
        if *self.peek() == tok {
            Ok(self.advance().span)
        } else {
            Err(self.unexpected(&tok.describe()))
        }
    }

    fn string(&mut self, what: &str) -> Step<(String, SourceSpan)> {
        match self.peek() {
            Tok::Str(_) => {
                let t = self.advance();
                let Tok::Str(s) = t.tok else { unreachable!() };
                Ok((s, t.span))
            }
            _ => Err(self.unexpected(what)),
        }
    }

    fn word(&mut self, what: &str) -> Step<(String, SourceSpan)> {
        match self.peek() {
            Tok::Word(_) => {
                let t = self.advance();
                let Tok::Word(w) = t.tok else { unreachable!() };
                Ok((w, t.span))
            }
            _ => Err(self.unexpected(what)),
        }
    }

    fn keyword(&mut self, kw: &str) -> Step<SourceSpan> {
        match self.peek() {
            Tok::Word(w) if w == kw => Ok(self.advance().span),
            _ => Err(self.unexpected(&format!("`{kw}`"))),
        }
    }

    fn peek_keyword(&self) -> Option<&str> {
        match self.peek() {
            Tok::Word(w) => Some(w.as_str()),
            _ => None,
        }
    }

    fn element_kind(&mut self) -> Step<(Option<ElementKind>, SourceSpan)> {
        let (word, span) = self.word("an element kind (goal, softgoal, task, resource)")?;
        match word.parse() {
            Ok(kind) => Ok((Some(kind), span)),
            Err(e) => {
                self.errors.push(ParseError::at(Code::BadKind, span, e.to_string()));
                Ok((None, span))
            }
        }
    }

    /// `[a, "b c", ...]`; newlines inside the brackets are ignored.
    fn list(&mut self) -> Step<Vec<(String, SourceSpan)>> {
        self.expect(Tok::LBracket)?;
        let mut items = Vec::new();
        loop {
            while *self.peek() == Tok::Newline {
                self.advance();
            }
            match self.peek() {
                Tok::RBracket => {
                    self.advance();
                    return Ok(items);
                }
                Tok::Str(_) => items.push(self.string("a list item")?),
                Tok::Word(_) => items.push(self.word("a list item")?),
                _ => return Err(self.unexpected("a list item or `]`")),
            }
            while *self.peek() == Tok::Newline {
                self.advance();
            }
            match self.peek() {
                Tok::Comma => {
                    self.advance();
                }
                Tok::RBracket => {}
                _ => return Err(self.unexpected("`,` or `]`")),
            }
        }
    }

    fn tags(&mut self) -> Step<Tags> {
        Ok(self.list()?.into_iter().map(|(s, _)| s).collect())
    }

    fn end_of_statement(&mut self, in_block: bool) -> Step<()> {
        match self.peek() {
            Tok::Newline | Tok::Semi => {
                self.advance();
                Ok(())
            }
            Tok::Eof => Ok(()),
            Tok::RBrace if in_block => Ok(()),
            _ => Err(self.unexpected("end of statement")),
        }
    }

    /// Skips the rest of a broken statement, including any braced block it
    /// opened.
    fn recover(&mut self, in_block: bool) {
        let mut depth = 0usize;
        loop {
            match self.peek() {
                Tok::Eof => return,
                Tok::Newline | Tok::Semi if depth == 0 => {
                    self.advance();
                    return;
                }
                Tok::RBrace if depth == 0 && in_block => return,
                Tok::LBrace => depth += 1,
                Tok::RBrace => depth = depth.saturating_sub(1),
                _ => {}
            }
            self.advance();
        }
    }

    fn document(&mut self) {
        loop {
            match self.peek() {
                Tok::Eof => return,
                Tok::Newline | Tok::Semi => {
                    self.advance();
                    continue;
                }
                _ => {}
            }
            let result = match self.peek_keyword() {
                Some("model") => self.model_stmt(),
                Some("actor") => self.actor_stmt(),
                Some("dep") => self.dep_stmt(),
                Some("scope") => self.scope_stmt(),
                Some("sr") => self.sr_stmt(),
                _ => Err(self.unexpected("`model`, `actor`, `dep`, `scope` or `sr`")),
            };
            if let Err(e) = result.and_then(|()| self.end_of_statement(false)) {
                self.errors.push(e);
                self.recover(false);
            }
        }
    }

    fn model_stmt(&mut self) -> Step<()> {
        let head = self.keyword("model")?;
        let (name, _) = self.string("the model name")?;
        if let Some(first) = self.model_line {
            return Err(ParseError::at(
                Code::Syntax,
                head,
                format!("model name already declared on line {}", first.line),
            ));
        }
        self.model_line = Some(head);
        self.model.set_name(name);
        Ok(())
    }

    fn actor_stmt(&mut self) -> Step<()> {
        let head = self.keyword("actor")?;
        let (name, name_span) = self.string("the actor name")?;
        let mut id = None;
        let mut kind = None;
        let mut tags = None;
        while let Some(clause) = self.peek_keyword().map(str::to_owned) {
            let clause_span = self.span();
            let duplicate = match clause.as_str() {
                "id" => {
                    self.advance();
                    id.replace(self.string("the actor id")?).is_some()
                }
                "kind" => {
                    self.advance();
                    let (word, span) = self.word("an actor kind")?;
                    match word.parse::<ActorKind>() {
                        Ok(k) => kind.replace(k).is_some(),
                        Err(e) => {
                            self.errors.push(ParseError::at(Code::BadKind, span, e.to_string()));
                            false
                        }
                    }
                }
                "tags" => {
                    self.advance();
                    tags.replace(self.tags()?).is_some()
                }
                _ => break,
            };
            if duplicate {
                return Err(ParseError::at(Code::Syntax, clause_span, format!("duplicate `{clause}` clause")));
            }
        }

        let (id, id_span) = match id {
            Some((id, span)) => (ActorId::new(id), span),
            None => (ActorId::new(slug(&name)), name_span),
        };
        if self.names.contains_key(&name) {
            self.errors.push(ParseError::at(
                Code::DuplicateId,
                name_span,
                format!("actor \"{name}\" is already declared"),
            ));
            return Ok(());
        }
        let actor = Actor { id: id.clone(), name: name.clone(), kind: kind.unwrap_or_default(), tags: tags.unwrap_or_default() };
        match self.model.add_actor(actor) {
            Ok(()) => {
                self.names.insert(name, id.clone());
                self.spans.actors.insert(id, head);
            }
            Err(e) => self.errors.push(ParseError::at(Code::DuplicateId, id_span, e.to_string())),
        }
        Ok(())
    }

    fn resolve(&mut self, name: &str, span: SourceSpan) -> Option<ActorId> {
        let found = self.names.get(name).cloned();
        if found.is_none() {
            self.errors.push(ParseError::at(
                Code::UnknownActor,
                span,
                format!("actor \"{name}\" is not declared (declare actors before use)"),
            ));
        }
        found
    }

    fn dep_stmt(&mut self) -> Step<()> {
        let head = self.keyword("dep")?;
        self.dep_count += 1;
        let (kind, _) = self.element_kind()?;
        let (name, _) = self.string("the dependum name")?;
        self.keyword("from")?;
        let (from, from_span) = self.string("the depender name")?;
        self.keyword("to")?;
        let (to, to_span) = self.string("the dependee name")?;
        let mut id = None;
        let mut tags = None;
        while let Some(clause) = self.peek_keyword().map(str::to_owned) {
            let clause_span = self.span();
            let duplicate = match clause.as_str() {
                "id" => {
                    self.advance();
                    id.replace(self.string("the dependency id")?).is_some()
                }
                "tags" => {
                    self.advance();
                    tags.replace(self.tags()?).is_some()
                }
                _ => break,
            };
            if duplicate {
                return Err(ParseError::at(Code::Syntax, clause_span, format!("duplicate `{clause}` clause")));
            }
        }

        let depender = self.resolve(&from, from_span);
        let dependee = self.resolve(&to, to_span);
        let (Some(kind), Some(depender), Some(dependee)) = (kind, depender, dependee) else {
            return Ok(());
        };
        let (id, id_span) = match id {
            Some((id, span)) => (DependencyId::new(id), span),
            None => (DependencyId::new(format!("d{}", self.dep_count)), head),
        };
        let dependum = Dependum { name, kind, tags: tags.unwrap_or_default() };
        match self.model.add_dependency(Dependency { id: id.clone(), depender, dependee, dependum }) {
            Ok(()) => {
                self.spans.dependencies.insert(id, head);
            }
            Err(e) => self.errors.push(ParseError::at(Code::DuplicateId, id_span, e.to_string())),
        }
        Ok(())
    }

    fn scope_stmt(&mut self) -> Step<()> {
        let head = self.keyword("scope")?;
        let (name, name_span) = self.string("the scope name")?;
        let items = self.list()?;
        let members: Vec<ActorId> = items.iter().filter_map(|(n, s)| self.resolve(n, *s)).collect();
        if members.len() != items.len() {
            return Ok(());
        }
        match self.model.add_scope(name.clone(), members) {
            Ok(()) => {
                self.spans.scopes.insert(name, head);
            }
            Err(e) => self.errors.push(ParseError::at(Code::DuplicateId, name_span, e.to_string())),
        }
        Ok(())
    }

    fn sr_stmt(&mut self) -> Step<()> {
        let head = self.keyword("sr")?;
        let (actor_name, actor_span) = self.string("the actor name")?;
        let open = self.expect(Tok::LBrace)?;

        let mut explicit: Vec<(SrElement, SourceSpan)> = Vec::new();
        let mut links: Vec<Link> = Vec::new();
        loop {
            match self.peek() {
                Tok::Newline | Tok::Semi => {
                    self.advance();
                    continue;
                }
                Tok::RBrace => {
                    self.advance();
                    break;
                }
                Tok::Eof => {
                    self.errors.push(ParseError::at(Code::Syntax, open, "unclosed `{`"));
                    return Ok(());
                }
                _ => {}
            }
            let result = match self.peek_keyword() {
                Some("decompose") => self.decompose_stmt().map(|l| links.extend(l)),
                Some("means") => self.means_stmt().map(|l| links.extend(l)),
                Some(_) => self.element_stmt().map(|e| explicit.extend(e)),
                None => Err(self.unexpected("an element, `decompose`, `means` or `}`")),
            };
            if let Err(e) = result.and_then(|()| self.end_of_statement(true)) {
                self.errors.push(e);
                self.recover(true);
            }
        }

        let Some(actor) = self.resolve(&actor_name, actor_span) else {
            return Ok(());
        };
        let mut boundary = SrBoundary::new(actor.clone());
        let mut declared: BTreeMap<String, ElementKind> = BTreeMap::new();
        for (element, span) in explicit {
            let (name, kind) = (element.name.clone(), element.kind);
            match boundary.add_element(element) {
                Ok(()) => {
                    declared.insert(name, kind);
                }
                Err(e) => self.errors.push(ParseError::at(Code::DuplicateId, span, e.to_string())),
            }
        }
        let mut implied = |name: &str, kind: ElementKind, span: SourceSpan, errors: &mut Vec<ParseError>| {
            match declared.get(name) {
                Some(&existing) if existing != kind => errors.push(ParseError::at(
                    Code::BadKind,
                    span,
                    format!("element \"{name}\" is a {existing}, not a {kind}"),
                )),
                Some(_) => {}
                None => {
                    declared.insert(name.to_owned(), kind);
                    boundary
                        .add_element(SrElement { name: name.to_owned(), kind, tags: Tags::new() })
                        .expect("undeclared element");
                }
            }
        };
        for link in &links {
            if let (name, Some(kind), span) = &link.from {
                implied(name, *kind, *span, &mut self.errors);
            }
            let (name, kind, span) = &link.to;
            implied(name, *kind, *span, &mut self.errors);
        }
        for link in links {
            let (from, _, from_span) = link.from;
            if !declared.contains_key(&from) {
                self.errors.push(ParseError::at(
                    Code::UnknownElement,
                    from_span,
                    format!("element \"{from}\" is not declared in this boundary"),
                ));
                continue;
            }
            match link.kind {
                LinkKind::Decompose => boundary.decompose(from, link.to.0),
                LinkKind::MeansEnd => boundary.means_end(from, link.to.0),
            }
        }
        match self.model.add_boundary(boundary) {
            Ok(()) => {
                self.spans.boundaries.insert(actor, head);
            }
            Err(e @ ModelError::DuplicateBoundary(_)) => {
                self.errors.push(ParseError::at(Code::DuplicateId, actor_span, e.to_string()))
            }
            Err(e) => self.errors.push(ParseError::at(Code::Syntax, head, e.to_string())),
        }
        Ok(())
    }

    fn element_stmt(&mut self) -> Step<Option<(SrElement, SourceSpan)>> {
        let start = self.span();
        let (kind, _) = self.element_kind()?;
        let (name, _) = self.string("the element name")?;
        let tags = match self.peek_keyword() {
            Some("tags") => {
                self.advance();
                self.tags()?
            }
            _ => Tags::new(),
        };
        Ok(kind.map(|kind| (SrElement { name, kind, tags }, start)))
    }

    fn typed_target(&mut self) -> Step<Option<(String, ElementKind, SourceSpan)>> {
        let (kind, _) = self.element_kind()?;
        let (name, span) = self.string("the element name")?;
        Ok(kind.map(|k| (name, k, span)))
    }

    fn decompose_stmt(&mut self) -> Step<Option<Link>> {
        self.keyword("decompose")?;
        let (parent, span) = self.string("the parent task name")?;
        self.expect(Tok::Arrow)?;
        let to = self.typed_target()?;
        Ok(to.map(|to| Link { kind: LinkKind::Decompose, from: (parent, None, span), to }))
    }

    fn means_stmt(&mut self) -> Step<Option<Link>> {
        self.keyword("means")?;
        let means = self.typed_target()?;
        self.expect(Tok::Arrow)?;
        let end = self.typed_target()?;
        Ok(means.zip(end).map(|((name, kind, span), to)| Link {
            kind: LinkKind::MeansEnd,
            from: (name, Some(kind), span),
            to,
        }))
    }
}
