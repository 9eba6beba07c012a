use crate::diagnostic::{ParseError, ParseErrorCode, SourceSpan};

#[derive(Debug, Clone, PartialEq, Eq)]
pub(super) enum Tok {
    Word(String),
    Str(String),
    LBracket,
    RBracket,
    LBrace,
    RBrace,
    Comma,
    Arrow,
    Semi,
    Newline,
    Eof,
}

impl Tok {
    pub(super) fn describe(&self) -> String {
        match self {
            Tok::Word(w) => format!("`{w}`"),
            Tok::Str(_) => "a string".into(),
            Tok::LBracket => "`[`".into(),
            Tok::RBracket => "`]`".into(),
            Tok::LBrace => "`{`".into(),
            Tok::RBrace => "`}`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Arrow => "`->`".into(),
            Tok::Semi => "`;`".into(),
            Tok::Newline => "end of line".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone)]
pub(super) struct Token {
    pub tok: Tok,
    pub span: SourceSpan,
}

pub(super) fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || matches!(c, '_' | '-' | '.')
}

struct Lexer<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: usize,
    column: usize,
    /// Position of the most recently consumed character.
    last: (usize, usize),
    tokens: Vec<Token>,
    errors: Vec<ParseError>,
}

impl<'a> Lexer<'a> {
    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        self.last = (self.line, self.column);
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn push(&mut self, tok: Tok, line: usize, column: usize, length: usize) {
        self.tokens.push(Token { tok, span: SourceSpan { line, column, length: length.max(1) } });
    }

    fn run(mut self) -> (Vec<Token>, Vec<ParseError>) {
        while let Some(&c) = self.chars.peek() {
            let (line, column) = (self.line, self.column);
            match c {
                '\n' => {
                    self.bump();
                    self.push(Tok::Newline, line, column, 1);
                }
                c if c.is_whitespace() => {
                    self.bump();
                }
                '#' => {
                    while self.chars.peek().is_some_and(|&c| c != '\n') {
                        self.bump();
                    }
                }
                '[' | ']' | '{' | '}' | ',' | ';' => {
                    self.bump();
                    let tok = match c {
                        '[' => Tok::LBracket,
                        ']' => Tok::RBracket,
                        '{' => Tok::LBrace,
                        '}' => Tok::RBrace,
                        ',' => Tok::Comma,
                        _ => Tok::Semi,
                    };
                    self.push(tok, line, column, 1);
                }
                '"' => self.string(line, column),
                '-' if self.arrow_ahead() => {
                    self.bump();
                    self.bump();
                    self.push(Tok::Arrow, line, column, 2);
                }
                c if is_word_char(c) => {
                    let mut word = String::new();
                    while let Some(&c) = self.chars.peek() {
                        if !is_word_char(c) || (c == '-' && self.arrow_ahead()) {
                            break;
                        }
                        word.push(c);
                        self.bump();
                    }
                    let len = word.chars().count();
                    self.push(Tok::Word(word), line, column, len);
                }
                other => {
                    self.bump();
                    self.errors.push(ParseError::at(
                        ParseErrorCode::Syntax,
                        SourceSpan { line, column, length: 1 },
                        format!("unexpected character {other:?}"),
                    ));
                }
            }
        }
        let (line, column) = self.last;
        self.tokens.push(Token { tok: Tok::Eof, span: SourceSpan { line, column, length: 1 } });
        (self.tokens, self.errors)
    }

    fn arrow_ahead(&self) -> bool {
        let mut ahead = self.chars.clone();
        ahead.next() == Some('-') && ahead.next() == Some('>')
    }

    fn string(&mut self, line: usize, column: usize) {
        self.bump();
        let mut value = String::new();
        let mut length = 1;
        loop {
            let (el, ec) = (self.line, self.column);
            match self.chars.peek().copied() {
                None | Some('\n') => {
                    self.errors.push(ParseError::at(
                        ParseErrorCode::BadString,
                        SourceSpan { line, column, length },
                        "unterminated string",
                    ));
                    break;
                }
                Some('"') => {
                    self.bump();
                    length += 1;
                    break;
                }
                Some('\\') => {
                    self.bump();
                    length += 1;
                    match self.escape() {
                        Ok((c, used)) => {
                            value.push(c);
                            length += used;
                        }
                        Err((message, used)) => {
                            length += used;
                            self.errors.push(ParseError::at(
                                ParseErrorCode::BadString,
                                SourceSpan { line: el, column: ec, length: used + 1 },
                                message,
                            ));
                        }
                    }
                }
                Some(c) => {
                    self.bump();
                    length += 1;
                    value.push(c);
                }
            }
        }
        self.push(Tok::Str(value), line, column, length);
    }

    /// Decodes the escape after a backslash. Returns the character and the
    /// number of source characters consumed.
    fn escape(&mut self) -> Result<(char, usize), (String, usize)> {
        let c = match self.chars.peek().copied() {
            None | Some('\n') => return Err(("dangling escape at end of line".into(), 0)),
            Some(c) => c,
        };
        self.bump();
        match c {
            '"' => Ok(('"', 1)),
            '\\' => Ok(('\\', 1)),
            'n' => Ok(('\n', 1)),
            't' => Ok(('\t', 1)),
            'r' => Ok(('\r', 1)),
            'u' => {
                let mut used = 1;
                if self.chars.peek() != Some(&'{') {
                    return Err(("expected `{` after `\\u`".into(), used));
                }
                self.bump();
                used += 1;
                let mut hex = String::new();
                while let Some(&c) = self.chars.peek() {
                    if c == '}' || c == '"' || c == '\n' || hex.len() > 6 {
                        break;
                    }
                    hex.push(c);
                    self.bump();
                    used += 1;
                }
                if self.chars.peek() != Some(&'}') {
                    return Err(("unterminated `\\u{...}` escape".into(), used));
                }
                self.bump();
                used += 1;
                u32::from_str_radix(&hex, 16)
                    .ok()
                    .and_then(char::from_u32)
                    .map(|c| (c, used))
                    .ok_or_else(|| (format!("invalid unicode escape `\\u{{{hex}}}`"), used))
            }
            other => Err((format!("unknown escape `\\{other}`"), 1)),
        }
    }
}

pub(super) fn tokenize(text: &str) -> (Vec<Token>, Vec<ParseError>) {
    Lexer {
        chars: text.chars().peekable(),
        line: 1,
        column: 1,
        last: (1, 1),
        tokens: Vec::new(),
        errors: Vec::new(),
    }
    .run()
}

/// Quotes a string for DSL output so that [`tokenize`] reads it back.
pub(crate) fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            '\r' => out.push_str("\\r"),
            c if c.is_control() => out.push_str(&format!("\\u{{{:x}}}", c as u32)),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}
