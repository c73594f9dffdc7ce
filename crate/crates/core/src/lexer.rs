//! Tokenizer shared by the catalog and query parsers.

use crate::error::ParseError;

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Tok {
    /// Bare identifier or keyword.
    Ident(String),
    /// `'...'` string; doubled quotes are unescaped.
    Single(String),
    /// `"..."` quoted identifier.
    Double(String),
    Number(String),
    /// Unquoted `YYYY-MM-DD`.
    Date(String),
    Sym(&'static str),
}

#[derive(Debug, Clone)]
pub(crate) struct Token {
    pub tok: Tok,
    pub line: usize,
    pub column: usize,
}

const SYMBOLS: [&str; 13] = ["->", "<=", ">=", "<", ">", "=", ",", ";", ":", "(", ")", "{", "}"];

fn is_ident_start(c: char) -> bool {
    c.is_alphabetic() || c == '_'
}

fn is_ident_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '-'
}

pub(crate) fn tokenize(text: &str) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);

    while i < chars.len() {
        let c = chars[i];
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let (start_line, start_col) = (line, col);
        let push = |out: &mut Vec<Token>, tok| {
            out.push(Token {
                tok,
                line: start_line,
                column: start_col,
            })
        };

        if c == '\'' || c == '"' {
            let quote = c;
            let mut s = String::new();
            i += 1;
            col += 1;
            loop {
                match chars.get(i) {
                    None => return Err(ParseError::new(start_line, start_col, "unterminated quoted string")),
                    Some(&ch) if ch == quote => {
                        if chars.get(i + 1) == Some(&quote) {
                            s.push(quote);
                            i += 2;
                            col += 2;
                        } else {
                            i += 1;
                            col += 1;
                            break;
                        }
                    }
                    Some(&'\n') => return Err(ParseError::new(start_line, start_col, "newline inside quoted string")),
                    Some(&ch) => {
                        s.push(ch);
                        i += 1;
                        col += 1;
                    }
                }
            }
            push(&mut out, if quote == '\'' { Tok::Single(s) } else { Tok::Double(s) });
            continue;
        }

        let negative_number = c == '-' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit());
        if c.is_ascii_digit() || negative_number {
            let start = i;
            i += 1;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            let mut tok_text: String = chars[start..i].iter().collect();
            let is_date = !negative_number
                && tok_text.len() == 4
                && tok_text.chars().all(|d| d.is_ascii_digit())
                && chars.get(i) == Some(&'-')
                && chars.get(i + 1..i + 6).is_some_and(|rest| {
                    rest[0].is_ascii_digit() && rest[1].is_ascii_digit() && rest[2] == '-' && rest[3].is_ascii_digit() && rest[4].is_ascii_digit()
                });
            if is_date {
                tok_text.extend(&chars[i..i + 6]);
                i += 6;
                col += i - start;
                push(&mut out, Tok::Date(tok_text));
            } else {
                col += i - start;
                push(&mut out, Tok::Number(tok_text));
            }
            continue;
        }

        if is_ident_start(c) {
            let start = i;
            while i < chars.len() && is_ident_char(chars[i]) {
                if chars[i] == '-' && chars.get(i + 1) == Some(&'>') {
                    break;
                }
                i += 1;
            }
            // a trailing hyphen belongs to the next token
            while chars[i - 1] == '-' {
                i -= 1;
            }
            col += i - start;
            push(&mut out, Tok::Ident(chars[start..i].iter().collect()));
            continue;
        }

        let rest: String = chars[i..(i + 2).min(chars.len())].iter().collect();
        match SYMBOLS.iter().find(|s| rest.starts_with(**s)) {
            Some(sym) => {
                i += sym.len();
                col += sym.len();
                push(&mut out, Tok::Sym(sym));
            }
            None => return Err(ParseError::new(line, col, format!("unexpected character `{c}`"))),
        }
    }
    Ok(out)
}

const KEYWORDS: [&str; 7] = ["select", "from", "where", "and", "or", "true", "false"];

/// Renders a name bare when it lexes back as one identifier, quoted otherwise.
pub(crate) fn render_name(name: &str, quote: char) -> String {
    let mut chars = name.chars();
    let bare = chars.next().is_some_and(is_ident_start)
        && name.chars().all(is_ident_char)
        && !name.ends_with('-')
        && !name.contains("->")
        && !KEYWORDS.iter().any(|k| k.eq_ignore_ascii_case(name));
    if bare {
        name.to_string()
    } else {
        let doubled = format!("{quote}{quote}");
        format!("{quote}{}{quote}", name.replace(quote, &doubled))
    }
}

/// Cursor over a token stream with position-aware errors.
pub(crate) struct Cursor {
    tokens: Vec<Token>,
    pos: usize,
    end: (usize, usize),
}

impl Cursor {
    pub fn new(text: &str) -> Result<Self, ParseError> {
        let tokens = tokenize(text)?;
        let last_line = text.lines().count().max(1);
        let last_col = text.lines().last().map_or(0, |l| l.chars().count()) + 1;
        Ok(Self {
            tokens,
            pos: 0,
            end: (last_line, last_col),
        })
    }

    pub fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos).map(|t| &t.tok)
    }

    pub fn at_end(&self) -> bool {
        self.pos >= self.tokens.len()
    }

    pub fn next(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    pub fn position(&self) -> (usize, usize) {
        self.tokens
            .get(self.pos)
            .map_or(self.end, |t| (t.line, t.column))
    }

    pub fn error(&self, message: impl Into<String>) -> ParseError {
        let (line, column) = self.position();
        ParseError::new(line, column, message)
    }

    pub fn is_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Some(Tok::Ident(s)) if s.eq_ignore_ascii_case(kw))
    }

    pub fn eat_keyword(&mut self, kw: &str) -> bool {
        if self.is_keyword(kw) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    pub fn expect_keyword(&mut self, kw: &str) -> Result<(), ParseError> {
        if self.eat_keyword(kw) {
            Ok(())
        } else {
            Err(self.error(format!("expected `{kw}`")))
        }
    }

    pub fn eat_sym(&mut self, sym: &str) -> bool {
        if matches!(self.peek(), Some(Tok::Sym(s)) if *s == sym) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    pub fn expect_sym(&mut self, sym: &str) -> Result<(), ParseError> {
        if self.eat_sym(sym) {
            Ok(())
        } else {
            Err(self.error(format!("expected `{sym}`")))
        }
    }

    /// A bare or double-quoted name; single quotes too when `allow_single`.
    pub fn name(&mut self, allow_single: bool) -> Result<String, ParseError> {
        match self.peek().cloned() {
            Some(Tok::Ident(s)) | Some(Tok::Double(s)) => {
                self.pos += 1;
                Ok(s)
            }
            Some(Tok::Single(s)) if allow_single => {
                self.pos += 1;
                Ok(s)
            }
            _ => Err(self.error("expected a name")),
        }
    }
}
