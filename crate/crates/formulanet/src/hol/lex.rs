//! Tokenizer. Whitespace separates tokens; parens and dots are single
//! tokens; the reserved multi-character operators are recognized by maximal
//! munch. Unreserved runs of symbol characters (`+`, `<=`, `|-`, ...) lex as
//! ordinary identifiers so that dataset text with arbitrary constant names
//! stays ingestible.

use super::ParseError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TokenKind {
    Binder,
    Ident,
    InfixOp,
    LParen,
    RParen,
    Dot,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub text: String,
    /// Byte offset in the input, for diagnostics.
    pub pos: usize,
}

impl Token {
    fn new(kind: TokenKind, text: &str, pos: usize) -> Token {
        Token {
            kind,
            text: text.to_string(),
            pos,
        }
    }
}

fn is_ident_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '\''
}

fn is_symbol_char(c: char) -> bool {
    // Printable ASCII punctuation that is not structural.
    matches!(
        c,
        '+' | '-' | '*' | '/' | '<' | '>' | '=' | '~' | '&' | '|' | '#' | '$' | '%' | '^'
            | ':' | ';' | ',' | '?' | '!' | '@' | '\\' | '[' | ']' | '{' | '}' | '`'
    )
}

/// Reserved sequences tried greedily at each position, longest first.
/// `?!` before `?`, `/\` before `\`, etc.
const RESERVED: [(&str, TokenKind); 12] = [
    ("<=>", TokenKind::InfixOp),
    ("==>", TokenKind::InfixOp),
    ("/\\", TokenKind::InfixOp),
    ("\\/", TokenKind::InfixOp),
    ("?!", TokenKind::Binder),
    ("=", TokenKind::InfixOp),
    ("!", TokenKind::Binder),
    ("?", TokenKind::Binder),
    ("@", TokenKind::Binder),
    ("\\", TokenKind::Binder),
    ("(", TokenKind::LParen),
    (")", TokenKind::RParen),
];

fn reserved_at(text: &str) -> Option<(&'static str, TokenKind)> {
    RESERVED
        .iter()
        .find(|(lex, _)| text.starts_with(lex))
        .copied()
}

/// Multi-character reserved sequences break a symbolic-identifier run;
/// single-character ones (`=`, `!`, ...) do not, so `<=` stays one token.
fn multi_reserved_starts(text: &str) -> bool {
    ["<=>", "==>", "/\\", "\\/", "?!"]
        .iter()
        .any(|lex| text.starts_with(lex))
}

pub fn tokenize(input: &str) -> Result<Vec<Token>, ParseError> {
    let mut tokens = Vec::new();
    let mut pos = 0;
    while pos < input.len() {
        let rest = &input[pos..];
        let c = rest.chars().next().unwrap();
        if c.is_whitespace() {
            pos += c.len_utf8();
            continue;
        }
        if c == '.' {
            tokens.push(Token::new(TokenKind::Dot, ".", pos));
            pos += 1;
            continue;
        }
        if let Some((lex, kind)) = reserved_at(rest) {
            tokens.push(Token::new(kind, lex, pos));
            pos += lex.len();
            continue;
        }
        if is_ident_char(c) {
            let end = rest
                .char_indices()
                .find(|&(_, c)| !is_ident_char(c))
                .map_or(rest.len(), |(i, _)| i);
            tokens.push(Token::new(TokenKind::Ident, &rest[..end], pos));
            pos += end;
            continue;
        }
        if is_symbol_char(c) {
            // Maximal run of symbol characters, stopping where a reserved
            // sequence begins so `x+/\y` still yields `/\`.
            let mut end = 0;
            for (i, ch) in rest.char_indices() {
                if i > 0 && multi_reserved_starts(&rest[i..]) {
                    break;
                }
                if !is_symbol_char(ch) {
                    break;
                }
                end = i + ch.len_utf8();
            }
            tokens.push(Token::new(TokenKind::Ident, &rest[..end], pos));
            pos += end;
            continue;
        }
        return Err(ParseError::IllegalCharacter { pos, ch: c });
    }
    Ok(tokens)
}
