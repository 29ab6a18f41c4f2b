use serde::{Deserialize, Serialize};

/// A token with its byte offsets into the source text.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub text: String,
    pub start: usize,
    pub end: usize,
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

/// Splits on whitespace and punctuation. Word characters are alphanumerics
/// and `_`; every other non-space character becomes a single-char token.
pub fn tokenize(text: &str) -> Vec<Token> {
    let mut tokens = Vec::new();
    let mut word_start: Option<usize> = None;
    for (i, c) in text.char_indices() {
        if is_word_char(c) {
            word_start.get_or_insert(i);
            continue;
        }
        if let Some(s) = word_start.take() {
            tokens.push(Token { text: text[s..i].to_string(), start: s, end: i });
        }
        if !c.is_whitespace() {
            let end = i + c.len_utf8();
            tokens.push(Token { text: text[i..end].to_string(), start: i, end });
        }
    }
    if let Some(s) = word_start {
        tokens.push(Token { text: text[s..].to_string(), start: s, end: text.len() });
    }
    tokens
}

/// Inverse of [`tokenize`]: places each token at its recorded offset and
/// fills gaps with spaces.
pub fn join(tokens: &[Token]) -> String {
    let mut out = String::new();
    for t in tokens {
        while out.len() < t.start {
            out.push(' ');
        }
        out.push_str(&t.text);
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Question {
    pub text: String,
    #[serde(skip)]
    pub tokens: Vec<Token>,
}

impl Question {
    pub fn new(text: impl Into<String>) -> Question {
        let text = text.into();
        let tokens = tokenize(&text);
        Question { text, tokens }
    }

    /// Source text covered by tokens `from..to`.
    pub fn span_text(&self, from: usize, to: usize) -> &str {
        &self.text[self.tokens[from].start..self.tokens[to - 1].end]
    }

    /// Lowercased word tokens (punctuation dropped).
    pub fn words(&self) -> Vec<String> {
        self.tokens
            .iter()
            .filter(|t| t.text.chars().any(is_word_char))
            .map(|t| t.text.to_lowercase())
            .collect()
    }

    /// True when the token range is a usable entity span: starts and ends on
    /// a word token.
    pub fn is_word_span(&self, from: usize, to: usize) -> bool {
        let w = |t: &Token| t.text.chars().any(is_word_char);
        w(&self.tokens[from]) && w(&self.tokens[to - 1])
    }
}

impl From<&str> for Question {
    fn from(s: &str) -> Self {
        Question::new(s)
    }
}
