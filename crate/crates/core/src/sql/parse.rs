use super::{
    Aggregate, CompareOp, Condition, Direction, Join, OrderBy, Query, RawColumn, RawQuery,
    SelectItem, SqlError, ValueTerm,
};
use crate::schema::is_decimal_numeral;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Number(String),
    Str(String),
    Sym(&'static str),
}

struct Lexed {
    tok: Tok,
    pos: usize,
}

const SYMBOLS: [&str; 13] = ["!=", "<>", ">=", "<=", "=", ">", "<", "@", ",", "(", ")", ".", ";"];

fn syntax(pos: usize, message: impl Into<String>) -> SqlError {
    SqlError::Syntax { pos, message: message.into() }
}

fn lex(text: &str) -> Result<Vec<Lexed>, SqlError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < text.len() {
        let c = text[i..].chars().next().unwrap();
        if c.is_whitespace() {
            i += c.len_utf8();
            continue;
        }
        let start = i;
        if c == '\'' {
            let mut value = String::new();
            i += 1;
            loop {
                let Some(ch) = text[i..].chars().next() else {
                    return Err(syntax(start, "unterminated string literal"));
                };
                i += ch.len_utf8();
                if ch == '\'' {
                    if bytes.get(i) == Some(&b'\'') {
                        value.push('\'');
                        i += 1;
                    } else {
                        break;
                    }
                } else {
                    value.push(ch);
                }
            }
            out.push(Lexed { tok: Tok::Str(value), pos: start });
        } else if c.is_ascii_digit() || (c == '-' && bytes.get(i + 1).is_some_and(u8::is_ascii_digit)) {
            i += 1;
            while i < text.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                i += 1;
            }
            let num = &text[start..i];
            if !is_decimal_numeral(num) {
                return Err(syntax(start, format!("malformed number `{num}`")));
            }
            out.push(Lexed { tok: Tok::Number(num.to_string()), pos: start });
        } else if c.is_alphanumeric() || c == '_' {
            while let Some(ch) = text[i..].chars().next() {
                if ch.is_alphanumeric() || ch == '_' {
                    i += ch.len_utf8();
                } else {
                    break;
                }
            }
            out.push(Lexed { tok: Tok::Ident(text[start..i].to_string()), pos: start });
        } else if let Some(sym) = SYMBOLS.iter().find(|s| text[i..].starts_with(**s)) {
            i += sym.len();
            out.push(Lexed { tok: Tok::Sym(sym), pos: start });
        } else {
            return Err(syntax(start, format!("unexpected character `{c}`")));
        }
    }
    Ok(out)
}

/// Interprets `extraN` (N >= 1) as a value placeholder index.
pub fn parse_placeholder(s: &str) -> Option<u32> {
    let digits = s.strip_prefix("extra")?;
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) || digits.starts_with('0') {
        return None;
    }
    digits.parse().ok()
}

const KEYWORDS: [&str; 12] = [
    "select", "from", "where", "and", "join", "on", "order", "by", "asc", "desc", "limit", "inner",
];

struct Parser {
    toks: Vec<Lexed>,
    at: usize,
    end: usize,
}

impl Parser {
    fn pos(&self) -> usize {
        self.toks.get(self.at).map_or(self.end, |t| t.pos)
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|t| &t.tok)
    }

    fn peek_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Some(Tok::Ident(s)) if s.eq_ignore_ascii_case(kw))
    }

    fn eat_keyword(&mut self, kw: &str) -> bool {
        if self.peek_keyword(kw) {
            self.at += 1;
            true
        } else {
            false
        }
    }

    fn expect_keyword(&mut self, kw: &str) -> Result<(), SqlError> {
        if self.eat_keyword(kw) {
            Ok(())
        } else {
            Err(syntax(self.pos(), format!("expected `{kw}`")))
        }
    }

    fn eat_sym(&mut self, sym: &str) -> bool {
        if matches!(self.peek(), Some(Tok::Sym(s)) if *s == sym) {
            self.at += 1;
            true
        } else {
            false
        }
    }

    fn expect_sym(&mut self, sym: &str) -> Result<(), SqlError> {
        if self.eat_sym(sym) {
            Ok(())
        } else {
            Err(syntax(self.pos(), format!("expected `{sym}`")))
        }
    }

    fn ident(&mut self) -> Result<String, SqlError> {
        match self.peek() {
            Some(Tok::Ident(s)) if !KEYWORDS.iter().any(|k| k.eq_ignore_ascii_case(s)) => {
                let s = s.clone();
                self.at += 1;
                Ok(s)
            }
            _ => Err(syntax(self.pos(), "expected identifier")),
        }
    }

    fn column(&mut self) -> Result<RawColumn, SqlError> {
        let first = self.ident()?;
        if self.eat_sym("@") || self.eat_sym(".") {
            let column = self.ident()?;
            Ok(RawColumn { table: Some(first), column })
        } else {
            Ok(RawColumn { table: None, column: first })
        }
    }

    fn select_item(&mut self) -> Result<SelectItem<RawColumn>, SqlError> {
        if let (Some(Tok::Ident(name)), Some(Lexed { tok: Tok::Sym("("), .. })) =
            (self.peek(), self.toks.get(self.at + 1))
        {
            let pos = self.pos();
            let aggregate = Aggregate::from_keyword(name)
                .ok_or_else(|| syntax(pos, format!("unknown function `{name}`")))?;
            self.at += 2;
            let column = self.column()?;
            self.expect_sym(")")?;
            return Ok(SelectItem { aggregate, column });
        }
        Ok(SelectItem { aggregate: Aggregate::None, column: self.column()? })
    }

    fn value(&mut self) -> Result<ValueTerm, SqlError> {
        let pos = self.pos();
        let v = match self.peek() {
            Some(Tok::Str(s)) => match parse_placeholder(s) {
                Some(i) => ValueTerm::Placeholder(i),
                None if s == "extra0" => {
                    return Err(syntax(pos, "placeholder indices start at 1"));
                }
                None => ValueTerm::Literal(s.clone()),
            },
            Some(Tok::Number(n)) => ValueTerm::Literal(n.clone()),
            _ => return Err(syntax(pos, "expected a value")),
        };
        self.at += 1;
        Ok(v)
    }

    fn compare_op(&mut self) -> Result<CompareOp, SqlError> {
        let pos = self.pos();
        match self.peek() {
            Some(Tok::Sym(s)) => {
                let op = CompareOp::from_symbol(s)
                    .ok_or_else(|| syntax(pos, "expected a comparison operator"))?;
                self.at += 1;
                Ok(op)
            }
            _ => Err(syntax(pos, "expected a comparison operator")),
        }
    }

    fn statement(&mut self) -> Result<RawQuery, SqlError> {
        self.expect_keyword("select")?;
        let mut select = vec![self.select_item()?];
        while self.eat_sym(",") {
            select.push(self.select_item()?);
        }
        self.expect_keyword("from")?;
        let from = self.ident()?;
        let mut joins = Vec::new();
        loop {
            let inner = self.eat_keyword("inner");
            if !self.eat_keyword("join") {
                if inner {
                    return Err(syntax(self.pos(), "expected `join`"));
                }
                break;
            }
            let table = self.ident()?;
            self.expect_keyword("on")?;
            let left = self.column()?;
            self.expect_sym("=")?;
            let right = self.column()?;
            joins.push(Join { table, left, right });
        }
        let mut conditions = Vec::new();
        if self.eat_keyword("where") {
            loop {
                let column = self.column()?;
                let op = self.compare_op()?;
                let value = self.value()?;
                conditions.push(Condition { column, op, value });
                if !self.eat_keyword("and") {
                    break;
                }
            }
        }
        let mut order_by = None;
        if self.eat_keyword("order") {
            self.expect_keyword("by")?;
            let column = self.column()?;
            let direction = if self.eat_keyword("desc") {
                Direction::Desc
            } else {
                self.eat_keyword("asc");
                Direction::Asc
            };
            order_by = Some(OrderBy { column, direction });
        }
        let mut limit = None;
        if self.eat_keyword("limit") {
            let pos = self.pos();
            match self.peek() {
                Some(Tok::Number(n)) => {
                    let v: u64 = n.parse().map_err(|_| syntax(pos, "LIMIT needs an integer"))?;
                    if v == 0 {
                        return Err(syntax(pos, "LIMIT must be positive"));
                    }
                    self.at += 1;
                    limit = Some(v);
                }
                _ => return Err(syntax(pos, "LIMIT needs an integer")),
            }
        }
        self.eat_sym(";");
        if self.at < self.toks.len() {
            return Err(syntax(self.pos(), "trailing input"));
        }
        Ok(Query { select, from, joins, conditions, order_by, limit })
    }
}

/// Parses query text without consulting a schema.
pub fn parse_statement(text: &str) -> Result<RawQuery, SqlError> {
    let toks = lex(text)?;
    Parser { toks, at: 0, end: text.len() }.statement()
}
