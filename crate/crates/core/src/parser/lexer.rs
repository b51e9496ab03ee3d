use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub enum Tok {
    Ident(String),
    Number(String),
    /// `eps[i]`
    Tol(u32),
    LParen,
    RParen,
    LBrace,
    RBrace,
    Comma,
    Semi,
    Slash,
    Bang,
    Amp,
    Bar,
    DoubleBar,
    /// `_{` opening a proportion subscript
    SubOpen,
    Arrow,
    FatArrow,
    Eq,
    Neq,
    Le,
    Ge,
    Lt,
    Gt,
    ApproxEq(u32),
    ApproxLe(u32),
    ApproxGe(u32),
    Plus,
    Minus,
    Star,
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Number(s) => format!("number `{s}`"),
            Tok::Eof => "end of input".to_string(),
            other => format!("`{}`", other.symbol()),
        }
    }

    fn symbol(&self) -> String {
        match self {
            Tok::Tol(i) => format!("eps[{i}]"),
            Tok::LParen => "(".into(),
            Tok::RParen => ")".into(),
            Tok::LBrace => "{".into(),
            Tok::RBrace => "}".into(),
            Tok::Comma => ",".into(),
            Tok::Semi => ";".into(),
            Tok::Slash => "/".into(),
            Tok::Bang => "!".into(),
            Tok::Amp => "&".into(),
            Tok::Bar => "|".into(),
            Tok::DoubleBar => "||".into(),
            Tok::SubOpen => "_{".into(),
            Tok::Arrow => "->".into(),
            Tok::FatArrow => "=>".into(),
            Tok::Eq => "=".into(),
            Tok::Neq => "!=".into(),
            Tok::Le => "<=".into(),
            Tok::Ge => ">=".into(),
            Tok::Lt => "<".into(),
            Tok::Gt => ">".into(),
            Tok::ApproxEq(i) => format!("~=[{i}]"),
            Tok::ApproxLe(i) => format!("<~[{i}]"),
            Tok::ApproxGe(i) => format!(">~[{i}]"),
            Tok::Plus => "+".into(),
            Tok::Minus => "-".into(),
            Tok::Star => "*".into(),
            Tok::Ident(_) | Tok::Number(_) | Tok::Eof => String::new(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Token {
    pub tok: Tok,
    pub line: usize,
    pub col: usize,
}

pub fn tokenize(text: &str) -> Result<Vec<Token>> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    let err = |line, col, msg: String| Error::Parse { line, col, msg };
    while i < chars.len() {
        let c = chars[i];
        let (tl, tc) = (line, col);
        let peek = |k: usize| chars.get(i + k).copied();
        let mut advance = |n: usize, i: &mut usize| {
            *i += n;
            col += n;
        };
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            advance(1, &mut i);
            continue;
        }
        if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let push = |out: &mut Vec<Token>, tok| out.push(Token { tok, line: tl, col: tc });
        if c.is_ascii_alphabetic() {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_' || chars[i] == '\'') {
                i += 1;
            }
            let word: String = chars[start..i].iter().collect();
            col += i - start;
            if word == "eps" && chars.get(i) == Some(&'[') {
                let (idx, used) = bracket_index(&chars[i..]).ok_or_else(|| err(tl, tc, "expected `eps[<index>]`".into()))?;
                i += used;
                col += used;
                push(&mut out, Tok::Tol(idx));
            } else {
                push(&mut out, Tok::Ident(word));
            }
            continue;
        }
        if c.is_ascii_digit() || (c == '.' && peek(1).is_some_and(|d| d.is_ascii_digit())) {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '-' || chars[j] == '+') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            if i + 1 < chars.len() && chars[i] == '/' && chars[i + 1].is_ascii_digit() {
                i += 1;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
            }
            let word: String = chars[start..i].iter().collect();
            col += i - start;
            push(&mut out, Tok::Number(word));
            continue;
        }
        let two: String = chars[i..(i + 2).min(chars.len())].iter().collect();
        let approx = |rest: &[char]| bracket_index(rest);
        let (tok, n) = match (c, two.as_str()) {
            (_, "~=") => {
                let (idx, used) = approx(&chars[i + 2..]).ok_or_else(|| err(tl, tc, "expected `~=[<index>]`".into()))?;
                (Tok::ApproxEq(idx), 2 + used)
            }
            (_, "<~") => {
                let (idx, used) = approx(&chars[i + 2..]).ok_or_else(|| err(tl, tc, "expected `<~[<index>]`".into()))?;
                (Tok::ApproxLe(idx), 2 + used)
            }
            (_, ">~") => {
                let (idx, used) = approx(&chars[i + 2..]).ok_or_else(|| err(tl, tc, "expected `>~[<index>]`".into()))?;
                (Tok::ApproxGe(idx), 2 + used)
            }
            (_, "||") => (Tok::DoubleBar, 2),
            (_, "_{") => (Tok::SubOpen, 2),
            (_, "->") => (Tok::Arrow, 2),
            (_, "=>") => (Tok::FatArrow, 2),
            (_, "!=") => (Tok::Neq, 2),
            (_, "<=") => (Tok::Le, 2),
            (_, ">=") => (Tok::Ge, 2),
            ('(', _) => (Tok::LParen, 1),
            (')', _) => (Tok::RParen, 1),
            ('{', _) => (Tok::LBrace, 1),
            ('}', _) => (Tok::RBrace, 1),
            (',', _) => (Tok::Comma, 1),
            (';', _) => (Tok::Semi, 1),
            ('/', _) => (Tok::Slash, 1),
            ('!', _) => (Tok::Bang, 1),
            ('&', _) => (Tok::Amp, 1),
            ('|', _) => (Tok::Bar, 1),
            ('=', _) => (Tok::Eq, 1),
            ('<', _) => (Tok::Lt, 1),
            ('>', _) => (Tok::Gt, 1),
            ('+', _) => (Tok::Plus, 1),
            ('-', _) => (Tok::Minus, 1),
            ('*', _) => (Tok::Star, 1),
            _ => return Err(err(tl, tc, format!("unexpected character `{c}`"))),
        };
        push(&mut out, tok);
        advance(n, &mut i);
    }
    out.push(Token { tok: Tok::Eof, line, col });
    Ok(out)
}

/// Parses `[<digits>]` at the start of `rest`, returning the index and the
/// number of characters consumed.
fn bracket_index(rest: &[char]) -> Option<(u32, usize)> {
    if rest.first() != Some(&'[') {
        return None;
    }
    let close = rest.iter().position(|&c| c == ']')?;
    let digits: String = rest[1..close].iter().collect();
    let idx: u32 = digits.trim().parse().ok()?;
    (idx >= 1).then_some((idx, close + 1))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<Tok> {
        tokenize(s).unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn longest_match_operators() {
        assert_eq!(
            toks("||P(x)||_{x} <~[2] 3/10"),
            vec![
                Tok::DoubleBar,
                Tok::Ident("P".into()),
                Tok::LParen,
                Tok::Ident("x".into()),
                Tok::RParen,
                Tok::DoubleBar,
                Tok::SubOpen,
                Tok::Ident("x".into()),
                Tok::RBrace,
                Tok::ApproxLe(2),
                Tok::Number("3/10".into()),
                Tok::Eof
            ]
        );
        assert_eq!(toks("a -> b => c != d"), vec![
            Tok::Ident("a".into()), Tok::Arrow, Tok::Ident("b".into()), Tok::FatArrow,
            Tok::Ident("c".into()), Tok::Neq, Tok::Ident("d".into()), Tok::Eof
        ]);
    }

    #[test]
    fn comments_and_positions() {
        let t = tokenize("# header\n  P(c) # trailing\n").unwrap();
        assert_eq!((t[0].line, t[0].col), (2, 3));
        assert_eq!(t.len(), 5);
    }

    #[test]
    fn tolerance_variable_and_exponents() {
        assert_eq!(toks("eps[3] 1e-3"), vec![Tok::Tol(3), Tok::Number("1e-3".into()), Tok::Eof]);
        assert!(tokenize("~=[0]").is_err());
        assert!(tokenize("$").is_err());
    }
}
