use super::{RegexAst, RegexError};
use crate::alphabet::ByteSet;

/// Default bound on unrolled positions, matching the default state cap.
pub const DEFAULT_POSITION_LIMIT: u64 = 1 << 20;

/// Parses `pattern` into a normalized tree with repeats unrolled.
pub fn parse_regex(pattern: &str) -> Result<RegexAst, RegexError> {
    parse_regex_with_limit(pattern, DEFAULT_POSITION_LIMIT)
}

/// Like [`parse_regex`], failing with [`RegexError::TooLarge`] when bounded
/// repetition would expand past `limit` positions.
pub fn parse_regex_with_limit(pattern: &str, limit: u64) -> Result<RegexAst, RegexError> {
    let mut parser = Parser {
        src: pattern.as_bytes(),
        pos: 0,
        limit,
    };
    let ast = parser.alternation()?;
    match parser.peek() {
        None => Ok(ast),
        Some(b')') => Err(parser.syntax("unmatched ')'")),
        Some(_) => Err(parser.syntax("unexpected character")),
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    limit: u64,
}

enum Quantifier {
    Star,
    Plus,
    Optional,
    Bounded(u32, Option<u32>),
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn peek_at(&self, offset: usize) -> Option<u8> {
        self.src.get(self.pos + offset).copied()
    }

    fn bump(&mut self) -> Option<u8> {
        let b = self.peek()?;
        self.pos += 1;
        Some(b)
    }

    fn starts_with(&self, s: &[u8]) -> bool {
        self.src[self.pos..].starts_with(s)
    }

    fn syntax(&self, message: &str) -> RegexError {
        self.syntax_at(self.pos, message)
    }

    fn syntax_at(&self, position: usize, message: &str) -> RegexError {
        RegexError::Syntax {
            position,
            message: message.to_string(),
        }
    }

    fn unsupported(&self, position: usize, feature: &str) -> RegexError {
        RegexError::Unsupported {
            position,
            feature: feature.to_string(),
        }
    }

    fn alternation(&mut self) -> Result<RegexAst, RegexError> {
        let mut branches = vec![self.concatenation()?];
        while self.peek() == Some(b'|') {
            self.pos += 1;
            branches.push(self.concatenation()?);
        }
        Ok(RegexAst::union(branches))
    }

    fn concatenation(&mut self) -> Result<RegexAst, RegexError> {
        let mut items = Vec::new();
        loop {
            match self.peek() {
                None | Some(b'|') | Some(b')') => break,
                _ => {}
            }
            let start = self.pos;
            if self.try_quantifier()?.is_some() {
                return Err(self.syntax_at(start, "quantifier has nothing to repeat"));
            }
            let mut atom = self.atom()?;
            while let Some(q) = self.try_quantifier()? {
                atom = self.apply(atom, q)?;
            }
            items.push(atom);
        }
        Ok(RegexAst::concat(items))
    }

    /// Consumes a quantifier at the cursor, if there is one. A `{` that does
    /// not start a well-formed bound is left alone and later read as a literal.
    fn try_quantifier(&mut self) -> Result<Option<Quantifier>, RegexError> {
        let q = match self.peek() {
            Some(b'*') => Quantifier::Star,
            Some(b'+') => Quantifier::Plus,
            Some(b'?') => Quantifier::Optional,
            Some(b'{') => return self.try_bound(),
            _ => return Ok(None),
        };
        self.pos += 1;
        Ok(Some(q))
    }

    fn try_bound(&mut self) -> Result<Option<Quantifier>, RegexError> {
        let start = self.pos;
        let rest = &self.src[self.pos + 1..];
        let close = match rest.iter().position(|&b| b == b'}') {
            Some(i) => i,
            None => return Ok(None),
        };
        let body = &rest[..close];
        let (lo, hi) = match body.iter().position(|&b| b == b',') {
            Some(comma) => (&body[..comma], Some(&body[comma + 1..])),
            None => (body, None),
        };
        let is_num = |s: &[u8]| !s.is_empty() && s.iter().all(u8::is_ascii_digit);
        if !is_num(lo) || hi.is_some_and(|h| !h.is_empty() && !is_num(h)) {
            return Ok(None);
        }
        let number = |s: &[u8]| -> Result<u32, RegexError> {
            std::str::from_utf8(s)
                .ok()
                .and_then(|t| t.parse::<u32>().ok())
                .ok_or_else(|| self.syntax_at(start, "repetition count too large"))
        };
        let min = number(lo)?;
        let max = match hi {
            None => Some(min),
            Some([]) => None,
            Some(h) => Some(number(h)?),
        };
        if let Some(max) = max {
            if min > max {
                return Err(self.syntax_at(start, "repetition range has min > max"));
            }
        }
        self.pos += close + 2;
        Ok(Some(Quantifier::Bounded(min, max)))
    }

    fn apply(&self, atom: RegexAst, q: Quantifier) -> Result<RegexAst, RegexError> {
        Ok(match q {
            Quantifier::Star => RegexAst::star(atom),
            Quantifier::Plus => RegexAst::plus(atom),
            Quantifier::Optional => RegexAst::optional(atom),
            Quantifier::Bounded(min, max) => {
                let copies = match max {
                    Some(m) => u64::from(m),
                    None => u64::from(min) + 1,
                };
                let positions = atom.positions().saturating_mul(copies);
                if positions > self.limit {
                    return Err(RegexError::TooLarge {
                        positions,
                        limit: self.limit,
                    });
                }
                RegexAst::repeat(atom, min, max)
            }
        })
    }

    fn atom(&mut self) -> Result<RegexAst, RegexError> {
        let start = self.pos;
        let b = self.bump().expect("caller checked for end of input");
        match b {
            b'(' => self.group(start),
            b'[' => self.bracket(start),
            b'.' => Ok(RegexAst::any_byte()),
            b'\\' => self.escape(start, false).map(|e| match e {
                Escaped::Byte(b) => RegexAst::Literal(b),
                Escaped::Set(s) => RegexAst::class(s),
            }),
            b'^' | b'$' => Err(self.unsupported(start, "anchor")),
            b']' | b'}' | b'{' => Ok(RegexAst::Literal(b)),
            other => Ok(RegexAst::Literal(other)),
        }
    }

    fn group(&mut self, start: usize) -> Result<RegexAst, RegexError> {
        if self.peek() == Some(b'?') {
            if self.starts_with(b"?:") {
                self.pos += 2;
            } else if self.starts_with(b"?=") || self.starts_with(b"?!") {
                return Err(self.unsupported(start, "look-ahead"));
            } else if self.starts_with(b"?<=") || self.starts_with(b"?<!") {
                return Err(self.unsupported(start, "look-behind"));
            } else if self.starts_with(b"?P=") {
                return Err(self.unsupported(start, "back-reference"));
            } else if self.starts_with(b"?P<") || self.starts_with(b"?<") || self.starts_with(b"?'") {
                let close = if self.starts_with(b"?'") { b'\'' } else { b'>' };
                let skip = if self.starts_with(b"?P<") { 3 } else { 2 };
                self.pos += skip;
                while let Some(c) = self.bump() {
                    if c == close {
                        break;
                    }
                    if !(c.is_ascii_alphanumeric() || c == b'_') {
                        return Err(self.syntax_at(self.pos - 1, "bad group name"));
                    }
                }
            } else {
                return Err(self.unsupported(start, "inline flags or extended group"));
            }
        }
        let inner = self.alternation()?;
        match self.bump() {
            Some(b')') => Ok(inner),
            _ => Err(self.syntax_at(start, "unclosed group")),
        }
    }

    fn escape(&mut self, start: usize, in_class: bool) -> Result<Escaped, RegexError> {
        let b = self.bump().ok_or_else(|| self.syntax_at(start, "trailing backslash"))?;
        let byte = |b: u8| Ok(Escaped::Byte(b));
        match b {
            b'n' => byte(b'\n'),
            b't' => byte(b'\t'),
            b'r' => byte(b'\r'),
            b'f' => byte(0x0c),
            b'v' => byte(0x0b),
            b'a' => byte(0x07),
            b'e' => byte(0x1b),
            b'0' => byte(0),
            b'b' if in_class => byte(0x08),
            b'x' => self.hex_escape(start).map(Escaped::Byte),
            b'd' => Ok(Escaped::Set(digit())),
            b'D' => Ok(Escaped::Set(digit().complement())),
            b'w' => Ok(Escaped::Set(word())),
            b'W' => Ok(Escaped::Set(word().complement())),
            b's' => Ok(Escaped::Set(space())),
            b'S' => Ok(Escaped::Set(space().complement())),
            b'1'..=b'9' | b'k' | b'g' => Err(self.unsupported(start, "back-reference")),
            b'b' | b'B' | b'A' | b'z' | b'Z' | b'G' => Err(self.unsupported(start, "assertion")),
            b'p' | b'P' => Err(self.unsupported(start, "unicode property")),
            b'Q' | b'E' => Err(self.unsupported(start, "quoting")),
            c if c.is_ascii_alphanumeric() => Err(self.syntax_at(start, "unknown escape")),
            c => byte(c),
        }
    }

    fn hex_escape(&mut self, start: usize) -> Result<u8, RegexError> {
        let digits: &[u8] = if self.peek() == Some(b'{') {
            let rest = &self.src[self.pos + 1..];
            let close = rest
                .iter()
                .position(|&b| b == b'}')
                .ok_or_else(|| self.syntax_at(start, "unclosed \\x{...}"))?;
            let d = &rest[..close];
            self.pos += close + 2;
            d
        } else {
            let end = (self.pos + 2).min(self.src.len());
            let d = &self.src[self.pos..end];
            self.pos = end;
            if d.len() != 2 {
                return Err(self.syntax_at(start, "\\x needs two hex digits"));
            }
            d
        };
        std::str::from_utf8(digits)
            .ok()
            .filter(|s| !s.is_empty() && s.len() <= 2)
            .and_then(|s| u8::from_str_radix(s, 16).ok())
            .ok_or_else(|| self.syntax_at(start, "bad hex escape"))
    }

    fn bracket(&mut self, start: usize) -> Result<RegexAst, RegexError> {
        let negated = if self.peek() == Some(b'^') {
            self.pos += 1;
            true
        } else {
            false
        };
        let mut set = ByteSet::empty();
        let mut first = true;
        loop {
            let item_start = self.pos;
            let b = self
                .peek()
                .ok_or_else(|| self.syntax_at(start, "unclosed character class"))?;
            if b == b']' && !first {
                self.pos += 1;
                break;
            }
            first = false;
            let lo = match self.class_item()? {
                Escaped::Set(s) => {
                    set = set.union(&s);
                    continue;
                }
                Escaped::Byte(lo) => lo,
            };
            if self.peek() == Some(b'-') && self.peek_at(1).is_some_and(|c| c != b']') {
                self.pos += 1;
                let hi = match self.class_item()? {
                    Escaped::Byte(hi) => hi,
                    Escaped::Set(_) => return Err(self.syntax_at(item_start, "class escape used as range bound")),
                };
                if lo > hi {
                    return Err(self.syntax_at(item_start, "range out of order"));
                }
                set = set.union(&ByteSet::range(lo, hi));
            } else {
                set.insert(lo);
            }
        }
        if negated {
            set = set.complement();
        }
        Ok(RegexAst::class(set))
    }

    fn class_item(&mut self) -> Result<Escaped, RegexError> {
        let start = self.pos;
        if self.starts_with(b"[:") {
            let rest = &self.src[self.pos + 2..];
            if let Some(end) = rest.windows(2).position(|w| w == b":]") {
                let name = &rest[..end];
                let set = posix_class(name).ok_or_else(|| self.syntax_at(start, "unknown POSIX class"))?;
                self.pos += end + 4;
                return Ok(Escaped::Set(set));
            }
        }
        match self.bump() {
            Some(b'\\') => self.escape(start, true),
            Some(b) => Ok(Escaped::Byte(b)),
            None => Err(self.syntax_at(start, "unclosed character class")),
        }
    }
}

enum Escaped {
    Byte(u8),
    Set(ByteSet),
}

fn digit() -> ByteSet {
    ByteSet::range(b'0', b'9')
}

fn word() -> ByteSet {
    ByteSet::range(b'a', b'z')
        .union(&ByteSet::range(b'A', b'Z'))
        .union(&digit())
        .union(&ByteSet::singleton(b'_'))
}

fn space() -> ByteSet {
    ByteSet::from_bytes(b" \t\n\r\x0b\x0c")
}

fn posix_class(name: &[u8]) -> Option<ByteSet> {
    let upper = ByteSet::range(b'A', b'Z');
    let lower = ByteSet::range(b'a', b'z');
    let alpha = upper.union(&lower);
    Some(match name {
        b"alpha" => alpha,
        b"digit" => digit(),
        b"alnum" => alpha.union(&digit()),
        b"upper" => upper,
        b"lower" => lower,
        b"space" => space(),
        b"blank" => ByteSet::from_bytes(b" \t"),
        b"punct" => ByteSet::range(0x21, 0x7e).intersection(&alpha.union(&digit()).complement()),
        b"xdigit" => digit()
            .union(&ByteSet::range(b'a', b'f'))
            .union(&ByteSet::range(b'A', b'F')),
        b"word" => word(),
        b"cntrl" => ByteSet::range(0, 0x1f).union(&ByteSet::singleton(0x7f)),
        b"print" => ByteSet::range(0x20, 0x7e),
        b"graph" => ByteSet::range(0x21, 0x7e),
        _ => return None,
    })
}
