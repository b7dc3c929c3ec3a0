//! Newick subset: positive integer leaf labels or empty leaf names, optional
//! `#k` rank labels on internal nodes, terminating `;`. Whitespace between
//! tokens is ignored. Edge lengths are not accepted.

use super::{Tree, TreeError};

/// Maximum nesting accepted by the parser.
const MAX_DEPTH: usize = 2_000;

pub fn to_newick(t: &Tree) -> String {
    let mut s = String::new();
    write(t, &mut s);
    s.push(';');
    s
}

fn write(t: &Tree, s: &mut String) {
    match t {
        Tree::Leaf(Some(l)) => s.push_str(&l.to_string()),
        Tree::Leaf(None) => {}
        Tree::Split { rank, children } => {
            s.push('(');
            write(&children.0, s);
            s.push(',');
            write(&children.1, s);
            s.push(')');
            if let Some(r) = rank {
                s.push('#');
                s.push_str(&r.to_string());
            }
        }
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn err<T>(&self, msg: impl Into<String>) -> Result<T, TreeError> {
        Err(TreeError::Newick { pos: self.pos, msg: msg.into() })
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn expect(&mut self, c: u8) -> Result<(), TreeError> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            self.err(format!("expected '{}'", c as char))
        }
    }

    fn number(&mut self) -> Result<Option<u32>, TreeError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Ok(None);
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii digits");
        match text.parse::<u32>() {
            Ok(0) => {
                self.pos = start;
                self.err("labels and ranks must be positive")
            }
            Ok(v) => Ok(Some(v)),
            Err(_) => {
                self.pos = start;
                self.err("integer out of range")
            }
        }
    }

    fn node(&mut self, depth: usize) -> Result<Tree, TreeError> {
        if depth > MAX_DEPTH {
            return self.err("nesting too deep");
        }
        if self.peek() == Some(b'(') {
            self.pos += 1;
            let a = self.node(depth + 1)?;
            self.expect(b',')?;
            let b = self.node(depth + 1)?;
            if self.peek() == Some(b',') {
                return self.err("only binary splits are supported");
            }
            self.expect(b')')?;
            let rank = if self.peek() == Some(b'#') {
                self.pos += 1;
                match self.number()? {
                    Some(r) => Some(r),
                    None => return self.err("expected a rank after '#'"),
                }
            } else {
                None
            };
            Ok(Tree::Split { rank, children: Box::new((a, b)) })
        } else {
            let label = self.number()?;
            match self.peek() {
                Some(b',') | Some(b')') | Some(b';') => Ok(Tree::Leaf(label)),
                Some(c) => self.err(format!("unexpected '{}'", c.escape_ascii())),
                None => self.err("unexpected end of input"),
            }
        }
    }
}

/// Parses a single tree. The result is not validated for flavour; call
/// [`Tree::kind`] to check labels and ranks.
pub fn from_newick(src: &str) -> Result<Tree, TreeError> {
    let mut p = Parser { src: src.as_bytes(), pos: 0 };
    let t = p.node(0)?;
    p.expect(b';')?;
    if p.peek().is_some() {
        return p.err("trailing input after ';'");
    }
    Ok(t)
}
