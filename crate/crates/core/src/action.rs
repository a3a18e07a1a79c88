//! The agent's action vocabulary and its canonical textual grammar.
//!
//! The grammar is the stable interchange format for actions: it appears in
//! model responses, transcripts, and synthesized history lines. Keywords are
//! rendered uppercase; parsing accepts any keyword case and tolerates
//! whitespace between tokens. Quotes inside `INPUT`/`ANSWER` text are escaped
//! by doubling.
//!
//! ```text
//! CLICK(x,y)
//! LONG_PRESS(x,y)
//! INPUT("text")
//! SCROLL((x1,y1)->(x2,y2)->...)
//! DRAG((x1,y1)->(x2,y2)->...)
//! WAIT(ms)
//! ANSWER("text")
//! FINISH
//! ```

use std::fmt;

use thiserror::Error;

use crate::geometry::Point;

/// One move by the agent, in absolute screen pixels.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Action {
    Click { point: Point },
    LongPress { point: Point },
    Input { text: String },
    Scroll { path: Vec<Point> },
    Drag { path: Vec<Point> },
    Wait { duration_ms: u64 },
    Answer { text: String },
    TaskFinish,
}

/// Variant tag of an [`Action`], shared with ground-truth records.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ActionKind {
    Click,
    LongPress,
    Input,
    Scroll,
    Drag,
    Wait,
    Answer,
    TaskFinish,
}

impl fmt::Display for ActionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ActionKind::Click => "click",
            ActionKind::LongPress => "long-press",
            ActionKind::Input => "input",
            ActionKind::Scroll => "scroll",
            ActionKind::Drag => "drag",
            ActionKind::Wait => "wait",
            ActionKind::Answer => "answer",
            ActionKind::TaskFinish => "task-finish",
        };
        f.write_str(s)
    }
}

impl Action {
    pub fn kind(&self) -> ActionKind {
        match self {
            Action::Click { .. } => ActionKind::Click,
            Action::LongPress { .. } => ActionKind::LongPress,
            Action::Input { .. } => ActionKind::Input,
            Action::Scroll { .. } => ActionKind::Scroll,
            Action::Drag { .. } => ActionKind::Drag,
            Action::Wait { .. } => ActionKind::Wait,
            Action::Answer { .. } => ActionKind::Answer,
            Action::TaskFinish => ActionKind::TaskFinish,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("malformed action at byte {position}: {reason}")]
pub struct MalformedAction {
    pub position: usize,
    pub reason: String,
}

impl MalformedAction {
    fn new(position: usize, reason: impl Into<String>) -> Self {
        MalformedAction {
            position,
            reason: reason.into(),
        }
    }
}

/// Renders an action in canonical form. Total on valid actions; the inverse
/// of [`parse_action`].
pub fn render_action(a: &Action) -> String {
    fn quoted(text: &str) -> String {
        format!("\"{}\"", text.replace('"', "\"\""))
    }
    fn path(points: &[Point]) -> String {
        points
            .iter()
            .map(|p| format!("({},{})", p.x, p.y))
            .collect::<Vec<_>>()
            .join("->")
    }
    match a {
        Action::Click { point } => format!("CLICK({},{})", point.x, point.y),
        Action::LongPress { point } => format!("LONG_PRESS({},{})", point.x, point.y),
        Action::Input { text } => format!("INPUT({})", quoted(text)),
        Action::Scroll { path: p } => format!("SCROLL({})", path(p)),
        Action::Drag { path: p } => format!("DRAG({})", path(p)),
        Action::Wait { duration_ms } => format!("WAIT({})", duration_ms),
        Action::Answer { text } => format!("ANSWER({})", quoted(text)),
        Action::TaskFinish => "FINISH".to_string(),
    }
}

/// Parses the canonical grammar, case-insensitively on keywords and
/// tolerating whitespace between tokens. Exact inverse of [`render_action`]
/// on its range; rejects everything the renderer could not have produced.
pub fn parse_action(s: &str) -> Result<Action, MalformedAction> {
    let mut cur = Cursor::new(s);
    cur.skip_ws();
    let kw_pos = cur.pos;
    let keyword = cur.ident()?;
    let action = match keyword.to_ascii_uppercase().as_str() {
        "CLICK" => {
            let (x, y) = cur.point_args()?;
            Action::Click {
                point: Point::new(x, y),
            }
        }
        "LONG_PRESS" => {
            let (x, y) = cur.point_args()?;
            Action::LongPress {
                point: Point::new(x, y),
            }
        }
        "INPUT" => Action::Input {
            text: cur.string_arg()?,
        },
        "ANSWER" => {
            let pos = cur.pos;
            let text = cur.string_arg()?;
            if text.is_empty() {
                return Err(MalformedAction::new(pos, "answer text must be nonempty"));
            }
            Action::Answer { text }
        }
        "SCROLL" => Action::Scroll {
            path: cur.path_arg()?,
        },
        "DRAG" => Action::Drag {
            path: cur.path_arg()?,
        },
        "WAIT" => {
            cur.expect('(')?;
            let pos = cur.pos;
            let ms: u64 = cur.number()?;
            if ms == 0 {
                return Err(MalformedAction::new(pos, "wait duration must be positive"));
            }
            cur.expect(')')?;
            Action::Wait { duration_ms: ms }
        }
        "FINISH" => Action::TaskFinish,
        other => {
            return Err(MalformedAction::new(
                kw_pos,
                format!("unknown keyword `{other}`"),
            ))
        }
    };
    cur.skip_ws();
    if !cur.at_end() {
        return Err(MalformedAction::new(cur.pos, "unexpected trailing input"));
    }
    Ok(action)
}

struct Cursor<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn new(src: &'a str) -> Self {
        Cursor { src, pos: 0 }
    }

    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn at_end(&self) -> bool {
        self.pos >= self.src.len()
    }

    fn skip_ws(&mut self) {
        let trimmed = self.rest().trim_start();
        self.pos = self.src.len() - trimmed.len();
    }

    fn peek(&self) -> Option<char> {
        self.rest().chars().next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        Some(c)
    }

    fn expect(&mut self, want: char) -> Result<(), MalformedAction> {
        self.skip_ws();
        match self.peek() {
            Some(c) if c == want => {
                self.bump();
                Ok(())
            }
            Some(c) => Err(MalformedAction::new(
                self.pos,
                format!("expected `{want}`, found `{c}`"),
            )),
            None => Err(MalformedAction::new(
                self.pos,
                format!("expected `{want}`, found end of input"),
            )),
        }
    }

    fn ident(&mut self) -> Result<&'a str, MalformedAction> {
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_alphabetic() || c == '_') {
            self.bump();
        }
        if self.pos == start {
            return Err(MalformedAction::new(start, "expected an action keyword"));
        }
        Ok(&self.src[start..self.pos])
    }

    fn number<T: std::str::FromStr>(&mut self) -> Result<T, MalformedAction> {
        self.skip_ws();
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            self.bump();
        }
        if self.pos == start {
            return Err(MalformedAction::new(start, "expected a number"));
        }
        self.src[start..self.pos]
            .parse()
            .map_err(|_| MalformedAction::new(start, "number out of range"))
    }

    /// `(x,y)` with the parentheses.
    fn point(&mut self) -> Result<(u32, u32), MalformedAction> {
        self.expect('(')?;
        let x = self.number()?;
        self.expect(',')?;
        let y = self.number()?;
        self.expect(')')?;
        Ok((x, y))
    }

    /// `(x,y)` as the whole argument list: `(x,y)` after the keyword.
    fn point_args(&mut self) -> Result<(u32, u32), MalformedAction> {
        self.point()
    }

    /// `("text")` with quote-doubling inside the string.
    fn string_arg(&mut self) -> Result<String, MalformedAction> {
        self.expect('(')?;
        self.skip_ws();
        let quote_pos = self.pos;
        match self.peek() {
            Some('"') => {
                self.bump();
            }
            _ => {
                return Err(MalformedAction::new(
                    self.pos,
                    "expected an opening `\"`",
                ))
            }
        }
        let mut text = String::new();
        loop {
            match self.bump() {
                Some('"') => {
                    if self.peek() == Some('"') {
                        self.bump();
                        text.push('"');
                    } else {
                        break;
                    }
                }
                Some(c) => text.push(c),
                None => {
                    return Err(MalformedAction::new(quote_pos, "unterminated string"));
                }
            }
        }
        self.expect(')')?;
        Ok(text)
    }

    /// `((x1,y1)->(x2,y2)->...)` with at least two points.
    fn path_arg(&mut self) -> Result<Vec<Point>, MalformedAction> {
        let open_pos = {
            self.skip_ws();
            self.pos
        };
        self.expect('(')?;
        let mut points = Vec::new();
        let (x, y) = self.point()?;
        points.push(Point::new(x, y));
        loop {
            self.skip_ws();
            if self.peek() == Some('-') {
                self.bump();
                self.expect('>')?;
                let (x, y) = self.point()?;
                points.push(Point::new(x, y));
            } else {
                break;
            }
        }
        self.expect(')')?;
        if points.len() < 2 {
            return Err(MalformedAction::new(
                open_pos,
                "path needs at least 2 points",
            ));
        }
        Ok(points)
    }
}
