//! Grid text form for sets, intervals and interval collections.
//!
//! A set is drawn over the bounding box of its window and the origin, one
//! row per line:
//!
//! * `1` / `0`: window point inside / outside the set
//! * `O` / `o`: the origin, inside / outside the set
//! * `*`: the origin when it is not a window point
//! * `.`: not a window point
//!
//! ```text
//! 010
//! 1O1
//! 010
//! ```
//!
//! An interval is two such grids labelled `A:` and `B:`.

use std::fmt::Write as _;

use super::{Interval, IntervalCollection, LatticeError, PixelSet, Point, Window};

/// Rows of the grid for `set` drawn over `window`.
pub fn set_rows(set: &PixelSet, window: &Window) -> Vec<String> {
    let (mut x0, mut y0, mut x1, mut y1) = (0, 0, 0, 0);
    for p in window.points() {
        x0 = x0.min(p.x);
        y0 = y0.min(p.y);
        x1 = x1.max(p.x);
        y1 = y1.max(p.y);
    }
    (y0..=y1)
        .map(|y| {
            (x0..=x1)
                .map(|x| {
                    let p = Point::new(x, y);
                    let member = set.contains(p);
                    match (p == Point::ORIGIN, window.contains(p), member) {
                        (true, true, true) => 'O',
                        (true, true, false) => 'o',
                        (true, false, _) => '*',
                        (false, true, true) => '1',
                        (false, true, false) => '0',
                        (false, false, _) => '.',
                    }
                })
                .collect()
        })
        .collect()
}

pub fn format_set(set: &PixelSet, window: &Window) -> String {
    let mut s = set_rows(set, window).join("\n");
    s.push('\n');
    s
}

/// Parse grid rows back into `(window, set)`. `line_offset` is added to
/// reported line numbers.
pub fn parse_set_rows<S: AsRef<str>>(
    rows: &[S],
    line_offset: usize,
) -> Result<(Window, PixelSet), LatticeError> {
    let err = |line: usize, message: String| LatticeError::Parse {
        line: line + line_offset + 1,
        message,
    };
    if rows.is_empty() {
        return Err(err(0, "empty grid".into()));
    }
    let width = rows[0].as_ref().chars().count();
    let mut origin = None;
    for (r, row) in rows.iter().enumerate() {
        let row = row.as_ref();
        if row.chars().count() != width {
            return Err(err(r, format!("row has {} cells, expected {width}", row.chars().count())));
        }
        for (c, ch) in row.chars().enumerate() {
            if matches!(ch, 'O' | 'o' | '*') {
                if origin.is_some() {
                    return Err(err(r, "more than one origin marker".into()));
                }
                origin = Some((c as i32, r as i32));
            }
        }
    }
    let (ox, oy) = origin.ok_or_else(|| err(0, "missing origin marker (O, o or *)".into()))?;
    let mut support = PixelSet::new();
    let mut set = PixelSet::new();
    for (r, row) in rows.iter().enumerate() {
        for (c, ch) in row.as_ref().chars().enumerate() {
            let p = Point::new(c as i32 - ox, r as i32 - oy);
            match ch {
                '1' | 'O' => {
                    support.insert(p);
                    set.insert(p);
                }
                '0' | 'o' => {
                    support.insert(p);
                }
                '.' | '*' => {}
                other => return Err(err(r, format!("unexpected cell '{other}'"))),
            }
        }
    }
    Ok((Window::new(support), set))
}

pub fn parse_set(text: &str) -> Result<(Window, PixelSet), LatticeError> {
    let rows: Vec<&str> = text.lines().map(str::trim).filter(|l| !l.is_empty()).collect();
    parse_set_rows(&rows, 0)
}

pub fn format_interval(i: &Interval) -> String {
    format!(
        "A:\n{}B:\n{}",
        format_set(i.left(), i.window()),
        format_set(i.right(), i.window())
    )
}

pub fn parse_interval(text: &str) -> Result<Interval, LatticeError> {
    let lines: Vec<&str> = text.lines().map(str::trim).collect();
    let a_at = lines
        .iter()
        .position(|l| *l == "A:")
        .ok_or(LatticeError::Parse {
            line: 1,
            message: "missing 'A:' label".into(),
        })?;
    let b_at = lines
        .iter()
        .position(|l| *l == "B:")
        .filter(|&b| b > a_at)
        .ok_or(LatticeError::Parse {
            line: a_at + 1,
            message: "missing 'B:' label after 'A:'".into(),
        })?;
    let grid = |from: usize, to: usize| -> Vec<&str> {
        lines[from..to].iter().copied().filter(|l| !l.is_empty()).collect()
    };
    let (wa, a) = parse_set_rows(&grid(a_at + 1, b_at), a_at + 1)?;
    let (wb, b) = parse_set_rows(&grid(b_at + 1, lines.len()), b_at + 1)?;
    if wa != wb {
        return Err(LatticeError::Parse {
            line: b_at + 1,
            message: "A and B grids describe different windows".into(),
        });
    }
    Interval::new(a, b, wa)
}

/// Window grid followed by every interval of the collection.
pub fn format_collection(c: &IntervalCollection) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "window ({} points):", c.window().len());
    s.push_str(&format_set(&c.window().support(), c.window()));
    let _ = writeln!(s, "basis ({} intervals):", c.len());
    for (k, i) in c.intervals().enumerate() {
        let _ = writeln!(s, "# interval {}", k + 1);
        s.push_str(&format_interval(&i));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cross_grid() {
        let w = Window::square(3);
        let text = format_set(&PixelSet::cross(), &w);
        assert_eq!(text, "010\n1O1\n010\n");
        let (w2, s) = parse_set(&text).unwrap();
        assert_eq!(w2, w);
        assert_eq!(s, PixelSet::cross());
    }

    #[test]
    fn origin_outside_window() {
        let w = Window::new(PixelSet::singleton(Point::new(2, 0)));
        let s = PixelSet::singleton(Point::new(2, 0));
        assert_eq!(format_set(&s, &w), "*.1\n");
        assert_eq!(parse_set("*.1").unwrap(), (w, s));
    }

    #[test]
    fn interval_round_trip() {
        let w = Window::square(3);
        let i = Interval::new(PixelSet::origin(), PixelSet::cross(), w).unwrap();
        let text = format_interval(&i);
        assert_eq!(parse_interval(&text).unwrap(), i);
    }

    #[test]
    fn parse_errors_carry_lines() {
        assert!(matches!(parse_set("010\nxO1\n010"), Err(LatticeError::Parse { line: 2, .. })));
        assert!(matches!(parse_set("000\n000"), Err(LatticeError::Parse { .. })));
        let inverted = "A:\n1O\nB:\n0o\n";
        assert_eq!(parse_interval(inverted), Err(LatticeError::InvalidInterval));
    }
}
