//! ProGen/max `.sch` files (the RCPSP/max sets of PSPLib).
//!
//! Layout, one record per non-blank line:
//!
//! ```text
//! N K_r K_n K_d
//! id mode #succ succ_1 .. succ_s [w_1] .. [w_s]     (N+2 lines)
//! id mode duration r_1 .. r_Kr                       (N+2 lines)
//! C_1 .. C_Kr
//! ```
//!
//! An arc `i -> j` with weight `w >= 0` is the minimum lag st(j) - st(i) >= w.
//! A negative weight encodes a maximum lag: st(i) - st(j) <= -w.
//! Durations arrive as nominal means with sigma 0.

use crate::error::{ParseError, ParseErrorKind};
use crate::model::{Activity, Instance, LagKind, TemporalConstraint};

const LAYOUT: &str =
    "expected `N K_r K_n K_d`, N+2 precedence lines, N+2 requirement lines, one capacity line";

struct Line<'a> {
    number: usize,
    tokens: Vec<&'a str>,
}

impl<'a> Line<'a> {
    fn int(&self, field: usize) -> Result<i64, ParseError> {
        let raw = self.tokens.get(field).ok_or_else(|| {
            ParseError::new(
                ParseErrorKind::Syntax,
                self.number,
                field + 1,
                format!("missing field; {LAYOUT}"),
            )
        })?;
        let trimmed = raw.trim_matches(|c| c == '[' || c == ']');
        trimmed.parse::<i64>().map_err(|_| {
            ParseError::new(
                ParseErrorKind::NonNumericToken,
                self.number,
                field + 1,
                format!("non-numeric token `{raw}`"),
            )
        })
    }
}

fn tokenize(text: &str) -> Vec<Line<'_>> {
    text.lines()
        .enumerate()
        .map(|(i, l)| Line {
            number: i + 1,
            // Bracketed multi-token weights like `[ 3 ]` collapse to their value.
            tokens: l
                .split(|c: char| c.is_whitespace())
                .filter(|t| !t.is_empty() && *t != "[" && *t != "]")
                .collect(),
        })
        .filter(|l| !l.tokens.is_empty())
        .collect()
}

pub fn parse_progen_max(text: &str) -> Result<Instance, ParseError> {
    let lines = tokenize(text);
    let header = lines.first().ok_or_else(|| {
        ParseError::new(ParseErrorKind::MalformedHeader, 1, 1, format!("empty file; {LAYOUT}"))
    })?;
    if header.tokens.len() != 4 {
        return Err(ParseError::new(
            ParseErrorKind::MalformedHeader,
            header.number,
            header.tokens.len().min(4) + 1,
            format!("header has {} fields; {LAYOUT}", header.tokens.len()),
        ));
    }
    let header_field = |i: usize| {
        header.int(i).map_err(|e| ParseError {
            kind: ParseErrorKind::MalformedHeader,
            ..e
        })
    };
    let n = header_field(0)?;
    let k_r = header_field(1)?;
    let k_n = header_field(2)?;
    let k_d = header_field(3)?;
    if n < 0 || k_r < 0 {
        return Err(ParseError::new(
            ParseErrorKind::MalformedHeader,
            header.number,
            1,
            "negative activity or resource count",
        ));
    }
    if k_n != 0 || k_d != 0 {
        return Err(ParseError::new(
            ParseErrorKind::Unsupported,
            header.number,
            3,
            "non-renewable and doubly-constrained resources are not supported",
        ));
    }
    let n = n as usize;
    let k = k_r as usize;
    let total = n + 2;

    let expected_lines = 1 + 2 * total + 1;
    if lines.len() != expected_lines {
        let last = lines.last().map_or(1, |l| l.number);
        return Err(ParseError::new(
            ParseErrorKind::ActivityCountMismatch,
            last,
            1,
            format!(
                "activity count mismatch: header declares N={n} so {expected_lines} records are \
                 expected, found {}; {LAYOUT}",
                lines.len()
            ),
        ));
    }

    let check_id = |line: &Line, expected: usize| -> Result<(), ParseError> {
        let id = line.int(0)?;
        if id != expected as i64 {
            return Err(ParseError::new(
                ParseErrorKind::ActivityCountMismatch,
                line.number,
                1,
                format!("activity count mismatch: expected activity {expected}, found {id}"),
            ));
        }
        let mode = line.int(1)?;
        if mode != 1 {
            return Err(ParseError::new(
                ParseErrorKind::Unsupported,
                line.number,
                2,
                format!("multi-mode activities are not supported (mode {mode})"),
            ));
        }
        Ok(())
    };

    let mut constraints = Vec::new();
    for (idx, line) in lines[1..=total].iter().enumerate() {
        check_id(line, idx)?;
        let succ_count = line.int(2)?;
        if succ_count < 0 {
            return Err(ParseError::new(ParseErrorKind::Syntax, line.number, 3, "negative successor count"));
        }
        let s = succ_count as usize;
        if line.tokens.len() != 3 + 2 * s {
            return Err(ParseError::new(
                ParseErrorKind::Syntax,
                line.number,
                line.tokens.len().min(3 + 2 * s) + 1,
                format!("expected {s} successors and {s} weights; {LAYOUT}"),
            ));
        }
        for j in 0..s {
            let succ = line.int(3 + j)?;
            if succ < 0 || succ as usize >= total {
                return Err(ParseError::new(
                    ParseErrorKind::Syntax,
                    line.number,
                    4 + j,
                    format!("successor {succ} out of range 0..{}", total - 1),
                ));
            }
            let w = line.int(3 + s + j)? as f64;
            let succ = succ as usize;
            if w >= 0.0 {
                constraints.push(TemporalConstraint::min(idx, succ, w));
            } else {
                constraints.push(TemporalConstraint::max(succ, idx, -w));
            }
        }
    }

    let mut activities = Vec::with_capacity(total);
    for (idx, line) in lines[total + 1..=2 * total].iter().enumerate() {
        check_id(line, idx)?;
        if line.tokens.len() != 3 + k {
            return Err(ParseError::new(
                ParseErrorKind::Syntax,
                line.number,
                line.tokens.len().min(3 + k) + 1,
                format!("expected duration and {k} demands; {LAYOUT}"),
            ));
        }
        let duration = line.int(2)?;
        let mut demands = Vec::with_capacity(k);
        for r in 0..k {
            let d = line.int(3 + r)?;
            if d < 0 {
                return Err(ParseError::new(ParseErrorKind::Syntax, line.number, 4 + r, "negative demand"));
            }
            demands.push(d as u32);
        }
        activities.push(Activity {
            id: idx,
            mean_duration: duration as f64,
            sigma: 0.0,
            demands,
        });
    }

    let cap_line = &lines[2 * total + 1];
    if cap_line.tokens.len() != k {
        return Err(ParseError::new(
            ParseErrorKind::Syntax,
            cap_line.number,
            cap_line.tokens.len().min(k) + 1,
            format!("expected {k} capacities; {LAYOUT}"),
        ));
    }
    let capacities = (0..k)
        .map(|r| cap_line.int(r).map(|c| c.max(0) as u32))
        .collect::<Result<Vec<_>, _>>()?;

    Ok(Instance {
        activities,
        capacities,
        constraints,
    })
}

/// Writes a `.sch` document. End-to-start anchors are folded into
/// start-to-start weights at nominal durations; fractional lags and durations
/// are rounded, since the format is integral.
pub fn write_progen_max(instance: &Instance) -> String {
    let n = instance.len();
    let k = instance.resource_count();
    let mut arcs: Vec<Vec<(usize, i64)>> = vec![Vec::new(); n];
    for c in &instance.constraints {
        match c.kind {
            LagKind::Min => {
                let w = c.effective_lag(instance.activities[c.from].mean_duration);
                arcs[c.from].push((c.to, w.round() as i64));
            }
            LagKind::Max => arcs[c.to].push((c.from, -(c.lag.round() as i64))),
        }
    }

    let mut out = format!("{}\t{}\t0\t0\n", instance.real_count(), k);
    for (i, succ) in arcs.iter().enumerate() {
        out.push_str(&format!("{i}\t1\t{}", succ.len()));
        for (j, _) in succ {
            out.push_str(&format!("\t{j}"));
        }
        for (_, w) in succ {
            out.push_str(&format!("\t[{w}]"));
        }
        out.push('\n');
    }
    for a in &instance.activities {
        out.push_str(&format!("{}\t1\t{}", a.id, a.mean_duration.round() as i64));
        for d in &a.demands {
            out.push_str(&format!("\t{d}"));
        }
        out.push('\n');
    }
    let caps: Vec<String> = instance.capacities.iter().map(ToString::to_string).collect();
    out.push_str(&caps.join("\t"));
    out.push('\n');
    out
}
