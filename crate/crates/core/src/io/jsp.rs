//! Job-shop instances and their embedding as unary-capacity RCPSP.
//!
//! Text layout: a header `n M`, then one line per job listing
//! `machine duration` pairs in processing order.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, ParseError, ParseErrorKind};
use crate::model::{Activity, Instance, TemporalConstraint};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Operation {
    pub machine: usize,
    pub duration: f64,
    #[serde(default)]
    pub sigma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JspInstance {
    pub jobs: Vec<Vec<Operation>>,
    pub machine_count: usize,
}

pub fn parse_jsp(text: &str) -> Result<JspInstance, ParseError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split_whitespace().collect::<Vec<_>>()))
        .filter(|(_, t)| !t.is_empty());

    let (hline, header) = lines.next().ok_or_else(|| {
        ParseError::new(ParseErrorKind::MalformedHeader, 1, 1, "empty file; expected header `n M`")
    })?;
    if header.len() != 2 {
        return Err(ParseError::new(
            ParseErrorKind::MalformedHeader,
            hline,
            1,
            "expected header `n M`",
        ));
    }
    let num = |line: usize, field: usize, tok: &str| -> Result<usize, ParseError> {
        tok.parse::<usize>().map_err(|_| {
            ParseError::new(
                ParseErrorKind::NonNumericToken,
                line,
                field + 1,
                format!("non-numeric token `{tok}`"),
            )
        })
    };
    let jobs_n = num(hline, 0, header[0])?;
    let machines = num(hline, 1, header[1])?;

    let mut jobs = Vec::with_capacity(jobs_n);
    for (line, tokens) in lines {
        if tokens.len() % 2 != 0 {
            return Err(ParseError::new(
                ParseErrorKind::Syntax,
                line,
                tokens.len(),
                "expected `machine duration` pairs",
            ));
        }
        let mut ops = Vec::with_capacity(tokens.len() / 2);
        for (p, pair) in tokens.chunks(2).enumerate() {
            let machine = num(line, 2 * p, pair[0])?;
            if machine >= machines {
                return Err(ParseError::new(
                    ParseErrorKind::Syntax,
                    line,
                    2 * p + 1,
                    format!("machine {machine} out of range 0..{machines}"),
                ));
            }
            let duration = pair[1].parse::<f64>().map_err(|_| {
                ParseError::new(
                    ParseErrorKind::NonNumericToken,
                    line,
                    2 * p + 2,
                    format!("non-numeric token `{}`", pair[1]),
                )
            })?;
            ops.push(Operation { machine, duration, sigma: 0.0 });
        }
        jobs.push(ops);
    }
    if jobs.len() != jobs_n {
        return Err(ParseError::new(
            ParseErrorKind::ActivityCountMismatch,
            hline,
            1,
            format!("header declares {jobs_n} jobs, found {}", jobs.len()),
        ));
    }
    Ok(JspInstance { jobs, machine_count: machines })
}

pub fn write_jsp(jsp: &JspInstance) -> String {
    let mut out = format!("{} {}\n", jsp.jobs.len(), jsp.machine_count);
    for job in &jsp.jobs {
        let parts: Vec<String> = job.iter().map(|o| format!("{} {}", o.machine, o.duration)).collect();
        out.push_str(&parts.join(" "));
        out.push('\n');
    }
    out
}

/// Random instance in the usual benchmark style: every job visits every
/// machine once in a random order, durations uniform on `1..=99`.
pub fn generate_jsp<R: Rng + ?Sized>(jobs: usize, machines: usize, rng: &mut R) -> JspInstance {
    use rand::seq::SliceRandom;
    let jobs = (0..jobs)
        .map(|_| {
            let mut order: Vec<usize> = (0..machines).collect();
            order.shuffle(rng);
            order
                .into_iter()
                .map(|machine| Operation {
                    machine,
                    duration: rng.random_range(1..=99) as f64,
                    sigma: 0.0,
                })
                .collect()
        })
        .collect();
    JspInstance { jobs, machine_count: machines }
}

/// One unary resource per machine; each operation becomes an activity
/// demanding one unit of its machine. Consecutive operations of a job are
/// linked end-to-start so decision rules add the predecessor's duration.
pub fn jsp_to_rcpsp(jsp: &JspInstance) -> Result<Instance, Error> {
    if let Some(j) = jsp.jobs.iter().position(Vec::is_empty) {
        return Err(Error::EmptyJob(j));
    }
    let m = jsp.machine_count;
    let total_ops: usize = jsp.jobs.iter().map(Vec::len).sum();
    let mut activities = Vec::with_capacity(total_ops + 2);
    activities.push(Activity::dummy(0, m));
    let mut constraints = Vec::new();
    for job in &jsp.jobs {
        let mut prev = None;
        for op in job {
            if op.machine >= m {
                return Err(Error::Invalid(format!("operation on machine {} but only {m} machines", op.machine)));
            }
            let id = activities.len();
            let mut demands = vec![0; m];
            demands[op.machine] = 1;
            activities.push(Activity {
                id,
                mean_duration: op.duration,
                sigma: op.sigma,
                demands,
            });
            if let Some(p) = prev {
                constraints.push(TemporalConstraint::end_to_start(p, id, 0.0));
            }
            prev = Some(id);
        }
    }
    let sink = activities.len();
    activities.push(Activity::dummy(sink, m));
    Ok(Instance {
        activities,
        capacities: vec![1; m],
        constraints,
    })
}
