//! The line-oriented vote-stream text format.
//!
//! ```text
//! # comments start with '#'
//! approval 5
//! 0 2
//!
//! 4 1 3
//! ```
//!
//! The first non-comment line is `<ballot> <m>` with ballot `approval` or
//! `borda`. Every following non-comment line is one vote: space-separated
//! approved candidates (possibly none), or a most-preferred-first permutation
//! of `0..m` for `borda`.

use std::io::{self, BufRead, Write};

use crate::election::{BallotType, Vote};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StreamHeader {
    pub m: usize,
    pub ballot: BallotType,
}

pub fn parse_stream_header(line: &str) -> Result<StreamHeader> {
    let mut fields = line.split_whitespace();
    let ballot = match fields.next() {
        Some("approval") => BallotType::Approval,
        Some("borda") => BallotType::Borda,
        Some(other) => {
            return Err(Error::parse(
                1,
                format!("unknown ballot type {other:?}, expected approval or borda"),
            ))
        }
        None => return Err(Error::parse(1, "missing header")),
    };
    let m = fields
        .next()
        .ok_or_else(|| Error::parse(1, "header is missing the candidate count"))?;
    let m: usize = m
        .parse()
        .map_err(|_| Error::parse(1, format!("invalid candidate count {m:?}")))?;
    if m == 0 {
        return Err(Error::parse(1, "candidate count must be at least 1"));
    }
    if let Some(extra) = fields.next() {
        return Err(Error::parse(1, format!("unexpected trailing field {extra:?}")));
    }
    Ok(StreamHeader { m, ballot })
}

pub fn parse_vote(line: &str, m: usize, ballot: BallotType) -> Result<Vote> {
    let indices = line
        .split_whitespace()
        .map(|tok| {
            tok.parse::<usize>()
                .map_err(|_| Error::parse(1, format!("invalid candidate index {tok:?}")))
        })
        .collect::<Result<Vec<_>>>()?;
    let vote = match ballot {
        BallotType::Approval => Vote::approval(indices, m),
        BallotType::Borda => Vote::ranking(indices, m),
    };
    vote.map_err(|e| match e {
        Error::InvalidVote(msg) => Error::parse(1, msg),
        other => other,
    })
}

pub fn format_header(header: StreamHeader) -> String {
    format!("{} {}", header.ballot, header.m)
}

pub fn format_vote(vote: &Vote) -> String {
    let cells = match vote {
        Vote::Approval(s) => s.members(),
        Vote::Ranking(r) => r.order(),
    };
    let mut out = String::with_capacity(cells.len() * 3);
    for (i, c) in cells.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        out.push_str(&c.to_string());
    }
    out
}

/// Writes a header followed by one line per vote.
pub fn write_stream<W, I>(mut out: W, header: StreamHeader, votes: I) -> io::Result<()>
where
    W: Write,
    I: IntoIterator<Item = Vote>,
{
    writeln!(out, "{}", format_header(header))?;
    for v in votes {
        writeln!(out, "{}", format_vote(&v))?;
    }
    out.flush()
}

/// Streaming reader: parses the header eagerly, then yields votes one line at
/// a time without buffering the stream.
pub struct VoteReader<R> {
    lines: io::Lines<R>,
    header: StreamHeader,
    line_no: usize,
}

impl<R: BufRead> VoteReader<R> {
    pub fn new(reader: R) -> Result<Self> {
        let mut lines = reader.lines();
        let mut line_no = 0;
        loop {
            line_no += 1;
            let line = match lines.next() {
                Some(line) => line?,
                None => return Err(Error::parse(line_no, "missing header")),
            };
            if is_comment(&line) {
                continue;
            }
            let header = parse_stream_header(&line).map_err(|e| e.at_line(line_no))?;
            return Ok(VoteReader {
                lines,
                header,
                line_no,
            });
        }
    }

    pub fn header(&self) -> StreamHeader {
        self.header
    }
}

impl<R: BufRead> Iterator for VoteReader<R> {
    type Item = Result<Vote>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            let line = match self.lines.next()? {
                Ok(line) => line,
                Err(e) => return Some(Err(e.into())),
            };
            self.line_no += 1;
            if is_comment(&line) {
                continue;
            }
            let StreamHeader { m, ballot } = self.header;
            return Some(parse_vote(&line, m, ballot).map_err(|e| e.at_line(self.line_no)));
        }
    }
}

fn is_comment(line: &str) -> bool {
    line.trim_start().starts_with('#')
}
