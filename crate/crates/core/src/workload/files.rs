//! Plain comma-separated catalog and trace files, each with a header line.
//!
//! * catalog: `object_id,class,size_chunks`
//! * trace: `receiver_id,seq_no,object_id`

use std::fmt::Write;

use super::{Catalog, CatalogObject, Trace};
use crate::chunk::ObjectId;
use crate::error::{Error, Result};

pub const CATALOG_HEADER: &str = "object_id,class,size_chunks";
pub const TRACE_HEADER: &str = "receiver_id,seq_no,object_id";

fn fields(line: &str, n: usize, line_no: usize) -> Result<Vec<&str>> {
    let f: Vec<&str> = line.split(',').map(str::trim).collect();
    if f.len() != n {
        return Err(Error::parse(line_no, format!("expected {n} fields, got {}", f.len())));
    }
    Ok(f)
}

fn data_lines<'a>(text: &'a str, header: &str) -> Result<impl Iterator<Item = (usize, &'a str)>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == header => {}
        _ => return Err(Error::parse(1, format!("expected header `{header}`"))),
    }
    Ok(lines
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty()))
}

impl Catalog {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(CATALOG_HEADER);
        out.push('\n');
        for o in self.objects() {
            let _ = writeln!(out, "{},{},{}", o.id, o.class, o.size_chunks);
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Catalog> {
        let mut objects = Vec::new();
        for (line_no, line) in data_lines(text, CATALOG_HEADER)? {
            let f = fields(line, 3, line_no)?;
            objects.push(CatalogObject {
                id: ObjectId::new(f[0]).map_err(|e| Error::parse(line_no, e.to_string()))?,
                class: f[1].parse().map_err(|e: Error| Error::parse(line_no, e.to_string()))?,
                size_chunks: f[2]
                    .parse()
                    .map_err(|_| Error::parse(line_no, format!("bad size `{}`", f[2])))?,
            });
        }
        Catalog::from_objects(objects)
    }
}

impl Trace {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(TRACE_HEADER);
        out.push('\n');
        for (r, reqs) in self.receivers.iter().enumerate() {
            for (seq, o) in reqs.iter().enumerate() {
                let _ = writeln!(out, "{r},{seq},{o}");
            }
        }
        out
    }

    /// Records may come in any order; they are placed by `(receiver_id, seq_no)`.
    pub fn from_csv(text: &str) -> Result<Trace> {
        let mut records: Vec<(usize, usize, ObjectId)> = Vec::new();
        for (line_no, line) in data_lines(text, TRACE_HEADER)? {
            let f = fields(line, 3, line_no)?;
            let r: usize = f[0]
                .parse()
                .map_err(|_| Error::parse(line_no, format!("bad receiver id `{}`", f[0])))?;
            let s: usize = f[1]
                .parse()
                .map_err(|_| Error::parse(line_no, format!("bad sequence number `{}`", f[1])))?;
            let o = ObjectId::new(f[2]).map_err(|e| Error::parse(line_no, e.to_string()))?;
            records.push((r, s, o));
        }
        records.sort_by_key(|(r, s, _)| (*r, *s));
        let n = records.last().map_or(0, |(r, _, _)| r + 1);
        let mut receivers = vec![Vec::new(); n];
        for (r, s, o) in records {
            if s != receivers[r].len() {
                return Err(Error::validation(format!(
                    "receiver {r}: sequence numbers are not contiguous at {s}"
                )));
            }
            receivers[r].push(o);
        }
        Ok(Trace::new(receivers))
    }
}
