//! The line-based market file format.
//!
//! ```text
//! # comment
//! firms: f1 f2
//! workers: w1 w2 w3 w4
//! quota: f1=2 f2=2
//! firm f1: w1 w2 w3 w4
//! worker w1: f2 f1
//! ```

use std::collections::HashMap;

use crate::model::{Firm, Market, ModelError, PrunedPair, Worker};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: duplicate agent id `{id}`")]
    DuplicateAgent { line: usize, id: String },
    #[error("line {line}: unknown agent `{id}`")]
    UnknownAgent { line: usize, id: String },
    #[error("line {line}: quota of `{firm}` must be a positive integer")]
    BadQuota { line: usize, firm: String },
    #[error("line {line}: `{id}` lists `{entry}` twice")]
    DuplicateEntry {
        line: usize,
        id: String,
        entry: String,
    },
    #[error("no quota given for firm `{0}`")]
    MissingQuota(String),
    #[error("missing `{0}:` declaration")]
    MissingDeclaration(&'static str),
    #[error(transparent)]
    Model(#[from] ModelError),
}

fn syntax(line: usize, message: impl Into<String>) -> ParseError {
    ParseError::Syntax {
        line,
        message: message.into(),
    }
}

pub fn parse_market(text: &str) -> Result<Market, ParseError> {
    parse_market_with_warnings(text).map(|(m, _)| m)
}

/// Like [`parse_market`], also returning the one-sided entries that were
/// dropped.
pub fn parse_market_with_warnings(text: &str) -> Result<(Market, Vec<PrunedPair>), ParseError> {
    let mut firms: Option<Vec<String>> = None;
    let mut workers: Option<Vec<String>> = None;
    let mut firm_index: HashMap<String, usize> = HashMap::new();
    let mut worker_index: HashMap<String, usize> = HashMap::new();
    let mut quota: HashMap<usize, usize> = HashMap::new();
    let mut firm_pref: HashMap<usize, Vec<Worker>> = HashMap::new();
    let mut worker_pref: HashMap<usize, Vec<Firm>> = HashMap::new();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (head, body) = line
            .split_once(':')
            .ok_or_else(|| syntax(line_no, "expected `<keyword>: ...`"))?;
        let head: Vec<&str> = head.split_whitespace().collect();
        let tokens: Vec<&str> = body.split_whitespace().collect();
        match head.as_slice() {
            ["firms"] | ["workers"] => {
                let is_firms = head[0] == "firms";
                let slot = if is_firms { &mut firms } else { &mut workers };
                if slot.is_some() {
                    return Err(syntax(line_no, format!("`{}` declared twice", head[0])));
                }
                let mut names = Vec::new();
                for t in tokens {
                    if t.contains('=') {
                        return Err(syntax(line_no, format!("invalid agent id `{t}`")));
                    }
                    let taken = firm_index.contains_key(t) || worker_index.contains_key(t);
                    if taken {
                        return Err(ParseError::DuplicateAgent {
                            line: line_no,
                            id: t.to_string(),
                        });
                    }
                    let index = if is_firms {
                        &mut firm_index
                    } else {
                        &mut worker_index
                    };
                    index.insert(t.to_string(), names.len());
                    names.push(t.to_string());
                }
                *slot = Some(names);
            }
            ["quota"] => {
                if firms.is_none() {
                    return Err(syntax(line_no, "`quota` before `firms`"));
                }
                for t in tokens {
                    let (name, value) = t
                        .split_once('=')
                        .ok_or_else(|| syntax(line_no, format!("expected `firm=q`, got `{t}`")))?;
                    let f = *firm_index
                        .get(name)
                        .ok_or_else(|| ParseError::UnknownAgent {
                            line: line_no,
                            id: name.to_string(),
                        })?;
                    let q: usize = match value.parse() {
                        Ok(q) if q >= 1 => q,
                        _ => {
                            return Err(ParseError::BadQuota {
                                line: line_no,
                                firm: name.to_string(),
                            })
                        }
                    };
                    if quota.insert(f, q).is_some() {
                        return Err(syntax(line_no, format!("quota of `{name}` given twice")));
                    }
                }
            }
            ["firm", name] => {
                if workers.is_none() || firms.is_none() {
                    return Err(syntax(line_no, "preference list before declarations"));
                }
                let f = *firm_index
                    .get(*name)
                    .ok_or_else(|| ParseError::UnknownAgent {
                        line: line_no,
                        id: name.to_string(),
                    })?;
                let list = resolve_list(line_no, name, &tokens, &worker_index)?;
                if firm_pref
                    .insert(f, list.into_iter().map(Worker).collect())
                    .is_some()
                {
                    return Err(syntax(line_no, format!("second list for `{name}`")));
                }
            }
            ["worker", name] => {
                if workers.is_none() || firms.is_none() {
                    return Err(syntax(line_no, "preference list before declarations"));
                }
                let w = *worker_index
                    .get(*name)
                    .ok_or_else(|| ParseError::UnknownAgent {
                        line: line_no,
                        id: name.to_string(),
                    })?;
                let list = resolve_list(line_no, name, &tokens, &firm_index)?;
                if worker_pref
                    .insert(w, list.into_iter().map(Firm).collect())
                    .is_some()
                {
                    return Err(syntax(line_no, format!("second list for `{name}`")));
                }
            }
            _ => {
                return Err(syntax(
                    line_no,
                    format!("unknown line kind `{}`", head.join(" ")),
                ))
            }
        }
    }

    let firms = firms.ok_or(ParseError::MissingDeclaration("firms"))?;
    let workers = workers.ok_or(ParseError::MissingDeclaration("workers"))?;
    let quotas = (0..firms.len())
        .map(|f| {
            quota
                .get(&f)
                .copied()
                .ok_or_else(|| ParseError::MissingQuota(firms[f].clone()))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let firm_pref = (0..firms.len())
        .map(|f| firm_pref.remove(&f).unwrap_or_default())
        .collect();
    let worker_pref = (0..workers.len())
        .map(|w| worker_pref.remove(&w).unwrap_or_default())
        .collect();
    Ok(Market::new(firms, workers, quotas, firm_pref, worker_pref)?)
}

fn resolve_list(
    line: usize,
    owner: &str,
    tokens: &[&str],
    index: &HashMap<String, usize>,
) -> Result<Vec<usize>, ParseError> {
    let mut out: Vec<usize> = Vec::with_capacity(tokens.len());
    for t in tokens {
        let i = *index.get(*t).ok_or_else(|| ParseError::UnknownAgent {
            line,
            id: t.to_string(),
        })?;
        if out.contains(&i) {
            return Err(ParseError::DuplicateEntry {
                line,
                id: owner.to_string(),
                entry: t.to_string(),
            });
        }
        out.push(i);
    }
    Ok(out)
}

/// Writes a market back in the file format. Lists are the pruned ones.
pub fn serialize_market(m: &Market) -> String {
    let mut out = String::new();
    out.push_str(&format!("firms: {}\n", m.firm_names().join(" ")));
    out.push_str(&format!("workers: {}\n", m.worker_names().join(" ")));
    let quotas: Vec<String> = m
        .firms()
        .map(|f| format!("{}={}", m.firm_name(f), m.quota(f)))
        .collect();
    out.push_str(&format!("quota: {}\n", quotas.join(" ")));
    for f in m.firms() {
        let list: Vec<&str> = m.firm_pref(f).iter().map(|w| m.worker_name(*w)).collect();
        out.push_str(
            &format!("firm {}: {}\n", m.firm_name(f), list.join(" ")).replace(": \n", ":\n"),
        );
    }
    for w in m.workers() {
        let list: Vec<&str> = m.worker_pref(w).iter().map(|f| m.firm_name(*f)).collect();
        out.push_str(
            &format!("worker {}: {}\n", m.worker_name(w), list.join(" ")).replace(": \n", ":\n"),
        );
    }
    out
}
