//! JSON and CSV views of equilibria, verdicts, and sweeps.
//!
//! Everything is keyed by the game's ids rather than indices, and every
//! number is rounded to [`SIG_DIGITS`](crate::format::SIG_DIGITS)
//! significant digits so that equal inputs give byte-identical output.

use serde_json::{json, Map, Value};

use crate::chi::Chi;
use crate::error::{Error, Result};
use crate::format::round_sig;
use crate::game::{Assessment, BeliefSystem, ReceiverStrategy, SenderStrategy, SignalingGame};
use crate::refine::{CriterionReport, ResponseSet};
use crate::solver::{EquilibriumRecord, Verdict};

fn num(x: f64) -> Value {
    if x.is_finite() {
        json!(round_sig(x))
    } else {
        Value::Null
    }
}

fn by_id(ids: &[String], values: &[f64]) -> Value {
    Value::Object(ids.iter().zip(values).map(|(k, &v)| (k.clone(), num(v))).collect())
}

fn ids(ids: &[String], idx: &[usize]) -> Value {
    Value::Array(idx.iter().map(|&i| json!(ids[i])).collect())
}

fn sender_json(game: &SignalingGame, sender: &SenderStrategy) -> Value {
    Value::Object(
        game.types()
            .iter()
            .zip(sender.rows())
            .map(|(t, row)| (t.clone(), by_id(game.messages(), row)))
            .collect(),
    )
}

fn receiver_json(game: &SignalingGame, receiver: &ReceiverStrategy) -> Value {
    match receiver {
        ReceiverStrategy::Mixed(rows) => Value::Object(
            game.messages()
                .iter()
                .zip(rows)
                .map(|(m, row)| (m.clone(), by_id(game.actions(), row)))
                .collect(),
        ),
        ReceiverStrategy::Wages(w) => by_id(game.messages(), w),
    }
}

fn beliefs_json(game: &SignalingGame, beliefs: &[Vec<f64>]) -> Value {
    Value::Object(
        game.messages()
            .iter()
            .zip(beliefs)
            .map(|(m, b)| (m.clone(), by_id(game.types(), b)))
            .collect(),
    )
}

pub fn assessment_json(game: &SignalingGame, assessment: &Assessment) -> Value {
    json!({
        "chi": num(assessment.chi.value()),
        "sender": sender_json(game, &assessment.sender),
        "receiver": receiver_json(game, &assessment.receiver),
        "beliefs": beliefs_json(game, assessment.beliefs.all()),
    })
}

pub fn record_json(game: &SignalingGame, record: &EquilibriumRecord) -> Value {
    let mut out = Map::new();
    out.insert("kind".into(), json!(record.kind.as_str()));
    if let Value::Object(a) = assessment_json(game, &record.assessment) {
        out.extend(a);
    }
    out.insert("sender_payoffs".into(), by_id(game.types(), &record.sender_payoffs));
    out.insert("onpath_messages".into(), ids(game.messages(), &record.onpath_messages));
    out.insert(
        "offpath_beliefs".into(),
        Value::Object(
            record
                .offpath_beliefs
                .iter()
                .map(|(m, b)| (game.messages()[*m].clone(), by_id(game.types(), b)))
                .collect(),
        ),
    );
    out.insert(
        "refinement_verdicts".into(),
        Value::Object(record.refinement_verdicts.iter().map(|(k, &v)| (k.clone(), json!(v))).collect()),
    );
    Value::Object(out)
}

pub fn verdict_json(verdict: &Verdict) -> Value {
    json!({
        "passed": verdict.passed(),
        "first_violation": verdict.first().map(|v| v.condition.to_string()),
        "violations": verdict.violations.iter().map(|v| json!({
            "condition": v.condition.to_string(),
            "detail": v.detail,
            "magnitude": num(v.magnitude),
        })).collect::<Vec<_>>(),
    })
}

fn responses_json(game: &SignalingGame, responses: &ResponseSet) -> Value {
    match responses {
        ResponseSet::Actions(a) => json!({ "actions": ids(game.actions(), a) }),
        ResponseSet::Wages { lo, hi } => json!({ "wages": [num(*lo), num(*hi)] }),
    }
}

pub fn criterion_json(game: &SignalingGame, report: &CriterionReport) -> Value {
    let messages: Vec<Value> = report
        .messages
        .iter()
        .map(|c| {
            let region = c.region.as_ref().map(|r| {
                json!({
                    "lower": by_id(game.types(), r.lower()),
                    "pinned": ids(game.types(), &r.pinned_types()),
                })
            });
            json!({
                "message": game.messages()[c.message],
                "dominated_types": ids(game.types(), &c.dominated),
                "pinned": Value::Object(c.pinned.iter().map(|&(t, v)| (game.types()[t].clone(), num(v))).collect()),
                "admissible_region": region,
                "responses": c.responses.as_ref().map(|r| responses_json(game, r)),
                "breaking_type": c.breaking_type.map(|t| game.types()[t].clone()),
                "passes": c.passes,
                "note": c.note,
            })
        })
        .collect();
    json!({
        "chi": num(report.chi.value()),
        "survives": report.survives,
        "offpath_messages": messages,
    })
}

fn object<'a>(v: &'a Value, what: &str) -> Result<&'a Map<String, Value>> {
    v.as_object().ok_or_else(|| Error::invalid(format!("{what} must be an object")))
}

fn number(v: &Value, what: &str) -> Result<f64> {
    v.as_f64().ok_or_else(|| Error::invalid(format!("{what} must be a number")))
}

/// Reads a map `{id: number}` into a vector ordered like `ids`; missing ids
/// are zero.
fn dense(v: &Value, ids: &[String], what: &str) -> Result<Vec<f64>> {
    let map = object(v, what)?;
    let mut out = vec![0.0; ids.len()];
    for (k, x) in map {
        let i = ids
            .iter()
            .position(|id| id == k)
            .ok_or_else(|| Error::invalid(format!("{what}: unknown id {k:?}")))?;
        out[i] = number(x, &format!("{what}.{k}"))?;
    }
    Ok(out)
}

/// Reads an assessment in the shape written by [`assessment_json`]. Missing
/// entries in a strategy row are zero; every message needs a belief.
pub fn assessment_from_json(game: &SignalingGame, v: &Value) -> Result<Assessment> {
    let top = object(v, "assessment")?;
    let get = |k: &str| top.get(k).ok_or_else(|| Error::invalid(format!("assessment is missing {k:?}")));
    let chi = Chi::new(number(get("chi")?, "chi")?)?;
    let sender_map = object(get("sender")?, "sender")?;
    let mut rows = Vec::with_capacity(game.n_types());
    for t in game.types() {
        let row = sender_map.get(t).ok_or_else(|| Error::invalid(format!("sender has no row for type {t:?}")))?;
        rows.push(dense(row, game.messages(), &format!("sender.{t}"))?);
    }
    let sender = SenderStrategy::new(rows)?;
    let receiver = if game.is_wage() {
        let w = dense(get("receiver")?, game.messages(), "receiver")?;
        let map = object(get("receiver")?, "receiver")?;
        if let Some(m) = game.messages().iter().find(|m| !map.contains_key(*m)) {
            return Err(Error::invalid(format!("receiver has no wage for message {m:?}")));
        }
        ReceiverStrategy::wages(w)?
    } else {
        let map = object(get("receiver")?, "receiver")?;
        let mut rows = Vec::with_capacity(game.n_messages());
        for m in game.messages() {
            let row = map.get(m).ok_or_else(|| Error::invalid(format!("receiver has no row for message {m:?}")))?;
            rows.push(dense(row, game.actions(), &format!("receiver.{m}"))?);
        }
        ReceiverStrategy::mixed(rows)?
    };
    let bmap = object(get("beliefs")?, "beliefs")?;
    let mut beliefs = Vec::with_capacity(game.n_messages());
    for m in game.messages() {
        let b = bmap.get(m).ok_or_else(|| Error::invalid(format!("no belief for message {m:?}")))?;
        beliefs.push(dense(b, game.types(), &format!("beliefs.{m}"))?);
    }
    Ok(Assessment { sender, receiver, beliefs: BeliefSystem::new(beliefs)?, chi })
}

/// Reads either one assessment, a list of them, or an object with an
/// `"equilibria"` list (the output of `solve`).
pub fn assessments_from_json(game: &SignalingGame, v: &Value) -> Result<Vec<Assessment>> {
    let list = match v {
        Value::Array(items) => items.as_slice(),
        Value::Object(map) => match map.get("equilibria") {
            Some(Value::Array(items)) => items.as_slice(),
            Some(_) => return Err(Error::invalid("\"equilibria\" must be a list")),
            None => return Ok(vec![assessment_from_json(game, v)?]),
        },
        _ => return Err(Error::invalid("expected an assessment object or a list")),
    };
    list.iter().map(|item| assessment_from_json(game, item)).collect()
}

/// A CSV document with a leading `#` comment line.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    pub comment: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new(comment: impl Into<String>, header: &[&str]) -> Self {
        CsvTable { comment: comment.into(), header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    pub fn render(&self) -> String {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        w.write_record(&self.header).expect("writing to memory");
        for row in &self.rows {
            w.write_record(row).expect("writing to memory");
        }
        let body = String::from_utf8(w.into_inner().expect("writing to memory")).expect("utf-8 input");
        format!("# {}\n{}", self.comment, body)
    }
}
