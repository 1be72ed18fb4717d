//! JSON game files.
//!
//! ```json
//! {
//!   "types": [{"id": "weak", "prior": 0.4}, {"id": "strong", "prior": 0.6}],
//!   "messages": ["Beer", "Quiche"],
//!   "receiver_mode": "finite",
//!   "actions": ["Fight", "NotFight"],
//!   "sender_payoff":   {"weak": {"Beer": {"Fight": 0, "NotFight": 2}, ...}, ...},
//!   "receiver_payoff": {"weak": {"Beer": {"Fight": 4, "NotFight": 0}, ...}, ...},
//!   "sender_cost": {"weak": {"Beer": 0.5}},
//!   "supports": [{"name": "semi", "sender": {"weak": ["Beer", "Quiche"]}, "receiver": {"Beer": ["Fight", "NotFight"]}}]
//! }
//! ```
//!
//! With `"receiver_mode": "wage_quadratic"` every type carries a
//! `productivity`, there are no `actions` or payoff tables, and the sender's
//! payoff is the wage minus `sender_cost` (missing entries are zero).
//! `supports` is optional and lists the sender/receiver supports handed to
//! the support solver.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::solver::SupportSpec;

use super::{PayoffTable, PriorDistribution, SignalingGame};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawType {
    id: String,
    prior: f64,
    #[serde(default)]
    productivity: Option<f64>,
}

#[derive(Debug, Deserialize, PartialEq, Eq, Clone, Copy)]
#[serde(rename_all = "snake_case")]
enum RawMode {
    Finite,
    WageQuadratic,
}

type Table3 = BTreeMap<String, BTreeMap<String, BTreeMap<String, f64>>>;
type Table2 = BTreeMap<String, BTreeMap<String, f64>>;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSupport {
    #[serde(default)]
    name: Option<String>,
    sender: BTreeMap<String, Vec<String>>,
    #[serde(default)]
    receiver: BTreeMap<String, Vec<String>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGame {
    types: Vec<RawType>,
    messages: Vec<String>,
    receiver_mode: RawMode,
    #[serde(default)]
    actions: Option<Vec<String>>,
    #[serde(default)]
    sender_payoff: Option<Table3>,
    #[serde(default)]
    receiver_payoff: Option<Table3>,
    #[serde(default)]
    sender_cost: Option<Table2>,
    #[serde(default)]
    supports: Vec<RawSupport>,
}

/// A parsed game plus any support specifications declared alongside it.
#[derive(Debug, Clone)]
pub struct GameFile {
    pub game: SignalingGame,
    pub supports: Vec<(String, SupportSpec)>,
}

pub fn load_game(path: impl AsRef<Path>) -> Result<GameFile> {
    let path = path.as_ref();
    let src = std::fs::read_to_string(path)?;
    parse_game(&src, &path.display().to_string())
}

/// Parses a game file. `source_name` only labels error messages.
pub fn parse_game(src: &str, source_name: &str) -> Result<GameFile> {
    let raw: RawGame = serde_json::from_str(src).map_err(|e| Error::GameFile {
        source_name: source_name.to_string(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let ctx = Ctx { src, source_name };
    build(raw, &ctx)
}

struct Ctx<'a> {
    src: &'a str,
    source_name: &'a str,
}

impl Ctx<'_> {
    /// Error located at the last key of `path` as it appears in the source.
    fn err(&self, path: &[&str], message: impl Into<String>) -> Error {
        let (line, column) = locate(self.src, path);
        Error::GameFile {
            source_name: self.source_name.to_string(),
            line,
            column,
            message: format!("{}: {}", path.join("."), message.into()),
        }
    }
}

/// Finds the keys of `path` in order of appearance, returning the 1-based
/// line and column of the deepest one found.
fn locate(src: &str, path: &[&str]) -> (usize, usize) {
    let mut pos = 0;
    let mut found = 0;
    for key in path {
        let needle = format!("\"{key}\"");
        if let Some(off) = src[pos..].find(&needle) {
            pos += off;
            found = pos;
        }
    }
    let line = src[..found].matches('\n').count() + 1;
    let column = found - src[..found].rfind('\n').map(|i| i + 1).unwrap_or(0) + 1;
    (line, column)
}

fn build(raw: RawGame, ctx: &Ctx<'_>) -> Result<GameFile> {
    let types: Vec<String> = raw.types.iter().map(|t| t.id.clone()).collect();
    let messages = raw.messages.clone();
    let prior = PriorDistribution::new(raw.types.iter().map(|t| t.prior).collect())
        .map_err(|e| ctx.err(&["types", "prior"], e.to_string()))?;

    let cost = match &raw.sender_cost {
        None => vec![vec![0.0; messages.len()]; types.len()],
        Some(table) => {
            for (t, row) in table {
                if !types.contains(t) {
                    return Err(ctx.err(&["sender_cost", t], "unknown type id"));
                }
                if let Some(m) = row.keys().find(|m| !messages.contains(m)) {
                    return Err(ctx.err(&["sender_cost", t, m], "unknown message id"));
                }
            }
            types
                .iter()
                .map(|t| {
                    messages
                        .iter()
                        .map(|m| table.get(t).and_then(|r| r.get(m)).copied().unwrap_or(0.0))
                        .collect()
                })
                .collect()
        }
    };

    let game = match raw.receiver_mode {
        RawMode::WageQuadratic => {
            for key in ["actions", "sender_payoff", "receiver_payoff"] {
                let present = match key {
                    "actions" => raw.actions.is_some(),
                    "sender_payoff" => raw.sender_payoff.is_some(),
                    _ => raw.receiver_payoff.is_some(),
                };
                if present {
                    return Err(ctx.err(&[key], "not allowed with receiver_mode \"wage_quadratic\""));
                }
            }
            let productivity = raw
                .types
                .iter()
                .map(|t| {
                    t.productivity
                        .ok_or_else(|| ctx.err(&["types", &t.id], "missing productivity"))
                })
                .collect::<Result<Vec<_>>>()?;
            SignalingGame::wage_quadratic(types.clone(), prior, productivity, messages.clone(), cost)
                .map_err(|e| ctx.err(&["types"], e.to_string()))?
        }
        RawMode::Finite => {
            let actions = raw
                .actions
                .clone()
                .ok_or_else(|| ctx.err(&["receiver_mode"], "finite mode requires \"actions\""))?;
            if let Some(t) = raw.types.iter().find(|t| t.productivity.is_some()) {
                return Err(ctx.err(&["types", &t.id, "productivity"], "only allowed in wage_quadratic mode"));
            }
            let sender = table3(&raw.sender_payoff, "sender_payoff", &types, &messages, &actions, ctx)?;
            let receiver = table3(&raw.receiver_payoff, "receiver_payoff", &types, &messages, &actions, ctx)?;
            SignalingGame::finite(types.clone(), prior, messages.clone(), actions, sender, receiver)
                .and_then(|g| g.with_sender_cost(cost))
                .map_err(|e| ctx.err(&["types"], e.to_string()))?
        }
    };

    let supports = raw
        .supports
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let name = s.name.clone().unwrap_or_else(|| format!("support{i}"));
            let spec = support_spec(&game, s).map_err(|e| ctx.err(&["supports", &name], e.to_string()))?;
            Ok((name, spec))
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(GameFile { game, supports })
}

fn table3(
    table: &Option<Table3>,
    name: &str,
    types: &[String],
    messages: &[String],
    actions: &[String],
    ctx: &Ctx<'_>,
) -> Result<PayoffTable> {
    let table = table
        .as_ref()
        .ok_or_else(|| ctx.err(&["receiver_mode"], format!("finite mode requires \"{name}\"")))?;
    for (t, by_m) in table {
        if !types.contains(t) {
            return Err(ctx.err(&[name, t], "unknown type id"));
        }
        for (m, by_a) in by_m {
            if !messages.contains(m) {
                return Err(ctx.err(&[name, t, m], "unknown message id"));
            }
            if let Some(a) = by_a.keys().find(|a| !actions.contains(a)) {
                return Err(ctx.err(&[name, t, m, a], "unknown action id"));
            }
        }
    }
    let mut values = Vec::with_capacity(types.len() * messages.len() * actions.len());
    for t in types {
        for m in messages {
            for a in actions {
                let v = table
                    .get(t)
                    .and_then(|r| r.get(m))
                    .and_then(|r| r.get(a))
                    .ok_or_else(|| ctx.err(&[name, t, m], format!("missing payoff for action {a:?}")))?;
                values.push(*v);
            }
        }
    }
    let (nm, na) = (messages.len(), actions.len());
    Ok(PayoffTable::from_fn(types.len(), nm, na, |t, m, a| values[(t * nm + m) * na + a]))
}

fn support_spec(game: &SignalingGame, raw: &RawSupport) -> Result<SupportSpec> {
    let ids = |ids: &BTreeMap<String, Vec<String>>| ids.clone().into_iter().collect::<Vec<_>>();
    SupportSpec::from_ids(game, &ids(&raw.sender), &ids(&raw.receiver))
}
