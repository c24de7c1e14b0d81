//! Lemma verification campaigns, experiment tables and serialization.

pub mod experiment;
pub mod io;
mod lemmas;

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{from_usize, rat, serde_str, Rational};
use crate::ulc::Topology;

pub use experiment::{run_experiment, ExperimentConfig, ExperimentRow, ExperimentTable, Grid};

pub const REPORT_SCHEMA: &str = "mmm/lemma-report";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LemmaId {
    Kr07Yes,
    WeiYes,
    WeiNo,
    FraMat,
    CardCompleteness,
    CardSoundness,
    BipCover,
    BipSsehYes,
    BipSsehNo,
    TotalVc,
}

impl LemmaId {
    pub const ALL: [LemmaId; 10] = [
        LemmaId::Kr07Yes,
        LemmaId::WeiYes,
        LemmaId::WeiNo,
        LemmaId::FraMat,
        LemmaId::CardCompleteness,
        LemmaId::CardSoundness,
        LemmaId::BipCover,
        LemmaId::BipSsehYes,
        LemmaId::BipSsehNo,
        LemmaId::TotalVc,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            LemmaId::Kr07Yes => "kr07-yes",
            LemmaId::WeiYes => "wei-yes",
            LemmaId::WeiNo => "wei-no",
            LemmaId::FraMat => "fra-mat",
            LemmaId::CardCompleteness => "card-completeness",
            LemmaId::CardSoundness => "card-soundness",
            LemmaId::BipCover => "bip-cover",
            LemmaId::BipSsehYes => "bip-sseh-yes",
            LemmaId::BipSsehNo => "bip-sseh-no",
            LemmaId::TotalVc => "total-vc",
        }
    }

    /// NO-side statements are checked through exact-solver inequalities.
    pub fn mode(self) -> Mode {
        match self {
            LemmaId::WeiNo | LemmaId::CardSoundness | LemmaId::BipSsehNo => Mode::Surrogate,
            _ => Mode::Exact,
        }
    }
}

impl fmt::Display for LemmaId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for LemmaId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        LemmaId::ALL
            .into_iter()
            .find(|id| id.as_str() == s)
            .ok_or_else(|| Error::UnknownLemma(s.to_string()))
    }
}

impl Serialize for LemmaId {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for LemmaId {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Exact,
    Surrogate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    /// A budget or size cap stopped the run before every check completed.
    Inconclusive,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Exact => "exact",
            Mode::Surrogate => "surrogate",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "=")]
    Eq,
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = "<")]
    Lt,
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = ">")]
    Gt,
}

impl Relation {
    pub fn holds(self, lhs: &Rational, rhs: &Rational) -> bool {
        match self {
            Relation::Eq => lhs == rhs,
            Relation::Le => lhs <= rhs,
            Relation::Lt => lhs < rhs,
            Relation::Ge => lhs >= rhs,
            Relation::Gt => lhs > rhs,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Relation::Eq => "=",
            Relation::Le => "<=",
            Relation::Lt => "<",
            Relation::Ge => ">=",
            Relation::Gt => ">",
        }
    }
}

/// One exact comparison. Properties are phrased as a violation count
/// compared against zero.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub relation: Relation,
    #[serde(with = "serde_str")]
    pub lhs: Rational,
    #[serde(with = "serde_str")]
    pub rhs: Rational,
    pub holds: bool,
}

impl Check {
    pub fn new(name: impl Into<String>, relation: Relation, lhs: Rational, rhs: Rational) -> Self {
        let holds = relation.holds(&lhs, &rhs);
        Check {
            name: name.into(),
            relation,
            lhs,
            rhs,
            holds,
        }
    }

    /// Distance from the boundary, positive when the relation holds strictly.
    pub fn slack(&self) -> Rational {
        match self.relation {
            Relation::Eq => -(&self.lhs - &self.rhs).abs(),
            Relation::Le | Relation::Lt => &self.rhs - &self.lhs,
            Relation::Ge | Relation::Gt => &self.lhs - &self.rhs,
        }
    }
}

/// Inputs shared by every verifier; each lemma reads the fields it needs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LemmaParams {
    pub num_vars: usize,
    pub num_colors: usize,
    #[serde(with = "serde_str")]
    pub epsilon: Rational,
    #[serde(with = "serde_str")]
    pub xi: Rational,
    /// `cycle`, `complete` or `random:<num>/<den>`.
    pub topology: String,
    pub seed: u64,
    #[serde(with = "serde_str")]
    pub rho: Rational,
    /// Base graph size for random-graph lemmas; side `n` for the biclique gadget.
    pub size: usize,
    pub samples: usize,
    pub node_limit: u64,
    pub enumeration_limit: usize,
    /// Largest blowup the soundness surrogate will solve exactly.
    pub soundness_cap: usize,
}

impl Default for LemmaParams {
    fn default() -> Self {
        LemmaParams {
            num_vars: 3,
            num_colors: 2,
            epsilon: rat(1, 4),
            xi: Rational::zero(),
            topology: "cycle".into(),
            seed: 1,
            rho: rat(1, 2),
            size: 4,
            samples: 64,
            node_limit: 5_000_000,
            enumeration_limit: 100_000,
            soundness_cap: 40,
        }
    }
}

pub fn parse_topology(text: &str) -> Result<Topology> {
    match text {
        "cycle" => Ok(Topology::Cycle),
        "complete" => Ok(Topology::Complete),
        other => match other.strip_prefix("random:") {
            Some(p) => Ok(Topology::Random(crate::rational::parse(p)?)),
            None => Err(Error::InvalidParameter(format!("unknown topology `{other}`"))),
        },
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LemmaReport {
    pub schema: String,
    pub version: u32,
    pub lemma: LemmaId,
    pub mode: Mode,
    pub params: LemmaParams,
    pub checks: Vec<Check>,
    pub verdict: Verdict,
    pub notes: Vec<String>,
    pub artifacts: Vec<String>,
    /// Wall-clock time; kept out of the serialized form so reports stay
    /// byte-identical across runs.
    #[serde(skip)]
    pub runtime: Duration,
}

impl LemmaReport {
    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    pub fn failed_checks(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.holds)
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("reports serialize");
        text.push('\n');
        text
    }
}

#[derive(Debug, Default)]
pub(crate) struct Recorder {
    checks: Vec<Check>,
    notes: Vec<String>,
    inconclusive: bool,
}

impl Recorder {
    pub(crate) fn check(&mut self, name: impl Into<String>, relation: Relation, lhs: Rational, rhs: Rational) {
        self.checks.push(Check::new(name, relation, lhs, rhs));
    }

    /// `violations = 0`.
    pub(crate) fn none(&mut self, name: impl Into<String>, violations: usize) {
        self.check(name, Relation::Eq, from_usize(violations), Rational::zero());
    }

    pub(crate) fn note(&mut self, note: impl Into<String>) {
        self.notes.push(note.into());
    }

    pub(crate) fn stop(&mut self, why: impl Into<String>) {
        self.inconclusive = true;
        self.notes.push(why.into());
    }
}

fn stops_run(e: &Error) -> bool {
    matches!(e, Error::BudgetExhausted { .. } | Error::CapExceeded(_))
}

/// Runs one lemma pipeline. Budget and cap exhaustion yield an
/// `Inconclusive` report; invalid parameters are errors.
pub fn verify_lemma(id: LemmaId, params: &LemmaParams) -> Result<LemmaReport> {
    let start = Instant::now();
    let mut rec = Recorder::default();
    match lemmas::run(id, params, &mut rec) {
        Ok(()) => {}
        Err(e) if stops_run(&e) => rec.stop(e.to_string()),
        Err(e) => return Err(e),
    }
    let verdict = if rec.checks.iter().any(|c| !c.holds) {
        Verdict::Fail
    } else if rec.inconclusive || rec.checks.is_empty() {
        Verdict::Inconclusive
    } else {
        Verdict::Pass
    };
    Ok(LemmaReport {
        schema: REPORT_SCHEMA.into(),
        version: io::SCHEMA_VERSION,
        lemma: id,
        mode: id.mode(),
        params: params.clone(),
        checks: rec.checks,
        verdict,
        notes: rec.notes,
        artifacts: Vec::new(),
        runtime: start.elapsed(),
    })
}
