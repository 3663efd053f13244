use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use super::CliError;
use crate::classifier::{align_global_phase, classify, Branch, ClassifyConfig};
use crate::generators::{make_adversary, random_symmetry, AdversaryKind, GroundTruth, MAX_DRESSING_DEGREE};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ManifestKind {
    Unitary,
    Antiunitary,
    Scaling,
    Shear,
    NormWarp,
    RankDeficient,
}

impl ManifestKind {
    fn symmetry(self) -> Option<Branch> {
        match self {
            ManifestKind::Unitary => Some(Branch::Linear),
            ManifestKind::Antiunitary => Some(Branch::Antilinear),
            _ => None,
        }
    }

    fn adversary(self) -> Option<AdversaryKind> {
        match self {
            ManifestKind::Scaling => Some(AdversaryKind::Scaling),
            ManifestKind::Shear => Some(AdversaryKind::Shear),
            ManifestKind::NormWarp => Some(AdversaryKind::NormWarp),
            ManifestKind::RankDeficient => Some(AdversaryKind::RankDeficient),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestEntry {
    pub kind: ManifestKind,
    pub n: usize,
    pub seed: u64,
    #[serde(default)]
    pub dressing_degree: u32,
}

/// Reads and validates a manifest: a non-empty JSON array of entries.
pub fn parse_manifest(json: &str) -> Result<Vec<ManifestEntry>, CliError> {
    let entries: Vec<ManifestEntry> = serde_json::from_str(json).map_err(|e| CliError::Manifest(e.to_string()))?;
    if entries.is_empty() {
        return Err(CliError::Manifest("manifest must contain at least one entry".into()));
    }
    for (i, e) in entries.iter().enumerate() {
        if e.n == 0 {
            return Err(CliError::Manifest(format!("entry {i}: n must be at least 1")));
        }
        if e.dressing_degree > MAX_DRESSING_DEGREE {
            return Err(CliError::Manifest(format!(
                "entry {i}: dressing_degree must be at most {MAX_DRESSING_DEGREE}"
            )));
        }
        if e.kind.adversary().is_some() && e.dressing_degree != 0 {
            return Err(CliError::Manifest(format!("entry {i}: adversaries take no dressing")));
        }
    }
    Ok(entries)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Status {
    Pass,
    Fail,
    CaveatN1,
}

impl Status {
    fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::CaveatN1 => "caveat_n1",
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct InstanceResult {
    pub index: usize,
    pub entry: ManifestEntry,
    pub status: Status,
    /// Branch name or error code.
    pub outcome: String,
    pub alignment_residual: Option<f64>,
}

fn run_entry(index: usize, entry: ManifestEntry, config: &ClassifyConfig) -> InstanceResult {
    let generated = match (entry.kind.symmetry(), entry.kind.adversary()) {
        (Some(kind), _) => random_symmetry(kind, entry.n, entry.dressing_degree, entry.seed),
        (None, Some(kind)) => make_adversary(kind, entry.n, entry.seed),
        (None, None) => unreachable!("every manifest kind is a symmetry or an adversary"),
    };
    let finish = |status, outcome: String, alignment_residual| InstanceResult {
        index,
        entry,
        status,
        outcome,
        alignment_residual,
    };
    if entry.n == 1 {
        let outcome = match generated.map(|g| classify(&g.transformation, config)) {
            Ok(Ok(r)) => r.branch.as_str().to_owned(),
            Ok(Err(e)) | Err(e) => e.code().to_owned(),
        };
        return finish(Status::CaveatN1, outcome, None);
    }
    let generated = match generated {
        Ok(g) => g,
        Err(e) => return finish(Status::Fail, e.code().to_owned(), None),
    };
    // The ground truth is read only after classification.
    let result = classify(&generated.transformation, config);
    match (&generated.truth, result) {
        (GroundTruth::Symmetry { kind, matrix, .. }, Ok(r)) => {
            let residual = align_global_phase(&r.operator, matrix).map(|a| a.aligned_residual).ok();
            let ok = r.branch == *kind && residual.is_some_and(|x| x < config.tol_unitary);
            finish(if ok { Status::Pass } else { Status::Fail }, r.branch.as_str().to_owned(), residual)
        }
        (GroundTruth::Symmetry { .. }, Err(e)) => finish(Status::Fail, e.code().to_owned(), None),
        (GroundTruth::Adversary { .. }, Ok(r)) => finish(Status::Fail, r.branch.as_str().to_owned(), None),
        (GroundTruth::Adversary { .. }, Err(e)) => {
            let status = if e.exit_code() == 2 { Status::Pass } else { Status::Fail };
            finish(status, e.code().to_owned(), None)
        }
    }
}

/// Classifies every entry in parallel; results keep manifest order.
pub(crate) fn run_manifest(entries: &[ManifestEntry], config: &ClassifyConfig) -> Vec<InstanceResult> {
    entries.par_iter().enumerate().map(|(i, e)| run_entry(i, *e, config)).collect()
}

pub(crate) fn fuzz_body(results: &[InstanceResult]) -> (Map<String, Value>, bool) {
    let count = |pred: &dyn Fn(&InstanceResult) -> bool| results.iter().filter(|r| pred(r)).count();
    let evaluated = |r: &InstanceResult| r.status != Status::CaveatN1;
    let symmetries_total = count(&|r| evaluated(r) && r.entry.kind.symmetry().is_some());
    let symmetries_recovered = count(&|r| r.status == Status::Pass && r.entry.kind.symmetry().is_some());
    let adversaries_total = count(&|r| evaluated(r) && r.entry.kind.adversary().is_some());
    let adversaries_rejected = count(&|r| r.status == Status::Pass && r.entry.kind.adversary().is_some());
    let correct = count(&|r| r.status == Status::Pass);
    let failed = count(&|r| r.status == Status::Fail);
    let all_correct = failed == 0;

    let instances: Vec<Value> = results
        .iter()
        .map(|r| {
            json!({
                "index": r.index,
                "kind": r.entry.kind,
                "n": r.entry.n,
                "seed": r.entry.seed,
                "dressing_degree": r.entry.dressing_degree,
                "status": r.status.as_str(),
                "outcome": r.outcome,
                "alignment_residual": r.alignment_residual,
            })
        })
        .collect();
    let mut m = Map::new();
    m.insert("verdict".into(), json!(if all_correct { "pass" } else { "fail" }));
    m.insert(
        "summary".into(),
        json!({
            "total": results.len(),
            "evaluated": symmetries_total + adversaries_total,
            "correct": correct,
            "failed": failed,
            "caveat_n1": count(&|r| r.status == Status::CaveatN1),
            "symmetries": { "total": symmetries_total, "recovered": symmetries_recovered },
            "adversaries": { "total": adversaries_total, "rejected": adversaries_rejected },
        }),
    );
    m.insert("instances".into(), Value::Array(instances));
    (m, all_correct)
}
