use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{fisher_exact_p, odds_ratio, AnalysisError, Avoidability, ContingencyTable2x2, Outcome, RunOutcome};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    NActors,
    EgoManeuver,
    EgoMi,
}

impl Scheme {
    pub const ALL: [Scheme; 3] = [Scheme::NActors, Scheme::EgoManeuver, Scheme::EgoMi];

    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::NActors => "n-actors",
            Scheme::EgoManeuver => "ego-maneuver",
            Scheme::EgoMi => "ego-mi",
        }
    }

    fn key(self, r: &RunOutcome) -> String {
        match self {
            Scheme::NActors => r.n_actors.to_string(),
            Scheme::EgoManeuver => r.ego_maneuver.clone(),
            Scheme::EgoMi => r.ego_mi.clone(),
        }
    }
}

impl FromStr for Scheme {
    type Err = AnalysisError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Scheme::ALL.into_iter().find(|k| k.as_str() == s).ok_or_else(|| AnalysisError::UnknownScheme(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupStats {
    pub key: String,
    pub runs: usize,
    pub collision: usize,
    pub near_miss: usize,
    pub no_incident: usize,
    pub pm: usize,
    pub pct_collision: f64,
    pub pct_near_miss: f64,
    pub pct_no_incident: f64,
    pub pct_pm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    /// `unsafe` (collision or near-miss vs. no incident) or `pm` (slow-down present vs. absent).
    pub metric: String,
    pub group_a: String,
    pub group_b: String,
    pub table: ContingencyTable2x2,
    pub p_value: f64,
    pub odds_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateReport {
    pub scheme: Scheme,
    pub total_runs: usize,
    pub included: usize,
    pub excluded_unavoidable: usize,
    pub groups: Vec<GroupStats>,
    pub comparisons: Vec<Comparison>,
}

fn pct(n: usize, d: usize) -> f64 {
    if d == 0 {
        0.0
    } else {
        100.0 * n as f64 / d as f64
    }
}

/// Groups runs (minus unavoidable collisions) and compares every pair of groups.
pub fn aggregate(outcomes: &[RunOutcome], scheme: Scheme) -> Result<AggregateReport, AnalysisError> {
    let included: Vec<&RunOutcome> = outcomes.iter().filter(|r| r.avoidability != Avoidability::Unavoidable).collect();
    let mut by_key: BTreeMap<(usize, String), Vec<&RunOutcome>> = BTreeMap::new();
    for r in &included {
        let key = scheme.key(r);
        // numeric keys sort by length first so "10" comes after "9"
        by_key.entry((key.len(), key)).or_default().push(r);
    }
    let groups: Vec<GroupStats> = by_key
        .into_iter()
        .map(|((_, key), runs)| {
            let count = |o: Outcome| runs.iter().filter(|r| r.outcome == o).count();
            let (collision, near_miss, no_incident) = (count(Outcome::Collision), count(Outcome::NearMiss), count(Outcome::NoIncident));
            let pm = runs.iter().filter(|r| r.pm_detected).count();
            let n = runs.len();
            GroupStats {
                key,
                runs: n,
                collision,
                near_miss,
                no_incident,
                pm,
                pct_collision: pct(collision, n),
                pct_near_miss: pct(near_miss, n),
                pct_no_incident: pct(no_incident, n),
                pct_pm: pct(pm, n),
            }
        })
        .collect();

    let mut comparisons = Vec::new();
    for i in 0..groups.len() {
        for j in i + 1..groups.len() {
            let (ga, gb) = (&groups[i], &groups[j]);
            let pairs = [
                ("unsafe", ga.collision + ga.near_miss, gb.collision + gb.near_miss),
                ("pm", ga.pm, gb.pm),
            ];
            for (metric, xa, xb) in pairs {
                let table = ContingencyTable2x2::new(xa as u64, (ga.runs - xa) as u64, xb as u64, (gb.runs - xb) as u64);
                comparisons.push(Comparison {
                    metric: metric.to_string(),
                    group_a: ga.key.clone(),
                    group_b: gb.key.clone(),
                    table,
                    p_value: fisher_exact_p(&table)?,
                    odds_ratio: odds_ratio(&table)?,
                });
            }
        }
    }
    Ok(AggregateReport {
        scheme,
        total_runs: outcomes.len(),
        included: included.len(),
        excluded_unavoidable: outcomes.len() - included.len(),
        groups,
        comparisons,
    })
}

pub fn render_markdown(reports: &[AggregateReport]) -> String {
    let mut out = String::new();
    for r in reports {
        let _ = writeln!(out, "## Grouping: {}\n", r.scheme.as_str());
        let _ = writeln!(
            out,
            "{} runs, {} included, {} excluded as unavoidable collisions.\n",
            r.total_runs, r.included, r.excluded_unavoidable
        );
        out.push_str("| group | runs | collision | near-miss | no incident | slow-down |\n");
        out.push_str("|---|---:|---:|---:|---:|---:|\n");
        for g in &r.groups {
            let _ = writeln!(
                out,
                "| {} | {} | {} ({:.1}%) | {} ({:.1}%) | {} ({:.1}%) | {} ({:.1}%) |",
                g.key, g.runs, g.collision, g.pct_collision, g.near_miss, g.pct_near_miss, g.no_incident, g.pct_no_incident, g.pm, g.pct_pm
            );
        }
        if !r.comparisons.is_empty() {
            out.push_str("\n| metric | A | B | table [[a,b],[c,d]] | Fisher p | odds ratio |\n");
            out.push_str("|---|---|---|---|---:|---:|\n");
            for c in &r.comparisons {
                let t = c.table;
                let _ = writeln!(
                    out,
                    "| {} | {} | {} | [[{},{}],[{},{}]] | {:.4} | {:.3} |",
                    c.metric, c.group_a, c.group_b, t.a, t.b, t.c, t.d, c.p_value, c.odds_ratio
                );
            }
        }
        out.push('\n');
    }
    out
}

/// Per-group plot data.
pub fn render_csv(report: &AggregateReport) -> String {
    let mut out = String::from("group,runs,collision,near_miss,no_incident,pm,pct_collision,pct_near_miss,pct_no_incident,pct_pm\n");
    for g in &report.groups {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{:.3},{:.3},{:.3},{:.3}",
            g.key, g.runs, g.collision, g.near_miss, g.no_incident, g.pm, g.pct_collision, g.pct_near_miss, g.pct_no_incident, g.pct_pm
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(outcome: Outcome, avoid: Avoidability, maneuver: &str) -> RunOutcome {
        RunOutcome {
            run_id: String::new(),
            scenario_id: String::new(),
            policy: "oblivious".into(),
            seed: 0,
            n_actors: 2,
            ego_mi: "SL".into(),
            ego_maneuver: maneuver.into(),
            outcome,
            avoidability: avoid,
            pm_detected: false,
            pm_locations: vec![],
        }
    }

    #[test]
    fn unavoidable_runs_are_dropped() {
        use Avoidability::*;
        use Outcome::*;
        let mut runs = vec![run(Collision, Unavoidable, "left")];
        runs.extend((0..4).map(|_| run(Collision, Avoidable, "left")));
        runs.extend((0..3).map(|_| run(NearMiss, NotApplicable, "left")));
        runs.extend((0..2).map(|_| run(NoIncident, NotApplicable, "left")));
        let rep = aggregate(&runs, Scheme::NActors).unwrap();
        assert_eq!(rep.included, 9);
        let g = &rep.groups[0];
        assert!((g.pct_collision - 44.444).abs() < 0.01);
        assert!((g.pct_near_miss - 33.333).abs() < 0.01);
        assert!((g.pct_no_incident - 22.222).abs() < 0.01);
    }

    #[test]
    fn identical_groups_compare_equal() {
        use Avoidability::*;
        use Outcome::*;
        let mut runs = Vec::new();
        for m in ["left", "right"] {
            runs.push(run(Collision, Avoidable, m));
            runs.push(run(NoIncident, NotApplicable, m));
            runs.push(run(NoIncident, NotApplicable, m));
        }
        let rep = aggregate(&runs, Scheme::EgoManeuver).unwrap();
        assert_eq!(rep.groups.len(), 2);
        let c = rep.comparisons.iter().find(|c| c.metric == "unsafe").unwrap();
        assert!((c.p_value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn scheme_names() {
        for s in Scheme::ALL {
            assert_eq!(s.as_str().parse::<Scheme>().unwrap(), s);
        }
        assert!("by-weather".parse::<Scheme>().is_err());
    }

    #[test]
    fn numeric_keys_sort_naturally() {
        let mut runs = Vec::new();
        for n in [10, 2, 9] {
            let mut r = run(Outcome::NoIncident, Avoidability::NotApplicable, "left");
            r.n_actors = n;
            runs.push(r);
        }
        let rep = aggregate(&runs, Scheme::NActors).unwrap();
        let keys: Vec<_> = rep.groups.iter().map(|g| g.key.as_str()).collect();
        assert_eq!(keys, ["2", "9", "10"]);
    }
}
