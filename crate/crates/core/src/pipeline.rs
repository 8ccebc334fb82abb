//! Stage runners behind the command-line tool: each stage reads the previous stage's
//! artifacts from disk and writes its own, so stages can be re-run independently.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{de::DeserializeOwned, Deserialize, Serialize};
use thiserror::Error;

use crate::analysis::{
    aggregate, analyze_run, driven_path, medoid_reference_path, render_csv, render_markdown, AggregateReport,
    AnalysisError, ReferencePath, RunOutcome, Scheme,
};
use crate::concrete_gen::{ConcreteConfig, ConcreteError, ConcreteScenario, Concretizer, SpeedProfile, ViolationKind};
use crate::fixtures;
use crate::logical_gen::{find_logical_scenarios_with, permutation_count, reduce_symmetries, LogicalGenError, LogicalScenarioSet, OverlapMatrix};
use crate::provenance::Provenance;
use crate::road_model::{enumerate_maneuver_instances, load_road_map, load_road_map_file, ManeuverCatalog, RoadMap, RoadMapError};
use crate::sim::{read_trace_jsonl, simulate, trace_to_csv, trace_to_jsonl, without_externals, EgoPolicy, SimConfig, SimError};

pub const BUILTIN_PREFIX: &str = "builtin:";

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("config error: {0}")]
    Config(String),
    #[error("missing input {0}")]
    MissingInput(PathBuf),
    #[error("road map: {0}")]
    RoadMap(#[from] RoadMapError),
    #[error("invalid artifact {path}: {reason}")]
    Artifact { path: PathBuf, reason: String },
    #[error("i/o error on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Logical(#[from] LogicalGenError),
    #[error(transparent)]
    Concrete(#[from] ConcreteError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
}

impl PipelineError {
    /// 2 for usage/config problems, 3 for bad data.
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Config(_) | PipelineError::MissingInput(_) => 2,
            PipelineError::RoadMap(RoadMapError::UnknownJunction(_)) => 2,
            PipelineError::RoadMap(RoadMapError::Io(e)) if e.kind() == std::io::ErrorKind::NotFound => 2,
            PipelineError::Analysis(AnalysisError::UnknownScheme(_)) => 2,
            _ => 3,
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> PipelineError + '_ {
    move |source| PipelineError::Io { path: path.to_path_buf(), source }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenerationConfig {
    pub symmetry_reduction: bool,
    pub overlap_threshold: f64,
}

impl Default for GenerationConfig {
    fn default() -> Self {
        GenerationConfig { symmetry_reduction: true, overlap_threshold: crate::logical_gen::OVERLAP_THRESHOLD }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulationConfig {
    pub policies: Vec<EgoPolicy>,
    pub seed: u64,
    pub repetitions: u64,
    /// Ego-only runs used to build each scenario's reference path.
    pub reference_runs: u64,
    pub config: SimConfig,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        SimulationConfig {
            policies: vec![EgoPolicy::Oblivious, EgoPolicy::reactive()],
            seed: 0,
            repetitions: 1,
            reference_runs: 10,
            config: SimConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisConfig {
    pub schemes: Vec<Scheme>,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig { schemes: Scheme::ALL.to_vec() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    /// Path to a road-map JSON file, or `builtin:T1` / `builtin:X1` / `builtin:Y1`.
    pub road_map: String,
    pub junction: String,
    pub n_actors: usize,
    /// Speed profile of every actor unless `ego_profile` overrides the ego's.
    pub profile: SpeedProfile,
    pub ego_profile: Option<SpeedProfile>,
    pub generation: GenerationConfig,
    pub concrete: ConcreteConfig,
    pub simulation: SimulationConfig,
    pub analysis: AnalysisConfig,
    pub out: PathBuf,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            road_map: format!("{BUILTIN_PREFIX}T1"),
            junction: fixtures::JUNCTION_ID.to_string(),
            n_actors: 2,
            profile: SpeedProfile::default(),
            ego_profile: None,
            generation: GenerationConfig::default(),
            concrete: ConcreteConfig::default(),
            simulation: SimulationConfig::default(),
            analysis: AnalysisConfig::default(),
            out: PathBuf::from("out"),
        }
    }
}

impl PipelineConfig {
    pub fn from_json(text: &str) -> Result<Self, PipelineError> {
        serde_json::from_str(text).map_err(|e| PipelineError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, PipelineError> {
        let text = fs::read_to_string(path).map_err(|_| PipelineError::MissingInput(path.to_path_buf()))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        let cfg = |m: String| PipelineError::Config(m);
        if self.n_actors < 2 {
            return Err(cfg(format!("n_actors must be at least 2, got {}", self.n_actors)));
        }
        if !(self.generation.overlap_threshold >= 0.0 && self.generation.overlap_threshold.is_finite()) {
            return Err(cfg("overlap_threshold must be non-negative".into()));
        }
        self.profile.validate().map_err(|e| cfg(e.to_string()))?;
        if let Some(p) = &self.ego_profile {
            p.validate().map_err(|e| cfg(e.to_string()))?;
        }
        self.concrete.validate().map_err(|e| cfg(e.to_string()))?;
        self.simulation.config.validate().map_err(|e| cfg(e.to_string()))?;
        if self.simulation.policies.is_empty() {
            return Err(cfg("at least one ego policy is required".into()));
        }
        for p in &self.simulation.policies {
            p.validate().map_err(|e| cfg(e.to_string()))?;
        }
        if self.simulation.reference_runs == 0 {
            return Err(cfg("reference_runs must be at least 1".into()));
        }
        Ok(())
    }

    /// Hash input: the effective config minus the output location.
    pub fn provenance(&self) -> Provenance {
        let mut c = self.clone();
        c.out = PathBuf::new();
        let bytes = serde_json::to_vec(&c).expect("config serializes");
        Provenance::for_config_bytes(&bytes)
    }

    pub fn profiles(&self) -> Vec<SpeedProfile> {
        let mut v = vec![self.profile; self.n_actors];
        if let Some(p) = self.ego_profile {
            v[0] = p;
        }
        v
    }

    pub fn logical_file(&self) -> PathBuf {
        self.out.join("logical").join("scenarios.json")
    }

    pub fn concrete_dir(&self) -> PathBuf {
        self.out.join("concrete")
    }

    pub fn traces_dir(&self) -> PathBuf {
        self.out.join("traces")
    }

    pub fn analysis_dir(&self) -> PathBuf {
        self.out.join("analysis")
    }
}

pub fn load_map(spec: &str) -> Result<RoadMap, PipelineError> {
    match spec.strip_prefix(BUILTIN_PREFIX) {
        Some(name) => {
            let doc = fixtures::fixture_doc(name).ok_or_else(|| {
                PipelineError::Config(format!("unknown built-in map {name:?} (expected one of {:?})", fixtures::FIXTURE_NAMES))
            })?;
            Ok(load_road_map(&doc)?)
        }
        None => Ok(load_road_map_file(spec)?),
    }
}

pub fn load_catalog(cfg: &PipelineConfig) -> Result<(RoadMap, ManeuverCatalog), PipelineError> {
    let map = load_map(&cfg.road_map)?;
    let catalog = enumerate_maneuver_instances(&map, &cfg.junction)?;
    Ok((map, catalog))
}

/// Writes via a temporary file in the same directory, then renames into place.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<(), PipelineError> {
    let dir = path.parent().unwrap_or(Path::new("."));
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io_err(dir))?;
    tmp.write_all(contents).map_err(io_err(path))?;
    tmp.persist(path).map_err(|e| PipelineError::Io { path: path.to_path_buf(), source: e.error })?;
    Ok(())
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), PipelineError> {
    let mut text = serde_json::to_string_pretty(value).expect("artifact serializes");
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, PipelineError> {
    let text = fs::read_to_string(path).map_err(|_| PipelineError::MissingInput(path.to_path_buf()))?;
    serde_json::from_str(&text).map_err(|e| PipelineError::Artifact { path: path.to_path_buf(), reason: e.to_string() })
}

fn with_comment(p: &Provenance, body: &str) -> String {
    format!("{}\n{body}", p.comment_line())
}

/// Sorted files in `dir` with the given extension.
fn list_files(dir: &Path, ext: &str) -> Result<Vec<PathBuf>, PipelineError> {
    let entries = fs::read_dir(dir).map_err(|_| PipelineError::MissingInput(dir.to_path_buf()))?;
    let mut files: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|e| e == ext))
        .collect();
    files.sort();
    Ok(files)
}

// ---- generate ----

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogicalArtifact {
    pub provenance: Provenance,
    pub permutations: u128,
    pub dangerous: usize,
    pub set: LogicalScenarioSet,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenerateSummary {
    pub permutations: u128,
    pub dangerous: usize,
    /// Count after symmetry reduction, when enabled.
    pub reduced: Option<usize>,
    pub path: PathBuf,
}

impl GenerateSummary {
    pub fn lines(&self) -> Vec<String> {
        let mut v = vec![format!("{} permutations, {} dangerous", self.permutations, self.dangerous)];
        if let Some(r) = self.reduced {
            v.push(format!("{}→{} after symmetry reduction", self.dangerous, r));
        }
        v
    }
}

pub fn run_generate(cfg: &PipelineConfig) -> Result<GenerateSummary, PipelineError> {
    cfg.validate()?;
    let (_, catalog) = load_catalog(cfg)?;
    let matrix = OverlapMatrix::new(&catalog, cfg.generation.overlap_threshold).map_err(LogicalGenError::from)?;
    let all = find_logical_scenarios_with(&catalog, &matrix, cfg.n_actors)?;
    let dangerous = all.len();
    let (set, reduced) = if cfg.generation.symmetry_reduction {
        let r = reduce_symmetries(&all);
        let n = r.len();
        (r, Some(n))
    } else {
        (all, None)
    };
    let permutations = permutation_count(&catalog, cfg.n_actors);
    let path = cfg.logical_file();
    write_json(&path, &LogicalArtifact { provenance: cfg.provenance(), permutations, dangerous, set })?;
    Ok(GenerateSummary { permutations, dangerous, reduced, path })
}

// ---- concretize ----

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcreteArtifact {
    pub provenance: Provenance,
    pub scenario: ConcreteScenario,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcretizeSummary {
    pub generated: usize,
    pub eligible: usize,
    pub filtered: usize,
    /// Scenarios showing each violation kind (a scenario may show several).
    pub by_kind: BTreeMap<String, usize>,
}

impl ConcretizeSummary {
    pub fn line(&self) -> String {
        let kinds: Vec<String> =
            ViolationKind::ALL.iter().map(|k| format!("{}: {}", k.as_str(), self.by_kind.get(k.as_str()).copied().unwrap_or(0))).collect();
        format!("{} generated, {} eligible, {} filtered ({})", self.generated, self.eligible, self.filtered, kinds.join(", "))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct ConcreteSummaryArtifact {
    provenance: Provenance,
    #[serde(flatten)]
    summary: ConcretizeSummary,
    eligible_ids: Vec<String>,
}

pub fn concretize_set(cfg: &PipelineConfig, set: &LogicalScenarioSet) -> Result<Vec<ConcreteScenario>, PipelineError> {
    let (map, catalog) = load_catalog(cfg)?;
    if set.junction != catalog.junction_id {
        return Err(PipelineError::Config(format!("logical scenarios are for junction {}, config says {}", set.junction, catalog.junction_id)));
    }
    let cz = Concretizer::new(&map, catalog, cfg.generation.overlap_threshold, cfg.concrete.clone())?;
    let profiles = cfg.profiles();
    if set.n_actors != profiles.len() && !set.scenarios.is_empty() {
        return Err(PipelineError::Config(format!("logical scenarios have {} actors, config says {}", set.n_actors, cfg.n_actors)));
    }
    Ok(set.scenarios.par_iter().map(|l| cz.concretize(l, &profiles)).collect::<Result<Vec<_>, _>>()?)
}

pub fn summarize(scenarios: &[ConcreteScenario]) -> ConcretizeSummary {
    let eligible = scenarios.iter().filter(|s| s.eligible()).count();
    let by_kind = ViolationKind::ALL
        .iter()
        .map(|k| (k.as_str().to_string(), scenarios.iter().filter(|s| s.static_report.has(*k)).count()))
        .collect();
    ConcretizeSummary { generated: scenarios.len(), eligible, filtered: scenarios.len() - eligible, by_kind }
}

pub fn run_concretize(cfg: &PipelineConfig, logical_file: Option<&Path>) -> Result<ConcretizeSummary, PipelineError> {
    cfg.validate()?;
    let default_file = cfg.logical_file();
    let file = logical_file.unwrap_or(&default_file);
    if !file.exists() {
        return Err(PipelineError::MissingInput(file.to_path_buf()));
    }
    let art: LogicalArtifact = read_json(file)?;
    let scenarios = concretize_set(cfg, &art.set)?;
    let prov = cfg.provenance();
    let dir = cfg.concrete_dir();
    if dir.exists() {
        // drop scenario files from earlier configurations
        for stale in list_files(&dir, "json")? {
            fs::remove_file(&stale).map_err(io_err(&stale))?;
        }
    }
    fs::create_dir_all(&dir).map_err(io_err(&dir))?;
    scenarios.par_iter().try_for_each(|sc| {
        write_json(&dir.join(format!("{}.json", file_stem(&sc.id))), &ConcreteArtifact { provenance: prov.clone(), scenario: sc.clone() })
    })?;
    let summary = summarize(&scenarios);
    let eligible_ids = scenarios.iter().filter(|s| s.eligible()).map(|s| s.id.clone()).collect();
    write_json(
        &cfg.out.join("concrete_summary.json"),
        &ConcreteSummaryArtifact { provenance: prov, summary: summary.clone(), eligible_ids },
    )?;
    Ok(summary)
}

// ---- simulate ----

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceArtifact {
    pub provenance: Provenance,
    pub scenario_id: String,
    pub policy: String,
    pub reference: ReferencePath,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimulateSummary {
    pub scenarios: usize,
    pub written: usize,
    pub skipped: usize,
}

impl SimulateSummary {
    pub fn line(&self) -> String {
        format!("{} eligible scenarios, {} traces written, {} already present", self.scenarios, self.written, self.skipped)
    }
}

/// Scenario id made safe for use in a file name.
pub fn file_stem(id: &str) -> String {
    id.chars().map(|c| if c.is_ascii_alphanumeric() || matches!(c, '_' | '-') { c } else { '_' }).collect()
}

pub fn trace_stem(scenario_id: &str, policy: &EgoPolicy, seed: u64) -> String {
    format!("{}.{}.s{seed}", file_stem(scenario_id), policy.name())
}

pub fn load_concrete_dir(dir: &Path) -> Result<Vec<ConcreteScenario>, PipelineError> {
    list_files(dir, "json")?.iter().map(|p| read_json::<ConcreteArtifact>(p).map(|a| a.scenario)).collect()
}

/// Medoid of `runs` ego-only simulations with seeds `seed, seed + 1, …`.
pub fn reference_path(sc: &ConcreteScenario, policy: &EgoPolicy, sim: &SimConfig, seed: u64, runs: u64) -> Result<ReferencePath, PipelineError> {
    let solo = without_externals(sc);
    let mut paths = Vec::new();
    let mut ids = Vec::new();
    for i in 0..runs {
        let cfg = SimConfig { rng_seed: seed + i, ..sim.clone() };
        let tr = simulate(&solo, policy, &cfg)?;
        paths.push(driven_path(&tr.ego_positions())?);
        ids.push(tr.header.run_id);
    }
    Ok(medoid_reference_path(&paths, &ids)?)
}

/// Whether a trace from an earlier run was produced under the same configuration.
fn trace_is_current(path: &Path, prov: &Provenance) -> bool {
    let Ok(text) = fs::read_to_string(path) else { return false };
    read_trace_jsonl(&text).is_ok_and(|t| t.header.provenance.as_ref() == Some(prov))
}

pub fn run_simulate(cfg: &PipelineConfig, concrete_dir: Option<&Path>) -> Result<SimulateSummary, PipelineError> {
    cfg.validate()?;
    let default_dir = cfg.concrete_dir();
    let dir = concrete_dir.unwrap_or(&default_dir);
    let scenarios: Vec<ConcreteScenario> = load_concrete_dir(dir)?.into_iter().filter(|s| s.eligible()).collect();
    let prov = cfg.provenance();
    let traces = cfg.traces_dir();
    let sim = &cfg.simulation;
    let mut jobs = Vec::new();
    for sc in &scenarios {
        for pol in &sim.policies {
            for r in 0..sim.repetitions {
                jobs.push((sc, pol, sim.seed + r));
            }
        }
    }
    let refs: Vec<(&ConcreteScenario, &EgoPolicy)> =
        scenarios.iter().flat_map(|sc| sim.policies.iter().map(move |p| (sc, p))).collect();
    refs.par_iter().try_for_each(|(sc, pol)| -> Result<(), PipelineError> {
        let path = traces.join("reference").join(format!("{}.{}.json", file_stem(&sc.id), pol.name()));
        if read_json::<ReferenceArtifact>(&path).is_ok_and(|a| a.provenance == prov) {
            return Ok(());
        }
        let reference = reference_path(sc, pol, &sim.config, sim.seed, sim.reference_runs)?;
        write_json(&path, &ReferenceArtifact { provenance: prov.clone(), scenario_id: sc.id.clone(), policy: pol.name().into(), reference })
    })?;
    let written: Vec<bool> = jobs
        .par_iter()
        .map(|(sc, pol, seed)| -> Result<bool, PipelineError> {
            let stem = trace_stem(&sc.id, pol, *seed);
            let jsonl = traces.join(format!("{stem}.jsonl"));
            let csv = traces.join(format!("{stem}.csv"));
            if csv.exists() && trace_is_current(&jsonl, &prov) {
                return Ok(false);
            }
            let mut tr = simulate(sc, pol, &SimConfig { rng_seed: *seed, ..sim.config.clone() })?;
            tr.header.provenance = Some(prov.clone());
            write_atomic(&csv, with_comment(&prov, &trace_to_csv(&tr)).as_bytes())?;
            write_atomic(&jsonl, trace_to_jsonl(&tr)?.as_bytes())?;
            Ok(true)
        })
        .collect::<Result<_, _>>()?;
    let n_written = written.iter().filter(|w| **w).count();
    Ok(SimulateSummary { scenarios: scenarios.len(), written: n_written, skipped: written.len() - n_written })
}

// ---- analyze / report ----

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutcomesArtifact {
    pub provenance: Provenance,
    pub runs: Vec<RunOutcome>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportArtifact {
    pub provenance: Provenance,
    pub reports: Vec<AggregateReport>,
}

fn outcomes_csv(runs: &[RunOutcome]) -> String {
    let mut out = String::from("run_id,scenario_id,policy,seed,n_actors,ego_mi,ego_maneuver,outcome,avoidability,pm_detected,pm_locations\n");
    for r in runs {
        let locs: Vec<String> = r.pm_locations.iter().map(|s| format!("{s:.1}")).collect();
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{}\n",
            r.run_id,
            r.scenario_id,
            r.policy,
            r.seed,
            r.n_actors,
            r.ego_mi,
            r.ego_maneuver,
            variant_name(&r.outcome),
            variant_name(&r.avoidability),
            r.pm_detected,
            locs.join(";")
        ));
    }
    out
}

/// Serialized (snake_case) name of a unit enum variant.
fn variant_name<T: Serialize>(v: &T) -> String {
    serde_json::to_value(v).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AnalyzeSummary {
    pub runs: usize,
    pub included: usize,
}

impl AnalyzeSummary {
    pub fn line(&self) -> String {
        format!("{} runs analyzed, {} included after excluding unavoidable collisions", self.runs, self.included)
    }
}

pub fn run_analyze(cfg: &PipelineConfig, traces_dir: Option<&Path>) -> Result<AnalyzeSummary, PipelineError> {
    cfg.validate()?;
    let default_dir = cfg.traces_dir();
    let dir = traces_dir.unwrap_or(&default_dir);
    let files = list_files(dir, "jsonl")?;
    if files.is_empty() {
        return Err(PipelineError::MissingInput(dir.to_path_buf()));
    }
    let (_, catalog) = load_catalog(cfg)?;
    let runs: Vec<RunOutcome> = files
        .par_iter()
        .map(|p| -> Result<RunOutcome, PipelineError> {
            let text = fs::read_to_string(p).map_err(io_err(p))?;
            let tr = read_trace_jsonl(&text).map_err(|e| PipelineError::Artifact { path: p.clone(), reason: e.to_string() })?;
            let ego = tr.header.actors.first().cloned().unwrap_or_default();
            let maneuver = catalog
                .get(&ego)
                .map(|m| m.maneuver_type.as_str().to_string())
                .ok_or_else(|| PipelineError::Artifact { path: p.clone(), reason: format!("ego maneuver {ego} not in catalog") })?;
            let ref_path = dir.join("reference").join(format!("{}.{}.json", file_stem(&tr.header.scenario_id), tr.header.policy.name()));
            let reference = if ref_path.exists() { Some(read_json::<ReferenceArtifact>(&ref_path)?.reference) } else { None };
            Ok(analyze_run(&tr, reference.as_ref(), &maneuver)?)
        })
        .collect::<Result<_, _>>()?;
    let prov = cfg.provenance();
    let out = cfg.analysis_dir();
    write_json(&out.join("outcomes.json"), &OutcomesArtifact { provenance: prov.clone(), runs: runs.clone() })?;
    write_atomic(&out.join("outcomes.csv"), with_comment(&prov, &outcomes_csv(&runs)).as_bytes())?;
    let reports = run_report(cfg, None)?;
    Ok(AnalyzeSummary { runs: runs.len(), included: reports.first().map_or(0, |r| r.included) })
}

/// Aggregates `outcomes.json` into the markdown, JSON and per-grouping CSV reports.
pub fn run_report(cfg: &PipelineConfig, outcomes_file: Option<&Path>) -> Result<Vec<AggregateReport>, PipelineError> {
    let out = cfg.analysis_dir();
    let default_file = out.join("outcomes.json");
    let file = outcomes_file.unwrap_or(&default_file);
    let art: OutcomesArtifact = read_json(file)?;
    let reports = cfg.analysis.schemes.iter().map(|s| aggregate(&art.runs, *s)).collect::<Result<Vec<_>, _>>()?;
    let prov = cfg.provenance();
    let mut md = String::from("# Simulation outcome report\n\n");
    md.push_str(&render_markdown(&reports));
    md.push_str(&format!("<!-- {} -->\n", prov.comment_line().trim_start_matches("# ")));
    write_atomic(&out.join("report.md"), md.as_bytes())?;
    write_json(&out.join("report.json"), &ReportArtifact { provenance: prov.clone(), reports: reports.clone() })?;
    for r in &reports {
        write_atomic(&out.join(format!("groups_{}.csv", r.scheme.as_str())), with_comment(&prov, &render_csv(r)).as_bytes())?;
    }
    Ok(reports)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineSummary {
    pub generate: GenerateSummary,
    pub concretize: ConcretizeSummary,
    pub simulate: SimulateSummary,
    pub analyze: Option<AnalyzeSummary>,
}

/// All stages in order. Analysis is skipped when no scenario is eligible.
pub fn run_pipeline(cfg: &PipelineConfig) -> Result<PipelineSummary, PipelineError> {
    let generate = run_generate(cfg)?;
    let concretize = run_concretize(cfg, None)?;
    let simulate = run_simulate(cfg, None)?;
    let analyze = if simulate.scenarios > 0 { Some(run_analyze(cfg, None)?) } else { None };
    Ok(PipelineSummary { generate, concretize, simulate, analyze })
}
