//! Experiment configuration, dispatch and on-disk artifacts shared by the
//! command-line front end and the tests.

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{invalid, Error, Result};
use crate::firefighter::{lambda_c_estimate, FireTree};
use crate::flow_cut::{ibn_estimate, igr_estimate, CutSource, DepthSchedule};
use crate::generators::{self, DegreeSequence, DEFAULT_MEMORY_CAP};
use crate::grigorchuk::{loop_erase, search_word, BranchMarks};
use crate::nathanson::bfs_ball;
use crate::percolation::{conductance_bound, exact_survival, mc_survival, mc_survival_spherical, theta_estimate, PercolationLaw};
use crate::tree::Tree;
use crate::walks::{psi_field, rt_estimate, sample_conductances, summarize, walk_trials, ConductanceField, DepthChain, Network};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    /// Degree 2 exactly at depths `k(k+3)/2`, one child elsewhere.
    Seq,
    ThreeOne,
    Binary,
    Path,
    /// Branch marks read from a file.
    Marks,
    /// Lexicographic spanning tree of the matrix semigroup.
    Nathanson,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::Seq => "seq",
            Family::ThreeOne => "three-one",
            Family::Binary => "binary",
            Family::Path => "path",
            Family::Marks => "marks",
            Family::Nathanson => "nathanson",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TreeSource {
    Family {
        family: Family,
        depth: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        marks: Option<PathBuf>,
    },
    File {
        path: PathBuf,
    },
}

impl TreeSource {
    pub fn label(&self) -> String {
        match self {
            TreeSource::Family { family, .. } => family.name().to_string(),
            TreeSource::File { path } => {
                format!("file:{}", path.file_name().map_or_else(|| path.display().to_string(), |n| n.to_string_lossy().into_owned()))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Command {
    Generate { source: TreeSource, out: PathBuf },
    EstimateIbn { source: TreeSource, grid: Vec<f64>, schedule: Vec<usize>, out: PathBuf },
    Walk { source: TreeSource, lambda: f64, trials: u64, step_cap: u64, out: PathBuf },
    Rwrc { source: TreeSource, lambda: f64, gammas: Vec<f64>, schedule: Vec<usize>, out: PathBuf },
    Percolate { source: TreeSource, lambdas: Vec<f64>, depths: Vec<usize>, mc_trials: Option<u64>, out: PathBuf },
    Firefight { source: TreeSource, k: usize, gammas: Vec<f64>, factor: f64, horizons: Vec<usize>, out: PathBuf },
    Nathanson { depth: usize, emit_tree: Option<PathBuf>, emit_stats: PathBuf },
    Grig { length: usize, beam: usize, emit_marks: PathBuf },
    Report { dir: PathBuf, out: PathBuf },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Generate { .. } => "generate",
            Command::EstimateIbn { .. } => "estimate-ibn",
            Command::Walk { .. } => "walk",
            Command::Rwrc { .. } => "rwrc",
            Command::Percolate { .. } => "percolate",
            Command::Firefight { .. } => "firefight",
            Command::Nathanson { .. } => "nathanson",
            Command::Grig { .. } => "grig",
            Command::Report { .. } => "report",
        }
    }

    fn source(&self) -> Option<&TreeSource> {
        match self {
            Command::Generate { source, .. }
            | Command::EstimateIbn { source, .. }
            | Command::Walk { source, .. }
            | Command::Rwrc { source, .. }
            | Command::Percolate { source, .. }
            | Command::Firefight { source, .. } => Some(source),
            _ => None,
        }
    }
}

/// Everything a run depends on besides the library version.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    #[serde(flatten)]
    pub command: Command,
    pub seed: u64,
    #[serde(default)]
    pub threads: Option<usize>,
    pub out_dir: PathBuf,
    #[serde(default = "default_cap")]
    pub memory_cap: usize,
}

fn default_cap() -> usize {
    DEFAULT_MEMORY_CAP
}

impl ExperimentConfig {
    pub fn new(command: Command, seed: u64, out_dir: impl Into<PathBuf>) -> Self {
        Self { command, seed, threads: None, out_dir: out_dir.into(), memory_cap: DEFAULT_MEMORY_CAP }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Parse { line: e.line(), msg: e.to_string() })
    }

    /// Reads a config file or the `config` entry of a manifest.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        let value: Value = serde_json::from_str(&text).map_err(|e| Error::Parse { line: e.line(), msg: e.to_string() })?;
        match value.get("config") {
            Some(c) => serde_json::from_value(c.clone()).map_err(|e| Error::Parse { line: 0, msg: e.to_string() }),
            None => Self::from_json(&text),
        }
    }

    fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.out_dir.join(p)
        }
    }
}

/// What a run wrote.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunOutput {
    pub files: Vec<PathBuf>,
    pub summary: Value,
}

enum Loaded {
    Spherical(DegreeSequence),
    Arena(Tree),
}

impl Loaded {
    fn cuts(&self) -> &dyn CutSource {
        match self {
            Loaded::Spherical(d) => d,
            Loaded::Arena(t) => t,
        }
    }

    fn fire(&self) -> &dyn FireTree {
        match self {
            Loaded::Spherical(d) => d,
            Loaded::Arena(t) => t,
        }
    }

    fn percolable(&self) -> &dyn crate::percolation::Percolable {
        match self {
            Loaded::Spherical(d) => d,
            Loaded::Arena(t) => t,
        }
    }

    fn network(&self) -> &dyn Network {
        match self {
            Loaded::Spherical(d) => d,
            Loaded::Arena(t) => t,
        }
    }

    fn horizon(&self) -> usize {
        self.cuts().horizon()
    }

    fn arena(&self, depth: usize, cap: usize) -> Result<std::borrow::Cow<'_, Tree>> {
        match self {
            Loaded::Arena(t) => Ok(std::borrow::Cow::Borrowed(t)),
            Loaded::Spherical(d) => Ok(std::borrow::Cow::Owned(generators::spherically_symmetric(d, depth, cap)?)),
        }
    }
}

/// Reads one `0|1` per line, skipping blank lines and `#` comments.
pub fn read_marks(path: &Path) -> Result<Vec<bool>> {
    let file = fs::File::open(path)?;
    let mut marks = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        let s = line.trim();
        if s.is_empty() || s.starts_with('#') {
            continue;
        }
        marks.push(match s {
            "0" => false,
            "1" => true,
            _ => return Err(Error::Parse { line: i + 1, msg: format!("expected 0 or 1, found {s:?}") }),
        });
    }
    Ok(marks)
}

fn load(source: &TreeSource, cap: usize) -> Result<Loaded> {
    match source {
        TreeSource::File { path } => Ok(Loaded::Arena(Tree::read_text(BufReader::new(fs::File::open(path)?))?)),
        TreeSource::Family { family, depth, marks } => {
            let n = *depth;
            Ok(match family {
                Family::Seq => Loaded::Spherical(DegreeSequence::sequence_tree(n)),
                Family::Binary => Loaded::Spherical(DegreeSequence::constant(2, n)?),
                Family::Path => Loaded::Spherical(DegreeSequence::constant(1, n)?),
                Family::ThreeOne => Loaded::Arena(generators::three_one_stretched(n, cap)?),
                Family::Nathanson => Loaded::Arena(bfs_ball(n, cap)?.lex_tree()?),
                Family::Marks => {
                    let path = marks.as_ref().ok_or_else(|| invalid("the marks family needs a marks file"))?;
                    let m = read_marks(path)?;
                    if m.len() < n {
                        return Err(invalid(format!("{} marks in file, depth {n} requested", m.len())));
                    }
                    Loaded::Spherical(DegreeSequence::from_marks(&m[..n]))
                }
            })
        }
    }
}

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    Ok(csv::Writer::from_path(path)?)
}

fn fmt_f64(x: f64) -> String {
    format!("{x:.12e}")
}

fn check_schedule(depths: &[usize], horizon: usize) -> Result<DepthSchedule> {
    let sched = DepthSchedule::with_depths(depths.to_vec())?;
    if sched.max_depth() > horizon {
        return Err(Error::TooShallow { available: horizon, requested: sched.max_depth() });
    }
    Ok(sched)
}

/// Runs a configured experiment, writing its data files and a manifest beside each.
pub fn run(config: &ExperimentConfig) -> Result<RunOutput> {
    match config.threads {
        Some(0) => Err(invalid("thread count must be positive")),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| invalid(e.to_string()))?
            .install(|| run_inner(config)),
        None => run_inner(config),
    }
}

fn run_inner(config: &ExperimentConfig) -> Result<RunOutput> {
    fs::create_dir_all(&config.out_dir)?;
    let cap = config.memory_cap;
    let seed = config.seed;
    let loaded = config.command.source().map(|s| load(s, cap)).transpose()?;
    let tree = || loaded.as_ref().expect("command has a tree source");
    let (files, summary) = match &config.command {
        Command::Generate { out, .. } => {
            let path = config.resolve(out);
            let t = tree().arena(tree().horizon(), cap)?;
            t.write_text(std::io::BufWriter::new(fs::File::create(&path)?))?;
            (vec![path], json!({ "vertices": t.len(), "height": t.height() }))
        }
        Command::EstimateIbn { grid, schedule, out, .. } => {
            let t = tree();
            let sched = check_schedule(schedule, t.horizon())?;
            let sweep = ibn_estimate(t.cuts(), &sched, grid)?;
            let path = config.resolve(out);
            let mut w = csv_writer(&path)?;
            w.write_record(["lambda", "depth", "mincut", "classification"])?;
            for row in &sweep.rows {
                let class = sweep.class_of(row.param).expect("classified");
                w.write_record([row.param.to_string(), row.depth.to_string(), row.value.to_string(), class.to_string()])?;
            }
            w.flush()?;
            let growth = igr_estimate(t.cuts(), sched.max_depth(), grid)?;
            (vec![path], json!({ "kind": "ibn", "bracket": sweep.bracket, "igr": growth }))
        }
        Command::Walk { lambda, trials, step_cap, out, .. } => {
            let c = ConductanceField::Deterministic { lambda: *lambda };
            let results = match tree() {
                Loaded::Spherical(d) => DepthChain::new(d, &c)?.trials(*step_cap, *trials, seed),
                Loaded::Arena(t) => walk_trials(t, &c, *step_cap, *trials, seed)?,
            };
            let path = config.resolve(out);
            let mut w = csv_writer(&path)?;
            w.write_record(["trial", "returned", "steps", "maxdepth"])?;
            for (i, r) in results.iter().enumerate() {
                w.write_record([i.to_string(), (r.returned as u8).to_string(), r.steps.to_string(), r.max_depth.to_string()])?;
            }
            w.flush()?;
            let h = tree().horizon();
            let conductance = tree().network().effective_conductance(&c, h)?;
            (vec![path], json!({ "kind": "walk", "returns": summarize(&results), "effective_conductance": conductance }))
        }
        Command::Rwrc { lambda, gammas, schedule, out, .. } => {
            let sched = check_schedule(schedule, tree().horizon())?;
            let n = sched.max_depth();
            let arena = tree().arena(n, cap)?;
            let c = sample_conductances(&arena, *lambda, seed)?;
            let psi = psi_field(&arena, &c, n)?;
            let sweep = rt_estimate(&*arena, &psi.profile(), gammas, &sched)?;
            let path = config.resolve(out);
            let mut w = csv_writer(&path)?;
            w.write_record(["gamma", "depth", "rtvalue", "class"])?;
            for row in &sweep.rows {
                let class = sweep.class_of(row.param).expect("classified");
                w.write_record([row.param.to_string(), row.depth.to_string(), row.value.to_string(), class.to_string()])?;
            }
            w.flush()?;
            (vec![path], json!({ "kind": "rt", "lambda": lambda, "bracket": sweep.bracket }))
        }
        Command::Percolate { lambdas, depths, mc_trials, out, .. } => {
            let t = tree();
            let sched = check_schedule(depths, t.horizon())?;
            let path = config.resolve(out);
            let mut w = csv_writer(&path)?;
            w.write_record(["lambda", "depth", "exact", "mc", "stderr", "bound"])?;
            for &lambda in lambdas {
                let law = PercolationLaw::depth(lambda)?;
                for &n in &sched.depths {
                    let exact = exact_survival(t.percolable(), &law, n)?;
                    let bound = conductance_bound(t.network(), &law, n)?;
                    let mc = match mc_trials {
                        None => None,
                        Some(k) => Some(match t {
                            Loaded::Spherical(d) => mc_survival_spherical(d, &law, n, *k, seed)?,
                            Loaded::Arena(a) => mc_survival(a, &law, n, *k, seed)?,
                        }),
                    };
                    w.write_record([
                        lambda.to_string(),
                        n.to_string(),
                        exact.to_string(),
                        mc.map_or(String::new(), |m| fmt_f64(m.estimate)),
                        mc.map_or(String::new(), |m| fmt_f64(m.stderr)),
                        bound.to_string(),
                    ])?;
                }
            }
            w.flush()?;
            let theta = theta_estimate(t.percolable(), &sched, lambdas)?;
            (vec![path], json!({ "kind": "theta", "bracket": theta.bracket }))
        }
        Command::Firefight { k, gammas, factor, horizons, out, .. } => {
            let sweep = lambda_c_estimate(tree().fire(), *k, gammas, *factor, horizons)?;
            let path = config.resolve(out);
            let mut w = csv_writer(&path)?;
            w.write_record(["gamma", "horizon", "contained", "fire_size", "protected_size"])?;
            for a in &sweep.attempts {
                w.write_record([
                    a.gamma.to_string(),
                    a.horizon.to_string(),
                    (a.outcome.verdict.contained() as u8).to_string(),
                    a.outcome.fire_size.to_string(),
                    a.outcome.protected_size.to_string(),
                ])?;
            }
            w.flush()?;
            (vec![path], json!({ "kind": "fire", "bracket": sweep.bracket }))
        }
        Command::Nathanson { depth, emit_tree, emit_stats } => {
            let ball = bfs_ball(*depth, cap)?;
            let mut files = Vec::new();
            let stats = config.resolve(emit_stats);
            let mut w = csv_writer(&stats)?;
            w.write_record(["n", "ball", "level", "loglog_ratio"])?;
            for r in ball.stats() {
                w.write_record([r.n.to_string(), r.ball.to_string(), r.level.to_string(), fmt_f64(r.loglog_ratio)])?;
            }
            w.flush()?;
            files.push(stats);
            if let Some(p) = emit_tree {
                let p = config.resolve(p);
                ball.lex_tree()?.write_text(std::io::BufWriter::new(fs::File::create(&p)?))?;
                files.push(p);
            }
            (files, json!({ "kind": "nathanson", "elements": ball.len() - 1 }))
        }
        Command::Grig { length, beam, emit_marks } => {
            let found = search_word(*length, *beam, seed)?;
            let q = loop_erase(&found.word)?;
            let marks = BranchMarks::from_word(&q)?;
            let path = config.resolve(emit_marks);
            if let Some(dir) = path.parent() {
                fs::create_dir_all(dir)?;
            }
            let mut f = std::io::BufWriter::new(fs::File::create(&path)?);
            writeln!(f, "# word {}", found.word)?;
            writeln!(f, "# erased {}", q)?;
            let orbit: Vec<String> = marks.orbit.iter().map(usize::to_string).collect();
            writeln!(f, "# orbit {}", orbit.join(","))?;
            for m in marks.depth_marks() {
                writeln!(f, "{}", m as u8)?;
            }
            f.flush()?;
            (vec![path], json!({ "kind": "grig", "orbit": found.orbit, "erased_length": q.len(), "horizon": marks.horizon() }))
        }
        Command::Report { dir, out } => {
            let path = config.resolve(out);
            let rows = report(&config.resolve(dir))?;
            write_report(&rows, &path)?;
            (vec![path], json!({ "kind": "report", "rows": rows.len() }))
        }
    };
    for f in &files {
        write_manifest(config, f, &summary)?;
    }
    Ok(RunOutput { files, summary })
}

pub fn manifest_path(data: &Path) -> PathBuf {
    let mut name = data.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".manifest.json");
    data.with_file_name(name)
}

/// The timestamp is the last field so it sits alone on the final line.
fn write_manifest(config: &ExperimentConfig, data: &Path, summary: &Value) -> Result<()> {
    let stamp = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let body = json!({
        "config": config,
        "version": VERSION,
        "seed": config.seed,
        "data": data.file_name().map(|n| n.to_string_lossy().into_owned()),
        "summary": summary,
    });
    let text = serde_json::to_string_pretty(&body)?;
    let mut text = text.trim_end().trim_end_matches('}').trim_end().to_string();
    text.push_str(&format!(",\n  \"timestamp\": {stamp}\n}}\n"));
    fs::write(manifest_path(data), text)?;
    Ok(())
}

/// One line of the summary table.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ReportRow {
    pub family: String,
    pub seed: u64,
    pub igr: Option<f64>,
    pub ibn: Option<String>,
    pub theta: Option<String>,
    pub lambda_c: Option<String>,
    pub rt: Vec<String>,
}

/// Merges manifested runs in `dir` into rows keyed by family and seed.
pub fn report(dir: &Path) -> Result<Vec<ReportRow>> {
    let mut rows: BTreeMap<(String, u64), ReportRow> = BTreeMap::new();
    let mut entries: Vec<PathBuf> = fs::read_dir(dir)?.filter_map(|e| e.ok().map(|e| e.path())).collect();
    entries.sort();
    for path in entries {
        let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
        if name.ends_with(".manifest.json") || path.is_dir() {
            continue;
        }
        let mpath = manifest_path(&path);
        if !mpath.exists() {
            eprintln!("warning: {} has no manifest, skipped", path.display());
            continue;
        }
        let manifest: Value = match fs::read_to_string(&mpath).map_err(Error::from).and_then(|s| Ok(serde_json::from_str(&s)?)) {
            Ok(v) => v,
            Err(e) => {
                eprintln!("warning: unreadable manifest {}: {e}", mpath.display());
                continue;
            }
        };
        let Ok(config) = serde_json::from_value::<ExperimentConfig>(manifest["config"].clone()) else {
            eprintln!("warning: manifest {} has no usable config, skipped", mpath.display());
            continue;
        };
        let Some(source) = config.command.source() else { continue };
        let key = (source.label(), config.seed);
        let row = rows.entry(key.clone()).or_insert_with(|| ReportRow { family: key.0.clone(), seed: key.1, ..Default::default() });
        let summary = &manifest["summary"];
        let bracket = || serde_json::from_value::<crate::flow_cut::Bracket>(summary["bracket"].clone()).ok().map(|b| b.to_string());
        match summary["kind"].as_str() {
            Some("ibn") => {
                row.ibn = bracket();
                row.igr = summary["igr"]["estimate"].as_f64();
            }
            Some("theta") => row.theta = bracket(),
            Some("fire") => row.lambda_c = bracket(),
            Some("rt") => {
                if let Some(b) = bracket() {
                    row.rt.push(format!("λ={}: {b}", summary["lambda"]));
                }
            }
            _ => {}
        }
    }
    Ok(rows.into_values().collect())
}

pub fn write_report(rows: &[ReportRow], path: &Path) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["family", "seed", "igr", "ibn", "theta", "lambda_c", "rt"])?;
    for r in rows {
        w.write_record([
            r.family.clone(),
            r.seed.to_string(),
            r.igr.map_or(String::new(), |x| x.to_string()),
            r.ibn.clone().unwrap_or_default(),
            r.theta.clone().unwrap_or_default(),
            r.lambda_c.clone().unwrap_or_default(),
            r.rt.join("; "),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Parses `a:b:step` or a comma list of reals.
pub fn parse_grid(s: &str) -> Result<Vec<f64>> {
    let num = |t: &str| t.trim().parse::<f64>().map_err(|_| invalid(format!("not a number: {t:?}")));
    let parts: Vec<&str> = s.split(':').collect();
    match parts.as_slice() {
        [a, b, step] => crate::flow_cut::grid(num(a)?, num(b)?, num(step)?),
        [_] => s.split(',').map(num).collect(),
        _ => Err(invalid(format!("grid must be a:b:step or a comma list, got {s:?}"))),
    }
}

/// Parses a comma list of depths.
pub fn parse_depths(s: &str) -> Result<Vec<usize>> {
    s.split(',')
        .map(|t| t.trim().parse::<usize>().map_err(|_| invalid(format!("not a depth: {t:?}"))))
        .collect()
}

/// Exit status for an error: 2 for bad input, 1 otherwise.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidArgument(_) | Error::Parse { .. } | Error::Json(_) | Error::TooShallow { .. } => 2,
        _ => 1,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_round_trips() {
        let cfg = ExperimentConfig::new(
            Command::EstimateIbn {
                source: TreeSource::Family { family: Family::Seq, depth: 64, marks: None },
                grid: vec![0.3, 0.5],
                schedule: vec![16, 32, 64],
                out: "ibn.csv".into(),
            },
            7,
            "/tmp/x",
        );
        let text = cfg.to_json().unwrap();
        assert_eq!(ExperimentConfig::from_json(&text).unwrap(), cfg);
    }

    #[test]
    fn bad_config_reports_a_line() {
        let err = ExperimentConfig::from_json("{\n  \"command\": \"walk\",\n  \"seed\": \"x\"\n}").unwrap_err();
        assert!(matches!(err, Error::Parse { line, .. } if line > 0));
        assert_eq!(exit_code(&err), 2);
    }

    #[test]
    fn grids_parse() {
        assert_eq!(parse_grid("0.1,0.5").unwrap(), vec![0.1, 0.5]);
        assert_eq!(parse_grid("0.1:0.3:0.1").unwrap().len(), 3);
        assert!(parse_grid("0.1:0.3").is_err());
        assert_eq!(parse_depths("16, 32").unwrap(), vec![16, 32]);
    }

    #[test]
    fn manifest_beside_data() {
        assert_eq!(manifest_path(Path::new("/a/b.csv")), PathBuf::from("/a/b.csv.manifest.json"));
    }
}
