use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use cano_core::candidates::{generate_candidates, CandidateTag};
use cano_core::config::AppConfig;
use cano_core::geometry::{normalize_to_unit_sphere, Rotation};
use cano_core::io::{
    self, export_canonical, labels, load_template_registry, ply, read_annotations, read_candidate_records,
    read_poses, read_registry_file, write_candidate_records, write_poses, CandidateRecord, ExportOptions,
    ManifestEntry, ObjectManifest, PoseRecord, PoseSource, RegistryEntry, RegistryFile,
};
use cano_core::metrics::{accuracy_at, ErrorSample, MetricReport, SymmetrySpec};
use cano_core::service::{serve, Catalog, Service, SystemClock};
use cano_core::stability::{ExternalCommandScorer, UprightScorer};
use cano_core::synthetic;

#[derive(Parser)]
#[command(name = "cano", version, about = "Candidate canonical poses for part-labeled 3D objects")]
struct Cli {
    /// TOML config file; flags below override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    sample_count: Option<usize>,
    /// Yaw grid step in degrees.
    #[arg(long, global = true)]
    grid_step: Option<f64>,
    /// Width of the semantic Gaussian, radians.
    #[arg(long, global = true)]
    sigma: Option<f64>,
    #[arg(long, global = true)]
    lease_seconds: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample and normalize every object into point clouds.
    Preprocess(PreprocessArgs),
    /// Generate the five candidate rotations for every object.
    Candidates(CandidatesArgs),
    /// Run the annotation service.
    Serve(ServeArgs),
    /// Score predicted poses or candidate sets against ground truth.
    Evaluate(EvaluateArgs),
    /// Write the canonicalized dataset from the annotation log.
    Export(ExportArgs),
    /// Write a synthetic posed suite with templates and ground truth.
    Synth(SynthArgs),
}

#[derive(Args)]
struct PreprocessArgs {
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct CandidatesArgs {
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long)]
    templates: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Program that scores upright poses instead of the stability heuristic.
    #[arg(long)]
    upright_command: Option<PathBuf>,
}

#[derive(Args)]
struct ServeArgs {
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long)]
    templates: PathBuf,
    #[arg(long)]
    candidates: PathBuf,
    #[arg(long)]
    log: PathBuf,
    #[arg(long, default_value_t = 8080)]
    port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    host: String,
    /// Directory with the UI bundle, served at `/`.
    #[arg(long)]
    ui: Option<PathBuf>,
}

#[derive(Args)]
struct EvaluateArgs {
    #[arg(long)]
    gt: PathBuf,
    /// Predicted poses; exactly one of --pred and --candidates.
    #[arg(long)]
    pred: Option<PathBuf>,
    #[arg(long)]
    candidates: Option<PathBuf>,
    /// Manifest and template registry, to look up each object's symmetry.
    #[arg(long, requires = "templates")]
    manifest: Option<PathBuf>,
    #[arg(long, requires = "manifest")]
    templates: Option<PathBuf>,
    /// Machine-readable report.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct ExportArgs {
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long)]
    candidates: PathBuf,
    #[arg(long)]
    log: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 20)]
    count: usize,
    #[arg(long, default_value_t = 7)]
    seed: u64,
}

fn main() -> Result<()> {
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()),
        )
        .with_writer(std::io::stderr)
        .init();
    let cli = Cli::parse();
    let cfg = load_config(&cli)?;
    match cli.command {
        Command::Preprocess(a) => preprocess(&cfg, &a),
        Command::Candidates(a) => candidates(&cfg, &a),
        Command::Serve(a) => serve_cmd(&cfg, &a),
        Command::Evaluate(a) => evaluate(&a),
        Command::Export(a) => export(&cfg, &a),
        Command::Synth(a) => synth(&cfg, &a),
    }
}

fn load_config(cli: &Cli) -> Result<AppConfig> {
    let mut cfg = match &cli.config {
        Some(p) => AppConfig::read(p)?,
        None => AppConfig::default(),
    };
    if let Some(n) = cli.sample_count {
        cfg.load.sample_count = n;
    }
    if let Some(s) = cli.grid_step {
        cfg.criterion.grid_step_deg = s;
    }
    if let Some(s) = cli.sigma {
        cfg.criterion.gaussian_sigma = s;
    }
    if let Some(s) = cli.lease_seconds {
        cfg.service.lease_seconds = s;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn preprocess(cfg: &AppConfig, a: &PreprocessArgs) -> Result<()> {
    let manifest = ObjectManifest::read(&a.manifest)?;
    fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    let mut entries = Vec::with_capacity(manifest.len());
    for entry in &manifest.objects {
        let loaded = io::load_object(&manifest.resolve(entry), &cfg.load_options())?;
        let (cloud, _) = normalize_to_unit_sphere(&loaded.cloud)?;
        let name = format!("{}.ply", entry.id);
        let path = a.out.join(&name);
        ply::write_cloud(&path, &cloud, ply::Encoding::BinaryLittleEndian)?;
        if let (Some(l), Some(names)) = (cloud.labels(), cloud.part_names()) {
            labels::write(&labels::sidecar_path(&path), names, l)?;
        }
        entries.push(ManifestEntry {
            id: entry.id.clone(),
            path: PathBuf::from(name),
            category: entry.category.clone(),
        });
    }
    ObjectManifest::new(&a.out, entries)?.write(&a.out.join("manifest.toml"))?;
    println!("preprocessed {} objects into {}", manifest.len(), a.out.display());
    Ok(())
}

fn candidates(cfg: &AppConfig, a: &CandidatesArgs) -> Result<()> {
    let manifest = ObjectManifest::read(&a.manifest)?;
    let registry = load_template_registry(&a.templates, &cfg.load_options())?;
    let heuristic = cfg.scorer();
    let external = a.upright_command.as_ref().map(|p| ExternalCommandScorer {
        program: p.clone(),
        args: Vec::new(),
    });
    let scorer: &dyn UprightScorer = match &external {
        Some(e) => e,
        None => &heuristic,
    };
    let cc = cfg.candidate_config();
    let mut records = Vec::with_capacity(manifest.len());
    for (i, entry) in manifest.objects.iter().enumerate() {
        let template = registry.get(&entry.category)?;
        let loaded = io::load_object(&manifest.resolve(entry), &cfg.load_options())?;
        let (cloud, t) = normalize_to_unit_sphere(&loaded.cloud)?;
        let mesh = loaded.mesh.map(|m| m.normalized_by(&t));
        let set = generate_candidates(&entry.id, mesh.as_ref(), &cloud, template, &cc, scorer)
            .with_context(|| format!("object `{}`", entry.id))?;
        tracing::info!(object = %entry.id, done = i + 1, total = manifest.len(), "candidates");
        records.push(CandidateRecord::new(&entry.category, &set, &t));
    }
    write_candidate_records(&a.out, &records)?;
    println!("wrote {} candidate sets to {}", records.len(), a.out.display());
    Ok(())
}

fn serve_cmd(cfg: &AppConfig, a: &ServeArgs) -> Result<()> {
    let manifest = ObjectManifest::read(&a.manifest)?;
    let registry = load_template_registry(&a.templates, &cfg.load_options())?;
    let records = read_candidate_records(&a.candidates)?;
    let catalog = Catalog::load(
        &manifest,
        &registry,
        &records,
        &cfg.load_options(),
        cfg.service.preview_points,
    )?;
    let addr: SocketAddr = format!("{}:{}", a.host, a.port).parse().context("listen address")?;
    let rt = tokio::runtime::Runtime::new()?;
    rt.block_on(async {
        let service = Service::start(catalog, &a.log, Arc::new(SystemClock), cfg.service)?;
        let router = service.router(a.ui.as_deref());
        tokio::select! {
            r = serve(router, addr) => r.context("server"),
            _ = tokio::signal::ctrl_c() => Ok(()),
        }
    })
}

#[derive(Serialize)]
struct EvaluationReport {
    overall: MetricReport,
    acc_5: f64,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    per_tag: BTreeMap<String, MetricReport>,
    /// Share of objects whose closest candidate carries each tag.
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    win_distribution: BTreeMap<String, f64>,
    missing: Vec<String>,
}

fn evaluate(a: &EvaluateArgs) -> Result<()> {
    let gt: HashMap<String, Rotation> = read_poses(&a.gt)?
        .into_iter()
        .map(|p| Ok((p.object_id.clone(), p.to_rotation()?)))
        .collect::<Result<_>>()?;
    let symmetry = symmetry_lookup(a.manifest.as_deref(), a.templates.as_deref())?;
    let sym = |id: &str| symmetry.get(id).copied().unwrap_or_default();

    let mut missing = Vec::new();
    let mut per_tag: BTreeMap<String, Vec<ErrorSample>> = BTreeMap::new();
    let mut wins: BTreeMap<String, usize> = BTreeMap::new();
    let overall: Vec<ErrorSample> = match (&a.pred, &a.candidates) {
        (Some(pred), None) => {
            let mut out = Vec::new();
            for p in read_poses(pred)? {
                match gt.get(&p.object_id) {
                    Some(g) => out.push(ErrorSample::new(&p.object_id, p.to_rotation()?, *g, sym(&p.object_id))),
                    None => missing.push(p.object_id),
                }
            }
            out
        }
        (None, Some(cands)) => {
            let mut best_of = Vec::new();
            for r in read_candidate_records(cands)? {
                let Some(g) = gt.get(&r.object_id) else {
                    missing.push(r.object_id);
                    continue;
                };
                // Ties go to the earlier tag.
                let mut best: Option<(CandidateTag, ErrorSample)> = None;
                for tag in CandidateTag::ALL {
                    let s = ErrorSample::new(&r.object_id, r.rotation(tag)?, *g, sym(&r.object_id));
                    per_tag.entry(tag.to_string()).or_default().push(s.clone());
                    if best.as_ref().is_none_or(|(_, b)| s.error_deg < b.error_deg) {
                        best = Some((tag, s));
                    }
                }
                let (tag, b) = best.expect("five candidates");
                *wins.entry(tag.to_string()).or_default() += 1;
                best_of.push(b);
            }
            best_of
        }
        _ => bail!("pass exactly one of --pred and --candidates"),
    };
    if overall.is_empty() {
        bail!("no predictions match the ground truth file");
    }
    let n = overall.len() as f64;
    let report = EvaluationReport {
        overall: MetricReport::from_samples(&overall)?,
        acc_5: accuracy_at(&overall, 5.0)?,
        per_tag: per_tag
            .iter()
            .map(|(k, v)| Ok((k.clone(), MetricReport::from_samples(v)?)))
            .collect::<Result<_>>()?,
        win_distribution: wins.iter().map(|(k, &v)| (k.clone(), 100.0 * v as f64 / n)).collect(),
        missing,
    };

    let label = if a.candidates.is_some() { "best of 5" } else { "predictions" };
    println!("{:<12} {:>6} {:>8} {:>8} {:>8} {:>9} {:>9} {:>8}", "", "n", "acc@5", "acc@10", "acc@30", "mean°", "median°", "IQR°");
    let row = |name: &str, m: &MetricReport, acc5: f64| {
        println!(
            "{:<12} {:>6} {:>7.1}% {:>7.1}% {:>7.1}% {:>9.3} {:>9.3} {:>8.3}",
            name,
            m.count,
            100.0 * acc5,
            100.0 * m.acc_10,
            100.0 * m.acc_30,
            m.mean_abs_deg,
            m.median_deg,
            m.iqr_deg
        )
    };
    row(label, &report.overall, report.acc_5);
    for (tag, m) in &report.per_tag {
        row(tag, m, accuracy_at(&per_tag[tag], 5.0)?);
    }
    if !report.win_distribution.is_empty() {
        let wins: Vec<String> = report.win_distribution.iter().map(|(k, v)| format!("{k} {v:.1}%")).collect();
        println!("closest candidate: {}", wins.join(", "));
    }
    if !report.missing.is_empty() {
        println!("{} object(s) without ground truth", report.missing.len());
    }
    if let Some(path) = &a.report {
        fs::write(path, serde_json::to_string_pretty(&report)? + "\n")
            .with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

fn symmetry_lookup(manifest: Option<&Path>, registry: Option<&Path>) -> Result<HashMap<String, SymmetrySpec>> {
    let (Some(manifest), Some(registry)) = (manifest, registry) else {
        return Ok(HashMap::new());
    };
    let by_category: HashMap<String, SymmetrySpec> = read_registry_file(registry)?
        .category
        .iter()
        .map(|e| Ok((e.name.clone(), e.symmetry_spec()?)))
        .collect::<Result<_>>()?;
    Ok(ObjectManifest::read(manifest)?
        .objects
        .into_iter()
        .filter_map(|o| by_category.get(&o.category).map(|s| (o.id, *s)))
        .collect())
}

fn export(cfg: &AppConfig, a: &ExportArgs) -> Result<()> {
    let manifest = ObjectManifest::read(&a.manifest)?;
    let records = read_candidate_records(&a.candidates)?;
    let log = read_annotations(&a.log)?;
    if log.truncated_tail > 0 {
        tracing::warn!("annotation log ends with a partial record; ignoring it");
    }
    let opts = ExportOptions {
        load: cfg.load_options(),
        ..ExportOptions::default()
    };
    let summary = export_canonical(&manifest, &records, &log.records, &a.out, &opts)?;
    println!(
        "exported {} of {} objects ({:.1}% retained) to {}",
        summary.retained,
        summary.total,
        summary.retained_pct,
        a.out.display()
    );
    if summary.duplicates > 0 {
        println!("{} superseded annotation(s)", summary.duplicates);
    }
    Ok(())
}

fn synth(cfg: &AppConfig, a: &SynthArgs) -> Result<()> {
    let objects = synthetic::catalogue();
    let templates_dir = a.out.join("templates");
    let objects_dir = a.out.join("objects");
    fs::create_dir_all(&templates_dir)?;
    fs::create_dir_all(&objects_dir)?;

    let mut registry = RegistryFile::default();
    for o in &objects {
        let t = o.template(cfg.load.sample_count, a.seed)?;
        let path = templates_dir.join(format!("{}.ply", o.category));
        ply::write_cloud(&path, &t.cloud, ply::Encoding::BinaryLittleEndian)?;
        let parts = t.cloud.part_names().expect("templates are labeled");
        labels::write(&labels::sidecar_path(&path), parts, t.cloud.labels().expect("templates are labeled"))?;
        registry.category.push(RegistryEntry {
            name: o.category.clone(),
            template: PathBuf::from("templates").join(format!("{}.ply", o.category)),
            template_id: Some(t.template_id.clone()),
            axis_convention: t.axis_convention.clone(),
            symmetry: io::SymmetryKind::None,
            symmetry_axis: None,
            symmetry_angle_deg: None,
        });
    }
    fs::write(a.out.join("templates.toml"), toml::to_string(&registry)?)?;

    let suite = synthetic::posed_suite(&objects, a.count, cfg.load.sample_count, a.seed)?;
    let mut entries = Vec::with_capacity(suite.len());
    let mut poses = Vec::with_capacity(suite.len());
    for inst in &suite {
        let name = PathBuf::from("objects").join(format!("{}.ply", inst.id));
        let src = &objects[inst.source];
        ply::write_mesh(&a.out.join(&name), &inst.mesh, ply::Encoding::BinaryLittleEndian)?;
        labels::write(&labels::sidecar_path(&a.out.join(&name)), &src.part_names, &src.face_labels)?;
        entries.push(ManifestEntry {
            id: inst.id.clone(),
            path: name,
            category: inst.category.clone(),
        });
        poses.push(PoseRecord::new(inst.id.clone(), &inst.ground_truth, PoseSource::GroundTruth));
    }
    ObjectManifest::new(&a.out, entries)?.write(&a.out.join("manifest.toml"))?;
    write_poses(&a.out.join("ground_truth.jsonl"), &poses)?;
    println!("wrote {} objects, {} templates to {}", suite.len(), objects.len(), a.out.display());
    Ok(())
}
