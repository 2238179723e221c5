use std::fmt;
use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::thread;

use super::{KbError, KnowledgeBase, MlnSection, PipelineConfig, Provenance};
use crate::dep::{self, ParseMode, Parsed, RecordError};
use crate::extract::{extract_triples, SvoTriple};
use crate::kb::InputFormat;
use crate::mln::{
    default_schema, evidence_from_model, infer_marginal, learn_weights_pll, parse_evidence,
    GroundModel, MlnError, Program, SamplerConfig, StepConfig,
};
use crate::model::{ModalityModel, Role};
use crate::space::{ModalitySpace, SpaceError, SpaceRole};

/// Counts printed after a build.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BuildReport {
    pub files: usize,
    pub sentences: usize,
    pub rejected_sentences: usize,
    pub triples: usize,
    pub subjects: usize,
    pub verbs: usize,
    pub objects: usize,
    pub dropped_outliers: usize,
    pub svd_rank: Option<usize>,
    pub mln_iterations: Option<usize>,
}

impl fmt::Display for BuildReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "files: {}", self.files)?;
        writeln!(f, "sentences: {}", self.sentences)?;
        writeln!(f, "rejected sentences: {}", self.rejected_sentences)?;
        writeln!(f, "triples: {}", self.triples)?;
        writeln!(
            f,
            "vocab: subjects {} verbs {} objects {}",
            self.subjects, self.verbs, self.objects
        )?;
        writeln!(f, "dropped outliers: {}", self.dropped_outliers)?;
        if let Some(k) = self.svd_rank {
            writeln!(f, "svd rank: {k}")?;
        }
        if let Some(n) = self.mln_iterations {
            writeln!(f, "mln iterations: {n}")?;
        }
        Ok(())
    }
}

fn parse_file(path: &Path, format: InputFormat, mode: ParseMode) -> Result<Parsed, KbError> {
    let file = File::open(path).map_err(|e| KbError::io(path, e))?;
    let reader = BufReader::new(file);
    let source = path.display().to_string();
    match format {
        InputFormat::Conllu => dep::parse_conllu(reader, &source, mode),
        InputFormat::Sd => dep::parse_sd_lines(reader, &source, mode),
    }
    .map_err(|e| KbError::Ingest {
        path: source.clone(),
        source: e,
    })
}

/// Parses every file on its own thread; results come back in input order.
pub fn ingest(paths: &[PathBuf], config: &PipelineConfig) -> Result<Vec<Parsed>, KbError> {
    let mode = config.parse_mode();
    thread::scope(|scope| {
        let handles: Vec<_> = paths
            .iter()
            .map(|p| scope.spawn(move || parse_file(p, config.input_format, mode)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("ingest worker panicked"))
            .collect()
    })
}

fn build_space(
    model: &ModalityModel,
    role: SpaceRole,
    config: &PipelineConfig,
) -> Result<Option<ModalitySpace>, KbError> {
    let space = match ModalitySpace::build(model, role, config.space_weighting) {
        Ok(s) => s,
        Err(SpaceError::Empty(_)) => return Ok(None),
        Err(e) => return Err(e.into()),
    };
    if config.svd_rank == 0 {
        return Ok(Some(space));
    }
    let max = space.row_vocab().len().min(space.col_vocab().len());
    let rank = config.svd_rank.min(max);
    if rank < config.svd_rank {
        log::info!(
            "{role} space: svd rank clamped from {} to {rank}",
            config.svd_rank
        );
    }
    Ok(Some(space.truncated_svd(
        rank,
        config.svd_iterations,
        config.seed,
    )?))
}

/// Runs ingest, extraction, counting, filtering, the two spaces, and the
/// optional SVD and MLN stages.
pub fn build_kb(
    paths: &[PathBuf],
    config: &PipelineConfig,
) -> Result<(KnowledgeBase, BuildReport), KbError> {
    config.validate()?;
    if paths.is_empty() {
        return Err(KbError::Usage("no corpus files given".into()));
    }
    let parsed = ingest(paths, config)?;
    let extract = config.extract_config();

    let mut triples: Vec<SvoTriple> = Vec::new();
    let mut sentences = 0;
    let mut rejected = 0;
    for p in &parsed {
        sentences += p.sentences.len();
        rejected += p.errors.len();
        for s in &p.sentences {
            triples.extend(extract_triples(s, &extract));
        }
    }
    if triples.is_empty() {
        return Err(KbError::EmptyCorpus(format!(
            "no triples extracted from {sentences} sentences in {} files",
            paths.len()
        )));
    }

    let raw = ModalityModel::build(&triples, config.smoothing_k, config.filter_config())?;
    let model = raw.filtered()?;
    if model.is_empty() {
        return Err(KbError::EmptyCorpus(format!(
            "all {} triples removed by the outlier filter",
            triples.len()
        )));
    }

    let active_space = build_space(&model, SpaceRole::Active, config)?;
    let passive_space = build_space(&model, SpaceRole::Passive, config)?;
    let svd_rank = (config.svd_rank > 0).then_some(config.svd_rank);

    let mln = if config.mln_train {
        let (program, _) = default_schema(&model);
        Some(train_mln(
            &model,
            &program,
            config.mln_l2,
            &config.step_config(),
        )?)
    } else {
        None
    };

    let report = BuildReport {
        files: paths.len(),
        sentences,
        rejected_sentences: rejected,
        triples: triples.len(),
        subjects: model.vocab(Role::Subject).len(),
        verbs: model.vocab(Role::Verb).len(),
        objects: model.vocab(Role::Object).len(),
        dropped_outliers: raw.entry_count() - model.entry_count(),
        svd_rank,
        mln_iterations: mln.as_ref().map(|m| m.iterations),
    };
    let kb = KnowledgeBase {
        model,
        active_space,
        passive_space,
        mln,
        provenance: Provenance {
            corpus_files: paths.iter().map(|p| p.display().to_string()).collect(),
            config_hash: config.hash(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
        },
    };
    Ok((kb, report))
}

fn constants_for(model: &ModalityModel) -> crate::mln::Constants {
    default_schema(model).1
}

/// Learns weights for `program` against the closed-world evidence implied
/// by the model's counts.
pub fn train_mln(
    model: &ModalityModel,
    program: &Program,
    l2: f64,
    step: &StepConfig,
) -> Result<MlnSection, KbError> {
    let gm = GroundModel::ground(program, &constants_for(model))?;
    let world = evidence_from_model(&gm, model);
    let report = learn_weights_pll(&gm, &world, l2, step)?;
    if !report.converged {
        log::warn!(
            "mln training stopped after {} iterations, gradient norm {:e}",
            report.iterations,
            report.gradient_norm
        );
    }
    Ok(MlnSection {
        program: program.with_weights(&report.weights)?,
        l2,
        iterations: report.iterations,
        converged: report.converged,
        pseudo_log_likelihood: report.pseudo_log_likelihood,
    })
}

/// P(atom | evidence) under the KB's trained MLN.
pub fn mln_query(
    kb: &KnowledgeBase,
    atom: &str,
    evidence: &str,
    sampler: &SamplerConfig,
) -> Result<f64, KbError> {
    let section = kb
        .mln
        .as_ref()
        .ok_or_else(|| KbError::Invalid("KB holds no trained MLN; run mln-train first".into()))?;
    let gm = GroundModel::ground(&section.program, &constants_for(&kb.model))?;
    let unknown = |e: MlnError| match e {
        MlnError::UnknownAtom(a) => KbError::UnknownEntity(a),
        other => other.into(),
    };
    let query = gm.parse_atom(atom).map_err(unknown)?;
    let evidence = parse_evidence(evidence, &gm).map_err(unknown)?;
    Ok(infer_marginal(
        &gm,
        &section.program.weights(),
        query,
        &evidence,
        sampler,
    )?)
}

/// Lenient parse outcome of one file.
#[derive(Debug, Clone, PartialEq)]
pub struct FileCheck {
    pub path: String,
    pub sentences: usize,
    pub errors: Vec<RecordError>,
}

/// Parses each file leniently and collects every rejected record.
pub fn validate_files(paths: &[PathBuf], format: InputFormat) -> Result<Vec<FileCheck>, KbError> {
    let config = PipelineConfig {
        input_format: format,
        strict: false,
        ..PipelineConfig::default()
    };
    let parsed = ingest(paths, &config)?;
    Ok(paths
        .iter()
        .zip(parsed)
        .map(|(p, parsed)| FileCheck {
            path: p.display().to_string(),
            sentences: parsed.sentences.len(),
            errors: parsed.errors,
        })
        .collect())
}
