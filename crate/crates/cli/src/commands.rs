//! One function per subcommand. Each returns an [`Outcome`] holding the JSON
//! report, the human summary and any extra files; nothing is written here.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use qconcept::classicality::{batch_diagnose, MembershipTriple};
use qconcept::datasets::{self, DatasetError, DatasetRows};
use qconcept::disjunction::{build_model, orthogonality_residual, DisjunctionModel, ExemplarRow};
use qconcept::entanglement::{chsh_statistic, expectation_value, tsirelson_bound, CoincidenceTable, NORMALIZATION_SLACK};
use qconcept::fock::{
    build_c3_vectors, fock_conjunction, fock_disjunction, interference_angle_conjunction, interference_angle_disjunction,
    FockError, FockWeights,
};
use qconcept::hilbert::inner_product;
use qconcept::wavefield::{evaluate_patterns, synthesize, write_csv, write_pgm, GridSpec, PatternKind, WavefieldOptions};
use serde_json::{json, Value};

use crate::output::{sig, FileDigest, Outcome};
use crate::{Cli, CliError, Command, ConnectiveArg, DatasetsArgs, DisjunctionArgs, FockArgs, PatternFormat, Source, WavefieldArgs};

pub(crate) fn dispatch(cli: &Cli) -> Result<Outcome, CliError> {
    match &cli.command {
        Command::Classicality(src) => classicality(src),
        Command::Fock(args) => fock(args),
        Command::Chsh(src) => chsh(src),
        Command::DisjunctionModel(args) => disjunction_model(args),
        Command::Wavefield(args) => wavefield(args),
        Command::Datasets(args) => list_datasets(args),
    }
}

fn validation(e: impl std::fmt::Display) -> CliError {
    CliError::Validation(e.to_string())
}

/// Rows read from a file or a bundled dataset, with the digest of the source.
struct Loaded<T> {
    rows: T,
    origin: Value,
    digest: FileDigest,
}

fn load<T>(
    src: &Source,
    default_id: &str,
    parse: fn(&str) -> Result<T, DatasetError>,
    pick: fn(DatasetRows) -> Option<T>,
) -> Result<Loaded<T>, CliError> {
    if let Some(path) = &src.input {
        return load_file(path, parse);
    }
    let id = src.dataset.as_deref().unwrap_or(default_id);
    let dataset = datasets::load(id).map_err(|e| match e {
        DatasetError::Unknown(_) => CliError::Usage(e.to_string()),
        other => validation(other),
    })?;
    let kind = dataset.rows.kind();
    let rows = pick(dataset.rows).ok_or_else(|| CliError::Usage(format!("dataset {id:?} holds {kind} rows")))?;
    let text = datasets::source(id).map_err(validation)?;
    Ok(Loaded {
        rows,
        origin: json!({ "dataset": id }),
        digest: FileDigest::of(format!("dataset:{id}"), text.as_bytes()),
    })
}

fn load_file<T>(path: &Path, parse: fn(&str) -> Result<T, DatasetError>) -> Result<Loaded<T>, CliError> {
    let bytes = fs::read(path).map_err(|e| validation(format!("{}: {e}", path.display())))?;
    let text = String::from_utf8(bytes).map_err(|_| validation(format!("{}: not UTF-8", path.display())))?;
    let rows = parse(&text).map_err(|e| validation(format!("{}: {e}", path.display())))?;
    let name = path.display().to_string();
    Ok(Loaded {
        rows,
        origin: json!({ "input": name }),
        digest: FileDigest::of(name, text.as_bytes()),
    })
}

fn classicality(src: &Source) -> Result<Outcome, CliError> {
    let loaded = load(src, "hampton-table3", datasets::parse_membership_csv, |r| match r {
        DatasetRows::Membership(rows) => Some(rows),
        _ => None,
    })?;
    let rows: Vec<MembershipTriple> = loaded.rows;
    let batch = batch_diagnose(&rows);
    let mut entries = Vec::with_capacity(rows.len());
    let mut csv = String::from("exemplar,connective,delta,k,f,classical,extension_class\n");
    let mut human = format!(
        "{:<24} {:<4} {:>10} {:>10} {:>10}  {:<9} {}\n",
        "exemplar", "op", "delta", "k", "f", "classical", "extension"
    );
    for (t, r) in rows.iter().zip(&batch.rows) {
        let r = r.as_ref().map_err(|e| validation(format!("{}: {e}", t.exemplar)))?;
        entries.push(json!({
            "exemplar": t.exemplar,
            "concept_a": t.concept_a,
            "concept_b": t.concept_b,
            "connective": t.connective,
            "mu_a": t.mu_a,
            "mu_b": t.mu_b,
            "mu_joint": t.mu_joint,
            "delta": r.delta,
            "k": r.kolmogorov_factor,
            "f": r.interference_need,
            "classical": r.classical_representable,
            "extension_class": r.extension_class.as_str(),
        }));
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{},{}",
            csv_field(&t.exemplar),
            t.connective,
            r.delta,
            r.kolmogorov_factor,
            r.interference_need,
            r.classical_representable,
            r.extension_class.as_str()
        );
        let _ = writeln!(
            human,
            "{:<24} {:<4} {:>10} {:>10} {:>10}  {:<9} {}",
            t.exemplar,
            t.connective,
            sig(r.delta),
            sig(r.kolmogorov_factor),
            sig(r.interference_need),
            if r.classical_representable { "yes" } else { "no" },
            r.extension_class.as_str()
        );
    }
    let counts: serde_json::Map<String, Value> =
        batch.counts.iter().map(|(c, n)| (c.as_str().to_owned(), json!(n))).collect();
    let _ = writeln!(
        human,
        "{} rows: {} classical, {} non-classical",
        rows.len(),
        batch.classical,
        batch.non_classical
    );
    let report = json!({
        "source": loaded.origin,
        "rows": entries,
        "summary": { "classical": batch.classical, "non_classical": batch.non_classical, "extension_classes": counts },
    });
    Ok(Outcome {
        subcommand: "classicality",
        report,
        human,
        files: vec![("classicality.csv".into(), csv.into_bytes())],
        inputs: vec![loaded.digest],
        parameters: json!({ "source": loaded.origin }),
    })
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_owned()
    }
}

fn fock(args: &FockArgs) -> Result<Outcome, CliError> {
    let w = FockWeights::from_m_sq(args.m_sq).map_err(validation)?;
    let (a, b, t) = (args.mu_a, args.mu_b, args.mu_joint);
    let (beta, prediction) = match args.connective {
        ConnectiveArg::And => {
            let beta = interference_angle_conjunction(a, b, t, w).map_err(validation)?;
            (beta, fock_conjunction(a, b, beta, w).map_err(validation)?.value)
        }
        ConnectiveArg::Or => {
            let beta = interference_angle_disjunction(a, b, t, w).map_err(validation)?;
            (beta, fock_disjunction(a, b, beta, w).map_err(validation)?.value)
        }
    };
    // The explicit vectors realize the conjunction interference term only.
    let c3 = match args.connective {
        ConnectiveArg::And => match build_c3_vectors(a, b, beta) {
            Ok(s) => Some(json!({
                "vector_a": s.vector_a,
                "vector_b": s.vector_b,
                "projector": s.projector,
                "membership_a": s.membership_a(),
                "membership_b": s.membership_b(),
                "interference_element": [s.interference_element().re, s.interference_element().im],
            })),
            Err(FockError::C3Inapplicable { .. }) | Err(FockError::DegenerateAmplitude { .. }) => None,
            Err(e) => return Err(validation(e)),
        },
        ConnectiveArg::Or => None,
    };
    let beta_deg = beta.to_degrees();
    let mut human = format!(
        "connective {}  m² = {}  n² = {}\nbeta = {}°\nround-trip prediction = {}\n",
        qconcept::classicality::Connective::from(args.connective),
        sig(w.m_sq),
        sig(w.n_sq),
        sig(beta_deg),
        sig(prediction)
    );
    if c3.is_some() {
        human.push_str("C³ vectors available (use --json)\n");
    }
    let parameters = json!({
        "mu_a": a,
        "mu_b": b,
        "mu_joint": t,
        "connective": qconcept::classicality::Connective::from(args.connective),
        "m_sq": w.m_sq,
    });
    let mut report = json!({
        "input": parameters,
        "weights": w,
        "beta_deg": beta_deg,
        "prediction_roundtrip": prediction,
    });
    if let Some(v) = c3 {
        report["c3_vectors"] = v;
    }
    Ok(Outcome {
        subcommand: "fock",
        report,
        human,
        files: Vec::new(),
        inputs: Vec::new(),
        parameters,
    })
}

fn chsh(src: &Source) -> Result<Outcome, CliError> {
    let loaded = load(src, "animal-acts-table1", datasets::parse_coincidence_csv, |r| match r {
        DatasetRows::Coincidence(rows) => Some(rows),
        _ => None,
    })?;
    let tables: Vec<CoincidenceTable> = loaded.rows;
    if tables.len() != 4 {
        return Err(validation(format!(
            "expected 4 experiments (AB, A'B, AB', A'B'), got {}",
            tables.len()
        )));
    }
    let result = chsh_statistic(&tables[0], &tables[1], &tables[2], &tables[3]).map_err(validation)?;
    let mut human = String::new();
    let mut diagnostics = Vec::new();
    for t in &tables {
        let e = expectation_value(t).map_err(validation)?;
        let deficit = 1.0 - t.total();
        diagnostics.push(json!({
            "label": t.label,
            "outcomes": t.outcome_names,
            "probabilities": t.probabilities(),
            "sum": t.total(),
            "deficit": deficit,
            "within_slack": deficit.abs() <= NORMALIZATION_SLACK,
            "expectation": e,
        }));
        let _ = writeln!(human, "E({}) = {}   (sum {})", t.label, sig(e), sig(t.total()));
    }
    let _ = writeln!(human, "s = {}   {:?}", sig(result.s), result.classification);
    let report = json!({
        "source": loaded.origin,
        "result": result,
        "tables": diagnostics,
        "bounds": { "classical": 2.0, "quantum": tsirelson_bound() },
        "normalization_slack": NORMALIZATION_SLACK,
    });
    Ok(Outcome {
        subcommand: "chsh",
        report,
        human,
        files: Vec::new(),
        inputs: vec![loaded.digest],
        parameters: json!({ "source": loaded.origin }),
    })
}

fn load_exemplars(src: &Source) -> Result<Loaded<Vec<ExemplarRow>>, CliError> {
    load(src, "fruits-vegetables-table2", datasets::parse_exemplar_csv, |r| match r {
        DatasetRows::Exemplars(rows) => Some(rows),
        _ => None,
    })
}

fn model_report(model: &DisjunctionModel, emit_vectors: bool) -> Result<Value, CliError> {
    let predictions = model.predictions();
    let rows: Vec<Value> = model
        .rows
        .iter()
        .zip(&model.phases)
        .zip(&predictions)
        .map(|((r, phase), p)| {
            json!({
                "index": r.index,
                "name": r.name,
                "mu_a": r.mu_a,
                "mu_b": r.mu_b,
                "mu_a_or_b": r.mu_a_or_b,
                "phi_deg": r.phi.map(f64::to_degrees),
                "phase_deg": phase.to_degrees(),
                "prediction": p,
            })
        })
        .collect();
    let overlap = inner_product(&model.vector_a, &model.vector_b).map_err(validation)?;
    let mut report = json!({
        "dim": model.dim(),
        "rows": rows,
        "signs_searched": model.signs_searched,
        "orthogonality_residual": orthogonality_residual(model),
        "overlap": [overlap.re, overlap.im],
        "norm_sq_a": model.vector_a.norm_sqr(),
        "norm_sq_b": model.vector_b.norm_sqr(),
    });
    if emit_vectors {
        report["vectors"] = json!({ "a": model.vector_a, "b": model.vector_b });
    }
    Ok(report)
}

fn disjunction_model(args: &DisjunctionArgs) -> Result<Outcome, CliError> {
    let loaded = load_exemplars(&args.source)?;
    let model = build_model(&loaded.rows).map_err(validation)?;
    let mut report = model_report(&model, args.emit_vectors)?;
    report["source"] = loaded.origin.clone();
    let mut human = format!("{:>3} {:<20} {:>10} {:>10} {:>10}\n", "k", "name", "phase°", "µ(A or B)", "predicted");
    for ((r, phase), p) in model.rows.iter().zip(&model.phases).zip(model.predictions()) {
        let _ = writeln!(
            human,
            "{:>3} {:<20} {:>10} {:>10} {:>10}",
            r.index,
            r.name,
            sig(phase.to_degrees()),
            sig(r.mu_a_or_b),
            sig(p)
        );
    }
    let _ = writeln!(
        human,
        "dimension {}, orthogonality residual {}{}",
        model.dim(),
        sig(orthogonality_residual(&model)),
        if model.signs_searched { ", signs searched" } else { "" }
    );
    Ok(Outcome {
        subcommand: "disjunction-model",
        report,
        human,
        files: Vec::new(),
        inputs: vec![loaded.digest],
        parameters: json!({ "source": loaded.origin, "emit_vectors": args.emit_vectors, "c": 1.0 }),
    })
}

fn wavefield(args: &WavefieldArgs) -> Result<Outcome, CliError> {
    let loaded = load_exemplars(&args.source)?;
    let model = build_model(&loaded.rows).map_err(validation)?;
    let options = WavefieldOptions::default();
    let wf = synthesize(&model, &options).map_err(validation)?;
    let grid = GridSpec {
        nx: args.grid.0,
        ny: args.grid.1,
        ..GridSpec::default()
    };
    let config = &wf.fitted.config;
    let set = evaluate_patterns(config, &wf.phase.polynomial, &grid).map_err(validation)?;

    let mut files = Vec::new();
    let mut sidecars = Vec::new();
    for kind in PatternKind::ALL {
        let pattern = set.get(kind);
        let mut bytes = Vec::new();
        match args.format {
            PatternFormat::Csv => write_csv(pattern, &mut bytes)?,
            PatternFormat::Pgm => sidecars.push(write_pgm(pattern, &mut bytes)?),
        }
        let ext = match args.format {
            PatternFormat::Csv => "csv",
            PatternFormat::Pgm => "pgm",
        };
        files.push((format!("{}.{ext}", kind.file_stem()), bytes));
    }

    let rows = &model.rows;
    let positions: Vec<Value> = rows
        .iter()
        .zip(&config.positions)
        .zip(&model.phases)
        .map(|((r, p), phase)| json!({ "index": r.index, "name": r.name, "x": p[0], "y": p[1], "phase_deg": phase.to_degrees() }))
        .collect();
    let terms: Vec<Value> = wf
        .phase
        .polynomial
        .terms
        .iter()
        .map(|t| json!({ "exponent_x": t.exponent_x, "exponent_y": t.exponent_y, "coefficient_deg": t.coefficient.to_degrees() }))
        .collect();
    let anchor = |k: usize| json!({ "index": rows[k].index, "name": rows[k].name });
    let report = json!({
        "source": loaded.origin,
        "grid": grid,
        "format": args.format,
        "options": options,
        "gaussians": config.gaussians,
        "anchors": { "a": anchor(wf.fitted.anchors.a), "b": anchor(wf.fitted.anchors.b) },
        "aspect_steps": [wf.fitted.aspect_steps.0, wf.fitted.aspect_steps.1],
        "positions": positions,
        "phase_polynomial": {
            "terms": terms,
            "length_scale": wf.phase.polynomial.length_scale,
            "fallback": wf.phase.fallback,
            "max_residual_deg": wf.phase.max_residual.to_degrees(),
        },
        "clamp_count": set.clamp_count,
        "constructive": set.constructive,
        "destructive": set.destructive,
        "pgm": sidecars,
    });
    let g = &config.gaussians;
    let human = format!(
        "{} exemplars placed, anchors {} and {}\n\
         sigma_A = ({}, {})  sigma_B = ({}, {})\n\
         phase field: {} terms, residual {}°{}\n\
         raster {}x{}: {} constructive, {} destructive, {} clamped\n\
         wrote {} files\n",
        rows.len(),
        rows[wf.fitted.anchors.a].name,
        rows[wf.fitted.anchors.b].name,
        sig(g.sigma_ax),
        sig(g.sigma_ay),
        sig(g.sigma_bx),
        sig(g.sigma_by),
        wf.phase.polynomial.terms.len(),
        sig(wf.phase.max_residual.to_degrees()),
        if wf.phase.fallback { " (least-squares fallback)" } else { "" },
        grid.nx,
        grid.ny,
        set.constructive,
        set.destructive,
        set.clamp_count,
        files.len() + 2,
    );
    Ok(Outcome {
        subcommand: "wavefield",
        parameters: report.clone(),
        report,
        human,
        files,
        inputs: vec![loaded.digest],
    })
}

fn list_datasets(args: &DatasetsArgs) -> Result<Outcome, CliError> {
    if let Some(id) = &args.show {
        let dataset = datasets::load(id).map_err(|e| match e {
            DatasetError::Unknown(_) => CliError::Usage(e.to_string()),
            other => validation(other),
        })?;
        let report = serde_json::to_value(&dataset).map_err(validation)?;
        let mut human = format!("{} ({} {} rows)\n{}\n", dataset.id, dataset.rows.len(), dataset.rows.kind(), dataset.provenance);
        for note in &dataset.notes {
            let _ = writeln!(human, "  note: {note}");
        }
        let text = datasets::source(id).map_err(validation)?;
        return Ok(Outcome {
            subcommand: "datasets",
            report,
            human,
            files: Vec::new(),
            inputs: vec![FileDigest::of(format!("dataset:{id}"), text.as_bytes())],
            parameters: json!({ "show": id }),
        });
    }
    let catalog = datasets::catalog();
    let mut human = String::new();
    for entry in &catalog {
        let _ = writeln!(human, "{:<28} {:>3} {:<20} {}", entry.id, entry.rows, entry.kind, entry.provenance);
    }
    Ok(Outcome {
        subcommand: "datasets",
        report: serde_json::to_value(&catalog).map_err(validation)?,
        human,
        files: Vec::new(),
        inputs: Vec::new(),
        parameters: json!({}),
    })
}
