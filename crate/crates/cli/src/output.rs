//! Report files, run manifests and number formatting.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use tempfile::NamedTempFile;

use crate::CliError;

/// Everything a subcommand produced, before anything touches the disk.
#[derive(Debug)]
pub(crate) struct Outcome {
    pub subcommand: &'static str,
    pub report: serde_json::Value,
    pub human: String,
    /// Extra files besides the JSON report, in write order.
    pub files: Vec<(String, Vec<u8>)>,
    pub inputs: Vec<FileDigest>,
    pub parameters: serde_json::Value,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileDigest {
    pub name: String,
    pub sha256: String,
    pub bytes: u64,
}

impl FileDigest {
    pub fn of(name: impl Into<String>, data: &[u8]) -> Self {
        Self {
            name: name.into(),
            sha256: hex::encode(Sha256::digest(data)),
            bytes: data.len() as u64,
        }
    }
}

/// Written next to the outputs of every run that has an output directory.
/// No timestamps or absolute paths, so identical runs give identical bytes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: Vec<String>,
    pub inputs: Vec<FileDigest>,
    pub parameters: serde_json::Value,
    pub outputs: Vec<FileDigest>,
    pub tool_version: String,
}

/// The command line as recorded in the manifest: program name normalized
/// and the output directory dropped, since outputs are listed relative to it.
pub(crate) fn recorded_args(args: &[OsString]) -> Vec<String> {
    let mut out = vec!["qconcept".to_owned()];
    let mut skip_next = false;
    for a in args.iter().skip(1) {
        let a = a.to_string_lossy();
        if skip_next {
            skip_next = false;
        } else if a == "--out-dir" {
            skip_next = true;
        } else if !a.starts_with("--out-dir=") {
            out.push(a.into_owned());
        }
    }
    out
}

pub(crate) fn manifest_name(subcommand: &str) -> String {
    format!("{subcommand}.manifest.json")
}

fn to_json_bytes<T: Serialize>(value: &T) -> Vec<u8> {
    let mut bytes = serde_json::to_vec_pretty(value).expect("reports serialize");
    bytes.push(b'\n');
    bytes
}

/// Writes the report, the extra files and the manifest. Every file goes to a
/// temporary in the target directory first and is renamed into place only
/// after all of them were written.
pub(crate) fn write_outputs(dir: &Path, command: &[String], outcome: &Outcome) -> Result<(), CliError> {
    let mut files = vec![(format!("{}.json", outcome.subcommand), to_json_bytes(&outcome.report))];
    files.extend(outcome.files.iter().cloned());
    let manifest = RunManifest {
        command: command.to_vec(),
        inputs: outcome.inputs.clone(),
        parameters: outcome.parameters.clone(),
        outputs: files.iter().map(|(name, data)| FileDigest::of(name.as_str(), data)).collect(),
        tool_version: env!("CARGO_PKG_VERSION").to_owned(),
    };
    files.push((manifest_name(outcome.subcommand), to_json_bytes(&manifest)));

    fs::create_dir_all(dir)?;
    let mut staged = Vec::with_capacity(files.len());
    for (name, data) in &files {
        let mut tmp = NamedTempFile::new_in(dir)?;
        tmp.write_all(data)?;
        tmp.as_file().sync_all()?;
        // Temporaries are created owner-only; outputs get the usual mode.
        #[cfg(unix)]
        {
            use std::os::unix::fs::PermissionsExt;
            tmp.as_file().set_permissions(fs::Permissions::from_mode(0o644))?;
        }
        staged.push((tmp, dir.join(name)));
    }
    for (tmp, target) in staged {
        tmp.persist(&target).map_err(|e| e.error)?;
    }
    Ok(())
}

/// Six significant digits for human reports.
pub(crate) fn sig(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let magnitude = x.abs().log10().floor() as i32;
    if (-4..6).contains(&magnitude) {
        let decimals = (5 - magnitude).max(0) as usize;
        let s = format!("{x:.decimals$}");
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_owned()
        } else {
            s
        }
    } else {
        format!("{x:.5e}")
    }
}
