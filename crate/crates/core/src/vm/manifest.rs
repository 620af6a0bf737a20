//! Universe manifests on disk: JSON describing whitelist entries, with
//! program bodies in separate text files resolved relative to the manifest.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::baire::Word;
use crate::error::{Error, Result};

use super::{parse_program, print_program, Layout, MachineCode, ProgramKind, Universe, UniverseEntry, Verdict};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "type")]
pub enum ManifestLayout {
    Comparators,
    JumpNf { program_file: String, kind: ProgramKind, probe: u64 },
    HJump { probe: u64 },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ManifestVerdict {
    Halts,
    Loops,
    InputCellEq { cell: u64, value: u64 },
    ExtensionTable(Vec<(Word, bool)>),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct ManifestEntry {
    pub index: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub program_file: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kind: Option<ProgramKind>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verdict: Option<ManifestVerdict>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct UniverseManifest {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub layout: Option<ManifestLayout>,
    #[serde(default)]
    pub canonical_fallback: bool,
    #[serde(default)]
    pub entries: Vec<ManifestEntry>,
}

fn load_code(dir: &Path, file: &str, kind: ProgramKind) -> Result<MachineCode> {
    let text = std::fs::read_to_string(dir.join(file))?;
    MachineCode::new(parse_program(&text)?, kind)
}

/// Load a universe manifest, resolving program files relative to it.
pub fn load_universe_manifest(path: &Path) -> Result<Universe> {
    let text = std::fs::read_to_string(path)?;
    let manifest: UniverseManifest = serde_json::from_str(&text)?;
    let dir = path.parent().unwrap_or(Path::new(".")).to_path_buf();

    let layout = match &manifest.layout {
        None => None,
        Some(ManifestLayout::Comparators) => Some(Layout::Comparators),
        Some(ManifestLayout::JumpNf { program_file, kind, probe }) => {
            Some(Layout::JumpNf { code: load_code(&dir, program_file, *kind)?, probe: *probe })
        }
        Some(ManifestLayout::HJump { probe }) => Some(Layout::HJump { probe: *probe }),
    };

    let mut entries = BTreeMap::new();
    for e in &manifest.entries {
        let program = match (&e.program_file, e.kind) {
            (Some(file), kind) => {
                Some(load_code(&dir, file, kind.unwrap_or(ProgramKind::Monotone))?)
            }
            (None, _) => None,
        };
        let verdict = e.verdict.as_ref().map(|v| match v {
            ManifestVerdict::Halts => Verdict::Halts,
            ManifestVerdict::Loops => Verdict::Loops,
            ManifestVerdict::InputCellEq { cell, value } => {
                Verdict::InputCellEq { cell: *cell, value: *value }
            }
            ManifestVerdict::ExtensionTable(t) => Verdict::ExtensionTable(t.clone()),
        });
        if program.is_none() && verdict.is_none() {
            return Err(Error::Parse(format!(
                "manifest entry {} names neither a program nor a verdict",
                e.index
            )));
        }
        entries.insert(e.index, UniverseEntry { program, verdict });
    }
    Ok(Universe { entries, layout, canonical_fallback: manifest.canonical_fallback })
}

/// Write a universe's explicit entries back out as a manifest plus program
/// files. Rule-based layouts referencing in-memory code are written as
/// program files too.
pub fn save_universe_manifest(universe: &Universe, dir: &Path, name: &str) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let mut manifest = UniverseManifest {
        layout: None,
        canonical_fallback: universe.canonical_fallback,
        entries: Vec::new(),
    };
    match &universe.layout {
        None => {}
        Some(Layout::Comparators) => manifest.layout = Some(ManifestLayout::Comparators),
        Some(Layout::JumpNf { code, probe }) => {
            let file = format!("{name}.monitor.prog");
            std::fs::write(dir.join(&file), print_program(code.program()))?;
            manifest.layout = Some(ManifestLayout::JumpNf {
                program_file: file,
                kind: code.kind(),
                probe: *probe,
            });
        }
        Some(Layout::HJump { probe }) => {
            manifest.layout = Some(ManifestLayout::HJump { probe: *probe });
        }
    }
    for (index, entry) in &universe.entries {
        let program_file = match &entry.program {
            Some(code) => {
                let file = format!("{name}.{index}.prog");
                std::fs::write(dir.join(&file), print_program(code.program()))?;
                Some(file)
            }
            None => None,
        };
        let verdict = entry.verdict.as_ref().and_then(|v| match v {
            Verdict::Halts => Some(ManifestVerdict::Halts),
            Verdict::Loops => Some(ManifestVerdict::Loops),
            Verdict::InputCellEq { cell, value } => {
                Some(ManifestVerdict::InputCellEq { cell: *cell, value: *value })
            }
            Verdict::ExtensionTable(t) => Some(ManifestVerdict::ExtensionTable(t.clone())),
            _ => None,
        });
        manifest.entries.push(ManifestEntry {
            index: *index,
            program_file,
            kind: entry.program.as_ref().map(|c| c.kind()),
            verdict,
        });
    }
    let json = serde_json::to_string_pretty(&manifest)?;
    std::fs::write(dir.join(format!("{name}.json")), json)?;
    Ok(())
}
