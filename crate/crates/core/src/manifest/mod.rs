//! Corpus catalogs, dataset recipes and JSONL mixture manifests.

mod corpus;
mod jsonl;
mod recipe;
mod sampling;

pub use corpus::{scan_corpus, AssetEntry, AssetKind, CorpusIndex, CorpusRoot};
pub use jsonl::{
    load_manifest, open_manifest, parse_line, save_manifest, write_manifest, ManifestReader,
};
pub use recipe::Recipe;
pub use sampling::sample_specs;
