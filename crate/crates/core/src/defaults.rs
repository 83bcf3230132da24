//! Built-in data tables. Every table can be overridden with a file at
//! runtime; these are the versions compiled into the library so the CLI
//! works out of the box.

use crate::align::{parse_merge_table, MergeTable};
use crate::g2p::{parse_fallback_rules, parse_lexicon, FallbackRules, PronunciationLexicon};
use crate::phonology::{parse_inventory, PhonemeInventory};
use crate::rules::{parse_blocklist, parse_rules, VariationRule};
use std::collections::BTreeSet;

pub const INVENTORY_TEXT: &str = include_str!("../data/inventory.tsv");
pub const LEXICON_TEXT: &str = include_str!("../data/lexicon.tsv");
pub const FALLBACK_TEXT: &str = include_str!("../data/fallback.tsv");
pub const MERGE_TABLE_TEXT: &str = include_str!("../data/merge_table.txt");
pub const RULES_TEXT: &str = include_str!("../data/rules.tsv");
pub const BLOCKLIST_TEXT: &str = include_str!("../data/blocklist.txt");
pub const CALIBRATION_TEXT: &str = include_str!("../data/calibration.tsv");
pub const CORPUS_TEXT: &str = include_str!("../data/corpus.txt");

pub fn inventory() -> PhonemeInventory {
    parse_inventory(INVENTORY_TEXT).expect("built-in inventory parses")
}

pub fn lexicon(inventory: &PhonemeInventory) -> PronunciationLexicon {
    parse_lexicon(LEXICON_TEXT, inventory).expect("built-in lexicon parses")
}

pub fn fallback_rules(inventory: &PhonemeInventory) -> FallbackRules {
    parse_fallback_rules(FALLBACK_TEXT, inventory).expect("built-in fallback rules parse")
}

pub fn merge_table() -> MergeTable {
    parse_merge_table(MERGE_TABLE_TEXT).expect("built-in merge table parses")
}

pub fn rules() -> Vec<VariationRule> {
    parse_rules(RULES_TEXT).expect("built-in rules parse")
}

pub fn blocklist() -> BTreeSet<String> {
    parse_blocklist(BLOCKLIST_TEXT)
}
