//! The adversarial corpus is versioned: its serialized form is pinned to a
//! golden file so that any edit to the corpus is a deliberate, visible diff.
//! To regenerate after an intentional change, run with
//! `UPDATE_GOLDEN=1 cargo test -p mxsefl --test golden_corpus`.

use mxsefl::instances::adversarial_corpus;
use mxsefl::io::InstanceFile;

#[test]
fn corpus_matches_golden_file() {
    let mut rendered = String::new();
    for entry in adversarial_corpus() {
        rendered.push_str(&format!("# {} -- {}\n", entry.name, entry.note));
        rendered.push_str(
            &serde_json::to_string(&InstanceFile::from_instance(&entry.instance)).unwrap(),
        );
        rendered.push('\n');
    }
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/golden/corpus.txt");
    if std::env::var("UPDATE_GOLDEN").is_ok() {
        std::fs::create_dir_all(std::path::Path::new(path).parent().unwrap()).unwrap();
        std::fs::write(path, &rendered).unwrap();
        return;
    }
    let golden = std::fs::read_to_string(path)
        .expect("golden file missing; run with UPDATE_GOLDEN=1 to create it");
    assert_eq!(rendered, golden, "corpus drifted from its golden file");
}
