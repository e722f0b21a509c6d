use std::fs;
use std::path::Path;

use grand_lebesgue::amalgam::StepFunction;
use grand_lebesgue::cli::Defaults;
use grand_lebesgue::GrandSequence;

#[test]
fn every_input_file_round_trips() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("data");
    let mut seen = 0;
    for entry in fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        let text = fs::read_to_string(&path).unwrap();
        let again = match path.extension().and_then(|e| e.to_str()) {
            Some("seq") => GrandSequence::from_json(&text).unwrap().to_json() + "\n",
            Some("step") => StepFunction::from_json(&text).unwrap().to_json() + "\n",
            Some("json") => serde_json::to_string_pretty(&serde_json::from_str::<Defaults>(&text).unwrap()).unwrap() + "\n",
            _ => continue,
        };
        assert_eq!(again, text, "{}", path.display());
        seen += 1;
    }
    assert!(seen >= 9);
}
