// Saving and loading instance files, and what loading rejects.

use qmpb::instances::{from_json, to_json};
use qmpb::{builtin, load, save, Error};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::temp_dir().join(format!("qmpb-example-{}", std::process::id()));
    std::fs::create_dir_all(&dir)?;
    let path = dir.join("ghz_chain.json");

    let instance = builtin("ghz_chain")?;
    save(&instance, &path)?;
    let loaded = load(&path)?;
    println!("round trip exact: {}", loaded == instance);

    let tampered = to_json(&instance).replacen("\"0.5000000000000001\"", "\"0.4\"", 1);
    match from_json(&tampered) {
        Err(Error::Validation(violations)) => {
            for v in violations {
                println!("rejected: {v}");
            }
        }
        other => println!("unexpected: {other:?}"),
    }
    std::fs::remove_dir_all(&dir)?;
    assert_eq!(loaded, instance);
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("instance file example");
}
