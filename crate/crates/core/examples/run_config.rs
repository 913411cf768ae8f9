//! Drive the command-line layer from code: a JSON config, a verification
//! report with a flat-limit check, and the same run through `cli::run`.

use poisson_coalgebra::cli::{self, RunConfig};

fn main() -> poisson_coalgebra::Result<()> {
    let dir = std::env::temp_dir().join("coalg-example");
    let json = format!(
        r#"{{
            "system": "sl2.curved_kc",
            "n": 3,
            "params": {{"kappa": 0.2, "k": 1.5, "b": [0.1, 0.2, 0.3]}},
            "chart": "beltrami",
            "limit": {{}},
            "out": {:?}
        }}"#,
        dir.display().to_string()
    );
    let config: RunConfig = serde_json::from_str(&json).map_err(|e| poisson_coalgebra::Error::Config(e.to_string()))?;
    let report = cli::verify_report(&config)?;
    println!("class {}, passed {}", report.verification.classification, report.passed);

    let path = dir.join("config.json");
    std::fs::create_dir_all(&dir)?;
    std::fs::write(&path, config.to_json())?;
    let code = cli::run(["coalg", "verify", "--config", path.to_str().unwrap()], &mut std::io::stdout());
    println!("exit code {code}");
    Ok(())
}
