//! `model-adapter`: serve a model document over the line-delimited JSON
//! protocol on standard input/output, so that it can stand in for an
//! external model.
//!
//! ```text
//! model-adapter model.json
//! ```

use std::io::{self, BufWriter};
use std::process::ExitCode;

use shapcredit::model::{serve, ExternalSpec, ModelHandle};

fn main() -> ExitCode {
    let Some(path) = std::env::args().nth(1) else {
        eprintln!("usage: model-adapter <model.json>");
        return ExitCode::from(2);
    };
    let model = match ModelHandle::from_path(&path) {
        Ok(m) => m,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let spec = ExternalSpec {
        features: model.inputs().to_vec(),
        output_type: model.output_type().clone(),
    };
    let stdin = io::stdin().lock();
    let stdout = BufWriter::new(io::stdout().lock());
    let result = serve(stdin, stdout, &spec, |points| {
        model.evaluate_batch(points).map_err(|e| e.to_string())
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(4)
        }
    }
}
