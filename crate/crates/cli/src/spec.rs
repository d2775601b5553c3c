//! Command-line shorthands for states and g-measures.

use std::path::Path;

use freqlab::hilbert::PureState;
use freqlab::measures::GMeasure;
use freqlab::C64;

/// Parses a state spec:
///
/// - `q=<w>`: qubit `√w |0⟩ + √(1-w) |1⟩`
/// - `uniform:<D>`, `basis:<D>:<j>`
/// - a comma-separated amplitude list such as `1,1i,-0.5+2i`, normalized
pub fn parse_state(spec: &str) -> Result<PureState, String> {
    let spec = spec.trim();
    let fail = |e: freqlab::Error| format!("state `{spec}`: {e}");
    if let Some(w) = spec.strip_prefix("q=") {
        let w: f64 = w.parse().map_err(|_| format!("state `{spec}`: bad weight"))?;
        return PureState::qubit_with_weight(w).map_err(fail);
    }
    if let Some(d) = spec.strip_prefix("uniform:") {
        let d: usize = d.parse().map_err(|_| format!("state `{spec}`: bad dimension"))?;
        return PureState::uniform(d).map_err(fail);
    }
    if let Some(rest) = spec.strip_prefix("basis:") {
        let (d, j) = rest
            .split_once(':')
            .ok_or_else(|| format!("state `{spec}`: expected basis:<D>:<j>"))?;
        let d: usize = d.parse().map_err(|_| format!("state `{spec}`: bad dimension"))?;
        let j: usize = j.parse().map_err(|_| format!("state `{spec}`: bad index"))?;
        return PureState::basis(d, j).map_err(fail);
    }
    let amps = spec
        .split(',')
        .map(parse_complex)
        .collect::<Option<Vec<C64>>>()
        .ok_or_else(|| format!("state `{spec}`: cannot parse amplitudes"))?;
    PureState::normalized(amps).map_err(fail)
}

/// `a`, `bi`, `a+bi`, `a-bi` (also `i`, `-i`).
fn parse_complex(s: &str) -> Option<C64> {
    let s = s.trim();
    let Some(body) = s.strip_suffix('i') else {
        return s.parse().ok().map(|re| C64::new(re, 0.0));
    };
    // split at the last sign that is not part of an exponent
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| matches!(bytes[k], b'+' | b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(k) => (body[..k].parse().ok()?, &body[k..]),
        None => (0.0, body),
    };
    let im = match im {
        "" | "+" => 1.0,
        "-" => -1.0,
        x => x.parse().ok()?,
    };
    Some(C64::new(re, im))
}

/// Parses `power:<p>` or `table:<path>`; the table is a two-column CSV of
/// `x,y` pairs with an optional header row.
pub fn parse_g(spec: &str) -> Result<GMeasure, String> {
    let fail = |e: freqlab::Error| format!("g `{spec}`: {e}");
    if let Some(p) = spec.strip_prefix("power:") {
        let p: f64 = p.parse().map_err(|_| format!("g `{spec}`: bad exponent"))?;
        return GMeasure::power(p).map_err(fail);
    }
    if let Some(path) = spec.strip_prefix("table:") {
        return GMeasure::table(read_table(Path::new(path))?).map_err(fail);
    }
    Err(format!("g `{spec}`: expected power:<p> or table:<path>"))
}

fn read_table(path: &Path) -> Result<Vec<(f64, f64)>, String> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| format!("{}: {e}", path.display()))?;
    let mut points = Vec::new();
    for (k, record) in reader.records().enumerate() {
        let record = record.map_err(|e| format!("{}: {e}", path.display()))?;
        let parsed = (record.len() == 2)
            .then(|| Some((record[0].parse().ok()?, record[1].parse().ok()?)))
            .flatten();
        match parsed {
            Some(p) => points.push(p),
            None if k == 0 => continue,
            None => return Err(format!("{}: bad row {}", path.display(), k + 1)),
        }
    }
    Ok(points)
}

/// Comma-separated list of integers at or above `min`, e.g. `10,100,1000`,
/// returned sorted and deduplicated.
pub fn parse_sweep(spec: &str, min: usize) -> Result<Vec<usize>, String> {
    let mut values = spec
        .split(',')
        .map(|s| s.trim().parse::<usize>().ok().filter(|&n| n >= min))
        .collect::<Option<Vec<_>>>()
        .ok_or_else(|| format!("sweep `{spec}`: expected integers >= {min}"))?;
    values.sort_unstable();
    values.dedup();
    Ok(values)
}
