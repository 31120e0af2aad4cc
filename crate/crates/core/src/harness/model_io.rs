//! Text checkpoints of trained networks.
//!
//! ```text
//! UBPNET v1
//! variant=dnn-dbp
//! M=8 N=32 L=7 K=4
//! delta layer=1
//! <2M lines of 2N values>
//! ...
//! ```
//!
//! `K` is the real-domain alphabet size. Each layer holds a `delta` block,
//! followed by `lambda` and `omega` blocks for `dnn-ms`. Values are the
//! constrained factors written with 17 significant digits.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::mimo::SystemConfig;
use crate::unfolded::{CorrectionFactors, NetVariant, UnfoldedNetwork};

const MAGIC: &str = "UBPNET v1";

pub fn model_to_string(net: &UnfoldedNetwork) -> String {
    let f = &net.factors;
    let (layers, sym, obs) = f.shape();
    let mut out = String::new();
    let _ = writeln!(out, "{MAGIC}");
    let _ = writeln!(out, "variant={}", f.variant());
    let _ = writeln!(
        out,
        "M={} N={} L={layers} K={}",
        net.cfg.tx_antennas,
        net.cfg.rx_antennas,
        net.cfg.alphabet_size()
    );
    for l in 0..layers {
        for &kind in f.variant().families() {
            let _ = writeln!(out, "{} layer={}", kind.name(), l + 1);
            let values = f.layer_values(kind, l).expect("family of variant");
            for row in values.chunks_exact(obs) {
                let line: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
                out.push_str(&line.join(" "));
                out.push('\n');
            }
            debug_assert_eq!(values.len(), sym * obs);
        }
    }
    out
}

pub fn save_model(net: &UnfoldedNetwork, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, model_to_string(net)).map_err(|e| Error::io(path, e))
}

pub fn load_model(path: impl AsRef<Path>) -> Result<UnfoldedNetwork> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    model_from_str(&text)
}

fn header_field(tok: Option<&str>, key: &str) -> Result<usize> {
    tok.and_then(|t| t.strip_prefix(key))
        .and_then(|t| t.strip_prefix('='))
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| Error::Format(format!("expected `{key}=<integer>` in the shape line")))
}

pub fn model_from_str(text: &str) -> Result<UnfoldedNetwork> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
    let mut next = |what: &str| {
        lines
            .next()
            .ok_or_else(|| Error::Format(format!("truncated model: missing {what}")))
    };
    let (_, magic) = next("version line")?;
    if magic != MAGIC {
        return Err(Error::Format(format!("expected `{MAGIC}`, found `{magic}`")));
    }
    let (_, variant_line) = next("variant line")?;
    let variant: NetVariant = variant_line
        .strip_prefix("variant=")
        .ok_or_else(|| Error::Format(format!("expected `variant=...`, found `{variant_line}`")))?
        .parse()?;
    let (_, shape) = next("shape line")?;
    let mut toks = shape.split_whitespace();
    let m = header_field(toks.next(), "M")?;
    let n = header_field(toks.next(), "N")?;
    let layers = header_field(toks.next(), "L")?;
    let k = header_field(toks.next(), "K")?;
    if toks.next().is_some() {
        return Err(Error::Format(format!("trailing fields in shape line `{shape}`")));
    }
    let cfg = SystemConfig::new(m, n, k * k);
    cfg.validate().map_err(|e| Error::Format(e.to_string()))?;
    if layers == 0 {
        return Err(Error::Format("L must be >= 1".into()));
    }
    let (sym, obs) = (2 * m, 2 * n);
    let kinds = variant.families();
    let mut values: Vec<Vec<f64>> = vec![Vec::with_capacity(layers * sym * obs); kinds.len()];
    for l in 1..=layers {
        for (f, kind) in kinds.iter().enumerate() {
            let expected = format!("{} layer={l}", kind.name());
            let (no, header) = next(&expected)?;
            if header != expected {
                return Err(Error::Format(format!("line {no}: expected `{expected}`, found `{header}`")));
            }
            for _ in 0..sym {
                let (no, row) = next("factor row")?;
                let before = values[f].len();
                for tok in row.split_whitespace() {
                    let v: f64 = tok
                        .parse()
                        .map_err(|_| Error::Format(format!("line {no}: `{tok}` is not a number")))?;
                    if !(v > 0.0 && v < 1.0) {
                        return Err(Error::Format(format!("line {no}: factor {v} outside (0, 1)")));
                    }
                    values[f].push(v);
                }
                if values[f].len() - before != obs {
                    return Err(Error::Format(format!(
                        "line {no}: {} values, expected {obs}",
                        values[f].len() - before
                    )));
                }
            }
        }
    }
    if let Some((no, extra)) = lines.find(|(_, l)| !l.is_empty()) {
        return Err(Error::Format(format!("line {no}: unexpected content `{extra}`")));
    }
    let factors = CorrectionFactors::from_values(variant, layers, sym, obs, values)?;
    UnfoldedNetwork::from_factors(cfg, factors)
}
