//! Parsers for the dictionary and grid mini-languages.

use anyhow::{anyhow, bail, Context, Result};
use transop::basis::{default_rbf_bandwidth, make_rbf_grid, Dictionary};
use transop::spectral::Grid;

fn num<T: std::str::FromStr>(s: &str, what: &str) -> Result<T> {
    s.trim()
        .parse()
        .map_err(|_| anyhow!("cannot parse {what} `{s}`"))
}

type Axes = (Vec<f64>, Vec<f64>, Vec<usize>);

/// `lo:hi:n[,lo:hi:n...]`
pub fn parse_axes(text: &str) -> Result<Axes> {
    let mut axes = (Vec::new(), Vec::new(), Vec::new());
    for part in text.split(',') {
        let f: Vec<&str> = part.split(':').collect();
        if f.len() != 3 {
            bail!("axis `{part}` should be lo:hi:n");
        }
        axes.0.push(num(f[0], "lower bound")?);
        axes.1.push(num(f[1], "upper bound")?);
        axes.2.push(num(f[2], "count")?);
    }
    Ok(axes)
}

pub fn parse_grid(text: &str) -> Result<Grid> {
    let (lo, hi, n) = parse_axes(text).with_context(|| format!("bad grid `{text}`"))?;
    Ok(Grid::new(lo, hi, n)?)
}

pub fn parse_dictionary(text: &str, dim: usize) -> Result<Dictionary> {
    let (kind, rest) = text.split_once(':').unwrap_or((text, ""));
    let dict = match kind {
        "identity" => Dictionary::identity(dim)?,
        "identity-centered" => Dictionary::identity_centered(dim)?,
        "monomials" => Dictionary::monomials(dim, num(rest, "monomial degree")?)?,
        "indicator" => {
            let (lo, hi, n) = parse_axes(rest)?;
            Dictionary::indicator_grid(lo, hi, n)?
        }
        "rbf-grid" => {
            // the bandwidth, if any, is a fourth field on the last axis
            let (axes_text, bandwidth) = match rest.rsplit_once(',').map_or(rest, |(_, l)| l).split(':').count() {
                4 => {
                    let (a, b) = rest.rsplit_once(':').expect("four fields");
                    (a, Some(num::<f64>(b, "bandwidth")?))
                }
                _ => (rest, None),
            };
            let (lo, hi, n) = parse_axes(axes_text)?;
            let bw = bandwidth.unwrap_or_else(|| default_rbf_bandwidth(&lo, &hi, &n));
            make_rbf_grid(&lo, &hi, &n, bw)?
        }
        other => bail!("unknown dictionary `{other}`"),
    };
    if dict.dim() != dim {
        bail!(
            "dictionary `{text}` is {}-dimensional but the data has dimension {dim}",
            dict.dim()
        );
    }
    Ok(dict)
}
