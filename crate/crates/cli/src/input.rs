use anyhow::{anyhow, bail, Context, Result};
use hilb_core::charts::RationalChart;
use hilb_core::exactalg::{parse_poly, parse_poly_list, parse_rational, Poly, QMat, Rational, VarContext};
use hilb_core::young::YoungDiagram;

/// Rows separated by `;`, entries by `,`.
pub fn rational_rows(src: &str) -> Result<Vec<Vec<Rational>>> {
    let rows: Vec<Vec<Rational>> = src
        .split(';')
        .map(str::trim)
        .filter(|r| !r.is_empty())
        .map(|row| {
            row.split(',')
                .map(|x| parse_rational(x.trim()).map_err(|e| anyhow!("bad entry '{}': {e}", x.trim())))
                .collect()
        })
        .collect::<Result<_>>()?;
    if rows.is_empty() {
        bail!("empty matrix");
    }
    if rows.iter().any(|r| r.len() != rows[0].len()) {
        bail!("ragged matrix '{src}'");
    }
    Ok(rows)
}

pub fn int_rows(src: &str) -> Result<Vec<Vec<i64>>> {
    src.split(';')
        .map(str::trim)
        .filter(|r| !r.is_empty())
        .map(|row| {
            row.split(',')
                .map(|x| {
                    x.trim()
                        .parse::<i64>()
                        .with_context(|| format!("bad integer '{}'", x.trim()))
                })
                .collect()
        })
        .collect()
}

pub fn qmat(src: &str) -> Result<QMat> {
    Ok(QMat::from_rows(rational_rows(src)?))
}

/// A chart point given as the `(k+1) x k` matrix `E`.
pub fn chart(src: &str) -> Result<RationalChart> {
    let m = qmat(src)?;
    RationalChart::from_qmat(&m).map_err(|e| anyhow!("{e}"))
}

pub fn diagram(src: &str) -> Result<YoungDiagram> {
    let parts: Vec<u32> = src
        .split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|p| p.parse::<u32>().with_context(|| format!("bad part '{p}'")))
        .collect::<Result<_>>()?;
    YoungDiagram::new(parts).map_err(|e| anyhow!("{e}"))
}

pub fn xy_poly(src: &str) -> Result<Poly> {
    parse_poly(&VarContext::xy(), src).map_err(|e| anyhow!("bad polynomial '{src}': {e}"))
}

pub fn xy_polys(src: &str) -> Result<Vec<Poly>> {
    parse_poly_list(&VarContext::xy(), src).map_err(|e| anyhow!("bad generator list '{src}': {e}"))
}

pub fn rational(src: &str) -> Result<Rational> {
    parse_rational(src.trim()).map_err(|e| anyhow!("bad rational '{src}': {e}"))
}

pub fn usize_list(src: &str, len: usize) -> Result<Vec<usize>> {
    let v: Vec<usize> = src
        .split(',')
        .map(|x| {
            x.trim()
                .parse::<usize>()
                .with_context(|| format!("bad index '{}'", x.trim()))
        })
        .collect::<Result<_>>()?;
    if v.len() != len {
        bail!("expected {len} comma-separated indices, got '{src}'");
    }
    Ok(v)
}

/// Pairs `nu:mu` separated by commas.
pub fn exponent_pairs(src: &str) -> Result<Vec<(u32, u32)>> {
    src.split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|p| {
            let (a, b) = p.split_once(':').ok_or_else(|| anyhow!("expected nu:mu, got '{p}'"))?;
            Ok((a.trim().parse()?, b.trim().parse()?))
        })
        .collect()
}

/// Intervals `c:d` separated by commas.
pub fn intervals(src: &str) -> Result<Vec<(Rational, Rational)>> {
    src.split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|p| {
            let (a, b) = p.split_once(':').ok_or_else(|| anyhow!("expected c:d, got '{p}'"))?;
            Ok((rational(a)?, rational(b)?))
        })
        .collect()
}
