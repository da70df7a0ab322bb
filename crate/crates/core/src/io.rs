//! Text formats: sampled-potential input and the CSV dumps.
//!
//! Numbers are written with Rust's shortest round-trip formatting, so equal
//! values always produce equal bytes. `-0` is written as `0`.

use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::kernel::KernelField;
use crate::potential::{load_sampled_potential, Potential};
use crate::scalar::Real;
use crate::spectral::{MValue, WeylSample};
use crate::wave::{ResponseFunction, WaveField};

/// `x + 0.0` maps `-0.0` to `0.0` and leaves everything else unchanged.
fn num<T: Real>(x: T) -> f64 {
    x.as_f64() + 0.0
}

/// Parse two whitespace-separated columns `x q`; `#` starts a comment.
pub fn parse_sampled_rows(text: &str) -> Result<Vec<(f64, f64)>> {
    let mut rows = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut cols = line.split_whitespace();
        let mut next = |what: &str| -> Result<f64> {
            let tok = cols.next().ok_or_else(|| Error::Parse {
                line: idx + 1,
                msg: format!("missing {what} column"),
            })?;
            tok.parse::<f64>().map_err(|e| Error::Parse {
                line: idx + 1,
                msg: format!("bad {what} value `{tok}`: {e}"),
            })
        };
        let x = next("x")?;
        let q = next("q")?;
        if cols.next().is_some() {
            return Err(Error::Parse {
                line: idx + 1,
                msg: "expected exactly two columns".into(),
            });
        }
        rows.push((x, q));
    }
    Ok(rows)
}

pub fn read_sampled_potential<T: Real>(path: &Path) -> Result<Potential<T>> {
    let text = std::fs::read_to_string(path)?;
    let rows: Vec<(T, T)> = parse_sampled_rows(&text)?
        .into_iter()
        .map(|(x, q)| (T::lit(x), T::lit(q)))
        .collect();
    load_sampled_potential(&rows)
}

/// `xi,eta,v`, one line per node with `η` rows outermost.
pub fn write_kernel_csv<T: Real, W: Write>(mut out: W, field: &KernelField<T>) -> Result<()> {
    writeln!(out, "xi,eta,v")?;
    let h = field.grid.h();
    for (i, j, v) in field.nodes() {
        let xi = (T::from_index(i) * h).as_f64();
        let eta = (T::from_index(j) * h).as_f64();
        writeln!(out, "{xi},{eta},{}", num(v))?;
    }
    Ok(())
}

/// `x,t,u` with `x` outermost.
pub fn write_wave_csv<T: Real, W: Write>(mut out: W, field: &WaveField<T>) -> Result<()> {
    writeln!(out, "x,t,u")?;
    for (x, row) in field.xs.iter().zip(&field.u) {
        for (t, u) in field.ts.iter().zip(row) {
            writeln!(out, "{},{},{}", num(*x), num(*t), num(*u))?;
        }
    }
    Ok(())
}

pub fn write_response_csv<T: Real, W: Write>(mut out: W, r: &ResponseFunction<T>) -> Result<()> {
    writeln!(out, "t,r")?;
    for (n, v) in r.samples.iter().enumerate() {
        writeln!(out, "{},{}", (T::from_index(n) * r.h).as_f64(), num(*v))?;
    }
    Ok(())
}

/// One m-table row; `flag` is appended to the route name after `:` when set.
pub struct MRow<'a, T> {
    pub value: MValue<T>,
    pub flag: Option<&'a str>,
}

pub fn write_mfunc_csv<T: Real, W: Write>(mut out: W, rows: &[MRow<'_, T>]) -> Result<()> {
    writeln!(out, "re_z,im_z,re_m,im_m,route")?;
    for row in rows {
        let v = &row.value;
        let route = match row.flag {
            Some(flag) => format!("{}:{flag}", v.route),
            None => v.route.to_string(),
        };
        writeln!(
            out,
            "{},{},{},{},{route}",
            num(v.z.re),
            num(v.z.im),
            num(v.m.re),
            num(v.m.im)
        )?;
    }
    Ok(())
}

pub fn write_weyl_csv<T: Real, W: Write>(mut out: W, sample: &WeylSample<T>) -> Result<()> {
    writeln!(out, "x,re_u,im_u")?;
    for (x, u) in sample.x_grid.iter().zip(&sample.values) {
        writeln!(out, "{},{},{}", num(*x), num(u.re), num(u.im))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{neumann_solve, TriangleGrid};
    use crate::potential::{compute_norms, PotentialKind};
    use crate::spectral::Route;
    use num_complex::Complex;

    #[test]
    fn parses_columns_and_comments() {
        let rows = parse_sampled_rows("# header\n0 0\n1.0   2 # peak\n\n2 0\n").unwrap();
        assert_eq!(rows, vec![(0.0, 0.0), (1.0, 2.0), (2.0, 0.0)]);
        assert!(matches!(parse_sampled_rows("0 1\n1\n"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(parse_sampled_rows("0 x\n"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse_sampled_rows("0 1 2\n"), Err(Error::Parse { .. })));
    }

    #[test]
    fn reads_potential_file() {
        let dir = std::env::temp_dir().join(format!("weyldyn-io-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("tri.txt");
        std::fs::write(&path, "0 0\n1 2\n2 0\n").unwrap();
        let p: Potential<f64> = read_sampled_potential(&path).unwrap();
        assert_eq!(p.kind(), PotentialKind::Sampled);
        let n = compute_norms(&p, 0.01).unwrap();
        assert!((n.l1.to_f64() - 2.0).abs() < 1e-12);
        assert!(matches!(
            read_sampled_potential::<f64>(&dir.join("missing.txt")),
            Err(Error::Io(_))
        ));
        std::fs::write(&path, "").unwrap();
        assert!(matches!(read_sampled_potential::<f64>(&path), Err(Error::EmptyInput)));
        std::fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn csv_shapes() {
        let p = Potential::<f64>::constant_box(1.0, 1.0).unwrap();
        let field = neumann_solve(&p, TriangleGrid::new(0.5, 0.25).unwrap(), 1e-12, 60).unwrap();
        let mut buf = Vec::new();
        write_kernel_csv(&mut buf, &field).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "xi,eta,v");
        assert_eq!(lines.len(), 1 + field.grid.node_count());
        assert_eq!(lines[1], "0,0,0");
        assert_eq!(lines[2], "0,0.25,-0.0625");

        let rows = [
            MRow {
                value: MValue {
                    z: Complex::new(-4.0, 0.0),
                    m: Complex::new(-2.0, 0.0),
                    route: Route::WeylDef,
                },
                flag: None,
            },
            MRow {
                value: MValue {
                    z: Complex::new(-1.0, 0.5),
                    m: Complex::new(0.1, 1.0),
                    route: Route::OdeOracle,
                },
                flag: Some("outside-region"),
            },
        ];
        let mut buf = Vec::new();
        write_mfunc_csv(&mut buf, &rows).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "re_z,im_z,re_m,im_m,route\n-4,0,-2,0,weyl_def\n-1,0.5,0.1,1,ode_oracle:outside-region\n"
        );
    }
}
