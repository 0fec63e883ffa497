//! Plain-text snapshot files.
//!
//! ```text
//! # ancient-ricci snapshot
//! # t=<f64> dz=<f64> tip_left=<f64|none> tip_right=<f64|none> gauge=<usize>
//! z,F
//! <z>,<F>
//! ...
//! # cap side=left dr=<f64>
//! U
//! <U>
//! ...
//! ```
//!
//! Every float is written with 17 significant digits, so a save/load round
//! trip is exact.

use std::fs;
use std::io::Write;
use std::path::Path;

use ancient_ricci::profile_pde::{ProfileState, TipChart, LEFT, RIGHT};

use crate::error::CliError;

const MAGIC: &str = "# ancient-ricci snapshot";

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "none".to_string(), |x| format!("{x:.16e}"))
}

pub fn write_snapshot<W: Write>(state: &ProfileState, mut w: W) -> std::io::Result<()> {
    writeln!(w, "{MAGIC}")?;
    writeln!(
        w,
        "# t={:.16e} dz={:.16e} tip_left={} tip_right={} gauge={}",
        state.t,
        state.dz,
        fmt_opt(state.tip_left),
        fmt_opt(state.tip_right),
        state.gauge_origin_index
    )?;
    writeln!(w, "z,F")?;
    for (z, f) in state.z_grid.iter().zip(&state.f) {
        writeln!(w, "{z:.16e},{f:.16e}")?;
    }
    for (side, name) in [(LEFT, "left"), (RIGHT, "right")] {
        if let Some(cap) = &state.caps[side] {
            writeln!(w, "# cap side={name} dr={:.16e}", cap.dr)?;
            writeln!(w, "U")?;
            for u in &cap.u {
                writeln!(w, "{u:.16e}")?;
            }
        }
    }
    Ok(())
}

pub fn save_snapshot(state: &ProfileState, path: &Path) -> Result<(), CliError> {
    let mut buf = Vec::new();
    write_snapshot(state, &mut buf).expect("writing to memory");
    fs::write(path, buf).map_err(|e| CliError::io(path, e))
}

pub fn load_snapshot(path: &Path) -> Result<ProfileState, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_snapshot(&text).map_err(|(line, message)| CliError::Parse { path: path.display().to_string(), line, message })
}

type ParseResult<T> = Result<T, (usize, String)>;

fn num(s: &str, line: usize, what: &str) -> ParseResult<f64> {
    s.trim().parse::<f64>().map_err(|_| (line, format!("{what}: cannot parse {s:?} as a number")))
}

fn header_fields(body: &str, line: usize, keys: &[&str]) -> ParseResult<Vec<String>> {
    let mut out = Vec::with_capacity(keys.len());
    let mut parts = body.split_whitespace();
    for key in keys {
        let part = parts.next().ok_or_else(|| (line, format!("missing field {key}")))?;
        let value = part
            .strip_prefix(key)
            .and_then(|r| r.strip_prefix('='))
            .ok_or_else(|| (line, format!("expected {key}=..., found {part:?}")))?;
        out.push(value.to_string());
    }
    if let Some(extra) = parts.next() {
        return Err((line, format!("unexpected field {extra:?}")));
    }
    Ok(out)
}

/// Parse the snapshot format. Errors carry the 1-based line number.
pub fn parse_snapshot(text: &str) -> ParseResult<ProfileState> {
    let lines: Vec<&str> = text.lines().collect();
    let at = |i: usize| lines.get(i).copied();
    if at(0) != Some(MAGIC) {
        return Err((1, format!("expected {MAGIC:?}")));
    }
    let meta = at(1).and_then(|l| l.strip_prefix("# ")).ok_or((2, "missing metadata line".to_string()))?;
    let v = header_fields(meta, 2, &["t", "dz", "tip_left", "tip_right", "gauge"])?;
    let t = num(&v[0], 2, "t")?;
    if !(t < 0.0) {
        return Err((2, format!("t = {t} must be negative")));
    }
    let dz = num(&v[1], 2, "dz")?;
    let tip = |s: &str, what| if s == "none" { Ok(None) } else { num(s, 2, what).map(Some) };
    let tip_left = tip(&v[2], "tip_left")?;
    let tip_right = tip(&v[3], "tip_right")?;
    let gauge: usize = v[4].parse().map_err(|_| (2, format!("gauge: cannot parse {:?}", v[4])))?;
    if at(2) != Some("z,F") {
        return Err((3, "expected column header z,F".into()));
    }

    let mut i = 3;
    let mut z_grid = Vec::new();
    let mut f = Vec::new();
    while let Some(l) = at(i) {
        if l.starts_with('#') {
            break;
        }
        let line = i + 1;
        let (a, b) = l.split_once(',').ok_or((line, format!("expected z,F row, found {l:?}")))?;
        z_grid.push(num(a, line, "z")?);
        f.push(num(b, line, "F")?);
        i += 1;
    }
    if z_grid.len() < 3 {
        return Err((i + 1, format!("only {} profile rows", z_grid.len())));
    }

    let mut caps: [Option<TipChart>; 2] = [None, None];
    while let Some(l) = at(i) {
        let line = i + 1;
        let body = l.strip_prefix("# cap ").ok_or((line, format!("expected cap section, found {l:?}")))?;
        let v = header_fields(body, line, &["side", "dr"])?;
        let side = match v[0].as_str() {
            "left" => LEFT,
            "right" => RIGHT,
            s => return Err((line, format!("unknown cap side {s:?}"))),
        };
        if caps[side].is_some() {
            return Err((line, format!("duplicate {} cap", v[0])));
        }
        let dr = num(&v[1], line, "dr")?;
        if at(i + 1) != Some("U") {
            return Err((line + 1, "expected column header U".into()));
        }
        i += 2;
        let mut u = Vec::new();
        while let Some(l) = at(i) {
            if l.starts_with('#') {
                break;
            }
            u.push(num(l, i + 1, "U")?);
            i += 1;
        }
        if u.len() < 5 {
            return Err((i + 1, format!("cap has only {} rows", u.len())));
        }
        caps[side] = Some(TipChart { dr, u });
    }
    for (side, tip, name) in [(LEFT, tip_left, "left"), (RIGHT, tip_right, "right")] {
        if tip.is_some() != caps[side].is_some() {
            return Err((lines.len(), format!("{name} tip and {name} cap must both be present or both absent")));
        }
    }

    let state = ProfileState { t, dz, z_grid, f, tip_left, tip_right, gauge_origin_index: gauge, caps };
    state.validate().map_err(|e| (lines.len(), format!("invalid state: {e}")))?;
    Ok(state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ancient_ricci::profile_pde::{cylinder_state, sphere_state};

    fn round_trip(s: &ProfileState) -> ProfileState {
        let mut buf = Vec::new();
        write_snapshot(s, &mut buf).unwrap();
        parse_snapshot(std::str::from_utf8(&buf).unwrap()).unwrap()
    }

    #[test]
    fn cylinder_and_sphere_round_trip_exactly() {
        let c = cylinder_state(-3.7, 0.1, 2.0).unwrap();
        assert_eq!(round_trip(&c), c);
        let s = sphere_state(-0.31, 0.01, 0.35).unwrap();
        assert_eq!(round_trip(&s), s);
    }

    #[test]
    fn errors_name_the_line() {
        let c = cylinder_state(-1.0, 0.5, 2.0).unwrap();
        let mut buf = Vec::new();
        write_snapshot(&c, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();

        let bad = text.replace("z,F\n", "z;F\n");
        assert_eq!(parse_snapshot(&bad).unwrap_err().0, 3);

        let mut rows: Vec<&str> = text.lines().collect();
        rows[5] = "0.0,oops";
        let err = parse_snapshot(&rows.join("\n")).unwrap_err();
        assert_eq!(err.0, 6);
        assert!(err.1.contains("oops"));

        let positive = text.replacen("t=-1", "t=1", 1);
        let err = parse_snapshot(&positive).unwrap_err();
        assert_eq!(err.0, 2);
        assert!(err.1.contains("negative"));
    }

    #[test]
    fn truncated_file_is_rejected() {
        let c = cylinder_state(-1.0, 0.5, 2.0).unwrap();
        let mut buf = Vec::new();
        write_snapshot(&c, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let cut: String = text.lines().take(4).collect::<Vec<_>>().join("\n");
        assert!(parse_snapshot(&cut).is_err());
        assert!(parse_snapshot("").is_err());
    }
}
