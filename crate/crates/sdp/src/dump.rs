//! SDPA sparse text format (`.dat-s`) for cross-checking with external solvers.
//!
//! SDPA states its problem as `max <F0, Y>` subject to `<F_i, Y> = c_i`,
//! `Y` psd. A problem here is written with `F0 = -C` (or `+C` for
//! maximization, `0` for feasibility), `F_i = A_i` and `c_i = b_i`, so the
//! optimal SDPA value is the negated minimization optimum. Layout:
//!
//! ```text
//! m
//! nblocks
//! n_1 n_2 ... n_k
//! b_1 b_2 ... b_m
//! <matno> <blkno> <i> <j> <value>      (1-based, i <= j, matno 0 = F0)
//! ```
//!
//! Lines starting with `"` or `*` are comments.

use std::fmt::Write as _;

use crate::error::{Result, SdpError};
use crate::problem::{SdpProblem, Sense, SparseSym};

pub fn to_sdpa(p: &SdpProblem) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "\"freespec block SDP, sense {:?}", p.sense);
    let _ = writeln!(out, "{}", p.num_constraints());
    let _ = writeln!(out, "{}", p.blocks.len());
    let sizes: Vec<String> = p.blocks.iter().map(|n| n.to_string()).collect();
    let _ = writeln!(out, "{}", sizes.join(" "));
    let rhs: Vec<String> = p.rhs().iter().map(|v| format!("{v:e}")).collect();
    let _ = writeln!(out, "{}", rhs.join(" "));
    let f0_sign = match p.sense {
        Sense::Minimize => -1.0,
        Sense::Maximize => 1.0,
        Sense::Feasibility => 0.0,
    };
    let mut write_mat = |matno: usize, m: &SparseSym, sign: f64| {
        let mut c = m.clone();
        c.canonicalize();
        for e in c.entries() {
            let v = sign * e.value;
            if v != 0.0 {
                let _ = writeln!(out, "{} {} {} {} {:e}", matno, e.block + 1, e.row + 1, e.col + 1, v);
            }
        }
    };
    write_mat(0, &p.objective, f0_sign);
    for (i, con) in p.constraints.iter().enumerate() {
        write_mat(i + 1, &con.matrix, 1.0);
    }
    out
}

/// Parses SDPA sparse text. `F0` is read back as a minimization objective
/// `C = -F0`; an all-zero `F0` gives a feasibility problem.
pub fn from_sdpa(text: &str) -> Result<SdpProblem> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('"') && !l.starts_with('*'));
    let mut next = |what: &str| {
        lines.next().ok_or(SdpError::Parse { line: 0, msg: format!("missing {what}") })
    };
    let parse_err = |line: usize, msg: String| SdpError::Parse { line, msg };
    let (ln, l) = next("constraint count")?;
    let m: usize = first_token(l).parse().map_err(|e| parse_err(ln, format!("{e}")))?;
    let (ln, l) = next("block count")?;
    let nb: usize = first_token(l).parse().map_err(|e| parse_err(ln, format!("{e}")))?;
    let (ln, l) = next("block sizes")?;
    let blocks: Vec<usize> = tokens(l)
        .take(nb)
        .map(|t| t.trim_start_matches('-').parse::<usize>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| parse_err(ln, format!("{e}")))?;
    if blocks.len() != nb {
        return Err(parse_err(ln, "too few block sizes".into()));
    }
    let (ln, l) = next("right-hand side")?;
    let b: Vec<f64> = tokens(l)
        .take(m)
        .map(str::parse::<f64>)
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| parse_err(ln, format!("{e}")))?;
    if b.len() != m {
        return Err(parse_err(ln, "too few right-hand side values".into()));
    }
    let mut mats = vec![SparseSym::new(); m + 1];
    for (ln, l) in lines {
        let t: Vec<&str> = tokens(l).collect();
        if t.len() < 5 {
            return Err(parse_err(ln, "expected 5 fields".into()));
        }
        let ints: Vec<usize> = t[..4]
            .iter()
            .map(|s| s.parse::<usize>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| parse_err(ln, format!("{e}")))?;
        let v: f64 = t[4].parse().map_err(|e| parse_err(ln, format!("{e}")))?;
        let (matno, blk, i, j) = (ints[0], ints[1], ints[2], ints[3]);
        if matno > m || blk == 0 || blk > nb || i == 0 || j == 0 {
            return Err(parse_err(ln, "index out of range".into()));
        }
        mats[matno].add(blk - 1, i - 1, j - 1, v);
    }
    let mut f0 = mats.remove(0);
    f0.canonicalize();
    let sense = if f0.is_empty() { Sense::Feasibility } else { Sense::Minimize };
    f0.scale(-1.0);
    let mut p = SdpProblem::new(blocks, sense);
    p.objective = f0;
    for (mat, rhs) in mats.into_iter().zip(b) {
        p.add_constraint(mat, rhs);
    }
    p.validate()?;
    Ok(p)
}

fn tokens(l: &str) -> impl Iterator<Item = &str> {
    l.split(|c: char| c.is_whitespace() || c == ',' || c == '{' || c == '}' || c == '(' || c == ')')
        .filter(|s| !s.is_empty())
}

fn first_token(l: &str) -> &str {
    tokens(l).next().unwrap_or("")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_keeps_data() {
        let mut p = SdpProblem::new(vec![2, 1], Sense::Maximize);
        p.objective.add(0, 0, 1, 1.5);
        p.objective.add(1, 0, 0, -2.0);
        let mut a = SparseSym::new();
        a.add(0, 1, 1, 1.0);
        a.add(1, 0, 0, 0.25);
        p.add_constraint(a, 3.0);
        let q = from_sdpa(&to_sdpa(&p)).unwrap();
        assert_eq!(q.blocks, p.blocks);
        // maximization comes back as the equivalent minimization of -C
        assert_eq!(q.sense, Sense::Minimize);
        let neg: Vec<_> = p.objective_dense().into_iter().map(|m| -m).collect();
        assert_eq!(q.objective_dense(), neg);
        assert_eq!(q.rhs(), p.rhs());
    }

    #[test]
    fn garbage_is_a_parse_error() {
        assert!(matches!(from_sdpa("1\n1\n2\nx\n"), Err(SdpError::Parse { .. })));
    }
}
