//! `--n` values: a comma list (`10,20,40`), a range `a:b:step` (inclusive),
//! or a mix of both.

pub fn parse_n_list(s: &str) -> Result<Vec<usize>, String> {
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim) {
        if part.is_empty() {
            return Err(format!("empty entry in n list `{s}`"));
        }
        if part.contains(':') {
            out.extend(parse_range(part)?);
        } else {
            out.push(parse_one(part)?);
        }
    }
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

fn parse_one(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(0) => Err("n must be at least 1".to_string()),
        Ok(n) => Ok(n),
        Err(_) => Err(format!("`{s}` is not a positive integer")),
    }
}

fn parse_range(s: &str) -> Result<Vec<usize>, String> {
    let fields: Vec<&str> = s.split(':').collect();
    let (lo, hi, step) = match fields.as_slice() {
        [a, b] => (parse_one(a)?, parse_one(b)?, 1),
        [a, b, c] => (parse_one(a)?, parse_one(b)?, parse_one(c)?),
        _ => return Err(format!("range `{s}` must be a:b or a:b:step")),
    };
    if lo > hi {
        return Err(format!("range `{s}` is empty"));
    }
    Ok((lo..=hi).step_by(step).collect())
}
