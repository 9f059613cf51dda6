//! C99-style hexadecimal float text (`0x1.8p+1`), used so that text files
//! carry doubles without decimal rounding.

const MANTISSA_BITS: u32 = 52;
const MANTISSA_MASK: u64 = (1 << MANTISSA_BITS) - 1;

/// Formats `x` as a hex float. The output parses back to the identical bits.
pub fn format(x: f64) -> String {
    if x.is_nan() {
        return "nan".to_owned();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.to_owned();
    }
    let bits = x.to_bits();
    let sign = if bits >> 63 == 1 { "-" } else { "" };
    let biased = ((bits >> MANTISSA_BITS) & 0x7ff) as i64;
    let mantissa = bits & MANTISSA_MASK;
    if biased == 0 && mantissa == 0 {
        return format!("{sign}0x0p+0");
    }
    let (lead, exp) = if biased == 0 {
        (0, -1022)
    } else {
        (1, biased - 1023)
    };
    let frac = format!("{mantissa:013x}");
    let frac = frac.trim_end_matches('0');
    if frac.is_empty() {
        format!("{sign}0x{lead}p{exp:+}")
    } else {
        format!("{sign}0x{lead}.{frac}p{exp:+}")
    }
}

/// Parses a hex float. Decimal literals are rejected.
pub fn parse(s: &str) -> Option<f64> {
    let s = s.trim();
    match s {
        "nan" => return Some(f64::NAN),
        "inf" | "+inf" => return Some(f64::INFINITY),
        "-inf" => return Some(f64::NEG_INFINITY),
        _ => {}
    }
    let (negative, rest) = match s.as_bytes().first()? {
        b'-' => (true, &s[1..]),
        b'+' => (false, &s[1..]),
        _ => (false, s),
    };
    let rest = rest
        .strip_prefix("0x")
        .or_else(|| rest.strip_prefix("0X"))?;
    let (digits, exp) = rest.split_once(['p', 'P'])?;
    let exp: i64 = exp.parse().ok()?;
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    let all = format!("{int_part}{frac_part}");
    // 15 hex digits is 60 bits; anything longer cannot come from `format`.
    if all.len() > 15 {
        return None;
    }
    let mantissa = if all.is_empty() {
        0
    } else {
        u64::from_str_radix(&all, 16).ok()?
    };
    let value = ldexp(mantissa as f64, exp - 4 * frac_part.len() as i64);
    Some(if negative { -value } else { value })
}

fn ldexp(mut x: f64, mut exp: i64) -> f64 {
    while exp > 1000 {
        x *= 2f64.powi(1000);
        exp -= 1000;
    }
    // Apply the excess first so only the final multiplication can land in
    // the subnormal range.
    while exp < -1000 {
        let step = (exp + 1000).max(-1000);
        x *= 2f64.powi(step as i32);
        exp -= step;
    }
    x * 2f64.powi(exp as i32)
}
