//! Decimal rendering with 17 significant digits, enough to round-trip any f64.

use std::fmt::{self, Write as _};

use serde::Serializer;
use serde_json::value::RawValue;

/// Formats `x` like C's `%.17g`: 17 significant digits, trailing zeros
/// trimmed, positional notation for exponents in `[-5, 17)`.
pub fn g17(x: f64) -> String {
    G17(x).to_string()
}

/// Allocation-free [`Display`](fmt::Display) form of [`g17`].
#[derive(Debug, Clone, Copy)]
pub struct G17(pub f64);

/// Fixed-capacity byte sink for one `{:.16e}` rendering.
struct StackBuf {
    buf: [u8; 32],
    len: usize,
}

impl fmt::Write for StackBuf {
    fn write_str(&mut self, s: &str) -> fmt::Result {
        let end = self.len + s.len();
        if end > self.buf.len() {
            return Err(fmt::Error);
        }
        self.buf[self.len..end].copy_from_slice(s.as_bytes());
        self.len = end;
        Ok(())
    }
}

impl fmt::Display for G17 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let x = self.0;
        if x.is_nan() {
            return f.write_str("NaN");
        }
        if x.is_infinite() {
            return f.write_str(if x > 0.0 { "inf" } else { "-inf" });
        }
        if x == 0.0 {
            return f.write_str(if x.is_sign_negative() { "-0" } else { "0" });
        }
        let mut sci = StackBuf { buf: [0; 32], len: 0 };
        write!(sci, "{:.16e}", x.abs())?;
        let sci = &sci.buf[..sci.len];
        // sci is "d.dddddddddddddddde<exp>"
        let e_pos = sci.iter().position(|&b| b == b'e').ok_or(fmt::Error)?;
        let exp: i32 = std::str::from_utf8(&sci[e_pos + 1..])
            .map_err(|_| fmt::Error)?
            .parse()
            .map_err(|_| fmt::Error)?;
        let mut digits = [0u8; 17];
        digits[0] = sci[0];
        digits[1..].copy_from_slice(&sci[2..e_pos]);
        let mut n = digits.len();
        while n > 1 && digits[n - 1] == b'0' {
            n -= 1;
        }
        let digits = std::str::from_utf8(&digits[..n]).map_err(|_| fmt::Error)?;
        if x < 0.0 {
            f.write_str("-")?;
        }
        if (-5..17).contains(&exp) {
            if exp < 0 {
                f.write_str("0.")?;
                for _ in 0..(-exp - 1) {
                    f.write_str("0")?;
                }
                f.write_str(digits)
            } else {
                let int_len = exp as usize + 1;
                if digits.len() <= int_len {
                    f.write_str(digits)?;
                    for _ in digits.len()..int_len {
                        f.write_str("0")?;
                    }
                    Ok(())
                } else {
                    f.write_str(&digits[..int_len])?;
                    f.write_str(".")?;
                    f.write_str(&digits[int_len..])
                }
            }
        } else {
            f.write_str(&digits[..1])?;
            if digits.len() > 1 {
                f.write_str(".")?;
                f.write_str(&digits[1..])?;
            }
            write!(f, "e{}{:02}", if exp < 0 { '-' } else { '+' }, exp.abs())
        }
    }
}

/// `g17`, or the literal `NA` for a missing value.
pub fn g17_or_na(x: Option<f64>) -> String {
    match x {
        Some(v) if v.is_finite() => g17(v),
        _ => "NA".to_string(),
    }
}

/// serde helper emitting a JSON number with 17 significant digits.
pub(crate) fn serialize_g17<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
    use serde::ser::{Error, Serialize};
    if !x.is_finite() {
        return Err(S::Error::custom("non-finite number in JSON output"));
    }
    let raw = RawValue::from_string(g17(*x)).map_err(S::Error::custom)?;
    raw.serialize(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_printf_g17() {
        assert_eq!(g17(-0.7), "-0.69999999999999996");
        assert_eq!(g17(1.0), "1");
        assert_eq!(g17(0.5), "0.5");
        assert_eq!(g17(1e-7), "9.9999999999999995e-08");
        assert_eq!(g17(123456.0), "123456");
        assert_eq!(g17(1e20), "1e+20");
        assert_eq!(g17(0.0001), "0.0001");
        assert_eq!(g17(0.0), "0");
    }

    #[test]
    fn round_trips() {
        for &x in &[0.1, 1.0 / 3.0, -2.5e-300, 6.0625, 1.7976931348623157e308, 5e-324] {
            let back: f64 = g17(x).parse().unwrap();
            assert_eq!(back.to_bits(), x.to_bits());
        }
    }
}
