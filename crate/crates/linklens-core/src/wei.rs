//! Exact conversion between decimal ether strings and integer wei.
//!
//! Explorer exports carry values as decimal ether (`"0.01"`). Parsing goes
//! through integer arithmetic only: up to 18 fractional digits convert
//! exactly, and anything that would lose precision (more than 18 significant
//! fractional digits, negatives, non-decimal syntax) is an error rather than
//! a silent rounding.

use thiserror::Error;

use crate::model::WEI_PER_ETH;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum WeiError {
    #[error("negative value {0:?} not allowed")]
    Negative(String),
    #[error("malformed decimal {input:?}: {reason}")]
    Malformed { input: String, reason: String },
    #[error("value {0:?} has more than 18 significant fractional digits")]
    TooPrecise(String),
    #[error("value {0:?} overflows the wei range")]
    Overflow(String),
}

/// Parse a decimal ether string into wei, exactly.
///
/// Accepts `"12"`, `"0.01"`, `".5"`, `"3."`, and an empty string (zero).
/// Fractional digits beyond the 18th must be zero.
pub fn eth_to_wei(raw: &str) -> Result<u128, WeiError> {
    let s = raw.trim();
    if s.is_empty() {
        return Ok(0);
    }
    if let Some(rest) = s.strip_prefix('-') {
        // "-0" is still rejected: exports never emit signed values.
        if !rest.is_empty() {
            return Err(WeiError::Negative(raw.to_string()));
        }
    }
    let (int_part, frac_part) = match s.split_once('.') {
        Some((i, f)) => (i, f),
        None => (s, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(WeiError::Malformed {
            input: raw.to_string(),
            reason: "no digits".to_string(),
        });
    }
    if !int_part.bytes().all(|b| b.is_ascii_digit())
        || !frac_part.bytes().all(|b| b.is_ascii_digit())
    {
        return Err(WeiError::Malformed {
            input: raw.to_string(),
            reason: "expected plain decimal digits".to_string(),
        });
    }
    let mut wei: u128 = 0;
    for b in int_part.bytes() {
        wei = wei
            .checked_mul(10)
            .and_then(|w| w.checked_add((b - b'0') as u128))
            .ok_or_else(|| WeiError::Overflow(raw.to_string()))?;
    }
    wei = wei
        .checked_mul(WEI_PER_ETH)
        .ok_or_else(|| WeiError::Overflow(raw.to_string()))?;
    let mut frac: u128 = 0;
    for (i, b) in frac_part.bytes().enumerate() {
        if i < 18 {
            frac = frac * 10 + (b - b'0') as u128;
        } else if b != b'0' {
            return Err(WeiError::TooPrecise(raw.to_string()));
        }
    }
    let missing = 18usize.saturating_sub(frac_part.len().min(18));
    frac *= 10u128.pow(missing as u32);
    wei.checked_add(frac)
        .ok_or_else(|| WeiError::Overflow(raw.to_string()))
}

/// Render wei as a decimal ether string with no trailing fractional zeros.
/// `eth_to_wei(wei_to_eth(w)) == w` for every `w`.
pub fn wei_to_eth(wei: u128) -> String {
    let int = wei / WEI_PER_ETH;
    let frac = wei % WEI_PER_ETH;
    if frac == 0 {
        return int.to_string();
    }
    let digits = format!("{frac:018}");
    let trimmed = digits.trim_end_matches('0');
    format!("{int}.{trimmed}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registration_floor_parses_exactly() {
        assert_eq!(eth_to_wei("0.01").unwrap(), 10_000_000_000_000_000);
        assert_eq!(eth_to_wei("1").unwrap(), WEI_PER_ETH);
        assert_eq!(eth_to_wei("0").unwrap(), 0);
        assert_eq!(eth_to_wei("").unwrap(), 0);
        assert_eq!(eth_to_wei(".5").unwrap(), WEI_PER_ETH / 2);
        assert_eq!(eth_to_wei("2.").unwrap(), 2 * WEI_PER_ETH);
    }

    #[test]
    fn eighteen_fractional_digits_are_exact() {
        assert_eq!(eth_to_wei("0.000000000000000001").unwrap(), 1);
        // A 19th digit is fine when zero, fatal when significant.
        assert_eq!(eth_to_wei("0.0000000000000000010").unwrap(), 1);
        assert_eq!(
            eth_to_wei("0.0000000000000000011"),
            Err(WeiError::TooPrecise("0.0000000000000000011".into()))
        );
    }

    #[test]
    fn rejects_negative_and_malformed() {
        assert_eq!(eth_to_wei("-1"), Err(WeiError::Negative("-1".into())));
        assert!(matches!(eth_to_wei("1e3"), Err(WeiError::Malformed { .. })));
        assert!(matches!(eth_to_wei("1.2.3"), Err(WeiError::Malformed { .. })));
        assert!(matches!(eth_to_wei("."), Err(WeiError::Malformed { .. })));
    }

    #[test]
    fn rendering_trims_trailing_zeros() {
        assert_eq!(wei_to_eth(10_000_000_000_000_000), "0.01");
        assert_eq!(wei_to_eth(0), "0");
        assert_eq!(wei_to_eth(WEI_PER_ETH), "1");
        assert_eq!(wei_to_eth(1), "0.000000000000000001");
        assert_eq!(wei_to_eth(1_500_000_000_000_000_000), "1.5");
    }

    #[test]
    fn round_trip_examples() {
        for w in [
            0u128,
            1,
            999,
            10_000_000_000_000_000,
            WEI_PER_ETH,
            123_456_789_012_345_678_901,
            u128::MAX,
        ] {
            assert_eq!(eth_to_wei(&wei_to_eth(w)).unwrap(), w, "round trip {w}");
        }
    }
}
