//! Second-precision UTC timestamps.
//!
//! Everything in the archive carries plain UTC epoch seconds. Text form is
//! the strict ISO-8601 profile `YYYY-MM-DDTHH:MM:SSZ`; no offsets, no
//! fractional seconds. The civil-date conversion is self-contained so that
//! the canonical object serialization never depends on a date library.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

pub const SECONDS_PER_DAY: i64 = 86_400;

/// Latest representable instant: 9999-12-31T23:59:59Z.
const MAX_EPOCH_SECONDS: i64 = 253_402_300_799;

/// A UTC instant with second precision, in `1970-01-01T00:00:00Z ..= 9999-12-31T23:59:59Z`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Timestamp(i64);

impl Timestamp {
    pub const MIN: Timestamp = Timestamp(0);
    pub const MAX: Timestamp = Timestamp(MAX_EPOCH_SECONDS);

    pub fn from_epoch_seconds(seconds: i64) -> Result<Timestamp> {
        if (0..=MAX_EPOCH_SECONDS).contains(&seconds) {
            Ok(Timestamp(seconds))
        } else {
            Err(Error::InvalidTimestamp(format!("{seconds} epoch seconds")))
        }
    }

    pub fn epoch_seconds(self) -> i64 {
        self.0
    }

    /// Seconds from `earlier` to `self`; negative if `self` is earlier.
    pub fn seconds_since(self, earlier: Timestamp) -> i64 {
        self.0 - earlier.0
    }

    pub fn plus_seconds(self, seconds: i64) -> Result<Timestamp> {
        Timestamp::from_epoch_seconds(self.0 + seconds)
    }
}

/// Days since the epoch for a civil date (proleptic Gregorian).
fn days_from_civil(year: i64, month: u32, day: u32) -> i64 {
    let y = if month <= 2 { year - 1 } else { year };
    let era = y.div_euclid(400);
    let yoe = y - era * 400; // [0, 399]
    let mp = if month > 2 { month - 3 } else { month + 9 } as i64;
    let doy = (153 * mp + 2) / 5 + day as i64 - 1; // [0, 365]
    let doe = yoe * 365 + yoe / 4 - yoe / 100 + doy; // [0, 146096]
    era * 146_097 + doe - 719_468
}

/// Inverse of [`days_from_civil`].
fn civil_from_days(z: i64) -> (i64, u32, u32) {
    let z = z + 719_468;
    let era = z.div_euclid(146_097);
    let doe = z - era * 146_097; // [0, 146096]
    let yoe = (doe - doe / 1460 + doe / 36524 - doe / 146_096) / 365; // [0, 399]
    let y = yoe + era * 400;
    let doy = doe - (365 * yoe + yoe / 4 - yoe / 100); // [0, 365]
    let mp = (5 * doy + 2) / 153; // [0, 11]
    let day = (doy - (153 * mp + 2) / 5 + 1) as u32; // [1, 31]
    let month = if mp < 10 { mp + 3 } else { mp - 9 } as u32; // [1, 12]
    (if month <= 2 { y + 1 } else { y }, month, day)
}

fn is_leap_year(year: i64) -> bool {
    year % 4 == 0 && (year % 100 != 0 || year % 400 == 0)
}

fn days_in_month(year: i64, month: u32) -> u32 {
    match month {
        1 | 3 | 5 | 7 | 8 | 10 | 12 => 31,
        4 | 6 | 9 | 11 => 30,
        2 if is_leap_year(year) => 29,
        2 => 28,
        _ => 0,
    }
}

impl fmt::Display for Timestamp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let days = self.0.div_euclid(SECONDS_PER_DAY);
        let secs = self.0.rem_euclid(SECONDS_PER_DAY);
        let (year, month, day) = civil_from_days(days);
        write!(
            f,
            "{:04}-{:02}-{:02}T{:02}:{:02}:{:02}Z",
            year,
            month,
            day,
            secs / 3600,
            (secs % 3600) / 60,
            secs % 60
        )
    }
}

impl FromStr for Timestamp {
    type Err = Error;

    fn from_str(s: &str) -> Result<Timestamp> {
        let bad = || Error::InvalidTimestamp(s.to_string());
        let bytes = s.as_bytes();
        if bytes.len() != 20
            || bytes[4] != b'-'
            || bytes[7] != b'-'
            || bytes[10] != b'T'
            || bytes[13] != b':'
            || bytes[16] != b':'
            || bytes[19] != b'Z'
        {
            return Err(bad());
        }
        let num = |range: std::ops::Range<usize>| -> Result<i64> {
            let part = &s[range];
            if !part.bytes().all(|b| b.is_ascii_digit()) {
                return Err(bad());
            }
            part.parse::<i64>().map_err(|_| bad())
        };
        let year = num(0..4)?;
        let month = num(5..7)? as u32;
        let day = num(8..10)? as u32;
        let hour = num(11..13)?;
        let minute = num(14..16)?;
        let second = num(17..19)?;
        if !(1..=12).contains(&month)
            || day < 1
            || day > days_in_month(year, month)
            || hour > 23
            || minute > 59
            || second > 59
        {
            return Err(bad());
        }
        let total = days_from_civil(year, month, day) * SECONDS_PER_DAY
            + hour * 3600
            + minute * 60
            + second;
        Timestamp::from_epoch_seconds(total).map_err(|_| bad())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn epoch_is_origin_of_time() {
        assert_eq!(Timestamp::MIN.to_string(), "1970-01-01T00:00:00Z");
        assert_eq!("1970-01-01T00:00:00Z".parse::<Timestamp>().unwrap(), Timestamp::MIN);
    }

    // Anchors checked by hand: 1970..2020 holds 12 leap days (1972..2016),
    // so 2020-01-01 = (50*365 + 12) * 86400 = 1_577_836_800; 1970..2000 holds
    // 7 leap days (1972..1996), so 2000-02-29 = (10_957 + 59) * 86400.
    #[test]
    fn known_anchors() {
        let t = "2020-01-01T00:00:00Z".parse::<Timestamp>().unwrap();
        assert_eq!(t.epoch_seconds(), 1_577_836_800);
        let t = "2000-02-29T00:00:00Z".parse::<Timestamp>().unwrap();
        assert_eq!(t.epoch_seconds(), 951_782_400);
        let t = Timestamp::from_epoch_seconds(86_399).unwrap();
        assert_eq!(t.to_string(), "1970-01-01T23:59:59Z");
    }

    #[test]
    fn rejects_invalid_dates() {
        for s in [
            "2021-02-29T00:00:00Z", // not a leap year
            "2020-13-01T00:00:00Z",
            "2020-00-10T00:00:00Z",
            "2020-01-32T00:00:00Z",
            "2020-01-01T24:00:00Z",
            "2020-01-01 00:00:00Z",
            "2020-01-01T00:00:00",
            "2020-01-01T00:00:00+00:00",
            "1969-12-31T23:59:59Z", // before the epoch
            "not a date",
            "",
        ] {
            assert!(s.parse::<Timestamp>().is_err(), "accepted {s:?}");
        }
    }

    #[test]
    fn leap_day_parses() {
        let t = "2020-02-29T12:30:45Z".parse::<Timestamp>().unwrap();
        assert_eq!(t.to_string(), "2020-02-29T12:30:45Z");
    }

    #[test]
    fn round_trip_over_range() {
        // Sweep a coarse grid over the full supported range.
        let mut s = 0i64;
        while s <= MAX_EPOCH_SECONDS {
            let t = Timestamp::from_epoch_seconds(s).unwrap();
            let back = t.to_string().parse::<Timestamp>().unwrap();
            assert_eq!(back, t);
            s += 997 * SECONDS_PER_DAY + 12_345; // coprime-ish stride
        }
    }

    #[test]
    fn out_of_range_epoch_rejected() {
        assert!(Timestamp::from_epoch_seconds(-1).is_err());
        assert!(Timestamp::from_epoch_seconds(MAX_EPOCH_SECONDS + 1).is_err());
        assert_eq!(Timestamp::MAX.to_string(), "9999-12-31T23:59:59Z");
    }
}
