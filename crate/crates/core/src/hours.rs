use std::fmt;

use chrono::{DateTime, NaiveDateTime, TimeZone, Timelike, Utc};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// UTC timestamp at hour resolution, stored as whole hours since the Unix
/// epoch. Serialized as `YYYY-MM-DDThh:00Z`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct HourStamp(pub i64);

impl HourStamp {
    /// Accepts `YYYY-MM-DDThh:00Z`, `YYYY-MM-DDThh:mm:ssZ` and RFC 3339 with
    /// an offset. Minutes and seconds must be zero.
    pub fn parse(s: &str) -> Result<Self, String> {
        let s = s.trim();
        let dt: DateTime<Utc> = if let Ok(dt) = DateTime::parse_from_rfc3339(s) {
            dt.with_timezone(&Utc)
        } else if let Ok(naive) = NaiveDateTime::parse_from_str(s, "%Y-%m-%dT%H:%MZ") {
            Utc.from_utc_datetime(&naive)
        } else {
            return Err(format!("unparseable timestamp '{s}' (expected YYYY-MM-DDThh:00Z)"));
        };
        if dt.minute() != 0 || dt.second() != 0 || dt.nanosecond() != 0 {
            return Err(format!("timestamp '{s}' is not on the hour"));
        }
        Ok(HourStamp(dt.timestamp().div_euclid(3600)))
    }

    pub fn plus_hours(self, h: i64) -> Self {
        HourStamp(self.0 + h)
    }

    pub fn to_datetime(self) -> DateTime<Utc> {
        Utc.timestamp_opt(self.0 * 3600, 0)
            .single()
            .expect("hour stamps stay in chrono's range")
    }
}

impl fmt::Display for HourStamp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_datetime().format("%Y-%m-%dT%H:00Z"))
    }
}

impl Serialize for HourStamp {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for HourStamp {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        HourStamp::parse(&s).map_err(serde::de::Error::custom)
    }
}
