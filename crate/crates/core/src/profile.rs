//! Channel characteristics and the AWS price book.

use std::fmt;
use std::ops::{Add, AddAssign, Mul};

use serde::{Deserialize, Serialize};

const PICO: f64 = 1e12;

/// Money in integer pico-dollars.
///
/// Per-kB DynamoDB read prices are fractions of a nano-dollar, so a coarser
/// unit would not represent the price book exactly.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Dollars(i128);

impl Dollars {
    pub const ZERO: Dollars = Dollars(0);

    pub const fn from_pico(pico: i128) -> Self {
        Dollars(pico)
    }

    /// Rounds to the nearest pico-dollar.
    pub fn from_f64(dollars: f64) -> Self {
        Dollars((dollars * PICO).round() as i128)
    }

    pub const fn pico(self) -> i128 {
        self.0
    }

    pub fn as_f64(self) -> f64 {
        self.0 as f64 / PICO
    }

    /// Scales by a non-negative real factor, rounding to the nearest pico-dollar.
    pub fn scale(self, factor: f64) -> Dollars {
        Dollars((self.0 as f64 * factor).round() as i128)
    }
}

impl Add for Dollars {
    type Output = Dollars;
    fn add(self, rhs: Dollars) -> Dollars {
        Dollars(self.0 + rhs.0)
    }
}

impl AddAssign for Dollars {
    fn add_assign(&mut self, rhs: Dollars) {
        self.0 += rhs.0;
    }
}

impl Mul<u64> for Dollars {
    type Output = Dollars;
    fn mul(self, rhs: u64) -> Dollars {
        Dollars(self.0 * rhs as i128)
    }
}

impl std::iter::Sum for Dollars {
    fn sum<I: Iterator<Item = Dollars>>(iter: I) -> Dollars {
        iter.fold(Dollars::ZERO, Add::add)
    }
}

/// Renders with cents, e.g. `$1,580.00`.
impl fmt::Display for Dollars {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cents = (self.0 + self.0.signum() * 5_000_000_000) / 10_000_000_000;
        let sign = if cents < 0 { "-" } else { "" };
        let cents = cents.abs();
        let whole = (cents / 100).to_string();
        let mut grouped = String::new();
        for (i, ch) in whole.chars().enumerate() {
            if i > 0 && (whole.len() - i).is_multiple_of(3) {
                grouped.push(',');
            }
            grouped.push(ch);
        }
        write!(f, "{sign}${grouped}.{:02}", cents % 100)
    }
}

impl Serialize for Dollars {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(self.as_f64())
    }
}

impl<'de> Deserialize<'de> for Dollars {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = f64::deserialize(d)?;
        if !(v >= 0.0) {
            return Err(serde::de::Error::custom("price must be a non-negative number"));
        }
        Ok(Dollars::from_f64(v))
    }
}

/// Per-unit rates used by the cost model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PriceComponents {
    /// Function runtime, per GiB-second.
    pub p_faas: Dollars,
    /// Hole-punching server VM, per second.
    pub p_hps: Dollars,
    /// In-memory cache instance, per second.
    pub p_redis: Dollars,
    /// Object storage GET, per request.
    pub p_s3_d: Dollars,
    /// Object storage PUT, per request.
    pub p_s3_u: Dollars,
    /// Key-value read, per 1 kB unit.
    pub p_ddb_d: Dollars,
    /// Key-value write, per 1 kB unit.
    pub p_ddb_u: Dollars,
}

impl PriceComponents {
    /// AWS eu-central-1 price book.
    pub fn aws_eu_central_1() -> Self {
        PriceComponents {
            p_faas: Dollars::from_f64(1.67e-5),
            p_hps: Dollars::from_f64(3.72e-6),
            p_redis: Dollars::from_f64(1.05e-5),
            p_s3_d: Dollars::from_f64(4.3e-7),
            p_s3_u: Dollars::from_f64(5.4e-6),
            p_ddb_d: Dollars::from_f64(7.62e-8),
            p_ddb_u: Dollars::from_f64(1.5e-6),
        }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        PriceComponents {
            p_faas: self.p_faas.scale(factor),
            p_hps: self.p_hps.scale(factor),
            p_redis: self.p_redis.scale(factor),
            p_s3_d: self.p_s3_d.scale(factor),
            p_s3_u: self.p_s3_u.scale(factor),
            p_ddb_d: self.p_ddb_d.scale(factor),
            p_ddb_u: self.p_ddb_u.scale(factor),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChannelKind {
    S3,
    DynamoDb,
    Redis,
    Direct,
}

impl ChannelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ChannelKind::S3 => "s3",
            ChannelKind::DynamoDb => "dynamodb",
            ChannelKind::Redis => "redis",
            ChannelKind::Direct => "direct",
        }
    }

    pub fn is_mediated(self) -> bool {
        self != ChannelKind::Direct
    }
}

impl fmt::Display for ChannelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for ChannelKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "s3" => Ok(ChannelKind::S3),
            "dynamodb" | "ddb" => Ok(ChannelKind::DynamoDb),
            "redis" => Ok(ChannelKind::Redis),
            "direct" => Ok(ChannelKind::Direct),
            other => Err(format!("unknown channel '{other}'")),
        }
    }
}

/// Latency, bandwidth, limits and prices of one channel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelProfile {
    /// Preset label, e.g. `s3-table2`. Reports carry it so the source of a
    /// number is always visible.
    pub name: String,
    pub kind: ChannelKind,
    /// Seconds.
    pub alpha: f64,
    /// Bytes per second.
    pub beta_inv: f64,
    pub max_message: u64,
    pub price: PriceComponents,
    /// Minimum sleep between polls, seconds.
    #[serde(default)]
    pub poll_floor: f64,
}

const MB: f64 = 1e6;

impl ChannelProfile {
    fn preset(name: &str, kind: ChannelKind, alpha_ms: f64, mb_per_s: f64, max_message: u64) -> Self {
        ChannelProfile {
            name: name.to_string(),
            kind,
            alpha: alpha_ms * 1e-3,
            beta_inv: mb_per_s * MB,
            max_message,
            price: PriceComponents::aws_eu_central_1(),
            poll_floor: if kind == ChannelKind::S3 { 0.020 } else { 0.0 },
        }
    }

    /// Object storage with the measured 50 MB/s bandwidth.
    pub fn s3_table2() -> Self {
        Self::preset("s3-table2", ChannelKind::S3, 14.7, 50.0, 5_000_000_000_000)
    }

    /// Object storage with the bandwidth implied by the 16.70 ms price-analysis
    /// time for 1 MB (500 MB/s).
    pub fn s3_table4_derived() -> Self {
        Self::preset("s3-table4-derived", ChannelKind::S3, 14.7, 500.0, 5_000_000_000_000)
    }

    pub fn dynamodb() -> Self {
        Self::preset("dynamodb", ChannelKind::DynamoDb, 8.9, 7.0, 400_000)
    }

    pub fn redis() -> Self {
        Self::preset("redis", ChannelKind::Redis, 0.88, 100.0, 512 * 1024 * 1024)
    }

    pub fn direct() -> Self {
        Self::preset("direct", ChannelKind::Direct, 0.39, 400.0, u64::MAX)
    }

    /// Looks up a built-in preset. `s3` resolves to `s3-table2`.
    pub fn by_name(name: &str) -> Option<Self> {
        match name {
            "s3" | "s3-table2" => Some(Self::s3_table2()),
            "s3-table4-derived" => Some(Self::s3_table4_derived()),
            "dynamodb" | "ddb" => Some(Self::dynamodb()),
            "redis" => Some(Self::redis()),
            "direct" => Some(Self::direct()),
            _ => None,
        }
    }

    /// The measured preset set, one per channel kind.
    pub fn table2() -> Vec<Self> {
        vec![Self::s3_table2(), Self::dynamodb(), Self::redis(), Self::direct()]
    }

    /// Same as [`table2`](Self::table2) with the 500 MB/s object-storage preset.
    pub fn table4_derived() -> Vec<Self> {
        vec![Self::s3_table4_derived(), Self::dynamodb(), Self::redis(), Self::direct()]
    }

    pub fn with_prices(mut self, price: PriceComponents) -> Self {
        self.price = price;
        self
    }

    pub fn validate(&self) -> Result<(), String> {
        if !(self.alpha >= 0.0) {
            return Err(format!("{}: alpha must be >= 0", self.name));
        }
        if !(self.beta_inv > 0.0) {
            return Err(format!("{}: beta_inv must be > 0", self.name));
        }
        if self.max_message == 0 {
            return Err(format!("{}: max_message must be > 0", self.name));
        }
        if !(self.poll_floor >= 0.0) {
            return Err(format!("{}: poll_floor must be >= 0", self.name));
        }
        Ok(())
    }
}

/// Billed 1 kB units for one key-value request of `bytes`; partial units
/// round up and every request bills at least one unit.
pub fn ddb_units(bytes: u64) -> u64 {
    bytes.div_ceil(1000).max(1)
}
