use serde::Serialize;
use serde_json::{Map, Number, Value};

pub const SCHEMA: u32 = 1;

/// One run of a subcommand: everything needed to repeat it, and what it found.
#[derive(Debug, Serialize)]
pub struct RunRecord {
    pub schema: u32,
    pub subcommand: String,
    pub params: Value,
    pub seed: Option<u64>,
    pub results: Value,
    /// Seconds spent in the computation.
    pub wall_clock: f64,
    pub version: String,
}

#[derive(Debug, Serialize)]
pub struct ErrorRecord {
    pub schema: u32,
    pub subcommand: String,
    pub params: Value,
    pub error: ErrorBody,
    pub version: String,
}

#[derive(Debug, Serialize)]
pub struct ErrorBody {
    pub kind: String,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<Value>,
}

pub fn version() -> String {
    env!("CARGO_PKG_VERSION").to_string()
}

/// Serializes with integral floats written as integers, so `2.0` becomes `2`.
pub fn to_json<T: Serialize>(v: &T) -> serde_json::Result<String> {
    let mut value = serde_json::to_value(v)?;
    tidy(&mut value);
    serde_json::to_string(&value)
}

pub fn tidy(v: &mut Value) {
    match v {
        Value::Number(n) => {
            if let Some(f) = n.as_f64().filter(|_| n.is_f64()) {
                if f.fract() == 0.0 && f.abs() < 9.0e15 && !(f == 0.0 && f.is_sign_negative()) {
                    *n = Number::from(f as i64);
                }
            }
        }
        Value::Array(a) => a.iter_mut().for_each(tidy),
        Value::Object(m) => m.values_mut().for_each(tidy),
        _ => {}
    }
}

pub fn object(pairs: Vec<(&str, Value)>) -> Value {
    Value::Object(pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect::<Map<_, _>>())
}
