//! Serde helpers shared by the catalogs.

/// Bound vectors where `±∞` is written as the strings `"inf"` / `"-inf"`.
pub mod bounds {
    use serde::{de, Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum Bound {
        Num(f64),
        Text(String),
    }

    pub fn serialize<S: Serializer>(v: &[f64], s: S) -> Result<S::Ok, S::Error> {
        let out: Vec<Bound> = v
            .iter()
            .map(|&b| {
                if b == f64::INFINITY {
                    Bound::Text("inf".into())
                } else if b == f64::NEG_INFINITY {
                    Bound::Text("-inf".into())
                } else {
                    Bound::Num(b)
                }
            })
            .collect();
        out.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
        let raw = Vec::<Bound>::deserialize(d)?;
        raw.into_iter()
            .map(|b| match b {
                Bound::Num(v) => Ok(v),
                Bound::Text(t) => match t.as_str() {
                    "inf" | "+inf" | "Infinity" => Ok(f64::INFINITY),
                    "-inf" | "-Infinity" => Ok(f64::NEG_INFINITY),
                    other => Err(de::Error::custom(format!("bad bound {other:?}"))),
                },
            })
            .collect()
    }
}

/// Coordinate `k` of a parameter vector; length-1 vectors broadcast.
pub(crate) fn param(v: &[f64], k: usize) -> f64 {
    if v.len() == 1 {
        v[0]
    } else {
        v[k]
    }
}

/// Dimension pinned by a coordinate-wise parameter vector (`None` if it broadcasts).
pub(crate) fn pinned_dim(v: &[f64]) -> Option<usize> {
    (v.len() != 1).then_some(v.len())
}
