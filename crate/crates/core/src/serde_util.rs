//! Serde adapters: vectors as flat arrays, matrices as row-major nested arrays.

pub mod vector {
    use serde::{de::Error as _, Deserialize, Deserializer, Serializer};

    use crate::Vector;

    pub fn serialize<S: Serializer>(v: &Vector, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(v.iter())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vector, D::Error> {
        let coords = Vec::<f64>::deserialize(d)?;
        crate::checked_vector(coords).map_err(D::Error::custom)
    }
}

pub mod option_vector {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use crate::Vector;

    pub fn serialize<S: Serializer>(v: &Option<Vector>, s: S) -> Result<S::Ok, S::Error> {
        v.as_ref().map(|v| v.iter().copied().collect::<Vec<_>>()).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Vector>, D::Error> {
        use serde::de::Error as _;
        match Option::<Vec<f64>>::deserialize(d)? {
            None => Ok(None),
            Some(c) => crate::checked_vector(c).map(Some).map_err(D::Error::custom),
        }
    }
}

pub mod vectors {
    use serde::{de::Error as _, Deserialize, Deserializer, Serializer};

    use crate::Vector;

    pub fn serialize<S: Serializer>(vs: &[Vector], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(vs.iter().map(|v| v.iter().copied().collect::<Vec<_>>()))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Vector>, D::Error> {
        Vec::<Vec<f64>>::deserialize(d)?
            .into_iter()
            .map(|c| crate::checked_vector(c).map_err(D::Error::custom))
            .collect()
    }
}
