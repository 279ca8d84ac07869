//! Embedding sets, the vector file format, and exhaustive cosine search.

use std::collections::HashMap;
use std::path::Path;
use std::sync::Arc;

use arrow_array::{Array, FixedSizeListArray, Float32Array, RecordBatch};
use arrow_schema::{DataType, Field, Schema};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lake;
use crate::scalar::Real;

pub const DEFAULT_DIMENSION: usize = 1024;
/// File metadata key holding the vector width.
pub const META_DIMENSION: &str = "dimension";

/// Row-major matrix of vectors keyed by id.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingSet<T> {
    pub ids: Vec<String>,
    pub dimension: usize,
    pub data: Vec<T>,
}

impl<T: Real> EmbeddingSet<T> {
    pub fn new(ids: Vec<String>, dimension: usize, data: Vec<T>) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::invalid("embedding dimension must be positive"));
        }
        if data.len() != ids.len() * dimension {
            return Err(Error::invalid(format!(
                "{} ids need {} values at dimension {dimension}, got {}",
                ids.len(),
                ids.len() * dimension,
                data.len()
            )));
        }
        Ok(Self { ids, dimension, data })
    }

    pub fn from_rows(ids: Vec<String>, rows: &[Vec<T>]) -> Result<Self> {
        let dimension = rows.first().map_or(0, Vec::len);
        if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != dimension) {
            return Err(Error::InvalidVector {
                id: ids.get(i).cloned().unwrap_or_default(),
                reason: format!("length {} but dimension {dimension}", r.len()),
            });
        }
        Self::new(ids, dimension, rows.concat())
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.dimension..(i + 1) * self.dimension]
    }

    /// Copy with every row scaled to unit length.
    pub fn normalized(&self) -> Result<Self> {
        let mut data = self.data.clone();
        for (i, row) in data.chunks_mut(self.dimension).enumerate() {
            if let Some(bad) = row.iter().find(|v| !v.is_finite()) {
                return Err(Error::InvalidVector {
                    id: self.ids[i].clone(),
                    reason: format!("non-finite entry {bad}"),
                });
            }
            let norm = row.iter().map(|v| *v * *v).sum::<T>().sqrt();
            if !(norm > T::zero()) || !norm.is_finite() {
                return Err(Error::InvalidVector {
                    id: self.ids[i].clone(),
                    reason: "zero norm".into(),
                });
            }
            for v in row.iter_mut() {
                *v = *v / norm;
            }
        }
        Ok(Self {
            ids: self.ids.clone(),
            dimension: self.dimension,
            data,
        })
    }

    pub fn position_map(&self) -> HashMap<&str, usize> {
        self.ids.iter().enumerate().map(|(i, id)| (id.as_str(), i)).collect()
    }

    /// Rows for `ids`, in that order; `Err` names the first missing id.
    pub fn select(&self, ids: &[String]) -> std::result::Result<Self, String> {
        let pos = self.position_map();
        let mut data = Vec::with_capacity(ids.len() * self.dimension);
        for id in ids {
            let &i = pos.get(id.as_str()).ok_or_else(|| id.clone())?;
            data.extend_from_slice(self.row(i));
        }
        Ok(Self {
            ids: ids.to_vec(),
            dimension: self.dimension,
            data,
        })
    }
}

fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(x, y)| *x * *y).sum()
}

/// One ranked neighbour of a query.
#[derive(Debug, Clone, PartialEq)]
pub struct Neighbour<T> {
    pub query: usize,
    /// Owner group (e.g. term) of the best matching row.
    pub owner: usize,
    /// Row of the best matching vector within the owner group.
    pub row: usize,
    pub score: T,
}

/// Exhaustive cosine search grouped by owner.
///
/// `owners[r]` is the group of candidate row `r` and `owner_keys[g]` the
/// tie-break key of group `g`. A group scores the max over its rows. Per
/// query the `top_k` best groups are kept (ties by ascending key), then those
/// below `threshold` are dropped. Both sets are normalized here.
pub fn nearest_neighbours<T: Real>(
    queries: &EmbeddingSet<T>,
    candidates: &EmbeddingSet<T>,
    owners: &[usize],
    owner_keys: &[String],
    threshold: T,
    top_k: Option<usize>,
) -> Result<Vec<Vec<Neighbour<T>>>> {
    if queries.dimension != candidates.dimension {
        return Err(Error::invalid(format!(
            "dimension mismatch: queries {} vs candidates {}",
            queries.dimension, candidates.dimension
        )));
    }
    if owners.len() != candidates.len() {
        return Err(Error::invalid("one owner per candidate row required"));
    }
    let q = queries.normalized()?;
    let c = candidates.normalized()?;
    Ok((0..q.len())
        .into_par_iter()
        .map(|qi| {
            let qv = q.row(qi);
            let mut best: Vec<Option<(usize, T)>> = vec![None; owner_keys.len()];
            for r in 0..c.len() {
                let s = dot(qv, c.row(r));
                let slot = &mut best[owners[r]];
                if slot.is_none_or(|(_, b)| s > b) {
                    *slot = Some((r, s));
                }
            }
            let mut ranked: Vec<Neighbour<T>> = best
                .into_iter()
                .enumerate()
                .filter_map(|(owner, b)| {
                    b.map(|(row, score)| Neighbour {
                        query: qi,
                        owner,
                        row,
                        score,
                    })
                })
                .collect();
            ranked.sort_by(|a, b| {
                b.score
                    .partial_cmp(&a.score)
                    .unwrap_or(std::cmp::Ordering::Equal)
                    .then_with(|| owner_keys[a.owner].cmp(&owner_keys[b.owner]))
            });
            if let Some(k) = top_k {
                ranked.truncate(k);
            }
            ranked.retain(|n| n.score >= threshold);
            ranked
        })
        .collect())
}

fn vector_schema(dimension: usize) -> Result<Arc<Schema>> {
    let dim = i32::try_from(dimension).map_err(|_| Error::invalid("dimension too large"))?;
    Ok(Arc::new(Schema::new(vec![
        Field::new("id", DataType::Utf8, false),
        Field::new(
            "vector",
            DataType::FixedSizeList(Arc::new(Field::new("item", DataType::Float32, false)), dim),
            false,
        ),
    ])))
}

/// Write a vector file: `(id, vector: fixed_size_list<float32>)` plus the
/// dimension in file metadata.
pub fn write_vectors<T: Real>(path: &Path, set: &EmbeddingSet<T>) -> Result<()> {
    let schema = vector_schema(set.dimension)?;
    let values = Float32Array::from(
        set.data
            .iter()
            .map(|v| v.to_f32().unwrap_or(f32::NAN))
            .collect::<Vec<_>>(),
    );
    let list = FixedSizeListArray::try_new(
        Arc::new(Field::new("item", DataType::Float32, false)),
        set.dimension as i32,
        Arc::new(values),
        None,
    )?;
    let batch = RecordBatch::try_new(
        schema.clone(),
        vec![lake::utf8(set.ids.iter().map(Some)), Arc::new(list)],
    )?;
    let mut sink = lake::ParquetSink::create_with_metadata(
        path,
        schema,
        "vectors",
        &[(META_DIMENSION, set.dimension.to_string())],
    )?;
    sink.write(&batch)?;
    sink.finish()
}

pub fn read_vectors<T: Real>(path: &Path) -> Result<EmbeddingSet<T>> {
    let meta = lake::read_metadata(path)?;
    let declared: Option<usize> = meta.get(META_DIMENSION).and_then(|d| d.parse().ok());
    let batch = lake::read_table(path)?;
    let name = path.display().to_string();
    let ids: Vec<String> = lake::string_column(&batch, &name, "id")?
        .into_iter()
        .map(Option::unwrap_or_default)
        .collect();
    let col = lake::column(&batch, &name, "vector")?;
    let list = col
        .as_any()
        .downcast_ref::<FixedSizeListArray>()
        .ok_or_else(|| Error::invalid(format!("{name}: vector column is not a fixed-size list")))?;
    let dimension = list.value_length() as usize;
    if let Some(d) = declared {
        if d != dimension {
            return Err(Error::invalid(format!(
                "{name}: metadata dimension {d} but vectors have {dimension}"
            )));
        }
    }
    let mut data = Vec::with_capacity(ids.len() * dimension);
    for i in 0..list.len() {
        let row = list.value(i);
        let row = row
            .as_any()
            .downcast_ref::<Float32Array>()
            .ok_or_else(|| Error::invalid(format!("{name}: vector items are not float32")))?;
        if row.null_count() > 0 {
            return Err(Error::InvalidVector {
                id: ids[i].clone(),
                reason: "null entry".into(),
            });
        }
        data.extend(row.values().iter().map(|v| T::from_f32(*v).unwrap_or_else(T::nan)));
    }
    EmbeddingSet::new(ids, dimension, data)
}
