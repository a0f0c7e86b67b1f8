//! Data-level class-imbalance treatments.
//!
//! All distances are Euclidean on the raw feature values; neighbour ties are
//! broken by lower row position so results never depend on thread scheduling.
//! Every resampler balances the two classes to equal counts (Tomek links
//! only removes rows and does not balance).

use std::fmt;
use std::str::FromStr;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ResampleMethod {
    RandomOver,
    RandomUnder,
    Smote,
    Tomek,
    SmoteTomek,
}

impl ResampleMethod {
    pub const ALL: [ResampleMethod; 5] = [
        ResampleMethod::RandomOver,
        ResampleMethod::RandomUnder,
        ResampleMethod::Smote,
        ResampleMethod::Tomek,
        ResampleMethod::SmoteTomek,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ResampleMethod::RandomOver => "over",
            ResampleMethod::RandomUnder => "under",
            ResampleMethod::Smote => "smote",
            ResampleMethod::Tomek => "tomek",
            ResampleMethod::SmoteTomek => "smote-tomek",
        }
    }

    fn uses_smote(self) -> bool {
        matches!(self, ResampleMethod::Smote | ResampleMethod::SmoteTomek)
    }
}

impl fmt::Display for ResampleMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ResampleMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "over" | "random-over" | "random_over" => ResampleMethod::RandomOver,
            "under" | "random-under" | "random_under" => ResampleMethod::RandomUnder,
            "smote" => ResampleMethod::Smote,
            "tomek" => ResampleMethod::Tomek,
            "smote-tomek" | "smote_tomek" => ResampleMethod::SmoteTomek,
            other => {
                return Err(Error::InvalidInput(format!("unknown resampling method {other:?}")))
            }
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResampleSpec {
    pub method: ResampleMethod,
    /// Neighbours considered by SMOTE.
    pub k_neighbors: usize,
    pub seed: u64,
}

impl ResampleSpec {
    pub fn validate_for(&self, ds: &Dataset) -> Result<()> {
        if self.method.uses_smote() {
            let (minority, _) = minority_majority(ds)?;
            check_k(self.k_neighbors, ds.positions_of(minority).len())?;
        }
        Ok(())
    }
}

pub fn resample(ds: &Dataset, spec: &ResampleSpec) -> Result<Dataset> {
    spec.validate_for(ds)?;
    match spec.method {
        ResampleMethod::RandomOver => random_oversample(ds, spec.seed),
        ResampleMethod::RandomUnder => random_undersample(ds, spec.seed),
        ResampleMethod::Smote => smote(ds, spec.k_neighbors, spec.seed),
        ResampleMethod::Tomek => tomek_links(ds),
        ResampleMethod::SmoteTomek => smote_tomek(ds, spec.k_neighbors, spec.seed),
    }
}

/// `(minority, majority)` labels; a balanced input reports `(1, 0)`.
fn minority_majority(ds: &Dataset) -> Result<(u8, u8)> {
    let [zeros, ones] = ds.class_counts();
    if zeros == 0 || ones == 0 {
        return Err(Error::InvalidDataset("resampling needs both classes present".into()));
    }
    Ok(if zeros < ones { (0, 1) } else { (1, 0) })
}

fn check_k(k: usize, minority: usize) -> Result<()> {
    if k == 0 || k >= minority {
        return Err(Error::InvalidInput(format!(
            "k_neighbors = {k} must satisfy 1 <= k < minority size {minority}"
        )));
    }
    Ok(())
}

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Duplicates minority rows (sampling with replacement) until classes balance.
pub fn random_oversample(ds: &Dataset, seed: u64) -> Result<Dataset> {
    let (minority, majority) = minority_majority(ds)?;
    let minority_pos = ds.positions_of(minority);
    let deficit = ds.positions_of(majority).len() - minority_pos.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut features = Vec::with_capacity(deficit * ds.feature_count());
    for _ in 0..deficit {
        let pick = minority_pos[rng.gen_range(0..minority_pos.len())];
        features.extend_from_slice(ds.row(pick));
    }
    let mut out = ds.clone();
    out.append_rows(&features, &vec![minority; deficit]);
    Ok(out)
}

/// Keeps a seeded sample (without replacement) of majority rows equal in size
/// to the minority class. Output keeps storage order.
pub fn random_undersample(ds: &Dataset, seed: u64) -> Result<Dataset> {
    let (minority, majority) = minority_majority(ds)?;
    let minority_pos = ds.positions_of(minority);
    let majority_pos = ds.positions_of(majority);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut keep: Vec<usize> = sample(&mut rng, majority_pos.len(), minority_pos.len())
        .into_iter()
        .map(|i| majority_pos[i])
        .chain(minority_pos)
        .collect();
    keep.sort_unstable();
    Ok(ds.select(&keep))
}

/// Positions (within `candidates`) of the `k` nearest neighbours of
/// `candidates[i]`, excluding itself, by (distance, row id).
fn k_nearest(ds: &Dataset, candidates: &[usize], i: usize, k: usize) -> Vec<usize> {
    let q = ds.row(candidates[i]);
    let ids = ds.row_ids();
    let mut dist: Vec<(f64, usize, usize)> = candidates
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != i)
        .map(|(j, &pos)| (squared_distance(q, ds.row(pos)), ids[pos], j))
        .collect();
    let cmp = |a: &(f64, usize, usize), b: &(f64, usize, usize)| {
        a.0.total_cmp(&b.0).then(a.1.cmp(&b.1))
    };
    if k < dist.len() {
        dist.select_nth_unstable_by(k - 1, cmp);
        dist.truncate(k);
    }
    dist.sort_by(cmp);
    dist.into_iter().map(|(_, _, j)| j).collect()
}

/// Synthetic minority oversampling.
///
/// Each synthetic row is `x + u * (nn - x)` for a uniformly chosen minority
/// row `x`, one of its `k_neighbors` nearest minority neighbours `nn`, and
/// `u ~ U[0, 1)`; rows are generated until the classes balance.
pub fn smote(ds: &Dataset, k_neighbors: usize, seed: u64) -> Result<Dataset> {
    let (minority, majority) = minority_majority(ds)?;
    let minority_pos = ds.positions_of(minority);
    check_k(k_neighbors, minority_pos.len())?;
    let deficit = ds.positions_of(majority).len() - minority_pos.len();
    if deficit == 0 {
        return Ok(ds.clone());
    }
    let neighbours: Vec<Vec<usize>> = (0..minority_pos.len())
        .into_par_iter()
        .map(|i| k_nearest(ds, &minority_pos, i, k_neighbors))
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let p = ds.feature_count();
    let mut features = Vec::with_capacity(deficit * p);
    for _ in 0..deficit {
        let i = rng.gen_range(0..minority_pos.len());
        let nn = neighbours[i][rng.gen_range(0..k_neighbors)];
        let u: f64 = rng.gen();
        let a = ds.row(minority_pos[i]);
        let b = ds.row(minority_pos[nn]);
        features.extend(a.iter().zip(b).map(|(x, y)| x + u * (y - x)));
    }
    let mut out = ds.clone();
    out.append_rows(&features, &vec![minority; deficit]);
    Ok(out)
}

/// Nearest neighbour (position) of every row over the whole dataset.
fn nearest_neighbours(ds: &Dataset) -> Vec<Option<usize>> {
    let all: Vec<usize> = (0..ds.n_rows()).collect();
    (0..ds.n_rows())
        .into_par_iter()
        .map(|i| k_nearest(ds, &all, i, 1).first().copied())
        .collect()
}

/// Opposite-class mutual nearest-neighbour pairs `(a, b)` with `a < b`.
pub fn find_tomek_links(ds: &Dataset) -> Vec<(usize, usize)> {
    let nn = nearest_neighbours(ds);
    let labels = ds.labels();
    nn.iter()
        .enumerate()
        .filter_map(|(a, &b)| {
            let b = b?;
            (a < b && nn[b] == Some(a) && labels[a] != labels[b]).then_some((a, b))
        })
        .collect()
}

/// Removes the majority-class member of every Tomek link. With equal class
/// counts label 0 is treated as the majority.
pub fn tomek_links(ds: &Dataset) -> Result<Dataset> {
    let [zeros, ones] = ds.class_counts();
    if zeros == 0 || ones == 0 {
        return Err(Error::InvalidDataset("Tomek links need both classes present".into()));
    }
    let majority = u8::from(ones > zeros);
    Ok(remove_tomek_majority(ds, majority))
}

fn remove_tomek_majority(ds: &Dataset, majority: u8) -> Dataset {
    let labels = ds.labels();
    let mut drop = vec![false; ds.n_rows()];
    for (a, b) in find_tomek_links(ds) {
        for r in [a, b] {
            if labels[r] == majority {
                drop[r] = true;
            }
        }
    }
    let keep: Vec<usize> = (0..ds.n_rows()).filter(|&i| !drop[i]).collect();
    ds.select(&keep)
}

/// SMOTE followed by Tomek-link cleaning. Links are cleaned against the
/// majority class of the input, since SMOTE leaves the classes tied.
pub fn smote_tomek(ds: &Dataset, k_neighbors: usize, seed: u64) -> Result<Dataset> {
    let (_, majority) = minority_majority(ds)?;
    let oversampled = smote(ds, k_neighbors, seed)?;
    Ok(remove_tomek_majority(&oversampled, majority))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ds(rows: &[&[f64]], labels: &[u8]) -> Dataset {
        let rows: Vec<Vec<f64>> = rows.iter().map(|r| r.to_vec()).collect();
        Dataset::from_rows(&rows, labels.to_vec()).unwrap()
    }

    fn three_five() -> Dataset {
        ds(
            &[&[0.0], &[1.0], &[2.0], &[10.0], &[11.0], &[12.0], &[13.0], &[14.0]],
            &[1, 1, 1, 0, 0, 0, 0, 0],
        )
    }

    #[test]
    fn oversample_balances_and_copies_minority() {
        let d = three_five();
        let out = random_oversample(&d, 3).unwrap();
        assert_eq!(out.class_counts(), [5, 5]);
        assert_eq!(out.select(&(0..8).collect::<Vec<_>>()), d);
        for i in 8..out.n_rows() {
            assert!((0..3).any(|j| d.row(j) == out.row(i)));
        }
        let balanced = ds(&[&[0.0], &[1.0]], &[0, 1]);
        assert_eq!(random_oversample(&balanced, 0).unwrap(), balanced);
    }

    #[test]
    fn undersample_balances_with_subset() {
        let d = three_five();
        let out = random_undersample(&d, 3).unwrap();
        assert_eq!(out.class_counts(), [3, 3]);
        for i in 0..out.n_rows() {
            let id = out.row_ids()[i];
            assert_eq!(out.row(i), d.row(id));
        }
        let balanced = ds(&[&[0.0], &[1.0]], &[0, 1]);
        assert_eq!(random_undersample(&balanced, 0).unwrap(), balanced);
    }

    #[test]
    fn single_class_is_rejected() {
        let d = ds(&[&[0.0], &[1.0]], &[1, 1]);
        assert!(random_oversample(&d, 0).is_err());
        assert!(random_undersample(&d, 0).is_err());
        assert!(tomek_links(&d).is_err());
    }

    #[test]
    fn smote_on_identical_points() {
        let d = ds(&[&[1.0, 2.0], &[1.0, 2.0], &[5.0, 5.0], &[6.0, 5.0], &[7.0, 5.0]], &[1, 1, 0, 0, 0]);
        let out = smote(&d, 1, 4).unwrap();
        assert_eq!(out.class_counts(), [3, 3]);
        assert_eq!(out.row(5), &[1.0, 2.0]);
    }

    #[test]
    fn smote_stays_on_segment() {
        let d = ds(
            &[&[0.0, 10.0], &[4.0, 2.0], &[50.0, 50.0], &[51.0, 50.0], &[52.0, 50.0], &[53.0, 50.0]],
            &[1, 1, 0, 0, 0, 0],
        );
        let out = smote(&d, 1, 9).unwrap();
        assert_eq!(out.class_counts(), [4, 4]);
        for i in 6..8 {
            let r = out.row(i);
            assert!((0.0..=4.0).contains(&r[0]) && (2.0..=10.0).contains(&r[1]), "{r:?}");
            // collinear with the two parents
            let u = r[0] / 4.0;
            assert!((r[1] - (10.0 - 8.0 * u)).abs() < 1e-12);
        }
    }

    #[test]
    fn smote_rejects_large_k() {
        let d = three_five();
        assert!(smote(&d, 3, 0).is_err());
        assert!(smote(&d, 0, 0).is_err());
        assert!(smote(&d, 2, 0).is_ok());
    }

    #[test]
    fn lone_pair_forms_a_link() {
        let d = ds(&[&[0.0], &[1.0]], &[1, 0]);
        assert_eq!(find_tomek_links(&d), vec![(0, 1)]);
        // balanced: label 0 is treated as majority
        let out = tomek_links(&d).unwrap();
        assert_eq!(out.labels(), &[1]);
    }

    #[test]
    fn separated_clusters_have_no_links() {
        let d = ds(
            &[&[0.0], &[0.1], &[0.2], &[100.0], &[100.1], &[100.2], &[100.3]],
            &[1, 1, 1, 0, 0, 0, 0],
        );
        assert!(find_tomek_links(&d).is_empty());
        assert_eq!(tomek_links(&d).unwrap(), d);
    }

    #[test]
    fn tomek_only_removes_majority() {
        let d = ds(
            &[&[0.0], &[0.9], &[5.0], &[1.0], &[5.2], &[9.0], &[9.5]],
            &[1, 1, 1, 0, 0, 0, 0],
        );
        let out = tomek_links(&d).unwrap();
        assert_eq!(out.class_counts()[1], 3);
        assert!(out.n_rows() < d.n_rows());
        assert!(!out.row_ids().contains(&3));
    }

    #[test]
    fn smote_tomek_is_composition_without_links() {
        let d = ds(
            &[&[0.0], &[0.1], &[0.2], &[100.0], &[100.1], &[100.2], &[100.3]],
            &[1, 1, 1, 0, 0, 0, 0],
        );
        let a = smote_tomek(&d, 2, 7).unwrap();
        let b = smote(&d, 2, 7).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn method_names_parse() {
        for m in ResampleMethod::ALL {
            assert_eq!(m.name().parse::<ResampleMethod>().unwrap(), m);
        }
        assert!("adasyn".parse::<ResampleMethod>().is_err());
    }
}
