//! Seeded generators for the synthetic instances: union-of-subspaces data,
//! ±1 sparse corruption, and the single-column coherent instance.
//!
//! Randomness comes from ChaCha8 streams; Gaussian entries use the
//! `rand_distr` standard normal (ziggurat) transform. A stream is identified
//! by a 64-bit seed, and sub-streams are derived with [`mix_seed`].

use std::fs;
use std::path::Path;

use nalgebra::DMatrix;
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, text, Matrix, SupportSet};

pub type SynthRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> SynthRng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derive a sub-seed from a base seed and a path of indices.
///
/// Each index is folded in with a SplitMix64 round:
/// `h ← splitmix64(h ⊕ splitmix64(index))`, starting from `h = splitmix64(base)`.
pub fn mix_seed(base: u64, path: &[u64]) -> u64 {
    path.iter()
        .fold(splitmix64(base), |h, &p| splitmix64(h ^ splitmix64(p)))
}

pub fn gaussian_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Matrix {
    // Filled column by column, so a wider matrix extends a narrower one.
    DMatrix::from_fn(rows, cols, |_, _| rng.sample::<f64, _>(StandardNormal))
}

/// Orthonormal `rows × r` basis of a Gaussian random subspace.
pub fn random_orthonormal<R: Rng + ?Sized>(rows: usize, r: usize, rng: &mut R) -> Matrix {
    assert!(r <= rows, "cannot fit {r} orthonormal columns in dimension {rows}");
    gaussian_matrix(rows, r, rng).qr().q().columns(0, r).into_owned()
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct UnionSubspaceSpec {
    pub m: usize,
    pub n: usize,
    /// Number of clusters; each spans an independent subspace of rank `r0 / k`.
    pub k: usize,
    pub r0: usize,
    /// Scale the result so its largest absolute entry is 1.
    pub normalize_sup: bool,
    pub seed: u64,
}

impl UnionSubspaceSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        if self.m == 0 || self.n == 0 {
            return bad(format!("dimensions must be positive, got {}x{}", self.m, self.n));
        }
        if self.k == 0 {
            return bad("cluster count must be at least 1".into());
        }
        if self.r0 == 0 || self.r0 > self.m.min(self.n) {
            return bad(format!("rank {} outside [1, {}]", self.r0, self.m.min(self.n)));
        }
        if self.r0 % self.k != 0 {
            return bad(format!("cluster count {} does not divide rank {}", self.k, self.r0));
        }
        if self.n % self.k != 0 {
            return bad(format!("cluster count {} does not divide column count {}", self.k, self.n));
        }
        if self.r0 / self.k > self.n / self.k {
            return bad(format!(
                "each cluster has {} points but rank {}",
                self.n / self.k,
                self.r0 / self.k
            ));
        }
        Ok(())
    }
}

/// Low-rank data drawn from `k` independent subspaces with Gaussian coefficients.
///
/// Returns the data and the cluster label of every column.
pub fn gen_union_subspaces(spec: &UnionSubspaceSpec) -> Result<(Matrix, Vec<usize>)> {
    spec.validate()?;
    let mut rng = rng_from_seed(spec.seed);
    let sub_rank = spec.r0 / spec.k;
    let per = spec.n / spec.k;
    let mut l0 = Matrix::zeros(spec.m, spec.n);
    let mut labels = Vec::with_capacity(spec.n);
    for c in 0..spec.k {
        let basis = random_orthonormal(spec.m, sub_rank, &mut rng);
        let coef = gaussian_matrix(sub_rank, per, &mut rng);
        l0.columns_mut(c * per, per).copy_from(&(basis * coef));
        labels.extend(std::iter::repeat_n(c, per));
    }
    if spec.normalize_sup {
        let sup = linalg::norm(&l0, linalg::NormKind::Sup)?;
        l0 /= sup;
    }
    let rank = linalg::svd(&l0, 1e-9)?.rank();
    if rank != spec.r0 {
        return Err(Error::Numerical(format!(
            "generated rank {rank} differs from requested {}",
            spec.r0
        )));
    }
    Ok((l0, labels))
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SupportModel {
    /// Every entry corrupted independently with probability `rho`.
    Bernoulli { rho: f64 },
    /// Exactly `count` entries, chosen uniformly without replacement.
    FixedCount { count: usize },
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum Composition {
    /// `X = P_Ω⊥(L0) + P_Ω(S0)`
    Replace,
    /// `X = L0 + S0`
    Additive,
}

impl std::str::FromStr for Composition {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "replace" => Ok(Self::Replace),
            "additive" => Ok(Self::Additive),
            _ => Err(Error::Parse(format!("unknown composition '{s}'"))),
        }
    }
}

/// Sparse corruption with symmetric ±1 signs.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub struct CorruptionSpec {
    pub model: SupportModel,
    pub compose: Composition,
    pub seed: u64,
}

pub fn gen_corruption(m: usize, n: usize, spec: &CorruptionSpec) -> Result<(Matrix, SupportSet)> {
    let mut rng = rng_from_seed(spec.seed);
    let omega = match spec.model {
        SupportModel::Bernoulli { rho } => {
            if !(0.0..1.0).contains(&rho) {
                return Err(Error::InvalidArgument(format!("corruption rate {rho} outside [0, 1)")));
            }
            SupportSet::bernoulli(m, n, rho, &mut rng)
        }
        SupportModel::FixedCount { count } => {
            if count > m * n {
                return Err(Error::InvalidArgument(format!(
                    "{count} corruptions exceed {} entries",
                    m * n
                )));
            }
            let mut picks: Vec<usize> = index::sample(&mut rng, m * n, count).into_vec();
            picks.sort_unstable();
            SupportSet::from_indices(m, n, picks.into_iter().map(|k| (k % m, k / m)))?
        }
    };
    let mut s0 = Matrix::zeros(m, n);
    for (i, j) in omega.indices() {
        s0[(i, j)] = if rng.random::<bool>() { 1.0 } else { -1.0 };
    }
    Ok((s0, omega))
}

pub fn compose_observation(
    l0: &Matrix,
    s0: &Matrix,
    omega: &SupportSet,
    mode: Composition,
) -> Result<Matrix> {
    if l0.shape() != s0.shape() {
        return Err(Error::DimensionMismatch(format!(
            "low-rank part is {:?}, sparse part is {:?}",
            l0.shape(),
            s0.shape()
        )));
    }
    omega.check_shape(l0.nrows(), l0.ncols())?;
    Ok(match mode {
        Composition::Additive => l0 + s0,
        Composition::Replace => {
            linalg::project_support(omega, l0, true)? + linalg::project_support(omega, s0, false)?
        }
    })
}

/// I.i.d. normal noise with standard deviation `std`.
pub fn gen_noise(m: usize, n: usize, std: f64, seed: u64) -> Matrix {
    gaussian_matrix(m, n, &mut rng_from_seed(seed)) * std
}

/// Scale each column to unit ℓ2 length; zero columns are left as they are.
pub fn unit_columns(m: &Matrix) -> Matrix {
    let mut out = m.clone();
    for mut c in out.column_iter_mut() {
        let n = c.norm();
        if n > 0.0 {
            c /= n;
        }
    }
    out
}

/// The extreme-coherence instance: one all-ones column in a 200×200 zero matrix.
#[derive(Debug, Clone)]
pub struct CoherentInstance {
    pub l0: Matrix,
    pub s0: Matrix,
    pub omega: SupportSet,
    /// `[1, W]` with unit columns; `W` is `200 × p` Gaussian.
    pub dictionary: Matrix,
    pub x: Matrix,
}

pub const COHERENT_DIM: usize = 200;
pub const COHERENT_CORRUPTION: f64 = 0.05;

/// Build the coherent instance with `p` random dictionary atoms.
///
/// The corruption depends only on `seed`, so instances that share a seed and
/// differ in `p` have the same observation `X`.
pub fn gen_coherent_instance(p: usize, seed: u64) -> Result<CoherentInstance> {
    let d = COHERENT_DIM;
    if p >= d {
        return Err(Error::InvalidArgument(format!("p = {p} outside [0, {}]", d - 1)));
    }
    let mut l0 = Matrix::zeros(d, d);
    l0.column_mut(0).fill(1.0);
    let (s0, omega) = gen_corruption(
        d,
        d,
        &CorruptionSpec {
            model: SupportModel::Bernoulli { rho: COHERENT_CORRUPTION },
            compose: Composition::Additive,
            seed: mix_seed(seed, &[1]),
        },
    )?;
    let x = compose_observation(&l0, &s0, &omega, Composition::Additive)?;
    let mut a = Matrix::zeros(d, p + 1);
    a.column_mut(0).fill(1.0);
    if p > 0 {
        let w = gaussian_matrix(d, p, &mut rng_from_seed(mix_seed(seed, &[2])));
        a.columns_mut(1, p).copy_from(&w);
    }
    Ok(CoherentInstance { l0, s0, omega, dictionary: unit_columns(&a), x })
}

/// An incoherent instance whose dictionary contains the column space of `L0`.
#[derive(Debug, Clone)]
pub struct DictionaryInstance {
    pub l0: Matrix,
    pub s0: Matrix,
    pub omega: SupportSet,
    pub dictionary: Matrix,
    pub x: Matrix,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
#[serde(rename_all = "snake_case")]
pub enum FactorKind {
    /// Standard normal factors.
    Gaussian,
    /// Random ±1 factors, which keep the singular vectors spread out.
    Sign,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct DictionaryInstanceSpec {
    pub m: usize,
    pub n: usize,
    pub r0: usize,
    /// Dictionary rank; the dictionary is an orthonormal basis of
    /// `span(U0)` padded with random directions.
    pub dict_rank: usize,
    pub rho: f64,
    pub factors: FactorKind,
    pub seed: u64,
}

/// `L0 = B Cᵀ` with `m × r0` and `n × r0` factors, ±1 corruption on a
/// Bernoulli support, additive composition, and an orthonormal dictionary
/// whose span contains the column space of `L0`.
pub fn gen_dictionary_instance(spec: &DictionaryInstanceSpec) -> Result<DictionaryInstance> {
    let DictionaryInstanceSpec { m, n, r0, dict_rank, rho, factors, seed } = *spec;
    if r0 == 0 || r0 > dict_rank || dict_rank > m || r0 > n {
        return Err(Error::InvalidArgument(format!(
            "need 1 <= r0 <= dict_rank <= m and r0 <= n, got r0={r0}, dict_rank={dict_rank}, m={m}, n={n}"
        )));
    }
    let mut rng = rng_from_seed(mix_seed(seed, &[0]));
    let draw = |rows: usize, cols: usize, rng: &mut SynthRng| match factors {
        FactorKind::Gaussian => gaussian_matrix(rows, cols, rng),
        FactorKind::Sign => {
            DMatrix::from_fn(rows, cols, |_, _| if rng.random::<bool>() { 1.0 } else { -1.0 })
        }
    };
    let b = draw(m, r0, &mut rng);
    let c = draw(n, r0, &mut rng);
    let l0 = &b * c.transpose();
    let u0 = linalg::orth(&l0, 1e-9)?;
    let mut span = Matrix::zeros(m, dict_rank);
    span.columns_mut(0, u0.ncols()).copy_from(&u0);
    if dict_rank > u0.ncols() {
        let extra = gaussian_matrix(m, dict_rank - u0.ncols(), &mut rng);
        span.columns_mut(u0.ncols(), dict_rank - u0.ncols()).copy_from(&extra);
    }
    let dictionary = span.qr().q().columns(0, dict_rank).into_owned();
    let (s0, omega) = gen_corruption(
        m,
        n,
        &CorruptionSpec {
            model: SupportModel::Bernoulli { rho },
            compose: Composition::Additive,
            seed: mix_seed(seed, &[1]),
        },
    )?;
    let x = compose_observation(&l0, &s0, &omega, Composition::Additive)?;
    Ok(DictionaryInstance { l0, s0, omega, dictionary, x })
}

/// An instance written to disk: matrices in the text format plus `meta.json`.
#[derive(Debug, Clone)]
pub struct StoredInstance {
    pub x: Matrix,
    pub l0: Option<Matrix>,
    pub s0: Option<Matrix>,
    pub omega: Option<SupportSet>,
    pub dictionary: Option<Matrix>,
    pub meta: serde_json::Value,
}

const FILES: [&str; 5] = ["X.txt", "L0.txt", "S0.txt", "omega.txt", "A.txt"];

pub fn write_instance(dir: &Path, inst: &StoredInstance) -> Result<()> {
    fs::create_dir_all(dir)?;
    text::save_matrix(&dir.join(FILES[0]), &inst.x)?;
    if let Some(m) = &inst.l0 {
        text::save_matrix(&dir.join(FILES[1]), m)?;
    }
    if let Some(m) = &inst.s0 {
        text::save_matrix(&dir.join(FILES[2]), m)?;
    }
    if let Some(o) = &inst.omega {
        text::save_matrix(&dir.join(FILES[3]), &o.to_matrix())?;
    }
    if let Some(m) = &inst.dictionary {
        text::save_matrix(&dir.join(FILES[4]), m)?;
    }
    fs::write(dir.join("meta.json"), serde_json::to_string_pretty(&inst.meta)?)?;
    Ok(())
}

pub fn read_instance(dir: &Path) -> Result<StoredInstance> {
    let opt = |name: &str| -> Result<Option<Matrix>> {
        let p = dir.join(name);
        if p.exists() {
            text::load_matrix(&p).map(Some)
        } else {
            Ok(None)
        }
    };
    let x = opt(FILES[0])?
        .ok_or_else(|| Error::InvalidArgument(format!("{} has no X.txt", dir.display())))?;
    let omega = opt(FILES[3])?.map(|m| SupportSet::from_nonzeros(&m));
    let meta_path = dir.join("meta.json");
    let meta = if meta_path.exists() {
        serde_json::from_str(&fs::read_to_string(meta_path)?)?
    } else {
        serde_json::Value::Object(Default::default())
    };
    Ok(StoredInstance {
        x,
        l0: opt(FILES[1])?,
        s0: opt(FILES[2])?,
        omega,
        dictionary: opt(FILES[4])?,
        meta,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coherence;
    use proptest::prelude::*;

    fn spec(k: usize, r0: usize, seed: u64) -> UnionSubspaceSpec {
        UnionSubspaceSpec { m: 60, n: 80, k, r0, normalize_sup: true, seed }
    }

    #[test]
    fn mix_seed_separates_paths() {
        let a = mix_seed(7, &[0, 1]);
        let b = mix_seed(7, &[1, 0]);
        let c = mix_seed(8, &[0, 1]);
        assert!(a != b && a != c && b != c);
        assert_eq!(a, mix_seed(7, &[0, 1]));
    }

    #[test]
    fn union_subspaces_shape_rank_labels() {
        let (l0, labels) = gen_union_subspaces(&spec(4, 8, 1)).unwrap();
        assert_eq!(l0.shape(), (60, 80));
        assert_eq!(linalg::svd(&l0, 1e-9).unwrap().rank(), 8);
        assert!((linalg::norm(&l0, linalg::NormKind::Sup).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(labels.len(), 80);
        assert_eq!(labels[0], 0);
        assert_eq!(labels[79], 3);
        // each cluster has rank r0 / k
        let block = l0.columns(20, 20).into_owned();
        assert_eq!(linalg::svd(&block, 1e-9).unwrap().rank(), 2);
    }

    #[test]
    fn union_subspaces_validation() {
        assert!(gen_union_subspaces(&spec(3, 8, 1)).is_err());
        assert!(gen_union_subspaces(&spec(3, 9, 1)).is_err()); // 3 does not divide 80
        assert!(gen_union_subspaces(&spec(1, 61, 1)).is_err());
        assert!(gen_union_subspaces(&spec(0, 8, 1)).is_err());
    }

    #[test]
    fn union_subspaces_deterministic() {
        let a = gen_union_subspaces(&spec(2, 6, 42)).unwrap();
        let b = gen_union_subspaces(&spec(2, 6, 42)).unwrap();
        assert_eq!(a, b);
        let c = gen_union_subspaces(&spec(2, 6, 43)).unwrap();
        assert_ne!(a.0, c.0);
    }

    #[test]
    fn rank_one_clusters_are_more_coherent_than_one_subspace() {
        let single = gen_union_subspaces(&UnionSubspaceSpec { m: 100, n: 100, k: 1, r0: 10, normalize_sup: false, seed: 3 }).unwrap().0;
        let split = gen_union_subspaces(&UnionSubspaceSpec { m: 100, n: 100, k: 10, r0: 10, normalize_sup: false, seed: 3 }).unwrap().0;
        let tol = linalg::DEFAULT_ZERO_TOL;
        assert!(coherence::mu2(&split, tol).unwrap() > coherence::mu2(&single, tol).unwrap());
    }

    #[test]
    fn corruption_extremes() {
        let none = CorruptionSpec { model: SupportModel::Bernoulli { rho: 0.0 }, compose: Composition::Replace, seed: 1 };
        let (s0, omega) = gen_corruption(5, 6, &none).unwrap();
        assert!(omega.is_empty());
        assert_eq!(s0, Matrix::zeros(5, 6));

        let all = CorruptionSpec { model: SupportModel::FixedCount { count: 30 }, compose: Composition::Replace, seed: 1 };
        let (s0, omega) = gen_corruption(5, 6, &all).unwrap();
        assert_eq!(omega.len(), 30);
        assert!(s0.iter().all(|&v| v == 1.0 || v == -1.0));
    }

    #[test]
    fn corruption_rejects_bad_specs() {
        let over = CorruptionSpec { model: SupportModel::FixedCount { count: 31 }, compose: Composition::Replace, seed: 1 };
        assert!(gen_corruption(5, 6, &over).is_err());
        let rate = CorruptionSpec { model: SupportModel::Bernoulli { rho: 1.0 }, compose: Composition::Replace, seed: 1 };
        assert!(gen_corruption(5, 6, &rate).is_err());
    }

    #[test]
    fn bernoulli_density_concentrates() {
        // binomial std at 500x500, rho 0.13 is ~6.7e-4, so ±0.01 is ~15 sigma
        let mut inside = 0;
        for seed in 0..100 {
            let s = CorruptionSpec { model: SupportModel::Bernoulli { rho: 0.13 }, compose: Composition::Replace, seed };
            let (_, omega) = gen_corruption(500, 500, &s).unwrap();
            if (omega.density() - 0.13).abs() <= 0.01 {
                inside += 1;
            }
        }
        assert!(inside >= 99);
    }

    #[test]
    fn signs_are_balanced() {
        let s = CorruptionSpec { model: SupportModel::FixedCount { count: 20_000 }, compose: Composition::Replace, seed: 5 };
        let (s0, _) = gen_corruption(200, 200, &s).unwrap();
        let pos = s0.iter().filter(|&&v| v > 0.0).count() as f64;
        // 20000 fair coin flips: std 70.7
        assert!((pos - 10_000.0).abs() < 500.0);
    }

    #[test]
    fn composition_modes() {
        let l0 = gaussian_matrix(4, 5, &mut rng_from_seed(1));
        let spec = CorruptionSpec { model: SupportModel::FixedCount { count: 6 }, compose: Composition::Replace, seed: 2 };
        let (s0, omega) = gen_corruption(4, 5, &spec).unwrap();
        let rep = compose_observation(&l0, &s0, &omega, Composition::Replace).unwrap();
        let add = compose_observation(&l0, &s0, &omega, Composition::Additive).unwrap();
        let diff = &add - &rep;
        assert!((diff - linalg::project_support(&omega, &l0, false).unwrap()).amax() < 1e-15);
        for (i, j) in omega.complement().indices() {
            assert_eq!(rep[(i, j)], l0[(i, j)]);
        }
        let empty = SupportSet::empty(4, 5);
        let z = Matrix::zeros(4, 5);
        assert_eq!(compose_observation(&l0, &z, &empty, Composition::Replace).unwrap(), l0);
        assert_eq!(compose_observation(&l0, &z, &empty, Composition::Additive).unwrap(), l0);
        assert!(compose_observation(&l0, &Matrix::zeros(4, 4), &empty, Composition::Additive).is_err());
    }

    #[test]
    fn coherent_instance_structure() {
        let inst = gen_coherent_instance(0, 1).unwrap();
        assert_eq!(inst.dictionary.shape(), (200, 1));
        let expect = 1.0 / 200f64.sqrt();
        assert!(inst.dictionary.iter().all(|&v| (v - expect).abs() < 1e-15));

        let inst = gen_coherent_instance(9, 1).unwrap();
        assert_eq!(linalg::svd(&inst.dictionary, 1e-10).unwrap().rank(), 10);
        assert!(inst.dictionary.column_iter().all(|c| (c.norm() - 1.0).abs() < 1e-12));
        let tol = linalg::DEFAULT_ZERO_TOL;
        assert!((coherence::mu1(&inst.l0, tol).unwrap() - 1.0).abs() < 1e-10);
        assert!((coherence::mu2(&inst.l0, tol).unwrap() - 200.0).abs() < 1e-8);

        // the observation does not depend on p
        assert_eq!(gen_coherent_instance(3, 1).unwrap().x, inst.x);
        assert!(gen_coherent_instance(200, 1).is_err());
    }

    #[test]
    fn dictionary_instance_contains_column_space() {
        let inst = gen_dictionary_instance(&DictionaryInstanceSpec {
            m: 30, n: 30, r0: 2, dict_rank: 5, rho: 0.05, factors: FactorKind::Sign, seed: 4,
        })
        .unwrap();
        let a = &inst.dictionary;
        assert!((a.transpose() * a - Matrix::identity(5, 5)).norm() < 1e-12);
        let proj = a * (a.transpose() * &inst.l0);
        assert!((proj - &inst.l0).norm() < 1e-10 * inst.l0.norm());
    }

    #[test]
    fn instance_directory_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let inst = gen_coherent_instance(2, 9).unwrap();
        let stored = StoredInstance {
            x: inst.x.clone(),
            l0: Some(inst.l0.clone()),
            s0: Some(inst.s0.clone()),
            omega: Some(inst.omega.clone()),
            dictionary: Some(inst.dictionary.clone()),
            meta: serde_json::json!({"p": 2, "seed": 9}),
        };
        write_instance(dir.path(), &stored).unwrap();
        let back = read_instance(dir.path()).unwrap();
        assert_eq!(back.x, inst.x);
        assert_eq!(back.dictionary.unwrap(), inst.dictionary);
        assert_eq!(back.omega.unwrap(), inst.omega);
        assert_eq!(back.meta["p"], 2);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn generators_deterministic(seed in any::<u64>(), rho in 0.0f64..0.5) {
            let c = CorruptionSpec { model: SupportModel::Bernoulli { rho }, compose: Composition::Replace, seed };
            prop_assert_eq!(gen_corruption(9, 7, &c).unwrap(), gen_corruption(9, 7, &c).unwrap());
            let s = UnionSubspaceSpec { m: 12, n: 12, k: 3, r0: 6, normalize_sup: true, seed };
            prop_assert_eq!(gen_union_subspaces(&s).unwrap(), gen_union_subspaces(&s).unwrap());
        }

        #[test]
        fn subspace_union_has_full_rank(seed in any::<u64>(), k in 1usize..5) {
            let s = UnionSubspaceSpec { m: 40, n: 6 * k, k, r0: 2 * k, normalize_sup: false, seed };
            let (l0, _) = gen_union_subspaces(&s).unwrap();
            prop_assert_eq!(linalg::svd(&l0, 1e-9).unwrap().rank(), 2 * k);
        }
    }
}
