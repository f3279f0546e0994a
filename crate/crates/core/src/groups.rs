//! Group-selection distributions over agent subsets of size >= 2, and
//! connectivity of the induced interaction hypergraph.

use std::collections::BTreeMap;
use std::path::Path;

use rand::Rng;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GroupError {
    #[error("group distribution needs at least {needed} agents (got {n})")]
    TooFewAgents { n: usize, needed: usize },
    #[error("subset {0:?} has fewer than 2 members")]
    SubsetTooSmall(Vec<usize>),
    #[error("agent index {index} out of range 1..={n}")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("subset weights must be positive (got {0})")]
    NonPositiveWeight(f64),
    #[error("empty support")]
    EmptySupport,
    #[error("cannot parse group spec `{0}`")]
    Parse(String),
    #[error("reading `{path}`: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone)]
enum GroupKind {
    PairComplete,
    PairEdges(Vec<[usize; 2]>),
    KSubsets(usize),
    Custom { subsets: Vec<Vec<usize>>, weights: Vec<f64>, cumulative: Vec<f64> },
}

/// A probability distribution over subsets A of {0..n-1} with |A| >= 2.
/// Agent indices are 0-based internally; config files use 1-based.
#[derive(Debug, Clone)]
pub struct GroupDistribution {
    n: usize,
    kind: GroupKind,
}

impl GroupDistribution {
    /// Uniform over all unordered pairs.
    pub fn pair_complete(n: usize) -> Result<Self, GroupError> {
        if n < 2 {
            return Err(GroupError::TooFewAgents { n, needed: 2 });
        }
        Ok(GroupDistribution { n, kind: GroupKind::PairComplete })
    }

    /// Uniform over an explicit edge list (0-based, distinct endpoints).
    pub fn pair_edges(n: usize, edges: Vec<[usize; 2]>) -> Result<Self, GroupError> {
        if edges.is_empty() {
            return Err(GroupError::EmptySupport);
        }
        let mut normalized = Vec::with_capacity(edges.len());
        for [a, b] in edges {
            if a == b {
                return Err(GroupError::SubsetTooSmall(vec![a + 1, b + 1]));
            }
            for x in [a, b] {
                if x >= n {
                    return Err(GroupError::IndexOutOfRange { index: x + 1, n });
                }
            }
            normalized.push([a.min(b), a.max(b)]);
        }
        Ok(GroupDistribution { n, kind: GroupKind::PairEdges(normalized) })
    }

    /// Uniform over all subsets of size m.
    pub fn k_subsets(n: usize, m: usize) -> Result<Self, GroupError> {
        if m < 2 {
            return Err(GroupError::SubsetTooSmall((1..=m).collect()));
        }
        if n < m {
            return Err(GroupError::TooFewAgents { n, needed: m });
        }
        Ok(GroupDistribution { n, kind: GroupKind::KSubsets(m) })
    }

    /// Weighted support; duplicate subsets are merged (weights summed) and
    /// the weights normalized.
    pub fn custom(n: usize, weighted: Vec<(Vec<usize>, f64)>) -> Result<Self, GroupError> {
        let mut merged: BTreeMap<Vec<usize>, f64> = BTreeMap::new();
        for (mut subset, weight) in weighted {
            if !weight.is_finite() || weight <= 0.0 {
                return Err(GroupError::NonPositiveWeight(weight));
            }
            subset.sort_unstable();
            subset.dedup();
            if subset.len() < 2 {
                return Err(GroupError::SubsetTooSmall(
                    subset.iter().map(|x| x + 1).collect(),
                ));
            }
            for &x in &subset {
                if x >= n {
                    return Err(GroupError::IndexOutOfRange { index: x + 1, n });
                }
            }
            *merged.entry(subset).or_insert(0.0) += weight;
        }
        if merged.is_empty() {
            return Err(GroupError::EmptySupport);
        }
        let total: f64 = merged.values().sum();
        let subsets: Vec<Vec<usize>> = merged.keys().cloned().collect();
        let weights: Vec<f64> = merged.values().map(|w| w / total).collect();
        let mut cumulative = Vec::with_capacity(weights.len());
        let mut acc = 0.0;
        for &w in &weights {
            acc += w;
            cumulative.push(acc);
        }
        Ok(GroupDistribution { n, kind: GroupKind::Custom { subsets, weights, cumulative } })
    }

    pub fn n_agents(&self) -> usize {
        self.n
    }

    /// Draws A with probability rho(A); the returned members are sorted.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<usize> {
        match &self.kind {
            GroupKind::PairComplete => {
                let i = rng.random_range(0..self.n);
                let mut j = rng.random_range(0..self.n - 1);
                if j >= i {
                    j += 1;
                }
                vec![i.min(j), i.max(j)]
            }
            GroupKind::PairEdges(edges) => {
                let e = edges[rng.random_range(0..edges.len())];
                vec![e[0], e[1]]
            }
            GroupKind::KSubsets(m) => {
                // Partial Fisher-Yates over 0..n; exactly uniform.
                let mut pool: Vec<usize> = (0..self.n).collect();
                for i in 0..*m {
                    let j = rng.random_range(i..self.n);
                    pool.swap(i, j);
                }
                let mut subset = pool[..*m].to_vec();
                subset.sort_unstable();
                subset
            }
            GroupKind::Custom { subsets, cumulative, .. } => {
                let u: f64 = rng.random();
                let idx = cumulative.partition_point(|&c| c <= u).min(subsets.len() - 1);
                subsets[idx].clone()
            }
        }
    }

    /// The positive-probability subsets with their probabilities.
    /// Enumerates all pairs / m-subsets for the combinatorial kinds, so it
    /// is intended for small n (kernel construction, connectivity).
    pub fn support(&self) -> Vec<(Vec<usize>, f64)> {
        match &self.kind {
            GroupKind::PairComplete => {
                let m = self.n * (self.n - 1) / 2;
                let p = 1.0 / m as f64;
                let mut out = Vec::with_capacity(m);
                for i in 0..self.n {
                    for j in (i + 1)..self.n {
                        out.push((vec![i, j], p));
                    }
                }
                out
            }
            GroupKind::PairEdges(edges) => {
                let p = 1.0 / edges.len() as f64;
                edges.iter().map(|e| (vec![e[0], e[1]], p)).collect()
            }
            GroupKind::KSubsets(m) => {
                let mut out = Vec::new();
                let mut current = Vec::with_capacity(*m);
                enumerate_subsets(self.n, *m, 0, &mut current, &mut out);
                let p = 1.0 / out.len() as f64;
                out.into_iter().map(|s| (s, p)).collect()
            }
            GroupKind::Custom { subsets, weights, .. } => {
                subsets.iter().cloned().zip(weights.iter().copied()).collect()
            }
        }
    }

    /// True iff the positive-probability subsets, viewed as hyperedges,
    /// connect every agent.
    pub fn is_connected(&self) -> bool {
        match &self.kind {
            // Every agent shares a subset with every other.
            GroupKind::PairComplete | GroupKind::KSubsets(_) => true,
            _ => {
                let mut uf = UnionFind::new(self.n);
                for (subset, _) in self.support() {
                    for window in subset.windows(2) {
                        uf.union(window[0], window[1]);
                    }
                }
                let root = uf.find(0);
                (1..self.n).all(|x| uf.find(x) == root)
            }
        }
    }

    /// Config syntax: `pair_complete | pair_edges:<file> | ksubsets:<m> |
    /// custom:<file>`. Files hold one subset per line as space-separated
    /// 1-based indices; custom lines may end with a weight (a token with a
    /// decimal point or exponent).
    pub fn from_config(value: &str, n: usize) -> Result<Self, GroupError> {
        let value = value.trim();
        if value == "pair_complete" {
            return Self::pair_complete(n);
        }
        if let Some(m) = value.strip_prefix("ksubsets:") {
            let m: usize = m.trim().parse().map_err(|_| GroupError::Parse(value.into()))?;
            return Self::k_subsets(n, m);
        }
        if let Some(path) = value.strip_prefix("pair_edges:") {
            let text = read_file(path.trim())?;
            let mut edges = Vec::new();
            for line in nonempty_lines(&text) {
                let indices = parse_indices(line, value)?;
                if indices.len() != 2 {
                    return Err(GroupError::SubsetTooSmall(indices));
                }
                edges.push([to_zero_based(indices[0], n)?, to_zero_based(indices[1], n)?]);
            }
            return Self::pair_edges(n, edges);
        }
        if let Some(path) = value.strip_prefix("custom:") {
            let text = read_file(path.trim())?;
            let mut weighted = Vec::new();
            for line in nonempty_lines(&text) {
                let mut tokens: Vec<&str> = line.split_whitespace().collect();
                let weight = match tokens.last() {
                    Some(last) if last.parse::<usize>().is_err() => {
                        let w: f64 =
                            last.parse().map_err(|_| GroupError::Parse(line.into()))?;
                        tokens.pop();
                        w
                    }
                    _ => 1.0,
                };
                let subset = tokens
                    .iter()
                    .map(|t| {
                        t.parse::<usize>()
                            .map_err(|_| GroupError::Parse(line.into()))
                            .and_then(|i| to_zero_based(i, n))
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                weighted.push((subset, weight));
            }
            return Self::custom(n, weighted);
        }
        Err(GroupError::Parse(value.into()))
    }
}

fn read_file(path: &str) -> Result<String, GroupError> {
    std::fs::read_to_string(Path::new(path))
        .map_err(|source| GroupError::Io { path: path.into(), source })
}

fn nonempty_lines(text: &str) -> impl Iterator<Item = &str> {
    text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'))
}

fn parse_indices(line: &str, context: &str) -> Result<Vec<usize>, GroupError> {
    line.split_whitespace()
        .map(|t| t.parse::<usize>().map_err(|_| GroupError::Parse(format!("{context}: {line}"))))
        .collect()
}

fn to_zero_based(index: usize, n: usize) -> Result<usize, GroupError> {
    if index == 0 || index > n {
        return Err(GroupError::IndexOutOfRange { index, n });
    }
    Ok(index - 1)
}

fn enumerate_subsets(
    n: usize,
    m: usize,
    start: usize,
    current: &mut Vec<usize>,
    out: &mut Vec<Vec<usize>>,
) {
    if current.len() == m {
        out.push(current.clone());
        return;
    }
    let remaining = m - current.len();
    for x in start..=(n - remaining) {
        current.push(x);
        enumerate_subsets(n, m, x + 1, current, out);
        current.pop();
    }
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect() }
    }

    fn find(&mut self, x: usize) -> usize {
        if self.parent[x] != x {
            let root = self.find(self.parent[x]);
            self.parent[x] = root;
        }
        self.parent[x]
    }

    fn union(&mut self, a: usize, b: usize) {
        let ra = self.find(a);
        let rb = self.find(b);
        if ra != rb {
            self.parent[ra] = rb;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn degenerate_supports_sample_deterministically() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let pair = GroupDistribution::pair_complete(2).unwrap();
        for _ in 0..10 {
            assert_eq!(pair.sample(&mut rng), vec![0, 1]);
        }
        let triple = GroupDistribution::k_subsets(3, 3).unwrap();
        for _ in 0..10 {
            assert_eq!(triple.sample(&mut rng), vec![0, 1, 2]);
        }
    }

    #[test]
    fn edge_sampling_frequencies_are_uniform() {
        let dist =
            GroupDistribution::pair_edges(3, vec![[0, 1], [1, 2]]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let trials = 100_000;
        let mut first = 0u64;
        for _ in 0..trials {
            if dist.sample(&mut rng) == vec![0, 1] {
                first += 1;
            }
        }
        let freq = first as f64 / trials as f64;
        assert!((freq - 0.5).abs() < 0.01, "freq = {freq}");
    }

    #[test]
    fn custom_sampling_matches_weights_in_tv() {
        let support = vec![
            (vec![0, 1], 1.0),
            (vec![1, 2], 2.0),
            (vec![2, 3], 3.0),
            (vec![0, 3], 4.0),
            (vec![0, 1, 2], 10.0),
        ];
        let dist = GroupDistribution::custom(4, support.clone()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let trials = 1_000_000u64;
        let mut counts: std::collections::HashMap<Vec<usize>, u64> = Default::default();
        for _ in 0..trials {
            *counts.entry(dist.sample(&mut rng)).or_default() += 1;
        }
        let total_w: f64 = support.iter().map(|(_, w)| w).sum();
        let tv: f64 = 0.5
            * support
                .iter()
                .map(|(s, w)| {
                    let emp = *counts.get(s).unwrap_or(&0) as f64 / trials as f64;
                    (emp - w / total_w).abs()
                })
                .sum::<f64>();
        assert!(tv < 0.01, "tv = {tv}");
    }

    #[test]
    fn custom_merges_duplicate_subsets() {
        let dist = GroupDistribution::custom(
            3,
            vec![(vec![0, 1], 1.0), (vec![1, 0], 2.0), (vec![1, 2], 1.0)],
        )
        .unwrap();
        let support = dist.support();
        assert_eq!(support.len(), 2);
        assert_eq!(support[0], (vec![0, 1], 0.75));
        assert_eq!(support[1], (vec![1, 2], 0.25));
    }

    #[test]
    fn k_subset_samples_are_uniform_over_support() {
        let dist = GroupDistribution::k_subsets(5, 3).unwrap();
        assert_eq!(dist.support().len(), 10);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let trials = 200_000u64;
        let mut counts: std::collections::HashMap<Vec<usize>, u64> = Default::default();
        for _ in 0..trials {
            let s = dist.sample(&mut rng);
            assert_eq!(s.len(), 3);
            *counts.entry(s).or_default() += 1;
        }
        assert_eq!(counts.len(), 10);
        for (subset, &count) in &counts {
            let freq = count as f64 / trials as f64;
            assert!((freq - 0.1).abs() < 0.01, "{subset:?}: {freq}");
        }
    }

    #[test]
    fn connectivity_of_edge_graphs() {
        let split = GroupDistribution::pair_edges(4, vec![[0, 1], [2, 3]]).unwrap();
        assert!(!split.is_connected());
        let path = GroupDistribution::pair_edges(4, vec![[0, 1], [1, 2], [2, 3]]).unwrap();
        assert!(path.is_connected());
        for n in 2..6 {
            assert!(GroupDistribution::pair_complete(n).unwrap().is_connected());
        }
        // A size-3 hyperedge connects all of its members at once.
        let hyper = GroupDistribution::custom(4, vec![(vec![0, 1, 2], 1.0), (vec![2, 3], 1.0)])
            .unwrap();
        assert!(hyper.is_connected());
    }

    #[test]
    fn construction_rejects_bad_inputs() {
        assert!(GroupDistribution::pair_complete(1).is_err());
        assert!(GroupDistribution::pair_edges(3, vec![[0, 0]]).is_err());
        assert!(GroupDistribution::pair_edges(3, vec![[0, 5]]).is_err());
        assert!(GroupDistribution::k_subsets(3, 1).is_err());
        assert!(GroupDistribution::k_subsets(2, 3).is_err());
        assert!(GroupDistribution::custom(3, vec![(vec![0, 1], -1.0)]).is_err());
        assert!(GroupDistribution::custom(3, vec![]).is_err());
    }

    #[test]
    fn config_files_round_trip() {
        let dir = std::env::temp_dir().join(format!("coinflow-groups-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let edges_path = dir.join("edges.txt");
        std::fs::write(&edges_path, "1 2\n2 3\n").unwrap();
        let dist =
            GroupDistribution::from_config(&format!("pair_edges:{}", edges_path.display()), 3)
                .unwrap();
        assert_eq!(dist.support().len(), 2);
        assert!(dist.is_connected());

        let custom_path = dir.join("custom.txt");
        std::fs::write(&custom_path, "1 2 3\n1 4 0.5\n").unwrap();
        let dist =
            GroupDistribution::from_config(&format!("custom:{}", custom_path.display()), 4)
                .unwrap();
        let support = dist.support();
        assert_eq!(support.len(), 2);
        assert!((support[0].1 - 2.0 / 3.0).abs() < 1e-12); // {1,2,3} weight 1
        assert!((support[1].1 - 1.0 / 3.0).abs() < 1e-12); // {1,4} weight 0.5

        assert!(GroupDistribution::from_config("ksubsets:3", 5).is_ok());
        assert!(GroupDistribution::from_config("nonsense", 5).is_err());
        std::fs::remove_dir_all(&dir).ok();
    }
}
