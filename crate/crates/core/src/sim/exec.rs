use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// How independent paths are scheduled. Output is identical for both.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    /// Data-parallel over paths on the rayon pool; sequential when the
    /// `parallel` feature is disabled.
    #[default]
    Parallel,
}

impl Execution {
    /// Maps `f` over path indices `0..count`, returning results in index order.
    pub fn map_paths<T, F>(self, count: u64, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(u64) -> T + Sync + Send,
    {
        match self {
            Execution::Sequential => (0..count).map(f).collect(),
            Execution::Parallel => parallel_map(count, f),
        }
    }
}

#[cfg(feature = "parallel")]
fn parallel_map<T, F>(count: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    use rayon::prelude::*;
    (0..count).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
fn parallel_map<T, F>(count: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    (0..count).map(f).collect()
}

/// Random stream of one path: the seed selects the key, the path index the
/// ChaCha stream, so streams never overlap and do not depend on scheduling.
pub fn path_rng(seed: u64, path: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(path);
    rng
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn schedules_agree() {
        let f = |i: u64| path_rng(7, i).random::<u64>();
        assert_eq!(Execution::Sequential.map_paths(500, f), Execution::Parallel.map_paths(500, f));
    }

    #[test]
    fn streams_differ() {
        let a: u64 = path_rng(1, 0).random();
        let b: u64 = path_rng(1, 1).random();
        let c: u64 = path_rng(2, 0).random();
        assert!(a != b && a != c);
        assert_eq!(a, path_rng(1, 0).random::<u64>());
    }
}
