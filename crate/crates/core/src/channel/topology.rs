use crate::{Error, Result};

/// Reflection paths of one user; each path lists RIS indices (1-based) in the
/// order the signal visits them starting from the BS.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UserPaths {
    pub paths: Vec<Vec<usize>>,
    pub direct: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReflectionTopology {
    pub users: Vec<UserPaths>,
}

impl ReflectionTopology {
    /// Same paths for every user.
    pub fn uniform(k: usize, paths: Vec<Vec<usize>>, direct: bool) -> Self {
        ReflectionTopology { users: vec![UserPaths { paths, direct }; k] }
    }

    /// One path BS → RIS 1 → … → RIS L → user, plus the direct link.
    pub fn cascade(k: usize, l: usize) -> Self {
        let paths = if l == 0 { vec![] } else { vec![(1..=l).collect()] };
        Self::uniform(k, paths, true)
    }

    /// Every single-reflection path plus the full cascade (for L ≥ 2).
    pub fn single_and_cascade(k: usize, l: usize) -> Self {
        let mut paths: Vec<Vec<usize>> = (1..=l).map(|i| vec![i]).collect();
        if l >= 2 {
            paths.push((1..=l).collect());
        }
        Self::uniform(k, paths, true)
    }

    pub fn direct_only(k: usize) -> Self {
        Self::uniform(k, vec![], true)
    }

    pub fn validate(&self, k: usize, l: usize) -> Result<()> {
        if self.users.len() != k {
            return Err(Error::Config(format!("topology lists {} users, expected {k}", self.users.len())));
        }
        for (u, up) in self.users.iter().enumerate() {
            for p in &up.paths {
                if p.is_empty() {
                    return Err(Error::Config(format!("user {u}: empty reflection path")));
                }
                for (a, &i) in p.iter().enumerate() {
                    if i == 0 || i > l {
                        return Err(Error::Config(format!("user {u}: RIS index {i} outside [1,{l}]")));
                    }
                    if p[..a].contains(&i) {
                        return Err(Error::Config(format!("user {u}: RIS {i} repeated within a path")));
                    }
                }
            }
        }
        Ok(())
    }

    /// Whether RIS `l` lies on some path of user `k`.
    pub fn uses(&self, k: usize, l: usize) -> bool {
        self.users[k].paths.iter().any(|p| p.contains(&l))
    }

    /// Ordered RIS pairs `(i, j)` traversed consecutively by some path.
    pub fn ris_links(&self) -> Vec<(usize, usize)> {
        let mut out: Vec<(usize, usize)> = self
            .users
            .iter()
            .flat_map(|u| u.paths.iter())
            .flat_map(|p| p.windows(2).map(|w| (w[0], w[1])))
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    /// True when every path is the single hop `[1]`.
    pub fn is_single_hop(&self) -> bool {
        self.users.iter().all(|u| u.paths.len() == 1 && u.paths[0] == [1])
    }

    /// Copy with all reflection paths removed (direct links kept).
    pub fn without_reflections(&self) -> Self {
        ReflectionTopology {
            users: self.users.iter().map(|u| UserPaths { paths: vec![], direct: u.direct }).collect(),
        }
    }
}
