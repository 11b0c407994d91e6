//! Binary multiplex data model: a stack of K adjacency matrices on a shared
//! node set, with an observation mask and optional edge covariates.

use ndarray::Array2;

use crate::{Error, Result};

/// A binary multidimensional network.
///
/// `y[k]` holds the adjacency matrix of view `k`, `h[k]` the observation mask
/// (1 = observed, 0 = missing). Diagonal entries are unused and normalized to
/// zero. Covariates are dyad-specific and shared across views.
#[derive(Debug, Clone)]
pub struct Multiplex {
    n: usize,
    y: Vec<Array2<u8>>,
    h: Vec<Array2<u8>>,
    x: Vec<Array2<f64>>,
    node_labels: Vec<String>,
    view_labels: Vec<String>,
    directed: bool,
}

impl Multiplex {
    /// Validate and assemble a multiplex. For undirected multiplexes `y`, `h`
    /// and the covariates must be symmetric.
    pub fn new(
        y: Vec<Array2<u8>>,
        h: Vec<Array2<u8>>,
        x: Vec<Array2<f64>>,
        node_labels: Vec<String>,
        view_labels: Vec<String>,
        directed: bool,
    ) -> Result<Self> {
        let k = y.len();
        if k == 0 {
            return Err(Error::data("multiplex needs at least one view"));
        }
        if h.len() != k {
            return Err(Error::data("mask must have one matrix per view"));
        }
        let n = y[0].nrows();
        if n < 2 {
            return Err(Error::data("multiplex needs at least two nodes"));
        }
        if node_labels.len() != n || view_labels.len() != k {
            return Err(Error::data("label counts do not match dimensions"));
        }
        for (idx, (yk, hk)) in y.iter().zip(&h).enumerate() {
            if yk.nrows() != n || yk.ncols() != n || hk.nrows() != n || hk.ncols() != n {
                return Err(Error::data(format!("view {} is not {n}x{n}", idx + 1)));
            }
            for v in yk.iter().chain(hk.iter()) {
                if *v > 1 {
                    return Err(Error::data("non-binary value in adjacency or mask"));
                }
            }
        }
        for (f, xf) in x.iter().enumerate() {
            if xf.nrows() != n || xf.ncols() != n {
                return Err(Error::data(format!("covariate {} is not {n}x{n}", f + 1)));
            }
            if xf.iter().any(|v| !v.is_finite()) {
                return Err(Error::data("non-finite covariate value"));
            }
        }
        let mut mx = Multiplex {
            n,
            y,
            h,
            x,
            node_labels,
            view_labels,
            directed,
        };
        // Diagonals carry no information, and neither do masked entries;
        // normalize both so equal observable data compares equal.
        for k in 0..mx.y.len() {
            for i in 0..n {
                mx.y[k][[i, i]] = 0;
                mx.h[k][[i, i]] = 0;
            }
            for i in 0..n {
                for j in 0..n {
                    if mx.h[k][[i, j]] == 0 {
                        mx.y[k][[i, j]] = 0;
                    }
                }
            }
        }
        if !directed {
            for (idx, (yk, hk)) in mx.y.iter().zip(&mx.h).enumerate() {
                for i in 0..n {
                    for j in (i + 1)..n {
                        if yk[[i, j]] != yk[[j, i]] || hk[[i, j]] != hk[[j, i]] {
                            return Err(Error::data(format!(
                                "view {} is not symmetric but the multiplex is undirected",
                                idx + 1
                            )));
                        }
                    }
                }
            }
            for xf in &mx.x {
                for i in 0..n {
                    for j in (i + 1)..n {
                        if xf[[i, j]] != xf[[j, i]] {
                            return Err(Error::data(
                                "covariates must be symmetric for an undirected multiplex",
                            ));
                        }
                    }
                }
            }
        }
        Ok(mx)
    }

    pub fn n_nodes(&self) -> usize {
        self.n
    }

    pub fn n_views(&self) -> usize {
        self.y.len()
    }

    pub fn n_covariates(&self) -> usize {
        self.x.len()
    }

    pub fn directed(&self) -> bool {
        self.directed
    }

    pub fn node_labels(&self) -> &[String] {
        &self.node_labels
    }

    pub fn view_labels(&self) -> &[String] {
        &self.view_labels
    }

    pub fn adjacency(&self, k: usize) -> &Array2<u8> {
        &self.y[k]
    }

    pub fn mask(&self, k: usize) -> &Array2<u8> {
        &self.h[k]
    }

    pub fn covariates(&self) -> &[Array2<f64>] {
        &self.x
    }

    #[inline]
    pub fn edge(&self, k: usize, i: usize, j: usize) -> u8 {
        self.y[k][[i, j]]
    }

    #[inline]
    pub fn observed(&self, k: usize, i: usize, j: usize) -> bool {
        self.h[k][[i, j]] == 1
    }

    /// Dyads the likelihood runs over: ordered pairs for directed data,
    /// unordered pairs (i < j) for undirected data.
    pub fn dyads(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        dyad_pairs(self.n, self.directed)
    }
}

/// Iterator over model dyads for a network of `n` nodes.
pub fn dyad_pairs(n: usize, directed: bool) -> impl Iterator<Item = (usize, usize)> {
    (0..n).flat_map(move |i| {
        let lo = if directed { 0 } else { i + 1 };
        (lo..n).filter_map(move |j| if i == j { None } else { Some((i, j)) })
    })
}

/// Mask-weighted out-degree matrix `S` and in-degree matrix `R`, both n×K.
///
/// `S[i,k] = Σ_{j≠i} h[k][i][j]·y[k][i][j]`; `R` swaps the indices. Missing
/// entries contribute nothing. For undirected multiplexes `S == R` exactly.
pub fn degrees(m: &Multiplex) -> (Array2<f64>, Array2<f64>) {
    let (n, k) = (m.n_nodes(), m.n_views());
    let mut s = Array2::zeros((n, k));
    let mut r = Array2::zeros((n, k));
    for v in 0..k {
        let y = m.adjacency(v);
        let h = m.mask(v);
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                let w = (h[[i, j]] * y[[i, j]]) as f64;
                s[[i, v]] += w;
                r[[j, v]] += w;
            }
        }
    }
    (s, r)
}

/// Association between two views: the proportion of concordant off-diagonal
/// cells among cells observed in both views.
pub fn association(m: &Multiplex, k: usize, l: usize) -> Result<f64> {
    let views = m.n_views();
    if k >= views || l >= views {
        return Err(Error::invalid(format!(
            "view index out of range (K = {views})"
        )));
    }
    let (yk, hk) = (m.adjacency(k), m.mask(k));
    let (yl, hl) = (m.adjacency(l), m.mask(l));
    let mut concordant = 0u64;
    let mut total = 0u64;
    for i in 0..m.n_nodes() {
        for j in 0..m.n_nodes() {
            if i == j || hk[[i, j]] == 0 || hl[[i, j]] == 0 {
                continue;
            }
            total += 1;
            if yk[[i, j]] == yl[[i, j]] {
                concordant += 1;
            }
        }
    }
    if total == 0 {
        return Err(Error::data("no comparable cells between the two views"));
    }
    Ok(concordant as f64 / total as f64)
}
