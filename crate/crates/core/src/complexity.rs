//! Analytic multiplication counts per detector.
//!
//! Counting convention, applied uniformly:
//! - one complex multiplication counts as one multiplication, matching
//!   symbol-level operation counts for communication algorithms;
//! - divisions count as one multiplication;
//! - additions, comparisons, and transcendental evaluations are free;
//! - channel-dependent precomputations (squared magnitudes, the Hermitian
//!   channel Gram for the graph edge features) are counted once per
//!   detection, not per iteration;
//! - the network message/update cost is attributed once per user per round
//!   (the shared MLPs and GRU applied along a user's aggregation path).
//!
//! The convention makes the absolute numbers comparable across detectors;
//! cross-size ratios are what the scaling checks anchor on.

/// Dimensions and hyperparameters the counts depend on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexityParams {
    pub m: usize,
    pub n: usize,
    pub q: usize,
    /// Detector layers / iterations.
    pub t: usize,
    /// Message-passing rounds per layer.
    pub l: usize,
    pub n_u: usize,
    pub n_h1: usize,
    pub n_h2: usize,
}

impl ComplexityParams {
    /// Reference hyperparameters: T=10, L=2, N_u=8, N_h1=16, N_h2=8.
    pub fn reference(m: usize, n: usize, q: usize) -> Self {
        ComplexityParams {
            m,
            n,
            q,
            t: 10,
            l: 2,
            n_u: 8,
            n_h1: 16,
            n_h2: 8,
        }
    }

    fn levels(&self) -> u64 {
        (self.q as f64).sqrt().round() as u64
    }
}

/// One detector's count plus the convention note.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexityRow {
    pub detector: String,
    pub multiplications: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComplexityReport {
    pub params: ComplexityParams,
    pub rows: Vec<ComplexityRow>,
    pub convention: &'static str,
}

pub const CONVENTION_NOTE: &str = "complex multiply = 1; division = 1; adds/exponentials free; \
channel precomputation counted once; network message cost per user per round";

/// AMP: squared channel magnitudes once, then per iteration the two
/// matrix-vector passes, the two variance passes, the Onsager scaling, and
/// the per-user posterior over `Q` points.
pub fn amp_multiplications(p: &ComplexityParams) -> u64 {
    let (m, n, q, t) = (p.m as u64, p.n as u64, p.q as u64, p.t as u64);
    let mn = m * n;
    let precompute = mn;
    let per_iter = 4 * mn + 4 * m + n * (3 * q + 5);
    precompute + t * per_iter
}

/// Hermitian channel Gram `H^H H`, the one-off cost of the edge features.
pub fn gram_multiplications(p: &ComplexityParams) -> u64 {
    let (m, n) = (p.m as u64, p.n as u64);
    m * n * (n + 1) / 2
}

/// Network cost per detection: `L` message/update rounds per layer plus the
/// readout and posterior moments, per user, `T` layers.
pub fn gnn_multiplications(p: &ComplexityParams) -> u64 {
    let (nu, h1, h2) = (p.n_u as u64, p.n_h1 as u64, p.n_h2 as u64);
    let levels = p.levels();
    let prop = (2 * nu + 2) * h1 + h1 * h2 + h2 * nu;
    let gru = 3 * ((nu + 2) * h1 + h1 * h1);
    let agg = h1 * nu;
    let readout = nu * h1 + h1 * h2 + h2 * levels;
    let moments = 2 * levels + 2;
    let per_layer = p.l as u64 * (prop + gru + agg) + readout + moments;
    p.n as u64 * p.t as u64 * per_layer
}

/// Unfolded detector: AMP chassis + edge features + network.
pub fn ampgnn_multiplications(p: &ComplexityParams) -> u64 {
    amp_multiplications(p) + gram_multiplications(p) + gnn_multiplications(p)
}

/// MMSE: Gram, Cholesky factorization, two triangular solves, matched filter.
pub fn mmse_multiplications(p: &ComplexityParams) -> u64 {
    let (m, n) = (p.m as u64, p.n as u64);
    gram_multiplications(p) + n * n * n / 3 + 2 * n * n + m * n
}

/// Counts for every supported detector at one configuration.
pub fn complexity_report(params: ComplexityParams) -> ComplexityReport {
    let rows = vec![
        ComplexityRow {
            detector: "mmse".into(),
            multiplications: mmse_multiplications(&params),
        },
        ComplexityRow {
            detector: "amp".into(),
            multiplications: amp_multiplications(&params),
        },
        ComplexityRow {
            detector: "ampgnn".into(),
            multiplications: ampgnn_multiplications(&params),
        },
    ];
    ComplexityReport {
        params,
        rows,
        convention: CONVENTION_NOTE,
    }
}

impl ComplexityReport {
    pub const CSV_HEADER: &'static str = "detector,m,n,q,t,l,n_u,n_h1,n_h2,multiplications";

    pub fn to_csv(&self) -> String {
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        let p = &self.params;
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{}\n",
                r.detector, p.m, p.n, p.q, p.t, p.l, p.n_u, p.n_h1, p.n_h2, r.multiplications
            ));
        }
        out
    }
}
