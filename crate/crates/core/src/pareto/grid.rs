//! Dense evaluation of two-user rate pairs with closed-form 2x2 determinants.

use num_complex::Complex64;
use rayon::prelude::*;

use super::{GridResolution, StrategyParam2x2};
use crate::error::{Error, Result};
use crate::linalg::{congruence, CMat};
use crate::model::{CovarianceMatrix, InterferenceSystem, RatePoint, StrategyProfile};

/// Hermitian `[[a, b], [conj(b), d]]`; a 1x1 matrix is embedded with `d = b = 0`.
#[derive(Debug, Clone, Copy)]
struct H2 {
    a: f64,
    d: f64,
    b: Complex64,
}

impl H2 {
    fn from(m: &CMat) -> Self {
        if m.nrows() == 1 {
            return Self {
                a: m[(0, 0)].re,
                d: 0.0,
                b: Complex64::new(0.0, 0.0),
            };
        }
        Self {
            a: m[(0, 0)].re,
            d: m[(1, 1)].re,
            b: m[(0, 1)],
        }
    }

    /// det(I + self + other)
    #[inline]
    fn det_i_plus(&self, o: &H2) -> f64 {
        let b = self.b + o.b;
        (1.0 + self.a + o.a) * (1.0 + self.d + o.d) - b.norm_sqr()
    }

    fn det_i_plus_self(&self) -> f64 {
        (1.0 + self.a) * (1.0 + self.d) - self.b.norm_sqr()
    }
}

/// Candidate covariances of one user together with their parameters, when known.
#[derive(Debug, Clone)]
pub(crate) struct Candidates {
    pub qs: Vec<CMat>,
    pub params: Vec<Option<StrategyParam2x2>>,
}

impl Candidates {
    pub fn grid(sys: &InterferenceSystem, user: usize, res: &GridResolution) -> Self {
        let params = res.params(sys.nt());
        Self {
            qs: params.iter().map(|p| p.matrix(sys.nt(), sys.p(user))).collect(),
            params: params.into_iter().map(Some).collect(),
        }
    }

    pub fn push(&mut self, q: CMat) {
        self.qs.push(q);
        self.params.push(None);
    }

    pub fn len(&self) -> usize {
        self.qs.len()
    }
}

pub(crate) struct PairTable {
    s1: Vec<H2>,
    k2: Vec<H2>,
    inv_r2: Vec<f64>,
    s2: Vec<H2>,
    k1: Vec<H2>,
    inv_r1: Vec<f64>,
}

impl PairTable {
    pub fn new(sys: &InterferenceSystem, c1: &[CMat], c2: &[CMat]) -> Self {
        let form = |h: &CMat, q: &CMat, s: f64| H2::from(&congruence(h, q, s));
        let s1: Vec<H2> = c1.iter().map(|q| form(sys.hm(0, 0), q, sys.rho(0))).collect();
        let k2: Vec<H2> = c1.iter().map(|q| form(sys.hm(1, 0), q, sys.eta(1, 0))).collect();
        let s2: Vec<H2> = c2.iter().map(|q| form(sys.hm(1, 1), q, sys.rho(1))).collect();
        let k1: Vec<H2> = c2.iter().map(|q| form(sys.hm(0, 1), q, sys.eta(0, 1))).collect();
        let inv_r2 = k2.iter().map(|k| 1.0 / k.det_i_plus_self()).collect();
        let inv_r1 = k1.iter().map(|k| 1.0 / k.det_i_plus_self()).collect();
        Self {
            s1,
            k2,
            inv_r2,
            s2,
            k1,
            inv_r1,
        }
    }

    /// Determinant ratios `2^{I_1}`, `2^{I_2}` for the pair `(a, b)`.
    #[inline]
    pub fn ratios(&self, a: usize, b: usize) -> (f64, f64) {
        (
            self.k1[b].det_i_plus(&self.s1[a]) * self.inv_r1[b],
            self.k2[a].det_i_plus(&self.s2[b]) * self.inv_r2[a],
        )
    }

    pub fn rates(&self, a: usize, b: usize) -> (f64, f64) {
        let (r1, r2) = self.ratios(a, b);
        (r1.log2().max(0.0), r2.log2().max(0.0))
    }

    pub fn rows(&self) -> usize {
        self.s1.len()
    }

    pub fn cols(&self) -> usize {
        self.s2.len()
    }
}

#[derive(Debug, Clone, Copy)]
struct Entry {
    x: f64,
    y: f64,
    a: u32,
    b: u32,
}

/// Non-dominated set kept sorted by `x` ascending with `y` strictly descending.
#[derive(Debug, Default, Clone)]
struct Staircase(Vec<Entry>);

impl Staircase {
    #[inline]
    fn offer(&mut self, e: Entry) {
        let v = &mut self.0;
        let idx = v.partition_point(|o| o.x < e.x);
        if idx < v.len() && v[idx].y >= e.y {
            return;
        }
        let mut lo = idx;
        while lo > 0 && v[lo - 1].y <= e.y {
            lo -= 1;
        }
        let mut hi = idx;
        if hi < v.len() && v[hi].x == e.x {
            hi += 1;
        }
        v.splice(lo..hi, std::iter::once(e));
    }

    fn merge(mut self, other: Staircase) -> Staircase {
        for e in other.0 {
            self.offer(e);
        }
        self
    }
}

pub(crate) fn check_grid_dims(sys: &InterferenceSystem) -> Result<()> {
    sys.require_two_users("grid sampling")?;
    if sys.nt() > 2 || sys.nr() > 2 {
        return Err(Error::UnsupportedDimension(format!(
            "grid sampling covers Nt, Nr <= 2, got Nt = {}, Nr = {}",
            sys.nt(),
            sys.nr()
        )));
    }
    Ok(())
}

/// Non-dominated pairs `(I1, I2, a, b)` over the full Cartesian product.
pub(crate) fn frontier_pairs(table: &PairTable) -> Vec<(f64, f64, usize, usize)> {
    const CHUNK: usize = 32;
    let rows: Vec<usize> = (0..table.rows()).collect();
    let parts: Vec<Staircase> = rows
        .par_chunks(CHUNK)
        .map(|chunk| {
            let mut st = Staircase::default();
            for &a in chunk {
                for b in 0..table.cols() {
                    let (x, y) = table.ratios(a, b);
                    st.offer(Entry {
                        x,
                        y,
                        a: a as u32,
                        b: b as u32,
                    });
                }
            }
            st
        })
        .collect();
    let merged = parts
        .into_iter()
        .fold(Staircase::default(), Staircase::merge);
    merged
        .0
        .into_iter()
        .map(|e| {
            let (x, y) = table.rates(e.a as usize, e.b as usize);
            (x, y, e.a as usize, e.b as usize)
        })
        .collect()
}

/// Every sampled profile of a two-user grid and its rates.
#[derive(Debug, Clone)]
pub struct RateRegion {
    candidates: [Vec<CovarianceMatrix>; 2],
    rates: Vec<[f64; 2]>,
}

impl RateRegion {
    pub fn len(&self) -> usize {
        self.rates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rates.is_empty()
    }

    pub fn rate(&self, k: usize) -> RatePoint {
        RatePoint::from_vec_unchecked(self.rates[k].to_vec())
    }

    pub fn profile(&self, k: usize) -> StrategyProfile {
        let n2 = self.candidates[1].len();
        StrategyProfile::from_vec_unchecked(vec![
            self.candidates[0][k / n2].clone(),
            self.candidates[1][k % n2].clone(),
        ])
    }

    pub fn iter(&self) -> impl Iterator<Item = (StrategyProfile, RatePoint)> + '_ {
        (0..self.len()).map(|k| (self.profile(k), self.rate(k)))
    }

    pub fn rate_points(&self) -> Vec<RatePoint> {
        (0..self.len()).map(|k| self.rate(k)).collect()
    }
}

/// Cartesian grid over both users' parameters.
pub fn sample_rate_region(sys: &InterferenceSystem, res: &GridResolution) -> Result<RateRegion> {
    check_grid_dims(sys)?;
    let c1 = Candidates::grid(sys, 0, res);
    let c2 = Candidates::grid(sys, 1, res);
    let table = PairTable::new(sys, &c1.qs, &c2.qs);
    let mut rates = Vec::with_capacity(c1.len() * c2.len());
    for a in 0..c1.len() {
        for b in 0..c2.len() {
            let (x, y) = table.rates(a, b);
            rates.push([x, y]);
        }
    }
    let to_cov = |c: Candidates| {
        c.qs
            .into_iter()
            .map(CovarianceMatrix::from_raw)
            .collect::<Vec<_>>()
    };
    Ok(RateRegion {
        candidates: [to_cov(c1), to_cov(c2)],
        rates,
    })
}
