use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, C64};

/// Möbius function.
pub fn mobius(n: u64) -> i64 {
    let mut n = n;
    let mut sign = 1;
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            n /= p;
            if n % p == 0 {
                return 0;
            }
            sign = -sign;
        }
        p += 1;
    }
    if n > 1 {
        sign = -sign;
    }
    sign
}

fn divisors(n: usize) -> impl Iterator<Item = usize> {
    (1..=n).filter(move |d| n % d == 0)
}

/// Hyperbolic element of SL(2, ℤ).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CatMap {
    pub matrix: [[i64; 2]; 2],
}

impl CatMap {
    pub fn new(matrix: [[i64; 2]; 2]) -> Result<Self> {
        let [[a, b], [c, d]] = matrix;
        if a * d - b * c != 1 {
            return Err(Error::Domain(format!("det {matrix:?} = {}, need 1", a * d - b * c)));
        }
        if (a + d).abs() <= 2 {
            return Err(Error::Domain(format!("|tr {matrix:?}| = {} is not hyperbolic", (a + d).abs())));
        }
        Ok(CatMap { matrix })
    }

    /// Parses `a,b,c,d` in row order.
    pub fn parse(text: &str) -> Result<Self> {
        let v: Vec<i64> = text
            .split(',')
            .map(|s| s.trim().parse::<i64>().map_err(|e| Error::Parse(format!("matrix entry {s:?}: {e}"))))
            .collect::<Result<_>>()?;
        if v.len() != 4 {
            return Err(Error::Parse(format!("cat map needs 4 entries, got {}", v.len())));
        }
        CatMap::new([[v[0], v[1]], [v[2], v[3]]])
    }

    pub fn trace(&self) -> i64 {
        self.matrix[0][0] + self.matrix[1][1]
    }

    /// Eigenvalue of largest modulus; negative when the trace is.
    pub fn mu(&self) -> f64 {
        let t = self.trace() as f64;
        (t + t.signum() * (t * t - 4.0).sqrt()) / 2.0
    }

    /// `tr Aⁿ` for `n = 0..=n_max` from `t_n = (tr A) t_{n-1} - t_{n-2}`.
    pub fn traces(&self, n_max: usize) -> Result<Vec<i128>> {
        let tr = self.trace() as i128;
        let mut t = vec![2i128, tr];
        while t.len() <= n_max {
            let n = t.len();
            let next = tr
                .checked_mul(t[n - 1])
                .and_then(|x| x.checked_sub(t[n - 2]))
                .ok_or_else(|| Error::Domain(format!("tr A^{n} overflows 128-bit integers")))?;
            t.push(next);
        }
        t.truncate(n_max + 1);
        Ok(t)
    }

    /// `N_n = |det(I - Aⁿ)| = |2 - tr Aⁿ|` for `n = 1..=n_max`.
    pub fn fixed_point_counts(&self, n_max: usize) -> Result<Vec<u128>> {
        Ok(self.traces(n_max)?[1..].iter().map(|t| (2 - t).unsigned_abs()).collect())
    }
}

/// Shift of finite type with a locally constant roof.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Subshift {
    pub matrix: Vec<Vec<u8>>,
    pub roof: Vec<f64>,
}

impl Subshift {
    pub fn new(matrix: Vec<Vec<u8>>, roof: Vec<f64>) -> Result<Self> {
        let k = matrix.len();
        if k == 0 || matrix.iter().any(|r| r.len() != k) {
            return Err(Error::Domain("transition matrix must be square and non-empty".into()));
        }
        if matrix.iter().flatten().any(|&x| x > 1) {
            return Err(Error::Domain("transition matrix must be 0/1".into()));
        }
        if roof.len() != k {
            return Err(Error::Domain(format!("{} roof values for {k} states", roof.len())));
        }
        if roof.iter().any(|&r| !(r > 0.0 && r.is_finite())) {
            return Err(Error::Domain(format!("roof values must be positive, got {roof:?}")));
        }
        Ok(Subshift { matrix, roof })
    }

    /// Golden-mean shift `[[1,1],[1,0]]`.
    pub fn golden_mean(roof: Vec<f64>) -> Result<Self> {
        Subshift::new(vec![vec![1, 1], vec![1, 0]], roof)
    }

    pub fn states(&self) -> usize {
        self.matrix.len()
    }

    /// Some power of the matrix is positive (Wielandt bound `(k-1)² + 1`).
    pub fn is_primitive(&self) -> bool {
        let k = self.states();
        let mul = |a: &Vec<Vec<bool>>, b: &Vec<Vec<bool>>| -> Vec<Vec<bool>> {
            (0..k).map(|i| (0..k).map(|j| (0..k).any(|l| a[i][l] && b[l][j])).collect()).collect()
        };
        let m: Vec<Vec<bool>> = self.matrix.iter().map(|r| r.iter().map(|&x| x == 1).collect()).collect();
        let mut p = m.clone();
        for _ in 0..((k - 1) * (k - 1) + 1) {
            if p.iter().flatten().all(|&x| x) {
                return true;
            }
            p = mul(&p, &m);
        }
        false
    }

    pub fn spectral_radius(&self) -> f64 {
        let rows: Vec<Vec<f64>> = self.matrix.iter().map(|r| r.iter().map(|&x| x as f64).collect()).collect();
        let refs: Vec<&[f64]> = rows.iter().map(|r| r.as_slice()).collect();
        linalg::eigenvalues(&linalg::from_real_rows(&refs)).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Number of closed words of each length `1..=n_max`, keyed by how often
    /// each state is visited.
    pub fn closed_word_counts(&self, n_max: usize) -> Vec<BTreeMap<Vec<u32>, u128>> {
        let k = self.states();
        let mut out = vec![BTreeMap::new(); n_max];
        for s0 in 0..k {
            let mut start = vec![0u32; k];
            start[s0] = 1;
            let mut layer: BTreeMap<(usize, Vec<u32>), u128> = BTreeMap::from([((s0, start), 1)]);
            for counts in out.iter_mut() {
                for ((s, c), &w) in &layer {
                    if self.matrix[*s][s0] == 1 {
                        *counts.entry(c.clone()).or_insert(0) += w;
                    }
                }
                let mut next = BTreeMap::new();
                for ((s, c), w) in layer {
                    for t in 0..k {
                        if self.matrix[s][t] == 1 {
                            let mut c2 = c.clone();
                            c2[t] += 1;
                            *next.entry((t, c2)).or_insert(0) += w;
                        }
                    }
                }
                layer = next;
            }
        }
        out
    }

    /// Birkhoff sum of the roof for a visit vector.
    pub fn roof_sum(&self, visits: &[u32]) -> f64 {
        visits.iter().zip(&self.roof).map(|(&c, &r)| c as f64 * r).sum()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Generator {
    CatMap(CatMap),
    Subshift(Subshift),
}

/// Linearized return map of a cat-map orbit of length `n`: eigenvalues
/// `μ^{±n}`, exact traces of its exterior powers and `det(I - P)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoincareData {
    pub eigenvalues: [f64; 2],
    pub wedge_traces: [i128; 3],
    pub det_i_minus_p: i128,
}

impl PoincareData {
    /// `Σ_k (-1)^k tr ∧^k P`, which equals `det(I - P)`.
    pub fn alternating_wedge_sum(&self) -> i128 {
        self.wedge_traces[0] - self.wedge_traces[1] + self.wedge_traces[2]
    }

    pub fn abs_det(&self) -> i128 {
        self.det_i_minus_p.abs()
    }

    pub fn wedge_trace(&self, k: usize) -> i128 {
        self.wedge_traces.get(k).copied().unwrap_or(0)
    }
}

/// A class of `multiplicity` closed orbits sharing all listed data. The
/// orbit is the `length / primitive_length`-th iterate of a primitive one.
#[derive(Clone, Debug, PartialEq)]
pub struct ClosedOrbit {
    pub length: usize,
    pub primitive_length: usize,
    pub period: f64,
    pub primitive_period: f64,
    pub multiplicity: u128,
    pub holonomy: C64,
    pub poincare: Option<PoincareData>,
}

impl ClosedOrbit {
    pub fn is_primitive(&self) -> bool {
        self.length == self.primitive_length
    }
}

/// All closed orbits of word length `≤ n_max`.
#[derive(Clone, Debug)]
pub struct OrbitCatalog {
    pub generator: Generator,
    pub alpha: f64,
    pub n_max: usize,
    pub orbits: Vec<ClosedOrbit>,
    /// Fixed points of the `n`-th return map, `n = 1..=n_max`.
    pub fixed_points: Vec<u128>,
    /// `dim E_s = dim E_u`.
    pub m: usize,
    pub warnings: Vec<String>,
}

fn holonomy(alpha: f64, n: usize) -> C64 {
    C64::from_polar(1.0, alpha * n as f64)
}

/// Orbits of the suspension of a cat map with roof 1 and holonomy `e^{iα}`
/// per unit time.
pub fn cat_map_catalog(a: &CatMap, n_max: usize, alpha: f64) -> Result<OrbitCatalog> {
    let traces = a.traces(n_max)?;
    let fixed = a.fixed_point_counts(n_max)?;
    let mut primitive = vec![0u128; n_max + 1];
    for n in 1..=n_max {
        let sum: i128 = divisors(n).map(|d| mobius((n / d) as u64) as i128 * fixed[d - 1] as i128).sum();
        if sum < 0 || sum % n as i128 != 0 {
            return Err(Error::Contract(format!("Möbius inversion gave {sum}/{n} primitive orbits")));
        }
        primitive[n] = (sum / n as i128) as u128;
    }
    let mu = a.mu();
    let mut orbits = Vec::new();
    for n in 1..=n_max {
        let poincare = PoincareData {
            eigenvalues: [mu.powi(n as i32), mu.powi(-(n as i32))],
            wedge_traces: [1, traces[n], 1],
            det_i_minus_p: 2 - traces[n],
        };
        for d in divisors(n).filter(|&d| primitive[d] > 0) {
            orbits.push(ClosedOrbit {
                length: n,
                primitive_length: d,
                period: n as f64,
                primitive_period: d as f64,
                multiplicity: primitive[d],
                holonomy: holonomy(alpha, n),
                poincare: Some(poincare.clone()),
            });
        }
    }
    Ok(OrbitCatalog {
        generator: Generator::CatMap(*a),
        alpha,
        n_max,
        orbits,
        fixed_points: fixed,
        m: 1,
        warnings: Vec::new(),
    })
}

/// Orbits of the suspension of a subshift under its roof. Periodic words are
/// grouped by visit vector, which determines the period; primitive classes
/// come from Möbius inversion over the vectors.
pub fn subshift_catalog(s: &Subshift, n_max: usize, alpha: f64) -> Result<OrbitCatalog> {
    let mut warnings = Vec::new();
    if !s.is_primitive() {
        warnings.push("transition matrix is not primitive".to_string());
    }
    let counts = s.closed_word_counts(n_max);
    let mut orbits = Vec::new();
    for n in 1..=n_max {
        for visits in counts[n - 1].keys() {
            let mut sum: i128 = 0;
            for d in divisors(n) {
                let j = (n / d) as u32;
                if visits.iter().all(|&c| c % j == 0) {
                    let base: Vec<u32> = visits.iter().map(|&c| c / j).collect();
                    let fixed = counts[d - 1].get(&base).copied().unwrap_or(0) as i128;
                    sum += mobius(j as u64) as i128 * fixed;
                }
            }
            if sum < 0 || sum % n as i128 != 0 {
                return Err(Error::Contract(format!("Möbius inversion gave {sum}/{n} primitive orbits")));
            }
            let p = (sum / n as i128) as u128;
            if p == 0 {
                continue;
            }
            let t = s.roof_sum(visits);
            for j in 1..=(n_max / n) {
                orbits.push(ClosedOrbit {
                    length: j * n,
                    primitive_length: n,
                    period: j as f64 * t,
                    primitive_period: t,
                    multiplicity: p,
                    holonomy: holonomy(alpha, j * n),
                    poincare: None,
                });
            }
        }
    }
    orbits.sort_by(|a, b| (a.length, a.primitive_length).cmp(&(b.length, b.primitive_length)));
    let fixed_points = counts.iter().map(|m| m.values().sum()).collect();
    Ok(OrbitCatalog {
        generator: Generator::Subshift(s.clone()),
        alpha,
        n_max,
        orbits,
        fixed_points,
        m: 1,
        warnings,
    })
}

impl OrbitCatalog {
    /// Exponential growth rate `L` of `Σ_{T_γ ≤ T} 1 ≤ C e^{LT}`.
    pub fn growth_rate(&self) -> f64 {
        match &self.generator {
            Generator::CatMap(a) => a.mu().abs().ln(),
            Generator::Subshift(s) => {
                let r_min = s.roof.iter().cloned().fold(f64::INFINITY, f64::min);
                s.spectral_radius().max(1.0).ln() / r_min
            }
        }
    }

    /// Smallest admissible `Re λ` for truncated orbit sums.
    pub fn abscissa(&self) -> f64 {
        self.growth_rate() + super::ABSCISSA_MARGIN
    }

    pub(crate) fn check_abscissa(&self, lambda: C64) -> Result<()> {
        let required = self.abscissa();
        if lambda.re <= required {
            return Err(Error::Abscissa { required, got: lambda.re });
        }
        Ok(())
    }

    /// Bound on `Σ_{n > n_max} (1/n) Σ_{|γ| = n} |e^{-λ T_γ}|`, which
    /// dominates every truncated orbit sum here.
    pub fn tail_bound(&self, lambda: C64) -> f64 {
        let n1 = (self.n_max + 1) as f64;
        match &self.generator {
            Generator::CatMap(a) => {
                // N_n ≤ |μ|^n + 3
                let q = a.mu().abs() * (-lambda.re).exp();
                let e = (-lambda.re).exp();
                (q.powf(n1) / (1.0 - q) + 3.0 * e.powf(n1) / (1.0 - e)) / n1
            }
            Generator::Subshift(s) => {
                // tr Mⁿ ≤ k ρⁿ and T_γ ≥ r_min n
                let r_min = s.roof.iter().cloned().fold(f64::INFINITY, f64::min);
                let q = s.spectral_radius() * (-lambda.re * r_min).exp();
                s.states() as f64 * q.powf(n1) / ((1.0 - q) * n1)
            }
        }
    }

    pub fn primitive_counts(&self) -> Vec<u128> {
        let mut p = vec![0u128; self.n_max];
        for o in self.orbits.iter().filter(|o| o.is_primitive()) {
            p[o.length - 1] += o.multiplicity;
        }
        p
    }

    /// The first `n` orbit classes only, for tests of single factors.
    pub fn truncate_to_length(&self, n_max: usize) -> OrbitCatalog {
        let mut out = self.clone();
        out.n_max = n_max.min(self.n_max);
        out.orbits.retain(|o| o.length <= out.n_max);
        out.fixed_points.truncate(out.n_max);
        out
    }
}
