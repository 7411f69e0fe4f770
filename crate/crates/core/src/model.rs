//! Shared domain vocabulary: cells, demand, distances, cost parameters,
//! zones and dual prices, plus the pure functions every solver stage uses
//! to evaluate a zone (diameter, cost, covered demand, reduced cost).

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type CellId = usize;
pub type NodeId = u64;

/// Slack allowed when testing `cost <= zone budget`.
pub const BUDGET_TOL: f64 = 1e-9;

/// A zone is worth adding to the master only above this reduced cost.
pub const REDUCED_COST_TOL: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub id: CellId,
    pub lat: f64,
    pub lon: f64,
    /// Road-network node the centroid was snapped to, if a network was used.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub node: Option<NodeId>,
    /// External label such as a hexagon index. Never interpreted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tag: Option<String>,
}

impl Cell {
    pub fn new(id: CellId, lat: f64, lon: f64) -> Self {
        Cell {
            id,
            lat,
            lon,
            node: None,
            tag: None,
        }
    }
}

pub fn validate_cells(cells: &[Cell]) -> Result<()> {
    for (k, c) in cells.iter().enumerate() {
        if c.id != k {
            return Err(Error::Validation(format!(
                "cell ids must be contiguous from 0; position {k} holds id {}",
                c.id
            )));
        }
        if !c.lat.is_finite() || !c.lon.is_finite() {
            return Err(Error::Validation(format!("cell {k} has a non-finite centroid")));
        }
    }
    Ok(())
}

/// Sparse origin-destination demand over `n` cells. Only strictly positive
/// entries are stored.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct DemandMatrix {
    n: usize,
    entries: BTreeMap<(CellId, CellId), f64>,
}

impl DemandMatrix {
    pub fn new(n: usize) -> Self {
        DemandMatrix {
            n,
            entries: BTreeMap::new(),
        }
    }

    pub fn from_triples(n: usize, triples: impl IntoIterator<Item = (CellId, CellId, f64)>) -> Result<Self> {
        let mut m = DemandMatrix::new(n);
        for (i, j, v) in triples {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::Validation(format!("demand d({i},{j}) = {v} must be finite and >= 0")));
            }
            m.add(i, j, v)?;
        }
        Ok(m)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Accumulates `v` into d(i,j). Zero contributions are ignored.
    pub fn add(&mut self, i: CellId, j: CellId, v: f64) -> Result<()> {
        if i >= self.n || j >= self.n {
            return Err(Error::Validation(format!(
                "demand pair ({i},{j}) outside 0..{}",
                self.n
            )));
        }
        if v > 0.0 {
            *self.entries.entry((i, j)).or_insert(0.0) += v;
        }
        Ok(())
    }

    pub fn get(&self, i: CellId, j: CellId) -> f64 {
        self.entries.get(&(i, j)).copied().unwrap_or(0.0)
    }

    /// Entries in ascending (i, j) order.
    pub fn iter(&self) -> impl Iterator<Item = ((CellId, CellId), f64)> + '_ {
        self.entries.iter().map(|(&k, &v)| (k, v))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Pairs that enter the objective: off-diagonal entries, plus the
    /// diagonal when self-pairs are counted.
    pub fn counted_pairs(&self, include_self_pairs: bool) -> impl Iterator<Item = ((CellId, CellId), f64)> + '_ {
        self.iter().filter(move |((i, j), _)| include_self_pairs || i != j)
    }

    pub fn total(&self, include_self_pairs: bool) -> f64 {
        self.counted_pairs(include_self_pairs).map(|(_, v)| v).sum()
    }

    /// Row-major dense copy.
    pub fn to_dense(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.n * self.n];
        for ((i, j), v) in self.iter() {
            d[i * self.n + j] = v;
        }
        d
    }
}

/// Dense, possibly asymmetric travel-time matrix in normalized units.
#[derive(Clone, Debug, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    values: Vec<f64>,
    /// The raw maximum divided out during normalization (1 if none).
    pub normalization_factor: f64,
}

impl DistanceMatrix {
    pub fn from_rows(rows: Vec<Vec<f64>>, normalization_factor: f64) -> Result<Self> {
        let n = rows.len();
        let mut values = Vec::with_capacity(n * n);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != n {
                return Err(Error::Validation(format!(
                    "distance row {i} has {} entries, expected {n}",
                    row.len()
                )));
            }
            values.extend(row);
        }
        let m = DistanceMatrix {
            n,
            values,
            normalization_factor,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn from_flat(n: usize, values: Vec<f64>, normalization_factor: f64) -> Result<Self> {
        if values.len() != n * n {
            return Err(Error::Validation(format!(
                "distance matrix has {} entries, expected {}",
                values.len(),
                n * n
            )));
        }
        let m = DistanceMatrix {
            n,
            values,
            normalization_factor,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.normalization_factor.is_finite() && self.normalization_factor > 0.0) {
            return Err(Error::Validation("normalization factor must be finite and > 0".into()));
        }
        for i in 0..self.n {
            for j in 0..self.n {
                let v = self.get(i, j);
                if !v.is_finite() || v < 0.0 {
                    return Err(Error::Validation(format!("distance c({i},{j}) = {v} must be finite and >= 0")));
                }
                if i == j && v != 0.0 {
                    return Err(Error::Validation(format!("distance c({i},{i}) = {v} must be 0")));
                }
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: CellId, j: CellId) -> f64 {
        self.values[i * self.n + j]
    }

    /// max(c(i,j), c(j,i))
    #[inline]
    pub fn two_way(&self, i: CellId, j: CellId) -> f64 {
        self.get(i, j).max(self.get(j, i))
    }

    #[inline]
    pub fn two_way_sq(&self, i: CellId, j: CellId) -> f64 {
        let d = self.two_way(i, j);
        d * d
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.values.chunks(self.n.max(1)).map(|r| r.to_vec()).take(self.n).collect()
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CostParams {
    /// Cost per unit of squared diameter.
    pub alpha: f64,
    /// Fixed cost per zone.
    pub beta: f64,
    /// Global budget B.
    pub budget: f64,
    /// Single-zone budget B0; `None` disables the per-zone cap.
    pub zone_budget: Option<f64>,
    #[serde(default)]
    pub include_self_pairs: bool,
}

impl Default for CostParams {
    fn default() -> Self {
        CostParams {
            alpha: 5.0,
            beta: 1.0,
            budget: 8.0,
            zone_budget: Some(2.0),
            include_self_pairs: false,
        }
    }
}

impl CostParams {
    pub fn validate(&self) -> Result<()> {
        let finite = [self.alpha, self.beta, self.budget].iter().all(|v| v.is_finite());
        if !finite {
            return Err(Error::Validation("cost parameters must be finite".into()));
        }
        if self.alpha < 0.0 {
            return Err(Error::Validation(format!("alpha = {} must be >= 0", self.alpha)));
        }
        if self.beta <= 0.0 {
            return Err(Error::Validation(format!("beta = {} must be > 0", self.beta)));
        }
        if self.budget < 0.0 {
            return Err(Error::Validation(format!("budget = {} must be >= 0", self.budget)));
        }
        if let Some(b0) = self.zone_budget {
            if !b0.is_finite() || b0 < 0.0 {
                return Err(Error::Validation(format!("zone budget = {b0} must be finite and >= 0")));
            }
        }
        Ok(())
    }

    /// Whether a zone with this squared diameter respects B0.
    #[inline]
    pub fn zone_affordable(&self, diameter_sq: f64) -> bool {
        match self.zone_budget {
            Some(b0) => zone_cost(diameter_sq, self) <= b0 + BUDGET_TOL,
            None => true,
        }
    }
}

/// alpha * D^2 + beta
#[inline]
pub fn zone_cost(diameter_sq: f64, params: &CostParams) -> f64 {
    params.alpha * diameter_sq + params.beta
}

/// Squared two-way diameter of a cell set; 0 for singletons.
pub fn zone_diameter_sq(cells: &[CellId], dist: &DistanceMatrix) -> Result<f64> {
    if cells.is_empty() {
        return Err(Error::Input("zone must contain at least one cell".into()));
    }
    if let Some(&bad) = cells.iter().find(|&&c| c >= dist.dim()) {
        return Err(Error::Input(format!("cell id {bad} outside 0..{}", dist.dim())));
    }
    let mut best = 0.0f64;
    for (a, &i) in cells.iter().enumerate() {
        for &j in &cells[a + 1..] {
            best = best.max(dist.two_way(i, j));
        }
    }
    Ok(best * best)
}

/// Demand with both endpoints inside `cells`.
pub fn intra_zone_demand(cells: &[CellId], demand: &DemandMatrix, include_self_pairs: bool) -> f64 {
    let mut total = 0.0;
    for &i in cells {
        for &j in cells {
            if i != j || include_self_pairs {
                total += demand.get(i, j);
            }
        }
    }
    total
}

/// A candidate zone: a sorted, duplicate-free cell set with its cached
/// squared diameter and operating cost.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Zone {
    cells: Vec<CellId>,
    diameter_sq: f64,
    cost: f64,
}

impl Zone {
    pub fn new(cells: impl IntoIterator<Item = CellId>, dist: &DistanceMatrix, params: &CostParams) -> Result<Self> {
        let mut cells: Vec<CellId> = cells.into_iter().collect();
        cells.sort_unstable();
        cells.dedup();
        let diameter_sq = zone_diameter_sq(&cells, dist)?;
        Ok(Zone {
            cells,
            diameter_sq,
            cost: zone_cost(diameter_sq, params),
        })
    }

    pub fn cells(&self) -> &[CellId] {
        &self.cells
    }

    pub fn diameter_sq(&self) -> f64 {
        self.diameter_sq
    }

    pub fn cost(&self) -> f64 {
        self.cost
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn contains(&self, cell: CellId) -> bool {
        self.cells.binary_search(&cell).is_ok()
    }

    /// Recomputes the cached fields from raw inputs and compares exactly.
    pub fn is_consistent(&self, dist: &DistanceMatrix, params: &CostParams) -> bool {
        match zone_diameter_sq(&self.cells, dist) {
            Ok(d2) => d2 == self.diameter_sq && zone_cost(d2, params) == self.cost,
            Err(_) => false,
        }
    }
}

/// Dual prices of the restricted master LP.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Duals {
    /// Price of the global budget row.
    pub lambda: f64,
    /// Price of each instantiated pair-linking row.
    pub pi: BTreeMap<(CellId, CellId), f64>,
}

impl Duals {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda.is_finite() && self.lambda >= 0.0) {
            return Err(Error::Validation(format!("lambda = {} must be >= 0", self.lambda)));
        }
        if let Some((k, v)) = self.pi.iter().find(|(_, v)| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::Validation(format!("pi{k:?} = {v} must be >= 0")));
        }
        Ok(())
    }

    pub fn max_pi(&self) -> f64 {
        self.pi.values().copied().fold(0.0, f64::max)
    }

    /// Row-major dense copy over `n` cells.
    pub fn dense_pi(&self, n: usize) -> Vec<f64> {
        let mut d = vec![0.0; n * n];
        for (&(i, j), &v) in &self.pi {
            if i < n && j < n {
                d[i * n + j] = v;
            }
        }
        d
    }
}

/// Sum of pi over the zone's pairs minus lambda times the zone cost.
pub fn reduced_cost(zone: &Zone, duals: &Duals, params: &CostParams) -> f64 {
    let cells = zone.cells();
    let pi_sum: f64 = if cells.len() * cells.len() <= duals.pi.len() {
        let mut s = 0.0;
        for &i in cells {
            for &j in cells {
                if let Some(v) = duals.pi.get(&(i, j)) {
                    s += v;
                }
            }
        }
        s
    } else {
        duals
            .pi
            .iter()
            .filter(|((i, j), _)| zone.contains(*i) && zone.contains(*j))
            .map(|(_, v)| v)
            .sum()
    };
    pi_sum - duals.lambda * (params.alpha * zone.diameter_sq() + params.beta)
}
