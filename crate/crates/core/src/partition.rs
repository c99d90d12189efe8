//! Nested tagged partitions.
//!
//! Depth `m` splits the space into good cells of diameter at most `1/(2m)`
//! lying inside the compact `K_m`, followed by bad cells that exactly cover
//! `K_m^∁`. Each depth refines the previous one directly, and a child cell
//! that contains its parent's tag inherits it, so tag sets are nested.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{lit, wide, Real};
use crate::space::{CompactExhaustion, MetricSpace, Point, Region, Span, EXHAUSTION_UNIT};

/// One cell `A_{m,i}` with its tag `a_{m,i}`.
#[derive(Clone, Debug, PartialEq)]
pub struct Cell<T> {
    pub depth: usize,
    pub index: usize,
    pub region: Region<T>,
    pub tag: Point<T>,
    pub is_good: bool,
    /// Index of the enclosing cell at depth `m - 1`.
    pub parent: Option<usize>,
}

#[derive(Clone, Debug, PartialEq)]
enum Locator {
    /// Cell indices ordered by left endpoint.
    Spans(Vec<usize>),
    /// Point id → cell index (`usize::MAX` when uncovered).
    Table(Vec<usize>),
}

/// Partition `(A_m, M_m)` at one depth.
#[derive(Clone, Debug, PartialEq)]
pub struct TaggedPartition<T> {
    depth: usize,
    cells: Vec<Cell<T>>,
    good_count: usize,
    locator: Locator,
}

fn span_order<T: Real>(a: &Span<T>, b: &Span<T>) -> Ordering {
    a.lo.partial_cmp(&b.lo).unwrap_or(Ordering::Equal).then(b.lo_closed.cmp(&a.lo_closed))
}

impl<T: Real> TaggedPartition<T> {
    /// Wraps cells without validating them; see [`refine_check`].
    pub fn new(depth: usize, cells: Vec<Cell<T>>) -> Self {
        let good_count = cells.iter().take_while(|c| c.is_good).count();
        let locator = if cells.iter().all(|c| matches!(c.region, Region::Points(_))) && !cells.is_empty() {
            let size = cells
                .iter()
                .filter_map(|c| match &c.region {
                    Region::Points(ids) => ids.last().map(|&i| i + 1),
                    Region::Span(_) => None,
                })
                .max()
                .unwrap_or(0);
            let mut table = vec![usize::MAX; size];
            for (k, c) in cells.iter().enumerate() {
                if let Region::Points(ids) = &c.region {
                    for &i in ids {
                        if table[i] == usize::MAX {
                            table[i] = k;
                        }
                    }
                }
            }
            Locator::Table(table)
        } else {
            let mut order: Vec<usize> = (0..cells.len()).filter(|&k| matches!(cells[k].region, Region::Span(_))).collect();
            order.sort_by(|&a, &b| match (&cells[a].region, &cells[b].region) {
                (Region::Span(x), Region::Span(y)) => span_order(x, y),
                _ => Ordering::Equal,
            });
            Locator::Spans(order)
        };
        TaggedPartition { depth, cells, good_count, locator }
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn cells(&self) -> &[Cell<T>] {
        &self.cells
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// `ℓ̃_m`: the number of leading good cells.
    pub fn good_count(&self) -> usize {
        self.good_count
    }

    /// Tags `M_m` in cell order.
    pub fn tags(&self) -> Vec<Point<T>> {
        self.cells.iter().map(|c| c.tag).collect()
    }

    pub fn is_bad_index(&self, k: usize) -> bool {
        !self.cells[k].is_good
    }

    /// Index of the cell containing `x`.
    pub fn locate(&self, x: &Point<T>) -> Result<usize> {
        let found = match (&self.locator, x) {
            (Locator::Table(table), Point::Id(i)) => table.get(*i).copied().filter(|&k| k != usize::MAX),
            (Locator::Spans(order), Point::Real(v)) => {
                let idx = order.partition_point(|&k| match &self.cells[k].region {
                    Region::Span(s) => s.lo < *v || (s.lo == *v && s.lo_closed),
                    Region::Points(_) => false,
                });
                idx.checked_sub(1).map(|i| order[i]).filter(|&k| self.cells[k].region.contains(x))
            }
            _ => None,
        };
        found.ok_or_else(|| Error::Internal(format!("no depth-{} cell contains {x}", self.depth)))
    }

    /// `π^m(x)`: the tag of the cell containing `x`.
    pub fn project(&self, x: &Point<T>) -> Result<Point<T>> {
        self.locate(x).map(|k| self.cells[k].tag)
    }
}

/// The nested family `(A_m, M_m)` for `m = 1..=max_depth`.
#[derive(Clone, Debug, PartialEq)]
pub struct PartitionSequence<T> {
    space: MetricSpace<T>,
    exhaustion: CompactExhaustion<T>,
    partitions: Vec<TaggedPartition<T>>,
}

impl<T: Real> PartitionSequence<T> {
    /// Assembles a sequence without validation; index 0 is depth 1.
    pub fn from_parts(space: MetricSpace<T>, exhaustion: CompactExhaustion<T>, partitions: Vec<TaggedPartition<T>>) -> Self {
        PartitionSequence { space, exhaustion, partitions }
    }

    pub fn space(&self) -> &MetricSpace<T> {
        &self.space
    }

    pub fn exhaustion(&self) -> &CompactExhaustion<T> {
        &self.exhaustion
    }

    pub fn max_depth(&self) -> usize {
        self.partitions.len()
    }

    /// Partition at depth `m` (1-based).
    pub fn at(&self, m: usize) -> Result<&TaggedPartition<T>> {
        m.checked_sub(1).and_then(|i| self.partitions.get(i)).ok_or_else(|| Error::Argument(format!("depth {m} outside 1..={}", self.max_depth())))
    }

    pub fn partitions(&self) -> &[TaggedPartition<T>] {
        &self.partitions
    }

    /// Index of the depth-`m` cell containing depth-`(m + j)` cell `k`.
    pub fn ancestor(&self, m: usize, j: usize, mut k: usize) -> Result<usize> {
        for depth in (m + 1..=m + j).rev() {
            k = self.at(depth)?.cells[k].parent.ok_or_else(|| Error::Internal(format!("cell ({depth},{k}) has no parent")))?;
        }
        Ok(k)
    }

    /// Flattened dump of all depths.
    pub fn to_records(&self) -> Vec<CellRecord> {
        self.partitions.iter().flat_map(|p| p.cells.iter().map(CellRecord::from_cell)).collect()
    }

    /// Rebuilds a sequence from a dump. Cells are grouped by depth and
    /// ordered by index; no invariant is checked here.
    pub fn from_records(space: MetricSpace<T>, exhaustion: CompactExhaustion<T>, records: &[CellRecord]) -> Result<Self> {
        let max_depth = records.iter().map(CellRecord::depth).max().unwrap_or(0);
        let mut partitions = Vec::with_capacity(max_depth);
        for m in 1..=max_depth {
            let mut cells: Vec<Cell<T>> = records.iter().filter(|r| r.depth() == m).map(CellRecord::to_cell).collect::<Result<_>>()?;
            cells.sort_by_key(|c| c.index);
            partitions.push(TaggedPartition::new(m, cells));
        }
        Ok(PartitionSequence { space, exhaustion, partitions })
    }
}

/// Widest dyadic width `2^{-k}` not exceeding `1/(2m)`.
pub fn good_width(m: usize) -> f64 {
    let target = 1.0 / (2.0 * m as f64);
    let mut w = 1.0;
    while w > target {
        w /= 2.0;
    }
    w
}

/// Builds nested partitions for depths `1..=m_max`.
pub fn build_sequence<T: Real>(space: &MetricSpace<T>, exhaustion: &CompactExhaustion<T>, m_max: usize) -> Result<PartitionSequence<T>> {
    if m_max == 0 {
        return Err(Error::Argument("partition depth must be at least 1".into()));
    }
    if exhaustion.depth() < m_max {
        return Err(Error::Argument(format!("exhaustion depth {} is below requested depth {m_max}", exhaustion.depth())));
    }
    let root_region = space.full_region();
    if root_region.is_empty() {
        return Err(Error::Argument("cannot partition an empty space".into()));
    }
    let root_tag = match &root_region {
        Region::Span(s) => default_tag(s),
        Region::Points(ids) => Point::Id(medoid(space, ids)),
    };
    let root = Cell { depth: 0, index: 0, region: root_region, tag: root_tag, is_good: false, parent: None };
    let mut parents = vec![root];
    let mut partitions = Vec::with_capacity(m_max);
    for m in 1..=m_max {
        let k = exhaustion.set(m);
        let mut good: Vec<Cell<T>> = Vec::new();
        let mut bad: Vec<Cell<T>> = Vec::new();
        for (pi, parent) in parents.iter().enumerate() {
            let parent_ix = (m > 1).then_some(pi);
            let (good_regions, bad_regions) = split(space, &parent.region, k, m)?;
            for (region, is_good) in good_regions.into_iter().map(|r| (r, true)).chain(bad_regions.into_iter().map(|r| (r, false))) {
                let tag = if region.contains(&parent.tag) {
                    parent.tag
                } else {
                    match &region {
                        Region::Span(s) => default_tag(s),
                        Region::Points(ids) => Point::Id(medoid(space, ids)),
                    }
                };
                let cell = Cell { depth: m, index: 0, region, tag, is_good, parent: parent_ix };
                if is_good {
                    good.push(cell);
                } else {
                    bad.push(cell);
                }
            }
        }
        let mut cells = good;
        cells.extend(bad);
        for (i, c) in cells.iter_mut().enumerate() {
            c.index = i;
        }
        partitions.push(TaggedPartition::new(m, cells.clone()));
        parents = cells;
    }
    Ok(PartitionSequence { space: space.clone(), exhaustion: exhaustion.clone(), partitions })
}

fn default_tag<T: Real>(s: &Span<T>) -> Point<T> {
    let unit = lit::<T>(EXHAUSTION_UNIT);
    Point::Real(match (s.lo.is_finite(), s.hi.is_finite()) {
        (true, true) => s.lo + (s.hi - s.lo) / lit(2.0),
        (true, false) => s.lo + unit,
        (false, true) => s.hi - unit,
        (false, false) => T::zero(),
    })
}

/// Point minimizing the summed distance to the others; lowest id on ties.
fn medoid<T: Real>(space: &MetricSpace<T>, ids: &[usize]) -> usize {
    let mut best = (ids[0], T::infinity());
    for &i in ids {
        let cost: T = ids.iter().map(|&j| space.id_distance(i, j)).sum();
        if cost < best.1 {
            best = (i, cost);
        }
    }
    best.0
}

type Pieces<T> = (Vec<Region<T>>, Vec<Region<T>>);

/// Splits a parent region into good pieces inside `k` and bad pieces outside.
fn split<T: Real>(space: &MetricSpace<T>, parent: &Region<T>, k: &Region<T>, m: usize) -> Result<Pieces<T>> {
    match (parent, k) {
        (Region::Span(p), Region::Span(k)) => {
            let width = lit::<T>(good_width(m));
            let mut bad = Vec::new();
            if let Some(left) = p.intersect(&Span::new(T::neg_infinity(), k.lo, false, !k.lo_closed)) {
                bad.push(Region::Span(left));
            }
            if let Some(right) = p.intersect(&Span::new(k.hi, T::infinity(), !k.hi_closed, false)) {
                bad.push(Region::Span(right));
            }
            let good = match p.intersect(k) {
                Some(mid) => grid_pieces(&mid, width, space.grid_anchor()).into_iter().map(Region::Span).collect(),
                None => Vec::new(),
            };
            Ok((good, bad))
        }
        (Region::Points(ids), Region::Points(kept)) => {
            let (inside, outside): (Vec<usize>, Vec<usize>) = ids.iter().partition(|i| kept.binary_search(i).is_ok());
            let target = lit::<T>(0.5 / m as f64);
            let good = cluster(space, &inside, target).into_iter().map(Region::Points).collect();
            let bad = if outside.is_empty() { Vec::new() } else { vec![Region::Points(outside)] };
            Ok((good, bad))
        }
        _ => Err(Error::Internal("region kind does not match the exhaustion".into())),
    }
}

/// Cuts `mid` at the grid points `anchor + j·width` strictly inside it.
fn grid_pieces<T: Real>(mid: &Span<T>, width: T, anchor: T) -> Vec<Span<T>> {
    let mut j = ((mid.lo - anchor) / width).floor();
    while anchor + j * width > mid.lo {
        j = j - T::one();
    }
    while anchor + j * width <= mid.lo {
        j = j + T::one();
    }
    let mut pieces = Vec::new();
    let (mut lo, mut lo_closed) = (mid.lo, mid.lo_closed);
    loop {
        let g = anchor + j * width;
        if g >= mid.hi {
            break;
        }
        pieces.push(Span::new(lo, g, lo_closed, false));
        lo = g;
        lo_closed = true;
        j = j + T::one();
    }
    pieces.push(Span::new(lo, mid.hi, lo_closed, mid.hi_closed));
    pieces
}

/// Greedy complete-linkage clustering in id order with diameter ≤ `target`.
fn cluster<T: Real>(space: &MetricSpace<T>, ids: &[usize], target: T) -> Vec<Vec<usize>> {
    let mut remaining: Vec<usize> = ids.to_vec();
    let mut clusters = Vec::new();
    while !remaining.is_empty() {
        let mut members = vec![remaining[0]];
        for &p in &remaining[1..] {
            if members.iter().all(|&q| space.id_distance(p, q) <= target) {
                members.push(p);
            }
        }
        remaining.retain(|p| !members.contains(p));
        clusters.push(members);
    }
    clusters
}

/// Outcome of one named invariant.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InvariantCheck {
    pub name: String,
    pub passed: bool,
    /// First counterexample when failed.
    pub detail: Option<String>,
}

/// Pass/fail per partition invariant.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub checks: Vec<InvariantCheck>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&InvariantCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            let status = if c.passed { "pass" } else { "FAIL" };
            write!(f, "{status} {}", c.name)?;
            if let Some(d) = &c.detail {
                write!(f, ": {d}")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

struct Checker {
    checks: Vec<InvariantCheck>,
}

impl Checker {
    fn record(&mut self, name: &str, first_failure: Option<String>) {
        self.checks.push(InvariantCheck { name: name.to_string(), passed: first_failure.is_none(), detail: first_failure });
    }
}

fn first<I: IntoIterator<Item = Option<String>>>(items: I) -> Option<String> {
    items.into_iter().flatten().next()
}

/// Checks every structural invariant of a partition sequence.
pub fn refine_check<T: Real>(seq: &PartitionSequence<T>) -> ValidationReport {
    let space = seq.space();
    let mut c = Checker { checks: Vec::new() };
    let parts = seq.partitions();

    c.record(
        "nonempty-cells",
        first(
            parts
                .iter()
                .flat_map(|p| p.cells.iter().map(|cell| cell.region.is_empty().then(|| format!("cell ({},{}) is empty", cell.depth, cell.index)))),
        ),
    );
    c.record(
        "tag-in-cell",
        first(parts.iter().flat_map(|p| {
            p.cells
                .iter()
                .map(|cell| (!cell.region.contains(&cell.tag)).then(|| format!("tag {} outside cell ({},{})", cell.tag, cell.depth, cell.index)))
        })),
    );
    c.record(
        "good-diameter",
        first(parts.iter().flat_map(|p| {
            p.cells.iter().map(move |cell| {
                let diam = cell.region.diameter(space);
                (cell.is_good && !(wide(diam) < 1.0 / p.depth as f64))
                    .then(|| format!("good cell ({},{}) has diameter {diam} ≥ 1/{}", cell.depth, cell.index, p.depth))
            })
        })),
    );
    c.record(
        "good-prefix",
        first(parts.iter().map(|p| {
            p.cells[p.good_count..]
                .iter()
                .find(|cell| cell.is_good)
                .map(|cell| format!("good cell ({},{}) follows a bad cell", cell.depth, cell.index))
        })),
    );
    c.record("disjoint", first(parts.iter().map(|p| overlap(p))));
    c.record("cover", first(parts.iter().map(|p| coverage_gap(space, p))));
    c.record(
        "bad-cells-cover-complement",
        first(parts.iter().map(|p| {
            let k = seq.exhaustion().set(p.depth.min(seq.exhaustion().depth()).max(1));
            p.cells.iter().find_map(|cell| {
                if cell.is_good && !cell.region.is_subset_of(k) {
                    Some(format!("good cell ({},{}) leaves K_{}", cell.depth, cell.index, p.depth))
                } else if !cell.is_good && cell.region.intersect(k).is_some() {
                    Some(format!("bad cell ({},{}) meets K_{}", cell.depth, cell.index, p.depth))
                } else {
                    None
                }
            })
        })),
    );
    c.record(
        "nested",
        first(parts.windows(2).map(|w| {
            let (coarse, fine) = (&w[0], &w[1]);
            fine.cells.iter().find_map(|cell| {
                let recorded = cell.parent.and_then(|p| coarse.cells.get(p)).is_some_and(|p| cell.region.is_subset_of(&p.region));
                (!recorded).then(|| format!("cell ({},{}) is not inside its depth-{} parent", cell.depth, cell.index, coarse.depth))
            })
        })),
    );
    c.record(
        "tag-inclusion",
        first(parts.windows(2).map(|w| {
            let fine = w[1].tags();
            w[0].cells.iter().find_map(|cell| {
                (!fine.iter().any(|t| t.total_cmp(&cell.tag) == Ordering::Equal))
                    .then(|| format!("tag {} of ({},{}) missing at depth {}", cell.tag, cell.depth, cell.index, w[1].depth))
            })
        })),
    );
    ValidationReport { checks: c.checks }
}

fn overlap<T: Real>(p: &TaggedPartition<T>) -> Option<String> {
    match &p.locator {
        Locator::Spans(order) => {
            let mut widest: Option<usize> = None;
            for &k in order {
                if let (Some(w), Region::Span(s)) = (widest, &p.cells[k].region) {
                    if let Region::Span(ws) = &p.cells[w].region {
                        if ws.intersect(s).is_some() {
                            return Some(format!("cells ({},{}) and ({},{}) overlap", p.depth, w, p.depth, k));
                        }
                        if s.hi > ws.hi || (s.hi == ws.hi && s.hi_closed) {
                            widest = Some(k);
                        }
                    }
                } else {
                    widest = Some(k);
                }
            }
            None
        }
        Locator::Table(_) => {
            let mut owner: Vec<Option<usize>> = Vec::new();
            for (k, cell) in p.cells.iter().enumerate() {
                if let Region::Points(ids) = &cell.region {
                    for &i in ids {
                        if owner.len() <= i {
                            owner.resize(i + 1, None);
                        }
                        if let Some(prev) = owner[i] {
                            return Some(format!("cells ({},{}) and ({},{}) overlap at point #{i}", p.depth, prev, p.depth, k));
                        }
                        owner[i] = Some(k);
                    }
                }
            }
            None
        }
    }
}

fn coverage_gap<T: Real>(space: &MetricSpace<T>, p: &TaggedPartition<T>) -> Option<String> {
    match (&p.locator, space.full_region()) {
        (Locator::Spans(order), Region::Span(full)) => {
            let spans: Vec<Span<T>> = order
                .iter()
                .filter_map(|&k| match &p.cells[k].region {
                    Region::Span(s) => Some(*s),
                    Region::Points(_) => None,
                })
                .collect();
            let first = spans.first()?;
            if first.lo != full.lo || first.lo_closed != full.lo_closed {
                return Some(format!("depth {}: space starts at {} but first cell is {first}", p.depth, full.lo));
            }
            for w in spans.windows(2) {
                if w[0].hi != w[1].lo || w[0].hi_closed == w[1].lo_closed {
                    return Some(format!("depth {}: cells {} and {} do not abut", p.depth, w[0], w[1]));
                }
            }
            let last = spans.last()?;
            (last.hi != full.hi || last.hi_closed != full.hi_closed)
                .then(|| format!("depth {}: space ends at {} but last cell is {last}", p.depth, full.hi))
        }
        (Locator::Table(table), Region::Points(ids)) => {
            ids.iter().find(|&&i| table.get(i).is_none_or(|&k| k == usize::MAX)).map(|i| format!("depth {}: point #{i} is in no cell", p.depth))
        }
        _ => Some(format!("depth {}: cell kinds do not match the space", p.depth)),
    }
}

/// Serialized cell, one JSON object per cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CellRecord {
    Points {
        depth: usize,
        index: usize,
        members: Vec<usize>,
        tag: usize,
        is_good: bool,
        #[serde(default)]
        parent: Option<usize>,
    },
    Span {
        depth: usize,
        index: usize,
        /// `null` when unbounded.
        lo: Option<f64>,
        hi: Option<f64>,
        #[serde(default = "closed_default")]
        lo_closed: bool,
        #[serde(default)]
        hi_closed: bool,
        tag: f64,
        is_good: bool,
        #[serde(default)]
        parent: Option<usize>,
    },
}

fn closed_default() -> bool {
    true
}

impl CellRecord {
    pub fn depth(&self) -> usize {
        match self {
            CellRecord::Points { depth, .. } | CellRecord::Span { depth, .. } => *depth,
        }
    }

    fn from_cell<T: Real>(cell: &Cell<T>) -> Self {
        match (&cell.region, cell.tag) {
            (Region::Points(ids), tag) => CellRecord::Points {
                depth: cell.depth,
                index: cell.index,
                members: ids.clone(),
                tag: tag.as_id().unwrap_or(usize::MAX),
                is_good: cell.is_good,
                parent: cell.parent,
            },
            (Region::Span(s), tag) => CellRecord::Span {
                depth: cell.depth,
                index: cell.index,
                lo: s.lo.is_finite().then(|| wide(s.lo)),
                hi: s.hi.is_finite().then(|| wide(s.hi)),
                lo_closed: s.lo_closed,
                hi_closed: s.hi_closed,
                tag: tag.as_real().map(wide).unwrap_or(f64::NAN),
                is_good: cell.is_good,
                parent: cell.parent,
            },
        }
    }

    fn to_cell<T: Real>(&self) -> Result<Cell<T>> {
        Ok(match self {
            CellRecord::Points { depth, index, members, tag, is_good, parent } => Cell {
                depth: *depth,
                index: *index,
                region: Region::points(members.clone()),
                tag: Point::Id(*tag),
                is_good: *is_good,
                parent: *parent,
            },
            CellRecord::Span { depth, index, lo, hi, lo_closed, hi_closed, tag, is_good, parent } => Cell {
                depth: *depth,
                index: *index,
                region: Region::Span(Span::new(
                    lo.map(lit).unwrap_or_else(T::neg_infinity),
                    hi.map(lit).unwrap_or_else(T::infinity),
                    *lo_closed,
                    *hi_closed,
                )),
                tag: Point::Real(lit(*tag)),
                is_good: *is_good,
                parent: *parent,
            },
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::{FiniteMeasure, SourceMeasure};
    use crate::space::build_exhaustion;

    fn unit_interval(m: usize) -> PartitionSequence<f64> {
        let space = MetricSpace::interval(0.0, 1.0).unwrap();
        let mu = SourceMeasure::uniform(0.0, 1.0).unwrap();
        let ex = build_exhaustion(&mu, &space, m).unwrap();
        build_sequence(&space, &ex, m).unwrap()
    }

    fn gaussian(m: usize) -> PartitionSequence<f64> {
        let space = MetricSpace::real_line();
        let mu = SourceMeasure::gaussian(0.0, 1.0).unwrap();
        let ex = build_exhaustion(&mu, &space, m).unwrap();
        build_sequence(&space, &ex, m).unwrap()
    }

    #[test]
    fn widths_are_dyadic_and_small_enough() {
        assert_eq!(good_width(1), 0.5);
        assert_eq!(good_width(2), 0.25);
        assert_eq!(good_width(3), 0.125);
        assert_eq!(good_width(5), 0.0625);
        for m in 1..50 {
            assert!(good_width(m) <= 0.5 / m as f64);
        }
    }

    #[test]
    fn unit_interval_depth_one() {
        let seq = unit_interval(2);
        let p = seq.at(1).unwrap();
        assert_eq!(p.len(), 2);
        assert_eq!(p.good_count(), 2);
        assert_eq!(p.cells()[0].region, Region::Span(Span::new(0.0, 0.5, true, false)));
        assert_eq!(p.cells()[1].region, Region::Span(Span::new(0.5, 1.0, true, true)));
        assert_eq!(p.project(&Point::Real(0.3)).unwrap(), p.cells()[0].tag);
        let fine = seq.at(2).unwrap();
        assert_eq!(fine.len(), 4);
        for cell in fine.cells() {
            let parent = &p.cells()[cell.parent.unwrap()];
            assert!(cell.region.is_subset_of(&parent.region));
            assert!(cell.region.diameter(seq.space()) <= 0.25);
        }
        assert!(refine_check(&seq).passed(), "{}", refine_check(&seq));
    }

    #[test]
    fn gaussian_depth_one_has_two_bad_tails() {
        let seq = gaussian(3);
        let p = seq.at(1).unwrap();
        assert_eq!(p.good_count(), 6);
        assert_eq!(p.len(), 8);
        assert_eq!(p.cells()[6].region, Region::Span(Span::new(f64::NEG_INFINITY, -1.5, false, false)));
        assert_eq!(p.cells()[7].region, Region::Span(Span::new(1.5, f64::INFINITY, false, false)));
        assert_eq!(p.project(&Point::Real(10.0)).unwrap(), p.cells()[7].tag);
        assert_eq!(p.locate(&Point::Real(1.5)).unwrap(), 5);
        let report = refine_check(&seq);
        assert!(report.passed(), "{report}");
    }

    #[test]
    fn tags_project_to_themselves_and_nest() {
        let seq = gaussian(4);
        for m in 1..=4 {
            let p = seq.at(m).unwrap();
            for cell in p.cells() {
                assert_eq!(p.project(&cell.tag).unwrap(), cell.tag);
            }
        }
        for m in 1..4 {
            let (coarse, fine) = (seq.at(m).unwrap(), seq.at(m + 1).unwrap());
            for (k, cell) in fine.cells().iter().enumerate() {
                let expected = coarse.cells()[seq.ancestor(m, 1, k).unwrap()].tag;
                assert_eq!(coarse.project(&cell.tag).unwrap(), expected);
            }
        }
    }

    #[test]
    fn finite_space_clusters_by_diameter() {
        let pts: Vec<Vec<f64>> = vec![vec![0.0], vec![0.1], vec![0.2], vec![1.0], vec![1.05], vec![3.0]];
        let space = MetricSpace::cloud(pts).unwrap();
        let fm = FiniteMeasure::uniform((0..6).map(Point::Id).collect()).unwrap();
        let ex = build_exhaustion(&SourceMeasure::Finite(fm), &space, 3).unwrap();
        let seq = build_sequence(&space, &ex, 3).unwrap();
        let report = refine_check(&seq);
        assert!(report.passed(), "{report}");
        let p1 = seq.at(1).unwrap();
        assert_eq!(p1.len(), 3);
        assert_eq!(p1.project(&Point::Id(2)).unwrap(), p1.project(&Point::Id(0)).unwrap());
        assert!(seq.at(3).unwrap().cells().iter().all(|c| c.region.diameter(&space) <= 1.0 / 6.0));
    }

    #[test]
    fn zero_depth_is_an_argument_error() {
        let space = MetricSpace::interval(0.0, 1.0).unwrap();
        let ex = build_exhaustion(&SourceMeasure::uniform(0.0, 1.0).unwrap(), &space, 1).unwrap();
        assert!(build_sequence(&space, &ex, 0).is_err());
        assert!(build_sequence(&space, &ex, 2).is_err());
    }

    #[test]
    fn planted_overlap_is_reported() {
        let seq = unit_interval(1);
        let mut cells = seq.at(1).unwrap().cells().to_vec();
        cells[0].region = Region::Span(Span::new(0.0, 0.6, true, false));
        let broken = PartitionSequence::from_parts(seq.space().clone(), seq.exhaustion().clone(), vec![TaggedPartition::new(1, cells)]);
        let report = refine_check(&broken);
        let check = report.check("disjoint").unwrap();
        assert!(!check.passed);
        assert!(check.detail.as_ref().unwrap().contains("(1,0) and (1,1)"));
    }

    #[test]
    fn planted_wide_good_cell_is_reported() {
        let space = MetricSpace::interval(0.0, 1.0).unwrap();
        let seq = unit_interval(2);
        let mut cells = seq.at(2).unwrap().cells().to_vec();
        // Merge the first two cells into one of diameter exactly 1/2 = 1/m.
        cells[0].region = Region::Span(Span::new(0.0, 0.5, true, false));
        cells.remove(1);
        for (i, c) in cells.iter_mut().enumerate() {
            c.index = i;
        }
        let parts = vec![seq.at(1).unwrap().clone(), TaggedPartition::new(2, cells)];
        let broken = PartitionSequence::from_parts(space, seq.exhaustion().clone(), parts);
        let report = refine_check(&broken);
        assert!(!report.check("good-diameter").unwrap().passed);
    }

    #[test]
    fn records_round_trip() {
        let seq = gaussian(2);
        let json = serde_json::to_string(&seq.to_records()).unwrap();
        let records: Vec<CellRecord> = serde_json::from_str(&json).unwrap();
        let back = PartitionSequence::from_records(seq.space().clone(), seq.exhaustion().clone(), &records).unwrap();
        assert_eq!(back, seq);
    }
}
