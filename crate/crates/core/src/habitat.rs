//! The pond: density-driven cell quality, the quality → water-parameter
//! table, feeder geometry and the pellet field.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::config::Disposition;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Pos {
    pub col: i32,
    pub row: i32,
}

impl Pos {
    pub const fn new(col: i32, row: i32) -> Self {
        Self { col, row }
    }

    pub fn dist2(self, other: Pos) -> i64 {
        let dc = (self.col - other.col) as i64;
        let dr = (self.row - other.row) as i64;
        dc * dc + dr * dr
    }

    pub fn chebyshev(self, other: Pos) -> i32 {
        (self.col - other.col).abs().max((self.row - other.row).abs())
    }
}

/// Cell quality, best first.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum QualityLevel {
    Good,
    Medium,
    Tolerable,
    Bad,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Color {
    White,
    Green,
    Yellow,
    Red,
}

impl QualityLevel {
    pub const ALL: [QualityLevel; 4] =
        [QualityLevel::Good, QualityLevel::Medium, QualityLevel::Tolerable, QualityLevel::Bad];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn color(self) -> Color {
        match self {
            QualityLevel::Good => Color::White,
            QualityLevel::Medium => Color::Green,
            QualityLevel::Tolerable => Color::Yellow,
            QualityLevel::Bad => Color::Red,
        }
    }

    pub fn glyph(self) -> char {
        match self {
            QualityLevel::Good => '.',
            QualityLevel::Medium => 'g',
            QualityLevel::Tolerable => 'y',
            QualityLevel::Bad => 'r',
        }
    }
}

/// Water parameters of a cell.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WaterParams {
    pub o2: f64,
    pub ph: f64,
    pub temp: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Cell {
    pub position: Pos,
    pub quality: QualityLevel,
    pub params: WaterParams,
}

pub fn check_thresholds(t: [u32; 3]) -> Result<()> {
    if t[0] < t[1] && t[1] < t[2] {
        Ok(())
    } else {
        Err(Error::Config(format!(
            "density thresholds must be strictly increasing, got {t:?}"
        )))
    }
}

/// Quality for a neighbourhood agent count.
pub fn density_quality(count: u32, thresholds: [u32; 3]) -> Result<QualityLevel> {
    check_thresholds(thresholds)?;
    Ok(quality_unchecked(count, thresholds))
}

fn quality_unchecked(count: u32, [t1, t2, t3]: [u32; 3]) -> QualityLevel {
    if count <= t1 {
        QualityLevel::Good
    } else if count <= t2 {
        QualityLevel::Medium
    } else if count <= t3 {
        QualityLevel::Tolerable
    } else {
        QualityLevel::Bad
    }
}

pub fn quality_params(q: QualityLevel, table: &[[f64; 3]; 4]) -> WaterParams {
    let [o2, ph, temp] = table[q.index()];
    WaterParams { o2, ph, temp }
}

#[derive(Clone, Debug, PartialEq)]
pub struct HabitatGrid {
    width: usize,
    height: usize,
    radius: usize,
    thresholds: [u32; 3],
    table: [[f64; 3]; 4],
    quality: Vec<QualityLevel>,
}

impl HabitatGrid {
    /// An empty (all Good) grid.
    pub fn new(
        width: usize,
        height: usize,
        density_radius: usize,
        thresholds: [u32; 3],
        table: [[f64; 3]; 4],
    ) -> Result<Self> {
        check_thresholds(thresholds)?;
        if width == 0 || height == 0 {
            return Err(Error::Config("grid dimensions must be > 0".into()));
        }
        Ok(Self {
            width,
            height,
            radius: density_radius,
            thresholds,
            table,
            quality: vec![QualityLevel::Good; width * height],
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn contains(&self, p: Pos) -> bool {
        p.col >= 0 && p.row >= 0 && (p.col as usize) < self.width && (p.row as usize) < self.height
    }

    pub fn quality(&self, p: Pos) -> QualityLevel {
        self.quality[p.row as usize * self.width + p.col as usize]
    }

    pub fn params(&self, p: Pos) -> WaterParams {
        quality_params(self.quality(p), &self.table)
    }

    pub fn cell(&self, p: Pos) -> Cell {
        Cell { position: p, quality: self.quality(p), params: self.params(p) }
    }

    /// Refreshes every cell from the agent count in its Moore neighbourhood.
    pub fn recompute_quality<I: IntoIterator<Item = Pos>>(&mut self, positions: I) {
        let (w, h) = (self.width, self.height);
        // summed-area table with a zero border row/column
        let mut sat = vec![0u32; (w + 1) * (h + 1)];
        for p in positions {
            sat[(p.row as usize + 1) * (w + 1) + p.col as usize + 1] += 1;
        }
        for r in 1..=h {
            let mut run = 0;
            for c in 1..=w {
                run += sat[r * (w + 1) + c];
                sat[r * (w + 1) + c] = run + sat[(r - 1) * (w + 1) + c];
            }
        }
        let k = self.radius;
        for r in 0..h {
            let r0 = r.saturating_sub(k);
            let r1 = (r + k + 1).min(h);
            for c in 0..w {
                let c0 = c.saturating_sub(k);
                let c1 = (c + k + 1).min(w);
                let count = sat[r1 * (w + 1) + c1] + sat[r0 * (w + 1) + c0]
                    - sat[r0 * (w + 1) + c1]
                    - sat[r1 * (w + 1) + c0];
                self.quality[r * w + c] = quality_unchecked(count, self.thresholds);
            }
        }
    }

    pub fn level_counts(&self) -> [usize; 4] {
        let mut out = [0; 4];
        for q in &self.quality {
            out[q.index()] += 1;
        }
        out
    }

    /// One text frame: quality glyphs, overlaid by `*` for pellets and `S`
    /// for agents.
    pub fn render_frame(&self, pellets: &PelletField, agents: &[Pos]) -> String {
        let mut chars: Vec<char> = self.quality.iter().map(|q| q.glyph()).collect();
        for p in pellets.live() {
            chars[p.position.row as usize * self.width + p.position.col as usize] = '*';
        }
        for a in agents {
            chars[a.row as usize * self.width + a.col as usize] = 'S';
        }
        let mut s = String::with_capacity((self.width + 1) * self.height);
        for row in chars.chunks(self.width) {
            s.extend(row);
            s.push('\n');
        }
        s
    }
}

/// Feeders on the horizontal midline at columns `round(width * i / (z + 1))`.
pub fn feeder_positions(
    disposition: Disposition,
    width: usize,
    height: usize,
    spread_radius: usize,
) -> Result<Vec<Pos>> {
    let z = disposition.feeder_count();
    if z == 0 {
        return Ok(Vec::new());
    }
    if width < 4 * spread_radius || height < 4 * spread_radius {
        return Err(Error::Config(format!(
            "grid {width}x{height} too small for feeder radius {spread_radius}"
        )));
    }
    let row = (height / 2) as i32;
    Ok((1..=z)
        .map(|i| {
            let col = (width as f64 * i as f64 / (z + 1) as f64).round() as i32;
            Pos::new(col.min(width as i32 - 1), row)
        })
        .collect())
}

/// Positions of a fresh drop of `count` pellets.
///
/// Initial stocking: jittered sampling. The pond is cut into `g × g` equal
/// strata (`g = ceil(sqrt(n))`), `n` of them are drawn without replacement
/// and each agent lands at a uniform point inside its stratum. Every agent's
/// position is still uniform over the pond, but large empty or crowded
/// patches cannot occur.
pub fn stocking_positions<R: Rng + ?Sized>(width: usize, height: usize, n: usize, rng: &mut R) -> Vec<Pos> {
    let g = (n as f64).sqrt().ceil().max(1.0) as usize;
    let strata = rand::seq::index::sample(rng, g * g, n);
    let (sw, sh) = (width as f64 / g as f64, height as f64 / g as f64);
    strata
        .iter()
        .map(|k| {
            let x = ((k % g) as f64 + rng.random::<f64>()) * sw;
            let y = ((k / g) as f64 + rng.random::<f64>()) * sh;
            Pos::new((x as i32).min(width as i32 - 1), (y as i32).min(height as i32 - 1))
        })
        .collect()
}

/// Zoned dispositions split the drop evenly across feeders (remainder to the
/// first ones) and scatter within the Chebyshev spread radius, clipped to
/// the grid. `Uniform` scatters over the whole grid.
pub fn drop_feed<R: Rng + ?Sized>(
    feeders: &[Pos],
    width: usize,
    height: usize,
    spread_radius: usize,
    count: usize,
    rng: &mut R,
) -> Vec<Pos> {
    let mut out = Vec::with_capacity(count);
    if feeders.is_empty() {
        for _ in 0..count {
            out.push(Pos::new(
                rng.random_range(0..width as i32),
                rng.random_range(0..height as i32),
            ));
        }
        return out;
    }
    let z = feeders.len();
    let r = spread_radius as i32;
    for (i, f) in feeders.iter().enumerate() {
        let share = count / z + usize::from(i < count % z);
        let c0 = (f.col - r).max(0);
        let c1 = (f.col + r).min(width as i32 - 1);
        let r0 = (f.row - r).max(0);
        let r1 = (f.row + r).min(height as i32 - 1);
        for _ in 0..share {
            out.push(Pos::new(rng.random_range(c0..=c1), rng.random_range(r0..=r1)));
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeedPellet {
    pub id: usize,
    pub position: Pos,
    pub alive: bool,
}

/// All pellets of a generation, indexed by cell.
///
/// Each cell keeps the ids of its live pellets in ascending order. Nearest
/// queries walk a table of cell offsets sorted by squared distance, so a
/// query stops at the first occupied distance shell.
#[derive(Clone, Debug)]
pub struct PelletField {
    width: usize,
    height: usize,
    pellets: Vec<FeedPellet>,
    cells: Vec<Vec<usize>>,
    live: usize,
    reach: i32,
    offsets: Vec<(i32, i32, i64)>,
}

/// Offset table reach used by [`PelletField::new`].
pub const DEFAULT_REACH: i32 = 8;

impl PelletField {
    pub fn new(width: usize, height: usize) -> Self {
        Self::with_reach(width, height, DEFAULT_REACH)
    }

    /// `reach` bounds the radius served from the offset table; larger
    /// radii fall back to a full scan.
    pub fn with_reach(width: usize, height: usize, reach: i32) -> Self {
        let reach = reach.max(0);
        let mut offsets = Vec::with_capacity(((2 * reach + 1) * (2 * reach + 1)) as usize);
        for dr in -reach..=reach {
            for dc in -reach..=reach {
                let d2 = (dc * dc + dr * dr) as i64;
                if d2 <= (reach as i64) * (reach as i64) {
                    offsets.push((dc, dr, d2));
                }
            }
        }
        offsets.sort_by_key(|o| o.2);
        Self {
            width,
            height,
            pellets: Vec::new(),
            cells: vec![Vec::new(); width * height],
            live: 0,
            reach,
            offsets,
        }
    }

    fn cell_index(&self, p: Pos) -> usize {
        p.row as usize * self.width + p.col as usize
    }

    fn in_bounds(&self, p: Pos) -> bool {
        p.col >= 0 && p.row >= 0 && (p.col as usize) < self.width && (p.row as usize) < self.height
    }

    pub fn add(&mut self, position: Pos) -> usize {
        assert!(self.in_bounds(position), "pellet outside the grid: {position:?}");
        let id = self.pellets.len();
        self.pellets.push(FeedPellet { id, position, alive: true });
        let c = self.cell_index(position);
        self.cells[c].push(id);
        self.live += 1;
        id
    }

    pub fn get(&self, id: usize) -> Option<&FeedPellet> {
        self.pellets.get(id)
    }

    /// Removes a live pellet. Removing a dead or unknown pellet is an error.
    pub fn consume(&mut self, id: usize) -> Result<FeedPellet> {
        let p = match self.pellets.get_mut(id) {
            Some(p) if p.alive => p,
            _ => return Err(Error::Consistency(format!("pellet {id} is not alive"))),
        };
        p.alive = false;
        let p = *p;
        let c = self.cell_index(p.position);
        let list = &mut self.cells[c];
        let at = list.iter().position(|&x| x == id).expect("live pellet is indexed");
        list.remove(at);
        self.live -= 1;
        Ok(p)
    }

    pub fn live_count(&self) -> usize {
        self.live
    }

    pub fn total_dropped(&self) -> usize {
        self.pellets.len()
    }

    pub fn all(&self) -> &[FeedPellet] {
        &self.pellets
    }

    pub fn live(&self) -> impl Iterator<Item = &FeedPellet> + '_ {
        self.pellets.iter().filter(|p| p.alive)
    }

    /// Live pellets on one cell, lowest id first.
    pub fn at(&self, p: Pos) -> &[usize] {
        if self.in_bounds(p) {
            &self.cells[self.cell_index(p)]
        } else {
            &[]
        }
    }

    /// Nearest live pellet within Euclidean `radius` of `center`, as
    /// (squared distance, id); ties go to the lowest id.
    pub fn nearest(&self, center: Pos, radius: f64) -> Option<(i64, usize)> {
        if !(radius >= 0.0) || self.live == 0 {
            return None;
        }
        let r2 = radius * radius;
        if radius > self.reach as f64 {
            return self
                .live()
                .map(|p| (center.dist2(p.position), p.id))
                .filter(|&(d2, _)| d2 as f64 <= r2)
                .min();
        }
        let mut best: Option<(i64, usize)> = None;
        for &(dc, dr, d2) in &self.offsets {
            if d2 as f64 > r2 || best.is_some_and(|b| d2 > b.0) {
                break;
            }
            let p = Pos::new(center.col + dc, center.row + dr);
            if let Some(&id) = self.at(p).first() {
                if best.is_none_or(|b| id < b.1) {
                    best = Some((d2, id));
                }
            }
        }
        best
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::TuningDefaults;
    use crate::fuzzy::{evaluate, StateLabel};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const T: [u32; 3] = [2, 5, 9];

    fn grid(w: usize, h: usize) -> HabitatGrid {
        HabitatGrid::new(w, h, 2, T, TuningDefaults::default().quality_param_table).unwrap()
    }

    #[test]
    fn density_levels() {
        assert_eq!(density_quality(0, T).unwrap(), QualityLevel::Good);
        assert_eq!(density_quality(10, T).unwrap(), QualityLevel::Bad);
        assert!(density_quality(1, [3, 3, 4]).is_err());
        let mut prev = QualityLevel::Good;
        for n in 0..=20 {
            let q = density_quality(n, T).unwrap();
            assert!(q >= prev, "quality improved at {n}");
            prev = q;
        }
    }

    #[test]
    fn quality_ladder_through_fuzzy() {
        let table = TuningDefaults::default().quality_param_table;
        let labels: Vec<StateLabel> = QualityLevel::ALL
            .iter()
            .map(|&q| {
                let p = quality_params(q, &table);
                evaluate(p.o2, p.ph, p.temp, None).unwrap().label
            })
            .collect();
        assert_eq!(
            labels,
            [StateLabel::Normal, StateLabel::Normal, StateLabel::Tolerable, StateLabel::Bad]
        );
    }

    #[test]
    fn colors() {
        assert_eq!(QualityLevel::Good.color(), Color::White);
        assert_eq!(QualityLevel::Bad.color(), Color::Red);
        assert!(QualityLevel::Good < QualityLevel::Medium);
    }

    #[test]
    fn recompute_matches_direct_count() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let (w, h) = (23, 17);
        let agents: Vec<Pos> = (0..150)
            .map(|_| Pos::new(rng.random_range(0..w as i32), rng.random_range(0..h as i32)))
            .collect();
        let mut g = grid(w, h);
        g.recompute_quality(agents.iter().copied());
        for r in 0..h as i32 {
            for c in 0..w as i32 {
                let p = Pos::new(c, r);
                let n = agents.iter().filter(|a| a.chebyshev(p) <= 2).count() as u32;
                assert_eq!(g.quality(p), density_quality(n, T).unwrap(), "{p:?}");
            }
        }
        let snapshot = g.clone();
        g.recompute_quality(agents.iter().copied());
        assert_eq!(g, snapshot);
    }

    #[test]
    fn empty_and_stacked() {
        let mut g = grid(100, 100);
        g.recompute_quality(std::iter::empty());
        assert_eq!(g.level_counts(), [10_000, 0, 0, 0]);
        let stack: Vec<Pos> = (0..12).map(|i| Pos::new(48 + i % 5, 48 + i / 5)).collect();
        g.recompute_quality(stack);
        assert_eq!(g.quality(Pos::new(50, 50)), QualityLevel::Bad);
        assert_eq!(g.cell(Pos::new(50, 50)).params.o2, 3.5);
    }

    #[test]
    fn feeders() {
        use Disposition::*;
        assert_eq!(feeder_positions(OneZone, 100, 100, 10).unwrap(), [Pos::new(50, 50)]);
        assert_eq!(
            feeder_positions(ThreeZones, 100, 100, 10).unwrap(),
            [Pos::new(25, 50), Pos::new(50, 50), Pos::new(75, 50)]
        );
        assert_eq!(feeder_positions(TwoZones, 99, 100, 10).unwrap(), [Pos::new(33, 50), Pos::new(66, 50)]);
        assert!(feeder_positions(Uniform, 100, 100, 10).unwrap().is_empty());
        assert!(feeder_positions(OneZone, 30, 100, 10).is_err());
        for d in [OneZone, TwoZones, ThreeZones] {
            let f = feeder_positions(d, 100, 100, 10).unwrap();
            let mut mirrored: Vec<Pos> = f.iter().map(|p| Pos::new(100 - p.col, p.row)).collect();
            mirrored.sort();
            assert_eq!(mirrored, f, "{d:?}");
        }
    }

    #[test]
    fn zoned_drop_splits_evenly_within_radius() {
        let f = feeder_positions(Disposition::ThreeZones, 100, 100, 10).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(drop_feed(&f, 100, 100, 10, 0, &mut rng).is_empty());
        let drop = drop_feed(&f, 100, 100, 10, 30, &mut rng);
        assert_eq!(drop.len(), 30);
        for (i, chunk) in drop.chunks(10).enumerate() {
            assert!(chunk.iter().all(|p| p.chebyshev(f[i]) <= 10));
        }
        let drop = drop_feed(&f, 100, 100, 10, 32, &mut rng);
        assert_eq!(drop.iter().filter(|p| p.chebyshev(f[0]) <= 10 && p.col < 36).count(), 11);
    }

    #[test]
    fn uniform_drop_is_spatially_uniform() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let drop = drop_feed(&[], 100, 100, 10, 10_000, &mut rng);
        let mut q = [0i64; 4];
        for p in &drop {
            q[(p.col >= 50) as usize * 2 + (p.row >= 50) as usize] += 1;
        }
        // binomial sd = sqrt(10000 * 0.25 * 0.75) ≈ 43.3
        for n in q {
            assert!((n - 2500).abs() as f64 <= 4.0 * 43.3, "{q:?}");
        }
        let chi2: f64 = q.iter().map(|&n| (n as f64 - 2500.0).powi(2) / 2500.0).sum();
        // 3 dof, p = 0.001 critical value
        assert!(chi2 < 16.27, "chi2 {chi2}");
    }

    #[test]
    fn stocking_is_uniform_and_even() {
        // Per-agent marginal: over many ponds each cell is equally likely.
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let mut q = [0i64; 4];
        for _ in 0..40 {
            for p in stocking_positions(100, 100, 250, &mut rng) {
                assert!(p.col >= 0 && p.col < 100 && p.row >= 0 && p.row < 100);
                q[(p.col >= 50) as usize * 2 + (p.row >= 50) as usize] += 1;
            }
        }
        let chi2: f64 = q.iter().map(|&n| (n as f64 - 2500.0).powi(2) / 2500.0).sum();
        assert!(chi2 < 16.27, "chi2 {chi2} {q:?}");

        // Within one pond, a perfect square count fills every stratum once.
        let pos = stocking_positions(100, 100, 400, &mut rng);
        let mut per_block = [0u32; 400];
        for p in &pos {
            per_block[(p.row / 5 * 20 + p.col / 5) as usize] += 1;
        }
        assert!(per_block.iter().all(|&n| n == 1));

        assert_eq!(stocking_positions(7, 3, 10, &mut rng).len(), 10);
        assert!(stocking_positions(7, 3, 0, &mut rng).is_empty());
    }

    #[test]
    fn pellet_field_conservation() {
        let mut f = PelletField::new(20, 20);
        let ids: Vec<usize> = (0..50).map(|i| f.add(Pos::new(i % 20, (i * 7) % 20))).collect();
        assert_eq!(f.live_count(), 50);
        for id in ids.iter().step_by(3) {
            f.consume(*id).unwrap();
        }
        assert_eq!(f.live_count(), 50 - 17);
        assert_eq!(f.live().count(), f.live_count());
        assert_eq!(f.total_dropped() - 17, f.live_count());
        assert!(f.consume(0).is_err());
        assert!(f.consume(999).is_err());
        let indexed: usize = (0..20)
            .flat_map(|r| (0..20).map(move |c| Pos::new(c, r)))
            .map(|p| f.at(p).len())
            .sum();
        assert_eq!(indexed, f.live_count());
    }

    #[test]
    fn render() {
        let mut g = grid(4, 2);
        g.recompute_quality(std::iter::empty());
        let mut f = PelletField::new(4, 2);
        f.add(Pos::new(1, 0));
        assert_eq!(g.render_frame(&f, &[Pos::new(3, 1)]), ".*..\n...S\n");
    }
}
