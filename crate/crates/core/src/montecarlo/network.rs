//! One network realization: base-station drop, spatial index, and the
//! SIR of each user.

use rand::distr::{Distribution, Open01};
use rand::Rng;
use rand_distr::Poisson;

use super::rng::{link_fading, stream_rng, Stream};
use crate::error::{Error, Result};
use crate::pathloss::PathLossModel;

/// Unit-mean exponential draw that is never exactly zero.
pub(crate) fn exp1<R: Rng>(rng: &mut R) -> f64 {
    let u: f64 = Open01.sample(rng);
    -u.ln()
}

/// A dropped base station with the key addressing its fading draws.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Station {
    pub pos: [f64; 2],
    pub key: u64,
}

/// Uniform grid over a square, stored as cell-sorted stations.
pub(crate) struct Grid {
    origin: f64,
    cell: f64,
    side: usize,
    starts: Vec<u32>,
    stations: Vec<Station>,
}

impl Grid {
    pub fn build(stations: &[Station], half_width: f64, density: f64) -> Grid {
        const MAX_SIDE: usize = 2048;
        let width = 2.0 * half_width;
        // about four stations per cell
        let side = ((width * (density / 4.0).sqrt()).ceil() as usize).clamp(1, MAX_SIDE);
        let cell = width / side as f64;
        let index = |p: [f64; 2]| {
            let ix = (((p[0] + half_width) / cell).max(0.0) as usize).min(side - 1);
            let iy = (((p[1] + half_width) / cell).max(0.0) as usize).min(side - 1);
            iy * side + ix
        };
        let mut counts = vec![0u32; side * side + 1];
        for s in stations {
            counts[index(s.pos) + 1] += 1;
        }
        for i in 1..counts.len() {
            counts[i] += counts[i - 1];
        }
        let mut fill = counts.clone();
        let mut sorted = vec![Station { pos: [0.0; 2], key: 0 }; stations.len()];
        for s in stations {
            let slot = &mut fill[index(s.pos)];
            sorted[*slot as usize] = *s;
            *slot += 1;
        }
        Grid {
            origin: -half_width,
            cell,
            side,
            starts: counts,
            stations: sorted,
        }
    }

    fn cell_of(&self, x: f64) -> isize {
        ((x - self.origin) / self.cell).floor() as isize
    }

    fn cell_stations(&self, ix: isize, iy: isize) -> &[Station] {
        if ix < 0 || iy < 0 || ix >= self.side as isize || iy >= self.side as isize {
            return &[];
        }
        let c = iy as usize * self.side + ix as usize;
        &self.stations[self.starts[c] as usize..self.starts[c + 1] as usize]
    }

    /// The nearest station and the squared distances to the two nearest.
    /// Needs at least two stations.
    pub fn two_nearest(&self, u: [f64; 2]) -> (Station, f64, f64) {
        let (cx, cy) = (self.cell_of(u[0]), self.cell_of(u[1]));
        let mut best = (f64::INFINITY, Station { pos: [0.0; 2], key: 0 });
        let mut second = f64::INFINITY;
        let max_ring = self.side as isize + 1;
        for ring in 0..=max_ring {
            for (ix, iy) in ring_cells(cx, cy, ring) {
                for s in self.cell_stations(ix, iy) {
                    let d2 = (s.pos[0] - u[0]).powi(2) + (s.pos[1] - u[1]).powi(2);
                    if d2 < best.0 {
                        second = best.0;
                        best = (d2, *s);
                    } else if d2 < second {
                        second = d2;
                    }
                }
            }
            // cells beyond this ring are at least ring·cell away
            let reach = ring as f64 * self.cell;
            if second <= reach * reach {
                break;
            }
        }
        (best.1, best.0, second)
    }

    /// Calls `f` with every station within distance `radius` of `u`.
    pub fn for_each_within(&self, u: [f64; 2], radius: f64, mut f: impl FnMut(&Station, f64)) {
        let r2 = radius * radius;
        let last = self.side as isize - 1;
        let (x0, x1) = (self.cell_of(u[0] - radius).max(0), self.cell_of(u[0] + radius).min(last));
        let (y0, y1) = (self.cell_of(u[1] - radius).max(0), self.cell_of(u[1] + radius).min(last));
        for iy in y0..=y1 {
            for ix in x0..=x1 {
                for s in self.cell_stations(ix, iy) {
                    let d2 = (s.pos[0] - u[0]).powi(2) + (s.pos[1] - u[1]).powi(2);
                    if d2 <= r2 {
                        f(s, d2);
                    }
                }
            }
        }
    }
}

fn ring_cells(cx: isize, cy: isize, ring: isize) -> impl Iterator<Item = (isize, isize)> {
    let span = -ring..=ring;
    span.clone().flat_map(move |dy| {
        let edge = dy.abs() == ring;
        let dxs: Vec<isize> = if edge { (-ring..=ring).collect() } else { vec![-ring, ring] };
        dxs.into_iter().map(move |dx| (cx + dx, cy + dy))
    })
}

/// Points where the gain may jump, in increasing order.
fn jump_points(model: &PathLossModel) -> Vec<f64> {
    match model {
        PathLossModel::MultiSlope { breakpoints, .. } => breakpoints.clone(),
        PathLossModel::Hybrid { r_switch, .. } => vec![*r_switch],
        _ => Vec::new(),
    }
}

/// Smallest radius beyond which the log-gain stays below `threshold`,
/// searched on `[from, to]`. Every model is non-increasing between its jump
/// points, so each such piece is bisected separately.
pub(crate) fn cutoff_radius(model: &PathLossModel, threshold: f64, from: f64, to: f64) -> Result<f64> {
    let lg = |r: f64| model.log_gain(r);
    let mut edges = vec![from];
    edges.extend(jump_points(model).into_iter().filter(|&b| b > from && b < to));
    edges.push(to);
    let mut radius = from;
    for w in edges.windows(2) {
        let (a, b) = (w[0], w[1]);
        // just right of the left edge
        let start = if a == from { a } else { a * (1.0 + 1e-12) };
        if lg(start)? < threshold {
            continue;
        }
        if lg(b)? >= threshold {
            radius = b;
            continue;
        }
        let (mut lo, mut hi) = (start, b);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if lg(mid)? >= threshold {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        radius = hi;
    }
    Ok(radius)
}

/// Per-realization output.
pub(crate) struct Realization {
    pub ln_sir: Vec<f64>,
    pub serving_distance: Vec<f64>,
    pub bs_count: u64,
    pub redraws: u32,
}

pub(crate) struct Setup<'a> {
    pub model: &'a PathLossModel,
    pub lambda: f64,
    pub outer_half: f64,
    pub inner_half: f64,
    pub users: usize,
    pub seed: u64,
    pub ln_noise: Option<f64>,
    pub cutoff: Option<f64>,
    pub max_attempts: u32,
}

/// `ln(e^a + e^b)`.
fn log_add_exp(a: f64, b: f64) -> f64 {
    let m = a.max(b);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + ((a - m).exp() + (b - m).exp()).ln()
}

/// Side of the square tiles from which stations are dropped.
///
/// Tiles are anchored at the origin and each has its own stream, so a
/// smaller window with the same seed sees exactly the stations of a larger
/// one that fall inside it.
fn tile_side(lambda: f64) -> f64 {
    (64.0 / lambda).sqrt().max(500.0)
}

fn tile_key(ix: i64, iy: i64) -> u64 {
    ((ix as u32 as u64) << 32) | iy as u32 as u64
}

/// Poisson drop of stations over `[-h, h]²`.
fn drop_stations(setup: &Setup<'_>, index: u64, attempt: u32) -> Result<Vec<Station>> {
    let h = setup.outer_half;
    let side = tile_side(setup.lambda);
    let poisson = Poisson::new(setup.lambda * side * side)
        .map_err(|e| Error::Validation(format!("base-station density {}: {e}", setup.lambda)))?;
    let reach = (h / side).ceil() as i64;
    let mut stations = Vec::with_capacity((setup.lambda * 4.0 * h * h * 1.1) as usize + 16);
    for iy in -reach..reach {
        for ix in -reach..reach {
            let mut rng = stream_rng(setup.seed, index, attempt, Stream::Network, tile_key(ix, iy));
            let count = poisson.sample(&mut rng) as u64;
            let (x0, y0) = (ix as f64 * side, iy as f64 * side);
            for _ in 0..count {
                let pos = [x0 + side * rng.random::<f64>(), y0 + side * rng.random::<f64>()];
                let key = rng.random::<u64>();
                if pos[0].abs() <= h && pos[1].abs() <= h {
                    stations.push(Station { pos, key });
                }
            }
        }
    }
    Ok(stations)
}

pub(crate) fn run_realization(setup: &Setup<'_>, index: u64) -> Result<Realization> {
    for attempt in 0..setup.max_attempts {
        let stations = drop_stations(setup, index, attempt)?;
        if stations.len() < 2 {
            continue;
        }
        let grid = Grid::build(&stations, setup.outer_half, setup.lambda);
        let mut users = stream_rng(setup.seed, index, attempt, Stream::Users, 0);
        let diagonal = 2.0 * std::f64::consts::SQRT_2 * setup.outer_half;
        let mut ln_sir = Vec::with_capacity(setup.users);
        let mut serving_distance = Vec::with_capacity(setup.users);
        for _ in 0..setup.users {
            let ih = setup.inner_half;
            let u = [users.random_range(-ih..=ih), users.random_range(-ih..=ih)];
            let user_key: u64 = users.random();
            let h0 = exp1(&mut users);
            let (serving, d0, d1) = grid.two_nearest(u);
            let (r0, r1) = (d0.sqrt(), d1.sqrt());
            let lg0 = setup.model.log_gain(r0)?;
            let lg1 = setup.model.log_gain(r1)?;
            let radius = match setup.cutoff {
                Some(nats) => cutoff_radius(setup.model, lg1 - nats, r1, diagonal)?,
                None => diagonal,
            } * (1.0 + 1e-12);
            // interference normalised by the second-nearest station's gain
            let mut sum = 0.0;
            let mut failure = None;
            grid.for_each_within(u, radius, |s, d2| {
                if s.key == serving.key && s.pos == serving.pos || failure.is_some() {
                    return;
                }
                match setup.model.log_gain(d2.sqrt()) {
                    Ok(lg) => sum += link_fading(user_key, s.key) * (lg - lg1).exp(),
                    Err(e) => failure = Some(e),
                }
            });
            if let Some(e) = failure {
                return Err(e);
            }
            let ln_interference = lg1 + sum.ln();
            let ln_total = match setup.ln_noise {
                Some(n) => log_add_exp(ln_interference, n),
                None => ln_interference,
            };
            let x = h0.ln() + lg0 - ln_total;
            if !x.is_finite() {
                return Err(Error::Simulation(format!("non-finite SIR at serving distance {r0} m")));
            }
            ln_sir.push(x);
            serving_distance.push(r0);
        }
        return Ok(Realization {
            ln_sir,
            serving_distance,
            bs_count: stations.len() as u64,
            redraws: attempt,
        });
    }
    Err(Error::Simulation(format!(
        "realization {index}: fewer than two base stations in {} draws",
        setup.max_attempts
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn grid_neighbours_match_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let pts: Vec<Station> = (0..500)
            .map(|_| Station {
                pos: [rng.random_range(-50.0..50.0), rng.random_range(-50.0..50.0)],
                key: rng.random(),
            })
            .collect();
        let grid = Grid::build(&pts, 50.0, 500.0 / 1e4);
        for _ in 0..200 {
            let u = [rng.random_range(-50.0..50.0), rng.random_range(-50.0..50.0)];
            let mut d: Vec<(f64, Station)> = pts
                .iter()
                .map(|s| ((s.pos[0] - u[0]).powi(2) + (s.pos[1] - u[1]).powi(2), *s))
                .collect();
            d.sort_by(|a, b| a.0.total_cmp(&b.0));
            let (nearest, d0, d1) = grid.two_nearest(u);
            assert_eq!(nearest, d[0].1);
            assert_eq!(d0, d[0].0);
            assert_eq!(d1, d[1].0);
            let mut within = 0;
            grid.for_each_within(u, 17.0, |_, _| within += 1);
            assert_eq!(within, d.iter().filter(|x| x.0 <= 17.0 * 17.0).count());
        }
    }

    #[test]
    fn sparse_grid_still_finds_neighbours() {
        let pts: Vec<Station> = [[-9_000.0, -9_000.0], [9_000.0, 9_000.0], [0.0, 8_000.0]]
            .into_iter()
            .zip(1..)
            .map(|(pos, key)| Station { pos, key })
            .collect();
        let grid = Grid::build(&pts, 10_000.0, 1e-4);
        let (nearest, d0, d1) = grid.two_nearest([0.0, 0.0]);
        assert_eq!(nearest.pos, [0.0, 8_000.0]);
        assert_eq!(d0, 64e6);
        assert_eq!(d1, 2.0 * 81e6);
    }

    #[test]
    fn cutoff_radius_brackets_threshold() {
        let model = PathLossModel::StretchedExp { a: 1.0, alpha: 1.037, beta: 0.5 };
        let lg1 = model.log_gain(20.0).unwrap();
        let r = cutoff_radius(&model, lg1 - 46.0, 20.0, 30_000.0).unwrap();
        let expected = ((46.0 + 1.037 * 20f64.sqrt()) / 1.037f64).powi(2);
        assert!((r - expected).abs() < 1e-6 * expected, "{r} vs {expected}");

        // an upward jump beyond the bracket keeps the far piece in range
        let hybrid = PathLossModel::Hybrid { alpha: 1.037, beta: 0.5, eta: 2.0, r_switch: 350.0 };
        let lg1 = hybrid.log_gain(20.0).unwrap();
        let r = cutoff_radius(&hybrid, lg1 - 10.0, 20.0, 30_000.0).unwrap();
        let far = (-(lg1 - 10.0) / 2.0).exp();
        assert!(far > 350.0 && (r - far).abs() < 1e-6 * far, "{r} vs {far}");
        assert!(hybrid.log_gain(r * 1.001).unwrap() < lg1 - 10.0);
        assert!(hybrid.log_gain(r * 0.999).unwrap() >= lg1 - 10.0);

        // threshold never reached inside the window
        let power = PathLossModel::Power { a: 1.0, eta: 4.0 };
        let lg1 = power.log_gain(20.0).unwrap();
        assert_eq!(cutoff_radius(&power, lg1 - 46.0, 20.0, 30_000.0).unwrap(), 30_000.0);
    }

    fn setup(model: &PathLossModel, lambda: f64, outer_half: f64) -> Setup<'_> {
        Setup {
            model,
            lambda,
            outer_half,
            inner_half: 500.0,
            users: 10,
            seed: 4,
            ln_noise: None,
            cutoff: Some(46.0),
            max_attempts: 10,
        }
    }

    #[test]
    fn smaller_window_sees_a_subset_of_stations() {
        let model = PathLossModel::StretchedExp { a: 1.0, alpha: 1.037, beta: 0.5 };
        let big = drop_stations(&setup(&model, 5e-5, 5_000.0), 3, 0).unwrap();
        let small = drop_stations(&setup(&model, 5e-5, 2_500.0), 3, 0).unwrap();
        let inside: Vec<_> = big
            .iter()
            .filter(|s| s.pos[0].abs() <= 2_500.0 && s.pos[1].abs() <= 2_500.0)
            .copied()
            .collect();
        assert_eq!(small, inside);
        assert!(big.iter().all(|s| s.pos[0].abs() <= 5_000.0 && s.pos[1].abs() <= 5_000.0));
        let expected = 5e-5 * 1e8;
        assert!((big.len() as f64 - expected).abs() < 5.0 * expected.sqrt());
    }

    #[test]
    fn window_size_barely_moves_the_sir() {
        let model = PathLossModel::StretchedExp { a: 1.0, alpha: 1.037, beta: 0.5 };
        let a = run_realization(&setup(&model, 5e-5, 5_000.0), 7).unwrap();
        let b = run_realization(&setup(&model, 5e-5, 2_500.0), 7).unwrap();
        assert_eq!(a.serving_distance, b.serving_distance);
        for (x, y) in a.ln_sir.iter().zip(&b.ln_sir) {
            assert!((x - y).abs() < 1e-9, "{x} vs {y}");
        }
    }

    #[test]
    fn exponential_draws_are_positive_with_unit_mean() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 200_000;
        let mut sum = 0.0;
        for _ in 0..n {
            let h = exp1(&mut rng);
            assert!(h > 0.0 && h.is_finite());
            sum += h;
        }
        assert!((sum / n as f64 - 1.0).abs() < 0.01);
    }

    #[test]
    fn log_add_exp_is_stable() {
        assert!((log_add_exp(1000.0, 1000.0) - (1000.0 + 2f64.ln())).abs() < 1e-12);
        assert!((log_add_exp(-1000.0, 0.0)).abs() < 1e-300);
        assert_eq!(log_add_exp(f64::NEG_INFINITY, 3.0), 3.0);
    }
}
