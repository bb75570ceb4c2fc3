//! One-round transition kernels of the two urn games.
//!
//! [`build_kernel`] walks the branch tree of a single round (which urn `b0` comes
//! from, its colour, the core replacement or renewal, the bag draw) and sums the
//! path products into the target rows. [`printed_kernel`] is a literal transcription
//! of the printed closed forms and exists only so the two can be diffed.

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::model::{enumerate_states, GameParams, GameState};
use crate::scalar::{ratio, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Game {
    /// Policy 1: a departed core member is replaced by one random spare.
    One,
    /// Policy 2: the whole core is redrawn from the cluster.
    Two,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Adversary {
    /// Red balls are put back when drawn; they never leave.
    Unconstrained,
    /// Red balls obey the same departure rule as white ones.
    Constrained,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct GameVariant {
    pub game: Game,
    pub adversary: Adversary,
}

impl GameVariant {
    pub const GAME1_UNCONSTRAINED: GameVariant = GameVariant { game: Game::One, adversary: Adversary::Unconstrained };
    pub const GAME1_CONSTRAINED: GameVariant = GameVariant { game: Game::One, adversary: Adversary::Constrained };
    pub const GAME2_UNCONSTRAINED: GameVariant = GameVariant { game: Game::Two, adversary: Adversary::Unconstrained };
    pub const GAME2_CONSTRAINED: GameVariant = GameVariant { game: Game::Two, adversary: Adversary::Constrained };

    pub const ALL: [GameVariant; 4] = [
        Self::GAME1_UNCONSTRAINED,
        Self::GAME1_CONSTRAINED,
        Self::GAME2_UNCONSTRAINED,
        Self::GAME2_CONSTRAINED,
    ];

    pub fn new(game: Game, adversary: Adversary) -> Self {
        GameVariant { game, adversary }
    }

    pub fn is_constrained(self) -> bool {
        self.adversary == Adversary::Constrained
    }

    pub fn name(self) -> &'static str {
        match (self.game, self.adversary) {
            (Game::One, Adversary::Unconstrained) => "game1-unconstrained",
            (Game::One, Adversary::Constrained) => "game1-constrained",
            (Game::Two, Adversary::Unconstrained) => "game2-unconstrained",
            (Game::Two, Adversary::Constrained) => "game2-constrained",
        }
    }
}

impl fmt::Display for GameVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GameVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        GameVariant::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| Error::Domain(format!("unknown variant '{s}'")))
    }
}

impl TryFrom<String> for GameVariant {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<GameVariant> for String {
    fn from(v: GameVariant) -> String {
        v.name().to_string()
    }
}

/// Dense one-round kernel over the flat state space.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMatrix<T> {
    matrix: Matrix<T>,
    variant: GameVariant,
    params: GameParams<T>,
}

impl<T: Scalar> TransitionMatrix<T> {
    pub fn from_parts(matrix: Matrix<T>, variant: GameVariant, params: GameParams<T>) -> Result<Self> {
        let n = params.dimension();
        if matrix.rows() != n || matrix.cols() != n {
            return Err(Error::DimensionMismatch { expected: n, found: matrix.rows().max(matrix.cols()) });
        }
        Ok(TransitionMatrix { matrix, variant, params })
    }

    pub fn matrix(&self) -> &Matrix<T> {
        &self.matrix
    }

    pub fn variant(&self) -> GameVariant {
        self.variant
    }

    pub fn params(&self) -> &GameParams<T> {
        &self.params
    }

    pub fn dimension(&self) -> usize {
        self.matrix.rows()
    }

    pub fn prob(&self, from: GameState, to: GameState) -> Result<T> {
        let i = self.params.index(from)?;
        let j = self.params.index(to)?;
        Ok(self.matrix[(i, j)].clone())
    }

    /// `max_i |sum_j P_ij - 1|`.
    pub fn max_row_sum_deviation(&self) -> f64 {
        self.matrix
            .row_sums()
            .into_iter()
            .map(|s| (s - T::one()).abs().to_f64_lossy())
            .fold(0.0, f64::max)
    }

    pub fn entries_in_unit_interval(&self) -> bool {
        self.matrix.entries().all(|(_, _, v)| v >= &T::zero() && v <= &T::one())
    }

    fn successors(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        self.matrix.row(i).iter().enumerate().filter(|(_, v)| !v.is_zero()).map(|(j, _)| j)
    }

    fn reach(&self, start: usize, forward: bool) -> Vec<Option<usize>> {
        let n = self.dimension();
        let mut level = vec![None; n];
        level[start] = Some(0);
        let mut queue = VecDeque::from([start]);
        while let Some(u) = queue.pop_front() {
            let lu = level[u].unwrap();
            let next: Vec<usize> = if forward {
                self.successors(u).collect()
            } else {
                (0..n).filter(|&v| !self.matrix[(v, u)].is_zero()).collect()
            };
            for v in next {
                if level[v].is_none() {
                    level[v] = Some(lu + 1);
                    queue.push_back(v);
                }
            }
        }
        level
    }

    /// Whether the positive-probability support graph is strongly connected.
    pub fn is_irreducible(&self) -> bool {
        self.dimension() > 0
            && self.reach(0, true).iter().all(Option::is_some)
            && self.reach(0, false).iter().all(Option::is_some)
    }

    pub fn has_self_loop(&self) -> bool {
        (0..self.dimension()).any(|i| !self.matrix[(i, i)].is_zero())
    }

    /// Period of an irreducible chain, `None` when the chain is reducible.
    pub fn period(&self) -> Option<usize> {
        if !self.is_irreducible() {
            return None;
        }
        let level = self.reach(0, true);
        let mut g = 0usize;
        for u in 0..self.dimension() {
            let lu = level[u].unwrap();
            for v in self.successors(u) {
                let lv = level[v].unwrap();
                g = num_integer::gcd(g, (lu + 1).abs_diff(lv));
            }
        }
        Some(g)
    }
}

/// Probability of `k` red balls when `c` balls are drawn without replacement from
/// `c + s - 1` balls of which `n` are red. Out-of-support arguments give zero.
pub fn hypergeometric_q<T: Scalar>(k: usize, n: usize, params: &GameParams<T>) -> T {
    let c = params.c();
    let pool = c + params.s() - 1;
    if k > n || k > c || n > pool || c - k > pool - n {
        return T::zero();
    }
    T::binomial(n as u64, k as u64) * T::binomial((pool - n) as u64, (c - k) as u64) / T::binomial(pool as u64, c as u64)
}

/// Stage-2 tail shared by every branch: one bag ball (red with probability `mu`) joins S.
fn bag_into_spare<T: Scalar>(mu: &T, w: T, core_red: usize, spare_red: usize, emit: &mut impl FnMut(T, usize, usize)) {
    emit(w.clone() * mu.clone(), core_red, spare_red + 1);
    emit(w * (T::one() - mu.clone()), core_red, spare_red);
}

/// Stage 2 after `b0` left the core; `core_red` counts the reds among the `c - 1` remaining.
fn core_departure<T: Scalar>(
    game: Game,
    params: &GameParams<T>,
    w: T,
    core_red: usize,
    spare_red: usize,
    emit: &mut impl FnMut(T, usize, usize),
) {
    let (c, s) = (params.c(), params.s());
    let mu = params.mu();
    match game {
        Game::One => {
            // b1 moves from S to C, then S is refilled from the bag.
            if spare_red > 0 {
                bag_into_spare(mu, w.clone() * ratio::<T>(spare_red, s), core_red + 1, spare_red - 1, emit);
            }
            if s > spare_red {
                bag_into_spare(mu, w * ratio::<T>(s - spare_red, s), core_red, spare_red, emit);
            }
        }
        Game::Two => {
            // The c + s - 1 balls left in C ∪ S are reshuffled: c of them form the new core.
            let pool_red = core_red + spare_red;
            for k in 0..=c.min(pool_red) {
                let q: T = hypergeometric_q(k, pool_red, params);
                if !q.is_zero() {
                    bag_into_spare(mu, w.clone() * q, k, pool_red - k, emit);
                }
            }
        }
    }
}

/// Emits `(probability, x', y')` for every leaf of one round started in `(x, y)`.
fn round_branches<T: Scalar>(
    variant: GameVariant,
    params: &GameParams<T>,
    state: GameState,
    emit: &mut impl FnMut(T, usize, usize),
) {
    let (c, s) = (params.c(), params.s());
    let (x, y) = (state.x, state.y);
    let total = c + s;
    let mu = params.mu();
    let unconstrained = variant.adversary == Adversary::Unconstrained;
    let mut sink = |w: T, a: usize, b: usize| {
        if !w.is_zero() {
            emit(w, a, b)
        }
    };

    // b0 is a red core ball.
    if x > 0 {
        let w = ratio::<T>(x, total);
        if unconstrained {
            sink(w, x, y);
        } else {
            core_departure(variant.game, params, w, x - 1, y, &mut sink);
        }
    }
    // b0 is a white core ball.
    if c > x {
        core_departure(variant.game, params, ratio::<T>(c - x, total), x, y, &mut sink);
    }
    // b0 is a red spare ball.
    if y > 0 {
        let w = ratio::<T>(y, total);
        if unconstrained {
            sink(w, x, y);
        } else {
            bag_into_spare(mu, w, x, y - 1, &mut sink);
        }
    }
    // b0 is a white spare ball.
    if s > y {
        bag_into_spare(mu, ratio::<T>(s - y, total), x, y, &mut sink);
    }
}

/// Exact one-round kernel obtained by enumerating the round's branch tree.
pub fn build_kernel<T: Scalar>(variant: GameVariant, params: &GameParams<T>) -> TransitionMatrix<T> {
    let n = params.dimension();
    let stride = params.s() + 1;
    let mut m = Matrix::<T>::zeros(n, n);
    for (i, st) in enumerate_states(params).into_iter().enumerate() {
        let row = m.row_mut(i);
        round_branches(variant, params, st, &mut |w: T, x, y| {
            let j = x * stride + y;
            row[j] = row[j].clone() + w;
        });
    }
    TransitionMatrix { matrix: m, variant, params: params.clone() }
}

fn printed_q<T: Scalar>(u: i64, v: i64, params: &GameParams<T>) -> T {
    if u < 0 || v < 0 || u > v {
        T::zero()
    } else {
        hypergeometric_q(u as usize, v as usize, params)
    }
}

/// Literal transcription of the printed closed-form kernels, including their
/// suspect terms. Not guaranteed to be stochastic.
// Bounds are written as printed (`y <= s - 1`) to ease side-by-side reading.
#[allow(clippy::int_plus_one)]
pub fn printed_kernel<T: Scalar>(variant: GameVariant, params: &GameParams<T>) -> TransitionMatrix<T> {
    let n = params.dimension();
    let (c, s) = (params.c() as i64, params.s() as i64);
    let mu = params.mu().clone();
    let nu = T::one() - mu.clone();
    let int = |v: i64| T::from_i64(v).expect("small integer");
    let frac = |a: i64, b: i64| int(a) / int(b);
    let cs = c + s;
    let mut m = Matrix::<T>::zeros(n, n);

    for (i, st) in enumerate_states(params).into_iter().enumerate() {
        let (x, y) = (st.x as i64, st.y as i64);
        let mut put = |tx: i64, ty: i64, v: T| {
            if (0..=c).contains(&tx) && (0..=s).contains(&ty) {
                let j = (tx * (s + 1) + ty) as usize;
                m[(i, j)] = m[(i, j)].clone() + v;
            }
        };
        let q = |u: i64, v: i64| printed_q(u, v, params);

        match (variant.game, variant.adversary) {
            (Game::One, Adversary::Unconstrained) => {
                put(
                    x,
                    y,
                    frac(c, cs) * (frac(x, c) + frac(c - x, c) * frac(s - y, s) * nu.clone())
                        + frac(s, cs) * (frac(y, s) * mu.clone() + nu.clone()),
                );
                if y <= s - 1 {
                    put(x, y + 1, (frac(c, cs) * frac(c - x, c) + frac(s, cs)) * frac(s - y, s) * mu.clone());
                }
                if x <= c - 1 && y >= 1 {
                    put(x + 1, y - 1, frac(c, cs) * frac(c - x, c) * frac(y, s) * nu.clone());
                }
                if x <= c - 1 {
                    put(x + 1, y, frac(c, cs) * frac(c - x, c) * frac(y, s) * mu.clone());
                }
            }
            (Game::Two, Adversary::Unconstrained) => {
                put(
                    x,
                    y,
                    frac(c, cs) * (frac(x, c) * mu.clone() * q(x, x + y - 1) + frac(c - x, c) * nu.clone() * q(x, x + y))
                        + frac(s, cs) * (frac(s - y, s) * nu.clone() + frac(y, s) * mu.clone()),
                );
                if y <= s - 1 {
                    put(
                        x,
                        y + 1,
                        frac(c, cs) * frac(x, c) * mu.clone() * q(x, x + y) + frac(s, cs) * (frac(s - x, c) * mu.clone()),
                    );
                }
                if y >= 1 {
                    put(
                        x,
                        y - 1,
                        frac(c, cs) * frac(x, c) * nu.clone() * q(x, x + y - 1)
                            + frac(s, cs) * (frac(s - x, c) * mu.clone()),
                    );
                }
                for k in 0.max(x + y - s)..=c.min(x + y) {
                    if k != x {
                        put(k, x + y - k, frac(c, cs) * frac(c - x, c) * nu.clone() * q(k, x + y));
                    }
                }
                for k in 0.max(x + y + 1 - s)..=c.min(x + y + 1) {
                    if k != x {
                        put(k, x + y - k + 1, frac(c, cs) * frac(c - x, c) * mu.clone() * q(k, x + y));
                    }
                }
            }
            (Game::One, Adversary::Constrained) => {
                let css = cs * s;
                put(
                    x,
                    y,
                    (int(x * y) + int(c * (s - y) - x * s) * nu.clone()) / int(css)
                        + (int(y) * mu.clone() + int(s - y) * nu.clone()) / int(cs),
                );
                if y >= 1 {
                    put(x, y - 1, frac((x + s) * y, css) * nu.clone());
                }
                if y <= s - 1 {
                    put(x, y + 1, frac(c - x + s, cs) * frac(s - y, s) * mu.clone());
                }
                if x <= c - 1 && y >= 1 {
                    put(x + 1, y - 1, frac((c - x) * y, css) * nu.clone());
                }
                if x <= c - 1 {
                    put(x + 1, y, frac((c - x) * y, css) * mu.clone());
                }
                if x >= 1 {
                    put(x - 1, y, frac(x * (s - y), css) * nu.clone());
                }
                if x >= 1 && y <= s - 1 {
                    put(x - 1, y + 1, frac(x * (s - y), css) * mu.clone());
                }
            }
            (Game::Two, Adversary::Constrained) => {
                put(
                    x,
                    y,
                    (int(x) * q(x, x + y - 1) * mu.clone() + int(c - x) * q(x, x + y) * nu.clone()) / int(cs)
                        + (int(y) * mu.clone() + int(s - y) * nu.clone()) / int(cs),
                );
                if y >= 1 {
                    put(x, y - 1, frac(x, cs) * q(x, x + y - 1) * nu.clone() + frac(y, cs) * nu.clone());
                }
                if y <= s - 1 {
                    put(x, y + 1, frac(c - x, cs) * q(x, x + y) * mu.clone() + frac(s - y, cs) * mu.clone());
                }
                for k in 0.max(x + y - 1 - s)..=c.min(x + y - 1) {
                    if k != x {
                        put(k, x + y - k - 1, frac(x, cs) * q(k, x + y - 1) * nu.clone());
                    }
                }
                for k in 0.max(x + y - s)..=c.min(x + y - 1) {
                    if k != x {
                        put(
                            k,
                            x + y - k,
                            frac(x, cs) * q(k, x + y - 1) * mu.clone() + frac(c - x, cs) * q(k, x + y) * nu.clone(),
                        );
                    }
                }
                for k in 0.max(x + y + 1 - s)..=c.min(x + y) {
                    if k != x {
                        put(k, x + y - k + 1, frac(c - x, cs) * q(k, x + y) * mu.clone());
                    }
                }
            }
        }
    }
    TransitionMatrix { matrix: m, variant, params: params.clone() }
}

/// One differing entry between two kernels.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntryDiff {
    pub from: GameState,
    pub to: GameState,
    pub a: f64,
    pub b: f64,
}

impl EntryDiff {
    pub fn magnitude(&self) -> f64 {
        (self.a - self.b).abs()
    }
}

/// Entries where `|a - b| > tol`, largest discrepancy first.
pub fn kernel_diff<T: Scalar>(a: &TransitionMatrix<T>, b: &TransitionMatrix<T>, tol: f64) -> Result<Vec<EntryDiff>> {
    if a.params.c() != b.params.c() || a.params.s() != b.params.s() {
        return Err(Error::DimensionMismatch { expected: a.dimension(), found: b.dimension() });
    }
    let mut out = Vec::new();
    for (i, j, va) in a.matrix.entries() {
        let vb = &b.matrix[(i, j)];
        let d = (va.clone() - vb.clone()).abs().to_f64_lossy();
        if d > tol {
            out.push(EntryDiff {
                from: a.params.state(i)?,
                to: a.params.state(j)?,
                a: va.to_f64_lossy(),
                b: vb.to_f64_lossy(),
            });
        }
    }
    out.sort_by(|p, q| q.magnitude().total_cmp(&p.magnitude()).then_with(|| (p.from, p.to).cmp(&(q.from, q.to))));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;
    use proptest::prelude::*;

    fn p(c: usize, s: usize, mu: f64) -> GameParams<f64> {
        GameParams::new(c, s, mu).unwrap()
    }

    fn st(x: usize, y: usize) -> GameState {
        GameState::new(x, y)
    }

    #[test]
    fn variant_names_round_trip() {
        for v in GameVariant::ALL {
            assert_eq!(v.name().parse::<GameVariant>().unwrap(), v);
        }
        assert!("game3".parse::<GameVariant>().is_err());
    }

    #[test]
    fn q_examples() {
        assert_eq!(hypergeometric_q(0, 0, &p(2, 2, 0.5)), 1.0);
        assert!((hypergeometric_q(1, 1, &p(2, 2, 0.5)) - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(hypergeometric_q(2, 1, &p(2, 2, 0.5)), 0.0);
        assert_eq!(hypergeometric_q(0, 3, &p(2, 2, 0.5)), 0.0);
        let pr = p(7, 5, 0.5);
        for n in 0..=11 {
            let total: f64 = (0..=7).map(|k| hypergeometric_q(k, n, &pr)).sum();
            assert!((total - 1.0).abs() < 1e-13, "n={n} total={total}");
        }
    }

    #[test]
    fn game1_unconstrained_from_origin() {
        let k = build_kernel(GameVariant::GAME1_UNCONSTRAINED, &p(2, 1, 0.5));
        assert!((k.prob(st(0, 0), st(0, 0)).unwrap() - 0.5).abs() < 1e-15);
        assert!((k.prob(st(0, 0), st(0, 1)).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn all_red_is_fixed_under_unconstrained() {
        for v in [GameVariant::GAME1_UNCONSTRAINED, GameVariant::GAME2_UNCONSTRAINED] {
            let k = build_kernel(v, &p(4, 3, 0.3));
            assert_eq!(k.prob(st(4, 3), st(4, 3)).unwrap(), 1.0);
        }
    }

    #[test]
    fn s1_games_coincide_exactly() {
        let mu = BigRational::new(1.into(), 2.into());
        for c in 1..6 {
            let pr = GameParams::new(c, 1, mu.clone()).unwrap();
            assert_eq!(
                build_kernel(GameVariant::GAME1_CONSTRAINED, &pr),
                TransitionMatrix { variant: GameVariant::GAME1_CONSTRAINED, ..build_kernel(GameVariant::GAME2_CONSTRAINED, &pr) }
            );
            assert_eq!(
                build_kernel(GameVariant::GAME1_UNCONSTRAINED, &pr).matrix,
                build_kernel(GameVariant::GAME2_UNCONSTRAINED, &pr).matrix
            );
        }
    }

    #[test]
    fn exact_kernels_are_stochastic() {
        let mu = BigRational::new(1.into(), 3.into());
        let pr = GameParams::new(4, 3, mu).unwrap();
        for v in GameVariant::ALL {
            let k = build_kernel(v, &pr);
            assert!(k.matrix.row_sums().iter().all(|s| *s == BigRational::from_integer(1.into())), "{v}");
        }
    }

    #[test]
    fn game1_printed_forms_match_exactly() {
        let mu = BigRational::new(1.into(), 4.into());
        for (c, s) in [(1, 1), (4, 2), (4, 5), (7, 3)] {
            let pr = GameParams::new(c, s, mu.clone()).unwrap();
            for v in [GameVariant::GAME1_UNCONSTRAINED, GameVariant::GAME1_CONSTRAINED] {
                assert_eq!(build_kernel(v, &pr).matrix, printed_kernel(v, &pr).matrix, "{v} c={c} s={s}");
            }
        }
    }

    #[test]
    fn game2_printed_forms_differ() {
        let pr = p(4, 2, 0.25);
        for v in [GameVariant::GAME2_UNCONSTRAINED, GameVariant::GAME2_CONSTRAINED] {
            let d = kernel_diff(&printed_kernel(v, &pr), &build_kernel(v, &pr), 1e-9).unwrap();
            assert!(!d.is_empty(), "{v}");
            assert!(d.windows(2).all(|w| w[0].magnitude() >= w[1].magnitude()));
        }
    }

    #[test]
    fn kernel_diff_examples() {
        let pr = p(2, 2, 0.5);
        let a = build_kernel(GameVariant::GAME1_CONSTRAINED, &pr);
        assert!(kernel_diff(&a, &a, 1e-9).unwrap().is_empty());
        let mut m = a.matrix.clone();
        m[(3, 4)] += 0.1;
        let b = TransitionMatrix::from_parts(m, a.variant, pr).unwrap();
        let d = kernel_diff(&a, &b, 1e-9).unwrap();
        assert_eq!(d.len(), 1);
        assert_eq!((d[0].from, d[0].to), (st(1, 0), st(1, 1)));
        let other = build_kernel(GameVariant::GAME1_CONSTRAINED, &p(3, 2, 0.5));
        assert!(matches!(kernel_diff(&a, &other, 1e-9), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn structural_support_properties() {
        let pr = p(4, 3, 0.25);
        for v in GameVariant::ALL {
            let k = build_kernel(v, &pr);
            if v.is_constrained() {
                assert!(k.is_irreducible(), "{v}");
                assert!(k.has_self_loop());
                assert_eq!(k.period(), Some(1));
            } else {
                assert!(!k.is_irreducible(), "{v}");
                assert_eq!(k.period(), None);
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn rows_are_stochastic(c in 1usize..11, s in 1usize..25, mu in 0.01f64..0.99) {
            let pr = p(c, s, mu);
            for v in GameVariant::ALL {
                let k = build_kernel(v, &pr);
                prop_assert!(k.max_row_sum_deviation() < 1e-12);
                prop_assert!(k.entries_in_unit_interval());
            }
        }

        #[test]
        fn unconstrained_reds_never_decrease(c in 1usize..9, s in 1usize..12, mu in 0.05f64..0.95) {
            let pr = p(c, s, mu);
            let g1 = build_kernel(GameVariant::GAME1_UNCONSTRAINED, &pr);
            let g2 = build_kernel(GameVariant::GAME2_UNCONSTRAINED, &pr);
            for (i, j, v) in g1.matrix.entries() {
                if *v > 0.0 {
                    let (a, b) = (pr.state(i).unwrap(), pr.state(j).unwrap());
                    prop_assert!(b.x >= a.x);
                    prop_assert!(b.x + b.y >= a.x + a.y);
                }
            }
            for (i, j, v) in g2.matrix.entries() {
                if *v > 0.0 {
                    let (a, b) = (pr.state(i).unwrap(), pr.state(j).unwrap());
                    prop_assert!(b.x + b.y >= a.x + a.y);
                }
            }
        }

        #[test]
        fn s1_games_coincide(c in 1usize..12, mu in 0.01f64..0.99) {
            let pr = p(c, 1, mu);
            for (a, b) in [
                (GameVariant::GAME1_UNCONSTRAINED, GameVariant::GAME2_UNCONSTRAINED),
                (GameVariant::GAME1_CONSTRAINED, GameVariant::GAME2_CONSTRAINED),
            ] {
                let d = kernel_diff(&build_kernel(a, &pr), &build_kernel(b, &pr), 1e-12).unwrap();
                prop_assert!(d.is_empty());
            }
        }
    }
}
