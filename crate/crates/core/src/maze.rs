//! Top-down gridworld rendered to RGB frames: collect apples, reach the goal,
//! get teleported, repeat until the episode budget runs out.

use std::collections::VecDeque;
use std::path::Path;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::imaging::{Image, Rgb};

pub const RENDER_SIDE: usize = 84;

pub const WALL_COLOR: Rgb = [40, 40, 40];
pub const FLOOR_COLOR: Rgb = [210, 210, 210];
pub const APPLE_COLOR: Rgb = [60, 200, 60];
pub const GOAL_COLOR: Rgb = [255, 60, 60];
pub const AGENT_COLOR: Rgb = [30, 60, 255];

/// Default 7x7 layout: 19 floor cells, 4 apples.
pub const DEFAULT_MAZE: &str = "\
#######
#S..a.#
#.##.##
#a#..G#
#.#.#.#
#..a.a#
#######
";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cell {
    pub x: usize,
    pub y: usize,
}

impl Cell {
    pub const fn new(x: usize, y: usize) -> Self {
        Self { x, y }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Action {
    Up,
    Down,
    Left,
    Right,
}

impl Action {
    pub const ALL: [Action; 4] = [Action::Up, Action::Down, Action::Left, Action::Right];
    pub const COUNT: usize = 4;

    pub fn from_index(i: usize) -> Action {
        Self::ALL[i]
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MazeSpec {
    width: usize,
    height: usize,
    walls: Vec<bool>,
    pub start: Cell,
    pub goal: Cell,
    pub apples: Vec<Cell>,
    pub apple_reward: f64,
    pub goal_reward: f64,
    pub episode_len: usize,
    source: String,
}

impl MazeSpec {
    /// Parses `#` wall, `.` floor, `S` start, `G` goal, `a` apple; one row per line.
    pub fn parse(text: &str, episode_len: usize) -> Result<MazeSpec> {
        let rows: Vec<&str> = text
            .lines()
            .map(|l| l.trim_end())
            .filter(|l| !l.is_empty())
            .collect();
        if rows.is_empty() {
            return Err(Error::Maze("empty maze".into()));
        }
        let width = rows[0].chars().count();
        let height = rows.len();
        let mut walls = Vec::with_capacity(width * height);
        let (mut start, mut goal, mut apples) = (None, None, Vec::new());
        for (y, row) in rows.iter().enumerate() {
            if row.chars().count() != width {
                return Err(Error::Maze(format!(
                    "row {} has {} cells, expected {width}",
                    y + 1,
                    row.chars().count()
                )));
            }
            for (x, ch) in row.chars().enumerate() {
                let cell = Cell::new(x, y);
                walls.push(ch == '#');
                match ch {
                    '#' | '.' => {}
                    'S' if start.is_none() => start = Some(cell),
                    'G' if goal.is_none() => goal = Some(cell),
                    'S' | 'G' => return Err(Error::Maze(format!("duplicate {ch:?} at row {}", y + 1))),
                    'a' => apples.push(cell),
                    other => {
                        return Err(Error::Maze(format!("unknown symbol {other:?} at row {}", y + 1)))
                    }
                }
            }
        }
        let spec = MazeSpec {
            width,
            height,
            walls,
            start: start.ok_or_else(|| Error::Maze("no start cell".into()))?,
            goal: goal.ok_or_else(|| Error::Maze("no goal cell".into()))?,
            apples,
            apple_reward: 1.0,
            goal_reward: 10.0,
            episode_len,
            source: rows.join("\n") + "\n",
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: impl AsRef<Path>, episode_len: usize) -> Result<MazeSpec> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, episode_len)
    }

    pub fn default_maze() -> MazeSpec {
        Self::parse(DEFAULT_MAZE, 500).expect("built-in maze is valid")
    }

    pub fn validate(&self) -> Result<()> {
        if self.episode_len == 0 {
            return Err(Error::Maze("episode_len must be >= 1".into()));
        }
        for (what, cell) in [("start", self.start), ("goal", self.goal)]
            .into_iter()
            .chain(self.apples.iter().map(|&a| ("apple", a)))
        {
            if !self.in_bounds(cell) || self.is_wall(cell) {
                return Err(Error::Maze(format!("{what} at {cell:?} is not a floor cell")));
            }
        }
        if !self.reachable(self.start).contains(&self.goal) {
            return Err(Error::Maze("goal is unreachable from start".into()));
        }
        Ok(())
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// The grid text this spec was parsed from.
    pub fn source(&self) -> &str {
        &self.source
    }

    fn in_bounds(&self, c: Cell) -> bool {
        c.x < self.width && c.y < self.height
    }

    pub fn is_wall(&self, c: Cell) -> bool {
        !self.in_bounds(c) || self.walls[c.y * self.width + c.x]
    }

    pub fn floor_cells(&self) -> Vec<Cell> {
        (0..self.height)
            .flat_map(|y| (0..self.width).map(move |x| Cell::new(x, y)))
            .filter(|&c| !self.is_wall(c))
            .collect()
    }

    fn neighbour(&self, c: Cell, a: Action) -> Cell {
        let target = match a {
            Action::Up if c.y > 0 => Cell::new(c.x, c.y - 1),
            Action::Down => Cell::new(c.x, c.y + 1),
            Action::Left if c.x > 0 => Cell::new(c.x - 1, c.y),
            Action::Right => Cell::new(c.x + 1, c.y),
            _ => c,
        };
        if self.is_wall(target) {
            c
        } else {
            target
        }
    }

    fn reachable(&self, from: Cell) -> Vec<Cell> {
        let mut seen = vec![false; self.width * self.height];
        let mut queue = VecDeque::from([from]);
        seen[from.y * self.width + from.x] = true;
        let mut out = Vec::new();
        while let Some(c) = queue.pop_front() {
            out.push(c);
            for a in Action::ALL {
                let n = self.neighbour(c, a);
                let idx = n.y * self.width + n.x;
                if !seen[idx] {
                    seen[idx] = true;
                    queue.push_back(n);
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnvState {
    pub agent: Cell,
    /// One flag per entry of `MazeSpec::apples`.
    pub apples_present: Vec<bool>,
    pub step_count: usize,
    pub episode_return: f64,
    rng: ChaCha8Rng,
}

impl EnvState {
    pub fn apples_remaining(&self) -> usize {
        self.apples_present.iter().filter(|&&p| p).count()
    }

    pub fn is_done(&self, spec: &MazeSpec) -> bool {
        self.step_count >= spec.episode_len
    }
}

#[derive(Debug, Clone)]
pub struct Step {
    pub reward: f64,
    pub done: bool,
    pub frame: Image,
}

pub fn reset(spec: &MazeSpec, seed: u64) -> (EnvState, Image) {
    let state = EnvState {
        agent: spec.start,
        apples_present: vec![true; spec.apples.len()],
        step_count: 0,
        episode_return: 0.0,
        rng: ChaCha8Rng::seed_from_u64(seed),
    };
    let frame = render(&state, spec);
    (state, frame)
}

pub fn step(spec: &MazeSpec, state: &mut EnvState, action: Action) -> Result<Step> {
    if state.is_done(spec) {
        return Err(Error::EpisodeFinished);
    }
    let next = spec.neighbour(state.agent, action);
    let mut reward = 0.0;
    if next != state.agent {
        state.agent = next;
        if let Some(i) = spec.apples.iter().position(|&a| a == next) {
            if state.apples_present[i] {
                state.apples_present[i] = false;
                reward += spec.apple_reward;
            }
        }
        if next == spec.goal {
            reward += spec.goal_reward;
            state.agent = teleport_target(spec, state);
        }
    }
    state.step_count += 1;
    state.episode_return += reward;
    Ok(Step {
        reward,
        done: state.is_done(spec),
        frame: render(state, spec),
    })
}

/// Uniform over floor cells that hold neither the goal nor an uneaten apple.
fn teleport_target(spec: &MazeSpec, state: &mut EnvState) -> Cell {
    let candidates: Vec<Cell> = spec
        .floor_cells()
        .into_iter()
        .filter(|&c| c != spec.goal)
        .filter(|&c| {
            !spec
                .apples
                .iter()
                .zip(&state.apples_present)
                .any(|(&a, &present)| present && a == c)
        })
        .collect();
    if candidates.is_empty() {
        return spec.start;
    }
    candidates[state.rng.random_range(0..candidates.len())]
}

/// Top-down render: walls fill their cell; apples, goal and agent are inset blocks on the floor.
pub fn render(state: &EnvState, spec: &MazeSpec) -> Image {
    let cell_px = RENDER_SIDE / spec.width.max(spec.height);
    let cell_px = cell_px.max(1);
    let off_x = (RENDER_SIDE - (cell_px * spec.width).min(RENDER_SIDE)) / 2;
    let off_y = (RENDER_SIDE - (cell_px * spec.height).min(RENDER_SIDE)) / 2;
    let inset = cell_px / 6;
    let mut img = Image::filled(RENDER_SIDE, RENDER_SIDE, WALL_COLOR).expect("non-empty raster");

    let mut block = |c: Cell, margin: usize, color: Rgb| {
        let x0 = off_x + c.x * cell_px + margin;
        let y0 = off_y + c.y * cell_px + margin;
        let side = cell_px - 2 * margin;
        for y in y0..(y0 + side).min(RENDER_SIDE) {
            for x in x0..(x0 + side).min(RENDER_SIDE) {
                img.set_rgb(x, y, color);
            }
        }
    };
    for c in spec.floor_cells() {
        block(c, 0, FLOOR_COLOR);
    }
    for (&a, _) in spec.apples.iter().zip(&state.apples_present).filter(|(_, &p)| p) {
        block(a, inset, APPLE_COLOR);
    }
    block(spec.goal, inset, GOAL_COLOR);
    block(state.agent, inset, AGENT_COLOR);
    img
}
