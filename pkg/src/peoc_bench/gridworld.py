"""CorridorWorld: a seed-deterministic procedural gridworld.

A 12x6 grid. The agent starts at the bottom-left corner, a coin sits at
the bottom-right corner, and between them the generator places vertical
wall segments (each with a single gap) plus a few hazard cells. Reaching
the coin ends the episode with reward 10; touching a hazard ends it with
reward 0; everything else pays 0. Episodes time out after 200 steps, so
the total return of any episode is either 0 or 10.

All functions here are pure: an episode is fully determined by the level
seed and the action sequence.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from enum import Enum, IntEnum

import numpy as np

from .errors import ParseError, SteppedTerminalState, UnsatisfiableSeed
from .rng import MASK64, SplitMix64

WIDTH = 12
HEIGHT = 6
N_ACTIONS = 4
N_CHANNELS = 4
OBS_DIM = WIDTH * HEIGHT * N_CHANNELS  # 288
MAX_EPISODE_STEPS = 200
COIN_REWARD = 10.0
MAX_RETURN = COIN_REWARD

_MAX_GENERATION_ATTEMPTS = 1000

# Obstacle draw counts: base + (draw mod spread). Walls come in single-gap
# vertical segments; hazards are lethal cells. These counts set the
# exploration difficulty and are calibrated so that PPO at the benchmark's
# training budget converges on a usable fraction of level draws.
_WALLS_BASE = 1
_WALLS_SPREAD = 2
_HAZARDS_BASE = 1
_HAZARDS_SPREAD = 1


class Tile(IntEnum):
    EMPTY = 0
    WALL = 1
    HAZARD = 2
    COIN = 3


class Action(IntEnum):
    LEFT = 0
    RIGHT = 1
    UP = 2
    DOWN = 3


class Outcome(Enum):
    RUNNING = "running"
    COIN_COLLECTED = "coin_collected"
    DEAD = "dead"
    TIMEOUT = "timeout"


# (dx, dy) per action; y grows downward.
_DELTAS = {
    Action.LEFT: (-1, 0),
    Action.RIGHT: (1, 0),
    Action.UP: (0, -1),
    Action.DOWN: (0, 1),
}

_TILE_CHARS = {Tile.EMPTY: ".", Tile.WALL: "#", Tile.HAZARD: "!", Tile.COIN: "C"}
_CHAR_TILES = {v: k for k, v in _TILE_CHARS.items()}


@dataclass(frozen=True, eq=False)
class Level:
    """One generated level. `tiles` is a (HEIGHT, WIDTH) array of Tile codes."""

    seed: int
    tiles: np.ndarray
    start: tuple[int, int]
    coin: tuple[int, int]
    width: int = WIDTH
    height: int = HEIGHT

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Level)
            and self.seed == other.seed
            and self.start == other.start
            and self.coin == other.coin
            and np.array_equal(self.tiles, other.tiles)
        )

    def tile_at(self, x: int, y: int) -> Tile:
        return Tile(self.tiles[y, x])


@dataclass(frozen=True)
class EnvState:
    level: Level
    agent: tuple[int, int]
    steps_taken: int
    outcome: Outcome

    @property
    def terminal(self) -> bool:
        return self.outcome is not Outcome.RUNNING


def _draw_tiles(rng: SplitMix64) -> np.ndarray | None:
    """One generation attempt: walls with single gaps, then hazards.

    Returns None if hazard placement stalls (unreachable with the fixed
    grid parameters; kept so a logic error cannot loop forever).
    """
    tiles = np.zeros((HEIGHT, WIDTH), dtype=np.uint8)

    n_walls = _WALLS_BASE + rng.randrange(_WALLS_SPREAD)
    columns: list[int] = []
    while len(columns) < n_walls:
        col = 2 + rng.randrange(WIDTH - 4)  # x in [2, WIDTH-3]
        if col not in columns:
            columns.append(col)
    for col in columns:
        gap_row = rng.randrange(HEIGHT)
        tiles[:, col] = Tile.WALL
        tiles[gap_row, col] = Tile.EMPTY

    n_hazards = _HAZARDS_BASE + rng.randrange(_HAZARDS_SPREAD)
    placed = 0
    for _ in range(10_000):
        if placed == n_hazards:
            break
        x = 1 + rng.randrange(WIDTH - 2)  # excludes start and coin columns
        y = rng.randrange(HEIGHT)
        if tiles[y, x] == Tile.EMPTY:
            tiles[y, x] = Tile.HAZARD
            placed += 1
    if placed < n_hazards:
        return None
    return tiles


def _solvable(tiles: np.ndarray, start: tuple[int, int], coin: tuple[int, int]) -> bool:
    """BFS over EMPTY cells; the coin cell itself is the goal."""
    seen = np.zeros((HEIGHT, WIDTH), dtype=bool)
    queue = deque([start])
    seen[start[1], start[0]] = True
    while queue:
        x, y = queue.popleft()
        for dx, dy in _DELTAS.values():
            nx, ny = x + dx, y + dy
            if not (0 <= nx < WIDTH and 0 <= ny < HEIGHT) or seen[ny, nx]:
                continue
            if (nx, ny) == coin:
                return True
            if tiles[ny, nx] == Tile.EMPTY:
                seen[ny, nx] = True
                queue.append((nx, ny))
    return False


def generate_level(seed: int) -> Level:
    """Deterministically generate a solvable level from a 64-bit seed.

    Unsolvable draws retry on the same splitmix64 stream, bounded at 1000
    attempts; exhausting the bound raises UnsatisfiableSeed (a generator
    bug for the fixed parameters, not an expected outcome).
    """
    seed &= MASK64
    start = (0, HEIGHT - 1)
    coin = (WIDTH - 1, HEIGHT - 1)
    rng = SplitMix64(seed)
    for _ in range(_MAX_GENERATION_ATTEMPTS):
        tiles = _draw_tiles(rng)
        if tiles is None or not _solvable(tiles, start, coin):
            continue
        tiles[coin[1], coin[0]] = Tile.COIN
        tiles.setflags(write=False)
        return Level(seed=seed, tiles=tiles, start=start, coin=coin)
    raise UnsatisfiableSeed(f"no solvable layout for seed {seed} after "
                            f"{_MAX_GENERATION_ATTEMPTS} attempts")


def observe(state: EnvState) -> np.ndarray:
    """One-hot channel encoding, flat float64 vector of length 288.

    Channel order: WALL, HAZARD, COIN, AGENT; each channel is a row-major
    HEIGHT x WIDTH plane. The coin channel goes dark once collected.
    """
    tiles = state.level.tiles
    planes = np.zeros((N_CHANNELS, HEIGHT, WIDTH))
    planes[0] = tiles == Tile.WALL
    planes[1] = tiles == Tile.HAZARD
    if state.outcome is not Outcome.COIN_COLLECTED:
        planes[2] = tiles == Tile.COIN
    ax, ay = state.agent
    planes[3, ay, ax] = 1.0
    return planes.reshape(-1)


def reset(level: Level) -> tuple[EnvState, np.ndarray]:
    state = EnvState(level=level, agent=level.start, steps_taken=0, outcome=Outcome.RUNNING)
    return state, observe(state)


def step(state: EnvState, action: Action) -> tuple[EnvState, np.ndarray, float, bool]:
    """Advance one step. Returns (next_state, observation, reward, done)."""
    if state.terminal:
        raise SteppedTerminalState(f"episode already ended with {state.outcome}")

    dx, dy = _DELTAS[Action(action)]
    x, y = state.agent
    nx, ny = x + dx, y + dy
    if not (0 <= nx < WIDTH and 0 <= ny < HEIGHT) or state.level.tiles[ny, nx] == Tile.WALL:
        nx, ny = x, y  # blocked moves leave the agent in place

    steps = state.steps_taken + 1
    target = Tile(state.level.tiles[ny, nx])
    reward = 0.0
    if target == Tile.HAZARD:
        outcome = Outcome.DEAD
    elif target == Tile.COIN:
        outcome = Outcome.COIN_COLLECTED
        reward = COIN_REWARD
    elif steps >= MAX_EPISODE_STEPS:
        outcome = Outcome.TIMEOUT
    else:
        outcome = Outcome.RUNNING

    new_state = EnvState(level=state.level, agent=(nx, ny), steps_taken=steps, outcome=outcome)
    return new_state, observe(new_state), reward, new_state.terminal


def level_to_text(level: Level) -> str:
    """Text form: `seed=<u64>` then HEIGHT rows of {. # ! C S} characters."""
    lines = [f"seed={level.seed}"]
    for y in range(level.height):
        row = []
        for x in range(level.width):
            if (x, y) == level.start:
                row.append("S")
            else:
                row.append(_TILE_CHARS[Tile(level.tiles[y, x])])
        lines.append("".join(row))
    return "\n".join(lines) + "\n"


def level_from_text(text: str) -> Level:
    """Parse the `level_to_text` format back into a Level."""
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or not lines[0].startswith("seed="):
        raise ParseError("line 1: expected 'seed=<u64>'")
    try:
        seed = int(lines[0][5:])
    except ValueError as exc:
        raise ParseError(f"line 1: bad seed value {lines[0][5:]!r}") from exc
    rows = lines[1:]
    if len(rows) != HEIGHT:
        raise ParseError(f"expected {HEIGHT} grid rows, got {len(rows)}")

    tiles = np.zeros((HEIGHT, WIDTH), dtype=np.uint8)
    start = coin = None
    for y, row in enumerate(rows):
        if len(row) != WIDTH:
            raise ParseError(f"line {y + 2}: expected {WIDTH} columns, got {len(row)}")
        for x, ch in enumerate(row):
            if ch == "S":
                if start is not None:
                    raise ParseError(f"line {y + 2}: duplicate start cell")
                start = (x, y)
                tiles[y, x] = Tile.EMPTY
            elif ch in _CHAR_TILES:
                tiles[y, x] = _CHAR_TILES[ch]
                if ch == "C":
                    if coin is not None:
                        raise ParseError(f"line {y + 2}: duplicate coin cell")
                    coin = (x, y)
            else:
                raise ParseError(f"line {y + 2}: unknown tile character {ch!r}")
    if start is None or coin is None:
        raise ParseError("level must contain exactly one S and one C cell")
    tiles.setflags(write=False)
    return Level(seed=seed, tiles=tiles, start=start, coin=coin)
