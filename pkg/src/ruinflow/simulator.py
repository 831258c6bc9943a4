"""Monte Carlo engine for the additive process, used as an independent
check of the analytic solver.

The process is simulated on its embedded jump chain: in state i the
holding time is exponential with rate c(i) = -C_ii, the level moves
linearly with slope v(i), and the next event is drawn from the combined
categorical over no-jump transitions (C) and jump transitions (D) with
a mixture draw for the jump size.

Replication batches are seeded as ``default_rng([seed, batch])`` so any
batch can be reproduced in isolation.  Upward-hitting runs are
truncated once the level falls so far below the target that the
remaining hit probability (bounded by the exponential decay estimate)
drops below ``eps``; the truncation bias bound is reported.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import beta as _beta_dist

from .errors import DriftNonNegative, HasJumps, NoConvergence
from .model import MapModel

__all__ = [
    "Estimate",
    "PathEvent",
    "HitSample",
    "Estimator",
    "simulate_path",
    "estimate_hitting",
    "estimate_ladder",
    "check_duality_nojump",
    "estimate_fluid_tail",
]

BATCH = 200_000
MAX_EVENTS = 1_000_000


@dataclass(frozen=True)
class PathEvent:
    time: float
    state_before: int
    state_after: int
    jump_size: float
    level_after: float


@dataclass(frozen=True)
class Estimate:
    value: float
    stderr: float
    nreps: int
    successes: int | None = None
    confidence: float = 0.95

    def interval(self, confidence: float | None = None) -> tuple[float, float]:
        """Exact (Clopper-Pearson) interval when the estimand is a
        probability, otherwise the normal interval."""
        if confidence is None:
            confidence = self.confidence
        if self.successes is not None:
            a = 1.0 - confidence
            k, n = self.successes, self.nreps
            lo = 0.0 if k == 0 else float(_beta_dist.ppf(a / 2, k, n - k + 1))
            hi = 1.0 if k == n else float(_beta_dist.ppf(1 - a / 2, k + 1, n - k))
            return lo, hi
        from scipy.stats import norm

        z = float(norm.ppf(0.5 + confidence / 2))
        return self.value - z * self.stderr, self.value + z * self.stderr


def _proportion(successes: int, n: int) -> Estimate:
    p = successes / n
    return Estimate(value=p, stderr=math.sqrt(p * (1.0 - p) / n), nreps=n,
                    successes=successes)


@dataclass(frozen=True)
class HitSample:
    """Raw outcome of upward-hitting replications from one start state."""

    hit_state: np.ndarray   # end state, -1 when truncated as never-hit
    overshoot: np.ndarray   # level overrun at the hit (0 for a continuous hit)
    continuous: np.ndarray  # True when the level crossed while climbing
    eps: float              # truncation bias bound per replication

    @property
    def nreps(self) -> int:
        return self.hit_state.size

    def prob(self, state: int | None = None) -> Estimate:
        if state is None:
            k = int(np.sum(self.hit_state >= 0))
        else:
            k = int(np.sum(self.hit_state == state))
        return _proportion(k, self.nreps)

    def sub_cdf(self, state: int, x: float) -> float:
        """Empirical P(end state = state, overshoot <= x)."""
        return float(
            np.sum((self.hit_state == state) & (self.overshoot <= x)) / self.nreps
        )


class Estimator:
    """Simulation facade bound to one model."""

    def __init__(self, model: MapModel, seed: int = 0):
        self.model = model
        self.seed = int(seed)
        self._build_tables()

    def _build_tables(self):
        m = self.model
        self._c = m.c
        self._v = m.v
        self._pi = m.stationary_dist()
        self._mixtures = []
        targets, mixids, cums = [], [], []
        for i in range(m.n):
            probs, tgt, mix = [], [], []
            for j in range(m.n):
                if j != i and m.C[i, j] > 0:
                    probs.append(m.C[i, j])
                    tgt.append(j)
                    mix.append(-1)
                if m.D[i, j] > 0:
                    probs.append(m.D[i, j])
                    tgt.append(j)
                    mix.append(len(self._mixtures))
                    self._mixtures.append(m.F[(i, j)])
            cums.append(np.cumsum(np.asarray(probs) / self._c[i]))
            targets.append(np.asarray(tgt, dtype=np.int64))
            mixids.append(np.asarray(mix, dtype=np.int64))
        self._cums, self._targets, self._mixids = cums, targets, mixids

    def _rng(self, batch: int) -> np.random.Generator:
        return np.random.default_rng([self.seed, batch])

    # -- elementary vectorized steps ------------------------------------------------

    def _transition(self, rng, s, y):
        """One embedded-chain transition for every replication in (s, y)."""
        u = rng.random(s.size)
        j = np.empty_like(s)
        jump = np.zeros(y.size)
        for i in np.unique(s):
            mask = s == i
            idx = np.searchsorted(self._cums[i], u[mask])
            idx = np.minimum(idx, self._cums[i].size - 1)
            j[mask] = self._targets[i][idx]
            mix = self._mixids[i][idx]
            if np.any(mix >= 0):
                sub = np.zeros(idx.size)
                for mi in np.unique(mix[mix >= 0]):
                    mm = mix == mi
                    sub[mm] = self._mixtures[mi].sample(rng, int(mm.sum()))
                jump[mask] = sub
        return j, jump

    def _hit_batch(self, rng, start: int, level: float, cutoff: float, n: int,
                   eps: float) -> HitSample:
        s = np.full(n, start, dtype=np.int64)
        y = np.zeros(n)
        hit_state = np.full(n, -1, dtype=np.int64)
        overshoot = np.zeros(n)
        continuous = np.zeros(n, dtype=bool)
        active = np.ones(n, dtype=bool)
        if self._v[start] > 0 and level <= 0.0:
            hit_state[:] = start
            continuous[:] = True
            active[:] = False
        for _ in range(MAX_EVENTS):
            if not active.any():
                break
            idx = np.flatnonzero(active)
            si, yi = s[idx], y[idx]
            hold = rng.exponential(1.0, size=idx.size) / self._c[si]
            vi = self._v[si]
            up = vi > 0
            cross = up & (yi + vi * hold >= level)
            ci = idx[cross]
            hit_state[ci] = s[ci]
            continuous[ci] = True
            active[ci] = False
            keep = ~cross
            idx = idx[keep]
            if idx.size == 0:
                continue
            y[idx] = y[idx] + self._v[s[idx]] * hold[keep]
            below = idx[y[idx] < cutoff]
            active[below] = False
            idx = idx[y[idx] >= cutoff]
            if idx.size == 0:
                continue
            j, jump = self._transition(rng, s[idx], y[idx])
            y[idx] = y[idx] + jump
            s[idx] = j
            over = idx[y[idx] >= level]
            hit_state[over] = s[over]
            overshoot[over] = y[over] - level
            active[over] = False
        else:
            raise NoConvergence("hit simulation exceeded the event budget")
        return HitSample(hit_state=hit_state, overshoot=overshoot,
                         continuous=continuous, eps=eps)

    def _cutoff(self, level: float, eps: float) -> float:
        from .spectral import decay_rate

        if self.model.mean_drift() >= 0:
            raise DriftNonNegative("truncated hitting runs need a negative drift")
        alpha = decay_rate(self.model)
        return level - math.log(1.0 / eps) / alpha

    # -- public estimators ------------------------------------------------------------

    def hit_sample(self, level: float, start: int, reps: int,
                   eps: float = 1e-6) -> HitSample:
        """Upward-hitting outcomes of level ``level`` from (0, start)."""
        cutoff = self._cutoff(level, eps)
        parts = []
        batch = 0
        left = reps
        while left > 0:
            nb = min(left, BATCH)
            parts.append(self._hit_batch(self._rng(batch), start, level, cutoff,
                                         nb, eps))
            left -= nb
            batch += 1
        return HitSample(
            hit_state=np.concatenate([p.hit_state for p in parts]),
            overshoot=np.concatenate([p.overshoot for p in parts]),
            continuous=np.concatenate([p.continuous for p in parts]),
            eps=eps,
        )

    def estimate_hitting(self, level: float, start: int, reps: int,
                         eps: float = 1e-6) -> dict:
        """Point estimates of P(hit level, end state = j | start) and the total."""
        sample = self.hit_sample(level, start, reps, eps)
        by_state = {j: sample.prob(j) for j in range(self.model.n)}
        return {"by_state": by_state, "total": sample.prob(), "eps": eps,
                "sample": sample}

    def ladder_sample(self, start: int, reps: int, eps: float = 1e-6) -> HitSample:
        """First up-crossing of the start level from a down-drift state:
        end state and overshoot, i.e. draws of the ladder height."""
        return self.hit_sample(0.0, start, reps, eps)

    def descent_sample(self, start: int, reps: int) -> np.ndarray:
        """End states of the first down-crossing of the start level.

        Defined for jump-free models (skip-free in both directions)."""
        if self.model.F:
            raise HasJumps("down-crossing sampling is jump-free only")
        out = np.empty(reps, dtype=np.int64)
        done = 0
        batch = 10 ** 6  # large: batches are cheap without jumps
        bi = 0
        while done < reps:
            nb = min(reps - done, batch)
            rng = self._rng(bi)
            s = np.full(nb, start, dtype=np.int64)
            y = np.zeros(nb)
            active = np.ones(nb, dtype=bool)
            end = np.full(nb, -1, dtype=np.int64)
            for _ in range(MAX_EVENTS):
                if not active.any():
                    break
                idx = np.flatnonzero(active)
                si = s[idx]
                hold = rng.exponential(1.0, size=idx.size) / self._c[si]
                vi = self._v[si]
                down = vi < 0
                cross = down & (y[idx] + vi * hold <= 0.0)
                ci = idx[cross]
                end[ci] = s[ci]
                active[ci] = False
                idx = idx[~cross]
                if idx.size == 0:
                    continue
                y[idx] = y[idx] + self._v[s[idx]] * hold[~cross]
                j, _ = self._transition(rng, s[idx], y[idx])
                s[idx] = j
            else:
                raise NoConvergence("descent simulation exceeded the event budget")
            out[done:done + nb] = end
            done += nb
            bi += 1
        return out

    def estimate_fluid_tail(self, x: float, horizon: float, reps: int) -> dict:
        """P(V > x, M = i) for the stationary reflected level
        V(T) = Y(T) - inf_{u <= T} Y(u) at T = horizon, background chain
        started from its stationary law.  The finite-horizon bias is
        downward and bounded by the reported exponential envelope."""
        from .spectral import decay_rate

        if self.model.mean_drift() >= 0:
            raise DriftNonNegative("the reflected level needs a negative drift")
        counts = np.zeros(self.model.n, dtype=np.int64)
        done = 0
        bi = 0
        while done < reps:
            nb = min(reps - done, BATCH)
            rng = self._rng(bi)
            s = rng.choice(self.model.n, size=nb, p=self._pi)
            t = np.zeros(nb)
            y = np.zeros(nb)
            ymin = np.zeros(nb)
            alive = np.ones(nb, dtype=bool)
            for _ in range(MAX_EVENTS):
                if not alive.any():
                    break
                idx = np.flatnonzero(alive)
                si = s[idx]
                hold = rng.exponential(1.0, size=idx.size) / self._c[si]
                t_new = t[idx] + hold
                ends = t_new >= horizon
                dt = np.where(ends, horizon - t[idx], hold)
                y[idx] = y[idx] + self._v[si] * dt
                ymin[idx] = np.minimum(ymin[idx], y[idx])
                t[idx] = np.where(ends, horizon, t_new)
                alive[idx[ends]] = False
                mov = idx[~ends]
                if mov.size == 0:
                    continue
                j, jump = self._transition(rng, s[mov], y[mov])
                y[mov] = y[mov] + jump
                s[mov] = j
            else:
                raise NoConvergence("stationary simulation exceeded the event budget")
            v_refl = y - ymin
            for i in range(self.model.n):
                counts[i] += int(np.sum((v_refl > x) & (s == i)))
            done += nb
            bi += 1
        by_state = {i: _proportion(int(counts[i]), reps) for i in range(self.model.n)}
        total = _proportion(int(counts.sum()), reps)
        # coarse large-deviations envelope for the missing horizon mass
        alpha = decay_rate(self.model)
        drift = self.model.mean_drift()
        bias_bound = min(1.0, math.exp(alpha * (x + drift * horizon)))
        return {"by_state": by_state, "total": total, "bias_bound": bias_bound}

    def check_duality_nojump(self, reps: int) -> dict:
        """Path-reversal identity for jump-free models: for i with v(i) < 0
        and k with v(k) > 0,

            -v(i) pi(i) P(first up-crossing ends in k | start i)
          =  v(k) pi(k) P~(first down-crossing ends in i | start k)

        with the right side simulated under the time-reversed model.
        Returns both sides with z-scores."""
        if self.model.F:
            raise HasJumps("the reversal identity check is jump-free only")
        part = self.model.partition
        dual = self.model.dual()
        dual_sim = Estimator(dual, seed=self.seed + 1)
        rows = []
        a_minus = float(np.sum(-self._v[list(part.minus)] * self._pi[list(part.minus)]))
        a_plus = float(np.sum(self._v[list(part.plus)] * self._pi[list(part.plus)]))
        hit_weighted = 0.0
        hit_weighted_var = 0.0
        for i in part.minus:
            up = self.ladder_sample(i, reps)
            w = -self._v[i] * self._pi[i] / a_minus
            tot = up.prob()
            hit_weighted += w * tot.value
            hit_weighted_var += (w * tot.stderr) ** 2
            for k in part.plus:
                lhs = up.prob(k)
                down = dual_sim.descent_sample(k, reps)
                q = _proportion(int(np.sum(down == i)), reps)
                lval = -self._v[i] * self._pi[i] * lhs.value
                lse = -self._v[i] * self._pi[i] * lhs.stderr
                rval = self._v[k] * self._pi[k] * q.value
                rse = self._v[k] * self._pi[k] * q.stderr
                z = (lval - rval) / math.hypot(lse, rse) if lse + rse > 0 else 0.0
                rows.append({"i": i, "k": k, "lhs": lval, "rhs": rval, "z": z})
        # the level-crossing-weighted hit probability equals a+/a-
        ratio = a_plus / a_minus
        se = math.sqrt(hit_weighted_var)
        z_ratio = (hit_weighted - ratio) / se if se > 0 else 0.0
        return {
            "pairs": rows,
            "hit_ratio": {"estimate": hit_weighted, "exact": ratio, "z": z_ratio},
        }


def simulate_path(model: MapModel, horizon: float, seed: int = 0,
                  start: int | None = None) -> list[PathEvent]:
    """Single trajectory up to ``horizon``: one PathEvent per transition
    epoch of the embedded jump chain (levels evaluated just after any jump)."""
    rng = np.random.default_rng([int(seed), 0])
    sim = Estimator(model, seed=int(seed))
    s = int(start) if start is not None else int(rng.choice(model.n, p=sim._pi))
    t, y = 0.0, 0.0
    events: list[PathEvent] = []
    while True:
        hold = rng.exponential(1.0 / sim._c[s])
        if t + hold >= horizon:
            break
        t += hold
        y += sim._v[s] * hold
        j, jump = sim._transition(rng, np.array([s]), np.array([y]))
        y += float(jump[0])
        events.append(PathEvent(time=t, state_before=s, state_after=int(j[0]),
                                jump_size=float(jump[0]), level_after=y))
        s = int(j[0])
    return events


# -- module-level convenience wrappers -------------------------------------------------


def estimate_hitting(model: MapModel, x: float, start: int, nreps: int,
                     seed: int = 0, eps: float = 1e-6) -> dict:
    """P(hit level x, end state = j | start at (0, start)) by simulation."""
    return Estimator(model, seed=seed).estimate_hitting(x, start, nreps, eps)


def estimate_ladder(model: MapModel, start: int, nreps: int, seed: int = 0,
                    eps: float = 1e-6) -> HitSample:
    """Draws of the first up-crossing pair (end state, overshoot)."""
    return Estimator(model, seed=seed).ladder_sample(start, nreps, eps)


def check_duality_nojump(model: MapModel, nreps: int, seed: int = 0) -> dict:
    """Path-reversal identity report for jump-free models."""
    return Estimator(model, seed=seed).check_duality_nojump(nreps)


def estimate_fluid_tail(model: MapModel, x: float, horizon: float, nreps: int,
                        seed: int = 0) -> dict:
    """Stationary reflected-level tail P(V > x, M = i) by simulation."""
    return Estimator(model, seed=seed).estimate_fluid_tail(x, horizon, nreps)
