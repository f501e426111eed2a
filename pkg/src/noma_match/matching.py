"""Degree-constrained many-to-many user/subchannel matching and swap moves."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator

import numpy as np

from .config import ScenarioConfig


class MatchingError(ValueError):
    pass


class InvalidSwapError(ValueError):
    pass


@dataclass(frozen=True)
class Matching:
    """Immutable matching Psi between users and subchannels.

    Both directions are stored and kept mutually consistent; ``d_v`` bounds
    each user's subchannel set and ``d_f`` each subchannel's user set.
    Construct with :meth:`from_pairs` or :meth:`from_array` rather than
    filling the tuples by hand.
    """

    n_users: int
    n_subchannels: int
    d_v: int
    d_f: int
    user_to_subs: tuple[frozenset[int], ...]
    sub_to_users: tuple[frozenset[int], ...]

    def __post_init__(self) -> None:
        if len(self.user_to_subs) != self.n_users:
            raise MatchingError("user_to_subs length differs from n_users")
        if len(self.sub_to_users) != self.n_subchannels:
            raise MatchingError("sub_to_users length differs from n_subchannels")
        links = 0
        for j, subs in enumerate(self.user_to_subs):
            if len(subs) > self.d_v:
                raise MatchingError(f"user {j} holds {len(subs)} subchannels > d_v={self.d_v}")
            for k in subs:
                if not 0 <= k < self.n_subchannels or j not in self.sub_to_users[k]:
                    raise MatchingError(f"pair (sub {k}, user {j}) is not mirrored")
            links += len(subs)
        for k, users in enumerate(self.sub_to_users):
            if len(users) > self.d_f:
                raise MatchingError(f"subchannel {k} carries {len(users)} users > d_f={self.d_f}")
            links -= len(users)
        if links != 0:
            raise MatchingError("user and subchannel views disagree")

    @classmethod
    def from_pairs(
        cls,
        pairs: Iterable[tuple[int, int]],
        n_users: int,
        n_subchannels: int,
        d_v: int,
        d_f: int,
    ) -> Matching:
        """Build from ``(subchannel, user)`` pairs."""
        user_to_subs: list[set[int]] = [set() for _ in range(n_users)]
        sub_to_users: list[set[int]] = [set() for _ in range(n_subchannels)]
        for k, j in pairs:
            if not (0 <= k < n_subchannels and 0 <= j < n_users):
                raise MatchingError(f"pair (sub {k}, user {j}) out of range")
            user_to_subs[j].add(k)
            sub_to_users[k].add(j)
        return cls(
            n_users,
            n_subchannels,
            d_v,
            d_f,
            tuple(frozenset(s) for s in user_to_subs),
            tuple(frozenset(s) for s in sub_to_users),
        )

    @classmethod
    def from_array(cls, f: np.ndarray, d_v: int, d_f: int) -> Matching:
        """Build from a binary K x N assignment matrix F."""
        f = np.asarray(f)
        ks, js = np.nonzero(f)
        return cls.from_pairs(zip(ks.tolist(), js.tolist()), f.shape[1], f.shape[0], d_v, d_f)

    @classmethod
    def empty(cls, cfg: ScenarioConfig) -> Matching:
        return cls.from_pairs((), cfg.n_users, cfg.n_subchannels, cfg.d_v, cfg.d_f)

    def to_array(self) -> np.ndarray:
        f = np.zeros((self.n_subchannels, self.n_users), dtype=np.int8)
        for k, j in self.pairs():
            f[k, j] = 1
        return f

    def pairs(self) -> list[tuple[int, int]]:
        """Sorted ``(subchannel, user)`` pairs."""
        return sorted((k, j) for k, users in enumerate(self.sub_to_users) for j in users)

    def user_degrees(self) -> list[int]:
        return [len(s) for s in self.user_to_subs]

    def sub_degrees(self) -> list[int]:
        return [len(u) for u in self.sub_to_users]

    @property
    def n_links(self) -> int:
        return sum(self.user_degrees())

    def is_matched(self, k: int, j: int) -> bool:
        return k in self.user_to_subs[j]


@dataclass(frozen=True)
class SwapSpec:
    """User ``user_i`` hands ``sub_p`` to ``user_j`` in exchange for ``sub_q``."""

    user_i: int
    sub_p: int
    user_j: int
    sub_q: int


def check_swap(m: Matching, s: SwapSpec) -> None:
    if s.user_i == s.user_j:
        raise InvalidSwapError(f"{s}: a user cannot swap with itself")
    if s.sub_p == s.sub_q:
        raise InvalidSwapError(f"{s}: the two subchannels must differ")
    for user in (s.user_i, s.user_j):
        if not 0 <= user < m.n_users:
            raise InvalidSwapError(f"{s}: user {user} out of range")
    if s.sub_p not in m.user_to_subs[s.user_i]:
        raise InvalidSwapError(f"{s}: user {s.user_i} does not hold subchannel {s.sub_p}")
    if s.sub_q not in m.user_to_subs[s.user_j]:
        raise InvalidSwapError(f"{s}: user {s.user_j} does not hold subchannel {s.sub_q}")
    if s.sub_q in m.user_to_subs[s.user_i] or s.sub_p in m.user_to_subs[s.user_j]:
        raise InvalidSwapError(f"{s}: the swap would duplicate an assignment")


def apply_swap(m: Matching, s: SwapSpec) -> Matching:
    """Exchange ``sub_p`` and ``sub_q`` between ``user_i`` and ``user_j``.

    Degrees are preserved, so the result satisfies both caps whenever ``m``
    does. The mirrored state (``user_i`` on ``sub_q``, ``user_j`` on
    ``sub_p``) is also accepted and swapped back, which makes applying the
    same spec twice the identity.
    """
    i, p, j, q = s.user_i, s.sub_p, s.user_j, s.sub_q
    if (
        0 <= i < m.n_users
        and 0 <= j < m.n_users
        and q in m.user_to_subs[i]
        and p in m.user_to_subs[j]
        and p not in m.user_to_subs[i]
        and q not in m.user_to_subs[j]
    ):
        p, q = q, p
    else:
        check_swap(m, s)
    user_to_subs = list(m.user_to_subs)
    sub_to_users = list(m.sub_to_users)
    user_to_subs[i] = (user_to_subs[i] - {p}) | {q}
    user_to_subs[j] = (user_to_subs[j] - {q}) | {p}
    sub_to_users[p] = (sub_to_users[p] - {i}) | {j}
    sub_to_users[q] = (sub_to_users[q] - {j}) | {i}
    return Matching(m.n_users, m.n_subchannels, m.d_v, m.d_f, tuple(user_to_subs), tuple(sub_to_users))


def iter_swap_candidates(m: Matching) -> Iterator[SwapSpec]:
    """Yield each valid swap once, ordered by (user_i, user_j, sub_p, sub_q) with user_i < user_j."""
    holders = [j for j in range(m.n_users) if m.user_to_subs[j]]
    for a, i in enumerate(holders):
        subs_i = m.user_to_subs[i]
        for j in holders[a + 1 :]:
            subs_j = m.user_to_subs[j]
            give = sorted(subs_i - subs_j)
            if not give:
                continue
            take = sorted(subs_j - subs_i)
            for p in give:
                for q in take:
                    yield SwapSpec(i, p, j, q)


def enumerate_swap_candidates(m: Matching) -> list[SwapSpec]:
    return list(iter_swap_candidates(m))


def init_random(cfg: ScenarioConfig, rng: np.random.Generator) -> Matching:
    """Random greedy fill respecting both degree caps.

    Users are visited in a shuffled order; each draws ``min(d_v, open)``
    distinct subchannels uniformly among those that still have room. Late
    users get fewer (possibly zero) subchannels once ``K * d_f`` seats run out.
    """
    load = np.zeros(cfg.n_subchannels, dtype=int)
    pairs = []
    for j in rng.permutation(cfg.n_users).tolist():
        open_subs = np.flatnonzero(load < cfg.d_f)
        take = min(cfg.d_v, open_subs.size)
        if take == 0:
            break
        chosen = rng.choice(open_subs, size=take, replace=False)
        load[chosen] += 1
        pairs.extend((int(k), j) for k in chosen)
    return Matching.from_pairs(pairs, cfg.n_users, cfg.n_subchannels, cfg.d_v, cfg.d_f)
