"""Classical travel sequence mining over a TBHG level.

A sequence is a simple path through the transition graph. It scores

    (sum of member-cluster authorities) * (sum of hub scores of the users
    who made every transition of the path, consecutively and in order)

This scoring rule is this package's own choice, not a canonical one.
"""
import math
from dataclasses import dataclass


@dataclass(frozen=True)
class TravelSequence:
    clusters: tuple
    score: float
    support: int
    users: tuple


def _occurrences(run, path):
    m = len(path)
    return sum(1 for k in range(len(run) - m + 1) if run[k:k + m] == path)


def score_path(path, runs, authority, hub):
    """Score, support and traversing users of ``path``.

    ``runs`` maps user -> cluster-id runs (see ``transition_runs``);
    ``authority`` maps cluster id -> score and ``hub`` user -> score.
    """
    path = tuple(path)
    support = 0
    users = []
    for user in sorted(runs):
        n = sum(_occurrences(r, path) for r in runs[user])
        if n:
            support += n
            users.append(user)
    if not users:
        return 0.0, 0, ()
    score = (math.fsum(authority[c] for c in path)
             * math.fsum(hub[u] for u in users))
    return score, support, tuple(users)


def simple_paths(edges, max_len):
    """All simple paths with 2..max_len nodes along edges of the graph."""
    succ = {}
    for s, t in edges:
        succ.setdefault(s, []).append(t)
    for s in succ:
        succ[s].sort()
    out = []

    def walk(path):
        if len(path) >= 2:
            out.append(tuple(path))
        if len(path) == max_len:
            return
        for t in succ.get(path[-1], ()):
            if t not in path:
                path.append(t)
                walk(path)
                path.pop()

    for s in sorted(succ):
        walk([s])
    return out


def mine_sequences(level, scores, max_len=3, k=10):
    """Top-``k`` travel sequences of one TBHG level, best first.

    Paths nobody traversed in order score 0 and are dropped. Ties are
    broken by support, then by the cluster-id sequence.
    """
    if max_len < 2:
        raise ValueError("max_len must be at least 2")
    if not level.edges:
        return []
    authority = {c: float(a) for c, a in zip(scores.cluster_ids, scores.authority)}
    hub = {u: float(h) for u, h in zip(scores.users, scores.hub)}
    found = []
    for path in simple_paths(level.edges, max_len):
        score, support, users = score_path(path, level.runs, authority, hub)
        if score > 0:
            found.append(TravelSequence(path, score, support, users))
    found.sort(key=lambda s: (-s.score, -s.support, s.clusters))
    return found[:max(k, 0)]
