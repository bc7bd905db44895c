"""Tree-based hierarchical graph over stay-point clusterings.

Level 0 is the coarsest clustering. Every level also carries a directed
transition graph built from each user's time-consecutive stay points.
"""
from collections import Counter
from dataclasses import dataclass, field

from ..geo import DEFAULT_GEO
from .hits import visit_matrix
from .optics import NOISE, OpticsParams, cluster_labels, optics_order, summarize_clusters


@dataclass(frozen=True)
class Edge:
    source: int
    target: int
    support: int
    users: frozenset


@dataclass(frozen=True, eq=False)
class TbhgLevel:
    eps_prime_m: float
    labels: tuple
    clusters: tuple
    edges: dict  # (source, target) -> Edge
    parents: dict = field(default_factory=dict)  # child id -> parent id on the level above
    runs: dict = field(default_factory=dict)  # user -> tuple of cluster-id runs

    def cluster(self, cluster_id):
        for c in self.clusters:
            if c.cluster_id == cluster_id:
                return c
        raise KeyError(cluster_id)

    def successors(self, cluster_id):
        return sorted(t for (s, t) in self.edges if s == cluster_id)


@dataclass(frozen=True, eq=False)
class Tbhg:
    stay_points: tuple
    levels: tuple
    ordering: object = None

    def visit_matrix(self, level=-1, binary=False):
        lv = self.levels[level]
        ids = [c.cluster_id for c in lv.clusters]
        return visit_matrix(self.stay_points, lv.labels, ids, binary=binary)


def user_sequences(stay_points):
    """Indices of each user's stay points in arrival order."""
    seqs = {}
    for k, s in enumerate(stay_points):
        seqs.setdefault(str(s.user_id), []).append(k)
    for ks in seqs.values():
        ks.sort(key=lambda k: (stay_points[k].arrival, k))
    return dict(sorted(seqs.items()))


def transition_runs(seq, labels):
    """Split one user's label sequence into runs of clusters.

    Noise breaks a run, and repeated visits to the same cluster collapse,
    so consecutive entries of a run are exactly the user's transitions.
    """
    runs, cur = [], []
    for k in seq:
        lab = int(labels[k])
        if lab == NOISE:
            if len(cur) > 1:
                runs.append(tuple(cur))
            cur = []
        elif not cur or cur[-1] != lab:
            cur.append(lab)
    if len(cur) > 1:
        runs.append(tuple(cur))
    return tuple(runs)


def transition_graph(stay_points, labels):
    seqs = user_sequences(stay_points)
    support = Counter()
    users = {}
    runs = {}
    for user, seq in seqs.items():
        runs[user] = transition_runs(seq, labels)
        for a, b in zip(seq, seq[1:]):
            la, lb = int(labels[a]), int(labels[b])
            if la == NOISE or lb == NOISE or la == lb:
                continue
            support[la, lb] += 1
            users.setdefault((la, lb), set()).add(user)
    edges = {key: Edge(key[0], key[1], support[key], frozenset(users[key]))
             for key in sorted(support)}
    return edges, runs


def _parents(child_labels, parent_labels):
    votes = {}
    for c, p in zip(child_labels, parent_labels):
        if c != NOISE and p != NOISE:
            votes.setdefault(int(c), Counter())[int(p)] += 1
    # most members wins; ties go to the lower parent id
    return {c: min(cnt.items(), key=lambda kv: (-kv[1], kv[0]))[0]
            for c, cnt in sorted(votes.items())}


def build_tbhg(stay_points, level_eps_m, optics=OpticsParams(), cfg=DEFAULT_GEO):
    """Cluster ``stay_points`` at each eps' in ``level_eps_m`` (coarse first).

    One OPTICS ordering serves every level; eps' values must strictly
    decrease and none may exceed ``optics.eps_m``.
    """
    stay_points = tuple(stay_points)
    level_eps_m = [float(e) for e in level_eps_m]
    if not level_eps_m:
        raise ValueError("at least one level is required")
    if any(b >= a for a, b in zip(level_eps_m, level_eps_m[1:])):
        raise ValueError(f"level eps' values must strictly decrease: {level_eps_m}")
    if level_eps_m[0] > optics.eps_m:
        raise ValueError(f"coarsest eps' {level_eps_m[0]} exceeds eps {optics.eps_m}")

    if not stay_points:
        empty = tuple(TbhgLevel(e, (), (), {}) for e in level_eps_m)
        return Tbhg((), empty, None)

    ordering = optics_order(stay_points, optics, cfg)
    levels = []
    prev = None
    for eps in level_eps_m:
        labels = tuple(int(x) for x in cluster_labels(ordering, eps))
        clusters = tuple(summarize_clusters(stay_points, labels))
        edges, runs = transition_graph(stay_points, labels)
        parents = _parents(labels, prev) if prev is not None else {}
        levels.append(TbhgLevel(eps, labels, clusters, edges, parents, runs))
        prev = labels
    return Tbhg(stay_points, tuple(levels), ordering)
