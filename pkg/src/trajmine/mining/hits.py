"""Hub/authority scoring of users and locations by power iteration.

Users are hubs and clusters are authorities; a location is interesting
when experienced users visit it, and a user is experienced when they
visit interesting locations.
"""
from dataclasses import dataclass, replace

import numpy as np


@dataclass(frozen=True, eq=False)
class HitsScores:
    hub: np.ndarray
    authority: np.ndarray
    iterations: int
    residual: float
    users: tuple = ()
    cluster_ids: tuple = ()
    residuals: tuple = ()

    def authority_of(self, cluster_id):
        return float(self.authority[self.cluster_ids.index(cluster_id)])

    def hub_of(self, user_id):
        return float(self.hub[self.users.index(user_id)])


# 2**60 power steps; enough to separate any gap float64 can represent
_MAX_SQUARINGS = 60


def _unit(v):
    norm = np.linalg.norm(v)
    return v / norm if norm > 0 else v


def hits_scores(visits, users=(), cluster_ids=(), tol=1e-9, max_iter=100):
    """Power iteration ``a <- M^T h``, ``h <- M a`` with unit-norm steps.

    ``visits[u, c]`` counts the stay points of user ``u`` in cluster ``c``.
    Stops once both vectors move by less than ``tol`` in max-norm. If
    ``max_iter`` plain steps are not enough, the iteration continues by
    repeated squaring of ``M^T M`` (``iterations`` then counts each
    squaring as one step; ``residuals`` holds the plain steps only).
    """
    M = np.asarray(visits, dtype=float)
    if M.ndim != 2:
        raise ValueError("visit matrix must be 2-D")
    if (M < 0).any():
        raise ValueError("visit counts must be non-negative")
    peak = M.max() if M.size else 0.0
    if not peak > 0:
        raise ValueError("visit matrix has no visits to rank")
    # scale-free: the normalised matrix is the same for any positive multiple
    M = M / peak

    h = _unit(np.ones(M.shape[0]))
    a = _unit(M.T @ h)
    residuals = []
    it = 0
    for it in range(1, max_iter + 1):
        a_new = _unit(M.T @ h)
        h_new = _unit(M @ a_new)
        res = max(np.abs(a_new - a).max(), np.abs(h_new - h).max())
        residuals.append(float(res))
        a, h = a_new, h_new
        if res < tol:
            break
    res = residuals[-1]
    if res >= tol:
        # Slow mixing (second eigenvalue close to the first): carry on with
        # the same sequence, 2**k steps at a time, by squaring M^T M.
        A = M.T @ M
        for _ in range(_MAX_SQUARINGS):
            A = A @ A
            A /= A.max()
            a_new = _unit(A @ a)
            h_new = _unit(M @ a_new)
            res = max(np.abs(a_new - a).max(), np.abs(h_new - h).max())
            a, h = a_new, h_new
            it += 1
            if res < tol:
                break
    return HitsScores(hub=h, authority=a, iterations=it,
                      residual=float(res), users=tuple(users),
                      cluster_ids=tuple(cluster_ids), residuals=tuple(residuals))


def visit_matrix(stay_points, labels, cluster_ids=None, binary=False):
    """Users x clusters visit counts from labelled stay points.

    Returns ``(matrix, users, cluster_ids)``; noise points are ignored.
    """
    labels = [int(x) for x in labels]
    users = sorted({str(s.user_id) for s in stay_points})
    if cluster_ids is None:
        cluster_ids = sorted({lab for lab in labels if lab >= 0})
    row = {u: k for k, u in enumerate(users)}
    col = {c: k for k, c in enumerate(cluster_ids)}
    M = np.zeros((len(users), len(cluster_ids)))
    for s, lab in zip(stay_points, labels):
        if lab in col:
            M[row[str(s.user_id)], col[lab]] += 1
    if binary:
        M = (M > 0).astype(float)
    return M, tuple(users), tuple(cluster_ids)


def rank_pois(clusters, scores, k=None):
    """Clusters ordered by authority, then distinct users, dwell and id.

    Authorities are compared at 1e-12 resolution so that rounding noise
    cannot reorder clusters whose scores are mathematically tied.
    """
    scored = [replace(c, authority=max(0.0, scores.authority_of(c.cluster_id)))
              for c in clusters]
    scored.sort(key=lambda c: (-round(c.authority, 12), -c.distinct_users,
                               -c.total_dwell_s, c.cluster_id))
    if k is None:
        return scored
    return scored[:max(k, 0)]
