"""
Ranking places and mining travel sequences
==========================================

Users are hubs, places are authorities: a place is interesting when
experienced travellers go there. Sequences of places are then scored
by the places they pass through and the people who travel them.
"""

import numpy as np

from trajmine import (SynthSpec, build_tbhg, clean, detect_corpus, generate_synthetic,
                      hits_scores, mine_sequences, rank_pois)

corpus = generate_synthetic(SynthSpec(seed=5))
stays = detect_corpus([clean(t) for t in corpus.trajectories])
tbhg = build_tbhg(stays, (500.0, 250.0))
fine = tbhg.levels[-1]

M, users, ids = tbhg.visit_matrix()
print("visit matrix", M.shape, "with", int(M.sum()), "visits")
scores = hits_scores(M, users, ids)
print(f"converged in {scores.iterations} iterations, residual {scores.residual:.1e}")

# the authority vector is the leading eigenvector of M^T M
w, v = np.linalg.eigh(M.T @ M)
lead = np.abs(v[:, -1])
print("max difference to eigh:", np.abs(lead - scores.authority).max())

for c in rank_pois(fine.clusters, scores, k=5):
    print(f"cluster {c.cluster_id:2d}  authority {c.authority:.3f}  "
          f"{c.distinct_users} users  {c.total_dwell_s / 3600:.1f} h")

top_hub = users[int(np.argmax(scores.hub))]
print("most experienced traveller:", top_hub)

for seq in mine_sequences(fine, scores, max_len=3, k=5):
    print(" -> ".join(map(str, seq.clusters)), f"score {seq.score:.3f} support {seq.support}")
