"""
From raw tracks to points of interest
=====================================

Generate a small synthetic corpus with planted dwells, detect stay
points, then cluster them at two density levels.
"""

from collections import Counter

import numpy as np

from trajmine import OpticsParams, SynthSpec, build_tbhg, clean, detect_corpus, generate_synthetic

corpus = generate_synthetic(SynthSpec(users=6, trajectories_per_user=6, seed=3))
print(len(corpus.trajectories), "trajectories,",
      sum(len(t.points) for t in corpus.trajectories), "fixes,",
      len(corpus.truth["dwells"]), "planted dwells")

# a stay point is a run of fixes that stays within 200 m of its first fix
# for at least 20 minutes
stays = detect_corpus([clean(t) for t in corpus.trajectories])
print(len(stays), "stay points")
s = stays[0]
print(f"first: user={s.user_id} lat={s.lat:.5f} lon={s.lon:.5f} "
      f"stayed {(s.departure - s.arrival) / 60:.0f} min over {s.member_count} fixes")

# coarse (500 m) and fine (250 m) clusterings of the same ordering
tbhg = build_tbhg(stays, (500.0, 250.0), OpticsParams(min_pts=3, eps_m=1000.0))
for lv in tbhg.levels:
    noise = sum(lab < 0 for lab in lv.labels)
    print(f"eps'={lv.eps_prime_m:.0f} m: {len(lv.clusters)} clusters, {noise} noise points")

fine = tbhg.levels[-1]
sizes = Counter(lab for lab in fine.labels if lab >= 0)
print("stay points per fine cluster:", dict(sorted(sizes.items())))
print("fine -> coarse parent:", fine.parents)

# the OPTICS reachability plot, as text
o = tbhg.ordering
r = np.nan_to_num(o.reachability[o.order], posinf=np.nan)
print("reachability quantiles (m):", np.round(np.nanquantile(r, [0.1, 0.5, 0.9])))
