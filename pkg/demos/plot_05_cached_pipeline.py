"""
The cached pipeline
===================

Stages write their artifacts to a store keyed by content hashes.
Changing a parameter reruns only the stages that depend on it.
"""

import tempfile
from pathlib import Path

from trajmine import PipelineConfig, SynthSpec, plan_from_store, report, run_pipeline, write_synthetic

root = Path(tempfile.mkdtemp())
write_synthetic(root / "logs", SynthSpec(users=5, trajectories_per_user=5, seed=9))

cfg = PipelineConfig().with_overrides({"input.dir": str(root / "logs"), "plan.days": 2})
store, status = run_pipeline(cfg, root / "store")
print(status)

# nothing changed, nothing reruns
print(run_pipeline(cfg, store)[1])

# a longer minimum dwell changes the stay points and everything after them
longer = cfg.with_overrides({"staypoint.time_threshold_s": 1800.0})
print(run_pipeline(longer, store)[1])

print(report(store).render())

plan, catalog, start = plan_from_store(store, longer)
print(f"plan from ({start.lat:.4f}, {start.lon:.4f}):", [d.pois for d in plan.days])
print(sorted(p.name for p in store.root.iterdir()))
