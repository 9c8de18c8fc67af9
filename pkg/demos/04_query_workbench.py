"""Build a two-chart query panorama, save it, and explore profiles.

The saved ``.ucreg.json`` file carries everything needed for later
queries: coefficients, standardization, and per-attribute defaults.  A
session submits evolving profile states and reads the streamgraph
series; attaching the original table also surfaces the most similar
cases.
"""

import pathlib
import tempfile
import warnings

from ucreg.dataset import load_table
from ucreg.errors import ConvergenceWarning
from ucreg.panorama import ChartSpec, build_panorama, load, save
from ucreg.query import QuerySession, similar_cases, streamgraph, submit_state

HERE = pathlib.Path(__file__).resolve().parent
zoo = load_table((HERE.parent / "data" / "zoo.csv").read_bytes())

specs = [
    ChartSpec("is mammal", "type", ("1",), ("milk", "legs", "catsize")),
    ChartSpec("bird / fish / mammal", "type", ("2", "4", "1"),
              ("feathers", "fins", "legs", "aquatic")),
]
with warnings.catch_warnings():
    warnings.simplefilter("ignore", ConvergenceWarning)
    pf = build_panorama(zoo, specs)

out = pathlib.Path(tempfile.mkdtemp()) / "zoo.ucreg.json"
out.write_bytes(save(pf))
print(f"saved learning file: {out} ({out.stat().st_size} bytes)")

pf = load(out.read_bytes())  # later session: restore and query
session = QuerySession(panorama=pf, dataset=zoo)

# profile states: start from the stored defaults, then morph toward a bird
profile = dict(pf.default_profile)
print("\ndefaults:", {k: round(v, 2) for k, v in profile.items()})
for step in (
    {},
    {"feathers": 1.0, "milk": 0.0},
    {"legs": 2.0, "fins": 0.0, "aquatic": 0.0, "catsize": 0.0},
):
    profile.update(step)
    submit_state(session, dict(profile))

g = streamgraph(session, "bird / fish / mammal")
print("\nstreamgraph series over the three states:")
for label, series in zip(g["labels"], g["series"]):
    pretty = {"1": "mammal", "2": "bird", "4": "fish"}[label]
    print(f"  {pretty:6s} " + "  ".join(f"{v:.3f}" for v in series))

cases = similar_cases(zoo, profile, pf.chart("bird / fish / mammal"), top_n=5)
animals = zoo.column("animal")
print("\nmost similar cases to the final profile:")
for row_id, sim in cases:
    print(f"  {animals[row_id]:10s} similarity {sim:+.3f}")
