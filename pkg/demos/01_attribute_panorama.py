"""Correlation panorama walkthrough on the classic zoo table.

Decomposes the animal class into per-label presence vectors, correlates
every attribute against every label, and shows how the ranking changes
with the focused label -- the interactive feature-selection loop in
script form.
"""

import pathlib

from ucreg.correlation import GLOBAL, build_panorama, rank_attributes
from ucreg.dataset import decompose_target, load_table
from ucreg.radviz import layout_attributes, place_anchors

HERE = pathlib.Path(__file__).resolve().parent
CLASS_NAMES = {"1": "mammal", "2": "bird", "3": "reptile", "4": "fish",
               "5": "amphibian", "6": "insect", "7": "invertebrate"}

zoo = load_table((HERE.parent / "data" / "zoo.csv").read_bytes())
print(f"loaded {zoo.n_rows} rows, {zoo.n_attrs} numeric attributes")

dec = decompose_target(zoo, "type")
print("labels:", [CLASS_NAMES[l] for l in dec.labels])
print("counts:", dec.counts.tolist())

panorama = build_panorama(zoo, dec)

print("\nglobal ranking (max |r| over labels):")
for name, score in rank_attributes(panorama, GLOBAL)[:6]:
    dom = CLASS_NAMES[dec.labels[panorama.dominant_label[panorama.attr_names.index(name)]]]
    print(f"  {name:10s} {score:5.3f}  (dominant label: {dom})")

fish = dec.labels.index("4")
print("\nhover the fish anchor -> sizes re-encode to |r| against fish:")
for name, score in rank_attributes(panorama, fish)[:5]:
    print(f"  {name:10s} {score:5.3f}")

# the radial layout pulls each attribute toward its correlated labels
ring = place_anchors(panorama.labels)
points = layout_attributes(panorama, ring, focus=GLOBAL)
feathers = next(p for p in points if p.ref_id == "feathers")
bird_anchor = ring.anchors[dec.labels.index("2")]
print(f"\n'feathers' projects to ({feathers.x:+.3f}, {feathers.y:+.3f}); "
      f"bird anchor sits at ({bird_anchor.position[0]:+.3f}, {bird_anchor.position[1]:+.3f})")
