"""Rank symptoms of a synthetic cohort by how much disease uncertainty they remove.

    python3 demos/significance_walkthrough.py
"""
import warnings

from cardiopipe.discretize import discretize
from cardiopipe.ingest import class_distribution
from cardiopipe.preprocess import drop_unusable
from cardiopipe.significance import entropy, prior_entropy, rank_symptoms
from cardiopipe.synthetic import synthetic_dataset

warnings.simplefilter("ignore")

ds = synthetic_dataset((164, 55, 36, 35, 13), seed=0, name="demo")
counts = class_distribution(ds)
print("class counts:", counts)

# I0 is the entropy of the presence/absence split, not of the five classes
absent, present = counts[0], sum(counts[1:])
print(f"I0 binary     = {prior_entropy(ds.labels):.6f} bits  (= H({absent}, {present}))")
print(f"H five-class  = {entropy(counts):.6f} bits")

usable = drop_unusable(ds)
ranking = rank_symptoms(ds, usable, view=discretize(ds))
print(f"\n{'rank':>4}  {'symptom':<10} {'I bits':>8} {'S':>7}")
for s in ranking[:10]:
    print(f"{s.rank:>4}  {s.name:<10} {s.I:>8.4f} {s.S:>7.4f}")
