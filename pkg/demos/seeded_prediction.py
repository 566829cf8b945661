"""Predict severity straight from the shipped symptom-likelihood table.

No training data is involved: each table row gives P(symptom present | class).

    python3 demos/seeded_prediction.py
"""
from cardiopipe import nbc
from cardiopipe.ingest import default_schema

schema = default_schema()
table = nbc.default_prior_table()
model = nbc.seed_model_from_table(table)


def show(present=(), absent=()):
    values = {schema.by_name(n).id: 1 for n in present}
    values.update({schema.by_name(n).id: 0 for n in absent})
    post = nbc.posterior(model, nbc.record_from_values(values))
    probs = "  ".join(f"{p:.3f}" for p in post.probabilities)
    print(f"present={list(present)} absent={list(absent)}\n  {probs} -> {post.predicted.title}")


show(present=["PAINLOC"])
show(absent=["PAINLOC"])
show(present=["PAINLOC", "PAINEXER", "RELREST"])
show(present=["SMOKE", "HTN"], absent=["PAINEXER"])
