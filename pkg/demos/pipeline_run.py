"""Run the four-agent pipeline on two synthetic cohorts and write the outputs.

    python3 demos/pipeline_run.py [OUT_DIR]
"""
import sys
import warnings

from cardiopipe import nbc
from cardiopipe.evaluation import emit_tables
from cardiopipe.pipeline import run_many, write_run
from cardiopipe.synthetic import synthetic_dataset

warnings.simplefilter("ignore")
out = sys.argv[1] if len(sys.argv) > 1 else "demo_out"

cohorts = [synthetic_dataset((164, 55, 36, 35, 13), seed=1, name="cohort-a"),
           synthetic_dataset((51, 56, 41, 42, 10), seed=2, name="cohort-b")]
runs = run_many(cohorts, jobs=2)

for run in runs:
    r = run.report
    print(f"{r.name}: filter kept {len(r.filter_subset.retained)}, "
          f"wrapper kept {[r.schema[a].name for a in r.wrapper_subset.retained]}")
    print(f"  accuracy {r.metrics.accuracy:.3f}  binary {r.metrics.binary_accuracy:.3f}"
          f"  majority baseline {r.metrics.majority_baseline:.3f}")
    for entry in run.manifest.entries:
        print(f"  {entry.agent:<18} -> {entry.output[0]:<15} {entry.output[1][:12]}")
    write_run(run, out)

emit_tables([r.report for r in runs], nbc.default_prior_table()).write(out)
print(f"\nreports and tables written to {out}/")
