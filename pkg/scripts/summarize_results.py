import glob
import os
import sys

import pandas as pd
from dotenv import load_dotenv

sys.path.insert(0, os.path.join(os.path.dirname(os.path.abspath(__file__)), '..', 'simulator'))

from storage import read_records  # noqa: E402

load_dotenv()

results_dir = sys.argv[1] if len(sys.argv) > 1 else os.getenv('SWIPT_RESULTS_DIR', 'results')

print("=" * 60)
print("SECRECY RATE SUMMARY")
print("=" * 60)

run_files = sorted(glob.glob(os.path.join(results_dir, "run_*.csv")))
sweep_files = sorted(glob.glob(os.path.join(results_dir, "sweep_*.csv")))
trace_files = sorted(glob.glob(os.path.join(results_dir, "convergence_*.csv")))

if not (run_files or sweep_files or trace_files):
    print(f"\n⚠️ No result CSVs in {results_dir}")
    sys.exit(1)

# 1. Single runs
if run_files:
    print("\n1. Single runs:")
    runs = pd.concat([read_records(path) for path in run_files], ignore_index=True)
    for row in runs.itertuples():
        status = "❌" if row.n_dropped >= row.n_slots else "✅"
        print(f"  {status} {row.scheme:18s}: {row.rate_bps_hz:.4f} ± {row.stderr:.4f} bits/s/Hz "
              f"({row.n_slots:,} slots, {row.n_dropped:,} dropped, seed {row.seed})")

# 2. Sweeps, one table per parameter
if sweep_files:
    print("\n2. Sweeps:")
    for path in sweep_files:
        frame = read_records(path)
        parameter = frame['param'].iloc[0]
        print(f"\n  {parameter}:")
        if parameter == 'scheme':
            for row in frame.itertuples():
                print(f"    {row.scheme:18s}: {row.rate_bps_hz:.4f} ± {row.stderr:.4f}")
            continue
        table = frame.pivot_table(index='value', columns='scheme', values='rate_bps_hz')
        for line in table.to_string(float_format=lambda v: f"{v:.4f}").splitlines():
            print(f"    {line}")
        dropped = int(frame['n_dropped'].sum())
        if dropped:
            print(f"    ⚠️ {dropped:,} infeasible slots dropped")

# 3. Convergence traces
if trace_files:
    print("\n3. Surrogate convergence:")
    for path in trace_files:
        trace = pd.read_csv(path)
        name = os.path.basename(path)[len("convergence_"):-len(".csv")]
        head = trace['objective'].head(10).mean()
        tail = trace['objective'].tail(10).mean()
        print(f"  {name}: {len(trace):,} frames, first 10 avg {head:.4f} → last 10 avg {tail:.4f}")

print("\n" + "=" * 60)
print("✅ Summary complete!")
print("=" * 60)
