import os
import sys
import time

from dotenv import load_dotenv
from tqdm import tqdm

sys.path.insert(0, os.path.join(os.path.dirname(os.path.abspath(__file__)), '..', 'simulator'))

from harness import load_experiment_config, sweep  # noqa: E402
from models import ExperimentConfig  # noqa: E402

load_dotenv()

OUT_DIR = os.getenv('SWIPT_RESULTS_DIR', 'results')
BASE_CONFIG = os.getenv('SWIPT_BASE_CONFIG')

ALL_SCHEMES = ["sa-ssca", "low-complexity", "channel-power-max", "random", "instantaneous"]
TWO_TIMESCALE = ["sa-ssca", "low-complexity", "channel-power-max", "random"]

# (parameter, values, schemes)
SWEEPS = [
    ("pt_dbm", [30, 35, 40, 45, 50], ALL_SCHEMES),
    ("m", [1, 2, 4, 6, 8], ALL_SCHEMES),
    ("eps_uw", [0.5, 1, 2, 4, 8], ALL_SCHEMES),
    ("n_r", [4, 8, 16, 32], ALL_SCHEMES),
    ("q_bits", [1, 2, 3, 0], ["sa-ssca", "low-complexity"]),
    ("csi_delay_ms", [0, 1, 2, 5, 10], ALL_SCHEMES),
    ("stat_error_db", [-30, -20, -10, -5], TWO_TIMESCALE),
    ("x_mo_m", [0, 5, 10, 20, 40], ["sa-ssca", "low-complexity"]),
    ("t_c", [1, 2, 4, 8, 16], ["sa-ssca"]),
]

base = ExperimentConfig() if not BASE_CONFIG else load_experiment_config(BASE_CONFIG)
if base.doppler_hz == 0:
    # the delay sweep is flat without a Doppler spread
    base = base.model_copy(update={'doppler_hz': 10.0})

print("=" * 60)
print("FIGURE-TREND SWEEPS")
print("=" * 60)
print(f"Results directory: {OUT_DIR}")
print(f"Frames: {base.t_f}, slots: {base.t_s}, realizations: {base.n_realizations}")

total_start = time.time()
failed = []

for parameter, values, schemes in tqdm(SWEEPS, desc="Sweeps"):
    start_time = time.time()
    out_path = os.path.join(OUT_DIR, f"sweep_{parameter}.csv")
    try:
        records = sweep(base, parameter, values, schemes, out_path)
        elapsed = time.time() - start_time
        dropped = sum(r.n_dropped for r in records)
        print(f"  ✅ {parameter}: {len(records)} points in {elapsed:.1f}s ({dropped} slots dropped)")
    except Exception as e:
        failed.append(parameter)
        print(f"  ❌ {parameter} failed: {e}")

total_elapsed = time.time() - total_start

print("\n" + "=" * 60)
print(f"Done in {total_elapsed / 60:.1f} minutes")
if failed:
    print(f"⚠️ Failed sweeps: {', '.join(failed)}")
print("=" * 60)

sys.exit(1 if failed else 0)
