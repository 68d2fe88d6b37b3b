"""Closed spin chain: error and rank against the HSS tolerance.

Dense errors are reported for d <= 10; larger d give rank and memory only.
"""

from _common import run

if __name__ == "__main__":
    run(
        "closed_system",
        experiment="closed",
        d=[4, 6, 8, 10, 16, 32, 64, 128, 256],
        alpha=[1.0],
        eps=[1e-4, 1e-6, 1e-8, 1e-10, 1e-12],
        timing=False,
    )
