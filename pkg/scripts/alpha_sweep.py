"""Representation rank as a function of the interaction exponent."""

from _common import run

if __name__ == "__main__":
    run(
        "alpha_sweep",
        experiment="closed",
        d=[16, 64, 256],
        alpha=[0.0, 0.5, 1.0, 2.0, 3.0, 6.0, "inf"],
        eps=[1e-4, 1e-12],
        oracle=False,
        timing=False,
    )
