"""Lindbladian of the dissipative chain (site dimension 4)."""

from _common import run

if __name__ == "__main__":
    run(
        "open_system",
        experiment="open",
        d=[3, 4, 5, 8, 16, 32, 64],
        alpha=[1.0],
        eps=[1e-4, 1e-8, 1e-12],
        timing=False,
    )
