"""Balanced against degenerate trees: rank and memory for growing d."""

from _common import run

if __name__ == "__main__":
    run(
        "compare_trees",
        experiment="compare-trees",
        d=[16, 32, 64, 128, 256],
        alpha=[1.0],
        eps=[1e-4, 1e-12],
        oracle=False,
        timing=False,
    )
