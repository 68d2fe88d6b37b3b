"""Cosine interaction: HSS rank d/2 and TTNO rank d/2 + 3."""

from _common import run

if __name__ == "__main__":
    run("synthetic", experiment="synthetic", d=[8, 16, 32, 64, 128], eps=[1e-12], timing=False)
