"""Plot the outputs of one vort1d run directory.

usage: python scripts/plot_run.py OUT_DIR

Reads timeseries.csv and any snapshot_*.csv and writes PNGs next to them.
Needs pandas and matplotlib.
"""
import sys
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import pandas as pd


def main(out: Path) -> None:
    ts = pd.read_csv(out / "timeseries.csv")
    fig, ax = plt.subplots(1, 2, figsize=(10, 4))
    ax[0].plot(ts.t, ts.linf_HOmega + ts.linf_Homega, label="|HΩ|∞ + |Hω|∞")
    ax[0].set_xlabel("t")
    ax[0].legend()
    ax[1].plot(ts.t, ts.linf_ux, label="|u_x|∞")
    ax[1].plot(ts.t, ts.linf_Bx, label="|B_x|∞")
    ax[1].set_xlabel("t")
    ax[1].legend()
    fig.tight_layout()
    fig.savefig(out / "norms.png", dpi=120)

    snaps = sorted(out.glob("snapshot_*.csv"))
    if snaps:
        fig, ax = plt.subplots(1, 2, figsize=(10, 4))
        for path in snaps:
            s = pd.read_csv(path)
            label = path.stem.split("_t")[-1]
            ax[0].plot(s.x, s.Omega, label=f"t={label}")
            ax[1].plot(s.x, s.omega, label=f"t={label}")
        ax[0].set_title("Ω")
        ax[1].set_title("ω")
        ax[1].legend(fontsize="small")
        fig.tight_layout()
        fig.savefig(out / "snapshots.png", dpi=120)


if __name__ == "__main__":
    main(Path(sys.argv[1]))
