"""Optional matplotlib output shared by the demos."""

from pathlib import Path

OUT = Path(__file__).parent / "output"


def pyplot():
    """Return a non-interactive pyplot, or None when matplotlib is missing."""
    try:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError:
        print("(matplotlib not installed; skipping figures)")
        return None
    OUT.mkdir(exist_ok=True)
    return plt


def surface(plt, sol, title, name):
    X, Y = sol.grid.mesh()
    fig = plt.figure(figsize=(9, 4))
    ax = fig.add_subplot(1, 2, 1, projection="3d")
    ax.plot_surface(X, Y, sol.values, cmap="coolwarm", linewidth=0)
    ax.set_title(title)
    ax2 = fig.add_subplot(1, 2, 2)
    cs = ax2.contour(X, Y, sol.values, levels=21, cmap="coolwarm")
    ax2.clabel(cs, fontsize=6)
    ax2.set_aspect("equal")
    fig.tight_layout()
    fig.savefig(OUT / name, dpi=120)
    plt.close(fig)
    print(f"wrote {OUT / name}")
