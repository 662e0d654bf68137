"""Optional figure output shared by the demos (skipped without matplotlib)."""

from pathlib import Path

OUT = Path(__file__).with_name("output")


def save(fig_name, draw):
    try:
        import matplotlib
        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError:
        return None
    OUT.mkdir(exist_ok=True)
    fig, ax = plt.subplots(figsize=(5, 3.5))
    draw(ax)
    fig.tight_layout()
    path = OUT / fig_name
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path
