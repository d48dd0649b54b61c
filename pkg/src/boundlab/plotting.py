"""Figure rendering for CLI result tables (written next to the CSV output)."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402


def _col(table, name):
    i = table.columns.index(name)
    return [row[i] for row in table.rows]


def render(table, subcommand: str, path: str, dpi: int = 150) -> str:
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    if subcommand == "bohr":
        ax.plot(_col(table, "rho_candidate"), _col(table, "size"), "o-")
        ax.set_xlabel("candidate radius")
        ax.set_ylabel("|B(S, rho)|")
        ax.set_title("Bohr set size over the search window")
    elif subcommand == "cover":
        vals = [v for t, v in zip(_col(table, "trial"), _col(table, "union_measure"))
                if t != "mean"]
        ax.hist(vals, bins=30, color="steelblue", alpha=0.8)
        ax.axvline(table.metadata.get("bound", 0.0), color="crimson",
                   label="expectation bound")
        ax.set_xlabel("union measure")
        ax.set_ylabel("trials")
        ax.legend()
        ax.set_title("random translate unions")
    elif subcommand == "dudley":
        row = table.rows[0]
        ax.bar(["entropy sum", "empirical sup"], [row[0], row[1]],
               color=["steelblue", "darkorange"])
        ax.set_title(f"ratio = {row[2]:.3f}")
    elif subcommand == "tails":
        lam = _col(table, "lambda")
        ax.semilogy(lam, [max(v, 1e-12) for v in _col(table, "frequency")], "o-",
                    label="empirical")
        ax.semilogy(lam, _col(table, "chebyshev"), "--", label="chebyshev")
        ax.semilogy(lam, _col(table, "hoeffding"), "--", label="hoeffding")
        ax.set_xlabel("lambda")
        ax.set_ylabel("tail probability")
        ax.legend()
    elif subcommand == "fkw":
        ax.loglog(_col(table, "t"), [max(v, 1e-16) for v in _col(table, "correlation")],
                  "o-")
        ax.axhline(table.metadata.get("threshold", 0.0), color="crimson",
                   label="c * measure^2")
        ax.set_xlabel("scale t")
        ax.set_ylabel("correlation")
        ax.legend()
    elif subcommand == "lambdap":
        kinds = _col(table, "kind")
        ks = _col(table, "K")
        rand = [k for kind, k in zip(kinds, ks) if kind == "random"]
        ax.hist(rand, bins=20, color="steelblue", alpha=0.8, label="random sets")
        for kind, k in zip(kinds, ks):
            if kind == "structured":
                ax.axvline(k, color="crimson", label="square residues")
        ax.set_xlabel("norm constant K")
        ax.legend()
    elif subcommand == "ergodic":
        if "average" in table.columns:
            ax.plot(_col(table, "N"), _col(table, "average"))
            ax.set_xlabel("N")
            ax.set_ylabel("A_N f(x)")
        elif "sup_dev" in table.columns:
            ax.plot(_col(table, "block"), _col(table, "sup_dev"), "o-",
                    label="pointwise")
            ax.plot(_col(table, "block"), _col(table, "l2_sup_dev"), "s-",
                    label="L2")
            ax.set_xlabel("block")
            ax.set_ylabel("sup deviation")
            ax.legend()
        else:
            ax.bar(["maximal"], [table.rows[0][1]])
    elif subcommand == "similarity":
        if "min_pairwise" in table.columns:
            ax.plot(_col(table, "t"), _col(table, "min_pairwise"))
            ax.set_xlabel("t")
            ax.set_ylabel("min pairwise separation")
        elif "empirical" in table.columns:
            row = table.rows[0]
            ax.bar(["empirical", "exact"], [row[1], row[2]],
                   color=["steelblue", "darkorange"])
            ax.set_title("coverage probability")
        elif "ratio" in table.columns:
            row = table.rows[0]
            ax.bar(["int f", "int F (certified)", "int F (plain)"],
                   [row[0], row[1], row[2]])
        else:
            ax.bar([str(c) for c in table.columns], list(table.rows[0]))
    else:
        ax.text(0.5, 0.5, "no figure for this table", ha="center")
    fig.tight_layout()
    fig.savefig(path, dpi=dpi)
    plt.close(fig)
    return path
