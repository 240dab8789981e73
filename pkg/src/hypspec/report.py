"""Deterministic output writers.

JSON is sorted-key with native float repr, TSV uses repr floats, and
figures are rendered through the Agg backend with software metadata
stripped, so repeated runs of the same computation produce identical
bytes.
"""

from __future__ import annotations

import json


def dump_json(obj, fh):
    json.dump(obj, fh, sort_keys=True, indent=2)
    fh.write("\n")


def dumps_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def _cell(v):
    if isinstance(v, float):
        return repr(v)
    return str(v)


def dump_tsv(header, rows, fh):
    fh.write("\t".join(header) + "\n")
    for row in rows:
        fh.write("\t".join(_cell(v) for v in row) + "\n")


def render_sharpness_figure(report, path):
    """Log-log decay plot of the sharpness study."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    ks = [r.k for r in report.rows]
    fig, ax = plt.subplots(figsize=(5.0, 3.6))
    ax.loglog(ks, [r.upper for r in report.rows], "o-", label="variational upper bound")
    ax.loglog(ks, [r.lam for r in report.rows], "s--",
              label=f"computed eigenvalue {report.l}")
    parts = []
    if report.fit_upper_exponent is not None:
        parts.append(f"upper ~ k^{report.fit_upper_exponent:.2f}")
    if report.fit_lambda_exponent is not None:
        parts.append(f"lambda ~ k^{report.fit_lambda_exponent:.2f}")
    title = "block-size decay"
    if parts:
        title += "  (" + ", ".join(parts) + ")"
    ax.set_title(title, fontsize=10)
    ax.set_xlabel("k (half block length)")
    ax.set_ylabel("eigenvalue scale")
    ax.set_xticks(ks)
    ax.set_xticklabels([str(k) for k in ks])
    ax.legend(fontsize=8)
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=120, metadata={"Software": None})
    plt.close(fig)
