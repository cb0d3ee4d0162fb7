"""Reporting: decision tables, diff summaries, and agreement figures.

The delimited decision table doubles as the regression format committed
next to the bundled fixtures. Figures are rendered headlessly to files;
matplotlib only loads when a figure is actually requested.
"""

from __future__ import annotations

from pathlib import Path

from .errors import EdgeNotFound
from .instance import ArraInstance, OP_KINDS
from .rra97 import Rra97Instance
from .translate import DiffReport, reference_decider
from .uarbac import UarbacInstance

TABLE_HEADER = ("op", "user", "r1", "r2", "outcome")


def decision_rows(inst) -> list[tuple[str, str, str, str, str]]:
    """Every (op, user, ordered role pair) decision of an instance.

    Reference models answer through their native semantics, with
    structurally inapplicable remove rows marked n/a. ARRA instances
    answer queries through their rules alone.
    """
    if isinstance(inst, (Rra97Instance, UarbacInstance)):
        ops, decide = reference_decider(inst)
        users = sorted(inst.users)

        def outcome(op: str, user: str, r1: str, r2: str) -> str:
            try:
                return "allow" if decide(op, user, r1, r2).allowed else "deny"
            except EdgeNotFound:
                return "n/a"

    elif isinstance(inst, ArraInstance):
        ops = inst.aop
        users = sorted(inst.admin_users)

        def outcome(op: str, user: str, r1: str, r2: str) -> str:
            return "allow" if inst.authorize(op, user, r1, r2).allowed else "deny"

    else:
        raise TypeError(f"no decision surface for {type(inst).__name__}")

    roles = inst.roles.sorted_nodes
    rows = []
    for op in sorted(ops):
        for user in users:
            for r1 in roles:
                for r2 in roles:
                    if r1 != r2:
                        rows.append((op, user, r1, r2, outcome(op, user, r1, r2)))
    return rows


def write_decision_table(rows, path: str | Path, comment: str | None = None) -> None:
    lines = []
    if comment:
        lines.append(f"# {comment}")
    lines.append("\t".join(TABLE_HEADER))
    for row in rows:
        lines.append("\t".join(row))
    Path(path).write_text("\n".join(lines) + "\n")


def read_decision_table(path: str | Path) -> list[tuple[str, str, str, str, str]]:
    rows = []
    for line in Path(path).read_text().splitlines():
        if not line or line.startswith("#") or line.startswith("op\t"):
            continue
        parts = tuple(line.split("\t"))
        if len(parts) != 5:
            raise ValueError(f"malformed table row: {line!r}")
        rows.append(parts)
    return rows


# --- diff rendering ----------------------------------------------------------


def format_diff(report: DiffReport, trace: bool = False) -> str:
    lines = [report.headline()]
    lines.append(
        f"compared {report.compared}, structurally inapplicable {report.skipped}"
    )
    per_op: dict[str, list[int]] = {}
    for row in report.rows:
        bucket = per_op.setdefault(row.op, [0, 0, 0])
        if row.reference == "n/a":
            bucket[2] += 1
        elif row.reference == "allow":
            bucket[0] += 1
        else:
            bucket[1] += 1
    for op in sorted(per_op):
        allow, deny, na = per_op[op]
        lines.append(f"  {op}: {allow} allow, {deny} deny, {na} n/a (reference side)")
    for d in report.disagreements:
        lines.append(
            f"DISAGREE {d.op} {d.user} {d.r1} {d.r2}: "
            f"reference={'allow' if d.reference.allowed else 'deny'} "
            f"translated={'allow' if d.translated.allowed else 'deny'}"
        )
        if trace:
            for side, decision in (("reference", d.reference), ("translated", d.translated)):
                for entry in decision.trace:
                    lines.append(f"    {side} {entry.describe()}")
    return "\n".join(lines)


def diff_rows(report: DiffReport):
    rows = []
    for row in report.rows:
        agree = "agree" if row.agree else "DISAGREE"
        rows.append((row.op, row.user, row.r1, row.r2, row.reference, row.translated, agree))
    return rows


def write_diff_report(report: DiffReport, outdir: str | Path) -> list[Path]:
    """Write decisions.tsv and one agreement heatmap per operation."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    written = []
    table = outdir / "decisions.tsv"
    lines = ["\t".join(("op", "user", "r1", "r2", "reference", "translated", "agreement"))]
    for row in diff_rows(report):
        lines.append("\t".join(row))
    table.write_text("\n".join(lines) + "\n")
    written.append(table)
    for op in sorted({row.op for row in report.rows}):
        png = outdir / f"agreement_{op}.png"
        _render_heatmap(report, op, png)
        written.append(png)
    return written


def _render_heatmap(report: DiffReport, op: str, path: Path) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    from matplotlib.colors import ListedColormap

    rows = [row for row in report.rows if row.op == op]
    users = sorted({row.user for row in rows})
    pairs = sorted({(row.r1, row.r2) for row in rows})
    index = {pair: i for i, pair in enumerate(pairs)}
    # 0 both deny, 1 both allow, 2 n/a, 3 disagreement
    grid = [[2.0] * len(pairs) for _ in users]
    for row in rows:
        j = index[(row.r1, row.r2)]
        i = users.index(row.user)
        if row.reference == "n/a":
            grid[i][j] = 2.0
        elif not row.agree:
            grid[i][j] = 3.0
        else:
            grid[i][j] = 1.0 if row.reference == "allow" else 0.0
    cmap = ListedColormap(["#d9d9d9", "#2b8a3e", "#f1f3f5", "#c92a2a"])
    fig, ax = plt.subplots(figsize=(max(6, len(pairs) * 0.12), max(2, len(users) * 0.5)))
    ax.imshow(grid, aspect="auto", cmap=cmap, vmin=0, vmax=3, interpolation="nearest")
    ax.set_yticks(range(len(users)), users)
    ax.set_xticks([])
    ax.set_xlabel(f"{len(pairs)} ordered role pairs")
    ax.set_title(f"{op}: deny (grey) / allow (green) / n-a (light) / disagree (red)")
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)
