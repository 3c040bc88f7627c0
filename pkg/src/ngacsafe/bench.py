"""Enumeration-versus-brute-force measurements, CSV tables, and figures."""

from __future__ import annotations

import csv
import math
import time
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Optional, Sequence

from ngacsafe.dacc import ConstraintGraph, enumerate_mis
from ngacsafe.oracles import brute_force_mis, limit
from ngacsafe.reductions import gen_disjoint_triangles


@dataclass(frozen=True)
class MisRow:
    label: str
    vertices: int
    conflicts: int
    mis: int
    moon_moser: float
    subsets: int
    mis_ms: float
    brute_ms: Optional[float]

    def as_json(self, timing: bool = True) -> dict:
        doc = {
            "label": self.label,
            "vertices": self.vertices,
            "conflicts": self.conflicts,
            "misEnumerated": self.mis,
            "moonMoserBound": round(self.moon_moser, 6),
            "naiveSubsets": self.subsets,
        }
        if timing:
            doc["misMs"] = round(self.mis_ms, 3)
            doc["bruteMs"] = None if self.brute_ms is None else round(self.brute_ms, 3)
        return doc


def measure_mis(graph: ConstraintGraph, label: str = "", brute_limit: Optional[int] = None) -> MisRow:
    n = len(graph.vertices)
    t0 = time.perf_counter()
    count = sum(1 for _ in enumerate_mis(graph))
    mis_ms = (time.perf_counter() - t0) * 1000.0
    cap = min(limit("mis"), 16 if brute_limit is None else brute_limit)
    brute_ms = None
    if n <= cap:
        t0 = time.perf_counter()
        brute = brute_force_mis(graph)
        brute_ms = (time.perf_counter() - t0) * 1000.0
        if len(brute) != count:
            raise AssertionError(f"enumeration found {count} sets, brute force {len(brute)}")
    return MisRow(label, n, len(graph.conflicts), count, 3 ** (n / 3), 2 ** n, mis_ms, brute_ms)


def triangle_sweep(k: int, brute_limit: Optional[int] = None) -> list[MisRow]:
    return [measure_mis(gen_disjoint_triangles(j), f"triangles-{j}", brute_limit) for j in range(1, k + 1)]


def write_csv(rows: Sequence[MisRow], path: Path) -> None:
    fields = list(asdict(rows[0]).keys()) if rows else [f for f in MisRow.__dataclass_fields__]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, fieldnames=fields)
        w.writeheader()
        for r in rows:
            w.writerow({k: round(v, 3) if isinstance(v, float) else v for k, v in asdict(r).items()})


def plot_rows(rows: Sequence[MisRow], path: Path) -> Path:
    """Two panels: set counts against both bounds, and wall time per method."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    golden = (math.sqrt(5) - 1.0) / 2.0
    width = 10
    fig, (ax_count, ax_time) = plt.subplots(1, 2, figsize=(width, width * golden / 1.6), facecolor="w")
    n = [r.vertices for r in rows]

    ax_count.semilogy(n, [r.mis for r in rows], "o-", label="maximal independent sets")
    ax_count.semilogy(n, [r.moon_moser for r in rows], "k--", label=r"$3^{n/3}$")
    ax_count.semilogy(n, [r.subsets for r in rows], ":", color="gray", label=r"$2^n$ subsets")
    ax_count.set_xlabel("constraint graph vertices")
    ax_count.set_ylabel("count")
    ax_count.legend(loc="upper left", fontsize=8)

    ax_time.semilogy(n, [max(r.mis_ms, 1e-3) for r in rows], "o-", label="enumeration")
    brute = [(r.vertices, max(r.brute_ms, 1e-3)) for r in rows if r.brute_ms is not None]
    if brute:
        ax_time.semilogy(*zip(*brute), "s--", label="brute force")
    ax_time.set_xlabel("constraint graph vertices")
    ax_time.set_ylabel("wall time (ms)")
    ax_time.legend(loc="upper left", fontsize=8)

    for ax in (ax_count, ax_time):
        ax.set_xticks(n)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return Path(path)
