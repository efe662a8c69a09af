"""Parameter sweeps over p (or wp(p)) with per-sample critical point counts.

Each grid node yields one PhaseSample: the pole location p, wp(p), the
number of critical points of G_p, the region invariant m (how many half
periods have positive Hessian determinant), the four determinant signs and
the classification multiset of the nontrivial points.  Samples falling in
the exclusion bands (half periods in p-mode; branch values e_k or region
boundaries in wp-mode) are skipped and counted.  Output ordering is
row-major and independent of the worker count, so CSV output is
byte-identical across runs.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

from .critpoints import FinderOptions, find_critical_points_Gp
from .degeneracy import classify_region
from .elliptic import LatticeData, make_lattice, torus_distance, wp
from .hitchin import wp_inverse

CSV_HEADER = "re_wp,im_wp,re_p,im_p,count,m,nondeg"
CSV_SCHEMA_LINE = "# schema=1"

#: membership-distance width of the boundary exclusion band
EXCLUSION_BAND = 1e-6


@dataclass(frozen=True)
class ScanConfig:
    tau: complex
    grid: int = 32
    mode: str = "p"  # "p" | "wp"
    seed_density: int = 16
    out: str | None = None
    fmt: str = "csv"  # "csv" | "json"
    workers: int = 1
    wp_window: tuple[float, float, float, float] | None = None  # (re0, re1, im0, im1)
    p_window: tuple[float, float, float, float] | None = None  # (r0, r1, s0, s1), default cell
    band: float = EXCLUSION_BAND

    def __post_init__(self):
        if self.grid < 8:
            raise ValueError("grid must be >= 8")
        if self.mode not in ("p", "wp"):
            raise ValueError("mode must be 'p' or 'wp'")
        if self.fmt not in ("csv", "json"):
            raise ValueError("format must be 'csv' or 'json'")


@dataclass
class PhaseSample:
    index: int
    p: complex | None
    wp_p: complex
    count: int
    m: int
    signs: tuple[int, int, int, int]
    all_nondegenerate: bool
    nontrivial_classes: tuple[str, ...]
    valid: bool
    menu_ok: bool
    note: str = ""


def _wp_nodes(cfg: ScanConfig):
    if cfg.wp_window is None:
        lim = 6.0 * math.pi
        window = (-lim, lim, -lim, lim)
    else:
        window = cfg.wp_window
    re0, re1, im0, im1 = window
    dx = (re1 - re0) / cfg.grid
    dy = (im1 - im0) / cfg.grid
    nodes = []
    for iy in range(cfg.grid):
        for ix in range(cfg.grid):
            nodes.append(complex(re0 + (ix + 0.5) * dx, im0 + (iy + 0.5) * dy))
    return nodes


def _p_nodes(cfg: ScanConfig, L: LatticeData):
    r0, r1, s0, s1 = cfg.p_window if cfg.p_window is not None else (0.0, 1.0, 0.0, 1.0)
    nodes = []
    for iy in range(cfg.grid):
        for ix in range(cfg.grid):
            r = r0 + (ix + 0.5) * (r1 - r0) / cfg.grid
            s = s0 + (iy + 0.5) * (s1 - s0) / cfg.grid
            nodes.append(r + s * L.tau)
    return nodes


def _excluded(cfg: ScanConfig, L: LatticeData, node: complex) -> bool:
    if cfg.mode == "p":
        return min(torus_distance(node, L.half_period(k), L) for k in range(4)) < cfg.band
    # wp-mode: keep clear of the branch values and the region boundaries
    for ek in L.e:
        if abs(node - ek) < cfg.band * (1.0 + abs(ek)):
            return True
    region = classify_region(node, L, band=cfg.band)
    return any(m == "boundary" for m in region.memberships)


def _evaluate(cfg: ScanConfig, L: LatticeData, index: int, node: complex) -> PhaseSample:
    try:
        if cfg.mode == "p":
            p = node
            wp_p = wp(p, L)
        else:
            wp_p = node
            p, _ = wp_inverse(wp_p, L)
        region = classify_region(wp_p, L, band=cfg.band)
        cs = find_critical_points_Gp(
            p, L, FinderOptions(seed_density=cfg.seed_density)
        )
        classes = tuple(sorted(c.classification for c in cs.nontrivial))
        menu_ok = (not cs.all_nondegenerate) or (cs.count in region.menu)
        return PhaseSample(
            index=index,
            p=p,
            wp_p=wp_p,
            count=cs.count,
            m=region.m,
            signs=region.signs,
            all_nondegenerate=cs.all_nondegenerate,
            nontrivial_classes=classes,
            valid=True,
            menu_ok=menu_ok,
        )
    except Exception as exc:  # per-sample failures leave the scan running
        return PhaseSample(
            index=index,
            p=node if cfg.mode == "p" else None,
            wp_p=node if cfg.mode == "wp" else 0j,
            count=-1,
            m=-1,
            signs=(0, 0, 0, 0),
            all_nondegenerate=False,
            nontrivial_classes=(),
            valid=False,
            menu_ok=True,
            note=f"{type(exc).__name__}: {exc}",
        )


def _scan_chunk(args) -> list[PhaseSample]:
    cfg, items = args
    L = make_lattice(cfg.tau)
    return [_evaluate(cfg, L, idx, node) for idx, node in items]


def run_scan(cfg: ScanConfig) -> tuple[list[PhaseSample], dict]:
    """Run the sweep; returns (samples ordered row-major, summary dict)."""
    L = make_lattice(cfg.tau)
    nodes = _p_nodes(cfg, L) if cfg.mode == "p" else _wp_nodes(cfg)
    work = [
        (i, node) for i, node in enumerate(nodes) if not _excluded(cfg, L, node)
    ]
    excluded = len(nodes) - len(work)

    if cfg.workers > 1 and len(work) > 8:
        nchunks = max(1, min(len(work), 4 * cfg.workers))
        chunks = [
            (cfg, work[i::nchunks]) for i in range(nchunks)
        ]
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            parts = list(pool.map(_scan_chunk, chunks))
        samples = [s for part in parts for s in part]
        samples.sort(key=lambda s: s.index)
    else:
        samples = _scan_chunk((cfg, work))

    hist: dict[str, int] = {}
    invalid = violations = 0
    for s in samples:
        if not s.valid:
            invalid += 1
            continue
        if not s.menu_ok:
            violations += 1
        key = f"m={s.m},count={s.count}"
        hist[key] = hist.get(key, 0) + 1
    summary = {
        "total_nodes": len(nodes),
        "excluded": excluded,
        "evaluated": len(samples),
        "invalid": invalid,
        "menu_violations": violations,
        "histogram": dict(sorted(hist.items())),
    }
    return samples, summary


def _fmt_float(x: float) -> str:
    return format(float(x), ".17g")


def samples_to_csv(samples: list[PhaseSample]) -> str:
    lines = [CSV_SCHEMA_LINE, CSV_HEADER]
    for s in samples:
        p = s.p if s.p is not None else complex(math.nan, math.nan)
        lines.append(
            ",".join(
                [
                    _fmt_float(s.wp_p.real),
                    _fmt_float(s.wp_p.imag),
                    _fmt_float(p.real),
                    _fmt_float(p.imag),
                    str(s.count),
                    str(s.m),
                    "1" if s.all_nondegenerate else "0",
                ]
            )
        )
    return "\n".join(lines) + "\n"


def _cplx(z: complex | None):
    if z is None:
        return None
    return {"re": z.real, "im": z.imag}


def samples_to_json(cfg: ScanConfig, samples: list[PhaseSample], summary: dict) -> str:
    payload = {
        "schema": 1,
        "tau": _cplx(cfg.tau),
        "mode": cfg.mode,
        "grid": cfg.grid,
        "samples": [
            {
                "index": s.index,
                "p": _cplx(s.p),
                "wp_p": _cplx(s.wp_p),
                "count": s.count,
                "m": s.m,
                "signs": list(s.signs),
                "nondeg": s.all_nondegenerate,
                "nontrivial_classes": list(s.nontrivial_classes),
                "valid": s.valid,
                "menu_ok": s.menu_ok,
                "note": s.note,
            }
            for s in samples
        ],
        "summary": summary,
    }
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"
