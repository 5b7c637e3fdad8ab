"""Static SVG rendering of a recorded run: arena, targets, paths, freeze marks."""
from __future__ import annotations

from pathlib import Path

_COLORS = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
]


def _fmt(x: float) -> str:
    return f"{x:.4f}"


def _bbox(meta: dict) -> tuple[float, float, float, float]:
    env = meta["environment"]
    if env["kind"] == "circle":
        cx, cy = env["center"]
        r = env["radius"]
        return cx - r, cy - r, cx + r, cy + r
    xs = [v[0] for v in env["vertices"]]
    ys = [v[1] for v in env["vertices"]]
    return min(xs), min(ys), max(xs), max(ys)


def render_svg(meta: dict, records: list[dict]) -> str:
    """Build the SVG document for one trace (world y-up, image y-down)."""
    xmin, ymin, xmax, ymax = _bbox(meta)
    pad = 0.05 * max(xmax - xmin, ymax - ymin, 1.0)
    xmin, ymin, xmax, ymax = xmin - pad, ymin - pad, xmax + pad, ymax + pad
    width, height = xmax - xmin, ymax - ymin
    scale = 640.0 / max(width, height)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_fmt(width * scale)}" '
        f'height="{_fmt(height * scale)}" '
        f'viewBox="{_fmt(xmin)} {_fmt(-ymax)} {_fmt(width)} {_fmt(height)}">',
        '<g fill="none" stroke-linejoin="round" stroke-linecap="round" '
        'transform="scale(1,-1)">',
    ]
    stroke = 0.02 * max(width, height)

    env = meta["environment"]
    if env["kind"] == "circle":
        cx, cy = env["center"]
        parts.append(
            f'<circle cx="{_fmt(cx)}" cy="{_fmt(cy)}" r="{_fmt(env["radius"])}" '
            f'stroke="#333" stroke-width="{_fmt(stroke)}"/>'
        )
    else:
        pts = " ".join(f"{_fmt(x)},{_fmt(y)}" for x, y in env["vertices"])
        parts.append(
            f'<polygon points="{pts}" stroke="#333" stroke-width="{_fmt(stroke)}"/>'
        )

    for t in meta["targets"]:
        cx, cy = t["center"]
        body = max(t["body_radius"], 0.01 * max(width, height))
        parts.append(
            f'<circle cx="{_fmt(cx)}" cy="{_fmt(cy)}" r="{_fmt(body)}" '
            'fill="#d62728" stroke="none"/>'
        )
        for radius, color in ((t["safe_radius"], "#d62728"), (t["encap_radius"], "#2ca02c")):
            parts.append(
                f'<circle cx="{_fmt(cx)}" cy="{_fmt(cy)}" r="{_fmt(radius)}" '
                f'stroke="{color}" stroke-width="{_fmt(stroke / 2)}" '
                'stroke-dasharray="0.3,0.2"/>'
            )

    n = meta["robots"]
    if records:
        for i in range(n):
            color = _COLORS[i % len(_COLORS)]
            pts = " ".join(
                f"{_fmt(rec['positions'][i][0])},{_fmt(rec['positions'][i][1])}"
                for rec in records
            )
            parts.append(
                f'<polyline points="{pts}" stroke="{color}" '
                f'stroke-width="{_fmt(stroke / 2)}"/>'
            )
        # freeze markers where a robot's frozen flag first turns on
        frozen_seen = [False] * n
        marker = meta.get("body_radius", 0.01 * max(width, height))
        for rec in records:
            for i, fr in enumerate(rec["frozen"]):
                if fr and not frozen_seen[i]:
                    frozen_seen[i] = True
                    x, y = rec["positions"][i]
                    parts.append(
                        f'<circle cx="{_fmt(x)}" cy="{_fmt(y)}" r="{_fmt(marker)}" '
                        f'fill="{_COLORS[i % len(_COLORS)]}" stroke="#000" '
                        f'stroke-width="{_fmt(stroke / 4)}" class="freeze"/>'
                    )

    parts.append("</g></svg>")
    return "\n".join(parts) + "\n"


def render_trajectories(meta: dict, records: list[dict], path: str | Path) -> None:
    """Write the SVG for a trace to ``path``."""
    Path(path).write_text(render_svg(meta, records))
